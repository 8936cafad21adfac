use std::collections::BTreeSet;
use std::path::Path;

use serde_json::Value;
use shearwave::config::EnvironmentSpec;

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas").join(name);
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn keys(v: &Value) -> BTreeSet<String> {
    v.as_object().unwrap().keys().cloned().collect()
}

#[test]
fn environment_schema_lists_every_field() {
    let full = EnvironmentSpec::from_json(
        r#"{"shear": {"kind": "zero"}, "density": {"kind": "constant", "value": 1000}, "h0": 2,
            "upper": {"kind": "zero", "depth": 1}, "rho_minus": 1000, "rho_plus": 1, "H": 5, "sigma": 0.07}"#,
    )
    .unwrap();
    let serialized: Value = serde_json::from_str(&full.canonical_json()).unwrap();
    let s = schema("environment.schema.json");
    assert_eq!(keys(&s["properties"]), keys(&serialized));
    let required: BTreeSet<String> = s["required"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    assert_eq!(required, ["h0", "shear"].map(String::from).into());
}

#[test]
fn gauge_and_table_schemas_parse() {
    let g = schema("gauge-meta.schema.json");
    assert_eq!(keys(&g["properties"]), ["g", "h0", "modes", "pressure_kind", "rho_ref", "x_gauge"].map(String::from).into());
    let t = schema("table.schema.json");
    assert_eq!(keys(&t["properties"]), ["columns", "meta", "rows"].map(String::from).into());
}
