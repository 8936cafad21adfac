use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use shearwave::config::{EnvironmentSpec, ShearSpec};
use shearwave::dispersion::{
    burns_speed, find_wave_speed_with, generalized_burns_speed, stagnation_condition, two_fluid_dispersion_with,
    DispersionOptions,
};
use shearwave::io::{read_gauge, sidecar_path};
use shearwave::profiles::{DensityProfile, ShearProfile};
use shearwave::rayleigh::{solve_mode_stratified_with, solve_mode_with, ModeSolution};
use shearwave::reconstruct::{
    preprocess_with, reconstruct_hydrostatic, reconstruct_spectral, synthesize_record_with, ModeRequest,
    PreprocessOptions, ReconstructOptions, SynthConfig,
};
use shearwave::transfer::{
    bed_gain, linear_field, nonmonotonicity_profile, slope_changes_sign, transfer_from_mode, transfer_two_fluid,
    TransferFunction,
};
use shearwave::twofluid::{solve_two_layer_modes_with, TwoFluidEnv};
use shearwave::{config::Environment, Error};

use crate::output::{fmt_f64, Artifacts, Cell, Format, Meta, Table};
use crate::{
    BasicArgs, Command, Failure, FieldArgs, KRange, MethodArg, OutArgs, ReconstructArgs, SweepArgs, SynthArgs,
    Tolerances, TransferArgs, UsageError,
};

type Outcome = Result<Vec<PathBuf>, Failure>;

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(UsageError(msg.into())))
}

fn invalid(e: Error) -> Failure {
    Failure::Usage(UsageError(e.to_string()))
}

fn check_positive(name: &str, v: f64) -> Result<(), Failure> {
    if !(v.is_finite() && v > 0.0) {
        return usage(format!("{name} must be a positive number, got {v}"));
    }
    Ok(())
}

fn check_out(out: &OutArgs) -> Result<(), Failure> {
    if out.out.exists() && !out.out.is_dir() {
        return usage(format!("{} exists and is not a directory", out.out.display()));
    }
    Ok(())
}

fn options(tol: &Tolerances) -> Result<DispersionOptions, Failure> {
    check_positive("--rtol", tol.rtol)?;
    check_positive("--atol", tol.atol)?;
    let mut opts = DispersionOptions::default();
    opts.shooting.ode.rtol = tol.rtol;
    opts.shooting.ode.atol = tol.atol;
    Ok(opts)
}

fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Metadata shared by every output of a run.
fn base_meta(command: &str, spec: &EnvironmentSpec, tol: &Tolerances) -> Meta {
    let canonical = spec.canonical_json();
    let mut meta = Meta::default();
    meta.push("tool", format!("shearwave {}", env!("CARGO_PKG_VERSION")));
    meta.push("command", command);
    meta.push("profile_sha256", sha256_hex(canonical.as_bytes()));
    meta.push("environment", canonical);
    meta.push("g", spec.g);
    meta.push("rtol", tol.rtol);
    meta.push("atol", tol.atol);
    meta
}

/// Everything a single-fluid command needs, validated.
struct Setup {
    spec: EnvironmentSpec,
    env: Environment,
    opts: DispersionOptions,
}

fn single_fluid(env: &crate::env::EnvArgs, tol: &Tolerances, command: &str) -> Result<Setup, Failure> {
    let spec = env.spec()?;
    if spec.is_two_fluid() {
        return usage(format!("`{command}` takes a single-fluid environment; use `twofluid` for interfacial waves"));
    }
    let built = spec.build().map_err(invalid)?;
    Ok(Setup {
        opts: options(tol)?,
        env: built,
        spec,
    })
}

fn wavenumbers(range: &KRange) -> Result<Vec<f64>, Failure> {
    match (range.k, range.k_min, range.k_max) {
        (Some(k), None, None) => {
            check_positive("--k", k)?;
            if range.count != 1 {
                return usage("--count needs --k-min and --k-max");
            }
            Ok(vec![k])
        }
        (None, Some(lo), Some(hi)) => {
            check_positive("--k-min", lo)?;
            check_positive("--k-max", hi)?;
            if lo > hi {
                return usage(format!("--k-min {lo} exceeds --k-max {hi}"));
            }
            if range.count == 0 {
                return usage("--count must be at least 1");
            }
            let n = range.count;
            if n == 1 {
                return Ok(vec![lo]);
            }
            let ratio = (hi / lo).ln();
            let mut ks: Vec<f64> = (0..n).map(|i| lo * (ratio * i as f64 / (n - 1) as f64).exp()).collect();
            ks[n - 1] = hi;
            Ok(ks)
        }
        _ => usage("give either --k or both --k-min and --k-max"),
    }
}

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Dispersion(a) => dispersion(&a),
        Command::Burns(a) => burns(&a),
        Command::Transfer(a) => transfer(&a),
        Command::Field(a) => field(&a),
        Command::Twofluid(a) => twofluid(&a),
        Command::Synth(a) => synth(&a),
        Command::Reconstruct(a) => reconstruct(&a),
        Command::Stagnation(a) => stagnation(&a),
    }
}

fn finish(artifacts: Artifacts, out: &OutArgs) -> Outcome {
    artifacts.write(&out.out).map_err(Failure::Write)
}

fn dispersion(a: &SweepArgs) -> Outcome {
    let b = &a.basic;
    let s = single_fluid(&b.env, &b.tol, "dispersion")?;
    let ks = wavenumbers(&a.k)?;
    check_out(&b.out)?;
    let (shear, dens) = (&s.env.shear, s.env.density.as_ref());
    let results = ks
        .par_iter()
        .map(|&k| find_wave_speed_with(shear, dens, k, s.env.g, None, &s.opts))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new("dispersion", base_meta("dispersion", &s.spec, &b.tol), &["k", "c", "residual"]);
    for r in results {
        table.push(vec![r.k.into(), r.c.into(), r.residual_at_root.into()]);
    }
    let mut out = Artifacts::default();
    out.add_table(&table, b.format.format);
    finish(out, &b.out)
}

fn burns(b: &BasicArgs) -> Outcome {
    let spec = b.env.spec()?;
    options(&b.tol)?;
    check_out(&b.out)?;
    let speeds = if spec.is_two_fluid() {
        let env = spec.build_two_fluid().map_err(invalid)?;
        vec![generalized_burns_speed(&env)?]
    } else {
        if spec.density.is_some() {
            return usage("`burns` applies to a homogeneous fluid; drop --density");
        }
        let env = spec.build().map_err(invalid)?;
        burns_speed(&env.shear, env.g)?
    };
    let mut table = Table::new("burns", base_meta("burns", &spec, &b.tol), &["c"]);
    for c in speeds {
        table.push(vec![c.into()]);
    }
    let mut out = Artifacts::default();
    out.add_table(&table, b.format.format);
    finish(out, &b.out)
}

fn mode_for(shear: &ShearProfile, dens: Option<&DensityProfile>, c: f64, k: f64, opts: &DispersionOptions) -> Result<ModeSolution, Error> {
    match dens {
        Some(d) => solve_mode_stratified_with(shear, d, c, k, &opts.shooting),
        None => solve_mode_with(shear, c, k, &opts.shooting),
    }
}

/// Transfer function at `k`, and the speed used.
fn transfer_at(a: &TransferArgs, s: &Setup) -> Result<(TransferFunction, ModeSolution), Failure> {
    let (shear, dens) = (&s.env.shear, s.env.density.as_ref());
    let c = match a.c {
        Some(c) => c,
        None => find_wave_speed_with(shear, dens, a.k, s.env.g, None, &s.opts)?.c,
    };
    let mode = mode_for(shear, dens, c, a.k, &s.opts)?;
    let tf = transfer_from_mode(&mode, shear, dens)?;
    Ok((tf, mode))
}

fn gain_meta(tf: &TransferFunction) -> Value {
    match bed_gain(tf) {
        Ok(g) => json!(g),
        Err(e) => {
            eprintln!("shearwave: warning: {e}");
            json!("ill-conditioned")
        }
    }
}

fn transfer(a: &TransferArgs) -> Outcome {
    let b = &a.basic;
    let s = single_fluid(&b.env, &b.tol, "transfer")?;
    check_positive("--k", a.k)?;
    check_out(&b.out)?;
    let (tf, _) = transfer_at(a, &s)?;
    let slope = nonmonotonicity_profile(&tf);
    let mut meta = base_meta("transfer", &s.spec, &b.tol).with(&[
        ("k", json!(tf.k)),
        ("c", json!(tf.c)),
        ("T0", json!(tf.t0)),
        ("gain", gain_meta(&tf)),
        ("slope_changes_sign", json!(slope_changes_sign(&slope))),
    ]);
    for (y, t_above) in &tf.jumps {
        meta.push(&format!("T_above[y={}]", fmt_f64(*y)), *t_above);
    }
    let mut table = Table::new("transfer", meta, &["y", "T", "slope_sign"]);
    for ((&y, &t), (_, sign)) in tf.y.iter().zip(&tf.t).zip(&slope) {
        table.push(vec![y.into(), t.into(), (*sign).into()]);
    }
    let mut out = Artifacts::default();
    out.add_table(&table, b.format.format);
    finish(out, &b.out)
}

fn field(a: &FieldArgs) -> Outcome {
    let t = &a.transfer;
    let b = &t.basic;
    let s = single_fluid(&b.env, &b.tol, "field")?;
    check_positive("--k", t.k)?;
    if !(a.amplitude.is_finite() && a.amplitude >= 0.0) {
        return usage(format!("--amplitude must be non-negative, got {}", a.amplitude));
    }
    if a.nx < 2 {
        return usage("--nx must be at least 2");
    }
    check_out(&b.out)?;
    let (tf, mode) = transfer_at(t, &s)?;
    let f = linear_field(&mode, &s.env.shear, s.env.density.as_ref(), a.amplitude, a.phase, a.nx)?;
    let meta = base_meta("field", &s.spec, &b.tol).with(&[
        ("k", json!(tf.k)),
        ("c", json!(tf.c)),
        ("amplitude", json!(a.amplitude)),
        ("phase", json!(a.phase)),
    ]);
    let header: &[&'static str] = if f.rho.is_some() { &["x", "y", "u", "v", "p", "rho"] } else { &["x", "y", "u", "v", "p"] };
    let mut table = Table::new("field", meta, header);
    for (i, &y) in f.y.iter().enumerate() {
        for (j, &x) in f.x.iter().enumerate() {
            let mut row: Vec<Cell> = vec![x.into(), y.into(), f.u[i][j].into(), f.v[i][j].into(), f.p[i][j].into()];
            if let Some(rho) = &f.rho {
                row.push(rho[i][j].into());
            }
            table.push(row);
        }
    }
    let mut out = Artifacts::default();
    out.add_table(&table, b.format.format);
    finish(out, &b.out)
}

fn twofluid(a: &SweepArgs) -> Outcome {
    let b = &a.basic;
    let spec = b.env.spec()?;
    if !spec.is_two_fluid() {
        return usage("`twofluid` needs --upper-shear, --rho-minus, --rho-plus and --lid (or the same fields in --env)");
    }
    let env: TwoFluidEnv = spec.build_two_fluid().map_err(invalid)?;
    if env.is_unstable() {
        eprintln!("shearwave: warning: the upper fluid is denser than the lower one (rho_plus > rho_minus)");
    }
    let opts = options(&b.tol)?;
    let ks = wavenumbers(&a.k)?;
    check_out(&b.out)?;
    let results = ks
        .par_iter()
        .map(|&k| two_fluid_dispersion_with(&env, k, None, &opts))
        .collect::<Result<Vec<_>, _>>()?;
    let meta = base_meta("twofluid", &spec, &b.tol);
    let mut table = Table::new("twofluid", meta.clone(), &["k", "c", "residual"]);
    for r in &results {
        table.push(vec![r.k.into(), r.c.into(), r.residual_at_root.into()]);
    }
    let mut out = Artifacts::default();
    out.add_table(&table, b.format.format);
    if let [r] = results.as_slice() {
        let (lower, upper) = solve_two_layer_modes_with(&env, r.c, r.k, &opts.shooting)?;
        let (tl, tu) = transfer_two_fluid(&env, &lower, &upper)?;
        for (name, tf) in [("twofluid_lower", &tl), ("twofluid_upper", &tu)] {
            let m = meta.with(&[("k", json!(tf.k)), ("c", json!(tf.c)), ("T0", json!(tf.t0))]);
            let mut t = Table::new(name, m, &["y", "T"]);
            for (&y, &v) in tf.y.iter().zip(&tf.t) {
                t.push(vec![y.into(), v.into()]);
            }
            out.add_table(&t, b.format.format);
        }
    }
    finish(out, &b.out)
}

fn stagnation(a: &SweepArgs) -> Outcome {
    let b = &a.basic;
    let spec = b.env.spec()?;
    let gamma = match (&spec.shear, spec.is_two_fluid() || spec.density.is_some()) {
        (ShearSpec::Zero, false) => 0.0,
        (ShearSpec::Linear { gamma }, false) => *gamma,
        _ => return usage("`stagnation` applies to a homogeneous fluid with a zero or linear current"),
    };
    spec.build().map_err(invalid)?;
    options(&b.tol)?;
    let ks = wavenumbers(&a.k)?;
    check_out(&b.out)?;
    let mut table = Table::new(
        "stagnation",
        base_meta("stagnation", &spec, &b.tol),
        &["gamma", "k", "h0", "g", "threshold", "critical"],
    );
    for k in ks {
        let st = stagnation_condition(gamma, k, spec.h0, spec.g)?;
        table.push(vec![gamma.into(), k.into(), spec.h0.into(), spec.g.into(), st.threshold.into(), st.critical.into()]);
    }
    let mut out = Artifacts::default();
    out.add_table(&table, b.format.format);
    finish(out, &b.out)
}

fn parse_mode(text: &str) -> Result<ModeRequest, Failure> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let nums: Option<Vec<f64>> = parts.iter().map(|p| p.parse().ok()).collect();
    match nums.as_deref() {
        Some(&[k, amplitude, phase]) => Ok(ModeRequest { k, amplitude, phase }),
        _ => usage(format!("--mode expects k,amplitude,phase, got {text:?}")),
    }
}

fn synth(a: &SynthArgs) -> Outcome {
    let s = single_fluid(&a.env, &a.tol, "synth")?;
    let modes = a.modes.iter().map(|m| parse_mode(m)).collect::<Result<Vec<_>, _>>()?;
    for m in &modes {
        check_positive("mode k", m.k)?;
    }
    for (name, v) in [("--duration", a.duration), ("--dt", a.dt), ("--rho-ref", a.rho_ref)] {
        check_positive(name, v)?;
    }
    if a.name.is_empty() || a.name.contains(['/', '\\']) {
        return usage(format!("--name must be a plain file stem, got {:?}", a.name));
    }
    check_out(&a.out)?;
    let cfg = SynthConfig {
        duration: a.duration,
        dt: a.dt,
        x_gauge: a.x_gauge,
        g: s.env.g,
        rho_ref: a.rho_ref,
    };
    let record = synthesize_record_with(&modes, &s.env.shear, s.env.density.as_ref(), &cfg, &s.opts)?;
    let mut table = Table::new(&a.name, base_meta("synth", &s.spec, &a.tol), &["t", "p"]);
    for (&t, &p) in record.t.iter().zip(&record.p) {
        table.push(vec![t.into(), p.into()]);
    }
    let mut out = Artifacts::default();
    out.add_table(&table, Format::Csv);
    let sidecar = serde_json::to_string_pretty(&record.meta).expect("gauge metadata serializes") + "\n";
    out.add(format!("{}.json", a.name), sidecar);
    finish(out, &a.out)
}

fn file_hash(path: &Path) -> Result<String, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::Usage(UsageError(format!("{}: {e}", path.display()))))?;
    Ok(sha256_hex(&bytes))
}

fn reconstruct(a: &ReconstructArgs) -> Outcome {
    let b = &a.basic;
    let s = single_fluid(&b.env, &b.tol, "reconstruct")?;
    if !a.gauge.is_file() {
        return usage(format!("gauge file {} does not exist", a.gauge.display()));
    }
    let record = read_gauge(&a.gauge).map_err(invalid)?;
    if record.meta.g != s.env.g {
        return usage(format!(
            "gauge metadata has g = {} but the environment has g = {}; pass a matching --g",
            record.meta.g, s.env.g
        ));
    }
    if (record.meta.h0 - s.spec.h0).abs() > 1e-9 * s.spec.h0 {
        return usage(format!("gauge metadata has h0 = {} but the environment has h0 = {}", record.meta.h0, s.spec.h0));
    }
    check_positive("--max-amplification", a.max_amplification)?;
    check_out(&b.out)?;
    let gauge_hash = format!("{}+{}", file_hash(&a.gauge)?, file_hash(&sidecar_path(&a.gauge))?);

    let kinematic = preprocess_with(&record, &PreprocessOptions { detrend: !a.no_detrend })?;
    let result = match a.method {
        MethodArg::Hydrostatic => reconstruct_hydrostatic(&kinematic)?,
        MethodArg::Spectral => {
            let opts = ReconstructOptions {
                max_amplification: a.max_amplification,
                dispersion: s.opts,
                ..ReconstructOptions::default()
            };
            reconstruct_spectral(&kinematic, &s.env.shear, s.env.density.as_ref(), &opts)?
        }
    };
    let dropped = result.per_mode.iter().filter(|m| !m.kept).count();
    let method = match a.method {
        MethodArg::Spectral => "spectral",
        MethodArg::Hydrostatic => "hydrostatic",
    };
    let meta = base_meta("reconstruct", &s.spec, &b.tol).with(&[
        ("gauge_sha256", json!(gauge_hash)),
        ("method", json!(method)),
        ("max_amplification", json!(a.max_amplification)),
        ("detrend", json!(!a.no_detrend)),
        ("dropped_bins", json!(dropped)),
    ]);
    let mut eta = Table::new("eta", meta.clone(), &["t", "eta"]);
    for (&t, &e) in result.t.iter().zip(&result.eta) {
        eta.push(vec![t.into(), e.into()]);
    }
    let mut out = Artifacts::default();
    out.add_table(&eta, b.format.format);
    if a.method == MethodArg::Spectral {
        let mut modes = Table::new("modes", meta, &["omega", "k", "gain", "kept", "amplitude", "phase"]);
        for m in &result.per_mode {
            modes.push(vec![m.omega.into(), m.k.into(), m.gain.into(), m.kept.into(), m.amplitude.into(), m.phase.into()]);
        }
        out.add_table(&modes, b.format.format);
    }
    finish(out, &b.out)
}
