//! Surface elevation from bed-pressure records, and a forward synthesizer.
//!
//! A gauge at `x_gauge` sees `eta(t) = sum a cos(k x_gauge - omega t + phase)` and bed
//! pressure `sum a T_k(0) cos(...)`. Inversion divides each temporal Fourier
//! coefficient by `T_k(0)` with `k` recovered from `omega = k c(k)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dispersion::{find_wave_speed_with, speed_floor, DispersionOptions};
use crate::error::{Error, Result};
use crate::numerics::roots::brent;
use crate::profiles::{DensityProfile, ShearProfile};
use crate::rayleigh::surface_shot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureKind {
    /// Pascals including atmospheric and hydrostatic pressure.
    Absolute,
    /// Pascals, deviation from hydrostatic.
    Dynamic,
    /// Dynamic pressure divided by the reference density, m^2/s^2.
    Kinematic,
}

/// One linear wave component as seen at a gauge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveComponent {
    pub k: f64,
    pub omega: f64,
    pub amplitude: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeMeta {
    pub rho_ref: f64,
    pub h0: f64,
    pub g: f64,
    pub pressure_kind: PressureKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_gauge: Option<f64>,
    /// Components used to synthesize the record, if it is synthetic.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub modes: Vec<WaveComponent>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaugeRecord {
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    pub meta: GaugeMeta,
}

pub const MIN_RECORD_LENGTH: usize = 16;

impl GaugeRecord {
    /// Checks sampling (uniform to `1e-9 dt`), length, finiteness and metadata.
    pub fn new(t: Vec<f64>, p: Vec<f64>, meta: GaugeMeta) -> Result<Self> {
        if t.len() != p.len() {
            return Err(Error::Format(format!("{} times but {} pressures", t.len(), p.len())));
        }
        if t.len() < MIN_RECORD_LENGTH {
            return Err(Error::Format(format!(
                "record has {} samples, at least {MIN_RECORD_LENGTH} are needed",
                t.len()
            )));
        }
        if t.iter().chain(&p).any(|v| !v.is_finite()) {
            return Err(Error::Format("record contains non-finite values".into()));
        }
        let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
        if !(dt > 0.0) {
            return Err(Error::Format("sample times must increase".into()));
        }
        if let Some(i) = t.windows(2).position(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt) {
            return Err(Error::Format(format!("non-uniform sampling near t = {}", t[i])));
        }
        for (name, v) in [("rho_ref", meta.rho_ref), ("h0", meta.h0), ("g", meta.g)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Format(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { t, p, meta })
    }

    pub fn dt(&self) -> f64 {
        (self.t[self.t.len() - 1] - self.t[0]) / (self.t.len() - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreprocessOptions {
    /// Remove a least-squares linear trend from absolute records after mean removal.
    pub detrend: bool,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        Self { detrend: true }
    }
}

/// Converts a record to kinematic dynamic pressure.
pub fn preprocess(record: &GaugeRecord) -> Result<GaugeRecord> {
    preprocess_with(record, &PreprocessOptions::default())
}

pub fn preprocess_with(record: &GaugeRecord, opts: &PreprocessOptions) -> Result<GaugeRecord> {
    let rec = GaugeRecord::new(record.t.clone(), record.p.clone(), record.meta.clone())?;
    let rho = rec.meta.rho_ref;
    let p = match rec.meta.pressure_kind {
        PressureKind::Kinematic => rec.p,
        PressureKind::Dynamic => rec.p.iter().map(|v| v / rho).collect(),
        PressureKind::Absolute => {
            let n = rec.p.len() as f64;
            let mean = rec.p.iter().sum::<f64>() / n;
            let mut p: Vec<f64> = rec.p.iter().map(|v| v - mean).collect();
            if opts.detrend {
                let tm = rec.t.iter().sum::<f64>() / n;
                let stt: f64 = rec.t.iter().map(|t| (t - tm) * (t - tm)).sum();
                let slope = rec.t.iter().zip(&p).map(|(t, v)| (t - tm) * v).sum::<f64>() / stt;
                for (v, t) in p.iter_mut().zip(&rec.t) {
                    *v -= slope * (t - tm);
                }
            }
            p.iter().map(|v| v / rho).collect()
        }
    };
    Ok(GaugeRecord {
        t: rec.t,
        p,
        meta: GaugeMeta {
            pressure_kind: PressureKind::Kinematic,
            ..rec.meta
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Spectral,
    Hydrostatic,
}

/// One Fourier bin of a spectral reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeGain {
    pub omega: f64,
    /// `NaN` when no wavenumber was found.
    pub k: f64,
    pub gain: f64,
    pub kept: bool,
    /// Amplitude and phase (at `t = 0`) of the reconstructed elevation in this bin.
    pub amplitude: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionResult {
    pub t: Vec<f64>,
    pub eta: Vec<f64>,
    pub per_mode: Vec<ModeGain>,
    pub method: Method,
    pub max_amplification: Option<f64>,
}

fn require_kinematic(record: &GaugeRecord) -> Result<()> {
    if record.meta.pressure_kind != PressureKind::Kinematic {
        return Err(Error::InvalidArgument("record must be preprocessed to kinematic pressure first".into()));
    }
    Ok(())
}

/// `eta = p / g`, independent of the current.
pub fn reconstruct_hydrostatic(record: &GaugeRecord) -> Result<ReconstructionResult> {
    require_kinematic(record)?;
    let g = record.meta.g;
    Ok(ReconstructionResult {
        t: record.t.clone(),
        eta: record.p.iter().map(|p| p / g).collect(),
        per_mode: Vec::new(),
        method: Method::Hydrostatic,
        max_amplification: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructOptions {
    /// Bins whose gain magnitude exceeds this multiple of the hydrostatic gain `1/g` are dropped.
    pub max_amplification: f64,
    pub table_points: usize,
    /// Table range `[k_min, k_max]` in units of `1/h0`.
    pub k_min: f64,
    pub k_max: f64,
    pub dispersion: DispersionOptions,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self {
            max_amplification: 100.0,
            table_points: 96,
            k_min: 1e-5,
            k_max: 50.0,
            dispersion: DispersionOptions::default(),
        }
    }
}

/// `omega = k c(k)` sampled on log-spaced wavenumbers, truncated where it stops
/// increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionTable {
    pub k: Vec<f64>,
    pub c: Vec<f64>,
    pub omega: Vec<f64>,
}

pub fn dispersion_table(
    shear: &ShearProfile,
    dens: Option<&DensityProfile>,
    g: f64,
    opts: &ReconstructOptions,
) -> Result<DispersionTable> {
    let h0 = shear.h0();
    let n = opts.table_points.max(2);
    let (lo, hi) = ((opts.k_min / h0).ln(), (opts.k_max / h0).ln());
    let k: Vec<f64> = (0..n).map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp()).collect();
    let c: Vec<f64> = k
        .par_iter()
        .map(|&k| find_wave_speed_with(shear, dens, k, g, None, &opts.dispersion).map(|r| r.c))
        .collect::<Result<_>>()?;
    let omega: Vec<f64> = k.iter().zip(&c).map(|(k, c)| k * c).collect();
    let keep = omega.windows(2).position(|w| !(w[1] > w[0])).map_or(n, |i| i + 1);
    Ok(DispersionTable {
        k: k[..keep].to_vec(),
        c: c[..keep].to_vec(),
        omega: omega[..keep].to_vec(),
    })
}

/// Wavenumber with `k c(k) = omega` inside `[k_lo, k_hi]`, where `omega/k_lo` lies above
/// the dispersion curve and `omega/k_hi` below it.
fn invert_frequency(
    shear: &ShearProfile,
    dens: Option<&DensityProfile>,
    g: f64,
    omega: f64,
    k_lo: f64,
    k_hi: f64,
    opts: &DispersionOptions,
) -> Result<f64> {
    let floor = speed_floor(shear, dens);
    let f_lo = surface_shot(shear, dens, omega / k_lo, k_lo, g, &opts.shooting)?.residual;
    if f_lo == 0.0 {
        return Ok(k_lo);
    }
    let above = f_lo.signum();
    let f = |k: f64| -> Result<f64> {
        let c = omega / k;
        if !(c > floor + 2.0 * opts.shooting.margin_at(c)) {
            return Ok(-above);
        }
        Ok(surface_shot(shear, dens, c, k, g, &opts.shooting)?.residual)
    };
    brent(f, k_lo, k_hi, 1e-14 * k_hi, 1e-14, opts.max_iter)
        .map(|r| r.x)
        .map_err(|e| Error::Convergence(format!("no wavenumber for omega = {omega}: {e:?}")))
}

/// Wavenumber of frequency `omega` on the tabulated branch, `None` outside its range.
pub fn wavenumber_for_frequency(
    table: &DispersionTable,
    shear: &ShearProfile,
    dens: Option<&DensityProfile>,
    g: f64,
    omega: f64,
    opts: &DispersionOptions,
) -> Option<f64> {
    let n = table.omega.len();
    if n < 2 || !(omega >= table.omega[0] && omega <= table.omega[n - 1]) {
        return None;
    }
    let i = table.omega.partition_point(|&w| w < omega);
    if table.omega[i] == omega {
        return Some(table.k[i]);
    }
    invert_frequency(shear, dens, g, omega, table.k[i - 1], table.k[i], opts).ok()
}

fn fft(data: &mut [Complex<f64>], inverse: bool) {
    let mut planner = FftPlanner::new();
    let plan = if inverse {
        planner.plan_fft_inverse(data.len())
    } else {
        planner.plan_fft_forward(data.len())
    };
    plan.process(data);
}

/// Per-bin inversion `eta_hat = p_hat / T_k(0)`. The record must be kinematic and its
/// depth must match the profile.
pub fn reconstruct_spectral(
    record: &GaugeRecord,
    shear: &ShearProfile,
    dens: Option<&DensityProfile>,
    opts: &ReconstructOptions,
) -> Result<ReconstructionResult> {
    require_kinematic(record)?;
    let meta = &record.meta;
    if (meta.h0 - shear.h0()).abs() > 1e-9 * shear.h0() {
        return Err(Error::InvalidArgument(format!(
            "record depth {} differs from profile depth {}",
            meta.h0,
            shear.h0()
        )));
    }
    if !(opts.max_amplification > 0.0) {
        return Err(Error::InvalidArgument("max_amplification must be positive".into()));
    }
    let g = meta.g;
    let n = record.len();
    let dt = record.dt();
    let t_start = record.t[0];
    let table = dispersion_table(shear, dens, g, opts)?;

    let mut spectrum: Vec<Complex<f64>> = record.p.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft(&mut spectrum, false);

    let density_scale = if dens.is_some() { meta.rho_ref } else { 1.0 };
    let half = n / 2;
    let bins: Vec<(f64, f64, f64)> = (1..=half)
        .into_par_iter()
        .map(|m| {
            let omega = 2.0 * PI * m as f64 / (n as f64 * dt);
            let Some(k) = wavenumber_for_frequency(&table, shear, dens, g, omega, &opts.dispersion) else {
                return Ok((omega, f64::NAN, f64::NAN));
            };
            let t0 = surface_shot(shear, dens, omega / k, k, g, &opts.dispersion.shooting)?.t0;
            Ok((omega, k, density_scale / t0))
        })
        .collect::<Result<_>>()?;

    let mut per_mode = Vec::with_capacity(half + 1);
    let mut eta_hat = vec![Complex::new(0.0, 0.0); n];
    let describe = |x: Complex<f64>, m: usize, omega: f64| {
        let edge = m == 0 || 2 * m == n;
        let amplitude = if edge { x.norm() } else { 2.0 * x.norm() } / n as f64;
        (amplitude, omega * t_start - x.arg())
    };
    eta_hat[0] = spectrum[0] / g;
    let (a, ph) = describe(eta_hat[0], 0, 0.0);
    per_mode.push(ModeGain {
        omega: 0.0,
        k: 0.0,
        gain: 1.0 / g,
        kept: true,
        amplitude: a,
        phase: ph,
    });
    for (idx, &(omega, k, gain)) in bins.iter().enumerate() {
        let m = idx + 1;
        let kept = k.is_finite() && gain.is_finite() && gain.abs() * g <= opts.max_amplification;
        if kept {
            eta_hat[m] = spectrum[m] * gain;
            if m != n - m {
                eta_hat[n - m] = spectrum[n - m] * gain;
            }
        }
        let (a, ph) = describe(eta_hat[m], m, omega);
        per_mode.push(ModeGain {
            omega,
            k,
            gain,
            kept,
            amplitude: a,
            phase: ph,
        });
    }
    fft(&mut eta_hat, true);
    let eta = eta_hat.iter().map(|z| z.re / n as f64).collect();
    Ok(ReconstructionResult {
        t: record.t.clone(),
        eta,
        per_mode,
        method: Method::Spectral,
        max_amplification: Some(opts.max_amplification),
    })
}

/// A requested component `(k, amplitude, phase)` for synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeRequest {
    pub k: f64,
    pub amplitude: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub duration: f64,
    pub dt: f64,
    pub x_gauge: f64,
    pub g: f64,
    pub rho_ref: f64,
}

/// Dynamic bed-pressure record (Pa) of a sum of linear waves. The duration is extended
/// to whole periods of the slowest component, `dt` is adjusted to divide it, and the
/// other wavenumbers are nudged so that every frequency falls on the Fourier grid. The
/// components actually used are stored in the metadata.
pub fn synthesize_record(
    modes: &[ModeRequest],
    shear: &ShearProfile,
    dens: Option<&DensityProfile>,
    cfg: &SynthConfig,
) -> Result<GaugeRecord> {
    synthesize_record_with(modes, shear, dens, cfg, &DispersionOptions::default())
}

pub fn synthesize_record_with(
    modes: &[ModeRequest],
    shear: &ShearProfile,
    dens: Option<&DensityProfile>,
    cfg: &SynthConfig,
    opts: &DispersionOptions,
) -> Result<GaugeRecord> {
    for (name, v) in [("duration", cfg.duration), ("dt", cfg.dt), ("g", cfg.g), ("rho_ref", cfg.rho_ref)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
        }
    }
    if !cfg.x_gauge.is_finite() {
        return Err(Error::InvalidArgument("gauge position must be finite".into()));
    }
    for m in modes {
        if !(m.k.is_finite() && m.k > 0.0 && m.amplitude.is_finite() && m.amplitude >= 0.0 && m.phase.is_finite()) {
            return Err(Error::InvalidArgument(format!("invalid mode {m:?}")));
        }
    }
    let g = cfg.g;
    let omegas: Vec<f64> = modes
        .par_iter()
        .map(|m| find_wave_speed_with(shear, dens, m.k, g, None, opts).map(|r| m.k * r.c))
        .collect::<Result<_>>()?;

    let duration = match omegas.iter().copied().fold(None, |acc: Option<f64>, w| Some(acc.map_or(w, |a| a.min(w)))) {
        Some(w_min) => {
            let period = 2.0 * PI / w_min;
            (cfg.duration / period - 1e-9).ceil().max(1.0) * period
        }
        None => cfg.duration,
    };
    let n = ((duration / cfg.dt).round() as usize).max(MIN_RECORD_LENGTH);
    let dt = duration / n as f64;

    let base = 2.0 * PI / duration;
    let components: Vec<WaveComponent> = modes
        .par_iter()
        .zip(&omegas)
        .map(|(m, &omega)| {
            let harmonic = (omega / base).round().max(1.0);
            let target = harmonic * base;
            let k = if (target - omega).abs() <= 1e-14 * omega {
                m.k
            } else {
                nudge_wavenumber(shear, dens, g, m.k, omega, target, opts)?
            };
            Ok(WaveComponent {
                k,
                omega: target,
                amplitude: m.amplitude,
                phase: m.phase,
            })
        })
        .collect::<Result<_>>()?;

    let density_scale = if dens.is_some() { 1.0 } else { cfg.rho_ref };
    let t0s: Vec<f64> = components
        .par_iter()
        .map(|w| surface_shot(shear, dens, w.omega / w.k, w.k, g, &opts.shooting).map(|s| s.t0))
        .collect::<Result<_>>()?;
    let t: Vec<f64> = (0..n).map(|j| j as f64 * dt).collect();
    let p = t
        .iter()
        .map(|&t| {
            components
                .iter()
                .zip(&t0s)
                .map(|(w, t0)| density_scale * w.amplitude * t0 * (w.k * cfg.x_gauge - w.omega * t + w.phase).cos())
                .sum()
        })
        .collect();
    GaugeRecord::new(
        t,
        p,
        GaugeMeta {
            rho_ref: cfg.rho_ref,
            h0: shear.h0(),
            g,
            pressure_kind: PressureKind::Dynamic,
            x_gauge: Some(cfg.x_gauge),
            modes: components,
        },
    )
}

/// Wavenumber near `k` whose frequency is `target` rather than `omega`.
fn nudge_wavenumber(
    shear: &ShearProfile,
    dens: Option<&DensityProfile>,
    g: f64,
    k: f64,
    omega: f64,
    target: f64,
    opts: &DispersionOptions,
) -> Result<f64> {
    let mut rel = 2.0 * ((target - omega) / omega).abs() + 1e-6;
    for _ in 0..40 {
        let (lo, hi) = (k * (1.0 - rel).max(1e-3), k * (1.0 + rel));
        let above = |kk: f64| find_wave_speed_with(shear, dens, kk, g, None, opts).map(|r| kk * r.c);
        if above(lo)? < target && above(hi)? > target {
            return invert_frequency(shear, dens, g, target, lo, hi, opts);
        }
        rel *= 2.0;
    }
    Err(Error::Convergence(format!("could not move k = {k} to frequency {target}")))
}

/// Elevation at the gauge for the given components.
pub fn surface_elevation(components: &[WaveComponent], x_gauge: f64, t: &[f64]) -> Vec<f64> {
    t.iter()
        .map(|&t| {
            components
                .iter()
                .map(|w| w.amplitude * (w.k * x_gauge - w.omega * t + w.phase).cos())
                .sum()
        })
        .collect()
}
