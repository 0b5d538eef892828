//! Steady-state ZZ extraction and parameter sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{
    accumulate_phase, integrate_amplitudes, simulate_gate, steady_state_amplitudes, zz_rate_closed_form,
    dephasing_rate_closed_form, CoherentSystem,
};
use crate::device::{critical_photon, DeviceConfig, Side};
use crate::error::{Error, Result};
use crate::pulse::{EnvelopeShape, EnvelopeSpec};

/// Flat-top pulse used to extract steady slopes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyOptions {
    /// Nested-cosine ramp length in ns.
    pub rise: f64,
    /// Platform length in ns.
    pub hold: f64,
    pub dt: f64,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        SteadyOptions { rise: 50.0, hold: 1000.0, dt: 0.02 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZZResult {
    /// Slope of Re θ_ZZ over the second half of the platform, MHz.
    pub zz_rate_numeric: f64,
    pub zz_rate_closed_form: f64,
    /// Slope of Im θ_ZZ, MHz.
    pub dephasing_rate: f64,
    pub dephasing_closed_form: f64,
    /// Terminal photons per mode of the worst state.
    pub residual_photons: Vec<f64>,
    /// Peak |α|² in either drive resonator.
    pub max_mean_photon: f64,
    /// Smallest critical photon number over peak photons.
    pub n_crit_margin: f64,
}

fn slope(ts: &[f64], ys: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let mt = ts.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = ts.iter().zip(ys).map(|(t, y)| (t - mt) * (y - my)).sum();
    let sxx: f64 = ts.iter().map(|t| (t - mt).powi(2)).sum();
    sxy / sxx
}

/// Mean |χ|, mean |g^(p,c)| and mean drive-resonator κ.
pub(crate) fn reduced_parameters(device: &DeviceConfig) -> Result<(f64, f64, f64)> {
    let chi = 0.5 * (device.dispersive_shift(Side::Left)?.abs() + device.dispersive_shift(Side::Right)?.abs());
    let g = 0.5 * (device.coupling.drive_center_left.abs() + device.coupling.drive_center_right.abs());
    let kappa = 0.5 * (device.left_resonator.decay_rate + device.right_resonator.decay_rate);
    Ok((chi, g, kappa))
}

/// Runs a long flat-top pulse and extracts the steady ZZ and dephasing rates.
pub fn steady_zz_result(device: &DeviceConfig, opts: &SteadyOptions) -> Result<ZZResult> {
    let env = EnvelopeSpec::new(EnvelopeShape::CosinePlatform { platform_ratio: opts.hold / opts.rise }, opts.rise);
    let d = device.clone().with_envelope(env);
    let sys = CoherentSystem::new(&d)?;
    let total = sys.duration();
    let traj = integrate_amplitudes(&sys, total, opts.dt)?;
    let phase = accumulate_phase(&traj, &sys)?;

    let (start, stop) = (opts.rise + 0.5 * opts.hold, opts.rise + opts.hold);
    let idx: Vec<usize> = (0..traj.steps()).filter(|&k| (start..=stop).contains(&traj.time(k))).collect();
    let ts: Vec<f64> = idx.iter().map(|&k| traj.time(k)).collect();
    let re: Vec<f64> = idx.iter().map(|&k| phase.theta[k].re).collect();
    let im: Vec<f64> = idx.iter().map(|&k| phase.theta[k].im).collect();
    let to_mhz = 1e3 / (2.0 * PI);

    let (chi, g, kappa) = reduced_parameters(&d)?;
    let eps = d.left_drive.amplitude;
    let delta = d.drive_detuning();
    let n = sys.modes();
    let max_mean_photon = traj.peak_photons(0).max(traj.peak_photons(n - 1));
    let n_crit = Side::BOTH
        .iter()
        .map(|&s| {
            let q = d.qubit(s);
            critical_photon(q.frequency - d.resonator(s).frequency, q.anharmonicity, d.qubit_drive_coupling(s))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok(ZZResult {
        zz_rate_numeric: slope(&ts, &re) * to_mhz,
        zz_rate_closed_form: zz_rate_closed_form(eps, chi, delta, g)?,
        dephasing_rate: slope(&ts, &im) * to_mhz,
        dephasing_closed_form: dephasing_rate_closed_form(eps, chi, delta, g, kappa)?,
        residual_photons: traj.worst_terminal_photons(),
        max_mean_photon,
        n_crit_margin: if max_mean_photon > 0.0 { n_crit / max_mean_photon } else { f64::INFINITY },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZZSweepPoint {
    pub detuning: f64,
    pub result: Option<ZZResult>,
    pub error: Option<String>,
}

/// Steady ZZ over a detuning grid. Failed points are kept with their error.
pub fn zz_sweep(device: &DeviceConfig, detunings: &[f64], opts: &SteadyOptions) -> Vec<ZZSweepPoint> {
    detunings
        .par_iter()
        .map(|&delta| match steady_zz_result(&device.clone().with_detuning(delta), opts) {
            Ok(r) => ZZSweepPoint { detuning: delta, result: Some(r), error: None },
            Err(e) => ZZSweepPoint { detuning: delta, result: None, error: Some(e.to_string()) },
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryPoint {
    /// φ_r − φ_l in rad.
    pub phase_difference: f64,
    /// tan ϑ = |g^(l,c)|/|g^(r,c)|.
    pub vartheta: f64,
    /// Re θ_ZZ(T) in rad.
    pub entangling_phase: f64,
    pub residual_photons: f64,
}

/// Entangling phase and residual photons over drive phase and coupling ratio.
pub fn drive_asymmetry_sweep(
    device: &DeviceConfig,
    phases: &[f64],
    varthetas: &[f64],
    dt: f64,
) -> Result<Vec<AsymmetryPoint>> {
    if varthetas.iter().any(|v| !(*v > 0.0 && *v < PI / 2.0)) {
        return Err(Error::Config("ϑ must lie in (0, π/2)".into()));
    }
    let c = &device.coupling;
    let total = c.drive_center_left.hypot(c.drive_center_right);
    let grid: Vec<(f64, f64)> = phases.iter().flat_map(|&p| varthetas.iter().map(move |&v| (p, v))).collect();
    grid.par_iter()
        .map(|&(phi, vt)| {
            let mut d = device.clone().with_phase_difference(phi.rem_euclid(2.0 * PI));
            d.coupling.drive_center_left = total * vt.sin();
            d.coupling.drive_center_right = total * vt.cos();
            let g = simulate_gate(&d, dt)?;
            Ok(AsymmetryPoint {
                phase_difference: phi,
                vartheta: vt,
                entangling_phase: g.theta.0,
                residual_photons: g.residual_photons,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualCell {
    pub gate_time: f64,
    pub detuning: f64,
    pub residual_photons: f64,
    /// Re θ_ZZ(T) in rad.
    pub entangling_phase: f64,
}

/// Worst-state residual photons over gate time and detuning.
pub fn residual_photon_map(
    device: &DeviceConfig,
    gate_times: &[f64],
    detunings: &[f64],
    shape: &EnvelopeShape,
    dt: f64,
) -> Result<Vec<ResidualCell>> {
    let grid: Vec<(f64, f64)> = gate_times.iter().flat_map(|&t| detunings.iter().map(move |&d| (t, d))).collect();
    grid.par_iter()
        .map(|&(t, delta)| {
            let d = device.clone().with_detuning(delta).with_envelope(EnvelopeSpec::full(shape.clone(), t));
            let g = simulate_gate(&d, dt)?;
            Ok(ResidualCell {
                gate_time: t,
                detuning: delta,
                residual_photons: g.residual_photons,
                entangling_phase: g.theta.0,
            })
        })
        .collect()
}

/// Drive amplitude whose steady state puts `photons` in the fullest drive
/// resonator, worst qubit state.
pub fn amplitude_for_mean_photons(device: &DeviceConfig, photons: f64) -> Result<f64> {
    let sys = CoherentSystem::new(device)?;
    let ss = steady_state_amplitudes(&sys)?;
    let n = sys.modes();
    let n0 = ss.iter().flat_map(|a| [a[0].norm_sqr(), a[n - 1].norm_sqr()]).fold(0.0, f64::max);
    if !(n0 > 0.0) {
        return Err(Error::Config("device drive produces no photons".into()));
    }
    Ok(device.left_drive.amplitude * (photons / n0).sqrt())
}
