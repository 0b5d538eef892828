use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::evolve::evolve_observed;
use super::hamiltonian::{build_hamiltonian, Frame};
use super::hilbert::HilbertSpec;
use crate::device::DeviceConfig;
use crate::dynamics::{simulate_gate, DEFAULT_DT};
use crate::error::{Error, Result};

/// Leakage above which a calibration is flagged unreliable.
pub const LEAKAGE_LIMIT: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RamseyPoint {
    pub time: f64,
    /// P(target in |+⟩) with the control in |0⟩ and |1⟩.
    pub p_plus_c0: f64,
    pub p_plus_c1: f64,
    /// Unwrapped target phases in rad.
    pub phase_c0: f64,
    pub phase_c1: f64,
    pub controlled_phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringePoint {
    /// Analysis angle ϕ of the projector onto (|0⟩ + e^{iϕ}|1⟩)/√2.
    pub analysis_phase: f64,
    pub p_c0: f64,
    pub p_c1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub gate_time: f64,
    /// Terminal controlled phase in rad, unwrapped along the pulse.
    pub controlled_phase: f64,
    pub leakage: f64,
    pub reliable: bool,
    pub trace: Vec<RamseyPoint>,
    pub fringe: Vec<FringePoint>,
}

/// Target-qubit coherence ρ_10 and populations, traced over control and resonators.
fn target_state(hilbert: &HilbertSpec, psi: &[Complex64]) -> (f64, f64, Complex64) {
    let rest: usize = hilbert.resonator_levels.iter().product();
    let q = hilbert.qubit_levels;
    let (mut p0, mut p1, mut c10) = (0.0, 0.0, Complex64::new(0.0, 0.0));
    for ql in 0..q {
        let b0 = &psi[(ql * q) * rest..(ql * q + 1) * rest];
        let b1 = &psi[(ql * q + 1) * rest..(ql * q + 2) * rest];
        for (a, b) in b0.iter().zip(b1) {
            p0 += a.norm_sqr();
            p1 += b.norm_sqr();
            c10 += b * a.conj();
        }
    }
    (p0, p1, c10)
}

fn p_plus(p0: f64, p1: f64, c10: Complex64, phi: f64) -> f64 {
    0.5 * (p0 + p1) + (Complex64::from_polar(1.0, -phi) * c10).re
}

fn unwrap_next(prev: f64, raw: f64) -> f64 {
    prev + (raw - prev + PI).rem_euclid(2.0 * PI) - PI
}

/// Ramsey-style controlled-phase measurement: target in |+⟩, control in |0⟩
/// then |1⟩, target phase tracked while the device's pulse plays.
pub fn calibrate_controlled_phase(
    device: &DeviceConfig,
    hilbert: &HilbertSpec,
    dt: f64,
    samples: usize,
) -> Result<CalibrationReport> {
    let ham = build_hamiltonian(device, hilbert, Frame::RotatingDispersive)?;
    let total = ham.duration();
    let every = ((total / dt).ceil() as usize / samples.max(1)).max(1);
    let s = 1.0 / 2f64.sqrt();

    let steps = (total / dt).ceil() as usize;
    let runs: Vec<(Vec<(f64, f64, f64, Complex64, f64)>, f64)> = [0usize, 1]
        .par_iter()
        .map(|&c| {
            let mut psi = vec![Complex64::new(0.0, 0.0); ham.dim()];
            psi[hilbert.computational(c, 0)] = Complex64::new(s, 0.0);
            psi[hilbert.computational(c, 1)] = Complex64::new(s, 0.0);
            let mut rows = Vec::new();
            let (mut calls, mut phase) = (0usize, 0.0);
            // Observed every step so the target phase unwraps reliably.
            let out = evolve_observed(&psi, &ham, total, dt, 1, |t, st| {
                let (p0, p1, c10) = target_state(hilbert, st);
                phase = unwrap_next(phase, c10.arg());
                if calls % every == 0 || calls == steps {
                    rows.push((t, p0, p1, c10, phase));
                }
                calls += 1;
            })?;
            let comp = hilbert.computational_indices();
            let kept: f64 = comp.iter().map(|&i| out[i].norm_sqr()).sum();
            Ok((rows, 1.0 - kept))
        })
        .collect::<Result<_>>()?;

    let trace: Vec<RamseyPoint> = runs[0]
        .0
        .iter()
        .zip(&runs[1].0)
        .map(|(a, b)| RamseyPoint {
            time: a.0,
            p_plus_c0: p_plus(a.1, a.2, a.3, 0.0),
            p_plus_c1: p_plus(b.1, b.2, b.3, 0.0),
            phase_c0: a.4,
            phase_c1: b.4,
            controlled_phase: b.4 - a.4,
        })
        .collect();
    let last0 = runs[0].0.last().expect("at least one sample");
    let last1 = runs[1].0.last().expect("at least one sample");
    let fringe = (0..=72)
        .map(|k| {
            let phi = 2.0 * PI * k as f64 / 72.0;
            FringePoint {
                analysis_phase: phi,
                p_c0: p_plus(last0.1, last0.2, last0.3, phi),
                p_c1: p_plus(last1.1, last1.2, last1.3, phi),
            }
        })
        .collect();
    let leakage = runs[0].1.max(runs[1].1).max(0.0);
    if leakage > LEAKAGE_LIMIT {
        log::warn!("leakage {leakage:.3} exceeds {LEAKAGE_LIMIT}; calibration unreliable");
    }
    Ok(CalibrationReport {
        gate_time: total,
        controlled_phase: trace.last().map(|p| p.controlled_phase).unwrap_or(0.0),
        leakage,
        reliable: leakage <= LEAKAGE_LIMIT,
        trace,
        fringe,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationRow {
    pub detuning: f64,
    pub time: f64,
    pub p_plus_c0: f64,
    pub p_plus_c1: f64,
}

/// Ramsey populations against time over a grid of drive detunings.
pub fn population_map(
    device: &DeviceConfig,
    hilbert: &HilbertSpec,
    detunings: &[f64],
    dt: f64,
    samples: usize,
) -> Result<Vec<PopulationRow>> {
    let rows: Vec<Vec<PopulationRow>> = detunings
        .par_iter()
        .map(|&delta| {
            let r = calibrate_controlled_phase(&device.clone().with_detuning(delta), hilbert, dt, samples)?;
            Ok(r.trace
                .iter()
                .map(|p| PopulationRow { detuning: delta, time: p.time, p_plus_c0: p.p_plus_c0, p_plus_c1: p.p_plus_c1 })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub levels: Vec<usize>,
    pub controlled_phases: Vec<f64>,
    /// Largest population difference between successive truncations.
    pub differences: Vec<f64>,
    /// Successive differences shrink.
    pub converging: bool,
}

/// Repeats the population map with every resonator truncated at each of `levels`.
pub fn truncation_study(
    device: &DeviceConfig,
    qubit_levels: usize,
    levels: &[usize],
    detunings: &[f64],
    dt: f64,
    samples: usize,
) -> Result<TruncationReport> {
    if levels.len() < 2 {
        return Err(Error::Config("truncation study needs at least two levels".into()));
    }
    let maps: Vec<Vec<PopulationRow>> = levels
        .iter()
        .map(|&n| {
            let hs = HilbertSpec { qubit_levels, resonator_levels: [n; 3], ..Default::default() };
            population_map(device, &hs, detunings, dt, samples)
        })
        .collect::<Result<_>>()?;
    let phases = levels
        .iter()
        .map(|&n| {
            let hs = HilbertSpec { qubit_levels, resonator_levels: [n; 3], ..Default::default() };
            calibrate_controlled_phase(device, &hs, dt, 1).map(|r| r.controlled_phase)
        })
        .collect::<Result<Vec<_>>>()?;
    let differences: Vec<f64> = maps
        .windows(2)
        .map(|w| {
            w[0].iter()
                .zip(&w[1])
                .map(|(a, b)| (a.p_plus_c0 - b.p_plus_c0).abs().max((a.p_plus_c1 - b.p_plus_c1).abs()))
                .fold(0.0, f64::max)
        })
        .collect();
    let converging = differences.windows(2).all(|w| w[1] < w[0]);
    Ok(TruncationReport { levels: levels.to_vec(), controlled_phases: phases, differences, converging })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeCalibration {
    /// Drive amplitude in GHz.
    pub amplitude: f64,
    /// |Re θ_ZZ(T)| reached, rad.
    pub theta: f64,
    pub iterations: usize,
}

/// Scales both drive amplitudes until the coherent model gives |Re θ_ZZ(T)| = `target`.
pub fn calibrate_amplitude(device: &DeviceConfig, target: f64, dt: Option<f64>) -> Result<AmplitudeCalibration> {
    let dt = dt.unwrap_or(DEFAULT_DT);
    let mut eps = device.left_drive.amplitude;
    if !(eps > 0.0) {
        return Err(Error::Config("calibration needs a nonzero starting amplitude".into()));
    }
    let mut theta = 0.0;
    for it in 1..=60 {
        theta = simulate_gate(&device.clone().with_amplitude(eps), dt)?.theta.0.abs();
        if !(theta > 0.0) {
            return Err(Error::Config("drive produces no entangling phase".into()));
        }
        if (theta - target).abs() <= 1e-9 * target {
            return Ok(AmplitudeCalibration { amplitude: eps, theta, iterations: it });
        }
        eps *= (target / theta).sqrt();
    }
    Err(Error::NumericalAbort { t: device.gate_time(), reason: format!("amplitude calibration stalled at |θ| = {theta}") })
}

/// Drive amplitude whose full-quantum controlled phase magnitude equals
/// `target`, refined from the coherent-model estimate to relative tolerance `tol`.
pub fn calibrate_amplitude_full(
    device: &DeviceConfig,
    hilbert: &HilbertSpec,
    target: f64,
    dt: f64,
    tol: f64,
) -> Result<AmplitudeCalibration> {
    let mut eps = calibrate_amplitude(device, target, None)?.amplitude;
    let mut theta = 0.0;
    for it in 1..=20 {
        theta = calibrate_controlled_phase(&device.clone().with_amplitude(eps), hilbert, dt, 1)?.controlled_phase.abs();
        if !(theta > 0.0) {
            return Err(Error::Config("drive produces no controlled phase".into()));
        }
        if (theta - target).abs() <= tol * target {
            return Ok(AmplitudeCalibration { amplitude: eps, theta, iterations: it });
        }
        eps *= (target / theta).sqrt();
    }
    Err(Error::NumericalAbort { t: device.gate_time(), reason: format!("amplitude calibration stalled at |φ| = {theta}") })
}

/// Shortest gate time on `times` (ascending) where the full-quantum
/// controlled phase magnitude reaches `target`, linearly interpolated.
pub fn time_to_phase(
    device: &DeviceConfig,
    hilbert: &HilbertSpec,
    times: &[f64],
    target: f64,
    dt: f64,
) -> Result<Option<f64>> {
    let phases: Vec<f64> = times
        .par_iter()
        .map(|&t| {
            let env = crate::pulse::EnvelopeSpec::full(device.left_drive.envelope.shape.clone(), t);
            calibrate_controlled_phase(&device.clone().with_envelope(env), hilbert, dt, 1).map(|r| r.controlled_phase.abs())
        })
        .collect::<Result<_>>()?;
    Ok(times.windows(2).zip(phases.windows(2)).find(|(_, p)| p[0] < target && p[1] >= target).map(|(t, p)| {
        t[0] + (target - p[0]) * (t[1] - t[0]) / (p[1] - p[0])
    }))
}
