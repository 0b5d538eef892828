//! Retained harmonic modes of the long-distance resonator.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::{dispersive_shift_state, DeviceConfig, ResonatorRole, ResonatorSpec, Side};
use crate::dynamics::{steady_state_rate, CoherentSystem, InteractionMatrix, StateLabel};
use crate::error::Result;

/// Symmetric window of bus modes around the selected one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeLadder {
    pub selected_mode: i64,
    pub offsets: Vec<i64>,
    /// ν_m in GHz, strictly increasing.
    pub frequencies: Vec<f64>,
    pub g_left: Vec<f64>,
    /// Carries the (−1)^m parity sign.
    pub g_right: Vec<f64>,
    pub decay_rate: f64,
}

/// Offsets of a window of `m` modes; odd windows are symmetric.
pub fn window_offsets(m: usize) -> Vec<i64> {
    let lo = -((m as i64) / 2);
    (0..m as i64).map(|k| lo + k).collect()
}

impl ModeLadder {
    pub fn from_device(device: &DeviceConfig) -> Self {
        let offsets = window_offsets(device.bus.mode_count);
        let m0 = device.bus.selected_mode;
        ModeLadder {
            selected_mode: m0,
            frequencies: offsets.iter().map(|&k| device.mode_frequency(k)).collect(),
            g_left: offsets.iter().map(|&k| device.drive_center_coupling(Side::Left, m0 + k)).collect(),
            g_right: offsets.iter().map(|&k| device.drive_center_coupling(Side::Right, m0 + k)).collect(),
            offsets,
            decay_rate: device.center.decay_rate,
        }
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Offsets just outside the window on each side.
    pub fn excluded_offsets(&self) -> (i64, i64) {
        (self.offsets[0] - 1, self.offsets[self.len() - 1] + 1)
    }
}

/// Generator of size 2 + M with modes ordered (left, bus..., right).
pub fn build_multimode_matrix(
    jk: StateLabel,
    device: &DeviceConfig,
    ladder: &ModeLadder,
    reference: f64,
) -> Result<InteractionMatrix> {
    let m = ladder.len();
    let n = m + 2;
    let mut h = DMatrix::<f64>::zeros(n, n);
    let mut decay = DVector::<f64>::zeros(n);

    for (side, idx, excited) in [(Side::Left, 0, jk.left()), (Side::Right, n - 1, jk.right())] {
        let mut diag = device.dressed_resonator_frequency(side)? - reference;
        if excited {
            diag += device.dispersive_shift(side)?;
        }
        h[(idx, idx)] = diag;
        decay[idx] = device.resonator(side).decay_rate;
    }
    for i in 0..m {
        let mut diag = ladder.frequencies[i] - reference;
        for (side, excited) in [(Side::Left, jk.left()), (Side::Right, jk.right())] {
            let g = device.qubit_center_coupling(side);
            if g != 0.0 {
                let mode = ResonatorSpec {
                    role: ResonatorRole::Center,
                    frequency: ladder.frequencies[i],
                    decay_rate: 0.0,
                };
                let q = device.qubit(side);
                diag += dispersive_shift_state(excited as u32, q, &mode, g)?;
            }
        }
        h[(i + 1, i + 1)] = diag;
        decay[i + 1] = ladder.decay_rate;
        h[(0, i + 1)] = ladder.g_left[i];
        h[(i + 1, 0)] = ladder.g_left[i];
        h[(n - 1, i + 1)] = ladder.g_right[i];
        h[(i + 1, n - 1)] = ladder.g_right[i];
    }

    let mut drive = DVector::<Complex64>::zeros(n);
    drive[0] = Complex64::from_polar(device.left_drive.amplitude, device.left_drive.phase);
    drive[n - 1] = Complex64::from_polar(device.right_drive.amplitude, device.right_drive.phase);
    Ok(InteractionMatrix { jk, hamiltonian: h, decay, drive })
}

/// Steady-state ZZ rate in MHz for `device` as configured.
pub fn steady_zz(device: &DeviceConfig) -> Result<f64> {
    let sys = CoherentSystem::new(device)?;
    Ok(steady_state_rate(&sys)?.re / (2.0 * std::f64::consts::PI) * 1e3)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsrPoint {
    pub fsr: f64,
    pub mode_count: usize,
    /// MHz.
    pub zz_multimode: f64,
    /// MHz.
    pub zz_single: f64,
}

/// Steady ZZ across FSR values with `mode_count` retained modes.
pub fn zz_vs_fsr(device: &DeviceConfig, fsr_grid: &[f64], mode_count: usize) -> Result<Vec<FsrPoint>> {
    let single = steady_zz(&device.clone().with_modes(device.bus.fsr, 1))?;
    fsr_grid
        .par_iter()
        .map(|&fsr| {
            Ok(FsrPoint {
                fsr,
                mode_count,
                zz_multimode: steady_zz(&device.clone().with_modes(fsr, mode_count))?,
                zz_single: single,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub mode_count: usize,
    /// MHz.
    pub zz: f64,
    /// Relative change against the previous row.
    pub relative_change: Option<f64>,
    /// Smallest detuning between an excluded mode and a drive resonator (GHz).
    pub excluded_detuning: f64,
    pub excluded_over_g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub fsr: f64,
    pub coupling: f64,
    pub threshold_ratio: f64,
    pub tolerance: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Steps where the previous window already excluded only modes beyond
    /// the threshold detuning.
    pub applicable_steps: usize,
    pub rule_holds: bool,
}

/// Default ratio of excluded-mode detuning to bus coupling.
pub const CONVERGENCE_RATIO: f64 = 13.0;
/// Default tolerance on the relative ZZ change.
pub const CONVERGENCE_TOLERANCE: f64 = 0.01;

/// Tracks the steady ZZ rate as retained modes grow through `mode_grid`.
pub fn convergence_check(device: &DeviceConfig, mode_grid: &[usize]) -> Result<ConvergenceReport> {
    let g = device.coupling.drive_center_left.abs().max(device.coupling.drive_center_right.abs());
    let nu_l = device.dressed_resonator_frequency(Side::Left)?;
    let nu_r = device.dressed_resonator_frequency(Side::Right)?;
    let zz: Vec<f64> = mode_grid
        .par_iter()
        .map(|&m| steady_zz(&device.clone().with_modes(device.bus.fsr, m)))
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(mode_grid.len());
    for (i, &m) in mode_grid.iter().enumerate() {
        let ladder = ModeLadder::from_device(&device.clone().with_modes(device.bus.fsr, m));
        let (lo, hi) = ladder.excluded_offsets();
        let excluded_detuning = [lo, hi]
            .iter()
            .flat_map(|&k| {
                let f = device.mode_frequency(k);
                [(f - nu_l).abs(), (f - nu_r).abs()]
            })
            .fold(f64::INFINITY, f64::min);
        rows.push(ConvergenceRow {
            mode_count: m,
            zz: zz[i],
            relative_change: (i > 0).then(|| ((zz[i] - zz[i - 1]) / zz[i]).abs()),
            excluded_detuning,
            excluded_over_g: excluded_detuning / g,
        });
    }
    let steps: Vec<f64> = rows
        .windows(2)
        .filter(|w| w[0].excluded_over_g >= CONVERGENCE_RATIO)
        .filter_map(|w| w[1].relative_change)
        .collect();
    Ok(ConvergenceReport {
        fsr: device.bus.fsr,
        coupling: g,
        threshold_ratio: CONVERGENCE_RATIO,
        tolerance: CONVERGENCE_TOLERANCE,
        applicable_steps: steps.len(),
        rule_holds: steps.iter().all(|&c| c < CONVERGENCE_TOLERANCE),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::build_interaction_matrix;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn device() -> DeviceConfig {
        DeviceConfig::preset("fsr200").unwrap()
    }

    #[test]
    fn window_is_symmetric() {
        assert_eq!(window_offsets(1), vec![0]);
        assert_eq!(window_offsets(5), vec![-2, -1, 0, 1, 2]);
        assert_eq!(window_offsets(4), vec![-2, -1, 0, 1]);
    }

    #[test]
    fn ladder_frequencies_and_signs() {
        let d = device();
        let l = ModeLadder::from_device(&d);
        assert!(l.frequencies.windows(2).all(|w| w[1] > w[0]));
        for w in l.g_right.windows(2) {
            assert_eq!(w[0], -w[1]);
        }
        assert!(l.g_left.iter().all(|&g| g == d.coupling.drive_center_left));
    }

    #[test]
    fn single_mode_reduction() {
        let d = device().with_modes(0.2, 1);
        let ref_f = d.left_drive.frequency;
        for jk in StateLabel::ALL {
            let g = build_interaction_matrix(jk, &d, ref_f).unwrap();
            assert_eq!(g.size(), 3);
            let h = &g.hamiltonian;
            assert_eq!(h[(0, 2)], 0.0);
            assert_eq!(h[(0, 1)], d.coupling.drive_center_left);
            assert_relative_eq!(h[(1, 1)], d.drive_detuning(), epsilon = 1e-12);
        }
    }

    #[test]
    fn extra_modes_sit_at_fsr_offsets() {
        let d = device();
        let g = build_interaction_matrix(StateLabel::S00, &d, d.left_drive.frequency).unwrap();
        assert_eq!(g.size(), 2 + 5);
        let delta = d.drive_detuning();
        for (i, k) in window_offsets(5).into_iter().enumerate() {
            assert_relative_eq!(g.hamiltonian[(i + 1, i + 1)], delta + k as f64 * 0.2, epsilon = 1e-12);
        }
        assert_eq!(g.hamiltonian_eigenvalues().len(), 7);
    }

    #[test]
    fn large_fsr_recovers_single_mode() {
        let d = device();
        let single = steady_zz(&d.clone().with_modes(0.2, 1)).unwrap();
        let far = steady_zz(&d.clone().with_modes(1000.0, 5)).unwrap();
        assert_relative_eq!(far, single, max_relative = 1e-4);
    }

    #[test]
    fn zz_shrinks_with_fsr() {
        let d = DeviceConfig::preset("fsr1400").unwrap().with_bus_coupling(0.08).with_detuning(0.05);
        let pts = zz_vs_fsr(&d, &[0.15, 0.2, 0.3, 0.5, 1.0, 2.0], 5).unwrap();
        for w in pts.windows(2) {
            assert!(w[1].zz_multimode.abs() > w[0].zz_multimode.abs());
        }
    }

    #[test]
    fn parity_and_phase_flip_together() {
        let even = device().with_modes(0.3, 5);
        let mut odd = even.clone();
        odd.bus.selected_mode += 1;
        let odd = odd.with_phase_difference((even.right_drive.phase - even.left_drive.phase + PI).rem_euclid(2.0 * PI));
        assert_relative_eq!(steady_zz(&even).unwrap(), steady_zz(&odd).unwrap(), max_relative = 1e-10);
    }

    #[test]
    fn no_bus_coupling_no_mode_dependence() {
        let d = device().with_bus_coupling(0.0);
        let rep = convergence_check(&d, &[1, 3, 5]).unwrap();
        let z0 = rep.rows[0].zz;
        assert!(rep.rows.iter().all(|r| r.zz == z0));
    }

    #[test]
    fn small_fsr_violates_convergence() {
        let d = device().with_modes(5.0 * 0.05, 1);
        let rep = convergence_check(&d, &[1, 3]).unwrap();
        assert!(rep.rows[1].relative_change.unwrap() > 0.01);
    }
}
