//! Qubit-state-conditioned coherent amplitudes of the driven bus and the
//! entangling phase they imprint.
//!
//! Each two-qubit basis state |jk⟩ drives its own linear system
//!
//! ```text
//! dα/dt = 2π [ G_jk α − (i/2) E(t) ],   G_jk = −i H_jk − K/2
//! ```
//!
//! where `H_jk` is the real symmetric mode Hamiltonian in the frame of the
//! left drive tone and `K` holds the decay rates. The relative phases obey
//!
//! ```text
//! dμ_{jk,00}/dt = −2π Σ_p (H_jk − H_00)_pp α_jk^p conj(α_00^p)
//! θ_ZZ = μ_{11,00} − μ_{10,00} − μ_{01,00}
//! ```
//!
//! so that ⟨ψ_00|ψ_jk⟩ = exp(i μ_{jk,00}) for the bus part of the state.

mod closed_form;
mod spectral;
mod sweep;

pub use closed_form::{dephasing_rate_closed_form, zz_rate_closed_form};
pub use spectral::{decompose, spectral_solution, spectral_trajectory, SpectralDecomposition};
pub use sweep::{
    amplitude_for_mean_photons, drive_asymmetry_sweep, residual_photon_map, steady_zz_result, zz_sweep,
    AsymmetryPoint, ResidualCell, SteadyOptions, ZZResult, ZZSweepPoint,
};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::device::DeviceConfig;
use crate::error::{Error, Result};
use crate::multimode::{build_multimode_matrix, ModeLadder};
use crate::pulse::Envelope;

/// Default integration step in ns.
pub const DEFAULT_DT: f64 = 0.02;
/// Amplitude magnitude that aborts an integration.
pub const BLOWUP_LIMIT: f64 = 1e6;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StateLabel {
    #[serde(rename = "00")]
    S00,
    #[serde(rename = "01")]
    S01,
    #[serde(rename = "10")]
    S10,
    #[serde(rename = "11")]
    S11,
}

impl StateLabel {
    pub const ALL: [StateLabel; 4] = [StateLabel::S00, StateLabel::S01, StateLabel::S10, StateLabel::S11];

    /// Left qubit excited.
    pub fn left(self) -> bool {
        matches!(self, StateLabel::S10 | StateLabel::S11)
    }

    /// Right qubit excited.
    pub fn right(self) -> bool {
        matches!(self, StateLabel::S01 | StateLabel::S11)
    }

    pub fn index(self) -> usize {
        2 * self.left() as usize + self.right() as usize
    }

    pub fn name(self) -> &'static str {
        ["00", "01", "10", "11"][self.index()]
    }
}

/// Mode Hamiltonian, losses and peak drive vector for one qubit state.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix {
    pub jk: StateLabel,
    /// Real symmetric H_jk in GHz.
    pub hamiltonian: DMatrix<f64>,
    /// κ/2π per mode in GHz.
    pub decay: DVector<f64>,
    /// ε e^{iφ} per mode in GHz.
    pub drive: DVector<Complex64>,
}

impl InteractionMatrix {
    pub fn size(&self) -> usize {
        self.hamiltonian.nrows()
    }

    /// G = −iH − κ/2 in GHz.
    pub fn generator(&self) -> DMatrix<Complex64> {
        let n = self.size();
        DMatrix::from_fn(n, n, |r, c| {
            let h = Complex64::new(self.hamiltonian[(r, c)], 0.0);
            let k = if r == c { self.decay[r] / 2.0 } else { 0.0 };
            -I * h - k
        })
    }

    /// Sorted eigenvalues of H in GHz.
    pub fn hamiltonian_eigenvalues(&self) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(self.hamiltonian.clone()).eigenvalues.iter().cloned().collect();
        e.sort_by(f64::total_cmp);
        e
    }
}

/// Builds G_jk for the device's retained bus modes in the frame rotating at
/// `reference` GHz.
pub fn build_interaction_matrix(jk: StateLabel, device: &DeviceConfig, reference: f64) -> Result<InteractionMatrix> {
    build_multimode_matrix(jk, device, &ModeLadder::from_device(device), reference)
}

/// One drive tone acting on one mode.
#[derive(Debug, Clone)]
pub struct DriveTerm {
    pub mode: usize,
    /// ε e^{iφ} in GHz.
    pub amplitude: Complex64,
    /// Tone frequency minus the frame frequency, GHz.
    pub detuning: f64,
    pub envelope: Envelope,
}

/// The four conditioned systems plus their shared drive.
#[derive(Debug, Clone)]
pub struct CoherentSystem {
    pub reference: f64,
    pub matrices: [InteractionMatrix; 4],
    pub drives: Vec<DriveTerm>,
    generators: [DMatrix<Complex64>; 4],
}

impl CoherentSystem {
    pub fn new(device: &DeviceConfig) -> Result<Self> {
        device.validate()?;
        let reference = device.left_drive.frequency;
        let ladder = ModeLadder::from_device(device);
        let mut mats = Vec::with_capacity(4);
        for jk in StateLabel::ALL {
            mats.push(build_multimode_matrix(jk, device, &ladder, reference)?);
        }
        let matrices: [InteractionMatrix; 4] = mats.try_into().expect("four states");
        let n = matrices[0].size();
        let drives = vec![
            DriveTerm {
                mode: 0,
                amplitude: matrices[0].drive[0],
                detuning: 0.0,
                envelope: Envelope::new(&device.left_drive.envelope)?,
            },
            DriveTerm {
                mode: n - 1,
                amplitude: matrices[0].drive[n - 1],
                detuning: device.right_drive.frequency - reference,
                envelope: Envelope::new(&device.right_drive.envelope)?,
            },
        ];
        let generators = matrices.clone().map(|m| m.generator());
        Ok(CoherentSystem { reference, matrices, drives, generators })
    }

    pub fn modes(&self) -> usize {
        self.matrices[0].size()
    }

    pub fn generator(&self, jk: StateLabel) -> &DMatrix<Complex64> {
        &self.generators[jk.index()]
    }

    /// Longest drive envelope in ns.
    pub fn duration(&self) -> f64 {
        self.drives.iter().map(|d| d.envelope.duration()).fold(0.0, f64::max)
    }

    /// Inhomogeneous term −(i/2)E(t) in GHz, written into `out`.
    pub fn forcing(&self, t: f64, out: &mut [Complex64]) {
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for d in &self.drives {
            let env = d.envelope.at(t);
            if env != 0.0 {
                let rot = Complex64::from_polar(1.0, -2.0 * PI * d.detuning * t);
                out[d.mode] += -0.5 * I * d.amplitude * env * rot;
            }
        }
    }

    /// Diagonal pulls (H_jk − H_00)_pp.
    pub fn pull(&self, jk: StateLabel) -> Vec<f64> {
        let a = &self.matrices[jk.index()].hamiltonian;
        let b = &self.matrices[0].hamiltonian;
        (0..self.modes()).map(|p| a[(p, p)] - b[(p, p)]).collect()
    }

    /// Scales every drive amplitude by `s`.
    pub fn scale_drive(&mut self, s: f64) {
        for d in &mut self.drives {
            d.amplitude *= s;
        }
        for m in &mut self.matrices {
            m.drive *= Complex64::new(s, 0.0);
        }
    }
}

/// Amplitudes on a uniform time grid for every qubit state.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrajectory {
    pub dt: f64,
    pub modes: usize,
    /// Row-major (step, mode) per state, indexed by [`StateLabel::index`].
    pub amplitudes: [Vec<Complex64>; 4],
}

impl AmplitudeTrajectory {
    pub fn steps(&self) -> usize {
        self.amplitudes[0].len() / self.modes
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn at(&self, jk: StateLabel, k: usize) -> &[Complex64] {
        &self.amplitudes[jk.index()][k * self.modes..(k + 1) * self.modes]
    }

    pub fn terminal(&self, jk: StateLabel) -> &[Complex64] {
        self.at(jk, self.steps() - 1)
    }

    /// |α(T)|² per mode.
    pub fn terminal_photons(&self, jk: StateLabel) -> Vec<f64> {
        self.terminal(jk).iter().map(|a| a.norm_sqr()).collect()
    }

    /// Worst-state total photons left at the end of the grid.
    pub fn residual_photons(&self) -> f64 {
        StateLabel::ALL
            .iter()
            .map(|&jk| self.terminal_photons(jk).iter().sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Per-mode terminal photons of the worst state.
    pub fn worst_terminal_photons(&self) -> Vec<f64> {
        let worst = StateLabel::ALL
            .iter()
            .max_by(|a, b| {
                let s = |jk: StateLabel| self.terminal_photons(jk).iter().sum::<f64>();
                s(**a).total_cmp(&s(**b))
            })
            .copied()
            .unwrap();
        self.terminal_photons(worst)
    }

    /// Largest |α_p|² over time and states for `mode`.
    pub fn peak_photons(&self, mode: usize) -> f64 {
        self.amplitudes
            .iter()
            .flat_map(|a| a.iter().skip(mode).step_by(self.modes))
            .map(|a| a.norm_sqr())
            .fold(0.0, f64::max)
    }
}

fn matvec(a: &DMatrix<Complex64>, x: &[Complex64], out: &mut [Complex64]) {
    let n = x.len();
    for r in 0..n {
        let mut s = Complex64::new(0.0, 0.0);
        for c in 0..n {
            s += a[(r, c)] * x[c];
        }
        out[r] = s;
    }
}

/// Fixed-step RK4 integration of all four states from vacuum over [0, T].
pub fn integrate_amplitudes(system: &CoherentSystem, total: f64, dt: f64) -> Result<AmplitudeTrajectory> {
    if !(dt > 0.0 && total > 0.0) {
        return Err(Error::Config("integration needs dt > 0 and T > 0".into()));
    }
    let n = system.modes();
    let steps = (total / dt).ceil().max(1.0) as usize;
    let h = total / steps as f64;
    let w = 2.0 * PI;

    let mut out: [Vec<Complex64>; 4] = Default::default();
    for v in &mut out {
        v.reserve((steps + 1) * n);
        v.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), n));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut state = [vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]];
    let (mut f0, mut fm, mut f1) = (vec![zero; n], vec![zero; n], vec![zero; n]);
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);

    for s in 0..steps {
        let t = s as f64 * h;
        system.forcing(t, &mut f0);
        system.forcing(t + 0.5 * h, &mut fm);
        system.forcing(t + h, &mut f1);
        for jk in StateLabel::ALL {
            let g = system.generator(jk);
            let a = &mut state[jk.index()];
            let stage = |y: &[Complex64], f: &[Complex64], k: &mut [Complex64]| {
                matvec(g, y, k);
                for i in 0..n {
                    k[i] = w * (k[i] + f[i]);
                }
            };
            stage(a, &f0, &mut k1);
            for i in 0..n {
                tmp[i] = a[i] + 0.5 * h * k1[i];
            }
            stage(&tmp, &fm, &mut k2);
            for i in 0..n {
                tmp[i] = a[i] + 0.5 * h * k2[i];
            }
            stage(&tmp, &fm, &mut k3);
            for i in 0..n {
                tmp[i] = a[i] + h * k3[i];
            }
            stage(&tmp, &f1, &mut k4);
            for i in 0..n {
                a[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                if !(a[i].norm() < BLOWUP_LIMIT) {
                    return Err(Error::NumericalAbort {
                        t: t + h,
                        reason: format!("amplitude of state {} mode {i} exceeded {BLOWUP_LIMIT:e}", jk.name()),
                    });
                }
            }
            out[jk.index()].extend_from_slice(a);
        }
    }
    Ok(AmplitudeTrajectory { dt: h, modes: n, amplitudes: out })
}

/// Relative phase accumulations and the ZZ phase on the trajectory grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTrajectory {
    pub dt: f64,
    pub mu_11: Vec<Complex64>,
    pub mu_10: Vec<Complex64>,
    pub mu_01: Vec<Complex64>,
    /// Real part is the entangling phase, imaginary part the coherence-loss exponent.
    pub theta: Vec<Complex64>,
}

impl PhaseTrajectory {
    pub fn final_theta(&self) -> Complex64 {
        *self.theta.last().unwrap()
    }
}

/// Cumulative fourth-order quadrature of uniformly sampled `f`.
pub(crate) fn cumulative_integral(f: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = f.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    if n < 2 {
        return out;
    }
    if n < 4 {
        for k in 1..n {
            out[k] = out[k - 1] + 0.5 * h * (f[k - 1] + f[k]);
        }
        return out;
    }
    for k in 0..n - 1 {
        let piece = if k == 0 {
            h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
        } else if k == n - 2 {
            h / 24.0 * (9.0 * f[n - 1] + 19.0 * f[n - 2] - 5.0 * f[n - 3] + f[n - 4])
        } else {
            h / 24.0 * (-f[k - 1] + 13.0 * f[k] + 13.0 * f[k + 1] - f[k + 2])
        };
        out[k + 1] = out[k] + piece;
    }
    out
}

/// Integrates the phase-rate equations along `traj`.
pub fn accumulate_phase(traj: &AmplitudeTrajectory, system: &CoherentSystem) -> Result<PhaseTrajectory> {
    if traj.modes != system.modes() {
        return Err(Error::GridMismatch(format!(
            "trajectory has {} modes, system has {}",
            traj.modes,
            system.modes()
        )));
    }
    let steps = traj.steps();
    if traj.amplitudes.iter().any(|a| a.len() != steps * traj.modes) {
        return Err(Error::GridMismatch("states have different lengths".into()));
    }
    let mu = |jk: StateLabel| {
        let pull = system.pull(jk);
        let rate: Vec<Complex64> = (0..steps)
            .map(|k| {
                let a = traj.at(jk, k);
                let b = traj.at(StateLabel::S00, k);
                let s: Complex64 = (0..traj.modes).map(|p| pull[p] * a[p] * b[p].conj()).sum();
                -2.0 * PI * s
            })
            .collect();
        cumulative_integral(&rate, traj.dt)
    };
    let (mu_11, mu_10, mu_01) = (mu(StateLabel::S11), mu(StateLabel::S10), mu(StateLabel::S01));
    let theta = (0..steps).map(|k| mu_11[k] - mu_10[k] - mu_01[k]).collect();
    Ok(PhaseTrajectory { dt: traj.dt, mu_11, mu_10, mu_01, theta })
}

/// Constant-drive steady amplitudes α = −G⁻¹(−iE/2) per state.
pub fn steady_state_amplitudes(system: &CoherentSystem) -> Result<[DVector<Complex64>; 4]> {
    if system.drives.iter().any(|d| d.detuning != 0.0) {
        return Err(Error::Config("steady state needs both drives at one frequency".into()));
    }
    let n = system.modes();
    let mut b = DVector::<Complex64>::zeros(n);
    for d in &system.drives {
        b[d.mode] += -0.5 * I * d.amplitude;
    }
    let mut out: Vec<DVector<Complex64>> = Vec::with_capacity(4);
    for jk in StateLabel::ALL {
        let lu = system.generator(jk).clone().lu();
        let x = lu.solve(&(-&b)).ok_or(Error::Singular(n))?;
        out.push(x);
    }
    Ok(out.try_into().expect("four states"))
}

/// dθ_ZZ/dt in rad/ns at the constant-drive steady state.
pub fn steady_state_rate(system: &CoherentSystem) -> Result<Complex64> {
    let a = steady_state_amplitudes(system)?;
    let rate = |jk: StateLabel| {
        let pull = system.pull(jk);
        let s: Complex64 = (0..system.modes()).map(|p| pull[p] * a[jk.index()][p] * a[0][p].conj()).sum();
        -2.0 * PI * s
    };
    Ok(rate(StateLabel::S11) - rate(StateLabel::S10) - rate(StateLabel::S01))
}

/// Outcome of one full gate run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateOutcome {
    pub gate_time: f64,
    /// θ_ZZ(T): (re, im) in rad.
    pub theta: (f64, f64),
    pub residual_photons: f64,
    pub max_drive_photons: f64,
}

/// Integrates the device pulse and reports θ_ZZ(T) and residual photons.
pub fn simulate_gate(device: &DeviceConfig, dt: f64) -> Result<GateOutcome> {
    let sys = CoherentSystem::new(device)?;
    let total = sys.duration();
    let traj = integrate_amplitudes(&sys, total, dt)?;
    let phase = accumulate_phase(&traj, &sys)?;
    let th = phase.final_theta();
    let n = sys.modes();
    Ok(GateOutcome {
        gate_time: total,
        theta: (th.re, th.im),
        residual_photons: traj.residual_photons(),
        max_drive_photons: traj.peak_photons(0).max(traj.peak_photons(n - 1)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{EnvelopeShape, EnvelopeSpec};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn dev(mode_count: usize) -> DeviceConfig {
        DeviceConfig::preset("fsr200").unwrap().with_modes(0.2, mode_count)
    }

    /// Single-mode device with equal couplings and matched drive resonators.
    fn symmetric() -> DeviceConfig {
        let mut d = dev(1);
        d.right_qubit = crate::device::QubitSpec { label: crate::device::Side::Right, ..d.left_qubit.clone() };
        d.right_resonator.frequency = d.left_resonator.frequency;
        d.coupling.qubit_drive_right = d.coupling.qubit_drive_left;
        d.center.frequency = d.dressed_resonator_frequency(crate::device::Side::Left).unwrap();
        d.bus.selected_mode = 30;
        d.with_detuning(0.04).with_phase_difference(PI)
    }

    #[test]
    fn state_labels() {
        assert_eq!(StateLabel::ALL.map(|s| s.index()), [0, 1, 2, 3]);
        assert!(StateLabel::S10.left() && !StateLabel::S10.right());
        assert_eq!(serde_json::to_string(&StateLabel::S01).unwrap(), "\"01\"");
    }

    #[test]
    fn symmetric_triple_eigenvalues() {
        let d = symmetric();
        let g = build_interaction_matrix(StateLabel::S00, &d, d.left_drive.frequency).unwrap();
        let delta = d.drive_detuning();
        let gc = d.coupling.drive_center_left;
        let e = g.hamiltonian_eigenvalues();
        let expect = [delta - 2f64.sqrt() * gc, delta, delta + 2f64.sqrt() * gc];
        for (a, b) in e.iter().zip(expect) {
            assert_relative_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn excited_states_shift_drive_diagonals_only() {
        let d = dev(1);
        let f = d.left_drive.frequency;
        let g00 = build_interaction_matrix(StateLabel::S00, &d, f).unwrap().hamiltonian;
        let g11 = build_interaction_matrix(StateLabel::S11, &d, f).unwrap().hamiltonian;
        let diff = &g11 - &g00;
        let chi_l = d.dispersive_shift(crate::device::Side::Left).unwrap();
        let chi_r = d.dispersive_shift(crate::device::Side::Right).unwrap();
        assert_relative_eq!(diff[(0, 0)], chi_l, epsilon = 1e-14);
        assert_relative_eq!(diff[(2, 2)], chi_r, epsilon = 1e-14);
        let mut rest = diff.clone();
        rest[(0, 0)] = 0.0;
        rest[(2, 2)] = 0.0;
        assert!(rest.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn no_anharmonicity_makes_states_identical() {
        let mut d = dev(3);
        d.left_qubit.anharmonicity = -1e-12;
        d.right_qubit.anharmonicity = -1e-12;
        let f = d.left_drive.frequency;
        let g0 = build_interaction_matrix(StateLabel::S00, &d, f).unwrap();
        for jk in StateLabel::ALL {
            let g = build_interaction_matrix(jk, &d, f).unwrap();
            assert!((&g.hamiltonian - &g0.hamiltonian).amax() < 1e-12);
        }
    }

    #[test]
    fn zero_drive_stays_in_vacuum() {
        let d = dev(5).with_amplitude(0.0);
        let sys = CoherentSystem::new(&d).unwrap();
        let traj = integrate_amplitudes(&sys, 50.0, 0.05).unwrap();
        assert!(traj.amplitudes.iter().flatten().all(|a| a.norm() == 0.0));
        let ph = accumulate_phase(&traj, &sys).unwrap();
        assert!(ph.theta.iter().all(|t| t.norm() == 0.0));
    }

    #[test]
    fn dark_mode_stays_dark() {
        let d = symmetric().with_envelope(EnvelopeSpec::full(EnvelopeShape::NestedCosine, 200.0));
        let sys = CoherentSystem::new(&d).unwrap();
        let traj = integrate_amplitudes(&sys, 200.0, 0.02).unwrap();
        let worst = (0..traj.steps()).map(|k| traj.at(StateLabel::S00, k)[1].norm()).fold(0.0, f64::max);
        assert!(worst <= 1e-10, "{worst}");
        assert!(traj.peak_photons(0) > 1.0);
    }

    #[test]
    fn halving_dt_converges() {
        let d = dev(5);
        let sys = CoherentSystem::new(&d).unwrap();
        let a = integrate_amplitudes(&sys, 100.0, 0.01).unwrap();
        let b = integrate_amplitudes(&sys, 100.0, 0.005).unwrap();
        for jk in StateLabel::ALL {
            let x = DVector::from_column_slice(a.terminal(jk));
            let y = DVector::from_column_slice(b.terminal(jk));
            let peak = a.peak_photons(0).sqrt();
            assert!((x - y).norm() / peak <= 1e-8);
        }
    }

    #[test]
    fn blowup_aborts() {
        let mut d = dev(1);
        d.left_drive.amplitude = 1e9;
        let sys = CoherentSystem::new(&d).unwrap();
        assert!(matches!(integrate_amplitudes(&sys, 10.0, 0.05), Err(Error::NumericalAbort { .. })));
    }

    #[test]
    fn zero_pull_gives_zero_theta() {
        let mut d = dev(3);
        d.left_qubit.anharmonicity = -1e-15;
        d.right_qubit.anharmonicity = -1e-15;
        let sys = CoherentSystem::new(&d).unwrap();
        let traj = integrate_amplitudes(&sys, 60.0, 0.05).unwrap();
        let ph = accumulate_phase(&traj, &sys).unwrap();
        assert!(ph.final_theta().norm() < 1e-12);
        assert_eq!(ph.theta[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn coherence_loss_matches_displacement_distance() {
        // Without loss the bus overlap magnitude is exp(−|α_jk − α_00|²/2).
        let d = dev(3);
        let sys = CoherentSystem::new(&d).unwrap();
        let traj = integrate_amplitudes(&sys, 120.0, 0.01).unwrap();
        let ph = accumulate_phase(&traj, &sys).unwrap();
        for k in (0..traj.steps()).step_by(997) {
            for (jk, mu) in [(StateLabel::S11, &ph.mu_11), (StateLabel::S10, &ph.mu_10)] {
                let dist: f64 = traj.at(jk, k).iter().zip(traj.at(StateLabel::S00, k)).map(|(a, b)| (a - b).norm_sqr()).sum();
                assert_relative_eq!(mu[k].im, dist / 2.0, epsilon = 1e-7, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let sys1 = CoherentSystem::new(&dev(1)).unwrap();
        let sys5 = CoherentSystem::new(&dev(5)).unwrap();
        let traj = integrate_amplitudes(&sys1, 10.0, 0.05).unwrap();
        assert!(matches!(accumulate_phase(&traj, &sys5), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn quadrature_is_fourth_order() {
        let f = |h: f64| {
            let n = (1.0 / h).round() as usize + 1;
            let v: Vec<Complex64> = (0..n).map(|k| Complex64::new((k as f64 * h).exp(), 0.0)).collect();
            (cumulative_integral(&v, h)[n - 1].re - (1f64.exp() - 1.0)).abs()
        };
        let ratio = f(0.02) / f(0.01);
        assert!(ratio > 12.0, "{ratio}");
    }

    #[test]
    fn detuned_drive_frame() {
        let mut d = dev(1);
        d.right_drive.frequency += 0.001;
        let sys = CoherentSystem::new(&d).unwrap();
        assert_relative_eq!(sys.drives[1].detuning, 0.001, epsilon = 1e-12);
        assert!(steady_state_amplitudes(&sys).is_err());
        integrate_amplitudes(&sys, 20.0, 0.05).unwrap();
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn amplitudes_are_linear_in_drive(s in 0.3f64..3.0) {
            let d = dev(3).with_envelope(EnvelopeSpec::full(EnvelopeShape::Polynomial { degree: 3 }, 60.0));
            let sys = CoherentSystem::new(&d).unwrap();
            let mut scaled = sys.clone();
            scaled.scale_drive(s);
            let a = integrate_amplitudes(&sys, 60.0, 0.05).unwrap();
            let b = integrate_amplitudes(&scaled, 60.0, 0.05).unwrap();
            for jk in StateLabel::ALL {
                for (x, y) in a.terminal(jk).iter().zip(b.terminal(jk)) {
                    prop_assert!((x * s - y).norm() <= 1e-9 * (1.0 + y.norm()));
                }
            }
            let ta = accumulate_phase(&a, &sys).unwrap().final_theta();
            let tb = accumulate_phase(&b, &scaled).unwrap().final_theta();
            prop_assert!((ta.re * s * s - tb.re).abs() <= 1e-9 * tb.re.abs().max(1e-12));
        }

        #[test]
        fn lossless_steady_rate_is_real(delta in 0.03f64..0.09) {
            let sys = CoherentSystem::new(&dev(5).with_detuning(delta)).unwrap();
            let r = steady_state_rate(&sys).unwrap();
            prop_assert!(r.im.abs() <= 1e-9 * r.re.abs());
        }
    }
}
