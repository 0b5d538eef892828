//! Eigenmode solution of the conditioned amplitude equations.
//!
//! With G = V D V⁻¹ every eigenmode obeys a scalar equation
//! dβ/dt = 2π (d β + E'(t)), E' = V⁻¹(−iE/2), solved by the exact
//! exponential propagator plus Simpson quadrature of the drive integral.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{AmplitudeTrajectory, CoherentSystem, StateLabel};
use crate::error::{Error, Result};

/// Condition number above which the eigenbasis is reported as ill-conditioned.
pub const CONDITION_WARN: f64 = 1e8;

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Eigenvalues d of G in GHz.
    pub eigenvalues: DVector<Complex64>,
    /// Columns are right eigenvectors.
    pub eigenvectors: DMatrix<Complex64>,
    pub inverse: DMatrix<Complex64>,
    pub condition: f64,
}

/// Diagonalizes a general complex matrix through its Schur form.
pub fn decompose(g: &DMatrix<Complex64>) -> Result<SpectralDecomposition> {
    let n = g.nrows();
    let (q, t) = g.clone().schur().unpack();
    let scale = t.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    let tiny = 1e-14 * scale;
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for j in i + 1..=k {
                s += t[(i, j)] * y[(j, k)];
            }
            let mut den = t[(i, i)] - lambda;
            if den.norm() < tiny {
                den = Complex64::new(tiny, 0.0);
            }
            y[(i, k)] = -s / den;
        }
    }
    let mut v = q * y;
    for mut col in v.column_iter_mut() {
        let nrm = col.norm();
        col /= Complex64::new(nrm, 0.0);
    }
    let inverse = v.clone().try_inverse().ok_or(Error::Singular(n))?;
    let sv = v.clone().singular_values();
    let condition = sv.max() / sv.min();
    if !(condition < CONDITION_WARN) {
        log::warn!("eigenbasis condition number {condition:e} exceeds {CONDITION_WARN:e}");
    }
    let eigenvalues = DVector::from_iterator(n, (0..n).map(|k| t[(k, k)]));
    Ok(SpectralDecomposition { eigenvalues, eigenvectors: v, inverse, condition })
}

/// Spectral propagation on a uniform grid of step ≈ `dt` up to `total`.
pub fn spectral_trajectory(system: &CoherentSystem, total: f64, dt: f64) -> Result<AmplitudeTrajectory> {
    if !(dt > 0.0 && total > 0.0) {
        return Err(Error::Config("spectral solution needs dt > 0 and T > 0".into()));
    }
    let n = system.modes();
    let steps = (total / dt).ceil().max(1.0) as usize;
    let h = total / steps as f64;
    let w = 2.0 * std::f64::consts::PI;
    let zero = Complex64::new(0.0, 0.0);

    let decs: Vec<SpectralDecomposition> =
        StateLabel::ALL.iter().map(|&jk| decompose(system.generator(jk))).collect::<Result<_>>()?;
    let mut out: [Vec<Complex64>; 4] = Default::default();
    for v in &mut out {
        v.reserve((steps + 1) * n);
        v.extend(std::iter::repeat_n(zero, n));
    }

    let mut force = [vec![zero; n], vec![zero; n], vec![zero; n]];
    let mut beta = vec![DVector::<Complex64>::zeros(n); 4];
    let props: Vec<(Vec<Complex64>, Vec<Complex64>)> = decs
        .iter()
        .map(|d| {
            let full = d.eigenvalues.iter().map(|&z| (w * z * h).exp()).collect();
            let half = d.eigenvalues.iter().map(|&z| (w * z * h / 2.0).exp()).collect();
            (full, half)
        })
        .collect();

    for s in 0..steps {
        let t = s as f64 * h;
        system.forcing(t, &mut force[0]);
        system.forcing(t + h / 2.0, &mut force[1]);
        system.forcing(t + h, &mut force[2]);
        let f: Vec<DVector<Complex64>> = force.iter().map(|v| DVector::from_column_slice(v)).collect();
        for (idx, dec) in decs.iter().enumerate() {
            let e0 = &dec.inverse * &f[0];
            let em = &dec.inverse * &f[1];
            let e1 = &dec.inverse * &f[2];
            let (full, half) = &props[idx];
            let b = &mut beta[idx];
            for k in 0..n {
                let quad = h / 6.0 * (full[k] * e0[k] + 4.0 * half[k] * em[k] + e1[k]);
                b[k] = full[k] * b[k] + w * quad;
            }
            let alpha = &dec.eigenvectors * &*b;
            out[idx].extend(alpha.iter());
        }
    }
    Ok(AmplitudeTrajectory { dt: h, modes: n, amplitudes: out })
}

/// Amplitudes of every state at time `t`, propagated with step ≈ `dt`.
pub fn spectral_solution(system: &CoherentSystem, t: f64, dt: f64) -> Result<[DVector<Complex64>; 4]> {
    let traj = spectral_trajectory(system, t, dt)?;
    Ok(StateLabel::ALL.map(|jk| DVector::from_column_slice(traj.terminal(jk))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::DeviceConfig;
    use crate::dynamics::{accumulate_phase, integrate_amplitudes};
    use crate::pulse::{EnvelopeShape, EnvelopeSpec};
    use approx::assert_relative_eq;

    #[test]
    fn decomposition_reconstructs() {
        let d = DeviceConfig::preset("fsr200").unwrap().with_decay(1e-4);
        let sys = CoherentSystem::new(&d).unwrap();
        for jk in StateLabel::ALL {
            let g = system_generator(&sys, jk);
            let dec = decompose(&g).unwrap();
            let rebuilt = &dec.eigenvectors * DMatrix::from_diagonal(&dec.eigenvalues) * &dec.inverse;
            assert!((rebuilt - &g).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
            assert!(dec.condition < 10.0);
            assert!(dec.eigenvalues.iter().all(|z| z.re < 0.0));
        }
    }

    fn system_generator(sys: &CoherentSystem, jk: StateLabel) -> DMatrix<Complex64> {
        sys.generator(jk).clone()
    }

    #[test]
    fn scalar_constant_drive() {
        // One decaying mode under constant drive: β(t) = −(i/2)ε(1 − e^{2πdt})/(−d).
        let d = Complex64::new(-0.01, -0.05);
        let g = DMatrix::from_element(1, 1, d);
        let dec = decompose(&g).unwrap();
        assert_relative_eq!(dec.eigenvalues[0].re, d.re, epsilon = 1e-15);
        let eps = 0.2;
        let t = 37.0;
        let w = 2.0 * std::f64::consts::PI;
        let exact = -0.5 * Complex64::i() * eps * ((w * d * t).exp() - 1.0) / d;
        // Same recursion as the trajectory propagator on a flat drive.
        let steps = 3700;
        let h = t / steps as f64;
        let mut b = Complex64::new(0.0, 0.0);
        let f = -0.5 * Complex64::i() * eps;
        for _ in 0..steps {
            let full = (w * d * h).exp();
            let half = (w * d * h / 2.0).exp();
            b = full * b + w * h / 6.0 * (full * f + 4.0 * half * f + f);
        }
        assert!((b - exact).norm() < 1e-9 * exact.norm());
    }

    #[test]
    fn matches_rk4_on_nested_cosine() {
        let d = DeviceConfig::preset("fsr200")
            .unwrap()
            .with_envelope(EnvelopeSpec::full(EnvelopeShape::NestedCosine, 120.0));
        let sys = CoherentSystem::new(&d).unwrap();
        let a = integrate_amplitudes(&sys, 120.0, 0.01).unwrap();
        let b = spectral_trajectory(&sys, 120.0, 0.01).unwrap();
        let scale = a.peak_photons(0).sqrt();
        for jk in StateLabel::ALL {
            let x = DVector::from_column_slice(a.terminal(jk));
            let y = DVector::from_column_slice(b.terminal(jk));
            assert!((x - y).norm() <= 1e-6 * scale);
        }
        let ta = accumulate_phase(&a, &sys).unwrap().final_theta();
        let tb = accumulate_phase(&b, &sys).unwrap().final_theta();
        assert!((ta - tb).norm() <= 1e-5, "{ta} {tb}");
        let at_t = spectral_solution(&sys, 120.0, 0.01).unwrap();
        assert_eq!(at_t[3].as_slice(), b.terminal(StateLabel::S11));
    }

    #[test]
    fn lossy_amplitudes_stay_bounded() {
        let d = DeviceConfig::preset("fsr200").unwrap().with_decay(5e-3);
        let sys = CoherentSystem::new(&d).unwrap();
        let tr = spectral_trajectory(&sys, 165.0, 0.05).unwrap();
        assert!(tr.peak_photons(0) < 100.0);
    }
}
