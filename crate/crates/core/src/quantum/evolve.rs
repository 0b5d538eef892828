use num_complex::Complex64;
use std::f64::consts::PI;

use super::hamiltonian::DrivenHamiltonian;
use super::sparse::{reachable_set, SparseOperator};
use crate::error::{Error, Result};

/// Largest tolerated |‖ψ‖ − 1| during a run.
pub const NORM_TOLERANCE: f64 = 1e-8;

const MAX_TAYLOR_TERMS: usize = 80;

fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Operators restricted to the states reachable from a given support.
struct Restricted {
    keep: Vec<usize>,
    h0: SparseOperator,
    raise: Vec<SparseOperator>,
    lower: Vec<SparseOperator>,
}

impl Restricted {
    fn new(ham: &DrivenHamiltonian, seeds: &[usize]) -> Self {
        let mut ops = vec![&ham.h0];
        for d in &ham.drives {
            ops.push(&d.raise);
            ops.push(&d.lower);
        }
        let keep = reachable_set(ham.dim(), seeds, &ops);
        Restricted {
            h0: ham.h0.restrict(&keep),
            raise: ham.drives.iter().map(|d| d.raise.restrict(&keep)).collect(),
            lower: ham.drives.iter().map(|d| d.lower.restrict(&keep)).collect(),
            keep,
        }
    }

    /// out = −i2πh (s H0 + Σ c_d b_d† + c_d* b_d) x.
    fn generator(&self, h: f64, s: f64, coeffs: &[Complex64], x: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        let k = Complex64::new(0.0, -2.0 * PI * h);
        self.h0.mul_add(k * s, x, out);
        for ((r, l), c) in self.raise.iter().zip(&self.lower).zip(coeffs) {
            if *c != Complex64::new(0.0, 0.0) {
                r.mul_add(k * c, x, out);
                l.mul_add(k * c.conj(), x, out);
            }
        }
    }

    /// x ← exp(A) x by a Taylor series.
    fn exp_apply(&self, h: f64, s: f64, coeffs: &[Complex64], x: &mut [Complex64], scratch: &mut [Vec<Complex64>; 2]) {
        let [term, next] = scratch;
        term.copy_from_slice(x);
        let scale = norm(x).max(1e-300);
        for k in 1..=MAX_TAYLOR_TERMS {
            self.generator(h, s, coeffs, term, next);
            let inv = 1.0 / k as f64;
            for (xi, ni) in x.iter_mut().zip(next.iter_mut()) {
                *ni *= inv;
                *xi += *ni;
            }
            std::mem::swap(term, next);
            if norm(term) <= 1e-17 * scale {
                return;
            }
        }
    }
}

/// Fixed-step fourth-order commutator-free propagation of `state` from 0 to
/// `total`. `observe(t, ψ)` runs at t = 0 and every `sample_every` steps.
pub fn evolve_observed(
    state: &[Complex64],
    ham: &DrivenHamiltonian,
    total: f64,
    dt: f64,
    sample_every: usize,
    mut observe: impl FnMut(f64, &[Complex64]),
) -> Result<Vec<Complex64>> {
    if state.len() != ham.dim() {
        return Err(Error::GridMismatch(format!("state has {} entries, space has {}", state.len(), ham.dim())));
    }
    if !(dt > 0.0 && total >= 0.0) {
        return Err(Error::Config("evolution needs dt > 0 and T ≥ 0".into()));
    }
    let n0 = norm(state);
    if (n0 - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::Config(format!("initial state has norm {n0}")));
    }
    let seeds: Vec<usize> = (0..state.len()).filter(|&i| state[i] != Complex64::new(0.0, 0.0)).collect();
    let sub = Restricted::new(ham, &seeds);
    let mut x: Vec<Complex64> = sub.keep.iter().map(|&i| state[i]).collect();
    let mut full = state.to_vec();
    let embed = |x: &[Complex64], full: &mut Vec<Complex64>| {
        for (&i, v) in sub.keep.iter().zip(x) {
            full[i] = *v;
        }
    };

    let steps = (total / dt).ceil() as usize;
    let h = if steps == 0 { 0.0 } else { total / steps as f64 };
    let r3 = 3f64.sqrt();
    let (a1, a2) = ((3.0 - 2.0 * r3) / 12.0, (3.0 + 2.0 * r3) / 12.0);
    let (c1, c2) = (0.5 - r3 / 6.0, 0.5 + r3 / 6.0);
    let mut scratch = [vec![Complex64::new(0.0, 0.0); x.len()], vec![Complex64::new(0.0, 0.0); x.len()]];
    let every = sample_every.max(1);

    observe(0.0, &full);
    for step in 0..steps {
        let t = step as f64 * h;
        let f1: Vec<Complex64> = ham.drives.iter().map(|d| d.coefficient(t + c1 * h)).collect();
        let f2: Vec<Complex64> = ham.drives.iter().map(|d| d.coefficient(t + c2 * h)).collect();
        let first: Vec<Complex64> = f1.iter().zip(&f2).map(|(p, q)| a2 * p + a1 * q).collect();
        let second: Vec<Complex64> = f1.iter().zip(&f2).map(|(p, q)| a1 * p + a2 * q).collect();
        sub.exp_apply(h, a1 + a2, &first, &mut x, &mut scratch);
        sub.exp_apply(h, a1 + a2, &second, &mut x, &mut scratch);
        let n = norm(&x);
        if !((n - 1.0).abs() <= NORM_TOLERANCE) {
            return Err(Error::NumericalAbort { t: t + h, reason: format!("norm drifted to {n}") });
        }
        if (step + 1) % every == 0 || step + 1 == steps {
            embed(&x, &mut full);
            observe(t + h, &full);
        }
    }
    embed(&x, &mut full);
    Ok(full)
}

pub fn evolve(state: &[Complex64], ham: &DrivenHamiltonian, total: f64, dt: f64) -> Result<Vec<Complex64>> {
    evolve_observed(state, ham, total, dt, usize::MAX, |_, _| {})
}
