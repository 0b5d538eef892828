//! Drive envelope families and their sampled realizations.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest polynomial degree accepted by [`polynomial_coefficients`].
pub const MAX_POLY_DEGREE: u32 = 15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvelopeShape {
    /// Odd-degree smooth rise with a mirrored fall.
    Polynomial { degree: u32 },
    NestedCosine,
    /// Nested cosine rise, a platform of `platform_ratio * rise_time`, mirrored fall.
    CosinePlatform { platform_ratio: f64 },
    /// Cosine series over the full pulse, rescaled to unit peak.
    Slepian { lambda: Vec<f64> },
    Flat,
}

impl EnvelopeShape {
    pub fn name(&self) -> String {
        match self {
            EnvelopeShape::Polynomial { degree } => format!("poly{degree}"),
            EnvelopeShape::NestedCosine => "nested_cosine".into(),
            EnvelopeShape::CosinePlatform { .. } => "cosine_platform".into(),
            EnvelopeShape::Slepian { .. } => "slepian".into(),
            EnvelopeShape::Flat => "flat".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSpec {
    pub shape: EnvelopeShape,
    /// t_r in ns.
    pub rise_time: f64,
    /// t_p in ns. Only polynomial and flat envelopes hold.
    #[serde(default)]
    pub hold_time: f64,
}

impl EnvelopeSpec {
    pub fn new(shape: EnvelopeShape, rise_time: f64) -> Self {
        EnvelopeSpec { shape, rise_time, hold_time: 0.0 }
    }

    /// Full pulse of length `total` ns with no hold.
    pub fn full(shape: EnvelopeShape, total: f64) -> Self {
        Self::new(shape, total / 2.0)
    }

    pub fn with_hold(mut self, hold: f64) -> Self {
        self.hold_time = hold;
        self
    }

    /// Length of the platform between rise and fall.
    pub fn platform(&self) -> f64 {
        match &self.shape {
            EnvelopeShape::CosinePlatform { platform_ratio } => platform_ratio * self.rise_time,
            _ => self.hold_time,
        }
    }

    /// Total pulse duration in ns.
    pub fn duration(&self) -> f64 {
        2.0 * self.rise_time + self.platform()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.rise_time > 0.0 && self.rise_time.is_finite()) {
            return bad("rise_time must be positive");
        }
        if !(self.hold_time >= 0.0 && self.hold_time.is_finite()) {
            return bad("hold_time must be non-negative");
        }
        match &self.shape {
            EnvelopeShape::Polynomial { degree } => {
                if degree % 2 == 0 || *degree > MAX_POLY_DEGREE {
                    return bad("polynomial degree must be odd and at most 15");
                }
            }
            EnvelopeShape::CosinePlatform { platform_ratio } => {
                if !(*platform_ratio >= 0.0 && platform_ratio.is_finite()) {
                    return bad("platform ratio must be non-negative");
                }
                if self.hold_time != 0.0 {
                    return bad("cosine_platform sets its hold from platform_ratio");
                }
            }
            EnvelopeShape::Slepian { lambda } => {
                if lambda.is_empty() || lambda.iter().any(|l| !l.is_finite()) {
                    return bad("slepian coefficients must be finite and nonempty");
                }
                if self.hold_time != 0.0 {
                    return bad("slepian envelopes have no hold");
                }
            }
            EnvelopeShape::NestedCosine => {
                if self.hold_time != 0.0 {
                    return bad("nested_cosine has no hold; use cosine_platform");
                }
            }
            EnvelopeShape::Flat => {}
        }
        Ok(())
    }
}

/// Coefficients c_m of the rise Σ (−1)^m c_m x^(m+(d+1)/2) with unit value
/// and vanishing derivatives up to order (d−1)/2 at x = 1.
pub fn polynomial_coefficients(d: u32) -> Result<Vec<f64>> {
    if d.is_multiple_of(2) || d > MAX_POLY_DEGREE {
        return Err(Error::Config(format!("polynomial degree {d} must be odd in 1..=15")));
    }
    let h = u64::from(d.div_ceil(2));
    let binom = |n: u64, k: u64| (1..=k).fold(1u64, |acc, i| acc * (n + 1 - i) / i);
    Ok((0..h).map(|m| (binom(h - 1 + m, m) * binom(2 * h - 1, h - 1 - m)) as f64).collect())
}

/// Σ_{j odd} λ_j − 1 with 0-based indices.
pub fn slepian_constraint_residual(lambda: &[f64]) -> f64 {
    lambda.iter().skip(1).step_by(2).sum::<f64>() - 1.0
}

fn slepian_raw(lambda: &[f64], t: f64, tr: f64) -> f64 {
    lambda
        .iter()
        .enumerate()
        .map(|(j, l)| l * (1.0 - (PI * (j as f64 + 1.0) * t / tr).cos()) / 2.0)
        .sum()
}

fn nested_cosine(t: f64, tr: f64) -> f64 {
    (1.0 + (PI * (PI * t / (2.0 * tr)).cos()).cos()) / 2.0
}

#[derive(Debug, Clone)]
enum Compiled {
    Polynomial { coeffs: Vec<f64>, offset: i32 },
    NestedCosine,
    Slepian { lambda: Vec<f64>, scale: f64 },
    Flat,
}

/// An envelope ready for repeated evaluation.
#[derive(Debug, Clone)]
pub struct Envelope {
    spec: EnvelopeSpec,
    compiled: Compiled,
}

impl Envelope {
    pub fn new(spec: &EnvelopeSpec) -> Result<Self> {
        spec.validate()?;
        let tr = spec.rise_time;
        let compiled = match &spec.shape {
            EnvelopeShape::Polynomial { degree } => Compiled::Polynomial {
                coeffs: polynomial_coefficients(*degree)?,
                offset: degree.div_ceil(2) as i32,
            },
            EnvelopeShape::NestedCosine | EnvelopeShape::CosinePlatform { .. } => Compiled::NestedCosine,
            EnvelopeShape::Flat => Compiled::Flat,
            EnvelopeShape::Slepian { lambda } => {
                let peak = slepian_peak(lambda, tr);
                if !(peak > 0.0) {
                    return Err(Error::Config("slepian envelope has no positive peak".into()));
                }
                Compiled::Slepian { lambda: lambda.clone(), scale: 1.0 / peak }
            }
        };
        Ok(Envelope { spec: spec.clone(), compiled })
    }

    pub fn spec(&self) -> &EnvelopeSpec {
        &self.spec
    }

    pub fn duration(&self) -> f64 {
        self.spec.duration()
    }

    fn rise(&self, x: f64) -> f64 {
        match &self.compiled {
            Compiled::Polynomial { coeffs, offset } => {
                let eval = |x: f64| -> f64 {
                    coeffs
                        .iter()
                        .enumerate()
                        .map(|(m, c)| {
                            let s = if m % 2 == 0 { 1.0 } else { -1.0 };
                            s * c * x.powi(m as i32 + offset)
                        })
                        .sum()
                };
                // S(x) = 1 − S(1 − x) keeps the cancellation small near x = 1.
                if x <= 0.5 {
                    eval(x)
                } else {
                    1.0 - eval(1.0 - x)
                }
            }
            Compiled::NestedCosine => nested_cosine(x, 1.0),
            _ => unreachable!(),
        }
    }

    /// Amplitude at time `t`; zero outside the pulse.
    pub fn at(&self, t: f64) -> f64 {
        let total = self.duration();
        if !(0.0..=total).contains(&t) {
            return 0.0;
        }
        let tr = self.spec.rise_time;
        match &self.compiled {
            Compiled::Flat => 1.0,
            Compiled::Slepian { lambda, scale } => scale * slepian_raw(lambda, t, tr),
            _ => {
                let u = t.min(total - t);
                if u >= tr {
                    1.0
                } else {
                    self.rise(u / tr)
                }
            }
        }
    }

    /// Like [`Envelope::at`] but rejects times outside the pulse.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        let total = self.duration();
        if !(0.0..=total).contains(&t) {
            return Err(Error::OutOfRange { t, total });
        }
        Ok(self.at(t))
    }

    pub fn sample(&self, dt: f64) -> SampledEnvelope {
        let total = self.duration();
        let n = ((total / dt).round() as usize).max(1);
        let dt = total / n as f64;
        SampledEnvelope { dt, samples: (0..=n).map(|k| self.at(k as f64 * dt)).collect() }
    }
}

/// Largest value of the unnormalized cosine series over a pulse of length 2·`tr`.
pub fn slepian_peak(lambda: &[f64], tr: f64) -> f64 {
    let n = 4096;
    let h = 2.0 * tr / n as f64;
    let (mut best, mut k_best) = (f64::NEG_INFINITY, 0);
    for k in 0..=n {
        let v = slepian_raw(lambda, k as f64 * h, tr);
        if v > best {
            best = v;
            k_best = k;
        }
    }
    let (mut a, mut b) = ((k_best.max(1) - 1) as f64 * h, ((k_best + 1).min(n)) as f64 * h);
    let f = |t: f64| slepian_raw(lambda, t, tr);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    best.max(f(0.5 * (a + b)))
}

/// One-off evaluation of `spec` at `t`.
pub fn evaluate_envelope(spec: &EnvelopeSpec, t: f64) -> Result<f64> {
    Envelope::new(spec)?.evaluate(t)
}

/// An envelope sampled on a uniform grid that includes both endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledEnvelope {
    pub dt: f64,
    pub samples: Vec<f64>,
}

impl SampledEnvelope {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(move |k| k as f64 * self.dt)
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Slepian coefficients reported for the 0.2 GHz device near 100 ns.
pub const REFERENCE_SLEPIAN: [f64; 7] = [0.9429, -0.089, -0.003, 0.0002, -0.0003, -0.0364, 0.0835];

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn env(shape: EnvelopeShape, tr: f64) -> Envelope {
        Envelope::new(&EnvelopeSpec::new(shape, tr)).unwrap()
    }

    /// Exact integer check of the value and derivative conditions at x = 1.
    fn satisfies_endpoint_conditions(d: u32, c: &[f64]) -> bool {
        let h = d.div_ceil(2) as i128;
        (0..h).all(|j| {
            let lhs: i128 = c
                .iter()
                .enumerate()
                .map(|(m, &cm)| {
                    let p = h + m as i128;
                    let falling: i128 = (0..j).map(|i| p - i).product();
                    let sign = if m % 2 == 0 { 1 } else { -1 };
                    sign * cm as i128 * falling
                })
                .sum();
            lhs == i128::from(j == 0)
        })
    }

    #[test]
    fn smoothstep_coefficients() {
        assert_eq!(polynomial_coefficients(3).unwrap(), vec![3.0, 2.0]);
        assert_eq!(polynomial_coefficients(5).unwrap(), vec![10.0, 15.0, 6.0]);
        assert_eq!(polynomial_coefficients(9).unwrap(), vec![126.0, 420.0, 540.0, 315.0, 70.0]);
        for d in [1, 3, 5, 7, 9, 11, 13, 15] {
            let c = polynomial_coefficients(d).unwrap();
            assert!(c.iter().all(|v| v.fract() == 0.0));
            assert!(satisfies_endpoint_conditions(d, &c), "degree {d}");
        }
        assert!(polynomial_coefficients(4).is_err());
        assert!(polynomial_coefficients(17).is_err());
    }

    #[test]
    fn polynomial_endpoints_and_slope() {
        for d in [1u32, 3, 5, 7, 9, 11] {
            let e = env(EnvelopeShape::Polynomial { degree: d }, 1.0);
            assert_eq!(e.at(0.0), 0.0);
            assert_relative_eq!(e.at(1.0), 1.0, epsilon = 1e-12);
            if d > 1 {
                let h = 1e-6;
                assert!(((e.at(1.0) - e.at(1.0 - h)) / h).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn nested_cosine_endpoints() {
        let e = env(EnvelopeShape::NestedCosine, 40.0);
        assert!(e.at(0.0).abs() < 1e-15);
        assert_relative_eq!(e.at(40.0), 1.0, epsilon = 1e-15);
        assert!(e.at(80.0).abs() < 1e-15);
    }

    #[test]
    fn cosine_platform_holds() {
        let tr = 50.0;
        let p = env(EnvelopeShape::CosinePlatform { platform_ratio: 0.2 }, tr);
        let n = env(EnvelopeShape::NestedCosine, tr);
        assert_relative_eq!(p.duration(), 2.2 * tr);
        for k in 0..=50 {
            let t = tr * k as f64 / 50.0;
            assert_relative_eq!(p.at(t), n.at(t), epsilon = 1e-15);
        }
        for k in 0..=10 {
            assert_eq!(p.at(tr + 0.2 * tr * k as f64 / 10.0), 1.0);
        }
    }

    #[test]
    fn single_term_slepian_is_raised_cosine() {
        let e = env(EnvelopeShape::Slepian { lambda: vec![1.0] }, 30.0);
        for k in 0..=60 {
            let t = k as f64;
            assert_relative_eq!(e.at(t), (1.0 - (PI * t / 30.0).cos()) / 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn reference_slepian_is_normalized() {
        let e = env(EnvelopeShape::Slepian { lambda: REFERENCE_SLEPIAN.to_vec() }, 50.0);
        let s = e.sample(0.001);
        assert!(s.peak() <= 1.0 + 1e-9 && s.peak() > 1.0 - 1e-6);
        assert!(s.samples[0].abs() < 1e-12 && s.samples.last().unwrap().abs() < 1e-12);
    }

    #[test]
    fn negative_slepian_is_rejected() {
        let spec = EnvelopeSpec::new(EnvelopeShape::Slepian { lambda: vec![-1.0] }, 50.0);
        assert!(Envelope::new(&spec).is_err());
    }

    #[test]
    fn slepian_residual_examples() {
        assert_eq!(slepian_constraint_residual(&[0.0, 1.0]), 0.0);
        assert_eq!(slepian_constraint_residual(&[1.0, 0.0]), -1.0);
        let r = slepian_constraint_residual(&REFERENCE_SLEPIAN);
        assert_relative_eq!(r, -0.089 + 0.0002 - 0.0364 - 1.0, epsilon = 1e-12);
    }

    #[test]
    fn out_of_range_time() {
        let spec = EnvelopeSpec::new(EnvelopeShape::NestedCosine, 10.0);
        assert!(matches!(evaluate_envelope(&spec, 20.5), Err(Error::OutOfRange { .. })));
        assert!(evaluate_envelope(&spec, -0.1).is_err());
        assert_eq!(Envelope::new(&spec).unwrap().at(25.0), 0.0);
    }

    #[test]
    fn sampled_endpoints_vanish() {
        let shapes = [
            EnvelopeShape::Polynomial { degree: 3 },
            EnvelopeShape::Polynomial { degree: 9 },
            EnvelopeShape::NestedCosine,
            EnvelopeShape::CosinePlatform { platform_ratio: 0.2 },
            EnvelopeShape::Slepian { lambda: REFERENCE_SLEPIAN.to_vec() },
        ];
        for s in shapes {
            let e = env(s, 50.0).sample(0.05);
            assert!(e.samples[0].abs() <= 1e-9 && e.samples.last().unwrap().abs() <= 1e-9);
            assert!(e.peak() <= 1.0 + 1e-6);
        }
    }

    #[test]
    fn derivatives_are_continuous_at_joins() {
        let h = 1e-5;
        for shape in [EnvelopeShape::Polynomial { degree: 5 }, EnvelopeShape::NestedCosine] {
            let hold = if matches!(shape, EnvelopeShape::Polynomial { .. }) { 5.0 } else { 0.0 };
            let e = Envelope::new(&EnvelopeSpec::new(shape, 20.0).with_hold(hold)).unwrap();
            for join in [20.0, e.duration() - 20.0] {
                let left = (e.at(join) - e.at(join - h)) / h;
                let right = (e.at(join + h) - e.at(join)) / h;
                assert!((left - right).abs() < 1e-3, "{left} {right}");
            }
        }
    }

    #[test]
    fn serde_round_trip() {
        let spec = EnvelopeSpec::new(EnvelopeShape::Slepian { lambda: REFERENCE_SLEPIAN.to_vec() }, 50.0);
        let s = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<EnvelopeSpec>(&s).unwrap(), spec);
    }

    proptest! {
        #[test]
        fn polynomial_rise_is_monotone(d in prop::sample::select(vec![3u32, 5, 7, 9]), tr in 1.0f64..100.0) {
            let e = env(EnvelopeShape::Polynomial { degree: d }, tr);
            let mut prev = 0.0;
            for k in 0..=2000 {
                let v = e.at(tr * k as f64 / 2000.0);
                prop_assert!(v >= prev - 1e-15);
                prev = v;
            }
        }

        #[test]
        fn full_pulses_are_symmetric(d in prop::sample::select(vec![1u32, 3, 5, 7, 9]), tr in 1.0f64..100.0, x in 0.0f64..1.0) {
            let total = 2.0 * tr;
            let t = x * total;
            for shape in [EnvelopeShape::Polynomial { degree: d }, EnvelopeShape::NestedCosine] {
                let e = env(shape, tr);
                prop_assert!((e.at(t) - e.at(total - t)).abs() < 1e-12);
            }
        }

        #[test]
        fn sampling_is_deterministic(tr in 5.0f64..60.0) {
            let e = env(EnvelopeShape::Polynomial { degree: 5 }, tr);
            let a = e.sample(tr / 100.0);
            let b = e.sample(tr / 200.0);
            for (k, v) in a.samples.iter().enumerate() {
                prop_assert!((v - b.samples[2 * k]).abs() <= 1e-12);
            }
        }
    }
}
