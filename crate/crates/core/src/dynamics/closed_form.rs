//! Closed-form steady-state rates of the single-mode bus.
//!
//! Inputs are ordinary frequencies in GHz. Both expressions are homogeneous
//! of degree one, so the results are rates divided by 2π; they are returned
//! in MHz.

use crate::error::{Error, Result};

fn guard(value: f64, scale: f64, what: &str) -> Result<f64> {
    if value.abs() <= 1e-12 * scale {
        return Err(Error::Pole(format!("{what} vanishes")));
    }
    Ok(value)
}

fn denominators(chi: f64, delta: f64, g: f64) -> Result<(f64, f64)> {
    let scale = delta * delta + g * g + chi * chi;
    let bright = guard(9.0 * delta * delta - 18.0 * g * g - 6.0 * delta * chi + chi * chi, scale, "9Δ²−18g²−6Δχ̄+χ̄²")?;
    let dark = guard(2.0 * delta * delta - 3.0 * delta * chi + chi * chi, scale, "2Δ²−3Δχ̄+χ̄²")?;
    Ok((bright, dark))
}

/// Re dθ_ZZ/dt in MHz for drive ε, mean pull χ̄, detuning Δ and bus coupling g.
pub fn zz_rate_closed_form(eps: f64, chi: f64, delta: f64, g: f64) -> Result<f64> {
    if delta.abs() < 1e-12 {
        return Err(Error::Pole("Δ vanishes".into()));
    }
    let (bright, dark) = denominators(chi, delta, g)?;
    let pre = eps * eps * chi * chi / (4.0 * delta);
    Ok(pre * (9.0 / bright - 2.0 / dark) * 1e3)
}

/// Im dθ_ZZ/dt in MHz, first order in the decay rate κ.
pub fn dephasing_rate_closed_form(eps: f64, chi: f64, delta: f64, g: f64, kappa: f64) -> Result<f64> {
    if delta.abs() < 1e-12 {
        return Err(Error::Pole("Δ vanishes".into()));
    }
    let (bright, dark) = denominators(chi, delta, g)?;
    let pre = eps * eps * chi * chi * kappa / (4.0 * delta);
    let a = (4.0 * delta - 3.0 * chi) / (2.0 * dark * dark);
    let b = 27.0 * (3.0 * delta - chi) / (bright * bright);
    Ok(pre * (a - b) * 1e3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn anchor_value() {
        let z = zz_rate_closed_form(0.3, 0.01, 0.1, 0.1).unwrap();
        assert!((z.abs() - 4.74).abs() < 0.01, "{z}");
        // Independent evaluation of the bracket.
        let (e, c, d, g) = (0.3f64, 0.01f64, 0.1f64, 0.1f64);
        let b1 = 9.0 / (9.0 * d * d - 18.0 * g * g - 6.0 * d * c + c * c);
        let b2 = 2.0 / (2.0 * d * d - 3.0 * d * c + c * c);
        assert_relative_eq!(z, e * e * c * c / (4.0 * d) * (b1 - b2) * 1e3, max_relative = 1e-14);
    }

    #[test]
    fn trivial_zeros() {
        assert_eq!(zz_rate_closed_form(0.0, 0.01, 0.1, 0.1).unwrap(), 0.0);
        assert_eq!(zz_rate_closed_form(0.3, 0.0, 0.1, 0.1).unwrap(), 0.0);
        assert_eq!(dephasing_rate_closed_form(0.3, 0.01, 0.1, 0.1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn dephasing_is_linear_in_kappa() {
        let a = dephasing_rate_closed_form(0.3, 0.01, 0.1, 0.1, 1e-5).unwrap();
        let b = dephasing_rate_closed_form(0.3, 0.01, 0.1, 0.1, 2e-5).unwrap();
        assert_relative_eq!(b, 2.0 * a, max_relative = 1e-14);
        let (e, c, d, g, k) = (0.3f64, 0.01f64, 0.1f64, 0.1f64, 1e-5f64);
        let dark = 2.0 * d * d - 3.0 * d * c + c * c;
        let bright = 9.0 * d * d - 18.0 * g * g - 6.0 * d * c + c * c;
        let expect = e * e * c * c * k / (4.0 * d) * ((4.0 * d - 3.0 * c) / (2.0 * dark * dark) - 27.0 * (3.0 * d - c) / (bright * bright));
        assert_relative_eq!(a, expect * 1e3, max_relative = 1e-14);
    }

    #[test]
    fn poles_are_errors() {
        let g = 0.1;
        let delta = 2f64.sqrt() * g;
        assert!(matches!(zz_rate_closed_form(0.2, 0.0, delta, g), Err(Error::Pole(_))));
        assert!(matches!(zz_rate_closed_form(0.2, 0.01, 0.01, g), Err(Error::Pole(_))));
        assert!(zz_rate_closed_form(0.2, 0.01, 0.0, g).is_err());
    }
}
