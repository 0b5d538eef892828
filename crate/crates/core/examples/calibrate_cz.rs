//! Controlled phase of the fsr1400 preset from the coherent model, an amplitude
//! calibrated to π, and the full-quantum Ramsey measurement.
//! The first argument sets the resonator Fock levels (default 9).

use std::f64::consts::PI;

use rip_gate::dynamics::simulate_gate;
use rip_gate::quantum::{calibrate_amplitude, calibrate_controlled_phase, HilbertSpec};
use rip_gate::DeviceConfig;

fn main() -> rip_gate::Result<()> {
    let levels = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(9);
    let device = DeviceConfig::preset("fsr1400")?;
    let coherent = simulate_gate(&device.clone().with_modes(device.bus.fsr, 1), 0.02)?;
    println!("coherent Re θ = {:.4} rad, residual photons {:.2e}", coherent.theta.0, coherent.residual_photons);

    let cal = calibrate_amplitude(&device, PI, None)?;
    println!("ε/2π for |θ| = π: {:.2} MHz ({} iterations)", cal.amplitude * 1e3, cal.iterations);

    let hs = HilbertSpec::uniform(3, levels);
    let r = calibrate_controlled_phase(&device, &hs, 0.01, 20)?;
    println!("full-quantum controlled phase {:.4} rad, leakage {:.2e}, reliable {}", r.controlled_phase, r.leakage, r.reliable);
    for p in &r.trace {
        println!("  t = {:>6.1} ns  P+(c0) = {:.3}  P+(c1) = {:.3}  φ = {:+.4}", p.time, p.p_plus_c0, p.p_plus_c1, p.controlled_phase);
    }
    Ok(())
}
