//! Prints the built-in presets with their derived dispersive quantities.

use rip_gate::device::{critical_photon, static_couplings, validate_regime};
use rip_gate::{DeviceConfig, Side};

fn main() -> rip_gate::Result<()> {
    for name in DeviceConfig::preset_names() {
        let d = DeviceConfig::preset(name)?;
        println!("{name}  (FSR {} GHz, mode {})", d.bus.fsr, d.bus.selected_mode);
        for side in Side::BOTH {
            let q = d.qubit(side);
            let g = d.qubit_drive_coupling(side);
            let n_crit = critical_photon(q.frequency - d.resonator(side).frequency, q.anharmonicity, g)?;
            println!(
                "  {side:?}: ω̃ = {:.5} GHz, χ = {:+.2} MHz, n_crit = {n_crit:.2}",
                d.dressed_qubit_frequency(side)?,
                d.dispersive_shift(side)? * 1e3
            );
        }
        let s = static_couplings(&d)?;
        println!("  static J_xx = {:.3e} GHz, ξ_zz = {:.3e} GHz", s.j_xx, s.xi_zz);
        let r = validate_regime(&d, 5.0, 3.0)?;
        println!("  dispersive regime {}", if r.passed { "ok" } else { "violated" });
    }
    Ok(())
}
