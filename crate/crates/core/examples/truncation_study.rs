//! Ramsey populations and controlled phase as the resonator truncation grows,
//! at a reduced drive so the smaller truncations stay meaningful.

use rip_gate::quantum::truncation_study;
use rip_gate::DeviceConfig;

fn main() -> rip_gate::Result<()> {
    let device = DeviceConfig::preset("fsr1400")?.with_amplitude(0.1);
    let detunings = [0.08, 0.1, 0.12];
    let r = truncation_study(&device, 2, &[4, 5, 6, 7], &detunings, 0.02, 10)?;
    for (n, phi) in r.levels.iter().zip(&r.controlled_phases) {
        println!("{n} levels: controlled phase {phi:.6} rad");
    }
    println!("population differences between successive truncations {:?}", r.differences);
    println!("converging: {}", r.converging);
    Ok(())
}
