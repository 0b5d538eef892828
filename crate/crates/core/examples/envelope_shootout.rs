//! Residual photons of low- and high-degree polynomial rises against gate time.

use rip_gate::optimizer::{envelope_shootout, OptimizationProblem};
use rip_gate::pulse::EnvelopeShape;
use rip_gate::DeviceConfig;

fn main() -> rip_gate::Result<()> {
    let problem = OptimizationProblem::slepian(DeviceConfig::preset("fsr200")?, 100.0, 1);
    let shapes = [
        EnvelopeShape::Polynomial { degree: 3 },
        EnvelopeShape::Polynomial { degree: 9 },
        EnvelopeShape::NestedCosine,
    ];
    let times = [40.0, 60.0, 80.0, 100.0, 150.0, 200.0, 300.0];
    let rows = envelope_shootout(&problem, &shapes, &times, 0.02)?;
    for &t in &times {
        print!("T = {t:>5.0} ns");
        for r in rows.iter().filter(|r| r.gate_time == t) {
            print!("  {}: {:.2e}", r.variant, r.residual_photons);
        }
        println!();
    }
    Ok(())
}
