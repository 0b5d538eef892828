//! Process tomography of the preset gate against CZ.
//! Arguments: resonator Fock levels (default 7), gate time in ns (default 180).

use rip_gate::pulse::EnvelopeSpec;
use rip_gate::quantum::{qpt_fidelity, HilbertSpec};
use rip_gate::DeviceConfig;

fn main() -> rip_gate::Result<()> {
    let mut args = std::env::args().skip(1);
    let levels = args.next().and_then(|a| a.parse().ok()).unwrap_or(7);
    let gate_time = args.next().and_then(|a| a.parse().ok()).unwrap_or(180.0);
    let base = DeviceConfig::preset("fsr1400")?;
    let device = base.clone().with_envelope(EnvelopeSpec::full(base.left_drive.envelope.shape.clone(), gate_time));
    let r = qpt_fidelity(&device, &HilbertSpec::uniform(3, levels), 0.01)?;
    println!("T = {gate_time} ns, {levels} resonator levels");
    println!("process fidelity {:.5} (uncorrected {:.5})", r.process_fidelity, r.process_fidelity_uncorrected);
    println!("average fidelity {:.5}", r.average_fidelity);
    println!("controlled phase {:.4} rad, virtual Z {:?}", r.controlled_phase, r.phase_corrections);
    println!("leakage {:.2e}, residual photons {:.2e}", r.leakage, r.residual_photons);
    Ok(())
}
