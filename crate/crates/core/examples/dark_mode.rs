//! Balanced couplings and antiphase drives leave the bus mode empty for |00⟩
//! while the drive resonators fill up.

use std::f64::consts::PI;

use rip_gate::device::QubitSpec;
use rip_gate::dynamics::{integrate_amplitudes, CoherentSystem};
use rip_gate::pulse::{EnvelopeShape, EnvelopeSpec};
use rip_gate::{DeviceConfig, Side, StateLabel};

fn main() -> rip_gate::Result<()> {
    let mut d = DeviceConfig::preset("fsr200")?.with_modes(0.2, 1);
    d.right_qubit = QubitSpec { label: Side::Right, ..d.left_qubit.clone() };
    d.right_resonator.frequency = d.left_resonator.frequency;
    d.coupling.qubit_drive_right = d.coupling.qubit_drive_left;
    d.coupling.drive_center_right = d.coupling.drive_center_left;
    d.center.frequency = d.dressed_resonator_frequency(Side::Left)?;
    d.bus.selected_mode = 30;
    let d = d
        .with_detuning(0.04)
        .with_phase_difference(PI)
        .with_envelope(EnvelopeSpec::full(EnvelopeShape::NestedCosine, 200.0));

    let sys = CoherentSystem::new(&d)?;
    let traj = integrate_amplitudes(&sys, 200.0, 0.02)?;
    let bus = (0..traj.steps()).map(|k| traj.at(StateLabel::S00, k)[1].norm()).fold(0.0, f64::max);
    println!("peak |α_c| for |00⟩: {bus:.2e}");
    println!("peak drive-resonator photons: {:.2}", traj.peak_photons(0));
    for jk in StateLabel::ALL {
        let peak = (0..traj.steps()).map(|k| traj.at(jk, k)[1].norm_sqr()).fold(0.0, f64::max);
        println!("  {}: peak bus photons {peak:.3e}", jk.name());
    }
    Ok(())
}
