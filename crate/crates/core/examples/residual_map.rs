//! Worst-state residual photons over gate time and detuning, written as CSV.

use rip_gate::dynamics::residual_photon_map;
use rip_gate::pulse::EnvelopeShape;
use rip_gate::DeviceConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let device = DeviceConfig::preset("fsr300")?;
    let times: Vec<f64> = (0..8).map(|i| 60.0 + 20.0 * i as f64).collect();
    let detunings: Vec<f64> = (0..12).map(|i| 0.02 + 0.02 * i as f64).collect();
    let cells = residual_photon_map(&device, &times, &detunings, &EnvelopeShape::NestedCosine, 0.02)?;
    let mut w = csv::Writer::from_writer(std::io::stdout());
    for c in &cells {
        w.serialize(c)?;
    }
    w.flush()?;
    Ok(())
}
