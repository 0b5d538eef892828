//! Steady ZZ rate against drive detuning: numerical slope beside the closed form.

use rip_gate::dynamics::{zz_sweep, SteadyOptions};
use rip_gate::DeviceConfig;

fn main() -> rip_gate::Result<()> {
    let device = DeviceConfig::preset("fsr1400")?.with_modes(1.4, 1);
    let detunings: Vec<f64> = (1..=10).map(|i| 0.03 * i as f64).collect();
    let opts = SteadyOptions { hold: 600.0, ..Default::default() };
    println!("{:>8} {:>12} {:>12} {:>12} {:>10}", "Δ/MHz", "ZZ num", "ZZ closed", "Γ/MHz", "n̄ peak");
    for p in zz_sweep(&device, &detunings, &opts) {
        match p.result {
            Some(r) => println!(
                "{:>8.0} {:>12.4} {:>12.4} {:>12.2e} {:>10.2}",
                p.detuning * 1e3,
                r.zz_rate_numeric,
                r.zz_rate_closed_form,
                r.dephasing_rate,
                r.max_mean_photon
            ),
            None => println!("{:>8.0} failed: {}", p.detuning * 1e3, p.error.unwrap_or_default()),
        }
    }
    Ok(())
}
