//! Seeded differential evolution over seven Slepian coefficients at T = 100 ns.
//! Pass a generation count as the first argument (default 60).

use rip_gate::optimizer::{optimize, DEConfig, OptimizationProblem};
use rip_gate::DeviceConfig;

fn main() -> rip_gate::Result<()> {
    let generations = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(60);
    let problem = OptimizationProblem::slepian(DeviceConfig::preset("fsr200")?, 100.0, 7);
    let de = DEConfig { generations, seed: 7, ..Default::default() };
    let r = optimize(&problem, &de)?;
    println!("λ = {:?}", r.best.iter().map(|x| (x * 1e4).round() / 1e4).collect::<Vec<_>>());
    println!("residual photons {:.3e}, Re θ = {:.4} rad", r.residual_photons, r.theta);
    println!("{} evaluations; best objective by generation:", r.evaluations);
    for (g, v) in r.trace.iter().enumerate().step_by((generations / 10).max(1)) {
        println!("  {g:>4} {v:.4e}");
    }
    Ok(())
}
