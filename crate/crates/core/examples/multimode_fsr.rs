//! Steady ZZ as the free spectral range shrinks, then the mode-convergence check.

use rip_gate::multimode::{convergence_check, zz_vs_fsr};
use rip_gate::DeviceConfig;

fn main() -> rip_gate::Result<()> {
    let device = DeviceConfig::preset("fsr1400")?;
    for p in zz_vs_fsr(&device, &[0.2, 0.3, 0.5, 0.8, 1.0, 1.4, 2.0], 5)? {
        println!("FSR {:.1} GHz: ZZ {:.3} MHz (single mode {:.3})", p.fsr, p.zz_multimode, p.zz_single);
    }

    let small = DeviceConfig::preset("fsr200")?;
    let r = convergence_check(&small, &[1, 3, 5, 7, 9, 11, 13])?;
    for row in &r.rows {
        let change = row.relative_change.map_or(String::from("-"), |c| format!("{:.2}%", 100.0 * c));
        println!("M = {:>2}: ZZ {:.4} MHz, change {change:>8}, excluded at {:.1} g", row.mode_count, row.zz, row.excluded_over_g);
    }
    println!("convergence rule {}", if r.rule_holds { "holds" } else { "violated" });
    Ok(())
}
