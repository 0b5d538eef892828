//! Samples each envelope family over a 100 ns gate and prints a coarse table.

use rip_gate::pulse::{polynomial_coefficients, Envelope, EnvelopeShape, EnvelopeSpec, REFERENCE_SLEPIAN};

fn main() -> rip_gate::Result<()> {
    for d in [3, 5, 7, 9] {
        println!("poly{d} coefficients {:?}", polynomial_coefficients(d)?);
    }
    let shapes = [
        EnvelopeShape::Polynomial { degree: 3 },
        EnvelopeShape::Polynomial { degree: 9 },
        EnvelopeShape::NestedCosine,
        EnvelopeShape::CosinePlatform { platform_ratio: 0.2 },
        EnvelopeShape::Slepian { lambda: REFERENCE_SLEPIAN.to_vec() },
    ];
    let envs: Vec<Envelope> = shapes.iter().map(|s| Envelope::new(&EnvelopeSpec::full(s.clone(), 100.0))).collect::<Result<_, _>>()?;
    print!("{:>6}", "t/ns");
    for s in &shapes {
        print!("{:>16}", s.name());
    }
    println!();
    for k in 0..=10 {
        let t = 10.0 * k as f64;
        print!("{t:>6.1}");
        for e in &envs {
            print!("{:>16.6}", e.at(t));
        }
        println!();
    }
    Ok(())
}
