use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::hilbert::{BasisState, HilbertSpec};
use super::sparse::SparseOperator;
use crate::device::{dispersive_shift_state, DeviceConfig, ResonatorRole, ResonatorSpec, Side};
use crate::error::Result;
use crate::pulse::Envelope;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// Dispersive three-resonator model, qubits in their dressed frame.
    #[default]
    RotatingDispersive,
    /// Bare transmon ladders with explicit qubit–resonator exchange.
    LabExchange,
}

/// One drive tone: c(t) b† + c(t)* b with c(t) = ½ ε e^{iφ} s(t) e^{−i2πδt}.
#[derive(Debug, Clone)]
pub struct DriveChannel {
    pub side: Side,
    pub raise: SparseOperator,
    pub lower: SparseOperator,
    /// ½ ε e^{iφ} in GHz.
    pub amplitude: Complex64,
    /// Tone frequency minus the frame frequency, GHz.
    pub detuning: f64,
    pub envelope: Envelope,
}

impl DriveChannel {
    pub fn coefficient(&self, t: f64) -> Complex64 {
        let s = self.envelope.at(t);
        if s == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.amplitude * s * Complex64::from_polar(1.0, -2.0 * PI * self.detuning * t)
    }
}

/// H(t) = H0 + Σ_d [c_d(t) b_d† + h.c.] in GHz, frame at the left drive tone.
#[derive(Debug, Clone)]
pub struct DrivenHamiltonian {
    pub hilbert: HilbertSpec,
    pub frame: Frame,
    pub reference: f64,
    pub h0: SparseOperator,
    pub drives: Vec<DriveChannel>,
}

impl DrivenHamiltonian {
    pub fn dim(&self) -> usize {
        self.h0.dim
    }

    /// Longest drive in ns.
    pub fn duration(&self) -> f64 {
        self.drives.iter().map(|d| d.envelope.duration()).fold(0.0, f64::max)
    }

    /// Full operator at time `t`.
    pub fn at(&self, t: f64) -> SparseOperator {
        let one = Complex64::new(1.0, 0.0);
        let coeffs: Vec<Complex64> = self.drives.iter().map(|d| d.coefficient(t)).collect();
        let mut terms = vec![(one, &self.h0)];
        for (d, c) in self.drives.iter().zip(&coeffs) {
            terms.push((*c, &d.raise));
            terms.push((c.conj(), &d.lower));
        }
        SparseOperator::combine(self.dim(), &terms, true)
    }

    pub fn scale_drive(&mut self, s: f64) {
        for d in &mut self.drives {
            d.amplitude *= s;
        }
    }
}

/// (b†, b) for subsystem `k` in (left qubit, right qubit, left, center, right) order.
fn ladder(hilbert: &HilbertSpec, k: usize) -> (SparseOperator, SparseOperator) {
    let size = hilbert.sizes()[k];
    let raise = hilbert.states().enumerate().filter_map(|(i, s)| {
        let mut occ = s.occupations();
        let n = occ[k];
        (n + 1 < size).then(|| {
            occ[k] = n + 1;
            (hilbert.index(BasisState::from_occupations(occ)), i, Complex64::new(((n + 1) as f64).sqrt(), 0.0))
        })
    });
    let r = SparseOperator::from_triplets(hilbert.dimension(), raise.collect::<Vec<_>>(), false);
    let l = r.adjoint();
    (r, l)
}

fn raising_operators(h: &HilbertSpec) -> [(SparseOperator, SparseOperator); 5] {
    std::array::from_fn(|k| ladder(h, k))
}

fn exchange(a: &SparseOperator, b: &SparseOperator, g: f64) -> Vec<(usize, usize, Complex64)> {
    // g (a† b + b† a) from raising operators a†, b†.
    let ad_b = product(a, &b.adjoint());
    let mut out: Vec<_> = ad_b.triplets().map(|(r, c, v)| (r, c, v * g)).collect();
    out.extend(ad_b.adjoint().triplets().map(|(r, c, v)| (r, c, v * g)));
    out
}

fn product(a: &SparseOperator, b: &SparseOperator) -> SparseOperator {
    let bt: Vec<(usize, usize, Complex64)> = b.triplets().collect();
    let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); b.dim];
    for (r, c, v) in bt {
        rows[r].push((c, v));
    }
    SparseOperator::from_triplets(
        a.dim,
        a.triplets().flat_map(|(r, k, v)| rows[k].iter().map(move |&(c, w)| (r, c, v * w)).collect::<Vec<_>>()),
        false,
    )
}

/// Assembles the driven Hamiltonian of the two-qubit, three-resonator model
/// on the selected bus mode.
pub fn build_hamiltonian(device: &DeviceConfig, hilbert: &HilbertSpec, frame: Frame) -> Result<DrivenHamiltonian> {
    device.validate()?;
    hilbert.validate()?;
    let dim = hilbert.dimension();
    let reference = device.left_drive.frequency;
    let ops = raising_operators(hilbert);
    let center = ResonatorSpec { role: ResonatorRole::Center, frequency: device.center.frequency, decay_rate: 0.0 };
    let m0 = device.bus.selected_mode;
    let g_lc = device.drive_center_coupling(Side::Left, m0);
    let g_rc = device.drive_center_coupling(Side::Right, m0);

    let mut triplets: Vec<(usize, usize, Complex64)> = Vec::new();
    match frame {
        Frame::RotatingDispersive => {
            let pulls = |side: Side, p: &ResonatorSpec, g: f64| -> Result<Vec<f64>> {
                (0..hilbert.qubit_levels as u32)
                    .map(|n| if g == 0.0 { Ok(0.0) } else { dispersive_shift_state(n, device.qubit(side), p, g) })
                    .collect()
            };
            let pl = pulls(Side::Left, device.resonator(Side::Left), device.qubit_drive_coupling(Side::Left))?;
            let pr = pulls(Side::Right, device.resonator(Side::Right), device.qubit_drive_coupling(Side::Right))?;
            let cl = pulls(Side::Left, &center, device.qubit_center_coupling(Side::Left))?;
            let cr = pulls(Side::Right, &center, device.qubit_center_coupling(Side::Right))?;
            let nu_l = device.left_resonator.frequency - reference;
            let nu_r = device.right_resonator.frequency - reference;
            let nu_c = device.center.frequency - reference;
            let eta = [device.left_qubit.anharmonicity, device.right_qubit.anharmonicity];
            for (i, s) in hilbert.states().enumerate() {
                let (ql, qr) = (s.left_qubit, s.right_qubit);
                let mut e = (nu_l + pl[ql]) * s.left as f64
                    + (nu_r + pr[qr]) * s.right as f64
                    + (nu_c + cl[ql] + cr[qr]) * s.center as f64;
                for (q, eta) in [ql, qr].into_iter().zip(eta) {
                    if q >= 2 {
                        e += eta * (q * (q - 1) / 2) as f64;
                    }
                }
                triplets.push((i, i, Complex64::new(e, 0.0)));
            }
        }
        Frame::LabExchange => {
            let q = [&device.left_qubit, &device.right_qubit];
            let nu = [
                device.left_resonator.frequency - reference,
                device.center.frequency - reference,
                device.right_resonator.frequency - reference,
            ];
            for (i, s) in hilbert.states().enumerate() {
                let mut e = 0.0;
                for (n, spec) in [s.left_qubit, s.right_qubit].into_iter().zip(q) {
                    let n = n as f64;
                    e += n * (spec.frequency - reference) + spec.anharmonicity * n * (n - 1.0) / 2.0;
                }
                e += nu[0] * s.left as f64 + nu[1] * s.center as f64 + nu[2] * s.right as f64;
                triplets.push((i, i, Complex64::new(e, 0.0)));
            }
            triplets.extend(exchange(&ops[0].0, &ops[2].0, device.qubit_drive_coupling(Side::Left)));
            triplets.extend(exchange(&ops[1].0, &ops[4].0, device.qubit_drive_coupling(Side::Right)));
            triplets.extend(exchange(&ops[0].0, &ops[3].0, device.qubit_center_coupling(Side::Left)));
            triplets.extend(exchange(&ops[1].0, &ops[3].0, device.qubit_center_coupling(Side::Right)));
        }
    }
    triplets.extend(exchange(&ops[2].0, &ops[3].0, g_lc));
    triplets.extend(exchange(&ops[4].0, &ops[3].0, g_rc));
    let h0 = SparseOperator::from_triplets(dim, triplets, true);

    let [_, _, left, _, right] = ops;
    let drives = [(Side::Left, left), (Side::Right, right)]
        .into_iter()
        .map(|(side, (raise, lower))| {
            let d = device.drive(side);
            Ok(DriveChannel {
                side,
                raise,
                lower,
                amplitude: Complex64::from_polar(0.5 * d.amplitude, d.phase),
                detuning: d.frequency - reference,
                envelope: Envelope::new(&d.envelope)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DrivenHamiltonian { hilbert: *hilbert, frame, reference, h0, drives })
}
