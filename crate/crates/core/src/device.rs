//! Static device parameters for the two-qubit bus and the closed-form
//! algebra that only depends on them.
//!
//! Every frequency is an ordinary frequency in GHz. Conversion to angular
//! units happens inside the integrators.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};
use crate::pulse::{EnvelopeShape, EnvelopeSpec};

/// Smallest detuning (GHz) accepted in a denominator.
pub const DETUNING_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResonatorRole {
    LeftDrive,
    RightDrive,
    Center,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitSpec {
    pub label: Side,
    /// ω01/2π in GHz.
    pub frequency: f64,
    /// η/2π in GHz, negative for transmons.
    pub anharmonicity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonatorSpec {
    pub role: ResonatorRole,
    /// ν/2π in GHz. For the center role this is the selected bus mode.
    pub frequency: f64,
    /// κ/2π in GHz.
    #[serde(default)]
    pub decay_rate: f64,
}

/// Mode structure of the long-distance resonator. The selected mode
/// frequency is the `center` resonator frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongResonatorSpec {
    /// Free spectral range in GHz.
    pub fsr: f64,
    /// Harmonic index m of the selected mode. Sets the right-side coupling sign.
    pub selected_mode: i64,
    /// Number of retained modes M, centered on the selected one.
    pub mode_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingSpec {
    /// g^(l,l): left qubit to left drive resonator.
    pub qubit_drive_left: f64,
    /// g^(r,r): right qubit to right drive resonator.
    pub qubit_drive_right: f64,
    /// g^(l,c) to every retained bus mode.
    pub drive_center_left: f64,
    /// g^(r,c) magnitude for an even mode; multiplied by (-1)^m per mode.
    pub drive_center_right: f64,
    #[serde(default)]
    pub qubit_center_left: f64,
    #[serde(default)]
    pub qubit_center_right: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub target: Side,
    /// ω_d/2π in GHz.
    pub frequency: f64,
    /// Drive phase φ in radians.
    pub phase: f64,
    /// Peak amplitude ε/2π in GHz.
    pub amplitude: f64,
    pub envelope: EnvelopeSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset_name: Option<String>,
    pub left_qubit: QubitSpec,
    pub right_qubit: QubitSpec,
    pub left_resonator: ResonatorSpec,
    pub right_resonator: ResonatorSpec,
    pub center: ResonatorSpec,
    pub bus: LongResonatorSpec,
    pub coupling: CouplingSpec,
    pub left_drive: DriveSpec,
    pub right_drive: DriveSpec,
}

fn check_detuning(a: f64, b: f64) -> Result<f64> {
    let d = a - b;
    if d.abs() < DETUNING_EPS {
        return Err(Error::DegenerateDetuning { a, b, eps: DETUNING_EPS });
    }
    Ok(d)
}

/// ω̃ = ω + g²/(ω − ν).
pub fn dressed_qubit_frequency(q: &QubitSpec, p: &ResonatorSpec, g: f64) -> Result<f64> {
    let d = check_detuning(q.frequency, p.frequency)?;
    Ok(q.frequency + g * g / d)
}

/// Resonator pull χ_n with the qubit in level n. Valid for any level n ≥ 0.
pub fn dispersive_shift_state(n: u32, q: &QubitSpec, p: &ResonatorSpec, g: f64) -> Result<f64> {
    let (w, eta, nu) = (q.frequency, q.anharmonicity, p.frequency);
    let n = n as f64;
    let d1 = check_detuning(w + n * eta, nu)?;
    let d2 = check_detuning(w + (n - 1.0) * eta, nu)?;
    Ok(g * g * (eta - w + nu) / (d1 * d2))
}

/// χ = χ_1 − χ_0. Negative for a transmon below its resonator.
pub fn dispersive_shift(q: &QubitSpec, p: &ResonatorSpec, g: f64) -> Result<f64> {
    Ok(dispersive_shift_state(1, q, p, g)? - dispersive_shift_state(0, q, p, g)?)
}

/// n_crit = ((δ+η)²/4g² − 1)/3.
pub fn critical_photon(delta: f64, eta: f64, g: f64) -> Result<f64> {
    if g == 0.0 || !g.is_finite() {
        return Err(Error::Config("critical photon number needs g != 0".into()));
    }
    Ok(((delta + eta).powi(2) / (4.0 * g * g) - 1.0) / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticCouplings {
    /// J_xx^s in GHz.
    pub j_xx: f64,
    /// ξ_zz^s in GHz.
    pub xi_zz: f64,
    /// Set when left and right parameters differ and means were used.
    pub approximate: bool,
}

impl DeviceConfig {
    pub fn qubit(&self, side: Side) -> &QubitSpec {
        match side {
            Side::Left => &self.left_qubit,
            Side::Right => &self.right_qubit,
        }
    }

    pub fn resonator(&self, side: Side) -> &ResonatorSpec {
        match side {
            Side::Left => &self.left_resonator,
            Side::Right => &self.right_resonator,
        }
    }

    pub fn drive(&self, side: Side) -> &DriveSpec {
        match side {
            Side::Left => &self.left_drive,
            Side::Right => &self.right_drive,
        }
    }

    pub fn drive_mut(&mut self, side: Side) -> &mut DriveSpec {
        match side {
            Side::Left => &mut self.left_drive,
            Side::Right => &mut self.right_drive,
        }
    }

    pub fn qubit_drive_coupling(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.coupling.qubit_drive_left,
            Side::Right => self.coupling.qubit_drive_right,
        }
    }

    pub fn qubit_center_coupling(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.coupling.qubit_center_left,
            Side::Right => self.coupling.qubit_center_right,
        }
    }

    /// Signed drive-to-bus coupling for absolute mode index `mode`.
    pub fn drive_center_coupling(&self, side: Side, mode: i64) -> f64 {
        match side {
            Side::Left => self.coupling.drive_center_left,
            Side::Right => {
                if mode.rem_euclid(2) == 0 {
                    self.coupling.drive_center_right
                } else {
                    -self.coupling.drive_center_right
                }
            }
        }
    }

    /// Frequency of the bus mode at `offset` from the selected one.
    pub fn mode_frequency(&self, offset: i64) -> f64 {
        self.center.frequency + offset as f64 * self.bus.fsr
    }

    pub fn dispersive_shift(&self, side: Side) -> Result<f64> {
        dispersive_shift(self.qubit(side), self.resonator(side), self.qubit_drive_coupling(side))
    }

    /// Drive resonator frequency with its qubit in the ground state.
    pub fn dressed_resonator_frequency(&self, side: Side) -> Result<f64> {
        let p = self.resonator(side);
        Ok(p.frequency
            + dispersive_shift_state(0, self.qubit(side), p, self.qubit_drive_coupling(side))?)
    }

    pub fn dressed_qubit_frequency(&self, side: Side) -> Result<f64> {
        dressed_qubit_frequency(self.qubit(side), self.resonator(side), self.qubit_drive_coupling(side))
    }

    /// Δ of the selected bus mode relative to the left drive tone.
    pub fn drive_detuning(&self) -> f64 {
        self.center.frequency - self.left_drive.frequency
    }

    /// Retunes both drives to Δ below the selected bus mode.
    pub fn with_detuning(mut self, delta: f64) -> Self {
        let f = self.center.frequency - delta;
        self.left_drive.frequency = f;
        self.right_drive.frequency = f;
        self
    }

    /// Sets the peak amplitude of both drives.
    pub fn with_amplitude(mut self, eps: f64) -> Self {
        self.left_drive.amplitude = eps;
        self.right_drive.amplitude = eps;
        self
    }

    /// Sets the phase difference φ_r − φ_l, keeping φ_l.
    pub fn with_phase_difference(mut self, phi: f64) -> Self {
        self.right_drive.phase = (self.left_drive.phase + phi).rem_euclid(2.0 * PI);
        self
    }

    pub fn with_envelope(mut self, env: EnvelopeSpec) -> Self {
        self.left_drive.envelope = env.clone();
        self.right_drive.envelope = env;
        self
    }

    pub fn with_modes(mut self, fsr: f64, mode_count: usize) -> Self {
        self.bus.fsr = fsr;
        self.bus.mode_count = mode_count;
        self
    }

    /// Sets both drive-to-bus couplings to `g`, keeping signs.
    pub fn with_bus_coupling(mut self, g: f64) -> Self {
        self.coupling.drive_center_left = g.copysign(self.coupling.drive_center_left);
        self.coupling.drive_center_right = g.copysign(self.coupling.drive_center_right);
        self
    }

    /// Sets κ on both drive resonators and the bus.
    pub fn with_decay(mut self, kappa: f64) -> Self {
        self.left_resonator.decay_rate = kappa;
        self.right_resonator.decay_rate = kappa;
        self.center.decay_rate = kappa;
        self
    }

    /// Gate duration of the left drive envelope.
    pub fn gate_time(&self) -> f64 {
        self.left_drive.envelope.duration()
    }

    /// Phase difference that maximizes the entangling phase for the
    /// selected mode parity.
    pub fn optimal_phase_difference(&self) -> f64 {
        if self.bus.selected_mode.rem_euclid(2) == 0 {
            PI
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.left_qubit.label != Side::Left || self.right_qubit.label != Side::Right {
            return bad("qubit labels must be left and right".into());
        }
        if self.left_resonator.role != ResonatorRole::LeftDrive
            || self.right_resonator.role != ResonatorRole::RightDrive
            || self.center.role != ResonatorRole::Center
        {
            return bad("resonator roles must be left_drive, right_drive and center".into());
        }
        if self.left_drive.target != Side::Left || self.right_drive.target != Side::Right {
            return bad("drive targets must be left and right".into());
        }
        for q in [&self.left_qubit, &self.right_qubit] {
            let (w, eta) = (q.frequency, q.anharmonicity);
            if !(w > 0.0 && eta < 0.0 && eta.abs() < w) {
                return bad(format!("{:?} qubit needs ω > 0, η < 0 and |η| < ω", q.label));
            }
        }
        for r in [&self.left_resonator, &self.right_resonator, &self.center] {
            if !(r.frequency > 0.0 && r.decay_rate >= 0.0) {
                return bad(format!("{:?} resonator needs ν > 0 and κ ≥ 0", r.role));
            }
        }
        if !(self.bus.fsr > 0.0) || self.bus.mode_count == 0 {
            return bad("bus needs fsr > 0 and mode_count ≥ 1".into());
        }
        let c = &self.coupling;
        for (name, g) in [
            ("qubit_drive_left", c.qubit_drive_left),
            ("qubit_drive_right", c.qubit_drive_right),
            ("drive_center_left", c.drive_center_left),
            ("drive_center_right", c.drive_center_right),
            ("qubit_center_left", c.qubit_center_left),
            ("qubit_center_right", c.qubit_center_right),
        ] {
            if !g.is_finite() {
                return bad(format!("coupling {name} is not finite"));
            }
        }
        for d in [&self.left_drive, &self.right_drive] {
            if !(d.amplitude >= 0.0 && d.frequency.is_finite()) {
                return bad(format!("{:?} drive needs ε ≥ 0", d.target));
            }
            if !(0.0..2.0 * PI).contains(&d.phase) {
                return bad(format!("{:?} drive phase must lie in [0, 2π)", d.target));
            }
            d.envelope.validate()?;
        }
        for side in Side::BOTH {
            self.dispersive_shift(side)?;
        }
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: DeviceConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// A built-in preset by name.
    pub fn preset(name: &str) -> Result<Self> {
        PRESETS
            .iter()
            .find(|p| p.name == name)
            .map(PresetRow::build)
            .ok_or_else(|| Error::Config(format!("unknown preset '{name}'")))
    }

    pub fn preset_names() -> impl Iterator<Item = &'static str> {
        PRESETS.iter().map(|p| p.name)
    }
}

/// J_m^(q,c) for the bus mode at `offset` (GHz).
pub fn effective_xx_coupling(side: Side, offset: i64, device: &DeviceConfig) -> Result<f64> {
    let w = device.dressed_qubit_frequency(side)?;
    let nu = device.resonator(side).frequency;
    let nu_m = device.mode_frequency(offset);
    let g_qp = device.qubit_drive_coupling(side);
    let g_pc = device.drive_center_coupling(side, device.bus.selected_mode + offset);
    let a = check_detuning(w, nu)?;
    let b = check_detuning(nu_m, nu)?;
    let c = w + nu;
    let d = nu_m + nu;
    Ok(g_qp * g_pc / 2.0 * (1.0 / a + 1.0 / b - 1.0 / c - 1.0 / d))
}

/// J_xx^s = g1²g2²/(ω−ν)³ and ξ_zz^s = 12 (J_xx^s)²/(ω−ν).
pub fn static_couplings(device: &DeviceConfig) -> Result<StaticCouplings> {
    let c = &device.coupling;
    let g1 = 0.5 * (c.qubit_drive_left.abs() + c.qubit_drive_right.abs());
    let g2 = 0.5 * (c.drive_center_left.abs() + c.drive_center_right.abs());
    let dl = check_detuning(device.left_qubit.frequency, device.left_resonator.frequency)?;
    let dr = check_detuning(device.right_qubit.frequency, device.right_resonator.frequency)?;
    let d = 0.5 * (dl + dr);
    let approximate = c.qubit_drive_left.abs() != c.qubit_drive_right.abs()
        || c.drive_center_left.abs() != c.drive_center_right.abs()
        || dl != dr;
    let j_xx = g1 * g1 * g2 * g2 / d.powi(3);
    Ok(StaticCouplings { j_xx, xi_zz: 12.0 * j_xx * j_xx / d, approximate })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Warn,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeCheck {
    pub name: String,
    pub ratio: f64,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageFigure {
    pub side: Side,
    /// Offset of the bus mode nearest the dressed qubit.
    pub mode_offset: i64,
    pub coupling: f64,
    /// 2|J_m|/FSR.
    pub ratio: f64,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub warn_ratio: f64,
    pub fail_ratio: f64,
    pub checks: Vec<RegimeCheck>,
    pub leakage: Vec<LeakageFigure>,
    pub passed: bool,
}

/// Checks |ω − ν| ≫ g^(q,p) ≫ g^(p,c) with `warn_ratio`/`fail_ratio`
/// thresholds and reports the low-frequency leakage figure.
pub fn validate_regime(device: &DeviceConfig, warn_ratio: f64, fail_ratio: f64) -> Result<RegimeReport> {
    let status = |r: f64| {
        if r < fail_ratio {
            CheckStatus::Fail
        } else if r < warn_ratio {
            CheckStatus::Warn
        } else {
            CheckStatus::Pass
        }
    };
    let mut checks = Vec::new();
    let mut leakage = Vec::new();
    for side in Side::BOTH {
        let tag = match side {
            Side::Left => "left",
            Side::Right => "right",
        };
        let g_qp = device.qubit_drive_coupling(side).abs();
        let g_pc = device.drive_center_coupling(side, 0).abs();
        let det = (device.qubit(side).frequency - device.resonator(side).frequency).abs();
        let r1 = det / g_qp;
        let r2 = g_qp / g_pc;
        checks.push(RegimeCheck { name: format!("{tag}: |ω-ν|/g_qp"), ratio: r1, status: status(r1) });
        checks.push(RegimeCheck { name: format!("{tag}: g_qp/g_pc"), ratio: r2, status: status(r2) });

        let w = device.dressed_qubit_frequency(side)?;
        let k = ((w - device.center.frequency) / device.bus.fsr).round() as i64;
        let j = effective_xx_coupling(side, k, device)?;
        leakage.push(LeakageFigure {
            side,
            mode_offset: k,
            coupling: j,
            ratio: 2.0 * j.abs() / device.bus.fsr,
            target: 0.1,
        });
    }
    let passed = checks.iter().all(|c| c.status != CheckStatus::Fail);
    Ok(RegimeReport { warn_ratio, fail_ratio, checks, leakage, passed })
}

struct PresetRow {
    name: &'static str,
    fsr: f64,
    nu: [f64; 2],
    omega: [f64; 2],
    eta: f64,
    g: [f64; 3],
    degree: u32,
    delta: f64,
    eps: f64,
    gate_time: f64,
}

const PRESETS: [PresetRow; 4] = [
    PresetRow {
        name: "fsr1400",
        fsr: 1.40,
        nu: [6.9239, 6.9168],
        omega: [5.000, 4.800],
        eta: -0.280,
        g: [0.390, 0.428, 0.100],
        degree: 3,
        delta: 0.100,
        eps: 0.200,
        gate_time: 180.0,
    },
    PresetRow {
        name: "fsr500",
        fsr: 0.50,
        nu: [5.9808, 5.9820],
        omega: [5.250, 5.200],
        eta: -0.280,
        g: [0.120, 0.120, 0.080],
        degree: 3,
        delta: 0.070,
        eps: 0.280,
        gate_time: 205.0,
    },
    PresetRow {
        name: "fsr300",
        fsr: 0.30,
        nu: [5.9796, 5.9795],
        omega: [5.150, 5.155],
        eta: -0.280,
        g: [0.130, 0.130, 0.060],
        degree: 7,
        delta: 0.050,
        eps: 0.200,
        gate_time: 175.0,
    },
    PresetRow {
        name: "fsr200",
        fsr: 0.20,
        nu: [5.9854, 5.9853],
        omega: [5.300, 5.305],
        eta: -0.280,
        g: [0.100, 0.100, 0.050],
        degree: 9,
        delta: 0.040,
        eps: 0.200,
        gate_time: 165.0,
    },
];

/// Default number of retained bus modes.
pub const DEFAULT_MODE_COUNT: usize = 5;

impl PresetRow {
    fn build(&self) -> DeviceConfig {
        let qubit = |label, i: usize| QubitSpec { label, frequency: self.omega[i], anharmonicity: self.eta };
        let res = |role, i: usize| ResonatorSpec { role, frequency: self.nu[i], decay_rate: 0.0 };
        let (lq, rq) = (qubit(Side::Left, 0), qubit(Side::Right, 1));
        let (lr, rr) = (res(ResonatorRole::LeftDrive, 0), res(ResonatorRole::RightDrive, 1));
        // The bus mode sits at the mean ground-state-dressed drive frequency.
        let dressed = |q: &QubitSpec, r: &ResonatorSpec, g: f64| r.frequency + g * g / (r.frequency - q.frequency);
        let nu_c = 0.5 * (dressed(&lq, &lr, self.g[0]) + dressed(&rq, &rr, self.g[1]));
        let mode = (nu_c / self.fsr).round() as i64;
        let phase = if mode.rem_euclid(2) == 0 { PI } else { 0.0 };
        let envelope = EnvelopeSpec {
            shape: EnvelopeShape::Polynomial { degree: self.degree },
            rise_time: self.gate_time / 2.0,
            hold_time: 0.0,
        };
        let drive = |target, phase| DriveSpec {
            target,
            frequency: nu_c - self.delta,
            phase,
            amplitude: self.eps,
            envelope: envelope.clone(),
        };
        DeviceConfig {
            preset_name: Some(self.name.to_string()),
            left_qubit: lq,
            right_qubit: rq,
            left_resonator: lr,
            right_resonator: rr,
            center: ResonatorSpec { role: ResonatorRole::Center, frequency: nu_c, decay_rate: 0.0 },
            bus: LongResonatorSpec { fsr: self.fsr, selected_mode: mode, mode_count: DEFAULT_MODE_COUNT },
            coupling: CouplingSpec {
                qubit_drive_left: self.g[0],
                qubit_drive_right: self.g[1],
                drive_center_left: self.g[2],
                drive_center_right: self.g[2],
                qubit_center_left: 0.0,
                qubit_center_right: 0.0,
            },
            left_drive: drive(Side::Left, 0.0),
            right_drive: drive(Side::Right, phase),
        }
    }
}
