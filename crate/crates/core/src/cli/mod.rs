//! Command-line front end. Every computing subcommand writes CSV/JSON
//! artifacts plus a `<command>.manifest.json` that `replay` can rerun.

mod manifest;
mod output;

pub use manifest::RunManifest;
pub use output::{sha256_hex, ArtifactWriter, OutputFile};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::device::{validate_regime, DeviceConfig, Side};
use crate::dynamics::{self, SteadyOptions};
use crate::error::{Error, Result};
use crate::multimode;
use crate::optimizer::{self, ConstraintMode, DEConfig, OptimizationProblem};
use crate::pulse::{EnvelopeShape, EnvelopeSpec, REFERENCE_SLEPIAN};
use crate::quantum::{self, HilbertSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

const DEFAULT_PRESET: &str = "fsr1400";
const QUANTUM_DT: f64 = 0.01;
const PULSE_DT: f64 = 0.1;

#[derive(Debug, Parser)]
#[command(name = "ripgate", version, about = "Long-range resonator-induced-phase gate simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Built-in device preset.
    #[arg(long, global = true, conflicts_with = "config")]
    pub preset: Option<String>,
    /// TOML device file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "RIPGATE_OUT", default_value = "ripgate-out")]
    pub out: PathBuf,
    /// Integration step in ns.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Qubit and resonator Fock levels, as Q,R.
    #[arg(long, global = true, value_parser = parse_levels)]
    pub levels: Option<Levels>,
    /// Worker threads for grid evaluations.
    #[arg(long, global = true)]
    pub parallel: Option<usize>,
    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    pub dry_run: bool,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// Edits applied to the loaded device before anything runs.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct Overrides {
    /// Peak drive amplitude ε/2π in GHz.
    #[arg(long, global = true)]
    pub amplitude: Option<f64>,
    /// Drive detuning Δ/2π in GHz.
    #[arg(long, global = true)]
    pub detuning: Option<f64>,
    /// Gate time in ns.
    #[arg(long, global = true)]
    pub gate_time: Option<f64>,
    /// Envelope: polyD, nested_cosine, cosine_platform:R, flat, slepian[:l0,l1,..].
    #[arg(long, global = true, value_parser = parse_shape)]
    pub shape: Option<EnvelopeShape>,
    /// Free spectral range in GHz.
    #[arg(long, global = true)]
    pub fsr: Option<f64>,
    /// Retained bus modes.
    #[arg(long, global = true)]
    pub mode_count: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Levels {
    pub qubit: usize,
    pub resonator: usize,
}

fn parse_levels(s: &str) -> std::result::Result<Levels, String> {
    let (q, r) = s.split_once(',').ok_or("expected Q,R")?;
    let num = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("'{v}': {e}"));
    Ok(Levels { qubit: num(q)?, resonator: num(r)? })
}

pub fn parse_shape(s: &str) -> std::result::Result<EnvelopeShape, String> {
    let (head, arg) = match s.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (s, None),
    };
    let float = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("'{v}': {e}"));
    match (head, arg) {
        ("nested_cosine", None) => Ok(EnvelopeShape::NestedCosine),
        ("flat", None) => Ok(EnvelopeShape::Flat),
        ("cosine_platform", Some(a)) => Ok(EnvelopeShape::CosinePlatform { platform_ratio: float(a)? }),
        ("slepian", None) => Ok(EnvelopeShape::Slepian { lambda: REFERENCE_SLEPIAN.to_vec() }),
        ("slepian", Some(a)) => {
            Ok(EnvelopeShape::Slepian { lambda: a.split(',').map(float).collect::<std::result::Result<_, _>>()? })
        }
        (h, None) if h.starts_with("poly") => {
            let degree = h[4..].parse::<u32>().map_err(|e| format!("'{h}': {e}"))?;
            Ok(EnvelopeShape::Polynomial { degree })
        }
        _ => Err(format!("unknown envelope '{s}'")),
    }
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Built-in device presets.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
    /// Dispersive-regime report for the device.
    Validate {
        #[arg(long, default_value_t = 5.0)]
        warn_ratio: f64,
        #[arg(long, default_value_t = 3.0)]
        fail_ratio: f64,
    },
    /// Sampled drive envelope.
    Pulse,
    /// Steady ZZ and dephasing rates against drive detuning.
    ZzSweep {
        /// Detuning grid start, GHz.
        #[arg(long, default_value_t = 0.02)]
        from: f64,
        #[arg(long, default_value_t = 0.4)]
        to: f64,
        #[arg(long, default_value_t = 20)]
        points: usize,
        /// Ramp length of the flat-top probe pulse, ns.
        #[arg(long, default_value_t = 50.0)]
        rise: f64,
        #[arg(long, default_value_t = 1000.0)]
        hold: f64,
    },
    /// Residual photons over gate time and detuning.
    ResidualMap {
        /// Gate times in ns.
        #[arg(long, value_delimiter = ',', default_value = "60,80,100,120,140,160,180,200")]
        times: Vec<f64>,
        #[arg(long, default_value_t = 0.02)]
        from: f64,
        #[arg(long, default_value_t = 0.3)]
        to: f64,
        #[arg(long, default_value_t = 15)]
        points: usize,
    },
    /// Entangling phase against drive phase difference and coupling asymmetry.
    AsymmetrySweep {
        #[arg(long, default_value_t = 25)]
        phase_points: usize,
        #[arg(long, default_value_t = 9)]
        vartheta_points: usize,
    },
    /// Steady ZZ against free spectral range.
    ZzVsFsr {
        /// FSR values in GHz.
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.3,0.5,0.8,1.0,1.4")]
        fsr_values: Vec<f64>,
    },
    /// Steady ZZ as bus modes are added.
    ModeConvergence {
        #[arg(long, value_delimiter = ',', default_value = "1,3,5,7,9,11")]
        modes: Vec<usize>,
    },
    /// Differential-evolution search over Slepian coefficients.
    Optimize {
        #[arg(long, default_value_t = 7)]
        terms: usize,
        #[arg(long, default_value_t = 200)]
        generations: usize,
        #[arg(long)]
        population: Option<usize>,
        #[arg(long, default_value_t = 0.7)]
        mutation: f64,
        #[arg(long, default_value_t = 0.9)]
        crossover: f64,
        /// none, projection, or penalty:W.
        #[arg(long, default_value = "none", value_parser = parse_constraint)]
        constraint: ConstraintMode,
    },
    /// Residual photons of several envelope families against gate time.
    Shootout {
        #[arg(long, num_args = 1.., default_values = ["poly3", "poly9", "nested_cosine"], value_parser = parse_shape)]
        shapes: Vec<EnvelopeShape>,
        #[arg(long, value_delimiter = ',', default_value = "60,80,100,150,200,300")]
        times: Vec<f64>,
    },
    /// Full-quantum Ramsey measurement of the controlled phase.
    Calibrate {
        #[arg(long, default_value_t = 40)]
        samples: usize,
    },
    /// Full-quantum process tomography against CZ.
    Qpt,
    /// Rerun a manifest and compare artifact hashes.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetAction {
    /// Names and key parameters.
    List,
    /// The preset as TOML.
    Show { name: String },
}

fn parse_constraint(s: &str) -> std::result::Result<ConstraintMode, String> {
    match s.split_once(':') {
        None if s == "none" => Ok(ConstraintMode::None),
        None if s == "projection" => Ok(ConstraintMode::Projection),
        Some(("penalty", w)) => Ok(ConstraintMode::Penalty { weight: w.parse().map_err(|e| format!("'{w}': {e}"))? }),
        _ => Err(format!("unknown constraint '{s}'")),
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Presets { .. } => "presets",
            Command::Validate { .. } => "validate",
            Command::Pulse => "pulse",
            Command::ZzSweep { .. } => "zz-sweep",
            Command::ResidualMap { .. } => "residual-map",
            Command::AsymmetrySweep { .. } => "asymmetry-sweep",
            Command::ZzVsFsr { .. } => "zz-vs-fsr",
            Command::ModeConvergence { .. } => "mode-convergence",
            Command::Optimize { .. } => "optimize",
            Command::Shootout { .. } => "shootout",
            Command::Calibrate { .. } => "calibrate",
            Command::Qpt => "qpt",
            Command::Replay { .. } => "replay",
        }
    }
}

/// Everything besides the device that determines a run's artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Invocation {
    pub command: serde_json::Value,
    pub dt: Option<f64>,
    pub seed: Option<u64>,
    pub levels: Option<Levels>,
}

impl Invocation {
    fn command(&self) -> Result<Command> {
        Ok(serde_json::from_value(self.command.clone())?)
    }
}

/// Maps an error to the process exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        _ if e.is_config() => EXIT_CONFIG,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::TomlSer(_) => EXIT_FAILURE,
        _ => EXIT_NUMERICAL,
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match cli.common.parallel {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, &argv)),
            Err(e) => Err(Error::Config(format!("cannot build thread pool: {e}"))),
        },
        None => dispatch(&cli, &argv),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn load_device(common: &Common) -> Result<DeviceConfig> {
    let device = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            DeviceConfig::from_toml_str(&text)?
        }
        None => DeviceConfig::preset(common.preset.as_deref().unwrap_or(DEFAULT_PRESET))?,
    };
    apply_overrides(device, &common.overrides)
}

pub fn apply_overrides(mut d: DeviceConfig, o: &Overrides) -> Result<DeviceConfig> {
    if let Some(eps) = o.amplitude {
        d = d.with_amplitude(eps);
    }
    if let Some(delta) = o.detuning {
        d = d.with_detuning(delta);
    }
    if o.shape.is_some() || o.gate_time.is_some() {
        let shape = o.shape.clone().unwrap_or_else(|| d.left_drive.envelope.shape.clone());
        let total = o.gate_time.unwrap_or_else(|| d.gate_time());
        let probe = EnvelopeSpec::full(shape.clone(), total);
        // Keep the requested total when the shape carries a platform.
        let rise = total * probe.rise_time / probe.duration();
        d = d.with_envelope(EnvelopeSpec::new(shape, rise));
    }
    if o.fsr.is_some() || o.mode_count.is_some() {
        let (fsr, m) = (o.fsr.unwrap_or(d.bus.fsr), o.mode_count.unwrap_or(d.bus.mode_count));
        d = d.with_modes(fsr, m);
    }
    d.validate()?;
    Ok(d)
}

fn dispatch(cli: &Cli, argv: &[String]) -> Result<i32> {
    let common = &cli.common;
    match &cli.command {
        Command::Presets { action } => {
            presets(action)?;
            return Ok(EXIT_OK);
        }
        Command::Replay { manifest } => {
            let m = RunManifest::load(manifest)?;
            let inv = m.invocation.clone();
            if common.dry_run {
                print_dry_run(&inv, &m.config)?;
                return Ok(EXIT_OK);
            }
            let produced = execute(&inv, &m.config, &common.out, argv)?;
            let mut same = produced.len() == m.outputs.len();
            for o in &m.outputs {
                let now = produced.iter().find(|p| p.path == o.path);
                let ok = now.is_some_and(|p| p.sha256 == o.sha256);
                same &= ok;
                println!("{} {}", if ok { "MATCH " } else { "DIFFER" }, o.path);
            }
            return Ok(if same { EXIT_OK } else { EXIT_FAILURE });
        }
        _ => {}
    }
    let device = load_device(common)?;
    let inv = Invocation {
        command: serde_json::to_value(&cli.command)?,
        dt: common.dt,
        seed: common.seed,
        levels: common.levels,
    };
    if common.dry_run {
        print_dry_run(&inv, &device)?;
        return Ok(EXIT_OK);
    }
    execute(&inv, &device, &common.out, argv)?;
    Ok(EXIT_OK)
}

fn print_dry_run(inv: &Invocation, device: &DeviceConfig) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(inv)?);
    print!("{}", device.to_toml_string()?);
    Ok(())
}

fn presets(action: &PresetAction) -> Result<()> {
    match action {
        PresetAction::List => {
            println!("{:<8} {:>8} {:>10} {:>10} {:>9} {:>9} {:>8}", "name", "fsr/GHz", "χl/MHz", "χr/MHz", "ε/MHz", "Δ/MHz", "T/ns");
            for name in DeviceConfig::preset_names() {
                let d = DeviceConfig::preset(name)?;
                println!(
                    "{:<8} {:>8.3} {:>10.2} {:>10.2} {:>9.1} {:>9.1} {:>8.1}",
                    name,
                    d.bus.fsr,
                    d.dispersive_shift(Side::Left)? * 1e3,
                    d.dispersive_shift(Side::Right)? * 1e3,
                    d.left_drive.amplitude * 1e3,
                    d.drive_detuning() * 1e3,
                    d.gate_time()
                );
            }
        }
        PresetAction::Show { name } => print!("{}", DeviceConfig::preset(name)?.to_toml_string()?),
    }
    Ok(())
}

fn linspace(from: f64, to: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![from],
        _ => (0..n).map(|i| from + (to - from) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn hilbert(levels: Option<Levels>) -> Result<HilbertSpec> {
    let h = levels.map_or_else(HilbertSpec::default, |l| HilbertSpec::uniform(l.qubit, l.resonator));
    h.validate()?;
    Ok(h)
}

#[derive(Serialize)]
struct PulseRow {
    t_ns: f64,
    amplitude: f64,
}

#[derive(Serialize)]
struct ZzRow {
    detuning: f64,
    zz_rate_numeric: Option<f64>,
    zz_rate_closed_form: Option<f64>,
    dephasing_rate: Option<f64>,
    dephasing_closed_form: Option<f64>,
    residual_photons: Option<f64>,
    max_mean_photon: Option<f64>,
    n_crit_margin: Option<f64>,
    error: Option<String>,
}

#[derive(Serialize)]
struct TraceRow {
    generation: usize,
    best: f64,
}

/// Runs one computing command and writes its artifacts and manifest.
pub fn execute(inv: &Invocation, device: &DeviceConfig, out: &Path, argv: &[String]) -> Result<Vec<OutputFile>> {
    let command = inv.command()?;
    let name = command.name();
    let started = Instant::now();
    let mut w = ArtifactWriter::new(out, name)?;
    let coherent_dt = inv.dt.unwrap_or(dynamics::DEFAULT_DT);
    let mut seed = inv.seed;

    match &command {
        Command::Presets { .. } | Command::Replay { .. } => {
            return Err(Error::Config(format!("'{name}' does not produce artifacts")));
        }
        Command::Validate { warn_ratio, fail_ratio } => {
            let r = validate_regime(device, *warn_ratio, *fail_ratio)?;
            for c in &r.checks {
                println!("{:<40} ratio {:>8.2}  {:?}", c.name, c.ratio, c.status);
            }
            for l in &r.leakage {
                println!("2J/FSR ({:?}, mode {:+}) = {:.3} (target {:.2})", l.side, l.mode_offset, l.ratio, l.target);
            }
            println!("regime {}", if r.passed { "ok" } else { "violated" });
            w.json(".json", &r)?;
        }
        Command::Pulse => {
            let s = crate::pulse::Envelope::new(&device.left_drive.envelope)?.sample(inv.dt.unwrap_or(PULSE_DT));
            let rows: Vec<PulseRow> = s.times().zip(&s.samples).map(|(t_ns, &amplitude)| PulseRow { t_ns, amplitude }).collect();
            println!("{} samples over {} ns", rows.len(), device.gate_time());
            w.csv(".csv", &rows)?;
        }
        Command::ZzSweep { from, to, points, rise, hold } => {
            let opts = SteadyOptions { rise: *rise, hold: *hold, dt: coherent_dt };
            let pts = dynamics::zz_sweep(device, &linspace(*from, *to, *points), &opts);
            let rows: Vec<ZzRow> = pts
                .iter()
                .map(|p| {
                    let r = p.result.as_ref();
                    ZzRow {
                        detuning: p.detuning,
                        zz_rate_numeric: r.map(|r| r.zz_rate_numeric),
                        zz_rate_closed_form: r.map(|r| r.zz_rate_closed_form),
                        dephasing_rate: r.map(|r| r.dephasing_rate),
                        dephasing_closed_form: r.map(|r| r.dephasing_closed_form),
                        residual_photons: r.map(|r| r.residual_photons.iter().sum()),
                        max_mean_photon: r.map(|r| r.max_mean_photon),
                        n_crit_margin: r.map(|r| r.n_crit_margin),
                        error: p.error.clone(),
                    }
                })
                .collect();
            println!("{} detunings, {} failed", rows.len(), rows.iter().filter(|r| r.error.is_some()).count());
            w.csv(".csv", &rows)?;
            w.json(".json", &pts)?;
        }
        Command::ResidualMap { times, from, to, points } => {
            let shape = device.left_drive.envelope.shape.clone();
            let cells = dynamics::residual_photon_map(device, times, &linspace(*from, *to, *points), &shape, coherent_dt)?;
            println!("{} cells", cells.len());
            w.csv(".csv", &cells)?;
        }
        Command::AsymmetrySweep { phase_points, vartheta_points } => {
            let phases = linspace(0.0, 2.0 * PI, *phase_points);
            let n = *vartheta_points;
            let varthetas: Vec<f64> = (1..=n).map(|i| 0.5 * PI * i as f64 / (n + 1) as f64).collect();
            let pts = dynamics::drive_asymmetry_sweep(device, &phases, &varthetas, coherent_dt)?;
            println!("{} points", pts.len());
            w.csv(".csv", &pts)?;
        }
        Command::ZzVsFsr { fsr_values } => {
            let pts = multimode::zz_vs_fsr(device, fsr_values, device.bus.mode_count)?;
            for p in &pts {
                println!("fsr {:.3} GHz  ZZ {:.4} MHz  (single mode {:.4})", p.fsr, p.zz_multimode, p.zz_single);
            }
            w.csv(".csv", &pts)?;
        }
        Command::ModeConvergence { modes } => {
            let r = multimode::convergence_check(device, modes)?;
            for row in &r.rows {
                println!("M = {:>2}  ZZ {:.5} MHz  excluded/g {:.1}", row.mode_count, row.zz, row.excluded_over_g);
            }
            println!("rule {}", if r.rule_holds { "holds" } else { "violated" });
            w.csv(".csv", &r.rows)?;
            w.json(".json", &r)?;
        }
        Command::Optimize { terms, generations, population, mutation, crossover, constraint } => {
            let s = seed.unwrap_or(0);
            seed = Some(s);
            let mut problem = OptimizationProblem::slepian(device.clone(), device.gate_time(), *terms);
            problem.constraint = *constraint;
            if let Some(dt) = inv.dt {
                problem.final_dt = dt;
            }
            let de = DEConfig {
                population: *population,
                mutation: *mutation,
                crossover: *crossover,
                generations: *generations,
                seed: s,
            };
            let r = optimizer::optimize(&problem, &de)?;
            println!(
                "residual photons {:.3e}, θ = {:.4} rad after {} evaluations",
                r.residual_photons, r.theta, r.evaluations
            );
            let trace: Vec<TraceRow> = r.trace.iter().enumerate().map(|(generation, &best)| TraceRow { generation, best }).collect();
            w.json(".json", &r)?;
            w.csv("-trace.csv", &trace)?;
        }
        Command::Shootout { shapes, times } => {
            let problem = OptimizationProblem::slepian(device.clone(), device.gate_time(), 1);
            let rows = optimizer::envelope_shootout(&problem, shapes, times, coherent_dt)?;
            for r in &rows {
                println!("{:<16} T = {:>6.1} ns  residual {:.3e}", r.variant, r.gate_time, r.residual_photons);
            }
            w.csv(".csv", &rows)?;
        }
        Command::Calibrate { samples } => {
            let r = quantum::calibrate_controlled_phase(device, &hilbert(inv.levels)?, inv.dt.unwrap_or(QUANTUM_DT), *samples)?;
            println!(
                "controlled phase {:.5} rad at T = {} ns, leakage {:.2e}{}",
                r.controlled_phase,
                r.gate_time,
                r.leakage,
                if r.reliable { "" } else { " (unreliable)" }
            );
            w.json(".json", &r)?;
            w.csv("-ramsey.csv", &r.trace)?;
            w.csv("-fringe.csv", &r.fringe)?;
        }
        Command::Qpt => {
            let r = quantum::qpt_fidelity(device, &hilbert(inv.levels)?, inv.dt.unwrap_or(QUANTUM_DT))?;
            println!(
                "process fidelity {:.6} (average {:.6}), controlled phase {:.5} rad, leakage {:.2e}",
                r.process_fidelity, r.average_fidelity, r.controlled_phase, r.leakage
            );
            w.json(".json", &r)?;
        }
    }

    let dir = w.dir().to_path_buf();
    let outputs = w.finish();
    let manifest = RunManifest {
        command: name.to_string(),
        argv: argv.to_vec(),
        invocation: Invocation { seed, ..inv.clone() },
        config: device.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        outputs: outputs.clone(),
    };
    manifest.save(&dir)?;
    Ok(outputs)
}
