//! The `spinecho` command line: `simulate`, `process`, `peaks`, `compare`
//! and `lint`, each reading and writing files only.
//!
//! Exit status is 0 on success, 2 for unparsable input (command line, spin
//! system or pulse program), 3 for input that parses but is invalid
//! (including corrupt binary files) and 4 for I/O failures.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{self, PickParams};
use crate::engine::{EngineConfig, GradientMode};
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::processing::{self, io, Output, Quadrature, TransformParams, WindowAxis, WindowKind, WindowSpec};
use crate::pulseprog::{self, EventList, LintContext};
use crate::sequences::{self, AcquisitionParams, CheckpointCapture, ExperimentPlan, RunOptions};
use crate::spinsys::{self, SpinSystemSpec};

pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Names accepted by `--sequence` besides a path to a program file.
pub const BUILTIN_SEQUENCES: [&str; 3] = ["diagfree-cosy", "cosy", "inept"];

#[derive(Debug, Parser)]
#[command(name = "spinecho", version, about = "Diagonal-free COSY simulator", propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a 2D data set and write it as an FID file.
    Simulate(SimulateArgs),
    /// Apodize, Fourier transform and phase an FID file.
    Process(ProcessArgs),
    /// Pick and classify peaks of a spectrum.
    Peaks(PeaksArgs),
    /// Report diagonal suppression of a test spectrum against a reference.
    Compare(CompareArgs),
    /// Check a pulse program and print diagnostics.
    Lint(LintArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum QuadratureArg {
    States,
    Echoantiecho,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WindowArg {
    None,
    Sine,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AxisArg {
    Both,
    F1,
    F2,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Spin-system file.
    spins: PathBuf,
    /// Built-in sequence (diagfree-cosy, cosy, inept) or a pulse-program file.
    #[arg(long, default_value = "diagfree-cosy")]
    sequence: String,
    /// Output FID file.
    #[arg(short, long)]
    out: PathBuf,
    /// Also write checkpoint product-operator projections as TSV.
    #[arg(long)]
    checkpoints: Option<PathBuf>,
    #[arg(long, default_value_t = 700.0)]
    sw1: f64,
    #[arg(long, default_value_t = 700.0)]
    sw2: f64,
    /// t₁ acquisition time in seconds.
    #[arg(long, default_value_t = 0.09)]
    aq1: f64,
    /// t₂ acquisition time in seconds.
    #[arg(long, default_value_t = 0.25)]
    aq2: f64,
    #[arg(long, default_value_t = 2)]
    scans: usize,
    /// Half INEPT delay in seconds; default 1/(4·mean ¹J_CH).
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, value_enum, default_value_t = QuadratureArg::States)]
    quadrature: QuadratureArg,
    /// Number of gradient slices.
    #[arg(long, default_value_t = crate::engine::DEFAULT_SLICES)]
    slices: usize,
    /// Infinite-slice gradient model instead of explicit slices.
    #[arg(long, conflicts_with = "slices")]
    ideal_gradients: bool,
    /// Replace the receiver table by one following the selected pathway
    /// (for runs over the full eight-step cycle).
    #[arg(long)]
    pathway_receiver: bool,
    /// Accepted and ignored: the simulation starts in steady state.
    #[arg(long, default_value_t = 8)]
    dummy_scans: usize,
    /// Accepted and ignored: relaxation is not modelled.
    #[arg(long, default_value_t = 1.8)]
    recovery: f64,
    /// Worker threads (1 runs sequentially).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct ProcessArgs {
    fid: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = WindowArg::None)]
    window: WindowArg,
    #[arg(long, value_enum, default_value_t = AxisArg::Both)]
    window_axis: AxisArg,
    /// Exponential line broadening in Hz.
    #[arg(long, default_value_t = 0.0)]
    lb: f64,
    #[arg(long, default_value_t = 256)]
    zf1: usize,
    #[arg(long, default_value_t = 1024)]
    zf2: usize,
    /// Zero-order F₁ phase in degrees.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    ph0_f1: f64,
    /// First-order F₁ phase in degrees across the spectral width.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    ph1_f1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    ph0_f2: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    ph1_f2: f64,
    /// Choose both zero-order phases automatically (overrides --ph0-*).
    #[arg(long)]
    auto_phase: bool,
    #[arg(long)]
    magnitude: bool,
    /// Scale of the first point in each time dimension.
    #[arg(long, default_value_t = 0.5)]
    first_point: f64,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct PeaksArgs {
    spectrum: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
    /// Fraction of the largest |amplitude|.
    #[arg(long, default_value_t = 0.05)]
    threshold: f64,
    /// Half-width of the diagonal band in Hz (default: twice the coarser
    /// digital resolution).
    #[arg(long)]
    diag_tol: Option<f64>,
    /// Homonuclear coupling the multiplet analysis assumes, in Hz.
    #[arg(long, default_value_t = analysis::DEFAULT_J_HH_HZ)]
    jhh: f64,
    /// Multiplet grouping window in Hz (default 1.5·J).
    #[arg(long)]
    group_window: Option<f64>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    reference: PathBuf,
    test: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long)]
    diag_tol: Option<f64>,
}

#[derive(Debug, Args)]
struct LintArgs {
    program: PathBuf,
    /// One-bond coupling the delays should match, in Hz (repeatable).
    #[arg(long)]
    j1ch: Vec<f64>,
    #[arg(long)]
    scans: Option<usize>,
}

/// Maps an error to the documented exit status.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Syntax { .. } | Error::UnknownChannel(_) => EXIT_PARSE,
        Error::Io(_) => EXIT_IO,
        Error::Propagation { source, .. } => exit_code(source),
        Error::Validation(_) | Error::Format(_) | Error::ZeroNorm => EXIT_VALIDATION,
    }
}

/// Runs the command line and returns the process exit status. Diagnostics
/// go to stderr as a single line.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(&a),
        Command::Process(a) => process(&a),
        Command::Peaks(a) => peaks(&a),
        Command::Compare(a) => compare(&a),
        Command::Lint(a) => lint(&a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("spinecho: {e}");
            exit_code(&e)
        }
    }
}

/// Prefixes I/O errors with the file they concern.
fn at<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn read_text(path: &Path) -> Result<String> {
    at(path, fs::read_to_string(path).map_err(Error::from))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    at(path, fs::write(path, text).map_err(Error::from))
}

fn exec_for(threads: Option<usize>) -> Exec {
    if threads == Some(1) {
        Exec::Sequential
    } else {
        Exec::Parallel
    }
}

/// Runs `f` on a pool of `threads` workers when one is requested.
fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        Some(0) => Err(Error::validation("--threads must be at least 1")),
        #[cfg(feature = "parallel")]
        Some(n) if n > 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::validation(format!("thread pool: {e}")))?
            .install(f),
        _ => f(),
    }
}

/// Resolves a built-in sequence name or reads a program file.
pub fn resolve_sequence(arg: &str, spins: &SpinSystemSpec) -> Result<EventList> {
    let tau = sequences::tau_for(spins.mean_j1ch().unwrap_or(sequences::DEFAULT_J1CH_HZ));
    match arg {
        "diagfree-cosy" => Ok(sequences::build_diagonal_free_cosy(tau)),
        "cosy" => Ok(sequences::build_conventional_cosy()),
        "inept" => Ok(sequences::build_inept(tau)),
        _ => {
            let path = Path::new(arg);
            if !path.exists() && !arg.ends_with(".pp") {
                return Err(Error::validation(format!(
                    "unknown sequence `{arg}` (expected one of {} or a program file)",
                    BUILTIN_SEQUENCES.join(", ")
                )));
            }
            pulseprog::parse(&read_text(path)?)
        }
    }
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let spins = spinsys::parse_spin_system(&read_text(&a.spins)?)?;
    let mut program = resolve_sequence(&a.sequence, &spins)?;
    if a.pathway_receiver {
        program = sequences::with_receiver(program, &sequences::PATHWAY_RECEIVER);
    }
    let tau = a.tau.or_else(|| spins.mean_j1ch().map(sequences::tau_for));
    let params = AcquisitionParams {
        sw1_hz: a.sw1,
        sw2_hz: a.sw2,
        aq1_s: a.aq1,
        aq2_s: a.aq2,
        scans: a.scans,
        quadrature: match a.quadrature {
            QuadratureArg::States => Quadrature::States,
            QuadratureArg::Echoantiecho => Quadrature::EchoAntiecho,
        },
        dummy_scans: a.dummy_scans,
        recovery_s: a.recovery,
    };
    for (v, name) in [(a.sw1, "sw1"), (a.sw2, "sw2"), (a.aq1, "aq1"), (a.aq2, "aq2")] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::validation(format!("--{name} must be positive")));
        }
    }
    if a.slices == 0 {
        return Err(Error::validation("--slices must be at least 1"));
    }
    let plan = ExperimentPlan::new(program, tau, &params)?;
    let isotopomers = spinsys::enumerate_isotopomers(&spins);
    let config = EngineConfig {
        gradients: if a.ideal_gradients { GradientMode::Ideal } else { GradientMode::slices(a.slices) },
        ..Default::default()
    };
    let opts = RunOptions { exec: exec_for(a.threads), capture: a.checkpoints.is_some(), ..Default::default() };
    let experiment = with_threads(a.threads, || sequences::run_experiment(&plan, &isotopomers, config, opts))?;
    at(&a.out, io::save_fid(&a.out, &experiment.fid))?;
    if let Some(path) = &a.checkpoints {
        write_text(path, &checkpoint_table(&experiment.checkpoints))?;
    }
    Ok(())
}

/// Every captured checkpoint expanded in the product-operator basis, one
/// nonzero coefficient per line.
pub fn checkpoint_table(c: &CheckpointCapture) -> String {
    let mut out = String::from("increment\tcomponent\tscan\tisotopomer\tcheckpoint\toperator\tcoefficient\n");
    for key in c.keys() {
        let Some(basis) = c.basis(key.isotopomer) else { continue };
        for label in c.labels() {
            let Some(rho) = c.get(key, label) else { continue };
            for (op, v) in basis.expand(rho, 1e-12) {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{:.12e}",
                    key.increment,
                    key.component,
                    key.scan,
                    key.isotopomer,
                    label,
                    op.label(basis),
                    v
                );
            }
        }
    }
    out
}

fn process(a: &ProcessArgs) -> Result<()> {
    let fid = at(&a.fid, io::load_fid(&a.fid))?;
    let window = WindowSpec {
        kind: match a.window {
            WindowArg::None => WindowKind::None,
            WindowArg::Sine => WindowKind::SineUnshifted,
        },
        axis: match a.window_axis {
            AxisArg::Both => WindowAxis::Both,
            AxisArg::F1 => WindowAxis::F1,
            AxisArg::F2 => WindowAxis::F2,
        },
        lb_hz: a.lb,
    };
    if !(a.lb.is_finite() && a.lb >= 0.0) {
        return Err(Error::validation("--lb must be non-negative"));
    }
    let mut params = TransformParams {
        zf1: a.zf1,
        zf2: a.zf2,
        phase0_1: a.ph0_f1,
        phase1_1: a.ph1_f1,
        phase0_2: a.ph0_f2,
        phase1_2: a.ph1_f2,
        first_point: a.first_point,
        output: if a.magnitude { Output::Magnitude } else { Output::Real },
        exec: exec_for(a.threads),
    };
    let spectrum = with_threads(a.threads, || {
        let apodized = processing::apodize(&fid, &window);
        if a.auto_phase {
            let (p1, p2) = processing::auto_phase0(&apodized, &params)?;
            params.phase0_1 = p1;
            params.phase0_2 = p2;
        }
        let mut s = processing::transform(&apodized, &params)?;
        s.provenance.insert(0, ("window".into(), window.describe()));
        Ok(s)
    })?;
    at(&a.out, io::save_spectrum(&a.out, &spectrum))
}

fn peaks(a: &PeaksArgs) -> Result<()> {
    let params =
        PickParams { threshold: a.threshold, diag_tol_hz: a.diag_tol, j_hh_hz: a.jhh, group_window_hz: a.group_window };
    params.validate()?;
    let spectrum = at(&a.spectrum, io::load_spectrum(&a.spectrum))?;
    let table = analysis::pick_peaks(&spectrum, &params)?;
    for p in &table.peaks {
        if let Some(d) = &p.diagnostic {
            eprintln!("spinecho: peak at ({:.2}, {:.2}) Hz: {d}", p.f1_hz, p.f2_hz);
        }
    }
    write_text(&a.out, &table.to_tsv())
}

fn compare(a: &CompareArgs) -> Result<()> {
    let reference = at(&a.reference, io::load_spectrum(&a.reference))?;
    let test = at(&a.test, io::load_spectrum(&a.test))?;
    let report = analysis::compare(&reference, &test, a.diag_tol)?;
    write_text(&a.out, &report.to_string())
}

fn lint(a: &LintArgs) -> Result<()> {
    let name = a.program.display().to_string();
    let program = pulseprog::parse(&read_text(&a.program)?)?;
    let ctx = LintContext { j1ch_hz: a.j1ch.clone(), scans: a.scans };
    for d in pulseprog::lint(&program, &ctx) {
        println!("{}", d.render(&name));
    }
    Ok(())
}
