//! `ddgate` command-line front end.
//!
//! Frequencies on flags are ω/2π in kHz, times in μs and angles in degrees.
//! CSV output uses radians and μs. Exit codes: 0 success, 1 file or format
//! error, 2 usage error, 3 physics error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ddgate::coherence::{selectivity_scan, NSchedule, SpinRegister};
use ddgate::filter::{chi_integral, filter_table, SequenceSpec, SpectrumTable};
use ddgate::gate::{
    synth_options, synthesize_crx, synthesize_rx_unconditional, GateReport, SynthProtocol,
};
use ddgate::io::{self as csvio, ChiRow};
use ddgate::optimize::linspace;
use ddgate::resonance::{
    analytic_resonance, refine_resonance, seed_point, sweep, timing_robustness, RefineOptions,
    ResonanceKind, ResonancePoint, RobustnessTarget,
};
use ddgate::sequence::Protocol;
use ddgate::spin::{khz_to_rad, read_register, FieldConfig, HyperfineParams};
use ddgate::{DdError, Exec};

#[derive(Parser, Debug)]
#[command(
    name = "ddgate",
    version,
    about = "Dynamical-decoupling gates on electron-nuclear spin registers"
)]
struct Cli {
    /// Evaluate grids on one thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analytic and refined resonance times for orders k = 1..kmax.
    Resonance(ResonanceArgs),
    /// n0·n1, rotation angle and axis x-components over a grid of unit times.
    Sweep(SweepArgs),
    /// Electron coherence Px of a spin register over unit time.
    Selectivity(SelectivityArgs),
    /// Synthesize a conditional CRx or unconditional Rx nuclear gate.
    Synthesize(SynthesizeArgs),
    /// Filter functions of one or more sequences on an absolute frequency grid.
    Filter(FilterArgs),
    /// Coherence exponent chi(T) for a tabulated noise spectrum.
    Chi(ChiArgs),
    /// Dip shape n0·n1 against timing error around each resonance.
    Robustness(RobustnessArgs),
}

#[derive(Args, Debug, Clone)]
struct SpinArgs {
    /// Parallel hyperfine coupling A∥/2π (kHz).
    #[arg(long, allow_hyphen_values = true)]
    apar_khz: f64,
    /// Perpendicular hyperfine coupling A⊥/2π (kHz).
    #[arg(long)]
    aperp_khz: f64,
    /// Nuclear Larmor frequency ωL/2π (kHz).
    #[arg(long)]
    larmor_khz: f64,
}

impl SpinArgs {
    fn build(&self) -> ddgate::Result<(HyperfineParams, FieldConfig)> {
        Ok((
            HyperfineParams::from_khz("spin", self.apar_khz, self.aperp_khz)?,
            FieldConfig::from_khz(self.larmor_khz)?,
        ))
    }
}

#[derive(Args, Debug)]
struct ResonanceArgs {
    #[command(flatten)]
    spin: SpinArgs,
    /// cpmg, uddN or hybrid:Ncpmg:order:Nudd.
    #[arg(long, default_value = "cpmg")]
    protocol: Protocol,
    #[arg(long, default_value_t = 3)]
    kmax: u32,
    /// Conditional resonance set; 2 selects the second UDD4 set.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=2))]
    set: u32,
    /// Report unconditional x-rotation times instead.
    #[arg(long)]
    unconditional: bool,
    /// Also write the table as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    spin: SpinArgs,
    #[arg(long, default_value = "cpmg")]
    protocol: Protocol,
    /// Iterations of the unit (defaults to the smallest admissible count).
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    t_min_us: f64,
    #[arg(long)]
    t_max_us: f64,
    #[arg(long, default_value_t = 2001)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SelectivityArgs {
    /// CSV with header `label,apar_khz,aperp_khz`.
    #[arg(long)]
    register: PathBuf,
    #[arg(long, default_value_t = 314.0)]
    larmor_khz: f64,
    #[arg(long, default_value = "cpmg")]
    protocol: Protocol,
    /// Resonance order used for entangling and for the default time window.
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// Choose N so that this spin is maximally entangled at its resonance.
    #[arg(long, conflicts_with = "n")]
    entangle: Option<String>,
    /// Fixed iteration count.
    #[arg(long)]
    n: Option<u32>,
    /// Upper bound on N when entangling.
    #[arg(long, default_value_t = 200)]
    n_max: u32,
    #[arg(long, requires = "t_max_us")]
    t_min_us: Option<f64>,
    #[arg(long, requires = "t_min_us")]
    t_max_us: Option<f64>,
    #[arg(long, default_value_t = 2001)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GateTarget {
    Crx,
    Rx,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SynthFamily {
    Cpmg,
    Hybrid,
}

#[derive(Args, Debug)]
struct SynthesizeArgs {
    #[arg(
        long,
        allow_hyphen_values = true,
        required_unless_present = "grid_khz",
        conflicts_with = "grid_khz"
    )]
    apar_khz: Option<f64>,
    #[arg(
        long,
        required_unless_present = "grid_khz",
        conflicts_with = "grid_khz"
    )]
    aperp_khz: Option<f64>,
    #[arg(long)]
    larmor_khz: f64,
    /// Map over A∥ = A⊥-grid `MIN:MAX:POINTS` (kHz) instead of a single spin;
    /// writes one CSV row per (A∥, A⊥) cell.
    #[arg(long)]
    grid_khz: Option<String>,
    #[arg(long, value_enum, default_value = "crx")]
    target: GateTarget,
    #[arg(long, default_value_t = 90.0)]
    angle_deg: f64,
    #[arg(long, value_enum, default_value = "hybrid")]
    protocol: SynthFamily,
    #[arg(long, default_value_t = 4)]
    udd_order: u32,
    #[arg(long, default_value_t = 1)]
    k: u32,
    #[arg(long, default_value_t = 500)]
    n_cap: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FilterArgs {
    /// Sequences: cpmg:N, uddn:N, hybrid:Ncpmg:n:Nudd or fid. The quotient
    /// column is the second over the first.
    #[arg(long, num_args = 1.., required = true)]
    compare: Vec<SequenceSpec>,
    /// Total time of each sequence (μs), in the same order.
    #[arg(long, num_args = 1.., required = true)]
    t_us: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    wmin_khz: f64,
    #[arg(long)]
    wmax_khz: f64,
    #[arg(long, default_value_t = 2001)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ChiArgs {
    /// CSV with header `omega_over_2pi_khz,s_value`.
    #[arg(long)]
    spectrum: PathBuf,
    #[arg(long, num_args = 1.., required = true)]
    seq: Vec<SequenceSpec>,
    /// Total times (μs); every sequence is evaluated at each.
    #[arg(long, num_args = 1.., required = true)]
    t_us: Vec<f64>,
    /// Upper integration limit (defaults to the last tabulated frequency).
    #[arg(long)]
    wmax_khz: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RobustnessArgs {
    #[command(flatten)]
    spin: SpinArgs,
    /// Resonances to probe: cpmg, uddN or udd4:set2.
    #[arg(long, num_args = 1.., default_values_t = ["cpmg".to_string(), "udd4:set2".to_string()])]
    targets: Vec<String>,
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// Half-width of the timing-error window (ns).
    #[arg(long, default_value_t = 5.0)]
    half_width_ns: f64,
    #[arg(long, default_value_t = 401)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Lib(DdError),
}

impl From<DdError> for CliError {
    fn from(e: DdError) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Lib(DdError::from(e))
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::default()
    };
    let res = match &cli.cmd {
        Command::Resonance(a) => cmd_resonance(a, exec),
        Command::Sweep(a) => cmd_sweep(a, exec),
        Command::Selectivity(a) => cmd_selectivity(a, exec),
        Command::Synthesize(a) => cmd_synthesize(a, exec),
        Command::Filter(a) => cmd_filter(a, exec),
        Command::Chi(a) => cmd_chi(a, exec),
        Command::Robustness(a) => cmd_robustness(a, exec),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Lib(e)) if e.is_io() => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(CliError::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

/// CSV sink: the file named by `--out`, or stdout.
fn sink(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| DdError::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn open(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|e| CliError::Lib(DdError::Io(format!("{}: {e}", path.display()))))
}

fn refine_opts(exec: Exec) -> RefineOptions {
    RefineOptions {
        exec,
        ..RefineOptions::default()
    }
}

fn warn_weak(p: &HyperfineParams, f: &FieldConfig) {
    if f.is_weak_for(p) {
        eprintln!("warning: weak field (omega_L < 2 max(|A_par|, A_perp)); closed-form times are rough seeds only");
    }
}

fn cmd_resonance(a: &ResonanceArgs, exec: Exec) -> CliResult<()> {
    let (p, f) = a.spin.build()?;
    if a.kmax == 0 {
        return Err(CliError::Usage("--kmax must be at least 1".into()));
    }
    let kind = match (a.unconditional, a.set) {
        (true, 2) => {
            return Err(CliError::Usage(
                "--set 2 applies to conditional resonances only".into(),
            ))
        }
        (true, _) => ResonanceKind::Unconditional,
        (false, 2) if a.protocol != Protocol::Udd(4) => {
            return Err(CliError::Usage("--set 2 exists only for udd4".into()))
        }
        (false, 2) => ResonanceKind::Udd4Set2,
        (false, _) => ResonanceKind::Conditional,
    };
    if kind != ResonanceKind::Unconditional && p.a_perp == 0.0 {
        return Err(DdError::NoConditionalCoupling.into());
    }
    warn_weak(&p, &f);
    let opts = refine_opts(exec);
    let mut rows: Vec<ResonancePoint> = Vec::new();
    for k in 1..=a.kmax {
        let seed = match kind {
            ResonanceKind::Conditional => seed_point(a.protocol, k, &p, &f)?,
            _ => analytic_resonance(a.protocol, kind, k, &p, &f)?,
        };
        let pt = match refine_resonance(&seed, &p, &f, a.protocol.min_iterations(), &opts) {
            Ok(pt) => pt,
            Err(DdError::NoResonanceInWindow) => {
                eprintln!("warning: k={k}: no resonance within the refinement window");
                seed
            }
            Err(e) => return Err(e.into()),
        };
        rows.push(pt);
    }
    let mut out = io::stdout().lock();
    let col =
        |x: Option<f64>, scale: f64| x.map_or("-".to_string(), |v| format!("{:.6}", v * scale));
    writeln!(
        out,
        "{:>3}  {:>14}  {:>14}  {:>10}  {:>10}  {:>10}",
        "k", "t_analytic_us", "t_refined_us", "phi/pi", "phi_an/pi", "dot"
    )?;
    for r in &rows {
        writeln!(
            out,
            "{:>3}  {:>14.6}  {:>14}  {:>10}  {:>10}  {:>10}",
            r.order_k,
            r.t_analytic * 1e6,
            col(r.t_refined, 1e6),
            col(r.phi_refined, 1.0 / std::f64::consts::PI),
            col(r.phi_analytic, 1.0 / std::f64::consts::PI),
            col(r.dot_refined, 1.0),
        )?;
    }
    if let Some(path) = &a.out {
        csvio::write_resonances(sink(Some(path))?, &rows)?;
    }
    Ok(())
}

fn time_range(min_us: f64, max_us: f64) -> CliResult<(f64, f64)> {
    if !(min_us > 0.0 && max_us > min_us) {
        return Err(CliError::Usage("need 0 < --t-min-us < --t-max-us".into()));
    }
    Ok((min_us * 1e-6, max_us * 1e-6))
}

fn cmd_sweep(a: &SweepArgs, exec: Exec) -> CliResult<()> {
    let (p, f) = a.spin.build()?;
    let range = time_range(a.t_min_us, a.t_max_us)?;
    let n = a.n.unwrap_or_else(|| a.protocol.min_iterations());
    let rows = sweep(&p, &f, a.protocol, n, range, a.points, exec)?;
    csvio::write_sweep(sink(a.out.as_deref())?, &rows)?;
    Ok(())
}

fn cmd_selectivity(a: &SelectivityArgs, exec: Exec) -> CliResult<()> {
    let spins = read_register(open(&a.register)?)?;
    let reg = SpinRegister::new(spins, FieldConfig::from_khz(a.larmor_khz)?)?;
    let schedule = match (&a.entangle, a.n) {
        (Some(label), _) => NSchedule::EntangleMaximal {
            target: label.clone(),
            n_max: a.n_max,
        },
        (None, Some(n)) => NSchedule::Fixed(n),
        (None, None) => return Err(CliError::Usage("give --entangle <label> or --n <N>".into())),
    };
    let range = match (a.t_min_us, a.t_max_us) {
        (Some(lo), Some(hi)) => time_range(lo, hi)?,
        _ => {
            // span every spin's order-k resonance with 10% margin
            let seeds = reg
                .spins
                .iter()
                .map(|s| seed_point(a.protocol, a.k, s, &reg.field).map(|pt| pt.t_analytic))
                .collect::<ddgate::Result<Vec<_>>>()?;
            if seeds.is_empty() {
                return Err(CliError::Usage(
                    "empty register needs an explicit --t-min-us/--t-max-us".into(),
                ));
            }
            let lo = seeds.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = seeds.iter().copied().fold(0.0, f64::max);
            (0.9 * lo, 1.1 * hi)
        }
    };
    let curve = selectivity_scan(
        &reg,
        a.protocol,
        a.k,
        range,
        a.points,
        &schedule,
        &refine_opts(exec),
    )?;
    eprintln!(
        "N = {}{}",
        curve.iterations,
        curve.t_resonance.map_or(String::new(), |t| format!(
            ", resonance t = {:.6} us",
            t * 1e6
        ))
    );
    csvio::write_curve(sink(a.out.as_deref())?, &curve)?;
    Ok(())
}

fn parse_grid(s: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Usage(format!("bad --grid-khz `{s}`, expected MIN:MAX:POINTS"));
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err(bad());
    };
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi >= lo && n >= 1) {
        return Err(bad());
    }
    Ok(if n == 1 {
        vec![lo]
    } else {
        linspace(lo, hi, n)
    })
}

fn synth_one(
    a: &SynthesizeArgs,
    p: &HyperfineParams,
    f: &FieldConfig,
    exec: Exec,
) -> ddgate::Result<GateReport> {
    let mut opts = synth_options(exec);
    opts.k = a.k;
    opts.n_cap = a.n_cap;
    let target = a.angle_deg.to_radians();
    match a.target {
        GateTarget::Crx => {
            let proto = match a.protocol {
                SynthFamily::Cpmg => SynthProtocol::Cpmg,
                SynthFamily::Hybrid => SynthProtocol::Hybrid { order: a.udd_order },
            };
            synthesize_crx(p, f, proto, target, &opts)
        }
        GateTarget::Rx => synthesize_rx_unconditional(p, f, target, &opts),
    }
}

fn cmd_synthesize(a: &SynthesizeArgs, exec: Exec) -> CliResult<()> {
    if !(0.0..360.0).contains(&a.angle_deg) {
        return Err(CliError::Usage("--angle-deg must lie in [0, 360)".into()));
    }
    let f = FieldConfig::from_khz(a.larmor_khz)?;
    if let Some(spec) = &a.grid_khz {
        return synthesize_grid(a, &parse_grid(spec)?, &f, exec);
    }
    let (apar, aperp) = match (a.apar_khz, a.aperp_khz) {
        (Some(x), Some(y)) => (x, y),
        _ => {
            return Err(CliError::Usage(
                "give --apar-khz and --aperp-khz, or --grid-khz".into(),
            ))
        }
    };
    let p = HyperfineParams::from_khz("spin", apar, aperp)?;
    let report = synth_one(a, &p, &f, exec)?;
    if report.flags.weak_field {
        eprintln!("warning: weak field for this spin");
    }
    if report.flags.low_fidelity {
        eprintln!("warning: fidelity below 0.5");
    }
    if report.flags.n_cap_exceeded {
        eprintln!("warning: first-pass N exceeded --n-cap and was clipped");
    }
    print!("{}", report.kv_record());
    match &a.out {
        Some(path) => csvio::write_gates(sink(Some(path))?, std::slice::from_ref(&report))?,
        None => {
            println!();
            csvio::write_gates(io::stdout().lock(), std::slice::from_ref(&report))?;
        }
    }
    Ok(())
}

/// Fidelity, unit time and iteration maps. Cells whose synthesis fails are
/// written with `nan` and a count on stderr.
fn synthesize_grid(a: &SynthesizeArgs, axis: &[f64], f: &FieldConfig, exec: Exec) -> CliResult<()> {
    let cells: Vec<(f64, f64)> = axis
        .iter()
        .flat_map(|&x| axis.iter().map(move |&y| (x, y)))
        .collect();
    // parallelism goes over cells, each cell runs its own search sequentially
    let results = exec.map(&cells, |&(apar, aperp)| {
        HyperfineParams::from_khz("spin", apar, aperp)
            .and_then(|p| synth_one(a, &p, f, Exec::Sequential))
    });
    let failed = results.iter().filter(|r| r.is_err()).count();
    let rows: Vec<_> = cells
        .into_iter()
        .zip(results.into_iter().map(|r| r.ok()))
        .collect();
    csvio::write_gate_grid(sink(a.out.as_deref())?, &rows)?;
    if failed > 0 {
        eprintln!(
            "warning: synthesis failed in {failed} of {} cells",
            rows.len()
        );
    }
    Ok(())
}

fn cmd_filter(a: &FilterArgs, exec: Exec) -> CliResult<()> {
    if a.compare.len() != a.t_us.len() {
        return Err(CliError::Usage(format!(
            "--compare has {} sequences but --t-us has {} times",
            a.compare.len(),
            a.t_us.len()
        )));
    }
    if !(a.wmax_khz > a.wmin_khz && a.wmin_khz >= 0.0) || a.points < 2 {
        return Err(CliError::Usage(
            "need 0 <= --wmin-khz < --wmax-khz and --points >= 2".into(),
        ));
    }
    let entries: Vec<(SequenceSpec, f64)> = a
        .compare
        .iter()
        .cloned()
        .zip(a.t_us.iter().map(|t| t * 1e-6))
        .collect();
    let omegas: Vec<f64> = linspace(a.wmin_khz, a.wmax_khz, a.points)
        .into_iter()
        .map(khz_to_rad)
        .collect();
    let table = filter_table(&entries, &omegas, exec)?;
    csvio::write_filter(sink(a.out.as_deref())?, &table)?;
    Ok(())
}

fn cmd_chi(a: &ChiArgs, exec: Exec) -> CliResult<()> {
    let spectrum = SpectrumTable::read_csv(open(&a.spectrum)?)?;
    let wmax = match a.wmax_khz {
        Some(w) => khz_to_rad(w),
        None => *spectrum.omega().last().expect("validated non-empty"),
    };
    let mut rows = Vec::new();
    let mut coarse = false;
    for seq in &a.seq {
        for &t_us in &a.t_us {
            let r = chi_integral(&spectrum, seq, t_us * 1e-6, wmax, exec)?;
            coarse |= r.coarse_grid;
            rows.push(ChiRow {
                sequence: seq.to_string(),
                total_time: t_us * 1e-6,
                chi: r.chi,
                coherence: r.coherence,
                coarse_grid: r.coarse_grid,
            });
        }
    }
    if coarse {
        eprintln!("warning: spectrum grid has fewer than 50 points per decade");
    }
    csvio::write_chi(sink(a.out.as_deref())?, &rows)?;
    Ok(())
}

fn parse_target(s: &str, k: u32) -> CliResult<RobustnessTarget> {
    let (proto, kind) = match s.strip_suffix(":set2") {
        Some(p) => (p, ResonanceKind::Udd4Set2),
        None => (s, ResonanceKind::Conditional),
    };
    let protocol: Protocol = proto
        .parse()
        .map_err(|e: DdError| CliError::Usage(format!("bad target `{s}`: {e}")))?;
    if kind == ResonanceKind::Udd4Set2 && protocol != Protocol::Udd(4) {
        return Err(CliError::Usage(format!(
            "`{s}`: the second set exists only for udd4"
        )));
    }
    Ok(RobustnessTarget { protocol, kind, k })
}

fn cmd_robustness(a: &RobustnessArgs, exec: Exec) -> CliResult<()> {
    let (p, f) = a.spin.build()?;
    let targets = a
        .targets
        .iter()
        .map(|s| parse_target(s, a.k))
        .collect::<CliResult<Vec<_>>>()?;
    warn_weak(&p, &f);
    let curves = timing_robustness(
        &p,
        &f,
        &targets,
        a.half_width_ns * 1e-9,
        a.points,
        &refine_opts(exec),
    )?;
    for c in &curves {
        eprintln!(
            "{}: t = {:.6} us, FWHM = {:.4} ns",
            c.target,
            c.t_ref * 1e6,
            c.fwhm * 1e9
        );
    }
    csvio::write_robustness(sink(a.out.as_deref())?, &curves)?;
    Ok(())
}
