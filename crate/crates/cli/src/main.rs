//! `frozen-spectrum`: forward and inverse spectral computations from the
//! command line. Every JSON output carries the schema tag and the resolved
//! configuration; the thread count is left out so that it cannot change a
//! single byte.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use frozen_spectrum::basis::compute_z;
use frozen_spectrum::characterization::{check_conditions, fit_asymptotics, CheckOptions};
use frozen_spectrum::forward::compute_spectrum;
use frozen_spectrum::inverse::{l2_errors, recover_potential, InverseOptions, UniquenessReport, Verdict};
use frozen_spectrum::io::{read_json, to_json, Envelope, GeometryFile, PotentialFile, SpectrumFile};
use frozen_spectrum::oracle::{fd_spectrum, FdMesh};
use frozen_spectrum::seq::L2Criterion;
use frozen_spectrum::{Error, Geometry, Potential, Spectrum};

const EXIT_DOMAIN: u8 = 1;
const EXIT_NUMERIC: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "frozen-spectrum", version, about = "Spectral problems for Sturm-Liouville operators with frozen argument")]
struct Cli {
    /// Worker threads; 0 picks the number of cores.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of smallest modulus for a potential.
    Forward(ForwardArgs),
    /// Recover the potential from a spectrum.
    Inverse(InverseArgs),
    /// Forward spectrum, recovery, and L² errors against the input.
    Roundtrip(RoundtripArgs),
    /// Zeros z_n of c2(z²) and their residuals.
    Zeros(ZerosArgs),
    /// Test a candidate spectrum against the solvability conditions (l = γ).
    Check(CheckArgs),
    /// Finite-difference reference eigenvalues.
    Oracle(OracleArgs),
    /// CSV data for plotting.
    Plotdata(PlotArgs),
}

#[derive(Args, Serialize)]
struct ForwardArgs {
    #[arg(long)]
    potential: PathBuf,
    #[arg(long)]
    geometry: PathBuf,
    #[arg(short = 'N', default_value_t = 100)]
    n: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct InverseArgs {
    #[arg(long)]
    spectrum: PathBuf,
    #[arg(long)]
    geometry: PathBuf,
    #[arg(short = 'N', default_value_t = 200)]
    n: usize,
    /// Samples per segment of the recovered potential.
    #[arg(long, default_value_t = 513)]
    grid: usize,
    /// Proceed when no uniqueness restriction is known to hold.
    #[arg(long)]
    force: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct RoundtripArgs {
    #[arg(long)]
    potential: PathBuf,
    #[arg(long)]
    geometry: PathBuf,
    #[arg(short = 'N', default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 513)]
    grid: usize,
    #[arg(long)]
    force: bool,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ZerosArgs {
    #[arg(long)]
    geometry: PathBuf,
    #[arg(short = 'N', default_value_t = 50)]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct CheckArgs {
    #[arg(long)]
    spectrum: PathBuf,
    #[arg(long)]
    geometry: PathBuf,
    /// Potential whose boundary values the fitted constants are compared with.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Required decay ratio of the last to the second quarter mean square.
    #[arg(long, default_value_t = L2Criterion::default().ratio)]
    l2_ratio: f64,
    /// Absolute ℓ₂ noise floor below which a tail passes.
    #[arg(long, default_value_t = L2Criterion::default().floor)]
    l2_floor: f64,
    #[arg(long, default_value_t = CheckOptions::default().cross_tol)]
    cross_tol: f64,
    #[arg(long, default_value_t = CheckOptions::default().tol_c)]
    tol_c: f64,
    #[arg(long, default_value_t = CheckOptions::default().points)]
    points: usize,
    #[arg(long, default_value_t = CheckOptions::default().reference_tol)]
    reference_tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CheckArgs {
    fn options(&self) -> CheckOptions {
        CheckOptions {
            l2: L2Criterion { ratio: self.l2_ratio, floor: self.l2_floor },
            cross_tol: self.cross_tol,
            tol_c: self.tol_c,
            points: self.points,
            reference_tol: self.reference_tol,
        }
    }
}

#[derive(Args, Serialize)]
struct OracleArgs {
    #[arg(long)]
    potential: PathBuf,
    #[arg(long)]
    geometry: PathBuf,
    #[arg(long, default_value_t = 1e-3)]
    h: f64,
    #[arg(short = 'N', default_value_t = 10)]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum PlotKind {
    /// segment, t, q_true, q_recovered
    Potential,
    /// n, rho_n, asymptotic_residual (needs l = γ)
    Asymptotics,
}

#[derive(Args, Serialize)]
struct PlotArgs {
    #[arg(long, value_enum)]
    kind: PlotKind,
    #[arg(long)]
    geometry: PathBuf,
    /// True potential (kind = potential).
    #[arg(long, required_if_eq("kind", "potential"))]
    potential: Option<PathBuf>,
    /// Recovered potential (kind = potential).
    #[arg(long, required_if_eq("kind", "potential"))]
    recovered: Option<PathBuf>,
    /// Spectrum file (kind = asymptotics).
    #[arg(long, required_if_eq("kind", "asymptotics"))]
    spectrum: Option<PathBuf>,
    /// Rows per segment (kind = potential).
    #[arg(long, default_value_t = 201)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

type Result<T> = std::result::Result<T, Error>;

fn geometry(path: &Path) -> Result<Geometry> {
    read_json::<GeometryFile>(path)?.to_geometry()
}

fn potential(path: &Path, geom: &Geometry) -> Result<Potential> {
    read_json::<PotentialFile>(path)?.to_potential(geom)
}

fn spectrum(path: &Path) -> Result<(Spectrum, GeometryFile)> {
    let f: SpectrumFile = read_json(path)?;
    Ok((f.to_spectrum()?, f.geometry))
}

/// The spectrum must describe the geometry it is paired with.
fn same_geometry(file: &GeometryFile, geom: &Geometry) -> Result<()> {
    let g = file.to_geometry()?;
    let near = |x: f64, y: f64| (x - y).abs() <= 1e-12 * y.abs();
    if near(g.gamma, geom.gamma) && near(g.d, geom.d) && near(g.l, geom.l) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "spectrum was computed for (γ, d, l) = ({}, {}, {}), geometry is ({}, {}, {})",
            g.gamma, g.d, g.l, geom.gamma, geom.d, geom.l
        )))
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn json<C: Serialize, P: Serialize>(out: Option<&Path>, command: &str, config: &C, payload: P) -> Result<()> {
    emit(out, &to_json(&Envelope::new(command, config, payload))?)
}

fn forward(args: &ForwardArgs) -> Result<()> {
    let geom = geometry(&args.geometry)?;
    let q = potential(&args.potential, &geom)?;
    let spec = compute_spectrum(&q, &geom, args.n)?;
    json(args.out.as_deref(), "forward", args, SpectrumFile::new(&geom, &spec))
}

fn uniqueness_warning(u: &UniquenessReport) -> Option<String> {
    (u.overall != Verdict::Pass)
        .then(|| format!("uniqueness is {:?}; the recovered potential may not be the only one", u.overall))
}

#[derive(Serialize)]
struct InverseOut<'a> {
    #[serde(flatten)]
    potential: PotentialFile,
    uniqueness: &'a UniquenessReport,
    warnings: Vec<String>,
}

fn inverse(args: &InverseArgs) -> Result<()> {
    let geom = geometry(&args.geometry)?;
    let (spec, g) = spectrum(&args.spectrum)?;
    same_geometry(&g, &geom)?;
    let rec = recover_potential(&spec, &geom, args.n, &InverseOptions { force: args.force, grid: args.grid })?;
    let warnings: Vec<String> = uniqueness_warning(&rec.uniqueness).into_iter().collect();
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let potential = PotentialFile::from_grids(&geom, &rec.left, &rec.right, rec.potential.q_at_gamma);
    json(args.out.as_deref(), "inverse", args, InverseOut { potential, uniqueness: &rec.uniqueness, warnings })
}

#[derive(Serialize)]
struct RoundtripOut<'a> {
    geometry: GeometryFile,
    eigenvalues: usize,
    l2_error_left: f64,
    l2_error_right: f64,
    uniqueness: &'a UniquenessReport,
    warnings: Vec<String>,
}

fn roundtrip(args: &RoundtripArgs) -> Result<()> {
    let geom = geometry(&args.geometry)?;
    let q = potential(&args.potential, &geom)?;
    let spec = compute_spectrum(&q, &geom, args.n)?;
    let rec = recover_potential(&spec, &geom, args.n, &InverseOptions { force: args.force, grid: args.grid })?;
    let (left, right) = l2_errors(&q, &rec.potential, &geom);
    let warnings: Vec<String> = uniqueness_warning(&rec.uniqueness).into_iter().collect();
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let out = RoundtripOut {
        geometry: (&geom).into(),
        eigenvalues: spec.len(),
        l2_error_left: left,
        l2_error_right: right,
        uniqueness: &rec.uniqueness,
        warnings,
    };
    json(args.report.as_deref(), "roundtrip", args, out)
}

#[derive(Serialize)]
struct ZerosOut {
    geometry: GeometryFile,
    z: Vec<f64>,
    residuals: Vec<f64>,
    diagnostics: Vec<String>,
}

fn zeros(args: &ZerosArgs) -> Result<()> {
    let geom = geometry(&args.geometry)?;
    let z = compute_z(&geom, args.n)?;
    let out = ZerosOut { geometry: (&geom).into(), z: z.z, residuals: z.residuals, diagnostics: z.diagnostics };
    json(args.out.as_deref(), "zeros", args, out)
}

#[derive(Serialize)]
struct CheckConfig<'a> {
    #[serde(flatten)]
    args: &'a CheckArgs,
    resolved: CheckOptions,
}

/// Returns the verdict's `overall`.
fn check(args: &CheckArgs) -> Result<bool> {
    let geom = geometry(&args.geometry)?;
    let (spec, g) = spectrum(&args.spectrum)?;
    same_geometry(&g, &geom)?;
    let reference = match &args.reference {
        Some(p) => Some(frozen_spectrum::characterization::ReferenceValues::from_potential(&potential(p, &geom)?, &geom)),
        None => None,
    };
    let opts = args.options();
    let verdict = check_conditions(&spec, &geom, &opts, reference.as_ref())?;
    let overall = verdict.overall;
    #[derive(Serialize)]
    struct Out<T> {
        geometry: GeometryFile,
        verdict: T,
    }
    let config = CheckConfig { args, resolved: opts };
    json(args.out.as_deref(), "check", &config, Out { geometry: (&geom).into(), verdict })?;
    Ok(overall)
}

#[derive(Serialize)]
struct OracleOut {
    #[serde(flatten)]
    spectrum: SpectrumFile,
    mesh_steps: [usize; 2],
    dimension: usize,
}

fn oracle(args: &OracleArgs) -> Result<()> {
    let geom = geometry(&args.geometry)?;
    let q = potential(&args.potential, &geom)?;
    let mesh = FdMesh::new(&geom, args.h)?;
    let spec = fd_spectrum(&q, &geom, args.h, args.n)?;
    let out = OracleOut { spectrum: SpectrumFile::new(&geom, &spec), mesh_steps: [mesh.p, mesh.q], dimension: mesh.dim() };
    json(args.out.as_deref(), "oracle", args, out)
}

fn e17(x: f64) -> String {
    format!("{x:.16e}")
}

fn plotdata(args: &PlotArgs) -> Result<()> {
    let geom = geometry(&args.geometry)?;
    let mut csv = String::new();
    match args.kind {
        PlotKind::Potential => {
            let (Some(tp), Some(rp)) = (&args.potential, &args.recovered) else {
                return Err(Error::Domain("--potential and --recovered are required".into()));
            };
            if args.points < 2 {
                return Err(Error::Domain("--points must be at least 2".into()));
            }
            let truth = potential(tp, &geom)?;
            let rec = potential(rp, &geom)?;
            csv.push_str("segment,t,q_true,q_recovered\n");
            for (seg, lo, hi) in [(1, 0.0, geom.gamma), (2, geom.a(), geom.b())] {
                for k in 0..args.points {
                    let t = if k + 1 == args.points { hi } else { lo + (hi - lo) * k as f64 / (args.points - 1) as f64 };
                    let (a, b) = (truth.eval(&geom, t)?, rec.eval(&geom, t)?);
                    writeln!(csv, "{seg},{},{},{}", e17(t), e17(a), e17(b)).expect("writing to a String");
                }
            }
        }
        PlotKind::Asymptotics => {
            let Some(sp) = &args.spectrum else {
                return Err(Error::Domain("--spectrum is required".into()));
            };
            let (spec, g) = spectrum(sp)?;
            same_geometry(&g, &geom)?;
            let fit = fit_asymptotics(&spec, &geom, &L2Criterion::default())?;
            let mut values = spec.values.clone();
            values.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(frozen_spectrum::forward::order(a, b)));
            csv.push_str("n,rho_n,asymptotic_residual\n");
            for (i, mu) in fit.mu.values.iter().enumerate() {
                let n = fit.mu.index(i);
                writeln!(csv, "{n},{},{}", e17(values[n].sqrt().re), e17(mu.re)).expect("writing to a String");
            }
        }
    }
    emit(args.out.as_deref(), &csv)
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Forward(a) => forward(a).map(|_| true),
        Command::Inverse(a) => inverse(a).map(|_| true),
        Command::Roundtrip(a) => roundtrip(a).map(|_| true),
        Command::Zeros(a) => zeros(a).map(|_| true),
        Command::Check(a) => check(a),
        Command::Oracle(a) => oracle(a).map(|_| true),
        Command::Plotdata(a) => plotdata(a).map(|_| true),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start {} worker threads: {e}", cli.threads);
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("the spectrum does not satisfy the solvability conditions");
            ExitCode::from(EXIT_DOMAIN)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { EXIT_NUMERIC } else { EXIT_DOMAIN })
        }
    }
}
