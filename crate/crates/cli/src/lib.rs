//! Command-line front end: mesh generation, constant atlases, convergence
//! studies and certified single solves.

pub mod load;
pub mod svg;

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use femcert::certify::{
    certify_mesh, convergence_study, load_norms_by_quadrature, loglog_slope, write_convergence_csv, AdmissibleField,
    BoundReport, CertifyConfig, LoadNorms,
};
use femcert::constants::{constants_atlas, write_atlas_csv, AtlasEntry, ConstantId, MAX_POLY_DEGREE};
use femcert::femcore::{write_conforming_csv, write_cr_csv};
use femcert::flux::write_flux_csv;
use femcert::trimesh::{generate_friedrichs_keller, read_mesh, write_mesh, Mesh};

use load::parse_load;
use svg::{Plot, Series};

/// Largest angle above which a run is flagged for the maximum angle condition.
pub const MAX_ANGLE_WARNING: f64 = 5.0 * PI / 6.0;

#[derive(Debug, Parser)]
#[command(name = "femcert", version, about = "Crouzeix-Raviart solves with computable error bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a Friedrichs-Keller mesh of the unit square.
    MeshGen(MeshGenArgs),
    /// Tabulate error constants over an alpha grid.
    Constants(ConstantsArgs),
    /// Convergence study with all bounds on Friedrichs-Keller meshes.
    Converge(ConvergeArgs),
    /// Single certified solve.
    Solve(SolveArgs),
}

#[derive(Debug, Args)]
pub struct MeshGenArgs {
    #[arg(long, value_name = "N")]
    pub fk: usize,
    #[arg(short, long, value_name = "PATH")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    /// Constant tags: 0,1,2,3,12,123,4,5,6.
    #[arg(long = "J", value_delimiter = ',', default_value = "0,12,4,5")]
    pub j: Vec<String>,
    /// Grid `A0:A1:STEP` inside (0, 1].
    #[arg(long, default_value = "0.05:1.0:0.05")]
    pub alpha: String,
    #[arg(long, default_value_t = FRAC_PI_2)]
    pub theta: f64,
    /// Subdivision of the reference triangle for eigen bounds.
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    #[arg(long = "poly-degree", default_value_t = 6)]
    pub poly_degree: usize,
    #[arg(short, long, value_name = "CSV")]
    pub output: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[arg(long = "N", value_delimiter = ',', default_value = "4,8,16,32,64")]
    pub n: Vec<usize>,
    #[arg(long, default_value = "builtin:sinsin")]
    pub f: String,
    #[arg(short, long, value_name = "CSV")]
    pub output: PathBuf,
    /// Defaults to the CSV path with an `.svg` extension.
    #[arg(long, value_name = "PATH", conflicts_with = "no_svg")]
    pub svg: Option<PathBuf>,
    #[arg(long = "no-svg")]
    pub no_svg: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VChoice {
    Conforming,
    Average,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["mesh", "fk"])))]
pub struct SolveArgs {
    #[arg(long, value_name = "PATH")]
    pub mesh: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    pub fk: Option<usize>,
    #[arg(long, default_value = "builtin:sinsin")]
    pub f: String,
    /// Output prefix; files `PREFIX_{solution,modified,conforming,flux,report}.csv`.
    #[arg(short, long, value_name = "PREFIX")]
    pub output: PathBuf,
    /// Declare the mesh domain convex (implied for `--fk`).
    #[arg(long)]
    pub convex: bool,
    /// Admissible field for the hypercircle bound.
    #[arg(long, value_enum, default_value = "conforming")]
    pub v: VChoice,
}

/// Failure classes with stable exit codes.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<femcert::Error> for CliError {
    fn from(e: femcert::Error) -> Self {
        use femcert::Error as E;
        match e {
            E::NotPositiveDefinite { .. } | E::NotConverged { .. } | E::RankDeficient | E::DegenerateGram { .. } => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Config(format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Caps the global thread pool at `FEMCERT_THREADS` when set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("FEMCERT_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Config(format!("FEMCERT_THREADS must be a positive integer, got `{raw}`")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::MeshGen(a) => cmd_mesh_gen(&a),
        Command::Constants(a) => cmd_constants(&a),
        Command::Converge(a) => cmd_converge(&a),
        Command::Solve(a) => cmd_solve(&a),
    }
}

pub fn cmd_mesh_gen(args: &MeshGenArgs) -> Result<(), CliError> {
    let mesh = generate_friedrichs_keller(args.fk)?;
    let mut w = create(&args.output)?;
    write_mesh(&mesh, &mut w)?;
    w.flush().map_err(|e| io_err(&args.output, e))?;
    println!(
        "wrote {} ({} vertices, {} triangles)",
        args.output.display(),
        mesh.num_vertices(),
        mesh.num_triangles()
    );
    Ok(())
}

/// `A0:A1:STEP`, inclusive of `A1` up to rounding; values rounded to 12 decimals.
pub fn parse_alpha_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Config(format!("alpha grid `{spec}` is not A0:A1:STEP"));
    let parts: Vec<f64> = spec.split(':').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?;
    let [a0, a1, step] = parts[..] else { return Err(bad()) };
    if !(a0 > 0.0 && a1 <= 1.0 && a0 <= a1 && step > 0.0) {
        return Err(CliError::Config(format!("alpha grid `{spec}` must satisfy 0 < A0 <= A1 <= 1 and STEP > 0")));
    }
    let count = ((a1 - a0) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| ((a0 + k as f64 * step) * 1e12).round() / 1e12).collect())
}

pub fn cmd_constants(args: &ConstantsArgs) -> Result<(), CliError> {
    let ids = args
        .j
        .iter()
        .map(|s| ConstantId::parse(s).ok_or_else(|| CliError::Config(format!("unknown constant `{s}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    if ids.is_empty() {
        return Err(CliError::Config("empty --J list".into()));
    }
    let alphas = parse_alpha_grid(&args.alpha)?;
    if !(args.theta > 0.0 && args.theta < PI) {
        return Err(CliError::Config(format!("theta {} outside (0, pi)", args.theta)));
    }
    if args.n < 2 {
        return Err(CliError::Config("--n must be at least 2".into()));
    }
    if !(2..=MAX_POLY_DEGREE).contains(&args.poly_degree) {
        return Err(CliError::Config(format!("--poly-degree must lie in 2..={MAX_POLY_DEGREE}")));
    }
    let entries = constants_atlas(&ids, &alphas, args.theta, args.n, args.poly_degree);
    let mut w = create(&args.output)?;
    write_atlas_csv(&entries, &mut w)?;
    w.flush().map_err(|e| io_err(&args.output, e))?;
    if let Some(path) = &args.svg {
        write_text(path, &atlas_plot(&ids, &entries, args.theta).render())?;
    }
    let failed: Vec<&AtlasEntry> = entries.iter().filter(|e| e.result.is_err()).collect();
    for e in &failed {
        if let Err(err) = &e.result {
            eprintln!("warning: C_{} at alpha={}: {err}", e.id, e.alpha);
        }
    }
    println!("wrote {} ({} rows, {} failed)", args.output.display(), entries.len(), failed.len());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("{} atlas points failed", failed.len())))
    }
}

fn atlas_plot(ids: &[ConstantId], entries: &[AtlasEntry], theta: f64) -> Plot {
    let curve = |id: ConstantId, upper: bool| -> Vec<(f64, f64)> {
        entries
            .iter()
            .filter(|e| e.id == id)
            .filter_map(|e| e.result.as_ref().ok().map(|r| (e.alpha, if upper { r.upper } else { r.lower })))
            .collect()
    };
    let mut series = Vec::new();
    for &id in ids {
        series.push(Series::new(format!("C{id} lower"), curve(id, false), false));
        series.push(Series::new(format!("C{id} upper"), curve(id, true), true));
    }
    if ids.contains(&ConstantId::C0) && ids.contains(&ConstantId::C12) {
        let c0 = curve(ConstantId::C0, false);
        let c12 = curve(ConstantId::C12, false);
        let prod = c0.iter().zip(&c12).map(|(a, b)| (a.0, a.1 * b.1)).collect();
        series.push(Series::new("C0*C12 lower", prod, false));
    }
    Plot {
        title: format!("error constants, theta = {theta:.6}"),
        x_label: "alpha".into(),
        y_label: "C_J(alpha, theta)".into(),
        log: false,
        series,
    }
}

fn convergence_plot(reports: &[BoundReport], title: &str) -> Plot {
    let pick = |get: &dyn Fn(&BoundReport) -> Option<f64>| -> Vec<(f64, f64)> {
        reports.iter().filter_map(|r| get(r).map(|v| (r.h, v))).collect()
    };
    Plot {
        title: title.into(),
        x_label: "h".into(),
        y_label: "error / bound".into(),
        log: true,
        series: vec![
            Series::new("energy error", pick(&|r| r.energy_err), false),
            Series::new("a priori energy", pick(&|r| r.apriori_energy), true),
            Series::new("L2 error", pick(&|r| r.l2_err), false),
            Series::new("a priori L2", pick(&|r| r.apriori_l2), true),
            Series::new("flux error", pick(&|r| r.flux_err), false),
            Series::new("hypercircle", pick(&|r| Some(r.apost_flux)), true),
        ],
    }
}

pub fn cmd_converge(args: &ConvergeArgs) -> Result<(), CliError> {
    let load = parse_load(&args.f).map_err(CliError::Config)?;
    let exact = load
        .exact
        .as_ref()
        .ok_or_else(|| CliError::Config(format!("load `{}` has no known exact solution", args.f)))?;
    if args.n.is_empty() || args.n.contains(&0) {
        return Err(CliError::Config("--N needs positive mesh sizes".into()));
    }
    let reports = convergence_study(&load.f, Some(exact), &args.n, &CertifyConfig::default())?;
    let mut w = create(&args.output)?;
    write_convergence_csv(&reports, &mut w)?;
    w.flush().map_err(|e| io_err(&args.output, e))?;
    if !args.no_svg {
        let path = args.svg.clone().unwrap_or_else(|| args.output.with_extension("svg"));
        write_text(&path, &convergence_plot(&reports, &format!("f = {}", load.f.name())).render())?;
    }
    let h: Vec<f64> = reports.iter().map(|r| r.h).collect();
    let slope = |get: &dyn Fn(&BoundReport) -> Option<f64>| {
        reports.iter().map(get).collect::<Option<Vec<f64>>>().and_then(|e| loglog_slope(&h, &e))
    };
    let violations: usize = reports.iter().map(BoundReport::violations).sum();
    println!(
        "wrote {} ({} rows); slopes energy {:?} L2 {:?}; bound violations {violations}",
        args.output.display(),
        reports.len(),
        slope(&|r| r.energy_err),
        slope(&|r| r.l2_err),
    );
    Ok(())
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn cmd_solve(args: &SolveArgs) -> Result<(), CliError> {
    let load = parse_load(&args.f).map_err(CliError::Config)?;
    let (mesh, n, norms, exact, convex) = match (&args.mesh, args.fk) {
        (None, Some(n)) => {
            let mesh = generate_friedrichs_keller(n)?;
            let norms = match load.f.norms() {
                Some(d) => LoadNorms { l2: d.l2, h1_semi: Some(d.h1_semi) },
                None => load_norms_by_quadrature(&mesh, &load.f),
            };
            (mesh, Some(n), norms, load.exact.as_ref(), true)
        }
        (Some(path), None) => {
            let file = File::open(path).map_err(|e| io_err(path, e))?;
            let mesh: Mesh = read_mesh(BufReader::new(file))?;
            let norms = load_norms_by_quadrature(&mesh, &load.f);
            (mesh, None, norms, None, args.convex)
        }
        _ => return Err(CliError::Config("give exactly one of --mesh and --fk".into())),
    };
    let config = CertifyConfig {
        convex,
        admissible: match args.v {
            VChoice::Conforming => AdmissibleField::ConformingSolve,
            VChoice::Average => AdmissibleField::NodalAverage,
        },
        ..CertifyConfig::default()
    };
    let max_angle = mesh.shapes().iter().map(|s| s.theta).fold(0.0, f64::max);
    let mut run = certify_mesh(&mesh, &load.f, exact, norms, &config)?;
    run.report.n = n;
    if max_angle > MAX_ANGLE_WARNING {
        eprintln!(
            "warning: maximum angle {:.2} deg exceeds {:.0} deg; C6h = {:.4e} inflates the a priori bounds",
            max_angle.to_degrees(),
            MAX_ANGLE_WARNING.to_degrees(),
            run.constants.c6h
        );
    }
    if !run.constants.certified {
        eprintln!("warning: some element constants are extrapolated estimates, not certified bounds");
    }

    let out = |suffix: &str| suffixed(&args.output, suffix);
    let emit = |path: PathBuf, f: &dyn Fn(&mut BufWriter<File>) -> femcert::Result<()>| -> Result<(), CliError> {
        let mut w = create(&path)?;
        f(&mut w)?;
        w.flush().map_err(|e| io_err(&path, e))
    };
    emit(out("_solution.csv"), &|w| write_cr_csv(&mesh, &run.u_h, w))?;
    emit(out("_modified.csv"), &|w| write_cr_csv(&mesh, &run.u_star, w))?;
    emit(out("_conforming.csv"), &|w| write_conforming_csv(&mesh, &run.v, w))?;
    emit(out("_flux.csv"), &|w| write_flux_csv(&run.flux, &run.fbar, w))?;
    emit(out("_report.csv"), &|w| write_convergence_csv(std::slice::from_ref(&run.report), w))?;

    let r = &run.report;
    println!(
        "h*={:.6e} C0h={:.6e} C12h={:.6e} C6h={:.6e}; a priori energy {:?}, L2 {:?}; hypercircle {:.6e} (mid {:.6e})",
        run.constants.h_star,
        run.constants.c0h,
        run.constants.c12h,
        run.constants.c6h,
        r.apriori_energy,
        r.apriori_l2,
        r.apost_flux,
        r.apost_mid
    );
    Ok(())
}
