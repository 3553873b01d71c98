//! Command-line front end.
//!
//! Exit status: 0 success, 2 usage, 3 input parse, 4 infeasible constraint,
//! 5 numerical failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Vector3;
use rayon::prelude::*;

use crate::beamforming::{eepb_solve, iep_solve, mrt, BeamformResult, Excitation, ExcitationFile, Method};
use crate::coupling::{
    bcf_from_generalized_s, bcf_from_s, bcf_from_z, bcf_integrate, generalized_s, read_touchstone, sinc_bcf,
    steering_at, CouplingFile, CouplingMatrix, NetworkData,
};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::patterns::{
    array_pattern, directivity_from_pattern, hertzian_dipole_eep, isotropic_eep, make_sphere_grid, planar_cut,
    planar_directivity, ArrayGeometry, Direction, ElementPattern, FarField, SampledPattern, SphereGrid, DEFAULT_N_PHI,
    DEFAULT_N_THETA, DEFAULT_PLANAR_N_PHI,
};
use crate::robust::{ocrb_solve, tradeoff_sweep, write_sweep_csv, SolutionFile};
use crate::sensitivity::{
    monte_carlo, normalized_variance, worker_threads, ErrorModel, EvalMode, ReportFile, DEFAULT_BINS,
};

/// Power floor for dB output, so exact nulls stay finite.
pub const POWER_FLOOR_DB: f64 = -300.0;

#[derive(Debug, Parser)]
#[command(name = "superdir", version, about = "Superdirective beamforming for coupled arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the coupling matrix B, steering vector v0 and |f_i(u0)|².
    Bcf(BcfArgs),
    /// Compute an excitation with one of the beamforming methods.
    Solve(SolveArgs),
    /// Monte Carlo directivity statistics under excitation errors.
    Montecarlo(MonteCarloArgs),
    /// Directivity against spacing or against the variance constraint.
    Sweep(SweepArgs),
    /// Normalized power pattern of an excitation.
    Pattern(PatternArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Analytic {
    Isotropic,
    Dipole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Route {
    Integrate,
    S,
    Gs,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Oracle {
    Sinc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolveMethod {
    Eepb,
    Iep,
    Mrt,
    Ocrb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepKind {
    Spacing,
    Xi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Cut {
    Full,
    Planar,
}

#[derive(Debug, Clone, Args)]
struct ScenarioArgs {
    /// Analytic element model.
    #[arg(long, value_enum)]
    analytic: Option<Analytic>,
    /// Number of elements for analytic arrays.
    #[arg(long)]
    m: Option<usize>,
    /// Element spacing in wavelengths.
    #[arg(long, conflicts_with_all = ["spacing_m", "wavelength_m"])]
    spacing_wl: Option<f64>,
    /// Wavelength in meters (with --spacing-m).
    #[arg(long, requires = "spacing_m")]
    wavelength_m: Option<f64>,
    /// Element spacing in meters (with --wavelength-m).
    #[arg(long, requires = "wavelength_m")]
    spacing_m: Option<f64>,
    /// Look along the array axis (theta = 90, phi = 270 degrees).
    #[arg(long, conflicts_with_all = ["theta0_deg", "phi0_deg"])]
    endfire: bool,
    /// Look direction polar angle in degrees.
    #[arg(long, default_value_t = 90.0)]
    theta0_deg: f64,
    /// Look direction azimuth in degrees.
    #[arg(long, default_value_t = 270.0)]
    phi0_deg: f64,
    /// Sampled embedded element patterns, one CSV per element.
    #[arg(long, num_args = 1..)]
    eep_files: Vec<PathBuf>,
    /// Network file (JSON) with S and/or Z data.
    #[arg(long)]
    network: Option<PathBuf>,
    /// Touchstone v1 S-parameter file.
    #[arg(long, requires = "freq")]
    touchstone: Option<PathBuf>,
    /// Frequency in Hz selected from the Touchstone file.
    #[arg(long)]
    freq: Option<f64>,
    /// Quadrature nodes in theta.
    #[arg(long, default_value_t = DEFAULT_N_THETA)]
    n_theta: usize,
    /// Quadrature nodes in phi.
    #[arg(long, default_value_t = DEFAULT_N_PHI)]
    n_phi: usize,
}

#[derive(Debug, Args)]
struct BcfArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// How B is obtained; defaults to `integrate` for pattern sources and
    /// `s` (else `z`) for network sources.
    #[arg(long, value_enum)]
    route: Option<Route>,
    /// Real reference impedance of the S data for the `gs` route.
    #[arg(long, default_value_t = 50.0)]
    base_z0: f64,
    /// Compare against a closed form and fail above 1e-6.
    #[arg(long, value_enum)]
    oracle: Option<Oracle>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Coupling file from `bcf`, instead of a scenario.
    #[arg(long)]
    coupling: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: SolveMethod,
    /// Normalized-variance target for `ocrb`.
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct MonteCarloArgs {
    /// Excitation (from `solve`).
    #[arg(long)]
    excitation: PathBuf,
    /// Coupling file (from `bcf`).
    #[arg(long)]
    coupling: PathBuf,
    /// RMS relative amplitude error.
    #[arg(long)]
    sigma_amp: f64,
    /// RMS phase error in degrees.
    #[arg(long)]
    sigma_phase_deg: f64,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write one directivity sample per line.
    #[arg(long)]
    samples: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Coupling file for `xi` sweeps, instead of a scenario.
    #[arg(long)]
    coupling: Option<PathBuf>,
    #[arg(long, value_enum)]
    kind: SweepKind,
    /// First value (wavelengths for spacing sweeps).
    #[arg(long)]
    start: f64,
    /// Last value, included when it falls on the step grid.
    #[arg(long)]
    stop: f64,
    #[arg(long)]
    step: f64,
    /// Methods evaluated in spacing sweeps.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [SolveMethod::Eepb, SolveMethod::Iep, SolveMethod::Mrt])]
    methods: Vec<SolveMethod>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PatternArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Excitation (from `solve`).
    #[arg(long)]
    excitation: PathBuf,
    #[arg(long, value_enum, default_value_t = Cut::Full)]
    cut: Cut,
    /// Polar angle of the planar cut in degrees.
    #[arg(long, default_value_t = 90.0)]
    cut_theta0_deg: f64,
    /// Azimuth samples of the planar cut.
    #[arg(long, default_value_t = DEFAULT_PLANAR_N_PHI)]
    cut_n_phi: usize,
    /// Lattice step of the full-sphere output in degrees.
    #[arg(long, default_value_t = 1.0)]
    step_deg: f64,
    #[arg(long, short)]
    out: PathBuf,
}

/// Where element patterns or network data come from.
enum Source {
    Analytic {
        kind: Analytic,
        geometry: ArrayGeometry,
        patterns: Vec<ElementPattern>,
    },
    EepFiles(Vec<ElementPattern>),
    Network(NetworkData),
}

struct Scenario {
    source: Source,
    u0: Direction,
    grid: SphereGrid,
}

impl Scenario {
    fn patterns(&self) -> Option<&[ElementPattern]> {
        match &self.source {
            Source::Analytic { patterns, .. } | Source::EepFiles(patterns) => Some(patterns),
            Source::Network(_) => None,
        }
    }
}

fn analytic_patterns(kind: Analytic, geometry: &ArrayGeometry) -> Result<Vec<ElementPattern>> {
    (0..geometry.len())
        .map(|i| match kind {
            Analytic::Isotropic => isotropic_eep(geometry, i),
            Analytic::Dipole => hertzian_dipole_eep(geometry, i, Vector3::z()),
        })
        .collect()
}

/// Isolated pattern of the analytic element, centered on the origin.
fn isolated_pattern(kind: Analytic, wavelength: f64) -> Result<ElementPattern> {
    let single = ArrayGeometry::new(vec![Vector3::zeros()], wavelength)?;
    Ok(analytic_patterns(kind, &single)?.remove(0))
}

fn linear_geometry(m: usize, spacing_wl: f64, wavelength: f64) -> Result<ArrayGeometry> {
    ArrayGeometry::uniform_linear(m, spacing_wl * wavelength, wavelength)
}

impl ScenarioArgs {
    fn direction(&self) -> Result<Direction> {
        if self.endfire {
            Ok(Direction::endfire())
        } else {
            Direction::from_degrees(self.theta0_deg, self.phi0_deg)
        }
    }

    fn has_source(&self) -> bool {
        self.analytic.is_some() || !self.eep_files.is_empty() || self.network.is_some() || self.touchstone.is_some()
    }

    /// Wavelength and spacing in wavelengths.
    fn spacing(&self) -> Result<(f64, f64)> {
        match (self.spacing_wl, self.wavelength_m, self.spacing_m) {
            (Some(d), None, None) => Ok((1.0, d)),
            (None, Some(w), Some(d)) => {
                if !(w.is_finite() && w > 0.0) {
                    return Err(Error::invalid(format!("--wavelength-m must be positive, got {w}")));
                }
                Ok((w, d / w))
            }
            _ => Err(Error::invalid("give --spacing-wl, or --wavelength-m with --spacing-m")),
        }
    }

    fn build(&self) -> Result<Scenario> {
        let count = usize::from(self.analytic.is_some())
            + usize::from(!self.eep_files.is_empty())
            + usize::from(self.network.is_some())
            + usize::from(self.touchstone.is_some());
        if count != 1 {
            return Err(Error::invalid(
                "give exactly one source: --analytic, --eep-files, --network or --touchstone",
            ));
        }
        let u0 = self.direction()?;
        let grid = make_sphere_grid(self.n_theta, self.n_phi)?;
        let source = if let Some(kind) = self.analytic {
            let m = self.m.ok_or_else(|| Error::invalid("--analytic needs --m"))?;
            let (wavelength, d) = self.spacing()?;
            let geometry = linear_geometry(m, d, wavelength)?;
            let patterns = analytic_patterns(kind, &geometry)?;
            Source::Analytic {
                kind,
                geometry,
                patterns,
            }
        } else if !self.eep_files.is_empty() {
            let patterns = self
                .eep_files
                .iter()
                .map(|p| Ok(ElementPattern::Sampled(Arc::new(SampledPattern::read_csv(p)?))))
                .collect::<Result<_>>()?;
            Source::EepFiles(patterns)
        } else if let Some(path) = &self.network {
            Source::Network(NetworkData::read(path)?)
        } else {
            let path = self.touchstone.as_ref().expect("counted above");
            let freq = self.freq.ok_or_else(|| Error::invalid("--touchstone needs --freq"))?;
            let (net, used) = read_touchstone(path, freq)?;
            println!("touchstone frequency: {used} Hz");
            Source::Network(net)
        };
        Ok(Scenario { source, u0, grid })
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Bcf(a) => cmd_bcf(&a),
        Command::Solve(a) => cmd_solve(&a),
        Command::Montecarlo(a) => cmd_montecarlo(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Pattern(a) => cmd_pattern(&a),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::InfeasibleConstraint { bound, .. } = &e {
                eprintln!("lower bound on xi: {bound}");
            }
            e.exit_code()
        }
    }
}

fn route_name(route: Route) -> &'static str {
    match route {
        Route::Integrate => "integrate",
        Route::S => "s",
        Route::Gs => "gs",
        Route::Z => "z",
    }
}

fn network_bcf(net: &NetworkData, route: Route, base_z0: f64) -> Result<CMatrix> {
    match route {
        Route::S => bcf_from_s(net),
        Route::Gs => bcf_from_generalized_s(&generalized_s(net, base_z0)?, net),
        Route::Z => bcf_from_z(net),
        Route::Integrate => Err(Error::RouteMismatch(
            "network data has no patterns to integrate; use --route s, gs or z".into(),
        )),
    }
}

fn cmd_bcf(args: &BcfArgs) -> Result<()> {
    let sc = args.scenario.build()?;
    let (route, b, steering) = match &sc.source {
        Source::Network(net) => {
            let route = args
                .route
                .unwrap_or(if net.s().is_some() { Route::S } else { Route::Z });
            (route, network_bcf(net, route, args.base_z0)?, None)
        }
        _ => {
            let route = args.route.unwrap_or(Route::Integrate);
            if route != Route::Integrate {
                return Err(Error::RouteMismatch(format!(
                    "route `{}` needs network data; pattern sources use `integrate`",
                    route_name(route)
                )));
            }
            let patterns = sc.patterns().expect("pattern source");
            let b = bcf_integrate(patterns, &sc.grid)?;
            (route, b, Some(steering_at(patterns, &sc.u0)?))
        }
    };
    if let Some(oracle) = args.oracle {
        let Source::Analytic {
            kind: Analytic::Isotropic,
            geometry,
            ..
        } = &sc.source
        else {
            return Err(Error::invalid("--oracle sinc needs --analytic isotropic"));
        };
        match oracle {
            Oracle::Sinc => {
                let diff = linalg::max_abs(&(&b - sinc_bcf(geometry)));
                println!("oracle sinc max abs diff: {diff:e}");
                if diff > 1e-6 {
                    return Err(Error::NumericalConditioning(format!(
                        "integrated B differs from the sinc closed form by {diff:e}"
                    )));
                }
            }
        }
    }
    let file = CouplingFile::new(route_name(route), &b, steering.as_ref());
    println!("route: {}", route_name(route));
    println!("hermitian asymmetry: {:e}", file.hermitian_asymmetry);
    println!("min eigenvalue ratio: {:e}", file.min_eigen_ratio);
    if let Some(s) = &steering {
        println!("cross-polar residual: {:e}", s.cross_pol_residual);
    }
    linalg::check_hermitian_psd(&b, crate::coupling::HERMITIAN_TOL)?;
    file.write(&args.out)
}

fn coupling_for(sc: &Scenario) -> Result<CouplingMatrix> {
    match sc.patterns() {
        Some(p) => CouplingMatrix::from_patterns(p, &sc.grid, &sc.u0),
        None => Err(Error::invalid(
            "network data carries no steering vector; run `bcf` with a pattern source",
        )),
    }
}

fn load_coupling(scenario: &ScenarioArgs, coupling: Option<&Path>) -> Result<(Option<Scenario>, CouplingMatrix)> {
    match (coupling, scenario.has_source()) {
        (Some(_), true) => Err(Error::invalid("give either --coupling or a scenario, not both")),
        (Some(path), false) => Ok((None, read_coupling(path)?)),
        (None, _) => {
            let sc = scenario.build()?;
            let c = coupling_for(&sc)?;
            Ok((Some(sc), c))
        }
    }
}

/// Coupling file whose content fails validation is an input error.
fn read_coupling(path: &Path) -> Result<CouplingMatrix> {
    let f = CouplingFile::read(path)?;
    f.to_coupling().map_err(|e| match e {
        Error::InvalidArgument(msg) if f.v0.is_none() => Error::InvalidArgument(msg),
        other => Error::parse(path, 0, other.to_string()),
    })
}

fn iep_for(sc: Option<&Scenario>) -> Result<BeamformResult> {
    match sc.map(|s| (&s.source, s)) {
        Some((Source::Analytic { kind, geometry, .. }, sc)) => iep_solve(
            geometry,
            &isolated_pattern(*kind, geometry.wavelength())?,
            &sc.grid,
            &sc.u0,
        ),
        _ => Err(Error::invalid("--method iep needs an --analytic scenario")),
    }
}

fn cmd_solve(args: &SolveArgs) -> Result<()> {
    match (args.method, args.xi) {
        (SolveMethod::Ocrb, None) => return Err(Error::invalid("--method ocrb needs --xi")),
        (m, Some(_)) if m != SolveMethod::Ocrb => return Err(Error::invalid("--xi applies only to --method ocrb")),
        _ => {}
    }
    let (sc, c) = load_coupling(&args.scenario, args.coupling.as_deref())?;
    if let Some(xi) = args.xi {
        let s = ocrb_solve(&c, xi)?;
        println!("D = {:.10}", s.directivity);
        println!("xi = {:.10e}", s.xi_achieved);
        println!("residual = {:e}", s.residual);
        println!("p = {:e}", s.chosen_p.re);
        return SolutionFile::from_solution(&s).write(&args.out);
    }
    let r = match args.method {
        SolveMethod::Eepb => eepb_solve(&c)?,
        SolveMethod::Mrt => mrt(&c)?,
        SolveMethod::Iep => {
            let mut r = iep_for(sc.as_ref())?;
            r.directivity = crate::beamforming::directivity_quotient(&r.excitation, &c)?;
            r
        }
        SolveMethod::Ocrb => unreachable!("handled above"),
    };
    if r.ill_conditioned {
        eprintln!("warning: B is ill-conditioned (loading {:e})", r.loading);
    }
    println!("D = {:.10}", r.directivity);
    println!("xi = {:.10e}", normalized_variance(&r.excitation, &c)?);
    ExcitationFile::from_result(&r).write(&args.out)
}

/// Excitation from either a `solve` excitation file or an OCRB solution file.
fn read_excitation(path: &Path) -> Result<Excitation> {
    match ExcitationFile::read(path) {
        Ok(f) => f.excitation(),
        Err(first) => match SolutionFile::read(path) {
            Ok(s) => Excitation::new(crate::json::complexes(&s.a)).map_err(|e| Error::parse(path, 0, e.to_string())),
            Err(_) => Err(first),
        },
    }
}

fn cmd_montecarlo(args: &MonteCarloArgs) -> Result<()> {
    let em = ErrorModel::from_degrees(args.sigma_amp, args.sigma_phase_deg)?;
    let a = read_excitation(&args.excitation)?;
    let c = read_coupling(&args.coupling)?;
    let report = monte_carlo(&a, &c, EvalMode::Quotient, &em, args.n, args.seed, worker_threads())?;
    let samples_path = args.samples.as_ref().map(|p| p.display().to_string());
    let file = ReportFile::new(&report, args.bins, samples_path)?;
    if let Some(p) = &args.samples {
        report.write_samples_csv(p)?;
    }
    println!("D0 = {:.10}", report.d0);
    println!("mean D = {:.10}", report.mean_d);
    println!("H = {:.10}", report.h);
    file.write(&args.out)
}

fn sweep_values(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || !(start < stop) || !(step > 0.0) {
        return Err(Error::invalid(format!(
            "sweep range needs start < stop and step > 0, got {start}..{stop} step {step}"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}

fn pool() -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(worker_threads())
        .build()
        .map_err(|e| Error::NumericalConditioning(format!("thread pool: {e}")))
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let values = sweep_values(args.start, args.stop, args.step)?;
    match args.kind {
        SweepKind::Xi => {
            let (_, c) = load_coupling(&args.scenario, args.coupling.as_deref())?;
            let points = pool()?.install(|| {
                values
                    .par_iter()
                    .map(|&xi| tradeoff_sweep(&c, &[xi]).remove(0))
                    .collect::<Vec<_>>()
            });
            let failed = points.iter().filter(|p| p.outcome.is_err()).count();
            println!("{} points, {failed} failed", points.len());
            write_sweep_csv(&points, &args.out)
        }
        SweepKind::Spacing => {
            if args.coupling.is_some() {
                return Err(Error::invalid(
                    "spacing sweeps rebuild the array; give an --analytic scenario",
                ));
            }
            if args.methods.is_empty() {
                return Err(Error::invalid("--methods is empty"));
            }
            if args.methods.contains(&SolveMethod::Ocrb) {
                return Err(Error::invalid("spacing sweeps support eepb, iep and mrt"));
            }
            let sc = args.scenario.build()?;
            let Source::Analytic { kind, geometry, .. } = &sc.source else {
                return Err(Error::invalid("spacing sweeps need an --analytic scenario"));
            };
            let (kind, m, wavelength) = (*kind, geometry.len(), geometry.wavelength());
            let rows = pool()?.install(|| {
                values
                    .par_iter()
                    .map(|&d| spacing_point(kind, m, d, wavelength, &sc, &args.methods))
                    .collect::<Vec<_>>()
            });
            write_spacing_csv(&values, &args.methods, &rows, &args.out)
        }
    }
}

fn spacing_point(
    kind: Analytic,
    m: usize,
    d: f64,
    wavelength: f64,
    sc: &Scenario,
    methods: &[SolveMethod],
) -> std::result::Result<Vec<f64>, String> {
    let run = || -> Result<Vec<f64>> {
        let geometry = linear_geometry(m, d, wavelength)?;
        let patterns = analytic_patterns(kind, &geometry)?;
        let c = CouplingMatrix::from_patterns(&patterns, &sc.grid, &sc.u0)?;
        methods
            .iter()
            .map(|method| match method {
                SolveMethod::Eepb => Ok(eepb_solve(&c)?.directivity),
                SolveMethod::Mrt => Ok(mrt(&c)?.directivity),
                SolveMethod::Iep => {
                    let iep = isolated_pattern(kind, wavelength)?;
                    let r = iep_solve(&geometry, &iep, &sc.grid, &sc.u0)?;
                    crate::beamforming::directivity_quotient(&r.excitation, &c)
                }
                SolveMethod::Ocrb => unreachable!("rejected before the sweep"),
            })
            .collect()
    };
    run().map_err(|e| e.to_string())
}

fn method_name(m: SolveMethod) -> String {
    let method = match m {
        SolveMethod::Eepb => Method::Eepb,
        SolveMethod::Iep => Method::Iep,
        SolveMethod::Mrt => Method::Mrt,
        SolveMethod::Ocrb => Method::Ocrb,
    };
    method.to_string()
}

fn csv_io(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::io(path, std::io::Error::other(e))
}

fn write_spacing_csv(
    values: &[f64],
    methods: &[SolveMethod],
    rows: &[std::result::Result<Vec<f64>, String>],
    path: &Path,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_io(path))?;
    let mut header = vec!["spacing_wl".to_string()];
    header.extend(methods.iter().map(|m| method_name(*m)));
    header.push("error".into());
    w.write_record(&header).map_err(csv_io(path))?;
    for (d, row) in values.iter().zip(rows) {
        let mut rec = vec![format!("{d:?}")];
        match row {
            Ok(ds) => {
                rec.extend(ds.iter().map(|x| format!("{x:?}")));
                rec.push(String::new());
            }
            Err(msg) => {
                rec.extend(methods.iter().map(|_| String::new()));
                rec.push(msg.clone());
            }
        }
        w.write_record(&rec).map_err(csv_io(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn to_db(power: f64, peak: f64) -> f64 {
    if power <= 0.0 || peak <= 0.0 {
        POWER_FLOOR_DB
    } else {
        (10.0 * (power / peak).log10()).max(POWER_FLOOR_DB)
    }
}

fn cmd_pattern(args: &PatternArgs) -> Result<()> {
    let sc = args.scenario.build()?;
    let patterns = sc
        .patterns()
        .ok_or_else(|| Error::invalid("patterns need an --analytic or --eep-files scenario"))?;
    let a = read_excitation(&args.excitation)?;
    let pattern = array_pattern(a.as_slice(), patterns)?;
    let mut w = csv::Writer::from_path(&args.out).map_err(csv_io(&args.out))?;
    match args.cut {
        Cut::Full => {
            if !(args.step_deg > 0.0 && args.step_deg <= 90.0) {
                return Err(Error::invalid(format!(
                    "--step-deg must lie in (0, 90], got {}",
                    args.step_deg
                )));
            }
            let n_t = (180.0 / args.step_deg).round() as usize;
            let n_p = (360.0 / args.step_deg).round() as usize;
            let mut rows = Vec::with_capacity((n_t + 1) * n_p);
            for i in 0..=n_t {
                let t = (i as f64 * args.step_deg).min(180.0);
                for j in 0..n_p {
                    let p = j as f64 * args.step_deg;
                    rows.push((t, p, pattern.field(&Direction::from_degrees(t, p)?)?.norm_sqr()));
                }
            }
            let peak = rows.iter().map(|r| r.2).fold(0.0, f64::max);
            w.write_record(["theta_deg", "phi_deg", "power_db"])
                .map_err(csv_io(&args.out))?;
            for (t, p, pw) in rows {
                w.write_record([format!("{t:?}"), format!("{p:?}"), format!("{:?}", to_db(pw, peak))])
                    .map_err(csv_io(&args.out))?;
            }
            println!("D = {:.10}", directivity_from_pattern(&pattern, &sc.grid, &sc.u0)?);
        }
        Cut::Planar => {
            let theta0 = args.cut_theta0_deg.to_radians();
            let cut = planar_cut(&pattern, theta0, args.cut_n_phi)?;
            let peak = cut.iter().map(|c| c.1).fold(0.0, f64::max);
            w.write_record(["phi_deg", "power_db"]).map_err(csv_io(&args.out))?;
            for (phi, pw) in &cut {
                w.write_record([format!("{:?}", phi.to_degrees()), format!("{:?}", to_db(*pw, peak))])
                    .map_err(csv_io(&args.out))?;
            }
            println!("D_p = {:.10}", planar_directivity(&pattern, theta0, args.cut_n_phi)?);
        }
    }
    w.flush().map_err(|e| Error::io(&args.out, e))
}
