//! Command-line front end: `verify-tube`, `simulate`, `portrait`,
//! `normal-form` and `releq`, each writing JSON/CSV/SVG into `--out`.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 trajectory left the tube
//! domain, 3 configuration or input error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use nalgebra::{DVector, Vector2, Vector3};
use serde_json::{json, Value};

use crate::contour::Grid;
use crate::dynamics::{integrate_reduced_until_exit, relative_equilibrium, IntegrationOptions};
use crate::error::{Error, Result};
use crate::io::{self, SystemDefinition};
use crate::mech::{
    amended_potential, find_relative_equilibrium, integrate_coupled, AmendedConvention, CoupledState, MechSystem, PointCloudSystem,
};
use crate::normal_form::birkhoff::NormalFormReport;
use crate::normal_form::{mech_normal_form, normal_form_explicit_so3, normal_form_via_jets, rigid_body_normal_form, LieAlgebraSpec};
use crate::rigid_body::{classify_proper_rotation, default_levels, euler_poinsot_h_mu, phase_portrait, InertiaTensor, RigidBodySlice};
use crate::so3::Rotation;
use crate::tube::{general_tube_compose, run_case_family, tube_momentum, verify_pullback_grid, DirectionCase, MechSlicePoint, SlicePoint, TubeConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    VerificationFailure = 1,
    DomainExit = 2,
    ConfigError = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    fn from_error(e: &Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::Io(_) | Error::Json(_) | Error::NotFreeAction | Error::InvalidLieAlgebra(_) => ExitStatus::ConfigError,
            Error::LeftTubeDomain { .. } | Error::OutOfDomain { .. } | Error::AntipodalPoint => ExitStatus::DomainExit,
            _ => ExitStatus::VerificationFailure,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "symslice", version, about = "Slice coordinates, reduced dynamics and normal forms for SO(3)-symmetric systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// System definition JSON (rigid body or point cloud); defaults to a rigid body with I = (1, 2, 3).
    #[arg(long, global = true)]
    pub system: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Normal-form truncation degree.
    #[arg(long, global = true, default_value_t = 4)]
    pub order: usize,
    /// Momentum magnitude; overrides the system file.
    #[arg(long, global = true)]
    pub mu0: Option<f64>,
    #[arg(long, global = true, default_value_t = 0.0, allow_hyphen_values = true)]
    pub nu0: f64,
    #[arg(long, global = true, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, global = true, default_value_t = 10.0)]
    pub tmax: f64,
    /// Comma-separated energy levels; an empty string draws none.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub levels: Option<String>,
    /// Tolerance overrides, `name=value,...`.
    #[arg(long, global = true)]
    pub tol: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the tube's symplecticity and the Tube Condition on random and gridded points.
    VerifyTube {
        /// Scale the tube angle to check that the verifier notices (debugging aid).
        #[arg(long)]
        corrupt_theta: Option<f64>,
    },
    /// Integrate the reduced system and reconstruct the attitude.
    Simulate,
    /// Energy level sets of the reduced rigid body.
    Portrait,
    /// Birkhoff normal form at the relative equilibrium.
    NormalForm {
        /// Also compute the normal form from the tube jets and compare.
        #[arg(long)]
        compare_jets: bool,
    },
    /// Locate and check the relative equilibrium.
    Releq,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::VerifyTube { .. } => "verify-tube",
            Command::Simulate => "simulate",
            Command::Portrait => "portrait",
            Command::NormalForm { .. } => "normal-form",
            Command::Releq => "releq",
        }
    }
}

/// Named tolerances and their defaults.
pub const DEFAULT_TOLERANCES: [(&str, f64); 7] = [
    ("pullback", 1e-6),
    ("tube_condition", 1e-6),
    ("energy_drift", 1e-8),
    ("momentum_drift", 1e-8),
    ("bracket", 1e-9),
    ("jets", 1e-6),
    ("releq", 1e-9),
];

/// Resolved settings for one run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub system: SystemDefinition,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub order: usize,
    pub mu0: f64,
    pub nu0: f64,
    pub dt: f64,
    pub t_max: f64,
    pub levels: Option<Vec<f64>>,
    pub tolerances: BTreeMap<String, f64>,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let system = match &cli.system {
            Some(p) => SystemDefinition::load(p)?,
            None => SystemDefinition::RigidBody { inertia: [1.0, 2.0, 3.0], mu0: None, eta0: None },
        };
        let mu0 = cli.mu0.or(system.mu0()).unwrap_or(1.0);
        let levels = match cli.levels.as_deref() {
            None => None,
            Some(s) if s.trim().is_empty() => Some(Vec::new()),
            Some(s) => Some(
                s.split(',')
                    .map(|x| x.trim().parse::<f64>().map_err(|_| Error::InvalidConfig(format!("bad level {x:?}"))))
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        let tolerances = parse_tolerances(cli.tol.as_deref())?;
        if cli.order < 2 {
            return Err(Error::InvalidConfig("--order must be at least 2".into()));
        }
        Ok(RunConfig {
            system,
            output_dir: cli.out.clone(),
            seed: cli.seed,
            order: cli.order,
            mu0,
            nu0: cli.nu0,
            dt: cli.dt,
            t_max: cli.tmax,
            levels,
            tolerances,
        })
    }

    fn tol(&self, name: &str) -> f64 {
        self.tolerances[name]
    }

    fn tube(&self) -> Result<TubeConfig> {
        TubeConfig::new(self.mu0)
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.output_dir)?;
        let path = self.output_dir.join(name);
        fs::write(&path, contents)?;
        Ok(path)
    }

    fn write_json(&self, name: &str, value: &Value) -> Result<PathBuf> {
        let text = serde_json::to_string_pretty(value)? + "\n";
        self.write(name, &text)
    }
}

pub fn parse_tolerances(spec: Option<&str>) -> Result<BTreeMap<String, f64>> {
    let mut tol: BTreeMap<String, f64> = DEFAULT_TOLERANCES.iter().map(|&(k, v)| (k.to_string(), v)).collect();
    for item in spec.unwrap_or("").split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, value) = item.split_once('=').ok_or_else(|| Error::InvalidConfig(format!("tolerance {item:?} is not name=value")))?;
        let value: f64 = value.trim().parse().map_err(|_| Error::InvalidConfig(format!("tolerance {item:?} has a bad value")))?;
        match tol.get_mut(name.trim()) {
            Some(slot) if value > 0.0 => *slot = value,
            Some(_) => return Err(Error::InvalidConfig(format!("tolerance {name} must be positive"))),
            None => return Err(Error::InvalidConfig(format!("unknown tolerance {name:?}"))),
        }
    }
    Ok(tol)
}

/// Outcome of a subcommand: its status and the report it wrote.
pub struct Outcome {
    pub status: ExitStatus,
    pub report: Value,
}

fn status(pass: bool) -> ExitStatus {
    if pass {
        ExitStatus::Pass
    } else {
        ExitStatus::VerificationFailure
    }
}

pub fn cmd_verify_tube(cfg: &RunConfig, corrupt_theta: Option<f64>) -> Result<Outcome> {
    const FD_STEP: f64 = 1e-5;
    let scale = corrupt_theta.unwrap_or(1.0);
    let tube = cfg.tube()?.with_theta_scale(scale);
    let grid = verify_pullback_grid(&tube, 10, 0.8, FD_STEP, cfg.seed)?;
    let cases = DirectionCase::ALL.iter().map(|&c| run_case_family(&tube, c, 100, cfg.seed, FD_STEP)).collect::<Result<Vec<_>>>()?;
    let grid_pass = grid.max_residual < cfg.tol("pullback");
    let case_pass: Vec<bool> = cases.iter().map(|c| c.max_residual < cfg.tol("tube_condition")).collect();
    let pass = grid_pass && case_pass.iter().all(|&p| p);
    let report = json!({
        "command": "verify-tube",
        "mu0": cfg.mu0,
        "seed": cfg.seed,
        "theta_scale": scale,
        "tolerances": { "pullback": cfg.tol("pullback"), "tube_condition": cfg.tol("tube_condition") },
        "grid": { "points": grid.points, "coverage": grid.coverage, "max_residual": grid.max_residual, "pass": grid_pass },
        "cases": cases.iter().zip(&case_pass).map(|(c, p)| json!({
            "case": c.case.name(), "draws": c.draws, "max_residual": c.max_residual, "pass": p
        })).collect::<Vec<_>>(),
        "pass": pass,
    });
    cfg.write_json("verify_tube.json", &report)?;
    Ok(Outcome { status: status(pass), report })
}

fn relative_drift(values: impl Iterator<Item = f64>, reference: f64) -> f64 {
    values.map(|v| (v - reference).abs()).fold(0.0, f64::max) / reference.abs().max(f64::MIN_POSITIVE)
}

fn record_every(cfg: &RunConfig) -> usize {
    ((cfg.t_max / cfg.dt) / 20_000.0).ceil().max(1.0) as usize
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<Outcome> {
    let tube = cfg.tube()?;
    let opts = IntegrationOptions::new(cfg.dt, cfg.t_max).with_energy_tol(None).with_record_every(record_every(cfg));
    let eta0 = cfg.system.eta0().map(|e| Vector2::new(e[0], e[1]));
    let (csv, summary, exit_time) = match (cfg.system.inertia(), cfg.system.point_cloud()) {
        (Some(inertia), _) => {
            let h = RigidBodySlice::new(inertia?, cfg.mu0);
            let start = SlicePoint::at_identity(cfg.nu0, eta0.unwrap_or(Vector2::new(0.1, 0.05)));
            let traj = integrate_reduced_until_exit(&tube, &h, &start, &opts)?;
            let h0 = traj.samples[0].h;
            let momenta: Vec<Vector3<f64>> =
                traj.samples.iter().map(|p| Ok(p.s.act(&tube_momentum(&tube, p.nu, &p.eta)?))).collect::<Result<_>>()?;
            let j0 = momenta[0];
            let summary = json!({
                "system": "rigid_body",
                "samples": traj.samples.len(),
                "energy_drift": relative_drift(traj.samples.iter().map(|p| p.h), h0),
                "momentum_drift": momenta.iter().map(|j| (j - j0).norm()).fold(0.0, f64::max) / j0.norm(),
                "max_eta_deviation": traj.samples.iter().map(|p| (p.eta - start.eta).norm()).fold(0.0, f64::max),
            });
            (io::trajectory_csv(&traj.samples), summary, traj.exit_time)
        }
        (None, Some(sys)) => {
            let sys = sys?;
            let k = sys.slice_dim();
            let mu = Vector3::new(0.0, 0.0, cfg.mu0);
            let re = find_relative_equilibrium(&sys, &mu, &DVector::zeros(k), AmendedConvention::Amended, 1e-11)?;
            // Re-centre the slice on the equilibrium shape so small offsets stay inside the tube.
            let sys = sys.rebased(&re.s)?;
            let re = find_relative_equilibrium(&sys, &mu, &DVector::zeros(k), AmendedConvention::Amended, 1e-11)?;
            let offset = |v: &Option<Vec<f64>>, name: &str| -> Result<DVector<f64>> {
                match v {
                    None => Ok(DVector::zeros(k)),
                    Some(v) if v.len() == k => Ok(DVector::from_column_slice(v)),
                    Some(v) => Err(Error::InvalidConfig(format!("{name} has {} entries, expected {k}", v.len()))),
                }
            };
            let SystemDefinition::PointCloud { ds0, dsigma0, .. } = &cfg.system else { unreachable!() };
            let start = CoupledState {
                nu: cfg.nu0,
                eta: eta0.unwrap_or(Vector2::new(0.05, 0.02)),
                s: &re.s + offset(ds0, "ds0")?,
                sigma: &re.sigma + offset(dsigma0, "dsigma0")?,
            };
            let traj = integrate_coupled(&tube, &sys, &Rotation::identity(), &start, &opts)?;
            let h0 = traj.samples[0].h;
            let spatial = |p: &crate::mech::CoupledSample| -> Result<Vector3<f64>> {
                let x = MechSlicePoint { r: p.r, nu: p.state.nu, eta: p.state.eta, s: p.state.s.clone(), sigma: p.state.sigma.clone() };
                let (q, mom) = general_tube_compose(&tube, &sys, &x)?;
                Ok((0..q.len() / 3).map(|i| Vector3::new(q[3 * i], q[3 * i + 1], q[3 * i + 2]).cross(&Vector3::new(mom[3 * i], mom[3 * i + 1], mom[3 * i + 2]))).sum())
            };
            let momenta: Vec<Vector3<f64>> = traj.samples.iter().map(spatial).collect::<Result<_>>()?;
            let j0 = momenta[0];
            let summary = json!({
                "system": "point_cloud",
                "samples": traj.samples.len(),
                "relative_equilibrium": { "s": re.s.as_slice(), "sigma": re.sigma.as_slice(), "residual": re.residual },
                "energy_drift": relative_drift(traj.samples.iter().map(|p| p.h), h0),
                "momentum_drift": momenta.iter().map(|j| (j - j0).norm()).fold(0.0, f64::max) / j0.norm(),
                "max_eta_deviation": traj.samples.iter().map(|p| (p.state.eta - start.eta).norm()).fold(0.0, f64::max),
            });
            (io::coupled_trajectory_csv(&tube, &traj.samples), summary, traj.exit_time)
        }
        (None, None) => unreachable!("a system is a rigid body or a point cloud"),
    };
    io::validate_trajectory_csv(&csv)?;
    cfg.write("trajectory.csv", &csv)?;
    let pass = summary["energy_drift"].as_f64().unwrap() < cfg.tol("energy_drift")
        && summary["momentum_drift"].as_f64().unwrap() < cfg.tol("momentum_drift");
    let mut report = summary;
    report["command"] = json!("simulate");
    report["mu0"] = json!(cfg.mu0);
    report["nu0"] = json!(cfg.nu0);
    report["dt"] = json!(cfg.dt);
    report["t_max"] = json!(cfg.t_max);
    report["exit_time"] = json!(exit_time);
    report["left_domain"] = json!(exit_time.is_some());
    report["pass"] = json!(pass && exit_time.is_none());
    cfg.write_json("summary.json", &report)?;
    let status = if exit_time.is_some() { ExitStatus::DomainExit } else { status(pass) };
    Ok(Outcome { status, report })
}

fn rigid_body(cfg: &RunConfig, command: &str) -> Result<InertiaTensor> {
    cfg.system.inertia().ok_or_else(|| Error::InvalidConfig(format!("{command} needs a rigid-body system")))?
}

pub fn cmd_portrait(cfg: &RunConfig) -> Result<Outcome> {
    let tube = cfg.tube()?;
    let inertia = rigid_body(cfg, "portrait")?;
    let h = RigidBodySlice::new(inertia, cfg.mu0);
    let bound = tube.eta_bound(cfg.nu0);
    let grid = Grid::square(1.02 * bound, 241);
    let levels = match &cfg.levels {
        Some(l) => l.clone(),
        None => default_levels(&phase_portrait(&tube, &h, cfg.nu0, &grid, &[])?.values, 12),
    };
    let portrait = phase_portrait(&tube, &h, cfg.nu0, &grid, &levels)?;
    let (csv, svg, surface) = (io::portrait_csv(&portrait), io::portrait_svg(&portrait, bound), io::surface_csv(&portrait));
    io::validate_portrait_csv(&csv)?;
    io::validate_surface_csv(&surface)?;
    let drawn = io::validate_svg(&svg)?;
    cfg.write("portrait.csv", &csv)?;
    cfg.write("portrait.svg", &svg)?;
    cfg.write("surface.csv", &surface)?;
    let report = json!({
        "command": "portrait",
        "mu0": cfg.mu0,
        "nu0": cfg.nu0,
        "levels": levels,
        "polylines": drawn,
        "classification": classify_proper_rotation(&inertia, cfg.mu0),
    });
    cfg.write_json("summary.json", &report)?;
    Ok(Outcome { status: ExitStatus::Pass, report })
}

pub fn cmd_normal_form(cfg: &RunConfig, compare_jets: bool) -> Result<Outcome> {
    let k = cfg.order;
    let (ss, result, system) = match (cfg.system.inertia(), cfg.system.point_cloud()) {
        (Some(inertia), _) => {
            let (ss, r) = rigid_body_normal_form(&inertia?, cfg.mu0, k)?;
            (ss, r, "rigid_body")
        }
        (None, Some(sys)) => {
            let nf = mech_normal_form(&sys?, cfg.mu0, k)?;
            (nf.structure, nf.result, "point_cloud")
        }
        (None, None) => unreachable!("a system is a rigid body or a point cloud"),
    };
    let nf_report = NormalFormReport::new(&ss, &result, k);
    let mut report = serde_json::to_value(&nf_report)?;
    io::validate_normal_form_json(&report)?;
    let bracket = result.max_commutator_residual();
    let mut pass = bracket < cfg.tol("bracket");
    if compare_jets {
        let inertia = rigid_body(cfg, "normal-form --compare-jets")?;
        let h = |m: &[f64]| euler_poinsot_h_mu(&inertia, &Vector3::from_column_slice(m));
        let via = normal_form_via_jets(&LieAlgebraSpec::so3(&Vector3::new(0.0, 0.0, cfg.mu0))?, &h, k)?;
        let (_, explicit) = normal_form_explicit_so3(cfg.mu0, &h, k)?;
        let diff = (&via.result.normal_form - &explicit.normal_form).max_abs_coefficient();
        pass &= diff < cfg.tol("jets");
        report["comparison"] = json!({ "max_coefficient_difference": diff, "jet_residual": via.jets.max_residual() });
    }
    report["system"] = json!(system);
    report["mu0"] = json!(cfg.mu0);
    report["pass"] = json!(pass);
    cfg.write_json("normal_form.json", &report)?;
    Ok(Outcome { status: status(pass), report })
}

pub fn cmd_releq(cfg: &RunConfig) -> Result<Outcome> {
    let tube = cfg.tube()?;
    let (report, pass) = match (cfg.system.inertia(), cfg.system.point_cloud()) {
        (Some(inertia), _) => {
            let inertia = inertia?;
            let h = RigidBodySlice::new(inertia, cfg.mu0);
            let re = relative_equilibrium(&tube, &h, cfg.nu0, &Vector2::zeros(), cfg.tol("releq"))?;
            let pass = re.gradient_norm < cfg.tol("releq");
            (json!({ "system": "rigid_body", "eta": [re.eta.x, re.eta.y], "xi": re.xi.as_slice(), "residual": re.gradient_norm,
                     "classification": classify_proper_rotation(&inertia, cfg.mu0 + cfg.nu0) }), pass)
        }
        (None, Some(sys)) => {
            let sys: PointCloudSystem = sys?;
            let mu = Vector3::new(0.0, 0.0, cfg.mu0);
            let re = find_relative_equilibrium(&sys, &mu, &DVector::zeros(sys.slice_dim()), AmendedConvention::Amended, 1e-11)?;
            let q = sys.shape(&re.s);
            let pass = re.residual < cfg.tol("releq");
            (json!({ "system": "point_cloud", "s": re.s.as_slice(), "sigma": re.sigma.as_slice(), "q": q.as_slice(),
                     "residual": re.residual, "iterations": re.iterations,
                     "amended_potential": amended_potential(&sys, &mu, &re.s, AmendedConvention::Amended)? }), pass)
        }
        (None, None) => unreachable!("a system is a rigid body or a point cloud"),
    };
    let mut report = report;
    report["command"] = json!("releq");
    report["mu0"] = json!(cfg.mu0);
    report["pass"] = json!(pass);
    cfg.write_json("releq.json", &report)?;
    Ok(Outcome { status: status(pass), report })
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = RunConfig::from_cli(cli)?;
    match &cli.command {
        Command::VerifyTube { corrupt_theta } => cmd_verify_tube(&cfg, *corrupt_theta),
        Command::Simulate => cmd_simulate(&cfg),
        Command::Portrait => cmd_portrait(&cfg),
        Command::NormalForm { compare_jets } => cmd_normal_form(&cfg, *compare_jets),
        Command::Releq => cmd_releq(&cfg),
    }
}

fn report_error(out: &Path, command: &str, e: &Error, status: ExitStatus) {
    let body = json!({ "command": command, "error": e.kind(), "message": e.to_string(), "exit_code": status.code() });
    let text = serde_json::to_string_pretty(&body).unwrap_or_default();
    eprintln!("{text}");
    if fs::create_dir_all(out).is_ok() {
        let _ = fs::write(out.join("error.json"), text + "\n");
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitStatus::ConfigError.code() } else { 0 };
        }
    };
    match run(&cli) {
        Ok(outcome) => outcome.status.code(),
        Err(e) => {
            let status = ExitStatus::from_error(&e);
            report_error(&cli.out, cli.command.name(), &e, status);
            status.code()
        }
    }
}
