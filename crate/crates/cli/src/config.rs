//! Command-line flags, the optional JSON config file, and their merge into a
//! [`RunConfig`]. Flags win over file values field by field.

use std::path::{Path, PathBuf};

use ckn_core::{CknParams, EigenProblem, RadialGrid, SolidAngle, SolverOptions};
use clap::{Parser, ValueEnum};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Check the hypotheses of the existence theorem.
    Validate,
    /// Print every closed-form exponent and the coupling constant.
    Exponents,
    /// Minimize over radial profiles and report the sharp-constant candidate.
    Solve,
    /// Test a candidate constant against seeded random profiles.
    Verify,
    /// First eigenvalue of the weighted p-Laplacian on a ball.
    Eigen,
    /// Solve a list of tuples read from a JSON array.
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Exponents => "exponents",
            Command::Solve => "solve",
            Command::Verify => "verify",
            Command::Eigen => "eigen",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "ckn",
    version,
    about = "Sharp constants and extremals of weighted CKN inequalities"
)]
pub struct Cli {
    /// Command to run; may instead come from the config file.
    #[arg(value_enum)]
    pub command: Option<Command>,

    /// JSON config file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[arg(long = "N")]
    pub dim: Option<u32>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,

    #[arg(long, allow_hyphen_values = true)]
    pub tau_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau_max: Option<f64>,
    /// Number of grid nodes.
    #[arg(long)]
    pub n: Option<usize>,
    /// `full` or the measure of the cone's cross-section.
    #[arg(long)]
    pub solid_angle: Option<String>,

    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_iters: Option<usize>,

    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Include the per-iteration energy trace in JSON output.
    #[arg(long)]
    pub trace: bool,
    /// Where to write the profile CSV (solve, eigen).
    #[arg(long)]
    pub profile: Option<PathBuf>,

    /// JSON array of parameter tuples (sweep).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Candidate constant (verify); solved for when absent.
    #[arg(long)]
    pub c: Option<f64>,
    /// Number of random profiles (verify).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Ball radius (eigen).
    #[arg(long)]
    pub ball_radius: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum SolidAngleField {
    Word(String),
    Value(f64),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    command: Option<Command>,
    #[serde(rename = "N")]
    dim: Option<u32>,
    p: Option<f64>,
    q: Option<f64>,
    r: Option<f64>,
    mu: Option<f64>,
    sigma: Option<f64>,
    s: Option<f64>,
    tau_min: Option<f64>,
    tau_max: Option<f64>,
    n: Option<usize>,
    solid_angle: Option<SolidAngleField>,
    seed: Option<u64>,
    max_iters: Option<usize>,
    solver: Option<SolverOptions>,
    out: Option<PathBuf>,
    format: Option<Format>,
    trace: Option<bool>,
    profile: Option<PathBuf>,
    input: Option<PathBuf>,
    c: Option<f64>,
    samples: Option<usize>,
    ball_radius: Option<f64>,
}

/// Fully resolved run description.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    dim: Option<u32>,
    p: Option<f64>,
    q: Option<f64>,
    r: Option<f64>,
    mu: Option<f64>,
    sigma: Option<f64>,
    s: Option<f64>,
    tau_min: Option<f64>,
    tau_max: Option<f64>,
    n: Option<usize>,
    solid_angle: SolidAngle,
    pub solver: SolverOptions,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub trace: bool,
    pub profile: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub c: Option<f64>,
    pub samples: usize,
    ball_radius: Option<f64>,
}

const DEFAULT_N: usize = 2401;
const DEFAULT_EIGEN_N: usize = 2001;
const DEFAULT_SAMPLES: usize = 500;

fn parse_solid_angle(field: SolidAngleField) -> Result<SolidAngle, CliError> {
    match field {
        SolidAngleField::Value(v) => Ok(SolidAngle::Measure(v)),
        SolidAngleField::Word(w) if w.eq_ignore_ascii_case("full") => Ok(SolidAngle::Full),
        SolidAngleField::Word(w) => w
            .parse::<f64>()
            .map(SolidAngle::Measure)
            .map_err(|_| CliError::Malformed(format!("--solid-angle expects `full` or a number, got `{w}`"))),
    }
}

fn read_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Malformed(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Malformed(format!("config {}: {e}", path.display())))
}

impl RunConfig {
    pub fn resolve(cli: Cli) -> Result<Self, CliError> {
        let file = match &cli.config {
            Some(path) => read_file_config(path)?,
            None => FileConfig::default(),
        };
        let command = cli
            .command
            .or(file.command)
            .ok_or_else(|| CliError::Malformed("no command given".to_owned()))?;

        let mut solver = file.solver.unwrap_or_default();
        if let Some(seed) = cli.seed.or(file.seed) {
            solver.seed = seed;
        }
        if let Some(max_iters) = cli.max_iters.or(file.max_iters) {
            solver.max_iters = max_iters;
        }
        solver.validate().map_err(|e| CliError::Malformed(e.to_string()))?;

        let solid_angle = match cli.solid_angle.map(SolidAngleField::Word).or(file.solid_angle) {
            Some(field) => parse_solid_angle(field)?,
            None => SolidAngle::Full,
        };

        Ok(Self {
            command,
            dim: cli.dim.or(file.dim),
            p: cli.p.or(file.p),
            q: cli.q.or(file.q),
            r: cli.r.or(file.r),
            mu: cli.mu.or(file.mu),
            sigma: cli.sigma.or(file.sigma),
            s: cli.s.or(file.s),
            tau_min: cli.tau_min.or(file.tau_min),
            tau_max: cli.tau_max.or(file.tau_max),
            n: cli.n.or(file.n),
            solid_angle,
            solver,
            out: cli.out.or(file.out),
            format: cli.format.or(file.format),
            trace: cli.trace || file.trace.unwrap_or(false),
            profile: cli.profile.or(file.profile),
            input: cli.input.or(file.input),
            c: cli.c.or(file.c),
            samples: cli.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES),
            ball_radius: cli.ball_radius.or(file.ball_radius),
        })
    }

    fn missing(fields: &[(&str, bool)]) -> Result<(), CliError> {
        let missing: Vec<String> = fields
            .iter()
            .filter(|(_, present)| !present)
            .map(|(name, _)| format!("--{name}"))
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(CliError::Malformed(format!("missing {}", missing.join(", "))))
        }
    }

    pub fn params(&self) -> Result<CknParams, CliError> {
        Self::missing(&[
            ("N", self.dim.is_some()),
            ("p", self.p.is_some()),
            ("q", self.q.is_some()),
            ("r", self.r.is_some()),
            ("mu", self.mu.is_some()),
            ("sigma", self.sigma.is_some()),
            ("s", self.s.is_some()),
        ])?;
        Ok(CknParams::new(
            self.dim.unwrap(),
            self.p.unwrap(),
            self.q.unwrap(),
            self.r.unwrap(),
            self.mu.unwrap(),
            self.sigma.unwrap(),
            self.s.unwrap(),
        ))
    }

    pub fn eigen_problem(&self) -> Result<EigenProblem, CliError> {
        Self::missing(&[
            ("N", self.dim.is_some()),
            ("p", self.p.is_some()),
            ("q", self.q.is_some()),
            ("mu", self.mu.is_some()),
            ("sigma", self.sigma.is_some()),
        ])?;
        if self.tau_max.is_some() {
            return Err(CliError::Malformed(
                "--tau-max does not apply to eigen; the outer end is ln(--ball-radius)".to_owned(),
            ));
        }
        if self.solid_angle != SolidAngle::Full {
            return Err(CliError::Malformed("eigen is posed on a full ball".to_owned()));
        }
        let mut problem = EigenProblem::new(
            self.dim.unwrap(),
            self.p.unwrap(),
            self.q.unwrap(),
            self.mu.unwrap(),
            self.sigma.unwrap(),
            self.ball_radius.unwrap_or(1.0),
        );
        if let Some(tau_min) = self.tau_min {
            problem.tau_min = tau_min;
        }
        Ok(problem)
    }

    pub fn eigen_nodes(&self) -> usize {
        self.n.unwrap_or(DEFAULT_EIGEN_N)
    }

    /// Grid for the whole space in dimension `dim`.
    pub fn grid(&self, dim: u32) -> Result<RadialGrid, CliError> {
        RadialGrid::new(
            self.tau_min.unwrap_or(RadialGrid::DEFAULT_TAU_MIN),
            self.tau_max.unwrap_or(RadialGrid::DEFAULT_TAU_MAX),
            self.n.unwrap_or(DEFAULT_N),
            dim,
            self.solid_angle,
        )
        .map_err(|e| CliError::Malformed(e.to_string()))
    }

    /// Dimension for sweep grids; each row swaps in its own `N`.
    pub fn sweep_dim(&self) -> u32 {
        self.dim.unwrap_or(3)
    }
}
