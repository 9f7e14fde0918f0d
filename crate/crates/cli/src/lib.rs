//! Command-line front end for `lcval-core`.

pub mod commands;
pub mod output;
pub mod spec;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::{CheckOptions, CliError, Property, RunConfig};
use output::{Format, Report};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "LCVAL_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "lcval", version, about = "Layer-cake functionals and valuation checks on log-concave functions")]
pub struct Cli {
    /// Ambient dimension (2..=4).
    #[arg(long, global = true, default_value_t = 3)]
    pub dim: usize,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Pass/fail tolerance; each command has its own default.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Size of the direction net for support-function comparisons.
    #[arg(long, global = true, default_value_t = 200)]
    pub dirs: usize,
    /// Quadrature tolerance for layer-cake integrals.
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    /// Output file; defaults to `$LCVAL_OUT_DIR/<command>.<ext>` or stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Support values and moments of the simplices T_λ.
    Lemma21 {
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0, 3.0])]
        lambdas: Vec<f64>,
    },
    /// ∫ e^{−qℓ_{T_λ}} by quadrature against λ/qⁿ.
    VnCone {
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
        lambdas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
        qs: Vec<f64>,
    },
    /// Valuation identity, covariance and homogeneity checks.
    Check {
        /// Builtin name, `minkowski:c1,c2,c3,q`, `real:c0,cn,q` or a JSON spec file.
        spec: String,
        #[arg(long, value_delimiter = ',', value_enum)]
        properties: Vec<Property>,
        /// Certified pairs, split across the cone, indicator and mixed families.
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        /// Random SL(n) maps.
        #[arg(long, default_value_t = 50)]
        maps: usize,
        /// Generated test functions when the spec lists none.
        #[arg(long, default_value_t = 20)]
        functions: usize,
    },
    /// Recover the constants of a valuation from probes.
    Classify { spec: String },
    /// Limit experiments along the u_h families.
    Limits {
        spec: String,
        /// Defaults to 2^-1, ..., 2^-12.
        #[arg(long, value_delimiter = ',')]
        h_schedule: Vec<f64>,
    },
    /// Finite-difference check of the ζ/ψ relation.
    Zeta {
        spec: String,
        /// `start:end:step`.
        #[arg(long, default_value = "-1:3:0.25")]
        t_grid: String,
        #[arg(long, default_value_t = 1e-2)]
        step: f64,
    },
    /// List builtin valuation specs.
    Builtins,
}

impl Cli {
    pub fn config(&self) -> RunConfig {
        RunConfig {
            dim: self.dim,
            seed: self.seed,
            tol: self.tol,
            dirs: self.dirs,
            rel_tol: self.rel_tol,
        }
    }

    pub fn command_name(&self) -> &'static str {
        match self.command {
            Command::Lemma21 { .. } => "lemma21",
            Command::VnCone { .. } => "vn-cone",
            Command::Check { .. } => "check",
            Command::Classify { .. } => "classify",
            Command::Limits { .. } => "limits",
            Command::Zeta { .. } => "zeta",
            Command::Builtins => "builtins",
        }
    }

    /// Runs the selected command.
    pub fn run(&self) -> Result<Report, CliError> {
        let cfg = self.config();
        cfg.validate()?;
        match &self.command {
            Command::Lemma21 { lambdas } => commands::lemma21(&cfg, lambdas),
            Command::VnCone { lambdas, qs } => commands::vn_cone(&cfg, lambdas, qs),
            Command::Check {
                spec,
                properties,
                pairs,
                maps,
                functions,
            } => commands::check(
                &cfg,
                spec,
                &CheckOptions {
                    properties: properties.clone(),
                    pairs: *pairs,
                    maps: *maps,
                    functions: *functions,
                },
            ),
            Command::Classify { spec } => commands::classify(&cfg, spec),
            Command::Limits { spec, h_schedule } => {
                let schedule = if h_schedule.is_empty() {
                    commands::default_schedule()
                } else {
                    h_schedule.clone()
                };
                commands::limits(&cfg, spec, &schedule)
            }
            Command::Zeta { spec, t_grid, step } => {
                let grid = commands::parse_grid(t_grid).map_err(CliError::Usage)?;
                commands::zeta(&cfg, spec, &grid, *step)
            }
            Command::Builtins => {
                let mut s = output::Section::new("builtins", &["name", "valuation"]);
                for (k, v) in spec::BUILTINS {
                    s.push(vec![k.into(), v.into()]);
                }
                Ok(Report {
                    command: "builtins",
                    sections: vec![s],
                    pass: true,
                })
            }
        }
    }

    /// Where the report goes: `--out`, the output directory, or stdout.
    pub fn destination(&self) -> Option<PathBuf> {
        self.out.clone().or_else(|| {
            std::env::var_os(OUT_DIR_ENV)
                .filter(|d| !d.is_empty())
                .map(|d| PathBuf::from(d).join(format!("{}.{}", self.command_name(), self.format.extension())))
        })
    }
}
