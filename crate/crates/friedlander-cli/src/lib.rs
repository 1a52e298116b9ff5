//! Command-line front end: scans, CSV tables and JSON reports.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use friedlander::parametrix::NWindow;
use friedlander::verify::Kernel;
use friedlander::Sign;
use serde::Serialize;

pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(friedlander::Error),
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

impl From<friedlander::Error> for CliError {
    fn from(e: friedlander::Error) -> Self {
        use friedlander::Error as E;
        match e {
            E::NonConvergence { .. } | E::NotFinite(_) => CliError::Numerical(e),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 3,
            _ => 2,
        }
    }

    /// Machine-readable diagnostic for numerical failures.
    pub fn diagnostic(&self) -> Option<String> {
        #[derive(Serialize)]
        struct Diag<'a> {
            error: &'a str,
            message: String,
            partial_re: Option<f64>,
            partial_im: Option<f64>,
            err_estimate: Option<f64>,
            evaluations: Option<u64>,
        }
        let CliError::Numerical(e) = self else { return None };
        let mut d = Diag {
            error: "numerical",
            message: e.to_string(),
            partial_re: None,
            partial_im: None,
            err_estimate: None,
            evaluations: None,
        };
        if let friedlander::Error::NonConvergence { partial, err_estimate, evaluations } = e {
            d.error = "non_convergence";
            d.partial_re = Some(partial.re);
            d.partial_im = Some(partial.im);
            d.err_estimate = Some(*err_estimate);
            d.evaluations = Some(*evaluations);
        }
        serde_json::to_string(&d).ok()
    }
}

#[derive(Debug, Parser)]
#[command(name = "friedlander", version, about = "Frequency-localised wave kernels in the Friedlander half-plane")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print the merged configuration and exit.
    #[arg(long, global = true)]
    pub dump_config: bool,
    /// Worker threads (0: one per logical core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Primary output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Secondary JSON report for commands whose primary output is CSV.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Semiclassical scale h.
    #[arg(long, global = true)]
    pub h: Option<f64>,
    /// Tangency band γ.
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Source distance a from the boundary.
    #[arg(long, global = true)]
    pub a: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Airy zeros ω_k and L'(ω_k) as CSV.
    AiryTable {
        #[arg(long)]
        kmax: Option<usize>,
    },
    /// Airy–Poisson summation against a bump at ω_center.
    PoissonCheck {
        #[arg(long)]
        center: Option<usize>,
        #[arg(long)]
        width: Option<f64>,
        #[arg(long)]
        nmax: Option<u32>,
        #[arg(long)]
        kmax: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// G± at a tensor grid of points, by either or both paths.
    GreenEval {
        #[arg(long, value_parser = parse_sign)]
        sign: Option<Sign>,
        #[arg(long, value_enum)]
        path: Option<config::PathChoice>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        t: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y: Option<Vec<f64>>,
        #[arg(long, value_parser = config::parse_window)]
        window: Option<NWindow>,
    },
    /// Reflection sum against mode sum on the default grid.
    ComparePaths {
        #[arg(long, value_parser = parse_sign)]
        sign: Option<Sign>,
        #[arg(long)]
        nt: Option<usize>,
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        ny: Option<usize>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long, value_parser = config::parse_window)]
        window: Option<NWindow>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// sup_{x,y}|G| over log-spaced t with a slope fit.
    DispersionScan {
        #[arg(long, value_parser = parse_kernel)]
        kernel: Option<Kernel>,
        #[arg(long)]
        t_min: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        per_decade: Option<usize>,
        #[arg(long)]
        fit_min: Option<f64>,
        #[arg(long)]
        fit_max: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        expected_slope: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// max|W_N|/envelope for one proposition's bound.
    EnvelopeReport {
        #[arg(long)]
        prop: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        n: Option<i64>,
        #[arg(long)]
        nt: Option<usize>,
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        dy: Option<f64>,
        #[arg(long)]
        stability: bool,
        #[arg(long)]
        dump: Option<String>,
    },
    /// sup|G| in t around the swallowtail times 4N√a√(1+a).
    CausticScan {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        n: Option<Vec<i64>>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        nt: Option<usize>,
    },
    /// Discretised L^q_t L^∞_{x,y} norm of G.
    StrichartzScan {
        #[arg(long, value_parser = parse_kernel)]
        kernel: Option<Kernel>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        t_min: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        nt: Option<usize>,
    },
    /// Per-mode Strichartz, Γ and w_k constants over a k range.
    GalleryScan {
        #[arg(long = "gallery-h")]
        gallery_h: Option<f64>,
        #[arg(long)]
        k_min: Option<usize>,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long)]
        max_spread: Option<f64>,
    },
}

fn parse_sign(s: &str) -> Result<Sign, String> {
    match s {
        "plus" | "+" => Ok(Sign::Plus),
        "minus" | "-" => Ok(Sign::Minus),
        _ => Err(format!("sign must be plus or minus, got `{s}`")),
    }
}

fn parse_kernel(s: &str) -> Result<Kernel, String> {
    match s {
        "plus" => Ok(Kernel::Plus),
        "minus" => Ok(Kernel::Minus),
        "cos" => Ok(Kernel::Cos),
        _ => Err(format!("kernel must be plus, minus or cos, got `{s}`")),
    }
}

macro_rules! set {
    ($dst:expr, some $src:expr) => {
        if let Some(v) = $src {
            $dst = Some(v);
        }
    };
    ($dst:expr, $src:expr) => {
        if let Some(v) = $src {
            $dst = v;
        }
    };
}

/// Defaults, then the config file, then flags.
pub fn merged_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut c = match &cli.global.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let g = &cli.global;
    set!(c.threads, g.threads);
    set!(c.model.h, g.h);
    set!(c.model.gamma, g.gamma);
    set!(c.model.a, g.a);
    match &cli.command {
        Command::AiryTable { kmax } => set!(c.airy_table.kmax, *kmax),
        Command::PoissonCheck { center, width, nmax, kmax, tol } => {
            let p = &mut c.poisson;
            set!(p.center, *center);
            set!(p.width, *width);
            set!(p.nmax, *nmax);
            set!(p.kmax, *kmax);
            set!(p.tol, *tol);
        }
        Command::GreenEval { sign, path, t, x, y, window } => {
            let p = &mut c.green;
            set!(p.sign, *sign);
            set!(p.path, *path);
            set!(p.t, t.clone());
            set!(p.x, x.clone());
            set!(p.y, y.clone());
            set!(p.window, *window);
        }
        Command::ComparePaths { sign, nt, nx, ny, t_max, window, tol } => {
            let p = &mut c.compare;
            set!(p.sign, *sign);
            set!(p.nt, *nt);
            set!(p.nx, *nx);
            set!(p.ny, *ny);
            set!(p.t_max, *t_max);
            set!(p.window, *window);
            set!(p.tol, *tol);
        }
        Command::DispersionScan { kernel, t_min, t_max, per_decade, fit_min, fit_max, expected_slope, tol } => {
            let p = &mut c.dispersion;
            set!(p.kernel, *kernel);
            set!(p.t_min, some *t_min);
            set!(p.t_max, some *t_max);
            set!(p.per_decade, *per_decade);
            set!(p.fit_min, some *fit_min);
            set!(p.fit_max, some *fit_max);
            set!(p.expected_slope, *expected_slope);
            set!(p.tol, *tol);
        }
        Command::EnvelopeReport { prop, n, nt, nx, dy, stability, dump } => {
            let p = &mut c.envelope;
            set!(p.prop, prop.clone());
            set!(p.n, *n);
            set!(p.nt, *nt);
            set!(p.nx, *nx);
            set!(p.dy, some *dy);
            if *stability {
                p.stability = true;
            }
            set!(p.dump, some dump.clone());
        }
        Command::CausticScan { n, t_max, nt } => {
            let p = &mut c.caustic;
            set!(p.n, n.clone());
            set!(p.t_max, some *t_max);
            set!(p.nt, *nt);
        }
        Command::StrichartzScan { kernel, q, t_min, t_max, nt } => {
            let p = &mut c.strichartz;
            set!(p.kernel, *kernel);
            set!(p.q, *q);
            set!(p.t_min, *t_min);
            set!(p.t_max, some *t_max);
            set!(p.nt, *nt);
        }
        Command::GalleryScan { gallery_h, k_min, k_max, max_spread } => {
            let p = &mut c.gallery;
            set!(p.h, some *gallery_h);
            set!(p.k_min, *k_min);
            set!(p.k_max, *k_max);
            set!(p.max_spread, *max_spread);
        }
    }
    c.model.params()?;
    Ok(c)
}

/// Runs the parsed command; Ok(false) when a PASS flag came out false.
pub fn run(cli: &Cli) -> Result<bool, CliError> {
    let cfg = merged_config(cli)?;
    if cli.global.dump_config {
        output::emit(cli.global.out.as_deref(), cfg.to_toml().as_bytes())?;
        return Ok(true);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    pool.install(|| commands::dispatch(&cli.command, &cfg, &cli.global))
}
