use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "vdp", version, about = "Linearizable perturbed Van der Pol and Lienard equations")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sign {
    Plus,
    Minus,
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, global = true, default_value_t = 1.0, allow_negative_numbers = true)]
    pub mu: f64,
    #[arg(long, global = true, default_value_t = 1.0, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,

    #[arg(long, global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x0: f64,
    #[arg(long, global = true, default_value_t = 5.0, allow_negative_numbers = true)]
    pub x1: f64,
    #[arg(long, global = true, default_value_t = 501)]
    pub n: usize,

    #[arg(long, global = true, env = "VDP_RTOL", default_value_t = 1e-9)]
    pub rtol: f64,
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub atol: f64,
    #[arg(long = "pole-tol", global = true, default_value_t = vdp_core::odesolve::DEFAULT_POLE_TOL)]
    pub pole_tol: f64,
    #[arg(long = "guard-tol", global = true, default_value_t = vdp_core::odesolve::DEFAULT_GUARD_TOL)]
    pub guard_tol: f64,

    /// Initial value of phi for numerically integrated pipelines.
    #[arg(long, global = true, default_value_t = 1.0, allow_negative_numbers = true)]
    pub phi0: f64,
    /// Initial slope of phi for numerically integrated pipelines.
    #[arg(long, global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    pub dphi0: f64,

    #[arg(id = "C1", long = "C1", global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    pub c1: f64,
    #[arg(id = "C2", long = "C2", global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    pub c2: f64,
    /// Weights of the two closed-form basis functions in phi.
    #[arg(id = "C3", long = "C3", global = true, default_value_t = 1.0, allow_negative_numbers = true)]
    pub c3: f64,
    #[arg(id = "C4", long = "C4", global = true, default_value_t = 1.0, allow_negative_numbers = true)]
    pub c4: f64,
    #[arg(long, global = true, default_value_t = 1.0, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, global = true, default_value_t = 1.0, allow_negative_numbers = true)]
    pub c: f64,

    /// Directory for the written artifacts.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Trajectory file format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Constant shift with C1 = C2 = 0.
    Case1 {
        #[arg(long = "k-sign", value_enum, default_value_t = Sign::Plus)]
        k_sign: Sign,
    },
    /// Constant shift with k = 0; needs alpha = mu^2 beta^2 / 4.
    Case2,
    /// Logistic shift with alpha = 0; the ramp constant is --c.
    Case3,
    /// Runs the chain on an arbitrary shift P.
    Custom {
        #[arg(long = "P", allow_hyphen_values = true)]
        p: String,
    },
    /// Builds the instance whose potential is 3 s^2 - mu beta s + alpha/2.
    Seeded {
        #[arg(long, allow_hyphen_values = true, default_value = "a*x")]
        s: String,
        #[arg(long, value_enum, default_value_t = Sign::Plus)]
        branch: Sign,
    },
    /// Polynomial Lienard equation with damping c0 + c1 psi + c2 psi^2.
    Lienard(LienardArgs),
    /// Re-checks a stored bundle.
    Verify {
        #[arg(long)]
        bundle: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct LienardArgs {
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub c0: String,
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub c1: String,
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub c2: String,
    #[arg(long = "P", allow_hyphen_values = true)]
    pub p: String,
    #[arg(long = "U", allow_hyphen_values = true, conflicts_with = "riccati", required_unless_present = "riccati")]
    pub u: Option<String>,
    /// Use U = P^2 - P' and require b0 to vanish.
    #[arg(long)]
    pub riccati: bool,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Case1 { .. } => "case1",
            Command::Case2 => "case2",
            Command::Case3 => "case3",
            Command::Custom { .. } => "custom",
            Command::Seeded { .. } => "seeded",
            Command::Lienard(_) => "lienard",
            Command::Verify { .. } => "verify",
        }
    }
}
