use crate::expr::{Expr, ParamEnv};

/// Parameter names under which the scalar triple appears in expressions.
pub const MU: &str = "mu";
pub const BETA: &str = "beta";
pub const ALPHA: &str = "alpha";

/// The scalar triple of the (perturbed) Van der Pol equation
/// `psi'' = mu*(beta - psi^2)*psi' - alpha*psi + ...`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VdpParams {
    pub mu: f64,
    pub beta: f64,
    pub alpha: f64,
}

impl VdpParams {
    pub fn new(mu: f64, beta: f64, alpha: f64) -> Self {
        Self { mu, beta, alpha }
    }

    pub fn mu_beta(&self) -> f64 {
        self.mu * self.beta
    }

    /// `mu^2 beta^2 - 4 alpha`, the square of the rate `k` in the unforced family.
    pub fn k_squared(&self) -> f64 {
        let m = self.mu_beta();
        m * m - 4.0 * self.alpha
    }

    /// Environment binding `mu`, `beta` and `alpha`.
    pub fn env(&self) -> ParamEnv {
        ParamEnv::new().with(MU, self.mu).with(BETA, self.beta).with(ALPHA, self.alpha)
    }

    pub fn mu_expr() -> Expr {
        Expr::param(MU)
    }

    pub fn beta_expr() -> Expr {
        Expr::param(BETA)
    }

    pub fn alpha_expr() -> Expr {
        Expr::param(ALPHA)
    }
}
