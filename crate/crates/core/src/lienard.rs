//! Polynomial Lienard equations
//! `psi'' + (c0 + c1 psi + c2 psi^2) psi' + (b0 + b1 psi + ... + b4 psi^4) = 0`
//! that the same transformation linearizes.

use alloc::format;

use crate::expr::{Expr, ParamEnv};
use crate::ledger::DiscrepancyLedger;
use crate::odesolve::{lienard_residual, linearize, Grid, OdeError, ResidualReport, SolveOptions, Trajectory};
use crate::params::VdpParams;
use crate::reference;
use crate::wcalc::{lienard_base, psi_poly, reduce_lienard, CoeffSet, WPoly};

#[derive(Debug, Clone, PartialEq)]
pub struct LienardSpec {
    /// Damping coefficients `c0, c1, c2`.
    pub c: [Expr; 3],
    /// Restoring coefficients `b0 .. b4`.
    pub b: [Expr; 5],
    pub p: Expr,
    pub u: Expr,
    pub ledger: DiscrepancyLedger,
}

impl LienardSpec {
    /// `a_0 .. a_4` after substituting `psi = P + w`.
    pub fn coefficients(&self) -> CoeffSet {
        reduce_lienard(&self.p, &self.u, &self.c, &self.b)
    }

    /// Records the reference forms of `b0 .. b4` against the derived ones.
    pub fn audit(&mut self, env: &ParamEnv, grid: &Grid) {
        let printed = reference::lienard_b(&self.c, &self.p, &self.u);
        let xs = grid.points();
        for (i, (derived, printed)) in self.b.iter().zip(&printed).enumerate() {
            self.ledger.check(&format!("lienard.b{i}"), reference::LIENARD_TEXT[i], derived, printed, env, &xs);
        }
    }
}

/// Solves `a_4 = ... = a_0 = 0` for the restoring coefficients.
///
/// `b_i` only reaches `a_j` for `j <= i`, with unit weight on `a_i`, so the
/// system is triangular and is solved from `b_4` down.
pub fn lienard_coeffs(c: &[Expr; 3], p: &Expr, u: &Expr) -> LienardSpec {
    let base = lienard_base(p, u, c);
    let psi = psi_poly(p);
    let powers: [WPoly; 5] = core::array::from_fn(|i| psi.pow(i as u32));
    let mut b: [Expr; 5] = core::array::from_fn(|_| Expr::zero());
    for j in (0..5).rev() {
        let mut sum = base.coeff(j);
        for i in j + 1..5 {
            sum = sum + &b[i] * powers[i].coeff(j);
        }
        b[j] = (-sum).simplify();
    }
    LienardSpec { c: c.clone(), b, p: p.clone(), u: u.clone(), ledger: DiscrepancyLedger::new() }
}

/// `P^2 - P'`: the potential that removes `b_0` for every damping.
pub fn riccati_u(p: &Expr) -> Expr {
    (p.clone().powi(2) - p.diff()).simplify()
}

/// Damping coefficients under which the family contains the unforced Van der
/// Pol equation: `c = (-mu beta, 0, mu)`. With `U` from the chain the
/// restoring coefficients then come out as `b = (-f, alpha, -v, -h, -g)`.
pub fn vdp_damping() -> [Expr; 3] {
    let mu = VdpParams::mu_expr();
    [(-(mu.clone() * VdpParams::beta_expr())).simplify(), Expr::zero(), mu]
}

/// The Lienard counterpart of a Van der Pol instance.
pub fn vdp_embedding(p: &Expr, u: &Expr) -> LienardSpec {
    lienard_coeffs(&vdp_damping(), p, u)
}

/// Result of [`build_lienard`].
#[derive(Debug, Clone, PartialEq)]
pub struct LienardRun {
    pub spec: LienardSpec,
    pub phi: Trajectory,
    pub psi: Trajectory,
    pub residual: ResidualReport,
}

/// Coefficients, numerical `phi`, mapped `psi` and the Lienard residual of
/// `psi`. The ledger is filled on `opts.grid`.
pub fn build_lienard(
    c: &[Expr; 3],
    p: &Expr,
    u: &Expr,
    env: &ParamEnv,
    opts: &SolveOptions,
) -> Result<LienardRun, OdeError> {
    let mut spec = lienard_coeffs(c, p, u);
    spec.audit(env, &opts.grid);
    let (phi, psi) = linearize(p, u, env, opts)?;
    let bind = |e: &Expr| e.substitute(env).simplify();
    let cb = spec.c.each_ref().map(bind);
    let bb = spec.b.each_ref().map(bind);
    let residual = lienard_residual(&cb, &bb, &psi, env, opts.guard_tol)?;
    Ok(LienardRun { spec, phi, psi, residual })
}
