//! Closed-form solutions of the unforced equation (`f = 0`).
//!
//! Every case starts from the three-exponential shift of [`p_general`] and runs
//! it through [`solve_chain`]; reference specializations are only compared.

use alloc::vec::Vec;

use crate::colehopf::{audit_grid, audit_printed, solve_chain, TransformBundle};
use crate::expr::{EvalError, Expr, ParamEnv};
use crate::odesolve::Grid;
use crate::params::VdpParams;
use crate::reference::{self, Printed};

/// `|U|` below this counts as zero when choosing a constant-potential basis.
pub const BASIS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KSign {
    Plus,
    Minus,
}

impl KSign {
    pub fn sign(self) -> f64 {
        match self {
            KSign::Plus => 1.0,
            KSign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum CatalogError {
    #[error("mu^2 beta^2 - 4 alpha = {k_squared} is negative; k would be complex")]
    ComplexK { k_squared: f64 },
    #[error("k = 0 needs alpha = mu^2 beta^2 / 4 = {expected}, got {alpha}")]
    KZeroInconsistent { alpha: f64, expected: f64 },
    #[error("this family needs alpha = 0, got {alpha}")]
    AlphaNonzero { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogConstants {
    pub c1: f64,
    pub c2: f64,
    /// Signed rate, `k^2 = mu^2 beta^2 - 4 alpha`.
    pub k: f64,
    /// `c1 + c2`.
    pub c: f64,
    /// `-U` for constant potentials, `NaN` otherwise.
    pub omega_sq: f64,
    /// `sqrt(U)` when the constant potential is positive, else 0.
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormSolution {
    pub bundle: TransformBundle,
    /// Two independent solutions of `phi'' = U phi`.
    pub basis: [Expr; 2],
    /// `C3 * basis[0] + C4 * basis[1]`.
    pub phi: Expr,
    pub constants: CatalogConstants,
}

impl ClosedFormSolution {
    fn new(bundle: TransformBundle, basis: [Expr; 2], constants: CatalogConstants) -> Self {
        let phi = (Expr::param("C3") * &basis[0] + Expr::param("C4") * &basis[1]).simplify();
        ClosedFormSolution { bundle, basis, phi, constants }
    }

    /// `phi` with `C3`, `C4` fixed.
    pub fn phi_with(&self, c3: f64, c4: f64) -> Expr {
        self.phi.substitute(&ParamEnv::new().with("C3", c3).with("C4", c4)).simplify()
    }

    /// `max |phi'' - U phi| / max(1, |phi|)` over both basis functions.
    pub fn basis_residual(&self, grid: &Grid) -> Result<f64, EvalError> {
        let env = self.bundle.env();
        let mut worst = 0.0f64;
        let u = self.bundle.u.compile(&env);
        for b in &self.basis {
            let d2 = b.diff().diff().compile(&env);
            let b = b.compile(&env);
            for x in grid.points() {
                let phi = b.eval(x)?;
                let r = d2.eval(x)? - u.eval(x)? * phi;
                worst = worst.max(r.abs() / phi.abs().max(1.0));
            }
        }
        Ok(worst)
    }
}

fn real_k(params: VdpParams) -> Result<f64, CatalogError> {
    let k_squared = params.k_squared();
    let m = params.mu_beta();
    if k_squared < -BASIS_TOL * (m * m).max(1.0) {
        return Err(CatalogError::ComplexK { k_squared });
    }
    Ok(libm::sqrt(k_squared.max(0.0)))
}

fn p_with_k(c1: f64, c2: f64, k: &Expr) -> Expr {
    let m = VdpParams::mu_expr() * VdpParams::beta_expr();
    let e = |rate: Expr| (rate * Expr::x() / 2.0).exp();
    let num =
        2.0 * Expr::c(c1) * &m * e(m.clone()) + Expr::c(c2) * (m.clone() + k) * e(k.clone()) + (m.clone() - k) * e(-k);
    let den = 4.0 * (Expr::c(c1) * e(m.clone()) + Expr::c(c2) * e(k.clone()) + e(-k));
    (num / den).simplify()
}

/// The general shift for which the chain yields `f = 0`.
pub fn p_general(params: VdpParams, c1: f64, c2: f64, k_sign: KSign) -> Result<Expr, CatalogError> {
    let k = k_sign.sign() * real_k(params)?;
    Ok(p_with_k(c1, c2, &Expr::c(k)))
}

/// Real basis of `phi'' = u phi` for constant `u`.
pub fn constant_basis(u: f64) -> [Expr; 2] {
    if u > BASIS_TOL {
        let nu = libm::sqrt(u);
        [(Expr::c(nu) * Expr::x()).exp(), (Expr::c(-nu) * Expr::x()).exp()]
    } else if u < -BASIS_TOL {
        let omega = libm::sqrt(-u);
        [(Expr::c(omega) * Expr::x()).cos(), (Expr::c(omega) * Expr::x()).sin()]
    } else {
        [Expr::one(), Expr::x()]
    }
}

fn audit(bundle: &mut TransformBundle, checks: &[(Printed, &Expr)], extra: &[(&str, f64)]) {
    let mut env = bundle.env();
    for (name, value) in extra {
        env.set(name, *value);
    }
    let mut ledger = core::mem::take(&mut bundle.ledger);
    audit_printed(&mut ledger, checks, &env, &audit_grid());
    bundle.ledger = ledger;
}

fn constant_case(
    p: Expr,
    params: VdpParams,
    constants: (f64, f64, f64),
    printed: [Printed; 5],
) -> Result<ClosedFormSolution, EvalError> {
    let (c1, c2, k) = constants;
    let mut bundle = solve_chain(&p, params);
    let u0 = bundle.u.eval(0.0, &bundle.env())?;
    let [pp, pu, pv, ph, pw] = printed;
    let (bp, bu, bv, bh) = (bundle.p.clone(), bundle.u.clone(), bundle.v.clone(), bundle.h.clone());
    let minus_u = (-&bu).simplify();
    audit(&mut bundle, &[(pp, &bp), (pu, &bu), (pv, &bv), (ph, &bh), (pw, &minus_u)], &[("k", k)]);
    let constants = CatalogConstants { c1, c2, k, c: c1 + c2, omega_sq: -u0, nu: libm::sqrt(u0.max(0.0)) };
    Ok(ClosedFormSolution::new(bundle, constant_basis(u0), constants))
}

/// `C1 = C2 = 0`: constant shift `(mu beta - k)/4` and constant potential.
pub fn case1(params: VdpParams, k_sign: KSign) -> Result<ClosedFormSolution, CatalogError> {
    let k = k_sign.sign() * real_k(params)?;
    let p = p_with_k(0.0, 0.0, &Expr::c(k));
    let printed =
        [reference::CASE1_P, reference::CASE1_U, reference::CASE1_V, reference::CASE1_H, reference::CASE1_OMEGA_SQ];
    Ok(constant_case(p, params, (0.0, 0.0, k), printed).expect("constant potential evaluates everywhere"))
}

/// `k = 0`, `C1 = 0`: requires `alpha = mu^2 beta^2 / 4`.
pub fn case2(params: VdpParams) -> Result<ClosedFormSolution, CatalogError> {
    let m = params.mu_beta();
    let expected = m * m / 4.0;
    if (params.alpha - expected).abs() > BASIS_TOL * expected.abs().max(1.0) {
        return Err(CatalogError::KZeroInconsistent { alpha: params.alpha, expected });
    }
    let p = p_with_k(0.0, 0.0, &Expr::zero());
    let printed =
        [reference::CASE2_P, reference::CASE2_U, reference::CASE2_V, reference::CASE2_H, reference::CASE2_OMEGA_SQ];
    Ok(constant_case(p, params, (0.0, 0.0, 0.0), printed).expect("constant potential evaluates everywhere"))
}

/// `alpha = 0` with `k = mu beta`; the shift is a logistic ramp
/// `c mu beta / (2 (c + exp(-mu beta x)))`.
pub fn case3(params: VdpParams, c: f64) -> Result<ClosedFormSolution, CatalogError> {
    if params.alpha.abs() > BASIS_TOL {
        return Err(CatalogError::AlphaNonzero { alpha: params.alpha });
    }
    let m = VdpParams::mu_expr() * VdpParams::beta_expr();
    let p = p_with_k(c, 0.0, &m);
    let mut bundle = solve_chain(&p, params);

    let c_env = ParamEnv::new().with("c", c);
    let basis = reference::CASE3_PHI.map(|b| b.expr().substitute(&c_env).simplify());
    // the basis is checked through phi'' against U phi
    let u_phi: Vec<Expr> = basis.iter().map(|b| (&bundle.u * b).simplify()).collect();
    let phi_pp: Vec<Expr> = basis.iter().map(|b| b.diff().diff()).collect();

    let (bp, bu, bv, bh) = (bundle.p.clone(), bundle.u.clone(), bundle.v.clone(), bundle.h.clone());
    audit(
        &mut bundle,
        &[(reference::CASE3_P, &bp), (reference::CASE3_U, &bu), (reference::CASE3_V, &bv), (reference::CASE3_H, &bh)],
        &[("c", c)],
    );
    let env = bundle.env();
    let xs = audit_grid().points();
    for i in 0..2 {
        let printed = reference::CASE3_PHI[i];
        bundle.ledger.check(printed.item, printed.text, &u_phi[i], &phi_pp[i], &env, &xs);
    }

    let constants = CatalogConstants { c1: c, c2: 0.0, k: params.mu_beta(), c, omega_sq: f64::NAN, nu: 0.0 };
    Ok(ClosedFormSolution::new(bundle, basis, constants))
}
