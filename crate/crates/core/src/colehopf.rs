//! The solve-for chain: from a shift `P` to the coefficient functions for which
//! `psi = P + phi'/phi`, `phi'' = U phi`, solves the perturbed Van der Pol
//! equation.

use alloc::format;
use alloc::vec::Vec;

use crate::expr::{Compiled, EvalError, Expr, ParamEnv};
use crate::ledger::DiscrepancyLedger;
use crate::odesolve::Grid;
use crate::params::VdpParams;
use crate::reference::{self, Printed};
use crate::wcalc::{reduce_vdp, CoeffSet, VdpTerms};

/// Largest `|a_i|` accepted by [`AnnihilationReport::passes`].
pub const ANNIHILATION_TOL: f64 = 1e-9;

/// Grid used for the printed-form checks made during construction.
pub fn audit_grid() -> Grid {
    Grid::new(0.0, 5.0, 1000).expect("static grid")
}

/// One linearizable instance
/// `psi'' = mu (beta - psi^2) psi' - alpha psi + v psi^2 + h psi^3 + g psi^4 + f`
/// together with its shift `P` and potential `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformBundle {
    pub p: Expr,
    pub u: Expr,
    pub g: Expr,
    pub h: Expr,
    pub v: Expr,
    pub f: Expr,
    pub params: VdpParams,
    pub ledger: DiscrepancyLedger,
}

impl TransformBundle {
    /// Assembles a bundle without solving anything, e.g. for deliberately
    /// inconsistent instances.
    pub fn raw(params: VdpParams, p: Expr, u: Expr, g: Expr, h: Expr, v: Expr, f: Expr) -> Self {
        TransformBundle { p, u, g, h, v, f, params, ledger: DiscrepancyLedger::new() }
    }

    pub fn env(&self) -> ParamEnv {
        self.params.env()
    }

    pub fn terms(&self) -> VdpTerms {
        VdpTerms { v: self.v.clone(), h: self.h.clone(), g: self.g.clone(), f: self.f.clone() }
    }

    /// `a_0 .. a_4` of the reduced polynomial in `w = phi'/phi`.
    pub fn coefficients(&self) -> CoeffSet {
        reduce_vdp(&self.p, &self.u, &self.terms())
    }

    /// `P + phi'/phi` for a closed-form `phi`.
    pub fn psi(&self, phi: &Expr) -> Expr {
        (&self.p + phi.diff() / phi).simplify()
    }

    /// The same bundle with `mu`, `beta`, `alpha` replaced by their values;
    /// cheaper to evaluate repeatedly.
    pub fn bound(&self) -> TransformBundle {
        let env = self.env();
        let bind = |e: &Expr| e.substitute(&env).simplify();
        TransformBundle {
            p: bind(&self.p),
            u: bind(&self.u),
            g: bind(&self.g),
            h: bind(&self.h),
            v: bind(&self.v),
            f: bind(&self.f),
            params: self.params,
            ledger: self.ledger.clone(),
        }
    }
}

fn zero_terms() -> VdpTerms {
    VdpTerms { v: Expr::zero(), h: Expr::zero(), g: Expr::zero(), f: Expr::zero() }
}

/// Solves the annihilation conditions for `g, h, v, U, f` given the shift `P`.
///
/// Each of `g, h, v, f` enters exactly one coefficient with weight `-1` once
/// the higher ones are fixed, so it is read off the reduced polynomial with
/// that unknown set to zero. `U` comes from eliminating `v` between `a_2` and
/// `a_1`. The closed form of `f` in terms of `P` alone is then compared
/// against the derived one on [`audit_grid`] and recorded in the ledger.
pub fn solve_chain(p: &Expr, params: VdpParams) -> TransformBundle {
    let p = p.simplify();
    let mb = VdpParams::mu_expr() * VdpParams::beta_expr();
    let u = (3.0 * p.clone().powi(2) - mb * &p + VdpParams::alpha_expr() / 2.0).simplify();

    let mut t = zero_terms();
    t.g = reduce_vdp(&p, &u, &t).get(4).clone();
    t.h = reduce_vdp(&p, &u, &t).get(3).clone();
    t.v = reduce_vdp(&p, &u, &t).get(2).clone();
    t.f = reduce_vdp(&p, &u, &t).get(0).clone();

    let mut bundle = TransformBundle::raw(params, p, u, t.g, t.h, t.v, t.f);
    let xs = audit_grid().points();
    let printed_f = reference::f_chain(&bundle.p);
    let env = bundle.env();
    bundle.ledger.check("f", reference::F_CHAIN_TEXT, &bundle.f, &printed_f, &env, &xs);
    bundle
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `P = s`
    Plus,
    /// `P = -s + mu beta / 3`
    Minus,
}

/// Builds the bundle whose potential is `U = 3 s^2 - mu beta s + alpha/2` for
/// a seed `s`, choosing `P` by `branch`. The ledger records whether the
/// derived `U` actually has that form.
pub fn seeded_construction(s: &Expr, params: VdpParams, branch: Branch) -> TransformBundle {
    let p = match branch {
        Branch::Plus => s.clone(),
        Branch::Minus => -s + VdpParams::mu_expr() * VdpParams::beta_expr() / 3.0,
    };
    let mut bundle = solve_chain(&p, params);
    let xs = audit_grid().points();
    let env = bundle.env();
    let claimed = reference::seeded_u(s);
    let item = match branch {
        Branch::Plus => "seeded.plus.U",
        Branch::Minus => "seeded.minus.U",
    };
    bundle.ledger.check(item, reference::SEEDED_U_TEXT, &bundle.u, &claimed, &env, &xs);
    bundle
}

/// Compares `U` and `f` of a bundle seeded with `s = a x` against the
/// reference forms for that seed.
pub fn example1_audit(bundle: &TransformBundle, a: f64, grid: &Grid) -> DiscrepancyLedger {
    let env = bundle.env().with("a", a);
    let xs = grid.points();
    let mut ledger = DiscrepancyLedger::new();
    for (printed, derived) in [(reference::EXAMPLE1_U, &bundle.u), (reference::EXAMPLE1_F, &bundle.f)] {
        ledger.check(printed.item, printed.text, derived, &printed.expr(), &env, &xs);
    }
    ledger
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnihilationReport {
    /// `max |a_i(x)|` over the grid, indexed by `i`.
    pub max_abs: [f64; 5],
    pub worst_x: [f64; 5],
    pub points: usize,
}

impl AnnihilationReport {
    pub fn max(&self) -> f64 {
        self.max_abs.iter().copied().fold(0.0, f64::max)
    }

    pub fn passes(&self) -> bool {
        self.max() <= ANNIHILATION_TOL
    }
}

/// Evaluates the reduced coefficients on every grid point. A point where the
/// bundle cannot be evaluated is an error.
pub fn verify_annihilation(bundle: &TransformBundle, grid: &Grid) -> Result<AnnihilationReport, EvalError> {
    let env = bundle.env();
    let coeffs: Vec<Compiled> = bundle.bound().coefficients().iter().map(|a| a.compile(&env)).collect();
    let mut max_abs = [0.0f64; 5];
    let mut worst_x = [grid.x0; 5];
    let xs = grid.points();
    for &x in &xs {
        for (i, a) in coeffs.iter().enumerate() {
            let val = a.eval(x)?.abs();
            if val > max_abs[i] {
                max_abs[i] = val;
                worst_x[i] = x;
            }
        }
    }
    Ok(AnnihilationReport { max_abs, worst_x, points: xs.len() })
}

/// Compares the derived `a_0 .. a_4` with their reference closed forms for the
/// bundle's functions.
pub fn verify_printed_coeffs(bundle: &TransformBundle, grid: &Grid) -> DiscrepancyLedger {
    let derived = bundle.coefficients();
    let printed = reference::coeffs(&bundle.p, &bundle.u, &bundle.v, &bundle.h, &bundle.g, &bundle.f);
    let texts = [reference::A0_TEXT, reference::A1_TEXT, reference::A2_TEXT, reference::A3_TEXT, reference::A4_TEXT];
    let env = bundle.env();
    let xs = grid.points();
    let mut ledger = DiscrepancyLedger::new();
    for i in 0..5 {
        ledger.check(&format!("a{i}"), texts[i], derived.get(i), &printed[i], &env, &xs);
    }
    ledger
}

/// Checks a list of reference forms against derived expressions with extra
/// constants bound.
pub(crate) fn audit_printed(ledger: &mut DiscrepancyLedger, checks: &[(Printed, &Expr)], env: &ParamEnv, grid: &Grid) {
    let xs = grid.points();
    for (printed, derived) in checks {
        ledger.check(printed.item, printed.text, derived, &printed.expr(), env, &xs);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn grid() -> Grid {
        Grid::new(0.5, 5.0, 200).unwrap()
    }

    #[test]
    fn zero_shift_instance() {
        let params = VdpParams::new(1.0, 2.0, 0.0);
        let b = solve_chain(&Expr::zero(), params);
        let env = b.env();
        for x in [0.3, 1.0, 4.0] {
            assert_eq!(b.g.eval(x, &env).unwrap(), -1.0);
            assert_eq!(b.h.eval(x, &env).unwrap(), 2.0);
            assert_eq!(b.u.eval(x, &env).unwrap(), 0.0);
            assert_eq!(b.v.eval(x, &env).unwrap(), 2.0);
            assert_eq!(b.f.eval(x, &env).unwrap(), 0.0);
        }
        assert!(verify_annihilation(&b, &grid()).unwrap().passes());
    }

    #[test]
    fn constant_shift_has_zero_forcing_on_the_family() {
        // k = 1 for mu = 2, beta = 1, alpha = 0.75
        let params = VdpParams::new(2.0, 1.0, 0.75);
        let b = solve_chain(&Expr::c(0.25), params);
        let env = b.env();
        assert!(b.f.eval(1.0, &env).unwrap().abs() < 1e-15);
        assert!((b.u.eval(1.0, &env).unwrap() - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn chain_closed_forms() {
        let params = VdpParams::new(0.7, -1.3, 0.4);
        let p = parse("sin(x) + x^2/5").unwrap();
        let b = solve_chain(&p, params);
        let env = b.env();
        let (mu, mb) = (params.mu, params.mu_beta());
        let dp = p.diff();
        for x in [0.0, 0.8, 2.5] {
            let pv = p.eval(x, &env).unwrap();
            let dpv = dp.eval(x, &env).unwrap();
            let uv = b.u.eval(x, &env).unwrap();
            assert_eq!(b.g.eval(x, &env).unwrap(), -mu);
            assert!((b.h.eval(x, &env).unwrap() - 2.0 * (mu * pv + 1.0)).abs() < 1e-12);
            let v_want = mu * dpv + mu * uv - (mu * pv + 6.0) * pv + mb;
            assert!((b.v.eval(x, &env).unwrap() - v_want).abs() < 1e-12);
            assert!((uv - (3.0 * pv * pv - mb * pv + params.alpha / 2.0)).abs() < 1e-12);
        }
        assert!(verify_annihilation(&b, &grid()).unwrap().passes());
        assert!(b.ledger.get("f").unwrap().agrees);
    }

    #[test]
    fn shifted_quartic_coefficient_is_reported() {
        let params = VdpParams::new(1.5, 0.5, 0.2);
        let mut b = solve_chain(&parse("x/3").unwrap(), params);
        b.g = &b.g + 0.1;
        let r = verify_annihilation(&b, &grid()).unwrap();
        assert!((r.max_abs[4] - 0.1).abs() < 1e-12);
        assert!(!r.passes());
    }

    #[test]
    fn singular_points_are_errors() {
        let b = solve_chain(&parse("1/(x - 1)").unwrap(), VdpParams::new(1.0, 1.0, 0.0));
        let g = Grid::new(0.0, 2.0, 3).unwrap();
        assert!(verify_annihilation(&b, &g).is_err());
    }

    #[test]
    fn printed_coefficients_agree_with_engine() {
        let params = VdpParams::new(1.1, 0.9, -0.3);
        let mut b = solve_chain(&parse("cos(x)/2").unwrap(), params);
        // perturb every function so the check is not trivially 0 = 0
        b.v = &b.v + parse("x").unwrap();
        b.h = &b.h - 0.3;
        b.g = &b.g * 2.0;
        b.f = &b.f + parse("sin(x)").unwrap();
        let l = verify_printed_coeffs(&b, &grid());
        assert_eq!(l.len(), 5);
        for e in l.iter() {
            assert!(e.agrees, "{e:?}");
        }
    }

    #[test]
    fn seeded_plus_matches_chain() {
        let params = VdpParams::new(0.8, 1.2, 0.5);
        let s = parse("tan(x)").unwrap();
        let a = seeded_construction(&s, params, Branch::Plus);
        let b = solve_chain(&s, params);
        assert_eq!((&a.p, &a.u, &a.f), (&b.p, &b.u, &b.f));
        assert!(a.ledger.get("seeded.plus.U").unwrap().agrees);
    }

    #[test]
    fn seeded_minus_has_the_same_potential() {
        let params = VdpParams::new(0.8, 1.2, 0.5);
        let a = seeded_construction(&parse("x/2").unwrap(), params, Branch::Minus);
        assert!(a.ledger.get("seeded.minus.U").unwrap().agrees);
        assert!(verify_annihilation(&a, &grid()).unwrap().passes());
    }

    #[test]
    fn psi_from_phi() {
        let b = solve_chain(&Expr::zero(), VdpParams::new(1.0, 2.0, 0.0));
        let psi = b.psi(&Expr::x());
        assert!((psi.eval(4.0, &b.env()).unwrap() - 0.25).abs() < 1e-15);
    }
}
