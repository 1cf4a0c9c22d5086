//! Polynomials in `w = phi'/phi` with expression coefficients.
//!
//! Along solutions of `phi'' = U phi` the logarithmic derivative obeys
//! `w' = U - w^2`, so the x-derivative of any polynomial in `w` is again a
//! polynomial in `w`. Substituting `psi = P + w` into a polynomial second-order
//! equation therefore reduces it mechanically to `sum a_i(x) w^i = 0`.

use alloc::vec;
use alloc::vec::Vec;

use crate::expr::simplify::{add, mul, neg, sub};
use crate::expr::{EvalError, Expr, ParamEnv};
use crate::params::VdpParams;

/// Polynomial in `w`; `coeffs[i]` multiplies `w^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct WPoly {
    coeffs: Vec<Expr>,
}

impl WPoly {
    /// Degree bound for any intermediate polynomial. Second-order equations
    /// with at most quartic nonlinearities never exceed 4.
    pub const MAX_DEGREE: usize = 6;

    pub fn new(coeffs: Vec<Expr>) -> Self {
        let mut p = WPoly { coeffs: coeffs.iter().map(Expr::simplify).collect() };
        p.trim();
        p
    }

    pub fn constant(c: Expr) -> Self {
        WPoly::new(vec![c])
    }

    pub fn zero() -> Self {
        WPoly { coeffs: Vec::new() }
    }

    /// The polynomial `w`.
    pub fn w() -> Self {
        WPoly::new(vec![Expr::zero(), Expr::one()])
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(Expr::Const(v)) if *v == 0.0) {
            self.coeffs.pop();
        }
        assert!(
            self.coeffs.len() <= Self::MAX_DEGREE + 1,
            "w-polynomial degree {} exceeds the internal cap {}",
            self.coeffs.len() - 1,
            Self::MAX_DEGREE
        );
    }

    /// Degree, with the zero polynomial reported as 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Expr {
        self.coeffs.get(i).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn add(&self, other: &WPoly) -> WPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        WPoly::new((0..n).map(|i| add(self.coeff(i), other.coeff(i))).collect())
    }

    pub fn sub(&self, other: &WPoly) -> WPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        WPoly::new((0..n).map(|i| sub(self.coeff(i), other.coeff(i))).collect())
    }

    pub fn neg(&self) -> WPoly {
        WPoly::new(self.coeffs.iter().cloned().map(neg).collect())
    }

    /// Multiplies every coefficient by the function `c(x)`.
    pub fn scale(&self, c: &Expr) -> WPoly {
        WPoly::new(self.coeffs.iter().map(|a| mul(c.clone(), a.clone())).collect())
    }

    pub fn mul(&self, other: &WPoly) -> WPoly {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return WPoly::zero();
        }
        let n = self.coeffs.len() + other.coeffs.len() - 1;
        let mut out = vec![Expr::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                let term = mul(a.clone(), b.clone());
                out[i + j] = add(core::mem::replace(&mut out[i + j], Expr::zero()), term);
            }
        }
        WPoly::new(out)
    }

    pub fn pow(&self, n: u32) -> WPoly {
        (0..n).fold(WPoly::constant(Expr::one()), |acc, _| acc.mul(self))
    }

    /// Evaluates at `(x, w)`.
    pub fn eval(&self, x: f64, w: f64, env: &ParamEnv) -> Result<f64, EvalError> {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * w + c.eval(x, env)?;
        }
        Ok(acc)
    }

    /// The x-derivative along solutions of `phi'' = U phi`.
    pub fn derive(&self, u: &Expr) -> WPoly {
        w_derive(self, u)
    }
}

/// `psi = P + w` as a polynomial in `w`.
pub fn psi_poly(p: &Expr) -> WPoly {
    WPoly::new(vec![p.clone(), Expr::one()])
}

/// `d/dx (c_n w^n) = c_n' w^n + n c_n w^(n-1) (U - w^2)`.
pub fn w_derive(p: &WPoly, u: &Expr) -> WPoly {
    let n = p.coeffs.len();
    if n == 0 {
        return WPoly::zero();
    }
    let mut out = vec![Expr::zero(); n + 1];
    for (i, c) in p.coeffs.iter().enumerate() {
        out[i] = add(core::mem::replace(&mut out[i], Expr::zero()), c.diff());
        if i > 0 {
            let scaled = mul(Expr::c(i as f64), c.clone());
            out[i - 1] = add(core::mem::replace(&mut out[i - 1], Expr::zero()), mul(scaled.clone(), u.clone()));
            out[i + 1] = sub(core::mem::replace(&mut out[i + 1], Expr::zero()), scaled);
        }
    }
    WPoly::new(out)
}

/// The five coefficient functions `a_0 .. a_4` of a reduced equation.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffSet(pub [Expr; 5]);

impl CoeffSet {
    fn from_poly(p: &WPoly) -> Self {
        assert!(p.degree() <= 4, "reduced equation has degree {} in w", p.degree());
        CoeffSet(core::array::from_fn(|i| p.coeff(i)))
    }

    pub fn get(&self, i: usize) -> &Expr {
        &self.0[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Expr> {
        self.0.iter()
    }

    /// Evaluates `sum a_i w^i`.
    pub fn eval_poly(&self, x: f64, w: f64, env: &ParamEnv) -> Result<f64, EvalError> {
        let mut acc = 0.0;
        for c in self.0.iter().rev() {
            acc = acc * w + c.eval(x, env)?;
        }
        Ok(acc)
    }
}

/// The non-autonomous perturbation functions `v, h, g, f` multiplying
/// `psi^2, psi^3, psi^4, 1` on the right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct VdpTerms {
    pub v: Expr,
    pub h: Expr,
    pub g: Expr,
    pub f: Expr,
}

/// Substitutes `psi = P + w` into
/// `psi'' - mu (beta - psi^2) psi' + alpha psi - v psi^2 - h psi^3 - g psi^4 - f`
/// and returns the coefficients of `w^0 .. w^4`.
///
/// `mu`, `beta` and `alpha` stay symbolic (see [`VdpParams::env`]).
pub fn reduce_vdp(p: &Expr, u: &Expr, terms: &VdpTerms) -> CoeffSet {
    let psi = psi_poly(p);
    let d1 = w_derive(&psi, u);
    let d2 = w_derive(&d1, u);
    let psi2 = psi.mul(&psi);
    let psi3 = psi2.mul(&psi);
    let psi4 = psi2.mul(&psi2);

    let damping = WPoly::constant(VdpParams::beta_expr()).sub(&psi2).scale(&VdpParams::mu_expr()).mul(&d1);
    let r = d2
        .sub(&damping)
        .add(&psi.scale(&VdpParams::alpha_expr()))
        .sub(&psi2.scale(&terms.v))
        .sub(&psi3.scale(&terms.h))
        .sub(&psi4.scale(&terms.g))
        .sub(&WPoly::constant(terms.f.clone()));
    CoeffSet::from_poly(&r)
}

/// The `b`-free part of the Lienard reduction: `psi'' + (c0 + c1 psi + c2 psi^2) psi'`.
pub(crate) fn lienard_base(p: &Expr, u: &Expr, c: &[Expr; 3]) -> WPoly {
    let psi = psi_poly(p);
    let d1 = w_derive(&psi, u);
    let d2 = w_derive(&d1, u);
    let damping = WPoly::constant(c[0].clone()).add(&psi.scale(&c[1])).add(&psi.mul(&psi).scale(&c[2]));
    d2.add(&damping.mul(&d1))
}

/// Substitutes `psi = P + w` into
/// `psi'' + (c0 + c1 psi + c2 psi^2) psi' + sum b_i psi^i`.
pub fn reduce_lienard(p: &Expr, u: &Expr, c: &[Expr; 3], b: &[Expr; 5]) -> CoeffSet {
    let psi = psi_poly(p);
    let mut r = lienard_base(p, u, c);
    for (i, bi) in b.iter().enumerate() {
        r = r.add(&psi.pow(i as u32).scale(bi));
    }
    CoeffSet::from_poly(&r)
}
