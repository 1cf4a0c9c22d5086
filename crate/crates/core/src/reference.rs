//! Published closed forms, transcribed as expressions so they can be checked
//! against the derived ones. Nothing here feeds a construction.
//!
//! Text forms use the parameters `mu`, `beta`, `alpha` and, where relevant,
//! `k` (with `k^2 = mu^2 beta^2 - 4 alpha`), `c` and `a`.

use crate::expr::{parse, Expr};
use crate::params::VdpParams;

/// A reference form given as expression text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Printed {
    pub item: &'static str,
    pub text: &'static str,
}

impl Printed {
    pub fn expr(&self) -> Expr {
        parse(self.text).expect("reference forms are valid expressions")
    }
}

pub const CASE1_P: Printed = Printed { item: "case1.P", text: "(mu*beta - k)/4" };
pub const CASE1_U: Printed = Printed { item: "case1.U", text: "alpha/2 + (3*k + mu*beta)*(k - mu*beta)/16" };
pub const CASE1_V: Printed = Printed { item: "case1.v", text: "-mu^3*beta^2/8 + mu/2*(alpha - beta + k^2/4) + 3*k/2" };
pub const CASE1_H: Printed = Printed { item: "case1.h", text: "mu/2*(mu*beta - k) + 2" };
/// Square of the frequency in the trigonometric basis `C3 cos(wx) + C4 sin(wx)`.
pub const CASE1_OMEGA_SQ: Printed =
    Printed { item: "case1.omega_sq", text: "(mu^2*beta^2 + 2*mu*beta*k - 3*k^2 - 8*alpha)/16" };

pub const CASE2_P: Printed = Printed { item: "case2.P", text: "mu*beta/4" };
pub const CASE2_U: Printed = Printed { item: "case2.U", text: "alpha/2 - mu^2*beta^2/16" };
pub const CASE2_H: Printed = Printed { item: "case2.h", text: "mu^2*beta/2 + 2" };
pub const CASE2_V: Printed = Printed { item: "case2.v", text: "mu/2*(alpha - beta - mu^2*beta^2/4)" };
pub const CASE2_OMEGA_SQ: Printed = Printed { item: "case2.omega_sq", text: "(mu^2*beta^2 - 8*alpha)/16" };

// The printed P has an unbalanced parenthesis; this is the only balanced reading.
pub const CASE3_P: Printed = Printed { item: "case3.P", text: "c*mu*beta*exp(mu*beta*x/2)/(c + exp(-mu*beta*x))" };
pub const CASE3_U: Printed =
    Printed { item: "case3.U", text: "-c*mu^2*beta^2*(exp(-mu*beta*x) - c)/(exp(-mu*beta*x) + c)^2" };
pub const CASE3_V: Printed = Printed { item: "case3.v", text: "mu*beta*(exp(-mu*beta*x) - 2*c)/(exp(-mu*beta*x) + c)" };
pub const CASE3_H: Printed = Printed { item: "case3.h", text: "2 + mu^2*beta*c/(exp(-mu*beta*x) + c)" };
pub const CASE3_PHI: [Printed; 2] = [
    Printed { item: "case3.phi1", text: "1/sqrt(1 + c*exp(mu*beta*x))" },
    Printed { item: "case3.phi2", text: "(c*exp(mu*beta*x) + mu*beta*x)/sqrt(1 + c*exp(mu*beta*x))" },
];

/// Seed `s = a x`.
pub const EXAMPLE1_U: Printed = Printed { item: "example1.U", text: "3*a^2*x^2 + a*mu*beta*x - alpha/2" };
pub const EXAMPLE1_F: Printed = Printed {
    item: "example1.f",
    text: "-4*a^3*x^3 + a*(6*a - alpha + mu^2*beta^2/3)*x - mu*beta*alpha/6 + mu^3*beta^3/27",
};

fn mu() -> Expr {
    VdpParams::mu_expr()
}

fn beta() -> Expr {
    VdpParams::beta_expr()
}

fn alpha() -> Expr {
    VdpParams::alpha_expr()
}

pub const A4_TEXT: &str = "-mu - g";
pub const A3_TEXT: &str = "-(2*mu + 4*g)*P - h + 2";
pub const A2_TEXT: &str = "mu*P' - (6*g + mu)*P^2 - 3*h*P - v + mu*U + mu*beta";
pub const A1_TEXT: &str = "-4*g*P^3 - 3*h*P^2 + (2*mu*P' - 2*v + 2*mu*U)*P - 2*U + alpha";
pub const A0_TEXT: &str = "P'' + mu*(P^2 - beta)*P' + U' - g*P^4 - h*P^3 + (mu*U - v)*P^2 + alpha*P - mu*beta*U - f";
pub const F_CHAIN_TEXT: &str =
    "P'' - 2*mu*beta*P' + (6*P' + alpha + mu^2*beta^2)*P + 4*(P - mu*beta)*P^2 - mu*beta*alpha/2";
pub const SEEDED_U_TEXT: &str = "3*s^2 - mu*beta*s + alpha/2";

/// Reference `a_0 .. a_4` of the reduced polynomial for functions `P, U, v, h, g, f`.
pub fn coeffs(p: &Expr, u: &Expr, v: &Expr, h: &Expr, g: &Expr, f: &Expr) -> [Expr; 5] {
    let (m, b, a) = (mu(), beta(), alpha());
    let dp = p.diff();
    let a4 = -m.clone() - g;
    let a3 = -(2.0 * m.clone() + 4.0 * g) * p - h + 2.0;
    let a2 = m.clone() * &dp - (6.0 * g + &m) * p.clone().powi(2) - 3.0 * h * p - v + m.clone() * u + m.clone() * &b;
    let a1 = -4.0 * g * p.clone().powi(3) - 3.0 * h * p.clone().powi(2)
        + (2.0 * m.clone() * &dp - 2.0 * v + 2.0 * m.clone() * u) * p
        - 2.0 * u
        + a.clone();
    let a0 = dp.diff() + m.clone() * (p.clone().powi(2) - &b) * &dp + u.diff()
        - g * p.clone().powi(4)
        - h * p.clone().powi(3)
        + (m.clone() * u - v) * p.clone().powi(2)
        + a * p
        - m * b * u
        - f;
    [a0, a1, a2, a3, a4]
}

/// Reference forcing as a function of the shift `P` alone.
pub fn f_chain(p: &Expr) -> Expr {
    let (m, b, a) = (mu(), beta(), alpha());
    let dp = p.diff();
    let mb = m * b;
    dp.diff() - 2.0 * mb.clone() * &dp + (6.0 * dp + &a + mb.clone().powi(2)) * p + 4.0 * (p - &mb) * p.clone().powi(2)
        - mb * a / 2.0
}

/// `3 s^2 - mu beta s + alpha/2`, the potential claimed for both seeded branches.
pub fn seeded_u(s: &Expr) -> Expr {
    3.0 * s.clone().powi(2) - mu() * beta() * s + alpha() / 2.0
}

pub const LIENARD_TEXT: [&str; 5] = [
    "P'' - c0*P' + U' - 2*P^3 + 2*P*U + c0*(P^2 - U)",
    "(6 + c1)*P^2 - 2*c0*P - c1*P' - (c1 + 2)*U",
    "c2*P^2 - 2*(3 - c1)*P - c2*(P' - U) + c0",
    "c1 - 2*c2*P + 2",
    "c2",
];

/// Reference restoring coefficients `b_0 .. b_4` of the Lienard family.
pub fn lienard_b(c: &[Expr; 3], p: &Expr, u: &Expr) -> [Expr; 5] {
    let [c0, c1, c2] = c;
    let dp = p.diff();
    let b4 = c2.clone();
    let b3 = c1 - 2.0 * c2 * p + 2.0;
    let b2 = c2 * p.clone().powi(2) - 2.0 * (3.0 - c1) * p - c2 * (dp.clone() - u) + c0;
    let b1 = (6.0 + c1) * p.clone().powi(2) - 2.0 * c0 * p - c1 * &dp - (c1 + 2.0) * u;
    let b0 = dp.diff() - c0 * &dp + u.diff() - 2.0 * p.clone().powi(3) + 2.0 * p * u + c0 * (p.clone().powi(2) - u);
    [b0, b1, b2, b3, b4]
}
