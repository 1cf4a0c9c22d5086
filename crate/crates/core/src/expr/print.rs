use core::fmt::{self, Write};

use super::Expr;

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Const(v) if v.is_sign_negative() && *v != 0.0 => UNARY,
        Expr::Const(_) | Expr::X | Expr::Param(_) | Expr::Call(..) => ATOM,
        Expr::Pow(..) => POWER,
        Expr::Neg(_) => UNARY,
        Expr::Mul(..) | Expr::Div(..) => PRODUCT,
        Expr::Add(..) | Expr::Sub(..) => SUM,
    }
}

/// Shortest round-trip decimal, switching to exponent form outside
/// `[1e-5, 1e16)` so huge or tiny constants stay compact.
pub(crate) fn write_number<W: Write>(out: &mut W, v: f64) -> fmt::Result {
    if v == 0.0 {
        return out.write_char('0');
    }
    let a = v.abs();
    if v < 0.0 {
        out.write_char('-')?;
    }
    if (1e-5..1e16).contains(&a) {
        write!(out, "{a}")
    } else {
        write!(out, "{a:e}")
    }
}

fn write_expr<W: Write>(out: &mut W, e: &Expr, min: u8) -> fmt::Result {
    let paren = precedence(e) < min;
    if paren {
        out.write_char('(')?;
    }
    match e {
        Expr::Const(v) => write_number(out, *v)?,
        Expr::X => out.write_char('x')?,
        Expr::Param(p) => out.write_str(p)?,
        Expr::Neg(a) => {
            out.write_char('-')?;
            write_expr(out, a, UNARY)?;
        }
        Expr::Add(a, b) => {
            write_expr(out, a, SUM)?;
            out.write_str(" + ")?;
            write_expr(out, b, PRODUCT)?;
        }
        Expr::Sub(a, b) => {
            write_expr(out, a, SUM)?;
            out.write_str(" - ")?;
            write_expr(out, b, PRODUCT)?;
        }
        Expr::Mul(a, b) => {
            write_expr(out, a, PRODUCT)?;
            out.write_char('*')?;
            write_expr(out, b, UNARY)?;
        }
        Expr::Div(a, b) => {
            write_expr(out, a, PRODUCT)?;
            out.write_char('/')?;
            write_expr(out, b, UNARY)?;
        }
        Expr::Pow(a, b) => {
            write_expr(out, a, ATOM)?;
            out.write_char('^')?;
            write_expr(out, b, UNARY)?;
        }
        Expr::Call(f, a) => {
            out.write_str(f.name())?;
            out.write_char('(')?;
            write_expr(out, a, 0)?;
            out.write_char(')')?;
        }
    }
    if paren {
        out.write_char(')')?;
    }
    Ok(())
}

/// Prints in the parser's grammar with the minimum parentheses needed to
/// reproduce the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0)
    }
}
