use alloc::string::{String, ToString};
use core::fmt;

use super::{Expr, Func, ParamEnv};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalErrorKind {
    UnboundParameter(String),
    DivisionByZero,
    LogOfNonPositive,
    SqrtOfNegative,
    /// `tan` evaluated at an odd multiple of pi/2.
    TanPole,
    /// Non-integer power of a non-positive base.
    PowerDomain,
    NonFinite,
}

impl fmt::Display for EvalErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalErrorKind::UnboundParameter(p) => write!(f, "unbound parameter {p:?}"),
            EvalErrorKind::DivisionByZero => f.write_str("division by zero"),
            EvalErrorKind::LogOfNonPositive => f.write_str("log of non-positive value"),
            EvalErrorKind::SqrtOfNegative => f.write_str("sqrt of negative value"),
            EvalErrorKind::TanPole => f.write_str("tan at a pole"),
            EvalErrorKind::PowerDomain => f.write_str("non-integer power of non-positive base"),
            EvalErrorKind::NonFinite => f.write_str("non-finite result"),
        }
    }
}

/// Domain violation, with the offending sub-expression and abscissa.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{kind} in `{node}` at x = {x}")]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub node: String,
    pub x: f64,
}

const TAN_POLE_COS: f64 = 1e-15;

impl Expr {
    /// Evaluates the expression at `x` with parameters from `env`.
    pub fn eval(&self, x: f64, env: &ParamEnv) -> Result<f64, EvalError> {
        let fail = |kind| EvalError { kind, node: self.to_string(), x };
        let value = match self {
            Expr::Const(v) => *v,
            Expr::X => x,
            Expr::Param(name) => {
                env.get(name).ok_or_else(|| fail(EvalErrorKind::UnboundParameter(name.to_string())))?
            }
            Expr::Neg(a) => -a.eval(x, env)?,
            Expr::Add(a, b) => a.eval(x, env)? + b.eval(x, env)?,
            Expr::Sub(a, b) => a.eval(x, env)? - b.eval(x, env)?,
            Expr::Mul(a, b) => a.eval(x, env)? * b.eval(x, env)?,
            Expr::Div(a, b) => {
                let num = a.eval(x, env)?;
                let den = b.eval(x, env)?;
                if den == 0.0 {
                    return Err(fail(EvalErrorKind::DivisionByZero));
                }
                num / den
            }
            Expr::Pow(a, b) => {
                let base = a.eval(x, env)?;
                let exponent = b.eval(x, env)?;
                power(base, exponent).ok_or_else(|| fail(EvalErrorKind::PowerDomain))?
            }
            Expr::Call(func, a) => {
                let arg = a.eval(x, env)?;
                apply(*func, arg).map_err(fail)?
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(fail(EvalErrorKind::NonFinite))
        }
    }
}

/// `base^exponent`; integer exponents accept any base, others need `base > 0`
/// (or `base == 0` with a positive exponent).
pub(crate) fn power(base: f64, exponent: f64) -> Option<f64> {
    if libm::trunc(exponent) == exponent {
        if base == 0.0 && exponent < 0.0 {
            return None;
        }
        return Some(libm::pow(base, exponent));
    }
    if base > 0.0 || (base == 0.0 && exponent > 0.0) {
        Some(libm::pow(base, exponent))
    } else {
        None
    }
}

pub(crate) fn apply(func: Func, arg: f64) -> Result<f64, EvalErrorKind> {
    Ok(match func {
        Func::Exp => libm::exp(arg),
        Func::Log => {
            if arg <= 0.0 {
                return Err(EvalErrorKind::LogOfNonPositive);
            }
            libm::log(arg)
        }
        Func::Sin => libm::sin(arg),
        Func::Cos => libm::cos(arg),
        Func::Tan => {
            if libm::cos(arg).abs() < TAN_POLE_COS {
                return Err(EvalErrorKind::TanPole);
            }
            libm::tan(arg)
        }
        Func::Sinh => libm::sinh(arg),
        Func::Cosh => libm::cosh(arg),
        Func::Sqrt => {
            if arg < 0.0 {
                return Err(EvalErrorKind::SqrtOfNegative);
            }
            libm::sqrt(arg)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn basic_values() {
        assert_eq!(parse("x^2").unwrap().eval(3.0, &ParamEnv::new()).unwrap(), 9.0);
        let env = ParamEnv::new().with("mu", 2.0).with("beta", 1.0);
        assert_eq!(parse("mu*beta").unwrap().eval(123.0, &env).unwrap(), 2.0);
    }

    #[test]
    fn constant_shift_of_unforced_family() {
        // k^2 = mu^2 beta^2 - 4 alpha = 1 for (2, 1, 0.75)
        let env = ParamEnv::new().with("mu", 2.0).with("beta", 1.0).with("alpha", 0.75);
        let k = parse("sqrt(mu^2*beta^2 - 4*alpha)").unwrap();
        assert_eq!(k.eval(0.0, &env).unwrap(), 1.0);
        let p = parse("(mu*beta - sqrt(mu^2*beta^2 - 4*alpha))/4").unwrap();
        for &x in &[-1.0, 0.0, 2.5] {
            assert_eq!(p.eval(x, &env).unwrap(), 0.25);
        }
    }

    #[test]
    fn domain_errors_name_the_node() {
        let env = ParamEnv::new();
        let err = parse("1 + log(x - 2)").unwrap().eval(1.0, &env).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::LogOfNonPositive);
        assert_eq!(err.node, "log(x - 2)");
        assert_eq!(err.x, 1.0);

        let err = parse("1/x").unwrap().eval(0.0, &env).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::DivisionByZero);

        let err = parse("sqrt(x)").unwrap().eval(-1.0, &env).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::SqrtOfNegative);

        let err = parse("tan(x)").unwrap().eval(core::f64::consts::FRAC_PI_2, &env).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::TanPole);

        let err = parse("x^0.5").unwrap().eval(-1.0, &env).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::PowerDomain);

        let err = parse("exp(x)").unwrap().eval(1000.0, &env).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::NonFinite);

        let err = parse("a*x").unwrap().eval(1.0, &env).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::UnboundParameter("a".into()));
    }

    #[test]
    fn integer_powers_of_negative_bases() {
        let env = ParamEnv::new();
        assert_eq!(parse("x^3").unwrap().eval(-2.0, &env).unwrap(), -8.0);
        assert_eq!(parse("x^-2").unwrap().eval(-2.0, &env).unwrap(), 0.25);
        assert_eq!(parse("x^0").unwrap().eval(-2.0, &env).unwrap(), 1.0);
    }
}
