use super::simplify::{add, call, div, mul, neg, pow, sub};
use super::{Expr, Func};

impl Expr {
    /// Exact derivative with respect to `x`; parameters are constants.
    ///
    /// The result is built through the simplifying constructors, so trivial
    /// `*1` and `+0` terms never appear.
    pub fn diff(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Param(_) => Expr::Const(0.0),
            Expr::X => Expr::Const(1.0),
            Expr::Neg(a) => neg(a.diff()),
            Expr::Add(a, b) => add(a.diff(), b.diff()),
            Expr::Sub(a, b) => sub(a.diff(), b.diff()),
            Expr::Mul(a, b) => add(mul(a.diff(), (**b).clone()), mul((**a).clone(), b.diff())),
            Expr::Div(a, b) => {
                let (a, b) = ((**a).clone(), (**b).clone());
                let num = sub(mul(a.diff(), b.clone()), mul(a, b.diff()));
                div(num, pow(b, Expr::Const(2.0)))
            }
            Expr::Pow(a, b) => {
                let (base, exponent) = ((**a).clone(), (**b).clone());
                if !exponent.depends_on_x() {
                    let lowered = pow(base.clone(), sub(exponent.clone(), Expr::Const(1.0)));
                    mul(mul(exponent, lowered), base.diff())
                } else {
                    // d(a^b) = a^b * (b' log a + b a'/a)
                    let log_part = mul(exponent.diff(), call(Func::Log, base.clone()));
                    let base_part = div(mul(exponent.clone(), base.diff()), base.clone());
                    mul(pow(base, exponent), add(log_part, base_part))
                }
            }
            Expr::Call(f, a) => {
                let arg = (**a).clone();
                let inner = arg.diff();
                let outer = match f {
                    Func::Exp => call(Func::Exp, arg),
                    Func::Log => return div(inner, arg),
                    Func::Sin => call(Func::Cos, arg),
                    Func::Cos => neg(call(Func::Sin, arg)),
                    Func::Tan => add(Expr::Const(1.0), pow(call(Func::Tan, arg), Expr::Const(2.0))),
                    Func::Sinh => call(Func::Cosh, arg),
                    Func::Cosh => call(Func::Sinh, arg),
                    Func::Sqrt => return div(inner, mul(Expr::Const(2.0), call(Func::Sqrt, arg))),
                };
                mul(outer, inner)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use alloc::string::ToString;

    use crate::expr::{parse, Expr, ParamEnv};

    fn central_difference(e: &Expr, x: f64, env: &ParamEnv) -> f64 {
        let h = libm::cbrt(f64::EPSILON) * x.abs().max(1.0);
        (e.eval(x + h, env).unwrap() - e.eval(x - h, env).unwrap()) / (2.0 * h)
    }

    #[test]
    fn constants_and_monomials() {
        assert_eq!(Expr::c(3.5).diff(), Expr::c(0.0));
        assert_eq!(Expr::param("mu").diff(), Expr::c(0.0));
        assert_eq!(parse("x^2").unwrap().diff().to_string(), "2*x");
    }

    #[test]
    fn tan_matches_finite_difference() {
        let e = parse("tan(x)").unwrap();
        let env = ParamEnv::new();
        let exact = e.diff().eval(0.7, &env).unwrap();
        let fd = central_difference(&e, 0.7, &env);
        assert!(((exact - fd) / fd).abs() <= 1e-6, "{exact} vs {fd}");
    }

    #[test]
    fn every_function_against_finite_difference() {
        let env = ParamEnv::new().with("a", 0.7);
        for src in [
            "exp(a*x)",
            "log(1 + x^2)",
            "sin(x^2)",
            "cos(3*x)",
            "sinh(x)/cosh(x)",
            "sqrt(2 + x)",
            "x^a",
            "(1 + x^2)^x",
            "a^x",
            "1/(2 + sin(x))",
            "-x^3 + x*exp(-x)",
        ] {
            let e = parse(src).unwrap();
            let d = e.diff();
            for &x in &[0.3, 0.9, 1.6] {
                let exact = d.eval(x, &env).unwrap();
                let fd = central_difference(&e, x, &env);
                assert!((exact - fd).abs() / fd.abs().max(1.0) <= 1e-7, "{src} at {x}: {exact} vs {fd}");
            }
        }
    }

    #[test]
    fn second_derivative_is_defined() {
        let e = parse("tan(x)*sqrt(1 + x^2)").unwrap();
        let d2 = e.diff().diff();
        assert!(d2.eval(0.4, &ParamEnv::new()).unwrap().is_finite());
    }
}
