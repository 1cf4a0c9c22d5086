//! Local rewriting: constant folding, additive/multiplicative identities and
//! negation cancellation. There is no canonical form; two equal functions may
//! simplify to different trees.

use alloc::sync::Arc;

use super::eval::{apply, power};
use super::{Expr, Func};

fn folded(v: f64) -> Option<Expr> {
    v.is_finite().then_some(Expr::Const(v))
}

pub(crate) fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(v) => Expr::Const(-v),
        Expr::Neg(inner) => Arc::unwrap_or_clone(inner),
        a => Expr::Neg(Arc::new(a)),
    }
}

pub(crate) fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => {
            if let Some(e) = folded(x + y) {
                return e;
            }
        }
        (_, Expr::Const(y)) if *y == 0.0 => return a,
        (Expr::Const(x), _) if *x == 0.0 => return b,
        (_, Expr::Neg(inner)) => return sub(a, (**inner).clone()),
        _ => {}
    }
    Expr::Add(Arc::new(a), Arc::new(b))
}

pub(crate) fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => {
            if let Some(e) = folded(x - y) {
                return e;
            }
        }
        (_, Expr::Const(y)) if *y == 0.0 => return a,
        (Expr::Const(x), _) if *x == 0.0 => return neg(b),
        (_, Expr::Neg(inner)) => return add(a, (**inner).clone()),
        _ => {}
    }
    Expr::Sub(Arc::new(a), Arc::new(b))
}

pub(crate) fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => {
            if let Some(e) = folded(x * y) {
                return e;
            }
        }
        (Expr::Const(x), _) | (_, Expr::Const(x)) if *x == 0.0 => return Expr::Const(0.0),
        (_, Expr::Const(y)) if *y == 1.0 => return a,
        (Expr::Const(x), _) if *x == 1.0 => return b,
        (_, Expr::Const(y)) if *y == -1.0 => return neg(a),
        (Expr::Const(x), _) if *x == -1.0 => return neg(b),
        (Expr::Neg(p), Expr::Neg(q)) => return mul((**p).clone(), (**q).clone()),
        _ => {}
    }
    Expr::Mul(Arc::new(a), Arc::new(b))
}

pub(crate) fn div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) if *y != 0.0 => {
            if let Some(e) = folded(x / y) {
                return e;
            }
        }
        (Expr::Const(x), _) if *x == 0.0 => return Expr::Const(0.0),
        (_, Expr::Const(y)) if *y == 1.0 => return a,
        (_, Expr::Const(y)) if *y == -1.0 => return neg(a),
        _ => {}
    }
    Expr::Div(Arc::new(a), Arc::new(b))
}

pub(crate) fn pow(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => {
            if let Some(e) = power(*x, *y).and_then(folded) {
                return e;
            }
        }
        (_, Expr::Const(y)) if *y == 0.0 => return Expr::Const(1.0),
        (_, Expr::Const(y)) if *y == 1.0 => return a,
        (Expr::Const(x), _) if *x == 1.0 => return Expr::Const(1.0),
        _ => {}
    }
    Expr::Pow(Arc::new(a), Arc::new(b))
}

pub(crate) fn call(f: Func, a: Expr) -> Expr {
    if let Expr::Const(v) = a {
        if let Some(e) = apply(f, v).ok().and_then(folded) {
            return e;
        }
    }
    Expr::Call(f, Arc::new(a))
}

impl Expr {
    /// Bottom-up local simplification; evaluates pointwise equal to `self`
    /// wherever both are defined.
    pub fn simplify(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::X | Expr::Param(_) => self.clone(),
            Expr::Neg(a) => neg(a.simplify()),
            Expr::Add(a, b) => add(a.simplify(), b.simplify()),
            Expr::Sub(a, b) => sub(a.simplify(), b.simplify()),
            Expr::Mul(a, b) => mul(a.simplify(), b.simplify()),
            Expr::Div(a, b) => div(a.simplify(), b.simplify()),
            Expr::Pow(a, b) => pow(a.simplify(), b.simplify()),
            Expr::Call(f, a) => call(*f, a.simplify()),
        }
    }
}

#[cfg(test)]
mod tests {
    use alloc::string::ToString;

    use crate::expr::{parse, Expr};

    fn s(src: &str) -> alloc::string::String {
        parse(src).unwrap().simplify().to_string()
    }

    #[test]
    fn identities() {
        assert_eq!(s("x*0 + y"), "y");
        assert_eq!(s("2*3"), "6");
        assert_eq!(s("x + 0"), "x");
        assert_eq!(s("1*x"), "x");
        assert_eq!(s("x^0"), "1");
        assert_eq!(s("x^1"), "x");
        assert_eq!(s("--x"), "x");
        assert_eq!(s("a - -b"), "a + b");
        assert_eq!(s("0 - x"), "-x");
        assert_eq!(s("x/1"), "x");
        assert_eq!(s("exp(0)"), "1");
    }

    #[test]
    fn derivative_of_cube_is_clean() {
        let d = parse("x^3").unwrap().diff().simplify();
        assert_eq!(d.to_string(), "3*x^2");
    }

    #[test]
    fn does_not_fold_to_non_finite() {
        let e = parse("exp(1000)").unwrap().simplify();
        assert!(matches!(e, Expr::Call(..)));
        let e = parse("1/0").unwrap().simplify();
        assert!(matches!(e, Expr::Div(..)));
    }
}
