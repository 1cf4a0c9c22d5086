//! Symbolic scalar expressions in one independent variable `x`.
//!
//! Every coefficient function in the crate (`P`, `U`, `v`, `h`, `g`, `f`, the
//! Lienard `c` and `b` arrays) is an [`Expr`]. Expressions are immutable trees
//! with shared (`Arc`) children, so cloning is cheap and values can be shared
//! across threads.

mod compile;
mod diff;
mod eval;
mod parse;
mod print;
pub(crate) mod simplify;

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use core::ops;

pub use compile::Compiled;
pub use eval::{EvalError, EvalErrorKind};
pub use parse::{parse, ParseError, ParseErrorKind};

/// Elementary functions understood by the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 8] =
        [Func::Exp, Func::Log, Func::Sin, Func::Cos, Func::Tan, Func::Sinh, Func::Cosh, Func::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }
}

/// Expression tree node.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// The independent variable.
    X,
    /// Named real parameter, bound through a [`ParamEnv`] at evaluation time.
    Param(Arc<str>),
    Neg(Arc<Expr>),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Pow(Arc<Expr>, Arc<Expr>),
    Call(Func, Arc<Expr>),
}

/// Parameter bindings used by [`Expr::eval`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamEnv {
    values: BTreeMap<String, f64>,
}

impl ParamEnv {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binds `name`, replacing any previous binding.
    pub fn set(&mut self, name: &str, value: f64) -> &mut Self {
        self.values.insert(name.to_string(), value);
        self
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Merges `other` into `self`; bindings in `other` win.
    pub fn extend(&mut self, other: &ParamEnv) {
        for (k, v) in other.iter() {
            self.set(k, v);
        }
    }
}

impl<'a> FromIterator<(&'a str, f64)> for ParamEnv {
    fn from_iter<I: IntoIterator<Item = (&'a str, f64)>>(iter: I) -> Self {
        let mut env = ParamEnv::new();
        for (k, v) in iter {
            env.set(k, v);
        }
        env
    }
}

/// Returns true if `name` is a legal parameter identifier (`x` is reserved).
pub fn is_valid_param_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    name != "x" && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Expr {
    pub fn c(value: f64) -> Expr {
        Expr::Const(value)
    }

    pub fn x() -> Expr {
        Expr::X
    }

    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn one() -> Expr {
        Expr::Const(1.0)
    }

    /// Parameter node. Panics on an illegal identifier.
    pub fn param(name: &str) -> Expr {
        assert!(is_valid_param_name(name), "invalid parameter name {name:?}");
        Expr::Param(Arc::from(name))
    }

    pub fn call(func: Func, arg: Expr) -> Expr {
        Expr::Call(func, Arc::new(arg))
    }

    pub fn exp(self) -> Expr {
        Expr::call(Func::Exp, self)
    }

    pub fn log(self) -> Expr {
        Expr::call(Func::Log, self)
    }

    pub fn sin(self) -> Expr {
        Expr::call(Func::Sin, self)
    }

    pub fn cos(self) -> Expr {
        Expr::call(Func::Cos, self)
    }

    pub fn tan(self) -> Expr {
        Expr::call(Func::Tan, self)
    }

    pub fn sinh(self) -> Expr {
        Expr::call(Func::Sinh, self)
    }

    pub fn cosh(self) -> Expr {
        Expr::call(Func::Cosh, self)
    }

    pub fn sqrt(self) -> Expr {
        Expr::call(Func::Sqrt, self)
    }

    pub fn pow(self, exponent: Expr) -> Expr {
        Expr::Pow(Arc::new(self), Arc::new(exponent))
    }

    pub fn powi(self, n: i32) -> Expr {
        self.pow(Expr::Const(f64::from(n)))
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_const(&self, value: f64) -> bool {
        matches!(self, Expr::Const(v) if *v == value)
    }

    /// True if the tree mentions the independent variable.
    pub fn depends_on_x(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Param(_) => false,
            Expr::X => true,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on_x(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.depends_on_x() || b.depends_on_x()
            }
        }
    }

    /// Names of every parameter referenced, sorted and deduplicated.
    pub fn params(&self) -> alloc::vec::Vec<String> {
        let mut out = alloc::collections::BTreeSet::new();
        self.collect_params(&mut out);
        out.into_iter().collect()
    }

    fn collect_params(&self, out: &mut alloc::collections::BTreeSet<String>) {
        match self {
            Expr::Const(_) | Expr::X => {}
            Expr::Param(p) => {
                out.insert(p.to_string());
            }
            Expr::Neg(a) | Expr::Call(_, a) => a.collect_params(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
        }
    }

    /// True if some `^` has an exponent that is not a literal integer.
    ///
    /// Such powers evaluate through `exp(e*log(b))` and need a positive base.
    pub fn has_non_integer_power(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::X | Expr::Param(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.has_non_integer_power(),
            Expr::Pow(a, b) => {
                let integral = matches!(**b, Expr::Const(n) if libm::trunc(n) == n)
                    || matches!(&**b, Expr::Neg(inner) if matches!(**inner, Expr::Const(n) if libm::trunc(n) == n));
                !integral || a.has_non_integer_power()
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.has_non_integer_power() || b.has_non_integer_power()
            }
        }
    }

    /// Replaces every parameter bound in `env` with its value.
    pub fn substitute(&self, env: &ParamEnv) -> Expr {
        match self {
            Expr::Param(p) => match env.get(p) {
                Some(v) => Expr::Const(v),
                None => self.clone(),
            },
            Expr::Const(_) | Expr::X => self.clone(),
            Expr::Neg(a) => Expr::Neg(Arc::new(a.substitute(env))),
            Expr::Call(f, a) => Expr::Call(*f, Arc::new(a.substitute(env))),
            Expr::Add(a, b) => Expr::Add(Arc::new(a.substitute(env)), Arc::new(b.substitute(env))),
            Expr::Sub(a, b) => Expr::Sub(Arc::new(a.substitute(env)), Arc::new(b.substitute(env))),
            Expr::Mul(a, b) => Expr::Mul(Arc::new(a.substitute(env)), Arc::new(b.substitute(env))),
            Expr::Div(a, b) => Expr::Div(Arc::new(a.substitute(env)), Arc::new(b.substitute(env))),
            Expr::Pow(a, b) => Expr::Pow(Arc::new(a.substitute(env)), Arc::new(b.substitute(env))),
        }
    }

    /// Number of nodes, counting shared subtrees once per occurrence.
    pub fn node_count(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::X | Expr::Param(_) => 1,
            Expr::Neg(a) | Expr::Call(_, a) => 1 + a.node_count(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                1 + a.node_count() + b.node_count()
            }
        }
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::Const(v)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Arc::new(self), Arc::new(rhs))
            }
        }
        impl ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$variant(Arc::new(self.clone()), Arc::new(rhs.clone()))
            }
        }
        impl ops::$trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$variant(Arc::new(self), Arc::new(rhs.clone()))
            }
        }
        impl ops::$trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Arc::new(self.clone()), Arc::new(rhs))
            }
        }
        impl ops::$trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::$variant(Arc::new(self), Arc::new(Expr::Const(rhs)))
            }
        }
        impl ops::$trait<f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::$variant(Arc::new(self.clone()), Arc::new(Expr::Const(rhs)))
            }
        }
        impl ops::$trait<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Arc::new(Expr::Const(self)), Arc::new(rhs))
            }
        }
        impl ops::$trait<&Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$variant(Arc::new(Expr::Const(self)), Arc::new(rhs.clone()))
            }
        }
    };
}

binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Arc::new(self))
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Arc::new(self.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn param_names() {
        assert!(is_valid_param_name("mu"));
        assert!(is_valid_param_name("C_1"));
        assert!(is_valid_param_name("a2"));
        assert!(!is_valid_param_name("x"));
        assert!(!is_valid_param_name("2a"));
        assert!(!is_valid_param_name("_a"));
        assert!(!is_valid_param_name(""));
    }

    #[test]
    fn substitute_binds_params() {
        let e = parse("a*x + b").unwrap();
        let env = ParamEnv::new().with("a", 2.0);
        let s = e.substitute(&env);
        assert_eq!(s.params(), alloc::vec!["b".to_string()]);
        let full = env.clone().with("b", 1.0);
        assert_eq!(s.eval(3.0, &full).unwrap(), 7.0);
    }

    #[test]
    fn flags_non_integer_power() {
        assert!(!parse("x^2").unwrap().has_non_integer_power());
        assert!(!parse("x^-3").unwrap().has_non_integer_power());
        assert!(parse("x^0.5").unwrap().has_non_integer_power());
        assert!(parse("x^a").unwrap().has_non_integer_power());
    }
}
