//! Flat evaluation tape with shared subexpressions evaluated once.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::eval::{apply, power};
use super::{EvalError, EvalErrorKind, Expr, Func, ParamEnv};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Const(f64),
    X,
    Unbound(u32),
    Neg(u32),
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Pow(u32, u32),
    Call(Func, u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Const(u64),
    X,
    Unbound(u32),
    Neg(u32),
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Pow(u32, u32),
    Call(u8, u32),
}

/// An [`Expr`] with parameters bound, lowered to a tape in evaluation order.
/// Structurally equal subtrees share one slot.
///
/// Values and errors are identical to [`Expr::eval`] with the same
/// environment.
#[derive(Debug, Clone)]
pub struct Compiled {
    ops: Vec<Op>,
    source: Vec<Expr>,
    unbound: Vec<String>,
}

struct Builder<'a> {
    env: &'a ParamEnv,
    ops: Vec<Op>,
    source: Vec<Expr>,
    unbound: Vec<String>,
    by_key: BTreeMap<Key, u32>,
    by_addr: BTreeMap<usize, u32>,
}

impl Builder<'_> {
    fn push(&mut self, key: Key, op: Op, e: &Expr) -> u32 {
        if let Some(&i) = self.by_key.get(&key) {
            return i;
        }
        let i = self.ops.len() as u32;
        self.ops.push(op);
        self.source.push(e.clone());
        self.by_key.insert(key, i);
        i
    }

    fn visit(&mut self, e: &Expr) -> u32 {
        let addr = e as *const Expr as usize;
        if let Some(&i) = self.by_addr.get(&addr) {
            return i;
        }
        let i = match e {
            Expr::Const(v) => self.push(Key::Const(v.to_bits()), Op::Const(*v), e),
            Expr::X => self.push(Key::X, Op::X, e),
            Expr::Param(name) => match self.env.get(name) {
                Some(v) => self.push(Key::Const(v.to_bits()), Op::Const(v), e),
                None => {
                    let slot = match self.unbound.iter().position(|n| n.as_str() == &**name) {
                        Some(s) => s,
                        None => {
                            self.unbound.push(name.to_string());
                            self.unbound.len() - 1
                        }
                    } as u32;
                    self.push(Key::Unbound(slot), Op::Unbound(slot), e)
                }
            },
            Expr::Neg(a) => {
                let a = self.visit(a);
                self.push(Key::Neg(a), Op::Neg(a), e)
            }
            Expr::Call(f, a) => {
                let a = self.visit(a);
                self.push(Key::Call(*f as u8, a), Op::Call(*f, a), e)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                let (a, b) = (self.visit(a), self.visit(b));
                let (key, op) = match e {
                    Expr::Add(..) => (Key::Add(a, b), Op::Add(a, b)),
                    Expr::Sub(..) => (Key::Sub(a, b), Op::Sub(a, b)),
                    Expr::Mul(..) => (Key::Mul(a, b), Op::Mul(a, b)),
                    Expr::Div(..) => (Key::Div(a, b), Op::Div(a, b)),
                    _ => (Key::Pow(a, b), Op::Pow(a, b)),
                };
                self.push(key, op, e)
            }
        };
        self.by_addr.insert(addr, i);
        i
    }
}

impl Expr {
    /// Lowers the expression to a [`Compiled`] tape, binding every parameter
    /// present in `env`.
    pub fn compile(&self, env: &ParamEnv) -> Compiled {
        let mut b = Builder {
            env,
            ops: Vec::new(),
            source: Vec::new(),
            unbound: Vec::new(),
            by_key: BTreeMap::new(),
            by_addr: BTreeMap::new(),
        };
        let root = b.visit(self);
        // the root must be the last slot; it is unless the whole tree was a
        // repeat of an earlier subtree, which cannot happen for the root
        debug_assert_eq!(root as usize, b.ops.len() - 1);
        Compiled { ops: b.ops, source: b.source, unbound: b.unbound }
    }
}

impl Compiled {
    /// Number of distinct nodes.
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    fn fail(&self, i: usize, kind: EvalErrorKind, x: f64) -> EvalError {
        EvalError { kind, node: self.source[i].to_string(), x }
    }

    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let mut r: Vec<f64> = Vec::with_capacity(self.ops.len());
        for (i, op) in self.ops.iter().enumerate() {
            let at = |j: u32| r[j as usize];
            let v = match *op {
                Op::Const(v) => v,
                Op::X => x,
                Op::Unbound(s) => {
                    let name = self.unbound[s as usize].clone();
                    return Err(self.fail(i, EvalErrorKind::UnboundParameter(name), x));
                }
                Op::Neg(a) => -at(a),
                Op::Add(a, b) => at(a) + at(b),
                Op::Sub(a, b) => at(a) - at(b),
                Op::Mul(a, b) => at(a) * at(b),
                Op::Div(a, b) => {
                    let den = at(b);
                    if den == 0.0 {
                        return Err(self.fail(i, EvalErrorKind::DivisionByZero, x));
                    }
                    at(a) / den
                }
                Op::Pow(a, b) => power(at(a), at(b)).ok_or_else(|| self.fail(i, EvalErrorKind::PowerDomain, x))?,
                Op::Call(f, a) => apply(f, at(a)).map_err(|k| self.fail(i, k, x))?,
            };
            if !v.is_finite() {
                return Err(self.fail(i, EvalErrorKind::NonFinite, x));
            }
            r.push(v);
        }
        Ok(*r.last().expect("a tape has at least one slot"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn shared_subtrees_collapse() {
        let e = parse("sin(x)*sin(x) + sin(x)").unwrap();
        assert_eq!(e.compile(&ParamEnv::new()).len(), 4);
    }

    #[test]
    fn matches_tree_evaluation() {
        let env = ParamEnv::new().with("mu", 1.5);
        for src in ["mu*x^2 - exp(-x)/3", "sqrt(x - 1)", "1/(x - 2)", "log(x) + k", "tan(x)*cosh(x)^3"] {
            let e = parse(src).unwrap();
            let c = e.compile(&env);
            for x in [0.0, 0.5, 1.0, 2.0, 3.5] {
                assert_eq!(c.eval(x).map(f64::to_bits), e.eval(x, &env).map(f64::to_bits), "{src} at {x}");
            }
        }
    }
}
