//! Pointwise comparison records between derived expressions and reference
//! (printed) forms.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::expr::{Expr, ParamEnv};

/// Agreement threshold for ledger checks, applied to `|d - r| / max(1, |d|)`.
pub const LEDGER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerEntry {
    /// Name of the compared quantity, e.g. `"a2"` or `"case3.U"`.
    pub item: String,
    /// The reference form in expression syntax.
    pub reference: String,
    pub max_abs_diff: f64,
    /// Largest `|d - r| / max(1, |d|)`.
    pub max_scaled_diff: f64,
    /// Sample where `max_scaled_diff` is attained.
    pub worst_x: f64,
    pub points: usize,
    /// Samples where either side failed to evaluate.
    pub skipped: usize,
    pub tol: f64,
    pub agrees: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiscrepancyLedger {
    pub entries: Vec<LedgerEntry>,
}

impl DiscrepancyLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &LedgerEntry> {
        self.entries.iter()
    }

    pub fn get(&self, item: &str) -> Option<&LedgerEntry> {
        self.entries.iter().find(|e| e.item == item)
    }

    pub fn disagreements(&self) -> impl Iterator<Item = &LedgerEntry> {
        self.entries.iter().filter(|e| !e.agrees)
    }

    pub fn extend(&mut self, other: DiscrepancyLedger) {
        self.entries.extend(other.entries);
    }

    /// Evaluates `derived` and `reference` at every sample of `xs` and records
    /// the largest difference. An entry with no evaluable sample never agrees.
    pub fn check(
        &mut self,
        item: &str,
        reference_text: &str,
        derived: &Expr,
        reference: &Expr,
        env: &ParamEnv,
        xs: &[f64],
    ) -> &LedgerEntry {
        let entry = compare_on(item, reference_text, derived, reference, env, xs, LEDGER_TOL);
        self.entries.push(entry);
        self.entries.last().unwrap()
    }
}

pub fn compare_on(
    item: &str,
    reference_text: &str,
    derived: &Expr,
    reference: &Expr,
    env: &ParamEnv,
    xs: &[f64],
    tol: f64,
) -> LedgerEntry {
    let (mut max_abs, mut max_scaled, mut worst_x) = (0.0f64, 0.0f64, f64::NAN);
    let (mut points, mut skipped) = (0, 0);
    let (derived, reference) = (derived.compile(env), reference.compile(env));
    for &x in xs {
        match (derived.eval(x), reference.eval(x)) {
            (Ok(d), Ok(r)) => {
                let diff = (d - r).abs();
                let scaled = diff / d.abs().max(1.0);
                max_abs = max_abs.max(diff);
                if scaled > max_scaled || worst_x.is_nan() {
                    max_scaled = max_scaled.max(scaled);
                    worst_x = x;
                }
                points += 1;
            }
            _ => skipped += 1,
        }
    }
    LedgerEntry {
        item: item.to_string(),
        reference: reference_text.to_string(),
        max_abs_diff: max_abs,
        max_scaled_diff: max_scaled,
        worst_x,
        points,
        skipped,
        tol,
        agrees: points > 0 && max_scaled <= tol,
    }
}
