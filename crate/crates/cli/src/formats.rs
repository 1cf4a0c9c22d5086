//! On-disk formats. Floats are written as shortest round-trip decimals so
//! repeated runs produce identical bytes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use vdp_core::colehopf::{AnnihilationReport, TransformBundle};
use vdp_core::expr::{parse, Expr, ParseError};
use vdp_core::ledger::{DiscrepancyLedger, LedgerEntry};
use vdp_core::lienard::LienardSpec;
use vdp_core::odesolve::{Grid, ResidualReport, Trajectory};
use vdp_core::params::VdpParams;

/// Shortest decimal that parses back to `x`. Non-finite values are spelled
/// `NaN`, `inf` and `-inf`.
pub fn num(x: f64) -> String {
    match serde_json::Number::from_f64(x) {
        Some(n) => n.to_string(),
        None if x.is_nan() => "NaN".to_string(),
        None if x > 0.0 => "inf".to_string(),
        None => "-inf".to_string(),
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsDoc {
    pub mu: f64,
    pub beta: f64,
    pub alpha: f64,
}

impl From<VdpParams> for ParamsDoc {
    fn from(p: VdpParams) -> Self {
        ParamsDoc { mu: p.mu, beta: p.beta, alpha: p.alpha }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerDoc {
    pub item: String,
    pub reference: String,
    pub max_abs_diff: f64,
    pub max_scaled_diff: f64,
    /// Absent when no sample could be compared.
    pub worst_x: Option<f64>,
    pub points: usize,
    pub skipped: usize,
    pub tol: f64,
    pub agrees: bool,
}

impl From<&LedgerEntry> for LedgerDoc {
    fn from(e: &LedgerEntry) -> Self {
        LedgerDoc {
            item: e.item.clone(),
            reference: e.reference.clone(),
            max_abs_diff: e.max_abs_diff,
            max_scaled_diff: e.max_scaled_diff,
            worst_x: finite(e.worst_x),
            points: e.points,
            skipped: e.skipped,
            tol: e.tol,
            agrees: e.agrees,
        }
    }
}

impl From<&LedgerDoc> for LedgerEntry {
    fn from(d: &LedgerDoc) -> Self {
        LedgerEntry {
            item: d.item.clone(),
            reference: d.reference.clone(),
            max_abs_diff: d.max_abs_diff,
            max_scaled_diff: d.max_scaled_diff,
            worst_x: d.worst_x.unwrap_or(f64::NAN),
            points: d.points,
            skipped: d.skipped,
            tol: d.tol,
            agrees: d.agrees,
        }
    }
}

pub fn ledger_docs(ledger: &DiscrepancyLedger) -> Vec<LedgerDoc> {
    ledger.iter().map(LedgerDoc::from).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleDoc {
    pub params: ParamsDoc,
    #[serde(rename = "P")]
    pub p: String,
    #[serde(rename = "U")]
    pub u: String,
    pub g: String,
    pub h: String,
    pub v: String,
    pub f: String,
    #[serde(default)]
    pub ledger: Vec<LedgerDoc>,
}

impl From<&TransformBundle> for BundleDoc {
    fn from(b: &TransformBundle) -> Self {
        BundleDoc {
            params: b.params.into(),
            p: b.p.to_string(),
            u: b.u.to_string(),
            g: b.g.to_string(),
            h: b.h.to_string(),
            v: b.v.to_string(),
            f: b.f.to_string(),
            ledger: ledger_docs(&b.ledger),
        }
    }
}

impl BundleDoc {
    /// Parses the stored expressions back into a bundle, keeping the ledger.
    pub fn to_bundle(&self) -> Result<TransformBundle, (&'static str, ParseError)> {
        let field = |name: &'static str, text: &str| parse(text).map_err(|e| (name, e));
        let ParamsDoc { mu, beta, alpha } = self.params;
        let mut b = TransformBundle::raw(
            VdpParams::new(mu, beta, alpha),
            field("P", &self.p)?,
            field("U", &self.u)?,
            field("g", &self.g)?,
            field("h", &self.h)?,
            field("v", &self.v)?,
            field("f", &self.f)?,
        );
        b.ledger.entries = self.ledger.iter().map(LedgerEntry::from).collect();
        Ok(b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LienardDoc {
    pub c: [String; 3],
    pub b: [String; 5],
    #[serde(rename = "P")]
    pub p: String,
    #[serde(rename = "U")]
    pub u: String,
    pub ledger: Vec<LedgerDoc>,
}

impl From<&LienardSpec> for LienardDoc {
    fn from(s: &LienardSpec) -> Self {
        LienardDoc {
            c: s.c.each_ref().map(Expr::to_string),
            b: s.b.each_ref().map(Expr::to_string),
            p: s.p.to_string(),
            u: s.u.to_string(),
            ledger: ledger_docs(&s.ledger),
        }
    }
}

/// `x,value,derivative,segment`, preceded by one `# pole [a,b]` line per
/// bracket. Samples outside every segment have an empty segment field.
pub fn trajectory_csv(t: &Trajectory) -> String {
    let mut out = String::new();
    for p in &t.poles {
        writeln!(out, "# pole [{},{}]", num(p.lo), num(p.hi)).unwrap();
    }
    out.push_str("x,value,derivative,segment\n");
    for i in 0..t.len() {
        let seg = t.segment_of(i).map(|s| s.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},{}", num(t.x[i]), num(t.value[i]), num(t.derivative[i]), seg).unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryDoc {
    pub x: Vec<f64>,
    /// `null` where the sample was dropped.
    pub value: Vec<Option<f64>>,
    pub derivative: Vec<Option<f64>>,
    pub segment: Vec<Option<usize>>,
    pub poles: Vec<[f64; 2]>,
}

impl From<&Trajectory> for TrajectoryDoc {
    fn from(t: &Trajectory) -> Self {
        TrajectoryDoc {
            x: t.x.clone(),
            value: t.value.iter().copied().map(finite).collect(),
            derivative: t.derivative.iter().copied().map(finite).collect(),
            segment: (0..t.len()).map(|i| t.segment_of(i)).collect(),
            poles: t.poles.iter().map(|p| [p.lo, p.hi]).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridDoc {
    pub x0: f64,
    pub x1: f64,
    pub n: usize,
}

impl From<Grid> for GridDoc {
    fn from(g: Grid) -> Self {
        GridDoc { x0: g.x0, x1: g.x1, n: g.n }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnihilationDoc {
    pub max_abs: [f64; 5],
    pub worst_x: [f64; 5],
    pub points: usize,
    pub tol: f64,
    pub passes: bool,
}

impl AnnihilationDoc {
    pub fn new(r: &AnnihilationReport, tol: f64) -> Self {
        AnnihilationDoc { max_abs: r.max_abs, worst_x: r.worst_x, points: r.points, tol, passes: r.max() <= tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentDoc {
    pub start: usize,
    pub end: usize,
    pub max_abs: f64,
    pub l2: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualDoc {
    /// Samples the residual was evaluated on; a refinement of the output grid.
    pub grid: GridDoc,
    pub max_abs: f64,
    pub l2: f64,
    pub points: usize,
    pub segments: Vec<SegmentDoc>,
    pub skipped_segments: Vec<[usize; 2]>,
    pub tol: f64,
    pub passes: bool,
}

impl ResidualDoc {
    pub fn new(r: &ResidualReport, grid: Grid, tol: f64) -> Self {
        ResidualDoc {
            grid: grid.into(),
            max_abs: r.max_abs,
            l2: r.l2,
            points: r.points,
            segments: r
                .segments
                .iter()
                .map(|s| SegmentDoc {
                    start: s.range.start,
                    end: s.range.end,
                    max_abs: s.max_abs,
                    l2: s.l2,
                    points: s.points,
                })
                .collect(),
            skipped_segments: r.skipped_segments.iter().map(|s| [s.start, s.end]).collect(),
            tol,
            passes: r.passes(tol),
        }
    }
}

/// A bound on some quantity that has to vanish, e.g. `max |b0|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckDoc {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub passes: bool,
}

impl CheckDoc {
    pub fn new(name: &str, value: f64, tol: f64) -> Self {
        CheckDoc { name: name.to_string(), value, tol, passes: value <= tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDoc {
    pub command: String,
    pub params: ParamsDoc,
    pub grid: GridDoc,
    /// `closed-form` or `numerical`.
    pub phi: String,
    pub annihilation: AnnihilationDoc,
    pub residual: ResidualDoc,
    pub checks: Vec<CheckDoc>,
    pub poles: Vec<[f64; 2]>,
    pub ledger_entries: usize,
    pub ledger_disagreements: usize,
    pub passes: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, 1e-300, 6.02e23, f64::MIN_POSITIVE] {
            assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits(), "{x}");
        }
        assert_eq!(num(f64::NAN), "NaN");
        assert_eq!(num(0.5), "0.5");
    }

    #[test]
    fn csv_layout() {
        let mut t = Trajectory::from_samples(vec![0.0, 0.5, 1.0], vec![1.0, f64::NAN, 2.0], vec![0.0, f64::NAN, 1.0]);
        t.segments = vec![0..1, 2..3];
        t.poles = vec![vdp_core::odesolve::PoleBracket { lo: 0.25, hi: 0.75 }];
        assert_eq!(
            trajectory_csv(&t),
            "# pole [0.25,0.75]\nx,value,derivative,segment\n0.0,1.0,0.0,0\n0.5,NaN,NaN,\n1.0,2.0,1.0,1\n"
        );
    }

    #[test]
    fn bundle_round_trip() {
        let b = vdp_core::colehopf::solve_chain(&parse("x/4 + 0.1").unwrap(), VdpParams::new(1.2, 0.7, -0.4));
        let doc = BundleDoc::from(&b);
        let text = serde_json::to_string(&doc).unwrap();
        let back: BundleDoc = serde_json::from_str(&text).unwrap();
        let rebuilt = back.to_bundle().unwrap();
        assert_eq!(rebuilt.f.to_string(), b.f.to_string());
        assert_eq!(rebuilt.params, b.params);
        assert_eq!(rebuilt.ledger.len(), b.ledger.len());
    }
}
