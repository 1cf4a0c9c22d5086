use alloc::vec::Vec;
use core::ops::Range;

use super::{Grid, OdeError};
use crate::expr::{EvalError, Expr, ParamEnv};

/// An x-interval known to contain a zero of `phi`, i.e. a pole of `phi'/phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleBracket {
    pub lo: f64,
    pub hi: f64,
}

impl PoleBracket {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Distance from `x` to the closed interval.
    pub fn distance(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }
}

/// A sampled solution: values and first derivatives on a grid, split into
/// pole-free segments.
///
/// Samples outside every segment are `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub x: Vec<f64>,
    pub value: Vec<f64>,
    pub derivative: Vec<f64>,
    /// Disjoint, ordered index ranges on which every sample is finite.
    pub segments: Vec<Range<usize>>,
    pub poles: Vec<PoleBracket>,
}

impl Trajectory {
    /// A single-segment trajectory from samples that are all finite.
    pub fn from_samples(x: Vec<f64>, value: Vec<f64>, derivative: Vec<f64>) -> Self {
        assert_eq!(x.len(), value.len());
        assert_eq!(x.len(), derivative.len());
        let n = x.len();
        Trajectory { x, value, derivative, segments: alloc::vec![0..n], poles: Vec::new() }
    }

    /// Samples `e` and its exact derivative on `grid`.
    pub fn from_expr(e: &Expr, grid: &Grid, env: &ParamEnv) -> Result<Self, EvalError> {
        let de = e.diff().compile(env);
        let e = e.compile(env);
        let x = grid.points();
        let value = x.iter().map(|&t| e.eval(t)).collect::<Result<Vec<_>, _>>()?;
        let derivative = x.iter().map(|&t| de.eval(t)).collect::<Result<Vec<_>, _>>()?;
        let mut traj = Trajectory::from_samples(x, value, derivative);
        traj.poles = zero_brackets(&traj);
        Ok(traj)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Index of the segment containing sample `i`.
    pub fn segment_of(&self, i: usize) -> Option<usize> {
        self.segments.iter().position(|r| r.contains(&i))
    }

    /// Cubic Hermite interpolation of `(value, derivative)` at `t`, using the
    /// grid interval around `t` if both its ends lie in the same segment.
    pub fn interpolate(&self, t: f64) -> Option<(f64, f64)> {
        let n = self.x.len();
        if n < 2 || t < self.x[0] || t > self.x[n - 1] {
            return None;
        }
        let i = match self.x.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => {
                return self.segment_of(i).map(|_| (self.value[i], self.derivative[i]));
            }
            Err(i) => i - 1,
        };
        let seg = self.segment_of(i)?;
        if !self.segments[seg].contains(&(i + 1)) {
            return None;
        }
        Some(hermite(
            self.x[i],
            self.x[i + 1],
            (self.value[i], self.derivative[i]),
            (self.value[i + 1], self.derivative[i + 1]),
            t,
        ))
    }
}

/// Cubic Hermite interpolant through `(y0, d0)` at `a` and `(y1, d1)` at `b`,
/// returning value and slope at `t`.
pub(crate) fn hermite(a: f64, b: f64, (y0, d0): (f64, f64), (y1, d1): (f64, f64), t: f64) -> (f64, f64) {
    let h = b - a;
    let s = (t - a) / h;
    let (s2, s3) = (s * s, s * s * s);
    let value = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
        + (s3 - 2.0 * s2 + s) * h * d0
        + (-2.0 * s3 + 3.0 * s2) * y1
        + (s3 - s2) * h * d1;
    let slope = (6.0 * s2 - 6.0 * s) / h * y0
        + (3.0 * s2 - 4.0 * s + 1.0) * d0
        + (-6.0 * s2 + 6.0 * s) / h * y1
        + (3.0 * s2 - 2.0 * s) * d1;
    (value, slope)
}

/// Narrows a sign change of the Hermite interpolant on `[x[i], x[i+1]]`.
fn refine_zero(traj: &Trajectory, i: usize) -> PoleBracket {
    let ends = |k: usize| (traj.value[k], traj.derivative[k]);
    let (a, b) = (traj.x[i], traj.x[i + 1]);
    let (mut lo, mut hi) = (a, b);
    let mut f_lo = traj.value[i];
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (f_mid, _) = hermite(a, b, ends(i), ends(i + 1), mid);
        if f_mid == 0.0 {
            return PoleBracket { lo: mid, hi: mid };
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    PoleBracket { lo, hi }
}

/// Brackets every sign change (or exact zero) of the sampled values.
pub fn zero_brackets(traj: &Trajectory) -> Vec<PoleBracket> {
    let mut out: Vec<PoleBracket> = Vec::new();
    for seg in &traj.segments {
        for i in seg.clone() {
            let y = traj.value[i];
            if y == 0.0 {
                if out.last().is_none_or(|b| b.hi < traj.x[i]) {
                    out.push(PoleBracket { lo: traj.x[i], hi: traj.x[i] });
                }
                continue;
            }
            if i + 1 < seg.end {
                let next = traj.value[i + 1];
                if next != 0.0 && (next < 0.0) != (y < 0.0) {
                    out.push(refine_zero(traj, i));
                }
            }
        }
    }
    out
}

/// Maps a sampled `phi` through `psi = P + phi'/phi`.
///
/// Points where `|phi|` falls below `pole_tol` times the running maximum of
/// `|phi|` are dropped, and the output is split at every zero of `phi`. The
/// derivative samples use `phi'' = U phi`: `psi' = P' + U - (phi'/phi)^2`.
pub fn cole_hopf_map(
    p: &Expr,
    u: &Expr,
    phi: &Trajectory,
    env: &ParamEnv,
    pole_tol: f64,
) -> Result<Trajectory, EvalError> {
    let n = phi.len();
    let dp = p.diff().compile(env);
    let (p, u) = (p.compile(env), u.compile(env));
    let mut value = alloc::vec![f64::NAN; n];
    let mut derivative = alloc::vec![f64::NAN; n];
    let mut keep = alloc::vec![false; n];
    let mut running_max = 0.0f64;
    for i in 0..n {
        let y = phi.value[i];
        if !y.is_finite() || phi.segment_of(i).is_none() {
            continue;
        }
        running_max = running_max.max(y.abs());
        if y == 0.0 || y.abs() < pole_tol * running_max {
            continue;
        }
        let x = phi.x[i];
        let w = phi.derivative[i] / y;
        value[i] = p.eval(x)? + w;
        derivative[i] = dp.eval(x)? + u.eval(x)? - w * w;
        keep[i] = value[i].is_finite() && derivative[i].is_finite();
    }

    let mut poles = zero_brackets(phi);
    // drop-outs without a sign change (e.g. a double zero) also split segments
    let mut i = 0;
    while i < n {
        if !keep[i] && phi.segment_of(i).is_some() {
            let start = i;
            while i + 1 < n && !keep[i + 1] {
                i += 1;
            }
            let lo = phi.x[start.saturating_sub(1)];
            let hi = phi.x[(i + 1).min(n - 1)];
            if !poles.iter().any(|b| b.hi >= lo && b.lo <= hi) {
                poles.push(PoleBracket { lo: phi.x[start], hi: phi.x[i] });
            }
        }
        i += 1;
    }
    poles.sort_by(|a, b| a.lo.total_cmp(&b.lo));

    let mut segments = Vec::new();
    let mut start: Option<usize> = None;
    for i in 0..n {
        if !keep[i] {
            if let Some(s) = start.take() {
                segments.push(s..i);
            }
            continue;
        }
        match start {
            None => start = Some(i),
            Some(s) => {
                let flipped = (phi.value[i] < 0.0) != (phi.value[i - 1] < 0.0);
                if flipped || !keep[i - 1] {
                    segments.push(s..i);
                    start = Some(i);
                }
            }
        }
    }
    if let Some(s) = start {
        segments.push(s..n);
    }

    Ok(Trajectory { x: phi.x.clone(), value, derivative, segments, poles })
}

/// Pointwise comparison statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMetrics {
    /// `max |a - b|`.
    pub linf: f64,
    /// `linf / max |b|`.
    pub rel_linf: f64,
    /// `sqrt(sum (a - b)^2 / sum b^2)`.
    pub rel_l2: f64,
    pub points: usize,
}

/// Compares the values of `a` and `b` on the points of `a` that lie in a
/// segment of both. If the grids differ, `b` is resampled by cubic Hermite
/// interpolation.
pub fn compare(a: &Trajectory, b: &Trajectory) -> Result<ErrorMetrics, OdeError> {
    let same_grid =
        a.x.len() == b.x.len() && a.x.iter().zip(&b.x).all(|(p, q)| (p - q).abs() <= 1e-12 * p.abs().max(1.0));
    let mut linf = 0.0f64;
    let mut b_max = 0.0f64;
    let mut diff_sq = 0.0;
    let mut ref_sq = 0.0;
    let mut points = 0;
    for seg in &a.segments {
        for i in seg.clone() {
            let other =
                if same_grid { b.segment_of(i).map(|_| b.value[i]) } else { b.interpolate(a.x[i]).map(|(v, _)| v) };
            let Some(bv) = other else { continue };
            let d = a.value[i] - bv;
            linf = linf.max(d.abs());
            b_max = b_max.max(bv.abs());
            diff_sq += d * d;
            ref_sq += bv * bv;
            points += 1;
        }
    }
    if points == 0 {
        return Err(OdeError::DisjointSegments);
    }
    let rel = |num: f64, den: f64| if den > 0.0 { num / den } else { num };
    Ok(ErrorMetrics { linf, rel_linf: rel(linf, b_max), rel_l2: rel(libm::sqrt(diff_sq), libm::sqrt(ref_sq)), points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn grid(x0: f64, x1: f64, n: usize) -> Grid {
        Grid::new(x0, x1, n).unwrap()
    }

    #[test]
    fn exponential_maps_to_constant() {
        let env = ParamEnv::new();
        let phi = Trajectory::from_expr(&parse("exp(x)").unwrap(), &grid(0.0, 2.0, 21), &env).unwrap();
        let psi = cole_hopf_map(&Expr::zero(), &Expr::one(), &phi, &env, 1e-8).unwrap();
        assert_eq!(psi.segments, alloc::vec![0..21]);
        assert!(psi.poles.is_empty());
        for (v, d) in psi.value.iter().zip(&psi.derivative) {
            assert!((v - 1.0).abs() < 1e-15);
            assert!(d.abs() < 1e-14);
        }
    }

    #[test]
    fn linear_phi_has_a_pole_at_zero() {
        let env = ParamEnv::new();
        let phi = Trajectory::from_expr(&Expr::X, &grid(-1.0, 1.0, 21), &env).unwrap();
        let psi = cole_hopf_map(&Expr::zero(), &Expr::zero(), &phi, &env, 1e-8).unwrap();
        assert_eq!(psi.segments, alloc::vec![0..10, 11..21]);
        assert_eq!(psi.poles.len(), 1);
        assert!(psi.poles[0].distance(0.0) == 0.0);
        assert!(psi.value[10].is_nan());
        for seg in &psi.segments {
            for i in seg.clone() {
                assert!((psi.value[i] - 1.0 / psi.x[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sign_change_between_samples_is_bracketed_tightly() {
        let env = ParamEnv::new();
        let phi = Trajectory::from_expr(&parse("x - 0.123").unwrap(), &grid(0.0, 1.0, 11), &env).unwrap();
        assert_eq!(phi.poles.len(), 1);
        let b = phi.poles[0];
        assert!(b.hi - b.lo < 1e-12 && b.distance(0.123) < 1e-12, "{b:?}");
        let psi = cole_hopf_map(&Expr::zero(), &Expr::zero(), &phi, &env, 1e-8).unwrap();
        assert_eq!(psi.segments, alloc::vec![0..2, 2..11]);
    }

    #[test]
    fn compare_identical_and_shifted() {
        let env = ParamEnv::new();
        let g = grid(0.0, 1.0, 11);
        let a = Trajectory::from_expr(&parse("sin(x)").unwrap(), &g, &env).unwrap();
        let m = compare(&a, &a).unwrap();
        assert_eq!((m.linf, m.rel_l2, m.points), (0.0, 0.0, 11));
        let b = Trajectory::from_expr(&parse("sin(x) + 0.001").unwrap(), &g, &env).unwrap();
        assert!((compare(&a, &b).unwrap().linf - 0.001).abs() < 1e-15);
    }

    #[test]
    fn compare_resamples_other_grid() {
        let env = ParamEnv::new();
        let e = parse("exp(-x)*cos(2*x)").unwrap();
        let a = Trajectory::from_expr(&e, &grid(0.0, 1.0, 11), &env).unwrap();
        let b = Trajectory::from_expr(&e, &grid(0.0, 1.0, 401), &env).unwrap();
        let m = compare(&a, &b).unwrap();
        assert_eq!(m.points, 11);
        assert!(m.linf < 1e-10, "{m:?}");
    }

    #[test]
    fn disjoint_segments_are_an_error() {
        let env = ParamEnv::new();
        let a = Trajectory::from_expr(&Expr::X, &grid(0.0, 1.0, 5), &env).unwrap();
        let b = Trajectory::from_expr(&Expr::X, &grid(2.0, 3.0, 5), &env).unwrap();
        assert!(matches!(compare(&a, &b), Err(OdeError::DisjointSegments)));
    }
}
