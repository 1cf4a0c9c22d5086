use alloc::vec::Vec;
use core::ops::Range;

use super::{Grid, OdeError, Trajectory};
use crate::colehopf::TransformBundle;
use crate::expr::{Compiled, EvalError, Expr, ParamEnv};

/// Residual statistics over one pole-free segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentResidual {
    pub range: Range<usize>,
    pub max_abs: f64,
    /// Discrete L2 norm, `sqrt(sum R^2 dx)`.
    pub l2: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub segments: Vec<SegmentResidual>,
    /// Segments with fewer than five samples, which the stencil cannot cover.
    pub skipped_segments: Vec<Range<usize>>,
    pub max_abs: f64,
    pub l2: f64,
    pub points: usize,
}

impl ResidualReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.points > 0 && self.max_abs <= tol
    }

    fn from_segments(segments: Vec<SegmentResidual>, skipped_segments: Vec<Range<usize>>) -> Self {
        let max_abs = segments.iter().map(|s| s.max_abs).fold(0.0, f64::max);
        let l2 = libm::sqrt(segments.iter().map(|s| s.l2 * s.l2).sum::<f64>());
        let points = segments.iter().map(|s| s.points).sum();
        ResidualReport { segments, skipped_segments, max_abs, l2, points }
    }
}

/// `psi'' - mu (beta - psi^2) psi' + alpha psi - v psi^2 - h psi^3 - g psi^4 - f`.
struct VdpTerms {
    params: crate::params::VdpParams,
    vhgf: [Compiled; 4],
}

impl VdpTerms {
    fn new(bundle: &TransformBundle) -> Self {
        let bundle = bundle.bound();
        let env = bundle.env();
        let vhgf = [&bundle.v, &bundle.h, &bundle.g, &bundle.f].map(|e| e.compile(&env));
        VdpTerms { params: bundle.params, vhgf }
    }
}

fn vdp_residual_at(t: &VdpTerms, x: f64, psi: f64, dpsi: f64, ddpsi: f64) -> Result<f64, EvalError> {
    let p = &t.params;
    let [v, h, g, f] = &t.vhgf;
    let (v, h, g, f) = (v.eval(x)?, h.eval(x)?, g.eval(x)?, f.eval(x)?);
    let psi2 = psi * psi;
    Ok(ddpsi - p.mu * (p.beta - psi2) * dpsi + p.alpha * psi - v * psi2 - h * psi2 * psi - g * psi2 * psi2 - f)
}

/// `psi'' + (c0 + c1 psi + c2 psi^2) psi' + sum b_i psi^i`.
fn lienard_residual_at(
    c: &[Compiled; 3],
    b: &[Compiled; 5],
    x: f64,
    psi: f64,
    dpsi: f64,
    ddpsi: f64,
) -> Result<f64, EvalError> {
    let damping = c[0].eval(x)? + psi * (c[1].eval(x)? + psi * c[2].eval(x)?);
    let mut restoring = 0.0;
    for bi in b.iter().rev() {
        restoring = restoring * psi + bi.eval(x)?;
    }
    Ok(ddpsi + damping * dpsi + restoring)
}

/// Residual of a sampled trajectory, with `psi''` from the five-point central
/// difference of the derivative samples. The two outermost samples of each
/// segment and every sample within `guard_tol` of a pole bracket are skipped.
fn sampled<F>(traj: &Trajectory, guard_tol: f64, mut r: F) -> Result<ResidualReport, OdeError>
where
    F: FnMut(f64, f64, f64, f64) -> Result<f64, EvalError>,
{
    let mut segments = Vec::new();
    let mut skipped = Vec::new();
    for seg in &traj.segments {
        if seg.len() < 5 {
            skipped.push(seg.clone());
            continue;
        }
        let (mut max_abs, mut sum_sq, mut points) = (0.0f64, 0.0, 0usize);
        for i in seg.start + 2..seg.end - 2 {
            let x = traj.x[i];
            if traj.poles.iter().any(|b| b.distance(x) < guard_tol) {
                continue;
            }
            let d = &traj.derivative;
            let h = (traj.x[i + 2] - traj.x[i - 2]) / 4.0;
            let ddpsi = (d[i - 2] - 8.0 * d[i - 1] + 8.0 * d[i + 1] - d[i + 2]) / (12.0 * h);
            let res = r(x, traj.value[i], d[i], ddpsi)?;
            max_abs = max_abs.max(res.abs());
            sum_sq += res * res * h;
            points += 1;
        }
        segments.push(SegmentResidual { range: seg.clone(), max_abs, l2: libm::sqrt(sum_sq), points });
    }
    if segments.is_empty() {
        return Err(OdeError::SegmentTooShort);
    }
    Ok(ResidualReport::from_segments(segments, skipped))
}

/// Residual of a closed-form `psi`, differentiated symbolically.
fn exact<F>(psi: &Expr, grid: &Grid, env: &ParamEnv, mut r: F) -> Result<ResidualReport, OdeError>
where
    F: FnMut(f64, f64, f64, f64) -> Result<f64, EvalError>,
{
    let d1 = psi.diff();
    let d2 = d1.diff().compile(env);
    let (psi, d1) = (psi.compile(env), d1.compile(env));
    let xs = grid.points();
    let h = grid.spacing();
    let (mut max_abs, mut sum_sq) = (0.0f64, 0.0);
    for &x in &xs {
        let res = r(x, psi.eval(x)?, d1.eval(x)?, d2.eval(x)?)?;
        max_abs = max_abs.max(res.abs());
        sum_sq += res * res * h;
    }
    let seg = SegmentResidual { range: 0..xs.len(), max_abs, l2: libm::sqrt(sum_sq), points: xs.len() };
    Ok(ResidualReport::from_segments(alloc::vec![seg], Vec::new()))
}

/// Residual of the perturbed Van der Pol equation defined by `bundle` along a
/// sampled trajectory.
pub fn residual(bundle: &TransformBundle, traj: &Trajectory, guard_tol: f64) -> Result<ResidualReport, OdeError> {
    let t = VdpTerms::new(bundle);
    sampled(traj, guard_tol, |x, psi, dpsi, ddpsi| vdp_residual_at(&t, x, psi, dpsi, ddpsi))
}

/// Residual of the perturbed Van der Pol equation for a closed-form `psi`.
pub fn residual_exact(bundle: &TransformBundle, psi: &Expr, grid: &Grid) -> Result<ResidualReport, OdeError> {
    let t = VdpTerms::new(bundle);
    exact(psi, grid, &bundle.env(), |x, psi, dpsi, ddpsi| vdp_residual_at(&t, x, psi, dpsi, ddpsi))
}

/// Residual of `psi'' + (sum c_i psi^i) psi' + sum b_i psi^i` along a sampled
/// trajectory.
pub fn lienard_residual(
    c: &[Expr; 3],
    b: &[Expr; 5],
    traj: &Trajectory,
    env: &ParamEnv,
    guard_tol: f64,
) -> Result<ResidualReport, OdeError> {
    let (c, b) = (c.each_ref().map(|e| e.compile(env)), b.each_ref().map(|e| e.compile(env)));
    sampled(traj, guard_tol, |x, psi, dpsi, ddpsi| lienard_residual_at(&c, &b, x, psi, dpsi, ddpsi))
}

/// Lienard residual for a closed-form `psi`.
pub fn lienard_residual_exact(
    c: &[Expr; 3],
    b: &[Expr; 5],
    psi: &Expr,
    grid: &Grid,
    env: &ParamEnv,
) -> Result<ResidualReport, OdeError> {
    let (c, b) = (c.each_ref().map(|e| e.compile(env)), b.each_ref().map(|e| e.compile(env)));
    exact(psi, grid, env, |x, psi, dpsi, ddpsi| lienard_residual_at(&c, &b, x, psi, dpsi, ddpsi))
}
