//! Numerical layer: integration of the linear equation `phi'' = U phi` and of
//! the full nonlinear equation, the sampled Cole-Hopf map, residuals and
//! trajectory comparison.

mod integrator;
mod residual;
mod trajectory;

use alloc::vec::Vec;

pub use residual::{
    lienard_residual, lienard_residual_exact, residual, residual_exact, ResidualReport, SegmentResidual,
};
pub use trajectory::{cole_hopf_map, compare, zero_brackets, ErrorMetrics, PoleBracket, Trajectory};

use crate::colehopf::TransformBundle;
use crate::expr::{EvalError, Expr, ParamEnv};

/// Samples below this fraction of the running `max |phi|` count as zeros.
pub const DEFAULT_POLE_TOL: f64 = 1e-8;
/// Half-width of the band around each pole excluded from residual norms.
pub const DEFAULT_GUARD_TOL: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OdeError {
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("step size underflow at x = {x}; solution blows up in [{}, {}]", bracket.0, bracket.1)]
    StepUnderflow { x: f64, bracket: (f64, f64) },
    #[error("step budget exhausted at x = {x}")]
    MaxStepsExceeded { x: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("no segment has the five samples a residual stencil needs")]
    SegmentTooShort,
    #[error("trajectories share no pole-free samples")]
    DisjointSegments,
}

/// Uniform output grid of `n` points on `[x0, x1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x0: f64,
    pub x1: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(x0: f64, x1: f64, n: usize) -> Result<Self, OdeError> {
        if !(x0.is_finite() && x1.is_finite()) {
            return Err(OdeError::InvalidGrid("endpoints must be finite"));
        }
        if x1 <= x0 {
            return Err(OdeError::InvalidGrid("x1 must exceed x0"));
        }
        if n < 2 {
            return Err(OdeError::InvalidGrid("need at least two points"));
        }
        Ok(Grid { x0, x1, n })
    }

    pub fn spacing(&self) -> f64 {
        (self.x1 - self.x0) / (self.n - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.spacing();
        let mut xs: Vec<f64> = (0..self.n).map(|i| self.x0 + i as f64 * h).collect();
        xs[self.n - 1] = self.x1;
        xs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Classical fourth-order Runge-Kutta with a fixed step.
    Rk4Fixed,
    /// Dormand-Prince 5(4) with error control.
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Largest step; for [`Method::Rk4Fixed`] it sets the step when smaller than
    /// the grid spacing.
    pub max_step: f64,
    pub method: Method,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { rtol: 1e-9, atol: 1e-12, max_step: f64::INFINITY, method: Method::Adaptive }
    }
}

impl IntegratorConfig {
    pub fn rk4(max_step: f64) -> Self {
        IntegratorConfig { max_step, method: Method::Rk4Fixed, ..Default::default() }
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn validate(&self) -> Result<(), OdeError> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(OdeError::InvalidConfig("rtol and atol must be positive"));
        }
        if self.max_step.is_nan() || self.max_step <= 0.0 {
            return Err(OdeError::InvalidConfig("max_step must be positive"));
        }
        Ok(())
    }
}

/// Grid, initial data for `phi` and tolerances of one numerical pipeline run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub grid: Grid,
    pub phi0: f64,
    pub dphi0: f64,
    pub integrator: IntegratorConfig,
    pub pole_tol: f64,
    pub guard_tol: f64,
}

impl SolveOptions {
    /// `phi(x0) = 1`, `phi'(x0) = 0` with default tolerances.
    pub fn new(grid: Grid) -> Self {
        SolveOptions {
            grid,
            phi0: 1.0,
            dphi0: 0.0,
            integrator: IntegratorConfig::default(),
            pole_tol: DEFAULT_POLE_TOL,
            guard_tol: DEFAULT_GUARD_TOL,
        }
    }
}

/// Integrates `phi'' = U phi` and maps the result to `psi = P + phi'/phi`.
/// Returns `(phi, psi)`.
pub fn linearize(
    p: &Expr,
    u: &Expr,
    env: &ParamEnv,
    opts: &SolveOptions,
) -> Result<(Trajectory, Trajectory), OdeError> {
    let u = u.substitute(env).simplify();
    let p = p.substitute(env).simplify();
    let phi = integrate_linear(&u, &opts.grid, opts.phi0, opts.dphi0, env, &opts.integrator)?;
    let psi = cole_hopf_map(&p, &u, &phi, env, opts.pole_tol)?;
    Ok((phi, psi))
}

fn into_trajectory(grid: &Grid, states: Vec<[f64; 2]>) -> Trajectory {
    let value = states.iter().map(|s| s[0]).collect();
    let derivative = states.iter().map(|s| s[1]).collect();
    Trajectory::from_samples(grid.points(), value, derivative)
}

/// Solves `phi'' = U(x) phi` with `phi(x0) = phi0`, `phi'(x0) = dphi0`.
///
/// Zeros of `phi` are reported in [`Trajectory::poles`]; they are poles of
/// the transformed solution, not of `phi`.
pub fn integrate_linear(
    u: &Expr,
    grid: &Grid,
    phi0: f64,
    dphi0: f64,
    env: &ParamEnv,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, OdeError> {
    let u = u.compile(env);
    let states = integrator::integrate(|x, y| Ok([y[1], u.eval(x)? * y[0]]), grid, [phi0, dphi0], cfg)?;
    let mut traj = into_trajectory(grid, states);
    traj.poles = zero_brackets(&traj);
    Ok(traj)
}

/// Direction of a direct integration over a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// From `x0` towards `x1`.
    Forward,
    /// From `x1` towards `x0`.
    Backward,
}

/// Integrates the perturbed Van der Pol equation of `bundle` directly,
/// without any use of the linearization. `psi0`, `dpsi0` are the data at
/// `x0`.
pub fn integrate_vdp(
    bundle: &TransformBundle,
    grid: &Grid,
    psi0: f64,
    dpsi0: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, OdeError> {
    integrate_vdp_in(bundle, grid, psi0, dpsi0, Direction::Forward, cfg)
}

/// As [`integrate_vdp`], with the data given at the start of `direction`:
/// at `x0` going forward, at `x1` going backward.
///
/// Solutions produced by the transformation lie on the invariant surface
/// `psi' = P' + U - (psi - P)^2`. Off that surface perturbations grow like
/// `exp(int lambda)` with `lambda = mu beta - mu psi^2 + 2 (psi - P)`, so
/// only one direction may be numerically usable; see [`transverse_growth`].
pub fn integrate_vdp_in(
    bundle: &TransformBundle,
    grid: &Grid,
    psi_start: f64,
    dpsi_start: f64,
    direction: Direction,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, OdeError> {
    let bundle = bundle.bound();
    let env = bundle.env();
    let p = bundle.params;
    let [v, h, g, f] = [&bundle.v, &bundle.h, &bundle.g, &bundle.f].map(|e| e.compile(&env));
    let ddpsi = |x: f64, psi: f64, dpsi: f64| -> Result<f64, EvalError> {
        let psi2 = psi * psi;
        let (v, h, g, f) = (v.eval(x)?, h.eval(x)?, g.eval(x)?, f.eval(x)?);
        Ok(p.mu * (p.beta - psi2) * dpsi - p.alpha * psi + v * psi2 + h * psi2 * psi + g * psi2 * psi2 + f)
    };
    match direction {
        Direction::Forward => {
            let rhs = |x: f64, y: &[f64; 2]| Ok([y[1], ddpsi(x, y[0], y[1])?]);
            let states = integrator::integrate(rhs, grid, [psi_start, dpsi_start], cfg)?;
            Ok(into_trajectory(grid, states))
        }
        Direction::Backward => {
            // s = x0 + x1 - x runs forward while x runs backward
            let mirror = |s: f64| grid.x0 + grid.x1 - s;
            let rhs = |s: f64, y: &[f64; 2]| Ok([y[1], ddpsi(mirror(s), y[0], -y[1])?]);
            let states = integrator::integrate(rhs, grid, [psi_start, -dpsi_start], cfg).map_err(|e| match e {
                OdeError::StepUnderflow { x, bracket } => {
                    OdeError::StepUnderflow { x: mirror(x), bracket: (mirror(bracket.1), mirror(bracket.0)) }
                }
                OdeError::MaxStepsExceeded { x } => OdeError::MaxStepsExceeded { x: mirror(x) },
                e => e,
            })?;
            let value = states.iter().rev().map(|s| s[0]).collect();
            let derivative = states.iter().rev().map(|s| -s[1]).collect();
            Ok(Trajectory::from_samples(grid.points(), value, derivative))
        }
    }
}

/// Largest amplification, as a natural logarithm, that a perturbation off the
/// transformation's invariant surface picks up along `traj` when integrating
/// forward and backward: `(max_x int_x0^x lambda, max_x int_x^x1 -lambda)`
/// with the trapezoidal rule on each segment.
pub fn transverse_growth(bundle: &TransformBundle, traj: &Trajectory) -> Result<(f64, f64), EvalError> {
    let env = bundle.env();
    let p = bundle.p.compile(&env);
    let (mu, mb) = (bundle.params.mu, bundle.params.mu_beta());
    let (mut fwd, mut bwd) = (0.0f64, 0.0f64);
    for seg in &traj.segments {
        let lambda = seg
            .clone()
            .map(|i| {
                let psi = traj.value[i];
                Ok(mb - mu * psi * psi + 2.0 * (psi - p.eval(traj.x[i])?))
            })
            .collect::<Result<Vec<f64>, EvalError>>()?;
        let x = &traj.x[seg.clone()];
        let steps: Vec<f64> = (1..x.len()).map(|i| 0.5 * (lambda[i] + lambda[i - 1]) * (x[i] - x[i - 1])).collect();
        let mut acc = 0.0f64;
        for s in &steps {
            acc += s;
            fwd = fwd.max(acc);
        }
        acc = 0.0;
        for s in steps.iter().rev() {
            acc -= s;
            bwd = bwd.max(acc);
        }
    }
    Ok((fwd, bwd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn grid_validation() {
        assert!(Grid::new(0.0, 1.0, 2).is_ok());
        assert!(matches!(Grid::new(1.0, 1.0, 5), Err(OdeError::InvalidGrid(_))));
        assert!(matches!(Grid::new(0.0, 1.0, 1), Err(OdeError::InvalidGrid(_))));
        let g = Grid::new(0.0, 5.0, 501).unwrap();
        let xs = g.points();
        assert_eq!((xs[0], xs[500]), (0.0, 5.0));
        assert!((xs[1] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        let env = ParamEnv::new();
        let g = Grid::new(0.0, 1.0, 3).unwrap();
        let cfg = IntegratorConfig::default().with_tolerances(0.0, 1e-12);
        assert!(matches!(integrate_linear(&Expr::zero(), &g, 1.0, 0.0, &env, &cfg), Err(OdeError::InvalidConfig(_))));
    }

    #[test]
    fn free_particle_is_exact() {
        let env = ParamEnv::new();
        let g = Grid::new(0.0, 3.0, 31).unwrap();
        let t = integrate_linear(&Expr::zero(), &g, 1.0, 1.0, &env, &IntegratorConfig::default()).unwrap();
        for (x, v) in t.x.iter().zip(&t.value) {
            assert!((v - (1.0 + x)).abs() <= 1e-12);
        }
    }

    #[test]
    fn hyperbolic_cosine() {
        let env = ParamEnv::new();
        let g = Grid::new(0.0, 2.0, 21).unwrap();
        let t = integrate_linear(&Expr::one(), &g, 1.0, 0.0, &env, &IntegratorConfig::default()).unwrap();
        let want = 3.7621956910836314; // cosh(2)
        assert!((t.value[20] - want).abs() <= 1e-9 * want);
    }

    #[test]
    fn sine_returns_to_zero_at_pi() {
        let env = ParamEnv::new();
        let g = Grid::new(0.0, core::f64::consts::PI, 11).unwrap();
        let t = integrate_linear(&Expr::c(-1.0), &g, 0.0, 1.0, &env, &IntegratorConfig::default()).unwrap();
        assert!(t.value[10].abs() <= 1e-9);
        // the start is an exact zero; the end is a near-zero sample
        assert!(!t.poles.is_empty());
    }

    #[test]
    fn domain_errors_propagate() {
        let env = ParamEnv::new();
        let g = Grid::new(-1.0, 1.0, 5).unwrap();
        let u = parse("log(x)").unwrap();
        let err = integrate_linear(&u, &g, 1.0, 0.0, &env, &IntegratorConfig::default()).unwrap_err();
        assert!(matches!(err, OdeError::Eval(_)));
    }

    #[test]
    fn blow_up_is_reported_with_a_bracket() {
        // psi'' = psi^4 (mu = beta = alpha = 0, g = 1) from psi = 1, psi' = 1
        // escapes to infinity in finite x.
        let bundle = TransformBundle::raw(
            crate::params::VdpParams::new(0.0, 0.0, 0.0),
            Expr::zero(),
            Expr::zero(),
            Expr::one(),
            Expr::zero(),
            Expr::zero(),
            Expr::zero(),
        );
        let g = Grid::new(0.0, 5.0, 51).unwrap();
        let err = integrate_vdp(&bundle, &g, 1.0, 1.0, &IntegratorConfig::default()).unwrap_err();
        match err {
            OdeError::StepUnderflow { bracket, .. } => assert!(bracket.0 > 0.0 && bracket.0 < 5.0),
            OdeError::MaxStepsExceeded { x } => assert!(x > 0.0 && x < 5.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn backward_integration_runs_from_the_right_end() {
        // psi'' = -psi with data at x1 = 3
        let z = Expr::zero();
        let bundle = TransformBundle::raw(
            crate::params::VdpParams::new(0.0, 0.0, 1.0),
            z.clone(),
            z.clone(),
            z.clone(),
            z.clone(),
            z.clone(),
            z,
        );
        let g = Grid::new(0.0, 3.0, 31).unwrap();
        let cfg = IntegratorConfig::default().with_tolerances(1e-12, 1e-14);
        let t = integrate_vdp_in(&bundle, &g, 3f64.cos(), -3f64.sin(), Direction::Backward, &cfg).unwrap();
        for ((x, v), d) in t.x.iter().zip(&t.value).zip(&t.derivative) {
            assert!((v - x.cos()).abs() < 1e-10 && (d + x.sin()).abs() < 1e-10, "x = {x}");
        }
        assert_eq!(t.x, g.points());
    }

    #[test]
    fn backward_blow_up_is_reported_in_x() {
        // psi'' = psi^4 going left from x1 = 5 with psi' = -1 blows up before x0
        let bundle = TransformBundle::raw(
            crate::params::VdpParams::new(0.0, 0.0, 0.0),
            Expr::zero(),
            Expr::zero(),
            Expr::one(),
            Expr::zero(),
            Expr::zero(),
            Expr::zero(),
        );
        let g = Grid::new(0.0, 5.0, 51).unwrap();
        let err =
            integrate_vdp_in(&bundle, &g, 1.0, -1.0, Direction::Backward, &IntegratorConfig::default()).unwrap_err();
        match err {
            OdeError::StepUnderflow { x, bracket } => {
                assert!(x > 0.0 && x < 5.0 && bracket.0 <= bracket.1, "{x} {bracket:?}")
            }
            OdeError::MaxStepsExceeded { x } => assert!(x > 0.0 && x < 5.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn transverse_growth_of_the_reciprocal() {
        // P = 0, mu = 1, beta = 2: lambda = 2 - 1/x^2 + 2/x > 0 on [1, 5]
        let bundle = crate::colehopf::solve_chain(&Expr::zero(), crate::params::VdpParams::new(1.0, 2.0, 0.0));
        let g = Grid::new(1.0, 5.0, 4001).unwrap();
        let t = Trajectory::from_expr(&parse("1/x").unwrap(), &g, &ParamEnv::new()).unwrap();
        let (fwd, bwd) = transverse_growth(&bundle, &t).unwrap();
        let exact = 8.0 - 0.8 + 2.0 * 5f64.ln();
        assert!((fwd - exact).abs() < 1e-5, "{fwd} vs {exact}");
        assert_eq!(bwd, 0.0);
    }
}
