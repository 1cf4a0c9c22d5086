//! Explicit Runge-Kutta stepping for two-dimensional first-order systems,
//! sampled on a uniform output grid.

use alloc::vec::Vec;

use super::{Grid, IntegratorConfig, Method, OdeError};
use crate::expr::EvalError;

pub(crate) type State = [f64; 2];

const MAX_STEPS: usize = 2_000_000;

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy(y: State, terms: &[(f64, &State)], h: f64) -> State {
    let mut out = y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

fn finite(y: &State) -> bool {
    y[0].is_finite() && y[1].is_finite()
}

/// Integrates `y' = rhs(x, y)` from `y0` at `grid.x0`, returning the state at
/// every grid point.
pub(crate) fn integrate<F>(mut rhs: F, grid: &Grid, y0: State, cfg: &IntegratorConfig) -> Result<Vec<State>, OdeError>
where
    F: FnMut(f64, &State) -> Result<State, EvalError>,
{
    cfg.validate()?;
    match cfg.method {
        Method::Rk4Fixed => rk4(&mut rhs, grid, y0, cfg),
        Method::Adaptive => dopri5(&mut rhs, grid, y0, cfg),
    }
}

fn rk4<F>(rhs: &mut F, grid: &Grid, y0: State, cfg: &IntegratorConfig) -> Result<Vec<State>, OdeError>
where
    F: FnMut(f64, &State) -> Result<State, EvalError>,
{
    let xs = grid.points();
    let mut out = Vec::with_capacity(xs.len());
    let mut y = y0;
    out.push(y);
    for pair in xs.windows(2) {
        let span = pair[1] - pair[0];
        let sub =
            if cfg.max_step.is_finite() && cfg.max_step < span { libm::ceil(span / cfg.max_step) as usize } else { 1 };
        let h = span / sub as f64;
        for j in 0..sub {
            let x = pair[0] + j as f64 * h;
            let k1 = rhs(x, &y)?;
            let k2 = rhs(x + 0.5 * h, &axpy(y, &[(0.5, &k1)], h))?;
            let k3 = rhs(x + 0.5 * h, &axpy(y, &[(0.5, &k2)], h))?;
            let k4 = rhs(x + h, &axpy(y, &[(1.0, &k3)], h))?;
            y = axpy(y, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)], h);
            if !finite(&y) {
                return Err(OdeError::StepUnderflow { x, bracket: (x, x + h) });
            }
        }
        out.push(y);
    }
    Ok(out)
}

fn dopri5<F>(rhs: &mut F, grid: &Grid, y0: State, cfg: &IntegratorConfig) -> Result<Vec<State>, OdeError>
where
    F: FnMut(f64, &State) -> Result<State, EvalError>,
{
    let xs = grid.points();
    let mut out = Vec::with_capacity(xs.len());
    let mut x = xs[0];
    let mut y = y0;
    out.push(y);

    let spacing = grid.spacing();
    let mut h = 0.1 * spacing.min(cfg.max_step);
    let mut k1 = rhs(x, &y)?;
    let mut steps = 0usize;

    for &target in &xs[1..] {
        while x < target {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(OdeError::MaxStepsExceeded { x });
            }
            let remaining = target - x;
            let h_try = h.min(cfg.max_step);
            let truncated = h_try >= remaining;
            let step = if truncated { remaining } else { h_try };
            let h_min = 1e-13 * x.abs().max(1.0);
            if step < h_min && !truncated {
                return Err(OdeError::StepUnderflow { x, bracket: (x, x + h.max(h_min)) });
            }

            let k2 = rhs(x + C2 * step, &axpy(y, &[(A21, &k1)], step))?;
            let k3 = rhs(x + C3 * step, &axpy(y, &[(A31, &k1), (A32, &k2)], step))?;
            let k4 = rhs(x + C4 * step, &axpy(y, &[(A41, &k1), (A42, &k2), (A43, &k3)], step))?;
            let k5 = rhs(x + C5 * step, &axpy(y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], step))?;
            let k6 = rhs(x + step, &axpy(y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], step))?;
            let y_new = axpy(y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], step);
            let x_new = if truncated { target } else { x + step };
            let k7 = if finite(&y_new) { rhs(x_new, &y_new)? } else { [f64::NAN; 2] };

            let mut err = 0.0;
            for i in 0..2 {
                let e = step * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = cfg.atol + cfg.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / sc) * (e / sc);
            }
            let err = libm::sqrt(err / 2.0);

            if err.is_finite() && err <= 1.0 && finite(&k7) {
                let factor = if err == 0.0 { 5.0 } else { (0.9 * libm::pow(err, -0.2)).clamp(0.2, 5.0) };
                let proposal = step * factor;
                h = if truncated { h.max(proposal) } else { proposal };
                x = x_new;
                y = y_new;
                k1 = k7;
            } else {
                let factor = if err.is_finite() { (0.9 * libm::pow(err, -0.2)).clamp(0.1, 0.9) } else { 0.1 };
                h = step * factor;
                if h < h_min {
                    return Err(OdeError::StepUnderflow { x, bracket: (x, x + step) });
                }
            }
        }
        out.push(y);
    }
    Ok(out)
}
