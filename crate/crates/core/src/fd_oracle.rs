//! Explicit finite-volume solver for `u_t + φ(u)_x − t A(u)_xx = 0` with
//! Riemann data, used as an independent check on the profile.
//!
//! Convection uses the Engquist–Osher flux, which has a closed form for the
//! piecewise-linear `φ`; diffusion uses the centered flux `−t (A_{i+1} − A_i)/h`.

use log::debug;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ValidatedProblem;
use crate::profile::SelfSimilarProfile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdParams {
    /// The grid covers `[−L, L]` (rounded up to a whole number of cells).
    pub half_width: f64,
    pub h: f64,
    pub t_final: f64,
    pub cfl: f64,
}

impl FdParams {
    /// Parameters with the smallest admissible half-width.
    pub fn for_problem(problem: &ValidatedProblem, h: f64, t_final: f64, cfl: f64) -> Self {
        Self {
            half_width: required_half_width(problem, t_final),
            h,
            t_final,
            cfl,
        }
    }
}

/// `t·max|v| + 6·max(a)·√t + 1`: far enough that the boundaries stay at rest.
pub fn required_half_width(problem: &ValidatedProblem, t_final: f64) -> f64 {
    t_final * problem.max_abs_velocity() + 6.0 * problem.max_diffusion() * t_final.sqrt() + 1.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdSolution {
    problem: ValidatedProblem,
    pub x_centers: Vec<f64>,
    pub values: Vec<f64>,
    pub h: f64,
    pub t_final: f64,
    pub steps_taken: usize,
    /// `∫ (F_left − F_right) dt` over the run: the mass that entered the grid.
    pub boundary_inflow: f64,
}

impl FdSolution {
    pub fn problem(&self) -> &ValidatedProblem {
        &self.problem
    }

    /// `h · Σ (u_i(t) − u_i(0))`.
    pub fn mass_change(&self) -> f64 {
        let (alpha, beta) = (self.problem.alpha(), self.problem.beta());
        self.h
            * self
                .x_centers
                .iter()
                .zip(&self.values)
                .map(|(&x, &u)| u - if x < 0.0 { alpha } else { beta })
                .sum::<f64>()
    }
}

/// A piecewise-linear function of the state, tabulated at the breakpoints.
struct StateTable {
    nodes: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl StateTable {
    fn new(problem: &ValidatedProblem, slope: impl Fn(usize) -> f64) -> Self {
        let n = problem.n();
        let slopes: Vec<f64> = (0..n).map(&slope).collect();
        let mut values = vec![0.0];
        for k in 0..n {
            values.push(values[k] + slopes[k] * problem.width(k));
        }
        Self {
            nodes: problem.u().to_vec(),
            values,
            slopes,
        }
    }

    #[inline]
    fn eval(&self, u: f64) -> f64 {
        let n = self.slopes.len();
        let mut k = 0;
        while k + 1 < n && u >= self.nodes[k + 1] {
            k += 1;
        }
        self.values[k] + self.slopes[k] * (u - self.nodes[k])
    }
}

pub fn solve_fd(problem: &ValidatedProblem, params: &FdParams) -> Result<FdSolution> {
    let FdParams {
        half_width,
        h,
        t_final,
        cfl,
    } = *params;
    if !(cfl > 0.0 && cfl < 1.0) {
        return Err(Error::UnstableParameters(format!(
            "cfl = {cfl} must lie in (0, 1)"
        )));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::UnstableParameters(format!(
            "h = {h} must be positive"
        )));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::UnstableParameters(format!(
            "t_final = {t_final} must be nonnegative"
        )));
    }
    let needed = required_half_width(problem, t_final);
    if !(half_width >= needed) {
        return Err(Error::UnstableParameters(format!(
            "L = {half_width} is below the required {needed}"
        )));
    }
    if h > half_width {
        return Err(Error::UnstableParameters(format!(
            "h = {h} exceeds L = {half_width}"
        )));
    }

    let cells = 2 * (half_width / h).ceil() as usize;
    let left = -(cells as f64) * h / 2.0;
    let x_centers: Vec<f64> = (0..cells).map(|i| left + (i as f64 + 0.5) * h).collect();
    let (alpha, beta) = (problem.alpha(), problem.beta());
    let mut u: Vec<f64> = (0..cells)
        .map(|i| if i < cells / 2 { alpha } else { beta })
        .collect();

    let plus = StateTable::new(problem, |k| problem.v()[k].max(0.0));
    let minus = StateTable::new(problem, |k| problem.v()[k].min(0.0));
    let potential = StateTable::new(problem, |k| problem.a()[k].powi(2));
    let ghost_right = (plus.eval(beta), minus.eval(beta), potential.eval(beta));

    let vmax = problem.max_abs_velocity();
    let a2max = problem.max_diffusion().powi(2);
    let mut p = vec![0.0; cells + 2];
    let mut m = vec![0.0; cells + 2];
    let mut pot = vec![0.0; cells + 2];
    let mut flux = vec![0.0; cells + 1];
    (p[cells + 1], m[cells + 1], pot[cells + 1]) = ghost_right;

    let mut t = 0.0;
    let mut steps = 0;
    let mut inflow = 0.0;
    while t < t_final {
        let remaining = t_final - t;
        // dt · (vmax/h + 2 (t + dt) a²/h²) = cfl
        let b = vmax / h + 2.0 * t * a2max / (h * h);
        let c = 2.0 * a2max / (h * h);
        let dt = if b == 0.0 && c == 0.0 {
            remaining
        } else {
            (2.0 * cfl / (b + (b * b + 4.0 * c * cfl).sqrt())).min(remaining)
        };
        for (i, &ui) in u.iter().enumerate() {
            p[i + 1] = plus.eval(ui);
            m[i + 1] = minus.eval(ui);
            pot[i + 1] = potential.eval(ui);
        }
        let nu = t / h;
        for j in 0..=cells {
            flux[j] = p[j] + m[j + 1] - nu * (pot[j + 1] - pot[j]);
        }
        let ratio = dt / h;
        for (i, ui) in u.iter_mut().enumerate() {
            *ui -= ratio * (flux[i + 1] - flux[i]);
        }
        inflow += dt * (flux[0] - flux[cells]);
        t = if dt == remaining { t_final } else { t + dt };
        steps += 1;
    }
    debug!("fd: {cells} cells, {steps} steps to t = {t_final}");
    Ok(FdSolution {
        problem: problem.clone(),
        x_centers,
        values: u,
        h,
        t_final,
        steps_taken: steps,
        boundary_inflow: inflow,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub l1_error: f64,
    pub linf_error_away_from_jumps: f64,
}

/// Distance between the grid solution and `u(x/t)`; the sup-norm skips cells
/// within `10h` of any discontinuity ray.
pub fn compare(fd: &FdSolution, profile: &SelfSimilarProfile) -> Result<Comparison> {
    if fd.problem() != profile.problem() {
        return Err(Error::GridMismatch(
            "solution and profile belong to different problems".into(),
        ));
    }
    if !(fd.t_final > 0.0) {
        return Err(Error::GridMismatch(format!(
            "t_final = {} leaves no self-similar scale",
            fd.t_final
        )));
    }
    let t = fd.t_final;
    let rays: Vec<f64> = profile.discontinuities().iter().map(|j| j.c * t).collect();
    let mut l1 = 0.0;
    let mut linf = 0.0_f64;
    for (&x, &value) in fd.x_centers.iter().zip(&fd.values) {
        let err = (value - profile.eval(x / t)).abs();
        l1 += err;
        if rays.iter().all(|r| (x - r).abs() > 10.0 * fd.h) {
            linf = linf.max(err);
        }
    }
    Ok(Comparison {
        l1_error: fd.h * l1,
        linf_error_away_from_jumps: linf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::SpeedVector;
    use crate::model::{validate, PiecewiseProblem};

    fn problem(u: &[f64], v: &[f64], a: &[f64]) -> ValidatedProblem {
        validate(PiecewiseProblem::new(u.to_vec(), v.to_vec(), a.to_vec())).unwrap()
    }

    fn profile(p: &ValidatedProblem, xi: &[f64]) -> SelfSimilarProfile {
        SelfSimilarProfile::build(p, &SpeedVector::new(p, xi.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn rejects_unstable_parameters() {
        let p = problem(&[0.0, 1.0], &[0.0], &[1.0]);
        let base = FdParams::for_problem(&p, 0.01, 1.0, 0.4);
        for bad in [
            FdParams { cfl: 1.0, ..base },
            FdParams { cfl: 0.0, ..base },
            FdParams { h: -0.1, ..base },
            FdParams {
                half_width: 2.0,
                ..base
            },
        ] {
            assert!(matches!(
                solve_fd(&p, &bad),
                Err(Error::UnstableParameters(_))
            ));
        }
    }

    #[test]
    fn linear_diffusion_converges_at_first_order() {
        let p = problem(&[0.0, 1.0], &[0.0], &[1.0]);
        let prof = profile(&p, &[]);
        let errors: Vec<f64> = [0.02, 0.01, 0.005]
            .iter()
            .map(|&h| {
                let fd = solve_fd(&p, &FdParams::for_problem(&p, h, 1.0, 0.4)).unwrap();
                compare(&fd, &prof).unwrap().l1_error
            })
            .collect();
        assert!(errors[2] <= 0.02, "{errors:?}");
        let order = (errors[0] / errors[2]).log2() / 2.0;
        assert!(order >= 0.8, "{errors:?}");
    }

    #[test]
    fn shock_moves_at_its_speed() {
        let p = problem(&[0.0, 1.0], &[3.0], &[0.0]);
        let exact = profile(&p, &[3.0]);
        let wrong = profile(&p, &[2.5]);
        let mut last = f64::INFINITY;
        for h in [0.02, 0.01, 0.005] {
            let fd = solve_fd(&p, &FdParams::for_problem(&p, h, 1.0, 0.4)).unwrap();
            let e = compare(&fd, &exact).unwrap();
            assert!(e.l1_error < last);
            last = e.l1_error;
            assert!(compare(&fd, &wrong).unwrap().l1_error > 0.45);
        }
    }

    #[test]
    fn conservation_bounds_and_monotonicity() {
        let p = problem(&[0.0, 0.5, 1.2, 2.0], &[1.0, -2.0, 0.5], &[0.0, 0.8, 0.0]);
        let fd = solve_fd(&p, &FdParams::for_problem(&p, 0.02, 1.5, 0.4)).unwrap();
        assert!((fd.mass_change() - fd.boundary_inflow).abs() <= 1e-10 * 1.5);
        assert!(fd.values.iter().all(|&u| u >= p.alpha() && u <= p.beta()));
        assert!(fd.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn zero_time_changes_nothing() {
        let p = problem(&[0.0, 1.0], &[1.0], &[0.5]);
        let fd = solve_fd(&p, &FdParams::for_problem(&p, 0.1, 0.0, 0.4)).unwrap();
        assert_eq!(fd.steps_taken, 0);
        assert_eq!(fd.mass_change(), 0.0);
        assert!(matches!(
            compare(&fd, &profile(&p, &[])),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn mismatched_problem() {
        let p = problem(&[0.0, 1.0], &[1.0], &[0.5]);
        let q = problem(&[0.0, 1.0], &[1.0], &[0.6]);
        let fd = solve_fd(&p, &FdParams::for_problem(&p, 0.1, 1.0, 0.4)).unwrap();
        assert!(matches!(
            compare(&fd, &profile(&q, &[])),
            Err(Error::GridMismatch(_))
        ));
    }
}
