//! Minimization of the discrete entropy over the ordered cone.
//!
//! Purely hyperbolic problems reduce to a weighted isotonic regression and are
//! solved exactly. Otherwise a projected Newton method runs in difference
//! coordinates `(ξ_1, ξ_2 − ξ_1, …)`, where the cone becomes a set of simple
//! sign constraints on the gaps of the `a_k = 0` links.

mod kkt;
mod pava;

pub use kkt::{kkt_check, Group, GroupKkt, GroupStructure, KktReport};
pub use pava::pava;

use log::debug;
use serde::Serialize;

use crate::entropy::{check_feasible, entropy, gradient, hessian, SpeedVector};
use crate::error::{Error, Result};
use crate::model::ValidatedProblem;
use crate::tridiag::SymTridiagonal;
use kkt::violation;
use pava::project_runs;

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;
const POLISH_STEPS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Exact isotonic regression when every `a_k = 0`, projected Newton otherwise.
    #[default]
    Auto,
    /// Always use the iterative solver.
    ProjectedNewton,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeOptions {
    /// Absolute tolerance on the KKT violation.
    pub tol: f64,
    pub max_iter: usize,
    /// Starting point; must lie in `Ω`. Defaults to [`initial_point`].
    pub initial: Option<Vec<f64>>,
    pub method: Method,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 500,
            initial: None,
            method: Method::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Minimum {
    pub xi: SpeedVector,
    pub energy: f64,
    pub kkt: KktReport,
    pub iterations: usize,
    /// Energy after each accepted step, starting with the initial point.
    #[serde(skip)]
    pub history: Vec<f64>,
}

/// A strictly feasible starting point near the isotonic fit of the `v_k`.
pub fn initial_point(problem: &ValidatedProblem) -> Vec<f64> {
    let d = problem.d();
    if d == 0 {
        return Vec::new();
    }
    let mut shift = Vec::with_capacity(d);
    let mut acc = 0.0;
    for i in 0..d {
        if i > 0 {
            acc += 0.1 * problem.a()[i];
        }
        shift.push(acc);
    }
    let mean = shift.iter().sum::<f64>() / d as f64;
    let weights: Vec<f64> = (0..d).map(|k| problem.width(k)).collect();
    let targets: Vec<f64> = (0..d).map(|k| problem.v()[k] - shift[k]).collect();
    let fit = pava(&weights, &targets).expect("widths are positive");
    fit.iter().zip(&shift).map(|(w, s)| w + s - mean).collect()
}

pub fn minimize(problem: &ValidatedProblem, options: &MinimizeOptions) -> Result<Minimum> {
    let d = problem.d();
    if d == 0 {
        return finish(problem, Vec::new(), 0, vec![0.0], options.tol);
    }
    if options.method == Method::Auto && problem.is_hyperbolic() {
        let weights: Vec<f64> = (0..d).map(|k| problem.width(k)).collect();
        let xi = pava(&weights, &problem.v()[..d])?;
        let e = entropy(problem, &xi)?;
        return finish(problem, xi, 0, vec![e], options.tol);
    }
    let x0 = match &options.initial {
        Some(x) => {
            check_feasible(problem, x)?;
            x.clone()
        }
        None => initial_point(problem),
    };
    Solver::new(problem, options.tol).run(x0, options.max_iter)
}

fn finish(
    problem: &ValidatedProblem,
    xi: Vec<f64>,
    iterations: usize,
    history: Vec<f64>,
    tol: f64,
) -> Result<Minimum> {
    let kkt = kkt_check(problem, &xi, tol)?;
    Ok(Minimum {
        energy: *history.last().unwrap(),
        xi: SpeedVector::new(problem, xi)?,
        kkt,
        iterations,
        history,
    })
}

struct Iterate {
    x: Vec<f64>,
    e: f64,
    g: Vec<f64>,
    viol: f64,
}

struct Solver<'a> {
    problem: &'a ValidatedProblem,
    tol: f64,
    /// `constrained[i]`: the link between `x[i]` and `x[i+1]` carries `a = 0`.
    constrained: Vec<bool>,
    pg_step: f64,
}

impl<'a> Solver<'a> {
    fn new(problem: &'a ValidatedProblem, tol: f64) -> Self {
        let d = problem.d();
        Self {
            problem,
            tol,
            constrained: (1..d).map(|k| problem.a()[k] == 0.0).collect(),
            pg_step: 0.0,
        }
    }

    fn evaluate(&self, x: Vec<f64>) -> Result<Iterate> {
        let e = entropy(self.problem, &x)?;
        let g = gradient(self.problem, &x)?;
        let viol = violation(&x, &g);
        Ok(Iterate { x, e, g, viol })
    }

    fn run(mut self, x0: Vec<f64>, max_iter: usize) -> Result<Minimum> {
        let mut history = Vec::new();
        let mut iterations = 0;
        let cur = self.evaluate(x0)?;
        history.push(cur.e);
        let cur = self.descend(cur, max_iter, &mut iterations, &mut history)?;
        let cur = self.merge_trials(cur, max_iter)?;
        let cur = self.snap(cur)?;
        let e = cur.e;
        if history.last() != Some(&e) {
            history.push(e);
        }
        finish(self.problem, cur.x, iterations, history, self.tol)
    }

    fn descend(
        &mut self,
        mut cur: Iterate,
        max_iter: usize,
        iterations: &mut usize,
        history: &mut Vec<f64>,
    ) -> Result<Iterate> {
        let budget = *iterations + max_iter;
        let mut polish = 0;
        loop {
            if cur.viol <= self.tol {
                if polish == POLISH_STEPS {
                    return Ok(cur);
                }
                polish += 1;
            }
            if *iterations == budget {
                if cur.viol <= self.tol {
                    return Ok(cur);
                }
                return Err(Error::MaxIterationsExceeded {
                    iterations: *iterations,
                    violation: cur.viol,
                    best: cur.x,
                });
            }
            let next = match self.newton_step(&cur)? {
                Some(next) => Some(next),
                None => self.gradient_step(&cur)?,
            };
            match next {
                Some(next) if polish == 0 || next.viol < cur.viol => {
                    *iterations += 1;
                    debug!(
                        "iter {iterations}: E = {:.17e}, violation = {:.3e}",
                        next.e, next.viol
                    );
                    history.push(next.e);
                    cur = next;
                }
                _ if cur.viol <= self.tol => return Ok(cur),
                _ => {
                    return Err(Error::MaxIterationsExceeded {
                        iterations: *iterations,
                        violation: cur.viol,
                        best: cur.x,
                    })
                }
            }
        }
    }

    /// Tries to close open `a = 0` gaps that the gradient pushes shut.
    ///
    /// A group sitting in the Gaussian tail of its neighbour feels a force
    /// below any usable tolerance, so the descent can stop short of the merge.
    /// Each candidate moves one group onto its neighbour and descends again; the
    /// result is kept when the gap stays closed and optimality does not degrade.
    fn merge_trials(&mut self, mut cur: Iterate, max_iter: usize) -> Result<Iterate> {
        let d = cur.x.len();
        let noise = |e: f64| 1e-14 * (1.0 + e.abs());
        let mut tried = vec![false; d.saturating_sub(1)];
        'outer: loop {
            for i in 0..d.saturating_sub(1) {
                if tried[i] || !self.constrained[i] || cur.x[i + 1] <= cur.x[i] {
                    continue;
                }
                tried[i] = true;
                let lo = (0..=i)
                    .rev()
                    .take_while(|&k| cur.x[k] == cur.x[i])
                    .last()
                    .unwrap();
                let hi = (i + 1..d)
                    .take_while(|&k| cur.x[k] == cur.x[i + 1])
                    .last()
                    .unwrap();
                let left_pull: f64 = cur.g[lo..=i].iter().sum();
                let right_pull: f64 = cur.g[i + 1..=hi].iter().sum();
                let mut candidates = Vec::new();
                if left_pull < 0.0 {
                    let mut x = cur.x.clone();
                    x[lo..=i].fill(cur.x[i + 1]);
                    candidates.push(x);
                }
                if right_pull > 0.0 {
                    let mut x = cur.x.clone();
                    x[i + 1..=hi].fill(cur.x[i]);
                    candidates.push(x);
                }
                for x in candidates {
                    let Some(start) = self.try_point(x)? else {
                        continue;
                    };
                    let mut scratch = Vec::new();
                    let mut count = 0;
                    let Ok(end) = self.descend(start, max_iter, &mut count, &mut scratch) else {
                        continue;
                    };
                    if end.x[i] == end.x[i + 1]
                        && end.viol <= self.tol
                        && end.viol <= cur.viol
                        && end.e <= cur.e + noise(cur.e)
                    {
                        debug!(
                            "merged link {i}: violation {:.3e} -> {:.3e}",
                            cur.viol, end.viol
                        );
                        cur = end;
                        continue 'outer;
                    }
                }
            }
            return Ok(cur);
        }
    }

    /// Armijo test, relaxed to "no increase and smaller violation" once the
    /// predicted decrease is below the rounding level of `E`.
    fn accept(&self, cur: &Iterate, trial: &Iterate, predicted: f64) -> bool {
        if !trial.e.is_finite() {
            return false;
        }
        if trial.e <= cur.e + ARMIJO * predicted {
            return true;
        }
        let noise = 1e-14 * (1.0 + cur.e.abs());
        -predicted <= 10.0 * noise && trial.e <= cur.e + noise && trial.viol < cur.viol
    }

    fn try_point(&self, x: Vec<f64>) -> Result<Option<Iterate>> {
        if check_feasible(self.problem, &x).is_err() || !entropy(self.problem, &x)?.is_finite() {
            return Ok(None);
        }
        self.evaluate(x).map(Some)
    }

    fn newton_step(&self, cur: &Iterate) -> Result<Option<Iterate>> {
        let x = &cur.x;
        let g = &cur.g;
        let d = x.len();
        let h = hessian(self.problem, x)?;

        // tail[i] = Σ_{j ≥ i} g_j; the derivative along gap i is tail[i + 1]
        let mut tail = vec![0.0; d + 1];
        for i in (0..d).rev() {
            tail[i] = tail[i + 1] + g[i];
        }
        let gaps: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();

        let mut w2 = tail[0] * tail[0];
        for i in 0..d - 1 {
            let r = if self.constrained[i] {
                gaps[i] - (gaps[i] - tail[i + 1]).max(0.0)
            } else {
                tail[i + 1]
            };
            w2 += r * r;
        }
        let eps = w2.sqrt().min(1e-3);
        let active: Vec<bool> = (0..d - 1)
            .map(|i| self.constrained[i] && gaps[i] <= eps && tail[i + 1] > 0.0)
            .collect();

        // groups of coordinates glued by active links
        let mut group_of = vec![0usize; d];
        let mut starts = vec![0usize];
        for i in 0..d - 1 {
            if !active[i] {
                starts.push(i + 1);
            }
            group_of[i + 1] = starts.len() - 1;
        }
        let m = starts.len();
        let mut reduced = SymTridiagonal::zeros(m);
        let mut rhs = vec![0.0; m];
        for j in 0..d {
            let gj = group_of[j];
            reduced.diag[gj] += h.diag[j];
            rhs[gj] -= g[j];
            if j + 1 < d {
                if group_of[j + 1] == gj {
                    reduced.diag[gj] += 2.0 * h.off[j];
                } else {
                    reduced.off[gj] = h.off[j];
                }
            }
        }
        let shift = match reduced.cholesky() {
            Ok(chol) => chol.solve(&rhs),
            Err(_) => rhs
                .iter()
                .zip(&reduced.diag)
                .map(|(r, q)| r / q.abs().max(f64::MIN_POSITIVE))
                .collect(),
        };
        let slope: f64 = -rhs.iter().zip(&shift).map(|(r, s)| r * s).sum::<f64>();
        if !(slope < 0.0) && active.iter().all(|a| !a) {
            return Ok(None);
        }

        // diagonal scaling for active gaps: curvature of E along the gap
        let mut curv = vec![0.0; d + 1];
        for i in (0..d).rev() {
            curv[i] = curv[i + 1] + h.diag[i] + if i + 1 < d { 2.0 * h.off[i] } else { 0.0 };
        }
        let active_step: Vec<f64> = (0..d - 1)
            .map(|i| {
                if active[i] {
                    -tail[i + 1] / curv[i + 1].max(f64::MIN_POSITIVE)
                } else {
                    0.0
                }
            })
            .collect();

        let mut alpha = 1.0;
        for _ in 0..MAX_BACKTRACKS {
            let mut y = Vec::with_capacity(d);
            y.push(x[0] + alpha * shift[0]);
            let mut predicted = alpha * slope;
            for i in 0..d - 1 {
                let gap = if active[i] {
                    let new = (gaps[i] + alpha * active_step[i]).max(0.0);
                    predicted += tail[i + 1] * (new - gaps[i]);
                    new
                } else {
                    let new = gaps[i] + alpha * (shift[group_of[i + 1]] - shift[group_of[i]]);
                    if self.constrained[i] {
                        new.max(0.0)
                    } else {
                        new
                    }
                };
                let prev = y[i];
                y.push(prev + gap);
            }
            if let Some(trial) = self.try_point(y)? {
                if self.accept(cur, &trial, predicted) {
                    return Ok(Some(trial));
                }
            }
            alpha *= 0.5;
        }
        Ok(None)
    }

    /// Projected gradient step onto the cone, used when Newton stalls.
    fn gradient_step(&mut self, cur: &Iterate) -> Result<Option<Iterate>> {
        if self.pg_step == 0.0 {
            let h = hessian(self.problem, &cur.x)?;
            self.pg_step = 1.0 / h.diag.iter().fold(f64::MIN_POSITIVE, |m, &x| m.max(x));
        }
        let mut alpha = self.pg_step;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> = cur
                .x
                .iter()
                .zip(&cur.g)
                .map(|(x, g)| x - alpha * g)
                .collect();
            let y = project_runs(&trial, &self.constrained);
            let predicted: f64 = cur
                .g
                .iter()
                .zip(&y)
                .zip(&cur.x)
                .map(|((g, y), x)| g * (y - x))
                .sum();
            if let Some(trial) = self.try_point(y)? {
                if self.accept(cur, &trial, predicted) {
                    self.pg_step = 2.0 * alpha;
                    return Ok(Some(trial));
                }
            }
            alpha *= 0.5;
        }
        Ok(None)
    }

    /// Closes `a = 0` gaps at the rounding level when the merged point is
    /// still optimal.
    fn snap(&self, cur: Iterate) -> Result<Iterate> {
        let d = cur.x.len();
        let mut x = cur.x.clone();
        let mut changed = false;
        let mut i = 0;
        while i < d {
            let mut j = i;
            while j + 1 < d && self.constrained[j] && {
                let gap = cur.x[j + 1] - cur.x[j];
                gap > 0.0 && gap <= 1e-9 * (1.0 + cur.x[j].abs()) || gap == 0.0
            } {
                j += 1;
            }
            if j > i && cur.x[i] != cur.x[j] {
                let w: f64 = (i..=j).map(|k| self.problem.width(k)).sum();
                let mean = (i..=j)
                    .map(|k| self.problem.width(k) * cur.x[k])
                    .sum::<f64>()
                    / w;
                x[i..=j].fill(mean);
                changed = true;
            }
            i = j + 1;
        }
        if !changed {
            return Ok(cur);
        }
        match self.try_point(x)? {
            Some(s) if s.viol <= self.tol && s.e <= cur.e + 1e-14 * (1.0 + cur.e.abs()) => Ok(s),
            _ => Ok(cur),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate, PiecewiseProblem};

    fn problem(u: &[f64], v: &[f64], a: &[f64]) -> ValidatedProblem {
        validate(PiecewiseProblem::new(u.to_vec(), v.to_vec(), a.to_vec())).unwrap()
    }

    #[test]
    fn burgers_shock_merges() {
        let p = problem(&[0.0, 0.5, 1.0], &[1.0, -1.0], &[0.0, 0.0]);
        let m = minimize(&p, &MinimizeOptions::default()).unwrap();
        assert_eq!(m.xi.as_slice(), &[0.0, 0.0]);
        assert_eq!(m.energy, 0.5);
        let newton = minimize(
            &p,
            &MinimizeOptions {
                method: Method::ProjectedNewton,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(newton.xi.iter().all(|x| x.abs() < 1e-10), "{:?}", newton.xi);
        assert!(newton.kkt.optimal);
    }

    #[test]
    fn rarefaction_stays_split() {
        let p = problem(&[0.0, 0.5, 1.0], &[-1.0, 1.0], &[0.0, 0.0]);
        let m = minimize(&p, &MinimizeOptions::default()).unwrap();
        assert_eq!(m.xi.as_slice(), &[-1.0, 1.0]);
    }

    #[test]
    fn linear_diffusion_has_no_unknowns() {
        let p = problem(&[0.0, 1.0], &[0.0], &[1.0]);
        let m = minimize(&p, &MinimizeOptions::default()).unwrap();
        assert!(m.xi.is_empty());
        assert_eq!(m.energy, 0.0);
        assert!(m.kkt.optimal);
    }

    #[test]
    fn mixed_problem_converges() {
        let p = problem(
            &[0.0, 0.3, 0.5, 0.9, 1.0],
            &[2.0, -1.0, 0.5, -0.5],
            &[0.0, 0.7, 0.0, 0.0],
        );
        let m = minimize(&p, &MinimizeOptions::default()).unwrap();
        assert!(m.kkt.optimal, "{:?}", m.kkt);
        assert!(m.history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn rejects_infeasible_start() {
        let p = problem(&[0.0, 1.0, 2.0], &[0.0, 0.0], &[0.0, 0.0]);
        let opts = MinimizeOptions {
            initial: Some(vec![1.0, 0.0]),
            method: Method::ProjectedNewton,
            ..Default::default()
        };
        assert!(matches!(
            minimize(&p, &opts),
            Err(Error::InfeasiblePoint { .. })
        ));
    }

    #[test]
    fn initial_point_is_strictly_feasible() {
        let p = problem(&[0.0, 1.0, 2.0, 3.0], &[1.0, 0.0, -1.0], &[0.0, 1.0, 2.0]);
        let x = initial_point(&p);
        assert_eq!(x.len(), 2);
        assert!(x[1] > x[0]);
        assert!(entropy(&p, &x).unwrap().is_finite());
    }

    #[test]
    fn kkt_groups() {
        let p = problem(&[0.0, 0.5, 1.0], &[1.0, -1.0], &[0.0, 0.0]);
        let r = kkt_check(&p, &[0.0, 0.0], 1e-12).unwrap();
        assert_eq!(r.groups.len(), 1);
        assert_eq!((r.groups[0].group.first, r.groups[0].group.last), (1, 2));
        assert_eq!(r.groups[0].suffix_sums, vec![0.5]);
        assert!(r.optimal);
        let off = kkt_check(&p, &[0.5, 0.5], 1e-12).unwrap();
        assert!(!off.optimal);
        assert!((off.max_violation - 0.5).abs() < 1e-15);
    }
}
