//! The entropy `E(ξ̄)` of a speed vector, its derivatives, the shifted
//! variant `E₁`, the continuum functional `J`, and the coercivity box.
//!
//! Interval `k` couples `ξ_k` and `ξ_{k+1}` (with `ξ_0 = −∞`,
//! `ξ_{d+1} = +∞`). A diffusive interval (`a_k > 0`) contributes
//! `−a_k²Δu_k ln(F(z_{k+1}) − F(z_k))` with `z_j = (ξ_j − v_k)/a_k`; a
//! hyperbolic one contributes `½Δu_k(ξ_{k+1} − v_k)²`. Outside the cone the
//! entropy is `+∞`, which makes it its own barrier.
//!
//! Speed vectors are stored 0-based: `xi[i]` holds `ξ_{i+1}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ValidatedProblem;
use crate::stats::{inverse_cdf, ln_cdf_gap, ln_pdf, LN_SQRT_2PI};
use crate::tridiag::SymTridiagonal;

/// A point of the ordered cone `Ω`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SpeedVector(Vec<f64>);

impl SpeedVector {
    pub fn new(problem: &ValidatedProblem, xi: Vec<f64>) -> Result<Self> {
        check_feasible(problem, &xi)?;
        Ok(Self(xi))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Deref for SpeedVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// `ξ_i` with the sentinels `ξ_0 = −∞` and `ξ_{d+1} = +∞`.
pub(crate) fn node(xi: &[f64], i: usize) -> f64 {
    if i == 0 {
        f64::NEG_INFINITY
    } else if i > xi.len() {
        f64::INFINITY
    } else {
        xi[i - 1]
    }
}

fn check_dim(problem: &ValidatedProblem, xi: &[f64]) -> Result<()> {
    if xi.len() != problem.d() {
        return Err(Error::DimensionMismatch {
            expected: problem.d(),
            found: xi.len(),
        });
    }
    Ok(())
}

/// Membership in `Ω`: nondecreasing, strictly increasing across `a_k > 0`.
/// The reported index is the 1-based coordinate `k` of the offending `ξ_{k+1}`.
pub fn check_feasible(problem: &ValidatedProblem, xi: &[f64]) -> Result<()> {
    check_dim(problem, xi)?;
    if let Some(i) = xi.iter().position(|x| !x.is_finite()) {
        return Err(Error::InfeasiblePoint { index: i + 1 });
    }
    for i in 1..xi.len() {
        let ok = if problem.a()[i] > 0.0 {
            xi[i] > xi[i - 1]
        } else {
            xi[i] >= xi[i - 1]
        };
        if !ok {
            return Err(Error::InfeasiblePoint { index: i });
        }
    }
    Ok(())
}

/// Normalized arguments and log-gap of a diffusive interval.
struct DiffusiveTerm {
    z_hi: f64,
    z_lo: f64,
    ln_gap: f64,
}

impl DiffusiveTerm {
    /// `None` when the gap is closed.
    fn new(problem: &ValidatedProblem, xi: &[f64], k: usize) -> Option<Self> {
        let (v, a) = (problem.v()[k], problem.a()[k]);
        let z_hi = (node(xi, k + 1) - v) / a;
        let z_lo = (node(xi, k) - v) / a;
        let ln_gap = ln_cdf_gap(z_hi, z_lo).ok()?;
        Some(Self { z_hi, z_lo, ln_gap })
    }

    /// `F′(z)/(F(z_hi) − F(z_lo))`, zero at infinite `z`.
    fn ratio(&self, z: f64) -> f64 {
        if z.is_finite() {
            (ln_pdf(z) - self.ln_gap).exp()
        } else {
            0.0
        }
    }
}

/// `E(ξ̄)`; `+∞` outside `Ω`.
pub fn entropy(problem: &ValidatedProblem, xi: &[f64]) -> Result<f64> {
    check_dim(problem, xi)?;
    if xi.iter().any(|x| x.is_nan()) {
        return Ok(f64::INFINITY);
    }
    let mut total = 0.0;
    for k in 0..problem.n() {
        let width = problem.width(k);
        let a = problem.a()[k];
        if a > 0.0 {
            match DiffusiveTerm::new(problem, xi, k) {
                Some(term) => total -= a * a * width * term.ln_gap,
                None => return Ok(f64::INFINITY),
            }
        } else {
            if k >= 1 && node(xi, k + 1) < node(xi, k) {
                return Ok(f64::INFINITY);
            }
            let r = node(xi, k + 1) - problem.v()[k];
            total += 0.5 * width * r * r;
        }
    }
    Ok(total)
}

/// `E₁ = E + Σ_{a_k>0} a_k²Δu_k ln(Δu_k/a_k)`.
pub fn entropy_alt(problem: &ValidatedProblem, xi: &[f64]) -> Result<f64> {
    Ok(entropy(problem, xi)? + entropy_alt_shift(problem))
}

/// The constant separating `E₁` from `E`.
pub fn entropy_alt_shift(problem: &ValidatedProblem) -> f64 {
    (0..problem.n())
        .filter(|&k| problem.a()[k] > 0.0)
        .map(|k| {
            let (a, w) = (problem.a()[k], problem.width(k));
            a * a * w * (w / a).ln()
        })
        .sum()
}

fn diffusive_terms(problem: &ValidatedProblem, xi: &[f64]) -> Result<Vec<Option<DiffusiveTerm>>> {
    check_feasible(problem, xi).map_err(|e| match e {
        Error::InfeasiblePoint { index } if problem.a()[index] > 0.0 => {
            Error::DegenerateGap { interval: index }
        }
        other => other,
    })?;
    (0..problem.n())
        .map(|k| {
            if problem.a()[k] > 0.0 {
                DiffusiveTerm::new(problem, xi, k)
                    .map(Some)
                    .ok_or(Error::DegenerateGap { interval: k })
            } else {
                Ok(None)
            }
        })
        .collect()
}

/// `∇E(ξ̄)`. Finite on the whole cone, including merged hyperbolic coordinates.
pub fn gradient(problem: &ValidatedProblem, xi: &[f64]) -> Result<Vec<f64>> {
    let terms = diffusive_terms(problem, xi)?;
    let d = problem.d();
    let mut grad = vec![0.0; d];
    for (k, term) in terms.iter().enumerate() {
        let width = problem.width(k);
        match term {
            Some(t) => {
                let a = problem.a()[k];
                if k + 1 <= d {
                    grad[k] -= a * width * t.ratio(t.z_hi);
                }
                if k >= 1 {
                    grad[k - 1] += a * width * t.ratio(t.z_lo);
                }
            }
            None => grad[k] += width * (xi[k] - problem.v()[k]),
        }
    }
    Ok(grad)
}

/// `∇²E(ξ̄)`, tridiagonal since each interval couples two neighbours.
pub fn hessian(problem: &ValidatedProblem, xi: &[f64]) -> Result<SymTridiagonal> {
    let terms = diffusive_terms(problem, xi)?;
    let d = problem.d();
    let mut h = SymTridiagonal::zeros(d);
    for (k, term) in terms.iter().enumerate() {
        let width = problem.width(k);
        match term {
            Some(t) => {
                let r_hi = t.ratio(t.z_hi);
                let r_lo = t.ratio(t.z_lo);
                if k + 1 <= d {
                    h.diag[k] += width * r_hi * (r_hi + t.z_hi);
                }
                if k >= 1 {
                    h.diag[k - 1] += width * r_lo * (r_lo - t.z_lo);
                }
                if k >= 1 && k + 1 <= d {
                    h.off[k - 1] -= width * r_hi * r_lo;
                }
            }
            None => h.diag[k] += width,
        }
    }
    Ok(h)
}

/// Hessian of `P(x, y) = −ln(F(x) − F(y))` for `x > y`, as
/// `[P_xx, P_xy, P_yy]`. Infinite arguments drop their row.
pub fn log_gap_hessian(x: f64, y: f64) -> Result<[f64; 3]> {
    let ln_gap = ln_cdf_gap(x, y)?;
    let term = DiffusiveTerm {
        z_hi: x,
        z_lo: y,
        ln_gap,
    };
    let rx = term.ratio(x);
    let ry = term.ratio(y);
    let pxx = if x.is_finite() { rx * (rx + x) } else { 0.0 };
    let pyy = if y.is_finite() { ry * (ry - y) } else { 0.0 };
    Ok([pxx, -rx * ry, pyy])
}

/// Composite approximation of
/// `J(ξ) = ∫ [(ξ(u) − v(u))²/2 − a(u)² ln ξ′(u)] du` over the sample grid.
/// The quadratic part uses the trapezoid rule; the logarithmic part uses the
/// midpoint rule with `ξ′` from the centered difference on each cell, so kinks
/// of `ξ` at grid nodes cost nothing.
pub fn continuum_j(u: &[f64], xi: &[f64], v: &[f64], a: &[f64]) -> Result<f64> {
    check_samples(u, xi, v, a)?;
    let quadratic: Vec<f64> = xi
        .iter()
        .zip(v)
        .map(|(x, v)| 0.5 * (x - v).powi(2))
        .collect();
    let mut log_part = 0.0;
    for i in 0..u.len() - 1 {
        let a2 = 0.5 * (a[i] * a[i] + a[i + 1] * a[i + 1]);
        if a2 > 0.0 {
            let du = u[i + 1] - u[i];
            log_part -= du * a2 * ((xi[i + 1] - xi[i]) / du).ln();
        }
    }
    Ok(trapezoid(u, &quadratic) + log_part)
}

/// [`continuum_j`] with the density normalization `ln(1/√(2π))` restored,
/// i.e. `J + ln√(2π) ∫ a² du`. This is the limit of `E₁` under refinement.
pub fn continuum_j_normalized(u: &[f64], xi: &[f64], v: &[f64], a: &[f64]) -> Result<f64> {
    let j = continuum_j(u, xi, v, a)?;
    let a2: Vec<f64> = a.iter().map(|x| x * x).collect();
    Ok(j + LN_SQRT_2PI * trapezoid(u, &a2))
}

/// `u` strictly increasing; `ξ` nondecreasing, and strictly so wherever the
/// diffusion is positive on a cell.
fn check_samples(u: &[f64], xi: &[f64], v: &[f64], a: &[f64]) -> Result<()> {
    let m = u.len();
    for (field, len) in [("xi", xi.len()), ("v", v.len()), ("a", a.len())] {
        if len != m {
            return Err(Error::LengthMismatch {
                field,
                expected: m,
                found: len,
            });
        }
    }
    if m < 2 {
        return Err(Error::TooFewEntries {
            field: "u",
            min: 2,
            found: m,
        });
    }
    if let Some(index) = a.iter().position(|&x| !(x >= 0.0)) {
        return Err(Error::NegativeDiffusion {
            index,
            value: a[index],
        });
    }
    for i in 0..m - 1 {
        let diffusive = a[i] > 0.0 || a[i + 1] > 0.0;
        let ok = u[i + 1] > u[i]
            && if diffusive {
                xi[i + 1] > xi[i]
            } else {
                xi[i + 1] >= xi[i]
            };
        if !ok || !xi[i].is_finite() {
            return Err(Error::NonMonotoneSamples { index: i + 1 });
        }
    }
    Ok(())
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (ys[0] + ys[1]) * (xs[1] - xs[0]))
        .sum()
}

/// The compact set containing the sublevel set `{E ≤ c}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoercivityBox {
    pub level: f64,
    /// Lower bound on every diffusive `F`-gap; `None` without diffusion.
    pub delta: Option<f64>,
    /// Lower bound for `ξ_1`.
    pub r1: f64,
    /// Upper bound for `ξ_d`.
    pub r2: f64,
    /// `a_k δ` for the links `k = 1..d−1`.
    pub min_gaps: Vec<f64>,
}

impl CoercivityBox {
    pub fn contains(&self, xi: &[f64]) -> bool {
        let Some((first, last)) = xi.first().zip(xi.last()) else {
            return true;
        };
        *first >= self.r1
            && *last <= self.r2
            && xi
                .windows(2)
                .zip(&self.min_gaps)
                .all(|(w, g)| w[1] - w[0] >= *g)
    }
}

pub fn coercivity_box(problem: &ValidatedProblem, level: f64) -> Result<CoercivityBox> {
    if !(level >= 0.0) {
        return Err(Error::NegativeLevel(level));
    }
    let n = problem.n();
    let m = (0..n)
        .filter(|&k| problem.a()[k] > 0.0)
        .map(|k| problem.a()[k].powi(2) * problem.width(k))
        .fold(f64::INFINITY, f64::min);
    let delta = m.is_finite().then(|| (-level / m).exp());
    // F⁻¹ extended to the closed interval
    let quantile = match delta {
        Some(p) if p >= 1.0 => f64::INFINITY,
        Some(p) if p <= 0.0 => f64::NEG_INFINITY,
        Some(p) => inverse_cdf(p)?,
        None => 0.0,
    };
    let scaled = |a: f64, q: f64| if a > 0.0 { a * q } else { 0.0 };
    let (a0, an) = (problem.a()[0], problem.a()[n - 1]);
    let r1 = problem.v()[0] + scaled(a0, quantile).min(-(2.0 * level / problem.width(0)).sqrt());
    let r2 =
        problem.v()[n - 1] + scaled(an, -quantile).max((2.0 * level / problem.width(n - 1)).sqrt());
    let min_gaps = (1..problem.d())
        .map(|k| scaled(problem.a()[k], delta.unwrap_or(0.0)))
        .collect();
    Ok(CoercivityBox {
        level,
        delta,
        r1,
        r2,
        min_gaps,
    })
}
