//! Riemann data with piecewise-constant velocity and diffusion.
//!
//! The state interval `[α, β]` is split at breakpoints `u_0 < u_1 < … < u_n`.
//! On `(u_k, u_{k+1})` the velocity is `v_k` and the diffusion is `a_k ≥ 0`,
//! which induces the piecewise-linear convective flux `φ` (slopes `v_k`) and
//! the nondecreasing diffusion potential `A` (slopes `a_k²`), both anchored at
//! zero in `α`.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Raw problem data as read from a problem file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseProblem {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub a: Vec<f64>,
}

impl PiecewiseProblem {
    pub fn new(u: Vec<f64>, v: Vec<f64>, a: Vec<f64>) -> Self {
        Self { u, v, a }
    }

    /// Parses `{"u": [..], "v": [..], "a": [..]}`. Errors name the field at fault.
    pub fn from_json(text: &str) -> Result<Self> {
        let root: Value = serde_json::from_str(text).map_err(|e| Error::ProblemParse {
            field: "<root>".into(),
            message: e.to_string(),
        })?;
        let obj = root.as_object().ok_or_else(|| Error::ProblemParse {
            field: "<root>".into(),
            message: "expected a JSON object".into(),
        })?;
        if let Some(extra) = obj.keys().find(|k| !matches!(k.as_str(), "u" | "v" | "a")) {
            return Err(Error::ProblemParse {
                field: extra.clone(),
                message: "unknown field".into(),
            });
        }
        let field = |name: &str| -> Result<Vec<f64>> {
            let value = obj.get(name).ok_or_else(|| Error::ProblemParse {
                field: name.into(),
                message: "missing".into(),
            })?;
            let items = value.as_array().ok_or_else(|| Error::ProblemParse {
                field: name.into(),
                message: "expected an array of numbers".into(),
            })?;
            items
                .iter()
                .enumerate()
                .map(|(i, x)| {
                    x.as_f64().ok_or_else(|| Error::ProblemParse {
                        field: format!("{name}[{i}]"),
                        message: format!("expected a number, found {x}"),
                    })
                })
                .collect()
        };
        Ok(Self {
            u: field("u")?,
            v: field("v")?,
            a: field("a")?,
        })
    }

    pub fn validate(self) -> Result<ValidatedProblem> {
        validate(self)
    }
}

/// Checks the breakpoint ordering and coefficient shapes, and derives `d`.
pub fn validate(problem: PiecewiseProblem) -> Result<ValidatedProblem> {
    let PiecewiseProblem { u, v, a } = problem;
    if u.len() < 2 {
        return Err(Error::TooFewEntries {
            field: "u",
            min: 2,
            found: u.len(),
        });
    }
    let n = u.len() - 1;
    if v.len() != n {
        return Err(Error::LengthMismatch {
            field: "v",
            expected: n,
            found: v.len(),
        });
    }
    if a.len() != n {
        return Err(Error::LengthMismatch {
            field: "a",
            expected: n,
            found: a.len(),
        });
    }
    for (field, values) in [("u", &u), ("v", &v), ("a", &a)] {
        if let Some(index) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteValue { field, index });
        }
    }
    if let Some(index) = u.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::NonIncreasingBreakpoints { index });
    }
    if let Some(index) = a.iter().position(|&x| x < 0.0) {
        return Err(Error::NegativeDiffusion {
            index,
            value: a[index],
        });
    }
    let d = if a[n - 1] > 0.0 { n - 1 } else { n };
    let flux = FluxFunctions::new(&u, &v, &a);
    Ok(ValidatedProblem { u, v, a, d, flux })
}

/// A problem that passed [`validate`]. Immutable.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedProblem {
    u: Vec<f64>,
    v: Vec<f64>,
    a: Vec<f64>,
    d: usize,
    flux: FluxFunctions,
}

impl ValidatedProblem {
    /// Breakpoints `u_0..=u_n`.
    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// Number of intervals.
    pub fn n(&self) -> usize {
        self.v.len()
    }

    /// Number of free discontinuity speeds: `n − 1` if `a_{n−1} > 0`, else `n`.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        self.u[0]
    }

    pub fn beta(&self) -> f64 {
        self.u[self.n()]
    }

    /// Width `u_{k+1} − u_k` of interval `k`.
    pub fn width(&self, k: usize) -> f64 {
        self.u[k + 1] - self.u[k]
    }

    /// Diffusion of interval `k`, with the convention `a_n = 0`.
    pub fn diffusion_coeff(&self, k: usize) -> f64 {
        self.a.get(k).copied().unwrap_or(0.0)
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.a.iter().all(|&x| x == 0.0)
    }

    pub fn max_abs_velocity(&self) -> f64 {
        self.v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn max_diffusion(&self) -> f64 {
        self.a.iter().fold(0.0_f64, |m, &x| m.max(x))
    }

    pub fn flux(&self) -> &FluxFunctions {
        &self.flux
    }

    pub fn to_raw(&self) -> PiecewiseProblem {
        PiecewiseProblem::new(self.u.clone(), self.v.clone(), self.a.clone())
    }
}

/// The piecewise-linear functions `φ` and `A`, stored by their nodal values.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxFunctions {
    breakpoints: Vec<f64>,
    slopes_phi: Vec<f64>,
    slopes_a: Vec<f64>,
    nodes_phi: Vec<f64>,
    nodes_a: Vec<f64>,
}

impl FluxFunctions {
    fn new(u: &[f64], v: &[f64], a: &[f64]) -> Self {
        let slopes_a: Vec<f64> = a.iter().map(|x| x * x).collect();
        let cumulate = |slopes: &[f64]| {
            let mut nodes = Vec::with_capacity(u.len());
            nodes.push(0.0);
            let mut acc = 0.0;
            for (k, s) in slopes.iter().enumerate() {
                acc += s * (u[k + 1] - u[k]);
                nodes.push(acc);
            }
            nodes
        };
        Self {
            breakpoints: u.to_vec(),
            nodes_phi: cumulate(v),
            nodes_a: cumulate(&slopes_a),
            slopes_phi: v.to_vec(),
            slopes_a,
        }
    }

    fn locate(&self, state: f64) -> Result<usize> {
        let lo = self.breakpoints[0];
        let hi = *self.breakpoints.last().unwrap();
        if !(state >= lo && state <= hi) {
            return Err(Error::OutOfRange {
                value: state,
                lo,
                hi,
            });
        }
        let n = self.slopes_phi.len();
        let k = self.breakpoints.partition_point(|&b| b <= state);
        Ok(k.saturating_sub(1).min(n - 1))
    }

    fn interpolate(&self, nodes: &[f64], slopes: &[f64], state: f64) -> Result<f64> {
        let k = self.locate(state)?;
        if state == self.breakpoints[k] {
            return Ok(nodes[k]);
        }
        Ok(nodes[k] + slopes[k] * (state - self.breakpoints[k]))
    }

    /// Convective flux `φ(u)` with `φ(α) = 0`.
    pub fn phi(&self, state: f64) -> Result<f64> {
        self.interpolate(&self.nodes_phi, &self.slopes_phi, state)
    }

    /// Diffusion potential `A(u) = ∫_α^u a²` with `A(α) = 0`.
    pub fn diffusion(&self, state: f64) -> Result<f64> {
        self.interpolate(&self.nodes_a, &self.slopes_a, state)
    }

    /// `φ(u_k)` at a breakpoint.
    pub fn phi_at_node(&self, k: usize) -> f64 {
        self.nodes_phi[k]
    }

    /// `A(u_k)` at a breakpoint.
    pub fn diffusion_at_node(&self, k: usize) -> f64 {
        self.nodes_a[k]
    }
}
