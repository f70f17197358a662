//! The self-similar profile `u(ξ)` determined by a speed vector.

use serde::Serialize;

use crate::entropy::{check_feasible, node, SpeedVector};
use crate::error::{Error, Result};
use crate::model::ValidatedProblem;
use crate::optimizer::GroupStructure;
use crate::stats::{cdf, inverse_cdf, ln_cdf_gap, ln_pdf};

/// One piece of the profile on `(ξ_k, ξ_{k+1})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Piece {
    /// `u_k + Δu_k (F(z) − F(z_lo)) / (F(z_hi) − F(z_lo))` with `z = (ξ − v_k)/a_k`.
    Erf {
        lower: f64,
        upper: f64,
        v: f64,
        a: f64,
        z_lo: f64,
        z_hi: f64,
        /// `ln(F(z_hi) − F(z_lo))`.
        ln_normalizer: f64,
    },
    Const {
        value: f64,
    },
}

impl Piece {
    fn eval(&self, xi: f64) -> f64 {
        match *self {
            Piece::Const { value } => value,
            Piece::Erf {
                lower,
                upper,
                v,
                a,
                z_lo,
                z_hi,
                ln_normalizer,
            } => {
                let z = (xi - v) / a;
                let frac = if z <= z_lo {
                    0.0
                } else if z >= z_hi {
                    1.0
                } else if z_lo == f64::NEG_INFINITY && z_hi == f64::INFINITY {
                    cdf(z)
                } else {
                    let below = (ln_cdf_gap(z, z_lo).expect("z > z_lo") - ln_normalizer).exp();
                    if below <= 0.5 {
                        below
                    } else {
                        // upper half through the complement, exact in the far tail
                        1.0 - (ln_cdf_gap(z_hi, z).expect("z < z_hi") - ln_normalizer).exp()
                    }
                };
                (lower + (upper - lower) * frac).clamp(lower, upper)
            }
        }
    }

    fn derivative(&self, xi: f64) -> f64 {
        match *self {
            Piece::Const { .. } => 0.0,
            Piece::Erf {
                lower,
                upper,
                v,
                a,
                ln_normalizer,
                ..
            } => {
                let z = (xi - v) / a;
                (upper - lower) / a * (ln_pdf(z) - ln_normalizer).exp()
            }
        }
    }
}

/// Which side of a jump a sample row describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Minus,
    Plus,
    Point,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Minus => "minus",
            Side::Plus => "plus",
            Side::Point => "point",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "minus" => Some(Side::Minus),
            "plus" => Some(Side::Plus),
            "point" => Some(Side::Point),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JumpKind {
    Weak,
    Strong,
}

/// A maximal group `ξ_first = … = ξ_last = c` (1-based indices).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discontinuity {
    pub c: f64,
    pub first: usize,
    pub last: usize,
    /// `first` if `a_{first−1} > 0`, else `first − 1`.
    pub k_prime: usize,
    pub u_minus: f64,
    pub u_plus: f64,
    /// `A(u)′(c−)`.
    pub aflux_minus: f64,
    /// `A(u)′(c+)`.
    pub aflux_plus: f64,
    pub kind: JumpKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRow {
    pub xi: f64,
    pub u: f64,
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimilarProfile {
    problem: ValidatedProblem,
    xi: Vec<f64>,
    pieces: Vec<Piece>,
    jumps: Vec<Discontinuity>,
}

impl SelfSimilarProfile {
    pub fn build(problem: &ValidatedProblem, xi: &SpeedVector) -> Result<Self> {
        let xi = xi.as_slice().to_vec();
        check_feasible(problem, &xi).map_err(|e| match e {
            Error::InfeasiblePoint { index } if index < problem.n() && problem.a()[index] > 0.0 => {
                Error::DegenerateGap { interval: index }
            }
            other => other,
        })?;
        let pieces = (0..=problem.d())
            .map(|k| {
                let a = problem.a()[k.min(problem.n() - 1)];
                if k < problem.n() && a > 0.0 {
                    let v = problem.v()[k];
                    let z_lo = (node(&xi, k) - v) / a;
                    let z_hi = (node(&xi, k + 1) - v) / a;
                    let ln_normalizer = ln_cdf_gap(z_hi, z_lo)
                        .ok()
                        .filter(|g| g.is_finite())
                        .ok_or(Error::DegenerateGap { interval: k })?;
                    Ok(Piece::Erf {
                        lower: problem.u()[k],
                        upper: problem.u()[k + 1],
                        v,
                        a,
                        z_lo,
                        z_hi,
                        ln_normalizer,
                    })
                } else {
                    Ok(Piece::Const {
                        value: problem.u()[k],
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let mut profile = Self {
            problem: problem.clone(),
            xi,
            pieces,
            jumps: Vec::new(),
        };
        profile.jumps = profile.catalog();
        Ok(profile)
    }

    pub fn problem(&self) -> &ValidatedProblem {
        &self.problem
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    /// Pieces `k = 0..=d`; pieces of merged groups are empty but kept.
    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// `A(u)′` just right of `ξ_k` through interval `k`, zero when `a_k = 0`.
    pub(crate) fn aflux_right(&self, k: usize) -> f64 {
        match self.pieces.get(k) {
            Some(Piece::Erf {
                lower,
                upper,
                a,
                z_lo,
                ln_normalizer,
                ..
            }) => a * (upper - lower) * (ln_pdf(*z_lo) - ln_normalizer).exp(),
            _ => 0.0,
        }
    }

    /// `A(u)′` just left of `ξ_k` through interval `k − 1`, zero when `a_{k−1} = 0`.
    pub(crate) fn aflux_left(&self, k: usize) -> f64 {
        match self.pieces.get(k - 1) {
            Some(Piece::Erf {
                lower,
                upper,
                a,
                z_hi,
                ln_normalizer,
                ..
            }) => a * (upper - lower) * (ln_pdf(*z_hi) - ln_normalizer).exp(),
            _ => 0.0,
        }
    }

    fn catalog(&self) -> Vec<Discontinuity> {
        let p = &self.problem;
        GroupStructure::detect(&self.xi)
            .groups
            .into_iter()
            .map(|g| {
                let (k, l) = (g.first, g.last);
                let k_prime = if p.a()[k - 1] > 0.0 { k } else { k - 1 };
                let (u_minus, u_plus) = (p.u()[k_prime], p.u()[l]);
                Discontinuity {
                    c: g.value,
                    first: k,
                    last: l,
                    k_prime,
                    u_minus,
                    u_plus,
                    aflux_minus: self.aflux_left(k),
                    aflux_plus: self.aflux_right(l),
                    kind: if u_minus < u_plus {
                        JumpKind::Strong
                    } else {
                        JumpKind::Weak
                    },
                }
            })
            .collect()
    }

    pub fn discontinuities(&self) -> &[Discontinuity] {
        &self.jumps
    }

    /// Index of the piece containing `ξ`, right-continuous at the nodes.
    fn locate(&self, xi: f64) -> usize {
        self.xi.partition_point(|&x| x <= xi)
    }

    /// `u(ξ)`, right-continuous at jumps; `±∞` give `β` and `α`.
    pub fn eval(&self, xi: f64) -> f64 {
        if xi.is_nan() {
            return f64::NAN;
        }
        self.pieces[self.locate(xi)].eval(xi)
    }

    pub fn derivative(&self, xi: f64) -> f64 {
        self.pieces[self.locate(xi)].derivative(xi)
    }

    pub fn second_derivative(&self, xi: f64) -> f64 {
        match self.pieces[self.locate(xi)] {
            Piece::Erf { v, a, .. } => -(xi - v) / (a * a) * self.derivative(xi),
            Piece::Const { .. } => 0.0,
        }
    }

    /// The speed at which the state `u` is attained. States skipped by a jump
    /// map to the jump location; `α` and `β` may map to `∓∞`.
    pub fn inverse(&self, state: f64) -> Result<f64> {
        let p = &self.problem;
        if !(state >= p.alpha() && state <= p.beta()) {
            return Err(Error::OutOfRange {
                value: state,
                lo: p.alpha(),
                hi: p.beta(),
            });
        }
        let k = p
            .u()
            .partition_point(|&b| b <= state)
            .saturating_sub(1)
            .min(p.n() - 1);
        match self.pieces.get(k) {
            Some(&Piece::Erf {
                lower,
                upper,
                v,
                a,
                z_lo,
                z_hi,
                ln_normalizer,
            }) => {
                let frac = (state - lower) / (upper - lower);
                let gap = ln_normalizer.exp();
                let lo_mass = cdf(z_lo);
                let target = lo_mass + frac * gap;
                let z = if target <= 0.5 {
                    if target <= 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        inverse_cdf(target)?
                    }
                } else {
                    let upper_tail = cdf(-z_hi) + (1.0 - frac) * gap;
                    if upper_tail <= 0.0 {
                        f64::INFINITY
                    } else {
                        -inverse_cdf(upper_tail.min(0.5))?
                    }
                };
                Ok(v + a * z.clamp(z_lo, z_hi))
            }
            _ => Ok(if state == p.u()[k] {
                node(&self.xi, k)
            } else {
                node(&self.xi, k + 1)
            }),
        }
    }

    /// `count` equispaced rows on `[lo, hi]` plus both one-sided values at
    /// every strong jump in the window.
    pub fn sample(&self, lo: f64, hi: f64, count: usize) -> Result<Vec<SampleRow>> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() || count < 2 {
            return Err(Error::BadWindow { lo, hi, count });
        }
        let step = (hi - lo) / (count - 1) as f64;
        let mut rows: Vec<SampleRow> = (0..count)
            .map(|i| {
                let xi = if i + 1 == count {
                    hi
                } else {
                    lo + i as f64 * step
                };
                SampleRow {
                    xi,
                    u: self.eval(xi),
                    side: Side::Point,
                }
            })
            .collect();
        for jump in &self.jumps {
            if jump.kind == JumpKind::Strong && jump.c >= lo && jump.c <= hi {
                rows.push(SampleRow {
                    xi: jump.c,
                    u: jump.u_minus,
                    side: Side::Minus,
                });
                rows.push(SampleRow {
                    xi: jump.c,
                    u: jump.u_plus,
                    side: Side::Plus,
                });
            }
        }
        rows.sort_by(|x, y| x.xi.total_cmp(&y.xi).then(x.side.cmp(&y.side)));
        Ok(rows)
    }
}
