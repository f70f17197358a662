//! Certification of a profile through its jump conditions.
//!
//! Nothing here touches the entropy or its gradient: every residual is
//! rebuilt from the profile pieces and the flux functions of the problem.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ValidatedProblem;
use crate::profile::{Discontinuity, JumpKind, SelfSimilarProfile};

/// Local configuration of a discontinuity, named after the diffusion on
/// either side (`+` for `a > 0`, `0` for `a = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Configuration {
    #[serde(rename = "c++")]
    PlusPlus,
    /// Never stationary: requires a vanishing one-sided flux.
    #[serde(rename = "c+0")]
    PlusZero,
    #[serde(rename = "c0+")]
    ZeroPlus,
    #[serde(rename = "c00")]
    ZeroZero,
    #[serde(rename = "group")]
    Group,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OleinikMargin {
    /// Nodal state index `j` with `k′ < j < l`.
    pub j: usize,
    /// Nonnegative when the inequality holds.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpCheck {
    pub c: f64,
    pub first: usize,
    pub last: usize,
    pub k_prime: usize,
    pub u_minus: f64,
    pub u_plus: f64,
    pub kind: JumpKind,
    pub aflux_minus: f64,
    pub aflux_plus: f64,
    /// `A(u(c+)) − A(u(c−))`.
    pub rh_a_residual: f64,
    /// `Σ_{i=k′}^{l−1} (v_i − c) Δu_i − (A(u)′(c+) − A(u)′(c−))`.
    pub rh_flux_residual: f64,
    pub oleinik_margins: Vec<OleinikMargin>,
    pub configuration: Configuration,
    /// The configuration-specific form of the flux condition.
    pub config_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub per_jump: Vec<JumpCheck>,
    pub max_equality_residual: f64,
    /// `None` when no jump has interior nodal states.
    pub min_inequality_margin: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

/// `1e−8 · (1 + max|v|) · (β − α)`.
pub fn default_tolerance(problem: &ValidatedProblem) -> f64 {
    1e-8 * (1.0 + problem.max_abs_velocity()) * (problem.beta() - problem.alpha())
}

/// `Σ_{i=from}^{to−1} (v_i − c) Δu_i`.
fn chord_sum(problem: &ValidatedProblem, from: usize, to: usize, c: f64) -> f64 {
    (from..to)
        .map(|i| (problem.v()[i] - c) * problem.width(i))
        .sum()
}

fn configuration(problem: &ValidatedProblem, jump: &Discontinuity) -> Configuration {
    if jump.first != jump.last {
        return Configuration::Group;
    }
    let k = jump.first;
    match (problem.a()[k - 1] > 0.0, problem.diffusion_coeff(k) > 0.0) {
        (true, true) => Configuration::PlusPlus,
        (true, false) => Configuration::PlusZero,
        (false, true) => Configuration::ZeroPlus,
        (false, false) => Configuration::ZeroZero,
    }
}

fn check_jump(problem: &ValidatedProblem, jump: &Discontinuity) -> Result<JumpCheck> {
    let flux = problem.flux();
    let (kp, l, c) = (jump.k_prime, jump.last, jump.c);
    let rh_a_residual = flux.diffusion(jump.u_plus)? - flux.diffusion(jump.u_minus)?;
    let rh_flux_residual = chord_sum(problem, kp, l, c) - (jump.aflux_plus - jump.aflux_minus);
    let oleinik_margins = (kp + 1..l)
        .map(|j| OleinikMargin {
            j,
            margin: -(chord_sum(problem, j, l, c) - jump.aflux_plus),
        })
        .collect();
    let configuration = configuration(problem, jump);
    let k = jump.first;
    let config_residual = match configuration {
        Configuration::PlusPlus => jump.aflux_plus - jump.aflux_minus,
        Configuration::PlusZero => jump.aflux_minus,
        Configuration::ZeroPlus => chord_sum(problem, k - 1, k, c) - jump.aflux_plus,
        Configuration::ZeroZero => c - problem.v()[k - 1],
        Configuration::Group => rh_flux_residual,
    };
    Ok(JumpCheck {
        c,
        first: jump.first,
        last: l,
        k_prime: kp,
        u_minus: jump.u_minus,
        u_plus: jump.u_plus,
        kind: jump.kind,
        aflux_minus: jump.aflux_minus,
        aflux_plus: jump.aflux_plus,
        rh_a_residual,
        rh_flux_residual,
        oleinik_margins,
        configuration,
        config_residual,
    })
}

/// Checks `[A(u)] = 0`, the flux balance and the nodal Oleinik inequalities
/// at every discontinuity. Passing means every equality residual is within
/// `tol` and every margin is at least `−tol`.
pub fn verify(profile: &SelfSimilarProfile, tol: f64) -> VerificationReport {
    let problem = profile.problem();
    let per_jump: Vec<JumpCheck> = profile
        .discontinuities()
        .iter()
        .map(|j| check_jump(problem, j).expect("jump states lie in [α, β]"))
        .collect();
    let max_equality_residual = per_jump
        .iter()
        .map(|j| j.rh_a_residual.abs().max(j.rh_flux_residual.abs()))
        .fold(0.0, f64::max);
    let min_inequality_margin = per_jump
        .iter()
        .flat_map(|j| j.oleinik_margins.iter().map(|m| m.margin))
        .reduce(f64::min);
    let passed = max_equality_residual <= tol && min_inequality_margin.map_or(true, |m| m >= -tol);
    VerificationReport {
        per_jump,
        max_equality_residual,
        min_inequality_margin,
        tolerance: tol,
        passed,
    }
}

fn isolated_jump(
    profile: &SelfSimilarProfile,
    k: usize,
    expected: Configuration,
) -> Result<&Discontinuity> {
    let label = match expected {
        Configuration::PlusPlus => "c++",
        Configuration::PlusZero => "c+0",
        Configuration::ZeroPlus => "c0+",
        Configuration::ZeroZero => "c00",
        Configuration::Group => "group",
    };
    profile
        .discontinuities()
        .iter()
        .find(|j| j.first == k && j.last == k)
        .filter(|j| configuration(profile.problem(), j) == expected)
        .ok_or(Error::WrongConfiguration { k, expected: label })
}

/// `A(u)′(ξ_k+) − A(u)′(ξ_k−)` at an isolated `ξ_k` with `a_{k−1}, a_k > 0`.
pub fn check_cpp_condition(profile: &SelfSimilarProfile, k: usize) -> Result<f64> {
    let jump = isolated_jump(profile, k, Configuration::PlusPlus)?;
    Ok(jump.aflux_plus - jump.aflux_minus)
}

/// `(v_{k−1} − ξ_k)(u_k − u_{k−1}) − A(u)′(ξ_k+)` at an isolated `ξ_k` with
/// `a_{k−1} = 0 < a_k`.
pub fn check_c0p_condition(profile: &SelfSimilarProfile, k: usize) -> Result<f64> {
    let jump = isolated_jump(profile, k, Configuration::ZeroPlus)?;
    Ok(chord_sum(profile.problem(), k - 1, k, jump.c) - jump.aflux_plus)
}
