use serde::Serialize;

use crate::entropy::{check_feasible, gradient};
use crate::error::Result;
use crate::model::ValidatedProblem;

/// A maximal run `ξ_first = … = ξ_last` (1-based, inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Group {
    pub first: usize,
    pub last: usize,
    pub value: f64,
}

/// Partition of a speed vector into maximal runs of equal coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupStructure {
    pub groups: Vec<Group>,
}

impl GroupStructure {
    pub fn detect(xi: &[f64]) -> Self {
        let mut groups = Vec::new();
        let mut i = 0;
        while i < xi.len() {
            let mut j = i;
            while j + 1 < xi.len() && xi[j + 1] == xi[i] {
                j += 1;
            }
            groups.push(Group {
                first: i + 1,
                last: j + 1,
                value: xi[i],
            });
            i = j + 1;
        }
        Self { groups }
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// Optimality data for one group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupKkt {
    #[serde(flatten)]
    pub group: Group,
    /// `Σ_{i=first}^{last} ∂E/∂ξ_i`, zero at the minimum.
    pub group_sum: f64,
    /// `Σ_{i=j}^{last} ∂E/∂ξ_i` for `j = first+1..=last`, nonnegative at the minimum.
    pub suffix_sums: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KktReport {
    pub groups: Vec<GroupKkt>,
    pub max_violation: f64,
    pub tolerance: f64,
    pub optimal: bool,
}

pub fn kkt_check(problem: &ValidatedProblem, xi: &[f64], tol: f64) -> Result<KktReport> {
    check_feasible(problem, xi)?;
    let g = gradient(problem, xi)?;
    let mut max_violation = 0.0_f64;
    let groups = GroupStructure::detect(xi)
        .groups
        .into_iter()
        .map(|group| {
            let (i, j) = (group.first - 1, group.last - 1);
            let mut suffix_sums = Vec::with_capacity(j - i);
            let mut acc = 0.0;
            for m in (i..=j).rev() {
                acc += g[m];
                if m > i {
                    max_violation = max_violation.max(-acc);
                    suffix_sums.push(acc);
                }
            }
            suffix_sums.reverse();
            max_violation = max_violation.max(acc.abs());
            GroupKkt {
                group,
                group_sum: acc,
                suffix_sums,
            }
        })
        .collect();
    Ok(KktReport {
        groups,
        max_violation,
        tolerance: tol,
        optimal: max_violation <= tol,
    })
}

/// Same quantity as `kkt_check(..).max_violation` without building a report.
pub(crate) fn violation(xi: &[f64], g: &[f64]) -> f64 {
    let mut worst = 0.0_f64;
    let mut i = 0;
    while i < xi.len() {
        let mut j = i;
        while j + 1 < xi.len() && xi[j + 1] == xi[i] {
            j += 1;
        }
        let mut acc = 0.0;
        for m in (i..=j).rev() {
            acc += g[m];
            if m > i {
                worst = worst.max(-acc);
            }
        }
        worst = worst.max(acc.abs());
        i = j + 1;
    }
    worst
}
