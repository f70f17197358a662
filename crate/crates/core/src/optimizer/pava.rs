use crate::error::{Error, Result};

/// Weighted isotonic regression: the exact minimizer of
/// `½ Σ w_k (ξ_k − t_k)²` subject to `ξ_1 ≤ … ≤ ξ_n`.
pub fn pava(weights: &[f64], targets: &[f64]) -> Result<Vec<f64>> {
    if weights.len() != targets.len() {
        return Err(Error::LengthMismatch {
            field: "weights",
            expected: targets.len(),
            found: weights.len(),
        });
    }
    if let Some(index) = weights.iter().position(|w| !(*w > 0.0) || !w.is_finite()) {
        return Err(Error::NonPositiveWeight {
            index,
            value: weights[index],
        });
    }
    // (total weight, weighted mean, length)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(targets.len());
    for (&w, &t) in weights.iter().zip(targets) {
        blocks.push((w, t, 1));
        while blocks.len() >= 2 {
            let (w2, m2, c2) = blocks[blocks.len() - 1];
            let (w1, m1, c1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let w = w1 + w2;
            *blocks.last_mut().unwrap() = (w, (w1 * m1 + w2 * m2) / w, c1 + c2);
        }
    }
    Ok(blocks
        .into_iter()
        .flat_map(|(_, m, c)| std::iter::repeat(m).take(c))
        .collect())
}

/// Euclidean projection onto `{x_i ≤ x_{i+1} for every constrained link i}`.
/// Runs joined by constrained links are projected independently.
pub(crate) fn project_runs(x: &[f64], constrained: &[bool]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut start = 0;
    for end in 0..x.len() {
        if end + 1 == x.len() || !constrained[end] {
            let run = &x[start..=end];
            let ones = vec![1.0; run.len()];
            out.extend(pava(&ones, run).expect("unit weights"));
            start = end + 1;
        }
    }
    out
}
