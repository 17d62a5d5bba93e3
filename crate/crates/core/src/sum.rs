//! Deterministic summation.
//!
//! Every reduction in the crate goes through [`pairwise_sum`], which splits at
//! `len / 2` and recurses in ascending index order. Parallel callers evaluate
//! terms into a `Vec` first and reduce afterwards, so results never depend on
//! scheduling.

/// Pairwise (tree) sum in fixed ascending-index order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let (left, right) = values.split_at(n / 2);
            pairwise_sum(left) + pairwise_sum(right)
        }
    }
}

/// `Σ weights[i] * values[i]`, products formed first, then reduced pairwise.
pub fn pairwise_dot(weights: &[f64], values: &[f64]) -> f64 {
    debug_assert_eq!(weights.len(), values.len());
    let products: Vec<f64> = weights.iter().zip(values).map(|(w, v)| w * v).collect();
    pairwise_sum(&products)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[3.5]), 3.5);
        assert_eq!(pairwise_sum(&[1.0, 2.0, 3.0]), 6.0);
    }

    #[test]
    fn tree_order_is_fixed() {
        // ((a + b) + (c + d)) differs from left-to-right accumulation here.
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(pairwise_sum(&v), (1e16 + 1.0) + (-1e16 + 1.0));
    }
}
