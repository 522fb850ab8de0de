//! Reductions used by the quadratures.
//!
//! Slab sums are produced independently (possibly on different threads) and
//! then combined in a fixed binary-tree order, so results do not depend on
//! how rayon schedules the work.

/// Sums `values` pairwise in a fixed tree order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Component-wise pairwise sum of fixed-size accumulators.
pub fn pairwise_sum_n<const K: usize>(values: &[[f64; K]]) -> [f64; K] {
    match values.len() {
        0 => [0.0; K],
        1 => values[0],
        n => {
            let (a, b) = values.split_at(n / 2);
            let (x, y) = (pairwise_sum_n(a), pairwise_sum_n(b));
            std::array::from_fn(|k| x[k] + y[k])
        }
    }
}
