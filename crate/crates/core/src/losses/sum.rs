/// Fixed-shape pairwise summation: the same slice always sums to the same bits.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Mean of `xs` after sorting, so the result is a function of the multiset.
pub(crate) fn sorted_mean(mut xs: Vec<f64>) -> f64 {
    xs.sort_unstable_by(f64::total_cmp);
    pairwise_sum(&xs) / xs.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_closely() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).sin().abs()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-12 * naive);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn sorted_mean_ignores_order() {
        let a = vec![0.1, 0.7, 1e-9, 3.3, 2.2];
        let mut b = a.clone();
        b.reverse();
        assert_eq!(sorted_mean(a).to_bits(), sorted_mean(b).to_bits());
    }
}
