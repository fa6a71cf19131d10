/// Mean and sample standard deviation of the finite values; `(NaN, NaN)` if none.
pub fn mean_std(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let xs: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Exact two-sided sign test: probability under `Binomial(wins + losses, 1/2)`
/// of a split at least as uneven as the observed one. Ties are dropped
/// before calling.
pub fn sign_test_p_value(wins: usize, losses: usize) -> f64 {
    let total = wins + losses;
    if total == 0 {
        return 1.0;
    }
    let tail = wins.min(losses);
    // log C(total, i) accumulated incrementally.
    let mut log_choose = 0.0_f64;
    let mut acc = 0.0_f64;
    let log_half_pow = total as f64 * 0.5_f64.ln();
    for i in 0..=tail {
        if i > 0 {
            log_choose += ((total - i + 1) as f64).ln() - (i as f64).ln();
        }
        acc += (log_choose + log_half_pow).exp();
    }
    (2.0 * acc).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_ignores_nan() {
        let (m, s) = mean_std([1.0, 2.0, 3.0, f64::NAN]);
        assert_eq!(m, 2.0);
        assert_eq!(s, 1.0);
        assert!(mean_std([f64::NAN]).0.is_nan());
        assert_eq!(mean_std([4.0]), (4.0, 0.0));
    }

    #[test]
    fn sign_test_values() {
        // 2 * P(X <= 0) for n = 5: 2 / 32.
        assert!((sign_test_p_value(5, 0) - 0.0625).abs() < 1e-15);
        // 2 * (1 + 20 + 190 + 1140 + 4845 + 15504) / 2^20 for 15 of 20 wins.
        let expected = 2.0 * 21700.0 / 1_048_576.0;
        assert!((sign_test_p_value(15, 5) - expected).abs() < 1e-14);
        assert_eq!(sign_test_p_value(10, 10), 1.0);
        assert_eq!(sign_test_p_value(0, 0), 1.0);
    }
}
