//! pass^k estimation: the probability that k independent trials of the
//! same task all succeed, estimated without bias from n ≥ k recorded
//! trials via the combinatorial C(s,k)/C(n,k) form.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PassKError {
    #[error("need at least k={k} trials, got n={n}")]
    TooFewTrials { n: usize, k: usize },
    #[error("k must be at least 1")]
    ZeroK,
}

/// Unbiased pass^k estimator: C(s,k)/C(n,k) with s = #successes.
/// Equals the fraction of size-k trial subsets that are all-success,
/// and degenerates to "did all trials pass" when n == k.
pub fn estimate_pass_k(outcomes: &[bool], k: usize) -> Result<f64, PassKError> {
    if k == 0 {
        return Err(PassKError::ZeroK);
    }
    let n = outcomes.len();
    if n < k {
        return Err(PassKError::TooFewTrials { n, k });
    }
    let s = outcomes.iter().filter(|&&b| b).count();
    if s < k {
        return Ok(0.0);
    }
    // C(s,k)/C(n,k) = Π_{i=0..k-1} (s-i)/(n-i), numerically stable for
    // the small n used here.
    let mut p = 1.0;
    for i in 0..k {
        p *= (s - i) as f64 / (n - i) as f64;
    }
    Ok(p)
}

/// Wilson score interval at 95% for a binomial proportion. Used to
/// attach approximate uncertainty to grid-point estimates (with the
/// estimate treated as a proportion over `n` effective observations).
pub fn wilson_interval(estimate: f64, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.96_f64;
    let n = n as f64;
    let z2 = z * z;
    let center = (estimate + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = (z / (1.0 + z2 / n)) * (estimate * (1.0 - estimate) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force reference: enumerate every size-k subset of trial
    /// indices and count the all-success ones.
    fn brute_force(outcomes: &[bool], k: usize) -> f64 {
        let n = outcomes.len();
        let mut total = 0u64;
        let mut all_pass = 0u64;
        // Iterate bitmasks with popcount == k.
        for mask in 0u32..(1u32 << n) {
            if mask.count_ones() as usize != k {
                continue;
            }
            total += 1;
            if (0..n).all(|i| mask & (1 << i) == 0 || outcomes[i]) {
                all_pass += 1;
            }
        }
        all_pass as f64 / total as f64
    }

    #[test]
    fn matches_brute_force_exhaustively() {
        for n in 1..=12usize {
            for pattern in 0u32..(1u32 << n) {
                let outcomes: Vec<bool> = (0..n).map(|i| pattern & (1 << i) != 0).collect();
                for k in 1..=n {
                    let est = estimate_pass_k(&outcomes, k).unwrap();
                    let bf = brute_force(&outcomes, k);
                    assert!(
                        (est - bf).abs() < 1e-12,
                        "n={n} pattern={pattern:b} k={k}: {est} vs {bf}"
                    );
                }
            }
        }
    }

    #[test]
    fn all_success_is_one() {
        for k in 1..=5 {
            assert_eq!(estimate_pass_k(&[true; 5], k).unwrap(), 1.0);
        }
    }

    #[test]
    fn four_trials_three_successes_k2_is_half() {
        let est = estimate_pass_k(&[true, true, true, false], 2).unwrap();
        assert!((est - 0.5).abs() < 1e-12);
    }

    #[test]
    fn two_trials_one_success_k2_is_zero() {
        assert_eq!(estimate_pass_k(&[true, false], 2).unwrap(), 0.0);
    }

    #[test]
    fn too_few_trials_errors() {
        assert_eq!(
            estimate_pass_k(&[true], 2),
            Err(PassKError::TooFewTrials { n: 1, k: 2 })
        );
        assert_eq!(estimate_pass_k(&[true], 0), Err(PassKError::ZeroK));
    }

    #[test]
    fn monotone_non_increasing_in_k() {
        let outcomes = [true, true, false, true, true, false, true];
        let mut prev = 1.0;
        for k in 1..=outcomes.len() {
            let est = estimate_pass_k(&outcomes, k).unwrap();
            assert!(est <= prev + 1e-12);
            prev = est;
        }
    }

    #[test]
    fn wilson_bounds_are_sane() {
        let (lo, hi) = wilson_interval(0.5, 20);
        assert!(lo > 0.25 && lo < 0.5);
        assert!(hi > 0.5 && hi < 0.75);
        let (lo, hi) = wilson_interval(1.0, 20);
        assert!(lo > 0.8 && hi == 1.0);
        assert_eq!(wilson_interval(0.5, 0), (0.0, 1.0));
    }
}
