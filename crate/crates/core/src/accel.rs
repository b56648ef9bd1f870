//! Wynn's ε-algorithm for accelerating slowly converging partial sums.

/// Accelerated limit estimates from a sequence of partial sums.
///
/// Returns the even-column tails `ε_{2j}` evaluated at the last available
/// index, ordered by increasing `j`; the final entry is the highest-order
/// estimate. Divisions by an exact zero difference (a converged column)
/// stop the table at that column.
pub fn wynn_epsilon(partial: &[f64]) -> Vec<f64> {
    let n = partial.len();
    if n == 0 {
        return Vec::new();
    }
    let mut estimates = vec![partial[n - 1]];
    let mut prev2 = vec![0.0; n + 1];
    let mut prev: Vec<f64> = partial.to_vec();
    for col in 1..n {
        let mut cur = Vec::with_capacity(prev.len() - 1);
        for i in 0..prev.len() - 1 {
            let d = prev[i + 1] - prev[i];
            if d == 0.0 || !d.is_finite() {
                return estimates;
            }
            cur.push(prev2[i + 1] + 1.0 / d);
        }
        if col % 2 == 0 {
            match cur.last() {
                Some(v) if v.is_finite() => estimates.push(*v),
                _ => return estimates,
            }
        }
        prev2 = prev;
        prev = cur;
    }
    estimates
}

/// Best estimate and an error indicator for a sequence of partial sums.
///
/// Deep columns of the ε-table amplify rounding noise, so the estimate is
/// the column whose distance to both neighbouring columns is smallest, and
/// that distance is the error indicator. Without any acceleration the
/// indicator is the last raw increment.
pub fn accelerated_limit(partial: &[f64]) -> (f64, f64) {
    let est = wynn_epsilon(partial);
    match est.len() {
        0 => (0.0, f64::INFINITY),
        1 => {
            let n = partial.len();
            let err = if n >= 2 {
                (partial[n - 1] - partial[n - 2]).abs()
            } else {
                f64::INFINITY
            };
            (est[0], err)
        }
        m => {
            let spread = |j: usize| {
                let back = (est[j] - est[j - 1]).abs();
                if j + 1 < m { back.max((est[j + 1] - est[j]).abs()) } else { back }
            };
            let best = (1..m).min_by(|&a, &b| spread(a).total_cmp(&spread(b))).unwrap_or(m - 1);
            (est[best], spread(best))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternating_harmonic_to_ln2() {
        let mut s = 0.0;
        let partial: Vec<f64> = (1..=20)
            .map(|k| {
                s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
                s
            })
            .collect();
        let (v, err) = accelerated_limit(&partial);
        assert!((v - std::f64::consts::LN_2).abs() < 1e-12, "{v}");
        assert!(err < 1e-10);
        // Raw partial sums are far from converged.
        assert!((partial[19] - std::f64::consts::LN_2).abs() > 1e-2);
    }

    #[test]
    fn geometric_is_exact_after_one_step() {
        let partial: Vec<f64> = (0..6).map(|n| (1.0 - 0.9f64.powi(n + 1)) / 0.1).collect();
        let est = wynn_epsilon(&partial);
        assert!((est[1] - 10.0).abs() < 1e-10);
    }

    #[test]
    fn converged_sequence_is_returned() {
        let (v, err) = accelerated_limit(&[1.0, 2.0, 2.0, 2.0]);
        assert_eq!(v, 2.0);
        assert!(err.is_finite());
    }
}
