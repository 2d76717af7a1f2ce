//! Small numerical helpers shared by the quadrature and statistics code.

/// Pairwise (cascade) summation. The recursion split is fixed by the slice
/// length, so the result does not depend on how callers schedule work.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        values.iter().sum()
    } else {
        let (lo, hi) = values.split_at(values.len() / 2);
        pairwise_sum(lo) + pairwise_sum(hi)
    }
}

/// Composite trapezoid weights for `n` uniformly spaced nodes.
pub fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    if let Some(first) = w.first_mut() {
        *first = 0.5 * h;
    }
    if let Some(last) = w.last_mut() {
        *last = 0.5 * h;
    }
    w
}

/// Trapezoid rule on uniformly spaced samples.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner = pairwise_sum(&values[1..n - 1]);
            h * (inner + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

/// Node coordinate `i` of `n` uniformly spaced points on [lo, hi].
/// Endpoints are exact, and so is the midpoint of a symmetric interval.
pub fn lerp_node(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    if i + 1 == n {
        return hi;
    }
    let s = i as f64 / (n - 1) as f64;
    lo * (1.0 - s) + hi * s
}

pub fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499_500.0);
    }

    #[test]
    fn trapezoid_linear_is_exact() {
        let h = 0.25;
        let v: Vec<f64> = (0..9).map(|i| 3.0 * i as f64 * h + 1.0).collect();
        assert!((trapezoid(&v, h) - (1.5 * 4.0 + 2.0)).abs() < 1e-14);
    }

    #[test]
    fn symmetric_midpoint_is_zero() {
        assert_eq!(lerp_node(-7.3, 7.3, 50, 101), 0.0);
        assert_eq!(lerp_node(-7.3, 7.3, 100, 101), 7.3);
    }

    #[test]
    fn sign_of_zero() {
        assert_eq!(sign0(0.0), 0.0);
        assert_eq!(sign0(-0.0), 0.0);
        assert_eq!(sign0(-2.0), -1.0);
    }
}
