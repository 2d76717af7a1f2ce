//! Seeded random streams, tabulated inverse-CDF sampling and bootstrap
//! resampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent deterministic stream `stream` under the run seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sampler for a density tabulated on uniformly spaced nodes. The CDF is
/// the cumulative trapezoid integral and is inverted by linear interpolation.
#[derive(Debug, Clone)]
pub struct InverseCdf {
    nodes: Vec<f64>,
    cdf: Vec<f64>,
    total: f64,
}

impl InverseCdf {
    /// `density` must be nonnegative with positive total mass.
    pub fn new(nodes: &[f64], density: &[f64]) -> Option<Self> {
        if nodes.len() < 2 || nodes.len() != density.len() {
            return None;
        }
        if density.iter().any(|&d| !(d >= 0.0)) {
            return None;
        }
        let mut cdf = Vec::with_capacity(nodes.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for k in 1..nodes.len() {
            acc += 0.5 * (density[k - 1] + density[k]) * (nodes[k] - nodes[k - 1]);
            cdf.push(acc);
        }
        if !(acc > 0.0 && acc.is_finite()) {
            return None;
        }
        Some(InverseCdf {
            nodes: nodes.to_vec(),
            cdf,
            total: acc,
        })
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// Quantile at level u ∈ [0, 1].
    pub fn quantile(&self, u: f64) -> f64 {
        let target = u.clamp(0.0, 1.0) * self.total;
        let k = self
            .cdf
            .partition_point(|&c| c < target)
            .clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let (q0, q1) = (self.nodes[k - 1], self.nodes[k]);
        if c1 > c0 {
            q0 + (target - c0) / (c1 - c0) * (q1 - q0)
        } else {
            q0
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.gen::<f64>())
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}

pub fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = crate::numeric::pairwise_sum(values) / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = crate::numeric::pairwise_sum(&sq) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Means of `resamples` bootstrap resamples (n draws with replacement).
pub fn bootstrap_means<R: Rng + ?Sized>(values: &[f64], resamples: usize, rng: &mut R) -> Vec<f64> {
    let n = values.len();
    if n == 0 {
        return vec![0.0; resamples];
    }
    (0..resamples)
        .map(|_| {
            let mut sum = 0.0;
            for _ in 0..n {
                sum += values[rng.gen_range(0..n)];
            }
            sum / n as f64
        })
        .collect()
}

/// Linear-interpolated empirical quantile of already sorted data.
pub fn sorted_quantile(sorted: &[f64], level: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let pos = level.clamp(0.0, 1.0) * (n - 1) as f64;
            let k = (pos.floor() as usize).min(n - 2);
            let f = pos - k as f64;
            (1.0 - f) * sorted[k] + f * sorted[k + 1]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| stream_rng(7, 0).gen()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let x: u64 = stream_rng(7, 0).gen();
        let y: u64 = stream_rng(7, 1).gen();
        let z: u64 = stream_rng(8, 0).gen();
        assert_ne!(x, y);
        assert_ne!(x, z);
    }

    #[test]
    fn uniform_density_quantiles() {
        let nodes: Vec<f64> = (0..11).map(|k| k as f64 / 10.0).collect();
        let inv = InverseCdf::new(&nodes, &[1.0; 11]).unwrap();
        assert!((inv.total() - 1.0).abs() < 1e-15);
        for &u in &[0.0, 0.123, 0.5, 0.999, 1.0] {
            assert!((inv.quantile(u) - u).abs() < 1e-12);
        }
    }

    #[test]
    fn triangular_density_median() {
        // density 2x on [0,1]; trapezoid CDF is exact at nodes
        let nodes: Vec<f64> = (0..=1000).map(|k| k as f64 / 1000.0).collect();
        let dens: Vec<f64> = nodes.iter().map(|x| 2.0 * x).collect();
        let inv = InverseCdf::new(&nodes, &dens).unwrap();
        assert!((inv.quantile(0.25) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_densities() {
        assert!(InverseCdf::new(&[0.0, 1.0], &[0.0, 0.0]).is_none());
        assert!(InverseCdf::new(&[0.0, 1.0], &[1.0, -0.1]).is_none());
        assert!(InverseCdf::new(&[0.0], &[1.0]).is_none());
    }

    #[test]
    fn mean_and_error() {
        assert_eq!(mean_and_std_error(&[0.0; 5]), (0.0, 0.0));
        let (m, se) = mean_and_std_error(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bootstrap_of_constant_is_constant() {
        let mut rng = stream_rng(1, 0);
        let means = bootstrap_means(&[3.5; 100], 50, &mut rng);
        assert!(means.iter().all(|&m| m == 3.5));
    }

    #[test]
    fn quantiles_of_sorted() {
        let v = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(sorted_quantile(&v, 0.5), 2.0);
        assert_eq!(sorted_quantile(&v, 0.125), 0.5);
        assert_eq!(sorted_quantile(&v, 1.0), 4.0);
    }
}
