//! Seeded sample points and the per-point executor.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Fraction of each box width kept clear of the boundary.
pub const BOUNDARY_MARGIN: f64 = 0.05;

pub const DEFAULT_SEED: u64 = 7;

/// `count` points drawn uniformly from the box shrunk by the boundary margin.
pub fn sample_points(domain: &[(f64, f64)], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            domain
                .iter()
                .map(|&(lo, hi)| {
                    let pad = BOUNDARY_MARGIN * (hi - lo);
                    rng.gen_range(lo + pad..hi - pad)
                })
                .collect()
        })
        .collect()
}

/// How independent sample evaluations are scheduled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Executor {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Executor {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Executor::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            Executor::Sequential
        }
    }
}

impl Executor {
    /// Maps `f` over `items`, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Executor::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Executor::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
        }
    }

    /// Like [`Executor::map`], stopping at the first error in item order.
    pub fn try_map<T, R, E, F>(self, items: &[T], f: F) -> Result<Vec<R>, E>
    where
        T: Sync,
        R: Send,
        E: Send,
        F: Fn(&T) -> Result<R, E> + Sync + Send,
    {
        self.map(items, f).into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_respect_margin_and_seed() {
        let dom = [(0.0, 1.0), (-10.0, 10.0)];
        let a = sample_points(&dom, 200, 3);
        let b = sample_points(&dom, 200, 3);
        assert_eq!(a, b);
        for p in &a {
            assert!(p[0] >= 0.05 && p[0] <= 0.95);
            assert!(p[1] >= -9.0 && p[1] <= 9.0);
        }
        assert_ne!(a, sample_points(&dom, 200, 4));
    }

    #[test]
    fn executors_agree() {
        let items: Vec<u64> = (0..1000).collect();
        let seq = Executor::Sequential.map(&items, |x| x * x);
        let def = Executor::default().map(&items, |x| x * x);
        assert_eq!(seq, def);
    }
}
