//! Portable seeded randomness.
//!
//! Every random quantity in the crate is drawn from xoshiro256++ seeded via
//! SplitMix64 (`seed_from_u64`). Conversions are fixed so that other
//! implementations can reproduce the same draws:
//!
//! * uniform real in `[0, 1)`: `(next_u64() >> 11) * 2^-53`;
//! * uniform point of S²: draw `u1, u2`, let `a = min`, `b = max`, return
//!   `(a, b - a, 1 - b)`;
//! * uniform point of S¹: draw `u`, return `(u, 1 - u)`.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::simplex::SimplexPoint;

#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: Xoshiro256PlusPlus,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng { inner: Xoshiro256PlusPlus::seed_from_u64(seed) }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniformly distributed point of the simplex with `m` coordinates.
    pub fn simplex_point(&mut self, m: usize) -> SimplexPoint {
        match m {
            2 => {
                let u = self.uniform();
                SimplexPoint::from_array_unchecked([u, 1.0 - u, 0.0], 2)
            }
            3 => {
                let u1 = self.uniform();
                let u2 = self.uniform();
                let (a, b) = if u1 <= u2 { (u1, u2) } else { (u2, u1) };
                SimplexPoint::from_array_unchecked([a, b - a, 1.0 - b], 3)
            }
            _ => panic!("simplex dimension must be 2 or 3"),
        }
    }

    /// Uniform point whose coordinates are all at least `margin`.
    pub fn interior_point(&mut self, m: usize, margin: f64) -> SimplexPoint {
        loop {
            let x = self.simplex_point(m);
            if x.min_coordinate() >= margin {
                return x;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = SeededRng::new(42);
        let mut b = SeededRng::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        assert_ne!(SeededRng::new(1).next_u64(), SeededRng::new(2).next_u64());
    }

    #[test]
    fn points_lie_on_the_simplex() {
        let mut rng = SeededRng::new(7);
        for _ in 0..1000 {
            let x = rng.simplex_point(3);
            assert!(x.min_coordinate() >= 0.0);
            assert!((x.coords().iter().sum::<f64>() - 1.0).abs() < 1e-15);
            let y = rng.simplex_point(2);
            assert!((y.coords().iter().sum::<f64>() - 1.0).abs() < 1e-15);
            let u = rng.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn simplex_sampling_is_roughly_uniform() {
        // each coordinate of a uniform point of S² has mean 1/3
        let mut rng = SeededRng::new(11);
        let n = 20_000;
        let mut mean = [0.0; 3];
        for _ in 0..n {
            let x = rng.simplex_point(3).array();
            for i in 0..3 {
                mean[i] += x[i] / n as f64;
            }
        }
        for m in mean {
            assert!((m - 1.0 / 3.0).abs() < 0.01);
        }
    }
}
