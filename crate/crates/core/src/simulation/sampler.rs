//! Random variate generators used by the simulation.
//!
//! All draws go through [`SimRng`], a ChaCha8 generator addressed by
//! `(seed, stream)` so that independent runs can be generated in any order
//! or in parallel and still produce identical values.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Gamma};

use crate::{Error, Result};

pub type SimRng = ChaCha8Rng;

/// Generator for stream `stream` of master seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw on `(0, 1]`, safe to take the logarithm of.
fn open_unit<R: RngCore>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Dirichlet sampler built from independent unit-scale Gamma draws.
///
/// Shapes below one are boosted: `G(w) = G(w + 1) * U^(1/w)`, evaluated in
/// log space. This keeps concentrations as small as `1e-4` from underflowing
/// to an all-zero vector.
#[derive(Debug, Clone)]
pub struct Dirichlet4 {
    weights: [f64; 4],
    gammas: [Gamma<f64>; 4],
}

impl Dirichlet4 {
    pub fn new(weights: [f64; 4]) -> Result<Self> {
        let mut gammas = Vec::with_capacity(4);
        for w in weights {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Domain {
                    what: "Dirichlet weight",
                    value: w,
                });
            }
            let shape = if w < 1.0 { w + 1.0 } else { w };
            gammas.push(
                Gamma::new(shape, 1.0)
                    .map_err(|e| Error::InvalidParameter(format!("gamma shape {shape}: {e}")))?,
            );
        }
        Ok(Dirichlet4 {
            weights,
            gammas: gammas.try_into().expect("four shapes"),
        })
    }

    pub fn weights(&self) -> [f64; 4] {
        self.weights
    }

    pub fn sample<R: RngCore>(&self, rng: &mut R) -> [f64; 4] {
        let mut logs = [0.0f64; 4];
        for ((l, g), &w) in logs.iter_mut().zip(&self.gammas).zip(&self.weights) {
            let x: f64 = g.sample(rng);
            *l = x.ln();
            if w < 1.0 {
                *l += open_unit(rng).ln() / w;
            }
        }
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut p = logs.map(|l| (l - max).exp());
        let sum: f64 = p.iter().sum();
        for x in p.iter_mut() {
            *x /= sum;
        }
        p
    }
}

/// Draws `Binomial(trials, p)`, by sequential inversion for up to 64 trials.
pub fn binomial<R: RngCore>(rng: &mut R, trials: u32, p: f64) -> u32 {
    if p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return trials;
    }
    if trials > 64 {
        return Binomial::new(u64::from(trials), p)
            .expect("p validated")
            .sample(rng) as u32;
    }
    if p > 0.5 {
        return trials - binomial(rng, trials, 1.0 - p);
    }
    let q = 1.0 - p;
    let ratio = p / q;
    let mut f = q.powi(trials as i32);
    let mut u: f64 = rng.random();
    let mut k = 0u32;
    while u > f && k < trials {
        u -= f;
        k += 1;
        f *= ratio * f64::from(trials - k + 1) / f64::from(k);
    }
    k
}

/// Index drawn from a categorical distribution over four outcomes.
pub fn categorical4<R: RngCore>(rng: &mut R, p: &[f64; 4]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &x) in p.iter().enumerate().take(3) {
        acc += x;
        if u < acc {
            return i;
        }
    }
    3
}

/// Uniform point on the probability simplex (`Dirichlet(1, 1, 1, 1)`).
pub fn uniform_simplex<R: RngCore>(rng: &mut R) -> [f64; 4] {
    let e = [(); 4].map(|_| -open_unit(rng).ln());
    let s: f64 = e.iter().sum();
    e.map(|x| x / s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| stream_rng(7, 3).next_u64()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        assert_ne!(stream_rng(7, 3).next_u64(), stream_rng(7, 4).next_u64());
    }

    #[test]
    fn dirichlet_tiny_shapes_stay_on_simplex() {
        let d = Dirichlet4::new([1e-4, 2e-4, 5e-5, 1e-4]).unwrap();
        let mut rng = stream_rng(1, 0);
        for _ in 0..1000 {
            let p = d.sample(&mut rng);
            assert!(p.iter().all(|x| x.is_finite() && *x >= 0.0));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dirichlet_rejects_bad_weights() {
        assert!(Dirichlet4::new([1.0, 0.0, 1.0, 1.0]).is_err());
        assert!(Dirichlet4::new([1.0, f64::NAN, 1.0, 1.0]).is_err());
    }

    #[test]
    fn binomial_edges_and_mean() {
        let mut rng = stream_rng(3, 0);
        assert_eq!(binomial(&mut rng, 10, 0.0), 0);
        assert_eq!(binomial(&mut rng, 10, 1.0), 10);
        let n = 200_000;
        let mean = (0..n)
            .map(|_| binomial(&mut rng, 10, 0.3) as f64)
            .sum::<f64>()
            / n as f64;
        assert!((mean - 3.0).abs() < 0.02);
        let mean = (0..n)
            .map(|_| binomial(&mut rng, 10, 0.8) as f64)
            .sum::<f64>()
            / n as f64;
        assert!((mean - 8.0).abs() < 0.02);
        let mean = (0..20_000)
            .map(|_| binomial(&mut rng, 500, 0.1) as f64)
            .sum::<f64>()
            / 20_000.0;
        assert!((mean - 50.0).abs() < 0.3);
    }

    #[test]
    fn categorical_frequencies() {
        let mut rng = stream_rng(5, 0);
        let p = [0.1, 0.2, 0.3, 0.4];
        let mut counts = [0usize; 4];
        let n = 100_000;
        for _ in 0..n {
            counts[categorical4(&mut rng, &p)] += 1;
        }
        for (c, q) in counts.iter().zip(p) {
            assert!((*c as f64 / n as f64 - q).abs() < 0.01);
        }
    }
}
