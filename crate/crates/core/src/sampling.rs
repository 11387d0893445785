//! Seeded random helpers. Every stochastic routine takes an explicit seed so
//! repeated runs are bit-identical.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::convex_geometry::{Subspace, Vector};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent stream from a base seed and a label.
pub fn substream(seed: u64, label: u64) -> SeededRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(label);
    r
}

pub fn gaussian_vector(rng: &mut SeededRng, n: usize) -> Vector {
    DVector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(rng)))
}

/// Uniform direction on the unit sphere of R^n.
pub fn unit_vector(rng: &mut SeededRng, n: usize) -> Vector {
    loop {
        let v = gaussian_vector(rng, n);
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

/// Uniform unit direction inside a subspace (zero vector if the subspace is trivial).
pub fn unit_in(rng: &mut SeededRng, s: &Subspace) -> Vector {
    if s.dim() == 0 {
        return DVector::zeros(s.ambient_dim());
    }
    let c = unit_vector(rng, s.dim());
    s.from_coords(&c)
}

/// Flat Dirichlet weights of length `k`.
pub fn dirichlet(rng: &mut SeededRng, k: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = w.iter().sum();
    for x in &mut w {
        *x /= s;
    }
    w
}

pub fn uniform(rng: &mut SeededRng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}
