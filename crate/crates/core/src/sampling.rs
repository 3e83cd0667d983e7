//! Seeded random inputs for the checkers.
//!
//! Each trial draws from its own ChaCha8 stream (`seed`, stream = trial
//! index), so a trial can be reproduced alone and results do not depend on
//! how trials are scheduled across threads.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::Result;
use crate::vectors::{IndexSet, Vector};

/// Smallest and largest planted modulus.
pub const PLANTED_RANGE: (f64, f64) = (0.1, 10.0);

pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// A vector from a three-way mixture: standard normal, normal with each
/// coordinate zeroed with probability 1/2, or signed uniform on `[-1, 1]`.
pub fn mixture_vector(rng: &mut impl Rng, dim: usize) -> Vector {
    let mode = rng.random_range(0..3u8);
    let components = (0..dim)
        .map(|_| match mode {
            0 => rng.sample::<f64, _>(StandardNormal),
            1 => {
                if rng.random_bool(0.5) {
                    0.0
                } else {
                    rng.sample::<f64, _>(StandardNormal)
                }
            }
            _ => rng.random_range(-1.0..=1.0),
        })
        .collect();
    Vector::from_finite(components)
}

/// A nonzero mixture vector.
pub fn nonzero_mixture_vector(rng: &mut impl Rng, dim: usize) -> Vector {
    loop {
        let v = mixture_vector(rng, dim);
        if !v.is_zero() {
            return v;
        }
    }
}

/// Exactly `s` nonzero entries at uniformly chosen positions, with moduli
/// uniform on [`PLANTED_RANGE`] and random signs.
pub fn planted_sparse(rng: &mut impl Rng, dim: usize, s: usize) -> Vector {
    let mut x = vec![0.0; dim];
    for i in sample(rng, dim, s.min(dim)).into_iter() {
        let modulus = rng.random_range(PLANTED_RANGE.0..=PLANTED_RANGE.1);
        x[i] = if rng.random_bool(0.5) { modulus } else { -modulus };
    }
    Vector::from_finite(x)
}

/// Each coordinate included independently with probability 1/2.
pub fn random_subset(rng: &mut impl Rng, dim: usize) -> IndexSet {
    let members = (0..dim).filter(|_| rng.random_bool(0.5)).collect();
    IndexSet::new(members, dim).expect("members are in range")
}

pub fn random_nonempty_subset(rng: &mut impl Rng, dim: usize) -> IndexSet {
    loop {
        let k = random_subset(rng, dim);
        if !k.is_empty() {
            return k;
        }
    }
}

/// A uniformly random subset of `outer`.
pub fn random_subset_of(rng: &mut impl Rng, outer: &IndexSet) -> IndexSet {
    let members = outer.members().iter().copied().filter(|_| rng.random_bool(0.5)).collect();
    IndexSet::new(members, outer.ambient_dim()).expect("members are in range")
}

/// Runs `trials` independent trials, possibly in parallel, returning results
/// in trial order. The first error by trial index wins.
pub fn run_trials<T, F>(trials: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Send + Sync,
{
    let results: Vec<Result<T>> = (0..trials).into_par_iter().map(f).collect();
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectors::l0;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = mixture_vector(&mut trial_rng(42, 3), 5);
        let b = mixture_vector(&mut trial_rng(42, 3), 5);
        let c = mixture_vector(&mut trial_rng(42, 4), 5);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn planted_vectors_have_the_requested_sparsity() {
        let mut rng = trial_rng(7, 0);
        for s in 0..=6 {
            let x = planted_sparse(&mut rng, 6, s);
            assert_eq!(l0(&x), s);
            assert!(x.iter().all(|v| *v == 0.0 || (0.1..=10.0).contains(&v.abs())));
        }
    }

    #[test]
    fn trials_come_back_in_order() {
        let out = run_trials(50, |t| Ok(t * 2)).unwrap();
        assert_eq!(out, (0..50).map(|t| t * 2).collect::<Vec<_>>());
    }
}
