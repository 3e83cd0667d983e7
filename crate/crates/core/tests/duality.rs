//! The k-support norm is the support function of the top-k unit ball:
//! every point of the ball gives a lower bound, and a sampled search that
//! refines its best point gets arbitrarily close.

use graded_norms::sampling::{mixture_vector, nonzero_mixture_vector, trial_rng};
use graded_norms::topk::{ksupport_eval_with, topk_eval_brute_force, KSupportMethod};
use graded_norms::{NormSpec, Vector};
use rand::Rng;
use rand_distr::StandardNormal;

const SAMPLES: usize = 100_000;
const REFINE_STEPS: usize = 20_000;

/// `<x, y> / top-k(x)`: the value at the boundary point along direction `x`.
fn ratio(source: &NormSpec, k: usize, x: &[f64], y: &[f64]) -> f64 {
    let v = Vector::new(x.to_vec()).unwrap();
    let t = topk_eval_brute_force(source, k, &v).unwrap();
    if t == 0.0 {
        return f64::NEG_INFINITY;
    }
    x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / t
}

/// Sampled sup of `<x, y>` over the top-k ball: random directions, then a
/// random-direction hill climb with a shrinking step from the best sample.
fn sampled_support(source: &NormSpec, k: usize, y: &[f64], seed: u64) -> f64 {
    let d = y.len();
    let mut rng = trial_rng(seed, 0);
    let signs: Vec<f64> = y.iter().map(|v| v.signum()).collect();
    let mut best = signs.clone();
    let mut best_value = ratio(source, k, &best, y);
    for i in 0..SAMPLES {
        let x: Vec<f64> = if i % 2 == 0 {
            mixture_vector(&mut rng, d).into_inner()
        } else {
            // directions in the orthant of y
            signs.iter().map(|s| s * rng.random::<f64>()).collect()
        };
        let value = ratio(source, k, &x, y);
        if value > best_value {
            best_value = value;
            best = x;
        }
    }
    let mut step = 0.1 * best.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for _ in 0..REFINE_STEPS {
        let candidate: Vec<f64> =
            best.iter().map(|b| b + step * rng.sample::<f64, _>(StandardNormal)).collect();
        let value = ratio(source, k, &candidate, y);
        if value > best_value {
            best_value = value;
            best = candidate;
        } else {
            step *= 0.999;
        }
    }
    best_value
}

#[test]
fn ksupport_is_the_support_function_of_the_topk_ball() {
    let hexagon = NormSpec::atomic(vec![
        Vector::new(vec![1.0, 1.0]).unwrap(),
        Vector::new(vec![1.0, -1.0]).unwrap(),
        Vector::new(vec![0.0, 2.0]).unwrap(),
    ])
    .unwrap();
    let cases = [
        (NormSpec::lp(1.0).unwrap(), 4),
        (NormSpec::lp(2.0).unwrap(), 3),
        (NormSpec::lp(3.0).unwrap(), 3),
        (NormSpec::lp_inf(), 4),
        (NormSpec::weighted_lp(2.0, Vector::new(vec![1.0, 2.0, 0.5]).unwrap()).unwrap(), 3),
        (hexagon, 2),
    ];
    let mut worst = 0.0f64;
    for (index, (source, d)) in cases.iter().enumerate() {
        let y = nonzero_mixture_vector(&mut trial_rng(11, index), *d);
        for k in 1..=*d {
            let value = ksupport_eval_with(source, k, &y, 1e-10, KSupportMethod::DualOpt).unwrap();
            let lower = sampled_support(source, k, y.as_slice(), (100 * index + k) as u64);
            assert!(lower <= value * (1.0 + 1e-9) + 1e-12, "{source} k={k} y={y}: sample {lower} above {value}");
            let gap = (value - lower) / value;
            worst = worst.max(gap);
            assert!(gap <= 1e-6, "{source} k={k} y={y}: sampled {lower}, solver {value}");
        }
    }
    println!("largest relative gap between sampled and solved values: {worst:e}");
}
