//! Generators and hand-written forward maps shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use proptest::prelude::*;

pub fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `k (k-1) ... (k-i+1)`.
pub fn falling(k: usize, i: usize) -> f64 {
    (0..i).map(|t| k as f64 - t as f64).product()
}

/// Maps sorted unit draws to `n` points in `[lo, hi]` with gaps >= `gap`.
pub fn spread(mut u: Vec<f64>, lo: f64, hi: f64, gap: f64) -> Vec<f64> {
    u.sort_by(f64::total_cmp);
    let n = u.len();
    let room = hi - lo - gap * (n.saturating_sub(1)) as f64;
    assert!(room >= 0.0, "interval too short for the requested gaps");
    u.iter()
        .enumerate()
        .map(|(i, t)| lo + t * room + i as f64 * gap)
        .collect()
}

/// `n` increasing points in `[lo, hi]` with pairwise gaps >= `gap`.
pub fn separated(n: usize, lo: f64, hi: f64, gap: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..=1.0f64, n).prop_map(move |u| spread(u, lo, hi, gap))
}

/// Magnitude in `[lo, hi]` with a random sign.
pub fn signed(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo..=hi, any::<bool>()).prop_map(|(m, neg)| if neg { -m } else { m })
}

/// `sum_j a_j x_j^k`.
pub fn spike_moments(nodes: &[f64], amps: &[f64], count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| {
            nodes
                .iter()
                .zip(amps)
                .map(|(x, a)| a * x.powi(k as i32))
                .sum()
        })
        .collect()
}

/// `sum_j sum_i a_{i,j} k!/(k-i)! x_j^{k-i}`.
pub fn confluent_oracle(nodes: &[f64], amps: &[Vec<f64>], count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| {
            let mut s = 0.0;
            for (x, block) in nodes.iter().zip(amps) {
                for (i, a) in block.iter().enumerate() {
                    if i <= k {
                        s += a * falling(k, i) * x.powi((k - i) as i32);
                    }
                }
            }
            s
        })
        .collect()
}

/// `int_a^b x^k dx`.
pub fn monomial_integral(k: usize, a: f64, b: f64) -> f64 {
    let p = k as i32 + 1;
    (b.powi(p) - a.powi(p)) / p as f64
}

/// Composite Simpson on `[a, b]` with an even number of panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for i in 1..panels {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

pub fn max_abs_diff(a: &[Complex64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
