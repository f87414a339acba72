mod common;

use common::{c, confluent_oracle, separated, signed, spike_moments};
use num_complex::Complex64;
use proptest::prelude::*;

use prony_core::stability::confluent_error_bounds;
use prony_core::{
    solve_confluent_prony, solve_prony_1d, ConfluentPronySolution, MomentSequence, PronySolution,
};

fn classical() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=6).prop_flat_map(|n| {
        (
            separated(n, -1.0, 1.0, 0.1),
            prop::collection::vec(signed(0.5, 2.0), n),
        )
    })
}

/// Multiplicities up to 3 with total at most 6. Gaps are 0.2: at 0.1,
/// clusters of triple nodes push the Hankel block below the solver's
/// relative rank threshold even for exact data.
fn confluent() -> impl Strategy<Value = (Vec<f64>, Vec<Vec<f64>>)> {
    prop::collection::vec(1usize..=3, 1..=4)
        .prop_filter("total multiplicity <= 6", |l| l.iter().sum::<usize>() <= 6)
        .prop_flat_map(|l| {
            let n = l.len();
            let blocks: Vec<_> = l
                .into_iter()
                .map(|lj| prop::collection::vec(signed(0.5, 2.0), lj))
                .collect();
            (separated(n, -1.0, 1.0, 0.2), blocks)
        })
}

/// Series coefficients of `sum_j a_j / (1 - x_j z)` from the combined
/// rational function `P / Q`, `Q = prod (1 - x_j z)`.
fn generating_series(sol: &PronySolution, count: usize) -> Vec<Complex64> {
    let mul = |p: &[Complex64], x: Complex64| {
        let mut out = vec![c(0.0); p.len() + 1];
        for (i, &a) in p.iter().enumerate() {
            out[i] += a;
            out[i + 1] -= a * x;
        }
        out
    };
    let mut q = vec![c(1.0)];
    for &x in sol.nodes() {
        q = mul(&q, x);
    }
    let mut p = vec![c(0.0); sol.len()];
    for (j, &a) in sol.amplitudes().iter().enumerate() {
        let mut term = vec![a];
        for (i, &x) in sol.nodes().iter().enumerate() {
            if i != j {
                term = mul(&term, x);
            }
        }
        for (pi, t) in p.iter_mut().zip(term) {
            *pi += t;
        }
    }
    let mut s = vec![c(0.0); count];
    for k in 0..count {
        let mut v = p.get(k).copied().unwrap_or(c(0.0));
        for i in 1..=k.min(q.len() - 1) {
            v -= q[i] * s[k - i];
        }
        s[k] = v;
    }
    s
}

/// Series of `sum_{i,j} a_{i,j} i! z^i / (1 - x_j z)^{i+1}` by repeated
/// multiplication with the geometric series.
fn confluent_series(sol: &ConfluentPronySolution, count: usize) -> Vec<Complex64> {
    let mut out = vec![c(0.0); count];
    for (&x, block) in sol.nodes().iter().zip(sol.amplitudes()) {
        let geometric: Vec<Complex64> = (0..count).map(|k| x.powu(k as u32)).collect();
        let mut power = geometric.clone();
        let mut fact = 1.0;
        for (i, &a) in block.iter().enumerate() {
            if i > 0 {
                fact *= i as f64;
                power = (0..count)
                    .map(|k| (0..=k).map(|t| power[t] * geometric[k - t]).sum())
                    .collect();
            }
            for k in i..count {
                out[k] += a * fact * power[k - i];
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn classical_roundtrip((nodes, amps) in classical()) {
        let n = nodes.len();
        let m = MomentSequence::from_real(&spike_moments(&nodes, &amps, 2 * n)).unwrap();
        let sol = solve_prony_1d(&m, n).unwrap();
        let big = amps.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        for j in 0..n {
            prop_assert!((sol.nodes()[j] - nodes[j]).norm() <= 1e-8);
            prop_assert!((sol.amplitudes()[j] - amps[j]).norm() <= 1e-7 * big);
        }
        // Canonical order: increasing real part.
        prop_assert!(sol.nodes().windows(2).all(|w| w[0].re <= w[1].re));
    }

    #[test]
    fn amplitudes_reproduce_the_mass((nodes, amps) in classical()) {
        let n = nodes.len();
        let raw = spike_moments(&nodes, &amps, 2 * n);
        let sol = solve_prony_1d(&MomentSequence::from_real(&raw).unwrap(), n).unwrap();
        let mass: Complex64 = sol.amplitudes().iter().sum();
        prop_assert!((mass - raw[0]).norm() <= 1e-12 * raw[0].abs().max(1.0));
    }

    #[test]
    fn generating_function_identity((nodes, amps) in classical()) {
        let n = nodes.len();
        let raw = spike_moments(&nodes, &amps, 2 * n);
        let sol = solve_prony_1d(&MomentSequence::from_real(&raw).unwrap(), n).unwrap();
        let series = generating_series(&sol, 2 * n);
        let big = raw.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        for (s, m) in series.iter().zip(&raw) {
            prop_assert!((s - m).norm() <= 1e-9 * big);
        }
    }

    #[test]
    fn confluent_roundtrip((nodes, amps) in confluent()) {
        let mults: Vec<usize> = amps.iter().map(Vec::len).collect();
        let l: usize = mults.iter().sum();
        let raw = confluent_oracle(&nodes, &amps, 2 * l);
        let sol = solve_confluent_prony(&MomentSequence::from_real(&raw).unwrap(), &mults).unwrap();
        prop_assert_eq!(sol.multiplicities(), mults);
        // Rounding the moments to doubles alone moves the nodes by up to the
        // first-order bound at eps = machine epsilon * max |m|; clustered
        // high-multiplicity nodes push that past 1e-8.
        let big = raw.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        let truth = ConfluentPronySolution::from_real(&nodes, &amps).unwrap();
        let floor = confluent_error_bounds(&truth, f64::EPSILON * big).unwrap().node_bounds;
        for (j, &x) in nodes.iter().enumerate() {
            let err = (sol.nodes()[j] - x).norm();
            prop_assert!(err <= 1e-8f64.max(20.0 * floor[j]), "node {} off by {} (floor {})", j, err, floor[j]);
        }
        let series = confluent_series(&sol, 2 * l);
        for (s, m) in series.iter().zip(&raw) {
            prop_assert!((s - m).norm() <= 1e-8 * big);
        }
    }
}
