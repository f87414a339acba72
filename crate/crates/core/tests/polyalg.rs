mod common;

use common::{c, separated, spike_moments};
use num_complex::Complex64;
use proptest::prelude::*;

use prony_core::polyalg::{
    confluent_vandermonde, find_roots, gautschi_bound, inf_norm_inverse, pade_from_moments,
    Polynomial,
};

/// Ascending coefficients of `prod (z - r)`, expanded by hand.
fn expand(roots: &[Complex64]) -> Vec<Complex64> {
    let mut p = vec![c(1.0)];
    for &r in roots {
        let mut next = vec![c(0.0); p.len() + 1];
        for (i, &a) in p.iter().enumerate() {
            next[i + 1] += a;
            next[i] -= a * r;
        }
        p = next;
    }
    p
}

fn roots_strategy() -> impl Strategy<Value = Vec<Complex64>> {
    (1usize..=8)
        .prop_flat_map(|n| {
            (
                separated(n, -1.0, 1.0, 0.2),
                prop::collection::vec(-0.5..0.5f64, n),
            )
        })
        // Separated real parts keep the roots apart whatever the imaginary
        // parts are.
        .prop_map(|(re, im)| {
            re.iter()
                .zip(&im)
                .map(|(&x, &y)| Complex64::new(x, y))
                .collect()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn roots_reexpand_to_the_input(roots in roots_strategy(), lead in 0.5..2.0f64) {
        let coeffs: Vec<Complex64> = expand(&roots).into_iter().map(|z| z * lead).collect();
        let found = find_roots(&Polynomial::new(coeffs.clone())).unwrap();
        prop_assert_eq!(found.roots.len(), roots.len());
        let back: Vec<Complex64> = expand(&found.roots).into_iter().map(|z| z * lead).collect();
        let scale = coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let err = coeffs.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-8 * scale, "relative coefficient error {}", err / scale);
    }

    #[test]
    fn pade_matches_the_series(
        nodes in (1usize..=5).prop_flat_map(|n| separated(n, -1.0, 1.0, 0.1)),
        scale in 0.5..2.0f64,
    ) {
        let n = nodes.len();
        let amps: Vec<f64> = (0..n).map(|j| scale * if j % 2 == 0 { 1.0 } else { -0.7 }).collect();
        let m: Vec<Complex64> = spike_moments(&nodes, &amps, 2 * n).into_iter().map(c).collect();
        let pade = pade_from_moments(&m, n, 1e-10).unwrap();
        let p = pade.numerator.coeffs();
        let q = pade.denominator.coeffs();
        // Series division P / Q.
        let mut s = vec![c(0.0); 2 * n];
        for k in 0..2 * n {
            let mut v = p.get(k).copied().unwrap_or(c(0.0));
            for i in 1..=k.min(q.len() - 1) {
                v -= q[i] * s[k - i];
            }
            s[k] = v / q[0];
        }
        let big = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for k in 0..2 * n {
            prop_assert!((s[k] - m[k]).norm() <= 1e-10 * big, "coefficient {} differs", k);
        }
    }

    #[test]
    fn gautschi_bounds_the_exact_norm(nodes in (1usize..=5).prop_flat_map(|n| separated(n, -1.0, 1.0, 0.05))) {
        let z: Vec<Complex64> = nodes.iter().map(|&x| c(x)).collect();
        let n = z.len();
        let v = confluent_vandermonde(&z, &vec![1; n], 2 * n).unwrap();
        let exact = inf_norm_inverse(&v).unwrap();
        let bound = gautschi_bound(&z).unwrap();
        prop_assert!(bound >= exact * (1.0 - 1e-12), "bound {} below exact {}", bound, exact);
    }
}
