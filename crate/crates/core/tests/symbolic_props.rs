use proptest::prelude::*;
use symflow::sft::{canonical_rotation, is_primitive, perron, TransitionMatrix};
use symflow::thermo::{
    equilibrium, pressure, pressure_derivative, recode, variance, verify_gibbs, LocallyConstantPotential,
};

/// Random irreducible matrices: a Hamiltonian cycle plus random extra edges.
fn matrix(max: usize) -> impl Strategy<Value = TransitionMatrix> {
    (1..=max).prop_flat_map(|n| proptest::collection::vec(proptest::bool::weighted(0.35), n * n)).prop_map(|bits| {
        let n = (bits.len() as f64).sqrt().round() as usize;
        let rows: Vec<Vec<u8>> =
            (0..n).map(|i| (0..n).map(|j| u8::from(bits[i * n + j] || j == (i + 1) % n)).collect()).collect();
        TransitionMatrix::validate(&rows).unwrap()
    })
}

fn potential(a: &TransitionMatrix, depth: usize, values: &[f64]) -> LocallyConstantPotential {
    let n = a.size();
    LocallyConstantPotential::new(a, depth, |w| values[w.iter().fold(0, |acc, &s| acc * n + s) % values.len()]).unwrap()
}

fn dense_power_traces(a: &TransitionMatrix, n_max: usize) -> (Vec<u128>, Vec<u128>) {
    let n = a.size();
    let m: Vec<Vec<u128>> = a.to_dense().iter().map(|r| r.iter().map(|&x| x as u128).collect()).collect();
    let mut p = m.clone();
    let (mut traces, mut sums) = (Vec::new(), Vec::new());
    for _ in 0..n_max {
        traces.push((0..n).map(|i| p[i][i]).sum());
        sums.push(p.iter().flatten().sum());
        p = (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| p[i][k] * m[k][j]).sum()).collect()).collect();
    }
    (traces, sums)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn census_matches_trace(a in matrix(5)) {
        let (traces, _) = dense_power_traces(&a, 10);
        for n in 1..=10 {
            let c = a.enumerate_periodic(n).unwrap();
            prop_assert_eq!(c.census, traces[n - 1]);
            prop_assert_eq!(a.trace_power(n).unwrap(), traces[n - 1]);
            // Every periodic point lies on a primitive orbit of some period d | n.
            let from_orbits: u128 = (1..=n)
                .filter(|d| n % d == 0)
                .map(|d| d as u128 * a.enumerate_periodic(d).unwrap().orbits.len() as u128)
                .sum();
            prop_assert_eq!(from_orbits, traces[n - 1]);
            for o in &c.orbits {
                prop_assert!(is_primitive(o.word()));
                prop_assert_eq!(canonical_rotation(o.word()), o.word().to_vec());
                prop_assert!(a.is_cyclically_admissible(o.word()));
            }
        }
    }

    #[test]
    fn word_counts_match_enumeration(a in matrix(4)) {
        let (_, sums) = dense_power_traces(&a, 8);
        prop_assert_eq!(a.count_words(1).unwrap(), a.size() as u128);
        for n in 2..=9 {
            let words = a.words(n);
            prop_assert_eq!(a.count_words(n).unwrap(), words.len() as u128);
            prop_assert_eq!(words.len() as u128, sums[n - 2]);
            prop_assert!(words.iter().all(|w| a.is_admissible(w)));
        }
    }

    #[test]
    fn period_divides_cycle_lengths(a in matrix(5)) {
        let p = a.period().unwrap();
        let (traces, _) = dense_power_traces(&a, 12);
        for (k, t) in traces.iter().enumerate() {
            if *t > 0 {
                prop_assert_eq!((k + 1) % p, 0);
            }
        }
    }

    #[test]
    fn perron_residuals(a in matrix(6)) {
        let m = a.to_weighted();
        let p = perron(&m).unwrap();
        let n = m.size();
        let (mut mr, mut lm) = (vec![0.0; n], vec![0.0; n]);
        m.mul_vec(&p.right, &mut mr);
        m.vec_mul(&p.left, &mut lm);
        for i in 0..n {
            prop_assert!((mr[i] - p.lambda * p.right[i]).abs() <= 1e-12);
            prop_assert!((lm[i] - p.lambda * p.left[i]).abs() <= 1e-12);
            prop_assert!(p.right[i] > 0.0 && p.left[i] > 0.0);
        }
        prop_assert!((p.right.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let lr: f64 = p.left.iter().zip(&p.right).map(|(x, y)| x * y).sum();
        prop_assert!((lr - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn pressure_survives_recoding(a in matrix(3), depth in 1usize..=3, vals in proptest::collection::vec(-1.0..1.0f64, 1..12)) {
        let phi = potential(&a, depth, &vals);
        let (a2, phi2) = recode(&a, &phi).unwrap();
        prop_assert_eq!(phi2.depth(), 1);
        prop_assert!((pressure(&a, &phi).unwrap() - pressure(&a2, &phi2).unwrap()).abs() <= 1e-10);
        // P(φ + c) = P(φ) + c
        let shifted = phi.affine(1.0, 0.7);
        prop_assert!((pressure(&a, &shifted).unwrap() - pressure(&a, &phi).unwrap() - 0.7).abs() <= 1e-10);
    }

    #[test]
    fn equilibrium_is_invariant(a in matrix(3), depth in 1usize..=2, vals in proptest::collection::vec(-1.0..1.0f64, 1..8)) {
        let phi = potential(&a, depth, &vals);
        let mu = equilibrium(&a, &phi).unwrap();
        prop_assert!(mu.stationarity_residual() <= 1e-12);
        for n in 1..=8 {
            let total: f64 = a.words(n).iter().map(|w| mu.cylinder(w).unwrap()).sum();
            prop_assert!((total - 1.0).abs() <= 1e-12, "n = {} total = {}", n, total);
        }
        // Kolmogorov consistency: a cylinder is the sum of its extensions.
        for w in a.words(3) {
            let ext: f64 = a.successors(w[2]).iter().map(|&s| mu.cylinder(&[w[0], w[1], w[2], s]).unwrap()).sum();
            prop_assert!((ext - mu.cylinder(&w).unwrap()).abs() <= 1e-14);
        }
    }

    #[test]
    fn gibbs_bounds_settle(a in matrix(3), depth in 1usize..=2, vals in proptest::collection::vec(-1.0..1.0f64, 1..8)) {
        let phi = potential(&a, depth, &vals);
        let g = verify_gibbs(&a, &phi, 12).unwrap();
        prop_assert!(g.c_low > 0.0 && g.c_high.is_finite());
        let settle = depth + a.size() * a.size();
        let last = g.levels.last().unwrap().cumulative_spread();
        for l in &g.levels {
            prop_assert!(l.min >= g.c_low && l.max <= g.c_high);
            if l.length >= settle {
                prop_assert!((l.cumulative_spread() / last - 1.0).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn derivative_identity_and_convexity(
        a in matrix(3),
        d1 in 1usize..=2,
        d2 in 1usize..=2,
        v1 in proptest::collection::vec(-1.0..1.0f64, 1..8),
        v2 in proptest::collection::vec(-1.0..1.0f64, 1..8),
    ) {
        let (phi, psi) = (potential(&a, d1, &v1), potential(&a, d2, &v2));
        let d = pressure_derivative(&a, &phi, &psi).unwrap();
        prop_assert!((d.slope - d.integral).abs() <= 1e-6);
        let p = |t: f64| pressure(&a, &phi.add_scaled(&a, &psi, t).unwrap()).unwrap();
        let ts: Vec<f64> = (-4..=4).map(|k| 0.05 * k as f64).collect();
        for w in ts.windows(3) {
            prop_assert!(p(w[0]) + p(w[2]) - 2.0 * p(w[1]) >= -1e-9);
        }
        prop_assert!(variance(&a, &phi, &psi).unwrap() >= 0.0);
    }
}
