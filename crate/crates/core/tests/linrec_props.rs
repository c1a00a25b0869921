mod common;

use bratteli::linrec::{
    densities, norm_growth_bounds, perron_data, spectral_radii_along, DEFAULT_PERRON_TOL,
};
use bratteli::{IntMatrix, SymbolStream};
use proptest::prelude::*;

fn alphabet() -> impl Strategy<Value = Vec<IntMatrix>> {
    (2usize..=3).prop_flat_map(|d| prop::collection::vec(common::positive(d, 6), 2))
}

fn kappa(x: &[f64]) -> f64 {
    let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = x.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn sandwich_holds(letters in alphabet(), word in prop::collection::vec(0usize..2, 1..=10)) {
        let product: Vec<IntMatrix> = word.iter().map(|&s| letters[s].clone()).collect();
        let b = norm_growth_bounds(&product).unwrap();
        prop_assert!(b.holds(), "{b:?}");
    }

    #[test]
    fn perron_bracket(a in (2usize..=4).prop_flat_map(|d| common::positive(d, 9))) {
        let p = perron_data(&a, DEFAULT_PERRON_TOL).unwrap();
        prop_assert!(p.rho_bounds.0 <= p.rho * (1.0 + 1e-12) && p.rho <= p.rho_bounds.1 * (1.0 + 1e-12));
        prop_assert!(p.rho_bounds.1 - p.rho_bounds.0 <= 1e-9 * p.rho);
        prop_assert!((p.vector.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn radii_scale_with_letters(letters in alphabet(), cycle in prop::collection::vec(0usize..2, 1..6), c in 2u64..5) {
        let omega = SymbolStream::periodic(vec![], cycle);
        let p = spectral_radii_along(&letters, &omega, 64).unwrap();
        let d = letters[0].rows();
        let diag: Vec<Vec<u64>> = (0..d).map(|i| (0..d).map(|j| if i == j { c } else { 0 }).collect()).collect();
        let scale = IntMatrix::from_rows(&diag).unwrap();
        let scaled: Vec<IntMatrix> = letters.iter().map(|m| m.mul(&scale)).collect();
        let q = spectral_radii_along(&scaled, &omega, 64).unwrap();
        let ln_c = (c as f64).ln();
        prop_assert!((q.log_rho_upper - p.log_rho_upper - ln_c).abs() < 1e-9);
        prop_assert!((q.log_rho_lower - p.log_rho_lower - ln_c).abs() < 1e-9);
        prop_assert!(p.log_rho_lower <= p.log_rho_upper + 1e-12);
    }

    #[test]
    fn norm_roots_within_radii(letters in alphabet(), cycle in prop::collection::vec(0usize..2, 1..6)) {
        let period = cycle.len();
        let omega = SymbolStream::periodic(vec![], cycle);
        let p = spectral_radii_along(&letters, &omega, 64).unwrap();
        let d = letters[0].rows() as f64;
        let k = p.perron.iter().map(|x| kappa(&x.vector)).fold(1.0, f64::max);
        for n in (period..=p.norm_roots.len()).step_by(period) {
            let root = p.norm_roots[n - 1];
            let slack = (d * k).powf(1.0 / n as f64) * (1.0 + 1e-9);
            prop_assert!(root <= p.rho_upper() * slack, "n={n}: {root} > {}", p.rho_upper());
            prop_assert!(root >= p.rho_lower() / slack, "n={n}: {root} < {}", p.rho_lower());
        }
    }

    #[test]
    fn one_period_gives_exact_densities(cycle in prop::collection::vec(0usize..3, 1..8)) {
        let exact = densities(&SymbolStream::periodic(vec![], cycle.clone()), 3, 0).unwrap();
        let p = cycle.len();
        for a in 0..3 {
            let count = cycle.iter().filter(|&&s| s == a).count() as f64;
            prop_assert!((exact.letters[a] - count / p as f64).abs() < 1e-15);
        }
        let pairs: usize = (0..p).filter(|&i| cycle[i] == cycle[(i + 1) % p]).count();
        let same: f64 = (0..3).filter_map(|a| exact.pairs.get(&(a, a))).sum();
        prop_assert!((same - pairs as f64 / p as f64).abs() < 1e-12);
    }
}
