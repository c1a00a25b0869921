mod common;

use std::collections::BTreeSet;

use bratteli::decomposition::{canonical_diagram, canonical_form, DEFAULT_PROBE_DEPTH};
use bratteli::{Diagram, IncidenceGenerator};
use num_traits::Zero;
use proptest::prelude::*;

fn partition(blocks: &[Vec<usize>]) -> BTreeSet<BTreeSet<usize>> {
    blocks.iter().map(|b| b.iter().copied().collect()).collect()
}

fn permutation(d: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..d).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn canonical_form_is_idempotent(m in (2usize..=4).prop_flat_map(|d| common::matrix(d, 0, 3))) {
        let d = Diagram::stationary(m).unwrap();
        let form = canonical_form(&d, DEFAULT_PROBE_DEPTH).unwrap();
        let c = canonical_diagram(&d, &form).unwrap();
        let again = canonical_form(&c, DEFAULT_PROBE_DEPTH).unwrap();
        prop_assert!(again.is_identity());
        prop_assert_eq!(again.blocks.len(), form.blocks.len());
        prop_assert_eq!(&again.kinds, &form.kinds);
        let comps = form.minimal_components().len();
        prop_assert!(comps >= 1 && comps <= d.rank());
    }

    #[test]
    fn permutation_recovers_blocks(
        (m, perm) in (2usize..=4).prop_flat_map(|d| (common::matrix(d, 0, 3), permutation(d)))
    ) {
        let d = Diagram::stationary(m).unwrap();
        let form = canonical_form(&d, DEFAULT_PROBE_DEPTH).unwrap();
        let p = d.permuted(&perm).unwrap();
        let pform = canonical_form(&p, DEFAULT_PROBE_DEPTH).unwrap();
        // Map the permuted diagram's vertices back to the originals.
        let back: Vec<Vec<usize>> = pform.blocks.iter().map(|b| b.iter().map(|&v| perm[v]).collect()).collect();
        prop_assert_eq!(partition(&back), partition(&form.blocks));
    }

    #[test]
    fn upper_blocks_vanish(list in (2usize..=4).prop_flat_map(|d| prop::collection::vec(common::matrix(d, 0, 2), 1..3))) {
        let d = Diagram::new(list[0].rows(), IncidenceGenerator::periodic(list)).unwrap();
        let form = canonical_form(&d, DEFAULT_PROBE_DEPTH).unwrap();
        let c = canonical_diagram(&d, &form).unwrap();
        let ranges = form.block_ranges();
        let start = form.stabilization_level;
        if form.levelwise {
            for n in start..start + 6 {
                let f = c.incidence(n).unwrap();
                for (i, ri) in ranges.iter().enumerate() {
                    for rj in &ranges[i + 1..] {
                        for r in ri.clone() {
                            for col in rj.clone() {
                                prop_assert!(f.get(r, col).is_zero());
                            }
                        }
                    }
                }
            }
        }
    }
}
