mod common;

use bratteli::generator::Tail;
use bratteli::vershik::{
    expand_word, is_consecutive_sequence, morse_diagram, reading_morphism, vershik_successor,
    FinitePath, OrderTail, Ordering, Successor,
};
use bratteli::{Diagram, IncidenceGenerator, IntMatrix};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A diagram defined on `depth` levels with shuffled edge orders.
fn ordered(d: usize, depth: usize, list: Vec<IntMatrix>, seed: u64) -> (Diagram, Ordering) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let levels: Vec<Vec<Vec<usize>>> = list
        .iter()
        .map(|f| {
            (0..d)
                .map(|v| {
                    let mut seq: Vec<usize> = (0..d)
                        .flat_map(|w| std::iter::repeat_n(w, f.get(v, w).to_usize().unwrap()))
                        .collect();
                    seq.shuffle(&mut rng);
                    seq
                })
                .collect()
        })
        .collect();
    let diagram = Diagram::new(d, IncidenceGenerator::explicit(list, Tail::Stop)).unwrap();
    assert_eq!(diagram.max_level(), Some(depth));
    (
        diagram,
        Ordering::Explicit {
            levels,
            tail: OrderTail::RepeatLast,
        },
    )
}

fn ordered_diagram() -> impl Strategy<Value = (Diagram, Ordering)> {
    (2usize..=3, 2usize..=8).prop_flat_map(|(d, depth)| {
        (
            prop::collection::vec(common::matrix(d, 0, 3), depth),
            any::<u64>(),
        )
            .prop_map(move |(list, seed)| ordered(d, depth, list, seed))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn successor_orbit_spells_the_word((d, o) in ordered_diagram(), v in 0usize..3) {
        let v = v % d.rank();
        let n = d.max_level().unwrap();
        let h = d.heights(n).unwrap()[v].to_usize().unwrap();
        prop_assume!(h <= 10_000);
        let word = expand_word(&d, &o, v, n, h).unwrap();
        prop_assert!(!word.truncated);
        let levels = o.levels(&d, n - 1).unwrap();
        let mut path = FinitePath::minimal(v, n);
        let mut seen = Vec::with_capacity(h);
        loop {
            seen.push(path.vertices(&levels).unwrap()[0]);
            match vershik_successor(&d, &o, &path).unwrap() {
                Successor::Next(p) => path = p,
                Successor::MaximalSignal => break,
            }
        }
        prop_assert_eq!(&seen, &word.symbols);
        prop_assert_eq!(path, FinitePath::maximal(&levels, v, n));
    }

    #[test]
    fn abelianization_matches_products((d, o) in ordered_diagram()) {
        let n = d.max_level().unwrap();
        let p = d.range_product(1, n - 1, false).unwrap();
        for v in 0..d.rank() {
            let word = expand_word(&d, &o, v, n, 1 << 20).unwrap();
            prop_assert!(!word.truncated);
            for u in 0..d.rank() {
                let count = word.symbols.iter().filter(|&&s| s == u).count();
                prop_assert_eq!(BigUint::from(count), p.get(v, u).clone());
            }
            // One more level: the word of v is the concatenation of the
            // words of the letters of sigma_n(v).
            let sigma = reading_morphism(&d, &o, n).unwrap();
            let total: BigUint = sigma[v].iter().map(|&u| d.heights(n - 1).unwrap()[u].clone()).sum();
            prop_assert_eq!(total, d.heights(n).unwrap()[v].clone());
        }
    }

    #[test]
    fn consecutive_validator(seq in prop::collection::vec(0usize..4, 0..12)) {
        let brute = (0..seq.len()).all(|i| {
            (i + 1..seq.len()).all(|k| seq[i] != seq[k] || (i..=k).all(|j| seq[j] == seq[i]))
        });
        prop_assert_eq!(is_consecutive_sequence(&seq), brute);
    }

    #[test]
    fn morse_minimal_frequency(
        (k, blocks) in (2usize..=4).prop_flat_map(|k| {
            (Just(k), prop::collection::vec(prop::collection::vec(0..k, 0..6), 1..3))
        })
    ) {
        // Make every block start at 0 and contain every symbol.
        let blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|tail| {
                let mut b: Vec<usize> = (0..k).collect();
                b.extend(tail);
                b
            })
            .collect();
        let m = morse_diagram(k, &blocks).unwrap();
        for (i, b) in blocks.iter().enumerate() {
            let f = m.diagram.incidence(i + 1).unwrap();
            let min = f.min_entry().to_u64().unwrap();
            prop_assert_eq!(&m.min_frequencies[i], &BigRational::new(min.into(), (b.len() as u64).into()));
        }
        prop_assert_eq!(m.verdict.label(), "CertifiedUnique");
    }
}
