#![allow(dead_code)]

use bratteli::{Diagram, IncidenceGenerator, IntMatrix, Tail};
use proptest::prelude::*;

/// Square matrix with entries in `lo..=hi` and no zero rows.
pub fn matrix(d: usize, lo: u64, hi: u64) -> impl Strategy<Value = IntMatrix> {
    prop::collection::vec(prop::collection::vec(lo..=hi, d), d).prop_map(move |mut rows| {
        for (i, row) in rows.iter_mut().enumerate() {
            if row.iter().all(|&x| x == 0) {
                row[i] = 1;
            }
        }
        IntMatrix::from_rows(&rows).expect("square")
    })
}

pub fn positive(d: usize, hi: u64) -> impl Strategy<Value = IntMatrix> {
    matrix(d, 1, hi)
}

/// Stationary, periodic or explicit diagrams of rank 2 or 3.
pub fn diagram() -> impl Strategy<Value = Diagram> {
    (2usize..=3).prop_flat_map(|d| {
        prop_oneof![
            matrix(d, 0, 4).prop_map(move |m| Diagram::stationary(m).unwrap()),
            prop::collection::vec(matrix(d, 0, 4), 2..4).prop_map(move |l| Diagram::new(
                d,
                IncidenceGenerator::periodic(l)
            )
            .unwrap()),
            prop::collection::vec(matrix(d, 0, 4), 1..6).prop_map(move |l| {
                Diagram::new(d, IncidenceGenerator::explicit(l, Tail::RepeatLast)).unwrap()
            }),
        ]
    })
}

/// Diagrams whose matrices are all strictly positive.
pub fn positive_diagram() -> impl Strategy<Value = Diagram> {
    (2usize..=3).prop_flat_map(|d| {
        prop_oneof![
            positive(d, 5).prop_map(move |m| Diagram::stationary(m).unwrap()),
            prop::collection::vec(positive(d, 5), 2..4).prop_map(move |l| Diagram::new(
                d,
                IncidenceGenerator::periodic(l)
            )
            .unwrap()),
        ]
    })
}

pub fn m(rows: &[&[u64]]) -> IntMatrix {
    IntMatrix::from_u64(rows)
}
