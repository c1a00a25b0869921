//! Generalized Morse sequences over `Z/kZ` as ordered diagrams.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{OrderTail, Ordering};
use crate::diagram::Diagram;
use crate::error::{Error, Result};
use crate::generator::IncidenceGenerator;
use crate::matrix::IntMatrix;
use crate::verdict::{Claim, Evidence, Verdict};

#[derive(Debug, Clone)]
pub struct MorseDiagram {
    pub diagram: Diagram,
    pub ordering: Ordering,
    /// `min_g fr(g, b)` for each block of the (cyclic) schedule.
    pub min_frequencies: Vec<BigRational>,
    pub verdict: Verdict,
}

/// Level `n` uses block `blocks[(n-1) % len]`: vertex `g` of `V_{n+1}` reads
/// the towers `g + b_0, g + b_1, ...` of `V_n` in order, so
/// `f_{g,h}` counts the letters `b_i = h - g`.
pub fn morse_diagram(k: usize, blocks: &[Vec<usize>]) -> Result<MorseDiagram> {
    if k < 2 {
        return Err(Error::invalid("group order must be at least 2"));
    }
    if blocks.is_empty() {
        return Err(Error::invalid("at least one block is required"));
    }
    let mut matrices = Vec::with_capacity(blocks.len());
    let mut levels = Vec::with_capacity(blocks.len());
    let mut min_frequencies = Vec::with_capacity(blocks.len());
    for (i, b) in blocks.iter().enumerate() {
        if b.len() < 2 {
            return Err(Error::BlockTooShort {
                block: i,
                len: b.len(),
            });
        }
        if let Some(&bad) = b.iter().find(|&&x| x >= k) {
            return Err(Error::invalid(format!(
                "block {i} has letter {bad} outside Z/{k}Z"
            )));
        }
        if b[0] != 0 {
            return Err(Error::BlockStart { block: i });
        }
        let mut counts = vec![0u64; k];
        for &x in b {
            counts[x] += 1;
        }
        if let Some(symbol) = counts.iter().position(|&c| c == 0) {
            return Err(Error::BlockMissingSymbol { block: i, symbol });
        }
        let rows: Vec<Vec<u64>> = (0..k)
            .map(|g| (0..k).map(|h| counts[(h + k - g) % k]).collect())
            .collect();
        matrices.push(IntMatrix::from_rows(&rows)?);
        levels.push(
            (0..k)
                .map(|g| b.iter().map(|&x| (x + g) % k).collect())
                .collect(),
        );
        let min = *counts.iter().min().expect("k >= 2");
        min_frequencies.push(BigRational::new(BigInt::from(min), BigInt::from(b.len())));
    }
    let generator = if matrices.len() == 1 {
        IncidenceGenerator::stationary(matrices.pop().expect("one matrix"))
    } else {
        IncidenceGenerator::periodic(matrices)
    };
    let diagram = Diagram::new(k, generator)?;
    // Every block contains every letter, so each term of the periodic series
    // is at least 1/|b| and the sum diverges.
    let smallest = min_frequencies.iter().min().expect("nonempty").clone();
    let verdict = Verdict::new(Claim::UniqueErgodicity, Evidence::CertifiedYes).note(
        "morse-frequency-divergence",
        format!("periodic blocks with min_g fr(g, b) >= {smallest}; the series diverges"),
    );
    Ok(MorseDiagram {
        diagram,
        ordering: Ordering::Explicit {
            levels,
            tail: OrderTail::Cycle,
        },
        min_frequencies,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_and_skewed() {
        let m = morse_diagram(2, &[vec![0, 1]]).unwrap();
        assert_eq!(
            m.diagram.incidence(3).unwrap(),
            IntMatrix::from_u64(&[&[1, 1], &[1, 1]])
        );
        let m = morse_diagram(2, &[vec![0, 1, 1]]).unwrap();
        assert_eq!(
            m.diagram.incidence(1).unwrap(),
            IntMatrix::from_u64(&[&[1, 2], &[2, 1]])
        );
        assert_eq!(m.verdict.label(), "CertifiedUnique");
    }

    #[test]
    fn rows_sum_to_block_length() {
        let m = morse_diagram(3, &[vec![0, 1, 2, 2], vec![0, 2, 1]]).unwrap();
        for n in 1..5 {
            let f = m.diagram.incidence(n).unwrap();
            let len = if n % 2 == 1 { 4u32 } else { 3 };
            assert!(f.row_sums().iter().all(|s| *s == len.into()));
            assert!(m.ordering.level(&m.diagram, n).is_ok());
        }
    }

    #[test]
    fn block_errors() {
        assert!(matches!(
            morse_diagram(2, &[vec![0]]),
            Err(Error::BlockTooShort { block: 0, len: 1 })
        ));
        assert!(matches!(
            morse_diagram(2, &[vec![1, 0]]),
            Err(Error::BlockStart { block: 0 })
        ));
        assert!(matches!(
            morse_diagram(3, &[vec![0, 1, 1]]),
            Err(Error::BlockMissingSymbol {
                block: 0,
                symbol: 2
            })
        ));
    }
}
