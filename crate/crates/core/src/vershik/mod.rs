//! Ordered diagrams: reading morphisms, the Vershik successor, S-adic words
//! and the generalized Morse construction.

mod morse;
mod words;

pub use morse::{morse_diagram, MorseDiagram};
pub use words::{
    correlation_report, default_q_grid, expand_word, frequency_report, parse_word, render_word,
    symbol_char, CorrelationReport, CorrelationRow, FactorCount, FrequencyReport, Word, WordIter,
    DEFAULT_FACTOR_CAP,
};

use crate::diagram::Diagram;
use crate::error::{Error, Result};
use crate::matrix::IntMatrix;

/// How explicit per-level orders continue past the listed levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderTail {
    RepeatLast,
    Cycle,
}

/// Linear orders on incoming edges. The sequence for matrix level `k` and
/// vertex `v` lists the source (in `V_k`) of each edge into `v` in `V_{k+1}`,
/// smallest edge first; its multiset is row `v` of `F_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ordering {
    /// Sources grouped in ascending vertex order.
    Consecutive,
    Explicit {
        /// `levels[k-1][v]` is the sequence at matrix level `k`.
        levels: Vec<Vec<Vec<usize>>>,
        tail: OrderTail,
    },
}

fn consecutive_row(f: &IntMatrix, v: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for (w, m) in f.row(v).iter().enumerate() {
        let m: usize = m.try_into().unwrap_or(usize::MAX);
        out.extend(std::iter::repeat_n(w, m));
    }
    out
}

/// Equal entries appear in one contiguous run.
pub fn is_consecutive_sequence(seq: &[usize]) -> bool {
    let mut seen = std::collections::HashSet::new();
    let mut prev = None;
    for &s in seq {
        if prev != Some(s) {
            if !seen.insert(s) {
                return false;
            }
            prev = Some(s);
        }
    }
    true
}

impl Ordering {
    fn raw_level(&self, k: usize) -> Option<&Vec<Vec<usize>>> {
        match self {
            Ordering::Consecutive => None,
            Ordering::Explicit { levels, tail } => {
                let len = levels.len();
                let idx = if k <= len {
                    k - 1
                } else {
                    match tail {
                        OrderTail::RepeatLast => len - 1,
                        OrderTail::Cycle => (k - 1) % len,
                    }
                };
                Some(&levels[idx])
            }
        }
    }

    /// The validated sequences at matrix level `k`, one per vertex of `V_{k+1}`.
    pub fn level(&self, diagram: &Diagram, k: usize) -> Result<Vec<Vec<usize>>> {
        if k == 0 {
            return Err(Error::LevelOutOfRange { level: 0 });
        }
        let f = diagram.incidence(k)?;
        let d = diagram.rank();
        match self.raw_level(k) {
            None => Ok((0..d).map(|v| consecutive_row(&f, v)).collect()),
            Some(level) => {
                if level.len() != d {
                    return Err(Error::RankMismatch {
                        field: format!("ordering level {k}"),
                        rank: d,
                        found: level.len(),
                    });
                }
                for (v, seq) in level.iter().enumerate() {
                    let mut counts = vec![0u64; d];
                    for &s in seq {
                        if s >= d {
                            return Err(Error::OrderMultisetMismatch {
                                level: k,
                                vertex: v,
                            });
                        }
                        counts[s] += 1;
                    }
                    let matches = f.row(v).iter().zip(&counts).all(|(m, &c)| *m == c.into());
                    if !matches {
                        return Err(Error::OrderMultisetMismatch {
                            level: k,
                            vertex: v,
                        });
                    }
                }
                Ok(level.clone())
            }
        }
    }

    /// Sequences for matrix levels `1..=k`.
    pub fn levels(&self, diagram: &Diagram, k: usize) -> Result<Vec<Vec<Vec<usize>>>> {
        (1..=k).map(|j| self.level(diagram, j)).collect()
    }

    /// Whether equal sources are contiguous in every sequence of matrix
    /// levels `1..=k`.
    pub fn is_consecutive(&self, diagram: &Diagram, k: usize) -> Result<bool> {
        Ok(self
            .levels(diagram, k)?
            .iter()
            .all(|level| level.iter().all(|s| is_consecutive_sequence(s))))
    }
}

/// `sigma_n`: vertex `v` of `V_n` to its word over `V_{n-1}`, for `n >= 2`.
pub fn reading_morphism(diagram: &Diagram, order: &Ordering, n: usize) -> Result<Vec<Vec<usize>>> {
    if n < 2 {
        return Err(Error::LevelOutOfRange { level: n });
    }
    order.level(diagram, n - 1)
}

/// `sigma^(m,n) = sigma_{m+1} o ... o sigma_n`: the telescoped order of
/// paths from `V_m` into each vertex of `V_n`, compared lexicographically
/// from the top.
pub fn composed_morphism(
    diagram: &Diagram,
    order: &Ordering,
    m: usize,
    n: usize,
) -> Result<Vec<Vec<usize>>> {
    if m == 0 || m > n {
        return Err(Error::invalid(format!("invalid level range {m}..{n}")));
    }
    let d = diagram.rank();
    let mut out: Vec<Vec<usize>> = (0..d).map(|v| vec![v]).collect();
    for k in (m..n).rev() {
        let level = order.level(diagram, k)?;
        out = out
            .into_iter()
            .map(|word| {
                word.iter()
                    .flat_map(|&u| level[u].iter().copied())
                    .collect()
            })
            .collect();
    }
    Ok(out)
}

/// A path from `V_1` up to vertex `vertex` of `V_depth`. `indices[k-1]` is the
/// position, in the order at matrix level `k`, of the edge from `V_k` into
/// `V_{k+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinitePath {
    pub vertex: usize,
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Successor {
    Next(FinitePath),
    /// Every edge is maximal; the truncated map stops here.
    MaximalSignal,
}

impl FinitePath {
    pub fn depth(&self) -> usize {
        self.indices.len() + 1
    }

    /// Vertices on levels `1..=depth`.
    pub fn vertices(&self, levels: &[Vec<Vec<usize>>]) -> Result<Vec<usize>> {
        let n = self.depth();
        let mut out = vec![0; n];
        out[n - 1] = self.vertex;
        for k in (1..n).rev() {
            let seq = &levels[k - 1][out[k]];
            out[k - 1] = *seq
                .get(self.indices[k - 1])
                .ok_or_else(|| Error::invalid(format!("edge index out of range at level {k}")))?;
        }
        Ok(out)
    }

    /// Path with every index 0.
    pub fn minimal(vertex: usize, depth: usize) -> Self {
        FinitePath {
            vertex,
            indices: vec![0; depth.saturating_sub(1)],
        }
    }

    pub fn maximal(levels: &[Vec<Vec<usize>>], vertex: usize, depth: usize) -> Self {
        let mut indices = vec![0; depth - 1];
        let mut v = vertex;
        for k in (1..depth).rev() {
            let seq = &levels[k - 1][v];
            indices[k - 1] = seq.len() - 1;
            v = seq[seq.len() - 1];
        }
        FinitePath { vertex, indices }
    }
}

/// Vershik successor with the levels already resolved.
pub fn successor_in(levels: &[Vec<Vec<usize>>], path: &FinitePath) -> Result<Successor> {
    let verts = path.vertices(levels)?;
    let Some(k) =
        (0..path.indices.len()).find(|&k| path.indices[k] + 1 < levels[k][verts[k + 1]].len())
    else {
        return Ok(Successor::MaximalSignal);
    };
    let mut indices = path.indices.clone();
    indices[k] += 1;
    let mut v = levels[k][verts[k + 1]][indices[k]];
    for j in (0..k).rev() {
        indices[j] = 0;
        v = levels[j][v][0];
    }
    Ok(Successor::Next(FinitePath {
        vertex: path.vertex,
        indices,
    }))
}

/// Increment the lowest non-maximal edge and reset the edges below it to the
/// minimal path into the new source.
pub fn vershik_successor(
    diagram: &Diagram,
    order: &Ordering,
    path: &FinitePath,
) -> Result<Successor> {
    if path.vertex >= diagram.rank() {
        return Err(Error::invalid(format!(
            "vertex {} out of range",
            path.vertex
        )));
    }
    let levels = order.levels(diagram, path.indices.len())?;
    successor_in(&levels, path)
}
