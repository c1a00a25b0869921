//! Canonical block-triangular form and minimal components.
//!
//! The support pattern of `F_n` is stabilized (eventually periodic with some
//! period `p` from level `n0`), multiplied over one period, and raised to its
//! idempotent boolean power `E`. The strongly connected components of `E`
//! are the blocks; sources of the condensation are the minimal components.

use std::collections::BTreeSet;

use crate::diagram::Diagram;
use crate::error::{Error, Result};
use crate::generator::{GeneratorKind, SymbolStream, Tail};
use crate::matrix::BoolMatrix;

pub const DEFAULT_PROBE_DEPTH: usize = 64;
pub const STABILITY_WINDOW: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockKind {
    MinimalSimple,
    NonMinimalSimple,
    EventuallyZero,
}

impl BlockKind {
    pub fn name(self) -> &'static str {
        match self {
            BlockKind::MinimalSimple => "MinimalSimple",
            BlockKind::NonMinimalSimple => "NonMinimalSimple",
            BlockKind::EventuallyZero => "EventuallyZero",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockForm {
    /// `permutation[new] = old`.
    pub permutation: Vec<usize>,
    /// Blocks as sets of original vertex indices, each sorted ascending, in
    /// canonical order.
    pub blocks: Vec<Vec<usize>>,
    pub kinds: Vec<BlockKind>,
    /// First level from which the support pattern is periodic.
    pub stabilization_level: usize,
    /// Period of the support pattern.
    pub period: usize,
    /// Number of levels to telescope (starting at the stabilization level)
    /// so that diagonal blocks of minimal components become positive.
    pub telescoping_step: usize,
    /// Whether every individual `F_n` with `n >= n0` is block-triangular,
    /// not only the telescoped products.
    pub levelwise: bool,
}

impl BlockForm {
    pub fn minimal_components(&self) -> Vec<Vec<usize>> {
        self.blocks
            .iter()
            .zip(&self.kinds)
            .filter(|(_, k)| **k == BlockKind::MinimalSimple)
            .map(|(b, _)| b.clone())
            .collect()
    }

    /// Index ranges of the blocks in the permuted vertex order.
    pub fn block_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.blocks
            .iter()
            .map(|b| {
                let r = start..start + b.len();
                start += b.len();
                r
            })
            .collect()
    }

    /// A single minimal block covering every vertex.
    pub fn is_simple(&self) -> bool {
        self.blocks.len() == 1 && self.kinds[0] == BlockKind::MinimalSimple
    }

    pub fn is_identity(&self) -> bool {
        self.permutation.iter().enumerate().all(|(i, &p)| i == p)
    }

    /// Whether a support pattern, given in the original vertex order, has
    /// zeros in every above-diagonal block position.
    pub fn is_block_triangular(&self, support: &BoolMatrix) -> bool {
        let block_of = self.block_index();
        (0..support.rows())
            .all(|v| (0..support.cols()).all(|w| !support.get(v, w) || block_of[w] <= block_of[v]))
    }

    fn block_index(&self) -> Vec<usize> {
        let d = self.permutation.len();
        let mut out = vec![0; d];
        for (i, b) in self.blocks.iter().enumerate() {
            for &v in b {
                out[v] = i;
            }
        }
        out
    }
}

/// Stabilized support data: period supports starting at `n0`.
#[derive(Debug, Clone)]
pub(crate) struct Support {
    pub n0: usize,
    pub period: Vec<BoolMatrix>,
    /// Levels that were actually inspected, for the levelwise check.
    pub probed: Vec<BoolMatrix>,
}

fn symbolic_period(diagram: &Diagram) -> Option<(usize, usize)> {
    let g = diagram.generator();
    let shift = g.start_level - 1;
    let from_raw = |raw0: usize| raw0.saturating_sub(shift).max(1);
    match &g.kind {
        GeneratorKind::Stationary(_) | GeneratorKind::Parametric(_) => Some((1, 1)),
        GeneratorKind::Periodic(list) => Some((1, list.len())),
        GeneratorKind::SymbolSequence {
            omega: SymbolStream::Periodic { prefix, cycle },
            ..
        } if !cycle.is_empty() => Some((from_raw(prefix.len() + 1), cycle.len())),
        GeneratorKind::Explicit { matrices, tail } => match tail {
            Tail::RepeatLast => Some((from_raw(matrices.len()), 1)),
            Tail::Cycle if shift == 0 => Some((1, matrices.len())),
            _ => None,
        },
        _ => None,
    }
}

pub(crate) fn stabilized_support(diagram: &Diagram, probe_depth: usize) -> Result<Support> {
    let supp = |n: usize| diagram.incidence(n).map(|m| m.support());
    if let Some((n0, p)) = symbolic_period(diagram) {
        let period: Vec<BoolMatrix> = (n0..n0 + p).map(supp).collect::<Result<_>>()?;
        return Ok(Support {
            n0,
            probed: period.clone(),
            period,
        });
    }
    let g = diagram.generator();
    if let GeneratorKind::SymbolSequence {
        alphabet,
        omega: omega @ SymbolStream::Substitution { .. },
    } = &g.kind
    {
        // Not eventually periodic in general: union the supports of the
        // letters that occur.
        let letters: BTreeSet<usize> = omega
            .prefix(probe_depth.max(alphabet.len() * 4) + g.start_level)
            .into_iter()
            .collect();
        let mut u = BoolMatrix::zeros(diagram.rank(), diagram.rank());
        for &l in &letters {
            u = u.union(&alphabet[l].support());
        }
        return Ok(Support {
            n0: 1,
            period: vec![u.clone()],
            probed: vec![u],
        });
    }
    let depth = match diagram.max_level() {
        Some(m) => probe_depth.min(m),
        None => probe_depth,
    };
    let probed: Vec<BoolMatrix> = (1..=depth).map(supp).collect::<Result<_>>()?;
    for p in 1..=STABILITY_WINDOW {
        if probed.len() < p + STABILITY_WINDOW {
            break;
        }
        // Last index (0-based) where the pattern breaks period p.
        let last_break = (0..probed.len() - p)
            .rev()
            .find(|&i| probed[i] != probed[i + p]);
        let n0 = last_break.map_or(1, |i| i + 2);
        if probed.len() + 1 >= n0 + p + STABILITY_WINDOW {
            return Ok(Support {
                n0,
                period: probed[n0 - 1..n0 - 1 + p].to_vec(),
                probed: probed[n0 - 1..].to_vec(),
            });
        }
    }
    if diagram.max_level().is_some() && !probed.is_empty() {
        let u = probed
            .iter()
            .skip(1)
            .fold(probed[0].clone(), |a, b| a.union(b));
        return Ok(Support {
            n0: 1,
            period: vec![u],
            probed,
        });
    }
    Err(Error::SupportUnstable { probe_depth })
}

/// Smallest `k >= 1` with `B^k` idempotent, and that power.
pub(crate) fn idempotent_power(b: &BoolMatrix) -> (usize, BoolMatrix) {
    let mut powers = vec![b.clone()];
    loop {
        let next = powers.last().expect("nonempty").mul(b);
        if let Some(i) = powers.iter().position(|m| *m == next) {
            // powers[j] = B^{j+1}; B^{i+1} = B^{len+1}: preperiod i+1, period len - i.
            let start = i + 1;
            let period = powers.len() - i;
            let k = start.div_ceil(period) * period;
            return (k, powers[k - 1].clone());
        }
        powers.push(next);
    }
}

/// Strongly connected components of a transitive relation (`e[v][w]` means
/// an edge `w -> v`).
fn components(e: &BoolMatrix) -> Vec<Vec<usize>> {
    let d = e.rows();
    let mut assigned = vec![false; d];
    let mut out = Vec::new();
    for v in 0..d {
        if assigned[v] {
            continue;
        }
        let mut comp = vec![v];
        assigned[v] = true;
        for w in v + 1..d {
            if !assigned[w] && e.get(v, w) && e.get(w, v) {
                comp.push(w);
                assigned[w] = true;
            }
        }
        out.push(comp);
    }
    out
}

pub fn canonical_form(diagram: &Diagram, probe_depth: usize) -> Result<BlockForm> {
    let support = stabilized_support(diagram, probe_depth)?;
    let d = diagram.rank();
    let mut b = BoolMatrix::identity(d);
    for s in &support.period {
        b = s.mul(&b);
    }
    let (k, e) = idempotent_power(&b);
    let comps = components(&e);
    let comp_of = {
        let mut out = vec![0; d];
        for (i, c) in comps.iter().enumerate() {
            for &v in c {
                out[v] = i;
            }
        }
        out
    };
    // Condensation edges: from comp_of[w] to comp_of[v] whenever e[v][w].
    let nc = comps.len();
    let mut preds: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nc];
    for v in 0..d {
        for w in 0..d {
            if e.get(v, w) && comp_of[v] != comp_of[w] {
                preds[comp_of[v]].insert(comp_of[w]);
            }
        }
    }
    // Longest path from a source; the condensation of a transitive relation
    // is itself transitively closed, so rank = longest chain of predecessors.
    let mut rank = vec![usize::MAX; nc];
    fn depth(c: usize, preds: &[BTreeSet<usize>], rank: &mut [usize]) -> usize {
        if rank[c] != usize::MAX {
            return rank[c];
        }
        let r = preds[c]
            .iter()
            .map(|&p| depth(p, preds, rank) + 1)
            .max()
            .unwrap_or(0);
        rank[c] = r;
        r
    }
    for c in 0..nc {
        depth(c, &preds, &mut rank);
    }
    let mut order: Vec<usize> = (0..nc).collect();
    order.sort_by_key(|&c| (rank[c], comps[c][0]));
    let blocks: Vec<Vec<usize>> = order.iter().map(|&c| comps[c].clone()).collect();
    let kinds = order
        .iter()
        .map(|&c| {
            let comp = &comps[c];
            if comp.len() == 1 && !e.get(comp[0], comp[0]) {
                BlockKind::EventuallyZero
            } else if preds[c].is_empty() {
                BlockKind::MinimalSimple
            } else {
                BlockKind::NonMinimalSimple
            }
        })
        .collect();
    let permutation: Vec<usize> = blocks.iter().flatten().copied().collect();
    let mut form = BlockForm {
        permutation,
        blocks,
        kinds,
        stabilization_level: support.n0,
        period: support.period.len(),
        telescoping_step: support.period.len() * k,
        levelwise: false,
    };
    form.levelwise = support.probed.iter().all(|s| form.is_block_triangular(s));
    Ok(form)
}

pub fn minimal_components(diagram: &Diagram, probe_depth: usize) -> Result<Vec<Vec<usize>>> {
    Ok(canonical_form(diagram, probe_depth)?.minimal_components())
}

/// The diagram relabelled into canonical order.
pub fn canonical_diagram(diagram: &Diagram, form: &BlockForm) -> Result<Diagram> {
    diagram.permuted(&form.permutation)
}
