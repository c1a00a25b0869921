//! Finite-rank diagrams and exact level computations.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generator::{GeneratorKind, IncidenceGenerator, Tail};
use crate::matrix::{big_to_rat, IntMatrix};

/// Default cap on the bit size of any single matrix or height entry.
pub const DEFAULT_BIT_CAP: u64 = 1 << 20;

/// A rank-`d` diagram. The top connection `F_0` is all-ones, so `h^(1) = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagram {
    rank: usize,
    generator: IncidenceGenerator,
    labels: Option<Vec<String>>,
    bit_cap: u64,
}

/// Row-stochastic matrix `q^(n)_{v,w} = f^(n)_{v,w} h^(n)_w / h^(n+1)_v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StochasticMatrix {
    pub level: usize,
    pub entries: Vec<Vec<BigRational>>,
}

impl Diagram {
    pub fn new(rank: usize, generator: IncidenceGenerator) -> Result<Self> {
        if rank == 0 {
            return Err(Error::invalid("rank must be positive"));
        }
        check_generator(rank, &generator)?;
        Ok(Diagram {
            rank,
            generator,
            labels: None,
            bit_cap: DEFAULT_BIT_CAP,
        })
    }

    pub fn stationary(m: IntMatrix) -> Result<Self> {
        Diagram::new(m.rows(), IncidenceGenerator::stationary(m))
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn generator(&self) -> &IncidenceGenerator {
        &self.generator
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.rank {
            return Err(Error::RankMismatch {
                field: "labels".into(),
                rank: self.rank,
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn bit_cap(&self) -> u64 {
        self.bit_cap
    }

    pub fn with_bit_cap(mut self, cap: u64) -> Self {
        self.bit_cap = cap;
        self
    }

    /// Name of vertex `v`: its label when present, else its index.
    pub fn vertex_name(&self, v: usize) -> String {
        match &self.labels {
            Some(l) => l[v].clone(),
            None => v.to_string(),
        }
    }

    /// Resolve a vertex given by label or by index.
    pub fn vertex_by_name(&self, name: &str) -> Result<usize> {
        if let Some(labels) = &self.labels {
            if let Some(i) = labels.iter().position(|l| l == name) {
                return Ok(i);
            }
        }
        match name.parse::<usize>() {
            Ok(i) if i < self.rank => Ok(i),
            _ => Err(Error::invalid(format!("unknown vertex {name:?}"))),
        }
    }

    /// `F_n` for `n >= 1`, checked for shape and zero rows.
    pub fn incidence(&self, n: usize) -> Result<IntMatrix> {
        let m = self.generator.eval(n)?;
        if m.rows() != self.rank || m.cols() != self.rank {
            return Err(Error::DimensionMismatch {
                expected: self.rank,
                found: if m.rows() != self.rank {
                    m.rows()
                } else {
                    m.cols()
                },
                context: format!("incidence matrix at level {n}"),
            });
        }
        if let Some(row) = m.zero_row() {
            return Err(Error::ZeroRow { level: n, row });
        }
        Ok(m)
    }

    /// `F_m, ..., F_n`, evaluated in parallel.
    pub fn incidences(&self, m: usize, n: usize) -> Result<Vec<IntMatrix>> {
        (m..=n).into_par_iter().map(|k| self.incidence(k)).collect()
    }

    /// `h^(n)`, with `h^(1)` all ones.
    pub fn heights(&self, n: usize) -> Result<Vec<BigUint>> {
        Ok(self.heights_upto(n)?.pop().expect("nonempty"))
    }

    /// `h^(1), ..., h^(n)`.
    pub fn heights_upto(&self, n: usize) -> Result<Vec<Vec<BigUint>>> {
        if n == 0 {
            return Err(Error::LevelOutOfRange { level: 0 });
        }
        let mut out = Vec::with_capacity(n);
        out.push(vec![BigUint::one(); self.rank]);
        for k in 1..n {
            let f = self.incidence(k)?;
            let next = f.mul_vec(&out[k - 1]);
            let bits = next.iter().map(|x| x.bits()).max().unwrap_or(0);
            if bits > self.bit_cap {
                return Err(Error::MemoryBudgetExceeded {
                    bits,
                    cap: self.bit_cap,
                });
            }
            out.push(next);
        }
        Ok(out)
    }

    pub fn stochastic(&self, n: usize) -> Result<StochasticMatrix> {
        let f = self.incidence(n)?;
        let h = self.heights(n)?;
        Ok(stochastic_from(n, &f, &h))
    }

    /// `F_n ... F_m`, or `F_m^T ... F_n^T` when `transposed`. An empty range
    /// (`m == n + 1`) gives the identity.
    pub fn range_product(&self, m: usize, n: usize, transposed: bool) -> Result<IntMatrix> {
        if m == 0 || m > n + 1 {
            return Err(Error::invalid(format!("invalid level range {m}..={n}")));
        }
        let mut acc = IntMatrix::identity(self.rank);
        for k in m..=n {
            acc = self.incidence(k)?.mul(&acc);
            acc.check_bits(self.bit_cap)?;
        }
        Ok(if transposed { acc.transpose() } else { acc })
    }

    /// Collapse levels between consecutive cuts. Cuts must start at level 1
    /// since the top connection is fixed.
    pub fn telescope(&self, cuts: &[usize]) -> Result<Diagram> {
        if cuts.first() != Some(&1) {
            return Err(Error::InvalidCuts("cuts must start at level 1".into()));
        }
        if cuts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidCuts(
                "cuts must be strictly increasing".into(),
            ));
        }
        let prefix: Vec<IntMatrix> = cuts
            .windows(2)
            .map(|w| self.range_product(w[0], w[1] - 1, false))
            .collect::<Result<_>>()?;
        let step = match cuts {
            [a, b, rest @ ..] => {
                let s = b - a;
                let mut prev = *b;
                let mut ok = true;
                for &c in rest {
                    ok &= c - prev == s;
                    prev = c;
                }
                ok.then_some(s)
            }
            _ => None,
        };
        let last = *cuts.last().expect("nonempty");
        let kind = match (&self.generator.kind, step) {
            (GeneratorKind::Stationary(a), Some(s)) => GeneratorKind::Stationary(a.pow(s as u64)),
            (GeneratorKind::Periodic(list), Some(s)) if self.generator.start_level == 1 => {
                let period = list.len() / list.len().gcd(&s);
                let mats = (0..period)
                    .map(|j| self.range_product(1 + j * s, (j + 1) * s, false))
                    .collect::<Result<_>>()?;
                GeneratorKind::Periodic(mats)
            }
            (
                GeneratorKind::Explicit {
                    matrices,
                    tail: Tail::Stop,
                },
                _,
            ) if last <= matrices.len() + 1 => GeneratorKind::Explicit {
                matrices: prefix,
                tail: Tail::Stop,
            },
            (_, Some(s)) => GeneratorKind::Explicit {
                matrices: prefix,
                tail: Tail::Telescoped {
                    base: Box::new(self.generator.clone()),
                    from: last,
                    step: s,
                },
            },
            (_, None) => {
                return Err(Error::UnboundedTail(
                    "cuts are not an arithmetic progression".into(),
                ))
            }
        };
        Ok(Diagram {
            rank: self.rank,
            generator: IncidenceGenerator::new(kind),
            labels: self.labels.clone(),
            bit_cap: self.bit_cap,
        })
    }

    /// Relabel vertices so that new vertex `k` is old vertex `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Diagram> {
        let mut seen = vec![false; self.rank];
        if perm.len() != self.rank
            || perm
                .iter()
                .any(|&p| p >= self.rank || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::invalid("not a permutation of the vertices"));
        }
        Ok(Diagram {
            rank: self.rank,
            generator: self.generator.permuted(perm),
            labels: self
                .labels
                .as_ref()
                .map(|l| perm.iter().map(|&p| l[p].clone()).collect()),
            bit_cap: self.bit_cap,
        })
    }

    /// Whether evaluation fails past some level (finite explicit lists).
    pub fn max_level(&self) -> Option<usize> {
        let shift = self.generator.start_level - 1;
        match &self.generator.kind {
            GeneratorKind::Explicit {
                matrices,
                tail: Tail::Stop,
            } => Some(matrices.len().saturating_sub(shift)),
            GeneratorKind::SymbolSequence { omega, .. } if omega.is_finite() => {
                Some(omega.prefix(usize::MAX).len().saturating_sub(shift))
            }
            _ => None,
        }
    }
}

pub(crate) fn stochastic_from(level: usize, f: &IntMatrix, h: &[BigUint]) -> StochasticMatrix {
    let next = f.mul_vec(h);
    let entries = (0..f.rows())
        .map(|v| {
            (0..f.cols())
                .map(|w| {
                    let num = f.get(v, w) * &h[w];
                    if num.is_zero() {
                        BigRational::zero()
                    } else {
                        big_to_rat(&num) / big_to_rat(&next[v])
                    }
                })
                .collect()
        })
        .collect();
    StochasticMatrix { level, entries }
}

fn check_matrix(rank: usize, m: &IntMatrix, what: &str) -> Result<()> {
    if m.rows() != rank || m.cols() != rank {
        return Err(Error::RankMismatch {
            field: what.into(),
            rank,
            found: if m.rows() != rank { m.rows() } else { m.cols() },
        });
    }
    if let Some(row) = m.zero_row() {
        return Err(Error::ZeroRow { level: 0, row });
    }
    Ok(())
}

fn check_generator(rank: usize, g: &IncidenceGenerator) -> Result<()> {
    if g.start_level == 0 {
        return Err(Error::invalid("start_level must be positive"));
    }
    match &g.kind {
        GeneratorKind::Stationary(m) => check_matrix(rank, m, "stationary matrix"),
        GeneratorKind::Periodic(list) => {
            if list.is_empty() {
                return Err(Error::invalid("periodic list is empty"));
            }
            list.iter()
                .try_for_each(|m| check_matrix(rank, m, "periodic matrix"))
        }
        GeneratorKind::SymbolSequence { alphabet, omega } => {
            if alphabet.is_empty() {
                return Err(Error::EmptyAlphabet);
            }
            alphabet
                .iter()
                .try_for_each(|m| check_matrix(rank, m, "alphabet matrix"))?;
            omega.validate(alphabet.len())
        }
        GeneratorKind::Explicit { matrices, tail } => {
            matrices
                .iter()
                .try_for_each(|m| check_matrix(rank, m, "explicit matrix"))?;
            match tail {
                Tail::RepeatLast | Tail::Cycle if matrices.is_empty() => {
                    Err(Error::invalid("explicit list is empty"))
                }
                Tail::Restricted { schedule, .. } => {
                    if schedule.width() != rank {
                        return Err(Error::RankMismatch {
                            field: "restricted schedule".into(),
                            rank,
                            found: schedule.width(),
                        });
                    }
                    Ok(())
                }
                _ => Ok(()),
            }
        }
        GeneratorKind::Parametric(grid) => {
            if grid.len() != rank {
                return Err(Error::RankMismatch {
                    field: "parametric rows".into(),
                    rank,
                    found: grid.len(),
                });
            }
            for (i, row) in grid.iter().enumerate() {
                if row.len() != rank {
                    return Err(Error::RankMismatch {
                        field: format!("parametric row {i}"),
                        rank,
                        found: row.len(),
                    });
                }
                if row.iter().all(|p| p.is_zero()) {
                    return Err(Error::ZeroRow { level: 0, row: i });
                }
            }
            Ok(())
        }
    }
}
