//! Rules producing the incidence matrix `F_n` for every level `n >= 1`.

use crate::error::{Error, Result};
use crate::matrix::IntMatrix;
use crate::poly::Poly;

/// A sequence of alphabet indices `ω_1 ω_2 ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymbolStream {
    /// `prefix` followed by `cycle` repeated forever. An empty cycle makes the
    /// sequence finite.
    Periodic {
        prefix: Vec<usize>,
        cycle: Vec<usize>,
    },
    /// Fixed point of a substitution starting with `start`. `images[start]`
    /// must begin with `start` and have length at least 2.
    Substitution {
        images: Vec<Vec<usize>>,
        start: usize,
    },
}

impl SymbolStream {
    pub fn periodic(prefix: Vec<usize>, cycle: Vec<usize>) -> Self {
        SymbolStream::Periodic { prefix, cycle }
    }

    pub fn constant(letter: usize) -> Self {
        SymbolStream::Periodic {
            prefix: Vec::new(),
            cycle: vec![letter],
        }
    }

    pub fn validate(&self, alphabet_len: usize) -> Result<()> {
        let check = |s: usize| {
            if s >= alphabet_len {
                Err(Error::invalid(format!(
                    "symbol {s} outside an alphabet of size {alphabet_len}"
                )))
            } else {
                Ok(())
            }
        };
        match self {
            SymbolStream::Periodic { prefix, cycle } => {
                if prefix.is_empty() && cycle.is_empty() {
                    return Err(Error::invalid("empty symbol sequence"));
                }
                prefix.iter().chain(cycle).try_for_each(|&s| check(s))
            }
            SymbolStream::Substitution { images, start } => {
                if images.len() != alphabet_len {
                    return Err(Error::DimensionMismatch {
                        expected: alphabet_len,
                        found: images.len(),
                        context: "substitution images".into(),
                    });
                }
                check(*start)?;
                for img in images {
                    if img.is_empty() {
                        return Err(Error::invalid("substitution image is empty"));
                    }
                    img.iter().try_for_each(|&s| check(s))?;
                }
                let first = &images[*start];
                if first[0] != *start || first.len() < 2 {
                    return Err(Error::invalid(
                        "substitution image of the start letter must begin with it and have length >= 2",
                    ));
                }
                Ok(())
            }
        }
    }

    /// Symbol at 0-based position `i`, `None` past the end of a finite sequence.
    pub fn symbol(&self, i: usize) -> Option<usize> {
        match self {
            SymbolStream::Periodic { prefix, cycle } => {
                if i < prefix.len() {
                    Some(prefix[i])
                } else if cycle.is_empty() {
                    None
                } else {
                    Some(cycle[(i - prefix.len()) % cycle.len()])
                }
            }
            SymbolStream::Substitution { images, start } => {
                // Lengths of sigma^k(b) until sigma^k(start) covers position i.
                let mut lens: Vec<Vec<u128>> = vec![vec![1; images.len()]];
                while lens.last().unwrap()[*start] <= i as u128 {
                    let prev = lens.last().unwrap();
                    let next = images
                        .iter()
                        .map(|img| img.iter().map(|&b| prev[b]).sum::<u128>())
                        .collect();
                    lens.push(next);
                }
                let mut letter = *start;
                let mut pos = i as u128;
                for k in (0..lens.len() - 1).rev() {
                    for &b in &images[letter] {
                        if pos < lens[k][b] {
                            letter = b;
                            break;
                        }
                        pos -= lens[k][b];
                    }
                }
                Some(letter)
            }
        }
    }

    pub fn prefix(&self, len: usize) -> Vec<usize> {
        (0..len).map_while(|i| self.symbol(i)).collect()
    }

    pub fn is_eventually_periodic(&self) -> bool {
        matches!(self, SymbolStream::Periodic { .. })
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, SymbolStream::Periodic { cycle, .. } if cycle.is_empty())
    }
}

/// Vertex subsets `W_n`, one per level: `prefix` then `cycle` repeated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSchedule {
    pub prefix: Vec<Vec<usize>>,
    pub cycle: Vec<Vec<usize>>,
}

impl VertexSchedule {
    pub fn constant(vertices: Vec<usize>) -> Self {
        VertexSchedule {
            prefix: Vec::new(),
            cycle: vec![vertices],
        }
    }

    /// One vertex per level, e.g. an odometer path.
    pub fn path(prefix: Vec<usize>, cycle: Vec<usize>) -> Self {
        VertexSchedule {
            prefix: prefix.into_iter().map(|v| vec![v]).collect(),
            cycle: cycle.into_iter().map(|v| vec![v]).collect(),
        }
    }

    /// `W_n` for level `n >= 1`.
    pub fn at(&self, n: usize) -> &[usize] {
        let i = n - 1;
        if i < self.prefix.len() {
            &self.prefix[i]
        } else {
            &self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    pub fn is_constant(&self) -> Option<&[usize]> {
        let first = self.at(1);
        let all_same = self.prefix.iter().chain(&self.cycle).all(|w| w == first);
        all_same.then_some(first)
    }

    pub fn width(&self) -> usize {
        self.at(1).len()
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.cycle.is_empty() {
            return Err(Error::invalid("vertex schedule needs a nonempty cycle"));
        }
        let width = self.width();
        for w in self.prefix.iter().chain(&self.cycle) {
            if w.len() != width {
                return Err(Error::invalid(
                    "vertex schedule must keep the same number of vertices on every level",
                ));
            }
            let mut sorted = w.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != w.len() || sorted.iter().any(|&v| v >= d) {
                return Err(Error::invalid(
                    "vertex schedule has repeated or out-of-range vertices",
                ));
            }
        }
        Ok(())
    }

    fn reordered(&self, perm: &[usize]) -> VertexSchedule {
        let re = |w: &Vec<usize>| perm.iter().map(|&k| w[k]).collect::<Vec<_>>();
        VertexSchedule {
            prefix: self.prefix.iter().map(re).collect(),
            cycle: self.cycle.iter().map(re).collect(),
        }
    }
}

/// How an explicit list continues past its last matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tail {
    RepeatLast,
    Cycle,
    /// The diagram is only defined on the listed levels.
    Stop,
    /// Level `L + t` (L the list length) is the product of the base
    /// generator's matrices over levels `from + (t-1)*step .. from + t*step - 1`.
    Telescoped {
        base: Box<IncidenceGenerator>,
        from: usize,
        step: usize,
    },
    /// Level `n` is the `W_{n+1} x W_n` submatrix of the base generator's `F_n`.
    Restricted {
        base: Box<IncidenceGenerator>,
        schedule: VertexSchedule,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeneratorKind {
    Explicit {
        matrices: Vec<IntMatrix>,
        tail: Tail,
    },
    Stationary(IntMatrix),
    Periodic(Vec<IntMatrix>),
    SymbolSequence {
        alphabet: Vec<IntMatrix>,
        omega: SymbolStream,
    },
    /// Square grid of polynomials in the level variable.
    Parametric(Vec<Vec<Poly>>),
}

/// A generator together with the level its rule starts at. Diagram level `n`
/// evaluates the rule at `n + start_level - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceGenerator {
    pub kind: GeneratorKind,
    pub start_level: usize,
}

impl IncidenceGenerator {
    pub fn new(kind: GeneratorKind) -> Self {
        IncidenceGenerator {
            kind,
            start_level: 1,
        }
    }

    pub fn stationary(m: IntMatrix) -> Self {
        Self::new(GeneratorKind::Stationary(m))
    }

    pub fn periodic(list: Vec<IntMatrix>) -> Self {
        Self::new(GeneratorKind::Periodic(list))
    }

    pub fn explicit(matrices: Vec<IntMatrix>, tail: Tail) -> Self {
        Self::new(GeneratorKind::Explicit { matrices, tail })
    }

    pub fn symbol_sequence(alphabet: Vec<IntMatrix>, omega: SymbolStream) -> Self {
        Self::new(GeneratorKind::SymbolSequence { alphabet, omega })
    }

    pub fn parametric(grid: Vec<Vec<Poly>>) -> Self {
        Self::new(GeneratorKind::Parametric(grid))
    }

    /// Parse a parametric grid from expression strings.
    pub fn parametric_str(grid: &[&[&str]]) -> Result<Self> {
        let polys = grid
            .iter()
            .map(|row| {
                row.iter()
                    .map(|s| Poly::parse(s))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::parametric(polys))
    }

    pub fn with_start_level(mut self, start_level: usize) -> Self {
        self.start_level = start_level.max(1);
        self
    }

    /// Matrix at diagram level `n >= 1`, without structural validation.
    pub fn eval(&self, n: usize) -> Result<IntMatrix> {
        if n == 0 {
            return Err(Error::LevelOutOfRange { level: 0 });
        }
        self.kind.eval_raw(n + self.start_level - 1, n)
    }

    /// Every matrix the generator can produce, when that set is finite and
    /// known without evaluation.
    pub fn finite_alphabet(&self) -> Option<Vec<IntMatrix>> {
        let mut out: Vec<IntMatrix> = Vec::new();
        let mut push = |m: &IntMatrix| {
            if !out.contains(m) {
                out.push(m.clone());
            }
        };
        match &self.kind {
            GeneratorKind::Stationary(m) => push(m),
            GeneratorKind::Periodic(list) => list.iter().for_each(&mut push),
            GeneratorKind::SymbolSequence { alphabet, .. } => alphabet.iter().for_each(&mut push),
            GeneratorKind::Explicit { matrices, tail } => match tail {
                Tail::RepeatLast | Tail::Cycle | Tail::Stop => matrices.iter().for_each(&mut push),
                _ => return None,
            },
            GeneratorKind::Parametric(grid) => {
                if grid.iter().flatten().all(|p| p.degree().unwrap_or(0) == 0) {
                    let m = grid
                        .iter()
                        .map(|row| row.iter().map(|p| p.eval(0)).collect())
                        .collect::<Vec<Vec<_>>>();
                    push(&IntMatrix::from_rows(&m).ok()?);
                } else {
                    return None;
                }
            }
        }
        Some(out)
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            GeneratorKind::Explicit { .. } => "explicit",
            GeneratorKind::Stationary(_) => "stationary",
            GeneratorKind::Periodic(_) => "periodic",
            GeneratorKind::SymbolSequence { .. } => "symbol-sequence",
            GeneratorKind::Parametric(_) => "parametric",
        }
    }

    /// Conjugate every produced matrix by the permutation (`perm[new] = old`).
    pub fn permuted(&self, perm: &[usize]) -> IncidenceGenerator {
        let p = |m: &IntMatrix| m.permuted(perm);
        let kind = match &self.kind {
            GeneratorKind::Stationary(m) => GeneratorKind::Stationary(p(m)),
            GeneratorKind::Periodic(list) => GeneratorKind::Periodic(list.iter().map(p).collect()),
            GeneratorKind::SymbolSequence { alphabet, omega } => GeneratorKind::SymbolSequence {
                alphabet: alphabet.iter().map(p).collect(),
                omega: omega.clone(),
            },
            GeneratorKind::Parametric(grid) => GeneratorKind::Parametric(
                perm.iter()
                    .map(|&i| perm.iter().map(|&j| grid[i][j].clone()).collect())
                    .collect(),
            ),
            GeneratorKind::Explicit { matrices, tail } => {
                let tail = match tail {
                    Tail::Telescoped { base, from, step } => Tail::Telescoped {
                        base: Box::new(base.permuted(perm)),
                        from: *from,
                        step: *step,
                    },
                    Tail::Restricted { base, schedule } => Tail::Restricted {
                        base: base.clone(),
                        schedule: schedule.reordered(perm),
                    },
                    other => other.clone(),
                };
                GeneratorKind::Explicit {
                    matrices: matrices.iter().map(p).collect(),
                    tail,
                }
            }
        };
        IncidenceGenerator {
            kind,
            start_level: self.start_level,
        }
    }
}

impl GeneratorKind {
    /// `raw` is the rule index (level shifted by the start level), `level`
    /// the diagram level used for error reporting and derived tails.
    fn eval_raw(&self, raw: usize, level: usize) -> Result<IntMatrix> {
        match self {
            GeneratorKind::Stationary(m) => Ok(m.clone()),
            GeneratorKind::Periodic(list) => Ok(list[(raw - 1) % list.len()].clone()),
            GeneratorKind::SymbolSequence { alphabet, omega } => omega
                .symbol(raw - 1)
                .map(|s| alphabet[s].clone())
                .ok_or(Error::LevelOutOfRange { level }),
            GeneratorKind::Parametric(grid) => {
                let rows: Vec<Vec<_>> = grid
                    .iter()
                    .map(|row| row.iter().map(|p| p.eval(raw as u64)).collect())
                    .collect();
                IntMatrix::from_rows(&rows)
            }
            GeneratorKind::Explicit { matrices, tail } => {
                let len = matrices.len();
                if raw <= len {
                    return Ok(matrices[raw - 1].clone());
                }
                match tail {
                    Tail::RepeatLast if len > 0 => Ok(matrices[len - 1].clone()),
                    Tail::Cycle if len > 0 => Ok(matrices[(raw - 1) % len].clone()),
                    Tail::Telescoped { base, from, step } => {
                        let t = raw - len;
                        let first = from + (t - 1) * step;
                        let mut acc = base.eval(first)?;
                        for k in first + 1..first + step {
                            acc = base.eval(k)?.mul(&acc);
                        }
                        Ok(acc)
                    }
                    Tail::Restricted { base, schedule } => {
                        let f = base.eval(raw)?;
                        Ok(f.submatrix(schedule.at(raw + 1), schedule.at(raw)))
                    }
                    _ => Err(Error::LevelOutOfRange { level }),
                }
            }
        }
    }
}
