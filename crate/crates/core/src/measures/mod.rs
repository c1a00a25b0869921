//! Invariant measures by cone intersection, tower masses, exact rank
//! diagnostics and measure extensions from subdiagrams.

mod extension;
mod symbolic;

pub use extension::{
    extension_report, extension_report_with, odometer_extension_report, Criterion, ExtensionReport,
    TermBound,
};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::contraction::{base_levels, hilbert_distance_exact, phi_exact};
use crate::decomposition::{canonical_form, DEFAULT_PROBE_DEPTH};
use crate::diagram::Diagram;
use crate::error::{Error, Result};
use crate::generator::{GeneratorKind, IncidenceGenerator, Tail, VertexSchedule};
use crate::matrix::{big_to_rat, ln_rat, rat_to_f64, IntMatrix};
use crate::verdict::{Claim, Evidence, Verdict};

pub const DEFAULT_CLUSTER_EPS: f64 = 1e-6;
pub const SUPPORT_THRESHOLD: f64 = 1e-9;

/// One invariant measure, given by `p^(n)_w = μ(B_n(w))` on levels `1..=N`.
///
/// The vectors are stored as integers over a common denominator, so the
/// chain and normalization identities hold exactly.
#[derive(Debug, Clone)]
pub struct MeasureEstimate {
    depth: usize,
    /// `u^(n)` for `n = 1..=N`, with `p^(n) = u^(n) / scale`.
    numerators: Vec<Vec<BigUint>>,
    scale: BigUint,
    heights: Vec<Vec<BigUint>>,
    /// Normalized direction at level `N + 1`.
    pub terminal_direction: Vec<BigRational>,
    /// Columns of the cone generator grouped into this measure.
    pub cluster: Vec<usize>,
    /// Level at which the columns were clustered.
    pub cluster_level: usize,
    /// Largest Hilbert distance between two columns of the cluster.
    pub cluster_diameter: f64,
    /// `Θ(P_1^N)`: Hilbert diameter of the depth-`N` cone image at level 1.
    pub error_certificate: f64,
}

impl MeasureEstimate {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn rank(&self) -> usize {
        self.terminal_direction.len()
    }

    fn check_level(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.depth {
            return Err(Error::LevelOutOfRange { level: n });
        }
        Ok(())
    }

    /// `p^(n)` as exact rationals.
    pub fn p(&self, n: usize) -> Result<Vec<BigRational>> {
        self.check_level(n)?;
        let s = big_to_rat(&self.scale);
        Ok(self.numerators[n - 1]
            .iter()
            .map(|u| big_to_rat(u) / &s)
            .collect())
    }

    pub fn p_f64(&self, n: usize) -> Result<Vec<f64>> {
        Ok(self.p(n)?.iter().map(rat_to_f64).collect())
    }

    pub fn heights(&self, n: usize) -> Result<&[BigUint]> {
        self.check_level(n)?;
        Ok(&self.heights[n - 1])
    }

    /// `μ(X_v^(n)) = h^(n)_v p^(n)_v`; sums to exactly 1.
    pub fn tower_masses(&self, n: usize) -> Result<Vec<BigRational>> {
        self.check_level(n)?;
        let s = big_to_rat(&self.scale);
        Ok(self.numerators[n - 1]
            .iter()
            .zip(&self.heights[n - 1])
            .map(|(u, h)| big_to_rat(&(u * h)) / &s)
            .collect())
    }

    pub fn tower_masses_f64(&self, n: usize) -> Result<Vec<f64>> {
        Ok(self.tower_masses(n)?.iter().map(rat_to_f64).collect())
    }

    /// Vertices whose tower mass exceeds `threshold`, per level.
    pub fn support(&self, threshold: f64) -> Vec<Vec<usize>> {
        (1..=self.depth)
            .map(|n| {
                self.tower_masses_f64(n)
                    .expect("stored level")
                    .iter()
                    .enumerate()
                    .filter(|(_, &m)| m > threshold)
                    .map(|(v, _)| v)
                    .collect()
            })
            .collect()
    }
}

fn normalized(v: &[BigUint]) -> Vec<BigRational> {
    let total: BigUint = v.iter().sum();
    let t = big_to_rat(&total);
    v.iter().map(|x| big_to_rat(x) / &t).collect()
}

/// Single-linkage clusters of the rows of `q` (= columns of `q^T`) under the
/// Hilbert metric, ordered by smallest member.
fn cluster_rows(q: &IntMatrix, eps: f64) -> Result<Vec<Vec<usize>>> {
    let d = q.rows();
    let rows: Vec<Vec<BigRational>> = (0..d)
        .map(|j| q.row(j).iter().map(big_to_rat).collect())
        .collect();
    let mut parent: Vec<usize> = (0..d).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        parent[x] = r;
        r
    }
    for i in 0..d {
        for j in i + 1..d {
            if hilbert_distance_exact(&rows[i], &rows[j])? < eps {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut index = vec![usize::MAX; d];
    for j in 0..d {
        let r = find(&mut parent, j);
        if index[r] == usize::MAX {
            index[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[index[r]].push(j);
    }
    Ok(groups)
}

fn diameter(q: &IntMatrix, group: &[usize]) -> Result<f64> {
    let mut best: f64 = 0.0;
    for (a, &i) in group.iter().enumerate() {
        for &j in &group[a + 1..] {
            let x: Vec<BigRational> = q.row(i).iter().map(big_to_rat).collect();
            let y: Vec<BigRational> = q.row(j).iter().map(big_to_rat).collect();
            best = best.max(hilbert_distance_exact(&x, &y)?);
        }
    }
    Ok(best)
}

/// Invariant measures seen at depth `N`: the columns of `F_m^T ... F_N^T`
/// are clustered in the Hilbert metric and each cluster is propagated back to
/// level 1. The base level `m` is the smallest one among the first few
/// levels that separates the most clusters.
pub fn invariant_measures(
    diagram: &Diagram,
    depth: usize,
    cluster_eps: f64,
) -> Result<Vec<MeasureEstimate>> {
    if depth < 2 {
        return Err(Error::invalid("depth must be at least 2"));
    }
    if let Some(max) = diagram.max_level() {
        if depth > max {
            return Err(Error::LevelOutOfRange { level: depth });
        }
    }
    let d = diagram.rank();
    let fs = diagram.incidences(1, depth)?;
    let heights = diagram.heights_upto(depth)?;
    // q[k] = F_N ... F_{k+1} for the base levels.
    let bases: Vec<usize> = base_levels(depth).collect();
    let mut saved: Vec<IntMatrix> = Vec::with_capacity(bases.len());
    let mut acc = IntMatrix::identity(d);
    for k in (1..=depth).rev() {
        acc = acc.mul(&fs[k - 1]);
        acc.check_bits(diagram.bit_cap())?;
        if k <= *bases.last().expect("nonempty") {
            saved.push(acc.clone());
        }
    }
    saved.reverse();
    let full = &saved[0];
    for j in 0..d {
        if full.row(j).iter().all(|x| x.is_zero()) {
            return Err(Error::DegenerateColumn(j));
        }
    }
    let clusterings: Vec<Vec<Vec<usize>>> = saved
        .par_iter()
        .map(|q| cluster_rows(q, cluster_eps))
        .collect::<Result<_>>()?;
    let best = clusterings.iter().map(|c| c.len()).max().expect("nonempty");
    let level_idx = clusterings
        .iter()
        .position(|c| c.len() == best)
        .expect("max exists");
    let cluster_level = bases[level_idx];
    let q = &saved[level_idx];
    let certificate = {
        let phi = phi_exact(full);
        if phi.is_zero() {
            f64::INFINITY
        } else {
            (-ln_rat(&phi)).max(0.0)
        }
    };
    clusterings[level_idx]
        .par_iter()
        .map(|group| {
            // Terminal weights make every column of the group contribute its
            // normalized image at the cluster level: t_j ∝ 1 / ||column j||.
            let norms: Vec<BigUint> = group.iter().map(|&j| q.row(j).iter().sum()).collect();
            let mut t = vec![BigUint::zero(); d];
            for (a, &j) in group.iter().enumerate() {
                t[j] = norms
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| *b != a)
                    .fold(BigUint::one(), |acc, (_, c)| acc * c);
            }
            let terminal_direction = normalized(&t);
            let mut numerators = vec![Vec::new(); depth];
            let mut u = t;
            for n in (1..=depth).rev() {
                u = fs[n - 1].tmul_vec(&u);
                numerators[n - 1] = u.clone();
            }
            let scale: BigUint = numerators[0].iter().sum();
            Ok(MeasureEstimate {
                depth,
                numerators,
                scale,
                heights: heights.clone(),
                terminal_direction,
                cluster: group.clone(),
                cluster_level,
                cluster_diameter: diameter(q, group)?,
                error_certificate: certificate,
            })
        })
        .collect()
}

/// Compactness certificate: the entry ratio `m_n / M_n` of (telescoped)
/// incidence matrices is bounded below.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactnessCertificate {
    pub rule: String,
    /// A lower bound `c` for `m_n / M_n`, when it is a single number.
    pub bound: Option<BigRational>,
}

fn entry_ratio(m: &IntMatrix) -> BigRational {
    big_to_rat(&m.min_entry()) / big_to_rat(&m.max_entry())
}

/// Look for a symbolic reason why `m_n / M_n >= c > 0`.
pub fn compactness_certificate(diagram: &Diagram) -> Result<Option<CompactnessCertificate>> {
    let g = diagram.generator();
    if let Some(alphabet) = g.finite_alphabet() {
        if alphabet.iter().all(IntMatrix::is_positive) {
            let c = alphabet
                .iter()
                .map(entry_ratio)
                .min()
                .expect("nonempty alphabet");
            return Ok(Some(CompactnessCertificate {
                rule: "positive-finite-alphabet".into(),
                bound: Some(c),
            }));
        }
        let periodic = match &g.kind {
            GeneratorKind::Stationary(_) | GeneratorKind::Periodic(_) => true,
            GeneratorKind::SymbolSequence { omega, .. } => omega.is_eventually_periodic(),
            GeneratorKind::Explicit { tail, .. } => matches!(tail, Tail::RepeatLast | Tail::Cycle),
            GeneratorKind::Parametric(_) => true,
        };
        if periodic {
            let form = canonical_form(diagram, DEFAULT_PROBE_DEPTH)?;
            if form.is_simple() {
                // Past n0 the telescoped blocks of length `step` repeat.
                let step = form.telescoping_step;
                let n0 = form.stabilization_level;
                let mut c: Option<BigRational> = None;
                for j in 0..form.period {
                    let p = diagram.range_product(n0 + j, n0 + j + step - 1, false)?;
                    if !p.is_positive() {
                        return Ok(None);
                    }
                    let r = entry_ratio(&p);
                    c = Some(match c {
                        Some(x) if x < r => x,
                        _ => r,
                    });
                }
                return Ok(Some(CompactnessCertificate {
                    rule: format!("periodic-telescoping(step {step} from level {n0})"),
                    bound: c,
                }));
            }
        }
        return Ok(None);
    }
    if let GeneratorKind::Parametric(grid) = &g.kind {
        let positive = grid.iter().flatten().all(|p| !p.is_zero());
        let degs: Vec<Option<usize>> = grid.iter().flatten().map(|p| p.degree()).collect();
        if positive && degs.iter().all(|x| *x == degs[0]) {
            return Ok(Some(CompactnessCertificate {
                rule: "equal-degree-entries".into(),
                bound: None,
            }));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone)]
pub struct ExactRankReport {
    /// Best (over telescoping steps 1, 2, 4, 8) of the minimum tower mass.
    pub min_mass: f64,
    pub best_step: usize,
    /// Minimum tower mass at each level `1..=N`.
    pub profile: Vec<f64>,
    pub certificate: Option<CompactnessCertificate>,
    pub verdict: Verdict,
    pub cluster: usize,
}

pub const TELESCOPING_STEPS: [usize; 4] = [1, 2, 4, 8];

/// Tower-mass evidence for exact finite rank. With several measures, one of
/// them has to be chosen by index.
pub fn exact_rank_report(
    diagram: &Diagram,
    depth: usize,
    cluster_eps: f64,
    cluster: Option<usize>,
) -> Result<ExactRankReport> {
    let measures = invariant_measures(diagram, depth, cluster_eps)?;
    let index = match (cluster, measures.len()) {
        (Some(i), n) if i < n => i,
        (Some(i), n) => {
            return Err(Error::invalid(format!(
                "cluster {i} requested but only {n} found"
            )))
        }
        (None, 1) => 0,
        (None, n) => return Err(Error::MultipleMeasures { count: n }),
    };
    let m = &measures[index];
    let profile: Vec<f64> = (1..=depth)
        .map(|n| {
            m.tower_masses_f64(n)
                .map(|v| v.into_iter().fold(f64::INFINITY, f64::min))
        })
        .collect::<Result<_>>()?;
    let (best_step, min_mass) = TELESCOPING_STEPS
        .iter()
        .map(|&s| {
            let min = profile
                .iter()
                .step_by(s)
                .cloned()
                .fold(f64::INFINITY, f64::min);
            (s, min)
        })
        .fold((1, f64::NEG_INFINITY), |best, cur| {
            if cur.1 > best.1 {
                cur
            } else {
                best
            }
        });
    let certificate = if measures.len() == 1 {
        compactness_certificate(diagram)?
    } else {
        None
    };
    let verdict = match &certificate {
        Some(c) => Verdict::new(Claim::ExactRank, Evidence::CertifiedYes)
            .note("compactness", c.rule.clone()),
        None => Verdict::new(
            Claim::ExactRank,
            Evidence::Numerical {
                value: min_mass,
                depth,
            },
        )
        .note(
            "min-tower-mass",
            format!(
                "min mass {min_mass:.6e} over levels 1..={depth} with telescoping step {best_step}"
            ),
        ),
    };
    Ok(ExactRankReport {
        min_mass,
        best_step,
        profile,
        certificate,
        verdict,
        cluster: index,
    })
}

/// `(F_{N-1} ... F_n)_{v,w} / h^(N)_v`, which tends to `μ(B_n(w))` for a
/// uniquely ergodic diagram.
pub fn base_measure_ergodic_limit(
    diagram: &Diagram,
    n: usize,
    w: usize,
    v: usize,
    depth: usize,
) -> Result<BigRational> {
    let d = diagram.rank();
    if v >= d || w >= d {
        return Err(Error::invalid("vertex out of range"));
    }
    if n == 0 || depth <= n {
        return Err(Error::invalid(format!(
            "need 1 <= n < depth, got n = {n}, depth = {depth}"
        )));
    }
    let q = diagram.range_product(n, depth - 1, false)?;
    let h = diagram.heights(depth)?;
    Ok(big_to_rat(q.get(v, w)) / big_to_rat(&h[v]))
}

/// Vertex subsets `W_n` selecting a subdiagram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubdiagramSpec {
    pub schedule: VertexSchedule,
}

impl SubdiagramSpec {
    pub fn constant(vertices: Vec<usize>) -> Self {
        let mut v = vertices;
        v.sort_unstable();
        SubdiagramSpec {
            schedule: VertexSchedule::constant(v),
        }
    }

    pub fn path(prefix: Vec<usize>, cycle: Vec<usize>) -> Self {
        SubdiagramSpec {
            schedule: VertexSchedule::path(prefix, cycle),
        }
    }

    pub fn at(&self, n: usize) -> &[usize] {
        self.schedule.at(n)
    }

    pub fn complement(&self, n: usize, d: usize) -> Vec<usize> {
        let w = self.at(n);
        (0..d).filter(|v| !w.contains(v)).collect()
    }

    pub fn width(&self) -> usize {
        self.schedule.width()
    }

    /// Levels after which the schedule repeats with its cycle.
    fn span(&self) -> usize {
        self.schedule.prefix.len() + self.schedule.cycle.len()
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        self.schedule
            .validate(d)
            .map_err(|e| Error::SpecNotProper(e.to_string()))?;
        let w = self.width();
        if w == 0 || w >= d {
            return Err(Error::SpecNotProper(format!(
                "W_n must be a nonempty proper subset of the {d} vertices, got {w}"
            )));
        }
        Ok(())
    }
}

/// The diagram formed by the `W_n` and the edges between them.
pub fn induced_subdiagram(diagram: &Diagram, spec: &SubdiagramSpec) -> Result<Diagram> {
    let d = diagram.rank();
    spec.schedule
        .validate(d)
        .map_err(|e| Error::SpecNotProper(e.to_string()))?;
    if spec.width() == 0 {
        return Err(Error::SpecNotProper("empty vertex set".into()));
    }
    let g = diagram.generator();
    let generator = match (spec.schedule.is_constant(), &g.kind) {
        (Some(w), kind) => {
            let sub = |m: &IntMatrix| m.submatrix(w, w);
            let kind = match kind {
                GeneratorKind::Stationary(m) => Some(GeneratorKind::Stationary(sub(m))),
                GeneratorKind::Periodic(list) => {
                    Some(GeneratorKind::Periodic(list.iter().map(sub).collect()))
                }
                GeneratorKind::SymbolSequence { alphabet, omega } => {
                    Some(GeneratorKind::SymbolSequence {
                        alphabet: alphabet.iter().map(sub).collect(),
                        omega: omega.clone(),
                    })
                }
                GeneratorKind::Parametric(grid) => Some(GeneratorKind::Parametric(
                    w.iter()
                        .map(|&i| w.iter().map(|&j| grid[i][j].clone()).collect())
                        .collect(),
                )),
                GeneratorKind::Explicit { .. } => None,
            };
            kind.map(|k| IncidenceGenerator {
                kind: k,
                start_level: g.start_level,
            })
        }
        _ => None,
    };
    let generator = generator.unwrap_or_else(|| {
        IncidenceGenerator::explicit(
            Vec::new(),
            Tail::Restricted {
                base: Box::new(g.clone()),
                schedule: spec.schedule.clone(),
            },
        )
    });
    // Zero rows inside the subdiagram: check every level of one schedule
    // period past the support stabilization.
    let probe = match diagram.max_level() {
        Some(m) => m.min(DEFAULT_PROBE_DEPTH + spec.span()),
        None => DEFAULT_PROBE_DEPTH.min(16) + spec.span(),
    };
    for n in 1..=probe {
        let m = generator.eval(n)?;
        if let Some(row) = m.zero_row() {
            return Err(Error::ZeroRowInduced {
                level: n,
                vertex: spec.at(n + 1)[row],
            });
        }
    }
    let mut out = Diagram::new(spec.width(), generator).map_err(|e| match e {
        Error::ZeroRow { row, .. } => Error::ZeroRowInduced {
            level: 1,
            vertex: spec.at(2)[row],
        },
        other => other,
    })?;
    out = out.with_bit_cap(diagram.bit_cap());
    if let (Some(labels), Some(w)) = (diagram.labels(), spec.schedule.is_constant()) {
        out = out.with_labels(w.iter().map(|&v| labels[v].clone()).collect())?;
    }
    Ok(out)
}
