//! Symbolic bounds on `t_n = 1 - q^(n)_{v,v}` for a fixed vertex `v` of a
//! stationary or parametric diagram.
//!
//! Write `g_u(n) = h^(n)_u / h^(n)_v` for the other vertices `u`. Then
//! `g_u(n+1) = (f_uv + sum_w f_uw g_w(n)) / (f_vv + sum_w f_vw g_w(n))` and
//! `t_n = sum_u f_vu g_u(n) / (f_vv + sum_u f_vu g_u(n))`. Interval bounds on
//! `g` that are invariant under this map give polynomial bounds on `t_n`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::diagram::Diagram;
use crate::generator::GeneratorKind;
use crate::matrix::big_to_rat;
use crate::poly::RatPoly;

/// Levels from which invariance must hold.
const INVARIANCE_LIMIT: u64 = 256;
/// Window after the invariance level in which the base case is searched.
const BASE_WINDOW: usize = 64;
const MAX_EXPONENT: u32 = 20;

/// `num(n) / den(n)` bounds the terms of a criterion series from `from_level` on.
#[derive(Debug, Clone, PartialEq)]
pub struct TermBound {
    pub upper: bool,
    pub num: RatPoly,
    pub den: RatPoly,
    pub from_level: usize,
}

impl TermBound {
    /// `deg num - deg den`.
    pub fn order(&self) -> i64 {
        self.num.degree().map_or(i64::MIN, |d| d as i64) - self.den.degree().map_or(0, |d| d as i64)
    }

    pub fn render(&self) -> String {
        format!(
            "t_n {} ({}) / ({}) for n >= {}",
            if self.upper { "<=" } else { ">=" },
            self.num,
            self.den,
            self.from_level
        )
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Outcome {
    Finite {
        rule: &'static str,
        detail: String,
        bound: Option<TermBound>,
    },
    Infinite {
        rule: &'static str,
        detail: String,
        bound: TermBound,
    },
}

fn grid(diagram: &Diagram) -> Option<Vec<Vec<RatPoly>>> {
    let g = diagram.generator();
    let shift = g.start_level as u64 - 1;
    match &g.kind {
        GeneratorKind::Stationary(m) => Some(
            (0..m.rows())
                .map(|i| {
                    m.row(i)
                        .iter()
                        .map(|x| RatPoly::constant(big_to_rat(x)))
                        .collect()
                })
                .collect(),
        ),
        GeneratorKind::Parametric(grid) => Some(
            grid.iter()
                .map(|row| row.iter().map(|p| p.shifted(shift).to_rat()).collect())
                .collect(),
        ),
        _ => None,
    }
}

fn pow2(e: i32) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

fn constant(c: &BigRational) -> RatPoly {
    RatPoly::constant(c.clone())
}

struct Setup {
    v: usize,
    others: Vec<usize>,
    f: Vec<Vec<RatPoly>>,
}

impl Setup {
    fn s(&self, u: usize) -> RatPoly {
        self.others
            .iter()
            .fold(RatPoly::zero(), |acc, &w| acc.add(&self.f[u][w]))
    }

    fn t(&self) -> RatPoly {
        self.s(self.v)
    }

    /// Largest level from which every polynomial in `polys` stays nonnegative.
    fn nonneg_from(polys: &[RatPoly]) -> Option<u64> {
        polys
            .iter()
            .map(|p| p.nonneg_from_within(INVARIANCE_LIMIT))
            .try_fold(1, |acc, x| x.map(|x| acc.max(x)))
    }
}

/// First level `n` in `from..from + BASE_WINDOW` with `lo <= g_u(n) <= hi` for
/// every other vertex.
fn base_level(
    diagram: &Diagram,
    setup: &Setup,
    from: usize,
    lo: Option<&BigRational>,
    hi: &BigRational,
) -> Option<usize> {
    let heights = diagram.heights_upto(from + BASE_WINDOW).ok()?;
    (from..from + BASE_WINDOW).find(|&n| {
        let h = &heights[n - 1];
        let hv = big_to_rat(&h[setup.v]);
        setup.others.iter().all(|&u| {
            let g = big_to_rat(&h[u]) / &hv;
            &g <= hi && lo.is_none_or(|l| &g >= l)
        })
    })
}

/// Try the domination rules for the constant path through `v`.
pub(crate) fn single_vertex_bounds(diagram: &Diagram, v: usize) -> Option<Outcome> {
    let f = grid(diagram)?;
    let d = f.len();
    let others: Vec<usize> = (0..d).filter(|&u| u != v).collect();
    if others.is_empty() {
        return None;
    }
    let setup = Setup { v, others, f };
    geometric(&setup)
        .or_else(|| upper_bootstrap(diagram, &setup))
        .or_else(|| lower_bootstrap(diagram, &setup))
}

/// No edges from `v` into the other vertices and their row sums are
/// eventually at most `kappa * f_vv` with `kappa < 1`: the `g_u` decay
/// geometrically.
fn geometric(s: &Setup) -> Option<Outcome> {
    let fvv = &s.f[s.v][s.v];
    if fvv.is_zero() || s.others.iter().any(|&u| !s.f[u][s.v].is_zero()) {
        return None;
    }
    for k in 1..=MAX_EXPONENT as i32 {
        let kappa = BigRational::one() - pow2(-k);
        let conds: Vec<RatPoly> = s
            .others
            .iter()
            .map(|&u| fvv.scale(&kappa).sub(&s.s(u)))
            .collect();
        let mut conds = conds;
        conds.push(fvv.sub(&constant(&BigRational::one())));
        if let Some(n0) = Setup::nonneg_from(&conds) {
            return Some(Outcome::Finite {
                rule: "geometric-domination",
                detail: format!("max_u g_u(n+1) <= {kappa} max_u g_u(n) for n >= {n0}"),
                bound: None,
            });
        }
    }
    None
}

/// An invariant upper bound `g_u <= R` turns into a term bound of order
/// `deg f_vu + deg(f_uv + R S_u) - 2 deg f_vv`.
fn upper_bootstrap(diagram: &Diagram, s: &Setup) -> Option<Outcome> {
    let fvv = &s.f[s.v][s.v];
    if fvv.is_zero() {
        return None;
    }
    let one = constant(&BigRational::one());
    for b in 0..=MAX_EXPONENT as i32 {
        let r = pow2(b);
        let mut conds: Vec<RatPoly> = s
            .others
            .iter()
            .map(|&u| fvv.scale(&r).sub(&s.s(u).scale(&r)).sub(&s.f[u][s.v]))
            .collect();
        conds.push(fvv.sub(&one));
        let Some(n_inv) = Setup::nonneg_from(&conds) else {
            continue;
        };
        let Some(n1) = base_level(diagram, s, n_inv as usize, None, &r) else {
            continue;
        };
        // g_w(n) <= (f_wv(n-1) + R S_w(n-1)) / f_vv(n-1) for n > n1.
        let num = s.others.iter().fold(RatPoly::zero(), |acc, &w| {
            let gw = s.f[w][s.v].add(&s.s(w).scale(&r)).shifted(-1);
            acc.add(&s.f[s.v][w].mul(&gw))
        });
        let den = fvv.mul(&fvv.shifted(-1));
        let bound = TermBound {
            upper: true,
            num,
            den,
            from_level: n1 + 1,
        };
        if bound.order() <= -2 {
            return Some(Outcome::Finite {
                rule: "summable-term-bound",
                detail: format!("g_u <= {r} from level {n1}; {}", bound.render()),
                bound: Some(bound),
            });
        }
        // A larger R only weakens the bound.
        return None;
    }
    None
}

/// Invariant two-sided bounds `L <= g_u <= R` give `t_n >= L T / (f_vv + L T)`;
/// order at least -1 means the terms are not summable.
fn lower_bootstrap(diagram: &Diagram, s: &Setup) -> Option<Outcome> {
    let fvv = &s.f[s.v][s.v];
    let t = s.t();
    if t.is_zero() {
        return None;
    }
    for a in 0..=MAX_EXPONENT as i32 {
        for b in 0..=MAX_EXPONENT as i32 {
            let (l, r) = (pow2(-a), pow2(b));
            let mut conds = Vec::new();
            for &u in &s.others {
                let su = s.s(u);
                let fuv = &s.f[u][s.v];
                conds.push(fuv.add(&su.scale(&l)).sub(&fvv.add(&t.scale(&r)).scale(&l)));
                conds.push(fvv.add(&t.scale(&l)).scale(&r).sub(&fuv.add(&su.scale(&r))));
            }
            let Some(n_inv) = Setup::nonneg_from(&conds) else {
                continue;
            };
            let Some(n1) = base_level(diagram, s, n_inv as usize, Some(&l), &r) else {
                continue;
            };
            let num = t.scale(&l);
            let den = fvv.add(&num);
            let bound = TermBound {
                upper: false,
                num,
                den,
                from_level: n1,
            };
            if bound.order() >= -1 {
                return Some(Outcome::Infinite {
                    rule: "terms-bounded-below",
                    detail: format!("{l} <= g_u <= {r} from level {n1}; {}", bound.render()),
                    bound,
                });
            }
            return None;
        }
    }
    None
}
