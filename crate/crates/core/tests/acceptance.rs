//! One pass/fail line per acceptance criterion, with timings.

use std::time::{Duration, Instant};

use bratteli::contraction::{
    contraction_stats, ergodicity_verdict, hilbert_distance, product_contraction,
};
use bratteli::linrec::{linrec_two_block, norm_growth_bounds};
use bratteli::measures::{
    extension_report, induced_subdiagram, invariant_measures, odometer_extension_report,
    SubdiagramSpec, DEFAULT_CLUSTER_EPS,
};
use bratteli::verdict::Evidence;
use bratteli::vershik::{
    expand_word, frequency_report, morse_diagram, render_word, vershik_successor, FinitePath,
    OrderTail, Ordering, Successor,
};
use bratteli::{Diagram, IncidenceGenerator, IntMatrix, Tail, VertexSchedule};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check, Duration);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn m(rows: &[&[u64]]) -> IntMatrix {
    IntMatrix::from_u64(rows)
}

fn rat(x: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x.clone()))
}

fn random_matrix(rng: &mut ChaCha8Rng, d: usize, lo: u64, hi: u64) -> IntMatrix {
    let rows: Vec<Vec<u64>> = (0..d)
        .map(|i| {
            let mut row: Vec<u64> = (0..d).map(|_| rng.gen_range(lo..=hi)).collect();
            if row.iter().all(|&x| x == 0) {
                row[i] = 1;
            }
            row
        })
        .collect();
    IntMatrix::from_rows(&rows).unwrap()
}

fn apply(a: &IntMatrix, x: &[f64]) -> Vec<f64> {
    (0..a.rows())
        .map(|i| {
            a.row(i)
                .iter()
                .zip(x)
                .map(|(p, q)| p.to_f64().unwrap() * q)
                .sum()
        })
        .collect()
}

fn birkhoff() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 1.0;
    for _ in 0..50 {
        let d = rng.gen_range(2..=3);
        let a = random_matrix(&mut rng, d, 1, 100);
        let tau = contraction_stats(&a).map_err(|e| e.to_string())?.tau;
        let mut sup: f64 = 0.0;
        for _ in 0..100_000 {
            let x: Vec<f64> = (0..d)
                .map(|_| 10f64.powf(rng.gen_range(-3.0..3.0)))
                .collect();
            let y: Vec<f64> = (0..d)
                .map(|_| 10f64.powf(rng.gen_range(-3.0..3.0)))
                .collect();
            let before = hilbert_distance(&x, &y).unwrap();
            if before > 0.0 {
                let after = hilbert_distance(&apply(&a, &x), &apply(&a, &y)).unwrap();
                sup = sup.max(after / before);
            }
        }
        ensure(
            sup <= tau * (1.0 + 1e-9),
            format!("sampled {sup} above tau {tau}"),
        )?;
        worst = worst.min(sup / tau);
    }
    ensure(worst >= 0.95, format!("sampled sup only {worst:.4} of tau"))?;
    let r = (1.0f64 / 6.0).sqrt();
    let tau = contraction_stats(&m(&[&[2, 1], &[1, 3]])).unwrap().tau;
    let expected = (1.0 - r) / (1.0 + r);
    ensure(
        (tau - expected).abs() <= 1e-12,
        format!("tau [[2,1],[1,3]] = {tau}"),
    )?;
    Ok(format!(
        "min sup/tau {worst:.4}, tau [[2,1],[1,3]] = {tau:.15}"
    ))
}

fn stationary_recovery() -> Check {
    let d = Diagram::stationary(m(&[&[2, 1], &[1, 2]])).unwrap();
    let ms = invariant_measures(&d, 30, DEFAULT_CLUSTER_EPS).map_err(|e| e.to_string())?;
    ensure(ms.len() == 1, format!("{} clusters", ms.len()))?;
    let mu = &ms[0];
    let p1 = mu.p_f64(1).unwrap();
    let dev = p1.iter().map(|x| (x - 0.5).abs()).fold(0.0, f64::max);
    ensure(dev <= 1e-12, format!("|p1 - 1/2| = {dev}"))?;
    ensure(
        mu.error_certificate <= 1e-10,
        format!("theta {}", mu.error_certificate),
    )?;
    for n in 1..=30 {
        let p = mu.p(n).unwrap();
        let h = mu.heights(n).unwrap();
        let total: BigRational = p.iter().zip(h).map(|(a, b)| a * rat(b)).sum();
        ensure(total.is_one(), format!("normalization fails at level {n}"))?;
        if n < 30 {
            let f = d.incidence(n).unwrap();
            let next = mu.p(n + 1).unwrap();
            for w in 0..2 {
                let back: BigRational = (0..2).map(|v| rat(f.get(v, w)) * &next[v]).sum();
                ensure(back == p[w], format!("chain fails at level {n}"))?;
            }
        }
    }
    Ok(format!(
        "|p1 - 1/2| = {dev:.1e}, theta = {:.2e}",
        mu.error_certificate
    ))
}

fn parametric(grid: &[&[&str]]) -> Diagram {
    Diagram::new(
        grid.len(),
        IncidenceGenerator::parametric_str(grid).unwrap(),
    )
    .unwrap()
}

fn growing_off_diagonal() -> Check {
    let d = parametric(&[&["1", "1"], &["n", "1"]]);
    let ms = invariant_measures(&d, 200, DEFAULT_CLUSTER_EPS).map_err(|e| e.to_string())?;
    ensure(ms.len() == 1, format!("{} clusters", ms.len()))?;
    let mass = ms[0].tower_masses_f64(30).unwrap()[0];
    ensure((mass - 0.5).abs() <= 0.01, format!("mu(X_1^(30)) = {mass}"))?;
    // The height ratio decays like 1/sqrt(n), so it is checked through
    // monotonicity and sqrt(n) * ratio -> 1 rather than a fixed threshold.
    let hs = d.heights_upto(400).map_err(|e| e.to_string())?;
    let ratio = |n: usize| {
        let h = &hs[n - 1];
        bratteli::matrix::rat_to_f64(&(rat(&h[0]) / rat(&h[1])))
    };
    for n in 40..400 {
        ensure(
            ratio(n + 1) < ratio(n),
            format!("ratio not decreasing at {n}"),
        )?;
    }
    let scaled = ratio(400) * 400f64.sqrt();
    ensure(
        (scaled - 1.0).abs() < 0.01,
        format!("sqrt(n) h1/h2 = {scaled} at n = 400"),
    )?;
    Ok(format!(
        "mu(X_1^(30)) = {mass:.6}, sqrt(400) h1/h2 = {scaled:.5}"
    ))
}

fn growing_diagonal() -> Check {
    let d = parametric(&[&["1", "1"], &["1", "n"]]);
    let ms = invariant_measures(&d, 60, DEFAULT_CLUSTER_EPS).map_err(|e| e.to_string())?;
    let masses = ms[0].tower_masses_f64(20).unwrap();
    let r = masses[0] / masses[1];
    ensure(r <= 0.01, format!("mass ratio {r} at level 20"))?;
    let rep = odometer_extension_report(&d, &VertexSchedule::constant(vec![1]), 60)
        .map_err(|e| e.to_string())?;
    ensure(
        rep.verdict.label() == "CertifiedFinite",
        rep.verdict.label(),
    )?;
    let b = rep.term_bound.as_ref().ok_or("no term bound")?;
    for n in b.from_level..60 {
        let bound = b.num.eval_int(n as u64) / b.den.eval_int(n as u64);
        let expected = BigRational::new(BigInt::from(2), BigInt::from(n * (n - 1)));
        ensure(bound == expected, format!("bound at {n} is {bound}"))?;
    }
    Ok(format!("mass ratio {r:.2e} at level 20, {}", b.render()))
}

fn two_measures() -> Check {
    let d = parametric(&[&["n^2", "1"], &["1", "n^2"]]);
    let mut counts = Vec::new();
    for depth in [100, 150] {
        let ms = invariant_measures(&d, depth, 1e-3).map_err(|e| e.to_string())?;
        counts.push(ms.len());
    }
    ensure(counts == [2, 2], format!("cluster counts {counts:?}"))?;
    Ok("2 clusters at depths 100 and 150".into())
}

fn extension_of(
    d: &Diagram,
    w: Vec<usize>,
    depth: usize,
) -> Result<bratteli::measures::ExtensionReport, String> {
    let spec = SubdiagramSpec::constant(w);
    let sub = induced_subdiagram(d, &spec).map_err(|e| e.to_string())?;
    let mu = invariant_measures(&sub, depth, DEFAULT_CLUSTER_EPS)
        .map_err(|e| e.to_string())?
        .remove(0);
    extension_report(d, &spec, &mu, depth).map_err(|e| e.to_string())
}

fn extension_closed_forms() -> Check {
    let finite = Diagram::stationary(m(&[&[2, 0], &[1, 3]])).unwrap();
    let r = extension_of(&finite, vec![1], 60)?;
    let miss = (r.mass_estimate() - 2.0).abs();
    ensure(miss <= 1e-9, format!("|I_60 - 2| = {miss}"))?;
    ensure(r.verdict.label() == "CertifiedFinite", r.verdict.label())?;
    let infinite = Diagram::stationary(m(&[&[3, 0], &[1, 2]])).unwrap();
    let r = extension_of(&infinite, vec![1], 30)?;
    ensure(r.verdict.label() == "CertifiedInfinite", r.verdict.label())?;

    // omega = 3 at levels 1, 2, 4, 7, ... (gaps 1, 2, 3, ...), 2 elsewhere.
    let depth = 80;
    let mut marks = vec![1usize];
    let mut gap = 1;
    while *marks.last().unwrap() < depth {
        marks.push(marks.last().unwrap() + gap);
        gap += 1;
    }
    let omega: Vec<u64> = (1..=depth)
        .map(|i| if marks.contains(&i) { 3 } else { 2 })
        .collect();
    let list: Vec<IntMatrix> = omega.iter().map(|&w| m(&[&[2, 0], &[1, w]])).collect();
    let stair = Diagram::new(2, IncidenceGenerator::explicit(list, Tail::Stop)).unwrap();
    let r = extension_of(&stair, vec![1], depth)?;
    // I_N = 1 + sum_{i<N} 2^(i-1) / (omega_1 ... omega_i) at every level.
    let mut level_sum = BigRational::one();
    let mut denom = BigInt::one();
    for n in 2..=depth {
        denom *= BigInt::from(omega[n - 2]);
        level_sum += BigRational::new(BigInt::from(2).pow(n as u32 - 2), denom.clone());
        ensure(r.i_n[n - 1] == level_sum, format!("I_{n} differs"))?;
    }
    // After the k-th mark: 1 + (1/2) sum_{j<=k} j (2/3)^j.
    let mut series = BigRational::one();
    for (k, &mark) in marks.iter().enumerate().skip(1) {
        if mark > depth {
            break;
        }
        series += BigRational::new(
            BigInt::from(k) * BigInt::from(2).pow(k as u32),
            BigInt::from(2) * BigInt::from(3).pow(k as u32),
        );
        ensure(
            r.i_n[mark - 1] == series,
            format!("staircase differs at level {mark}"),
        )?;
    }
    Ok(format!(
        "|I_60 - 2| = {miss:.1e}, staircase exact over {depth} levels"
    ))
}

fn linrec_consistency() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut built, mut both) = (0, 0);
    while built < 20 {
        let dd = rng.gen_range(1..=2);
        let dc = rng.gen_range(1..=2);
        let dm = random_matrix(&mut rng, dd, 1, 6);
        let cm = random_matrix(&mut rng, dc, 1, 6);
        let rd = bratteli::linrec::perron_data(&dm, 1e-14).unwrap().rho;
        let rc = bratteli::linrec::perron_data(&cm, 1e-14).unwrap().rho;
        if (rd - rc).abs() < 1e-6 {
            continue;
        }
        built += 1;
        let d = dd + dc;
        let mut rows = vec![vec![0u64; d]; d];
        for i in 0..d {
            for j in 0..d {
                rows[i][j] = match (i < dd, j < dd) {
                    (true, true) => dm.get(i, j).to_u64().unwrap(),
                    (true, false) => 0,
                    (false, true) => rng.gen_range(0..=3),
                    (false, false) => cm.get(i - dd, j - dd).to_u64().unwrap(),
                };
            }
        }
        if rows[dd..].iter().all(|r| r[..dd].iter().all(|&x| x == 0)) {
            rows[dd][0] = 1;
        }
        let diagram = Diagram::stationary(IntMatrix::from_rows(&rows).unwrap()).unwrap();
        let w: Vec<usize> = (dd..d).collect();
        let series = extension_of(&diagram, w.clone(), 40)?.verdict;
        let linrec = linrec_two_block(&diagram, &w, 1 << 12)
            .map_err(|e| e.to_string())?
            .verdict;
        if series.is_certified() && linrec.is_certified() {
            both += 1;
            ensure(
                series.label() == linrec.label(),
                format!(
                    "{rows:?}: series {} vs linrec {}",
                    series.label(),
                    linrec.label()
                ),
            )?;
        }
    }
    ensure(both > 0, "no case certified by both")?;

    let exact_alphabets = [
        [m(&[&[2, 1], &[2, 3]]), m(&[&[2, 1], &[1, 2]])],
        [m(&[&[2, 1], &[2, 3]]), m(&[&[3, 2], &[1, 2]])],
        [m(&[&[1, 1], &[1, 1]]), m(&[&[3, 2], &[1, 2]])],
    ];
    let mut words = 0;
    for alphabet in &exact_alphabets {
        for len in 1..=10u32 {
            for code in 0..(1u32 << len) {
                let product: Vec<IntMatrix> = (0..len)
                    .map(|i| alphabet[((code >> i) & 1) as usize].clone())
                    .collect();
                let b = norm_growth_bounds(&product).map_err(|e| e.to_string())?;
                ensure(b.exact, "expected exact bounds")?;
                ensure(b.holds(), format!("sandwich fails: {b:?}"))?;
                words += 1;
            }
        }
    }
    Ok(format!(
        "{both}/20 doubly certified cases agree, sandwich exact on {words} products"
    ))
}

fn random_ordered(rng: &mut ChaCha8Rng) -> (Diagram, Ordering, usize) {
    loop {
        let d = rng.gen_range(2..=3);
        let depth = rng.gen_range(3..=10);
        let list: Vec<IntMatrix> = (0..depth).map(|_| random_matrix(rng, d, 0, 3)).collect();
        let levels: Vec<Vec<Vec<usize>>> = list
            .iter()
            .map(|f| {
                (0..d)
                    .map(|v| {
                        let mut seq: Vec<usize> = (0..d)
                            .flat_map(|w| std::iter::repeat_n(w, f.get(v, w).to_usize().unwrap()))
                            .collect();
                        seq.shuffle(rng);
                        seq
                    })
                    .collect()
            })
            .collect();
        let diagram = Diagram::new(d, IncidenceGenerator::explicit(list, Tail::Stop)).unwrap();
        let heights = diagram.heights(depth).unwrap();
        if heights.iter().all(|h| *h <= BigUint::from(10_000u32)) {
            let order = Ordering::Explicit {
                levels,
                tail: OrderTail::RepeatLast,
            };
            return (diagram, order, depth);
        }
    }
}

fn vershik_agreement() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut steps = 0usize;
    for _ in 0..10 {
        let (d, o, depth) = random_ordered(&mut rng);
        let levels = o.levels(&d, depth - 1).map_err(|e| e.to_string())?;
        let product = d.range_product(1, depth - 1, false).unwrap();
        for v in 0..d.rank() {
            let word = expand_word(&d, &o, v, depth, 1 << 20).map_err(|e| e.to_string())?;
            let mut path = FinitePath::minimal(v, depth);
            let mut seen = Vec::new();
            loop {
                seen.push(path.vertices(&levels).unwrap()[0]);
                match vershik_successor(&d, &o, &path).map_err(|e| e.to_string())? {
                    Successor::Next(p) => path = p,
                    Successor::MaximalSignal => break,
                }
            }
            ensure(
                seen == word.symbols,
                "successor orbit differs from the word",
            )?;
            steps += seen.len();
            for u in 0..d.rank() {
                let count = word.symbols.iter().filter(|&&s| s == u).count();
                ensure(
                    BigUint::from(count) == *product.get(v, u),
                    "letter counts differ from the product row",
                )?;
            }
        }
    }
    let tm = morse_diagram(2, &[vec![0, 1]]).unwrap();
    let word = expand_word(&tm.diagram, &tm.ordering, 0, 4, 64).unwrap();
    let text = render_word(&word.symbols).unwrap();
    ensure(text == "abbabaab", format!("Thue-Morse gives {text}"))?;
    let f = frequency_report(&tm.diagram, &tm.ordering, 0, 21, &[vec![0, 0]], 1_000_000)
        .map_err(|e| e.to_string())?;
    let aa = f.factors[0].frequency;
    ensure((aa - 1.0 / 6.0).abs() <= 0.01, format!("fr(aa) = {aa}"))?;
    Ok(format!("{steps} successor steps agree, fr(aa) = {aa:.5}"))
}

fn invariant_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut cases = 0;
    for _ in 0..60 {
        let d = rng.gen_range(2..=3);
        let list: Vec<IntMatrix> = (0..rng.gen_range(1..=3))
            .map(|_| random_matrix(&mut rng, d, 0, 4))
            .collect();
        let diagram = Diagram::new(d, IncidenceGenerator::periodic(list)).unwrap();
        for depth in [8, 24, 48] {
            if let Ok(ms) = invariant_measures(&diagram, depth, DEFAULT_CLUSTER_EPS) {
                ensure(
                    !ms.is_empty() && ms.len() <= d,
                    format!("{} clusters at rank {d}", ms.len()),
                )?;
            }
        }
        let mut last = f64::INFINITY;
        for n in 1..=24 {
            let theta = product_contraction(&diagram, 1, n)
                .map_err(|e| e.to_string())?
                .theta;
            ensure(theta <= last, "theta increased")?;
            last = theta;
        }
        if let Ok(v) = ergodicity_verdict(&diagram, 48, 1e-9) {
            ensure(
                v.evidence != Evidence::CertifiedNo,
                "CertifiedNo for unique ergodicity",
            )?;
        }
        cases += 1;
    }
    for (tau, omega) in [(1, 2), (2, 3), (3, 2), (2, 2)] {
        let d = Diagram::stationary(m(&[&[tau, 0], &[1, omega]])).unwrap();
        let r = extension_of(&d, vec![1], 40)?;
        ensure(r.i_n.windows(2).all(|w| w[0] <= w[1]), "I_n decreased")?;
    }
    Ok(format!("{cases} random diagrams, 4 extension sequences"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        (
            "birkhoff contraction vs sampling",
            birkhoff,
            Duration::from_secs(30),
        ),
        (
            "stationary measure recovery",
            stationary_recovery,
            Duration::from_secs(1),
        ),
        (
            "growing off-diagonal example",
            growing_off_diagonal,
            Duration::from_secs(10),
        ),
        (
            "growing diagonal example",
            growing_diagonal,
            Duration::from_secs(5),
        ),
        (
            "two ergodic measures",
            two_measures,
            Duration::from_secs(10),
        ),
        (
            "extension closed forms",
            extension_closed_forms,
            Duration::from_secs(5),
        ),
        (
            "linearly recurrent consistency",
            linrec_consistency,
            Duration::from_secs(30),
        ),
        (
            "vershik and word agreement",
            vershik_agreement,
            Duration::from_secs(60),
        ),
        ("invariant suite", invariant_suite, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *budget => Err(format!("{detail}; over budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!(
                "PASS {} {name} ({:.2}s): {detail}",
                i + 1,
                elapsed.as_secs_f64()
            ),
            Err(detail) => {
                failed += 1;
                println!(
                    "FAIL {} {name} ({:.2}s): {detail}",
                    i + 1,
                    elapsed.as_secs_f64()
                );
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
