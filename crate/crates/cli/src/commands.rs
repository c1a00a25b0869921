use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use bratteli::contraction::{ergodicity_verdict, tau_profile};
use bratteli::decomposition::{canonical_form, DEFAULT_PROBE_DEPTH};
use bratteli::linrec::{linrec_two_block, LinRecProfile};
use bratteli::matrix::rat_to_f64;
use bratteli::measures::{
    exact_rank_report, extension_report_with, induced_subdiagram, invariant_measures,
    odometer_extension_report, Criterion, ExtensionReport, SubdiagramSpec, SUPPORT_THRESHOLD,
};
use bratteli::spec::{parse_document, spec_value};
use bratteli::vershik::{
    correlation_report, expand_word, frequency_report, morse_diagram, parse_word, render_word,
    Ordering,
};
use bratteli::{Diagram, VertexSchedule};
use serde_json::{json, Value};

use crate::report::{
    rational, real, reals, short, table, verdict_json, verdict_table, Report, TABLE_LEVELS,
};
use crate::{Cli, Command, Failure};

struct Loaded {
    diagram: Diagram,
    ordering: Option<Ordering>,
}

fn load(path: &Path, bit_cap: u64) -> Result<Loaded, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let doc =
        parse_document(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(Loaded {
        diagram: doc.diagram.with_bit_cap(bit_cap),
        ordering: doc.ordering,
    })
}

fn vertices(d: &Diagram, list: &str) -> Result<Vec<usize>, Failure> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| d.vertex_by_name(s).map_err(Failure::from))
        .collect()
}

/// Up to `TABLE_LEVELS` levels spread over `1..=n`, always including `n`.
fn sample_levels(n: usize) -> Vec<usize> {
    if n <= TABLE_LEVELS {
        return (1..=n).collect();
    }
    let mut out: Vec<usize> = (0..TABLE_LEVELS)
        .map(|i| 1 + i * (n - 1) / (TABLE_LEVELS - 1))
        .collect();
    out.dedup();
    out
}

pub fn fixture_path(spec: &Path, command: &str) -> PathBuf {
    let stem = spec
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let dir = spec.parent().unwrap_or(Path::new("."));
    dir.join("expected").join(format!("{stem}.{command}.json"))
}

pub fn run(cli: &Cli) -> Result<Report, Failure> {
    let g = &cli.global;
    let depth = g.depth as usize;
    let cap = g.cap as usize;
    let (report, spec_path, name) = match &cli.command {
        Command::Decompose(s) => (
            decompose(&load(&s.spec, g.bit_cap)?.diagram)?,
            Some(&s.spec),
            "decompose",
        ),
        Command::Ergodicity(s) => (
            ergodicity(&load(&s.spec, g.bit_cap)?.diagram, depth, g.tau_threshold)?,
            Some(&s.spec),
            "ergodicity",
        ),
        Command::Measures(s) => (
            measures(&load(&s.spec, g.bit_cap)?.diagram, depth, g.eps)?,
            Some(&s.spec),
            "measures",
        ),
        Command::ExactRank { spec, cluster } => (
            exact_rank(
                &load(&spec.spec, g.bit_cap)?.diagram,
                depth,
                g.eps,
                *cluster,
            )?,
            Some(&spec.spec),
            "exact-rank",
        ),
        Command::Extend {
            spec,
            sub,
            criterion,
            cluster,
        } => {
            let d = load(&spec.spec, g.bit_cap)?.diagram;
            let criterion = match criterion {
                Some(c) => Some(
                    Criterion::parse(c)
                        .ok_or_else(|| Failure::Input(format!("unknown criterion {c:?}")))?,
                ),
                None => None,
            };
            (
                extend(&d, sub, criterion, *cluster, depth, g.eps)?,
                Some(&spec.spec),
                "extend",
            )
        }
        Command::Odometer { spec, path, prefix } => {
            let d = load(&spec.spec, g.bit_cap)?.diagram;
            let schedule = VertexSchedule::path(vertices(&d, prefix)?, vertices(&d, path)?);
            let r = odometer_extension_report(&d, &schedule, depth)?;
            (extension_output(&r), Some(&spec.spec), "odometer")
        }
        Command::Linrec { spec, sub, horizon } => {
            let d = load(&spec.spec, g.bit_cap)?.diagram;
            (linrec(&d, sub, *horizon)?, Some(&spec.spec), "linrec")
        }
        Command::Word {
            spec,
            vertex,
            level,
            factors,
            out,
        } => {
            let l = load(&spec.spec, g.bit_cap)?;
            (
                word(&l, vertex, *level, factors, out.as_deref(), cap)?,
                Some(&spec.spec),
                "word",
            )
        }
        Command::Correlate {
            spec,
            vertex,
            level,
            q,
        } => {
            let l = load(&spec.spec, g.bit_cap)?;
            (
                correlate(&l, vertex, *level, q.as_deref(), cap)?,
                Some(&spec.spec),
                "correlate",
            )
        }
        Command::Morse { k, blocks } => (morse(*k, blocks)?, None, "morse"),
    };
    if g.bless {
        let spec = spec_path.ok_or_else(|| Failure::Input("--bless needs a spec file".into()))?;
        let path = fixture_path(spec, name);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)
                .map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
        }
        fs::write(&path, report.json_text())
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(report)
}

fn decompose(d: &Diagram) -> Result<Report, Failure> {
    let form = canonical_form(d, DEFAULT_PROBE_DEPTH)?;
    let kinds: Vec<&str> = form.kinds.iter().map(|k| k.name()).collect();
    let json = json!({
        "permutation": form.permutation,
        "blocks": form.blocks,
        "kinds": kinds,
        "n0": form.stabilization_level,
        "period": form.period,
        "telescoping_step": form.telescoping_step,
        "levelwise": form.levelwise,
        "minimal_components": form.minimal_components(),
        "simple": form.is_simple(),
    });
    let name = |v: &usize| d.vertex_name(*v);
    let mut rows = vec![vec!["block".to_string(), "kind".into(), "vertices".into()]];
    for (i, (b, k)) in form.blocks.iter().zip(&kinds).enumerate() {
        rows.push(vec![
            i.to_string(),
            k.to_string(),
            b.iter().map(name).collect::<Vec<_>>().join(","),
        ]);
    }
    let mut t = table(&rows);
    let _ = writeln!(
        t,
        "permutation {:?}, stable from level {}, period {}, telescoping step {}",
        form.permutation, form.stabilization_level, form.period, form.telescoping_step
    );
    Ok(Report { json, table: t })
}

fn ergodicity(d: &Diagram, depth: usize, threshold: f64) -> Result<Report, Failure> {
    let verdict = ergodicity_verdict(d, depth, threshold)?;
    let profile = tau_profile(d, depth)?;
    let json = json!({
        "verdict": verdict_json(&verdict),
        "tau_profile": profile.iter().map(|c| json!({
            "depth": c.depth,
            "base": c.base,
            "tau": real(c.stats.tau),
            "theta": real(c.stats.theta),
            "phi": c.stats.phi.render(),
        })).collect::<Vec<_>>(),
    });
    let mut rows = vec![vec![
        "depth".to_string(),
        "base".into(),
        "tau".into(),
        "theta".into(),
    ]];
    for c in &profile {
        rows.push(vec![
            c.depth.to_string(),
            c.base.to_string(),
            short(c.stats.tau),
            short(c.stats.theta),
        ]);
    }
    Ok(Report {
        json,
        table: verdict_table(&verdict) + &table(&rows),
    })
}

fn measures(d: &Diagram, depth: usize, eps: f64) -> Result<Report, Failure> {
    let ms = invariant_measures(d, depth, eps)?;
    let shown: Vec<usize> = (1..=depth.min(TABLE_LEVELS)).collect();
    let mut items = Vec::new();
    let mut t = format!("{} measure(s) at depth {depth}\n", ms.len());
    for (i, mu) in ms.iter().enumerate() {
        let supports = mu.support(SUPPORT_THRESHOLD);
        let mut levels = Vec::new();
        let mut rows = vec![vec!["level".to_string(), "p".into(), "tower masses".into()]];
        for &n in &shown {
            let p = mu.p_f64(n)?;
            let masses = mu.tower_masses_f64(n)?;
            levels.push(json!({
                "level": n,
                "p": reals(&p),
                "masses": reals(&masses),
                "support": supports[n - 1],
            }));
            let fmt = |v: &[f64]| v.iter().map(|x| short(*x)).collect::<Vec<_>>().join(" ");
            rows.push(vec![n.to_string(), fmt(&p), fmt(&masses)]);
        }
        let direction: Vec<f64> = mu.terminal_direction.iter().map(rat_to_f64).collect();
        items.push(json!({
            "cluster": mu.cluster,
            "cluster_level": mu.cluster_level,
            "cluster_diameter": real(mu.cluster_diameter),
            "error_certificate": real(mu.error_certificate),
            "terminal_direction": reals(&direction),
            "levels": levels,
        }));
        let _ = writeln!(
            t,
            "measure {i}: columns {:?} at level {}, certificate {}",
            mu.cluster,
            mu.cluster_level,
            short(mu.error_certificate)
        );
        t += &table(&rows);
    }
    let json = json!({ "depth": depth, "count": ms.len(), "measures": items });
    Ok(Report { json, table: t })
}

fn exact_rank(
    d: &Diagram,
    depth: usize,
    eps: f64,
    cluster: Option<usize>,
) -> Result<Report, Failure> {
    let r = exact_rank_report(d, depth, eps, cluster)?;
    let json = json!({
        "cluster": r.cluster,
        "min_mass": real(r.min_mass),
        "best_step": r.best_step,
        "profile": reals(&r.profile),
        "certificate": r.certificate.as_ref().map(|c| json!({
            "rule": c.rule,
            "bound": c.bound.as_ref().map(rational),
        })),
        "verdict": verdict_json(&r.verdict),
    });
    let mut rows = vec![vec!["level".to_string(), "min tower mass".into()]];
    for n in sample_levels(r.profile.len()) {
        rows.push(vec![n.to_string(), short(r.profile[n - 1])]);
    }
    let t = verdict_table(&r.verdict)
        + &format!("min mass {} (step {})\n", short(r.min_mass), r.best_step)
        + &table(&rows);
    Ok(Report { json, table: t })
}

fn extend(
    d: &Diagram,
    sub: &str,
    criterion: Option<Criterion>,
    cluster: Option<usize>,
    depth: usize,
    eps: f64,
) -> Result<Report, Failure> {
    let spec = SubdiagramSpec::constant(vertices(d, sub)?);
    let restricted = induced_subdiagram(d, &spec)?;
    let mut ms = invariant_measures(&restricted, depth, eps)?;
    let index = match (cluster, ms.len()) {
        (Some(i), n) if i < n => i,
        (Some(i), n) => {
            return Err(Failure::Input(format!(
                "cluster {i} requested but only {n} found"
            )))
        }
        (None, 1) => 0,
        (None, n) => return Err(bratteli::Error::MultipleMeasures { count: n }.into()),
    };
    let mu = ms.swap_remove(index);
    let r = extension_report_with(d, &spec, &mu, depth, criterion)?;
    Ok(extension_output(&r))
}

fn extension_output(r: &ExtensionReport) -> Report {
    let i_n: Vec<f64> = r.i_n.iter().map(rat_to_f64).collect();
    let json = json!({
        "criterion": r.criterion.name(),
        "verdict": verdict_json(&r.verdict),
        "term_bound": r.term_bound.as_ref().map(|b| b.render()),
        "partial_sums": reals(&r.partial_sums),
        "lower_sums": r.lower_sums.as_deref().map(reals),
        "i_n": reals(&i_n),
        "mass_estimate": real(r.mass_estimate()),
    });
    let mut rows = vec![vec![
        "level".to_string(),
        "I_n".into(),
        "partial sum".into(),
    ]];
    for n in sample_levels(i_n.len()) {
        let partial = if n >= 2 {
            short(r.partial_sums[n - 2])
        } else {
            "-".into()
        };
        rows.push(vec![n.to_string(), short(i_n[n - 1]), partial]);
    }
    let mut t = format!("criterion: {}\n", r.criterion.name());
    t += &verdict_table(&r.verdict);
    if let Some(b) = &r.term_bound {
        let _ = writeln!(t, "term bound: {}", b.render());
    }
    t += &table(&rows);
    Report { json, table: t }
}

fn profile_json(p: &LinRecProfile) -> Value {
    let dens = &p.densities;
    let densities = match (&dens.exact_letters, &dens.exact_pairs) {
        (Some(l), Some(pairs)) => json!({
            "letters": l.iter().map(rational).collect::<Vec<_>>(),
            "pairs": pairs.iter().map(|((a, b), v)| json!([a, b, rational(v)])).collect::<Vec<_>>(),
        }),
        _ => json!({
            "letters": reals(&dens.letters),
            "pairs": dens.pairs.iter().map(|((a, b), v)| json!([a, b, real(*v)])).collect::<Vec<_>>(),
            "horizon": dens.horizon,
        }),
    };
    json!({
        "letters": p.alphabet.iter().map(|m| (0..m.rows()).map(|i| m.row(i).iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "perron": p.perron.iter().map(|x| json!({
            "rho": real(x.rho),
            "bracket": [real(x.rho_bounds.0), real(x.rho_bounds.1)],
            "vector": reals(&x.vector),
            "exact": x.exact.as_ref().map(|(r, v)| json!({
                "rho": r.to_string(),
                "vector": v.iter().map(rational).collect::<Vec<_>>(),
            })),
        })).collect::<Vec<_>>(),
        "densities": densities,
        "regular": dens.regular,
        "rho_upper": real(p.rho_upper()),
        "rho_lower": real(p.rho_lower()),
        "norm_roots": reals(&p.norm_roots),
    })
}

fn linrec(d: &Diagram, sub: &str, horizon: usize) -> Result<Report, Failure> {
    let w = vertices(d, sub)?;
    let r = linrec_two_block(d, &w, horizon)?;
    let json = json!({
        "verdict": verdict_json(&r.verdict),
        "complement": profile_json(&r.d_profile),
        "subdiagram": profile_json(&r.c_profile),
    });
    let rows = vec![
        vec![
            "block".to_string(),
            "rho lower".into(),
            "rho upper".into(),
            "regular".into(),
        ],
        vec![
            "complement".into(),
            short(r.d_profile.rho_lower()),
            short(r.d_profile.rho_upper()),
            r.d_profile.densities.regular.to_string(),
        ],
        vec![
            "subdiagram".into(),
            short(r.c_profile.rho_lower()),
            short(r.c_profile.rho_upper()),
            r.c_profile.densities.regular.to_string(),
        ],
    ];
    Ok(Report {
        json,
        table: verdict_table(&r.verdict) + &table(&rows),
    })
}

fn word(
    l: &Loaded,
    vertex: &str,
    level: usize,
    factors: &[String],
    out: Option<&Path>,
    cap: usize,
) -> Result<Report, Failure> {
    let d = &l.diagram;
    let order = l.ordering.clone().unwrap_or(Ordering::Consecutive);
    let v = d.vertex_by_name(vertex)?;
    let factors: Vec<Vec<usize>> = factors
        .iter()
        .map(|f| parse_word(f))
        .collect::<bratteli::Result<_>>()?;
    let f = frequency_report(d, &order, v, level, &factors, cap)?;
    let json = json!({
        "vertex": v,
        "level": level,
        "full_length": f.full_length.to_string(),
        "generated": f.generated,
        "truncated": f.truncated,
        "exact": f.exact.iter().map(rational).collect::<Vec<_>>(),
        "empirical": reals(&f.empirical),
        "max_difference": real(f.max_difference),
        "factors": f.factors.iter().map(|c| json!({
            "factor": render_word(&c.factor).unwrap_or_default(),
            "count": c.count,
            "frequency": real(c.frequency),
        })).collect::<Vec<_>>(),
    });
    let mut t = String::new();
    match out {
        Some(path) => {
            let w = expand_word(d, &order, v, level, cap)?;
            let text = render_word(&w.symbols)?;
            fs::write(path, text)
                .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            let mut sidecar = path.as_os_str().to_owned();
            sidecar.push(".json");
            let body = serde_json::to_string_pretty(&json).expect("serializable") + "\n";
            fs::write(&sidecar, body).map_err(|e| Failure::Input(format!("{:?}: {e}", sidecar)))?;
        }
        None => {
            let w = expand_word(d, &order, v, level, cap)?;
            t += &render_word(&w.symbols)?;
            t.push('\n');
        }
    }
    let mut rows = vec![vec![
        "symbol".to_string(),
        "exact".into(),
        "empirical".into(),
    ]];
    for (s, (e, x)) in f.exact.iter().zip(&f.empirical).enumerate() {
        rows.push(vec![d.vertex_name(s), short(rat_to_f64(e)), short(*x)]);
    }
    for c in &f.factors {
        rows.push(vec![
            render_word(&c.factor).unwrap_or_default(),
            "-".into(),
            short(c.frequency),
        ]);
    }
    let _ = writeln!(
        t,
        "length {} (generated {}{})",
        f.full_length,
        f.generated,
        if f.truncated { ", truncated" } else { "" }
    );
    t += &table(&rows);
    Ok(Report { json, table: t })
}

fn correlate(
    l: &Loaded,
    vertex: &str,
    level: usize,
    q: Option<&str>,
    cap: usize,
) -> Result<Report, Failure> {
    let d = &l.diagram;
    let order = l.ordering.clone().unwrap_or(Ordering::Consecutive);
    let v = d.vertex_by_name(vertex)?;
    let qs = match q {
        Some(text) => Some(
            text.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<u64>()
                        .map_err(|e| Failure::Input(format!("lag {s:?}: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?,
        ),
        None => None,
    };
    let r = correlation_report(d, &order, v, level, qs.as_deref(), cap)?;
    let json = json!({
        "vertex": r.vertex,
        "level": r.level,
        "word_level": r.word_level,
        "generated": r.generated,
        "mass": real(r.mass),
        "rows": r.rows.iter().map(|x| json!({"q": x.q, "estimate": real(x.estimate), "ratio": real(x.ratio)})).collect::<Vec<_>>(),
    });
    let mut rows = vec![vec!["q".to_string(), "estimate".into(), "ratio".into()]];
    for x in &r.rows {
        rows.push(vec![x.q.to_string(), short(x.estimate), short(x.ratio)]);
    }
    let t = format!(
        "tower mass {} from {} symbols at level {}\n",
        short(r.mass),
        r.generated,
        r.word_level
    ) + &table(&rows);
    Ok(Report { json, table: t })
}

fn morse(k: usize, blocks: &[String]) -> Result<Report, Failure> {
    let parsed: Vec<Vec<usize>> = blocks
        .iter()
        .map(|b| {
            b.chars()
                .map(|c| {
                    c.to_digit(36)
                        .map(|x| x as usize)
                        .ok_or_else(|| Failure::Input(format!("block {b:?}: bad symbol {c:?}")))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let m = morse_diagram(k, &parsed)?;
    let json = json!({
        "spec": spec_value(&m.diagram, Some(&m.ordering)),
        "min_frequencies": m.min_frequencies.iter().map(rational).collect::<Vec<_>>(),
        "verdict": verdict_json(&m.verdict),
    });
    let mut t = verdict_table(&m.verdict);
    for (b, f) in blocks.iter().zip(&m.min_frequencies) {
        let _ = writeln!(t, "block {b}: min frequency {f}");
    }
    Ok(Report { json, table: t })
}
