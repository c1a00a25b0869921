//! JSON diagram documents.
//!
//! The layout is documented in `docs/spec-format.md`. Serialization is
//! canonical: keys are sorted and no floating-point numbers appear.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::diagram::Diagram;
use crate::error::{Error, Result};
use crate::generator::{GeneratorKind, IncidenceGenerator, SymbolStream, Tail, VertexSchedule};
use crate::matrix::IntMatrix;
use crate::poly::Poly;
use crate::vershik::{OrderTail, Ordering};

/// A parsed document: the diagram plus its optional edge ordering.
#[derive(Debug, Clone)]
pub struct SpecDocument {
    pub diagram: Diagram,
    pub ordering: Option<Ordering>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct DocRaw {
    rank: usize,
    generator: GeneratorRaw,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ordering: Option<OrderingRaw>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct GeneratorRaw {
    kind: String,
    payload: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    start_level: Option<usize>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(untagged)]
enum OrderingRaw {
    Named(String),
    Levels(OrderingLevelsRaw),
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct OrderingLevelsRaw {
    levels: Vec<Vec<Vec<usize>>>,
    #[serde(default = "default_order_tail")]
    tail: String,
}

fn default_order_tail() -> String {
    "repeat-last".into()
}

type MatrixRaw = Vec<Vec<i64>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StationaryRaw {
    matrix: MatrixRaw,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ListRaw {
    matrices: Vec<MatrixRaw>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplicitRaw {
    matrices: Vec<MatrixRaw>,
    #[serde(default = "default_tail")]
    tail: Value,
}

fn default_tail() -> Value {
    Value::String("repeat-last".into())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceRaw {
    #[serde(default)]
    prefix: Vec<usize>,
    #[serde(default)]
    cycle: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SubstitutionRaw {
    images: Vec<Vec<usize>>,
    start: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SymbolRaw {
    alphabet: Vec<MatrixRaw>,
    #[serde(default)]
    sequence: Option<SequenceRaw>,
    #[serde(default)]
    substitution: Option<SubstitutionRaw>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParametricRaw {
    entries: Vec<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TelescopedRaw {
    base: GeneratorRaw,
    from: usize,
    step: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RestrictedRaw {
    base: GeneratorRaw,
    schedule: ScheduleRaw,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ScheduleRaw {
    #[serde(default)]
    prefix: Vec<Vec<usize>>,
    cycle: Vec<Vec<usize>>,
}

fn schema(field: &str, err: impl std::fmt::Display) -> Error {
    Error::Schema {
        line: 0,
        column: 0,
        message: format!("{field}: {err}"),
    }
}

fn from_json_error(e: serde_json::Error) -> Error {
    Error::Schema {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn payload<T: for<'de> Deserialize<'de>>(kind: &str, v: &Value) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| schema(&format!("generator.payload ({kind})"), e))
}

fn matrix(rank: usize, raw: &MatrixRaw, field: &str) -> Result<IntMatrix> {
    if raw.len() != rank {
        return Err(Error::RankMismatch {
            field: field.into(),
            rank,
            found: raw.len(),
        });
    }
    let mut rows = Vec::with_capacity(rank);
    for row in raw {
        if row.len() != rank {
            return Err(Error::RankMismatch {
                field: field.into(),
                rank,
                found: row.len(),
            });
        }
        let mut out = Vec::with_capacity(rank);
        for &x in row {
            if x < 0 {
                return Err(Error::NegativeCoefficient(format!("{field}: {x}")));
            }
            out.push(x as u64);
        }
        rows.push(out);
    }
    IntMatrix::from_rows(&rows)
}

fn generator(rank: usize, raw: &GeneratorRaw) -> Result<IncidenceGenerator> {
    let kind = match raw.kind.as_str() {
        "stationary" => {
            let p: StationaryRaw = payload(&raw.kind, &raw.payload)?;
            GeneratorKind::Stationary(matrix(rank, &p.matrix, "matrix")?)
        }
        "periodic" => {
            let p: ListRaw = payload(&raw.kind, &raw.payload)?;
            GeneratorKind::Periodic(
                p.matrices
                    .iter()
                    .map(|m| matrix(rank, m, "matrices"))
                    .collect::<Result<_>>()?,
            )
        }
        "explicit" => {
            let p: ExplicitRaw = payload(&raw.kind, &raw.payload)?;
            let matrices = p
                .matrices
                .iter()
                .map(|m| matrix(rank, m, "matrices"))
                .collect::<Result<_>>()?;
            GeneratorKind::Explicit {
                matrices,
                tail: tail(rank, &p.tail)?,
            }
        }
        "symbol-sequence" => {
            let p: SymbolRaw = payload(&raw.kind, &raw.payload)?;
            let alphabet = p
                .alphabet
                .iter()
                .map(|m| matrix(rank, m, "alphabet"))
                .collect::<Result<_>>()?;
            let omega = match (p.sequence, p.substitution) {
                (Some(s), None) => SymbolStream::Periodic {
                    prefix: s.prefix,
                    cycle: s.cycle,
                },
                (None, Some(s)) => SymbolStream::Substitution {
                    images: s.images,
                    start: s.start,
                },
                _ => {
                    return Err(schema(
                        "generator.payload (symbol-sequence)",
                        "exactly one of `sequence` or `substitution` is required",
                    ))
                }
            };
            GeneratorKind::SymbolSequence { alphabet, omega }
        }
        "parametric" => {
            let p: ParametricRaw = payload(&raw.kind, &raw.payload)?;
            if p.entries.len() != rank {
                return Err(Error::RankMismatch {
                    field: "entries".into(),
                    rank,
                    found: p.entries.len(),
                });
            }
            let mut grid = Vec::with_capacity(rank);
            for row in &p.entries {
                if row.len() != rank {
                    return Err(Error::RankMismatch {
                        field: "entries".into(),
                        rank,
                        found: row.len(),
                    });
                }
                grid.push(
                    row.iter()
                        .map(|s| Poly::parse(s))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            GeneratorKind::Parametric(grid)
        }
        other => return Err(schema("generator.kind", format!("unknown kind {other:?}"))),
    };
    let g = IncidenceGenerator {
        kind,
        start_level: raw.start_level.unwrap_or(1),
    };
    if g.start_level == 0 {
        return Err(schema("generator.start_level", "must be positive"));
    }
    Ok(g)
}

fn tail(rank: usize, v: &Value) -> Result<Tail> {
    if let Value::String(s) = v {
        return match s.as_str() {
            "repeat-last" => Ok(Tail::RepeatLast),
            "cycle" => Ok(Tail::Cycle),
            "stop" => Ok(Tail::Stop),
            other => Err(schema("tail", format!("unknown tail rule {other:?}"))),
        };
    }
    let obj = v
        .as_object()
        .ok_or_else(|| schema("tail", "expected a string or an object"))?;
    if obj.len() != 1 {
        return Err(schema("tail", "expected exactly one key"));
    }
    let (key, inner) = obj.iter().next().expect("one key");
    match key.as_str() {
        "telescoped" => {
            let t: TelescopedRaw =
                serde_json::from_value(inner.clone()).map_err(|e| schema("tail.telescoped", e))?;
            if t.step == 0 || t.from == 0 {
                return Err(schema("tail.telescoped", "from and step must be positive"));
            }
            Ok(Tail::Telescoped {
                base: Box::new(generator(rank, &t.base)?),
                from: t.from,
                step: t.step,
            })
        }
        "restricted" => {
            let t: RestrictedRaw =
                serde_json::from_value(inner.clone()).map_err(|e| schema("tail.restricted", e))?;
            let schedule = VertexSchedule {
                prefix: t.schedule.prefix,
                cycle: t.schedule.cycle,
            };
            let base_rank = base_rank(&t.base).unwrap_or(rank);
            schedule.validate(base_rank)?;
            Ok(Tail::Restricted {
                base: Box::new(generator(base_rank, &t.base)?),
                schedule,
            })
        }
        other => Err(schema("tail", format!("unknown tail rule {other:?}"))),
    }
}

/// Rank of a nested base generator, read off its payload.
fn base_rank(raw: &GeneratorRaw) -> Option<usize> {
    let p = &raw.payload;
    let first = |key: &str| {
        p.get(key)
            .and_then(|m| m.as_array())
            .and_then(|a| a.first())
            .cloned()
    };
    match raw.kind.as_str() {
        "stationary" => p.get("matrix").and_then(|m| m.as_array()).map(|a| a.len()),
        "periodic" | "explicit" => first("matrices").and_then(|m| m.as_array().map(|a| a.len())),
        "symbol-sequence" => first("alphabet").and_then(|m| m.as_array().map(|a| a.len())),
        "parametric" => p.get("entries").and_then(|m| m.as_array()).map(|a| a.len()),
        _ => None,
    }
}

/// Parse a document and keep only the diagram.
pub fn parse_spec(text: &str) -> Result<Diagram> {
    Ok(parse_document(text)?.diagram)
}

/// Parse a document including its ordering.
pub fn parse_document(text: &str) -> Result<SpecDocument> {
    let raw: DocRaw = serde_json::from_str(text).map_err(from_json_error)?;
    let g = generator(raw.rank, &raw.generator)?;
    let mut diagram = Diagram::new(raw.rank, g)?;
    if let Some(labels) = raw.labels {
        diagram = diagram.with_labels(labels)?;
    }
    let ordering = match raw.ordering {
        None => None,
        Some(OrderingRaw::Named(s)) if s == "consecutive" => Some(Ordering::Consecutive),
        Some(OrderingRaw::Named(s)) => {
            return Err(schema("ordering", format!("unknown ordering {s:?}")))
        }
        Some(OrderingRaw::Levels(l)) => {
            let tail = match l.tail.as_str() {
                "repeat-last" => OrderTail::RepeatLast,
                "cycle" => OrderTail::Cycle,
                other => return Err(schema("ordering.tail", format!("unknown tail {other:?}"))),
            };
            if l.levels.is_empty() {
                return Err(schema("ordering.levels", "at least one level is required"));
            }
            for level in &l.levels {
                if level.len() != raw.rank {
                    return Err(Error::RankMismatch {
                        field: "ordering.levels".into(),
                        rank: raw.rank,
                        found: level.len(),
                    });
                }
            }
            Some(Ordering::Explicit {
                levels: l.levels,
                tail,
            })
        }
    };
    Ok(SpecDocument { diagram, ordering })
}

fn matrix_json(m: &IntMatrix) -> Value {
    Value::Array(
        m.to_rows()
            .into_iter()
            .map(|row| {
                Value::Array(
                    row.into_iter()
                        .map(|x| match u64::try_from(&x) {
                            Ok(v) => json!(v),
                            Err(_) => Value::String(x.to_string()),
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

fn generator_json(g: &IncidenceGenerator) -> Value {
    let (kind, payload) = match &g.kind {
        GeneratorKind::Stationary(m) => ("stationary", json!({ "matrix": matrix_json(m) })),
        GeneratorKind::Periodic(list) => (
            "periodic",
            json!({ "matrices": list.iter().map(matrix_json).collect::<Vec<_>>() }),
        ),
        GeneratorKind::Explicit { matrices, tail } => {
            let tail = match tail {
                Tail::RepeatLast => json!("repeat-last"),
                Tail::Cycle => json!("cycle"),
                Tail::Stop => json!("stop"),
                Tail::Telescoped { base, from, step } => json!({
                    "telescoped": { "base": generator_json(base), "from": from, "step": step }
                }),
                Tail::Restricted { base, schedule } => json!({
                    "restricted": {
                        "base": generator_json(base),
                        "schedule": { "prefix": schedule.prefix, "cycle": schedule.cycle }
                    }
                }),
            };
            (
                "explicit",
                json!({ "matrices": matrices.iter().map(matrix_json).collect::<Vec<_>>(), "tail": tail }),
            )
        }
        GeneratorKind::SymbolSequence { alphabet, omega } => {
            let alphabet: Vec<Value> = alphabet.iter().map(matrix_json).collect();
            let p = match omega {
                SymbolStream::Periodic { prefix, cycle } => json!({
                    "alphabet": alphabet, "sequence": { "prefix": prefix, "cycle": cycle }
                }),
                SymbolStream::Substitution { images, start } => json!({
                    "alphabet": alphabet, "substitution": { "images": images, "start": start }
                }),
            };
            ("symbol-sequence", p)
        }
        GeneratorKind::Parametric(grid) => {
            let entries: Vec<Vec<String>> = grid
                .iter()
                .map(|row| row.iter().map(|p| p.to_string()).collect())
                .collect();
            ("parametric", json!({ "entries": entries }))
        }
    };
    let mut out = json!({ "kind": kind, "payload": payload });
    if g.start_level != 1 {
        out["start_level"] = json!(g.start_level);
    }
    out
}

/// Canonical JSON value for a diagram (and optional ordering).
pub fn spec_value(diagram: &Diagram, ordering: Option<&Ordering>) -> Value {
    let mut out = json!({
        "rank": diagram.rank(),
        "generator": generator_json(diagram.generator()),
    });
    if let Some(labels) = diagram.labels() {
        out["labels"] = json!(labels);
    }
    match ordering {
        Some(Ordering::Consecutive) => out["ordering"] = json!("consecutive"),
        Some(Ordering::Explicit { levels, tail }) => {
            let tail = match tail {
                OrderTail::RepeatLast => "repeat-last",
                OrderTail::Cycle => "cycle",
            };
            out["ordering"] = json!({ "levels": levels, "tail": tail });
        }
        None => {}
    }
    out
}

/// Canonical pretty-printed document with sorted keys.
pub fn serialize_spec(diagram: &Diagram, ordering: Option<&Ordering>) -> String {
    let mut s = serde_json::to_string_pretty(&spec_value(diagram, ordering)).expect("json");
    s.push('\n');
    s
}
