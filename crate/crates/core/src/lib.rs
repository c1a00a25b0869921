//! Finite-rank Bratteli diagrams: exact level arithmetic, canonical forms,
//! projective contraction, invariant measures, and the associated adic
//! transformations.

pub mod contraction;
pub mod decomposition;
pub mod diagram;
pub mod error;
pub mod generator;
pub mod linrec;
pub mod matrix;
pub mod measures;
pub mod poly;
pub mod spec;
pub mod verdict;
pub mod vershik;

pub use diagram::{Diagram, StochasticMatrix, DEFAULT_BIT_CAP};
pub use error::{Error, Result};
pub use generator::{GeneratorKind, IncidenceGenerator, SymbolStream, Tail, VertexSchedule};
pub use matrix::{BoolMatrix, IntMatrix, LogMatrix};
pub use poly::{Poly, RatPoly};
pub use verdict::{Claim, Evidence, Verdict};
