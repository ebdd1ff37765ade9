//! Compositions, hyperbolic polynomials and the strata of sets of hyperbolic
//! polynomials that share their leading coefficients.

pub mod compositions;
pub mod config;
pub mod error;
pub mod example;
pub mod polynomials;
pub mod sampling;
pub mod solver;
pub mod stratify;
pub mod subresultants;
pub mod vandermonde;

pub use compositions::{Composition, PartialSumSet};
pub use config::Config;
pub use error::{Error, Result};
pub use polynomials::{MonicPoly, RootMultiset, SymFuncVector, SymKind};
pub use sampling::{GridSpec, Sample, SampleSet, Sampler};
pub use subresultants::{Certificate, SubdiscriminantSequence};
pub use stratify::{AlgorithmRun, LatticeReport, OccurrenceTable, StratumElement, StratumLattice};
pub use vandermonde::{StratumClass, StratumSolver, StratumTag, VandermondeSystem};
