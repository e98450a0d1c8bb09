//! Fourier quasicrystals with discrete, non-uniformly-discrete support and
//! spectrum, built at finite truncation from a planar lattice and a pair of
//! staircase regions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod construction;
pub mod lattice;
pub mod measures;
pub mod paley_wiener;
pub mod progressions;
pub mod regions;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use construction::{
    run_construction, ConstructionConfig, ConstructionError, ConstructionState, FunctionExpr, StageReport, StateData,
};
pub use lattice::{AlgebraicReal, Lattice2D, LatticeBox, LatticePoint, Projection};
pub use measures::{AtomicMeasure, Enumeration, MeasureError, PsfReport, TestFunction};
pub use paley_wiener::{PwError, SchwartzInterpolant, TimeFunction};
pub use progressions::{Ap, ApError};
pub use regions::{GeneratedSet, IntervalUnion, Part, RegionError, SetKind, StaircaseSequences};
