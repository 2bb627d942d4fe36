//! Graph-directed fractal interpolation functions.
//!
//! Given `n` planar data sets and a wiring that says, for every interval of
//! every data set, which data set it is copied from, this crate builds the
//! graph-directed system of affine maps whose attractors are the graphs of
//! `n` continuous interpolants. The interpolants are computed two ways:
//!
//! * as the fixed point of the Read-Bajraktarević style operator on a product
//!   of sampled function spaces ([`funcspace`]), and
//! * as point clouds from set-valued (Hutchinson) iteration or the chaos game
//!   ([`attractor`]).
//!
//! Vertex indices are zero-based throughout this crate. File formats and the
//! command-line front end (in the `gdfif` crate) present them one-based.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod attractor;
pub mod funcspace;
pub mod maps;
pub mod model;

mod geom;
mod hausdorff;

pub use attractor::{
    chaos_game, graph_hausdorff, hutchinson_step, iterate_attractor, AttractorCloud, AttractorError,
    DEFAULT_MAX_POINTS,
};
pub use funcspace::{
    apply_t, evaluate_exact, family_distance, fixed_point, initial_family, interpolation_residual,
    sample_grid, sup_distance, FixedPoint, FuncSpaceError, FunctionFamily, SampledFunction,
};
pub use geom::Point;
pub use hausdorff::{directed_hausdorff, hausdorff_distance, HausdorffError};
pub use maps::{apply_map, build_system, endpoint_residuals, AffineMap, BuildError, GifsSystem};
pub use model::{
    edge_counts, validate, DataSet, IntervalAssignment, StructuralError,
    ValidationReport, Violation, ViolationCode, WidthCheckMode, WiringPlan,
};
