//! Model-agnostic variable importance and variable interaction (VIVI) toolkit.
//!
//! The crate computes per-variable importance and pairwise interaction for any
//! supervised-learning fit, assembles them into a symmetric VIVI matrix,
//! reorders and filters that matrix, and compiles four display types
//! (heatmap, network, partial-dependence pairs matrix, zigzag
//! partial-dependence trail) to deterministic SVG and JSON.
//!
//! Pipeline overview:
//!
//! 1. [`tabular`]: load a CSV into a typed [`tabular::Table`].
//! 2. [`models`]: fit a built-in kNN or random forest, or wrap any external
//!    model behind the line-oriented subprocess protocol.
//! 3. [`pdp`]: partial dependence curves and surfaces, ICE curves, convex
//!    hull masks, classification link transforms.
//! 4. [`vivi`]: permutation importance and the interaction statistic
//!    (root-mean-square of the joint-minus-marginal partial dependence
//!    residual, plus the normalized squared variant), assembled into a
//!    [`vivi::ViviMatrix`].
//! 5. [`arrange`]: hierarchical clustering of interactions and weighted leaf
//!    sorting, yielding a display ordering.
//! 6. [`netgraph`]: thresholded interaction graphs, node clustering, and
//!    greedy Eulerian trails for the zigzag display.
//! 7. [`plotspec`]: renderer-independent plot descriptions and the SVG/JSON
//!    compilers.
//! 8. [`simbench`]: the Friedman benchmark generator used by the test suite.
//!
//! All randomized steps take explicit 64-bit seeds and are bitwise
//! reproducible; parallel execution never changes results.

pub mod arrange;
pub mod error;
pub mod models;
pub mod netgraph;
pub mod pdp;
pub mod plotspec;
pub mod rng;
pub mod simbench;
pub mod tabular;
pub mod vivi;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
