//! Uniformity-driven data selection and the numerics behind it.
//!
//! The crate selects maximally spread subsets of embedded datasets (greedy
//! max-min / farthest-point sampling plus baselines) and numerically verifies
//! the theory that motivates the selection rule: probabilistic bounds on the
//! minimum pairwise distance h_min, the dependence of gradient-descent
//! convergence on the frame lower bound μ_low and on h_min, and a
//! data-dependent simplex-interpolation error estimate.
//!
//! Start with the runnable examples — one per capability:
//!
//! ```text
//! cargo run --example embed_and_select        # JSONL → embeddings → subset selection
//! cargo run --example selection_strategies    # max-min vs random/min-distance/mixed
//! cargo run --example pca_projection          # PCA + min-max scaling of subsets
//! cargo run --example hmin_bounds_montecarlo  # Monte Carlo check of the h_min bounds
//! cargo run --example delaunay_mesh           # Bowyer–Watson mesh + circumcircle audit
//! cargo run --example interpolation_order     # piecewise-linear error order sweep
//! cargo run --example gd_convergence_probes   # GD with μ_low / smoothness probes
//! cargo run --example hmin_slowdown_sweep     # planted-pair h_min vs steps-to-threshold
//! ```
//!
//! The same capabilities are scriptable through the thin `unilab` binary
//! (`select`, `stats`, `bounds`, `train`, `approx`, `project`, `mesh`,
//! `sweep`); see the repository README for flags and file formats.

pub mod approx;
pub mod bounds;
pub mod error;
pub mod geometry;
pub mod ingest;
pub mod linalg;
pub mod network;
pub mod projection;
pub mod selection;
pub mod trainer;

pub use error::{Error, Result};

pub mod cli;
