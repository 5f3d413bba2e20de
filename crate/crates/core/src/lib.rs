//! Sparse filtrations for approximate persistent homology of point clouds.
//!
//! A greedy permutation orders the points; each point's ball grows until it
//! is covered by coarser points and is then removed. The nerve of these
//! truncated balls (Rips or Čech flavor) has linear size in doubling spaces
//! and its barcode is a `(1+eps)`-approximation of the full one.
//!
//! ```
//! use sparse_nerve::{greedy::greedy_permutation, metric::{MetricKind, PointCloud}};
//! use sparse_nerve::{persistence::compute_barcode, simplex_enum::{build_filtration, Flavor}};
//! use sparse_nerve::sparse_balls::SparseParams;
//!
//! let cloud = PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]], MetricKind::L2)?;
//! let gp = greedy_permutation(&cloud, 0)?;
//! let params = SparseParams::new(&cloud, &gp, 0.5)?;
//! let fc = build_filtration(&params, 2, Flavor::Rips)?;
//! let barcode = compute_barcode(&fc)?;
//! assert_eq!(barcode.in_dim(0).filter(|i| i.death.is_infinite()).count(), 1);
//! # Ok::<(), sparse_nerve::Error>(())
//! ```

pub mod cli;
pub mod collapse;
pub mod error;
pub mod generate;
pub mod geometry;
pub mod greedy;
pub mod metric;
pub mod neighbor_graph;
pub mod persistence;
pub mod sampling;
pub mod simplex_enum;
pub mod sparse_balls;

pub use error::{Error, Result};
