//! Exact and approximate counting of `h`-cycles.
//!
//! The exact layer counts cycles through ordered vertex partitions with
//! rectangular matrix chains and derives per-vertex colorful counts from
//! them. On top of it sit two randomized black boxes, one finding the
//! heavy vertices and one counting the cycles through them, and a
//! recursive estimator driven by threshold halving. Brute-force oracles,
//! planted instances and gap-preserving gadget constructions support
//! end-to-end verification.

pub mod config;
pub mod count_heavy;
pub mod error;
pub mod exact;
pub mod find_heavy;
pub mod graph;
pub mod hardness;
pub mod matmul;
pub mod rng;
pub mod template;

pub use config::{EstimatorConfig, Resolved, ScaleMode};
pub use count_heavy::{count_heavy, ColorCodingCounter, HeavyBand, HeavyCounter};
pub use error::{Error, Result};
pub use exact::{brute_force_cycles, count_colorful_k, count_t_sigma, CycleCounts, OrderedPartition, PerVertexCounts};
pub use find_heavy::{find_heavy, product_set, ColorCodingFinder, HeavyFinder, SampleVector};
pub use graph::{layered_graph, random_coloring, Coloring, Graph, Mode, VertexSet};
pub use matmul::{CountMatrix, WorkCounter};
pub use template::{doubling, median_of, template, CountReport, TemplateParams, TemplateTrace};
