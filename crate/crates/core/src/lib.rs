//! A finite metric space laboratory: ultrametric skeletons, approximate
//! distance oracles, Markov type and convexity functionals, spectral girth
//! machinery and Walsh analysis on the Hamming cube.

pub mod error;
pub mod graph;
pub mod metric;
pub mod ultrametric;
pub mod ramsey;
pub mod lca;
pub mod oracle;
pub mod walk;
pub mod lamplighter;
pub mod spectral;
pub mod cube;
pub mod io;

pub use error::{Error, Result};
pub use graph::{Graph, HopDistances};
pub use metric::{FiniteMetric, Metric};
pub use ultrametric::HstTree;
pub use lca::LcaIndex;
pub use oracle::{OracleStructure, RankingStructure};
pub use ramsey::SkeletonResult;
pub use walk::MarkovChain;
