//! Definitional digraphs, MFVS-preserving reductions and the tooling around
//! them: corpus parsing, an exact oracle, kernel metrics and graph I/O.

pub mod amr;
pub mod dictionary;
pub mod gen;
pub mod graph;
pub mod io;
pub mod kernel;
pub mod oracle;
pub mod penman;
pub mod par;
pub mod reduce;
pub mod scc;
pub mod verify;

pub use graph::{Arc, ArcAnnotations, Digraph, GraphError, VertexId};
pub use oracle::{exact_mfvs, is_fvs, MfvsSolver, OracleError};
pub use par::Execution;
pub use reduce::{PriorityMap, ReductionKind, ReductionTrace, Reducer, Target, VisitOrder};
