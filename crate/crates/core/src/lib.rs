//! Rigidity analysis for circle packings whose radii carry sign constraints.

pub mod casebook;
pub mod error;
pub mod first_order;
pub mod format;
pub mod generate;
pub mod graph;
pub mod layout;
pub mod linalg;
pub mod lp;
pub mod matroid;
pub mod packing;
pub mod rigidity;
pub mod second_order;
pub mod svg;

pub use error::{Error, Result};
pub use first_order::{RigidityStatus, RigidityVerdict, Stress};
pub use format::PackingDocument;
pub use graph::{Edge, PlanarEmbeddedGraph};
pub use packing::{AnalysisTolerances, ConstraintPartition, Packing, Tag};
pub use rigidity::FlexVector;
