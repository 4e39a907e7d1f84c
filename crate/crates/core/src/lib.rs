//! Guarded interaction trees with context-dependent effects, a small runtime
//! for them, and a handful of object languages interpreted into the trees.

pub mod bisim;
pub mod effects;
pub mod engine;
pub mod gen;
pub mod harness;
pub mod hom;
pub mod lang;
pub mod later;
pub mod laws;
pub mod machine;
pub mod ops;
pub mod sched;
pub mod tree;

pub use engine::{combine, CompositeState, Effects};
pub use later::Later;
pub use sched::{run, Outcome, Run, SchedulerPolicy};
pub use tree::{ErrorKind, GITree, Ground};
