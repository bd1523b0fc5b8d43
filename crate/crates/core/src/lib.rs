//! Event structures with static and dynamic causality.
//!
//! Eight families are supported: relaxed prime, bundle, extended bundle,
//! dual, shrinking causality, growing causality, dynamic causality, and event
//! structures for resolvable conflicts. Each family module validates,
//! executes and encodes its structures; [`hierarchy`] compares them and
//! checks the expressiveness results by exhaustive search.

pub mod bundle;
pub mod dynamic;
pub mod error;
pub mod events;
pub mod growing;
pub mod hierarchy;
mod kernel;
pub mod prime;
pub mod rces;
pub mod shrinking;
pub mod textio;
mod validate;

pub use bundle::{Bes, Bundle, CauseFlavor, Des, Ebes};
pub use dynamic::{Classification, Dces, DcesState, StepMode};
pub use error::{Error, Result, Violation, Violations};
pub use events::{
    event_set, linearizations, poset_sets_equal, relation, transitive_reflexive_closure, Configuration,
    EventId, EventSet, GraphNode, Poset, Relation, Trace, TransitionGraph, Triple,
};
pub use growing::Ges;
pub use hierarchy::{Kind, Structure};
pub use kernel::{ENUMERATION_LIMIT, MAX_EVENTS};
pub use prime::Rpes;
pub use rces::Rces;
pub use shrinking::Ses;
