//! Clustering of modal-valued symbolic data.
//!
//! Units are described per variable by a frequency distribution over
//! categories together with component weights. Six basic dissimilarities
//! between a unit component `p` and a leader component `t` are supported;
//! for each of them the optimal cluster leader, the leader of a merged
//! cluster and the between-cluster distance have closed forms in a handful
//! of additive cluster sums. Both clustering methods provided here minimise
//! the same criterion, the sum over clusters of member-to-leader
//! dissimilarities:
//!
//!  - [`leaders`]: a k-means style alternation between optimal leaders and
//!    nearest-leader assignment.
//!  - [`agglom`]: Ward-type hierarchical merging in which the distance
//!    between two clusters is the increase of the criterion when they merge.
//!
//! Because the criteria coincide, the clusters found by the leaders method
//! (carrying their aggregates) can be fed to the hierarchical stage
//! without approximation.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
// Negated comparisons deliberately treat NaN as invalid.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod agglom;
pub mod aggregates;
pub mod diagnostics;
pub mod dissim;
pub mod error;
pub mod leaders;
pub mod model;

pub use agglom::{
    agglomerate, agglomerate_units, between_dissim, cut_height, cut_k, merged_leader, suggest_k,
    ward_constant_weight_check, ward_special_cases_check, ClusterSummary, Dendrogram,
    DendrogramNode, MergeRecord, WardSpecialReport,
};
pub use aggregates::{compute_aggregates, ClusterAggregates, ComponentSums};
pub use diagnostics::{inertia, InertiaReport};
pub use dissim::{
    cluster_error, component_leader, delta, leader_from_aggregates, object_dissim, optimal_leader,
    optimal_leader_of, variable_dissim,
};
pub use error::{Error, Result};
pub use leaders::{
    assign_units, leaders_run, leaders_step, repair_empty_clusters, Clustering, Init, LeadersConfig,
};
pub use model::{
    validate_object, DissimKind, Leader, ModalValue, Schema, SymbolicObject, VariableKind,
    VariableSpec, Violation,
};
