//! Inertia decomposition `TI = WI + BI`.
//!
//! The identity is exact for `D1` on any partition and any nonnegative
//! weights. For the other kinds the residual is reported but carries no
//! guarantee.

use alloc::vec::Vec;

use crate::aggregates::{compute_aggregates, ClusterAggregates};
use crate::dissim::{delta, leader_from_aggregates, object_dissim};
use crate::error::{Error, Result};
use crate::model::{DissimKind, Leader, Schema, SymbolicObject};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertiaReport {
    pub kind: DissimKind,
    /// Total inertia `Σ_X d(X, t_U)`.
    pub total: f64,
    /// Within inertia `P(𝒞)`.
    pub within: f64,
    /// Between inertia `Σ_C d(t_C, t_U)`, leaders weighted by cluster weight.
    pub between: f64,
    pub residual: f64,
}

impl InertiaReport {
    /// Whether `|TI - WI - BI| ≤ tol · max(TI, 1)`.
    pub fn holds(&self, tol: f64) -> bool {
        self.residual.abs() <= tol * self.total.max(1.0)
    }
}

/// `Σ_i α_i Σ_j w_Cij δ(t_Cij, t_Uij)`: a cluster leader treated as a unit
/// carrying the cluster's aggregate weights.
fn weighted_leader_dissim(
    agg: &ClusterAggregates,
    t_c: &Leader,
    t_u: &Leader,
    schema: &Schema,
    kind: DissimKind,
) -> Result<f64> {
    let mut total = 0.0;
    for (i, spec) in schema.variables().iter().enumerate() {
        if spec.alpha == 0.0 {
            continue;
        }
        let k = spec.effective_kind(kind);
        let mut di = 0.0;
        for j in 0..spec.arity() {
            let w = agg.vars[i][j].w;
            if w != 0.0 {
                di += w * delta(k, t_c.vars[i][j], t_u.vars[i][j])?;
            }
        }
        total += spec.alpha * di;
    }
    Ok(total)
}

/// Inertia decomposition of the partition given by `labels` (cluster
/// indices `0..k`). Empty clusters are rejected.
pub fn inertia(
    units: &[SymbolicObject],
    labels: &[usize],
    k: usize,
    schema: &Schema,
    kind: DissimKind,
) -> Result<InertiaReport> {
    if labels.len() != units.len() {
        return Err(Error::InvalidConfig("labels do not cover the units"));
    }
    if units.is_empty() {
        return Err(Error::EmptyCluster);
    }
    let global = compute_aggregates(schema, units);
    let t_u = leader_from_aggregates(&global, schema, kind);
    let mut total = 0.0;
    for x in units {
        total += object_dissim(x, &t_u, schema, kind)?;
    }

    let mut aggs: Vec<ClusterAggregates> =
        (0..k).map(|_| ClusterAggregates::empty(schema)).collect();
    for (x, &c) in units.iter().zip(labels) {
        if c >= k {
            return Err(Error::InvalidConfig("cluster label out of range"));
        }
        aggs[c].push(x);
    }
    if aggs.iter().any(ClusterAggregates::is_empty) {
        return Err(Error::EmptyCluster);
    }
    let leaders: Vec<Leader> = aggs
        .iter()
        .map(|a| leader_from_aggregates(a, schema, kind))
        .collect();
    let mut within = 0.0;
    for (x, &c) in units.iter().zip(labels) {
        within += object_dissim(x, &leaders[c], schema, kind)?;
    }
    let mut between = 0.0;
    for (a, t_c) in aggs.iter().zip(&leaders) {
        between += weighted_leader_dissim(a, t_c, &t_u, schema, kind)?;
    }
    Ok(InertiaReport {
        kind,
        total,
        within,
        between,
        residual: total - within - between,
    })
}
