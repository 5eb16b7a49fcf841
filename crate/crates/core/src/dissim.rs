//! Basic dissimilarities, the weighted object dissimilarity, cluster errors
//! and closed-form optimal leaders.

use alloc::vec::Vec;

use crate::aggregates::{compute_aggregates, ClusterAggregates, ComponentSums};
use crate::error::{Error, Result};
use crate::model::{DissimKind, Leader, ModalValue, Schema, SymbolicObject};

/// Basic dissimilarity between a unit component `p` and a leader component `t`.
///
/// Returns 0 whenever `p == t`. The kinds dividing by `p` return 0 at `p = 0`;
/// the kinds dividing by `t` fail at `t = 0` with `p > 0`.
pub fn delta(kind: DissimKind, p: f64, t: f64) -> Result<f64> {
    if p == t {
        return Ok(0.0);
    }
    if kind.divides_by_unit() && p == 0.0 {
        return Ok(0.0);
    }
    if kind.divides_by_leader() && t == 0.0 {
        return Err(Error::Domain { kind, p, t });
    }
    let diff = p - t;
    let sq = diff * diff;
    Ok(match kind {
        DissimKind::D1 => sq,
        DissimKind::D2 => {
            let r = diff / t;
            r * r
        }
        DissimKind::D3 => sq / t,
        DissimKind::D4 => {
            let r = diff / p;
            r * r
        }
        DissimKind::D5 => sq / p,
        DissimKind::D6 => sq / (p * t),
    })
}

/// `Σ_j w_j δ(p_j, t_j)` for one variable. Zero-weight components are skipped.
pub fn variable_dissim(x: &ModalValue, t: &[f64], kind: DissimKind) -> Result<f64> {
    if t.len() != x.p.len() {
        return Err(Error::Arity {
            variable: 0,
            expected: x.p.len(),
            found: t.len(),
        });
    }
    if !x.is_active() {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for ((&p, &w), &tj) in x.p.iter().zip(&x.w).zip(t) {
        if w != 0.0 {
            sum += w * delta(kind, p, tj)?;
        }
    }
    Ok(sum)
}

/// `d(X, T) = Σ_i α_i d_i(X, T)`. Variables with `α = 0` are not evaluated.
pub fn object_dissim(
    x: &SymbolicObject,
    leader: &Leader,
    schema: &Schema,
    kind: DissimKind,
) -> Result<f64> {
    if x.vars.len() != schema.len() || leader.vars.len() != schema.len() {
        return Err(Error::VariableCount {
            expected: schema.len(),
            found: if x.vars.len() != schema.len() {
                x.vars.len()
            } else {
                leader.vars.len()
            },
        });
    }
    let mut sum = 0.0;
    for (i, ((v, t), spec)) in x
        .vars
        .iter()
        .zip(&leader.vars)
        .zip(schema.variables())
        .enumerate()
    {
        if spec.alpha == 0.0 {
            continue;
        }
        let di = variable_dissim(v, t, spec.effective_kind(kind)).map_err(|e| match e {
            Error::Arity {
                expected, found, ..
            } => Error::Arity {
                variable: i,
                expected,
                found,
            },
            other => other,
        })?;
        sum += spec.alpha * di;
    }
    Ok(sum)
}

/// `p(C, T) = Σ_{X ∈ C} d(X, T)`; zero for an empty cluster.
pub fn cluster_error<'a, I>(
    members: I,
    leader: &Leader,
    schema: &Schema,
    kind: DissimKind,
) -> Result<f64>
where
    I: IntoIterator<Item = &'a SymbolicObject>,
{
    let mut sum = 0.0;
    for x in members {
        sum += object_dissim(x, leader, schema, kind)?;
    }
    Ok(sum)
}

/// Minimiser of `Σ w δ(p, t)` over `t ≥ 0` given the component sums.
///
/// A component with no mass for the kind in question (no weight, or every
/// member at `p = 0` for the kinds that need `p > 0`) gets leader 0.
pub fn component_leader(kind: DissimKind, s: &ComponentSums) -> f64 {
    match kind {
        DissimKind::D1 => ratio(s.p, s.w),
        DissimKind::D2 => ratio(s.q, s.p),
        DissimKind::D3 => libm::sqrt(ratio(s.q, s.w)),
        DissimKind::D4 => ratio(s.h, s.g),
        DissimKind::D5 => ratio(s.w_pos, s.h),
        DissimKind::D6 => libm::sqrt(ratio(s.p, s.h)),
    }
}

#[inline]
fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Leader of the cluster whose sums are `agg`.
pub fn leader_from_aggregates(
    agg: &ClusterAggregates,
    schema: &Schema,
    kind: DissimKind,
) -> Leader {
    Leader::new(
        agg.vars
            .iter()
            .zip(schema.variables())
            .map(|(sums, spec)| {
                let k = spec.effective_kind(kind);
                sums.iter().map(|s| component_leader(k, s)).collect()
            })
            .collect(),
    )
}

/// Optimal leader of a nonempty cluster.
pub fn optimal_leader(
    members: &[SymbolicObject],
    schema: &Schema,
    kind: DissimKind,
) -> Result<Leader> {
    if members.is_empty() {
        return Err(Error::EmptyCluster);
    }
    for x in members {
        x.check_shape(schema)?;
    }
    let agg = compute_aggregates(schema, members);
    Ok(leader_from_aggregates(&agg, schema, kind))
}

/// Same as [`optimal_leader`] for members given by reference.
pub fn optimal_leader_of<'a, I>(members: I, schema: &Schema, kind: DissimKind) -> Result<Leader>
where
    I: IntoIterator<Item = &'a SymbolicObject>,
{
    let members: Vec<&SymbolicObject> = members.into_iter().collect();
    if members.is_empty() {
        return Err(Error::EmptyCluster);
    }
    let agg = compute_aggregates(schema, members.iter().copied());
    Ok(leader_from_aggregates(&agg, schema, kind))
}
