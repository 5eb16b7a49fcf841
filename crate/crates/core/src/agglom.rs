//! Agglomerative clustering compatible with the leaders criterion.
//!
//! The distance between two clusters is the increase of the criterion caused
//! by merging them, `D(Cu, Cv) = p(Cu ∪ Cv) - p(Cu) - p(Cv)`, evaluated in
//! closed form from the cluster aggregates and leaders.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::aggregates::{ClusterAggregates, ComponentSums};
use crate::dissim::leader_from_aggregates;
use crate::error::{Error, Result};
use crate::model::{DissimKind, Leader, Schema, SymbolicObject};

/// A cluster as seen by the hierarchical stage: its sums and its leader.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSummary {
    pub aggregates: ClusterAggregates,
    pub leader: Leader,
}

impl ClusterSummary {
    pub fn from_aggregates(
        aggregates: ClusterAggregates,
        schema: &Schema,
        kind: DissimKind,
    ) -> Self {
        let leader = leader_from_aggregates(&aggregates, schema, kind);
        ClusterSummary { aggregates, leader }
    }

    pub fn from_object(x: &SymbolicObject, schema: &Schema, kind: DissimKind) -> Self {
        Self::from_aggregates(ClusterAggregates::of_object(x), schema, kind)
    }

    pub fn from_members<'a, I>(members: I, schema: &Schema, kind: DissimKind) -> Self
    where
        I: IntoIterator<Item = &'a SymbolicObject>,
    {
        Self::from_aggregates(
            crate::aggregates::compute_aggregates(schema, members),
            schema,
            kind,
        )
    }
}

#[inline]
fn sq(x: f64) -> f64 {
    x * x
}

/// Leader component of the union expressed through the two leaders.
fn merged_component(
    kind: DissimKind,
    su: &ComponentSums,
    u: f64,
    sv: &ComponentSums,
    v: f64,
) -> f64 {
    let guarded = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    match kind {
        DissimKind::D1 => guarded(su.w * u + sv.w * v, su.w + sv.w),
        DissimKind::D2 => guarded(u * su.p + v * sv.p, su.p + sv.p),
        DissimKind::D3 => libm::sqrt(guarded(sq(u) * su.w + sq(v) * sv.w, su.w + sv.w)),
        DissimKind::D4 => {
            let inv = |h: f64, t: f64| if h > 0.0 { h / t } else { 0.0 };
            guarded(su.h + sv.h, inv(su.h, u) + inv(sv.h, v))
        }
        DissimKind::D5 => guarded(su.w_pos + sv.w_pos, su.h + sv.h),
        DissimKind::D6 => {
            let inv = |p: f64, t: f64| if p > 0.0 { p / sq(t) } else { 0.0 };
            libm::sqrt(guarded(su.p + sv.p, inv(su.p, u) + inv(sv.p, v)))
        }
    }
}

/// `Σ_{X ∈ C} w (δ(p, z) - δ(p, u))` for one side of a merge.
fn side_increase(kind: DissimKind, s: &ComponentSums, u: f64, z: f64) -> f64 {
    match kind {
        DissimKind::D1 => s.w * sq(u - z),
        DissimKind::D2 => {
            if s.p > 0.0 {
                (s.p / u) * sq((u - z) / z)
            } else if z > 0.0 {
                // every weighted member sits at p = 0, where δ(0, z) = 1
                s.w
            } else {
                0.0
            }
        }
        DissimKind::D3 => {
            if s.w > 0.0 && z > 0.0 {
                s.w * sq(u - z) / z
            } else {
                0.0
            }
        }
        DissimKind::D4 => s.g * sq(u - z),
        DissimKind::D5 => {
            if s.h > 0.0 {
                s.w_pos * sq(u - z) / u
            } else {
                0.0
            }
        }
        DissimKind::D6 => {
            if s.h > 0.0 {
                (s.p / u) * sq(u - z) / (u * z)
            } else {
                0.0
            }
        }
    }
}

fn between_component(
    kind: DissimKind,
    su: &ComponentSums,
    u: f64,
    sv: &ComponentSums,
    v: f64,
) -> f64 {
    if kind == DissimKind::D1 {
        let w = su.w + sv.w;
        return if w > 0.0 {
            (su.w * sv.w / w) * sq(u - v)
        } else {
            0.0
        };
    }
    let z = merged_component(kind, su, u, sv, v);
    side_increase(kind, su, u, z) + side_increase(kind, sv, v, z)
}

/// Leader of `Cu ∪ Cv` from the two leaders and their sums.
pub fn merged_leader(
    u: &ClusterSummary,
    v: &ClusterSummary,
    schema: &Schema,
    kind: DissimKind,
) -> Leader {
    let vars = schema
        .variables()
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            let k = spec.effective_kind(kind);
            let (au, av) = (&u.aggregates.vars[i], &v.aggregates.vars[i]);
            let (tu, tv) = (&u.leader.vars[i], &v.leader.vars[i]);
            (0..spec.arity())
                .map(|j| merged_component(k, &au[j], tu[j], &av[j], tv[j]))
                .collect()
        })
        .collect();
    Leader::new(vars)
}

/// Generalised Ward distance between two disjoint clusters.
pub fn between_dissim(
    u: &ClusterSummary,
    v: &ClusterSummary,
    schema: &Schema,
    kind: DissimKind,
) -> f64 {
    let mut total = 0.0;
    for (i, spec) in schema.variables().iter().enumerate() {
        if spec.alpha == 0.0 {
            continue;
        }
        let k = spec.effective_kind(kind);
        let (au, av) = (&u.aggregates.vars[i], &v.aggregates.vars[i]);
        let (tu, tv) = (&u.leader.vars[i], &v.leader.vars[i]);
        let mut di = 0.0;
        for j in 0..spec.arity() {
            di += between_component(k, &au[j], tu[j], &av[j], tv[j]);
        }
        total += spec.alpha * di;
    }
    total
}

/// `Σ_i α_i Σ_j (u_ij - v_ij)²` between two leaders.
pub fn leader_sq_distance(u: &Leader, v: &Leader, schema: &Schema) -> f64 {
    schema
        .variables()
        .iter()
        .zip(u.vars.iter().zip(&v.vars))
        .map(|(spec, (a, b))| spec.alpha * a.iter().zip(b).map(|(x, y)| sq(x - y)).sum::<f64>())
        .sum()
}

/// Closed-form shortcut of the δ1 Ward distance versus the general formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WardSpecialReport {
    /// Whether the shortcut's weight precondition holds.
    pub applicable: bool,
    /// `D` from the general component-wise formula.
    pub general: f64,
    /// `c · d(u, v)`; `NaN` when not applicable.
    pub special: f64,
    /// The multiplier `c`.
    pub factor: f64,
}

impl WardSpecialReport {
    pub fn abs_diff(&self) -> f64 {
        (self.general - self.special).abs()
    }
}

/// Unit-weight case: with every weight equal to 1,
/// `D = |Cu||Cv| / (|Cu| + |Cv|) · d(u, v)`.
pub fn ward_special_cases_check(
    cu: &[SymbolicObject],
    cv: &[SymbolicObject],
    schema: &Schema,
) -> WardSpecialReport {
    let kind = DissimKind::D1;
    let u = ClusterSummary::from_members(cu, schema, kind);
    let v = ClusterSummary::from_members(cv, schema, kind);
    let general = between_dissim(&u, &v, schema, kind);
    let unit_weights = cu.iter().chain(cv).all(|x| {
        x.vars
            .iter()
            .all(|var| var.is_active() && var.w.iter().all(|&w| w == 1.0))
    }) && !cu.is_empty()
        && !cv.is_empty();
    if !unit_weights {
        return WardSpecialReport {
            applicable: false,
            general,
            special: f64::NAN,
            factor: f64::NAN,
        };
    }
    let (a, b) = (cu.len() as f64, cv.len() as f64);
    let factor = a * b / (a + b);
    WardSpecialReport {
        applicable: true,
        general,
        special: factor * leader_sq_distance(&u.leader, &v.leader, schema),
        factor,
    }
}

/// Constant-weight case: when every unit uses one weight `w_x` on all
/// variables and components (among variables with `α > 0`),
/// `D = w_u w_v / (w_u + w_v) · d(u, v)` with `w_C` the cluster weight.
pub fn ward_constant_weight_check(
    u: &ClusterSummary,
    v: &ClusterSummary,
    schema: &Schema,
) -> WardSpecialReport {
    let general = between_dissim(u, v, schema, DissimKind::D1);
    let constant = |c: &ClusterSummary| -> Option<f64> {
        let mut value = None;
        for (spec, sums) in schema.variables().iter().zip(&c.aggregates.vars) {
            if spec.alpha == 0.0 {
                continue;
            }
            for s in sums {
                match value {
                    None => value = Some(s.w),
                    Some(w) if w == s.w => {}
                    Some(_) => return None,
                }
            }
        }
        value
    };
    match (constant(u), constant(v)) {
        (Some(wu), Some(wv)) if wu + wv > 0.0 => {
            let factor = wu * wv / (wu + wv);
            WardSpecialReport {
                applicable: true,
                general,
                special: factor * leader_sq_distance(&u.leader, &v.leader, schema),
                factor,
            }
        }
        _ => WardSpecialReport {
            applicable: false,
            general,
            special: f64::NAN,
            factor: f64::NAN,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeRecord {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub new_node: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DendrogramNode {
    pub id: usize,
    /// `None` for leaves.
    pub children: Option<(usize, usize)>,
    pub height: f64,
    pub leader: Leader,
    /// Number of leaves below this node.
    pub leaves: usize,
    pub aggregates: ClusterAggregates,
}

impl DendrogramNode {
    /// Number of units represented (leaves may stand for whole clusters).
    pub fn member_count(&self) -> usize {
        self.aggregates.count
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    /// Leaves `0..n` first, then one node per merge.
    pub nodes: Vec<DendrogramNode>,
    pub merges: Vec<MergeRecord>,
    /// Raw merge heights before clamping negatives to zero.
    pub raw_heights: Vec<f64>,
    /// Merges whose raw height was negative (set to 0).
    pub clamped: usize,
    /// Merges lower than an earlier merge.
    pub inversions: usize,
}

impl Dendrogram {
    pub fn leaf_count(&self) -> usize {
        self.merges.len() + 1
    }

    pub fn root(&self) -> &DendrogramNode {
        self.nodes.last().expect("nonempty dendrogram")
    }

    /// Leaf ids below `node`, in increasing order.
    pub fn leaves_under(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(id) = stack.pop() {
            match self.nodes[id].children {
                None => out.push(id),
                Some((a, b)) => {
                    stack.push(a);
                    stack.push(b);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Candidate merge ordered by height, then by the node-id pair.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    d: f64,
    lo: usize,
    hi: usize,
    slot: usize,
}

impl Candidate {
    fn cmp_key(&self, o: &Candidate) -> Ordering {
        self.d
            .total_cmp(&o.d)
            .then(self.lo.cmp(&o.lo))
            .then(self.hi.cmp(&o.hi))
    }
}

/// Builds the full merge tree, always merging the pair with the smallest
/// between-cluster distance. Ties go to the lexicographically smallest pair
/// of node ids.
pub fn agglomerate(
    items: Vec<ClusterSummary>,
    schema: &Schema,
    kind: DissimKind,
) -> Result<Dendrogram> {
    let n = items.len();
    if n < 2 {
        return Err(Error::TooFewItems { found: n });
    }
    for it in &items {
        it.leader.check_shape(schema)?;
        if it.aggregates.vars.len() != schema.len() {
            return Err(Error::VariableCount {
                expected: schema.len(),
                found: it.aggregates.vars.len(),
            });
        }
    }

    let mut nodes: Vec<DendrogramNode> = Vec::with_capacity(2 * n - 1);
    let mut slots: Vec<ClusterSummary> = Vec::with_capacity(n);
    for (id, it) in items.into_iter().enumerate() {
        nodes.push(DendrogramNode {
            id,
            children: None,
            height: 0.0,
            leader: it.leader.clone(),
            leaves: 1,
            aggregates: it.aggregates.clone(),
        });
        slots.push(it);
    }
    let mut node_of: Vec<usize> = (0..n).collect();
    let mut active = vec![true; n];
    let mut dist = vec![0.0f64; n * n];
    for a in 0..n {
        for b in (a + 1)..n {
            let d = between_dissim(&slots[a], &slots[b], schema, kind);
            dist[a * n + b] = d;
            dist[b * n + a] = d;
        }
    }

    let row_best =
        |a: usize, active: &[bool], node_of: &[usize], dist: &[f64]| -> Option<Candidate> {
            let mut best: Option<Candidate> = None;
            for b in 0..n {
                if b == a || !active[b] {
                    continue;
                }
                let (x, y) = (node_of[a], node_of[b]);
                let c = Candidate {
                    d: dist[a * n + b],
                    lo: x.min(y),
                    hi: x.max(y),
                    slot: b,
                };
                if best.is_none_or(|cur| c.cmp_key(&cur) == Ordering::Less) {
                    best = Some(c);
                }
            }
            best
        };

    let mut nn: Vec<Option<Candidate>> = (0..n)
        .map(|a| row_best(a, &active, &node_of, &dist))
        .collect();
    let mut merges = Vec::with_capacity(n - 1);
    let mut raw_heights = Vec::with_capacity(n - 1);
    let mut clamped = 0;
    let mut inversions = 0;
    let mut highest = f64::NEG_INFINITY;

    for step in 0..(n - 1) {
        let mut pick: Option<(usize, Candidate)> = None;
        for a in 0..n {
            if !active[a] {
                continue;
            }
            if let Some(c) = nn[a] {
                if pick.is_none_or(|(_, cur)| c.cmp_key(&cur) == Ordering::Less) {
                    pick = Some((a, c));
                }
            }
        }
        let (a, cand) = pick.expect("at least two active clusters");
        let b = cand.slot;
        let (keep, drop) = (a.min(b), a.max(b));
        let new_id = n + step;
        let raw = cand.d;
        let height = if raw < 0.0 {
            clamped += 1;
            0.0
        } else {
            raw
        };
        if height < highest {
            inversions += 1;
        }
        highest = highest.max(height);

        let leader = merged_leader(&slots[keep], &slots[drop], schema, kind);
        let aggregates = slots[keep].aggregates.merge(&slots[drop].aggregates);
        let (left, right) = (cand.lo, cand.hi);
        nodes.push(DendrogramNode {
            id: new_id,
            children: Some((left, right)),
            height,
            leader: leader.clone(),
            leaves: nodes[left].leaves + nodes[right].leaves,
            aggregates: aggregates.clone(),
        });
        merges.push(MergeRecord {
            left,
            right,
            height,
            new_node: new_id,
        });
        raw_heights.push(raw);

        slots[keep] = ClusterSummary { aggregates, leader };
        node_of[keep] = new_id;
        active[drop] = false;
        nn[drop] = None;

        for r in 0..n {
            if r == keep || !active[r] {
                continue;
            }
            let d = between_dissim(&slots[keep], &slots[r], schema, kind);
            dist[keep * n + r] = d;
            dist[r * n + keep] = d;
        }
        for r in 0..n {
            if r == keep || !active[r] {
                continue;
            }
            let stale = nn[r].is_none_or(|c| c.slot == keep || c.slot == drop);
            if stale {
                nn[r] = row_best(r, &active, &node_of, &dist);
            } else {
                let x = node_of[r];
                let fresh = Candidate {
                    d: dist[r * n + keep],
                    lo: x.min(new_id),
                    hi: x.max(new_id),
                    slot: keep,
                };
                if fresh.cmp_key(&nn[r].unwrap()) == Ordering::Less {
                    nn[r] = Some(fresh);
                }
            }
        }
        nn[keep] = row_best(keep, &active, &node_of, &dist);
    }

    Ok(Dendrogram {
        nodes,
        merges,
        raw_heights,
        clamped,
        inversions,
    })
}

/// Hierarchical clustering of individual units.
pub fn agglomerate_units(
    units: &[SymbolicObject],
    schema: &Schema,
    kind: DissimKind,
) -> Result<Dendrogram> {
    for x in units {
        x.check_shape(schema)?;
    }
    let items = units
        .iter()
        .map(|x| ClusterSummary::from_object(x, schema, kind))
        .collect();
    agglomerate(items, schema, kind)
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn labels_after(n_leaves: usize, merges: &[MergeRecord]) -> Vec<usize> {
    let total = n_leaves + merges.len();
    let mut parent: Vec<usize> = (0..total).collect();
    for m in merges {
        parent[m.left] = m.new_node;
        parent[m.right] = m.new_node;
    }
    let roots: Vec<usize> = (0..n_leaves).map(|leaf| find(&mut parent, leaf)).collect();
    // relabel by first appearance in leaf order
    let mut map: Vec<(usize, usize)> = Vec::new();
    roots
        .iter()
        .map(|&r| match map.iter().find(|(root, _)| *root == r) {
            Some(&(_, label)) => label,
            None => {
                let label = map.len();
                map.push((r, label));
                label
            }
        })
        .collect()
}

/// Flat clustering into `k` groups: the first `n - k` merges applied.
pub fn cut_k(n_leaves: usize, merges: &[MergeRecord], k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > n_leaves || merges.len() + 1 != n_leaves {
        return Err(Error::InvalidConfig("cut: k must lie in 1..=leaves"));
    }
    Ok(labels_after(n_leaves, &merges[..n_leaves - k]))
}

/// Flat clustering from the merges applied in order up to the first merge
/// above `height`.
pub fn cut_height(n_leaves: usize, merges: &[MergeRecord], height: f64) -> Result<Vec<usize>> {
    if merges.len() + 1 != n_leaves {
        return Err(Error::InvalidConfig(
            "cut: merge list does not match leaf count",
        ));
    }
    let applied = merges.iter().take_while(|m| m.height <= height).count();
    Ok(labels_after(n_leaves, &merges[..applied]))
}

/// Number of clusters whose next merge shows the largest jump in height,
/// ignoring the jump into two clusters. `None` below four leaves.
pub fn suggest_k(merges: &[MergeRecord]) -> Option<usize> {
    let n = merges.len() + 1;
    let mut best: Option<(usize, f64)> = None;
    // after s merges there are n - s clusters; the jump is h[s] - h[s-1]
    for s in 1..merges.len() {
        let k = n - s;
        if k < 3 {
            continue;
        }
        let gap = merges[s].height - merges[s - 1].height;
        if best.is_none_or(|(_, g)| gap > g) {
            best = Some((k, gap));
        }
    }
    best.map(|(k, _)| k)
}
