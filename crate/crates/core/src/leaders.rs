//! Leaders (dynamic clouds) method: alternate optimal leaders and
//! nearest-leader assignment until the partition stops changing.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::aggregates::ClusterAggregates;
use crate::dissim::{leader_from_aggregates, object_dissim};
use crate::error::{Error, Result};
use crate::model::{DissimKind, Leader, Schema, SymbolicObject};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    /// Shuffle the units and deal them round-robin into `k` clusters.
    RandomPartition,
    /// Use `k` distinct units as the initial leaders.
    RandomUnits,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeadersConfig {
    pub k: usize,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
    pub init: Init,
    /// Stop early when the relative decrease of P falls below this.
    /// Zero means stop only on an unchanged partition.
    pub tol: f64,
}

impl LeadersConfig {
    pub fn new(k: usize) -> Self {
        LeadersConfig {
            k,
            max_iter: 100,
            restarts: 1,
            seed: 0,
            init: Init::RandomUnits,
            tol: 0.0,
        }
    }

    pub fn validate(&self, units: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be positive"));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be positive"));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidConfig("tol must be nonnegative"));
        }
        if units < self.k {
            return Err(Error::Infeasible { units, k: self.k });
        }
        Ok(())
    }
}

/// Nearest-leader labels with the attained dissimilarities.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub labels: Vec<usize>,
    pub dists: Vec<f64>,
    pub total: f64,
}

/// Nearest feasible leader of `x`; ties go to the lowest index. A leader at
/// which `d(x, T)` is undefined is skipped.
fn nearest(
    x: &SymbolicObject,
    unit: usize,
    leaders: &[Leader],
    schema: &Schema,
    kind: DissimKind,
) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (c, t) in leaders.iter().enumerate() {
        let d = match object_dissim(x, t, schema, kind) {
            Ok(d) => d,
            Err(Error::Domain { .. }) => continue,
            Err(e) => return Err(e),
        };
        if best.is_none_or(|(_, b)| d < b) {
            best = Some((c, d));
        }
    }
    best.ok_or(Error::NoFeasibleLeader { unit })
}

/// Assigns every unit to its closest leader.
pub fn assign_units(
    units: &[SymbolicObject],
    leaders: &[Leader],
    schema: &Schema,
    kind: DissimKind,
) -> Result<Assignment> {
    if leaders.is_empty() {
        return Err(Error::InvalidConfig("no leaders to assign to"));
    }
    let mut labels = Vec::with_capacity(units.len());
    let mut dists = Vec::with_capacity(units.len());
    let mut total = 0.0;
    for (u, x) in units.iter().enumerate() {
        let (c, d) = nearest(x, u, leaders, schema, kind)?;
        labels.push(c);
        dists.push(d);
        total += d;
    }
    Ok(Assignment {
        labels,
        dists,
        total,
    })
}

/// Fills empty clusters in increasing index order, each with the unit
/// farthest from its nearest leader among units whose cluster keeps at
/// least one member. Returns the `(unit, cluster)` moves made.
pub fn repair_empty_clusters(
    labels: &mut [usize],
    units: &[SymbolicObject],
    leaders: &[Leader],
    schema: &Schema,
    kind: DissimKind,
) -> Result<Vec<(usize, usize)>> {
    let k = leaders.len();
    if units.len() < k {
        return Err(Error::Infeasible {
            units: units.len(),
            k,
        });
    }
    let mut sizes = vec![0usize; k];
    for &c in labels.iter() {
        sizes[c] += 1;
    }
    if sizes.iter().all(|&s| s > 0) {
        return Ok(Vec::new());
    }
    let mut min_dist = Vec::with_capacity(units.len());
    for (u, x) in units.iter().enumerate() {
        min_dist.push(nearest(x, u, leaders, schema, kind)?.1);
    }
    let mut moves = Vec::new();
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let mut pick: Option<usize> = None;
        for u in 0..units.len() {
            if sizes[labels[u]] < 2 {
                continue;
            }
            if pick.is_none_or(|b| min_dist[u] > min_dist[b]) {
                pick = Some(u);
            }
        }
        let u = pick.ok_or(Error::Infeasible {
            units: units.len(),
            k,
        })?;
        sizes[labels[u]] -= 1;
        labels[u] = empty;
        sizes[empty] = 1;
        moves.push((u, empty));
    }
    Ok(moves)
}

/// A partition with its optimal leaders and errors.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadersState {
    pub labels: Vec<usize>,
    pub leaders: Vec<Leader>,
    pub aggregates: Vec<ClusterAggregates>,
    pub cluster_errors: Vec<f64>,
    pub total: f64,
}

/// Computes leaders, cluster errors and `P` for a labelled partition.
pub fn evaluate_partition(
    units: &[SymbolicObject],
    labels: &[usize],
    k: usize,
    schema: &Schema,
    kind: DissimKind,
) -> Result<LeadersState> {
    let mut aggregates: Vec<ClusterAggregates> =
        (0..k).map(|_| ClusterAggregates::empty(schema)).collect();
    for (x, &c) in units.iter().zip(labels) {
        aggregates[c].push(x);
    }
    let leaders: Vec<Leader> = aggregates
        .iter()
        .map(|a| leader_from_aggregates(a, schema, kind))
        .collect();
    let mut cluster_errors = vec![0.0; k];
    for (x, &c) in units.iter().zip(labels) {
        cluster_errors[c] += object_dissim(x, &leaders[c], schema, kind)?;
    }
    let total = cluster_errors.iter().sum();
    Ok(LeadersState {
        labels: labels.to_vec(),
        leaders,
        aggregates,
        cluster_errors,
        total,
    })
}

/// Assign to the current leaders, repair empty clusters, then re-optimise
/// leaders on the new partition.
pub fn leaders_step(
    units: &[SymbolicObject],
    state: &LeadersState,
    schema: &Schema,
    kind: DissimKind,
) -> Result<LeadersState> {
    let k = state.leaders.len();
    let mut labels = assign_units(units, &state.leaders, schema, kind)?.labels;
    repair_empty_clusters(&mut labels, units, &state.leaders, schema, kind)?;
    evaluate_partition(units, &labels, k, schema, kind)
}

/// Outcome of one seeded restart.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub restart: usize,
    pub state: LeadersState,
    /// `P` after initialisation and after every step that changed the partition.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

fn shuffled(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        idx.swap(i, j);
    }
    idx
}

fn initial_state(
    units: &[SymbolicObject],
    schema: &Schema,
    kind: DissimKind,
    cfg: &LeadersConfig,
    rng: &mut ChaCha8Rng,
) -> Result<LeadersState> {
    let n = units.len();
    let order = shuffled(n, rng);
    match cfg.init {
        Init::RandomPartition => {
            let mut labels = vec![0; n];
            for (r, &u) in order.iter().enumerate() {
                labels[u] = r % cfg.k;
            }
            evaluate_partition(units, &labels, cfg.k, schema, kind)
        }
        Init::RandomUnits => {
            let leaders: Vec<Leader> = order[..cfg.k]
                .iter()
                .map(|&u| {
                    leader_from_aggregates(&ClusterAggregates::of_object(&units[u]), schema, kind)
                })
                .collect();
            let mut labels = assign_units(units, &leaders, schema, kind)?.labels;
            repair_empty_clusters(&mut labels, units, &leaders, schema, kind)?;
            evaluate_partition(units, &labels, cfg.k, schema, kind)
        }
    }
}

/// Runs restart number `restart` of `cfg` to convergence. Restarts are
/// independent, so callers may run them concurrently.
pub fn run_restart(
    units: &[SymbolicObject],
    schema: &Schema,
    kind: DissimKind,
    cfg: &LeadersConfig,
    restart: usize,
) -> Result<RunResult> {
    cfg.validate(units.len())?;
    for x in units {
        x.check_shape(schema)?;
    }
    let mut rng = restart_rng(cfg.seed, restart);
    let mut state = initial_state(units, schema, kind, cfg, &mut rng)?;
    let mut trace = vec![state.total];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let next = leaders_step(units, &state, schema, kind)?;
        if next.labels == state.labels {
            converged = true;
            break;
        }
        let before = state.total;
        trace.push(next.total);
        state = next;
        if cfg.tol > 0.0 && before - state.total < cfg.tol * before {
            break;
        }
    }
    Ok(RunResult {
        restart,
        state,
        trace,
        iterations,
        converged,
    })
}

/// The result of a multi-restart leaders run.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub kind: DissimKind,
    pub labels: Vec<usize>,
    pub leaders: Vec<Leader>,
    pub aggregates: Vec<ClusterAggregates>,
    pub cluster_errors: Vec<f64>,
    pub total_error: f64,
    pub best_restart: usize,
    /// Final `P` of every restart, in restart order.
    pub restart_errors: Vec<f64>,
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl Clustering {
    pub fn k(&self) -> usize {
        self.leaders.len()
    }

    pub fn members(&self, cluster: usize) -> impl Iterator<Item = usize> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter(move |(_, &c)| c == cluster)
            .map(|(u, _)| u)
    }
}

/// Picks the run with minimal `P`; the lowest restart index wins ties.
pub fn select_best(kind: DissimKind, runs: Vec<RunResult>) -> Option<Clustering> {
    let restart_errors: Vec<f64> = runs.iter().map(|r| r.state.total).collect();
    let mut best: Option<RunResult> = None;
    for run in runs {
        let better = match &best {
            None => true,
            Some(b) => {
                run.state.total < b.state.total
                    || (run.state.total == b.state.total && run.restart < b.restart)
            }
        };
        if better {
            best = Some(run);
        }
    }
    best.map(|run| Clustering {
        kind,
        labels: run.state.labels,
        leaders: run.state.leaders,
        aggregates: run.state.aggregates,
        cluster_errors: run.state.cluster_errors,
        total_error: run.state.total,
        best_restart: run.restart,
        restart_errors,
        trace: run.trace,
        iterations: run.iterations,
        converged: run.converged,
    })
}

/// Sequential multi-restart leaders clustering.
pub fn leaders_run(
    units: &[SymbolicObject],
    schema: &Schema,
    kind: DissimKind,
    cfg: &LeadersConfig,
) -> Result<Clustering> {
    cfg.validate(units.len())?;
    let runs = (0..cfg.restarts)
        .map(|r| run_restart(units, schema, kind, cfg, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(select_best(kind, runs).expect("at least one restart"))
}
