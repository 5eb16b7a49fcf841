//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symclust::core::leaders::run_restart;
use symclust::core::{
    agglomerate, agglomerate_units, between_dissim, cluster_error, cut_k, inertia, leaders_run,
    merged_leader, object_dissim, optimal_leader, suggest_k, ward_constant_weight_check,
    ward_special_cases_check, ClusterSummary, Clustering, Dendrogram, DissimKind, Init, Leader,
    LeadersConfig, ModalValue, Schema, SymbolicObject,
};
use symclust::formats::write_objects;
use symclust::pipeline::{self, ClusterConfig};
use symclust::schema_file::write_schema;
use symclust::synth::generate_synthetic;

use common::{planted_profile, same_partition};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

// ---------------------------------------------------------------- data

#[derive(Clone, Copy, Debug)]
enum Weights {
    Ones,
    /// `w = n`
    Count,
    /// One random constant per unit and variable.
    PerVariable,
    /// Independent random weights, some of them zero.
    Free,
}

const ALL_WEIGHTS: [Weights; 4] = [
    Weights::Ones,
    Weights::Count,
    Weights::PerVariable,
    Weights::Free,
];

fn random_schema(rng: &mut ChaCha8Rng) -> Schema {
    let m = rng.gen_range(1..=3);
    let arities: Vec<usize> = (0..m).map(|_| rng.gen_range(2..=5)).collect();
    let vars = arities
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            symclust::core::VariableSpec::with_arity(format!("v{i}"), k, rng.gen_range(0.2..2.0))
        })
        .collect();
    Schema::new(vars, false).unwrap()
}

fn random_modal(
    rng: &mut ChaCha8Rng,
    arity: usize,
    weights: Weights,
    zero_prob: f64,
) -> ModalValue {
    let mut f: Vec<f64> = (0..arity)
        .map(|_| {
            if rng.gen_bool(zero_prob) {
                0.0
            } else {
                rng.gen_range(0.1..5.0)
            }
        })
        .collect();
    if f.iter().all(|&x| x == 0.0) {
        let j = rng.gen_range(0..arity);
        f[j] = rng.gen_range(0.1..5.0);
    }
    let n: f64 = f.iter().sum();
    let w = match weights {
        Weights::Ones => vec![1.0; arity],
        Weights::Count => vec![n; arity],
        Weights::PerVariable => vec![rng.gen_range(0.2..3.0); arity],
        Weights::Free => (0..arity)
            .map(|_| {
                if rng.gen_bool(0.1) {
                    0.0
                } else {
                    rng.gen_range(0.05..3.0)
                }
            })
            .collect(),
    };
    ModalValue::new(f, w)
}

fn random_unit(
    rng: &mut ChaCha8Rng,
    schema: &Schema,
    weights: Weights,
    zero_prob: f64,
    id: usize,
) -> SymbolicObject {
    let vars = schema
        .arities()
        .into_iter()
        .map(|k| random_modal(rng, k, weights, zero_prob))
        .collect();
    SymbolicObject::new(format!("x{id}"), vars)
}

fn random_cluster(
    rng: &mut ChaCha8Rng,
    schema: &Schema,
    weights: Weights,
    max_size: usize,
) -> Vec<SymbolicObject> {
    let size = rng.gen_range(1..=max_size);
    (0..size)
        .map(|i| random_unit(rng, schema, weights, 0.3, i))
        .collect()
}

fn pick_weights(rng: &mut ChaCha8Rng) -> Weights {
    ALL_WEIGHTS[rng.gen_range(0..ALL_WEIGHTS.len())]
}

fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

// ------------------------------------------------ 1. leader optimality

/// Reference basic dissimilarities, written out directly from their
/// definitions, with `δ(p, p) = 0` and the zero-probability rule for the
/// kinds that divide by `p`.
fn reference_delta(kind: DissimKind, p: f64, t: f64) -> f64 {
    use DissimKind::*;
    if p == t {
        return 0.0;
    }
    if matches!(kind, D4 | D5 | D6) && p == 0.0 {
        return 0.0;
    }
    if matches!(kind, D2 | D3 | D6) && t == 0.0 {
        return f64::INFINITY;
    }
    let e = p - t;
    match kind {
        D1 => e * e,
        D2 => (e / t) * (e / t),
        D3 => e * e / t,
        D4 => (e / p) * (e / p),
        D5 => e * e / p,
        D6 => e * e / (p * t),
    }
}

fn golden_min(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..200 {
        if b - a < 1e-14 {
            break;
        }
        if gc <= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    (a + b) / 2.0
}

/// Numeric minimiser of `Σ w δ(p, t)` over `t ∈ [0, (1 + margin) max p]`.
fn numeric_leader(kind: DissimKind, members: &[(f64, f64)]) -> f64 {
    let g = |t: f64| -> f64 {
        members
            .iter()
            .map(|&(p, w)| w * reference_delta(kind, p, t))
            .sum()
    };
    let max_p = members.iter().map(|m| m.0).fold(0.0, f64::max);
    let hi = max_p * 1.5;
    const GRID: usize = 600;
    let mut best = (f64::INFINITY, 0);
    for k in 0..=GRID {
        let t = hi * k as f64 / GRID as f64;
        let v = g(t);
        if v < best.0 {
            best = (v, k);
        }
    }
    let step = hi / GRID as f64;
    let a = (best.1 as f64 - 1.0).max(0.0) * step;
    let b = ((best.1 + 1) as f64 * step).min(hi);
    let t = golden_min(g, a, b);
    // the grid point itself may be the optimum on a boundary
    if g(best.1 as f64 * step) < g(t) {
        best.1 as f64 * step
    } else {
        t
    }
}

/// The objective does not depend on `t` (every `t` is optimal).
fn flat_objective(kind: DissimKind, members: &[(f64, f64)]) -> bool {
    use DissimKind::*;
    let active: Vec<_> = members.iter().filter(|m| m.1 > 0.0).collect();
    active.is_empty() || (matches!(kind, D2 | D4 | D5 | D6) && active.iter().all(|m| m.0 == 0.0))
}

fn criterion_leader_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for kind in DissimKind::ALL {
        for c in 0..200 {
            let schema = random_schema(&mut rng);
            let weights = pick_weights(&mut rng);
            let members = random_cluster(&mut rng, &schema, weights, 8);
            let leader = optimal_leader(&members, &schema, kind).unwrap();
            for (i, k) in schema.arities().into_iter().enumerate() {
                for j in 0..k {
                    let comp: Vec<(f64, f64)> = members
                        .iter()
                        .map(|x| (x.vars[i].p[j], x.vars[i].w[j]))
                        .collect();
                    if flat_objective(kind, &comp) {
                        continue;
                    }
                    let want = numeric_leader(kind, &comp);
                    let err = (leader.vars[i][j] - want).abs();
                    worst = worst.max(err);
                    checked += 1;
                    if err > 1e-6 && failures.len() < 3 {
                        failures.push(format!(
                            "{kind} cluster {c} ({weights:?}) var {i} comp {j}: {} vs {want}",
                            leader.vars[i][j]
                        ));
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(10);
    outcome(
        pass,
        format!(
            "{checked} components, max |t - t_num| = {worst:.2e} (<= 1e-6), {:.2}s (< 10s){}",
            elapsed.as_secs_f64(),
            if failures.is_empty() {
                String::new()
            } else {
                format!("; {}", failures.join("; "))
            }
        ),
    )
}

// ------------------------------------------------ 2. Ward equivalence

fn random_pair(rng: &mut ChaCha8Rng) -> (Schema, Vec<SymbolicObject>, Vec<SymbolicObject>) {
    let schema = random_schema(rng);
    let weights = pick_weights(rng);
    let cu = random_cluster(rng, &schema, weights, 8);
    let cv = random_cluster(rng, &schema, weights, 8);
    (schema, cu, cv)
}

fn own_error(c: &[SymbolicObject], schema: &Schema, kind: DissimKind) -> f64 {
    let t = optimal_leader(c, schema, kind).unwrap();
    cluster_error(c, &t, schema, kind).unwrap()
}

fn criterion_ward_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for kind in DissimKind::ALL {
        for n in 0..200 {
            let (schema, cu, cv) = random_pair(&mut rng);
            let u = ClusterSummary::from_members(&cu, &schema, kind);
            let v = ClusterSummary::from_members(&cv, &schema, kind);
            let d = between_dissim(&u, &v, &schema, kind);
            let union: Vec<SymbolicObject> = cu.iter().chain(&cv).cloned().collect();
            let def = own_error(&union, &schema, kind)
                - own_error(&cu, &schema, kind)
                - own_error(&cv, &schema, kind);
            let rel = (d - def).abs() / def.abs();
            let rel = if d == def { 0.0 } else { rel };
            worst = worst.max(rel);
            if (rel.is_nan() || rel > 1e-9) && failures.len() < 3 {
                failures.push(format!("{kind} pair {n}: D = {d}, definition = {def}"));
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures.is_empty() && elapsed < Duration::from_secs(10),
        format!(
            "1200 pairs, max relative difference {worst:.2e} (<= 1e-9), {:.2}s (< 10s){}",
            elapsed.as_secs_f64(),
            if failures.is_empty() {
                String::new()
            } else {
                format!("; {}", failures.join("; "))
            }
        ),
    )
}

// ------------------------------------------------ 3. merge consistency

fn criterion_merge_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for kind in DissimKind::ALL {
        for n in 0..200 {
            let (schema, cu, cv) = random_pair(&mut rng);
            let u = ClusterSummary::from_members(&cu, &schema, kind);
            let v = ClusterSummary::from_members(&cv, &schema, kind);
            let merged = merged_leader(&u, &v, &schema, kind);
            let union: Vec<SymbolicObject> = cu.iter().chain(&cv).cloned().collect();
            let direct = optimal_leader(&union, &schema, kind).unwrap();
            for (a, b) in merged
                .vars
                .iter()
                .flatten()
                .zip(direct.vars.iter().flatten())
            {
                let r = rel_diff(*a, *b);
                worst = worst.max(r);
                if r > 1e-12 && failures.len() < 3 {
                    failures.push(format!("{kind} pair {n}: {a} vs {b}"));
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "1200 pairs, max relative difference {worst:.2e} (<= 1e-12){}",
            if failures.is_empty() {
                String::new()
            } else {
                format!("; {}", failures.join("; "))
            }
        ),
    )
}

// ------------------------------------------------ 4. Huygens

fn criterion_huygens() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst = 0.0f64;
    let mut ok = true;
    for _ in 0..100 {
        let schema = random_schema(&mut rng);
        let weights = pick_weights(&mut rng);
        let n = rng.gen_range(10..=60);
        let units: Vec<SymbolicObject> = (0..n)
            .map(|i| random_unit(&mut rng, &schema, weights, 0.3, i))
            .collect();
        let k = rng.gen_range(2..=6);
        let labels: Vec<usize> = (0..n)
            .map(|i| if i < k { i } else { rng.gen_range(0..k) })
            .collect();
        let r = inertia(&units, &labels, k, &schema, DissimKind::D1).unwrap();
        let bound = 1e-9 * r.total.max(1.0);
        let gap = (r.total - r.within - r.between).abs();
        worst = worst.max(gap / r.total.max(1.0));
        ok &= gap <= bound;
    }
    outcome(
        ok,
        format!("100 partitions, max |TI - WI - BI| / max(TI, 1) = {worst:.2e} (<= 1e-9)"),
    )
}

// ------------------------------------------------ 5. Properties 1 and 2

fn criterion_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst_sum = 0.0f64;
    let mut worst_pool = 0.0f64;
    let mut leaders_checked = 0usize;

    let check_sum = |t: &Leader, worst: &mut f64| {
        for ti in &t.vars {
            *worst = worst.max((ti.iter().sum::<f64>() - 1.0).abs());
        }
    };
    let pooled_gap = |t: &Leader, members: &[&SymbolicObject]| -> f64 {
        let mut g = 0.0f64;
        for (i, ti) in t.vars.iter().enumerate() {
            let n: f64 = members.iter().map(|x| x.vars[i].n).sum();
            for (j, &tij) in ti.iter().enumerate() {
                let f: f64 = members.iter().map(|x| x.vars[i].f[j]).sum();
                g = g.max((tij - f / n).abs());
            }
        }
        g
    };

    for _ in 0..200 {
        let schema = random_schema(&mut rng);
        let c = random_cluster(&mut rng, &schema, Weights::PerVariable, 8);
        let t = optimal_leader(&c, &schema, DissimKind::D1).unwrap();
        check_sum(&t, &mut worst_sum);
        let c = random_cluster(&mut rng, &schema, Weights::Count, 8);
        let t = optimal_leader(&c, &schema, DissimKind::D1).unwrap();
        check_sum(&t, &mut worst_sum);
        worst_pool = worst_pool.max(pooled_gap(&t, &c.iter().collect::<Vec<_>>()));
        leaders_checked += 2;
    }
    // leaders of complete clusterings
    for (seed, weights) in [(1, Weights::PerVariable), (2, Weights::Count)] {
        let schema = Schema::uniform(&[3, 5, 2]).unwrap();
        let units: Vec<SymbolicObject> = (0..120)
            .map(|i| random_unit(&mut rng, &schema, weights, 0.3, i))
            .collect();
        let mut cfg = LeadersConfig::new(6);
        cfg.seed = seed;
        cfg.restarts = 3;
        let c = leaders_run(&units, &schema, DissimKind::D1, &cfg).unwrap();
        for (l, t) in c.leaders.iter().enumerate() {
            check_sum(t, &mut worst_sum);
            if let Weights::Count = weights {
                let members: Vec<&SymbolicObject> = c.members(l).map(|u| &units[u]).collect();
                worst_pool = worst_pool.max(pooled_gap(t, &members));
            }
            leaders_checked += 1;
        }
    }
    outcome(
        worst_sum <= 1e-9 && worst_pool <= 1e-12,
        format!(
            "{leaders_checked} leaders, max |Σ t - 1| = {worst_sum:.2e} (<= 1e-9), \
             max |t - f_C/n_C| = {worst_pool:.2e} (<= 1e-12)"
        ),
    )
}

// ------------------------------------------------ 6. monotonicity, determinism

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn criterion_monotone_deterministic() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let profile = planted_profile(50, "per-variable-n");
    let mut steps = 0usize;
    let mut violations = 0usize;
    let mut identical = 0usize;
    for seed in 0..50u64 {
        let data = generate_synthetic(&profile, 1000 + seed).unwrap();
        let schema = data.schema.build().unwrap().schema;
        let mut cfg = LeadersConfig::new(8);
        cfg.seed = seed;
        cfg.restarts = 3;
        for r in 0..cfg.restarts {
            let run = run_restart(&data.units, &schema, DissimKind::D1, &cfg, r).unwrap();
            for w in run.trace.windows(2) {
                steps += 1;
                if w[1] > w[0] + 1e-12 * w[0].max(1.0) {
                    violations += 1;
                }
            }
        }

        let dir = tmp.path().join(format!("s{seed}"));
        std::fs::create_dir_all(&dir).unwrap();
        write_objects(&dir.join("units.jsonl"), &data.units).unwrap();
        write_schema(&data.schema, &dir.join("schema.toml")).unwrap();
        let mut outputs = Vec::new();
        for run in ["a", "b"] {
            let text = format!(
                "schema = \"schema.toml\"\nunits = \"units.jsonl\"\noutput_dir = \"{run}\"\n\
                 seed = {seed}\n[leaders]\nk = 8\nrestarts = 3\n[cut]\nk = 4\n"
            );
            let cfg_path = dir.join(format!("{run}.toml"));
            std::fs::write(&cfg_path, &text).unwrap();
            let cfg = ClusterConfig::load(&cfg_path).unwrap();
            let out = pipeline::run(&cfg, true).unwrap();
            out.write(&cfg.output_dir).unwrap();
            outputs.push(read_dir_bytes(&cfg.output_dir));
        }
        if outputs[0] == outputs[1] && !outputs[0].is_empty() {
            identical += 1;
        }
    }
    outcome(
        violations == 0 && identical == 50,
        format!(
            "{steps} trace steps, {violations} increases; {identical}/50 seeds with \
             byte-identical output files"
        ),
    )
}

// ------------------------------------------------ 7. two-step compatibility

fn summary_of(d: &Dendrogram, node: usize) -> ClusterSummary {
    ClusterSummary {
        aggregates: d.nodes[node].aggregates.clone(),
        leader: d.nodes[node].leader.clone(),
    }
}

fn two_step(units: &[SymbolicObject], schema: &Schema, seed: u64) -> (Clustering, Dendrogram) {
    let mut cfg = LeadersConfig::new(20);
    cfg.restarts = 10;
    cfg.seed = seed;
    let c = leaders_run(units, schema, DissimKind::D1, &cfg).unwrap();
    let items = c
        .aggregates
        .iter()
        .zip(&c.leaders)
        .map(|(a, t)| ClusterSummary {
            aggregates: a.clone(),
            leader: t.clone(),
        })
        .collect();
    let d = agglomerate(items, schema, DissimKind::D1).unwrap();
    (c, d)
}

fn criterion_two_step() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut pass = true;

    // Property-2 weights: w = household size on every variable
    let data = generate_synthetic(&planted_profile(125, "per-variable-n"), 2024).unwrap();
    let schema = data.schema.build().unwrap().schema;
    let household_weights = data.units.iter().all(|x| {
        let w = x.vars[0].w[0];
        x.vars
            .iter()
            .all(|v| v.w.iter().all(|&c| c == w) && v.n == w)
    });
    pass &= household_weights && data.units.len() == 500;
    let (c, d) = two_step(&data.units, &schema, 7);
    let leaf_labels = cut_k(d.leaf_count(), &d.merges, 4).unwrap();
    let unit_labels: Vec<usize> = c.labels.iter().map(|&l| leaf_labels[l]).collect();
    let recovered = same_partition(&unit_labels, &data.labels);
    pass &= recovered && d.merges.len() == 19;
    let suggested = suggest_k(&d.merges);
    pass &= suggested == Some(4);
    notes.push(format!(
        "w = n: 500 units, 19 merges, planted partition recovered: {recovered}, suggested k = {suggested:?}"
    ));

    let mut worst = 0.0f64;
    let mut applicable = 0;
    for m in &d.merges {
        let r =
            ward_constant_weight_check(&summary_of(&d, m.left), &summary_of(&d, m.right), &schema);
        if r.applicable {
            applicable += 1;
            worst = worst.max(rel_diff(m.height, r.special));
        }
    }
    pass &= applicable == 19 && worst <= 1e-9 && d.clamped == 0;
    notes.push(format!(
        "heights vs w_u w_v/(w_u + w_v) d(u, v): max rel {worst:.2e} over {applicable} merges"
    ));

    // unit weights
    let data1 = generate_synthetic(&planted_profile(125, "ones"), 2024).unwrap();
    let (c1, d1) = two_step(&data1.units, &schema, 7);
    let mut worst1 = 0.0f64;
    let mut applicable1 = 0;
    for m in &d1.merges {
        let members = |node: usize| -> Vec<SymbolicObject> {
            let leaves = d1.leaves_under(node);
            c1.labels
                .iter()
                .zip(&data1.units)
                .filter(|(l, _)| leaves.contains(l))
                .map(|(_, x)| x.clone())
                .collect()
        };
        let r = ward_special_cases_check(&members(m.left), &members(m.right), &schema);
        if r.applicable {
            applicable1 += 1;
            worst1 = worst1.max(rel_diff(m.height, r.special));
        }
    }
    pass &= applicable1 == 19 && worst1 <= 1e-9;
    let leaf1 = cut_k(20, &d1.merges, 4).unwrap();
    let rec1 = same_partition(
        &c1.labels.iter().map(|&l| leaf1[l]).collect::<Vec<_>>(),
        &data1.labels,
    );
    notes.push(format!(
        "w = 1: heights vs |Cu||Cv|/(|Cu| + |Cv|) d(u, v): max rel {worst1:.2e} over {applicable1} merges (recovered: {rec1})"
    ));

    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(60);
    notes.push(format!("{:.2}s (< 60s)", elapsed.as_secs_f64()));
    outcome(pass, notes.join("; "))
}

// ------------------------------------------------ 8. singleton Ward

fn criterion_singleton_ward() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut exact = 0;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let schema = random_schema(&mut rng);
        let u = random_unit(&mut rng, &schema, Weights::Ones, 0.3, 0);
        let v = random_unit(&mut rng, &schema, Weights::Ones, 0.3, 1);
        let d = object_dissim(&u, &Leader::from_object(&v), &schema, DissimKind::D1).unwrap();
        let tree = agglomerate_units(&[u, v], &schema, DissimKind::D1).unwrap();
        let h = tree.merges[0].height;
        if h == 0.5 * d {
            exact += 1;
        }
        worst = worst.max(rel_diff(h, 0.5 * d));
    }
    outcome(
        exact == 100,
        format!("{exact}/100 pairs with height == d/2 exactly (max rel {worst:.2e})"),
    )
}

// ------------------------------------------------ 9. zero components

fn excluded(units: &[SymbolicObject]) -> Vec<SymbolicObject> {
    units
        .iter()
        .map(|x| {
            let vars = x
                .vars
                .iter()
                .map(|v| {
                    let w =
                        v.w.iter()
                            .zip(&v.p)
                            .map(|(&w, &p)| if p == 0.0 { 0.0 } else { w })
                            .collect();
                    ModalValue::new(v.f.clone(), w)
                })
                .collect();
            SymbolicObject::new(x.id.clone(), vars)
        })
        .collect()
}

fn criterion_zero_components() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let schema = Schema::uniform(&[4, 5, 3]).unwrap();
    let units: Vec<SymbolicObject> = (0..80)
        .map(|i| random_unit(&mut rng, &schema, Weights::Count, 0.35, i))
        .collect();
    let zeros = units
        .iter()
        .flat_map(|x| x.vars.iter().flat_map(|v| v.p.iter()))
        .filter(|&&p| p == 0.0)
        .count();
    let manual = excluded(&units);
    let mut notes = Vec::new();
    let mut pass = zeros > 0;
    for kind in [DissimKind::D4, DissimKind::D5, DissimKind::D6] {
        let mut cfg = LeadersConfig::new(4);
        cfg.restarts = 3;
        cfg.seed = 9;
        cfg.init = Init::RandomPartition;
        let (a, b) = match (
            leaders_run(&units, &schema, kind, &cfg),
            leaders_run(&manual, &schema, kind, &cfg),
        ) {
            (Ok(a), Ok(b)) => (a, b),
            (a, b) => {
                pass = false;
                notes.push(format!(
                    "{kind}: leaders failed: {:?} / {:?}",
                    a.err(),
                    b.err()
                ));
                continue;
            }
        };
        let mut worst = rel_diff(a.total_error, b.total_error);
        let mut same = a.labels == b.labels;
        for (x, y) in units.iter().zip(&manual) {
            for t in &a.leaders {
                match (
                    object_dissim(x, t, &schema, kind),
                    object_dissim(y, t, &schema, kind),
                ) {
                    (Ok(p), Ok(q)) => worst = worst.max(rel_diff(p, q)),
                    (Err(_), Err(_)) => {}
                    _ => same = false,
                }
            }
        }
        for (s, t) in a.leaders.iter().zip(&b.leaders) {
            for (p, q) in s.vars.iter().flatten().zip(t.vars.iter().flatten()) {
                worst = worst.max(rel_diff(*p, *q));
            }
        }
        let ta = agglomerate_units(&units, &schema, kind);
        let tb = agglomerate_units(&manual, &schema, kind);
        match (ta, tb) {
            (Ok(ta), Ok(tb)) => {
                for (m, n) in ta.merges.iter().zip(&tb.merges) {
                    same &= (m.left, m.right) == (n.left, n.right);
                    worst = worst.max(rel_diff(m.height, n.height));
                }
            }
            _ => same = false,
        }
        pass &= same && worst <= 1e-12;
        notes.push(format!(
            "{kind}: same partitions and trees {same}, max rel {worst:.1e}"
        ));
    }
    outcome(
        pass,
        format!("{zeros} zero components; {}", notes.join("; ")),
    )
}

// ------------------------------------------------ driver

fn main() {
    let criteria: [Criterion; 9] = [
        (
            "leader optimality against a numeric minimiser",
            criterion_leader_oracle,
        ),
        (
            "Ward equivalence of the closed-form D",
            criterion_ward_equivalence,
        ),
        (
            "merged leader equals leader of the union",
            criterion_merge_consistency,
        ),
        ("Huygens decomposition for d1", criterion_huygens),
        (
            "leader normalisation and pooled distributions",
            criterion_properties,
        ),
        (
            "leaders monotonicity and determinism",
            criterion_monotone_deterministic,
        ),
        (
            "two-step recovery and special-case heights",
            criterion_two_step,
        ),
        (
            "singleton merge height is half the distance",
            criterion_singleton_ward,
        ),
        (
            "zero components match manual exclusion",
            criterion_zero_components,
        ),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} [{}] {name}: {} [{:.2}s]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
