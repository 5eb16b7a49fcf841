//! The configured clustering run: ingest, leaders, agglomeration, cut,
//! diagnostics and exports.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};
use symclust_core::leaders::{run_restart, select_best};
use symclust_core::{
    agglomerate, cut_height, cut_k, inertia, suggest_k, ClusterSummary, Clustering, Dendrogram,
    DissimKind, Init, LeadersConfig, ModalValue, Schema, SymbolicObject,
};

use crate::error::{Error, Result};
use crate::formats::{read_objects, write_leaders, write_merges, write_objects, LabelTable};
use crate::ingest::read_microdata;
use crate::schema_file::{load_schema, parse_kind, WeightScheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Leaders,
    Hierarchical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitDef {
    #[default]
    RandomUnits,
    RandomPartition,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeadersSection {
    pub k: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub init: InitDef,
    #[serde(default)]
    pub tol: f64,
}

fn default_restarts() -> usize {
    1
}

fn default_max_iter() -> usize {
    100
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutSection {
    pub k: Option<usize>,
    pub height: Option<f64>,
}

/// Run configuration. Relative paths are resolved against the directory
/// holding the config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterConfig {
    pub schema: PathBuf,
    pub units: Option<PathBuf>,
    pub microdata: Option<PathBuf>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default = "default_delta")]
    pub delta: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_stages")]
    pub stages: Vec<Stage>,
    /// Replaces the schema's weight scheme.
    pub weight_scheme: Option<WeightScheme>,
    /// Replaces the schema's variable weights, in schema order.
    pub alpha: Option<Vec<f64>>,
    pub leaders: Option<LeadersSection>,
    pub cut: Option<CutSection>,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_delta() -> String {
    "d1".to_string()
}

fn default_stages() -> Vec<Stage> {
    vec![Stage::Leaders, Stage::Hierarchical]
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl ClusterConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut cfg: ClusterConfig = toml::from_str(text).map_err(|e| Error::parse(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.schema = resolve(base, &cfg.schema);
        cfg.output_dir = resolve(base, &cfg.output_dir);
        for p in [&mut cfg.units, &mut cfg.microdata].into_iter().flatten() {
            *p = resolve(base, p);
        }
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path)
    }

    pub fn kind(&self) -> Result<DissimKind> {
        parse_kind(&self.delta)
    }

    fn has(&self, s: Stage) -> bool {
        self.stages.contains(&s)
    }

    fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        self.kind()?;
        if self.units.is_some() == self.microdata.is_some() {
            return bad("exactly one of `units` and `microdata` must be given");
        }
        if self.stages.is_empty() {
            return bad("`stages` is empty");
        }
        if self.has(Stage::Leaders) && self.leaders.is_none() {
            return bad("the leaders stage needs a [leaders] section");
        }
        if let Some(l) = &self.leaders {
            if l.k == 0 || l.restarts == 0 || l.max_iter == 0 {
                return bad("[leaders]: k, restarts and max_iter must be positive");
            }
            if !(l.tol >= 0.0 && l.tol.is_finite()) {
                return bad("[leaders]: tol must be a nonnegative number");
            }
        }
        if let Some(c) = &self.cut {
            if !self.has(Stage::Hierarchical) {
                return bad("[cut] requires the hierarchical stage");
            }
            if c.k.is_some() == c.height.is_some() {
                return bad("[cut]: give exactly one of k and height");
            }
        }
        if self.units.is_some() && self.weight_scheme == Some(WeightScheme::CustomColumn) {
            return bad("custom-column weights need micro-data input");
        }
        Ok(())
    }

    pub fn leaders_config(&self) -> Option<LeadersConfig> {
        self.leaders.as_ref().map(|l| LeadersConfig {
            k: l.k,
            max_iter: l.max_iter,
            restarts: l.restarts,
            seed: self.seed,
            init: match l.init {
                InitDef::RandomUnits => Init::RandomUnits,
                InitDef::RandomPartition => Init::RandomPartition,
            },
            tol: l.tol,
        })
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub kind: DissimKind,
    pub schema: Schema,
    pub units: Vec<SymbolicObject>,
    pub clustering: Option<Clustering>,
    pub dendrogram: Option<Dendrogram>,
    /// Leaf labels of the dendrogram (unit ids or leader names).
    pub leaves: Vec<String>,
    /// Final flat clustering of the units, when a cut was requested.
    pub cut: Option<Vec<usize>>,
    pub from_microdata: bool,
    pub report: Value,
}

fn reweight(units: &mut [SymbolicObject], scheme: WeightScheme) {
    for x in units {
        for v in &mut x.vars {
            let w = match scheme {
                WeightScheme::Ones => 1.0,
                WeightScheme::PerVariableN => v.n,
                WeightScheme::CustomColumn => unreachable!("rejected by config check"),
            };
            *v = ModalValue::with_count(std::mem::take(&mut v.f), v.n, vec![w; v.w.len()]);
        }
    }
}

/// Loads the schema and units named by the config.
pub fn load_inputs(cfg: &ClusterConfig) -> Result<(Schema, Vec<SymbolicObject>)> {
    let mut sf = load_schema(&cfg.schema)?;
    if let Some(alpha) = &cfg.alpha {
        if alpha.len() != sf.schema.len() {
            return Err(Error::Config(format!(
                "`alpha` has {} entries but the schema has {} variables",
                alpha.len(),
                sf.schema.len()
            )));
        }
        let mut vars = sf.schema.variables().to_vec();
        for (v, &a) in vars.iter_mut().zip(alpha) {
            v.alpha = a;
        }
        sf.schema = Schema::new(vars, sf.schema.alpha_normalized())?;
    }
    let units = match (&cfg.units, &cfg.microdata) {
        (Some(p), _) => {
            let mut units = read_objects(p, Some(&sf.schema))?;
            if let Some(scheme) = cfg.weight_scheme {
                reweight(&mut units, scheme);
            }
            units
        }
        (None, Some(p)) => {
            if let Some(scheme) = cfg.weight_scheme {
                sf.weight_scheme = scheme;
            }
            read_microdata(p, &sf)?
        }
        (None, None) => unreachable!("rejected by config check"),
    };
    Ok((sf.schema, units))
}

fn sizes(labels: &[usize], k: usize) -> Vec<usize> {
    let mut s = vec![0; k];
    for &l in labels {
        s[l] += 1;
    }
    s
}

/// Runs the configured stages. Restarts run on the rayon pool unless
/// `sequential`; results are identical either way.
pub fn run(cfg: &ClusterConfig, sequential: bool) -> Result<RunOutput> {
    let kind = cfg.kind()?;
    let (schema, units) = load_inputs(cfg)?;
    if units.is_empty() {
        return Err(Error::Data("no units".into()));
    }
    let mut warnings: Vec<String> = Vec::new();
    let mut report = json!({
        "delta": kind.name(),
        "seed": cfg.seed,
        "units": units.len(),
        "variables": schema.variables().iter().map(|v| &v.name).collect::<Vec<_>>(),
        "alpha": schema.alphas().collect::<Vec<_>>(),
    });

    let clustering = match cfg.leaders_config().filter(|_| cfg.has(Stage::Leaders)) {
        Some(lc) => {
            lc.validate(units.len())?;
            let one = |r| run_restart(&units, &schema, kind, &lc, r);
            let runs = if sequential {
                (0..lc.restarts)
                    .map(one)
                    .collect::<symclust_core::Result<Vec<_>>>()?
            } else {
                (0..lc.restarts)
                    .into_par_iter()
                    .map(one)
                    .collect::<symclust_core::Result<Vec<_>>>()?
            };
            let unconverged = runs.iter().filter(|r| !r.converged).count();
            if unconverged > 0 {
                warnings.push(format!(
                    "{unconverged} of {} restarts stopped before the partition settled",
                    lc.restarts
                ));
            }
            let c = select_best(kind, runs).expect("restarts > 0");
            report["leaders"] = json!({
                "k": lc.k,
                "restarts": lc.restarts,
                "max_iter": lc.max_iter,
                "best_restart": c.best_restart,
                "restart_errors": c.restart_errors,
                "trace": c.trace,
                "iterations": c.iterations,
                "converged": c.converged,
                "total_error": c.total_error,
                "cluster_errors": c.cluster_errors,
                "cluster_sizes": c.aggregates.iter().map(|a| a.count).collect::<Vec<_>>(),
            });
            Some(c)
        }
        None => None,
    };

    let (dendrogram, leaves) = if cfg.has(Stage::Hierarchical) {
        let (items, leaves): (Vec<ClusterSummary>, Vec<String>) = match &clustering {
            Some(c) => c
                .aggregates
                .iter()
                .zip(&c.leaders)
                .enumerate()
                .map(|(i, (a, t))| {
                    (
                        ClusterSummary {
                            aggregates: a.clone(),
                            leader: t.clone(),
                        },
                        format!("L{i}"),
                    )
                })
                .unzip(),
            None => units
                .iter()
                .map(|x| (ClusterSummary::from_object(x, &schema, kind), x.id.clone()))
                .unzip(),
        };
        let d = agglomerate(items, &schema, kind)?;
        if d.clamped > 0 {
            warnings.push(format!("{} negative merge heights clamped to 0", d.clamped));
        }
        if d.inversions > 0 {
            warnings.push(format!(
                "{} height inversions in the merge sequence",
                d.inversions
            ));
        }
        report["hierarchical"] = json!({
            "leaves": d.leaf_count(),
            "merges": d.merges.len(),
            "heights": d.merges.iter().map(|m| m.height).collect::<Vec<_>>(),
            "clamped": d.clamped,
            "inversions": d.inversions,
            "suggested_k": suggest_k(&d.merges),
        });
        (Some(d), leaves)
    } else {
        (None, Vec::new())
    };

    let cut = match (&cfg.cut, &dendrogram) {
        (Some(c), Some(d)) => {
            let n = d.leaf_count();
            let leaf_labels = match (c.k, c.height) {
                (Some(k), _) => cut_k(n, &d.merges, k)?,
                (None, Some(h)) => cut_height(n, &d.merges, h)?,
                _ => unreachable!("rejected by config check"),
            };
            let unit_labels: Vec<usize> = match &clustering {
                Some(cl) => cl.labels.iter().map(|&l| leaf_labels[l]).collect(),
                None => leaf_labels,
            };
            let k = unit_labels.iter().max().map_or(0, |m| m + 1);
            report["cut"] = json!({
                "k": k,
                "requested_k": c.k,
                "height": c.height,
                "sizes": sizes(&unit_labels, k),
            });
            Some(unit_labels)
        }
        _ => None,
    };

    let final_labels = cut
        .as_ref()
        .map(|l| (l.clone(), l.iter().max().map_or(0, |m| m + 1)))
        .or_else(|| clustering.as_ref().map(|c| (c.labels.clone(), c.k())));
    if let Some((labels, k)) = final_labels {
        match inertia(&units, &labels, k, &schema, kind) {
            Ok(r) => {
                report["inertia"] = json!({
                    "total": r.total,
                    "within": r.within,
                    "between": r.between,
                    "residual": r.residual,
                });
            }
            Err(e) => warnings.push(format!("inertia not computed: {e}")),
        }
    }
    report["warnings"] = json!(warnings);

    Ok(RunOutput {
        kind,
        schema,
        units,
        clustering,
        dendrogram,
        leaves,
        cut,
        from_microdata: cfg.microdata.is_some(),
        report,
    })
}

impl RunOutput {
    pub fn assignments(&self) -> LabelTable {
        let ids = self.units.iter().map(|x| x.id.clone()).collect();
        let mut t = LabelTable::new(ids);
        match &self.clustering {
            Some(c) => t = t.with("leader", c.labels.clone()),
            None if self.dendrogram.is_some() => {
                t = t.with("leaf", (0..self.units.len()).collect())
            }
            None => {}
        }
        if let Some(cut) = &self.cut {
            t = t.with("cluster", cut.clone());
        }
        t
    }

    /// Writes `assignments.csv`, `leaders.jsonl`, `merges.csv`,
    /// `leaves.csv` and `report.json` (whichever apply) into `dir`, plus
    /// `units.jsonl` when the units were built from micro-data.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        let path = dir.join("assignments.csv");
        self.assignments().write(&path, "unit_id")?;
        written.push(path);
        if let Some(c) = &self.clustering {
            let path = dir.join("leaders.jsonl");
            write_leaders(&path, &c.leaders, &c.aggregates, &c.cluster_errors)?;
            written.push(path);
        }
        if let Some(d) = &self.dendrogram {
            let path = dir.join("merges.csv");
            write_merges(&path, &d.merges)?;
            written.push(path);
            let path = dir.join("leaves.csv");
            let sizes = d.nodes[..d.leaf_count()]
                .iter()
                .map(|n| n.member_count())
                .collect();
            LabelTable::new(self.leaves.clone())
                .with("size", sizes)
                .write(&path, "leaf")?;
            written.push(path);
        }
        if self.from_microdata {
            let path = dir.join("units.jsonl");
            write_objects(&path, &self.units)?;
            written.push(path);
        }
        let path = dir.join("report.json");
        let mut text = serde_json::to_string_pretty(&self.report).expect("report serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(written)
    }
}
