//! Seeded synthetic household-style data with planted groups.

use std::collections::BTreeMap;
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use symclust_core::{ModalValue, SymbolicObject};

use crate::error::{Error, Result};
use crate::schema_file::{KindDef, SchemaDef, VariableDef, WeightScheme};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthVariable {
    pub name: String,
    pub categories: Vec<String>,
    #[serde(default = "one")]
    pub alpha: f64,
    /// One draw per unit instead of one per member.
    #[serde(default)]
    pub share: bool,
}

fn one() -> f64 {
    1.0
}

fn unit_range() -> [f64; 2] {
    [1.0, 1.0]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthGroup {
    #[serde(default)]
    pub name: Option<String>,
    pub size: usize,
    /// Inclusive range of members per unit.
    pub members: [usize; 2],
    /// Range of the unit weight, drawn uniformly.
    #[serde(default = "unit_range")]
    pub unit_weight: [f64; 2],
    /// Category probabilities per variable name.
    pub templates: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthProfile {
    #[serde(default)]
    pub weight_scheme: WeightScheme,
    pub variables: Vec<SynthVariable>,
    pub groups: Vec<SynthGroup>,
}

/// Generated units with their planted group labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub units: Vec<SymbolicObject>,
    pub labels: Vec<usize>,
    pub schema: SchemaDef,
}

impl SynthProfile {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::parse(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn schema_def(&self) -> SchemaDef {
        SchemaDef {
            alpha_normalized: false,
            unit_column: "unit_id".to_string(),
            weight_columns: Vec::new(),
            weight_scheme: self.weight_scheme,
            weight_column: None,
            variables: self
                .variables
                .iter()
                .map(|v| VariableDef {
                    name: v.name.clone(),
                    column: None,
                    kind: KindDef::Categorical,
                    categories: Some(v.categories.clone()),
                    breaks: None,
                    na_category: false,
                    alpha: v.alpha,
                    share: v.share,
                    delta: None,
                })
                .collect(),
        }
    }

    fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("profile: {m}")));
        if self.weight_scheme == WeightScheme::CustomColumn {
            return bad("custom-column weights cannot be generated".into());
        }
        if self.groups.is_empty() {
            return bad("no groups".into());
        }
        self.schema_def().build()?;
        for (g, grp) in self.groups.iter().enumerate() {
            let [lo, hi] = grp.members;
            if lo == 0 || lo > hi {
                return bad(format!(
                    "group {g}: members range must satisfy 1 <= lo <= hi"
                ));
            }
            let [a, b] = grp.unit_weight;
            if !(a > 0.0 && a <= b && b.is_finite()) {
                return bad(format!(
                    "group {g}: unit_weight range must be positive and ordered"
                ));
            }
            for name in grp.templates.keys() {
                if !self.variables.iter().any(|v| &v.name == name) {
                    return bad(format!("group {g}: template for unknown variable '{name}'"));
                }
            }
            for v in &self.variables {
                let Some(t) = grp.templates.get(&v.name) else {
                    return bad(format!("group {g}: no template for '{}'", v.name));
                };
                if t.len() != v.categories.len() {
                    return bad(format!(
                        "group {g}: template for '{}' has {} entries, expected {}",
                        v.name,
                        t.len(),
                        v.categories.len()
                    ));
                }
                if t.iter().any(|&x| !(x >= 0.0 && x.is_finite())) || t.iter().sum::<f64>() <= 0.0 {
                    return bad(format!(
                        "group {g}: template for '{}' is not a distribution",
                        v.name
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Units of every group in group order, ids `u0000, u0001, ...`.
pub fn generate_synthetic(profile: &SynthProfile, seed: u64) -> Result<SynthData> {
    profile.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut units = Vec::new();
    let mut labels = Vec::new();
    let total: usize = profile.groups.iter().map(|g| g.size).sum();
    let width = total.saturating_sub(1).to_string().len().max(4);
    for (g, grp) in profile.groups.iter().enumerate() {
        let samplers: Vec<WeightedIndex<f64>> = profile
            .variables
            .iter()
            .map(|v| WeightedIndex::new(&grp.templates[&v.name]).expect("checked template"))
            .collect();
        for _ in 0..grp.size {
            let members = rng.gen_range(grp.members[0]..=grp.members[1]);
            let [a, b] = grp.unit_weight;
            let uw = if a == b { a } else { rng.gen_range(a..b) };
            let vars = profile
                .variables
                .iter()
                .zip(&samplers)
                .map(|(v, s)| {
                    let draws = if v.share { 1 } else { members };
                    let mut f = vec![0.0; v.categories.len()];
                    for _ in 0..draws {
                        f[s.sample(&mut rng)] += uw;
                    }
                    let n: f64 = f.iter().sum();
                    let w = match profile.weight_scheme {
                        WeightScheme::Ones => 1.0,
                        _ => n,
                    };
                    ModalValue::with_count(f, n, vec![w; v.categories.len()])
                })
                .collect();
            units.push(SymbolicObject::new(
                format!("u{:0width$}", units.len()),
                vars,
            ));
            labels.push(g);
        }
    }
    Ok(SynthData {
        units,
        labels,
        schema: profile.schema_def(),
    })
}
