//! Per-cluster pooled distributions of every variable, including variables
//! with zero weight in the dissimilarity.

use std::io::Write;
use std::path::Path;

use symclust_core::{Schema, SymbolicObject};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow {
    pub cluster: usize,
    pub variable: String,
    pub category: String,
    /// Units in the cluster.
    pub members: usize,
    /// Pooled count `Σ n` of the variable.
    pub n: f64,
    /// Pooled frequency `Σ f` of the category.
    pub f: f64,
    /// `f / n`, the pooled distribution (0 when `n = 0`).
    pub share: f64,
    /// Aggregate component weight `Σ w`.
    pub weight: f64,
}

/// Profiles the flat clustering `labels` over `units`. Without a schema,
/// variables and categories are named by position.
pub fn profile(
    units: &[SymbolicObject],
    labels: &[usize],
    schema: Option<&Schema>,
) -> Result<Vec<ProfileRow>> {
    if units.len() != labels.len() {
        return Err(Error::Data(format!(
            "clustering has {} units but the units file has {}",
            labels.len(),
            units.len()
        )));
    }
    let Some(first) = units.first() else {
        return Ok(Vec::new());
    };
    let arities: Vec<usize> = first.vars.iter().map(|v| v.f.len()).collect();
    for x in units {
        if let Some(s) = schema {
            x.check_shape(s)?;
        } else if x.vars.iter().map(|v| v.f.len()).ne(arities.iter().copied()) {
            return Err(Error::Data(format!("unit '{}' differs in shape", x.id)));
        }
    }
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut rows = Vec::new();
    for c in 0..k {
        let members: Vec<&SymbolicObject> = units
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == c)
            .map(|(x, _)| x)
            .collect();
        for (i, &arity) in arities.iter().enumerate() {
            let spec = schema.map(|s| &s.variables()[i]);
            let n: f64 = members.iter().map(|x| x.vars[i].n).sum();
            for j in 0..arity {
                let f: f64 = members.iter().map(|x| x.vars[i].f[j]).sum();
                rows.push(ProfileRow {
                    cluster: c,
                    variable: spec.map_or_else(|| format!("v{i}"), |s| s.name.clone()),
                    category: spec.map_or_else(|| j.to_string(), |s| s.categories[j].clone()),
                    members: members.len(),
                    n,
                    f,
                    share: if n > 0.0 { f / n } else { 0.0 },
                    weight: members.iter().map(|x| x.vars[i].w[j]).sum(),
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_profile<W: Write>(out: W, rows: &[ProfileRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Data(e.to_string());
    w.write_record([
        "cluster", "variable", "category", "members", "n", "f", "share", "weight",
    ])
    .map_err(err)?;
    for r in rows {
        w.write_record([
            r.cluster.to_string(),
            r.variable.clone(),
            r.category.clone(),
            r.members.to_string(),
            r.n.to_string(),
            r.f.to_string(),
            r.share.to_string(),
            r.weight.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(Path::new("<profile>"), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use symclust_core::ModalValue;

    fn unit(id: &str, a: Vec<f64>, b: Vec<f64>) -> SymbolicObject {
        SymbolicObject::new(
            id,
            vec![ModalValue::count_weighted(a), ModalValue::count_weighted(b)],
        )
    }

    #[test]
    fn pooled_shares() {
        let units = vec![
            unit("a", vec![2.0, 1.0], vec![1.0, 0.0]),
            unit("b", vec![0.0, 1.0], vec![0.0, 1.0]),
            unit("c", vec![1.0, 3.0], vec![1.0, 0.0]),
        ];
        let rows = profile(&units, &[0, 0, 1], None).unwrap();
        assert_eq!(rows.len(), 8);
        let r = &rows[0];
        assert_eq!((r.cluster, r.variable.as_str(), r.members), (0, "v0", 2));
        assert_eq!((r.n, r.f, r.share, r.weight), (4.0, 2.0, 0.5, 4.0));
        // a singleton cluster reproduces the unit's distribution
        let single: Vec<f64> = rows
            .iter()
            .filter(|r| r.cluster == 1)
            .map(|r| r.share)
            .collect();
        assert_eq!(single, vec![0.25, 0.75, 1.0, 0.0]);
    }

    #[test]
    fn length_mismatch() {
        let units = vec![unit("a", vec![1.0], vec![1.0])];
        assert!(profile(&units, &[0, 1], None).is_err());
    }
}
