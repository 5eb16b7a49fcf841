//! Micro-data to symbolic objects.

use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;
use symclust_core::{ModalValue, SymbolicObject, VariableKind, VariableSpec};

use crate::error::{Error, Result};
use crate::schema_file::{SchemaFile, WeightScheme};

/// Cell contents treated as missing.
pub const MISSING: [&str; 3] = ["", "NA", "."];

fn is_missing(s: &str) -> bool {
    MISSING.contains(&s.trim())
}

fn na_or_err(spec: &VariableSpec) -> Result<usize> {
    spec.na_index().ok_or_else(|| {
        Error::Data(format!(
            "missing value for '{}', which has no NA category",
            spec.name
        ))
    })
}

/// Left-closed binning of a numeric value; `None` (or NaN) goes to NA.
pub fn categorize(value: Option<f64>, spec: &VariableSpec) -> Result<usize> {
    let breaks = spec
        .breaks
        .as_deref()
        .ok_or_else(|| Error::Config(format!("variable '{}' is not numeric-binned", spec.name)))?;
    match value {
        Some(v) if !v.is_nan() => Ok(breaks.partition_point(|&b| b <= v)),
        _ => na_or_err(spec),
    }
}

/// Category index of a raw cell.
pub fn category_of(raw: Option<&str>, spec: &VariableSpec) -> Result<usize> {
    let raw = raw.filter(|s| !is_missing(s)).map(str::trim);
    match spec.kind {
        VariableKind::NumericBinned => {
            let value = raw
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::Data(format!("'{}': '{s}' is not a number", spec.name)))
                })
                .transpose()?;
            categorize(value, spec)
        }
        VariableKind::Categorical => match raw {
            None => na_or_err(spec),
            Some(s) => spec
                .categories
                .iter()
                .position(|c| c == s)
                .ok_or_else(|| Error::Data(format!("'{}': unknown category '{s}'", spec.name))),
        },
    }
}

/// One unit from its member rows. `rows[r][i]` is the raw cell of variable
/// `i`; `custom_weight` is used by the custom-column scheme.
pub fn aggregate_unit(
    id: &str,
    rows: &[Vec<Option<String>>],
    sf: &SchemaFile,
    unit_weight: f64,
    custom_weight: Option<f64>,
) -> Result<SymbolicObject> {
    if rows.is_empty() {
        return Err(Error::Data(format!("unit '{id}' has no rows")));
    }
    if !(unit_weight >= 0.0 && unit_weight.is_finite()) {
        return Err(Error::Data(format!(
            "unit '{id}' has invalid weight {unit_weight}"
        )));
    }
    let mut vars = Vec::with_capacity(sf.schema.len());
    for (i, spec) in sf.schema.variables().iter().enumerate() {
        let mut counts = vec![0.0; spec.arity()];
        for row in rows {
            let raw = row.get(i).and_then(|c| c.as_deref());
            let j = category_of(raw, spec).map_err(|e| Error::Data(format!("unit '{id}': {e}")))?;
            counts[j] += 1.0;
        }
        let scale = if sf.share[i] {
            unit_weight / rows.len() as f64
        } else {
            unit_weight
        };
        let f: Vec<f64> = counts.iter().map(|c| c * scale).collect();
        let n: f64 = f.iter().sum();
        let w = match sf.weight_scheme {
            WeightScheme::Ones => 1.0,
            WeightScheme::PerVariableN => n,
            WeightScheme::CustomColumn => custom_weight
                .ok_or_else(|| Error::Data(format!("unit '{id}' lacks a custom weight")))?,
        };
        vars.push(ModalValue::with_count(f, n, vec![w; spec.arity()]));
    }
    Ok(SymbolicObject::new(id, vars))
}

fn parse_weight(raw: &str, column: &str, line: u64) -> Result<f64> {
    let w: f64 = raw
        .trim()
        .parse()
        .map_err(|_| Error::Data(format!("line {line}: '{column}' = '{raw}' is not a number")))?;
    if !(w >= 0.0 && w.is_finite()) {
        return Err(Error::Data(format!(
            "line {line}: '{column}' = {w} must be a nonnegative number"
        )));
    }
    Ok(w)
}

struct UnitRows {
    id: String,
    weight: f64,
    custom: Option<f64>,
    rows: Vec<Vec<Option<String>>>,
}

/// Reads comma or tab separated micro-data (one row per member record).
/// Units keep the order of their first appearance; the unit weight is the
/// product of the weight columns on the unit's first row.
pub fn read_microdata(path: &Path, sf: &SchemaFile) -> Result<Vec<SymbolicObject>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_microdata(&text, sf).map_err(|e| match e {
        Error::Data(msg) => Error::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_microdata(text: &str, sf: &SchemaFile) -> Result<Vec<SymbolicObject>> {
    let header_line = text.lines().next().unwrap_or("");
    let delimiter = if header_line.contains('\t') {
        b'\t'
    } else {
        b','
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Data(e.to_string()))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Data(format!("missing column '{name}'")))
    };
    let unit_col = col(&sf.unit_column)?;
    let var_cols = sf
        .columns
        .iter()
        .map(|c| col(c))
        .collect::<Result<Vec<_>>>()?;
    let weight_cols = sf
        .weight_columns
        .iter()
        .map(|c| col(c))
        .collect::<Result<Vec<_>>>()?;
    let custom_col = match (&sf.weight_scheme, &sf.weight_column) {
        (WeightScheme::CustomColumn, Some(c)) => Some(col(c)?),
        _ => None,
    };

    let mut index: HashMap<String, usize> = HashMap::new();
    let mut units: Vec<UnitRows> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Data(e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let get = |c: usize| rec.get(c).unwrap_or("");
        let id = get(unit_col).trim();
        if id.is_empty() {
            return Err(Error::Data(format!("line {line}: empty unit id")));
        }
        let row: Vec<Option<String>> = var_cols
            .iter()
            .map(|&c| rec.get(c).map(str::to_string))
            .collect();
        let slot = match index.get(id) {
            Some(&s) => s,
            None => {
                let mut weight = 1.0;
                for (&c, name) in weight_cols.iter().zip(&sf.weight_columns) {
                    weight *= parse_weight(get(c), name, line)?;
                }
                let custom = custom_col
                    .map(|c| parse_weight(get(c), sf.weight_column.as_deref().unwrap_or(""), line))
                    .transpose()?;
                index.insert(id.to_string(), units.len());
                units.push(UnitRows {
                    id: id.to_string(),
                    weight,
                    custom,
                    rows: Vec::new(),
                });
                units.len() - 1
            }
        };
        units[slot].rows.push(row);
    }
    units
        .par_iter()
        .map(|u| aggregate_unit(&u.id, &u.rows, sf, u.weight, u.custom))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema_file::parse_schema;

    fn schema(extra: &str) -> SchemaFile {
        let text = format!(
            r#"
            {extra}
            [[variables]]
            name = "gender"
            categories = ["M", "F"]
            [[variables]]
            name = "age"
            kind = "numeric-binned"
            breaks = [20, 35, 65]
            na_category = true
            [[variables]]
            name = "country"
            categories = ["AT", "SI"]
            share = true
            "#
        );
        parse_schema(&text, Path::new("s.toml")).unwrap()
    }

    fn rows(cells: &[[&str; 3]]) -> Vec<Vec<Option<String>>> {
        cells
            .iter()
            .map(|r| r.iter().map(|c| Some(c.to_string())).collect())
            .collect()
    }

    #[test]
    fn left_closed_bins() {
        let sf = schema("");
        let age = &sf.schema.variables()[1];
        assert_eq!(categorize(Some(19.0), age).unwrap(), 0);
        assert_eq!(categorize(Some(20.0), age).unwrap(), 1);
        assert_eq!(categorize(Some(64.9), age).unwrap(), 2);
        assert_eq!(categorize(Some(65.0), age).unwrap(), 3);
        assert_eq!(categorize(None, age).unwrap(), 4);
        assert_eq!(category_of(Some("NA"), age).unwrap(), 4);
        assert_eq!(category_of(Some(""), age).unwrap(), 4);
    }

    #[test]
    fn missing_without_na_category_is_error() {
        let sf = schema("");
        assert!(category_of(None, &sf.schema.variables()[0]).is_err());
        assert!(category_of(Some("X"), &sf.schema.variables()[0]).is_err());
    }

    #[test]
    fn household_counts() {
        let sf = schema("");
        let r = rows(&[["M", "40", "AT"], ["M", "12", "AT"], ["F", "", "AT"]]);
        let x = aggregate_unit("h1", &r, &sf, 1.0, None).unwrap();
        assert_eq!(x.vars[0].f, vec![2.0, 1.0]);
        assert_eq!(x.vars[0].p, vec![2.0 / 3.0, 1.0 / 3.0]);
        assert_eq!(x.vars[0].w, vec![3.0, 3.0]);
        assert_eq!(x.vars[1].f, vec![1.0, 0.0, 1.0, 0.0, 1.0]);
        assert_eq!(x.vars[2].f, vec![1.0, 0.0]);
        assert_eq!(x.vars[2].n, 1.0);
        assert_eq!(x.vars[2].p, vec![1.0, 0.0]);

        let y = aggregate_unit("h1", &r, &sf, 2.0, None).unwrap();
        assert_eq!(y.vars[0].f, vec![4.0, 2.0]);
        assert_eq!(y.vars[0].w, vec![6.0, 6.0]);
        assert_eq!(y.vars[0].p, x.vars[0].p);
    }

    #[test]
    fn weight_schemes() {
        let r = rows(&[["M", "40", "AT"], ["F", "41", "AT"]]);
        let ones = schema("weight_scheme = \"ones\"");
        let x = aggregate_unit("h", &r, &ones, 3.0, None).unwrap();
        assert_eq!(x.vars[0].w, vec![1.0, 1.0]);
        let custom = schema("weight_scheme = \"custom-column\"\nweight_column = \"w\"");
        let x = aggregate_unit("h", &r, &custom, 1.0, Some(0.25)).unwrap();
        assert_eq!(x.vars[1].w, vec![0.25; 5]);
        assert!(aggregate_unit("h", &r, &custom, 1.0, None).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let sf = schema("");
        assert!(aggregate_unit("h", &[], &sf, 1.0, None).is_err());
        let r = rows(&[["M", "40", "AT"]]);
        assert!(aggregate_unit("h", &r, &sf, -1.0, None).is_err());
    }

    #[test]
    fn reads_csv_and_tsv() {
        let sf = schema("weight_columns = [\"dw\", \"pw\"]");
        let csv = "unit_id,gender,age,country,dw,pw\n\
                   b,F,70,SI,2,0.5\n\
                   a,M,30,AT,1,1\n\
                   b,M,NA,SI,2,0.5\n";
        let units = parse_microdata(csv, &sf).unwrap();
        assert_eq!(units.len(), 2);
        assert_eq!(units[0].id, "b");
        assert_eq!(units[0].vars[0].f, vec![1.0, 1.0]);
        assert_eq!(units[0].vars[1].f, vec![0.0, 0.0, 0.0, 1.0, 1.0]);
        assert_eq!(units[0].vars[2].f, vec![0.0, 1.0]);
        let tsv = csv.replace(',', "\t");
        assert_eq!(parse_microdata(&tsv, &sf).unwrap(), units);
    }

    #[test]
    fn missing_column_reported() {
        let sf = schema("");
        let e = parse_microdata("unit_id,gender,age\nx,M,3\n", &sf).unwrap_err();
        assert!(e.to_string().contains("country"), "{e}");
    }
}
