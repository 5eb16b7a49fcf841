//! TOML schema files.
//!
//! ```toml
//! alpha_normalized = false
//! unit_column = "unit_id"
//! weight_columns = ["dweight", "pweight"]   # multiplied into the unit weight
//! weight_scheme = "per-variable-n"          # or "ones", "custom-column"
//!
//! [[variables]]
//! name = "age"
//! kind = "numeric-binned"
//! breaks = [20, 35, 65]
//! na_category = true
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use symclust_core::{DissimKind, Schema, VariableKind, VariableSpec};

use crate::error::{Error, Result};

/// How component weights of a unit are derived from its rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightScheme {
    /// `w = 1` everywhere.
    Ones,
    /// `w = n` per variable.
    #[default]
    PerVariableN,
    /// `w` read from `weight_column` (first row of the unit).
    CustomColumn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindDef {
    #[default]
    Categorical,
    NumericBinned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableDef {
    pub name: String,
    /// Micro-data column; defaults to `name`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
    #[serde(default)]
    pub kind: KindDef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breaks: Option<Vec<f64>>,
    #[serde(default)]
    pub na_category: bool,
    #[serde(default = "one")]
    pub alpha: f64,
    /// Each unit's frequencies sum to its unit weight rather than to its
    /// row count (e.g. a one-hot attribute of the whole unit).
    #[serde(default)]
    pub share: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<String>,
}

fn one() -> f64 {
    1.0
}

fn default_unit_column() -> String {
    "unit_id".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaDef {
    #[serde(default)]
    pub alpha_normalized: bool,
    #[serde(default = "default_unit_column")]
    pub unit_column: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weight_columns: Vec<String>,
    #[serde(default)]
    pub weight_scheme: WeightScheme,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_column: Option<String>,
    #[serde(default)]
    pub variables: Vec<VariableDef>,
}

/// A validated schema together with the ingest settings that accompany it.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaFile {
    pub schema: Schema,
    pub unit_column: String,
    /// Columns whose product forms the unit weight.
    pub weight_columns: Vec<String>,
    pub weight_scheme: WeightScheme,
    pub weight_column: Option<String>,
    /// Micro-data column per variable.
    pub columns: Vec<String>,
    pub share: Vec<bool>,
}

impl SchemaDef {
    pub fn build(&self) -> Result<SchemaFile> {
        if self.weight_scheme == WeightScheme::CustomColumn && self.weight_column.is_none() {
            return Err(Error::Config(
                "weight_scheme = \"custom-column\" requires weight_column".into(),
            ));
        }
        let mut specs = Vec::with_capacity(self.variables.len());
        for v in &self.variables {
            let mut spec = match v.kind {
                KindDef::Categorical => {
                    if v.breaks.is_some() {
                        return Err(Error::Config(format!(
                            "variable '{}': breaks given for a categorical variable",
                            v.name
                        )));
                    }
                    let mut cats = v.categories.clone().ok_or_else(|| {
                        Error::Config(format!("variable '{}': missing categories", v.name))
                    })?;
                    if v.na_category {
                        cats.push("NA".to_string());
                    }
                    let mut s = VariableSpec::categorical(v.name.clone(), cats, v.alpha);
                    s.na_category = v.na_category;
                    s
                }
                KindDef::NumericBinned => {
                    let breaks = v.breaks.clone().ok_or_else(|| {
                        Error::Config(format!("variable '{}': missing breaks", v.name))
                    })?;
                    let cats = v.categories.clone().map(|mut c| {
                        if v.na_category {
                            c.push("NA".to_string());
                        }
                        c
                    });
                    VariableSpec::binned(v.name.clone(), breaks, cats, v.na_category, v.alpha)
                }
            };
            if let Some(d) = &v.delta {
                spec.delta = Some(parse_kind(d)?);
            }
            specs.push(spec);
        }
        let schema = Schema::new(specs, self.alpha_normalized)?;
        Ok(SchemaFile {
            schema,
            unit_column: self.unit_column.clone(),
            weight_columns: self.weight_columns.clone(),
            weight_scheme: self.weight_scheme,
            weight_column: self.weight_column.clone(),
            columns: self
                .variables
                .iter()
                .map(|v| v.column.clone().unwrap_or_else(|| v.name.clone()))
                .collect(),
            share: self.variables.iter().map(|v| v.share).collect(),
        })
    }

    /// The definition of an in-memory schema with categorical variables.
    pub fn from_schema(schema: &Schema, weight_scheme: WeightScheme) -> Self {
        let variables = schema
            .variables()
            .iter()
            .map(|s| {
                let binned = s.kind == VariableKind::NumericBinned;
                let mut cats = s.categories.clone();
                if s.na_category {
                    cats.pop();
                }
                VariableDef {
                    name: s.name.clone(),
                    column: None,
                    kind: if binned {
                        KindDef::NumericBinned
                    } else {
                        KindDef::Categorical
                    },
                    categories: Some(cats),
                    breaks: s.breaks.clone(),
                    na_category: s.na_category,
                    alpha: s.alpha,
                    share: false,
                    delta: s.delta.map(|d| d.name().to_string()),
                }
            })
            .collect();
        SchemaDef {
            alpha_normalized: false,
            unit_column: default_unit_column(),
            weight_columns: Vec::new(),
            weight_scheme,
            weight_column: None,
            variables,
        }
    }
}

pub fn parse_kind(s: &str) -> Result<DissimKind> {
    s.parse::<DissimKind>()
        .map_err(|_| Error::Config(format!("unknown dissimilarity '{s}' (expected d1..d6)")))
}

pub fn parse_schema(text: &str, path: &Path) -> Result<SchemaFile> {
    let def: SchemaDef = toml::from_str(text).map_err(|e| Error::parse(path, e))?;
    def.build().map_err(|e| match e {
        Error::Config(msg) => Error::parse(path, msg),
        Error::Core(c) => Error::parse(path, c),
        other => other,
    })
}

pub fn load_schema(path: &Path) -> Result<SchemaFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_schema(&text, path)
}

pub fn write_schema(def: &SchemaDef, path: &Path) -> Result<()> {
    let text = toml::to_string(def).map_err(|e| Error::Data(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<SchemaFile> {
        parse_schema(text, Path::new("test.toml"))
    }

    #[test]
    fn age_bins_with_na() {
        let s = parse(
            r#"
            [[variables]]
            name = "age"
            kind = "numeric-binned"
            breaks = [20, 35, 65]
            na_category = true
            "#,
        )
        .unwrap();
        let v = &s.schema.variables()[0];
        assert_eq!(v.arity(), 5);
        assert_eq!(v.na_index(), Some(4));
        assert_eq!(s.weight_scheme, WeightScheme::PerVariableN);
        assert_eq!(s.columns, vec!["age"]);
    }

    #[test]
    fn duplicate_labels_rejected() {
        let e = parse(
            r#"
            [[variables]]
            name = "g"
            categories = ["M", "M"]
            "#,
        )
        .unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn empty_variable_list_rejected() {
        assert!(parse("alpha_normalized = true").is_err());
    }

    #[test]
    fn descending_breaks_rejected() {
        let e = parse(
            r#"
            [[variables]]
            name = "age"
            kind = "numeric-binned"
            breaks = [35, 20]
            "#,
        )
        .unwrap_err();
        assert!(e.to_string().contains("ascending"), "{e}");
    }

    #[test]
    fn syntax_error_has_location() {
        let e = parse("[[variables]]\nname = \n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn unknown_delta_is_config_error() {
        let e = parse(
            r#"
            [[variables]]
            name = "g"
            categories = ["a", "b"]
            delta = "d9"
            "#,
        )
        .unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn definition_round_trip() {
        let s = parse(
            r#"
            alpha_normalized = false
            weight_scheme = "ones"
            [[variables]]
            name = "g"
            categories = ["a", "b"]
            na_category = true
            alpha = 0.5
            delta = "d3"
            [[variables]]
            name = "age"
            kind = "numeric-binned"
            breaks = [20, 35]
            "#,
        )
        .unwrap();
        let def = SchemaDef::from_schema(&s.schema, WeightScheme::Ones);
        let text = toml::to_string(&def).unwrap();
        let back = parse(&text).unwrap();
        assert_eq!(back.schema, s.schema);
    }
}
