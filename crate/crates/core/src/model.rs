//! Domain types: schemas, symbolic objects, leaders and dissimilarity kinds.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Tolerance on `Σ p = 1` for a variable with a positive count.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Tolerance on `Σ α = 1` for a normalized schema.
pub const ALPHA_SUM_TOL: f64 = 1e-12;

/// The six basic dissimilarities between a unit component `p` and a leader
/// component `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DissimKind {
    /// `(p - t)^2`
    D1,
    /// `((p - t) / t)^2`
    D2,
    /// `(p - t)^2 / t`
    D3,
    /// `((p - t) / p)^2`
    D4,
    /// `(p - t)^2 / p`
    D5,
    /// `(p - t)^2 / (p t)`
    D6,
}

impl DissimKind {
    pub const ALL: [DissimKind; 6] = [
        DissimKind::D1,
        DissimKind::D2,
        DissimKind::D3,
        DissimKind::D4,
        DissimKind::D5,
        DissimKind::D6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DissimKind::D1 => "d1",
            DissimKind::D2 => "d2",
            DissimKind::D3 => "d3",
            DissimKind::D4 => "d4",
            DissimKind::D5 => "d5",
            DissimKind::D6 => "d6",
        }
    }

    /// Kinds that divide by the leader component.
    pub fn divides_by_leader(self) -> bool {
        matches!(self, DissimKind::D2 | DissimKind::D3 | DissimKind::D6)
    }

    /// Kinds that divide by the unit component (and so ignore `p = 0`).
    pub fn divides_by_unit(self) -> bool {
        matches!(self, DissimKind::D4 | DissimKind::D5 | DissimKind::D6)
    }
}

impl fmt::Display for DissimKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseKindError(pub String);

impl fmt::Display for ParseKindError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown dissimilarity '{}' (expected d1..d6)", self.0)
    }
}

impl core::error::Error for ParseKindError {}

impl FromStr for DissimKind {
    type Err = ParseKindError;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let digit = lower
            .strip_prefix("delta")
            .or_else(|| lower.strip_prefix('d'))
            .or_else(|| lower.strip_prefix('δ'))
            .unwrap_or("");
        match digit {
            "1" => Ok(DissimKind::D1),
            "2" => Ok(DissimKind::D2),
            "3" => Ok(DissimKind::D3),
            "4" => Ok(DissimKind::D4),
            "5" => Ok(DissimKind::D5),
            "6" => Ok(DissimKind::D6),
            _ => Err(ParseKindError(String::from(s))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariableKind {
    Categorical,
    NumericBinned,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableSpec {
    pub name: String,
    pub kind: VariableKind,
    pub categories: Vec<String>,
    /// Bin boundaries of a numeric-binned variable, strictly ascending.
    pub breaks: Option<Vec<f64>>,
    /// Whether the last category collects missing values.
    pub na_category: bool,
    pub alpha: f64,
    /// Overrides the run-wide dissimilarity for this variable.
    pub delta: Option<DissimKind>,
}

impl VariableSpec {
    pub fn categorical<S: Into<String>>(name: S, categories: Vec<String>, alpha: f64) -> Self {
        VariableSpec {
            name: name.into(),
            kind: VariableKind::Categorical,
            categories,
            breaks: None,
            na_category: false,
            alpha,
            delta: None,
        }
    }

    /// A categorical variable with `k` generated labels `c0..c{k-1}`.
    pub fn with_arity<S: Into<String>>(name: S, k: usize, alpha: f64) -> Self {
        let categories = (0..k).map(|j| format!("c{j}")).collect();
        Self::categorical(name, categories, alpha)
    }

    /// Numeric variable binned left-closed at `breaks`. Labels are generated
    /// when `categories` is `None`.
    pub fn binned<S: Into<String>>(
        name: S,
        breaks: Vec<f64>,
        categories: Option<Vec<String>>,
        na_category: bool,
        alpha: f64,
    ) -> Self {
        let categories = categories.unwrap_or_else(|| bin_labels(&breaks, na_category));
        VariableSpec {
            name: name.into(),
            kind: VariableKind::NumericBinned,
            categories,
            breaks: Some(breaks),
            na_category,
            alpha,
            delta: None,
        }
    }

    pub fn arity(&self) -> usize {
        self.categories.len()
    }

    /// Index of the NA bucket, when present.
    pub fn na_index(&self) -> Option<usize> {
        if self.na_category {
            Some(self.categories.len() - 1)
        } else {
            None
        }
    }

    pub fn effective_kind(&self, run_kind: DissimKind) -> DissimKind {
        self.delta.unwrap_or(run_kind)
    }

    fn check(&self) -> core::result::Result<(), String> {
        if self.categories.is_empty() {
            return Err(format!("variable '{}' has no categories", self.name));
        }
        for (a, label) in self.categories.iter().enumerate() {
            if self.categories[..a].contains(label) {
                return Err(format!(
                    "variable '{}' repeats category label '{label}'",
                    self.name
                ));
            }
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(format!(
                "variable '{}' has invalid alpha {}",
                self.name, self.alpha
            ));
        }
        match (&self.kind, &self.breaks) {
            (VariableKind::NumericBinned, None) => {
                return Err(format!("numeric variable '{}' has no breaks", self.name));
            }
            (VariableKind::Categorical, Some(_)) => {
                return Err(format!(
                    "categorical variable '{}' cannot have breaks",
                    self.name
                ));
            }
            (VariableKind::NumericBinned, Some(breaks)) => {
                if breaks.windows(2).any(|w| !(w[0] < w[1])) || breaks.iter().any(|b| b.is_nan()) {
                    return Err(format!(
                        "breaks of '{}' are not strictly ascending",
                        self.name
                    ));
                }
                let bins = self.arity() - usize::from(self.na_category);
                if breaks.len() + 1 != bins {
                    return Err(format!(
                        "variable '{}' has {} breaks but {} non-NA categories",
                        self.name,
                        breaks.len(),
                        bins
                    ));
                }
            }
            (VariableKind::Categorical, None) => {}
        }
        Ok(())
    }
}

fn bin_labels(breaks: &[f64], na_category: bool) -> Vec<String> {
    let mut labels = Vec::with_capacity(breaks.len() + 2);
    if breaks.is_empty() {
        labels.push(String::from("all"));
    } else {
        labels.push(format!("<{}", breaks[0]));
        for w in breaks.windows(2) {
            labels.push(format!("{}-{}", w[0], w[1]));
        }
        labels.push(format!("{}+", breaks[breaks.len() - 1]));
    }
    if na_category {
        labels.push(String::from("NA"));
    }
    labels
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    variables: Vec<VariableSpec>,
    alpha_normalized: bool,
}

impl Schema {
    /// Validates the variables; with `alpha_normalized` the weights are
    /// rescaled to sum to one.
    pub fn new(mut variables: Vec<VariableSpec>, alpha_normalized: bool) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::InvalidSchema(String::from("no variables")));
        }
        for (a, v) in variables.iter().enumerate() {
            v.check().map_err(Error::InvalidSchema)?;
            if variables[..a].iter().any(|u| u.name == v.name) {
                return Err(Error::InvalidSchema(format!(
                    "duplicate variable name '{}'",
                    v.name
                )));
            }
        }
        if alpha_normalized {
            let total: f64 = variables.iter().map(|v| v.alpha).sum();
            if total <= 0.0 {
                return Err(Error::InvalidSchema(String::from(
                    "cannot normalize: all alpha are zero",
                )));
            }
            for v in &mut variables {
                v.alpha /= total;
            }
        }
        Ok(Schema {
            variables,
            alpha_normalized,
        })
    }

    /// `m` categorical variables with the given arities and `α = 1` each.
    pub fn uniform(arities: &[usize]) -> Result<Self> {
        let vars = arities
            .iter()
            .enumerate()
            .map(|(i, &k)| VariableSpec::with_arity(format!("v{i}"), k, 1.0))
            .collect();
        Schema::new(vars, false)
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn alpha_normalized(&self) -> bool {
        self.alpha_normalized
    }

    pub fn alphas(&self) -> impl Iterator<Item = f64> + '_ {
        self.variables.iter().map(|v| v.alpha)
    }

    pub fn arities(&self) -> Vec<usize> {
        self.variables.iter().map(VariableSpec::arity).collect()
    }
}

/// One modal-valued variable of a unit.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalValue {
    /// Frequencies `f_j`.
    pub f: Vec<f64>,
    /// Count `n = Σ f_j`.
    pub n: f64,
    /// Distribution `p = f / n` (zero vector when `n = 0`).
    pub p: Vec<f64>,
    /// Component weights `w_j ≥ 0`.
    pub w: Vec<f64>,
}

impl ModalValue {
    pub fn new(f: Vec<f64>, w: Vec<f64>) -> Self {
        let n: f64 = f.iter().sum();
        let p = if n > 0.0 {
            f.iter().map(|&x| x / n).collect()
        } else {
            vec![0.0; f.len()]
        };
        ModalValue { f, n, p, w }
    }

    /// Weights equal to the count `n` on every component (pooled-distribution
    /// weighting).
    pub fn count_weighted(f: Vec<f64>) -> Self {
        let n: f64 = f.iter().sum();
        let w = vec![n; f.len()];
        Self::new(f, w)
    }

    pub fn unit_weighted(f: Vec<f64>) -> Self {
        let w = vec![1.0; f.len()];
        Self::new(f, w)
    }

    /// Frequencies with an explicitly stored count; `p = f / n`.
    pub fn with_count(f: Vec<f64>, n: f64, w: Vec<f64>) -> Self {
        let p = if n > 0.0 {
            f.iter().map(|&x| x / n).collect()
        } else {
            vec![0.0; f.len()]
        };
        ModalValue { f, n, p, w }
    }

    /// Builds from a distribution and a count; `f = n p`.
    pub fn from_distribution(p: Vec<f64>, n: f64, w: Vec<f64>) -> Self {
        let f = p.iter().map(|&x| x * n).collect();
        ModalValue { f, n, p, w }
    }

    pub fn arity(&self) -> usize {
        self.p.len()
    }

    /// Variables with zero count contribute nothing to any dissimilarity.
    pub fn is_active(&self) -> bool {
        self.n > 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicObject {
    pub id: String,
    pub vars: Vec<ModalValue>,
}

impl SymbolicObject {
    pub fn new<S: Into<String>>(id: S, vars: Vec<ModalValue>) -> Self {
        SymbolicObject {
            id: id.into(),
            vars,
        }
    }

    /// Checks arities against `schema`, returning the first mismatch.
    pub fn check_shape(&self, schema: &Schema) -> Result<()> {
        if self.vars.len() != schema.len() {
            return Err(Error::VariableCount {
                expected: schema.len(),
                found: self.vars.len(),
            });
        }
        for (i, (v, spec)) in self.vars.iter().zip(schema.variables()).enumerate() {
            for found in [v.p.len(), v.w.len(), v.f.len()] {
                if found != spec.arity() {
                    return Err(Error::Arity {
                        variable: i,
                        expected: spec.arity(),
                        found,
                    });
                }
            }
        }
        Ok(())
    }
}

/// A cluster representative: per variable, a nonnegative component vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Leader {
    pub vars: Vec<Vec<f64>>,
}

impl Leader {
    pub fn new(vars: Vec<Vec<f64>>) -> Self {
        Leader { vars }
    }

    pub fn zeros(schema: &Schema) -> Self {
        Leader {
            vars: schema
                .variables()
                .iter()
                .map(|v| vec![0.0; v.arity()])
                .collect(),
        }
    }

    /// The leader that coincides with a unit's distributions.
    pub fn from_object(x: &SymbolicObject) -> Self {
        Leader {
            vars: x.vars.iter().map(|v| v.p.clone()).collect(),
        }
    }

    pub fn check_shape(&self, schema: &Schema) -> Result<()> {
        if self.vars.len() != schema.len() {
            return Err(Error::VariableCount {
                expected: schema.len(),
                found: self.vars.len(),
            });
        }
        for (i, (t, spec)) in self.vars.iter().zip(schema.variables()).enumerate() {
            if t.len() != spec.arity() {
                return Err(Error::Arity {
                    variable: i,
                    expected: spec.arity(),
                    found: t.len(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    VariableCount {
        expected: usize,
        found: usize,
    },
    Arity {
        variable: usize,
        expected: usize,
        found: usize,
    },
    Normalization {
        variable: usize,
        sum: f64,
    },
    CountMismatch {
        variable: usize,
        n: f64,
        sum_f: f64,
    },
    NegativeWeight {
        variable: usize,
        component: usize,
        value: f64,
    },
    NegativeFrequency {
        variable: usize,
        component: usize,
        value: f64,
    },
    ProbabilityRange {
        variable: usize,
        component: usize,
        value: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::VariableCount { expected, found } => {
                write!(f, "expected {expected} variables, found {found}")
            }
            Violation::Arity {
                variable,
                expected,
                found,
            } => write!(
                f,
                "variable {variable}: arity {found}, schema requires {expected}"
            ),
            Violation::Normalization { variable, sum } => {
                write!(f, "variable {variable}: distribution sums to {sum}")
            }
            Violation::CountMismatch { variable, n, sum_f } => {
                write!(
                    f,
                    "variable {variable}: n = {n} but frequencies sum to {sum_f}"
                )
            }
            Violation::NegativeWeight {
                variable,
                component,
                value,
            } => write!(
                f,
                "variable {variable}[{component}]: negative weight {value}"
            ),
            Violation::NegativeFrequency {
                variable,
                component,
                value,
            } => write!(
                f,
                "variable {variable}[{component}]: negative frequency {value}"
            ),
            Violation::ProbabilityRange {
                variable,
                component,
                value,
            } => write!(
                f,
                "variable {variable}[{component}]: probability {value} outside [0, 1]"
            ),
        }
    }
}

/// Lists every invariant violation of `x` against `schema`. Empty means valid.
pub fn validate_object(x: &SymbolicObject, schema: &Schema) -> Vec<Violation> {
    let mut out = Vec::new();
    if x.vars.len() != schema.len() {
        out.push(Violation::VariableCount {
            expected: schema.len(),
            found: x.vars.len(),
        });
    }
    for (i, (v, spec)) in x.vars.iter().zip(schema.variables()).enumerate() {
        let k = spec.arity();
        let lens = [v.p.len(), v.w.len(), v.f.len()];
        if let Some(&found) = lens.iter().find(|&&len| len != k) {
            out.push(Violation::Arity {
                variable: i,
                expected: k,
                found,
            });
            continue;
        }
        for (j, &w) in v.w.iter().enumerate() {
            if !(w >= 0.0) {
                out.push(Violation::NegativeWeight {
                    variable: i,
                    component: j,
                    value: w,
                });
            }
        }
        for (j, &fj) in v.f.iter().enumerate() {
            if !(fj >= 0.0) {
                out.push(Violation::NegativeFrequency {
                    variable: i,
                    component: j,
                    value: fj,
                });
            }
        }
        for (j, &pj) in v.p.iter().enumerate() {
            if !(0.0..=1.0).contains(&pj) {
                out.push(Violation::ProbabilityRange {
                    variable: i,
                    component: j,
                    value: pj,
                });
            }
        }
        if v.n > 0.0 {
            let sum: f64 = v.p.iter().sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                out.push(Violation::Normalization { variable: i, sum });
            }
            let sum_f: f64 = v.f.iter().sum();
            if (sum_f - v.n).abs() > NORMALIZATION_TOL * v.n.max(1.0) {
                out.push(Violation::CountMismatch {
                    variable: i,
                    n: v.n,
                    sum_f,
                });
            }
        }
    }
    out
}
