//! Observation tables and treatment-coded design matrices.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::StatsError;

/// A categorical column. `levels[0]` is the reference level.
#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    pub name: String,
    pub levels: Vec<String>,
    pub codes: Vec<usize>,
}

impl Factor {
    /// Levels in the given order; every value must be one of them.
    pub fn with_levels<S: AsRef<str>>(
        name: &str,
        levels: &[&str],
        values: &[S],
    ) -> Result<Factor, StatsError> {
        let codes = values
            .iter()
            .map(|v| {
                levels.iter().position(|l| *l == v.as_ref()).ok_or_else(|| StatsError::UnknownLevel {
                    factor: name.to_string(),
                    level: v.as_ref().to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Factor {
            name: name.to_string(),
            levels: levels.iter().map(|l| l.to_string()).collect(),
            codes,
        })
    }

    /// Levels in order of first appearance.
    pub fn from_values<S: AsRef<str>>(name: &str, values: &[S]) -> Factor {
        let mut levels: Vec<String> = Vec::new();
        let codes = values
            .iter()
            .map(|v| match levels.iter().position(|l| l == v.as_ref()) {
                Some(i) => i,
                None => {
                    levels.push(v.as_ref().to_string());
                    levels.len() - 1
                }
            })
            .collect();
        Factor { name: name.to_string(), levels, codes }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Covariate {
    pub name: String,
    pub values: Vec<f64>,
}

impl Covariate {
    pub fn new(name: &str, values: Vec<f64>) -> Covariate {
        Covariate { name: name.to_string(), values }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Columns of equal length.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub factors: Vec<Factor>,
    pub covariates: Vec<Covariate>,
}

impl Table {
    pub fn new() -> Table {
        Table::default()
    }

    pub fn factor(mut self, f: Factor) -> Table {
        self.factors.push(f);
        self
    }

    pub fn covariate(mut self, c: Covariate) -> Table {
        self.covariates.push(c);
        self
    }

    pub fn rows(&self) -> usize {
        self.factors
            .first()
            .map(|f| f.codes.len())
            .or_else(|| self.covariates.first().map(|c| c.values.len()))
            .unwrap_or(0)
    }

    fn check(&self) -> Result<usize, StatsError> {
        let n = self.rows();
        for f in &self.factors {
            if f.codes.len() != n {
                return Err(StatsError::LengthMismatch { expected: n, got: f.codes.len() });
            }
        }
        for c in &self.covariates {
            if c.values.len() != n {
                return Err(StatsError::LengthMismatch { expected: n, got: c.values.len() });
            }
            if c.values.iter().any(|v| !v.is_finite()) {
                return Err(StatsError::NonFinite(c.name.clone()));
            }
        }
        Ok(n)
    }

    fn find_factor(&self, name: &str) -> Result<&Factor, StatsError> {
        self.factors
            .iter()
            .find(|f| f.name == name)
            .ok_or_else(|| StatsError::UnknownColumn(name.to_string()))
    }

    fn find_covariate(&self, name: &str) -> Result<&Covariate, StatsError> {
        self.covariates
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| StatsError::UnknownColumn(name.to_string()))
    }
}

/// Model terms; an intercept is always included.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    /// Treatment-coded dummies for every non-reference level.
    Factor(String),
    /// A numeric covariate entered as is.
    Covariate(String),
    /// Level-specific deviations of a covariate slope (`factor:covariate`).
    Slopes { factor: String, covariate: String },
}

impl Term {
    pub fn factor(name: &str) -> Term {
        Term::Factor(name.to_string())
    }

    pub fn covariate(name: &str) -> Term {
        Term::Covariate(name.to_string())
    }

    pub fn slopes(factor: &str, covariate: &str) -> Term {
        Term::Slopes { factor: factor.to_string(), covariate: covariate.to_string() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Column {
    Intercept,
    Dummy { f: usize, level: usize },
    Cov { c: usize },
    DummyCov { f: usize, level: usize, c: usize },
}

/// Column layout of a fitted model, detached from the data it was built on.
#[derive(Clone, Debug, PartialEq)]
pub struct Design {
    pub names: Vec<String>,
    /// Factors used by the model with their levels.
    pub factors: Vec<(String, Vec<String>)>,
    /// Covariates used by the model with their sample means.
    pub covariates: Vec<(String, f64)>,
    columns: Vec<Column>,
}

impl Design {
    pub fn build(table: &Table, terms: &[Term]) -> Result<(Design, Vec<Vec<f64>>), StatsError> {
        let n = table.check()?;
        let mut d = Design {
            names: vec![String::from("(Intercept)")],
            factors: Vec::new(),
            covariates: Vec::new(),
            columns: vec![Column::Intercept],
        };
        let mut fcodes: Vec<&[usize]> = Vec::new();
        let mut cvals: Vec<&[f64]> = Vec::new();
        for term in terms {
            match term {
                Term::Factor(name) => {
                    let f = table.find_factor(name)?;
                    let fi = match d.factor_index(name) {
                        Some(i) => i,
                        None => {
                            d.factors.push((f.name.clone(), f.levels.clone()));
                            fcodes.push(&f.codes);
                            d.factors.len() - 1
                        }
                    };
                    for level in 1..f.levels.len() {
                        d.names.push(format!("{}[{}]", f.name, f.levels[level]));
                        d.columns.push(Column::Dummy { f: fi, level });
                    }
                }
                Term::Covariate(name) => {
                    let c = table.find_covariate(name)?;
                    let ci = match d.covariates.iter().position(|(n, _)| n == name) {
                        Some(i) => i,
                        None => {
                            d.covariates.push((c.name.clone(), c.mean()));
                            cvals.push(&c.values);
                            d.covariates.len() - 1
                        }
                    };
                    d.names.push(c.name.clone());
                    d.columns.push(Column::Cov { c: ci });
                }
                Term::Slopes { factor, covariate } => {
                    let f = table.find_factor(factor)?;
                    let c = table.find_covariate(covariate)?;
                    let fi = match d.factor_index(factor) {
                        Some(i) => i,
                        None => {
                            d.factors.push((f.name.clone(), f.levels.clone()));
                            fcodes.push(&f.codes);
                            d.factors.len() - 1
                        }
                    };
                    let ci = match d.covariates.iter().position(|(n, _)| n == covariate) {
                        Some(i) => i,
                        None => {
                            d.covariates.push((c.name.clone(), c.mean()));
                            cvals.push(&c.values);
                            d.covariates.len() - 1
                        }
                    };
                    for level in 1..f.levels.len() {
                        d.names.push(format!("{}[{}]:{}", f.name, f.levels[level], c.name));
                        d.columns.push(Column::DummyCov { f: fi, level, c: ci });
                    }
                }
            }
        }
        let cols = d
            .columns
            .iter()
            .map(|col| match *col {
                Column::Intercept => vec![1.0; n],
                Column::Dummy { f, level } => {
                    fcodes[f].iter().map(|&k| if k == level { 1.0 } else { 0.0 }).collect()
                }
                Column::Cov { c } => cvals[c].to_vec(),
                Column::DummyCov { f, level, c } => fcodes[f]
                    .iter()
                    .zip(cvals[c])
                    .map(|(&k, &x)| if k == level { x } else { 0.0 })
                    .collect(),
            })
            .collect();
        Ok((d, cols))
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn factor_index(&self, name: &str) -> Option<usize> {
        self.factors.iter().position(|(n, _)| n == name)
    }

    /// Design row for one cell: a level index per model factor and a value per covariate.
    pub fn row(&self, levels: &[usize], covs: &[f64]) -> Vec<f64> {
        self.columns
            .iter()
            .map(|col| match *col {
                Column::Intercept => 1.0,
                Column::Dummy { f, level } => f64::from(u8::from(levels[f] == level)),
                Column::Cov { c } => covs[c],
                Column::DummyCov { f, level, c } => {
                    if levels[f] == level {
                        covs[c]
                    } else {
                        0.0
                    }
                }
            })
            .collect()
    }

    pub fn covariate_means(&self) -> Vec<f64> {
        self.covariates.iter().map(|(_, m)| *m).collect()
    }
}
