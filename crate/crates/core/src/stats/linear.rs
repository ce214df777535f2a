//! Ordinary least squares, estimated marginal means and directed contrasts.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::design::{Design, Table, Term};
use super::dist::{normal_sf, Z_975};
use super::linalg::{least_squares, mul, quad};
use super::StatsError;

/// A fitted linear model. For logistic fits the scale is the logit and
/// `residual_variance` is the unit dispersion.
#[derive(Clone, Debug)]
pub struct LinearFit {
    pub design: Design,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub residual_variance: f64,
    pub r_squared: f64,
    pub n: usize,
    pub df_residual: usize,
    pub residuals: Vec<f64>,
}

impl LinearFit {
    pub fn terms(&self) -> &[String] {
        &self.design.names
    }

    pub fn coef(&self, name: &str) -> Option<f64> {
        self.design.names.iter().position(|n| n == name).map(|i| self.coefficients[i])
    }

    /// Estimate and standard error of `lᵀβ`.
    pub fn combination(&self, l: &[f64]) -> (f64, f64) {
        let est = l.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum();
        let var = quad(l, &self.covariance).max(0.0);
        (est, libm::sqrt(var))
    }
}

pub(crate) fn check_response(y: &[f64], n: usize) -> Result<(), StatsError> {
    if y.len() != n {
        return Err(StatsError::LengthMismatch { expected: n, got: y.len() });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite("response".into()));
    }
    Ok(())
}

pub(crate) fn solve(
    design: &Design,
    cols: &[Vec<f64>],
    y: &[f64],
) -> Result<super::linalg::LeastSquares, StatsError> {
    if y.len() < cols.len() {
        return Err(StatsError::TooFewRows { rows: y.len(), cols: cols.len() });
    }
    least_squares(cols, y).map_err(|k| StatsError::RankDeficient(design.names[k].clone()))
}

/// Least-squares fit of `y` on an intercept plus `terms`.
pub fn fit_linear(table: &Table, y: &[f64], terms: &[Term]) -> Result<LinearFit, StatsError> {
    let (design, cols) = Design::build(table, terms)?;
    let n = table.rows();
    check_response(y, n)?;
    let ls = solve(&design, &cols, y)?;
    let p = cols.len();
    let fitted = mul(&cols, &ls.beta, n);
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    let df_residual = n - p;
    let residual_variance = if df_residual > 0 { rss / df_residual as f64 } else { 0.0 };
    let constant = y.iter().all(|v| *v == y[0]);
    let r_squared = if constant {
        0.0
    } else {
        let mean = y.iter().sum::<f64>() / n as f64;
        let tss: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
        1.0 - rss / tss
    };
    let covariance: Vec<Vec<f64>> = ls
        .xtx_inv
        .iter()
        .map(|row| row.iter().map(|v| v * residual_variance).collect())
        .collect();
    let std_errors = (0..p).map(|i| libm::sqrt(covariance[i][i].max(0.0))).collect();
    Ok(LinearFit {
        design,
        coefficients: ls.beta,
        std_errors,
        covariance,
        residual_variance,
        r_squared,
        n,
        df_residual,
        residuals,
    })
}

/// Estimated marginal mean of one factor level with a 95% normal interval.
#[derive(Clone, Debug, PartialEq)]
pub struct Emm {
    pub level: String,
    pub estimate: f64,
    pub se: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Averaging vectors `L_level` such that `L·β` is the level's marginal mean
/// over a balanced grid of the other factors, covariates at their means.
fn emm_vectors(fit: &LinearFit, factor: &str) -> Result<Vec<Vec<f64>>, StatsError> {
    let d = &fit.design;
    let target = d.factor_index(factor).ok_or_else(|| StatsError::UnknownColumn(factor.to_string()))?;
    let covs = d.covariate_means();
    let sizes: Vec<usize> = d.factors.iter().map(|(_, l)| l.len()).collect();
    let others: usize = sizes.iter().enumerate().filter(|(i, _)| *i != target).map(|(_, s)| s).product();
    let mut out = Vec::with_capacity(sizes[target]);
    for level in 0..sizes[target] {
        let mut acc = vec![0.0; d.width()];
        let mut cell = vec![0usize; sizes.len()];
        cell[target] = level;
        for _ in 0..others {
            for (a, v) in acc.iter_mut().zip(d.row(&cell, &covs)) {
                *a += v;
            }
            // odometer over the non-target factors
            for i in 0..sizes.len() {
                if i == target {
                    continue;
                }
                cell[i] += 1;
                if cell[i] < sizes[i] {
                    break;
                }
                cell[i] = 0;
            }
        }
        for a in &mut acc {
            *a /= others as f64;
        }
        out.push(acc);
    }
    Ok(out)
}

pub fn emmeans(fit: &LinearFit, factor: &str) -> Result<Vec<Emm>, StatsError> {
    let vectors = emm_vectors(fit, factor)?;
    let fi = fit.design.factor_index(factor).expect("checked by emm_vectors");
    let levels = &fit.design.factors[fi].1;
    Ok(vectors
        .iter()
        .zip(levels)
        .map(|(l, level)| {
            let (estimate, se) = fit.combination(l);
            Emm {
                level: level.clone(),
                estimate,
                se,
                lower: estimate - Z_975 * se,
                upper: estimate + Z_975 * se,
            }
        })
        .collect())
}

/// Directed hypothesis "`less` < `greater`" between two levels of one factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypothesis {
    pub label: String,
    pub less: String,
    pub greater: String,
}

impl Hypothesis {
    pub fn new(label: &str, less: &str, greater: &str) -> Hypothesis {
        Hypothesis { label: label.to_string(), less: less.to_string(), greater: greater.to_string() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContrastResult {
    pub label: String,
    /// Marginal mean of `greater` minus marginal mean of `less`.
    pub estimate: f64,
    pub se: f64,
    pub z: f64,
    /// One-sided p-value for the alternative `less < greater`.
    pub p_value: f64,
}

pub fn pairwise_contrasts(
    fit: &LinearFit,
    factor: &str,
    hypotheses: &[Hypothesis],
) -> Result<Vec<ContrastResult>, StatsError> {
    let vectors = emm_vectors(fit, factor)?;
    let fi = fit.design.factor_index(factor).expect("checked by emm_vectors");
    let levels = &fit.design.factors[fi].1;
    let index = |level: &str| {
        levels.iter().position(|l| l == level).ok_or_else(|| StatsError::UnknownLevel {
            factor: factor.to_string(),
            level: level.to_string(),
        })
    };
    hypotheses
        .iter()
        .map(|h| {
            let (a, b) = (index(&h.less)?, index(&h.greater)?);
            let l: Vec<f64> = vectors[b].iter().zip(&vectors[a]).map(|(x, y)| x - y).collect();
            let (estimate, se) = fit.combination(&l);
            let (z, p_value) = if se > 0.0 {
                let z = estimate / se;
                (z, normal_sf(z))
            } else if estimate > 0.0 {
                (f64::INFINITY, 0.0)
            } else if estimate < 0.0 {
                (f64::NEG_INFINITY, 1.0)
            } else {
                (0.0, 0.5)
            };
            Ok(ContrastResult { label: h.label.clone(), estimate, se, z, p_value })
        })
        .collect()
}
