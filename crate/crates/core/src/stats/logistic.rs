//! Logistic regression by iteratively reweighted least squares.

use alloc::vec;
use alloc::vec::Vec;

use super::design::{Design, Table, Term};
use super::dist::chi2_sf;
use super::linalg::mul;
use super::linear::{check_response, solve, LinearFit};
use super::StatsError;

pub const MAX_ITERATIONS: usize = 50;
const TOLERANCE: f64 = 1e-10;
/// Coefficients beyond this magnitude on the logit scale signal separation.
const SEPARATION_BOUND: f64 = 15.0;

#[derive(Clone, Debug)]
pub struct LogisticFit {
    /// Coefficients on the logit scale; `r_squared` holds McFadden's pseudo-R².
    pub fit: LinearFit,
    pub log_likelihood: f64,
    pub null_log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood after every accepted step, starting from the initial guess.
    pub trace: Vec<f64>,
}

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + libm::exp(-eta))
    } else {
        let e = libm::exp(eta);
        e / (1.0 + e)
    }
}

fn softplus(eta: f64) -> f64 {
    eta.max(0.0) + libm::log1p(libm::exp(-eta.abs()))
}

fn log_likelihood(y: &[f64], eta: &[f64]) -> f64 {
    y.iter().zip(eta).map(|(yi, e)| yi * e - softplus(*e)).sum()
}

fn weighted_solve(
    design: &Design,
    cols: &[Vec<f64>],
    y: &[f64],
    eta: &[f64],
) -> Result<super::linalg::LeastSquares, StatsError> {
    let mut sw = Vec::with_capacity(y.len());
    let mut z = Vec::with_capacity(y.len());
    for (yi, e) in y.iter().zip(eta) {
        let mu = sigmoid(*e);
        let w = (mu * (1.0 - mu)).max(1e-12);
        let s = libm::sqrt(w);
        sw.push(s);
        z.push(s * (e + (yi - mu) / w));
    }
    let scaled: Vec<Vec<f64>> =
        cols.iter().map(|c| c.iter().zip(&sw).map(|(x, s)| x * s).collect()).collect();
    solve(design, &scaled, &z)
}

/// Fit `P(y = 1) = σ(Xβ)` for a 0/1 response.
pub fn fit_logistic(table: &Table, y: &[f64], terms: &[Term]) -> Result<LogisticFit, StatsError> {
    let (design, cols) = Design::build(table, terms)?;
    let n = table.rows();
    check_response(y, n)?;
    if y.iter().any(|v| *v != 0.0 && *v != 1.0) {
        return Err(StatsError::NotBinary);
    }
    if n < cols.len() {
        return Err(StatsError::TooFewRows { rows: n, cols: cols.len() });
    }
    let ybar = y.iter().sum::<f64>() / n as f64;
    let null_log_likelihood = if ybar == 0.0 || ybar == 1.0 {
        0.0
    } else {
        n as f64 * (ybar * libm::log(ybar) + (1.0 - ybar) * libm::log(1.0 - ybar))
    };
    let p = cols.len();
    let mut beta = vec![0.0; p];
    let mut eta = vec![0.0; n];
    let mut ll = log_likelihood(y, &eta);
    let mut trace = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let step = weighted_solve(&design, &cols, y, &eta)?;
        let mut cand = step.beta;
        let mut cand_eta = mul(&cols, &cand, n);
        let mut cand_ll = log_likelihood(y, &cand_eta);
        let mut halvings = 0;
        while cand_ll < ll && halvings < 30 {
            for (c, b) in cand.iter_mut().zip(&beta) {
                *c = 0.5 * (*c + b);
            }
            cand_eta = mul(&cols, &cand, n);
            cand_ll = log_likelihood(y, &cand_eta);
            halvings += 1;
        }
        if cand_ll < ll {
            break;
        }
        let delta = cand_ll - ll;
        beta = cand;
        eta = cand_eta;
        ll = cand_ll;
        trace.push(ll);
        if delta <= TOLERANCE * (1.0 + ll.abs()) {
            converged = true;
            break;
        }
    }
    if let Some(k) = beta.iter().position(|b| b.abs() > SEPARATION_BOUND) {
        return Err(StatsError::Separation(design.names[k].clone()));
    }
    let final_step = weighted_solve(&design, &cols, y, &eta)?;
    let covariance = final_step.xtx_inv;
    let std_errors = (0..p).map(|i| libm::sqrt(covariance[i][i].max(0.0))).collect();
    let residuals = y.iter().zip(&eta).map(|(yi, e)| yi - sigmoid(*e)).collect();
    let r_squared = if null_log_likelihood == 0.0 { 0.0 } else { 1.0 - ll / null_log_likelihood };
    Ok(LogisticFit {
        fit: LinearFit {
            design,
            coefficients: beta,
            std_errors,
            covariance,
            residual_variance: 1.0,
            r_squared,
            n,
            df_residual: n - p,
            residuals,
        },
        log_likelihood: ll,
        null_log_likelihood,
        iterations,
        converged,
        trace,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LrtResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Likelihood-ratio test of `reduced` nested in `full`.
pub fn likelihood_ratio(full: &LogisticFit, reduced: &LogisticFit) -> LrtResult {
    let statistic = (2.0 * (full.log_likelihood - reduced.log_likelihood)).max(0.0);
    let df = full.fit.coefficients.len().saturating_sub(reduced.fit.coefficients.len());
    let p_value = if df == 0 { 1.0 } else { chi2_sf(statistic, df as f64) };
    LrtResult { statistic, df, p_value }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::design::{Covariate, Factor};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn simulate(n: usize, beta: [f64; 3], seed: u64) -> (Table, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = Vec::new();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let grp = i % 2;
            let xv: f64 = rng.gen_range(-2.0..2.0);
            let eta = beta[0] + beta[1] * grp as f64 + beta[2] * xv;
            let yv = if rng.gen::<f64>() < sigmoid(eta) { 1.0 } else { 0.0 };
            g.push(["a", "b"][grp]);
            x.push(xv);
            y.push(yv);
        }
        let t = Table::new()
            .factor(Factor::with_levels("g", &["a", "b"], &g).unwrap())
            .covariate(Covariate::new("x", x));
        (t, y)
    }

    #[test]
    fn recovers_and_is_monotone() {
        let (t, y) = simulate(4000, [0.5, -0.8, 1.2], 9);
        let fit = fit_logistic(&t, &y, &[Term::factor("g"), Term::covariate("x")]).unwrap();
        assert!(fit.converged);
        assert!(fit.iterations <= MAX_ITERATIONS);
        assert!(fit.trace.windows(2).all(|w| w[1] >= w[0]));
        for (got, want) in fit.fit.coefficients.iter().zip([0.5, -0.8, 1.2]) {
            assert!((got - want).abs() < 4.0 * 0.08, "{got} vs {want}");
        }
        let reduced = fit_logistic(&t, &y, &[Term::covariate("x")]).unwrap();
        let lrt = likelihood_ratio(&fit, &reduced);
        assert_eq!(lrt.df, 1);
        assert!(lrt.p_value < 1e-6);
    }

    #[test]
    fn separation_is_reported() {
        let x: Vec<f64> = (0..40).map(|i| i as f64 - 19.5).collect();
        let y: Vec<f64> = x.iter().map(|v| if *v > 0.0 { 1.0 } else { 0.0 }).collect();
        let t = Table::new().covariate(Covariate::new("x", x));
        assert!(matches!(fit_logistic(&t, &y, &[Term::covariate("x")]), Err(StatsError::Separation(_))));
    }

    #[test]
    fn rejects_non_binary() {
        let t = Table::new().covariate(Covariate::new("x", vec![1.0, 2.0, 3.0]));
        assert_eq!(fit_logistic(&t, &[0.0, 0.5, 1.0], &[]).err(), Some(StatsError::NotBinary));
    }
}
