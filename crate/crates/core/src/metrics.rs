//! Answer-probability metrics.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::catalog::Label;

/// Log-probabilities of the two answers and, when available, of each prompt token.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AnswerLogprobs {
    pub logp_yes: f64,
    pub logp_no: f64,
    #[serde(default)]
    pub prompt_token_logps: Vec<f64>,
}

impl AnswerLogprobs {
    pub fn new(logp_yes: f64, logp_no: f64) -> AnswerLogprobs {
        AnswerLogprobs { logp_yes, logp_no, prompt_token_logps: Vec::new() }
    }

    pub fn with_prompt(mut self, logps: Vec<f64>) -> AnswerLogprobs {
        self.prompt_token_logps = logps;
        self
    }

    pub fn logp(&self, y: Label) -> f64 {
        match y {
            Label::Yes => self.logp_yes,
            Label::No => self.logp_no,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("both answer log-probabilities are -inf")]
    DegenerateResponse,
    #[error("answer log-probability is NaN or +inf")]
    NonFinite,
    #[error("perplexity needs at least one prompt token")]
    EmptyPrompt,
    #[error("prompt token log-probability is NaN or +inf")]
    NonFiniteToken,
}

fn check(x: f64) -> Result<(), MetricError> {
    if x.is_nan() || x == f64::INFINITY {
        Err(MetricError::NonFinite)
    } else {
        Ok(())
    }
}

/// Relative probability of answer `y` among {Yes, No}.
pub fn soft_accuracy(a: &AnswerLogprobs, y: Label) -> Result<f64, MetricError> {
    check(a.logp_yes)?;
    check(a.logp_no)?;
    let m = a.logp_yes.max(a.logp_no);
    if m == f64::NEG_INFINITY {
        return Err(MetricError::DegenerateResponse);
    }
    let ey = libm::exp(a.logp_yes - m);
    let en = libm::exp(a.logp_no - m);
    let num = if y == Label::Yes { ey } else { en };
    Ok(num / (ey + en))
}

/// `exp(-mean(logps))`.
pub fn prompt_perplexity(logps: &[f64]) -> Result<f64, MetricError> {
    if logps.is_empty() {
        return Err(MetricError::EmptyPrompt);
    }
    if logps.iter().any(|x| x.is_nan() || *x == f64::INFINITY) {
        return Err(MetricError::NonFiniteToken);
    }
    let mean = logps.iter().sum::<f64>() / logps.len() as f64;
    Ok(libm::exp(-mean))
}

/// Yes iff `logp_yes >= logp_no`; an exact tie answers Yes.
pub fn greedy_label(a: &AnswerLogprobs) -> Label {
    if a.logp_yes >= a.logp_no {
        Label::Yes
    } else {
        Label::No
    }
}

/// `ln(sum(exp(xs)))`, used to pool several spellings of the same answer.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY || m.is_nan() {
        return m;
    }
    m + libm::log(xs.iter().map(|x| libm::exp(x - m)).sum::<f64>())
}
