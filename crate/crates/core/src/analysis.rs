//! Group tables and model fits over scored or human observations.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::catalog::{ArgForm, Family};
use crate::formula::Modality;
use crate::lexicon::LexiconKind;
use crate::stats::{
    correlation::correlate, emmeans, fit_linear, fit_logistic, likelihood_ratio, pairwise_contrasts,
    ContrastResult, Correlation, Covariate, Emm, Factor, Hypothesis, LinearFit, LogisticFit, LrtResult,
    StatsError, Table, Term,
};

/// Argument-form groups of the main forms; the fallacy variants share the
/// group of the valid form they imitate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArgGroup {
    Disjunctive,
    ModusPonens,
    ModusTollens,
}

impl ArgGroup {
    pub const ALL: [ArgGroup; 3] = [ArgGroup::Disjunctive, ArgGroup::ModusPonens, ArgGroup::ModusTollens];

    pub fn tag(self) -> &'static str {
        match self {
            ArgGroup::Disjunctive => "disjunctive",
            ArgGroup::ModusPonens => "modus_ponens",
            ArgGroup::ModusTollens => "modus_tollens",
        }
    }

    pub fn of(a: ArgForm) -> Option<ArgGroup> {
        match a {
            ArgForm::DisjL | ArgForm::DisjR => Some(ArgGroup::Disjunctive),
            ArgForm::ModusPonensL => Some(ArgGroup::ModusPonens),
            ArgForm::ModusTollensR => Some(ArgGroup::ModusTollens),
            _ => None,
        }
    }
}

/// One scored item for one model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub model: String,
    pub item_id: String,
    pub form_id: String,
    pub family: Family,
    pub modality: Modality,
    pub arg_form: ArgForm,
    pub valid: bool,
    pub lexicon: LexiconKind,
    /// Relative probability of the ground-truth answer.
    pub soft_score: f64,
    /// Relative probability of Yes.
    pub yes_share: f64,
    pub perplexity: Option<f64>,
}

/// One human trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HumanObservation {
    pub participant: String,
    pub item_id: String,
    pub form_id: String,
    pub family: Family,
    pub modality: Modality,
    pub arg_form: ArgForm,
    pub valid: bool,
    pub correct: bool,
    pub rt_ms: f64,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("no {0} observations")]
    Empty(&'static str),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("value out of range in item `{item}`: {what}")]
    OutOfRange { item: String, what: &'static str },
}

pub const GROUP_COLUMNS: [&str; 10] = [
    "overall",
    "none",
    "box",
    "dia",
    "disjunctive_valid",
    "modus_ponens_valid",
    "modus_tollens_valid",
    "disjunctive_fallacy",
    "modus_ponens_fallacy",
    "modus_tollens_fallacy",
];

/// One row of the accuracy breakdown. `cells` follows [`GROUP_COLUMNS`].
#[derive(Clone, Debug, PartialEq)]
pub struct GroupRow {
    pub label: String,
    pub n: usize,
    pub cells: [Option<f64>; 10],
    /// Column index of the best modality cell.
    pub best_modality: Option<usize>,
    /// Column index of the best argument-form cell.
    pub best_arg_form: Option<usize>,
}

fn argmax(cells: &[Option<f64>; 10], range: core::ops::Range<usize>) -> Option<usize> {
    range
        .filter_map(|i| cells[i].map(|v| (i, v)))
        .fold(None, |best: Option<(usize, f64)>, (i, v)| match best {
            Some((_, b)) if b >= v => best,
            _ => Some((i, v)),
        })
        .map(|(i, _)| i)
}

fn group_row<I>(label: &str, rows: I) -> GroupRow
where
    I: Iterator<Item = (Modality, ArgForm, bool, f64)>,
{
    let mut sums = [0.0f64; 10];
    let mut counts = [0usize; 10];
    let mut add = |i: usize, v: f64| {
        sums[i] += v;
        counts[i] += 1;
    };
    for (m, a, valid, score) in rows {
        add(0, score);
        add(1 + Modality::ALL.iter().position(|x| *x == m).unwrap_or(0), score);
        if let Some(g) = ArgGroup::of(a) {
            let gi = ArgGroup::ALL.iter().position(|x| *x == g).unwrap_or(0);
            add(if valid { 4 + gi } else { 7 + gi }, score);
        }
    }
    let mut cells = [None; 10];
    for i in 0..10 {
        if counts[i] > 0 {
            cells[i] = Some(sums[i] / counts[i] as f64);
        }
    }
    GroupRow {
        label: label.to_string(),
        n: counts[0],
        best_modality: argmax(&cells, 1..4),
        best_arg_form: argmax(&cells, 4..10),
        cells,
    }
}

fn main_forms(obs: &[Observation]) -> impl Iterator<Item = &Observation> {
    obs.iter().filter(|o| o.family == Family::Main24)
}

/// Mean soft score per model over the main forms, broken down by modality and
/// by argument-form group within valid forms and within fallacies.
pub fn group_table(obs: &[Observation]) -> Result<Vec<GroupRow>, AnalysisError> {
    let mut models: Vec<&str> = Vec::new();
    for o in main_forms(obs) {
        if !models.contains(&o.model.as_str()) {
            models.push(&o.model);
        }
    }
    if models.is_empty() {
        return Err(AnalysisError::Empty("main-form"));
    }
    Ok(models
        .iter()
        .map(|m| {
            group_row(
                m,
                main_forms(obs)
                    .filter(|o| o.model == *m)
                    .map(|o| (o.modality, o.arg_form, o.valid, o.soft_score)),
            )
        })
        .collect())
}

/// Human accuracy in the same layout, one row labelled `human`.
pub fn human_group_row(obs: &[HumanObservation]) -> Result<GroupRow, AnalysisError> {
    let rows: Vec<_> = obs.iter().filter(|o| o.family == Family::Main24).collect();
    if rows.is_empty() {
        return Err(AnalysisError::Empty("human main-form"));
    }
    Ok(group_row(
        "human",
        rows.iter().map(|o| (o.modality, o.arg_form, o.valid, if o.correct { 1.0 } else { 0.0 })),
    ))
}

/// Mean scores per model and catalog form, for every family.
#[derive(Clone, Debug, PartialEq)]
pub struct FormMean {
    pub model: String,
    pub lexicon: LexiconKind,
    pub family: Family,
    pub form_id: String,
    pub n: usize,
    pub soft_score: f64,
    pub yes_share: f64,
    pub perplexity: Option<f64>,
}

pub fn form_means(obs: &[Observation]) -> Vec<FormMean> {
    let mut acc: BTreeMap<(String, LexiconKind, String), (Family, usize, f64, f64, f64, usize)> =
        BTreeMap::new();
    for o in obs {
        let e = acc
            .entry((o.model.clone(), o.lexicon, o.form_id.clone()))
            .or_insert((o.family, 0, 0.0, 0.0, 0.0, 0));
        e.1 += 1;
        e.2 += o.soft_score;
        e.3 += o.yes_share;
        if let Some(p) = o.perplexity {
            e.4 += p;
            e.5 += 1;
        }
    }
    acc.into_iter()
        .map(|((model, lexicon, form_id), (family, n, s, y, p, np))| FormMean {
            model,
            lexicon,
            family,
            form_id,
            n,
            soft_score: s / n as f64,
            yes_share: y / n as f64,
            perplexity: (np == n).then(|| p / n as f64),
        })
        .collect()
}

pub const MODALITY_LEVELS: [&str; 3] = ["none", "box", "dia"];
pub const ARG_GROUP_LEVELS: [&str; 3] = ["disjunctive", "modus_ponens", "modus_tollens"];

/// Directed hypotheses on modality: ∅ < ◇, □ < ∅, □ < ◇.
pub fn modality_hypotheses() -> Vec<Hypothesis> {
    alloc::vec![
        Hypothesis::new("propositional < may", "none", "dia"),
        Hypothesis::new("must < propositional", "box", "none"),
        Hypothesis::new("must < may", "box", "dia"),
    ]
}

/// Directed hypotheses on argument-form groups.
pub fn arg_form_hypotheses() -> Vec<Hypothesis> {
    alloc::vec![
        Hypothesis::new("disjunctive < modus ponens", "disjunctive", "modus_ponens"),
        Hypothesis::new("modus tollens < modus ponens", "modus_tollens", "modus_ponens"),
        Hypothesis::new("modus tollens < disjunctive", "modus_tollens", "disjunctive"),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Response {
    /// Relative probability of the correct answer.
    SoftScore,
    /// Relative probability of Yes.
    YesShare,
}

impl Response {
    pub fn tag(self) -> &'static str {
        match self {
            Response::SoftScore => "soft_score",
            Response::YesShare => "yes_share",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FitOptions {
    pub response: Response,
    /// Restrict to forms whose ground truth is Yes.
    pub valid_only: bool,
    /// Average over interpretations first, one row per (model, form).
    pub per_form_means: bool,
    /// Z-score perplexity before fitting.
    pub standardize_perplexity: bool,
}

impl FitOptions {
    /// Soft accuracy on valid forms.
    pub fn accuracy() -> FitOptions {
        FitOptions {
            response: Response::SoftScore,
            valid_only: true,
            per_form_means: false,
            standardize_perplexity: false,
        }
    }

    /// Relative P(Yes) on all main forms.
    pub fn affirmation() -> FitOptions {
        FitOptions { response: Response::YesShare, valid_only: false, ..FitOptions::accuracy() }
    }
}

#[derive(Clone, Debug)]
pub struct ScoreFit {
    pub fit: LinearFit,
    pub rows: usize,
    pub models: Vec<String>,
    /// Per-model intercepts and perplexity slopes were included.
    pub per_model_terms: bool,
    pub uses_perplexity: bool,
    pub modality_emm: Vec<Emm>,
    pub arg_group_emm: Vec<Emm>,
    pub contrasts: Vec<ContrastResult>,
}

struct FitRow<'a> {
    model: &'a str,
    modality: Modality,
    group: ArgGroup,
    y: f64,
    perplexity: Option<f64>,
}

fn standardize(v: &mut [f64]) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let sd = libm::sqrt(var);
    for x in v.iter_mut() {
        *x = if sd > 0.0 { (*x - mean) / sd } else { 0.0 };
    }
}

/// Linear fit of soft score or P(Yes) on modality, argument-form group and
/// perplexity, with per-model intercepts and slopes when several models are
/// present. Perplexity is dropped when any row lacks it or when it is constant
/// within some model.
pub fn fit_scores(obs: &[Observation], opts: FitOptions) -> Result<ScoreFit, AnalysisError> {
    let mut rows: Vec<FitRow> = Vec::new();
    for o in main_forms(obs).filter(|o| o.valid || !opts.valid_only) {
        let y = match opts.response {
            Response::SoftScore => o.soft_score,
            Response::YesShare => o.yes_share,
        };
        if !(0.0..=1.0).contains(&y) {
            return Err(AnalysisError::OutOfRange { item: o.item_id.clone(), what: "score outside [0, 1]" });
        }
        rows.push(FitRow {
            model: &o.model,
            modality: o.modality,
            group: ArgGroup::of(o.arg_form).expect("main forms have a group"),
            y,
            perplexity: o.perplexity,
        });
    }
    if opts.per_form_means {
        rows = per_form_means(obs, opts);
    }
    if rows.is_empty() {
        return Err(AnalysisError::Empty("main-form"));
    }
    let mut models: Vec<String> = Vec::new();
    for r in &rows {
        if !models.iter().any(|m| m == r.model) {
            models.push(r.model.to_string());
        }
    }
    let uses_perplexity = rows.iter().all(|r| r.perplexity.is_some())
        && models.iter().all(|m| varies(rows.iter().filter(|r| r.model == m).filter_map(|r| r.perplexity)));
    let per_model_terms = models.len() >= 2;

    let modality: Vec<&str> = rows.iter().map(|r| r.modality.tag()).collect();
    let group: Vec<&str> = rows.iter().map(|r| r.group.tag()).collect();
    let model: Vec<&str> = rows.iter().map(|r| r.model).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.y).collect();
    let mut table = Table::new()
        .factor(Factor::with_levels("modality", &MODALITY_LEVELS, &modality)?)
        .factor(Factor::with_levels("arg_form", &ARG_GROUP_LEVELS, &group)?)
        .factor(Factor::from_values("model", &model));
    let mut terms = alloc::vec![Term::factor("modality"), Term::factor("arg_form")];
    if uses_perplexity {
        let mut ppl: Vec<f64> = rows.iter().map(|r| r.perplexity.unwrap_or(0.0)).collect();
        if opts.standardize_perplexity {
            standardize(&mut ppl);
        }
        table = table.covariate(Covariate::new("perplexity", ppl));
        terms.push(Term::covariate("perplexity"));
    }
    if per_model_terms {
        terms.push(Term::factor("model"));
        if uses_perplexity {
            terms.push(Term::slopes("model", "perplexity"));
        }
    }
    let fit = fit_linear(&table, &y, &terms)?;
    let modality_emm = emmeans(&fit, "modality")?;
    let arg_group_emm = emmeans(&fit, "arg_form")?;
    let mut contrasts = pairwise_contrasts(&fit, "modality", &modality_hypotheses())?;
    contrasts.extend(pairwise_contrasts(&fit, "arg_form", &arg_form_hypotheses())?);
    Ok(ScoreFit {
        fit,
        rows: rows.len(),
        models,
        per_model_terms,
        uses_perplexity,
        modality_emm,
        arg_group_emm,
        contrasts,
    })
}

fn varies(mut xs: impl Iterator<Item = f64>) -> bool {
    let Some(first) = xs.next() else { return false };
    let (lo, hi) = xs.fold((first, first), |(lo, hi), x| (lo.min(x), hi.max(x)));
    hi - lo > 1e-9 * (1.0 + libm::fabs(first))
}

fn per_form_means(obs: &[Observation], opts: FitOptions) -> Vec<FitRow<'_>> {
    let mut acc: BTreeMap<(&str, LexiconKind, &str), (Modality, ArgGroup, usize, f64, f64, usize)> =
        BTreeMap::new();
    for o in main_forms(obs).filter(|o| o.valid || !opts.valid_only) {
        let y = match opts.response {
            Response::SoftScore => o.soft_score,
            Response::YesShare => o.yes_share,
        };
        let e = acc
            .entry((o.model.as_str(), o.lexicon, o.form_id.as_str()))
            .or_insert((o.modality, ArgGroup::of(o.arg_form).expect("main form"), 0, 0.0, 0.0, 0));
        e.2 += 1;
        e.3 += y;
        if let Some(p) = o.perplexity {
            e.4 += p;
            e.5 += 1;
        }
    }
    acc.into_iter()
        .map(|((model, _, _), (modality, group, n, y, p, np))| FitRow {
            model,
            modality,
            group,
            y: y / n as f64,
            perplexity: (np == n).then(|| p / n as f64),
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct HumanFit {
    pub fit: LogisticFit,
    /// Participants dropped because every response was correct or every response was wrong.
    pub excluded: Vec<String>,
    pub participants: usize,
    pub modality_emm: Vec<Emm>,
    pub arg_group_emm: Vec<Emm>,
    pub contrasts: Vec<ContrastResult>,
    /// Likelihood-ratio test for dropping the argument-form factor.
    pub arg_form_lrt: LrtResult,
}

/// Logistic fit of human correctness on modality, argument-form group and
/// reaction time (seconds), with per-participant intercepts.
pub fn fit_human(obs: &[HumanObservation], valid_only: bool) -> Result<HumanFit, AnalysisError> {
    let rows: Vec<&HumanObservation> = obs
        .iter()
        .filter(|o| o.family == Family::Main24 && (o.valid || !valid_only))
        .collect();
    if rows.is_empty() {
        return Err(AnalysisError::Empty("human main-form"));
    }
    let mut by_participant: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for o in &rows {
        let e = by_participant.entry(&o.participant).or_default();
        e.0 += 1;
        e.1 += usize::from(o.correct);
    }
    let excluded: Vec<String> = by_participant
        .iter()
        .filter(|(_, (n, c))| *c == 0 || *c == *n)
        .map(|(p, _)| p.to_string())
        .collect();
    let rows: Vec<&HumanObservation> =
        rows.into_iter().filter(|o| !excluded.contains(&o.participant)).collect();
    if rows.is_empty() {
        return Err(AnalysisError::Stats(StatsError::NothingToFit));
    }
    let participants = by_participant.len() - excluded.len();
    let modality: Vec<&str> = rows.iter().map(|r| r.modality.tag()).collect();
    let group: Vec<&str> =
        rows.iter().map(|r| ArgGroup::of(r.arg_form).expect("main form").tag()).collect();
    let participant: Vec<&str> = rows.iter().map(|r| r.participant.as_str()).collect();
    let rt: Vec<f64> = rows.iter().map(|r| r.rt_ms / 1000.0).collect();
    let y: Vec<f64> = rows.iter().map(|r| if r.correct { 1.0 } else { 0.0 }).collect();
    let table = Table::new()
        .factor(Factor::with_levels("modality", &MODALITY_LEVELS, &modality)?)
        .factor(Factor::with_levels("arg_form", &ARG_GROUP_LEVELS, &group)?)
        .factor(Factor::from_values("participant", &participant))
        .covariate(Covariate::new("rt", rt));
    let mut full = alloc::vec![Term::factor("modality"), Term::factor("arg_form"), Term::covariate("rt")];
    if participants >= 2 {
        full.push(Term::factor("participant"));
    }
    let reduced: Vec<Term> = full.iter().filter(|t| **t != Term::factor("arg_form")).cloned().collect();
    let fit = fit_logistic(&table, &y, &full)?;
    let null = fit_logistic(&table, &y, &reduced)?;
    let arg_form_lrt = likelihood_ratio(&fit, &null);
    let modality_emm = emmeans(&fit.fit, "modality")?;
    let arg_group_emm = emmeans(&fit.fit, "arg_form")?;
    let mut contrasts = pairwise_contrasts(&fit.fit, "modality", &modality_hypotheses())?;
    contrasts.extend(pairwise_contrasts(&fit.fit, "arg_form", &arg_form_hypotheses())?);
    Ok(HumanFit { fit, excluded, participants, modality_emm, arg_group_emm, contrasts, arg_form_lrt })
}

/// Perplexity against soft score, per item or over per-form means.
pub fn perplexity_correlation(obs: &[Observation], per_form: bool) -> Result<Correlation, AnalysisError> {
    let (x, y): (Vec<f64>, Vec<f64>) = if per_form {
        form_means(obs).iter().filter_map(|m| m.perplexity.map(|p| (p, m.soft_score))).unzip()
    } else {
        obs.iter().filter_map(|o| o.perplexity.map(|p| (p, o.soft_score))).unzip()
    };
    if x.is_empty() {
        return Err(AnalysisError::Empty("perplexity"));
    }
    Ok(correlate(&x, &y)?)
}

/// Mean perplexity and soft score per model and lexicon.
#[derive(Clone, Debug, PartialEq)]
pub struct LexiconSummary {
    pub model: String,
    pub lexicon: LexiconKind,
    pub n: usize,
    pub mean_perplexity: Option<f64>,
    pub mean_soft_score: f64,
}

pub fn lexicon_summary(obs: &[Observation]) -> Vec<LexiconSummary> {
    let mut acc: BTreeMap<(&str, LexiconKind), (usize, f64, f64, usize)> = BTreeMap::new();
    for o in obs {
        let e = acc.entry((&o.model, o.lexicon)).or_default();
        e.0 += 1;
        e.1 += o.soft_score;
        if let Some(p) = o.perplexity {
            e.2 += p;
            e.3 += 1;
        }
    }
    acc.into_iter()
        .map(|((model, lexicon), (n, s, p, np))| LexiconSummary {
            model: model.to_string(),
            lexicon,
            n,
            mean_perplexity: (np > 0).then(|| p / np as f64),
            mean_soft_score: s / n as f64,
        })
        .collect()
}
