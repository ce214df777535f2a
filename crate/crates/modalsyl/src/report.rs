//! CSV reports from model results and human trials.

use std::path::{Path, PathBuf};

use modalsyl_core::analysis::{
    fit_human, fit_scores, form_means, group_table, human_group_row, lexicon_summary, perplexity_correlation,
    FitOptions, GroupRow, HumanObservation, Observation, ScoreFit, GROUP_COLUMNS,
};
use modalsyl_core::stats::dist::normal_sf;
use modalsyl_core::stats::{ContrastResult, Emm, LinearFit};
use modalsyl_core::LexiconKind;

use crate::Error;

/// One CSV file: `#`-prefixed provenance lines, then a header row.
pub struct Sheet {
    pub name: &'static str,
    pub method: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub notes: Vec<String>,
}

impl Sheet {
    fn new(name: &'static str, method: &str, header: &[&'static str]) -> Sheet {
        Sheet { name, method: method.to_string(), header: header.to_vec(), rows: Vec::new(), notes: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_bytes(&self, seed: u64) -> Result<Vec<u8>, Error> {
        let mut out = format!("# modalsyl analyze\n# seed: {seed}\n# method: {}\n", self.method).into_bytes();
        for n in &self.notes {
            out.extend(format!("# note: {n}\n").bytes());
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        out.extend(w.into_inner().map_err(|e| Error::Usage(e.to_string()))?);
        Ok(out)
    }
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Every sheet name `analyze` writes when human trials are supplied.
pub const SHEETS: [&str; 17] = [
    "group_table",
    "form_means",
    "lexicon_summary",
    "perplexity_correlation",
    "accuracy_coefficients",
    "accuracy_emmeans",
    "accuracy_contrasts",
    "accuracy_std_coefficients",
    "affirmation_coefficients",
    "affirmation_emmeans",
    "affirmation_contrasts",
    "human_group_table",
    "human_coefficients",
    "human_emmeans",
    "human_contrasts",
    "human_lrt",
    "human_exclusions",
];

fn lexicons(obs: &[Observation]) -> Vec<LexiconKind> {
    let mut v: Vec<LexiconKind> = obs.iter().map(|o| o.lexicon).collect();
    v.sort();
    v.dedup();
    v
}

fn group_row_cells(lexicon: &str, r: &GroupRow) -> Vec<String> {
    let mut row = vec![lexicon.to_string(), r.label.clone(), r.n.to_string()];
    row.extend(r.cells.iter().map(|c| opt(*c)));
    row.push(r.best_modality.map(|i| GROUP_COLUMNS[i].to_string()).unwrap_or_default());
    row.push(r.best_arg_form.map(|i| GROUP_COLUMNS[i].to_string()).unwrap_or_default());
    row
}

fn group_header() -> Vec<&'static str> {
    let mut h = vec!["lexicon", "label", "n"];
    h.extend(GROUP_COLUMNS);
    h.extend(["best_modality", "best_arg_form"]);
    h
}

fn coef_rows(sheet: &mut Sheet, prefix: &[String], fit: &LinearFit) {
    for (i, term) in fit.terms().iter().enumerate() {
        let (b, se) = (fit.coefficients[i], fit.std_errors[i]);
        let z = b / se;
        let mut row = prefix.to_vec();
        row.extend([term.clone(), num(b), num(se), num(z), num(2.0 * normal_sf(z.abs()))]);
        sheet.push(row);
    }
}

fn emm_rows(sheet: &mut Sheet, prefix: &[String], factor: &str, emms: &[Emm]) {
    for e in emms {
        let mut row = prefix.to_vec();
        row.extend([factor.to_string(), e.level.clone(), num(e.estimate), num(e.se), num(e.lower), num(e.upper)]);
        sheet.push(row);
    }
}

fn contrast_rows(sheet: &mut Sheet, prefix: &[String], cs: &[ContrastResult]) {
    for c in cs {
        let mut row = prefix.to_vec();
        row.extend([c.label.clone(), num(c.estimate), num(c.se), num(c.z), num(c.p_value)]);
        sheet.push(row);
    }
}

const COEF_HEADER: [&str; 5] = ["term", "estimate", "std_error", "z", "p_two_sided"];
const EMM_HEADER: [&str; 6] = ["factor", "level", "estimate", "se", "lower_95", "upper_95"];
const CONTRAST_HEADER: [&str; 5] = ["hypothesis", "estimate", "se", "z", "p_one_sided"];

fn with_prefix(prefix: &[&'static str], rest: &[&'static str]) -> Vec<&'static str> {
    prefix.iter().chain(rest).copied().collect()
}

fn score_sheets(
    obs: &[Observation],
    opts: FitOptions,
    stem: &'static str,
    method: &str,
) -> Result<[Sheet; 3], Error> {
    let names: [&'static str; 3] = match stem {
        "accuracy" => ["accuracy_coefficients", "accuracy_emmeans", "accuracy_contrasts"],
        _ => ["affirmation_coefficients", "affirmation_emmeans", "affirmation_contrasts"],
    };
    let mut coef = Sheet::new(names[0], method, &with_prefix(&["lexicon"], &COEF_HEADER));
    let mut emm = Sheet::new(names[1], method, &with_prefix(&["lexicon"], &EMM_HEADER));
    let mut con = Sheet::new(names[2], method, &with_prefix(&["lexicon"], &CONTRAST_HEADER));
    for lex in lexicons(obs) {
        let subset: Vec<Observation> = obs.iter().filter(|o| o.lexicon == lex).cloned().collect();
        let f: ScoreFit = fit_scores(&subset, opts)?;
        let p = [lex.tag().to_string()];
        coef_rows(&mut coef, &p, &f.fit);
        emm_rows(&mut emm, &p, "modality", &f.modality_emm);
        emm_rows(&mut emm, &p, "arg_form", &f.arg_group_emm);
        contrast_rows(&mut con, &p, &f.contrasts);
        let note = format!(
            "{}: {} rows, models [{}], per-model terms {}, perplexity {}, R^2 {}",
            lex.tag(),
            f.rows,
            f.models.join(" "),
            f.per_model_terms,
            f.uses_perplexity,
            f.fit.r_squared
        );
        for s in [&mut coef, &mut emm, &mut con] {
            s.notes.push(note.clone());
        }
    }
    Ok([coef, emm, con])
}

/// All model-side sheets.
pub fn model_sheets(obs: &[Observation]) -> Result<Vec<Sheet>, Error> {
    if obs.is_empty() {
        return Err(Error::Usage("no model responses to analyze".into()));
    }
    let mut sheets = Vec::new();

    let mut g = Sheet::new("group_table", "mean soft score over main forms by modality and argument form", &group_header());
    for lex in lexicons(obs) {
        let subset: Vec<Observation> = obs.iter().filter(|o| o.lexicon == lex).cloned().collect();
        if let Ok(rows) = group_table(&subset) {
            for r in rows {
                g.push(group_row_cells(lex.tag(), &r));
            }
        }
    }
    sheets.push(g);

    let mut fm = Sheet::new(
        "form_means",
        "per-form means over interpretations",
        &["model", "lexicon", "family", "form_id", "n", "soft_score", "yes_share", "perplexity"],
    );
    for m in form_means(obs) {
        fm.push(vec![
            m.model,
            m.lexicon.tag().into(),
            m.family.tag().into(),
            m.form_id,
            m.n.to_string(),
            num(m.soft_score),
            num(m.yes_share),
            opt(m.perplexity),
        ]);
    }
    sheets.push(fm);

    let mut ls = Sheet::new(
        "lexicon_summary",
        "mean prompt perplexity and soft score per model and lexicon",
        &["model", "lexicon", "n", "mean_perplexity", "mean_soft_score"],
    );
    for s in lexicon_summary(obs) {
        ls.push(vec![s.model, s.lexicon.tag().into(), s.n.to_string(), opt(s.mean_perplexity), num(s.mean_soft_score)]);
    }
    sheets.push(ls);

    let mut pc = Sheet::new(
        "perplexity_correlation",
        "Pearson and Spearman correlation of prompt perplexity with soft score",
        &["lexicon", "scope", "n", "pearson", "spearman"],
    );
    let mut scopes: Vec<(String, Vec<Observation>)> = vec![("all".into(), obs.to_vec())];
    for lex in lexicons(obs) {
        scopes.push((lex.tag().into(), obs.iter().filter(|o| o.lexicon == lex).cloned().collect()));
    }
    for (label, subset) in &scopes {
        for (scope, per_form) in [("item", false), ("form_mean", true)] {
            match perplexity_correlation(subset, per_form) {
                Ok(c) => pc.push(vec![label.clone(), scope.into(), c.n.to_string(), num(c.pearson), num(c.spearman)]),
                Err(e) => pc.notes.push(format!("{label}/{scope}: {e}")),
            }
        }
    }
    sheets.push(pc);

    sheets.extend(score_sheets(
        obs,
        FitOptions::accuracy(),
        "accuracy",
        "OLS of soft score on modality + argument form + perplexity, valid main forms; treatment coding; EMMs balanced over factors at mean perplexity",
    )?);
    let [mut std_coef, _, _] = score_sheets(
        obs,
        FitOptions { standardize_perplexity: true, ..FitOptions::accuracy() },
        "accuracy",
        "as accuracy_coefficients with z-scored perplexity",
    )?;
    std_coef.name = "accuracy_std_coefficients";
    sheets.push(std_coef);
    sheets.extend(score_sheets(
        obs,
        FitOptions::affirmation(),
        "affirmation",
        "OLS of relative P(Yes) on modality + argument form + perplexity, all main forms",
    )?);
    Ok(sheets)
}

/// Human-side sheets.
pub fn human_sheets(obs: &[HumanObservation]) -> Result<Vec<Sheet>, Error> {
    let mut sheets = Vec::new();
    let mut g = Sheet::new("human_group_table", "human accuracy over main forms", &group_header());
    g.push(group_row_cells("human", &human_group_row(obs)?));
    sheets.push(g);

    let method = "logistic regression of correctness on modality + argument form + rt (s) + participant";
    let f = fit_human(obs, false)?;
    let mut coef = Sheet::new("human_coefficients", method, &COEF_HEADER);
    coef_rows(&mut coef, &[], &f.fit.fit);
    coef.notes.push(format!(
        "participants {}, log-likelihood {}, converged {} after {} iterations",
        f.participants, f.fit.log_likelihood, f.fit.converged, f.fit.iterations
    ));
    sheets.push(coef);
    let mut emm = Sheet::new("human_emmeans", method, &EMM_HEADER);
    emm.notes.push("estimates on the logit scale".into());
    emm_rows(&mut emm, &[], "modality", &f.modality_emm);
    emm_rows(&mut emm, &[], "arg_form", &f.arg_group_emm);
    sheets.push(emm);
    let mut con = Sheet::new("human_contrasts", method, &CONTRAST_HEADER);
    contrast_rows(&mut con, &[], &f.contrasts);
    sheets.push(con);
    let mut lrt = Sheet::new("human_lrt", "likelihood-ratio test for dropping argument form", &["statistic", "df", "p_value"]);
    lrt.push(vec![num(f.arg_form_lrt.statistic), f.arg_form_lrt.df.to_string(), num(f.arg_form_lrt.p_value)]);
    sheets.push(lrt);
    let mut ex = Sheet::new("human_exclusions", "participants with all-correct or all-wrong responses", &["participant"]);
    for p in f.excluded {
        ex.push(vec![p]);
    }
    sheets.push(ex);
    Ok(sheets)
}

/// Write sheets as `<dir>/<name>.csv`.
pub fn write_sheets(dir: &Path, sheets: &[Sheet], seed: u64) -> Result<Vec<PathBuf>, Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for s in sheets {
        let p = dir.join(format!("{}.csv", s.name));
        crate::jsonl::write_atomic(&p, &s.to_bytes(seed)?)?;
        paths.push(p);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate, GenerateConfig};
    use crate::eval::ModelResponse;
    use crate::lexicon;
    use modalsyl_core::metrics::AnswerLogprobs;
    use modalsyl_core::{Family, Label};

    fn observations() -> Vec<Observation> {
        let mut out = Vec::new();
        for (kind, lex) in [(LexiconKind::Natural, lexicon::natural()), (LexiconKind::Nonsense, lexicon::nonsense())] {
            let items = generate(&GenerateConfig { families: vec![Family::Main24], n: 4, seed: 42, lexicon: lex }).unwrap();
            for (model, bias) in [("m1", 0.3), ("m2", -0.2)] {
                for (k, it) in items.iter().enumerate() {
                    let w = ((k * 37) % 11) as f64 / 11.0;
                    let right = -0.2 - w;
                    let wrong = -1.0 + bias + w * 0.5;
                    let (y, n) = if it.ground_truth == Label::Yes { (right, wrong) } else { (wrong, right) };
                    let base = if kind == LexiconKind::Natural { -2.0 } else { -4.0 };
                    let lps = vec![base - w, base + 0.5 * w, base];
                    let a = AnswerLogprobs::new(y, n).with_prompt(lps);
                    out.push(ModelResponse::build(it, model, a).unwrap().observation());
                }
            }
        }
        out
    }

    #[test]
    fn model_sheets_are_complete() {
        let sheets = model_sheets(&observations()).unwrap();
        let names: Vec<&str> = sheets.iter().map(|s| s.name).collect();
        assert_eq!(names, SHEETS[..11]);
        for s in &sheets {
            assert!(!s.rows.is_empty(), "{}", s.name);
            assert!(s.rows.iter().all(|r| r.len() == s.header.len()), "{}", s.name);
        }
        let g = &sheets[0];
        assert_eq!(g.rows.len(), 4);
        let text = String::from_utf8(g.to_bytes(7).unwrap()).unwrap();
        assert!(text.starts_with("# modalsyl analyze\n# seed: 7\n# method: "));
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        assert_eq!(rdr.records().count(), 4);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(model_sheets(&[]), Err(Error::Usage(_))));
    }
}
