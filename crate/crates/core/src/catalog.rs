//! The catalog of argument forms: the 24 main syllogisms, the necessitation
//! variants and the distribution-over-disjunction family.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::formula::{Formula, MetaFormula, Modality};
use crate::kripke::{FrameClass, Mode, Sequent};
use crate::oracle::brute_force_oracle;
use crate::tableau::{decide, ProverError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Main24,
    Necessitation,
    Distribution,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Main24, Family::Necessitation, Family::Distribution];

    pub fn tag(self) -> &'static str {
        match self {
            Family::Main24 => "main24",
            Family::Necessitation => "necessitation",
            Family::Distribution => "distribution",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Family> {
        Self::ALL.into_iter().find(|f| f.tag() == tag)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArgForm {
    /// `{φ∨ψ, ¬φ} ⊢ ψ` and its fallacy.
    DisjL,
    /// `{φ∨ψ, ¬ψ} ⊢ φ` and its fallacy.
    DisjR,
    /// `{¬φ→ψ, ¬φ} ⊢ ψ` (modus ponens) and affirming the consequent.
    ModusPonensL,
    /// `{¬φ→ψ, ¬ψ} ⊢ φ` (modus tollens) and denying the antecedent.
    ModusTollensR,
    NecIntro,
    Base,
    Theorem,
    Spurious,
}

impl ArgForm {
    pub const ALL: [ArgForm; 8] = [
        ArgForm::DisjL,
        ArgForm::DisjR,
        ArgForm::ModusPonensL,
        ArgForm::ModusTollensR,
        ArgForm::NecIntro,
        ArgForm::Base,
        ArgForm::Theorem,
        ArgForm::Spurious,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ArgForm::DisjL => "disj_l",
            ArgForm::DisjR => "disj_r",
            ArgForm::ModusPonensL => "modus_ponens_l",
            ArgForm::ModusTollensR => "modus_tollens_r",
            ArgForm::NecIntro => "nec_intro",
            ArgForm::Base => "base",
            ArgForm::Theorem => "theorem",
            ArgForm::Spurious => "spurious",
        }
    }

    pub fn from_tag(tag: &str) -> Option<ArgForm> {
        Self::ALL.into_iter().find(|a| a.tag() == tag)
    }
}

impl fmt::Display for ArgForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Yes/No answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Yes,
    No,
}

impl Label {
    pub fn from_valid(valid: bool) -> Label {
        if valid { Label::Yes } else { Label::No }
    }

    pub fn is_yes(self) -> bool {
        self == Label::Yes
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Yes => "Yes",
            Label::No => "No",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One argument form with its template and ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub id: String,
    pub family: Family,
    pub modality: Modality,
    pub arg_form: ArgForm,
    pub premises: Vec<MetaFormula>,
    pub conclusion: MetaFormula,
    /// Formula substituted for `φ` (`𝔐p` for the main forms, `p` otherwise).
    pub phi: Formula,
    /// Formula substituted for `ψ`.
    pub psi: Formula,
    pub mode: Mode,
    pub frames: FrameClass,
    /// Ground truth as decided by the prover under `(mode, frames)`.
    pub label: Label,
    /// Ground truth as listed in the published tables.
    pub published_label: Label,
}

impl CatalogEntry {
    /// Instantiate the template into a sequent under the entry's mode and frames.
    pub fn sequent(&self) -> Sequent {
        let inst = |m: &MetaFormula| {
            m.substitute(&self.phi, &self.psi)
                .expect("catalog templates only use phi and psi")
        };
        Sequent {
            premises: self.premises.iter().map(inst).collect(),
            conclusion: inst(&self.conclusion),
            mode: self.mode,
            frames: self.frames,
        }
    }

    /// True for the main forms listed as valid inferences (as opposed to their fallacies).
    pub fn is_fallacy_variant(&self) -> bool {
        self.published_label == Label::No
    }
}

struct Spec {
    id: String,
    family: Family,
    modality: Modality,
    arg_form: ArgForm,
    premises: [&'static str; 2],
    premise_count: usize,
    conclusion: &'static str,
    mode: Mode,
    published: Label,
    modal_vars: bool,
}

fn main24_specs() -> Vec<Spec> {
    // (arg form, premise 1, valid premise 2, valid conclusion, fallacy premise 2, fallacy conclusion)
    let rules: [(ArgForm, &str, &str, &str, &str, &str); 4] = [
        (ArgForm::DisjL, "$phi | $psi", "~$phi", "$psi", "$psi", "~$phi"),
        (ArgForm::DisjR, "$phi | $psi", "~$psi", "$phi", "$phi", "~$psi"),
        (ArgForm::ModusPonensL, "~$phi -> $psi", "~$phi", "$psi", "$psi", "~$phi"),
        (ArgForm::ModusTollensR, "~$phi -> $psi", "~$psi", "$phi", "$phi", "~$psi"),
    ];
    let mut out = Vec::with_capacity(24);
    for published in [Label::Yes, Label::No] {
        for modality in Modality::ALL {
            for &(arg_form, p1, vp2, vc, fp2, fc) in &rules {
                let (p2, c, variant) = match published {
                    Label::Yes => (vp2, vc, "valid"),
                    Label::No => (fp2, fc, "fallacy"),
                };
                out.push(Spec {
                    id: format!("main-{}-{}-{}", modality.tag(), arg_form.tag(), variant),
                    family: Family::Main24,
                    modality,
                    arg_form,
                    premises: [p1, p2],
                    premise_count: 2,
                    conclusion: c,
                    mode: Mode::Local,
                    published,
                    modal_vars: true,
                });
            }
        }
    }
    out
}

fn necessitation_specs() -> Vec<Spec> {
    [
        (Modality::Necessity, "[]$phi"),
        (Modality::Possibility, "<>$phi"),
        (Modality::None, "$phi"),
    ]
    .into_iter()
    .map(|(modality, conclusion)| Spec {
        id: format!("nec-{}", modality.tag()),
        family: Family::Necessitation,
        modality,
        arg_form: ArgForm::NecIntro,
        premises: ["$phi", ""],
        premise_count: 1,
        conclusion,
        mode: Mode::Global,
        published: Label::Yes,
        modal_vars: false,
    })
    .collect()
}

fn distribution_specs() -> Vec<Spec> {
    let rows: [(Modality, ArgForm, &str, &str, &str, Label); 7] = [
        (Modality::None, ArgForm::Base, "$phi | $psi", "~$phi", "$psi", Label::Yes),
        (Modality::Necessity, ArgForm::Base, "[]$phi | []$psi", "~[]$phi", "[]$psi", Label::Yes),
        (Modality::Necessity, ArgForm::Theorem, "[]($phi | $psi)", "[]~$phi", "[]$psi", Label::Yes),
        (Modality::Necessity, ArgForm::Spurious, "[]($phi | $psi)", "~[]$phi", "[]$psi", Label::No),
        (Modality::Possibility, ArgForm::Base, "<>$phi | <>$psi", "~<>$phi", "<>$psi", Label::Yes),
        (Modality::Possibility, ArgForm::Theorem, "<>($phi | $psi)", "<>~$phi", "<>$psi", Label::Yes),
        (Modality::Possibility, ArgForm::Spurious, "<>($phi | $psi)", "~<>$phi", "<>$psi", Label::Yes),
    ];
    rows.into_iter()
        .map(|(modality, arg_form, p1, p2, conclusion, published)| Spec {
            id: format!("dist-{}-{}", modality.tag(), arg_form.tag()),
            family: Family::Distribution,
            modality,
            arg_form,
            premises: [p1, p2],
            premise_count: 2,
            conclusion,
            mode: Mode::Local,
            published,
            modal_vars: false,
        })
        .collect()
}

fn build(spec: Spec) -> Result<CatalogEntry, ProverError> {
    let parse = |s: &str| MetaFormula::parse(s).expect("catalog template parses");
    let (phi, psi) = if spec.modal_vars {
        (spec.modality.apply(Formula::atom("p")), spec.modality.apply(Formula::atom("q")))
    } else {
        (Formula::atom("p"), Formula::atom("q"))
    };
    let mut entry = CatalogEntry {
        id: spec.id,
        family: spec.family,
        modality: spec.modality,
        arg_form: spec.arg_form,
        premises: spec.premises[..spec.premise_count].iter().map(|s| parse(s)).collect(),
        conclusion: parse(spec.conclusion),
        phi,
        psi,
        mode: spec.mode,
        frames: FrameClass::Reflexive,
        label: spec.published,
        published_label: spec.published,
    };
    entry.label = Label::from_valid(decide(&entry.sequent())?.valid);
    Ok(entry)
}

/// The specs for a family, in catalog order.
fn specs(family: Family) -> Vec<Spec> {
    match family {
        Family::Main24 => main24_specs(),
        Family::Necessitation => necessitation_specs(),
        Family::Distribution => distribution_specs(),
    }
}

/// All 34 entries (24 main, 3 necessitation, 7 distribution) with prover labels.
pub fn builtin_catalog() -> Vec<CatalogEntry> {
    catalog_families(&Family::ALL)
}

/// Entries of the requested families, in catalog order.
pub fn catalog_families(families: &[Family]) -> Vec<CatalogEntry> {
    Family::ALL
        .into_iter()
        .filter(|f| families.contains(f))
        .flat_map(specs)
        .map(|s| build(s).expect("catalog sequents are small enough for the default limits"))
        .collect()
}

/// One row of the prover-versus-published-label audit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub id: String,
    pub family: Family,
    pub sequent: String,
    pub mode: Mode,
    pub frames: FrameClass,
    pub prover: Label,
    pub oracle: Label,
    pub published: Label,
    /// For main forms: the verdict is the same under (local, K), (local, T) and (global, T).
    pub stable: bool,
    pub matches: bool,
}

impl AuditRow {
    /// A divergence between the prover and the published label that the
    /// prover and oracle agree on.
    pub fn is_documented_divergence(&self) -> bool {
        !self.matches && self.prover == self.oracle && self.stable
    }
}

/// Oracle bound used by the audit.
pub const AUDIT_ORACLE_WORLDS: usize = 5;

pub fn audit(entries: &[CatalogEntry]) -> Result<Vec<AuditRow>, ProverError> {
    entries
        .iter()
        .map(|e| {
            let s = e.sequent();
            let prover = Label::from_valid(decide(&s)?.valid);
            let oracle = Label::from_valid(brute_force_oracle(&s, AUDIT_ORACLE_WORLDS).valid);
            let stable = if e.family == Family::Main24 {
                let mut verdicts = Vec::new();
                for (mode, frames) in [
                    (Mode::Local, FrameClass::K),
                    (Mode::Local, FrameClass::Reflexive),
                    (Mode::Global, FrameClass::Reflexive),
                ] {
                    let v = decide(&s.clone().with_mode(mode).with_frames(frames))?;
                    verdicts.push(v.valid);
                }
                verdicts.iter().all(|&v| v == verdicts[0])
            } else {
                true
            };
            Ok(AuditRow {
                id: e.id.clone(),
                family: e.family,
                sequent: format!("{s}"),
                mode: e.mode,
                frames: e.frames,
                prover,
                oracle,
                published: e.published_label,
                stable,
                matches: prover == e.published_label,
            })
        })
        .collect()
}

/// Lookup by id.
pub fn find<'a>(entries: &'a [CatalogEntry], id: &str) -> Option<&'a CatalogEntry> {
    entries.iter().find(|e| e.id == id)
}
