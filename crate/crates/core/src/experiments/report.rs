use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{AgreementReport, CorrelationReport, LocalizationReport, PerceivedReport, TriageReport};
use crate::models::ConfusionMatrix;

pub const REPORT_FORMAT: &str = "certainty-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Perceived,
    Triage,
    Correlations,
    Localize,
    Agreement,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        Self::Perceived,
        Self::Triage,
        Self::Correlations,
        Self::Localize,
        Self::Agreement,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Perceived => "perceived",
            Self::Triage => "triage",
            Self::Correlations => "correlations",
            Self::Localize => "localize",
            Self::Agreement => "agreement",
        }
    }
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown experiment `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", content = "result", rename_all = "snake_case")]
pub enum ReportBody {
    Perceived(PerceivedReport),
    Triage(TriageReport),
    Correlations(CorrelationReport),
    Localize(LocalizationReport),
    Agreement(AgreementReport),
}

impl ReportBody {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Self::Perceived(_) => ExperimentKind::Perceived,
            Self::Triage(_) => ExperimentKind::Triage,
            Self::Correlations(_) => ExperimentKind::Correlations,
            Self::Localize(_) => ExperimentKind::Localize,
            Self::Agreement(_) => ExperimentKind::Agreement,
        }
    }
}

/// A finished experiment with the configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub format: String,
    pub seed: u64,
    pub config: serde_json::Value,
    #[serde(flatten)]
    pub body: ReportBody,
}

impl ExperimentReport {
    pub fn new(seed: u64, config: serde_json::Value, body: ReportBody) -> Self {
        Self {
            format: REPORT_FORMAT.to_string(),
            seed,
            config,
            body,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Plain-text tables for reading in a terminal.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "experiment: {}", self.body.kind());
        let _ = writeln!(out, "seed: {}", self.seed);
        let _ = writeln!(out, "config: {}", self.config);
        out.push('\n');
        match &self.body {
            ReportBody::Perceived(r) => perceived_text(&mut out, r),
            ReportBody::Triage(r) => triage_text(&mut out, r),
            ReportBody::Correlations(r) => correlations_text(&mut out, r),
            ReportBody::Localize(r) => localize_text(&mut out, r),
            ReportBody::Agreement(r) => agreement_text(&mut out, r),
        }
        out
    }
}

fn pct(x: f64) -> String {
    format!("{:.2}%", 100.0 * x)
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
}

fn confusion_text(out: &mut String, title: &str, m: &ConfusionMatrix) {
    let _ = writeln!(out, "{title} (rows truth, columns prediction)");
    let _ = write!(out, "{:>12}", "");
    for l in &m.labels {
        let _ = write!(out, "{l:>12}");
    }
    out.push('\n');
    for (l, row) in m.labels.iter().zip(&m.counts) {
        let _ = write!(out, "{l:>12}");
        for c in row {
            let _ = write!(out, "{c:>12}");
        }
        out.push('\n');
    }
}

fn perceived_text(out: &mut String, r: &PerceivedReport) {
    let _ = writeln!(out, "feature set {} ({} inputs), learner {:?}", r.feature_set, r.inputs.len(), r.learner);
    let _ = writeln!(out, "{:<16}{:>8}{:>10}{:>10}{:>10}", "speaker", "n", "accuracy", "rms", "pearson");
    for f in &r.folds {
        let _ = writeln!(
            out,
            "{:<16}{:>8}{:>10}{:>10.4}{:>10}",
            f.test_speaker,
            f.n_test,
            pct(f.accuracy),
            f.rms,
            opt(f.pearson)
        );
    }
    let _ = writeln!(out, "\naccuracy (pooled): {} ({}/{})", pct(r.pooled_accuracy), r.correct, r.total);
    let _ = writeln!(out, "accuracy (fold mean): {}", pct(r.fold_mean_accuracy));
    let _ = writeln!(out, "rms error: {:.4}", r.rms);
    let _ = writeln!(out, "mean fold pearson: {}", opt(r.fold_mean_pearson));
    let _ = writeln!(out, "naive baseline ({}): {}\n", r.majority_class.as_str(), pct(r.naive_baseline));
    confusion_text(out, "confusion", &r.confusion);
}

fn triage_text(out: &mut String, r: &TriageReport) {
    let _ = writeln!(out, "utterances: {}", r.total);
    let _ = writeln!(out, "baseline 1 (majority {:?}): {}", r.baseline1_label, pct(r.baseline1_accuracy));
    let _ = writeln!(out, "baseline 2 (perceived class): {}", pct(r.baseline2_accuracy));
    let _ = writeln!(out, "single tree: {} ({}/{})", pct(r.single_tree_accuracy), r.single_tree_correct, r.total);
    let _ = writeln!(out, "triage (pooled): {} ({}/{})\n", pct(r.triage_accuracy), r.triage_correct, r.total);
    let _ = writeln!(out, "{:<8}{:>6}{:>7}{:>10}{:>10}  note", "subset", "n", "folds", "tree", "majority");
    for s in &r.subsets {
        let _ = writeln!(
            out,
            "{:<8}{:>6}{:>7}{:>10}{:>10}  {}",
            s.subset.as_str(),
            s.n,
            s.folds,
            pct(s.accuracy),
            pct(s.majority_baseline),
            if s.too_small { "too small, majority used" } else { "" }
        );
    }
    out.push('\n');
    confusion_text(out, "single tree confusion", &r.single_tree_confusion);
    confusion_text(out, "triage confusion", &r.triage_confusion);
}

fn correlations_text(out: &mut String, r: &CorrelationReport) {
    let _ = writeln!(out, "single-target utterances: {}", r.n);
    let _ = writeln!(out, "{:<20}{:>12}{:>12}{:>12}  selected", "feature", "utterance", "context", "target");
    for row in &r.rows {
        let cell = |c: &crate::featuresets::CorrelationCell| format!("{:.3}{}", c.r, c.stars());
        let _ = writeln!(
            out,
            "{:<20}{:>12}{:>12}{:>12}  {}",
            row.feature.as_str(),
            cell(&row.utterance),
            cell(&row.context),
            cell(&row.target),
            row.selected
        );
    }
    let [u, c, t] = r.scope_counts;
    let _ = writeln!(out, "\ncombination set: {u} utterance, {c} context, {t} target");
    let _ = writeln!(out, "* p < .05, ** p < .01");
}

fn localize_text(out: &mut String, r: &LocalizationReport) {
    let _ = writeln!(out, "inputs: {}", r.inputs.len());
    let _ = writeln!(out, "{:<20}{:>10}{:>10}{:>10}  outcome", "utterance", "perceived", "slot", "control");
    for u in &r.utterances {
        let _ = writeln!(
            out,
            "{:<20}{:>10.2}{:>10.4}{:>10.4}  {:?}",
            u.utterance_id, u.perceived_mean, u.slot_score, u.control_score, u.outcome
        );
    }
    let _ = writeln!(
        out,
        "\nslot word chosen: {} of {} ({}); control {}, unresolved {}",
        r.slot_chosen,
        r.eligible,
        pct(r.accuracy),
        r.control_chosen,
        r.unresolved
    );
    if !r.skipped_without_control.is_empty() {
        let _ = writeln!(out, "skipped without control word: {}", r.skipped_without_control.join(", "));
    }
}

fn agreement_text(out: &mut String, r: &AgreementReport) {
    let _ = writeln!(out, "{} judges, {} utterances, {:?}", r.judges, r.utterances, r.variant);
    let _ = writeln!(out, "five-point kappa: {}", opt(r.five_point_kappa));
    for s in &r.partition_scores {
        let mark = if s.partition == r.best_partition { "  best" } else { "" };
        let _ = writeln!(out, "{:<14}{:>10}{mark}", s.partition.to_string(), opt(s.kappa));
    }
    let rates = &r.rates;
    let _ = writeln!(
        out,
        "\nself-aware {}/{}, misconception {}, lacks confidence or lucky guess {}",
        rates.self_aware, rates.utterances, rates.misconception, rates.lacks_confidence_or_lucky_guess
    );
    let _ = writeln!(
        out,
        "transparent {}/{}, sounds certain but is not {}, sounds uncertain but is {}",
        rates.transparent, rates.utterances, rates.opaque_broadcaster, rates.opaque_meek
    );
}
