//! Pearson correlation of every scoped feature with perceived certainty, and
//! the per-feature scope choice built from it.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{FeatureSetError, FeatureSetSpec, Member, SegmentedFeatures, SetId};
use crate::prosody::{FeatureId, Scope, FEATURE_COUNT};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCell {
    pub r: f64,
    /// Two-sided p-value from the t transform with n − 2 degrees of freedom.
    pub p: f64,
    /// Utterances with a value for this feature.
    pub n: usize,
}

impl CorrelationCell {
    /// `**` below .01, `*` below .05.
    pub fn stars(&self) -> &'static str {
        if self.p < 0.01 {
            "**"
        } else if self.p < 0.05 {
            "*"
        } else {
            ""
        }
    }
}

/// Rows in canonical feature order; columns utterance, context, target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    pub rows: Vec<[CorrelationCell; 3]>,
}

impl CorrelationTable {
    pub fn get(&self, feature: FeatureId, scope: Scope) -> &CorrelationCell {
        &self.rows[feature.index()][scope.index()]
    }

    pub fn r_matrix(&self) -> [[f64; 3]; FEATURE_COUNT] {
        let mut out = [[0.0; 3]; FEATURE_COUNT];
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.map(|c| c.r);
        }
        out
    }
}

fn two_sided_p(r: f64, n: usize) -> f64 {
    let df = n as f64 - 2.0;
    if df <= 0.0 {
        return 1.0;
    }
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
}

/// Correlates each (feature, scope) with the perceived means. Utterances
/// missing a value are skipped for that cell only.
pub fn correlation_table(
    rows: &[(&SegmentedFeatures, f64)],
) -> Result<CorrelationTable, FeatureSetError> {
    if rows.len() < 3 {
        return Err(FeatureSetError::TooFewUtterances(rows.len()));
    }
    let mut out = Vec::with_capacity(FEATURE_COUNT);
    for feature in FeatureId::ALL {
        let mut cells = [CorrelationCell {
            r: 0.0,
            p: 1.0,
            n: 0,
        }; 3];
        for scope in Scope::ALL {
            let (x, y): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .filter_map(|(seg, y)| seg.scope(scope).get(feature).map(|x| (x, *y)))
                .unzip();
            if x.len() < 3 {
                return Err(FeatureSetError::TooFewUtterances(x.len()));
            }
            let r = stats::pearson(&x, &y).ok_or(FeatureSetError::ZeroVariance { feature, scope })?;
            cells[scope.index()] = CorrelationCell {
                r,
                p: two_sided_p(r, x.len()),
                n: x.len(),
            };
        }
        out.push(cells);
    }
    Ok(CorrelationTable { rows: out })
}

/// For each feature picks the scope with the largest |r|. Ties go to the
/// utterance scope, then context, then target.
pub fn select_combination_set(table: &[[f64; 3]; FEATURE_COUNT]) -> FeatureSetSpec {
    let members = FeatureId::ALL
        .iter()
        .map(|&f| {
            let row = table[f.index()];
            let mut best = Scope::Utterance;
            for scope in [Scope::Context, Scope::Target] {
                if row[scope.index()].abs() > row[best.index()].abs() {
                    best = scope;
                }
            }
            Member::prosodic(best, f)
        })
        .collect();
    FeatureSetSpec {
        set_id: SetId::E,
        members,
    }
}

pub fn select_combination_set_from(table: &CorrelationTable) -> FeatureSetSpec {
    select_combination_set(&table.r_matrix())
}
