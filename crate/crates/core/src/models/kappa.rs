//! Chance-corrected agreement between judges.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ModelError;

fn marginals(r: &[u8]) -> BTreeMap<u8, f64> {
    let mut m = BTreeMap::new();
    for &v in r {
        *m.entry(v).or_insert(0.0) += 1.0;
    }
    let n = r.len() as f64;
    m.values_mut().for_each(|c| *c /= n);
    m
}

/// Unweighted Cohen's kappa with chance agreement from the product of the
/// two raters' marginals.
pub fn cohens_kappa(a: &[u8], b: &[u8]) -> Result<f64, ModelError> {
    if a.len() != b.len() {
        return Err(ModelError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(ModelError::EmptyData);
    }
    let n = a.len() as f64;
    let p_o = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / n;
    let (ma, mb) = (marginals(a), marginals(b));
    let p_e: f64 = ma.iter().map(|(k, pa)| pa * mb.get(k).copied().unwrap_or(0.0)).sum();
    if (1.0 - p_e).abs() < 1e-12 {
        return Err(ModelError::DegenerateMarginals);
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

/// Mean Cohen's kappa over all judge pairs. `judges[j][i]` is judge `j`'s
/// rating of item `i`.
pub fn average_pairwise_kappa(judges: &[Vec<u8>]) -> Result<f64, ModelError> {
    if judges.len() < 2 {
        return Err(ModelError::TooFewJudges(judges.len()));
    }
    let mut sum = 0.0;
    let mut pairs = 0;
    for i in 0..judges.len() {
        for j in i + 1..judges.len() {
            sum += cohens_kappa(&judges[i], &judges[j])?;
            pairs += 1;
        }
    }
    Ok(sum / pairs as f64)
}

/// Fleiss' kappa for a fixed number of raters per item.
pub fn fleiss_kappa(judges: &[Vec<u8>]) -> Result<f64, ModelError> {
    if judges.len() < 2 {
        return Err(ModelError::TooFewJudges(judges.len()));
    }
    let n_items = judges[0].len();
    if let Some(j) = judges.iter().find(|j| j.len() != n_items) {
        return Err(ModelError::LengthMismatch {
            left: n_items,
            right: j.len(),
        });
    }
    if n_items == 0 {
        return Err(ModelError::EmptyData);
    }
    let raters = judges.len() as f64;
    let mut totals: BTreeMap<u8, f64> = BTreeMap::new();
    let mut p_bar = 0.0;
    for i in 0..n_items {
        let mut counts: BTreeMap<u8, f64> = BTreeMap::new();
        for j in judges {
            *counts.entry(j[i]).or_insert(0.0) += 1.0;
        }
        let agree: f64 = counts.values().map(|c| c * (c - 1.0)).sum();
        p_bar += agree / (raters * (raters - 1.0));
        for (k, c) in counts {
            *totals.entry(k).or_insert(0.0) += c;
        }
    }
    p_bar /= n_items as f64;
    let total = raters * n_items as f64;
    let p_e: f64 = totals.values().map(|c| (c / total).powi(2)).sum();
    if (1.0 - p_e).abs() < 1e-12 {
        return Err(ModelError::DegenerateMarginals);
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaVariant {
    #[default]
    AveragePairwise,
    Fleiss,
}

impl KappaVariant {
    pub fn compute(self, judges: &[Vec<u8>]) -> Result<f64, ModelError> {
        match self {
            KappaVariant::AveragePairwise => average_pairwise_kappa(judges),
            KappaVariant::Fleiss => fleiss_kappa(judges),
        }
    }
}

/// An ordered three-bin partition of the ratings 1..=5: `1..=low`,
/// `low+1..=high`, `high+1..=5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition3 {
    pub low: u8,
    pub high: u8,
}

impl Partition3 {
    /// {1,2 | 3 | 4,5}
    pub const STANDARD: Partition3 = Partition3 { low: 2, high: 3 };

    pub fn all() -> Vec<Partition3> {
        let mut out = Vec::new();
        for low in 1..=3 {
            for high in low + 1..=4 {
                out.push(Partition3 { low, high });
            }
        }
        out
    }

    pub fn bin(&self, rating: u8) -> u8 {
        if rating <= self.low {
            0
        } else if rating <= self.high {
            1
        } else {
            2
        }
    }
}

impl std::fmt::Display for Partition3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let bin = |r: std::ops::RangeInclusive<u8>| r.map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        write!(
            f,
            "{{{}|{}|{}}}",
            bin(1..=self.low),
            bin(self.low + 1..=self.high),
            bin(self.high + 1..=5)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionScore {
    pub partition: Partition3,
    /// `None` when kappa is undefined under this binning.
    pub kappa: Option<f64>,
}

/// Scores all six partitions and returns the best with every score. Ties
/// (within 1e-12) favor {1,2|3|4,5}, then enumeration order.
pub fn best_partition_for_agreement(
    judges: &[Vec<u8>],
    variant: KappaVariant,
) -> Result<(Partition3, Vec<PartitionScore>), ModelError> {
    if judges.len() < 2 {
        return Err(ModelError::TooFewJudges(judges.len()));
    }
    let mut scores = Vec::new();
    for p in Partition3::all() {
        let binned: Vec<Vec<u8>> = judges.iter().map(|j| j.iter().map(|&r| p.bin(r)).collect()).collect();
        let kappa = match variant.compute(&binned) {
            Ok(k) => Some(k),
            Err(ModelError::DegenerateMarginals) => None,
            Err(e) => return Err(e),
        };
        scores.push(PartitionScore { partition: p, kappa });
    }
    let best_k = scores
        .iter()
        .filter_map(|s| s.kappa)
        .fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<Partition3> = scores
        .iter()
        .filter(|s| s.kappa.is_some_and(|k| k >= best_k - 1e-12))
        .map(|s| s.partition)
        .collect();
    let best = if tied.contains(&Partition3::STANDARD) || tied.is_empty() {
        Partition3::STANDARD
    } else {
        tied[0]
    };
    Ok((best, scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hand_case() {
        let k = cohens_kappa(&[1, 1, 2, 2], &[1, 2, 2, 2]).unwrap();
        assert!((k - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identical_raters_agree_fully() {
        assert_eq!(cohens_kappa(&[1, 2, 3, 4, 5], &[1, 2, 3, 4, 5]), Ok(1.0));
        assert_eq!(cohens_kappa(&[3, 3], &[3, 3]), Err(ModelError::DegenerateMarginals));
    }

    #[test]
    fn independent_uniform_raters_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a: Vec<u8> = (0..10_000).map(|_| rng.random_range(1..=5)).collect();
        let b: Vec<u8> = (0..10_000).map(|_| rng.random_range(1..=5)).collect();
        assert!(cohens_kappa(&a, &b).unwrap().abs() < 0.05);
    }

    #[test]
    fn fleiss_textbook_example() {
        // Two raters, items rated (1,1), (1,2), (2,2), (2,2).
        // P_bar = 3/4, category shares 3/8 and 5/8, P_e = 34/64.
        let k = fleiss_kappa(&[vec![1, 1, 2, 2], vec![1, 2, 2, 2]]).unwrap();
        let p_e = 34.0 / 64.0;
        assert!((k - (0.75 - p_e) / (1.0 - p_e)).abs() < 1e-12);
    }

    #[test]
    fn pairwise_average() {
        let judges = vec![vec![1, 1, 2, 2], vec![1, 2, 2, 2], vec![1, 1, 2, 2]];
        let k = average_pairwise_kappa(&judges).unwrap();
        assert!((k - (0.5 + 1.0 + 0.5) / 3.0).abs() < 1e-12);
        assert_eq!(average_pairwise_kappa(&judges[..1]), Err(ModelError::TooFewJudges(1)));
    }

    #[test]
    fn partitions_enumerate_six() {
        let all = Partition3::all();
        assert_eq!(all.len(), 6);
        assert_eq!(Partition3::STANDARD.to_string(), "{1,2|3|4,5}");
        assert_eq!(Partition3 { low: 1, high: 3 }.to_string(), "{1|2,3|4,5}");
    }

    #[test]
    fn perfect_agreement_under_standard_partition() {
        let judges = vec![vec![1, 3, 5, 2, 4], vec![2, 3, 4, 1, 5], vec![1, 3, 5, 1, 4]];
        let (best, scores) = best_partition_for_agreement(&judges, KappaVariant::AveragePairwise).unwrap();
        assert_eq!(best, Partition3::STANDARD);
        let std = scores.iter().find(|s| s.partition == Partition3::STANDARD).unwrap();
        assert_eq!(std.kappa, Some(1.0));
    }

    #[test]
    fn constructed_agreement_only_under_one_two_three_split() {
        // Judges mix 2 and 3 freely but never cross the 1 or 4 boundaries.
        let judges = vec![
            vec![1, 2, 3, 4, 5, 1, 2, 3, 4, 5],
            vec![1, 3, 2, 5, 4, 1, 3, 2, 5, 4],
            vec![1, 2, 2, 4, 4, 1, 3, 3, 5, 5],
            vec![1, 3, 3, 5, 5, 1, 2, 2, 4, 4],
            vec![1, 2, 3, 4, 5, 1, 3, 2, 4, 5],
        ];
        let (best, scores) = best_partition_for_agreement(&judges, KappaVariant::AveragePairwise).unwrap();
        assert_eq!(best, Partition3 { low: 1, high: 3 });
        for s in &scores {
            if s.partition != best {
                assert!(s.kappa.unwrap() < 1.0);
            }
        }
    }

    proptest! {
        #[test]
        fn symmetric_and_relabel_invariant(pairs in prop::collection::vec((1u8..=5, 1u8..=5), 5..60),
                                           perm in Just(vec![1u8, 2, 3, 4, 5]).prop_shuffle()) {
            let a: Vec<u8> = pairs.iter().map(|p| p.0).collect();
            let b: Vec<u8> = pairs.iter().map(|p| p.1).collect();
            let relabel = |v: &[u8]| v.iter().map(|&r| perm[(r - 1) as usize]).collect::<Vec<u8>>();
            match (cohens_kappa(&a, &b), cohens_kappa(&b, &a), cohens_kappa(&relabel(&a), &relabel(&b))) {
                (Ok(k1), Ok(k2), Ok(k3)) => {
                    prop_assert!((k1 - k2).abs() < 1e-12);
                    prop_assert!((k1 - k3).abs() < 1e-12);
                }
                (r1, r2, r3) => {
                    prop_assert!(r1.is_err() && r2.is_err() && r3.is_err());
                }
            }
        }
    }
}
