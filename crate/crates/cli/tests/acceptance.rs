//! Acceptance suite. Each check prints one PASS or FAIL line; the process
//! exits nonzero if any check fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use certainty_core::audio::{synthesize_tone, AudioClip};
use certainty_core::experiments::*;
use certainty_core::featuresets::{select_combination_set, Member};
use certainty_core::models::{cohens_kappa, fit_ols, fit_tree, KappaVariant, Node, TreeParams};
use certainty_core::prosody::{
    aggregate_features, detect_silence, extract_contour, FeatureId, Interval, Scope, TrackerConfig,
    FEATURE_COUNT,
};
use certainty_core::stats;
use certainty_core::synthetic::{generate_study, SyntheticConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

const SR: u32 = 16_000;

fn pitch_oracle() -> Outcome {
    let start = Instant::now();
    let cfg = TrackerConfig::default();
    let mut notes = Vec::new();
    for freq in [110.0, 220.0, 330.0] {
        let clip = synthesize_tone(freq, 0.5, 1.0, SR).map_err(|e| e.to_string())?;
        let c = extract_contour(&clip, &cfg).map_err(|e| e.to_string())?;
        let voiced: Vec<f64> = c.frames.iter().filter_map(|f| f.f0).collect();
        ensure!(voiced.len() == c.frames.len(), "{freq} Hz: {}/{} frames voiced", voiced.len(), c.frames.len());
        let mean = voiced.iter().sum::<f64>() / voiced.len() as f64;
        ensure!((mean - freq).abs() <= 3.0, "{freq} Hz: mean f0 {mean:.3}");
        notes.push(format!("{freq}->{mean:.2}"));
    }
    let zeros = AudioClip::silence(1.0, SR).map_err(|e| e.to_string())?;
    let c = extract_contour(&zeros, &cfg).map_err(|e| e.to_string())?;
    let voiced = c.frames.iter().filter(|f| f.f0.is_some()).count();
    ensure!(voiced == 0, "all-zero clip has {voiced} voiced frames");
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    Ok(format!("{}, zeros unvoiced, {:.2?}", notes.join(" "), elapsed))
}

fn energy_oracle() -> Outcome {
    let cfg = TrackerConfig::default();
    let clip = synthesize_tone(220.0, 0.5, 1.0, SR).map_err(|e| e.to_string())?;
    let c = extract_contour(&clip, &cfg).map_err(|e| e.to_string())?;
    let s = detect_silence(&c, &cfg);
    let v = aggregate_features(&c, Scope::Utterance, &[Interval::new(0.0, clip.duration())], &s, 2)
        .map_err(|e| e.to_string())?;
    let got = v.get(FeatureId::RmsMean).ok_or("rms_mean missing")?;
    let expected = 0.5 / 2f64.sqrt();
    let rel = (got - expected).abs() / expected;
    ensure!(rel <= 0.01, "rms_mean {got:.6} vs {expected:.6} ({:.3}%)", rel * 100.0);
    Ok(format!("rms_mean {got:.5} vs {expected:.5}"))
}

fn temporal_oracle() -> Outcome {
    let cfg = TrackerConfig::default();
    let tone = synthesize_tone(220.0, 0.5, 0.5, SR).map_err(|e| e.to_string())?;
    let gap = AudioClip::silence(0.3, SR).map_err(|e| e.to_string())?;
    let clip = AudioClip::concat(&[tone.clone(), gap, tone]).map_err(|e| e.to_string())?;
    let c = extract_contour(&clip, &cfg).map_err(|e| e.to_string())?;
    let s = detect_silence(&c, &cfg);
    let syllables = 5;
    let v = aggregate_features(&c, Scope::Utterance, &[Interval::new(0.0, clip.duration())], &s, syllables)
        .map_err(|e| e.to_string())?;
    let get = |id| v.get(id).ok_or(format!("{id:?} missing"));
    let total = clip.duration();
    let (silence, percent, speaking) = (
        get(FeatureId::SilenceTotal)?,
        get(FeatureId::SilencePercent)?,
        get(FeatureId::DurationSpeaking)?,
    );
    let hop = cfg.hop;
    ensure!((silence - 0.3).abs() <= hop, "silence_total {silence}");
    ensure!((percent - 0.3 / total).abs() <= hop / total, "silence_percent {percent}");
    ensure!((speaking - 1.0).abs() <= hop, "duration_speaking {speaking}");
    let rate = get(FeatureId::SpeakingRate)?;
    ensure!(rate == syllables as f64 / speaking, "speaking_rate {rate} != {syllables}/{speaking}");
    Ok(format!("silence {silence:.3}s ({:.1}%), speaking {speaking:.3}s, rate {rate:.4}", percent * 100.0))
}

fn normalization_suite(corpus: &PreparedCorpus) -> Outcome {
    let mut by_speaker: BTreeMap<&str, Vec<&PreparedUtterance>> = BTreeMap::new();
    for u in &corpus.utterances {
        by_speaker.entry(&u.speaker_id).or_default().push(u);
    }
    let mut worst_mean = 0f64;
    let mut worst_sd = 0f64;
    let mut checked = 0;
    for (speaker, rows) in &by_speaker {
        for scope in Scope::ALL {
            for id in FeatureId::ALL {
                if id.is_normalized() {
                    let xs: Vec<f64> = rows.iter().filter_map(|u| u.features.scope(scope).get(id)).collect();
                    if xs.len() < 2 {
                        continue;
                    }
                    let raw: Vec<f64> = rows.iter().filter_map(|u| u.raw.scope(scope).get(id)).collect();
                    if stats::sample_stdev(&raw) == 0.0 {
                        continue;
                    }
                    let n = xs.len() as f64;
                    let mean = xs.iter().sum::<f64>() / n;
                    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
                    ensure!(mean.abs() <= 1e-9, "{speaker} {scope:?} {id:?}: mean {mean:e}");
                    ensure!((sd - 1.0).abs() <= 1e-9, "{speaker} {scope:?} {id:?}: sd {sd}");
                    worst_mean = worst_mean.max(mean.abs());
                    worst_sd = worst_sd.max((sd - 1.0).abs());
                    checked += 1;
                } else {
                    for u in rows {
                        let (a, b) = (u.raw.scope(scope).get(id), u.features.scope(scope).get(id));
                        ensure!(
                            a.map(f64::to_bits) == b.map(f64::to_bits),
                            "{} {scope:?} {id:?}: {a:?} became {b:?}",
                            u.utterance_id
                        );
                    }
                }
            }
        }
    }
    ensure!(checked > 0, "no normalized columns checked");
    Ok(format!("{checked} speaker columns, max |mean| {worst_mean:.1e}, max |sd-1| {worst_sd:.1e}, temporal bit-identical"))
}

/// Scope correlations with perceived certainty, rows in feature order,
/// columns utterance, context, target.
const REFERENCE_CORRELATIONS: [[f64; 3]; FEATURE_COUNT] = [
    [0.107, 0.119, 0.041],
    [-0.073, -0.153, -0.045],
    [0.033, 0.070, -0.004],
    [-0.035, -0.047, -0.043],
    [-0.128, -0.211, -0.075],
    [0.042, 0.022, 0.046],
    [0.015, 0.008, 0.001],
    [0.275, 0.180, 0.191],
    [0.275, 0.180, 0.191],
    [0.101, 0.172, 0.027],
    [-0.091, -0.110, -0.034],
    [-0.012, 0.039, -0.031],
    [-0.002, -0.003, -0.019],
    [0.101, 0.172, 0.027],
    [-0.039, -0.028, -0.007],
    [-0.643, -0.507, -0.495],
    [-0.455, -0.225, -0.532],
    [-0.592, -0.502, -0.590],
    [-0.430, -0.390, -0.386],
    [0.090, 0.014, 0.136],
];

fn combination_fixture() -> Outcome {
    use FeatureId::*;
    let spec = select_combination_set(&REFERENCE_CORRELATIONS);
    let mut got: BTreeMap<&str, Vec<FeatureId>> = BTreeMap::new();
    for m in &spec.members {
        let (scope, f) = match *m {
            Member::Utterance(f) => ("utterance", f),
            Member::Context(f) => ("context", f),
            Member::Target(f) => ("target", f),
            Member::Nonprosodic(n) => return Err(format!("unexpected member {n:?}")),
        };
        got.entry(scope).or_default().push(f);
    }
    let expected: BTreeMap<&str, Vec<FeatureId>> = [
        ("utterance", vec![F0RelposMax, F0AbsSlopeHz, F0AbsSlopeSemi, RmsRelposMax, SilenceTotal, DurationTotal, DurationSpeaking]),
        ("context", vec![F0Min, F0Max, F0Mean, F0Stdev, F0Range, RmsMin, RmsMax, RmsMean, RmsRelposMin]),
        ("target", vec![F0RelposMin, RmsStdev, SilencePercent, SpeakingRate]),
    ]
    .into_iter()
    .collect();
    ensure!(got == expected, "membership {got:?}");
    Ok(format!(
        "{}/{}/{} utterance/context/target",
        got["utterance"].len(),
        got["context"].len(),
        got["target"].len()
    ))
}

/// Least squares with intercept via the normal equations and Gaussian
/// elimination with partial pivoting.
fn normal_equations(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = x[0].len() + 1;
    let row = |i: usize| std::iter::once(1.0).chain(x[i].iter().copied()).collect::<Vec<f64>>();
    let mut a = vec![vec![0.0; p + 1]; p];
    for i in 0..x.len() {
        let r = row(i);
        for j in 0..p {
            for k in 0..p {
                a[j][k] += r[j] * r[k];
            }
            a[j][p] += r[j] * y[i];
        }
    }
    for col in 0..p {
        let pivot = (col..p).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, pivot);
        for r in col + 1..p {
            let f = a[r][col] / a[col][col];
            for c in col..=p {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    let mut b = vec![0.0; p];
    for r in (0..p).rev() {
        let s: f64 = (r + 1..p).map(|c| a[r][c] * b[c]).sum();
        b[r] = (a[r][p] - s) / a[r][r];
    }
    b
}

fn ols_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst = 0f64;
    for _ in 0..20 {
        let x: Vec<Vec<f64>> = (0..50).map(|_| (0..5).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
        let y: Vec<f64> = (0..50).map(|_| rng.random_range(-5.0..5.0)).collect();
        let m = fit_ols(&x, &y).map_err(|e| e.to_string())?;
        let b = normal_equations(&x, &y);
        let got = std::iter::once(m.intercept).chain(m.coefficients.iter().copied());
        for (g, e) in got.zip(&b) {
            worst = worst.max((g - e).abs());
        }
    }
    ensure!(worst <= 1e-8, "max coefficient difference {worst:e}");

    let beta = [1.5, -2.0, 0.25, 3.0, -0.75];
    let x: Vec<Vec<f64>> = (0..50).map(|_| (0..5).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
    let y: Vec<f64> = x.iter().map(|r| 0.4 + r.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>()).collect();
    let m = fit_ols(&x, &y).map_err(|e| e.to_string())?;
    let pred: Vec<f64> = x.iter().map(|r| m.predict(r).unwrap()).collect();
    let rms = (pred.iter().zip(&y).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / y.len() as f64).sqrt();
    ensure!(rms < 1e-9, "noiseless rms {rms:e}");
    Ok(format!("20 systems, max diff {worst:.1e}; noiseless rms {rms:.1e}"))
}

fn entropy(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.log2()
        })
        .sum()
}

/// Hand computation of the root split: each feature's best threshold by
/// information gain, then the highest gain ratio among features whose gain is
/// at least the average.
fn best_gain_ratio_split(x: &[Vec<f64>], y: &[usize], min_leaf: usize) -> (usize, f64, f64) {
    let n = y.len();
    let total = [y.iter().filter(|&&c| c == 0).count(), y.iter().filter(|&&c| c == 1).count()];
    let mut cands = Vec::new();
    for f in 0..x[0].len() {
        let mut values: Vec<f64> = x.iter().map(|r| r[f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        let mut best_here: Option<(usize, f64, f64, f64)> = None;
        for w in values.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let mut left = [0usize; 2];
            for (r, &c) in x.iter().zip(y) {
                if r[f] <= t {
                    left[c] += 1;
                }
            }
            let right = [total[0] - left[0], total[1] - left[1]];
            let (nl, nr) = (left[0] + left[1], right[0] + right[1]);
            if nl < min_leaf || nr < min_leaf {
                continue;
            }
            let gain = entropy(&total) - nl as f64 / n as f64 * entropy(&left) - nr as f64 / n as f64 * entropy(&right);
            let split_info = entropy(&[nl, nr]);
            let cand = (f, t, gain, gain / split_info);
            match best_here {
                Some((_, _, g, _)) if g >= gain => {}
                _ => best_here = Some(cand),
            }
        }
        cands.extend(best_here);
    }
    let avg = cands.iter().map(|c| c.2).sum::<f64>() / cands.len() as f64;
    let best = cands
        .iter()
        .filter(|c| c.2 >= avg - 1e-12)
        .max_by(|a, b| a.3.total_cmp(&b.3))
        .unwrap();
    (best.0, best.1, best.3)
}

fn tree_oracle() -> Outcome {
    let x0 = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    let x1 = [1.0, 4.0, 2.0, 5.0, 3.0, 6.0];
    let x: Vec<Vec<f64>> = x0.iter().zip(&x1).map(|(&a, &b)| vec![a, b]).collect();
    let y = vec![0, 0, 0, 1, 1, 1];
    let (feature, threshold, ratio) = best_gain_ratio_split(&x, &y, 2);
    ensure!((feature, threshold) == (0, 3.5) && (ratio - 1.0).abs() < 1e-12, "oracle picked {feature} at {threshold}");
    let tree = fit_tree(&x, &y, &TreeParams::default()).map_err(|e| e.to_string())?;
    match &tree.root {
        Node::Split { feature: f, threshold: t, .. } => {
            ensure!(*f == feature && *t == threshold, "tree split on feature {f} at {t}")
        }
        Node::Leaf { .. } => return Err("tree did not split".into()),
    }

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let xs: Vec<Vec<f64>> = (0..200).map(|_| vec![rng.random_range(-10.0..10.0)]).collect();
    let ys: Vec<usize> = xs.iter().map(|r| usize::from(r[0] > 1.7)).collect();
    let tree = fit_tree(&xs, &ys, &TreeParams::default()).map_err(|e| e.to_string())?;
    let correct = xs.iter().zip(&ys).filter(|(r, &c)| tree.predict(r).unwrap() == c).count();
    ensure!(correct == xs.len(), "separable data: {correct}/{} correct", xs.len());
    Ok(format!("root split feature 0 at 3.5 (gain ratio {ratio:.3}); separable 200/200"))
}

fn kappa_oracle() -> Outcome {
    let a = [1u8, 1, 2, 2];
    let b = [1u8, 1, 2, 1];
    // observed 3/4; chance .5*.75 + .5*.25 = 1/2
    let hand = (0.75 - 0.5) / (1.0 - 0.5);
    let k = cohens_kappa(&a, &b).map_err(|e| e.to_string())?;
    ensure!(k == hand && k == 0.5, "hand case kappa {k}");
    let pair = KappaVariant::AveragePairwise.compute(&[a.to_vec(), b.to_vec()]).map_err(|e| e.to_string())?;
    ensure!(pair == 0.5, "pairwise hand case {pair}");

    let same = vec![1u8, 2, 3, 4, 5, 3, 2];
    for v in [KappaVariant::AveragePairwise, KappaVariant::Fleiss] {
        let k = v.compute(&[same.clone(), same.clone(), same.clone()]).map_err(|e| e.to_string())?;
        ensure!(k == 1.0, "{v:?} identical raters {k}");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let judges: Vec<Vec<u8>> = (0..2).map(|_| (0..10_000).map(|_| rng.random_range(1..=5)).collect()).collect();
    let mut worst = 0f64;
    for v in [KappaVariant::AveragePairwise, KappaVariant::Fleiss] {
        let k = v.compute(&judges).map_err(|e| e.to_string())?;
        ensure!(k.abs() < 0.05, "{v:?} independent raters {k}");
        worst = worst.max(k.abs());
    }
    Ok(format!("hand 0.5, identical 1.0, independent |k| <= {worst:.4}"))
}

fn loso_structure(corpus: &PreparedCorpus) -> Outcome {
    let speaker_of = corpus.speaker_of();
    let plan = make_loso_folds(speaker_of.iter().copied()).map_err(|e| e.to_string())?;
    let speakers: BTreeSet<&str> = speaker_of.iter().copied().collect();
    ensure!(plan.len() == speakers.len(), "{} folds for {} speakers", plan.len(), speakers.len());
    for (k, fold) in plan.folds.iter().enumerate() {
        ensure!(!fold.train_speakers.contains(&fold.test_speaker), "fold {k} trains on {}", fold.test_speaker);
        let (train, test) = plan.split(k, &speaker_of).map_err(|e| e.to_string())?;
        ensure!(train.iter().all(|&i| speaker_of[i] != fold.test_speaker), "fold {k} leaks a test row");
        ensure!(test.iter().all(|&i| speaker_of[i] == fold.test_speaker), "fold {k} tests a foreign row");
        ensure!(train.len() + test.len() == corpus.len(), "fold {k} drops rows");
    }

    let mut counts: BTreeMap<TriageSubset, usize> = BTreeMap::new();
    for u in &corpus.utterances {
        let s = assign_triage_subset(u.correctness, u.perceived_mean).map_err(|e| e.to_string())?;
        *counts.entry(s).or_default() += 1;
    }
    ensure!(counts.values().sum::<usize>() == corpus.len(), "subsets do not cover the corpus");
    let report = run_triage_experiment(corpus, &TreeParams::default()).map_err(|e| e.to_string())?;
    for r in &report.subsets {
        let expected = counts.get(&r.subset).copied().unwrap_or(0);
        ensure!(r.n == expected, "subset {} has {} rows, expected {expected}", r.subset.as_str(), r.n);
    }
    ensure!(report.subsets.iter().map(|r| r.n).sum::<usize>() == corpus.len(), "triage subsets do not partition");
    let split: Vec<String> = counts.iter().map(|(s, n)| format!("{}={n}", s.as_str())).collect();
    Ok(format!("{} folds leak-free; subsets {}", plan.len(), split.join(" ")))
}

fn end_to_end(study_time: Duration, corpus: &PreparedCorpus) -> Outcome {
    let start = Instant::now();
    ensure!(corpus.len() == 96, "{} utterances", corpus.len());
    let spec = combination_set(corpus).map_err(|e| e.to_string())?;
    let perceived = run_perceived_experiment(corpus, &PerceivedConfig::new(spec)).map_err(|e| e.to_string())?;
    let localized = run_localization(corpus, &LocalizationConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = study_time + start.elapsed();
    ensure!(perceived.pooled_accuracy >= 0.95, "perceived accuracy {:.3}", perceived.pooled_accuracy);
    ensure!(localized.accuracy >= 0.90, "localization accuracy {:.3}", localized.accuracy);
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!(
        "perceived {:.1}% ({}/{}), localization {:.1}% of {}, {:.2?}",
        perceived.pooled_accuracy * 100.0,
        perceived.correct,
        perceived.total,
        localized.accuracy * 100.0,
        localized.eligible,
        elapsed
    ))
}

fn certainty(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_certainty"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    Ok(())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path();
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let study = root.join("study");
    certainty(&["synth", "--out", &s(&study)])?;
    let manifest = s(&study.join("manifest.json"));
    let run = |name: &str, extra: &[&str]| -> Result<Vec<Vec<u8>>, String> {
        let out = root.join(name);
        let mut args = vec!["experiment", "perceived", "--manifest", &manifest];
        let out_s = s(&out);
        args.extend(["--output", &out_s]);
        args.extend(extra);
        certainty(&args)?;
        ["report.json", "report.txt"]
            .iter()
            .map(|f| std::fs::read(out.join(f)).map_err(|e| e.to_string()))
            .collect()
    };
    let first = run("a", &["--no-cache"])?;
    let second = run("b", &["--no-cache"])?;
    ensure!(first == second, "uncached runs differ");
    let cache = s(&root.join("cache"));
    let filled = run("c", &["--cache-dir", &cache])?;
    let cached = run("d", &["--cache-dir", &cache])?;
    ensure!(filled == first && cached == first, "cached runs differ from uncached");
    Ok(format!("report.json {} bytes identical across 4 runs (2 cached)", first[0].len()))
}

fn main() -> ExitCode {
    let study_start = Instant::now();
    let prepared = generate_study(&SyntheticConfig::default(), &TrackerConfig::default())
        .map_err(|e| e.to_string())
        .and_then(|study| {
            let corpus = study.corpus().map_err(|e| e.to_string())?;
            prepare_corpus(&corpus, &study.lexicon, &TrackerConfig::default()).map_err(|e| e.to_string())
        });
    let study_time = study_start.elapsed();

    let with_corpus = |f: fn(&PreparedCorpus) -> Outcome| {
        let prepared = &prepared;
        move || prepared.as_ref().map_err(|e| format!("synthetic study: {e}")).and_then(f)
    };
    let checks: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("pitch oracle", Box::new(pitch_oracle)),
        ("energy oracle", Box::new(energy_oracle)),
        ("temporal oracle", Box::new(temporal_oracle)),
        ("normalization suite", Box::new(with_corpus(normalization_suite))),
        ("combination-set fixture", Box::new(combination_fixture)),
        ("OLS oracle", Box::new(ols_oracle)),
        ("tree oracle", Box::new(tree_oracle)),
        ("kappa oracle", Box::new(kappa_oracle)),
        ("LOSO structure", Box::new(with_corpus(loso_structure))),
        (
            "end-to-end synthetic study",
            Box::new(|| {
                let corpus = prepared.as_ref().map_err(|e| format!("synthetic study: {e}"))?;
                end_to_end(study_time, corpus)
            }),
        ),
        ("CLI determinism", Box::new(determinism)),
    ];

    let mut failed = 0;
    for (name, check) in &checks {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("{} of {} acceptance checks passed", checks.len() - failed, checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
