//! Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero when
//! any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use newsframe_core::datasets::{bootstrap_dataset, BootstrapParams};
use newsframe_core::framing::{classify_change, em_threshold, Decision, ScoreMode, DEFAULT_THRESHOLD};
use newsframe_core::keywords::{information_gain, IgVariant, Period};
use newsframe_core::legislation::{
    loo_evaluate, normalized_annual_diffs, table_conditional, table_conditional_direct, LegislationParams,
};
use newsframe_core::metrics::cohens_kappa;
use newsframe_core::newscycle::{corpus_mnc, mnc, AnnualFeatureSeries};
use newsframe_core::semantics::{truncated_svd, uniform_transport_cost, wmd, EmbeddingSpace, SvdMethod};
use newsframe_core::{Article, Corpus, NGram, NgramOrders, TfMatrix, Tokenizer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---- independent oracles ----

fn plogp_entropy(labels: &[Period]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let n = labels.len() as f64;
    [Period::First, Period::Second]
        .iter()
        .map(|c| labels.iter().filter(|l| *l == c).count() as f64 / n)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Minimum-cost perfect matching by trying every permutation.
fn min_over_permutations(cost: &[Vec<f64>]) -> f64 {
    fn go(cost: &[Vec<f64>], row: usize, used: &mut [bool], acc: f64, best: &mut f64) {
        if row == cost.len() {
            *best = best.min(acc);
            return;
        }
        for c in 0..cost.len() {
            if !used[c] {
                used[c] = true;
                go(cost, row + 1, used, acc + cost[row][c], best);
                used[c] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(cost, 0, &mut vec![false; cost.len()], 0.0, &mut best);
    best
}

/// Equal-mass transport between point sets, each cut into lcm(n, m)
/// units, solved by exhaustive matching of units.
fn exhaustive_transport(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let units = (1..).map(|k| k * a.len()).find(|u| u % b.len() == 0).unwrap();
    let (ra, rb) = (units / a.len(), units / b.len());
    let cost: Vec<Vec<f64>> =
        (0..units).map(|i| (0..units).map(|j| euclid(&a[i / ra], &b[j / rb])).collect()).collect();
    min_over_permutations(&cost) / units as f64
}

fn naive_pearson(u: &[f64], v: &[f64]) -> f64 {
    let n = u.len() as f64;
    let (mu, mv) = (u.iter().sum::<f64>() / n, v.iter().sum::<f64>() / n);
    let cov: f64 = u.iter().zip(v).map(|(a, b)| (a - mu) * (b - mv)).sum();
    let su: f64 = u.iter().map(|a| (a - mu).powi(2)).sum::<f64>().sqrt();
    let sv: f64 = v.iter().map(|b| (b - mv).powi(2)).sum::<f64>().sqrt();
    cov / (su * sv)
}

// ---- criteria ----

fn c1_information_gain() -> Check {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    let mut checked = 0;
    for _ in 0..1000 {
        let docs = rng.random_range(1..=6);
        let terms = rng.random_range(1..=8);
        let rows: Vec<Vec<u32>> = (0..docs).map(|_| (0..terms).map(|_| rng.random_range(0..3)).collect()).collect();
        let labels: Vec<Period> =
            (0..docs).map(|_| if rng.random_bool(0.5) { Period::First } else { Period::Second }).collect();
        let tf = TfMatrix::from_dense(
            (0..terms).map(|t| NGram::unigram(format!("t{t}"))).collect(),
            (0..docs).map(|d| format!("d{d}")).collect(),
            &rows,
        );
        let h = plogp_entropy(&labels);
        for t in 0..terms {
            let with: Vec<Period> = (0..docs).filter(|&d| rows[d][t] > 0).map(|d| labels[d]).collect();
            let without: Vec<Period> = (0..docs).filter(|&d| rows[d][t] == 0).map(|d| labels[d]).collect();
            let n = docs as f64;
            let as_written = h - with.len() as f64 / n * plogp_entropy(&with);
            let full = as_written - without.len() as f64 / n * plogp_entropy(&without);
            let got = information_gain(&tf, &labels, t, IgVariant::AsWritten).map_err(|e| e.to_string())?;
            let got_full = information_gain(&tf, &labels, t, IgVariant::Full).map_err(|e| e.to_string())?;
            worst = worst.max((got - as_written).abs()).max((got_full - full).abs());
            checked += 1;
        }
    }
    let secs = started.elapsed().as_secs_f64();
    ensure(worst <= 1e-12, || format!("max deviation {worst:e} > 1e-12"))?;
    ensure(secs < 5.0, || format!("took {secs:.2}s"))?;
    Ok(format!("1000 corpora, {checked} terms, max |Δ| = {worst:.1e}, {secs:.3}s"))
}

fn c2_wmd() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let dim = rng.random_range(1..=4);
        let vocab: Vec<(String, Vec<f64>)> = (0..6)
            .map(|i| (format!("v{i}"), (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect()))
            .collect();
        let space = EmbeddingSpace::from_vectors(vocab.clone());
        // keyword n-grams through `wmd`
        let ngram = |rng: &mut ChaCha8Rng| {
            let len = rng.random_range(1..=2);
            let idx: Vec<usize> = (0..len).map(|_| rng.random_range(0..6)).collect();
            (NGram::new(idx.iter().map(|&i| vocab[i].0.clone())), idx)
        };
        let (a, ia) = ngram(&mut rng);
        let (b, ib) = ngram(&mut rng);
        let pts = |idx: &[usize]| idx.iter().map(|&i| vocab[i].1.clone()).collect::<Vec<_>>();
        let got = wmd(&a, &b, &space).map_err(|e| e.to_string())?;
        worst = worst.max((got - exhaustive_transport(&pts(&ia), &pts(&ib))).abs());
        // token sets of up to three through the transport solver
        let (n, m) = (rng.random_range(1..=3), rng.random_range(1..=3));
        let sa: Vec<Vec<f64>> = (0..n).map(|_| vocab[rng.random_range(0..6)].1.clone()).collect();
        let sb: Vec<Vec<f64>> = (0..m).map(|_| vocab[rng.random_range(0..6)].1.clone()).collect();
        let ra: Vec<&[f64]> = sa.iter().map(|v| v.as_slice()).collect();
        let rb: Vec<&[f64]> = sb.iter().map(|v| v.as_slice()).collect();
        worst = worst.max((uniform_transport_cost(&ra, &rb) - exhaustive_transport(&sa, &sb)).abs());
    }
    ensure(worst <= 1e-9, || format!("max deviation {worst:e} > 1e-9"))?;
    Ok(format!("1000 draws, max |Δ| = {worst:.1e}"))
}

fn c3_threshold() -> Check {
    ensure(DEFAULT_THRESHOLD == 0.15, || format!("default threshold is {DEFAULT_THRESHOLD}"))?;
    let cases = [(0.20, Decision::Significant), (0.16, Decision::Significant), (0.09, Decision::NotSignificant)];
    for (score, want) in cases {
        let got = classify_change(score, 0.15, ScoreMode::MeanSimilarity);
        ensure(got == want, || format!("{score} -> {got}, expected {want}"))?;
    }
    Ok("0.20 -> significant, 0.16 -> significant, 0.09 -> not_significant".into())
}

fn c4_em() -> Check {
    let mut failures = Vec::new();
    let mut thresholds = Vec::new();
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let low: Vec<f64> = Normal::new(0.08, 0.02).unwrap().sample_iter(&mut rng).take(50).collect();
        let high: Vec<f64> = Normal::new(0.19, 0.02).unwrap().sample_iter(&mut rng).take(50).collect();
        let scores: Vec<f64> = low.iter().chain(&high).copied().collect();
        match em_threshold(&scores) {
            Err(e) => failures.push(format!("seed {seed}: {e}")),
            Ok(t) => {
                thresholds.push(t);
                let correct = low.iter().filter(|&&x| x < t).count() + high.iter().filter(|&&x| x >= t).count();
                if !(t > 0.10 && t < 0.17) || correct != 100 {
                    failures.push(format!("seed {seed}: t={t:.4}, accuracy {}/100", correct));
                }
            }
        }
    }
    ensure(failures.is_empty(), || failures.join("; "))?;
    let (lo, hi) = thresholds.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| (a.min(t), b.max(t)));
    Ok(format!("20/20 seeds, thresholds in [{lo:.4}, {hi:.4}], accuracy 1.0"))
}

fn c5_conditional_rows() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let (mut worst_sum, mut worst_gap) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let bins = rng.random_range(2..=8);
        let alpha = [0.5, 1.0, 2.0][rng.random_range(0..3)];
        let table: Vec<f64> = (0..bins * bins).map(|_| rng.random_range(0..20) as f64 + alpha).collect();
        for x1 in 0..bins {
            let mut row = 0.0;
            for x2 in 0..bins {
                let eq2 = table_conditional(&table, bins, x1, x2).map_err(|e| e.to_string())?;
                let direct = table_conditional_direct(&table, bins, x1, x2).map_err(|e| e.to_string())?;
                // independent row normalization
                let oracle = table[x1 * bins + x2] / table[x1 * bins..(x1 + 1) * bins].iter().sum::<f64>();
                worst_gap = worst_gap.max((eq2 - direct).abs()).max((eq2 - oracle).abs());
                row += eq2;
            }
            worst_sum = worst_sum.max((row - 1.0).abs());
        }
    }
    ensure(worst_sum <= 1e-12, || format!("row sum off by {worst_sum:e}"))?;
    ensure(worst_gap <= 1e-12, || format!("forms differ by {worst_gap:e}"))?;
    Ok(format!("100 tables, max |Σ-1| = {worst_sum:.1e}, max form gap = {worst_gap:.1e}"))
}

fn spike_series(topic: &str, spikes: &[usize]) -> AnnualFeatureSeries {
    let mut s = AnnualFeatureSeries {
        topic: topic.into(),
        years: (2000..2014).collect(),
        volume: vec![20; 14],
        mean_sentiment: vec![Some(0.1); 14],
        mnc: vec![Some(0.1); 14],
        legislative: Some(vec![false; 14]),
    };
    for &y in spikes {
        s.volume[y] = 200;
        s.mnc[y] = Some(0.6);
        s.legislative.as_mut().unwrap()[y] = true;
    }
    s
}

fn c6_synthetic_loo() -> Check {
    let data: Vec<_> = common::SPIKES
        .iter()
        .map(|(t, s)| normalized_annual_diffs(&spike_series(t, s)))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let started = Instant::now();
    let report = loo_evaluate(&data, &LegislationParams::default()).map_err(|e| e.to_string())?;
    let secs = started.elapsed().as_secs_f64();
    let per: Vec<String> =
        report.per_topic.iter().map(|t| format!("{}={:.3}", t.topic, t.evaluation.scores.f1)).collect();
    ensure(report.per_topic.len() == 3, || format!("{} topics", report.per_topic.len()))?;
    ensure(report.per_topic.iter().all(|t| t.evaluation.scores.f1 == 1.0), || per.join(" "))?;
    ensure(report.overall.scores.f1 == 1.0, || format!("overall F1 {}", report.overall.scores.f1))?;
    ensure(secs < 1.0, || format!("took {secs:.3}s"))?;
    Ok(format!("{} overall=1.000, {:.1}ms", per.join(" "), secs * 1e3))
}

fn c7_kappa() -> Check {
    let a = [1, 1, 1, 1, 1, 0, 0, 0, 0, 0];
    let b = [1, 1, 1, 1, 0, 1, 0, 0, 0, 0];
    // p_o = 8/10; both raters 50/50, so p_e = 0.5
    let k = cohens_kappa(&a, &b).map_err(|e| e.to_string())?;
    ensure((k - 0.6).abs() <= 1e-9, || format!("kappa {k}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let codes: Vec<u8> = (0..rng.random_range(2..40)).map(|_| rng.random_range(0..4)).collect();
        let same = cohens_kappa(&codes, &codes).map_err(|e| e.to_string())?;
        ensure(same == 1.0, || format!("identical lists gave {same}"))?;
    }
    Ok(format!("hand case {k:.6}, identical lists exactly 1"))
}

fn c8_mnc() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let words = ["leak", "court", "agency", "privacy", "data", "law", "drone", "strike"];
    let tok = Tokenizer::without_stopwords();
    let mut worst = 0.0f64;
    for trial in 0..20 {
        let copies = rng.random_range(2..8);
        let text: Vec<&str> = (0..rng.random_range(3..15)).map(|_| words[rng.random_range(0..words.len())]).collect();
        let date = common::day("2013-06-06");
        let articles: Vec<Article> =
            (0..copies).map(|i| Article::new(format!("d{trial}-{i}"), date, text.join(" "))).collect();
        let corpus = Corpus::new(articles).map_err(|e| e.to_string())?;
        let r = corpus_mnc(&corpus, &tok, NgramOrders::UNIGRAMS).map_err(|e| e.to_string())?;
        worst = worst.max((r.mnc - 1.0).abs());
    }
    ensure(worst <= 1e-12, || format!("duplicated corpora off by {worst:e}"))?;
    let rows = [vec![1u32, 2, 3], vec![2, 4, 6], vec![3, 2, 1]];
    let tf = TfMatrix::from_dense(
        ["a", "b", "c"].iter().map(|w| NGram::unigram(*w)).collect(),
        vec!["x".into(), "y".into(), "z".into()],
        &rows,
    );
    let hand = mnc(&tf).map_err(|e| e.to_string())?.mnc;
    // oracle: mean of the three naive pairwise correlations
    let f: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&c| c as f64).collect()).collect();
    let oracle = (naive_pearson(&f[0], &f[1]) + naive_pearson(&f[0], &f[2]) + naive_pearson(&f[1], &f[2])) / 3.0;
    ensure((hand + 1.0 / 3.0).abs() <= 1e-12, || format!("hand case {hand}"))?;
    ensure((hand - oracle).abs() <= 1e-12, || format!("oracle {oracle} vs {hand}"))?;
    Ok(format!("duplicates max |MNC-1| = {worst:.1e}, hand case {hand:.12}"))
}

fn c9_svd() -> Check {
    let n = 50;
    let mut worst = 0.0f64;
    let mut runs = 0;
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v: f64 = rng.random_range(0.0..1.0);
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        let mut sv: Vec<f64> = DMatrix::from_row_slice(n, n, &a).svd(false, false).singular_values.iter().copied().collect();
        sv.sort_by(|x, y| y.total_cmp(x));
        for method in [SvdMethod::Auto, SvdMethod::Jacobi, SvdMethod::Subspace] {
            let mut previous = f64::INFINITY;
            for j in 1..=5 {
                let svd = truncated_svd(&a, n, n, j, method).map_err(|e| e.to_string())?;
                let err = euclid(&a, &svd.reconstruct());
                let oracle = sv[j..].iter().map(|s| s * s).sum::<f64>().sqrt();
                worst = worst.max((err - oracle).abs());
                ensure(err <= previous, || format!("seed {seed} {method:?}: error rose at j={j}"))?;
                previous = err;
                runs += 1;
            }
        }
    }
    ensure(worst <= 1e-8, || format!("max deviation {worst:e} > 1e-8"))?;
    Ok(format!("{runs} truncations, max |Δ| vs dense SVD = {worst:.1e}"))
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn c10_determinism() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = tmp.path();
    let p = |s: &str| root.join(s).display().to_string();

    let (t1, t2) = common::period_pair(3);
    common::write_corpus(&root.join("t1.jsonl"), &t1);
    common::write_corpus(&root.join("t2.jsonl"), &t2);
    common::write_corpus(&root.join("cycle.jsonl"), &common::yearly_corpus(4, &[(2011, 6), (2013, 5), (2014, 7)]));
    common::write_spike_series(&root.join("series"));
    std::fs::write(root.join("laws.csv"), common::laws_csv(&common::SPIKES)).map_err(|e| e.to_string())?;
    let u = common::universe(5, 400, 0.35, 0.4, 30);
    common::write_corpus(&root.join("universal.jsonl"), &u.corpus);
    common::write_seeds(&root.join("seeds.csv"), &u.seeds);

    let commands: Vec<(&str, Vec<String>)> = vec![
        ("framing", vec!["framing".into(), "--t1".into(), p("t1.jsonl"), "--t2".into(), p("t2.jsonl"), "--seed".into(), "11".into(), "--out".into(), p("out/framing")]),
        ("cycle", vec!["cycle".into(), "--corpus".into(), p("cycle.jsonl"), "--seed".into(), "11".into(), "--out".into(), p("out/cycle/cycle.csv")]),
        ("legislate loo", vec!["legislate".into(), "loo".into(), "--series-dir".into(), p("series"), "--laws".into(), p("laws.csv"), "--seed".into(), "11".into(), "--out".into(), p("out/loo")]),
        ("bootstrap", vec!["bootstrap".into(), "--seeds".into(), p("seeds.csv"), "--universal".into(), p("universal.jsonl"), "--seed".into(), "11".into(), "--out".into(), p("out/bootstrap")]),
    ];
    let mut runs = Vec::new();
    for _ in 0..2 {
        let mut stdout = Vec::new();
        for (name, args) in &commands {
            let args: Vec<&str> = args.iter().map(String::as_str).collect();
            let o = common::run(&args);
            ensure(o.status.success(), || format!("{name} failed: {}", common::stderr(&o)))?;
            stdout.push(o.stdout);
        }
        runs.push((snapshot(&root.join("out")), stdout));
    }
    let (first, second) = (&runs[0], &runs[1]);
    ensure(first.0.keys().eq(second.0.keys()), || "different file sets".into())?;
    for (name, bytes) in &first.0 {
        ensure(second.0[name] == *bytes, || format!("{name} differs between runs"))?;
    }
    ensure(first.1 == second.1, || "stdout summaries differ".into())?;
    Ok(format!("{} output files byte-identical across two runs", first.0.len()))
}

fn c11_bootstrap() -> Check {
    let u = common::universe(17, 1200, 0.35, 0.4, 50);
    let data = bootstrap_dataset(&u.seeds, &BTreeSet::new(), &u.corpus, &Tokenizer::default(), &BootstrapParams::default())
        .map_err(|e| e.to_string())?;
    let fin: BTreeSet<String> = data.positives.articles().iter().map(|a| a.id.clone()).collect();
    let stage1: BTreeSet<String> = data.provenance.stage1_positive_ids.iter().cloned().collect();
    let (p, r) = common::precision_recall(&fin, &u.members);
    let (p1, r1) = common::precision_recall(&stage1, &u.members);
    ensure(p >= 0.95, || format!("precision {p:.4}"))?;
    ensure(r >= 0.95, || format!("recall {r:.4}"))?;
    ensure(p >= p1, || format!("final precision {p:.4} < stage-1 {p1:.4}"))?;
    Ok(format!("precision {p:.4} recall {r:.4} (stage 1: {p1:.4}/{r1:.4})"))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("information gain matches entropy oracle", c1_information_gain),
        ("WMD equals exhaustive matching", c2_wmd),
        ("reported threshold decisions", c3_threshold),
        ("EM threshold recovery, 20 seeds", c4_em),
        ("conditional rows normalize", c5_conditional_rows),
        ("synthetic leave-one-out", c6_synthetic_loo),
        ("Cohen's kappa", c7_kappa),
        ("MNC properties", c8_mnc),
        ("truncated SVD error", c9_svd),
        ("end-to-end determinism", c10_determinism),
        ("bootstrap fidelity", c11_bootstrap),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2}: {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
