// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when a criterion fails that is not a recorded deviation.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufReader;
use std::path::Path;
use std::time::Instant;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use szz_core::cli::run_cli;
use szz_core::commitset::{aggregate, Dataset, SetId};
use szz_core::eval::{evaluate, FilteredReport, Metrics, PerspectiveId};
use szz_core::history::{load_history, write_fixture, CommitId, LoadOptions, RepositoryHistory, TimestampKind};
use szz_core::ingest::{adapt_commit_links, read_links_csv, AdaptOptions, RecordedProvider, ResolutionStatus};
use szz_core::linker::cv::partitions;
use szz_core::linker::{
    feature_rows, label_commits, make_input_filter, oracle_filter_bound, resample, roc_auc, train, CvKind, CvSpec,
    LabelScheme, ModelKind, SamplerKind, SamplerSpec, Scaler, TrainSpec, TrainingSet, FEATURE_NAMES,
};
use szz_core::pipeline::{aggregate_dataset, provenance};
use szz_core::variants::{run_variant, VariantConfig, VariantId};

// Pinned tolerances.
const PRECISION_TOL: f64 = 0.005;
const SCALE_TOL: f64 = 1e-9;
const SEGMENT_TOL: f64 = 1e-9;
const RANDOM_AUC_TOL: f64 = 0.05;
const ORACLE_SEEDS: u64 = 120;
const ORACLE_BUDGET_S: f64 = 30.0;
const ADAPT_BUDGET_S: f64 = 10.0;

struct Outcome {
    pass: bool,
    detail: String,
    /// Failure documented as not attainable from the reference numbers.
    recorded: bool,
}

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass: ok,
        detail: detail.into(),
        recorded: false,
    }
}

// (table, variation, identified, correct, printed precision)
const PRINTED: [(&str, &str, usize, usize, f64); 10] = [
    ("grid-a", "B-SZZ", 13_323, 2_582, 0.19),
    ("grid-a", "AG-SZZ", 7_964, 1_997, 0.25),
    ("grid-a", "L-SZZ", 4_975, 1_527, 0.31),
    ("grid-a", "R-SZZ", 5_008, 1_981, 0.40),
    ("grid-a", "X-SZZ", 13_420, 2_548, 0.19),
    ("grid-b", "B-SZZ", 1_310, 763, 0.58),
    ("grid-b", "AG-SZZ", 1_236, 620, 0.50),
    ("grid-b", "L-SZZ", 1_245, 470, 0.37),
    ("grid-b", "R-SZZ", 1_239, 626, 0.50),
    ("grid-b", "X-SZZ", 1_291, 754, 0.58),
];

// Cells whose printed precision disagrees with their own counts.
const KNOWN_PRINT_MISMATCHES: [(&str, &str); 2] = [("grid-b", "L-SZZ"), ("grid-b", "R-SZZ")];

fn metric_engine() -> Outcome {
    let mut off = Vec::new();
    for (table, name, identified, correct, printed) in PRINTED {
        let m = Metrics::from_counts(identified, correct, correct);
        // Independent oracle: plain division.
        assert_eq!(m.precision, correct as f64 / identified as f64);
        if (m.precision - printed).abs() > PRECISION_TOL {
            off.push((table, name, m.precision, printed));
        }
    }
    let detail = if off.is_empty() {
        format!("all {} cells within ±{PRECISION_TOL}", PRINTED.len())
    } else {
        let cells: Vec<String> = off
            .iter()
            .map(|(t, n, got, p)| format!("{t} {n} {got:.4} vs printed {p:.2}"))
            .collect();
        format!(
            "{}/{} cells within ±{PRECISION_TOL}; off: {}",
            PRINTED.len() - off.len(),
            PRINTED.len(),
            cells.join(", ")
        )
    };
    let only_known = off.iter().all(|(t, n, _, _)| KNOWN_PRINT_MISMATCHES.contains(&(t, n)));
    Outcome {
        pass: off.is_empty(),
        detail,
        recorded: only_known,
    }
}

fn blame_oracle() -> Outcome {
    let start = Instant::now();
    let (mut histories, mut commits_checked, mut mismatches) = (0, 0, 0);
    for seed in 0..ORACLE_SEEDS {
        let steps = random_steps(seed, SMALL);
        let commits = build_commits(&steps);
        let expected = last_writer_candidates(&commits);
        let history = RepositoryHistory::new(commits.clone()).unwrap();
        for c in &commits {
            let got = run_variant(&history, &c.id, VariantId::B, &VariantConfig::default()).unwrap();
            commits_checked += 1;
            mismatches += usize::from(got.candidates != expected[&c.id]);
        }
        histories += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        histories >= 100 && mismatches == 0 && secs < ORACLE_BUDGET_S,
        format!("{histories} histories, {commits_checked} fixing commits, {mismatches} mismatches, {secs:.2}s"),
    )
}

fn test_histories() -> Vec<RepositoryHistory> {
    let mut out: Vec<RepositoryHistory> = (0..ORACLE_SEEDS)
        .map(|s| build_history(&random_steps(s, SMALL)))
        .collect();
    for name in ["linear.json", "sets_example.json"] {
        out.push(load_history(&fixture(name), LoadOptions::default()).unwrap());
    }
    out
}

fn variant_algebra() -> Outcome {
    let config = VariantConfig::default();
    let (mut fixes, mut ghosts, mut violations) = (0, 0, Vec::new());
    for (hi, h) in test_histories().iter().enumerate() {
        for id in h.topological_order() {
            let run = |v| run_variant(h, id, v, &config).unwrap().candidates;
            let all: BTreeMap<VariantId, BTreeSet<CommitId>> = VariantId::ALL.iter().map(|&v| (v, run(v))).collect();
            fixes += 1;
            if all[&VariantId::X] != all[&VariantId::B] {
                violations.push(format!("h{hi} {id}: X(∅) ≠ B"));
            }
            for v in [VariantId::L, VariantId::R] {
                if all[&v].len() > 1 || !all[&v].is_subset(&all[&VariantId::AG]) {
                    violations.push(format!("h{hi} {id}: {v} ⊄ AG"));
                }
            }
            let commit = h.commit(id).unwrap();
            let add_only = commit
                .changes
                .iter()
                .all(|c| c.hunks.iter().all(|hk| hk.old_lines.is_empty()));
            if add_only {
                ghosts += 1;
                if all.values().any(|c| !c.is_empty()) {
                    violations.push(format!("h{hi} {id}: ghost fix has candidates"));
                }
            }
        }
    }
    check(
        violations.is_empty() && ghosts > 0,
        format!(
            "{fixes} fixing commits, {ghosts} ghost fixes, {} violations {:?}",
            violations.len(),
            violations.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn sets_example() -> Outcome {
    let history = load_history(&fixture("sets_example.json"), LoadOptions::default()).unwrap();
    let mut dataset = Dataset::read_jsonl(&fixture("sets_example_dataset.jsonl")).unwrap();
    dataset
        .extend_sets(BufReader::new(
            std::fs::File::open(fixture("sets_example_sets.jsonl")).unwrap(),
        ))
        .unwrap();
    let cs3 = dataset.index.get(&SetId::new("CS3")).unwrap();
    let agg = aggregate(
        &history,
        &dataset.index,
        cs3,
        VariantId::B,
        &VariantConfig::default(),
        None,
    )
    .unwrap();
    let blamed = run_variant(&history, &CommitId::new("c6"), VariantId::B, &VariantConfig::default()).unwrap();
    let want: BTreeSet<SetId> = [SetId::new("CS1"), SetId::new("CS2")].into();
    let want_commits: BTreeSet<CommitId> = ["c1", "c3", "c4"].map(CommitId::new).into();
    let names: Vec<&str> = agg.candidate_sets.iter().map(SetId::as_str).collect();
    check(
        agg.candidate_sets == want && blamed.candidates == want_commits,
        format!(
            "B on CS3 → {names:?}; c6 blames {:?}",
            blamed.candidates.iter().map(CommitId::as_str).collect::<Vec<_>>()
        ),
    )
}

fn adaptation_tally() -> Outcome {
    let start = Instant::now();
    let links = read_links_csv(&fixture("adapt_corpus/links.csv")).unwrap();
    let provider = RecordedProvider::load(&fixture("adapt_corpus/responses.json")).unwrap();
    let a = adapt_commit_links(&links, &provider, &AdaptOptions::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let t = &a.tally;
    let (repo, pr, fork) = (
        t.get(ResolutionStatus::MissingRepository),
        t.get(ResolutionStatus::MissingPullRequest),
        t.get(ResolutionStatus::ForkAmbiguous),
    );
    let survivors = a.dataset.links.len();
    let fixing: usize = a
        .dataset
        .links
        .iter()
        .map(|l| a.dataset.fixing_set(l).commits.len())
        .sum();
    let inducing: usize = a
        .dataset
        .links
        .iter()
        .flat_map(|l| &l.inducing_sets)
        .map(|s| a.dataset.index.get(s).unwrap().commits.len())
        .sum();
    check(
        (repo, pr, fork, survivors) == (100, 1_680, 5, 145) && (fixing, inducing) == (827, 1_315) && secs < ADAPT_BUDGET_S,
        format!("{} links → discarded {repo}/{pr}/{fork}, {survivors} survive ({fixing} fixing, {inducing} inducing commits), {secs:.2}s", links.len()),
    )
}

fn oracle_bound() -> Outcome {
    let config = VariantConfig::default();
    let mut problems = Vec::new();
    let (mut links, mut lr_cells, mut empty_cells) = (0, 0, 0);
    for seed in 0..8 {
        let (history, dataset) = synthetic_benchmark(seed, BENCH);
        links += dataset.links.len();
        let prov = provenance(&history, &dataset, &VariantId::ALL, &config).unwrap();
        let bound = oracle_filter_bound(&dataset, &prov, PerspectiveId::P1AllSets).unwrap();
        for (v, f) in &bound {
            let plain = evaluate(&dataset, &prov[v], PerspectiveId::P1AllSets, None).unwrap();
            if f.ground_truth.recall > plain.recall {
                problems.push(format!("seed {seed} {v}: recall rose"));
            }
            // With nothing identified precision is undefined; those cells are counted apart.
            if matches!(v, VariantId::L | VariantId::R) && f.ground_truth.identified == 0 {
                empty_cells += 1;
            } else if matches!(v, VariantId::L | VariantId::R) {
                lr_cells += 1;
                if f.ground_truth.precision != 1.0 {
                    problems.push(format!("seed {seed} {v}: precision {}", f.ground_truth.precision));
                }
            }
        }
    }
    check(
        problems.is_empty() && lr_cells > 0,
        format!("8 benchmarks, {links} links; L/R precision 1.0 in {lr_cells} cells ({empty_cells} with nothing identified); {} problems {:?}", problems.len(), problems),
    )
}

fn point_segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let ap: Vec<f64> = a.iter().zip(p).map(|(x, y)| y - x).collect();
    let len2: f64 = ab.iter().map(|x| x * x).sum();
    let t = if len2 == 0.0 {
        0.0
    } else {
        (ap.iter().zip(&ab).map(|(x, y)| x * y).sum::<f64>() / len2).clamp(0.0, 1.0)
    };
    a.iter()
        .zip(&ab)
        .zip(p)
        .map(|((x, d), q)| (x + t * d - q).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn classifier_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let x: Vec<Vec<f64>> = (0..90)
        .map(|_| (0..8).map(|j| rng.gen_range(0.0..10.0) * (j + 1) as f64).collect())
        .collect();
    let y: Vec<bool> = (0..90).map(|i| i % 4 == 0).collect();
    let mut notes = Vec::new();
    let mut ok = true;

    // Scaling: unit sample variance on training data.
    let scaled = Scaler::fit(&x).transform(&x);
    let worst = (0..8)
        .map(|j| {
            let col: Vec<f64> = scaled.iter().map(|r| r[j]).collect();
            let m = col.iter().sum::<f64>() / col.len() as f64;
            let var = col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (col.len() - 1) as f64;
            (var - 1.0).abs()
        })
        .fold(0.0, f64::max);
    ok &= worst <= SCALE_TOL;
    notes.push(format!("scale |var-1| {worst:.1e}"));

    // Resampling balances exactly; SMOTE stays on neighbour segments.
    let minority: Vec<usize> = (0..90).filter(|&i| y[i]).collect();
    for kind in [SamplerKind::RandomOver, SamplerKind::RandomUnder, SamplerKind::Smote] {
        let (xs, ys) = resample(&scaled, &y, &SamplerSpec::new(kind, 7)).unwrap();
        let good = ys.iter().filter(|g| **g).count();
        ok &= 2 * good == ys.len();
        if kind == SamplerKind::Smote {
            let k = 5;
            let mut dev = 0.0f64;
            for p in &xs[scaled.len()..] {
                let best = minority
                    .iter()
                    .flat_map(|&i| {
                        let mut nn: Vec<usize> = minority.iter().copied().filter(|&j| j != i).collect();
                        nn.sort_by(|&a, &b| {
                            let d = |q: usize| {
                                scaled[i]
                                    .iter()
                                    .zip(&scaled[q])
                                    .map(|(u, v)| (u - v).powi(2))
                                    .sum::<f64>()
                            };
                            d(a).total_cmp(&d(b)).then(a.cmp(&b))
                        });
                        nn.truncate(k);
                        nn.into_iter().map(move |j| (i, j))
                    })
                    .map(|(i, j)| point_segment_distance(p, &scaled[i], &scaled[j]))
                    .fold(f64::INFINITY, f64::min);
                dev = dev.max(best);
            }
            ok &= dev <= SEGMENT_TOL;
            notes.push(format!("smote segment dev {dev:.1e}"));
        }
    }
    notes.push("balance exact".into());

    // Folds partition the rows.
    for kind in [CvKind::KFold, CvKind::RepeatedKFold] {
        let cv = CvSpec {
            kind,
            splits: 5,
            repeats: 2,
            seed: 3,
        };
        let parts = partitions(90, &cv).unwrap();
        for round in parts.chunks(5) {
            let mut seen: Vec<usize> = round.iter().flat_map(|p| p.test.clone()).collect();
            seen.sort_unstable();
            ok &= seen == (0..90).collect::<Vec<_>>();
            for p in round {
                ok &= p.train.len() + p.test.len() == 90 && p.train.iter().all(|i| !p.test.contains(i));
            }
        }
    }
    notes.push("folds partition".into());

    // AUC.
    let sep_scores: Vec<f64> = (0..50)
        .map(|i| if i < 25 { i as f64 } else { 100.0 + i as f64 })
        .collect();
    let sep_labels: Vec<bool> = (0..50).map(|i| i >= 25).collect();
    let auc_sep = roc_auc(&sep_scores, &sep_labels).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(99);
    let rnd_scores: Vec<f64> = (0..20_000).map(|_| r.gen()).collect();
    let rnd_labels: Vec<bool> = (0..20_000).map(|_| r.gen_bool(0.3)).collect();
    let auc_rnd = roc_auc(&rnd_scores, &rnd_labels).unwrap();
    ok &= auc_sep == 1.0 && (auc_rnd - 0.5).abs() <= RANDOM_AUC_TOL;
    notes.push(format!("AUC separable {auc_sep}, random {auc_rnd:.3}"));

    // Same-seed retraining is bit-identical for every model.
    for kind in ModelKind::ALL {
        let mut spec = TrainSpec::new(kind, 11);
        spec.sampler = SamplerSpec::new(SamplerKind::Smote, 11);
        spec.cost_sensitive = true;
        let a = serde_json::to_string(&train(&x, &y, &spec, &FEATURE_NAMES).unwrap()).unwrap();
        let b = serde_json::to_string(&train(&x, &y, &spec, &FEATURE_NAMES).unwrap()).unwrap();
        ok &= a == b;
    }
    notes.push("retrain bit-identical (6 models)".into());
    check(ok, notes.join("; "))
}

fn filtered_monotonicity() -> Outcome {
    let config = VariantConfig::default();
    let mut problems = Vec::new();
    let mut checks = 0;
    for seed in 20..26 {
        let (history, dataset) = synthetic_benchmark(seed, BENCH);
        let prov = provenance(&history, &dataset, &VariantId::ALL, &config).unwrap();
        let bound = oracle_filter_bound(&dataset, &prov, PerspectiveId::P1AllSets).unwrap();

        // A trained model as well, for the Identified bound.
        let labels = label_commits(&dataset, &prov, LabelScheme::AllVariants).unwrap();
        let set = TrainingSet::new(
            &feature_rows(&history, &dataset, TimestampKind::Committer).unwrap(),
            &labels,
        );
        let trained = (set.y.iter().any(|g| *g) && set.y.iter().any(|g| !*g)).then(|| {
            make_input_filter(
                train(
                    &set.x,
                    &set.y,
                    &TrainSpec::new(ModelKind::RandomForest, seed),
                    &FEATURE_NAMES,
                )
                .unwrap(),
            )
        });

        for v in VariantId::ALL {
            let plain = evaluate(&dataset, &prov[&v], PerspectiveId::P1AllSets, None).unwrap();
            let f = &bound[&v];
            checks += 1;
            if f.ground_truth.identified > plain.identified || f.ground_truth.precision < plain.precision {
                problems.push(format!("seed {seed} {v}: oracle filter not monotone"));
            }
            if let Some(filter) = &trained {
                let out = aggregate_dataset(&history, &dataset, v, &config, Some(filter)).unwrap();
                let tf = FilteredReport::new(evaluate(&dataset, &out, PerspectiveId::P1AllSets, None).unwrap());
                if tf.ground_truth.identified > plain.identified {
                    problems.push(format!("seed {seed} {v}: trained filter raised Identified"));
                }
                accounting(&tf, &plain, &mut problems);
            }
            accounting(f, &plain, &mut problems);
        }
    }
    check(
        problems.is_empty(),
        format!("{checks} variant runs; {} problems {:?}", problems.len(), problems),
    )
}

fn accounting(f: &FilteredReport, plain: &szz_core::eval::EvalReport, problems: &mut Vec<String>) {
    let discarded = f.ground_truth.per_link.iter().filter(|s| s.discarded).count();
    let ok = f.discarded_sets == discarded
        && f.without_bad_linkers.n_links + f.discarded_sets == plain.n_links
        && f.without_bad_linkers.identified == f.ground_truth.identified
        && f.without_bad_linkers.correct == f.ground_truth.correct
        && f.without_bad_linkers.relevant <= f.ground_truth.relevant;
    if !ok {
        problems.push(format!("{}: discarded accounting", f.variant));
    }
}

fn cli(args: &[&str]) -> i32 {
    let mut argv = vec!["szz"];
    argv.extend_from_slice(args);
    run_cli(argv, &mut std::io::sink(), &mut std::io::sink())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let steps = random_steps(31, BENCH);
    let (_, dataset) = synthetic_benchmark(31, BENCH);
    let h = dir.path().join("h.json");
    write_fixture(&h, &build_commits(&steps)).unwrap();
    let d = dir.path().join("d.jsonl");
    dataset.write_jsonl(std::fs::File::create(&d).unwrap()).unwrap();
    let s = |p: &Path| p.to_str().unwrap().to_owned();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let codes: Vec<i32> = [(&a, "1"), (&b, "0")]
        .iter()
        .map(|(out, threads)| {
            cli(&[
                "run",
                &s(&h),
                &s(&d),
                "--out",
                &s(out),
                "--parallelism",
                threads,
                "--seed",
                "5",
            ])
        })
        .collect();
    let mut same = 0;
    for v in VariantId::ALL {
        let name = format!("report_{v}.json");
        if std::fs::read(a.join(&name)).ok() == std::fs::read(b.join(&name)).ok() && a.join(&name).exists() {
            same += 1;
        }
    }
    check(
        codes == [0, 0] && same == 5,
        format!("{same}/5 report files byte-identical across two runs"),
    )
}

fn main() {
    type Criterion = (&'static str, &'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("AC-1", "metric engine vs printed precision", metric_engine),
        ("AC-2", "blame oracle equivalence", blame_oracle),
        ("AC-3", "variant algebra", variant_algebra),
        ("AC-4", "commit-set aggregation example", sets_example),
        ("AC-5", "adaptation tally", adaptation_tally),
        ("AC-6", "oracle upper bound", oracle_bound),
        ("AC-7", "classifier pipeline properties", classifier_properties),
        ("AC-8", "filtered-run monotonicity", filtered_monotonicity),
        ("AC-9", "run determinism", determinism),
    ];
    let mut unexpected = 0;
    for (id, name, f) in criteria {
        let o = f();
        let status = match (o.pass, o.recorded) {
            (true, _) => "PASS",
            (false, true) => "FAIL (recorded deviation)",
            (false, false) => "FAIL",
        };
        println!("{id} {status} {name}: {}", o.detail);
        unexpected += usize::from(!o.pass && !o.recorded);
    }
    if unexpected > 0 {
        eprintln!("{unexpected} acceptance criteria failed");
        std::process::exit(1);
    }
}
