//! Acceptance suite. Run with `cargo test -p geollm-core --test acceptance`.
//!
//! Every criterion prints one `[PASS]` or `[FAIL]` line with its wall time;
//! the process exits non-zero if any criterion fails or overruns its limit.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use geollm::adapter::{
    synthetic_addresses, synthetic_snapshot, BoundingBox, Knowledge, MockOracle, NoiseModel, PredictionSet, Predictor,
    SyntheticWorld,
};
use geollm::baseline::{knn_predict, GbtConfig, GbtModel, LabeledPoint};
use geollm::dataset::{
    check_overlap, export_corpus, jitter_coordinates, label_plan, make_splits, read_corpus, importance_sample_indices,
    ClusterKind, CorpusFormat, CorpusRecord, DatasetError, JitterRadii, Sample, SourceKind, SplitTag, TaskDataset,
};
use geollm::eval::{evaluate, mae, pearson_r2};
use geollm::geo::{classify_direction, haversine_km, initial_bearing_deg, GeoPoint, EARTH_RADIUS_KM};
use geollm::label::{BinLabel, BinningHint, LabelBinner};
use geollm::mapdata::{nearest_places, AddressBook, AddressProvider, KvCache, PlaceSnapshot, DEFAULT_LIMIT, DEFAULT_RADIUS_KM};
use geollm::pipeline::{build_contexts, render_contexts};
use geollm::prompt::{render_prompt, Ablation, ParsedPrompt, PromptComponents, PromptInputs};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

const GEODESY_REL_TOL: f64 = 1e-6;
const METRIC_TOL: f64 = 1e-12;
const AFFINE_TOL: f64 = 1e-10;
const GBT_MIN_R2: f64 = 0.9;
const IMPORTANCE_TARGET: f64 = 0.9;
const IMPORTANCE_TOL: f64 = 0.01;
const KS_TOL: f64 = 0.02;
const RURAL_RADIUS_KM: f64 = 10.0;
const DISPLACEMENT_SLACK_KM: f64 = 1e-9;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn pt(lat: f64, lon: f64) -> GeoPoint {
    GeoPoint::new(lat, lon).expect("valid point")
}

// 1
fn golden_prompts() -> Outcome {
    let snapshot = PlaceSnapshot::load(fixture("places.jsonl")).map_err(|e| e.to_string())?;
    let book = AddressBook::load(fixture("addresses.jsonl")).map_err(|e| e.to_string())?;
    let cases = [
        ("manhattan_prompt.txt", 40.76208, -73.98042, "Population Density"),
        ("manchok_prompt.txt", 9.63708, 8.48625, "Asset Wealth"),
    ];
    let mut bytes = 0;
    for (file, lat, lon, task) in cases {
        let point = pt(lat, lon);
        let inputs = PromptInputs {
            id: file.into(),
            point,
            address: Some(book.reverse(point).map_err(|e| e.to_string())?),
            nearby: Some(nearest_places(point, &snapshot, DEFAULT_LIMIT, DEFAULT_RADIUS_KM)),
            task_name: task.into(),
        };
        let want = std::fs::read(fixture(file)).map_err(|e| e.to_string())?;
        let got = render_prompt(&inputs, PromptComponents::ALL).map_err(|e| e.to_string())?;
        ensure(got.text.as_bytes() == want.as_slice(), format!("{file} differs"))?;
        bytes += want.len();
    }
    Ok(format!("2 prompts, {bytes} bytes identical"))
}

// 2
fn quantile_binning() -> Outcome {
    let n = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let exp = Exp::new(1.0).unwrap();
    let values: Vec<f64> = (0..n).map(|_| exp.sample(&mut rng)).collect();
    let (binner, labels) = LabelBinner::fit_with_labels(&values, BinningHint::Quantile).map_err(|e| e.to_string())?;

    let mut counts = [0usize; 100];
    for l in &labels {
        counts[l.index()] += 1;
    }
    ensure(counts.iter().all(|&c| c == 100), format!("occupancy {counts:?}"))?;

    // Rank oracle: the r-th smallest value belongs to bin floor(100 r / n).
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    for (rank, &i) in order.iter().enumerate() {
        let want = rank * 100 / n;
        let got = binner.encode(values[i]).index();
        ensure(got == want, format!("value {} encodes to {got}, rank says {want}", values[i]))?;
        ensure(labels[i].index() == want, "fit labels disagree with rank")?;
    }
    Ok("100 per bin; encode == rank on 10000 points".into())
}

fn xyz(lat: f64, lon: f64) -> [f64; 3] {
    let (la, lo) = (lat.to_radians(), lon.to_radians());
    [la.cos() * lo.cos(), la.cos() * lo.sin(), la.sin()]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Central angle from atan2(|a×b|, a·b), well conditioned at every separation.
fn vector_distance_km(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (u, v) = (xyz(a.0, a.1), xyz(b.0, b.1));
    let c = cross(u, v);
    EARTH_RADIUS_KM * dot(c, c).sqrt().atan2(dot(u, v))
}

/// Bearing from the local north/east frame at `a`.
fn vector_bearing_deg(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (la, lo) = (a.0.to_radians(), a.1.to_radians());
    let north = [-la.sin() * lo.cos(), -la.sin() * lo.sin(), la.cos()];
    let east = [-lo.sin(), lo.cos(), 0.0];
    let v = xyz(b.0, b.1);
    dot(v, east).atan2(dot(v, north)).to_degrees().rem_euclid(360.0)
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

// 3
fn geodesy_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_d: f64 = 0.0;
    let mut worst_b: f64 = 0.0;
    for _ in 0..10_000 {
        let a = (rng.random_range(-89.0..89.0), rng.random_range(-180.0..180.0));
        let b = (rng.random_range(-89.0..89.0), rng.random_range(-180.0..180.0));
        let (pa, pb) = (pt(a.0, a.1), pt(b.0, b.1));
        let d = haversine_km(pa, pb).exact_km();
        let want = vector_distance_km(a, b);
        let rel = (d - want).abs() / want;
        worst_d = worst_d.max(rel);
        ensure(rel <= GEODESY_REL_TOL, format!("distance {a:?}->{b:?}: {d} vs {want}"))?;

        let bearing = initial_bearing_deg(pa, pb).map_err(|e| e.to_string())?;
        let want = vector_bearing_deg(a, b);
        let rel = angle_gap(bearing, want) / want.max(1.0);
        worst_b = worst_b.max(rel);
        ensure(rel <= GEODESY_REL_TOL, format!("bearing {a:?}->{b:?}: {bearing} vs {want}"))?;
    }
    // Integer-degree table written out by sector.
    let table: [(u32, u32, &str); 9] = [
        (0, 22, "North"),
        (23, 67, "North-East"),
        (68, 112, "East"),
        (113, 157, "South-East"),
        (158, 202, "South"),
        (203, 247, "South-West"),
        (248, 292, "West"),
        (293, 337, "North-West"),
        (338, 359, "North"),
    ];
    let mut checked = 0;
    for (lo, hi, name) in table {
        for deg in lo..=hi {
            let got = classify_direction(f64::from(deg));
            ensure(got.as_str() == name, format!("{deg}° -> {got}, table says {name}"))?;
            checked += 1;
        }
    }
    ensure(checked == 360, "table does not cover 0..=359")?;
    Ok(format!("10000 pairs, worst rel err dist {worst_d:.1e} bearing {worst_b:.1e}; 360/360 directions"))
}

// 4
fn knn_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let train: Vec<LabeledPoint> = (0..5000)
        .map(|i| LabeledPoint {
            id: format!("t{i:04}"),
            point: pt(rng.random_range(-60.0..60.0), rng.random_range(-180.0..180.0)),
            label: BinLabel::from_tenths(rng.random_range(0..=99)).unwrap(),
        })
        .collect();
    let model = geollm::baseline::KnnRegressor::fit(train.clone(), 5).map_err(|e| e.to_string())?;
    for q in 0..500 {
        let query = pt(rng.random_range(-60.0..60.0), rng.random_range(-180.0..180.0));
        let mut dist: Vec<(f64, usize)> = train
            .iter()
            .enumerate()
            .map(|(i, t)| (vector_distance_km((query.lat(), query.lon()), (t.point.lat(), t.point.lon())), i))
            .collect();
        dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mean = dist[..5].iter().map(|&(_, i)| train[i].label.value()).sum::<f64>() / 5.0;
        let want = BinLabel::snap(mean);
        let got = model.predict(query);
        ensure(got == want, format!("query {q} {query}: got {got}, brute force {want}"))?;
        if q < 5 {
            ensure(knn_predict(&train, query, 5).map_err(|e| e.to_string())? == want, "knn_predict differs")?;
        }
    }
    Ok("500/500 queries match brute force".into())
}

// 5
fn gbt_sanity() -> Outcome {
    let surface = |x: f64, y: f64| {
        5.0 + 2.0 * (2.0 * std::f64::consts::PI * x).sin() + 1.5 * (std::f64::consts::PI * y).cos() + x * y
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut draw = |n: usize| -> (Vec<Vec<f64>>, Vec<f64>) {
        let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
        let y = rows.iter().map(|r| surface(r[0], r[1])).collect();
        (rows, y)
    };
    let (train_x, train_y) = draw(1000);
    let (test_x, test_y) = draw(1000);
    let (model, trace) =
        GbtModel::fit_with_trace(&train_x, &train_y, &GbtConfig::default()).map_err(|e| e.to_string())?;
    for (i, w) in trace.windows(2).enumerate() {
        ensure(w[1] <= w[0], format!("loss rose at round {}: {} -> {}", i + 1, w[0], w[1]))?;
    }
    let preds = test_x
        .iter()
        .map(|r| model.predict_raw(r))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let r2 = pearson_r2(&preds, &test_y).map_err(|e| e.to_string())?;
    ensure(r2 >= GBT_MIN_R2, format!("held-out r² {r2:.4} < {GBT_MIN_R2}"))?;
    Ok(format!(
        "held-out r² {r2:.4}; loss {:.4} -> {:.5} over {} rounds",
        trace[0],
        trace[trace.len() - 1],
        trace.len() - 1
    ))
}

// 6
fn metric_closed_forms() -> Outcome {
    // Hand-computed: Sxy = 6, Sxx = 10, Syy = 6 -> r² = 36/60.
    let cases: [(&[f64], &[f64], f64, f64); 3] = [
        (&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 4.0, 5.0, 4.0, 5.0], 0.6, 1.0),
        (&[0.0, 0.0, 1.0, 1.0], &[0.0, 1.0, 0.0, 1.0], 0.0, 0.5),
        (&[9.9, 0.0, 4.5], &[0.0, 9.9, 5.4], 1.0, 6.9),
    ];
    for (p, t, r2, m) in cases {
        let got_r2 = pearson_r2(p, t).map_err(|e| e.to_string())?;
        let got_mae = mae(p, t).map_err(|e| e.to_string())?;
        ensure((got_r2 - r2).abs() <= METRIC_TOL, format!("r² {got_r2} != {r2}"))?;
        ensure((got_mae - m).abs() <= METRIC_TOL, format!("mae {got_mae} != {m}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(3..60);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..9.9)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..9.9)).collect();
        let mut a: f64 = rng.random_range(0.1..10.0);
        if rng.random::<bool>() {
            a = -a;
        }
        let b: f64 = rng.random_range(-100.0..100.0);
        let base = pearson_r2(&x, &y).map_err(|e| e.to_string())?;
        let mapped: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let moved = pearson_r2(&mapped, &y).map_err(|e| e.to_string())?;
        worst = worst.max((base - moved).abs());
        ensure((base - moved).abs() <= AFFINE_TOL, format!("affine a={a} b={b}: {base} vs {moved}"))?;
    }
    Ok(format!("3 fixtures exact; 1000 affine maps, worst drift {worst:.1e}"))
}

// 7
fn importance_sampling() -> Outcome {
    let trials = 100_000u64;
    let weights = [9.0, 1.0];
    let mut heavy = 0u64;
    for seed in 0..trials {
        let pick = importance_sample_indices(&weights, 1, seed).map_err(|e| e.to_string())?;
        if pick[0] == 0 {
            heavy += 1;
        }
    }
    let freq = heavy as f64 / trials as f64;
    ensure(
        (freq - IMPORTANCE_TARGET).abs() <= IMPORTANCE_TOL,
        format!("heavy cell chosen {freq:.4}"),
    )?;
    Ok(format!("heavy cell chosen {freq:.4} over {trials} trials"))
}

fn world_dataset(n: usize, seed: u64) -> TaskDataset {
    SyntheticWorld::generate(seed, BoundingBox::default(), 12)
        .dataset(n, seed, "Population", 0.0)
        .expect("synthetic dataset")
}

// 8
fn split_safety() -> Outcome {
    let ds = world_dataset(15_000, 8);
    let sizes = [100, 1000, 10_000];
    let plan = make_splits(&ds, 42, 2000, 2000, &sizes).map_err(|e| e.to_string())?;
    ensure(plan.val.len() == 2000 && plan.test.len() == 2000, "eval sizes")?;
    ensure(plan.train_pool.len() == 11_000, "pool size")?;
    let test: BTreeSet<&String> = plan.test.iter().collect();
    let val: BTreeSet<&String> = plan.val.iter().collect();
    let pool: BTreeSet<&String> = plan.train_pool.iter().collect();
    ensure(test.is_disjoint(&val) && test.is_disjoint(&pool) && val.is_disjoint(&pool), "partitions overlap")?;
    ensure(test.len() + val.len() + pool.len() == ds.len(), "partitions do not cover the dataset")?;
    let mut previous: BTreeSet<&String> = BTreeSet::new();
    for size in sizes {
        let sub: BTreeSet<&String> = plan.subset(size).ok_or("missing subset")?.iter().collect();
        ensure(sub.len() == size, format!("subset {size} has {}", sub.len()))?;
        ensure(sub.is_subset(&pool), "subset leaves the pool")?;
        ensure(previous.is_subset(&sub), format!("subset {size} does not contain the previous one"))?;
        previous = sub;
    }
    ensure(make_splits(&ds, 42, 2000, 2000, &sizes).unwrap() == plan, "same seed, different plan")?;
    let mut reversed = ds.clone();
    reversed.samples.reverse();
    ensure(make_splits(&reversed, 42, 2000, 2000, &sizes).unwrap() == plan, "plan depends on input order")?;
    ensure(make_splits(&ds, 43, 2000, 2000, &sizes).unwrap() != plan, "seed ignored")?;

    // Adversarial duplicates: 200 samples copied under new ids.
    let mut samples = ds.samples.clone();
    for s in ds.samples.iter().take(200) {
        samples.push(Sample {
            id: format!("{}-dup", s.id),
            point: s.point,
            raw: s.raw,
        });
    }
    let dup = TaskDataset::new("Population", samples, SourceKind::ClusterTable).map_err(|e| e.to_string())?;
    let caught = match make_splits(&dup, 42, 2000, 2000, &sizes) {
        Err(DatasetError::OverlapDetected { ids }) => ids.len(),
        other => return Err(format!("duplicates not caught: {:?}", other.map(|_| ()))),
    };
    // A tampered plan is caught as well.
    let mut tampered = plan.clone();
    tampered.train_subsets.get_mut(&100).unwrap()[0] = plan.test[0].clone();
    ensure(
        matches!(check_overlap(&ds, &tampered), Err(DatasetError::OverlapDetected { .. })),
        "tampered plan accepted",
    )?;
    Ok(format!("2000/2000/11000, nested 100<1000<10000; duplicates flagged {caught} ids"))
}

struct MockWorld {
    world: SyntheticWorld,
    ds: TaskDataset,
    contexts: Vec<geollm::pipeline::SampleContext>,
}

fn mock_world(n: usize, seed: u64) -> MockWorld {
    let world = SyntheticWorld::generate(seed, BoundingBox::default(), 12);
    let ds = world.dataset(n, seed, "Population", 0.0).expect("synthetic dataset");
    let snapshot = synthetic_snapshot(&world.bbox, 400, seed);
    let book = synthetic_addresses(&ds, &snapshot);
    let contexts = build_contexts(&ds, &snapshot, &book, &KvCache::in_memory()).expect("contexts");
    MockWorld { world, ds, contexts }
}

// 9
fn ablation_ordering() -> Outcome {
    let mut lines = Vec::new();
    for seed in 1..=5u64 {
        let m = mock_world(1000, seed);
        let raw: Vec<f64> = m.ds.samples.iter().map(|s| s.raw).collect();
        let binner = LabelBinner::fit(&raw, BinningHint::Quantile).map_err(|e| e.to_string())?;
        let truths: BTreeMap<String, BinLabel> =
            m.ds.samples.iter().map(|s| (s.id.clone(), binner.encode(s.raw))).collect();
        let oracle = MockOracle::new(m.world.clone(), binner, Knowledge::CoordinatesOnly { sigma: 1.0 }, seed);
        let mut r2 = HashMap::new();
        for ablation in [Ablation::WholePrompt, Ablation::OnlyNearbyPlaces, Ablation::OnlyCoordinates] {
            let prompts = render_contexts(&m.contexts, "Population", ablation.components()).map_err(|e| e.to_string())?;
            let preds = oracle.predict(&prompts).map_err(|e| e.to_string())?;
            let report = evaluate(&preds, &truths, None).map_err(|e| e.to_string())?;
            r2.insert(ablation, report.r_squared.ok_or("undefined r²")?);
        }
        let (w, n, c) = (
            r2[&Ablation::WholePrompt],
            r2[&Ablation::OnlyNearbyPlaces],
            r2[&Ablation::OnlyCoordinates],
        );
        ensure(w > n && n > c, format!("seed {seed}: {w:.3} / {n:.3} / {c:.3}"))?;
        lines.push(format!("{w:.2}>{n:.2}>{c:.2}"));
    }
    Ok(format!("5/5 seeds: {}", lines.join(", ")))
}

// 10
fn corpus_round_trip() -> Outcome {
    let m = mock_world(1000, 10);
    let plan = make_splits(&m.ds, 10, 200, 200, &[100]).map_err(|e| e.to_string())?;
    let labels = label_plan(&m.ds, &plan, BinningHint::Quantile).map_err(|e| e.to_string())?;
    let oracle = MockOracle::new(
        m.world.clone(),
        labels.binner.clone(),
        Knowledge::Noisy(NoiseModel::Gaussian { sigma: 0.8 }),
        10,
    );
    let prompts = render_contexts(&m.contexts, "Population", PromptComponents::ALL).map_err(|e| e.to_string())?;
    let by_id: HashMap<String, _> = prompts.iter().map(|p| (p.id.clone(), p.clone())).collect();
    let test_prompts: Vec<_> = plan.test.iter().map(|id| by_id[id].clone()).collect();
    let truths: BTreeMap<String, BinLabel> =
        plan.test.iter().map(|id| (id.clone(), labels.labels[id])).collect();

    let mut in_memory = oracle.predict(&test_prompts).map_err(|e| e.to_string())?;
    in_memory.provenance = "round-trip".into();
    let expected = evaluate(&in_memory, &truths, Some(&labels.binner)).map_err(|e| e.to_string())?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus_path = dir.path().join("test.jsonl");
    let records = CorpusRecord::build(&plan.test, SplitTag::Test, &by_id, None).map_err(|e| e.to_string())?;
    export_corpus(&records, CorpusFormat::Completion, &corpus_path).map_err(|e| e.to_string())?;

    // The oracle only sees what the file gives it: id and prompt text.
    let reread = read_corpus(std::fs::File::open(&corpus_path).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure(reread == records, "corpus did not re-read identically")?;
    let mut answers = Vec::new();
    for r in &reread {
        let parsed = ParsedPrompt::parse(&r.prompt_text).map_err(|e| e.to_string())?;
        let point = m.ds.get(&r.id).ok_or("unknown id")?.point;
        let completion = oracle.complete(&r.id, point, parsed.components());
        answers.push(serde_json::json!({ "id": r.id, "completion": completion }).to_string());
    }
    let pred_path = dir.path().join("predictions.jsonl");
    let import = |lines: &[String]| -> Result<geollm::eval::EvalReport, String> {
        let mut f = std::fs::File::create(&pred_path).map_err(|e| e.to_string())?;
        for l in lines {
            writeln!(f, "{l}").map_err(|e| e.to_string())?;
        }
        drop(f);
        let set = PredictionSet::read_jsonl(
            std::fs::File::open(&pred_path).map_err(|e| e.to_string())?,
            &plan.test,
            "round-trip",
        )
        .map_err(|e| e.to_string())?;
        evaluate(&set, &truths, Some(&labels.binner)).map_err(|e| e.to_string())
    };
    let from_file = import(&answers)?;
    ensure(from_file == expected, format!("file path {from_file:?} != in-memory {expected:?}"))?;

    let victim = 17;
    let mut corrupted = answers.clone();
    let cut = corrupted[victim].len() - 4;
    corrupted[victim].truncate(cut);
    let damaged = import(&corrupted)?;
    ensure(
        damaged.n_unparseable == expected.n_unparseable + 1 && damaged.n_evaluated + 1 == expected.n_evaluated,
        format!("corruption accounted as {} unparseable / {} evaluated", damaged.n_unparseable, damaged.n_evaluated),
    )?;
    Ok(format!(
        "{} ids, r² {:.4} identical; corrupted line -> n_unparseable {}",
        expected.n_evaluated,
        expected.r_squared.unwrap_or(f64::NAN),
        damaged.n_unparseable
    ))
}

// 11
fn jitter_distribution() -> Outcome {
    let origin = pt(9.63708, 8.48625);
    let radii = JitterRadii::default();
    ensure(radii.rural_km == RURAL_RADIUS_KM, "rural radius default changed")?;
    let n = 10_000;
    let mut r: Vec<f64> = (0..n)
        .map(|i| {
            let moved = jitter_coordinates(origin, ClusterKind::Rural, &radii, 11, &format!("c{i}"));
            haversine_km(origin, moved).exact_km()
        })
        .collect();
    let max = r.iter().copied().fold(0.0, f64::max);
    ensure(max <= RURAL_RADIUS_KM + DISPLACEMENT_SLACK_KM, format!("max displacement {max} km"))?;
    r.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Uniform disc: P(R <= r) = (r / R)^2.
    let mut d: f64 = 0.0;
    for (i, &x) in r.iter().enumerate() {
        let f = (x / RURAL_RADIUS_KM).powi(2);
        d = d.max((f - i as f64 / n as f64).abs()).max(((i + 1) as f64 / n as f64 - f).abs());
    }
    ensure(d <= KS_TOL, format!("KS statistic {d:.4}"))?;
    Ok(format!("KS D = {d:.4}; max displacement {max:.6} km"))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 11] = [
        ("golden prompts", Duration::from_secs(1), golden_prompts),
        ("quantile binning uniformity", Duration::from_secs(5), quantile_binning),
        ("geodesy oracles", Duration::from_secs(5), geodesy_oracles),
        ("k-NN equivalence", Duration::from_secs(10), knn_equivalence),
        ("GBT sanity", Duration::from_secs(60), gbt_sanity),
        ("metric closed forms", Duration::from_secs(1), metric_closed_forms),
        ("importance sampling", Duration::from_secs(30), importance_sampling),
        ("split safety", Duration::from_secs(5), split_safety),
        ("mock ablation ordering", Duration::from_secs(120), ablation_ordering),
        ("corpus round-trip", Duration::from_secs(10), corpus_round_trip),
        ("jitter distribution", Duration::from_secs(10), jitter_distribution),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let took = start.elapsed();
        let result = match result {
            Ok(detail) if took > *limit => Err(format!("{detail} (over the {limit:?} limit)")),
            other => other,
        };
        match result {
            Ok(detail) => println!("[PASS] {:>2} {name} ({took:.2?}): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {:>2} {name} ({took:.2?}): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
