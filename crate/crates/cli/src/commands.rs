use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use geollm::adapter::{
    synthetic_addresses, synthetic_snapshot, BaselineAdapter, BoundingBox, Knowledge, MockOracle, NoiseModel,
    PredictionSet, Predictor, SyntheticWorld,
};
use geollm::baseline::{gbt_fit, EmbeddingProvider, GbtConfig, HashingEmbedder, KnnRegressor, LabeledPoint};
use geollm::dataset::{
    label_plan, make_splits, read_corpus, sample_raster_dataset, write_corpus, CorpusFormat, CorpusRecord, Outcome,
    PlanLabels, SourceKind, SplitPlan, SplitTag, TaskDataset,
};
use geollm::eval::{emit_error_map, evaluate, results_table, ErrorMapRow, EvalReport, ResultCell};
use geollm::label::{BinLabel, GridRaster};
use geollm::mapdata::{
    fetch_overpass_places, AddressBook, AddressProvider, ClientConfig, KvCache, NominatimClient, OverpassClient,
    PlaceFilter, PlaceRecord, PlaceSnapshot, Provenance, DEFAULT_NOMINATIM_URL, DEFAULT_OVERPASS_URL,
    NOMINATIM_URL_ENV, OVERPASS_URL_ENV,
};
use geollm::pipeline::{build_contexts, features_for, read_contexts, render_contexts, write_contexts, SampleContext};
use geollm::prompt::{Ablation, FewShotAssembler, LabeledPrompt, ParsedPrompt, PromptComponents, PromptRecord};

use crate::config::{ConfigError, RunConfig};
use crate::run::RunDir;

fn jsonl<T: serde::Serialize>(items: &[T]) -> String {
    let mut s = String::new();
    for it in items {
        s.push_str(&serde_json::to_string(it).expect("record serializes"));
        s.push('\n');
    }
    s
}

fn need(path: &Path, stage: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(ConfigError(format!("{} is missing; run `geollm {stage}` first", path.display())).into())
    }
}

fn load_dataset(run: &RunDir, cfg: &RunConfig) -> Result<TaskDataset> {
    need(&run.dataset(), "ingest")?;
    Ok(TaskDataset::load_csv(&run.dataset(), &cfg.task.name, cfg.task.source_kind)?)
}

fn load_plan(run: &RunDir) -> Result<SplitPlan> {
    need(&run.splits(), "split")?;
    Ok(SplitPlan::from_json(&std::fs::read_to_string(run.splits())?)?)
}

fn load_labels(run: &RunDir) -> Result<PlanLabels> {
    need(&run.labels(), "split")?;
    let text = std::fs::read_to_string(run.labels())?;
    serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", run.labels().display())).into())
}

fn load_contexts(run: &RunDir) -> Result<Vec<SampleContext>> {
    need(&run.contexts(), "prompts")?;
    Ok(read_contexts(File::open(run.contexts())?)?)
}

fn load_world(run: &RunDir) -> Result<SyntheticWorld> {
    need(&run.world(), "synth")?;
    let text = std::fs::read_to_string(run.world())?;
    serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", run.world().display())).into())
}

fn training_ids<'a>(plan: &'a SplitPlan, cfg: &RunConfig) -> Result<&'a [String]> {
    plan.subset(cfg.splits.size).ok_or_else(|| {
        ConfigError(format!(
            "splits.json has no training subset of size {} (have {:?})",
            cfg.splits.size,
            plan.train_subsets.keys().collect::<Vec<_>>()
        ))
        .into()
    })
}

fn split_ids(plan: &SplitPlan, split: SplitTag) -> &[String] {
    match split {
        SplitTag::Train => &plan.train_pool,
        SplitTag::Val => &plan.val,
        SplitTag::Test => &plan.test,
    }
}

fn truths_for(labels: &PlanLabels, ids: &[String]) -> Result<BTreeMap<String, BinLabel>> {
    ids.iter()
        .map(|id| {
            labels
                .labels
                .get(id)
                .map(|l| (id.clone(), *l))
                .ok_or_else(|| anyhow!("no label for {id}"))
        })
        .collect()
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "predictions".into())
}

fn client_config(cfg: &RunConfig, url: &Option<String>, env: &str, default: &str) -> ClientConfig {
    let mut c = match url {
        Some(u) => ClientConfig::new(u.clone()),
        None => ClientConfig::from_env(env, default),
    };
    c.min_interval = Duration::from_millis(cfg.map.min_interval_ms);
    c.max_retries = cfg.map.max_retries;
    c
}

pub fn synth(run: &RunDir, cfg: &mut RunConfig, n: usize, bumps: usize, places: usize, noise_sd: f64) -> Result<()> {
    let world = SyntheticWorld::generate(cfg.seed, BoundingBox::default(), bumps);
    let ds = world.dataset(n, cfg.seed, &cfg.task.name, noise_sd)?;
    let snapshot = synthetic_snapshot(&world.bbox, places, cfg.seed);
    let book = synthetic_addresses(&ds, &snapshot);

    let mut world_json = serde_json::to_string_pretty(&world)?;
    world_json.push('\n');
    run.write(&run.world(), &world_json)?;
    let mut csv = Vec::new();
    ds.write_csv(&mut csv)?;
    let source = run.path("synth/dataset.csv");
    run.write(&source, &String::from_utf8(csv)?)?;
    let mut buf = Vec::new();
    snapshot.write_to(&mut buf)?;
    let places_path = run.path("synth/places.jsonl");
    run.write(&places_path, &String::from_utf8(buf)?)?;
    let mut buf = Vec::new();
    book.write_to(&mut buf)?;
    let book_path = run.path("synth/addresses.jsonl");
    run.write(&book_path, &String::from_utf8(buf)?)?;

    cfg.task.source = Some(source);
    cfg.task.source_kind = SourceKind::ClusterTable;
    cfg.map.snapshot = Some(places_path);
    cfg.map.addresses = Some(book_path);
    println!("synthetic world: {n} samples, {} places, {bumps} bumps", snapshot.len());
    Ok(())
}

pub fn ingest(run: &RunDir, cfg: &mut RunConfig, source: Option<PathBuf>, kind: Option<SourceKind>) -> Result<()> {
    if let Some(s) = source {
        cfg.task.source = Some(s);
    }
    if let Some(k) = kind {
        cfg.task.source_kind = k;
    }
    let src = cfg
        .task
        .source
        .clone()
        .ok_or_else(|| ConfigError("no source: pass --source or set task.source".into()))?;
    match cfg.task.source_kind {
        SourceKind::Raster => {
            let grid = GridRaster::load_ascii(&src)?;
            run.write(&run.raster(), &grid.to_ascii())?;
            if let Some(v) = &cfg.task.value_raster {
                run.write(&run.value_raster(), &GridRaster::load_ascii(v)?.to_ascii())?;
            }
            println!("raster: {} x {} cells", grid.nrows(), grid.ncols());
            return Ok(());
        }
        SourceKind::ClusterTable => {
            let ds = TaskDataset::load_csv(&src, &cfg.task.name, SourceKind::ClusterTable)?;
            write_dataset(run, &ds)
        }
        SourceKind::ZipCentroid => {
            let file = File::open(&src).with_context(|| format!("opening {}", src.display()))?;
            let ds = TaskDataset::from_zip_jsonl(file, &cfg.task.name)?;
            write_dataset(run, &ds)
        }
    }
}

fn write_dataset(run: &RunDir, ds: &TaskDataset) -> Result<()> {
    let (deduped, dropped) = ds.dedup_coordinates();
    if dropped > 0 {
        log::warn!("dropped {dropped} samples with duplicate coordinates");
    }
    let mut buf = Vec::new();
    deduped.write_csv(&mut buf)?;
    run.write(&run.dataset(), &String::from_utf8(buf)?)?;
    println!("dataset: {} samples ({dropped} duplicates dropped)", deduped.len());
    Ok(())
}

pub fn sample(run: &RunDir, cfg: &mut RunConfig, n: Option<usize>) -> Result<()> {
    need(&run.raster(), "ingest")?;
    let weights = GridRaster::load_ascii(&run.raster())?;
    let values = if run.value_raster().exists() {
        GridRaster::load_ascii(&run.value_raster())?
    } else {
        weights.clone()
    };
    let n = n.unwrap_or_else(|| {
        cfg.splits.val + cfg.splits.test + cfg.splits.subsets.iter().copied().max().unwrap_or(0)
    });
    let ds = sample_raster_dataset(&weights, &values, n, cfg.seed, &cfg.task.name)?;
    cfg.task.source_kind = SourceKind::Raster;
    write_dataset(run, &ds)
}

pub fn split(run: &RunDir, cfg: &RunConfig) -> Result<()> {
    let ds = load_dataset(run, cfg)?;
    let plan = make_splits(&ds, cfg.seed, cfg.splits.val, cfg.splits.test, &cfg.splits.subsets)?;
    let labels = label_plan(&ds, &plan, cfg.task.binning)?;
    run.write(&run.splits(), &plan.to_json())?;
    let mut text = serde_json::to_string_pretty(&labels)?;
    text.push('\n');
    run.write(&run.labels(), &text)?;
    println!(
        "splits: train pool {}, val {}, test {}; subsets {:?}",
        plan.train_pool.len(),
        plan.val.len(),
        plan.test.len(),
        plan.train_subsets.keys().collect::<Vec<_>>()
    );
    Ok(())
}

pub fn fetch_places(run: &RunDir, cfg: &mut RunConfig) -> Result<()> {
    let ds = load_dataset(run, cfg)?;
    let client = OverpassClient::new(
        client_config(cfg, &cfg.map.overpass_url, OVERPASS_URL_ENV, DEFAULT_OVERPASS_URL),
        PlaceFilter::default(),
    );
    let cache = KvCache::open(run.path("cache/overpass.jsonl"))?;
    let mut seen = BTreeSet::new();
    let mut places: Vec<PlaceRecord> = Vec::new();
    for s in &ds.samples {
        for p in fetch_overpass_places(s.point, &client, cfg.map.overpass_radius_km, &cache)? {
            if seen.insert((p.name().to_string(), p.point().key5())) {
                places.push(p);
            }
        }
    }
    let snapshot = PlaceSnapshot::new(
        places,
        Provenance {
            source: format!("overpass radius={} km", cfg.map.overpass_radius_km),
            retrieved_at: None,
        },
    );
    let path = run.path("places.jsonl");
    let mut buf = Vec::new();
    snapshot.write_to(&mut buf)?;
    run.write(&path, &String::from_utf8(buf)?)?;
    cfg.map.snapshot = Some(path);
    println!("snapshot: {} places", snapshot.len());
    Ok(())
}

pub fn prompts(run: &RunDir, cfg: &RunConfig) -> Result<()> {
    let ds = load_dataset(run, cfg)?;
    let snap_path = cfg
        .map
        .snapshot
        .as_ref()
        .ok_or_else(|| ConfigError("no place snapshot: pass --snapshot or run fetch-places".into()))?;
    let snapshot = PlaceSnapshot::load(snap_path)?;
    let contexts = match &cfg.map.addresses {
        Some(book) => build_contexts(&ds, &snapshot, &AddressBook::load(book)?, &KvCache::in_memory())?,
        None => {
            let client = NominatimClient::new(client_config(
                cfg,
                &cfg.map.nominatim_url,
                NOMINATIM_URL_ENV,
                DEFAULT_NOMINATIM_URL,
            ));
            let cache = KvCache::open(run.path("cache/nominatim.jsonl"))?;
            build_contexts(&ds, &snapshot, &client as &dyn AddressProvider, &cache)?
        }
    };
    let mut buf = Vec::new();
    write_contexts(&contexts, &mut buf)?;
    run.write(&run.contexts(), &String::from_utf8(buf)?)?;
    let records = render_contexts(&contexts, &cfg.task.name, PromptComponents::ALL)?;
    run.write(&run.prompts(), &jsonl(&records))?;
    let missing = contexts.iter().filter(|c| c.address.is_none()).count();
    println!("prompts: {} rendered ({missing} without an address)", records.len());
    Ok(())
}

fn prompts_by_id(run: &RunDir, cfg: &RunConfig, ablation: Ablation) -> Result<HashMap<String, PromptRecord>> {
    let contexts = load_contexts(run)?;
    Ok(render_contexts(&contexts, &cfg.task.name, ablation.components())?
        .into_iter()
        .map(|p| (p.id.clone(), p))
        .collect())
}

fn corpus_text(records: &[CorpusRecord], format: CorpusFormat) -> Result<String> {
    let mut buf = Vec::new();
    write_corpus(records, format, &mut buf)?;
    Ok(String::from_utf8(buf)?)
}

pub fn export_finetune(run: &RunDir, cfg: &RunConfig, format: CorpusFormat, ablation: Ablation) -> Result<()> {
    let plan = load_plan(run)?;
    let labels = load_labels(run)?;
    let prompts = prompts_by_id(run, cfg, ablation)?;
    let train = training_ids(&plan, cfg)?;
    let dir = format!("corpus/{}", ablation.slug());
    let parts: [(String, &[String], SplitTag, bool); 3] = [
        (format!("train-{}.jsonl", cfg.splits.size), train, SplitTag::Train, true),
        ("val.jsonl".into(), &plan.val, SplitTag::Val, true),
        ("test.jsonl".into(), &plan.test, SplitTag::Test, false),
    ];
    for (name, ids, tag, labelled) in parts {
        let records = CorpusRecord::build(ids, tag, &prompts, labelled.then_some(&labels.labels))?;
        let path = run.path(&format!("{dir}/{name}"));
        run.write(&path, &corpus_text(&records, format)?)?;
        println!("{}: {} records", run.rel(&path), records.len());
    }
    Ok(())
}

pub fn export_fewshot(run: &RunDir, cfg: &RunConfig, k: usize, test_size: usize, ablation: Ablation) -> Result<()> {
    let plan = load_plan(run)?;
    let labels = load_labels(run)?;
    let prompts = prompts_by_id(run, cfg, ablation)?;
    let train: Vec<LabeledPrompt> = training_ids(&plan, cfg)?
        .iter()
        .map(|id| LabeledPrompt {
            prompt: prompts[id].clone(),
            label: labels.labels[id],
        })
        .collect();
    let assembler = FewShotAssembler::new(&train);
    let queries = &plan.test[..test_size.min(plan.test.len())];
    let contexts = queries
        .iter()
        .map(|id| assembler.assemble(&prompts[id], k))
        .collect::<Result<Vec<_>, _>>()?;
    let path = run.path(&format!("corpus/{}/fewshot-k{k}-n{}.jsonl", ablation.slug(), queries.len()));
    let existed = path.exists();
    geollm::dataset::export_fewshot(&contexts, &path)?;
    run.track(&path, existed);
    println!("{}: {} contexts with {k} examples each", run.rel(&path), contexts.len());
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum KnowledgeKind {
    Full,
    CoordinatesOnly,
    Gaussian,
    Uniform,
}

pub fn knowledge(kind: KnowledgeKind, sigma: f64, half_width: u8) -> Knowledge {
    match kind {
        KnowledgeKind::Full => Knowledge::Full,
        KnowledgeKind::CoordinatesOnly => Knowledge::CoordinatesOnly { sigma },
        KnowledgeKind::Gaussian => Knowledge::Noisy(NoiseModel::Gaussian { sigma }),
        KnowledgeKind::Uniform => Knowledge::Noisy(NoiseModel::UniformTenths { half_width }),
    }
}

fn oracle(run: &RunDir, cfg: &RunConfig, knowledge: Knowledge) -> Result<MockOracle> {
    Ok(MockOracle::new(load_world(run)?, load_labels(run)?.binner, knowledge, cfg.seed))
}

/// Answers a corpus file the way an external model would: only the id and
/// the prompt text are read from it.
pub fn mock_answer(run: &RunDir, cfg: &RunConfig, input: &Path, name: &str, knowledge: Knowledge) -> Result<()> {
    let oracle = oracle(run, cfg, knowledge)?;
    let ds = load_dataset(run, cfg)?;
    let records = read_corpus(File::open(input).with_context(|| format!("opening {}", input.display()))?)?;
    let mut set = PredictionSet::new(name);
    for r in &records {
        let parsed = ParsedPrompt::parse(&r.prompt_text)?;
        let point = ds.get(&r.id).ok_or_else(|| anyhow!("corpus id {} is not in the dataset", r.id))?.point;
        set.insert(&r.id, Outcome::from_completion(&oracle.complete(&r.id, point, parsed.components())))?;
    }
    let path = run.path(&format!("predictions/{name}.jsonl"));
    save_predictions(run, &set, &path)?;
    println!("{}: {} answers", run.rel(&path), set.len());
    Ok(())
}

fn save_predictions(run: &RunDir, set: &PredictionSet, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    set.write_jsonl(&mut buf)?;
    run.write(path, &String::from_utf8(buf)?)
}

fn read_prediction_file(path: &Path, expected: &[String]) -> Result<PredictionSet> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(PredictionSet::read_jsonl(file, expected, &stem(path))?)
}

pub fn import_predictions(run: &RunDir, input: &Path, name: Option<&str>, split: SplitTag) -> Result<()> {
    let plan = load_plan(run)?;
    let set = read_prediction_file(input, split_ids(&plan, split))?;
    let name = name.map(str::to_string).unwrap_or_else(|| stem(input));
    let path = run.path(&format!("predictions/{name}.jsonl"));
    save_predictions(run, &set, &path)?;
    println!(
        "{}: {} ids, {} unparseable",
        run.rel(&path),
        set.len(),
        set.n_unparseable()
    );
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BaselineKind {
    Knn,
    Gbt,
}

pub struct BaselineOptions {
    pub kind: BaselineKind,
    pub k: usize,
    pub trees: usize,
    pub embed_dim: Option<usize>,
}

pub fn baseline(run: &RunDir, cfg: &RunConfig, opts: &BaselineOptions) -> Result<()> {
    let plan = load_plan(run)?;
    let labels = load_labels(run)?;
    let contexts = load_contexts(run)?;
    let by_id: HashMap<&str, &SampleContext> = contexts.iter().map(|c| (c.id.as_str(), c)).collect();
    let prompts = prompts_by_id(run, cfg, Ablation::WholePrompt)?;
    let train = training_ids(&plan, cfg)?;
    let test: Vec<PromptRecord> = plan.test.iter().map(|id| prompts[id].clone()).collect();
    let (adapter, name) = match opts.kind {
        BaselineKind::Knn => {
            let points = train
                .iter()
                .map(|id| {
                    Ok(LabeledPoint {
                        id: id.clone(),
                        point: by_id.get(id.as_str()).ok_or_else(|| anyhow!("no context for {id}"))?.point,
                        label: labels.labels[id],
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            (
                BaselineAdapter::Knn(KnnRegressor::fit(points, opts.k)?),
                format!("knn-{}", cfg.splits.size),
            )
        }
        BaselineKind::Gbt => {
            let embedder = opts.embed_dim.map(HashingEmbedder::new);
            let features = features_for(&contexts, embedder.as_ref().map(|e| e as &dyn EmbeddingProvider))?;
            let rows: Vec<_> = train.iter().map(|id| features[id].clone()).collect();
            let y: Vec<f64> = train.iter().map(|id| labels.labels[id].value()).collect();
            let config = GbtConfig {
                n_trees: opts.trees,
                ..GbtConfig::default()
            };
            let model = gbt_fit(&rows, &y, &config)?;
            let model_path = run.path(&format!("models/gbt-{}.txt", cfg.splits.size));
            run.write(&model_path, &model.to_text())?;
            let name = match opts.embed_dim {
                Some(d) => format!("gbt-emb{d}-{}", cfg.splits.size),
                None => format!("gbt-{}", cfg.splits.size),
            };
            (BaselineAdapter::Gbt { model, features }, name)
        }
    };
    let set = adapter.predict(&test)?;
    let path = run.path(&format!("predictions/{name}.jsonl"));
    save_predictions(run, &set, &path)?;
    println!("{}: {} predictions from {}", run.rel(&path), set.len(), adapter.name());
    Ok(())
}

fn report_for(run: &RunDir, set: &PredictionSet, split: SplitTag) -> Result<EvalReport> {
    let plan = load_plan(run)?;
    let labels = load_labels(run)?;
    let truths = truths_for(&labels, split_ids(&plan, split))?;
    Ok(evaluate(set, &truths, Some(&labels.binner))?)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "n/a".into())
}

pub fn evaluate_cmd(run: &RunDir, predictions: &Path, split: SplitTag) -> Result<()> {
    let plan = load_plan(run)?;
    let set = read_prediction_file(predictions, split_ids(&plan, split))?;
    let report = report_for(run, &set, split)?;
    let path = run.path(&format!("reports/{}.json", stem(predictions)));
    run.write(&path, &report.to_json())?;
    println!(
        "{}: r² {} mae {} (n={}, unparseable {})",
        run.rel(&path),
        fmt_opt(report.r_squared),
        fmt_opt(report.mae),
        report.n_evaluated,
        report.n_unparseable
    );
    Ok(())
}

pub fn ablate(
    run: &RunDir,
    cfg: &RunConfig,
    format: CorpusFormat,
    mock: Option<Knowledge>,
    predictions_dir: Option<&Path>,
) -> Result<()> {
    let plan = load_plan(run)?;
    let contexts = load_contexts(run)?;
    let test_ids: BTreeSet<&str> = plan.test.iter().map(|s| s.as_str()).collect();
    let test_contexts: Vec<SampleContext> = contexts
        .into_iter()
        .filter(|c| test_ids.contains(c.id.as_str()))
        .collect();
    let oracle = match mock {
        Some(k) => Some(oracle(run, cfg, k)?),
        None => None,
    };
    let mut summary = String::from("variant,slug,r_squared,mae,n_evaluated,n_unparseable\n");
    let mut reports = 0;
    for ablation in cfg.ablations()? {
        let slug = ablation.slug();
        let prompts: HashMap<String, PromptRecord> = render_contexts(&test_contexts, &cfg.task.name, ablation.components())?
            .into_iter()
            .map(|p| (p.id.clone(), p))
            .collect();
        let records = CorpusRecord::build(&plan.test, SplitTag::Test, &prompts, None)?;
        run.write(&run.path(&format!("corpus/ablation/{slug}.jsonl")), &corpus_text(&records, format)?)?;

        let set = match (&oracle, predictions_dir) {
            (Some(o), _) => {
                let ordered: Vec<PromptRecord> = plan.test.iter().map(|id| prompts[id].clone()).collect();
                let set = o.predict(&ordered)?;
                save_predictions(run, &set, &run.path(&format!("predictions/ablation/{slug}.jsonl")))?;
                set
            }
            (None, Some(dir)) => {
                let path = dir.join(format!("{slug}.jsonl"));
                if !path.exists() {
                    log::warn!("no predictions for {slug} at {}", path.display());
                    continue;
                }
                read_prediction_file(&path, &plan.test)?
            }
            (None, None) => continue,
        };
        let report = report_for(run, &set, SplitTag::Test)?;
        run.write(&run.path(&format!("reports/ablation/{slug}.json")), &report.to_json())?;
        summary.push_str(&format!(
            "{},{slug},{},{},{},{}\n",
            ablation.label(),
            report.r_squared.map(|v| v.to_string()).unwrap_or_default(),
            report.mae.map(|v| v.to_string()).unwrap_or_default(),
            report.n_evaluated,
            report.n_unparseable
        ));
        println!("{:<24} r² {}", ablation.label(), fmt_opt(report.r_squared));
        reports += 1;
    }
    if reports > 0 {
        run.write(&run.path("reports/ablation/summary.csv"), &summary)?;
    } else {
        println!("wrote test corpora to corpus/ablation/; answer them and rerun with --predictions-dir");
    }
    Ok(())
}

pub fn error_map(run: &RunDir, cfg: &RunConfig, predictions: &Path, output: Option<PathBuf>) -> Result<()> {
    let plan = load_plan(run)?;
    let labels = load_labels(run)?;
    let ds = load_dataset(run, cfg)?;
    let set = read_prediction_file(predictions, &plan.test)?;
    let rows: Vec<ErrorMapRow> = set
        .outcomes
        .iter()
        .filter_map(|(id, o)| o.label().map(|l| (id, l)))
        .map(|(id, pred)| {
            Ok(ErrorMapRow {
                id: id.clone(),
                point: ds.get(id).ok_or_else(|| anyhow!("unknown id {id}"))?.point,
                pred,
                truth: *labels.labels.get(id).ok_or_else(|| anyhow!("no label for {id}"))?,
            })
        })
        .collect::<Result<_>>()?;
    let path = output.unwrap_or_else(|| run.path(&format!("reports/{}.geojson", stem(predictions))));
    let csv_path = path.with_extension("csv");
    let existed = (path.exists(), csv_path.exists());
    emit_error_map(&rows, &path)?;
    run.track(&path, existed.0);
    run.track(&csv_path, existed.1);
    println!("{} and {}: {} points", run.rel(&path), run.rel(&csv_path), rows.len());
    Ok(())
}

/// `task:size:model=report.json`; size may be empty.
pub fn parse_entry(s: &str) -> Result<(ResultCell, PathBuf)> {
    let (key, path) = s.split_once('=').ok_or_else(|| anyhow!("entry {s:?} lacks '=report.json'"))?;
    let parts: Vec<&str> = key.split(':').collect();
    let [task, size, model] = parts.as_slice() else {
        bail!(ConfigError(format!("entry {s:?} is not task:size:model=path")));
    };
    let size = match *size {
        "" => None,
        v => Some(v.parse().map_err(|_| ConfigError(format!("bad size in {s:?}")))?),
    };
    Ok((
        ResultCell {
            task: task.to_string(),
            size,
            model: model.to_string(),
            value: None,
        },
        PathBuf::from(path),
    ))
}

pub fn table(run: &RunDir, entries: &[String], output: Option<PathBuf>) -> Result<()> {
    let mut cells = Vec::new();
    for e in entries {
        let (mut cell, path) = parse_entry(e)?;
        cell.value = EvalReport::load(&path)?.r_squared;
        cells.push(cell);
    }
    let text = results_table(&cells);
    print!("{text}");
    if let Some(out) = output {
        run.write(&out, &text)?;
    }
    Ok(())
}
