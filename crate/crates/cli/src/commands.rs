use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use log::info;
use ssp_core::evalsuite::{
    link_prediction, rank_pair_statistics, relation_prediction, run_classification, score_difference_histogram,
    select_hard_pairs, write_rank_pairs, LinkEval, RankSetting, TypedEntitySet, RANK_PAIR_BOUND, RANK_PAIR_THRESHOLDS,
};
use ssp_core::kg_store::{load_zero_shot, TripleStoreBuilder, VocabMode};
use ssp_core::trainer::{train, write_trajectory};
use ssp_core::{
    Checkpoint, DescriptionCorpus, ModelKind, ScoreParams, Split, TieBreak, TokenizerOptions, TrainConfig, Vocab,
};

use crate::manifest::RunManifest;
use crate::prepared::{self, Prepared, Source};

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn load_config(path: Option<&Path>) -> Result<TrainConfig> {
    match path {
        Some(p) => Ok(TrainConfig::from_file(p)?),
        None => Ok(TrainConfig::default()),
    }
}

pub struct PrepArgs<'a> {
    pub train: &'a Path,
    pub valid: Option<&'a Path>,
    pub test: Option<&'a Path>,
    pub descriptions: Option<&'a Path>,
    pub config: Option<&'a Path>,
    pub min_count: Option<usize>,
    pub stopwords: bool,
    pub out: &'a Path,
}

pub fn prep(args: PrepArgs<'_>) -> Result<()> {
    let config = load_config(args.config)?;
    let tokenizer = TokenizerOptions {
        min_count: args.min_count.unwrap_or(config.min_count),
        remove_stopwords: args.stopwords || config.stopwords,
        ..Default::default()
    };
    let mut builder = TripleStoreBuilder::new();
    builder.load_split(args.train, Split::Train, VocabMode::Build)?;
    let mut sources = vec![Source {
        name: "train",
        path: args.train,
    }];
    for (split, path) in [(Split::Valid, args.valid), (Split::Test, args.test)] {
        if let Some(p) = path {
            builder.load_split(p, split, VocabMode::Reuse)?;
            sources.push(Source {
                name: split.name(),
                path: p,
            });
        }
    }
    let store = builder.build();
    let corpus = match args.descriptions {
        Some(p) => {
            sources.push(Source {
                name: "descriptions",
                path: p,
            });
            DescriptionCorpus::load(p, &store, &tokenizer)?
        }
        None => DescriptionCorpus::empty(store.num_entities()),
    };
    let hash = prepared::write(args.out, &store, &corpus, &tokenizer, &sources)?;

    println!("entities     {}", store.num_entities());
    println!("relations    {}", store.num_relations());
    for split in Split::ALL {
        println!("{:<12} {}", split.name(), store.split(split).len());
    }
    println!("described    {}", corpus.described().count());
    println!("words        {}", corpus.num_words());
    println!("count cells  {}", corpus.num_cells());
    println!("prep_hash    {hash}");
    Ok(())
}

pub struct TrainArgs<'a> {
    pub prepared: &'a Path,
    pub config: Option<&'a Path>,
    pub model: ModelKind,
    pub seed: Option<u64>,
    pub out: &'a Path,
    pub command: String,
}

pub fn train_cmd(args: TrainArgs<'_>) -> Result<()> {
    let mut config = load_config(args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let config = config.for_model(args.model)?;
    let t0 = Instant::now();
    let prep = Prepared::load(args.prepared)?;
    if args.model.uses_semantics() && prep.corpus().is_none() {
        bail!(
            "model {} needs descriptions but {} has none",
            args.model,
            args.prepared.display()
        );
    }
    let load_secs = t0.elapsed().as_secs_f64();
    create_dir(args.out)?;

    let mut manifest = RunManifest::new(args.command, &config, args.model, &prep)?;
    manifest.timing("load_prepared_s", load_secs);
    let manifest_path = args.out.join("run_manifest.txt");
    // digests go to disk before the first update
    manifest.write(&manifest_path)?;

    let ckpt_root = args.out.join("checkpoints");
    let mut saved: Vec<PathBuf> = Vec::new();
    let t1 = Instant::now();
    let outcome = train(&prep.store, prep.corpus(), &config, args.model, |state| {
        let dir = ckpt_root.join(format!("round-{:06}", state.round));
        info!("checkpoint {}", dir.display());
        Checkpoint {
            state: state.clone(),
            config: config.clone(),
            prep_hash: prep.prep_hash.clone(),
        }
        .save(&dir)?;
        saved.push(dir);
        Ok(())
    })?;
    manifest.timing("train_s", t1.elapsed().as_secs_f64());

    let final_dir = args.out.join("final");
    Checkpoint {
        state: outcome.state.clone(),
        config: config.clone(),
        prep_hash: prep.prep_hash.clone(),
    }
    .save(&final_dir)?;
    let traj_path = args.out.join("trajectory.csv");
    let mut buf = Vec::new();
    write_trajectory(&outcome.trajectory, &mut buf)?;
    fs::write(&traj_path, buf).with_context(|| format!("writing {}", traj_path.display()))?;

    for dir in &saved {
        manifest.artifact(dir);
    }
    manifest.artifact(&final_dir);
    manifest.artifact(&traj_path);
    manifest.write(&manifest_path)?;

    let skipped: usize = outcome.trajectory.iter().map(|r| r.skipped).sum();
    println!("model        {}", args.model);
    println!("rounds       {}", outcome.state.round);
    println!("embed_loss   {}", outcome.state.embed_loss);
    if args.model.uses_semantics() {
        println!("topic_loss   {}", outcome.state.topic_loss);
    }
    if skipped > 0 {
        println!("skipped negatives {skipped}");
    }
    println!("checkpoint   {}", final_dir.display());
    Ok(())
}

fn load_checkpoint(path: &Path, prep: &Prepared) -> Result<Checkpoint> {
    let ckpt = Checkpoint::load(path).with_context(|| format!("loading checkpoint {}", path.display()))?;
    ckpt.ensure_compatible(&prep.prep_hash)
        .with_context(|| format!("checkpoint {}", path.display()))?;
    Ok(ckpt)
}

pub struct EvalArgs<'a> {
    pub prepared: &'a Path,
    pub checkpoint: &'a Path,
    pub split: Split,
    pub ties: TieBreak,
    pub out: &'a Path,
}

#[derive(Clone, Copy)]
pub enum LinkTask {
    Entity,
    Relation,
}

fn run_link(task: LinkTask, ckpt: &Checkpoint, prep: &Prepared, split: Split, ties: TieBreak) -> Result<LinkEval> {
    let scorer = ckpt.state.scorer(ScoreParams::new(ckpt.config.lambda)?)?;
    Ok(match task {
        LinkTask::Entity => link_prediction(&scorer, &prep.store, split, ties)?,
        LinkTask::Relation => relation_prediction(&scorer, &prep.store, split, ties)?,
    })
}

pub fn eval_link(task: LinkTask, args: EvalArgs<'_>) -> Result<()> {
    let prep = Prepared::load(args.prepared)?;
    let ckpt = load_checkpoint(args.checkpoint, &prep)?;
    let eval = run_link(task, &ckpt, &prep, args.split, args.ties)?;
    create_dir(args.out)?;
    let name = match task {
        LinkTask::Entity => "link_report.csv",
        LinkTask::Relation => "relation_report.csv",
    };
    write_text(&args.out.join(name), &eval.report.to_csv())?;
    print!("{}", eval.report.to_table());
    Ok(())
}

pub struct ClassArgs<'a> {
    pub prepared: &'a Path,
    pub checkpoint: &'a Path,
    pub labels: &'a Path,
    pub test_labels: &'a Path,
    pub zero_shot: Option<&'a Path>,
    pub config: Option<&'a Path>,
    pub out: &'a Path,
}

pub fn eval_class(args: ClassArgs<'_>) -> Result<()> {
    let prep = Prepared::load(args.prepared)?;
    let ckpt = load_checkpoint(args.checkpoint, &prep)?;
    let config = match args.config {
        Some(p) => TrainConfig::from_file(p)?,
        None => ckpt.config.clone(),
    };
    let mut types = Vocab::new();
    let train_set = TypedEntitySet::load(args.labels, &mut types)?;
    let test_set = TypedEntitySet::load(args.test_labels, &mut types)?;
    let zero_shot = match args.zero_shot {
        Some(p) => load_zero_shot(p, &prep.corpus, &prep.tokenizer)?,
        None => Vec::new(),
    };
    let report = run_classification(
        &ckpt.state,
        &prep.store,
        &train_set,
        &test_set,
        types.len(),
        &zero_shot,
        &config.classify_options(),
    )?;
    create_dir(args.out)?;
    write_text(&args.out.join("class_report.csv"), &report.to_csv())?;
    println!("classes      {}", report.num_classes);
    println!("train        {}", report.train_entities);
    println!("test         {}", report.test_entities);
    println!("zero-shot    {}", report.zero_shot_entities);
    println!("MAP          {:.2}", report.map);
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Analysis {
    RankPairs,
    ScoreDiff,
    All,
}

pub struct AnalyzeArgs<'a> {
    pub prepared: &'a Path,
    pub checkpoint: &'a Path,
    pub baseline: &'a Path,
    pub analysis: Analysis,
    pub split: Split,
    pub setting: RankSetting,
    pub bin_width: f64,
    pub out: &'a Path,
}

pub fn analyze(args: AnalyzeArgs<'_>) -> Result<()> {
    let prep = Prepared::load(args.prepared)?;
    let model = load_checkpoint(args.checkpoint, &prep)?;
    let baseline = load_checkpoint(args.baseline, &prep)?;
    create_dir(args.out)?;

    if matches!(args.analysis, Analysis::RankPairs | Analysis::All) {
        let a = run_link(LinkTask::Entity, &baseline, &prep, args.split, TieBreak::Optimistic)?;
        let b = run_link(LinkTask::Entity, &model, &prep, args.split, TieBreak::Optimistic)?;
        let cells = rank_pair_statistics(&a.ranks, &b.ranks, &RANK_PAIR_THRESHOLDS, RANK_PAIR_BOUND, args.setting)?;
        let mut buf = Vec::new();
        write_rank_pairs(&cells, RANK_PAIR_BOUND, &mut buf)?;
        let path = args.out.join("rank_pairs.csv");
        fs::write(&path, &buf).with_context(|| format!("writing {}", path.display()))?;
        println!("baseline rank >= m and model rank <= {RANK_PAIR_BOUND}");
        for (m, n) in &cells {
            println!("  m = {m:<6} {n}");
        }
    }
    if matches!(args.analysis, Analysis::ScoreDiff | Analysis::All) {
        let base_scorer = baseline.state.scorer(ScoreParams::new(baseline.config.lambda)?)?;
        let pairs = select_hard_pairs(&base_scorer, &prep.store, args.split);
        let scorer = model.state.scorer(ScoreParams::new(model.config.lambda)?)?;
        let report = score_difference_histogram(&pairs, &scorer, args.bin_width)?;
        write_text(&args.out.join("score_diff_histogram.csv"), &report.histogram_csv())?;
        let mut summary = String::from("metric,target,setting,value\n");
        let _ = writeln!(summary, "pairs,all,{},{}", args.split.name(), report.differences.len());
        let _ = writeln!(
            summary,
            "success_rate,all,{},{}",
            args.split.name(),
            report.success_rate
        );
        write_text(&args.out.join("score_diff_summary.csv"), &summary)?;
        println!("hard pairs   {}", report.differences.len());
        println!("success rate {:.2}%", 100.0 * report.success_rate);
    }
    Ok(())
}
