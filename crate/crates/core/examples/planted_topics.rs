//! Trains TransE and SSP (Standard) on a planted-topic graph and prints
//! filtered HITS@10 for both.
//!
//! Usage: `planted_topics [key=value ...]` where keys are training config
//! keys (dim, rate, margin, lambda, rounds, seed, ...).

use ssp_core::evalsuite::link_prediction;
use ssp_core::synthetic::PlantedTopicSpec;
use ssp_core::trainer::train;
use ssp_core::{ModelKind, ScoreParams, Split, TieBreak, TrainConfig};

fn main() -> ssp_core::Result<()> {
    let mut cfg = TrainConfig {
        dim: 20,
        rate: 0.01,
        margin: 1.0,
        lambda: 0.9,
        rounds: 300,
        nmf_epochs: 200,
        nmf_rate: 0.005,
        checkpoint_every: 0,
        ..Default::default()
    };
    let mut spec = PlantedTopicSpec::default();
    for arg in std::env::args().skip(1) {
        let (k, v) = arg.split_once('=').expect("key=value");
        match k {
            "cold_fraction" => spec.cold_fraction = v.parse().unwrap(),
            "noise_degree" => spec.noise_degree = v.parse().unwrap(),
            "topic_fraction" => spec.topic_fraction = v.parse().unwrap(),
            "kg_seed" => spec.seed = v.parse().unwrap(),
            _ => cfg.set(k, v)?,
        }
    }
    let kg = spec.generate();
    println!(
        "entities {} train {} test {} words {}",
        kg.store.num_entities(),
        kg.store.train().len(),
        kg.store.test().len(),
        kg.corpus.num_words()
    );
    let params = ScoreParams::new(cfg.lambda)?;
    for model in [ModelKind::TransE, ModelKind::SspStandard] {
        let start = std::time::Instant::now();
        let out = train(&kg.store, Some(&kg.corpus), &cfg, model, |_| Ok(()))?;
        let ev = link_prediction(&out.state.scorer(params)?, &kg.store, Split::Test, TieBreak::Optimistic)?;
        let first = out.trajectory.first().unwrap().embed_loss;
        let last = out.trajectory.last().unwrap().embed_loss;
        for (t, m) in &ev.report.by_target {
            println!("   {t:?} {:.2}", m.hits10_filtered);
        }
        println!(
            "{model:<8} hits10_filter {:6.2} mr_filter {:7.2} loss {first:.4}->{last:.4} ({:.1?})",
            ev.report.overall.hits10_filtered,
            ev.report.overall.mean_rank_filtered,
            start.elapsed()
        );
    }
    Ok(())
}
