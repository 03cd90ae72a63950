//! Margin-ranking SGD over the embedding loss plus the weighted topic loss.

use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::TrainConfig;
use crate::error::{Error, Result};
use crate::evalsuite::{link_prediction, TieBreak};
use crate::kg_store::{DescriptionCorpus, Split, Triple, TripleStore};
use crate::linalg::{axpy, norm_sq};
use crate::scoring::{ssp_gradients, EmbeddingTable, ModelKind, ScoreParams, Scorer, SspGradients, TrainMode};
use crate::topic_semantics::{pretrain_nmf, SemanticModel};

/// Parameters and progress of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub model: ModelKind,
    pub embeddings: EmbeddingTable,
    pub semantics: Option<SemanticModel>,
    pub round: usize,
    pub embed_loss: f64,
    pub topic_loss: f64,
}

impl TrainState {
    /// Scorer for this state's model.
    pub fn scorer(&self, params: ScoreParams) -> Result<Scorer<'_>> {
        match (self.model, &self.semantics) {
            (ModelKind::TransE, _) => Ok(Scorer::transe(&self.embeddings)),
            (_, Some(sem)) => Scorer::ssp(&self.embeddings, sem, params),
            (_, None) => Err(Error::Config(format!("model {} requires semantic vectors", self.model))),
        }
    }
}

/// Independent deterministic random stream for one purpose of a run.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const INIT_STREAM: u64 = 0;
const TRAIN_STREAM: u64 = 1;
const NMF_SEED_SALT: u64 = 0x6e6d_665f_7365_6564;

/// Fan-based uniform embeddings plus (for SSP models) NMF-pretrained semantics.
pub fn init_params(
    store: &TripleStore,
    corpus: Option<&DescriptionCorpus>,
    config: &TrainConfig,
    model: ModelKind,
) -> Result<TrainState> {
    config.validate()?;
    let mut rng = rng_stream(config.seed, INIT_STREAM);
    let embeddings = EmbeddingTable::init_uniform(store.num_entities(), store.num_relations(), config.dim, &mut rng);
    let semantics = if model.uses_semantics() {
        let corpus = corpus
            .filter(|c| !c.is_empty())
            .ok_or_else(|| Error::Config(format!("model {model} requires a description corpus")))?;
        if corpus.num_entities() != store.num_entities() {
            return Err(Error::Shape {
                expected: store.num_entities(),
                found: corpus.num_entities(),
            });
        }
        Some(pretrain_nmf(
            corpus,
            config.dim,
            config.nmf_epochs,
            config.nmf_rate,
            config.seed ^ NMF_SEED_SALT,
        )?)
    } else {
        None
    };
    let topic_loss = match (&semantics, corpus) {
        (Some(s), Some(c)) => s.topic_loss(c)?,
        _ => 0.0,
    };
    Ok(TrainState {
        model,
        embeddings,
        semantics,
        round: 0,
        embed_loss: 0.0,
        topic_loss,
    })
}

/// Replaces the head, tail, or (with probability `rel_corrupt_frac`) the
/// relation of `triple`, rejecting candidates that are known facts. The
/// corrupted slot is chosen once; only the replacement is redrawn.
pub fn sample_negative<R: Rng>(
    store: &TripleStore,
    triple: &Triple,
    rel_corrupt_frac: f64,
    max_retries: usize,
    rng: &mut R,
) -> Result<Triple> {
    let corrupt_relation = rel_corrupt_frac > 0.0 && rng.gen::<f64>() < rel_corrupt_frac;
    if corrupt_relation {
        let nr = store.num_relations();
        if nr < 2 {
            return Err(Error::Sampling(format!("no alternative relation for {triple}")));
        }
        for _ in 0..max_retries {
            // uniform over relations other than triple.relation
            let mut r = rng.gen_range(0..nr - 1);
            if r >= triple.relation {
                r += 1;
            }
            let cand = Triple::new(triple.head, r, triple.tail);
            if !store.contains(&cand) {
                return Ok(cand);
            }
        }
    } else {
        let ne = store.num_entities();
        let p_head = store.corruption_probability(triple.relation)?;
        let head = rng.gen::<f64>() < p_head;
        for _ in 0..max_retries {
            let e = rng.gen_range(0..ne);
            let cand = if head {
                Triple::new(e, triple.relation, triple.tail)
            } else {
                Triple::new(triple.head, triple.relation, e)
            };
            if !store.contains(&cand) {
                return Ok(cand);
            }
        }
    }
    Err(Error::Sampling(format!(
        "retry budget of {max_retries} exhausted for {triple}"
    )))
}

/// `max(γ + f_pos − f_neg, 0)`; smaller scores are more plausible.
pub fn hinge_loss(f_pos: f64, f_neg: f64, margin: f64) -> f64 {
    (margin + f_pos - f_neg).max(0.0)
}

/// Summary of one pass over the training triples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochReport {
    pub round: usize,
    /// Mean hinge loss over evaluated (positive, negative) pairs.
    pub embed_loss: f64,
    /// Topic loss of the semantic model after the epoch.
    pub topic_loss: f64,
    pub skipped: usize,
}

#[derive(Default)]
struct GradBuffer {
    entities: BTreeMap<usize, Vec<f64>>,
    relations: BTreeMap<usize, Vec<f64>>,
    semantics: BTreeMap<usize, Vec<f64>>,
}

impl GradBuffer {
    fn add(map: &mut BTreeMap<usize, Vec<f64>>, key: usize, sign: f64, g: &[f64]) {
        let slot = map.entry(key).or_insert_with(|| vec![0.0; g.len()]);
        axpy(sign, g, slot);
    }

    fn add_triple(&mut self, t: &Triple, sign: f64, g: &SspGradients, joint: bool) {
        Self::add(&mut self.entities, t.head, sign, &g.h);
        Self::add(&mut self.relations, t.relation, sign, &g.r);
        Self::add(&mut self.entities, t.tail, sign, &g.t);
        if joint {
            Self::add(&mut self.semantics, t.head, sign, &g.s_h);
            Self::add(&mut self.semantics, t.tail, sign, &g.s_t);
        }
    }

    fn is_empty(&self) -> bool {
        self.entities.is_empty() && self.relations.is_empty() && self.semantics.is_empty()
    }
}

fn triple_gradients(state: &TrainState, t: &Triple, params: ScoreParams) -> Result<SspGradients> {
    let emb = &state.embeddings;
    let h = emb.entity(t.head);
    let r = emb.relation(t.relation);
    let tv = emb.entity(t.tail);
    match &state.semantics {
        Some(sem) if state.model.uses_semantics() => ssp_gradients(
            h,
            r,
            tv,
            sem.entity(t.head),
            sem.entity(t.tail),
            params,
            state.model.train_mode(),
        ),
        _ => {
            let g: Vec<f64> = (0..h.len()).map(|k| 2.0 * (h[k] + r[k] - tv[k])).collect();
            let d = g.len();
            Ok(SspGradients {
                t: g.iter().map(|x| -x).collect(),
                r: g.clone(),
                h: g,
                s_h: vec![0.0; d],
                s_t: vec![0.0; d],
            })
        }
    }
}

/// Accumulates the descent direction of the hinge for one (positive,
/// negative) pair: `+∇f_pos − ∇f_neg` when the hinge is active.
/// Returns the hinge value.
fn accumulate_pair(
    state: &TrainState,
    pos: &Triple,
    neg: &Triple,
    params: ScoreParams,
    margin: f64,
    round: usize,
    buf: &mut GradBuffer,
) -> Result<f64> {
    let scorer = state.scorer(params)?;
    let (f_pos, f_neg) = (scorer.score(pos), scorer.score(neg));
    if !(f_pos.is_finite() && f_neg.is_finite()) {
        return Err(Error::NonFinite {
            round,
            triple: pos.to_string(),
        });
    }
    let loss = hinge_loss(f_pos, f_neg, margin);
    if loss > 0.0 {
        let joint = state.model.train_mode() == TrainMode::Joint;
        buf.add_triple(pos, 1.0, &triple_gradients(state, pos, params)?, joint);
        buf.add_triple(neg, -1.0, &triple_gradients(state, neg, params)?, joint);
    }
    Ok(loss)
}

fn apply_buffer(
    state: &mut TrainState,
    buf: &mut GradBuffer,
    config: &TrainConfig,
    round: usize,
    last: &Triple,
) -> Result<()> {
    let alpha = config.rate;
    let non_finite = || Error::NonFinite {
        round,
        triple: last.to_string(),
    };
    for (e, g) in std::mem::take(&mut buf.entities) {
        let row = state.embeddings.entity_mut(e);
        axpy(-alpha, &g, row);
        if config.unit_ball {
            let n = norm_sq(row).sqrt();
            if n > 1.0 {
                row.iter_mut().for_each(|x| *x /= n);
            }
        }
        if !row.iter().all(|x| x.is_finite()) {
            return Err(non_finite());
        }
    }
    for (r, g) in std::mem::take(&mut buf.relations) {
        let row = state.embeddings.relation_mut(r);
        axpy(-alpha, &g, row);
        if !row.iter().all(|x| x.is_finite()) {
            return Err(non_finite());
        }
    }
    let sem_updates = std::mem::take(&mut buf.semantics);
    if let Some(sem) = state.semantics.as_mut() {
        for (e, g) in sem_updates {
            sem.update_entity(e, -alpha, &g);
            if !sem.entity(e).iter().all(|x| x.is_finite()) {
                return Err(non_finite());
            }
        }
    }
    Ok(())
}

/// One shuffled pass over the training triples.
pub fn train_epoch<R: Rng>(
    state: &mut TrainState,
    store: &TripleStore,
    corpus: Option<&DescriptionCorpus>,
    config: &TrainConfig,
    rng: &mut R,
) -> Result<EpochReport> {
    let params = ScoreParams::new(config.lambda)?;
    let round = state.round + 1;
    let joint = state.model.train_mode() == TrainMode::Joint;
    let topic_cells: Vec<(usize, usize, u32)> = match corpus {
        Some(c) if joint && config.mu > 0.0 => c.cells().collect(),
        _ => Vec::new(),
    };

    let mut order: Vec<usize> = (0..store.train().len()).collect();
    order.shuffle(rng);

    let mut buf = GradBuffer::default();
    let mut loss_sum = 0.0;
    let mut pairs = 0usize;
    let mut skipped = 0usize;
    for (n, &i) in order.iter().enumerate() {
        let pos = store.train()[i];
        for _ in 0..config.negatives {
            match sample_negative(store, &pos, config.rel_corrupt_frac, config.max_retries, rng) {
                Ok(neg) => {
                    loss_sum += accumulate_pair(state, &pos, &neg, params, config.margin, round, &mut buf)?;
                    pairs += 1;
                }
                Err(Error::Sampling(msg)) => {
                    log::warn!("skipping negative: {msg}");
                    skipped += 1;
                }
                Err(other) => return Err(other),
            }
        }
        if !topic_cells.is_empty() {
            let (e, w, c) = topic_cells[rng.gen_range(0..topic_cells.len())];
            let sem = state.semantics.as_mut().expect("joint mode has semantics");
            sem.topic_sgd_step(e, w, c, config.rate * config.mu);
            if !sem.all_finite() {
                return Err(Error::NonFinite {
                    round,
                    triple: pos.to_string(),
                });
            }
        }
        let batch_done = (n + 1) % config.batch == 0 || n + 1 == order.len();
        if batch_done && !buf.is_empty() {
            apply_buffer(state, &mut buf, config, round, &pos)?;
        }
    }

    let topic_loss = match (&state.semantics, corpus) {
        (Some(s), Some(c)) if !c.is_empty() => s.topic_loss(c)?,
        _ => 0.0,
    };
    let embed_loss = if pairs > 0 { loss_sum / pairs as f64 } else { 0.0 };
    state.round = round;
    state.embed_loss = embed_loss;
    state.topic_loss = topic_loss;
    Ok(EpochReport {
        round,
        embed_loss,
        topic_loss,
        skipped,
    })
}

/// Result of [`train`].
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub state: TrainState,
    pub trajectory: Vec<EpochReport>,
}

/// Runs `config.rounds` epochs from a fresh initialization.
///
/// `on_checkpoint` is called every `config.checkpoint_every` rounds (when
/// nonzero) and after the final round. With `early_stop > 0` the filtered
/// validation Mean Rank is checked at each checkpoint and training stops
/// after that many checks without improvement, returning the best state.
pub fn train<F>(
    store: &TripleStore,
    corpus: Option<&DescriptionCorpus>,
    config: &TrainConfig,
    model: ModelKind,
    mut on_checkpoint: F,
) -> Result<TrainOutcome>
where
    F: FnMut(&TrainState) -> Result<()>,
{
    config.validate()?;
    if store.train().is_empty() {
        return Err(Error::Config("training split is empty".into()));
    }
    let mut state = init_params(store, corpus, config, model)?;
    let mut rng = rng_stream(config.seed, TRAIN_STREAM);
    let mut trajectory = Vec::with_capacity(config.rounds);
    let early = config.early_stop > 0 && config.checkpoint_every > 0 && !store.valid().is_empty();
    let mut best: Option<(f64, TrainState)> = None;
    let mut stale = 0usize;
    let params = ScoreParams::new(config.lambda)?;

    for _ in 0..config.rounds {
        let report = train_epoch(&mut state, store, corpus, config, &mut rng)?;
        log::info!(
            "round {} embed_loss {:.6} topic_loss {:.6}",
            report.round,
            report.embed_loss,
            report.topic_loss
        );
        trajectory.push(report);
        let at_checkpoint = config.checkpoint_every > 0 && state.round % config.checkpoint_every == 0;
        if at_checkpoint && state.round < config.rounds {
            on_checkpoint(&state)?;
        }
        if early && at_checkpoint {
            let mr = link_prediction(&state.scorer(params)?, store, Split::Valid, TieBreak::Optimistic)?
                .report
                .overall
                .mean_rank_filtered;
            if best.as_ref().is_none_or(|(b, _)| mr < *b) {
                best = Some((mr, state.clone()));
                stale = 0;
            } else {
                stale += 1;
                if stale >= config.early_stop {
                    log::info!("early stop at round {}", state.round);
                    break;
                }
            }
        }
    }
    if let Some((_, b)) = best.filter(|_| stale >= config.early_stop) {
        state = b;
    }
    on_checkpoint(&state)?;
    Ok(TrainOutcome { state, trajectory })
}

/// Writes the loss trajectory as `round,embed_loss,topic_loss` CSV.
pub fn write_trajectory<W: Write>(rows: &[EpochReport], mut w: W) -> std::io::Result<()> {
    writeln!(w, "round,embed_loss,topic_loss")?;
    for r in rows {
        writeln!(w, "{},{},{}", r.round, r.embed_loss, r.topic_loss)?;
    }
    Ok(())
}
