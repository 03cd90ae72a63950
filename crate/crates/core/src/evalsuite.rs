//! Link and relation prediction, entity-type classification, and the two
//! model-comparison analyses (rank pairs and score differences).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kg_store::{Split, Triple, TripleStore, Vocab, ZeroShotEntity};
use crate::linalg::{dot, Matrix};
use crate::scoring::Scorer;
use crate::topic_semantics::{fold_in, uniform_vector, SemanticModel};
use crate::trainer::TrainState;

/// Which slot of a triple is being predicted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    Head,
    Tail,
    Relation,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Head => "head",
            Target::Tail => "tail",
            Target::Relation => "relation",
        }
    }
}

/// How candidates with exactly the golden score are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Ties rank below the golden triple.
    #[default]
    Optimistic,
    /// Ties rank above the golden triple.
    Pessimistic,
}

/// Raw vs filtered rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankSetting {
    Raw,
    Filtered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankResult {
    pub triple: Triple,
    pub target: Target,
    pub raw_rank: usize,
    pub filtered_rank: usize,
}

impl RankResult {
    pub fn rank(&self, setting: RankSetting) -> usize {
        match setting {
            RankSetting::Raw => self.raw_rank,
            RankSetting::Filtered => self.filtered_rank,
        }
    }
}

fn substitute(t: &Triple, target: Target, c: usize) -> Triple {
    match target {
        Target::Head => Triple::new(c, t.relation, t.tail),
        Target::Tail => Triple::new(t.head, t.relation, c),
        Target::Relation => Triple::new(t.head, c, t.tail),
    }
}

/// Ranks the golden triple among all substitutions of one slot.
///
/// Raw rank is one plus the number of other candidates scoring strictly
/// better (or no worse, under [`TieBreak::Pessimistic`]). The filtered rank
/// counts only candidates that are not known facts.
pub fn rank_triple(
    scorer: &Scorer<'_>,
    store: &TripleStore,
    triple: &Triple,
    target: Target,
    ties: TieBreak,
) -> RankResult {
    let golden = scorer.score(triple);
    let n = match target {
        Target::Relation => scorer.num_relations(),
        _ => scorer.num_entities(),
    };
    let own = match target {
        Target::Head => triple.head,
        Target::Tail => triple.tail,
        Target::Relation => triple.relation,
    };
    let mut raw = 1;
    let mut filtered = 1;
    for c in 0..n {
        if c == own {
            continue;
        }
        let cand = substitute(triple, target, c);
        let s = scorer.score(&cand);
        let ahead = match ties {
            TieBreak::Optimistic => s < golden,
            TieBreak::Pessimistic => s <= golden,
        };
        if ahead {
            raw += 1;
            if !store.contains(&cand) {
                filtered += 1;
            }
        }
    }
    RankResult {
        triple: *triple,
        target,
        raw_rank: raw,
        filtered_rank: filtered,
    }
}

/// Mean Rank and HITS@10 over a set of rank results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub count: usize,
    pub mean_rank_raw: f64,
    pub mean_rank_filtered: f64,
    /// Percentage in `[0, 100]`.
    pub hits10_raw: f64,
    pub hits10_filtered: f64,
}

impl Metrics {
    pub fn from_ranks<'a>(ranks: impl IntoIterator<Item = &'a RankResult>) -> Option<Self> {
        let mut count = 0usize;
        let (mut mr, mut mf, mut hr, mut hf) = (0.0, 0.0, 0usize, 0usize);
        for r in ranks {
            count += 1;
            mr += r.raw_rank as f64;
            mf += r.filtered_rank as f64;
            hr += usize::from(r.raw_rank <= 10);
            hf += usize::from(r.filtered_rank <= 10);
        }
        (count > 0).then(|| {
            let n = count as f64;
            Metrics {
                count,
                mean_rank_raw: mr / n,
                mean_rank_filtered: mf / n,
                hits10_raw: 100.0 * hr as f64 / n,
                hits10_filtered: 100.0 * hf as f64 / n,
            }
        })
    }
}

/// Metrics per prediction target plus the pooled figures.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub by_target: BTreeMap<Target, Metrics>,
    pub overall: Metrics,
}

impl EvalReport {
    pub fn from_ranks(ranks: &[RankResult]) -> Result<Self> {
        let overall =
            Metrics::from_ranks(ranks).ok_or_else(|| Error::Config("cannot evaluate an empty split".into()))?;
        let mut by_target = BTreeMap::new();
        for target in [Target::Head, Target::Tail, Target::Relation] {
            if let Some(m) = Metrics::from_ranks(ranks.iter().filter(|r| r.target == target)) {
                by_target.insert(target, m);
            }
        }
        Ok(EvalReport { by_target, overall })
    }

    fn rows(&self) -> Vec<(&'static str, &Metrics)> {
        let mut rows: Vec<(&'static str, &Metrics)> = self.by_target.iter().map(|(t, m)| (t.name(), m)).collect();
        rows.push(("all", &self.overall));
        rows
    }

    /// `metric,target,setting,value` CSV.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("metric,target,setting,value\n");
        for (name, m) in self.rows() {
            let _ = writeln!(s, "mean_rank,{name},raw,{}", m.mean_rank_raw);
            let _ = writeln!(s, "mean_rank,{name},filter,{}", m.mean_rank_filtered);
            let _ = writeln!(s, "hits10,{name},raw,{}", m.hits10_raw);
            let _ = writeln!(s, "hits10,{name},filter,{}", m.hits10_filtered);
        }
        s
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<10} {:>8} {:>12} {:>12} {:>10} {:>10}",
            "target", "queries", "MR raw", "MR filter", "H@10 raw", "H@10 filt"
        );
        for (name, m) in self.rows() {
            let _ = writeln!(
                s,
                "{:<10} {:>8} {:>12.2} {:>12.2} {:>10.2} {:>10.2}",
                name, m.count, m.mean_rank_raw, m.mean_rank_filtered, m.hits10_raw, m.hits10_filtered
            );
        }
        s
    }
}

/// Report together with the individual ranks it was computed from.
#[derive(Debug, Clone)]
pub struct LinkEval {
    pub report: EvalReport,
    pub ranks: Vec<RankResult>,
}

fn evaluate_targets(
    scorer: &Scorer<'_>,
    store: &TripleStore,
    split: Split,
    targets: &[Target],
    ties: TieBreak,
) -> Result<LinkEval> {
    let triples = store.split(split);
    if triples.is_empty() {
        return Err(Error::Config(format!("{} split is empty", split.name())));
    }
    let ranks: Vec<RankResult> = triples
        .par_iter()
        .flat_map_iter(|t| targets.iter().map(move |&g| rank_triple(scorer, store, t, g, ties)))
        .collect();
    Ok(LinkEval {
        report: EvalReport::from_ranks(&ranks)?,
        ranks,
    })
}

/// Head and tail prediction over a split. Runs on the current rayon pool.
pub fn link_prediction(scorer: &Scorer<'_>, store: &TripleStore, split: Split, ties: TieBreak) -> Result<LinkEval> {
    evaluate_targets(scorer, store, split, &[Target::Head, Target::Tail], ties)
}

/// Relation prediction over a split.
pub fn relation_prediction(scorer: &Scorer<'_>, store: &TripleStore, split: Split, ties: TieBreak) -> Result<LinkEval> {
    evaluate_targets(scorer, store, split, &[Target::Relation], ties)
}

// ---------------------------------------------------------------------------
// Entity classification

/// Multi-label type annotations keyed by entity name.
#[derive(Debug, Clone, PartialEq)]
pub struct TypedEntitySet {
    pub entries: Vec<(String, Vec<usize>)>,
}

impl TypedEntitySet {
    /// Reads `entity<TAB>type1,type2,...`; new type names are added to `types`.
    pub fn load(path: impl AsRef<Path>, types: &mut Vocab) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut entries = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let perr = |msg: &str| Error::Parse {
                path: path.display().to_string(),
                line: i + 1,
                msg: msg.to_owned(),
            };
            let (name, list) = line.split_once('\t').ok_or_else(|| perr("expected entity<TAB>types"))?;
            let mut ids: Vec<usize> = list
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| types.get_or_insert(t))
                .collect();
            ids.sort_unstable();
            ids.dedup();
            if ids.is_empty() {
                return Err(perr("entity has no types"));
            }
            entries.push((name.to_owned(), ids));
        }
        Ok(TypedEntitySet { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `(s_e, e)`: the entity's semantic vector followed by its embedding.
///
/// Models without semantic vectors contribute a zero semantic block.
pub fn build_features(state: &TrainState, entity: usize) -> Result<Vec<f64>> {
    let emb = &state.embeddings;
    if entity >= emb.num_entities() {
        return Err(Error::Feature(format!("entity {entity} has no embedding")));
    }
    let d = emb.dim();
    let mut f = Vec::with_capacity(2 * d);
    match &state.semantics {
        Some(sem) => f.extend_from_slice(sem.entity(entity)),
        None => f.resize(d, 0.0),
    }
    f.extend_from_slice(emb.entity(entity));
    Ok(f)
}

/// Features of an entity known only through its description: the folded-in
/// semantic vector and a zero embedding block.
pub fn zero_shot_features(semantic: &[f64]) -> Vec<f64> {
    let mut f = semantic.to_vec();
    f.resize(2 * semantic.len(), 0.0);
    f
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean binary log-loss of a logistic model plus `l2/2 · ‖w‖²`.
pub fn binary_log_loss(weights: &[f64], bias: f64, xs: &[Vec<f64>], ys: &[bool], l2: f64) -> f64 {
    let n = xs.len() as f64;
    let data: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| {
            let z = dot(weights, x) + bias;
            // log(1 + exp(-z)) for y, log(1 + exp(z)) otherwise
            let m = if y { -z } else { z };
            m.max(0.0) + (-m.abs()).exp().ln_1p()
        })
        .sum();
    data / n + 0.5 * l2 * dot(weights, weights)
}

/// Gradient of [`binary_log_loss`] with respect to weights and bias.
pub fn binary_log_loss_gradient(weights: &[f64], bias: f64, xs: &[Vec<f64>], ys: &[bool], l2: f64) -> (Vec<f64>, f64) {
    let n = xs.len() as f64;
    let mut gw: Vec<f64> = weights.iter().map(|w| l2 * w).collect();
    let mut gb = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let err = (sigmoid(dot(weights, x) + bias) - f64::from(u8::from(y))) / n;
        for (g, xi) in gw.iter_mut().zip(x) {
            *g += err * xi;
        }
        gb += err;
    }
    (gw, gb)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRegParams {
    pub epochs: usize,
    pub rate: f64,
    pub l2: f64,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            epochs: 500,
            rate: 0.5,
            l2: 1e-4,
        }
    }
}

/// One binary logistic regressor per class.
#[derive(Debug, Clone, PartialEq)]
pub struct OvrClassifier {
    weights: Matrix,
    bias: Vec<f64>,
}

/// Trains `num_classes` independent logistic regressors by full-batch
/// gradient descent from zero weights. A class with no positive examples
/// keeps zero weights and is scored by its bias alone.
pub fn train_ovr_classifier(
    features: &[Vec<f64>],
    labels: &[Vec<usize>],
    num_classes: usize,
    params: LogRegParams,
) -> Result<OvrClassifier> {
    if features.is_empty() {
        return Err(Error::Input("no training examples".into()));
    }
    if features.len() != labels.len() {
        return Err(Error::Shape {
            expected: features.len(),
            found: labels.len(),
        });
    }
    let dim = features[0].len();
    if features.iter().any(|f| f.len() != dim) {
        return Err(Error::Input("feature vectors differ in length".into()));
    }
    let mut weights = Matrix::zeros(num_classes, dim);
    let mut bias = vec![0.0; num_classes];
    for k in 0..num_classes {
        let ys: Vec<bool> = labels.iter().map(|l| l.contains(&k)).collect();
        let has_positive = ys.iter().any(|&y| y);
        if !has_positive {
            log::warn!("class {k} has no positive training examples; scoring by bias only");
        }
        let mut w = vec![0.0; dim];
        let mut b = 0.0;
        for _ in 0..params.epochs {
            let (gw, gb) = binary_log_loss_gradient(&w, b, features, &ys, params.l2);
            if has_positive {
                for (wi, g) in w.iter_mut().zip(&gw) {
                    *wi -= params.rate * g;
                }
            }
            b -= params.rate * gb;
        }
        weights.row_mut(k).copy_from_slice(&w);
        bias[k] = b;
    }
    Ok(OvrClassifier { weights, bias })
}

impl OvrClassifier {
    pub fn num_classes(&self) -> usize {
        self.bias.len()
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        (0..self.num_classes())
            .map(|k| sigmoid(dot(self.weights.row(k), x) + self.bias[k]))
            .collect()
    }

    /// Classes ordered by decreasing probability; ties keep class order.
    pub fn rank_classes(&self, x: &[f64]) -> Vec<usize> {
        let p = self.predict_proba(x);
        let mut order: Vec<usize> = (0..p.len()).collect();
        order.sort_by(|&a, &b| p[b].total_cmp(&p[a]));
        order
    }
}

/// Average precision of one ranking against a set of true classes.
pub fn average_precision(ranking: &[usize], truth: &[usize]) -> Option<f64> {
    if truth.is_empty() {
        return None;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (pos, c) in ranking.iter().enumerate() {
        if truth.contains(c) {
            hits += 1;
            sum += hits as f64 / (pos + 1) as f64;
        }
    }
    Some(sum / truth.len() as f64)
}

/// Mean average precision as a percentage. Entities with no true classes
/// are skipped with a warning.
pub fn compute_map(rankings: &[Vec<usize>], truths: &[Vec<usize>]) -> Result<f64> {
    if rankings.len() != truths.len() {
        return Err(Error::Shape {
            expected: rankings.len(),
            found: truths.len(),
        });
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for (i, (r, t)) in rankings.iter().zip(truths).enumerate() {
        match average_precision(r, t) {
            Some(ap) => {
                sum += ap;
                n += 1;
            }
            None => log::warn!("entity {i} has no true types; excluded from MAP"),
        }
    }
    if n == 0 {
        return Err(Error::Input("no entity with true types".into()));
    }
    Ok(100.0 * sum / n as f64)
}

/// Settings for the classification pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub logreg: LogRegParams,
    pub fold_in_epochs: usize,
    pub fold_in_rate: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            logreg: LogRegParams::default(),
            fold_in_epochs: 2000,
            fold_in_rate: 0.001,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub map: f64,
    pub num_classes: usize,
    pub train_entities: usize,
    pub test_entities: usize,
    pub zero_shot_entities: usize,
}

impl ClassificationReport {
    pub fn to_csv(&self) -> String {
        format!(
            "metric,target,setting,value\nmap,type,test,{}\ncount,entity,train,{}\ncount,entity,test,{}\ncount,entity,zero_shot,{}\n",
            self.map, self.train_entities, self.test_entities, self.zero_shot_entities
        )
    }
}

fn features_for(
    state: &TrainState,
    store: &TripleStore,
    zero_shot: &[ZeroShotEntity],
    name: &str,
    opts: &ClassifyOptions,
) -> Result<(Vec<f64>, bool)> {
    if let Some(id) = store.entities().id(name) {
        return Ok((build_features(state, id)?, false));
    }
    let zs = zero_shot
        .iter()
        .find(|z| z.name == name)
        .ok_or_else(|| Error::Feature(format!("entity {name:?} is unknown and undescribed")))?;
    let sem: &SemanticModel = state
        .semantics
        .as_ref()
        .ok_or_else(|| Error::Feature(format!("zero-shot entity {name:?} needs a topic model")))?;
    let s = match fold_in(&zs.row, sem, opts.fold_in_epochs, opts.fold_in_rate) {
        Ok(s) => s,
        Err(Error::FoldIn(msg)) => {
            log::warn!("fold-in failed for {name:?} ({msg}); using uniform semantic vector");
            uniform_vector(sem.dim())
        }
        Err(e) => return Err(e),
    };
    Ok((zero_shot_features(&s), true))
}

/// Trains the one-vs-rest classifier on `train` and reports MAP on `test`.
/// Test entities absent from the graph are resolved through `zero_shot`.
pub fn run_classification(
    state: &TrainState,
    store: &TripleStore,
    train: &TypedEntitySet,
    test: &TypedEntitySet,
    num_classes: usize,
    zero_shot: &[ZeroShotEntity],
    opts: &ClassifyOptions,
) -> Result<ClassificationReport> {
    if test.is_empty() {
        return Err(Error::Input("no labelled test entities".into()));
    }
    if train.is_empty() {
        return Err(Error::Input("no labelled training entities".into()));
    }
    let mut xs = Vec::with_capacity(train.len());
    let mut ys = Vec::with_capacity(train.len());
    for (name, types) in &train.entries {
        let (f, _) = features_for(state, store, &[], name, opts)?;
        xs.push(f);
        ys.push(types.clone());
    }
    let clf = train_ovr_classifier(&xs, &ys, num_classes, opts.logreg)?;
    let mut rankings = Vec::with_capacity(test.len());
    let mut truths = Vec::with_capacity(test.len());
    let mut zero_shot_count = 0;
    for (name, types) in &test.entries {
        let (f, zs) = features_for(state, store, zero_shot, name, opts)?;
        zero_shot_count += usize::from(zs);
        rankings.push(clf.rank_classes(&f));
        truths.push(types.clone());
    }
    Ok(ClassificationReport {
        map: compute_map(&rankings, &truths)?,
        num_classes,
        train_entities: train.len(),
        test_entities: test.len(),
        zero_shot_entities: zero_shot_count,
    })
}

// ---------------------------------------------------------------------------
// Model-comparison analyses

/// The rank-pair thresholds applied to the baseline model.
pub const RANK_PAIR_THRESHOLDS: [usize; 5] = [500, 1000, 2000, 3000, 5000];
/// The rank bound applied to the compared model.
pub const RANK_PAIR_BOUND: usize = 100;

/// Counts, per threshold `m`, the queries ranked at or beyond `m` by model A
/// and within `bound` by model B.
pub fn rank_pair_statistics(
    a: &[RankResult],
    b: &[RankResult],
    thresholds_a: &[usize],
    bound_b: usize,
    setting: RankSetting,
) -> Result<Vec<(usize, usize)>> {
    if a.len() != b.len()
        || a.iter()
            .zip(b)
            .any(|(x, y)| x.triple != y.triple || x.target != y.target)
    {
        return Err(Error::Input("rank lists cover different queries".into()));
    }
    Ok(thresholds_a
        .iter()
        .map(|&m| {
            let n = a
                .iter()
                .zip(b)
                .filter(|(x, y)| x.rank(setting) >= m && y.rank(setting) <= bound_b)
                .count();
            (m, n)
        })
        .collect())
}

/// A golden triple and a corruption the baseline scores no worse than it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HardPair {
    pub golden: Triple,
    pub negative: Triple,
}

/// For each triple in `split`, the head or tail corruption (not a known
/// fact) that the baseline ranks immediately above the golden triple, i.e.
/// the worst-scoring corruption whose score is still ≤ the golden score.
pub fn select_hard_pairs(baseline: &Scorer<'_>, store: &TripleStore, split: Split) -> Vec<HardPair> {
    store
        .split(split)
        .par_iter()
        .filter_map(|t| {
            let golden = baseline.score(t);
            let mut best: Option<(f64, Triple)> = None;
            for target in [Target::Head, Target::Tail] {
                let own = if target == Target::Head { t.head } else { t.tail };
                for c in 0..baseline.num_entities() {
                    if c == own {
                        continue;
                    }
                    let cand = substitute(t, target, c);
                    if store.contains(&cand) {
                        continue;
                    }
                    let s = baseline.score(&cand);
                    if s <= golden && best.is_none_or(|(b, _)| s > b) {
                        best = Some((s, cand));
                    }
                }
            }
            best.map(|(_, negative)| HardPair { golden: *t, negative })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
}

/// Score differences `f(negative) − f(golden)` under the compared model.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreDiffReport {
    pub differences: Vec<f64>,
    pub bins: Vec<HistogramBin>,
    /// Fraction of pairs with a strictly positive difference.
    pub success_rate: f64,
}

impl ScoreDiffReport {
    /// Histogram as `bin_left,bin_right,count` CSV.
    pub fn histogram_csv(&self) -> String {
        let mut s = String::from("bin_left,bin_right,count\n");
        for b in &self.bins {
            let _ = writeln!(s, "{},{},{}", b.left, b.right, b.count);
        }
        s
    }
}

/// Bins precomputed differences into contiguous `[left, right)` bins of `width`.
pub fn histogram_from_differences(differences: Vec<f64>, width: f64) -> Result<ScoreDiffReport> {
    if differences.is_empty() {
        return Err(Error::Input("no score pairs".into()));
    }
    if !(width > 0.0) {
        return Err(Error::Config("bin width must be positive".into()));
    }
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for d in &differences {
        *counts.entry((d / width).floor() as i64).or_default() += 1;
    }
    let lo = *counts.keys().next().expect("nonempty");
    let hi = *counts.keys().next_back().expect("nonempty");
    let bins = (lo..=hi)
        .map(|i| HistogramBin {
            left: i as f64 * width,
            right: (i + 1) as f64 * width,
            count: counts.get(&i).copied().unwrap_or(0),
        })
        .collect();
    let wins = differences.iter().filter(|&&d| d > 0.0).count();
    Ok(ScoreDiffReport {
        success_rate: wins as f64 / differences.len() as f64,
        differences,
        bins,
    })
}

/// Scores each hard pair with `scorer` and bins the differences.
pub fn score_difference_histogram(pairs: &[HardPair], scorer: &Scorer<'_>, width: f64) -> Result<ScoreDiffReport> {
    let diffs = pairs
        .iter()
        .map(|p| scorer.score(&p.negative) - scorer.score(&p.golden))
        .collect();
    histogram_from_differences(diffs, width)
}

pub fn write_rank_pairs<W: Write>(cells: &[(usize, usize)], bound: usize, mut w: W) -> std::io::Result<()> {
    writeln!(w, "threshold_a,bound_b,count")?;
    for (m, n) in cells {
        writeln!(w, "{m},{bound},{n}")?;
    }
    Ok(())
}
