//! Nonnegative topic model over entity descriptions.
//!
//! Each described entity gets a nonnegative semantic vector `s_e` and each word
//! a nonnegative topic vector `w`, fitted so that `s_eᵀw` approximates the
//! count of `w` in the entity's description. Only stored (nonzero) cells enter
//! the loss. Nonnegativity is kept by clamping after every SGD step.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kg_store::DescriptionCorpus;
use crate::linalg::{check_len, dot, Matrix};

/// Semantic vectors for entities and topic vectors for words.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticModel {
    entity_sem: Matrix,
    word_topics: Matrix,
}

impl SemanticModel {
    pub fn new(entity_sem: Matrix, word_topics: Matrix) -> Result<Self> {
        check_len(entity_sem.cols(), word_topics.cols())?;
        if entity_sem.min_value() < 0.0 || word_topics.min_value() < 0.0 {
            return Err(Error::Contract("semantic model entries must be nonnegative".into()));
        }
        Ok(SemanticModel {
            entity_sem,
            word_topics,
        })
    }

    pub fn dim(&self) -> usize {
        self.entity_sem.cols()
    }

    pub fn num_entities(&self) -> usize {
        self.entity_sem.rows()
    }

    pub fn num_words(&self) -> usize {
        self.word_topics.rows()
    }

    pub fn entity(&self, e: usize) -> &[f64] {
        self.entity_sem.row(e)
    }

    pub fn word(&self, w: usize) -> &[f64] {
        self.word_topics.row(w)
    }

    pub fn entity_sem(&self) -> &Matrix {
        &self.entity_sem
    }

    pub fn word_topics(&self) -> &Matrix {
        &self.word_topics
    }

    /// Adds `delta` to `s_e` and clamps the result at zero.
    pub(crate) fn update_entity(&mut self, e: usize, alpha: f64, delta: &[f64]) {
        for (x, d) in self.entity_sem.row_mut(e).iter_mut().zip(delta) {
            *x = (*x + alpha * d).max(0.0);
        }
    }

    /// Smallest entry across both factor matrices.
    pub fn min_entry(&self) -> f64 {
        self.entity_sem.min_value().min(self.word_topics.min_value())
    }

    pub fn all_finite(&self) -> bool {
        self.entity_sem.all_finite() && self.word_topics.all_finite()
    }

    fn check_corpus(&self, corpus: &DescriptionCorpus) -> Result<()> {
        check_len(self.num_entities(), corpus.num_entities())?;
        check_len(self.num_words(), corpus.num_words())
    }

    /// Σ over stored cells of `(C_{e,w} − s_eᵀw)²`.
    pub fn topic_loss(&self, corpus: &DescriptionCorpus) -> Result<f64> {
        self.check_corpus(corpus)?;
        Ok(corpus
            .cells()
            .map(|(e, w, c)| {
                let r = c as f64 - dot(self.entity(e), self.word(w));
                r * r
            })
            .sum())
    }

    /// Loss of a single count row against a candidate semantic vector.
    pub fn row_loss(&self, s: &[f64], row: &[(usize, u32)]) -> f64 {
        row.iter()
            .map(|&(w, c)| {
                let r = c as f64 - dot(s, self.word(w));
                r * r
            })
            .sum()
    }

    /// One projected SGD step on cell `(e, w, count)`.
    pub fn topic_sgd_step(&mut self, e: usize, w: usize, count: u32, rate: f64) {
        let d = self.dim();
        let s_row = self.entity_sem.row_mut(e);
        let w_row = self.word_topics.row_mut(w);
        let residual = count as f64 - dot(s_row, w_row);
        let step = 2.0 * rate * residual;
        for k in 0..d {
            let (s_old, w_old) = (s_row[k], w_row[k]);
            s_row[k] = (s_old + step * w_old).max(0.0);
            w_row[k] = (w_old + step * s_old).max(0.0);
        }
    }

    /// One pass over every stored cell in a shuffled order.
    pub fn nmf_epoch<R: Rng>(&mut self, corpus: &DescriptionCorpus, rate: f64, rng: &mut R) {
        let mut cells: Vec<(usize, usize, u32)> = corpus.cells().collect();
        cells.shuffle(rng);
        for (e, w, c) in cells {
            self.topic_sgd_step(e, w, c, rate);
        }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {} {}", self.dim(), self.num_entities(), self.num_words())?;
        for m in [&self.entity_sem, &self.word_topics] {
            for row in m.iter_rows() {
                write_row(&mut w, row)?;
            }
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let (header, mut rows) = read_matrix_file(path)?;
        let [dim, ne, nw] = header;
        if rows.len() != ne + nw {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: rows.len() + 1,
                msg: format!("expected {} rows, found {}", ne + nw, rows.len()),
            });
        }
        let words = rows.split_off(ne);
        let ent = Matrix::from_vec(ne, dim, rows.concat())?;
        let wt = Matrix::from_vec(nw, dim, words.concat())?;
        Self::new(ent, wt)
    }
}

pub(crate) fn write_row<W: Write>(w: &mut W, row: &[f64]) -> std::io::Result<()> {
    let mut first = true;
    for x in row {
        if !first {
            w.write_all(b" ")?;
        }
        first = false;
        // Display for f64 prints the shortest string that parses back exactly.
        write!(w, "{x}")?;
    }
    w.write_all(b"\n")
}

/// Reads a `a b c` header followed by rows of space-separated floats. Every
/// row must have exactly `a` columns.
pub(crate) fn read_matrix_file(path: &Path) -> Result<([usize; 3], Vec<Vec<f64>>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let perr = |line: usize, msg: String| Error::Parse {
        path: path.display().to_string(),
        line,
        msg,
    };
    let header = lines
        .next()
        .ok_or_else(|| perr(1, "missing header".into()))?
        .map_err(|e| Error::io(path, e))?;
    let nums: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| perr(1, format!("bad header field {t:?}"))))
        .collect::<Result<_>>()?;
    let header: [usize; 3] = nums
        .try_into()
        .map_err(|_| perr(1, "header must have three fields".into()))?;
    let dim = header[0];
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(' ')
            .map(|t| t.parse().map_err(|_| perr(i + 2, format!("bad float {t:?}"))))
            .collect::<Result<_>>()?;
        if row.len() != dim {
            return Err(perr(i + 2, format!("expected {dim} columns, found {}", row.len())));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// Gradients of `(count − sᵀw)²` with respect to `s` and `w`.
pub fn cell_gradient(s: &[f64], w: &[f64], count: f64) -> (Vec<f64>, Vec<f64>) {
    let r = count - dot(s, w);
    (
        w.iter().map(|x| -2.0 * r * x).collect(),
        s.iter().map(|x| -2.0 * r * x).collect(),
    )
}

/// Uniform semantic vector given to entities without usable descriptions.
pub fn uniform_vector(dim: usize) -> Vec<f64> {
    vec![1.0 / dim as f64; dim]
}

/// Fits a fresh topic model to `corpus` by projected SGD.
///
/// Entries start uniform in `(0, 1/√dim]`; entities with no stored cells are
/// set to the uniform vector and never move. Deterministic for a given seed.
pub fn pretrain_nmf(
    corpus: &DescriptionCorpus,
    dim: usize,
    epochs: usize,
    rate: f64,
    seed: u64,
) -> Result<SemanticModel> {
    if epochs == 0 {
        return Err(Error::Config("NMF pre-training needs at least one epoch".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = init_semantics(corpus, dim, rate, &mut rng)?;
    for _ in 0..epochs {
        model.nmf_epoch(corpus, rate, &mut rng);
    }
    Ok(model)
}

/// The starting point of [`pretrain_nmf`], exposed so callers can trace the
/// loss from the first epoch.
pub fn init_semantics<R: Rng>(corpus: &DescriptionCorpus, dim: usize, rate: f64, rng: &mut R) -> Result<SemanticModel> {
    if corpus.is_empty() {
        return Err(Error::Config("description corpus has no counts".into()));
    }
    if dim == 0 {
        return Err(Error::Config("dimension must be positive".into()));
    }
    if !(rate > 0.0) {
        return Err(Error::Config("NMF rate must be positive".into()));
    }
    let scale = 1.0 / (dim as f64).sqrt();
    let mut draw = |n: usize| -> Vec<f64> {
        // gen() is in [0, 1), so 1 - gen() is in (0, 1]
        (0..n * dim).map(|_| scale * (1.0 - rng.gen::<f64>())).collect()
    };
    let mut ent = Matrix::from_vec(corpus.num_entities(), dim, draw(corpus.num_entities()))?;
    let words = Matrix::from_vec(corpus.num_words(), dim, draw(corpus.num_words()))?;
    let uniform = uniform_vector(dim);
    for e in 0..corpus.num_entities() {
        if corpus.row(e).is_empty() {
            ent.row_mut(e).copy_from_slice(&uniform);
        }
    }
    SemanticModel::new(ent, words)
}

fn check_semantic_pair(s_h: &[f64], s_t: &[f64]) -> Result<()> {
    check_len(s_h.len(), s_t.len())?;
    if s_h.iter().chain(s_t).any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::Contract(
            "semantic vectors must be finite and nonnegative".into(),
        ));
    }
    Ok(())
}

/// `(s_h + s_t)` rescaled to sum to one.
pub fn compose_topics(s_h: &[f64], s_t: &[f64]) -> Result<Vec<f64>> {
    check_semantic_pair(s_h, s_t)?;
    let sum: Vec<f64> = s_h.iter().zip(s_t).map(|(a, b)| a + b).collect();
    let total: f64 = sum.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateInput("both semantic vectors are zero".into()));
    }
    Ok(sum.into_iter().map(|x| x / total).collect())
}

/// `(s_h + s_t)` rescaled to unit Euclidean length: the hyperplane normal.
pub fn normal_vector(s_h: &[f64], s_t: &[f64]) -> Result<Vec<f64>> {
    check_semantic_pair(s_h, s_t)?;
    let mut sum: Vec<f64> = s_h.iter().zip(s_t).map(|(a, b)| a + b).collect();
    let norm = dot(&sum, &sum).sqrt();
    if norm <= 0.0 {
        return Err(Error::DegenerateInput("both semantic vectors are zero".into()));
    }
    for x in &mut sum {
        *x /= norm;
    }
    Ok(sum)
}

/// Infers a semantic vector for a new description against frozen word topics.
///
/// Starts from the uniform vector and runs `epochs` passes of projected SGD
/// over the row's cells, updating only the entity vector.
pub fn fold_in(row: &[(usize, u32)], model: &SemanticModel, epochs: usize, rate: f64) -> Result<Vec<f64>> {
    if row.is_empty() {
        return Err(Error::FoldIn("description has no in-vocabulary words".into()));
    }
    if let Some(&(w, _)) = row.iter().find(|&&(w, _)| w >= model.num_words()) {
        return Err(Error::FoldIn(format!("word id {w} outside the topic model")));
    }
    let mut s = uniform_vector(model.dim());
    for _ in 0..epochs {
        for &(w, c) in row {
            let wv = model.word(w);
            let step = 2.0 * rate * (c as f64 - dot(&s, wv));
            for (x, wk) in s.iter_mut().zip(wv) {
                *x = (*x + step * wk).max(0.0);
            }
        }
    }
    Ok(s)
}
