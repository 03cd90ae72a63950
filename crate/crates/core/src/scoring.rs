//! Translation loss vectors, hyperplane projection and the two score functions.
//!
//! Scores follow the "smaller is more plausible" convention. For a triple
//! with loss vector `e = h + r − t` and unit normal `s` composed from the two
//! entities' semantic vectors, the projected score is
//! `‖e‖² − λ‖e − (sᵀe)s‖²`, which reduces to the plain translation score
//! `‖e‖²` at `λ = 0`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::kg_store::Triple;
use crate::linalg::{check_len, dot, Matrix};
use crate::topic_semantics::{read_matrix_file, write_row, SemanticModel};

const UNIT_TOLERANCE: f64 = 1e-9;

/// Dense entity and relation vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    entities: Matrix,
    relations: Matrix,
}

impl EmbeddingTable {
    pub fn new(entities: Matrix, relations: Matrix) -> Result<Self> {
        check_len(entities.cols(), relations.cols())?;
        Ok(EmbeddingTable { entities, relations })
    }

    /// Every coordinate uniform in `[−√(6/(2d)), √(6/(2d))]`.
    pub fn init_uniform<R: Rng>(num_entities: usize, num_relations: usize, dim: usize, rng: &mut R) -> Self {
        let bound = init_bound(dim);
        let mut draw = |n: usize| -> Vec<f64> { (0..n * dim).map(|_| rng.gen_range(-bound..=bound)).collect() };
        let entities = Matrix::from_vec(num_entities, dim, draw(num_entities)).expect("length matches by construction");
        let relations =
            Matrix::from_vec(num_relations, dim, draw(num_relations)).expect("length matches by construction");
        EmbeddingTable { entities, relations }
    }

    pub fn dim(&self) -> usize {
        self.entities.cols()
    }

    pub fn num_entities(&self) -> usize {
        self.entities.rows()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.rows()
    }

    pub fn entity(&self, e: usize) -> &[f64] {
        self.entities.row(e)
    }

    pub fn relation(&self, r: usize) -> &[f64] {
        self.relations.row(r)
    }

    pub fn entity_mut(&mut self, e: usize) -> &mut [f64] {
        self.entities.row_mut(e)
    }

    pub fn relation_mut(&mut self, r: usize) -> &mut [f64] {
        self.relations.row_mut(r)
    }

    pub fn entities(&self) -> &Matrix {
        &self.entities
    }

    pub fn relations(&self) -> &Matrix {
        &self.relations
    }

    pub fn all_finite(&self) -> bool {
        self.entities.all_finite() && self.relations.all_finite()
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {} {}", self.dim(), self.num_entities(), self.num_relations())?;
        for m in [&self.entities, &self.relations] {
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
        let ([dim, ne, nr], mut rows) = read_matrix_file(path)?;
        if rows.len() != ne + nr {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: rows.len() + 1,
                msg: format!("expected {} rows, found {}", ne + nr, rows.len()),
            });
        }
        let rels = rows.split_off(ne);
        Self::new(
            Matrix::from_vec(ne, dim, rows.concat())?,
            Matrix::from_vec(nr, dim, rels.concat())?,
        )
    }
}

/// Half-width of the initialization interval for dimension `dim`.
pub fn init_bound(dim: usize) -> f64 {
    (6.0 / (2.0 * dim as f64)).sqrt()
}

/// Balance factor between the full and the in-plane loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreParams {
    lambda: f64,
}

impl ScoreParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) {
            return Err(Error::Config(format!("lambda must lie in [0, 1), got {lambda}")));
        }
        Ok(ScoreParams { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Whether semantic vectors are frozen (Standard) or trained with the
/// embeddings (Joint).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrainMode {
    Standard,
    Joint,
}

impl std::str::FromStr for TrainMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" | "std" => Ok(TrainMode::Standard),
            "joint" => Ok(TrainMode::Joint),
            other => Err(Error::Config(format!("unknown mode {other:?}"))),
        }
    }
}

impl std::fmt::Display for TrainMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TrainMode::Standard => "standard",
            TrainMode::Joint => "joint",
        })
    }
}

/// `h + r − t`
pub fn loss_vector(h: &[f64], r: &[f64], t: &[f64]) -> Result<Vec<f64>> {
    check_len(h.len(), r.len())?;
    check_len(h.len(), t.len())?;
    Ok(h.iter().zip(r).zip(t).map(|((a, b), c)| a + b - c).collect())
}

fn check_unit(s: &[f64]) -> Result<()> {
    let n = dot(s, s).sqrt();
    if (n - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::Contract(format!("normal vector has length {n}, expected 1")));
    }
    Ok(())
}

/// Component of `e` inside the hyperplane with unit normal `s`: `e − (sᵀe)s`.
pub fn project_onto_hyperplane(e: &[f64], s: &[f64]) -> Result<Vec<f64>> {
    check_len(e.len(), s.len())?;
    check_unit(s)?;
    let a = dot(s, e);
    Ok(e.iter().zip(s).map(|(x, y)| x - a * y).collect())
}

/// `‖h + r − t‖²`
pub fn transe_score(h: &[f64], r: &[f64], t: &[f64]) -> Result<f64> {
    check_len(h.len(), r.len())?;
    check_len(h.len(), t.len())?;
    Ok(transe_raw(h, r, t))
}

/// `−λ‖e − (sᵀe)s‖² + ‖e‖²` with `e = h + r − t`.
pub fn ssp_score(h: &[f64], r: &[f64], t: &[f64], s: &[f64], params: ScoreParams) -> Result<f64> {
    check_len(h.len(), r.len())?;
    check_len(h.len(), t.len())?;
    check_len(h.len(), s.len())?;
    check_unit(s)?;
    Ok(ssp_raw(h, r, t, |k| s[k], params.lambda))
}

#[inline]
fn transe_raw(h: &[f64], r: &[f64], t: &[f64]) -> f64 {
    let mut acc = 0.0;
    for k in 0..h.len() {
        let e = h[k] + r[k] - t[k];
        acc += e * e;
    }
    acc
}

/// Shared arithmetic for every projected-score evaluation, so that scores
/// computed through the checked API and through [`Scorer`] agree bitwise.
#[inline]
fn ssp_raw(h: &[f64], r: &[f64], t: &[f64], s: impl Fn(usize) -> f64, lambda: f64) -> f64 {
    let d = h.len();
    let mut a = 0.0;
    let mut e_sq = 0.0;
    for k in 0..d {
        let e = h[k] + r[k] - t[k];
        a += s(k) * e;
        e_sq += e * e;
    }
    let mut p_sq = 0.0;
    for k in 0..d {
        let e = h[k] + r[k] - t[k];
        let p = e - a * s(k);
        p_sq += p * p;
    }
    -lambda * p_sq + e_sq
}

/// `‖s_h + s_t‖`, or `None` when the sum vanishes.
#[inline]
fn pair_norm(s_h: &[f64], s_t: &[f64]) -> Option<f64> {
    let n: f64 = s_h
        .iter()
        .zip(s_t)
        .map(|(a, b)| {
            let u = a + b;
            u * u
        })
        .sum::<f64>()
        .sqrt();
    (n > 0.0).then_some(n)
}

/// Partial derivatives of the projected score.
#[derive(Debug, Clone, PartialEq)]
pub struct SspGradients {
    pub h: Vec<f64>,
    pub r: Vec<f64>,
    pub t: Vec<f64>,
    /// Zero in Standard mode. Equal to `s_t` because the composition is symmetric.
    pub s_h: Vec<f64>,
    pub s_t: Vec<f64>,
}

/// Analytic gradients of the projected score. In Joint mode the chain rule
/// runs through the normalization `s = (s_h + s_t)/‖s_h + s_t‖`; when the
/// sum vanishes the uniform normal is used and semantic gradients are zero.
pub fn ssp_gradients(
    h: &[f64],
    r: &[f64],
    t: &[f64],
    s_h: &[f64],
    s_t: &[f64],
    params: ScoreParams,
    mode: TrainMode,
) -> Result<SspGradients> {
    let d = h.len();
    for v in [r, t, s_h, s_t] {
        check_len(d, v.len())?;
    }
    let mut grads = SspGradients {
        h: vec![0.0; d],
        r: vec![0.0; d],
        t: vec![0.0; d],
        s_h: vec![0.0; d],
        s_t: vec![0.0; d],
    };
    let norm = pair_norm(s_h, s_t);
    let s: Vec<f64> = match norm {
        Some(n) => s_h.iter().zip(s_t).map(|(a, b)| (a + b) / n).collect(),
        None => vec![1.0 / (d as f64).sqrt(); d],
    };
    let lambda = params.lambda;
    let e: Vec<f64> = (0..d).map(|k| h[k] + r[k] - t[k]).collect();
    let a = dot(&s, &e);
    for k in 0..d {
        let p = e[k] - a * s[k];
        let g = 2.0 * e[k] - 2.0 * lambda * p;
        grads.h[k] = g;
        grads.r[k] = g;
        grads.t[k] = -g;
        if let (TrainMode::Joint, Some(n)) = (mode, norm) {
            let gs = 2.0 * lambda * a / n * p;
            grads.s_h[k] = gs;
            grads.s_t[k] = gs;
        }
    }
    Ok(grads)
}

/// Which score function a trained model uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    TransE,
    SspStandard,
    SspJoint,
}

impl ModelKind {
    pub fn uses_semantics(self) -> bool {
        !matches!(self, ModelKind::TransE)
    }

    /// Training mode for semantic parameters; TransE has none and reports Standard.
    pub fn train_mode(self) -> TrainMode {
        match self {
            ModelKind::SspJoint => TrainMode::Joint,
            _ => TrainMode::Standard,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::TransE => "transe",
            ModelKind::SspStandard => "ssp-std",
            ModelKind::SspJoint => "ssp-joint",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "transe" => Ok(ModelKind::TransE),
            "ssp-std" => Ok(ModelKind::SspStandard),
            "ssp-joint" => Ok(ModelKind::SspJoint),
            other => Err(Error::Config(format!("unknown model {other:?}"))),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Scores id triples against trained parameters.
#[derive(Debug, Clone, Copy)]
pub struct Scorer<'a> {
    embeddings: &'a EmbeddingTable,
    semantics: Option<(&'a SemanticModel, ScoreParams)>,
}

impl<'a> Scorer<'a> {
    pub fn transe(embeddings: &'a EmbeddingTable) -> Self {
        Scorer {
            embeddings,
            semantics: None,
        }
    }

    pub fn ssp(embeddings: &'a EmbeddingTable, semantics: &'a SemanticModel, params: ScoreParams) -> Result<Self> {
        check_len(embeddings.dim(), semantics.dim())?;
        check_len(embeddings.num_entities(), semantics.num_entities())?;
        Ok(Scorer {
            embeddings,
            semantics: Some((semantics, params)),
        })
    }

    pub fn embeddings(&self) -> &'a EmbeddingTable {
        self.embeddings
    }

    pub fn num_entities(&self) -> usize {
        self.embeddings.num_entities()
    }

    pub fn num_relations(&self) -> usize {
        self.embeddings.num_relations()
    }

    #[inline]
    pub fn score(&self, t: &Triple) -> f64 {
        let h = self.embeddings.entity(t.head);
        let r = self.embeddings.relation(t.relation);
        let tv = self.embeddings.entity(t.tail);
        match self.semantics {
            None => transe_raw(h, r, tv),
            Some((sem, params)) => {
                let s_h = sem.entity(t.head);
                let s_t = sem.entity(t.tail);
                match pair_norm(s_h, s_t) {
                    Some(n) => ssp_raw(h, r, tv, |k| (s_h[k] + s_t[k]) / n, params.lambda),
                    None => {
                        let u = 1.0 / (h.len() as f64).sqrt();
                        ssp_raw(h, r, tv, |_| u, params.lambda)
                    }
                }
            }
        }
    }
}
