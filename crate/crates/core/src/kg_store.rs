//! Triple and description ingestion.
//!
//! A [`TripleStore`] holds integer-encoded train/valid/test splits, the entity
//! and relation vocabularies, the membership index used for filtered ranking
//! and negative rejection, and the per-relation head/tail statistics that
//! drive Bernoulli corruption. A [`DescriptionCorpus`] holds the sparse
//! entity-by-word count matrix built from entity descriptions.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// An integer-encoded fact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub head: usize,
    pub relation: usize,
    pub tail: usize,
}

impl Triple {
    pub fn new(head: usize, relation: usize, tail: usize) -> Self {
        Triple { head, relation, tail }
    }
}

impl std::fmt::Display for Triple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.head, self.relation, self.tail)
    }
}

/// Bidirectional name/id mapping. Ids are assigned densely in first-seen order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocab {
    names: Vec<String>,
    ids: HashMap<String, usize>,
}

impl Vocab {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vocabulary whose ids are the positions in `names`.
    pub fn from_names(names: Vec<String>) -> Result<Self> {
        let mut ids = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if ids.insert(n.clone(), i).is_some() {
                return Err(Error::Vocabulary(format!("duplicate symbol {n:?}")));
            }
        }
        Ok(Vocab { names, ids })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get_or_insert(&mut self, name: &str) -> usize {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_owned());
        self.ids.insert(name.to_owned(), id);
        id
    }

    /// Writes the `id<TAB>name` dump.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (i, n) in self.names.iter().enumerate() {
            writeln!(w, "{i}\t{n}")?;
        }
        Ok(())
    }

    /// Reads an `id<TAB>name` dump; ids must be `0..n` in order.
    pub fn read_tsv(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut names = Vec::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let parse_err = |msg: &str| Error::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                msg: msg.to_owned(),
            };
            let (id, name) = line.split_once('\t').ok_or_else(|| parse_err("expected id<TAB>name"))?;
            let id: usize = id.parse().map_err(|_| parse_err("bad id"))?;
            if id != names.len() {
                return Err(parse_err("ids must be dense and in order"));
            }
            names.push(name.to_owned());
        }
        Self::from_names(names)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VocabMode {
    /// Unknown symbols are appended to the vocabulary.
    Build,
    /// Unknown symbols are an error.
    Reuse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

    fn index(self) -> usize {
        match self {
            Split::Train => 0,
            Split::Valid => 1,
            Split::Test => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "valid" => Ok(Split::Valid),
            "test" => Ok(Split::Test),
            other => Err(Error::Config(format!("unknown split {other:?}"))),
        }
    }
}

/// Average tails per head (`tph`) and heads per tail (`hpt`) of one relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelStats {
    pub tph: f64,
    pub hpt: f64,
}

/// Integer-encoded knowledge graph with its filter index and relation statistics.
#[derive(Debug, Clone)]
pub struct TripleStore {
    entities: Vocab,
    relations: Vocab,
    splits: [Vec<Triple>; 3],
    filter: HashSet<Triple>,
    rel_stats: Vec<Option<RelStats>>,
}

impl TripleStore {
    /// Loads a single triple file as the training split, building fresh vocabularies.
    pub fn load_triples(path: impl AsRef<Path>) -> Result<Self> {
        let mut b = TripleStoreBuilder::new();
        b.load_split(path, Split::Train, VocabMode::Build)?;
        Ok(b.build())
    }

    /// Assembles a store from already-encoded parts, checking id bounds.
    pub fn from_parts(
        entities: Vocab,
        relations: Vocab,
        train: Vec<Triple>,
        valid: Vec<Triple>,
        test: Vec<Triple>,
    ) -> Result<Self> {
        let ne = entities.len();
        let nr = relations.len();
        for t in train.iter().chain(&valid).chain(&test) {
            if t.head >= ne || t.tail >= ne || t.relation >= nr {
                return Err(Error::Vocabulary(format!(
                    "triple {t} out of bounds for {ne} entities / {nr} relations"
                )));
            }
        }
        Ok(Self::assemble(entities, relations, [train, valid, test]))
    }

    fn assemble(entities: Vocab, relations: Vocab, splits: [Vec<Triple>; 3]) -> Self {
        let filter: HashSet<Triple> = splits.iter().flatten().copied().collect();
        let rel_stats = compute_rel_stats(relations.len(), &splits[0]);
        TripleStore {
            entities,
            relations,
            splits,
            filter,
            rel_stats,
        }
    }

    pub fn entities(&self) -> &Vocab {
        &self.entities
    }

    pub fn relations(&self) -> &Vocab {
        &self.relations
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn split(&self, split: Split) -> &[Triple] {
        &self.splits[split.index()]
    }

    pub fn train(&self) -> &[Triple] {
        self.split(Split::Train)
    }

    pub fn valid(&self) -> &[Triple] {
        self.split(Split::Valid)
    }

    pub fn test(&self) -> &[Triple] {
        self.split(Split::Test)
    }

    /// Membership in train ∪ valid ∪ test.
    #[inline]
    pub fn contains(&self, t: &Triple) -> bool {
        self.filter.contains(t)
    }

    pub fn filter_len(&self) -> usize {
        self.filter.len()
    }

    pub fn rel_stats(&self, relation: usize) -> Option<RelStats> {
        self.rel_stats.get(relation).copied().flatten()
    }

    /// Probability of corrupting the head of a triple with this relation,
    /// `tph / (tph + hpt)`.
    pub fn corruption_probability(&self, relation: usize) -> Result<f64> {
        let s = self
            .rel_stats(relation)
            .ok_or_else(|| Error::Statistics(format!("relation {relation} has no training occurrences")))?;
        Ok(s.tph / (s.tph + s.hpt))
    }

    pub fn decode(&self, t: &Triple) -> (&str, &str, &str) {
        (
            self.entities.name(t.head),
            self.relations.name(t.relation),
            self.entities.name(t.tail),
        )
    }

    /// Writes a split as `head<TAB>relation<TAB>tail` ids.
    pub fn write_encoded<W: Write>(&self, split: Split, mut w: W) -> std::io::Result<()> {
        for t in self.split(split) {
            writeln!(w, "{}\t{}\t{}", t.head, t.relation, t.tail)?;
        }
        Ok(())
    }
}

fn compute_rel_stats(num_relations: usize, train: &[Triple]) -> Vec<Option<RelStats>> {
    // distinct (h, t) pairs per relation
    let mut pairs: Vec<HashSet<(usize, usize)>> = vec![HashSet::new(); num_relations];
    for t in train {
        pairs[t.relation].insert((t.head, t.tail));
    }
    pairs
        .into_iter()
        .map(|set| {
            if set.is_empty() {
                return None;
            }
            let heads: HashSet<usize> = set.iter().map(|&(h, _)| h).collect();
            let tails: HashSet<usize> = set.iter().map(|&(_, t)| t).collect();
            let n = set.len() as f64;
            Some(RelStats {
                tph: n / heads.len() as f64,
                hpt: n / tails.len() as f64,
            })
        })
        .collect()
}

/// Incrementally loads splits that share vocabularies.
#[derive(Debug, Default)]
pub struct TripleStoreBuilder {
    entities: Vocab,
    relations: Vocab,
    splits: [Vec<Triple>; 3],
}

impl TripleStoreBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts from existing vocabularies (for `VocabMode::Reuse`).
    pub fn with_vocabs(entities: Vocab, relations: Vocab) -> Self {
        TripleStoreBuilder {
            entities,
            relations,
            splits: Default::default(),
        }
    }

    pub fn load_split(&mut self, path: impl AsRef<Path>, split: Split, mode: VocabMode) -> Result<&mut Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        self.read_split(BufReader::new(file), &path.display().to_string(), split, mode)
    }

    /// Parses TSV triples from any reader; `source` names it in diagnostics.
    pub fn read_split<R: BufRead>(
        &mut self,
        reader: R,
        source: &str,
        split: Split,
        mode: VocabMode,
    ) -> Result<&mut Self> {
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(source, e))?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    path: source.to_owned(),
                    line: lineno + 1,
                    msg: format!("expected 3 tab-separated fields, found {}", fields.len()),
                });
            }
            self.push(split, fields[0], fields[1], fields[2], mode)
                .map_err(|e| match e {
                    Error::Vocabulary(msg) => Error::Vocabulary(format!("{source}:{}: {msg}", lineno + 1)),
                    other => other,
                })?;
        }
        Ok(self)
    }

    pub fn push(&mut self, split: Split, head: &str, relation: &str, tail: &str, mode: VocabMode) -> Result<Triple> {
        let t = match mode {
            VocabMode::Build => Triple::new(
                self.entities.get_or_insert(head),
                self.relations.get_or_insert(relation),
                self.entities.get_or_insert(tail),
            ),
            VocabMode::Reuse => {
                let ent = |n: &str| {
                    self.entities
                        .id(n)
                        .ok_or_else(|| Error::Vocabulary(format!("unknown entity {n:?}")))
                };
                let h = ent(head)?;
                let t = ent(tail)?;
                let r = self
                    .relations
                    .id(relation)
                    .ok_or_else(|| Error::Vocabulary(format!("unknown relation {relation:?}")))?;
                Triple::new(h, r, t)
            }
        };
        self.splits[split.index()].push(t);
        Ok(t)
    }

    pub fn build(self) -> TripleStore {
        TripleStore::assemble(self.entities, self.relations, self.splits)
    }
}

const STOPWORDS: &[&str] = &[
    "a", "about", "after", "all", "also", "an", "and", "any", "are", "as", "at", "be", "been", "but", "by", "can",
    "could", "did", "do", "does", "for", "from", "had", "has", "have", "he", "her", "his", "how", "if", "in", "into",
    "is", "it", "its", "may", "more", "most", "no", "not", "of", "on", "one", "or", "other", "our", "she", "so",
    "some", "such", "than", "that", "the", "their", "them", "then", "there", "these", "they", "this", "those", "to",
    "two", "was", "we", "were", "what", "when", "where", "which", "while", "who", "will", "with", "would", "you",
];

/// Bag-of-words preprocessing options.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenizerOptions {
    /// Words with total corpus frequency below this are dropped.
    pub min_count: usize,
    /// Tokens shorter than this many characters are dropped.
    pub min_len: usize,
    pub remove_stopwords: bool,
}

impl Default for TokenizerOptions {
    fn default() -> Self {
        TokenizerOptions {
            min_count: 5,
            min_len: 2,
            remove_stopwords: false,
        }
    }
}

impl TokenizerOptions {
    /// Lowercases and splits on non-alphanumeric characters.
    pub fn tokenize<'a>(&'a self, text: &'a str) -> impl Iterator<Item = String> + 'a {
        text.split(|c: char| !c.is_alphanumeric())
            .filter(move |tok| tok.chars().count() >= self.min_len)
            .map(str::to_lowercase)
            .filter(move |tok| !(self.remove_stopwords && STOPWORDS.contains(&tok.as_str())))
    }
}

/// Sparse row of `(word id, count)` pairs sorted by word id; every count ≥ 1.
pub type CountRow = Vec<(usize, u32)>;

/// Entity-by-word count matrix over a word vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptionCorpus {
    words: Vocab,
    rows: Vec<CountRow>,
    described: Vec<bool>,
    num_cells: usize,
}

impl DescriptionCorpus {
    /// An empty corpus over `num_entities` undescribed entities.
    pub fn empty(num_entities: usize) -> Self {
        DescriptionCorpus {
            words: Vocab::new(),
            rows: vec![Vec::new(); num_entities],
            described: vec![false; num_entities],
            num_cells: 0,
        }
    }

    /// Reads `entity<TAB>text` lines. Every entity must already be in `store`.
    pub fn load(path: impl AsRef<Path>, store: &TripleStore, opts: &TokenizerOptions) -> Result<Self> {
        let path = path.as_ref();
        let source = path.display().to_string();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut docs = Vec::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let Some((name, text)) = parse_description_line(&line, &source, lineno + 1)? else {
                continue;
            };
            let id = store
                .entities()
                .id(name)
                .ok_or_else(|| Error::Vocabulary(format!("{source}:{}: unknown entity {name:?}", lineno + 1)))?;
            docs.push((id, text.to_owned()));
        }
        Ok(Self::from_texts(
            store.num_entities(),
            docs.iter().map(|(e, t)| (*e, t.as_str())),
            opts,
        ))
    }

    /// Builds the corpus from `(entity id, text)` pairs. Repeated entities
    /// accumulate counts.
    pub fn from_texts<'a>(
        num_entities: usize,
        docs: impl IntoIterator<Item = (usize, &'a str)>,
        opts: &TokenizerOptions,
    ) -> Self {
        let mut described = vec![false; num_entities];
        let mut tokenized: Vec<(usize, Vec<String>)> = Vec::new();
        let mut freq: HashMap<String, usize> = HashMap::new();
        for (e, text) in docs {
            described[e] = true;
            let toks: Vec<String> = opts.tokenize(text).collect();
            for t in &toks {
                *freq.entry(t.clone()).or_default() += 1;
            }
            tokenized.push((e, toks));
        }

        let mut words = Vocab::new();
        let mut maps: Vec<HashMap<usize, u32>> = vec![HashMap::new(); num_entities];
        for (e, toks) in &tokenized {
            for t in toks {
                if freq[t] < opts.min_count {
                    continue;
                }
                let w = words.get_or_insert(t);
                *maps[*e].entry(w).or_default() += 1;
            }
        }
        let rows: Vec<CountRow> = maps
            .into_iter()
            .map(|m| {
                let mut row: CountRow = m.into_iter().collect();
                row.sort_unstable();
                row
            })
            .collect();
        let num_cells = rows.iter().map(Vec::len).sum();
        DescriptionCorpus {
            words,
            rows,
            described,
            num_cells,
        }
    }

    /// Reassembles a corpus from stored cells `(entity, word, count)`.
    pub fn from_cells(
        num_entities: usize,
        words: Vocab,
        cells: impl IntoIterator<Item = (usize, usize, u32)>,
        described: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let mut rows: Vec<CountRow> = vec![Vec::new(); num_entities];
        let mut flags = vec![false; num_entities];
        for e in described {
            if e >= num_entities {
                return Err(Error::Vocabulary(format!("described entity {e} out of bounds")));
            }
            flags[e] = true;
        }
        for (e, w, c) in cells {
            if e >= num_entities || w >= words.len() {
                return Err(Error::Vocabulary(format!("cell ({e}, {w}) out of bounds")));
            }
            if c == 0 {
                return Err(Error::Input(format!("cell ({e}, {w}) has zero count")));
            }
            rows[e].push((w, c));
            flags[e] = true;
        }
        for row in &mut rows {
            row.sort_unstable();
            if row.windows(2).any(|p| p[0].0 == p[1].0) {
                return Err(Error::Input("duplicate count cell".into()));
            }
        }
        let num_cells = rows.iter().map(Vec::len).sum();
        Ok(DescriptionCorpus {
            words,
            rows,
            described: flags,
            num_cells,
        })
    }

    pub fn words(&self) -> &Vocab {
        &self.words
    }

    pub fn num_entities(&self) -> usize {
        self.rows.len()
    }

    pub fn num_words(&self) -> usize {
        self.words.len()
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    pub fn is_empty(&self) -> bool {
        self.num_cells == 0
    }

    pub fn row(&self, entity: usize) -> &[(usize, u32)] {
        &self.rows[entity]
    }

    pub fn count(&self, entity: usize, word: usize) -> u32 {
        let row = &self.rows[entity];
        row.binary_search_by_key(&word, |&(w, _)| w)
            .map(|i| row[i].1)
            .unwrap_or(0)
    }

    pub fn is_described(&self, entity: usize) -> bool {
        self.described[entity]
    }

    pub fn described(&self) -> impl Iterator<Item = usize> + '_ {
        self.described.iter().enumerate().filter_map(|(e, &d)| d.then_some(e))
    }

    /// All stored cells `(entity, word, count)` in entity-major order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(e, row)| row.iter().map(move |&(w, c)| (e, w, c)))
    }

    /// Counts `text` against the frozen word vocabulary; unknown words are dropped.
    pub fn encode_text(&self, text: &str, opts: &TokenizerOptions) -> CountRow {
        let mut m: HashMap<usize, u32> = HashMap::new();
        for tok in opts.tokenize(text) {
            if let Some(w) = self.words.id(&tok) {
                *m.entry(w).or_default() += 1;
            }
        }
        let mut row: CountRow = m.into_iter().collect();
        row.sort_unstable();
        row
    }

    /// Writes `entity<TAB>word<TAB>count` cells.
    pub fn write_cells<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (e, word, c) in self.cells() {
            writeln!(w, "{e}\t{word}\t{c}")?;
        }
        Ok(())
    }
}

/// An entity outside the triple store, known only by its description.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroShotEntity {
    pub name: String,
    pub row: CountRow,
}

/// Reads `entity<TAB>text` descriptions for entities that are not part of the
/// graph, counting words against `corpus`'s frozen vocabulary.
pub fn load_zero_shot(
    path: impl AsRef<Path>,
    corpus: &DescriptionCorpus,
    opts: &TokenizerOptions,
) -> Result<Vec<ZeroShotEntity>> {
    let path = path.as_ref();
    let source = path.display().to_string();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut order: Vec<String> = Vec::new();
    let mut texts: HashMap<String, String> = HashMap::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let Some((name, text)) = parse_description_line(&line, &source, lineno + 1)? else {
            continue;
        };
        let buf = texts.entry(name.to_owned()).or_insert_with(|| {
            order.push(name.to_owned());
            String::new()
        });
        buf.push(' ');
        buf.push_str(text);
    }
    Ok(order
        .into_iter()
        .map(|name| {
            let row = corpus.encode_text(&texts[&name], opts);
            ZeroShotEntity { name, row }
        })
        .collect())
}

fn parse_description_line<'a>(line: &'a str, source: &str, lineno: usize) -> Result<Option<(&'a str, &'a str)>> {
    let line = line.trim_end_matches('\r');
    if line.is_empty() {
        return Ok(None);
    }
    let (name, text) = line.split_once('\t').ok_or_else(|| Error::Parse {
        path: source.to_owned(),
        line: lineno,
        msg: "expected entity<TAB>text".into(),
    })?;
    if text.contains('\t') {
        return Err(Error::Parse {
            path: source.to_owned(),
            line: lineno,
            msg: "description text may not contain tabs".into(),
        });
    }
    Ok(Some((name, text)))
}
