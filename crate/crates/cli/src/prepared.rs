//! The prepared-data directory written by `ssp prep` and read by every other
//! command.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ssp_core::checkpoint::digest_parts;
use ssp_core::config::hex_digest;
use ssp_core::{DescriptionCorpus, Split, TokenizerOptions, Triple, TripleStore, Vocab};

pub const ENTITIES: &str = "entities.tsv";
pub const RELATIONS: &str = "relations.tsv";
pub const WORDS: &str = "words.tsv";
pub const COUNTS: &str = "counts.tsv";
pub const DESCRIBED: &str = "described.txt";
pub const REL_STATS: &str = "rel_stats.tsv";
pub const MANIFEST: &str = "prep.txt";

fn split_file(split: Split) -> String {
    format!("{}.tsv", split.name())
}

/// Files covered by the prep hash, in hashing order.
fn hashed_files() -> Vec<String> {
    let mut v = vec![ENTITIES.to_owned(), RELATIONS.to_owned(), WORDS.to_owned()];
    v.extend(Split::ALL.iter().map(|&s| split_file(s)));
    v.push(COUNTS.to_owned());
    v.push(DESCRIBED.to_owned());
    v
}

#[derive(Debug)]
pub struct Prepared {
    pub dir: PathBuf,
    pub store: TripleStore,
    pub corpus: DescriptionCorpus,
    pub tokenizer: TokenizerOptions,
    pub prep_hash: String,
    /// `(key, value)` lines of the prep manifest.
    pub manifest: Vec<(String, String)>,
}

pub struct Source<'a> {
    pub name: &'a str,
    pub path: &'a Path,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

pub fn file_digest(path: &Path) -> Result<String> {
    Ok(hex_digest(&read_file(path)?))
}

fn prep_hash(dir: &Path) -> Result<String> {
    let files = hashed_files();
    let blobs: Vec<Vec<u8>> = files.iter().map(|f| read_file(&dir.join(f))).collect::<Result<_>>()?;
    Ok(digest_parts(
        files.iter().map(String::as_str).zip(blobs.iter().map(Vec::as_slice)),
    ))
}

/// Serializes `store` and `corpus` into `dir` and returns the prep hash.
pub fn write(
    dir: &Path,
    store: &TripleStore,
    corpus: &DescriptionCorpus,
    tokenizer: &TokenizerOptions,
    sources: &[Source<'_>],
) -> Result<String> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut buf = Vec::new();
    store.entities().write_tsv(&mut buf)?;
    write_file(&dir.join(ENTITIES), &buf)?;
    buf.clear();
    store.relations().write_tsv(&mut buf)?;
    write_file(&dir.join(RELATIONS), &buf)?;
    buf.clear();
    corpus.words().write_tsv(&mut buf)?;
    write_file(&dir.join(WORDS), &buf)?;
    for split in Split::ALL {
        buf.clear();
        store.write_encoded(split, &mut buf)?;
        write_file(&dir.join(split_file(split)), &buf)?;
    }
    buf.clear();
    corpus.write_cells(&mut buf)?;
    write_file(&dir.join(COUNTS), &buf)?;
    let described: String = corpus.described().map(|e| format!("{e}\n")).collect();
    write_file(&dir.join(DESCRIBED), described.as_bytes())?;

    let mut stats = String::from("relation\ttph\thpt\n");
    for r in 0..store.num_relations() {
        if let Some(s) = store.rel_stats(r) {
            let _ = writeln!(stats, "{}\t{}\t{}", store.relations().name(r), s.tph, s.hpt);
        }
    }
    write_file(&dir.join(REL_STATS), stats.as_bytes())?;

    let hash = prep_hash(dir)?;
    let mut m = String::new();
    for src in sources {
        let _ = writeln!(m, "source_{} = {}", src.name, src.path.display());
        let _ = writeln!(m, "digest_{} = {}", src.name, file_digest(src.path)?);
    }
    let _ = writeln!(m, "min_count = {}", tokenizer.min_count);
    let _ = writeln!(m, "min_len = {}", tokenizer.min_len);
    let _ = writeln!(m, "stopwords = {}", tokenizer.remove_stopwords);
    let _ = writeln!(m, "prep_hash = {hash}");
    write_file(&dir.join(MANIFEST), m.as_bytes())?;
    Ok(hash)
}

fn read_triples(path: &Path) -> Result<Vec<Triple>> {
    let text = String::from_utf8(read_file(path)?).with_context(|| format!("{} is not UTF-8", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let ids: Vec<usize> = l
                .split('\t')
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .with_context(|| format!("{}:{}: expected integer ids", path.display(), i + 1))?;
            match ids[..] {
                [h, r, t] => Ok(Triple::new(h, r, t)),
                _ => bail!("{}:{}: expected 3 fields", path.display(), i + 1),
            }
        })
        .collect()
}

fn read_cells(path: &Path) -> Result<Vec<(usize, usize, u32)>> {
    let text = String::from_utf8(read_file(path)?).with_context(|| format!("{} is not UTF-8", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let f: Vec<&str> = l.split('\t').collect();
            let bad = || format!("{}:{}: expected entity<TAB>word<TAB>count", path.display(), i + 1);
            if f.len() != 3 {
                bail!(bad());
            }
            Ok((
                f[0].parse().with_context(bad)?,
                f[1].parse().with_context(bad)?,
                f[2].parse().with_context(bad)?,
            ))
        })
        .collect()
}

pub fn parse_manifest(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_owned(), v.trim().to_owned()))
        .collect()
}

fn lookup<'a>(m: &'a [(String, String)], key: &str, path: &Path) -> Result<&'a str> {
    m.iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .with_context(|| format!("{}: missing {key}", path.display()))
}

impl Prepared {
    pub fn load(dir: &Path) -> Result<Self> {
        let manifest_path = dir.join(MANIFEST);
        let text = String::from_utf8(read_file(&manifest_path)?)?;
        let manifest = parse_manifest(&text);
        let recorded = lookup(&manifest, "prep_hash", &manifest_path)?.to_owned();
        let actual = prep_hash(dir)?;
        if actual != recorded {
            bail!("{}: prepared files do not match the recorded prep_hash", dir.display());
        }
        let parse_field = |key: &str| -> Result<String> { Ok(lookup(&manifest, key, &manifest_path)?.to_owned()) };
        let tokenizer = TokenizerOptions {
            min_count: parse_field("min_count")?.parse().context("bad min_count")?,
            min_len: parse_field("min_len")?.parse().context("bad min_len")?,
            remove_stopwords: parse_field("stopwords")?.parse().context("bad stopwords")?,
        };

        let entities = Vocab::read_tsv(&dir.join(ENTITIES))?;
        let relations = Vocab::read_tsv(&dir.join(RELATIONS))?;
        let words = Vocab::read_tsv(&dir.join(WORDS))?;
        let [train, valid, test] = Split::ALL.map(|s| read_triples(&dir.join(split_file(s))));
        let n = entities.len();
        let store = TripleStore::from_parts(entities, relations, train?, valid?, test?)?;
        let described_path = dir.join(DESCRIBED);
        let described: Vec<usize> = String::from_utf8(read_file(&described_path)?)?
            .lines()
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.parse()
                    .with_context(|| format!("{}: bad id {l:?}", described_path.display()))
            })
            .collect::<Result<_>>()?;
        let corpus = DescriptionCorpus::from_cells(n, words, read_cells(&dir.join(COUNTS))?, described)?;
        Ok(Prepared {
            dir: dir.to_owned(),
            store,
            corpus,
            tokenizer,
            prep_hash: recorded,
            manifest,
        })
    }

    /// The description corpus, or `None` when no entity is described.
    pub fn corpus(&self) -> Option<&DescriptionCorpus> {
        (!self.corpus.is_empty()).then_some(&self.corpus)
    }
}
