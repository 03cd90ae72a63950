//! On-disk checkpoints: embeddings, semantics, the config snapshot, and a
//! manifest tying them to the prepared data they were trained on.

use std::fs;
use std::path::Path;

use crate::config::{hex_digest, TrainConfig};
use crate::error::{Error, Result};
use crate::scoring::{EmbeddingTable, ModelKind};
use crate::topic_semantics::SemanticModel;
use crate::trainer::TrainState;

pub const EMBEDDINGS_FILE: &str = "embeddings.txt";
pub const SEMANTICS_FILE: &str = "semantics.txt";
pub const CONFIG_FILE: &str = "config.txt";
pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub state: TrainState,
    pub config: TrainConfig,
    /// Digest of the prepared vocabularies the model was trained against.
    pub prep_hash: String,
}

impl Checkpoint {
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.state.embeddings.save(dir.join(EMBEDDINGS_FILE))?;
        if let Some(sem) = &self.state.semantics {
            sem.save(dir.join(SEMANTICS_FILE))?;
        }
        let write = |name: &str, text: String| {
            let p = dir.join(name);
            fs::write(&p, text).map_err(|e| Error::io(p, e))
        };
        write(CONFIG_FILE, self.config.to_text())?;
        write(
            MANIFEST_FILE,
            format!(
                "round = {}\nmodel = {}\nconfig_hash = {}\nprep_hash = {}\nembed_loss = {}\ntopic_loss = {}\n",
                self.state.round,
                self.state.model,
                self.config.hash(),
                self.prep_hash,
                self.state.embed_loss,
                self.state.topic_loss,
            ),
        )
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let manifest_path = dir.join(MANIFEST_FILE);
        let manifest = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        let field = |key: &str| -> Result<String> {
            manifest
                .lines()
                .filter_map(|l| l.split_once('='))
                .find(|(k, _)| k.trim() == key)
                .map(|(_, v)| v.trim().to_owned())
                .ok_or_else(|| Error::Compatibility(format!("{}: missing {key}", manifest_path.display())))
        };
        let bad = |key: &str| Error::Compatibility(format!("{}: bad {key}", manifest_path.display()));
        let round: usize = field("round")?.parse().map_err(|_| bad("round"))?;
        let model: ModelKind = field("model")?.parse()?;
        let embed_loss: f64 = field("embed_loss")?.parse().map_err(|_| bad("embed_loss"))?;
        let topic_loss: f64 = field("topic_loss")?.parse().map_err(|_| bad("topic_loss"))?;
        let config = TrainConfig::from_file(dir.join(CONFIG_FILE))?;
        if config.hash() != field("config_hash")? {
            return Err(Error::Compatibility(format!(
                "{}: config snapshot does not match its recorded hash",
                dir.display()
            )));
        }
        let embeddings = EmbeddingTable::load(dir.join(EMBEDDINGS_FILE))?;
        let semantics = if model.uses_semantics() {
            Some(SemanticModel::load(dir.join(SEMANTICS_FILE))?)
        } else {
            None
        };
        Ok(Checkpoint {
            state: TrainState {
                model,
                embeddings,
                semantics,
                round,
                embed_loss,
                topic_loss,
            },
            config,
            prep_hash: field("prep_hash")?,
        })
    }

    /// Fails unless this checkpoint was trained against `prep_hash`.
    pub fn ensure_compatible(&self, prep_hash: &str) -> Result<()> {
        if self.prep_hash != prep_hash {
            return Err(Error::Compatibility(format!(
                "checkpoint was trained on prepared data {} but {} was supplied",
                short(&self.prep_hash),
                short(prep_hash)
            )));
        }
        Ok(())
    }
}

fn short(h: &str) -> &str {
    &h[..h.len().min(12)]
}

/// Digest over an ordered list of named byte blobs.
pub fn digest_parts<'a>(parts: impl IntoIterator<Item = (&'a str, &'a [u8])>) -> String {
    let mut buf = Vec::new();
    for (name, bytes) in parts {
        buf.extend_from_slice(name.as_bytes());
        buf.push(0);
        buf.extend_from_slice(hex_digest(bytes).as_bytes());
        buf.push(b'\n');
    }
    hex_digest(&buf)
}
