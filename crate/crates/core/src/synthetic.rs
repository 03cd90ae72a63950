//! Planted-topic knowledge graphs for tests and benchmarks.
//!
//! Entities are split into topic clusters and the lowest id in each cluster
//! is its hub. Descriptions draw most tokens from the cluster's own words and
//! the rest from the whole vocabulary. Every entity gets a few `noise*` edges
//! to random entities. Warm entities are linked to their hub by `related` in
//! training; the same triples for cold entities are held out, so only the
//! descriptions say which hub a cold entity belongs to.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::kg_store::{DescriptionCorpus, Split, TokenizerOptions, TripleStore, TripleStoreBuilder, Vocab, VocabMode};
use crate::trainer::rng_stream;

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedTopicSpec {
    pub entities: usize,
    pub clusters: usize,
    pub words_per_topic: usize,
    pub noise_words: usize,
    pub description_len: usize,
    /// Fraction of description tokens drawn from the entity's topic.
    pub topic_fraction: f64,
    /// Fraction of entities whose cluster is hidden from the graph.
    pub cold_fraction: f64,
    pub noise_relations: usize,
    /// `noise*` edges drawn per entity.
    pub noise_degree: usize,
    /// Sends every second held-out triple to validation instead of test.
    pub with_valid: bool,
    pub seed: u64,
}

impl Default for PlantedTopicSpec {
    fn default() -> Self {
        PlantedTopicSpec {
            entities: 300,
            clusters: 10,
            words_per_topic: 6,
            noise_words: 20,
            description_len: 150,
            topic_fraction: 0.7,
            cold_fraction: 0.3,
            noise_relations: 3,
            noise_degree: 4,
            with_valid: false,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedTopicKg {
    pub store: TripleStore,
    pub corpus: DescriptionCorpus,
    /// Cluster of each entity, by entity id.
    pub cluster: Vec<usize>,
    pub cold: Vec<bool>,
    /// `(entity name, description)` in entity-id order.
    pub descriptions: Vec<(String, String)>,
    /// `(head, relation, tail)` names per split, in insertion order.
    pub triples: Vec<(Split, String, String, String)>,
}

impl PlantedTopicSpec {
    pub fn generate(&self) -> PlantedTopicKg {
        let mut rng = rng_stream(self.seed, 0);
        let n = self.entities;
        let name = |i: usize| format!("e{i:04}");
        let cluster: Vec<usize> = (0..n).map(|i| i % self.clusters).collect();
        let mut ids: Vec<usize> = (0..n).collect();
        ids.shuffle(&mut rng);
        let n_cold = (self.cold_fraction * n as f64).round() as usize;
        let mut cold = vec![false; n];
        for &i in &ids[..n_cold] {
            cold[i] = true;
        }
        let hub: Vec<usize> = (0..self.clusters).collect();
        for &h in &hub {
            cold[h] = false;
        }

        let mut triples: Vec<(Split, String, String, String)> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        let mut push = |split: Split, h: usize, r: String, t: usize, triples: &mut Vec<_>| {
            if h != t && seen.insert((h, r.clone(), t)) {
                triples.push((split, name(h), r, name(t)));
            }
        };

        for i in 0..n {
            for _ in 0..self.noise_degree {
                let r = format!("noise{}", rng.gen_range(0..self.noise_relations));
                let other = rng.gen_range(0..n);
                if rng.gen::<bool>() {
                    push(Split::Train, i, r, other, &mut triples);
                } else {
                    push(Split::Train, other, r, i, &mut triples);
                }
            }
        }
        let mut held_out = 0usize;
        for i in 0..n {
            if hub.contains(&i) {
                continue;
            }
            let split = if !cold[i] {
                Split::Train
            } else {
                held_out += 1;
                if self.with_valid && held_out.is_multiple_of(2) {
                    Split::Valid
                } else {
                    Split::Test
                }
            };
            push(split, i, "related".into(), hub[cluster[i]], &mut triples);
        }

        let descriptions: Vec<(String, String)> = (0..n)
            .map(|i| {
                let words: Vec<String> = (0..self.description_len)
                    .map(|_| {
                        if rng.gen::<f64>() < self.topic_fraction {
                            format!("topic{}word{}", cluster[i], rng.gen_range(0..self.words_per_topic))
                        } else {
                            let j = rng.gen_range(0..self.clusters * self.words_per_topic + self.noise_words);
                            if j < self.noise_words {
                                format!("common{j}")
                            } else {
                                let j = j - self.noise_words;
                                format!("topic{}word{}", j / self.words_per_topic, j % self.words_per_topic)
                            }
                        }
                    })
                    .collect();
                (name(i), words.join(" "))
            })
            .collect();

        let entities = Vocab::from_names((0..n).map(name).collect()).expect("distinct names");
        let mut b = TripleStoreBuilder::with_vocabs(entities, Vocab::new());
        for (split, h, r, t) in &triples {
            b.push(*split, h, r, t, VocabMode::Build).expect("build mode");
        }
        let store = b.build();
        let opts = TokenizerOptions {
            min_count: 1,
            ..Default::default()
        };
        let corpus = DescriptionCorpus::from_texts(
            n,
            descriptions.iter().enumerate().map(|(i, (_, t))| (i, t.as_str())),
            &opts,
        );
        PlantedTopicKg {
            store,
            corpus,
            cluster,
            cold,
            descriptions,
            triples,
        }
    }
}
