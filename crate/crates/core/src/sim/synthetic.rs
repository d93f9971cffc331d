//! Topic-structured synthetic corpora with known labels.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::text::{stem, RawDocument, StopList};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub topics: usize,
    pub docs_per_topic: usize,
    pub min_tokens: usize,
    pub max_tokens: usize,
    /// Distinct terms private to each topic.
    pub topic_vocabulary: usize,
    /// Terms shared by every topic.
    pub background_vocabulary: usize,
    /// Probability that a token comes from the shared vocabulary.
    pub background_fraction: f64,
    /// How tokens are drawn within a vocabulary.
    pub term_distribution: TermDistribution,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TermDistribution {
    Uniform,
    /// Rank-frequency law: the term at rank `r` (from 1) has weight
    /// `r^-exponent`.
    Zipf { exponent: f64 },
}

impl TermDistribution {
    fn cumulative(&self, n: usize) -> Vec<f64> {
        let mut acc = 0.0;
        (1..=n)
            .map(|r| {
                acc += match *self {
                    Self::Uniform => 1.0,
                    Self::Zipf { exponent } => (r as f64).powf(-exponent),
                };
                acc
            })
            .collect()
    }
}

fn draw<'a>(words: &'a [String], cumulative: &[f64], rng: &mut ChaCha8Rng) -> &'a str {
    let total = *cumulative.last().expect("non-empty vocabulary");
    let u = rng.random::<f64>() * total;
    let i = cumulative.partition_point(|&c| c <= u).min(words.len() - 1);
    &words[i]
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            topics: 10,
            docs_per_topic: 20,
            min_tokens: 80,
            max_tokens: 150,
            topic_vocabulary: 60,
            background_vocabulary: 120,
            background_fraction: 0.2,
            term_distribution: TermDistribution::Uniform,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    /// Sorted by id, so positions agree with map indices.
    pub documents: Vec<RawDocument>,
    /// Topic of each document.
    pub labels: Vec<usize>,
}

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aou";

/// Pseudo-words of three consonant-vowel syllables that the stemmer leaves
/// alone and that are not stop words.
fn word_pool(n: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    let stop = StopList::english();
    let mut seen = HashSet::new();
    let mut words = Vec::with_capacity(n);
    while words.len() < n {
        let mut w = String::with_capacity(6);
        for _ in 0..3 {
            w.push(CONSONANTS[rng.random_range(0..CONSONANTS.len())] as char);
            w.push(VOWELS[rng.random_range(0..VOWELS.len())] as char);
        }
        if stem(&w) == w && !stop.contains(&w) && seen.insert(w.clone()) {
            words.push(w);
        }
    }
    words
}

/// Document `i` of topic `t` has id `t{t:02}-d{i:02}`; its source URI
/// carries the label.
pub fn generate(config: &SyntheticConfig) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let pool = word_pool(
        config.topics * config.topic_vocabulary + config.background_vocabulary,
        &mut rng,
    );
    let (topic_words, background) = pool.split_at(config.topics * config.topic_vocabulary);
    let topic_cdf = config.term_distribution.cumulative(config.topic_vocabulary);
    let background_cdf = config.term_distribution.cumulative(background.len());
    let mut documents = Vec::new();
    let mut labels = Vec::new();
    for t in 0..config.topics {
        let vocab = &topic_words[t * config.topic_vocabulary..(t + 1) * config.topic_vocabulary];
        for i in 0..config.docs_per_topic {
            let len = rng.random_range(config.min_tokens..=config.max_tokens.max(config.min_tokens));
            let tokens: Vec<&str> = (0..len)
                .map(|_| {
                    let from_background = !background.is_empty() && rng.random::<f64>() < config.background_fraction;
                    if from_background {
                        draw(background, &background_cdf, &mut rng)
                    } else {
                        draw(vocab, &topic_cdf, &mut rng)
                    }
                })
                .collect();
            let title = tokens
                .iter()
                .take(3)
                .map(|w| {
                    let mut c = w.chars();
                    c.next()
                        .map(|f| f.to_ascii_uppercase().to_string() + c.as_str())
                        .unwrap_or_default()
                })
                .collect::<Vec<_>>()
                .join(" ");
            documents.push(RawDocument::new(
                format!("t{t:02}-d{i:02}"),
                title,
                tokens.join(" "),
                format!("synthetic://topic/{t}/doc/{i}"),
            ));
            labels.push(t);
        }
    }
    SyntheticCorpus { documents, labels }
}

/// Topic label encoded in a synthetic document's source URI.
pub fn label_of(doc: &RawDocument) -> Option<usize> {
    doc.source_uri
        .strip_prefix("synthetic://topic/")?
        .split('/')
        .next()?
        .parse()
        .ok()
}
