//! Raw text to L2-normalized tf.idf vectors.

mod corpus;
mod porter;
mod tokenize;
mod vectorize;

pub use corpus::{load_corpus, load_dir, load_jsonl, strip_html, validate, RawDocument};
pub use porter::stem;
pub use tokenize::{filter_stop_words, tokenize, StopList};
pub use vectorize::{Analyzer, TermVector, Vocabulary};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TextError {
    #[error("corpus has no documents")]
    EmptyCorpus,
    #[error("duplicate document id `{0}`")]
    DuplicateId(String),
    #[error("document `{0}` has an empty body")]
    EmptyBody(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
