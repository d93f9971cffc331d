//! Adaptive navigation over a compressed document vector space.
//!
//! Documents are turned into tf.idf vectors ([`text`]), compressed with PCA
//! into a Knowledge Map and partitioned into clusters ([`map`]). Each user
//! sees a fixed-size set of links that evolves under fitness, ageing,
//! recombination and mutation ([`engine`], [`session`]), informed by
//! Favorites ([`user`]) and by other users' interests ([`social`]).
//! [`sim`] drives all of it under virtual time.

pub mod clock;
pub mod engine;
pub mod map;
pub mod session;
pub mod sim;
pub mod social;
pub mod text;
pub mod user;

pub use clock::{Clock, ManualClock, Seconds, SystemClock};
pub use map::{ClusterId, DocIdx, KnowledgeMap};
