//! Synthetic multi-user populations for exercising social suggestions.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clock::Seconds;
use crate::map::{ClusterId, DocIdx, KnowledgeMap};
use crate::social::compute_social_wpi;
use crate::user::{FavoriteEntry, HistoryRecord, UserProfile};

/// `n_users` profiles, each interested in one or two clusters, with 3 to 12
/// Favorites-history records (mostly from those clusters), up to three of
/// them still live, and a social WPI computed at `now`.
pub fn synthetic_population(map: &KnowledgeMap, n_users: usize, seed: u64, now: Seconds) -> Vec<UserProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = map.n_clusters().max(1) as u32;
    (0..n_users)
        .map(|u| {
            let interests: Vec<ClusterId> = (0..rng.random_range(1..=2))
                .map(|_| ClusterId(rng.random_range(0..k)))
                .collect();
            let n_records = rng.random_range(3..=12usize);
            let mut docs: Vec<DocIdx> = Vec::new();
            while docs.len() < n_records.min(map.size()) {
                let doc = if rng.random::<f64>() < 0.8 {
                    let c = interests[rng.random_range(0..interests.len())];
                    let members = map.members(c);
                    if members.is_empty() {
                        continue;
                    }
                    members[rng.random_range(0..members.len())]
                } else {
                    DocIdx(rng.random_range(0..map.size() as u32))
                };
                if !docs.contains(&doc) {
                    docs.push(doc);
                }
            }
            let history: Vec<HistoryRecord> = docs
                .iter()
                .map(|&doc| HistoryRecord {
                    doc,
                    time_alive: rng.random_range(0..5000),
                    timestamp: rng.random_range(0..=now),
                })
                .collect();
            let mut live = docs.clone();
            live.shuffle(&mut rng);
            live.truncate(rng.random_range(0..=3));
            let favorites = live
                .iter()
                .map(|&doc| {
                    let r = history.iter().find(|r| r.doc == doc).expect("live favorites have records");
                    FavoriteEntry {
                        doc,
                        time_alive: r.time_alive,
                        added_at: r.timestamp.saturating_sub(r.time_alive),
                        updated_at: r.timestamp,
                    }
                })
                .collect();
            let mut profile =
                UserProfile::from_parts(format!("user-{u:03}"), 0, now, false, favorites, history, None);
            profile.social_wpi = compute_social_wpi(&profile, map, now).ok();
            profile
        })
        .collect()
}
