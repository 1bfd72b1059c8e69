//! k-medoids (PAM) over Levenshtein distance between label strings.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{BehaviorSequence, SessionId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClusterError {
    #[error("k = {k} exceeds the {sessions} sessions available")]
    KTooLarge { k: usize, sessions: usize },
    #[error("k must be at least 1")]
    ZeroK,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionCluster {
    pub cluster_id: usize,
    pub medoid_session_id: SessionId,
    pub medoid_labels: String,
    pub member_session_ids: Vec<SessionId>,
    /// Mean distance from the other members to the medoid; 0 for a
    /// singleton.
    pub intra_mean_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub clusters: Vec<SessionCluster>,
    pub silhouette: f64,
    pub total_cost: u64,
}

pub fn levenshtein(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.chars().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let next = (diag + usize::from(ca != *cb)).min(row[j] + 1).min(row[j + 1] + 1);
            diag = row[j + 1];
            row[j + 1] = next;
        }
    }
    row[b.len()]
}

pub fn cluster_sessions(
    sequences: &BTreeMap<SessionId, BehaviorSequence>,
    k: usize,
    seed: u64,
) -> Result<Clustering, ClusterError> {
    let items: Vec<(SessionId, String)> = sequences
        .iter()
        .map(|(id, s)| (id.clone(), s.label_string()))
        .collect();
    cluster_strings(&items, k, seed)
}

/// Items are ordered by session id before clustering, so assignment ties go
/// to the medoid with the lower id.
pub fn cluster_strings(
    items: &[(SessionId, String)],
    k: usize,
    seed: u64,
) -> Result<Clustering, ClusterError> {
    if k == 0 {
        return Err(ClusterError::ZeroK);
    }
    let n = items.len();
    if k > n {
        return Err(ClusterError::KTooLarge { k, sessions: n });
    }
    let mut items: Vec<&(SessionId, String)> = items.iter().collect();
    items.sort_by(|a, b| a.0.cmp(&b.0));
    let mut d = vec![0u32; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = levenshtein(&items[i].1, &items[j].1) as u32;
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    let dist = |i: usize, j: usize| d[i * n + j];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut medoids = rand::seq::index::sample(&mut rng, n, k).into_vec();
    medoids.sort_unstable();

    let assign = |medoids: &[usize]| -> (Vec<usize>, u64) {
        let mut owner = vec![0usize; n];
        let mut cost = 0u64;
        for (p, slot) in owner.iter_mut().enumerate() {
            if let Some(m) = medoids.iter().position(|&m| m == p) {
                *slot = m;
                continue;
            }
            // medoids are kept sorted, so the first minimum has the lowest id.
            let (best, bd) = medoids
                .iter()
                .enumerate()
                .map(|(mi, &m)| (mi, dist(p, m)))
                .min_by_key(|&(mi, dv)| (dv, mi))
                .expect("k >= 1");
            *slot = best;
            cost += u64::from(bd);
        }
        (owner, cost)
    };

    let (mut owner, mut cost) = assign(&medoids);
    loop {
        let mut best: Option<(u64, Vec<usize>)> = None;
        for mi in 0..k {
            for o in 0..n {
                if medoids.contains(&o) {
                    continue;
                }
                let mut trial = medoids.clone();
                trial[mi] = o;
                trial.sort_unstable();
                let (_, c) = assign(&trial);
                if c < best.as_ref().map_or(cost, |b| b.0) {
                    best = Some((c, trial));
                }
            }
        }
        match best {
            Some((c, trial)) => {
                medoids = trial;
                (owner, cost) = assign(&medoids);
                debug_assert_eq!(c, cost);
            }
            None => break,
        }
    }

    let mut clusters: Vec<SessionCluster> = medoids
        .iter()
        .enumerate()
        .map(|(ci, &m)| {
            let members: Vec<usize> = (0..n).filter(|&p| owner[p] == ci).collect();
            let others: Vec<u32> = members.iter().filter(|&&p| p != m).map(|&p| dist(p, m)).collect();
            let intra = if others.is_empty() {
                0.0
            } else {
                others.iter().map(|&v| f64::from(v)).sum::<f64>() / others.len() as f64
            };
            SessionCluster {
                cluster_id: ci,
                medoid_session_id: items[m].0.clone(),
                medoid_labels: items[m].1.clone(),
                member_session_ids: members.iter().map(|&p| items[p].0.clone()).collect(),
                intra_mean_distance: intra,
            }
        })
        .collect();
    clusters.sort_by(|a, b| a.medoid_session_id.cmp(&b.medoid_session_id));
    for (i, c) in clusters.iter_mut().enumerate() {
        c.cluster_id = i;
    }
    Ok(Clustering {
        clusters,
        silhouette: silhouette(n, &owner, k, dist),
        total_cost: cost,
    })
}

/// Mean silhouette; members of singleton clusters score 0, and so does a
/// single-cluster partition.
fn silhouette(n: usize, owner: &[usize], k: usize, dist: impl Fn(usize, usize) -> u32) -> f64 {
    if k < 2 || n == 0 {
        return 0.0;
    }
    let mut sizes = vec![0usize; k];
    for &o in owner {
        sizes[o] += 1;
    }
    let mut total = 0.0;
    for p in 0..n {
        if sizes[owner[p]] == 1 {
            continue;
        }
        let mut sums = vec![0.0f64; k];
        for q in 0..n {
            if q != p {
                sums[owner[q]] += f64::from(dist(p, q));
            }
        }
        let a = sums[owner[p]] / (sizes[owner[p]] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != owner[p] && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        if m > 0.0 && b.is_finite() {
            total += (b - a) / m;
        }
    }
    total / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn items(strs: &[&str]) -> Vec<(SessionId, String)> {
        strs.iter()
            .enumerate()
            .map(|(i, s)| (SessionId(format!("s{i:02}")), s.to_string()))
            .collect()
    }

    #[test]
    fn levenshtein_basics() {
        assert_eq!(levenshtein("", ""), 0);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("PPPR", "SSS"), 4);
        assert_eq!(levenshtein("abc", ""), 3);
    }

    #[test]
    fn k_equals_n() {
        let c = cluster_strings(&items(&["P", "S", "PR"]), 3, 7).unwrap();
        assert_eq!(c.clusters.len(), 3);
        assert!(c.clusters.iter().all(|c| c.member_session_ids.len() == 1 && c.intra_mean_distance == 0.0));
        assert_eq!(c.silhouette, 0.0);
    }

    #[test]
    fn blocks_recovered_for_any_seed() {
        let it = items(&["PPPR", "SSS", "PPPR", "SSS", "PPPR", "SSS"]);
        for seed in 0..20 {
            let c = cluster_strings(&it, 2, seed).unwrap();
            let mut groups: Vec<Vec<&str>> = c
                .clusters
                .iter()
                .map(|cl| cl.member_session_ids.iter().map(|s| s.0.as_str()).collect())
                .collect();
            groups.sort();
            assert_eq!(groups, [vec!["s00", "s02", "s04"], vec!["s01", "s03", "s05"]]);
            assert_eq!(c.total_cost, 0);
            assert!((c.silhouette - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn errors() {
        assert_eq!(
            cluster_strings(&items(&["P"]), 2, 0),
            Err(ClusterError::KTooLarge { k: 2, sessions: 1 })
        );
        assert_eq!(cluster_strings(&items(&["P"]), 0, 0), Err(ClusterError::ZeroK));
    }

    #[test]
    fn identical_medoid_strings_stay_separate() {
        let c = cluster_strings(&items(&["P", "P"]), 2, 1).unwrap();
        assert_eq!(c.clusters.len(), 2);
        assert!(c.clusters.iter().all(|c| c.member_session_ids.len() == 1));
    }
}
