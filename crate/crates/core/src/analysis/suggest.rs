use serde::Serialize;

use super::{similarity, stem, AnalysisError};

/// A proposed abstraction: annotations whose stems are linked by
/// single-linkage similarity.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Suggestion {
    /// Ascending annotation ids, at least two.
    pub member_annotation_ids: Vec<usize>,
    /// Lexicographically smallest member stem.
    pub proposed_name: String,
    /// Minimum pairwise stem similarity inside the cluster.
    pub score: f64,
}

/// Single-linkage clustering of annotation stems.
///
/// Two annotations are linked when the similarity of their stems is at
/// least `threshold`; clusters are the connected components. Only clusters
/// with two or more members are returned, ordered by their smallest id.
/// The result does not depend on the order of `annotations`.
pub fn suggest_groups(annotations: &[(usize, &str)], threshold: f64) -> Result<Vec<Suggestion>, AnalysisError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(AnalysisError::Threshold(threshold));
    }

    let mut items: Vec<(usize, String)> =
        annotations.iter().map(|&(id, surface)| (id, stem(surface).into_string())).collect();
    items.sort_by_key(|&(id, _)| id);

    let n = items.len();
    let sim: Vec<Vec<f64>> = items.iter().map(|(_, a)| items.iter().map(|(_, b)| similarity(a, b)).collect()).collect();

    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (i, row) in sim.iter().enumerate() {
        for (j, &s) in row.iter().enumerate().skip(i + 1) {
            if s >= threshold {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                // Keep the smaller position as the representative.
                parent[a.max(b)] = a.min(b);
            }
        }
    }

    let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = root(&mut parent, i);
        clusters[r].push(i);
    }

    Ok(clusters
        .into_iter()
        .filter(|members| members.len() >= 2)
        .map(|members| {
            let mut score: f64 = 1.0;
            for (x, &i) in members.iter().enumerate() {
                for &j in &members[x + 1..] {
                    score = score.min(sim[i][j]);
                }
            }
            let proposed_name =
                members.iter().map(|&i| items[i].1.as_str()).min().expect("cluster is non-empty").to_string();
            Suggestion { member_annotation_ids: members.iter().map(|&i| items[i].0).collect(), proposed_name, score }
        })
        .collect())
}
