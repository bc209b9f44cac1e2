use serde::Serialize;

use super::DistanceMatrix;
use crate::error::{Error, Result};

/// One agglomeration step. Node references below `n` are leaves; merge `t`
/// creates node `n + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    labels: Vec<String>,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn new(labels: Vec<String>, merges: Vec<Merge>) -> Result<Self> {
        let n = labels.len();
        if n == 0 || merges.len() + 1 != n {
            return Err(Error::InvalidArgument(format!(
                "{} merges for {n} leaves",
                merges.len()
            )));
        }
        let mut used = vec![false; 2 * n - 1];
        let mut sizes = vec![1usize; 2 * n - 1];
        for (t, m) in merges.iter().enumerate() {
            let node = n + t;
            for child in [m.left, m.right] {
                if child >= node || used[child] {
                    return Err(Error::InvalidArgument(format!(
                        "merge {t} references invalid or reused node {child}"
                    )));
                }
                used[child] = true;
            }
            sizes[node] = sizes[m.left] + sizes[m.right];
            if sizes[node] != m.size || m.height.is_nan() || m.height < 0.0 {
                return Err(Error::InvalidArgument(format!("merge {t} is inconsistent")));
            }
        }
        Ok(Self { labels, merges })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn n_leaves(&self) -> usize {
        self.labels.len()
    }

    pub fn root(&self) -> usize {
        2 * self.labels.len() - 2
    }

    pub fn height(&self, node: usize) -> f64 {
        let n = self.n_leaves();
        if node < n {
            0.0
        } else {
            self.merges[node - n].height
        }
    }

    pub fn children(&self, node: usize) -> Option<(usize, usize)> {
        let n = self.n_leaves();
        (node >= n).then(|| {
            let m = &self.merges[node - n];
            (m.left, m.right)
        })
    }

    pub fn is_monotone(&self) -> bool {
        self.merges.windows(2).all(|w| w[0].height <= w[1].height)
    }

    /// Leaves in left-to-right drawing order.
    pub fn leaf_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n_leaves());
        let mut stack = vec![self.root()];
        while let Some(node) = stack.pop() {
            match self.children(node) {
                Some((l, r)) => {
                    stack.push(r);
                    stack.push(l);
                }
                None => out.push(node),
            }
        }
        out
    }
}

/// Average-linkage agglomeration with the Lance–Williams update.
///
/// Each active cluster lives in the slot of its smallest leaf index, so the
/// tie rule (smallest pair of minimum leaf indices) is the lexicographically
/// smallest slot pair. Every slot caches its nearest neighbour among higher
/// slots; only caches touched by a merge are rescanned.
pub fn upgma(dist: &DistanceMatrix) -> Result<Dendrogram> {
    let n = dist.n();
    if n == 0 {
        return Err(Error::InvalidArgument("cannot cluster zero items".into()));
    }
    if dist.entries().iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidArgument("non-finite distance".into()));
    }
    let mut d = dist.entries().to_vec();
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut node: Vec<usize> = (0..n).collect();
    let mut nn = vec![usize::MAX; n];
    let mut nn_d = vec![f64::INFINITY; n];

    let refresh = |i: usize, d: &[f64], active: &[bool], nn: &mut [usize], nn_d: &mut [f64]| {
        nn[i] = usize::MAX;
        nn_d[i] = f64::INFINITY;
        for j in i + 1..n {
            if active[j] && d[i * n + j] < nn_d[i] {
                nn[i] = j;
                nn_d[i] = d[i * n + j];
            }
        }
    };
    for i in 0..n {
        refresh(i, &d, &active, &mut nn, &mut nn_d);
    }

    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for step in 0..n - 1 {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for i in 0..n {
            if active[i] && nn[i] != usize::MAX && (best == usize::MAX || nn_d[i] < best_d) {
                best = i;
                best_d = nn_d[i];
            }
        }
        let (i, j) = (best, nn[best]);
        merges.push(Merge {
            left: node[i],
            right: node[j],
            height: best_d,
            size: size[i] + size[j],
        });

        let (si, sj) = (size[i] as f64, size[j] as f64);
        for k in 0..n {
            if active[k] && k != i && k != j {
                let v = (si * d[i * n + k] + sj * d[j * n + k]) / (si + sj);
                d[i * n + k] = v;
                d[k * n + i] = v;
            }
        }
        active[j] = false;
        size[i] += size[j];
        node[i] = n + step;

        refresh(i, &d, &active, &mut nn, &mut nn_d);
        for k in 0..n {
            if !active[k] || k == i {
                continue;
            }
            if nn[k] == j || (k < i && nn[k] == i) {
                refresh(k, &d, &active, &mut nn, &mut nn_d);
            } else if k < i {
                let v = d[k * n + i];
                if v < nn_d[k] || (v == nn_d[k] && i < nn[k]) {
                    nn[k] = i;
                    nn_d[k] = v;
                }
            }
        }
    }
    Dendrogram::new(dist.labels().to_vec(), merges)
}

/// Flat clustering obtained by undoing the last `k - 1` merges.
///
/// Labels run 1..=k ordered by cluster size descending, ties by the smallest
/// member label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterAssignment {
    pub k: usize,
    pub region_ids: Vec<String>,
    pub labels: Vec<usize>,
}

impl ClusterAssignment {
    /// Relabels an arbitrary grouping with the canonical label order.
    pub fn from_groups(region_ids: Vec<String>, groups: &[usize]) -> Result<Self> {
        if region_ids.len() != groups.len() {
            return Err(Error::InvalidArgument("one group per region required".into()));
        }
        let mut distinct: Vec<usize> = groups.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let mut stats: Vec<(usize, &str, usize)> = distinct
            .iter()
            .map(|&g| {
                let members = groups.iter().zip(&region_ids).filter(|(&x, _)| x == g);
                let size = members.clone().count();
                let min_id = members.map(|(_, id)| id.as_str()).min().unwrap_or("");
                (size, min_id, g)
            })
            .collect();
        stats.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        let mut relabel = std::collections::HashMap::new();
        for (label, &(_, _, g)) in stats.iter().enumerate() {
            relabel.insert(g, label + 1);
        }
        Ok(Self {
            k: distinct.len(),
            labels: groups.iter().map(|g| relabel[g]).collect(),
            region_ids,
        })
    }

    pub fn label_of(&self, region_id: &str) -> Option<usize> {
        self.region_ids
            .iter()
            .position(|r| r == region_id)
            .map(|i| self.labels[i])
    }

    /// Member indices of each cluster, indexed by `label - 1`.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l - 1].push(i);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.members().iter().map(Vec::len).collect()
    }

    /// `region_id,cluster_id` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("region_id,cluster_id\n");
        for (id, l) in self.region_ids.iter().zip(&self.labels) {
            out.push_str(id);
            out.push(',');
            out.push_str(&l.to_string());
            out.push('\n');
        }
        out
    }
}

pub fn cut(tree: &Dendrogram, k: usize) -> Result<ClusterAssignment> {
    let n = tree.n_leaves();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "cannot cut {n} leaves into {k} clusters"
        )));
    }
    let mut parent = vec![usize::MAX; 2 * n - 1];
    for (t, m) in tree.merges().iter().take(n - k).enumerate() {
        parent[m.left] = n + t;
        parent[m.right] = n + t;
    }
    let groups: Vec<usize> = (0..n)
        .map(|mut x| {
            while parent[x] != usize::MAX {
                x = parent[x];
            }
            x
        })
        .collect();
    ClusterAssignment::from_groups(tree.labels().to_vec(), &groups)
}
