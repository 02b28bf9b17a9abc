//! Pairwise compassionate-empathy weights.
//!
//! Weights are stored as dense symmetric blocks, one per *group*: a set of
//! communities linked by nonzero empathy blocks. Agents in different groups
//! never interact, so a society of six communities where only two are
//! empathetic to each other costs `(n₁+n₂)² + n₃² + … + n₆²` weights.

use crate::error::{Error, Result};
use crate::random::{sample_truncated_gaussian, GaussianSpec, SimRng};

#[derive(Debug, Clone, PartialEq)]
struct Group {
    /// Global agent indices, ascending.
    members: Vec<usize>,
    /// Row-major `members.len()²` weights with a zero diagonal.
    weights: Vec<f64>,
}

impl Group {
    fn row(&self, local: usize) -> &[f64] {
        let n = self.members.len();
        &self.weights[local * n..(local + 1) * n]
    }
}

/// Symmetric nonnegative empathy weights `γᵢⱼ` over a population.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpathyNetwork {
    groups: Vec<Group>,
    /// `(group, local index)` of every agent.
    location: Vec<(usize, usize)>,
    /// `Σⱼ γᵢⱼ` for every agent.
    strength: Vec<f64>,
    /// Maximal sets of agents connected by `γ > 0`, including singletons.
    components: Vec<Vec<usize>>,
}

/// Per-agent aggregates of the neighbourhood at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborSums {
    /// `Σⱼ γᵢⱼ Eⱼ`.
    pub fear: f64,
    /// `Σⱼ γᵢⱼ Cⱼ`.
    pub cooperation: f64,
}

impl EmpathyNetwork {
    /// `n` agents with no empathy at all.
    pub fn isolated(n: usize) -> Self {
        let groups: Vec<Group> =
            (0..n).map(|i| Group { members: vec![i], weights: vec![0.0] }).collect();
        Self::assemble(n, groups)
    }

    /// Builds a network from a full `n × n` matrix.
    pub fn from_dense(matrix: &[Vec<f64>]) -> Result<Self> {
        let n = matrix.len();
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::config(format!("empathy row {i} has {} entries, expected {n}", row.len())));
            }
            for (j, &w) in row.iter().enumerate() {
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::config(format!("empathy weight ({i},{j}) = {w} must be >= 0")));
                }
                if w != matrix[j][i] {
                    return Err(Error::config(format!("empathy weights ({i},{j}) and ({j},{i}) differ")));
                }
            }
        }
        let mut dsu = DisjointSets::new(n);
        for (i, row) in matrix.iter().enumerate() {
            for (j, &w) in row.iter().enumerate().skip(i + 1) {
                if w > 0.0 {
                    dsu.union(i, j);
                }
            }
        }
        let groups = dsu
            .sets()
            .into_iter()
            .map(|members| {
                let k = members.len();
                let mut weights = vec![0.0; k * k];
                for (a, &i) in members.iter().enumerate() {
                    for (b, &j) in members.iter().enumerate() {
                        if a != b {
                            weights[a * k + b] = matrix[i][j];
                        }
                    }
                }
                Group { members, weights }
            })
            .collect();
        Ok(Self::assemble(n, groups))
    }

    /// Samples weights for a population laid out community by community.
    ///
    /// `block(a, b)` gives the distribution of `γ` between members of
    /// communities `a` and `b`, or `None` when they share no empathy; it must
    /// be symmetric. Groups are visited in order of their first community and
    /// pairs `i < j` in row-major order within a group; each nonzero pair
    /// consumes one Gaussian draw.
    pub fn sample(
        sizes: &[usize],
        block: impl Fn(usize, usize) -> Option<GaussianSpec>,
        rng: &mut SimRng,
    ) -> Self {
        let n: usize = sizes.iter().sum();
        let mut community_of = Vec::with_capacity(n);
        let mut offsets = Vec::with_capacity(sizes.len());
        for (c, &size) in sizes.iter().enumerate() {
            offsets.push(community_of.len());
            community_of.extend(std::iter::repeat_n(c, size));
        }

        let mut linked = DisjointSets::new(sizes.len());
        for a in 0..sizes.len() {
            for b in a + 1..sizes.len() {
                if block(a, b).is_some() {
                    linked.union(a, b);
                }
            }
        }

        let mut groups = Vec::new();
        for communities in linked.sets() {
            let members: Vec<usize> =
                communities.iter().flat_map(|&c| offsets[c]..offsets[c] + sizes[c]).collect();
            let k = members.len();
            let mut weights = vec![0.0; k * k];
            for a in 0..k {
                let ca = community_of[members[a]];
                for b in a + 1..k {
                    let cb = community_of[members[b]];
                    if let Some(spec) = block(ca, cb) {
                        let w = sample_truncated_gaussian(spec, rng).get();
                        weights[a * k + b] = w;
                        weights[b * k + a] = w;
                    }
                }
            }
            groups.push(Group { members, weights });
        }
        Self::assemble(n, groups)
    }

    fn assemble(n: usize, groups: Vec<Group>) -> Self {
        let mut location = vec![(0, 0); n];
        let mut strength = vec![0.0; n];
        let mut components = Vec::new();
        for (g, group) in groups.iter().enumerate() {
            let k = group.members.len();
            let mut dsu = DisjointSets::new(k);
            for (a, &i) in group.members.iter().enumerate() {
                location[i] = (g, a);
                let row = group.row(a);
                strength[i] = lane_sum(row);
                for (b, &w) in row.iter().enumerate().skip(a + 1) {
                    if w > 0.0 {
                        dsu.union(a, b);
                    }
                }
            }
            components.extend(
                dsu.sets()
                    .into_iter()
                    .map(|set| set.into_iter().map(|a| group.members[a]).collect::<Vec<_>>()),
            );
        }
        components.sort_by_key(|c| c[0]);
        EmpathyNetwork { groups, location, strength, components }
    }

    pub fn len(&self) -> usize {
        self.location.len()
    }

    pub fn is_empty(&self) -> bool {
        self.location.is_empty()
    }

    /// `γᵢⱼ`; zero on the diagonal and across groups.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let (gi, a) = self.location[i];
        let (gj, b) = self.location[j];
        if gi != gj || i == j {
            return 0.0;
        }
        let group = &self.groups[gi];
        group.weights[a * group.members.len() + b]
    }

    /// `Σⱼ γᵢⱼ`.
    pub fn strength(&self, i: usize) -> f64 {
        self.strength[i]
    }

    /// Agents `j ≠ i` with `γᵢⱼ > 0`, paired with the weight.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (g, a) = self.location[i];
        let group = &self.groups[g];
        group.row(a).iter().zip(&group.members).filter(|(w, _)| **w > 0.0).map(|(w, j)| (*j, *w))
    }

    /// Empathy components: maximal groups of agents connected by `γ > 0`.
    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    /// Empathy-weighted sums of fear and cooperation around every agent.
    pub fn neighbor_sums(&self, fear: &[f64], cooperation: &[f64]) -> Result<Vec<NeighborSums>> {
        let n = self.len();
        if fear.len() != n || cooperation.len() != n {
            return Err(Error::config(format!(
                "network has {n} agents but got {} fear and {} cooperation values",
                fear.len(),
                cooperation.len()
            )));
        }
        let mut out = vec![NeighborSums { fear: 0.0, cooperation: 0.0 }; n];
        let mut local_fear = Vec::new();
        let mut local_coop = Vec::new();
        for group in &self.groups {
            if group.members.len() == 1 {
                continue;
            }
            local_fear.clear();
            local_coop.clear();
            local_fear.extend(group.members.iter().map(|&i| fear[i]));
            local_coop.extend(group.members.iter().map(|&i| cooperation[i]));
            for (a, &i) in group.members.iter().enumerate() {
                let (f, c) = dot2(group.row(a), &local_fear, &local_coop);
                out[i] = NeighborSums { fear: f, cooperation: c };
            }
        }
        Ok(out)
    }
}

const LANES: usize = 4;

/// Sum with four independent accumulators so the loop vectorizes; the
/// association order is fixed, which keeps results bit-reproducible.
fn lane_sum(xs: &[f64]) -> f64 {
    let mut acc = [0.0; LANES];
    let chunks = xs.chunks_exact(LANES);
    let tail = chunks.remainder();
    for c in chunks {
        for l in 0..LANES {
            acc[l] += c[l];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for x in tail {
        s += x;
    }
    s
}

/// `(w·a, w·b)` with the same lane structure as [`lane_sum`].
fn dot2(w: &[f64], a: &[f64], b: &[f64]) -> (f64, f64) {
    debug_assert!(w.len() == a.len() && w.len() == b.len());
    let mut acc_a = [0.0; LANES];
    let mut acc_b = [0.0; LANES];
    let split = w.len() - w.len() % LANES;
    for ((wc, ac), bc) in w[..split]
        .chunks_exact(LANES)
        .zip(a[..split].chunks_exact(LANES))
        .zip(b[..split].chunks_exact(LANES))
    {
        for l in 0..LANES {
            acc_a[l] += wc[l] * ac[l];
            acc_b[l] += wc[l] * bc[l];
        }
    }
    let mut sa = (acc_a[0] + acc_a[1]) + (acc_a[2] + acc_a[3]);
    let mut sb = (acc_b[0] + acc_b[1]) + (acc_b[2] + acc_b[3]);
    for k in split..w.len() {
        sa += w[k] * a[k];
        sb += w[k] * b[k];
    }
    (sa, sb)
}

/// Union-find with path halving.
struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller index as root so set order is deterministic
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    /// Sets in order of their smallest element, members ascending.
    fn sets(mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut index_of_root = vec![usize::MAX; n];
        let mut sets: Vec<Vec<usize>> = Vec::new();
        for x in 0..n {
            let r = self.find(x);
            if index_of_root[r] == usize::MAX {
                index_of_root[r] = sets.len();
                sets.push(Vec::new());
            }
            sets[index_of_root[r]].push(x);
        }
        sets
    }
}
