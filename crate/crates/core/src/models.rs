//! Seeded random graph models: Erdős–Rényi, the balanced two-community
//! stochastic blockmodel, and the vertex-by-vertex growth process.
//!
//! Communities follow label parity. Vertex `i` (0-based) carries the label
//! `i + 1`; odd labels form the first community and even labels the second,
//! so two vertices share a community iff their indices share parity.
//!
//! Randomness: every sample is driven by a ChaCha8 stream seeded from a
//! `u64`. Independent replicates use [`derive_seed`]`(master, index)`, so
//! results do not depend on how replicates are scheduled across threads.

use rand::distr::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Community {
    First,
    Second,
}

pub fn community_of(v: usize) -> Community {
    if v.is_multiple_of(2) {
        Community::First
    } else {
        Community::Second
    }
}

pub fn same_community(u: usize, v: usize) -> bool {
    u % 2 == v % 2
}

/// Number of edges joining the two communities.
pub fn count_cross_edges(g: &Graph) -> usize {
    g.edges()
        .iter()
        .filter(|&&(u, v)| !same_community(u, v))
        .count()
}

/// Sizes `(|C1|, |C2|)` of the two communities among `n` vertices.
pub fn community_sizes(n: usize) -> (usize, usize) {
    (n.div_ceil(2), n / 2)
}

/// SplitMix64 finalizer applied to `master` offset by a mixed `index`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(master ^ mix(index))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn bernoulli(p: f64, name: &str) -> Result<Bernoulli> {
    Bernoulli::new(p)
        .map_err(|_| Error::InvalidParameter(format!("{name} = {p} is not a probability")))
}

/// Erdős–Rényi graph: each of the `n(n-1)/2` pairs is an edge independently
/// with probability `p`, drawn in lexicographic pair order.
pub fn sample_er(n: usize, p: f64, seed: u64) -> Result<Graph> {
    sample_sbm(n, p, p, seed)
}

/// Balanced two-community blockmodel with within-community probability `p`
/// and cross-community probability `q`. Pairs are drawn in lexicographic
/// order.
pub fn sample_sbm(n: usize, p: f64, q: f64, seed: u64) -> Result<Graph> {
    let within = bernoulli(p, "p")?;
    let across = bernoulli(q, "q")?;
    let mut rng = rng(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let dist = if same_community(u, v) { &within } else { &across };
            if dist.sample(&mut rng) {
                edges.push((u, v));
            }
        }
    }
    Ok(Graph::from_canonical(n, edges))
}

/// Rule for a connection probability as a function of the graph size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum Rule {
    Constant { c: f64 },
    /// `c · (ln n)^a / n^b`
    PowerLog { c: f64, a: f64, b: f64 },
}

impl Rule {
    pub fn eval(&self, n: usize) -> f64 {
        match *self {
            Rule::Constant { c } => c,
            Rule::PowerLog { c, a, b } => {
                let n = n as f64;
                c * n.ln().powf(a) / n.powf(b)
            }
        }
    }
}

/// Pair of rules giving `(p_n, q_n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub p: Rule,
    pub q: Rule,
}

impl Schedule {
    pub fn new(p: Rule, q: Rule) -> Self {
        Schedule { p, q }
    }

    /// `p = ln²n / n`, `q = ln n / n²`: cross edges rare enough that merging
    /// events stand out.
    pub fn separated() -> Self {
        Schedule::new(
            Rule::PowerLog { c: 1.0, a: 2.0, b: 1.0 },
            Rule::PowerLog { c: 1.0, a: 1.0, b: 2.0 },
        )
    }

    /// `p = ln²n / n`, `q = ln²n / n^1.5`: too many cross edges for a single
    /// new one to be visible.
    pub fn overlapping() -> Self {
        Schedule::new(
            Rule::PowerLog { c: 1.0, a: 2.0, b: 1.0 },
            Rule::PowerLog { c: 1.0, a: 2.0, b: 1.5 },
        )
    }

    pub fn evaluate(&self, n: usize) -> Result<ScheduleSample> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "schedules are defined for n >= 2, got {n}"
            )));
        }
        let p = self.p.eval(n);
        let q = self.q.eval(n);
        for (which, value) in [("p", p), ("q", q)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::ScheduleOutOfRange { n, which, value });
            }
        }
        Ok(ScheduleSample::from_probabilities(n, p, q))
    }
}

/// Evaluated schedule at one size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleSample {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    /// Expected degree inside the first community, `p·(|C1| − 1)`.
    pub dbar: f64,
}

impl ScheduleSample {
    pub fn new(n: usize, p: f64, q: f64) -> Result<Self> {
        bernoulli(p, "p")?;
        bernoulli(q, "q")?;
        Ok(Self::from_probabilities(n, p, q))
    }

    fn from_probabilities(n: usize, p: f64, q: f64) -> Self {
        let c1 = community_sizes(n).0 as f64;
        ScheduleSample {
            n,
            p,
            q,
            dbar: p * (c1 - 1.0).max(0.0),
        }
    }
}

/// One row of the growth protocol: a graph on `n + 1` vertices grown from a
/// single vertex, together with its induced subgraph on the first `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthPair {
    pub sub: Graph,
    pub full: Graph,
    pub k_before: usize,
    pub k_after: usize,
    pub m_before: usize,
    pub seed: u64,
}

impl GrowthPair {
    /// Size of the subgraph, i.e. the `n` of `D_n`.
    pub fn n(&self) -> usize {
        self.sub.vertex_count()
    }

    /// Neighbors of the vertex added last.
    pub fn new_vertex_neighbors(&self) -> &[usize] {
        self.full.neighbors(self.n())
    }

    pub fn has_new_cross_edges(&self) -> bool {
        self.k_after > self.k_before
    }
}

/// Edges from vertex `j` to the earlier vertices, drawn in ascending order.
fn attach<R: rand::Rng>(
    j: usize,
    within: &Bernoulli,
    across: &Bernoulli,
    rng: &mut R,
    out: &mut Vec<usize>,
) {
    for i in 0..j {
        let dist = if same_community(i, j) { within } else { across };
        if dist.sample(rng) {
            out.push(i);
        }
    }
}

/// Neighbors of the final vertex `n` in [`grow_pair`]`(n, p, q, seed)`,
/// without building the rest of the graph.
pub(crate) fn final_step(n: usize, p: f64, q: f64, seed: u64) -> Result<Vec<usize>> {
    let within = bernoulli(p, "p")?;
    let across = bernoulli(q, "q")?;
    let mut out = Vec::new();
    attach(n, &within, &across, &mut rng(derive_seed(seed, 1)), &mut out);
    Ok(out)
}

/// Grows a graph on `n + 1` vertices by `n` elementary steps at fixed
/// `(p, q)`: each new vertex joins every earlier vertex of its own
/// community with probability `p` and of the other community with
/// probability `q`.
///
/// The first `n − 1` steps consume the stream `derive_seed(seed, 0)` and the
/// final step consumes `derive_seed(seed, 1)`, which lets the final step be
/// inspected on its own (see [`crate::detection::sample_conditioned`]).
pub fn grow_pair(n: usize, p: f64, q: f64, seed: u64) -> Result<GrowthPair> {
    if n < 1 {
        return Err(Error::InvalidParameter("growth needs n >= 1".into()));
    }
    let within = bernoulli(p, "p")?;
    let across = bernoulli(q, "q")?;
    let mut rng = rng(derive_seed(seed, 0));
    let mut edges = Vec::new();
    let mut scratch = Vec::new();
    for j in 1..n {
        scratch.clear();
        attach(j, &within, &across, &mut rng, &mut scratch);
        edges.extend(scratch.iter().map(|&i| (i, j)));
    }
    edges.sort_unstable();
    let sub = Graph::from_canonical(n, edges);
    let last = final_step(n, p, q, seed)?;
    let full = sub.with_added_vertex(last.iter().copied())?;

    let k_before = count_cross_edges(&sub);
    let k_after = k_before + last.iter().filter(|&&i| !same_community(i, n)).count();
    Ok(GrowthPair {
        m_before: sub.edge_count(),
        sub,
        full,
        k_before,
        k_after,
        seed,
    })
}
