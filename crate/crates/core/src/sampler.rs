//! Graph generation from an edge-probability model. Candidate edges are
//! enumerated by geometric skip-sampling at the band ceiling p_u over the
//! colexicographic edge index (expected work O(n C) instead of O(n^2)), then
//! each candidate is thinned with a conditional uniform mark. Because one
//! mark drives the membership tests for the floor, the model, and the
//! ceiling probability, a single pass yields the monotone coupled triple
//! G- subset G subset G+ at no extra sampling cost.

use std::io::Write as IoWrite;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probmodel::{pair_count, EdgeProbModel, EdgeSelector};

/// Deterministic addressing of one sampled graph: a master seed shared by an
/// experiment and a stream id (usually the trial index). Distinct streams of
/// the counter-based generator are independent; the same pair reproduces the
/// same graph bit for bit, regardless of thread count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// The generator for this (seed, stream) address.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Name of the generator family, recorded in experiment metadata.
pub const RNG_NAME: &str = "chacha8";

// ---------------------------------------------------------------------------
// Graph
// ---------------------------------------------------------------------------

/// A simple undirected graph with 1-based vertex labels and per-vertex
/// sorted adjacency.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    n: u64,
    adjacency: Vec<Vec<u32>>,
    edge_count: u64,
}

impl Graph {
    /// Build from an explicit edge list (any order; loops and duplicates are
    /// rejected).
    pub fn from_edges(n: u64, edges: &[(u32, u32)]) -> Result<Self> {
        check_vertex_count(n)?;
        let mut adjacency = vec![Vec::new(); n as usize];
        for &(a, b) in edges {
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if a == b || i < 1 || j as u64 > n {
                return Err(Error::BadEdge {
                    n,
                    i: a as u64,
                    j: b as u64,
                });
            }
            adjacency[i as usize - 1].push(j);
            adjacency[j as usize - 1].push(i);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::BadEdge { n, i: 0, j: 0 });
            }
        }
        Ok(Self {
            n,
            adjacency,
            edge_count: edges.len() as u64,
        })
    }

    /// Edges must arrive in colexicographic order with i < j (as produced by
    /// the samplers); adjacency comes out sorted without a sorting pass.
    fn from_colex_edges(n: u64, edges: &[(u32, u32)]) -> Self {
        let mut adjacency = vec![Vec::new(); n as usize];
        for &(i, j) in edges {
            adjacency[i as usize - 1].push(j);
            adjacency[j as usize - 1].push(i);
        }
        debug_assert!(adjacency
            .iter()
            .all(|list| list.windows(2).all(|w| w[0] < w[1])));
        Self {
            n,
            adjacency,
            edge_count: edges.len() as u64,
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    /// Sorted neighbors of the 1-based vertex v.
    pub fn neighbors(&self, v: u64) -> &[u32] {
        &self.adjacency[v as usize - 1]
    }

    pub fn degree(&self, v: u64) -> u64 {
        self.adjacency[v as usize - 1].len() as u64
    }

    pub fn has_edge(&self, i: u64, j: u64) -> bool {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        if i < 1 || j > self.n || i == j {
            return false;
        }
        self.adjacency[i as usize - 1].binary_search(&(j as u32)).is_ok()
    }

    /// All edges as (i, j) with i < j, in colexicographic order.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count as usize);
        for (v0, list) in self.adjacency.iter().enumerate() {
            let j = (v0 + 1) as u32;
            for &i in list.iter().take_while(|&&w| w < j) {
                out.push((i, j));
            }
        }
        out
    }

    /// Text dump: header "n m seed stream", then one 1-indexed "i j" line
    /// per edge in colexicographic order.
    pub fn write_edge_list<W: IoWrite>(&self, mut w: W, seed: SeedSpec) -> std::io::Result<()> {
        writeln!(
            w,
            "{} {} {} {}",
            self.n, self.edge_count, seed.master_seed, seed.stream_id
        )?;
        for (i, j) in self.edges() {
            writeln!(w, "{i} {j}")?;
        }
        Ok(())
    }
}

fn check_vertex_count(n: u64) -> Result<()> {
    if n >= 2 && n <= u32::MAX as u64 {
        Ok(())
    } else {
        Err(Error::BadParam {
            name: "n",
            value: n as f64,
            requirement: ">= 2 and < 2^32",
        })
    }
}

// ---------------------------------------------------------------------------
// Coupled triple
// ---------------------------------------------------------------------------

/// Three graphs on shared uniform marks: `g_minus` keeps a candidate when
/// its mark is below the band floor, `g` when below the model probability,
/// `g_plus` when below the band ceiling (i.e. always). The shared marks make
/// the inclusions g_minus subset g subset g_plus hold edge for edge.
#[derive(Debug, Clone)]
pub struct CoupledTriple {
    pub g_minus: Graph,
    pub g: Graph,
    pub g_plus: Graph,
    /// Edges open in `g` but closed in `g_minus`, in colexicographic order.
    pub dif_edges: Vec<(u32, u32)>,
}

/// Number of edges open in `g` but closed in `g_minus`.
pub fn count_dif(t: &CoupledTriple) -> u64 {
    t.dif_edges.len() as u64
}

// ---------------------------------------------------------------------------
// Candidate enumeration
// ---------------------------------------------------------------------------

/// Skip-sampling cursor over colex edge indices: each index survives
/// independently with probability p_u, and survivors arrive with their
/// (i, j) pair, maintained incrementally (no integer square roots).
struct CandidateIter<'r> {
    rng: &'r mut ChaCha8Rng,
    ln_q: f64, // ln(1 - p_u) < 0
    k: u64,    // next colex index to consider
    k_total: u64,
    j0: u64, // 0-based higher endpoint of the row containing index k
    t_j: u64, // first colex index of that row: j0 (j0 - 1) / 2
}

impl<'r> CandidateIter<'r> {
    fn new(rng: &'r mut ChaCha8Rng, n: u64, p_u: f64) -> Self {
        let ln_q = if p_u >= 1.0 {
            f64::NEG_INFINITY // every index is a candidate (gaps are 0)
        } else {
            (-p_u).ln_1p()
        };
        Self {
            rng,
            ln_q,
            k: 0,
            k_total: pair_count(n),
            j0: 1,
            t_j: 0,
        }
    }

    fn next(&mut self) -> Option<(u64, u32, u32)> {
        // Geometric number of skipped indices; `as u64` saturates, and any
        // overshoot past k_total ends the pass.
        let u = 1.0 - self.rng.random::<f64>(); // in (0, 1]
        let skip = if self.ln_q == f64::NEG_INFINITY {
            0
        } else {
            (u.ln() / self.ln_q) as u64
        };
        self.k = self.k.saturating_add(skip);
        if self.k >= self.k_total {
            return None;
        }
        while self.k >= self.t_j + self.j0 {
            self.t_j += self.j0;
            self.j0 += 1;
        }
        let k = self.k;
        let i = (k - self.t_j + 1) as u32;
        let j = (self.j0 + 1) as u32;
        self.k += 1;
        Some((k, i, j))
    }
}

/// Per-candidate probability lookup with the variant match hoisted out of
/// the hot loop.
enum Resolver<'a> {
    Const(f64),
    Prefix {
        boundary: u64,
        full_p: f64,
        reduced_p: f64,
    },
    Selector {
        model: &'a EdgeProbModel,
        n: u64,
        full_p: f64,
        reduced_p: f64,
    },
    Custom {
        f: &'a (dyn Fn(u64, u64, u64) -> f64 + Send + Sync),
        n: u64,
    },
}

impl<'a> Resolver<'a> {
    fn new(model: &'a EdgeProbModel, n: u64) -> Self {
        match model {
            EdgeProbModel::Homogeneous { c } => Resolver::Const(c / n as f64),
            EdgeProbModel::TwoClass {
                c,
                alpha,
                full_count,
                full_selector,
            } => {
                let full_p = c / n as f64;
                let reduced_p = (c - alpha.value(n)) / n as f64;
                match full_selector {
                    EdgeSelector::ColexPrefix => Resolver::Prefix {
                        boundary: full_count.count(n),
                        full_p,
                        reduced_p,
                    },
                    EdgeSelector::Custom(_) => Resolver::Selector {
                        model,
                        n,
                        full_p,
                        reduced_p,
                    },
                }
            }
            EdgeProbModel::Custom { prob_fn, .. } => Resolver::Custom {
                f: prob_fn.as_ref(),
                n,
            },
        }
    }

    #[inline]
    fn p(&self, k: u64, i: u32, j: u32) -> f64 {
        match self {
            Resolver::Const(p) => *p,
            Resolver::Prefix {
                boundary,
                full_p,
                reduced_p,
            } => {
                if k < *boundary {
                    *full_p
                } else {
                    *reduced_p
                }
            }
            Resolver::Selector {
                model,
                n,
                full_p,
                reduced_p,
            } => {
                if model.two_class_is_full(*n, k) {
                    *full_p
                } else {
                    *reduced_p
                }
            }
            Resolver::Custom { f, n } => f(*n, i as u64, j as u64),
        }
    }
}

fn check_model_p(p: f64, p_u: f64, n: u64) -> Result<()> {
    // Tolerate one rounding ulp from derived-band models; anything larger
    // means the model really violates its own band.
    if p > p_u * (1.0 + 1e-12) {
        return Err(Error::InfeasibleBand { n, p_u: p });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Sample one graph: every edge {i, j} is open independently with its model
/// probability. Deterministic in `seed`.
pub fn sample_graph(model: &EdgeProbModel, n: u64, seed: SeedSpec) -> Result<Graph> {
    check_vertex_count(n)?;
    let (_p_d, p_u) = model.band(n)?;
    let mut edges: Vec<(u32, u32)> = Vec::new();
    if p_u > 0.0 {
        let resolver = Resolver::new(model, n);
        let mut rng = seed.rng();
        let mut iter = CandidateIter::new(&mut rng, n, p_u);
        while let Some((k, i, j)) = iter.next() {
            let p = resolver.p(k, i, j);
            check_model_p(p, p_u, n)?;
            let mark = iter.rng.random::<f64>() * p_u;
            if mark < p {
                edges.push((i, j));
            }
        }
    }
    Ok(Graph::from_colex_edges(n, &edges))
}

/// Sample the coupled triple in one pass: each candidate's single mark is
/// compared against the floor, the model probability, and the ceiling.
/// The marginal law of each member matches independent sampling of that
/// member alone.
pub fn sample_coupled(model: &EdgeProbModel, n: u64, seed: SeedSpec) -> Result<CoupledTriple> {
    check_vertex_count(n)?;
    let (p_d, p_u) = model.band(n)?;
    let mut minus: Vec<(u32, u32)> = Vec::new();
    let mut mid: Vec<(u32, u32)> = Vec::new();
    let mut plus: Vec<(u32, u32)> = Vec::new();
    let mut dif: Vec<(u32, u32)> = Vec::new();
    if p_u > 0.0 {
        let resolver = Resolver::new(model, n);
        let mut rng = seed.rng();
        let mut iter = CandidateIter::new(&mut rng, n, p_u);
        while let Some((k, i, j)) = iter.next() {
            let p = resolver.p(k, i, j);
            check_model_p(p, p_u, n)?;
            let mark = iter.rng.random::<f64>() * p_u;
            plus.push((i, j));
            if mark < p {
                mid.push((i, j));
                if mark < p_d {
                    minus.push((i, j));
                } else {
                    dif.push((i, j));
                }
            } else if mark < p_d {
                // Impossible when the model respects its band (p >= p_d);
                // tolerated for out-of-band custom models: the floor graph
                // must stay inside g for the coupling to mean anything.
                minus.push((i, j));
                mid.push((i, j));
            }
        }
    }
    Ok(CoupledTriple {
        g_minus: Graph::from_colex_edges(n, &minus),
        g: Graph::from_colex_edges(n, &mid),
        g_plus: Graph::from_colex_edges(n, &plus),
        dif_edges: dif,
    })
}

/// Reference sampler: visits every pair explicitly and draws one uniform per
/// pair. Quadratic in n — intended for tests that cross-check the skip
/// sampler's distribution, not for production runs.
pub fn naive_sample_graph(model: &EdgeProbModel, n: u64, seed: SeedSpec) -> Result<Graph> {
    check_vertex_count(n)?;
    model.band(n)?;
    let mut rng = seed.rng();
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for j in 2..=n {
        for i in 1..j {
            let p = model.edge_prob(n, i, j)?;
            if rng.random::<f64>() < p {
                edges.push((i as u32, j as u32));
            }
        }
    }
    // Pair loop above is (i, j)-major; re-emit in colex order.
    let mut edges_colex = edges;
    edges_colex.sort_unstable_by_key(|&(i, j)| (j, i));
    Ok(Graph::from_colex_edges(n, &edges_colex))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probmodel::{AlphaSequence, ModelDescriptor};
    use std::sync::Arc;

    fn edge_set(g: &Graph) -> Vec<(u32, u32)> {
        g.edges()
    }

    fn is_subset(a: &[(u32, u32)], b: &[(u32, u32)]) -> bool {
        let mut ib = b.iter();
        'outer: for e in a {
            for f in ib.by_ref() {
                if f == e {
                    continue 'outer;
                }
            }
            return false;
        }
        true
    }

    #[test]
    fn graph_construction_and_queries() {
        let g = Graph::from_edges(4, &[(1, 2), (3, 2), (1, 4)]).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.neighbors(2), &[1, 3]);
        assert_eq!(g.degree(1), 2);
        assert!(g.has_edge(2, 1) && g.has_edge(1, 4) && !g.has_edge(3, 4));
        assert_eq!(g.edges(), vec![(1, 2), (2, 3), (1, 4)]);
        assert!(Graph::from_edges(4, &[(2, 2)]).is_err());
        assert!(Graph::from_edges(4, &[(1, 5)]).is_err());
        assert!(Graph::from_edges(4, &[(1, 2), (2, 1)]).is_err());
    }

    #[test]
    fn sampling_is_deterministic_in_the_seed() {
        let model = EdgeProbModel::homogeneous(2.0).unwrap();
        let seed = SeedSpec::new(42, 7);
        let a = sample_graph(&model, 500, seed).unwrap();
        let b = sample_graph(&model, 500, seed).unwrap();
        assert_eq!(a, b);
        let c = sample_graph(&model, 500, SeedSpec::new(42, 8)).unwrap();
        assert_ne!(a, c);
        let d = sample_graph(&model, 500, SeedSpec::new(43, 7)).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn probability_one_table_yields_the_complete_graph() {
        let desc: ModelDescriptor = serde_json::from_str(
            r#"{"kind":"custom_table","n":4,"probs":[1.0,1.0,1.0,1.0,1.0,1.0]}"#,
        )
        .unwrap();
        let model = desc.to_model().unwrap();
        let g = sample_graph(&model, 4, SeedSpec::new(1, 0)).unwrap();
        assert_eq!(g.edge_count(), 6);
        for j in 2..=4u64 {
            for i in 1..j {
                assert!(g.has_edge(i, j));
            }
        }
    }

    #[test]
    fn probability_zero_edges_never_open() {
        let model = EdgeProbModel::custom(
            2.0,
            AlphaSequence::Zero,
            Arc::new(|_, _, _| 0.0),
        )
        .unwrap();
        for t in 0..20 {
            let g = sample_graph(&model, 50, SeedSpec::new(9, t)).unwrap();
            assert_eq!(g.edge_count(), 0);
        }
    }

    #[test]
    fn coupling_inclusions_hold_edge_for_edge() {
        let model = EdgeProbModel::two_class(
            2.0,
            AlphaSequence::InverseSqrt { coefficient: 16.0 },
        )
        .unwrap();
        for t in 0..50 {
            let trip = sample_coupled(&model, 256, SeedSpec::new(5, t)).unwrap();
            let (em, eg, ep) = (
                edge_set(&trip.g_minus),
                edge_set(&trip.g),
                edge_set(&trip.g_plus),
            );
            assert!(is_subset(&em, &eg));
            assert!(is_subset(&eg, &ep));
            assert_eq!(
                count_dif(&trip),
                (trip.g.edge_count() - trip.g_minus.edge_count()),
            );
            // dif edges are exactly the set difference.
            for e in &trip.dif_edges {
                assert!(eg.contains(e) && !em.contains(e));
            }
        }
    }

    #[test]
    fn zero_alpha_collapses_the_triple() {
        let model = EdgeProbModel::homogeneous(2.0).unwrap();
        let trip = sample_coupled(&model, 300, SeedSpec::new(11, 3)).unwrap();
        assert_eq!(trip.g_minus, trip.g);
        assert!(trip.dif_edges.is_empty());
        assert_eq!(count_dif(&trip), 0);
        // The middle graph marginal matches sample_graph on the same seed.
        let direct = sample_graph(&model, 300, SeedSpec::new(11, 3)).unwrap();
        assert_eq!(trip.g, direct);
    }

    #[test]
    fn coupled_middle_graph_matches_direct_sampling_with_band() {
        // Same candidate walk and same marks: the coupled g must be
        // identical to the directly sampled graph, band or no band.
        let model = EdgeProbModel::two_class(
            2.0,
            AlphaSequence::InverseSqrt { coefficient: 16.0 },
        )
        .unwrap();
        for t in 0..10 {
            let seed = SeedSpec::new(77, t);
            let trip = sample_coupled(&model, 512, seed).unwrap();
            let direct = sample_graph(&model, 512, seed).unwrap();
            assert_eq!(trip.g, direct);
        }
    }

    #[test]
    fn edge_list_dump_has_header_and_sorted_pairs() {
        let model = EdgeProbModel::homogeneous(1.5).unwrap();
        let seed = SeedSpec::new(3, 12);
        let g = sample_graph(&model, 40, seed).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf, seed).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert_eq!(header, format!("40 {} 3 12", g.edge_count()));
        let mut count = 0;
        for line in lines {
            let mut it = line.split_whitespace();
            let i: u32 = it.next().unwrap().parse().unwrap();
            let j: u32 = it.next().unwrap().parse().unwrap();
            assert!(i < j && j <= 40);
            count += 1;
        }
        assert_eq!(count, g.edge_count());
    }

    #[test]
    fn out_of_band_custom_model_is_rejected_during_sampling() {
        // Claims C = 1 (band ceiling 0.01 at n = 100) but assigns 0.5.
        let model = EdgeProbModel::custom(
            1.0,
            AlphaSequence::Zero,
            Arc::new(|_, _, _| 0.5),
        )
        .unwrap();
        assert!(matches!(
            sample_graph(&model, 100, SeedSpec::new(0, 0)),
            Err(Error::InfeasibleBand { .. })
        ));
    }

    #[test]
    fn mean_edge_count_tracks_the_exact_sum_of_probabilities() {
        // Homogeneous C = 2, n = 2000: edge count ~ Binomial(K, 2/n),
        // mean = (n-1) C / 2 = 1999, sd ~ sqrt(1999). Average 100 trials.
        let model = EdgeProbModel::homogeneous(2.0).unwrap();
        let n = 2000u64;
        let trials = 100u64;
        let mut total = 0u64;
        for t in 0..trials {
            total += sample_graph(&model, n, SeedSpec::new(1234, t)).unwrap().edge_count();
        }
        let mean = total as f64 / trials as f64;
        let exact = (n - 1) as f64 * 2.0 / 2.0;
        let sd_of_mean = (exact * (1.0 - 2.0 / n as f64)).sqrt() / (trials as f64).sqrt();
        assert!(
            (mean - exact).abs() < 4.0 * sd_of_mean,
            "mean {mean} vs exact {exact} (sd of mean {sd_of_mean})"
        );
    }
}
