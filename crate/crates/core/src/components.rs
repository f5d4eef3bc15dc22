//! Connected-component analysis of sampled graphs: a census of component
//! sizes (union-find), per-source BFS layer profiles, and the derived event
//! flags that classify a sample against the small/giant dichotomy — largest
//! component under M ln n, any component in the forbidden middle window,
//! giant mass inside its concentration band, and the one-giant-plus-dust
//! shape.

use std::fmt::Write as FmtWrite;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::Graph;

// ---------------------------------------------------------------------------
// Census
// ---------------------------------------------------------------------------

/// Component decomposition of a graph. Labels are ranks: component 0 is the
/// largest, so `sizes[comp_id[v - 1]]` is the size of v's component and
/// `sizes` doubles as the descending size list. Ties keep first-appearance
/// order, making labels deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentCensus {
    pub n: u64,
    /// Component label of each vertex, indexed by vertex - 1.
    pub comp_id: Vec<u32>,
    /// Component sizes in descending order, indexed by label.
    pub sizes: Vec<u64>,
}

impl ComponentCensus {
    /// Size of the component containing the 1-based vertex v.
    pub fn size_of(&self, v: u64) -> u64 {
        self.sizes[self.comp_id[v as usize - 1] as usize]
    }

    pub fn component_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn max_size(&self) -> u64 {
        self.sizes.first().copied().unwrap_or(0)
    }
}

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        // Path compression.
        let mut cur = x;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        // Union by size.
        let (big, small) = if self.size[ra as usize] >= self.size[rb as usize] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
    }
}

/// Component census of a graph via union-find with path compression and
/// union by size.
pub fn components(g: &Graph) -> ComponentCensus {
    let n = g.n() as usize;
    let mut uf = UnionFind::new(n);
    for v0 in 0..n {
        let v = (v0 + 1) as u32;
        for &w in g.neighbors(v as u64) {
            if w > v {
                uf.union(v0 as u32, w - 1);
            }
        }
    }
    // First pass: roots in vertex order, provisional labels by appearance.
    let mut label_of_root = vec![u32::MAX; n];
    let mut order: Vec<u32> = Vec::new(); // root of each provisional label
    let mut comp_id = vec![0u32; n];
    for v0 in 0..n {
        let root = uf.find(v0 as u32);
        if label_of_root[root as usize] == u32::MAX {
            label_of_root[root as usize] = order.len() as u32;
            order.push(root);
        }
        comp_id[v0] = label_of_root[root as usize];
    }
    // Re-rank labels by descending size; stable sort keeps appearance order
    // among equal sizes.
    let mut ranked: Vec<u32> = (0..order.len() as u32).collect();
    ranked.sort_by_key(|&lbl| std::cmp::Reverse(uf.size[order[lbl as usize] as usize]));
    let mut rank_of = vec![0u32; order.len()];
    for (rank, &lbl) in ranked.iter().enumerate() {
        rank_of[lbl as usize] = rank as u32;
    }
    let sizes: Vec<u64> = ranked
        .iter()
        .map(|&lbl| uf.size[order[lbl as usize] as usize] as u64)
        .collect();
    for id in &mut comp_id {
        *id = rank_of[*id as usize];
    }
    ComponentCensus {
        n: g.n(),
        comp_id,
        sizes,
    }
}

// ---------------------------------------------------------------------------
// BFS profile
// ---------------------------------------------------------------------------

/// Breadth-first layer profile from one source: `layer_sizes[t]` counts the
/// vertices at distance exactly t (layer 0 is the source itself; the first
/// empty layer is not stored), and `tau` is the depth at which the
/// exploration dies, i.e. the smallest t >= 1 with an empty layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BfsProfile {
    pub source: u64,
    pub layer_sizes: Vec<u64>,
    pub tau: u32,
}

/// BFS layer profile from the 1-based vertex `source`.
pub fn bfs_profile(g: &Graph, source: u64) -> Result<BfsProfile> {
    if source < 1 || source > g.n() {
        return Err(Error::BadVertex {
            n: g.n(),
            v: source,
        });
    }
    let n = g.n() as usize;
    let mut seen = vec![false; n];
    seen[source as usize - 1] = true;
    let mut frontier: Vec<u32> = vec![source as u32];
    let mut layer_sizes: Vec<u64> = Vec::new();
    while !frontier.is_empty() {
        layer_sizes.push(frontier.len() as u64);
        let mut next: Vec<u32> = Vec::new();
        for &v in &frontier {
            for &w in g.neighbors(v as u64) {
                if !seen[w as usize - 1] {
                    seen[w as usize - 1] = true;
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    let tau = layer_sizes.len() as u32;
    Ok(BfsProfile {
        source,
        layer_sizes,
        tau,
    })
}

/// Maximum vertex degree (0 for an edgeless graph).
pub fn max_degree(g: &Graph) -> u64 {
    (1..=g.n()).map(|v| g.degree(v)).max().unwrap_or(0)
}

// ---------------------------------------------------------------------------
// Event flags
// ---------------------------------------------------------------------------

/// Classification of one component census against the thresholds
/// (M, gamma, epsilon, q_c):
///
/// - `h1`: every component has at most M ln n vertices;
/// - `b`: some component size lies in the middle window (M ln n, eps n];
/// - `w`: the largest component has at least eps n vertices;
/// - `y_n` / `z_n`: vertices on components larger than eps n / the rest;
/// - `v`: y_n lies in [(1 - q_c - gamma) n, (1 - q_c + gamma) n];
/// - `h2`: v holds and the middle window is empty;
/// - `h3`: exactly one component size lies in the v-band and every other
///   component has at most M ln n vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventFlags {
    pub h1: bool,
    pub b: bool,
    pub w: bool,
    pub v: bool,
    pub h2: bool,
    pub h3: bool,
    pub y_n: u64,
    pub z_n: u64,
}

/// Evaluate the event flags for one census. `q_c` is the analytic
/// extinction value used to center the giant band.
pub fn event_flags(
    census: &ComponentCensus,
    m: f64,
    gamma: f64,
    epsilon: f64,
    q_c: f64,
) -> Result<EventFlags> {
    check_in(epsilon, "epsilon", 0.0, 1.0, false)?;
    check_in(gamma, "gamma", 0.0, 1.0, false)?;
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::BadParam {
            name: "m",
            value: m,
            requirement: "> 0 and finite",
        });
    }
    check_in(q_c, "q_c", 0.0, 1.0, true)?;
    let nf = census.n as f64;
    let small_cut = m * nf.ln();
    let giant_cut = epsilon * nf;
    let band_lo = (1.0 - q_c - gamma) * nf;
    let band_hi = (1.0 - q_c + gamma) * nf;

    let max = census.max_size() as f64;
    let h1 = max <= small_cut;
    let w = max >= giant_cut;
    let mut b = false;
    let mut y_n: u64 = 0;
    let mut in_band = 0u64;
    let mut rest_small = true;
    for &s in &census.sizes {
        let sf = s as f64;
        if sf > small_cut && sf <= giant_cut {
            b = true;
        }
        if sf > giant_cut {
            y_n += s;
        }
        if sf >= band_lo && sf <= band_hi {
            in_band += 1;
        } else if sf > small_cut {
            rest_small = false;
        }
    }
    let yf = y_n as f64;
    let v = yf >= band_lo && yf <= band_hi;
    let h2 = v && !b;
    let h3 = in_band == 1 && rest_small;
    Ok(EventFlags {
        h1,
        b,
        w,
        v,
        h2,
        h3,
        y_n,
        z_n: census.n - y_n,
    })
}

fn check_in(x: f64, name: &'static str, lo: f64, hi: f64, closed_hi: bool) -> Result<()> {
    let ok = x.is_finite() && x > lo && (if closed_hi { x <= hi } else { x < hi });
    if ok {
        Ok(())
    } else {
        Err(Error::BadParam {
            name,
            value: x,
            requirement: if closed_hi {
                "in (0, 1]"
            } else {
                "in (0, 1)"
            },
        })
    }
}

// ---------------------------------------------------------------------------
// CSV helpers
// ---------------------------------------------------------------------------

/// Header for the per-trial component-size table.
pub const CENSUS_CSV_HEADER: &str = "trial,comp_rank,size";

/// Append one row per component: rank 1 is the largest.
pub fn append_census_csv(buf: &mut String, trial: u64, census: &ComponentCensus) {
    for (rank0, &size) in census.sizes.iter().enumerate() {
        let _ = writeln!(buf, "{trial},{},{size}", rank0 + 1);
    }
}

/// Header for the per-trial flag table.
pub const FLAGS_CSV_HEADER: &str = "trial,h1,b,w,v,h2,h3,y_n,z_n,max_size,max_degree";

/// Append one row for a trial; booleans are written as 1/0.
pub fn append_flags_csv(
    buf: &mut String,
    trial: u64,
    flags: &EventFlags,
    max_size: u64,
    max_degree: u64,
) {
    let b = |x: bool| u8::from(x);
    let _ = writeln!(
        buf,
        "{trial},{},{},{},{},{},{},{},{},{max_size},{max_degree}",
        b(flags.h1),
        b(flags.b),
        b(flags.w),
        b(flags.v),
        b(flags.h2),
        b(flags.h3),
        flags.y_n,
        flags.z_n,
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: u64, edges: &[(u32, u32)]) -> Graph {
        Graph::from_edges(n, edges).unwrap()
    }

    #[test]
    fn census_of_edgeless_graph_is_all_singletons() {
        let c = components(&graph(5, &[]));
        assert_eq!(c.sizes, vec![1, 1, 1, 1, 1]);
        assert_eq!(c.component_count(), 5);
        assert_eq!(c.size_of(3), 1);
        // Singleton ties keep vertex order: labels are 0..5.
        assert_eq!(c.comp_id, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn census_of_path_plus_isolated_vertex() {
        let c = components(&graph(4, &[(1, 2), (2, 3)]));
        assert_eq!(c.sizes, vec![3, 1]);
        assert_eq!(c.comp_id, vec![0, 0, 0, 1]);
        assert_eq!(c.size_of(2), 3);
        assert_eq!(c.size_of(4), 1);
        assert_eq!(c.max_size(), 3);
    }

    #[test]
    fn census_of_complete_graph_is_one_component() {
        let c = components(&graph(
            4,
            &[(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)],
        ));
        assert_eq!(c.sizes, vec![4]);
        assert_eq!(c.comp_id, vec![0, 0, 0, 0]);
    }

    #[test]
    fn labels_are_size_ranks_with_appearance_tiebreak() {
        // Components {1,2}, {3,4,5}, {6}: sizes [3,2,1], so the triangle
        // gets label 0 even though the pair appears first.
        let c = components(&graph(6, &[(1, 2), (3, 4), (4, 5)]));
        assert_eq!(c.sizes, vec![3, 2, 1]);
        assert_eq!(c.comp_id, vec![1, 1, 0, 0, 0, 2]);
    }

    #[test]
    fn bfs_profile_examples() {
        // Isolated vertex.
        let p = bfs_profile(&graph(3, &[(2, 3)]), 1).unwrap();
        assert_eq!(p.layer_sizes, vec![1]);
        assert_eq!(p.tau, 1);
        // Star center with 3 leaves.
        let p = bfs_profile(&graph(4, &[(1, 2), (1, 3), (1, 4)]), 1).unwrap();
        assert_eq!(p.layer_sizes, vec![1, 3]);
        assert_eq!(p.tau, 2);
        // Path 1-2-3-4 from an end.
        let p = bfs_profile(&graph(4, &[(1, 2), (2, 3), (3, 4)]), 1).unwrap();
        assert_eq!(p.layer_sizes, vec![1, 1, 1, 1]);
        assert_eq!(p.tau, 4);
        // Same path from an interior vertex.
        let p = bfs_profile(&graph(4, &[(1, 2), (2, 3), (3, 4)]), 2).unwrap();
        assert_eq!(p.layer_sizes, vec![1, 2, 1]);
        assert_eq!(p.tau, 3);
        assert_eq!(p.source, 2);
    }

    #[test]
    fn bfs_profile_rejects_out_of_range_sources() {
        let g = graph(3, &[]);
        assert!(matches!(
            bfs_profile(&g, 0),
            Err(Error::BadVertex { n: 3, v: 0 })
        ));
        assert!(matches!(
            bfs_profile(&g, 4),
            Err(Error::BadVertex { n: 3, v: 4 })
        ));
    }

    #[test]
    fn max_degree_examples() {
        assert_eq!(max_degree(&graph(5, &[])), 0);
        assert_eq!(
            max_degree(&graph(4, &[(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)])),
            3
        );
        // Star on 8 vertices: center degree 7.
        let star: Vec<(u32, u32)> = (2..=8).map(|j| (1, j)).collect();
        assert_eq!(max_degree(&graph(8, &star)), 7);
    }

    /// A census with prescribed sizes, for flag tests.
    fn census_of_sizes(n: u64, sizes: &[u64]) -> ComponentCensus {
        assert_eq!(sizes.iter().sum::<u64>(), n);
        let mut sorted = sizes.to_vec();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let mut comp_id = Vec::with_capacity(n as usize);
        for (lbl, &s) in sorted.iter().enumerate() {
            comp_id.extend(std::iter::repeat(lbl as u32).take(s as usize));
        }
        ComponentCensus {
            n,
            comp_id,
            sizes: sorted,
        }
    }

    #[test]
    fn flags_for_one_giant_and_dust() {
        // n = 1000, sizes [800, 1 x 200]; eps = 0.1, q_c = 0.2032,
        // gamma = 0.05, M = 10: giant cut 100, small cut 69.08,
        // band [746.8, 846.8].
        let c = census_of_sizes(1000, &{
            let mut v = vec![800u64];
            v.extend(std::iter::repeat(1).take(200));
            v
        });
        let f = event_flags(&c, 10.0, 0.05, 0.1, 0.2032).unwrap();
        assert!(!f.h1);
        assert!(!f.b);
        assert!(f.w);
        assert_eq!(f.y_n, 800);
        assert_eq!(f.z_n, 200);
        assert!(f.v);
        assert!(f.h2);
        assert!(f.h3);
    }

    #[test]
    fn flags_for_two_giants() {
        // n = 1000, sizes [500, 400, 1 x 100]: Y = 900 overshoots the band,
        // no middle-window component, and no single component size inside
        // the giant band.
        let c = census_of_sizes(1000, &{
            let mut v = vec![500u64, 400];
            v.extend(std::iter::repeat(1).take(100));
            v
        });
        let f = event_flags(&c, 10.0, 0.05, 0.1, 0.2032).unwrap();
        assert_eq!(f.y_n, 900);
        assert!(!f.b, "500 and 400 both exceed eps n = 100");
        assert!(!f.v);
        assert!(!f.h2);
        assert!(!f.h3, "no component size inside [746.8, 846.8]");
        assert!(f.w);
    }

    #[test]
    fn flags_for_all_singletons() {
        let c = census_of_sizes(1000, &vec![1u64; 1000]);
        let f = event_flags(&c, 10.0, 0.05, 0.1, 0.2032).unwrap();
        assert!(f.h1);
        assert!(!f.b && !f.w && !f.v && !f.h2 && !f.h3);
        assert_eq!(f.y_n, 0);
        assert_eq!(f.z_n, 1000);
    }

    #[test]
    fn middle_window_uses_integer_sizes_against_real_cuts() {
        // n = 100, M = 1: small cut = ln(100) ~ 4.605, eps = 0.2 -> giant
        // cut 20. A component of size 5 sits in the window (4.605, 20].
        let c = census_of_sizes(100, &{
            let mut v = vec![5u64];
            v.extend(std::iter::repeat(1).take(95));
            v
        });
        let f = event_flags(&c, 1.0, 0.1, 0.2, 0.5).unwrap();
        assert!(f.b);
        assert!(!f.h1);
        // Size exactly at the giant cut stays in the window (closed top).
        let c = census_of_sizes(100, &{
            let mut v = vec![20u64];
            v.extend(std::iter::repeat(1).take(80));
            v
        });
        let f = event_flags(&c, 1.0, 0.1, 0.2, 0.5).unwrap();
        assert!(f.b, "size 20 = eps n counts as middle, not giant");
        assert!(f.w, "w compares max >= eps n inclusively");
        assert_eq!(f.y_n, 0, "giant mass requires size strictly above eps n");
    }

    #[test]
    fn flag_parameter_validation() {
        let c = census_of_sizes(10, &[10]);
        assert!(event_flags(&c, 10.0, 0.05, 0.0, 0.5).is_err());
        assert!(event_flags(&c, 10.0, 0.05, 1.0, 0.5).is_err());
        assert!(event_flags(&c, 10.0, 0.0, 0.1, 0.5).is_err());
        assert!(event_flags(&c, 10.0, 1.0, 0.1, 0.5).is_err());
        assert!(event_flags(&c, 0.0, 0.05, 0.1, 0.5).is_err());
        assert!(event_flags(&c, 10.0, 0.05, 0.1, 0.0).is_err());
        assert!(event_flags(&c, 10.0, 0.05, 0.1, 1.5).is_err());
        // q_c = 1 is the subcritical limit and is allowed.
        assert!(event_flags(&c, 10.0, 0.05, 0.1, 1.0).is_ok());
    }

    #[test]
    fn csv_rows_match_documented_shape() {
        let c = census_of_sizes(6, &[3, 2, 1]);
        let mut buf = String::from(CENSUS_CSV_HEADER);
        buf.push('\n');
        append_census_csv(&mut buf, 7, &c);
        assert_eq!(
            buf,
            "trial,comp_rank,size\n7,1,3\n7,2,2\n7,3,1\n"
        );
        let f = event_flags(&c, 1.0, 0.3, 0.4, 0.5).unwrap();
        let mut buf = String::new();
        append_flags_csv(&mut buf, 7, &f, c.max_size(), 2);
        assert_eq!(FLAGS_CSV_HEADER, "trial,h1,b,w,v,h2,h3,y_n,z_n,max_size,max_degree");
        // n=6: small cut ln 6 ~ 1.79, giant cut 2.4, band [1.2, 4.8].
        // Sizes 3 > 2.4 giant -> y=3; 2 in (1.79, 2.4] -> b; v: 3 in band.
        assert_eq!(buf, "7,0,1,1,1,0,0,3,3,3,2\n");
    }
}
