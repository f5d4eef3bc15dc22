//! Property tests for the component census: agreement with an independent
//! BFS flood-fill reference on a thousand random graphs, BFS profile
//! consistency, and the event-flag identities.

use ergraph::components::{bfs_profile, components, event_flags};
use ergraph::probmodel::EdgeProbModel;
use ergraph::sampler::{sample_graph, Graph, SeedSpec};

/// Reference census: plain BFS flood fill, no union-find.
fn flood_fill_labels(g: &Graph) -> Vec<u32> {
    let n = g.n() as usize;
    let mut label = vec![u32::MAX; n];
    let mut next = 0u32;
    for start in 1..=g.n() {
        if label[start as usize - 1] != u32::MAX {
            continue;
        }
        let mut queue = vec![start as u32];
        label[start as usize - 1] = next;
        while let Some(v) = queue.pop() {
            for &w in g.neighbors(v as u64) {
                if label[w as usize - 1] == u32::MAX {
                    label[w as usize - 1] = next;
                    queue.push(w);
                }
            }
        }
        next += 1;
    }
    label
}

fn random_graph(n: u64, c: f64, seed: u64) -> Graph {
    let model = EdgeProbModel::homogeneous(c).unwrap();
    sample_graph(&model, n, SeedSpec::new(seed, 0)).unwrap()
}

#[test]
fn census_partition_matches_flood_fill_on_a_thousand_graphs() {
    let cs = [0.5f64, 1.0, 2.0, 4.0];
    for i in 0..1000u64 {
        let n = 2 + i % 99; // 2..=100
        let c = cs[(i / 99) as usize % 4].min((n - 1) as f64);
        let g = random_graph(n, c, 0xC0FFEE + i);
        let census = components(&g);
        let reference = flood_fill_labels(&g);
        // Same partition: label equality must coincide pairwise. Comparing
        // via canonical maps avoids the O(n^2) pair loop.
        let mut seen_census = std::collections::HashMap::new();
        let mut seen_ref = std::collections::HashMap::new();
        for v in 0..n as usize {
            let a = *seen_census.entry(census.comp_id[v]).or_insert(v);
            let b = *seen_ref.entry(reference[v]).or_insert(v);
            assert_eq!(a, b, "partition mismatch at vertex {} (graph {i})", v + 1);
        }
        // Size bookkeeping.
        assert_eq!(census.sizes.iter().sum::<u64>(), n);
        assert!(census.sizes.windows(2).all(|w| w[0] >= w[1]));
        // sizes[label] really is the size of that component.
        let mut tally = vec![0u64; census.sizes.len()];
        for &lbl in &census.comp_id {
            tally[lbl as usize] += 1;
        }
        assert_eq!(tally, census.sizes);
    }
}

#[test]
fn bfs_reachable_mass_equals_component_size() {
    for i in 0..30u64 {
        let n = 50 + i * 5; // up to 195
        let g = random_graph(n, 1.5, 0xBEEF + i);
        let census = components(&g);
        for v in 1..=n {
            let profile = bfs_profile(&g, v).unwrap();
            assert_eq!(
                profile.layer_sizes.iter().sum::<u64>(),
                census.size_of(v),
                "vertex {v} in graph {i}"
            );
            assert_eq!(profile.tau as usize, profile.layer_sizes.len());
            assert_eq!(profile.layer_sizes[0], 1);
        }
    }
}

#[test]
fn event_flag_identities_hold_on_random_censuses() {
    let thresholds = [
        (2.0, 0.10, 0.05, 0.5),
        (5.0, 0.20, 0.10, 0.8),
        (1.0, 0.05, 0.30, 0.2032),
    ];
    for i in 0..200u64 {
        let n = 100 + (i % 10) * 100;
        let c = [0.5, 1.0, 2.0, 3.0][(i % 4) as usize];
        let g = random_graph(n, c, 0xFACADE + i);
        let census = components(&g);
        for &(m, gamma, epsilon, q_c) in &thresholds {
            let f = event_flags(&census, m, gamma, epsilon, q_c).unwrap();
            // Mass conservation.
            assert_eq!(f.y_n + f.z_n, n);
            // y_n recomputed from the raw sizes.
            let giant_cut = epsilon * n as f64;
            let y: u64 = census
                .sizes
                .iter()
                .filter(|&&s| s as f64 > giant_cut)
                .sum();
            assert_eq!(f.y_n, y);
            // h2 is exactly v and no middle-window component, and the
            // window-free condition matches the everything-small-or-giant
            // phrasing.
            let small_cut = m * (n as f64).ln();
            let all_small_or_giant = census
                .sizes
                .iter()
                .all(|&s| (s as f64) <= small_cut || (s as f64) > giant_cut);
            assert_eq!(f.b, !all_small_or_giant);
            assert_eq!(f.h2, f.v && !f.b);
            // h1 means the largest component is small.
            assert_eq!(f.h1, (census.max_size() as f64) <= small_cut);
        }
    }
}
