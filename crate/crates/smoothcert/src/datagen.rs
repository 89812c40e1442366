//! Synthetic datasets: the eight-family topology classification task and
//! a small stochastic block model for the node-classification demo.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bitgraph::GraphRecord;
use crate::error::{Error, Result};

/// Family names in label order (graph with family FAMILIES\[i\] gets label i).
pub const FAMILIES: [&str; 8] = [
    "cycle",
    "star",
    "wheel",
    "lollipop",
    "hypercube",
    "grid",
    "complete",
    "circular-ladder",
];

/// Shape of the topology dataset: 60 graphs per family, split 40 train /
/// 20 test per family (480 total, 320/160).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub per_family: usize,
    pub train_per_family: usize,
    pub seed: u64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec {
            per_family: 60,
            train_per_family: 40,
            seed: 0,
        }
    }
}

pub fn cycle_graph(n: usize) -> Result<GraphRecord> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("cycle needs n >= 3, got {n}")));
    }
    GraphRecord::new(n, (0..n).map(|i| (i, (i + 1) % n)), 0, Some("cycle".into()))
}

pub fn star_graph(n: usize) -> Result<GraphRecord> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("star needs n >= 2, got {n}")));
    }
    GraphRecord::new(n, (1..n).map(|i| (0, i)), 1, Some("star".into()))
}

/// Hub node 0 connected to a cycle on nodes 1..n.
pub fn wheel_graph(n: usize) -> Result<GraphRecord> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!("wheel needs n >= 4, got {n}")));
    }
    let rim = n - 1;
    let edges = (1..n)
        .map(|i| (0, i))
        .chain((0..rim).map(|i| (1 + i, 1 + (i + 1) % rim)));
    GraphRecord::new(n, edges, 2, Some("wheel".into()))
}

/// Clique on m nodes with a path of k further nodes hanging off node m-1.
pub fn lollipop_graph(m: usize, k: usize) -> Result<GraphRecord> {
    if m < 3 || k < 1 {
        return Err(Error::InvalidParameter(format!(
            "lollipop needs clique m >= 3 and path k >= 1, got ({m}, {k})"
        )));
    }
    let mut edges = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            edges.push((i, j));
        }
    }
    for t in 0..k {
        edges.push((m - 1 + t, m + t));
    }
    GraphRecord::new(m + k, edges, 3, Some("lollipop".into()))
}

/// d-dimensional hypercube: 2^d nodes, edges between masks differing in
/// one bit.
pub fn hypercube_graph(d: u32) -> Result<GraphRecord> {
    if d < 1 || d > 4 {
        return Err(Error::InvalidParameter(format!(
            "hypercube dimension must be in [1, 4] at desk scale, got {d}"
        )));
    }
    let n = 1usize << d;
    let mut edges = Vec::new();
    for v in 0..n {
        for bit in 0..d {
            let u = v ^ (1 << bit);
            if v < u {
                edges.push((v, u));
            }
        }
    }
    GraphRecord::new(n, edges, 4, Some("hypercube".into()))
}

/// r x c grid, row-major node numbering.
pub fn grid_graph(rows: usize, cols: usize) -> Result<GraphRecord> {
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid needs both sides >= 2, got {rows} x {cols}"
        )));
    }
    let at = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((at(r, c), at(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((at(r, c), at(r + 1, c)));
            }
        }
    }
    GraphRecord::new(rows * cols, edges, 5, Some("grid".into()))
}

pub fn complete_graph(n: usize) -> Result<GraphRecord> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("complete needs n >= 2, got {n}")));
    }
    let edges = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j)));
    GraphRecord::new(n, edges, 6, Some("complete".into()))
}

/// Two concentric k-cycles joined by k rungs (the prism graph), 2k nodes.
pub fn circular_ladder_graph(k: usize) -> Result<GraphRecord> {
    if k < 3 {
        return Err(Error::InvalidParameter(format!(
            "circular ladder needs k >= 3, got {k}"
        )));
    }
    let edges = (0..k)
        .map(|i| (i, (i + 1) % k))
        .chain((0..k).map(|i| (k + i, k + (i + 1) % k)))
        .chain((0..k).map(|i| (i, k + i)));
    GraphRecord::new(2 * k, edges, 7, Some("circular-ladder".into()))
}

fn sample_family(family: usize, rng: &mut ChaCha8Rng) -> Result<GraphRecord> {
    match family {
        0 => cycle_graph(rng.random_range(8..=20)),
        1 => star_graph(rng.random_range(8..=20)),
        2 => wheel_graph(rng.random_range(8..=20)),
        3 => {
            let m = rng.random_range(4..=8);
            let k = rng.random_range(3..=8);
            lollipop_graph(m, k)
        }
        4 => hypercube_graph(rng.random_range(3..=4)),
        5 => {
            let r = rng.random_range(3..=5);
            let c = rng.random_range(3..=5);
            grid_graph(r, c)
        }
        6 => complete_graph(rng.random_range(8..=20)),
        7 => circular_ladder_graph(rng.random_range(4..=10)),
        _ => Err(Error::InvalidParameter(format!("unknown family {family}"))),
    }
}

/// Generates the topology dataset: `per_family` graphs of each of the
/// eight families with sampled sizes, labels 0..=7 in [`FAMILIES`] order,
/// stratified split. Deterministic per seed.
pub fn generate_topology_dataset(
    spec: &DatasetSpec,
) -> Result<(Vec<GraphRecord>, Vec<GraphRecord>)> {
    if spec.per_family == 0 || spec.train_per_family == 0 {
        return Err(Error::Config("per-family counts must be positive".into()));
    }
    if spec.train_per_family >= spec.per_family {
        return Err(Error::Config(format!(
            "train_per_family {} leaves no test graphs out of {}",
            spec.train_per_family, spec.per_family
        )));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for family in 0..FAMILIES.len() {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ (family as u64) << 32);
        for i in 0..spec.per_family {
            let g = sample_family(family, &mut rng)?;
            debug_assert_eq!(g.label, family);
            if i < spec.train_per_family {
                train.push(g);
            } else {
                test.push(g);
            }
        }
    }
    Ok((train, test))
}

/// Standard stochastic block model: `k_blocks` blocks of `n_per_block`
/// nodes, within-block edges with probability `p_in`, cross-block with
/// `p_out`. Returns the graph and per-node block labels.
pub fn generate_sbm(
    n_per_block: usize,
    k_blocks: usize,
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> Result<(GraphRecord, Vec<usize>)> {
    if n_per_block == 0 || k_blocks == 0 {
        return Err(Error::InvalidParameter("empty block structure".into()));
    }
    for (name, p) in [("p_in", p_in), ("p_out", p_out)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "{name} must lie in [0, 1], got {p}"
            )));
        }
    }
    let n = n_per_block * k_blocks;
    let labels: Vec<usize> = (0..n).map(|i| i / n_per_block).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let p = if labels[i] == labels[j] { p_in } else { p_out };
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    let g = GraphRecord::new(n, edges, 0, Some("sbm".into()))?;
    Ok((g, labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn is_connected(g: &GraphRecord) -> bool {
        let mut adj = vec![Vec::new(); g.n];
        for &(i, j) in &g.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut seen = vec![false; g.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    #[test]
    fn cycle_shape() {
        let g = cycle_graph(11).unwrap();
        assert_eq!(g.edges.len(), 11);
        assert!(g.degrees().iter().all(|&d| d == 2));
        assert!(is_connected(&g));
    }

    #[test]
    fn star_and_wheel_shapes() {
        let s = star_graph(9).unwrap();
        assert_eq!(s.edges.len(), 8);
        assert_eq!(s.degrees()[0], 8);
        assert!(s.degrees()[1..].iter().all(|&d| d == 1));

        let w = wheel_graph(9).unwrap();
        assert_eq!(w.edges.len(), 16); // 2 (n - 1)
        assert_eq!(w.degrees()[0], 8);
        assert!(w.degrees()[1..].iter().all(|&d| d == 3));
    }

    #[test]
    fn lollipop_shape() {
        let g = lollipop_graph(5, 4).unwrap();
        assert_eq!(g.n, 9);
        assert_eq!(g.edges.len(), 10 + 4);
        assert_eq!(*g.degrees().last().unwrap(), 1); // path end
        assert!(is_connected(&g));
    }

    #[test]
    fn hypercube_q3_is_three_regular() {
        let g = hypercube_graph(3).unwrap();
        assert_eq!(g.n, 8);
        assert_eq!(g.edges.len(), 12);
        assert!(g.degrees().iter().all(|&d| d == 3));
        assert!(is_connected(&g));
    }

    #[test]
    fn grid_3x4_edge_count() {
        // r (c - 1) + c (r - 1) = 3 * 3 + 4 * 2 = 17
        let g = grid_graph(3, 4).unwrap();
        assert_eq!(g.n, 12);
        assert_eq!(g.edges.len(), 17);
        assert!(is_connected(&g));
    }

    #[test]
    fn complete_and_circular_ladder_shapes() {
        let k = complete_graph(8).unwrap();
        assert_eq!(k.edges.len(), 28);
        let cl = circular_ladder_graph(4).unwrap();
        assert_eq!(cl.n, 8);
        assert_eq!(cl.edges.len(), 12);
        assert!(cl.degrees().iter().all(|&d| d == 3));
        assert!(is_connected(&cl));
    }

    fn family_predicate(g: &GraphRecord) -> bool {
        let deg = g.degrees();
        let m = g.edges.len();
        let n = g.n;
        match g.label {
            0 => m == n && deg.iter().all(|&d| d == 2) && is_connected(g),
            1 => m == n - 1 && deg[0] == n - 1 && deg[1..].iter().all(|&d| d == 1),
            2 => m == 2 * (n - 1) && deg[0] == n - 1 && deg[1..].iter().all(|&d| d == 3),
            3 => {
                // Clique size recoverable from the max degree: hub of the
                // clique also carries the path, so clique nodes have
                // degree m0-1 except the attachment (m0).
                deg.iter().filter(|&&d| d == 1).count() == 1 && is_connected(g)
            }
            4 => {
                let d = (n as f64).log2() as usize;
                n == 1 << d && m == d * n / 2 && deg.iter().all(|&x| x == d)
            }
            5 => {
                is_connected(g)
                    && deg.iter().all(|&d| (2..=4).contains(&d))
                    && deg.iter().filter(|&&d| d == 2).count() == 4 // corners
            }
            6 => m == n * (n - 1) / 2 && deg.iter().all(|&d| d == n - 1),
            7 => n % 2 == 0 && m == 3 * n / 2 && deg.iter().all(|&d| d == 3) && is_connected(g),
            _ => false,
        }
    }

    #[test]
    fn dataset_is_stratified_and_valid() {
        let spec = DatasetSpec { seed: 7, ..DatasetSpec::default() };
        let (train, test) = generate_topology_dataset(&spec).unwrap();
        assert_eq!(train.len(), 320);
        assert_eq!(test.len(), 160);
        for fam in 0..8 {
            assert_eq!(train.iter().filter(|g| g.label == fam).count(), 40);
            assert_eq!(test.iter().filter(|g| g.label == fam).count(), 20);
        }
        for g in train.iter().chain(&test) {
            g.validate().unwrap();
            assert!(family_predicate(g), "family predicate failed: {g:?}");
            assert_eq!(g.family.as_deref(), Some(FAMILIES[g.label]));
            assert!(g.n <= 25);
        }
    }

    #[test]
    fn dataset_generation_is_deterministic() {
        let spec = DatasetSpec { seed: 99, ..DatasetSpec::default() };
        let (tr1, te1) = generate_topology_dataset(&spec).unwrap();
        let (tr2, te2) = generate_topology_dataset(&spec).unwrap();
        assert_eq!(tr1, tr2);
        assert_eq!(te1, te2);
        let dir = tempfile::tempdir().unwrap();
        let (p1, p2) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
        crate::bitgraph::write_jsonl(&p1, &tr1).unwrap();
        crate::bitgraph::write_jsonl(&p2, &tr2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn invalid_spec_is_rejected() {
        let spec = DatasetSpec { per_family: 10, train_per_family: 10, seed: 0 };
        assert!(generate_topology_dataset(&spec).is_err());
    }

    #[test]
    fn sbm_extremes() {
        let (g, labels) = generate_sbm(5, 3, 1.0, 0.0, 1).unwrap();
        assert_eq!(labels, vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2]);
        let edges: HashSet<_> = g.edges.iter().cloned().collect();
        for i in 0..15 {
            for j in (i + 1)..15 {
                assert_eq!(edges.contains(&(i, j)), labels[i] == labels[j]);
            }
        }
    }

    #[test]
    fn sbm_edge_counts_match_binomial_moments() {
        let (g, labels) = generate_sbm(10, 3, 0.5, 0.05, 42).unwrap();
        let mut within = [0usize; 3];
        for &(i, j) in &g.edges {
            if labels[i] == labels[j] {
                within[labels[i]] += 1;
            }
        }
        // Each block has C(10,2) = 45 slots at p = 0.5: 22.5 +- 3 * 3.35.
        for (b, &w) in within.iter().enumerate() {
            assert!(
                (w as f64 - 22.5).abs() <= 3.0 * (45.0f64 * 0.25).sqrt(),
                "block {b}: {w} within-block edges"
            );
        }
    }

    #[test]
    fn sbm_with_equal_probabilities_ignores_labels() {
        // p_in = p_out makes the model a plain G(n, p); within- and
        // cross-block edge counts must both track their slot counts.
        let (g, labels) = generate_sbm(12, 2, 0.3, 0.3, 9).unwrap();
        let within_slots = 2.0 * 66.0; // 2 * C(12, 2)
        let cross_slots = 144.0;
        let (mut within, mut cross) = (0usize, 0usize);
        for &(i, j) in &g.edges {
            if labels[i] == labels[j] {
                within += 1;
            } else {
                cross += 1;
            }
        }
        let sd_w = (within_slots * 0.3 * 0.7).sqrt();
        let sd_c = (cross_slots * 0.3 * 0.7).sqrt();
        assert!((within as f64 - within_slots * 0.3).abs() <= 4.0 * sd_w);
        assert!((cross as f64 - cross_slots * 0.3).abs() <= 4.0 * sd_c);
    }

    #[test]
    fn sbm_rejects_bad_probabilities() {
        assert!(generate_sbm(5, 2, 1.2, 0.0, 0).is_err());
        assert!(generate_sbm(5, 2, 0.5, -0.1, 0).is_err());
        assert!(generate_sbm(0, 2, 0.5, 0.1, 0).is_err());
    }
}
