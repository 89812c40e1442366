//! Binary graph encodings and XOR perturbation algebra.
//!
//! An undirected simple graph on `n` nodes is flattened to one bit per
//! unordered node pair, row-major over the strict upper triangle:
//! (0,1), (0,2), ..., (0,n-1), (1,2), ... Attacks and smoothing noise both
//! act on this vector by XOR, so an L0 radius counts edge flips directly.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An undirected simple graph with a class label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphRecord {
    /// Node count.
    pub n: usize,
    /// Unordered edges (i, j) with i < j, sorted, no duplicates.
    pub edges: Vec<(usize, usize)>,
    /// Class index in [0, K).
    pub label: usize,
    /// Topology family name (metadata; not used by any computation).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
}

impl GraphRecord {
    /// Builds a record, normalizing edge endpoint order and sorting the
    /// edge list, then checks the structural invariants.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        label: usize,
        family: Option<String>,
    ) -> Result<Self> {
        let mut edges: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(i, j)| if i <= j { (i, j) } else { (j, i) })
            .collect();
        edges.sort_unstable();
        let rec = GraphRecord {
            n,
            edges,
            label,
            family,
        };
        rec.validate()?;
        Ok(rec)
    }

    /// Checks the invariants: n >= 1, endpoints in range, no self-loops,
    /// no duplicate edges, endpoints ordered i < j.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput("graph must have n >= 1".into()));
        }
        for &(i, j) in &self.edges {
            if i == j {
                return Err(Error::InvalidInput(format!("self-loop at node {i}")));
            }
            if i > j {
                return Err(Error::InvalidInput(format!(
                    "edge ({i}, {j}) not in canonical i < j order"
                )));
            }
            if j >= self.n {
                return Err(Error::InvalidInput(format!(
                    "edge ({i}, {j}) has endpoint >= n = {}",
                    self.n
                )));
            }
        }
        if self.edges.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("duplicate edge".into()));
        }
        Ok(())
    }

    /// Number of edge slots, N = n(n-1)/2.
    pub fn bit_len(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    /// Degree of every node.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }
}

/// Position of pair (i, j), i < j, in the row-major upper-triangle order.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Inverse of [`pair_index`].
pub fn index_pair(n: usize, mut idx: usize) -> (usize, usize) {
    for i in 0..n {
        let row = n - i - 1;
        if idx < row {
            return (i, i + 1 + idx);
        }
        idx -= row;
    }
    panic!("bit index out of range for n = {n}");
}

/// A fixed-length vector of bits, the domain of noise, attacks and
/// classifiers. Backed by 64-bit words; trailing bits of the last word
/// are kept zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = BitVector::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Parses a string of '0'/'1' characters; handy in tests and debug dumps.
    pub fn from_str01(s: &str) -> Result<Self> {
        let mut v = BitVector::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(i, true),
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "bit string may contain only 0/1, got {c:?}"
                    )))
                }
            }
        }
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    /// Number of set bits (the L0 weight).
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Hamming distance to another vector of the same length.
    pub fn hamming(&self, other: &BitVector) -> Result<usize> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                actual: other.len,
            });
        }
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    pub fn xor_in_place(&mut self, other: &BitVector) -> Result<()> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                actual: other.len,
            });
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    /// Indices of set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// An XOR perturbation together with its L0 weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Perturbation {
    delta: BitVector,
    weight: usize,
}

impl Perturbation {
    pub fn new(delta: BitVector) -> Self {
        let weight = delta.count_ones();
        Perturbation { delta, weight }
    }

    pub fn delta(&self) -> &BitVector {
        &self.delta
    }

    /// L0 norm of the perturbation (count of flipped edge slots).
    pub fn weight(&self) -> usize {
        self.weight
    }
}

/// Flattens a graph to its upper-triangle edge bits.
pub fn encode_graph(g: &GraphRecord) -> BitVector {
    let mut bits = BitVector::zeros(g.bit_len());
    for &(i, j) in &g.edges {
        bits.set(pair_index(g.n, i, j), true);
    }
    bits
}

/// Rebuilds a graph from edge bits. `bits.len()` must equal n(n-1)/2.
pub fn decode_graph(
    bits: &BitVector,
    n: usize,
    label: usize,
    family: Option<String>,
) -> Result<GraphRecord> {
    if bits.len() != n * (n - 1) / 2 {
        return Err(Error::InvalidInput(format!(
            "bit length {} does not match n(n-1)/2 = {} for n = {n}",
            bits.len(),
            n * (n - 1) / 2
        )));
    }
    let edges: Vec<(usize, usize)> = bits.ones().map(|idx| index_pair(n, idx)).collect();
    GraphRecord::new(n, edges, label, family)
}

/// XOR of a vector with a perturbation; an involution.
pub fn apply_perturbation(x: &BitVector, d: &Perturbation) -> Result<BitVector> {
    let mut out = x.clone();
    out.xor_in_place(d.delta())?;
    Ok(out)
}

/// Converts an edge-flip count to the symmetric-matrix L0 convention,
/// where each flipped edge touches both (i, j) and (j, i).
pub fn matrix_l0_of(edge_flips: usize) -> usize {
    2 * edge_flips
}

/// Writes records as JSON Lines (one object per line, LF endings).
pub fn write_jsonl(path: &Path, records: &[GraphRecord]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for rec in records {
        serde_json::to_writer(&mut out, rec)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads and validates a JSON Lines dataset.
pub fn read_jsonl(path: &Path) -> Result<Vec<GraphRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: GraphRecord = serde_json::from_str(&line).map_err(|e| {
            Error::InvalidInput(format!("line {}: {e}", lineno + 1))
        })?;
        rec.validate()?;
        records.push(rec);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path3() -> GraphRecord {
        GraphRecord::new(3, vec![(0, 1), (1, 2)], 0, None).unwrap()
    }

    #[test]
    fn encode_empty_graph() {
        let g = GraphRecord::new(3, vec![], 0, None).unwrap();
        assert_eq!(encode_graph(&g).to_string(), "000");
    }

    #[test]
    fn encode_complete_k3() {
        let g = GraphRecord::new(3, vec![(0, 1), (0, 2), (1, 2)], 0, None).unwrap();
        assert_eq!(encode_graph(&g).to_string(), "111");
    }

    #[test]
    fn encode_path_follows_upper_triangle_order() {
        // bits for (0,1), (0,2), (1,2)
        assert_eq!(encode_graph(&path3()).to_string(), "101");
    }

    #[test]
    fn pair_index_row_major() {
        let n = 5;
        let mut expect = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                assert_eq!(pair_index(n, i, j), expect);
                assert_eq!(index_pair(n, expect), (i, j));
                expect += 1;
            }
        }
    }

    #[test]
    fn apply_identity_and_self_cancellation() {
        let x = BitVector::from_str01("101").unwrap();
        let zero = Perturbation::new(BitVector::zeros(3));
        assert_eq!(apply_perturbation(&x, &zero).unwrap(), x);
        let self_d = Perturbation::new(x.clone());
        assert_eq!(
            apply_perturbation(&x, &self_d).unwrap(),
            BitVector::zeros(3)
        );
    }

    #[test]
    fn apply_bitwise_definition() {
        let x = BitVector::from_str01("1100").unwrap();
        let d = Perturbation::new(BitVector::from_str01("0110").unwrap());
        assert_eq!(apply_perturbation(&x, &d).unwrap().to_string(), "1010");
    }

    #[test]
    fn apply_rejects_length_mismatch() {
        let x = BitVector::zeros(4);
        let d = Perturbation::new(BitVector::zeros(5));
        assert!(matches!(
            apply_perturbation(&x, &d),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn matrix_l0_doubles_edge_flips() {
        assert_eq!(matrix_l0_of(0), 0);
        assert_eq!(matrix_l0_of(1), 2);
        assert_eq!(matrix_l0_of(7), 14);
    }

    #[test]
    fn validate_rejects_bad_graphs() {
        assert!(GraphRecord::new(3, vec![(1, 1)], 0, None).is_err());
        assert!(GraphRecord::new(3, vec![(0, 1), (1, 0)], 0, None).is_err());
        assert!(GraphRecord::new(3, vec![(0, 3)], 0, None).is_err());
    }

    #[test]
    fn jsonl_roundtrip_and_schema() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("graphs.jsonl");
        let recs = vec![
            GraphRecord::new(3, vec![(0, 1), (1, 2)], 2, Some("path".into())).unwrap(),
            GraphRecord::new(4, vec![(0, 3)], 1, Some("pair".into())).unwrap(),
        ];
        write_jsonl(&path, &recs).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            r#"{"n":3,"edges":[[0,1],[1,2]],"label":2,"family":"path"}"#
        );
        assert_eq!(read_jsonl(&path).unwrap(), recs);
    }

    prop_compose! {
        fn arb_graph()(n in 1usize..10)(
            n in Just(n),
            mask in proptest::collection::vec(any::<bool>(), n * (n - 1) / 2),
        ) -> GraphRecord {
            let edges = mask
                .iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(idx, _)| index_pair(n, idx));
            GraphRecord::new(n, edges, 0, None).unwrap()
        }
    }

    proptest! {
        #[test]
        fn decode_encode_is_identity(g in arb_graph()) {
            let bits = encode_graph(&g);
            let back = decode_graph(&bits, g.n, g.label, g.family.clone()).unwrap();
            prop_assert_eq!(back, g);
        }

        #[test]
        fn hamming_after_xor_equals_weight(
            bits in proptest::collection::vec(any::<bool>(), 0..200),
            flips in proptest::collection::vec(any::<bool>(), 0..200),
        ) {
            let len = bits.len().min(flips.len());
            let x = BitVector::from_bools(&bits[..len]);
            let d = Perturbation::new(BitVector::from_bools(&flips[..len]));
            let y = apply_perturbation(&x, &d).unwrap();
            prop_assert_eq!(x.hamming(&y).unwrap(), d.weight());
            // involution
            prop_assert_eq!(apply_perturbation(&y, &d).unwrap(), x);
        }

        #[test]
        fn xor_is_commutative_and_associative(
            a in proptest::collection::vec(any::<bool>(), 64..130),
            b in proptest::collection::vec(any::<bool>(), 64..130),
            c in proptest::collection::vec(any::<bool>(), 64..130),
        ) {
            let len = a.len().min(b.len()).min(c.len());
            let a = BitVector::from_bools(&a[..len]);
            let b = BitVector::from_bools(&b[..len]);
            let c = BitVector::from_bools(&c[..len]);
            let mut ab = a.clone();
            ab.xor_in_place(&b).unwrap();
            let mut ba = b.clone();
            ba.xor_in_place(&a).unwrap();
            prop_assert_eq!(&ab, &ba);
            let mut ab_c = ab.clone();
            ab_c.xor_in_place(&c).unwrap();
            let mut bc = b.clone();
            bc.xor_in_place(&c).unwrap();
            let mut a_bc = a.clone();
            a_bc.xor_in_place(&bc).unwrap();
            prop_assert_eq!(ab_c, a_bc);
        }
    }
}
