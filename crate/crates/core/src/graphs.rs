//! Finite graphs with a total order on isomorphism classes.
//!
//! Vertices are `1..=n`. Undirected graphs are stored as symmetric directed
//! edge sets, so adjacency semantics can be stated once for ordered pairs.
//! The canonical code of a graph is the lexicographically smallest bit
//! string its adjacency matrix attains under any vertex relabeling; equal
//! codes characterize isomorphism, and lexicographic comparison of codes
//! gives the order `compare_unlabeled` used by ordered enumeration.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::search::Meter;

/// Default cap on `n` for the factorial canonicalization search.
pub const CANON_BUDGET: usize = 10;
/// Default cap on `n` for undirected isomorphism-class enumeration.
pub const ENUM_BUDGET_UNDIRECTED: usize = 6;
/// Default cap on `n` for directed isomorphism-class enumeration.
pub const ENUM_BUDGET_DIRECTED: usize = 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {v} out of range 1..={n}")]
    VertexOutOfRange { v: usize, n: usize },
    #[error("operands disagree on vertex count or directedness")]
    MismatchedOperands,
    #[error("edge union of an empty graph list")]
    EmptyUnion,
    #[error("empty vertex subset")]
    EmptySubset,
    #[error("family index must be at least 1")]
    BadFamilyIndex,
    #[error("{op}: n = {n} exceeds budget {budget}")]
    BudgetExceeded {
        op: &'static str,
        n: usize,
        budget: usize,
    },
}

/// Parse/encode errors for the graph6 and digraph6 text formats.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum G6Error {
    #[error("empty graph6 input")]
    Empty,
    #[error("byte {byte:#04x} at offset {offset} outside graph6 alphabet")]
    BadChar { offset: usize, byte: u8 },
    #[error("multi-byte size header at offset {offset} (n > 62 unsupported)")]
    UnsupportedSize { offset: usize },
    #[error("cannot encode graph with n = {n} > 62")]
    TooLarge { n: usize },
    #[error("truncated bit field: expected {expected} data bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("trailing data at offset {offset}")]
    TrailingData { offset: usize },
    #[error("nonzero padding bits in final byte at offset {offset}")]
    NonzeroPadding { offset: usize },
    #[error("digraph6 diagonal bit set for vertex {vertex}")]
    DiagonalBit { vertex: usize },
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<G6Error>,
    },
}

/// A finite graph without loops or multi-edges.
///
/// The `directed` flag records intent; an undirected graph keeps both
/// orientations of every edge in `edges`, preserving the symmetry
/// invariant on every mutation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Graph {
    n: usize,
    directed: bool,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, directed: bool) -> Graph {
        Graph {
            n,
            directed,
            edges: BTreeSet::new(),
        }
    }

    pub fn undirected(n: usize) -> Graph {
        Graph::new(n, false)
    }

    pub fn directed(n: usize) -> Graph {
        Graph::new(n, true)
    }

    pub fn from_edges(
        n: usize,
        directed: bool,
        edges: &[(usize, usize)],
    ) -> Result<Graph, GraphError> {
        let mut g = Graph::new(n, directed);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Graph {
        let mut g = Graph::undirected(n);
        for u in 1..=n {
            for v in u + 1..=n {
                g.add_edge(u, v).unwrap();
            }
        }
        g
    }

    pub fn path(n: usize) -> Graph {
        let mut g = Graph::undirected(n);
        for u in 1..n {
            g.add_edge(u, u + 1).unwrap();
        }
        g
    }

    pub fn cycle(n: usize) -> Graph {
        let mut g = Graph::path(n);
        if n >= 3 {
            g.add_edge(n, 1).unwrap();
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> {
        1..=self.n
    }

    fn check_vertex(&self, v: usize) -> Result<(), GraphError> {
        if v == 0 || v > self.n {
            return Err(GraphError::VertexOutOfRange { v, n: self.n });
        }
        Ok(())
    }

    /// Adds an edge; for undirected graphs both orientations are inserted.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        self.edges.insert((u, v));
        if !self.directed {
            self.edges.insert((v, u));
        }
        Ok(())
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u, v))
    }

    /// All ordered adjacent pairs (an undirected edge appears twice).
    pub fn edge_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// Number of ordered adjacent pairs.
    pub fn ordered_edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Number of edges in the conventional sense (undirected pairs counted once).
    pub fn edge_count(&self) -> usize {
        if self.directed {
            self.edges.len()
        } else {
            self.edges.len() / 2
        }
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(u, _)| u == v).count()
    }

    /// Same vertex count and same ordered adjacency, ignoring the
    /// directedness flag. This is the equality the membership searches use
    /// when comparing an induced graph against a target.
    pub fn same_adjacency(&self, other: &Graph) -> bool {
        self.n == other.n && self.edges == other.edges
    }

    /// Layout positions of the canonical bit string: row-major upper
    /// triangle for undirected graphs, row-major off-diagonal entries for
    /// directed ones. Vertices here are 0-based.
    fn layout(n: usize, directed: bool) -> Vec<(usize, usize)> {
        let mut pos = Vec::new();
        if directed {
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        pos.push((i, j));
                    }
                }
            }
        } else {
            for i in 0..n {
                for j in i + 1..n {
                    pos.push((i, j));
                }
            }
        }
        pos
    }

    fn layout_len(n: usize, directed: bool) -> usize {
        if directed {
            n * (n - 1)
        } else {
            n * (n - 1) / 2
        }
    }

    /// Packs the adjacency bits in layout order, first position at the
    /// most significant bit, so integer order equals lexicographic order.
    fn adjacency_bits(&self) -> u128 {
        let pos = Graph::layout(self.n, self.directed);
        let mut bits = 0u128;
        for (i, j) in pos {
            bits <<= 1;
            if self.has_edge(i + 1, j + 1) {
                bits |= 1;
            }
        }
        bits
    }

    fn from_adjacency_bits(n: usize, directed: bool, bits: u128) -> Graph {
        let pos = Graph::layout(n, directed);
        let nbits = pos.len();
        let mut g = Graph::new(n, directed);
        for (p, (i, j)) in pos.iter().enumerate() {
            if (bits >> (nbits - 1 - p)) & 1 == 1 {
                g.add_edge(i + 1, j + 1).unwrap();
            }
        }
        g
    }

    /// Canonical code under the default budget of [`CANON_BUDGET`].
    pub fn canonical_code(&self) -> Result<CanonicalCode, GraphError> {
        self.canonical_code_within(CANON_BUDGET)
    }

    /// Lexicographically minimal adjacency bit string over all vertex
    /// relabelings, by exhaustive permutation search.
    pub fn canonical_code_within(&self, max_n: usize) -> Result<CanonicalCode, GraphError> {
        if self.n > max_n {
            return Err(GraphError::BudgetExceeded {
                op: "canonical_code",
                n: self.n,
                budget: max_n,
            });
        }
        let ctx = CanonCtx::new(self.n, self.directed);
        let bits = ctx.canonical_bits(self.adjacency_bits());
        Ok(CanonicalCode::from_packed(bits, ctx.nbits))
    }

    /// The code-minimal labeled representative of this graph's
    /// isomorphism class.
    pub fn canonical_form(&self) -> Result<Graph, GraphError> {
        let ctx = CanonCtx::new(self.n, self.directed);
        if self.n > CANON_BUDGET {
            return Err(GraphError::BudgetExceeded {
                op: "canonical_form",
                n: self.n,
                budget: CANON_BUDGET,
            });
        }
        let bits = ctx.canonical_bits(self.adjacency_bits());
        Ok(Graph::from_adjacency_bits(self.n, self.directed, bits))
    }

    /// Total order on unlabeled graphs: lexicographic on canonical codes.
    pub fn compare_unlabeled(&self, other: &Graph) -> Result<Ordering, GraphError> {
        if self.n != other.n || self.directed != other.directed {
            return Err(GraphError::MismatchedOperands);
        }
        Ok(self.canonical_code()?.cmp(&other.canonical_code()?))
    }

    /// Subgraph induced by the vertex set `subset`, renumbered `1..=|S|`
    /// preserving the original vertex order.
    pub fn induced_subgraph(&self, subset: &[usize]) -> Result<Graph, GraphError> {
        let set: BTreeSet<usize> = subset.iter().copied().collect();
        if set.is_empty() {
            return Err(GraphError::EmptySubset);
        }
        for &v in &set {
            self.check_vertex(v)?;
        }
        let order: Vec<usize> = set.into_iter().collect();
        let mut g = Graph::new(order.len(), self.directed);
        for (a, &u) in order.iter().enumerate() {
            for (b, &v) in order.iter().enumerate() {
                if a != b && self.has_edge(u, v) {
                    g.edges.insert((a + 1, b + 1));
                }
            }
        }
        Ok(g)
    }
}

/// Permutation-minimal adjacency bit string; equal codes characterize
/// isomorphism and lexicographic comparison orders unlabeled graphs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalCode {
    bits: Vec<bool>,
}

impl CanonicalCode {
    fn from_packed(packed: u128, nbits: usize) -> CanonicalCode {
        let bits = (0..nbits)
            .map(|p| (packed >> (nbits - 1 - p)) & 1 == 1)
            .collect();
        CanonicalCode { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// Shared state for permutation-minimizing a fixed (n, directedness).
struct CanonCtx {
    nbits: usize,
    positions: Vec<(usize, usize)>,
    /// idx[u][v] = layout position of the (u,v) bit, 0-based vertices.
    idx: Vec<Vec<usize>>,
}

impl CanonCtx {
    fn new(n: usize, directed: bool) -> CanonCtx {
        let positions = Graph::layout(n, directed);
        let mut idx = vec![vec![usize::MAX; n]; n];
        for (p, &(i, j)) in positions.iter().enumerate() {
            idx[i][j] = p;
            if !directed {
                idx[j][i] = p;
            }
        }
        CanonCtx {
            nbits: positions.len(),
            positions,
            idx,
        }
    }

    fn code_under(&self, bits: u128, perm: &[usize]) -> u128 {
        let nbits = self.nbits;
        let mut out = 0u128;
        for &(a, b) in &self.positions {
            let q = self.idx[perm[a]][perm[b]];
            out = (out << 1) | ((bits >> (nbits - 1 - q)) & 1);
        }
        out
    }

    fn canonical_bits(&self, bits: u128) -> u128 {
        let n = self.idx.len();
        if n <= 1 {
            return 0;
        }
        let mut best = u128::MAX;
        for_each_permutation(n, |perm| {
            let code = self.code_under(bits, perm);
            if code < best {
                best = code;
            }
        });
        best
    }
}

/// Heap's algorithm; calls `f` once per permutation of `0..n`.
fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut a: Vec<usize> = (0..n).collect();
    f(&a);
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            f(&a);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Edge-union of graphs on a common vertex set.
pub fn edge_union(graphs: &[Graph]) -> Result<Graph, GraphError> {
    let first = graphs.first().ok_or(GraphError::EmptyUnion)?;
    let mut out = first.clone();
    for g in &graphs[1..] {
        if g.n != first.n || g.directed != first.directed {
            return Err(GraphError::MismatchedOperands);
        }
        out.edges.extend(g.edges.iter().copied());
    }
    Ok(out)
}

/// The `i`-th member of the unbounded-interval-number family: a center `c`
/// with `i` attached 4-cycles `c—a_j—d_j—b_j—c`. Vertex 1 is the center;
/// cycle `j` uses vertices `3j-1, 3j, 3j+1`.
pub fn family_fig1(i: usize) -> Result<Graph, GraphError> {
    if i == 0 {
        return Err(GraphError::BadFamilyIndex);
    }
    let mut g = Graph::undirected(3 * i + 1);
    for j in 1..=i {
        let (a, d, b) = (3 * j - 1, 3 * j, 3 * j + 1);
        g.add_edge(1, a)?;
        g.add_edge(a, d)?;
        g.add_edge(d, b)?;
        g.add_edge(b, 1)?;
    }
    Ok(g)
}

/// Result of one metered enumeration step.
#[derive(Debug)]
pub enum MeteredNext {
    Found(Graph),
    Exhausted,
    BudgetExceeded,
}

/// Lazy stream of one representative per isomorphism class, strictly
/// increasing in the canonical-code order.
///
/// Candidates are all adjacency bit strings in lexicographic order; a
/// candidate is emitted iff it equals its own canonical code.
pub struct GraphStream {
    n: usize,
    directed: bool,
    ctx: CanonCtx,
    next: u128,
    end: u128,
}

impl GraphStream {
    fn new(n: usize, directed: bool) -> GraphStream {
        let ctx = CanonCtx::new(n, directed);
        let end = if n <= 1 { 1 } else { 1u128 << ctx.nbits };
        GraphStream {
            n,
            directed,
            ctx,
            next: 0,
            end,
        }
    }

    /// Advances to the next representative, charging one enumeration
    /// candidate per bit string scanned.
    pub fn next_metered(&mut self, meter: &mut Meter) -> MeteredNext {
        while self.next < self.end {
            if !meter.charge_candidate() {
                return MeteredNext::BudgetExceeded;
            }
            let v = self.next;
            self.next += 1;
            if self.ctx.canonical_bits(v) == v {
                return MeteredNext::Found(Graph::from_adjacency_bits(self.n, self.directed, v));
            }
        }
        MeteredNext::Exhausted
    }
}

impl Iterator for GraphStream {
    type Item = Graph;

    fn next(&mut self) -> Option<Graph> {
        while self.next < self.end {
            let v = self.next;
            self.next += 1;
            if self.ctx.canonical_bits(v) == v {
                return Some(Graph::from_adjacency_bits(self.n, self.directed, v));
            }
        }
        None
    }
}

/// Enumerates unlabeled graphs on `n` vertices in canonical-code order,
/// under the default size budgets.
pub fn enumerate_graphs(n: usize, directed: bool) -> Result<GraphStream, GraphError> {
    let budget = if directed {
        ENUM_BUDGET_DIRECTED
    } else {
        ENUM_BUDGET_UNDIRECTED
    };
    enumerate_graphs_budget(n, directed, budget)
}

/// Ordered enumeration with an explicit size budget. The stream itself is
/// lazy; combine with [`GraphStream::next_metered`] to also bound the
/// number of candidates scanned.
pub fn enumerate_graphs_budget(
    n: usize,
    directed: bool,
    max_n: usize,
) -> Result<GraphStream, GraphError> {
    if n > max_n || Graph::layout_len(n.max(2), directed) > 120 {
        return Err(GraphError::BudgetExceeded {
            op: "enumerate_graphs",
            n,
            budget: max_n,
        });
    }
    Ok(GraphStream::new(n, directed))
}

// ---------------------------------------------------------------------------
// graph6 / digraph6
// ---------------------------------------------------------------------------

/// Parses one graph6 or digraph6 line (digraph6 starts with `&`).
pub fn parse_graph6(text: &str) -> Result<Graph, G6Error> {
    let bytes = text.trim_end_matches(['\r', '\n']).as_bytes();
    if bytes.is_empty() {
        return Err(G6Error::Empty);
    }
    let directed = bytes[0] == b'&';
    let mut off = usize::from(directed);
    if off >= bytes.len() {
        return Err(G6Error::Truncated {
            expected: 1,
            found: 0,
        });
    }
    let size_byte = bytes[off];
    if size_byte == 126 {
        return Err(G6Error::UnsupportedSize { offset: off });
    }
    if !(63..126).contains(&size_byte) {
        return Err(G6Error::BadChar {
            offset: off,
            byte: size_byte,
        });
    }
    let n = (size_byte - 63) as usize;
    off += 1;

    let nbits = if directed {
        n * n
    } else if n < 2 {
        0
    } else {
        n * (n - 1) / 2
    };
    let need = nbits.div_ceil(6);
    let data = &bytes[off..];
    if data.len() < need {
        return Err(G6Error::Truncated {
            expected: need,
            found: data.len(),
        });
    }
    if data.len() > need {
        return Err(G6Error::TrailingData {
            offset: off + need,
        });
    }

    let mut bits = Vec::with_capacity(need * 6);
    for (k, &b) in data.iter().enumerate() {
        if !(63..=126).contains(&b) {
            return Err(G6Error::BadChar {
                offset: off + k,
                byte: b,
            });
        }
        let v = b - 63;
        for s in (0..6).rev() {
            bits.push((v >> s) & 1 == 1);
        }
    }
    if bits[nbits..].iter().any(|&b| b) {
        return Err(G6Error::NonzeroPadding {
            offset: off + need.saturating_sub(1),
        });
    }

    let mut g = Graph::new(n, directed);
    if directed {
        let mut p = 0;
        for r in 0..n {
            for c in 0..n {
                if bits[p] {
                    if r == c {
                        return Err(G6Error::DiagonalBit { vertex: r + 1 });
                    }
                    g.edges.insert((r + 1, c + 1));
                }
                p += 1;
            }
        }
    } else {
        // Upper triangle in column order: (0,1), (0,2), (1,2), (0,3), ...
        let mut p = 0;
        for j in 1..n {
            for i in 0..j {
                if bits[p] {
                    g.edges.insert((i + 1, j + 1));
                    g.edges.insert((j + 1, i + 1));
                }
                p += 1;
            }
        }
    }
    Ok(g)
}

/// Encodes a graph as graph6 (or digraph6 when directed), `n <= 62`.
pub fn write_graph6(g: &Graph) -> Result<String, G6Error> {
    if g.n > 62 {
        return Err(G6Error::TooLarge { n: g.n });
    }
    let n = g.n;
    let mut bits: Vec<bool> = Vec::new();
    if g.directed {
        for r in 0..n {
            for c in 0..n {
                bits.push(r != c && g.has_edge(r + 1, c + 1));
            }
        }
    } else {
        for j in 1..n {
            for i in 0..j {
                bits.push(g.has_edge(i + 1, j + 1));
            }
        }
    }
    let mut out = String::new();
    if g.directed {
        out.push('&');
    }
    out.push((n as u8 + 63) as char);
    for chunk in bits.chunks(6) {
        let mut v = 0u8;
        for s in 0..6 {
            v <<= 1;
            if *chunk.get(s).unwrap_or(&false) {
                v |= 1;
            }
        }
        out.push((v + 63) as char);
    }
    Ok(out)
}

/// Parses a graph6/digraph6 text: one graph per line, blank lines and
/// `#` comment lines ignored. Errors carry the 1-based line number.
pub fn parse_graph_lines(text: &str) -> Result<Vec<Graph>, G6Error> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match parse_graph6(line) {
            Ok(g) => out.push(g),
            Err(e) => {
                return Err(G6Error::AtLine {
                    line: ln + 1,
                    source: Box::new(e),
                })
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Test-only oracle: isomorphism by exhaustive permutation search.
    fn isomorphic_brute(a: &Graph, b: &Graph) -> bool {
        if a.n != b.n || a.directed != b.directed || a.edges.len() != b.edges.len() {
            return false;
        }
        let mut found = false;
        for_each_permutation(a.n, |perm| {
            if found {
                return;
            }
            let ok = a
                .edge_pairs()
                .all(|(u, v)| b.has_edge(perm[u - 1] + 1, perm[v - 1] + 1));
            if ok {
                found = true;
            }
        });
        found
    }

    /// Test-only oracle: partition all labeled graphs on `n` vertices into
    /// isomorphism classes by brute force.
    fn iso_classes_brute(n: usize, directed: bool) -> Vec<Graph> {
        let nbits = Graph::layout_len(n.max(2), directed);
        let mut reps: Vec<Graph> = Vec::new();
        for v in 0..(1u128 << nbits) {
            let g = Graph::from_adjacency_bits(n, directed, v);
            if !reps.iter().any(|r| isomorphic_brute(r, &g)) {
                reps.push(g);
            }
        }
        reps
    }

    #[test]
    fn graph6_fixed_vectors() {
        // Hand-encoded by the published layout: n=1 -> '@'; K_3 -> 'B'
        // then bits 111 padded to 111000 = 56 -> 'w'.
        assert_eq!(write_graph6(&Graph::undirected(1)).unwrap(), "@");
        assert_eq!(write_graph6(&Graph::complete(3)).unwrap(), "Bw");
        let k3 = parse_graph6("Bw").unwrap();
        assert_eq!(k3.n(), 3);
        assert_eq!(k3.ordered_edge_count(), 6);
        assert!(!k3.is_directed());
    }

    #[test]
    fn graph6_round_trips() {
        let s = "D?{";
        let g = parse_graph6(s).unwrap();
        assert_eq!(g.n(), 5);
        assert_eq!(write_graph6(&g).unwrap(), s);

        // parse . write identity on all labeled graphs up to n = 4, both kinds.
        for directed in [false, true] {
            for n in 0..=4usize {
                let nbits = Graph::layout_len(n.max(2), directed);
                for v in 0..(1u128 << nbits) {
                    let g = Graph::from_adjacency_bits(n, directed, v);
                    let s = write_graph6(&g).unwrap();
                    let h = parse_graph6(&s).unwrap();
                    assert_eq!(g, h, "round trip failed for {s}");
                }
            }
        }
    }

    #[test]
    fn graph6_parse_errors() {
        assert!(matches!(parse_graph6(""), Err(G6Error::Empty)));
        assert!(matches!(
            parse_graph6("B"),
            Err(G6Error::Truncated { expected: 1, found: 0 })
        ));
        assert!(matches!(
            parse_graph6("Bww"),
            Err(G6Error::TrailingData { offset: 2 })
        ));
        assert!(matches!(
            parse_graph6("B\x1f"),
            Err(G6Error::BadChar { offset: 1, byte: 0x1f })
        ));
        assert!(matches!(
            parse_graph6("~??"),
            Err(G6Error::UnsupportedSize { offset: 0 })
        ));
        // K_3 with a stray low-order padding bit set.
        assert!(matches!(
            parse_graph6("Bx"),
            Err(G6Error::NonzeroPadding { .. })
        ));
        // digraph6 with a diagonal bit: n=2, bits 1000 -> first diagonal set.
        assert!(matches!(
            parse_graph6("&Aw"),
            Err(G6Error::DiagonalBit { .. })
        ));
        assert!(write_graph6(&Graph::undirected(63)).is_err());
    }

    #[test]
    fn digraph6_round_trip() {
        let mut g = Graph::directed(3);
        g.add_edge(1, 2).unwrap();
        g.add_edge(3, 1).unwrap();
        let s = write_graph6(&g).unwrap();
        assert!(s.starts_with('&'));
        assert_eq!(parse_graph6(&s).unwrap(), g);
    }

    #[test]
    fn parse_lines_skips_comments() {
        let gs = parse_graph_lines("# header\n\nBw\nD?{\n").unwrap();
        assert_eq!(gs.len(), 2);
        let err = parse_graph_lines("Bw\nB\n").unwrap_err();
        assert!(matches!(err, G6Error::AtLine { line: 2, .. }));
    }

    #[test]
    fn canonical_code_basics() {
        let empty3 = Graph::undirected(3);
        assert_eq!(empty3.canonical_code().unwrap().to_string(), "000");

        // All relabelings of P_3 share one code.
        let mut codes = BTreeSet::new();
        for edges in [[(1, 2), (2, 3)], [(1, 2), (1, 3)], [(1, 3), (2, 3)]] {
            let g = Graph::from_edges(3, false, &edges).unwrap();
            codes.insert(g.canonical_code().unwrap());
        }
        assert_eq!(codes.len(), 1);

        let big = Graph::undirected(11);
        assert!(matches!(
            big.canonical_code(),
            Err(GraphError::BudgetExceeded { .. })
        ));

        // canonical labeled form: edges pushed to the code-minimal spots
        let p3 = Graph::from_edges(3, false, &[(1, 2), (1, 3)]).unwrap();
        let form = p3.canonical_form().unwrap();
        assert!(isomorphic_brute(&form, &p3));
        assert_eq!(
            form.canonical_code().unwrap(),
            p3.canonical_code().unwrap()
        );
        assert_eq!(form, form.canonical_form().unwrap());
    }

    #[test]
    fn canonical_codes_separate_iso_classes_n4() {
        let reps = iso_classes_brute(4, false);
        assert_eq!(reps.len(), 11);
        let codes: BTreeSet<CanonicalCode> = reps
            .iter()
            .map(|g| g.canonical_code().unwrap())
            .collect();
        assert_eq!(codes.len(), 11);
    }

    #[test]
    fn compare_unlabeled_matches_isomorphism() {
        // Codes agree with brute-force isomorphism on every pair of
        // representatives and on random relabelings, n <= 5.
        for n in 1..=5usize {
            let reps = iso_classes_brute(n, false);
            for a in &reps {
                for b in &reps {
                    let eq = a.compare_unlabeled(b).unwrap() == Ordering::Equal;
                    assert_eq!(eq, isomorphic_brute(a, b));
                }
            }
        }
        let empty4 = Graph::undirected(4);
        let k4 = Graph::complete(4);
        assert_eq!(empty4.compare_unlabeled(&k4).unwrap(), Ordering::Less);
        assert_eq!(k4.compare_unlabeled(&k4).unwrap(), Ordering::Equal);
        assert!(empty4.compare_unlabeled(&Graph::undirected(5)).is_err());
        assert!(empty4.compare_unlabeled(&Graph::directed(4)).is_err());
    }

    #[test]
    fn four_vertex_graphs_sort_into_strict_chain() {
        let mut codes: Vec<CanonicalCode> = iso_classes_brute(4, false)
            .iter()
            .map(|g| g.canonical_code().unwrap())
            .collect();
        codes.sort();
        assert!(codes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn enumeration_counts_and_order() {
        assert_eq!(enumerate_graphs(1, false).unwrap().count(), 1);
        assert_eq!(enumerate_graphs(3, false).unwrap().count(), 4);
        assert_eq!(enumerate_graphs(4, false).unwrap().count(), 11);
        assert_eq!(enumerate_graphs(2, true).unwrap().count(), 3);
        assert_eq!(enumerate_graphs(3, true).unwrap().count(), 16);
        assert!(enumerate_graphs(7, false).is_err());
        assert!(enumerate_graphs(5, true).is_err());

        // Strictly increasing canonical codes, and counts match the
        // brute-force classification.
        for n in 1..=5usize {
            let graphs: Vec<Graph> = enumerate_graphs(n, false).unwrap().collect();
            assert_eq!(graphs.len(), iso_classes_brute(n, false).len());
            let codes: Vec<CanonicalCode> = graphs
                .iter()
                .map(|g| g.canonical_code().unwrap())
                .collect();
            assert!(codes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn metered_enumeration_respects_budget() {
        let mut stream = enumerate_graphs_budget(5, false, 8).unwrap();
        let mut meter = crate::Budget {
            max_evals: 0,
            max_enum: 1,
        }
        .meter();
        assert!(matches!(
            stream.next_metered(&mut meter),
            MeteredNext::Found(_)
        ));
        assert!(matches!(
            stream.next_metered(&mut meter),
            MeteredNext::BudgetExceeded
        ));
    }

    #[test]
    fn edge_union_laws() {
        let g = Graph::path(3);
        assert_eq!(edge_union(&[g.clone(), g.clone()]).unwrap(), g);

        let singles: Vec<Graph> = [(1, 2), (2, 3), (1, 3)]
            .iter()
            .map(|&e| Graph::from_edges(3, false, &[e]).unwrap())
            .collect();
        assert_eq!(edge_union(&singles).unwrap(), Graph::complete(3));
        let mut rev = singles.clone();
        rev.reverse();
        assert_eq!(edge_union(&rev).unwrap(), edge_union(&singles).unwrap());

        assert!(matches!(edge_union(&[]), Err(GraphError::EmptyUnion)));
        assert!(edge_union(&[Graph::undirected(2), Graph::undirected(3)]).is_err());
    }

    #[test]
    fn family_members() {
        let g1 = family_fig1(1).unwrap();
        assert!(isomorphic_brute(&g1, &Graph::cycle(4)));

        let g2 = family_fig1(2).unwrap();
        assert_eq!(g2.n(), 7);
        assert_eq!(g2.edge_count(), 8);
        assert_eq!(g2.out_degree(1), 4);

        let g3 = family_fig1(3).unwrap();
        assert_eq!(g3.n(), 10);
        assert_eq!(g3.edge_count(), 12);
        assert_eq!(g3.out_degree(1), 6);

        assert!(matches!(family_fig1(0), Err(GraphError::BadFamilyIndex)));
    }

    #[test]
    fn induced_subgraphs() {
        let c4 = Graph::cycle(4);
        let all: Vec<usize> = c4.vertices().collect();
        assert!(isomorphic_brute(&c4.induced_subgraph(&all).unwrap(), &c4));
        assert!(isomorphic_brute(
            &c4.induced_subgraph(&[1, 2, 3]).unwrap(),
            &Graph::path(3)
        ));

        // One attached 4-cycle of the second family member is a C_4:
        // center 1 plus cycle j=2 vertices 5, 6, 7.
        let g2 = family_fig1(2).unwrap();
        let sub = g2.induced_subgraph(&[1, 5, 6, 7]).unwrap();
        assert!(isomorphic_brute(&sub, &Graph::cycle(4)));

        assert!(matches!(
            c4.induced_subgraph(&[]),
            Err(GraphError::EmptySubset)
        ));
        assert!(c4.induced_subgraph(&[5]).is_err());
    }
}
