//! DAG form of quantifier-free order decoders.
//!
//! A `k`-DAG partitions the `2k` variable positions into parts and puts
//! acyclic arcs between parts: with a labeling it induces the graph whose
//! edges are the pairs equal within every part and strictly increasing
//! along every arc. One DAG captures one satisfiable conjunctive clause,
//! and a formula corresponds to a finite set of DAGs whose induced graphs
//! edge-union to the formula's graph.
//!
//! Arcs may carry weights: an arc of weight `w` demands a gap of at least
//! `w`, which is how a bounded existential quantifier between two label
//! slots can be simulated without leaving the quantifier-free world.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::graphs::Graph;
use crate::logic::{self, Clause, ClauseAtom, Formula, LogicError, Rel, WeakOrder};
use crate::schemes::Labeling;
use crate::search::{Budget, SearchOutcome};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DagError {
    #[error("part {0} is empty")]
    EmptyPart(usize),
    #[error("position {pos} outside 1..={max}")]
    PositionOutOfRange { pos: usize, max: usize },
    #[error("position {0} appears in two parts")]
    DuplicatePosition(usize),
    #[error("positions must split into two equal label halves, got {0}")]
    OddPositionCount(usize),
    #[error("arc from part {0} to itself")]
    SelfArc(usize),
    #[error("arc endpoint {0} is not a part index")]
    ArcOutOfRange(usize),
    #[error("arc weight must be positive")]
    ZeroWeight,
    #[error("arc relation is cyclic")]
    CyclicArcs,
    #[error("clause puts x{left} < x{right} inside an equality class")]
    LtInsideEqualityClass { left: usize, right: usize },
    #[error("{op} is defined for unweighted DAGs only")]
    WeightedUnsupported { op: &'static str },
    #[error("labeling is {got}-tuples, DAG needs {expected}")]
    WrongLabelWidth { expected: usize, got: usize },
    #[error("expressibility search too large: n = {n}, k = {k}")]
    SearchTooLarge { n: usize, k: usize },
    #[error("bad DAG text at `{0}`")]
    TextForm(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// One weighted arc between parts (indices into the part list).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct DagArc {
    pub from: usize,
    pub to: usize,
    pub weight: u64,
}

impl DagArc {
    pub fn new(from: usize, to: usize) -> DagArc {
        DagArc {
            from,
            to,
            weight: 1,
        }
    }

    pub fn weighted(from: usize, to: usize, weight: u64) -> DagArc {
        DagArc { from, to, weight }
    }
}

/// A DAG over a partition of the variable positions `1..=2k`.
///
/// Stored in canonical form: parts sorted by least element, each part
/// sorted, arcs sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KDag {
    k: usize,
    parts: Vec<Vec<usize>>,
    arcs: Vec<DagArc>,
}

impl KDag {
    /// Validates and canonicalizes. `parts` must partition `1..=2k` for
    /// some `k >= 1`; arcs reference parts by index in the given order.
    pub fn new(parts: Vec<Vec<usize>>, arcs: Vec<DagArc>) -> Result<KDag, DagError> {
        let m: usize = parts.iter().map(Vec::len).sum();
        if m == 0 || m % 2 != 0 {
            return Err(DagError::OddPositionCount(m));
        }
        let mut seen = vec![false; m + 1];
        for (i, part) in parts.iter().enumerate() {
            if part.is_empty() {
                return Err(DagError::EmptyPart(i + 1));
            }
            for &p in part {
                if p == 0 || p > m {
                    return Err(DagError::PositionOutOfRange { pos: p, max: m });
                }
                if seen[p] {
                    return Err(DagError::DuplicatePosition(p));
                }
                seen[p] = true;
            }
        }
        // m in-range distinct positions necessarily cover 1..=m.

        // Canonical part order: by least element.
        let mut order: Vec<usize> = (0..parts.len()).collect();
        let mins: Vec<usize> = parts.iter().map(|p| *p.iter().min().unwrap()).collect();
        order.sort_by_key(|&i| mins[i]);
        let mut remap = vec![0usize; parts.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let mut sorted_parts: Vec<Vec<usize>> = order
            .iter()
            .map(|&i| {
                let mut p = parts[i].clone();
                p.sort_unstable();
                p
            })
            .collect();
        sorted_parts.shrink_to_fit();

        let mut seen_arcs = BTreeSet::new();
        let mut out_arcs = Vec::new();
        for a in arcs {
            if a.from >= parts.len() {
                return Err(DagError::ArcOutOfRange(a.from + 1));
            }
            if a.to >= parts.len() {
                return Err(DagError::ArcOutOfRange(a.to + 1));
            }
            if a.weight == 0 {
                return Err(DagError::ZeroWeight);
            }
            let (f, t) = (remap[a.from], remap[a.to]);
            if f == t {
                return Err(DagError::SelfArc(f + 1));
            }
            if seen_arcs.insert((f, t, a.weight)) {
                out_arcs.push(DagArc::weighted(f, t, a.weight));
            }
        }
        out_arcs.sort();

        let arcset: BTreeSet<(usize, usize)> =
            out_arcs.iter().map(|a| (a.from + 1, a.to + 1)).collect();
        if !logic::is_acyclic(sorted_parts.len(), &arcset) {
            return Err(DagError::CyclicArcs);
        }

        Ok(KDag {
            k: m / 2,
            parts: sorted_parts,
            arcs: out_arcs,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn arcs(&self) -> &[DagArc] {
        &self.arcs
    }

    pub fn is_weighted(&self) -> bool {
        self.arcs.iter().any(|a| a.weight != 1)
    }

    /// Does the concatenated pair of label tuples satisfy the DAG's
    /// equality and gap conditions?
    pub fn accepts(&self, vals: &[u64]) -> bool {
        debug_assert_eq!(vals.len(), 2 * self.k);
        for part in &self.parts {
            let first = vals[part[0] - 1];
            if part[1..].iter().any(|&p| vals[p - 1] != first) {
                return false;
            }
        }
        // Parts are internally equal here, so a representative suffices.
        for arc in &self.arcs {
            let lo = vals[self.parts[arc.from][0] - 1];
            let hi = vals[self.parts[arc.to][0] - 1];
            if hi < lo + arc.weight {
                return false;
            }
        }
        true
    }

    /// The DAG that accepts exactly the tuples inducing `w`: parts are the
    /// blocks, arcs the full order among them.
    pub fn complete_weak_order(w: &WeakOrder) -> KDag {
        let parts: Vec<Vec<usize>> = w.blocks().to_vec();
        let mut arcs = Vec::new();
        for a in 0..parts.len() {
            for b in a + 1..parts.len() {
                arcs.push(DagArc::new(a, b));
            }
        }
        KDag::new(parts, arcs).expect("blocks of a weak order form a valid DAG")
    }
}

impl fmt::Display for KDag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("parts: ")?;
        for part in &self.parts {
            f.write_str("{")?;
            for (i, p) in part.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{p}")?;
            }
            f.write_str("}")?;
        }
        if !self.arcs.is_empty() {
            f.write_str("; arcs: ")?;
            for (i, a) in self.arcs.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}->{}", a.from + 1, a.to + 1)?;
                if a.weight != 1 {
                    write!(f, " (w={})", a.weight)?;
                }
            }
        }
        Ok(())
    }
}

impl FromStr for KDag {
    type Err = DagError;

    /// Parses the text form `parts: {1,3}{2}{4}; arcs: 1->2 (w=2), 2->3`
    /// with parts numbered by listing order and the arcs section optional.
    fn from_str(s: &str) -> Result<KDag, DagError> {
        let bad = |t: &str| DagError::TextForm(t.to_string());
        let s = s.trim();
        let rest = s.strip_prefix("parts:").ok_or_else(|| bad(s))?;
        let (parts_text, arcs_text) = match rest.split_once(';') {
            Some((p, a)) => {
                let a = a.trim();
                let a = a.strip_prefix("arcs:").ok_or_else(|| bad(a))?;
                (p.trim(), a.trim())
            }
            None => (rest.trim(), ""),
        };

        let mut parts = Vec::new();
        let mut cur = parts_text;
        while !cur.is_empty() {
            let body = cur.strip_prefix('{').ok_or_else(|| bad(cur))?;
            let (inner, tail) = body.split_once('}').ok_or_else(|| bad(body))?;
            let mut part = Vec::new();
            for tok in inner.split(',') {
                let tok = tok.trim();
                part.push(tok.parse::<usize>().map_err(|_| bad(tok))?);
            }
            parts.push(part);
            cur = tail.trim_start();
        }

        let mut arcs = Vec::new();
        if !arcs_text.is_empty() && arcs_text != "-" {
            for piece in arcs_text.split(',') {
                let piece = piece.trim();
                let (from, rest) = piece.split_once("->").ok_or_else(|| bad(piece))?;
                let from: usize = from.trim().parse().map_err(|_| bad(piece))?;
                let rest = rest.trim();
                let (to, weight) = match rest.split_once('(') {
                    Some((t, w)) => {
                        let w = w
                            .trim()
                            .strip_prefix("w=")
                            .and_then(|w| w.strip_suffix(')'))
                            .ok_or_else(|| bad(rest))?;
                        (
                            t.trim().parse::<usize>().map_err(|_| bad(rest))?,
                            w.trim().parse::<u64>().map_err(|_| bad(rest))?,
                        )
                    }
                    None => (rest.parse::<usize>().map_err(|_| bad(rest))?, 1),
                };
                if from == 0 || to == 0 {
                    return Err(DagError::ArcOutOfRange(0));
                }
                arcs.push(DagArc::weighted(from - 1, to - 1, weight));
            }
        }
        KDag::new(parts, arcs)
    }
}

/// The graph a DAG and a labeling induce: edge `(u,v)` iff the
/// concatenated labels satisfy the DAG conditions.
pub fn graph_of_dag(dag: &KDag, labeling: &Labeling) -> Result<Graph, DagError> {
    if labeling.k() != dag.k() {
        return Err(DagError::WrongLabelWidth {
            expected: dag.k(),
            got: labeling.k(),
        });
    }
    let n = labeling.n();
    let mut g = Graph::directed(n);
    for u in 1..=n {
        for v in 1..=n {
            if u != v && dag.accepts(&labeling.pair_values(u, v)) {
                g.add_edge(u, v).expect("in range");
            }
        }
    }
    Ok(g)
}

/// Compiles a satisfiable clause into the DAG with the same induced graph
/// on every labeling: parts are the equality classes, arcs the `<` atoms
/// lifted to classes.
pub fn clause_to_dag(clause: &Clause) -> Result<KDag, DagError> {
    let m = clause.arity;
    if m == 0 || m % 2 != 0 {
        return Err(DagError::OddPositionCount(m));
    }
    let mut parent: Vec<usize> = (0..=m).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = x;
        while parent[c] != r {
            let nxt = parent[c];
            parent[c] = r;
            c = nxt;
        }
        r
    }
    for a in &clause.atoms {
        if a.rel == Rel::Eq {
            let (ra, rb) = (find(&mut parent, a.left), find(&mut parent, a.right));
            parent[ra] = rb;
        }
    }
    let mut roots: Vec<usize> = Vec::new();
    let mut part_of = vec![usize::MAX; m + 1];
    let mut parts: Vec<Vec<usize>> = Vec::new();
    for p in 1..=m {
        let r = find(&mut parent, p);
        let idx = match roots.iter().position(|&x| x == r) {
            Some(i) => i,
            None => {
                roots.push(r);
                parts.push(Vec::new());
                roots.len() - 1
            }
        };
        part_of[p] = idx;
        parts[idx].push(p);
    }
    let mut arcs = Vec::new();
    for a in &clause.atoms {
        if a.rel == Rel::Lt {
            let (f, t) = (part_of[a.left], part_of[a.right]);
            if f == t {
                return Err(DagError::LtInsideEqualityClass {
                    left: a.left,
                    right: a.right,
                });
            }
            arcs.push(DagArc::new(f, t));
        }
    }
    // KDag::new re-checks acyclicity, the remaining satisfiability
    // condition.
    KDag::new(parts, arcs)
}

/// Inverse of [`clause_to_dag`] for unweighted DAGs: equalities chain each
/// part to its least position, one `<` atom per arc between
/// representatives.
pub fn dag_to_clause(dag: &KDag) -> Result<Clause, DagError> {
    if dag.is_weighted() {
        return Err(DagError::WeightedUnsupported {
            op: "dag_to_clause",
        });
    }
    let mut atoms = Vec::new();
    for part in dag.parts() {
        let rep = part[0];
        for &p in &part[1..] {
            atoms.push(ClauseAtom::eq(rep, p));
        }
    }
    for arc in dag.arcs() {
        atoms.push(ClauseAtom::lt(
            dag.parts()[arc.from][0],
            dag.parts()[arc.to][0],
        ));
    }
    Ok(Clause::new(2 * dag.k(), atoms))
}

/// Full pipeline from a quantifier-free order formula to its DAG list:
/// negation normal form, DNF, drop unsatisfiable clauses, compile each.
/// The induced graphs of the result edge-union to the formula's graph
/// under every labeling.
pub fn formula_to_dags(formula: &Formula) -> Result<Vec<KDag>, DagError> {
    let nnf = logic::to_nnf_lt(formula)?;
    let clauses = logic::to_dnf(&nnf)?;
    clauses.iter().map(clause_to_dag).collect()
}

/// Replaces the arcs by their transitive closure over parts. The induced
/// graph is unchanged for every labeling, and two unweighted DAGs with the
/// same parts and the same closure induce the same graphs.
pub fn closure_canon(dag: &KDag) -> Result<KDag, DagError> {
    if dag.is_weighted() {
        return Err(DagError::WeightedUnsupported {
            op: "closure_canon",
        });
    }
    let p = dag.parts().len();
    let mut reach = vec![vec![false; p]; p];
    for a in dag.arcs() {
        reach[a.from][a.to] = true;
    }
    for mid in 0..p {
        for i in 0..p {
            if reach[i][mid] {
                for j in 0..p {
                    if reach[mid][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    let mut arcs = Vec::new();
    for (i, row) in reach.iter().enumerate() {
        for (j, &r) in row.iter().enumerate() {
            if r {
                arcs.push(DagArc::new(i, j));
            }
        }
    }
    KDag::new(dag.parts().to_vec(), arcs)
}

/// Checks the order-type criterion for a fixed labeling: `g` is the
/// edge-union of DAG graphs under `labeling` iff no weak order occurs both
/// as the type of an adjacent ordered pair and of a non-adjacent one.
/// Returns one complete-weak-order DAG per adjacent type on success.
pub fn expressible_with_labeling(
    g: &Graph,
    labeling: &Labeling,
) -> Result<Option<Vec<KDag>>, DagError> {
    let n = g.n();
    if labeling.n() != n {
        return Err(DagError::WrongLabelWidth {
            expected: n,
            got: labeling.n(),
        });
    }
    let mut edge_types: BTreeSet<WeakOrder> = BTreeSet::new();
    let mut nonedge_types: BTreeSet<WeakOrder> = BTreeSet::new();
    for u in 1..=n {
        for v in 1..=n {
            if u == v {
                continue;
            }
            let w = WeakOrder::of_values(&labeling.pair_values(u, v));
            if g.has_edge(u, v) {
                edge_types.insert(w);
            } else {
                nonedge_types.insert(w);
            }
        }
    }
    if edge_types.intersection(&nonedge_types).next().is_some() {
        return Ok(None);
    }
    Ok(Some(
        edge_types.iter().map(KDag::complete_weak_order).collect(),
    ))
}

/// Exhaustive `k`-expressibility: searches labelings `V -> [kn]^k` in
/// lexicographic order for one passing the order-type criterion. Label
/// values beyond `[kn]` never help, and neither do labelings whose value
/// sequence is not rank-compressed, so candidates are restricted
/// accordingly.
pub fn expressible(
    g: &Graph,
    k: usize,
    budget: &Budget,
) -> Result<SearchOutcome<(Labeling, Vec<KDag>)>, DagError> {
    let n = g.n();
    if k == 0 || n == 0 || k * n > 12 {
        return Err(DagError::SearchTooLarge { n, k });
    }
    let domain = (k * n) as u64;
    let mut meter = budget.meter();

    // tuples[v-1] = current label of v; assigned depth-first.
    let mut tuples: Vec<Vec<u64>> = vec![vec![0; k]; n];
    // Pair types discovered so far, with multiplicity for undo.
    let mut edge_types: std::collections::HashMap<WeakOrder, u32> = Default::default();
    let mut nonedge_types: std::collections::HashMap<WeakOrder, u32> = Default::default();

    struct Frame {
        /// types added by this vertex's assignment: (weak order, is_edge)
        added: Vec<(WeakOrder, bool)>,
    }

    fn max_so_far(tuples: &[Vec<u64>], upto: usize) -> u64 {
        tuples[..upto]
            .iter()
            .flat_map(|t| t.iter().copied())
            .max()
            .unwrap_or(0)
    }

    // Advances tuple odometer in lex order; None when wrapped.
    fn next_tuple(t: &mut [u64], domain: u64) -> bool {
        for slot in (0..t.len()).rev() {
            if t[slot] < domain {
                t[slot] += 1;
                for s in slot + 1..t.len() {
                    t[s] = 1;
                }
                return true;
            }
        }
        false
    }

    // In a rank-compressed assignment every value is at most one past the
    // running maximum plus the number of slots still to come (later slots
    // may hold the skipped values). The lexicographically least witness is
    // rank-compressed, so pruning to such prefixes is lossless.
    fn compressed_ok(t: &[u64], prefix_max: u64, slots_after_tuple: u64) -> bool {
        let mut m = prefix_max;
        for (s, &v) in t.iter().enumerate() {
            let remaining = slots_after_tuple + (t.len() - 1 - s) as u64;
            if v > m + 1 + remaining {
                return false;
            }
            m = m.max(v);
        }
        true
    }

    let mut stack: Vec<Frame> = Vec::new();
    let mut v = 1usize;
    tuples[0] = vec![0; k];
    let mut fresh = true;
    'search: loop {
        // propose next tuple for vertex v
        let advanced = if fresh {
            tuples[v - 1].iter_mut().for_each(|s| *s = 1);
            true
        } else {
            next_tuple(&mut tuples[v - 1], domain)
        };
        fresh = false;
        if !advanced {
            // backtrack
            if v == 1 {
                return Ok(SearchOutcome::Absent);
            }
            v -= 1;
            let frame = stack.pop().expect("frame per assigned vertex");
            for (w, is_edge) in frame.added {
                let map = if is_edge {
                    &mut edge_types
                } else {
                    &mut nonedge_types
                };
                match map.get_mut(&w) {
                    Some(c) if *c > 1 => *c -= 1,
                    _ => {
                        map.remove(&w);
                    }
                }
            }
            continue;
        }
        if !meter.charge_evals(1) {
            return Ok(SearchOutcome::BudgetExceeded);
        }
        let slots_after = ((n - v) * k) as u64;
        if !compressed_ok(&tuples[v - 1], max_so_far(&tuples, v - 1), slots_after) {
            continue;
        }

        // check pairs against all assigned vertices
        let mut added: Vec<(WeakOrder, bool)> = Vec::new();
        let mut ok = true;
        'pairs: for u in 1..v {
            for (a, b) in [(u, v), (v, u)] {
                if !meter.charge_evals(1) {
                    return Ok(SearchOutcome::BudgetExceeded);
                }
                let vals: Vec<u64> = tuples[a - 1]
                    .iter()
                    .chain(tuples[b - 1].iter())
                    .copied()
                    .collect();
                let w = WeakOrder::of_values(&vals);
                let is_edge = g.has_edge(a, b);
                let (own, other) = if is_edge {
                    (&mut edge_types, &nonedge_types)
                } else {
                    (&mut nonedge_types, &edge_types)
                };
                if other.contains_key(&w) {
                    ok = false;
                    break 'pairs;
                }
                *own.entry(w.clone()).or_insert(0) += 1;
                added.push((w, is_edge));
            }
        }
        if !ok {
            // roll back partial additions of this attempt
            for (w, is_edge) in added {
                let map = if is_edge {
                    &mut edge_types
                } else {
                    &mut nonedge_types
                };
                match map.get_mut(&w) {
                    Some(c) if *c > 1 => *c -= 1,
                    _ => {
                        map.remove(&w);
                    }
                }
            }
            continue;
        }

        stack.push(Frame { added });
        if v == n {
            let labeling = Labeling::new(tuples.clone()).expect("positive label entries");
            let dags = expressible_with_labeling(g, &labeling)?
                .expect("criterion held during the search");
            return Ok(SearchOutcome::Witness((labeling, dags)));
        }
        v += 1;
        fresh = true;
        continue 'search;
    }
}
