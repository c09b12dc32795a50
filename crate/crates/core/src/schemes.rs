//! Labeling schemes: decoders, membership search, and graph parameters.
//!
//! A bit scheme pairs a [`LabelDecoder`] (a total predicate on equal-length
//! bit strings) with a length multiplier `c`; on an `n`-vertex graph every
//! vertex carries exactly `c * ceil(log2 n)` bits and adjacency of `(u,v)`
//! is the decoder's verdict on the two labels. A logical scheme instead
//! carries a formula with `2k` free variables and labels vertices with
//! `k`-tuples over `[n^c]`.
//!
//! Membership searches are exhaustive and budget-guarded; they end in a
//! witness labeling, a proven absence, or a budget overrun. Witnesses are
//! deterministic: the lexicographically least labeling is reported.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::dags::{self, DagError, KDag};
use crate::graphs::Graph;
use crate::logic::{
    self, eval, semantic_signature, Expr, Formula, LogicError, Universe, WeakOrder,
    WEAK_ORDER_BUDGET,
};
use crate::search::{Budget, Meter, SearchOutcome};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchemeError {
    #[error("labeling must cover at least one vertex")]
    EmptyLabeling,
    #[error("vertex {vertex} has a {got}-tuple, expected {expected}")]
    RaggedLabeling {
        vertex: usize,
        expected: usize,
        got: usize,
    },
    #[error("vertex {vertex} has a zero label entry (values start at 1)")]
    ZeroLabelEntry { vertex: usize },
    #[error("labeling is {got}-tuples, scheme needs {expected}")]
    WrongK { expected: usize, got: usize },
    #[error("labeling covers {got} vertices, graph has {expected}")]
    WrongN { expected: usize, got: usize },
    #[error("vertex {vertex} label has {got} bits, scheme needs {expected}")]
    LabelLength {
        vertex: usize,
        expected: usize,
        got: usize,
    },
    #[error("vertex {vertex} entry {value} outside universe [{bound}]")]
    LabelOutOfUniverse {
        vertex: usize,
        value: u64,
        bound: u64,
    },
    #[error("universe n^c overflows: n = {n}, c = {c}")]
    UniverseTooLarge { n: usize, c: usize },
    #[error("operation requires quantifier-free order formulas")]
    NotOrderFragment,
    #[error("formulas have different free-variable counts ({left} vs {right})")]
    ArityMismatch { left: usize, right: usize },
    #[error("universe exponent c must be at least 1")]
    BadC,
    #[error("interval count k must be at least 1")]
    BadK,
    #[error("interval representations are defined for undirected graphs")]
    DirectedUnsupported,
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("interval search out of range: n = {n}, kmax = {kmax} (limits 10 and 3)")]
    IntervalSearchTooLarge { n: usize, kmax: usize },
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Dag(#[from] DagError),
}

/// `ceil(log2 n)` with `log2 1 = 0`, the per-multiplier label length.
pub fn log2_ceil(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        n.next_power_of_two().trailing_zeros() as usize
    }
}

// ---------------------------------------------------------------------------
// Bit-string schemes
// ---------------------------------------------------------------------------

/// An immutable bit string label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bits(pub Vec<bool>);

impl Bits {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    /// The `len` low bits of `value`, most significant first, so numeric
    /// order equals lexicographic order.
    pub fn from_value(value: u64, len: usize) -> Bits {
        Bits((0..len).map(|i| (value >> (len - 1 - i)) & 1 == 1).collect())
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl FromStr for Bits {
    type Err = char;

    fn from_str(s: &str) -> Result<Bits, char> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(other),
            })
            .collect::<Result<Vec<bool>, char>>()
            .map(Bits)
    }
}

/// A total, deterministic predicate on pairs of equal-length bit strings.
/// Callers uphold the equal-length contract.
pub trait LabelDecoder: Send + Sync {
    fn name(&self) -> &str;
    fn accepts(&self, x: &[bool], y: &[bool]) -> bool;
}

/// The stock decoders, addressable by name in registry specs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinDecoder {
    /// `all`: every pair adjacent.
    AllPairs,
    /// `none`: no pair adjacent.
    NonePairs,
    /// `eq`: adjacent iff labels are equal.
    Equality,
    /// `lt`: adjacent iff the first label is lexicographically smaller.
    LessThan,
    /// `interval`: labels split into two halves read as interval
    /// endpoints; adjacent iff neither interval lies strictly left of the
    /// other. Odd-length labels are never accepted.
    Interval,
}

impl BuiltinDecoder {
    pub fn from_name(name: &str) -> Option<BuiltinDecoder> {
        Some(match name {
            "all" => BuiltinDecoder::AllPairs,
            "none" => BuiltinDecoder::NonePairs,
            "eq" => BuiltinDecoder::Equality,
            "lt" => BuiltinDecoder::LessThan,
            "interval" => BuiltinDecoder::Interval,
            _ => return None,
        })
    }
}

impl LabelDecoder for BuiltinDecoder {
    fn name(&self) -> &str {
        match self {
            BuiltinDecoder::AllPairs => "all",
            BuiltinDecoder::NonePairs => "none",
            BuiltinDecoder::Equality => "eq",
            BuiltinDecoder::LessThan => "lt",
            BuiltinDecoder::Interval => "interval",
        }
    }

    fn accepts(&self, x: &[bool], y: &[bool]) -> bool {
        match self {
            BuiltinDecoder::AllPairs => true,
            BuiltinDecoder::NonePairs => false,
            BuiltinDecoder::Equality => x == y,
            BuiltinDecoder::LessThan => x < y,
            BuiltinDecoder::Interval => {
                if x.len() % 2 != 0 {
                    return false;
                }
                let h = x.len() / 2;
                let (x1, x2) = (&x[..h], &x[h..]);
                let (y1, y2) = (&y[..h], &y[h..]);
                !(x2 < y1) && !(y2 < x1)
            }
        }
    }
}

/// A labeling scheme with a bit-string decoder and length multiplier `c`.
#[derive(Clone)]
pub struct BitScheme {
    pub decoder: Arc<dyn LabelDecoder>,
    pub c: usize,
}

impl BitScheme {
    pub fn new(decoder: impl LabelDecoder + 'static, c: usize) -> BitScheme {
        BitScheme {
            decoder: Arc::new(decoder),
            c,
        }
    }

    pub fn from_arc(decoder: Arc<dyn LabelDecoder>, c: usize) -> BitScheme {
        BitScheme { decoder, c }
    }

    /// Exact label length on an `n`-vertex graph.
    pub fn label_len(&self, n: usize) -> usize {
        self.c * log2_ceil(n)
    }
}

impl fmt::Debug for BitScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BitScheme")
            .field("decoder", &self.decoder.name())
            .field("c", &self.c)
            .finish()
    }
}

/// Bit labels for vertices `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitLabeling {
    labels: Vec<Bits>,
}

impl BitLabeling {
    pub fn new(labels: Vec<Bits>) -> BitLabeling {
        BitLabeling { labels }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, v: usize) -> &Bits {
        &self.labels[v - 1]
    }

    pub fn labels(&self) -> &[Bits] {
        &self.labels
    }
}

/// The graph a bit scheme induces from labels: edge `(u,v)` for `u != v`
/// iff the decoder accepts the pair.
pub fn graph_of_bitscheme(
    scheme: &BitScheme,
    labeling: &BitLabeling,
) -> Result<Graph, SchemeError> {
    let n = labeling.n();
    let expected = scheme.label_len(n);
    for v in 1..=n {
        if labeling.label(v).len() != expected {
            return Err(SchemeError::LabelLength {
                vertex: v,
                expected,
                got: labeling.label(v).len(),
            });
        }
    }
    let mut g = Graph::directed(n);
    for u in 1..=n {
        for v in 1..=n {
            if u != v
                && scheme
                    .decoder
                    .accepts(labeling.label(u).as_slice(), labeling.label(v).as_slice())
            {
                g.add_edge(u, v).expect("in range");
            }
        }
    }
    Ok(g)
}

/// Orbit of vertex 1 under the automorphism group, by brute force; used
/// to prune label searches without changing the reported witness. Skipped
/// above 8 vertices.
fn orbit_of_first(g: &Graph) -> Vec<bool> {
    let n = g.n();
    let mut orbit = vec![false; n + 1];
    if n == 0 {
        return orbit;
    }
    orbit[1] = true;
    if n > 8 {
        return orbit;
    }
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        let is_auto = g
            .edge_pairs()
            .all(|(u, v)| g.has_edge(perm[u - 1] + 1, perm[v - 1] + 1))
            && g.edge_pairs().count()
                == (1..=n)
                    .flat_map(|u| (1..=n).map(move |v| (u, v)))
                    .filter(|&(u, v)| u != v && g.has_edge(perm[u - 1] + 1, perm[v - 1] + 1))
                    .count();
        if is_auto {
            orbit[perm[0] + 1] = true;
        }
        // next permutation in lexicographic order
        let mut i = n.wrapping_sub(1);
        while i > 0 && perm[i - 1] >= perm[i] {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        let mut j = n - 1;
        while perm[j] <= perm[i - 1] {
            j -= 1;
        }
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
    orbit
}

/// Searches for a labeling under which the scheme induces exactly `g`.
///
/// Labelings are scanned in lexicographic order with automorphism-orbit
/// symmetry breaking, so the witness, when one exists, is the
/// lexicographically least.
pub fn member_bitscheme(
    scheme: &BitScheme,
    g: &Graph,
    budget: &Budget,
) -> Result<SearchOutcome<BitLabeling>, SchemeError> {
    let n = g.n();
    if n == 0 {
        return Err(SchemeError::EmptyGraph);
    }
    let len = scheme.label_len(n);
    let space: u64 = if len >= 40 { u64::MAX } else { 1u64 << len };
    let orbit = orbit_of_first(g);
    let mut meter = budget.meter();

    // chosen[v-1] = label index of v; depth-first assignment
    let mut chosen: Vec<u64> = Vec::with_capacity(n);
    let mut labels: Vec<Bits> = Vec::with_capacity(n);
    let mut next: u64 = 0;
    loop {
        if next >= space {
            // backtrack
            match chosen.pop() {
                None => return Ok(SearchOutcome::Absent),
                Some(prev) => {
                    labels.pop();
                    next = prev + 1;
                    continue;
                }
            }
        }
        if !meter.charge_evals(1) {
            return Ok(SearchOutcome::BudgetExceeded);
        }
        let v = chosen.len() + 1;
        if orbit[v] && v > 1 && next < chosen[0] {
            // vertex 1 must carry the least label on its orbit
            next = chosen[0];
            continue;
        }
        let cand = Bits::from_value(next, len);
        let mut ok = true;
        for u in 1..v {
            if !meter.charge_evals(2) {
                return Ok(SearchOutcome::BudgetExceeded);
            }
            if scheme.decoder.accepts(labels[u - 1].as_slice(), cand.as_slice())
                != g.has_edge(u, v)
                || scheme.decoder.accepts(cand.as_slice(), labels[u - 1].as_slice())
                    != g.has_edge(v, u)
            {
                ok = false;
                break;
            }
        }
        if !ok {
            next += 1;
            continue;
        }
        chosen.push(next);
        labels.push(cand);
        if chosen.len() == n {
            return Ok(SearchOutcome::Witness(BitLabeling::new(labels)));
        }
        next = 0;
    }
}

// ---------------------------------------------------------------------------
// Integer-tuple labelings and logical schemes
// ---------------------------------------------------------------------------

/// A total assignment of positive-integer `k`-tuples to vertices `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Labeling {
    tuples: Vec<Vec<u64>>,
}

impl Labeling {
    pub fn new(tuples: Vec<Vec<u64>>) -> Result<Labeling, SchemeError> {
        if tuples.is_empty() {
            return Err(SchemeError::EmptyLabeling);
        }
        let k = tuples[0].len();
        for (i, t) in tuples.iter().enumerate() {
            if t.len() != k || k == 0 {
                return Err(SchemeError::RaggedLabeling {
                    vertex: i + 1,
                    expected: k.max(1),
                    got: t.len(),
                });
            }
            if t.iter().any(|&v| v == 0) {
                return Err(SchemeError::ZeroLabelEntry { vertex: i + 1 });
            }
        }
        Ok(Labeling { tuples })
    }

    pub fn n(&self) -> usize {
        self.tuples.len()
    }

    pub fn k(&self) -> usize {
        self.tuples[0].len()
    }

    pub fn tuple(&self, v: usize) -> &[u64] {
        &self.tuples[v - 1]
    }

    pub fn tuples(&self) -> &[Vec<u64>] {
        &self.tuples
    }

    pub fn max_entry(&self) -> u64 {
        self.tuples
            .iter()
            .flat_map(|t| t.iter().copied())
            .max()
            .unwrap_or(0)
    }

    /// The concatenated `2k` values for the ordered pair `(u, v)`.
    pub fn pair_values(&self, u: usize, v: usize) -> Vec<u64> {
        let mut vals = Vec::with_capacity(2 * self.k());
        vals.extend_from_slice(self.tuple(u));
        vals.extend_from_slice(self.tuple(v));
        vals
    }
}

/// Rank-compresses every entry: each value is replaced by
/// `|{smaller distinct values in use}| + 1`. Entries end up in `[kn]`, and
/// every quantifier-free order formula induces the same graph before and
/// after.
pub fn normalize_labeling(labeling: &Labeling) -> Labeling {
    let mut values: Vec<u64> = labeling
        .tuples()
        .iter()
        .flat_map(|t| t.iter().copied())
        .collect();
    values.sort_unstable();
    values.dedup();
    let tuples = labeling
        .tuples()
        .iter()
        .map(|t| {
            t.iter()
                .map(|v| values.binary_search(v).expect("value present") as u64 + 1)
                .collect()
        })
        .collect();
    Labeling { tuples }
}

/// A labeling scheme whose decoder is a formula with `2k` free variables;
/// labels are `k`-tuples over `[n^c]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalScheme {
    pub formula: Formula,
    pub c: usize,
}

impl LogicalScheme {
    pub fn new(formula: Formula, c: usize) -> Result<LogicalScheme, SchemeError> {
        if c == 0 {
            return Err(SchemeError::BadC);
        }
        Ok(LogicalScheme { formula, c })
    }

    pub fn k(&self) -> usize {
        self.formula.k()
    }

    /// `n^c`, the universe bound for labels on an `n`-vertex graph.
    pub fn universe(&self, n: usize) -> Result<u64, SchemeError> {
        (n as u64)
            .checked_pow(self.c as u32)
            .ok_or(SchemeError::UniverseTooLarge { n, c: self.c })
    }
}

/// Adjacency test for one formula, with the weak-order signature
/// precomputed when the formula is in the order fragment.
struct PairDecider<'a> {
    formula: &'a Formula,
    universe: Universe,
    signature: Option<BTreeSet<WeakOrder>>,
}

impl<'a> PairDecider<'a> {
    fn new(formula: &'a Formula, universe: Universe) -> Result<PairDecider<'a>, LogicError> {
        let signature = if formula.is_order_fragment() && formula.arity() <= WEAK_ORDER_BUDGET {
            Some(semantic_signature(formula)?)
        } else {
            None
        };
        Ok(PairDecider {
            formula,
            universe,
            signature,
        })
    }

    fn decide(&self, vals: &[u64]) -> Result<bool, LogicError> {
        match &self.signature {
            Some(sig) => Ok(sig.contains(&WeakOrder::of_values(vals))),
            None => eval(self.formula, self.universe, vals),
        }
    }
}

/// The graph a logical scheme induces from a labeling into `[n^c]^k`:
/// edge `(u,v)` for `u != v` iff the formula holds on the concatenated
/// tuples over the universe `[n^c]`.
pub fn graph_of_labeling(
    scheme: &LogicalScheme,
    labeling: &Labeling,
) -> Result<Graph, SchemeError> {
    let n = labeling.n();
    if labeling.k() != scheme.k() {
        return Err(SchemeError::WrongK {
            expected: scheme.k(),
            got: labeling.k(),
        });
    }
    let bound = scheme.universe(n)?;
    for v in 1..=n {
        if let Some(&bad) = labeling.tuple(v).iter().find(|&&x| x > bound) {
            return Err(SchemeError::LabelOutOfUniverse {
                vertex: v,
                value: bad,
                bound,
            });
        }
    }
    let decider = PairDecider::new(&scheme.formula, Universe(bound))?;
    let mut g = Graph::directed(n);
    for u in 1..=n {
        for v in 1..=n {
            if u != v && decider.decide(&labeling.pair_values(u, v))? {
                g.add_edge(u, v).expect("in range");
            }
        }
    }
    Ok(g)
}

/// Searches for a labeling certifying `g` in the class of the scheme.
///
/// For quantifier-free order formulas membership is decided by searching
/// labelings up to order isomorphism (each rank-compressed prefix class
/// once), which makes exhaustive refutations tractable; a positive
/// decision is then turned into the lexicographically least witness over
/// `[kn]^k`. Other formulas search the full `[n^c]^k` space directly in
/// lexicographic order. Either way the reported witness is deterministic.
pub fn member_logical(
    scheme: &LogicalScheme,
    g: &Graph,
    budget: &Budget,
) -> Result<SearchOutcome<Labeling>, SchemeError> {
    let n = g.n();
    if n == 0 {
        return Err(SchemeError::EmptyGraph);
    }
    let k = scheme.k();
    let order_fragment = scheme.formula.is_order_fragment();
    let domain: u64 = if order_fragment {
        (k * n) as u64
    } else {
        scheme.universe(n)?
    };
    let decider = PairDecider::new(&scheme.formula, Universe(domain.max(1)))?;
    let mut meter = budget.meter();

    if order_fragment {
        let (order, outcome) = rank_space_decide(g, k, &decider, &mut meter)?;
        let leaf = match outcome {
            SearchOutcome::Absent => return Ok(SearchOutcome::Absent),
            SearchOutcome::BudgetExceeded => return Ok(SearchOutcome::BudgetExceeded),
            SearchOutcome::Witness(leaf) => leaf,
        };
        // Try to upgrade to the lexicographically least witness; the
        // canonical witness from the decision is the deterministic
        // fallback when extraction is too expensive.
        let lex_evals = (budget.max_evals / 2).min(1_000_000);
        let mut lex_meter = Budget::with_evals(lex_evals).meter();
        match lex_witness_search(g, k, domain, true, &decider, &mut lex_meter)? {
            SearchOutcome::Witness(w) => return Ok(SearchOutcome::Witness(w)),
            SearchOutcome::Absent => unreachable!("decision found a witness"),
            SearchOutcome::BudgetExceeded => {}
        }
        let mut tuples = vec![Vec::new(); n];
        for (pos, vertex) in order.iter().enumerate() {
            tuples[vertex - 1] = leaf[pos].clone();
        }
        return Ok(SearchOutcome::Witness(
            Labeling::new(tuples).expect("dense positive ranks"),
        ));
    }
    lex_witness_search(g, k, domain, order_fragment, &decider, &mut meter)
}

/// Decides order-fragment membership by depth-first search over
/// rank-compressed prefixes: per assigned prefix, each extension class of
/// the next vertex's tuple (equal to an existing value, or inserted into
/// a gap, per slot) is visited exactly once. Returns the vertex order
/// used and, on success, the first satisfying leaf in that order.
fn rank_space_decide(
    g: &Graph,
    k: usize,
    decider: &PairDecider,
    meter: &mut Meter,
) -> Result<(Vec<usize>, SearchOutcome<Vec<Vec<u64>>>), SchemeError> {
    let n = g.n();

    // Assign the most-connected vertices first so pair constraints bite
    // early; the decision is order-independent, only the cost is not.
    let order = constraint_first_order(g);
    let adj = |a: usize, b: usize| g.has_edge(order[a - 1], order[b - 1]);

    // Candidate tuples for the next vertex live on a scaled line: an
    // existing dense value i sits at i(k+1), and the k unscaled positions
    // between consecutive multiples leave room for any arrangement of up
    // to k new slots inside one gap. Order comparisons against the scaled
    // prefix are then exact without renumbering anything.
    fn admissible_extensions(
        g: &Graph,
        order: &[usize],
        prefix: &[Vec<u64>],
        distinct: u64,
        k: usize,
        decider: &PairDecider,
        meter: &mut Meter,
    ) -> Result<Option<Vec<(Vec<Vec<u64>>, u64)>>, SchemeError> {
        let ku = k as u64;
        let v = prefix.len() + 1;
        let line = (distinct + 1) * (ku + 1) - 1;
        let mut raw = vec![1u64; k];
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        let mut pair = vec![0u64; 2 * k];
        'raws: loop {
            if !meter.charge_evals(1) {
                return Ok(None);
            }
            // pair constraints directly on the scaled line
            let mut ok = true;
            for (u, put) in prefix.iter().enumerate() {
                if !meter.charge_evals(2) {
                    return Ok(None);
                }
                for s in 0..k {
                    pair[s] = put[s] * (ku + 1);
                    pair[k + s] = raw[s];
                }
                let fwd = decider.decide(&pair)?;
                for s in 0..k {
                    pair[s] = raw[s];
                    pair[k + s] = put[s] * (ku + 1);
                }
                let bwd = decider.decide(&pair)?;
                if fwd != g.has_edge(order[u], order[v - 1])
                    || bwd != g.has_edge(order[v - 1], order[u])
                {
                    ok = false;
                    break;
                }
            }
            if ok {
                // compress the survivor and deduplicate its class
                let mut values: Vec<u64> = prefix
                    .iter()
                    .flat_map(|t| t.iter().map(|&x| x * (ku + 1)))
                    .chain(raw.iter().copied())
                    .collect();
                let mut sorted = values.clone();
                sorted.sort_unstable();
                sorted.dedup();
                for val in &mut values {
                    *val = sorted.binary_search(val).unwrap() as u64 + 1;
                }
                if seen.insert(values.clone()) {
                    let tuples: Vec<Vec<u64>> = values.chunks(k).map(|c| c.to_vec()).collect();
                    out.push((tuples, sorted.len() as u64));
                }
            }
            // odometer over the scaled line
            let mut slot = k;
            loop {
                if slot == 0 {
                    break 'raws;
                }
                slot -= 1;
                if raw[slot] < line {
                    raw[slot] += 1;
                    raw[slot + 1..].iter_mut().for_each(|s| *s = 1);
                    break;
                }
                raw[slot] = 1;
            }
        }
        Ok(Some(out))
    }

    struct Frame {
        options: Vec<(Vec<Vec<u64>>, u64)>,
        next: usize,
    }

    let root = admissible_extensions(g, &order, &[], 0, k, decider, meter)?;
    let Some(root) = root else {
        return Ok((order, SearchOutcome::BudgetExceeded));
    };
    if n == 1 {
        let outcome = match root.into_iter().next() {
            Some((leaf, _)) => SearchOutcome::Witness(leaf),
            None => SearchOutcome::Absent,
        };
        return Ok((order, outcome));
    }
    let mut stack = vec![Frame {
        options: root,
        next: 0,
    }];

    while let Some(frame) = stack.last_mut() {
        if frame.next >= frame.options.len() {
            stack.pop();
            continue;
        }
        let (candidate, distinct) = frame.options[frame.next].clone();
        frame.next += 1;
        if candidate.len() == n {
            return Ok((order, SearchOutcome::Witness(candidate)));
        }
        let opts = admissible_extensions(g, &order, &candidate, distinct, k, decider, meter)?;
        let Some(opts) = opts else {
            return Ok((order, SearchOutcome::BudgetExceeded));
        };
        stack.push(Frame {
            options: opts,
            next: 0,
        });
    }
    Ok((order, SearchOutcome::Absent))
}

/// Vertex order for decision searches: repeatedly take the vertex with the
/// most already-placed neighbors, breaking ties by total degree then by
/// index. Deterministic; concentrates constraints at the top of the tree.
fn constraint_first_order(g: &Graph) -> Vec<usize> {
    let n = g.n();
    let degree: Vec<usize> = (0..=n).map(|v| if v == 0 { 0 } else { g.out_degree(v) }).collect();
    let mut placed = vec![false; n + 1];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best: Option<(usize, usize, usize)> = None;
        for v in 1..=n {
            if placed[v] {
                continue;
            }
            let anchored = order
                .iter()
                .filter(|&&u| g.has_edge(u, v) || g.has_edge(v, u))
                .count();
            // more anchors first, then higher degree, then lower index
            let key = (anchored, degree[v], n - v);
            if best.map_or(true, |(ba, bd, bi)| key > (ba, bd, bi)) {
                best = Some(key);
            }
        }
        let (_, _, ni) = best.unwrap();
        let v = n - ni;
        placed[v] = true;
        order.push(v);
    }
    order
}

/// Lexicographic first-witness search over `[domain]^k` labelings, with
/// automorphism-orbit symmetry breaking and, in the order fragment, the
/// rank-compression prefix bound. The first witness found is the
/// lexicographically least overall.
fn lex_witness_search(
    g: &Graph,
    k: usize,
    domain: u64,
    order_fragment: bool,
    decider: &PairDecider,
    meter: &mut Meter,
) -> Result<SearchOutcome<Labeling>, SchemeError> {
    let n = g.n();
    let orbit = orbit_of_first(g);

    let mut tuples: Vec<Vec<u64>> = Vec::with_capacity(n);
    let mut cur: Vec<u64> = vec![1; k];
    let mut fresh = true;

    // lexicographic odometer over [domain]^k
    fn advance(t: &mut [u64], domain: u64) -> bool {
        for slot in (0..t.len()).rev() {
            if t[slot] < domain {
                t[slot] += 1;
                t[slot + 1..].iter_mut().for_each(|s| *s = 1);
                return true;
            }
        }
        false
    }

    loop {
        if !fresh && !advance(&mut cur, domain) {
            match tuples.pop() {
                None => return Ok(SearchOutcome::Absent),
                Some(prev) => {
                    cur = prev;
                    fresh = false;
                    continue;
                }
            }
        }
        fresh = false;
        if !meter.charge_evals(1) {
            return Ok(SearchOutcome::BudgetExceeded);
        }
        let v = tuples.len() + 1;
        if orbit[v] && v > 1 && cur.as_slice() < tuples[0].as_slice() {
            continue;
        }
        if order_fragment {
            // The least witness is rank-compressed, so a value may exceed
            // the running maximum by at most one plus the slots still to
            // come (which may hold the skipped values).
            let mut prefix_max = tuples
                .iter()
                .flat_map(|t| t.iter().copied())
                .max()
                .unwrap_or(0);
            let mut ok_prefix = true;
            for (s, &x) in cur.iter().enumerate() {
                let remaining = ((n - v) * k + (k - 1 - s)) as u64;
                if x > prefix_max + 1 + remaining {
                    ok_prefix = false;
                    break;
                }
                prefix_max = prefix_max.max(x);
            }
            if !ok_prefix {
                continue;
            }
        }
        let mut ok = true;
        for u in 1..v {
            if !meter.charge_evals(2) {
                return Ok(SearchOutcome::BudgetExceeded);
            }
            let mut uv = Vec::with_capacity(2 * k);
            uv.extend_from_slice(&tuples[u - 1]);
            uv.extend_from_slice(&cur);
            let mut vu = Vec::with_capacity(2 * k);
            vu.extend_from_slice(&cur);
            vu.extend_from_slice(&tuples[u - 1]);
            if decider.decide(&uv)? != g.has_edge(u, v) || decider.decide(&vu)? != g.has_edge(v, u)
            {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        tuples.push(std::mem::replace(&mut cur, vec![1; k]));
        if tuples.len() == n {
            return Ok(SearchOutcome::Witness(
                Labeling::new(tuples).expect("entries start at 1"),
            ));
        }
        fresh = true;
    }
}

/// Combines two order-fragment schemes with equal `k` into one on `k + 1`
/// numbers per vertex whose class contains the union of the two classes:
/// an extra label slot selects, by equality of the two slots, whether the
/// first or the second formula decides the pair.
pub fn union_scheme(phi: &Formula, psi: &Formula) -> Result<Formula, SchemeError> {
    if !phi.is_order_fragment() || !psi.is_order_fragment() {
        return Err(SchemeError::NotOrderFragment);
    }
    if phi.arity() != psi.arity() {
        return Err(SchemeError::ArityMismatch {
            left: phi.arity(),
            right: psi.arity(),
        });
    }
    let k = phi.k();
    // old position i keeps its slot for i <= k and shifts past the new
    // guard slot otherwise
    let shift = |e: &Expr| map_free(e, &|i| if i <= k { i } else { i + 1 });
    let guard = || Expr::eq(k + 1, 2 * k + 2);
    // (guard -> phi') & (!guard -> psi'), desugared like the parser does
    let first = guard().not().or(shift(phi.expr()));
    let second = guard().not().not().or(shift(psi.expr()));
    Formula::with_arity(first.and(second), 2 * k + 2)
        .map_err(|_| SchemeError::ArityMismatch {
            left: phi.arity(),
            right: psi.arity(),
        })
}

fn map_free(e: &Expr, f: &impl Fn(usize) -> usize) -> Expr {
    use crate::logic::{Term, Var};
    fn term(t: &Term, f: &impl Fn(usize) -> usize) -> Term {
        match t {
            Term::Var(Var::Free(i)) => Term::Var(Var::Free(f(*i))),
            Term::Var(Var::Bound(d)) => Term::Var(Var::Bound(*d)),
            Term::Add(a, b) => Term::Add(Box::new(term(a, f)), Box::new(term(b, f))),
            Term::Mul(a, b) => Term::Mul(Box::new(term(a, f)), Box::new(term(b, f))),
        }
    }
    match e {
        Expr::Atom(a, r, b) => Expr::Atom(term(a, f), *r, term(b, f)),
        Expr::Not(x) => Expr::Not(Box::new(map_free(x, f))),
        Expr::And(a, b) => Expr::And(Box::new(map_free(a, f)), Box::new(map_free(b, f))),
        Expr::Or(a, b) => Expr::Or(Box::new(map_free(a, f)), Box::new(map_free(b, f))),
        Expr::Exists(n, x) => Expr::Exists(n.clone(), Box::new(map_free(x, f))),
        Expr::Forall(n, x) => Expr::Forall(n.clone(), Box::new(map_free(x, f))),
    }
}

/// The interval scheme: labels are endpoint pairs, adjacency is interval
/// overlap. `c = 2` keeps `[2n]` inside the universe for `n >= 2`.
pub fn interval_formula() -> LogicalScheme {
    let formula = logic::parse_formula("!(x2 < y1 | y2 < x1)").expect("fixed formula parses");
    LogicalScheme { formula, c: 2 }
}

/// The `k`-interval scheme: `2k` numbers per vertex read as `k` endpoint
/// pairs, adjacency when any interval of one vertex overlaps any interval
/// of the other.
pub fn k_interval_formula(k: usize) -> Result<LogicalScheme, SchemeError> {
    if k == 0 {
        return Err(SchemeError::BadK);
    }
    let mut overlaps = Vec::new();
    for i in 1..=k {
        for j in 1..=k {
            let (a, b) = (2 * i - 1, 2 * i);
            let (c, d) = (2 * k + 2 * j - 1, 2 * k + 2 * j);
            overlaps.push(Expr::lt(b, c).or(Expr::lt(d, a)).not());
        }
    }
    let expr = overlaps.into_iter().reduce(Expr::or).expect("k >= 1");
    let formula =
        Formula::with_arity(expr, 4 * k).expect("positions bounded by 4k");
    LogicalScheme::new(formula, k + 1)
}

// ---------------------------------------------------------------------------
// Interval number
// ---------------------------------------------------------------------------

/// A `k`-interval representation: up to `k` closed integer intervals per
/// vertex, adjacency = some pair of intervals intersects.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntervalModel {
    intervals: Vec<Vec<(u64, u64)>>,
}

impl IntervalModel {
    pub fn new(intervals: Vec<Vec<(u64, u64)>>) -> Result<IntervalModel, SchemeError> {
        if intervals.is_empty() {
            return Err(SchemeError::EmptyLabeling);
        }
        for (i, per_vertex) in intervals.iter().enumerate() {
            if per_vertex.is_empty() {
                return Err(SchemeError::RaggedLabeling {
                    vertex: i + 1,
                    expected: 1,
                    got: 0,
                });
            }
            for &(l, r) in per_vertex {
                if l == 0 || r < l {
                    return Err(SchemeError::ZeroLabelEntry { vertex: i + 1 });
                }
            }
        }
        Ok(IntervalModel { intervals })
    }

    pub fn n(&self) -> usize {
        self.intervals.len()
    }

    /// Most intervals any vertex uses.
    pub fn width(&self) -> usize {
        self.intervals.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn intervals(&self) -> &[Vec<(u64, u64)>] {
        &self.intervals
    }

    /// The undirected intersection graph of the model.
    pub fn induced_graph(&self) -> Graph {
        let n = self.n();
        let mut g = Graph::undirected(n);
        for u in 1..=n {
            for v in u + 1..=n {
                let meet = self.intervals[u - 1].iter().any(|&(a, b)| {
                    self.intervals[v - 1]
                        .iter()
                        .any(|&(c, d)| a <= d && c <= b)
                });
                if meet {
                    g.add_edge(u, v).expect("in range");
                }
            }
        }
        g
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum SeqMove {
    Open(usize),
    Close(usize),
}

struct IntervalSearch<'a> {
    g: &'a Graph,
    n: usize,
    k: usize,
    opens_used: Vec<usize>,
    open_now: Vec<usize>,
    open_count: usize,
    placed: usize,
    satisfied: Vec<bool>,
    unsat: usize,
    seq: Vec<SeqMove>,
}

impl<'a> IntervalSearch<'a> {
    fn pair(&self, u: usize, v: usize) -> usize {
        (u - 1) * self.n + (v - 1)
    }

    fn has_unsat_neighbor(&self, v: usize) -> bool {
        (1..=self.n).any(|u| u != v && self.g.has_edge(u, v) && !self.satisfied[self.pair(u, v)])
    }

    /// Depth-first over endpoint sequences. Opens of one vertex are capped
    /// at `k`; an open while a non-neighbor is open is forbidden; runs of
    /// equal move kinds are kept ascending to skip equivalent orders.
    fn run(&mut self, meter: &mut Meter) -> SearchOutcome<()> {
        if self.open_count == 0 && self.placed == self.n && self.unsat == 0 {
            return SearchOutcome::Witness(());
        }
        let last = self.seq.last().copied();
        // opens, ascending
        let open_floor = match last {
            Some(SeqMove::Open(u)) => u + 1,
            _ => 1,
        };
        for v in open_floor..=self.n {
            if self.opens_used[v - 1] == self.k {
                continue;
            }
            if (1..=self.n).any(|u| u != v && self.open_now[u - 1] > 0 && !self.g.has_edge(u, v))
            {
                continue;
            }
            if !meter.charge_evals(1) {
                return SearchOutcome::BudgetExceeded;
            }
            // apply
            let mut newly = Vec::new();
            for u in 1..=self.n {
                if u != v && self.open_now[u - 1] > 0 {
                    let (p, q) = (self.pair(u, v), self.pair(v, u));
                    if !self.satisfied[p] {
                        self.satisfied[p] = true;
                        self.satisfied[q] = true;
                        self.unsat -= 1;
                        newly.push((p, q));
                    }
                }
            }
            if self.opens_used[v - 1] == 0 {
                self.placed += 1;
            }
            self.opens_used[v - 1] += 1;
            self.open_now[v - 1] += 1;
            self.open_count += 1;
            self.seq.push(SeqMove::Open(v));

            match self.run(meter) {
                SearchOutcome::Witness(()) => return SearchOutcome::Witness(()),
                SearchOutcome::BudgetExceeded => return SearchOutcome::BudgetExceeded,
                SearchOutcome::Absent => {}
            }

            self.seq.pop();
            self.open_count -= 1;
            self.open_now[v - 1] -= 1;
            self.opens_used[v - 1] -= 1;
            if self.opens_used[v - 1] == 0 {
                self.placed -= 1;
            }
            for (p, q) in newly {
                self.satisfied[p] = false;
                self.satisfied[q] = false;
                self.unsat += 1;
            }
        }
        // closes, ascending
        let close_floor = match last {
            Some(SeqMove::Close(u)) => u + 1,
            _ => 1,
        };
        for v in close_floor..=self.n {
            if self.open_now[v - 1] == 0 {
                continue;
            }
            // closing v for good with an unmet neighbor is a dead end
            if self.open_now[v - 1] == 1
                && self.opens_used[v - 1] == self.k
                && self.has_unsat_neighbor(v)
            {
                continue;
            }
            if !meter.charge_evals(1) {
                return SearchOutcome::BudgetExceeded;
            }
            self.open_now[v - 1] -= 1;
            self.open_count -= 1;
            self.seq.push(SeqMove::Close(v));

            match self.run(meter) {
                SearchOutcome::Witness(()) => return SearchOutcome::Witness(()),
                SearchOutcome::BudgetExceeded => return SearchOutcome::BudgetExceeded,
                SearchOutcome::Absent => {}
            }

            self.seq.pop();
            self.open_count += 1;
            self.open_now[v - 1] += 1;
        }
        SearchOutcome::Absent
    }
}

fn k_interval_search(g: &Graph, k: usize, meter: &mut Meter) -> SearchOutcome<IntervalModel> {
    let n = g.n();
    let adjacent_pairs = g.ordered_edge_count() / 2;
    let mut search = IntervalSearch {
        g,
        n,
        k,
        opens_used: vec![0; n],
        open_now: vec![0; n],
        open_count: 0,
        placed: 0,
        satisfied: vec![false; n * n],
        unsat: adjacent_pairs,
        seq: Vec::new(),
    };
    match search.run(meter) {
        SearchOutcome::Witness(()) => {
            let mut stacks: Vec<Vec<u64>> = vec![Vec::new(); n];
            let mut model: Vec<Vec<(u64, u64)>> = vec![Vec::new(); n];
            for (t, mv) in search.seq.iter().enumerate() {
                let time = t as u64 + 1;
                match mv {
                    SeqMove::Open(v) => stacks[v - 1].push(time),
                    SeqMove::Close(v) => {
                        let start = stacks[v - 1].pop().expect("balanced sequence");
                        model[v - 1].push((start, time));
                    }
                }
            }
            SearchOutcome::Witness(IntervalModel::new(model).expect("nonempty balanced model"))
        }
        SearchOutcome::Absent => SearchOutcome::Absent,
        SearchOutcome::BudgetExceeded => SearchOutcome::BudgetExceeded,
    }
}

/// The least `k <= kmax` admitting a `k`-interval representation of the
/// undirected graph `g`, with a witness model. `Absent` proves the
/// interval number exceeds `kmax`; a budget overrun at any `k` aborts,
/// since smaller values were not conclusively refuted.
pub fn interval_number(
    g: &Graph,
    kmax: usize,
    budget: &Budget,
) -> Result<SearchOutcome<(usize, IntervalModel)>, SchemeError> {
    if g.is_directed() {
        return Err(SchemeError::DirectedUnsupported);
    }
    let n = g.n();
    if n == 0 {
        return Err(SchemeError::EmptyGraph);
    }
    if n > 10 || kmax == 0 || kmax > 3 {
        return Err(SchemeError::IntervalSearchTooLarge { n, kmax });
    }
    let mut meter = budget.meter();
    for k in 1..=kmax {
        match k_interval_search(g, k, &mut meter) {
            SearchOutcome::Witness(model) => return Ok(SearchOutcome::Witness((k, model))),
            SearchOutcome::Absent => {}
            SearchOutcome::BudgetExceeded => return Ok(SearchOutcome::BudgetExceeded),
        }
    }
    Ok(SearchOutcome::Absent)
}

/// The least `k <= kmax` such that `g` is `k`-expressible (equivalently,
/// `{g}` has a quantifier-free order scheme with `k` numbers per vertex),
/// with the witness labeling and DAG decomposition.
pub fn lambda_foqf(
    g: &Graph,
    kmax: usize,
    budget: &Budget,
) -> Result<SearchOutcome<(usize, Labeling, Vec<KDag>)>, SchemeError> {
    for k in 1..=kmax {
        match dags::expressible(g, k, budget)? {
            SearchOutcome::Witness((labeling, dags)) => {
                return Ok(SearchOutcome::Witness((k, labeling, dags)))
            }
            SearchOutcome::Absent => {}
            SearchOutcome::BudgetExceeded => return Ok(SearchOutcome::BudgetExceeded),
        }
    }
    Ok(SearchOutcome::Absent)
}
