//! Micro-scale diagonalization over a finite decoder registry.
//!
//! Scheme indices come from the partial pairing `tau`: it is defined on
//! `x = 2^(2^y 3^z 5^w)` and maps such an `x` to `(y, z)`, so every pair
//! has infinitely many preimages, all powers of two. Vertex count `n`
//! selects the scheme `(decoder y of the registry, length multiplier z)`;
//! for each `n` in the domain, the class stores the least `n`-vertex graph
//! (in canonical-code order) the selected scheme cannot represent.
//!
//! Keeping the domain on powers of two means the members of the class
//! carry labels of pairwise distinct lengths, so a single lookup decoder
//! built from their canonical labeled forms represents the whole class
//! with multiplier 1. `verify_diagonal` re-checks all of that
//! exhaustively.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::graphs::{
    enumerate_graphs_budget, write_graph6, G6Error, Graph, GraphError, MeteredNext,
};
use crate::schemes::{
    member_bitscheme, BitLabeling, Bits, BitScheme, BuiltinDecoder, LabelDecoder, SchemeError,
};
use crate::search::{Budget, SearchOutcome};

/// Default cap on `n` for undirected diagonalization runs.
pub const DIAG_NMAX_UNDIRECTED: usize = 8;
/// Default cap on `n` for directed diagonalization runs.
pub const DIAG_NMAX_DIRECTED: usize = 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DiagError {
    #[error("decoder registry must not be empty")]
    EmptyRegistry,
    #[error("unknown decoder name `{0}`")]
    UnknownDecoder(String),
    #[error("class member at n = {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("n_max = {n_max} exceeds the {limit} limit for this mode")]
    NMaxTooLarge { n_max: usize, limit: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    G6(#[from] G6Error),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

/// `tau(x) = (y, z)` iff `x = 2^(2^y 3^z 5^w)` for some `w >= 0`;
/// undefined everywhere else, in particular off powers of two.
pub fn tau(x: u128) -> Option<(u32, u32)> {
    if x < 2 || !x.is_power_of_two() {
        return None;
    }
    let mut e = x.trailing_zeros();
    let mut y = 0;
    while e % 2 == 0 {
        e /= 2;
        y += 1;
    }
    let mut z = 0;
    while e % 3 == 0 {
        e /= 3;
        z += 1;
    }
    while e % 5 == 0 {
        e /= 5;
    }
    (e == 1).then_some((y, z))
}

/// How a registry resolves decoder indices past its length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IndexPolicy {
    /// Index wraps around (the default).
    Modulo,
    /// Out-of-range indices resolve to no scheme at all.
    EmptyBeyondRange,
}

/// An ordered, finite list of named label decoders standing in for an
/// enumeration of a decoder class.
#[derive(Clone)]
pub struct DecoderRegistry {
    entries: Vec<Arc<dyn LabelDecoder>>,
    policy: IndexPolicy,
}

impl DecoderRegistry {
    pub fn new(
        entries: Vec<Arc<dyn LabelDecoder>>,
        policy: IndexPolicy,
    ) -> Result<DecoderRegistry, DiagError> {
        if entries.is_empty() {
            return Err(DiagError::EmptyRegistry);
        }
        Ok(DecoderRegistry { entries, policy })
    }

    /// Builds from a comma-separated list of built-in decoder names,
    /// e.g. `all,eq,lt`.
    pub fn from_spec(spec: &str, policy: IndexPolicy) -> Result<DecoderRegistry, DiagError> {
        let mut entries: Vec<Arc<dyn LabelDecoder>> = Vec::new();
        for name in spec.split(',') {
            let name = name.trim();
            if name.is_empty() {
                continue;
            }
            let d = BuiltinDecoder::from_name(name)
                .ok_or_else(|| DiagError::UnknownDecoder(name.to_string()))?;
            entries.push(Arc::new(d));
        }
        DecoderRegistry::new(entries, policy)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn policy(&self) -> IndexPolicy {
        self.policy
    }

    pub fn resolve(&self, y: u32) -> Option<Arc<dyn LabelDecoder>> {
        let idx = match self.policy {
            IndexPolicy::Modulo => (y as usize) % self.entries.len(),
            IndexPolicy::EmptyBeyondRange => {
                if (y as usize) < self.entries.len() {
                    y as usize
                } else {
                    return None;
                }
            }
        };
        Some(self.entries[idx].clone())
    }
}

/// The scheme the pairing assigns to vertex count `n`: decoder index
/// `tau_y(n)`, length multiplier `tau_z(n)`. Absent when `tau` is
/// undefined at `n` or the registry cannot resolve the index.
pub fn scheme_at(n: usize, registry: &DecoderRegistry) -> Option<BitScheme> {
    let (y, z) = tau(n as u128)?;
    let decoder = registry.resolve(y)?;
    Some(BitScheme::from_arc(decoder, z as usize))
}

/// The least `n`-vertex graph (canonical-code order) outside the class of
/// `scheme`: candidates are scanned in order, each membership decided
/// exhaustively. `Absent` means the scheme represents all of them.
pub fn smallest_missing_graph(
    n: usize,
    scheme: &BitScheme,
    directed: bool,
    budget: &Budget,
) -> Result<SearchOutcome<Graph>, DiagError> {
    let limit = if directed {
        DIAG_NMAX_DIRECTED
    } else {
        DIAG_NMAX_UNDIRECTED
    };
    if n > limit {
        return Err(DiagError::NMaxTooLarge { n_max: n, limit });
    }
    let mut stream = enumerate_graphs_budget(n, directed, limit)?;
    let mut enum_meter = budget.meter();
    loop {
        match stream.next_metered(&mut enum_meter) {
            MeteredNext::Found(g) => match member_bitscheme(scheme, &g, budget)? {
                SearchOutcome::Witness(_) => continue,
                SearchOutcome::Absent => return Ok(SearchOutcome::Witness(g)),
                SearchOutcome::BudgetExceeded => return Ok(SearchOutcome::BudgetExceeded),
            },
            MeteredNext::Exhausted => return Ok(SearchOutcome::Absent),
            MeteredNext::BudgetExceeded => return Ok(SearchOutcome::BudgetExceeded),
        }
    }
}

/// The diagonalization class: at most one graph per vertex count.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DiagClass {
    members: BTreeMap<usize, Graph>,
}

impl DiagClass {
    pub fn new() -> DiagClass {
        DiagClass::default()
    }

    /// Hand-building is allowed (tests exercise invalid classes); the
    /// builders below only insert at sizes in the pairing's domain.
    pub fn insert(&mut self, n: usize, g: Graph) {
        self.members.insert(n, g);
    }

    pub fn members(&self) -> impl Iterator<Item = (usize, &Graph)> {
        self.members.iter().map(|(&n, g)| (n, g))
    }

    pub fn get(&self, n: usize) -> Option<&Graph> {
        self.members.get(&n)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Stable JSON rendering (size -> graph6), used for byte-level
    /// determinism checks.
    pub fn to_json(&self) -> Result<String, DiagError> {
        let mut map = BTreeMap::new();
        for (n, g) in self.members() {
            map.insert(n.to_string(), write_graph6(g)?);
        }
        Ok(serde_json::to_string(&map).expect("string map serializes"))
    }
}

/// Per-size outcome of a class-building run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BuildEntry {
    pub n: usize,
    pub tau: (u32, u32),
    pub decoder: String,
    pub outcome: BuildOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BuildOutcome {
    Missing { graph6: String },
    NoneMissing,
    BudgetExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BuildReport {
    pub n_max: usize,
    pub directed: bool,
    pub entries: Vec<BuildEntry>,
}

/// Builds the diagonalization class for `n <= n_max`: for every `n` where
/// the pairing and registry yield a scheme, the smallest missing graph,
/// when one exists. Budget overruns are recorded per size, not fatal.
pub fn build_diag_class(
    registry: &DecoderRegistry,
    n_max: usize,
    directed: bool,
    budget: &Budget,
) -> Result<(DiagClass, BuildReport), DiagError> {
    let limit = if directed {
        DIAG_NMAX_DIRECTED
    } else {
        DIAG_NMAX_UNDIRECTED
    };
    if n_max > limit {
        return Err(DiagError::NMaxTooLarge { n_max, limit });
    }
    let mut class = DiagClass::new();
    let mut entries = Vec::new();
    for n in 1..=n_max {
        let Some(scheme) = scheme_at(n, registry) else {
            continue;
        };
        let tau_n = tau(n as u128).expect("scheme_at implies tau defined");
        let outcome = match smallest_missing_graph(n, &scheme, directed, budget)? {
            SearchOutcome::Witness(g) => {
                let g6 = write_graph6(&g)?;
                class.insert(n, g);
                BuildOutcome::Missing { graph6: g6 }
            }
            SearchOutcome::Absent => BuildOutcome::NoneMissing,
            SearchOutcome::BudgetExceeded => BuildOutcome::BudgetExceeded,
        };
        entries.push(BuildEntry {
            n,
            tau: tau_n,
            decoder: scheme.decoder.name().to_string(),
            outcome,
        });
    }
    Ok((
        class,
        BuildReport {
            n_max,
            directed,
            entries,
        },
    ))
}

/// Lookup decoder induced by a diagonalization class: for each member on
/// `2^m` vertices, the adjacency of its canonical labeled form with the
/// vertex set read as `{0,1}^m` in numeric order.
pub struct InducedDecoder {
    tables: BTreeMap<usize, Vec<Vec<bool>>>,
}

impl InducedDecoder {
    pub fn bit_lengths(&self) -> impl Iterator<Item = usize> + '_ {
        self.tables.keys().copied()
    }
}

impl LabelDecoder for InducedDecoder {
    fn name(&self) -> &str {
        "induced"
    }

    fn accepts(&self, x: &[bool], y: &[bool]) -> bool {
        let Some(table) = self.tables.get(&x.len()) else {
            return false;
        };
        let to_index = |bits: &[bool]| bits.iter().fold(0usize, |a, &b| (a << 1) | usize::from(b));
        table[to_index(x)][to_index(y)]
    }
}

/// Builds the induced lookup decoder; every member size must be a power of
/// two so bit lengths identify members uniquely.
pub fn build_induced_decoder(class: &DiagClass) -> Result<InducedDecoder, DiagError> {
    let mut tables = BTreeMap::new();
    for (n, g) in class.members() {
        if n < 2 || !n.is_power_of_two() {
            return Err(DiagError::NotPowerOfTwo(n));
        }
        let m = n.trailing_zeros() as usize;
        let form = g.canonical_form()?;
        let table: Vec<Vec<bool>> = (1..=n)
            .map(|u| (1..=n).map(|v| form.has_edge(u, v)).collect())
            .collect();
        tables.insert(m, table);
    }
    Ok(InducedDecoder { tables })
}

/// Verdict for one verification clause.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClauseStatus {
    Passed,
    Failed(String),
    BudgetExceeded,
}

impl ClauseStatus {
    pub fn passed(&self) -> bool {
        *self == ClauseStatus::Passed
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SizeVerdict {
    pub n: usize,
    /// (a) the stored graph is outside the class of its scheme
    pub outside: ClauseStatus,
    /// (b) every smaller graph in canonical order is inside
    pub least: ClauseStatus,
    /// (c) the induced decoder with multiplier 1 reproduces the member
    pub embeds: ClauseStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub per_size: Vec<SizeVerdict>,
    pub all_passed: bool,
}

/// Re-verifies a diagonalization class exhaustively: each member must be
/// (a) unrepresentable by its assigned scheme, (b) least such in
/// canonical-code order, and (c) reproduced by the induced decoder at
/// multiplier 1 on the identity bit labeling.
pub fn verify_diagonal(
    class: &DiagClass,
    registry: &DecoderRegistry,
    directed: bool,
    budget: &Budget,
) -> Result<VerifyReport, DiagError> {
    let induced = build_induced_decoder(class).map(Arc::new);
    let mut per_size = Vec::new();
    for (n, g) in class.members() {
        let outside;
        let least;
        match scheme_at(n, registry) {
            None => {
                let msg = format!("no scheme at n = {n}");
                outside = ClauseStatus::Failed(msg.clone());
                least = ClauseStatus::Failed(msg);
            }
            Some(scheme) => {
                outside = match member_bitscheme(&scheme, g, budget)? {
                    SearchOutcome::Absent => ClauseStatus::Passed,
                    SearchOutcome::Witness(_) => {
                        ClauseStatus::Failed(format!("graph at n = {n} is representable"))
                    }
                    SearchOutcome::BudgetExceeded => ClauseStatus::BudgetExceeded,
                };
                least = verify_least(n, g, &scheme, directed, budget)?;
            }
        }
        let embeds = match &induced {
            Err(e) => ClauseStatus::Failed(e.to_string()),
            Ok(decoder) => verify_embeds(n, g, decoder.clone())?,
        };
        per_size.push(SizeVerdict {
            n,
            outside,
            least,
            embeds,
        });
    }
    let all_passed = per_size
        .iter()
        .all(|v| v.outside.passed() && v.least.passed() && v.embeds.passed());
    Ok(VerifyReport {
        per_size,
        all_passed,
    })
}

fn verify_least(
    n: usize,
    g: &Graph,
    scheme: &BitScheme,
    directed: bool,
    budget: &Budget,
) -> Result<ClauseStatus, DiagError> {
    let target = g.canonical_code()?;
    let limit = if directed {
        DIAG_NMAX_DIRECTED
    } else {
        DIAG_NMAX_UNDIRECTED
    };
    let mut stream = enumerate_graphs_budget(n, directed, limit)?;
    let mut enum_meter = budget.meter();
    loop {
        match stream.next_metered(&mut enum_meter) {
            MeteredNext::Found(candidate) => {
                let code = candidate.canonical_code()?;
                if code >= target {
                    return Ok(if code == target {
                        ClauseStatus::Passed
                    } else {
                        ClauseStatus::Failed(format!(
                            "stored graph at n = {n} is not a canonical representative"
                        ))
                    });
                }
                match member_bitscheme(scheme, &candidate, budget)? {
                    SearchOutcome::Witness(_) => {}
                    SearchOutcome::Absent => {
                        return Ok(ClauseStatus::Failed(format!(
                            "smaller graph {} at n = {n} is also missing",
                            write_graph6(&candidate)?
                        )))
                    }
                    SearchOutcome::BudgetExceeded => return Ok(ClauseStatus::BudgetExceeded),
                }
            }
            MeteredNext::Exhausted => {
                return Ok(ClauseStatus::Failed(format!(
                    "stored graph at n = {n} not found in enumeration"
                )))
            }
            MeteredNext::BudgetExceeded => return Ok(ClauseStatus::BudgetExceeded),
        }
    }
}

fn verify_embeds(
    n: usize,
    g: &Graph,
    decoder: Arc<InducedDecoder>,
) -> Result<ClauseStatus, DiagError> {
    if n < 2 || !n.is_power_of_two() {
        return Ok(ClauseStatus::Failed(format!("n = {n} not a power of two")));
    }
    let m = n.trailing_zeros() as usize;
    let scheme = BitScheme::from_arc(decoder, 1);
    let identity = BitLabeling::new((0..n).map(|i| Bits::from_value(i as u64, m)).collect());
    let induced = crate::schemes::graph_of_bitscheme(&scheme, &identity)?;
    if induced.same_adjacency(&g.canonical_form()?) {
        Ok(ClauseStatus::Passed)
    } else {
        Ok(ClauseStatus::Failed(format!(
            "induced decoder does not reproduce the member at n = {n}"
        )))
    }
}
