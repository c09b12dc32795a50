//! First-order label decoders over the capped arithmetic structure on `[N]`.
//!
//! A formula has an even number `2k` of free variables `x1..x2k`; evaluated
//! on the concatenation of two `k`-tuples it decides adjacency. The
//! structure interprets `<` as the usual order on `[N]` and caps `+` and
//! `*`: a sum or product exceeding `N` collapses to `1`. Quantifiers range
//! over `[N]`.
//!
//! The quantifier-free, arithmetic-free fragment (order comparisons only)
//! gets special treatment: negation normal form, disjunctive normal form
//! into conjunctive [`Clause`]s, and an extensional canonical form — the
//! set of weak orders of the variable positions on which the formula holds
//! ([`semantic_signature`]). Two formulas of the fragment are equivalent
//! iff their signatures agree.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Largest position count for weak-order enumeration (75 orders at 4
/// positions, 545835 at 8).
pub const WEAK_ORDER_BUDGET: usize = 8;
/// Cap on intermediate clause counts during DNF expansion.
pub const DNF_CLAUSE_BUDGET: usize = 1 << 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LogicError {
    #[error("assignment has {got} values, formula has {want} free variables")]
    ArityMismatch { want: usize, got: usize },
    #[error("assignment value {value} outside universe [{n}]")]
    ValueOutOfUniverse { value: u64, n: u64 },
    #[error("operation requires the quantifier-free order fragment, found {found}")]
    UnsupportedFragment { found: &'static str },
    #[error("formulas have different free-variable counts ({0} vs {1})")]
    MismatchedArity(usize, usize),
    #[error("weak-order enumeration limited to {max} positions, asked for {m}")]
    WeakOrderBudget { m: usize, max: usize },
    #[error("DNF expansion exceeded {0} clauses")]
    DnfBudget(usize),
}

/// Parse failure with 1-based source position.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: String, found: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("bad variable index in `{0}` (indices start at 1)")]
    BadVariableIndex(String),
    #[error("stray byte {0:#04x}")]
    BadByte(u8),
    #[error("formula has no free variables")]
    NoFreeVariables,
    #[error("odd free-variable count {0}")]
    OddFreeVarCount(usize),
    #[error("declared arity {declared} too small: formula needs {needed} free variables")]
    ArityTooSmall { declared: usize, needed: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rel {
    Lt,
    Eq,
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rel::Lt => "<",
            Rel::Eq => "=",
        })
    }
}

/// Variable occurrence: a free position among `x1..x2k` or a
/// quantifier-bound variable as a de Bruijn index (0 = innermost binder).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    Free(usize),
    Bound(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(Var),
    Add(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
}

impl Term {
    pub fn free(i: usize) -> Term {
        Term::Var(Var::Free(i))
    }
}

/// Formula body. Connectives are the core set; the parser desugars
/// `<= != > >= -> <->` away.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Atom(Term, Rel, Term),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Exists(String, Box<Expr>),
    Forall(String, Box<Expr>),
}

impl Expr {
    pub fn atom(a: Term, rel: Rel, b: Term) -> Expr {
        Expr::Atom(a, rel, b)
    }

    pub fn lt(i: usize, j: usize) -> Expr {
        Expr::Atom(Term::free(i), Rel::Lt, Term::free(j))
    }

    pub fn eq(i: usize, j: usize) -> Expr {
        Expr::Atom(Term::free(i), Rel::Eq, Term::free(j))
    }

    pub fn not(self) -> Expr {
        Expr::Not(Box::new(self))
    }

    pub fn and(self, other: Expr) -> Expr {
        Expr::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Expr) -> Expr {
        Expr::Or(Box::new(self), Box::new(other))
    }

    fn max_free_index(&self) -> usize {
        fn term(t: &Term) -> usize {
            match t {
                Term::Var(Var::Free(i)) => *i,
                Term::Var(Var::Bound(_)) => 0,
                Term::Add(a, b) | Term::Mul(a, b) => term(a).max(term(b)),
            }
        }
        match self {
            Expr::Atom(a, _, b) => term(a).max(term(b)),
            Expr::Not(x) => x.max_free_index(),
            Expr::And(a, b) | Expr::Or(a, b) => a.max_free_index().max(b.max_free_index()),
            Expr::Exists(_, x) | Expr::Forall(_, x) => x.max_free_index(),
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Expr::Atom(..) => true,
            Expr::Not(x) => x.is_quantifier_free(),
            Expr::And(a, b) | Expr::Or(a, b) => a.is_quantifier_free() && b.is_quantifier_free(),
            Expr::Exists(..) | Expr::Forall(..) => false,
        }
    }

    pub fn has_arithmetic(&self) -> bool {
        fn term(t: &Term) -> bool {
            matches!(t, Term::Add(..) | Term::Mul(..))
        }
        match self {
            Expr::Atom(a, _, b) => term(a) || term(b),
            Expr::Not(x) => x.has_arithmetic(),
            Expr::And(a, b) | Expr::Or(a, b) => a.has_arithmetic() || b.has_arithmetic(),
            Expr::Exists(_, x) | Expr::Forall(_, x) => x.has_arithmetic(),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8, binders: &mut Vec<String>) -> fmt::Result {
        fn term(
            t: &Term,
            f: &mut fmt::Formatter<'_>,
            prod: bool,
            binders: &[String],
        ) -> fmt::Result {
            match t {
                Term::Var(Var::Free(i)) => write!(f, "x{i}"),
                Term::Var(Var::Bound(d)) => {
                    let name = binders
                        .get(binders.len().wrapping_sub(1 + d))
                        .map(String::as_str)
                        .unwrap_or("?");
                    f.write_str(name)
                }
                Term::Add(a, b) => {
                    if prod {
                        f.write_str("(")?;
                    }
                    term(a, f, false, binders)?;
                    f.write_str(" + ")?;
                    term(b, f, false, binders)?;
                    if prod {
                        f.write_str(")")?;
                    }
                    Ok(())
                }
                Term::Mul(a, b) => {
                    term(a, f, true, binders)?;
                    f.write_str(" * ")?;
                    term(b, f, true, binders)
                }
            }
        }
        // precedence: 0 = or, 1 = and, 2 = unary
        match self {
            Expr::Atom(a, rel, b) => {
                term(a, f, false, binders)?;
                write!(f, " {rel} ")?;
                term(b, f, false, binders)
            }
            Expr::Not(x) => {
                f.write_str("!")?;
                match **x {
                    Expr::Not(..) => x.fmt_prec(f, 2, binders),
                    _ => {
                        f.write_str("(")?;
                        x.fmt_prec(f, 0, binders)?;
                        f.write_str(")")
                    }
                }
            }
            Expr::And(a, b) => {
                if prec > 1 {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, 2, binders)?;
                f.write_str(" & ")?;
                b.fmt_prec(f, 2, binders)?;
                if prec > 1 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Expr::Or(a, b) => {
                if prec > 0 {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, 1, binders)?;
                f.write_str(" | ")?;
                b.fmt_prec(f, 1, binders)?;
                if prec > 0 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Expr::Exists(name, x) | Expr::Forall(name, x) => {
                if prec > 0 {
                    f.write_str("(")?;
                }
                let kw = if matches!(self, Expr::Exists(..)) {
                    "exists"
                } else {
                    "forall"
                };
                write!(f, "{kw} {name}. ")?;
                binders.push(name.clone());
                x.fmt_prec(f, 0, binders)?;
                binders.pop();
                if prec > 0 {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

/// A label-decoder formula together with its declared free-variable count
/// `2k`. Free variables are `x1..x2k` in fixed order, whether or not each
/// occurs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    arity: usize,
    expr: Expr,
}

impl Formula {
    /// Wraps an expression, inferring the smallest even arity covering all
    /// free occurrences.
    pub fn new(expr: Expr) -> Result<Formula, ParseError> {
        let needed = expr.max_free_index();
        if needed == 0 {
            return Err(ParseError {
                line: 1,
                col: 1,
                kind: ParseErrorKind::NoFreeVariables,
            });
        }
        Ok(Formula {
            arity: needed.div_ceil(2) * 2,
            expr,
        })
    }

    /// Wraps an expression with an explicit arity `2k`.
    pub fn with_arity(expr: Expr, arity: usize) -> Result<Formula, ParseError> {
        let at = |kind| ParseError {
            line: 1,
            col: 1,
            kind,
        };
        if arity == 0 {
            return Err(at(ParseErrorKind::NoFreeVariables));
        }
        if arity % 2 != 0 {
            return Err(at(ParseErrorKind::OddFreeVarCount(arity)));
        }
        let needed = expr.max_free_index();
        if needed > arity {
            return Err(at(ParseErrorKind::ArityTooSmall {
                declared: arity,
                needed,
            }));
        }
        Ok(Formula { arity, expr })
    }

    /// Number of free variables, `2k`.
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Tuple length `k` of each vertex label.
    pub fn k(&self) -> usize {
        self.arity / 2
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn into_expr(self) -> Expr {
        self.expr
    }

    pub fn is_quantifier_free(&self) -> bool {
        self.expr.is_quantifier_free()
    }

    pub fn has_arithmetic(&self) -> bool {
        self.expr.has_arithmetic()
    }

    /// True for the fragment the DNF/DAG pipeline accepts.
    pub fn is_order_fragment(&self) -> bool {
        self.is_quantifier_free() && !self.has_arithmetic()
    }

    fn require_order_fragment(&self) -> Result<(), LogicError> {
        if !self.is_quantifier_free() {
            return Err(LogicError::UnsupportedFragment {
                found: "quantifier",
            });
        }
        if self.has_arithmetic() {
            return Err(LogicError::UnsupportedFragment {
                found: "arithmetic",
            });
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut binders = Vec::new();
        self.expr.fmt_prec(f, 0, &mut binders)
    }
}

/// The structure domain `[N]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Universe(pub u64);

impl Universe {
    fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s <= self.0 {
            s
        } else {
            1
        }
    }

    fn mul(self, a: u64, b: u64) -> u64 {
        match a.checked_mul(b) {
            Some(p) if p <= self.0 => p,
            _ => 1,
        }
    }
}

/// Evaluates `formula` in the capped structure on `[N]` under the given
/// free-variable assignment (one value per `x1..x2k`, all in `[N]`).
pub fn eval(formula: &Formula, universe: Universe, assign: &[u64]) -> Result<bool, LogicError> {
    if assign.len() != formula.arity() {
        return Err(LogicError::ArityMismatch {
            want: formula.arity(),
            got: assign.len(),
        });
    }
    let n = universe.0;
    for &v in assign {
        if v == 0 || v > n {
            return Err(LogicError::ValueOutOfUniverse { value: v, n });
        }
    }
    let mut bound = Vec::new();
    Ok(eval_expr(&formula.expr, universe, assign, &mut bound))
}

fn eval_term(t: &Term, u: Universe, assign: &[u64], bound: &[u64]) -> u64 {
    match t {
        Term::Var(Var::Free(i)) => assign[i - 1],
        Term::Var(Var::Bound(d)) => bound[bound.len() - 1 - d],
        Term::Add(a, b) => u.add(
            eval_term(a, u, assign, bound),
            eval_term(b, u, assign, bound),
        ),
        Term::Mul(a, b) => u.mul(
            eval_term(a, u, assign, bound),
            eval_term(b, u, assign, bound),
        ),
    }
}

fn eval_expr(e: &Expr, u: Universe, assign: &[u64], bound: &mut Vec<u64>) -> bool {
    match e {
        Expr::Atom(a, rel, b) => {
            let (va, vb) = (
                eval_term(a, u, assign, bound),
                eval_term(b, u, assign, bound),
            );
            match rel {
                Rel::Lt => va < vb,
                Rel::Eq => va == vb,
            }
        }
        Expr::Not(x) => !eval_expr(x, u, assign, bound),
        Expr::And(a, b) => eval_expr(a, u, assign, bound) && eval_expr(b, u, assign, bound),
        Expr::Or(a, b) => eval_expr(a, u, assign, bound) || eval_expr(b, u, assign, bound),
        Expr::Exists(_, x) => (1..=u.0).any(|v| {
            bound.push(v);
            let r = eval_expr(x, u, assign, bound);
            bound.pop();
            r
        }),
        Expr::Forall(_, x) => (1..=u.0).all(|v| {
            bound.push(v);
            let r = eval_expr(x, u, assign, bound);
            bound.pop();
            r
        }),
    }
}

// ---------------------------------------------------------------------------
// Normal forms for the quantifier-free order fragment
// ---------------------------------------------------------------------------

/// Rewrites a quantifier-free order formula into an equivalent
/// negation-free one: `!(a = b)` becomes `a < b | b < a` and `!(a < b)`
/// becomes `b < a | a = b`.
pub fn to_nnf_lt(formula: &Formula) -> Result<Formula, LogicError> {
    formula.require_order_fragment()?;
    fn go(e: &Expr, neg: bool) -> Expr {
        match e {
            Expr::Atom(a, rel, b) => {
                if !neg {
                    e.clone()
                } else {
                    match rel {
                        Rel::Lt => Expr::Atom(b.clone(), Rel::Lt, a.clone())
                            .or(Expr::Atom(a.clone(), Rel::Eq, b.clone())),
                        Rel::Eq => Expr::Atom(a.clone(), Rel::Lt, b.clone())
                            .or(Expr::Atom(b.clone(), Rel::Lt, a.clone())),
                    }
                }
            }
            Expr::Not(x) => go(x, !neg),
            Expr::And(a, b) => {
                if neg {
                    go(a, true).or(go(b, true))
                } else {
                    go(a, false).and(go(b, false))
                }
            }
            Expr::Or(a, b) => {
                if neg {
                    go(a, true).and(go(b, true))
                } else {
                    go(a, false).or(go(b, false))
                }
            }
            Expr::Exists(..) | Expr::Forall(..) => unreachable!("fragment checked"),
        }
    }
    Ok(Formula {
        arity: formula.arity(),
        expr: go(&formula.expr, false),
    })
}

/// One atomic order constraint between variable positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClauseAtom {
    pub left: usize,
    pub rel: Rel,
    pub right: usize,
}

impl ClauseAtom {
    pub fn lt(left: usize, right: usize) -> ClauseAtom {
        ClauseAtom {
            left,
            rel: Rel::Lt,
            right,
        }
    }

    pub fn eq(left: usize, right: usize) -> ClauseAtom {
        // Equality is symmetric; store the smaller index first.
        ClauseAtom {
            left: left.min(right),
            rel: Rel::Eq,
            right: left.max(right),
        }
    }
}

impl fmt::Display for ClauseAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{} {} x{}", self.left, self.rel, self.right)
    }
}

/// Conjunction of order atoms over variable positions `1..=arity`. An
/// empty atom list is the always-true clause.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause {
    pub arity: usize,
    pub atoms: Vec<ClauseAtom>,
}

impl Clause {
    pub fn new(arity: usize, mut atoms: Vec<ClauseAtom>) -> Clause {
        atoms.sort();
        atoms.dedup();
        Clause { arity, atoms }
    }

    /// The clause as a formula: the conjunction of its atoms, or `x1 = x1`
    /// if empty.
    pub fn to_formula(&self) -> Formula {
        let exprs: Vec<Expr> = self
            .atoms
            .iter()
            .map(|a| match a.rel {
                Rel::Lt => Expr::lt(a.left, a.right),
                Rel::Eq => Expr::eq(a.left, a.right),
            })
            .collect();
        let expr = exprs
            .into_iter()
            .reduce(Expr::and)
            .unwrap_or_else(|| Expr::eq(1, 1));
        Formula::with_arity(expr, self.arity).expect("clause atoms stay within arity")
    }

    /// Does the assignment satisfy every atom?
    pub fn satisfied_by(&self, values: &[u64]) -> bool {
        self.atoms.iter().all(|a| match a.rel {
            Rel::Lt => values[a.left - 1] < values[a.right - 1],
            Rel::Eq => values[a.left - 1] == values[a.right - 1],
        })
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return f.write_str("true");
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// Satisfiability over the naturals: merge equality classes, then demand
/// no `<` atom inside a class and no cycle among classes.
pub fn clause_satisfiable(clause: &Clause) -> bool {
    let m = clause.arity;
    let mut parent: Vec<usize> = (0..=m).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = x;
        while parent[c] != r {
            let next = parent[c];
            parent[c] = r;
            c = next;
        }
        r
    }
    for a in &clause.atoms {
        if a.rel == Rel::Eq {
            let (ra, rb) = (find(&mut parent, a.left), find(&mut parent, a.right));
            parent[ra] = rb;
        }
    }
    // Lifted strict-order graph on class representatives.
    let mut arcs: BTreeSet<(usize, usize)> = BTreeSet::new();
    for a in &clause.atoms {
        if a.rel == Rel::Lt {
            let (ra, rb) = (find(&mut parent, a.left), find(&mut parent, a.right));
            if ra == rb {
                return false;
            }
            arcs.insert((ra, rb));
        }
    }
    is_acyclic(m, &arcs)
}

/// DFS cycle check on a digraph over `1..=m`.
pub(crate) fn is_acyclic(m: usize, arcs: &BTreeSet<(usize, usize)>) -> bool {
    let mut adj = vec![Vec::new(); m + 1];
    for &(a, b) in arcs {
        adj[a].push(b);
    }
    // 0 = unseen, 1 = active, 2 = done
    let mut state = vec![0u8; m + 1];
    for start in 1..=m {
        if state[start] != 0 {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        state[start] = 1;
        while let Some(&mut (v, ref mut idx)) = stack.last_mut() {
            if *idx < adj[v].len() {
                let w = adj[v][*idx];
                *idx += 1;
                match state[w] {
                    0 => {
                        state[w] = 1;
                        stack.push((w, 0));
                    }
                    1 => return false,
                    _ => {}
                }
            } else {
                state[v] = 2;
                stack.pop();
            }
        }
    }
    true
}

/// Expands a negation-free quantifier-free order formula into its
/// disjunctive normal form, dropping unsatisfiable clauses. The
/// disjunction of the result is equivalent to the input.
pub fn to_dnf(formula: &Formula) -> Result<Vec<Clause>, LogicError> {
    formula.require_order_fragment()?;
    fn go(e: &Expr) -> Result<Vec<Vec<ClauseAtom>>, LogicError> {
        match e {
            Expr::Atom(a, rel, b) => {
                let (Term::Var(Var::Free(i)), Term::Var(Var::Free(j))) = (a, b) else {
                    unreachable!("fragment checked");
                };
                let atom = match rel {
                    Rel::Lt => ClauseAtom::lt(*i, *j),
                    Rel::Eq => ClauseAtom::eq(*i, *j),
                };
                Ok(vec![vec![atom]])
            }
            Expr::Or(a, b) => {
                let mut va = go(a)?;
                va.extend(go(b)?);
                if va.len() > DNF_CLAUSE_BUDGET {
                    return Err(LogicError::DnfBudget(DNF_CLAUSE_BUDGET));
                }
                Ok(va)
            }
            Expr::And(a, b) => {
                let va = go(a)?;
                let vb = go(b)?;
                if va.len().saturating_mul(vb.len()) > DNF_CLAUSE_BUDGET {
                    return Err(LogicError::DnfBudget(DNF_CLAUSE_BUDGET));
                }
                let mut out = Vec::with_capacity(va.len() * vb.len());
                for ca in &va {
                    for cb in &vb {
                        let mut c = ca.clone();
                        c.extend(cb.iter().copied());
                        out.push(c);
                    }
                }
                Ok(out)
            }
            Expr::Not(_) => Err(LogicError::UnsupportedFragment { found: "negation" }),
            Expr::Exists(..) | Expr::Forall(..) => unreachable!("fragment checked"),
        }
    }
    let raw = go(&formula.expr)?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for atoms in raw {
        let mut clause = Clause::new(formula.arity(), atoms);
        // x = x atoms are vacuous; x < x makes the clause unsatisfiable
        // and is caught by the satisfiability filter.
        clause
            .atoms
            .retain(|a| !(a.rel == Rel::Eq && a.left == a.right));
        if clause_satisfiable(&clause) && seen.insert(clause.clone()) {
            out.push(clause);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Weak orders
// ---------------------------------------------------------------------------

/// An ordered set partition of positions `1..=m`: the complete semantic
/// invariant of a tuple under order comparisons. Positions in one block
/// carry equal values; earlier blocks carry strictly smaller values.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WeakOrder {
    blocks: Vec<Vec<usize>>,
}

impl WeakOrder {
    /// The weak order induced by a value tuple.
    pub fn of_values(values: &[u64]) -> WeakOrder {
        let mut distinct: Vec<u64> = values.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let blocks = distinct
            .iter()
            .map(|v| {
                (1..=values.len())
                    .filter(|&p| values[p - 1] == *v)
                    .collect()
            })
            .collect();
        WeakOrder { blocks }
    }

    /// Builds from explicit blocks after validating they partition `1..=m`
    /// with `m` the total position count.
    pub fn from_blocks(blocks: Vec<Vec<usize>>) -> Option<WeakOrder> {
        let m: usize = blocks.iter().map(Vec::len).sum();
        let mut seen = vec![false; m + 1];
        for b in &blocks {
            if b.is_empty() {
                return None;
            }
            for &p in b {
                if p == 0 || p > m || seen[p] {
                    return None;
                }
                seen[p] = true;
            }
        }
        let blocks = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        Some(WeakOrder { blocks })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn position_count(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// 0-based block index of a position.
    pub fn rank(&self, pos: usize) -> usize {
        self.blocks
            .iter()
            .position(|b| b.contains(&pos))
            .expect("position within weak order")
    }

    /// The canonical tuple inducing this weak order: position `p` gets its
    /// block index plus one.
    pub fn representative(&self) -> Vec<u64> {
        let m = self.position_count();
        let mut vals = vec![0u64; m];
        for (r, block) in self.blocks.iter().enumerate() {
            for &p in block {
                vals[p - 1] = r as u64 + 1;
            }
        }
        vals
    }
}

impl fmt::Display for WeakOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for block in &self.blocks {
            f.write_str("{")?;
            for (i, p) in block.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{p}")?;
            }
            f.write_str("}")?;
        }
        Ok(())
    }
}

/// All weak orders (ordered set partitions) of `1..=m`, each exactly once,
/// in a deterministic order.
pub fn weak_orders(m: usize) -> Result<Vec<WeakOrder>, LogicError> {
    if m == 0 || m > WEAK_ORDER_BUDGET {
        return Err(LogicError::WeakOrderBudget {
            m,
            max: WEAK_ORDER_BUDGET,
        });
    }
    let mut out = Vec::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let all: Vec<usize> = (1..=m).collect();
    fn rec(rest: &[usize], blocks: &mut Vec<Vec<usize>>, out: &mut Vec<WeakOrder>) {
        if rest.is_empty() {
            out.push(WeakOrder {
                blocks: blocks.clone(),
            });
            return;
        }
        for mask in 1u32..(1 << rest.len()) {
            let block: Vec<usize> = rest
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &p)| p)
                .collect();
            let remaining: Vec<usize> = rest
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 0)
                .map(|(_, &p)| p)
                .collect();
            blocks.push(block);
            rec(&remaining, blocks, out);
            blocks.pop();
        }
    }
    rec(&all, &mut blocks, &mut out);
    Ok(out)
}

/// The set of weak orders on the formula's `2k` positions whose inducing
/// tuples satisfy it. Defined for the quantifier-free order fragment,
/// where satisfaction depends on the weak order alone, so this is a
/// complete extensional canonical form.
pub fn semantic_signature(formula: &Formula) -> Result<BTreeSet<WeakOrder>, LogicError> {
    formula.require_order_fragment()?;
    let m = formula.arity();
    let universe = Universe(m as u64);
    let mut sig = BTreeSet::new();
    for w in weak_orders(m)? {
        if eval(formula, universe, &w.representative())? {
            sig.insert(w);
        }
    }
    Ok(sig)
}

/// Semantic equivalence of two quantifier-free order formulas with the
/// same free-variable count: signature equality.
pub fn equivalent(a: &Formula, b: &Formula) -> Result<bool, LogicError> {
    if a.arity() != b.arity() {
        return Err(LogicError::MismatchedArity(a.arity(), b.arity()));
    }
    Ok(semantic_signature(a)? == semantic_signature(b)?)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Lt,
    Le,
    EqTok,
    Ne,
    Gt,
    Ge,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Iff,
    Plus,
    Star,
    LParen,
    RParen,
    Dot,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::EqTok => "=",
            Tok::Ne => "!=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Bang => "!",
            Tok::Amp => "&",
            Tok::Pipe => "|",
            Tok::Arrow => "->",
            Tok::Iff => "<->",
            Tok::Plus => "+",
            Tok::Star => "*",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Dot => ".",
        };
        write!(f, "`{s}`")
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let (mut pos, mut line, mut col) = (0usize, 1usize, 1usize);
    while pos < bytes.len() {
        let b = bytes[pos];
        match b {
            b' ' | b'\t' | b'\r' => {
                pos += 1;
                col += 1;
                continue;
            }
            b'\n' => {
                pos += 1;
                line += 1;
                col = 1;
                continue;
            }
            b'A'..=b'Z' | b'a'..=b'z' | b'_' => {
                let start = pos;
                let tcol = col;
                while pos < bytes.len()
                    && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_')
                {
                    pos += 1;
                    col += 1;
                }
                let word = std::str::from_utf8(&bytes[start..pos]).unwrap();
                toks.push((Tok::Ident(word.to_string()), line, tcol));
                continue;
            }
            _ => {}
        }
        let two = bytes.get(pos + 1).copied();
        let three = bytes.get(pos + 2).copied();
        let (tok, width) = match (b, two, three) {
            (b'(', ..) => (Tok::LParen, 1),
            (b')', ..) => (Tok::RParen, 1),
            (b'.', ..) => (Tok::Dot, 1),
            (b'+', ..) => (Tok::Plus, 1),
            (b'*', ..) => (Tok::Star, 1),
            (b'&', ..) => (Tok::Amp, 1),
            (b'|', ..) => (Tok::Pipe, 1),
            (b'=', ..) => (Tok::EqTok, 1),
            (b'!', Some(b'='), _) => (Tok::Ne, 2),
            (b'!', ..) => (Tok::Bang, 1),
            (b'<', Some(b'-'), Some(b'>')) => (Tok::Iff, 3),
            (b'<', Some(b'='), _) => (Tok::Le, 2),
            (b'<', ..) => (Tok::Lt, 1),
            (b'>', Some(b'='), _) => (Tok::Ge, 2),
            (b'>', ..) => (Tok::Gt, 1),
            (b'-', Some(b'>'), _) => (Tok::Arrow, 2),
            _ => {
                return Err(ParseError {
                    line,
                    col,
                    kind: ParseErrorKind::BadByte(b),
                })
            }
        };
        toks.push((tok, line, col));
        pos += width;
        col += width;
    }
    Ok(toks)
}

/// Free-variable reference before alias resolution.
#[derive(Debug, Clone, Copy)]
enum PreVar {
    X(usize),
    Y(usize),
}

/// Term over pre-resolution variables.
#[derive(Clone)]
enum PTerm {
    Free(PreVar),
    Bound(usize),
    Add(Box<PTerm>, Box<PTerm>),
    Mul(Box<PTerm>, Box<PTerm>),
}

/// Expression over pre-resolution variables.
#[derive(Clone)]
enum PExpr {
    Atom(PTerm, Rel, PTerm),
    Not(Box<PExpr>),
    And(Box<PExpr>, Box<PExpr>),
    Or(Box<PExpr>, Box<PExpr>),
    Exists(String, Box<PExpr>),
    Forall(String, Box<PExpr>),
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    i: usize,
    scopes: Vec<String>,
    max_x: usize,
    max_y: usize,
}

impl Parser {
    fn err_here(&self, kind: ParseErrorKind) -> ParseError {
        let (line, col) = self
            .toks
            .get(self.i)
            .map(|&(_, l, c)| (l, c))
            .or_else(|| self.toks.last().map(|&(_, l, c)| (l, c + 1)))
            .unwrap_or((1, 1));
        ParseError { line, col, kind }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(t, _, _)| t)
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == tok => {
                self.i += 1;
                Ok(())
            }
            Some(t) => {
                let found = t.to_string();
                Err(self.err_here(ParseErrorKind::Unexpected {
                    expected: tok.to_string(),
                    found,
                }))
            }
            None => Err(self.err_here(ParseErrorKind::UnexpectedEnd)),
        }
    }

    // formula := implies ('<->' implies)*
    fn formula(&mut self) -> Result<PExpr, ParseError> {
        let mut lhs = self.implies()?;
        while self.peek() == Some(&Tok::Iff) {
            self.i += 1;
            let rhs = self.implies()?;
            // p <-> q  =>  (!p | q) & (!q | p)
            let (p2, q2) = (lhs.clone(), rhs.clone());
            lhs = PExpr::And(
                Box::new(PExpr::Or(Box::new(PExpr::Not(Box::new(lhs))), Box::new(rhs))),
                Box::new(PExpr::Or(Box::new(PExpr::Not(Box::new(q2))), Box::new(p2))),
            );
        }
        Ok(lhs)
    }

    // implies := or ('->' implies)?   (right associative)
    fn implies(&mut self) -> Result<PExpr, ParseError> {
        let lhs = self.or_expr()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.i += 1;
            let rhs = self.implies()?;
            return Ok(PExpr::Or(
                Box::new(PExpr::Not(Box::new(lhs))),
                Box::new(rhs),
            ));
        }
        Ok(lhs)
    }

    fn or_expr(&mut self) -> Result<PExpr, ParseError> {
        let mut lhs = self.and_expr()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.i += 1;
            let rhs = self.and_expr()?;
            lhs = PExpr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<PExpr, ParseError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::Amp) {
            self.i += 1;
            let rhs = self.unary()?;
            lhs = PExpr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<PExpr, ParseError> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.i += 1;
                Ok(PExpr::Not(Box::new(self.unary()?)))
            }
            Some(Tok::Ident(w)) if w == "exists" || w == "forall" => {
                let exists = w == "exists";
                self.i += 1;
                let name = match self.peek().cloned() {
                    Some(Tok::Ident(n)) => {
                        self.i += 1;
                        n
                    }
                    Some(t) => {
                        return Err(self.err_here(ParseErrorKind::Unexpected {
                            expected: "variable name".into(),
                            found: t.to_string(),
                        }))
                    }
                    None => return Err(self.err_here(ParseErrorKind::UnexpectedEnd)),
                };
                self.expect(Tok::Dot)?;
                self.scopes.push(name.clone());
                // Quantifier body extends as far right as possible.
                let body = self.formula();
                self.scopes.pop();
                let body = body?;
                Ok(if exists {
                    PExpr::Exists(name, Box::new(body))
                } else {
                    PExpr::Forall(name, Box::new(body))
                })
            }
            Some(Tok::LParen) => {
                // Could open a formula or a parenthesized term; try the
                // formula reading first and fall back to the atom.
                let save = self.i;
                self.i += 1;
                let attempt = self.formula().and_then(|e| {
                    self.expect(Tok::RParen)?;
                    Ok(e)
                });
                match attempt {
                    Ok(e) => Ok(e),
                    Err(_) => {
                        self.i = save;
                        self.atom()
                    }
                }
            }
            _ => self.atom(),
        }
    }

    // atom := term rel term, with sugar relations desugared here
    fn atom(&mut self) -> Result<PExpr, ParseError> {
        let a = self.term()?;
        let rel = match self.peek() {
            Some(
                t @ (Tok::Lt | Tok::Le | Tok::EqTok | Tok::Ne | Tok::Gt | Tok::Ge),
            ) => t.clone(),
            Some(t) => {
                let found = t.to_string();
                return Err(self.err_here(ParseErrorKind::Unexpected {
                    expected: "relation".into(),
                    found,
                }));
            }
            None => return Err(self.err_here(ParseErrorKind::UnexpectedEnd)),
        };
        self.i += 1;
        let b = self.term()?;
        let atom = |x, r, y| PExpr::Atom(x, r, y);
        Ok(match rel {
            Tok::Lt => atom(a, Rel::Lt, b),
            Tok::EqTok => atom(a, Rel::Eq, b),
            Tok::Gt => atom(b, Rel::Lt, a),
            Tok::Ne => PExpr::Not(Box::new(atom(a, Rel::Eq, b))),
            Tok::Le => {
                let (a2, b2) = (a.clone(), b.clone());
                PExpr::Or(
                    Box::new(atom(a, Rel::Lt, b)),
                    Box::new(atom(a2, Rel::Eq, b2)),
                )
            }
            Tok::Ge => {
                let (a2, b2) = (a.clone(), b.clone());
                PExpr::Or(
                    Box::new(atom(b, Rel::Lt, a)),
                    Box::new(atom(a2, Rel::Eq, b2)),
                )
            }
            _ => unreachable!(),
        })
    }

    // term := product ('+' product)*; product := primary ('*' primary)*
    fn term(&mut self) -> Result<PTerm, ParseError> {
        let mut lhs = self.product()?;
        while self.peek() == Some(&Tok::Plus) {
            self.i += 1;
            let rhs = self.product()?;
            lhs = PTerm::Add(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<PTerm, ParseError> {
        let mut lhs = self.primary()?;
        while self.peek() == Some(&Tok::Star) {
            self.i += 1;
            let rhs = self.primary()?;
            lhs = PTerm::Mul(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn primary(&mut self) -> Result<PTerm, ParseError> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.i += 1;
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Some(Tok::Ident(name)) => {
                // Innermost binder wins; otherwise the name must be an
                // x- or y-indexed free variable.
                if let Some(depth) = self.scopes.iter().rev().position(|s| *s == name) {
                    self.i += 1;
                    return Ok(PTerm::Bound(depth));
                }
                let var = parse_var_name(&name)
                    .ok_or_else(|| self.err_here(ParseErrorKind::UnknownIdentifier(name.clone())))?;
                match var {
                    Ok(v) => {
                        match v {
                            PreVar::X(i) => self.max_x = self.max_x.max(i),
                            PreVar::Y(i) => self.max_y = self.max_y.max(i),
                        }
                        self.i += 1;
                        Ok(PTerm::Free(v))
                    }
                    Err(()) => Err(self.err_here(ParseErrorKind::BadVariableIndex(name))),
                }
            }
            Some(t) => Err(self.err_here(ParseErrorKind::Unexpected {
                expected: "variable or `(`".into(),
                found: t.to_string(),
            })),
            None => Err(self.err_here(ParseErrorKind::UnexpectedEnd)),
        }
    }
}

/// `None`: not a variable-shaped name. `Some(Err(()))`: variable-shaped
/// but with a bad index (e.g. `x0`).
fn parse_var_name(name: &str) -> Option<Result<PreVar, ()>> {
    if name.len() < 2 {
        return None;
    }
    let (head, digits) = name.split_at(1);
    if !matches!(head, "x" | "y") || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let idx: usize = match digits.parse() {
        Ok(i) => i,
        Err(_) => return Some(Err(())),
    };
    if idx == 0 {
        Some(Err(()))
    } else if head == "x" {
        Some(Ok(PreVar::X(idx)))
    } else {
        Some(Ok(PreVar::Y(idx)))
    }
}

fn resolve(e: &PExpr, k: usize) -> Expr {
    fn term(t: &PTerm, k: usize) -> Term {
        match t {
            PTerm::Free(PreVar::X(i)) => Term::free(*i),
            PTerm::Free(PreVar::Y(j)) => Term::free(k + j),
            PTerm::Bound(d) => Term::Var(Var::Bound(*d)),
            PTerm::Add(a, b) => Term::Add(Box::new(term(a, k)), Box::new(term(b, k))),
            PTerm::Mul(a, b) => Term::Mul(Box::new(term(a, k)), Box::new(term(b, k))),
        }
    }
    match e {
        PExpr::Atom(a, r, b) => Expr::Atom(term(a, k), *r, term(b, k)),
        PExpr::Not(x) => Expr::Not(Box::new(resolve(x, k))),
        PExpr::And(a, b) => Expr::And(Box::new(resolve(a, k)), Box::new(resolve(b, k))),
        PExpr::Or(a, b) => Expr::Or(Box::new(resolve(a, k)), Box::new(resolve(b, k))),
        PExpr::Exists(n, x) => Expr::Exists(n.clone(), Box::new(resolve(x, k))),
        PExpr::Forall(n, x) => Expr::Forall(n.clone(), Box::new(resolve(x, k))),
    }
}

/// Parses the formula DSL, inferring the smallest admissible arity.
///
/// Relations `< <= = != > >=` between arithmetic terms over variables,
/// connectives `! & | -> <->`, quantifiers `exists v. ...` /
/// `forall v. ...` binding to the end of the enclosing scope. Free
/// variables are `x1..x2k`; `y1..yk` alias the second half
/// `x(k+1)..x2k`.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    parse_formula_arity(text, None)
}

/// Parses with an explicitly declared free-variable count.
pub fn parse_formula_arity(text: &str, arity: Option<usize>) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        i: 0,
        scopes: Vec::new(),
        max_x: 0,
        max_y: 0,
    };
    let pexpr = p.formula()?;
    if p.i < p.toks.len() {
        let found = p.toks[p.i].0.to_string();
        return Err(p.err_here(ParseErrorKind::Unexpected {
            expected: "end of input".into(),
            found,
        }));
    }
    let err0 = |kind| ParseError {
        line: 1,
        col: 1,
        kind,
    };
    let k = match arity {
        Some(a) => {
            if a == 0 {
                return Err(err0(ParseErrorKind::NoFreeVariables));
            }
            if a % 2 != 0 {
                return Err(err0(ParseErrorKind::OddFreeVarCount(a)));
            }
            let k = a / 2;
            if p.max_x > a || p.max_y > k {
                let needed = p.max_x.max(if p.max_y > 0 { k + p.max_y } else { 0 });
                return Err(err0(ParseErrorKind::ArityTooSmall {
                    declared: a,
                    needed,
                }));
            }
            k
        }
        None => {
            let k = p.max_y.max(p.max_x.div_ceil(2));
            if k == 0 {
                return Err(err0(ParseErrorKind::NoFreeVariables));
            }
            k
        }
    };
    let expr = resolve(&pexpr, k);
    Formula::with_arity(expr, 2 * k)
}
