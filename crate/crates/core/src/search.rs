//! Budget accounting shared by every exhaustive search in the crate.
//!
//! Searches never approximate: they end in a witness, a proven absence, or
//! an explicit budget overrun. [`Budget`] sets the limits, and the meter
//! threaded through a search charges work against them.

use serde::Serialize;

/// Limits for one search invocation.
///
/// `max_evals` counts decoder/formula evaluations (the unit the searches
/// in [`crate::schemes`] and [`crate::dags`] charge per adjacency test);
/// `max_enum` counts candidate graphs scanned by ordered enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub max_evals: u64,
    pub max_enum: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_evals: 100_000_000,
            max_enum: 1 << 20,
        }
    }
}

impl Budget {
    pub fn with_evals(max_evals: u64) -> Self {
        Budget {
            max_evals,
            ..Budget::default()
        }
    }

    pub fn meter(&self) -> Meter {
        Meter {
            evals_left: self.max_evals,
            enum_left: self.max_enum,
        }
    }
}

/// Mutable remaining-work counter for a single search.
#[derive(Debug, Clone)]
pub struct Meter {
    evals_left: u64,
    enum_left: u64,
}

impl Meter {
    /// Charges `n` evaluations; false once the budget is gone.
    pub fn charge_evals(&mut self, n: u64) -> bool {
        if self.evals_left < n {
            self.evals_left = 0;
            return false;
        }
        self.evals_left -= n;
        true
    }

    /// Charges one enumerated candidate; false once the budget is gone.
    pub fn charge_candidate(&mut self) -> bool {
        if self.enum_left == 0 {
            return false;
        }
        self.enum_left -= 1;
        true
    }

    pub fn exhausted(&self) -> bool {
        self.evals_left == 0 || self.enum_left == 0
    }
}

/// Three-valued result of a budgeted search.
///
/// `Absent` is a proof: the search space was exhausted. A search that gives
/// up reports `BudgetExceeded` instead, and callers must treat that as
/// unresolved rather than negative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome<W> {
    Witness(W),
    Absent,
    BudgetExceeded,
}

impl<W> SearchOutcome<W> {
    pub fn is_witness(&self) -> bool {
        matches!(self, SearchOutcome::Witness(_))
    }

    pub fn is_absent(&self) -> bool {
        matches!(self, SearchOutcome::Absent)
    }

    pub fn witness(self) -> Option<W> {
        match self {
            SearchOutcome::Witness(w) => Some(w),
            _ => None,
        }
    }

    pub fn map<T>(self, f: impl FnOnce(W) -> T) -> SearchOutcome<T> {
        match self {
            SearchOutcome::Witness(w) => SearchOutcome::Witness(f(w)),
            SearchOutcome::Absent => SearchOutcome::Absent,
            SearchOutcome::BudgetExceeded => SearchOutcome::BudgetExceeded,
        }
    }
}
