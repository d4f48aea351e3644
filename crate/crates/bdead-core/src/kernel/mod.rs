//! A reifying finite-domain constraint solver for machine predicates.
//!
//! Every atomic predicate (comparison, equality, membership) is associated
//! with a three-valued *reification variable*; syntactically identical atoms
//! share one variable through a normalizing key, so complementary constraints
//! like `x > y` and `y >= x` collide immediately instead of surviving until
//! enumeration. Connectives become propagation rules over those variables,
//! negation is a sign flip, and quantifiers over small finite ranges expand
//! into plain conjunctions/disjunctions while wider ones suspend until their
//! free variables are fixed.
//!
//! Solving proceeds in three phases: [`Store::post`] decomposes predicates
//! into the network, [`Store::propagate`] runs domain and truth propagation
//! to a fixpoint, and [`Store::search`] enumerates the remaining choices
//! depth-first, always trying the alternative with the smallest estimated
//! solution count first. Any satisfying assignment is re-checked by the
//! ground evaluator before it is reported.

mod domain;
mod propagate;
mod search;
mod store;
mod universe;

pub use domain::{BoolDomain, Flag, IntDomain, SetDomain, SortDomain};
pub use store::Store;

use crate::model::{EvalError, Pred, SortDecl, Valuation};

/// Three-valued truth: the state of one reification variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Truth {
    False,
    True,
    Unknown,
}

impl Truth {
    pub fn from_bool(b: bool) -> Truth {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }

    pub fn negate(self) -> Truth {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Truth::True => Some(true),
            Truth::False => Some(false),
            Truth::Unknown => None,
        }
    }

    pub fn is_known(self) -> bool {
        self != Truth::Unknown
    }
}

/// Resource limits for one solve: a wall-clock deadline and/or a cap on the
/// number of enumeration decisions. `Budget::none()` means unlimited.
#[derive(Debug, Clone, Copy, Default)]
pub struct Budget {
    pub deadline: Option<std::time::Instant>,
    pub max_decisions: Option<u64>,
}

impl Budget {
    pub fn none() -> Budget {
        Budget::default()
    }

    /// A wall-clock budget starting now.
    pub fn timeout(d: std::time::Duration) -> Budget {
        Budget {
            deadline: Some(std::time::Instant::now() + d),
            max_decisions: None,
        }
    }

    pub fn exhausted(&self, decisions: u64) -> bool {
        if let Some(max) = self.max_decisions {
            if decisions >= max {
                return true;
            }
        }
        if let Some(deadline) = self.deadline {
            if std::time::Instant::now() >= deadline {
                return true;
            }
        }
        false
    }
}

/// Tuning knobs for one solver instance.
#[derive(Debug, Clone, Copy)]
pub struct SolveConfig {
    /// Global integer bound: every integer domain is clipped to
    /// `-maxint ..= maxint`. Answers that leaned on the clip are flagged.
    pub maxint: i64,
    /// Quantifiers whose binder range has at most this many candidates are
    /// expanded into conjunctions/disjunctions; wider ones suspend.
    pub expand_threshold: usize,
    pub budget: Budget,
    /// Record one line per propagation event and decision.
    pub trace: bool,
}

impl Default for SolveConfig {
    fn default() -> SolveConfig {
        SolveConfig {
            maxint: 1023,
            expand_threshold: 64,
            budget: Budget::none(),
            trace: false,
        }
    }
}

/// Why the solver stopped without a definite answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnknownCause {
    /// The time or decision budget ran out.
    Budget,
    /// Some construct exceeded the finite representation (set universe or
    /// quantifier range too large to enumerate).
    TooWide(String),
    /// A found assignment failed the independent evaluator re-check; reported
    /// instead of a wrong `Sat`.
    Validation,
}

impl std::fmt::Display for UnknownCause {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UnknownCause::Budget => write!(f, "budget exhausted"),
            UnknownCause::TooWide(what) => write!(f, "{what}"),
            UnknownCause::Validation => write!(f, "candidate solution failed validation"),
        }
    }
}

/// Result of one solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    /// A total assignment satisfying every posted predicate, re-checked by
    /// the ground evaluator.
    Sat(Valuation),
    /// No assignment exists (within the clipped integer bounds).
    Unsat,
    Unknown(UnknownCause),
    /// Evaluating a posted predicate is not well-defined (division or modulo
    /// by zero) no matter how the remaining choices are made.
    WdError(EvalError),
}

/// Counters reported alongside an outcome.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Enumeration decisions: every alternative tried at every choice point.
    pub decisions: u64,
    /// True when any integer domain or set universe was clipped to the
    /// global bound, so "no solution" only means "none within bounds".
    pub clipped: bool,
}

/// Internal control flow: why posting or propagation stopped early.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Halt {
    /// The store is inconsistent (normal failure; search backtracks).
    Conflict,
    /// A well-definedness error is unavoidable.
    Wd(EvalError),
    /// A construct exceeded the finite representation.
    TooWide(String),
    /// The budget ran out mid-propagation.
    Budget,
}

/// Post a predicate into a fresh store, propagate, and enumerate.
///
/// `scope` declares the free variables of `p` with their types; `sorts`
/// supplies the enumerated carrier sets. Set-variable universes are seeded
/// from ground bounds found among the top-level conjuncts of `p` where
/// possible. The result is deterministic for identical inputs and budget.
pub fn solve(
    p: &Pred,
    scope: &[(crate::model::Ident, crate::model::Ty)],
    sorts: &[SortDecl],
    cfg: SolveConfig,
) -> (SolveOutcome, SolveStats) {
    let mut store = match Store::new(scope, sorts, cfg, Some(p)) {
        Ok(s) => s,
        Err(halt) => return (halt_outcome(halt, true), SolveStats::default()),
    };
    if let Err(halt) = store.post(p, true) {
        let at_root = true;
        return (halt_outcome(halt, at_root), store.stats());
    }
    let outcome = store.search();
    (outcome, store.stats())
}

/// Like [`solve`], but with tracing forced on, returning the propagation and
/// decision log alongside the outcome.
pub fn solve_traced(
    p: &Pred,
    scope: &[(crate::model::Ident, crate::model::Ty)],
    sorts: &[SortDecl],
    cfg: SolveConfig,
) -> (SolveOutcome, SolveStats, Vec<String>) {
    let cfg = SolveConfig { trace: true, ..cfg };
    let mut store = match Store::new(scope, sorts, cfg, Some(p)) {
        Ok(s) => s,
        Err(halt) => return (halt_outcome(halt, true), SolveStats::default(), Vec::new()),
    };
    if let Err(halt) = store.post(p, true) {
        let lines = store.trace_lines().to_vec();
        return (halt_outcome(halt, true), store.stats(), lines);
    }
    let outcome = store.search();
    let lines = store.trace_lines().to_vec();
    (outcome, store.stats(), lines)
}

/// Enumerate up to `cap` satisfying assignments. The returned outcome tells
/// how the enumeration ended: `Unsat` means the search space was exhausted
/// (every solution is in the vector), `Sat` means the cap was reached with
/// possibly more solutions left, and `Unknown`/`WdError` abort as in
/// [`solve`].
pub fn solve_all(
    p: &Pred,
    scope: &[(crate::model::Ident, crate::model::Ty)],
    sorts: &[SortDecl],
    cfg: SolveConfig,
    cap: usize,
) -> (Vec<Valuation>, SolveOutcome, SolveStats) {
    let mut store = match Store::new(scope, sorts, cfg, Some(p)) {
        Ok(s) => s,
        Err(halt) => return (Vec::new(), halt_outcome(halt, true), SolveStats::default()),
    };
    if let Err(halt) = store.post(p, true) {
        return (Vec::new(), halt_outcome(halt, true), store.stats());
    }
    let mut sink = Vec::new();
    let outcome = store.search_core(Some(cap), &mut sink);
    (sink, outcome, store.stats())
}

/// Map an early halt (during store construction or posting) onto the public
/// outcome. At the root a conflict means the problem itself is unsatisfiable.
pub(crate) fn halt_outcome(halt: Halt, at_root: bool) -> SolveOutcome {
    match halt {
        Halt::Conflict => {
            debug_assert!(at_root, "non-root conflicts are handled by search");
            SolveOutcome::Unsat
        }
        Halt::Wd(e) => SolveOutcome::WdError(e),
        Halt::TooWide(what) => SolveOutcome::Unknown(UnknownCause::TooWide(what)),
        Halt::Budget => SolveOutcome::Unknown(UnknownCause::Budget),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truth_negation_fixes_unknown() {
        assert_eq!(Truth::True.negate(), Truth::False);
        assert_eq!(Truth::False.negate(), Truth::True);
        assert_eq!(Truth::Unknown.negate(), Truth::Unknown);
    }

    #[test]
    fn budget_with_no_limits_never_exhausts() {
        assert!(!Budget::none().exhausted(u64::MAX));
    }

    #[test]
    fn decision_budget_is_a_hard_cap() {
        let b = Budget {
            deadline: None,
            max_decisions: Some(10),
        };
        assert!(!b.exhausted(9));
        assert!(b.exhausted(10));
    }
}
