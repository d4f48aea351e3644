//! Depth-first search with chronological backtracking.
//!
//! Each choice point is a frame: a target (an undetermined variable or an
//! actionable suspended quantifier), the list of alternatives computed when
//! the frame was opened, and a trail mark. Trying an alternative counts as
//! one decision; exhausting a frame pops it and resumes the parent. Targets
//! are picked by smallest estimated solution count — current domain size for
//! variables, the static binder-range product for suspensions — with
//! variables preferred on ties, then declaration order.
//!
//! A total assignment is never trusted: the candidate is re-checked against
//! everything posted by the independent ground evaluator before being
//! reported as satisfying.

use crate::model::{Valuation, Value};
use crate::simplify::substitute;

use super::domain::Flag;
use super::store::{Dom, Store, SuspKind, VarId};
use super::{Halt, SolveOutcome, Truth, UnknownCause};

/// What a frame branches on.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Target {
    Var(VarId),
    Susp(usize),
}

/// One branching alternative.
#[derive(Debug, Clone)]
pub(crate) enum Alt {
    Int(i64),
    Bool(bool),
    SortIdx(u32),
    Flag(usize, Flag),
    /// Commit a quantifier instance: the witness (for a satisfied
    /// existential) or the counterexample (for a refuted universal).
    Instance(Value),
}

struct Frame {
    target: Target,
    alts: Vec<Alt>,
    next: usize,
    mark: usize,
}

impl Store {
    /// Search for one satisfying assignment.
    pub fn search(&mut self) -> SolveOutcome {
        let mut sink = Vec::new();
        self.search_core(None, &mut sink)
    }

    /// Exhaustive search collecting up to `cap` validated solutions into
    /// `sink`. The returned outcome reports how the enumeration ended:
    /// `Unsat` means the space was exhausted (every solution is in `sink`),
    /// `Sat` means the cap was hit, anything else aborted the enumeration.
    pub(crate) fn search_core(
        &mut self,
        cap: Option<usize>,
        sink: &mut Vec<Valuation>,
    ) -> SolveOutcome {
        if self.failed {
            return SolveOutcome::Unsat;
        }
        let mut frames: Vec<Frame> = Vec::new();
        loop {
            if self.cfg.budget.exhausted(self.decisions) {
                return SolveOutcome::Unknown(UnknownCause::Budget);
            }
            let step = match self.run_agenda() {
                Ok(()) => None,
                Err(halt) => Some(halt),
            };
            let step = match step {
                Some(halt) => Some(halt),
                None => match self.pick_target() {
                    Err(halt) => Some(halt),
                    Ok(Some((target, alts))) => {
                        let mark = self.trail_len();
                        frames.push(Frame {
                            target,
                            alts,
                            next: 0,
                            mark,
                        });
                        match self.advance(&mut frames) {
                            Ok(true) => continue,
                            Ok(false) => return SolveOutcome::Unsat,
                            Err(halt) => return fatal_outcome(halt),
                        }
                    }
                    Ok(None) => {
                        // Leaf: everything determined. Validate before
                        // reporting.
                        let val = self.valuation();
                        if !self.validate(&val) {
                            debug_assert!(
                                false,
                                "candidate assignment failed evaluator re-check: {val:?}"
                            );
                            return SolveOutcome::Unknown(UnknownCause::Validation);
                        }
                        match cap {
                            None => return SolveOutcome::Sat(val),
                            Some(c) => {
                                sink.push(val);
                                if sink.len() >= c {
                                    let last = sink.last().expect("just pushed").clone();
                                    return SolveOutcome::Sat(last);
                                }
                                // Keep enumerating: force a backtrack.
                                Some(Halt::Conflict)
                            }
                        }
                    }
                },
            };
            if let Some(halt) = step {
                match halt {
                    Halt::Conflict => match self.advance(&mut frames) {
                        Ok(true) => continue,
                        Ok(false) => return SolveOutcome::Unsat,
                        Err(h) => return fatal_outcome(h),
                    },
                    other => return fatal_outcome(other),
                }
            }
        }
    }

    /// Undo to the top frame's mark and apply its next untried alternative,
    /// popping exhausted frames. `Ok(false)` means the whole tree is
    /// exhausted.
    fn advance(&mut self, frames: &mut Vec<Frame>) -> Result<bool, Halt> {
        loop {
            if self.cfg.budget.exhausted(self.decisions) {
                return Err(Halt::Budget);
            }
            let Some(f) = frames.last_mut() else {
                return Ok(false);
            };
            let mark = f.mark;
            self.undo_to(mark);
            self.agenda.clear();
            if f.next >= f.alts.len() {
                frames.pop();
                continue;
            }
            let target = f.target;
            let alt = f.alts[f.next].clone();
            f.next += 1;
            self.decisions += 1;
            match self.apply_alt(target, &alt) {
                Ok(()) => return Ok(true),
                Err(Halt::Conflict) => continue,
                Err(fatal) => return Err(fatal),
            }
        }
    }

    /// Choose the next branching target with its alternatives, or `None` at
    /// a leaf. May itself detect a conflict (a satisfied existential whose
    /// candidate set has emptied out).
    #[allow(clippy::type_complexity)]
    fn pick_target(&mut self) -> Result<Option<(Target, Vec<Alt>)>, Halt> {
        let mut best_var: Option<(u64, VarId)> = None;
        for i in 0..self.vars.len() {
            let sz = self.vars[i].dom.size();
            if sz <= 1 {
                continue;
            }
            if best_var.is_none_or(|(e, _)| sz < e) {
                best_var = Some((sz, VarId(i)));
            }
        }
        let mut best_susp: Option<(u64, usize, Vec<Alt>)> = None;
        for i in 0..self.susps.len() {
            if self.susps[i].expanded {
                continue;
            }
            let SuspKind::Quant {
                exists,
                exact,
                ref static_cands,
                ..
            } = self.susps[i].kind
            else {
                continue;
            };
            let t = self.reifs[self.susps[i].rv.0].truth;
            let actionable = (exists && t == Truth::True)
                || (!exists && t == Truth::False && exact && static_cands.is_some());
            if !actionable {
                continue;
            }
            let est = self.susps[i].estimate;
            // Variables win ties; earlier suspensions win among suspensions.
            let beats_var = best_var.is_none_or(|(e, _)| est < e);
            let beats_susp = best_susp.as_ref().is_none_or(|(e, _, _)| est < *e);
            if !beats_var || !beats_susp {
                continue;
            }
            let cands = if exists {
                self.dynamic_candidates(i)?
            } else {
                static_cands.clone()
            };
            let Some(cands) = cands else {
                continue; // not enumerable here; grounding will decide it
            };
            if cands.is_empty() {
                // A satisfied existential with no remaining candidate value
                // (or a refuted universal over an empty range) cannot hold.
                return Err(Halt::Conflict);
            }
            let alts = cands.into_iter().map(Alt::Instance).collect();
            best_susp = Some((est, i, alts));
        }
        if let Some((est, i, alts)) = best_susp {
            if best_var.is_none_or(|(e, _)| est < e) {
                return Ok(Some((Target::Susp(i), alts)));
            }
        }
        let Some((_, v)) = best_var else {
            return Ok(None);
        };
        Ok(Some((Target::Var(v), self.var_alternatives(v))))
    }

    fn var_alternatives(&mut self, v: VarId) -> Vec<Alt> {
        match &self.vars[v.0].dom {
            Dom::Int(d) => {
                if d.lb == -self.cfg.maxint || d.ub == self.cfg.maxint {
                    // Enumerating a domain that rests on the global clip:
                    // outcomes depend on the artificial bound.
                    self.clipped = true;
                }
                d.values().map(Alt::Int).collect()
            }
            Dom::Bool(d) => {
                let mut alts = Vec::new();
                if d.can_false {
                    alts.push(Alt::Bool(false));
                }
                if d.can_true {
                    alts.push(Alt::Bool(true));
                }
                alts
            }
            Dom::Sort(d) => d.candidates.iter().map(|i| Alt::SortIdx(*i)).collect(),
            Dom::Set(d) => {
                let i = d.first_unknown().expect("unfixed set has an unknown flag");
                vec![Alt::Flag(i, Flag::Out), Alt::Flag(i, Flag::In)]
            }
        }
    }

    fn apply_alt(&mut self, target: Target, alt: &Alt) -> Result<(), Halt> {
        match (target, alt) {
            (Target::Var(v), Alt::Int(n)) => {
                let n = *n;
                if self.cfg.trace {
                    let name = self.vars[v.0].name.clone();
                    self.note(move || format!("try {name} = {n}"));
                }
                self.set_int_lb(v, n)?;
                self.set_int_ub(v, n)
            }
            (Target::Var(v), Alt::Bool(b)) => {
                let b = *b;
                if self.cfg.trace {
                    let name = self.vars[v.0].name.clone();
                    self.note(move || format!("try {name} = {b}"));
                }
                self.set_bool(v, b)
            }
            (Target::Var(v), Alt::SortIdx(k)) => {
                let k = *k;
                if self.cfg.trace {
                    let name = self.vars[v.0].name.clone();
                    self.note(move || format!("try {name} = element #{k}"));
                }
                self.sort_retain(v, |i| i == k)
            }
            (Target::Var(v), Alt::Flag(idx, f)) => {
                let (idx, f) = (*idx, *f);
                self.set_flag(v, idx, f)
            }
            (Target::Susp(si), Alt::Instance(val)) => {
                self.mark_expanded(si);
                let SuspKind::Quant {
                    exists,
                    ref x,
                    ref body,
                    ..
                } = self.susps[si].kind
                else {
                    unreachable!("only quantifier suspensions are branching targets")
                };
                let (x, body) = (x.clone(), body.clone());
                if self.cfg.trace {
                    let v = val.clone();
                    let x = x.clone();
                    let role = if exists { "witness" } else { "counterexample" };
                    self.note(move || format!("try {role} {x} = {v}"));
                }
                let inst = substitute(&body, &x, &val.to_expr());
                let lit = self.reify(&inst)?;
                self.set_lit(lit, Truth::from_bool(exists))
            }
            _ => unreachable!("alternative shape does not match its target"),
        }
    }
}

/// Map a non-conflict halt onto the public outcome.
fn fatal_outcome(halt: Halt) -> SolveOutcome {
    match halt {
        Halt::Conflict => unreachable!("conflicts are consumed by backtracking"),
        Halt::Wd(e) => SolveOutcome::WdError(e),
        Halt::TooWide(what) => SolveOutcome::Unknown(UnknownCause::TooWide(what)),
        Halt::Budget => SolveOutcome::Unknown(UnknownCause::Budget),
    }
}

#[cfg(test)]
mod tests {
    use super::super::{
        solve, solve_all, Budget, SolveConfig, SolveOutcome, SolveStats, UnknownCause,
    };
    use crate::kernel::Store;
    use crate::model::{parse_pred, Ident, Pred, SortDecl, Ty, Value};

    fn int_scope(names: &[&str]) -> Vec<(Ident, Ty)> {
        names.iter().map(|n| (n.to_string(), Ty::Int)).collect()
    }

    fn run(src: &str, scope: &[(Ident, Ty)]) -> (SolveOutcome, SolveStats) {
        solve(&parse_pred(src).unwrap(), scope, &[], SolveConfig::default())
    }

    fn sat_value(outcome: &SolveOutcome, name: &str) -> Value {
        match outcome {
            SolveOutcome::Sat(val) => val.get(name).expect("variable in model").clone(),
            other => panic!("expected Sat, got {other:?}"),
        }
    }

    #[test]
    fn splitting_finds_the_square_root() {
        let scope = int_scope(&["x"]);
        let (outcome, stats) = run("x : 0 .. 3 & x * x = 4", &scope);
        assert_eq!(sat_value(&outcome, "x"), Value::Int(2));
        // Multiplication only propagates interval bounds, so the values
        // 0, 1, 2 are tried in order and the first two fail.
        assert_eq!(stats.decisions, 3);
        // Same inputs, same answer.
        assert_eq!(run("x : 0 .. 3 & x * x = 4", &scope), (outcome, stats));
    }

    #[test]
    fn contradictory_comparisons_are_unsat_without_search() {
        let (outcome, stats) = run("x > y & y >= x", &int_scope(&["x", "y"]));
        assert_eq!(outcome, SolveOutcome::Unsat);
        assert_eq!(stats.decisions, 0);
    }

    #[test]
    fn nonempty_subset_has_a_model() {
        let scope = vec![("N".to_string(), Ty::Set(Box::new(Ty::Int)))];
        let (outcome, stats) = run("N <: 0 .. 3 & N /= {}", &scope);
        let model = match sat_value(&outcome, "N") {
            Value::Set(els) => els,
            other => panic!("expected a set, got {other:?}"),
        };
        assert!(!model.is_empty());
        assert!(model.iter().all(|v| matches!(v, Value::Int(0..=3))));
        // The subset bound seeded the universe, so no clipping to the
        // global integer range happened.
        assert!(!stats.clipped);
    }

    #[test]
    fn empty_and_nonempty_together_are_unsat() {
        let scope = vec![("s".to_string(), Ty::Set(Box::new(Ty::Int)))];
        let (outcome, stats) = run("s <: 0 .. 3 & s /= {} & s = {}", &scope);
        assert_eq!(outcome, SolveOutcome::Unsat);
        // The two emptiness atoms share one reification variable, so the
        // clash is caught while posting.
        assert_eq!(stats.decisions, 0);
    }

    #[test]
    fn failed_store_enumerates_unsat() {
        let mut st = Store::new(&[], &[], SolveConfig::default(), None).unwrap();
        assert!(st.post(&Pred::True, false).is_err());
        assert_eq!(st.search(), SolveOutcome::Unsat);
    }

    #[test]
    fn zero_decision_budget_reports_unknown() {
        let cfg = SolveConfig {
            budget: Budget {
                deadline: None,
                max_decisions: Some(0),
            },
            ..SolveConfig::default()
        };
        let p = parse_pred("x : 0 .. 3 & x * x = 4").unwrap();
        let (outcome, _) = solve(&p, &int_scope(&["x"]), &[], cfg);
        assert_eq!(outcome, SolveOutcome::Unknown(UnknownCause::Budget));
    }

    #[test]
    fn ground_division_by_zero_aborts_the_solve() {
        let (outcome, _) = run("x > 1 / 0", &int_scope(&["x"]));
        assert!(matches!(outcome, SolveOutcome::WdError(_)), "{outcome:?}");
    }

    #[test]
    fn pinned_zero_divisor_aborts_the_solve() {
        let (outcome, _) = run("1 / x = 1 & x = 0", &int_scope(&["x"]));
        assert!(matches!(outcome, SolveOutcome::WdError(_)), "{outcome:?}");
    }

    /// A division hit while trying `x = 0` is not a backtrackable failure:
    /// the whole solve aborts even though `x = 2` would satisfy the
    /// constraint.
    #[test]
    fn division_error_during_search_is_not_swallowed() {
        let (outcome, _) = run("1 / x = 0 & x : 0 .. 2", &int_scope(&["x"]));
        assert!(matches!(outcome, SolveOutcome::WdError(_)), "{outcome:?}");
    }

    #[test]
    fn universal_implications_bound_by_their_antecedent() {
        let (outcome, stats) = run("!x : INT.(x : 0 .. 2 => x < 3)", &[]);
        assert!(matches!(outcome, SolveOutcome::Sat(_)), "{outcome:?}");
        assert_eq!(stats.decisions, 0);

        let (outcome, stats) = run("!x : INT.(x : 0 .. 2 => x * x < 4)", &[]);
        assert_eq!(outcome, SolveOutcome::Unsat);
        assert_eq!(stats.decisions, 0);
    }

    /// A conjunction body never narrows a universal binder: membership in
    /// `0 .. 2` is part of the claim, so any integer outside the interval
    /// falsifies it.
    #[test]
    fn universal_conjunctions_range_over_the_full_domain() {
        let (outcome, _) = run("!x : INT.(x : 0 .. 2 & x < 3)", &[]);
        assert_eq!(outcome, SolveOutcome::Unsat);
    }

    #[test]
    fn small_existential_quantifiers_expand_exactly() {
        let (outcome, stats) = run("#x : INT.(x : 0 .. 3 & x > 2)", &[]);
        assert!(matches!(outcome, SolveOutcome::Sat(_)), "{outcome:?}");
        assert_eq!(stats.decisions, 0);

        let (outcome, stats) = run("#x : INT.(x : 0 .. 3 & x > 5)", &[]);
        assert_eq!(outcome, SolveOutcome::Unsat);
        assert_eq!(stats.decisions, 0);
    }

    /// A binder range too wide to expand suspends; the search then picks
    /// the suspension and finds a witness with a single decision.
    #[test]
    fn wide_existential_suspends_then_branches_on_witnesses() {
        let (outcome, stats) = run("#x : INT.(x > 100)", &[]);
        assert!(matches!(outcome, SolveOutcome::Sat(_)), "{outcome:?}");
        assert_eq!(stats.decisions, 1);
    }

    #[test]
    fn sort_disequality_instantiates_deterministically() {
        let sorts = vec![SortDecl {
            name: "SORT".to_string(),
            elements: vec!["a".to_string(), "b".to_string()],
        }];
        let scope = vec![("x".to_string(), Ty::Sort("SORT".to_string()))];
        let p = parse_pred("x /= a").unwrap();
        let (outcome, stats) = solve(&p, &scope, &sorts, SolveConfig::default());
        assert_eq!(sat_value(&outcome, "x"), Value::Elem("b".to_string()));
        assert_eq!(stats.decisions, 0);
    }

    #[test]
    fn solve_all_reports_exhaustion_or_truncation() {
        let p = parse_pred("x : 0 .. 2").unwrap();
        let scope = int_scope(&["x"]);

        let (models, outcome, _) = solve_all(&p, &scope, &[], SolveConfig::default(), 10);
        let found: Vec<Value> = models
            .iter()
            .map(|m| m.get("x").unwrap().clone())
            .collect();
        assert_eq!(found, vec![Value::Int(0), Value::Int(1), Value::Int(2)]);
        assert_eq!(outcome, SolveOutcome::Unsat);

        let (models, outcome, _) = solve_all(&p, &scope, &[], SolveConfig::default(), 2);
        assert_eq!(models.len(), 2);
        assert!(matches!(outcome, SolveOutcome::Sat(_)));
    }
}
