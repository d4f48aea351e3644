//! Constraint-based deadlock search.
//!
//! A deadlocking state is one that satisfies every axiom and invariant while
//! enabling no event. The checker phrases that directly as one predicate —
//! the deadlock network — and hands it to the finite-domain kernel:
//!
//! 1. conjoin axioms, invariants, and the optional goal predicate (`AI`);
//! 2. drop events that provably cannot fire under `AI` (cheap per-event
//!    solves under a short budget — anything not proved unsatisfiable stays);
//! 3. negate each surviving event's simplified enabling predicate and
//!    conjoin;
//! 4. move the most frequently occurring atoms to the front of each negated
//!    guard, so shared constraints propagate before event-specific ones;
//! 5. split the conjunction into connected components over shared variables
//!    and solve each independently, optionally discarding components that
//!    constrain no guard;
//! 6. merge the component models into one state and re-check it with the
//!    ground evaluator before reporting.
//!
//! A found state is a genuine deadlock of the description, but not
//! necessarily reachable from the initial state; the model checker (`mc`)
//! answers reachability questions.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::kernel::{solve, solve_traced, Budget, SolveConfig, SolveOutcome, UnknownCause};
use crate::model::{
    eval_pred, free_vars, print_pred, EvalCtx, EvalError, Event, Ident, Pred, Ty, TypedMachine,
    Valuation, Value,
};
use crate::simplify::{normalize_atom, simplify, Facts};

/// Options for one deadlock check.
#[derive(Debug, Clone)]
pub struct CheckOptions {
    /// Extra predicate a reported state must satisfy, conjoined into `AI`.
    pub goal: Option<Pred>,
    /// Restrict the check to these events; `None` considers all of them.
    pub events: Option<Vec<Ident>>,
    /// Per-event budget for the disabledness filter; zero disables the
    /// filter entirely.
    pub filter_budget: Duration,
    /// Wall-clock budget shared by all component solves.
    pub solve_budget: Duration,
    /// Global integer bound handed to the solver and evaluator.
    pub maxint: i64,
    /// Rewrite enabling predicates before negating them.
    pub simplify: bool,
    /// Reorder conjuncts inside negated guards by atom frequency.
    pub sort: bool,
    /// Split the network into independent components.
    pub partition: bool,
    /// Discard components that contain no negated guard. Their variables
    /// cannot influence the verdict; they are filled back in afterwards so
    /// the reported state stays total.
    pub drop_irrelevant: bool,
    /// Collect the kernel's propagation/decision log for each component
    /// solve into the report.
    pub trace: bool,
}

impl Default for CheckOptions {
    fn default() -> CheckOptions {
        CheckOptions {
            goal: None,
            events: None,
            filter_budget: Duration::from_millis(200),
            solve_budget: Duration::from_secs(10),
            maxint: 1023,
            simplify: true,
            sort: true,
            partition: true,
            drop_irrelevant: true,
            trace: false,
        }
    }
}

/// The check could not reach a verdict, and why.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Inconclusive {
    #[error("budget exhausted")]
    Budget,
    #[error("{0}")]
    TooWide(String),
    /// Some atom is not well-defined in every candidate state (division or
    /// modulo by zero); carries the printed atom.
    #[error("not well-defined: `{0}`")]
    IllDefined(String),
    /// A candidate state failed the independent re-evaluation; reported
    /// instead of a possibly wrong verdict.
    #[error("candidate state failed re-evaluation: {0}")]
    Validation(String),
}

/// One row of the per-event guard table accompanying a found deadlock.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardStatus {
    pub event: Ident,
    /// Whether the enabling predicate holds in the reported state (always
    /// false for a genuine deadlock).
    pub enabled: bool,
    /// The first guard conjunct whose prefix — existentially closed over the
    /// event's parameters — already fails in the state, printed.
    pub falsified_conjunct: Option<String>,
}

/// Verdict of a deadlock check.
#[derive(Debug, Clone, PartialEq)]
pub enum CbcResult {
    /// A state satisfying axioms, invariants, and goal in which no
    /// considered event can fire, re-checked by the ground evaluator,
    /// together with the per-event guard table.
    DeadlockFound(Valuation, Vec<GuardStatus>),
    /// No such state exists. `bounds_qualified` is true when the proof
    /// leaned on the clipped global integer range, in which case the
    /// guarantee only covers states within those bounds.
    NoDeadlock { bounds_qualified: bool },
    Unknown(Inconclusive),
}

/// Everything one check learned, for reporting alongside the verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct CbcReport {
    pub result: CbcResult,
    /// Events proved disabled under `AI` and removed before the network was
    /// built.
    pub filtered_events: Vec<Ident>,
    /// Connected components the network split into (1 when partitioning is
    /// off), and how many of them were discarded as guard-free.
    pub components: usize,
    pub dropped_components: usize,
    /// Total enumeration decisions across every solve performed.
    pub decisions: u64,
    /// True when any solve clipped an integer domain to the global bound.
    pub bounds_qualified: bool,
    /// Kernel propagation/decision log, one section per component solve;
    /// empty unless tracing was requested.
    pub trace_lines: Vec<String>,
}

/// The request itself is malformed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CbcError {
    #[error("unknown event `{0}`")]
    UnknownEvent(Ident),
}

/// Outcome of the event filter: the events worth building constraints for,
/// and the ones proved impossible under `AI`.
#[derive(Debug, Clone)]
pub struct FilterOutcome<'m> {
    pub kept: Vec<&'m Event>,
    pub dropped: Vec<Ident>,
    pub decisions: u64,
    pub clipped: bool,
}

/// Resolve the events a check considers: the named ones in the order given,
/// or every event of the machine.
fn considered_events<'m>(
    tm: &'m TypedMachine,
    opts: &CheckOptions,
) -> Result<Vec<&'m Event>, CbcError> {
    match &opts.events {
        None => Ok(tm.machine.events.iter().collect()),
        Some(names) => names
            .iter()
            .map(|n| {
                tm.machine
                    .event(n)
                    .ok_or_else(|| CbcError::UnknownEvent(n.clone()))
            })
            .collect(),
    }
}

/// `AI`: axioms, invariants, and the goal, flattened into one conjunct list.
fn ai_conjuncts(tm: &TypedMachine, goal: &Option<Pred>) -> Vec<Pred> {
    let mut out = Vec::new();
    for clause in tm.machine.axioms.iter().chain(&tm.machine.invariants) {
        out.extend(clause.pred.flat_conjuncts().into_iter().cloned());
    }
    if let Some(p) = goal {
        out.extend(p.flat_conjuncts().into_iter().cloned());
    }
    out
}

/// Static facts visible to guard simplification: sorts, axioms, invariants,
/// and the goal all hold in any state the check cares about.
fn check_facts(tm: &TypedMachine, opts: &CheckOptions) -> Facts {
    let mut facts = Facts::for_machine(tm, opts.maxint);
    if let Some(goal) = &opts.goal {
        facts.assume(goal);
    }
    facts
}

/// Drop every event whose enabling predicate is provably unsatisfiable
/// together with `ai`, spending at most the per-event budget on each proof.
/// Satisfiable and undecided events are kept — removal requires proof.
/// A well-definedness error aborts the filter; the caller reports it.
pub fn filter_events<'m>(
    tm: &'m TypedMachine,
    ai: &Pred,
    considered: &[&'m Event],
    opts: &CheckOptions,
) -> Result<FilterOutcome<'m>, EvalError> {
    let mut out = FilterOutcome {
        kept: Vec::new(),
        dropped: Vec::new(),
        decisions: 0,
        clipped: false,
    };
    if opts.filter_budget.is_zero() {
        out.kept = considered.to_vec();
        return Ok(out);
    }
    let scope = tm.scope();
    for &event in considered {
        let g = tm.enabling_predicate(event);
        let p = Pred::and(vec![ai.clone(), g]);
        let cfg = SolveConfig {
            maxint: opts.maxint,
            budget: Budget::timeout(opts.filter_budget),
            ..SolveConfig::default()
        };
        let (outcome, stats) = solve(&p, &scope, &tm.machine.sorts, cfg);
        out.decisions += stats.decisions;
        out.clipped |= stats.clipped;
        match outcome {
            SolveOutcome::Unsat => out.dropped.push(event.name.clone()),
            SolveOutcome::Sat(_) | SolveOutcome::Unknown(_) => out.kept.push(event),
            SolveOutcome::WdError(e) => return Err(e),
        }
    }
    Ok(out)
}

/// The deadlock network: `AI ∧ ¬G_e ∧ …` over the considered events, with
/// each enabling predicate simplified first (unless disabled). Events listed
/// in the options restrict the network; event filtering is a separate
/// concern ([`filter_events`]) composed by [`check_deadlock`].
pub fn build_dln(tm: &TypedMachine, opts: &CheckOptions) -> Result<Pred, CbcError> {
    let considered = considered_events(tm, opts)?;
    let facts = check_facts(tm, opts);
    let mut conjuncts = ai_conjuncts(tm, &opts.goal);
    conjuncts.extend(negated_guards(tm, &considered, &facts, opts));
    Ok(Pred::and(conjuncts))
}

/// `¬(simplified G_e)` for each event, in order.
fn negated_guards(
    tm: &TypedMachine,
    events: &[&Event],
    facts: &Facts,
    opts: &CheckOptions,
) -> Vec<Pred> {
    events
        .iter()
        .map(|e| {
            let g = tm.enabling_predicate(e);
            let g = if opts.simplify {
                simplify(&g, facts)
            } else {
                g
            };
            Pred::Not(Box::new(g))
        })
        .collect()
}

/// Reorder the conjuncts inside each negated guard so that the atoms
/// occurring most often across the whole formula come first; the solver then
/// posts shared constraints before event-specific ones, letting their
/// reification variables collide early. Ties keep their original order, and
/// conjuncts without a normalizable atom key sink to the back. The logical
/// value is untouched.
pub fn sort_conjuncts(deadlock: &Pred) -> Pred {
    let mut counts = std::collections::BTreeMap::new();
    count_atoms(deadlock, &mut counts);
    let count = |p: &Pred| -> usize {
        normalize_atom(p)
            .ok()
            .and_then(|(key, _)| counts.get(&key).copied())
            .unwrap_or(0)
    };
    let conjuncts = deadlock
        .conjuncts()
        .iter()
        .map(|c| match c {
            Pred::Not(inner) => match inner.as_ref() {
                Pred::And(ps) => {
                    let mut ps = ps.clone();
                    ps.sort_by_key(|p| std::cmp::Reverse(count(p)));
                    Pred::Not(Box::new(Pred::And(ps)))
                }
                _ => c.clone(),
            },
            _ => c.clone(),
        })
        .collect();
    Pred::and(conjuncts)
}

fn count_atoms(p: &Pred, counts: &mut std::collections::BTreeMap<crate::simplify::AtomKey, usize>) {
    if let Ok((key, _)) = normalize_atom(p) {
        *counts.entry(key).or_insert(0) += 1;
        return;
    }
    match p {
        Pred::And(ps) | Pred::Or(ps) => ps.iter().for_each(|q| count_atoms(q, counts)),
        Pred::Imp(a, b) | Pred::Iff(a, b) => {
            count_atoms(a, counts);
            count_atoms(b, counts);
        }
        Pred::Not(q) => count_atoms(q, counts),
        Pred::Exists(_, _, body) | Pred::Forall(_, _, body) => count_atoms(body, counts),
        _ => {}
    }
}

/// Partition conjuncts into connected components: two conjuncts share a
/// component exactly when they are linked by a chain of shared free
/// variables. Returns index groups, each ascending, ordered by their
/// smallest member — so solving and merging stay deterministic. Conjuncts
/// without free variables form singleton components.
pub fn components(conjuncts: &[Pred]) -> Vec<Vec<usize>> {
    let n = conjuncts.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    let mut owner: std::collections::BTreeMap<Ident, usize> = std::collections::BTreeMap::new();
    for (i, c) in conjuncts.iter().enumerate() {
        for v in free_vars(c) {
            match owner.get(&v) {
                Some(&j) => {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
                None => {
                    owner.insert(v, i);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> =
        std::collections::BTreeMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by_key(|g| g[0]);
    out
}

/// A value for a variable nothing constrains; any choice is consistent.
fn default_value(ty: &Ty, tm: &TypedMachine) -> Value {
    match ty {
        Ty::Int => Value::Int(0),
        Ty::Bool => Value::Bool(false),
        Ty::Set(_) => Value::Set(BTreeSet::new()),
        Ty::Sort(s) => Value::Elem(
            tm.sort(s).expect("sorts are closed under typechecking").elements[0].clone(),
        ),
    }
}

/// Run the whole pipeline and return the verdict with its report.
///
/// `DeadlockFound` states are always re-checked by the ground evaluator
/// against the unsimplified axioms, invariants, goal, and every considered
/// event's enabling predicate — including filtered ones, which must be just
/// as disabled. Any well-definedness error anywhere surfaces as
/// `Unknown(IllDefined)` rather than a verdict.
pub fn check_deadlock(tm: &TypedMachine, opts: &CheckOptions) -> Result<CbcReport, CbcError> {
    let considered = considered_events(tm, opts)?;
    let facts = check_facts(tm, opts);
    let ai_conjs = ai_conjuncts(tm, &opts.goal);
    let ai = Pred::and(ai_conjs.clone());

    let mut report = CbcReport {
        result: CbcResult::Unknown(Inconclusive::Budget),
        filtered_events: Vec::new(),
        components: 0,
        dropped_components: 0,
        decisions: 0,
        bounds_qualified: false,
        trace_lines: Vec::new(),
    };

    // Prune events that provably cannot fire in any state of interest.
    let filtered = match filter_events(tm, &ai, &considered, opts) {
        Ok(f) => f,
        Err(e) => {
            report.result = CbcResult::Unknown(ill_defined(e));
            return Ok(report);
        }
    };
    report.filtered_events = filtered.dropped.clone();
    report.decisions += filtered.decisions;
    report.bounds_qualified |= filtered.clipped;

    // Assemble the network, marking which conjuncts are negated guards.
    let mut deadlock = Pred::and(negated_guards(tm, &filtered.kept, &facts, opts));
    if opts.sort {
        deadlock = sort_conjuncts(&deadlock);
    }
    let n_ai = ai_conjs.len();
    let mut conjuncts = ai_conjs;
    conjuncts.extend(deadlock.conjuncts().iter().cloned());

    let groups = if opts.partition {
        components(&conjuncts)
    } else {
        vec![(0..conjuncts.len()).collect()]
    };
    let has_guard = |g: &Vec<usize>| g.iter().any(|&i| i >= n_ai);
    let (kept_groups, dropped_groups): (Vec<Vec<usize>>, Vec<Vec<usize>>) = if opts.drop_irrelevant
    {
        groups.into_iter().partition(has_guard)
    } else {
        (groups, Vec::new())
    };
    report.components = kept_groups.len() + dropped_groups.len();
    report.dropped_components = dropped_groups.len();

    // Solve the guard-bearing components first; any unsatisfiable one
    // settles the verdict. Dropped components only fill in the report state,
    // but their unsatisfiability equally means no state exists at all. The
    // solve budget is one shared deadline, not a per-component allowance.
    let scope = tm.scope();
    let cfg = SolveConfig {
        maxint: opts.maxint,
        budget: Budget {
            deadline: Some(Instant::now() + opts.solve_budget),
            max_decisions: None,
        },
        ..SolveConfig::default()
    };
    let mut merged = Valuation::new();
    let mut undecided: Option<Inconclusive> = None;
    for group in kept_groups.iter().chain(&dropped_groups) {
        let pred = Pred::and(group.iter().map(|&i| conjuncts[i].clone()).collect());
        let vars = free_vars(&pred);
        let comp_scope: Vec<_> = scope
            .iter()
            .filter(|(n, _)| vars.contains(n))
            .cloned()
            .collect();
        let (outcome, stats) = if opts.trace {
            let (outcome, stats, lines) = solve_traced(&pred, &comp_scope, &tm.machine.sorts, cfg);
            let names: Vec<&str> = comp_scope.iter().map(|(n, _)| n.as_str()).collect();
            report.trace_lines.push(format!("-- component [{}]", names.join(", ")));
            report.trace_lines.extend(lines);
            (outcome, stats)
        } else {
            solve(&pred, &comp_scope, &tm.machine.sorts, cfg)
        };
        report.decisions += stats.decisions;
        report.bounds_qualified |= stats.clipped;
        match outcome {
            SolveOutcome::Sat(v) => {
                for (name, value) in v.iter() {
                    merged.insert(name.clone(), value.clone());
                }
            }
            SolveOutcome::Unsat => {
                report.result = CbcResult::NoDeadlock {
                    bounds_qualified: report.bounds_qualified,
                };
                return Ok(report);
            }
            SolveOutcome::Unknown(cause) => {
                undecided.get_or_insert(match cause {
                    UnknownCause::Budget => Inconclusive::Budget,
                    UnknownCause::TooWide(w) => Inconclusive::TooWide(w),
                    UnknownCause::Validation => {
                        Inconclusive::Validation("solver model rejected".into())
                    }
                });
            }
            SolveOutcome::WdError(e) => {
                report.result = CbcResult::Unknown(ill_defined(e));
                return Ok(report);
            }
        }
    }
    if let Some(cause) = undecided {
        report.result = CbcResult::Unknown(cause);
        return Ok(report);
    }

    // Total state: give every untouched variable an arbitrary value.
    for (name, ty) in &scope {
        if merged.get(name).is_none() {
            merged.insert(name.clone(), default_value(ty, tm));
        }
    }

    // Independent re-check against the raw formula, filtered events included.
    let ctx = EvalCtx::new(&tm.machine.sorts, opts.maxint);
    let mut full = Pred::and(ai_conjuncts(tm, &opts.goal));
    for event in &considered {
        full = Pred::and(vec![
            full,
            Pred::Not(Box::new(tm.enabling_predicate(event))),
        ]);
    }
    match eval_pred(&full, &merged, &ctx) {
        Ok(true) => {}
        Ok(false) => {
            report.result = CbcResult::Unknown(Inconclusive::Validation(
                "merged state does not satisfy the deadlock description".into(),
            ));
            return Ok(report);
        }
        Err(e @ EvalError::WellDefinedness { .. }) => {
            report.result = CbcResult::Unknown(ill_defined(e));
            return Ok(report);
        }
        Err(e) => {
            report.result = CbcResult::Unknown(Inconclusive::Validation(e.to_string()));
            return Ok(report);
        }
    }

    let table = guard_table(tm, &considered, &merged, &ctx);
    report.result = CbcResult::DeadlockFound(merged, table);
    Ok(report)
}

fn ill_defined(e: EvalError) -> Inconclusive {
    let text = match &e {
        EvalError::WellDefinedness { expr } => crate::model::print_expr(expr),
        other => other.to_string(),
    };
    Inconclusive::IllDefined(text)
}

/// Per-event enabledness in `state`, with the first guard conjunct whose
/// prefix (existentially closed over the parameters) already fails.
pub fn guard_table(
    tm: &TypedMachine,
    events: &[&Event],
    state: &Valuation,
    ctx: &EvalCtx,
) -> Vec<GuardStatus> {
    events
        .iter()
        .map(|event| {
            let g = tm.enabling_predicate(event);
            let enabled = eval_pred(&g, state, ctx).unwrap_or(false);
            GuardStatus {
                event: event.name.clone(),
                enabled,
                falsified_conjunct: falsified_conjunct(event, state, ctx),
            }
        })
        .collect()
}

fn falsified_conjunct(event: &Event, state: &Valuation, ctx: &EvalCtx) -> Option<String> {
    for i in 0..event.guards.len() {
        let mut prefix = Pred::and(event.guards[..=i].to_vec());
        for (name, ty) in event.params.iter().rev() {
            prefix = Pred::Exists(name.clone(), ty.clone(), Box::new(prefix));
        }
        match eval_pred(&prefix, state, ctx) {
            Ok(false) => return Some(print_pred(&event.guards[i])),
            Ok(true) => continue,
            Err(_) => return None,
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_machine, parse_pred, typecheck};
    use crate::testgen::{counting_source, minset_source, MinSetVariant};

    fn machine(src: &str) -> TypedMachine {
        typecheck(parse_machine(src).unwrap()).unwrap()
    }

    fn minset(variant: MinSetVariant) -> TypedMachine {
        machine(&minset_source(variant))
    }

    #[test]
    fn network_negates_every_considered_guard() {
        let tm = minset(MinSetVariant::GuardFixed);
        let opts = CheckOptions::default();
        let dln = build_dln(&tm, &opts).unwrap();
        let negated = dln
            .conjuncts()
            .iter()
            .filter(|c| matches!(c, Pred::Not(_)))
            .count();
        assert_eq!(negated, tm.machine.events.len());
    }

    #[test]
    fn goal_predicate_joins_the_state_description() {
        let tm = minset(MinSetVariant::GuardFixed);
        let goal = tm.check_goal(parse_pred("min : s").unwrap()).unwrap();
        let opts = CheckOptions {
            goal: Some(goal.clone()),
            ..CheckOptions::default()
        };
        let dln = build_dln(&tm, &opts).unwrap();
        assert!(dln.conjuncts().contains(&goal));
    }

    #[test]
    fn empty_event_list_reduces_to_the_state_description() {
        let tm = minset(MinSetVariant::GuardFixed);
        let opts = CheckOptions {
            events: Some(Vec::new()),
            ..CheckOptions::default()
        };
        let dln = build_dln(&tm, &opts).unwrap();
        assert!(dln.conjuncts().iter().all(|c| !matches!(c, Pred::Not(_))));
    }

    #[test]
    fn unknown_event_names_are_rejected() {
        let tm = minset(MinSetVariant::Original);
        let opts = CheckOptions {
            events: Some(vec!["vanish".into()]),
            ..CheckOptions::default()
        };
        assert_eq!(
            check_deadlock(&tm, &opts).unwrap_err(),
            CbcError::UnknownEvent("vanish".into())
        );
    }

    #[test]
    fn filter_drops_goal_contradicting_events() {
        let tm = machine(&counting_source());
        let goal = tm.check_goal(parse_pred("Counter = 10").unwrap()).unwrap();
        let opts = CheckOptions {
            goal: Some(goal),
            ..CheckOptions::default()
        };
        let considered = considered_events(&tm, &opts).unwrap();
        let ai = Pred::and(ai_conjuncts(&tm, &opts.goal));
        let out = filter_events(&tm, &ai, &considered, &opts).unwrap();
        // At the saturated counter value neither guard can hold: the filter
        // proves both events disabled, leaving a pure state description.
        assert_eq!(out.dropped, vec!["step".to_string(), "reset".to_string()]);
        assert!(out.kept.is_empty());
    }

    #[test]
    fn filtering_does_not_change_the_verdict() {
        let tm = machine(&counting_source());
        let goal = tm.check_goal(parse_pred("Counter = 10").unwrap()).unwrap();
        let filtered = CheckOptions {
            goal: Some(goal.clone()),
            ..CheckOptions::default()
        };
        let unfiltered = CheckOptions {
            goal: Some(goal),
            filter_budget: Duration::ZERO,
            ..CheckOptions::default()
        };
        let a = check_deadlock(&tm, &filtered).unwrap();
        let b = check_deadlock(&tm, &unfiltered).unwrap();
        let CbcResult::DeadlockFound(sa, _) = &a.result else {
            panic!("expected a deadlock, got {a:?}");
        };
        let CbcResult::DeadlockFound(sb, _) = &b.result else {
            panic!("expected a deadlock, got {b:?}");
        };
        assert_eq!(sa.get("Counter"), Some(&Value::Int(10)));
        assert_eq!(sa.get("Counter"), sb.get("Counter"));
        assert_eq!(a.filtered_events, vec!["step".to_string(), "reset".to_string()]);
        assert!(b.filtered_events.is_empty());
    }

    #[test]
    fn filtering_off_keeps_every_event() {
        let tm = machine(&counting_source());
        let opts = CheckOptions {
            filter_budget: Duration::ZERO,
            ..CheckOptions::default()
        };
        let considered = considered_events(&tm, &opts).unwrap();
        let ai = Pred::and(ai_conjuncts(&tm, &opts.goal));
        let out = filter_events(&tm, &ai, &considered, &opts).unwrap();
        assert_eq!(out.kept.len(), 2);
        assert!(out.dropped.is_empty());
    }

    #[test]
    fn shared_atoms_move_to_the_front_of_each_guard() {
        let deadlock = parse_pred("not (x = 1 & y < x) & not (z = 2 & y < x)").unwrap();
        let sorted = sort_conjuncts(&deadlock);
        let expected = parse_pred("not (y < x & x = 1) & not (y < x & z = 2)").unwrap();
        assert_eq!(sorted, expected);
    }

    #[test]
    fn single_guard_ordering_is_stable() {
        let deadlock = parse_pred("not (a = 1 & b = 2)").unwrap();
        assert_eq!(sort_conjuncts(&deadlock), deadlock);
    }

    #[test]
    fn variable_chains_make_one_component() {
        let conjuncts = parse_pred("x < y & y < z & z < 9").unwrap().conjuncts().to_vec();
        assert_eq!(components(&conjuncts), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn disjoint_variables_split_apart() {
        let conjuncts = parse_pred("x > 0 & y > 0 & x < 5").unwrap().conjuncts().to_vec();
        assert_eq!(components(&conjuncts), vec![vec![0, 2], vec![1]]);
    }

    #[test]
    fn original_machine_deadlocks() {
        let tm = minset(MinSetVariant::Original);
        let report = check_deadlock(&tm, &CheckOptions::default()).unwrap();
        assert!(
            matches!(report.result, CbcResult::DeadlockFound(..)),
            "{report:?}"
        );
    }

    #[test]
    fn fixed_guard_still_deadlocks_on_empty_set() {
        let tm = minset(MinSetVariant::GuardFixed);
        let report = check_deadlock(&tm, &CheckOptions::default()).unwrap();
        let CbcResult::DeadlockFound(state, table) = &report.result else {
            panic!("expected a deadlock, got {report:?}");
        };
        assert_eq!(state.get("s"), Some(&Value::Set(BTreeSet::new())));
        assert!(table.iter().all(|g| !g.enabled));
    }

    #[test]
    fn strengthened_invariant_removes_the_deadlock() {
        let tm = minset(MinSetVariant::WithMinInvariant);
        let report = check_deadlock(&tm, &CheckOptions::default()).unwrap();
        assert!(
            matches!(report.result, CbcResult::NoDeadlock { .. }),
            "{report:?}"
        );
    }

    #[test]
    fn unrelated_variable_component_is_dropped_and_filled() {
        let tm = minset(MinSetVariant::GuardFixed);
        let report = check_deadlock(&tm, &CheckOptions::default()).unwrap();
        assert!(report.dropped_components >= 1, "{report:?}");
        let CbcResult::DeadlockFound(state, _) = &report.result else {
            panic!("expected a deadlock, got {report:?}");
        };
        // The dropped component's variable is still present and consistent.
        let z = state.get("z").and_then(Value::as_int).unwrap();
        assert!((0..=4).contains(&z));
    }

    #[test]
    fn division_by_possible_zero_is_reported_not_guessed() {
        let tm = machine(&crate::testgen::ratio_source());
        let report = check_deadlock(&tm, &CheckOptions::default()).unwrap();
        let CbcResult::Unknown(Inconclusive::IllDefined(atom)) = &report.result else {
            panic!("expected a well-definedness report, got {report:?}");
        };
        assert!(atom.contains('/'), "offending atom should be printed: {atom}");
    }

    #[test]
    fn verdict_survives_disabling_every_optimization() {
        for variant in [
            MinSetVariant::Original,
            MinSetVariant::GuardFixed,
            MinSetVariant::WithMinInvariant,
        ] {
            let tm = minset(variant);
            let plain = CheckOptions {
                simplify: false,
                sort: false,
                partition: false,
                drop_irrelevant: false,
                ..CheckOptions::default()
            };
            let a = check_deadlock(&tm, &CheckOptions::default()).unwrap();
            let b = check_deadlock(&tm, &plain).unwrap();
            let kind = |r: &CbcResult| match r {
                CbcResult::DeadlockFound(..) => 0,
                CbcResult::NoDeadlock { .. } => 1,
                CbcResult::Unknown(_) => 2,
            };
            assert_eq!(kind(&a.result), kind(&b.result), "{variant:?}");
        }
    }
}
