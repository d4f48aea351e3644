//! Explicit-state deadlock search.
//!
//! Where the constraint checker asks whether *any* state allowed by the
//! axioms and invariants disables every event, this module asks the sharper
//! and more expensive question of whether such a state is *reachable*: it
//! executes the machine from its initial states, enumerating event
//! parameters as it goes, and reports the first visited state with no
//! outgoing transition. Constants are fixed once per initial state, so a
//! deadlock only shows up under constant choices the search actually
//! explored, and only within the visit budget.
//!
//! States are plain [`Valuation`]s over constants and variables; their map
//! and set representations are ordered, so a valuation is its own canonical
//! key in the visited set. Invariant violations found along the way are
//! collected as warnings — they signal a modelling error, but proving
//! invariants is a separate activity and does not stop the deadlock search.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::cbc::Inconclusive;
use crate::kernel::{solve_all, SolveConfig, SolveOutcome};
use crate::model::{
    eval_expr, eval_pred, EvalCtx, EvalError, Ident, Pred, TypedMachine, Valuation,
};
use crate::simplify::substitute;

/// Options for one search.
#[derive(Debug, Clone)]
pub struct McOptions {
    /// Stop after discovering this many states (at least 1 is explored).
    pub max_states: usize,
    /// Only deadlock states satisfying this predicate are reported; the
    /// search itself still explores everything reachable.
    pub goal: Option<Pred>,
    /// Cap on transitions computed per state; `None` computes all of them.
    /// Any truncation downgrades a full sweep to a bounded verdict.
    pub max_outdegree: Option<usize>,
    pub order: SearchOrder,
    /// Global integer bound for guard evaluation and parameter enumeration.
    pub maxint: i64,
    /// Log each expanded state and fired transition into the report.
    pub trace: bool,
}

impl Default for McOptions {
    fn default() -> McOptions {
        McOptions {
            max_states: 10_000,
            goal: None,
            max_outdegree: None,
            order: SearchOrder::Bfs,
            maxint: 1023,
            trace: false,
        }
    }
}

/// Frontier discipline: breadth-first yields shortest traces and is the
/// deterministic default; depth-first dives for deep deadlocks sooner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchOrder {
    Bfs,
    Dfs,
}

/// One executed transition: the event, the parameter values it fired with,
/// and the state it produced. The first step of every trace is the
/// initialisation, whose `state` is the initial state itself.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub event: Ident,
    pub params: Valuation,
    pub state: Valuation,
}

/// Verdict of a search.
#[derive(Debug, Clone, PartialEq)]
pub enum McResult {
    /// A reachable state with no outgoing transition, with the event
    /// sequence that leads to it from an initial state.
    DeadlockFound {
        trace: Vec<TraceStep>,
        state: Valuation,
    },
    /// Every reachable state was visited, none deadlocks. Only reported
    /// when nothing was truncated along the way.
    NoDeadlockExhausted { states_visited: usize },
    /// No deadlock among the states visited before a budget or truncation
    /// cut the sweep short; more states may exist.
    NoDeadlockWithin { states_visited: usize },
    /// The search ran into a state it could not evaluate (most prominently
    /// a well-definedness error); the trace leads to that state.
    Error {
        cause: Inconclusive,
        trace: Vec<TraceStep>,
    },
}

/// The verdict plus everything the search observed on the way.
#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    pub result: McResult,
    pub states_visited: usize,
    /// True when the initial-state cap, the state budget, or an out-degree
    /// cap left parts of the space unexplored.
    pub truncated: bool,
    /// One message per invariant label seen failing in a reachable state.
    pub invariant_warnings: Vec<String>,
    /// One line per expanded state and fired transition; empty unless
    /// tracing was requested.
    pub trace_lines: Vec<String>,
}

/// Ceiling on collected search-log lines, mirroring the kernel's own cap.
const TRACE_LIMIT: usize = 20_000;

/// A state reached by firing `event` with `params` from the state at
/// `parent`; roots hold the initialisation pseudo-event.
struct Node {
    state: Valuation,
    parent: Option<usize>,
    event: Ident,
    params: Valuation,
}

/// The initial states: every constant valuation satisfying the axioms (up
/// to `cap` of them), each extended by the initialisation's assignments.
/// The flag reports whether the cap cut the constant enumeration short.
pub fn initial_states(
    tm: &TypedMachine,
    cap: usize,
    maxint: i64,
) -> Result<(Vec<Valuation>, bool), Inconclusive> {
    let ctx = EvalCtx::new(&tm.machine.sorts, maxint);
    let const_scope: Vec<_> = tm
        .scope()
        .into_iter()
        .filter(|(n, _)| tm.machine.constants.contains(n))
        .collect();

    let (bases, truncated) = if const_scope.is_empty() {
        (vec![Valuation::new()], false)
    } else {
        let axioms = Pred::and(tm.machine.axioms.iter().map(|c| c.pred.clone()).collect());
        let cfg = SolveConfig {
            maxint,
            ..SolveConfig::default()
        };
        let (models, outcome, stats) = solve_all(&axioms, &const_scope, &tm.machine.sorts, cfg, cap);
        match outcome {
            SolveOutcome::Unsat => (models, stats.clipped),
            SolveOutcome::Sat(_) => (models, true),
            SolveOutcome::Unknown(cause) => return Err(cause.into()),
            SolveOutcome::WdError(e) => return Err(eval_failure(e)),
        }
    };

    let mut states = Vec::with_capacity(bases.len());
    for base in bases {
        let mut state = base.clone();
        for assign in &tm.machine.init.actions {
            let value = eval_expr(&assign.rhs, &base, &ctx).map_err(eval_failure)?;
            state.insert(assign.var.clone(), value);
        }
        states.push(state);
    }
    Ok((states, truncated))
}

/// All transitions out of `state`, capped at `cap` per state: for each event
/// in declaration order, every parameter valuation satisfying its guards,
/// and the state its simultaneous assignments produce. The flag reports
/// whether the cap (or a clipped parameter enumeration) hid transitions.
pub fn successors(
    tm: &TypedMachine,
    state: &Valuation,
    cap: Option<usize>,
    maxint: i64,
) -> Result<(Vec<TraceStep>, bool), Inconclusive> {
    let ctx = EvalCtx::new(&tm.machine.sorts, maxint);
    let mut out = Vec::new();
    let mut truncated = false;
    'events: for event in &tm.machine.events {
        let firings = if event.params.is_empty() {
            let guard = Pred::and(event.guards.clone());
            match eval_pred(&guard, state, &ctx) {
                Ok(true) => vec![Valuation::new()],
                Ok(false) => Vec::new(),
                Err(e) => return Err(eval_failure(e)),
            }
        } else {
            // Ground the guards over the current state, then enumerate the
            // parameter valuations that satisfy them.
            let mut guard = Pred::and(event.guards.clone());
            for (name, value) in state.iter() {
                guard = substitute(&guard, name, &value.to_expr());
            }
            let param_scope: Vec<_> = event
                .params
                .iter()
                .map(|(p, ty)| {
                    let ty = ty.clone().expect("typechecking annotates parameters");
                    (p.clone(), ty)
                })
                .collect();
            let room = match cap {
                Some(c) => c.saturating_sub(out.len()),
                None => usize::MAX,
            };
            if room == 0 {
                truncated = true;
                break 'events;
            }
            let cfg = SolveConfig {
                maxint,
                ..SolveConfig::default()
            };
            let (models, outcome, stats) =
                solve_all(&guard, &param_scope, &tm.machine.sorts, cfg, room);
            truncated |= stats.clipped;
            match outcome {
                SolveOutcome::Unsat => {}
                SolveOutcome::Sat(_) => truncated = true,
                SolveOutcome::Unknown(cause) => return Err(cause.into()),
                SolveOutcome::WdError(e) => return Err(eval_failure(e)),
            }
            models
        };

        for params in firings {
            if cap.is_some_and(|c| out.len() >= c) {
                truncated = true;
                break 'events;
            }
            // All right-hand sides are evaluated in the pre-state, then
            // assigned at once.
            let mut env = state.clone();
            for (name, value) in params.iter() {
                env.insert(name.clone(), value.clone());
            }
            let mut next = state.clone();
            for assign in &event.actions {
                let value = eval_expr(&assign.rhs, &env, &ctx).map_err(eval_failure)?;
                next.insert(assign.var.clone(), value);
            }
            out.push(TraceStep {
                event: event.name.clone(),
                params,
                state: next,
            });
        }
    }
    Ok((out, truncated))
}

/// Search the reachable states for one with no outgoing transition.
///
/// Deadlock states failing the goal predicate are passed over silently; the
/// sweep is exhaustive only if neither the state budget, the initial-state
/// cap, nor an out-degree cap truncated anything.
pub fn model_check(tm: &TypedMachine, opts: &McOptions) -> McReport {
    let max_states = opts.max_states.max(1);
    let ctx = EvalCtx::new(&tm.machine.sorts, opts.maxint);

    let mut report = McReport {
        result: McResult::NoDeadlockExhausted { states_visited: 0 },
        states_visited: 0,
        truncated: false,
        invariant_warnings: Vec::new(),
        trace_lines: Vec::new(),
    };

    let (roots, roots_truncated) = match initial_states(tm, max_states, opts.maxint) {
        Ok(r) => r,
        Err(cause) => {
            report.result = McResult::Error {
                cause,
                trace: Vec::new(),
            };
            return report;
        }
    };
    report.truncated |= roots_truncated;

    let mut nodes: Vec<Node> = Vec::new();
    let mut visited: BTreeMap<Valuation, usize> = BTreeMap::new();
    let mut frontier: VecDeque<usize> = VecDeque::new();
    let mut overflowed = false;
    for state in roots {
        if visited.len() >= max_states {
            overflowed = true;
            break;
        }
        if visited.contains_key(&state) {
            continue;
        }
        let idx = nodes.len();
        visited.insert(state.clone(), idx);
        nodes.push(Node {
            state,
            parent: None,
            event: tm.machine.init.name.clone(),
            params: Valuation::new(),
        });
        frontier.push_back(idx);
    }

    let mut warned: BTreeSet<String> = BTreeSet::new();
    while let Some(idx) = match opts.order {
        SearchOrder::Bfs => frontier.pop_front(),
        SearchOrder::Dfs => frontier.pop_back(),
    } {
        let state = nodes[idx].state.clone();
        warn_broken_invariants(tm, &state, &ctx, &mut warned, &mut report.invariant_warnings);
        if opts.trace && report.trace_lines.len() < TRACE_LIMIT {
            report.trace_lines.push(format!("expand {state}"));
        }

        let (succs, truncated) = match successors(tm, &state, opts.max_outdegree, opts.maxint) {
            Ok(r) => r,
            Err(cause) => {
                report.states_visited = visited.len();
                report.result = McResult::Error {
                    cause,
                    trace: trace_to(&nodes, idx),
                };
                return report;
            }
        };
        report.truncated |= truncated;

        if succs.is_empty() {
            let wanted = match &opts.goal {
                None => Ok(true),
                Some(goal) => eval_pred(goal, &state, &ctx),
            };
            match wanted {
                Ok(true) => {
                    report.states_visited = visited.len();
                    report.result = McResult::DeadlockFound {
                        trace: trace_to(&nodes, idx),
                        state,
                    };
                    return report;
                }
                Ok(false) => {}
                Err(e) => {
                    report.states_visited = visited.len();
                    report.result = McResult::Error {
                        cause: eval_failure(e),
                        trace: trace_to(&nodes, idx),
                    };
                    return report;
                }
            }
        }

        for step in succs {
            if opts.trace && report.trace_lines.len() < TRACE_LIMIT {
                report.trace_lines.push(format!(
                    "  {} ({}) -> {}",
                    step.event, step.params, step.state
                ));
            }
            if visited.contains_key(&step.state) {
                continue;
            }
            if visited.len() >= max_states {
                overflowed = true;
                break;
            }
            let child = nodes.len();
            visited.insert(step.state.clone(), child);
            nodes.push(Node {
                state: step.state,
                parent: Some(idx),
                event: step.event,
                params: step.params,
            });
            frontier.push_back(child);
        }
    }

    report.states_visited = visited.len();
    report.result = if overflowed || report.truncated {
        McResult::NoDeadlockWithin {
            states_visited: visited.len(),
        }
    } else {
        McResult::NoDeadlockExhausted {
            states_visited: visited.len(),
        }
    };
    report
}

/// The event sequence from a root to `idx`, initialisation step first.
fn trace_to(nodes: &[Node], idx: usize) -> Vec<TraceStep> {
    let mut steps = Vec::new();
    let mut cursor = Some(idx);
    while let Some(i) = cursor {
        let node = &nodes[i];
        steps.push(TraceStep {
            event: node.event.clone(),
            params: node.params.clone(),
            state: node.state.clone(),
        });
        cursor = node.parent;
    }
    steps.reverse();
    steps
}

/// Check every invariant in `state`, recording one warning per label the
/// first time it fails (or cannot be evaluated). Deadlock search continues
/// either way; proving invariants is a separate activity.
fn warn_broken_invariants(
    tm: &TypedMachine,
    state: &Valuation,
    ctx: &EvalCtx,
    warned: &mut BTreeSet<String>,
    warnings: &mut Vec<String>,
) {
    for clause in &tm.machine.invariants {
        if warned.contains(&clause.label) {
            continue;
        }
        let complaint = match eval_pred(&clause.pred, state, ctx) {
            Ok(true) => continue,
            Ok(false) => format!("invariant `{}` fails in reachable state {state}", clause.label),
            Err(e) => format!("invariant `{}` cannot be evaluated: {e}", clause.label),
        };
        warned.insert(clause.label.clone());
        warnings.push(complaint);
    }
}

/// A kernel or evaluator failure, folded into the inconclusive verdict: a
/// well-definedness error keeps the offending expression, anything else
/// (overflow, materialization limits) is reported by its message.
fn eval_failure(e: EvalError) -> Inconclusive {
    match &e {
        EvalError::WellDefinedness { expr } => {
            Inconclusive::IllDefined(crate::model::print_expr(expr))
        }
        other => Inconclusive::TooWide(other.to_string()),
    }
}

impl From<crate::kernel::UnknownCause> for Inconclusive {
    fn from(cause: crate::kernel::UnknownCause) -> Inconclusive {
        match cause {
            crate::kernel::UnknownCause::Budget => Inconclusive::Budget,
            crate::kernel::UnknownCause::TooWide(w) => Inconclusive::TooWide(w),
            crate::kernel::UnknownCause::Validation => {
                Inconclusive::Validation("solver model rejected".into())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_machine, parse_pred, typecheck, Value};
    use crate::testgen::{counting_source, minset_source, scheduler_source, MinSetVariant};

    fn machine(src: &str) -> TypedMachine {
        typecheck(parse_machine(src).unwrap()).unwrap()
    }

    fn val(state: &Valuation, name: &str) -> Value {
        state.get(name).cloned().unwrap_or_else(|| panic!("no `{name}` in {state:?}"))
    }

    #[test]
    fn initial_states_fix_the_constants() {
        let tm = machine(&minset_source(MinSetVariant::Original));
        let (states, truncated) = initial_states(&tm, 1_000, 7).unwrap();
        // One state per nonempty subset of 0 .. 3.
        assert_eq!(states.len(), 15);
        assert!(!truncated);
        for state in &states {
            let n = val(state, "N");
            let mut expected = n.as_set().unwrap().clone();
            expected.insert(Value::Int(3));
            assert_eq!(val(state, "s"), Value::Set(expected));
            assert_eq!(val(state, "min"), Value::Int(3));
            assert_eq!(val(state, "z"), Value::Int(4));
        }
    }

    #[test]
    fn unsatisfiable_axioms_leave_no_initial_state() {
        let tm = machine(
            "MACHINE Stuck\n\
             CONSTANTS k\n\
             AXIOMS\n  axm1: k : 0 .. 2 ;\n  axm2: k < 0\n\
             VARIABLES x\n\
             INVARIANTS\n  inv1: x : 0 .. 1\n\
             EVENTS\n\
             INITIALISATION = BEGIN x := 0 END\n\
             tick = WHEN x = 0 THEN x := 1 END\n\
             END\n",
        );
        let (states, truncated) = initial_states(&tm, 1_000, 7).unwrap();
        assert!(states.is_empty());
        assert!(!truncated);
        let report = model_check(&tm, &McOptions::default());
        assert_eq!(
            report.result,
            McResult::NoDeadlockExhausted { states_visited: 0 }
        );
    }

    #[test]
    fn no_constants_means_one_initial_state() {
        let tm = machine(&counting_source());
        let (states, _) = initial_states(&tm, 1_000, 1023).unwrap();
        assert_eq!(states.len(), 1);
        assert_eq!(val(&states[0], "Counter"), Value::Int(0));
    }

    #[test]
    fn parameters_enumerate_within_their_guards() {
        let tm = machine(&minset_source(MinSetVariant::Original));
        let mut state = Valuation::new();
        state.insert("N", Value::Set((0..=3).map(Value::Int).collect()));
        state.insert("s", Value::Set((0..=3).map(Value::Int).collect()));
        state.insert("min", Value::Int(3));
        state.insert("z", Value::Int(4));
        let (succs, truncated) = successors(&tm, &state, None, 7).unwrap();
        assert!(!truncated);
        // Only `acc` can fire, once per element below the current minimum.
        let mut xs: Vec<i64> = succs
            .iter()
            .map(|s| {
                assert_eq!(s.event, "acc");
                s.params.get("x").and_then(Value::as_int).unwrap()
            })
            .collect();
        xs.sort_unstable();
        assert_eq!(xs, vec![0, 1, 2]);
    }

    #[test]
    fn single_element_set_disables_everything() {
        let tm = machine(&minset_source(MinSetVariant::Original));
        let mut state = Valuation::new();
        state.insert("N", Value::Set([Value::Int(0), Value::Int(3)].into()));
        state.insert("s", Value::Set([Value::Int(0)].into()));
        state.insert("min", Value::Int(0));
        state.insert("z", Value::Int(4));
        let (succs, _) = successors(&tm, &state, None, 7).unwrap();
        assert!(succs.is_empty(), "{succs:?}");
    }

    #[test]
    fn parameterless_true_guard_fires_exactly_once() {
        let tm = machine(&counting_source());
        let mut state = Valuation::new();
        state.insert("Counter", Value::Int(0));
        let (succs, _) = successors(&tm, &state, None, 1023).unwrap();
        assert_eq!(succs.len(), 1);
        assert_eq!(succs[0].event, "step");
        assert_eq!(val(&succs[0].state, "Counter"), Value::Int(1));
    }

    /// Replaying the trace through [`successors`] must land exactly on the
    /// reported deadlock state.
    fn assert_trace_replays(tm: &TypedMachine, trace: &[TraceStep], state: &Valuation) {
        let (roots, _) = initial_states(tm, usize::MAX, 1023).unwrap();
        assert!(roots.contains(&trace[0].state), "trace does not start initially");
        let mut current = trace[0].state.clone();
        for step in &trace[1..] {
            let (succs, _) = successors(tm, &current, None, 1023).unwrap();
            let matched = succs
                .iter()
                .find(|s| s.event == step.event && s.params == step.params)
                .unwrap_or_else(|| panic!("step {step:?} is not a transition of {current:?}"));
            assert_eq!(&matched.state, &step.state);
            current = step.state.clone();
        }
        assert_eq!(&current, state);
        let (succs, _) = successors(tm, &current, None, 1023).unwrap();
        assert!(succs.is_empty(), "reported deadlock state has successors");
    }

    #[test]
    fn original_machine_deadlocks_on_a_singleton() {
        let tm = machine(&minset_source(MinSetVariant::Original));
        let report = model_check(&tm, &McOptions::default());
        let McResult::DeadlockFound { trace, state } = &report.result else {
            panic!("expected a deadlock, got {:?}", report.result);
        };
        assert_eq!(val(state, "s").as_set().unwrap().len(), 1);
        assert_trace_replays(&tm, trace, state);
        assert!(report.invariant_warnings.is_empty(), "{:?}", report.invariant_warnings);
    }

    #[test]
    fn fixed_guard_machine_never_deadlocks_reachably() {
        for variant in [MinSetVariant::GuardFixed, MinSetVariant::WithMinInvariant] {
            let tm = machine(&minset_source(variant));
            let report = model_check(&tm, &McOptions::default());
            assert!(
                matches!(report.result, McResult::NoDeadlockExhausted { .. }),
                "{variant:?}: {:?}",
                report.result
            );
        }
    }

    #[test]
    fn scheduler_state_space_is_fully_swept() {
        let tm = machine(&scheduler_source(2));
        let report = model_check(&tm, &McOptions::default());
        // Each process is idle, ready, or active with at most one active:
        // 2^2 states with none active plus 2 * 2^1 with one active.
        assert_eq!(
            report.result,
            McResult::NoDeadlockExhausted { states_visited: 8 }
        );
    }

    #[test]
    fn state_budget_cuts_the_sweep_short() {
        let tm = machine(&counting_source());
        let report = model_check(
            &tm,
            &McOptions {
                max_states: 3,
                ..McOptions::default()
            },
        );
        assert_eq!(
            report.result,
            McResult::NoDeadlockWithin { states_visited: 3 }
        );
    }

    #[test]
    fn outdegree_cap_downgrades_an_exhausted_sweep() {
        let tm = machine(&scheduler_source(2));
        let report = model_check(
            &tm,
            &McOptions {
                max_outdegree: Some(1),
                ..McOptions::default()
            },
        );
        assert!(
            matches!(report.result, McResult::NoDeadlockWithin { .. }),
            "{:?}",
            report.result
        );
        assert!(report.truncated);
    }

    #[test]
    fn saturated_counter_is_the_only_deadlock() {
        let tm = machine(&counting_source());
        let report = model_check(&tm, &McOptions::default());
        let McResult::DeadlockFound { state, trace } = &report.result else {
            panic!("expected a deadlock, got {:?}", report.result);
        };
        assert_eq!(val(state, "Counter"), Value::Int(10));
        assert_trace_replays(&tm, trace, state);
    }

    #[test]
    fn goal_passes_over_unwanted_deadlocks() {
        let tm = machine(&counting_source());
        let goal = tm.check_goal(parse_pred("Counter = 5").unwrap()).unwrap();
        let report = model_check(
            &tm,
            &McOptions {
                goal: Some(goal),
                ..McOptions::default()
            },
        );
        // Counter = 5 has successors, so the only deadlock (at 10) is
        // filtered out and the sweep completes.
        assert_eq!(
            report.result,
            McResult::NoDeadlockExhausted { states_visited: 11 }
        );
    }

    #[test]
    fn division_reached_by_execution_stops_the_search() {
        let tm = machine(
            "MACHINE Div\n\
             VARIABLES x, y\n\
             INVARIANTS\n  inv1: x : 0 .. 4 ;\n  inv2: y : 0 .. 4\n\
             EVENTS\n\
             INITIALISATION = BEGIN x := 1 || y := 0 END\n\
             shift = WHEN x / y = 1 THEN x := y END\n\
             END\n",
        );
        let report = model_check(&tm, &McOptions::default());
        let McResult::Error { cause, trace } = &report.result else {
            panic!("expected an error, got {:?}", report.result);
        };
        assert!(matches!(cause, Inconclusive::IllDefined(a) if a.contains('/')), "{cause}");
        assert_eq!(trace.len(), 1, "error should strike at the initial state");
    }

    #[test]
    fn unreachable_division_is_no_obstacle() {
        // The same guard shape is harmless while execution keeps y nonzero.
        let tm = machine(&crate::testgen::ratio_source());
        let report = model_check(&tm, &McOptions::default());
        assert_eq!(
            report.result,
            McResult::NoDeadlockExhausted { states_visited: 1 }
        );
    }

    #[test]
    fn breadth_first_traces_are_reproducible() {
        let tm = machine(&minset_source(MinSetVariant::Original));
        let a = model_check(&tm, &McOptions::default());
        let b = model_check(&tm, &McOptions::default());
        assert_eq!(a, b);
    }

    #[test]
    fn depth_first_finds_the_same_deadlock_existence() {
        let tm = machine(&minset_source(MinSetVariant::Original));
        let report = model_check(
            &tm,
            &McOptions {
                order: SearchOrder::Dfs,
                ..McOptions::default()
            },
        );
        let McResult::DeadlockFound { trace, state } = &report.result else {
            panic!("expected a deadlock, got {:?}", report.result);
        };
        assert_trace_replays(&tm, trace, state);
    }

    #[test]
    fn broken_invariants_warn_but_do_not_stop() {
        let tm = machine(
            "MACHINE Leak\n\
             VARIABLES x\n\
             INVARIANTS\n  inv1: x : 0 .. 2\n\
             EVENTS\n\
             INITIALISATION = BEGIN x := 0 END\n\
             grow = WHEN x < 5 THEN x := x + 1 END\n\
             END\n",
        );
        let report = model_check(&tm, &McOptions::default());
        // Execution runs x up to 5, straight past the invariant bound.
        let McResult::DeadlockFound { state, .. } = &report.result else {
            panic!("expected a deadlock, got {:?}", report.result);
        };
        assert_eq!(val(state, "x"), Value::Int(5));
        assert_eq!(report.invariant_warnings.len(), 1);
        assert!(report.invariant_warnings[0].contains("inv1"));
    }
}
