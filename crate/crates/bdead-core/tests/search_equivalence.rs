//! Differential check of the explicit-state search against a direct
//! interpreter for the machine semantics.
//!
//! The oracle here shares nothing with the solver: initial states come from
//! filtering every candidate constant valuation through the axioms,
//! transitions from enumerating every parameter valuation against the
//! guards, all by ground evaluation. On machines whose variables and
//! parameters are pinned to four-value domains, the search must agree with
//! the oracle on whether a reachable deadlock exists, sweep exactly the
//! oracle's reachable set when it reports exhaustion, and produce traces
//! the oracle can replay.

use std::collections::{BTreeSet, VecDeque};

use bdead_core::model::{
    eval_expr, eval_pred, typecheck, EvalCtx, Pred, TypedMachine, Valuation,
};
use bdead_core::testgen::{all_valuations, random_machine};
use bdead_core::{
    check_deadlock, model_check, CbcResult, CheckOptions, McOptions, McResult, TraceStep,
};

const MAXINT: i64 = 7;

fn oracle_initials(tm: &TypedMachine, ctx: &EvalCtx) -> Vec<Valuation> {
    let const_scope: Vec<_> = tm
        .scope()
        .into_iter()
        .filter(|(n, _)| tm.machine.constants.contains(n))
        .collect();
    let axioms = Pred::and(tm.machine.axioms.iter().map(|c| c.pred.clone()).collect());
    let bases: Vec<Valuation> = if const_scope.is_empty() {
        vec![Valuation::new()]
    } else {
        all_valuations(&const_scope, &tm.machine.sorts, 0..=3)
            .into_iter()
            .filter(|v| eval_pred(&axioms, v, ctx).unwrap())
            .collect()
    };
    bases
        .into_iter()
        .map(|base| {
            let mut state = base.clone();
            for assign in &tm.machine.init.actions {
                state.insert(
                    assign.var.clone(),
                    eval_expr(&assign.rhs, &base, ctx).unwrap(),
                );
            }
            state
        })
        .collect()
}

fn oracle_successors(tm: &TypedMachine, state: &Valuation, ctx: &EvalCtx) -> Vec<TraceStep> {
    let mut out = Vec::new();
    for event in &tm.machine.events {
        let param_scope: Vec<_> = event
            .params
            .iter()
            .map(|(p, ty)| (p.clone(), ty.clone().unwrap()))
            .collect();
        let firings = if param_scope.is_empty() {
            vec![Valuation::new()]
        } else {
            all_valuations(&param_scope, &tm.machine.sorts, 0..=3)
        };
        let guard = Pred::and(event.guards.clone());
        for params in firings {
            let mut env = state.clone();
            for (name, value) in params.iter() {
                env.insert(name.clone(), value.clone());
            }
            if !eval_pred(&guard, &env, ctx).unwrap() {
                continue;
            }
            let mut next = state.clone();
            for assign in &event.actions {
                next.insert(assign.var.clone(), eval_expr(&assign.rhs, &env, ctx).unwrap());
            }
            out.push(TraceStep {
                event: event.name.clone(),
                params,
                state: next,
            });
        }
    }
    out
}

/// Breadth-first sweep by the oracle: the reachable set and one deadlock
/// state if any exists.
fn oracle_reachable(tm: &TypedMachine, ctx: &EvalCtx) -> (BTreeSet<Valuation>, Option<Valuation>) {
    let mut visited: BTreeSet<Valuation> = BTreeSet::new();
    let mut frontier: VecDeque<Valuation> = VecDeque::new();
    for state in oracle_initials(tm, ctx) {
        if visited.insert(state.clone()) {
            frontier.push_back(state);
        }
    }
    let mut deadlock = None;
    while let Some(state) = frontier.pop_front() {
        let succs = oracle_successors(tm, &state, ctx);
        if succs.is_empty() && deadlock.is_none() {
            deadlock = Some(state.clone());
        }
        for step in succs {
            if visited.insert(step.state.clone()) {
                frontier.push_back(step.state);
            }
        }
    }
    (visited, deadlock)
}

fn assert_oracle_replays(tm: &TypedMachine, ctx: &EvalCtx, trace: &[TraceStep], state: &Valuation) {
    assert!(
        oracle_initials(tm, ctx).contains(&trace[0].state),
        "trace does not start at an initial state"
    );
    let mut current = trace[0].state.clone();
    for step in &trace[1..] {
        let succs = oracle_successors(tm, &current, ctx);
        let matched = succs
            .iter()
            .find(|s| s.event == step.event && s.params == step.params && s.state == step.state)
            .unwrap_or_else(|| panic!("step {step:?} is not a transition of {current}"));
        current = matched.state.clone();
    }
    assert_eq!(&current, state, "trace does not end at the reported state");
    assert!(
        oracle_successors(tm, &current, ctx).is_empty(),
        "reported deadlock state has transitions"
    );
}

#[test]
fn search_agrees_with_direct_interpretation() {
    for seed in 0..200u64 {
        let tm = typecheck(random_machine(seed)).unwrap();
        let ctx = EvalCtx::new(&tm.machine.sorts, MAXINT);
        let (reachable, oracle_deadlock) = oracle_reachable(&tm, &ctx);

        let opts = McOptions {
            maxint: MAXINT,
            ..McOptions::default()
        };
        let report = model_check(&tm, &opts);
        match &report.result {
            McResult::DeadlockFound { trace, state } => {
                assert!(
                    oracle_deadlock.is_some(),
                    "seed {seed}: search deadlocked at {state} but the oracle finds none"
                );
                assert_oracle_replays(&tm, &ctx, trace, state);
            }
            McResult::NoDeadlockExhausted { states_visited } => {
                assert_eq!(
                    oracle_deadlock, None,
                    "seed {seed}: search missed a reachable deadlock"
                );
                assert_eq!(
                    *states_visited,
                    reachable.len(),
                    "seed {seed}: exhausted sweep visited a different state count"
                );
            }
            other => panic!("seed {seed}: unexpected result on a tiny machine: {other:?}"),
        }
    }
}

/// An exhaustive search proving no *reachable* deadlock does not contradict
/// the constraint checker exhibiting one: the state it found merely has to
/// satisfy the axioms and invariants without being reachable.
#[test]
fn constraint_deadlocks_beyond_reachability_satisfy_the_invariants() {
    let mut disagreements = 0;
    for seed in 0..200u64 {
        let tm = typecheck(random_machine(seed)).unwrap();
        let ctx = EvalCtx::new(&tm.machine.sorts, MAXINT);

        let mc = model_check(
            &tm,
            &McOptions {
                maxint: MAXINT,
                ..McOptions::default()
            },
        );
        if !matches!(mc.result, McResult::NoDeadlockExhausted { .. }) || mc.truncated {
            continue;
        }
        let cbc = check_deadlock(
            &tm,
            &CheckOptions {
                maxint: MAXINT,
                ..CheckOptions::default()
            },
        )
        .unwrap();
        let CbcResult::DeadlockFound(state, _) = &cbc.result else {
            continue;
        };
        disagreements += 1;
        let described = Pred::and(
            tm.machine
                .axioms
                .iter()
                .chain(&tm.machine.invariants)
                .map(|c| c.pred.clone())
                .collect(),
        );
        assert_eq!(
            eval_pred(&described, state, &ctx),
            Ok(true),
            "seed {seed}: unreachable deadlock {state} violates the description"
        );
    }
    // The generator makes such unreachable-but-described deadlocks routine;
    // the assertion above must actually have been exercised.
    assert!(disagreements > 0, "no machine exercised the cross-check");
}
