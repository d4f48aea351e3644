//! Differential check of the constraint-based deadlock verdict against
//! brute-force enumeration of the whole bounded state space.
//!
//! The generated machines pin every integer variable to `0 .. 3` and every
//! set variable under a four-element universe, so all states allowed by the
//! axioms and invariants can be enumerated outright. A state deadlocks when
//! it satisfies the axioms and invariants and every enabling predicate is
//! false; the checker must agree exactly, and any state it exhibits must
//! satisfy the same formula it was asked about.

use std::time::Duration;

use bdead_core::model::{eval_pred, typecheck, EvalCtx, Pred, TypedMachine, Valuation};
use bdead_core::testgen::{all_valuations, random_machine};
use bdead_core::{check_deadlock, CbcResult, CheckOptions};

const MAXINT: i64 = 3;

/// `A ∧ I ∧ ¬G_e ∧ …`, assembled directly from the machine with none of the
/// checker's rewriting, ordering, or partitioning.
fn deadlock_description(tm: &TypedMachine) -> Pred {
    let mut conjuncts = Vec::new();
    for clause in tm.machine.axioms.iter().chain(&tm.machine.invariants) {
        conjuncts.push(clause.pred.clone());
    }
    for event in &tm.machine.events {
        conjuncts.push(Pred::Not(Box::new(tm.enabling_predicate(event))));
    }
    Pred::and(conjuncts)
}

fn brute_force_deadlock(tm: &TypedMachine, ctx: &EvalCtx) -> Option<Valuation> {
    let network = deadlock_description(tm);
    all_valuations(&tm.scope(), &tm.machine.sorts, 0..=MAXINT)
        .into_iter()
        .find(|v| {
            eval_pred(&network, v, ctx)
                .unwrap_or_else(|e| panic!("enumeration hit an evaluation error: {e}"))
        })
}

#[test]
fn verdicts_match_brute_force_on_random_machines() {
    for seed in 0..500u64 {
        let tm = typecheck(random_machine(seed)).unwrap();
        let ctx = EvalCtx::new(&tm.machine.sorts, MAXINT);
        let expected = brute_force_deadlock(&tm, &ctx);

        let opts = CheckOptions {
            maxint: MAXINT,
            ..CheckOptions::default()
        };
        let report = check_deadlock(&tm, &opts).unwrap();
        match &report.result {
            CbcResult::DeadlockFound(state, guards) => {
                assert!(
                    expected.is_some(),
                    "seed {seed}: checker found {state:?} but enumeration finds no deadlock"
                );
                let network = deadlock_description(&tm);
                assert_eq!(
                    eval_pred(&network, state, &ctx),
                    Ok(true),
                    "seed {seed}: reported state {state:?} fails the description"
                );
                assert!(
                    guards.iter().all(|g| !g.enabled),
                    "seed {seed}: guard table claims an enabled event in a deadlock"
                );
            }
            CbcResult::NoDeadlock { .. } => {
                assert_eq!(
                    expected, None,
                    "seed {seed}: checker missed a deadlock the enumeration found"
                );
            }
            CbcResult::Unknown(cause) => {
                panic!("seed {seed}: inconclusive on an exhaustively checkable machine: {cause}")
            }
        }
    }
}

/// Rewriting, conjunct ordering, partitioning, component dropping, and event
/// filtering are performance devices; switching them all off must never
/// change what the checker concludes.
#[test]
fn optimization_toggles_never_change_the_verdict() {
    for seed in 0..100u64 {
        let tm = typecheck(random_machine(seed)).unwrap();
        let tuned = CheckOptions {
            maxint: MAXINT,
            ..CheckOptions::default()
        };
        let plain = CheckOptions {
            maxint: MAXINT,
            filter_budget: Duration::ZERO,
            simplify: false,
            sort: false,
            partition: false,
            drop_irrelevant: false,
            ..CheckOptions::default()
        };
        let a = check_deadlock(&tm, &tuned).unwrap();
        let b = check_deadlock(&tm, &plain).unwrap();
        let kind = |r: &CbcResult| match r {
            CbcResult::DeadlockFound(..) => "deadlock",
            CbcResult::NoDeadlock { .. } => "no deadlock",
            CbcResult::Unknown(_) => "unknown",
        };
        assert_eq!(
            kind(&a.result),
            kind(&b.result),
            "seed {seed}: optimizations changed the verdict"
        );
    }
}
