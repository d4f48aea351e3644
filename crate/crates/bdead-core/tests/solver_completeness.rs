//! Differential check of the solver against exhaustive enumeration.
//!
//! Over domains small enough to enumerate, the solver must return a
//! definite verdict for every generated predicate and that verdict must
//! match brute force exactly: `Sat` whenever some valuation satisfies the
//! predicate (and the reported model must check out under the evaluator),
//! `Unsat` whenever none does. Budgets are unlimited and domains are well
//! under the expansion threshold, so `Unknown` is a failure here.

use bdead_core::kernel::{solve, SolveConfig, SolveOutcome};
use bdead_core::model::{eval_pred, print_pred, EvalCtx};
use bdead_core::testgen::{all_valuations, PredGen, PredGenConfig};

const MAXINT: i64 = 3;

#[test]
fn solver_agrees_with_enumeration_on_random_predicates() {
    let cfg = PredGenConfig {
        maxint: MAXINT,
        division: false,
        ..PredGenConfig::default()
    };
    let mut sat = 0u32;
    let mut unsat = 0u32;
    for seed in 0..1000u64 {
        let mut gen = PredGen::new(seed, cfg);
        let p = gen.pred();
        let scope = gen.scope().to_vec();
        let sorts = gen.sorts().to_vec();

        let ctx = EvalCtx::new(&sorts, MAXINT);
        let witness = all_valuations(&scope, &sorts, -MAXINT..=MAXINT)
            .into_iter()
            .find(|v| {
                eval_pred(&p, v, &ctx).unwrap_or_else(|e| {
                    panic!("seed {seed}: evaluation failed on `{}`: {e}", print_pred(&p))
                })
            });

        let solve_cfg = SolveConfig {
            maxint: MAXINT,
            ..SolveConfig::default()
        };
        let (outcome, _) = solve(&p, &scope, &sorts, solve_cfg);
        match (&outcome, &witness) {
            (SolveOutcome::Sat(model), Some(_)) => {
                assert_eq!(
                    eval_pred(&p, model, &ctx),
                    Ok(true),
                    "seed {seed}: reported model does not satisfy `{}`",
                    print_pred(&p)
                );
                sat += 1;
            }
            (SolveOutcome::Unsat, None) => unsat += 1,
            _ => panic!(
                "seed {seed}: solver said {outcome:?} but enumeration found {witness:?} for `{}`",
                print_pred(&p)
            ),
        }
    }
    // The generator should not be lopsided; both verdicts must be exercised.
    assert!(sat >= 100, "only {sat} satisfiable predicates in the sample");
    assert!(unsat >= 100, "only {unsat} unsatisfiable predicates in the sample");
}
