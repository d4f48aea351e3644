//! Differential check of the rewriter against the ground evaluator.
//!
//! Simplification must be observationally invisible: on every valuation the
//! rewritten predicate evaluates to the same truth value as the
//! original, and well-definedness errors are neither introduced nor erased.
//! Resource-limit errors (unbounded quantifier ranges, oversized sets) are
//! the one allowed asymmetry — rewriting can remove the offending subterm —
//! so samples that hit them on either side are skipped.

use bdead_core::model::{eval_pred, print_pred, EvalCtx, EvalError, Pred, Valuation};
use bdead_core::simplify::{simplify, Facts};
use bdead_core::testgen::{all_valuations, PredGen, PredGenConfig};

const MAXINT: i64 = 3;

/// What a predicate observably does on one valuation.
#[derive(Debug, PartialEq)]
enum Observed {
    Truth(bool),
    IllDefined,
    ResourceLimit,
}

fn observe(p: &Pred, v: &Valuation, ctx: &EvalCtx) -> Observed {
    match eval_pred(p, v, ctx) {
        Ok(b) => Observed::Truth(b),
        Err(EvalError::WellDefinedness { .. }) => Observed::IllDefined,
        Err(_) => Observed::ResourceLimit,
    }
}

#[test]
fn rewriting_preserves_truth_and_well_definedness_everywhere() {
    let cfg = PredGenConfig {
        maxint: MAXINT,
        division: true,
        ..PredGenConfig::default()
    };
    let mut checked = 0u64;
    let mut changed = 0u32;
    for seed in 0..1000u64 {
        let mut gen = PredGen::new(seed, cfg);
        let p = gen.pred();
        let scope = gen.scope().to_vec();
        let sorts = gen.sorts().to_vec();

        let mut facts = Facts::new(MAXINT);
        facts.add_sorts(&sorts);
        let q = simplify(&p, &facts);
        if q != p {
            changed += 1;
        }

        let ctx = EvalCtx::new(&sorts, MAXINT);
        let mut valuations = all_valuations(&scope, &sorts, -MAXINT..=MAXINT);
        // Keep the per-predicate work bounded without losing determinism.
        if valuations.len() > 2048 {
            let stride = valuations.len() / 1024;
            valuations = valuations.into_iter().step_by(stride).collect();
        }
        for v in &valuations {
            let before = observe(&p, v, &ctx);
            let after = observe(&q, v, &ctx);
            if before == Observed::ResourceLimit || after == Observed::ResourceLimit {
                continue;
            }
            assert_eq!(
                before,
                after,
                "seed {seed}: `{}` rewrote to `{}` but {v:?} sees {before:?} vs {after:?}",
                print_pred(&p),
                print_pred(&q),
            );
            checked += 1;
        }
    }
    assert!(checked > 100_000, "only {checked} comparisons ran");
    assert!(changed >= 200, "only {changed} predicates were rewritten at all");
}
