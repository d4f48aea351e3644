//! Machine language: syntax trees, parser, printer, typechecker, evaluator.

mod ast;
mod eval;
mod lex;
mod parse;
mod print;
mod typecheck;

pub use ast::{
    ArithOp, Assign, Clause, CmpOp, Event, Expr, Ident, Machine, Pred, SortDecl, Span, Ty,
};
pub use eval::{eval_expr, eval_pred, EvalCtx, EvalError, Quant, Valuation, Value};
pub(crate) use eval::pin_source;
pub use lex::{lex, Token, TokenKind};
pub use parse::{parse_machine, parse_pred, ParseError};
pub use print::{print_expr, print_machine, print_pred};
pub use typecheck::{typecheck, TypeError, TypedMachine};

use std::collections::BTreeSet;

/// Free identifiers of a predicate (bound names are excluded).
pub fn free_vars(p: &Pred) -> BTreeSet<Ident> {
    let mut out = BTreeSet::new();
    collect_pred(p, &mut Vec::new(), &mut out);
    out
}

/// Free identifiers of an expression.
pub fn free_vars_expr(e: &Expr) -> BTreeSet<Ident> {
    let mut out = BTreeSet::new();
    collect_expr(e, &mut Vec::new(), &mut out);
    out
}

fn collect_pred(p: &Pred, bound: &mut Vec<Ident>, out: &mut BTreeSet<Ident>) {
    match p {
        Pred::True | Pred::False => {}
        Pred::Cmp(_, a, b) => {
            collect_expr(a, bound, out);
            collect_expr(b, bound, out);
        }
        Pred::Mem(a, b) | Pred::NotMem(a, b) | Pred::Subset(a, b) => {
            collect_expr(a, bound, out);
            collect_expr(b, bound, out);
        }
        Pred::And(ps) | Pred::Or(ps) => {
            for q in ps {
                collect_pred(q, bound, out);
            }
        }
        Pred::Imp(a, b) | Pred::Iff(a, b) => {
            collect_pred(a, bound, out);
            collect_pred(b, bound, out);
        }
        Pred::Not(q) => collect_pred(q, bound, out),
        Pred::Exists(x, _, body) | Pred::Forall(x, _, body) => {
            bound.push(x.clone());
            collect_pred(body, bound, out);
            bound.pop();
        }
    }
}

fn collect_expr(e: &Expr, bound: &mut Vec<Ident>, out: &mut BTreeSet<Ident>) {
    match e {
        Expr::Int(_) | Expr::Bool(_) | Expr::EmptySet => {}
        Expr::Ident(x) => {
            if !bound.iter().any(|b| b == x) {
                out.insert(x.clone());
            }
        }
        Expr::Arith(_, a, b)
        | Expr::Interval(a, b)
        | Expr::Union(a, b)
        | Expr::Inter(a, b)
        | Expr::Diff(a, b) => {
            collect_expr(a, bound, out);
            collect_expr(b, bound, out);
        }
        Expr::SetLit(es) => {
            for x in es {
                collect_expr(x, bound, out);
            }
        }
        Expr::Card(a) => collect_expr(a, bound, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_vars_skip_bound_names() {
        let p = parse_pred("#x.(x : s & x < min)").unwrap();
        let fv = free_vars(&p);
        assert!(fv.contains("s") && fv.contains("min") && !fv.contains("x"));
    }

    #[test]
    fn free_vars_sees_shadowed_outer_use() {
        // The `x` in `x < 3` is bound; the outer comparison uses a free `y`.
        let p = parse_pred("y = 1 & !x.(x < 3)").unwrap();
        let fv = free_vars(&p);
        assert_eq!(fv.into_iter().collect::<Vec<_>>(), vec!["y".to_string()]);
    }
}
