//! Predicate simplification ahead of constraint solving.
//!
//! The rewrites here eliminate existential quantifiers and trivial
//! connectives so that the solver sees fewer suspended goals. Everything is
//! equivalence-preserving under the evaluator's three-valued semantics
//! (`true` / `false` / well-definedness error): a rewrite either keeps the
//! outcome identical or removes a resource limit the evaluator would have
//! hit (for example an unbounded set-typed binder), never the reverse.
//! Rules that duplicate or reorder subterms therefore fire only when the
//! affected subterm cannot raise a well-definedness error.
//!
//! The quantifier rules:
//!
//! * `#x.(x : S)` becomes `S /= {}` when `x` does not occur in `S`.
//! * `S /= {}` becomes `TRUE` when the ambient [`Facts`] already force `S`
//!   to be non-empty.
//! * `#x.(x > E)` (or any half-open comparison) becomes `TRUE` when a
//!   witness is guaranteed to exist inside the global integer bounds.
//! * `#x.(... & x = E & ...)` substitutes `E` for `x` and drops the binder
//!   (the one-point rule). For integer binders this additionally requires
//!   the static bounds of `E` to fit the global integer range, because
//!   quantified integers only range over `-maxint ..= maxint`.
//! * Conjuncts that do not mention the binder are hoisted out of the body.
//!
//! Rewriting runs innermost-first to a fixpoint. Termination: each rule
//! strictly decreases the triple (number of quantifiers, total size of
//! subterms under quantifiers, formula size) in lexicographic order —
//! binder-eliminating rules shrink the first component, hoisting shrinks
//! the second without touching the first, and connective folding shrinks
//! the third without growing the others.

use crate::model::{free_vars, free_vars_expr, Expr, Ident, Pred, SortDecl, TypedMachine};
use crate::model::{ArithOp, CmpOp, Ty};
use std::collections::{BTreeMap, BTreeSet};

/// Context assumed to hold while simplifying: sets known to be non-empty,
/// static integer bounds for identifiers, and the global integer bound.
///
/// Facts must come from *outside* the predicate being simplified (machine
/// axioms and invariants, sort declarations); the simplifier never mines
/// the predicate itself for facts.
#[derive(Debug, Clone)]
pub struct Facts {
    non_empty: BTreeSet<Expr>,
    lower: BTreeMap<Ident, i64>,
    upper: BTreeMap<Ident, i64>,
    pub maxint: i64,
}

impl Facts {
    pub fn new(maxint: i64) -> Facts {
        Facts {
            non_empty: BTreeSet::new(),
            lower: BTreeMap::new(),
            upper: BTreeMap::new(),
            maxint,
        }
    }

    /// Facts holding in every reachable context of the machine: sort
    /// carriers are non-empty by construction, and axioms plus invariants
    /// are assumed conjunct by conjunct.
    pub fn for_machine(tm: &TypedMachine, maxint: i64) -> Facts {
        let mut f = Facts::new(maxint);
        for sd in &tm.machine.sorts {
            f.add_sorts(std::slice::from_ref(sd));
        }
        for clause in tm.machine.axioms.iter().chain(&tm.machine.invariants) {
            f.assume(&clause.pred);
        }
        f
    }

    pub fn add_sorts(&mut self, sorts: &[SortDecl]) {
        for sd in sorts {
            self.non_empty.insert(Expr::Ident(sd.name.clone()));
        }
    }

    /// Absorb a predicate assumed to be true.
    pub fn assume(&mut self, p: &Pred) {
        match p {
            Pred::And(ps) => ps.iter().for_each(|q| self.assume(q)),
            Pred::Mem(x, s) => {
                self.non_empty.insert(s.clone());
                if let Expr::Ident(name) = x {
                    if let Some((lo, hi)) = literal_set_bounds(s) {
                        self.narrow(name, Some(lo), Some(hi));
                    }
                }
            }
            Pred::Cmp(CmpOp::Ne, a, b) => {
                if matches!(b, Expr::EmptySet) {
                    self.non_empty.insert(a.clone());
                }
                if matches!(a, Expr::EmptySet) {
                    self.non_empty.insert(b.clone());
                }
            }
            Pred::Cmp(op, a, b) => {
                let scalar = match (a, b) {
                    (Expr::Ident(n), Expr::Int(k)) => Some((*op, n, *k)),
                    (Expr::Int(k), Expr::Ident(n)) => Some((flip(*op), n, *k)),
                    _ => None,
                };
                if let Some((op, name, bound)) = scalar {
                    match op {
                        CmpOp::Eq => self.narrow(name, Some(bound), Some(bound)),
                        CmpOp::Le => self.narrow(name, None, Some(bound)),
                        CmpOp::Lt => self.narrow(name, None, Some(bound.saturating_sub(1))),
                        CmpOp::Ge => self.narrow(name, Some(bound), None),
                        CmpOp::Gt => self.narrow(name, Some(bound.saturating_add(1)), None),
                        CmpOp::Ne => {}
                    }
                    return;
                }
                // Non-scalar equalities can still certify non-emptiness:
                // `s = {1, 2}` and the like.
                if *op == CmpOp::Eq {
                    if is_literal_non_empty(b) {
                        self.non_empty.insert(a.clone());
                    }
                    if is_literal_non_empty(a) {
                        self.non_empty.insert(b.clone());
                    }
                }
                // `card(s) > 0` and friends.
                if let Some(s) = card_non_empty(*op, a, b) {
                    self.non_empty.insert(s.clone());
                }
            }
            _ => {}
        }
    }

    fn narrow(&mut self, name: &Ident, lo: Option<i64>, hi: Option<i64>) {
        if let Some(lo) = lo {
            let cur = self.lower.entry(name.clone()).or_insert(lo);
            *cur = (*cur).max(lo);
        }
        if let Some(hi) = hi {
            let cur = self.upper.entry(name.clone()).or_insert(hi);
            *cur = (*cur).min(hi);
        }
    }

    /// Is `e` certainly a non-empty set under these facts?
    pub fn is_non_empty(&self, e: &Expr) -> bool {
        if self.non_empty.contains(e) || is_literal_non_empty(e) {
            return true;
        }
        match e {
            Expr::Union(a, b) => self.is_non_empty(a) || self.is_non_empty(b),
            _ => false,
        }
    }

    /// Static interval `(lower, upper)` of an integer expression; `None`
    /// bounds mean unknown.
    pub fn bounds(&self, e: &Expr) -> (Option<i64>, Option<i64>) {
        match e {
            Expr::Int(n) => (Some(*n), Some(*n)),
            Expr::Ident(x) => (self.lower.get(x).copied(), self.upper.get(x).copied()),
            Expr::Card(_) => (Some(0), None),
            Expr::Arith(ArithOp::Add, a, b) => {
                let (la, ua) = self.bounds(a);
                let (lb, ub) = self.bounds(b);
                (add_opt(la, lb), add_opt(ua, ub))
            }
            Expr::Arith(ArithOp::Sub, a, b) => {
                let (la, ua) = self.bounds(a);
                let (lb, ub) = self.bounds(b);
                (sub_opt(la, ub), sub_opt(ua, lb))
            }
            Expr::Arith(ArithOp::Mul, a, b) => {
                let (la, ua) = self.bounds(a);
                let (lb, ub) = self.bounds(b);
                match (la, ua, lb, ub) {
                    (Some(la), Some(ua), Some(lb), Some(ub)) => {
                        let products = [
                            la as i128 * lb as i128,
                            la as i128 * ub as i128,
                            ua as i128 * lb as i128,
                            ua as i128 * ub as i128,
                        ];
                        (
                            Some(sat(*products.iter().min().unwrap())),
                            Some(sat(*products.iter().max().unwrap())),
                        )
                    }
                    _ => (None, None),
                }
            }
            _ => (None, None),
        }
    }
}

fn add_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    Some(sat(a? as i128 + b? as i128))
}

fn sub_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    Some(sat(a? as i128 - b? as i128))
}

fn sat(v: i128) -> i64 {
    v.clamp(i64::MIN as i128, i64::MAX as i128) as i64
}

fn flip(op: CmpOp) -> CmpOp {
    match op {
        CmpOp::Lt => CmpOp::Gt,
        CmpOp::Le => CmpOp::Ge,
        CmpOp::Gt => CmpOp::Lt,
        CmpOp::Ge => CmpOp::Le,
        other => other,
    }
}

/// Interval of an expression that denotes a literal integer set, if any.
fn literal_set_bounds(e: &Expr) -> Option<(i64, i64)> {
    match e {
        Expr::Interval(a, b) => match (a.as_ref(), b.as_ref()) {
            (Expr::Int(lo), Expr::Int(hi)) if lo <= hi => Some((*lo, *hi)),
            _ => None,
        },
        Expr::SetLit(es) => {
            let mut lo = i64::MAX;
            let mut hi = i64::MIN;
            for x in es {
                match x {
                    Expr::Int(n) => {
                        lo = lo.min(*n);
                        hi = hi.max(*n);
                    }
                    _ => return None,
                }
            }
            if es.is_empty() {
                None
            } else {
                Some((lo, hi))
            }
        }
        _ => None,
    }
}

/// Is `e` a set that is non-empty by its own shape?
fn is_literal_non_empty(e: &Expr) -> bool {
    match e {
        Expr::SetLit(es) => !es.is_empty(),
        Expr::Interval(a, b) => matches!(
            (a.as_ref(), b.as_ref()),
            (Expr::Int(lo), Expr::Int(hi)) if lo <= hi
        ),
        _ => false,
    }
}

/// If `op(a, b)` is a cardinality bound certifying non-emptiness
/// (`card(s) > 0`, `1 <= card(s)`, ...), return the set.
fn card_non_empty<'a>(op: CmpOp, a: &'a Expr, b: &'a Expr) -> Option<&'a Expr> {
    let (op, card_side, k) = match (a, b) {
        (Expr::Card(s), Expr::Int(k)) => (op, s.as_ref(), *k),
        (Expr::Int(k), Expr::Card(s)) => (flip(op), s.as_ref(), *k),
        _ => return None,
    };
    let holds = match op {
        CmpOp::Gt => k >= 0,
        CmpOp::Ge | CmpOp::Eq => k >= 1,
        _ => false,
    };
    holds.then_some(card_side)
}

/// Capture-avoiding substitution of `r` for the free identifier `x`.
pub fn substitute(p: &Pred, x: &Ident, r: &Expr) -> Pred {
    match p {
        Pred::True | Pred::False => p.clone(),
        Pred::Cmp(op, a, b) => Pred::Cmp(*op, substitute_expr(a, x, r), substitute_expr(b, x, r)),
        Pred::Mem(a, b) => Pred::Mem(substitute_expr(a, x, r), substitute_expr(b, x, r)),
        Pred::NotMem(a, b) => Pred::NotMem(substitute_expr(a, x, r), substitute_expr(b, x, r)),
        Pred::Subset(a, b) => Pred::Subset(substitute_expr(a, x, r), substitute_expr(b, x, r)),
        Pred::And(ps) => Pred::And(ps.iter().map(|q| substitute(q, x, r)).collect()),
        Pred::Or(ps) => Pred::Or(ps.iter().map(|q| substitute(q, x, r)).collect()),
        Pred::Imp(a, b) => Pred::Imp(
            Box::new(substitute(a, x, r)),
            Box::new(substitute(b, x, r)),
        ),
        Pred::Iff(a, b) => Pred::Iff(
            Box::new(substitute(a, x, r)),
            Box::new(substitute(b, x, r)),
        ),
        Pred::Not(q) => Pred::Not(Box::new(substitute(q, x, r))),
        Pred::Exists(y, ty, body) => {
            let (y, body) = freshen_binder(y, body, x, r);
            Pred::Exists(y, ty.clone(), Box::new(body))
        }
        Pred::Forall(y, ty, body) => {
            let (y, body) = freshen_binder(y, body, x, r);
            Pred::Forall(y, ty.clone(), Box::new(body))
        }
    }
}

/// Substitution under a binder `y`: stop if `y` shadows `x`, rename `y`
/// first if it would capture a free identifier of `r`.
fn freshen_binder(y: &Ident, body: &Pred, x: &Ident, r: &Expr) -> (Ident, Pred) {
    if y == x {
        return (y.clone(), body.clone());
    }
    if free_vars_expr(r).contains(y) {
        let mut avoid = free_vars_expr(r);
        avoid.extend(free_vars(body));
        avoid.insert(x.clone());
        let fresh = fresh_name(y, &avoid);
        let renamed = substitute(body, y, &Expr::Ident(fresh.clone()));
        return (fresh, substitute(&renamed, x, r));
    }
    (y.clone(), substitute(body, x, r))
}

fn fresh_name(base: &Ident, avoid: &BTreeSet<Ident>) -> Ident {
    if !avoid.contains(base) {
        return base.clone();
    }
    for i in 1.. {
        let cand = format!("{base}_{i}");
        if !avoid.contains(&cand) {
            return cand;
        }
    }
    unreachable!()
}

pub fn substitute_expr(e: &Expr, x: &Ident, r: &Expr) -> Expr {
    match e {
        Expr::Int(_) | Expr::Bool(_) | Expr::EmptySet => e.clone(),
        Expr::Ident(y) => {
            if y == x {
                r.clone()
            } else {
                e.clone()
            }
        }
        Expr::Arith(op, a, b) => Expr::Arith(
            *op,
            Box::new(substitute_expr(a, x, r)),
            Box::new(substitute_expr(b, x, r)),
        ),
        Expr::SetLit(es) => Expr::SetLit(es.iter().map(|y| substitute_expr(y, x, r)).collect()),
        Expr::Interval(a, b) => Expr::Interval(
            Box::new(substitute_expr(a, x, r)),
            Box::new(substitute_expr(b, x, r)),
        ),
        Expr::Union(a, b) => Expr::Union(
            Box::new(substitute_expr(a, x, r)),
            Box::new(substitute_expr(b, x, r)),
        ),
        Expr::Inter(a, b) => Expr::Inter(
            Box::new(substitute_expr(a, x, r)),
            Box::new(substitute_expr(b, x, r)),
        ),
        Expr::Diff(a, b) => Expr::Diff(
            Box::new(substitute_expr(a, x, r)),
            Box::new(substitute_expr(b, x, r)),
        ),
        Expr::Card(a) => Expr::Card(Box::new(substitute_expr(a, x, r))),
    }
}

/// Simplify `p` to a fixpoint under the given ambient facts.
pub fn simplify(p: &Pred, facts: &Facts) -> Pred {
    let mut cur = p.clone();
    loop {
        let next = pass(&cur, facts);
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

/// One innermost-first rewriting pass: children first, then this node.
fn pass(p: &Pred, facts: &Facts) -> Pred {
    let p = match p {
        Pred::True | Pred::False | Pred::Cmp(..) | Pred::Mem(..) | Pred::NotMem(..)
        | Pred::Subset(..) => p.clone(),
        Pred::And(ps) => Pred::And(ps.iter().map(|q| pass(q, facts)).collect()),
        Pred::Or(ps) => Pred::Or(ps.iter().map(|q| pass(q, facts)).collect()),
        Pred::Imp(a, b) => Pred::Imp(Box::new(pass(a, facts)), Box::new(pass(b, facts))),
        Pred::Iff(a, b) => Pred::Iff(Box::new(pass(a, facts)), Box::new(pass(b, facts))),
        Pred::Not(q) => Pred::Not(Box::new(pass(q, facts))),
        Pred::Exists(x, ty, body) => {
            Pred::Exists(x.clone(), ty.clone(), Box::new(pass(body, facts)))
        }
        Pred::Forall(x, ty, body) => {
            Pred::Forall(x.clone(), ty.clone(), Box::new(pass(body, facts)))
        }
    };
    rewrite_node(p, facts)
}

fn rewrite_node(p: Pred, facts: &Facts) -> Pred {
    match p {
        Pred::And(ps) => fold_and(ps),
        Pred::Or(ps) => fold_or(ps),
        Pred::Not(q) => match *q {
            Pred::True => Pred::False,
            Pred::False => Pred::True,
            Pred::Not(inner) => *inner,
            other => Pred::Not(Box::new(other)),
        },
        Pred::Imp(a, b) => match (*a, *b) {
            (Pred::False, _) => Pred::True,
            (Pred::True, b) => b,
            (a, Pred::True) if a.wd_safe() => Pred::True,
            (a, Pred::False) => Pred::Not(Box::new(a)),
            (a, b) => Pred::Imp(Box::new(a), Box::new(b)),
        },
        Pred::Iff(a, b) => match (*a, *b) {
            (Pred::True, b) => b,
            (a, Pred::True) => a,
            (Pred::False, b) => Pred::Not(Box::new(b)),
            (a, Pred::False) => Pred::Not(Box::new(a)),
            (a, b) => Pred::Iff(Box::new(a), Box::new(b)),
        },
        Pred::Cmp(CmpOp::Ne, a, b) => {
            // Known-non-empty sets: `S /= {}` is true outright.
            if matches!(b, Expr::EmptySet) && a.wd_safe() && facts.is_non_empty(&a) {
                return Pred::True;
            }
            if matches!(a, Expr::EmptySet) && b.wd_safe() && facts.is_non_empty(&b) {
                return Pred::True;
            }
            Pred::Cmp(CmpOp::Ne, a, b)
        }
        Pred::Exists(x, ty, body) => rewrite_exists(x, ty, *body, facts),
        other => other,
    }
}

/// Flatten, drop `TRUE` units, and cut the conjunction at the first `FALSE`.
/// The tail after a `FALSE` is never evaluated, so dropping it is exact; the
/// whole conjunction folds to `FALSE` only when the prefix cannot raise a
/// well-definedness error.
fn fold_and(ps: Vec<Pred>) -> Pred {
    let mut out = Vec::with_capacity(ps.len());
    for q in ps {
        match q {
            Pred::True => {}
            Pred::And(inner) => out.extend(inner),
            Pred::False => {
                out.push(Pred::False);
                break;
            }
            other => out.push(other),
        }
    }
    if matches!(out.last(), Some(Pred::False)) && out[..out.len() - 1].iter().all(Pred::wd_safe) {
        return Pred::False;
    }
    Pred::and(out)
}

fn fold_or(ps: Vec<Pred>) -> Pred {
    let mut out = Vec::with_capacity(ps.len());
    for q in ps {
        match q {
            Pred::False => {}
            Pred::Or(inner) => out.extend(inner),
            Pred::True => {
                out.push(Pred::True);
                break;
            }
            other => out.push(other),
        }
    }
    if matches!(out.last(), Some(Pred::True)) && out[..out.len() - 1].iter().all(Pred::wd_safe) {
        return Pred::True;
    }
    match out.len() {
        0 => Pred::False,
        1 => out.into_iter().next().unwrap(),
        _ => Pred::Or(out),
    }
}

fn rewrite_exists(x: Ident, ty: Option<Ty>, body: Pred, facts: &Facts) -> Pred {
    match &body {
        Pred::True => return Pred::True,
        Pred::False => return Pred::False,
        _ => {}
    }

    let conjuncts: Vec<Pred> = body.conjuncts().to_vec();

    // One-point rule: an `x = E` conjunct lets us substitute `E` everywhere
    // and drop the binder. `E` must not mention `x`; the whole body must be
    // free of partial operators (dropping the iteration must not drop an
    // error it would have raised); and for integer binders `E` must provably
    // fit the global integer range (the binder never ranges outside it).
    let body_wd_safe = conjuncts.iter().all(Pred::wd_safe);
    for (i, c) in conjuncts.iter().enumerate() {
        let e = match c {
            Pred::Cmp(CmpOp::Eq, Expr::Ident(n), e) if *n == x => e,
            Pred::Cmp(CmpOp::Eq, e, Expr::Ident(n)) if *n == x => e,
            _ => continue,
        };
        if free_vars_expr(e).contains(&x) || !body_wd_safe {
            continue;
        }
        if ty == Some(Ty::Int) {
            let (lo, hi) = facts.bounds(e);
            let fits = matches!((lo, hi), (Some(lo), Some(hi))
                if lo >= -facts.maxint && hi <= facts.maxint);
            if !fits {
                continue;
            }
        }
        let rest: Vec<Pred> = conjuncts
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, q)| q.clone())
            .collect();
        return substitute(&Pred::and(rest), &x, e);
    }

    // Sole membership conjunct: a witness exists exactly when the set does
    // not collapse to empty.
    if let [Pred::Mem(Expr::Ident(n), s)] = conjuncts.as_slice() {
        if *n == x && !free_vars_expr(s).contains(&x) {
            return Pred::Cmp(CmpOp::Ne, s.clone(), Expr::EmptySet);
        }
    }

    // Sole half-open comparison on an integer binder: true whenever a
    // witness certainly exists within the global bounds.
    if ty == Some(Ty::Int) {
        if let [Pred::Cmp(op, a, b)] = conjuncts.as_slice() {
            let on_binder = match (a, b) {
                (Expr::Ident(n), e) if *n == x => Some((*op, e)),
                (e, Expr::Ident(n)) if *n == x => Some((flip(*op), e)),
                _ => None,
            };
            if let Some((op, e)) = on_binder {
                if !free_vars_expr(e).contains(&x) && e.wd_safe() {
                    let m = facts.maxint;
                    let (lo, hi) = facts.bounds(e);
                    let witness = match op {
                        CmpOp::Gt => hi.is_some_and(|h| h < m),
                        CmpOp::Ge => hi.is_some_and(|h| h <= m),
                        CmpOp::Lt => lo.is_some_and(|l| l > -m),
                        CmpOp::Le => lo.is_some_and(|l| l >= -m),
                        _ => false,
                    };
                    if witness {
                        return Pred::True;
                    }
                }
            }
        }
    }

    // Hoist the leading binder-free conjuncts out of the body. Only a
    // prefix moves: a later conjunct jumping ahead of an earlier one could
    // surface an error, or mask one, that the original evaluation order
    // determined. Hoisted conjuncts must also be safe to evaluate before
    // the (possibly empty-ranged) quantifier.
    let hoistable = conjuncts
        .iter()
        .take_while(|c| !free_vars(c).contains(&x) && c.wd_safe())
        .count();
    if hoistable > 0 {
        let mut parts = conjuncts;
        let kept = parts.split_off(hoistable);
        parts.push(Pred::Exists(x, ty, Box::new(Pred::and(kept))));
        return Pred::and(parts);
    }

    Pred::Exists(x, ty, Box::new(body))
}

/// A solver-facing view of an atomic predicate: the canonical key that
/// identifies which reified variable the atom shares, plus its polarity.
///
/// All four integer comparisons collapse onto `<=` (e.g. `x > y` is the
/// negation of `x <= y`, and `x >= y` is `y <= x`), equality arguments are
/// sorted structurally, and negated forms flip the polarity. Two atoms
/// with the same key are the same constraint up to negation, so posting
/// `x > y` and `y >= x` together is immediately contradictory.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomKey {
    Le(Expr, Expr),
    Eq(Expr, Expr),
    Mem(Expr, Expr),
    Subset(Expr, Expr),
}

/// The predicate was not an atom (a connective, constant, or quantifier).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NotAtomic;

/// Canonical key and polarity of an atomic predicate.
pub fn normalize_atom(p: &Pred) -> Result<(AtomKey, bool), NotAtomic> {
    match p {
        Pred::Cmp(op, a, b) => Ok(match op {
            CmpOp::Le => (AtomKey::Le(a.clone(), b.clone()), true),
            CmpOp::Gt => (AtomKey::Le(a.clone(), b.clone()), false),
            CmpOp::Ge => (AtomKey::Le(b.clone(), a.clone()), true),
            CmpOp::Lt => (AtomKey::Le(b.clone(), a.clone()), false),
            CmpOp::Eq => (eq_key(a, b), true),
            CmpOp::Ne => (eq_key(a, b), false),
        }),
        Pred::Mem(a, b) => Ok((AtomKey::Mem(a.clone(), b.clone()), true)),
        Pred::NotMem(a, b) => Ok((AtomKey::Mem(a.clone(), b.clone()), false)),
        Pred::Subset(a, b) => Ok((AtomKey::Subset(a.clone(), b.clone()), true)),
        Pred::Not(q) => {
            let (key, pol) = normalize_atom(q)?;
            Ok((key, !pol))
        }
        _ => Err(NotAtomic),
    }
}

fn eq_key(a: &Expr, b: &Expr) -> AtomKey {
    if a <= b {
        AtomKey::Eq(a.clone(), b.clone())
    } else {
        AtomKey::Eq(b.clone(), a.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_pred, print_pred};

    fn int_binders(p: &mut Pred) {
        match p {
            Pred::Exists(_, ann, body) | Pred::Forall(_, ann, body) => {
                ann.get_or_insert(Ty::Int);
                int_binders(body);
            }
            Pred::And(ps) | Pred::Or(ps) => ps.iter_mut().for_each(int_binders),
            Pred::Imp(a, b) | Pred::Iff(a, b) => {
                int_binders(a);
                int_binders(b);
            }
            Pred::Not(q) => int_binders(q),
            _ => {}
        }
    }

    fn simp(src: &str, facts: &Facts) -> String {
        let mut p = parse_pred(src).unwrap();
        int_binders(&mut p);
        print_pred(&simplify(&p, facts))
    }

    fn empty() -> Facts {
        Facts::new(1023)
    }

    #[test]
    fn sole_membership_becomes_non_emptiness() {
        assert_eq!(simp("#p.(p : idle)", &empty()), "idle /= {}");
    }

    #[test]
    fn known_non_empty_set_discharges_the_test() {
        let mut f = empty();
        f.assume(&parse_pred("0 : idle").unwrap());
        assert_eq!(simp("idle /= {}", &f), "TRUE");
        // Unknown sets stay.
        assert_eq!(simp("ready /= {}", &f), "ready /= {}");
    }

    #[test]
    fn one_point_rule_needs_integer_bounds() {
        let mut f = empty();
        f.assume(&parse_pred("min >= 0 & min <= 3").unwrap());
        assert_eq!(simp("#x.(x = min + 1 & x : s)", &f), "min + 1 : s");
        // Without bounds on `min` the witness could fall outside the
        // global integer range, so the binder stays.
        assert_eq!(
            simp("#x.(x = min + 1 & x : s)", &empty()),
            "#x : INT.(x = min + 1 & x : s)"
        );
        // Literals carry their own bounds.
        assert_eq!(simp("#x.(x : s & x = 0)", &empty()), "0 : s");
    }

    #[test]
    fn one_point_rule_takes_priority_over_membership() {
        // Both rules match the same binder; the one-point rule wins and
        // keeps the membership conjunct.
        assert_eq!(simp("#x.(x : s & x = 2)", &empty()), "2 : s");
    }

    #[test]
    fn half_open_comparisons_vanish_within_global_bounds() {
        assert_eq!(simp("#z.(z > 5)", &empty()), "TRUE");
        assert_eq!(simp("#z.(5 > z)", &empty()), "TRUE");
        assert_eq!(simp("#z.(z <= -1023)", &empty()), "TRUE");
        // No witness inside the global range.
        assert_eq!(simp("#z.(z > 1023)", &empty()), "#z : INT.(z > 1023)");
        let mut f = empty();
        f.assume(&parse_pred("min >= 0 & min <= 3").unwrap());
        assert_eq!(simp("#z.(z > min)", &f), "TRUE");
        assert_eq!(simp("#z.(z > min)", &empty()), "#z : INT.(z > min)");
    }

    #[test]
    fn binder_free_conjuncts_hoist_out() {
        assert_eq!(
            simp("#p.(active = {} & p : ready)", &empty()),
            "active = {} & ready /= {}"
        );
    }

    #[test]
    fn division_blocks_duplication_and_hoisting() {
        // `E` with a division is never substituted...
        assert_eq!(
            simp("#x.(x = 1 / 0 & x : s)", &empty()),
            "#x : INT.(x = 1 / 0 & x : s)"
        );
        // ...and a conjunct with a division is never hoisted past the
        // binder, though binder-free safe conjuncts still move.
        assert_eq!(
            simp("#x.(1 / y = 1 & x : s)", &empty()),
            "#x : INT.(1 / y = 1 & x : s)"
        );
        // Sole membership has no such restriction: the set is evaluated
        // either way.
        assert_eq!(simp("#x.(x : 1 / y .. 2)", &empty()), "1 / y .. 2 /= {}");
    }

    #[test]
    fn connective_units_fold() {
        assert_eq!(simp("TRUE & x < 1", &empty()), "x < 1");
        assert_eq!(simp("x < 1 or TRUE", &empty()), "TRUE");
        assert_eq!(simp("1 / x = 1 or TRUE", &empty()), "1 / x = 1 or TRUE");
        assert_eq!(simp("not(not(x < 1))", &empty()), "x < 1");
        assert_eq!(simp("1 = 1 => x < 1", &empty()), "1 = 1 => x < 1");
        assert_eq!(simp("FALSE => x < 1", &empty()), "TRUE");
        assert_eq!(simp("x < 1 <=> TRUE", &empty()), "x < 1");
    }

    #[test]
    fn chained_rules_reach_a_fixpoint() {
        // Hoist, then turn the remaining sole membership into a
        // non-emptiness test: the shape of an enabling condition of an
        // event that picks any element when nothing is running.
        assert_eq!(
            simp("#p.(active = {} & p : ready & TRUE)", &empty()),
            "active = {} & ready /= {}"
        );
        let s = simp("#p.(active = {} & p : ready & TRUE)", &empty());
        let p = parse_pred(&s).unwrap();
        assert_eq!(print_pred(&simplify(&p, &empty())), s);
    }

    #[test]
    fn substitution_avoids_capture() {
        let p = parse_pred("#y.(x < y)").unwrap();
        let r = parse_pred("y + 1 < 0").unwrap();
        let r = match r {
            Pred::Cmp(_, lhs, _) => lhs,
            _ => unreachable!(),
        };
        let out = substitute(&p, &"x".to_string(), &r);
        assert_eq!(print_pred(&out), "#y_1.(y + 1 < y_1)");
    }

    #[test]
    fn shadowed_binders_block_substitution() {
        let p = parse_pred("x < 1 & #x.(x < 2)").unwrap();
        let out = substitute(&p, &"x".to_string(), &Expr::Int(9));
        assert_eq!(print_pred(&out), "9 < 1 & #x.(x < 2)");
    }

    #[test]
    fn comparison_keys_collapse_onto_le() {
        let gt = parse_pred("x > y").unwrap();
        let lt = parse_pred("y < x").unwrap();
        let ge = parse_pred("y >= x").unwrap();
        let le = parse_pred("x <= y").unwrap();
        let (k1, p1) = normalize_atom(&gt).unwrap();
        let (k2, p2) = normalize_atom(&lt).unwrap();
        let (k3, p3) = normalize_atom(&ge).unwrap();
        let (k4, p4) = normalize_atom(&le).unwrap();
        assert_eq!(k1, k2);
        assert_eq!(p1, p2);
        assert_eq!(k3, k4);
        assert_eq!(p3, p4);
        // `x > y` denies exactly what `y >= x` asserts: same key,
        // opposite polarity, so the pair is recognised as contradictory
        // instead of being treated as two unrelated constraints.
        assert_eq!(k1, k3);
        assert_ne!(p1, p3);
    }

    #[test]
    fn equality_keys_sort_their_arguments() {
        let ab = parse_pred("a = b").unwrap();
        let ba = parse_pred("b = a").unwrap();
        let ne = parse_pred("b /= a").unwrap();
        assert_eq!(normalize_atom(&ab), normalize_atom(&ba));
        let (k, pol) = normalize_atom(&ne).unwrap();
        assert_eq!((k, pol), (normalize_atom(&ab).unwrap().0, false));
    }

    #[test]
    fn connectives_are_not_atoms() {
        assert_eq!(normalize_atom(&Pred::True), Err(NotAtomic));
        let p = parse_pred("x < 1 & y < 1").unwrap();
        assert_eq!(normalize_atom(&p), Err(NotAtomic));
        let q = parse_pred("not(x < 1 & y < 1)").unwrap();
        assert_eq!(normalize_atom(&q), Err(NotAtomic));
    }
}
