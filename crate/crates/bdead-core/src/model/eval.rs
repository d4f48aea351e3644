//! Ground evaluation of expressions and predicates.
//!
//! Evaluation has a third outcome besides `true`/`false`: a well-definedness
//! error, raised by division or modulo with a zero divisor. Conjunction,
//! disjunction, and implication evaluate left to right and do not look at
//! later operands once the result is decided, so `FALSE & (1 / 0 = 1)`
//! is `FALSE` while `(1 / 0 = 1) & FALSE` is an error.

use super::ast::*;
use super::print::print_expr;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// A ground value: integer, boolean, sort element (by its globally unique
/// name), or finite set of values.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Elem(Ident),
    Set(BTreeSet<Value>),
}

impl Value {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_set(&self) -> Option<&BTreeSet<Value>> {
        match self {
            Value::Set(s) => Some(s),
            _ => None,
        }
    }

    /// The value as an expression, e.g. for substituting a chosen binder
    /// value into a quantifier body.
    pub fn to_expr(&self) -> Expr {
        match self {
            Value::Int(n) => Expr::Int(*n),
            Value::Bool(b) => Expr::Bool(*b),
            Value::Elem(name) => Expr::Ident(name.clone()),
            Value::Set(els) => {
                if els.is_empty() {
                    Expr::EmptySet
                } else {
                    Expr::SetLit(els.iter().map(Value::to_expr).collect())
                }
            }
        }
    }
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", print_expr(&self.to_expr()))
    }
}

/// A total assignment of ground values to identifiers.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Valuation(pub BTreeMap<Ident, Value>);

impl Valuation {
    pub fn new() -> Valuation {
        Valuation(BTreeMap::new())
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.0.get(name)
    }

    pub fn insert(&mut self, name: impl Into<Ident>, v: Value) {
        self.0.insert(name.into(), v);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Ident, &Value)> {
        self.0.iter()
    }
}

/// `name=value` pairs in name order, e.g. `min=0, s={}`.
impl std::fmt::Display for Valuation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut sep = "";
        for (name, value) in &self.0 {
            write!(f, "{sep}{name}={value}")?;
            sep = ", ";
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("not well-defined: `{}`", print_expr(expr))]
    WellDefinedness { expr: Expr },
    #[error("arithmetic overflow in `{}`", print_expr(expr))]
    Overflow { expr: Expr },
    #[error("set too large to materialize: `{}`", print_expr(expr))]
    SetTooLarge { expr: Expr },
    #[error("unbound identifier `{name}`")]
    Unbound { name: Ident },
    #[error("cannot bound quantified variable `{name}` (no finite range in its body)")]
    UnboundedQuantifier { name: Ident },
}

/// Largest interval the evaluator will materialize as an explicit set.
const MAX_MATERIALIZED: i64 = 1 << 16;

/// Evaluation context: the machine's sorts plus the global integer bound.
/// Integer quantifiers range over `-maxint ..= maxint` unless their body
/// pins them to something tighter.
#[derive(Debug, Clone, Copy)]
pub struct EvalCtx<'a> {
    pub sorts: &'a [SortDecl],
    pub maxint: i64,
}

impl<'a> EvalCtx<'a> {
    pub fn new(sorts: &'a [SortDecl], maxint: i64) -> EvalCtx<'a> {
        EvalCtx { sorts, maxint }
    }

    fn sort(&self, name: &str) -> Option<&SortDecl> {
        self.sorts.iter().find(|s| s.name == name)
    }

    fn elem_sort(&self, name: &str) -> Option<&SortDecl> {
        self.sorts
            .iter()
            .find(|s| s.elements.iter().any(|e| e == name))
    }
}

pub fn eval_expr(e: &Expr, v: &Valuation, ctx: &EvalCtx) -> Result<Value, EvalError> {
    match e {
        Expr::Int(n) => Ok(Value::Int(*n)),
        Expr::Bool(b) => Ok(Value::Bool(*b)),
        Expr::Ident(x) => {
            if let Some(val) = v.get(x) {
                return Ok(val.clone());
            }
            if ctx.elem_sort(x).is_some() {
                return Ok(Value::Elem(x.clone()));
            }
            if let Some(sd) = ctx.sort(x) {
                return Ok(Value::Set(
                    sd.elements
                        .iter()
                        .map(|e| Value::Elem(e.clone()))
                        .collect(),
                ));
            }
            Err(EvalError::Unbound { name: x.clone() })
        }
        Expr::Arith(op, a, b) => {
            let x = int(a, v, ctx)?;
            let y = int(b, v, ctx)?;
            let r = match op {
                ArithOp::Add => x.checked_add(y),
                ArithOp::Sub => x.checked_sub(y),
                ArithOp::Mul => x.checked_mul(y),
                ArithOp::Div | ArithOp::Mod => {
                    if y == 0 {
                        return Err(EvalError::WellDefinedness { expr: e.clone() });
                    }
                    if *op == ArithOp::Div {
                        x.checked_div(y)
                    } else {
                        x.checked_rem(y)
                    }
                }
            };
            r.map(Value::Int)
                .ok_or_else(|| EvalError::Overflow { expr: e.clone() })
        }
        Expr::SetLit(es) => {
            let mut out = BTreeSet::new();
            for x in es {
                out.insert(eval_expr(x, v, ctx)?);
            }
            Ok(Value::Set(out))
        }
        Expr::EmptySet => Ok(Value::Set(BTreeSet::new())),
        Expr::Interval(a, b) => {
            let lo = int(a, v, ctx)?;
            let hi = int(b, v, ctx)?;
            if hi.saturating_sub(lo) >= MAX_MATERIALIZED {
                return Err(EvalError::SetTooLarge { expr: e.clone() });
            }
            Ok(Value::Set((lo..=hi).map(Value::Int).collect()))
        }
        Expr::Union(a, b) => {
            let x = set(a, v, ctx)?;
            let y = set(b, v, ctx)?;
            Ok(Value::Set(x.union(&y).cloned().collect()))
        }
        Expr::Inter(a, b) => {
            let x = set(a, v, ctx)?;
            let y = set(b, v, ctx)?;
            Ok(Value::Set(x.intersection(&y).cloned().collect()))
        }
        Expr::Diff(a, b) => {
            let x = set(a, v, ctx)?;
            let y = set(b, v, ctx)?;
            Ok(Value::Set(x.difference(&y).cloned().collect()))
        }
        Expr::Card(a) => Ok(Value::Int(set(a, v, ctx)?.len() as i64)),
    }
}

fn int(e: &Expr, v: &Valuation, ctx: &EvalCtx) -> Result<i64, EvalError> {
    match eval_expr(e, v, ctx)? {
        Value::Int(n) => Ok(n),
        _ => Err(EvalError::Unbound {
            name: format!("non-integer value of `{}`", print_expr(e)),
        }),
    }
}

fn set(e: &Expr, v: &Valuation, ctx: &EvalCtx) -> Result<BTreeSet<Value>, EvalError> {
    match eval_expr(e, v, ctx)? {
        Value::Set(s) => Ok(s),
        _ => Err(EvalError::Unbound {
            name: format!("non-set value of `{}`", print_expr(e)),
        }),
    }
}

pub fn eval_pred(p: &Pred, v: &Valuation, ctx: &EvalCtx) -> Result<bool, EvalError> {
    match p {
        Pred::True => Ok(true),
        Pred::False => Ok(false),
        Pred::Cmp(op, a, b) => {
            let x = eval_expr(a, v, ctx)?;
            let y = eval_expr(b, v, ctx)?;
            Ok(match op {
                CmpOp::Eq => x == y,
                CmpOp::Ne => x != y,
                _ => {
                    let (x, y) = match (x, y) {
                        (Value::Int(x), Value::Int(y)) => (x, y),
                        _ => {
                            return Err(EvalError::Unbound {
                                name: format!("non-integer comparison `{}`", print_expr(a)),
                            })
                        }
                    };
                    match op {
                        CmpOp::Lt => x < y,
                        CmpOp::Le => x <= y,
                        CmpOp::Gt => x > y,
                        CmpOp::Ge => x >= y,
                        _ => unreachable!(),
                    }
                }
            })
        }
        Pred::Mem(a, b) => {
            let x = eval_expr(a, v, ctx)?;
            let s = set(b, v, ctx)?;
            Ok(s.contains(&x))
        }
        Pred::NotMem(a, b) => {
            let x = eval_expr(a, v, ctx)?;
            let s = set(b, v, ctx)?;
            Ok(!s.contains(&x))
        }
        Pred::Subset(a, b) => {
            let x = set(a, v, ctx)?;
            let y = set(b, v, ctx)?;
            Ok(x.is_subset(&y))
        }
        Pred::And(ps) => {
            for q in ps {
                if !eval_pred(q, v, ctx)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Pred::Or(ps) => {
            for q in ps {
                if eval_pred(q, v, ctx)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Pred::Imp(a, b) => {
            if !eval_pred(a, v, ctx)? {
                return Ok(true);
            }
            eval_pred(b, v, ctx)
        }
        Pred::Iff(a, b) => {
            let x = eval_pred(a, v, ctx)?;
            let y = eval_pred(b, v, ctx)?;
            Ok(x == y)
        }
        Pred::Not(q) => Ok(!eval_pred(q, v, ctx)?),
        Pred::Exists(x, ty, body) => {
            for c in binder_range(x, ty, body, Quant::Exists, v, ctx)? {
                let mut inner = v.clone();
                inner.insert(x.clone(), c);
                if eval_pred(body, &inner, ctx)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Pred::Forall(x, ty, body) => {
            for c in binder_range(x, ty, body, Quant::Forall, v, ctx)? {
                let mut inner = v.clone();
                inner.insert(x.clone(), c);
                if !eval_pred(body, &inner, ctx)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Which quantifier a binder range serves.
///
/// Existential binders may iterate only values compatible with the body's
/// own range-shaped conjuncts — any witness must satisfy those conjuncts,
/// so narrowing is invisible. Universal binders iterate their full type
/// domain: a range-shaped conjunct *falsifies* the formula at every
/// excluded point rather than silently shrinking the range. The one
/// narrowing a universal admits is an implication body, whose antecedent
/// pins bound it soundly (excluded points hold vacuously).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quant {
    Exists,
    Forall,
}

/// The conjunction whose conjuncts may pin the binder's range, if any.
///
/// Narrowing is permitted only where it cannot hide a well-definedness
/// error: skipping a value must never skip an error the full iteration
/// would have raised. The pin source must therefore be free of partial
/// operators throughout — for an existential that is the whole body, for a
/// universal the antecedent of an implication body (the consequent is only
/// ever evaluated where the antecedent holds, narrowed or not).
pub(crate) fn pin_source<'a>(q: Quant, body: &'a Pred) -> Option<&'a Pred> {
    match q {
        Quant::Exists => body.wd_safe().then_some(body),
        Quant::Forall => match body {
            Pred::Imp(a, _) if a.wd_safe() => Some(a),
            _ => None,
        },
    }
}

/// The finite candidate range a quantified variable iterates over.
///
/// When the body admits a pin source (see [`pin_source`]) the range is
/// narrowed by its conjuncts that pin the binder down: membership in an
/// evaluable set, comparisons with evaluable bounds, equality. Conjunction
/// nesting is flattened first, so re-associating a body never changes the
/// range. Without a pin source, integer binders iterate the full global
/// range and set-typed binders fail: no finite honest domain exists for
/// them.
pub fn binder_range(
    x: &Ident,
    ty: &Option<Ty>,
    body: &Pred,
    q: Quant,
    v: &Valuation,
    ctx: &EvalCtx,
) -> Result<Vec<Value>, EvalError> {
    let ty = ty.as_ref().expect("binder must be typed before evaluation");
    match ty {
        Ty::Bool => Ok(vec![Value::Bool(false), Value::Bool(true)]),
        Ty::Sort(s) => {
            let sd = ctx.sort(s).ok_or_else(|| EvalError::Unbound {
                name: s.clone(),
            })?;
            Ok(sd
                .elements
                .iter()
                .map(|e| Value::Elem(e.clone()))
                .collect())
        }
        Ty::Int => {
            let mut lo = -ctx.maxint;
            let mut hi = ctx.maxint;
            let mut explicit: Option<BTreeSet<i64>> = None;
            let pins = pin_source(q, body).map(Pred::flat_conjuncts).unwrap_or_default();
            for c in pins {
                match c {
                    Pred::Mem(Expr::Ident(n), s) if n == x && !mentions(s, x) => {
                        let members = set(s, v, ctx)?;
                        let ints: BTreeSet<i64> =
                            members.iter().filter_map(Value::as_int).collect();
                        explicit = Some(match explicit {
                            None => ints,
                            Some(prev) => prev.intersection(&ints).cloned().collect(),
                        });
                    }
                    Pred::Cmp(op, lhs, rhs) => {
                        let (op, bound) = match (lhs, rhs) {
                            (Expr::Ident(n), e) if n == x && !mentions(e, x) => (*op, e),
                            (e, Expr::Ident(n)) if n == x && !mentions(e, x) => (flip(*op), e),
                            _ => continue,
                        };
                        let b = int(bound, v, ctx)?;
                        match op {
                            CmpOp::Eq => {
                                let one: BTreeSet<i64> = [b].into();
                                explicit = Some(match explicit {
                                    None => one,
                                    Some(prev) => prev.intersection(&one).cloned().collect(),
                                });
                            }
                            CmpOp::Le => hi = hi.min(b),
                            CmpOp::Lt => hi = hi.min(b.saturating_sub(1)),
                            CmpOp::Ge => lo = lo.max(b),
                            CmpOp::Gt => lo = lo.max(b.saturating_add(1)),
                            CmpOp::Ne => {}
                        }
                    }
                    _ => {}
                }
            }
            if let Some(values) = explicit {
                return Ok(values
                    .into_iter()
                    .filter(|n| *n >= lo && *n <= hi)
                    .map(Value::Int)
                    .collect());
            }
            if hi.saturating_sub(lo) >= MAX_MATERIALIZED {
                return Err(EvalError::SetTooLarge {
                    expr: Expr::Ident(x.clone()),
                });
            }
            Ok((lo..=hi).map(Value::Int).collect())
        }
        Ty::Set(_) => {
            let src = pin_source(q, body).ok_or_else(|| EvalError::UnboundedQuantifier {
                name: x.clone(),
            })?;
            for c in src.flat_conjuncts() {
                match c {
                    Pred::Cmp(CmpOp::Eq, Expr::Ident(n), e) if n == x && !mentions(e, x) => {
                        return Ok(vec![eval_expr(e, v, ctx)?]);
                    }
                    Pred::Cmp(CmpOp::Eq, e, Expr::Ident(n)) if n == x && !mentions(e, x) => {
                        return Ok(vec![eval_expr(e, v, ctx)?]);
                    }
                    Pred::Mem(Expr::Ident(n), ss) if n == x && !mentions(ss, x) => {
                        return Ok(set(ss, v, ctx)?.into_iter().collect());
                    }
                    Pred::Subset(Expr::Ident(n), g) if n == x && !mentions(g, x) => {
                        let base: Vec<Value> = set(g, v, ctx)?.into_iter().collect();
                        if base.len() > 16 {
                            return Err(EvalError::SetTooLarge { expr: g.clone() });
                        }
                        let mut out = Vec::with_capacity(1 << base.len());
                        for mask in 0u32..(1 << base.len()) {
                            let sub: BTreeSet<Value> = base
                                .iter()
                                .enumerate()
                                .filter(|(i, _)| mask & (1 << i) != 0)
                                .map(|(_, v)| v.clone())
                                .collect();
                            out.push(Value::Set(sub));
                        }
                        return Ok(out);
                    }
                    _ => {}
                }
            }
            Err(EvalError::UnboundedQuantifier { name: x.clone() })
        }
    }
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

fn mentions(e: &Expr, x: &Ident) -> bool {
    crate::model::free_vars_expr(e).contains(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_pred;

    const NO_SORTS: &[SortDecl] = &[];

    fn ctx() -> EvalCtx<'static> {
        EvalCtx::new(NO_SORTS, 1023)
    }

    fn ev(src: &str, v: &Valuation) -> Result<bool, EvalError> {
        let mut p = parse_pred(src).unwrap();
        annotate_int_binders(&mut p);
        eval_pred(&p, v, &ctx())
    }

    // Tests here use INT-typed binders only; fill annotations directly
    // rather than routing through a full machine typecheck.
    fn annotate_int_binders(p: &mut Pred) {
        match p {
            Pred::Exists(_, ann, body) | Pred::Forall(_, ann, body) => {
                ann.get_or_insert(Ty::Int);
                annotate_int_binders(body);
            }
            Pred::And(ps) | Pred::Or(ps) => ps.iter_mut().for_each(annotate_int_binders),
            Pred::Imp(a, b) | Pred::Iff(a, b) => {
                annotate_int_binders(a);
                annotate_int_binders(b);
            }
            Pred::Not(q) => annotate_int_binders(q),
            _ => {}
        }
    }

    #[test]
    fn membership_in_state_set() {
        let mut v = Valuation::new();
        v.insert("min", Value::Int(0));
        v.insert("s", Value::Set(BTreeSet::new()));
        assert_eq!(ev("min : s", &v), Ok(false));
    }

    #[test]
    fn division_by_zero_is_an_error_not_false() {
        let v = Valuation::new();
        let err = ev("1 / 0 = 1", &v).unwrap_err();
        assert!(matches!(err, EvalError::WellDefinedness { .. }));
        assert_eq!(ev("2 / 2 = 1", &v), Ok(true));
        assert_eq!(ev("7 mod 2 = 1", &v), Ok(true));
    }

    #[test]
    fn conjunction_is_left_to_right_non_strict() {
        let v = Valuation::new();
        assert_eq!(ev("1 = 2 & 1 / 0 = 1", &v), Ok(false));
        assert!(ev("1 / 0 = 1 & 1 = 2", &v).is_err());
        assert_eq!(ev("1 = 1 or 1 / 0 = 1", &v), Ok(true));
        assert!(ev("1 / 0 = 1 or 1 = 1", &v).is_err());
        assert_eq!(ev("1 = 2 => 1 / 0 = 1", &v), Ok(true));
    }

    #[test]
    fn quantifier_ranges_come_from_the_body() {
        let mut v = Valuation::new();
        v.insert(
            "s",
            Value::Set([Value::Int(1), Value::Int(2)].into_iter().collect()),
        );
        assert_eq!(ev("#x.(x : s & x > 1)", &v), Ok(true));
        assert_eq!(ev("#x.(x : s & x > 2)", &v), Ok(false));
        assert_eq!(ev("!x.(x : s => x >= 1)", &v), Ok(true));
    }

    #[test]
    fn integer_quantifier_falls_back_to_global_bounds() {
        let v = Valuation::new();
        // A witness exists within -1023 ..= 1023.
        assert_eq!(ev("#x.(x * x = 4 & x < 0)", &v), Ok(true));
        // 2000 is outside the global range, so no witness.
        assert_eq!(ev("#x.(x = 2000)", &v), Ok(false));
    }

    #[test]
    fn set_operations_and_card() {
        let v = Valuation::new();
        assert_eq!(ev("card((0 .. 3) /\\ (2 .. 9)) = 2", &v), Ok(true));
        assert_eq!(ev("{1, 2} \\ {2} = {1}", &v), Ok(true));
        assert_eq!(ev("{1} \\/ {2} <: 0 .. 2", &v), Ok(true));
        assert_eq!(ev("4 .. 3 = {}", &v), Ok(true));
    }

    #[test]
    fn empty_integer_range_makes_exists_false() {
        let mut v = Valuation::new();
        v.insert("s", Value::Set(BTreeSet::new()));
        assert_eq!(ev("#x.(x : s)", &v), Ok(false));
    }
}
