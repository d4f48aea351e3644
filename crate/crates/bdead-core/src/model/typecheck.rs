//! Type inference and scope checking.
//!
//! Identifier types are not declared; they are inferred from axioms,
//! invariants, guards, and assignments by unification. Quantifier binders may
//! carry an annotation; unannotated binders are inferred from their body
//! (e.g. membership in a set of integers fixes the binder to `INT`). After
//! checking, every binder carries an explicit type and binders are renamed so
//! no two quantifiers in the machine share a name and none shadows a declared
//! identifier.

use super::ast::*;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TypeError {
    #[error("in {context}: type mismatch: expected {expected}, found {found}")]
    Mismatch {
        context: String,
        expected: String,
        found: String,
    },
    #[error("in {context}: unknown identifier `{name}`")]
    Unknown { context: String, name: String },
    #[error("cannot infer a type for `{name}` (add a constraint or annotation)")]
    Unresolved { name: String },
    #[error("axiom `{label}` mentions state variable `{name}`")]
    AxiomUsesVariable { label: String, name: String },
    #[error("in {context}: `{name}` is not assignable (only state variables are)")]
    NotAssignable { context: String, name: String },
    #[error("in {context}: variable `{name}` assigned more than once")]
    DuplicateAssign { context: String, name: String },
    #[error("INITIALISATION must assign `{name}` exactly once")]
    InitIncomplete { name: String },
    #[error("in {context}: parameter `{name}` shadows a declared identifier")]
    ParamShadows { context: String, name: String },
    #[error("in {context}: unknown sort `{name}`")]
    UnknownSort { context: String, name: String },
}

/// A machine whose identifiers all have resolved types and whose binders are
/// uniquely named and explicitly annotated.
#[derive(Debug, Clone)]
pub struct TypedMachine {
    pub machine: Machine,
    /// Types of constants and state variables.
    pub types: BTreeMap<Ident, Ty>,
    /// Sort element name -> (sort name, element index).
    pub elems: BTreeMap<Ident, (Ident, u32)>,
}

impl TypedMachine {
    pub fn sort(&self, name: &str) -> Option<&SortDecl> {
        self.machine.sorts.iter().find(|s| s.name == name)
    }

    pub fn ty(&self, name: &str) -> Option<&Ty> {
        self.types.get(name)
    }

    /// Constants and variables in declaration order.
    pub fn scope(&self) -> Vec<(Ident, Ty)> {
        self.machine
            .constants
            .iter()
            .chain(self.machine.variables.iter())
            .map(|n| (n.clone(), self.types[n].clone()))
            .collect()
    }

    /// The predicate that holds exactly when `event` can fire: its guard
    /// conjunction, existentially closed over the event's parameters. An
    /// event without guards yields `TRUE`.
    pub fn enabling_predicate(&self, event: &Event) -> Pred {
        let mut p = Pred::and(event.guards.clone());
        for (name, ty) in event.params.iter().rev() {
            p = Pred::Exists(name.clone(), ty.clone(), Box::new(p));
        }
        p
    }

    /// Typecheck a standalone predicate (e.g. a goal supplied on the command
    /// line) against this machine's scope, returning the annotated form.
    pub fn check_goal(&self, p: Pred) -> Result<Pred, TypeError> {
        let mut inf = Infer::new(&self.machine);
        let mut env = inf.global_env();
        for (name, ty) in self.scope() {
            env.insert(name.clone(), (name, inf.known(&ty)));
        }
        let p = inf.pred(p, &env, "goal predicate")?;
        inf.finish_pred(p)
    }
}

/// Infer all identifier and binder types, returning the annotated machine.
pub fn typecheck(machine: Machine) -> Result<TypedMachine, TypeError> {
    let mut inf = Infer::new(&machine);
    let mut m = machine;

    // Constants and variables get inference variables; sorts and their
    // elements have known types.
    let mut env = inf.global_env();
    for c in &m.constants {
        let t = inf.fresh();
        env.insert(c.clone(), (c.clone(), t));
    }
    let const_env = env.clone();
    for v in &m.variables {
        let t = inf.fresh();
        env.insert(v.clone(), (v.clone(), t));
    }

    for clause in &mut m.axioms {
        let ctx = format!("axiom `{}`", clause.label);
        for name in crate::model::free_vars(&clause.pred) {
            if m.variables.contains(&name) {
                return Err(TypeError::AxiomUsesVariable {
                    label: clause.label.clone(),
                    name,
                });
            }
        }
        clause.pred = inf.pred(std::mem::replace(&mut clause.pred, Pred::True), &const_env, &ctx)?;
    }
    for clause in &mut m.invariants {
        let ctx = format!("invariant `{}`", clause.label);
        clause.pred = inf.pred(std::mem::replace(&mut clause.pred, Pred::True), &env, &ctx)?;
    }

    // INITIALISATION: right-hand sides may read constants only, and every
    // variable must be assigned exactly once.
    let mut assigned = BTreeSet::new();
    for a in &mut m.init.actions {
        let ctx = "INITIALISATION".to_string();
        if !m.variables.contains(&a.var) {
            return Err(TypeError::NotAssignable {
                context: ctx,
                name: a.var.clone(),
            });
        }
        if !assigned.insert(a.var.clone()) {
            return Err(TypeError::DuplicateAssign {
                context: ctx,
                name: a.var.clone(),
            });
        }
        let (rhs, t) = inf.expr(std::mem::replace(&mut a.rhs, Expr::EmptySet), &const_env, &ctx)?;
        a.rhs = rhs;
        let var_t = env[&a.var].1.clone();
        inf.unify(&var_t, &t, &ctx)?;
    }
    if let Some(missing) = m.variables.iter().find(|v| !assigned.contains(*v)) {
        return Err(TypeError::InitIncomplete {
            name: missing.clone(),
        });
    }

    for ev in &mut m.events {
        let ctx_name = ev.name.clone();
        let mut ev_env = env.clone();
        for (p, ann) in &mut ev.params {
            if env.contains_key(p) {
                return Err(TypeError::ParamShadows {
                    context: format!("event `{ctx_name}`"),
                    name: p.clone(),
                });
            }
            let t = match ann {
                Some(ty) => inf.check_ty(ty, &format!("event `{ctx_name}`"))?,
                None => inf.fresh(),
            };
            inf.params.push((p.clone(), t.clone()));
            ev_env.insert(p.clone(), (p.clone(), t));
        }
        for (i, g) in ev.guards.iter_mut().enumerate() {
            let ctx = format!("guard {} of event `{ctx_name}`", i + 1);
            *g = inf.pred(std::mem::replace(g, Pred::True), &ev_env, &ctx)?;
        }
        let mut assigned = BTreeSet::new();
        for a in &mut ev.actions {
            let ctx = format!("event `{ctx_name}`");
            if !m.variables.contains(&a.var) {
                return Err(TypeError::NotAssignable {
                    context: ctx,
                    name: a.var.clone(),
                });
            }
            if !assigned.insert(a.var.clone()) {
                return Err(TypeError::DuplicateAssign {
                    context: ctx,
                    name: a.var.clone(),
                });
            }
            let (rhs, t) = inf.expr(std::mem::replace(&mut a.rhs, Expr::EmptySet), &ev_env, &ctx)?;
            a.rhs = rhs;
            let var_t = env[&a.var].1.clone();
            inf.unify(&var_t, &t, &ctx)?;
        }
    }

    // Resolve every scope entry and recorded binder/parameter to a ground type.
    let mut types = BTreeMap::new();
    for name in m.constants.iter().chain(m.variables.iter()) {
        let t = env[name].1.clone();
        types.insert(name.clone(), inf.ground(&t, name)?);
    }
    let binder_tys = inf.resolved_binders()?;
    let param_tys: BTreeMap<Ident, Ty> = {
        let mut out = BTreeMap::new();
        for (name, t) in inf.params.clone() {
            out.insert(name.clone(), inf.ground(&t, &name)?);
        }
        out
    };
    for ev in &mut m.events {
        for (p, ann) in &mut ev.params {
            *ann = Some(param_tys[p].clone());
        }
        for g in &mut ev.guards {
            fill_binders(g, &binder_tys);
        }
    }
    for c in m.axioms.iter_mut().chain(m.invariants.iter_mut()) {
        fill_binders(&mut c.pred, &binder_tys);
    }

    let elems = inf.elems;
    Ok(TypedMachine {
        machine: m,
        types,
        elems,
    })
}

fn fill_binders(p: &mut Pred, tys: &BTreeMap<Ident, Ty>) {
    match p {
        Pred::Exists(x, ann, body) | Pred::Forall(x, ann, body) => {
            if let Some(t) = tys.get(x) {
                *ann = Some(t.clone());
            }
            fill_binders(body, tys);
        }
        Pred::And(ps) | Pred::Or(ps) => ps.iter_mut().for_each(|q| fill_binders(q, tys)),
        Pred::Imp(a, b) | Pred::Iff(a, b) => {
            fill_binders(a, tys);
            fill_binders(b, tys);
        }
        Pred::Not(q) => fill_binders(q, tys),
        _ => {}
    }
}

/// Inference-time type: ground constructors plus unification variables.
#[derive(Debug, Clone, PartialEq, Eq)]
enum T {
    Int,
    Bool,
    Sort(Ident),
    Set(Box<T>),
    Var(u32),
}

type Env = BTreeMap<Ident, (Ident, T)>;

struct Infer {
    subst: Vec<Option<T>>,
    sorts: Vec<Ident>,
    elems: BTreeMap<Ident, (Ident, u32)>,
    /// Every name ever introduced, for fresh binder naming.
    used: BTreeSet<Ident>,
    /// Renamed binder -> inference type, resolved at the end.
    binders: Vec<(Ident, T)>,
    /// Event parameter -> inference type.
    params: Vec<(Ident, T)>,
}

impl Infer {
    fn new(m: &Machine) -> Infer {
        let mut used: BTreeSet<Ident> = BTreeSet::new();
        used.extend(m.constants.iter().cloned());
        used.extend(m.variables.iter().cloned());
        for s in &m.sorts {
            used.insert(s.name.clone());
            used.extend(s.elements.iter().cloned());
        }
        for e in &m.events {
            used.extend(e.params.iter().map(|(p, _)| p.clone()));
        }
        let mut elems = BTreeMap::new();
        for s in &m.sorts {
            for (i, e) in s.elements.iter().enumerate() {
                elems.insert(e.clone(), (s.name.clone(), i as u32));
            }
        }
        Infer {
            subst: Vec::new(),
            sorts: m.sorts.iter().map(|s| s.name.clone()).collect(),
            elems,
            used,
            binders: Vec::new(),
            params: Vec::new(),
        }
    }

    /// Environment containing sort names (as the full carrier set) and sort
    /// elements.
    fn global_env(&self) -> Env {
        let mut env = Env::new();
        for s in &self.sorts {
            env.insert(
                s.clone(),
                (s.clone(), T::Set(Box::new(T::Sort(s.clone())))),
            );
        }
        for (e, (s, _)) in &self.elems {
            env.insert(e.clone(), (e.clone(), T::Sort(s.clone())));
        }
        env
    }

    fn fresh(&mut self) -> T {
        self.subst.push(None);
        T::Var(self.subst.len() as u32 - 1)
    }

    fn known(&self, ty: &Ty) -> T {
        match ty {
            Ty::Int => T::Int,
            Ty::Bool => T::Bool,
            Ty::Sort(s) => T::Sort(s.clone()),
            Ty::Set(t) => T::Set(Box::new(self.known(t))),
        }
    }

    fn check_ty(&mut self, ty: &Ty, context: &str) -> Result<T, TypeError> {
        if let Ty::Sort(s) = ty {
            if !self.sorts.contains(s) {
                return Err(TypeError::UnknownSort {
                    context: context.to_string(),
                    name: s.clone(),
                });
            }
        }
        if let Ty::Set(inner) = ty {
            self.check_ty(inner, context)?;
        }
        Ok(self.known(ty))
    }

    fn shallow(&self, t: &T) -> T {
        let mut t = t.clone();
        while let T::Var(v) = t {
            match &self.subst[v as usize] {
                Some(next) => t = next.clone(),
                None => return T::Var(v),
            }
        }
        t
    }

    fn show(&self, t: &T) -> String {
        match self.shallow(t) {
            T::Int => "INT".to_string(),
            T::Bool => "BOOL".to_string(),
            T::Sort(s) => s,
            T::Set(inner) => format!("SET({})", self.show(&inner)),
            T::Var(_) => "?".to_string(),
        }
    }

    fn unify(&mut self, a: &T, b: &T, context: &str) -> Result<(), TypeError> {
        let (ra, rb) = (self.shallow(a), self.shallow(b));
        match (ra, rb) {
            (T::Var(v), t) | (t, T::Var(v)) => {
                if t == T::Var(v) {
                    return Ok(());
                }
                if self.occurs(v, &t) {
                    return Err(TypeError::Mismatch {
                        context: context.to_string(),
                        expected: self.show(&T::Var(v)),
                        found: self.show(&t),
                    });
                }
                self.subst[v as usize] = Some(t);
                Ok(())
            }
            (T::Int, T::Int) | (T::Bool, T::Bool) => Ok(()),
            (T::Sort(x), T::Sort(y)) if x == y => Ok(()),
            (T::Set(x), T::Set(y)) => self.unify(&x, &y, context),
            (x, y) => Err(TypeError::Mismatch {
                context: context.to_string(),
                expected: self.show(&x),
                found: self.show(&y),
            }),
        }
    }

    fn occurs(&self, v: u32, t: &T) -> bool {
        match self.shallow(t) {
            T::Var(w) => w == v,
            T::Set(inner) => self.occurs(v, &inner),
            _ => false,
        }
    }

    fn ground(&self, t: &T, name: &str) -> Result<Ty, TypeError> {
        match self.shallow(t) {
            T::Int => Ok(Ty::Int),
            T::Bool => Ok(Ty::Bool),
            T::Sort(s) => Ok(Ty::Sort(s)),
            T::Set(inner) => Ok(Ty::Set(Box::new(self.ground(&inner, name)?))),
            T::Var(_) => Err(TypeError::Unresolved {
                name: name.to_string(),
            }),
        }
    }

    fn resolved_binders(&self) -> Result<BTreeMap<Ident, Ty>, TypeError> {
        let mut out = BTreeMap::new();
        for (name, t) in &self.binders {
            out.insert(name.clone(), self.ground(t, name)?);
        }
        Ok(out)
    }

    fn finish_pred(&self, p: Pred) -> Result<Pred, TypeError> {
        let tys = self.resolved_binders()?;
        let mut p = p;
        fill_binders(&mut p, &tys);
        Ok(p)
    }

    fn fresh_name(&mut self, base: &str) -> Ident {
        if self.used.insert(base.to_string()) {
            return base.to_string();
        }
        for i in 1.. {
            let cand = format!("{base}_{i}");
            if self.used.insert(cand.clone()) {
                return cand;
            }
        }
        unreachable!()
    }

    /// Check a predicate, renaming binders apart and recording their types.
    fn pred(&mut self, p: Pred, env: &Env, ctx: &str) -> Result<Pred, TypeError> {
        let negated_mem = matches!(p, Pred::NotMem(_, _));
        let is_exists = matches!(p, Pred::Exists(_, _, _));
        Ok(match p {
            Pred::True => Pred::True,
            Pred::False => Pred::False,
            Pred::Cmp(op, a, b) => {
                let (a, ta) = self.expr(a, env, ctx)?;
                let (b, tb) = self.expr(b, env, ctx)?;
                match op {
                    CmpOp::Eq | CmpOp::Ne => self.unify(&ta, &tb, ctx)?,
                    _ => {
                        self.unify(&ta, &T::Int, ctx)?;
                        self.unify(&tb, &T::Int, ctx)?;
                    }
                }
                Pred::Cmp(op, a, b)
            }
            Pred::Mem(a, b) | Pred::NotMem(a, b) => {
                let (a, ta) = self.expr(a, env, ctx)?;
                let (b, tb) = self.expr(b, env, ctx)?;
                self.unify(&tb, &T::Set(Box::new(ta)), ctx)?;
                if negated_mem {
                    Pred::NotMem(a, b)
                } else {
                    Pred::Mem(a, b)
                }
            }
            Pred::Subset(a, b) => {
                let (a, ta) = self.expr(a, env, ctx)?;
                let (b, tb) = self.expr(b, env, ctx)?;
                let elem = self.fresh();
                self.unify(&ta, &T::Set(Box::new(elem)), ctx)?;
                self.unify(&ta, &tb, ctx)?;
                Pred::Subset(a, b)
            }
            Pred::And(ps) => Pred::And(
                ps.into_iter()
                    .map(|q| self.pred(q, env, ctx))
                    .collect::<Result<_, _>>()?,
            ),
            Pred::Or(ps) => Pred::Or(
                ps.into_iter()
                    .map(|q| self.pred(q, env, ctx))
                    .collect::<Result<_, _>>()?,
            ),
            Pred::Imp(a, b) => Pred::Imp(
                Box::new(self.pred(*a, env, ctx)?),
                Box::new(self.pred(*b, env, ctx)?),
            ),
            Pred::Iff(a, b) => Pred::Iff(
                Box::new(self.pred(*a, env, ctx)?),
                Box::new(self.pred(*b, env, ctx)?),
            ),
            Pred::Not(q) => Pred::Not(Box::new(self.pred(*q, env, ctx)?)),
            Pred::Exists(x, ann, body) | Pred::Forall(x, ann, body) => {
                let t = match &ann {
                    Some(ty) => self.check_ty(ty, ctx)?,
                    None => self.fresh(),
                };
                let unique = self.fresh_name(&x);
                self.binders.push((unique.clone(), t.clone()));
                let mut inner = env.clone();
                inner.insert(x.clone(), (unique.clone(), t));
                let body = Box::new(self.pred(*body, &inner, ctx)?);
                if is_exists {
                    Pred::Exists(unique, ann, body)
                } else {
                    Pred::Forall(unique, ann, body)
                }
            }
        })
    }

    fn expr(&mut self, e: Expr, env: &Env, ctx: &str) -> Result<(Expr, T), TypeError> {
        let set_op: fn(Box<Expr>, Box<Expr>) -> Expr = match &e {
            Expr::Inter(_, _) => Expr::Inter,
            Expr::Diff(_, _) => Expr::Diff,
            _ => Expr::Union,
        };
        Ok(match e {
            Expr::Int(n) => (Expr::Int(n), T::Int),
            Expr::Bool(b) => (Expr::Bool(b), T::Bool),
            Expr::Ident(x) => match env.get(&x) {
                Some((unique, t)) => (Expr::Ident(unique.clone()), t.clone()),
                None => {
                    return Err(TypeError::Unknown {
                        context: ctx.to_string(),
                        name: x,
                    })
                }
            },
            Expr::Arith(op, a, b) => {
                let (a, ta) = self.expr(*a, env, ctx)?;
                let (b, tb) = self.expr(*b, env, ctx)?;
                self.unify(&ta, &T::Int, ctx)?;
                self.unify(&tb, &T::Int, ctx)?;
                (Expr::Arith(op, Box::new(a), Box::new(b)), T::Int)
            }
            Expr::SetLit(es) => {
                let elem = self.fresh();
                let mut out = Vec::with_capacity(es.len());
                for x in es {
                    let (x, t) = self.expr(x, env, ctx)?;
                    self.unify(&t, &elem, ctx)?;
                    out.push(x);
                }
                (Expr::SetLit(out), T::Set(Box::new(elem)))
            }
            Expr::EmptySet => (Expr::EmptySet, T::Set(Box::new(self.fresh()))),
            Expr::Interval(a, b) => {
                let (a, ta) = self.expr(*a, env, ctx)?;
                let (b, tb) = self.expr(*b, env, ctx)?;
                self.unify(&ta, &T::Int, ctx)?;
                self.unify(&tb, &T::Int, ctx)?;
                (
                    Expr::Interval(Box::new(a), Box::new(b)),
                    T::Set(Box::new(T::Int)),
                )
            }
            Expr::Union(a, b) | Expr::Inter(a, b) | Expr::Diff(a, b) => {
                let (a, ta) = self.expr(*a, env, ctx)?;
                let (b, tb) = self.expr(*b, env, ctx)?;
                let elem = self.fresh();
                self.unify(&ta, &T::Set(Box::new(elem)), ctx)?;
                self.unify(&ta, &tb, ctx)?;
                (set_op(Box::new(a), Box::new(b)), ta)
            }
            Expr::Card(a) => {
                let (a, ta) = self.expr(*a, env, ctx)?;
                let elem = self.fresh();
                self.unify(&ta, &T::Set(Box::new(elem)), ctx)?;
                (Expr::Card(Box::new(a)), T::Int)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_machine;

    fn minset_like() -> Machine {
        parse_machine(
            "MACHINE M
CONSTANTS N
AXIOMS axm1: N <: 0 .. 3 ; axm2: N /= {}
VARIABLES s, min
INVARIANTS inv1: s <: 0 .. 3 ; inv2: min : 0 .. 3
EVENTS
INITIALISATION = BEGIN s := N \\/ {3} || min := 3 END
acc = ANY x WHEN min : s & x : s & x < min THEN s := s \\ {min} || min := x END
END",
        )
        .unwrap()
    }

    #[test]
    fn infers_set_and_scalar_types_from_usage() {
        let tm = typecheck(minset_like()).unwrap();
        assert_eq!(tm.types["s"], Ty::Set(Box::new(Ty::Int)));
        assert_eq!(tm.types["N"], Ty::Set(Box::new(Ty::Int)));
        assert_eq!(tm.types["min"], Ty::Int);
        let acc = tm.machine.event("acc").unwrap();
        assert_eq!(acc.params[0].1, Some(Ty::Int));
    }

    #[test]
    fn binder_type_inferred_from_membership() {
        let m = parse_machine(
            "MACHINE M
VARIABLES s
INVARIANTS inv1: s <: 0 .. 3 ; inv2: #x.(x : s)
EVENTS
INITIALISATION = BEGIN s := {1} END
END",
        )
        .unwrap();
        let tm = typecheck(m).unwrap();
        match &tm.machine.invariants[1].pred {
            Pred::Exists(_, Some(Ty::Int), _) => {}
            other => panic!("binder not annotated: {other:?}"),
        }
    }

    #[test]
    fn binders_renamed_apart_from_declared_names() {
        let m = parse_machine(
            "MACHINE M
VARIABLES x
INVARIANTS inv1: x : 0 .. 3 ; inv2: #x.(x : 0 .. 3 & x > 0)
EVENTS
INITIALISATION = BEGIN x := 1 END
END",
        )
        .unwrap();
        let tm = typecheck(m).unwrap();
        match &tm.machine.invariants[1].pred {
            Pred::Exists(name, _, _) => assert_ne!(name, "x"),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn axiom_mentioning_variable_is_rejected() {
        let m = parse_machine(
            "MACHINE M
CONSTANTS c
AXIOMS axm1: c = s
VARIABLES s
INVARIANTS inv1: s : 0 .. 3
EVENTS
INITIALISATION = BEGIN s := 0 END
END",
        )
        .unwrap();
        // `s` is not in scope for axioms; the variable check reports it
        // before general name resolution would.
        assert!(matches!(
            typecheck(m),
            Err(TypeError::AxiomUsesVariable { .. })
        ));
    }

    #[test]
    fn init_must_cover_every_variable() {
        let m = parse_machine(
            "MACHINE M
VARIABLES a, b
INVARIANTS inv1: a : 0 .. 1 ; inv2: b : 0 .. 1
EVENTS
INITIALISATION = BEGIN a := 0 END
END",
        )
        .unwrap();
        assert!(matches!(typecheck(m), Err(TypeError::InitIncomplete { .. })));
    }

    #[test]
    fn type_mismatch_between_set_and_scalar() {
        let m = parse_machine(
            "MACHINE M
VARIABLES s
INVARIANTS inv1: s <: 0 .. 3 ; inv2: s < 2
EVENTS
INITIALISATION = BEGIN s := {} END
END",
        )
        .unwrap();
        assert!(matches!(typecheck(m), Err(TypeError::Mismatch { .. })));
    }

    #[test]
    fn unconstrained_empty_set_cannot_resolve() {
        let m = parse_machine(
            "MACHINE M
VARIABLES s
INVARIANTS inv1: s = {}
EVENTS
INITIALISATION = BEGIN s := {} END
END",
        )
        .unwrap();
        assert!(matches!(typecheck(m), Err(TypeError::Unresolved { .. })));
    }

    #[test]
    fn sort_name_denotes_full_carrier() {
        let m = parse_machine(
            "MACHINE M
SETS PID = {p1, p2}
VARIABLES idle
INVARIANTS inv1: idle <: PID
EVENTS
INITIALISATION = BEGIN idle := PID END
go = ANY p WHEN p : idle THEN idle := idle \\ {p} END
END",
        )
        .unwrap();
        let tm = typecheck(m).unwrap();
        assert_eq!(
            tm.types["idle"],
            Ty::Set(Box::new(Ty::Sort("PID".to_string())))
        );
        let go = tm.machine.event("go").unwrap();
        assert_eq!(go.params[0].1, Some(Ty::Sort("PID".to_string())));
    }
}
