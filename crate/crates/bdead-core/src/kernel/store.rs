//! The constraint store: variable domains, the reified atom network, the
//! sharing table, and the chronological trail.
//!
//! Posting decomposes predicates into three ingredient kinds:
//!
//! * **atoms** — comparisons, equalities, memberships — each tied to one
//!   reification variable through a canonical key, so the same atom posted
//!   twice (in any syntactic disguise) lands on the same variable;
//! * **nodes** — conjunction and equivalence propagators over possibly
//!   negated reification literals (disjunction and implication are folded
//!   into conjunctions by sign flips);
//! * **suspensions** — quantifiers and subset constraints too wide to
//!   expand, which wait until their free variables are fixed and then let
//!   the ground evaluator decide them.
//!
//! Every mutation — domain shrink, truth assignment, and also every atom,
//! node, or watcher added while the search is running — pushes an entry on
//! the trail, so backtracking restores the store exactly.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::model::{
    eval_expr, eval_pred, free_vars, free_vars_expr, pin_source, CmpOp, EvalCtx, EvalError, Expr,
    Ident, Pred, Quant, SortDecl, Ty, Valuation, Value,
};
use crate::simplify::{normalize_atom, substitute, AtomKey};

use super::domain::{BoolDomain, Flag, IntDomain, SetDomain, SortDomain};
use super::universe::{is_closed, set_universe, type_universe};
use super::{Halt, SolveConfig, SolveStats, Truth};

/// Index of a solver variable (one name from the declared scope).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct VarId(pub(crate) usize);

/// Index of a reification variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct ReifVar(pub(crate) usize);

/// A possibly negated reference to a reification variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct ReifLit {
    pub var: ReifVar,
    pub neg: bool,
}

impl ReifLit {
    pub(crate) fn pos(var: ReifVar) -> ReifLit {
        ReifLit { var, neg: false }
    }

    pub(crate) fn negated(self) -> ReifLit {
        ReifLit {
            var: self.var,
            neg: !self.neg,
        }
    }
}

/// One variable's domain, by kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Dom {
    Int(IntDomain),
    Bool(BoolDomain),
    Sort(SortDomain),
    Set(SetDomain),
}

impl Dom {
    pub(crate) fn size(&self) -> u64 {
        match self {
            Dom::Int(d) => d.size(),
            Dom::Bool(d) => d.size(),
            Dom::Sort(d) => d.size(),
            Dom::Set(d) => d.size(),
        }
    }
}

/// Work items the agenda schedules: re-run one propagator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Work {
    Atom(usize),
    Node(usize),
    Susp(usize),
}

pub(crate) struct VarData {
    pub name: Ident,
    pub ty: Ty,
    pub dom: Dom,
    pub watchers: Vec<Work>,
}

pub(crate) struct ReifData {
    pub truth: Truth,
    pub watchers: Vec<Work>,
}

/// An interpreted atom: the canonical comparison, equality, or membership
/// shape produced by atom normalization.
#[derive(Debug, Clone)]
pub(crate) enum AtomKind {
    /// a <= b over integers.
    Le(Expr, Expr),
    /// a = b at any type (arguments in canonical order).
    Eq(Expr, Expr),
    /// element ∈ set.
    Mem(Expr, Expr),
}

impl AtomKind {
    /// The atom as a plain predicate, for ground evaluation.
    pub(crate) fn to_pred(&self) -> Pred {
        match self {
            AtomKind::Le(a, b) => Pred::Cmp(CmpOp::Le, a.clone(), b.clone()),
            AtomKind::Eq(a, b) => Pred::Cmp(CmpOp::Eq, a.clone(), b.clone()),
            AtomKind::Mem(a, b) => Pred::Mem(a.clone(), b.clone()),
        }
    }
}

pub(crate) struct AtomData {
    pub kind: AtomKind,
    pub rv: ReifVar,
    pub frees: Vec<VarId>,
}

/// Truth-propagation nodes over reification literals.
pub(crate) enum Node {
    /// out ⇔ (children[0] ∧ … ∧ children[n-1]); an empty conjunction is TRUE.
    And {
        out: ReifLit,
        children: Vec<ReifLit>,
    },
    /// res ⇔ (a ⇔ b).
    Iff {
        res: ReifLit,
        a: ReifLit,
        b: ReifLit,
    },
}

/// What a suspension stands for.
pub(crate) enum SuspKind {
    /// A quantifier whose binder range was too wide (or not static enough)
    /// to expand at post time.
    Quant {
        exists: bool,
        x: Ident,
        ty: Ty,
        body: Pred,
        /// Static binder candidates, when derivable without domain state.
        static_cands: Option<Vec<Value>>,
        /// True when the static candidates provably equal the evaluator's
        /// binder range; only then may a universal quantifier branch over
        /// counterexamples.
        exact: bool,
    },
    /// Decided by ground evaluation only (e.g. a subset constraint over an
    /// unenumerable universe).
    Whole,
}

pub(crate) struct SuspData {
    pub rv: ReifVar,
    /// The original predicate, evaluated once all free variables are fixed.
    pub pred: Pred,
    pub frees: Vec<VarId>,
    pub kind: SuspKind,
    /// Set while the current branch has already enumerated or forced the
    /// suspension's instances (trailed, so siblings start fresh).
    pub expanded: bool,
    /// Static estimated solution count (product of binder range sizes along
    /// directly nested quantifiers), fixed at creation time.
    pub estimate: u64,
}

/// One trail entry; applying it reverses exactly one mutation.
pub(crate) enum Undo {
    IntLb(VarId, i64),
    IntUb(VarId, i64),
    /// The value was added to the exclusion set.
    IntExclAdd(VarId, i64),
    /// The value was removed from the exclusion set (absorbed by a bound).
    IntExclDrop(VarId, i64),
    BoolDom(VarId, BoolDomain),
    SortDom(VarId, Vec<u32>),
    SetFlag(VarId, usize),
    Reif(ReifVar),
    Expanded(usize),
    PopReif,
    PopAtom,
    PopNode,
    PopSusp,
    Share(AtomKey),
    VarWatch(VarId),
    ReifWatch(ReifVar),
}

/// Static binder candidates for a quantifier.
pub(crate) struct Cands {
    pub values: Option<Vec<Value>>,
    pub exact: bool,
}

/// Cap on materialized candidate lists (binder ranges, universes).
pub(crate) const MAX_CANDIDATES: usize = 4096;

/// Cap on per-value scalar enumerations during propagation.
pub(crate) const MAX_SCALAR_VALUES: usize = 256;

/// A constraint store. Build one with [`Store::new`], feed it with
/// [`Store::post`], then run [`Store::propagate`] and/or [`Store::search`].
pub struct Store {
    pub(crate) cfg: SolveConfig,
    pub(crate) sorts: Vec<SortDecl>,
    pub(crate) vars: Vec<VarData>,
    pub(crate) var_index: BTreeMap<Ident, VarId>,
    pub(crate) reifs: Vec<ReifData>,
    pub(crate) atoms: Vec<AtomData>,
    pub(crate) nodes: Vec<Node>,
    pub(crate) susps: Vec<SuspData>,
    pub(crate) sharing: BTreeMap<AtomKey, ReifVar>,
    pub(crate) agenda: VecDeque<Work>,
    pub(crate) trail: Vec<Undo>,
    /// Everything posted at the root, with its polarity, for final
    /// validation of candidate solutions.
    pub(crate) posted: Vec<(Pred, bool)>,
    pub(crate) decisions: u64,
    pub(crate) clipped: bool,
    /// Marked when posting found a root-level inconsistency; search then
    /// answers Unsat immediately.
    pub(crate) failed: bool,
    /// The constant-TRUE reification variable (index 0).
    pub(crate) true_rv: ReifVar,
    pub(crate) trace: Vec<String>,
}

impl Store {
    /// Create a store over the given scope. When `seed` is supplied, its
    /// top-level conjuncts are scanned for ground set bounds (`S ⊆ G`,
    /// `S = G`) that pin set-variable universes tighter than their types.
    pub fn new(
        scope: &[(Ident, Ty)],
        sorts: &[SortDecl],
        cfg: SolveConfig,
        seed: Option<&Pred>,
    ) -> Result<Store, Halt> {
        assert!(cfg.maxint >= 1, "the global integer bound must be positive");
        let scope_vars: BTreeSet<Ident> = scope.iter().map(|(n, _)| n.clone()).collect();
        let mut store = Store {
            cfg,
            sorts: sorts.to_vec(),
            vars: Vec::with_capacity(scope.len()),
            var_index: BTreeMap::new(),
            reifs: vec![ReifData {
                truth: Truth::True,
                watchers: Vec::new(),
            }],
            atoms: Vec::new(),
            nodes: Vec::new(),
            susps: Vec::new(),
            sharing: BTreeMap::new(),
            agenda: VecDeque::new(),
            trail: Vec::new(),
            posted: Vec::new(),
            decisions: 0,
            clipped: false,
            failed: false,
            true_rv: ReifVar(0),
            trace: Vec::new(),
        };
        for (name, ty) in scope {
            let dom = match ty {
                Ty::Int => Dom::Int(IntDomain::new(-cfg.maxint, cfg.maxint)),
                Ty::Bool => Dom::Bool(BoolDomain::full()),
                Ty::Sort(s) => {
                    let decl = sorts
                        .iter()
                        .find(|d| d.name == *s)
                        .unwrap_or_else(|| panic!("unknown sort `{s}` survived typechecking"));
                    Dom::Sort(SortDomain::full(decl.elements.len()))
                }
                Ty::Set(inner) => {
                    let u = set_universe(name, inner, seed, &scope_vars, sorts, cfg.maxint)?;
                    store.clipped |= u.clipped;
                    Dom::Set(SetDomain::new(u.values))
                }
            };
            let id = VarId(store.vars.len());
            store.vars.push(VarData {
                name: name.clone(),
                ty: ty.clone(),
                dom,
                watchers: Vec::new(),
            });
            store.var_index.insert(name.clone(), id);
        }
        Ok(store)
    }

    pub(crate) fn eval_ctx(&self) -> EvalCtx<'_> {
        EvalCtx::new(&self.sorts, self.cfg.maxint)
    }

    pub fn decisions(&self) -> u64 {
        self.decisions
    }

    pub fn stats(&self) -> SolveStats {
        SolveStats {
            decisions: self.decisions,
            clipped: self.clipped,
        }
    }

    /// Propagation/decision log lines (only recorded when tracing is on).
    pub fn trace_lines(&self) -> &[String] {
        &self.trace
    }

    pub(crate) fn note(&mut self, line: impl FnOnce() -> String) {
        if self.cfg.trace && self.trace.len() < 20_000 {
            let msg = line();
            self.trace.push(msg);
        }
    }

    /// Current bounds of an integer variable, for inspection in tests and
    /// reports.
    pub fn int_bounds(&self, name: &str) -> Option<(i64, i64)> {
        let id = self.var_index.get(name)?;
        match &self.vars[id.0].dom {
            Dom::Int(d) => Some((d.lb, d.ub)),
            _ => None,
        }
    }

    /// Truth currently assigned to an atomic predicate, looked up via its
    /// canonical key. `Unknown` for atoms the store has never seen.
    pub fn truth_of_atom(&self, p: &Pred) -> Truth {
        let Ok((key, polarity)) = normalize_atom(p) else {
            return Truth::Unknown;
        };
        let Some(rv) = self.sharing.get(&key) else {
            return Truth::Unknown;
        };
        let t = self.reifs[rv.0].truth;
        if polarity {
            t
        } else {
            t.negate()
        }
    }

    /// A deterministic rendering of all backtrackable state: domains, truth
    /// assignments, watcher counts, and the sharing table. Two stores in the
    /// same search state produce identical fingerprints.
    pub fn fingerprint(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        for v in &self.vars {
            let _ = writeln!(s, "var {} {:?}", v.name, v.dom);
            let _ = writeln!(s, "  watchers {:?}", v.watchers);
        }
        for (i, r) in self.reifs.iter().enumerate() {
            let _ = writeln!(s, "r{i} {:?} watchers {:?}", r.truth, r.watchers);
        }
        for (k, rv) in &self.sharing {
            let _ = writeln!(s, "share {k:?} -> r{}", rv.0);
        }
        let _ = writeln!(s, "atoms {} nodes {}", self.atoms.len(), self.nodes.len());
        for (i, q) in self.susps.iter().enumerate() {
            let _ = writeln!(s, "susp {i} expanded {}", q.expanded);
        }
        s
    }

    // ---- trail -----------------------------------------------------------

    pub(crate) fn trail_len(&self) -> usize {
        self.trail.len()
    }

    /// Pop trail entries until the trail is `mark` entries long, reversing
    /// every recorded mutation.
    pub(crate) fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            match self.trail.pop().expect("trail underflow") {
                Undo::IntLb(v, old) => self.int_dom_mut(v).lb = old,
                Undo::IntUb(v, old) => self.int_dom_mut(v).ub = old,
                Undo::IntExclAdd(v, n) => {
                    self.int_dom_mut(v).excluded.remove(&n);
                }
                Undo::IntExclDrop(v, n) => {
                    self.int_dom_mut(v).excluded.insert(n);
                }
                Undo::BoolDom(v, old) => match &mut self.vars[v.0].dom {
                    Dom::Bool(d) => *d = old,
                    _ => unreachable!("bool undo on non-bool domain"),
                },
                Undo::SortDom(v, old) => match &mut self.vars[v.0].dom {
                    Dom::Sort(d) => d.candidates = old,
                    _ => unreachable!("sort undo on non-sort domain"),
                },
                Undo::SetFlag(v, i) => match &mut self.vars[v.0].dom {
                    Dom::Set(d) => d.flags[i] = Flag::Unknown,
                    _ => unreachable!("set undo on non-set domain"),
                },
                Undo::Reif(rv) => self.reifs[rv.0].truth = Truth::Unknown,
                Undo::Expanded(i) => self.susps[i].expanded = false,
                Undo::PopReif => {
                    self.reifs.pop();
                }
                Undo::PopAtom => {
                    self.atoms.pop();
                }
                Undo::PopNode => {
                    self.nodes.pop();
                }
                Undo::PopSusp => {
                    self.susps.pop();
                }
                Undo::Share(key) => {
                    self.sharing.remove(&key);
                }
                Undo::VarWatch(v) => {
                    self.vars[v.0].watchers.pop();
                }
                Undo::ReifWatch(rv) => {
                    self.reifs[rv.0].watchers.pop();
                }
            }
        }
    }

    fn int_dom_mut(&mut self, v: VarId) -> &mut IntDomain {
        match &mut self.vars[v.0].dom {
            Dom::Int(d) => d,
            _ => unreachable!("integer undo on non-integer domain"),
        }
    }

    // ---- truth assignment ------------------------------------------------

    pub(crate) fn lit_truth(&self, l: ReifLit) -> Truth {
        let t = self.reifs[l.var.0].truth;
        if l.neg {
            t.negate()
        } else {
            t
        }
    }

    pub(crate) fn set_lit(&mut self, l: ReifLit, t: Truth) -> Result<(), Halt> {
        debug_assert!(t.is_known());
        let want = if l.neg { t.negate() } else { t };
        self.set_rv(l.var, want)
    }

    pub(crate) fn set_rv(&mut self, rv: ReifVar, t: Truth) -> Result<(), Halt> {
        debug_assert!(t.is_known());
        let cur = self.reifs[rv.0].truth;
        if cur == t {
            return Ok(());
        }
        if cur.is_known() {
            self.note(|| format!("r{} {:?} vs {:?}: conflict", rv.0, cur, t));
            return Err(Halt::Conflict);
        }
        self.reifs[rv.0].truth = t;
        self.trail.push(Undo::Reif(rv));
        self.note(|| format!("r{} := {:?}", rv.0, t));
        self.wake_rv(rv);
        Ok(())
    }

    pub(crate) fn wake_rv(&mut self, rv: ReifVar) {
        for i in 0..self.reifs[rv.0].watchers.len() {
            let w = self.reifs[rv.0].watchers[i];
            self.agenda.push_back(w);
        }
    }

    pub(crate) fn wake_var(&mut self, v: VarId) {
        for i in 0..self.vars[v.0].watchers.len() {
            let w = self.vars[v.0].watchers[i];
            self.agenda.push_back(w);
        }
    }

    // ---- domain mutation (all trailed) ------------------------------------

    pub(crate) fn set_int_lb(&mut self, v: VarId, new_lb: i64) -> Result<(), Halt> {
        if new_lb > self.cfg.maxint {
            // The true bound lies beyond the representable range.
            self.clipped = true;
        }
        let d = self.int_dom_mut(v);
        if new_lb <= d.lb {
            return Ok(());
        }
        let old = d.lb;
        d.lb = new_lb;
        self.trail.push(Undo::IntLb(v, old));
        // Drop exclusions the new bound has swallowed, keeping the domain
        // normalized (holes strictly inside the bounds).
        loop {
            let d = self.int_dom_mut(v);
            let swallowed: Vec<i64> = d.excluded.range(..=d.lb).cloned().collect();
            if swallowed.is_empty() {
                break;
            }
            let at_bound = swallowed.contains(&d.lb);
            for n in swallowed {
                self.int_dom_mut(v).excluded.remove(&n);
                self.trail.push(Undo::IntExclDrop(v, n));
            }
            if !at_bound {
                break;
            }
            self.int_dom_mut(v).lb += 1;
        }
        let d = self.int_dom_mut(v);
        if d.lb > d.ub {
            return Err(Halt::Conflict);
        }
        self.wake_var(v);
        Ok(())
    }

    pub(crate) fn set_int_ub(&mut self, v: VarId, new_ub: i64) -> Result<(), Halt> {
        if new_ub < -self.cfg.maxint {
            self.clipped = true;
        }
        let d = self.int_dom_mut(v);
        if new_ub >= d.ub {
            return Ok(());
        }
        let old = d.ub;
        d.ub = new_ub;
        self.trail.push(Undo::IntUb(v, old));
        loop {
            let d = self.int_dom_mut(v);
            let swallowed: Vec<i64> = d.excluded.range(d.ub..).cloned().collect();
            if swallowed.is_empty() {
                break;
            }
            let at_bound = swallowed.contains(&d.ub);
            for n in swallowed {
                self.int_dom_mut(v).excluded.remove(&n);
                self.trail.push(Undo::IntExclDrop(v, n));
            }
            if !at_bound {
                break;
            }
            self.int_dom_mut(v).ub -= 1;
        }
        let d = self.int_dom_mut(v);
        if d.lb > d.ub {
            return Err(Halt::Conflict);
        }
        self.wake_var(v);
        Ok(())
    }

    pub(crate) fn exclude_int(&mut self, v: VarId, n: i64) -> Result<(), Halt> {
        let d = self.int_dom_mut(v);
        if n < d.lb || n > d.ub || d.excluded.contains(&n) {
            return Ok(());
        }
        if d.lb == d.ub {
            return Err(Halt::Conflict);
        }
        if n == d.lb {
            return self.set_int_lb(v, n + 1);
        }
        if n == d.ub {
            return self.set_int_ub(v, n - 1);
        }
        d.excluded.insert(n);
        self.trail.push(Undo::IntExclAdd(v, n));
        self.wake_var(v);
        Ok(())
    }

    pub(crate) fn set_bool(&mut self, v: VarId, b: bool) -> Result<(), Halt> {
        let Dom::Bool(d) = &self.vars[v.0].dom else {
            unreachable!("boolean assignment to non-boolean domain")
        };
        let old = *d;
        if (b && !d.can_true) || (!b && !d.can_false) {
            return Err(Halt::Conflict);
        }
        if d.is_fixed() {
            return Ok(());
        }
        let new = BoolDomain {
            can_false: !b,
            can_true: b,
        };
        match &mut self.vars[v.0].dom {
            Dom::Bool(d) => *d = new,
            _ => unreachable!(),
        }
        self.trail.push(Undo::BoolDom(v, old));
        self.wake_var(v);
        Ok(())
    }

    /// Restrict a sort variable to the candidate indices satisfying `keep`.
    pub(crate) fn sort_retain(
        &mut self,
        v: VarId,
        keep: impl Fn(u32) -> bool,
    ) -> Result<(), Halt> {
        let Dom::Sort(d) = &self.vars[v.0].dom else {
            unreachable!("sort restriction on non-sort domain")
        };
        let new: Vec<u32> = d.candidates.iter().cloned().filter(|i| keep(*i)).collect();
        if new.len() == d.candidates.len() {
            return Ok(());
        }
        let old = d.candidates.clone();
        match &mut self.vars[v.0].dom {
            Dom::Sort(d) => d.candidates = new.clone(),
            _ => unreachable!(),
        }
        self.trail.push(Undo::SortDom(v, old));
        if new.is_empty() {
            return Err(Halt::Conflict);
        }
        self.wake_var(v);
        Ok(())
    }

    pub(crate) fn set_flag(&mut self, v: VarId, idx: usize, f: Flag) -> Result<(), Halt> {
        debug_assert!(f != Flag::Unknown);
        let Dom::Set(d) = &self.vars[v.0].dom else {
            unreachable!("flag assignment on non-set domain")
        };
        let cur = d.flags[idx];
        if cur == f {
            return Ok(());
        }
        if cur != Flag::Unknown {
            return Err(Halt::Conflict);
        }
        match &mut self.vars[v.0].dom {
            Dom::Set(d) => d.flags[idx] = f,
            _ => unreachable!(),
        }
        self.trail.push(Undo::SetFlag(v, idx));
        if self.cfg.trace {
            let name = self.vars[v.0].name.clone();
            self.note(move || format!("{name} flag {idx} := {f:?}"));
        }
        self.wake_var(v);
        Ok(())
    }

    // ---- network construction ---------------------------------------------

    pub(crate) fn fresh_rv(&mut self) -> ReifVar {
        let rv = ReifVar(self.reifs.len());
        self.reifs.push(ReifData {
            truth: Truth::Unknown,
            watchers: Vec::new(),
        });
        self.trail.push(Undo::PopReif);
        rv
    }

    pub(crate) fn watch_var(&mut self, v: VarId, w: Work) {
        self.vars[v.0].watchers.push(w);
        self.trail.push(Undo::VarWatch(v));
    }

    pub(crate) fn watch_rv(&mut self, rv: ReifVar, w: Work) {
        self.reifs[rv.0].watchers.push(w);
        self.trail.push(Undo::ReifWatch(rv));
    }

    fn add_atom(&mut self, kind: AtomKind, key: AtomKey) -> ReifVar {
        let rv = self.fresh_rv();
        let frees = match &kind {
            AtomKind::Le(a, b) | AtomKind::Eq(a, b) | AtomKind::Mem(a, b) => {
                let mut f = self.expr_frees(a);
                f.extend(self.expr_frees(b));
                f.sort();
                f.dedup();
                f
            }
        };
        let idx = self.atoms.len();
        self.atoms.push(AtomData {
            kind,
            rv,
            frees: frees.clone(),
        });
        self.trail.push(Undo::PopAtom);
        for f in frees {
            self.watch_var(f, Work::Atom(idx));
        }
        self.watch_rv(rv, Work::Atom(idx));
        self.sharing.insert(key.clone(), rv);
        self.trail.push(Undo::Share(key));
        self.agenda.push_back(Work::Atom(idx));
        rv
    }

    fn add_node(&mut self, node: Node) {
        let idx = self.nodes.len();
        let mut lits = Vec::new();
        match &node {
            Node::And { out, children } => {
                lits.push(*out);
                lits.extend(children.iter().cloned());
            }
            Node::Iff { res, a, b } => lits.extend([*res, *a, *b]),
        }
        self.nodes.push(node);
        self.trail.push(Undo::PopNode);
        for l in lits {
            self.watch_rv(l.var, Work::Node(idx));
        }
        self.agenda.push_back(Work::Node(idx));
    }

    fn add_susp(&mut self, susp: SuspData) {
        let idx = self.susps.len();
        let frees = susp.frees.clone();
        let rv = susp.rv;
        self.susps.push(susp);
        self.trail.push(Undo::PopSusp);
        for f in frees {
            self.watch_var(f, Work::Susp(idx));
        }
        self.watch_rv(rv, Work::Susp(idx));
        self.agenda.push_back(Work::Susp(idx));
    }

    pub(crate) fn mark_expanded(&mut self, i: usize) {
        if !self.susps[i].expanded {
            self.susps[i].expanded = true;
            self.trail.push(Undo::Expanded(i));
        }
    }

    // ---- posting ----------------------------------------------------------

    /// Post a predicate with the given polarity (`true` asserts it, `false`
    /// asserts its negation). An error marks the store failed: `Conflict`
    /// for an immediate inconsistency, the other variants for
    /// well-definedness and representability problems.
    pub fn post(&mut self, p: &Pred, polarity: bool) -> Result<(), Halt> {
        if self.failed {
            return Err(Halt::Conflict);
        }
        self.posted.push((p.clone(), polarity));
        let r = self.post_inner(p, polarity);
        if r.is_err() {
            self.failed = true;
        }
        r
    }

    fn post_inner(&mut self, p: &Pred, polarity: bool) -> Result<(), Halt> {
        match (p, polarity) {
            (Pred::True, true) | (Pred::False, false) => Ok(()),
            (Pred::True, false) | (Pred::False, true) => Err(Halt::Conflict),
            (Pred::And(ps), true) => {
                for q in ps {
                    self.post_inner(q, true)?;
                }
                Ok(())
            }
            (Pred::Or(ps), false) => {
                for q in ps {
                    self.post_inner(q, false)?;
                }
                Ok(())
            }
            (Pred::Not(q), _) => self.post_inner(q, !polarity),
            (Pred::Imp(a, b), false) => {
                self.post_inner(a, true)?;
                self.post_inner(b, false)
            }
            _ => {
                let lit = self.reify(p)?;
                self.set_lit(lit, Truth::from_bool(polarity))
            }
        }
    }

    /// Reify a predicate: return a literal whose truth is constrained to
    /// match the predicate's.
    pub(crate) fn reify(&mut self, p: &Pred) -> Result<ReifLit, Halt> {
        match p {
            Pred::True => Ok(ReifLit::pos(self.true_rv)),
            Pred::False => Ok(ReifLit::pos(self.true_rv).negated()),
            Pred::Not(q) => Ok(self.reify(q)?.negated()),
            Pred::And(ps) => {
                let children = ps
                    .iter()
                    .map(|q| self.reify(q))
                    .collect::<Result<Vec<_>, _>>()?;
                let o = self.fresh_rv();
                self.add_node(Node::And {
                    out: ReifLit::pos(o),
                    children,
                });
                Ok(ReifLit::pos(o))
            }
            Pred::Or(ps) => {
                // o ⇔ ∨ li is ¬o ⇔ ∧ ¬li.
                let children = ps
                    .iter()
                    .map(|q| self.reify(q).map(ReifLit::negated))
                    .collect::<Result<Vec<_>, _>>()?;
                let o = self.fresh_rv();
                self.add_node(Node::And {
                    out: ReifLit::pos(o).negated(),
                    children,
                });
                Ok(ReifLit::pos(o))
            }
            Pred::Imp(a, b) => {
                // o ⇔ (a ⇒ b) is ¬o ⇔ (a ∧ ¬b).
                let la = self.reify(a)?;
                let lb = self.reify(b)?.negated();
                let o = self.fresh_rv();
                self.add_node(Node::And {
                    out: ReifLit::pos(o).negated(),
                    children: vec![la, lb],
                });
                Ok(ReifLit::pos(o))
            }
            Pred::Iff(a, b) => {
                let la = self.reify(a)?;
                let lb = self.reify(b)?;
                let o = self.fresh_rv();
                self.add_node(Node::Iff {
                    res: ReifLit::pos(o),
                    a: la,
                    b: lb,
                });
                Ok(ReifLit::pos(o))
            }
            Pred::Exists(x, ty, body) => self.quantifier(true, x, ty, body),
            Pred::Forall(x, ty, body) => self.quantifier(false, x, ty, body),
            Pred::Cmp(..) | Pred::Mem(..) | Pred::NotMem(..) | Pred::Subset(..) => {
                let (key, polarity) = normalize_atom(p).expect("comparison shapes are atomic");
                let lit = self.reify_key(&key)?;
                Ok(if polarity { lit } else { lit.negated() })
            }
        }
    }

    /// Reification of a canonical atom key through the sharing table.
    fn reify_key(&mut self, key: &AtomKey) -> Result<ReifLit, Halt> {
        if let Some(rv) = self.sharing.get(key) {
            return Ok(ReifLit::pos(*rv));
        }
        match key {
            AtomKey::Le(a, b) => Ok(ReifLit::pos(
                self.add_atom(AtomKind::Le(a.clone(), b.clone()), key.clone()),
            )),
            AtomKey::Eq(a, b) => Ok(ReifLit::pos(
                self.add_atom(AtomKind::Eq(a.clone(), b.clone()), key.clone()),
            )),
            AtomKey::Mem(a, b) => Ok(ReifLit::pos(
                self.add_atom(AtomKind::Mem(a.clone(), b.clone()), key.clone()),
            )),
            AtomKey::Subset(a, b) => {
                let lit = self.subset_lit(a, b)?;
                debug_assert!(!lit.neg, "subset reification yields a positive literal");
                self.sharing.insert(key.clone(), lit.var);
                self.trail.push(Undo::Share(key.clone()));
                Ok(lit)
            }
        }
    }

    /// Subset is never reified as one atom: `a ⊆ b` becomes the conjunction
    /// of `u ∈ a ⇒ u ∈ b` over every candidate member `u` of `a`. When that
    /// candidate universe cannot be enumerated, the constraint suspends and
    /// is decided by ground evaluation.
    fn subset_lit(&mut self, a: &Expr, b: &Expr) -> Result<ReifLit, Halt> {
        let univ = self.static_members(a)?;
        match univ {
            Some(values) if values.len() <= self.cfg.expand_threshold => {
                let children = values
                    .iter()
                    .map(|u| {
                        let inst = Pred::Imp(
                            Box::new(Pred::Mem(u.to_expr(), a.clone())),
                            Box::new(Pred::Mem(u.to_expr(), b.clone())),
                        );
                        self.reify(&inst)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let o = self.fresh_rv();
                self.add_node(Node::And {
                    out: ReifLit::pos(o),
                    children,
                });
                Ok(ReifLit::pos(o))
            }
            _ => {
                let rv = self.fresh_rv();
                let pred = Pred::Subset(a.clone(), b.clone());
                let frees = self.pred_frees(&pred);
                self.add_susp(SuspData {
                    rv,
                    pred,
                    frees,
                    kind: SuspKind::Whole,
                    expanded: false,
                    estimate: u64::MAX,
                });
                Ok(ReifLit::pos(rv))
            }
        }
    }

    /// Reify a quantifier: expand small static binder ranges into plain
    /// conjunctions/disjunctions of instances, suspend anything wider.
    fn quantifier(
        &mut self,
        exists: bool,
        x: &Ident,
        ty: &Option<Ty>,
        body: &Pred,
    ) -> Result<ReifLit, Halt> {
        let ty = ty.as_ref().expect("binder must be typed before solving");
        let cands = self.static_candidates(exists, x, ty, body)?;
        if let Some(values) = &cands.values {
            // An existential disjunction over a superset of the true binder
            // range is still exact (extra instances are false), but a
            // universal conjunction is only faithful over the exact range.
            if values.len() <= self.cfg.expand_threshold && (exists || cands.exact) {
                return self.expand_quantifier(exists, x, body, values.clone());
            }
        }
        let rv = self.fresh_rv();
        let pred = if exists {
            Pred::Exists(x.clone(), Some(ty.clone()), Box::new(body.clone()))
        } else {
            Pred::Forall(x.clone(), Some(ty.clone()), Box::new(body.clone()))
        };
        let frees = self.pred_frees(&pred);
        let estimate = self.quant_estimate(&cands.values, body);
        self.add_susp(SuspData {
            rv,
            pred,
            frees,
            kind: SuspKind::Quant {
                exists,
                x: x.clone(),
                ty: ty.clone(),
                body: body.clone(),
                static_cands: cands.values,
                exact: cands.exact,
            },
            expanded: false,
            estimate,
        });
        Ok(ReifLit::pos(rv))
    }

    /// Estimated solution count of a suspended quantifier: the product of
    /// the binder range sizes along directly nested quantifiers, with a flat
    /// sentinel for ranges that could not be enumerated.
    fn quant_estimate(&self, values: &Option<Vec<Value>>, body: &Pred) -> u64 {
        const UNKNOWN_RANGE: u64 = 4096;
        let n = values
            .as_ref()
            .map(|v| v.len() as u64)
            .unwrap_or(UNKNOWN_RANGE);
        let inner = match body {
            Pred::Exists(x, Some(ty), b) | Pred::Forall(x, Some(ty), b) => {
                let exists = matches!(body, Pred::Exists(..));
                match self.static_candidates(exists, x, ty, b) {
                    Ok(c) => self.quant_estimate(&c.values, b),
                    Err(_) => UNKNOWN_RANGE,
                }
            }
            _ => 1,
        };
        n.saturating_mul(inner)
    }

    fn expand_quantifier(
        &mut self,
        exists: bool,
        x: &Ident,
        body: &Pred,
        values: Vec<Value>,
    ) -> Result<ReifLit, Halt> {
        let children = values
            .iter()
            .map(|v| {
                let inst = substitute(body, x, &v.to_expr());
                let lit = self.reify(&inst)?;
                Ok(if exists { lit.negated() } else { lit })
            })
            .collect::<Result<Vec<_>, Halt>>()?;
        let o = self.fresh_rv();
        // forall: o ⇔ ∧ instances; exists: ¬o ⇔ ∧ ¬instances.
        let out = if exists {
            ReifLit::pos(o).negated()
        } else {
            ReifLit::pos(o)
        };
        self.add_node(Node::And { out, children });
        Ok(ReifLit::pos(o))
    }

    // ---- static binder analysis -------------------------------------------

    /// Binder candidates derivable without consulting domain state, mirroring
    /// the ground evaluator's range derivation (including which bodies admit
    /// narrowing at all — see [`pin_source`]). `exact` certifies that the
    /// evaluator would iterate exactly these values under every valuation;
    /// it holds when no range-pinning conjunct had to be skipped for
    /// mentioning scope variables.
    pub(crate) fn static_candidates(
        &self,
        exists: bool,
        x: &Ident,
        ty: &Ty,
        body: &Pred,
    ) -> Result<Cands, Halt> {
        match ty {
            Ty::Bool => Ok(Cands {
                values: Some(vec![Value::Bool(false), Value::Bool(true)]),
                exact: true,
            }),
            Ty::Sort(s) => {
                let decl = self
                    .sorts
                    .iter()
                    .find(|d| d.name == *s)
                    .unwrap_or_else(|| panic!("unknown sort `{s}` survived typechecking"));
                Ok(Cands {
                    values: Some(
                        decl.elements
                            .iter()
                            .map(|e| Value::Elem(e.clone()))
                            .collect(),
                    ),
                    exact: true,
                })
            }
            Ty::Int => self.static_int_candidates(exists, x, body),
            Ty::Set(_) => self.static_set_candidates(exists, x, body),
        }
    }

    fn static_int_candidates(&self, exists: bool, x: &Ident, body: &Pred) -> Result<Cands, Halt> {
        let ctx = self.eval_ctx();
        let maxint = self.cfg.maxint;
        let mut lo = -maxint;
        let mut hi = maxint;
        let mut explicit: Option<BTreeSet<i64>> = None;
        let mut exact = true;
        let empty = Valuation::new();
        let q = if exists { Quant::Exists } else { Quant::Forall };
        let pins = pin_source(q, body).map(Pred::flat_conjuncts).unwrap_or_default();
        for c in pins {
            match c {
                Pred::Mem(Expr::Ident(n), s) if n == x && !mentions(s, x) => {
                    if self.expr_is_closed(s) {
                        match eval_expr(s, &empty, &ctx) {
                            Ok(Value::Set(members)) => {
                                let ints: BTreeSet<i64> =
                                    members.iter().filter_map(Value::as_int).collect();
                                explicit = Some(match explicit {
                                    None => ints,
                                    Some(prev) => prev.intersection(&ints).cloned().collect(),
                                });
                            }
                            Ok(_) => {}
                            Err(EvalError::WellDefinedness { expr }) => {
                                return Err(Halt::Wd(EvalError::WellDefinedness { expr }))
                            }
                            Err(_) => exact = false,
                        }
                    } else {
                        exact = false;
                    }
                }
                Pred::Cmp(op, lhs, rhs) => {
                    let (op, bound) = match (lhs, rhs) {
                        (Expr::Ident(n), e) if n == x && !mentions(e, x) => (*op, e),
                        (e, Expr::Ident(n)) if n == x && !mentions(e, x) => (flip(*op), e),
                        _ => continue,
                    };
                    if op == CmpOp::Ne {
                        // The evaluator ignores disequalities when ranging.
                        continue;
                    }
                    if !self.expr_is_closed(bound) {
                        exact = false;
                        continue;
                    }
                    let b = match eval_expr(bound, &empty, &ctx) {
                        Ok(Value::Int(b)) => b,
                        Ok(_) => continue,
                        Err(EvalError::WellDefinedness { expr }) => {
                            return Err(Halt::Wd(EvalError::WellDefinedness { expr }))
                        }
                        Err(_) => {
                            exact = false;
                            continue;
                        }
                    };
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
                        CmpOp::Ne => unreachable!(),
                    }
                }
                _ => {}
            }
        }
        if let Some(values) = explicit {
            return Ok(Cands {
                values: Some(
                    values
                        .into_iter()
                        .filter(|n| *n >= lo && *n <= hi)
                        .map(Value::Int)
                        .collect(),
                ),
                exact,
            });
        }
        let width = hi.saturating_sub(lo).saturating_add(1);
        if width < 0 || width as usize > MAX_CANDIDATES {
            return Ok(Cands {
                values: None,
                exact,
            });
        }
        Ok(Cands {
            values: Some((lo..=hi).map(Value::Int).collect()),
            exact,
        })
    }

    fn static_set_candidates(&self, exists: bool, x: &Ident, body: &Pred) -> Result<Cands, Halt> {
        let ctx = self.eval_ctx();
        let empty = Valuation::new();
        let q = if exists { Quant::Exists } else { Quant::Forall };
        let Some(src) = pin_source(q, body) else {
            // No honest finite domain exists for an unpinned set binder; the
            // suspension can only resolve by grounding (where the evaluator
            // reports the same limitation).
            return Ok(Cands {
                values: None,
                exact: false,
            });
        };
        // The evaluator commits to the first range-pinning conjunct.
        for c in src.flat_conjuncts() {
            let (pin, of): (&Expr, fn(Value) -> Vec<Value>) = match c {
                Pred::Cmp(CmpOp::Eq, Expr::Ident(n), e) if n == x && !mentions(e, x) => {
                    (e, |v| vec![v])
                }
                Pred::Cmp(CmpOp::Eq, e, Expr::Ident(n)) if n == x && !mentions(e, x) => {
                    (e, |v| vec![v])
                }
                Pred::Mem(Expr::Ident(n), ss) if n == x && !mentions(ss, x) => (ss, |v| match v {
                    Value::Set(m) => m.into_iter().collect(),
                    _ => Vec::new(),
                }),
                Pred::Subset(Expr::Ident(n), g) if n == x && !mentions(g, x) => {
                    if !self.expr_is_closed(g) {
                        return Ok(Cands {
                            values: None,
                            exact: false,
                        });
                    }
                    let base: Vec<Value> = match eval_expr(g, &empty, &ctx) {
                        Ok(Value::Set(m)) => m.into_iter().collect(),
                        Ok(_) => continue,
                        Err(EvalError::WellDefinedness { expr }) => {
                            return Err(Halt::Wd(EvalError::WellDefinedness { expr }))
                        }
                        Err(_) => {
                            return Ok(Cands {
                                values: None,
                                exact: false,
                            })
                        }
                    };
                    if base.len() > 12 {
                        return Ok(Cands {
                            values: None,
                            exact: false,
                        });
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
                    return Ok(Cands {
                        values: Some(out),
                        exact: true,
                    });
                }
                _ => continue,
            };
            if !self.expr_is_closed(pin) {
                return Ok(Cands {
                    values: None,
                    exact: false,
                });
            }
            return match eval_expr(pin, &empty, &ctx) {
                Ok(v) => Ok(Cands {
                    values: Some(of(v)),
                    exact: true,
                }),
                Err(EvalError::WellDefinedness { expr }) => {
                    Err(Halt::Wd(EvalError::WellDefinedness { expr }))
                }
                Err(_) => Ok(Cands {
                    values: None,
                    exact: false,
                }),
            };
        }
        Ok(Cands {
            values: None,
            exact: false,
        })
    }

    /// Branch-independent over-approximation of a set expression's possible
    /// members, from variable universes and ground evaluation. Used to build
    /// permanent network ties, so it must not consult current domain state.
    pub(crate) fn static_members(&self, e: &Expr) -> Result<Option<Vec<Value>>, Halt> {
        let r = match e {
            Expr::Ident(n) => match self.var_index.get(n) {
                Some(v) => match &self.vars[v.0].dom {
                    Dom::Set(d) => Some(d.universe.clone()),
                    _ => None,
                },
                None => self.eval_closed_members(e)?,
            },
            Expr::EmptySet => Some(Vec::new()),
            Expr::SetLit(es) => {
                let mut out = Vec::new();
                for el in es {
                    match self.static_scalar_values(el)? {
                        Some(vs) => out.extend(vs),
                        None => return Ok(None),
                    }
                }
                Some(out)
            }
            Expr::Interval(a, b) if self.expr_is_closed(a) && self.expr_is_closed(b) => {
                self.eval_closed_members(e)?
            }
            Expr::Interval(_, _) => {
                let width = 2 * self.cfg.maxint + 1;
                if width as usize > MAX_CANDIDATES {
                    None
                } else {
                    Some((-self.cfg.maxint..=self.cfg.maxint).map(Value::Int).collect())
                }
            }
            Expr::Union(a, b) => match (self.static_members(a)?, self.static_members(b)?) {
                (Some(ua), Some(ub)) => {
                    let mut out = ua;
                    out.extend(ub);
                    Some(out)
                }
                _ => None,
            },
            Expr::Inter(a, b) => match (self.static_members(a)?, self.static_members(b)?) {
                (Some(ua), Some(ub)) => {
                    let set: BTreeSet<Value> = ub.into_iter().collect();
                    Some(ua.into_iter().filter(|v| set.contains(v)).collect())
                }
                (Some(u), None) | (None, Some(u)) => Some(u),
                (None, None) => None,
            },
            Expr::Diff(a, _) => self.static_members(a)?,
            _ => {
                if self.expr_is_closed(e) {
                    self.eval_closed_members(e)?
                } else {
                    None
                }
            }
        };
        let r = r.map(|mut values| {
            values.sort();
            values.dedup();
            values
        });
        if r.as_ref().is_some_and(|v| v.len() > MAX_CANDIDATES) {
            return Ok(None);
        }
        Ok(r)
    }

    fn eval_closed_members(&self, e: &Expr) -> Result<Option<Vec<Value>>, Halt> {
        if !self.expr_is_closed(e) || !e.wd_safe() {
            return Ok(None);
        }
        match eval_expr(e, &Valuation::new(), &self.eval_ctx()) {
            Ok(Value::Set(m)) => Ok(Some(m.into_iter().collect())),
            Ok(_) => Ok(None),
            Err(EvalError::WellDefinedness { expr }) => {
                Err(Halt::Wd(EvalError::WellDefinedness { expr }))
            }
            Err(_) => Ok(None),
        }
    }

    /// Branch-independent possible values of a scalar expression: the full
    /// range of its type for variables, the single value when closed.
    fn static_scalar_values(&self, e: &Expr) -> Result<Option<Vec<Value>>, Halt> {
        if let Expr::Ident(n) = e {
            if let Some(v) = self.var_index.get(n) {
                return match &self.vars[v.0].ty {
                    Ty::Set(_) => Ok(None),
                    ty => {
                        let u = type_universe(ty, &self.sorts, self.cfg.maxint)
                            .map(|u| u.values)
                            .ok();
                        Ok(u)
                    }
                };
            }
        }
        if self.expr_is_closed(e) && e.wd_safe() {
            return match eval_expr(e, &Valuation::new(), &self.eval_ctx()) {
                Ok(v) => Ok(Some(vec![v])),
                Err(_) => Ok(None),
            };
        }
        Ok(None)
    }

    // ---- scope helpers ------------------------------------------------------

    pub(crate) fn expr_is_closed(&self, e: &Expr) -> bool {
        let scope: BTreeSet<Ident> = self.var_index.keys().cloned().collect();
        is_closed(e, &scope)
    }

    pub(crate) fn expr_frees(&self, e: &Expr) -> Vec<VarId> {
        free_vars_expr(e)
            .iter()
            .filter_map(|n| self.var_index.get(n).cloned())
            .collect()
    }

    pub(crate) fn pred_frees(&self, p: &Pred) -> Vec<VarId> {
        free_vars(p)
            .iter()
            .filter_map(|n| self.var_index.get(n).cloned())
            .collect()
    }

    /// The value of a variable once its domain is a singleton.
    pub(crate) fn ground_value(&self, v: VarId) -> Option<Value> {
        match &self.vars[v.0].dom {
            Dom::Int(d) => d.is_fixed().then(|| Value::Int(d.lb)),
            Dom::Bool(d) => d.value().map(Value::Bool),
            Dom::Sort(d) => {
                if !d.is_fixed() {
                    return None;
                }
                let Ty::Sort(s) = &self.vars[v.0].ty else {
                    unreachable!("sort domain on non-sort variable")
                };
                let decl = self.sorts.iter().find(|sd| sd.name == *s)?;
                Some(Value::Elem(
                    decl.elements[d.candidates[0] as usize].clone(),
                ))
            }
            Dom::Set(d) => d.value(),
        }
    }

    pub(crate) fn frees_ground(&self, frees: &[VarId]) -> bool {
        frees.iter().all(|v| self.ground_value(*v).is_some())
    }

    pub(crate) fn valuation_of(&self, frees: &[VarId]) -> Valuation {
        let mut val = Valuation::new();
        for v in frees {
            let name = self.vars[v.0].name.clone();
            let value = self
                .ground_value(*v)
                .expect("valuation requested before grounding");
            val.insert(name, value);
        }
        val
    }

    /// Total assignment once every variable is determined.
    pub(crate) fn valuation(&self) -> Valuation {
        let all: Vec<VarId> = (0..self.vars.len()).map(VarId).collect();
        self.valuation_of(&all)
    }

    /// Check a candidate assignment against everything posted, with the
    /// independent ground evaluator.
    pub(crate) fn validate(&self, val: &Valuation) -> bool {
        let ctx = self.eval_ctx();
        self.posted.iter().all(|(p, polarity)| {
            matches!(eval_pred(p, val, &ctx), Ok(b) if b == *polarity)
        })
    }
}

/// Does the expression mention the identifier (free)?
pub(crate) fn mentions(e: &Expr, x: &Ident) -> bool {
    free_vars_expr(e).contains(x)
}

/// Mirror a comparison across its arguments.
pub(crate) fn flip(op: CmpOp) -> CmpOp {
    match op {
        CmpOp::Lt => CmpOp::Gt,
        CmpOp::Gt => CmpOp::Lt,
        CmpOp::Le => CmpOp::Ge,
        CmpOp::Ge => CmpOp::Le,
        CmpOp::Eq | CmpOp::Ne => op,
    }
}
