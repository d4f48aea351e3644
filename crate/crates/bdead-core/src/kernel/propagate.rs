//! The propagation engine: runs the agenda to a fixpoint, firing node,
//! atom, and suspension propagators.
//!
//! Every atom first tries the ground fast path — once all its free variables
//! are fixed, the ground evaluator decides it outright (and detects
//! well-definedness errors). Otherwise kind-specific rules fire: interval
//! arithmetic for comparisons, candidate pruning for equalities, and
//! three-valued membership with flag forcing for set constraints. Division
//! and modulo are never propagated through; their atoms wait for the ground
//! fast path, except that a divisor forced to zero aborts immediately.

use std::collections::BTreeSet;

use crate::model::{
    eval_expr, eval_pred, pin_source, ArithOp, CmpOp, EvalError, Expr, Pred, Quant, Ty, Value,
};
use crate::simplify::substitute;

use super::domain::Flag;
use super::store::{
    flip, mentions, AtomKind, Dom, Node, ReifLit, ReifVar, Store, SuspKind, VarId, Work,
    MAX_CANDIDATES, MAX_SCALAR_VALUES,
};
use super::{Halt, Truth};

/// How an equality atom is interpreted, decided by the shape and types of
/// its arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EKind {
    Int,
    Bool,
    Elem,
    Set,
}

/// Wide sentinel bounds for integer quantities nothing is known about
/// (division results and the like). Kept far from the i64 edges so interval
/// arithmetic over sentinels cannot overflow even after a few operations.
const WIDE: i64 = i64::MAX / 4;

fn clamp(x: i128) -> i64 {
    x.clamp(i64::MIN as i128 / 4, i64::MAX as i128 / 4) as i64
}

/// Map a ground-evaluation error onto a solver halt: well-definedness
/// aborts the solve as its own verdict, resource errors give up with
/// "unknown".
fn eval_halt(e: EvalError) -> Halt {
    match e {
        EvalError::WellDefinedness { expr } => Halt::Wd(EvalError::WellDefinedness { expr }),
        EvalError::Unbound { ref name } => {
            debug_assert!(false, "unbound identifier `{name}` reached the solver");
            Halt::TooWide(e.to_string())
        }
        other => Halt::TooWide(other.to_string()),
    }
}

impl Store {
    /// Run the agenda to a fixpoint. A conflict marks the store failed (the
    /// search engine uses [`Store::run_agenda`] directly instead, because
    /// for it a conflict just means "backtrack").
    pub fn propagate(&mut self) -> Result<(), Halt> {
        let r = self.run_agenda();
        if r.is_err() {
            self.failed = true;
        }
        r
    }

    pub(crate) fn run_agenda(&mut self) -> Result<(), Halt> {
        let mut steps = 0usize;
        while let Some(w) = self.agenda.pop_front() {
            steps += 1;
            if steps % 4096 == 0 && self.cfg.budget.exhausted(self.decisions) {
                self.agenda.clear();
                return Err(Halt::Budget);
            }
            let r = match w {
                Work::Atom(i) => self.atom_propagate(i),
                Work::Node(i) => self.node_propagate(i),
                Work::Susp(i) => self.susp_propagate(i),
            };
            if let Err(halt) = r {
                self.agenda.clear();
                return Err(halt);
            }
        }
        Ok(())
    }

    // ---- nodes -------------------------------------------------------------

    fn node_propagate(&mut self, i: usize) -> Result<(), Halt> {
        enum Shape {
            And(ReifLit, Vec<ReifLit>),
            Iff(ReifLit, ReifLit, ReifLit),
        }
        let shape = match &self.nodes[i] {
            Node::And { out, children } => Shape::And(*out, children.clone()),
            Node::Iff { res, a, b } => Shape::Iff(*res, *a, *b),
        };
        match shape {
            Shape::And(out, children) => {
                let mut any_false = false;
                let mut unknown = Vec::new();
                for c in &children {
                    match self.lit_truth(*c) {
                        Truth::False => any_false = true,
                        Truth::Unknown => unknown.push(*c),
                        Truth::True => {}
                    }
                }
                if any_false {
                    self.set_lit(out, Truth::False)?;
                } else if unknown.is_empty() {
                    self.set_lit(out, Truth::True)?;
                }
                match self.lit_truth(out) {
                    Truth::True => {
                        for c in children {
                            self.set_lit(c, Truth::True)?;
                        }
                    }
                    Truth::False => {
                        if !any_false && unknown.len() == 1 {
                            self.set_lit(unknown[0], Truth::False)?;
                        }
                    }
                    Truth::Unknown => {}
                }
                Ok(())
            }
            Shape::Iff(res, a, b) => {
                let (tr, ta, tb) = (self.lit_truth(res), self.lit_truth(a), self.lit_truth(b));
                if let (Some(x), Some(y)) = (ta.as_bool(), tb.as_bool()) {
                    self.set_lit(res, Truth::from_bool(x == y))?;
                }
                if let (Some(r), Some(x)) = (tr.as_bool(), ta.as_bool()) {
                    self.set_lit(b, Truth::from_bool(r == x))?;
                }
                if let (Some(r), Some(y)) = (tr.as_bool(), tb.as_bool()) {
                    self.set_lit(a, Truth::from_bool(r == y))?;
                }
                Ok(())
            }
        }
    }

    // ---- atoms -------------------------------------------------------------

    fn atom_propagate(&mut self, i: usize) -> Result<(), Halt> {
        let kind = self.atoms[i].kind.clone();
        let rv = self.atoms[i].rv;
        let frees = self.atoms[i].frees.clone();

        // Ground fast path: the evaluator decides the fixed atom (and is the
        // sole authority on division and modulo).
        if self.frees_ground(&frees) {
            let val = self.valuation_of(&frees);
            let p = kind.to_pred();
            let b = eval_pred(&p, &val, &self.eval_ctx()).map_err(eval_halt)?;
            return self.set_rv(rv, Truth::from_bool(b));
        }

        let t = self.reifs[rv.0].truth;
        match kind {
            AtomKind::Le(a, b) => self.le_rules(&a, &b, t, rv),
            AtomKind::Eq(a, b) => match self.expr_kind(&a) {
                EKind::Int => self.eq_int(&a, &b, t, rv),
                EKind::Bool => self.eq_bool(&a, &b, t, rv),
                EKind::Elem => self.eq_elem(&a, &b, t, rv),
                EKind::Set => self.eq_set(&a, &b, t, rv),
            },
            AtomKind::Mem(x, s) => self.mem_rules(&x, &s, t, rv),
        }
    }

    fn le_rules(
        &mut self,
        a: &Expr,
        b: &Expr,
        t: Truth,
        rv: ReifVar,
    ) -> Result<(), Halt> {
        let ra = self.int_range(a)?;
        let rb = self.int_range(b)?;
        match t {
            Truth::Unknown => {
                if ra.1 <= rb.0 {
                    self.set_rv(rv, Truth::True)?;
                } else if ra.0 > rb.1 {
                    self.set_rv(rv, Truth::False)?;
                }
                Ok(())
            }
            Truth::True => {
                self.tighten_upper(a, rb.1)?;
                self.tighten_lower(b, ra.0)
            }
            Truth::False => {
                // a > b
                self.tighten_lower(a, rb.0.saturating_add(1))?;
                self.tighten_upper(b, ra.1.saturating_sub(1))
            }
        }
    }

    fn eq_int(
        &mut self,
        a: &Expr,
        b: &Expr,
        t: Truth,
        rv: ReifVar,
    ) -> Result<(), Halt> {
        let ra = self.int_range(a)?;
        let rb = self.int_range(b)?;
        match t {
            Truth::Unknown => {
                if ra.1 < rb.0 || rb.1 < ra.0 {
                    return self.set_rv(rv, Truth::False);
                }
                // A fixed value missing from the other side's domain decides
                // the atom without search (the "hole" case).
                if ra.0 == ra.1 {
                    if let Expr::Ident(n) = b {
                        if let Some(v) = self.var_index.get(n).cloned() {
                            if let Dom::Int(d) = &self.vars[v.0].dom {
                                if !d.contains(ra.0) {
                                    return self.set_rv(rv, Truth::False);
                                }
                            }
                        }
                    }
                }
                if rb.0 == rb.1 {
                    if let Expr::Ident(n) = a {
                        if let Some(v) = self.var_index.get(n).cloned() {
                            if let Dom::Int(d) = &self.vars[v.0].dom {
                                if !d.contains(rb.0) {
                                    return self.set_rv(rv, Truth::False);
                                }
                            }
                        }
                    }
                }
                Ok(())
            }
            Truth::True => {
                self.tighten_upper(a, rb.1)?;
                self.tighten_lower(a, rb.0)?;
                self.tighten_upper(b, ra.1)?;
                self.tighten_lower(b, ra.0)
            }
            Truth::False => {
                if ra.0 == ra.1 {
                    self.exclude_value(b, ra.0)?;
                }
                if rb.0 == rb.1 {
                    self.exclude_value(a, rb.0)?;
                }
                Ok(())
            }
        }
    }

    fn eq_bool(
        &mut self,
        a: &Expr,
        b: &Expr,
        t: Truth,
        rv: ReifVar,
    ) -> Result<(), Halt> {
        let da = self.bool_desc(a);
        let db = self.bool_desc(b);
        let (Some(da), Some(db)) = (da, db) else {
            return Ok(());
        };
        let fixed = |d: (bool, bool)| match d {
            (true, false) => Some(false),
            (false, true) => Some(true),
            _ => None,
        };
        match t {
            Truth::Unknown => match (fixed(da.0), fixed(db.0)) {
                (Some(x), Some(y)) => self.set_rv(rv, Truth::from_bool(x == y)),
                _ => Ok(()),
            },
            Truth::True => {
                if let (Some(x), Some(v)) = (fixed(da.0), db.1) {
                    self.set_bool(v, x)?;
                }
                if let (Some(y), Some(v)) = (fixed(db.0), da.1) {
                    self.set_bool(v, y)?;
                }
                Ok(())
            }
            Truth::False => {
                if let (Some(x), Some(v)) = (fixed(da.0), db.1) {
                    self.set_bool(v, !x)?;
                }
                if let (Some(y), Some(v)) = (fixed(db.0), da.1) {
                    self.set_bool(v, !y)?;
                }
                Ok(())
            }
        }
    }

    /// (possible-false/possible-true flags, variable id if the expression is
    /// a boolean variable).
    #[allow(clippy::type_complexity)]
    fn bool_desc(&self, e: &Expr) -> Option<((bool, bool), Option<VarId>)> {
        match e {
            Expr::Bool(b) => Some(((!b, *b), None)),
            Expr::Ident(n) => {
                let v = self.var_index.get(n).cloned()?;
                match &self.vars[v.0].dom {
                    Dom::Bool(d) => Some(((d.can_false, d.can_true), Some(v))),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    fn eq_elem(
        &mut self,
        a: &Expr,
        b: &Expr,
        t: Truth,
        rv: ReifVar,
    ) -> Result<(), Halt> {
        let da = self.elem_desc(a);
        let db = self.elem_desc(b);
        let (Some((ca, va)), Some((cb, vb))) = (da, db) else {
            return Ok(());
        };
        match t {
            Truth::Unknown => {
                if ca.iter().all(|i| !cb.contains(i)) {
                    return self.set_rv(rv, Truth::False);
                }
                if ca.len() == 1 && cb == ca {
                    return self.set_rv(rv, Truth::True);
                }
                Ok(())
            }
            Truth::True => {
                if let Some(v) = va {
                    let allowed: BTreeSet<u32> = cb.iter().cloned().collect();
                    self.sort_retain(v, |i| allowed.contains(&i))?;
                }
                if let Some(v) = vb {
                    let allowed: BTreeSet<u32> = ca.iter().cloned().collect();
                    self.sort_retain(v, |i| allowed.contains(&i))?;
                }
                Ok(())
            }
            Truth::False => {
                if ca.len() == 1 {
                    if let Some(v) = vb {
                        let gone = ca[0];
                        self.sort_retain(v, |i| i != gone)?;
                    }
                }
                if cb.len() == 1 {
                    if let Some(v) = va {
                        let gone = cb[0];
                        self.sort_retain(v, |i| i != gone)?;
                    }
                }
                Ok(())
            }
        }
    }

    /// (candidate element indices, variable id when the expression is a sort
    /// variable). Literal elements give a singleton candidate list.
    fn elem_desc(&self, e: &Expr) -> Option<(Vec<u32>, Option<VarId>)> {
        let Expr::Ident(n) = e else { return None };
        if let Some(v) = self.var_index.get(n).cloned() {
            let Ty::Sort(_) = &self.vars[v.0].ty else {
                return None;
            };
            match &self.vars[v.0].dom {
                Dom::Sort(d) => return Some((d.candidates.clone(), Some(v))),
                _ => return None,
            }
        }
        // A literal element: find its index in its sort.
        for sd in &self.sorts {
            if let Some(idx) = sd.elements.iter().position(|el| el == n) {
                return Some((vec![idx as u32], None));
            }
        }
        None
    }

    fn eq_set(
        &mut self,
        a: &Expr,
        b: &Expr,
        t: Truth,
        rv: ReifVar,
    ) -> Result<(), Halt> {
        let (Some(ua), Some(ub)) = (self.possible_members(a)?, self.possible_members(b)?) else {
            return Ok(());
        };
        let mut universe: Vec<Value> = ua;
        universe.extend(ub);
        universe.sort();
        universe.dedup();
        match t {
            Truth::Unknown => {
                let mut all_settled = true;
                for v in &universe {
                    let sa = self.mem_status(v, a)?;
                    let sb = self.mem_status(v, b)?;
                    match (sa.as_bool(), sb.as_bool()) {
                        (Some(x), Some(y)) if x != y => {
                            return self.set_rv(rv, Truth::False);
                        }
                        (Some(_), Some(_)) => {}
                        _ => all_settled = false,
                    }
                }
                if all_settled {
                    self.set_rv(rv, Truth::True)?;
                }
                Ok(())
            }
            Truth::True => {
                for v in &universe {
                    let sa = self.mem_status(v, a)?;
                    let sb = self.mem_status(v, b)?;
                    match (sa.as_bool(), sb.as_bool()) {
                        (Some(x), Some(y)) if x != y => return Err(Halt::Conflict),
                        (Some(x), None) => self.force_mem(v, b, x)?,
                        (None, Some(y)) => self.force_mem(v, a, y)?,
                        _ => {}
                    }
                }
                Ok(())
            }
            Truth::False => {
                let mut open = Vec::new();
                for v in &universe {
                    let sa = self.mem_status(v, a)?;
                    let sb = self.mem_status(v, b)?;
                    match (sa.as_bool(), sb.as_bool()) {
                        (Some(x), Some(y)) if x != y => return Ok(()), // already unequal
                        (Some(_), Some(_)) => {}
                        _ => open.push((v.clone(), sa, sb)),
                    }
                }
                if open.is_empty() {
                    // Every candidate member agrees definitely: the sets are
                    // equal, contradicting the disequality.
                    return Err(Halt::Conflict);
                }
                if open.len() == 1 {
                    let (v, sa, sb) = &open[0];
                    // The only undecided value must break the tie.
                    match (sa.as_bool(), sb.as_bool()) {
                        (Some(x), None) => self.force_mem(v, b, !x)?,
                        (None, Some(y)) => self.force_mem(v, a, !y)?,
                        _ => {}
                    }
                }
                Ok(())
            }
        }
    }

    fn mem_rules(
        &mut self,
        x: &Expr,
        s: &Expr,
        t: Truth,
        rv: ReifVar,
    ) -> Result<(), Halt> {
        // A fixed element: force it in or out of the set structurally.
        let x_frees = self.expr_frees(x);
        if self.frees_ground(&x_frees) {
            let gx = eval_expr(x, &self.valuation_of(&x_frees), &self.eval_ctx())
                .map_err(eval_halt)?;
            return match t {
                Truth::True => self.force_mem(&gx, s, true),
                Truth::False => self.force_mem(&gx, s, false),
                Truth::Unknown => {
                    if let Some(b) = self.mem_status(&gx, s)?.as_bool() {
                        self.set_rv(rv, Truth::from_bool(b))?;
                    }
                    Ok(())
                }
            };
        }

        match t {
            Truth::True => self.prune_member(x, s, true),
            Truth::False => self.prune_member(x, s, false),
            Truth::Unknown => {
                let Some(values) = self.possible_values(x)? else {
                    return Ok(());
                };
                if values.is_empty() {
                    return Ok(());
                }
                let mut all_in = true;
                let mut all_out = true;
                for v in &values {
                    match self.mem_status(v, s)?.as_bool() {
                        Some(true) => all_out = false,
                        Some(false) => all_in = false,
                        None => {
                            all_in = false;
                            all_out = false;
                        }
                    }
                }
                if all_in {
                    self.set_rv(rv, Truth::True)?;
                } else if all_out {
                    self.set_rv(rv, Truth::False)?;
                }
                Ok(())
            }
        }
    }

    /// Narrow a non-ground element's domain so membership in `s` can (or, on
    /// `inside == false`, cannot) hold.
    fn prune_member(&mut self, x: &Expr, s: &Expr, inside: bool) -> Result<(), Halt> {
        // Fast path for integer variables against a fixed evaluable set:
        // tighten to the member span and punch interior holes.
        if let Expr::Ident(n) = x {
            if let Some(v) = self.var_index.get(n).cloned() {
                if matches!(self.vars[v.0].dom, Dom::Int(_)) {
                    let s_frees = self.expr_frees(s);
                    if self.frees_ground(&s_frees) && s.wd_safe() {
                        let sv =
                            eval_expr(s, &self.valuation_of(&s_frees), &self.eval_ctx())
                                .map_err(eval_halt)?;
                        let Value::Set(members) = sv else {
                            return Ok(());
                        };
                        let ints: BTreeSet<i64> =
                            members.iter().filter_map(Value::as_int).collect();
                        if inside {
                            let (Some(lo), Some(hi)) =
                                (ints.iter().next().cloned(), ints.iter().last().cloned())
                            else {
                                return Err(Halt::Conflict); // x ∈ ∅
                            };
                            self.set_int_lb(v, lo)?;
                            self.set_int_ub(v, hi)?;
                            let (clo, chi) = match &self.vars[v.0].dom {
                                Dom::Int(d) => (d.lb, d.ub),
                                _ => unreachable!(),
                            };
                            if ints.len() <= 64 && chi.saturating_sub(clo) <= 4096 {
                                for n in clo..=chi {
                                    if !ints.contains(&n) {
                                        self.exclude_int(v, n)?;
                                    }
                                }
                            }
                        } else if ints.len() <= 64 {
                            for n in ints {
                                self.exclude_int(v, n)?;
                            }
                        }
                        return Ok(());
                    }
                }
                // General scalar pruning per candidate value.
                let Some(values) = self.possible_values(x)? else {
                    return Ok(());
                };
                for val in values {
                    if let Some(b) = self.mem_status(&val, s)?.as_bool() {
                        if b != inside {
                            self.remove_scalar(v, &val)?;
                        }
                    }
                }
                return Ok(());
            }
        }
        // Composite element: only a global consistency check.
        if let Some(values) = self.possible_values(x)? {
            let mut possible = false;
            for v in &values {
                match self.mem_status(v, s)?.as_bool() {
                    Some(b) if b != inside => {}
                    _ => possible = true,
                }
            }
            if !possible && !values.is_empty() {
                return Err(Halt::Conflict);
            }
        }
        Ok(())
    }

    /// Remove one candidate value from a scalar variable's domain.
    fn remove_scalar(&mut self, v: VarId, val: &Value) -> Result<(), Halt> {
        match (&self.vars[v.0].dom, val) {
            (Dom::Int(_), Value::Int(n)) => self.exclude_int(v, *n),
            (Dom::Bool(_), Value::Bool(b)) => self.set_bool(v, !b),
            (Dom::Sort(_), Value::Elem(name)) => {
                let Ty::Sort(s) = &self.vars[v.0].ty else {
                    unreachable!("sort domain on non-sort variable")
                };
                let decl = self
                    .sorts
                    .iter()
                    .find(|sd| sd.name == *s)
                    .expect("sorts are closed under typechecking");
                let Some(idx) = decl.elements.iter().position(|el| el == name) else {
                    return Ok(());
                };
                let gone = idx as u32;
                self.sort_retain(v, |i| i != gone)
            }
            _ => Ok(()),
        }
    }

    // ---- interval arithmetic -----------------------------------------------

    /// Current bounds of an integer expression. Division and modulo yield
    /// exact values when ground, a conflict when the divisor is pinned to
    /// zero, and wide sentinel bounds otherwise — they are checked, never
    /// propagated through.
    pub(crate) fn int_range(&self, e: &Expr) -> Result<(i64, i64), Halt> {
        match e {
            Expr::Int(n) => Ok((*n, *n)),
            Expr::Ident(n) => match self.var_index.get(n) {
                Some(v) => match &self.vars[v.0].dom {
                    Dom::Int(d) => Ok((d.lb, d.ub)),
                    _ => Ok((-WIDE, WIDE)),
                },
                None => Ok((-WIDE, WIDE)),
            },
            Expr::Arith(op, a, b) => {
                let ra = self.int_range(a)?;
                let rb = self.int_range(b)?;
                match op {
                    ArithOp::Add => Ok((
                        clamp(ra.0 as i128 + rb.0 as i128),
                        clamp(ra.1 as i128 + rb.1 as i128),
                    )),
                    ArithOp::Sub => Ok((
                        clamp(ra.0 as i128 - rb.1 as i128),
                        clamp(ra.1 as i128 - rb.0 as i128),
                    )),
                    ArithOp::Mul => {
                        let corners = [
                            ra.0 as i128 * rb.0 as i128,
                            ra.0 as i128 * rb.1 as i128,
                            ra.1 as i128 * rb.0 as i128,
                            ra.1 as i128 * rb.1 as i128,
                        ];
                        Ok((
                            clamp(*corners.iter().min().expect("nonempty")),
                            clamp(*corners.iter().max().expect("nonempty")),
                        ))
                    }
                    ArithOp::Div | ArithOp::Mod => {
                        if rb == (0, 0) {
                            return Err(Halt::Wd(EvalError::WellDefinedness {
                                expr: e.clone(),
                            }));
                        }
                        if ra.0 == ra.1 && rb.0 == rb.1 {
                            let r = if *op == ArithOp::Div {
                                ra.0.checked_div(rb.0)
                            } else {
                                ra.0.checked_rem(rb.0)
                            };
                            return Ok(r.map(|q| (q, q)).unwrap_or((-WIDE, WIDE)));
                        }
                        Ok((-WIDE, WIDE))
                    }
                }
            }
            Expr::Card(s) => self.card_range(s),
            // Non-integer expressions never reach integer contexts after
            // typechecking; give harmless wide bounds.
            _ => Ok((-WIDE, WIDE)),
        }
    }

    fn card_range(&self, s: &Expr) -> Result<(i64, i64), Halt> {
        match s {
            Expr::Ident(n) => match self.var_index.get(n) {
                Some(v) => match &self.vars[v.0].dom {
                    Dom::Set(d) => Ok(d.card_range()),
                    _ => Ok((0, WIDE)),
                },
                None => {
                    // A sort used as a set has a fixed cardinality.
                    match self.sorts.iter().find(|sd| sd.name == *n) {
                        Some(sd) => Ok((sd.elements.len() as i64, sd.elements.len() as i64)),
                        None => Ok((0, WIDE)),
                    }
                }
            },
            Expr::EmptySet => Ok((0, 0)),
            Expr::SetLit(es) => Ok((i64::from(!es.is_empty()), es.len() as i64)),
            Expr::Interval(a, b) => {
                let ra = self.int_range(a)?;
                let rb = self.int_range(b)?;
                let max = clamp(rb.1 as i128 - ra.0 as i128 + 1).max(0);
                let min = clamp(rb.0 as i128 - ra.1 as i128 + 1).max(0);
                Ok((min, max))
            }
            Expr::Union(a, b) => {
                let ca = self.card_range(a)?;
                let cb = self.card_range(b)?;
                Ok((ca.0.max(cb.0), clamp(ca.1 as i128 + cb.1 as i128)))
            }
            Expr::Inter(a, b) => {
                let ca = self.card_range(a)?;
                let cb = self.card_range(b)?;
                Ok((0, ca.1.min(cb.1)))
            }
            Expr::Diff(a, b) => {
                let ca = self.card_range(a)?;
                let cb = self.card_range(b)?;
                Ok(((ca.0 - cb.1).max(0), ca.1))
            }
            _ => Ok((0, WIDE)),
        }
    }

    /// Assert `e <= ub`, pushing the bound into variables through addition,
    /// subtraction, and cardinality.
    fn tighten_upper(&mut self, e: &Expr, ub: i64) -> Result<(), Halt> {
        let r = self.int_range(e)?;
        if r.1 <= ub {
            return Ok(());
        }
        if r.0 > ub {
            return Err(Halt::Conflict);
        }
        match e {
            Expr::Ident(n) => {
                if let Some(v) = self.var_index.get(n).cloned() {
                    if matches!(self.vars[v.0].dom, Dom::Int(_)) {
                        return self.set_int_ub(v, ub);
                    }
                }
                Ok(())
            }
            Expr::Arith(ArithOp::Add, a, b) => {
                let ra = self.int_range(a)?;
                let rb = self.int_range(b)?;
                self.tighten_upper(a, clamp(ub as i128 - rb.0 as i128))?;
                self.tighten_upper(b, clamp(ub as i128 - ra.0 as i128))
            }
            Expr::Arith(ArithOp::Sub, a, b) => {
                let ra = self.int_range(a)?;
                let rb = self.int_range(b)?;
                self.tighten_upper(a, clamp(ub as i128 + rb.1 as i128))?;
                self.tighten_lower(b, clamp(ra.0 as i128 - ub as i128))
            }
            Expr::Card(s) => self.tighten_card_upper(s, ub),
            _ => Ok(()),
        }
    }

    /// Assert `e >= lb`.
    fn tighten_lower(&mut self, e: &Expr, lb: i64) -> Result<(), Halt> {
        let r = self.int_range(e)?;
        if r.0 >= lb {
            return Ok(());
        }
        if r.1 < lb {
            return Err(Halt::Conflict);
        }
        match e {
            Expr::Ident(n) => {
                if let Some(v) = self.var_index.get(n).cloned() {
                    if matches!(self.vars[v.0].dom, Dom::Int(_)) {
                        return self.set_int_lb(v, lb);
                    }
                }
                Ok(())
            }
            Expr::Arith(ArithOp::Add, a, b) => {
                let ra = self.int_range(a)?;
                let rb = self.int_range(b)?;
                self.tighten_lower(a, clamp(lb as i128 - rb.1 as i128))?;
                self.tighten_lower(b, clamp(lb as i128 - ra.1 as i128))
            }
            Expr::Arith(ArithOp::Sub, a, b) => {
                let ra = self.int_range(a)?;
                let rb = self.int_range(b)?;
                self.tighten_lower(a, clamp(lb as i128 + rb.0 as i128))?;
                self.tighten_upper(b, clamp(ra.1 as i128 - lb as i128))
            }
            Expr::Card(s) => self.tighten_card_lower(s, lb),
            _ => Ok(()),
        }
    }

    /// Cardinality at most `ub`: once the definite members reach the cap,
    /// every undecided flag goes out.
    fn tighten_card_upper(&mut self, s: &Expr, ub: i64) -> Result<(), Halt> {
        let Expr::Ident(n) = s else { return Ok(()) };
        let Some(v) = self.var_index.get(n).cloned() else {
            return Ok(());
        };
        let Dom::Set(d) = &self.vars[v.0].dom else {
            return Ok(());
        };
        let count_in = d.count_in() as i64;
        if count_in > ub {
            return Err(Halt::Conflict);
        }
        if count_in == ub && d.count_unknown() > 0 {
            let unknowns: Vec<usize> = d
                .flags
                .iter()
                .enumerate()
                .filter(|(_, f)| **f == Flag::Unknown)
                .map(|(i, _)| i)
                .collect();
            for i in unknowns {
                self.set_flag(v, i, Flag::Out)?;
            }
        }
        Ok(())
    }

    /// Cardinality at least `lb`: once the possible members barely reach the
    /// floor, every undecided flag goes in.
    fn tighten_card_lower(&mut self, s: &Expr, lb: i64) -> Result<(), Halt> {
        let Expr::Ident(n) = s else { return Ok(()) };
        let Some(v) = self.var_index.get(n).cloned() else {
            return Ok(());
        };
        let Dom::Set(d) = &self.vars[v.0].dom else {
            return Ok(());
        };
        let count_in = d.count_in() as i64;
        let count_unknown = d.count_unknown() as i64;
        if count_in + count_unknown < lb {
            return Err(Halt::Conflict);
        }
        if count_in + count_unknown == lb && count_unknown > 0 {
            let unknowns: Vec<usize> = d
                .flags
                .iter()
                .enumerate()
                .filter(|(_, f)| **f == Flag::Unknown)
                .map(|(i, _)| i)
                .collect();
            for i in unknowns {
                self.set_flag(v, i, Flag::In)?;
            }
        }
        Ok(())
    }

    /// Assert `e != n`, pushed through addition and subtraction with one
    /// fixed operand (forward checking).
    fn exclude_value(&mut self, e: &Expr, n: i64) -> Result<(), Halt> {
        match e {
            Expr::Int(m) => {
                if *m == n {
                    Err(Halt::Conflict)
                } else {
                    Ok(())
                }
            }
            Expr::Ident(name) => {
                if let Some(v) = self.var_index.get(name).cloned() {
                    if matches!(self.vars[v.0].dom, Dom::Int(_)) {
                        return self.exclude_int(v, n);
                    }
                }
                Ok(())
            }
            Expr::Arith(ArithOp::Add, a, b) => {
                let ra = self.int_range(a)?;
                let rb = self.int_range(b)?;
                if ra.0 == ra.1 {
                    self.exclude_value(b, clamp(n as i128 - ra.0 as i128))?;
                }
                if rb.0 == rb.1 {
                    self.exclude_value(a, clamp(n as i128 - rb.0 as i128))?;
                }
                Ok(())
            }
            Expr::Arith(ArithOp::Sub, a, b) => {
                let ra = self.int_range(a)?;
                let rb = self.int_range(b)?;
                if ra.0 == ra.1 {
                    // a - b != n  with a fixed: b != a - n
                    self.exclude_value(b, clamp(ra.0 as i128 - n as i128))?;
                }
                if rb.0 == rb.1 {
                    self.exclude_value(a, clamp(n as i128 + rb.0 as i128))?;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    // ---- three-valued membership --------------------------------------------

    /// Is `v` a member of the set expression `e`, under current knowledge?
    pub(crate) fn mem_status(&self, v: &Value, e: &Expr) -> Result<Truth, Halt> {
        match e {
            Expr::Ident(n) => {
                if let Some(var) = self.var_index.get(n) {
                    match &self.vars[var.0].dom {
                        Dom::Set(d) => Ok(match d.flag_of(v) {
                            Flag::In => Truth::True,
                            Flag::Out => Truth::False,
                            Flag::Unknown => Truth::Unknown,
                        }),
                        _ => Ok(Truth::Unknown),
                    }
                } else if let Some(sd) = self.sorts.iter().find(|sd| sd.name == *n) {
                    Ok(Truth::from_bool(matches!(
                        v,
                        Value::Elem(el) if sd.elements.contains(el)
                    )))
                } else {
                    Ok(Truth::Unknown)
                }
            }
            Expr::EmptySet => Ok(Truth::False),
            Expr::SetLit(es) => {
                let mut any_unknown = false;
                for el in es {
                    let frees = self.expr_frees(el);
                    if self.frees_ground(&frees) {
                        let gv = eval_expr(el, &self.valuation_of(&frees), &self.eval_ctx())
                            .map_err(eval_halt)?;
                        if gv == *v {
                            return Ok(Truth::True);
                        }
                    } else {
                        any_unknown = true;
                    }
                }
                Ok(if any_unknown {
                    Truth::Unknown
                } else {
                    Truth::False
                })
            }
            Expr::Interval(a, b) => {
                let Value::Int(n) = v else {
                    return Ok(Truth::False);
                };
                let ra = self.int_range(a)?;
                let rb = self.int_range(b)?;
                if ra.1 <= *n && *n <= rb.0 {
                    Ok(Truth::True)
                } else if *n < ra.0 || *n > rb.1 {
                    Ok(Truth::False)
                } else {
                    Ok(Truth::Unknown)
                }
            }
            Expr::Union(a, b) => {
                let sa = self.mem_status(v, a)?;
                let sb = self.mem_status(v, b)?;
                Ok(match (sa, sb) {
                    (Truth::True, _) | (_, Truth::True) => Truth::True,
                    (Truth::False, Truth::False) => Truth::False,
                    _ => Truth::Unknown,
                })
            }
            Expr::Inter(a, b) => {
                let sa = self.mem_status(v, a)?;
                let sb = self.mem_status(v, b)?;
                Ok(match (sa, sb) {
                    (Truth::True, Truth::True) => Truth::True,
                    (Truth::False, _) | (_, Truth::False) => Truth::False,
                    _ => Truth::Unknown,
                })
            }
            Expr::Diff(a, b) => {
                let sa = self.mem_status(v, a)?;
                let sb = self.mem_status(v, b)?;
                Ok(match (sa, sb) {
                    (Truth::True, Truth::False) => Truth::True,
                    (Truth::False, _) | (_, Truth::True) => Truth::False,
                    _ => Truth::Unknown,
                })
            }
            _ => {
                // Anything else: evaluable once its variables are fixed.
                let frees = self.expr_frees(e);
                if self.frees_ground(&frees) {
                    let sv = eval_expr(e, &self.valuation_of(&frees), &self.eval_ctx())
                        .map_err(eval_halt)?;
                    match sv {
                        Value::Set(m) => Ok(Truth::from_bool(m.contains(v))),
                        _ => Ok(Truth::Unknown),
                    }
                } else {
                    Ok(Truth::Unknown)
                }
            }
        }
    }

    /// Force `v ∈ e` (or `v ∉ e`), structurally: set flags on variables,
    /// push bounds through intervals, split unions and differences when only
    /// one branch remains.
    pub(crate) fn force_mem(&mut self, v: &Value, e: &Expr, inside: bool) -> Result<(), Halt> {
        match e {
            Expr::Ident(n) => {
                if let Some(var) = self.var_index.get(n).cloned() {
                    if let Dom::Set(d) = &self.vars[var.0].dom {
                        return match d.index_of(v) {
                            Some(i) => {
                                self.set_flag(var, i, if inside { Flag::In } else { Flag::Out })
                            }
                            None => {
                                if inside {
                                    Err(Halt::Conflict)
                                } else {
                                    Ok(())
                                }
                            }
                        };
                    }
                }
                self.check_mem(v, e, inside)
            }
            Expr::Union(a, b) => {
                if inside {
                    let sa = self.mem_status(v, a)?;
                    let sb = self.mem_status(v, b)?;
                    match (sa, sb) {
                        (Truth::False, Truth::False) => Err(Halt::Conflict),
                        (Truth::False, _) => self.force_mem(v, b, true),
                        (_, Truth::False) => self.force_mem(v, a, true),
                        _ => Ok(()),
                    }
                } else {
                    self.force_mem(v, a, false)?;
                    self.force_mem(v, b, false)
                }
            }
            Expr::Inter(a, b) => {
                if inside {
                    self.force_mem(v, a, true)?;
                    self.force_mem(v, b, true)
                } else {
                    let sa = self.mem_status(v, a)?;
                    let sb = self.mem_status(v, b)?;
                    match (sa, sb) {
                        (Truth::True, Truth::True) => Err(Halt::Conflict),
                        (Truth::True, _) => self.force_mem(v, b, false),
                        (_, Truth::True) => self.force_mem(v, a, false),
                        _ => Ok(()),
                    }
                }
            }
            Expr::Diff(a, b) => {
                if inside {
                    self.force_mem(v, a, true)?;
                    self.force_mem(v, b, false)
                } else {
                    let sa = self.mem_status(v, a)?;
                    let sb = self.mem_status(v, b)?;
                    match (sa, sb) {
                        (Truth::True, Truth::False) => Err(Halt::Conflict),
                        (Truth::True, _) => self.force_mem(v, b, true),
                        (_, Truth::False) => self.force_mem(v, a, false),
                        _ => Ok(()),
                    }
                }
            }
            Expr::Interval(a, b) => {
                if inside {
                    let Value::Int(n) = v else {
                        return Err(Halt::Conflict);
                    };
                    self.tighten_upper(a, *n)?;
                    self.tighten_lower(b, *n)
                } else {
                    self.check_mem(v, e, inside)
                }
            }
            _ => self.check_mem(v, e, inside),
        }
    }

    /// Consistency check where forcing has no structural handle.
    fn check_mem(&mut self, v: &Value, e: &Expr, inside: bool) -> Result<(), Halt> {
        match self.mem_status(v, e)?.as_bool() {
            Some(b) if b != inside => Err(Halt::Conflict),
            _ => Ok(()),
        }
    }

    // ---- dynamic enumeration --------------------------------------------------

    /// Possible values of a scalar expression under current domains, when
    /// enumerably few; `None` when too many or not enumerable.
    pub(crate) fn possible_values(&self, e: &Expr) -> Result<Option<Vec<Value>>, Halt> {
        let frees = self.expr_frees(e);
        if self.frees_ground(&frees) {
            let v = eval_expr(e, &self.valuation_of(&frees), &self.eval_ctx())
                .map_err(eval_halt)?;
            return Ok(Some(vec![v]));
        }
        let out = match e {
            Expr::Ident(n) => {
                let Some(v) = self.var_index.get(n) else {
                    return Ok(None);
                };
                match &self.vars[v.0].dom {
                    Dom::Int(d) => {
                        if d.size() as usize > MAX_SCALAR_VALUES {
                            None
                        } else {
                            Some(d.values().map(Value::Int).collect())
                        }
                    }
                    Dom::Bool(d) => {
                        let mut vs = Vec::new();
                        if d.can_false {
                            vs.push(Value::Bool(false));
                        }
                        if d.can_true {
                            vs.push(Value::Bool(true));
                        }
                        Some(vs)
                    }
                    Dom::Sort(d) => {
                        let Ty::Sort(s) = &self.vars[v.0].ty else {
                            unreachable!("sort domain on non-sort variable")
                        };
                        let decl = self
                            .sorts
                            .iter()
                            .find(|sd| sd.name == *s)
                            .expect("sorts are closed under typechecking");
                        Some(
                            d.candidates
                                .iter()
                                .map(|i| Value::Elem(decl.elements[*i as usize].clone()))
                                .collect(),
                        )
                    }
                    Dom::Set(_) => None, // handled by the ground path when fixed
                }
            }
            _ => None,
        };
        Ok(out.filter(|vs: &Vec<Value>| vs.len() <= MAX_SCALAR_VALUES))
    }

    /// Over-approximation of a set expression's possible members under
    /// current domains: a superset of the members of every value the
    /// expression can still take in this branch.
    pub(crate) fn possible_members(&self, e: &Expr) -> Result<Option<Vec<Value>>, Halt> {
        let frees = self.expr_frees(e);
        if self.frees_ground(&frees) && e.wd_safe() {
            return match eval_expr(e, &self.valuation_of(&frees), &self.eval_ctx()) {
                Ok(Value::Set(m)) => Ok(Some(m.into_iter().collect())),
                Ok(_) => Ok(None),
                Err(err) => Err(eval_halt(err)),
            };
        }
        let out = match e {
            Expr::Ident(n) => match self.var_index.get(n) {
                Some(v) => match &self.vars[v.0].dom {
                    Dom::Set(d) => Some(
                        d.universe
                            .iter()
                            .zip(&d.flags)
                            .filter(|(_, f)| **f != Flag::Out)
                            .map(|(v, _)| v.clone())
                            .collect(),
                    ),
                    _ => None,
                },
                None => None, // non-variable idents are ground, handled above
            },
            Expr::EmptySet => Some(Vec::new()),
            Expr::SetLit(es) => {
                let mut out = Vec::new();
                for el in es {
                    match self.possible_values(el)? {
                        Some(vs) => out.extend(vs),
                        None => return Ok(None),
                    }
                }
                Some(out)
            }
            Expr::Interval(a, b) => {
                let ra = self.int_range(a)?;
                let rb = self.int_range(b)?;
                let lo = ra.0;
                let hi = rb.1;
                if lo > hi {
                    Some(Vec::new())
                } else if (hi as i128 - lo as i128 + 1) > MAX_CANDIDATES as i128 {
                    None
                } else {
                    Some((lo..=hi).map(Value::Int).collect())
                }
            }
            Expr::Union(a, b) => {
                match (self.possible_members(a)?, self.possible_members(b)?) {
                    (Some(mut ua), Some(ub)) => {
                        ua.extend(ub);
                        Some(ua)
                    }
                    _ => None,
                }
            }
            Expr::Inter(a, b) => {
                match (self.possible_members(a)?, self.possible_members(b)?) {
                    (Some(ua), Some(ub)) => {
                        let keep: BTreeSet<Value> = ub.into_iter().collect();
                        Some(ua.into_iter().filter(|v| keep.contains(v)).collect())
                    }
                    (Some(u), None) | (None, Some(u)) => Some(u),
                    (None, None) => None,
                }
            }
            Expr::Diff(a, _) => self.possible_members(a)?,
            _ => None,
        };
        let out = out.map(|mut vs| {
            vs.sort();
            vs.dedup();
            vs
        });
        Ok(out.filter(|vs| vs.len() <= MAX_CANDIDATES))
    }

    // ---- suspensions ------------------------------------------------------------

    fn susp_propagate(&mut self, i: usize) -> Result<(), Halt> {
        let rv = self.susps[i].rv;
        let frees = self.susps[i].frees.clone();

        // Ground: the evaluator decides the whole suspended predicate.
        if self.frees_ground(&frees) {
            let pred = self.susps[i].pred.clone();
            let val = self.valuation_of(&frees);
            let b = eval_pred(&pred, &val, &self.eval_ctx()).map_err(eval_halt)?;
            return self.set_rv(rv, Truth::from_bool(b));
        }

        // A refuted existential forces its body false at every remaining
        // candidate, as soon as the candidates can be enumerated. (The dual —
        // expanding a satisfied universal — is unsound over approximate
        // candidate sets, so universals wait for grounding or exact-range
        // counterexample search.)
        if self.susps[i].expanded || self.reifs[rv.0].truth != Truth::False {
            return Ok(());
        }
        let SuspKind::Quant {
            exists: true,
            ref x,
            ref body,
            ..
        } = self.susps[i].kind
        else {
            return Ok(());
        };
        let (x, body) = (x.clone(), body.clone());
        let Some(cands) = self.dynamic_candidates(i)? else {
            return Ok(());
        };
        if cands.len() > self.cfg.expand_threshold {
            return Ok(());
        }
        self.mark_expanded(i);
        self.note(|| format!("forcing refuted existential over {} candidates", cands.len()));
        for c in cands {
            let inst = substitute(&body, &x, &c.to_expr());
            let lit = self.reify(&inst)?;
            self.set_lit(lit, Truth::False)?;
        }
        Ok(())
    }

    /// Candidate binder values for a suspended quantifier under current
    /// domains — a superset of the evaluator's binder range in every
    /// extension of this branch.
    pub(crate) fn dynamic_candidates(&self, i: usize) -> Result<Option<Vec<Value>>, Halt> {
        let SuspKind::Quant {
            exists,
            ref x,
            ref ty,
            ref body,
            ..
        } = self.susps[i].kind
        else {
            return Ok(None);
        };
        match ty {
            Ty::Bool => Ok(Some(vec![Value::Bool(false), Value::Bool(true)])),
            Ty::Sort(s) => {
                let decl = self
                    .sorts
                    .iter()
                    .find(|sd| sd.name == *s)
                    .expect("sorts are closed under typechecking");
                Ok(Some(
                    decl.elements
                        .iter()
                        .map(|e| Value::Elem(e.clone()))
                        .collect(),
                ))
            }
            Ty::Int => self.dynamic_int_candidates(exists, x, body),
            Ty::Set(_) => self.dynamic_set_candidates(exists, x, body),
        }
    }

    fn dynamic_int_candidates(
        &self,
        exists: bool,
        x: &crate::model::Ident,
        body: &Pred,
    ) -> Result<Option<Vec<Value>>, Halt> {
        let maxint = self.cfg.maxint;
        let mut lo = -maxint;
        let mut hi = maxint;
        let mut explicit: Option<BTreeSet<i64>> = None;
        let q = if exists { Quant::Exists } else { Quant::Forall };
        let pins = pin_source(q, body).map(Pred::flat_conjuncts).unwrap_or_default();
        for c in pins {
            match c {
                Pred::Mem(Expr::Ident(n), s) if n == x && !mentions(s, x) => {
                    if let Some(ms) = self.possible_members(s)? {
                        let ints: BTreeSet<i64> = ms.iter().filter_map(Value::as_int).collect();
                        explicit = Some(match explicit {
                            None => ints,
                            Some(prev) => prev.intersection(&ints).cloned().collect(),
                        });
                    }
                }
                Pred::Cmp(op, lhs, rhs) => {
                    let (op, bound) = match (lhs, rhs) {
                        (Expr::Ident(n), e) if n == x && !mentions(e, x) => (*op, e),
                        (e, Expr::Ident(n)) if n == x && !mentions(e, x) => (flip(*op), e),
                        _ => continue,
                    };
                    let r = self.int_range(bound)?;
                    match op {
                        CmpOp::Eq => {
                            lo = lo.max(r.0);
                            hi = hi.min(r.1);
                        }
                        CmpOp::Le => hi = hi.min(r.1),
                        CmpOp::Lt => hi = hi.min(r.1.saturating_sub(1)),
                        CmpOp::Ge => lo = lo.max(r.0),
                        CmpOp::Gt => lo = lo.max(r.0.saturating_add(1)),
                        CmpOp::Ne => {}
                    }
                }
                _ => {}
            }
        }
        if let Some(values) = explicit {
            return Ok(Some(
                values
                    .into_iter()
                    .filter(|n| *n >= lo && *n <= hi)
                    .map(Value::Int)
                    .collect(),
            ));
        }
        if lo > hi {
            return Ok(Some(Vec::new()));
        }
        if (hi as i128 - lo as i128 + 1) > MAX_CANDIDATES as i128 {
            return Ok(None);
        }
        Ok(Some((lo..=hi).map(Value::Int).collect()))
    }

    fn dynamic_set_candidates(
        &self,
        exists: bool,
        x: &crate::model::Ident,
        body: &Pred,
    ) -> Result<Option<Vec<Value>>, Halt> {
        let q = if exists { Quant::Exists } else { Quant::Forall };
        let Some(src) = pin_source(q, body) else {
            return Ok(None);
        };
        // Mirror the evaluator: the first range-pinning conjunct decides.
        for c in src.flat_conjuncts() {
            match c {
                Pred::Cmp(CmpOp::Eq, Expr::Ident(n), e) if n == x && !mentions(e, x) => {
                    return self.single_set_value(e);
                }
                Pred::Cmp(CmpOp::Eq, e, Expr::Ident(n)) if n == x && !mentions(e, x) => {
                    return self.single_set_value(e);
                }
                Pred::Mem(Expr::Ident(n), ss) if n == x && !mentions(ss, x) => {
                    return self.possible_members(ss);
                }
                Pred::Subset(Expr::Ident(n), g) if n == x && !mentions(g, x) => {
                    let Some(base) = self.possible_members(g)? else {
                        return Ok(None);
                    };
                    if base.len() > 12 {
                        return Ok(None);
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
                    return Ok(Some(out));
                }
                _ => {}
            }
        }
        Ok(None)
    }

    fn single_set_value(&self, e: &Expr) -> Result<Option<Vec<Value>>, Halt> {
        let frees = self.expr_frees(e);
        if self.frees_ground(&frees) && e.wd_safe() {
            let v = eval_expr(e, &self.valuation_of(&frees), &self.eval_ctx())
                .map_err(eval_halt)?;
            return Ok(Some(vec![v]));
        }
        if let Expr::Ident(n) = e {
            if let Some(var) = self.var_index.get(n) {
                if let Dom::Set(d) = &self.vars[var.0].dom {
                    if let Some(v) = d.value() {
                        return Ok(Some(vec![v]));
                    }
                }
            }
        }
        Ok(None)
    }

    fn expr_kind(&self, e: &Expr) -> EKind {
        match e {
            Expr::Int(_) | Expr::Arith(..) | Expr::Card(_) => EKind::Int,
            Expr::Bool(_) => EKind::Bool,
            Expr::SetLit(_)
            | Expr::EmptySet
            | Expr::Interval(..)
            | Expr::Union(..)
            | Expr::Inter(..)
            | Expr::Diff(..) => EKind::Set,
            Expr::Ident(n) => {
                if let Some(v) = self.var_index.get(n) {
                    return match &self.vars[v.0].ty {
                        Ty::Int => EKind::Int,
                        Ty::Bool => EKind::Bool,
                        Ty::Sort(_) => EKind::Elem,
                        Ty::Set(_) => EKind::Set,
                    };
                }
                if self.sorts.iter().any(|sd| sd.name == *n) {
                    return EKind::Set;
                }
                if self
                    .sorts
                    .iter()
                    .any(|sd| sd.elements.iter().any(|el| el == n))
                {
                    return EKind::Elem;
                }
                debug_assert!(false, "unclassifiable identifier `{n}`");
                EKind::Int
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::store::Store;
    use super::super::{Halt, SolveConfig, Truth};
    use crate::model::{parse_pred, Ident, Ty};

    fn int_scope(names: &[&str]) -> Vec<(Ident, Ty)> {
        names.iter().map(|n| (n.to_string(), Ty::Int)).collect()
    }

    fn post(st: &mut Store, src: &str) {
        st.post(&parse_pred(src).unwrap(), true).unwrap();
    }

    fn truth(st: &Store, src: &str) -> Truth {
        st.truth_of_atom(&parse_pred(src).unwrap())
    }

    /// The negated-guard conjunction over a shared membership atom: pinning
    /// the membership true ripples through both negated conjunctions and
    /// the reified interval membership until `z` is fixed at 0 — all by
    /// propagation, without a single enumeration decision.
    #[test]
    fn negated_guards_pin_z_without_enumeration() {
        let mut scope = int_scope(&["x", "y", "z"]);
        scope.push(("A".to_string(), Ty::Set(Box::new(Ty::Int))));
        let mut st = Store::new(&scope, &[], SolveConfig::default(), None).unwrap();

        post(&mut st, "x >= 0");
        post(
            &mut st,
            "not(x : {0, 1, 2} & z /= 0 & y : A) & not(x > 2 & y : A) & not(y /: A)",
        );
        st.propagate().unwrap();

        assert_eq!(truth(&st, "y : A"), Truth::True);
        assert_eq!(truth(&st, "x > 2"), Truth::False);
        assert_eq!(truth(&st, "x : {0, 1, 2}"), Truth::True);
        assert_eq!(truth(&st, "z /= 0"), Truth::False);
        assert_eq!(st.int_bounds("z"), Some((0, 0)));
        assert_eq!(st.decisions(), 0);
    }

    /// res = (a <=> b): any two of the three determine the third. Chain two
    /// equivalence nodes so each position in turn is the derived one, and
    /// check all four assignments of the known pair — twelve scenarios, all
    /// settled by propagation alone.
    #[test]
    fn equivalence_propagation_matches_the_truth_table() {
        let atoms = ["x = 0", "y = 0", "z = 0"];
        for unknown in 0..3 {
            for knowns in 0..4u8 {
                let k1 = knowns & 1 != 0;
                let k2 = knowns & 2 != 0;
                let mut st =
                    Store::new(&int_scope(&["x", "y", "z"]), &[], SolveConfig::default(), None)
                        .unwrap();
                post(&mut st, "(x = 0 <=> y = 0) <=> z = 0");
                let mut vals = [None, None, None];
                let (first, second) = match unknown {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                vals[first] = Some(k1);
                vals[second] = Some(k2);
                for (i, v) in vals.iter().enumerate() {
                    if let Some(v) = v {
                        st.post(&parse_pred(atoms[i]).unwrap(), *v).unwrap();
                    }
                }
                st.propagate().unwrap();
                // x = (y <=> z), y = (x <=> z), z = (x <=> y): in every
                // arrangement the derived truth is "the knowns agree".
                assert_eq!(
                    truth(&st, atoms[unknown]),
                    Truth::from_bool(k1 == k2),
                    "unknown {unknown}, knowns {k1} {k2}"
                );
                assert_eq!(st.decisions(), 0);
            }
        }
    }

    #[test]
    fn membership_outside_the_current_domain_is_inconsistent() {
        let mut st = Store::new(&int_scope(&["x"]), &[], SolveConfig::default(), None).unwrap();
        post(&mut st, "x : 20 .. 30");
        st.propagate().unwrap();
        assert_eq!(st.int_bounds("x"), Some((20, 30)));

        post(&mut st, "x : 1 .. 10");
        assert_eq!(st.propagate(), Err(Halt::Conflict));
    }

    /// A second run at a fixpoint changes nothing, and additional
    /// constraints only ever narrow what is already known.
    #[test]
    fn propagation_is_idempotent_and_monotone() {
        let mut st = Store::new(&int_scope(&["x"]), &[], SolveConfig::default(), None).unwrap();
        post(&mut st, "x : 0 .. 9");
        st.propagate().unwrap();
        assert_eq!(st.int_bounds("x"), Some((0, 9)));
        let fixpoint = st.fingerprint();
        st.propagate().unwrap();
        assert_eq!(st.fingerprint(), fixpoint);

        post(&mut st, "x > 3");
        st.propagate().unwrap();
        assert_eq!(st.int_bounds("x"), Some((4, 9)));
        assert_eq!(truth(&st, "x : 0 .. 9"), Truth::True);
    }

    /// Equalities between a pinned value and a variable with a hole at that
    /// value are refuted without search (disequality reasoning).
    #[test]
    fn disequality_instantiates_two_value_domains() {
        let mut st = Store::new(&int_scope(&["x"]), &[], SolveConfig::default(), None).unwrap();
        post(&mut st, "x : {3, 7}");
        post(&mut st, "x /= 3");
        st.propagate().unwrap();
        assert_eq!(st.int_bounds("x"), Some((7, 7)));
        assert_eq!(st.decisions(), 0);
    }
}
