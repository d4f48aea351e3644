//! Deterministic model generators for differential testing and benchmarks.
//!
//! Two kinds of input live here. The `*_source` functions return the fixed
//! example machines that ship in the repository's `corpus/` directory; each
//! is written in the printer's canonical form, so parsing and re-printing one
//! reproduces it byte for byte. [`PredGen`] and [`random_machine`] are seeded
//! random generators used by the test suites to compare the solver and the
//! deadlock analyses against brute-force enumeration: everything they emit is
//! well-typed by construction, keeps integers and set universes small enough
//! to enumerate, and is fully determined by the seed.

use crate::model::{
    ArithOp, Assign, Clause, CmpOp, Event, Expr, Ident, Machine, Pred, SortDecl, Span, Ty,
    Valuation, Value,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::ops::RangeInclusive;

// ---- fixed example machines ------------------------------------------------

/// Which version of the minimum-of-a-set machine to produce. The original
/// deadlocks when the tracked set shrinks to a single element; fixing the
/// guard leaves a constraint-level deadlock on unreachable states; the extra
/// invariant rules those states out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinSetVariant {
    /// `get` fires only on the empty set, so `s = {min}` is stuck.
    Original,
    /// `get` fires on `s = {min}`, but nothing asserts `min : s`.
    GuardFixed,
    /// As `GuardFixed`, plus the invariant `min : s`.
    WithMinInvariant,
}

/// A machine that finds the minimum of a constant set `N` by repeatedly
/// accepting a smaller candidate or rejecting a larger one.
pub fn minset_source(variant: MinSetVariant) -> String {
    let get_guard = match variant {
        MinSetVariant::Original => "s = {}",
        _ => "s = {min}",
    };
    let min_inv = match variant {
        MinSetVariant::WithMinInvariant => " ;\n  inv4: min : s",
        _ => "",
    };
    format!(
        r"MACHINE MinSet
CONSTANTS N
AXIOMS
  axm1: N <: 0 .. 3 ;
  axm2: N /= {{}}
VARIABLES s, min, z
INVARIANTS
  inv1: s <: 0 .. 3 ;
  inv2: min : 0 .. 3 ;
  inv3: z : 0 .. 4{min_inv}
EVENTS
  INITIALISATION = BEGIN s := N \/ {{3}} || min := 3 || z := 4 END
  acc = ANY x WHEN min : s & x : s & x < min THEN s := s \ {{min}} || min := x END
  rej = ANY x WHEN min : s & x : s & x > min THEN s := s \ {{x}} END
  get = WHEN {get_guard} THEN z := min END
END
"
    )
}

/// A round-robin process scheduler over `n` processes: each process cycles
/// through idle, ready, and active, with at most one process active.
pub fn scheduler_source(n: usize) -> String {
    assert!(n >= 1, "scheduler needs at least one process");
    let procs = (1..=n).map(|i| format!("p{i}")).collect::<Vec<_>>().join(", ");
    format!(
        r"MACHINE Scheduler{n}
SETS
  PROC = {{{procs}}}
VARIABLES idle, ready, active
INVARIANTS
  inv1: idle <: PROC ;
  inv2: ready <: PROC ;
  inv3: active <: PROC ;
  inv4: idle /\ ready = {{}} ;
  inv5: idle /\ active = {{}} ;
  inv6: ready /\ active = {{}} ;
  inv7: idle \/ ready \/ active = PROC ;
  inv8: card(active) <= 1
EVENTS
  INITIALISATION = BEGIN idle := PROC || ready := {{}} || active := {{}} END
  new = ANY p WHEN p : idle THEN idle := idle \ {{p}} || ready := ready \/ {{p}} END
  run = ANY p WHEN p : ready & active = {{}} THEN ready := ready \ {{p}} || active := {{p}} END
  done = ANY p WHEN p : active THEN active := active \ {{p}} || idle := idle \/ {{p}} END
END
"
    )
}

/// The n-queens placement puzzle as a machine whose only event can never
/// fire, so every placement satisfying the invariants is a deadlock and the
/// constraint search must solve the puzzle to exhibit one.
pub fn queens_source(n: usize) -> String {
    assert!(n >= 2, "queens needs at least a 2x2 board");
    let vars = (1..=n).map(|i| format!("q{i}")).collect::<Vec<_>>().join(", ");
    let mut invs = Vec::new();
    for i in 1..=n {
        invs.push(format!("dom{i}: q{i} : 1 .. {n}"));
    }
    for i in 1..=n {
        for j in i + 1..=n {
            let d = j - i;
            invs.push(format!(
                "sep{i}_{j}: q{i} /= q{j} & q{i} + {d} /= q{j} & q{j} + {d} /= q{i}"
            ));
        }
    }
    let invs = invs.join(" ;\n  ");
    let init = (1..=n)
        .map(|i| format!("q{i} := 1"))
        .collect::<Vec<_>>()
        .join(" || ");
    format!(
        r"MACHINE Queens{n}
VARIABLES {vars}
INVARIANTS
  {invs}
EVENTS
  INITIALISATION = BEGIN {init} END
  place = WHEN q1 < 1 THEN q1 := 1 END
END
"
    )
}

/// A bounded counter that can be stepped until it saturates and reset from
/// its midpoint. Restricting attention to the saturated states makes the
/// reset event provably disabled.
pub fn counting_source() -> String {
    r"MACHINE Counting
VARIABLES Counter
INVARIANTS
  inv1: Counter : 0 .. 10
EVENTS
  INITIALISATION = BEGIN Counter := 0 END
  step = WHEN Counter < 10 THEN Counter := Counter + 1 END
  reset = WHEN Counter = 5 THEN Counter := 0 END
END
"
    .to_string()
}

/// A machine whose guard divides by a state variable that the invariants
/// allow to be zero, so deciding the guard runs into a well-definedness
/// error rather than a plain true/false answer.
pub fn ratio_source() -> String {
    r"MACHINE Ratio
VARIABLES x, y
INVARIANTS
  inv1: x : 0 .. 4 ;
  inv2: y : 0 .. 4
EVENTS
  INITIALISATION = BEGIN x := 1 || y := 1 END
  shift = WHEN x / y = 1 THEN x := y END
END
"
    .to_string()
}

/// Every file shipped in the repository's `corpus/` directory, as
/// `(file name, contents)` pairs. `.mch` files are machines in canonical
/// form; `.opts` files carry extra command-line arguments for the benchmark
/// runner, one argument per line.
pub fn corpus() -> Vec<(&'static str, String)> {
    vec![
        ("counting.mch", counting_source()),
        (
            "counting.mch.opts",
            "--goal\nCounter = 10\n".to_string(),
        ),
        ("minset_v1.mch", minset_source(MinSetVariant::Original)),
        ("minset_v2.mch", minset_source(MinSetVariant::GuardFixed)),
        ("minset_v3.mch", minset_source(MinSetVariant::WithMinInvariant)),
        ("queens_8.mch", queens_source(8)),
        ("ratio.mch", ratio_source()),
        ("scheduler_2.mch", scheduler_source(2)),
        ("scheduler_5.mch", scheduler_source(5)),
        ("scheduler_9.mch", scheduler_source(9)),
    ]
}

// ---- random predicates -------------------------------------------------

/// Knobs for [`PredGen`]. The defaults keep every generated predicate within
/// brute-force range: integers in `-3 ..= 3`, connective nesting of three,
/// at most two nested quantifiers, and no division.
#[derive(Debug, Clone, Copy)]
pub struct PredGenConfig {
    /// Magnitude bound for integer literals; also the intended solver and
    /// evaluator `maxint`, which quantified integer ranges fall back to.
    pub maxint: i64,
    /// Nesting budget for connectives.
    pub depth: u32,
    /// Allow `/` and `mod`, whose well-definedness side conditions the
    /// solver-versus-enumeration suites deliberately avoid.
    pub division: bool,
    /// Allow `#` and `!` (at most two deep, so expansion stays exact).
    pub quantifiers: bool,
}

impl Default for PredGenConfig {
    fn default() -> PredGenConfig {
        PredGenConfig {
            maxint: 3,
            depth: 3,
            division: false,
            quantifiers: true,
        }
    }
}

/// The sort every random scope draws element values from.
fn small_sort() -> SortDecl {
    SortDecl {
        name: "S".to_string(),
        elements: vec!["a1".to_string(), "a2".to_string(), "a3".to_string()],
    }
}

/// Seeded generator of well-typed predicates over a small scope.
///
/// Atoms are built type-directed from the scope, so the output never
/// compares a set to an integer or quantifies over an unannotated binder;
/// the same seed always yields the same predicate.
pub struct PredGen {
    rng: ChaCha8Rng,
    cfg: PredGenConfig,
    scope: Vec<(Ident, Ty)>,
    sorts: Vec<SortDecl>,
    binders: Vec<Ident>,
    next_binder: u32,
}

impl PredGen {
    /// A generator over a random scope of one to three variables drawn from
    /// a fixed pool of integer, boolean, sort-element, and set variables.
    pub fn new(seed: u64, cfg: PredGenConfig) -> PredGen {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sort = small_sort();
        let pool: Vec<(Ident, Ty)> = vec![
            ("x".to_string(), Ty::Int),
            ("y".to_string(), Ty::Int),
            ("b".to_string(), Ty::Bool),
            ("e".to_string(), Ty::Sort(sort.name.clone())),
            ("s".to_string(), Ty::Set(Box::new(Ty::Int))),
            ("t".to_string(), Ty::Set(Box::new(Ty::Sort(sort.name.clone())))),
        ];
        let mut picks: Vec<usize> = (0..pool.len()).collect();
        picks.shuffle(&mut rng);
        picks.truncate(rng.gen_range(1..=3));
        picks.sort_unstable();
        let scope: Vec<_> = picks.into_iter().map(|i| pool[i].clone()).collect();
        PredGen::with_scope(rng.gen(), cfg, scope, vec![sort])
    }

    /// A generator over a caller-supplied scope, used when the predicate
    /// must mention specific variables (e.g. a machine's guards).
    pub fn with_scope(
        seed: u64,
        cfg: PredGenConfig,
        scope: Vec<(Ident, Ty)>,
        sorts: Vec<SortDecl>,
    ) -> PredGen {
        PredGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            cfg,
            scope,
            sorts,
            binders: Vec::new(),
            next_binder: 0,
        }
    }

    pub fn scope(&self) -> &[(Ident, Ty)] {
        &self.scope
    }

    pub fn sorts(&self) -> &[SortDecl] {
        &self.sorts
    }

    /// A random predicate using the full connective budget.
    pub fn pred(&mut self) -> Pred {
        self.pred_at(self.cfg.depth)
    }

    fn pred_at(&mut self, depth: u32) -> Pred {
        if depth == 0 {
            return self.atom();
        }
        let quant_ok = self.cfg.quantifiers && self.binders.len() < 2;
        match self.rng.gen_range(0..10u32) {
            0..=2 => self.atom(),
            3 | 4 => {
                let n = self.rng.gen_range(2..=3);
                Pred::And((0..n).map(|_| self.pred_at(depth - 1)).collect())
            }
            5 => {
                let n = self.rng.gen_range(2..=3);
                Pred::Or((0..n).map(|_| self.pred_at(depth - 1)).collect())
            }
            6 => Pred::Imp(
                Box::new(self.pred_at(depth - 1)),
                Box::new(self.pred_at(depth - 1)),
            ),
            7 => Pred::Iff(
                Box::new(self.pred_at(depth - 1)),
                Box::new(self.pred_at(depth - 1)),
            ),
            8 => Pred::Not(Box::new(self.pred_at(depth - 1))),
            _ if quant_ok => self.quantifier(depth),
            _ => self.atom(),
        }
    }

    fn quantifier(&mut self, depth: u32) -> Pred {
        let name = format!("v{}", self.next_binder);
        self.next_binder += 1;
        self.binders.push(name.clone());
        // Usually pin the binder to an explicit range so the quantifier stays
        // narrow; the fallback range (-maxint ..= maxint) is legal but wide.
        let body = if self.rng.gen_bool(0.7) {
            let lo = self.rng.gen_range(-self.cfg.maxint..=self.cfg.maxint);
            let hi = self.rng.gen_range(lo..=self.cfg.maxint);
            let pin = Pred::Mem(
                Expr::Ident(name.clone()),
                Expr::Interval(Box::new(Expr::Int(lo)), Box::new(Expr::Int(hi))),
            );
            Pred::And(vec![pin, self.pred_at(depth - 1)])
        } else {
            self.pred_at(depth - 1)
        };
        self.binders.pop();
        if self.rng.gen_bool(0.5) {
            Pred::Exists(name, Some(Ty::Int), Box::new(body))
        } else {
            Pred::Forall(name, Some(Ty::Int), Box::new(body))
        }
    }

    /// A random atom; both sides are typed consistently.
    pub fn atom(&mut self) -> Pred {
        // Integer comparisons are always available; the other shapes only
        // when the scope offers matching variables.
        let mut shapes: Vec<u32> = vec![0, 0, 0];
        if self.var_of(&Ty::Bool).is_some() {
            shapes.push(1);
        }
        if self.sort_var().is_some() {
            shapes.push(2);
        }
        if self.set_elem_ty().is_some() {
            shapes.extend([3, 3, 4, 5]);
        }
        match shapes.choose(&mut self.rng).copied().unwrap() {
            0 => {
                let op = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge]
                    .choose(&mut self.rng)
                    .copied()
                    .unwrap();
                Pred::Cmp(op, self.int_expr(1), self.int_expr(1))
            }
            1 => {
                let op = if self.rng.gen_bool(0.5) { CmpOp::Eq } else { CmpOp::Ne };
                let a = Expr::Ident(self.var_of(&Ty::Bool).unwrap());
                let b = if self.rng.gen_bool(0.5) {
                    Expr::Bool(self.rng.gen_bool(0.5))
                } else {
                    Expr::Ident(self.var_of(&Ty::Bool).unwrap())
                };
                Pred::Cmp(op, a, b)
            }
            2 => {
                let op = if self.rng.gen_bool(0.5) { CmpOp::Eq } else { CmpOp::Ne };
                let sort = self.sorts[0].clone();
                let a = Expr::Ident(self.sort_var().unwrap());
                let b = if self.rng.gen_bool(0.5) {
                    Expr::Ident(sort.elements.choose(&mut self.rng).unwrap().clone())
                } else {
                    Expr::Ident(self.sort_var().unwrap())
                };
                Pred::Cmp(op, a, b)
            }
            3 => {
                let elem = self.set_elem_ty().unwrap();
                let member = self.scalar_expr(&elem);
                let set = self.set_expr(&elem, 1);
                if self.rng.gen_bool(0.5) {
                    Pred::Mem(member, set)
                } else {
                    Pred::NotMem(member, set)
                }
            }
            4 => {
                let elem = self.set_elem_ty().unwrap();
                Pred::Subset(self.set_expr(&elem, 1), self.set_expr(&elem, 1))
            }
            _ => {
                let elem = self.set_elem_ty().unwrap();
                let op = if self.rng.gen_bool(0.5) { CmpOp::Eq } else { CmpOp::Ne };
                Pred::Cmp(op, self.set_expr(&elem, 1), self.set_expr(&elem, 1))
            }
        }
    }

    fn var_of(&mut self, ty: &Ty) -> Option<Ident> {
        let names: Vec<&Ident> = self
            .scope
            .iter()
            .filter(|(_, t)| t == ty)
            .map(|(n, _)| n)
            .collect();
        names.choose(&mut self.rng).map(|n| (*n).clone())
    }

    fn sort_var(&mut self) -> Option<Ident> {
        let sort = self.sorts[0].name.clone();
        self.var_of(&Ty::Sort(sort))
    }

    /// The element type of a randomly chosen set variable in scope, if any.
    fn set_elem_ty(&mut self) -> Option<Ty> {
        let elems: Vec<Ty> = self
            .scope
            .iter()
            .filter_map(|(_, t)| match t {
                Ty::Set(inner) => Some((**inner).clone()),
                _ => None,
            })
            .collect();
        elems.choose(&mut self.rng).cloned()
    }

    fn int_expr(&mut self, depth: u32) -> Expr {
        let int_vars: Vec<Ident> = self
            .scope
            .iter()
            .filter(|(_, t)| *t == Ty::Int)
            .map(|(n, _)| n.clone())
            .chain(self.binders.iter().cloned())
            .collect();
        let can_card = self.set_elem_ty().is_some();
        match self.rng.gen_range(0..6u32) {
            0 | 1 => Expr::Int(self.rng.gen_range(-self.cfg.maxint..=self.cfg.maxint)),
            2 | 3 if !int_vars.is_empty() => {
                Expr::Ident(int_vars.choose(&mut self.rng).unwrap().clone())
            }
            4 if depth > 0 => {
                let mut ops = vec![ArithOp::Add, ArithOp::Sub, ArithOp::Mul];
                if self.cfg.division {
                    ops.extend([ArithOp::Div, ArithOp::Mod]);
                }
                let op = ops.choose(&mut self.rng).copied().unwrap();
                Expr::Arith(
                    op,
                    Box::new(self.int_expr(depth - 1)),
                    Box::new(self.int_expr(depth - 1)),
                )
            }
            5 if depth > 0 && can_card => {
                let elem = self.set_elem_ty().unwrap();
                Expr::Card(Box::new(self.set_expr(&elem, depth - 1)))
            }
            _ => Expr::Int(self.rng.gen_range(-self.cfg.maxint..=self.cfg.maxint)),
        }
    }

    /// A scalar of the given element type: an integer expression, or a sort
    /// element or variable.
    fn scalar_expr(&mut self, elem: &Ty) -> Expr {
        match elem {
            Ty::Int => self.int_expr(1),
            _ => {
                let sort = self.sorts[0].clone();
                match self.sort_var() {
                    Some(v) if self.rng.gen_bool(0.5) => Expr::Ident(v),
                    _ => Expr::Ident(sort.elements.choose(&mut self.rng).unwrap().clone()),
                }
            }
        }
    }

    fn set_expr(&mut self, elem: &Ty, depth: u32) -> Expr {
        let set_vars: Vec<Ident> = self
            .scope
            .iter()
            .filter(|(_, t)| matches!(t, Ty::Set(inner) if **inner == *elem))
            .map(|(n, _)| n.clone())
            .collect();
        match self.rng.gen_range(0..6u32) {
            0 | 1 if !set_vars.is_empty() => {
                Expr::Ident(set_vars.choose(&mut self.rng).unwrap().clone())
            }
            2 => {
                let n = self.rng.gen_range(1..=3);
                Expr::SetLit((0..n).map(|_| self.scalar_expr(elem)).collect())
            }
            3 if *elem == Ty::Int => {
                let lo = self.rng.gen_range(-self.cfg.maxint..=self.cfg.maxint);
                let hi = self.rng.gen_range(-self.cfg.maxint..=self.cfg.maxint);
                Expr::Interval(Box::new(Expr::Int(lo)), Box::new(Expr::Int(hi)))
            }
            4 if depth > 0 => {
                let ctor = [Expr::Union, Expr::Inter, Expr::Diff]
                    .choose(&mut self.rng)
                    .unwrap();
                ctor(
                    Box::new(self.set_expr(elem, depth - 1)),
                    Box::new(self.set_expr(elem, depth - 1)),
                )
            }
            _ => Expr::EmptySet,
        }
    }
}

// ---- random machines ----------------------------------------------------

/// A random machine suitable for differential deadlock checking: at most
/// three state variables, every integer pinned to `0 .. 3` by an invariant,
/// every set variable bounded by one, parameters pinned by a guard, and all
/// assignments drawn from ground literals and variable copies so the
/// reachable state space is finite.
pub fn random_machine(seed: u64) -> Machine {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sort = small_sort();
    let pool: Vec<(Ident, Ty)> = vec![
        ("x".to_string(), Ty::Int),
        ("y".to_string(), Ty::Int),
        ("b".to_string(), Ty::Bool),
        ("e".to_string(), Ty::Sort(sort.name.clone())),
        ("s".to_string(), Ty::Set(Box::new(Ty::Int))),
        ("t".to_string(), Ty::Set(Box::new(Ty::Sort(sort.name.clone())))),
    ];
    let mut picks: Vec<usize> = (0..pool.len()).collect();
    picks.shuffle(&mut rng);
    picks.truncate(rng.gen_range(1..=3));
    picks.sort_unstable();
    let vars: Vec<(Ident, Ty)> = picks.into_iter().map(|i| pool[i].clone()).collect();

    let uses_sort = vars.iter().any(|(_, t)| {
        matches!(t, Ty::Sort(_)) || matches!(t, Ty::Set(inner) if matches!(**inner, Ty::Sort(_)))
    });

    let constants: Vec<Ident> = if rng.gen_bool(0.25) {
        vec!["k".to_string()]
    } else {
        Vec::new()
    };
    let mut axioms = Vec::new();
    if !constants.is_empty() {
        axioms.push(clause("axm1", mem_range("k", 0, 2)));
    }

    // Mandatory bounds keep every variable's type inferable and the whole
    // state space enumerable; extra random invariants may carve it further.
    let mut invariants = Vec::new();
    for (name, ty) in &vars {
        match ty {
            Ty::Int => invariants.push(mem_range(name, 0, 3)),
            Ty::Set(inner) if **inner == Ty::Int => invariants.push(Pred::Subset(
                Expr::Ident(name.clone()),
                Expr::Interval(Box::new(Expr::Int(0)), Box::new(Expr::Int(3))),
            )),
            Ty::Set(_) => invariants.push(Pred::Subset(
                Expr::Ident(name.clone()),
                Expr::Ident(sort.name.clone()),
            )),
            _ => {}
        }
    }
    let mut inv_scope = vars.clone();
    if !constants.is_empty() {
        inv_scope.push(("k".to_string(), Ty::Int));
    }
    let atom_cfg = PredGenConfig {
        maxint: 3,
        depth: 1,
        division: false,
        quantifiers: false,
    };
    let mut inv_gen = PredGen::with_scope(rng.gen(), atom_cfg, inv_scope.clone(), vec![sort.clone()]);
    for _ in 0..rng.gen_range(0..=2) {
        invariants.push(inv_gen.atom());
    }
    let invariants = invariants
        .into_iter()
        .enumerate()
        .map(|(i, p)| clause(&format!("inv{}", i + 1), p))
        .collect();

    let init = Event {
        name: "INITIALISATION".to_string(),
        params: Vec::new(),
        guards: Vec::new(),
        actions: vars
            .iter()
            .map(|(name, ty)| Assign {
                var: name.clone(),
                rhs: ground_value(&mut rng, ty, &sort),
                span: Span::default(),
            })
            .collect(),
        span: Span::default(),
    };

    let n_events = rng.gen_range(1..=3);
    let mut events = Vec::new();
    for i in 0..n_events {
        let mut params = Vec::new();
        let mut guards = Vec::new();
        // An optional parameter, pinned by its first guard so both the
        // solver and plain enumeration see the same finite choices.
        if rng.gen_bool(0.4) {
            if uses_sort && rng.gen_bool(0.5) {
                params.push(("q".to_string(), None));
                guards.push(Pred::Mem(
                    Expr::Ident("q".to_string()),
                    Expr::Ident(sort.name.clone()),
                ));
            } else {
                params.push(("p".to_string(), None));
                guards.push(mem_range("p", 0, 3));
            }
        }
        let mut guard_scope = inv_scope.clone();
        for (p, _) in &params {
            let ty = if p == "q" {
                Ty::Sort(sort.name.clone())
            } else {
                Ty::Int
            };
            guard_scope.push((p.clone(), ty));
        }
        let mut guard_gen =
            PredGen::with_scope(rng.gen(), atom_cfg, guard_scope.clone(), vec![sort.clone()]);
        for _ in 0..rng.gen_range(0..=2) {
            guards.push(guard_gen.atom());
        }

        let mut targets: Vec<&(Ident, Ty)> = vars.iter().collect();
        targets.shuffle(&mut rng);
        targets.truncate(rng.gen_range(1..=vars.len()));
        let actions = targets
            .into_iter()
            .map(|(name, ty)| Assign {
                var: name.clone(),
                rhs: action_rhs(&mut rng, name, ty, &vars, &params, &sort),
                span: Span::default(),
            })
            .collect();
        events.push(Event {
            name: format!("ev{}", i + 1),
            params,
            guards,
            actions,
            span: Span::default(),
        });
    }

    Machine {
        name: format!("Rand{seed}"),
        sorts: if uses_sort { vec![sort] } else { Vec::new() },
        constants,
        axioms,
        variables: vars.iter().map(|(n, _)| n.clone()).collect(),
        invariants,
        init,
        events,
    }
}

fn clause(label: &str, pred: Pred) -> Clause {
    Clause {
        label: label.to_string(),
        pred,
        span: Span::default(),
    }
}

fn mem_range(name: &str, lo: i64, hi: i64) -> Pred {
    Pred::Mem(
        Expr::Ident(name.to_string()),
        Expr::Interval(Box::new(Expr::Int(lo)), Box::new(Expr::Int(hi))),
    )
}

/// A ground literal of the given type, drawn from the enumerable space:
/// integers in `0 ..= 3`, subsets of `0 ..= 3`, sort elements.
fn ground_value(rng: &mut ChaCha8Rng, ty: &Ty, sort: &SortDecl) -> Expr {
    match ty {
        Ty::Int => Expr::Int(rng.gen_range(0..=3)),
        Ty::Bool => Expr::Bool(rng.gen_bool(0.5)),
        Ty::Sort(_) => Expr::Ident(sort.elements.choose(rng).unwrap().clone()),
        Ty::Set(inner) => {
            let base: Vec<Expr> = match &**inner {
                Ty::Int => (0..=3).map(Expr::Int).collect(),
                _ => sort.elements.iter().cloned().map(Expr::Ident).collect(),
            };
            let chosen: Vec<Expr> = base
                .into_iter()
                .filter(|_| rng.gen_bool(0.4))
                .collect();
            if chosen.is_empty() {
                Expr::EmptySet
            } else {
                Expr::SetLit(chosen)
            }
        }
    }
}

/// A right-hand side for an assignment to `var`: a fresh ground literal, a
/// copy of a same-typed variable or parameter, or (for sets) the variable
/// adjusted by one element. All choices keep the reachable values inside
/// the same finite space the literals draw from.
fn action_rhs(
    rng: &mut ChaCha8Rng,
    var: &Ident,
    ty: &Ty,
    vars: &[(Ident, Ty)],
    params: &[(Ident, Option<Ty>)],
    sort: &SortDecl,
) -> Expr {
    let mut copies: Vec<Ident> = vars
        .iter()
        .filter(|(n, t)| t == ty && n != var)
        .map(|(n, _)| n.clone())
        .collect();
    for (p, _) in params {
        let pty = if p == "q" {
            Ty::Sort(sort.name.clone())
        } else {
            Ty::Int
        };
        if pty == *ty {
            copies.push(p.clone());
        }
    }
    if !copies.is_empty() && rng.gen_bool(0.3) {
        return Expr::Ident(copies.choose(rng).unwrap().clone());
    }
    if let Ty::Set(inner) = ty {
        if rng.gen_bool(0.4) {
            let elem = match &**inner {
                Ty::Int => Expr::Int(rng.gen_range(0..=3)),
                _ => Expr::Ident(sort.elements.choose(rng).unwrap().clone()),
            };
            let one = Expr::SetLit(vec![elem]);
            let base = Box::new(Expr::Ident(var.clone()));
            return if rng.gen_bool(0.5) {
                Expr::Union(base, Box::new(one))
            } else {
                Expr::Diff(base, Box::new(one))
            };
        }
    }
    ground_value(rng, ty, sort)
}

// ---- exhaustive enumeration ----------------------------------------------

/// All values a name of type `ty` can take when integers range over `ints`:
/// booleans, the sort's carrier, or every subset of the base domain.
pub fn values_of(ty: &Ty, sorts: &[SortDecl], ints: &RangeInclusive<i64>) -> Vec<Value> {
    match ty {
        Ty::Int => ints.clone().map(Value::Int).collect(),
        Ty::Bool => vec![Value::Bool(false), Value::Bool(true)],
        Ty::Sort(name) => {
            let sort = sorts
                .iter()
                .find(|s| s.name == *name)
                .unwrap_or_else(|| panic!("unknown sort `{name}`"));
            sort.elements.iter().cloned().map(Value::Elem).collect()
        }
        Ty::Set(inner) => {
            let base = values_of(inner, sorts, ints);
            assert!(
                base.len() <= 10,
                "powerset of {} elements is too large to enumerate",
                base.len()
            );
            (0..1u32 << base.len())
                .map(|mask| {
                    let set: BTreeSet<Value> = base
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(_, v)| v.clone())
                        .collect();
                    Value::Set(set)
                })
                .collect()
        }
    }
}

/// The full cross product of [`values_of`] over a scope, for brute-force
/// comparison against the solver. Sizes multiply quickly; callers keep the
/// scope to a few variables over small domains.
pub fn all_valuations(
    scope: &[(Ident, Ty)],
    sorts: &[SortDecl],
    ints: RangeInclusive<i64>,
) -> Vec<Valuation> {
    let mut out = vec![Valuation::new()];
    for (name, ty) in scope {
        let values = values_of(ty, sorts, &ints);
        let mut next = Vec::with_capacity(out.len() * values.len());
        for v in &out {
            for value in &values {
                let mut v = v.clone();
                v.insert(name.clone(), value.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_machine, parse_pred, print_machine, print_pred, typecheck};

    #[test]
    fn example_machines_are_canonical_and_well_typed() {
        for (name, src) in corpus() {
            if !name.ends_with(".mch") {
                continue;
            }
            let m = parse_machine(&src).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(print_machine(&m), src, "{name} is not in canonical form");
            typecheck(m).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn generated_predicates_are_deterministic_and_reparsable() {
        let cfg = PredGenConfig {
            division: true,
            ..PredGenConfig::default()
        };
        for seed in 0..200 {
            let p = PredGen::new(seed, cfg).pred();
            let again = PredGen::new(seed, cfg).pred();
            assert_eq!(p, again, "seed {seed} is not deterministic");
            let printed = print_pred(&p);
            let reparsed = parse_pred(&printed)
                .unwrap_or_else(|e| panic!("seed {seed}: `{printed}`: {e}"));
            assert_eq!(reparsed, p, "seed {seed} does not round-trip: `{printed}`");
        }
    }

    #[test]
    fn generated_machines_typecheck_and_round_trip() {
        for seed in 0..100 {
            let m = random_machine(seed);
            let printed = print_machine(&m);
            let reparsed = parse_machine(&printed)
                .unwrap_or_else(|e| panic!("seed {seed}: {e}\n{printed}"));
            typecheck(reparsed).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{printed}"));
        }
    }

    #[test]
    fn valuation_enumeration_counts_match_the_domain_sizes() {
        let sorts = vec![small_sort()];
        let scope = vec![
            ("x".to_string(), Ty::Int),
            ("s".to_string(), Ty::Set(Box::new(Ty::Int))),
            ("e".to_string(), Ty::Sort("S".to_string())),
        ];
        let vs = all_valuations(&scope, &sorts, 0..=1);
        // 2 integers, 4 subsets, 3 elements.
        assert_eq!(vs.len(), 2 * 4 * 3);
        // Every valuation is distinct.
        let set: BTreeSet<String> = vs.iter().map(|v| format!("{v:?}")).collect();
        assert_eq!(set.len(), vs.len());
    }
}
