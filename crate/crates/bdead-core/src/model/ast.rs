//! Syntax trees for machines, predicates, and expressions.

pub type Ident = String;

/// Source position (1-based line and column).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl std::fmt::Display for Span {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Types: integers, booleans, named enumerated sorts, and finite sets thereof.
/// Sets may nest; there are no function or relation types.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ty {
    Int,
    Bool,
    Sort(Ident),
    Set(Box<Ty>),
}

impl std::fmt::Display for Ty {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Ty::Int => write!(f, "INT"),
            Ty::Bool => write!(f, "BOOL"),
            Ty::Sort(s) => write!(f, "{s}"),
            Ty::Set(t) => write!(f, "SET({t})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

/// Expressions. Set operations are over finite sets only; `Interval` is the
/// integer range `a .. b` (empty when `a > b`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Ident(Ident),
    Arith(ArithOp, Box<Expr>, Box<Expr>),
    SetLit(Vec<Expr>),
    EmptySet,
    Interval(Box<Expr>, Box<Expr>),
    Union(Box<Expr>, Box<Expr>),
    Inter(Box<Expr>, Box<Expr>),
    Diff(Box<Expr>, Box<Expr>),
    Card(Box<Expr>),
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Int(n)
    }

    pub fn ident(s: impl Into<Ident>) -> Expr {
        Expr::Ident(s.into())
    }

    /// True when evaluating the expression can never raise a
    /// well-definedness error, i.e. it contains no division or modulo.
    pub fn wd_safe(&self) -> bool {
        match self {
            Expr::Int(_) | Expr::Bool(_) | Expr::Ident(_) | Expr::EmptySet => true,
            Expr::Arith(ArithOp::Div | ArithOp::Mod, _, _) => false,
            Expr::Arith(_, a, b)
            | Expr::Interval(a, b)
            | Expr::Union(a, b)
            | Expr::Inter(a, b)
            | Expr::Diff(a, b) => a.wd_safe() && b.wd_safe(),
            Expr::SetLit(es) => es.iter().all(Expr::wd_safe),
            Expr::Card(a) => a.wd_safe(),
        }
    }
}

/// Comparison operators over integer expressions, plus (dis)equality which
/// applies at every type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

/// Predicates. `And`/`Or` are kept flattened (two or more operands).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pred {
    True,
    False,
    Cmp(CmpOp, Expr, Expr),
    Mem(Expr, Expr),
    NotMem(Expr, Expr),
    Subset(Expr, Expr),
    And(Vec<Pred>),
    Or(Vec<Pred>),
    Imp(Box<Pred>, Box<Pred>),
    Iff(Box<Pred>, Box<Pred>),
    Not(Box<Pred>),
    Exists(Ident, Option<Ty>, Box<Pred>),
    Forall(Ident, Option<Ty>, Box<Pred>),
}

impl Pred {
    /// Conjunction that collapses the 0- and 1-element cases.
    pub fn and(mut ps: Vec<Pred>) -> Pred {
        match ps.len() {
            0 => Pred::True,
            1 => ps.pop().unwrap(),
            _ => Pred::And(ps),
        }
    }

    /// The top-level conjuncts of a predicate (`p` itself if not an `And`).
    pub fn conjuncts(&self) -> &[Pred] {
        match self {
            Pred::And(ps) => ps,
            _ => std::slice::from_ref(self),
        }
    }

    /// All conjuncts of a (possibly nested) conjunction, left to right.
    /// Unlike [`Pred::conjuncts`], nesting is invisible: `a & (b & c)` and
    /// `a & b & c` yield the same list. Analyses that scan conjuncts — such
    /// as deriving a binder's range — use this so that re-associating a
    /// conjunction can never change their outcome.
    pub fn flat_conjuncts(&self) -> Vec<&Pred> {
        fn walk<'a>(p: &'a Pred, out: &mut Vec<&'a Pred>) {
            match p {
                Pred::And(ps) => ps.iter().for_each(|q| walk(q, out)),
                q => out.push(q),
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    pub fn negate(self) -> Pred {
        match self {
            Pred::True => Pred::False,
            Pred::False => Pred::True,
            Pred::Not(p) => *p,
            p => Pred::Not(Box::new(p)),
        }
    }

    /// True when no subterm can raise a well-definedness error.
    pub fn wd_safe(&self) -> bool {
        match self {
            Pred::True | Pred::False => true,
            Pred::Cmp(_, a, b) => a.wd_safe() && b.wd_safe(),
            Pred::Mem(a, b) | Pred::NotMem(a, b) | Pred::Subset(a, b) => {
                a.wd_safe() && b.wd_safe()
            }
            Pred::And(ps) | Pred::Or(ps) => ps.iter().all(Pred::wd_safe),
            Pred::Imp(a, b) | Pred::Iff(a, b) => a.wd_safe() && b.wd_safe(),
            Pred::Not(p) => p.wd_safe(),
            Pred::Exists(_, _, p) | Pred::Forall(_, _, p) => p.wd_safe(),
        }
    }
}

/// One deterministic assignment `var := rhs` within an event body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assign {
    pub var: Ident,
    pub rhs: Expr,
    pub span: Span,
}

/// A guarded event. All assignments execute simultaneously; the assigned
/// variables within one event are pairwise distinct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub name: Ident,
    pub params: Vec<(Ident, Option<Ty>)>,
    pub guards: Vec<Pred>,
    pub actions: Vec<Assign>,
    pub span: Span,
}

/// A labeled axiom or invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub label: Ident,
    pub pred: Pred,
    pub span: Span,
}

/// An enumerated carrier sort with its (nonempty, globally unique) elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortDecl {
    pub name: Ident,
    pub elements: Vec<Ident>,
}

/// A parsed machine. `init` assigns every variable exactly once; axioms may
/// mention constants only, invariants constants and variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Machine {
    pub name: Ident,
    pub sorts: Vec<SortDecl>,
    pub constants: Vec<Ident>,
    pub axioms: Vec<Clause>,
    pub variables: Vec<Ident>,
    pub invariants: Vec<Clause>,
    pub init: Event,
    pub events: Vec<Event>,
}

impl Machine {
    pub fn event(&self, name: &str) -> Option<&Event> {
        self.events.iter().find(|e| e.name == name)
    }
}
