//! Canonical text form for machines, predicates, and expressions.
//!
//! Printing inserts the minimal parentheses needed to re-parse to the same
//! tree, so `parse . print . parse == parse` and, for sources written in
//! canonical form, `print . parse` differs from the input by whitespace only.

use super::ast::*;
use std::fmt::Write;

pub fn print_pred(p: &Pred) -> String {
    let mut s = String::new();
    pred(&mut s, p, 0);
    s
}

pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    expr(&mut s, e, 0);
    s
}

pub fn print_machine(m: &Machine) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "MACHINE {}", m.name);
    if !m.sorts.is_empty() {
        let _ = writeln!(s, "SETS");
        for (i, sd) in m.sorts.iter().enumerate() {
            let sep = if i + 1 < m.sorts.len() { " ;" } else { "" };
            let _ = writeln!(s, "  {} = {{{}}}{}", sd.name, sd.elements.join(", "), sep);
        }
    }
    if !m.constants.is_empty() {
        let _ = writeln!(s, "CONSTANTS {}", m.constants.join(", "));
    }
    clauses(&mut s, "AXIOMS", &m.axioms);
    if !m.variables.is_empty() {
        let _ = writeln!(s, "VARIABLES {}", m.variables.join(", "));
    }
    clauses(&mut s, "INVARIANTS", &m.invariants);
    let _ = writeln!(s, "EVENTS");
    let _ = writeln!(s, "  INITIALISATION = BEGIN {} END", actions(&m.init.actions));
    for e in &m.events {
        let _ = writeln!(s, "  {}", event(e));
    }
    let _ = writeln!(s, "END");
    s
}

fn clauses(s: &mut String, section: &str, cs: &[Clause]) {
    if cs.is_empty() {
        return;
    }
    let _ = writeln!(s, "{section}");
    for (i, c) in cs.iter().enumerate() {
        let sep = if i + 1 < cs.len() { " ;" } else { "" };
        let _ = writeln!(s, "  {}: {}{}", c.label, print_pred(&c.pred), sep);
    }
}

fn event(e: &Event) -> String {
    let guards = e
        .guards
        .iter()
        .map(print_pred)
        .collect::<Vec<_>>()
        .join(" & ");
    let body = actions(&e.actions);
    if !e.params.is_empty() {
        let params = e
            .params
            .iter()
            .map(|(n, t)| match t {
                Some(t) => format!("{n} : {t}"),
                None => n.clone(),
            })
            .collect::<Vec<_>>()
            .join(", ");
        format!("{} = ANY {params} WHEN {guards} THEN {body} END", e.name)
    } else if !e.guards.is_empty() {
        format!("{} = WHEN {guards} THEN {body} END", e.name)
    } else {
        format!("{} = BEGIN {body} END", e.name)
    }
}

fn actions(asgns: &[Assign]) -> String {
    if asgns.is_empty() {
        return "skip".to_string();
    }
    asgns
        .iter()
        .map(|a| format!("{} := {}", a.var, print_expr(&a.rhs)))
        .collect::<Vec<_>>()
        .join(" || ")
}

// Binding strength of predicate forms; children are parenthesized when their
// own level is below what the context requires.
const P_IFF: u8 = 1;
const P_IMP: u8 = 2;
const P_OR: u8 = 3;
const P_AND: u8 = 4;
const P_ATOM: u8 = 5;

fn pred(s: &mut String, p: &Pred, min: u8) {
    let level = match p {
        Pred::Iff(_, _) => P_IFF,
        Pred::Imp(_, _) => P_IMP,
        Pred::Or(_) => P_OR,
        Pred::And(_) => P_AND,
        _ => P_ATOM,
    };
    let parens = level < min;
    if parens {
        s.push('(');
    }
    match p {
        Pred::True => s.push_str("TRUE"),
        Pred::False => s.push_str("FALSE"),
        Pred::Cmp(op, a, b) => {
            let sym = match op {
                CmpOp::Eq => "=",
                CmpOp::Ne => "/=",
                CmpOp::Lt => "<",
                CmpOp::Le => "<=",
                CmpOp::Gt => ">",
                CmpOp::Ge => ">=",
            };
            expr(s, a, 0);
            let _ = write!(s, " {sym} ");
            expr(s, b, 0);
        }
        Pred::Mem(a, b) | Pred::NotMem(a, b) | Pred::Subset(a, b) => {
            let sym = match p {
                Pred::Mem(_, _) => ":",
                Pred::NotMem(_, _) => "/:",
                _ => "<:",
            };
            expr(s, a, 0);
            let _ = write!(s, " {sym} ");
            expr(s, b, 0);
        }
        Pred::And(ps) => {
            for (i, q) in ps.iter().enumerate() {
                if i > 0 {
                    s.push_str(" & ");
                }
                pred(s, q, P_AND + 1);
            }
        }
        Pred::Or(ps) => {
            for (i, q) in ps.iter().enumerate() {
                if i > 0 {
                    s.push_str(" or ");
                }
                pred(s, q, P_OR + 1);
            }
        }
        Pred::Imp(a, b) => {
            pred(s, a, P_IMP + 1);
            s.push_str(" => ");
            pred(s, b, P_IMP);
        }
        Pred::Iff(a, b) => {
            pred(s, a, P_IFF + 1);
            s.push_str(" <=> ");
            pred(s, b, P_IFF + 1);
        }
        Pred::Not(q) => {
            s.push_str("not ");
            pred(s, q, P_ATOM);
        }
        Pred::Exists(x, ty, body) | Pred::Forall(x, ty, body) => {
            s.push_str(if matches!(p, Pred::Exists(_, _, _)) {
                "#"
            } else {
                "!"
            });
            s.push_str(x);
            if let Some(t) = ty {
                let _ = write!(s, " : {t}");
            }
            s.push_str(".(");
            pred(s, body, 0);
            s.push(')');
        }
    }
    if parens {
        s.push(')');
    }
}

const E_SETOP: u8 = 1;
const E_RANGE: u8 = 2;
const E_ADD: u8 = 3;
const E_MUL: u8 = 4;
const E_UNARY: u8 = 5;

fn expr(s: &mut String, e: &Expr, min: u8) {
    let level = match e {
        Expr::Union(_, _) | Expr::Inter(_, _) | Expr::Diff(_, _) => E_SETOP,
        Expr::Interval(_, _) => E_RANGE,
        Expr::Arith(ArithOp::Add | ArithOp::Sub, _, _) => E_ADD,
        Expr::Arith(_, _, _) => E_MUL,
        Expr::Int(n) if *n < 0 => E_UNARY,
        _ => E_UNARY + 1,
    };
    let parens = level < min;
    if parens {
        s.push('(');
    }
    match e {
        Expr::Int(n) => {
            let _ = write!(s, "{n}");
        }
        Expr::Bool(b) => s.push_str(if *b { "TRUE" } else { "FALSE" }),
        Expr::Ident(x) => s.push_str(x),
        Expr::Arith(op, a, b) => {
            let sym = match op {
                ArithOp::Add => "+",
                ArithOp::Sub => "-",
                ArithOp::Mul => "*",
                ArithOp::Div => "/",
                ArithOp::Mod => "mod",
            };
            expr(s, a, level);
            let _ = write!(s, " {sym} ");
            expr(s, b, level + 1);
        }
        Expr::SetLit(es) => {
            s.push('{');
            for (i, x) in es.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                expr(s, x, 0);
            }
            s.push('}');
        }
        Expr::EmptySet => s.push_str("{}"),
        Expr::Interval(a, b) => {
            expr(s, a, E_RANGE + 1);
            s.push_str(" .. ");
            expr(s, b, E_RANGE + 1);
        }
        Expr::Union(a, b) | Expr::Inter(a, b) | Expr::Diff(a, b) => {
            let sym = match e {
                Expr::Union(_, _) => "\\/",
                Expr::Inter(_, _) => "/\\",
                _ => "\\",
            };
            expr(s, a, E_SETOP);
            let _ = write!(s, " {sym} ");
            expr(s, b, E_SETOP + 1);
        }
        Expr::Card(a) => {
            s.push_str("card(");
            expr(s, a, 0);
            s.push(')');
        }
    }
    if parens {
        s.push(')');
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_machine, parse_pred};

    fn round(src: &str) -> String {
        print_pred(&parse_pred(src).unwrap())
    }

    #[test]
    fn minimal_parens_preserved_where_needed() {
        assert_eq!(round("(x < y or y < z) & x = 1"), "(x < y or y < z) & x = 1");
        assert_eq!(round("x < y or y < z & x = 1"), "x < y or y < z & x = 1");
        assert_eq!(round("(x + 1) * 2 < y"), "(x + 1) * 2 < y");
        assert_eq!(round("x : (0 .. 3) \\/ (5 .. 6)"), "x : 0 .. 3 \\/ 5 .. 6");
        assert_eq!(round("s \\ (t \\ u) = {}"), "s \\ (t \\ u) = {}");
    }

    #[test]
    fn print_then_parse_is_identity_on_predicates() {
        for src in [
            "#x : INT.(x : s & x < min)",
            "not (x = 1 => y = 2)",
            "a - b - c = a - (b - c)",
            "card(s /\\ t) + 1 < 4 <=> s <: t",
            "x mod 2 = 1 & y / 2 = 0",
        ] {
            let p = parse_pred(src).unwrap();
            assert_eq!(parse_pred(&print_pred(&p)).unwrap(), p, "source: {src}");
        }
    }

    #[test]
    fn machine_print_reparses_to_same_tree() {
        let src = "MACHINE M
SETS
  PID = {p1, p2}
CONSTANTS N
AXIOMS
  axm1: N <: 0 .. 3
VARIABLES s, w
INVARIANTS
  inv1: s <: 0 .. 3 ;
  inv2: w <: PID
EVENTS
  INITIALISATION = BEGIN s := N || w := {} END
  e1 = ANY x WHEN x : s THEN s := s \\ {x} END
  e2 = WHEN w = {} THEN skip END
END
";
        let m = parse_machine(src).unwrap();
        assert_eq!(parse_machine(&print_machine(&m)).unwrap(), m);
    }
}
