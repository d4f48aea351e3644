//! Recursive-descent parser for machines and standalone predicates.

use super::ast::*;
use super::lex::{lex, Token, TokenKind};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{span}: {msg}")]
pub struct ParseError {
    pub span: Span,
    pub msg: String,
}

/// Words that cannot be used as identifiers.
const RESERVED: &[&str] = &[
    "MACHINE", "SETS", "CONSTANTS", "AXIOMS", "VARIABLES", "INVARIANTS", "EVENTS", "END",
    "INITIALISATION", "ANY", "WHEN", "THEN", "BEGIN", "skip", "or", "not", "div", "mod", "card",
    "TRUE", "FALSE", "INT", "BOOL", "SET",
];

/// Parse a complete machine source text.
pub fn parse_machine(src: &str) -> Result<Machine, ParseError> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let m = p.machine()?;
    p.expect_eof()?;
    Ok(m)
}

/// Parse a standalone predicate (used for goal predicates given on the
/// command line). Identifiers are resolved against a machine later.
pub fn parse_pred(src: &str) -> Result<Pred, ParseError> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let pred = p.pred()?;
    p.expect_eof()?;
    Ok(pred)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn span(&self) -> Span {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map(|t| t.span)
            .unwrap_or_default()
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            span: self.span(),
            msg: msg.into(),
        })
    }

    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn describe_here(&self) -> String {
        match self.peek() {
            Some(TokenKind::Word(w)) => format!("`{w}`"),
            Some(TokenKind::Int(n)) => format!("`{n}`"),
            Some(TokenKind::Op(o)) => format!("`{o}`"),
            None => "end of input".to_string(),
        }
    }

    fn at_op(&self, op: &str) -> bool {
        matches!(self.peek(), Some(TokenKind::Op(o)) if *o == op)
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(TokenKind::Word(s)) if s == w)
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.at_op(op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.at_word(w) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: &str) -> Result<(), ParseError> {
        if self.eat_op(op) {
            Ok(())
        } else {
            self.err(format!("expected `{op}`, found {}", self.describe_here()))
        }
    }

    fn expect_word(&mut self, w: &str) -> Result<(), ParseError> {
        if self.eat_word(w) {
            Ok(())
        } else {
            self.err(format!("expected `{w}`, found {}", self.describe_here()))
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        if self.pos == self.tokens.len() {
            Ok(())
        } else {
            self.err(format!("unexpected {}", self.describe_here()))
        }
    }

    fn ident(&mut self) -> Result<Ident, ParseError> {
        match self.peek() {
            Some(TokenKind::Word(w)) if !RESERVED.contains(&w.as_str()) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => self.err(format!(
                "expected identifier, found {}",
                self.describe_here()
            )),
        }
    }

    fn ident_list(&mut self) -> Result<Vec<Ident>, ParseError> {
        let mut out = vec![self.ident()?];
        while self.eat_op(",") {
            out.push(self.ident()?);
        }
        Ok(out)
    }

    // ---- machine structure ------------------------------------------------

    fn machine(&mut self) -> Result<Machine, ParseError> {
        self.expect_word("MACHINE")?;
        let name = self.ident()?;
        let mut sorts = Vec::new();
        if self.eat_word("SETS") {
            loop {
                sorts.push(self.sort_decl()?);
                if !self.eat_op(";") || self.at_word("CONSTANTS") {
                    break;
                }
            }
        }
        let constants = if self.eat_word("CONSTANTS") {
            self.ident_list()?
        } else {
            Vec::new()
        };
        let axioms = if self.eat_word("AXIOMS") {
            self.clauses()?
        } else {
            Vec::new()
        };
        let variables = if self.eat_word("VARIABLES") {
            self.ident_list()?
        } else {
            Vec::new()
        };
        let invariants = if self.eat_word("INVARIANTS") {
            self.clauses()?
        } else {
            Vec::new()
        };
        self.expect_word("EVENTS")?;
        let init_span = self.span();
        self.expect_word("INITIALISATION")?;
        self.expect_op("=")?;
        self.expect_word("BEGIN")?;
        let actions = self.assign_list()?;
        self.expect_word("END")?;
        let init = Event {
            name: "INITIALISATION".to_string(),
            params: Vec::new(),
            guards: Vec::new(),
            actions,
            span: init_span,
        };
        let mut events = Vec::new();
        while !self.at_word("END") {
            events.push(self.event()?);
        }
        self.expect_word("END")?;
        let m = Machine {
            name,
            sorts,
            constants,
            axioms,
            variables,
            invariants,
            init,
            events,
        };
        self.check_declarations(&m)?;
        Ok(m)
    }

    fn sort_decl(&mut self) -> Result<SortDecl, ParseError> {
        let name = self.ident()?;
        self.expect_op("=")?;
        self.expect_op("{")?;
        let elements = self.ident_list()?;
        self.expect_op("}")?;
        Ok(SortDecl { name, elements })
    }

    fn clauses(&mut self) -> Result<Vec<Clause>, ParseError> {
        let mut out = Vec::new();
        loop {
            let span = self.span();
            let label = self.ident()?;
            self.expect_op(":")?;
            let pred = self.pred()?;
            out.push(Clause { label, pred, span });
            // A separator continues the list unless the next section starts.
            if !self.eat_op(";") {
                break;
            }
            if matches!(self.peek(), Some(TokenKind::Word(w))
                if ["VARIABLES", "INVARIANTS", "EVENTS"].contains(&w.as_str()))
            {
                break;
            }
        }
        Ok(out)
    }

    fn event(&mut self) -> Result<Event, ParseError> {
        let span = self.span();
        let name = self.ident()?;
        self.expect_op("=")?;
        let mut params = Vec::new();
        let mut guards = Vec::new();
        if self.eat_word("ANY") {
            loop {
                let p = self.ident()?;
                let ty = if self.eat_op(":") {
                    Some(self.ty()?)
                } else {
                    None
                };
                params.push((p, ty));
                if !self.eat_op(",") {
                    break;
                }
            }
            self.expect_word("WHEN")?;
            guards = self.guard_list()?;
            self.expect_word("THEN")?;
        } else if self.eat_word("WHEN") {
            guards = self.guard_list()?;
            self.expect_word("THEN")?;
        } else {
            self.expect_word("BEGIN")?;
        }
        let actions = if self.eat_word("skip") {
            Vec::new()
        } else {
            self.assign_list()?
        };
        self.expect_word("END")?;
        Ok(Event {
            name,
            params,
            guards,
            actions,
            span,
        })
    }

    /// The guard of an event, split at top-level conjunctions.
    fn guard_list(&mut self) -> Result<Vec<Pred>, ParseError> {
        let p = self.pred()?;
        Ok(match p {
            Pred::And(ps) => ps,
            other => vec![other],
        })
    }

    fn assign_list(&mut self) -> Result<Vec<Assign>, ParseError> {
        let mut out = Vec::new();
        loop {
            let span = self.span();
            let var = self.ident()?;
            self.expect_op(":=")?;
            let rhs = self.expr()?;
            out.push(Assign { var, rhs, span });
            if !self.eat_op("||") {
                break;
            }
        }
        Ok(out)
    }

    fn check_declarations(&self, m: &Machine) -> Result<(), ParseError> {
        let mut seen = std::collections::BTreeSet::new();
        let mut declare = |name: &Ident, what: &str| -> Result<(), ParseError> {
            if !seen.insert(name.clone()) {
                Err(ParseError {
                    span: Span::default(),
                    msg: format!("duplicate declaration of {what} `{name}`"),
                })
            } else {
                Ok(())
            }
        };
        for s in &m.sorts {
            declare(&s.name, "sort")?;
            if s.elements.is_empty() {
                return Err(ParseError {
                    span: Span::default(),
                    msg: format!("sort `{}` has no elements", s.name),
                });
            }
            for e in &s.elements {
                declare(e, "sort element")?;
            }
        }
        for c in &m.constants {
            declare(c, "constant")?;
        }
        for v in &m.variables {
            declare(v, "variable")?;
        }
        let mut events = std::collections::BTreeSet::new();
        for e in &m.events {
            if e.name == "INITIALISATION" || !events.insert(e.name.clone()) {
                return Err(ParseError {
                    span: e.span,
                    msg: format!("duplicate declaration of event `{}`", e.name),
                });
            }
        }
        Ok(())
    }

    // ---- types ------------------------------------------------------------

    fn ty(&mut self) -> Result<Ty, ParseError> {
        if self.eat_word("INT") {
            Ok(Ty::Int)
        } else if self.eat_word("BOOL") {
            Ok(Ty::Bool)
        } else if self.eat_word("SET") {
            self.expect_op("(")?;
            let inner = self.ty()?;
            self.expect_op(")")?;
            Ok(Ty::Set(Box::new(inner)))
        } else {
            Ok(Ty::Sort(self.ident()?))
        }
    }

    // ---- predicates ---------------------------------------------------------

    fn pred(&mut self) -> Result<Pred, ParseError> {
        let mut l = self.pred_imp()?;
        while self.eat_op("<=>") {
            let r = self.pred_imp()?;
            l = Pred::Iff(Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn pred_imp(&mut self) -> Result<Pred, ParseError> {
        let l = self.pred_or()?;
        if self.eat_op("=>") {
            let r = self.pred_imp()?;
            Ok(Pred::Imp(Box::new(l), Box::new(r)))
        } else {
            Ok(l)
        }
    }

    fn pred_or(&mut self) -> Result<Pred, ParseError> {
        let mut parts = vec![self.pred_and()?];
        while self.eat_word("or") {
            parts.push(self.pred_and()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Pred::Or(parts)
        })
    }

    fn pred_and(&mut self) -> Result<Pred, ParseError> {
        let mut parts = vec![self.pred_prim()?];
        while self.eat_op("&") {
            parts.push(self.pred_prim()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Pred::And(parts)
        })
    }

    fn pred_prim(&mut self) -> Result<Pred, ParseError> {
        if self.eat_word("not") {
            return Ok(Pred::Not(Box::new(self.pred_prim()?)));
        }
        if self.at_op("#") || self.at_op("!") {
            let exists = self.eat_op("#");
            if !exists {
                self.pos += 1;
            }
            let name = self.ident()?;
            let ty = if self.eat_op(":") {
                Some(self.ty()?)
            } else {
                None
            };
            self.expect_op(".")?;
            self.expect_op("(")?;
            let body = self.pred()?;
            self.expect_op(")")?;
            return Ok(if exists {
                Pred::Exists(name, ty, Box::new(body))
            } else {
                Pred::Forall(name, ty, Box::new(body))
            });
        }
        // An atom `expr REL expr`, which subsumes parenthesized expressions
        // on the left. If that fails, retry as a parenthesized predicate.
        let save = self.pos;
        if let Ok(lhs) = self.expr() {
            if let Some(op) = self.relation() {
                let rhs = self.expr()?;
                return Ok(match op {
                    ":" => Pred::Mem(lhs, rhs),
                    "/:" => Pred::NotMem(lhs, rhs),
                    "<:" => Pred::Subset(lhs, rhs),
                    "=" => Pred::Cmp(CmpOp::Eq, lhs, rhs),
                    "/=" => Pred::Cmp(CmpOp::Ne, lhs, rhs),
                    "<" => Pred::Cmp(CmpOp::Lt, lhs, rhs),
                    "<=" => Pred::Cmp(CmpOp::Le, lhs, rhs),
                    ">" => Pred::Cmp(CmpOp::Gt, lhs, rhs),
                    ">=" => Pred::Cmp(CmpOp::Ge, lhs, rhs),
                    _ => unreachable!(),
                });
            }
            if let Expr::Bool(b) = lhs {
                return Ok(if b { Pred::True } else { Pred::False });
            }
        }
        self.pos = save;
        if self.eat_op("(") {
            let p = self.pred()?;
            self.expect_op(")")?;
            return Ok(p);
        }
        self.err(format!("expected predicate, found {}", self.describe_here()))
    }

    fn relation(&mut self) -> Option<&'static str> {
        for op in [":", "/:", "<:", "=", "/=", "<=", ">=", "<", ">"] {
            if self.at_op(op) {
                self.pos += 1;
                return Some(op);
            }
        }
        None
    }

    // ---- expressions --------------------------------------------------------

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut l = self.expr_range()?;
        loop {
            let build: fn(Box<Expr>, Box<Expr>) -> Expr = if self.eat_op("\\/") {
                Expr::Union
            } else if self.eat_op("/\\") {
                Expr::Inter
            } else if self.eat_op("\\") {
                Expr::Diff
            } else {
                break;
            };
            let r = self.expr_range()?;
            l = build(Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn expr_range(&mut self) -> Result<Expr, ParseError> {
        let l = self.expr_add()?;
        if self.eat_op("..") {
            let r = self.expr_add()?;
            Ok(Expr::Interval(Box::new(l), Box::new(r)))
        } else {
            Ok(l)
        }
    }

    fn expr_add(&mut self) -> Result<Expr, ParseError> {
        let mut l = self.expr_mul()?;
        loop {
            let op = if self.eat_op("+") {
                ArithOp::Add
            } else if self.eat_op("-") {
                ArithOp::Sub
            } else {
                break;
            };
            let r = self.expr_mul()?;
            l = Expr::Arith(op, Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn expr_mul(&mut self) -> Result<Expr, ParseError> {
        let mut l = self.expr_unary()?;
        loop {
            let op = if self.eat_op("*") {
                ArithOp::Mul
            } else if self.eat_op("/") || self.eat_word("div") {
                ArithOp::Div
            } else if self.eat_word("mod") {
                ArithOp::Mod
            } else {
                break;
            };
            let r = self.expr_unary()?;
            l = Expr::Arith(op, Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn expr_unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat_op("-") {
            let e = self.expr_unary()?;
            Ok(match e {
                Expr::Int(n) => Expr::Int(-n),
                other => Expr::Arith(ArithOp::Sub, Box::new(Expr::Int(0)), Box::new(other)),
            })
        } else {
            self.expr_primary()
        }
    }

    fn expr_primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(TokenKind::Int(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(Expr::Int(n))
            }
            Some(TokenKind::Word(w)) if w == "TRUE" => {
                self.pos += 1;
                Ok(Expr::Bool(true))
            }
            Some(TokenKind::Word(w)) if w == "FALSE" => {
                self.pos += 1;
                Ok(Expr::Bool(false))
            }
            Some(TokenKind::Word(w)) if w == "card" => {
                self.pos += 1;
                self.expect_op("(")?;
                let e = self.expr()?;
                self.expect_op(")")?;
                Ok(Expr::Card(Box::new(e)))
            }
            Some(TokenKind::Op("{")) => {
                self.pos += 1;
                if self.eat_op("}") {
                    return Ok(Expr::EmptySet);
                }
                let mut elems = vec![self.expr()?];
                while self.eat_op(",") {
                    elems.push(self.expr()?);
                }
                self.expect_op("}")?;
                Ok(Expr::SetLit(elems))
            }
            Some(TokenKind::Op("(")) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_op(")")?;
                Ok(e)
            }
            _ => Ok(Expr::Ident(self.ident()?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn machine_skeleton_round_trips_structure() {
        let src = "\
MACHINE M
CONSTANTS N
AXIOMS
  axm1: N <: 0 .. 3 ;
  axm2: N /= {}
VARIABLES s, min
INVARIANTS
  inv1: s <: 0 .. 3 ;
  inv2: min : 0 .. 3
EVENTS
  INITIALISATION = BEGIN s := N \\/ {3} || min := 3 END
  acc = ANY x WHEN min : s & x : s & x < min THEN s := s \\ {min} || min := x END
  get = WHEN s = {} THEN min := 0 END
END";
        let m = parse_machine(src).unwrap();
        assert_eq!(m.name, "M");
        assert_eq!(m.constants, vec!["N"]);
        assert_eq!(m.axioms.len(), 2);
        assert_eq!(m.variables, vec!["s", "min"]);
        assert_eq!(m.events.len(), 2);
        assert_eq!(m.events[0].params.len(), 1);
        assert_eq!(m.events[0].guards.len(), 3);
        assert_eq!(m.init.actions.len(), 2);
    }

    #[test]
    fn empty_variables_section_is_an_error() {
        let err = parse_machine("MACHINE M VARIABLES END").unwrap_err();
        assert!(err.msg.contains("expected identifier"), "{err}");
    }

    #[test]
    fn duplicate_declarations_are_rejected() {
        let err = parse_machine(
            "MACHINE M CONSTANTS a, a EVENTS INITIALISATION = BEGIN x := 0 END END",
        )
        .unwrap_err();
        assert!(err.msg.contains("duplicate declaration"), "{err}");
    }

    #[test]
    fn parenthesized_predicates_and_expressions_disambiguate() {
        let p = parse_pred("(x + 1) * 2 < y & (x < y or y < z)").unwrap();
        match p {
            Pred::And(ps) => {
                assert!(matches!(ps[0], Pred::Cmp(CmpOp::Lt, _, _)));
                assert!(matches!(ps[1], Pred::Or(_)));
            }
            other => panic!("unexpected shape: {other:?}"),
        }
    }

    #[test]
    fn quantifier_syntax_with_and_without_annotation() {
        assert!(matches!(
            parse_pred("#x:INT.(x > 2)").unwrap(),
            Pred::Exists(_, Some(Ty::Int), _)
        ));
        assert!(matches!(
            parse_pred("!y.(y : s => y < 4)").unwrap(),
            Pred::Forall(_, None, _)
        ));
    }

    #[test]
    fn set_operators_bind_looser_than_ranges() {
        let e = match parse_pred("x : 0 .. 3 \\/ {7}").unwrap() {
            Pred::Mem(_, rhs) => rhs,
            other => panic!("unexpected shape: {other:?}"),
        };
        assert!(matches!(e, Expr::Union(_, _)));
    }

    #[test]
    fn unary_minus_folds_literals() {
        let p = parse_pred("x > -3").unwrap();
        assert_eq!(
            p,
            Pred::Cmp(CmpOp::Gt, Expr::ident("x"), Expr::Int(-3))
        );
    }

    #[test]
    fn reserved_words_cannot_be_identifiers() {
        assert!(parse_pred("card < 3").is_err());
        assert!(parse_machine(
            "MACHINE END EVENTS INITIALISATION = BEGIN x := 0 END END"
        )
        .is_err());
    }

    #[test]
    fn guardless_event_uses_begin() {
        let src = "MACHINE M VARIABLES x INVARIANTS i1: x : 0 .. 1 EVENTS
INITIALISATION = BEGIN x := 0 END
flip = BEGIN x := 1 - x END
END";
        let m = parse_machine(src).unwrap();
        assert!(m.events[0].guards.is_empty());
    }

    #[test]
    fn skip_event_has_no_actions() {
        let src = "MACHINE M VARIABLES x INVARIANTS i1: x : 0 .. 1 EVENTS
INITIALISATION = BEGIN x := 0 END
idle = WHEN 1 = 1 THEN skip END
END";
        let m = parse_machine(src).unwrap();
        assert!(m.events[0].actions.is_empty());
        assert_eq!(m.events[0].guards.len(), 1);
    }
}
