//! Deriving the finite universe of every set-typed variable.
//!
//! A set variable is represented by membership flags over a fixed, finite
//! candidate universe, so the universe must be pinned down before any
//! constraint is posted. The tightest available source wins:
//!
//! 1. A ground top-level conjunct `S ⊆ G` or `S = G` bounding the variable;
//!    the smallest such `G` becomes the universe (exact, nothing clipped).
//! 2. Otherwise the variable's element type: sort elements, the two
//!    booleans, the clipped global integer range, or the powerset of a small
//!    inner universe. Integer-typed fallbacks mark the store as clipped,
//!    since members beyond the global bound are unrepresentable.

use std::collections::BTreeSet;

use crate::model::{
    eval_expr, free_vars_expr, CmpOp, EvalCtx, EvalError, Expr, Ident, Pred, SortDecl, Ty,
    Valuation, Value,
};

use super::Halt;

/// Hard cap on universe size; beyond this the representation is refused
/// rather than silently exploding.
const MAX_UNIVERSE: usize = 4096;

/// Inner universes larger than this are not expanded into powersets.
const MAX_POWERSET_BASE: usize = 8;

/// A derived universe: the candidate member values (sorted, deduplicated by
/// the domain constructor) and whether the global integer clip took part.
pub(crate) struct Universe {
    pub values: Vec<Value>,
    pub clipped: bool,
}

/// Derive the universe for set variable `name` of element type `elem_ty`,
/// preferring ground bounds among `seed`'s top-level conjuncts.
pub(crate) fn set_universe(
    name: &Ident,
    elem_ty: &Ty,
    seed: Option<&Pred>,
    scope_vars: &BTreeSet<Ident>,
    sorts: &[SortDecl],
    maxint: i64,
) -> Result<Universe, Halt> {
    if let Some(p) = seed {
        let mut best: Option<Vec<Value>> = None;
        for c in p.flat_conjuncts() {
            let bound = match c {
                Pred::Subset(Expr::Ident(n), g) if n == name => g,
                Pred::Cmp(CmpOp::Eq, Expr::Ident(n), g) if n == name => g,
                Pred::Cmp(CmpOp::Eq, g, Expr::Ident(n)) if n == name => g,
                _ => continue,
            };
            if !bound.wd_safe() || !is_closed(bound, scope_vars) {
                continue;
            }
            let ctx = EvalCtx::new(sorts, maxint);
            let members = match eval_expr(bound, &Valuation::new(), &ctx) {
                Ok(Value::Set(m)) => m,
                Ok(_) => continue,
                Err(EvalError::WellDefinedness { expr }) => {
                    return Err(Halt::Wd(EvalError::WellDefinedness { expr }))
                }
                Err(_) => continue,
            };
            if best.as_ref().is_none_or(|b| members.len() < b.len()) {
                best = Some(members.into_iter().collect());
            }
        }
        if let Some(values) = best {
            return Ok(Universe {
                values,
                clipped: false,
            });
        }
    }
    type_universe(elem_ty, sorts, maxint)
}

/// The full universe of a type: every value a variable of this type could
/// take as a set member.
pub(crate) fn type_universe(ty: &Ty, sorts: &[SortDecl], maxint: i64) -> Result<Universe, Halt> {
    match ty {
        Ty::Bool => Ok(Universe {
            values: vec![Value::Bool(false), Value::Bool(true)],
            clipped: false,
        }),
        Ty::Sort(s) => {
            let sd = sorts
                .iter()
                .find(|d| d.name == *s)
                .unwrap_or_else(|| panic!("unknown sort `{s}` survived typechecking"));
            Ok(Universe {
                values: sd
                    .elements
                    .iter()
                    .map(|e| Value::Elem(e.clone()))
                    .collect(),
                clipped: false,
            })
        }
        Ty::Int => {
            let width = 2 * maxint + 1;
            if width < 0 || width as usize > MAX_UNIVERSE {
                return Err(Halt::TooWide(format!(
                    "integer set universe -{maxint}..{maxint} is too large to enumerate"
                )));
            }
            Ok(Universe {
                values: (-maxint..=maxint).map(Value::Int).collect(),
                clipped: true,
            })
        }
        Ty::Set(inner) => {
            let base = type_universe(inner, sorts, maxint)?;
            if base.values.len() > MAX_POWERSET_BASE {
                return Err(Halt::TooWide(format!(
                    "universe of sets over {} candidate elements is too large",
                    base.values.len()
                )));
            }
            let mut values = Vec::with_capacity(1 << base.values.len());
            for mask in 0u32..(1 << base.values.len()) {
                let sub: BTreeSet<Value> = base
                    .values
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, v)| v.clone())
                    .collect();
                values.push(Value::Set(sub));
            }
            Ok(Universe {
                values,
                clipped: base.clipped,
            })
        }
    }
}

/// True when the expression mentions none of the scope's variables, so it
/// evaluates without a valuation (sort elements and carriers resolve on
/// their own).
pub(crate) fn is_closed(e: &Expr, scope_vars: &BTreeSet<Ident>) -> bool {
    free_vars_expr(e).iter().all(|n| !scope_vars.contains(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_pred;

    fn scope(names: &[&str]) -> BTreeSet<Ident> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn ground_subset_bound_beats_the_type_fallback() {
        let p = parse_pred("N <: 0..3 & N /= {}").unwrap();
        let u = set_universe(
            &"N".to_string(),
            &Ty::Int,
            Some(&p),
            &scope(&["N"]),
            &[],
            1023,
        )
        .unwrap();
        assert_eq!(u.values, (0..=3).map(Value::Int).collect::<Vec<_>>());
        assert!(!u.clipped);
    }

    #[test]
    fn tightest_of_several_bounds_wins() {
        let p = parse_pred("s <: 0..9 & s <: 1..2").unwrap();
        let u = set_universe(
            &"s".to_string(),
            &Ty::Int,
            Some(&p),
            &scope(&["s"]),
            &[],
            1023,
        )
        .unwrap();
        assert_eq!(u.values.len(), 2);
    }

    #[test]
    fn bounds_mentioning_variables_are_ignored() {
        // `s <: t` cannot seed a universe: `t` is itself unknown.
        let p = parse_pred("s <: t").unwrap();
        let u = set_universe(
            &"s".to_string(),
            &Ty::Int,
            Some(&p),
            &scope(&["s", "t"]),
            &[],
            2,
        )
        .unwrap();
        assert_eq!(u.values, (-2..=2).map(Value::Int).collect::<Vec<_>>());
        assert!(u.clipped, "integer fallback leans on the global clip");
    }

    #[test]
    fn sort_universe_lists_the_declared_elements() {
        let sorts = [SortDecl {
            name: "PID".into(),
            elements: vec!["p1".into(), "p2".into()],
        }];
        let u = type_universe(&Ty::Sort("PID".into()), &sorts, 1023).unwrap();
        assert_eq!(
            u.values,
            vec![Value::Elem("p1".into()), Value::Elem("p2".into())]
        );
    }

    #[test]
    fn powersets_stay_small_or_are_refused() {
        let sorts = [SortDecl {
            name: "S".into(),
            elements: vec!["a".into(), "b".into()],
        }];
        let u = type_universe(&Ty::Set(Box::new(Ty::Sort("S".into()))), &sorts, 1023).unwrap();
        assert_eq!(u.values.len(), 4);
        let wide = type_universe(&Ty::Set(Box::new(Ty::Int)), &sorts, 1023);
        assert!(matches!(wide, Err(Halt::TooWide(_))));
    }
}
