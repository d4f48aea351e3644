//! Finite domains for the four value kinds the solver handles: bounded
//! integers, booleans, enumerated sort elements, and finite sets.
//!
//! Every domain answers two questions cheaply: how many values remain
//! (`size`), and whether exactly one remains (`is_fixed`). Mutation lives in
//! the store, which records every shrink on its trail; the types here only
//! hold state and answer queries, so they stay trivially consistent.

use crate::model::Value;

/// A contiguous integer interval with a finite set of excluded interior
/// values. Kept normalized: `lb <= ub` and every excluded value lies
/// strictly between the bounds (exclusions touching a bound are folded into
/// the bound itself by the store's mutators).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntDomain {
    pub lb: i64,
    pub ub: i64,
    pub excluded: std::collections::BTreeSet<i64>,
}

impl IntDomain {
    pub fn new(lb: i64, ub: i64) -> IntDomain {
        IntDomain {
            lb,
            ub,
            excluded: Default::default(),
        }
    }

    /// Number of values remaining.
    pub fn size(&self) -> u64 {
        if self.lb > self.ub {
            return 0;
        }
        (self.ub - self.lb + 1) as u64 - self.excluded.len() as u64
    }

    pub fn is_fixed(&self) -> bool {
        self.lb == self.ub
    }

    pub fn contains(&self, n: i64) -> bool {
        n >= self.lb && n <= self.ub && !self.excluded.contains(&n)
    }

    /// Remaining values in ascending order.
    pub fn values(&self) -> impl Iterator<Item = i64> + '_ {
        (self.lb..=self.ub).filter(move |n| !self.excluded.contains(n))
    }
}

/// Which truth values a boolean variable may still take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoolDomain {
    pub can_false: bool,
    pub can_true: bool,
}

impl BoolDomain {
    pub fn full() -> BoolDomain {
        BoolDomain {
            can_false: true,
            can_true: true,
        }
    }

    pub fn size(&self) -> u64 {
        self.can_false as u64 + self.can_true as u64
    }

    pub fn is_fixed(&self) -> bool {
        self.size() == 1
    }

    pub fn value(&self) -> Option<bool> {
        match (self.can_false, self.can_true) {
            (false, true) => Some(true),
            (true, false) => Some(false),
            _ => None,
        }
    }
}

/// Candidate elements of an enumerated sort, as sorted indices into the
/// sort's declaration. Empty means the store is inconsistent; a singleton
/// means the variable is bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortDomain {
    pub candidates: Vec<u32>,
}

impl SortDomain {
    pub fn full(n: usize) -> SortDomain {
        SortDomain {
            candidates: (0..n as u32).collect(),
        }
    }

    pub fn size(&self) -> u64 {
        self.candidates.len() as u64
    }

    pub fn is_fixed(&self) -> bool {
        self.candidates.len() == 1
    }

    pub fn contains(&self, idx: u32) -> bool {
        self.candidates.binary_search(&idx).is_ok()
    }
}

/// Three-valued membership of one universe element in a set variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flag {
    In,
    Out,
    Unknown,
}

/// A partially known finite set: one membership flag per element of a fixed,
/// sorted universe. Flags move from `Unknown` to `In`/`Out` and never back
/// within a branch (the trail restores them on backtracking).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetDomain {
    /// Candidate elements, sorted and deduplicated.
    pub universe: Vec<Value>,
    pub flags: Vec<Flag>,
}

impl SetDomain {
    pub fn new(mut universe: Vec<Value>) -> SetDomain {
        universe.sort();
        universe.dedup();
        let flags = vec![Flag::Unknown; universe.len()];
        SetDomain { universe, flags }
    }

    pub fn index_of(&self, v: &Value) -> Option<usize> {
        self.universe.binary_search(v).ok()
    }

    /// Membership of a value: `Out` for anything outside the universe.
    pub fn flag_of(&self, v: &Value) -> Flag {
        match self.index_of(v) {
            Some(i) => self.flags[i],
            None => Flag::Out,
        }
    }

    pub fn count_in(&self) -> usize {
        self.flags.iter().filter(|f| **f == Flag::In).count()
    }

    pub fn count_unknown(&self) -> usize {
        self.flags.iter().filter(|f| **f == Flag::Unknown).count()
    }

    /// How many distinct sets remain: 2^(#unknown flags), saturating.
    pub fn size(&self) -> u64 {
        let unknown = self.count_unknown();
        if unknown >= 64 {
            u64::MAX
        } else {
            1u64 << unknown
        }
    }

    /// Cardinality interval [#IN, #IN + #UNKNOWN] implied by the flags.
    pub fn card_range(&self) -> (i64, i64) {
        let inn = self.count_in() as i64;
        (inn, inn + self.count_unknown() as i64)
    }

    pub fn is_fixed(&self) -> bool {
        self.count_unknown() == 0
    }

    /// The set value once every flag is decided.
    pub fn value(&self) -> Option<Value> {
        if !self.is_fixed() {
            return None;
        }
        Some(Value::Set(
            self.universe
                .iter()
                .zip(&self.flags)
                .filter(|(_, f)| **f == Flag::In)
                .map(|(v, _)| v.clone())
                .collect(),
        ))
    }

    /// Index of the lowest still-unknown flag, if any.
    pub fn first_unknown(&self) -> Option<usize> {
        self.flags.iter().position(|f| *f == Flag::Unknown)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn int_domain_counts_holes() {
        let mut d = IntDomain::new(0, 9);
        d.excluded.insert(3);
        d.excluded.insert(7);
        assert_eq!(d.size(), 8);
        assert!(!d.contains(3) && d.contains(4));
        assert_eq!(d.values().collect::<Vec<_>>(), vec![0, 1, 2, 4, 5, 6, 8, 9]);
    }

    #[test]
    fn set_domain_cardinality_tracks_flags() {
        let mut d = SetDomain::new(vec![
            Value::Int(0),
            Value::Int(1),
            Value::Int(2),
            Value::Int(3),
        ]);
        assert_eq!(d.card_range(), (0, 4));
        assert_eq!(d.size(), 16);
        d.flags[0] = Flag::In;
        d.flags[1] = Flag::Out;
        assert_eq!(d.card_range(), (1, 3));
        assert_eq!(d.size(), 4);
        assert_eq!(d.flag_of(&Value::Int(9)), Flag::Out);
    }

    #[test]
    fn fixed_set_materializes_its_value() {
        let mut d = SetDomain::new(vec![Value::Int(1), Value::Int(2)]);
        d.flags[0] = Flag::In;
        assert_eq!(d.value(), None);
        d.flags[1] = Flag::Out;
        let got = d.value().unwrap();
        assert_eq!(got, Value::Set([Value::Int(1)].into_iter().collect()));
    }

    #[test]
    fn universe_is_sorted_and_deduplicated() {
        let d = SetDomain::new(vec![Value::Int(2), Value::Int(0), Value::Int(2)]);
        assert_eq!(d.universe, vec![Value::Int(0), Value::Int(2)]);
    }
}
