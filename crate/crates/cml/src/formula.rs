//! Formula AST for the Markovian logics: the `L`-only language and its
//! extension with `M` operators, together with the structural measures
//! (granularity, index bound, modal depth, action set) that define the
//! closure of a formula.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num::{BigUint, Integer, One};

use crate::rational::Rat;

/// A transition label, drawn from a finite alphabet fixed per run.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(pub String);

impl Label {
    pub fn new(name: impl Into<String>) -> Label {
        Label(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// `[A-Za-z][A-Za-z0-9_]*`
    pub fn is_valid_name(name: &str) -> bool {
        let mut chars = name.chars();
        match chars.next() {
            Some(c) if c.is_ascii_alphabetic() => {}
            _ => return false,
        }
        chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Label {
        Label(s.to_string())
    }
}

/// Core formula nodes. `E`, `F`, `|` and `->` are surface sugar expanded by
/// the parser; only these five constructors carry semantics.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Top,
    Neg(Arc<Formula>),
    And(Arc<Formula>, Arc<Formula>),
    /// Rate at least `r`.
    L(Label, Rat, Arc<Formula>),
    /// Rate at most `r`; only present in the extended language.
    M(Label, Rat, Arc<Formula>),
}

impl Formula {
    pub fn top() -> Formula {
        Formula::Top
    }

    pub fn bottom() -> Formula {
        Formula::Top.neg()
    }

    pub fn neg(self) -> Formula {
        Formula::Neg(Arc::new(self))
    }

    pub fn and(self, rhs: Formula) -> Formula {
        Formula::And(Arc::new(self), Arc::new(rhs))
    }

    /// `a | b` as `~(~a & ~b)`.
    pub fn or(self, rhs: Formula) -> Formula {
        self.neg().and(rhs.neg()).neg()
    }

    /// `a -> b` as `~(a & ~b)`.
    pub fn implies(self, rhs: Formula) -> Formula {
        self.and(rhs.neg()).neg()
    }

    pub fn iff(self, rhs: Formula) -> Formula {
        self.clone()
            .implies(rhs.clone())
            .and(rhs.implies(self))
    }

    pub fn l(label: impl Into<Label>, index: Rat, arg: Formula) -> Formula {
        debug_assert!(!index.is_negative(), "modal index must be nonnegative");
        Formula::L(label.into(), index, Arc::new(arg))
    }

    pub fn m(label: impl Into<Label>, index: Rat, arg: Formula) -> Formula {
        debug_assert!(!index.is_negative(), "modal index must be nonnegative");
        Formula::M(label.into(), index, Arc::new(arg))
    }

    /// `E[a,r] phi` abbreviates `L[a,r] phi & M[a,r] phi`.
    pub fn exactly(label: impl Into<Label>, index: Rat, arg: Formula) -> Formula {
        let label = label.into();
        Formula::l(label.clone(), index.clone(), arg.clone()).and(Formula::m(label, index, arg))
    }

    /// True iff the formula contains an `M` operator, i.e. lives in the
    /// extended language only.
    pub fn uses_m(&self) -> bool {
        match self {
            Formula::Top => false,
            Formula::Neg(p) => p.uses_m(),
            Formula::And(p, q) => p.uses_m() || q.uses_m(),
            Formula::L(_, _, p) => p.uses_m(),
            Formula::M(_, _, _) => true,
        }
    }

    /// Negation-free check: built from `T`, `&`, `L`, `M` only.
    pub fn is_negation_free(&self) -> bool {
        match self {
            Formula::Top => true,
            Formula::Neg(_) => false,
            Formula::And(p, q) => p.is_negation_free() && q.is_negation_free(),
            Formula::L(_, _, p) | Formula::M(_, _, p) => p.is_negation_free(),
        }
    }

    pub fn modal_depth(&self) -> u32 {
        match self {
            Formula::Top => 0,
            Formula::Neg(p) => p.modal_depth(),
            Formula::And(p, q) => p.modal_depth().max(q.modal_depth()),
            Formula::L(_, _, p) | Formula::M(_, _, p) => p.modal_depth() + 1,
        }
    }

    fn collect_indices(&self, out: &mut Vec<Rat>) {
        match self {
            Formula::Top => {}
            Formula::Neg(p) => p.collect_indices(out),
            Formula::And(p, q) => {
                p.collect_indices(out);
                q.collect_indices(out);
            }
            Formula::L(_, r, p) | Formula::M(_, r, p) => {
                out.push(r.clone());
                p.collect_indices(out);
            }
        }
    }

    fn collect_actions(&self, out: &mut BTreeSet<Label>) {
        match self {
            Formula::Top => {}
            Formula::Neg(p) => p.collect_actions(out),
            Formula::And(p, q) => {
                p.collect_actions(out);
                q.collect_actions(out);
            }
            Formula::L(a, _, p) | Formula::M(a, _, p) => {
                out.insert(a.clone());
                p.collect_actions(out);
            }
        }
    }

    /// Canonical text. `parse(print(phi))` is structurally identical to `phi`.
    pub fn print(&self) -> String {
        let mut s = String::new();
        self.write(&mut s);
        s
    }

    fn write(&self, out: &mut String) {
        match self {
            Formula::Top => out.push('T'),
            Formula::Neg(p) => {
                out.push('~');
                p.write(out);
            }
            Formula::And(p, q) => {
                out.push('(');
                p.write(out);
                out.push_str(" & ");
                q.write(out);
                out.push(')');
            }
            Formula::L(a, r, p) => {
                out.push_str(&format!("L[{},{}] ", a, r));
                p.write(out);
            }
            Formula::M(a, r, p) => {
                out.push_str(&format!("M[{},{}] ", a, r));
                p.write(out);
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.print())
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.print())
    }
}

/// Structural bounds of a formula: the data that determines its closure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureSpec {
    /// Least common denominator of the modal indices (1 for modal-free
    /// formulas).
    pub granularity: BigUint,
    /// Largest modal index (0 for modal-free formulas).
    pub max_index: Rat,
    pub modal_depth: u32,
    pub actions: BTreeSet<Label>,
}

impl ClosureSpec {
    pub fn new(
        granularity: u64,
        max_index: Rat,
        modal_depth: u32,
        actions: impl IntoIterator<Item = Label>,
    ) -> ClosureSpec {
        assert!(granularity > 0, "granularity must be positive");
        ClosureSpec {
            granularity: BigUint::from(granularity),
            max_index,
            modal_depth,
            actions: actions.into_iter().collect(),
        }
    }

    /// Whether `phi` belongs to the closure described by `self`: indices on
    /// the granularity grid and bounded by `max_index`, depth and actions
    /// within bounds.
    pub fn contains(&self, phi: &Formula) -> bool {
        let m = measures(phi);
        self.granularity.is_multiple_of(&m.granularity)
            && m.max_index <= self.max_index
            && m.modal_depth <= self.modal_depth
            && m.actions.is_subset(&self.actions)
    }
}

/// The structural measures of a formula. Modal-free formulas get
/// granularity 1 and index bound 0, which keeps the result total.
pub fn measures(phi: &Formula) -> ClosureSpec {
    let mut indices = Vec::new();
    phi.collect_indices(&mut indices);
    let mut granularity = BigUint::one();
    let mut max_index = Rat::zero();
    for r in &indices {
        granularity = granularity.lcm(&r.denom_uint());
        if r > &max_index {
            max_index = r.clone();
        }
    }
    let mut actions = BTreeSet::new();
    phi.collect_actions(&mut actions);
    ClosureSpec {
        granularity,
        max_index,
        modal_depth: phi.modal_depth(),
        actions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lab(s: &str) -> Label {
        Label::new(s)
    }

    #[test]
    fn printing_canonical_forms() {
        assert_eq!(Formula::l("a", Rat::new(1, 2), Formula::Top).print(), "L[a,1/2] T");
        assert_eq!(Formula::Top.neg().print(), "~T");
        assert_eq!(Formula::Top.and(Formula::Top).print(), "(T & T)");
    }

    #[test]
    fn measures_nested_l() {
        // Independent hand recursion: indices {1/2, 1/3} so the least common
        // denominator is lcm(2,3) = 6; the larger index is 1/2; depth 2.
        let phi = Formula::l(
            "a",
            Rat::new(1, 2),
            Formula::l("b", Rat::new(1, 3), Formula::Top),
        );
        let m = measures(&phi);
        assert_eq!(m.granularity, BigUint::from(6u32));
        assert_eq!(m.max_index, Rat::new(1, 2));
        assert_eq!(m.modal_depth, 2);
        assert_eq!(m.actions, [lab("a"), lab("b")].into_iter().collect());
    }

    #[test]
    fn measures_top() {
        let m = measures(&Formula::Top);
        assert_eq!(m.granularity, BigUint::from(1u32));
        assert_eq!(m.max_index, Rat::zero());
        assert_eq!(m.modal_depth, 0);
        assert!(m.actions.is_empty());
    }

    #[test]
    fn measures_mixed_l_and_m() {
        // Hand recursion over the extended clauses: indices {2, 1/2} give
        // granularity 2 and bound 2; both conjuncts have depth 1.
        let phi = Formula::l("a", Rat::from_int(2), Formula::Top)
            .and(Formula::m("a", Rat::new(1, 2), Formula::Top));
        let m = measures(&phi);
        assert_eq!(m.granularity, BigUint::from(2u32));
        assert_eq!(m.max_index, Rat::from_int(2));
        assert_eq!(m.modal_depth, 1);
        assert_eq!(m.actions, [lab("a")].into_iter().collect());
    }

    #[test]
    fn uses_m_flags_extended_language() {
        assert!(!Formula::l("a", Rat::one(), Formula::Top).uses_m());
        assert!(Formula::m("a", Rat::one(), Formula::Top).uses_m());
        assert!(Formula::exactly("a", Rat::one(), Formula::Top).uses_m());
    }

    #[test]
    fn closure_membership() {
        let spec = ClosureSpec::new(2, Rat::from_int(1), 1, [lab("a")]);
        assert!(spec.contains(&Formula::l("a", Rat::new(1, 2), Formula::Top)));
        assert!(!spec.contains(&Formula::l("a", Rat::new(1, 3), Formula::Top)));
        assert!(!spec.contains(&Formula::l("a", Rat::from_int(2), Formula::Top)));
        assert!(!spec.contains(&Formula::l("b", Rat::one(), Formula::Top)));
        assert!(!spec.contains(&Formula::l(
            "a",
            Rat::one(),
            Formula::l("a", Rat::one(), Formula::Top)
        )));
    }
}
