/// A commutative semiring. Instances used for parsing are also idempotent,
/// which is what makes cyclic derivations converge.
pub trait Semiring {
    type Elem: Clone + Eq + std::fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn plus(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn times(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    fn is_zero(&self, a: &Self::Elem) -> bool {
        *a == self.zero()
    }

    fn sum(&self, items: Vec<Self::Elem>) -> Self::Elem {
        items.iter().fold(self.zero(), |acc, x| self.plus(&acc, x))
    }

    fn product(&self, items: Vec<Self::Elem>) -> Self::Elem {
        items.iter().fold(self.one(), |acc, x| self.times(&acc, x))
    }
}

/// Recognition: `or` and `and`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Boolean;

impl Semiring for Boolean {
    type Elem = bool;

    fn zero(&self) -> bool {
        false
    }
    fn one(&self) -> bool {
        true
    }
    fn plus(&self, a: &bool, b: &bool) -> bool {
        *a || *b
    }
    fn times(&self, a: &bool, b: &bool) -> bool {
        *a && *b
    }
}
