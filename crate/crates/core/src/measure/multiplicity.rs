use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::numeric::log2_add;

/// Exact products are kept while they need at most this many bits.
const EXACT_BITS_CAP: u64 = 1 << 16;

/// Cell count of an atom, exact or as `log₂`.
#[derive(Debug, Clone, PartialEq)]
pub enum Multiplicity {
    Exact(BigUint),
    Log2(f64),
}

/// `log₂ n` of an arbitrary-precision integer (`−∞` for zero).
pub fn biguint_log2(n: &BigUint) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().expect("fits in f64").log2();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().expect("64-bit value");
    top.log2() + shift as f64
}

impl Multiplicity {
    pub fn one() -> Self {
        Multiplicity::Exact(BigUint::one())
    }

    pub fn log2(&self) -> f64 {
        match self {
            Multiplicity::Exact(n) => biguint_log2(n),
            Multiplicity::Log2(v) => *v,
        }
    }

    pub fn exact(&self) -> Option<&BigUint> {
        match self {
            Multiplicity::Exact(n) => Some(n),
            Multiplicity::Log2(_) => None,
        }
    }

    pub(crate) fn is_at_least_one(&self) -> bool {
        match self {
            Multiplicity::Exact(n) => !n.is_zero(),
            Multiplicity::Log2(v) => *v >= -1e-12,
        }
    }

    pub fn add(&self, other: &Multiplicity) -> Multiplicity {
        match (self, other) {
            (Multiplicity::Exact(a), Multiplicity::Exact(b)) => Multiplicity::Exact(a + b),
            _ => Multiplicity::Log2(log2_add(self.log2(), other.log2())),
        }
    }

    pub fn mul(&self, other: &Multiplicity) -> Multiplicity {
        match (self, other) {
            (Multiplicity::Exact(a), Multiplicity::Exact(b))
                if a.bits() + b.bits() <= EXACT_BITS_CAP =>
            {
                Multiplicity::Exact(a * b)
            }
            _ => Multiplicity::Log2(self.log2() + other.log2()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log2_of_huge_integer() {
        let n = BigUint::from(3u32).pow(5000);
        let want = 5000.0 * 3f64.log2();
        assert!((biguint_log2(&n) - want).abs() < 1e-9 * want);
        assert_eq!(biguint_log2(&BigUint::from(1024u32)), 10.0);
    }

    #[test]
    fn arithmetic() {
        let a = Multiplicity::Exact(BigUint::from(6u32));
        let b = Multiplicity::Exact(BigUint::from(7u32));
        assert_eq!(a.mul(&b), Multiplicity::Exact(BigUint::from(42u32)));
        let l = Multiplicity::Log2(3.0).add(&Multiplicity::Exact(BigUint::from(8u32)));
        assert_eq!(l, Multiplicity::Log2(4.0));
    }
}
