//! Arithmetic in GF(2^m) for 1 ≤ m ≤ 24, elements stored in the low `m`
//! bits of a `u32` (polynomial basis).

/// Irreducible polynomials, low-weight, indexed by degree. Bit `i` is the
/// coefficient of `x^i`.
const MODULI: [u32; 25] = [
    0,
    0b11,
    0x7,
    0xB,
    0x13,
    0x25,
    0x43,
    0x83,
    0x11B,
    0x211,
    0x409,
    0x805,
    0x1009,
    0x201B,
    0x4021,
    0x8003,
    0x1002B,
    0x20009,
    0x40081,
    0x80027,
    0x100009,
    0x200005,
    0x400003,
    0x800021,
    0x100001B,
];

pub const MAX_DEGREE: u32 = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BinaryField {
    m: u32,
    modulus: u32,
}

impl BinaryField {
    pub fn new(m: u32) -> Option<Self> {
        (1..=MAX_DEGREE).contains(&m).then(|| BinaryField {
            m,
            modulus: MODULI[m as usize],
        })
    }

    /// Smallest field with at least `size` elements (and degree ≥ 1).
    pub fn with_at_least(size: u64) -> Option<Self> {
        let m = (64 - size.saturating_sub(1).leading_zeros()).max(1);
        Self::new(m)
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn order(&self) -> u64 {
        1u64 << self.m
    }

    pub fn mask(&self) -> u32 {
        ((1u64 << self.m) - 1) as u32
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        let mut a = a as u64;
        let mut b = b as u64;
        let mut acc = 0u64;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
        }
        let m = self.m;
        let modulus = self.modulus as u64;
        for bit in (m..2 * m).rev() {
            if acc >> bit & 1 == 1 {
                acc ^= modulus << (bit - m);
            }
        }
        acc as u32
    }

    /// Horner evaluation of `Σ coeffs[j]·x^j`.
    #[inline]
    pub fn eval_poly(&self, coeffs: &[u32], x: u32) -> u32 {
        coeffs.iter().rev().fold(0, |acc, &c| self.mul(acc, x) ^ c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Polynomial arithmetic over GF(2) for the irreducibility check.
    fn pmod(mut a: u64, b: u64) -> u64 {
        let db = 63 - b.leading_zeros();
        while a != 0 && 63 - a.leading_zeros() >= db {
            a ^= b << (63 - a.leading_zeros() - db);
        }
        a
    }

    fn pmulmod(a: u64, b: u64, m: u64) -> u64 {
        let (mut a, mut b, mut acc) = (a, b, 0u64);
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a = pmod(a << 1, m);
        }
        pmod(acc, m)
    }

    fn pgcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            pgcd(b, pmod(a, b))
        }
    }

    fn x_pow_2k(k: u32, m: u64) -> u64 {
        let mut x = 2u64;
        for _ in 0..k {
            x = pmulmod(x, x, m);
        }
        x
    }

    /// Rabin's test.
    fn irreducible(poly: u64) -> bool {
        let d = 63 - poly.leading_zeros();
        if x_pow_2k(d, poly) != pmod(2, poly) {
            return false;
        }
        (1..d).filter(|q| d.is_multiple_of(*q) && is_prime(d / q)).all(|q| {
            let h = x_pow_2k(q, poly) ^ 2;
            pgcd(poly, pmod(h, poly)) == 1
        })
    }

    fn is_prime(p: u32) -> bool {
        p >= 2 && (2..p).all(|d| !p.is_multiple_of(d))
    }

    #[test]
    fn moduli_are_irreducible() {
        for m in 1..=MAX_DEGREE {
            let poly = MODULI[m as usize] as u64;
            assert_eq!(63 - poly.leading_zeros(), m, "degree of modulus {m}");
            assert!(irreducible(poly), "modulus for m = {m} is reducible");
        }
    }

    #[test]
    fn every_nonzero_element_invertible_small_fields() {
        for m in 1..=8 {
            let f = BinaryField::new(m).unwrap();
            for a in 1..f.order() as u32 {
                assert!((1..f.order() as u32).any(|b| f.mul(a, b) == 1));
            }
        }
    }

    #[test]
    fn field_sizes() {
        assert_eq!(BinaryField::with_at_least(1).unwrap().degree(), 1);
        assert_eq!(BinaryField::with_at_least(2).unwrap().degree(), 1);
        assert_eq!(BinaryField::with_at_least(3).unwrap().degree(), 2);
        assert_eq!(BinaryField::with_at_least(16).unwrap().degree(), 4);
        assert_eq!(BinaryField::with_at_least(17).unwrap().degree(), 5);
        assert!(BinaryField::new(25).is_none());
    }

    #[test]
    fn poly_eval() {
        let f = BinaryField::new(4).unwrap();
        // 1 + x evaluated at x = 3 is 1 ^ 3 = 2
        assert_eq!(f.eval_poly(&[1, 1], 3), 2);
        assert_eq!(f.eval_poly(&[], 7), 0);
    }
}
