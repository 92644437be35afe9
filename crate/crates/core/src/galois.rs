//! Arithmetic over GF(2^m), m <= 8.
//!
//! Elements are integers `0..q` in the polynomial basis. Multiplication goes
//! through log/antilog tables; a full `q x q` product table is also kept
//! because the decoder permutes whole probability rows by a fixed multiplier.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An element of a binary extension field, stored as its integer value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[repr(transparent)]
pub struct GfSymbol(pub u8);

impl GfSymbol {
    pub const ZERO: GfSymbol = GfSymbol(0);
    pub const ONE: GfSymbol = GfSymbol(1);

    #[inline]
    pub fn value(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::LowerHex for GfSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::LowerHex::fmt(&self.0, f)
    }
}

/// Conventional primitive polynomial for each supported order.
pub fn default_primitive_poly(order: usize) -> Option<u32> {
    Some(match order {
        2 => 0x3,
        4 => 0x7,
        8 => 0xb,
        16 => 0x13,
        32 => 0x25,
        64 => 0x43,
        128 => 0x89,
        256 => 0x11d,
        _ => return None,
    })
}

/// Immutable arithmetic context for GF(q), q = 2^m.
#[derive(Clone, PartialEq, Eq)]
pub struct GaloisField {
    order: usize,
    bits: u32,
    poly: u32,
    /// `exp[i] = alpha^i`, doubled in length so `exp[log a + log b]` needs no reduction.
    exp: Vec<u8>,
    /// `log[a]` for `a != 0`; `log[0]` is unused.
    log: Vec<u16>,
    mul: Vec<u8>,
}

impl fmt::Debug for GaloisField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GaloisField")
            .field("order", &self.order)
            .field("poly", &format_args!("{:#x}", self.poly))
            .finish()
    }
}

impl GaloisField {
    /// GF(q) with the default primitive polynomial (0x11D for q = 256).
    pub fn new(order: usize) -> Result<Self> {
        let poly = default_primitive_poly(order).ok_or(Error::UnsupportedField(order))?;
        Self::with_poly(order, poly)
    }

    pub fn with_poly(order: usize, poly: u32) -> Result<Self> {
        if !(2..=256).contains(&order) || !order.is_power_of_two() {
            return Err(Error::UnsupportedField(order));
        }
        let bits = order.trailing_zeros();
        if poly >> bits != 1 {
            return Err(Error::NotPrimitive { order, poly });
        }

        let n = order - 1;
        let mut exp = vec![0u8; 2 * order];
        let mut log = vec![0u16; order];
        let mut x: u32 = 1;
        for i in 0..n {
            if i > 0 && x == 1 {
                // alpha has order < q-1
                return Err(Error::NotPrimitive { order, poly });
            }
            exp[i] = x as u8;
            log[x as usize] = i as u16;
            x <<= 1;
            if x & order as u32 != 0 {
                x ^= poly;
            }
        }
        if x != 1 {
            return Err(Error::NotPrimitive { order, poly });
        }
        for i in n..exp.len() {
            exp[i] = exp[i - n];
        }

        let mut mul = vec![0u8; order * order];
        for a in 1..order {
            for b in 1..order {
                mul[a * order + b] = exp[log[a] as usize + log[b] as usize];
            }
        }

        Ok(GaloisField {
            order,
            bits,
            poly,
            exp,
            log,
            mul,
        })
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    /// Bits per symbol, log2 q.
    #[inline]
    pub fn bits(&self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn poly(&self) -> u32 {
        self.poly
    }

    /// Checked construction of an element.
    pub fn symbol(&self, value: u32) -> Result<GfSymbol> {
        if (value as usize) < self.order {
            Ok(GfSymbol(value as u8))
        } else {
            Err(Error::SymbolOutOfRange {
                value,
                order: self.order,
            })
        }
    }

    #[inline]
    pub fn add(&self, a: GfSymbol, b: GfSymbol) -> GfSymbol {
        GfSymbol(a.0 ^ b.0)
    }

    #[inline]
    pub fn mul(&self, a: GfSymbol, b: GfSymbol) -> GfSymbol {
        GfSymbol(self.mul[a.value() * self.order + b.value()])
    }

    pub fn inv(&self, a: GfSymbol) -> Result<GfSymbol> {
        if a.is_zero() {
            return Err(Error::ZeroInverse);
        }
        let n = self.order - 1;
        Ok(GfSymbol(self.exp[(n - self.log[a.value()] as usize) % n]))
    }

    pub fn div(&self, a: GfSymbol, b: GfSymbol) -> Result<GfSymbol> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// alpha^i for the primitive element alpha.
    #[inline]
    pub fn exp(&self, i: usize) -> GfSymbol {
        GfSymbol(self.exp[i % (self.order - 1)])
    }

    /// Discrete logarithm of a nonzero element.
    pub fn log(&self, a: GfSymbol) -> Result<usize> {
        if a.is_zero() {
            return Err(Error::invalid("log of zero"));
        }
        Ok(self.log[a.value()] as usize)
    }

    /// Row of the product table: `row[x] = z * x`.
    #[inline]
    pub fn mul_row(&self, z: GfSymbol) -> &[u8] {
        let start = z.value() * self.order;
        &self.mul[start..start + self.order]
    }

    pub fn elements(&self) -> impl Iterator<Item = GfSymbol> + '_ {
        (0..self.order).map(|v| GfSymbol(v as u8))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Carry-less multiply followed by reduction modulo `poly`.
    fn poly_mul(a: u32, b: u32, poly: u32, bits: u32) -> u32 {
        let mut acc = 0u32;
        for i in 0..bits {
            if b >> i & 1 == 1 {
                acc ^= a << i;
            }
        }
        for i in (bits..2 * bits).rev() {
            if acc >> i & 1 == 1 {
                acc ^= poly << (i - bits);
            }
        }
        acc
    }

    #[test]
    fn add_examples() {
        let f = GaloisField::new(256).unwrap();
        assert_eq!(f.add(GfSymbol(0x57), GfSymbol(0x57)), GfSymbol(0));
        assert_eq!(f.add(GfSymbol(0x00), GfSymbol(0x3a)), GfSymbol(0x3a));
        assert_eq!(f.add(GfSymbol(0x57), GfSymbol(0x83)), GfSymbol(0x57 ^ 0x83));
        assert_eq!(0x57 ^ 0x83, 0xd4);
    }

    #[test]
    fn mul_examples() {
        let f = GaloisField::new(256).unwrap();
        for x in f.elements() {
            assert_eq!(f.mul(GfSymbol::ONE, x), x);
            assert_eq!(f.mul(GfSymbol::ZERO, x), GfSymbol::ZERO);
        }
        assert_eq!(poly_mul(0x02, 0x80, 0x11d, 8), 0x1d);
        assert_eq!(f.mul(GfSymbol(0x02), GfSymbol(0x80)), GfSymbol(0x1d));
    }

    #[test]
    fn mul_matches_polynomial_oracle_everywhere() {
        for order in [2usize, 4, 8, 16, 32, 64, 128, 256] {
            let f = GaloisField::new(order).unwrap();
            for a in 0..order as u32 {
                for b in 0..order as u32 {
                    let want = poly_mul(a, b, f.poly(), f.bits());
                    assert_eq!(f.mul(GfSymbol(a as u8), GfSymbol(b as u8)).0 as u32, want);
                }
            }
        }
    }

    #[test]
    fn inverse_gf16_matches_brute_force() {
        let f = GaloisField::new(16).unwrap();
        assert_eq!(f.poly(), 0x13);
        for a in 1..16u32 {
            let brute = (1..16u32)
                .find(|&b| poly_mul(a, b, 0x13, 4) == 1)
                .unwrap();
            assert_eq!(f.inv(GfSymbol(a as u8)).unwrap(), GfSymbol(brute as u8));
        }
        assert_eq!(f.inv(GfSymbol::ONE).unwrap(), GfSymbol::ONE);
        assert!(matches!(f.inv(GfSymbol::ZERO), Err(Error::ZeroInverse)));
    }

    #[test]
    fn random_inverses_gf256() {
        let f = GaloisField::new(256).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let a = GfSymbol(rng.random_range(1..=255u8));
            assert_eq!(f.mul(a, f.inv(a).unwrap()), GfSymbol::ONE);
        }
    }

    #[test]
    fn table_invariants() {
        for order in [2usize, 4, 16, 256] {
            let f = GaloisField::new(order).unwrap();
            let n = order - 1;
            for a in 1..order {
                let a = GfSymbol(a as u8);
                assert_eq!(f.exp(f.log(a).unwrap()), a);
            }
            for i in 0..3 * n {
                assert_eq!(f.exp(i), f.exp(i + n));
            }
            for a in 1..order {
                for b in 1..order {
                    let (a, b) = (GfSymbol(a as u8), GfSymbol(b as u8));
                    let want = f.exp((f.log(a).unwrap() + f.log(b).unwrap()) % n);
                    assert_eq!(f.mul(a, b), want);
                }
            }
        }
    }

    #[test]
    fn multiplication_by_nonzero_is_a_bijection() {
        let f = GaloisField::new(256).unwrap();
        for z in 1..256 {
            let mut seen = [false; 256];
            for &v in f.mul_row(GfSymbol(z as u8)) {
                assert!(!seen[v as usize]);
                seen[v as usize] = true;
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(GaloisField::new(12), Err(Error::UnsupportedField(12))));
        assert!(matches!(GaloisField::new(512), Err(Error::UnsupportedField(512))));
        // x^4 + x^3 + x^2 + x + 1 is irreducible but not primitive
        assert!(matches!(
            GaloisField::with_poly(16, 0x1f),
            Err(Error::NotPrimitive { .. })
        ));
        let f = GaloisField::new(16).unwrap();
        assert!(f.symbol(16).is_err());
        assert_eq!(f.symbol(15).unwrap(), GfSymbol(15));
    }
}
