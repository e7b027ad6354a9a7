//! GF(2^m) arithmetic through log/antilog tables.

/// Primitive polynomials, one per supported degree. Bit `i` is the
/// coefficient of `x^i`. Frozen: changing one changes every codeword.
///
/// | m  | polynomial              |
/// |----|-------------------------|
/// | 3  | x^3 + x + 1             |
/// | 4  | x^4 + x + 1             |
/// | 5  | x^5 + x^2 + 1           |
/// | 6  | x^6 + x + 1             |
/// | 7  | x^7 + x^3 + 1           |
/// | 8  | x^8 + x^4 + x^3 + x^2 + 1 |
/// | 9  | x^9 + x^4 + 1           |
/// | 10 | x^10 + x^3 + 1          |
pub const PRIMITIVE_POLYS: [(u32, u32); 8] = [
    (3, 0b1011),
    (4, 0b1_0011),
    (5, 0b10_0101),
    (6, 0b100_0011),
    (7, 0b1000_1001),
    (8, 0b1_0001_1101),
    (9, 0b10_0001_0001),
    (10, 0b100_0000_1001),
];

pub fn primitive_poly(m: u32) -> Option<u32> {
    PRIMITIVE_POLYS.iter().find(|(deg, _)| *deg == m).map(|&(_, p)| p)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaloisField {
    m: u32,
    poly: u32,
    /// `exp[i] = α^i`, doubled so products of logs index without a modulo.
    exp: Vec<u16>,
    /// `log[x]` for nonzero `x`; `log[0]` is unused.
    log: Vec<u16>,
}

impl GaloisField {
    /// Panics if `m` has no entry in [`PRIMITIVE_POLYS`].
    pub fn new(m: u32) -> Self {
        let poly = primitive_poly(m).expect("unsupported field degree");
        let order = 1usize << m;
        let n = order - 1;
        let mut exp = vec![0u16; 2 * n];
        let mut log = vec![0u16; order];
        let mut x = 1u32;
        for (i, e) in exp.iter_mut().enumerate().take(n) {
            *e = x as u16;
            log[x as usize] = i as u16;
            x <<= 1;
            if x & (1 << m) != 0 {
                x ^= poly;
            }
        }
        for i in n..2 * n {
            exp[i] = exp[i - n];
        }
        GaloisField { m, poly, exp, log }
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn poly(&self) -> u32 {
        self.poly
    }

    /// Multiplicative group order, `2^m - 1`.
    pub fn order(&self) -> usize {
        (1usize << self.m) - 1
    }

    /// `α^e` for any (possibly negative) exponent.
    pub fn alpha_pow(&self, e: i64) -> u16 {
        let n = self.order() as i64;
        self.exp[e.rem_euclid(n) as usize]
    }

    pub fn log(&self, x: u16) -> Option<usize> {
        (x != 0).then(|| self.log[x as usize] as usize)
    }

    pub fn antilog(&self, i: usize) -> u16 {
        self.exp[i % self.order()]
    }

    pub fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
    }

    /// Panics on division by zero.
    pub fn div(&self, a: u16, b: u16) -> u16 {
        assert!(b != 0, "division by zero in GF(2^{})", self.m);
        if a == 0 {
            return 0;
        }
        let n = self.order();
        self.exp[self.log[a as usize] as usize + n - self.log[b as usize] as usize]
    }

    pub fn inv(&self, a: u16) -> u16 {
        self.div(1, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Carry-less multiply then reduce, as an oracle for the table path.
    fn slow_mul(a: u32, b: u32, m: u32, poly: u32) -> u32 {
        let mut acc = 0u32;
        for i in 0..m {
            if b >> i & 1 == 1 {
                acc ^= a << i;
            }
        }
        for bit in (m..2 * m).rev() {
            if acc >> bit & 1 == 1 {
                acc ^= poly << (bit - m);
            }
        }
        acc
    }

    #[test]
    fn tables_round_trip_and_alpha_is_primitive() {
        for (m, _) in PRIMITIVE_POLYS {
            let f = GaloisField::new(m);
            let n = f.order();
            for x in 1..=n as u16 {
                assert_eq!(f.antilog(f.log(x).unwrap()), x);
            }
            // α has order exactly n: α^n == 1 and no smaller power is 1.
            assert_eq!(f.alpha_pow(n as i64), 1);
            assert_eq!((1..n).filter(|&i| f.antilog(i) == 1).count(), 0);
        }
    }

    #[test]
    fn mul_div_match_oracle() {
        for m in [3, 4, 6, 8] {
            let f = GaloisField::new(m);
            let n = f.order() as u16;
            for a in 0..=n {
                for b in 0..=n {
                    let p = f.mul(a, b);
                    assert_eq!(p as u32, slow_mul(a as u32, b as u32, m, f.poly()));
                    if b != 0 {
                        assert_eq!(f.div(p, b), a);
                    }
                }
            }
        }
    }
}
