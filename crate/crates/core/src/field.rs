//! Table-driven arithmetic for the small Galois fields GF(4), GF(8), GF(9).
//!
//! Elements are encoded as integers whose base-`p` digits are the polynomial
//! coefficients (lowest degree first). Tables are filled once from the
//! modulus polynomial.

/// A finite field GF(p^m) with full addition and multiplication tables.
#[derive(Debug, Clone)]
pub struct GaloisField {
    p: usize,
    m: usize,
    q: usize,
    add: Vec<usize>,
    mul: Vec<usize>,
}

impl GaloisField {
    /// Field of order `q`, for `q` in {4, 8, 9}.
    pub fn new(q: usize) -> Option<Self> {
        // monic moduli, coefficients lowest degree first (leading 1 omitted)
        let (p, m, modulus): (usize, usize, &[usize]) = match q {
            4 => (2, 2, &[1, 1]),    // x^2 + x + 1
            8 => (2, 3, &[1, 1, 0]), // x^3 + x + 1
            9 => (3, 2, &[2, 1]),    // x^2 + x + 2
            _ => return None,
        };
        let digits = |mut x: usize| {
            let mut d = vec![0; m];
            for slot in d.iter_mut() {
                *slot = x % p;
                x /= p;
            }
            d
        };
        let encode = |d: &[usize]| d.iter().rev().fold(0, |acc, &c| acc * p + c);
        let mut add = vec![0; q * q];
        let mut mul = vec![0; q * q];
        for a in 0..q {
            let da = digits(a);
            for b in 0..q {
                let db = digits(b);
                let sum: Vec<usize> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[a * q + b] = encode(&sum);
                // schoolbook product then reduction by x^m = -modulus
                let mut prod = vec![0; 2 * m - 1];
                for (i, x) in da.iter().enumerate() {
                    for (j, y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                for k in (m..prod.len()).rev() {
                    let c = prod[k];
                    if c == 0 {
                        continue;
                    }
                    prod[k] = 0;
                    for (i, &r) in modulus.iter().enumerate() {
                        prod[k - m + i] = (prod[k - m + i] + (p - r) * c) % p;
                    }
                }
                mul[a * q + b] = encode(&prod[..m]);
            }
        }
        Some(Self { p, m, q, add, mul })
    }

    pub fn order(&self) -> usize {
        self.q
    }

    pub fn characteristic(&self) -> usize {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.q + b]
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.q + b]
    }

    pub fn pow(&self, a: usize, e: usize) -> usize {
        (0..e).fold(1, |acc, _| self.mul(acc, a))
    }

    /// Absolute trace `x + x^p + ... + x^(p^(m-1))`, an element of GF(p)
    /// (returned as its integer digit).
    pub fn trace(&self, x: usize) -> usize {
        let mut acc = 0;
        let mut term = x;
        for _ in 0..self.m {
            acc = self.add(acc, term);
            term = self.pow(term, self.p);
        }
        debug_assert!(acc < self.p, "trace must land in the prime field");
        acc
    }

    /// The element whose digit vector is the `k`-th unit vector, i.e. `x^k`
    /// for the polynomial basis.
    pub fn basis_element(&self, k: usize) -> usize {
        self.p.pow(k as u32)
    }

    /// Digit vector (coordinates in the polynomial basis).
    pub fn coordinates(&self, mut x: usize) -> Vec<usize> {
        let mut d = vec![0; self.m];
        for slot in d.iter_mut() {
            *slot = x % self.p;
            x /= self.p;
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_axioms_hold() {
        for q in [4, 8, 9] {
            let f = GaloisField::new(q).unwrap();
            for a in 0..q {
                assert_eq!(f.add(a, 0), a);
                assert_eq!(f.mul(a, 1), a);
                assert_eq!(f.mul(a, 0), 0);
                if a != 0 {
                    // every nonzero element has an inverse
                    assert_eq!((1..q).filter(|&b| f.mul(a, b) == 1).count(), 1, "q={q} a={a}");
                }
                for b in 0..q {
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in 0..q {
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                        assert_eq!(f.mul(a, f.mul(b, c)), f.mul(f.mul(a, b), c));
                    }
                }
            }
        }
    }

    #[test]
    fn trace_is_balanced_and_linear() {
        for q in [4, 8, 9] {
            let f = GaloisField::new(q).unwrap();
            let p = f.characteristic();
            let mut counts = vec![0; p];
            for x in 0..q {
                counts[f.trace(x)] += 1;
            }
            assert!(counts.iter().all(|&c| c == q / p), "q={q} {counts:?}");
            for a in 0..q {
                for b in 0..q {
                    assert_eq!(f.trace(f.add(a, b)), (f.trace(a) + f.trace(b)) % p);
                }
            }
        }
    }

    #[test]
    fn unsupported_orders() {
        assert!(GaloisField::new(6).is_none());
        assert!(GaloisField::new(16).is_none());
    }
}
