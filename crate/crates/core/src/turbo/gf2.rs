use std::fmt;

/// 3x3 matrix over GF(2), used with row-vector-times-matrix products.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Gf2Matrix(pub [[u8; 3]; 3]);

impl Gf2Matrix {
    pub const IDENTITY: Gf2Matrix = Gf2Matrix([[1, 0, 0], [0, 1, 0], [0, 0, 1]]);

    /// `v * M` over GF(2).
    pub fn left_mul(&self, v: [u8; 3]) -> [u8; 3] {
        let mut out = [0u8; 3];
        for (j, o) in out.iter_mut().enumerate() {
            *o = (0..3).fold(0, |acc, i| acc ^ (v[i] & self.0[i][j]));
        }
        out
    }

    pub fn mul(&self, rhs: &Gf2Matrix) -> Gf2Matrix {
        let mut out = [[0u8; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            *row = rhs.left_mul(self.0[i]);
        }
        Gf2Matrix(out)
    }

    pub fn add(&self, rhs: &Gf2Matrix) -> Gf2Matrix {
        let mut out = self.0;
        for (i, row) in out.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x ^= rhs.0[i][j];
            }
        }
        Gf2Matrix(out)
    }

    pub fn pow(&self, mut e: usize) -> Gf2Matrix {
        let mut base = *self;
        let mut acc = Gf2Matrix::IDENTITY;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Inverse by Gauss-Jordan elimination, `None` when singular.
    pub fn inverse(&self) -> Option<Gf2Matrix> {
        let mut a = self.0;
        let mut inv = Gf2Matrix::IDENTITY.0;
        for col in 0..3 {
            let pivot = (col..3).find(|&r| a[r][col] == 1)?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            for r in 0..3 {
                if r != col && a[r][col] == 1 {
                    for c in 0..3 {
                        a[r][c] ^= a[col][c];
                        inv[r][c] ^= inv[col][c];
                    }
                }
            }
        }
        Some(Gf2Matrix(inv))
    }
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        for bits in 0u16..512 {
            let mut m = [[0u8; 3]; 3];
            for k in 0..9 {
                m[k / 3][k % 3] = ((bits >> k) & 1) as u8;
            }
            let m = Gf2Matrix(m);
            if let Some(inv) = m.inverse() {
                assert_eq!(m.mul(&inv), Gf2Matrix::IDENTITY);
                assert_eq!(inv.mul(&m), Gf2Matrix::IDENTITY);
            }
        }
    }

    #[test]
    fn pow_matches_repeated_mul() {
        let t = Gf2Matrix([[0, 1, 0], [0, 0, 1], [1, 0, 1]]);
        let mut acc = Gf2Matrix::IDENTITY;
        for e in 0..20 {
            assert_eq!(t.pow(e), acc);
            acc = acc.mul(&t);
        }
        assert_eq!(t.pow(7), Gf2Matrix::IDENTITY);
    }
}
