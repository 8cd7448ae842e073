//! Dense matrices over an imaginary quadratic field K.
//!
//! Rows act on the left: a form value is x A x* for a row vector x. All
//! arithmetic is exact; inverses use Gaussian elimination over K.

use crate::linalg::Q;
use crate::qfield::{KElem, QuadField};

/// A matrix with entries in K, stored as rows.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct KMat {
    pub rows: Vec<Vec<KElem>>,
}

impl KMat {
    /// Builds a matrix from rows; all rows must have equal length.
    pub fn new(rows: Vec<Vec<KElem>>) -> Self {
        if let Some(first) = rows.first() {
            let w = first.len();
            assert!(rows.iter().all(|r| r.len() == w), "ragged rows");
        }
        KMat { rows }
    }

    /// The n-by-n identity matrix.
    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { KElem::one() } else { KElem::zero() })
                    .collect()
            })
            .collect();
        KMat { rows }
    }

    /// The n-by-m zero matrix.
    pub fn zero(n: usize, m: usize) -> Self {
        KMat {
            rows: vec![vec![KElem::zero(); m]; n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    pub fn entry(&self, i: usize, j: usize) -> &KElem {
        &self.rows[i][j]
    }

    pub fn add(&self, other: &KMat) -> KMat {
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.add(y)).collect())
            .collect();
        KMat { rows }
    }

    pub fn sub(&self, other: &KMat) -> KMat {
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.sub(y)).collect())
            .collect();
        KMat { rows }
    }

    pub fn neg(&self) -> KMat {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|x| x.neg()).collect())
            .collect();
        KMat { rows }
    }

    /// Multiplies every entry by a rational scalar.
    pub fn scale(&self, t: &Q) -> KMat {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|x| x.scale(t)).collect())
            .collect();
        KMat { rows }
    }

    /// Multiplies every entry by a field element on the left.
    pub fn scale_k(&self, k: &QuadField, t: &KElem) -> KMat {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|x| k.mul(t, x)).collect())
            .collect();
        KMat { rows }
    }

    pub fn mul(&self, k: &QuadField, other: &KMat) -> KMat {
        let (n, mid, m) = (self.nrows(), self.ncols(), other.ncols());
        assert_eq!(mid, other.nrows(), "dimension mismatch");
        let mut rows = vec![vec![KElem::zero(); m]; n];
        for i in 0..n {
            for (l, a) in self.rows[i].iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for j in 0..m {
                    let p = k.mul(a, &other.rows[l][j]);
                    rows[i][j] = rows[i][j].add(&p);
                }
            }
        }
        KMat { rows }
    }

    /// Row vector times matrix: x M.
    pub fn row_apply(&self, k: &QuadField, x: &[KElem]) -> Vec<KElem> {
        assert_eq!(x.len(), self.nrows());
        let m = self.ncols();
        let mut out = vec![KElem::zero(); m];
        for (l, a) in x.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for j in 0..m {
                out[j] = out[j].add(&k.mul(a, &self.rows[l][j]));
            }
        }
        out
    }

    /// Conjugate transpose M*.
    pub fn conj_transpose(&self, k: &QuadField) -> KMat {
        let (n, m) = (self.nrows(), self.ncols());
        let rows = (0..m)
            .map(|j| (0..n).map(|i| k.conj(&self.rows[i][j])).collect())
            .collect();
        KMat { rows }
    }

    pub fn is_hermitian(&self, k: &QuadField) -> bool {
        self.nrows() == self.ncols() && *self == self.conj_transpose(k)
    }

    /// Determinant by fraction-free-style Gaussian elimination over K.
    pub fn det(&self, k: &QuadField) -> KElem {
        let n = self.nrows();
        assert_eq!(n, self.ncols(), "det of non-square matrix");
        let mut a = self.rows.clone();
        let mut det = KElem::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
                return KElem::zero();
            };
            if p != col {
                a.swap(p, col);
                det = det.neg();
            }
            let piv = a[col][col].clone();
            det = k.mul(&det, &piv);
            let inv = k.inv(&piv).expect("pivot is nonzero");
            for r in col + 1..n {
                if a[r][col].is_zero() {
                    continue;
                }
                let f = k.mul(&a[r][col], &inv);
                for c in col..n {
                    let s = k.mul(&f, &a[col][c]);
                    a[r][c] = a[r][c].sub(&s);
                }
            }
        }
        det
    }

    /// Inverse over K, or None when singular.
    pub fn inverse(&self, k: &QuadField) -> Option<KMat> {
        let n = self.nrows();
        assert_eq!(n, self.ncols(), "inverse of non-square matrix");
        let mut a = self.rows.clone();
        let mut inv = KMat::identity(n).rows;
        for col in 0..n {
            let p = (col..n).find(|&r| !a[r][col].is_zero())?;
            a.swap(p, col);
            inv.swap(p, col);
            let pi = k.inv(&a[col][col]).expect("pivot is nonzero");
            for c in 0..n {
                a[col][c] = k.mul(&a[col][c], &pi);
                inv[col][c] = k.mul(&inv[col][c], &pi);
            }
            for r in 0..n {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col].clone();
                for c in 0..n {
                    let s = k.mul(&f, &a[col][c]);
                    a[r][c] = a[r][c].sub(&s);
                    let s = k.mul(&f, &inv[col][c]);
                    inv[r][c] = inv[r][c].sub(&s);
                }
            }
        }
        Some(KMat { rows: inv })
    }

    /// Rank-one form x* x: entry (i, j) is conj(x_i) x_j, so that
    /// Trace((x* x) A) = x A x* for Hermitian A.
    pub fn rank_one(k: &QuadField, x: &[KElem]) -> KMat {
        let n = x.len();
        let rows = (0..n)
            .map(|i| {
                let ci = k.conj(&x[i]);
                (0..n).map(|j| k.mul(&ci, &x[j])).collect()
            })
            .collect();
        KMat { rows }
    }

    /// Matrix trace; the rational part of the sum of diagonal entries.
    pub fn trace(&self) -> KElem {
        let mut t = KElem::zero();
        for i in 0..self.nrows() {
            t = t.add(&self.rows[i][i]);
        }
        t
    }

    /// Renders the matrix as rows of field elements.
    pub fn fmt_mat(&self, k: &QuadField) -> String {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(|x| k.fmt_elem(x)).collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        format!("[{}]", rows.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{qi, qr};

    fn k15() -> QuadField {
        QuadField::new(15).unwrap()
    }

    fn e(a: Q, b: Q) -> KElem {
        KElem::new(a, b)
    }

    #[test]
    fn mul_inverse_det() {
        let k = k15();
        let w = k.omega();
        let m = KMat::new(vec![
            vec![KElem::one(), w.clone()],
            vec![KElem::from_int(2), e(qi(1), qi(1))],
        ]);
        let d = m.det(&k);
        // det = 1*(1+w) - 2w = 1 - w
        assert_eq!(d, e(qi(1), qi(-1)));
        let mi = m.inverse(&k).unwrap();
        assert_eq!(m.mul(&k, &mi), KMat::identity(2));
        assert_eq!(mi.mul(&k, &m), KMat::identity(2));
        // det multiplicative
        let p = m.mul(&k, &m);
        assert_eq!(p.det(&k), k.mul(&d, &d));
    }

    #[test]
    fn singular_has_no_inverse() {
        let k = k15();
        let m = KMat::new(vec![
            vec![KElem::one(), KElem::from_int(2)],
            vec![KElem::from_int(3), KElem::from_int(6)],
        ]);
        assert!(m.det(&k).is_zero());
        assert!(m.inverse(&k).is_none());
    }

    #[test]
    fn rank_one_trace_pairing() {
        // Trace((x* x) A) = x A x* for a Hermitian A
        let k = k15();
        let w = k.omega();
        let a01 = e(qr(1, 2), qr(1, 5));
        let a = KMat::new(vec![
            vec![KElem::one(), a01.clone()],
            vec![k.conj(&a01), KElem::from_rat(qr(1, 2))],
        ]);
        assert!(a.is_hermitian(&k));
        let x = vec![e(qi(2), qi(-1)), w.clone()];
        let xa = a.row_apply(&k, &x);
        let mut val = KElem::zero();
        for (y, xi) in xa.iter().zip(&x) {
            val = val.add(&k.mul(y, &k.conj(xi)));
        }
        let r1 = KMat::rank_one(&k, &x);
        let tr = r1.mul(&k, &a).trace();
        assert_eq!(tr, val);
        assert!(val.is_rational());
    }

    #[test]
    fn conj_transpose_involution() {
        let k = k15();
        let w = k.omega();
        let m = KMat::new(vec![
            vec![KElem::one(), w.clone()],
            vec![w.neg(), e(qi(0), qi(2))],
        ]);
        assert_eq!(m.conj_transpose(&k).conj_transpose(&k), m);
    }
}
