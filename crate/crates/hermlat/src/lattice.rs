//! O_K-lattices given by a pseudo-basis: L = c_1 e_1 + ... + c_n e_n with
//! fractional coefficient ideals c_i and a K-basis (e_i) of K^n.
//!
//! The Z-basis used everywhere pairs the two HNF generators of each c_i:
//! (g1_1 e_1, g2_1 e_1, ..., g1_n e_n, g2_n e_n). For c_i = O_K the pair is
//! (e_i, omega e_i).

use crate::ideals::{ClassGroup, FracIdeal, IdealError};
use crate::kmat::KMat;
use crate::linalg::Q;
use crate::qfield::{KElem, QuadField};
use num::bigint::BigInt;
use num::{Integer, One, Signed, Zero};
use std::sync::Arc;

/// Errors from lattice construction and coefficient-ideal queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LatticeError {
    /// The direction matrix is singular over K.
    SingularDirections,
    /// A coefficient-ideal operation failed.
    Ideal(IdealError),
    /// The zero vector has no coefficient ideal.
    ZeroVector,
}

impl std::fmt::Display for LatticeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LatticeError::SingularDirections => write!(f, "direction basis is singular"),
            LatticeError::Ideal(e) => write!(f, "ideal error: {e}"),
            LatticeError::ZeroVector => write!(f, "zero vector has no coefficient ideal"),
        }
    }
}

impl std::error::Error for LatticeError {}

/// An O_K-lattice of rank n inside K^n.
#[derive(Debug, Clone)]
pub struct OKLattice {
    cg: Arc<ClassGroup>,
    coeff_ideals: Vec<FracIdeal>,
    direction: KMat,
    direction_inv: KMat,
    z_basis: Vec<Vec<KElem>>,
    steinitz: usize,
}

impl OKLattice {
    /// The standard lattice O_K^(n-1) + a e_n where a is the class-group
    /// representative ideal with the given index.
    pub fn standard(cg: Arc<ClassGroup>, n: usize, class_index: usize) -> OKLattice {
        assert!(n >= 1, "rank must be positive");
        let mut coeff = vec![FracIdeal::one(); n - 1];
        coeff.push(cg.rep(class_index).clone());
        OKLattice::from_pseudo_basis(cg, coeff, KMat::identity(n))
            .expect("standard pseudo-basis is valid")
    }

    /// Builds a lattice from coefficient ideals and a direction basis whose
    /// rows are the e_i.
    pub fn from_pseudo_basis(
        cg: Arc<ClassGroup>,
        coeff_ideals: Vec<FracIdeal>,
        direction: KMat,
    ) -> Result<OKLattice, LatticeError> {
        let n = coeff_ideals.len();
        assert_eq!(direction.nrows(), n, "one ideal per direction");
        assert_eq!(direction.ncols(), n, "directions must span K^n");
        let k = cg.field();
        let direction_inv = direction
            .inverse(k)
            .ok_or(LatticeError::SingularDirections)?;
        let mut z_basis = Vec::with_capacity(2 * n);
        for (i, c) in coeff_ideals.iter().enumerate() {
            let [g1, g2] = c.basis();
            for g in [g1, g2] {
                let row: Vec<KElem> = direction.rows[i].iter().map(|e| k.mul(&g, e)).collect();
                z_basis.push(row);
            }
        }
        let mut prod = FracIdeal::one();
        for c in &coeff_ideals {
            prod = prod.mul(k, c);
        }
        let steinitz = cg.class_of(&prod).0;
        Ok(OKLattice {
            cg,
            coeff_ideals,
            direction,
            direction_inv,
            z_basis,
            steinitz,
        })
    }

    pub fn n(&self) -> usize {
        self.coeff_ideals.len()
    }

    pub fn field(&self) -> &QuadField {
        self.cg.field()
    }

    pub fn class_group(&self) -> &Arc<ClassGroup> {
        &self.cg
    }

    pub fn coeff_ideals(&self) -> &[FracIdeal] {
        &self.coeff_ideals
    }

    pub fn direction(&self) -> &KMat {
        &self.direction
    }

    pub fn direction_inv(&self) -> &KMat {
        &self.direction_inv
    }

    /// The 2n-row Z-basis of L.
    pub fn z_basis(&self) -> &[Vec<KElem>] {
        &self.z_basis
    }

    /// Index of the Steinitz class [c_1 ... c_n] in the class group.
    pub fn steinitz_class(&self) -> usize {
        self.steinitz
    }

    /// Coordinates of x in the pseudo-basis: x = sum y_i e_i.
    pub fn pseudo_coords(&self, x: &[KElem]) -> Vec<KElem> {
        self.direction_inv.row_apply(self.field(), x)
    }

    /// Rational coordinates of x over the Z-basis; all integers iff x lies
    /// in L.
    pub fn z_coords(&self, x: &[KElem]) -> Vec<Q> {
        let y = self.pseudo_coords(x);
        let mut out = Vec::with_capacity(2 * self.n());
        for (yi, c) in y.iter().zip(&self.coeff_ideals) {
            let rows = c.hnf_rows();
            // g1 = (p, 0), g2 = (q, r); solve yi = alpha g1 + beta g2
            let (p, q, r) = (&rows[0][0], &rows[1][0], &rows[1][1]);
            let beta = &yi.b / r;
            let alpha = (&yi.a - &beta * q) / p;
            out.push(alpha);
            out.push(beta);
        }
        out
    }

    /// Membership test via integrality of the Z-coordinates.
    pub fn contains(&self, x: &[KElem]) -> bool {
        self.z_coords(x).iter().all(|c| c.is_integer())
    }

    /// The lattice vector with the given integer Z-coordinates.
    pub fn from_z_coords(&self, v: &[BigInt]) -> Vec<KElem> {
        let k = self.field();
        let mut out = vec![KElem::zero(); self.n()];
        for (vi, b) in v.iter().zip(&self.z_basis) {
            if vi.is_zero() {
                continue;
            }
            let c = Q::from_integer(vi.clone());
            for (o, bj) in out.iter_mut().zip(b) {
                *o = o.add(&k.mul(&KElem::from_rat(c.clone()), bj));
            }
        }
        out
    }

    /// Coefficient ideal a_x = sum y_i c_i^(-1) of a nonzero x in K^n, where
    /// the y_i are the pseudo-basis coordinates of x.
    pub fn coeff_ideal_of(&self, x: &[KElem]) -> Result<FracIdeal, LatticeError> {
        let k = self.field();
        let y = self.pseudo_coords(x);
        let mut acc: Option<FracIdeal> = None;
        for (yi, c) in y.iter().zip(&self.coeff_ideals) {
            if yi.is_zero() {
                continue;
            }
            let term = c
                .inv(k)
                .mul_elem(k, yi)
                .map_err(LatticeError::Ideal)?;
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term),
            });
        }
        acc.ok_or(LatticeError::ZeroVector)
    }

    /// N(a_x) for nonzero x; the denominator in the normalized length
    /// A[x] / N(a_x).
    pub fn norm_coeff(&self, x: &[KElem]) -> Result<Q, LatticeError> {
        Ok(self.coeff_ideal_of(x)?.norm())
    }

    /// The scaled lattice pL with every coefficient ideal multiplied by p.
    pub fn scale_by_ideal(&self, p: &FracIdeal) -> OKLattice {
        let k = self.field();
        let coeff = self.coeff_ideals.iter().map(|c| c.mul(k, p)).collect();
        OKLattice::from_pseudo_basis(self.cg.clone(), coeff, self.direction.clone())
            .expect("scaling preserves the pseudo-basis")
    }

    /// Trace form T and its twist T': T_ij = Tr(b_i A b_j*) / 2 and
    /// T'_ij = Tr(b_i (omega A) b_j*) / 2 over the Z-basis. T is symmetric
    /// and v T v^t = A[x] for x with Z-coordinates v.
    pub fn trace_form_pair(&self, a: &KMat) -> (Vec<Vec<Q>>, Vec<Vec<Q>>) {
        let k = self.field();
        let m = 2 * self.n();
        let w = k.omega();
        let half = Q::new(BigInt::one(), BigInt::from(2));
        let mut t = vec![vec![Q::zero(); m]; m];
        let mut tw = vec![vec![Q::zero(); m]; m];
        for i in 0..m {
            let bia = a.row_apply(k, &self.z_basis[i]);
            for j in 0..m {
                let mut s = KElem::zero();
                for (u, v) in bia.iter().zip(&self.z_basis[j]) {
                    s = s.add(&k.mul(u, &k.conj(v)));
                }
                t[i][j] = k.trace(&s) * &half;
                tw[i][j] = k.trace(&k.mul(&w, &s)) * &half;
            }
        }
        debug_assert!((0..m).all(|i| (0..m).all(|j| t[i][j] == t[j][i])));
        (t, tw)
    }

    /// The symmetric trace form alone.
    pub fn trace_form(&self, a: &KMat) -> Vec<Vec<Q>> {
        self.trace_form_pair(a).0
    }

    /// Matrix of multiplication by x on the Z-basis: row j holds the
    /// Z-coordinates of x b_j. Entries are integers when x L = L.
    pub fn mult_matrix(&self, x: &KElem) -> Vec<Vec<Q>> {
        let k = self.field();
        self.z_basis
            .iter()
            .map(|b| {
                let xb: Vec<KElem> = b.iter().map(|c| k.mul(x, c)).collect();
                self.z_coords(&xb)
            })
            .collect()
    }

    /// Per-pair multiplier matrices M_i for mu_i = g2_i / g1_i; row 2i+1 of
    /// any O_K-linear map is row 2i times M_i.
    pub fn pair_mult_matrices(&self) -> Vec<Vec<Vec<Q>>> {
        let k = self.field();
        self.coeff_ideals
            .iter()
            .map(|c| {
                let [g1, g2] = c.basis();
                let mu = k.div(&g2, &g1).expect("ideal basis is nonzero");
                self.mult_matrix(&mu)
            })
            .collect()
    }

    /// Tests U in GL(L): every Z-basis vector maps into L and N(det U) = 1.
    pub fn is_gl_element(&self, u: &KMat) -> bool {
        let k = self.field();
        if u.nrows() != self.n() || u.ncols() != self.n() {
            return false;
        }
        if k.norm(&u.det(k)) != Q::one() {
            return false;
        }
        self.z_basis.iter().all(|b| self.contains(&u.row_apply(k, b)))
    }

    /// Short description such as "O_K^2 + <2, w> e_3".
    pub fn describe(&self) -> String {
        let k = self.field();
        let free = self
            .coeff_ideals
            .iter()
            .take_while(|c| **c == FracIdeal::one())
            .count();
        let mut parts = Vec::new();
        if free > 0 {
            parts.push(format!("O_K^{free}"));
        }
        for (i, c) in self.coeff_ideals.iter().enumerate().skip(free) {
            parts.push(format!("{} e_{}", c.fmt_ideal(k), i + 1));
        }
        parts.join(" + ")
    }
}

/// An integral symmetric Gram matrix: mat = scale * T for the smallest
/// positive integer scale clearing all denominators of T.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntGram {
    pub mat: Vec<Vec<BigInt>>,
    pub scale: BigInt,
}

impl IntGram {
    pub fn from_rational(t: &[Vec<Q>]) -> IntGram {
        let mut scale = BigInt::one();
        for row in t {
            for x in row {
                scale = scale.lcm(&x.denom().abs());
            }
        }
        let mat = t
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| {
                        let s = x * Q::from_integer(scale.clone());
                        debug_assert!(s.is_integer());
                        s.to_integer()
                    })
                    .collect()
            })
            .collect();
        IntGram { mat, scale }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{qi, qr};

    fn lat_d15_nonfree() -> OKLattice {
        let cg = Arc::new(ClassGroup::from_d(15).unwrap());
        OKLattice::standard(cg, 2, 1)
    }

    fn ke(a: i64, b: i64) -> KElem {
        KElem::new(qi(a), qi(b))
    }

    #[test]
    fn z_basis_of_standard_lattice() {
        let l = lat_d15_nonfree();
        let k = l.field();
        let w = k.omega();
        // c_2 = <2, omega>: HNF basis (2, omega)
        assert_eq!(l.z_basis()[0], vec![KElem::one(), KElem::zero()]);
        assert_eq!(l.z_basis()[1], vec![w.clone(), KElem::zero()]);
        assert_eq!(l.z_basis()[2], vec![KElem::zero(), KElem::from_int(2)]);
        assert_eq!(l.z_basis()[3], vec![KElem::zero(), w]);
        assert_eq!(l.steinitz_class(), 1);
    }

    #[test]
    fn membership_and_coords() {
        let l = lat_d15_nonfree();
        let k = l.field().clone();
        let w = k.omega();
        assert!(l.contains(&[KElem::one(), KElem::zero()]));
        assert!(l.contains(&[KElem::zero(), w.clone()]));
        assert!(l.contains(&[w.clone(), KElem::from_int(2)]));
        // e_2 itself is not in O_K + <2, omega> e_2
        assert!(!l.contains(&[KElem::zero(), KElem::one()]));
        let x = vec![w.clone(), k.mul(&w, &KElem::from_int(3))];
        let v = l.z_coords(&x);
        assert!(v.iter().all(|c| c.is_integer()));
        let ints: Vec<BigInt> = v.iter().map(|c| c.to_integer()).collect();
        assert_eq!(l.from_z_coords(&ints), x);
    }

    #[test]
    fn coefficient_ideals_of_vectors() {
        let l = lat_d15_nonfree();
        let k = l.field().clone();
        let w = k.omega();
        // x = e_1: a_x = O_K
        let a = l.coeff_ideal_of(&[KElem::one(), KElem::zero()]).unwrap();
        assert_eq!(a, FracIdeal::one());
        // x = omega e_2: a_x = omega c_2^(-1), norm 2
        let a = l.coeff_ideal_of(&[KElem::zero(), w]).unwrap();
        assert_eq!(a.norm(), qi(2));
        assert!(l.coeff_ideal_of(&[KElem::zero(), KElem::zero()]).is_err());
    }

    #[test]
    fn steinitz_scaling_rule() {
        // st(pL) = [p]^n st(L)
        let cg = Arc::new(ClassGroup::from_d(15).unwrap());
        let l = OKLattice::standard(cg.clone(), 2, 1);
        let p = cg.rep(1).clone();
        let lp = l.scale_by_ideal(&p);
        let twice = cg.mul_classes(cg.class_of(&p).0, cg.class_of(&p).0);
        let expect = cg.mul_classes(twice, l.steinitz_class());
        assert_eq!(lp.steinitz_class(), expect);
        // d = 15 has h = 2, so [p]^2 = 1 and the class is unchanged
        assert_eq!(lp.steinitz_class(), 1);
    }

    #[test]
    fn trace_form_matches_evaluation() {
        let l = lat_d15_nonfree();
        let k = l.field().clone();
        let a = KMat::identity(2);
        let (t, tw) = l.trace_form_pair(&a);
        // T[2][2] = |2 e_2|^2 = 4, T[3][3] = N(omega) = 4
        assert_eq!(t[2][2], qi(4));
        assert_eq!(t[3][3], qi(4));
        // v T v^t = A[x] for a mixed vector
        let v = [qi(1), qi(-2), qi(0), qi(3)];
        let x = l.from_z_coords(&v.iter().map(|c| c.to_integer()).collect::<Vec<_>>());
        let mut val = Q::zero();
        for i in 0..4 {
            for j in 0..4 {
                val += &v[i] * &t[i][j] * &v[j];
            }
        }
        let xa = a.row_apply(&k, &x);
        let mut direct = KElem::zero();
        for (y, xi) in xa.iter().zip(&x) {
            direct = direct.add(&k.mul(y, &k.conj(xi)));
        }
        assert!(direct.is_rational());
        assert_eq!(val, direct.a);
        // the twist is integral up to the same denominators but asymmetric
        assert_ne!(tw[0][1], tw[1][0]);
    }

    #[test]
    fn mult_matrices_are_integral() {
        let l = lat_d15_nonfree();
        let k = l.field().clone();
        // omega L = L, so M_omega is integral
        let mw = l.mult_matrix(&k.omega());
        assert!(mw.iter().flatten().all(|c| c.is_integer()));
        // row 1 = row 0 * M_omega as vectors in L
        let b0 = l.z_coords(&l.z_basis()[0]);
        let prod = crate::linalg::row_mat(&b0, &mw);
        assert_eq!(prod, l.z_coords(&l.z_basis()[1]));
        // pair multipliers satisfy z(mu x) = z(x) M_mu; mu_2 = omega/2 is
        // rational and carries z-basis row 2 to row 3
        let pm = l.pair_mult_matrices();
        let half_omega = k.omega().scale(&qr(1, 2));
        let x = vec![k.omega(), KElem::from_int(3)];
        let mx: Vec<KElem> = x.iter().map(|c| k.mul(&half_omega, c)).collect();
        assert_eq!(l.z_coords(&mx), crate::linalg::row_mat(&l.z_coords(&x), &pm[1]));
        let b2 = l.z_coords(&l.z_basis()[2]);
        assert_eq!(crate::linalg::row_mat(&b2, &pm[1]), l.z_coords(&l.z_basis()[3]));
    }

    #[test]
    fn gl_membership() {
        let l = lat_d15_nonfree();
        assert!(l.is_gl_element(&KMat::identity(2)));
        // upper unipotent with entry in c_2 = <2, omega>
        let u = KMat::new(vec![vec![KElem::one(), ke(2, 0)], vec![KElem::zero(), KElem::one()]]);
        assert!(l.is_gl_element(&u));
        // entry 1 is not in c_2, so e_1 maps outside L
        let v = KMat::new(vec![vec![KElem::one(), KElem::one()], vec![KElem::zero(), KElem::one()]]);
        assert!(!l.is_gl_element(&v));
        // non-unit determinant
        let s = KMat::new(vec![vec![KElem::from_int(2), KElem::zero()], vec![KElem::zero(), KElem::one()]]);
        assert!(!l.is_gl_element(&s));
    }

    #[test]
    fn pseudo_basis_with_directions() {
        // same module two ways: O_K(1,0) + O_K(0,1) vs directions (1,1),(0,1)
        let cg = Arc::new(ClassGroup::from_d(5).unwrap());
        let e = KMat::new(vec![vec![KElem::one(), KElem::one()], vec![KElem::zero(), KElem::one()]]);
        let l = OKLattice::from_pseudo_basis(
            cg.clone(),
            vec![FracIdeal::one(), FracIdeal::one()],
            e,
        )
        .unwrap();
        let free = OKLattice::standard(cg, 2, 0);
        let k = l.field().clone();
        let w = k.omega();
        for v in [
            vec![KElem::one(), KElem::zero()],
            vec![KElem::zero(), w.clone()],
            vec![w.clone(), k.mul(&w, &w)],
        ] {
            assert_eq!(l.contains(&v), free.contains(&v));
        }
        assert_eq!(l.steinitz_class(), 0);
    }

    #[test]
    fn int_gram_scaling() {
        let t = vec![vec![qr(1, 2), qi(1)], vec![qi(1), qr(2, 3)]];
        let g = IntGram::from_rational(&t);
        assert_eq!(g.scale, BigInt::from(6));
        assert_eq!(g.mat[0][0], BigInt::from(3));
        assert_eq!(g.mat[1][1], BigInt::from(4));
    }
}
