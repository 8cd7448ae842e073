//! Hermitian forms on an O_K-lattice: exact minima and minimal vectors,
//! perfection rank, eutaxy certificates, and reconstruction of a form from
//! its minimal vectors.
//!
//! The minimum is normalized by coefficient ideals,
//! min(A) = min over nonzero x in L of A[x] / N(a_x). It scales by N(p)
//! when L is scaled by an ideal p, so min^n / det_rel is scale-invariant.

use crate::cones;
use crate::kmat::KMat;
use crate::lattice::{LatticeError, OKLattice};
use crate::linalg::{self, Q};
use crate::qfield::{KElem, QuadField};
use num::{One, Zero};
use std::collections::BTreeSet;

/// Errors from form construction and minimum computations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FormError {
    /// The matrix is not equal to its conjugate transpose.
    NotHermitian,
    /// The form is not positive definite.
    NotPositiveDefinite,
    /// A lattice operation failed.
    Lattice(LatticeError),
}

impl std::fmt::Display for FormError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FormError::NotHermitian => write!(f, "matrix is not Hermitian"),
            FormError::NotPositiveDefinite => write!(f, "form is not positive definite"),
            FormError::Lattice(e) => write!(f, "lattice error: {e}"),
        }
    }
}

impl std::error::Error for FormError {}

/// A Hermitian form, wrapping its matrix; construction checks A = A*.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct HermForm {
    mat: KMat,
}

impl HermForm {
    pub fn new(k: &QuadField, mat: KMat) -> Result<HermForm, FormError> {
        if !mat.is_hermitian(k) {
            return Err(FormError::NotHermitian);
        }
        Ok(HermForm { mat })
    }

    pub fn identity(n: usize) -> HermForm {
        HermForm {
            mat: KMat::identity(n),
        }
    }

    pub fn n(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &KMat {
        &self.mat
    }

    /// A[x] = x A x* as an exact rational.
    pub fn evaluate(&self, k: &QuadField, x: &[KElem]) -> Q {
        let xa = self.mat.row_apply(k, x);
        let mut s = KElem::zero();
        for (y, xi) in xa.iter().zip(x) {
            s = s.add(&k.mul(y, &k.conj(xi)));
        }
        debug_assert!(s.is_rational());
        s.a
    }

    /// Positive rational rescaling t A.
    pub fn scale(&self, t: &Q) -> HermForm {
        HermForm {
            mat: self.mat.scale(t),
        }
    }

    /// A + t R for Hermitian R.
    pub fn add_scaled(&self, r: &HermForm, t: &Q) -> HermForm {
        HermForm {
            mat: self.mat.add(&r.mat.scale(t)),
        }
    }

    /// The change of basis A[U] = U A U*.
    pub fn transform(&self, k: &QuadField, u: &KMat) -> HermForm {
        let m = u.mul(k, &self.mat).mul(k, &u.conj_transpose(k));
        debug_assert!(m.is_hermitian(k));
        HermForm { mat: m }
    }

    /// Determinant, a rational number for Hermitian matrices.
    pub fn det(&self, k: &QuadField) -> Q {
        let d = self.mat.det(k);
        debug_assert!(d.is_rational());
        d.a
    }

    /// Positive definiteness via leading principal minors.
    pub fn is_positive_definite(&self, k: &QuadField) -> bool {
        let n = self.n();
        (1..=n).all(|m| {
            let sub = KMat::new(
                (0..m)
                    .map(|i| self.mat.rows[i][..m].to_vec())
                    .collect(),
            );
            let d = sub.det(k);
            debug_assert!(d.is_rational());
            d.a > Q::zero()
        })
    }

    /// Positive semidefiniteness via all principal minors (exponential in
    /// n; fine for the small ranks used here).
    pub fn is_positive_semidefinite(&self, k: &QuadField) -> bool {
        let n = self.n();
        for mask in 1u32..(1 << n) {
            let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let sub = KMat::new(
                idx.iter()
                    .map(|&i| idx.iter().map(|&j| self.mat.rows[i][j].clone()).collect())
                    .collect(),
            );
            let d = sub.det(k);
            debug_assert!(d.is_rational());
            if d.a < Q::zero() {
                return false;
            }
        }
        true
    }

    pub fn inverse(&self, k: &QuadField) -> Option<HermForm> {
        let m = self.mat.inverse(k)?;
        debug_assert!(m.is_hermitian(k));
        Some(HermForm { mat: m })
    }
}

/// The minimum of a form together with its canonical minimal vectors, one
/// per projective unit class, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinVecSet {
    pub minimum: Q,
    pub vectors: Vec<Vec<KElem>>,
}

/// det_rel(A) = N(c_1 ... c_n) det A, the determinant of A relative to the
/// lattice; invariant under GL(L) changes of basis.
pub fn det_rel(l: &OKLattice, a: &HermForm) -> Q {
    let k = l.field();
    let mut nc = Q::one();
    for c in l.coeff_ideals() {
        nc *= c.norm();
    }
    nc * a.det(k)
}

/// gamma^n for the form: min(A)^n / det_rel(A).
pub fn hermite_invariant(l: &OKLattice, a: &HermForm) -> Q {
    let s = minimum_and_minvecs(l, a).expect("form must be positive definite");
    let mut p = Q::one();
    for _ in 0..l.n() {
        p *= &s.minimum;
    }
    p / det_rel(l, a)
}

/// The canonical representative of the projective class of a minimal
/// vector: scale so the coefficient ideal becomes the class representative,
/// then take the lexicographically least unit multiple.
pub fn canonical_minvec(l: &OKLattice, x: &[KElem]) -> Vec<KElem> {
    let k = l.field();
    let cg = l.class_group();
    let ax = l.coeff_ideal_of(x).expect("minimal vector is nonzero");
    let (_, alpha) = cg.class_of(&ax);
    let scaled: Vec<KElem> = x.iter().map(|c| k.mul(&alpha, c)).collect();
    let mut best: Option<Vec<KElem>> = None;
    for u in k.units() {
        let cand: Vec<KElem> = scaled.iter().map(|c| k.mul(u, c)).collect();
        if best.as_ref().is_none_or(|b| cand < *b) {
            best = Some(cand);
        }
    }
    best.expect("unit group is nonempty")
}

/// Computes min(A) and all minimal vectors up to units.
///
/// The normalized value A[x] / N(a_x) of any vector is at least
/// min(A), and N(a_x) is at most the largest representative norm, so all
/// minimal vectors lie in the ellipsoid A[x] <= m0 * m_tilde where m0 is
/// the best normalized z-basis value.
pub fn minimum_and_minvecs(l: &OKLattice, a: &HermForm) -> Result<MinVecSet, FormError> {
    let k = l.field();
    if !a.is_positive_definite(k) {
        return Err(FormError::NotPositiveDefinite);
    }
    let t = l.trace_form(a.mat());
    let mut m0: Option<Q> = None;
    for b in l.z_basis() {
        let val = a.evaluate(k, b);
        let na = l.norm_coeff(b).map_err(FormError::Lattice)?;
        let r = val / na;
        if m0.as_ref().is_none_or(|m| r < *m) {
            m0 = Some(r);
        }
    }
    let m0 = m0.expect("lattice has positive rank");
    let bound = &m0 * l.class_group().m_tilde();
    let pts = linalg::fincke_pohst(&t, &bound);
    let mut entries: Vec<(Vec<KElem>, Q)> = Vec::new();
    let mut minimum = m0.clone();
    for (v, val) in &pts {
        let x = l.from_z_coords(v);
        let na = l.norm_coeff(&x).map_err(FormError::Lattice)?;
        let r = val / na;
        if r < minimum {
            minimum = r.clone();
        }
        entries.push((x, r));
    }
    let mut set: BTreeSet<Vec<KElem>> = BTreeSet::new();
    for (x, r) in entries {
        if r == minimum {
            set.insert(canonical_minvec(l, &x));
        }
    }
    Ok(MinVecSet {
        minimum,
        vectors: set.into_iter().collect(),
    })
}

/// The rank of the rank-one forms of the given vectors in Hermitian
/// coordinates; the form is perfect when this equals n^2.
pub fn perfection_rank(l: &OKLattice, vectors: &[Vec<KElem>]) -> usize {
    let k = l.field();
    let rows: Vec<Vec<Q>> = vectors
        .iter()
        .map(|x| cones::coords(k, &KMat::rank_one(k, x)))
        .collect();
    linalg::rank(&rows)
}

/// Whether the form is perfect, with the achieved perfection rank.
pub fn is_perfect(l: &OKLattice, a: &HermForm) -> Result<(bool, usize), FormError> {
    let s = minimum_and_minvecs(l, a)?;
    let r = perfection_rank(l, &s.vectors);
    Ok((r == l.n() * l.n(), r))
}

/// Outcome of the eutaxy test for a positive definite form.
#[derive(Debug, Clone)]
pub enum EutaxyOutcome {
    /// A^(-1) = sum lambda_x x* x with every lambda_x > 0.
    Eutactic { coefficients: Vec<Q> },
    /// A Hermitian witness W with Trace(W x* x) >= 0 for all minimal x,
    /// strictly for at least one when the system is solvable at all, and
    /// Trace(W A^(-1)) <= 0; no strictly positive combination can exist.
    NotEutactic { witness: HermForm },
}

/// Decides eutaxy by one exact linear program over the minimal vectors.
///
/// Maximizes delta subject to sum (mu_x + delta) r_x = t with mu >= 0,
/// where r_x are the rank-one coordinates and t those of A^(-1); the form
/// is eutactic exactly when the optimum is positive, and the dual solution
/// otherwise yields a separating witness, verified before returning.
pub fn eutaxy_certificate(l: &OKLattice, a: &HermForm, s: &MinVecSet) -> EutaxyOutcome {
    let k = l.field();
    let n = l.n();
    let dim = n * n;
    let target = a.inverse(k).expect("positive definite form is invertible");
    let t = cones::coords(k, target.mat());
    let rays: Vec<Vec<Q>> = s
        .vectors
        .iter()
        .map(|x| cones::coords(k, &KMat::rank_one(k, x)))
        .collect();
    let nv = rays.len();
    let mut sum_ray = vec![Q::zero(); dim];
    for r in &rays {
        for (s, x) in sum_ray.iter_mut().zip(r) {
            *s += x;
        }
    }
    // columns: mu_1..mu_nv, delta_plus, delta_minus
    let mut rows = vec![vec![Q::zero(); nv + 2]; dim];
    for (j, r) in rays.iter().enumerate() {
        for (i, x) in r.iter().enumerate() {
            rows[i][j] = x.clone();
        }
    }
    for i in 0..dim {
        rows[i][nv] = sum_ray[i].clone();
        rows[i][nv + 1] = -&sum_ray[i];
    }
    let mut cost = vec![Q::zero(); nv + 2];
    cost[nv] = -Q::one();
    cost[nv + 1] = Q::one();
    let verify_witness = |y: Vec<Q>| -> HermForm {
        // w = -y separates: <w, r_x> >= 0 for all x and <w, t> <= 0
        let w: Vec<Q> = y.iter().map(|v| -v).collect();
        let dt = linalg::dot(&w, &t);
        assert!(dt <= Q::zero(), "witness must cut off the target");
        for r in &rays {
            assert!(
                linalg::dot(&w, r) >= Q::zero(),
                "witness must be nonnegative on every ray"
            );
        }
        // undo the pairing weights so the witness pairs through the trace
        let g = cones::pairing_gram(k, n);
        let wc: Vec<Q> = w.iter().zip(&g).map(|(x, ww)| x / ww).collect();
        let mat = cones::uncoords(k, n, &wc);
        HermForm::new(k, mat).expect("witness coordinates are Hermitian")
    };
    match linalg::lp_minimize(&rows, &t, &cost) {
        linalg::LpOutcome::Optimal { x, objective, duals } => {
            let delta = -objective;
            if delta > Q::zero() {
                let coefficients: Vec<Q> = (0..nv).map(|j| &x[j] + &delta).collect();
                // exact recheck of the eutaxy identity
                let mut lhs = vec![Q::zero(); dim];
                for (lam, r) in coefficients.iter().zip(&rays) {
                    assert!(*lam > Q::zero());
                    for (acc, v) in lhs.iter_mut().zip(r) {
                        *acc += lam * v;
                    }
                }
                assert_eq!(lhs, t, "eutaxy coefficients must reproduce the inverse");
                EutaxyOutcome::Eutactic { coefficients }
            } else {
                EutaxyOutcome::NotEutactic {
                    witness: verify_witness(duals),
                }
            }
        }
        linalg::LpOutcome::Infeasible { farkas } => EutaxyOutcome::NotEutactic {
            witness: verify_witness(farkas),
        },
        linalg::LpOutcome::Unbounded => {
            unreachable!("delta is bounded by Trace(t) over the positive ray traces")
        }
    }
}

/// Errors from reconstructing a form from minimal vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReconstructError {
    /// The vectors do not determine the form (not a perfect configuration).
    Underdetermined,
    /// No Hermitian form takes the prescribed values.
    Inconsistent,
}

impl std::fmt::Display for ReconstructError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReconstructError::Underdetermined => write!(f, "minimal vectors underdetermine the form"),
            ReconstructError::Inconsistent => write!(f, "no Hermitian form matches the values"),
        }
    }
}

impl std::error::Error for ReconstructError {}

/// Solves for the unique Hermitian form with A[x] = m N(a_x) on every
/// given vector.
pub fn reconstruct_from_minvecs(
    l: &OKLattice,
    m: &Q,
    vectors: &[Vec<KElem>],
) -> Result<HermForm, ReconstructError> {
    let k = l.field();
    let n = l.n();
    let g = cones::pairing_gram(k, n);
    let mut rows = Vec::with_capacity(vectors.len());
    let mut rhs = Vec::with_capacity(vectors.len());
    for x in vectors {
        let r = cones::coords(k, &KMat::rank_one(k, x));
        rows.push(r.iter().zip(&g).map(|(v, w)| v * w).collect::<Vec<Q>>());
        let na = l.norm_coeff(x).expect("minimal vector is nonzero");
        rhs.push(m * na);
    }
    match linalg::solve_exact(&rows, &rhs) {
        linalg::SolveOutcome::Unique(c) => {
            let mat = cones::uncoords(k, n, &c);
            Ok(HermForm { mat })
        }
        linalg::SolveOutcome::Underdetermined => Err(ReconstructError::Underdetermined),
        linalg::SolveOutcome::Inconsistent => Err(ReconstructError::Inconsistent),
    }
}

/// The paper-scale example data used across tests: the perfect form with
/// twelve minimal classes on O_K + <2, omega> e_2 over Q(sqrt(-15)).
#[cfg(test)]
pub(crate) fn d15_nonfree_example() -> (OKLattice, HermForm) {
    use crate::ideals::{ClassGroup, FracIdeal};
    use crate::linalg::qr;
    use std::sync::Arc;
    let cg = Arc::new(ClassGroup::from_d(15).unwrap());
    let k = cg.field().clone();
    // the non-free lattice written with ideal <2, omega - 1>, the conjugate
    // of the class representative <2, omega>
    let w = k.omega();
    let a2 = FracIdeal::from_gens(&k, &[KElem::from_int(2), w.sub(&KElem::one())]).unwrap();
    let l = OKLattice::from_pseudo_basis(
        cg,
        vec![FracIdeal::one(), a2],
        KMat::identity(2),
    )
    .unwrap();
    // P = [[1, (5 + sqrt(-15))/10], [(5 - sqrt(-15))/10, 1/2]]
    let g01 = k.from_sqrt_basis(&qr(1, 2), &qr(1, 10));
    let mat = KMat::new(vec![
        vec![KElem::one(), g01.clone()],
        vec![k.conj(&g01), KElem::from_rat(qr(1, 2))],
    ]);
    let p = HermForm::new(&k, mat).unwrap();
    (l, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideals::ClassGroup;
    use crate::linalg::{qi, qr};
    use std::sync::Arc;

    #[test]
    fn rejects_non_hermitian() {
        let k = QuadField::new(15).unwrap();
        let w = k.omega();
        let m = KMat::new(vec![
            vec![KElem::one(), w.clone()],
            vec![w.clone(), KElem::one()],
        ]);
        assert_eq!(HermForm::new(&k, m), Err(FormError::NotHermitian));
    }

    #[test]
    fn definiteness_tests() {
        let k = QuadField::new(15).unwrap();
        let pd = HermForm::identity(2);
        assert!(pd.is_positive_definite(&k));
        assert!(pd.is_positive_semidefinite(&k));
        let psd = HermForm::new(
            &k,
            KMat::new(vec![
                vec![KElem::one(), KElem::one()],
                vec![KElem::one(), KElem::one()],
            ]),
        )
        .unwrap();
        assert!(!psd.is_positive_definite(&k));
        assert!(psd.is_positive_semidefinite(&k));
        let indef = HermForm::new(
            &k,
            KMat::new(vec![
                vec![KElem::one(), KElem::from_int(2)],
                vec![KElem::from_int(2), KElem::one()],
            ]),
        )
        .unwrap();
        assert!(!indef.is_positive_semidefinite(&k));
    }

    #[test]
    fn paper_scale_example_minimum() {
        let (l, p) = d15_nonfree_example();
        let s = minimum_and_minvecs(&l, &p).unwrap();
        assert_eq!(s.minimum, Q::one());
        assert_eq!(s.vectors.len(), 12);
        assert_eq!(det_rel(&l, &p), qr(1, 5));
        assert_eq!(hermite_invariant(&l, &p), qi(5));
        let (perfect, rank) = is_perfect(&l, &p).unwrap();
        assert!(perfect);
        assert_eq!(rank, 4);
    }

    #[test]
    fn paper_scale_example_eutaxy_and_reconstruction() {
        let (l, p) = d15_nonfree_example();
        let s = minimum_and_minvecs(&l, &p).unwrap();
        match eutaxy_certificate(&l, &p, &s) {
            EutaxyOutcome::Eutactic { coefficients } => {
                assert_eq!(coefficients.len(), 12);
                assert!(coefficients.iter().all(|c| *c > Q::zero()));
            }
            EutaxyOutcome::NotEutactic { .. } => panic!("example form is eutactic"),
        }
        let back = reconstruct_from_minvecs(&l, &s.minimum, &s.vectors).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn identity_on_free_lattice_not_perfect() {
        let cg = Arc::new(ClassGroup::from_d(15).unwrap());
        let l = OKLattice::standard(cg, 2, 0);
        let a = HermForm::identity(2);
        let s = minimum_and_minvecs(&l, &a).unwrap();
        assert_eq!(s.minimum, Q::one());
        // only the two unit vectors up to units
        assert_eq!(s.vectors.len(), 2);
        let (perfect, rank) = is_perfect(&l, &a).unwrap();
        assert!(!perfect);
        assert_eq!(rank, 2);
        // reconstruction is underdetermined from two vectors
        assert_eq!(
            reconstruct_from_minvecs(&l, &s.minimum, &s.vectors),
            Err(ReconstructError::Underdetermined)
        );
    }

    #[test]
    fn non_eutactic_witness() {
        // diagonal-dominant form whose minimal vectors are the unit axes
        // but whose inverse has off-diagonal entries
        let cg = Arc::new(ClassGroup::from_d(15).unwrap());
        let l = OKLattice::standard(cg, 2, 0);
        let k = l.field().clone();
        let third = KElem::from_rat(qr(1, 3));
        let mat = KMat::new(vec![
            vec![KElem::one(), third.clone()],
            vec![third.clone(), KElem::one()],
        ]);
        let a = HermForm::new(&k, mat).unwrap();
        let s = minimum_and_minvecs(&l, &a).unwrap();
        assert_eq!(s.minimum, Q::one());
        assert_eq!(s.vectors.len(), 2);
        match eutaxy_certificate(&l, &a, &s) {
            EutaxyOutcome::Eutactic { .. } => panic!("form is not eutactic"),
            EutaxyOutcome::NotEutactic { witness } => {
                // Trace(W x* x) >= 0 on minimal vectors, <= 0 on the inverse
                let inv = a.inverse(&k).unwrap();
                assert!(cones::trace_pair(&k, witness.mat(), inv.mat()) <= Q::zero());
                for x in &s.vectors {
                    let r1 = KMat::rank_one(&k, x);
                    assert!(cones::trace_pair(&k, witness.mat(), &r1) >= Q::zero());
                }
            }
        }
    }

    #[test]
    fn canonical_minvec_collapses_units_and_scalings() {
        let (l, _) = d15_nonfree_example();
        let k = l.field().clone();
        let x = vec![KElem::one(), KElem::zero()];
        let c1 = canonical_minvec(&l, &x);
        let mx: Vec<KElem> = x.iter().map(|c| k.mul(&KElem::from_int(-1), c)).collect();
        assert_eq!(canonical_minvec(&l, &mx), c1);
        // a_x for x = (0, 2) is 2 c_2^(-1) of norm 2, in the nontrivial
        // class, so the canonical form rescales it
        let y = vec![KElem::zero(), KElem::from_int(2)];
        let cy = canonical_minvec(&l, &y);
        let ay = l.coeff_ideal_of(&cy).unwrap();
        assert_eq!(ay, *l.class_group().rep(l.class_group().class_of(&ay).0));
    }

    #[test]
    fn ideal_scaling_covariance() {
        // scaling L by p multiplies min by N(p) and fixes min^n / det_rel
        let (l, p) = d15_nonfree_example();
        let cg = l.class_group().clone();
        let lp = l.scale_by_ideal(cg.rep(1));
        let s = minimum_and_minvecs(&l, &p).unwrap();
        let sp = minimum_and_minvecs(&lp, &p).unwrap();
        assert_eq!(&s.minimum * qi(2), sp.minimum);
        assert_eq!(s.vectors.len(), sp.vectors.len());
        assert_eq!(hermite_invariant(&l, &p), hermite_invariant(&lp, &p));
    }
}
