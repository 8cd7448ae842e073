//! Deterministic random generators and naive reference computations backing
//! the test suites: seeded positive definite forms, GL(L) elements built
//! from elementary matrices, integral ideals, and a box-search minimal
//! vector routine independent of the production enumeration.

use std::collections::BTreeSet;

use num::{BigInt, Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::hermforms::{canonical_minvec, HermForm, MinVecSet};
use crate::ideals::{ClassGroup, FracIdeal};
use crate::kmat::KMat;
use crate::lattice::OKLattice;
use crate::linalg::{self, Q};
use crate::qfield::{KElem, QuadField};

/// A reproducible generator for the given seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A field element with both coordinates drawn uniformly from
/// [-span, span].
pub fn random_kelem(rng: &mut ChaCha8Rng, span: i64) -> KElem {
    let a = rng.gen_range(-span..=span);
    let b = rng.gen_range(-span..=span);
    KElem::new(linalg::qi(a), linalg::qi(b))
}

/// A random positive definite Hermitian form B B* + I with small entries.
pub fn random_pd_form(k: &QuadField, n: usize, rng: &mut ChaCha8Rng) -> HermForm {
    let rows: Vec<Vec<KElem>> = (0..n)
        .map(|_| (0..n).map(|_| random_kelem(rng, 2)).collect())
        .collect();
    let b = KMat::new(rows);
    let mat = b.mul(k, &b.conj_transpose(k)).add(&KMat::identity(n));
    HermForm::new(k, mat).expect("B B* + I is Hermitian positive definite")
}

/// A small random element of the given fractional ideal: an integer
/// combination of its Z-basis with coefficients in [-span, span].
pub fn random_ideal_elem(ideal: &FracIdeal, rng: &mut ChaCha8Rng, span: i64) -> KElem {
    let [b1, b2] = ideal.basis();
    let m1 = rng.gen_range(-span..=span);
    let m2 = rng.gen_range(-span..=span);
    b1.scale(&linalg::qi(m1)).add(&b2.scale(&linalg::qi(m2)))
}

/// A random element of GL(L): a product of `steps` elementary
/// transvections I + alpha e_ij with alpha drawn from the compatible ideal
/// c_j c_i^{-1}, interleaved with unit scalings of single coordinates.
/// Each factor preserves L and has unit determinant norm, so the product
/// does too; the result is verified before returning.
pub fn random_gl_element(l: &OKLattice, rng: &mut ChaCha8Rng, steps: usize) -> KMat {
    let k = l.field();
    let n = l.n();
    let ideals = l.coeff_ideals();
    let units = k.units();
    let mut u = KMat::identity(n);
    for _ in 0..steps {
        if n > 1 && rng.gen_bool(0.7) {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let compat = ideals[j].mul(k, &ideals[i].inv(k));
            let alpha = random_ideal_elem(&compat, rng, 2);
            let mut e = KMat::identity(n);
            e.rows[i][j] = alpha;
            u = u.mul(k, &e);
        } else {
            let i = rng.gen_range(0..n);
            let w = &units[rng.gen_range(0..units.len())];
            let mut e = KMat::identity(n);
            e.rows[i][i] = w.clone();
            u = u.mul(k, &e);
        }
    }
    assert!(l.is_gl_element(&u), "constructed product must preserve L");
    u
}

/// A random nonzero integral ideal: a class representative scaled by a
/// small nonzero integral element.
pub fn random_integral_ideal(cg: &ClassGroup, rng: &mut ChaCha8Rng) -> FracIdeal {
    let k = cg.field();
    let rep = cg.rep(rng.gen_range(0..cg.h())).clone();
    let mut alpha = random_kelem(rng, 2);
    loop {
        if !alpha.is_zero() && k.is_integral(&alpha) {
            break;
        }
        alpha = random_kelem(rng, 2);
    }
    rep.mul_elem(k, &alpha).expect("nonzero scaling keeps an ideal")
}

/// Minimal vectors by exhaustive box search: every vector with normalized
/// value at most the best z-basis value m0 satisfies the coordinate bounds
/// v_i^2 <= m0 m~ (T^{-1})_ii for the trace form T, so sweeping that box
/// finds the exact minimum and all minimal classes. Independent of the
/// production short-vector enumeration.
pub fn brute_force_minvecs(l: &OKLattice, a: &HermForm) -> MinVecSet {
    let k = l.field();
    let t = l.trace_form(a.mat());
    let dim = t.len();
    let mut m0: Option<Q> = None;
    for b in l.z_basis() {
        let r = a.evaluate(k, b) / l.norm_coeff(b).expect("basis vector is nonzero");
        if m0.as_ref().is_none_or(|m| r < *m) {
            m0 = Some(r);
        }
    }
    let m0 = m0.expect("lattice has positive rank");
    let bound = &m0 * l.class_group().m_tilde();
    let tinv = linalg::inverse(&t).expect("trace form is positive definite");
    let radii: Vec<i64> = (0..dim)
        .map(|i| {
            let cap = &bound * &tinv[i][i];
            let mut r = 0i64;
            while linalg::qi(r + 1) * linalg::qi(r + 1) <= cap {
                r += 1;
            }
            r
        })
        .collect();
    let mut minimum = m0.clone();
    let mut entries: Vec<(Vec<KElem>, Q)> = Vec::new();
    let mut v = vec![0i64; dim];
    loop {
        if v.iter().any(|c| *c != 0) {
            let coords: Vec<BigInt> = v.iter().map(|c| BigInt::from(*c)).collect();
            let qv: Vec<Q> = v.iter().map(|c| linalg::qi(*c)).collect();
            let mut val = Q::zero();
            for (i, row) in t.iter().enumerate() {
                for (j, tij) in row.iter().enumerate() {
                    val += &qv[i] * tij * &qv[j];
                }
            }
            let x = l.from_z_coords(&coords);
            let r = val / l.norm_coeff(&x).expect("nonzero vector");
            if r < minimum {
                minimum = r.clone();
            }
            entries.push((x, r));
        }
        let mut level = 0;
        loop {
            if level == dim {
                let vectors: BTreeSet<Vec<KElem>> = entries
                    .iter()
                    .filter(|(_, r)| *r == minimum)
                    .map(|(x, _)| canonical_minvec(l, x))
                    .collect();
                return MinVecSet {
                    minimum,
                    vectors: vectors.into_iter().collect(),
                };
            }
            if v[level] < radii[level] {
                v[level] += 1;
                break;
            }
            v[level] = -radii[level];
            level += 1;
        }
    }
}

/// True when the integer is nonnegative; helper for tests over BigInt.
pub fn is_nonneg(x: &BigInt) -> bool {
    !x.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn lat(d: u64, n: usize, j: usize) -> OKLattice {
        OKLattice::standard(Arc::new(ClassGroup::from_d(d).unwrap()), n, j)
    }

    #[test]
    fn random_pd_forms_are_positive_definite() {
        let mut g = rng(1);
        for d in [5, 15] {
            let cg = ClassGroup::from_d(d).unwrap();
            for _ in 0..10 {
                let f = random_pd_form(cg.field(), 2, &mut g);
                assert!(f.is_positive_definite(cg.field()));
            }
        }
    }

    #[test]
    fn random_gl_elements_preserve_both_standard_lattices() {
        let mut g = rng(2);
        for j in [0, 1] {
            let l = lat(15, 2, j);
            for _ in 0..10 {
                let u = random_gl_element(&l, &mut g, 6);
                assert!(l.is_gl_element(&u));
            }
        }
    }

    #[test]
    fn brute_force_agrees_with_production_minvecs_on_identity() {
        for j in [0, 1] {
            let l = lat(15, 2, j);
            let a = HermForm::identity(2);
            let brute = brute_force_minvecs(&l, &a);
            let prod = crate::hermforms::minimum_and_minvecs(&l, &a).unwrap();
            assert_eq!(brute.minimum, prod.minimum);
            assert_eq!(brute.vectors, prod.vectors);
        }
    }

    #[test]
    fn random_integral_ideals_are_integral_ok_modules() {
        let cg = ClassGroup::from_d(21).unwrap();
        let mut g = rng(3);
        for _ in 0..10 {
            let p = random_integral_ideal(&cg, &mut g);
            assert!(p.is_integral());
            assert!(p.is_ok_module(cg.field()));
            assert!(p.norm() > Q::zero());
        }
    }
}
