//! GL(L)-equivalence of Hermitian forms and automorphism groups.
//!
//! A Z-linear map preserving both the trace form T and its omega-twist T'
//! commutes with multiplication by omega, hence is K-linear. The search
//! therefore only chooses the even Z-basis rows; each odd row is the even
//! row times the rational multiplier matrix of g2_i / g1_i, pruned by
//! integrality.

use crate::hermforms::HermForm;
use crate::kmat::KMat;
use crate::lattice::OKLattice;
use crate::linalg::{self, Q};
use crate::qfield::{KElem, QuadField};
use num::bigint::BigInt;
use num::{Integer, One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};

/// Integer trace Gram pair of a form: t = scale * T and tw = scale * T'.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormPairGram {
    pub t: Vec<Vec<BigInt>>,
    pub tw: Vec<Vec<BigInt>>,
    pub scale: BigInt,
}

/// Builds the integer Gram pairs of two forms over one lattice with a
/// shared denominator scale, so integer equality of paired values agrees
/// with rational equality.
pub fn form_pair_grams(l: &OKLattice, a: &HermForm, b: &HermForm) -> (FormPairGram, FormPairGram) {
    let (ta, twa) = l.trace_form_pair(a.mat());
    let (tb, twb) = l.trace_form_pair(b.mat());
    let mut scale = BigInt::one();
    for m in [&ta, &twa, &tb, &twb] {
        for row in m {
            for x in row {
                scale = scale.lcm(&x.denom().abs());
            }
        }
    }
    let to_int = |m: &[Vec<Q>]| -> Vec<Vec<BigInt>> {
        m.iter()
            .map(|row| {
                row.iter()
                    .map(|x| (x * Q::from_integer(scale.clone())).to_integer())
                    .collect()
            })
            .collect()
    };
    (
        FormPairGram {
            t: to_int(&ta),
            tw: to_int(&twa),
            scale: scale.clone(),
        },
        FormPairGram {
            t: to_int(&tb),
            tw: to_int(&twb),
            scale,
        },
    )
}

fn bdot(v: &[BigInt], m: &[Vec<BigInt>], w: &[BigInt]) -> BigInt {
    let mut s = BigInt::zero();
    for (vi, row) in v.iter().zip(m) {
        if vi.is_zero() {
            continue;
        }
        let mut r = BigInt::zero();
        for (mj, wj) in row.iter().zip(w) {
            if !wj.is_zero() {
                r += mj * wj;
            }
        }
        s += vi * r;
    }
    s
}

/// Applies a rational matrix to an integer row; None when the image is not
/// integral.
fn apply_integral(v: &[BigInt], m: &[Vec<Q>]) -> Option<Vec<BigInt>> {
    let cols = m[0].len();
    let mut out = vec![Q::zero(); cols];
    for (vi, row) in v.iter().zip(m) {
        if vi.is_zero() {
            continue;
        }
        let c = Q::from_integer(vi.clone());
        for (o, x) in out.iter_mut().zip(row) {
            *o += &c * x;
        }
    }
    out.iter()
        .map(|x| x.is_integer().then(|| x.to_integer()))
        .collect()
}

/// Lifts a Z-basis matrix of an O_K-linear map to its K-matrix.
fn lift_to_kmat(l: &OKLattice, rows: &[Vec<BigInt>]) -> KMat {
    let k = l.field();
    let n = l.n();
    let mut frows = Vec::with_capacity(n);
    for i in 0..n {
        let img = l.from_z_coords(&rows[2 * i]);
        let [g1, _] = l.coeff_ideals()[i].basis();
        let g1inv = k.inv(&g1).expect("ideal basis is nonzero");
        frows.push(img.iter().map(|c| k.mul(&g1inv, c)).collect::<Vec<KElem>>());
    }
    let f = KMat::new(frows);
    l.direction_inv().mul(k, &f)
}

/// Backtracking search for all Z-matrices carrying the Gram pair of A to
/// the Gram pair of B; stops at the first solution unless `all` is set.
fn search_isometries(l: &OKLattice, ga: &FormPairGram, gb: &FormPairGram, all: bool) -> Vec<KMat> {
    let n = l.n();
    let m2 = 2 * n;
    let mults = l.pair_mult_matrices();
    // candidate vectors for the even rows, bucketed by T_A-value
    let mut bound = BigInt::zero();
    for i in 0..n {
        bound = bound.max(gb.t[2 * i][2 * i].clone());
    }
    let ta_q: Vec<Vec<Q>> = ga
        .t
        .iter()
        .map(|r| r.iter().map(|x| Q::from_integer(x.clone())).collect())
        .collect();
    let mut pool: BTreeMap<BigInt, Vec<Vec<BigInt>>> = BTreeMap::new();
    for (v, val) in linalg::fincke_pohst(&ta_q, &Q::from_integer(bound)) {
        debug_assert!(val.is_integer());
        let neg: Vec<BigInt> = v.iter().map(|x| -x).collect();
        let entry = pool.entry(val.to_integer()).or_default();
        entry.push(v);
        entry.push(neg);
    }
    let empty: Vec<Vec<BigInt>> = Vec::new();

    struct Frame<'a> {
        l: &'a OKLattice,
        ga: &'a FormPairGram,
        gb: &'a FormPairGram,
        mults: &'a [Vec<Vec<Q>>],
        pool: &'a BTreeMap<BigInt, Vec<Vec<BigInt>>>,
        empty: &'a Vec<Vec<BigInt>>,
        all: bool,
        rows: Vec<Vec<BigInt>>,
        found: Vec<KMat>,
    }

    impl Frame<'_> {
        fn admissible(&self, cand: &[BigInt], r: usize) -> bool {
            // pairings of the candidate row r against itself and all
            // earlier rows, in both Gram matrices and both orders
            if bdot(cand, &self.ga.t, cand) != self.gb.t[r][r]
                || bdot(cand, &self.ga.tw, cand) != self.gb.tw[r][r]
            {
                return false;
            }
            for (s, prev) in self.rows.iter().enumerate() {
                if bdot(prev, &self.ga.t, cand) != self.gb.t[s][r]
                    || bdot(prev, &self.ga.tw, cand) != self.gb.tw[s][r]
                    || bdot(cand, &self.ga.tw, prev) != self.gb.tw[r][s]
                {
                    return false;
                }
            }
            true
        }

        fn descend(&mut self, pair: usize) -> bool {
            let n = self.l.n();
            if pair == n {
                let u = lift_to_kmat(self.l, &self.rows);
                self.found.push(u);
                return !self.all;
            }
            let r = 2 * pair;
            let want = self.gb.t[r][r].clone();
            let cands = self.pool.get(&want).unwrap_or(self.empty);
            for cand in cands.clone() {
                if !self.admissible(&cand, r) {
                    continue;
                }
                let Some(derived) = apply_integral(&cand, &self.mults[pair]) else {
                    continue;
                };
                self.rows.push(cand);
                if self.admissible(&derived, r + 1) {
                    self.rows.push(derived);
                    if self.descend(pair + 1) {
                        return true;
                    }
                    self.rows.pop();
                }
                self.rows.pop();
            }
            false
        }
    }

    let mut frame = Frame {
        l,
        ga,
        gb,
        mults: &mults,
        pool: &pool,
        empty: &empty,
        all,
        rows: Vec::with_capacity(m2),
        found: Vec::new(),
    };
    frame.descend(0);
    frame.found
}

/// Searches for U in GL(L) with B = A[U] = U A U*; both forms must be
/// positive definite. Returns the first transformation found.
pub fn is_equivalent(l: &OKLattice, a: &HermForm, b: &HermForm) -> Option<KMat> {
    let k = l.field();
    if a.det(k) != b.det(k) {
        return None;
    }
    let (ga, gb) = form_pair_grams(l, a, b);
    let found = search_isometries(l, &ga, &gb, false);
    let u = found.into_iter().next()?;
    assert_eq!(a.transform(k, &u), *b, "search result must transform A to B");
    assert!(l.is_gl_element(&u), "search result must stabilize L");
    Some(u)
}

/// The automorphism group Aut(L, A) = { U in GL(L) : A[U] = A }.
#[derive(Debug, Clone)]
pub struct AutGroup {
    pub order: usize,
    pub gens: Vec<KMat>,
    pub label: String,
}

fn flat_key(u: &KMat) -> Vec<KElem> {
    u.rows.iter().flatten().cloned().collect()
}

fn closure(k: &QuadField, n: usize, gens: &[KMat]) -> BTreeSet<Vec<KElem>> {
    let mut seen: BTreeSet<Vec<KElem>> = BTreeSet::new();
    let id = KMat::identity(n);
    let mut frontier = vec![id.clone()];
    seen.insert(flat_key(&id));
    while let Some(u) = frontier.pop() {
        for g in gens {
            let p = u.mul(k, g);
            if seen.insert(flat_key(&p)) {
                frontier.push(p);
            }
        }
    }
    seen
}

fn element_order(k: &QuadField, n: usize, u: &KMat) -> usize {
    let id = KMat::identity(n);
    let mut p = u.clone();
    let mut ord = 1;
    while p != id {
        p = p.mul(k, u);
        ord += 1;
        assert!(ord <= 1 << 16, "element order diverged");
    }
    ord
}

/// Names a group by its order and element-order multiset; covers the small
/// groups arising as stabilizers here, with a generic fallback label.
fn recognize(order: usize, spectrum: &BTreeMap<usize, usize>) -> String {
    let spec: Vec<(usize, usize)> = spectrum.iter().map(|(a, b)| (*a, *b)).collect();
    let known: &[(usize, &[(usize, usize)], &str)] = &[
        (1, &[(1, 1)], "C1"),
        (2, &[(1, 1), (2, 1)], "C2"),
        (3, &[(1, 1), (3, 2)], "C3"),
        (4, &[(1, 1), (2, 1), (4, 2)], "C4"),
        (4, &[(1, 1), (2, 3)], "C2xC2"),
        (6, &[(1, 1), (2, 1), (3, 2), (6, 2)], "C6"),
        (6, &[(1, 1), (2, 3), (3, 2)], "S3"),
        (8, &[(1, 1), (2, 1), (4, 6)], "Q8"),
        (8, &[(1, 1), (2, 1), (4, 2), (8, 4)], "C8"),
        (8, &[(1, 1), (2, 5), (4, 2)], "D4"),
        (8, &[(1, 1), (2, 3), (4, 4)], "C4xC2"),
        (8, &[(1, 1), (2, 7)], "C2^3"),
        (12, &[(1, 1), (2, 1), (3, 2), (4, 6), (6, 2)], "C3:C4"),
        (12, &[(1, 1), (2, 1), (3, 2), (4, 2), (6, 2), (12, 4)], "C12"),
        (12, &[(1, 1), (2, 7), (3, 2), (6, 2)], "D6"),
        (12, &[(1, 1), (2, 3), (3, 8)], "A4"),
        (12, &[(1, 1), (2, 3), (3, 2), (6, 6)], "C6xC2"),
        (24, &[(1, 1), (2, 1), (3, 8), (4, 6), (6, 8)], "SL(2,3)"),
        (24, &[(1, 1), (2, 9), (3, 8), (4, 6)], "S4"),
    ];
    for (o, s, name) in known {
        if *o == order && *s == spec.as_slice() {
            return (*name).to_string();
        }
    }
    format!("G{order}")
}

/// Enumerates Aut(L, A) and selects generators greedily by subgroup
/// growth; the label recognizes the small groups by order spectrum.
pub fn aut_group(l: &OKLattice, a: &HermForm) -> AutGroup {
    let k = l.field();
    let n = l.n();
    let (ga, gb) = form_pair_grams(l, a, a);
    let elements = search_isometries(l, &ga, &gb, true);
    let order = elements.len();
    debug_assert!(order >= 1);
    let mut spectrum: BTreeMap<usize, usize> = BTreeMap::new();
    for u in &elements {
        *spectrum.entry(element_order(k, n, u)).or_insert(0) += 1;
    }
    let label = recognize(order, &spectrum);
    // deterministic greedy generator choice
    let mut sorted = elements.clone();
    sorted.sort();
    let mut gens: Vec<KMat> = Vec::new();
    let mut current = closure(k, n, &gens);
    while current.len() < order {
        let mut best: Option<(usize, KMat)> = None;
        for u in &sorted {
            if current.contains(&flat_key(u)) {
                continue;
            }
            let mut trial = gens.clone();
            trial.push(u.clone());
            let size = closure(k, n, &trial).len();
            if best.as_ref().is_none_or(|(s, _)| size > *s) {
                best = Some((size, u.clone()));
            }
        }
        let (_, pick) = best.expect("group not yet generated");
        gens.push(pick);
        current = closure(k, n, &gens);
    }
    for g in &gens {
        debug_assert!(l.is_gl_element(g));
        debug_assert_eq!(a.transform(k, g), *a);
    }
    AutGroup { order, gens, label }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermforms::{self, d15_nonfree_example, minimum_and_minvecs};
    use crate::ideals::ClassGroup;
    use crate::linalg::qr;
    use std::sync::Arc;

    #[test]
    fn example_automorphisms() {
        let (l, p) = d15_nonfree_example();
        let g = aut_group(&l, &p);
        assert_eq!(g.order, 12);
        assert_eq!(g.label, "C3:C4");
        assert_eq!(g.gens.len(), 2);
        let k = l.field();
        let c = closure(k, 2, &g.gens);
        assert_eq!(c.len(), 12);
    }

    #[test]
    fn self_equivalence_and_transported_forms() {
        let (l, p) = d15_nonfree_example();
        let k = l.field().clone();
        let u = is_equivalent(&l, &p, &p).unwrap();
        assert!(l.is_gl_element(&u));
        // transport by a GL(L) element and recover some isometry back
        let g = KMat::new(vec![
            vec![KElem::one(), KElem::from_int(2)],
            vec![KElem::zero(), KElem::from_int(-1)],
        ]);
        assert!(l.is_gl_element(&g));
        let q = p.transform(&k, &g);
        let v = is_equivalent(&l, &p, &q).unwrap();
        assert_eq!(p.transform(&k, &v), q);
    }

    #[test]
    fn equivalence_decisions_with_equal_determinants() {
        let cg = Arc::new(ClassGroup::from_d(5).unwrap());
        let l = crate::lattice::OKLattice::standard(cg, 2, 0);
        let k = l.field().clone();
        let a = HermForm::identity(2);
        // [[2, 1], [1, 1]] = I[U] for unipotent U, so it is equivalent
        let b = HermForm::new(
            &k,
            KMat::new(vec![
                vec![KElem::from_int(2), KElem::one()],
                vec![KElem::one(), KElem::one()],
            ]),
        )
        .unwrap();
        assert!(is_equivalent(&l, &a, &b).is_some());
        // diag(1/2, 2) shares det 1 with the identity but is inequivalent
        let c = HermForm::new(
            &k,
            KMat::new(vec![
                vec![KElem::from_rat(qr(1, 2)), KElem::zero()],
                vec![KElem::zero(), KElem::from_int(2)],
            ]),
        )
        .unwrap();
        assert!(is_equivalent(&l, &a, &c).is_none());
    }

    #[test]
    fn unit_form_aut_on_free_lattice() {
        // Aut of the identity on O_K^2 for d = 5: signed permutations of
        // the two coordinates, order 8 (units are +-1)
        let cg = Arc::new(ClassGroup::from_d(5).unwrap());
        let l = crate::lattice::OKLattice::standard(cg, 2, 0);
        let a = HermForm::identity(2);
        let g = aut_group(&l, &a);
        assert_eq!(g.order, 8);
        assert_eq!(g.label, "D4");
    }

    #[test]
    fn equivalence_respects_minimum_classes() {
        let (l, p) = d15_nonfree_example();
        let k = l.field().clone();
        // unipotent with corner in the coefficient ideal <2, omega - 1>
        let g = KMat::new(vec![
            vec![KElem::one(), k.omega().sub(&KElem::one())],
            vec![KElem::zero(), KElem::one()],
        ]);
        if l.is_gl_element(&g) {
            let q = p.transform(&k, &g);
            let sp = minimum_and_minvecs(&l, &p).unwrap();
            let sq = minimum_and_minvecs(&l, &q).unwrap();
            assert_eq!(sp.minimum, sq.minimum);
            assert_eq!(sp.vectors.len(), sq.vectors.len());
            assert_eq!(hermforms::det_rel(&l, &p), hermforms::det_rel(&l, &q));
            assert!(is_equivalent(&l, &p, &q).is_some());
        } else {
            panic!("expected unipotent with omega entry to stabilize L");
        }
    }
}
