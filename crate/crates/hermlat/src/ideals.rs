//! Fractional ideals of O_K as rank-2 Z-modules in Hermite normal form,
//! the class group with fixed minimal-norm integral representatives, and
//! the double-coset reduction that picks which lattices L_i to enumerate.

use crate::linalg::{qi, Q};
use crate::qfield::{FieldError, KElem, OmegaKind, QuadField};
use num::bigint::BigInt;
use num::{Integer, One, Signed, Zero};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdealError {
    ZeroIdeal,
    NotFullRank,
}

impl fmt::Display for IdealError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdealError::ZeroIdeal => write!(f, "zero ideal"),
            IdealError::NotFullRank => write!(f, "generators do not span a rank-2 module"),
        }
    }
}

impl std::error::Error for IdealError {}

/// Fractional ideal as a Z-module with HNF basis rows (in {1, omega} coords)
/// r1 = (a, 0), r2 = (b, c) where a, c > 0 and 0 <= b < a.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FracIdeal {
    rows: [[Q; 2]; 2],
}

fn hnf_two_cols(rows_in: &[[Q; 2]]) -> Result<[[Q; 2]; 2], IdealError> {
    let mut den = BigInt::one();
    for r in rows_in {
        for v in r {
            den = den.lcm(v.denom());
        }
    }
    let dq = Q::from_integer(den.clone());
    let mut rows: Vec<[BigInt; 2]> = rows_in
        .iter()
        .map(|r| [(&r[0] * &dq).to_integer(), (&r[1] * &dq).to_integer()])
        .filter(|r| !r[0].is_zero() || !r[1].is_zero())
        .collect();
    // reduce the omega column to a single nonzero entry by Euclid
    loop {
        let mut nz: Vec<usize> = (0..rows.len()).filter(|&i| !rows[i][1].is_zero()).collect();
        if nz.len() <= 1 {
            break;
        }
        nz.sort_by_key(|&i| rows[i][1].abs());
        let p = nz[0];
        let (pa, pb) = (rows[p][0].clone(), rows[p][1].clone());
        for &i in &nz[1..] {
            let q = &rows[i][1] / &pb;
            rows[i][0] -= &q * &pa;
            rows[i][1] -= &q * &pb;
        }
        rows.retain(|r| !r[0].is_zero() || !r[1].is_zero());
    }
    let omega_row = rows.iter().position(|r| !r[1].is_zero());
    let Some(oi) = omega_row else {
        return Err(IdealError::NotFullRank);
    };
    let (mut b, mut c) = (rows[oi][0].clone(), rows[oi][1].clone());
    if c.is_negative() {
        b = -b;
        c = -c;
    }
    let mut a = BigInt::zero();
    for (i, r) in rows.iter().enumerate() {
        if i != oi {
            a = a.gcd(&r[0]);
        }
    }
    if a.is_zero() {
        return Err(IdealError::NotFullRank);
    }
    b = b.mod_floor(&a);
    let dq = Q::from_integer(den);
    Ok([
        [Q::from_integer(a) / &dq, Q::zero()],
        [Q::from_integer(b) / &dq, Q::from_integer(c) / &dq],
    ])
}

impl FracIdeal {
    /// The Z-span of the given rows, which the caller guarantees is an
    /// O_K-module (spans built from ideal arithmetic always are).
    pub fn from_z_rows(rows: &[[Q; 2]]) -> Result<FracIdeal, IdealError> {
        Ok(FracIdeal { rows: hnf_two_cols(rows)? })
    }

    /// The O_K-module generated by the given field elements.
    pub fn from_gens(k: &QuadField, gens: &[KElem]) -> Result<FracIdeal, IdealError> {
        if gens.iter().all(|g| g.is_zero()) {
            return Err(IdealError::ZeroIdeal);
        }
        let w = k.omega();
        let mut rows = Vec::with_capacity(2 * gens.len());
        for g in gens {
            rows.push([g.a.clone(), g.b.clone()]);
            let gw = k.mul(g, &w);
            rows.push([gw.a.clone(), gw.b.clone()]);
        }
        FracIdeal::from_z_rows(&rows)
    }

    pub fn principal(k: &QuadField, x: &KElem) -> Result<FracIdeal, IdealError> {
        FracIdeal::from_gens(k, std::slice::from_ref(x))
    }

    pub fn one() -> FracIdeal {
        FracIdeal {
            rows: [[Q::one(), Q::zero()], [Q::zero(), Q::one()]],
        }
    }

    /// HNF basis (g1, g2) as field elements: g1 = (a, 0), g2 = (b, c).
    pub fn basis(&self) -> [KElem; 2] {
        [
            KElem::new(self.rows[0][0].clone(), Q::zero()),
            KElem::new(self.rows[1][0].clone(), self.rows[1][1].clone()),
        ]
    }

    pub fn hnf_rows(&self) -> &[[Q; 2]; 2] {
        &self.rows
    }

    pub fn norm(&self) -> Q {
        (&self.rows[0][0] * &self.rows[1][1]).abs()
    }

    pub fn contains(&self, x: &KElem) -> bool {
        let beta = &x.b / &self.rows[1][1];
        if !beta.is_integer() {
            return false;
        }
        let alpha = (&x.a - &beta * &self.rows[1][0]) / &self.rows[0][0];
        alpha.is_integer()
    }

    pub fn is_integral(&self) -> bool {
        self.rows.iter().flatten().all(|v| v.is_integer())
    }

    /// The span is closed under multiplication by omega; true for every
    /// value produced by ideal arithmetic, checked explicitly in tests.
    pub fn is_ok_module(&self, k: &QuadField) -> bool {
        let w = k.omega();
        self.basis().iter().all(|g| self.contains(&k.mul(g, &w)))
    }

    pub fn mul_elem(&self, k: &QuadField, x: &KElem) -> Result<FracIdeal, IdealError> {
        if x.is_zero() {
            return Err(IdealError::ZeroIdeal);
        }
        let rows: Vec<[Q; 2]> = self
            .basis()
            .iter()
            .map(|g| {
                let y = k.mul(g, x);
                [y.a, y.b]
            })
            .collect();
        FracIdeal::from_z_rows(&rows)
    }

    pub fn mul(&self, k: &QuadField, other: &FracIdeal) -> FracIdeal {
        let mut rows = Vec::with_capacity(4);
        for g in self.basis().iter() {
            for h in other.basis().iter() {
                let y = k.mul(g, h);
                rows.push([y.a, y.b]);
            }
        }
        FracIdeal::from_z_rows(&rows).expect("product of nonzero ideals is nonzero")
    }

    pub fn add(&self, other: &FracIdeal) -> FracIdeal {
        let mut rows = Vec::with_capacity(4);
        for g in [&self.rows, &other.rows] {
            for r in g.iter() {
                rows.push(r.clone());
            }
        }
        FracIdeal::from_z_rows(&rows).expect("sum of nonzero ideals is nonzero")
    }

    pub fn conj(&self, k: &QuadField) -> FracIdeal {
        let rows: Vec<[Q; 2]> = self
            .basis()
            .iter()
            .map(|g| {
                let y = k.conj(g);
                [y.a, y.b]
            })
            .collect();
        FracIdeal::from_z_rows(&rows).expect("conjugate of nonzero ideal is nonzero")
    }

    /// Inverse via I * conj(I) = N(I) O_K.
    pub fn inv(&self, k: &QuadField) -> FracIdeal {
        let n = self.norm();
        let c = self.conj(k);
        let rows: Vec<[Q; 2]> = c.rows.iter().map(|r| [&r[0] / &n, &r[1] / &n]).collect();
        FracIdeal::from_z_rows(&rows).expect("inverse of nonzero ideal is nonzero")
    }

    /// A generator when the ideal is principal: the finite search over
    /// elements of norm N(I) (such an element generates, since the index
    /// of (x) in I is N(x)/N(I)).
    pub fn principal_gen(&self, k: &QuadField) -> Option<KElem> {
        let [g1, g2] = self.basis();
        let n = self.norm();
        let t12 = k.trace(&k.mul(&g1, &k.conj(&g2)));
        let gram = vec![
            vec![k.norm(&g1), &t12 / qi(2)],
            vec![&t12 / qi(2), k.norm(&g2)],
        ];
        for (v, value) in crate::linalg::fincke_pohst(&gram, &n) {
            if value == n {
                let x = g1
                    .scale(&Q::from_integer(v[0].clone()))
                    .add(&g2.scale(&Q::from_integer(v[1].clone())));
                debug_assert!(FracIdeal::principal(k, &x).unwrap() == *self);
                return Some(x);
            }
        }
        None
    }

    /// Render as a Z-module basis, e.g. "<2, 1+sqrt(-5)>".
    pub fn fmt_ideal(&self, k: &QuadField) -> String {
        let [g1, g2] = self.basis();
        format!("<{}, {}>", k.fmt_elem(&g1), k.fmt_elem(&g2))
    }
}

/// The ideal class group with fixed integral minimal-norm representatives;
/// reps[0] is always O_K.
#[derive(Debug, Clone)]
pub struct ClassGroup {
    field: QuadField,
    reps: Vec<FracIdeal>,
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
}

/// Reduced primitive binary quadratic forms (a, b, c) of discriminant disc.
fn reduced_forms(disc: &BigInt) -> Vec<(i64, i64, i64)> {
    let disc: i64 = disc.to_string().parse().expect("desk-scale discriminant");
    assert!(disc < 0);
    let mut out = Vec::new();
    let bound = ((-disc) as f64 / 3.0).sqrt() as i64 + 2;
    for b in 0..=bound {
        if (b * b - disc) % 4 != 0 {
            continue;
        }
        if b * b > -disc {
            break;
        }
        let m = (b * b - disc) / 4;
        let mut a = if b == 0 { 1 } else { b };
        while a * a <= m {
            if a != 0 && m % a == 0 {
                let c = m / a;
                // reduced: |b| <= a <= c, primitive, and sign rules
                if a >= b && gcd3(a, b, c) == 1 {
                    out.push((a, b, c));
                    if b > 0 && b < a && a < c {
                        out.push((a, -b, c));
                    }
                }
            }
            a += 1;
        }
    }
    out
}

fn gcd3(a: i64, b: i64, c: i64) -> i64 {
    let g = a.abs().gcd(&b.abs());
    g.gcd(&c.abs())
}

/// The ideal Z a + Z ((-b + sqrt(disc))/2) attached to the form (a, b, _).
fn form_to_ideal(k: &QuadField, a: i64, b: i64) -> FracIdeal {
    let beta0 = match k.omega_kind() {
        OmegaKind::SqrtMinusD => {
            debug_assert_eq!(b.rem_euclid(2), 0);
            -b / 2
        }
        OmegaKind::HalfOnePlusSqrtMinusD => {
            debug_assert_eq!(b.rem_euclid(2), 1);
            (-b - 1) / 2
        }
    };
    FracIdeal::from_z_rows(&[
        [qi(a), Q::zero()],
        [qi(beta0), Q::one()],
    ])
    .expect("form ideal has full rank")
}

/// Integral ideals of O_K with the given norm, in HNF lex order.
fn integral_ideals_of_norm(k: &QuadField, n: i64) -> Vec<FracIdeal> {
    let mut out = Vec::new();
    for a in 1..=n {
        if n % a != 0 {
            continue;
        }
        let c = n / a;
        for b in 0..a {
            let cand = FracIdeal {
                rows: [[qi(a), Q::zero()], [qi(b), qi(c)]],
            };
            if cand.is_ok_module(k) {
                out.push(cand);
            }
        }
    }
    out
}

impl ClassGroup {
    pub fn new(field: QuadField) -> ClassGroup {
        let forms = reduced_forms(field.discriminant());
        let class_ideals: Vec<FracIdeal> = forms
            .iter()
            .map(|&(a, b, _)| form_to_ideal(&field, a, b))
            .collect();
        let h = class_ideals.len();
        // minimal-norm integral representative per class, ties broken by
        // lex order on the HNF matrix
        let mut reps = Vec::with_capacity(h);
        for cls in &class_ideals {
            let cls_inv = cls.inv(&field);
            let mut norm = 1i64;
            let rep = 'found: loop {
                for cand in integral_ideals_of_norm(&field, norm) {
                    if cand.mul(&field, &cls_inv).principal_gen(&field).is_some() {
                        break 'found cand;
                    }
                }
                norm += 1;
            };
            reps.push(rep);
        }
        reps.sort_by(|x, y| {
            (x.norm(), x.hnf_rows().clone()).cmp(&(y.norm(), y.hnf_rows().clone()))
        });
        debug_assert_eq!(reps[0], FracIdeal::one());
        // group table via principality of rep_i rep_j rep_k^{-1}
        let mut table = vec![vec![usize::MAX; h]; h];
        for i in 0..h {
            for j in i..h {
                let prod = reps[i].mul(&field, &reps[j]);
                let kidx = (0..h)
                    .find(|&k| {
                        prod.mul(&field, &reps[k].inv(&field))
                            .principal_gen(&field)
                            .is_some()
                    })
                    .expect("class group is closed");
                table[i][j] = kidx;
                table[j][i] = kidx;
            }
        }
        let inverse = (0..h)
            .map(|i| (0..h).find(|&j| table[i][j] == 0).expect("inverses exist"))
            .collect();
        ClassGroup { field, reps, table, inverse }
    }

    pub fn from_d(d: u64) -> Result<ClassGroup, FieldError> {
        Ok(ClassGroup::new(QuadField::new(d)?))
    }

    pub fn field(&self) -> &QuadField {
        &self.field
    }

    pub fn h(&self) -> usize {
        self.reps.len()
    }

    pub fn rep(&self, i: usize) -> &FracIdeal {
        &self.reps[i]
    }

    pub fn reps(&self) -> &[FracIdeal] {
        &self.reps
    }

    pub fn mul_classes(&self, i: usize, j: usize) -> usize {
        self.table[i][j]
    }

    pub fn inv_class(&self, i: usize) -> usize {
        self.inverse[i]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    /// max_j N(a_j) over the fixed representatives: the global search bound
    /// used by minimal-vector enumeration.
    pub fn m_tilde(&self) -> Q {
        self.reps.iter().map(|r| r.norm()).max().expect("nonempty")
    }

    /// Class index j and scalar alpha with alpha * ideal = reps[j].
    pub fn class_of(&self, ideal: &FracIdeal) -> (usize, KElem) {
        let inv = ideal.inv(&self.field);
        for (j, rep) in self.reps.iter().enumerate() {
            if let Some(alpha) = rep.mul(&self.field, &inv).principal_gen(&self.field) {
                debug_assert!(ideal.mul_elem(&self.field, &alpha).unwrap() == *rep);
                return (j, alpha);
            }
        }
        unreachable!("every ideal lies in some class");
    }

    /// Orbit representatives of classes under c -> c * p^n and
    /// c -> conj(c) * p^n = c^{-1} * p^n; the lattices O_K^{n-1} + a_j for
    /// these j cover all isomorphism-and-duality types needed for gamma.
    pub fn lattice_class_reps(&self, n: usize) -> Vec<usize> {
        assert!(n >= 2);
        let h = self.h();
        // subgroup of n-th powers
        let mut pow_subgroup: Vec<usize> = (0..h)
            .map(|p| {
                let mut acc = 0usize;
                for _ in 0..n {
                    acc = self.table[acc][p];
                }
                acc
            })
            .collect();
        pow_subgroup.sort_unstable();
        pow_subgroup.dedup();
        let mut seen = vec![false; h];
        let mut reps = Vec::new();
        for c in 0..h {
            if seen[c] {
                continue;
            }
            reps.push(c);
            for &p in &pow_subgroup {
                seen[self.table[c][p]] = true;
                seen[self.table[self.inverse[c]][p]] = true;
            }
        }
        reps
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::qr;

    fn k(d: u64) -> QuadField {
        QuadField::new(d).unwrap()
    }

    fn gens_sqrt(k: &QuadField, gens: &[(i64, i64)]) -> FracIdeal {
        let elems: Vec<KElem> = gens
            .iter()
            .map(|&(u, v)| k.from_sqrt_basis(&qi(u), &qi(v)))
            .collect();
        FracIdeal::from_gens(k, &elems).unwrap()
    }

    #[test]
    fn unit_ideal() {
        let k5 = k(5);
        let one = gens_sqrt(&k5, &[(1, 0)]);
        assert_eq!(one, FracIdeal::one());
        assert_eq!(one.norm(), qi(1));
    }

    #[test]
    fn norms_of_named_ideals() {
        let k5 = k(5);
        let p2 = gens_sqrt(&k5, &[(2, 0), (1, 1)]);
        assert_eq!(p2.norm(), qi(2));
        assert!(p2.is_integral());
        assert!(p2.is_ok_module(&k5));

        let k21 = k(21);
        let p3 = gens_sqrt(&k21, &[(3, 0), (0, 1)]);
        assert_eq!(p3.norm(), qi(3));
    }

    #[test]
    fn ideal_arithmetic() {
        let k5 = k(5);
        let p2 = gens_sqrt(&k5, &[(2, 0), (1, 1)]);
        let two = gens_sqrt(&k5, &[(2, 0)]);
        assert_eq!(p2.mul(&k5, &p2), two);
        assert_eq!(p2.mul(&k5, &FracIdeal::one()), p2);
        assert_eq!(p2.inv(&k5).norm(), qr(1, 2));
        assert_eq!(p2.mul(&k5, &p2.inv(&k5)), FracIdeal::one());
        assert_eq!(p2.mul(&k5, &p2.conj(&k5)), two);
        // norm multiplicativity
        let p3 = gens_sqrt(&k5, &[(3, 0), (1, 1)]);
        assert_eq!(p2.mul(&k5, &p3).norm(), p2.norm() * p3.norm());
    }

    #[test]
    fn principality() {
        let k5 = k(5);
        let seven = gens_sqrt(&k5, &[(7, 0)]);
        let g = seven.principal_gen(&k5).unwrap();
        assert_eq!(k5.norm(&g).abs(), qi(49));
        let p2 = gens_sqrt(&k5, &[(2, 0), (1, 1)]);
        assert!(p2.principal_gen(&k5).is_none());
    }

    #[test]
    fn class_numbers() {
        for (d, h) in [
            (1u64, 1usize),
            (2, 1),
            (3, 1),
            (5, 2),
            (6, 2),
            (7, 1),
            (10, 2),
            (13, 2),
            (14, 4),
            (15, 2),
            (19, 1),
            (21, 4),
            (23, 3),
        ] {
            assert_eq!(ClassGroup::from_d(d).unwrap().h(), h, "d = {d}");
        }
    }

    #[test]
    fn class_group_d23_cyclic() {
        let cg = ClassGroup::from_d(23).unwrap();
        assert_eq!(cg.h(), 3);
        // cyclic of order 3: some class generates
        let a = 1usize;
        let a2 = cg.mul_classes(a, a);
        assert_ne!(a2, a);
        assert_ne!(a2, 0);
        assert_eq!(cg.mul_classes(a2, a), 0);
        assert_eq!(cg.inv_class(a), a2);
    }

    #[test]
    fn class_group_d21_reps() {
        let cg = ClassGroup::from_d(21).unwrap();
        let k21 = cg.field().clone();
        assert_eq!(cg.h(), 4);
        // norms 1, 2, 3, 5; the norm-5 class contains conjugate ideals
        // <5, 2+sqrt(-21)> and <5, 3+sqrt(-21)>, lex picks the former
        let expect = [
            FracIdeal::one(),
            gens_sqrt(&k21, &[(2, 0), (-1, 1)]),
            gens_sqrt(&k21, &[(3, 0), (0, 1)]),
            gens_sqrt(&k21, &[(5, 0), (2, 1)]),
        ];
        for e in &expect {
            assert!(cg.reps().contains(e), "missing rep {:?}", e.fmt_ideal(&k21));
        }
        // the paper-style generator set <5, sqrt(-21)-2> lands in the same class
        let conj5 = gens_sqrt(&k21, &[(5, 0), (-2, 1)]);
        assert_eq!(cg.class_of(&conj5).0, cg.class_of(&expect[3]).0);
        // Klein four group: every nontrivial class has order 2
        for i in 1..4 {
            assert_eq!(cg.mul_classes(i, i), 0);
        }
    }

    #[test]
    fn class_group_d15_rep() {
        let cg = ClassGroup::from_d(15).unwrap();
        assert_eq!(cg.h(), 2);
        let k15 = cg.field().clone();
        // two conjugate norm-2 ideals share the nontrivial class:
        // <2, omega> and <2, omega - 1>; lex on HNF rows picks <2, omega>
        let w = k15.omega();
        let a2 = FracIdeal::from_gens(&k15, &[KElem::from_int(2), w.clone()]).unwrap();
        let a2c = FracIdeal::from_gens(&k15, &[KElem::from_int(2), w.sub(&KElem::one())]).unwrap();
        assert_eq!(cg.rep(1), &a2);
        assert_eq!(cg.class_of(&a2c).0, 1);
        assert_eq!(cg.m_tilde(), qi(2));
    }

    #[test]
    fn class_of_examples() {
        let k5 = k(5);
        let cg = ClassGroup::new(k5.clone());
        let seven = gens_sqrt(&k5, &[(7, 0)]);
        assert_eq!(cg.class_of(&seven).0, 0);
        let q3 = gens_sqrt(&k5, &[(3, 0), (1, 1)]);
        let p2 = gens_sqrt(&k5, &[(2, 0), (1, 1)]);
        assert_eq!(cg.class_of(&q3).0, cg.class_of(&p2).0);
        let (j, alpha) = cg.class_of(&q3);
        assert_eq!(q3.mul_elem(&k5, &alpha).unwrap(), *cg.rep(j));

        // d=23: a^2 lands in the remaining nontrivial class
        let cg23 = ClassGroup::from_d(23).unwrap();
        let a = cg23.rep(1).clone();
        let a2 = a.mul(cg23.field(), &a);
        let cls = cg23.class_of(&a2).0;
        assert_eq!(cls, cg23.inv_class(1));
        assert_ne!(cls, 1);
        assert_ne!(cls, 0);
    }

    #[test]
    fn class_of_is_homomorphic() {
        let cg = ClassGroup::from_d(23).unwrap();
        let kf = cg.field().clone();
        for i in 0..cg.h() {
            for j in 0..cg.h() {
                let prod = cg.rep(i).mul(&kf, cg.rep(j));
                assert_eq!(cg.class_of(&prod).0, cg.mul_classes(i, j));
            }
        }
    }

    #[test]
    fn lattice_reps_orbits() {
        // d=23, n=2: single orbit (free lattice only)
        assert_eq!(ClassGroup::from_d(23).unwrap().lattice_class_reps(2), vec![0]);
        // d=15, n=2: both classes needed
        assert_eq!(ClassGroup::from_d(15).unwrap().lattice_class_reps(2).len(), 2);
        // d=21, n=2: Klein four group, all four lattices
        assert_eq!(ClassGroup::from_d(21).unwrap().lattice_class_reps(2).len(), 4);
        // cyclic C_4 (d=14): gcd(4, 2) = 2 orbits
        assert_eq!(ClassGroup::from_d(14).unwrap().lattice_class_reps(2).len(), 2);
        // n=3 with h=2: gcd(2,3) = 1 orbit
        assert_eq!(ClassGroup::from_d(15).unwrap().lattice_class_reps(3), vec![0]);
        assert_eq!(ClassGroup::from_d(5).unwrap().lattice_class_reps(3), vec![0]);
    }

    #[test]
    fn reps_are_pairwise_inequivalent() {
        for d in [5u64, 15, 21, 23] {
            let cg = ClassGroup::from_d(d).unwrap();
            let kf = cg.field().clone();
            for i in 0..cg.h() {
                assert!(cg.rep(i).is_integral());
                for j in 0..cg.h() {
                    if i != j {
                        let quot = cg.rep(i).mul(&kf, &cg.rep(j).inv(&kf));
                        assert!(quot.principal_gen(&kf).is_none(), "d={d} {i} {j}");
                    }
                }
            }
        }
    }
}
