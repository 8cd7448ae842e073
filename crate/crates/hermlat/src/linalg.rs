//! Exact rational linear algebra: elimination, LDL^T factorization with
//! non-definiteness certificates, Fincke-Pohst lattice point enumeration,
//! and a small two-phase simplex for cone membership questions.
//!
//! Everything is over `BigRational`; no floating point enters any result
//! (floats appear only as search hints that are corrected exactly).

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{FromPrimitive, ToPrimitive};
use num::{Integer, One, Signed, Zero};

pub type Q = BigRational;

/// Rational from an integer.
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Rational p/q.
pub fn qr(p: i64, q: i64) -> Q {
    Q::new(BigInt::from(p), BigInt::from(q))
}

pub fn zeros(rows: usize, cols: usize) -> Vec<Vec<Q>> {
    vec![vec![Q::zero(); cols]; rows]
}

pub fn identity(n: usize) -> Vec<Vec<Q>> {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Q::one();
    }
    m
}

pub fn transpose(a: &[Vec<Q>]) -> Vec<Vec<Q>> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut t = zeros(a[0].len(), a.len());
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            t[j][i] = v.clone();
        }
    }
    t
}

pub fn mat_mul(a: &[Vec<Q>], b: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let (m, k) = (a.len(), b.len());
    let n = if k == 0 { 0 } else { b[0].len() };
    let mut c = zeros(m, n);
    for i in 0..m {
        debug_assert_eq!(a[i].len(), k);
        for (l, brow) in b.iter().enumerate() {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..n {
                let t = &a[i][l] * &brow[j];
                c[i][j] += t;
            }
        }
    }
    c
}

/// Row vector times matrix.
pub fn row_mat(x: &[Q], a: &[Vec<Q>]) -> Vec<Q> {
    let n = if a.is_empty() { 0 } else { a[0].len() };
    let mut out = vec![Q::zero(); n];
    for (i, xi) in x.iter().enumerate() {
        if xi.is_zero() {
            continue;
        }
        for j in 0..n {
            let t = xi * &a[i][j];
            out[j] += t;
        }
    }
    out
}

/// Matrix times column vector.
pub fn mat_vec(a: &[Vec<Q>], x: &[Q]) -> Vec<Q> {
    a.iter().map(|row| dot(row, x)).collect()
}

pub fn dot(x: &[Q], y: &[Q]) -> Q {
    debug_assert_eq!(x.len(), y.len());
    let mut s = Q::zero();
    for (a, b) in x.iter().zip(y) {
        s += a * b;
    }
    s
}

/// In-place reduced row echelon form; returns the pivot columns.
pub fn rref(rows: &mut [Vec<Q>]) -> Vec<usize> {
    let m = rows.len();
    let n = if m == 0 { 0 } else { rows[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        if r == m {
            break;
        }
        let Some(p) = (r..m).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for v in rows[r][c..].iter_mut() {
            *v *= &inv;
        }
        for i in 0..m {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in c..n {
                    let t = &f * &rows[r][j];
                    rows[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(a: &[Vec<Q>]) -> usize {
    let mut m = a.to_vec();
    rref(&mut m).len()
}

/// Basis of the right kernel {x : A x = 0}.
pub fn nullspace(a: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let n = if a.is_empty() { 0 } else { a[0].len() };
    let mut m = a.to_vec();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::new();
    for &f in &free {
        let mut x = vec![Q::zero(); n];
        x[f] = Q::one();
        for (r, &p) in pivots.iter().enumerate() {
            x[p] = -m[r][f].clone();
        }
        basis.push(x);
    }
    basis
}

pub fn inverse(a: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = a.len();
    let mut aug = zeros(n, 2 * n);
    for i in 0..n {
        debug_assert_eq!(a[i].len(), n);
        for j in 0..n {
            aug[i][j] = a[i][j].clone();
        }
        aug[i][n + i] = Q::one();
    }
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
        return None;
    }
    Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn det(a: &[Vec<Q>]) -> Q {
    let n = a.len();
    let mut m = a.to_vec();
    let mut d = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return Q::zero();
        };
        if p != c {
            m.swap(c, p);
            d = -d;
        }
        d *= &m[c][c];
        let inv = m[c][c].recip();
        for i in c + 1..n {
            if m[i][c].is_zero() {
                continue;
            }
            let f = &m[i][c] * &inv;
            for j in c..n {
                let t = &f * &m[c][j];
                m[i][j] -= t;
            }
        }
    }
    d
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Unique(Vec<Q>),
    Underdetermined,
    Inconsistent,
}

/// Solutions of A x = b for an m x n system.
pub fn solve_exact(a: &[Vec<Q>], b: &[Q]) -> SolveOutcome {
    let m = a.len();
    let n = if m == 0 { 0 } else { a[0].len() };
    let mut aug = zeros(m, n + 1);
    for i in 0..m {
        aug[i][..n].clone_from_slice(&a[i]);
        aug[i][n] = b[i].clone();
    }
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&n) {
        return SolveOutcome::Inconsistent;
    }
    if pivots.len() < n {
        return SolveOutcome::Underdetermined;
    }
    let mut x = vec![Q::zero(); n];
    for (r, &p) in pivots.iter().enumerate() {
        x[p] = aug[r][n].clone();
    }
    SolveOutcome::Unique(x)
}

/// G = L D L^T for symmetric G with L unit lower triangular. On failure
/// (G not positive definite) returns a certificate y != 0 with y^T G y <= 0.
pub fn ldl(g: &[Vec<Q>]) -> Result<(Vec<Vec<Q>>, Vec<Q>), Vec<Q>> {
    let n = g.len();
    let mut l = identity(n);
    let mut d = vec![Q::zero(); n];
    for j in 0..n {
        let mut dj = g[j][j].clone();
        for k in 0..j {
            let t = &l[j][k] * &l[j][k] * &d[k];
            dj -= t;
        }
        if dj <= Q::zero() {
            // back-substitute L_lead^T y = e_j; then y^T G y = dj <= 0
            let mut y = vec![Q::zero(); n];
            y[j] = Q::one();
            for i in (0..j).rev() {
                let mut s = Q::zero();
                for (k, yk) in y.iter().enumerate().take(j + 1).skip(i + 1) {
                    s += &l[k][i] * yk;
                }
                y[i] = -s;
            }
            return Err(y);
        }
        d[j] = dj;
        for i in j + 1..n {
            let mut x = g[i][j].clone();
            for k in 0..j {
                let t = &l[i][k] * &l[j][k] * &d[k];
                x -= t;
            }
            l[i][j] = x / &d[j];
        }
    }
    Ok((l, d))
}

pub fn is_positive_definite(g: &[Vec<Q>]) -> bool {
    ldl(g).is_ok()
}

fn isqrt(n: &BigInt) -> BigInt {
    debug_assert!(!n.is_negative());
    n.sqrt()
}

/// Largest integer k with k + s <= sqrt(rho), for rho >= 0.
fn floor_shifted_sqrt(rho: &Q, s: &Q) -> BigInt {
    let pred = |k: &BigInt| {
        let ks = Q::from_integer(k.clone()) + s;
        ks <= Q::zero() || &ks * &ks <= *rho
    };
    let mut k = match (rho.to_f64(), s.to_f64()) {
        (Some(r), Some(sf)) if r.is_finite() && sf.is_finite() => {
            BigInt::from_f64((r.sqrt() - sf).floor()).unwrap_or_else(BigInt::zero)
        }
        _ => isqrt(&rho.floor().to_integer()) - s.ceil().to_integer(),
    };
    while pred(&(&k + 1)) {
        k += 1;
    }
    while !pred(&k) {
        k -= 1;
    }
    k
}

/// All nonzero integer vectors v (one of each +-v pair, first nonzero
/// coordinate positive) with v^T G v <= bound, paired with the exact value.
/// G must be symmetric positive definite.
pub fn fincke_pohst(g: &[Vec<Q>], bound: &Q) -> Vec<(Vec<BigInt>, Q)> {
    let (out, complete) = fincke_pohst_budgeted(g, bound, usize::MAX);
    debug_assert!(complete);
    out
}

/// Bounded-effort variant of [`fincke_pohst`]: gives up after visiting
/// `max_nodes` search-tree nodes. Returns the points found so far and
/// whether the enumeration ran to completion; an incomplete run may miss
/// points but every returned pair is genuine.
pub fn fincke_pohst_budgeted(
    g: &[Vec<Q>],
    bound: &Q,
    max_nodes: usize,
) -> (Vec<(Vec<BigInt>, Q)>, bool) {
    let n = g.len();
    if *bound < Q::zero() {
        return (Vec::new(), true);
    }
    // probation pass on the given basis: LLL pays off only on skew inputs,
    // so reduce lazily once a direct sweep proves expensive
    const PROBATION: usize = 1 << 20;
    let first_cap = max_nodes.min(PROBATION);
    let (l, d) = ldl(g).expect("fincke_pohst: Gram matrix must be positive definite");
    let mut found = Vec::new();
    let mut v = vec![BigInt::zero(); n];
    let mut nodes = 0usize;
    let complete = descend(
        &l, &d, n, bound.clone(), &mut v, bound, &mut found, &mut nodes, first_cap,
    );
    if complete {
        return (found, true);
    }
    if first_cap == max_nodes {
        // the caller's whole budget is spent; the partial sweep is theirs
        return (found, false);
    }
    // retry on an LLL-reduced congruent Gram: same values, far fewer nodes
    let (u, rg) = lll_gram(g);
    let (l, d) = ldl(&rg).expect("fincke_pohst: Gram matrix must be positive definite");
    let mut found = Vec::new();
    let mut v = vec![BigInt::zero(); n];
    let mut nodes = 0usize;
    let complete = descend(
        &l, &d, n, bound.clone(), &mut v, bound, &mut found, &mut nodes, max_nodes,
    );
    let out = found
        .into_iter()
        .map(|(v, val)| {
            let mut x = vec![BigInt::zero(); n];
            for (vi, urow) in v.iter().zip(&u) {
                if !vi.is_zero() {
                    for (xj, uij) in x.iter_mut().zip(urow) {
                        *xj += vi * uij;
                    }
                }
            }
            if let Some(first) = x.iter().find(|c| !c.is_zero()) {
                if first.is_negative() {
                    for c in x.iter_mut() {
                        let neg = -&*c;
                        *c = neg;
                    }
                }
            }
            (x, val)
        })
        .collect();
    (out, complete)
}

#[allow(clippy::too_many_arguments)]
fn descend(
    l: &[Vec<Q>],
    d: &[Q],
    level: usize,
    budget: Q,
    v: &mut Vec<BigInt>,
    bound: &Q,
    out: &mut Vec<(Vec<BigInt>, Q)>,
    nodes: &mut usize,
    max_nodes: usize,
) -> bool {
    if level == 0 {
        if let Some(first) = v.iter().find(|c| !c.is_zero()) {
            if first.is_positive() {
                let value = bound - &budget;
                out.push((v.clone(), value));
            }
        }
        return true;
    }
    let i = level - 1;
    // s_i = sum_{j > i} L[j][i] v_j
    let mut s = Q::zero();
    for j in i + 1..l.len() {
        if !v[j].is_zero() {
            s += &l[j][i] * Q::from_integer(v[j].clone());
        }
    }
    let rho = &budget / &d[i];
    let hi = floor_shifted_sqrt(&rho, &s);
    let lo = -floor_shifted_sqrt(&rho, &(-&s));
    let mut k = lo;
    while k <= hi {
        *nodes += 1;
        if *nodes > max_nodes {
            return false;
        }
        let w = Q::from_integer(k.clone()) + &s;
        let cost = &d[i] * &w * &w;
        if cost <= budget {
            v[i] = k.clone();
            let done = descend(l, d, i, &budget - &cost, v, bound, out, nodes, max_nodes);
            v[i] = BigInt::zero();
            if !done {
                return false;
            }
        }
        k += 1;
    }
    true
}

/// Scale a rational vector by the positive factor that makes it integral
/// with content 1; direction is preserved.
pub fn primitive_direction(v: &[Q]) -> Vec<BigInt> {
    let mut den = BigInt::one();
    for x in v {
        den = den.lcm(x.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Q::from_integer(den.clone())).to_integer()).collect();
    let mut content = BigInt::zero();
    for x in &ints {
        content = content.gcd(x);
    }
    if content.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &content).collect()
}

/// Clear denominators: returns (integer vector, scale) with scale * v integral, scale > 0 minimal.
pub fn clear_denominators(v: &[Q]) -> (Vec<BigInt>, BigInt) {
    let mut den = BigInt::one();
    for x in v {
        den = den.lcm(x.denom());
    }
    let ints = v.iter().map(|x| (x * Q::from_integer(den.clone())).to_integer()).collect();
    (ints, den)
}

/// Nearest integer to a rational (ties round up).
fn round_q(x: &Q) -> BigInt {
    (x + qr(1, 2)).floor().to_integer()
}

/// Gram-Schmidt data of a Gram matrix: (mu, bstar) with mu unit lower
/// triangular coefficients and bstar the squared orthogonalized norms.
fn gso(gram: &[Vec<Q>]) -> (Vec<Vec<Q>>, Vec<Q>) {
    let n = gram.len();
    let mut mu = zeros(n, n);
    // r[i][j] = <b_i, b*_j>
    let mut r = zeros(n, n);
    let mut bstar = vec![Q::zero(); n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = gram[i][j].clone();
            for l in 0..j {
                s -= &mu[j][l] * &r[i][l];
            }
            r[i][j] = s;
            if j < i {
                mu[i][j] = &r[i][j] / &bstar[j];
            } else {
                bstar[i] = r[i][i].clone();
            }
        }
    }
    (mu, bstar)
}

/// b_k <- b_k - q b_j on the Gram matrix (congruence) and the basis record.
fn gram_row_op(gram: &mut [Vec<Q>], u: &mut [Vec<BigInt>], k: usize, j: usize, q: &BigInt) {
    let qq = Q::from_integer(q.clone());
    for c in 0..u[k].len() {
        let t = &u[j][c] * q;
        u[k][c] -= t;
    }
    let n = gram.len();
    let rowj = gram[j].clone();
    for c in 0..n {
        let t = &qq * &rowj[c];
        gram[k][c] -= t;
    }
    // column pass must read the row-updated column j
    for r0 in 0..n {
        let t = &qq * &gram[r0][j];
        gram[r0][k] -= t;
    }
}

/// Swap basis rows k-1 and k on the Gram matrix and the basis record.
fn gram_swap(gram: &mut [Vec<Q>], u: &mut [Vec<BigInt>], k: usize) {
    u.swap(k - 1, k);
    gram.swap(k - 1, k);
    for row in gram.iter_mut() {
        row.swap(k - 1, k);
    }
}

/// LLL-reduce a symmetric positive definite Gram matrix (delta = 3/4):
/// returns (U, U G U^T) with U unimodular over Z. Row vectors of U express
/// the reduced basis in the input basis.
pub fn lll_gram(g: &[Vec<Q>]) -> (Vec<Vec<BigInt>>, Vec<Vec<Q>>) {
    let n = g.len();
    let mut u: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect();
    let mut gram = g.to_vec();
    if n < 2 {
        return (u, gram);
    }
    let delta = qr(3, 4);
    let half = qr(1, 2);
    // fast path: a Gram that is already reduced costs one GSO pass
    {
        let (mu, bstar) = gso(&gram);
        let mut reduced = true;
        'chk: for i in 1..n {
            for j in 0..i {
                if mu[i][j].abs() > half {
                    reduced = false;
                    break 'chk;
                }
            }
            let lov = (&delta - &(&mu[i][i - 1] * &mu[i][i - 1])) * &bstar[i - 1];
            if bstar[i] < lov {
                reduced = false;
                break 'chk;
            }
        }
        if reduced {
            return (u, gram);
        }
    }
    let mut k = 1;
    while k < n {
        for j in (0..k).rev() {
            let (mu, _) = gso(&gram);
            let q = round_q(&mu[k][j]);
            if !q.is_zero() {
                gram_row_op(&mut gram, &mut u, k, j, &q);
            }
        }
        let (mu, bstar) = gso(&gram);
        let lov = (&delta - &(&mu[k][k - 1] * &mu[k][k - 1])) * &bstar[k - 1];
        if bstar[k] >= lov {
            k += 1;
        } else {
            gram_swap(&mut gram, &mut u, k);
            k = if k > 1 { k - 1 } else { 1 };
        }
    }
    (u, gram)
}

#[derive(Debug, Clone)]
pub enum LpOutcome {
    /// Minimizer x, objective value, and equality-constraint duals y = c_B B^{-1}.
    Optimal { x: Vec<Q>, objective: Q, duals: Vec<Q> },
    /// Farkas certificate y: y^T A <= 0 componentwise and y^T b > 0.
    Infeasible { farkas: Vec<Q> },
    Unbounded,
}

/// min c.x subject to A x = b, x >= 0 (two-phase simplex, Bland's rule).
pub fn lp_minimize(a: &[Vec<Q>], b: &[Q], c: &[Q]) -> LpOutcome {
    let m = a.len();
    let n = if m == 0 { 0 } else { a[0].len() };
    debug_assert_eq!(c.len(), n);
    // rows with b < 0 are negated so artificial start is feasible
    let mut arows: Vec<Vec<Q>> = Vec::with_capacity(m);
    let mut brhs: Vec<Q> = Vec::with_capacity(m);
    for i in 0..m {
        if b[i] < Q::zero() {
            arows.push(a[i].iter().map(|x| -x.clone()).collect());
            brhs.push(-b[i].clone());
        } else {
            arows.push(a[i].clone());
            brhs.push(b[i].clone());
        }
    }
    // full column set: original 0..n, artificial n..n+m
    let col = |j: usize, i: usize| -> Q {
        if j < n {
            arows[i][j].clone()
        } else if j - n == i {
            Q::one()
        } else {
            Q::zero()
        }
    };
    let mut basis: Vec<usize> = (n..n + m).collect();

    let run_phase = |basis: &mut Vec<usize>, cost: &dyn Fn(usize) -> Q, allow: &dyn Fn(usize) -> bool| -> Option<(Vec<Q>, Q, Vec<Q>)> {
        loop {
            let bmat: Vec<Vec<Q>> = (0..m)
                .map(|i| basis.iter().map(|&j| col(j, i)).collect())
                .collect();
            let binv = inverse(&bmat).expect("simplex basis must be invertible");
            let xb = mat_vec(&binv, &brhs);
            let cb: Vec<Q> = basis.iter().map(|&j| cost(j)).collect();
            let y = row_mat(&cb, &binv);
            // entering: smallest index with negative reduced cost
            let mut entering = None;
            for j in 0..n + m {
                if basis.contains(&j) || !allow(j) {
                    continue;
                }
                let aj: Vec<Q> = (0..m).map(|i| col(j, i)).collect();
                let cbar = cost(j) - dot(&y, &aj);
                if cbar < Q::zero() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else {
                let mut x = vec![Q::zero(); n + m];
                for (i, &bj) in basis.iter().enumerate() {
                    x[bj] = xb[i].clone();
                }
                let obj = dot(&cb, &xb);
                return Some((x, obj, y));
            };
            let aj: Vec<Q> = (0..m).map(|i| col(j, i)).collect();
            let dir = mat_vec(&binv, &aj);
            let mut leave: Option<(usize, Q)> = None;
            for i in 0..m {
                if dir[i] > Q::zero() {
                    let ratio = &xb[i] / &dir[i];
                    match &leave {
                        None => leave = Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < *lr || (ratio == *lr && basis[i] < basis[*li]) {
                                leave = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            let Some((li, _)) = leave else {
                return None; // unbounded
            };
            basis[li] = j;
        }
    };

    // phase 1: minimize sum of artificials
    let phase1_cost = |j: usize| if j >= n { Q::one() } else { Q::zero() };
    let allow_all = |_j: usize| true;
    let Some((_, obj1, y1)) = run_phase(&mut basis, &phase1_cost, &allow_all) else {
        unreachable!("phase 1 is bounded below by 0");
    };
    if obj1 > Q::zero() {
        // y1^T (row-flipped A) <= 0; undo the row flips for the caller's A
        let mut farkas = y1;
        for i in 0..m {
            if b[i] < Q::zero() {
                farkas[i] = -farkas[i].clone();
            }
        }
        return LpOutcome::Infeasible { farkas };
    }
    // phase 2: original costs, artificials barred from entering
    let phase2_cost = |j: usize| if j < n { c[j].clone() } else { Q::zero() };
    let allow_orig = |j: usize| j < n;
    let Some((x, obj2, y2)) = run_phase(&mut basis, &phase2_cost, &allow_orig) else {
        return LpOutcome::Unbounded;
    };
    let mut duals = y2;
    for i in 0..m {
        if b[i] < Q::zero() {
            duals[i] = -duals[i].clone();
        }
    }
    LpOutcome::Optimal { x: x[..n].to_vec(), objective: obj2, duals }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qm(rows: &[&[i64]]) -> Vec<Vec<Q>> {
        rows.iter().map(|r| r.iter().map(|&x| qi(x)).collect()).collect()
    }

    #[test]
    fn inverse_roundtrip() {
        let a = qm(&[&[2, 1], &[7, 4]]);
        let inv = inverse(&a).unwrap();
        assert_eq!(mat_mul(&a, &inv), identity(2));
    }

    #[test]
    fn det_and_rank() {
        let a = qm(&[&[2, 1], &[7, 4]]);
        assert_eq!(det(&a), qi(1));
        assert_eq!(rank(&a), 2);
        let b = qm(&[&[1, 2], &[2, 4]]);
        assert_eq!(det(&b), qi(0));
        assert_eq!(rank(&b), 1);
    }

    #[test]
    fn nullspace_of_rank_one() {
        let a = qm(&[&[1, 2], &[2, 4]]);
        let ns = nullspace(&a);
        assert_eq!(ns.len(), 1);
        assert!(mat_vec(&a, &ns[0]).iter().all(|v| v.is_zero()));
    }

    #[test]
    fn solve_outcomes() {
        let a = qm(&[&[1, 1], &[1, -1]]);
        assert_eq!(
            solve_exact(&a, &[qi(3), qi(1)]),
            SolveOutcome::Unique(vec![qi(2), qi(1)])
        );
        let s = qm(&[&[1, 2], &[2, 4]]);
        assert_eq!(solve_exact(&s, &[qi(1), qi(2)]), SolveOutcome::Underdetermined);
        assert_eq!(solve_exact(&s, &[qi(1), qi(3)]), SolveOutcome::Inconsistent);
    }

    #[test]
    fn ldl_definite_and_certificate() {
        let g = qm(&[&[2, 1], &[1, 3]]);
        let (l, d) = ldl(&g).unwrap();
        // reassemble
        let mut dm = zeros(2, 2);
        dm[0][0] = d[0].clone();
        dm[1][1] = d[1].clone();
        assert_eq!(mat_mul(&mat_mul(&l, &dm), &transpose(&l)), g);

        let ind = qm(&[&[1, 2], &[2, 1]]);
        let y = ldl(&ind).unwrap_err();
        let val = dot(&row_mat(&y, &ind), &y);
        assert!(val <= Q::zero());
        assert!(y.iter().any(|v| !v.is_zero()));
    }

    #[test]
    fn fincke_pohst_identity_counts() {
        // x^2 + y^2 <= 4: nonzero up-to-sign solutions
        let g = qm(&[&[1, 0], &[0, 1]]);
        let pts = fincke_pohst(&g, &qi(4));
        // (1,0),(0,1),(1,1),(1,-1),(2,0),(0,2) -> 6 up to sign
        assert_eq!(pts.len(), 6);
        for (v, val) in &pts {
            let x = Q::from_integer(v[0].clone());
            let y = Q::from_integer(v[1].clone());
            assert_eq!(&x * &x + &y * &y, *val);
            assert!(*val <= qi(4) && *val > Q::zero());
        }
    }

    #[test]
    fn fincke_pohst_skewed() {
        // 2x^2 + 2xy + 3y^2 <= 8
        let g = qm(&[&[2, 1], &[1, 3]]);
        let pts = fincke_pohst(&g, &qi(8));
        let mut brute = 0;
        for x in -4i64..=4 {
            for y in -4i64..=4 {
                if (x, y) == (0, 0) {
                    continue;
                }
                if 2 * x * x + 2 * x * y + 3 * y * y <= 8 {
                    brute += 1;
                }
            }
        }
        assert_eq!(2 * pts.len(), brute);
    }

    #[test]
    fn lll_gram_congruence_and_agreement() {
        // a deliberately skew pd Gram: x^2 + (10x + y)^2 scaled
        let g = qm(&[&[101, 10], &[10, 1]]);
        let (u, rg) = lll_gram(&g);
        // U is integral with det +-1 and rg = U g U^T
        let uq: Vec<Vec<Q>> = u
            .iter()
            .map(|r| r.iter().map(|x| Q::from_integer(x.clone())).collect())
            .collect();
        let du = det(&uq);
        assert!(du == qi(1) || du == qi(-1));
        assert_eq!(mat_mul(&mat_mul(&uq, &g), &transpose(&uq)), rg);
        // reduced diagonal is smaller than the input's
        assert!(rg[0][0] <= g[1][1]);

        // enumeration through the reduced form returns the same point set
        let pts = fincke_pohst(&g, &qi(9));
        let mut brute: Vec<(Vec<BigInt>, Q)> = Vec::new();
        for x in -20i64..=20 {
            for y in -220i64..=220 {
                if (x, y) == (0, 0) || x < 0 || (x == 0 && y < 0) {
                    continue;
                }
                let val = 101 * x * x + 20 * x * y + y * y;
                if (0..=9).contains(&val) {
                    brute.push((vec![BigInt::from(x), BigInt::from(y)], qi(val)));
                }
            }
        }
        let mut got = pts.clone();
        got.sort();
        brute.sort();
        assert_eq!(got, brute);
    }

    #[test]
    fn simplex_basic() {
        // min -x1 - x2  s.t. x1 + x2 + s = 1, x >= 0 -> obj -1
        let a = qm(&[&[1, 1, 1]]);
        match lp_minimize(&a, &[qi(1)], &[qi(-1), qi(-1), qi(0)]) {
            LpOutcome::Optimal { objective, .. } => assert_eq!(objective, qi(-1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn simplex_infeasible_farkas() {
        // x1 + x2 = -1, x >= 0 is infeasible
        let a = qm(&[&[1, 1]]);
        match lp_minimize(&a, &[qi(-1)], &[qi(0), qi(0)]) {
            LpOutcome::Infeasible { farkas } => {
                // farkas^T A <= 0 and farkas . b > 0
                assert!(farkas[0].clone() * qi(1) <= Q::zero());
                assert!(&farkas[0] * &qi(-1) > Q::zero());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn simplex_unbounded() {
        // min -x1 s.t. x1 - x2 = 0: x1 = x2 -> -infinity
        let a = qm(&[&[1, -1]]);
        match lp_minimize(&a, &[qi(0)], &[qi(-1), qi(0)]) {
            LpOutcome::Unbounded => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn primitive_direction_scales() {
        let v = vec![qr(2, 3), qr(-4, 3), qi(2)];
        assert_eq!(
            primitive_direction(&v),
            vec![BigInt::from(1), BigInt::from(-2), BigInt::from(3)]
        );
    }
}
