//! The Voronoi walk over an O_K-lattice: stepping from a perfect form
//! through a facet of its Voronoi domain to the contiguous perfect form,
//! finding a first perfect form from the identity, breadth-first
//! enumeration of all perfect classes up to GL(L)-equivalence, and the
//! weighted class graph with its Hermite-constant maximizers.

use crate::cones::{self, ConeError, PolyCone};
use crate::hermforms::{
    canonical_minvec, det_rel, hermite_invariant, minimum_and_minvecs, perfection_rank, FormError,
    HermForm, MinVecSet,
};
use crate::ideals::ClassGroup;
use crate::isometry::{aut_group, is_equivalent, AutGroup};
use crate::jsonio;
use crate::kmat::KMat;
use crate::lattice::{LatticeError, OKLattice};
use crate::linalg::{self, Q};
use crate::qfield::KElem;
use num::{One, Zero};
use serde_json::{json, Value};
use std::collections::{BTreeMap, VecDeque};
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Probe budget for one advance; exceeding it means a broken invariant,
/// since every probe after the first non-interior one lands on an exact
/// crossing root and makes strict progress.
const PROBE_CAP: usize = 10_000;

/// Initial node budget for one probe's vector enumeration; doubled each
/// time a probe comes back inconclusive.
const NODE_CAP_BASE: usize = 4_096;

/// Errors of the Voronoi walk and enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VoronoiError {
    /// A form operation failed.
    Form(FormError),
    /// Facet enumeration failed.
    Cone(ConeError),
    /// A lattice operation failed.
    Lattice(LatticeError),
    /// The direction is negative on a minimal vector, or vanishes on none
    /// of them; it does not point along a face of the minimum locus.
    NotFacetVector,
    /// The direction is positive semidefinite, so the minimum never drops
    /// and no contiguous form exists along it.
    UnboundedDirection,
    /// The exact root search did not settle within the probe budget.
    ProbeStalled,
    /// The lattice rank is below 2.
    RankTooSmall,
    /// The class or time budget ran out; a checkpoint was written when one
    /// was configured.
    BudgetExhausted {
        /// Number of classes discovered so far.
        discovered: usize,
    },
    /// Checkpoint file I/O or parse failure.
    Checkpoint(String),
}

impl std::fmt::Display for VoronoiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VoronoiError::Form(e) => write!(f, "form error: {e}"),
            VoronoiError::Cone(e) => write!(f, "cone error: {e}"),
            VoronoiError::Lattice(e) => write!(f, "lattice error: {e}"),
            VoronoiError::NotFacetVector => write!(f, "direction is not a facet vector"),
            VoronoiError::UnboundedDirection => {
                write!(f, "direction is positive semidefinite; no boundary is hit")
            }
            VoronoiError::ProbeStalled => write!(f, "exact root search exceeded probe budget"),
            VoronoiError::RankTooSmall => write!(f, "lattice rank must be at least 2"),
            VoronoiError::BudgetExhausted { discovered } => {
                write!(f, "budget exhausted after {discovered} classes")
            }
            VoronoiError::Checkpoint(m) => write!(f, "checkpoint: {m}"),
        }
    }
}

impl std::error::Error for VoronoiError {}

impl From<FormError> for VoronoiError {
    fn from(e: FormError) -> VoronoiError {
        VoronoiError::Form(e)
    }
}

impl From<ConeError> for VoronoiError {
    fn from(e: ConeError) -> VoronoiError {
        VoronoiError::Cone(e)
    }
}

impl From<LatticeError> for VoronoiError {
    fn from(e: LatticeError) -> VoronoiError {
        VoronoiError::Lattice(e)
    }
}

/// Result of stepping from A along a direction R to the boundary point
/// rho where the minimum locus changes.
#[derive(Debug, Clone)]
pub struct AdvanceResult {
    /// The exact boundary parameter.
    pub rho: Q,
    /// A + rho R.
    pub neighbor: HermForm,
    /// Full minimal-vector set of the neighbor; same minimum as A.
    pub neighbor_minvecs: MinVecSet,
    /// Minimal classes of the neighbor on which R is negative; these are
    /// the classes that joined at rho.
    pub new_vectors: Vec<Vec<KElem>>,
}

/// Outcome of evaluating A + tR at one exact parameter t.
enum Probe {
    /// Minimum and minimal classes unchanged: t < rho.
    Short,
    /// A + tR is not positive definite; carries the crossing root of the
    /// certificate vector, which lies in [rho, t) but may still sit beyond
    /// the definiteness boundary.
    CertRoot(Q),
    /// A + tR is definite with a smaller minimum; the smallest crossing
    /// root over its violating classes is exactly rho.
    ExactRoot(Q),
    /// t = rho exactly.
    Boundary {
        minvecs: MinVecSet,
        new_vectors: Vec<Vec<KElem>>,
    },
    /// The vector enumeration at t exceeded its node budget without finding
    /// a violating class; the probe is inconclusive. Near the definiteness
    /// boundary the search ellipsoid degenerates, so this only happens well
    /// beyond rho and the caller retries closer to the bracket floor.
    TooHard,
}

/// Simplest rational x in the interval from a to b (each end open when its
/// strict flag is set): the unique one with the smallest denominator.
/// Continued-fraction descent; requires 0 <= a and a nonempty interval.
fn simplest_in(a: &Q, b: &Q, a_strict: bool, b_strict: bool) -> Q {
    debug_assert!(*a >= Q::zero());
    debug_assert!(if a_strict || b_strict { a < b } else { a <= b });
    let mut n = a.ceil();
    if a_strict && n == *a {
        n += Q::one();
    }
    let fits = if b_strict { n < *b } else { n <= *b };
    if fits {
        return n;
    }
    // no integer inside: both ends share the integer part m
    let m = a.floor();
    let am = a - &m;
    let bm = b - &m;
    if am.is_zero() {
        // left end is the excluded integer m: x = m + 1/y, y as small as fits
        let yb = Q::one() / bm;
        let mut y = yb.ceil();
        if b_strict && y == yb {
            y += Q::one();
        }
        return m + Q::one() / y;
    }
    // x = m + 1/y swaps the roles (and strictness) of the two ends
    let inner = simplest_in(&(Q::one() / &bm), &(Q::one() / &am), b_strict, a_strict);
    m + Q::one() / inner
}

/// The exact parameter at which the value of x on A + tR falls to
/// m * N(a_x); requires R[x] < 0.
fn crossing_root(
    l: &OKLattice,
    a: &HermForm,
    m: &Q,
    r: &HermForm,
    x: &[KElem],
) -> Result<Q, VoronoiError> {
    let k = l.field();
    let nx = l.norm_coeff(x)?;
    let rx = r.evaluate(k, x);
    debug_assert!(rx < Q::zero());
    Ok((m * nx - a.evaluate(k, x)) / rx)
}

fn probe(
    l: &OKLattice,
    a: &HermForm,
    m: &Q,
    r: &HermForm,
    t: &Q,
    node_cap: usize,
) -> Result<Probe, VoronoiError> {
    let k = l.field();
    let at = a.add_scaled(r, t);
    let tf = l.trace_form(at.mat());
    if let Err(y) = linalg::ldl(&tf) {
        // Not positive definite: the certificate direction x has
        // A_t[x] <= 0 < m N(a_x), hence R[x] < 0 and its crossing root
        // lies in [rho, t).
        let x = l.from_z_coords(&linalg::primitive_direction(&y));
        let root = crossing_root(l, a, m, r, &x)?;
        debug_assert!(root > Q::zero() && &root < t);
        return Ok(Probe::CertRoot(root));
    }
    // Positive definite: every projective class with value ratio <= m has
    // its canonical representative inside the ellipsoid A_t[x] <= m * m~.
    let bound = m * l.class_group().m_tilde();
    let (points, complete) = linalg::fincke_pohst_budgeted(&tf, &bound, node_cap);
    if !complete {
        // The ellipsoid was too large to sweep, which happens when t sits
        // near the definiteness boundary. Any violating point already found
        // still yields a crossing root in [rho, t).
        let mut root: Option<Q> = None;
        for (v, val) in &points {
            let x = l.from_z_coords(v);
            let nx = l.norm_coeff(&x)?;
            if val < &(m * &nx) {
                let rt = crossing_root(l, a, m, r, &x)?;
                if root.as_ref().is_none_or(|b| &rt < b) {
                    root = Some(rt);
                }
            }
        }
        return Ok(match root {
            Some(rt) => Probe::CertRoot(rt),
            None => Probe::TooHard,
        });
    }
    let mut classes: BTreeMap<Vec<KElem>, (Q, Q)> = BTreeMap::new();
    for (v, _) in points {
        let x = canonical_minvec(l, &l.from_z_coords(&v));
        if classes.contains_key(&x) {
            continue;
        }
        let nx = l.norm_coeff(&x)?;
        let val = at.evaluate(k, &x);
        classes.insert(x, (nx, val));
    }
    let min_ratio = classes
        .values()
        .map(|(nx, val)| val / nx)
        .min()
        .expect("minimal classes of A stay inside the search bound");
    if &min_ratio < m {
        // Too far: shrink to the smallest crossing root among violators;
        // the class that joins at rho is a violator here, so the smallest
        // root is exactly rho.
        let mut root: Option<Q> = None;
        for (x, (nx, val)) in &classes {
            if &(val / nx) < m {
                let rt = crossing_root(l, a, m, r, x)?;
                if root.as_ref().is_none_or(|b| &rt < b) {
                    root = Some(rt);
                }
            }
        }
        let root = root.expect("a violating class exists when the minimum dropped");
        debug_assert!(root > Q::zero() && &root < t);
        return Ok(Probe::ExactRoot(root));
    }
    debug_assert_eq!(&min_ratio, m);
    let mut minvecs: Vec<Vec<KElem>> = Vec::new();
    let mut new_vectors: Vec<Vec<KElem>> = Vec::new();
    for (x, (nx, val)) in &classes {
        if val != &(m * nx) {
            continue;
        }
        let rx = r.evaluate(k, x);
        // A positive R-value here would force A[x] < m N(a_x) at t = 0.
        debug_assert!(rx <= Q::zero());
        if rx < Q::zero() {
            new_vectors.push(x.clone());
        }
        minvecs.push(x.clone());
    }
    if new_vectors.is_empty() {
        Ok(Probe::Short)
    } else {
        Ok(Probe::Boundary {
            minvecs: MinVecSet {
                minimum: m.clone(),
                vectors: minvecs,
            },
            new_vectors,
        })
    }
}

/// Steps from A along R to the exact boundary parameter rho where new
/// minimal classes join, keeping the minimum constant. S must be the full
/// minimal-vector set of A; R must be nonnegative on S and vanish on at
/// least one of its vectors, and must not be positive semidefinite.
///
/// rho itself is always produced as an exact rational root of a linear
/// value equation, never approximated. Probes that overshoot return upper
/// bounds on rho, probes that undershoot raise the lower bound, and the
/// walk alternates simplest-rational steps over the whole bracket and its
/// middle half; the bracket provably shrinks until it isolates rho, at
/// which point the full-bracket step probes rho itself and reads off the
/// boundary exactly.
pub fn advance_along(
    l: &OKLattice,
    a: &HermForm,
    s: &MinVecSet,
    r: &HermForm,
) -> Result<AdvanceResult, VoronoiError> {
    let k = l.field();
    if r.is_positive_semidefinite(k) {
        return Err(VoronoiError::UnboundedDirection);
    }
    let mut any_zero = false;
    for x in &s.vectors {
        let rx = r.evaluate(k, x);
        if rx < Q::zero() {
            return Err(VoronoiError::NotFacetVector);
        }
        if rx.is_zero() {
            any_zero = true;
        }
    }
    if !any_zero {
        return Err(VoronoiError::NotFacetVector);
    }
    let m = &s.minimum;
    // Bracket: lo < rho always; hi, once set, is a crossing root >= rho.
    let mut lo = Q::zero();
    let mut hi: Option<Q> = None;
    let mut full_turn = true;
    let mut node_cap = NODE_CAP_BASE;
    let mut t = Q::one();
    for _ in 0..PROBE_CAP {
        match probe(l, a, m, r, &t, node_cap)? {
            Probe::Boundary {
                minvecs,
                new_vectors,
            } => {
                let neighbor = a.add_scaled(r, &t);
                return Ok(AdvanceResult {
                    rho: t,
                    neighbor,
                    neighbor_minvecs: minvecs,
                    new_vectors,
                });
            }
            Probe::ExactRoot(root) => {
                // This is rho; the next probe terminates.
                t = root;
                continue;
            }
            Probe::CertRoot(root) => {
                debug_assert!(hi.as_ref().is_none_or(|h| &root < h));
                hi = Some(root);
            }
            Probe::Short => {
                debug_assert!(hi.as_ref().is_none_or(|h| &t < h));
                lo = t.clone();
            }
            Probe::TooHard => {
                // Too close to the definiteness boundary to sweep: retry
                // nearer the bracket floor with a larger budget, leaving
                // the bracket itself untouched.
                node_cap *= 2;
                t = (&lo + &t) / &linalg::qi(2);
                continue;
            }
        }
        // Next parameter: no upper root yet means rho is still ahead, so
        // double. Otherwise alternate two probes. The simplest rational in
        // the whole bracket (lo, hi] finishes the walk once the bracket
        // isolates rho: rho is a crossing root of modest height, so as soon
        // as the width drops below 1/denom(rho)^2 it is itself the simplest
        // point inside. The simplest rational in the middle half shrinks
        // the width to at most 3/4 per step to force that isolation. Both
        // choices keep denominators near the reciprocal bracket width, so
        // probe cost never compounds through certificate-root arithmetic,
        // whose roots can carry enormous denominators.
        t = match &hi {
            None => &lo * &linalg::qi(2),
            Some(h) => {
                let use_full = full_turn;
                full_turn = !full_turn;
                if use_full {
                    simplest_in(&lo, h, true, false)
                } else {
                    let quarter = (h - &lo) / &linalg::qi(4);
                    simplest_in(&(&lo + &quarter), &(h - &quarter), false, false)
                }
            }
        };
    }
    Err(VoronoiError::ProbeStalled)
}

/// The facet vector of one facet of a Voronoi domain: the primitive inner
/// normal as a Hermitian form. It pairs to zero with the facet's minimal
/// vectors and positively with the remaining ones; together with the
/// semidefiniteness rejection here, that makes it indefinite.
pub fn facet_vector(
    l: &OKLattice,
    cone: &PolyCone,
    facet: usize,
) -> Result<HermForm, VoronoiError> {
    let k = l.field();
    let r = HermForm::new(k, cone.facet_form(k, l.n(), facet))?;
    if r.is_positive_semidefinite(k) {
        return Err(VoronoiError::UnboundedDirection);
    }
    Ok(r)
}

/// The contiguous perfect form through one facet of V(A).
#[derive(Debug, Clone)]
pub struct ContiguityResult {
    /// The exact step length.
    pub rho: Q,
    /// A + rho R for the facet vector R.
    pub neighbor: HermForm,
    /// Minimal vectors of the neighbor; minimum equals that of A.
    pub neighbor_minvecs: MinVecSet,
    /// Which facet of the cone was crossed.
    pub shared_facet: usize,
    /// Minimal vectors of the neighbor outside the shared facet.
    pub new_vectors: Vec<Vec<KElem>>,
}

/// Steps through the given facet of the Voronoi domain of A to the unique
/// contiguous form. S and cone must belong to A.
pub fn contiguous(
    l: &OKLattice,
    a: &HermForm,
    s: &MinVecSet,
    cone: &PolyCone,
    facet: usize,
) -> Result<ContiguityResult, VoronoiError> {
    let r = facet_vector(l, cone, facet)?;
    let adv = advance_along(l, a, s, &r)?;
    Ok(ContiguityResult {
        rho: adv.rho,
        neighbor: adv.neighbor,
        neighbor_minvecs: adv.neighbor_minvecs,
        shared_facet: facet,
        new_vectors: adv.new_vectors,
    })
}

/// Weighted pairing rows of the rank-one projections of the given vectors;
/// a coordinate vector c is trace-orthogonal to all of them iff every row
/// pairs to zero with c.
fn pairing_rows(l: &OKLattice, vectors: &[Vec<KElem>]) -> Vec<Vec<Q>> {
    let k = l.field();
    let n = l.n();
    let gram = cones::pairing_gram(k, n);
    vectors
        .iter()
        .map(|x| {
            let ray = cones::coords(k, &KMat::rank_one(k, x));
            ray.iter().zip(&gram).map(|(c, g)| c * g).collect()
        })
        .collect()
}

/// Walks from the given positive definite start to a perfect form by
/// stepping along directions orthogonal to the current minimal-vector
/// span; the span dimension strictly increases, so at most n^2 steps are
/// taken. A start that is already perfect is returned unchanged.
pub fn first_perfect_from(l: &OKLattice, start: HermForm) -> Result<HermForm, VoronoiError> {
    let k = l.field();
    let n = l.n();
    let mut a = start;
    let mut prev_rank = 0;
    for _ in 0..=n * n {
        let s = minimum_and_minvecs(l, &a)?;
        let prows = pairing_rows(l, &s.vectors);
        let rank = linalg::rank(&prows);
        debug_assert!(rank > prev_rank);
        prev_rank = rank;
        if rank == n * n {
            return Ok(a);
        }
        let u = linalg::nullspace(&prows)
            .into_iter()
            .next()
            .expect("rank below n^2 leaves a nullspace");
        let mut r = HermForm::new(k, cones::uncoords(k, n, &u))?;
        if r.is_positive_semidefinite(k) {
            r = r.scale(&-Q::one());
        }
        let adv = advance_along(l, &a, &s, &r)?;
        a = adv.neighbor;
    }
    Err(VoronoiError::ProbeStalled)
}

/// Finds a perfect form over L starting from the identity form.
pub fn first_perfect(l: &OKLattice) -> Result<HermForm, VoronoiError> {
    first_perfect_from(l, HermForm::identity(l.n()))
}

/// One enumerated perfect-form class, scaled to minimum 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PerfectFormRecord {
    /// Index of this record in the sorted output.
    pub class_id: usize,
    /// The representative form, minimum exactly 1.
    pub form: HermForm,
    /// Its minimal vectors.
    pub minvecs: MinVecSet,
    /// N(c_1 ... c_n) * det(form).
    pub det_rel: Q,
    /// min^n / det_rel; equals 1/det_rel at minimum 1.
    pub gamma_pow_n: Q,
    /// Number of facets of the Voronoi domain.
    pub facet_count: usize,
    /// Order of the automorphism group of (L, form).
    pub aut_order: usize,
    /// Recognized isomorphism type of the automorphism group.
    pub aut_label: String,
    /// Generators of the automorphism group.
    pub aut_gens: Vec<KMat>,
}

/// Serializes a record with every rational as an exact "p/q" string.
pub fn record_to_json(l: &OKLattice, rec: &PerfectFormRecord) -> Value {
    let k = l.field();
    json!({
        "class_id": rec.class_id,
        "form": jsonio::kmat_to_json(k, rec.form.mat()),
        "minimum": jsonio::q_to_string(&rec.minvecs.minimum),
        "minvecs": Value::Array(
            rec.minvecs.vectors.iter().map(|x| jsonio::kvec_to_json(k, x)).collect()
        ),
        "det_rel": jsonio::q_to_string(&rec.det_rel),
        "gamma_pow_n": jsonio::q_to_string(&rec.gamma_pow_n),
        "facet_count": rec.facet_count,
        "aut_order": rec.aut_order,
        "aut_label": rec.aut_label,
        "aut_gens": Value::Array(
            rec.aut_gens.iter().map(|g| jsonio::kmat_to_json(k, g)).collect()
        ),
    })
}

/// Parses a record serialized by [`record_to_json`]; the round trip is the
/// identity.
pub fn record_from_json(l: &OKLattice, v: &Value) -> Option<PerfectFormRecord> {
    let k = l.field();
    let class_id = v["class_id"].as_u64()? as usize;
    let form = HermForm::new(k, jsonio::kmat_from_json(k, &v["form"])?).ok()?;
    let minimum = jsonio::q_from_str(v["minimum"].as_str()?)?;
    let vectors = v["minvecs"]
        .as_array()?
        .iter()
        .map(|x| jsonio::kvec_from_json(k, x))
        .collect::<Option<Vec<_>>>()?;
    let det_rel = jsonio::q_from_str(v["det_rel"].as_str()?)?;
    let gamma_pow_n = jsonio::q_from_str(v["gamma_pow_n"].as_str()?)?;
    let facet_count = v["facet_count"].as_u64()? as usize;
    let aut_order = v["aut_order"].as_u64()? as usize;
    let aut_label = v["aut_label"].as_str()?.to_string();
    let aut_gens = v["aut_gens"]
        .as_array()?
        .iter()
        .map(|g| jsonio::kmat_from_json(k, g))
        .collect::<Option<Vec<_>>>()?;
    Some(PerfectFormRecord {
        class_id,
        form,
        minvecs: MinVecSet { minimum, vectors },
        det_rel,
        gamma_pow_n,
        facet_count,
        aut_order,
        aut_label,
        aut_gens,
    })
}

/// One facet's contiguity edge out of a class representative.
#[derive(Debug, Clone)]
pub struct FacetNeighbor {
    /// Facet index in the representative's Voronoi domain.
    pub facet: usize,
    /// Class index the contiguous form belongs to.
    pub to_class: usize,
    /// The contiguous form itself (minimum 1, usually not the class
    /// representative).
    pub form: HermForm,
}

/// The class-level Voronoi graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoronoiGraph {
    /// Number of classes.
    pub vertex_count: usize,
    /// Directed edges (from, to, weight); the weight counts facets of the
    /// source domain leading to the target class.
    pub edges: Vec<(usize, usize, usize)>,
    /// Classes realizing the maximal gamma^n.
    pub maximizers: Vec<usize>,
}

impl VoronoiGraph {
    /// Sum of outgoing edge weights at a vertex; equals its facet count.
    pub fn out_weight(&self, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|(f, _, _)| *f == v)
            .map(|(_, _, w)| w)
            .sum()
    }

    /// Whether the graph is connected, ignoring edge direction.
    pub fn is_connected(&self) -> bool {
        if self.vertex_count == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.vertex_count];
        for &(a, b, _) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; self.vertex_count];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|b| b)
    }
}

/// Full enumeration output: sorted records, the per-facet neighbor lists
/// aligned with them, and the class graph.
#[derive(Debug, Clone)]
pub struct EnumerationResult {
    /// One record per class, sorted by the invariant fingerprint.
    pub records: Vec<PerfectFormRecord>,
    /// Per class, one entry per facet of its Voronoi domain.
    pub neighbors: Vec<Vec<FacetNeighbor>>,
    /// The weighted class graph.
    pub graph: VoronoiGraph,
}

/// Checkpoint configuration; the file name inside `dir` is derived from
/// the lattice, so distinct runs do not collide.
#[derive(Debug, Clone)]
pub struct CheckpointCfg {
    /// Directory holding checkpoint files.
    pub dir: PathBuf,
    /// Save after this many newly discovered classes.
    pub every: usize,
}

impl CheckpointCfg {
    /// Environment variable naming the checkpoint directory.
    pub const ENV_DIR: &'static str = "HERMLAT_CHECKPOINT_DIR";

    /// Reads the checkpoint directory from the environment; default save
    /// cadence of 5 discoveries.
    pub fn from_env() -> Option<CheckpointCfg> {
        std::env::var_os(Self::ENV_DIR).map(|d| CheckpointCfg {
            dir: PathBuf::from(d),
            every: 5,
        })
    }
}

/// Options for `enumerate_perfect`.
#[derive(Debug, Clone)]
pub struct EnumOpts {
    /// Expand frontier waves in parallel; the merge stays sequential, so
    /// results are identical either way.
    pub parallel: bool,
    /// Optional checkpointing of the class registry.
    pub checkpoint: Option<CheckpointCfg>,
    /// Abort (after checkpointing) once more than this many classes exist.
    pub max_classes: Option<usize>,
    /// Abort (after checkpointing) once this instant has passed.
    pub deadline: Option<std::time::Instant>,
}

impl Default for EnumOpts {
    fn default() -> EnumOpts {
        EnumOpts {
            parallel: cfg!(feature = "parallel"),
            checkpoint: None,
            max_classes: None,
            deadline: None,
        }
    }
}

/// Cheap equivalence prefilter: relative determinant, minimal-vector
/// count, and the sorted multiset of coefficient-ideal norms.
type Fingerprint = (Q, usize, Vec<Q>);

struct Entry {
    form: HermForm,
    minvecs: MinVecSet,
    det_rel: Q,
    fp: Fingerprint,
    neighbors: Vec<FacetNeighbor>,
}

type EdgeCount = BTreeMap<(usize, usize), usize>;
type State = (Vec<Entry>, VecDeque<usize>, EdgeCount);

fn entry_new(l: &OKLattice, form: HermForm, minvecs: MinVecSet) -> Result<Entry, VoronoiError> {
    let det = det_rel(l, &form);
    let mut norms: Vec<Q> = minvecs
        .vectors
        .iter()
        .map(|x| l.norm_coeff(x))
        .collect::<Result<_, _>>()?;
    norms.sort();
    Ok(Entry {
        fp: (det.clone(), minvecs.vectors.len(), norms),
        det_rel: det,
        form,
        minvecs,
        neighbors: Vec::new(),
    })
}

fn fresh_state(l: &OKLattice) -> Result<State, VoronoiError> {
    let p0 = first_perfect(l)?;
    let s0 = minimum_and_minvecs(l, &p0)?;
    let scaled = p0.scale(&(Q::one() / &s0.minimum));
    let minvecs = MinVecSet {
        minimum: Q::one(),
        vectors: s0.vectors,
    };
    let seed = entry_new(l, scaled, minvecs)?;
    Ok((vec![seed], VecDeque::from([0]), BTreeMap::new()))
}

/// Expansion of one class: its contiguous form through every facet, with
/// the fingerprint data precomputed.
type Expansion = Vec<(ContiguityResult, Q, Vec<Q>)>;

fn expand_one(l: &OKLattice, e: &Entry) -> Result<Expansion, VoronoiError> {
    let k = l.field();
    let n = l.n();
    let rays: Vec<Vec<Q>> = e
        .minvecs
        .vectors
        .iter()
        .map(|x| cones::coords(k, &KMat::rank_one(k, x)))
        .collect();
    let cone = cones::facet_enumeration(k, n, &rays)?;
    let mut out = Vec::with_capacity(cone.facets.len());
    for f in 0..cone.facets.len() {
        let cr = contiguous(l, &e.form, &e.minvecs, &cone, f)?;
        debug_assert_eq!(cr.neighbor_minvecs.minimum, e.minvecs.minimum);
        debug_assert_eq!(perfection_rank(l, &cr.neighbor_minvecs.vectors), n * n);
        let det = det_rel(l, &cr.neighbor);
        let mut norms: Vec<Q> = cr
            .neighbor_minvecs
            .vectors
            .iter()
            .map(|x| l.norm_coeff(x))
            .collect::<Result<_, _>>()?;
        norms.sort();
        out.push((cr, det, norms));
    }
    Ok(out)
}

fn expand_batch(
    l: &OKLattice,
    entries: &[Entry],
    batch: &[usize],
    parallel: bool,
) -> Result<Vec<Expansion>, VoronoiError> {
    #[cfg(feature = "parallel")]
    {
        if parallel {
            return batch
                .par_iter()
                .map(|&id| expand_one(l, &entries[id]))
                .collect();
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = parallel;
    batch.iter().map(|&id| expand_one(l, &entries[id])).collect()
}

fn aut_batch(l: &OKLattice, entries: &[Entry], parallel: bool) -> Vec<AutGroup> {
    #[cfg(feature = "parallel")]
    {
        if parallel {
            return entries.par_iter().map(|e| aut_group(l, &e.form)).collect();
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = parallel;
    entries.iter().map(|e| aut_group(l, &e.form)).collect()
}

fn checkpoint_path(dir: &Path, l: &OKLattice) -> PathBuf {
    dir.join(format!(
        "ckpt_d{}_n{}_c{}.json",
        l.field().d(),
        l.n(),
        l.steinitz_class() + 1
    ))
}

fn save_checkpoint(
    l: &OKLattice,
    path: &Path,
    entries: &[Entry],
    queue: &VecDeque<usize>,
    edges: &EdgeCount,
) -> Result<(), VoronoiError> {
    let k = l.field();
    let v = json!({
        "schema": 1,
        "kind": "hermlat-checkpoint",
        "d": l.field().d(),
        "n": l.n(),
        "class_index": l.steinitz_class() + 1,
        "entries": entries.iter().map(|e| json!({
            "form": jsonio::kmat_to_json(k, e.form.mat()),
            "minimum": jsonio::q_to_string(&e.minvecs.minimum),
            "minvecs": Value::Array(
                e.minvecs.vectors.iter().map(|x| jsonio::kvec_to_json(k, x)).collect()
            ),
            "neighbors": Value::Array(e.neighbors.iter().map(|nb| json!([
                nb.facet,
                nb.to_class,
                jsonio::kmat_to_json(k, nb.form.mat()),
            ])).collect()),
        })).collect::<Vec<_>>(),
        "queue": queue.iter().copied().collect::<Vec<_>>(),
        "edges": edges.iter().map(|(&(a, b), &w)| json!([a, b, w])).collect::<Vec<_>>(),
    });
    let err = |e: std::io::Error| VoronoiError::Checkpoint(format!("{}: {e}", path.display()));
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, v.to_string()).map_err(err)?;
    std::fs::rename(&tmp, path).map_err(err)
}

fn load_checkpoint(l: &OKLattice, path: &Path) -> Result<State, VoronoiError> {
    let k = l.field();
    let bad = |m: String| VoronoiError::Checkpoint(format!("{}: {m}", path.display()));
    let text = std::fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    if v["schema"].as_u64() != Some(1) || v["kind"].as_str() != Some("hermlat-checkpoint") {
        return Err(bad("unrecognized format".into()));
    }
    if v["d"].as_u64() != Some(l.field().d())
        || v["n"].as_u64() != Some(l.n() as u64)
        || v["class_index"].as_u64() != Some(l.steinitz_class() as u64 + 1)
    {
        return Err(bad("checkpoint belongs to a different lattice".into()));
    }
    let raw_entries = v["entries"]
        .as_array()
        .ok_or_else(|| bad("missing entries".into()))?;
    let mut entries = Vec::with_capacity(raw_entries.len());
    for re in raw_entries {
        let mat = jsonio::kmat_from_json(k, &re["form"]).ok_or_else(|| bad("bad form".into()))?;
        let form = HermForm::new(k, mat).map_err(|e| bad(e.to_string()))?;
        let minimum = re["minimum"]
            .as_str()
            .and_then(jsonio::q_from_str)
            .ok_or_else(|| bad("bad minimum".into()))?;
        let vectors = re["minvecs"]
            .as_array()
            .and_then(|a| {
                a.iter()
                    .map(|x| jsonio::kvec_from_json(k, x))
                    .collect::<Option<Vec<_>>>()
            })
            .ok_or_else(|| bad("bad minvecs".into()))?;
        let mut entry = entry_new(l, form, MinVecSet { minimum, vectors })?;
        let raw_nbs = re["neighbors"]
            .as_array()
            .ok_or_else(|| bad("missing neighbors".into()))?;
        for nb in raw_nbs {
            let facet = nb[0].as_u64().ok_or_else(|| bad("bad facet id".into()))? as usize;
            let to_class = nb[1].as_u64().ok_or_else(|| bad("bad class id".into()))? as usize;
            let mat = jsonio::kmat_from_json(k, &nb[2]).ok_or_else(|| bad("bad edge form".into()))?;
            let form = HermForm::new(k, mat).map_err(|e| bad(e.to_string()))?;
            entry.neighbors.push(FacetNeighbor {
                facet,
                to_class,
                form,
            });
        }
        entries.push(entry);
    }
    let ids = |key: &str| -> Result<Vec<usize>, VoronoiError> {
        v[key]
            .as_array()
            .ok_or_else(|| bad(format!("missing {key}")))?
            .iter()
            .map(|x| x.as_u64().map(|u| u as usize))
            .collect::<Option<Vec<usize>>>()
            .ok_or_else(|| bad(format!("bad {key}")))
    };
    let queue: VecDeque<usize> = ids("queue")?.into();
    let mut edges = BTreeMap::new();
    for e in v["edges"]
        .as_array()
        .ok_or_else(|| bad("missing edges".into()))?
    {
        let (a, b, w) = (e[0].as_u64(), e[1].as_u64(), e[2].as_u64());
        let (a, b, w) = match (a, b, w) {
            (Some(a), Some(b), Some(w)) => (a as usize, b as usize, w as usize),
            _ => return Err(bad("bad edge".into())),
        };
        edges.insert((a, b), w);
    }
    let in_range = |i: &usize| *i < entries.len();
    if !queue.iter().all(in_range)
        || !edges.keys().all(|(a, b)| in_range(a) && in_range(b))
        || !entries
            .iter()
            .all(|e| e.neighbors.iter().all(|nb| in_range(&nb.to_class)))
    {
        return Err(bad("class index out of range".into()));
    }
    Ok((entries, queue, edges))
}

fn finalize(
    l: &OKLattice,
    entries: Vec<Entry>,
    edge_count: EdgeCount,
    parallel: bool,
) -> EnumerationResult {
    let auts = aut_batch(l, &entries, parallel);
    // Deterministic class numbering by invariant fingerprint, discovery
    // index as the final tiebreaker.
    let keys: Vec<(Q, usize, usize, usize, Vec<Q>, usize)> = entries
        .iter()
        .zip(&auts)
        .enumerate()
        .map(|(i, (e, g))| {
            (
                e.det_rel.clone(),
                e.minvecs.vectors.len(),
                e.neighbors.len(),
                g.order,
                e.fp.2.clone(),
                i,
            )
        })
        .collect();
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.sort_by(|&i, &j| keys[i].cmp(&keys[j]));
    let mut pos = vec![0usize; entries.len()];
    for (new, &old) in order.iter().enumerate() {
        pos[old] = new;
    }
    let mut records = Vec::with_capacity(entries.len());
    let mut neighbors = Vec::with_capacity(entries.len());
    for (new, &old) in order.iter().enumerate() {
        let e = &entries[old];
        records.push(PerfectFormRecord {
            class_id: new,
            form: e.form.clone(),
            minvecs: e.minvecs.clone(),
            det_rel: e.det_rel.clone(),
            gamma_pow_n: hermite_invariant(l, &e.form),
            facet_count: e.neighbors.len(),
            aut_order: auts[old].order,
            aut_label: auts[old].label.clone(),
            aut_gens: auts[old].gens.clone(),
        });
        neighbors.push(
            e.neighbors
                .iter()
                .map(|nb| FacetNeighbor {
                    facet: nb.facet,
                    to_class: pos[nb.to_class],
                    form: nb.form.clone(),
                })
                .collect::<Vec<_>>(),
        );
    }
    let mut remapped: EdgeCount = BTreeMap::new();
    for ((a, b), w) in edge_count {
        remapped.insert((pos[a], pos[b]), w);
    }
    let edges: Vec<(usize, usize, usize)> =
        remapped.into_iter().map(|((a, b), w)| (a, b, w)).collect();
    let best = records
        .iter()
        .map(|r| r.gamma_pow_n.clone())
        .max()
        .expect("enumeration finds at least one class");
    let maximizers: Vec<usize> = records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.gamma_pow_n == best)
        .map(|(i, _)| i)
        .collect();
    let graph = VoronoiGraph {
        vertex_count: records.len(),
        edges,
        maximizers,
    };
    for (v, r) in records.iter().enumerate() {
        debug_assert_eq!(graph.out_weight(v), r.facet_count);
    }
    debug_assert!(graph
        .edges
        .iter()
        .all(|&(a, b, _)| graph.edges.iter().any(|&(c, d, _)| (c, d) == (b, a))));
    EnumerationResult {
        records,
        neighbors,
        graph,
    }
}

/// Enumerates all perfect-form classes over L by breadth-first contiguity
/// search with isometry deduplication. Output order is deterministic
/// regardless of the parallelism setting; a configured checkpoint is
/// resumed when its file exists and removed on successful completion.
pub fn enumerate_perfect(
    l: &OKLattice,
    opts: &EnumOpts,
) -> Result<EnumerationResult, VoronoiError> {
    if l.n() < 2 {
        return Err(VoronoiError::RankTooSmall);
    }
    let ck_path = opts.checkpoint.as_ref().map(|c| checkpoint_path(&c.dir, l));
    let (mut entries, mut queue, mut edge_count) = match &ck_path {
        Some(p) if p.exists() => load_checkpoint(l, p)?,
        _ => fresh_state(l)?,
    };
    let mut last_saved = entries.len();
    while !queue.is_empty() {
        let over_budget = opts.max_classes.is_some_and(|mx| entries.len() > mx)
            || opts
                .deadline
                .is_some_and(|dl| std::time::Instant::now() >= dl);
        if over_budget {
            if let Some(p) = &ck_path {
                save_checkpoint(l, p, &entries, &queue, &edge_count)?;
            }
            return Err(VoronoiError::BudgetExhausted {
                discovered: entries.len(),
            });
        }
        let batch: Vec<usize> = queue.drain(..).collect();
        let expansions = expand_batch(l, &entries, &batch, opts.parallel)?;
        // Sequential merge in batch order keeps class numbering and edge
        // weights independent of the expansion schedule. The neighbor goes
        // on the source side of the equivalence test: the target side sets
        // the candidate-pool bound, and the stored class representative has
        // far smaller basis values than a raw walk neighbor.
        for (&id, exp) in batch.iter().zip(expansions) {
            for (cr, det, norms) in exp {
                let fp: Fingerprint = (det.clone(), cr.neighbor_minvecs.vectors.len(), norms);
                let to = match entries
                    .iter()
                    .position(|e| e.fp == fp && is_equivalent(l, &cr.neighbor, &e.form).is_some())
                {
                    Some(i) => i,
                    None => {
                        entries.push(Entry {
                            form: cr.neighbor.clone(),
                            minvecs: cr.neighbor_minvecs.clone(),
                            det_rel: det,
                            fp,
                            neighbors: Vec::new(),
                        });
                        queue.push_back(entries.len() - 1);
                        entries.len() - 1
                    }
                };
                *edge_count.entry((id, to)).or_insert(0) += 1;
                entries[id].neighbors.push(FacetNeighbor {
                    facet: cr.shared_facet,
                    to_class: to,
                    form: cr.neighbor,
                });
            }
        }
        if let (Some(cfg), Some(p)) = (&opts.checkpoint, &ck_path) {
            if entries.len() >= last_saved + cfg.every.max(1) {
                save_checkpoint(l, p, &entries, &queue, &edge_count)?;
                last_saved = entries.len();
            }
        }
    }
    if let Some(p) = &ck_path {
        if p.exists() {
            std::fs::remove_file(p)
                .map_err(|e| VoronoiError::Checkpoint(format!("{}: {e}", p.display())))?;
        }
    }
    Ok(finalize(l, entries, edge_count, opts.parallel))
}

/// Enumeration output for one lattice-class representative.
#[derive(Debug, Clone)]
pub struct HermiteClass {
    /// Ideal-class index of the lattice's last coefficient ideal.
    pub class_index: usize,
    /// The standard lattice that was enumerated.
    pub lattice: OKLattice,
    /// Its perfect-form classes and graph.
    pub result: EnumerationResult,
}

/// The Hermite constant of (K, n) with all witnesses.
#[derive(Debug, Clone)]
pub struct HermiteResult {
    /// gamma^n: the maximum of min^n / det_rel over all classes.
    pub gamma_pow_n: Q,
    /// Per lattice-class representative, the full enumeration.
    pub classes: Vec<HermiteClass>,
    /// Indices (class position, record position) of all maximizers.
    pub maximizers: Vec<(usize, usize)>,
}

/// Computes gamma_{n,K}^n by enumerating perfect forms over one standard
/// lattice per Galois/n-th-power orbit of ideal classes.
pub fn hermite_constant(
    cg: &Arc<ClassGroup>,
    n: usize,
    opts: &EnumOpts,
) -> Result<HermiteResult, VoronoiError> {
    let mut classes = Vec::new();
    for j in cg.lattice_class_reps(n) {
        let lattice = OKLattice::standard(cg.clone(), n, j);
        let result = enumerate_perfect(&lattice, opts)?;
        classes.push(HermiteClass {
            class_index: j,
            lattice,
            result,
        });
    }
    let gamma_pow_n = classes
        .iter()
        .flat_map(|c| c.result.records.iter().map(|r| r.gamma_pow_n.clone()))
        .max()
        .expect("at least one lattice class");
    let maximizers: Vec<(usize, usize)> = classes
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| {
            c.result
                .records
                .iter()
                .enumerate()
                .filter(|(_, r)| r.gamma_pow_n == gamma_pow_n)
                .map(move |(ri, _)| (ci, ri))
        })
        .collect();
    Ok(HermiteResult {
        gamma_pow_n,
        classes,
        maximizers,
    })
}
