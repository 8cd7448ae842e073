//! Generators of GL(L) read off the Voronoi graph: the stabilizer of every
//! perfect-form class representative, plus one transformation per contiguous
//! form that is not itself a representative. Together these generate the
//! full automorphism group of the lattice.

use crate::kmat::KMat;
use crate::lattice::OKLattice;
use crate::voronoi::{enumerate_perfect, EnumOpts, EnumerationResult, VoronoiError};
use crate::isometry::is_equivalent;

/// One edge transformation, tagged with its provenance in the graph.
#[derive(Debug, Clone)]
pub struct EdgeGen {
    /// Representative class whose Voronoi domain was crossed.
    pub class_id: usize,
    /// Facet index within that domain.
    pub facet_id: usize,
    /// Class of the contiguous form on the far side.
    pub to_class: usize,
    /// U with contiguous = representative[U]; pulling the contiguous form
    /// back through U recovers the representative exactly.
    pub matrix: KMat,
}

/// A generating set for GL(L).
#[derive(Debug, Clone)]
pub struct GLGenSet {
    /// Stabilizer generators, indexed by representative class.
    pub stabilizer_gens: Vec<Vec<KMat>>,
    /// One transformation per contiguous form outside the representative set.
    pub edge_gens: Vec<EdgeGen>,
}

impl GLGenSet {
    /// Total number of generators.
    pub fn len(&self) -> usize {
        self.stabilizer_gens.iter().map(Vec::len).sum::<usize>() + self.edge_gens.len()
    }

    /// True when both parts are empty (never the case after a successful
    /// enumeration: stabilizers contain at least the unit scalars).
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All generators in one list, stabilizers first in class order, then
    /// edge transformations in graph order.
    pub fn all(&self) -> Vec<&KMat> {
        let mut out: Vec<&KMat> = Vec::with_capacity(self.len());
        for gens in &self.stabilizer_gens {
            out.extend(gens.iter());
        }
        out.extend(self.edge_gens.iter().map(|e| &e.matrix));
        out
    }
}

/// Assembles the generator set from a completed enumeration: each class
/// contributes its automorphism generators, and each facet whose contiguous
/// form is not literally a representative contributes the matrix carrying
/// the representative of its class onto that form. Every matrix is checked
/// to stabilize L, and every edge matrix to pull its contiguous form back
/// to the representative exactly.
pub fn gl_generators_from(l: &OKLattice, res: &EnumerationResult) -> GLGenSet {
    let k = l.field();
    let mut stabilizer_gens = Vec::with_capacity(res.records.len());
    for rec in &res.records {
        for g in &rec.aut_gens {
            assert!(l.is_gl_element(g), "stabilizer generator must preserve L");
        }
        stabilizer_gens.push(rec.aut_gens.clone());
    }
    let mut edge_gens = Vec::new();
    for (class_id, nbrs) in res.neighbors.iter().enumerate() {
        for nb in nbrs {
            let rep = &res.records[nb.to_class].form;
            if nb.form == *rep {
                continue;
            }
            // Source side is the raw neighbor: the target side sets the
            // equivalence search's pool bound, and the representative is
            // the far smaller form of the pair.
            let back = is_equivalent(l, &nb.form, rep)
                .expect("a contiguous form is equivalent to its class representative");
            assert!(l.is_gl_element(&back), "edge transformation must preserve L");
            assert_eq!(
                nb.form.transform(k, &back),
                *rep,
                "edge transformation must pull the contiguous form back to its representative"
            );
            let u = back.inverse(k).expect("GL(L) elements are invertible");
            edge_gens.push(EdgeGen {
                class_id,
                facet_id: nb.facet,
                to_class: nb.to_class,
                matrix: u,
            });
        }
    }
    GLGenSet {
        stabilizer_gens,
        edge_gens,
    }
}

/// Enumerates the perfect forms over L and assembles the GL(L) generator
/// set; enumeration failures propagate.
pub fn gl_generators(l: &OKLattice, opts: &EnumOpts) -> Result<GLGenSet, VoronoiError> {
    let res = enumerate_perfect(l, opts)?;
    Ok(gl_generators_from(l, &res))
}
