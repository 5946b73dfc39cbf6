//! Combinatorial layer: oriented pseudo-manifolds and cross-polytope
//! boundary complexes.
//!
//! A `k`-dimensional pseudo-manifold is a pure simplicial complex given by
//! its top-dimensional oriented simplices in which every `(k-1)`-simplex
//! (ridge) lies in exactly two facets, the facet adjacency graph is
//! connected, and the two facets through each ridge induce opposite
//! orientations on it. Vertices are dense integers internally; external JSON
//! uses string names mapped on ingest.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error("facet list is empty")]
    EmptyFacets,
    #[error("facet {0} has {1} vertices, expected {2}")]
    MixedDimension(usize, usize, usize),
    #[error("facet {0} repeats vertex {1}")]
    RepeatedVertex(usize, String),
    #[error("ridge {{{ridge}}} lies in {count} facet(s), expected exactly 2")]
    RidgeCountError { ridge: String, count: usize },
    #[error("facet adjacency graph is disconnected: facet {0} unreachable from facet 0")]
    DisconnectedError(usize),
    #[error("incompatible facet orientations at ridge {{{0}}}")]
    NonOrientableError(String),
    #[error("unknown vertex name '{0}'")]
    UnknownVertex(String),
    #[error("vertex permutation is not an involution at vertex {0}")]
    NotInvolution(usize),
    #[error("involution does not map facets to facets (image of facet {0} is not a facet)")]
    NotSimplicial(usize),
    #[error("line-symmetry involution fixes vertex {0}")]
    FixedVertex(usize),
    #[error("line-symmetry involution pairs the edge-joined vertices {0} and {1}")]
    PairedEdge(usize, usize),
}

/// One `(k-1)`-simplex with its two incident facets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ridge {
    /// Sorted vertex ids.
    pub vertices: Vec<usize>,
    /// Indices into the facet list, ascending.
    pub facets: [usize; 2],
}

/// Validated oriented pseudo-manifold.
#[derive(Debug, Clone)]
pub struct PseudoManifold {
    dim: usize,
    vertex_names: Vec<String>,
    facets: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    ridges: Vec<Ridge>,
}

impl PseudoManifold {
    /// Build and validate from oriented facets over named vertices.
    ///
    /// `vertex_names[i]` is the external name of vertex id `i`; every facet
    /// is a tuple of vertex ids whose listed order is its orientation.
    pub fn build(vertex_names: Vec<String>, facets: Vec<Vec<usize>>) -> Result<Self, ComplexError> {
        if facets.is_empty() {
            return Err(ComplexError::EmptyFacets);
        }
        let width = facets[0].len();
        for (fi, f) in facets.iter().enumerate() {
            if f.len() != width {
                return Err(ComplexError::MixedDimension(fi, f.len(), width));
            }
            let mut seen = f.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != width {
                return Err(ComplexError::RepeatedVertex(
                    fi,
                    vertex_names
                        .get(f[0])
                        .cloned()
                        .unwrap_or_else(|| f[0].to_string()),
                ));
            }
        }
        let dim = width - 1;

        // Ridge table: sorted (k-1)-tuple -> (facet index, omitted position).
        let mut table: BTreeMap<Vec<usize>, Vec<(usize, usize)>> = BTreeMap::new();
        for (fi, f) in facets.iter().enumerate() {
            for omit in 0..width {
                let mut r: Vec<usize> = f
                    .iter()
                    .enumerate()
                    .filter(|(p, _)| *p != omit)
                    .map(|(_, v)| *v)
                    .collect();
                r.sort_unstable();
                table.entry(r).or_default().push((fi, omit));
            }
        }
        let ridge_name = |r: &[usize]| {
            r.iter()
                .map(|v| {
                    vertex_names
                        .get(*v)
                        .cloned()
                        .unwrap_or_else(|| v.to_string())
                })
                .collect::<Vec<_>>()
                .join(",")
        };
        for (r, incident) in &table {
            if incident.len() != 2 {
                return Err(ComplexError::RidgeCountError {
                    ridge: ridge_name(r),
                    count: incident.len(),
                });
            }
        }

        // Strong connectivity on the facet-ridge adjacency graph.
        let mut adjacency = vec![Vec::new(); facets.len()];
        for incident in table.values() {
            adjacency[incident[0].0].push(incident[1].0);
            adjacency[incident[1].0].push(incident[0].0);
        }
        let mut reached = vec![false; facets.len()];
        let mut queue = vec![0usize];
        reached[0] = true;
        while let Some(f) = queue.pop() {
            for &g in &adjacency[f] {
                if !reached[g] {
                    reached[g] = true;
                    queue.push(g);
                }
            }
        }
        if let Some(f) = reached.iter().position(|r| !r) {
            return Err(ComplexError::DisconnectedError(f));
        }

        // Orientation compatibility: the two facets through each ridge must
        // induce opposite orientations on it.
        let mut ridges = Vec::with_capacity(table.len());
        for (r, incident) in &table {
            let induced = |fi: usize, omit: usize| -> (Vec<usize>, i32) {
                let f = &facets[fi];
                let tuple: Vec<usize> = f
                    .iter()
                    .enumerate()
                    .filter(|(p, _)| *p != omit)
                    .map(|(_, v)| *v)
                    .collect();
                let sign = if omit.is_multiple_of(2) { 1 } else { -1 };
                (tuple, sign)
            };
            let (t0, s0) = induced(incident[0].0, incident[0].1);
            let (t1, s1) = induced(incident[1].0, incident[1].1);
            if s0 * permutation_sign(&t0, &t1) != -s1 {
                return Err(ComplexError::NonOrientableError(ridge_name(r)));
            }
            let mut fs = [incident[0].0, incident[1].0];
            fs.sort_unstable();
            ridges.push(Ridge {
                vertices: r.clone(),
                facets: fs,
            });
        }

        // Edge skeleton (1-faces; for dim 1 the facets are the edges).
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for f in &facets {
            for i in 0..width {
                for j in i + 1..width {
                    let e = (f[i].min(f[j]), f[i].max(f[j]));
                    edges.push(e);
                }
            }
        }
        edges.sort_unstable();
        edges.dedup();

        Ok(Self {
            dim,
            vertex_names,
            facets,
            edges,
            ridges,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertex_names
    }

    pub fn vertex_id(&self, name: &str) -> Option<usize> {
        self.vertex_names.iter().position(|n| n == name)
    }

    pub fn facets(&self) -> &[Vec<usize>] {
        &self.facets
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn ridges(&self) -> &[Ridge] {
        &self.ridges
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let e = (u.min(v), u.max(v));
        self.edges.binary_search(&e).is_ok()
    }

    /// Ridge record for a given (unordered) vertex tuple.
    pub fn ridge(&self, vertices: &[usize]) -> Option<&Ridge> {
        let mut key = vertices.to_vec();
        key.sort_unstable();
        self.ridges.iter().find(|r| r.vertices == key)
    }

    /// Number of `j`-dimensional faces, by enumeration within facets.
    pub fn face_count(&self, j: usize) -> usize {
        if j > self.dim {
            return 0;
        }
        let mut faces: Vec<Vec<usize>> = Vec::new();
        for f in &self.facets {
            subsets(f, j + 1, &mut faces);
        }
        faces.sort_unstable();
        faces.dedup();
        faces.len()
    }

    /// All unordered vertex pairs that do not span an edge.
    pub fn diagonals(&self) -> Vec<(usize, usize)> {
        let m = self.vertex_count();
        let mut out = Vec::new();
        for u in 0..m {
            for v in u + 1..m {
                if !self.has_edge(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Same complex with every facet orientation reversed.
    pub fn reversed(&self) -> Self {
        let facets = self
            .facets
            .iter()
            .map(|f| {
                let mut g = f.clone();
                g.reverse();
                g
            })
            .collect();
        Self::build(self.vertex_names.clone(), facets).expect("reversal preserves validity")
    }
}

fn subsets(f: &[usize], size: usize, out: &mut Vec<Vec<usize>>) {
    let n = f.len();
    if size > n {
        return;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        let mut s: Vec<usize> = idx.iter().map(|&i| f[i]).collect();
        s.sort_unstable();
        out.push(s);
        // next combination
        let mut i = size;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - size {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Sign of the permutation taking `a` to `b` (both repeat-free with the same
/// entries); 0 if they differ as sets.
fn permutation_sign(a: &[usize], b: &[usize]) -> i32 {
    let n = a.len();
    let mut perm = Vec::with_capacity(n);
    for x in a {
        match b.iter().position(|y| y == x) {
            Some(p) => perm.push(p),
            None => return 0,
        }
    }
    let mut sign = 1;
    let mut seen = vec![false; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// Convenience constructor from facets of string names.
pub fn build_pseudo_manifold(facets: &[Vec<&str>]) -> Result<PseudoManifold, ComplexError> {
    let mut names: Vec<String> = Vec::new();
    let mut ids: BTreeMap<String, usize> = BTreeMap::new();
    let mut facet_ids = Vec::with_capacity(facets.len());
    for f in facets {
        let mut fi = Vec::with_capacity(f.len());
        for v in f {
            let id = *ids.entry(v.to_string()).or_insert_with(|| {
                names.push(v.to_string());
                names.len() - 1
            });
            fi.push(id);
        }
        facet_ids.push(fi);
    }
    PseudoManifold::build(names, facet_ids)
}

/// Boundary complex of the n-dimensional cross-polytope.
///
/// Vertices are named `a1..an, b1..bn` with ids `0..n-1` and `n..2n-1`; the
/// pairs `{a_i, b_i}` are the diagonals. Facets are all sign-choice tuples,
/// one of `a_i`/`b_i` per index; a tuple with an odd number of `b`-choices
/// has its first two entries swapped so that adjacent facets induce opposite
/// orientations on their shared ridge (and the `±e_i` model gets positive
/// oriented volume).
///
/// ```
/// let octahedron = flexilab::complexes::cross_polytope_complex(3);
/// assert_eq!(octahedron.edges().len(), 12);
/// assert_eq!(octahedron.diagonals().len(), 3);
/// ```
pub fn cross_polytope_complex(n: usize) -> PseudoManifold {
    assert!((2..=24).contains(&n), "cross-polytope boundary supported for 2 <= n <= 24");
    let mut names: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
    names.extend((1..=n).map(|i| format!("b{i}")));
    let mut facets = Vec::with_capacity(1 << n);
    for signs in 0..(1u32 << n) {
        let mut f: Vec<usize> = (0..n)
            .map(|i| if signs >> i & 1 == 0 { i } else { n + i })
            .collect();
        if signs.count_ones() % 2 == 1 && n >= 2 {
            f.swap(0, 1);
        }
        facets.push(f);
    }
    PseudoManifold::build(names, facets).expect("cross-polytope boundary is a pseudo-manifold")
}

/// Vertex involution of a complex, of line- or plane-symmetry kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymmetryKind {
    Line,
    Plane,
}

#[derive(Debug, Clone)]
pub struct Involution {
    perm: Vec<usize>,
    kind: SymmetryKind,
}

impl Involution {
    /// Validate `perm` as a simplicial involution of `complex`.
    ///
    /// Line symmetry additionally requires that no vertex is fixed and that
    /// no two paired vertices are joined by an edge.
    pub fn new(
        complex: &PseudoManifold,
        perm: Vec<usize>,
        kind: SymmetryKind,
    ) -> Result<Self, ComplexError> {
        assert_eq!(perm.len(), complex.vertex_count());
        for v in 0..perm.len() {
            if perm[perm[v]] != v {
                return Err(ComplexError::NotInvolution(v));
            }
        }
        let mut facet_sets: Vec<Vec<usize>> = complex
            .facets()
            .iter()
            .map(|f| {
                let mut s = f.clone();
                s.sort_unstable();
                s
            })
            .collect();
        facet_sets.sort_unstable();
        for (fi, f) in complex.facets().iter().enumerate() {
            let mut image: Vec<usize> = f.iter().map(|&v| perm[v]).collect();
            image.sort_unstable();
            if facet_sets.binary_search(&image).is_err() {
                return Err(ComplexError::NotSimplicial(fi));
            }
        }
        if kind == SymmetryKind::Line {
            for v in 0..perm.len() {
                if perm[v] == v {
                    return Err(ComplexError::FixedVertex(v));
                }
                if complex.has_edge(v, perm[v]) {
                    return Err(ComplexError::PairedEdge(v, perm[v]));
                }
            }
        }
        Ok(Self { perm, kind })
    }

    pub fn kind(&self) -> SymmetryKind {
        self.kind
    }

    pub fn map(&self, v: usize) -> usize {
        self.perm[v]
    }

    pub fn fixed_vertices(&self) -> Vec<usize> {
        (0..self.perm.len()).filter(|&v| self.perm[v] == v).collect()
    }

    /// One representative per vertex orbit, smallest id first.
    pub fn orbit_representatives(&self) -> Vec<usize> {
        (0..self.perm.len()).filter(|&v| v <= self.perm[v]).collect()
    }
}

/// JSON mesh format: orientation is the listed vertex order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshJson {
    pub dim: usize,
    pub vertices: Vec<String>,
    pub facets: Vec<Vec<String>>,
}

impl MeshJson {
    pub fn from_complex(c: &PseudoManifold) -> Self {
        Self {
            dim: c.dim(),
            vertices: c.vertex_names().to_vec(),
            facets: c
                .facets()
                .iter()
                .map(|f| f.iter().map(|&v| c.vertex_names()[v].clone()).collect())
                .collect(),
        }
    }

    pub fn into_complex(self) -> Result<PseudoManifold, ComplexError> {
        let ids: BTreeMap<&str, usize> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let mut facets = Vec::with_capacity(self.facets.len());
        for f in &self.facets {
            let mut fi = Vec::with_capacity(f.len());
            for v in f {
                let id = ids
                    .get(v.as_str())
                    .ok_or_else(|| ComplexError::UnknownVertex(v.clone()))?;
                fi.push(*id);
            }
            facets.push(fi);
        }
        PseudoManifold::build(self.vertices, facets)
    }
}
