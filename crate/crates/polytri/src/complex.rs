//! Compact polyhedral complexes with integral structure: exact vertices,
//! vertex-determined cells closed under faces and intersections, skeletons,
//! boundaries, and subdivisions with carrier maps.
//!
//! One global ambient chart per complex; cells may be lower-dimensional than
//! the ambient space and are handled through their intrinsic charts.

use crate::hull::{self, Hull, HullError};
use crate::linalg::{vec_dot, vec_scale, Mat, Point};
use crate::lp::{self, Constraint, LpResult};
use crate::rat::Rat;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::collections::{BTreeMap, BTreeSet};

pub type VertexId = usize;

#[derive(thiserror::Error, Debug, Clone)]
pub enum ComplexError {
    #[error("cells {0:?} and {1:?} meet outside a common face")]
    NotIntersectionClosed(Cell, Cell),
    #[error("vertex {0} is not a hull vertex of any cell")]
    RedundantVertex(VertexId),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unknown vertex id {0}")]
    UnknownVertex(VertexId),
    #[error("two vertices share the same coordinates")]
    DuplicatePoint,
    #[error("complex is not pure-dimensional")]
    NotPure,
    #[error("candidate does not cover the parent: witness point {witness:?}")]
    NotComplete { witness: Point },
    #[error("cell {0:?} is not contained in any parent cell")]
    CellNotContained(Cell),
    #[error("not a subcomplex")]
    NotSubcomplex,
    #[error(transparent)]
    Hull(#[from] HullError),
}

/// A cell, identified by its (sorted) vertex ids. The stored dimension is the
/// dimension of the affine hull of its vertices.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Cell {
    verts: Vec<VertexId>,
    dim: usize,
}

impl Cell {
    pub fn new(mut verts: Vec<VertexId>, dim: usize) -> Self {
        verts.sort_unstable();
        verts.dedup();
        Cell { verts, dim }
    }

    pub fn verts(&self) -> &[VertexId] {
        &self.verts
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_simplex(&self) -> bool {
        self.verts.len() == self.dim + 1
    }

    pub fn contains_ids(&self, other: &Cell) -> bool {
        other.verts.iter().all(|v| self.verts.binary_search(v).is_ok())
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.verts.binary_search(&v).is_ok()
    }
}

/// A full-rank lattice in the ambient chart, given by a basis matrix whose
/// columns generate it.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntegralStructure {
    basis: Mat,
}

impl IntegralStructure {
    pub fn standard(n: usize) -> Self {
        IntegralStructure { basis: Mat::identity(n) }
    }

    pub fn from_basis(basis: Mat) -> Result<Self, ComplexError> {
        if basis.nrows() != basis.ncols() || basis.det().is_zero() {
            return Err(ComplexError::DimensionMismatch(
                "lattice basis must be square and nonsingular".into(),
            ));
        }
        Ok(IntegralStructure { basis })
    }

    /// Lattice generated by the given columns; they must span the space.
    pub fn from_generators(gens: &[Point]) -> Option<Self> {
        crate::linalg::lattice_from_generators(gens).map(|basis| IntegralStructure { basis })
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Coordinates of an ambient point in the lattice basis.
    pub fn coords(&self, p: &Point) -> Vec<Rat> {
        self.basis
            .inverse()
            .expect("lattice basis is nonsingular")
            .mul_vec(p)
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.coords(p).iter().all(|x| x.denom().is_one())
    }

    /// The first lattice point on the ray through `v` (which must be nonzero).
    pub fn primitive_on_ray(&self, v: &Point) -> Point {
        let c = self.coords(v);
        let ints = crate::linalg::primitive_integer_vector(&c);
        let prim: Vec<Rat> = ints.into_iter().map(Rat::from_integer).collect();
        self.basis.mul_vec(&prim)
    }
}

/// A compact polyhedral complex: vertices with exact rational coordinates and
/// a face-closed, intersection-closed, vertex-determined cell set.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolyComplex {
    ambient_dim: usize,
    vertices: BTreeMap<VertexId, Point>,
    cells: BTreeSet<Cell>,
    integral: IntegralStructure,
}

/// Builds a complex from vertices and maximal cells, closing under faces and
/// checking that cells intersect in common faces.
///
/// Listed points that are not hull vertices of their cell are dropped from
/// that cell; a vertex that ends up a hull vertex of no cell is an error.
pub fn build_complex(
    vertices: BTreeMap<VertexId, Point>,
    maximal_cells: &[Vec<VertexId>],
    integral: IntegralStructure,
) -> Result<PolyComplex, ComplexError> {
    PolyComplex::build(vertices, maximal_cells, integral, true)
}

impl PolyComplex {
    pub(crate) fn build(
        vertices: BTreeMap<VertexId, Point>,
        maximal_cells: &[Vec<VertexId>],
        integral: IntegralStructure,
        check_intersections: bool,
    ) -> Result<Self, ComplexError> {
        let ambient_dim = vertices
            .values()
            .next()
            .map(Vec::len)
            .unwrap_or(integral.dim());
        if integral.dim() != ambient_dim {
            return Err(ComplexError::DimensionMismatch(format!(
                "lattice dimension {} vs ambient {}",
                integral.dim(),
                ambient_dim
            )));
        }
        for p in vertices.values() {
            if p.len() != ambient_dim {
                return Err(ComplexError::DimensionMismatch(
                    "vertex coordinate length".into(),
                ));
            }
        }
        {
            let set: BTreeSet<&Point> = vertices.values().collect();
            if set.len() != vertices.len() {
                return Err(ComplexError::DuplicatePoint);
            }
        }

        let mut cells: BTreeSet<Cell> = BTreeSet::new();
        for ids in maximal_cells {
            for v in ids {
                if !vertices.contains_key(v) {
                    return Err(ComplexError::UnknownVertex(*v));
                }
            }
            let mut ids = ids.clone();
            ids.sort_unstable();
            ids.dedup();
            let pts: Vec<Point> = ids.iter().map(|v| vertices[v].clone()).collect();
            let faces = hull::polytope_faces(&pts)?;
            for (local, dim) in faces {
                cells.insert(Cell::new(local.iter().map(|&i| ids[i]).collect(), dim));
            }
        }

        let complex = PolyComplex { ambient_dim, vertices, cells, integral };

        // Every vertex must be extreme in some cell.
        for &v in complex.vertices.keys() {
            if !complex.cells.contains(&Cell::new(vec![v], 0)) {
                return Err(ComplexError::RedundantVertex(v));
            }
        }

        if check_intersections {
            let maximal = complex.maximal_cells();
            let mut hulls: Vec<Hull> = Vec::with_capacity(maximal.len());
            for c in &maximal {
                hulls.push(complex.hull_of(c)?);
            }
            for i in 0..maximal.len() {
                for j in i + 1..maximal.len() {
                    if !hulls_meet_in_common_face(&hulls[i], &hulls[j]) {
                        return Err(ComplexError::NotIntersectionClosed(
                            maximal[i].clone(),
                            maximal[j].clone(),
                        ));
                    }
                }
            }
        }
        Ok(complex)
    }

    /// Assembles a complex from pieces already known to be proper (e.g. taken
    /// from the facets of one hull); skips the pairwise intersection check.
    pub(crate) fn assemble_from_pieces(
        ambient_dim: usize,
        vertices: &BTreeMap<VertexId, Point>,
        integral: IntegralStructure,
        pieces: &[(Vec<VertexId>, usize)],
    ) -> Self {
        let mut cells: BTreeSet<Cell> = BTreeSet::new();
        for (ids, dim) in pieces {
            let cell = Cell::new(ids.clone(), *dim);
            if cell.is_simplex() {
                // Faces of a simplex are its vertex subsets.
                for size in 1..=cell.verts.len() {
                    for sub in
                        itertools::Itertools::combinations(cell.verts.iter().copied(), size)
                    {
                        cells.insert(Cell::new(sub, size - 1));
                    }
                }
            } else {
                let pts: Vec<Point> = cell.verts.iter().map(|v| vertices[v].clone()).collect();
                let faces = hull::polytope_faces(&pts).expect("piece points are distinct");
                for (local, d) in faces {
                    cells.insert(Cell::new(
                        local.iter().map(|&i| cell.verts[i]).collect(),
                        d,
                    ));
                }
            }
        }
        let used: BTreeSet<VertexId> = cells
            .iter()
            .flat_map(|c| c.verts.iter().copied())
            .collect();
        let vertices = vertices
            .iter()
            .filter(|(v, _)| used.contains(v))
            .map(|(v, p)| (*v, p.clone()))
            .collect();
        PolyComplex { ambient_dim, vertices, cells, integral }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn integral(&self) -> &IntegralStructure {
        &self.integral
    }

    pub fn vertices(&self) -> &BTreeMap<VertexId, Point> {
        &self.vertices
    }

    pub fn vertex_ids(&self) -> Vec<VertexId> {
        self.vertices.keys().copied().collect()
    }

    pub fn point(&self, v: VertexId) -> &Point {
        &self.vertices[&v]
    }

    pub fn cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn has_cell(&self, cell: &Cell) -> bool {
        self.cells.contains(cell)
    }

    pub fn cells_of_dim(&self, k: usize) -> Vec<&Cell> {
        self.cells.iter().filter(|c| c.dim == k).collect()
    }

    pub fn max_dim(&self) -> usize {
        self.cells.iter().map(|c| c.dim).max().unwrap_or(0)
    }

    /// Cells not contained (by vertex set) in any other cell.
    pub fn maximal_cells(&self) -> Vec<&Cell> {
        self.cells
            .iter()
            .filter(|c| !self.cells.iter().any(|d| d != *c && d.contains_ids(c)))
            .collect()
    }

    pub fn cell_points(&self, cell: &Cell) -> Vec<Point> {
        cell.verts.iter().map(|v| self.vertices[v].clone()).collect()
    }

    pub fn hull_of(&self, cell: &Cell) -> Result<Hull, ComplexError> {
        Ok(hull::convex_hull(&self.cell_points(cell))?)
    }

    /// The subcomplex of cells of dimension at most `k`.
    pub fn skeleton(&self, k: usize) -> PolyComplex {
        let seed: BTreeSet<Cell> = self.cells.iter().filter(|c| c.dim <= k).cloned().collect();
        self.subcomplex_with(seed)
    }

    /// The boundary subcomplex: closure of the facets incident to exactly one
    /// top-dimensional cell. Requires the complex to be pure-dimensional.
    pub fn boundary(&self) -> Result<PolyComplex, ComplexError> {
        let d = self.max_dim();
        if self.maximal_cells().iter().any(|c| c.dim != d) {
            return Err(ComplexError::NotPure);
        }
        if d == 0 {
            return Ok(self.subcomplex_with(BTreeSet::new()));
        }
        let top: Vec<&Cell> = self.cells_of_dim(d);
        let mut seed: BTreeSet<Cell> = BTreeSet::new();
        for f in self.cells_of_dim(d - 1) {
            let incident = top.iter().filter(|t| t.contains_ids(f)).count();
            if incident == 1 {
                seed.insert(f.clone());
            }
        }
        Ok(self.subcomplex_with(seed))
    }

    /// Subcomplex generated by a seed set of cells of `self` (closure taken).
    pub fn subcomplex_with(&self, seed: BTreeSet<Cell>) -> PolyComplex {
        let cells: BTreeSet<Cell> = self
            .cells
            .iter()
            .filter(|c| seed.contains(c) || seed.iter().any(|s| s.contains_ids(c)))
            .cloned()
            .collect();
        let used: BTreeSet<VertexId> = cells
            .iter()
            .flat_map(|c| c.verts.iter().copied())
            .collect();
        PolyComplex {
            ambient_dim: self.ambient_dim,
            vertices: self
                .vertices
                .iter()
                .filter(|(v, _)| used.contains(v))
                .map(|(v, p)| (*v, p.clone()))
                .collect(),
            cells,
            integral: self.integral.clone(),
        }
    }

    /// Subcomplex generated by the given cells, which must be cells of self.
    pub fn subcomplex_from_cells(&self, seed: &[Cell]) -> Result<PolyComplex, ComplexError> {
        for c in seed {
            if !self.cells.contains(c) {
                return Err(ComplexError::NotSubcomplex);
            }
        }
        Ok(self.subcomplex_with(seed.iter().cloned().collect()))
    }

    pub fn is_subcomplex_of(&self, sup: &PolyComplex) -> bool {
        self.ambient_dim == sup.ambient_dim
            && self
                .vertices
                .iter()
                .all(|(v, p)| sup.vertices.get(v) == Some(p))
            && self.cells.iter().all(|c| sup.cells.contains(c))
    }

    /// Smallest face of `cell` containing all the given points (which must
    /// lie inside `cell`); this is also the smallest cell of the complex
    /// containing them.
    pub fn smallest_face_containing(
        &self,
        cell: &Cell,
        cell_hull: &Hull,
        points: &[Point],
    ) -> Cell {
        if cell.dim == 0 {
            return cell.clone();
        }
        let coords: Vec<Vec<Rat>> = points
            .iter()
            .map(|p| {
                cell_hull
                    .chart
                    .to_intrinsic(p)
                    .expect("points lie inside the cell")
            })
            .collect();
        let tight: Vec<&hull::Facet> = cell_hull
            .facets
            .iter()
            .filter(|f| coords.iter().all(|x| vec_dot(&f.normal, x) == f.offset))
            .collect();
        if tight.is_empty() {
            return cell.clone();
        }
        let verts: Vec<VertexId> = cell
            .verts
            .iter()
            .copied()
            .filter(|&v| {
                let x = cell_hull
                    .chart
                    .to_intrinsic(self.point(v))
                    .expect("cell vertices are in the cell chart");
                tight.iter().all(|f| vec_dot(&f.normal, &x) == f.offset)
            })
            .collect();
        self.cells
            .iter()
            .find(|c| c.verts == verts)
            .expect("faces of a cell are cells of the complex")
            .clone()
    }

    /// Exact equality up to relabeling of vertex ids (coordinates decide).
    pub fn geom_eq(&self, other: &PolyComplex) -> bool {
        if self.ambient_dim != other.ambient_dim {
            return false;
        }
        type Canon = (Vec<Point>, BTreeSet<(Vec<usize>, usize)>);
        let canon = |c: &PolyComplex| -> Canon {
            let mut pts: Vec<(&Point, VertexId)> =
                c.vertices.iter().map(|(v, p)| (p, *v)).collect();
            pts.sort();
            let rank: BTreeMap<VertexId, usize> =
                pts.iter().enumerate().map(|(i, (_, v))| (*v, i)).collect();
            let cells = c
                .cells
                .iter()
                .map(|cell| {
                    let mut ids: Vec<usize> = cell.verts.iter().map(|v| rank[v]).collect();
                    ids.sort_unstable();
                    (ids, cell.dim)
                })
                .collect();
            (pts.into_iter().map(|(p, _)| p.clone()).collect(), cells)
        };
        canon(self) == canon(other)
    }

    /// Full invariant check: face closure, extreme vertex sets, and pairwise
    /// proper intersections of maximal cells. Used by the test suites.
    pub fn validate_full(&self) -> Result<(), ComplexError> {
        for cell in &self.cells {
            let pts = self.cell_points(cell);
            let h = hull::convex_hull(&pts)?;
            if h.vertices.len() != cell.verts.len() || h.dim != cell.dim {
                return Err(ComplexError::DimensionMismatch(format!(
                    "cell {cell:?} is not its own hull vertex set"
                )));
            }
            let faces = hull::polytope_faces(&pts)?;
            for (local, d) in faces {
                let face = Cell::new(local.iter().map(|&i| cell.verts[i]).collect(), d);
                if !self.cells.contains(&face) {
                    return Err(ComplexError::DimensionMismatch(format!(
                        "missing face {face:?} of {cell:?}"
                    )));
                }
            }
        }
        let maximal = self.maximal_cells();
        for i in 0..maximal.len() {
            for j in i + 1..maximal.len() {
                let ha = self.hull_of(maximal[i])?;
                let hb = self.hull_of(maximal[j])?;
                if !hulls_meet_in_common_face(&ha, &hb) {
                    return Err(ComplexError::NotIntersectionClosed(
                        maximal[i].clone(),
                        maximal[j].clone(),
                    ));
                }
            }
        }
        for &v in self.vertices.keys() {
            if !self.cells.contains(&Cell::new(vec![v], 0)) {
                return Err(ComplexError::RedundantVertex(v));
            }
        }
        Ok(())
    }
}

/// A subdivision: a refining complex over a parent with the same support,
/// with a carrier map sending each refined cell to the smallest parent cell
/// containing it.
#[derive(Clone, Debug)]
pub struct Subdivision {
    parent: PolyComplex,
    refined: PolyComplex,
    carrier: BTreeMap<Cell, Cell>,
}

impl Subdivision {
    pub fn trivial(complex: &PolyComplex) -> Subdivision {
        let carrier = complex.cells().map(|c| (c.clone(), c.clone())).collect();
        Subdivision {
            parent: complex.clone(),
            refined: complex.clone(),
            carrier,
        }
    }

    pub(crate) fn new_unchecked(
        parent: PolyComplex,
        refined: PolyComplex,
        carrier: BTreeMap<Cell, Cell>,
    ) -> Self {
        Subdivision { parent, refined, carrier }
    }

    pub fn parent(&self) -> &PolyComplex {
        &self.parent
    }

    pub fn refined(&self) -> &PolyComplex {
        &self.refined
    }

    pub fn carrier(&self) -> &BTreeMap<Cell, Cell> {
        &self.carrier
    }

    pub fn carrier_of(&self, cell: &Cell) -> &Cell {
        &self.carrier[cell]
    }

    pub fn is_simplicial(&self) -> bool {
        self.refined.cells.iter().all(Cell::is_simplex)
    }

    /// Restriction to a subcomplex of the parent: the refined cells carried
    /// into it, as a subdivision of that subcomplex.
    pub fn restrict_to(&self, sub: &PolyComplex) -> Result<Subdivision, ComplexError> {
        if !sub.is_subcomplex_of(&self.parent) {
            return Err(ComplexError::NotSubcomplex);
        }
        let cells: BTreeSet<Cell> = self
            .refined
            .cells()
            .filter(|c| sub.has_cell(self.carrier_of(c)))
            .cloned()
            .collect();
        let refined = self.refined.subcomplex_with(cells);
        let carrier = refined
            .cells()
            .map(|c| (c.clone(), self.carrier_of(c).clone()))
            .collect();
        Ok(Subdivision { parent: sub.clone(), refined, carrier })
    }

    /// Geometric equality of the refined complexes.
    pub fn geom_eq(&self, other: &Subdivision) -> bool {
        self.refined.geom_eq(&other.refined)
    }
}

/// Decides whether `candidate` subdivides `parent`; on success returns it
/// with its carrier map, otherwise reports a witness of the failure.
pub fn is_subdivision(
    candidate: &PolyComplex,
    parent: &PolyComplex,
) -> Result<Subdivision, ComplexError> {
    if candidate.ambient_dim != parent.ambient_dim {
        return Err(ComplexError::DimensionMismatch(
            "candidate and parent ambient dimensions differ".into(),
        ));
    }
    let parent_cells: Vec<&Cell> = parent.cells().collect();
    let mut parent_hulls: Vec<Hull> = Vec::with_capacity(parent_cells.len());
    for c in &parent_cells {
        parent_hulls.push(parent.hull_of(c)?);
    }
    let mut carrier: BTreeMap<Cell, Cell> = BTreeMap::new();
    for c in candidate.cells() {
        let pts = candidate.cell_points(c);
        let min = parent_cells
            .iter()
            .enumerate()
            .filter(|(i, _)| pts.iter().all(|x| parent_hulls[*i].contains(x)))
            .map(|(_, p)| *p)
            .min_by_key(|p| (p.dim, p.verts.len(), p.verts.clone()));
        let Some(min) = min else {
            return Err(ComplexError::CellNotContained(c.clone()));
        };
        carrier.insert(c.clone(), min.clone());
    }
    // Completeness: per maximal parent cell, the carried full-dimensional
    // candidate cells must fill the cell's volume exactly.
    for sigma in parent.maximal_cells() {
        let idx = parent_cells.iter().position(|c| *c == sigma).unwrap();
        let sigma_hull = &parent_hulls[idx];
        let chart = &sigma_hull.chart;
        let target = hull::polytope_volume(&parent.cell_points(sigma), chart)?;
        let pieces: Vec<&Cell> = candidate
            .cells()
            .filter(|c| c.dim == sigma.dim && &carrier[*c] == sigma)
            .collect();
        let mut covered = Rat::zero();
        for p in &pieces {
            covered += hull::polytope_volume(&candidate.cell_points(p), chart)?;
        }
        if covered != target {
            let witness = completeness_witness(candidate, sigma_hull, &pieces)?;
            return Err(ComplexError::NotComplete { witness });
        }
    }
    Ok(Subdivision {
        parent: parent.clone(),
        refined: candidate.clone(),
        carrier,
    })
}

/// Finds a point of `sigma` missed by the candidate pieces: walk across an
/// exposed piece facet, or take the cell centroid when nothing covers it.
fn completeness_witness(
    candidate: &PolyComplex,
    sigma_hull: &Hull,
    pieces: &[&Cell],
) -> Result<Point, ComplexError> {
    let piece_hulls: Vec<Hull> = pieces
        .iter()
        .map(|p| candidate.hull_of(p))
        .collect::<Result<_, _>>()?;
    let outside = |x: &Point| piece_hulls.iter().all(|h| !h.contains(x));
    if pieces.is_empty() {
        return Ok(sigma_hull.interior_point());
    }
    for (pi, p) in pieces.iter().enumerate() {
        let ph = &piece_hulls[pi];
        for facet in &ph.facets {
            let fpts: Vec<Point> = facet
                .vertices
                .iter()
                .map(|&l| candidate.point(p.verts[l]).clone())
                .collect();
            let centroid: Point = {
                let k = Rat::from_integer(BigInt::from(fpts.len() as i64));
                (0..fpts[0].len())
                    .map(|j| fpts.iter().fold(Rat::zero(), |a, q| a + &q[j]) / &k)
                    .collect()
            };
            // Facets on the boundary of sigma cannot expose a gap.
            if !sigma_hull.contains_in_relative_interior(&centroid) {
                continue;
            }
            let covered_by_other = piece_hulls
                .iter()
                .enumerate()
                .any(|(qi, qh)| qi != pi && qh.contains(&centroid));
            if covered_by_other {
                continue;
            }
            // Step across the facet, away from this piece.
            let n_amb = ph.chart.linear_map().transpose().mul_vec(&facet.normal);
            let mut eps = Rat::one();
            for _ in 0..128 {
                let step = vec_scale(&n_amb, &eps);
                let x: Point = centroid.iter().zip(&step).map(|(c, s)| c + s).collect();
                if sigma_hull.contains(&x) && outside(&x) {
                    return Ok(x);
                }
                eps /= Rat::from_integer(BigInt::from(2));
            }
        }
    }
    let c = sigma_hull.interior_point();
    debug_assert!(outside(&c), "no witness found for an incomplete cover");
    Ok(c)
}

/// Exact test that two polytopes (given by their hulls) intersect in a
/// common face of both: locate a relative-interior point of the intersection
/// by LP, then compare the minimal faces around it.
pub(crate) fn hulls_meet_in_common_face(ha: &Hull, hb: &Hull) -> bool {
    let n = ha.chart.ambient_dim();
    let mut cons: Vec<Constraint> = Vec::new();
    let mut ineq_idx: Vec<usize> = Vec::new();
    for h in [ha, hb] {
        for sn in &h.chart.span_normals {
            cons.push(Constraint::eq(sn.clone(), vec_dot(sn, &h.chart.base)));
        }
        if h.dim == 0 {
            for j in 0..n {
                let mut e = vec![Rat::zero(); n];
                e[j] = Rat::one();
                cons.push(Constraint::eq(e, h.points[h.vertices[0]][j].clone()));
            }
        }
        for (coeffs, rhs) in h.ambient_facet_halfspaces() {
            ineq_idx.push(cons.len());
            cons.push(Constraint::le(coeffs, rhs));
        }
    }
    if lp::feasible_point(&cons).is_err() {
        return true; // empty intersection is a common (empty) face
    }
    // A relative-interior point: average the maximizers of each slack
    // (slack = rhs - coeffs . x, so minimize coeffs . x).
    let mut samples: Vec<Vec<Rat>> = Vec::new();
    for idx in &ineq_idx {
        let obj: Vec<Rat> = cons[*idx].coeffs.clone();
        match lp::minimize(&obj, &cons) {
            LpResult::Optimal { point, .. } => samples.push(point),
            LpResult::Unbounded => unreachable!("compact cells give bounded LPs"),
            LpResult::Infeasible { .. } => unreachable!("already feasible"),
        }
    }
    if samples.is_empty() {
        samples.push(lp::feasible_point(&cons).expect("already feasible"));
    }
    let k = Rat::from_integer(BigInt::from(samples.len() as i64));
    let z: Point = (0..n)
        .map(|j| samples.iter().fold(Rat::zero(), |acc, p| acc + &p[j]) / &k)
        .collect();
    // Smallest faces of each hull at z must lie inside the other polytope.
    let fa = smallest_face_points(ha, &z);
    let fb = smallest_face_points(hb, &z);
    fa.iter().all(|p| hb.contains(p)) && fb.iter().all(|p| ha.contains(p))
}

/// Vertex points of the smallest face of the hull containing `z` (which must
/// lie in the hull).
fn smallest_face_points(h: &Hull, z: &Point) -> Vec<Point> {
    if h.dim == 0 {
        return vec![h.points[h.vertices[0]].clone()];
    }
    let x = h
        .chart
        .to_intrinsic(z)
        .expect("point lies in the hull's affine span");
    let tight: Vec<&hull::Facet> = h
        .facets
        .iter()
        .filter(|f| vec_dot(&f.normal, &x) == f.offset)
        .collect();
    h.vertices
        .iter()
        .copied()
        .filter(|&v| {
            tight
                .iter()
                .all(|f| vec_dot(&f.normal, &h.intrinsic[v]) == f.offset)
        })
        .map(|v| h.points[v].clone())
        .collect()
}
