//! Conical polyhedral complexes: pointed cones on ray generators with an
//! integral structure, slicing functions, the cone/slice correspondence with
//! compact complexes, and the extension of regular triangulations in the
//! conical setting (which introduces no new edges).

use crate::complex::{
    Cell, ComplexError, IntegralStructure, PolyComplex, VertexId,
};
use crate::hull::{self};
use crate::lifting::{Lifting, LiftingError};
use crate::linalg::{vec_dot, Mat, Point};
use crate::lp::{self, Constraint, LpResult};
use crate::rat::Rat;
use crate::triangulation::{self, TriangulationError};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};

pub type RayId = usize;

#[derive(thiserror::Error, Debug, Clone)]
pub enum ConicalError {
    #[error("function is not slicing: {0}")]
    NotSlicing(String),
    #[error("the complex admits no slicing function")]
    NoSlicingFunction,
    #[error("cone {0:?} is not pointed")]
    NotPointed(Cell),
    #[error("ray {0} is not extreme in cone {1:?}")]
    RedundantRay(RayId, Cell),
    #[error("cones {0:?} and {1:?} meet outside a common face")]
    NotIntersectionClosed(Cell, Cell),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("duplicate or zero ray generator")]
    BadRay,
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Lifting(#[from] LiftingError),
    #[error(transparent)]
    Extension(#[from] TriangulationError),
}

/// A ray: its given generator and the primitive generator on the complex's
/// lattice.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Ray {
    pub generator: Point,
    pub primitive: Point,
}

/// A conical polyhedral complex: rays plus ray-determined cones, face- and
/// intersection-closed, all pointed, with the origin as the unique 0-cone
/// (stored as the empty ray set).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConicalComplex {
    ambient_dim: usize,
    rays: BTreeMap<RayId, Ray>,
    cones: BTreeSet<Cell>,
    integral: IntegralStructure,
}

/// A slicing function: positive rational values on rays, extended linearly
/// on each cone; vanishes only at the origin.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SlicingFunction {
    ray_values: BTreeMap<RayId, Rat>,
}

impl SlicingFunction {
    pub fn new(ray_values: BTreeMap<RayId, Rat>) -> Self {
        SlicingFunction { ray_values }
    }

    pub fn ray_values(&self) -> &BTreeMap<RayId, Rat> {
        &self.ray_values
    }

    pub fn value_on_ray(&self, r: RayId) -> Option<&Rat> {
        self.ray_values.get(&r)
    }
}

impl ConicalComplex {
    /// Builds and validates a conical complex from ray generators and
    /// maximal cones (ray-id sets). The origin cone is added automatically.
    pub fn build(
        rays: BTreeMap<RayId, Point>,
        maximal_cones: &[Vec<RayId>],
        integral: IntegralStructure,
    ) -> Result<Self, ConicalError> {
        Self::build_inner(rays, maximal_cones, integral, true)
    }

    pub(crate) fn build_inner(
        rays: BTreeMap<RayId, Point>,
        maximal_cones: &[Vec<RayId>],
        integral: IntegralStructure,
        check_intersections: bool,
    ) -> Result<Self, ConicalError> {
        let ambient_dim = integral.dim();
        for g in rays.values() {
            if g.len() != ambient_dim {
                return Err(ConicalError::DimensionMismatch(
                    "ray generator length".into(),
                ));
            }
            if g.iter().all(Rat::is_zero) {
                return Err(ConicalError::BadRay);
            }
        }
        // Distinct ray directions.
        {
            let dirs: BTreeSet<Vec<BigInt>> = rays
                .values()
                .map(|g| crate::linalg::primitive_integer_vector(g))
                .collect();
            if dirs.len() != rays.len() {
                return Err(ConicalError::BadRay);
            }
        }
        let ray_objs: BTreeMap<RayId, Ray> = rays
            .iter()
            .map(|(id, g)| {
                (
                    *id,
                    Ray {
                        generator: g.clone(),
                        primitive: integral.primitive_on_ray(g),
                    },
                )
            })
            .collect();
        let mut cones: BTreeSet<Cell> = BTreeSet::new();
        cones.insert(Cell::new(vec![], 0));
        let mut geoms: Vec<(Cell, ConeGeom)> = Vec::new();
        for ids in maximal_cones {
            let mut ids = ids.clone();
            ids.sort_unstable();
            ids.dedup();
            let gens: Vec<Point> = ids.iter().map(|r| rays[r].clone()).collect();
            let geom = cone_geometry(&gens).ok_or_else(|| {
                ConicalError::NotPointed(Cell::new(ids.clone(), 0))
            })?;
            // Every listed ray must be extreme in the cone.
            if geom.extreme_locals.len() != ids.len() {
                let missing = (0..ids.len())
                    .find(|i| !geom.extreme_locals.contains(i))
                    .unwrap();
                return Err(ConicalError::RedundantRay(
                    ids[missing],
                    Cell::new(ids.clone(), geom.dim),
                ));
            }
            let top = Cell::new(ids.clone(), geom.dim);
            // Face closure via the slice polytope.
            for (local_face, fdim) in &geom.faces {
                let face_ids: Vec<RayId> = local_face.iter().map(|&i| ids[i]).collect();
                cones.insert(Cell::new(face_ids, fdim + 1));
            }
            for (id, g) in ids.iter().zip(&gens) {
                let _ = (id, g);
            }
            geoms.push((top, geom));
        }
        // Ray cells for every ray must exist (each ray extreme in its cones);
        // rays not used by any cone are standalone 1-cones only if listed as
        // maximal; otherwise they are unused -> reject.
        for id in ray_objs.keys() {
            if !cones.contains(&Cell::new(vec![*id], 1)) {
                return Err(ConicalError::RedundantRay(*id, Cell::new(vec![*id], 1)));
            }
        }
        if check_intersections {
            for i in 0..geoms.len() {
                for j in i + 1..geoms.len() {
                    if !cones_meet_in_common_face(&geoms[i], &geoms[j]) {
                        return Err(ConicalError::NotIntersectionClosed(
                            geoms[i].0.clone(),
                            geoms[j].0.clone(),
                        ));
                    }
                }
            }
        }
        Ok(ConicalComplex {
            ambient_dim,
            rays: ray_objs,
            cones,
            integral,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn integral(&self) -> &IntegralStructure {
        &self.integral
    }

    pub fn rays(&self) -> &BTreeMap<RayId, Ray> {
        &self.rays
    }

    pub fn ray_ids(&self) -> Vec<RayId> {
        self.rays.keys().copied().collect()
    }

    pub fn generator(&self, r: RayId) -> &Point {
        &self.rays[&r].generator
    }

    pub fn cones(&self) -> impl Iterator<Item = &Cell> {
        self.cones.iter()
    }

    pub fn has_cone(&self, c: &Cell) -> bool {
        self.cones.contains(c)
    }

    pub fn cones_of_dim(&self, k: usize) -> Vec<&Cell> {
        self.cones.iter().filter(|c| c.dim() == k).collect()
    }

    pub fn max_dim(&self) -> usize {
        self.cones.iter().map(Cell::dim).max().unwrap_or(0)
    }

    pub fn maximal_cones(&self) -> Vec<&Cell> {
        self.cones
            .iter()
            .filter(|c| {
                !c.verts().is_empty()
                    && !self.cones.iter().any(|d| d != *c && d.contains_ids(c))
            })
            .collect()
    }

    /// The subcomplex of cones of dimension at most `k` (plus the origin).
    pub fn skeleton(&self, k: usize) -> ConicalComplex {
        let cones: BTreeSet<Cell> = self
            .cones
            .iter()
            .filter(|c| c.dim() <= k)
            .cloned()
            .collect();
        self.subcomplex_with(cones)
    }

    pub fn subcomplex_with(&self, seed: BTreeSet<Cell>) -> ConicalComplex {
        let mut cones: BTreeSet<Cell> = self
            .cones
            .iter()
            .filter(|c| seed.contains(c) || seed.iter().any(|s| s.contains_ids(c)))
            .cloned()
            .collect();
        cones.insert(Cell::new(vec![], 0));
        let used: BTreeSet<RayId> = cones
            .iter()
            .flat_map(|c| c.verts().iter().copied())
            .collect();
        ConicalComplex {
            ambient_dim: self.ambient_dim,
            rays: self
                .rays
                .iter()
                .filter(|(r, _)| used.contains(r))
                .map(|(r, x)| (*r, x.clone()))
                .collect(),
            cones,
            integral: self.integral.clone(),
        }
    }

    pub fn is_subcomplex_of(&self, sup: &ConicalComplex) -> bool {
        self.ambient_dim == sup.ambient_dim
            && self
                .rays
                .iter()
                .all(|(r, ray)| sup.rays.get(r).map(|s| s.generator == ray.generator) == Some(true))
            && self.cones.iter().all(|c| sup.cones.contains(c))
    }

    /// Every cone simplicial: the number of rays equals the dimension.
    pub fn is_simplicial(&self) -> bool {
        self.cones
            .iter()
            .all(|c| c.verts().is_empty() || c.verts().len() == c.dim())
    }

    /// Canonical primitive directions of the rays, for comparisons.
    pub fn ray_direction_set(&self) -> BTreeSet<Vec<BigInt>> {
        self.rays
            .values()
            .map(|r| crate::linalg::primitive_integer_vector(&r.generator))
            .collect()
    }

    /// Checks a slicing function: positive on each ray, linear on each cone.
    pub fn validate_slicing(&self, h: &SlicingFunction) -> Result<(), ConicalError> {
        let dom: BTreeSet<RayId> = h.ray_values.keys().copied().collect();
        let ids: BTreeSet<RayId> = self.rays.keys().copied().collect();
        if dom != ids {
            return Err(ConicalError::NotSlicing(
                "values must cover exactly the ray set".into(),
            ));
        }
        for (r, v) in &h.ray_values {
            if !v.is_positive() {
                return Err(ConicalError::NotSlicing(format!(
                    "nonpositive value on ray {r}"
                )));
            }
        }
        // Per-cone linearity: the values must extend linearly.
        for cone in self.maximal_cones() {
            if cone.verts().len() == cone.dim() {
                continue; // simplicial: any values extend linearly
            }
            let rows: Vec<Point> = cone
                .verts()
                .iter()
                .map(|r| self.rays[r].generator.clone())
                .collect();
            let rhs: Vec<Rat> = cone
                .verts()
                .iter()
                .map(|r| h.ray_values[r].clone())
                .collect();
            if Mat::from_rows(rows).solve(&rhs).is_none() {
                return Err(ConicalError::NotSlicing(format!(
                    "values are not linear on cone {cone:?}"
                )));
            }
        }
        Ok(())
    }

    /// Searches for a slicing function by LP (values at least one on rays,
    /// linear consistency on non-simplicial cones).
    pub fn find_slicing(&self) -> Option<SlicingFunction> {
        let ids = self.ray_ids();
        let var: BTreeMap<RayId, usize> =
            ids.iter().enumerate().map(|(i, r)| (*r, i)).collect();
        let mut cons: Vec<Constraint> = Vec::new();
        for r in &ids {
            let mut c = vec![Rat::zero(); ids.len()];
            c[var[r]] = Rat::one();
            cons.push(Constraint::ge(c, Rat::one()));
        }
        for cone in self.maximal_cones() {
            if cone.verts().len() == cone.dim() {
                continue;
            }
            // Linear dependencies among the generators force equalities on h.
            let gens: Vec<Point> = cone
                .verts()
                .iter()
                .map(|r| self.rays[r].generator.clone())
                .collect();
            for dep in Mat::from_cols(&gens).nullspace() {
                let mut c = vec![Rat::zero(); ids.len()];
                for (coef, r) in dep.iter().zip(cone.verts()) {
                    c[var[r]] = coef.clone();
                }
                cons.push(Constraint::eq(c, Rat::zero()));
            }
        }
        match lp::feasible_point(&cons) {
            Ok(x) => Some(SlicingFunction::new(
                var.iter().map(|(r, i)| (*r, x[*i].clone())).collect(),
            )),
            Err(_) => None,
        }
    }

    /// Extends `h` linearly to a point of some cone of the complex.
    pub fn slicing_value_at(&self, h: &SlicingFunction, p: &Point) -> Option<Rat> {
        for cone in self.maximal_cones() {
            let gens: Vec<Point> = cone
                .verts()
                .iter()
                .map(|r| self.rays[r].generator.clone())
                .collect();
            // p in cone iff p = sum of nonneg combos: solve by LP.
            let n = self.ambient_dim;
            let mut cons: Vec<Constraint> = Vec::new();
            for j in 0..n {
                let row: Vec<Rat> = gens.iter().map(|g| g[j].clone()).collect();
                cons.push(Constraint::eq(row, p[j].clone()));
            }
            for i in 0..gens.len() {
                let mut row = vec![Rat::zero(); gens.len()];
                row[i] = Rat::one();
                cons.push(Constraint::ge(row, Rat::zero()));
            }
            if let Ok(lambda) = lp::feasible_point(&cons) {
                let mut acc = Rat::zero();
                for (l, r) in lambda.iter().zip(cone.verts()) {
                    acc += l * &h.ray_values[r];
                }
                return Some(acc);
            }
        }
        None
    }
}

/// Geometry of one pointed cone: a positive functional, its slice polytope
/// hull, the face lattice (in local ray indices, by slice dimension), span
/// equations and facet inequalities in ambient coordinates.
pub(crate) struct ConeGeom {
    pub dim: usize,
    pub gens: Vec<Point>,
    pub extreme_locals: BTreeSet<usize>,
    /// Faces of the slice polytope: local ray indices + slice dimension.
    pub faces: Vec<(Vec<usize>, usize)>,
    pub span_normals: Vec<Point>,
    /// Facet halfspaces `m . x <= 0` of the cone within its span.
    pub ineqs: Vec<Point>,
}

impl ConeGeom {
    pub fn contains(&self, p: &Point) -> bool {
        self.span_normals.iter().all(|n| vec_dot(n, p).is_zero())
            && self.ineqs.iter().all(|m| !vec_dot(m, p).is_positive())
    }
}

/// Computes the geometry of the cone spanned by `gens`, or `None` when it is
/// not pointed. Zero generators are rejected by the caller.
pub(crate) fn cone_geometry(gens: &[Point]) -> Option<ConeGeom> {
    let n = gens[0].len();
    // Pointedness: a functional phi with phi . g >= 1 for all generators.
    let cons: Vec<Constraint> = gens
        .iter()
        .map(|g| Constraint::ge(g.clone(), Rat::one()))
        .collect();
    let phi = lp::feasible_point(&cons).ok()?;
    let slice_pts: Vec<Point> = gens
        .iter()
        .map(|g| {
            let t = vec_dot(&phi, g);
            g.iter().map(|x| x / &t).collect()
        })
        .collect();
    let hull = hull::convex_hull(&slice_pts).ok()?;
    let dim = hull.dim + 1;
    let extreme_locals: BTreeSet<usize> = hull.vertices.iter().copied().collect();
    let faces: Vec<(Vec<usize>, usize)> = hull::polytope_faces(&slice_pts).ok()?;
    // Span of the cone = affine hull of the slice + origin; its equations
    // are the vectors orthogonal to every generator.
    let span_normals = Mat::from_rows(gens.to_vec()).nullspace();
    // Facet inequalities: hyperplanes through the origin and slice facets.
    let mut ineqs: Vec<Point> = Vec::new();
    let interior: Point = {
        let k = Rat::from_integer(BigInt::from(gens.len() as i64));
        (0..n)
            .map(|j| gens.iter().fold(Rat::zero(), |a, g| a + &g[j]) / &k)
            .collect()
    };
    if hull.dim > 0 {
        for f in &hull.facets {
            let rows: Vec<Point> = f
                .vertices
                .iter()
                .map(|&v| slice_pts[v].clone())
                .chain(span_normals.iter().cloned())
                .collect();
            let ns = Mat::from_rows(rows).nullspace();
            debug_assert_eq!(ns.len(), 1);
            let mut m = ns.into_iter().next().unwrap();
            let side = vec_dot(&m, &interior);
            debug_assert!(!side.is_zero());
            if side.is_positive() {
                m = m.iter().map(|x| -x).collect();
            }
            ineqs.push(m);
        }
    }
    Some(ConeGeom {
        dim,
        gens: gens.to_vec(),
        extreme_locals,
        faces,
        span_normals,
        ineqs,
    })
}

/// Exact test that two pointed cones meet in a common face, via a relative
/// interior point of the (boxed) intersection.
pub(crate) fn cones_meet_in_common_face(
    a: &(Cell, ConeGeom),
    b: &(Cell, ConeGeom),
) -> bool {
    let n = a.1.gens[0].len();
    let mut cons: Vec<Constraint> = Vec::new();
    let mut ineq_idx: Vec<usize> = Vec::new();
    for geom in [&a.1, &b.1] {
        for sn in &geom.span_normals {
            cons.push(Constraint::eq(sn.clone(), Rat::zero()));
        }
        for m in &geom.ineqs {
            ineq_idx.push(cons.len());
            cons.push(Constraint::le(m.clone(), Rat::zero()));
        }
        if geom.dim == 1 {
            // A ray: x in span(g), g . x >= 0.
            let g = &geom.gens[0];
            ineq_idx.push(cons.len());
            cons.push(Constraint::le(g.iter().map(|x| -x).collect(), Rat::zero()));
        }
    }
    // Bounding box keeps the LPs bounded; never an implicit equality.
    for j in 0..n {
        let mut e = vec![Rat::zero(); n];
        e[j] = Rat::one();
        cons.push(Constraint::le(e.clone(), Rat::one()));
        cons.push(Constraint::ge(e, -Rat::one()));
    }
    // A relative interior point of the intersection (slack maximizers).
    let mut samples: Vec<Vec<Rat>> = Vec::new();
    for idx in &ineq_idx {
        let obj: Vec<Rat> = cons[*idx].coeffs.clone();
        match lp::minimize(&obj, &cons) {
            LpResult::Optimal { point, .. } => samples.push(point),
            LpResult::Unbounded => unreachable!("boxed LPs are bounded"),
            LpResult::Infeasible { .. } => return true, // should not happen: origin feasible
        }
    }
    let k = Rat::from_integer(BigInt::from(samples.len().max(1) as i64));
    let z: Point = (0..n)
        .map(|j| samples.iter().fold(Rat::zero(), |acc, p| acc + &p[j]) / &k)
        .collect();
    // Smallest face of each cone at z: generators on all tight facets.
    let face_gens = |geom: &ConeGeom| -> Vec<Point> {
        if z.iter().all(Rat::is_zero) {
            return Vec::new(); // the origin face
        }
        if geom.dim == 1 {
            return vec![geom.gens[0].clone()];
        }
        let tight: Vec<&Point> = geom
            .ineqs
            .iter()
            .filter(|m| vec_dot(m, &z).is_zero())
            .collect();
        geom.gens
            .iter()
            .filter(|g| tight.iter().all(|m| vec_dot(m, g).is_zero()))
            .cloned()
            .collect()
    };
    let fa = face_gens(&a.1);
    let fb = face_gens(&b.1);
    fa.iter().all(|g| b.1.contains(g)) && fb.iter().all(|g| a.1.contains(g))
}

/// A subdivision of a conical complex, with carrier map on cones.
#[derive(Clone, Debug)]
pub struct ConicalSubdivision {
    parent: ConicalComplex,
    refined: ConicalComplex,
    carrier: BTreeMap<Cell, Cell>,
}

impl ConicalSubdivision {
    pub fn trivial(complex: &ConicalComplex) -> Self {
        ConicalSubdivision {
            parent: complex.clone(),
            refined: complex.clone(),
            carrier: complex.cones().map(|c| (c.clone(), c.clone())).collect(),
        }
    }

    pub(crate) fn new_unchecked(
        parent: ConicalComplex,
        refined: ConicalComplex,
        carrier: BTreeMap<Cell, Cell>,
    ) -> Self {
        ConicalSubdivision { parent, refined, carrier }
    }

    pub fn parent(&self) -> &ConicalComplex {
        &self.parent
    }

    pub fn refined(&self) -> &ConicalComplex {
        &self.refined
    }

    pub fn carrier_of(&self, cone: &Cell) -> &Cell {
        &self.carrier[cone]
    }

    pub fn is_simplicial(&self) -> bool {
        self.refined.is_simplicial()
    }

    /// Cones of the refinement carried into the subcomplex.
    pub fn restrict_to(&self, sub: &ConicalComplex) -> Result<ConicalSubdivision, ConicalError> {
        if !sub.is_subcomplex_of(&self.parent) {
            return Err(ConicalError::Complex(ComplexError::NotSubcomplex));
        }
        let cones: BTreeSet<Cell> = self
            .refined
            .cones()
            .filter(|c| sub.has_cone(self.carrier_of(c)))
            .cloned()
            .collect();
        let refined = self.refined.subcomplex_with(cones);
        let carrier = refined
            .cones()
            .map(|c| (c.clone(), self.carrier_of(c).clone()))
            .collect();
        Ok(ConicalSubdivision {
            parent: sub.clone(),
            refined,
            carrier,
        })
    }
}

/// Decides whether `candidate` subdivides `parent` as conical complexes: each
/// candidate cone must lie in a parent cone (carrier), and per maximal parent
/// cone the slices of the carried full-dimensional cones must fill the slice
/// polytope exactly.
pub fn is_conical_subdivision(
    candidate: &ConicalComplex,
    parent: &ConicalComplex,
) -> Result<ConicalSubdivision, ConicalError> {
    if candidate.ambient_dim != parent.ambient_dim {
        return Err(ConicalError::DimensionMismatch(
            "candidate and parent ambient dimensions differ".into(),
        ));
    }
    let parent_cones: Vec<&Cell> = parent.cones().collect();
    let mut parent_geoms: Vec<Option<ConeGeom>> = Vec::new();
    for c in &parent_cones {
        if c.verts().is_empty() {
            parent_geoms.push(None);
        } else {
            let gens: Vec<Point> = c
                .verts()
                .iter()
                .map(|r| parent.generator(*r).clone())
                .collect();
            parent_geoms.push(Some(cone_geometry(&gens).ok_or_else(|| {
                ConicalError::NotPointed((*c).clone())
            })?));
        }
    }
    let mut carrier: BTreeMap<Cell, Cell> = BTreeMap::new();
    for c in candidate.cones() {
        if c.verts().is_empty() {
            carrier.insert(c.clone(), Cell::new(vec![], 0));
            continue;
        }
        let gens: Vec<Point> = c
            .verts()
            .iter()
            .map(|r| candidate.generator(*r).clone())
            .collect();
        let min = parent_cones
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                parent_geoms[*i]
                    .as_ref()
                    .map(|g| gens.iter().all(|x| g.contains(x)))
                    .unwrap_or(false)
            })
            .map(|(_, p)| *p)
            .min_by_key(|p| (p.dim(), p.verts().len(), p.verts().to_vec()));
        let Some(min) = min else {
            return Err(ConicalError::Complex(ComplexError::CellNotContained(
                c.clone(),
            )));
        };
        carrier.insert(c.clone(), min.clone());
    }
    // Completeness per maximal parent cone, on its slice.
    for (idx, sigma) in parent_cones.iter().enumerate() {
        if !parent.maximal_cones().contains(sigma) {
            continue;
        }
        let geom = parent_geoms[idx].as_ref().expect("maximal cones are nonzero");
        let phi = lp::feasible_point(
            &geom
                .gens
                .iter()
                .map(|g| Constraint::ge(g.clone(), Rat::one()))
                .collect::<Vec<_>>(),
        )
        .expect("pointed");
        let slice_of = |gens: &[Point]| -> Vec<Point> {
            gens.iter()
                .map(|g| {
                    let t = vec_dot(&phi, g);
                    g.iter().map(|x| x / &t).collect()
                })
                .collect()
        };
        let sigma_slice = slice_of(&geom.gens);
        let chart = hull::AffineChart::from_points(&sigma_slice);
        let target =
            hull::polytope_volume(&sigma_slice, &chart).map_err(ComplexError::from)?;
        let mut covered = Rat::zero();
        for c in candidate.cones() {
            if c.dim() == sigma.dim() && &carrier[c] == *sigma {
                let gens: Vec<Point> = c
                    .verts()
                    .iter()
                    .map(|r| candidate.generator(*r).clone())
                    .collect();
                covered += hull::polytope_volume(&slice_of(&gens), &chart)
                    .map_err(ComplexError::from)?;
            }
        }
        if covered != target {
            return Err(ConicalError::Complex(ComplexError::NotComplete {
                witness: geom.gens.iter().fold(
                    vec![Rat::zero(); parent.ambient_dim],
                    |acc, g| acc.iter().zip(g).map(|(a, x)| a + x).collect(),
                ),
            }));
        }
    }
    Ok(ConicalSubdivision {
        parent: parent.clone(),
        refined: candidate.clone(),
        carrier,
    })
}

/// The cone over a compact complex: each vertex becomes the ray through
/// (v, 1), each cell a cone, and the last coordinate is the canonical
/// slicing function.
pub fn cone_over(complex: &PolyComplex) -> (ConicalComplex, SlicingFunction) {
    let n = complex.ambient_dim();
    let rays: BTreeMap<RayId, Point> = complex
        .vertices()
        .iter()
        .map(|(v, p)| {
            let mut g = p.clone();
            g.push(Rat::one());
            (*v, g)
        })
        .collect();
    let maximal: Vec<Vec<RayId>> = complex
        .maximal_cells()
        .into_iter()
        .map(|c| c.verts().to_vec())
        .collect();
    // Lattice: the complex's lattice extended by the unit in the new
    // coordinate.
    let old = complex.integral().basis();
    let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(n + 1);
    for i in 0..n {
        let mut row: Vec<Rat> = old.row(i).to_vec();
        row.push(Rat::zero());
        rows.push(row);
    }
    let mut last = vec![Rat::zero(); n + 1];
    last[n] = Rat::one();
    rows.push(last);
    let integral = IntegralStructure::from_basis(Mat::from_rows(rows))
        .expect("extended lattice basis is nonsingular");
    let conical = ConicalComplex::build_inner(rays, &maximal, integral, false)
        .expect("the cone over a valid complex is a valid conical complex");
    let h = SlicingFunction::new(
        conical.ray_ids().into_iter().map(|r| (r, Rat::one())).collect(),
    );
    (conical, h)
}

/// The compact slice h^{-1}(1): vertices are the rescaled ray generators,
/// cells are the slices of the cones. The cone's lattice stays the
/// authoritative integral structure and is carried over unchanged.
pub fn slice(
    complex: &ConicalComplex,
    h: &SlicingFunction,
) -> Result<PolyComplex, ConicalError> {
    complex.validate_slicing(h)?;
    let vertices: BTreeMap<VertexId, Point> = complex
        .rays()
        .iter()
        .map(|(r, ray)| {
            let t = &h.ray_values[r];
            (*r, ray.generator.iter().map(|x| x / t).collect::<Point>())
        })
        .collect();
    let maximal: Vec<Vec<VertexId>> = complex
        .maximal_cones()
        .into_iter()
        .map(|c| c.verts().to_vec())
        .collect();
    Ok(PolyComplex::build(
        vertices,
        &maximal,
        complex.integral().clone(),
        false,
    )?)
}

/// True iff the ray values (on the complex's rays plus optionally extra rays
/// inside it) define a homogeneous lifting: the per-cone homogeneous upper
/// hull attains every given value.
pub fn is_homogeneous_lifting(
    complex: &ConicalComplex,
    values: &BTreeMap<RayId, Rat>,
    extra_rays: &[(Point, Rat)],
) -> bool {
    let ids: BTreeSet<RayId> = complex.rays().keys().copied().collect();
    let dom: BTreeSet<RayId> = values.keys().copied().collect();
    if dom != ids {
        return false;
    }
    for cone in complex.maximal_cones() {
        let gens: Vec<Point> = cone
            .verts()
            .iter()
            .map(|r| complex.generator(*r).clone())
            .collect();
        let Some(geom) = cone_geometry(&gens) else {
            return false;
        };
        // Scale everything onto an affine slice of the cone: pick phi from
        // the geometry via any positive functional on the generators.
        let cons: Vec<Constraint> = gens
            .iter()
            .map(|g| Constraint::ge(g.clone(), Rat::one()))
            .collect();
        let phi = lp::feasible_point(&cons).expect("cones are pointed");
        let mut pts: Vec<Point> = Vec::new();
        let mut heights: Vec<Rat> = Vec::new();
        for (r, g) in cone.verts().iter().zip(&gens) {
            let t = vec_dot(&phi, g);
            pts.push(g.iter().map(|x| x / &t).collect());
            heights.push(&values[r] / &t);
        }
        for (g, v) in extra_rays {
            if geom.contains(g) {
                let t = vec_dot(&phi, g);
                pts.push(g.iter().map(|x| x / &t).collect());
                heights.push(v / &t);
            }
        }
        let Ok(cells) = hull::upper_hull(&pts, &heights) else {
            return false;
        };
        for (p, want) in pts.iter().zip(&heights) {
            let got = cells
                .iter()
                .map(|c| c.affine.eval(p))
                .min()
                .expect("nonempty upper hull");
            if got != *want {
                return false;
            }
        }
    }
    true
}

/// Certificate data for a conical extension: the homogeneous ray values of
/// the single lifting inducing the output.
#[derive(Clone, Debug)]
pub struct ConicalCertificate {
    pub ray_values: BTreeMap<RayId, Rat>,
    pub compact: triangulation::CertificateChain,
}

/// Extends a regular simplicial subdivision of a subcomplex of `complex` to
/// a simplicial subdivision of the whole conical complex without new edges:
/// the rays of the result are exactly the complex's rays plus the boundary
/// subdivision's rays. Implemented by slicing, extending the compact
/// complex, and coning back.
pub fn extend_conical_triangulation(
    complex: &ConicalComplex,
    h: &SlicingFunction,
    subcomplex: &ConicalComplex,
    boundary: &ConicalSubdivision,
    boundary_values: &BTreeMap<RayId, Rat>,
) -> Result<(ConicalSubdivision, ConicalCertificate), ConicalError> {
    complex
        .validate_slicing(h)
        .map_err(|_| ConicalError::NoSlicingFunction)?;
    if !subcomplex.is_subcomplex_of(complex) {
        return Err(ConicalError::Complex(ComplexError::NotSubcomplex));
    }
    if boundary.parent() != subcomplex {
        return Err(ConicalError::Lifting(LiftingError::DomainMismatch(
            "boundary subdivision must be over the given subcomplex".into(),
        )));
    }
    if !boundary.is_simplicial() {
        return Err(ConicalError::Extension(TriangulationError::InputNotSimplicial));
    }
    // Slicing values on the boundary subdivision's rays: the parent values on
    // shared rays, the per-cone linear extension on new rays.
    let mut h_fine: BTreeMap<RayId, Rat> = BTreeMap::new();
    for (r, ray) in boundary.refined().rays() {
        if let Some(v) = h.value_on_ray(*r) {
            h_fine.insert(*r, v.clone());
        } else {
            let v = complex
                .slicing_value_at(h, &ray.generator)
                .ok_or_else(|| ConicalError::NotSlicing(format!("ray {r} outside the complex")))?;
            if !v.is_positive() {
                return Err(ConicalError::NotSlicing(format!(
                    "slicing vanishes on new ray {r}"
                )));
            }
            h_fine.insert(*r, v);
        }
    }
    // Compact shadows.
    let compact = slice(complex, h)?;
    let sub_h = SlicingFunction::new(
        subcomplex
            .ray_ids()
            .into_iter()
            .map(|r| (r, h.ray_values[&r].clone()))
            .collect(),
    );
    let compact_sub = slice(subcomplex, &sub_h)?;
    let fine_h = SlicingFunction::new(h_fine.clone());
    let compact_fine = slice(boundary.refined(), &fine_h)?;
    let compact_boundary = crate::complex::is_subdivision(&compact_fine, &compact_sub)?;
    // Sliced boundary lifting: value/h on each ray of the refinement.
    let sliced_values: BTreeMap<VertexId, Rat> = boundary
        .refined()
        .ray_ids()
        .into_iter()
        .map(|r| {
            let v = boundary_values.get(&r).ok_or_else(|| {
                ConicalError::Lifting(LiftingError::DomainMismatch(format!(
                    "missing boundary value on ray {r}"
                )))
            })?;
            Ok((r, v / &h_fine[&r]))
        })
        .collect::<Result<_, ConicalError>>()?;
    let boundary_lifting = if compact_boundary.refined().geom_eq(&compact_sub) {
        Lifting::verticial(sliced_values.clone())
    } else {
        // The verticial values live on the refined vertex set; wrap as a
        // piecewise lifting over the subcomplex slice.
        Lifting::Piecewise(Box::new(crate::lifting::PLLifting::new(
            compact_boundary.clone(),
            sliced_values.clone(),
        )?))
    };
    let out = triangulation::extend_triangulation(
        &compact,
        &compact_sub,
        &compact_boundary,
        &boundary_lifting,
    )?;
    // Transport the triangulation back to cones over its cells.
    let tri = out.triangulation.refined();
    let mut rays: BTreeMap<RayId, Point> = BTreeMap::new();
    for v in tri.vertex_ids() {
        if let Some(ray) = complex.rays().get(&v) {
            rays.insert(v, ray.generator.clone());
        } else {
            let ray = boundary
                .refined()
                .rays()
                .get(&v)
                .expect("extension introduces no vertices beyond the boundary's");
            rays.insert(v, ray.generator.clone());
        }
    }
    let maximal: Vec<Vec<RayId>> = tri
        .maximal_cells()
        .into_iter()
        .map(|c| c.verts().to_vec())
        .collect();
    let refined =
        ConicalComplex::build_inner(rays, &maximal, complex.integral().clone(), false)?;
    let carrier: BTreeMap<Cell, Cell> = refined
        .cones()
        .map(|c| {
            if c.verts().is_empty() {
                return (c.clone(), Cell::new(vec![], 0));
            }
            let compact_cell = Cell::new(c.verts().to_vec(), c.dim() - 1);
            let parent_compact = out.triangulation.carrier_of(&compact_cell);
            (
                c.clone(),
                Cell::new(parent_compact.verts().to_vec(), parent_compact.dim() + 1),
            )
        })
        .collect();
    let conical_sub = ConicalSubdivision::new_unchecked(complex.clone(), refined, carrier);
    // Homogeneous certificate values: combined value times the slicing value.
    let mut ray_values: BTreeMap<RayId, Rat> = BTreeMap::new();
    for r in conical_sub.refined().ray_ids() {
        let hv = h
            .value_on_ray(r)
            .cloned()
            .unwrap_or_else(|| h_fine[&r].clone());
        let z = out
            .chain
            .combined
            .values()
            .get(&r)
            .expect("combined lifting has a value at every vertex")
            .clone();
        ray_values.insert(r, z * hv);
    }
    Ok((
        conical_sub,
        ConicalCertificate { ray_values, compact: out.chain },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rat::{rat, ratio};

    fn orthant(n: usize) -> ConicalComplex {
        let rays: BTreeMap<RayId, Point> = (0..n)
            .map(|i| {
                let mut g = vec![Rat::zero(); n];
                g[i] = Rat::one();
                (i, g)
            })
            .collect();
        ConicalComplex::build(rays, &[(0..n).collect()], IntegralStructure::standard(n)).unwrap()
    }

    #[test]
    fn orthant_face_lattice() {
        let o = orthant(3);
        // Subsets of 3 rays: 8 cones including the origin.
        assert_eq!(o.cones().count(), 8);
        assert!(o.is_simplicial());
        assert_eq!(o.maximal_cones().len(), 1);
        assert_eq!(o.max_dim(), 3);
    }

    #[test]
    fn cone_over_a_segment() {
        let seg = fixtures::segment();
        let (sigma, h) = cone_over(&seg);
        assert_eq!(sigma.ambient_dim(), 2);
        assert_eq!(sigma.rays().len(), 2);
        assert_eq!(sigma.max_dim(), 2);
        let back = slice(&sigma, &h).unwrap();
        assert_eq!(back.cells_of_dim(1).len(), 1);
    }

    #[test]
    fn conical_extension_on_a_simplicial_complex_is_the_identity() {
        // The orthant is already simplicial: extending the trivial
        // subdivision of its boundary cones changes nothing.
        let o = orthant(3);
        let h = SlicingFunction::new((0..3).map(|r| (r, rat(1))).collect());
        let sub = o.skeleton(2);
        let trivial = ConicalSubdivision::trivial(&sub);
        let zero: BTreeMap<RayId, Rat> =
            sub.ray_ids().into_iter().map(|r| (r, rat(0))).collect();
        let (out, _) = extend_conical_triangulation(&o, &h, &sub, &trivial, &zero).unwrap();
        assert!(out.is_simplicial());
        assert_eq!(out.refined().cones().count(), o.cones().count());
        assert_eq!(out.refined().ray_direction_set(), o.ray_direction_set());
    }

    #[test]
    fn cone_over_square_and_round_trip() {
        let s = fixtures::unit_square();
        let (sigma, h) = cone_over(&s);
        assert_eq!(sigma.ambient_dim(), 3);
        assert_eq!(sigma.rays().len(), 4);
        // One maximal 3-cone over the square cell.
        assert_eq!(sigma.maximal_cones().len(), 1);
        assert_eq!(sigma.max_dim(), 3);
        let back = slice(&sigma, &h).unwrap();
        // The slice is the square embedded at height one.
        assert_eq!(back.cells_of_dim(2).len(), 1);
        assert_eq!(back.cells_of_dim(1).len(), 4);
        for v in back.vertex_ids() {
            let p = back.point(v);
            assert_eq!(p[2], rat(1));
            assert_eq!(&p[..2], &s.point(v)[..]);
        }
        // Cone over prism, sliced back: isomorphic to the prism.
        let prism = fixtures::prism();
        let (cp, hp) = cone_over(&prism);
        let back = slice(&cp, &hp).unwrap();
        assert_eq!(back.cells_of_dim(3).len(), 1);
        assert_eq!(back.cells_of_dim(2).len(), 5);
        assert_eq!(back.vertex_ids(), prism.vertex_ids());
    }

    #[test]
    fn orthant_slice_is_the_standard_simplex() {
        let o = orthant(3);
        let h = SlicingFunction::new((0..3).map(|r| (r, rat(1))).collect());
        let s = slice(&o, &h).unwrap();
        assert_eq!(s.max_dim(), 2);
        assert_eq!(s.cells_of_dim(0).len(), 3);
        assert!(s.cells_of_dim(2)[0].is_simplex());
        // Rescaled h halves the vertices.
        let h2 = SlicingFunction::new((0..3).map(|r| (r, rat(2))).collect());
        let s2 = slice(&o, &h2).unwrap();
        for v in s2.vertex_ids() {
            assert_eq!(
                s2.point(v),
                &s.point(v).iter().map(|x| x * ratio(1, 2)).collect::<Vec<_>>()
            );
        }
        // Nonpositive value on a ray is rejected.
        let bad = SlicingFunction::new([(0, rat(1)), (1, rat(0)), (2, rat(1))].into());
        assert!(matches!(slice(&o, &bad), Err(ConicalError::NotSlicing(_))));
    }

    #[test]
    fn homogeneous_lifting_checks() {
        let o = orthant(2);
        let values: BTreeMap<RayId, Rat> = [(0, rat(1)), (1, rat(1))].into();
        assert!(is_homogeneous_lifting(&o, &values, &[]));
        // Interior ray above the chord: fine (it folds the cone in two).
        let above = [(vec![rat(1), rat(1)], rat(3))];
        assert!(is_homogeneous_lifting(&o, &values, &above));
        // Interior ray below the chord: the value is unattainable.
        let below = [(vec![rat(1), rat(1)], rat(1))];
        assert!(!is_homogeneous_lifting(&o, &values, &below));
        // A single ray with value one.
        let rays: BTreeMap<RayId, Point> = [(0, vec![rat(1), rat(0)])].into();
        let r =
            ConicalComplex::build(rays, &[vec![0]], IntegralStructure::standard(2)).unwrap();
        assert!(is_homogeneous_lifting(&r, &[(0, rat(1))].into(), &[]));
    }

    #[test]
    fn homogeneous_values_scale_linearly() {
        // A slicing function evaluated at lambda * x scales by lambda.
        let o = orthant(3);
        let h = SlicingFunction::new((0..3).map(|r| (r, rat(r as i64 + 1))).collect());
        let x = vec![rat(2), rat(1), rat(5)];
        let hx = o.slicing_value_at(&h, &x).unwrap();
        for lambda in [rat(0), rat(3), ratio(1, 2)] {
            let lx: Vec<Rat> = x.iter().map(|c| c * &lambda).collect();
            assert_eq!(o.slicing_value_at(&h, &lx).unwrap(), &lambda * &hx);
        }
    }

    #[test]
    fn find_slicing_on_cones_and_fans() {
        let o = orthant(3);
        let h = o.find_slicing().unwrap();
        o.validate_slicing(&h).unwrap();
        // A complete fan in the plane: the quadrants meet along the axes and
        // at the origin, and |x| + |y| style functions slice it.
        let rays: BTreeMap<RayId, Point> = [
            (0, vec![rat(1), rat(0)]),
            (1, vec![rat(0), rat(1)]),
            (2, vec![rat(-1), rat(0)]),
            (3, vec![rat(0), rat(-1)]),
        ]
        .into();
        let fan = ConicalComplex::build(
            rays,
            &[vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0]],
            IntegralStructure::standard(2),
        )
        .unwrap();
        let hf = fan.find_slicing().unwrap();
        fan.validate_slicing(&hf).unwrap();
        // Overlapping cones are rejected: two quadrants sharing a halfplane.
        let rays: BTreeMap<RayId, Point> = [
            (0, vec![rat(1), rat(0)]),
            (1, vec![rat(0), rat(1)]),
            (2, vec![rat(-1), rat(1)]),
        ]
        .into();
        let bad = ConicalComplex::build(
            rays,
            &[vec![0, 1], vec![0, 2]],
            IntegralStructure::standard(2),
        );
        assert!(matches!(bad, Err(ConicalError::NotIntersectionClosed(_, _))));
    }

    #[test]
    fn conical_extension_over_the_square_cone() {
        let s = fixtures::unit_square();
        let (sigma, h) = cone_over(&s);
        // Subcomplex: one 2-dimensional face of the cone (over edge {0,1}).
        let face = Cell::new(vec![0, 1], 2);
        let sub = sigma.subcomplex_with([face.clone()].into());
        let trivial = ConicalSubdivision::trivial(&sub);
        let zero: BTreeMap<RayId, Rat> = sub.ray_ids().into_iter().map(|r| (r, rat(0))).collect();
        let (out, cert) = extend_conical_triangulation(&sigma, &h, &sub, &trivial, &zero).unwrap();
        assert!(out.is_simplicial());
        // No new edges: the rays are exactly the four original ones.
        assert_eq!(out.refined().ray_direction_set(), sigma.ray_direction_set());
        // The certificate values define a homogeneous lifting inducing it.
        assert!(is_homogeneous_lifting(&sigma, &cert.ray_values, &[]));
        // Restriction to the subcomplex is untouched.
        let restricted = out.restrict_to(&sub).unwrap();
        assert_eq!(restricted.refined().cones().count(), sub.cones().count());
    }

    #[test]
    fn conical_extension_of_the_prism_staircase() {
        let prism = fixtures::prism();
        let (sigma, h) = cone_over(&prism);
        let boundary_compact = prism.boundary().unwrap();
        let (sigma0, _) = cone_over(&boundary_compact);
        // sigma0 is a subcomplex of sigma (same rays, cone cells subset).
        assert!(sigma0.is_subcomplex_of(&sigma));
        let stairs = fixtures::staircase_prism_boundary();
        let (stairs_cone, _) = cone_over(&stairs);
        let carrier: BTreeMap<Cell, Cell> = stairs_cone
            .cones()
            .map(|c| {
                let hm: Vec<RayId> = c.verts().to_vec();
                // Carrier: smallest cone of sigma0 containing it; the vertex
                // sets decide since there are no new rays here.
                let target = sigma0
                    .cones()
                    .filter(|p| {
                        let compact_p = Cell::new(p.verts().to_vec(), p.dim().saturating_sub(1));
                        let compact_c = Cell::new(hm.clone(), c.dim().saturating_sub(1));
                        let _ = (&compact_p, &compact_c);
                        hm.iter().all(|v| p.has_vertex(*v)) || (hm.is_empty() && p.verts().is_empty())
                    })
                    .min_by_key(|p| (p.dim(), p.verts().len(), p.verts().to_vec()))
                    .unwrap()
                    .clone();
                (c.clone(), target)
            })
            .collect();
        let boundary = ConicalSubdivision::new_unchecked(sigma0.clone(), stairs_cone, carrier);
        let f0: BTreeMap<RayId, Rat> = fixtures::staircase_heights();
        let (out, _) = extend_conical_triangulation(&sigma, &h, &sigma0, &boundary, &f0).unwrap();
        assert!(out.is_simplicial());
        // No new edges.
        assert_eq!(out.refined().ray_direction_set(), sigma.ray_direction_set());
        // Three 4-dimensional cones (over the three tetrahedra).
        assert_eq!(out.refined().cones_of_dim(4).len(), 3);
    }
}
