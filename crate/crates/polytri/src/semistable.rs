//! The combinatorial layer of nearly-semistable reduction over an orthant
//! base: lattice-respecting conical morphisms, base change by root
//! substitutions as lattice refinement, cone indices, preimages of the base
//! 1-skeleton, and verification of the nearly-semistable conditions with
//! externally supplied index-1 boundary triangulations.

use crate::complex::{Cell, ComplexError, IntegralStructure};
use crate::conical::{
    self, cone_geometry, ConicalCertificate, ConicalComplex, ConicalError, ConicalSubdivision,
    RayId, SlicingFunction,
};
use crate::hull::{self, AffineChart};
use crate::lifting::LiftingError;
use crate::linalg::{self, Mat, Point};
use crate::rat::Rat;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};

#[derive(thiserror::Error, Debug, Clone)]
pub enum SemistableError {
    #[error("base-change multipliers must be positive integers")]
    NonPositiveMultiplier,
    #[error("cone {0:?} is not simplicial")]
    NotSimplicial(Cell),
    #[error("the subdivision is not compatible with the morphism: {0}")]
    IncompatibleSubdivision(String),
    #[error("boundary triangulation cone {cone:?} has index {index}, not 1")]
    BoundaryNotIndexOne { cone: Cell, index: BigInt },
    #[error("a supplied boundary subdivision is not induced by its lifting")]
    BoundaryNotInduced,
    #[error("a positive-dimensional cone maps to the origin (ray {0})")]
    OriginFiber(RayId),
    #[error("morphism is not linear on shared faces")]
    FacesDisagree,
    #[error("morphism does not map into the orthant")]
    NotIntoOrthant,
    #[error("morphism does not respect the integral structures")]
    NotLatticeRespecting,
    #[error("morphism is not surjective onto the base")]
    NotSurjective,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Conical(#[from] ConicalError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Lifting(#[from] LiftingError),
}

/// The base of the pipeline: the nonnegative orthant with edges along the
/// standard basis vectors and the lattice generated by k_i * e_i. Always a
/// nonsingular (index one) cone with respect to its own lattice.
#[derive(Clone, Debug)]
pub struct OrthantBase {
    n: usize,
    multipliers: Vec<BigInt>,
    complex: ConicalComplex,
    lattice: IntegralStructure,
}

impl OrthantBase {
    pub fn new(n: usize, multipliers: Vec<BigInt>) -> Result<Self, SemistableError> {
        if multipliers.len() != n {
            return Err(SemistableError::DimensionMismatch(
                "one multiplier per coordinate".into(),
            ));
        }
        if multipliers.iter().any(|k| !k.is_positive()) {
            return Err(SemistableError::NonPositiveMultiplier);
        }
        let rays: BTreeMap<RayId, Point> = (0..n)
            .map(|i| {
                let mut g = vec![Rat::zero(); n];
                g[i] = Rat::one();
                (i, g)
            })
            .collect();
        let rows: Vec<Vec<Rat>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            Rat::from_integer(multipliers[i].clone())
                        } else {
                            Rat::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        let lattice = IntegralStructure::from_basis(Mat::from_rows(rows))?;
        let complex = ConicalComplex::build_inner(
            rays,
            &[(0..n).collect()],
            lattice.clone(),
            false,
        )?;
        Ok(OrthantBase { n, multipliers, complex, lattice })
    }

    pub fn standard(n: usize) -> Self {
        Self::new(n, vec![BigInt::one(); n]).expect("unit multipliers")
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn multipliers(&self) -> &[BigInt] {
        &self.multipliers
    }

    pub fn complex(&self) -> &ConicalComplex {
        &self.complex
    }

    pub fn lattice(&self) -> &IntegralStructure {
        &self.lattice
    }

    /// Primitive generator of the i-th edge in the base lattice: k_i * e_i.
    pub fn edge_primitive(&self, i: usize) -> Point {
        let mut g = vec![Rat::zero(); self.n];
        g[i] = Rat::from_integer(self.multipliers[i].clone());
        g
    }

    /// The canonical slicing function a_1 + ... + a_n restricted to rays.
    pub fn coordinate_sum_slicing(&self) -> SlicingFunction {
        SlicingFunction::new((0..self.n).map(|r| (r, Rat::one())).collect())
    }
}

/// The index of a simplicial cone with respect to a lattice: the absolute
/// determinant of its primitive generators in a basis of the lattice's
/// intersection with the cone's span.
pub fn cone_index(
    gens: &[Point],
    lattice: &IntegralStructure,
) -> Result<BigInt, SemistableError> {
    let span: Vec<Point> = gens.to_vec();
    let rank = Mat::from_cols(&span).rank();
    if rank != gens.len() {
        return Err(SemistableError::NotSimplicial(Cell::new(
            (0..gens.len()).collect(),
            rank,
        )));
    }
    let sub_basis = linalg::lattice_intersect_subspace(lattice.basis(), &span);
    debug_assert_eq!(sub_basis.len(), gens.len());
    let basis_mat = Mat::from_cols(&sub_basis);
    // Coordinates of each primitive generator in the sublattice basis.
    let mut cols: Vec<Vec<Rat>> = Vec::new();
    for g in gens {
        let prim = lattice.primitive_on_ray(g);
        let x = solve_in_span(&basis_mat, &prim);
        debug_assert!(
            x.iter().all(|c| c.denom().is_one()),
            "primitive generators lie in the sublattice"
        );
        cols.push(x);
    }
    let det = Mat::from_cols(&cols).det();
    debug_assert!(det.denom().is_one());
    Ok(det.numer().abs())
}

/// Solves `basis * x = p` where the columns of `basis` span the space
/// containing `p` (possibly fewer columns than ambient rows).
fn solve_in_span(basis: &Mat, p: &Point) -> Vec<Rat> {
    basis.solve(p).expect("point lies in the span of the basis")
}

/// A lattice-respecting piecewise-linear map from a conical complex onto the
/// orthant base: one rational matrix per maximal cone, agreeing on shared
/// faces. Carries the per-cone refined source lattices after base change.
#[derive(Clone, Debug)]
pub struct ConicalMorphism {
    source: ConicalComplex,
    target: OrthantBase,
    cone_maps: BTreeMap<Cell, Mat>,
    refined_lattices: BTreeMap<Cell, IntegralStructure>,
}

/// How to specify the matrices of a morphism.
pub enum MorphismMap {
    Global(Mat),
    PerCone(BTreeMap<Cell, Mat>),
}

impl ConicalMorphism {
    pub fn new(
        source: ConicalComplex,
        target: OrthantBase,
        map: MorphismMap,
    ) -> Result<Self, SemistableError> {
        let maximal: Vec<Cell> = source.maximal_cones().into_iter().cloned().collect();
        let cone_maps: BTreeMap<Cell, Mat> = match map {
            MorphismMap::Global(m) => maximal.iter().map(|c| (c.clone(), m.clone())).collect(),
            MorphismMap::PerCone(m) => {
                for c in &maximal {
                    if !m.contains_key(c) {
                        return Err(SemistableError::DimensionMismatch(format!(
                            "missing matrix for maximal cone {c:?}"
                        )));
                    }
                }
                m
            }
        };
        for m in cone_maps.values() {
            if m.nrows() != target.dim() || m.ncols() != source.ambient_dim() {
                return Err(SemistableError::DimensionMismatch(
                    "matrix shape must be target x source".into(),
                ));
            }
        }
        let refined_lattices = maximal
            .iter()
            .map(|c| (c.clone(), source.integral().clone()))
            .collect();
        let morphism = ConicalMorphism { source, target, cone_maps, refined_lattices };
        morphism.validate()?;
        Ok(morphism)
    }

    fn validate(&self) -> Result<(), SemistableError> {
        // Agreement on shared faces: matrices agree on shared generators.
        let maximal: Vec<&Cell> = self.source.maximal_cones();
        for i in 0..maximal.len() {
            for j in i + 1..maximal.len() {
                let shared: Vec<RayId> = maximal[i]
                    .verts()
                    .iter()
                    .copied()
                    .filter(|r| maximal[j].has_vertex(*r))
                    .collect();
                for r in shared {
                    let g = self.source.generator(r);
                    if self.cone_maps[maximal[i]].mul_vec(g)
                        != self.cone_maps[maximal[j]].mul_vec(g)
                    {
                        return Err(SemistableError::FacesDisagree);
                    }
                }
            }
        }
        // Every generator maps into the orthant.
        for cone in &maximal {
            for r in cone.verts() {
                let img = self.cone_maps[*cone].mul_vec(self.source.generator(*r));
                if img.iter().any(Rat::is_negative) {
                    return Err(SemistableError::NotIntoOrthant);
                }
            }
        }
        // Lattice-respecting: a basis of (source lattice cap span of cone)
        // maps into the target lattice, per maximal cone.
        for cone in &maximal {
            let span: Vec<Point> = cone
                .verts()
                .iter()
                .map(|r| self.source.generator(*r).clone())
                .collect();
            let basis =
                linalg::lattice_intersect_subspace(self.source.integral().basis(), &span);
            for b in basis {
                let img = self.cone_maps[*cone].mul_vec(&b);
                if !self.target.lattice().contains(&img) {
                    return Err(SemistableError::NotLatticeRespecting);
                }
            }
        }
        // Surjectivity: the images of the maximal cones cover the orthant.
        if !self.covers_orthant()? {
            return Err(SemistableError::NotSurjective);
        }
        Ok(())
    }

    /// Exact cover test on the slice by the coordinate-sum function: the
    /// images of the maximal cones slice to polytopes inside the standard
    /// simplex; split the simplex along all their facet hyperplanes and
    /// check every atom is inside some image.
    fn covers_orthant(&self) -> Result<bool, SemistableError> {
        let n = self.target.dim();
        // Standard simplex vertices.
        let simplex: Vec<Point> = (0..n)
            .map(|i| {
                let mut p = vec![Rat::zero(); n];
                p[i] = Rat::one();
                p
            })
            .collect();
        if n == 1 {
            // The only cone is covered iff some generator maps to a positive
            // point.
            let covered = self.cone_maps.iter().any(|(cone, m)| {
                cone.verts()
                    .iter()
                    .any(|r| m.mul_vec(self.source.generator(*r))[0].is_positive())
            });
            return Ok(covered);
        }
        // Image polytopes on the simplex.
        let mut images: Vec<Vec<Point>> = Vec::new();
        for (cone, m) in &self.cone_maps {
            let mut pts: Vec<Point> = Vec::new();
            for r in cone.verts() {
                let img = m.mul_vec(self.source.generator(*r));
                let s: Rat = img.iter().fold(Rat::zero(), |a, x| a + x);
                if s.is_positive() {
                    pts.push(img.iter().map(|x| x / &s).collect());
                }
            }
            pts.sort();
            pts.dedup();
            if !pts.is_empty() {
                images.push(pts);
            }
        }
        if images.is_empty() {
            return Ok(false);
        }
        // Collect all facet hyperplanes of the image polytopes and split.
        let mut hyperplanes: Vec<(Point, Rat)> = Vec::new();
        for pts in &images {
            let h = hull::convex_hull(pts).map_err(ComplexError::from)?;
            for (coeffs, rhs) in h.ambient_facet_halfspaces() {
                hyperplanes.push((coeffs, rhs));
            }
        }
        let mut atoms: Vec<Vec<Point>> = vec![simplex.clone()];
        for (normal, offset) in &hyperplanes {
            let mut next: Vec<Vec<Point>> = Vec::new();
            for atom in &atoms {
                let (lo, hi) =
                    hull::split_polytope(atom, normal, offset).map_err(ComplexError::from)?;
                for part in [lo, hi] {
                    if part.len() >= n {
                        let chart = AffineChart::from_points(&part);
                        if chart.dim() == n - 1 {
                            next.push(part);
                        }
                    }
                }
            }
            atoms = next;
        }
        let image_hulls: Vec<hull::Hull> = images
            .iter()
            .map(|pts| hull::convex_hull(pts))
            .collect::<Result<_, _>>()
            .map_err(ComplexError::from)?;
        for atom in &atoms {
            let k = Rat::from_integer(BigInt::from(atom.len() as i64));
            let centroid: Point = (0..n)
                .map(|j| atom.iter().fold(Rat::zero(), |a, p| a + &p[j]) / &k)
                .collect();
            if !image_hulls.iter().any(|h| h.contains(&centroid)) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn source(&self) -> &ConicalComplex {
        &self.source
    }

    pub fn target(&self) -> &OrthantBase {
        &self.target
    }

    /// The matrix of some maximal cone containing the given point (the maps
    /// agree on overlaps).
    pub fn map_at(&self, p: &Point) -> Option<&Mat> {
        for (cone, m) in &self.cone_maps {
            let gens: Vec<Point> = cone
                .verts()
                .iter()
                .map(|r| self.source.generator(*r).clone())
                .collect();
            if let Some(geom) = cone_geometry(&gens) {
                if geom.contains(p) {
                    return Some(m);
                }
            }
        }
        None
    }

    /// The maximal cone of the source containing a given cone of a
    /// subdivision, with its matrix and refined lattice.
    fn covering_data(&self, gens: &[Point]) -> Option<(&Cell, &Mat, &IntegralStructure)> {
        for (cone, m) in &self.cone_maps {
            let cgens: Vec<Point> = cone
                .verts()
                .iter()
                .map(|r| self.source.generator(*r).clone())
                .collect();
            if let Some(geom) = cone_geometry(&cgens) {
                if gens.iter().all(|g| geom.contains(g)) {
                    return Some((cone, m, &self.refined_lattices[cone]));
                }
            }
        }
        None
    }

    /// Image of a ray generator under the morphism.
    pub fn image_of(&self, r: RayId) -> Point {
        let g = self.source.generator(r);
        for (cone, m) in &self.cone_maps {
            if cone.has_vertex(r) {
                return m.mul_vec(g);
            }
        }
        panic!("ray {r} belongs to no maximal cone");
    }

    /// The pullback of the base coordinate-sum slicing function; errors when
    /// a ray maps to the origin (a positive-dimensional origin fiber).
    pub fn pullback_slicing(&self) -> Result<SlicingFunction, SemistableError> {
        let mut values: BTreeMap<RayId, Rat> = BTreeMap::new();
        for r in self.source.ray_ids() {
            let img = self.image_of(r);
            let s: Rat = img.iter().fold(Rat::zero(), |a, x| a + x);
            if !s.is_positive() {
                return Err(SemistableError::OriginFiber(r));
            }
            values.insert(r, s);
        }
        Ok(SlicingFunction::new(values))
    }
}

/// Base change by the substitution s_i^{k_i} = t_i: the same cones, the base
/// lattice replaced by prod Z k_i e_i, and the source lattices refined to
/// the preimages, one per maximal cone.
pub fn base_change(
    f: &ConicalMorphism,
    multipliers: Vec<BigInt>,
) -> Result<ConicalMorphism, SemistableError> {
    let target = OrthantBase::new(f.target.dim(), multipliers)?;
    let mut refined_lattices: BTreeMap<Cell, IntegralStructure> = BTreeMap::new();
    for (cone, m) in &f.cone_maps {
        let b_src = f.source.integral().basis();
        let b_tgt_inv = target
            .lattice()
            .basis()
            .inverse()
            .expect("lattice bases are nonsingular");
        // Condition on lattice coordinates u: (B_t^-1 M B_s) u integral.
        let a = b_tgt_inv.mul_mat(m).mul_mat(b_src);
        let u_basis = linalg::integer_preimage_basis(&a);
        let refined = b_src.mul_mat(&u_basis);
        refined_lattices.insert(cone.clone(), IntegralStructure::from_basis(refined)?);
    }
    Ok(ConicalMorphism {
        source: f.source.clone(),
        target,
        cone_maps: f.cone_maps.clone(),
        refined_lattices,
    })
}

/// The subcomplex of the source mapping into the 1-skeleton of the base,
/// together with the per-edge pieces f^{-1}(tau_i).
pub fn preimage_skeleton(
    f: &ConicalMorphism,
) -> (ConicalComplex, Vec<ConicalComplex>) {
    let n = f.target.dim();
    let support_of = |cone: &Cell| -> BTreeSet<usize> {
        let mut s = BTreeSet::new();
        for r in cone.verts() {
            let img = f.image_of(*r);
            for (i, x) in img.iter().enumerate() {
                if !x.is_zero() {
                    s.insert(i);
                }
            }
        }
        s
    };
    let skeleton_cones: BTreeSet<Cell> = f
        .source
        .cones()
        .filter(|c| support_of(c).len() <= 1)
        .cloned()
        .collect();
    let skeleton = f.source.subcomplex_with(skeleton_cones);
    let pieces: Vec<ConicalComplex> = (0..n)
        .map(|i| {
            let cones: BTreeSet<Cell> = f
                .source
                .cones()
                .filter(|c| {
                    let s = support_of(c);
                    s.is_empty() || s == BTreeSet::from([i])
                })
                .cloned()
                .collect();
            f.source.subcomplex_with(cones)
        })
        .collect();
    (skeleton, pieces)
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Verdict {
    Semistable,
    NearlySemistable,
    Neither,
}

#[derive(Clone, Debug)]
pub struct ConditionReport {
    pub ok: bool,
    pub witnesses: Vec<String>,
}

impl ConditionReport {
    fn new() -> Self {
        ConditionReport { ok: true, witnesses: Vec::new() }
    }

    fn fail(&mut self, witness: String) {
        self.ok = false;
        self.witnesses.push(witness);
    }
}

/// The verdict of the nearly-semistable check: the combinatorial analogs of
/// equidimensionality, reduced fibers, semistability in codimension one,
/// finite quotient singularities (simpliciality), and base nonsingularity.
#[derive(Clone, Debug)]
pub struct SemistabilityReport {
    pub equidimensional: ConditionReport,
    pub reduced: ConditionReport,
    pub codim1_semistable: ConditionReport,
    pub simplicial: bool,
    pub base_nonsingular: bool,
    pub verdict: Verdict,
}

/// Checks the nearly-semistable conditions for a simplicial subdivision of
/// the morphism's source, using the per-cone refined lattices.
pub fn check_nearly_semistable(
    f: &ConicalMorphism,
    subdivision: &ConicalSubdivision,
) -> Result<SemistabilityReport, SemistableError> {
    if subdivision.parent() != f.source() {
        return Err(SemistableError::IncompatibleSubdivision(
            "subdivision is not over the morphism's source".into(),
        ));
    }
    let refined = subdivision.refined();
    // Compatibility: every refined cone lies in some source maximal cone.
    for cone in refined.maximal_cones() {
        let gens: Vec<Point> = cone
            .verts()
            .iter()
            .map(|r| refined.generator(*r).clone())
            .collect();
        if f.covering_data(&gens).is_none() {
            return Err(SemistableError::IncompatibleSubdivision(format!(
                "cone {cone:?} is not contained in a source cone"
            )));
        }
    }
    let simplicial = refined.is_simplicial();
    let mut equidimensional = ConditionReport::new();
    let mut reduced = ConditionReport::new();
    let mut codim1 = ConditionReport::new();

    // Per edge of the refinement: image must be an edge of the base (or the
    // origin), and primitive generators must map to primitive generators.
    for ray_cell in refined.cones_of_dim(1) {
        let r = ray_cell.verts()[0];
        let g = refined.generator(r);
        let (_, m, lattice) = f
            .covering_data(std::slice::from_ref(g))
            .expect("compatibility already checked");
        let img = m.mul_vec(g);
        let support: Vec<usize> = img
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(i, _)| i)
            .collect();
        if support.len() > 1 {
            equidimensional.fail(format!(
                "edge through {g:?} maps onto no base edge (support {support:?})"
            ));
            continue;
        }
        if let [i] = support[..] {
            let prim = lattice.primitive_on_ray(g);
            let prim_img = m.mul_vec(&prim);
            if prim_img != f.target.edge_primitive(i) {
                reduced.fail(format!(
                    "primitive generator {prim:?} maps to {prim_img:?}, not to the primitive generator of edge {i}"
                ));
            }
        }
    }
    // Codimension one: every refined cone over the base 1-skeleton has
    // index one in the refined lattice.
    for cone in refined.cones() {
        if cone.verts().is_empty() {
            continue;
        }
        let gens: Vec<Point> = cone
            .verts()
            .iter()
            .map(|r| refined.generator(*r).clone())
            .collect();
        let (_, m, lattice) = f.covering_data(&gens).expect("compatible");
        let mut support: BTreeSet<usize> = BTreeSet::new();
        for g in &gens {
            for (i, x) in m.mul_vec(g).iter().enumerate() {
                if !x.is_zero() {
                    support.insert(i);
                }
            }
        }
        if support.len() <= 1 {
            match cone_index(&gens, lattice) {
                Ok(ix) => {
                    if !ix.is_one() {
                        codim1.fail(format!("cone {cone:?} over the 1-skeleton has index {ix}"));
                    }
                }
                Err(_) => codim1.fail(format!("cone {cone:?} over the 1-skeleton is not simplicial")),
            }
        }
    }
    // Base nonsingularity: the orthant has index one in its own lattice.
    let base_gens: Vec<Point> = (0..f.target.dim()).map(|i| f.target.edge_primitive(i)).collect();
    let base_nonsingular = cone_index(&base_gens, f.target.lattice())
        .map(|ix| ix.is_one())
        .unwrap_or(false);

    let nearly = equidimensional.ok && reduced.ok && codim1.ok && simplicial && base_nonsingular;
    let mut semistable = nearly;
    if nearly {
        for cone in refined.maximal_cones() {
            let gens: Vec<Point> = cone
                .verts()
                .iter()
                .map(|r| refined.generator(*r).clone())
                .collect();
            let (_, _, lattice) = f.covering_data(&gens).expect("compatible");
            match cone_index(&gens, lattice) {
                Ok(ix) if ix.is_one() => {}
                _ => {
                    semistable = false;
                    break;
                }
            }
        }
    }
    let verdict = if semistable {
        Verdict::Semistable
    } else if nearly {
        Verdict::NearlySemistable
    } else {
        Verdict::Neither
    };
    Ok(SemistabilityReport {
        equidimensional,
        reduced,
        codim1_semistable: codim1,
        simplicial,
        base_nonsingular,
        verdict,
    })
}

/// One boundary datum per base edge: the multiplier k_i and an index-one
/// simplicial triangulation of the edge preimage together with the ray
/// values of a lifting inducing it.
#[derive(Clone, Debug)]
pub struct BoundaryDatum {
    pub multiplier: BigInt,
    pub subdivision: ConicalSubdivision,
    pub lifting: BTreeMap<RayId, Rat>,
}

/// The pipeline from a weakly-semistable shadow to a nearly semistable one:
/// base change by the supplied multipliers, verification of the per-edge
/// index-one boundary triangulations, assembly over the base 1-skeleton,
/// extension to the whole source by the conical extension theorem, and the
/// final verification report.
pub fn weak_to_nearly_semistable(
    f: &ConicalMorphism,
    boundary: &[BoundaryDatum],
) -> Result<(ConicalMorphism, ConicalSubdivision, SemistabilityReport), SemistableError> {
    let n = f.target.dim();
    if boundary.len() != n {
        return Err(SemistableError::DimensionMismatch(
            "one boundary datum per base edge".into(),
        ));
    }
    let f1 = base_change(f, boundary.iter().map(|b| b.multiplier.clone()).collect())?;
    let (skeleton, pieces) = preimage_skeleton(&f1);
    let h = f1.pullback_slicing()?;

    // Verify each supplied boundary triangulation.
    let mut glued_cones: BTreeSet<Cell> = BTreeSet::new();
    let mut glued_rays: BTreeMap<RayId, Point> = BTreeMap::new();
    let mut glued_values: BTreeMap<RayId, Rat> = BTreeMap::new();
    let mut glued_carrier: BTreeMap<Cell, Cell> = BTreeMap::new();
    for (i, datum) in boundary.iter().enumerate() {
        let piece = &pieces[i];
        if datum.subdivision.parent() != piece {
            return Err(SemistableError::IncompatibleSubdivision(format!(
                "boundary datum {i} is not over the edge-{i} preimage"
            )));
        }
        if !datum.subdivision.is_simplicial() {
            return Err(SemistableError::NotSimplicial(
                datum
                    .subdivision
                    .refined()
                    .cones()
                    .find(|c| !c.verts().is_empty() && c.verts().len() != c.dim())
                    .cloned()
                    .unwrap_or_else(|| Cell::new(vec![], 0)),
            ));
        }
        // Index one with respect to the refined lattice of the covering cone.
        for cone in datum.subdivision.refined().maximal_cones() {
            let gens: Vec<Point> = cone
                .verts()
                .iter()
                .map(|r| datum.subdivision.refined().generator(*r).clone())
                .collect();
            let (_, _, lattice) = f1
                .covering_data(&gens)
                .ok_or_else(|| SemistableError::IncompatibleSubdivision(format!(
                    "boundary cone {cone:?} leaves the source"
                )))?;
            let ix = cone_index(&gens, lattice)?;
            if !ix.is_one() {
                return Err(SemistableError::BoundaryNotIndexOne {
                    cone: cone.clone(),
                    index: ix,
                });
            }
        }
        // Induced by the supplied lifting: check on the slice of the piece.
        if piece.maximal_cones().iter().any(|c| !c.verts().is_empty()) {
            let piece_h = SlicingFunction::new(
                piece
                    .ray_ids()
                    .into_iter()
                    .map(|r| (r, h.ray_values()[&r].clone()))
                    .collect(),
            );
            let compact_piece = conical::slice(piece, &piece_h)?;
            let mut fine_h: BTreeMap<RayId, Rat> = BTreeMap::new();
            for (r, ray) in datum.subdivision.refined().rays() {
                let v = match h.value_on_ray(*r) {
                    Some(v) => v.clone(),
                    None => piece
                        .slicing_value_at(&piece_h, &ray.generator)
                        .ok_or(SemistableError::OriginFiber(*r))?,
                };
                fine_h.insert(*r, v);
            }
            let compact_fine = conical::slice(
                datum.subdivision.refined(),
                &SlicingFunction::new(fine_h.clone()),
            )?;
            let compact_sub = crate::complex::is_subdivision(&compact_fine, &compact_piece)?;
            let sliced_values: BTreeMap<RayId, Rat> = datum
                .subdivision
                .refined()
                .ray_ids()
                .into_iter()
                .map(|r| {
                    let v = datum.lifting.get(&r).cloned().unwrap_or_else(Rat::zero);
                    (r, v / &fine_h[&r])
                })
                .collect();
            let lifting = if compact_fine.geom_eq(&compact_piece) {
                crate::lifting::Lifting::verticial(sliced_values)
            } else {
                crate::lifting::Lifting::Piecewise(Box::new(crate::lifting::PLLifting::new(
                    compact_sub.clone(),
                    sliced_values,
                )?))
            };
            let induced = crate::lifting::induced_subdivision(&compact_piece, &lifting)
                .map_err(|_| SemistableError::BoundaryNotInduced)?;
            if !induced.geom_eq(&compact_sub) {
                return Err(SemistableError::BoundaryNotInduced);
            }
        }
        // Glue.
        for (r, ray) in datum.subdivision.refined().rays() {
            glued_rays.insert(*r, ray.generator.clone());
            glued_values.insert(
                *r,
                datum.lifting.get(r).cloned().unwrap_or_else(Rat::zero),
            );
        }
        for c in datum.subdivision.refined().cones() {
            glued_cones.insert(c.clone());
            glued_carrier.insert(c.clone(), datum.subdivision.carrier_of(c).clone());
        }
    }
    let glued_maximal: Vec<Vec<RayId>> = {
        let all: Vec<&Cell> = glued_cones
            .iter()
            .filter(|c| {
                !c.verts().is_empty()
                    && !glued_cones.iter().any(|d| d != *c && d.contains_ids(c))
            })
            .collect();
        all.into_iter().map(|c| c.verts().to_vec()).collect()
    };
    let assembled_refined = ConicalComplex::build_inner(
        glued_rays,
        &glued_maximal,
        f1.source.integral().clone(),
        false,
    )?;
    let assembled = ConicalSubdivision::new_unchecked(
        skeleton.clone(),
        assembled_refined,
        glued_carrier,
    );
    let (extended, _cert): (ConicalSubdivision, ConicalCertificate) =
        conical::extend_conical_triangulation(
            &f1.source,
            &h,
            &skeleton,
            &assembled,
            &glued_values,
        )?;
    let report = check_nearly_semistable(&f1, &extended)?;
    Ok((f1, extended, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, ratio};

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    /// The rank-two orthant morphism (a,b,c,d) -> (a+b, c+d) with the source
    /// lattice generated by (1/2,1/2,1/2,1/2) and the standard basis.
    fn quotient_example() -> ConicalMorphism {
        let rays: BTreeMap<RayId, Point> = (0..4)
            .map(|i| {
                let mut g = vec![Rat::zero(); 4];
                g[i] = Rat::one();
                (i, g)
            })
            .collect();
        let ny = IntegralStructure::from_generators(&[
            vec![ratio(1, 2), ratio(1, 2), ratio(1, 2), ratio(1, 2)],
            vec![rat(1), rat(0), rat(0), rat(0)],
            vec![rat(0), rat(1), rat(0), rat(0)],
            vec![rat(0), rat(0), rat(1), rat(0)],
            vec![rat(0), rat(0), rat(0), rat(1)],
        ])
        .unwrap();
        let source = ConicalComplex::build(rays, &[vec![0, 1, 2, 3]], ny).unwrap();
        let m = Mat::from_rows(vec![
            vec![rat(1), rat(1), rat(0), rat(0)],
            vec![rat(0), rat(0), rat(1), rat(1)],
        ]);
        ConicalMorphism::new(source, OrthantBase::standard(2), MorphismMap::Global(m)).unwrap()
    }

    fn identity_orthant(n: usize) -> ConicalMorphism {
        let rays: BTreeMap<RayId, Point> = (0..n)
            .map(|i| {
                let mut g = vec![Rat::zero(); n];
                g[i] = Rat::one();
                (i, g)
            })
            .collect();
        let source =
            ConicalComplex::build(rays, &[(0..n).collect()], IntegralStructure::standard(n))
                .unwrap();
        ConicalMorphism::new(
            source,
            OrthantBase::standard(n),
            MorphismMap::Global(Mat::identity(n)),
        )
        .unwrap()
    }

    #[test]
    fn cone_index_examples() {
        // Unimodular orthant.
        let e: Vec<Point> = (0..3)
            .map(|i| {
                let mut g = vec![rat(0); 3];
                g[i] = rat(1);
                g
            })
            .collect();
        assert_eq!(cone_index(&e, &IntegralStructure::standard(3)).unwrap(), big(1));
        // Cone((1,0),(1,2)) has index 2 in Z^2.
        let gens = vec![vec![rat(1), rat(0)], vec![rat(1), rat(2)]];
        assert_eq!(cone_index(&gens, &IntegralStructure::standard(2)).unwrap(), big(2));
        // The full orthant in the half-integer diagonal lattice has index 2.
        let ny = IntegralStructure::from_generators(&[
            vec![ratio(1, 2), ratio(1, 2), ratio(1, 2), ratio(1, 2)],
            vec![rat(1), rat(0), rat(0), rat(0)],
            vec![rat(0), rat(1), rat(0), rat(0)],
            vec![rat(0), rat(0), rat(1), rat(0)],
            vec![rat(0), rat(0), rat(0), rat(1)],
        ])
        .unwrap();
        let e4: Vec<Point> = (0..4)
            .map(|i| {
                let mut g = vec![rat(0); 4];
                g[i] = rat(1);
                g
            })
            .collect();
        assert_eq!(cone_index(&e4, &ny).unwrap(), big(2));
        // Non-simplicial input is rejected.
        let dep = vec![
            vec![rat(1), rat(0)],
            vec![rat(0), rat(1)],
            vec![rat(1), rat(1)],
        ];
        assert!(matches!(
            cone_index(&dep, &IntegralStructure::standard(2)),
            Err(SemistableError::NotSimplicial(_))
        ));
    }

    #[test]
    fn cone_index_is_basis_and_order_invariant() {
        let gens = vec![vec![rat(1), rat(0)], vec![rat(1), rat(2)]];
        let std2 = IntegralStructure::standard(2);
        // A unimodular change of the lattice basis leaves the index alone.
        let other = IntegralStructure::from_basis(Mat::from_rows(vec![
            vec![rat(1), rat(3)],
            vec![rat(0), rat(1)],
        ]))
        .unwrap();
        assert_eq!(cone_index(&gens, &std2).unwrap(), cone_index(&gens, &other).unwrap());
        // Permuting the rays at most flips the determinant's sign.
        let swapped = vec![gens[1].clone(), gens[0].clone()];
        assert_eq!(cone_index(&gens, &std2).unwrap(), cone_index(&swapped, &std2).unwrap());
    }

    #[test]
    fn pullback_slicing_rejects_origin_fibers() {
        // (a, b) -> a sends the second edge to the origin.
        let rays: BTreeMap<RayId, Point> = [
            (0, vec![rat(1), rat(0)]),
            (1, vec![rat(0), rat(1)]),
        ]
        .into();
        let src =
            ConicalComplex::build(rays, &[vec![0, 1]], IntegralStructure::standard(2)).unwrap();
        let m = Mat::from_rows(vec![vec![rat(1), rat(0)]]);
        let f = ConicalMorphism::new(src, OrthantBase::standard(1), MorphismMap::Global(m))
            .unwrap();
        assert!(matches!(
            f.pullback_slicing(),
            Err(SemistableError::OriginFiber(1))
        ));
    }

    #[test]
    fn base_change_identities_and_refinement() {
        let id2 = identity_orthant(2);
        let same = base_change(&id2, vec![big(1), big(1)]).unwrap();
        for l in same.refined_lattices.values() {
            assert_eq!(l.basis(), id2.source.integral().basis());
        }
        assert!(matches!(
            base_change(&id2, vec![big(0), big(1)]),
            Err(SemistableError::NonPositiveMultiplier)
        ));
        // Doubling map on the half-line with k = 2: the refined lattice stays
        // Z (2Z pulls back to Z), which makes the primitive generator map to
        // the primitive generator of the base edge.
        let rays: BTreeMap<RayId, Point> = [(0, vec![rat(1)])].into();
        let src =
            ConicalComplex::build(rays, &[vec![0]], IntegralStructure::standard(1)).unwrap();
        let m = Mat::from_rows(vec![vec![rat(2)]]);
        let f = ConicalMorphism::new(src, OrthantBase::standard(1), MorphismMap::Global(m))
            .unwrap();
        let f2 = base_change(&f, vec![big(2)]).unwrap();
        let lat = f2.refined_lattices.values().next().unwrap();
        assert_eq!(lat.basis().at(0, 0).abs(), rat(1));
        assert_eq!(f2.target.edge_primitive(0), vec![rat(2)]);
        // The quotient example with k = (1,1) keeps its lattices.
        let q = quotient_example();
        let q1 = base_change(&q, vec![big(1), big(1)]).unwrap();
        for (cone, l) in &q1.refined_lattices {
            let orig = &q.refined_lattices[cone];
            // Same lattice: mutual containment of basis vectors.
            for j in 0..l.basis().ncols() {
                assert!(orig.contains(&l.basis().col(j)));
                assert!(l.contains(&orig.basis().col(j)));
            }
        }
    }

    #[test]
    fn preimage_skeleton_of_the_quotient_example() {
        let q = quotient_example();
        let (skel, pieces) = preimage_skeleton(&q);
        assert_eq!(pieces.len(), 2);
        // Piece over the first edge: the face spanned by e1, e2.
        let p1_rays: BTreeSet<RayId> = pieces[0].ray_ids().into_iter().collect();
        assert_eq!(p1_rays, BTreeSet::from([0, 1]));
        assert_eq!(pieces[0].max_dim(), 2);
        let p2_rays: BTreeSet<RayId> = pieces[1].ray_ids().into_iter().collect();
        assert_eq!(p2_rays, BTreeSet::from([2, 3]));
        // The skeleton preimage is the union of the two faces.
        assert_eq!(skel.ray_ids().len(), 4);
        assert_eq!(skel.max_dim(), 2);
        // Identity on the orthant: the skeleton is the union of edges.
        let id3 = identity_orthant(3);
        let (skel, pieces) = preimage_skeleton(&id3);
        assert_eq!(skel.max_dim(), 1);
        assert_eq!(pieces.len(), 3);
        for (i, p) in pieces.iter().enumerate() {
            assert_eq!(p.ray_ids(), vec![i]);
        }
    }

    #[test]
    fn check_quotient_example_is_nearly_but_not_semistable() {
        let q = quotient_example();
        let trivial = ConicalSubdivision::trivial(q.source());
        let report = check_nearly_semistable(&q, &trivial).unwrap();
        assert!(report.equidimensional.ok);
        assert!(report.reduced.ok);
        assert!(report.codim1_semistable.ok);
        assert!(report.simplicial);
        assert!(report.base_nonsingular);
        assert_eq!(report.verdict, Verdict::NearlySemistable);
    }

    #[test]
    fn check_identity_is_semistable() {
        let id = identity_orthant(2);
        let trivial = ConicalSubdivision::trivial(id.source());
        let report = check_nearly_semistable(&id, &trivial).unwrap();
        assert_eq!(report.verdict, Verdict::Semistable);
    }

    #[test]
    fn doubling_map_without_base_change_is_not_reduced() {
        let rays: BTreeMap<RayId, Point> = [(0, vec![rat(1)])].into();
        let src =
            ConicalComplex::build(rays, &[vec![0]], IntegralStructure::standard(1)).unwrap();
        let m = Mat::from_rows(vec![vec![rat(2)]]);
        let f = ConicalMorphism::new(src, OrthantBase::standard(1), MorphismMap::Global(m))
            .unwrap();
        let trivial = ConicalSubdivision::trivial(f.source());
        let report = check_nearly_semistable(&f, &trivial).unwrap();
        assert!(!report.reduced.ok);
        assert_eq!(report.verdict, Verdict::Neither);
    }

    #[test]
    fn pipeline_on_the_identity() {
        let id = identity_orthant(2);
        let (_, pieces) = preimage_skeleton(&id);
        let boundary: Vec<BoundaryDatum> = pieces
            .iter()
            .map(|p| BoundaryDatum {
                multiplier: big(1),
                subdivision: ConicalSubdivision::trivial(p),
                lifting: p.ray_ids().into_iter().map(|r| (r, rat(0))).collect(),
            })
            .collect();
        let (_, sub, report) = weak_to_nearly_semistable(&id, &boundary).unwrap();
        assert!(sub.is_simplicial());
        assert_eq!(report.verdict, Verdict::Semistable);
    }

    #[test]
    fn pipeline_on_the_quotient_example() {
        let q = quotient_example();
        let (_, pieces) = preimage_skeleton(&q);
        let boundary: Vec<BoundaryDatum> = pieces
            .iter()
            .map(|p| BoundaryDatum {
                multiplier: big(1),
                subdivision: ConicalSubdivision::trivial(p),
                lifting: p.ray_ids().into_iter().map(|r| (r, rat(0))).collect(),
            })
            .collect();
        let (f1, sub, report) = weak_to_nearly_semistable(&q, &boundary).unwrap();
        assert!(sub.is_simplicial());
        // No new edges.
        assert_eq!(
            sub.refined().ray_direction_set(),
            q.source().ray_direction_set()
        );
        assert_eq!(report.verdict, Verdict::NearlySemistable);
        // The maximal cone still has index two: not semistable.
        let gens: Vec<Point> = sub
            .refined()
            .maximal_cones()[0]
            .verts()
            .iter()
            .map(|r| sub.refined().generator(*r).clone())
            .collect();
        let (_, _, lattice) = f1.covering_data(&gens).unwrap();
        assert_eq!(cone_index(&gens, lattice).unwrap(), big(2));
    }

    #[test]
    fn pipeline_on_the_doubling_map() {
        let rays: BTreeMap<RayId, Point> = [(0, vec![rat(1)])].into();
        let src =
            ConicalComplex::build(rays, &[vec![0]], IntegralStructure::standard(1)).unwrap();
        let m = Mat::from_rows(vec![vec![rat(2)]]);
        let f = ConicalMorphism::new(src, OrthantBase::standard(1), MorphismMap::Global(m))
            .unwrap();
        let (_, pieces) = preimage_skeleton(&f);
        let boundary = vec![BoundaryDatum {
            multiplier: big(2),
            subdivision: ConicalSubdivision::trivial(&pieces[0]),
            lifting: [(0, rat(0))].into(),
        }];
        let (_, _, report) = weak_to_nearly_semistable(&f, &boundary).unwrap();
        assert_eq!(report.verdict, Verdict::Semistable);
    }

    #[test]
    fn pipeline_rejects_index_two_boundary_data() {
        // (a, b) -> a + b with the half-diagonal plane lattice: the whole
        // orthant lies over the base edge, and its trivial triangulation has
        // index two.
        let rays: BTreeMap<RayId, Point> = [
            (0, vec![rat(1), rat(0)]),
            (1, vec![rat(0), rat(1)]),
        ]
        .into();
        let n = IntegralStructure::from_generators(&[
            vec![ratio(1, 2), ratio(1, 2)],
            vec![rat(1), rat(0)],
            vec![rat(0), rat(1)],
        ])
        .unwrap();
        let src = ConicalComplex::build(rays, &[vec![0, 1]], n).unwrap();
        let m = Mat::from_rows(vec![vec![rat(1), rat(1)]]);
        let f = ConicalMorphism::new(src, OrthantBase::standard(1), MorphismMap::Global(m))
            .unwrap();
        let (_, pieces) = preimage_skeleton(&f);
        assert_eq!(pieces[0].max_dim(), 2);
        let boundary = vec![BoundaryDatum {
            multiplier: big(1),
            subdivision: ConicalSubdivision::trivial(&pieces[0]),
            lifting: pieces[0].ray_ids().into_iter().map(|r| (r, rat(0))).collect(),
        }];
        match weak_to_nearly_semistable(&f, &boundary) {
            Err(SemistableError::BoundaryNotIndexOne { index, .. }) => {
                assert_eq!(index, big(2));
            }
            other => panic!("expected BoundaryNotIndexOne, got {other:?}"),
        }
    }

    #[test]
    fn morphism_validation_rejects_bad_maps() {
        let rays: BTreeMap<RayId, Point> = (0..2)
            .map(|i| {
                let mut g = vec![Rat::zero(); 2];
                g[i] = Rat::one();
                (i, g)
            })
            .collect();
        let src = ConicalComplex::build(
            rays.clone(),
            &[vec![0, 1]],
            IntegralStructure::standard(2),
        )
        .unwrap();
        // Maps out of the orthant.
        let m = Mat::from_rows(vec![vec![rat(-1), rat(0)], vec![rat(0), rat(1)]]);
        assert!(matches!(
            ConicalMorphism::new(src.clone(), OrthantBase::standard(2), MorphismMap::Global(m)),
            Err(SemistableError::NotIntoOrthant)
        ));
        // Not surjective: collapses onto one edge.
        let m = Mat::from_rows(vec![vec![rat(1), rat(1)], vec![rat(0), rat(0)]]);
        assert!(matches!(
            ConicalMorphism::new(src.clone(), OrthantBase::standard(2), MorphismMap::Global(m)),
            Err(SemistableError::NotSurjective)
        ));
        // Not lattice-respecting: half-integral image.
        let m = Mat::from_rows(vec![
            vec![ratio(1, 2), rat(0)],
            vec![rat(0), rat(1)],
        ]);
        assert!(matches!(
            ConicalMorphism::new(src, OrthantBase::standard(2), MorphismMap::Global(m)),
            Err(SemistableError::NotLatticeRespecting)
        ));
    }
}
