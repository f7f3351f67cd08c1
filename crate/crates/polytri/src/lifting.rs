//! Lifting (order) functions and the subdivisions they induce.
//!
//! A lifting is convex down on each cell: f(lx + my) >= l f(x) + m f(y).
//! The induced subdivision is computed per maximal cell as the projection of
//! the upper faces of the lifted vertex set; a verticial lifting never
//! introduces new vertices. General piecewise-linear liftings carry their
//! own linearity subdivision and vertex values.

use crate::complex::{Cell, ComplexError, PolyComplex, Subdivision, VertexId};
use crate::hull::{self, AffineFn, Hull};
use crate::linalg::Point;
use crate::rat::{rat, Rat};
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};

#[derive(thiserror::Error, Debug, Clone)]
pub enum LiftingError {
    #[error("lifting violates convexity (convex-down) on cell {0:?}")]
    NotConvexDown(Cell),
    #[error("value {given} at {point:?} is unattainable: the hull of the other values forces {hull_value}")]
    UnattainableValue { point: Point, given: Rat, hull_value: Rat },
    #[error("lifting domain does not match the complex: {0}")]
    DomainMismatch(String),
    #[error("not a subcomplex")]
    NotSubcomplex,
    #[error("restriction of the extension differs from the boundary lifting")]
    RestrictionMismatch,
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// A lifting determined by rational values on the vertices of a complex.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VerticialLifting {
    values: BTreeMap<VertexId, Rat>,
}

impl VerticialLifting {
    pub fn new(values: BTreeMap<VertexId, Rat>) -> Self {
        VerticialLifting { values }
    }

    pub fn zero(complex: &PolyComplex) -> Self {
        VerticialLifting {
            values: complex.vertex_ids().into_iter().map(|v| (v, Rat::zero())).collect(),
        }
    }

    pub fn values(&self) -> &BTreeMap<VertexId, Rat> {
        &self.values
    }

    pub fn value(&self, v: VertexId) -> Option<&Rat> {
        self.values.get(&v)
    }

    pub fn matches_vertices(&self, complex: &PolyComplex) -> bool {
        let dom: BTreeSet<VertexId> = self.values.keys().copied().collect();
        let verts: BTreeSet<VertexId> = complex.vertex_ids().into_iter().collect();
        dom == verts
    }

    /// Shift by a constant so every value is at least one.
    pub fn shifted_positive(&self) -> (VerticialLifting, Rat) {
        let min = self.values.values().min().cloned().unwrap_or_else(Rat::zero);
        let shift = if min >= Rat::one() { Rat::zero() } else { Rat::one() - &min };
        let values = self.values.iter().map(|(v, x)| (*v, x + &shift)).collect();
        (VerticialLifting { values }, shift)
    }

    /// `self + eps * other`, over the common domain (must coincide).
    pub fn add_scaled(&self, other: &VerticialLifting, eps: &Rat) -> VerticialLifting {
        assert!(self.values.keys().eq(other.values.keys()));
        VerticialLifting {
            values: self
                .values
                .iter()
                .map(|(v, x)| (*v, x + eps * &other.values[v]))
                .collect(),
        }
    }

    /// Indicator lifting: one at `v`, zero at the other vertices.
    pub fn indicator(complex: &PolyComplex, v: VertexId) -> Self {
        let values = complex
            .vertex_ids()
            .into_iter()
            .map(|w| (w, if w == v { Rat::one() } else { Rat::zero() }))
            .collect();
        VerticialLifting { values }
    }
}

/// A piecewise-linear lifting: a subdivision of its base complex giving the
/// domains of linearity, plus values on the refined vertices. Convex-down on
/// each base cell is certified at construction via the upper hull.
#[derive(Clone, Debug)]
pub struct PLLifting {
    linearity: Subdivision,
    values: BTreeMap<VertexId, Rat>,
}

impl PLLifting {
    pub fn new(
        linearity: Subdivision,
        values: BTreeMap<VertexId, Rat>,
    ) -> Result<Self, LiftingError> {
        let dom: BTreeSet<VertexId> = values.keys().copied().collect();
        let verts: BTreeSet<VertexId> = linearity.refined().vertex_ids().into_iter().collect();
        if dom != verts {
            return Err(LiftingError::DomainMismatch(
                "values must cover exactly the refined vertex set".into(),
            ));
        }
        let lifting = PLLifting { linearity, values };
        // Convex-down check: computing the induced pieces fails on violation.
        pl_pieces(lifting.linearity.parent(), &lifting)?;
        Ok(lifting)
    }

    pub(crate) fn new_unchecked(
        linearity: Subdivision,
        values: BTreeMap<VertexId, Rat>,
    ) -> Self {
        PLLifting { linearity, values }
    }

    pub fn linearity(&self) -> &Subdivision {
        &self.linearity
    }

    pub fn base(&self) -> &PolyComplex {
        self.linearity.parent()
    }

    pub fn values(&self) -> &BTreeMap<VertexId, Rat> {
        &self.values
    }

    pub fn as_lifting(&self) -> Lifting {
        Lifting::Piecewise(Box::new(self.clone()))
    }

    /// Evaluates the lifting at an ambient point of its support.
    pub fn eval(&self, p: &Point) -> Option<Rat> {
        eval_on_complex(self.linearity.refined(), &self.values, p)
    }
}

/// Either kind of lifting function.
#[derive(Clone, Debug)]
pub enum Lifting {
    Verticial(VerticialLifting),
    Piecewise(Box<PLLifting>),
}

impl Lifting {
    pub fn verticial(values: BTreeMap<VertexId, Rat>) -> Self {
        Lifting::Verticial(VerticialLifting::new(values))
    }

    /// The value at a vertex of the complex the lifting is defined over.
    pub fn vertex_value(&self, v: VertexId) -> Option<&Rat> {
        match self {
            Lifting::Verticial(f) => f.value(v),
            Lifting::Piecewise(f) => f.values.get(&v),
        }
    }

    /// Evaluates at any point of the support; `complex` is the base complex
    /// the lifting lives on (needed for the verticial case).
    pub fn eval_on(&self, complex: &PolyComplex, p: &Point) -> Option<Rat> {
        match self {
            Lifting::Verticial(f) => {
                let sub = induced_subdivision(complex, self).ok()?;
                eval_on_complex(sub.refined(), &f.values, p)
            }
            Lifting::Piecewise(f) => f.eval(p),
        }
    }

    /// Restriction to a subcomplex, staying the same kind.
    pub fn restrict_to(&self, sub: &PolyComplex) -> Result<Lifting, LiftingError> {
        match self {
            Lifting::Verticial(f) => {
                let mut values = BTreeMap::new();
                for v in sub.vertex_ids() {
                    let Some(x) = f.value(v) else {
                        return Err(LiftingError::NotSubcomplex);
                    };
                    values.insert(v, x.clone());
                }
                Ok(Lifting::Verticial(VerticialLifting::new(values)))
            }
            Lifting::Piecewise(f) => {
                // Subcomplexes of the base restrict the linearity subdivision;
                // subcomplexes of the refined complex (pieces of linearity)
                // restrict to trivially-subdivided data.
                let restricted = if sub.is_subcomplex_of(f.linearity.parent()) {
                    f.linearity
                        .restrict_to(sub)
                        .map_err(|_| LiftingError::NotSubcomplex)?
                } else if sub.is_subcomplex_of(f.linearity.refined()) {
                    Subdivision::trivial(sub)
                } else {
                    return Err(LiftingError::NotSubcomplex);
                };
                let values = restricted
                    .refined()
                    .vertex_ids()
                    .into_iter()
                    .map(|v| (v, f.values[&v].clone()))
                    .collect();
                Ok(Lifting::Piecewise(Box::new(PLLifting {
                    linearity: restricted,
                    values,
                })))
            }
        }
    }
}

/// Restriction of a lifting to a subcomplex of its domain; same kind back.
pub fn restrict(f: &Lifting, sub: &PolyComplex) -> Result<Lifting, LiftingError> {
    f.restrict_to(sub)
}

fn eval_on_complex(
    complex: &PolyComplex,
    values: &BTreeMap<VertexId, Rat>,
    p: &Point,
) -> Option<Rat> {
    for cell in complex.maximal_cells() {
        let h = complex.hull_of(cell).ok()?;
        if h.contains(p) {
            return Some(affine_on(complex, cell, values).eval(p));
        }
    }
    None
}

/// One full-dimensional linearity domain inside a maximal parent cell.
struct Piece {
    member_ids: Vec<VertexId>,
    parent_cell: Cell,
}

struct PoolPoint {
    id: VertexId,
    point: Point,
    value: Rat,
}

/// (point, given height, upper-hull height) per pool point.
type Attainment = Vec<(Point, Rat, Rat)>;

/// Upper-hull pieces of a pool of lifted points per maximal cell, together
/// with the hull value at every pool point (for attainment checks). The pool
/// of a cell must contain all its vertices.
fn upper_pieces_per_cell(
    parent: &PolyComplex,
    pool_for: impl Fn(&Cell) -> Vec<PoolPoint>,
) -> Result<(Vec<Piece>, Attainment), LiftingError> {
    let mut pieces: Vec<Piece> = Vec::new();
    let mut attainment: Vec<(Point, Rat, Rat)> = Vec::new();
    for sigma in parent.maximal_cells() {
        let pool = pool_for(sigma);
        let points: Vec<Point> = pool.iter().map(|p| p.point.clone()).collect();
        let heights: Vec<Rat> = pool.iter().map(|p| p.value.clone()).collect();
        let cells = hull::upper_hull(&points, &heights).map_err(ComplexError::from)?;
        // U(w) = min over the piece affine functions; attained iff equal.
        for p in &pool {
            let hull_value = cells
                .iter()
                .map(|c| c.affine.eval(&p.point))
                .min()
                .expect("at least one upper cell");
            attainment.push((p.point.clone(), p.value.clone(), hull_value));
        }
        for c in cells {
            pieces.push(Piece {
                member_ids: c.members.iter().map(|&i| pool[i].id).collect(),
                parent_cell: sigma.clone(),
            });
        }
    }
    Ok((pieces, attainment))
}

/// Assembles a subdivision of `parent` from computed pieces, with carrier
/// map. Vertex coordinates are taken from `points`.
fn subdivision_from_pieces(
    parent: &PolyComplex,
    points: &BTreeMap<VertexId, Point>,
    pieces: &[Piece],
) -> Result<Subdivision, LiftingError> {
    let piece_data: Vec<(Vec<VertexId>, usize)> = pieces
        .iter()
        .map(|p| (p.member_ids.clone(), p.parent_cell.dim()))
        .collect();
    let refined = PolyComplex::assemble_from_pieces(
        parent.ambient_dim(),
        points,
        parent.integral().clone(),
        &piece_data,
    );
    // Carrier: the smallest face of any piece's parent cell containing the
    // refined cell equals the smallest parent cell containing it.
    let mut carrier: BTreeMap<Cell, Cell> = BTreeMap::new();
    let mut parent_hulls: BTreeMap<Cell, Hull> = BTreeMap::new();
    for piece in pieces {
        if !parent_hulls.contains_key(&piece.parent_cell) {
            let h = parent.hull_of(&piece.parent_cell)?;
            parent_hulls.insert(piece.parent_cell.clone(), h);
        }
    }
    for cell in refined.cells() {
        let piece = pieces
            .iter()
            .find(|p| cell.verts().iter().all(|v| p.member_ids.contains(v)))
            .or_else(|| {
                pieces.iter().find(|p| {
                    let h = &parent_hulls[&p.parent_cell];
                    cell.verts().iter().all(|v| h.contains(&points[v]))
                })
            })
            .expect("every refined cell lies in some piece's parent cell");
        let h = &parent_hulls[&piece.parent_cell];
        let pts: Vec<Point> = cell.verts().iter().map(|v| points[v].clone()).collect();
        let face = parent.smallest_face_containing(&piece.parent_cell, h, &pts);
        carrier.insert(cell.clone(), face);
    }
    Ok(Subdivision::new_unchecked(parent.clone(), refined, carrier))
}

/// Pieces of a piecewise-linear lifting over its base; errors when the data
/// is not convex-down on some base cell.
fn pl_pieces(base: &PolyComplex, pl: &PLLifting) -> Result<Vec<Piece>, LiftingError> {
    let refined = pl.linearity.refined();
    let vertex_carrier: BTreeMap<VertexId, Cell> = refined
        .vertex_ids()
        .into_iter()
        .map(|v| (v, pl.linearity.carrier_of(&Cell::new(vec![v], 0)).clone()))
        .collect();
    let (pieces, attainment) = upper_pieces_per_cell(base, |sigma| {
        refined
            .vertex_ids()
            .into_iter()
            .filter(|v| sigma.contains_ids(&vertex_carrier[v]))
            .map(|v| PoolPoint {
                id: v,
                point: refined.point(v).clone(),
                value: pl.values[&v].clone(),
            })
            .collect()
    })?;
    // A value strictly below the hull contradicts convexity of the data.
    for (point, given, hull_value) in &attainment {
        debug_assert!(hull_value >= given);
        if hull_value > given {
            let bad = refined
                .vertex_ids()
                .into_iter()
                .find(|v| refined.point(*v) == point)
                .map(|v| Cell::new(vec![v], 0))
                .unwrap_or_else(|| Cell::new(vec![], 0));
            return Err(LiftingError::NotConvexDown(bad));
        }
    }
    // Straddle check: every linearity cell must sit inside one piece.
    let mut piece_hulls: Vec<Option<Hull>> = (0..pieces.len()).map(|_| None).collect();
    for cell in refined.maximal_cells() {
        let pts: Vec<Point> = cell
            .verts()
            .iter()
            .map(|v| refined.point(*v).clone())
            .collect();
        let mut inside_some = false;
        for (i, piece) in pieces.iter().enumerate() {
            if piece.parent_cell.dim() < cell.dim() {
                continue;
            }
            if piece_hulls[i].is_none() {
                let ppts: Vec<Point> = piece
                    .member_ids
                    .iter()
                    .map(|v| refined.point(*v).clone())
                    .collect();
                piece_hulls[i] =
                    Some(hull::convex_hull(&ppts).map_err(ComplexError::from)?);
            }
            let h = piece_hulls[i].as_ref().unwrap();
            if pts.iter().all(|p| h.contains(p)) {
                inside_some = true;
                break;
            }
        }
        if !inside_some {
            return Err(LiftingError::NotConvexDown(cell.clone()));
        }
    }
    Ok(pieces)
}

/// The subdivision of `complex` induced by the lifting: the coarsest
/// subdivision on whose cells the lifting is affine.
pub fn induced_subdivision(
    complex: &PolyComplex,
    f: &Lifting,
) -> Result<Subdivision, LiftingError> {
    match f {
        Lifting::Verticial(vf) => {
            if !vf.matches_vertices(complex) {
                return Err(LiftingError::DomainMismatch(
                    "verticial lifting must be defined on exactly the vertex set".into(),
                ));
            }
            let (pieces, _) = upper_pieces_per_cell(complex, |sigma| {
                sigma
                    .verts()
                    .iter()
                    .map(|&v| PoolPoint {
                        id: v,
                        point: complex.point(v).clone(),
                        value: vf.values[&v].clone(),
                    })
                    .collect()
            })?;
            subdivision_from_pieces(complex, complex.vertices(), &pieces)
        }
        Lifting::Piecewise(pl) => {
            if pl.base() != complex {
                return Err(LiftingError::DomainMismatch(
                    "piecewise lifting is defined over a different base complex".into(),
                ));
            }
            let pieces = pl_pieces(complex, pl)?;
            subdivision_from_pieces(complex, pl.linearity.refined().vertices(), &pieces)
        }
    }
}

/// The pointwise-minimal convex-down-per-cell function attaining the given
/// values: `values` on the vertices of `complex`, plus optional extra points
/// inside the support, each with a fresh vertex id.
pub fn minimal_extension(
    complex: &PolyComplex,
    values: &BTreeMap<VertexId, Rat>,
    extra: &[(VertexId, Point, Rat)],
) -> Result<PLLifting, LiftingError> {
    for v in complex.vertex_ids() {
        if !values.contains_key(&v) {
            return Err(LiftingError::DomainMismatch(format!(
                "missing value at vertex {v}"
            )));
        }
    }
    let mut points: BTreeMap<VertexId, Point> = complex.vertices().clone();
    let mut all_values: BTreeMap<VertexId, Rat> = values.clone();
    for (id, p, val) in extra {
        if points.contains_key(id) {
            return Err(LiftingError::DomainMismatch(format!(
                "extra point id {id} collides with an existing vertex"
            )));
        }
        if points.values().any(|q| q == p) {
            return Err(LiftingError::DomainMismatch(
                "extra point coincides with an existing vertex".into(),
            ));
        }
        points.insert(*id, p.clone());
        all_values.insert(*id, val.clone());
    }
    let maximal: Vec<Cell> = complex.maximal_cells().into_iter().cloned().collect();
    let mut hulls: BTreeMap<&Cell, Hull> = BTreeMap::new();
    for c in &maximal {
        hulls.insert(c, complex.hull_of(c)?);
    }
    for (id, p, _) in extra {
        if !maximal.iter().any(|c| hulls[c].contains(p)) {
            return Err(LiftingError::DomainMismatch(format!(
                "extra point {id} lies outside the complex"
            )));
        }
    }
    let (pieces, attainment) = upper_pieces_per_cell(complex, |sigma| {
        let h = &hulls[sigma];
        points
            .iter()
            .filter(|(v, p)| {
                if complex.vertices().contains_key(v) {
                    sigma.has_vertex(**v)
                } else {
                    h.contains(p)
                }
            })
            .map(|(v, p)| PoolPoint {
                id: *v,
                point: p.clone(),
                value: all_values[v].clone(),
            })
            .collect()
    })?;
    for (point, given, hull_value) in attainment {
        if hull_value > given {
            return Err(LiftingError::UnattainableValue { point, given, hull_value });
        }
    }
    let linearity = subdivision_from_pieces(complex, &points, &pieces)?;
    let surviving: BTreeMap<VertexId, Rat> = linearity
        .refined()
        .vertex_ids()
        .into_iter()
        .map(|v| (v, all_values[&v].clone()))
        .collect();
    Ok(PLLifting::new_unchecked(linearity, surviving))
}

/// Refines an existing subdivision by a lifting on its refined complex; the
/// result is a subdivision of the original parent (the structural form of
/// `f + eps f'` for small eps).
pub fn refine_by(base: &Subdivision, f: &Lifting) -> Result<Subdivision, LiftingError> {
    let inner = induced_subdivision(base.refined(), f)?;
    let refined = inner.refined().clone();
    let mut carrier: BTreeMap<Cell, Cell> = BTreeMap::new();
    let mut parent_hulls: BTreeMap<Cell, Hull> = BTreeMap::new();
    for cell in refined.cells() {
        let mid = inner.carrier_of(cell);
        let outer = base.carrier_of(mid).clone();
        if !parent_hulls.contains_key(&outer) {
            let h = base.parent().hull_of(&outer)?;
            parent_hulls.insert(outer.clone(), h);
        }
        let h = &parent_hulls[&outer];
        let pts: Vec<Point> = cell
            .verts()
            .iter()
            .map(|v| refined.point(*v).clone())
            .collect();
        let face = base.parent().smallest_face_containing(&outer, h, &pts);
        carrier.insert(cell.clone(), face);
    }
    Ok(Subdivision::new_unchecked(
        base.parent().clone(),
        refined,
        carrier,
    ))
}

/// An effective threshold for transitivity: for every rational
/// `0 < eps <= result`, `f + eps f'` induces exactly
/// `refine_by(induced(f), f')`. Computed from the strict fold slacks of the
/// hull of `f` against the drops of `f'`.
pub fn explicit_epsilon(
    complex: &PolyComplex,
    f: &Lifting,
    fp: &Lifting,
) -> Result<Rat, LiftingError> {
    let base = induced_subdivision(complex, f)?;
    let fine = refine_by(&base, fp)?;
    let refined = fine.refined();
    let mut f_vals: BTreeMap<VertexId, Rat> = BTreeMap::new();
    let mut fp_vals: BTreeMap<VertexId, Rat> = BTreeMap::new();
    for v in refined.vertex_ids() {
        let p = refined.point(v);
        f_vals.insert(v, lifting_value_at(f, complex, v, p)?);
        fp_vals.insert(v, lifting_value_at(fp, base.refined(), v, p)?);
    }
    let mut ratios: Vec<Rat> = Vec::new();
    let mut base_hulls: BTreeMap<Cell, Hull> = BTreeMap::new();
    for sigma in complex.maximal_cells() {
        let pool: Vec<VertexId> = refined
            .vertex_ids()
            .into_iter()
            .filter(|v| sigma.contains_ids(fine.carrier_of(&Cell::new(vec![*v], 0))))
            .collect();
        for piece in refined.cells_of_dim(sigma.dim()) {
            if fine.carrier_of(piece) != sigma {
                continue;
            }
            // The cell of induced(f) containing the piece.
            let mid = {
                let mut found: Option<Cell> = None;
                for c in base.refined().cells_of_dim(sigma.dim()) {
                    if !base_hulls.contains_key(c) {
                        let h = base.refined().hull_of(c).expect("base cell hull");
                        base_hulls.insert(c.clone(), h);
                    }
                    let h = &base_hulls[c];
                    if piece.verts().iter().all(|v| h.contains(refined.point(*v))) {
                        found = Some(c.clone());
                        break;
                    }
                }
                found.expect("piece lies in a cell of the base subdivision")
            };
            let l_f = affine_on(base.refined(), &mid, &f_vals);
            let l_fp = affine_on(refined, piece, &fp_vals);
            for &w in &pool {
                if piece.has_vertex(w) {
                    continue;
                }
                let p = refined.point(w);
                let a = l_f.eval(p) - &f_vals[&w];
                let b = l_fp.eval(p) - &fp_vals[&w];
                debug_assert!(!a.is_negative(), "hull hyperplanes lie above the lifts");
                if a.is_zero() {
                    debug_assert!(b.is_positive(), "a vanishing f-slack must be broken by f'");
                    continue;
                }
                if b.is_negative() {
                    ratios.push(a / -b);
                }
            }
        }
    }
    Ok(match ratios.into_iter().min() {
        None => Rat::one(),
        Some(r) => r / rat(2),
    })
}

fn lifting_value_at(
    f: &Lifting,
    base: &PolyComplex,
    v: VertexId,
    p: &Point,
) -> Result<Rat, LiftingError> {
    if let Some(x) = f.vertex_value(v) {
        return Ok(x.clone());
    }
    f.eval_on(base, p).ok_or_else(|| {
        LiftingError::DomainMismatch(format!("cannot evaluate lifting at vertex {v}"))
    })
}

fn affine_on(complex: &PolyComplex, cell: &Cell, values: &BTreeMap<VertexId, Rat>) -> AffineFn {
    let pts: Vec<(Point, Rat)> = cell
        .verts()
        .iter()
        .map(|v| (complex.point(*v).clone(), values[v].clone()))
        .collect();
    let (coeffs, constant) =
        crate::linalg::affine_fn_through(&pts).expect("values are affine on the cell");
    AffineFn { coeffs, constant }
}

/// Materializes `f + eps * f'` as a piecewise-linear lifting over the common
/// refinement. For `eps` within [`explicit_epsilon`] this induces exactly
/// `refine_by(induced(f), f')`.
pub fn combine(
    complex: &PolyComplex,
    f: &Lifting,
    eps: &Rat,
    fp: &Lifting,
) -> Result<PLLifting, LiftingError> {
    let base = induced_subdivision(complex, f)?;
    let fine = refine_by(&base, fp)?;
    let mut values: BTreeMap<VertexId, Rat> = BTreeMap::new();
    for v in fine.refined().vertex_ids() {
        let p = fine.refined().point(v);
        let a = lifting_value_at(f, complex, v, p)?;
        let b = lifting_value_at(fp, base.refined(), v, p)?;
        values.insert(v, a + eps * b);
    }
    PLLifting::new(fine, values)
}
