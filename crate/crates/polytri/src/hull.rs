//! Exact convex hulls by incremental beneath-beyond, dimension-agnostic over
//! rationals. Degenerate input is handled by first charting the affine hull,
//! so the core always runs full-dimensional. On top of the hull sit the two
//! primitives everything else uses: complete face enumeration and the
//! upper-hull decomposition induced by a height function.

#![allow(clippy::needless_range_loop)] // in-place pivot kernels

use crate::linalg::{vec_dot, vec_is_zero, vec_sub, Mat, Point};
use crate::rat::Rat;
use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum HullError {
    #[error("hull input must contain at least one point")]
    DegenerateInput,
    #[error("duplicate point in hull input")]
    DuplicatePoint,
    #[error("point dimensions disagree")]
    DimensionMismatch,
}

/// An affine chart for the hull of a point set: a base point plus an
/// independent direction basis, with the linear solve matrix precomputed.
#[derive(Clone, Debug)]
pub struct AffineChart {
    pub base: Point,
    pub dirs: Vec<Point>,
    /// `dim x ambient`; `to_intrinsic(p) = map * (p - base)` for points in the
    /// affine hull.
    map: Mat,
    /// Ambient normals vanishing on the affine hull (its equations).
    pub span_normals: Vec<Point>,
}

impl AffineChart {
    pub fn from_points(points: &[Point]) -> Self {
        let base = points[0].clone();
        let ambient = base.len();
        let mut dirs: Vec<Point> = Vec::new();
        let mut echelon: Vec<Point> = Vec::new();
        for p in &points[1..] {
            let v = vec_sub(p, &base);
            let mut red = v.clone();
            for e in &echelon {
                let lead = e.iter().position(|x| !x.is_zero()).unwrap();
                if !red[lead].is_zero() {
                    let f = &red[lead] / &e[lead];
                    for j in 0..red.len() {
                        let t = &red[j] - &f * &e[j];
                        red[j] = t;
                    }
                }
            }
            if !vec_is_zero(&red) {
                dirs.push(v);
                echelon.push(red);
            }
        }
        Self::from_base_dirs(base, dirs, ambient)
    }

    fn from_base_dirs(base: Point, dirs: Vec<Point>, ambient: usize) -> Self {
        let d = dirs.len();
        if d == ambient {
            // Full-dimensional: use the identity chart.
            let dirs = (0..ambient)
                .map(|i| {
                    (0..ambient)
                        .map(|j| if i == j { Rat::one() } else { Rat::zero() })
                        .collect()
                })
                .collect();
            return AffineChart {
                base: vec![Rat::zero(); ambient],
                dirs,
                map: Mat::identity(ambient),
                span_normals: Vec::new(),
            };
        }
        let dmat = Mat::from_cols(&dirs);
        let map = if d == 0 {
            Mat::from_rows(Vec::new())
        } else {
            let gram = dmat.transpose().mul_mat(&dmat);
            gram.inverse()
                .expect("gram matrix of independent directions is nonsingular")
                .mul_mat(&dmat.transpose())
        };
        let span_normals = dmat.transpose().nullspace();
        AffineChart { base, dirs, map, span_normals }
    }

    pub fn dim(&self) -> usize {
        self.dirs.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.base.len()
    }

    /// Chart coordinates of `p`, or `None` when `p` is off the affine hull.
    pub fn to_intrinsic(&self, p: &Point) -> Option<Vec<Rat>> {
        let v = vec_sub(p, &self.base);
        for n in &self.span_normals {
            if !vec_dot(n, &v).is_zero() {
                return None;
            }
        }
        if self.dim() == 0 {
            return if vec_is_zero(&v) { Some(Vec::new()) } else { None };
        }
        Some(self.map.mul_vec(&v))
    }

    pub fn from_intrinsic(&self, x: &[Rat]) -> Point {
        let mut p = self.base.clone();
        for (xi, d) in x.iter().zip(&self.dirs) {
            for j in 0..p.len() {
                p[j] += xi * &d[j];
            }
        }
        p
    }

    /// The linear part of the chart as a `dim x ambient` matrix.
    pub fn linear_map(&self) -> &Mat {
        &self.map
    }
}

/// A facet of a hull with its supporting halfspace `normal . x <= offset`
/// in chart coordinates.
#[derive(Clone, Debug)]
pub struct Facet {
    pub vertices: Vec<usize>,
    pub normal: Vec<Rat>,
    pub offset: Rat,
}

#[derive(Clone, Debug)]
pub struct Hull {
    pub chart: AffineChart,
    pub dim: usize,
    pub points: Vec<Point>,
    pub intrinsic: Vec<Vec<Rat>>,
    /// Indices of the extreme points, sorted.
    pub vertices: Vec<usize>,
    /// Merged (true, possibly non-simplicial) facets. Empty iff `dim == 0`.
    pub facets: Vec<Facet>,
}

impl Hull {
    /// Membership test for an ambient point (boundary included).
    pub fn contains(&self, p: &Point) -> bool {
        let Some(x) = self.chart.to_intrinsic(p) else {
            return false;
        };
        if self.dim == 0 {
            return true; // on-chart already means equality for a single point
        }
        self.facets
            .iter()
            .all(|f| vec_dot(&f.normal, &x) <= f.offset)
    }

    /// True if `p` lies in the hull with every facet inequality strict.
    pub fn contains_in_relative_interior(&self, p: &Point) -> bool {
        let Some(x) = self.chart.to_intrinsic(p) else {
            return false;
        };
        if self.dim == 0 {
            return true;
        }
        self.facets
            .iter()
            .all(|f| vec_dot(&f.normal, &x) < f.offset)
    }

    /// A point in the relative interior (the vertex centroid).
    pub fn interior_point(&self) -> Point {
        let k = Rat::from_integer(BigInt::from(self.vertices.len() as i64));
        let mut acc = vec![Rat::zero(); self.points[0].len()];
        for &v in &self.vertices {
            for j in 0..acc.len() {
                acc[j] += &self.points[v][j];
            }
        }
        acc.into_iter().map(|x| x / &k).collect()
    }

    /// Ambient halfspace description `(coeffs, rhs)` of each facet, valid
    /// together with the chart's span equations.
    pub fn ambient_facet_halfspaces(&self) -> Vec<(Point, Rat)> {
        self.facets
            .iter()
            .map(|f| {
                let coeffs = self.chart.linear_map().transpose().mul_vec(&f.normal);
                let rhs = &f.offset + vec_dot(&coeffs, &self.chart.base);
                (coeffs, rhs)
            })
            .collect()
    }
}

/// Exact convex hull of distinct points.
pub fn convex_hull(points: &[Point]) -> Result<Hull, HullError> {
    if points.is_empty() {
        return Err(HullError::DegenerateInput);
    }
    let ambient = points[0].len();
    if points.iter().any(|p| p.len() != ambient) {
        return Err(HullError::DimensionMismatch);
    }
    {
        let set: std::collections::BTreeSet<&Point> = points.iter().collect();
        if set.len() != points.len() {
            return Err(HullError::DuplicatePoint);
        }
    }
    let chart = AffineChart::from_points(points);
    let d = chart.dim();
    let intrinsic: Vec<Vec<Rat>> = points
        .iter()
        .map(|p| chart.to_intrinsic(p).expect("point lies in its own affine hull"))
        .collect();

    if d == 0 {
        return Ok(Hull {
            chart,
            dim: 0,
            points: points.to_vec(),
            intrinsic,
            vertices: vec![0],
            facets: Vec::new(),
        });
    }
    if d == 1 {
        let (mut lo, mut hi) = (0usize, 0usize);
        for (i, x) in intrinsic.iter().enumerate() {
            if x[0] < intrinsic[lo][0] {
                lo = i;
            }
            if x[0] > intrinsic[hi][0] {
                hi = i;
            }
        }
        let facets = vec![
            Facet {
                vertices: vec![hi],
                normal: vec![Rat::one()],
                offset: intrinsic[hi][0].clone(),
            },
            Facet {
                vertices: vec![lo],
                normal: vec![-Rat::one()],
                offset: -&intrinsic[lo][0],
            },
        ];
        let mut vertices = vec![lo, hi];
        vertices.sort_unstable();
        return Ok(Hull {
            chart,
            dim: 1,
            points: points.to_vec(),
            intrinsic,
            vertices,
            facets,
        });
    }

    // Initial simplex: greedily pick d+1 affinely independent points.
    let mut simplex = vec![0usize];
    let mut echelon: Vec<Vec<Rat>> = Vec::new();
    for i in 1..points.len() {
        if simplex.len() == d + 1 {
            break;
        }
        let v = vec_sub(&intrinsic[i], &intrinsic[simplex[0]]);
        let mut red = v.clone();
        for e in &echelon {
            let lead = e.iter().position(|x| !x.is_zero()).unwrap();
            if !red[lead].is_zero() {
                let f = &red[lead] / &e[lead];
                for j in 0..red.len() {
                    let t = &red[j] - &f * &e[j];
                    red[j] = t;
                }
            }
        }
        if !vec_is_zero(&red) {
            simplex.push(i);
            echelon.push(red);
        }
    }
    debug_assert_eq!(simplex.len(), d + 1);
    let centroid: Vec<Rat> = {
        let k = Rat::from_integer(BigInt::from((d + 1) as i64));
        (0..d)
            .map(|j| {
                simplex
                    .iter()
                    .fold(Rat::zero(), |acc, &i| acc + &intrinsic[i][j])
                    / &k
            })
            .collect()
    };

    let mut facets: Vec<SimplicialFacet> = simplex
        .iter()
        .map(|&skip| {
            let verts: Vec<usize> = simplex.iter().copied().filter(|&v| v != skip).collect();
            SimplicialFacet::through(&verts, &intrinsic, &centroid)
        })
        .collect();

    let in_simplex: std::collections::BTreeSet<usize> = simplex.iter().copied().collect();
    for p in (0..points.len()).filter(|i| !in_simplex.contains(i)) {
        let visible: Vec<usize> = (0..facets.len())
            .filter(|&f| facets[f].sees(&intrinsic[p]))
            .collect();
        if visible.is_empty() {
            continue; // inside or on the boundary
        }
        let visible_set: std::collections::BTreeSet<usize> = visible.iter().copied().collect();
        // Ridge -> incident facets.
        let mut ridges: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (fi, f) in facets.iter().enumerate() {
            for skip in 0..f.verts.len() {
                let mut r = f.verts.clone();
                r.remove(skip);
                ridges.entry(r).or_default().push(fi);
            }
        }
        let mut new_facets: Vec<SimplicialFacet> = Vec::new();
        for (ridge, inc) in &ridges {
            debug_assert_eq!(inc.len(), 2, "hull boundary must be closed");
            let vis_count = inc.iter().filter(|f| visible_set.contains(f)).count();
            if vis_count == 1 {
                let mut verts = ridge.clone();
                verts.push(p);
                verts.sort_unstable();
                new_facets.push(SimplicialFacet::through(&verts, &intrinsic, &centroid));
            }
        }
        facets = facets
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !visible_set.contains(i))
            .map(|(_, f)| f)
            .chain(new_facets)
            .collect();
    }

    // Candidate vertices, pruned to true extreme points: a point is a vertex
    // iff its tight facet normals span the full dimension.
    let candidates: std::collections::BTreeSet<usize> =
        facets.iter().flat_map(|f| f.verts.iter().copied()).collect();
    let mut vertices: Vec<usize> = Vec::new();
    for &v in &candidates {
        let tight: Vec<Vec<Rat>> = facets
            .iter()
            .filter(|f| vec_dot(&f.normal, &intrinsic[v]) == f.offset)
            .map(|f| f.normal.clone())
            .collect();
        if Mat::from_rows(tight).rank() == d {
            vertices.push(v);
        }
    }
    vertices.sort_unstable();

    // Merge coplanar simplicial facets into true facets.
    let mut groups: BTreeMap<(Vec<BigInt>, BigInt), (Vec<Rat>, Rat)> = BTreeMap::new();
    for f in &facets {
        let key = canonical_halfspace(&f.normal, &f.offset);
        groups.entry(key).or_insert((f.normal.clone(), f.offset.clone()));
    }
    let merged: Vec<Facet> = groups
        .into_values()
        .map(|(normal, offset)| {
            let verts: Vec<usize> = vertices
                .iter()
                .copied()
                .filter(|&v| vec_dot(&normal, &intrinsic[v]) == offset)
                .collect();
            Facet { vertices: verts, normal, offset }
        })
        .collect();

    Ok(Hull {
        chart,
        dim: d,
        points: points.to_vec(),
        intrinsic,
        vertices,
        facets: merged,
    })
}

struct SimplicialFacet {
    verts: Vec<usize>,
    normal: Vec<Rat>,
    offset: Rat,
}

impl SimplicialFacet {
    fn through(verts: &[usize], intrinsic: &[Vec<Rat>], interior: &[Rat]) -> Self {
        let d = intrinsic[verts[0]].len();
        debug_assert_eq!(verts.len(), d);
        let rows: Vec<Vec<Rat>> = verts[1..]
            .iter()
            .map(|&v| vec_sub(&intrinsic[v], &intrinsic[verts[0]]))
            .collect();
        let ns = Mat::from_rows(rows).nullspace();
        debug_assert_eq!(ns.len(), 1, "facet points must span a hyperplane");
        let mut normal = ns.into_iter().next().unwrap();
        let mut offset = vec_dot(&normal, &intrinsic[verts[0]]);
        let side = vec_dot(&normal, interior);
        debug_assert!(side != offset, "interior reference on a facet hyperplane");
        if side > offset {
            normal = normal.iter().map(|x| -x).collect();
            offset = -offset;
        }
        SimplicialFacet { verts: verts.to_vec(), normal, offset }
    }

    fn sees(&self, x: &[Rat]) -> bool {
        vec_dot(&self.normal, x) > self.offset
    }
}

fn canonical_halfspace(normal: &[Rat], offset: &Rat) -> (Vec<BigInt>, BigInt) {
    let mut all: Vec<Rat> = normal.to_vec();
    all.push(offset.clone());
    let ints = crate::linalg::primitive_integer_vector(&all);
    let off = ints.last().unwrap().clone();
    (ints[..ints.len() - 1].to_vec(), off)
}

/// All faces of the hull of `points`, as sorted index sets with their
/// dimension. Includes the polytope itself, excludes the empty face.
pub fn polytope_faces(points: &[Point]) -> Result<Vec<(Vec<usize>, usize)>, HullError> {
    let hull = convex_hull(points)?;
    let mut out: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    collect_faces(&hull, &mut out)?;
    Ok(out.into_iter().collect())
}

fn collect_faces(
    hull: &Hull,
    out: &mut BTreeMap<Vec<usize>, usize>,
) -> Result<(), HullError> {
    collect_faces_inner(&hull.points, &hull.vertices, hull.dim, out)
}

fn collect_faces_inner(
    points: &[Point],
    vertices: &[usize],
    dim: usize,
    out: &mut BTreeMap<Vec<usize>, usize>,
) -> Result<(), HullError> {
    let key: Vec<usize> = vertices.to_vec();
    if out.contains_key(&key) {
        return Ok(());
    }
    out.insert(key.clone(), dim);
    if vertices.len() == dim + 1 {
        // Simplex: faces are exactly the nonempty vertex subsets.
        for size in 1..=vertices.len() {
            for sub in vertices.iter().copied().combinations(size) {
                out.entry(sub).or_insert(size - 1);
            }
        }
        return Ok(());
    }
    if dim == 0 {
        return Ok(());
    }
    let pts: Vec<Point> = vertices.iter().map(|&v| points[v].clone()).collect();
    let hull = convex_hull(&pts)?;
    debug_assert_eq!(hull.dim, dim);
    for f in &hull.facets {
        let sub: Vec<usize> = f.vertices.iter().map(|&local| vertices[local]).collect();
        collect_faces_inner(points, &sub, dim - 1, out)?;
    }
    Ok(())
}

/// A triangulation of the hull into `dim`-simplices (point index lists), by
/// recursively coning the first vertex over the facets avoiding it.
pub fn hull_triangulation(points: &[Point]) -> Result<Vec<Vec<usize>>, HullError> {
    let hull = convex_hull(points)?;
    triangulate_inner(&hull.points, &hull.vertices, hull.dim)
}

fn triangulate_inner(
    points: &[Point],
    vertices: &[usize],
    dim: usize,
) -> Result<Vec<Vec<usize>>, HullError> {
    if vertices.len() == dim + 1 {
        return Ok(vec![vertices.to_vec()]);
    }
    let apex = vertices[0];
    let pts: Vec<Point> = vertices.iter().map(|&v| points[v].clone()).collect();
    let hull = convex_hull(&pts)?;
    let mut out = Vec::new();
    for f in &hull.facets {
        let face: Vec<usize> = f.vertices.iter().map(|&l| vertices[l]).collect();
        if face.contains(&apex) {
            continue;
        }
        for sub in triangulate_inner(points, &face, dim - 1)? {
            let mut s = sub;
            s.push(apex);
            s.sort_unstable();
            out.push(s);
        }
    }
    Ok(out)
}

/// `d`-dimensional volume of the hull of `points`, measured in the
/// coordinates of `chart` (which must contain the points in its affine hull).
/// Returns zero when the points span less than `chart.dim()`.
pub fn polytope_volume(points: &[Point], chart: &AffineChart) -> Result<Rat, HullError> {
    let d = chart.dim();
    if d == 0 {
        return Ok(Rat::one());
    }
    let hull = convex_hull(points)?;
    if hull.dim < d {
        return Ok(Rat::zero());
    }
    let simplices = triangulate_inner(&hull.points, &hull.vertices, hull.dim)?;
    let mut total = Rat::zero();
    let mut dfact = Rat::one();
    for i in 1..=d {
        dfact *= Rat::from_integer(BigInt::from(i as i64));
    }
    for s in simplices {
        let base = chart
            .to_intrinsic(&points[s[0]])
            .expect("volume points must lie in the chart");
        let rows: Vec<Vec<Rat>> = s[1..]
            .iter()
            .map(|&v| {
                let x = chart.to_intrinsic(&points[v]).expect("in chart");
                vec_sub(&x, &base)
            })
            .collect();
        total += Mat::from_rows(rows).det().abs();
    }
    Ok(total / dfact)
}

/// One linearity domain of an upper hull: the point indices on the facet and
/// the affine function (in ambient coordinates) the heights induce there.
#[derive(Clone, Debug)]
pub struct UpperCell {
    pub members: Vec<usize>,
    pub affine: AffineFn,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineFn {
    pub coeffs: Vec<Rat>,
    pub constant: Rat,
}

impl AffineFn {
    pub fn eval(&self, p: &Point) -> Rat {
        vec_dot(&self.coeffs, p) + &self.constant
    }
}

/// The decomposition of `conv(points)` induced by lifting each point to its
/// height and projecting the upper facets back down ("convex down": the
/// function sits above its chords, so the upper faces carry the structure).
pub fn upper_hull(points: &[Point], heights: &[Rat]) -> Result<Vec<UpperCell>, HullError> {
    if points.is_empty() {
        return Err(HullError::DegenerateInput);
    }
    assert_eq!(points.len(), heights.len());
    let base_chart = AffineChart::from_points(points);
    let db = base_chart.dim();
    let lifted: Vec<Point> = points
        .iter()
        .zip(heights)
        .map(|(p, h)| {
            let mut x = base_chart
                .to_intrinsic(p)
                .expect("points lie in their own affine hull");
            x.push(h.clone());
            x
        })
        .collect();
    let lifted_hull = convex_hull(&lifted)?;

    if lifted_hull.dim <= db {
        // Heights are affine over the points: a single domain, the whole hull.
        let base_hull = convex_hull(points)?;
        let rows: Vec<(Point, Rat)> = points
            .iter()
            .zip(heights)
            .map(|(p, h)| (p.clone(), h.clone()))
            .collect();
        let (coeffs, constant) = crate::linalg::affine_fn_through(&rows)
            .expect("degenerate lifted hull means affinely consistent heights");
        return Ok(vec![UpperCell {
            members: base_hull.vertices,
            affine: AffineFn { coeffs, constant },
        }]);
    }

    // Full-dimensional lifted hull (identity chart): a facet is upper iff its
    // outward normal has positive height component.
    let mut cells = Vec::new();
    for f in &lifted_hull.facets {
        let az = &f.normal[db];
        if !az.is_positive() {
            continue;
        }
        // normal . (x, z) = offset  =>  z = (offset - ax . x) / az
        let ax = &f.normal[..db];
        let m = base_chart.linear_map(); // db x ambient
        let pulled = m.transpose().mul_vec(ax);
        let coeffs: Vec<Rat> = pulled.iter().map(|c| -(c / az)).collect();
        let constant = (&f.offset + vec_dot(&pulled, &base_chart.base)) / az;
        cells.push(UpperCell {
            members: f.vertices.clone(),
            affine: AffineFn { coeffs, constant },
        });
    }
    debug_assert!(!cells.is_empty());
    Ok(cells)
}

/// Splits the hull of `points` by the ambient hyperplane `normal . x = offset`
/// into the two closed sides, returning the vertex sets of each side.
pub fn split_polytope(
    points: &[Point],
    normal: &Point,
    offset: &Rat,
) -> Result<(Vec<Point>, Vec<Point>), HullError> {
    let hull = convex_hull(points)?;
    let verts: Vec<Point> = hull.vertices.iter().map(|&v| points[v].clone()).collect();
    let mut lo: Vec<Point> = Vec::new();
    let mut hi: Vec<Point> = Vec::new();
    for v in &verts {
        let s = vec_dot(normal, v);
        if s <= *offset {
            lo.push(v.clone());
        }
        if s >= *offset {
            hi.push(v.clone());
        }
    }
    // Add edge crossings.
    let faces = polytope_faces(&verts)?;
    for (face, dim) in faces {
        if dim != 1 {
            continue;
        }
        let (a, b) = (&verts[face[0]], &verts[face[1]]);
        let (sa, sb) = (vec_dot(normal, a), vec_dot(normal, b));
        if (&sa < offset && &sb > offset) || (&sa > offset && &sb < offset) {
            let t = (offset - &sa) / (&sb - &sa);
            let x: Point = a
                .iter()
                .zip(b)
                .map(|(pa, pb)| pa + &t * &(pb - pa))
                .collect();
            lo.push(x.clone());
            hi.push(x);
        }
    }
    lo.sort();
    lo.dedup();
    hi.sort();
    hi.dedup();
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, ratio};

    fn pts(coords: &[&[i64]]) -> Vec<Point> {
        coords
            .iter()
            .map(|c| c.iter().map(|&x| rat(x)).collect())
            .collect()
    }

    #[test]
    fn square_hull() {
        let p = pts(&[&[0, 0], &[1, 0], &[1, 1], &[0, 1], &[0, 0]]);
        assert_eq!(convex_hull(&p).err(), Some(HullError::DuplicatePoint));
        let p = pts(&[&[0, 0], &[1, 0], &[1, 1], &[0, 1]]);
        let h = convex_hull(&p).unwrap();
        assert_eq!(h.dim, 2);
        assert_eq!(h.vertices, vec![0, 1, 2, 3]);
        assert_eq!(h.facets.len(), 4);
        assert!(h.contains(&vec![ratio(1, 2), ratio(1, 2)]));
        assert!(!h.contains(&vec![rat(2), rat(0)]));
    }

    #[test]
    fn interior_and_collinear_points_are_pruned() {
        let p = pts(&[&[0, 0], &[2, 0], &[0, 2], &[1, 0], &[1, 1]]);
        // (1,0) is on an edge, the rest of the candidates are corners.
        let h = convex_hull(&p).unwrap();
        assert_eq!(h.vertices, vec![0, 1, 2]);
        let p = pts(&[&[0, 0], &[1, 1], &[2, 2], &[3, 3]]);
        let h = convex_hull(&p).unwrap();
        assert_eq!(h.dim, 1);
        assert_eq!(h.vertices, vec![0, 3]);
    }

    #[test]
    fn cube_hull_counts() {
        let mut p = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                for z in 0..2 {
                    p.push(vec![rat(x), rat(y), rat(z)]);
                }
            }
        }
        let h = convex_hull(&p).unwrap();
        assert_eq!(h.dim, 3);
        assert_eq!(h.vertices.len(), 8);
        assert_eq!(h.facets.len(), 6);
        for f in &h.facets {
            assert_eq!(f.vertices.len(), 4);
        }
        let faces = polytope_faces(&p).unwrap();
        // 8 vertices + 12 edges + 6 squares + 1 solid
        assert_eq!(faces.len(), 27);
        assert_eq!(
            polytope_volume(&p, &AffineChart::from_points(&p)).unwrap(),
            rat(1)
        );
    }

    #[test]
    fn lower_dimensional_cell_in_higher_ambient() {
        // A triangle floating at height 1 in R^3.
        let p = pts(&[&[0, 0, 1], &[1, 0, 1], &[0, 1, 1]]);
        let h = convex_hull(&p).unwrap();
        assert_eq!(h.dim, 2);
        assert_eq!(h.vertices.len(), 3);
        assert_eq!(h.chart.span_normals.len(), 1);
        assert!(h.contains(&vec![ratio(1, 4), ratio(1, 4), rat(1)]));
        assert!(!h.contains(&vec![ratio(1, 4), ratio(1, 4), rat(0)]));
        let vol = polytope_volume(&p, &h.chart).unwrap();
        assert!(!vol.is_zero());
    }

    #[test]
    fn upper_hull_tent() {
        // Heights (0,1,0) on a segment: two pieces split at the middle.
        let p = pts(&[&[0], &[1], &[2]]);
        let cells = upper_hull(&p, &[rat(0), rat(1), rat(0)]).unwrap();
        assert_eq!(cells.len(), 2);
        let mut members: Vec<Vec<usize>> = cells.iter().map(|c| c.members.clone()).collect();
        members.sort();
        assert_eq!(members, vec![vec![0, 1], vec![1, 2]]);
    }

    #[test]
    fn upper_hull_square_diagonal() {
        // a,b,c,d cyclic with heights (-1,1,-1,1): the diagonal joins b and d.
        let p = pts(&[&[0, 0], &[1, 0], &[1, 1], &[0, 1]]);
        let cells = upper_hull(&p, &[rat(-1), rat(1), rat(-1), rat(1)]).unwrap();
        let mut members: Vec<Vec<usize>> = cells.iter().map(|c| c.members.clone()).collect();
        members.sort();
        assert_eq!(members, vec![vec![0, 1, 3], vec![1, 2, 3]]);
    }

    #[test]
    fn upper_hull_constant_heights_is_trivial() {
        let p = pts(&[&[0, 0], &[1, 0], &[1, 1], &[0, 1]]);
        let cells = upper_hull(&p, &[rat(5), rat(5), rat(5), rat(5)]).unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].members, vec![0, 1, 2, 3]);
        assert_eq!(cells[0].affine.eval(&vec![ratio(1, 3), ratio(1, 7)]), rat(5));
    }

    #[test]
    fn upper_hull_unattained_value_stays_below() {
        // Midpoint lifted below the chord: it is simply not a vertex of the
        // upper hull, and the single cell's function sits above it.
        let p = pts(&[&[0], &[1], &[2]]);
        let cells = upper_hull(&p, &[rat(0), rat(-1), rat(0)]).unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].members, vec![0, 2]);
        assert_eq!(cells[0].affine.eval(&vec![rat(1)]), rat(0));
    }

    #[test]
    fn upper_hull_pieces_tile_and_ignore_affine_shifts() {
        // Pieces of an upper hull tile the base hull: exact volume summation.
        let p = pts(&[&[0, 0], &[2, 0], &[2, 2], &[0, 2], &[1, 1]]);
        let heights = [rat(0), rat(3), rat(1), rat(2), rat(4)];
        let cells = upper_hull(&p, &heights).unwrap();
        let chart = AffineChart::from_points(&p);
        let total: Rat = cells
            .iter()
            .map(|c| {
                let pts: Vec<Point> = c.members.iter().map(|&i| p[i].clone()).collect();
                polytope_volume(&pts, &chart).unwrap()
            })
            .fold(Rat::zero(), |a, v| a + v);
        assert_eq!(total, polytope_volume(&p, &chart).unwrap());
        // Adding a global affine function leaves the decomposition unchanged.
        let shifted: Vec<Rat> = p
            .iter()
            .zip(&heights)
            .map(|(q, h)| h + rat(3) * &q[0] - rat(2) * &q[1] + rat(7))
            .collect();
        let cells2 = upper_hull(&p, &shifted).unwrap();
        let key = |cs: &[UpperCell]| {
            let mut m: Vec<Vec<usize>> = cs.iter().map(|c| c.members.clone()).collect();
            m.sort();
            m
        };
        assert_eq!(key(&cells), key(&cells2));
    }

    #[test]
    fn small_perturbations_only_refine() {
        // Flat heights on the square, then a tiny generic perturbation: each
        // new piece stays inside the single old piece.
        let p = pts(&[&[0, 0], &[1, 0], &[1, 1], &[0, 1]]);
        let flat = [rat(2), rat(2), rat(2), rat(2)];
        let old = upper_hull(&p, &flat).unwrap();
        assert_eq!(old.len(), 1);
        let eps = crate::rat::ratio(1, 1000);
        let perturbed: Vec<Rat> = (0..4).map(|i| &flat[i] + &eps * rat(i as i64 * i as i64)).collect();
        let new = upper_hull(&p, &perturbed).unwrap();
        assert!(new.len() >= old.len());
        let old_hull = convex_hull(&p).unwrap();
        for c in &new {
            for &m in &c.members {
                assert!(old_hull.contains(&p[m]));
            }
        }
    }

    #[test]
    fn split_square() {
        let p = pts(&[&[0, 0], &[2, 0], &[2, 2], &[0, 2]]);
        let (lo, hi) = split_polytope(&p, &vec![rat(1), rat(0)], &rat(1)).unwrap();
        let chart = AffineChart::from_points(&p);
        assert_eq!(polytope_volume(&lo, &chart).unwrap(), rat(2));
        assert_eq!(polytope_volume(&hi, &chart).unwrap(), rat(2));
    }
}
