//! Shared helpers for the integration suites: an independent brute-force
//! oracle for induced subdivisions (linear algebra only, no hull engine) and
//! small utilities.

use num_traits::Zero;
use polytri::complex::{Cell, PolyComplex, VertexId};
use polytri::linalg::{vec_sub, Mat, Point};
use polytri::rat::Rat;
use std::collections::{BTreeMap, BTreeSet};

/// The contact sets of the subdivision induced by vertex heights, computed
/// by brute force: every subset of each maximal cell's vertex set is tested
/// directly against the convex-down inequality (affine consistency plus
/// strictly-above at the other vertices). Independent of the hull engine.
pub fn oracle_induced_pieces(
    complex: &PolyComplex,
    values: &BTreeMap<VertexId, Rat>,
) -> BTreeSet<Vec<VertexId>> {
    let mut pieces = BTreeSet::new();
    for sigma in complex.maximal_cells() {
        let pool = sigma.verts().to_vec();
        let d = sigma.dim();
        for mask in 1u32..(1 << pool.len()) {
            let subset: Vec<VertexId> = pool
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, v)| *v)
                .collect();
            if subset.len() < d + 1 {
                continue;
            }
            // The subset must span the cell's affine hull.
            let p0 = complex.point(subset[0]).clone();
            let rows: Vec<Point> = subset[1..]
                .iter()
                .map(|v| vec_sub(complex.point(*v), &p0))
                .collect();
            if Mat::from_rows(rows).rank() != d {
                continue;
            }
            // Affinely consistent values on the subset.
            let pts: Vec<(Point, Rat)> = subset
                .iter()
                .map(|v| (complex.point(*v).clone(), values[v].clone()))
                .collect();
            let Some((coeffs, constant)) = polytri::linalg::affine_fn_through(&pts) else {
                continue;
            };
            let eval = |p: &Point| -> Rat {
                let mut acc = constant.clone();
                for (c, x) in coeffs.iter().zip(p) {
                    acc += c * x;
                }
                acc
            };
            // Strictly above every other vertex of the cell.
            let ok = pool
                .iter()
                .filter(|v| !subset.contains(v))
                .all(|v| eval(complex.point(*v)) > values[v]);
            if ok {
                pieces.insert(subset);
            }
        }
    }
    pieces
}

/// Contact sets of the implementation's induced subdivision: per piece, the
/// vertices of its carrier cell whose heights the piece's affine function
/// attains.
pub fn implementation_pieces(
    complex: &PolyComplex,
    values: &BTreeMap<VertexId, Rat>,
    sub: &polytri::Subdivision,
) -> BTreeSet<Vec<VertexId>> {
    let mut out = BTreeSet::new();
    for sigma in complex.maximal_cells() {
        for piece in sub.refined().cells_of_dim(sigma.dim()) {
            if sub.carrier_of(piece) != sigma {
                continue;
            }
            let pts: Vec<(Point, Rat)> = piece
                .verts()
                .iter()
                .map(|v| (complex.point(*v).clone(), values[v].clone()))
                .collect();
            let (coeffs, constant) =
                polytri::linalg::affine_fn_through(&pts).expect("affine on a piece");
            let contact: Vec<VertexId> = sigma
                .verts()
                .iter()
                .copied()
                .filter(|v| {
                    let p = complex.point(*v);
                    let mut acc = constant.clone();
                    for (c, x) in coeffs.iter().zip(p) {
                        acc += c * x;
                    }
                    acc == values[v]
                })
                .collect();
            out.insert(contact);
        }
    }
    out
}

/// Asserts the vanishing of the degeneracy determinant on a non-simplicial
/// cell: the lifted vertices are affinely dependent, so the affine rank of
/// the lifted configuration equals the cell dimension plus one.
pub fn lifted_affine_rank(complex: &PolyComplex, cell: &Cell, values: &BTreeMap<VertexId, Rat>) -> usize {
    let rows: Vec<Vec<Rat>> = cell
        .verts()
        .iter()
        .map(|v| {
            let mut r = complex.point(*v).clone();
            r.push(values[v].clone());
            r.push(Rat::from_integer(1.into()));
            r
        })
        .collect();
    Mat::from_rows(rows).rank()
}

/// Euclidean norm-square of a rational vector.
pub fn norm_sq(v: &[Rat]) -> Rat {
    v.iter().fold(Rat::zero(), |acc, x| acc + x * x)
}
