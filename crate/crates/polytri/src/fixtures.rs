//! The fixture corpus shared by the test suites and the command-line tool:
//! the worked examples (unit square, triangular prism and its twisted
//! boundary, the rank-two orthant morphism) and a family of small complexes
//! for exercising extension and genericity.

use crate::complex::{build_complex, IntegralStructure, PolyComplex, VertexId};
use crate::linalg::Point;
use crate::rat::{rat, ratio, Rat};
use std::collections::BTreeMap;

pub fn vertex_map(coords: &[Vec<Rat>]) -> BTreeMap<VertexId, Point> {
    coords.iter().cloned().enumerate().collect()
}

fn int_points(coords: &[&[i64]]) -> BTreeMap<VertexId, Point> {
    coords
        .iter()
        .enumerate()
        .map(|(i, c)| (i, c.iter().map(|&x| rat(x)).collect()))
        .collect()
}

/// The unit square with vertices a=(0,0), b=(1,0), c=(1,1), d=(0,1),
/// in cyclic order 0,1,2,3.
pub fn unit_square() -> PolyComplex {
    build_complex(
        int_points(&[&[0, 0], &[1, 0], &[1, 1], &[0, 1]]),
        &[vec![0, 1, 2, 3]],
        IntegralStructure::standard(2),
    )
    .expect("square fixture")
}

/// A segment [0, 2] on the line.
pub fn segment() -> PolyComplex {
    build_complex(
        int_points(&[&[0], &[2]]),
        &[vec![0, 1]],
        IntegralStructure::standard(1),
    )
    .expect("segment fixture")
}

/// The standard triangle in the plane.
pub fn triangle() -> PolyComplex {
    build_complex(
        int_points(&[&[0, 0], &[1, 0], &[0, 1]]),
        &[vec![0, 1, 2]],
        IntegralStructure::standard(2),
    )
    .expect("triangle fixture")
}

/// The triangular prism with the six vertices
/// f00=(0,0,0), f01=(1,0,0), f02=(0,1,0), f10=(0,0,1), f11=(1,0,1),
/// f12=(0,1,1), indexed 0..6 in that order.
pub fn prism() -> PolyComplex {
    build_complex(
        int_points(&[
            &[0, 0, 0],
            &[1, 0, 0],
            &[0, 1, 0],
            &[0, 0, 1],
            &[1, 0, 1],
            &[0, 1, 1],
        ]),
        &[vec![0, 1, 2, 3, 4, 5]],
        IntegralStructure::standard(3),
    )
    .expect("prism fixture")
}

/// The twisted subdivision of the prism boundary: each square face is cut by
/// one of the new edges f00-f11, f01-f12, f02-f10. Not induced by any lifting.
pub fn twisted_prism_boundary() -> PolyComplex {
    build_complex(
        int_points(&[
            &[0, 0, 0],
            &[1, 0, 0],
            &[0, 1, 0],
            &[0, 0, 1],
            &[1, 0, 1],
            &[0, 1, 1],
        ]),
        &[
            vec![0, 1, 2], // bottom triangle
            vec![3, 4, 5], // top triangle
            // square f00 f01 f11 f10 cut by f00-f11
            vec![0, 1, 4],
            vec![0, 4, 3],
            // square f01 f02 f12 f11 cut by f01-f12
            vec![1, 2, 5],
            vec![1, 5, 4],
            // square f02 f00 f10 f12 cut by f02-f10
            vec![2, 0, 3],
            vec![2, 3, 5],
        ],
        IntegralStructure::standard(3),
    )
    .expect("twisted boundary fixture")
}

/// The coherent "staircase" subdivision of the prism boundary: square faces
/// cut by f00-f11, f01-f12, f00-f12. This one is induced by vertex heights
/// [`staircase_heights`].
pub fn staircase_prism_boundary() -> PolyComplex {
    build_complex(
        int_points(&[
            &[0, 0, 0],
            &[1, 0, 0],
            &[0, 1, 0],
            &[0, 0, 1],
            &[1, 0, 1],
            &[0, 1, 1],
        ]),
        &[
            vec![0, 1, 2],
            vec![3, 4, 5],
            vec![0, 1, 4],
            vec![0, 4, 3],
            vec![1, 2, 5],
            vec![1, 5, 4],
            vec![0, 2, 5],
            vec![0, 5, 3],
        ],
        IntegralStructure::standard(3),
    )
    .expect("staircase boundary fixture")
}

/// Vertex heights on the prism inducing [`staircase_prism_boundary`] on the
/// boundary (checked in the tests against the brute-force oracle).
pub fn staircase_heights() -> BTreeMap<VertexId, Rat> {
    [(0, rat(6)), (1, rat(1)), (2, rat(0)), (3, rat(0)), (4, rat(1)), (5, rat(6))]
        .into_iter()
        .collect()
}

/// The unit cube, vertices indexed by binary order of (x,y,z).
pub fn cube() -> PolyComplex {
    let mut coords = Vec::new();
    for x in 0..2i64 {
        for y in 0..2i64 {
            for z in 0..2i64 {
                coords.push(vec![rat(x), rat(y), rat(z)]);
            }
        }
    }
    build_complex(
        vertex_map(&coords),
        &[(0..8).collect()],
        IntegralStructure::standard(3),
    )
    .expect("cube fixture")
}

/// Two unit squares glued along an edge.
pub fn glued_squares() -> PolyComplex {
    build_complex(
        int_points(&[&[0, 0], &[1, 0], &[1, 1], &[0, 1], &[2, 0], &[2, 1]]),
        &[vec![0, 1, 2, 3], vec![1, 4, 5, 2]],
        IntegralStructure::standard(2),
    )
    .expect("glued squares fixture")
}

/// Two triangular prisms glued along a square face.
pub fn glued_prisms() -> PolyComplex {
    build_complex(
        int_points(&[
            &[0, 0, 0],
            &[1, 0, 0],
            &[0, 1, 0],
            &[0, 0, 1],
            &[1, 0, 1],
            &[0, 1, 1],
            &[1, 1, 0],
            &[1, 1, 1],
        ]),
        &[vec![0, 1, 2, 3, 4, 5], vec![1, 2, 6, 4, 5, 7]],
        IntegralStructure::standard(3),
    )
    .expect("glued prisms fixture")
}

/// A convex polygon with `k` vertices on integer-friendly rational points.
pub fn polygon(k: usize) -> PolyComplex {
    assert!(k >= 3);
    // Points on the parabola-like convex position (t, t^2) bent around: use
    // vertices of a convex fan over rational slopes.
    let coords: Vec<Vec<Rat>> = match k {
        3 => vec![vec![rat(0), rat(0)], vec![rat(2), rat(0)], vec![rat(1), rat(2)]],
        4 => vec![
            vec![rat(0), rat(0)],
            vec![rat(2), rat(0)],
            vec![rat(2), rat(2)],
            vec![rat(0), rat(2)],
        ],
        5 => vec![
            vec![rat(0), rat(0)],
            vec![rat(2), rat(0)],
            vec![rat(3), rat(2)],
            vec![rat(1), rat(3)],
            vec![rat(-1), rat(2)],
        ],
        6 => vec![
            vec![rat(0), rat(0)],
            vec![rat(2), rat(0)],
            vec![rat(3), rat(1)],
            vec![rat(2), rat(2)],
            vec![rat(0), rat(2)],
            vec![rat(-1), rat(1)],
        ],
        _ => panic!("polygon fixture supports 3..=6 vertices"),
    };
    build_complex(
        vertex_map(&coords),
        &[(0..k).collect()],
        IntegralStructure::standard(2),
    )
    .expect("polygon fixture")
}

/// A polygon embedded at height 1 in one more ambient dimension, as produced
/// by slicing the cone over it. Exercises cells below ambient dimension.
pub fn sliced_polygon(k: usize) -> PolyComplex {
    let flat = polygon(k);
    let coords: Vec<Vec<Rat>> = flat
        .vertex_ids()
        .iter()
        .map(|v| {
            let mut p = flat.point(*v).clone();
            p.push(rat(1));
            p
        })
        .collect();
    build_complex(
        vertex_map(&coords),
        &[(0..k).collect()],
        IntegralStructure::standard(3),
    )
    .expect("sliced polygon fixture")
}

/// Midpoint of the segment between two vertices of a complex.
pub fn midpoint(complex: &PolyComplex, a: VertexId, b: VertexId) -> Point {
    complex
        .point(a)
        .iter()
        .zip(complex.point(b))
        .map(|(x, y)| (x + y) * ratio(1, 2))
        .collect()
}

use crate::complex::{Cell, Subdivision};
use crate::conical::{cone_over, ConicalComplex, ConicalSubdivision, SlicingFunction};
use crate::lifting::{self, Lifting, VerticialLifting};
use crate::triangulation::{generic_simplicial_lifting, LiftingStrategy};
use num_traits::Zero;

/// An extension scenario: a complex, a subcomplex, a regular simplicial
/// subdivision of the subcomplex, and a lifting inducing it.
pub struct ExtensionFixture {
    pub name: &'static str,
    pub complex: PolyComplex,
    pub subcomplex: PolyComplex,
    pub boundary: Subdivision,
    pub lifting: Lifting,
}

fn trivial_boundary(name: &'static str, complex: PolyComplex, sub: PolyComplex) -> ExtensionFixture {
    let boundary = Subdivision::trivial(&sub);
    let lifting = Lifting::Verticial(VerticialLifting::zero(&sub));
    ExtensionFixture { name, complex, subcomplex: sub, boundary, lifting }
}

/// Boundary data obtained by inserting the midpoint of the edge `{a, b}` of
/// the subcomplex, lifted to a tent of height one.
fn midpoint_tent(
    name: &'static str,
    complex: PolyComplex,
    sub: PolyComplex,
    a: VertexId,
    b: VertexId,
) -> ExtensionFixture {
    let mid = midpoint(&sub, a, b);
    let fresh = sub.vertex_ids().iter().max().unwrap() + complex.vertex_ids().len() + 100;
    let zeros: BTreeMap<VertexId, Rat> = sub
        .vertex_ids()
        .into_iter()
        .map(|v| (v, Rat::zero()))
        .collect();
    let pl = lifting::minimal_extension(&sub, &zeros, &[(fresh, mid, rat(1))])
        .expect("midpoint tents are attainable");
    let boundary = pl.linearity().clone();
    ExtensionFixture {
        name,
        complex,
        subcomplex: sub,
        boundary,
        lifting: pl.as_lifting(),
    }
}

/// Boundary data from a deterministic pulling triangulation of the
/// subcomplex (in the given vertex order).
fn pulled_boundary(
    name: &'static str,
    complex: PolyComplex,
    sub: PolyComplex,
    order: Vec<VertexId>,
) -> ExtensionFixture {
    let (f, boundary) = generic_simplicial_lifting(&sub, &LiftingStrategy::Pulling { order })
        .expect("pulling triangulates every complex");
    ExtensionFixture {
        name,
        complex,
        subcomplex: sub,
        boundary,
        lifting: Lifting::Verticial(f),
    }
}

/// Verticial boundary data on a subcomplex.
fn verticial_boundary(
    name: &'static str,
    complex: PolyComplex,
    sub: PolyComplex,
    values: &[(VertexId, i64)],
) -> ExtensionFixture {
    let f = Lifting::verticial(values.iter().map(|&(v, x)| (v, rat(x))).collect());
    let boundary =
        lifting::induced_subdivision(&sub, &f).expect("fixture liftings are valid");
    ExtensionFixture { name, complex, subcomplex: sub, boundary, lifting: f }
}

/// The extension fixture corpus: each entry has simplicial boundary data
/// induced by its lifting (asserted by construction).
pub fn extension_fixtures() -> Vec<ExtensionFixture> {
    let mut out: Vec<ExtensionFixture> = Vec::new();

    let square = unit_square();
    out.push(trivial_boundary(
        "square-boundary-trivial",
        square.clone(),
        square.boundary().unwrap(),
    ));
    out.push(midpoint_tent(
        "square-boundary-midpoint",
        square.clone(),
        square.boundary().unwrap(),
        0,
        1,
    ));
    out.push(trivial_boundary(
        "square-one-edge",
        square.clone(),
        square
            .subcomplex_from_cells(&[Cell::new(vec![0, 1], 1)])
            .unwrap(),
    ));
    out.push(trivial_boundary(
        "square-opposite-edges",
        square.clone(),
        square
            .subcomplex_from_cells(&[Cell::new(vec![0, 1], 1), Cell::new(vec![2, 3], 1)])
            .unwrap(),
    ));
    out.push(midpoint_tent(
        "square-one-edge-midpoint",
        square.clone(),
        square
            .subcomplex_from_cells(&[Cell::new(vec![0, 1], 1)])
            .unwrap(),
        0,
        1,
    ));

    let tri = triangle();
    out.push(trivial_boundary(
        "triangle-boundary-trivial",
        tri.clone(),
        tri.boundary().unwrap(),
    ));
    out.push(midpoint_tent(
        "triangle-edge-midpoint",
        tri.clone(),
        tri.subcomplex_from_cells(&[Cell::new(vec![0, 1], 1)]).unwrap(),
        0,
        1,
    ));

    let prism = prism();
    {
        let boundary_complex = prism.boundary().unwrap();
        let stairs = staircase_prism_boundary();
        let sub = crate::complex::is_subdivision(&stairs, &boundary_complex)
            .expect("the staircase subdivides the prism boundary");
        out.push(ExtensionFixture {
            name: "prism-staircase-boundary",
            complex: prism.clone(),
            subcomplex: boundary_complex,
            boundary: sub,
            lifting: Lifting::verticial(staircase_heights()),
        });
    }
    out.push(pulled_boundary(
        "prism-pulled-boundary",
        prism.clone(),
        prism.boundary().unwrap(),
        vec![0, 1, 2, 3, 4, 5],
    ));
    out.push(verticial_boundary(
        "prism-one-face-diagonal",
        prism.clone(),
        prism
            .subcomplex_from_cells(&[Cell::new(vec![0, 1, 3, 4], 2)])
            .unwrap(),
        &[(0, 1), (1, 0), (3, 0), (4, 1)],
    ));
    out.push(trivial_boundary(
        "prism-two-triangles",
        prism.clone(),
        prism
            .subcomplex_from_cells(&[Cell::new(vec![0, 1, 2], 2), Cell::new(vec![3, 4, 5], 2)])
            .unwrap(),
    ));

    let cube = cube();
    out.push(pulled_boundary(
        "cube-pulled-boundary",
        cube.clone(),
        cube.boundary().unwrap(),
        (0..8).collect(),
    ));
    out.push(pulled_boundary(
        "cube-pulled-boundary-reversed",
        cube.clone(),
        cube.boundary().unwrap(),
        (0..8).rev().collect(),
    ));
    out.push(verticial_boundary(
        "cube-one-face-diagonal",
        cube.clone(),
        // The z = 0 face of the cube: vertices 0, 2, 4, 6.
        cube.subcomplex_from_cells(&[Cell::new(vec![0, 2, 4, 6], 2)])
            .unwrap(),
        &[(0, 1), (2, 0), (4, 0), (6, 1)],
    ));

    let glued = glued_squares();
    out.push(trivial_boundary(
        "glued-squares-boundary",
        glued.clone(),
        glued.boundary().unwrap(),
    ));
    out.push(midpoint_tent(
        "glued-squares-boundary-midpoint",
        glued.clone(),
        glued.boundary().unwrap(),
        0,
        1,
    ));

    let gp = glued_prisms();
    out.push(pulled_boundary(
        "glued-prisms-pulled-boundary",
        gp.clone(),
        gp.boundary().unwrap(),
        (0..8).collect(),
    ));
    out.push(verticial_boundary(
        "glued-prisms-shared-face",
        gp.clone(),
        gp.subcomplex_from_cells(&[Cell::new(vec![1, 2, 4, 5], 2)])
            .unwrap(),
        &[(1, 1), (2, 0), (4, 0), (5, 1)],
    ));

    out.push(trivial_boundary(
        "pentagon-sliced-boundary",
        sliced_polygon(5),
        sliced_polygon(5).boundary().unwrap(),
    ));
    out.push(midpoint_tent(
        "pentagon-sliced-midpoint",
        sliced_polygon(5),
        sliced_polygon(5).boundary().unwrap(),
        0,
        1,
    ));
    out.push(trivial_boundary(
        "hexagon-sliced-boundary",
        sliced_polygon(6),
        sliced_polygon(6).boundary().unwrap(),
    ));
    out.push(trivial_boundary(
        "pentagon-boundary",
        polygon(5),
        polygon(5).boundary().unwrap(),
    ));
    out.push(midpoint_tent(
        "hexagon-edge-midpoint",
        polygon(6),
        polygon(6)
            .subcomplex_from_cells(&[Cell::new(vec![0, 1], 1)])
            .unwrap(),
        0,
        1,
    ));

    let seg = segment();
    out.push(verticial_boundary(
        "segment-endpoints",
        seg.clone(),
        seg.boundary().unwrap(),
        &[(0, 3), (1, 5)],
    ));
    out
}

/// A conical extension scenario built by coning a compact one.
pub struct ConicalFixture {
    pub name: &'static str,
    pub complex: ConicalComplex,
    pub slicing: SlicingFunction,
    pub subcomplex: ConicalComplex,
    pub boundary: ConicalSubdivision,
    pub values: BTreeMap<VertexId, Rat>,
}

/// Transport of a compact subdivision through the cone construction.
pub fn cone_over_subdivision(sub: &Subdivision) -> ConicalSubdivision {
    let (parent, _) = cone_over(sub.parent());
    let (refined, _) = cone_over(sub.refined());
    let carrier: BTreeMap<Cell, Cell> = refined
        .cones()
        .map(|c| {
            if c.verts().is_empty() {
                return (c.clone(), Cell::new(vec![], 0));
            }
            let compact = Cell::new(c.verts().to_vec(), c.dim() - 1);
            let target = sub.carrier_of(&compact);
            (
                c.clone(),
                Cell::new(target.verts().to_vec(), target.dim() + 1),
            )
        })
        .collect();
    ConicalSubdivision::new_unchecked(parent, refined, carrier)
}

/// Conical fixtures: cones over the compact extension corpus. The boundary
/// lifting transports verticial values v to homogeneous ray values v * h.
pub fn conical_fixtures() -> Vec<ConicalFixture> {
    let mut out = Vec::new();
    for fx in extension_fixtures() {
        // Piecewise boundary liftings transport the same way (values on the
        // refinement's rays).
        let (complex, slicing) = cone_over(&fx.complex);
        let (subcomplex, _) = cone_over(&fx.subcomplex);
        let boundary = cone_over_subdivision(&fx.boundary);
        let values: BTreeMap<VertexId, Rat> = boundary
            .refined()
            .ray_ids()
            .into_iter()
            .map(|r| {
                let v = fx
                    .lifting
                    .vertex_value(r)
                    .expect("boundary lifting has a value on each refined vertex")
                    .clone();
                (r, v)
            })
            .collect();
        out.push(ConicalFixture {
            name: fx.name,
            complex,
            slicing,
            subcomplex,
            boundary,
            values,
        });
    }
    out
}

/// Complexes used for genericity sampling.
pub fn genericity_fixtures() -> Vec<(&'static str, PolyComplex)> {
    vec![
        ("square", unit_square()),
        ("prism", prism()),
        ("cube", cube()),
        ("glued-squares", glued_squares()),
    ]
}

/// Simplicial induced subdivisions for stability sampling: a complex plus a
/// lifting whose induced subdivision is simplicial.
pub fn stability_fixtures() -> Vec<(&'static str, PolyComplex, VerticialLifting)> {
    let square_vals: BTreeMap<VertexId, Rat> =
        [(0, rat(-1)), (1, rat(1)), (2, rat(-1)), (3, rat(1))].into();
    let mut out = vec![
        ("square-diagonal", unit_square(), VerticialLifting::new(square_vals)),
        ("prism-staircase", prism(), VerticialLifting::new(staircase_heights())),
    ];
    for (name, complex) in [("cube", cube()), ("glued-squares", glued_squares())] {
        let order = complex.vertex_ids();
        let (f, _) = generic_simplicial_lifting(&complex, &LiftingStrategy::Pulling { order })
            .expect("pulling triangulates");
        out.push((name, complex, f));
    }
    out
}

/// Complexes with at most eight vertices, for oracle cross-checks.
pub fn small_fixtures() -> Vec<(&'static str, PolyComplex)> {
    vec![
        ("segment", segment()),
        ("triangle", triangle()),
        ("square", unit_square()),
        ("pentagon", polygon(5)),
        ("hexagon", polygon(6)),
        ("glued-squares", glued_squares()),
        ("prism", prism()),
        ("cube", cube()),
        ("sliced-pentagon", sliced_polygon(5)),
    ]
}
