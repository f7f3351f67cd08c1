//! Exact-arithmetic toolkit for compact and conical polyhedral complexes:
//! lifting-function-induced subdivisions, regularity certificates, extension
//! of triangulations from a subcomplex without new vertices, and the
//! combinatorial nearly-semistable verification pipeline built on top.
//!
//! All geometry runs over arbitrary-precision rationals. There is no floating
//! point in any predicate; decimals appear only when exporting plots.

// Error enums deliberately carry witness data (cells, points, certificates),
// which makes the Err variants large.
#![allow(clippy::result_large_err)]

pub mod complex;
pub mod conical;
pub mod fixtures;
pub mod hull;
pub mod lifting;
pub mod linalg;
pub mod lp;
pub mod rat;
pub mod semistable;
pub mod triangulation;

pub use hull::{
    convex_hull, hull_triangulation, polytope_faces, polytope_volume, split_polytope,
    upper_hull, AffineChart, AffineFn, Hull, HullError, UpperCell,
};
pub use complex::{
    build_complex, is_subdivision, Cell, ComplexError, IntegralStructure, PolyComplex,
    Subdivision, VertexId,
};
pub use conical::{
    is_conical_subdivision,
    cone_over, extend_conical_triangulation, is_homogeneous_lifting, slice, ConicalComplex,
    ConicalError, ConicalSubdivision, Ray, RayId, SlicingFunction,
};
pub use lifting::{
    combine, explicit_epsilon, induced_subdivision, minimal_extension, refine_by, restrict,
    Lifting, LiftingError, PLLifting, VerticialLifting,
};
pub use linalg::Point;
pub use rat::Rat;
pub use semistable::{
    base_change, check_nearly_semistable, cone_index, preimage_skeleton,
    weak_to_nearly_semistable, BoundaryDatum, ConicalMorphism, MorphismMap, OrthantBase,
    SemistabilityReport, SemistableError, Verdict,
};
pub use triangulation::{
    enumerate_triangulations, extend_triangulation, generic_simplicial_lifting, is_regular,
    is_simplicial, stability_radius, ExtensionResult, LiftingStrategy, NonRegularityWitness,
    Regularity, RegularityCertificate, TriangulationError,
};
