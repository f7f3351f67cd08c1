//! Simplicial subdivisions: generic liftings (random and pulling), exact
//! regularity decision by rational LP with Farkas witnesses, extension of a
//! regular boundary triangulation to the whole complex without new vertices,
//! exhaustive enumeration of triangulations, and stability radii.

use crate::complex::{Cell, ComplexError, PolyComplex, Subdivision, VertexId};
use crate::hull::{self, Hull};
use crate::lifting::{
    self, induced_subdivision, Lifting, LiftingError, PLLifting, VerticialLifting,
};
use crate::linalg::{affine_coords, vec_sub, Mat, Point};
use crate::lp::{self, Constraint};
use crate::rat::Rat;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use std::collections::{BTreeMap, BTreeSet};

#[derive(thiserror::Error, Debug, Clone)]
pub enum TriangulationError {
    #[error("the supplied lifting does not induce the supplied subdivision")]
    InputNotInduced,
    #[error("the supplied subdivision is not simplicial")]
    InputNotSimplicial,
    #[error("restriction of the extension does not reproduce the boundary data")]
    RestrictionMismatch,
    #[error("complex too large for exhaustive enumeration (more than {0} vertices)")]
    TooLarge(usize),
    #[error("random strategy failed to find a simplicial lifting after {0} draws")]
    GenericityExhausted(usize),
    #[error(transparent)]
    Lifting(#[from] LiftingError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// Is every cell a simplex?
pub fn is_simplicial(complex: &PolyComplex) -> bool {
    complex.cells().all(Cell::is_simplex)
}

/// A verticial lifting inducing a subdivision, together with the minimal
/// strict fold slack of its defining inequalities.
#[derive(Clone, Debug)]
pub struct RegularityCertificate {
    pub lifting: VerticialLifting,
    pub margin: Rat,
}

impl RegularityCertificate {
    /// Soundness: the certificate's lifting induces exactly the certified
    /// subdivision. The lifting lives on the subdivision's vertex set, so it
    /// is verticial on the complex when there are no new vertices and a
    /// piecewise lifting over it otherwise.
    pub fn induces(
        &self,
        complex: &PolyComplex,
        subdivision: &Subdivision,
    ) -> Result<bool, LiftingError> {
        let dom: BTreeSet<VertexId> = self.lifting.values().keys().copied().collect();
        let verts: BTreeSet<VertexId> = complex.vertex_ids().into_iter().collect();
        let lifting = if dom == verts {
            Lifting::Verticial(self.lifting.clone())
        } else {
            Lifting::Piecewise(Box::new(PLLifting::new(
                subdivision.clone(),
                self.lifting.values().clone(),
            )?))
        };
        let direct = induced_subdivision(complex, &lifting)?;
        Ok(direct.geom_eq(subdivision))
    }
}

/// A fold constraint of the regularity system: the affine extension of the
/// lifting from `piece` must exceed the value at `vertex` by the margin.
#[derive(Clone, Debug)]
pub struct FoldConstraint {
    pub parent_cell: Cell,
    pub piece: Cell,
    pub vertex: VertexId,
    pub equality: bool,
}

/// Certified non-regularity: fold constraints whose conjunction is
/// rationally infeasible, with the Farkas multipliers proving it.
#[derive(Clone, Debug)]
pub struct NonRegularityWitness {
    pub constraints: Vec<FoldConstraint>,
    pub multipliers: Vec<Rat>,
}

impl NonRegularityWitness {
    /// Rebuilds the fold constraints as LP rows over the subdivision's
    /// vertex variables and checks the stored multipliers form an exact
    /// Farkas proof of their joint infeasibility.
    pub fn verify(&self, complex: &PolyComplex, subdivision: &Subdivision) -> bool {
        let refined = subdivision.refined();
        let var_of: BTreeMap<VertexId, usize> = refined
            .vertex_ids()
            .into_iter()
            .enumerate()
            .map(|(i, v)| (v, i))
            .collect();
        let nvars = var_of.len();
        let _ = complex;
        let mut rows: Vec<Constraint> = Vec::new();
        for fold in &self.constraints {
            let basis = affine_basis(refined, &fold.piece);
            let basis_pts: Vec<Point> =
                basis.iter().map(|v| refined.point(*v).clone()).collect();
            let Some(lam) = affine_coords(&basis_pts, refined.point(fold.vertex)) else {
                return false;
            };
            let mut coeffs = vec![Rat::zero(); nvars];
            for (l, b) in lam.iter().zip(&basis) {
                coeffs[var_of[b]] += l;
            }
            coeffs[var_of[&fold.vertex]] -= Rat::one();
            rows.push(if fold.equality {
                Constraint::eq(coeffs, Rat::zero())
            } else {
                Constraint::ge(coeffs, Rat::one())
            });
        }
        lp::verify_farkas(&rows, &self.multipliers)
    }
}

#[derive(Clone, Debug)]
pub enum Regularity {
    Regular(RegularityCertificate),
    NotRegular(NonRegularityWitness),
}

/// Decides whether the subdivision is induced by some verticial lifting on
/// its own vertex set, by exact LP feasibility with the fold margin pinned
/// to one (the constraints are positively homogeneous, so this is lossless).
pub fn is_regular(complex: &PolyComplex, subdivision: &Subdivision) -> Regularity {
    assert!(
        subdivision.parent() == complex,
        "subdivision must be over the given complex"
    );
    let refined = subdivision.refined();
    let var_of: BTreeMap<VertexId, usize> = refined
        .vertex_ids()
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();
    let nvars = var_of.len();
    let mut constraints: Vec<Constraint> = Vec::new();
    let mut folds: Vec<FoldConstraint> = Vec::new();
    for sigma in complex.maximal_cells() {
        let pool: Vec<VertexId> = refined
            .vertex_ids()
            .into_iter()
            .filter(|v| sigma.contains_ids(subdivision.carrier_of(&Cell::new(vec![*v], 0))))
            .collect();
        for piece in refined.cells_of_dim(sigma.dim()) {
            if subdivision.carrier_of(piece) != sigma {
                continue;
            }
            // Affine basis of the piece.
            let basis = affine_basis(refined, piece);
            let basis_pts: Vec<Point> =
                basis.iter().map(|v| refined.point(*v).clone()).collect();
            for &w in &pool {
                if basis.contains(&w) {
                    continue;
                }
                let lam = affine_coords(&basis_pts, refined.point(w))
                    .expect("pool vertices lie in the affine hull of the cell");
                let mut coeffs = vec![Rat::zero(); nvars];
                for (l, b) in lam.iter().zip(&basis) {
                    coeffs[var_of[b]] += l;
                }
                coeffs[var_of[&w]] -= Rat::one();
                if piece.has_vertex(w) {
                    constraints.push(Constraint::eq(coeffs, Rat::zero()));
                    folds.push(FoldConstraint {
                        parent_cell: sigma.clone(),
                        piece: piece.clone(),
                        vertex: w,
                        equality: true,
                    });
                } else {
                    constraints.push(Constraint::ge(coeffs, Rat::one()));
                    folds.push(FoldConstraint {
                        parent_cell: sigma.clone(),
                        piece: piece.clone(),
                        vertex: w,
                        equality: false,
                    });
                }
            }
        }
    }
    if constraints.is_empty() {
        // No folds to certify: the zero lifting works.
        return Regularity::Regular(RegularityCertificate {
            lifting: VerticialLifting::new(
                var_of.keys().map(|v| (*v, Rat::zero())).collect(),
            ),
            margin: Rat::one(),
        });
    }
    match lp::feasible_point(&constraints) {
        Ok(x) => {
            let values: BTreeMap<VertexId, Rat> = var_of
                .iter()
                .map(|(v, i)| (*v, x[*i].clone()))
                .collect();
            // Margin: the minimal strict fold slack at the solution.
            let margin = constraints
                .iter()
                .zip(&folds)
                .filter(|(_, f)| !f.equality)
                .map(|(c, _)| {
                    c.coeffs
                        .iter()
                        .zip(&x)
                        .fold(Rat::zero(), |acc, (a, xi)| acc + a * xi)
                })
                .min()
                .unwrap_or_else(Rat::one);
            debug_assert!(margin >= Rat::one());
            Regularity::Regular(RegularityCertificate {
                lifting: VerticialLifting::new(values),
                margin,
            })
        }
        Err(farkas) => {
            debug_assert!(lp::verify_farkas(&constraints, &farkas));
            let (constraints, multipliers): (Vec<FoldConstraint>, Vec<Rat>) = folds
                .into_iter()
                .zip(farkas)
                .filter(|(_, m)| !m.is_zero())
                .unzip();
            Regularity::NotRegular(NonRegularityWitness { constraints, multipliers })
        }
    }
}

fn affine_basis(complex: &PolyComplex, cell: &Cell) -> Vec<VertexId> {
    let mut basis: Vec<VertexId> = vec![cell.verts()[0]];
    let mut echelon: Vec<Point> = Vec::new();
    let p0 = complex.point(cell.verts()[0]).clone();
    for &v in &cell.verts()[1..] {
        if basis.len() == cell.dim() + 1 {
            break;
        }
        let d = vec_sub(complex.point(v), &p0);
        let mut red = d.clone();
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
        if !red.iter().all(Rat::is_zero) {
            basis.push(v);
            echelon.push(red);
        }
    }
    debug_assert_eq!(basis.len(), cell.dim() + 1);
    basis
}

/// Strategy for producing a verticial lifting with simplicial induced
/// subdivision.
#[derive(Clone, Debug)]
pub enum LiftingStrategy {
    /// Fresh rational samples with the given denominator bound until the
    /// induced subdivision is simplicial (retries capped at 64).
    Random { seed: u64, denominator_bound: u64 },
    /// Deterministic pulling: iterated refinement by one-vertex indicator
    /// liftings in the given order (must list every vertex).
    Pulling { order: Vec<VertexId> },
}

/// A verticial lifting whose induced subdivision is simplicial, plus that
/// subdivision.
pub fn generic_simplicial_lifting(
    complex: &PolyComplex,
    strategy: &LiftingStrategy,
) -> Result<(VerticialLifting, Subdivision), TriangulationError> {
    match strategy {
        LiftingStrategy::Random { seed, denominator_bound } => {
            let mut rng = rand::rngs::StdRng::seed_from_u64(*seed);
            let bound = (*denominator_bound).max(2);
            let cap = 64;
            for _ in 0..cap {
                let values: BTreeMap<VertexId, Rat> = complex
                    .vertex_ids()
                    .into_iter()
                    .map(|v| {
                        let num = rng.gen_range(0..bound) as i64;
                        (v, Rat::new(BigInt::from(num), BigInt::from(bound as i64)))
                    })
                    .collect();
                let f = VerticialLifting::new(values);
                let sub = induced_subdivision(complex, &Lifting::Verticial(f.clone()))?;
                if sub.is_simplicial() {
                    return Ok((f, sub));
                }
            }
            Err(TriangulationError::GenericityExhausted(cap))
        }
        LiftingStrategy::Pulling { order } => {
            let want: BTreeSet<VertexId> = complex.vertex_ids().into_iter().collect();
            let got: BTreeSet<VertexId> = order.iter().copied().collect();
            if want != got {
                return Err(TriangulationError::Lifting(LiftingError::DomainMismatch(
                    "pulling order must list every vertex exactly once".into(),
                )));
            }
            let mut acc = VerticialLifting::zero(complex);
            let mut current = Subdivision::trivial(complex);
            for &v in order {
                let indicator = VerticialLifting::indicator(complex, v);
                let eps = lifting::explicit_epsilon(
                    complex,
                    &Lifting::Verticial(acc.clone()),
                    &Lifting::Verticial(indicator.clone()),
                )?;
                current = lifting::refine_by(&current, &Lifting::Verticial(indicator.clone()))?;
                acc = acc.add_scaled(&indicator, &eps);
            }
            debug_assert!(
                induced_subdivision(complex, &Lifting::Verticial(acc.clone()))?
                    .geom_eq(&current)
            );
            if !current.is_simplicial() {
                return Err(TriangulationError::GenericityExhausted(0));
            }
            Ok((acc, current))
        }
    }
}

/// Everything the extension produces: the triangulation and the chain of
/// liftings certifying it (boundary shift, extension by zero, generic
/// refinement, explicit epsilon, and the single combined lifting).
#[derive(Clone, Debug)]
pub struct ExtensionResult {
    pub triangulation: Subdivision,
    pub chain: CertificateChain,
}

#[derive(Clone, Debug)]
pub struct CertificateChain {
    /// Constant added to the boundary lifting to make it strictly positive.
    pub shift: Rat,
    /// Minimal extension by zero of the shifted boundary values.
    pub extension: PLLifting,
    /// Generic verticial lifting on the extension's linearity subdivision.
    pub generic: VerticialLifting,
    /// Threshold below which extension + eps * generic induces the result.
    pub epsilon: Rat,
    /// The single exportable lifting extension + epsilon * generic.
    pub combined: PLLifting,
}

/// Extends a regular simplicial subdivision of a subcomplex to a regular
/// triangulation of the whole complex without new vertices: the vertex set
/// of the result is exactly the complex's vertices plus the boundary
/// subdivision's vertices.
pub fn extend_triangulation(
    complex: &PolyComplex,
    subcomplex: &PolyComplex,
    boundary: &Subdivision,
    boundary_lifting: &Lifting,
) -> Result<ExtensionResult, TriangulationError> {
    extend_triangulation_with_strategy(complex, subcomplex, boundary, boundary_lifting, None)
}

/// As [`extend_triangulation`], with the strategy for the generic step made
/// explicit (`None` means deterministic pulling in vertex-id order).
pub fn extend_triangulation_with_strategy(
    complex: &PolyComplex,
    subcomplex: &PolyComplex,
    boundary: &Subdivision,
    boundary_lifting: &Lifting,
    strategy: Option<&LiftingStrategy>,
) -> Result<ExtensionResult, TriangulationError> {
    if !subcomplex.is_subcomplex_of(complex) {
        return Err(TriangulationError::Complex(ComplexError::NotSubcomplex));
    }
    if boundary.parent() != subcomplex {
        return Err(TriangulationError::Lifting(LiftingError::DomainMismatch(
            "boundary subdivision must be over the given subcomplex".into(),
        )));
    }
    if !boundary.is_simplicial() {
        return Err(TriangulationError::InputNotSimplicial);
    }
    let induced = induced_subdivision(subcomplex, boundary_lifting)
        .map_err(|_| TriangulationError::InputNotInduced)?;
    if !induced.geom_eq(boundary) {
        return Err(TriangulationError::InputNotInduced);
    }

    // Shift the boundary values strictly positive, extend by zero to the
    // remaining vertices, and take the minimal convex-down extension.
    let boundary_values: BTreeMap<VertexId, Rat> = boundary
        .refined()
        .vertex_ids()
        .into_iter()
        .map(|v| {
            let x = boundary_lifting
                .vertex_value(v)
                .expect("boundary lifting has values on the boundary vertices")
                .clone();
            (v, x)
        })
        .collect();
    let min = boundary_values.values().min().cloned().unwrap_or_else(Rat::zero);
    let shift = if min >= Rat::one() { Rat::zero() } else { Rat::one() - &min };
    let mut values: BTreeMap<VertexId, Rat> = complex
        .vertex_ids()
        .into_iter()
        .map(|v| (v, Rat::zero()))
        .collect();
    let mut extra: Vec<(VertexId, Point, Rat)> = Vec::new();
    for (v, x) in &boundary_values {
        let shifted = x + &shift;
        if values.contains_key(v) {
            values.insert(*v, shifted);
        } else {
            extra.push((*v, boundary.refined().point(*v).clone(), shifted));
        }
    }
    let extension = lifting::minimal_extension(complex, &values, &extra)?;

    // The extension must restrict to the boundary data.
    let restricted = extension
        .linearity()
        .restrict_to(subcomplex)
        .map_err(|_| TriangulationError::RestrictionMismatch)?;
    if !restricted.geom_eq(boundary) {
        return Err(TriangulationError::RestrictionMismatch);
    }
    for (v, x) in &boundary_values {
        match extension.values().get(v) {
            Some(got) if *got == x + &shift => {}
            _ => return Err(TriangulationError::RestrictionMismatch),
        }
    }

    // Triangulate the linearity subdivision (deterministic pulling unless a
    // strategy is supplied), then combine into a single certificate lifting.
    let default_strategy = LiftingStrategy::Pulling {
        order: extension.linearity().refined().vertex_ids(),
    };
    let (generic, _) = generic_simplicial_lifting(
        extension.linearity().refined(),
        strategy.unwrap_or(&default_strategy),
    )?;
    let triangulation =
        lifting::refine_by(extension.linearity(), &Lifting::Verticial(generic.clone()))?;
    debug_assert!(triangulation.is_simplicial());
    let epsilon = lifting::explicit_epsilon(
        complex,
        &extension.as_lifting(),
        &Lifting::Verticial(generic.clone()),
    )?;
    let combined = lifting::combine(
        complex,
        &extension.as_lifting(),
        &epsilon,
        &Lifting::Verticial(generic.clone()),
    )?;
    // The final restriction must still be the boundary triangulation.
    let final_restricted = triangulation
        .restrict_to(subcomplex)
        .map_err(|_| TriangulationError::RestrictionMismatch)?;
    if !final_restricted.geom_eq(boundary) {
        return Err(TriangulationError::RestrictionMismatch);
    }
    Ok(ExtensionResult {
        triangulation,
        chain: CertificateChain { shift, extension, generic, epsilon, combined },
    })
}

/// All triangulations of the complex using exactly its vertex set, by
/// exhaustive search over maximal simplices with exact volume and proper
/// intersection checks. Guarded at 12 vertices.
pub fn enumerate_triangulations(
    complex: &PolyComplex,
) -> Result<Vec<Subdivision>, TriangulationError> {
    enumerate_triangulations_with_jobs(complex, 1)
}

/// As [`enumerate_triangulations`], with the search over the first cell's
/// triangulations split across `jobs` threads. Output order is canonical and
/// independent of `jobs`.
pub fn enumerate_triangulations_with_jobs(
    complex: &PolyComplex,
    jobs: usize,
) -> Result<Vec<Subdivision>, TriangulationError> {
    const GUARD: usize = 12;
    if complex.vertices().len() > GUARD {
        return Err(TriangulationError::TooLarge(GUARD));
    }
    let maximal: Vec<Cell> = complex.maximal_cells().into_iter().cloned().collect();
    let mut per_cell: Vec<Vec<Vec<Cell>>> = Vec::new();
    for sigma in &maximal {
        per_cell.push(cell_triangulations(complex, sigma)?);
    }
    // Combine the per-cell triangulations, requiring equal restrictions on
    // shared faces.
    let combos = combine_cell_triangulations(complex, &maximal, &per_cell, jobs);
    let mut out: Vec<Subdivision> = Vec::new();
    for combo in combos {
        let pieces: Vec<(Vec<VertexId>, usize)> = combo
            .iter()
            .map(|c| (c.verts().to_vec(), c.dim()))
            .collect();
        let refined = PolyComplex::assemble_from_pieces(
            complex.ambient_dim(),
            complex.vertices(),
            complex.integral().clone(),
            &pieces,
        );
        let sub = crate::complex::is_subdivision(&refined, complex)?;
        out.push(sub);
    }
    out.sort_by_key(|s| {
        s.refined()
            .maximal_cells()
            .into_iter()
            .map(|c| c.verts().to_vec())
            .collect::<Vec<_>>()
    });
    Ok(out)
}

/// All triangulations of one maximal cell using its vertices only.
fn cell_triangulations(
    complex: &PolyComplex,
    sigma: &Cell,
) -> Result<Vec<Vec<Cell>>, TriangulationError> {
    let d = sigma.dim();
    let verts = sigma.verts().to_vec();
    let mut candidates: Vec<Cell> = Vec::new();
    for sub in itertools::Itertools::combinations(verts.iter().copied(), d + 1) {
        let pts: Vec<Point> = sub.iter().map(|v| complex.point(*v).clone()).collect();
        let rows: Vec<Point> = pts[1..].iter().map(|p| vec_sub(p, &pts[0])).collect();
        if Mat::from_rows(rows).rank() == d {
            candidates.push(Cell::new(sub, d));
        }
    }
    let sigma_hull = complex.hull_of(sigma)?;
    let chart = &sigma_hull.chart;
    let target = hull::polytope_volume(&complex.cell_points(sigma), chart)
        .map_err(ComplexError::from)?;
    let vols: Vec<Rat> = candidates
        .iter()
        .map(|c| hull::polytope_volume(&complex.cell_points(c), chart))
        .collect::<Result<_, _>>()
        .map_err(ComplexError::from)?;
    let hulls: Vec<Hull> = candidates
        .iter()
        .map(|c| complex.hull_of(c))
        .collect::<Result<_, _>>()?;
    // Lazy pairwise compatibility, memoized.
    let mut compat: BTreeMap<(usize, usize), bool> = BTreeMap::new();
    let mut results: Vec<Vec<Cell>> = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    search_tilings(
        &candidates,
        &vols,
        &hulls,
        &target,
        &mut compat,
        &mut chosen,
        0,
        &Rat::zero(),
        &mut results,
    );
    Ok(results)
}

#[allow(clippy::too_many_arguments)]
fn search_tilings(
    candidates: &[Cell],
    vols: &[Rat],
    hulls: &[Hull],
    target: &Rat,
    compat: &mut BTreeMap<(usize, usize), bool>,
    chosen: &mut Vec<usize>,
    start: usize,
    acc: &Rat,
    results: &mut Vec<Vec<Cell>>,
) {
    if acc == target {
        results.push(chosen.iter().map(|&i| candidates[i].clone()).collect());
        return;
    }
    for i in start..candidates.len() {
        let next = acc + &vols[i];
        if next > *target {
            continue;
        }
        let ok = chosen.iter().all(|&j| {
            let key = (j.min(i), j.max(i));
            *compat.entry(key).or_insert_with(|| {
                crate::complex::hulls_meet_in_common_face(&hulls[key.0], &hulls[key.1])
            })
        });
        if !ok {
            continue;
        }
        chosen.push(i);
        search_tilings(
            candidates, vols, hulls, target, compat, chosen, i + 1, &next, results,
        );
        chosen.pop();
    }
}

/// Restriction of a set of simplices to a face: the traces of its members.
fn restriction_trace(tri: &[Cell], face: &Cell) -> BTreeSet<Vec<VertexId>> {
    let mut out: BTreeSet<Vec<VertexId>> = BTreeSet::new();
    for s in tri {
        let trace: Vec<VertexId> = s
            .verts()
            .iter()
            .copied()
            .filter(|v| face.has_vertex(*v))
            .collect();
        if !trace.is_empty() {
            out.insert(trace);
        }
    }
    // Keep only inclusion-maximal traces.
    let maxes: BTreeSet<Vec<VertexId>> = out
        .iter()
        .filter(|t| {
            !out.iter()
                .any(|u| u != *t && t.iter().all(|v| u.contains(v)))
        })
        .cloned()
        .collect();
    maxes
}

fn combine_cell_triangulations(
    complex: &PolyComplex,
    maximal: &[Cell],
    per_cell: &[Vec<Vec<Cell>>],
    jobs: usize,
) -> Vec<Vec<Cell>> {
    // Shared faces between pairs of maximal cells (vertex-determined).
    let mut shared: Vec<(usize, usize, Cell)> = Vec::new();
    for i in 0..maximal.len() {
        for j in i + 1..maximal.len() {
            let common: Vec<VertexId> = maximal[i]
                .verts()
                .iter()
                .copied()
                .filter(|v| maximal[j].has_vertex(*v))
                .collect();
            if common.is_empty() {
                continue;
            }
            if let Some(face) = complex.cells().find(|c| c.verts() == common.as_slice()) {
                shared.push((i, j, face.clone()));
            }
        }
    }
    let compatible = |combo: &[usize]| -> bool {
        for (i, j, face) in &shared {
            if *i >= combo.len() || *j >= combo.len() {
                continue;
            }
            let ti = &per_cell[*i][combo[*i]];
            let tj = &per_cell[*j][combo[*j]];
            if restriction_trace(ti, face) != restriction_trace(tj, face) {
                return false;
            }
        }
        true
    };
    let enumerate_from = |first_choices: &[usize]| -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for &first in first_choices {
            let mut combo = vec![first];
            extend_combo(per_cell, &compatible, &mut combo, &mut out);
        }
        out
    };
    let first_count = per_cell.first().map(Vec::len).unwrap_or(0);
    let all_first: Vec<usize> = (0..first_count).collect();
    let combos: Vec<Vec<usize>> = if jobs <= 1 || first_count <= 1 {
        enumerate_from(&all_first)
    } else {
        let chunks: Vec<&[usize]> = all_first
            .chunks(first_count.div_ceil(jobs))
            .collect();
        let mut partials: Vec<Vec<Vec<usize>>> = Vec::new();
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .iter()
                .map(|chunk| scope.spawn(|| enumerate_from(chunk)))
                .collect();
            for h in handles {
                partials.push(h.join().expect("enumeration worker"));
            }
        });
        partials.into_iter().flatten().collect()
    };
    combos
        .into_iter()
        .map(|combo| {
            combo
                .iter()
                .enumerate()
                .flat_map(|(i, &k)| per_cell[i][k].clone())
                .collect()
        })
        .collect()
}

fn extend_combo(
    per_cell: &[Vec<Vec<Cell>>],
    compatible: &impl Fn(&[usize]) -> bool,
    combo: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if !compatible(combo) {
        return;
    }
    if combo.len() == per_cell.len() {
        out.push(combo.clone());
        return;
    }
    let next = combo.len();
    for k in 0..per_cell[next].len() {
        combo.push(k);
        extend_combo(per_cell, compatible, combo, out);
        combo.pop();
    }
}

/// A radius in the Euclidean metric on value vectors within which perturbed
/// liftings keep (simplicial case) or refine (general case) the induced
/// subdivision. Computed from the strict fold slacks.
pub fn stability_radius(
    complex: &PolyComplex,
    lifting: &VerticialLifting,
) -> Result<Rat, TriangulationError> {
    let sub = induced_subdivision(complex, &Lifting::Verticial(lifting.clone()))?;
    let refined = sub.refined();
    let mut best: Option<Rat> = None;
    for sigma in complex.maximal_cells() {
        let pool: Vec<VertexId> = sigma.verts().to_vec();
        for piece in refined.cells_of_dim(sigma.dim()) {
            if sub.carrier_of(piece) != sigma {
                continue;
            }
            let basis = affine_basis(refined, piece);
            let basis_pts: Vec<Point> =
                basis.iter().map(|v| refined.point(*v).clone()).collect();
            for &w in &pool {
                if piece.has_vertex(w) {
                    continue;
                }
                let lam = affine_coords(&basis_pts, complex.point(w))
                    .expect("vertices lie in the affine hull of their cell");
                let ell: Rat = lam
                    .iter()
                    .zip(&basis)
                    .fold(Rat::zero(), |acc, (l, b)| acc + l * lifting.value(*b).unwrap());
                let slack = ell - lifting.value(w).unwrap();
                debug_assert!(slack.is_positive(), "fold slacks are strict");
                let weight = lam
                    .iter()
                    .fold(Rat::one(), |acc, l| acc + l.abs());
                let r = slack / weight;
                best = Some(match best {
                    None => r,
                    Some(b) => b.min(r),
                });
            }
        }
    }
    Ok(best.unwrap_or_else(Rat::one))
}
