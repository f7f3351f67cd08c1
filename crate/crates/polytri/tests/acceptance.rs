//! Acceptance suite: one test per criterion, each printing a pass line.
//! Run with `cargo test -p polytri --test acceptance -- --nocapture` to see
//! the lines; any failure fails the corresponding test.

mod common;

use num_traits::{One, Signed, Zero};
use polytri::complex::{Cell, VertexId};
use polytri::lifting::{self, Lifting, VerticialLifting};
use polytri::rat::{rat, ratio, Rat};
use polytri::triangulation::{self, Regularity};
use polytri::fixtures;
use rand::{Rng, SeedableRng};
use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

fn pass(criterion: &str, detail: &str) {
    println!("acceptance {criterion}: PASS ({detail})");
}

/// Criterion 1: the twisted prism boundary admits no lifting, and no
/// triangulation of the prism without new vertices restricts to it.
#[test]
fn criterion_1_prism_counterexample() {
    let start = Instant::now();
    let prism = fixtures::prism();
    let boundary = prism.boundary().unwrap();
    let twisted = fixtures::twisted_prism_boundary();
    let twisted_sub = polytri::is_subdivision(&twisted, &boundary).unwrap();
    let witness_size = match triangulation::is_regular(&boundary, &twisted_sub) {
        Regularity::NotRegular(w) => {
            assert!(!w.constraints.is_empty());
            assert_eq!(w.constraints.len(), w.multipliers.len());
            w.constraints.len()
        }
        Regularity::Regular(_) => panic!("twisted boundary must not be regular"),
    };
    let tris = triangulation::enumerate_triangulations(&prism).unwrap();
    assert!(!tris.is_empty());
    for t in &tris {
        let restricted = t.restrict_to(&boundary).unwrap();
        assert!(
            !restricted.refined().geom_eq(&twisted),
            "a triangulation restricts to the twisted boundary"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 10, "criterion 1 must finish within 10 s");
    pass(
        "criterion 1 (prism counterexample)",
        &format!(
            "witness with {witness_size} fold constraints; {} triangulations, none restricting to the twisted boundary; {:?}",
            tris.len(), elapsed
        ),
    );
}

/// Criterion 2: the extension theorem on the fixture corpus, with all four
/// post-conditions.
#[test]
fn criterion_2_extension_suite() {
    let start = Instant::now();
    let fixtures = fixtures::extension_fixtures();
    assert!(fixtures.len() >= 20, "need at least 20 extension fixtures");
    for fx in &fixtures {
        // Boundary data is regular by construction; double-check via LP.
        let boundary_regular =
            triangulation::is_regular(&fx.subcomplex, &fx.boundary);
        assert!(
            matches!(boundary_regular, Regularity::Regular(_)),
            "{}: boundary data must be regular",
            fx.name
        );
        let out = triangulation::extend_triangulation(
            &fx.complex,
            &fx.subcomplex,
            &fx.boundary,
            &fx.lifting,
        )
        .unwrap_or_else(|e| panic!("{}: extension failed: {e}", fx.name));
        // (a) simplicial
        assert!(out.triangulation.is_simplicial(), "{}: not simplicial", fx.name);
        // (b) restriction equals the boundary data cell by cell
        let restricted = out.triangulation.restrict_to(&fx.subcomplex).unwrap();
        assert!(
            restricted.refined().geom_eq(fx.boundary.refined()),
            "{}: restriction mismatch",
            fx.name
        );
        // (c) no new vertices: Sk^0 equality as point sets
        let result_points: BTreeSet<_> = out
            .triangulation
            .refined()
            .vertices()
            .values()
            .cloned()
            .collect();
        let mut expect: BTreeSet<_> = fx.complex.vertices().values().cloned().collect();
        expect.extend(fx.boundary.refined().vertices().values().cloned());
        assert_eq!(result_points, expect, "{}: vertex set mismatch", fx.name);
        // (d) the result is regular
        match triangulation::is_regular(&fx.complex, &out.triangulation) {
            Regularity::Regular(cert) => {
                assert!(
                    cert.induces(&fx.complex, &out.triangulation).unwrap(),
                    "{}: certificate does not reproduce the triangulation",
                    fx.name
                );
            }
            Regularity::NotRegular(_) => panic!("{}: result must be regular", fx.name),
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "criterion 2 must finish within 60 s");
    pass(
        "criterion 2 (extension theorem suite)",
        &format!("{} fixtures, all four post-conditions; {:?}", fixtures.len(), elapsed),
    );
}

/// Criterion 3: conical extension introduces no new edges on cones over
/// the compact corpus.
#[test]
fn criterion_3_conical_suite() {
    let start = Instant::now();
    let fixtures = fixtures::conical_fixtures();
    assert!(fixtures.len() >= 10, "need at least 10 conical fixtures");
    for fx in &fixtures {
        let (out, cert) = polytri::extend_conical_triangulation(
            &fx.complex,
            &fx.slicing,
            &fx.subcomplex,
            &fx.boundary,
            &fx.values,
        )
        .unwrap_or_else(|e| panic!("{}: conical extension failed: {e}", fx.name));
        assert!(out.is_simplicial(), "{}: not simplicial", fx.name);
        // Sk^1 equality: rays of the result = rays of the complex plus rays
        // of the boundary subdivision (as primitive directions).
        let mut expect = fx.complex.ray_direction_set();
        expect.extend(fx.boundary.refined().ray_direction_set());
        assert_eq!(
            out.refined().ray_direction_set(),
            expect,
            "{}: edge set mismatch",
            fx.name
        );
        // Restriction to the subcomplex reproduces the boundary data.
        let restricted = out.restrict_to(&fx.subcomplex).unwrap();
        let restricted_cones: BTreeSet<_> = restricted.refined().cones().cloned().collect();
        let boundary_cones: BTreeSet<_> = fx.boundary.refined().cones().cloned().collect();
        assert_eq!(restricted_cones, boundary_cones, "{}: restriction mismatch", fx.name);
        // The certificate values define a homogeneous lifting; values on
        // rays the boundary subdivision introduced count as extra rays.
        let mut on_rays: BTreeMap<usize, Rat> = BTreeMap::new();
        let mut extra: Vec<(Vec<Rat>, Rat)> = Vec::new();
        for (r, v) in &cert.ray_values {
            if fx.complex.rays().contains_key(r) {
                on_rays.insert(*r, v.clone());
            } else {
                extra.push((out.refined().generator(*r).clone(), v.clone()));
            }
        }
        assert!(
            polytri::is_homogeneous_lifting(&fx.complex, &on_rays, &extra),
            "{}: certificate is not a homogeneous lifting",
            fx.name
        );
    }
    let elapsed = start.elapsed();
    pass(
        "criterion 3 (conical extension suite)",
        &format!("{} conical fixtures, no new edges; {:?}", fixtures.len(), elapsed),
    );
}

/// Criterion 4: random verticial liftings are simplicial at least 99.5% of
/// the time, and every failure has a vanishing degeneracy determinant.
#[test]
fn criterion_4_genericity() {
    let start = Instant::now();
    let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
    let bound = 10_000i64;
    let mut total = 0usize;
    let mut failures = 0usize;
    for (name, complex) in fixtures::genericity_fixtures() {
        for _ in 0..1000 {
            total += 1;
            let values: BTreeMap<VertexId, Rat> = complex
                .vertex_ids()
                .into_iter()
                .map(|v| (v, ratio(rng.gen_range(0..bound), bound)))
                .collect();
            let sub = lifting::induced_subdivision(&complex, &Lifting::verticial(values.clone()))
                .unwrap();
            if !sub.is_simplicial() {
                failures += 1;
                // Locate a nonsimplicial cell and check the lifted vertices
                // are affinely dependent (the degeneracy determinant
                // vanishes).
                let bad = sub
                    .refined()
                    .cells()
                    .find(|c| !c.is_simplex())
                    .unwrap_or_else(|| panic!("{name}: nonsimplicial subdivision without witness"));
                let rank = common::lifted_affine_rank(sub.refined(), bad, &values);
                assert_eq!(
                    rank,
                    bad.dim() + 1,
                    "{name}: degenerate cell whose lifts are affinely independent"
                );
            }
        }
    }
    let ratio_ok = (total - failures) * 1000 >= total * 995;
    assert!(
        ratio_ok,
        "simplicial fraction below 99.5%: {failures} failures in {total}"
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 120, "criterion 4 must finish within 120 s");
    pass(
        "criterion 4 (genericity)",
        &format!("{total} draws, {failures} degenerate, all with vanishing determinant; {:?}", elapsed),
    );
}

/// Criterion 5: perturbations within half the stability radius leave a
/// simplicial induced subdivision unchanged.
#[test]
fn criterion_5_stability() {
    let start = Instant::now();
    for (name, complex, lifting) in fixtures::stability_fixtures() {
        let base =
            lifting::induced_subdivision(&complex, &Lifting::Verticial(lifting.clone())).unwrap();
        assert!(base.is_simplicial(), "{name}: stability fixture must be simplicial");
        let eps = triangulation::stability_radius(&complex, &lifting).unwrap();
        assert!(eps.is_positive());
        let n = complex.vertices().len() as i64;
        let mut rng = rand::rngs::StdRng::seed_from_u64(77);
        for _ in 0..100 {
            // Componentwise steps of at most eps / (2n) keep the Euclidean
            // norm strictly below eps / 2.
            let perturbed: BTreeMap<VertexId, Rat> = lifting
                .values()
                .iter()
                .map(|(v, x)| {
                    let k = rat(rng.gen_range(-16i64..=16));
                    (*v, x + &eps * k / rat(2 * 17 * n))
                })
                .collect();
            let delta: Vec<Rat> = lifting
                .values()
                .iter()
                .map(|(v, x)| &perturbed[v] - x)
                .collect();
            assert!(common::norm_sq(&delta) < &eps * &eps / rat(4));
            let sub =
                lifting::induced_subdivision(&complex, &Lifting::verticial(perturbed)).unwrap();
            assert!(sub.geom_eq(&base), "{name}: perturbed subdivision differs");
        }
    }
    let elapsed = start.elapsed();
    pass(
        "criterion 5 (stability)",
        &format!("100 samples within radius/2 per fixture, all identical; {:?}", elapsed),
    );
}

/// Criterion 6: the square remark: equal liftings on the edge subcomplex
/// need not have equal extensions.
#[test]
fn criterion_6_square_remark() {
    let s = fixtures::unit_square();
    let e = s
        .subcomplex_from_cells(&[Cell::new(vec![0, 1], 1), Cell::new(vec![2, 3], 1)])
        .unwrap();
    let zero = Lifting::Verticial(VerticialLifting::zero(&s));
    let alt = Lifting::verticial(
        [(0, rat(-1)), (1, rat(1)), (2, rat(-1)), (3, rat(1))].into(),
    );
    let zero_on_e = zero.restrict_to(&e).unwrap();
    let alt_on_e = alt.restrict_to(&e).unwrap();
    let sub_zero_e = lifting::induced_subdivision(&e, &zero_on_e).unwrap();
    let sub_alt_e = lifting::induced_subdivision(&e, &alt_on_e).unwrap();
    assert!(sub_zero_e.geom_eq(&sub_alt_e), "both are trivial on the edges");
    assert!(sub_zero_e.refined().geom_eq(&e));
    let sub_zero = lifting::induced_subdivision(&s, &zero).unwrap();
    let sub_alt = lifting::induced_subdivision(&s, &alt).unwrap();
    assert!(sub_zero.refined().geom_eq(&s), "the zero lifting is trivial");
    assert!(!sub_zero.geom_eq(&sub_alt), "the extensions differ on the square");
    pass(
        "criterion 6 (square remark)",
        "equal on the edge subcomplex, different on the square",
    );
}

/// Criterion 7: transitivity: structural refinement equals the subdivision
/// induced by f + eps f' at the explicit epsilon and at a seventh of it.
#[test]
fn criterion_7_transitivity() {
    let start = Instant::now();
    let mut cases = 0usize;
    for (name, complex) in [
        ("square", fixtures::unit_square()),
        ("triangle", fixtures::triangle()),
        ("prism", fixtures::prism()),
        ("glued-squares", fixtures::glued_squares()),
        ("pentagon", fixtures::polygon(5)),
        ("cube", fixtures::cube()),
        ("sliced-pentagon", fixtures::sliced_polygon(5)),
        ("segment", fixtures::segment()),
    ] {
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        for case in 0..2 {
            let f = if case == 0 {
                Lifting::Verticial(VerticialLifting::zero(&complex))
            } else {
                Lifting::verticial(
                    complex
                        .vertex_ids()
                        .into_iter()
                        .map(|v| (v, ratio(rng.gen_range(0..100), 100)))
                        .collect(),
                )
            };
            let fp = Lifting::verticial(
                complex
                    .vertex_ids()
                    .into_iter()
                    .map(|v| (v, ratio(rng.gen_range(0..1000), 1000)))
                    .collect(),
            );
            let base = lifting::induced_subdivision(&complex, &f).unwrap();
            let refined = lifting::refine_by(&base, &fp).unwrap();
            let eps = lifting::explicit_epsilon(&complex, &f, &fp).unwrap();
            assert!(eps.is_positive());
            for div in [rat(1), rat(7)] {
                let e = &eps / &div;
                let combined = lifting::combine(&complex, &f, &e, &fp).unwrap();
                let direct =
                    lifting::induced_subdivision(&complex, &combined.as_lifting()).unwrap();
                assert!(
                    direct.geom_eq(&refined),
                    "{name}: transitivity fails at eps/{div}"
                );
            }
            cases += 1;
        }
    }
    let elapsed = start.elapsed();
    pass(
        "criterion 7 (transitivity)",
        &format!("{cases} (f, f') pairs at eps and eps/7; {:?}", elapsed),
    );
}

/// Criterion 8: the rank-two orthant morphism with the half-diagonal lattice
/// is nearly semistable but not semistable, and the orthant has index two.
#[test]
fn criterion_8_semistable_remark() {
    use polytri::semistable::{self, MorphismMap, Verdict};
    use polytri::{ConicalComplex, IntegralStructure};
    use polytri::linalg::Mat;

    let rays: BTreeMap<usize, Vec<Rat>> = (0..4)
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
    let e4: Vec<Vec<Rat>> = (0..4)
        .map(|i| {
            let mut g = vec![Rat::zero(); 4];
            g[i] = Rat::one();
            g
        })
        .collect();
    assert_eq!(
        semistable::cone_index(&e4, &ny).unwrap(),
        num_bigint::BigInt::from(2)
    );
    let source = ConicalComplex::build(rays, &[vec![0, 1, 2, 3]], ny).unwrap();
    let m = Mat::from_rows(vec![
        vec![rat(1), rat(1), rat(0), rat(0)],
        vec![rat(0), rat(0), rat(1), rat(1)],
    ]);
    let f = polytri::ConicalMorphism::new(
        source,
        polytri::OrthantBase::standard(2),
        MorphismMap::Global(m),
    )
    .unwrap();
    let trivial = polytri::ConicalSubdivision::trivial(f.source());
    let report = semistable::check_nearly_semistable(&f, &trivial).unwrap();
    assert_eq!(report.verdict, Verdict::NearlySemistable);
    assert!(report.equidimensional.ok);
    assert!(report.reduced.ok);
    assert!(report.codim1_semistable.ok);
    assert!(report.simplicial);
    assert!(report.base_nonsingular);
    // Also exercise the full pipeline with trivial boundary data.
    let (_, pieces) = semistable::preimage_skeleton(&f);
    let boundary: Vec<polytri::BoundaryDatum> = pieces
        .iter()
        .map(|p| polytri::BoundaryDatum {
            multiplier: num_bigint::BigInt::one(),
            subdivision: polytri::ConicalSubdivision::trivial(p),
            lifting: p.ray_ids().into_iter().map(|r| (r, Rat::zero())).collect(),
        })
        .collect();
    let (_, _, report) = semistable::weak_to_nearly_semistable(&f, &boundary).unwrap();
    assert_eq!(report.verdict, Verdict::NearlySemistable);
    pass(
        "criterion 8 (semistable remark fixture)",
        "orthant index 2; nearly semistable, not semistable",
    );
}

/// Criterion 9: the hull-based induced subdivision agrees with the
/// brute-force oracle on every small fixture.
#[test]
fn criterion_9_oracle_equivalence() {
    let start = Instant::now();
    let mut checked = 0usize;
    for (name, complex) in fixtures::small_fixtures() {
        assert!(complex.vertices().len() <= 8);
        let mut rng = rand::rngs::StdRng::seed_from_u64(4242);
        let mut liftings: Vec<BTreeMap<VertexId, Rat>> = vec![
            complex.vertex_ids().into_iter().map(|v| (v, Rat::zero())).collect(),
            complex
                .vertex_ids()
                .into_iter()
                .enumerate()
                .map(|(i, v)| (v, rat(if i % 2 == 0 { -1 } else { 1 })))
                .collect(),
        ];
        for _ in 0..20 {
            liftings.push(
                complex
                    .vertex_ids()
                    .into_iter()
                    .map(|v| (v, ratio(rng.gen_range(-12i64..=12), 4)))
                    .collect(),
            );
        }
        for values in liftings {
            let sub =
                lifting::induced_subdivision(&complex, &Lifting::verticial(values.clone()))
                    .unwrap();
            let expect = common::oracle_induced_pieces(&complex, &values);
            let got = common::implementation_pieces(&complex, &values, &sub);
            assert_eq!(got, expect, "{name}: oracle disagreement for {values:?}");
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    pass(
        "criterion 9 (oracle equivalence)",
        &format!("{checked} liftings matched the brute-force oracle; {:?}", elapsed),
    );
}
