//! Writes the JSON fixture corpus (the worked examples plus the small
//! complexes) into a directory, default `fixtures/`.

use polytri::fixtures;
use polytri::lifting::Lifting;
use polytri::linalg::Mat;
use polytri::rat::{format_rat, rat, ratio};
use polytri::{ConicalComplex, IntegralStructure};
use polytri_cli::document::{self as doc, Document};
use std::collections::BTreeMap;
use std::path::PathBuf;

fn main() -> std::io::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("fixtures"));
    std::fs::create_dir_all(&dir)?;
    let write = |name: &str, d: &Document| -> std::io::Result<()> {
        let path = dir.join(name);
        doc::write_document(&path, d)?;
        println!("{}", path.display());
        Ok(())
    };

    write(
        "square.json",
        &doc::wrap("complex", doc::complex_to_payload(&fixtures::unit_square())),
    )?;
    write(
        "prism.json",
        &doc::wrap("complex", doc::complex_to_payload(&fixtures::prism())),
    )?;
    write(
        "cube.json",
        &doc::wrap("complex", doc::complex_to_payload(&fixtures::cube())),
    )?;
    write(
        "glued_squares.json",
        &doc::wrap("complex", doc::complex_to_payload(&fixtures::glued_squares())),
    )?;
    write(
        "prism_boundary.json",
        &doc::wrap(
            "complex",
            doc::complex_to_payload(&fixtures::prism().boundary().unwrap()),
        ),
    )?;

    // The twisted boundary as a subdivision of the prism boundary.
    let boundary = fixtures::prism().boundary().unwrap();
    let twisted = polytri::is_subdivision(&fixtures::twisted_prism_boundary(), &boundary)
        .expect("twisted boundary subdivides");
    write(
        "twisted_boundary.json",
        &doc::wrap("subdivision", doc::subdivision_to_payload(&twisted)),
    )?;
    let stairs = polytri::is_subdivision(&fixtures::staircase_prism_boundary(), &boundary)
        .expect("staircase boundary subdivides");
    write(
        "staircase_boundary.json",
        &doc::wrap("subdivision", doc::subdivision_to_payload(&stairs)),
    )?;
    write(
        "staircase_lifting.json",
        &doc::wrap("lifting", doc::lifting_to_payload(&fixtures::staircase_heights())),
    )?;
    let zero: BTreeMap<usize, polytri::Rat> = boundary
        .vertex_ids()
        .into_iter()
        .map(|v| (v, rat(0)))
        .collect();
    write(
        "zero_lifting_prism_boundary.json",
        &doc::wrap("lifting", doc::lifting_to_payload(&zero)),
    )?;
    write(
        "square_remark_lifting.json",
        &doc::wrap(
            "lifting",
            doc::lifting_to_payload(
                &[(0, rat(-1)), (1, rat(1)), (2, rat(-1)), (3, rat(1))].into(),
            ),
        ),
    )?;
    write(
        "zero_lifting_square.json",
        &doc::wrap(
            "lifting",
            doc::lifting_to_payload(&(0..4).map(|v| (v, rat(0))).collect()),
        ),
    )?;
    // The square's diagonal subdivision.
    let s = fixtures::unit_square();
    let diag = polytri::induced_subdivision(
        &s,
        &Lifting::verticial([(0, rat(-1)), (1, rat(1)), (2, rat(-1)), (3, rat(1))].into()),
    )
    .unwrap();
    write(
        "square_diagonal.json",
        &doc::wrap("subdivision", doc::subdivision_to_payload(&diag)),
    )?;

    // The rank-two orthant morphism with the half-diagonal source lattice.
    let rays: BTreeMap<usize, Vec<polytri::Rat>> = (0..4)
        .map(|i| {
            let mut g = vec![rat(0); 4];
            g[i] = rat(1);
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
    let f = polytri::ConicalMorphism::new(
        source,
        polytri::OrthantBase::standard(2),
        polytri::MorphismMap::Global(m.clone()),
    )
    .unwrap();
    write(
        "quotient_morphism.json",
        &doc::wrap("morphism", doc::morphism_to_payload(&f, &m)),
    )?;
    let _ = format_rat(&rat(0));
    Ok(())
}
