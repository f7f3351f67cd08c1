//! polytri: exact regular subdivisions, triangulation extension, cones and
//! slices, and the nearly-semistable verification pipeline, over JSON
//! documents with exact rational entries.
//!
//! Exit codes: 2 parse error, 3 domain mismatch, 4 convexity violation,
//! 5 boundary data not induced by its lifting, 6 boundary data not
//! simplicial, 7 unsupported export dimension, 1 other errors. Witness
//! summaries go to stderr; stdout carries output file paths only.

use clap::{Parser, Subcommand};
use polytri::complex::{PolyComplex, Subdivision, VertexId};
use polytri::lifting::LiftingError;
use polytri::rat::{format_rat, Rat};
use polytri::triangulation::{Regularity, TriangulationError};
use polytri_cli::document::{self as doc, DocError, Document};
use polytri_cli::export;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "polytri", version, about = "exact toolkit for regular subdivisions and triangulation extension")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the subdivision induced by a lifting on a complex.
    Subdivide {
        complex: PathBuf,
        lifting: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extend a regular simplicial boundary triangulation to the whole
    /// complex without new vertices.
    Extend {
        complex: PathBuf,
        /// Subcomplex selector: the keyword "boundary" or a path to a JSON
        /// array of cells (vertex id arrays).
        selector: String,
        /// Subdivision document with the boundary triangulation.
        boundary: PathBuf,
        /// Lifting document inducing the boundary triangulation.
        lifting: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the single composed lifting certifying the result.
        #[arg(long)]
        emit_certificate: Option<PathBuf>,
        /// Use the random strategy with this seed instead of pulling.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Decide regularity of a subdivision; writes a report document.
    CheckRegular {
        complex: PathBuf,
        subdivision: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Enumerate all triangulations of a small complex without new vertices.
    Enumerate {
        complex: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// The cone over a compact complex (with its canonical slicing values).
    Cone {
        complex: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// The compact slice of a conical complex by a slicing function.
    Slice {
        conical: PathBuf,
        /// Lifting document with positive values per ray.
        slicing: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the nearly-semistable conditions for a morphism document.
    CheckSemistable {
        morphism: PathBuf,
        /// A conical complex document subdividing the source (defaults to
        /// the trivial subdivision).
        #[arg(long)]
        subdivision: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export a subdivision's refined complex as OFF or SVG.
    Export {
        subdivision: PathBuf,
        #[arg(long, value_parser = ["off", "svg"])]
        format: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

impl From<DocError> for Failure {
    fn from(e: DocError) -> Self {
        match e {
            DocError::Parse(m) => fail(2, m),
            DocError::Domain(m) => fail(3, m),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        fail(1, e.to_string())
    }
}

/// Resolve a path, falling back to the fixture directory (POLYTRI_FIXTURES
/// or ./fixtures) for bare names.
fn resolve(path: &Path) -> PathBuf {
    if path.exists() || path.components().count() > 1 {
        return path.to_path_buf();
    }
    let dir = std::env::var_os("POLYTRI_FIXTURES")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("fixtures"));
    let candidate = dir.join(path);
    if candidate.exists() {
        candidate
    } else {
        path.to_path_buf()
    }
}

fn read_complex(path: &Path) -> Result<PolyComplex, Failure> {
    let d = doc::read_document(&resolve(path))?;
    doc::expect_kind(&d, "complex")?;
    Ok(doc::complex_from_payload(&doc::payload_as(&d)?)?)
}

fn read_subdivision(path: &Path) -> Result<Subdivision, Failure> {
    let d = doc::read_document(&resolve(path))?;
    doc::expect_kind(&d, "subdivision")?;
    Ok(doc::subdivision_from_payload(&doc::payload_as(&d)?)?)
}

fn read_lifting_values(path: &Path) -> Result<BTreeMap<VertexId, Rat>, Failure> {
    let d = doc::read_document(&resolve(path))?;
    doc::expect_kind(&d, "lifting")?;
    Ok(doc::lifting_values_from_payload(&doc::payload_as(&d)?)?)
}

fn lifting_error_code(e: &LiftingError) -> u8 {
    match e {
        LiftingError::NotConvexDown(_) => 4,
        LiftingError::DomainMismatch(_) | LiftingError::NotSubcomplex => 3,
        _ => 1,
    }
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Subdivide { complex, lifting, out } => {
            let c = read_complex(&complex)?;
            let values = read_lifting_values(&lifting)?;
            let f = doc::lifting_for(&c, &values, None)?;
            let sub = polytri::induced_subdivision(&c, &f)
                .map_err(|e| fail(lifting_error_code(&e), e.to_string()))?;
            let d = doc::wrap("subdivision", doc::subdivision_to_payload(&sub));
            doc::write_document(&out, &d)?;
            eprintln!(
                "induced subdivision: {} maximal cells",
                sub.refined().maximal_cells().len()
            );
            println!("{}", out.display());
            Ok(())
        }
        Command::Extend { complex, selector, boundary, lifting, out, emit_certificate, seed } => {
            let c = read_complex(&complex)?;
            let sub0 = select_subcomplex(&c, &selector)?;
            let boundary_sub = read_subdivision(&boundary)?;
            if !boundary_sub.parent().geom_eq(&sub0) {
                return Err(fail(3, "boundary subdivision is not over the selected subcomplex"));
            }
            // Re-anchor the boundary subdivision on the selected subcomplex.
            let boundary_sub = polytri::is_subdivision(boundary_sub.refined(), &sub0)
                .map_err(|e| fail(3, e.to_string()))?;
            let values = read_lifting_values(&lifting)?;
            let f0 = doc::lifting_for(&sub0, &values, Some(&boundary_sub))?;
            let strategy = seed.map(|s| polytri::LiftingStrategy::Random {
                seed: s,
                denominator_bound: 10_000,
            });
            let outcome = polytri::triangulation::extend_triangulation_with_strategy(
                &c,
                &sub0,
                &boundary_sub,
                &f0,
                strategy.as_ref(),
            )
                .map_err(|e| match e {
                    TriangulationError::InputNotInduced => {
                        fail(5, "the lifting does not induce the boundary triangulation")
                    }
                    TriangulationError::InputNotSimplicial => {
                        fail(6, "the boundary subdivision is not simplicial")
                    }
                    TriangulationError::Lifting(ref le) => {
                        fail(lifting_error_code(le), e.to_string())
                    }
                    other => fail(1, other.to_string()),
                })?;
            let d = doc::wrap("subdivision", doc::subdivision_to_payload(&outcome.triangulation));
            doc::write_document(&out, &d)?;
            println!("{}", out.display());
            if let Some(cert_path) = emit_certificate {
                let cert = doc::wrap(
                    "lifting",
                    doc::lifting_to_payload(outcome.chain.combined.values()),
                );
                doc::write_document(&cert_path, &cert)?;
                println!("{}", cert_path.display());
            }
            eprintln!(
                "extended to {} maximal simplices (epsilon {})",
                outcome.triangulation.refined().maximal_cells().len(),
                format_rat(&outcome.chain.epsilon)
            );
            Ok(())
        }
        Command::CheckRegular { complex, subdivision, out } => {
            let c = read_complex(&complex)?;
            let sub = read_subdivision(&subdivision)?;
            if !sub.parent().geom_eq(&c) {
                return Err(fail(3, "subdivision is not over the given complex"));
            }
            let sub = polytri::is_subdivision(sub.refined(), &c)
                .map_err(|e| fail(3, e.to_string()))?;
            let payload = match polytri::is_regular(&c, &sub) {
                Regularity::Regular(cert) => {
                    eprintln!("REGULAR (margin {})", format_rat(&cert.margin));
                    doc::RegularityPayload {
                        regular: true,
                        lifting: Some(
                            cert.lifting
                                .values()
                                .iter()
                                .map(|(v, x)| (v.to_string(), format_rat(x)))
                                .collect(),
                        ),
                        margin: Some(format_rat(&cert.margin)),
                        infeasible_constraints: Vec::new(),
                        farkas_multipliers: Vec::new(),
                    }
                }
                Regularity::NotRegular(w) => {
                    eprintln!("NOT REGULAR ({} fold constraints jointly infeasible)", w.constraints.len());
                    doc::RegularityPayload {
                        regular: false,
                        lifting: None,
                        margin: None,
                        infeasible_constraints: w
                            .constraints
                            .iter()
                            .map(|f| {
                                format!(
                                    "piece {:?} against vertex {} in cell {:?}",
                                    f.piece.verts(),
                                    f.vertex,
                                    f.parent_cell.verts()
                                )
                            })
                            .collect(),
                        farkas_multipliers: w.multipliers.iter().map(format_rat).collect(),
                    }
                }
            };
            doc::write_document(&out, &doc::wrap("report", payload))?;
            println!("{}", out.display());
            Ok(())
        }
        Command::Enumerate { complex, out, jobs } => {
            let c = read_complex(&complex)?;
            let tris = polytri::triangulation::enumerate_triangulations_with_jobs(&c, jobs.max(1))
                .map_err(|e| fail(1, e.to_string()))?;
            eprintln!("{} triangulations", tris.len());
            let payloads: Vec<doc::SubdivisionPayload> =
                tris.iter().map(doc::subdivision_to_payload).collect();
            doc::write_document(&out, &doc::wrap("subdivision", payloads))?;
            println!("{}", out.display());
            Ok(())
        }
        Command::Cone { complex, out } => {
            let c = read_complex(&complex)?;
            let (sigma, h) = polytri::cone_over(&c);
            let mut payload = serde_json::to_value(doc::conical_to_payload(&sigma))
                .expect("payloads serialize");
            payload["slicing"] = serde_json::to_value(
                h.ray_values()
                    .iter()
                    .map(|(r, v)| (r.to_string(), format_rat(v)))
                    .collect::<BTreeMap<String, String>>(),
            )
            .unwrap();
            doc::write_document(
                &out,
                &Document { kind: "conical".into(), version: doc::VERSION, payload },
            )?;
            println!("{}", out.display());
            Ok(())
        }
        Command::Slice { conical, slicing, out } => {
            let d = doc::read_document(&resolve(&conical))?;
            doc::expect_kind(&d, "conical")?;
            let sigma = doc::conical_from_payload(&doc::payload_as(&d)?)?;
            let values = read_lifting_values(&slicing)?;
            let h = doc::slicing_from_values(values);
            let sliced = polytri::slice(&sigma, &h).map_err(|e| fail(3, e.to_string()))?;
            doc::write_document(&out, &doc::wrap("complex", doc::complex_to_payload(&sliced)))?;
            println!("{}", out.display());
            Ok(())
        }
        Command::CheckSemistable { morphism, subdivision, out } => {
            let d = doc::read_document(&resolve(&morphism))?;
            doc::expect_kind(&d, "morphism")?;
            let (f, _) = doc::morphism_from_payload(&doc::payload_as(&d)?)?;
            let sub = match subdivision {
                None => polytri::ConicalSubdivision::trivial(f.source()),
                Some(path) => {
                    let d = doc::read_document(&resolve(&path))?;
                    doc::expect_kind(&d, "conical")?;
                    let refined = doc::conical_from_payload(&doc::payload_as(&d)?)?;
                    polytri::is_conical_subdivision(&refined, f.source())
                        .map_err(|e| fail(3, e.to_string()))?
                }
            };
            let report = polytri::check_nearly_semistable(&f, &sub)
                .map_err(|e| fail(3, e.to_string()))?;
            let payload = doc::report_to_payload(&report);
            eprintln!(
                "nearly semistable: {}; semistable: {}",
                if payload.verdict != "neither" { "yes" } else { "no" },
                if payload.verdict == "semistable" { "yes" } else { "no" }
            );
            doc::write_document(&out, &doc::wrap("report", payload))?;
            println!("{}", out.display());
            Ok(())
        }
        Command::Export { subdivision, format, out } => {
            let sub = read_subdivision(&subdivision)?;
            let text = match format.as_str() {
                "off" => export::to_off(sub.refined()).map_err(|m| fail(7, m))?,
                "svg" => export::to_svg(sub.refined()).map_err(|m| fail(7, m))?,
                _ => unreachable!("clap validates the format"),
            };
            std::fs::write(&out, text)?;
            println!("{}", out.display());
            Ok(())
        }
    }
}

fn select_subcomplex(complex: &PolyComplex, selector: &str) -> Result<PolyComplex, Failure> {
    if selector == "boundary" {
        return complex.boundary().map_err(|e| fail(3, e.to_string()));
    }
    let path = resolve(Path::new(selector));
    let text = std::fs::read_to_string(&path)
        .map_err(|e| fail(2, format!("{}: {e}", path.display())))?;
    let ids: Vec<Vec<VertexId>> = serde_json::from_str(&text)
        .map_err(|e| fail(2, format!("cell list: {e}")))?;
    let cells: Vec<polytri::Cell> = ids
        .iter()
        .map(|c| doc::cell_from_ids(complex, c))
        .collect::<Result<_, _>>()?;
    complex
        .subcomplex_from_cells(&cells)
        .map_err(|e| fail(3, e.to_string()))
}
