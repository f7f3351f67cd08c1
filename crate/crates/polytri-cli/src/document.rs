//! The JSON document format: one tagged container, one payload type per
//! kind, rationals as exact strings. Parsing and serialization round-trip
//! bit-exactly at the value level.

use num_bigint::BigInt;
use polytri::complex::{Cell, IntegralStructure, PolyComplex, Subdivision, VertexId};
use polytri::conical::{ConicalComplex, RayId, SlicingFunction};
use polytri::lifting::Lifting;
use polytri::linalg::{Mat, Point};
use polytri::rat::{format_rat, parse_rat, Rat};
use polytri::semistable::{
    ConicalMorphism, MorphismMap, OrthantBase, SemistabilityReport, Verdict,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const VERSION: u32 = 1;

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct Document {
    pub kind: String,
    pub version: u32,
    pub payload: serde_json::Value,
}

#[derive(Debug)]
pub enum DocError {
    Parse(String),
    Domain(String),
}

impl std::fmt::Display for DocError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DocError::Parse(m) => write!(f, "parse error: {m}"),
            DocError::Domain(m) => write!(f, "domain mismatch: {m}"),
        }
    }
}

impl std::error::Error for DocError {}

fn rats_to_strings(v: &[Rat]) -> Vec<String> {
    v.iter().map(format_rat).collect()
}

fn strings_to_rats(v: &[String]) -> Result<Vec<Rat>, DocError> {
    v.iter()
        .map(|s| parse_rat(s).ok_or_else(|| DocError::Parse(format!("bad rational {s:?}"))))
        .collect()
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct ComplexPayload {
    pub ambient_dim: usize,
    /// Columns of the lattice basis matrix.
    pub lattice_basis: Vec<Vec<String>>,
    pub vertices: BTreeMap<String, Vec<String>>,
    pub maximal_cells: Vec<Vec<VertexId>>,
}

pub fn complex_to_payload(c: &PolyComplex) -> ComplexPayload {
    let basis = c.integral().basis();
    ComplexPayload {
        ambient_dim: c.ambient_dim(),
        lattice_basis: (0..basis.ncols())
            .map(|j| rats_to_strings(&basis.col(j)))
            .collect(),
        vertices: c
            .vertices()
            .iter()
            .map(|(v, p)| (v.to_string(), rats_to_strings(p)))
            .collect(),
        maximal_cells: c
            .maximal_cells()
            .into_iter()
            .map(|cell| cell.verts().to_vec())
            .collect(),
    }
}

pub fn complex_from_payload(p: &ComplexPayload) -> Result<PolyComplex, DocError> {
    let cols: Vec<Point> = p
        .lattice_basis
        .iter()
        .map(|c| strings_to_rats(c))
        .collect::<Result<_, _>>()?;
    let integral = IntegralStructure::from_basis(Mat::from_cols(&cols))
        .map_err(|e| DocError::Parse(e.to_string()))?;
    let mut vertices: BTreeMap<VertexId, Point> = BTreeMap::new();
    for (k, coords) in &p.vertices {
        let id: VertexId = k
            .parse()
            .map_err(|_| DocError::Parse(format!("bad vertex id {k:?}")))?;
        vertices.insert(id, strings_to_rats(coords)?);
    }
    polytri::build_complex(vertices, &p.maximal_cells, integral)
        .map_err(|e| DocError::Parse(e.to_string()))
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct SubdivisionPayload {
    pub parent: ComplexPayload,
    pub refined: ComplexPayload,
    /// Pairs (refined cell, parent cell) as vertex id lists.
    pub carrier: Vec<(Vec<VertexId>, Vec<VertexId>)>,
}

pub fn subdivision_to_payload(s: &Subdivision) -> SubdivisionPayload {
    SubdivisionPayload {
        parent: complex_to_payload(s.parent()),
        refined: complex_to_payload(s.refined()),
        carrier: s
            .carrier()
            .iter()
            .map(|(c, p)| (c.verts().to_vec(), p.verts().to_vec()))
            .collect(),
    }
}

pub fn subdivision_from_payload(p: &SubdivisionPayload) -> Result<Subdivision, DocError> {
    let parent = complex_from_payload(&p.parent)?;
    let refined = complex_from_payload(&p.refined)?;
    // Recompute the carrier (and re-validate) through the library.
    let sub = polytri::is_subdivision(&refined, &parent)
        .map_err(|e| DocError::Parse(format!("invalid subdivision: {e}")))?;
    // Sanity: the stored carrier must agree.
    for (cell, carrier) in &p.carrier {
        let c = sub
            .refined()
            .cells()
            .find(|x| x.verts() == cell.as_slice())
            .ok_or_else(|| DocError::Parse(format!("carrier names unknown cell {cell:?}")))?;
        if sub.carrier_of(c).verts() != carrier.as_slice() {
            return Err(DocError::Parse(format!(
                "stored carrier for {cell:?} disagrees with geometry"
            )));
        }
    }
    Ok(sub)
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct LiftingPayload {
    pub values: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_points: Vec<ExtraPoint>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct ExtraPoint {
    pub id: VertexId,
    pub point: Vec<String>,
    pub value: String,
}

pub fn lifting_to_payload(values: &BTreeMap<VertexId, Rat>) -> LiftingPayload {
    LiftingPayload {
        values: values
            .iter()
            .map(|(v, x)| (v.to_string(), format_rat(x)))
            .collect(),
        extra_points: Vec::new(),
    }
}

pub fn lifting_values_from_payload(
    p: &LiftingPayload,
) -> Result<BTreeMap<VertexId, Rat>, DocError> {
    let mut out = BTreeMap::new();
    for (k, s) in &p.values {
        let id: VertexId = k
            .parse()
            .map_err(|_| DocError::Parse(format!("bad vertex id {k:?}")))?;
        let x = parse_rat(s).ok_or_else(|| DocError::Parse(format!("bad rational {s:?}")))?;
        out.insert(id, x);
    }
    Ok(out)
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct ConicalPayload {
    pub ambient_dim: usize,
    pub lattice_basis: Vec<Vec<String>>,
    pub rays: BTreeMap<String, Vec<String>>,
    pub maximal_cones: Vec<Vec<RayId>>,
}

pub fn conical_to_payload(c: &ConicalComplex) -> ConicalPayload {
    let basis = c.integral().basis();
    ConicalPayload {
        ambient_dim: c.ambient_dim(),
        lattice_basis: (0..basis.ncols())
            .map(|j| rats_to_strings(&basis.col(j)))
            .collect(),
        rays: c
            .rays()
            .iter()
            .map(|(r, ray)| (r.to_string(), rats_to_strings(&ray.generator)))
            .collect(),
        maximal_cones: c
            .maximal_cones()
            .into_iter()
            .map(|cone| cone.verts().to_vec())
            .collect(),
    }
}

pub fn conical_from_payload(p: &ConicalPayload) -> Result<ConicalComplex, DocError> {
    let cols: Vec<Point> = p
        .lattice_basis
        .iter()
        .map(|c| strings_to_rats(c))
        .collect::<Result<_, _>>()?;
    let integral = IntegralStructure::from_basis(Mat::from_cols(&cols))
        .map_err(|e| DocError::Parse(e.to_string()))?;
    let mut rays: BTreeMap<RayId, Point> = BTreeMap::new();
    for (k, coords) in &p.rays {
        let id: RayId = k
            .parse()
            .map_err(|_| DocError::Parse(format!("bad ray id {k:?}")))?;
        rays.insert(id, strings_to_rats(coords)?);
    }
    ConicalComplex::build(rays, &p.maximal_cones, integral)
        .map_err(|e| DocError::Parse(e.to_string()))
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct MorphismPayload {
    pub source: ConicalPayload,
    pub base_dim: usize,
    pub multipliers: Vec<String>,
    pub matrix: Vec<Vec<String>>,
}

pub fn morphism_to_payload(f: &ConicalMorphism, matrix: &Mat) -> MorphismPayload {
    MorphismPayload {
        source: conical_to_payload(f.source()),
        base_dim: f.target().dim(),
        multipliers: f.target().multipliers().iter().map(|k| k.to_string()).collect(),
        matrix: (0..matrix.nrows())
            .map(|i| rats_to_strings(matrix.row(i)))
            .collect(),
    }
}

pub fn morphism_from_payload(
    p: &MorphismPayload,
) -> Result<(ConicalMorphism, Mat), DocError> {
    let source = conical_from_payload(&p.source)?;
    let multipliers: Vec<BigInt> = p
        .multipliers
        .iter()
        .map(|s| {
            s.parse()
                .map_err(|_| DocError::Parse(format!("bad multiplier {s:?}")))
        })
        .collect::<Result<_, _>>()?;
    let base = OrthantBase::new(p.base_dim, multipliers)
        .map_err(|e| DocError::Parse(e.to_string()))?;
    let rows: Vec<Vec<Rat>> = p
        .matrix
        .iter()
        .map(|r| strings_to_rats(r))
        .collect::<Result<_, _>>()?;
    let m = Mat::from_rows(rows);
    let f = ConicalMorphism::new(source, base, MorphismMap::Global(m.clone()))
        .map_err(|e| DocError::Parse(e.to_string()))?;
    Ok((f, m))
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct ConditionPayload {
    pub ok: bool,
    pub witnesses: Vec<String>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct ReportPayload {
    pub equidimensional: ConditionPayload,
    pub reduced: ConditionPayload,
    pub codim1_semistable: ConditionPayload,
    pub simplicial: bool,
    pub base_nonsingular: bool,
    pub verdict: String,
}

pub fn report_to_payload(r: &SemistabilityReport) -> ReportPayload {
    let cond = |c: &polytri::semistable::ConditionReport| ConditionPayload {
        ok: c.ok,
        witnesses: c.witnesses.clone(),
    };
    ReportPayload {
        equidimensional: cond(&r.equidimensional),
        reduced: cond(&r.reduced),
        codim1_semistable: cond(&r.codim1_semistable),
        simplicial: r.simplicial,
        base_nonsingular: r.base_nonsingular,
        verdict: match r.verdict {
            Verdict::Semistable => "semistable".into(),
            Verdict::NearlySemistable => "nearly_semistable".into(),
            Verdict::Neither => "neither".into(),
        },
    }
}

/// Regularity result as a report payload.
#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct RegularityPayload {
    pub regular: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifting: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub infeasible_constraints: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub farkas_multipliers: Vec<String>,
}

pub fn wrap(kind: &str, payload: impl Serialize) -> Document {
    Document {
        kind: kind.to_string(),
        version: VERSION,
        payload: serde_json::to_value(payload).expect("payloads serialize"),
    }
}

pub fn write_document(path: &std::path::Path, doc: &Document) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(doc).expect("documents serialize");
    text.push('\n');
    std::fs::write(path, text)
}

pub fn read_document(path: &std::path::Path) -> Result<Document, DocError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| DocError::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| DocError::Parse(format!("{}: {e}", path.display())))
}

pub fn expect_kind(doc: &Document, kind: &str) -> Result<(), DocError> {
    if doc.kind != kind {
        return Err(DocError::Parse(format!(
            "expected a {kind:?} document, found {:?}",
            doc.kind
        )));
    }
    Ok(())
}

pub fn payload_as<T: for<'de> Deserialize<'de>>(doc: &Document) -> Result<T, DocError> {
    serde_json::from_value(doc.payload.clone())
        .map_err(|e| DocError::Parse(format!("bad payload: {e}")))
}

/// A lifting over a complex from a payload: verticial when the values cover
/// exactly the complex's vertices, piecewise when a subdivision supplies the
/// extra vertices.
pub fn lifting_for(
    complex: &PolyComplex,
    values: &BTreeMap<VertexId, Rat>,
    linearity: Option<&Subdivision>,
) -> Result<Lifting, DocError> {
    let verts: std::collections::BTreeSet<VertexId> =
        complex.vertex_ids().into_iter().collect();
    let dom: std::collections::BTreeSet<VertexId> = values.keys().copied().collect();
    if dom == verts {
        return Ok(Lifting::verticial(values.clone()));
    }
    let Some(sub) = linearity else {
        return Err(DocError::Domain(
            "lifting values do not match the complex's vertex set".into(),
        ));
    };
    let pl = polytri::PLLifting::new(sub.clone(), values.clone())
        .map_err(|e| DocError::Domain(e.to_string()))?;
    Ok(Lifting::Piecewise(Box::new(pl)))
}

/// Slicing function payload is a lifting payload keyed by ray ids.
pub fn slicing_from_values(values: BTreeMap<RayId, Rat>) -> SlicingFunction {
    SlicingFunction::new(values)
}

/// Cell helper for selectors.
pub fn cell_from_ids(complex: &PolyComplex, ids: &[VertexId]) -> Result<Cell, DocError> {
    complex
        .cells()
        .find(|c| {
            let mut sorted = ids.to_vec();
            sorted.sort_unstable();
            c.verts() == sorted.as_slice()
        })
        .cloned()
        .ok_or_else(|| DocError::Domain(format!("no cell with vertices {ids:?}")))
}
