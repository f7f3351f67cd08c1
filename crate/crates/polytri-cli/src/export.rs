//! Static geometry export: OFF meshes for complexes of dimension at most
//! three and SVG drawings for planar ones. Exact coordinates are rounded
//! only at the final write, to twelve significant digits.

use polytri::complex::{Cell, PolyComplex};
use polytri::hull::AffineChart;
use polytri::linalg::Point;
use polytri::rat::{format_decimal, rat, Rat};

const SIG_DIGITS: usize = 12;

fn fmt(x: &Rat) -> String {
    format_decimal(x, SIG_DIGITS)
}

/// Cyclic vertex order of a two-dimensional cell: angular sort around the
/// centroid in the cell's chart, decided exactly by half-plane and cross
/// product comparisons.
fn cyclic_order(complex: &PolyComplex, cell: &Cell) -> Vec<usize> {
    let pts: Vec<Point> = cell
        .verts()
        .iter()
        .map(|v| complex.point(*v).clone())
        .collect();
    let chart = AffineChart::from_points(&pts);
    let local: Vec<Vec<Rat>> = pts
        .iter()
        .map(|p| chart.to_intrinsic(p).expect("cell points lie in their chart"))
        .collect();
    let k = rat(local.len() as i64);
    let cx = local.iter().fold(rat(0), |a, p| a + &p[0]) / &k;
    let cy = local.iter().fold(rat(0), |a, p| a + &p[1]) / &k;
    let mut idx: Vec<usize> = (0..local.len()).collect();
    let half = |i: usize| -> u8 {
        let dy = &local[i][1] - &cy;
        let dx = &local[i][0] - &cx;
        if dy > rat(0) || (dy == rat(0) && dx > rat(0)) {
            0
        } else {
            1
        }
    };
    idx.sort_by(|&a, &b| {
        half(a).cmp(&half(b)).then_with(|| {
            let ax = &local[a][0] - &cx;
            let ay = &local[a][1] - &cy;
            let bx = &local[b][0] - &cx;
            let by = &local[b][1] - &cy;
            // a before b iff cross(a, b) > 0.
            (&bx * &ay).cmp(&(&ax * &by))
        })
    });
    idx.into_iter().map(|i| cell.verts()[i]).collect()
}

/// OFF mesh of a complex of dimension at most three: all two-dimensional
/// cells become faces (for one-dimensional complexes, the edges do).
pub fn to_off(complex: &PolyComplex) -> Result<String, String> {
    if complex.ambient_dim() > 3 {
        return Err(format!(
            "OFF export supports ambient dimension at most 3, got {}",
            complex.ambient_dim()
        ));
    }
    let ids = complex.vertex_ids();
    let index: std::collections::BTreeMap<usize, usize> =
        ids.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let faces: Vec<Vec<usize>> = if complex.max_dim() >= 2 {
        complex
            .cells_of_dim(2)
            .into_iter()
            .map(|c| cyclic_order(complex, c).iter().map(|v| index[v]).collect())
            .collect()
    } else {
        complex
            .cells_of_dim(1)
            .into_iter()
            .map(|c| c.verts().iter().map(|v| index[v]).collect())
            .collect()
    };
    let edge_count = complex.cells_of_dim(1).len();
    let mut out = String::from("OFF\n");
    out.push_str(&format!("{} {} {}\n", ids.len(), faces.len(), edge_count));
    for v in &ids {
        let p = complex.point(*v);
        let coord = |i: usize| {
            if i < p.len() {
                fmt(&p[i])
            } else {
                "0".to_string()
            }
        };
        out.push_str(&format!("{} {} {}\n", coord(0), coord(1), coord(2)));
    }
    for f in &faces {
        out.push_str(&f.len().to_string());
        for v in f {
            out.push_str(&format!(" {v}"));
        }
        out.push('\n');
    }
    Ok(out)
}

/// SVG drawing of a planar complex: filled two-cells plus stroked edges.
pub fn to_svg(complex: &PolyComplex) -> Result<String, String> {
    if complex.ambient_dim() > 2 {
        return Err(format!(
            "SVG export supports ambient dimension at most 2, got {}",
            complex.ambient_dim()
        ));
    }
    let pts: Vec<&Point> = complex.vertices().values().collect();
    if pts.is_empty() {
        return Err("empty complex".into());
    }
    let coord = |p: &Point, i: usize| -> Rat {
        if i < p.len() {
            p[i].clone()
        } else {
            rat(0)
        }
    };
    let xs: Vec<Rat> = pts.iter().map(|p| coord(p, 0)).collect();
    let ys: Vec<Rat> = pts.iter().map(|p| coord(p, 1)).collect();
    let min_x = xs.iter().min().unwrap().clone();
    let max_x = xs.iter().max().unwrap().clone();
    let min_y = ys.iter().min().unwrap().clone();
    let max_y = ys.iter().max().unwrap().clone();
    let margin = polytri::rat::ratio(1, 2);
    let vb = format!(
        "{} {} {} {}",
        fmt(&(&min_x - &margin)),
        fmt(&(-&max_y - &margin)),
        fmt(&(&max_x - &min_x + &margin + &margin)),
        fmt(&(&max_y - &min_y + &margin + &margin)),
    );
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{vb}\" width=\"480\" height=\"480\">\n"
    );
    // SVG's y axis points down; write mirrored y coordinates.
    for cell in complex.cells_of_dim(2) {
        let cyc = cyclic_order(complex, cell);
        let points: Vec<String> = cyc
            .iter()
            .map(|v| {
                let p = complex.point(*v);
                format!("{},{}", fmt(&coord(p, 0)), fmt(&-coord(p, 1)))
            })
            .collect();
        out.push_str(&format!(
            "  <polygon points=\"{}\" fill=\"#cfe2f3\" stroke=\"none\"/>\n",
            points.join(" ")
        ));
    }
    for cell in complex.cells_of_dim(1) {
        let a = complex.point(cell.verts()[0]);
        let b = complex.point(cell.verts()[1]);
        out.push_str(&format!(
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#1f3552\" stroke-width=\"0.02\"/>\n",
            fmt(&coord(a, 0)),
            fmt(&-coord(a, 1)),
            fmt(&coord(b, 0)),
            fmt(&-coord(b, 1)),
        ));
    }
    for p in complex.vertices().values() {
        out.push_str(&format!(
            "  <circle cx=\"{}\" cy=\"{}\" r=\"0.04\" fill=\"#1f3552\"/>\n",
            fmt(&coord(p, 0)),
            fmt(&-coord(p, 1)),
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}
