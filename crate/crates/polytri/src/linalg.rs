//! Dense exact-rational linear algebra, plus the integer normal forms used
//! for lattice computations (Smith normal form, saturations, preimages).

#![allow(clippy::needless_range_loop)] // in-place pivot kernels

use crate::rat::Rat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// A point (or vector) with exact rational coordinates.
pub type Point = Vec<Rat>;

pub fn vec_add(a: &[Rat], b: &[Rat]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[Rat], b: &[Rat]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_scale(a: &[Rat], s: &Rat) -> Point {
    a.iter().map(|x| x * s).collect()
}

pub fn vec_dot(a: &[Rat], b: &[Rat]) -> Rat {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(Rat::zero(), |acc, (x, y)| acc + x * y)
}

pub fn vec_is_zero(a: &[Rat]) -> bool {
    a.iter().all(|x| x.is_zero())
}

pub fn zero_vec(n: usize) -> Point {
    vec![Rat::zero(); n]
}

/// Dense rational matrix, row major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Mat {
    rows: Vec<Vec<Rat>>,
}

impl Mat {
    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        if let Some(w) = rows.first().map(Vec::len) {
            assert!(rows.iter().all(|r| r.len() == w));
        }
        Mat { rows }
    }

    pub fn from_cols(cols: &[Vec<Rat>]) -> Self {
        let h = cols.first().map(Vec::len).unwrap_or(0);
        let rows = (0..h)
            .map(|i| cols.iter().map(|c| c[i].clone()).collect())
            .collect();
        Mat { rows }
    }

    pub fn zeros(r: usize, c: usize) -> Self {
        Mat {
            rows: vec![vec![Rat::zero(); c]; r],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.rows[i][i] = Rat::one();
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.rows.first().map(Vec::len).unwrap_or(0)
    }

    pub fn at(&self, i: usize, j: usize) -> &Rat {
        &self.rows[i][j]
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.rows[i]
    }

    pub fn col(&self, j: usize) -> Vec<Rat> {
        self.rows.iter().map(|r| r[j].clone()).collect()
    }

    pub fn transpose(&self) -> Mat {
        let (r, c) = (self.nrows(), self.ncols());
        let mut t = Mat::zeros(c, r);
        for i in 0..r {
            for j in 0..c {
                t.rows[j][i] = self.rows[i][j].clone();
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.ncols(), v.len());
        self.rows.iter().map(|r| vec_dot(r, v)).collect()
    }

    pub fn mul_mat(&self, other: &Mat) -> Mat {
        assert_eq!(self.ncols(), other.nrows());
        let mut out = Mat::zeros(self.nrows(), other.ncols());
        for i in 0..self.nrows() {
            for j in 0..other.ncols() {
                let mut acc = Rat::zero();
                for k in 0..self.ncols() {
                    acc += &self.rows[i][k] * &other.rows[k][j];
                }
                out.rows[i][j] = acc;
            }
        }
        out
    }

    /// Reduced row echelon form; returns the pivot column of each pivot row.
    pub fn rref(&self) -> (Mat, Vec<usize>) {
        let mut m = self.clone();
        let (r, c) = (m.nrows(), m.ncols());
        let mut pivots = Vec::new();
        let mut lead = 0;
        for row in 0..r {
            while lead < c {
                if let Some(p) = (row..r).find(|&i| !m.rows[i][lead].is_zero()) {
                    m.rows.swap(row, p);
                    let inv = m.rows[row][lead].recip();
                    for j in lead..c {
                        let v = &m.rows[row][j] * &inv;
                        m.rows[row][j] = v;
                    }
                    for i in 0..r {
                        if i != row && !m.rows[i][lead].is_zero() {
                            let f = m.rows[i][lead].clone();
                            for j in lead..c {
                                let v = &m.rows[i][j] - &f * &m.rows[row][j];
                                m.rows[i][j] = v;
                            }
                        }
                    }
                    pivots.push(lead);
                    lead += 1;
                    break;
                }
                lead += 1;
            }
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn det(&self) -> Rat {
        assert_eq!(self.nrows(), self.ncols());
        let n = self.nrows();
        let mut m = self.rows.clone();
        let mut det = Rat::one();
        for k in 0..n {
            let Some(p) = (k..n).find(|&i| !m[i][k].is_zero()) else {
                return Rat::zero();
            };
            if p != k {
                m.swap(p, k);
                det = -det;
            }
            det *= &m[k][k];
            let inv = m[k][k].recip();
            for i in k + 1..n {
                if !m[i][k].is_zero() {
                    let f = &m[i][k] * &inv;
                    for j in k..n {
                        let v = &m[i][j] - &f * &m[k][j];
                        m[i][j] = v;
                    }
                }
            }
        }
        det
    }

    /// Any solution of `self * x = rhs`, with free variables set to zero.
    pub fn solve(&self, rhs: &[Rat]) -> Option<Vec<Rat>> {
        assert_eq!(self.nrows(), rhs.len());
        let mut aug = self.clone();
        for (i, r) in aug.rows.iter_mut().enumerate() {
            r.push(rhs[i].clone());
        }
        let c = self.ncols();
        let (red, pivots) = aug.rref();
        // Inconsistent iff a pivot sits in the rhs column.
        if pivots.contains(&c) {
            return None;
        }
        let mut x = vec![Rat::zero(); c];
        for (row, &p) in pivots.iter().enumerate() {
            x[p] = red.rows[row][c].clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Mat> {
        assert_eq!(self.nrows(), self.ncols());
        let n = self.nrows();
        let mut aug = self.clone();
        for (i, r) in aug.rows.iter_mut().enumerate() {
            for j in 0..n {
                r.push(if i == j { Rat::one() } else { Rat::zero() });
            }
        }
        let (red, pivots) = aug.rref();
        if pivots.len() != n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
            return None;
        }
        Some(Mat::from_rows(
            red.rows.into_iter().map(|r| r[n..].to_vec()).collect(),
        ))
    }

    /// Basis of the right nullspace.
    pub fn nullspace(&self) -> Vec<Vec<Rat>> {
        let c = self.ncols();
        let (red, pivots) = self.rref();
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        let mut basis = Vec::new();
        for free in (0..c).filter(|j| !pivot_set.contains(j)) {
            let mut v = vec![Rat::zero(); c];
            v[free] = Rat::one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -red.rows[row][free].clone();
            }
            basis.push(v);
        }
        basis
    }
}

/// Solves for the affine function `x -> coeffs . x + constant` taking the
/// given value at each point. Any solution is returned; the input must be
/// affinely consistent.
pub fn affine_fn_through(points: &[(Point, Rat)]) -> Option<(Vec<Rat>, Rat)> {
    let n = points[0].0.len();
    let rows: Vec<Vec<Rat>> = points
        .iter()
        .map(|(p, _)| {
            let mut r = p.clone();
            r.push(Rat::one());
            r
        })
        .collect();
    let rhs: Vec<Rat> = points.iter().map(|(_, v)| v.clone()).collect();
    let sol = Mat::from_rows(rows).solve(&rhs)?;
    let (coeffs, constant) = sol.split_at(n);
    Some((coeffs.to_vec(), constant[0].clone()))
}

/// Affine coordinates of `p` with respect to an affine basis: the unique
/// `lambda` with `sum lambda_i b_i = p` and `sum lambda_i = 1`.
pub fn affine_coords(basis: &[Point], p: &[Rat]) -> Option<Vec<Rat>> {
    let n = p.len();
    let mut rows: Vec<Vec<Rat>> = (0..n)
        .map(|i| basis.iter().map(|b| b[i].clone()).collect())
        .collect();
    rows.push(vec![Rat::one(); basis.len()]);
    let mut rhs = p.to_vec();
    rhs.push(Rat::one());
    Mat::from_rows(rows).solve(&rhs)
}

// ---------------------------------------------------------------------------
// Integer matrices and normal forms
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IMat {
    rows: Vec<Vec<BigInt>>,
}

impl IMat {
    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Self {
        if let Some(w) = rows.first().map(Vec::len) {
            assert!(rows.iter().all(|r| r.len() == w));
        }
        IMat { rows }
    }

    pub fn identity(n: usize) -> Self {
        let mut rows = vec![vec![BigInt::zero(); n]; n];
        for (i, r) in rows.iter_mut().enumerate() {
            r[i] = BigInt::one();
        }
        IMat { rows }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.rows.first().map(Vec::len).unwrap_or(0)
    }

    pub fn at(&self, i: usize, j: usize) -> &BigInt {
        &self.rows[i][j]
    }

    pub fn to_mat(&self) -> Mat {
        Mat::from_rows(
            self.rows
                .iter()
                .map(|r| r.iter().map(|x| Rat::from_integer(x.clone())).collect())
                .collect(),
        )
    }

    pub fn mul(&self, other: &IMat) -> IMat {
        assert_eq!(self.ncols(), other.nrows());
        let mut rows = vec![vec![BigInt::zero(); other.ncols()]; self.nrows()];
        for i in 0..self.nrows() {
            for j in 0..other.ncols() {
                let mut acc = BigInt::zero();
                for k in 0..self.ncols() {
                    acc += &self.rows[i][k] * &other.rows[k][j];
                }
                rows[i][j] = acc;
            }
        }
        IMat { rows }
    }
}

/// Smith normal form: returns `(u, s, v)` with `u * m * v = s`, `u` and `v`
/// unimodular, `s` diagonal with each entry dividing the next.
pub fn smith_normal_form(m: &IMat) -> (IMat, IMat, IMat) {
    let (r, c) = (m.nrows(), m.ncols());
    let mut s = m.clone();
    let mut u = IMat::identity(r);
    let mut v = IMat::identity(c);

    fn swap_rows(s: &mut IMat, u: &mut IMat, a: usize, b: usize) {
        s.rows.swap(a, b);
        u.rows.swap(a, b);
    }
    fn swap_cols(s: &mut IMat, v: &mut IMat, a: usize, b: usize) {
        for row in &mut s.rows {
            row.swap(a, b);
        }
        for row in &mut v.rows {
            row.swap(a, b);
        }
    }
    // row[a] -= q * row[b]
    fn row_sub(s: &mut IMat, u: &mut IMat, a: usize, b: usize, q: &BigInt) {
        for j in 0..s.ncols() {
            let t = &s.rows[a][j] - q * &s.rows[b][j];
            s.rows[a][j] = t;
        }
        for j in 0..u.ncols() {
            let t = &u.rows[a][j] - q * &u.rows[b][j];
            u.rows[a][j] = t;
        }
    }
    // col[a] -= q * col[b]
    fn col_sub(s: &mut IMat, v: &mut IMat, a: usize, b: usize, q: &BigInt) {
        for i in 0..s.nrows() {
            let t = &s.rows[i][a] - q * &s.rows[i][b];
            s.rows[i][a] = t;
        }
        for i in 0..v.nrows() {
            let t = &v.rows[i][a] - q * &v.rows[i][b];
            v.rows[i][a] = t;
        }
    }

    let n = r.min(c);
    for t in 0..n {
        'outer: loop {
            // Find the nonzero entry of smallest absolute value in the block.
            let mut best: Option<(usize, usize)> = None;
            for i in t..r {
                for j in t..c {
                    if !s.rows[i][j].is_zero()
                        && best
                            .map(|(bi, bj)| s.rows[i][j].abs() < s.rows[bi][bj].abs())
                            .unwrap_or(true)
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else {
                return (u, s, v);
            };
            if bi != t {
                swap_rows(&mut s, &mut u, bi, t);
            }
            if bj != t {
                swap_cols(&mut s, &mut v, bj, t);
            }
            // Reduce column t.
            for i in t + 1..r {
                if !s.rows[i][t].is_zero() {
                    let q = Integer::div_floor(&s.rows[i][t], &s.rows[t][t]);
                    row_sub(&mut s, &mut u, i, t, &q);
                }
            }
            if (t + 1..r).any(|i| !s.rows[i][t].is_zero()) {
                continue;
            }
            // Reduce row t.
            for j in t + 1..c {
                if !s.rows[t][j].is_zero() {
                    let q = Integer::div_floor(&s.rows[t][j], &s.rows[t][t]);
                    col_sub(&mut s, &mut v, j, t, &q);
                }
            }
            if (t + 1..c).any(|j| !s.rows[t][j].is_zero()) {
                continue;
            }
            // Enforce divisibility of the trailing block.
            for i in t + 1..r {
                for j in t + 1..c {
                    if !(&s.rows[i][j] % &s.rows[t][t]).is_zero() {
                        // Add row i to row t and restart this pivot.
                        let minus_one = -BigInt::one();
                        row_sub(&mut s, &mut u, t, i, &minus_one);
                        continue 'outer;
                    }
                }
            }
            if s.rows[t][t].is_negative() {
                let q = BigInt::from(2);
                // Negate row t: row_t -= 2*row_t.
                for j in 0..c {
                    let x = &s.rows[t][j] - &q * &s.rows[t][j];
                    s.rows[t][j] = x;
                }
                for j in 0..r {
                    let x = &u.rows[t][j] - &q * &u.rows[t][j];
                    u.rows[t][j] = x;
                }
            }
            break;
        }
    }
    (u, s, v)
}

/// Clears denominators of a rational vector, returning a primitive integer
/// vector that is a positive multiple of the input. Zero maps to zero.
pub fn primitive_integer_vector(v: &[Rat]) -> Vec<BigInt> {
    let mut l = BigInt::one();
    for x in v {
        l = l.lcm(x.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * &l / x.denom()).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

/// Basis (as ambient vectors) of the intersection of the lattice spanned by
/// the columns of `basis` with the rational subspace spanned by `span`.
pub fn lattice_intersect_subspace(basis: &Mat, span: &[Point]) -> Vec<Point> {
    let inv = basis.inverse().expect("lattice basis must be nonsingular");
    let coords: Vec<Vec<BigInt>> = span
        .iter()
        .map(|s| primitive_integer_vector(&inv.mul_vec(s)))
        .collect();
    let m = IMat::from_rows(coords);
    let (_, s, v) = smith_normal_form(&m);
    let rank = (0..m.nrows().min(m.ncols()))
        .take_while(|&i| !s.at(i, i).is_zero())
        .count();
    let v_inv = v
        .to_mat()
        .inverse()
        .expect("smith normal form factor is unimodular");
    (0..rank)
        .map(|i| basis.mul_vec(v_inv.row(i)))
        .collect()
}

/// Integer-matrix basis (columns) of the lattice `{u in Z^m : a*u in Z^n}`.
pub fn integer_preimage_basis(a: &Mat) -> Mat {
    let (n, m) = (a.nrows(), a.ncols());
    let mut q = BigInt::one();
    for i in 0..n {
        for j in 0..m {
            q = q.lcm(a.at(i, j).denom());
        }
    }
    let p = IMat::from_rows(
        (0..n)
            .map(|i| {
                (0..m)
                    .map(|j| a.at(i, j).numer() * &q / a.at(i, j).denom())
                    .collect()
            })
            .collect(),
    );
    let (_, s, v) = smith_normal_form(&p);
    let rank = (0..n.min(m)).take_while(|&i| !s.at(i, i).is_zero()).count();
    let mut scale = vec![BigInt::one(); m];
    for (i, sc) in scale.iter_mut().enumerate().take(rank) {
        let g = s.at(i, i).gcd(&q);
        *sc = &q / g;
    }
    // Columns: v * diag(scale)
    let cols: Vec<Vec<Rat>> = (0..m)
        .map(|j| {
            (0..m)
                .map(|i| Rat::from_integer(v.at(i, j) * &scale[j]))
                .collect()
        })
        .collect();
    Mat::from_cols(&cols)
}

/// Square basis matrix of the lattice generated by the given (spanning)
/// columns, or `None` when they do not span the ambient space.
pub fn lattice_from_generators(gens: &[Point]) -> Option<Mat> {
    let n = gens.first()?.len();
    if Mat::from_cols(gens).rank() != n {
        return None;
    }
    // Scale to a common denominator so column operations stay integral.
    let mut l = BigInt::one();
    for g in gens {
        for x in g {
            l = l.lcm(x.denom());
        }
    }
    let m = IMat::from_rows(
        (0..n)
            .map(|i| gens.iter().map(|g| g[i].numer() * &l / g[i].denom()).collect())
            .collect(),
    );
    let (u, s, _) = smith_normal_form(&m);
    let u_inv = u.to_mat().inverse().expect("unimodular");
    // Column lattice of m equals u^-1 * diag(s) Z^n.
    let cols: Vec<Vec<Rat>> = (0..n)
        .map(|j| {
            let d = Rat::from_integer(s.at(j, j).clone());
            u_inv.col(j).iter().map(|x| x * &d / Rat::from_integer(l.clone())).collect()
        })
        .collect();
    Some(Mat::from_cols(&cols))
}
