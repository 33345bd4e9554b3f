//! Dense symmetric matrices, points of the unit simplex and simplex grids.
//!
//! Everything here is small and dense: the toolkit targets matrix dimensions
//! of at most about ten, where exact enumeration over simplex grids is cheap.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entries of a simplex point at or below this value count as zero.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

/// Tolerance on `|sum(t) - 1|` for a valid simplex point.
pub const SIMPLEX_SUM_TOL: f64 = 1e-12;

/// Default cap on the number of points a [`SimplexGrid`] may hold.
pub const DEFAULT_GRID_CAP: usize = 2_000_000;

/// Asymmetry tolerated (relative to the largest entry) by [`SymMatrix::from_rows`].
const STRICT_SYMMETRY_TOL: f64 = 1e-12;

/// A real symmetric `p x p` matrix stored densely in row-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<f64>>", try_from = "Vec<Vec<f64>>")]
pub struct SymMatrix {
    p: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(p: usize) -> Self {
        assert!(p >= 1, "matrix dimension must be positive");
        SymMatrix { p, data: vec![0.0; p * p] }
    }

    pub fn identity(p: usize) -> Self {
        let mut m = Self::zeros(p);
        for i in 0..p {
            m.data[i * p + i] = 1.0;
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.data[i * d.len() + i] = v;
        }
        m
    }

    /// `v vᵀ`.
    pub fn outer(v: &[f64]) -> Self {
        let p = v.len();
        let mut m = Self::zeros(p);
        for i in 0..p {
            for j in 0..p {
                m.data[i * p + j] = v[i] * v[j];
            }
        }
        m
    }

    /// Builds a matrix from rows, requiring symmetry up to roundoff.
    ///
    /// Deviations up to `1e-12` relative to the largest entry are averaged
    /// away; anything larger is rejected.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let (m, _) = Self::from_rows_tolerant(rows, STRICT_SYMMETRY_TOL)?;
        Ok(m)
    }

    /// Builds a matrix from rows, averaging `(M + Mᵀ)/2`.
    ///
    /// Returns the largest absolute asymmetry seen. Fails if that asymmetry
    /// exceeds `max_asymmetry` scaled by `max(1, max |M_ij|)`.
    pub fn from_rows_tolerant(rows: &[Vec<f64>], max_asymmetry: f64) -> Result<(Self, f64)> {
        let p = rows.len();
        if p == 0 {
            return Err(Error::InvalidArgument("matrix must have at least one row".into()));
        }
        for r in rows {
            if r.len() != p {
                return Err(Error::DimensionMismatch { expected: p, found: r.len() });
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("matrix entries must be finite".into()));
            }
        }
        let scale = rows.iter().flat_map(|r| r.iter()).fold(1.0_f64, |acc, v| acc.max(v.abs()));
        let mut worst = 0.0_f64;
        let mut worst_at = (0, 0);
        let mut data = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..p {
                let dev = (rows[i][j] - rows[j][i]).abs();
                if dev > worst {
                    worst = dev;
                    worst_at = (i, j);
                }
                data[i * p + j] = 0.5 * (rows[i][j] + rows[j][i]);
            }
        }
        if worst > max_asymmetry * scale {
            return Err(Error::NotSymmetric { row: worst_at.0, col: worst_at.1, deviation: worst });
        }
        Ok((SymMatrix { p, data }, worst))
    }

    /// Symmetric part `(M + Mᵀ)/2` of a general square matrix.
    pub fn symmetric_part(m: &Mat) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::DimensionMismatch { expected: m.rows(), found: m.cols() });
        }
        let p = m.rows();
        let mut data = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..p {
                data[i * p + j] = 0.5 * (m.get(i, j) + m.get(j, i));
            }
        }
        Ok(SymMatrix { p, data })
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.p + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.p).map(|r| r.to_vec()).collect()
    }

    /// Sets `M[i][j]` and `M[j][i]` together.
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.p + j] = v;
        self.data[j * self.p + i] = v;
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        SymMatrix { p: self.p, data: self.data.iter().map(|v| alpha * v).collect() }
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &SymMatrix) -> Result<()> {
        check_dim(self.p, other.p)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.p, v.len())?;
        Ok(self.data.chunks(self.p).map(|row| dot(row, v)).collect())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn to_mat(&self) -> Mat {
        Mat { rows: self.p, cols: self.p, data: self.data.clone() }
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = DMatrix::from_row_slice(self.p, self.p, &self.data);
        let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Self {
        m.rows()
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        SymMatrix::from_rows(&rows)
    }
}

/// A general dense real matrix in row-major order (factor blocks, `W` blocks).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "MatRepr", try_from = "MatRepr")]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Wire form of [`Mat`]: explicit shape so zero-column factors survive a round trip.
#[derive(Serialize, Deserialize)]
struct MatRepr {
    rows: usize,
    cols: usize,
    data: Vec<Vec<f64>>,
}

impl From<Mat> for MatRepr {
    fn from(m: Mat) -> Self {
        let data = (0..m.rows).map(|i| m.row(i).to_vec()).collect();
        MatRepr { rows: m.rows, cols: m.cols, data }
    }
}

impl TryFrom<MatRepr> for Mat {
    type Error = Error;

    fn try_from(r: MatRepr) -> Result<Self> {
        if r.data.len() != r.rows {
            return Err(Error::DimensionMismatch { expected: r.rows, found: r.data.len() });
        }
        let mut data = Vec::with_capacity(r.rows * r.cols);
        for row in &r.data {
            if row.len() != r.cols {
                return Err(Error::DimensionMismatch { expected: r.cols, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(Mat { rows: r.rows, cols: r.cols, data })
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(p: usize) -> Self {
        SymMatrix::identity(p).to_mat()
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch { expected: c, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(Mat { rows: r, cols: c, data })
    }

    /// Matrix whose columns are the given vectors, all of length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Result<Self> {
        let cols = columns.len();
        let mut m = Mat::zeros(rows, cols);
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::DimensionMismatch { expected: rows, found: col.len() });
            }
            for (i, &v) in col.iter().enumerate() {
                m.data[i * cols + j] = v;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn scaled(&self, alpha: f64) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| alpha * v).collect() }
    }

    pub fn sub(&self, other: &Mat) -> Result<Mat> {
        check_dim(self.rows, other.rows)?;
        check_dim(self.cols, other.cols)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Mat { rows: self.rows, cols: self.cols, data })
    }

    /// `self * otherᵀ`; both operands need the same column count.
    pub fn mul_transpose(&self, other: &Mat) -> Result<Mat> {
        check_dim(self.cols, other.cols)?;
        let mut out = Mat::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            for j in 0..other.rows {
                out.data[i * other.rows + j] = dot(self.row(i), other.row(j));
            }
        }
        Ok(out)
    }

    /// `self * selfᵀ`.
    pub fn gram(&self) -> SymMatrix {
        let p = self.rows;
        let mut data = vec![0.0; p * p];
        for i in 0..p {
            for j in i..p {
                let v = dot(self.row(i), self.row(j));
                data[i * p + j] = v;
                data[j * p + i] = v;
            }
        }
        SymMatrix { p, data }
    }

    /// Stacks `self` on top of `other` (same column count).
    pub fn vstack(&self, other: &Mat) -> Result<Mat> {
        check_dim(self.cols, other.cols)?;
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Mat { rows: self.rows + other.rows, cols: self.cols, data })
    }

    /// Appends the columns of `other` to `self` (same row count).
    pub fn hstack(&self, other: &Mat) -> Result<Mat> {
        check_dim(self.rows, other.rows)?;
        let cols = self.cols + other.cols;
        let mut out = Mat::zeros(self.rows, cols);
        for i in 0..self.rows {
            out.data[i * cols..i * cols + self.cols].copy_from_slice(self.row(i));
            out.data[i * cols + self.cols..(i + 1) * cols].copy_from_slice(other.row(i));
        }
        Ok(out)
    }

    /// Smallest entry, `+inf` for an empty matrix.
    pub fn min_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

/// A point of the unit simplex `{t >= 0 : sum(t) = 1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<f64>", try_from = "Vec<f64>")]
pub struct SimplexPoint(Vec<f64>);

impl SimplexPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidSimplexPoint("empty coordinate vector".into()));
        }
        if let Some(v) = coords.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidSimplexPoint(format!("coordinate {v} is negative or not finite")));
        }
        let s: f64 = coords.iter().sum();
        if (s - 1.0).abs() > SIMPLEX_SUM_TOL {
            return Err(Error::InvalidSimplexPoint(format!("coordinates sum to {s}")));
        }
        Ok(SimplexPoint(coords))
    }

    /// Clamps negatives to zero and rescales onto the simplex.
    pub fn normalized(mut coords: Vec<f64>) -> Result<Self> {
        for v in coords.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let s: f64 = coords.iter().sum();
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidSimplexPoint("cannot normalize a zero vector".into()));
        }
        for v in coords.iter_mut() {
            *v /= s;
        }
        SimplexPoint::new(coords)
    }

    /// The `j`-th vertex `e_j` (zero-based).
    pub fn vertex(p: usize, j: usize) -> Self {
        let mut v = vec![0.0; p];
        v[j] = 1.0;
        SimplexPoint(v)
    }

    pub fn barycenter(p: usize) -> Self {
        SimplexPoint(vec![1.0 / p as f64; p])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// Zero-based indices of the entries above [`SUPPORT_THRESHOLD`].
    pub fn support(&self) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(_, v)| **v > SUPPORT_THRESHOLD).map(|(k, _)| k).collect()
    }

    pub fn distance(&self, other: &SimplexPoint) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    pub fn linf_distance(&self, other: &SimplexPoint) -> f64 {
        self.0.iter().zip(&other.0).fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

impl From<SimplexPoint> for Vec<f64> {
    fn from(t: SimplexPoint) -> Self {
        t.0
    }
}

impl TryFrom<Vec<f64>> for SimplexPoint {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        SimplexPoint::new(v)
    }
}

/// All simplex points whose coordinates are multiples of `1/k`.
///
/// Points are listed in descending lexicographic order of their integer
/// compositions, so vertex `e_1` comes first and `e_p` last.
#[derive(Clone, Debug)]
pub struct SimplexGrid {
    p: usize,
    k: usize,
    points: Vec<SimplexPoint>,
}

impl SimplexGrid {
    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn resolution(&self) -> usize {
        self.k
    }

    pub fn points(&self) -> &[SimplexPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Euclidean distance between neighbouring grid points, `sqrt(2)/k`.
    pub fn cell_diameter(&self) -> f64 {
        std::f64::consts::SQRT_2 / self.k as f64
    }
}

/// `binomial(k + p - 1, p - 1)`, saturating.
pub fn grid_point_count(p: usize, k: usize) -> u128 {
    let n = (k + p - 1) as u128;
    let r = (p - 1).min(k) as u128;
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

pub fn simplex_grid(p: usize, k: usize) -> Result<SimplexGrid> {
    simplex_grid_with_cap(p, k, DEFAULT_GRID_CAP)
}

pub fn simplex_grid_with_cap(p: usize, k: usize, cap: usize) -> Result<SimplexGrid> {
    if p == 0 || k == 0 {
        return Err(Error::InvalidArgument(format!("grid needs p >= 1 and k >= 1 (got p={p}, k={k})")));
    }
    let count = grid_point_count(p, k);
    if count > cap as u128 {
        return Err(Error::GridTooFine { count, cap });
    }
    let mut points = Vec::with_capacity(count as usize);
    let mut comp = vec![0usize; p];
    compositions(&mut comp, 0, k, &mut |c| {
        let coords = c.iter().map(|&v| v as f64 / k as f64).collect();
        points.push(SimplexPoint(coords));
    });
    Ok(SimplexGrid { p, k, points })
}

fn compositions(comp: &mut [usize], pos: usize, remaining: usize, emit: &mut dyn FnMut(&[usize])) {
    if pos + 1 == comp.len() {
        comp[pos] = remaining;
        emit(comp);
        return;
    }
    for v in (0..=remaining).rev() {
        comp[pos] = v;
        compositions(comp, pos + 1, remaining - v, emit);
    }
}

/// `A • B = trace(AB) = Σ A_ij B_ij`.
pub fn trace_inner(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    check_dim(a.p, b.p)?;
    Ok(dot(&a.data, &b.data))
}

/// `A • W` for a general square `W`; equals `A • sym(W)` when `A` is symmetric.
pub fn trace_inner_general(a: &SymMatrix, w: &Mat) -> Result<f64> {
    check_dim(a.p, w.rows)?;
    check_dim(a.p, w.cols)?;
    Ok(dot(&a.data, &w.data))
}

/// `tᵀ D t`.
pub fn quad_form(d: &SymMatrix, t: &[f64]) -> Result<f64> {
    check_dim(d.p, t.len())?;
    Ok(quad_form_unchecked(d, t))
}

#[inline]
pub(crate) fn quad_form_unchecked(d: &SymMatrix, t: &[f64]) -> f64 {
    let p = d.p;
    let mut acc = 0.0;
    for i in 0..p {
        if t[i] == 0.0 {
            continue;
        }
        let row = &d.data[i * p..(i + 1) * p];
        acc += t[i] * dot(row, t);
    }
    acc
}

/// `uᵀ D v`.
pub fn bilinear_form(d: &SymMatrix, u: &[f64], v: &[f64]) -> Result<f64> {
    check_dim(d.p, u.len())?;
    check_dim(d.p, v.len())?;
    Ok((0..d.p).map(|i| u[i] * dot(&d.data[i * d.p..(i + 1) * d.p], v)).sum())
}

pub fn max_eigenvalue(q: &SymMatrix) -> f64 {
    *q.eigenvalues().last().expect("p >= 1")
}

/// Euclidean distance from `t` to `conv(hull_points)`.
///
/// One or two points use the closed form; larger sets run Wolfe's
/// minimum-norm-point iteration, stopped on a conditional-gradient gap
/// below `1e-12` (relative to the squared diameter of the shifted set).
pub fn dist_to_hull(t: &SimplexPoint, hull_points: &[SimplexPoint]) -> Result<f64> {
    if hull_points.is_empty() {
        return Err(Error::EmptyHull);
    }
    for h in hull_points {
        check_dim(t.dim(), h.dim())?;
    }
    let shifted: Vec<Vec<f64>> =
        hull_points.iter().map(|h| h.coords().iter().zip(t.coords()).map(|(a, b)| a - b).collect()).collect();
    Ok(min_norm_in_hull(&shifted).sqrt())
}

/// Squared norm of the minimum-norm point of `conv(points)`.
fn min_norm_in_hull(points: &[Vec<f64>]) -> f64 {
    match points.len() {
        1 => dot(&points[0], &points[0]),
        2 => {
            let (a, b) = (&points[0], &points[1]);
            let d: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
            let dd = dot(&d, &d);
            let s = if dd > 0.0 { (-dot(a, &d) / dd).clamp(0.0, 1.0) } else { 0.0 };
            a.iter().zip(&d).map(|(x, y)| (x + s * y).powi(2)).sum()
        }
        _ => wolfe_min_norm(points),
    }
}

fn wolfe_min_norm(points: &[Vec<f64>]) -> f64 {
    const MAX_MAJOR: usize = 500;
    let dim = points[0].len();
    let scale = points.iter().map(|q| dot(q, q)).fold(0.0_f64, f64::max).max(1e-300);
    let gap_tol = 1e-12 * scale;
    let combine = |set: &[usize], w: &[f64]| -> Vec<f64> {
        let mut x = vec![0.0; dim];
        for (&i, &wi) in set.iter().zip(w) {
            for (xk, qk) in x.iter_mut().zip(&points[i]) {
                *xk += wi * qk;
            }
        }
        x
    };

    let first =
        (0..points.len()).min_by(|&a, &b| dot(&points[a], &points[a]).total_cmp(&dot(&points[b], &points[b]))).unwrap();
    let mut set = vec![first];
    let mut weights = vec![1.0];
    let mut x = points[first].clone();

    for _ in 0..MAX_MAJOR {
        let xx = dot(&x, &x);
        if xx <= 1e-30 * scale {
            return 0.0;
        }
        let (j, xq) = (0..points.len()).map(|i| (i, dot(&x, &points[i]))).min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        if xx - xq <= gap_tol || set.contains(&j) {
            return xx;
        }
        set.push(j);
        weights.push(0.0);
        // Minor cycles: move towards the affine minimizer until it is interior.
        loop {
            let alpha = match affine_min_norm(points, &set) {
                Some(a) => a,
                None => {
                    // Affinely dependent set; drop the newest point and stop here.
                    set.pop();
                    weights.pop();
                    return dot(&x, &x);
                }
            };
            if alpha.iter().all(|&a| a > 1e-14) {
                weights = alpha;
                x = combine(&set, &weights);
                break;
            }
            let mut theta = 1.0_f64;
            for (w, a) in weights.iter().zip(&alpha) {
                if *a <= 1e-14 && w - a > 0.0 {
                    theta = theta.min(w / (w - a));
                }
            }
            for (w, a) in weights.iter_mut().zip(&alpha) {
                *w = theta * a + (1.0 - theta) * *w;
            }
            let mut k = 0;
            while k < set.len() {
                if weights[k] <= 1e-14 {
                    set.remove(k);
                    weights.remove(k);
                } else {
                    k += 1;
                }
            }
            let total: f64 = weights.iter().sum();
            for w in weights.iter_mut() {
                *w /= total;
            }
            x = combine(&set, &weights);
            if set.len() == 1 {
                break;
            }
        }
    }
    dot(&x, &x)
}

/// Coefficients of the minimum-norm point of the affine hull of `points[set]`.
fn affine_min_norm(points: &[Vec<f64>], set: &[usize]) -> Option<Vec<f64>> {
    let s = set.len();
    let n = s + 1;
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n];
    for (r, &i) in set.iter().enumerate() {
        for (c, &j) in set.iter().enumerate() {
            a[r * n + c] = dot(&points[i], &points[j]);
        }
        a[r * n + s] = 1.0;
        a[s * n + r] = 1.0;
    }
    b[s] = 1.0;
    let sol = solve_dense(&mut a, &mut b, n)?;
    Some(sol[..s].to_vec())
}

/// Gaussian elimination with partial pivoting; `None` when singular.
pub(crate) fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    let scale = a.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())).max(1e-300);
    for col in 0..n {
        let piv = (col..n).max_by(|&r1, &r2| a[r1 * n + col].abs().total_cmp(&a[r2 * n + col].abs()))?;
        if a[piv * n + col].abs() <= 1e-13 * scale {
            return None;
        }
        if piv != col {
            for c in 0..n {
                a.swap(piv * n + c, col * n + c);
            }
            b.swap(piv, col);
        }
        for r in col + 1..n {
            let f = a[r * n + col] / a[col * n + col];
            if f != 0.0 {
                for c in col..n {
                    a[r * n + c] -= f * a[col * n + c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for c in r + 1..n {
            s -= a[r * n + c] * x[c];
        }
        x[r] = s / a[r * n + r];
    }
    Some(x)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn sp(v: &[f64]) -> SimplexPoint {
        SimplexPoint::new(v.to_vec()).unwrap()
    }

    #[test]
    fn trace_inner_examples() {
        let i2 = SymMatrix::identity(2);
        assert_eq!(trace_inner(&i2, &i2).unwrap(), 2.0);
        assert_eq!(trace_inner(&i2, &SymMatrix::zeros(2)).unwrap(), 0.0);
        let a = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 3.0]]).unwrap();
        let b = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(trace_inner(&a, &b).unwrap(), 4.0);
        assert!(matches!(trace_inner(&a, &SymMatrix::identity(3)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn quad_form_examples() {
        assert_eq!(quad_form(&SymMatrix::identity(2), &[1.0, 0.0]).unwrap(), 1.0);
        let d = SymMatrix::from_rows(&[vec![1.0, -2.0], vec![-2.0, 1.0]]).unwrap();
        assert_abs_diff_eq!(quad_form(&d, &[0.5, 0.5]).unwrap(), -0.5, epsilon = 1e-15);
        let horn = crate::cones::horn_matrix();
        assert_abs_diff_eq!(quad_form(&horn, &[0.2; 5]).unwrap(), 0.2, epsilon = 1e-15);
        assert!(quad_form(&d, &[1.0]).is_err());
    }

    #[test]
    fn grid_examples() {
        let g = simplex_grid(2, 2).unwrap();
        let pts: Vec<Vec<f64>> = g.points().iter().map(|p| p.coords().to_vec()).collect();
        assert_eq!(pts, vec![vec![1.0, 0.0], vec![0.5, 0.5], vec![0.0, 1.0]]);
        let g = simplex_grid(3, 1).unwrap();
        assert_eq!(g.len(), 3);
        for j in 0..3 {
            assert_eq!(g.points()[j], SimplexPoint::vertex(3, j));
        }
        assert_eq!(simplex_grid(3, 4).unwrap().len(), 15);
        assert!(matches!(simplex_grid_with_cap(6, 40, 1000), Err(Error::GridTooFine { .. })));
        assert!(simplex_grid(0, 3).is_err());
    }

    #[test]
    fn grid_counts_match_binomial() {
        for p in 1..=6 {
            for k in 1..=12 {
                let g = simplex_grid(p, k).unwrap();
                assert_eq!(g.len() as u128, grid_point_count(p, k), "p={p} k={k}");
                for j in 0..p {
                    assert!(g.points().contains(&SimplexPoint::vertex(p, j)));
                }
            }
        }
    }

    #[test]
    fn eigen_examples() {
        assert_abs_diff_eq!(max_eigenvalue(&SymMatrix::identity(3)), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(max_eigenvalue(&SymMatrix::diag(&[2.0, 1.0])), 2.0, epsilon = 1e-12);
        let swap = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_abs_diff_eq!(max_eigenvalue(&swap), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn hull_distance_examples() {
        let e1 = sp(&[1.0, 0.0]);
        let e2 = sp(&[0.0, 1.0]);
        assert_eq!(dist_to_hull(&e1, std::slice::from_ref(&e1)).unwrap(), 0.0);
        assert_abs_diff_eq!(dist_to_hull(&e2, std::slice::from_ref(&e1)).unwrap(), 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(dist_to_hull(&sp(&[0.5, 0.5]), &[e1, e2]).unwrap(), 0.0, epsilon = 1e-15);
        assert!(matches!(dist_to_hull(&sp(&[1.0]), &[]), Err(Error::EmptyHull)));
    }

    #[test]
    fn hull_distance_against_face_projection() {
        // Distance from the barycenter of the 3-simplex to the facet t_4 = 0
        // is the distance to that facet's barycenter.
        let facet: Vec<SimplexPoint> = (0..3).map(|j| SimplexPoint::vertex(4, j)).collect();
        let t = SimplexPoint::barycenter(4);
        let expected = t.distance(&sp(&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]));
        assert_abs_diff_eq!(dist_to_hull(&t, &facet).unwrap(), expected, epsilon = 1e-10);
    }

    #[test]
    fn symmetry_enforced() {
        assert!(SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.5, 1.0]]).is_err());
        let m = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0 + 1e-14, 1.0]]).unwrap();
        assert_eq!(m.get(0, 1), m.get(1, 0));
    }

    fn arb_sym(p: usize) -> impl Strategy<Value = SymMatrix> {
        proptest::collection::vec(-5.0..5.0f64, p * p).prop_map(move |v| {
            let rows: Vec<Vec<f64>> =
                (0..p).map(|i| (0..p).map(|j| 0.5 * (v[i * p + j] + v[j * p + i])).collect()).collect();
            SymMatrix::from_rows(&rows).unwrap()
        })
    }

    fn arb_point(p: usize) -> impl Strategy<Value = SimplexPoint> {
        proptest::collection::vec(0.0..1.0f64, p).prop_filter_map("zero vector", |v| SimplexPoint::normalized(v).ok())
    }

    proptest! {
        #[test]
        fn trace_inner_bilinear(a in arb_sym(4), b in arb_sym(4), c in arb_sym(4)) {
            prop_assert_eq!(trace_inner(&a, &b).unwrap(), trace_inner(&b, &a).unwrap());
            let lhs = trace_inner(&a, &b.add(&c).unwrap()).unwrap();
            let rhs = trace_inner(&a, &b).unwrap() + trace_inner(&a, &c).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }

        #[test]
        fn quad_form_is_trace_with_outer(d in arb_sym(5), t in proptest::collection::vec(0.0..3.0f64, 5)) {
            let q = quad_form(&d, &t).unwrap();
            let r = trace_inner(&d, &SymMatrix::outer(&t)).unwrap();
            prop_assert!((q - r).abs() <= 1e-12 * (1.0 + q.abs()));
        }

        #[test]
        fn hull_distance_properties(
            t in arb_point(4),
            hull in proptest::collection::vec(arb_point(4), 1..6),
            extra in arb_point(4),
        ) {
            let d = dist_to_hull(&t, &hull).unwrap();
            prop_assert!(d >= 0.0);
            for h in &hull {
                prop_assert!(dist_to_hull(h, &hull).unwrap() <= 1e-8);
            }
            let mut bigger = hull.clone();
            bigger.push(extra);
            prop_assert!(dist_to_hull(&t, &bigger).unwrap() <= d + 1e-9);
            // never farther than the nearest listed point
            let nearest = hull.iter().map(|h| t.distance(h)).fold(f64::INFINITY, f64::min);
            prop_assert!(d <= nearest + 1e-12);
        }
    }
}
