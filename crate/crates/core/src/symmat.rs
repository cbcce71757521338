//! Dense real symmetric matrices and spectral functional calculus.
//!
//! Eigendecompositions use cyclic Jacobi rotations; every `f(A)` in the crate
//! is `Q diag(f(lambda_i)) Q^T` built from that decomposition.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalarfn::ScalarFunction;

pub const MAX_DIM: usize = 64;

/// Jacobi stops once the off-diagonal Frobenius norm is below this fraction of `|A|_F`.
const JACOBI_REL_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Tolerance used when validating user-supplied states.
const STATE_TOL: f64 = 1e-10;

/// Asymmetry above which matrix files trigger a warning.
pub const ASYMMETRY_WARN: f64 = 1e-9;

fn check_dim(n: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::InvalidDimension(n))
    }
}

/// On-disk layout shared by matrices and states: `{"n": .., "data": [[..], ..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub n: usize,
    pub data: Vec<Vec<f64>>,
}

/// Real symmetric `n x n` matrix, `1 <= n <= 64`, stored row-major.
///
/// Symmetry is exact: every constructor averages `(M + M^T) / 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixFile", into = "MatrixFile")]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl TryFrom<MatrixFile> for SymMatrix {
    type Error = Error;
    fn try_from(file: MatrixFile) -> Result<Self> {
        if file.data.len() != file.n {
            return Err(Error::MatrixFormat(format!(
                "declared n = {} but found {} rows",
                file.n,
                file.data.len()
            )));
        }
        SymMatrix::from_rows(&file.data)
    }
}

impl From<SymMatrix> for MatrixFile {
    fn from(m: SymMatrix) -> Self {
        MatrixFile {
            n: m.n,
            data: m.to_rows(),
        }
    }
}

impl SymMatrix {
    /// Builds from a row-major buffer, symmetrizing.
    pub fn from_vec(n: usize, data: Vec<f64>) -> Result<Self> {
        check_dim(n)?;
        if data.len() != n * n {
            return Err(Error::MatrixFormat(format!("expected {} entries, got {}", n * n, data.len())));
        }
        if let Some(x) = data.iter().find(|x| !x.is_finite()) {
            return Err(Error::MatrixFormat(format!("non-finite entry {x}")));
        }
        let mut m = SymMatrix { n, data };
        m.symmetrize();
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::MatrixFormat(format!("row of length {} in a {n}x{n} matrix", r.len())));
        }
        Self::from_vec(n, rows.concat())
    }

    /// Parses the JSON matrix format; also returns the largest asymmetry
    /// `|m_ij - m_ji|` found before symmetrizing.
    pub fn from_json_str(text: &str) -> Result<(Self, f64)> {
        let file: MatrixFile = serde_json::from_str(text).map_err(|e| Error::MatrixFormat(e.to_string()))?;
        let mut asym: f64 = 0.0;
        for (i, row) in file.data.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                if let Some(y) = file.data.get(j).and_then(|r| r.get(i)) {
                    asym = asym.max((x - y).abs());
                }
            }
        }
        Ok((SymMatrix::try_from(file)?, asym))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("matrix serialization is infallible")
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        check_dim(n)?;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self::from_vec(n, data)
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_fn(n, |_, _| 0.0)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_diag(d: &[f64]) -> Result<Self> {
        Self::from_fn(d.len(), |i, j| if i == j { d[i] } else { 0.0 })
    }

    /// `v v^T`.
    pub fn outer(v: &[f64]) -> Result<Self> {
        Self::from_fn(v.len(), |i, j| v[i] * v[j])
    }

    fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = (self.data[i * n + j] + self.data[j * n + i]) / 2.0;
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    fn same_dim(&self, other: &SymMatrix) -> Result<()> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            })
        }
    }

    fn zip(&self, other: &SymMatrix, f: impl Fn(f64, f64) -> f64) -> Result<SymMatrix> {
        self.same_dim(other)?;
        Ok(SymMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        })
    }

    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> SymMatrix {
        SymMatrix {
            n: self.n,
            data: self.data.iter().map(|x| c * x).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix {
            rows: self.n,
            cols: self.n,
            data: self.data.clone(),
        }
    }

    /// General product `self * other`.
    pub fn matmul(&self, other: &SymMatrix) -> Result<DenseMatrix> {
        self.same_dim(other)?;
        self.to_dense().matmul(&other.to_dense())
    }

    /// `C^T self C`, symmetrized.
    pub fn congruence(&self, c: &DenseMatrix) -> Result<SymMatrix> {
        if c.rows != self.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: c.rows,
            });
        }
        let ac = self.to_dense().matmul(c)?;
        c.transpose().matmul(&ac)?.into_symmetric()
    }

    /// `s self s` for symmetric `s`, symmetrized.
    pub fn sandwich(&self, s: &SymMatrix) -> Result<SymMatrix> {
        self.congruence(&s.to_dense())
    }

    /// Symmetric eigendecomposition by cyclic Jacobi rotations.
    pub fn eig(&self) -> Result<Spectrum> {
        eig_sym(self)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eig()?.values[0])
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(*self.eig()?.values.last().expect("n >= 1"))
    }

    /// `lambda_min >= -psd_rel * max(1, |M|_max)`.
    pub fn is_psd(&self, psd_rel: f64) -> Result<bool> {
        Ok(self.min_eigenvalue()? >= -psd_rel * self.max_abs().max(1.0))
    }
}

/// General dense matrix, row-major. Used for contractions and products.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DenseFile", into = "DenseFile")]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DenseFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<f64>>,
}

impl TryFrom<DenseFile> for DenseMatrix {
    type Error = Error;
    fn try_from(f: DenseFile) -> Result<Self> {
        if f.data.len() != f.rows || f.data.iter().any(|r| r.len() != f.cols) {
            return Err(Error::MatrixFormat("ragged dense matrix".into()));
        }
        DenseMatrix::from_vec(f.rows, f.cols, f.data.concat())
    }
}

impl From<DenseMatrix> for DenseFile {
    fn from(m: DenseMatrix) -> Self {
        DenseFile {
            rows: m.rows,
            cols: m.cols,
            data: m.data.chunks(m.cols).map(<[f64]>::to_vec).collect(),
        }
    }
}

impl DenseMatrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_dim(rows)?;
        check_dim(cols)?;
        if data.len() != rows * cols {
            return Err(Error::MatrixFormat(format!("expected {} entries, got {}", rows * cols, data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::from_vec(rows, cols, data)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// `diag(1, .., 1, 0, .., 0)` with `k` ones.
    pub fn coordinate_projection(n: usize, k: usize) -> Result<Self> {
        Self::from_fn(n, n, |i, j| if i == j && i < k { 1.0 } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scale(&self, c: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| c * x).collect(),
        }
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        DenseMatrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                left: self.cols,
                right: other.rows,
            });
        }
        let mut data = vec![0.0; self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                for j in 0..other.cols {
                    data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(DenseMatrix {
            rows: self.rows,
            cols: other.cols,
            data,
        })
    }

    pub fn into_symmetric(self) -> Result<SymMatrix> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch {
                left: self.rows,
                right: self.cols,
            });
        }
        SymMatrix::from_vec(self.rows, self.data)
    }

    /// Largest singular value, from the spectrum of `M^T M`.
    pub fn spectral_norm(&self) -> Result<f64> {
        let gram = self.transpose().matmul(self)?.into_symmetric()?;
        Ok(gram.max_eigenvalue()?.max(0.0).sqrt())
    }
}

/// Eigenvalues in ascending order and orthonormal eigenvectors (as columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.dim()).map(|i| self.vectors.get(i, k)).collect()
    }

    /// `Q diag(m) Q^T` for per-eigenvalue weights `m`.
    pub fn compose(&self, m: &[f64]) -> SymMatrix {
        let n = self.dim();
        let q = &self.vectors;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let s: f64 = (0..n).map(|k| q.get(i, k) * m[k] * q.get(j, k)).sum();
                data[i * n + j] = s;
                data[j * n + i] = s;
            }
        }
        SymMatrix { n, data }
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.compose(&self.values)
    }

    /// `Q diag(f(max(lambda_i, clamp))) Q^T`.
    pub fn map(&self, clamp: f64, f: impl Fn(f64) -> Result<f64>) -> Result<SymMatrix> {
        let m = self.values.iter().map(|&l| f(l.max(clamp))).collect::<Result<Vec<_>>>()?;
        Ok(self.compose(&m))
    }
}

/// Cyclic Jacobi eigensolver.
///
/// Converges when the off-diagonal Frobenius norm drops to
/// `1e-13 * |A|_F`; gives up after 100 sweeps.
pub fn eig_sym(m: &SymMatrix) -> Result<Spectrum> {
    let n = m.n;
    let mut a = m.data.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let target = JACOBI_REL_TOL * m.frobenius();
    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += 2.0 * a[p * n + q] * a[p * n + q];
            }
        }
        s.sqrt()
    };

    let mut converged = false;
    for sweep in 0..=JACOBI_MAX_SWEEPS {
        if off_norm(&a) <= target {
            converged = true;
            break;
        }
        if sweep == JACOBI_MAX_SWEEPS {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let g = 100.0 * apq.abs();
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&k| a[k * n + k]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |i, j| v[i * n + order[j]])?;
    Ok(Spectrum { values, vectors })
}

/// `f(A)` by spectral calculus; eigenvalues below `clamp` are raised to it.
///
/// Pass `f64::NEG_INFINITY` to disable clamping.
pub fn apply_fn(f: &ScalarFunction, a: &SymMatrix, clamp: f64) -> Result<SymMatrix> {
    a.eig()?.map(clamp, |x| f.eval(x))
}

/// Like [`apply_fn`] with an arbitrary scalar map.
pub fn apply_map(a: &SymMatrix, clamp: f64, f: impl Fn(f64) -> Result<f64>) -> Result<SymMatrix> {
    a.eig()?.map(clamp, f)
}

/// Spectral absolute value `|A - B|`.
pub fn abs_diff(a: &SymMatrix, b: &SymMatrix) -> Result<SymMatrix> {
    apply_map(&a.sub(b)?, f64::NEG_INFINITY, |x| Ok(x.abs()))
}

/// `A ⊕ fill * I_m`.
pub fn direct_sum_pad(a: &SymMatrix, m: usize, fill: f64) -> Result<SymMatrix> {
    let n = a.n;
    SymMatrix::from_fn(n + m, |i, j| match (i < n, j < n) {
        (true, true) => a.get(i, j),
        (false, false) if i == j => fill,
        _ => 0.0,
    })
}

/// A positive functional `X -> trace(S X)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum State {
    /// The unnormalized canonical trace (`S = I`).
    CanonicalTrace,
    /// Density matrix: PSD with unit trace.
    Density { weight: SymMatrix },
    /// Unnormalized PSD weight.
    Functional { weight: SymMatrix },
}

impl State {
    pub fn density(weight: SymMatrix) -> Result<Self> {
        let lmin = weight.min_eigenvalue()?;
        if lmin < -STATE_TOL {
            return Err(Error::InvalidState(format!("weight has negative eigenvalue {lmin}")));
        }
        let tr = weight.trace();
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        Ok(State::Density { weight })
    }

    pub fn functional(weight: SymMatrix) -> Result<Self> {
        let lmin = weight.min_eigenvalue()?;
        if lmin < -STATE_TOL {
            return Err(Error::InvalidState(format!("weight has negative eigenvalue {lmin}")));
        }
        Ok(State::Functional { weight })
    }

    /// Vector state `X -> <X xi, xi> / |xi|^2`.
    pub fn rank_one(xi: &[f64]) -> Result<Self> {
        let norm = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm.is_nan() || norm <= 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let unit: Vec<f64> = xi.iter().map(|x| x / norm).collect();
        State::density(SymMatrix::outer(&unit)?)
    }

    /// `I / n`.
    pub fn uniform(n: usize) -> Result<Self> {
        State::density(SymMatrix::identity(n)?.scale(1.0 / n as f64))
    }

    pub fn weight(&self) -> Option<&SymMatrix> {
        match self {
            State::CanonicalTrace => None,
            State::Density { weight } | State::Functional { weight } => Some(weight),
        }
    }

    pub fn dim(&self) -> Option<usize> {
        self.weight().map(SymMatrix::dim)
    }

    /// `trace(S X)`, or `trace(X)` for the canonical trace.
    pub fn evaluate(&self, x: &SymMatrix) -> Result<f64> {
        match self.weight() {
            None => Ok(x.trace()),
            Some(s) => {
                s.same_dim(x)?;
                Ok(s.data.iter().zip(&x.data).map(|(a, b)| a * b).sum())
            }
        }
    }

    /// Extends the weight by zeros: `S ⊕ 0_m`.
    pub fn pad(&self, m: usize) -> Result<Self> {
        Ok(match self {
            State::CanonicalTrace => State::CanonicalTrace,
            State::Density { weight } => State::Density {
                weight: direct_sum_pad(weight, m, 0.0)?,
            },
            State::Functional { weight } => State::Functional {
                weight: direct_sum_pad(weight, m, 0.0)?,
            },
        })
    }
}

/// `trace(S X)` for the state `S`.
pub fn functional(state: &State, x: &SymMatrix) -> Result<f64> {
    state.evaluate(x)
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<DenseMatrix> {
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        data.push(rng.sample::<f64, _>(StandardNormal));
    }
    DenseMatrix::from_vec(rows, cols, data)
}

/// Orthogonal matrix from Gram-Schmidt (applied twice) on a Gaussian matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DenseMatrix> {
    'draw: loop {
        let g = gaussian_matrix(n, n, rng)?;
        let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| g.get(i, j)).collect()).collect();
        for j in 0..n {
            let (done, rest) = cols.split_at_mut(j);
            let col = &mut rest[0];
            for _ in 0..2 {
                for prev in done.iter() {
                    let dot: f64 = col.iter().zip(prev).map(|(x, p)| x * p).sum();
                    col.iter_mut().zip(prev).for_each(|(x, p)| *x -= dot * p);
                }
            }
            let norm = cols[j].iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-8 {
                continue 'draw;
            }
            cols[j].iter_mut().for_each(|x| *x /= norm);
        }
        return DenseMatrix::from_fn(n, n, |i, j| cols[j][i]);
    }
}

fn log_uniform<R: Rng + ?Sized>(lo: f64, hi: f64, rng: &mut R) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo.ln()..=hi.ln()).exp().clamp(lo, hi)
    }
}

fn check_spectrum_range(lo: f64, hi: f64) -> Result<()> {
    if lo > 0.0 && lo <= hi && hi.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("spectrum range [{lo}, {hi}] must satisfy 0 < lo <= hi < inf")))
    }
}

/// Random PSD matrix and the eigenvalues it was built from.
fn random_psd_with_spectrum<R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> Result<(SymMatrix, Vec<f64>)> {
    check_dim(n)?;
    check_spectrum_range(lo, hi)?;
    let values: Vec<f64> = (0..n).map(|_| log_uniform(lo, hi, rng)).collect();
    let q = random_orthogonal(n, rng)?;
    let spec = Spectrum {
        values: values.clone(),
        vectors: q,
    };
    Ok((spec.reconstruct(), values))
}

/// Random PSD matrix with eigenvalues log-uniform in `[lo, hi]`, conjugated by a
/// random orthogonal matrix.
pub fn random_psd<R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> Result<SymMatrix> {
    random_psd_with_spectrum(n, lo, hi, rng).map(|(m, _)| m)
}

/// Random symmetric matrix with standard Gaussian entries (upper triangle).
pub fn random_symmetric<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<SymMatrix> {
    let g = gaussian_matrix(n, n, rng)?;
    SymMatrix::from_fn(n, |i, j| if i <= j { g.get(i, j) } else { g.get(j, i) })
}

/// Lowest eigenvalue any generated matrix may have.
pub const GENERATOR_FLOOR: f64 = 1e-6;

/// `0 < A <= B` with the default spectrum window `[1e-2, 1e2]`.
pub fn random_ordered_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<(SymMatrix, SymMatrix)> {
    let (lo, hi) = crate::config::MATRIX_WINDOW;
    random_ordered_pair_in(n, lo, hi, f64::INFINITY, rng)
}

/// `0 < A <= B`: `A` has spectrum log-uniform in `[lo, hi]`, and `B = A + P`
/// where `P` is a sum of `r` random rank-one terms (`r` uniform in `0..=n`)
/// with weights in `[lo, hi]`. `P` is scaled down if needed so that
/// `lambda_max(B) < ceiling`.
pub fn random_ordered_pair_in<R: Rng + ?Sized>(
    n: usize,
    lo: f64,
    hi: f64,
    ceiling: f64,
    rng: &mut R,
) -> Result<(SymMatrix, SymMatrix)> {
    let lo = lo.max(GENERATOR_FLOOR);
    let (a, values) = random_psd_with_spectrum(n, lo, hi.max(lo), rng)?;
    let rank = rng.random_range(0..=n);
    let mut p = SymMatrix::zeros(n)?;
    let mut weight_sum = 0.0;
    for _ in 0..rank {
        let w = log_uniform(lo, hi.max(lo), rng);
        let u: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue;
        }
        let unit: Vec<f64> = u.iter().map(|x| x / norm).collect();
        p = p.add(&SymMatrix::outer(&unit)?.scale(w))?;
        weight_sum += w;
    }
    if ceiling.is_finite() && weight_sum > 0.0 {
        let top = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let room = 0.99 * (ceiling - top);
        if room <= 0.0 {
            p = p.scale(0.0);
        } else if weight_sum > room {
            p = p.scale(room / weight_sum);
        }
    }
    let b = a.add(&p)?;
    Ok((a, b))
}

/// Random contraction `u * G / |G|_2` with `G` Gaussian and `u` uniform in `(0, 1]`.
pub fn random_contraction<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DenseMatrix> {
    let g = gaussian_matrix(n, n, rng)?;
    let sigma = g.spectral_norm()?;
    let u = 1.0 - rng.random::<f64>();
    Ok(g.scale(u / sigma))
}
