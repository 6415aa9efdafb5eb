use crate::error::{invalid, Error, Result};

/// Symmetric tridiagonal matrix stored as its diagonal and one off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSymmetric {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl TridiagonalSymmetric {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(invalid("tridiagonal matrix must be non-empty"));
        }
        if off.len() + 1 != diag.len() {
            return Err(Error::LengthMismatch {
                expected: diag.len() - 1,
                actual: off.len(),
            });
        }
        Ok(Self { diag, off })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            diag: vec![1.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// `self - sigma * other`.
    pub fn shifted(&self, sigma: f64, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self {
            diag: self
                .diag
                .iter()
                .zip(&other.diag)
                .map(|(a, b)| a - sigma * b)
                .collect(),
            off: self
                .off
                .iter()
                .zip(&other.off)
                .map(|(a, b)| a - sigma * b)
                .collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            diag: self.diag.iter().map(|a| a * s).collect(),
            off: self.off.iter().map(|a| a * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.shifted(-1.0, other)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        debug_assert_eq!(x.len(), n);
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.off[i] * x[i + 1];
            }
            out[i] = acc;
        }
        out
    }

    /// `xᵀ T x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.len() {
            acc += self.diag[i] * x[i] * x[i];
        }
        for i in 0..self.off.len() {
            acc += 2.0 * self.off[i] * x[i] * x[i + 1];
        }
        acc
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = self.diag[i];
            if i + 1 < n {
                m[i][i + 1] = self.off[i];
                m[i + 1][i] = self.off[i];
            }
        }
        m
    }
}

/// `T = L D Lᵀ` with unit lower bidiagonal `L`.
#[derive(Debug, Clone)]
pub struct LdlFactor {
    pivots: Vec<f64>,
    lower: Vec<f64>,
}

impl LdlFactor {
    pub fn pivots(&self) -> &[f64] {
        &self.pivots
    }

    pub fn negative_pivots(&self) -> usize {
        self.pivots.iter().filter(|&&d| d < 0.0).count()
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.pivots.len();
        let mut x = rhs.to_vec();
        for i in 1..n {
            x[i] -= self.lower[i - 1] * x[i - 1];
        }
        for (xi, d) in x.iter_mut().zip(&self.pivots) {
            *xi /= d;
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.lower[i] * x[i + 1];
        }
        x
    }
}

/// Factor `a` and count its negative pivots. By Sylvester's law of inertia
/// the count equals the number of negative eigenvalues of `a`.
pub fn ldl_inertia(a: &TridiagonalSymmetric) -> Result<(LdlFactor, usize)> {
    let n = a.len();
    let mut pivots = Vec::with_capacity(n);
    let mut lower = Vec::with_capacity(n.saturating_sub(1));
    let mut d = a.diag[0];
    for i in 0..n {
        if i > 0 {
            let l = a.off[i - 1] / pivots[i - 1];
            lower.push(l);
            d = a.diag[i] - l * a.off[i - 1];
        }
        if d == 0.0 || !d.is_finite() {
            return Err(Error::ZeroPivot { index: i });
        }
        pivots.push(d);
    }
    let factor = LdlFactor { pivots, lower };
    let count = factor.negative_pivots();
    Ok((factor, count))
}

/// Number of eigenvalues of the pencil `(a, m)` below `sigma`, for symmetric
/// positive definite `m`. Exact zero pivots nudge the shift by a few ulps.
pub fn pencil_count_below(a: &TridiagonalSymmetric, m: &TridiagonalSymmetric, sigma: f64) -> usize {
    let mut shift = sigma;
    let scale = a.diag.iter().map(|v| v.abs()).fold(0.0, f64::max)
        / m.diag
            .iter()
            .map(|v| v.abs())
            .fold(f64::MIN_POSITIVE, f64::max);
    let nudge = 4.0 * f64::EPSILON * sigma.abs().max(scale).max(f64::MIN_POSITIVE);
    for _ in 0..64 {
        if let Ok((_, count)) = ldl_inertia(&a.shifted(shift, m)) {
            return count;
        }
        shift += nudge;
    }
    // 64 consecutive exact zeros does not happen for finite input
    ldl_inertia(&a.shifted(shift + 1e3 * nudge, m))
        .map(|(_, c)| c)
        .unwrap_or(0)
}

/// Solve a general tridiagonal system by the Thomas algorithm.
/// `lower[i]` couples row `i + 1` to column `i`; `upper[i]` couples row `i` to column `i + 1`.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    if rhs.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: rhs.len(),
        });
    }
    if lower.len() + 1 != n || upper.len() + 1 != n {
        return Err(Error::LengthMismatch {
            expected: n - 1,
            actual: lower.len().min(upper.len()),
        });
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 {
        return Err(Error::ZeroPivot { index: 0 });
    }
    if n > 1 {
        c[0] = upper[0] / denom;
    }
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i - 1] * c[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::ZeroPivot { index: i });
        }
        if i + 1 < n {
            c[i] = upper[i] / denom;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}
