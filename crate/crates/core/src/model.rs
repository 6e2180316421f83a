//! Signal model of linear feedback coding over a Gaussian two-way channel.
//!
//! Over a block of `N` channel uses, user 1 sends `x1 = g1 m1 + F1 (y1 - F2 x1)` and
//! user 2 sends `x2 = g2 m2 + F2 y2`, where `y2 = x1 + n1`, `y1 = x2 + n2` and the
//! feedback matrices `F1`, `F2` are strictly lower triangular (causality). This module
//! holds the channel and encoder types together with every closed-form quantity that
//! follows from them: noise covariances, optimal combiners, SNRs and transmit powers.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Default tolerances used by the model routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Maximum absolute asymmetry accepted by [`matrix_sqrt_psd`].
    pub symmetry: f64,
    /// Eigenvalues in `(-psd, 0)` are clamped to zero; anything lower is rejected.
    pub psd: f64,
    /// Entrywise tolerance of the effective-to-native round trip check.
    pub round_trip: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            symmetry: 1e-10,
            psd: 1e-10,
            round_trip: 1e-8,
        }
    }
}

/// Blocklength and the noise variances of both directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    n: usize,
    sigma1_sq: f64,
    sigma2_sq: f64,
}

impl ChannelParams {
    /// `sigma1_sq` is the noise variance on the user 1 -> user 2 link,
    /// `sigma2_sq` the one on the user 2 -> user 1 link.
    pub fn new(n: usize, sigma1_sq: f64, sigma2_sq: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("blocklength must be >= 2, got {n}")));
        }
        for (name, v) in [("sigma1_sq", sigma1_sq), ("sigma2_sq", sigma2_sq)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Self {
            n,
            sigma1_sq,
            sigma2_sq,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sigma1_sq(&self) -> f64 {
        self.sigma1_sq
    }

    pub fn sigma2_sq(&self) -> f64 {
        self.sigma2_sq
    }

    pub fn sigma1(&self) -> f64 {
        self.sigma1_sq.sqrt()
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2_sq.sqrt()
    }

    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(n, self.sigma1_sq, self.sigma2_sq)
    }
}

/// Target SNRs and the power weight `alpha` of the weighted-sum objective
/// `alpha * E|x1|^2 + (1 - alpha) * E|x2|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Targets {
    eta1: f64,
    eta2: f64,
    alpha: f64,
}

impl Targets {
    pub fn new(eta1: f64, eta2: f64, alpha: f64) -> Result<Self> {
        for (name, v) in [("eta1", eta1), ("eta2", eta2)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidInput(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        Ok(Self { eta1, eta2, alpha })
    }

    pub fn eta1(&self) -> f64 {
        self.eta1
    }

    pub fn eta2(&self) -> f64 {
        self.eta2
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.eta1, self.eta2, alpha)
    }

    /// Smallest weight for which sending user 2's message only on the last
    /// channel use is optimal: `sigma2^2 / (sigma1^2 + sigma2^2)`.
    pub fn last_use_threshold(params: &ChannelParams) -> f64 {
        params.sigma2_sq / (params.sigma1_sq + params.sigma2_sq)
    }

    pub fn last_use_regime(&self, params: &ChannelParams) -> bool {
        self.alpha >= Self::last_use_threshold(params)
    }

    /// Weighted objective for a pair of block energies.
    pub fn weighted(&self, p1: f64, p2: f64) -> f64 {
        self.alpha * p1 + (1.0 - self.alpha) * p2
    }
}

/// Effective linear encoders `(g1, F1, g2, F2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderPair {
    g1: DVector<f64>,
    f1: DMatrix<f64>,
    g2: DVector<f64>,
    f2: DMatrix<f64>,
    f2_structured: bool,
}

impl EncoderPair {
    /// Encoder pair with arbitrary strictly lower triangular feedback matrices.
    pub fn new(
        g1: DVector<f64>,
        f1: DMatrix<f64>,
        g2: DVector<f64>,
        f2: DMatrix<f64>,
    ) -> Result<Self> {
        check_shapes(&g1, &f1, &g2, &f2)?;
        check_strictly_lower("F1", &f1)?;
        check_strictly_lower("F2", &f2)?;
        Ok(Self {
            g1,
            f1,
            g2,
            f2,
            f2_structured: false,
        })
    }

    /// Encoder pair where user 2 only relays its most recent reception, i.e. `F2`
    /// is nonzero on the first subdiagonal only.
    pub fn new_structured(
        g1: DVector<f64>,
        f1: DMatrix<f64>,
        g2: DVector<f64>,
        f2: DMatrix<f64>,
    ) -> Result<Self> {
        let mut enc = Self::new(g1, f1, g2, f2)?;
        if !is_single_subdiagonal(&enc.f2) {
            return Err(Error::InvalidInput(
                "F2 has entries off the first subdiagonal".into(),
            ));
        }
        enc.f2_structured = true;
        Ok(enc)
    }

    /// Open-loop encoders: no feedback on either side.
    pub fn without_feedback(g1: DVector<f64>, g2: DVector<f64>) -> Result<Self> {
        let n = g1.len();
        Self::new_structured(g1, DMatrix::zeros(n, n), g2, DMatrix::zeros(n, n))
    }

    pub fn n(&self) -> usize {
        self.g1.len()
    }

    pub fn g1(&self) -> &DVector<f64> {
        &self.g1
    }

    pub fn f1(&self) -> &DMatrix<f64> {
        &self.f1
    }

    pub fn g2(&self) -> &DVector<f64> {
        &self.g2
    }

    pub fn f2(&self) -> &DMatrix<f64> {
        &self.f2
    }

    pub fn is_f2_structured(&self) -> bool {
        self.f2_structured
    }

    /// Returns a copy with `g1` replaced.
    pub fn with_g1(&self, g1: DVector<f64>) -> Result<Self> {
        let mut out = self.clone();
        check_vector("g1", &g1, self.n())?;
        out.g1 = g1;
        Ok(out)
    }

    /// Returns a copy with `g2` replaced.
    pub fn with_g2(&self, g2: DVector<f64>) -> Result<Self> {
        let mut out = self.clone();
        check_vector("g2", &g2, self.n())?;
        out.g2 = g2;
        Ok(out)
    }
}

/// Native encoders `(g~1, F~1, g~2, F~2)`: each user subtracts its own known
/// contribution from what it receives before feeding it back.
#[derive(Debug, Clone, PartialEq)]
pub struct NativeEncoderPair {
    g1_t: DVector<f64>,
    f1_t: DMatrix<f64>,
    g2_t: DVector<f64>,
    f2_t: DMatrix<f64>,
}

impl NativeEncoderPair {
    pub fn new(
        g1_t: DVector<f64>,
        f1_t: DMatrix<f64>,
        g2_t: DVector<f64>,
        f2_t: DMatrix<f64>,
    ) -> Result<Self> {
        check_shapes(&g1_t, &f1_t, &g2_t, &f2_t)?;
        check_strictly_lower("F~1", &f1_t)?;
        check_strictly_lower("F~2", &f2_t)?;
        Ok(Self {
            g1_t,
            f1_t,
            g2_t,
            f2_t,
        })
    }

    pub fn n(&self) -> usize {
        self.g1_t.len()
    }

    pub fn g1_t(&self) -> &DVector<f64> {
        &self.g1_t
    }

    pub fn f1_t(&self) -> &DMatrix<f64> {
        &self.f1_t
    }

    pub fn g2_t(&self) -> &DVector<f64> {
        &self.g2_t
    }

    pub fn f2_t(&self) -> &DMatrix<f64> {
        &self.f2_t
    }
}

/// Linear combining vectors; user 2 estimates `m1` with `w1`, user 1 estimates `m2` with `w2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderPair {
    pub w1: DVector<f64>,
    pub w2: DVector<f64>,
}

/// Block energies, weighted objective and the analytic SNRs of an encoder pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerReport {
    pub p1: f64,
    pub p2: f64,
    pub weighted: f64,
    pub snr1: f64,
    pub snr2: f64,
}

fn check_vector(name: &str, v: &DVector<f64>, n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::InvalidInput(format!(
            "{name} has length {}, expected {n}",
            v.len()
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("{name} has non-finite entries")));
    }
    Ok(())
}

fn check_shapes(
    g1: &DVector<f64>,
    f1: &DMatrix<f64>,
    g2: &DVector<f64>,
    f2: &DMatrix<f64>,
) -> Result<()> {
    let n = g1.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("blocklength must be >= 2, got {n}")));
    }
    check_vector("g1", g1, n)?;
    check_vector("g2", g2, n)?;
    for (name, m) in [("F1", f1), ("F2", f2)] {
        if m.shape() != (n, n) {
            return Err(Error::InvalidInput(format!(
                "{name} has shape {:?}, expected ({n}, {n})",
                m.shape()
            )));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("{name} has non-finite entries")));
        }
    }
    Ok(())
}

fn check_strictly_lower(name: &str, m: &DMatrix<f64>) -> Result<()> {
    if is_strictly_lower(m) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{name} must be strictly lower triangular"
        )))
    }
}

/// True when every entry on or above the diagonal is exactly zero.
pub fn is_strictly_lower(m: &DMatrix<f64>) -> bool {
    let (rows, cols) = m.shape();
    (0..rows).all(|i| (i..cols).all(|j| m[(i, j)] == 0.0))
}

/// True when the matrix is zero everywhere except the first subdiagonal.
pub fn is_single_subdiagonal(m: &DMatrix<f64>) -> bool {
    let (rows, cols) = m.shape();
    (0..rows).all(|i| (0..cols).all(|j| i == j + 1 || m[(i, j)] == 0.0))
}

/// Builds an `N x N` single-subdiagonal matrix; `sub[k]` lands at `(k + 1, k)`.
/// In 1-based channel-use terms `sub[i - 2]` is the relay gain `f_{2,i}` used at use `i`.
pub fn subdiagonal_matrix(sub: &[f64]) -> DMatrix<f64> {
    let n = sub.len() + 1;
    let mut m = DMatrix::zeros(n, n);
    for (k, &v) in sub.iter().enumerate() {
        m[(k + 1, k)] = v;
    }
    m
}

/// Reads the first subdiagonal back out (`N - 1` entries).
pub fn subdiagonal(m: &DMatrix<f64>) -> Vec<f64> {
    (1..m.nrows()).map(|i| m[(i, i - 1)]).collect()
}

/// Zeroes every entry on or above the diagonal.
pub(crate) fn strict_lower_part(mut m: DMatrix<f64>) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    for i in 0..rows {
        for j in i..cols {
            m[(i, j)] = 0.0;
        }
    }
    m
}

/// Solves `(I + L) X = B` for strictly lower triangular `L` by forward substitution.
pub fn unit_lower_solve(l: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = l.nrows();
    let mut x = b.clone();
    for i in 0..n {
        for k in 0..i {
            let lik = l[(i, k)];
            if lik != 0.0 {
                for c in 0..x.ncols() {
                    let v = x[(k, c)];
                    x[(i, c)] -= lik * v;
                }
            }
        }
    }
    x
}

fn unit_lower_solve_vec(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = l.nrows();
    let mut x = b.clone();
    for i in 0..n {
        let mut acc = x[i];
        for k in 0..i {
            acc -= l[(i, k)] * x[k];
        }
        x[i] = acc;
    }
    x
}

/// Noise covariance seen by user 2 when decoding `m1`:
/// `Q1 = (I + F1 F2)(I + F1 F2)^T sigma1^2 + F1 F1^T sigma2^2`.
pub fn q1_matrix(enc: &EncoderPair, params: &ChannelParams) -> DMatrix<f64> {
    q1_from_feedback(enc.f1(), enc.f2(), params)
}

pub(crate) fn q1_from_feedback(
    f1: &DMatrix<f64>,
    f2: &DMatrix<f64>,
    params: &ChannelParams,
) -> DMatrix<f64> {
    let n = f1.nrows();
    let a = DMatrix::identity(n, n) + f1 * f2;
    let q = &a * a.transpose() * params.sigma1_sq + f1 * f1.transpose() * params.sigma2_sq;
    symmetrize(q)
}

/// Noise covariance seen by user 1 when decoding `m2`: `Q2 = F2 F2^T sigma1^2 + sigma2^2 I`.
pub fn q2_matrix(enc: &EncoderPair, params: &ChannelParams) -> DMatrix<f64> {
    q2_from_feedback(enc.f2(), params)
}

pub(crate) fn q2_from_feedback(f2: &DMatrix<f64>, params: &ChannelParams) -> DMatrix<f64> {
    let n = f2.nrows();
    let q = f2 * f2.transpose() * params.sigma1_sq
        + DMatrix::identity(n, n) * params.sigma2_sq;
    symmetrize(q)
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn cholesky(q: &DMatrix<f64>, user: u8) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    Cholesky::new(q.clone()).ok_or_else(|| {
        Error::Numerical(format!("noise covariance of user {user} is not positive definite"))
    })
}

/// `g^T Q^{-1} g`, the SNR reached by the whitened matched filter.
fn quadratic_inverse(q: &DMatrix<f64>, g: &DVector<f64>, user: u8) -> Result<f64> {
    let chol = cholesky(q, user)?;
    let z = chol.solve(g);
    Ok(g.dot(&z).max(0.0))
}

/// Whitened matched filters `w_i = Q_i^{-1} g_i / (g_i^T Q_i^{-1} g_i)`; they satisfy `w_i^T g_i = 1`.
pub fn optimal_combiners(enc: &EncoderPair, params: &ChannelParams) -> Result<DecoderPair> {
    let w1 = combiner(&q1_matrix(enc, params), enc.g1(), 1)?;
    let w2 = combiner(&q2_matrix(enc, params), enc.g2(), 2)?;
    Ok(DecoderPair { w1, w2 })
}

fn combiner(q: &DMatrix<f64>, g: &DVector<f64>, user: u8) -> Result<DVector<f64>> {
    if g.iter().all(|&x| x == 0.0) {
        return Err(Error::DegenerateEncoder { user });
    }
    let chol = cholesky(q, user)?;
    let z = chol.solve(g);
    let denom = g.dot(&z);
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(Error::DegenerateEncoder { user });
    }
    Ok(z / denom)
}

/// SNR of an arbitrary combiner: `|w^T g|^2 / (w^T Q w)`.
pub fn combiner_snr(w: &DVector<f64>, g: &DVector<f64>, q: &DMatrix<f64>) -> f64 {
    let num = w.dot(g);
    num * num / (w.dot(&(q * w)))
}

/// SNRs under optimal decoding: `SNR_i = g_i^T Q_i^{-1} g_i`.
pub fn snr_pair(enc: &EncoderPair, params: &ChannelParams) -> Result<(f64, f64)> {
    let snr1 = quadratic_inverse(&q1_matrix(enc, params), enc.g1(), 1)?;
    let snr2 = quadratic_inverse(&q2_matrix(enc, params), enc.g2(), 2)?;
    Ok((snr1, snr2))
}

/// Expected block energies of both users plus the analytic SNRs.
pub fn transmit_powers(
    enc: &EncoderPair,
    params: &ChannelParams,
    alpha: f64,
) -> Result<PowerReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let (g1, f1, g2, f2) = (enc.g1(), enc.f1(), enc.g2(), enc.f2());
    let n = enc.n();
    let eye = DMatrix::<f64>::identity(n, n);
    let (s1, s2) = (params.sigma1_sq, params.sigma2_sq);

    let f1f2 = f1 * f2;
    let f2f1 = f2 * f1;
    let p1 = g1.norm_squared()
        + (f1 * g2).norm_squared()
        + f1f2.norm_squared() * s1
        + f1.norm_squared() * s2;
    let p2 = ((&eye + &f2f1) * g2).norm_squared()
        + (f2 * g1).norm_squared()
        + (f2 * (&eye + &f1f2)).norm_squared() * s1
        + f2f1.norm_squared() * s2;
    let (snr1, snr2) = snr_pair(enc, params)?;
    Ok(PowerReport {
        p1,
        p2,
        weighted: alpha * p1 + (1.0 - alpha) * p2,
        snr1,
        snr2,
    })
}

/// Expected energy of each user's transmission at every channel use,
/// `(E x1[k]^2, E x2[k]^2)`; the entries sum to `p1` and `p2`.
pub fn per_use_energy(enc: &EncoderPair, params: &ChannelParams) -> (DVector<f64>, DVector<f64>) {
    let (g1, f1, g2, f2) = (enc.g1(), enc.f1(), enc.g2(), enc.f2());
    let n = enc.n();
    let eye = DMatrix::<f64>::identity(n, n);
    let (s1, s2) = (params.sigma1_sq, params.sigma2_sq);
    let row_sq = |m: &DMatrix<f64>| DVector::from_iterator(n, m.row_iter().map(|r| r.norm_squared()));
    let sq = |v: DVector<f64>| v.map(|x| x * x);

    let f1f2 = f1 * f2;
    let f2f1 = f2 * f1;
    let e1 = sq(g1.clone()) + sq(f1 * g2) + row_sq(&f1f2) * s1 + row_sq(f1) * s2;
    let e2 = sq((&eye + &f2f1) * g2)
        + sq(f2 * g1)
        + row_sq(&(f2 * (&eye + &f1f2))) * s1
        + row_sq(&f2f1) * s2;
    (e1, e2)
}

/// Block energies expressed through the whitened message vector `q1 = Q1^{-1/2} g1`,
/// for a structured `F2` with a zero last relay gain and user 2's message on the last
/// use only (so `F1 g2 = 0` and `|g2|^2 = eta2 sigma2^2`).
pub fn reduced_powers(
    q1: &DVector<f64>,
    f1: &DMatrix<f64>,
    f2: &DMatrix<f64>,
    params: &ChannelParams,
    targets: &Targets,
) -> Result<PowerReport> {
    let n = params.n();
    if q1.len() != n || f1.shape() != (n, n) || f2.shape() != (n, n) {
        return Err(Error::InvalidInput("dimension mismatch".into()));
    }
    if !is_single_subdiagonal(f2) || f2[(n - 1, n - 2)] != 0.0 {
        return Err(Error::InvalidInput(
            "reduced powers need a structured F2 whose last relay gain is zero".into(),
        ));
    }
    let (s1, s2) = (params.sigma1_sq, params.sigma2_sq);
    let eye = DMatrix::<f64>::identity(n, n);
    let f1f2 = f1 * f2;
    let f2f1 = f2 * f1;

    let p1 = ((&eye + &f1f2).transpose() * q1).norm_squared() * s1
        + (f1.transpose() * q1).norm_squared() * s2
        + f1f2.norm_squared() * s1
        + f1.norm_squared() * s2;

    let root = matrix_sqrt_psd(&q1_from_feedback(f1, f2, params))?;
    let p = root * q1;
    let p2 = targets.eta2() * s2
        + (f2 * p).norm_squared()
        + (f2 * (&eye + &f1f2)).norm_squared() * s1
        + f2f1.norm_squared() * s2;

    Ok(PowerReport {
        p1,
        p2,
        weighted: targets.weighted(p1, p2),
        snr1: q1.norm_squared(),
        snr2: targets.eta2(),
    })
}

/// Symmetric square root `U diag(sqrt(lambda)) U^T` of a symmetric PSD matrix.
pub fn matrix_sqrt_psd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    matrix_sqrt_psd_with(m, &Tolerances::default())
}

pub fn matrix_sqrt_psd_with(m: &DMatrix<f64>, tol: &Tolerances) -> Result<DMatrix<f64>> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(Error::InvalidInput(format!("matrix is {rows}x{cols}, not square")));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let scale = m.amax().max(1.0);
    let asym = (m - m.transpose()).amax();
    if asym > tol.symmetry * scale {
        return Err(Error::InvalidInput(format!(
            "matrix is not symmetric (max asymmetry {asym:e})"
        )));
    }
    let eig = SymmetricEigen::new(symmetrize(m.clone()));
    let min = eig.eigenvalues.min();
    if min < -tol.psd * scale {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let u = &eig.eigenvectors;
    let s = u * DMatrix::from_diagonal(&roots) * u.transpose();
    Ok(symmetrize(s))
}

/// Maps native encoders to the effective ones that produce the same transmissions:
/// `g2 = (I + F~2 F~1)^{-1} g~2`, `F2 = (I + F~2 F~1)^{-1} F~2`,
/// `A = I - F~1 ((I + F~2 F~1)^{-1} - I) F~2`, `g1 = A^{-1} g~1`, `F1 = A^{-1} F~1`.
pub fn native_to_effective(nat: &NativeEncoderPair) -> Result<EncoderPair> {
    let n = nat.n();
    let eye = DMatrix::<f64>::identity(n, n);
    let coupling = strict_lower_part(nat.f2_t() * nat.f1_t());
    let inv = unit_lower_solve(&coupling, &eye);

    let g2 = unit_lower_solve_vec(&coupling, nat.g2_t());
    let f2 = strict_lower_part(unit_lower_solve(&coupling, nat.f2_t()));

    // A = I + L with L strictly lower
    let l_a = strict_lower_part(-(nat.f1_t() * (&inv - &eye) * nat.f2_t()));
    let g1 = unit_lower_solve_vec(&l_a, nat.g1_t());
    let f1 = strict_lower_part(unit_lower_solve(&l_a, nat.f1_t()));

    EncoderPair::new(g1, f1, g2, f2)
}

/// Inverse of [`native_to_effective`].
///
/// The native matrices satisfy `F~2 = F2 + F~2 F~1 F2` and `F~1 = F1 - F~1 (F2 - F~2) F1`.
/// Band `k` (entries `(i, i - k)`) of the right-hand sides only involves bands below `k`
/// of the unknowns, so the bands are filled in increasing order.
pub fn effective_to_native(eff: &EncoderPair) -> Result<NativeEncoderPair> {
    effective_to_native_with(eff, &Tolerances::default())
}

pub fn effective_to_native_with(
    eff: &EncoderPair,
    tol: &Tolerances,
) -> Result<NativeEncoderPair> {
    let n = eff.n();
    let (f1, f2) = (eff.f1(), eff.f2());
    let mut f1_t = DMatrix::<f64>::zeros(n, n);
    let mut f2_t = DMatrix::<f64>::zeros(n, n);
    for band in 1..n {
        let rhs2 = f2 + &f2_t * &f1_t * f2;
        let rhs1 = f1 - &f1_t * (f2 - &f2_t) * f1;
        for i in band..n {
            f2_t[(i, i - band)] = rhs2[(i, i - band)];
            f1_t[(i, i - band)] = rhs1[(i, i - band)];
        }
    }
    let eye = DMatrix::<f64>::identity(n, n);
    let g2_t = (&eye + &f2_t * &f1_t) * eff.g2();
    let a = &eye - &f1_t * (f2 - &f2_t);
    let g1_t = a * eff.g1();
    let nat = NativeEncoderPair::new(g1_t, f1_t, g2_t, f2_t)?;

    let back = native_to_effective(&nat)?;
    let err = [
        (back.g1() - eff.g1()).amax(),
        (back.f1() - eff.f1()).amax(),
        (back.g2() - eff.g2()).amax(),
        (back.f2() - eff.f2()).amax(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let scale = [eff.g1().amax(), eff.f1().amax(), eff.g2().amax(), eff.f2().amax()]
        .into_iter()
        .fold(1.0, f64::max);
    if err > tol.round_trip * scale {
        return Err(Error::Numerical(format!(
            "effective-to-native inversion did not reproduce the input (max error {err:e})"
        )));
    }
    Ok(nat)
}
