//! Test-side oracles, written from the model equations without calling the library's
//! own reductions.
#![allow(dead_code)]

use gtwc::model::{subdiagonal_matrix, ChannelParams, EncoderPair, NativeEncoderPair, Targets};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn default_setup(n: usize, alpha: f64) -> (ChannelParams, Targets) {
    (
        ChannelParams::new(n, 1.0, 0.5).unwrap(),
        Targets::new(10.0, 10.0, alpha).unwrap(),
    )
}

pub fn normal(r: &mut ChaCha8Rng) -> f64 {
    // Box-Muller, independent of the library's sampler
    let u1: f64 = 1.0 - r.random::<f64>();
    let u2: f64 = r.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn random_vector(r: &mut ChaCha8Rng, n: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| scale * normal(r))
}

pub fn random_strict_lower(r: &mut ChaCha8Rng, n: usize, scale: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 1..n {
        for j in 0..i {
            m[(i, j)] = scale * normal(r);
        }
    }
    m
}

/// Single-subdiagonal relay matrix; `tail` sets the last gain.
pub fn random_relay(r: &mut ChaCha8Rng, n: usize, scale: f64, tail: Option<f64>) -> DMatrix<f64> {
    let mut sub: Vec<f64> = (0..n - 1).map(|_| scale * normal(r)).collect();
    if let Some(t) = tail {
        sub[n - 2] = t;
    }
    subdiagonal_matrix(&sub)
}

pub fn random_encoder(r: &mut ChaCha8Rng, n: usize) -> EncoderPair {
    EncoderPair::new(
        random_vector(r, n, 1.0),
        random_strict_lower(r, n, 0.5),
        random_vector(r, n, 1.0),
        random_strict_lower(r, n, 0.5),
    )
    .unwrap()
}

pub fn random_native(r: &mut ChaCha8Rng, n: usize) -> NativeEncoderPair {
    NativeEncoderPair::new(
        random_vector(r, n, 1.0),
        random_strict_lower(r, n, 0.5),
        random_vector(r, n, 1.0),
        random_strict_lower(r, n, 0.5),
    )
    .unwrap()
}

/// Positive entries with `|q|^2 = eta`.
pub fn random_q1(r: &mut ChaCha8Rng, n: usize, eta: f64) -> DVector<f64> {
    let q = DVector::from_fn(n, |_, _| r.random::<f64>() + 0.05);
    &q * (eta / q.norm_squared()).sqrt()
}

/// Symmetric square root by eigendecomposition.
pub fn sqrtm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let e = SymmetricEigen::new(m.clone());
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(|v| v.max(0.0).sqrt()));
    &e.eigenvectors * d * e.eigenvectors.transpose()
}

/// Noise covariance at user 2's combiner, written out from the received signal.
pub fn q1_oracle(f1: &DMatrix<f64>, f2: &DMatrix<f64>, s1: f64, s2: f64) -> DMatrix<f64> {
    let n = f1.nrows();
    let a = DMatrix::identity(n, n) + f1 * f2;
    &a * a.transpose() * s1 + f1 * f1.transpose() * s2
}

pub fn q2_oracle(f2: &DMatrix<f64>, s1: f64, s2: f64) -> DMatrix<f64> {
    let n = f2.nrows();
    f2 * f2.transpose() * s1 + DMatrix::identity(n, n) * s2
}

pub fn snr_oracle(g: &DVector<f64>, q: &DMatrix<f64>) -> f64 {
    let qi = q.clone().try_inverse().unwrap();
    (g.transpose() * qi * g)[(0, 0)]
}

/// `E|x1|^2` with `g1 = Q1^{1/2} q1`, `g2` on the last use only.
pub fn p1_from_q1(q1: &DVector<f64>, f1: &DMatrix<f64>, f2: &DMatrix<f64>, s1: f64, s2: f64) -> f64 {
    let q = q1_oracle(f1, f2, s1, s2);
    (q1.transpose() * q * q1)[(0, 0)] + (f1 * f2).norm_squared() * s1 + f1.norm_squared() * s2
}

/// `E|x1|^2` minimized over `F1` in scalar form, as a function of `x = q1.^2`.
pub fn scalar_fp_objective(x: &DVector<f64>, f2: &DMatrix<f64>, s1: f64, s2: f64) -> f64 {
    let n = x.len();
    let gain = |i: usize| f2[(i - 1, i - 2)]; // 1-based use i
    let mut total = s1 * (x[n - 2] + x[n - 1]);
    for i in 2..n {
        let a2 = gain(i).powi(2);
        let den = a2 * s1 + s2;
        let tail: f64 = (i + 1..=n).map(|k| x[k - 1]).sum();
        total += s1 * s2 / den * x[i - 2];
        total += a2 * s1 * s1 / den * x[i - 2] / (1.0 + tail);
    }
    total
}

/// Exhaustive search over `{x >= 0, x1 + x2 + x3 = total}` at `res` steps per axis.
pub fn grid_min_3(f: impl Fn(&DVector<f64>) -> f64, total: f64, res: usize) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..=res {
        for j in 0..=(res - i) {
            let a = total * i as f64 / res as f64;
            let b = total * j as f64 / res as f64;
            let x = DVector::from_vec(vec![a, b, (total - a - b).max(0.0)]);
            best = best.min(f(&x));
        }
    }
    best
}

/// Weighted objective of the relay-gain sub-problem with `p = Q1^{1/2} q1` frozen.
pub fn relay_surrogate(
    q1: &DVector<f64>,
    f1: &DMatrix<f64>,
    f2: &DMatrix<f64>,
    p: &DVector<f64>,
    s1: f64,
    s2: f64,
    alpha: f64,
) -> f64 {
    let n = q1.len();
    let eye = DMatrix::<f64>::identity(n, n);
    let user1 = p1_from_q1(q1, f1, f2, s1, s2);
    let user2 = (f2 * p).norm_squared()
        + (f2 * (&eye + f1 * f2)).norm_squared() * s1
        + (f2 * f1).norm_squared() * s2;
    alpha * user1 + (1.0 - alpha) * user2
}
