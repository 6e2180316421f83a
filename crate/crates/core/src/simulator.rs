//! Time-stepped Monte-Carlo simulation of the two-way exchange.
//!
//! Both users transmit simultaneously at every channel use `k` using only what they
//! received up to `k - 1`; strict lower triangularity of the feedback matrices is what
//! makes the recursion causal. Each trial draws from its own random stream derived from
//! `(seed, trial index)` and the per-batch partial sums are reduced in batch order, so a
//! report is bit-identical for a fixed `(seed, trials, batch_size)` regardless of the
//! number of worker threads.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    optimal_combiners, unit_lower_solve, ChannelParams, EncoderPair, NativeEncoderPair,
};
use crate::rng::{stream, BoxMuller};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MessageModel {
    /// `m ~ N(0, 1)`
    #[default]
    Gaussian,
    /// `m` uniform on `{-1, +1}`
    Binary,
}

impl MessageModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            MessageModel::Gaussian => "gaussian",
            MessageModel::Binary => "binary",
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R, normal: &mut BoxMuller) -> f64 {
        match self {
            MessageModel::Gaussian => normal.sample(rng),
            MessageModel::Binary => {
                if rng.random::<f64>() < 0.5 {
                    -1.0
                } else {
                    1.0
                }
            }
        }
    }
}

impl std::str::FromStr for MessageModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(MessageModel::Gaussian),
            "binary" => Ok(MessageModel::Binary),
            other => Err(Error::InvalidInput(format!(
                "unknown message model '{other}' (expected gaussian or binary)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    pub message_model: MessageModel,
    pub batch_size: u64,
}

impl SimConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            message_model: MessageModel::Gaussian,
            batch_size: 4096,
        }
    }

    pub fn with_message_model(mut self, model: MessageModel) -> Self {
        self.message_model = model;
        self
    }

    pub fn with_batch_size(mut self, batch_size: u64) -> Self {
        self.batch_size = batch_size;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidInput("trials must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidInput("batch_size must be >= 1".into()));
        }
        Ok(())
    }
}

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    /// Number of standard errors separating the estimate from `reference`.
    pub fn z_score(&self, reference: f64) -> f64 {
        (self.value - reference).abs() / self.stderr
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    /// Mean block energy `|x1|^2`.
    pub emp_p1: Estimate,
    pub emp_p2: Estimate,
    /// `1 / var(m1_hat - m1)`, the variance taken about the known zero mean of the
    /// estimation error (the combiners are unbiased).
    pub emp_snr1: Estimate,
    pub emp_snr2: Estimate,
    /// Mean of `m1_hat - m1`.
    pub bias1: Estimate,
    pub bias2: Estimate,
    /// Sign-decision error rates; binary messages only.
    pub err1: Option<Estimate>,
    pub err2: Option<Estimate>,
    pub trials: u64,
    pub seed: u64,
    pub message_model: MessageModel,
}

/// Messages and noise of a single block.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub m1: f64,
    pub m2: f64,
    pub n1: DVector<f64>,
    pub n2: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub x1: DVector<f64>,
    pub x2: DVector<f64>,
    pub y1: DVector<f64>,
    pub y2: DVector<f64>,
}

/// Either encoder representation; both describe the same physical scheme.
#[derive(Debug, Clone, Copy)]
pub enum Scheme<'a> {
    Effective(&'a EncoderPair),
    Native(&'a NativeEncoderPair),
}

/// Row-major copies of the encoder for the per-step recursion.
struct Stepper {
    n: usize,
    g1: Vec<f64>,
    f1: Vec<f64>,
    g2: Vec<f64>,
    f2: Vec<f64>,
    /// User 2 subtracts `F~1 x2` from its reception (native representation only).
    native: bool,
}

impl Stepper {
    fn new(scheme: Scheme<'_>) -> Self {
        let rm = |m: &DMatrix<f64>| m.transpose().as_slice().to_vec();
        match scheme {
            Scheme::Effective(e) => Self {
                n: e.n(),
                g1: e.g1().as_slice().to_vec(),
                f1: rm(e.f1()),
                g2: e.g2().as_slice().to_vec(),
                f2: rm(e.f2()),
                native: false,
            },
            Scheme::Native(e) => Self {
                n: e.n(),
                g1: e.g1_t().as_slice().to_vec(),
                f1: rm(e.f1_t()),
                g2: e.g2_t().as_slice().to_vec(),
                f2: rm(e.f2_t()),
                native: true,
            },
        }
    }

    /// Runs one block. `buf` holds `x1, x2, y1, y2, d1, d2` (each length `n`) where
    /// `d1 = y1 - F2 x1` and `d2` is user 2's (possibly modified) feedback input.
    fn run(&self, m1: f64, m2: f64, n1: &[f64], n2: &[f64], buf: &mut [f64]) {
        let n = self.n;
        let (x1, rest) = buf.split_at_mut(n);
        let (x2, rest) = rest.split_at_mut(n);
        let (y1, rest) = rest.split_at_mut(n);
        let (y2, rest) = rest.split_at_mut(n);
        let (d1, d2) = rest.split_at_mut(n);
        for k in 0..n {
            let row1 = &self.f1[k * n..k * n + k];
            let row2 = &self.f2[k * n..k * n + k];
            let fb1: f64 = row1.iter().zip(&d1[..k]).map(|(a, b)| a * b).sum();
            let fb2: f64 = row2.iter().zip(&d2[..k]).map(|(a, b)| a * b).sum();
            x1[k] = self.g1[k] * m1 + fb1;
            x2[k] = self.g2[k] * m2 + fb2;
            y2[k] = x1[k] + n1[k];
            y1[k] = x2[k] + n2[k];

            let own1: f64 = row2.iter().zip(&x1[..k]).map(|(a, b)| a * b).sum();
            d1[k] = y1[k] - own1;
            d2[k] = if self.native {
                let own2: f64 = row1.iter().zip(&x2[..k]).map(|(a, b)| a * b).sum();
                y2[k] - own2
            } else {
                y2[k]
            };
        }
    }
}

/// Exact single-realization trajectories for either representation.
pub fn trajectory(scheme: Scheme<'_>, real: &Realization) -> Result<Trajectory> {
    let stepper = Stepper::new(scheme);
    let n = stepper.n;
    if real.n1.len() != n || real.n2.len() != n {
        return Err(Error::InvalidInput(format!(
            "noise vectors have lengths {} and {}, expected {n}",
            real.n1.len(),
            real.n2.len()
        )));
    }
    if !(real.m1.is_finite() && real.m2.is_finite()) {
        return Err(Error::InvalidInput("messages must be finite".into()));
    }
    let mut buf = vec![0.0; 6 * n];
    stepper.run(
        real.m1,
        real.m2,
        real.n1.as_slice(),
        real.n2.as_slice(),
        &mut buf,
    );
    let v = |i: usize| DVector::from_column_slice(&buf[i * n..(i + 1) * n]);
    Ok(Trajectory {
        x1: v(0),
        x2: v(1),
        y1: v(2),
        y2: v(3),
    })
}

/// Linear decoders in the form `m1_hat = a1 . y2 - b1 m2`, `m2_hat = a2 . y1 - b2 m1`.
struct Decoder {
    a1: Vec<f64>,
    b1: f64,
    a2: Vec<f64>,
    b2: f64,
}

impl Decoder {
    fn new(enc: &EncoderPair, params: &ChannelParams) -> Result<Self> {
        let dec = optimal_combiners(enc, params)?;
        let n = enc.n();
        // user 2: y2_tilde = y2 - F1 g2 m2, m1_hat = w1 . y2_tilde
        let b1 = dec.w1.dot(&(enc.f1() * enc.g2()));
        // user 1: y1_tilde = (I + F2 F1)^{-1} (y1 - F2 g1 m1), m2_hat = w2 . y1_tilde
        let coupling = enc.f2() * enc.f1();
        let inv = unit_lower_solve(&coupling, &DMatrix::identity(n, n));
        let a2 = inv.transpose() * &dec.w2;
        let b2 = a2.dot(&(enc.f2() * enc.g1()));
        Ok(Self {
            a1: dec.w1.as_slice().to_vec(),
            b1,
            a2: a2.as_slice().to_vec(),
            b2,
        })
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    s1: f64,
    s2: f64,
    s4: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        let v2 = v * v;
        self.s1 += v;
        self.s2 += v2;
        self.s4 += v2 * v2;
    }

    fn merge(&mut self, o: &Moments) {
        self.s1 += o.s1;
        self.s2 += o.s2;
        self.s4 += o.s4;
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    e1x: Moments,
    e2x: Moments,
    err1: Moments,
    err2: Moments,
    wrong1: u64,
    wrong2: u64,
}

impl Sums {
    fn merge(&mut self, o: &Sums) {
        self.e1x.merge(&o.e1x);
        self.e2x.merge(&o.e2x);
        self.err1.merge(&o.err1);
        self.err2.merge(&o.err2);
        self.wrong1 += o.wrong1;
        self.wrong2 += o.wrong2;
    }
}

/// Mean of the samples with the standard error of the mean.
fn mean_estimate(m: &Moments, t: f64) -> Estimate {
    let mean = m.s1 / t;
    let var = if t > 1.0 {
        ((m.s2 - m.s1 * m.s1 / t) / (t - 1.0)).max(0.0)
    } else {
        0.0
    };
    Estimate {
        value: mean,
        stderr: (var / t).sqrt(),
    }
}

/// `1 / E[e^2]` with a delta-method standard error.
fn snr_estimate(m: &Moments, t: f64) -> Estimate {
    let mse = m.s2 / t;
    let fourth = m.s4 / t;
    let mse_se = ((fourth - mse * mse).max(0.0) / t).sqrt();
    Estimate {
        value: 1.0 / mse,
        stderr: mse_se / (mse * mse),
    }
}

/// Error-rate estimate; the standard error uses add-one smoothing so it stays
/// positive when no errors are observed.
fn rate_estimate(wrong: u64, t: u64) -> Estimate {
    let (w, t) = (wrong as f64, t as f64);
    let smoothed = (w + 1.0) / (t + 2.0);
    Estimate {
        value: w / t,
        stderr: (smoothed * (1.0 - smoothed) / t).sqrt(),
    }
}

/// Simulates `cfg.trials` independent blocks with optimal decoding and aggregates
/// empirical powers, SNRs and (binary messages) error rates.
pub fn run_exchange(
    enc: &EncoderPair,
    params: &ChannelParams,
    cfg: &SimConfig,
) -> Result<SimulationReport> {
    cfg.validate()?;
    if enc.n() != params.n() {
        return Err(Error::InvalidInput(format!(
            "encoder blocklength {} does not match channel blocklength {}",
            enc.n(),
            params.n()
        )));
    }
    let stepper = Stepper::new(Scheme::Effective(enc));
    let decoder = Decoder::new(enc, params)?;
    let n = params.n();
    let (sd1, sd2) = (params.sigma1(), params.sigma2());
    let batches = cfg.trials.div_ceil(cfg.batch_size);

    let partials: Vec<Sums> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let start = b * cfg.batch_size;
            let end = (start + cfg.batch_size).min(cfg.trials);
            let mut sums = Sums::default();
            let mut buf = vec![0.0; 6 * n];
            let mut n1 = vec![0.0; n];
            let mut n2 = vec![0.0; n];
            for trial in start..end {
                let mut rng = stream(cfg.seed, trial);
                let mut normal = BoxMuller::new();
                let m1 = cfg.message_model.draw(&mut rng, &mut normal);
                let m2 = cfg.message_model.draw(&mut rng, &mut normal);
                for v in n1.iter_mut() {
                    *v = sd1 * normal.sample(&mut rng);
                }
                for v in n2.iter_mut() {
                    *v = sd2 * normal.sample(&mut rng);
                }
                stepper.run(m1, m2, &n1, &n2, &mut buf);
                let (x1, rest) = buf.split_at(n);
                let (x2, rest) = rest.split_at(n);
                let (y1, rest) = rest.split_at(n);
                let y2 = &rest[..n];

                sums.e1x.push(x1.iter().map(|v| v * v).sum());
                sums.e2x.push(x2.iter().map(|v| v * v).sum());

                let m1_hat: f64 =
                    decoder.a1.iter().zip(y2).map(|(a, y)| a * y).sum::<f64>() - decoder.b1 * m2;
                let m2_hat: f64 =
                    decoder.a2.iter().zip(y1).map(|(a, y)| a * y).sum::<f64>() - decoder.b2 * m1;
                sums.err1.push(m1_hat - m1);
                sums.err2.push(m2_hat - m2);
                if cfg.message_model == MessageModel::Binary {
                    let decide = |v: f64| if v >= 0.0 { 1.0 } else { -1.0 };
                    sums.wrong1 += u64::from(decide(m1_hat) != m1);
                    sums.wrong2 += u64::from(decide(m2_hat) != m2);
                }
            }
            sums
        })
        .collect();

    let mut total = Sums::default();
    for p in &partials {
        total.merge(p);
    }
    let t = cfg.trials as f64;
    let binary = cfg.message_model == MessageModel::Binary;
    Ok(SimulationReport {
        emp_p1: mean_estimate(&total.e1x, t),
        emp_p2: mean_estimate(&total.e2x, t),
        emp_snr1: snr_estimate(&total.err1, t),
        emp_snr2: snr_estimate(&total.err2, t),
        bias1: mean_estimate(&total.err1, t),
        bias2: mean_estimate(&total.err2, t),
        err1: binary.then(|| rate_estimate(total.wrong1, cfg.trials)),
        err2: binary.then(|| rate_estimate(total.wrong2, cfg.trials)),
        trials: cfg.trials,
        seed: cfg.seed,
        message_model: cfg.message_model,
    })
}
