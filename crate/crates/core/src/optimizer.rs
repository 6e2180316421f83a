//! Iterative two-way optimization of the linear encoders.
//!
//! User 2 relays only its most recent reception (single-subdiagonal `F2`), never relays at
//! the last use, and sends its message only on the last use. What remains is a problem in
//! the whitened message vector `q1 = Q1^{-1/2} g1` (with `|q1|^2 = eta1`), the feedback
//! matrix `F1` and the relay gains `f_{2,2..N-1}`. It is solved by alternating two
//! sub-problems:
//!
//! 1. for fixed `F2`, minimize `E|x1|^2`: `F1` has a closed form in terms of `q1`, and the
//!    squared entries `x = q1.^2` solve a sum-of-ratios program over a scaled simplex;
//! 2. for fixed `(q1, F1)`, update each relay gain in turn from its stationarity
//!    condition, with `p = Q1^{1/2} q1` frozen for the duration of a sweep.
//!
//! Indices in the docs below are 1-based channel uses; the code is 0-based.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    is_single_subdiagonal, matrix_sqrt_psd, optimal_combiners, q1_from_feedback,
    q2_from_feedback, reduced_powers, snr_pair, subdiagonal_matrix, transmit_powers,
    ChannelParams, DecoderPair, EncoderPair, PowerReport, Targets,
};
use crate::rng::{simplex_point, stream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalSolverConfig {
    /// Random interior starting points per solve (on top of the simplex vertices).
    pub random_starts: usize,
    /// Projected-gradient iterations per start.
    pub max_iter: usize,
    /// Stop once the projected-gradient norm drops below this.
    pub tol: f64,
    /// A solution counts as stationary when the projected-gradient norm is below this.
    pub stationarity: f64,
}

impl Default for FractionalSolverConfig {
    fn default() -> Self {
        Self {
            random_starts: 8,
            max_iter: 20_000,
            tol: 1e-10,
            stationarity: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Stopping threshold on successive objective values (outer and inner loops).
    pub eps: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub restarts: usize,
    pub seed: u64,
    pub fp: FractionalSolverConfig,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            eps: 1e-3,
            max_outer: 200,
            max_inner: 200,
            restarts: 30,
            seed: 1,
            fp: FractionalSolverConfig::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::InvalidInput(format!("eps must be positive, got {}", self.eps)));
        }
        if self.max_outer == 0 || self.max_inner == 0 || self.restarts == 0 {
            return Err(Error::InvalidInput(
                "max_outer, max_inner and restarts must all be >= 1".into(),
            ));
        }
        if self.fp.max_iter == 0 {
            return Err(Error::InvalidInput("fractional solver needs max_iter >= 1".into()));
        }
        Ok(())
    }
}

/// `minimize sum_i u_i^T x / (1 + m_i^T x)  s.t.  1^T x = budget, x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalProgram {
    pub u: Vec<DVector<f64>>,
    pub m: Vec<DVector<f64>>,
    pub budget: f64,
}

impl FractionalProgram {
    pub fn dim(&self) -> usize {
        self.u.first().map_or(0, |u| u.len())
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        self.u
            .iter()
            .zip(&self.m)
            .map(|(u, m)| u.dot(x) / (1.0 + m.dot(x)))
            .sum()
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(x.len());
        for (u, m) in self.u.iter().zip(&self.m) {
            let den = 1.0 + m.dot(x);
            let num = u.dot(x);
            g += u / den - m * (num / (den * den));
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution {
    pub x: DVector<f64>,
    pub objective: f64,
    pub projected_gradient: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimReport {
    pub enc: EncoderPair,
    pub decoders: DecoderPair,
    pub powers: PowerReport,
    /// Weighted objective after every outer iteration of the winning restart.
    pub objective_trace: Vec<f64>,
    /// Best objective reached by each restart, in restart order.
    pub restart_objectives: Vec<f64>,
    /// Winning restart; equals the number of restarts when the zero-feedback point won.
    pub restart_index: usize,
    pub seed: u64,
    /// False when every restart hit `max_outer` before the stopping rule fired.
    pub converged: bool,
}

/// User 2's message vector `[0, ..., 0, sqrt(eta2) sigma2]`.
pub fn canonical_g2(params: &ChannelParams, targets: &Targets) -> Result<DVector<f64>> {
    if !targets.last_use_regime(params) {
        return Err(Error::BelowThreshold {
            alpha: targets.alpha(),
            threshold: Targets::last_use_threshold(params),
        });
    }
    let mut g2 = DVector::zeros(params.n());
    g2[params.n() - 1] = (targets.eta2() * params.sigma2_sq()).sqrt();
    Ok(g2)
}

/// Zeroes the last relay gain `f_{2,N}`; relaying at the last use only costs power.
pub fn zero_last_relay_gain(f2: &DMatrix<f64>) -> DMatrix<f64> {
    let n = f2.nrows();
    let mut out = f2.clone();
    out[(n - 1, n - 2)] = 0.0;
    out
}

/// Rescales `g1` so that the analytic SNR of user 1 equals `eta1`.
pub fn rescale_g1(enc: &EncoderPair, params: &ChannelParams, eta1: f64) -> Result<EncoderPair> {
    let (snr1, _) = snr_pair(enc, params)?;
    if !(snr1 > 0.0) {
        return Err(Error::DegenerateEncoder { user: 1 });
    }
    enc.with_g1(enc.g1() * (eta1 / snr1).sqrt())
}

/// Rescales `g2` so that the analytic SNR of user 2 equals `eta2`.
pub fn rescale_g2(enc: &EncoderPair, params: &ChannelParams, eta2: f64) -> Result<EncoderPair> {
    let (_, snr2) = snr_pair(enc, params)?;
    if !(snr2 > 0.0) {
        return Err(Error::DegenerateEncoder { user: 2 });
    }
    enc.with_g2(enc.g2() * (eta2 / snr2).sqrt())
}

fn check_structured_tail_free(f2: &DMatrix<f64>, n: usize) -> Result<()> {
    if f2.shape() != (n, n) {
        return Err(Error::InvalidInput(format!(
            "F2 has shape {:?}, expected ({n}, {n})",
            f2.shape()
        )));
    }
    if !is_single_subdiagonal(f2) {
        return Err(Error::InvalidInput("F2 must be single-subdiagonal".into()));
    }
    if f2[(n - 1, n - 2)] != 0.0 {
        return Err(Error::InvalidInput("the last relay gain f2[N] must be zero".into()));
    }
    Ok(())
}

/// Relay gain `f_{2,i}` for 1-based use `i` in `2..=N`.
#[inline]
fn relay(f2: &DMatrix<f64>, i: usize) -> f64 {
    f2[(i - 1, i - 2)]
}

/// `E|x1|^2`-optimal feedback matrix for a given `q1` and `F2`.
///
/// Column `i` (1-based, `2 <= i <= N-1`) is
/// `-(f_{2,i} s1 / (f_{2,i}^2 s1 + s2)) * q_{i-1} / (1 + |h_i|^2) * h_i` with
/// `h_i = (q_{i+1}, ..., q_N)`; the first column is zero.
pub fn solve_f1(
    q1: &DVector<f64>,
    f2: &DMatrix<f64>,
    params: &ChannelParams,
) -> Result<DMatrix<f64>> {
    let n = params.n();
    if q1.len() != n {
        return Err(Error::InvalidInput("q1 has the wrong length".into()));
    }
    check_structured_tail_free(f2, n)?;
    let (s1, s2) = (params.sigma1_sq(), params.sigma2_sq());
    let mut f1 = DMatrix::zeros(n, n);
    for i in 2..n {
        let a = relay(f2, i);
        let q_prev = q1[i - 2];
        if a == 0.0 || q_prev == 0.0 {
            continue;
        }
        let h = q1.rows(i, n - i);
        let scale = -(a * s1 / (a * a * s1 + s2)) * q_prev / (1.0 + h.norm_squared());
        for (r, hv) in h.iter().enumerate() {
            f1[(i + r, i - 1)] = scale * hv;
        }
    }
    Ok(f1)
}

/// Contribution of feedback column `i` (1-based, `1 <= i <= N-1`) to `E|x1|^2`:
/// `E|x1|^2 = sum_i phi_i + s1 (q_{N-1}^2 + q_N^2)`.
pub fn column_cost(
    i: usize,
    column: &DVector<f64>,
    q1: &DVector<f64>,
    f2: &DMatrix<f64>,
    params: &ChannelParams,
) -> f64 {
    let n = params.n();
    let (s1, s2) = (params.sigma1_sq(), params.sigma2_sq());
    let h = q1.rows(i, n - i);
    let hf = h.dot(column);
    let ff = column.norm_squared();
    if i == 1 {
        hf * hf * s2 + ff * s2
    } else {
        let a = relay(f2, i);
        let lead = q1[i - 2] + a * hf;
        lead * lead * s1 + hf * hf * s2 + ff * (a * a * s1 + s2)
    }
}

/// Sum-of-ratios program whose value at `x = q1.^2` equals the minimum of `E|x1|^2`
/// over `F1` for the given `F2`.
///
/// For `j = 1..N-2`, `u_j` carries `f_{2,j+1}^2 s1^2 / (f_{2,j+1}^2 s1 + s2)` at position
/// `j` and `m_j` is the indicator of positions `j+2..N` (the tail energy `|h_{j+1}|^2`);
/// `u_{N-1}` collects the linear terms and `m_{N-1} = 0`.
pub fn build_fractional_program(
    f2: &DMatrix<f64>,
    params: &ChannelParams,
    targets: &Targets,
) -> Result<FractionalProgram> {
    let n = params.n();
    check_structured_tail_free(f2, n)?;
    let (s1, s2) = (params.sigma1_sq(), params.sigma2_sq());
    let mut u = Vec::with_capacity(n - 1);
    let mut m = Vec::with_capacity(n - 1);
    let mut linear = DVector::zeros(n);
    for j in 1..=n.saturating_sub(2) {
        let a2 = relay(f2, j + 1).powi(2);
        let den = a2 * s1 + s2;
        let mut uj = DVector::zeros(n);
        uj[j - 1] = a2 * s1 * s1 / den;
        let mut mj = DVector::zeros(n);
        for p in (j + 1)..n {
            mj[p] = 1.0;
        }
        u.push(uj);
        m.push(mj);
        linear[j - 1] = s1 * s2 / den;
    }
    linear[n - 2] = s1;
    linear[n - 1] = s1;
    u.push(linear);
    m.push(DVector::zeros(n));
    Ok(FractionalProgram {
        u,
        m,
        budget: targets.eta1(),
    })
}

/// Euclidean projection of `v` onto `{x >= 0, sum x = total}` over the coordinates
/// where `support` is true; the other coordinates are set to zero.
pub fn project_simplex(v: &DVector<f64>, support: &[bool], total: f64) -> DVector<f64> {
    let mut vals: Vec<f64> = v
        .iter()
        .zip(support)
        .filter(|(_, &s)| s)
        .map(|(&x, _)| x)
        .collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &val) in vals.iter().enumerate() {
        cum += val;
        let t = (cum - total) / (k + 1) as f64;
        if val - t > 0.0 {
            theta = t;
        }
    }
    DVector::from_iterator(
        v.len(),
        v.iter()
            .zip(support)
            .map(|(&x, &s)| if s { (x - theta).max(0.0) } else { 0.0 }),
    )
}

fn projected_gradient_norm(
    fp: &FractionalProgram,
    x: &DVector<f64>,
    support: &[bool],
) -> f64 {
    let g = fp.gradient(x);
    (x - project_simplex(&(x - g), support, fp.budget)).norm()
}

/// Projected gradient descent with backtracking from a single start.
fn descend(
    fp: &FractionalProgram,
    mut x: DVector<f64>,
    support: &[bool],
    cfg: &FractionalSolverConfig,
) -> (DVector<f64>, f64) {
    let mut f = fp.objective(&x);
    let mut step = 1.0;
    for _ in 0..cfg.max_iter {
        let g = fp.gradient(&x);
        if (&x - project_simplex(&(&x - &g), support, fp.budget)).norm() <= cfg.tol {
            break;
        }
        let mut accepted = false;
        while step > 1e-14 {
            let cand = project_simplex(&(&x - &g * step), support, fp.budget);
            let d = &cand - &x;
            let fc = fp.objective(&cand);
            if fc <= f + g.dot(&d) + d.norm_squared() / (2.0 * step) {
                accepted = fc <= f;
                if accepted {
                    x = cand;
                    f = fc;
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        step *= 2.0;
    }
    (x, f)
}

/// Solves the program over the full simplex.
pub fn solve_fractional<R: Rng + ?Sized>(
    fp: &FractionalProgram,
    cfg: &FractionalSolverConfig,
    rng: &mut R,
) -> FractionalSolution {
    let support = vec![true; fp.dim()];
    solve_fractional_on(fp, &support, cfg, rng)
}

/// Solves the program with `x` restricted to the coordinates flagged in `support`.
///
/// Starts from every support vertex and from `cfg.random_starts` random interior points
/// and keeps the lowest objective; the first start on a tie wins.
pub fn solve_fractional_on<R: Rng + ?Sized>(
    fp: &FractionalProgram,
    support: &[bool],
    cfg: &FractionalSolverConfig,
    rng: &mut R,
) -> FractionalSolution {
    let n = fp.dim();
    let idx: Vec<usize> = (0..n).filter(|&i| support[i]).collect();
    let mut starts = Vec::with_capacity(idx.len() + cfg.random_starts);
    // the last-use vertex first: it certifies the value s1 * eta1
    for &v in idx.iter().rev() {
        let mut x = DVector::zeros(n);
        x[v] = fp.budget;
        starts.push(x);
    }
    for _ in 0..cfg.random_starts {
        let pt = simplex_point(rng, idx.len(), fp.budget);
        let mut x = DVector::zeros(n);
        for (&i, &v) in idx.iter().zip(&pt) {
            x[i] = v;
        }
        starts.push(x);
    }

    let mut best: Option<(DVector<f64>, f64)> = None;
    for x0 in starts {
        let (x, f) = descend(fp, x0, support, cfg);
        if best.as_ref().is_none_or(|(_, bf)| f < *bf) {
            best = Some((x, f));
        }
    }
    let (x, objective) = best.expect("at least one start");
    let pg = projected_gradient_norm(fp, &x, support);
    FractionalSolution {
        x,
        objective,
        projected_gradient: pg,
        converged: pg <= cfg.stationarity,
    }
}

/// `q_i = sqrt(x_i)`.
pub fn q1_from_x(x: &DVector<f64>) -> DVector<f64> {
    x.map(|v| v.max(0.0).sqrt())
}

/// `g1 = Q1^{1/2} q1`, which gives `SNR1 = |q1|^2`.
pub fn g1_from_q1(q1: &DVector<f64>, q1_matrix: &DMatrix<f64>) -> Result<DVector<f64>> {
    Ok(matrix_sqrt_psd(q1_matrix)? * q1)
}

/// Coefficient `c_i` of the relay-gain stationarity condition
/// `2 alpha s1 q_{i-1} h_i^T f_{1,i} + c_i f_{2,i} = 0` (1-based `i` in `2..=N-1`).
fn relay_curvature(
    i: usize,
    q1: &DVector<f64>,
    f1: &DMatrix<f64>,
    f2: &DMatrix<f64>,
    p: &DVector<f64>,
    params: &ChannelParams,
    alpha: f64,
) -> f64 {
    let n = params.n();
    let (s1, s2) = (params.sigma1_sq(), params.sigma2_sq());
    let col = f1.view((i, i - 1), (n - i, 1));
    let h = q1.rows(i, n - i);
    let hf = h.dot(&col);
    let beta = 1.0 - alpha;

    let mut c = 2.0 * alpha * s1 * (hf * hf + col.norm_squared())
        + 2.0 * beta * p[i - 2].powi(2)
        + 2.0 * beta * s1;
    // later relays that re-send what column i of F1 injected
    let mut tail = 0.0;
    for j in (i + 1)..n {
        tail += f1[(j - 1, i - 1)].powi(2) * relay(f2, j + 1).powi(2);
    }
    // earlier relays feeding row i-1 of F1
    for k in 2..i.saturating_sub(1) {
        tail += f1[(i - 2, k - 1)].powi(2) * relay(f2, k).powi(2);
    }
    c += 2.0 * beta * s1 * tail;
    let row: f64 = (1..i.saturating_sub(1)).map(|j| f1[(i - 2, j - 1)].powi(2)).sum();
    c + 2.0 * s2 * beta * row
}

/// One Gauss–Seidel sweep over the relay gains `f_{2,2..N-1}` with `p` held fixed.
/// Each gain is set to the root of its (quadratic) surrogate derivative using the
/// already-updated earlier gains.
pub fn f2_sweep(
    q1: &DVector<f64>,
    f1: &DMatrix<f64>,
    f2: &DMatrix<f64>,
    p: &DVector<f64>,
    params: &ChannelParams,
    alpha: f64,
) -> DMatrix<f64> {
    let n = params.n();
    let s1 = params.sigma1_sq();
    let mut out = f2.clone();
    for i in 2..n {
        let col = f1.view((i, i - 1), (n - i, 1));
        let hf = q1.rows(i, n - i).dot(&col);
        let c = relay_curvature(i, q1, f1, &out, p, params, alpha);
        out[(i - 1, i - 2)] = -2.0 * alpha * s1 * q1[i - 2] * hf / c;
    }
    out
}

/// Result of the inner relay-gain loop.
#[derive(Debug, Clone, PartialEq)]
pub struct F2Update {
    pub f2: DMatrix<f64>,
    pub objective: f64,
    pub sweeps: usize,
    pub converged: bool,
}

/// Weighted objective of the reduced problem at `(q1, F1, F2)`.
pub fn reduced_objective(
    q1: &DVector<f64>,
    f1: &DMatrix<f64>,
    f2: &DMatrix<f64>,
    params: &ChannelParams,
    targets: &Targets,
) -> Result<f64> {
    Ok(reduced_powers(q1, f1, f2, params, targets)?.weighted)
}

/// Repeats relay-gain sweeps until the weighted objective changes by at most `eps`.
/// `p = Q1^{1/2} q1` is recomputed at the start of every sweep.
pub fn update_f2(
    q1: &DVector<f64>,
    f1: &DMatrix<f64>,
    f2: &DMatrix<f64>,
    params: &ChannelParams,
    targets: &Targets,
    eps: f64,
    max_inner: usize,
) -> Result<F2Update> {
    check_structured_tail_free(f2, params.n())?;
    let mut f2 = f2.clone();
    let mut nu_new = reduced_objective(q1, f1, &f2, params, targets)?;
    let mut nu_old;
    for sweep in 1..=max_inner {
        let p = matrix_sqrt_psd(&q1_from_feedback(f1, &f2, params))? * q1;
        f2 = f2_sweep(q1, f1, &f2, &p, params, targets.alpha());
        nu_old = nu_new;
        nu_new = reduced_objective(q1, f1, &f2, params, targets)?;
        if (nu_new - nu_old).abs() <= eps {
            return Ok(F2Update {
                f2,
                objective: nu_new,
                sweeps: sweep,
                converged: true,
            });
        }
    }
    Ok(F2Update {
        f2,
        objective: nu_new,
        sweeps: max_inner,
        converged: false,
    })
}

#[derive(Debug, Clone)]
struct Iterate {
    q1: DVector<f64>,
    f1: DMatrix<f64>,
    f2: DMatrix<f64>,
    objective: f64,
}

#[derive(Debug, Clone)]
struct RestartOutcome {
    best: Iterate,
    trace: Vec<f64>,
    converged: bool,
}

/// Sub-problem 1 for a fixed `F2`: optimal `x` (hence `q1`) and closed-form `F1`.
pub(crate) fn first_subproblem<R: Rng + ?Sized>(
    f2: &DMatrix<f64>,
    support: &[bool],
    params: &ChannelParams,
    targets: &Targets,
    fp_cfg: &FractionalSolverConfig,
    rng: &mut R,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let fp = build_fractional_program(f2, params, targets)?;
    let sol = solve_fractional_on(&fp, support, fp_cfg, rng);
    let q1 = q1_from_x(&sol.x);
    let f1 = solve_f1(&q1, f2, params)?;
    Ok((q1, f1))
}

fn run_restart(
    index: usize,
    params: &ChannelParams,
    targets: &Targets,
    cfg: &OptimizerConfig,
) -> Result<RestartOutcome> {
    let n = params.n();
    let mut rng = stream(cfg.seed, index as u64);
    let mut sub = vec![0.0; n - 1];
    // f_{2,2..N-1} ~ U(0, 1); f_{2,N} = 0
    for v in sub.iter_mut().take(n.saturating_sub(2)) {
        *v = rng.random::<f64>();
    }
    let mut f2 = subdiagonal_matrix(&sub);
    let support = vec![true; n];

    let mut best: Option<Iterate> = None;
    let mut trace = Vec::new();
    let mut s_old = f64::INFINITY;
    let mut converged = false;
    for _ in 0..cfg.max_outer {
        let (q1, f1) = first_subproblem(&f2, &support, params, targets, &cfg.fp, &mut rng)?;
        let upd = update_f2(&q1, &f1, &f2, params, targets, cfg.eps, cfg.max_inner)?;
        f2 = upd.f2;
        let s_new = reduced_objective(&q1, &f1, &f2, params, targets)?;
        trace.push(s_new);
        if best.as_ref().is_none_or(|b| s_new < b.objective) {
            best = Some(Iterate {
                q1: q1.clone(),
                f1: f1.clone(),
                f2: f2.clone(),
                objective: s_new,
            });
        }
        if (s_new - s_old).abs() <= cfg.eps {
            converged = true;
            break;
        }
        s_old = s_new;
    }
    Ok(RestartOutcome {
        best: best.expect("max_outer >= 1"),
        trace,
        converged,
    })
}

/// All of User 1's energy on the first use, no feedback in either direction.
fn zero_feedback_outcome(params: &ChannelParams, targets: &Targets) -> Result<RestartOutcome> {
    let n = params.n();
    let mut q1 = DVector::zeros(n);
    q1[0] = targets.eta1().sqrt();
    let f1 = DMatrix::zeros(n, n);
    let f2 = DMatrix::zeros(n, n);
    let objective = reduced_objective(&q1, &f1, &f2, params, targets)?;
    Ok(RestartOutcome {
        best: Iterate {
            q1,
            f1,
            f2,
            objective,
        },
        trace: vec![objective],
        converged: true,
    })
}

/// Runs the alternating optimization from `cfg.restarts` random relay-gain
/// initializations and returns the best encoder pair found.
pub fn two_way_optimize(
    params: &ChannelParams,
    targets: &Targets,
    cfg: &OptimizerConfig,
) -> Result<OptimReport> {
    cfg.validate()?;
    let g2 = canonical_g2(params, targets)?;

    let outcomes: Vec<RestartOutcome> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| run_restart(r, params, targets, cfg))
        .collect::<Result<_>>()?;

    let mut winner = 0;
    for (r, o) in outcomes.iter().enumerate() {
        if o.best.objective < outcomes[winner].best.objective {
            winner = r;
        }
    }
    // F2 = 0 is feasible and reproduces the open-loop cost; a restart that stops on the
    // eps rule while its relay gains are still decaying can end slightly above it
    let fallback = zero_feedback_outcome(params, targets)?;
    let (best, trace, restart_index) = if fallback.best.objective < outcomes[winner].best.objective {
        (&fallback.best, fallback.trace.clone(), cfg.restarts)
    } else {
        (&outcomes[winner].best, outcomes[winner].trace.clone(), winner)
    };
    let g1 = g1_from_q1(&best.q1, &q1_from_feedback(&best.f1, &best.f2, params))?;
    let enc = EncoderPair::new_structured(g1, best.f1.clone(), g2, best.f2.clone())?;
    let decoders = optimal_combiners(&enc, params)?;
    let powers = transmit_powers(&enc, params, targets.alpha())?;

    Ok(OptimReport {
        enc,
        decoders,
        powers,
        objective_trace: trace,
        restart_objectives: outcomes.iter().map(|o| o.best.objective).collect(),
        restart_index,
        seed: cfg.seed,
        converged: outcomes.iter().any(|o| o.converged),
    })
}

/// Smallest eigenvalue of the matrix governing the `g2` sub-problem and whether it lies in
/// `[min(alpha s1, (1-alpha) s2), (1-alpha) s2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjectureCheck {
    pub nu_min: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

/// `B = alpha Q2^{1/2} F1^T F1 Q2^{1/2} + (1-alpha) Q2^{1/2} (I + F2 F1)^T (I + F2 F1) Q2^{1/2}`.
pub fn conjecture_matrix(
    f1: &DMatrix<f64>,
    f2: &DMatrix<f64>,
    params: &ChannelParams,
    alpha: f64,
) -> Result<DMatrix<f64>> {
    let n = params.n();
    if f1.shape() != (n, n) || f2.shape() != (n, n) {
        return Err(Error::InvalidInput("feedback matrices have the wrong shape".into()));
    }
    let root = matrix_sqrt_psd(&q2_from_feedback(f2, params))?;
    let a = DMatrix::<f64>::identity(n, n) + f2 * f1;
    let inner = f1.transpose() * f1 * alpha + a.transpose() * &a * (1.0 - alpha);
    let b = &root * inner * &root;
    Ok((&b + b.transpose()) * 0.5)
}

pub fn check_conjecture(
    f1: &DMatrix<f64>,
    f2: &DMatrix<f64>,
    params: &ChannelParams,
    alpha: f64,
) -> Result<ConjectureCheck> {
    check_conjecture_with(f1, f2, params, alpha, 1e-9)
}

pub fn check_conjecture_with(
    f1: &DMatrix<f64>,
    f2: &DMatrix<f64>,
    params: &ChannelParams,
    alpha: f64,
    tol: f64,
) -> Result<ConjectureCheck> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let b = conjecture_matrix(f1, f2, params, alpha)?;
    let nu_min = SymmetricEigen::new(b).eigenvalues.min();
    let upper = (1.0 - alpha) * params.sigma2_sq();
    let lower = (alpha * params.sigma1_sq()).min(upper);
    Ok(ConjectureCheck {
        nu_min,
        lower_ok: nu_min >= lower - tol,
        upper_ok: nu_min <= upper + tol,
    })
}

/// A random instance for sampling the eigenvalue bounds: blocklength uniform on
/// `n_range`, `alpha` drawn from `alphas`, `N(0, 1)` entries in the strictly lower part
/// of `F1` and in the relay gains `f_{2,2..N-1}` (`f_{2,N} = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct ConjectureInstance {
    pub params: ChannelParams,
    pub alpha: f64,
    pub f1: DMatrix<f64>,
    pub f2: DMatrix<f64>,
}

pub fn sample_conjecture_instance(
    base: &ChannelParams,
    n_range: std::ops::RangeInclusive<usize>,
    alphas: &[f64],
    seed: u64,
    index: u64,
) -> Result<ConjectureInstance> {
    if alphas.is_empty() || n_range.is_empty() || *n_range.start() < 2 {
        return Err(Error::InvalidInput("empty sampling domain".into()));
    }
    let mut rng = stream(seed, index);
    let mut normal = crate::rng::BoxMuller::new();
    let n = rng.random_range(n_range);
    let alpha = alphas[rng.random_range(0..alphas.len())];
    let params = base.with_n(n)?;
    let mut f1 = DMatrix::zeros(n, n);
    for r in 1..n {
        for c in 0..r {
            f1[(r, c)] = normal.sample(&mut rng);
        }
    }
    let mut sub = vec![0.0; n - 1];
    for v in sub.iter_mut().take(n - 2) {
        *v = normal.sample(&mut rng);
    }
    Ok(ConjectureInstance {
        params,
        alpha,
        f1,
        f2: subdiagonal_matrix(&sub),
    })
}
