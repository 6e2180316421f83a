//! Reference schemes: open loop (no feedback) and one-way feedback, where User 2 only
//! echoes what it receives on alternate channel uses and User 1 optimizes its own
//! encoder around that fixed echo.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{
    q1_from_feedback, subdiagonal_matrix, transmit_powers, ChannelParams, EncoderPair, Targets,
};
use crate::optimizer::{
    canonical_g2, first_subproblem, g1_from_q1, FractionalSolverConfig,
};
use crate::rng::stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaselineKind {
    OpenLoop,
    OneWay,
}

impl BaselineKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::OpenLoop => "open-loop",
            Self::OneWay => "one-way",
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "open-loop" => Ok(Self::OpenLoop),
            "one-way" => Ok(Self::OneWay),
            other => Err(Error::InvalidInput(format!("unknown baseline '{other}'"))),
        }
    }
}

/// Which channel uses carry User 2's echo. With `Even`, User 1 sends on odd uses and
/// User 2 echoes on even uses (1-based); `Odd` swaps the roles of the two parities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeedbackParity {
    #[default]
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneWayConfig {
    pub parity: FeedbackParity,
    pub seed: u64,
    pub fp: FractionalSolverConfig,
}

impl Default for OneWayConfig {
    fn default() -> Self {
        Self {
            parity: FeedbackParity::Even,
            seed: 1,
            fp: FractionalSolverConfig::default(),
        }
    }
}

/// `g1 = sqrt(eta1) sigma1 e_1`, `g2 = sqrt(eta2) sigma2 e_N`, no feedback.
pub fn open_loop(params: &ChannelParams, targets: &Targets) -> EncoderPair {
    let n = params.n();
    let mut g1 = DVector::zeros(n);
    g1[0] = (targets.eta1() * params.sigma1_sq()).sqrt();
    let mut g2 = DVector::zeros(n);
    g2[n - 1] = (targets.eta2() * params.sigma2_sq()).sqrt();
    EncoderPair::without_feedback(g1, g2).expect("open-loop encoder is well formed")
}

/// Weighted power of the open-loop scheme, `alpha eta1 s1 + (1 - alpha) eta2 s2`.
pub fn open_loop_objective(params: &ChannelParams, targets: &Targets) -> f64 {
    targets.weighted(
        targets.eta1() * params.sigma1_sq(),
        targets.eta2() * params.sigma2_sq(),
    )
}

/// Unit echo gains on the feedback parity, restricted to uses `2..=N-1`.
pub fn one_way_relay(n: usize, parity: FeedbackParity) -> DMatrix<f64> {
    let want = match parity {
        FeedbackParity::Even => 0,
        FeedbackParity::Odd => 1,
    };
    let sub: Vec<f64> = (2..=n)
        .map(|i| if i < n && i % 2 == want { 1.0 } else { 0.0 })
        .collect();
    subdiagonal_matrix(&sub)
}

/// Uses on which User 1 may place message energy: the non-feedback parity plus use N.
pub fn one_way_support(n: usize, parity: FeedbackParity) -> Vec<bool> {
    let msg = match parity {
        FeedbackParity::Even => 1,
        FeedbackParity::Odd => 0,
    };
    (1..=n).map(|k| k == n || k % 2 == msg).collect()
}

/// One-way feedback baseline: unit echo on the feedback parity, User 1 optimized around
/// it. Falls back to open loop when `N < 3` or when the echo costs more than it saves.
pub fn one_way_baseline(
    params: &ChannelParams,
    targets: &Targets,
    cfg: &OneWayConfig,
) -> Result<EncoderPair> {
    let n = params.n();
    if n < 3 {
        log::warn!("N = {n} leaves no channel use for feedback; using the open-loop encoder");
        return Ok(open_loop(params, targets));
    }
    let g2 = canonical_g2(params, targets)?;
    let f2 = one_way_relay(n, cfg.parity);
    let support = one_way_support(n, cfg.parity);
    let mut rng = stream(cfg.seed, 0);
    let (q1, f1) = first_subproblem(&f2, &support, params, targets, &cfg.fp, &mut rng)?;
    let g1 = g1_from_q1(&q1, &q1_from_feedback(&f1, &f2, params))?;
    let enc = EncoderPair::new_structured(g1, f1, g2, f2)?;
    // the echo costs User 2 power whether or not it helps; switch it off when it does not
    let echo = transmit_powers(&enc, params, targets.alpha())?.weighted;
    let plain = open_loop_objective(params, targets);
    if echo > plain {
        log::info!("one-way echo costs {echo} > open loop {plain}; echo disabled");
        return Ok(open_loop(params, targets));
    }
    Ok(enc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{snr_pair, subdiagonal};
    use approx::assert_relative_eq;

    fn setup(n: usize) -> (ChannelParams, Targets) {
        (
            ChannelParams::new(n, 1.0, 0.5).unwrap(),
            Targets::new(10.0, 10.0, 0.8).unwrap(),
        )
    }

    #[test]
    fn open_loop_values() {
        let (p, t) = setup(5);
        let enc = open_loop(&p, &t);
        assert_relative_eq!(enc.g1().norm_squared(), 10.0, epsilon = 1e-12);
        let (s1, s2) = snr_pair(&enc, &p).unwrap();
        assert_relative_eq!(s1, 10.0, epsilon = 1e-12);
        assert_relative_eq!(s2, 10.0, epsilon = 1e-12);
        let pw = transmit_powers(&enc, &p, 0.8).unwrap();
        assert_relative_eq!(pw.weighted, 9.0, epsilon = 1e-12);
        assert_relative_eq!(open_loop_objective(&p, &t), 9.0, epsilon = 1e-15);
    }

    #[test]
    fn parity_patterns() {
        assert_eq!(subdiagonal(&one_way_relay(7, FeedbackParity::Even)), vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        assert_eq!(subdiagonal(&one_way_relay(7, FeedbackParity::Odd)), vec![0.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(
            one_way_support(7, FeedbackParity::Even),
            vec![true, false, true, false, true, false, true]
        );
        assert_eq!(
            one_way_support(6, FeedbackParity::Odd),
            vec![false, true, false, true, false, true]
        );
    }

    #[test]
    fn short_block_falls_back() {
        let (p, t) = setup(2);
        assert_eq!(one_way_baseline(&p, &t, &OneWayConfig::default()).unwrap(), open_loop(&p, &t));
    }

    #[test]
    fn one_way_meets_targets() {
        let (p, t) = setup(7);
        let enc = one_way_baseline(&p, &t, &OneWayConfig::default()).unwrap();
        let (s1, s2) = snr_pair(&enc, &p).unwrap();
        assert_relative_eq!(s1, 10.0, epsilon = 1e-8);
        assert_relative_eq!(s2, 10.0, epsilon = 1e-8);
    }

    #[test]
    fn costly_echo_is_switched_off() {
        let (p, t) = setup(7);
        let t = t.with_alpha(0.35).unwrap();
        let enc = one_way_baseline(&p, &t, &OneWayConfig::default()).unwrap();
        assert_eq!(enc, open_loop(&p, &t));
    }

    #[test]
    fn names_round_trip() {
        for k in [BaselineKind::OpenLoop, BaselineKind::OneWay] {
            assert_eq!(k.as_str().parse::<BaselineKind>().unwrap(), k);
        }
        assert!("two-way".parse::<BaselineKind>().is_err());
    }
}
