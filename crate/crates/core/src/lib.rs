//! Detection-performance engines for monostatic radar sensing with ZP- and
//! CP-OFDM energy detection.
//!
//! The crate provides analytic probability-of-detection and false-alarm
//! machinery (exact sum-Gamma, Gamma and Gaussian approximations), the
//! radar link budget and scene model behind them, range/clutter trade-off
//! analytics, and a deterministic Monte Carlo engine that validates every
//! closed form.
//!
//! Modules:
//! * [`stats`] — Gamma/sum-Gamma/Gaussian distribution primitives.
//! * [`scene`] — link budget, waveform numerology, channel scenes.
//! * [`zp`] / [`cp`] — the two detectors' analytic PD/PFA routes.
//! * [`tradeoff`] — range comparison, ZP-size upper bound, KLD analysis.
//! * [`sim`] — counter-seeded Monte Carlo trials and empirical ROC.

pub mod cp;
pub mod scene;
pub mod sim;
pub mod stats;
pub mod tradeoff;
pub mod zp;

/// Analytic route for PD/PFA evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionModel {
    /// Sum-Gamma (ZP, clutter-free) or its single-Gamma limit.
    Exact,
    /// Gamma approximation.
    Gamma,
    /// Gaussian approximation from window moments.
    Gaussian,
}

impl std::fmt::Display for DetectionModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DetectionModel::Exact => write!(f, "exact"),
            DetectionModel::Gamma => write!(f, "gamma"),
            DetectionModel::Gaussian => write!(f, "gaussian"),
        }
    }
}

impl std::str::FromStr for DetectionModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(DetectionModel::Exact),
            "gamma" => Ok(DetectionModel::Gamma),
            "gaussian" => Ok(DetectionModel::Gaussian),
            other => Err(format!("unknown detection model '{other}'")),
        }
    }
}
