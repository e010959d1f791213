//! Monte Carlo engine for the energy detectors.
//!
//! Every trial runs on its own counter-derived random stream
//! (trial seed = mix(master_seed, trial_index)), so results are bit-identical
//! regardless of how trials are partitioned across threads. Within a trial,
//! symbols, channel phases and noise each draw from tagged substreams in a
//! fixed order, which keeps H0 and H1 on identical randomness: they differ
//! exactly by the target term.

use crate::scene::{ChannelScene, Hypothesis, WaveformConfig, WaveformKind};
use crate::zp::zp_window;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid trial plan: {0}")]
    InvalidPlan(String),
}

pub type Result<T> = std::result::Result<T, SimError>;

/// One simulation campaign: scene, waveform, threshold grid, trial count
/// and the master seed everything derives from.
#[derive(Debug, Clone)]
pub struct TrialPlan {
    pub scene: ChannelScene,
    pub waveform: WaveformConfig,
    /// Thresholds in watts, ascending.
    pub thresholds: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
}

impl TrialPlan {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(SimError::InvalidPlan("at least one trial required".into()));
        }
        if self.thresholds.is_empty() {
            return Err(SimError::InvalidPlan("threshold list must not be empty".into()));
        }
        if !self.thresholds.windows(2).all(|w| w[0] <= w[1]) {
            return Err(SimError::InvalidPlan("thresholds must be sorted ascending".into()));
        }
        let max_delay = self
            .scene
            .clutter_delays
            .iter()
            .copied()
            .chain([self.scene.target_delay])
            .max()
            .unwrap_or(0);
        if max_delay as i64 >= 2 * self.waveform.symbol_len() as i64 {
            return Err(SimError::InvalidPlan(format!(
                "delay {max_delay} exceeds the 2N stream coverage"
            )));
        }
        self.scene.validate().map_err(|e| SimError::InvalidPlan(e.to_string()))?;
        self.waveform.validate().map_err(|e| SimError::InvalidPlan(e.to_string()))?;
        Ok(())
    }
}

/// Exceedance rate at one threshold with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalEstimate {
    pub threshold: f64,
    pub rate: f64,
    pub std_err: f64,
    pub trials: usize,
}

/// One (PFA, PD) pair of an empirical ROC sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub pfa: f64,
    pub pd: f64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Per-trial seed: a counter mix of the master seed, independent of
/// scheduling order.
pub fn trial_seed(master_seed: u64, trial_index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(trial_index.wrapping_add(1)))
}

const TAG_SYMBOL_BASE: u64 = 0x53594d42; // per-symbol data substreams
const TAG_CHANNEL: u64 = 0x4348414e; // phases + noise substream

fn substream(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(tag)))
}

fn complex_normal(rng: &mut ChaCha8Rng, variance: f64) -> Complex64 {
    let s = (variance * 0.5).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// Three adjacent transmitted symbols (indices −2, −1, 0) as one block of
/// 3N samples; index s ∈ [−2N, N) lives at s + 2N.
///
/// ZP symbols carry N_f data samples of variance η followed by N_zp zeros;
/// CP symbols carry unit-variance data with the first N_cp samples
/// duplicating the last N_cp.
pub fn gen_symbol_stream(wf: &WaveformConfig, trial_seed: u64) -> Vec<Complex64> {
    let n = wf.symbol_len() as usize;
    let n_f = wf.fft_size as usize;
    let mut stream = vec![Complex64::new(0.0, 0.0); 3 * n];
    for (slot, symbol_index) in (0..3).zip([-2i64, -1, 0]) {
        let mut rng = substream(trial_seed, TAG_SYMBOL_BASE + (symbol_index + 2) as u64);
        let base = slot * n;
        match wf.kind {
            WaveformKind::Zp => {
                let eta = wf.power_factor();
                for i in 0..n_f {
                    stream[base + i] = complex_normal(&mut rng, eta);
                }
                // The remaining guard samples stay zero.
            }
            WaveformKind::Cp => {
                let data: Vec<Complex64> =
                    (0..n_f).map(|_| complex_normal(&mut rng, 1.0)).collect();
                let n_cp = wf.guard_size as usize;
                for pos in 0..n {
                    stream[base + pos] = data[(pos + n_f - n_cp) % n_f];
                }
            }
        }
    }
    stream
}

/// Deterministic-magnitude channel coefficients with phases drawn from the
/// given stream: RSI, then clutters, then target (the target phase is drawn
/// even under H0 so both hypotheses consume identical randomness).
fn draw_taps(scene: &ChannelScene, rng: &mut ChaCha8Rng) -> (Vec<(Complex64, i64)>, (Complex64, i64)) {
    let mut interference = Vec::with_capacity(scene.clutter_delays.len() + 1);
    let rsi_amp = (scene.rsi_power_ratio * scene.noise_power).sqrt();
    let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
    interference.push((Complex64::from_polar(rsi_amp, phase), 0i64));
    let clutter_amp = scene.per_clutter_gain_sq().sqrt();
    for &d in &scene.clutter_delays {
        let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        interference.push((Complex64::from_polar(clutter_amp, phase), d as i64));
    }
    let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
    let target = (
        Complex64::from_polar(scene.target_gain_sq.sqrt(), phase),
        scene.target_delay as i64,
    );
    (interference, target)
}

/// Received symbol 0 (indices [0, N)) for the scene's hypothesis:
/// y[n] = Σ_j h_j x[n − L_j] + w[n], with per-trial uniform phases and
/// complex AWGN of power σ².
pub fn apply_channel(
    stream: &[Complex64],
    scene: &ChannelScene,
    wf: &WaveformConfig,
    rng: &mut ChaCha8Rng,
) -> Vec<Complex64> {
    let n = wf.symbol_len() as usize;
    debug_assert_eq!(stream.len(), 3 * n);
    let (interference, target) = draw_taps(scene, rng);
    let base = 2 * n as i64;
    let mut received = Vec::with_capacity(n);
    for idx in 0..n as i64 {
        let mut y = complex_normal(rng, scene.noise_power);
        for &(h, delay) in &interference {
            y += h * stream[(base + idx - delay) as usize];
        }
        if scene.hypothesis == Hypothesis::H1 {
            y += target.0 * stream[(base + idx - target.1) as usize];
        }
        received.push(y);
    }
    received
}

/// Energy-detection statistic: mean |y[n]|² over the window.
pub fn decision_stat(received: &[Complex64], window_start: usize, window_len: usize) -> f64 {
    assert!(window_len > 0, "empty detection window");
    assert!(window_start + window_len <= received.len(), "window outside block");
    let sum: f64 = received[window_start..window_start + window_len]
        .iter()
        .map(|y| y.norm_sqr())
        .sum();
    sum / window_len as f64
}

/// Detection window of the waveform: the shifted silent period for ZP, the
/// full symbol for CP.
pub fn detection_window(wf: &WaveformConfig) -> (usize, usize) {
    match wf.kind {
        WaveformKind::Zp => {
            let w = zp_window(wf).expect("validated ZP waveform");
            (w.start as usize, w.len as usize)
        }
        WaveformKind::Cp => (0, wf.symbol_len() as usize),
    }
}

/// Decision statistics of one trial under both hypotheses, sharing all
/// randomness; H1 adds exactly the target term.
fn trial_stats(plan: &TrialPlan, index: usize) -> (f64, f64) {
    let seed = trial_seed(plan.master_seed, index as u64);
    let stream = gen_symbol_stream(&plan.waveform, seed);
    let mut rng = substream(seed, TAG_CHANNEL);
    let (interference, target) = draw_taps(&plan.scene, &mut rng);
    let n = plan.waveform.symbol_len() as i64;
    let (start, len) = detection_window(&plan.waveform);
    let base = 2 * n;
    let mut acc_h0 = 0.0;
    let mut acc_h1 = 0.0;
    for idx in 0..n {
        let w = complex_normal(&mut rng, plan.scene.noise_power);
        if (idx as usize) < start || (idx as usize) >= start + len {
            continue;
        }
        let mut y0 = w;
        for &(h, delay) in &interference {
            y0 += h * stream[(base + idx - delay) as usize];
        }
        let y1 = y0 + target.0 * stream[(base + idx - target.1) as usize];
        acc_h0 += y0.norm_sqr();
        acc_h1 += y1.norm_sqr();
    }
    (acc_h0 / len as f64, acc_h1 / len as f64)
}

fn estimates_from_counts(
    thresholds: &[f64],
    exceed: &[u64],
    trials: usize,
) -> Vec<EmpiricalEstimate> {
    thresholds
        .iter()
        .zip(exceed)
        .map(|(&threshold, &count)| {
            let rate = count as f64 / trials as f64;
            EmpiricalEstimate {
                threshold,
                rate,
                std_err: (rate * (1.0 - rate) / trials as f64).sqrt(),
                trials,
            }
        })
        .collect()
}

/// Run the plan and report exceedance rates per threshold for each
/// requested hypothesis. Trials execute in parallel; counts are integers
/// merged by summation, so the result is independent of scheduling.
pub fn run_plan(
    plan: &TrialPlan,
    hypotheses: &[Hypothesis],
) -> Result<Vec<(Hypothesis, Vec<EmpiricalEstimate>)>> {
    plan.validate()?;
    let k = plan.thresholds.len();
    // hist[i] = number of trials exceeding exactly the first i thresholds.
    let (hist0, hist1) = (0..plan.trials)
        .into_par_iter()
        .fold(
            || (vec![0u64; k + 1], vec![0u64; k + 1]),
            |(mut h0, mut h1), i| {
                let (z0, z1) = trial_stats(plan, i);
                h0[plan.thresholds.partition_point(|&t| z0 > t)] += 1;
                h1[plan.thresholds.partition_point(|&t| z1 > t)] += 1;
                (h0, h1)
            },
        )
        .reduce(
            || (vec![0u64; k + 1], vec![0u64; k + 1]),
            |(mut a0, mut a1), (b0, b1)| {
                for i in 0..=k {
                    a0[i] += b0[i];
                    a1[i] += b1[i];
                }
                (a0, a1)
            },
        );
    let suffix = |hist: &[u64]| -> Vec<u64> {
        // Exceeding threshold i means the trial's prefix count is > i.
        let mut out = vec![0u64; k];
        let mut acc = 0u64;
        for i in (0..k).rev() {
            acc += hist[i + 1];
            out[i] = acc;
        }
        out
    };
    let exceed0 = suffix(&hist0);
    let exceed1 = suffix(&hist1);
    Ok(hypotheses
        .iter()
        .map(|&h| {
            let exceed = match h {
                Hypothesis::H0 => &exceed0,
                Hypothesis::H1 => &exceed1,
            };
            (h, estimates_from_counts(&plan.thresholds, exceed, plan.trials))
        })
        .collect())
}

/// All per-trial decision statistics under one hypothesis, in trial order
/// (for moment validation).
pub fn collect_decision_stats(plan: &TrialPlan, hypothesis: Hypothesis) -> Result<Vec<f64>> {
    plan.validate()?;
    Ok((0..plan.trials)
        .into_par_iter()
        .map(|i| {
            let (z0, z1) = trial_stats(plan, i);
            match hypothesis {
                Hypothesis::H0 => z0,
                Hypothesis::H1 => z1,
            }
        })
        .collect())
}

/// Empirical ROC over the plan's threshold grid: (PFA, PD) per threshold,
/// both estimated from the same trials.
pub fn empirical_roc(plan: &TrialPlan) -> Result<Vec<RocPoint>> {
    let runs = run_plan(plan, &[Hypothesis::H0, Hypothesis::H1])?;
    let (h0, h1) = (&runs[0].1, &runs[1].1);
    Ok(h0
        .iter()
        .zip(h1)
        .map(|(f, d)| RocPoint { threshold: f.threshold, pfa: f.rate, pd: d.rate })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{build_scene, dbm_to_watts, distance_from_bins, SystemConfig};

    fn assert_close(actual: f64, expected: f64, tol: f64, msg: &str) {
        assert!(
            (actual - expected).abs() <= tol,
            "{msg}: expected {expected}, got {actual} (diff {:e})",
            (actual - expected).abs()
        );
    }

    fn table_i_config() -> SystemConfig {
        SystemConfig {
            tx_power: dbm_to_watts(20.0),
            antenna_gain: 16.0,
            carrier_freq: 2.4e9,
            bandwidth: 100e6,
            rcs: 10.0,
            pathloss_exp: 2.0,
            noise_psd: 1e-3 * 10f64.powf(-174.0 / 10.0),
        }
    }

    fn zp_wf() -> WaveformConfig {
        WaveformConfig::new(WaveformKind::Zp, 512, 128, 0).unwrap()
    }

    fn cp_wf() -> WaveformConfig {
        WaveformConfig::new(WaveformKind::Cp, 512, 128, 0).unwrap()
    }

    #[test]
    fn zp_stream_structure() {
        let wf = zp_wf();
        let stream = gen_symbol_stream(&wf, 42);
        assert_eq!(stream.len(), 3 * 640);
        // Zero guard blocks.
        for sym in 0..3 {
            for i in 512..640 {
                assert_eq!(stream[sym * 640 + i], Complex64::new(0.0, 0.0));
            }
        }
        // Average symbol power 1: η·N_f/N = 1.
        let trials = 2_000;
        let mut power = 0.0;
        for t in 0..trials {
            let s = gen_symbol_stream(&wf, trial_seed(7, t));
            power += s[..640].iter().map(|x| x.norm_sqr()).sum::<f64>() / 640.0;
        }
        power /= trials as f64;
        // var of the mean ≈ η²·N_f/(N²·trials)
        let se = (1.25f64 * 1.25 * 512.0 / (640.0 * 640.0 * trials as f64)).sqrt();
        assert_close(power, 1.0, 4.0 * se, "ZP unit average power");
    }

    #[test]
    fn cp_stream_duplication() {
        let wf = cp_wf();
        let stream = gen_symbol_stream(&wf, 42);
        for sym in 0..3 {
            for i in 0..128 {
                assert_eq!(
                    stream[sym * 640 + i],
                    stream[sym * 640 + i + 512],
                    "x[n] = x[n + N_f] for n < N_cp"
                );
            }
        }
        // Adjacent symbols are independent (different substreams).
        assert_ne!(stream[0], stream[640]);
    }

    #[test]
    fn stream_is_seed_deterministic() {
        let wf = cp_wf();
        assert_eq!(gen_symbol_stream(&wf, 9), gen_symbol_stream(&wf, 9));
        assert_ne!(gen_symbol_stream(&wf, 9), gen_symbol_stream(&wf, 10));
    }

    #[test]
    fn h0_h1_differ_exactly_by_target_term() {
        let cfg = table_i_config();
        let wf = zp_wf();
        let scene =
            build_scene(&cfg, &wf, 100.0, 1.0, 0.0, vec![], Hypothesis::H1).unwrap();
        let seed = trial_seed(1234, 0);
        let stream = gen_symbol_stream(&wf, seed);
        let y1 = apply_channel(&stream, &scene, &wf, &mut substream(seed, TAG_CHANNEL));
        let h0 = scene.with_hypothesis(Hypothesis::H0);
        let y0 = apply_channel(&stream, &h0, &wf, &mut substream(seed, TAG_CHANNEL));
        // Reconstruct the target term deterministically from the same stream.
        let mut any_diff = false;
        for n in 0..640usize {
            let diff = y1[n] - y0[n];
            let expected_zero = stream[2 * 640 + n - scene.target_delay as usize]
                == Complex64::new(0.0, 0.0);
            if expected_zero {
                assert!(diff.norm() < 1e-12, "no target energy where x is zero");
            } else {
                any_diff = true;
            }
        }
        assert!(any_diff, "H1 must add target energy somewhere");
    }

    #[test]
    fn pure_awgn_sample_variance() {
        let cfg = table_i_config();
        let wf = cp_wf();
        let scene = build_scene(&cfg, &wf, 100.0, 0.0, 0.0, vec![], Hypothesis::H0).unwrap();
        let seed = trial_seed(5, 3);
        let stream = gen_symbol_stream(&wf, seed);
        let y = apply_channel(&stream, &scene, &wf, &mut substream(seed, TAG_CHANNEL));
        let mean_power = y.iter().map(|v| v.norm_sqr()).sum::<f64>() / y.len() as f64;
        let se = scene.noise_power / (y.len() as f64).sqrt();
        assert_close(mean_power, scene.noise_power, 4.0 * se, "AWGN power");
    }

    #[test]
    fn received_power_matches_cp_moments() {
        let cfg = table_i_config();
        let wf = cp_wf();
        let d = distance_from_bins(64, cfg.bandwidth);
        let scene = build_scene(&cfg, &wf, d, 1.0, 0.5, vec![32], Hypothesis::H1).unwrap();
        let trials = 400usize;
        let mut mean = 0.0;
        for t in 0..trials {
            let seed = trial_seed(99, t as u64);
            let stream = gen_symbol_stream(&wf, seed);
            let y = apply_channel(&stream, &scene, &wf, &mut substream(seed, TAG_CHANNEL));
            mean += y.iter().map(|v| v.norm_sqr()).sum::<f64>() / y.len() as f64;
        }
        mean /= trials as f64;
        let expected = crate::cp::gaussian_moments_cp(&scene, &wf).unwrap().mean;
        assert_close(mean / expected, 1.0, 0.02, "E|y|² matches analytic mean");
    }

    #[test]
    fn decision_stat_against_naive_sum() {
        use rand::Rng;
        let mut rng = rand::rngs::SmallRng::seed_from_u64(8);
        let v: Vec<Complex64> = (0..333)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let mut naive = 0.0;
        for y in &v[100..300] {
            naive += y.re * y.re + y.im * y.im;
        }
        naive /= 200.0;
        let fast = decision_stat(&v, 100, 200);
        assert!((fast - naive).abs() <= 1e-15 * naive.abs());
        assert_eq!(decision_stat(&[Complex64::new(0.0, 0.0); 4], 0, 4), 0.0);
        let c = Complex64::new(3.0, 4.0); // modulus 5
        assert_close(decision_stat(&[c; 6], 0, 6), 25.0, 1e-12, "constant modulus");
    }

    #[test]
    fn run_plan_is_reproducible_and_consistent_with_apply_channel() {
        let cfg = table_i_config();
        let wf = zp_wf();
        let d = distance_from_bins(64, cfg.bandwidth);
        let scene = build_scene(&cfg, &wf, d, 0.0, 0.0, vec![], Hypothesis::H1).unwrap();
        let sigma2 = scene.noise_power;
        let plan = TrialPlan {
            scene: scene.clone(),
            waveform: wf,
            thresholds: vec![20.0 * sigma2, 30.0 * sigma2, 40.0 * sigma2],
            trials: 4_000,
            master_seed: 0xdecaf,
        };
        let a = run_plan(&plan, &[Hypothesis::H0, Hypothesis::H1]).unwrap();
        let b = run_plan(&plan, &[Hypothesis::H0, Hypothesis::H1]).unwrap();
        assert_eq!(a, b, "bit-identical reruns");
        // Rates nonincreasing across ascending thresholds.
        for (_, est) in &a {
            for w in est.windows(2) {
                assert!(w[0].rate >= w[1].rate);
            }
        }
        // The internal fast path must agree with the public op composition.
        let (start, len) = detection_window(&plan.waveform);
        for i in [0usize, 17, 123] {
            let seed = trial_seed(plan.master_seed, i as u64);
            let stream = gen_symbol_stream(&plan.waveform, seed);
            let y1 = apply_channel(&stream, &scene, &plan.waveform, &mut substream(seed, TAG_CHANNEL));
            let z_ref = decision_stat(&y1, start, len);
            let (_, z1) = trial_stats(&plan, i);
            assert_close(z1, z_ref, 1e-18, "fast path equals apply_channel route");
        }
    }

    #[test]
    fn empirical_matches_analytic_pd_zp() {
        let cfg = table_i_config();
        let wf = zp_wf();
        let d = distance_from_bins(32, cfg.bandwidth);
        let scene = build_scene(&cfg, &wf, d, 1.0, 0.0, vec![], Hypothesis::H1).unwrap();
        let sigma2 = scene.noise_power;
        let plan = TrialPlan {
            scene: scene.clone(),
            waveform: wf,
            thresholds: vec![189.47189 * sigma2],
            trials: 30_000,
            master_seed: 2024,
        };
        let runs = run_plan(&plan, &[Hypothesis::H1]).unwrap();
        let est = &runs[0].1[0];
        let analytic = crate::zp::pd_exact(est.threshold, &scene, &wf).unwrap();
        assert_close(est.rate, analytic, 3.0 * est.std_err.max(1e-4), "Fig. 4a point");
    }

    #[test]
    fn roc_endpoints_and_monotonicity() {
        let cfg = table_i_config();
        let wf = cp_wf();
        let d = distance_from_bins(64, cfg.bandwidth);
        let scene = build_scene(&cfg, &wf, d, 1.0, 0.0, vec![], Hypothesis::H1).unwrap();
        let sigma2 = scene.noise_power;
        let mut thresholds: Vec<f64> = (0..25).map(|i| (0.1 + 0.25 * i as f64) * sigma2).collect();
        thresholds.push(1e6 * sigma2);
        thresholds.insert(0, 0.0);
        let plan = TrialPlan {
            scene,
            waveform: wf,
            thresholds,
            trials: 2_000,
            master_seed: 77,
        };
        let roc = empirical_roc(&plan).unwrap();
        assert_eq!(roc.first().unwrap().pfa, 1.0, "threshold 0 gives (1,1)");
        assert_eq!(roc.first().unwrap().pd, 1.0);
        assert_eq!(roc.last().unwrap().pfa, 0.0, "huge threshold gives (0,0)");
        assert_eq!(roc.last().unwrap().pd, 0.0);
        for w in roc.windows(2) {
            assert!(w[0].pfa >= w[1].pfa && w[0].pd >= w[1].pd);
        }
    }
}
