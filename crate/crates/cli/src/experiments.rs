//! The named experiments behind each CSV product, plus the conformance
//! report and the human-readable scene summary.
//!
//! Every experiment is a pure function from a parsed scenario to CSV text;
//! numeric cells use Rust's shortest round-trip float formatting so golden
//! files stay stable across platforms.

use crate::scenario::{DetectSpec, ModelSpec, Scenario};
use anyhow::{bail, Context, Result};
use isac_ed_core::scene::{
    db_to_lin, distance_from_bins, lin_to_db, Hypothesis, WaveformConfig, WaveformKind,
};
use isac_ed_core::sim::{run_plan, TrialPlan};
use isac_ed_core::tradeoff::{
    cp_pd_at_distance, delta_ratio, equal_range_rsi, kld_compare, model_select,
    pd_crossing_distance, pd_upper_bound, zp_pd_at_distance, ModelSelectConfig, RangeQuery,
    TradeoffError,
};
use isac_ed_core::{cp, zp, DetectionModel};

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn thresholds_over_sigma2(s: &Scenario) -> Result<Vec<f64>> {
    match &s.detect {
        DetectSpec::ThresholdsOverSigma2(t) => Ok(t.clone()),
        DetectSpec::Pfa(_) => {
            bail!("this experiment requires detect.thresholds_over_sigma2 in the scenario")
        }
    }
}

fn pfa_target(s: &Scenario) -> Result<f64> {
    match &s.detect {
        DetectSpec::Pfa(p) => {
            if !(*p > 0.0 && *p < 1.0) {
                bail!("detect.pfa must lie in (0, 1), got {p}");
            }
            Ok(*p)
        }
        DetectSpec::ThresholdsOverSigma2(_) => {
            bail!("this experiment requires detect.pfa in the scenario")
        }
    }
}

/// PD validation sweep for a ZP scenario: analytic exact/Gamma/Gaussian
/// columns plus the Monte Carlo estimate at each threshold.
pub fn validate_zp(s: &Scenario) -> Result<String> {
    if s.kind != WaveformKind::Zp {
        bail!("validate-zp requires waveform.kind = zp");
    }
    let wf = s.waveform()?;
    let scene = s.scene(Hypothesis::H1)?;
    let sigma2 = scene.noise_power;
    let grid = thresholds_over_sigma2(s)?;
    let lambdas: Vec<f64> = grid.iter().map(|t| t * sigma2).collect();

    let plan = TrialPlan {
        scene: scene.clone(),
        waveform: wf,
        thresholds: lambdas.clone(),
        trials: s.trials,
        master_seed: s.seed,
    };
    let sim = run_plan(&plan, &[Hypothesis::H1])?.remove(0).1;

    let mut out = String::from("threshold_over_sigma2,pd_exact,pd_gamma,pd_gaussian,pd_sim,sim_stderr\n");
    for (i, (&t, lambda)) in grid.iter().zip(&lambdas).enumerate() {
        let exact = zp::pd_exact(*lambda, &scene, &wf).unwrap_or(f64::NAN);
        let gamma = zp::pd_gamma(*lambda, &scene, &wf).unwrap_or(f64::NAN);
        let gaussian = zp::pd_gaussian_zp(*lambda, &scene, &wf)?;
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt(t),
            fmt(exact),
            fmt(gamma),
            fmt(gaussian),
            fmt(sim[i].rate),
            fmt(sim[i].std_err)
        ));
    }
    Ok(out)
}

/// PD validation sweep for a CP scenario. `threshold_norm` restates the
/// threshold in the λ/(σ²(1+ρ_si)) normalization used by the CP figures.
pub fn validate_cp(s: &Scenario) -> Result<String> {
    if s.kind != WaveformKind::Cp {
        bail!("validate-cp requires waveform.kind = cp");
    }
    let wf = s.waveform()?;
    let scene = s.scene(Hypothesis::H1)?;
    let sigma2 = scene.noise_power;
    let rsi = db_to_lin(s.rsi_db);
    let grid = thresholds_over_sigma2(s)?;
    let lambdas: Vec<f64> = grid.iter().map(|t| t * sigma2).collect();

    let plan = TrialPlan {
        scene: scene.clone(),
        waveform: wf,
        thresholds: lambdas.clone(),
        trials: s.trials,
        master_seed: s.seed,
    };
    let sim = run_plan(&plan, &[Hypothesis::H1])?.remove(0).1;

    let mut out =
        String::from("threshold_over_sigma2,threshold_norm,pd_gamma,pd_gaussian,pd_sim,sim_stderr\n");
    for (i, (&t, lambda)) in grid.iter().zip(&lambdas).enumerate() {
        let gamma = cp::pd_gamma_cp(*lambda, &scene, &wf).unwrap_or(f64::NAN);
        let gaussian = cp::pd_gaussian_cp(*lambda, &scene, &wf)?;
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt(t),
            fmt(t / (1.0 + rsi)),
            fmt(gamma),
            fmt(gaussian),
            fmt(sim[i].rate),
            fmt(sim[i].std_err)
        ));
    }
    Ok(out)
}

/// PD over distance for the scenario's fixed N_zp against the matched
/// window upper bound (N_zp = L_t with the guard fraction preserved).
pub fn upper_bound(s: &Scenario) -> Result<String> {
    if s.kind != WaveformKind::Zp {
        bail!("upper-bound requires waveform.kind = zp");
    }
    if s.fft_size % s.guard_size != 0 {
        bail!(
            "upper-bound requires fft_size to be an integer multiple of guard_size (got {}/{})",
            s.fft_size,
            s.guard_size
        );
    }
    let ratio = s.fft_size / s.guard_size;
    let pfa = pfa_target(s)?;
    let cfg = s.system_config();

    let fixed = |d: f64| zp_pd_at_distance(&cfg, s.fft_size, s.guard_size, d, pfa);
    // Farthest distance the analytic fixed curve admits (L_t = N_f).
    let d_limit = distance_from_bins(s.fft_size, cfg.bandwidth) * 0.999;
    let d_lo = distance_from_bins(1, cfg.bandwidth).max(1.0);
    let d20 = pd_crossing_distance(&fixed, 0.2, d_lo, d_limit)
        .context("fixed-size PD curve never drops to 0.2 inside the validity window")?;
    let lo = 0.45 * d20;
    let hi = (1.15 * d20).min(d_limit);
    let steps = 48;

    let mut out = String::from("distance_m,delay_bins,pd_fixed,pd_upper_bound\n");
    for i in 0..=steps {
        let d = lo + (hi - lo) * i as f64 / steps as f64;
        let bins = isac_ed_core::scene::delay_bins(d, cfg.bandwidth);
        let pd_fix = fixed(d)?;
        let pd_ub = pd_upper_bound(&cfg, ratio, d, pfa)?;
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt(d),
            bins,
            fmt(pd_fix),
            fmt(pd_ub)
        ));
    }
    Ok(out)
}

/// CP/ZP range ratio δ over an RSI sweep, with the equal-range crossing.
/// The operating point is PD = 0.9 at the scenario's CFAR target.
pub fn range_ratio(s: &Scenario) -> Result<String> {
    let pfa = pfa_target(s)?;
    let cfg = s.system_config();
    let rq_at = |rsi: f64| RangeQuery {
        pd: 0.9,
        pfa,
        fft_size: s.fft_size,
        zp_size: s.guard_size,
        cp_size: s.guard_size,
        pathloss_exp: s.pathloss_exp,
        rsi_power_ratio: rsi,
    };
    let crossing_db = match equal_range_rsi(&rq_at(0.0)) {
        Ok(rho) => lin_to_db(rho),
        Err(TradeoffError::Infeasible(_)) => f64::NAN,
        Err(e) => return Err(e.into()),
    };

    let mut out = String::from("rsi_db,delta,equal_range_rsi_db\n");
    let (lo, hi, steps) = (-37.5f64, 52.5f64, 49usize);
    for i in 0..=steps {
        let rsi_db = lo + (hi - lo) * i as f64 / steps as f64;
        let ratio = delta_ratio(&rq_at(db_to_lin(rsi_db)), &cfg)?;
        out.push_str(&format!(
            "{},{},{}\n",
            fmt(rsi_db),
            fmt(ratio.delta),
            fmt(crossing_db)
        ));
    }
    Ok(out)
}

/// Analytic PD-over-distance curves for both waveforms at matched CFAR,
/// CP impaired by the scenario's RSI.
pub fn range_curves(s: &Scenario) -> Result<String> {
    let pfa = pfa_target(s)?;
    let cfg = s.system_config();
    let rsi = db_to_lin(s.rsi_db);
    let zp_curve = |d: f64| zp_pd_at_distance(&cfg, s.fft_size, s.guard_size, d, pfa);
    let cp_curve = |d: f64| cp_pd_at_distance(&cfg, s.fft_size, s.guard_size, d, pfa, rsi);

    let d_limit = distance_from_bins(s.fft_size, cfg.bandwidth) * 0.999;
    let d_lo = distance_from_bins(1, cfg.bandwidth).max(1.0);
    let d90_zp = pd_crossing_distance(&zp_curve, 0.9, d_lo, d_limit)?;
    let d90_cp = pd_crossing_distance(&cp_curve, 0.9, d_lo, d_limit * 4.0)?;
    let lo = 0.75 * d90_zp.min(d90_cp);
    let hi = 1.12 * d90_zp.max(d90_cp);
    let steps = 48;

    let mut out = String::from("distance_m,pd_zp,pd_cp\n");
    for i in 0..=steps {
        let d = lo + (hi - lo) * i as f64 / steps as f64;
        let pd_zp = if d <= d_limit { zp_curve(d)? } else { f64::NAN };
        let pd_cp = cp_curve(d)?;
        out.push_str(&format!("{},{},{}\n", fmt(d), fmt(pd_zp), fmt(pd_cp)));
    }
    Ok(out)
}

/// KLD clutter analysis: ZP (with the scenario's window shift) against CP
/// over a residual-clutter sweep, with the RCI level where CP drops below
/// ZP.
pub fn clutter(s: &Scenario) -> Result<String> {
    if s.kind != WaveformKind::Zp {
        bail!("clutter requires waveform.kind = zp (CP counterpart is derived)");
    }
    if s.clutter_delays.is_empty() {
        bail!("clutter requires channel.clutter_delays");
    }
    let wf_zp = s.waveform()?;
    let wf_cp = WaveformConfig::new(WaveformKind::Cp, s.fft_size, s.guard_size, 0)
        .map_err(|e| anyhow::anyhow!(e.to_string()))?;
    let base = s.scene(Hypothesis::H1)?;

    let klds_at = |rci_db: f64| -> Result<(f64, f64)> {
        let mut scene = base.clone();
        scene.clutter_power_ratio = db_to_lin(rci_db);
        Ok(kld_compare(&scene, &wf_zp, &scene, &wf_cp)?)
    };

    let (lo, hi, steps) = (-10.0f64, 20.0f64, 60usize);
    let mut rows = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let rci_db = lo + (hi - lo) * i as f64 / steps as f64;
        rows.push((rci_db, klds_at(rci_db)?));
    }
    // CP KLD decreases with clutter while the shifted ZP window rejects it;
    // bisect the first sign change of (kld_cp - kld_zp).
    let mut crossing = f64::NAN;
    for w in rows.windows(2) {
        let f0 = w[0].1 .1 - w[0].1 .0;
        let f1 = w[1].1 .1 - w[1].1 .0;
        if f0 > 0.0 && f1 <= 0.0 {
            let (mut a, mut b) = (w[0].0, w[1].0);
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                let (kzp, kcp) = klds_at(mid)?;
                if kcp - kzp > 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            crossing = 0.5 * (a + b);
            break;
        }
    }

    let mut out = String::from("rci_db,kld_zp,kld_cp,crossing_rci_db\n");
    for (rci_db, (kzp, kcp)) in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt(rci_db),
            fmt(kzp),
            fmt(kcp),
            fmt(crossing)
        ));
    }
    Ok(out)
}

/// Closed-form counting formulas against their enumeration oracles over an
/// exhaustive small-size sweep. The `formula` column carries the published
/// expressions; mismatching rows are the surfaced errata (the detectors
/// themselves always use oracle-backed counts).
pub fn conformance_report() -> Result<String> {
    let mut out = String::from("family,n_f,n_guard,delta_s,delay_j,delay_jp,formula,oracle,match\n");
    for &n_f in &[8u32, 16, 32] {
        for &n_zp in &[2u32, 4, 8] {
            let n = n_f + n_zp;
            for ds in -(n_f as i32)..(n_zp as i32) {
                let wf = WaveformConfig::new(WaveformKind::Zp, n_f, n_zp, ds)
                    .map_err(|e| anyhow::anyhow!(e.to_string()))?;
                for dj in 0..n {
                    let formula = zp::count_mean_zp(dj, &wf)?;
                    let oracle = zp::oracle_count_mean_zp(dj, &wf)?;
                    out.push_str(&format!(
                        "c_zp_mean,{n_f},{n_zp},{ds},{dj},,{formula},{oracle},{}\n",
                        formula == oracle
                    ));
                    for djp in (dj + 1)..n {
                        let formula = zp::count_cov_zp_published(dj, djp, &wf);
                        let oracle = zp::oracle_count_cov_zp(dj, djp, &wf)?;
                        out.push_str(&format!(
                            "c_zp_cov,{n_f},{n_zp},{ds},{dj},{djp},{formula},{oracle},{}\n",
                            formula == oracle
                        ));
                    }
                }
            }
        }
    }
    for &n_f in &[8u32, 16] {
        for &n_cp in &[2u32, 4] {
            let wf = WaveformConfig::new(WaveformKind::Cp, n_f, n_cp, 0)
                .map_err(|e| anyhow::anyhow!(e.to_string()))?;
            let n = n_f + n_cp;
            for dj in 0..n {
                let formula = cp::count_cov_cp_self(dj, &wf)?;
                let oracle = cp::oracle_count_cov_cp_self(dj, &wf)?;
                out.push_str(&format!(
                    "c_cp_self,{n_f},{n_cp},,{dj},,{formula},{oracle},{}\n",
                    formula == oracle
                ));
                for djp in (dj + 1)..n {
                    let formula = cp::count_cov_cp_cross_published(dj, djp, &wf);
                    let oracle = cp::oracle_count_cov_cp_cross(dj, djp, &wf)?;
                    out.push_str(&format!(
                        "c_cp_cov,{n_f},{n_cp},,{dj},{djp},{formula},{oracle},{}\n",
                        formula == oracle
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// Human-readable scene summary: link budget, derived quantities and the
/// selected analytic model.
pub fn print_scene(s: &Scenario) -> Result<String> {
    let cfg = s.system_config();
    let wf = s.waveform()?;
    let scene = s.scene(Hypothesis::H1)?;
    let sigma2 = scene.noise_power;
    let d = s.target_distance_m();
    let eta = wf.power_factor();
    let rsi = db_to_lin(s.rsi_db);
    let mut out = String::new();
    out.push_str(&format!(
        "system: P = {} W ({} dBm), G = {}, f = {} Hz, B = {} Hz, rcs = {} m^2, alpha = {}\n",
        cfg.tx_power, s.tx_power_dbm, cfg.antenna_gain, cfg.carrier_freq, cfg.bandwidth, cfg.rcs,
        cfg.pathloss_exp
    ));
    out.push_str(&format!(
        "noise: sigma^2 = {:.6e} W (psd {} dBm/Hz over {} Hz)\n",
        sigma2, s.noise_psd_dbm_hz, cfg.bandwidth
    ));
    out.push_str(&format!(
        "waveform: {} N_f = {}, guard = {}, shift = {}, eta = {}, overhead = {:.2}%\n",
        match wf.kind {
            WaveformKind::Zp => "zp,",
            WaveformKind::Cp => "cp,",
        },
        wf.fft_size,
        wf.guard_size,
        wf.sample_shift,
        eta,
        100.0 * wf.overhead()
    ));
    out.push_str(&format!(
        "target: d = {:.3} m, L_t = {} bins, |h_t|^2 = {:.6e} W\n",
        d, scene.target_delay, scene.target_gain_sq
    ));
    out.push_str(&format!(
        "interference: rsi = {} dB (ratio {}), clutter = {} dB (delays {:?})\n",
        s.rsi_db,
        rsi,
        s.clutter_total_db.unwrap_or(f64::NEG_INFINITY),
        s.clutter_delays
    ));
    let snr_zp = eta * scene.target_gain_sq / sigma2;
    let sinr_cp = scene.target_gain_sq / (sigma2 * (1.0 + rsi));
    out.push_str(&format!(
        "snr: zp rho = {:.6} ({:.2} dB), cp sinr = {:.6} ({:.2} dB)\n",
        snr_zp,
        lin_to_db(snr_zp),
        sinr_cp,
        lin_to_db(sinr_cp)
    ));
    match wf.kind {
        WaveformKind::Zp => {
            match zp::sigma_ratio(&scene, &wf) {
                Ok(s) if s.is_infinite() => out.push_str("zp diagnostics: sigma_R = inf\n"),
                Ok(s) => out.push_str(&format!("zp diagnostics: sigma_R = {s:.4}\n")),
                Err(_) => out.push_str("zp diagnostics: sigma_R n/a (gaussian-only scene)\n"),
            };
        }
        WaveformKind::Cp => {
            let m = cp::gaussian_moments_cp(&scene, &wf)?;
            out.push_str(&format!(
                "cp diagnostics: c_tilde = {:.5}\n",
                m.covariance_fraction
            ));
        }
    }
    let selected = match s.model {
        ModelSpec::Auto => {
            let choice = model_select(&scene, &wf, &ModelSelectConfig::default())?;
            format!("{} (selected by auto)", choice.selected)
        }
        ModelSpec::Exact => DetectionModel::Exact.to_string(),
        ModelSpec::Gamma => DetectionModel::Gamma.to_string(),
        ModelSpec::Gaussian => DetectionModel::Gaussian.to_string(),
    };
    out.push_str(&format!("model: {selected}\n"));
    Ok(out)
}
