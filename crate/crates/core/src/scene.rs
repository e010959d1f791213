//! System configuration, radar link budget, delay/distance conversion and
//! the interference/target scene shared by both detectors and the simulator.
//!
//! Conventions: powers in watts, frequencies in Hz, distances in metres,
//! interference levels as linear power ratios over the AWGN power σ².
//! Decibel helpers use ρ̃ = 10·log₁₀(ρ) and dBm → W = 10^((dBm−30)/10).

use thiserror::Error;

/// Speed of light in m/s, engineering value. The delay quantization and
/// every published operating point assume the round 3e8 (e.g. 192 m at
/// 100 MHz is exactly bin 128); the exact constant would shift strong-echo
/// link budgets by 0.14%, visibly past the validation tolerances.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("invalid system config: {0}")]
    InvalidConfig(String),
    #[error("invalid waveform: {0}")]
    InvalidWaveform(String),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
}

pub type Result<T> = std::result::Result<T, SceneError>;

/// Linear ratio from decibels.
pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Decibels from a linear ratio.
pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Watts from dBm.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// RF link-budget parameters of the DFRC base station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    /// Transmit power in watts.
    pub tx_power: f64,
    /// Antenna gain (linear), identical for TX and RX.
    pub antenna_gain: f64,
    /// Carrier frequency in Hz.
    pub carrier_freq: f64,
    /// Signal bandwidth / sampling rate in Hz.
    pub bandwidth: f64,
    /// Target radar cross-section in m².
    pub rcs: f64,
    /// Path loss exponent (>= 1).
    pub pathloss_exp: f64,
    /// Noise power spectral density in W/Hz.
    pub noise_psd: f64,
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("tx_power", self.tx_power),
            ("antenna_gain", self.antenna_gain),
            ("carrier_freq", self.carrier_freq),
            ("bandwidth", self.bandwidth),
            ("rcs", self.rcs),
            ("pathloss_exp", self.pathloss_exp),
            ("noise_psd", self.noise_psd),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SceneError::InvalidConfig(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.pathloss_exp < 1.0 {
            return Err(SceneError::InvalidConfig(format!(
                "pathloss_exp must be >= 1, got {}",
                self.pathloss_exp
            )));
        }
        Ok(())
    }
}

/// Noise power σ² = B · N_psd.
pub fn noise_power(cfg: &SystemConfig) -> f64 {
    cfg.bandwidth * cfg.noise_psd
}

/// Reflected-path power |h_t|² from the double path loss radar formula.
pub fn target_gain(cfg: &SystemConfig, distance_m: f64) -> Result<f64> {
    if !(distance_m > 0.0) || !distance_m.is_finite() {
        return Err(SceneError::InvalidScene(format!(
            "target distance must be positive, got {distance_m}"
        )));
    }
    let wavelength = SPEED_OF_LIGHT / cfg.carrier_freq;
    let numerator = cfg.tx_power * cfg.antenna_gain * cfg.antenna_gain * wavelength * wavelength
        * cfg.rcs;
    let denominator = (4.0 * std::f64::consts::PI).powi(3)
        * distance_m.powf(2.0 * cfg.pathloss_exp);
    Ok(numerator / denominator)
}

/// Two-way delay in sample bins: round(2·d·B/c), ties away from zero.
pub fn delay_bins(distance_m: f64, bandwidth: f64) -> u32 {
    debug_assert!(distance_m >= 0.0);
    (2.0 * distance_m * bandwidth / SPEED_OF_LIGHT).round() as u32
}

/// Distance whose rounded delay is exactly `bins`: d = L·c/(2B).
pub fn distance_from_bins(bins: u32, bandwidth: f64) -> f64 {
    bins as f64 * SPEED_OF_LIGHT / (2.0 * bandwidth)
}

/// Guard flavor of the OFDM frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveformKind {
    Zp,
    Cp,
}

/// OFDM numerology: FFT size, guard size and the ZP window start shift Δs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveformConfig {
    pub kind: WaveformKind,
    pub fft_size: u32,
    pub guard_size: u32,
    /// Window start shift Δs, ZP only; −N_f <= Δs < N_zp.
    pub sample_shift: i32,
}

impl WaveformConfig {
    pub fn new(kind: WaveformKind, fft_size: u32, guard_size: u32, sample_shift: i32) -> Result<Self> {
        let wf = Self { kind, fft_size, guard_size, sample_shift };
        wf.validate()?;
        Ok(wf)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fft_size < 1 || self.guard_size < 1 {
            return Err(SceneError::InvalidWaveform(format!(
                "fft_size and guard_size must be >= 1, got {} and {}",
                self.fft_size, self.guard_size
            )));
        }
        match self.kind {
            WaveformKind::Zp => {
                if self.sample_shift < -(self.fft_size as i32)
                    || self.sample_shift >= self.guard_size as i32
                {
                    return Err(SceneError::InvalidWaveform(format!(
                        "ZP sample shift must satisfy -N_f <= Δs < N_zp, got {} with N_f={}, N_zp={}",
                        self.sample_shift, self.fft_size, self.guard_size
                    )));
                }
            }
            WaveformKind::Cp => {
                if self.sample_shift != 0 {
                    return Err(SceneError::InvalidWaveform(
                        "CP waveform has no sample shift".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Samples per OFDM symbol, N = N_f + guard.
    pub fn symbol_len(&self) -> u32 {
        self.fft_size + self.guard_size
    }

    /// Per-sample power factor η of the data block.
    ///
    /// ZP concentrates unit average symbol power into the N_f data samples
    /// (η = N/N_f); CP transmits unit power on every sample.
    pub fn power_factor(&self) -> f64 {
        match self.kind {
            WaveformKind::Zp => self.symbol_len() as f64 / self.fft_size as f64,
            WaveformKind::Cp => 1.0,
        }
    }

    /// Guard overhead fraction N_oh = guard/(N_f + guard).
    pub fn overhead(&self) -> f64 {
        self.guard_size as f64 / self.symbol_len() as f64
    }
}

/// Detection hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    H0,
    H1,
}

/// Interference/target geometry seen by the radar receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelScene {
    /// RSI power over noise, ρ_si >= 0.
    pub rsi_power_ratio: f64,
    /// Total residual clutter power over noise, ρ_ci >= 0, split equally
    /// over the clutter delays.
    pub clutter_power_ratio: f64,
    /// Clutter delays in bins, strictly ascending.
    pub clutter_delays: Vec<u32>,
    /// Target delay in bins.
    pub target_delay: u32,
    /// Reflected-path power |h_t|² in watts (ignored under H0).
    pub target_gain_sq: f64,
    /// AWGN power σ² in watts.
    pub noise_power: f64,
    pub hypothesis: Hypothesis,
}

impl ChannelScene {
    pub fn validate(&self) -> Result<()> {
        if !(self.rsi_power_ratio >= 0.0) || !(self.clutter_power_ratio >= 0.0) {
            return Err(SceneError::InvalidScene(
                "interference power ratios must be >= 0".into(),
            ));
        }
        if !(self.noise_power > 0.0) {
            return Err(SceneError::InvalidScene("noise power must be > 0".into()));
        }
        if !(self.target_gain_sq >= 0.0) {
            return Err(SceneError::InvalidScene("target gain must be >= 0".into()));
        }
        if self.clutter_power_ratio > 0.0 && self.clutter_delays.is_empty() {
            return Err(SceneError::InvalidScene(
                "clutter power given without clutter delays".into(),
            ));
        }
        if !self.clutter_delays.windows(2).all(|w| w[0] < w[1]) {
            return Err(SceneError::InvalidScene(
                "clutter delays must be strictly ascending".into(),
            ));
        }
        Ok(())
    }

    /// The same scene with the hypothesis replaced.
    pub fn with_hypothesis(&self, hypothesis: Hypothesis) -> Self {
        Self { hypothesis, ..self.clone() }
    }

    /// Effective target power: |h_t|² under H1, zero under H0.
    pub fn effective_target_gain_sq(&self) -> f64 {
        match self.hypothesis {
            Hypothesis::H0 => 0.0,
            Hypothesis::H1 => self.target_gain_sq,
        }
    }

    /// Per-clutter power |h_c|² = (ρ_ci / N_c) · σ².
    pub fn per_clutter_gain_sq(&self) -> f64 {
        if self.clutter_delays.is_empty() {
            0.0
        } else {
            self.clutter_power_ratio / self.clutter_delays.len() as f64 * self.noise_power
        }
    }

    /// Unified channel listing: RSI (delay 0), clutters, target — the
    /// paper's j = 0..N_c+1 ordering. The target tap respects the scene's
    /// hypothesis.
    pub fn unified_channel(&self) -> UnifiedChannel {
        let mut taps = Vec::with_capacity(self.clutter_delays.len() + 2);
        taps.push(ChannelTap {
            gain_sq: self.rsi_power_ratio * self.noise_power,
            delay: 0,
        });
        let per_clutter = self.per_clutter_gain_sq();
        for &d in &self.clutter_delays {
            taps.push(ChannelTap { gain_sq: per_clutter, delay: d });
        }
        taps.push(ChannelTap {
            gain_sq: self.effective_target_gain_sq(),
            delay: self.target_delay,
        });
        UnifiedChannel { taps }
    }
}

/// One interfering or reflecting path: power and discrete delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelTap {
    pub gain_sq: f64,
    pub delay: u32,
}

/// Ordered channel list unifying RSI, clutter and target.
#[derive(Debug, Clone, PartialEq)]
pub struct UnifiedChannel {
    pub taps: Vec<ChannelTap>,
}

/// Assemble a scene from the link budget: σ² from the noise PSD, |h_t|²
/// from the radar formula, L_t from the delay quantizer.
#[allow(clippy::too_many_arguments)]
pub fn build_scene(
    cfg: &SystemConfig,
    wf: &WaveformConfig,
    distance_m: f64,
    rsi_power_ratio: f64,
    clutter_power_ratio: f64,
    clutter_delays: Vec<u32>,
    hypothesis: Hypothesis,
) -> Result<ChannelScene> {
    cfg.validate()?;
    wf.validate()?;
    let scene = ChannelScene {
        rsi_power_ratio,
        clutter_power_ratio,
        clutter_delays,
        target_delay: delay_bins(distance_m, cfg.bandwidth),
        target_gain_sq: target_gain(cfg, distance_m)?,
        noise_power: noise_power(cfg),
        hypothesis,
    };
    scene.validate()?;
    Ok(scene)
}

#[cfg(test)]
mod tests {
    use super::*;

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

    fn zp_512_128() -> WaveformConfig {
        WaveformConfig::new(WaveformKind::Zp, 512, 128, 0).unwrap()
    }

    #[test]
    fn noise_power_formula() {
        let cfg = table_i_config();
        let sigma2 = noise_power(&cfg);
        assert!((sigma2 - 10f64.powf(-12.4)).abs() < 1e-18, "σ² = 10^-12.4 W, got {sigma2}");
        let mut doubled = cfg;
        doubled.bandwidth *= 2.0;
        assert!((noise_power(&doubled) - 2.0 * sigma2).abs() < 1e-24);
        let mut ghz = cfg;
        ghz.bandwidth = 1e9;
        assert!((noise_power(&ghz) - 3.981e-12).abs() < 1e-14);
    }

    #[test]
    fn target_gain_table_i_at_192m() {
        let cfg = table_i_config();
        let g = target_gain(&cfg, 192.0).unwrap();
        assert!(
            (g - 1.48e-12).abs() < 0.02e-12,
            "Table I at 192 m should give ~1.48e-12 W, got {g:e}"
        );
        // d^-4 law with alpha = 2.
        let near = target_gain(&cfg, 96.0).unwrap();
        assert!((near / g - 16.0).abs() < 1e-9);
        // G² law.
        let mut big = cfg;
        big.antenna_gain *= 2.0;
        assert!((target_gain(&big, 192.0).unwrap() / g - 4.0).abs() < 1e-9);
        assert!(target_gain(&cfg, 0.0).is_err());
        assert!(target_gain(&cfg, -5.0).is_err());
    }

    #[test]
    fn target_gain_strictly_decreasing() {
        let cfg = table_i_config();
        let mut prev = f64::INFINITY;
        for i in 1..200 {
            let g = target_gain(&cfg, i as f64 * 3.0).unwrap();
            assert!(g < prev);
            prev = g;
        }
    }

    #[test]
    fn delay_bins_quantization() {
        // 2·192·1e8/c with c = 2.99792458e8 is 128.09, rounds to 128.
        assert_eq!(delay_bins(192.0, 100e6), 128);
        assert_eq!(delay_bins(0.0, 100e6), 0);
        assert_eq!(delay_bins(48.0, 100e6), 32);
        // Nondecreasing in distance.
        let mut prev = 0;
        for i in 0..500 {
            let l = delay_bins(i as f64, 100e6);
            assert!(l >= prev);
            prev = l;
        }
    }

    #[test]
    fn distance_round_trip() {
        for l in 0..=2048u32 {
            assert_eq!(delay_bins(distance_from_bins(l, 100e6), 100e6), l);
        }
        assert!((distance_from_bins(128, 100e6) - 192.0).abs() < 0.2);
        assert_eq!(distance_from_bins(0, 100e6), 0.0);
    }

    #[test]
    fn zp_power_bookkeeping() {
        // η·N_f/N = 1: equal average symbol power for ZP and CP.
        let wf = zp_512_128();
        assert!((wf.power_factor() * 512.0 / 640.0 - 1.0).abs() < 1e-15);
        assert!(wf.power_factor() > 1.0);
        let cp = WaveformConfig::new(WaveformKind::Cp, 512, 128, 0).unwrap();
        assert_eq!(cp.power_factor(), 1.0);
    }

    #[test]
    fn waveform_shift_bounds() {
        assert!(WaveformConfig::new(WaveformKind::Zp, 512, 128, -512).is_ok());
        assert!(WaveformConfig::new(WaveformKind::Zp, 512, 128, 127).is_ok());
        assert!(WaveformConfig::new(WaveformKind::Zp, 512, 128, 128).is_err());
        assert!(WaveformConfig::new(WaveformKind::Zp, 512, 128, -513).is_err());
        assert!(WaveformConfig::new(WaveformKind::Cp, 512, 128, 1).is_err());
    }

    #[test]
    fn build_scene_table_i() {
        let cfg = table_i_config();
        let scene = build_scene(&cfg, &zp_512_128(), 192.0, 1.0, 0.0, vec![], Hypothesis::H1)
            .unwrap();
        assert_eq!(scene.target_delay, 128);
        assert!((scene.target_gain_sq - 1.48e-12).abs() < 0.02e-12);
        scene.validate().unwrap();

        // One clutter at total ratio 1 carries σ² of power.
        let cluttered =
            build_scene(&cfg, &zp_512_128(), 192.0, 0.0, 1.0, vec![32], Hypothesis::H1).unwrap();
        assert!((cluttered.per_clutter_gain_sq() - cluttered.noise_power).abs() < 1e-26);

        // H0 ignores the target gain.
        let h0 = scene.with_hypothesis(Hypothesis::H0);
        assert_eq!(h0.effective_target_gain_sq(), 0.0);
        assert_eq!(h0.unified_channel().taps.last().unwrap().gain_sq, 0.0);
    }

    #[test]
    fn build_scene_rejects_bad_clutter() {
        let cfg = table_i_config();
        let err = build_scene(
            &cfg,
            &zp_512_128(),
            192.0,
            0.0,
            1.0,
            vec![40, 32],
            Hypothesis::H1,
        );
        assert!(err.is_err(), "descending clutter delays must be rejected");
        let dup = build_scene(&cfg, &zp_512_128(), 192.0, 0.0, 1.0, vec![32, 32], Hypothesis::H1);
        assert!(dup.is_err(), "duplicate clutter delays must be rejected");
        let missing = build_scene(&cfg, &zp_512_128(), 192.0, 0.0, 1.0, vec![], Hypothesis::H1);
        assert!(missing.is_err(), "clutter power without delays must be rejected");
    }

    #[test]
    fn unified_channel_ordering() {
        let cfg = table_i_config();
        let scene = build_scene(
            &cfg,
            &zp_512_128(),
            192.0,
            2.0,
            1.0,
            vec![16, 32],
            Hypothesis::H1,
        )
        .unwrap();
        let ch = scene.unified_channel();
        assert_eq!(ch.taps.len(), 4);
        assert_eq!(ch.taps[0].delay, 0);
        assert!((ch.taps[0].gain_sq - 2.0 * scene.noise_power).abs() < 1e-25);
        assert_eq!(ch.taps[1].delay, 16);
        assert_eq!(ch.taps[2].delay, 32);
        assert!((ch.taps[1].gain_sq - 0.5 * scene.noise_power).abs() < 1e-25);
        assert_eq!(ch.taps[3].delay, 128);
    }

    #[test]
    fn db_conversions() {
        assert!((db_to_lin(3.0) - 1.9952623149688795).abs() < 1e-12);
        assert!((lin_to_db(db_to_lin(-27.5)) + 27.5).abs() < 1e-12);
        assert!((dbm_to_watts(20.0) - 0.1).abs() < 1e-15);
        assert!((dbm_to_watts(-174.0) - 10f64.powf(-20.4)).abs() < 1e-30);
    }
}
