//! Flat dotted-key scenario files.
//!
//! One `key = value` per line, `#` comments, arrays as comma lists. The
//! format is deliberately diff-friendly; unknown keys are rejected with
//! their line number so configuration drift cannot pass silently.

use isac_ed_core::scene::{
    build_scene, db_to_lin, dbm_to_watts, distance_from_bins, ChannelScene, Hypothesis,
    SystemConfig, WaveformConfig, WaveformKind,
};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { key: String, line: usize },
    #[error("line {line}: duplicate key '{key}'")]
    DuplicateKey { key: String, line: usize },
    #[error("line {line}: expected 'key = value', got '{text}'")]
    Malformed { text: String, line: usize },
    #[error("line {line}: bad value for '{key}': {reason}")]
    BadValue { key: String, line: usize, reason: String },
    #[error("missing required key '{0}'")]
    Missing(String),
    #[error("exactly one of '{0}' and '{1}' must be given")]
    ExactlyOne(&'static str, &'static str),
    #[error("{0}")]
    Invalid(String),
}

/// How the detection operating point is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum DetectSpec {
    /// CFAR false-alarm target.
    Pfa(f64),
    /// Explicit threshold grid in units of σ².
    ThresholdsOverSigma2(Vec<f64>),
}

/// Target position, by distance or by delay bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetSpec {
    DistanceM(f64),
    DelayBins(u32),
}

/// Analytic-model request, `auto` defers to the σ_R / C̃ dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelSpec {
    Auto,
    Exact,
    Gamma,
    Gaussian,
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::Auto => write!(f, "auto"),
            ModelSpec::Exact => write!(f, "exact"),
            ModelSpec::Gamma => write!(f, "gamma"),
            ModelSpec::Gaussian => write!(f, "gaussian"),
        }
    }
}

/// Parsed scenario file, kept in the file's own units so serialization
/// round-trips the configuration exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub tx_power_dbm: f64,
    pub antenna_gain: f64,
    pub carrier_freq_hz: f64,
    pub bandwidth_hz: f64,
    pub rcs_m2: f64,
    pub pathloss_exp: f64,
    pub noise_psd_dbm_hz: f64,
    pub kind: WaveformKind,
    pub fft_size: u32,
    pub guard_size: u32,
    pub sample_shift: i32,
    /// RSI in dB over noise; −inf means none.
    pub rsi_db: f64,
    /// Total clutter power in dB over noise; absent means no clutter.
    pub clutter_total_db: Option<f64>,
    pub clutter_delays: Vec<u32>,
    pub target: TargetSpec,
    pub model: ModelSpec,
    pub detect: DetectSpec,
    pub trials: usize,
    pub seed: u64,
}

const KNOWN_KEYS: &[&str] = &[
    "system.tx_power_dbm",
    "system.antenna_gain",
    "system.carrier_freq_hz",
    "system.bandwidth_hz",
    "system.rcs_m2",
    "system.pathloss_exp",
    "system.noise_psd_dbm_hz",
    "waveform.kind",
    "waveform.fft_size",
    "waveform.guard_size",
    "waveform.sample_shift",
    "channel.rsi_db",
    "channel.clutter_total_db",
    "channel.clutter_delays",
    "channel.target_distance_m",
    "channel.target_delay_bins",
    "detect.model",
    "detect.pfa",
    "detect.thresholds_over_sigma2",
    "sim.trials",
    "sim.seed",
];

fn parse_f64(key: &str, line: usize, v: &str) -> Result<f64, ScenarioError> {
    match v {
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => v.parse::<f64>().map_err(|e| ScenarioError::BadValue {
            key: key.to_string(),
            line,
            reason: e.to_string(),
        }),
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut entries: BTreeMap<String, (String, usize)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ScenarioError::Malformed { text: content.to_string(), line });
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(ScenarioError::UnknownKey { key, line });
            }
            if entries.insert(key.clone(), (value, line)).is_some() {
                return Err(ScenarioError::DuplicateKey { key, line });
            }
        }

        fn required_f64(
            entries: &mut BTreeMap<String, (String, usize)>,
            key: &str,
        ) -> Result<f64, ScenarioError> {
            let (v, line) =
                entries.remove(key).ok_or_else(|| ScenarioError::Missing(key.to_string()))?;
            parse_f64(key, line, &v)
        }

        let tx_power_dbm = required_f64(&mut entries, "system.tx_power_dbm")?;
        let antenna_gain = required_f64(&mut entries, "system.antenna_gain")?;
        let carrier_freq_hz = required_f64(&mut entries, "system.carrier_freq_hz")?;
        let bandwidth_hz = required_f64(&mut entries, "system.bandwidth_hz")?;
        let rcs_m2 = required_f64(&mut entries, "system.rcs_m2")?;
        let pathloss_exp = required_f64(&mut entries, "system.pathloss_exp")?;
        let noise_psd_dbm_hz = required_f64(&mut entries, "system.noise_psd_dbm_hz")?;

        let kind = {
            let (v, line) = entries
                .remove("waveform.kind")
                .ok_or_else(|| ScenarioError::Missing("waveform.kind".into()))?;
            match v.as_str() {
                "zp" => WaveformKind::Zp,
                "cp" => WaveformKind::Cp,
                other => {
                    return Err(ScenarioError::BadValue {
                        key: "waveform.kind".into(),
                        line,
                        reason: format!("expected 'zp' or 'cp', got '{other}'"),
                    })
                }
            }
        };
        let parse_u32 = |key: &str, pair: Option<(String, usize)>| -> Result<Option<u32>, ScenarioError> {
            match pair {
                None => Ok(None),
                Some((v, line)) => v
                    .parse::<u32>()
                    .map(Some)
                    .map_err(|e| ScenarioError::BadValue { key: key.into(), line, reason: e.to_string() }),
            }
        };
        let fft_size = parse_u32("waveform.fft_size", entries.remove("waveform.fft_size"))?
            .ok_or_else(|| ScenarioError::Missing("waveform.fft_size".into()))?;
        let guard_size = parse_u32("waveform.guard_size", entries.remove("waveform.guard_size"))?
            .ok_or_else(|| ScenarioError::Missing("waveform.guard_size".into()))?;
        let sample_shift = match entries.remove("waveform.sample_shift") {
            None => 0,
            Some((v, line)) => v.parse::<i32>().map_err(|e| ScenarioError::BadValue {
                key: "waveform.sample_shift".into(),
                line,
                reason: e.to_string(),
            })?,
        };

        let rsi_db = match entries.remove("channel.rsi_db") {
            None => f64::NEG_INFINITY,
            Some((v, line)) => parse_f64("channel.rsi_db", line, &v)?,
        };
        let clutter_total_db = match entries.remove("channel.clutter_total_db") {
            None => None,
            Some((v, line)) => {
                let db = parse_f64("channel.clutter_total_db", line, &v)?;
                if db == f64::NEG_INFINITY {
                    None
                } else {
                    Some(db)
                }
            }
        };
        let clutter_delays = match entries.remove("channel.clutter_delays") {
            None => Vec::new(),
            Some((v, line)) => v
                .split(',')
                .map(|s| {
                    s.trim().parse::<u32>().map_err(|e| ScenarioError::BadValue {
                        key: "channel.clutter_delays".into(),
                        line,
                        reason: e.to_string(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?,
        };
        if clutter_total_db.is_some() && clutter_delays.is_empty() {
            return Err(ScenarioError::Invalid(
                "channel.clutter_total_db given without channel.clutter_delays".into(),
            ));
        }

        let target = match (
            entries.remove("channel.target_distance_m"),
            entries.remove("channel.target_delay_bins"),
        ) {
            (Some((v, line)), None) => {
                TargetSpec::DistanceM(parse_f64("channel.target_distance_m", line, &v)?)
            }
            (None, Some((v, line))) => TargetSpec::DelayBins(v.parse::<u32>().map_err(|e| {
                ScenarioError::BadValue {
                    key: "channel.target_delay_bins".into(),
                    line,
                    reason: e.to_string(),
                }
            })?),
            _ => {
                return Err(ScenarioError::ExactlyOne(
                    "channel.target_distance_m",
                    "channel.target_delay_bins",
                ))
            }
        };

        let model = match entries.remove("detect.model") {
            None => ModelSpec::Auto,
            Some((v, line)) => match v.as_str() {
                "auto" => ModelSpec::Auto,
                "exact" => ModelSpec::Exact,
                "gamma" => ModelSpec::Gamma,
                "gaussian" => ModelSpec::Gaussian,
                other => {
                    return Err(ScenarioError::BadValue {
                        key: "detect.model".into(),
                        line,
                        reason: format!("expected auto|exact|gamma|gaussian, got '{other}'"),
                    })
                }
            },
        };

        let detect = match (entries.remove("detect.pfa"), entries.remove("detect.thresholds_over_sigma2")) {
            (Some((v, line)), None) => DetectSpec::Pfa(parse_f64("detect.pfa", line, &v)?),
            (None, Some((v, line))) => {
                let thresholds = v
                    .split(',')
                    .map(|s| parse_f64("detect.thresholds_over_sigma2", line, s.trim()))
                    .collect::<Result<Vec<_>, _>>()?;
                DetectSpec::ThresholdsOverSigma2(thresholds)
            }
            _ => return Err(ScenarioError::ExactlyOne("detect.pfa", "detect.thresholds_over_sigma2")),
        };

        let trials = match entries.remove("sim.trials") {
            None => 100_000,
            Some((v, line)) => v.parse::<usize>().map_err(|e| ScenarioError::BadValue {
                key: "sim.trials".into(),
                line,
                reason: e.to_string(),
            })?,
        };
        let seed = match entries.remove("sim.seed") {
            None => 0,
            Some((v, line)) => v.parse::<u64>().map_err(|e| ScenarioError::BadValue {
                key: "sim.seed".into(),
                line,
                reason: e.to_string(),
            })?,
        };

        Ok(Scenario {
            tx_power_dbm,
            antenna_gain,
            carrier_freq_hz,
            bandwidth_hz,
            rcs_m2,
            pathloss_exp,
            noise_psd_dbm_hz,
            kind,
            fft_size,
            guard_size,
            sample_shift,
            rsi_db,
            clutter_total_db,
            clutter_delays,
            target,
            model,
            detect,
            trials,
            seed,
        })
    }

    /// Canonical textual form; `parse(serialize(s)) == s`.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        let f = |x: f64| {
            if x == f64::NEG_INFINITY {
                "-inf".to_string()
            } else {
                format!("{x}")
            }
        };
        kv("system.tx_power_dbm", f(self.tx_power_dbm));
        kv("system.antenna_gain", f(self.antenna_gain));
        kv("system.carrier_freq_hz", f(self.carrier_freq_hz));
        kv("system.bandwidth_hz", f(self.bandwidth_hz));
        kv("system.rcs_m2", f(self.rcs_m2));
        kv("system.pathloss_exp", f(self.pathloss_exp));
        kv("system.noise_psd_dbm_hz", f(self.noise_psd_dbm_hz));
        kv(
            "waveform.kind",
            match self.kind {
                WaveformKind::Zp => "zp".into(),
                WaveformKind::Cp => "cp".into(),
            },
        );
        kv("waveform.fft_size", self.fft_size.to_string());
        kv("waveform.guard_size", self.guard_size.to_string());
        kv("waveform.sample_shift", self.sample_shift.to_string());
        kv("channel.rsi_db", f(self.rsi_db));
        if let Some(db) = self.clutter_total_db {
            kv("channel.clutter_total_db", f(db));
            kv(
                "channel.clutter_delays",
                self.clutter_delays
                    .iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            );
        }
        match self.target {
            TargetSpec::DistanceM(d) => kv("channel.target_distance_m", f(d)),
            TargetSpec::DelayBins(b) => kv("channel.target_delay_bins", b.to_string()),
        }
        kv("detect.model", self.model.to_string());
        match &self.detect {
            DetectSpec::Pfa(p) => kv("detect.pfa", f(*p)),
            DetectSpec::ThresholdsOverSigma2(t) => kv(
                "detect.thresholds_over_sigma2",
                t.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(","),
            ),
        }
        kv("sim.trials", self.trials.to_string());
        kv("sim.seed", self.seed.to_string());
        out
    }

    pub fn system_config(&self) -> SystemConfig {
        SystemConfig {
            tx_power: dbm_to_watts(self.tx_power_dbm),
            antenna_gain: self.antenna_gain,
            carrier_freq: self.carrier_freq_hz,
            bandwidth: self.bandwidth_hz,
            rcs: self.rcs_m2,
            pathloss_exp: self.pathloss_exp,
            noise_psd: dbm_to_watts(self.noise_psd_dbm_hz),
        }
    }

    pub fn waveform(&self) -> Result<WaveformConfig, ScenarioError> {
        WaveformConfig::new(self.kind, self.fft_size, self.guard_size, self.sample_shift)
            .map_err(|e| ScenarioError::Invalid(e.to_string()))
    }

    pub fn target_distance_m(&self) -> f64 {
        match self.target {
            TargetSpec::DistanceM(d) => d,
            TargetSpec::DelayBins(b) => distance_from_bins(b, self.bandwidth_hz),
        }
    }

    pub fn scene(&self, hypothesis: Hypothesis) -> Result<ChannelScene, ScenarioError> {
        let cfg = self.system_config();
        let wf = self.waveform()?;
        build_scene(
            &cfg,
            &wf,
            self.target_distance_m(),
            db_to_lin(self.rsi_db),
            self.clutter_total_db.map_or(0.0, db_to_lin),
            self.clutter_delays.clone(),
            hypothesis,
        )
        .map_err(|e| ScenarioError::Invalid(e.to_string()))
    }
}
