// Temporary diagnostic: z-scores of all 20 moment-sweep scenes.
use isac_ed_core::cp;
use isac_ed_core::scene::{ChannelScene, Hypothesis, WaveformConfig, WaveformKind};
use isac_ed_core::sim::{collect_decision_stats, TrialPlan};
use isac_ed_core::zp;
use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

#[test]
#[ignore]
fn all_scene_zscores() {
    let mut rng = SmallRng::seed_from_u64(0xACCE55);
    let sigma2 = 4e-13;
    for scene_index in 0..20usize {
        let is_zp = scene_index % 2 == 0;
        let n_f = if rng.random::<bool>() { 128u32 } else { 256 };
        let guard = if rng.random::<bool>() { 32u32 } else { 64 };
        let n = n_f + guard;
        let with_clutter = scene_index % 4 >= 2;
        let mut delays: Vec<u32> = Vec::new();
        if with_clutter {
            while delays.len() < 2 {
                let d = rng.random_range(1..guard);
                if !delays.contains(&d) {
                    delays.push(d);
                }
            }
            delays.sort_unstable();
        }
        let mut target_delay = rng.random_range(1..n);
        while delays.contains(&target_delay) {
            target_delay = rng.random_range(1..n);
        }
        let shift = if !is_zp {
            0
        } else {
            match scene_index % 3 {
                0 => 0,
                1 => -(n_f as i32),
                _ => delays.last().copied().unwrap_or(0) as i32,
            }
        };
        let wf = WaveformConfig::new(
            if is_zp { WaveformKind::Zp } else { WaveformKind::Cp },
            n_f,
            guard,
            shift,
        )
        .unwrap();
        let scene = ChannelScene {
            rsi_power_ratio: rng.random_range(0.0..3.0),
            clutter_power_ratio: if with_clutter { rng.random_range(0.1..4.0) } else { 0.0 },
            clutter_delays: delays,
            target_delay,
            target_gain_sq: rng.random_range(0.2..5.0) * sigma2,
            noise_power: sigma2,
            hypothesis: Hypothesis::H1,
        };
        let analytic = if is_zp {
            let m = zp::gaussian_moments_zp(&scene, &wf).unwrap();
            (m.mean, m.variance)
        } else {
            let m = cp::gaussian_moments_cp(&scene, &wf).unwrap();
            (m.mean, m.variance)
        };
        eprintln!(
            "scene {scene_index:2} {:?} n_f={n_f} guard={guard} L_t={target_delay} rsi={:.2} gain={:.2} clut={:.2} delays={:?}",
            wf.kind, scene.rsi_power_ratio, scene.target_gain_sq / sigma2, scene.clutter_power_ratio, scene.clutter_delays
        );
        for (trials, seed) in [(400_000usize, 0xA5A5_0000u64 + scene_index as u64)] {
            let plan = TrialPlan {
                scene: scene.clone(),
                waveform: wf,
                thresholds: vec![sigma2],
                trials,
                master_seed: seed,
            };
            let samples = collect_decision_stats(&plan, Hypothesis::H1).unwrap();
            let ns = samples.len() as f64;
            let mean = samples.iter().sum::<f64>() / ns;
            let m2 = samples.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / ns;
            let m4 = samples.iter().map(|z| (z - mean).powi(4)).sum::<f64>() / ns;
            let z_mean = (mean - analytic.0) / (m2 / ns).sqrt();
            let z_var = (m2 - analytic.1) / (((m4 - m2 * m2).max(0.0)) / ns).sqrt();
            eprintln!(
                "scene {scene_index:2} {:?} shift {:5} clut {} trials {trials:6}: z_mean {z_mean:+.2}, z_var {z_var:+.2}",
                wf.kind, shift, with_clutter as u8
            );
        }
    }
}
