use rand::Rng;

use super::{Done, OptimizerConfig, Stop, Tracker};
use crate::rng;

const CALIBRATION_SAMPLES: usize = 10;
/// The noise-floor stop is armed after `max_evals / BURN_IN_DIVISOR` evaluations.
const BURN_IN_DIVISOR: usize = 4;

pub(super) fn run<F: FnMut(&[f64]) -> f64>(
    t: &mut Tracker<'_, F>,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<Done, Stop> {
    let mut g = cfg.spsa;
    let big_a = g.stability.unwrap_or(0.1 * cfg.max_evals as f64);
    let mut r = rng::seeded(cfg.seed);
    let mut x = t.project(x0);
    let n = x.len();
    let perturbation =
        |r: &mut rng::SimRng| -> Vec<f64> { (0..n).map(|_| if r.gen::<bool>() { 1.0 } else { -1.0 }).collect() };

    if let Some(step) = g.calibrate_step {
        let samples = CALIBRATION_SAMPLES.min(t.remaining().saturating_sub(3) / 2);
        let mut total = 0.0;
        for _ in 0..samples {
            let delta = perturbation(&mut r);
            let plus: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a + g.c * d).collect();
            let minus: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a - g.c * d).collect();
            total += ((t.eval(&plus)? - t.eval(&minus)?) / (2.0 * g.c)).abs();
        }
        let mean = if samples > 0 { total / samples as f64 } else { 0.0 };
        if mean > 0.0 {
            g.a = step * (1.0 + big_a).powf(g.alpha) / mean;
        }
    }
    let window = cfg.noise_window.max(2);
    // mean objective estimate per iteration, tagged with evals used so far
    let mut estimates: Vec<(usize, f64)> = Vec::new();
    let mut k = 0usize;
    loop {
        // Two evaluations per step plus one to report the final iterate.
        if t.remaining() < 3 {
            break;
        }
        let ak = g.a / (k as f64 + 1.0 + big_a).powf(g.alpha);
        let ck = g.c / (k as f64 + 1.0).powf(g.gamma);
        let delta = perturbation(&mut r);
        let plus: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a + ck * d).collect();
        let minus: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a - ck * d).collect();
        let fp = t.eval(&plus)?;
        let fm = t.eval(&minus)?;
        let scale = (fp - fm) / (2.0 * ck);
        for (xi, d) in x.iter_mut().zip(&delta) {
            *xi -= ak * scale * d;
        }
        x = t.project(&x);
        k += 1;

        estimates.push((t.evals, 0.5 * (fp + fm)));
        if let (Some(floor), true) = (cfg.noise_floor, t.evals >= cfg.max_evals / BURN_IN_DIVISOR) {
            let per = (window / 2).max(1);
            if estimates.len() >= 2 * per {
                let m = estimates.len();
                let mean = |s: &[(usize, f64)]| s.iter().map(|e| e.1).sum::<f64>() / s.len() as f64;
                let prev = mean(&estimates[m - 2 * per..m - per]);
                let cur = mean(&estimates[m - per..]);
                if prev - cur < floor {
                    let fx = t.eval(&x)?;
                    return Ok(Done { converged: true, final_point: Some((x, fx)) });
                }
            }
        }
    }
    let fx = t.eval(&x)?;
    Ok(Done { converged: false, final_point: Some((x, fx)) })
}
