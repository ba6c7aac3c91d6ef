use super::{Done, OptimizerConfig, Stop, Tracker};

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn affine(c: &[f64], w: &[f64], t: f64) -> Vec<f64> {
    // c + t (c - w)
    c.iter().zip(w).map(|(&ci, &wi)| ci + t * (ci - wi)).collect()
}

pub(super) fn run<F: FnMut(&[f64]) -> f64>(
    t: &mut Tracker<'_, F>,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<Done, Stop> {
    let n = x0.len();
    let start = t.project(x0);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = t.eval(&start)?;
    simplex.push((start.clone(), f0));
    for k in 0..n {
        let mut x = start.clone();
        x[k] += cfg.initial_step;
        if let Some(b) = &cfg.bounds {
            if x[k] > b[k].1 {
                x[k] = start[k] - cfg.initial_step;
            }
        }
        let x = t.project(&x);
        let fx = t.eval(&x)?;
        simplex.push((x, fx));
    }

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best_x, best_f) = (&simplex[0].0, simplex[0].1);
        let f_spread = simplex.iter().map(|s| (s.1 - best_f).abs()).fold(0.0, f64::max);
        let x_spread = simplex
            .iter()
            .flat_map(|s| s.0.iter().zip(best_x).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if f_spread <= cfg.tolerance_f && x_spread <= cfg.tolerance_x {
            return Ok(Done { converged: true, final_point: None });
        }

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let second = simplex[n - 1].1;

        let xr = t.project(&affine(&centroid, &worst.0, REFLECT));
        let fr = t.eval(&xr)?;
        if fr < best_f {
            let xe = t.project(&affine(&centroid, &worst.0, REFLECT * EXPAND));
            let fe = t.eval(&xe)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < second {
            simplex[n] = (xr, fr);
            continue;
        }
        if fr < worst.1 {
            let xc = t.project(&affine(&centroid, &worst.0, REFLECT * CONTRACT));
            let fc = t.eval(&xc)?;
            if fc <= fr {
                simplex[n] = (xc, fc);
                continue;
            }
        } else {
            let xc = t.project(&affine(&centroid, &worst.0, -CONTRACT));
            let fc = t.eval(&xc)?;
            if fc < worst.1 {
                simplex[n] = (xc, fc);
                continue;
            }
        }
        let anchor = simplex[0].0.clone();
        for s in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = anchor
                .iter()
                .zip(&s.0)
                .map(|(a, v)| a + SHRINK * (v - a))
                .collect();
            let x = t.project(&x);
            let fx = t.eval(&x)?;
            *s = (x, fx);
        }
    }
}
