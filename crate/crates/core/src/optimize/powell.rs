use super::{Done, OptimizerConfig, Stop, Tracker};

const GOLD: f64 = 1.618_033_988_749_895;
const LINE_TOL: f64 = 1e-6;
const MAX_GROWTH: f64 = 100.0;

fn along(p: &[f64], d: &[f64], s: f64) -> Vec<f64> {
    p.iter().zip(d).map(|(a, b)| a + s * b).collect()
}

/// Minimises along `p + s d`; returns `(s, f)` of the best point found.
fn line_min<F: FnMut(&[f64]) -> f64>(
    t: &mut Tracker<'_, F>,
    p: &[f64],
    fp: f64,
    d: &[f64],
    step: f64,
) -> Result<(f64, f64), Stop> {
    let f = |s: f64, t: &mut Tracker<'_, F>| t.eval(&along(p, d, s));
    // Bracket a minimum between a < b < c with f(b) <= f(a), f(c).
    let (mut a, mut fa) = (0.0, fp);
    let (mut b, mut fb) = (step, f(step, t)?);
    if fb > fa {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = b + GOLD * (b - a);
    let mut fc = f(c, t)?;
    while fc < fb {
        if (c - a).abs() > MAX_GROWTH * step {
            return Ok((c, fc));
        }
        a = b;
        fa = fb;
        b = c;
        fb = fc;
        c = b + GOLD * (b - a);
        fc = f(c, t)?;
    }
    let _ = fa;
    let (mut lo, mut hi) = if a < c { (a, c) } else { (c, a) };

    // Golden section on [lo, hi] keeping b as one interior point.
    let r = GOLD - 1.0;
    let (mut x1, mut f1, mut x2, mut f2);
    if b - lo > hi - b {
        x2 = b;
        f2 = fb;
        x1 = hi - r * (hi - lo);
        if (x1 - x2).abs() < f64::EPSILON {
            x1 = lo + (1.0 - r) * (x2 - lo);
        }
        f1 = f(x1, t)?;
        if x1 > x2 {
            std::mem::swap(&mut x1, &mut x2);
            std::mem::swap(&mut f1, &mut f2);
        }
    } else {
        x1 = b;
        f1 = fb;
        x2 = lo + r * (hi - lo);
        f2 = f(x2, t)?;
        if x1 > x2 {
            std::mem::swap(&mut x1, &mut x2);
            std::mem::swap(&mut f1, &mut f2);
        }
    }
    while hi - lo > LINE_TOL {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1, t)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2, t)?;
        }
    }
    let mut best = (b, fb);
    for cand in [(x1, f1), (x2, f2)] {
        if cand.1 < best.1 {
            best = cand;
        }
    }
    Ok(best)
}

pub(super) fn run<F: FnMut(&[f64]) -> f64>(
    t: &mut Tracker<'_, F>,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<Done, Stop> {
    let n = x0.len();
    let mut dirs: Vec<Vec<f64>> = (0..n)
        .map(|k| (0..n).map(|j| if j == k { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut p = t.project(x0);
    let mut fret = t.eval(&p)?;
    loop {
        let p_start = p.clone();
        let f_start = fret;
        let (mut big, mut big_drop) = (0, 0.0);
        for (k, d) in dirs.iter().enumerate() {
            let before = fret;
            let (s, fs) = line_min(t, &p, fret, d, cfg.initial_step)?;
            if fs < fret {
                p = t.project(&along(&p, d, s));
                fret = fs;
            }
            if before - fret > big_drop {
                big_drop = before - fret;
                big = k;
            }
        }
        if f_start - fret <= cfg.tolerance_f {
            return Ok(Done { converged: true, final_point: None });
        }
        let shift: Vec<f64> = p.iter().zip(&p_start).map(|(a, b)| a - b).collect();
        let extrap = t.project(&along(&p, &shift, 1.0));
        let f_ext = t.eval(&extrap)?;
        if f_ext < f_start {
            let q = 2.0 * (f_start - 2.0 * fret + f_ext) * (f_start - fret - big_drop).powi(2)
                - big_drop * (f_start - f_ext).powi(2);
            if q < 0.0 {
                let (s, fs) = line_min(t, &p, fret, &shift, 1.0)?;
                if fs < fret {
                    p = t.project(&along(&p, &shift, s));
                    fret = fs;
                }
                let last = dirs.len() - 1;
                dirs[big] = dirs[last].clone();
                dirs[last] = shift;
            }
        }
    }
}
