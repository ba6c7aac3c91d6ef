//! Acceptance gate. Runs every check in sequence, prints one PASS/FAIL line
//! each, and exits non-zero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use xyvqe::ansatz::{AnsatzSpec, Connectivity, Family};
use xyvqe::entropy::{exact_phase_entropies, maximize_half_chain_entropy, EntropyMaxConfig};
use xyvqe::linalg::{hermitian_eigen, CMatrix};
use xyvqe::measure::{energy_exact, energy_sampled, EstimateMode, Grouping};
use xyvqe::model::{collective_hamiltonian, dense_hamiltonian, XYModel};
use xyvqe::qstate::StateVector;
use xyvqe::rng;
use xyvqe::vqe::{self, VqeConfig, VqeResult};
use xyvqe::Complex64;
use xyvqe_cli::{run_to_csv, Report};

type Outcome = Result<String, String>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Dense `H = -J Σ_{i<j} (XX + YY) - h Σ Z` from bit arithmetic, with qubit 0
/// as the least significant bit and `Z|0⟩ = |0⟩`.
fn oracle_hamiltonian(n: usize, j: f64, h: f64) -> CMatrix {
    let dim = 1usize << n;
    let mut m = vec![vec![c(0.0); dim]; dim];
    for b in 0..dim {
        let ones = b.count_ones() as f64;
        m[b][b] += c(-h * (n as f64 - 2.0 * ones));
        for p in 0..n {
            for q in p + 1..n {
                // XX + YY flips both bits with weight 2 when they differ
                if ((b >> p) & 1) != ((b >> q) & 1) {
                    let f = b ^ (1 << p) ^ (1 << q);
                    m[f][b] += c(-2.0 * j);
                }
            }
        }
    }
    CMatrix::from_fn(dim, |r, k| m[r][k])
}

fn oracle_ground_energy_per_site(n: usize, j: f64, h: f64) -> f64 {
    hermitian_eigen(&oracle_hamiltonian(n, j, h)).unwrap().values[0] / n as f64
}

/// Uniform superposition over basis states with `ones` bits set.
fn oracle_dicke(n: usize, ones: u32) -> StateVector {
    let dim = 1usize << n;
    let count = (0..dim).filter(|b| b.count_ones() == ones).count() as f64;
    let amps = (0..dim)
        .map(|b| c(if b.count_ones() == ones { 1.0 / count.sqrt() } else { 0.0 }))
        .collect();
    StateVector::from_amplitudes(amps).unwrap()
}

fn overlap(a: &StateVector, b: &StateVector) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| x.conj() * y)
        .sum::<Complex64>()
        .norm_sqr()
}

fn shannon_bits(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|x| x * x.log2()).sum::<f64>()
}

fn vqe_at(family: Family, conn: Connectivity, h: f64) -> VqeResult {
    let m = XYModel::new(1.0, h, 4).unwrap();
    let spec = if family == Family::MeanField {
        AnsatzSpec::mean_field(4)
    } else {
        AnsatzSpec::new(family, conn, 1, 4)
    };
    let mut cfg = VqeConfig::new(m, spec, EstimateMode::Exact);
    cfg.restarts = 10;
    vqe::run(&cfg).unwrap()
}

fn csv(doc: &str) -> (String, Report) {
    let (text, report) = run_to_csv(doc).unwrap();
    assert!(report.failures.is_empty(), "{:?}", report.failures);
    (text, report)
}

fn rows_where<'a>(rep: &'a Report, col: &str, value: &str) -> Vec<&'a Vec<String>> {
    let k = rep.column(col).unwrap();
    rep.rows.iter().filter(|r| r[k] == value).collect()
}

fn cell(rep: &Report, row: &[String], col: &str) -> f64 {
    row[rep.column(col).unwrap()].parse().unwrap()
}

fn spread(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn exact_solution() -> Outcome {
    let (_, rep) = csv("experiment = \"exact-sweep\"\nn = 4\nj = 1.0\nh_grid = [-4.0, 4.0, 0.2]\n");
    let h = rep.floats("h");
    let e = rep.floats("exact_energy_per_site");
    if h.len() != 41 {
        return Err(format!("{} grid points", h.len()));
    }
    let oracle_err = h
        .iter()
        .zip(&e)
        .map(|(&h, &e)| (e - oracle_ground_energy_per_site(4, 1.0, h)).abs())
        .fold(0.0, f64::max);
    let mut kinks = Vec::new();
    for k in 1..h.len() - 1 {
        let left = (e[k] - e[k - 1]) / (h[k] - h[k - 1]);
        let right = (e[k + 1] - e[k]) / (h[k + 1] - h[k]);
        if (right - left).abs() > 1e-6 {
            kinks.push(h[k]);
        }
    }
    let kinks_ok = kinks.len() == 4
        && kinks.iter().zip([-3.0, -1.0, 1.0, 3.0]).all(|(a, b)| (a - b).abs() < 1e-9);
    let plateau = h
        .iter()
        .zip(&e)
        .filter(|(h, _)| h.abs() <= 1.0 + 1e-9)
        .map(|(_, e)| (e + 2.0).abs())
        .fold(0.0, f64::max);
    check(
        oracle_err < 1e-9 && kinks_ok && plateau < 1e-9,
        format!("kinks at {kinks:?}, plateau dev {plateau:.1e}, oracle dev {oracle_err:.1e}"),
    )
}

fn collective_recast() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 2..=6 {
        for &h in &[-1.3, 0.0, 0.7, 2.5] {
            let m = XYModel::new(1.0, h, n).unwrap();
            let collective = collective_hamiltonian(&m).unwrap();
            worst = worst.max(dense_hamiltonian(&m).unwrap().max_abs_diff(&collective));
            worst = worst.max(oracle_hamiltonian(n, 1.0, h).max_abs_diff(&collective));
        }
    }
    check(worst < 1e-12, format!("max entry difference {worst:.1e} for N = 2..6"))
}

fn mean_field() -> Outcome {
    let r = vqe_at(Family::MeanField, Connectivity::Full, 0.0);
    let psi = AnsatzSpec::mean_field(4).build().unwrap().run(&r.params).unwrap();
    let f = overlap(&oracle_dicke(4, 2), &psi);
    check(
        (r.energy_per_site + 1.5).abs() <= 1e-3 && f < 0.5,
        format!("E/N = {:.6}, fidelity to Dicke(4,2) = {f:.4}", r.energy_per_site),
    )
}

fn ansatz_hierarchy() -> Outcome {
    let cnot = vqe_at(Family::Cnot, Connectivity::Full, 0.0);
    let crx = vqe_at(Family::Crx, Connectivity::Full, 0.0);
    let tqr = vqe_at(Family::Tqr, Connectivity::Full, 0.0);
    let exact = oracle_ground_energy_per_site(4, 1.0, 0.0);
    check(
        cnot.energy_per_site >= exact + 0.1
            && (crx.energy_per_site - exact).abs() <= 0.05
            && (tqr.energy_per_site - exact).abs() <= 1e-3
            && tqr.fidelity_vs_exact >= 0.99,
        format!(
            "CNOT {:.4}, CRX {:.4}, TQR {:.6} (F = {:.4}), exact {exact:.4}",
            cnot.energy_per_site, crx.energy_per_site, tqr.energy_per_site, tqr.fidelity_vs_exact
        ),
    )
}

fn linear_tqr_phases() -> Outcome {
    let para = vqe_at(Family::Tqr, Connectivity::Linear, 2.0);
    let ferro = vqe_at(Family::Tqr, Connectivity::Linear, 0.0);
    let e_para = oracle_ground_energy_per_site(4, 1.0, 2.0);
    let e_ferro = oracle_ground_energy_per_site(4, 1.0, 0.0);
    check(
        (para.energy_per_site - e_para).abs() <= 1e-3
            && para.fidelity_vs_exact >= 0.99
            && ferro.energy_per_site < -1.5
            && ferro.energy_per_site > e_ferro,
        format!(
            "h=2: {:.6} vs {e_para} (F = {:.4}); h=0: {:.4} in (-2, -1.5)",
            para.energy_per_site, para.fidelity_vs_exact, ferro.energy_per_site
        ),
    )
}

fn shot_estimation() -> Outcome {
    let m = XYModel::new(1.0, 0.7, 4).unwrap();
    let c = AnsatzSpec::new(Family::Tqr, Connectivity::Full, 1, 4).build().unwrap();
    let h_dense = oracle_hamiltonian(4, 1.0, 0.7);
    let mut draw = rng::seeded(2024);
    let mut shots = rng::seeded(4048);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x: Vec<f64> = (0..c.num_params())
            .map(|_| rand::Rng::gen_range(&mut draw, -PI..PI))
            .collect();
        let psi = c.run(&x).unwrap();
        let hv = h_dense.mul_vec(psi.amplitudes());
        let oracle: f64 = psi.amplitudes().iter().zip(&hv).map(|(a, b)| (a.conj() * b).re).sum();
        let exact = energy_exact(&c, &x, &m).unwrap();
        if (exact - oracle).abs() > 1e-10 {
            return Err(format!("exact-mode energy {exact} disagrees with dense oracle {oracle}"));
        }
        let s = energy_sampled(&c, &x, &m, 1 << 14, Grouping::Grouped, &mut shots).unwrap();
        worst = worst.max((s.value - exact).abs() / s.std_error);
    }
    check(worst <= 5.0, format!("largest deviation {worst:.2} standard errors over 100 draws"))
}

fn expressibility() -> Outcome {
    let (_, rep) = csv(
        "experiment = \"entropy-max\"\nn = 4\nansatzes = [\"MF\", \"CNOT:full\", \"CRX:linear\", \"TQR:linear\", \"CRX:full\", \"TQR:full\"]\n",
    );
    let targets = [
        ("MF", 0.0, 1e-6),
        ("CNOT:full", 1.0, 0.05),
        ("CRX:linear", 1.0, 0.05),
        ("TQR:linear", 1.0, 0.05),
        ("CRX:full", 2.0, 0.05),
        ("TQR:full", 2.0, 0.05),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, want, tol) in targets {
        let row = rows_where(&rep, "ansatz", name)[0];
        let got = cell(&rep, row, "max_half_chain_entropy");
        ok &= (got - want).abs() <= tol;
        parts.push(format!("{name} {got:.4}"));
    }
    check(ok, parts.join(", "))
}

fn range_r() -> Outcome {
    let (_, rep) = csv("experiment = \"entropy-range\"\nn = 4\nranges = [2]\nh_values = [0.0]\n");
    let row = &rep.rows[0];
    let s = cell(&rep, row, "max_half_chain_entropy");
    let e = cell(&rep, row, "energy_per_site");
    let exact = oracle_ground_energy_per_site(4, 1.0, 0.0);
    check(
        (s - 2.0).abs() <= 0.05 && (e - exact).abs() <= 0.02,
        format!("r=2: max S = {s:.4}, E/N = {e:.6} vs exact {exact:.4} (gap {:.4})", e - exact),
    )
}

fn entropy_profiles() -> Outcome {
    let (ferro, para) = exact_phase_entropies(4, 1.0).unwrap();
    // Dicke(4,2): two-site block holds k ones with weight C(2,k) C(2,2-k) / 6
    let ferro_oracle = shannon_bits(&[1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0]);
    let para_oracle = shannon_bits(&[0.5, 0.5]);
    let spec = AnsatzSpec::new(Family::Tqr, Connectivity::Full, 1, 4);
    let res = maximize_half_chain_entropy(&spec, &EntropyMaxConfig::default()).unwrap();
    let smax: Vec<f64> = (0..=4).map(|x| ((x as f64 - 2.0).abs() - 2.0).abs()).collect();
    let dev = res
        .final_profile
        .values
        .iter()
        .zip(&smax)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    check(
        (ferro - ferro_oracle).abs() <= 1e-6 && (para - para_oracle).abs() <= 1e-9 && dev <= 0.05,
        format!("ferro {ferro:.6}, para {para:.9}, TQR profile deviation {dev:.4}"),
    )
}

fn gate_orders() -> Outcome {
    let (_, tqr) = csv("experiment = \"gate-orders\"\nn = 4\nfamily = \"TQR\"\norders = 10\nh_values = [0.0, 2.0]\n");
    let (_, cnot) = csv("experiment = \"gate-orders\"\nn = 4\nfamily = \"CNOT\"\norders = 4\nh_values = [2.0]\n");
    let f_spread = |h: &str| {
        let f: Vec<f64> = rows_where(&tqr, "h", h).iter().map(|r| cell(&tqr, r, "fidelity")).collect();
        spread(&f)
    };
    let (s0, s2) = (f_spread("0"), f_spread("2"));
    let e: Vec<f64> = cnot.floats("energy_per_site");
    let e_spread = spread(&e);
    check(
        s0 <= 0.02 && s2 <= 0.02 && e_spread >= 0.05,
        format!(
            "TQR fidelity spread {s0:.4} (h=0), {s2:.4} (h=2); CNOT energy spread {e_spread:.4} at h=2 from {e:?}"
        ),
    )
}

fn multi_layer() -> Outcome {
    let (_, rep) = csv(
        "experiment = \"layers\"\nn = 4\nfamily = \"CRX\"\nconnectivity = \"full\"\nlayer_counts = [1, 4]\nh_grid = [-4.0, 4.0, 0.25]\n",
    );
    let away = |h: f64| (h.abs() - 1.0).abs() >= 0.5 - 1e-9;
    let errors = |l: &str| -> Vec<(f64, f64)> {
        rows_where(&rep, "layers", l)
            .iter()
            .map(|r| {
                let h = cell(&rep, r, "h");
                (h, (cell(&rep, r, "energy_per_site") - oracle_ground_energy_per_site(4, 1.0, h)).abs())
            })
            .filter(|(h, _)| away(*h))
            .collect()
    };
    let (e1, e4) = (errors("1"), errors("4"));
    let worst4 = e4.iter().map(|e| e.1).fold(0.0, f64::max);
    let sum1: f64 = e1.iter().map(|e| e.1).sum();
    let sum4: f64 = e4.iter().map(|e| e.1).sum();
    check(
        e4.len() == 27 && worst4 <= 1e-2 && sum4 <= sum1,
        format!("{} points: L=4 worst error {worst4:.2e}, total {sum4:.2e} vs L=1 total {sum1:.2e}", e4.len()),
    )
}

fn determinism() -> Outcome {
    let docs = [
        "experiment = \"exact-sweep\"\nn = 5\n",
        "experiment = \"vqe-sweep\"\nn = 4\nfamily = \"CRX\"\nh_values = [-1.0, 0.5]\nrestarts = 3\nmax_evals = 3000\nseed = 17\n",
        "experiment = \"mf-sweep\"\nn = 4\nmode = \"sampled\"\nh_values = [0.0, 2.0]\nrestarts = 2\nmax_evals = 800\nseed = 5\n",
        "experiment = \"gate-orders\"\nn = 4\nfamily = \"CNOT\"\norders = 3\nh_values = [1.5]\nrestarts = 2\n",
        "experiment = \"entropy-growth\"\nn = 4\nfamily = \"TQR\"\nrestarts = 2\nmax_evals = 1500\n",
    ];
    for doc in docs {
        let (a, _) = csv(doc);
        let (b, _) = csv(doc);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let (serial, _) = pool.install(|| csv(doc));
        let echoed = xyvqe_cli::config::config_from_csv(&a).unwrap();
        let (replay, _) = csv(&echoed.to_toml());
        if a != b || a != serial || a != replay {
            return Err(format!("output changed between runs for:\n{doc}"));
        }
    }
    Ok(format!("{} experiments reproduced byte-for-byte (rerun, one thread, echoed config)", docs.len()))
}

fn main() {
    let checks: [(&str, Duration, fn() -> Outcome); 12] = [
        ("exact solution", Duration::from_secs(1), exact_solution),
        ("collective recast", Duration::from_secs(5), collective_recast),
        ("mean-field", Duration::from_secs(10), mean_field),
        ("ansatz hierarchy", Duration::from_secs(300), ansatz_hierarchy),
        ("linear TQR phase split", Duration::from_secs(120), linear_tqr_phases),
        ("shot-based estimation", Duration::from_secs(120), shot_estimation),
        ("expressibility", Duration::from_secs(300), expressibility),
        ("range-r", Duration::from_secs(180), range_r),
        ("entropy profiles", Duration::from_secs(60), entropy_profiles),
        ("gate-order robustness", Duration::from_secs(600), gate_orders),
        ("multi-layer", Duration::from_secs(900), multi_layer),
        ("determinism", Duration::from_secs(600), determinism),
    ];
    let mut failed = 0;
    for (name, budget, f) in checks {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if took <= budget => (true, d),
            Ok(d) => (false, format!("{d}; over time budget")),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {name}: {detail} [{:.2}s / {}s]",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
