//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! The extended high-frequency solve runs only when `NEUMANN_MPS_EXTENDED=1`.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use neumann_mps::disc::{boundary_ratio, expected_ratio, quasi_orth_gram_norm, weighted_ratio, DiscMode, Parity};
use neumann_mps::geometry::{arclength_spectral, RadialCurve};
use neumann_mps::search::weyl_index;
use neumann_mps::special::jnprime_zero;
use neumann_mps::tension::{min_tension, tension_of};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_neumann-mps");

type Check = Result<String, String>;

fn paper_curve() -> RadialCurve {
    RadialCurve::reference_domain()
}

fn solve(curve: &str, f0: &str, f1: &str, m: &str, n: &str, tau: &str) -> Result<Value, String> {
    let out = Command::new(BIN)
        .args(["--threads", "4", "solve", "--curve", curve, "--f0", f0, "--f1", f1])
        .args(["--M", m, "--N", n, "--tau", tau, "--out", "-"])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "exit {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr).trim()
        ));
    }
    serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())
}

fn field(doc: &Value, key: &str) -> f64 {
    doc[key].as_f64().unwrap_or(f64::NAN)
}

fn slope_ok(doc: &Value) -> bool {
    let (lo, hi) = (field(doc, "slope_minus"), field(doc, "slope_plus"));
    let s = field(doc, "slope");
    (0.5..=0.8).contains(&s) && (lo - hi).abs() <= 0.15 * lo.max(hi)
}

fn weighted_identity() -> Check {
    let mut worst = 0.0f64;
    for (n, l) in [(0, 5), (5, 4), (10, 3), (20, 2)] {
        let mode = DiscMode::new(n, l, Parity::Cos).map_err(|e| e.to_string())?;
        let r = weighted_ratio(&mode).map_err(|e| e.to_string())?;
        worst = worst.max((r - std::f64::consts::SQRT_2).abs());
    }
    if worst <= 1e-10 {
        Ok(format!("max |ratio - sqrt2| = {worst:.2e}"))
    } else {
        Err(format!("max |ratio - sqrt2| = {worst:.2e}"))
    }
}

fn ratio_law() -> Check {
    let mut worst = 0.0f64;
    let mut count = 0;
    for n in 0..=60 {
        for l in 1..=5 {
            for parity in [Parity::Cos, Parity::Sin] {
                if n == 0 && parity == Parity::Sin {
                    continue;
                }
                let mode = DiscMode::new(n, l, parity).map_err(|e| e.to_string())?;
                let r = boundary_ratio(&mode).map_err(|e| format!("({n},{l}): {e}"))?;
                worst = worst.max((r - expected_ratio(&mode)).abs());
                count += 1;
            }
        }
    }
    let msg = format!("{count} modes, max abs deviation {worst:.2e}");
    if worst <= 1e-10 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn disc_recovery(doc: &Result<Value, String>) -> Check {
    let doc = doc.as_ref().map_err(Clone::clone)?;
    let mu = jnprime_zero(30, 1).map_err(|e| e.to_string())?;
    let sqrt_e = field(doc, "sqrtE");
    let (e, eps) = (field(doc, "E"), field(doc, "eps_new"));
    let gap = (e - mu * mu).abs();
    let msg = format!("sqrtE = {sqrt_e:.15}, |E - mu^2| = {gap:.2e}, eps_new = {eps:.2e}");
    if (sqrt_e - mu).abs() <= 1e-9 && gap <= eps {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn table_row(doc: &Result<Value, String>) -> Check {
    let doc = doc.as_ref().map_err(Clone::clone)?;
    let sqrt_e = field(doc, "sqrtE");
    let (new_rel, clas_rel) = (field(doc, "eps_new_rel"), field(doc, "eps_clas_rel"));
    // Two extra evaluations measure the slope.
    let evals = field(doc, "n_evals") as usize + 2;
    let msg = format!(
        "sqrtE = {sqrt_e:.13}, eps_new/E = {new_rel:.2e}, eps_clas/E = {clas_rel:.2e}, {evals} evaluations"
    );
    let ok = (sqrt_e - 40.5128219950085).abs() <= 1e-9 && new_rel <= 1e-12 && clas_rel <= 1e-10 && evals <= 25;
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn slopes(disc: &Result<Value, String>, paper: &Result<Value, String>) -> Check {
    let disc = disc.as_ref().map_err(Clone::clone)?;
    let paper = paper.as_ref().map_err(Clone::clone)?;
    let msg = format!(
        "disc {:.3} ({:.3}/{:.3}), paper domain {:.3} ({:.3}/{:.3})",
        field(disc, "slope"),
        field(disc, "slope_minus"),
        field(disc, "slope_plus"),
        field(paper, "slope"),
        field(paper, "slope_minus"),
        field(paper, "slope_plus"),
    );
    if slope_ok(disc) && slope_ok(paper) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn generalized_min(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<f64> {
    let l = (b.transpose() * b).cholesky()?.l();
    let linv = l.try_inverse()?;
    let c = &linv * (a.transpose() * a) * linv.transpose();
    Some(c.symmetric_eigenvalues().min())
}

fn minimizer_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_value = 0.0f64;
    let mut worst_replay = 0.0f64;
    for _ in 0..50 {
        let a = DMatrix::from_fn(20, 8, |_, _| rng.gen_range(-1.0..1.0));
        let b = DMatrix::from_fn(20, 8, |_, _| rng.gen_range(-1.0..1.0));
        let eval = min_tension(&a, &b, 1e-14).map_err(|e| e.to_string())?;
        let oracle = generalized_min(&a, &b).ok_or("oracle failed")?.sqrt();
        worst_value = worst_value.max((eval.t_min - oracle).abs() / oracle);
        let replay = tension_of(&eval.alpha, &a, &b).map_err(|e| e.to_string())?;
        worst_replay = worst_replay.max((replay - eval.t_min).abs() / eval.t_min);
    }
    let msg = format!("50 instances, value rel err {worst_value:.2e}, replay rel err {worst_replay:.2e}");
    if worst_value <= 1e-10 && worst_replay <= 1e-10 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn quasi_orthogonality() -> Check {
    let mut norms = Vec::new();
    for centre in [20.0, 40.0, 80.0] {
        norms.push(quasi_orth_gram_norm(centre, 1.0, 1024).map_err(|e| e.to_string())?);
    }
    let lo = norms.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = norms.iter().copied().fold(0.0, f64::max);
    let msg = format!("norms {:.4} {:.4} {:.4}, spread {:.3}", norms[0], norms[1], norms[2], hi / lo);
    if lo >= 0.3 && hi <= 6.0 && hi < 2.0 * lo {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn weyl() -> Check {
    let f = 405.003269518228f64;
    let est = weyl_index(&paper_curve(), f * f).map_err(|e| e.to_string())?;
    let rel = (est - 42612.0).abs() / 42612.0;
    let msg = format!("estimate {est:.2}, {:.2}% from 42612", 100.0 * rel);
    if rel <= 0.015 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn arclength_convergence() -> Check {
    let curve = RadialCurve::builtin(1.0, 0.3, 3, 0.2).map_err(|e| e.to_string())?;
    let (coarse, len_coarse) = arclength_spectral(&curve, 512).map_err(|e| e.to_string())?;
    let (fine, len_fine) = arclength_spectral(&curve, 1024).map_err(|e| e.to_string())?;
    let perimeter = (len_coarse - len_fine).abs();
    let arc = coarse
        .iter()
        .zip(fine.iter().step_by(2))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let msg = format!("perimeter diff {perimeter:.2e}, arclength diff {arc:.2e}");
    if perimeter <= 1e-12 && arc <= 1e-12 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn extended() -> Option<Check> {
    if std::env::var("NEUMANN_MPS_EXTENDED").as_deref() != Ok("1") {
        return None;
    }
    let doc = solve("reference", "405.0", "405.005", "5000", "2500", "0.004");
    Some(doc.and_then(|doc| {
        let sqrt_e = field(&doc, "sqrtE");
        let rel = field(&doc, "eps_new_rel");
        let msg = format!("sqrtE = {sqrt_e:.12}, eps_new/E = {rel:.2e}");
        if (sqrt_e - 405.003269518228).abs() <= 1e-8 && rel <= 1e-11 {
            Ok(msg)
        } else {
            Err(msg)
        }
    }))
}

fn report(all_ok: &mut bool, id: usize, name: &str, limit: Duration, elapsed: Duration, check: Check) {
    let (ok, detail) = match check {
        Ok(d) if elapsed <= limit => (true, d),
        Ok(d) => (false, format!("{d}; took {:.1}s, limit {}s", elapsed.as_secs_f64(), limit.as_secs())),
        Err(d) => (false, d),
    };
    *all_ok &= ok;
    println!(
        "[{}] {id:>2} {name} ({:.2}s): {detail}",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let mut ok = true;

    let (c, t) = timed(weighted_identity);
    report(&mut ok, 1, "disc weighted ratio", secs(1), t, c);
    let (c, t) = timed(ratio_law);
    report(&mut ok, 2, "disc ratio law", secs(10), t, c);

    let (disc, t3) = timed(|| solve("circle", "32.4", "32.6", "256", "128", "0.1"));
    report(&mut ok, 3, "disc eigenvalue recovery", secs(30), t3, disc_recovery(&disc));
    let (paper, t4) = timed(|| solve("reference", "40.50", "40.55", "700", "350", "0.025"));
    report(&mut ok, 4, "reference domain table row", secs(120), t4, table_row(&paper));
    report(&mut ok, 5, "tension slope", Duration::MAX, Duration::ZERO, slopes(&disc, &paper));

    let (c, t) = timed(minimizer_oracle);
    report(&mut ok, 6, "minimizer oracle", secs(5), t, c);
    let (c, t) = timed(quasi_orthogonality);
    report(&mut ok, 7, "quasi-orthogonality", secs(60), t, c);
    let (c, t) = timed(weyl);
    report(&mut ok, 8, "Weyl index", secs(1), t, c);
    let (c, t) = timed(arclength_convergence);
    report(&mut ok, 9, "arclength convergence", secs(1), t, c);

    match timed(extended) {
        (Some(c), t) => {
            // Not gating.
            let mut ignored = true;
            report(&mut ignored, 10, "extended high-frequency row", Duration::MAX, t, c);
        }
        (None, _) => println!("[SKIP] 10 extended high-frequency row: set NEUMANN_MPS_EXTENDED=1"),
    }

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
