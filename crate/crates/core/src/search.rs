//! Energy sweeps, minimum localization and inclusion bounds.

use std::f64::consts::PI;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::assembly::Problem;
use crate::error::{Error, Result};
use crate::geometry::{arclength_spectral, area, RadialCurve};
use crate::tension::{classical_tension, min_tension};

pub const C_EST: f64 = 1.6;
pub const C_ENNENBACH: f64 = 7.4;
pub const DEFAULT_TOL: f64 = 1e-13;
pub const DEFAULT_MAX_EVALS: usize = 60;

/// Golden-section fraction `(3 - √5)/2`.
const GOLDEN: f64 = 0.381_966_011_250_105_1;
/// Boundary nodes used for the perimeter in [`weyl_index`].
const WEYL_NODES: usize = 1024;
const MIN_SCAN: usize = 5;
const MAX_SCAN: usize = 129;

/// Minimum tension and its minimizer at one energy.
#[derive(Debug, Clone)]
pub struct Sample {
    pub e: f64,
    pub t_min: f64,
    pub t_classical: f64,
    pub alpha: DVector<f64>,
    pub rank_eps: usize,
    pub c_min: f64,
}

impl Sample {
    pub fn sqrt_e(&self) -> f64 {
        self.e.sqrt()
    }
}

/// Assemble at `E` and minimize the weighted tension.
pub fn evaluate(problem: &Problem, e: f64) -> Result<Sample> {
    let sys = problem.assemble(e)?;
    let eval = min_tension(&sys.a_w, &sys.b, problem.params.eps_svd)?;
    let t_classical = classical_tension(&eval.alpha, &sys.basis.nor, &sys.b)?;
    Ok(Sample {
        e,
        t_min: eval.t_min,
        t_classical,
        alpha: eval.alpha,
        rank_eps: eval.rank_eps,
        c_min: eval.c_min,
    })
}

/// One sweep sample; failed evaluations are kept as errors.
#[derive(Debug)]
pub struct SweepPoint {
    pub sqrt_e: f64,
    pub outcome: Result<Sample>,
}

/// Evaluate at `steps` equispaced frequencies in `[f_min, f_max]`.
pub fn sweep(problem: &Problem, f_min: f64, f_max: f64, steps: usize) -> Result<Vec<SweepPoint>> {
    if steps < 2 {
        return Err(Error::InvalidParameter(format!("sweep needs at least 2 steps, got {steps}")));
    }
    if !(f_min > 0.0 && f_max > f_min && f_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "frequency window [{f_min}, {f_max}] must be positive and increasing"
        )));
    }
    let dk = (f_max - f_min) / (steps - 1) as f64;
    Ok((0..steps)
        .into_par_iter()
        .map(|i| {
            let sqrt_e = if i + 1 == steps { f_max } else { f_min + i as f64 * dk };
            SweepPoint {
                sqrt_e,
                outcome: evaluate(problem, sqrt_e * sqrt_e),
            }
        })
        .collect())
}

/// Constants turning minimum tensions into distances to the spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    pub c_est: f64,
    pub c_ennenbach: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        BoundConstants {
            c_est: C_EST,
            c_ennenbach: C_ENNENBACH,
        }
    }
}

/// `(eps_new, eps_clas) = (c_est·t_min, c_ennenbach·E·t_clas)`, both in energy units.
pub fn inclusion_bounds(e: f64, t_min: f64, t_clas: f64, c: BoundConstants) -> Result<(f64, f64)> {
    if !(t_min >= 0.0 && t_clas >= 0.0) || !(e > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bounds need E > 0 and nonnegative tensions (E = {e}, t = {t_min}, t_clas = {t_clas})"
        )));
    }
    Ok((c.c_est * t_min, c.c_ennenbach * e * t_clas))
}

/// Heuristic bound `c_est·t_min/|E - E*|` on the part of the trial function
/// outside the eigenspace of `E`, relative to another eigenvalue `E*`.
pub fn mode_error_bound(t_min: f64, e: f64, e_star: f64, c_est: f64) -> Result<f64> {
    let gap = (e - e_star).abs();
    if !(gap >= 1e-12 * e.abs()) || gap == 0.0 {
        return Err(Error::IllSeparated(gap));
    }
    Ok(c_est * t_min / gap)
}

/// Two-term Weyl estimate `|Ω|E/4π + |∂Ω|√E/4π` of the Neumann counting function.
pub fn weyl_index(curve: &RadialCurve, e: f64) -> Result<f64> {
    if !(e >= 0.0) {
        return Err(Error::InvalidParameter(format!("energy E = {e} must be nonnegative")));
    }
    let (_, perimeter) = arclength_spectral(curve, WEYL_NODES)?;
    Ok((area(curve) * e + perimeter * e.sqrt()) / (4.0 * PI))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Relative stopping tolerance on `E`.
    pub tol: f64,
    pub max_evals: usize,
    pub bounds: BoundConstants,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            tol: DEFAULT_TOL,
            max_evals: DEFAULT_MAX_EVALS,
            bounds: BoundConstants::default(),
        }
    }
}

/// Outcome of [`localize_with`].
#[derive(Debug, Clone)]
pub struct Localized {
    pub best: Sample,
    /// Evaluations made by the search itself, excluding the two slope samples.
    pub n_evals: usize,
    /// One-sided slopes `t(E ∓ δ)/δ` at `δ = 10·tol·E`.
    pub slope_minus: f64,
    pub slope_plus: f64,
    pub converged: bool,
}

impl Localized {
    pub fn slope(&self) -> f64 {
        0.5 * (self.slope_minus + self.slope_plus)
    }
}

/// Vertex of the parabola through three points, if it opens upward.
fn parabola_vertex(p: [(f64, f64); 3]) -> Option<f64> {
    let [(x0, y0), (x1, y1), (x2, y2)] = p;
    let f01 = (y1 - y0) / (x1 - x0);
    let f12 = (y2 - y1) / (x2 - x1);
    let a = (f12 - f01) / (x2 - x0);
    let v = 0.5 * (x0 + x1) - f01 / (2.0 * a);
    (a > 0.0 && v.is_finite()).then_some(v)
}

fn check_bracket(e_lo: f64, e_hi: f64, opts: &SearchOptions) -> Result<()> {
    if !(e_lo > 0.0 && e_hi > e_lo && e_hi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "energy bracket [{e_lo}, {e_hi}] must be positive and increasing"
        )));
    }
    if !(opts.tol > 0.0) || opts.max_evals < 3 {
        return Err(Error::InvalidParameter("search needs tol > 0 and at least 3 evaluations".into()));
    }
    Ok(())
}

/// Minimize `t(E)` over `[e_lo, e_hi]`, starting from both ends and the midpoint.
/// See [`localize_from`].
pub fn localize_with<F>(objective: F, e_lo: f64, e_hi: f64, opts: &SearchOptions) -> Result<Localized>
where
    F: Fn(f64) -> Result<Sample> + Sync,
{
    check_bracket(e_lo, e_hi, opts)?;
    let start = [e_lo, 0.5 * (e_lo + e_hi), e_hi];
    let samples: Vec<Sample> = start
        .par_iter()
        .map(|&e| objective(e))
        .collect::<Result<_>>()?;
    localize_from(&objective, samples, e_lo, e_hi, opts)
}

/// Minimize `t(E)` over `[e_lo, e_hi]` by parabolic fits to `t²` at the three
/// best ordinates, with golden-section steps when the fit is unusable.
///
/// `samples` (at least three, inside the bracket) count towards the budget and
/// towards `n_evals`. Stops when the parabola vertex is within `tol·E` of the
/// best sample; the two slope samples at `±10·tol·E` around the best energy are
/// taken afterwards. A best sample on the bracket edge is reported as not
/// converged.
pub fn localize_from<F>(
    objective: &F,
    mut samples: Vec<Sample>,
    e_lo: f64,
    e_hi: f64,
    opts: &SearchOptions,
) -> Result<Localized>
where
    F: Fn(f64) -> Result<Sample> + Sync,
{
    check_bracket(e_lo, e_hi, opts)?;
    if samples.len() < 3 {
        return Err(Error::InvalidParameter("search needs three starting samples".into()));
    }
    let mut n_evals = samples.len();
    let mut converged = false;

    loop {
        samples.sort_by(|a, b| a.e.total_cmp(&b.e));
        let mut order: Vec<usize> = (0..samples.len()).collect();
        order.sort_by(|&a, &b| samples[a].t_min.total_cmp(&samples[b].t_min));
        let ib = order[0];
        let best_e = samples[ib].e;
        let tol_e = opts.tol * best_e;

        let mut fit: [(f64, f64); 3] = [(0.0, 0.0); 3];
        for (slot, &i) in fit.iter_mut().zip(&order[..3]) {
            *slot = (samples[i].e, samples[i].t_min.powi(2));
        }
        fit.sort_by(|a, b| a.0.total_cmp(&b.0));
        let vertex = parabola_vertex(fit).filter(|v| (e_lo..=e_hi).contains(v));
        let next = match vertex {
            Some(v) if (v - best_e).abs() <= tol_e => {
                converged = true;
                break;
            }
            // A vertex on top of an earlier sample would not change the fit.
            Some(v) if samples.iter().all(|s| (s.e - v).abs() > tol_e) => v,
            _ => {
                let left = if ib > 0 { samples[ib - 1].e } else { e_lo };
                let right = samples.get(ib + 1).map_or(e_hi, |s| s.e);
                let (gl, gr) = (best_e - left, right - best_e);
                if gl.max(gr) <= tol_e {
                    converged = true;
                    break;
                }
                if gr >= gl {
                    best_e + GOLDEN * gr
                } else {
                    best_e - GOLDEN * gl
                }
            }
        };
        if n_evals >= opts.max_evals {
            break;
        }
        samples.push(objective(next)?);
        n_evals += 1;
    }

    let best_idx = (0..samples.len())
        .min_by(|&a, &b| samples[a].t_min.total_cmp(&samples[b].t_min))
        .expect("at least three samples");
    let best = samples.swap_remove(best_idx);
    let on_edge = best.e - e_lo <= opts.tol * best.e || e_hi - best.e <= opts.tol * best.e;
    let delta = 10.0 * opts.tol * best.e;
    let (lo, hi) = rayon::join(|| objective(best.e - delta), || objective(best.e + delta));
    let (lo, hi) = (lo?, hi?);
    let slope_minus = lo.t_min / delta;
    let slope_plus = hi.t_min / delta;
    let best = [best, lo, hi]
        .into_iter()
        .min_by(|a, b| a.t_min.total_cmp(&b.t_min))
        .expect("three candidates");
    Ok(Localized {
        best,
        n_evals,
        slope_minus,
        slope_plus,
        converged: converged && !on_edge,
    })
}

/// A local minimum found in the bracket but not selected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub sqrt_e: f64,
    pub t_min: f64,
    pub converged: bool,
}

/// A localized eigenvalue with its bounds.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub sqrt_e: f64,
    pub e: f64,
    pub t_min: f64,
    pub t_classical: f64,
    /// Coefficients of the trial function, normalized to unit interior norm.
    pub alpha: DVector<f64>,
    pub eps_new: f64,
    pub eps_clas: f64,
    /// Tension evaluations of the scan and all searches, not counting slope samples.
    pub n_evals: usize,
    pub n_scan: usize,
    pub slope: f64,
    pub slope_minus: f64,
    pub slope_plus: f64,
    pub weyl_index: f64,
    pub converged: bool,
    /// Other local minima of the bracket, by increasing frequency.
    pub others: Vec<Candidate>,
}

impl EigenResult {
    pub fn eps_new_rel(&self) -> f64 {
        self.eps_new / self.e
    }

    pub fn eps_clas_rel(&self) -> f64 {
        self.eps_clas / self.e
    }
}

/// Scan ordinates for a bracket: about four per expected eigenvalue, at least five.
pub fn scan_count(curve: &RadialCurve, e_lo: f64, e_hi: f64) -> Result<usize> {
    let expected = weyl_index(curve, e_hi)? - weyl_index(curve, e_lo)?;
    Ok(((4.0 * expected).ceil() as usize + 1).clamp(MIN_SCAN, MAX_SCAN))
}

/// Localize the eigenvalue in the frequency bracket `[f_lo, f_hi]`.
///
/// The bracket is first scanned at [`scan_count`] equispaced energies. Every
/// interior local minimum of the scan is refined by [`localize_from`] between
/// its scan neighbours, and the refined minimum with the smallest tension is
/// returned; the rest are listed in [`EigenResult::others`]. With no interior
/// scan minimum the lowest sample is refined and will typically end on the
/// bracket edge, which is reported as non-convergence.
///
/// On budget exhaustion the error carries the best iterate.
pub fn localize_minimum(problem: &Problem, f_lo: f64, f_hi: f64, opts: &SearchOptions) -> Result<EigenResult> {
    if !(f_lo > 0.0 && f_hi > f_lo) {
        return Err(Error::InvalidParameter(format!(
            "frequency bracket [{f_lo}, {f_hi}] must be positive and increasing"
        )));
    }
    let (e_lo, e_hi) = (f_lo * f_lo, f_hi * f_hi);
    check_bracket(e_lo, e_hi, opts)?;
    let objective = |e: f64| evaluate(problem, e);
    let n_scan = scan_count(&problem.curve, e_lo, e_hi)?;
    let de = (e_hi - e_lo) / (n_scan - 1) as f64;
    let scan: Vec<Sample> = (0..n_scan)
        .into_par_iter()
        .map(|i| objective(if i + 1 == n_scan { e_hi } else { e_lo + i as f64 * de }))
        .collect::<Result<_>>()?;

    let t = |i: usize| scan[i].t_min;
    let mut centres: Vec<usize> = (1..n_scan - 1)
        .filter(|&i| t(i) <= t(i - 1) && t(i) <= t(i + 1))
        .collect();
    if centres.is_empty() {
        let lowest = (0..n_scan).min_by(|&a, &b| t(a).total_cmp(&t(b))).expect("scan is nonempty");
        centres.push(lowest.clamp(1, n_scan - 2));
    }
    let found: Vec<Localized> = centres
        .par_iter()
        .map(|&i| {
            let start = scan[i - 1..=i + 1].to_vec();
            localize_from(&objective, start, scan[i - 1].e, scan[i + 1].e, opts)
        })
        .collect::<Result<_>>()?;

    let n_evals = n_scan + found.iter().map(|f| f.n_evals - 3).sum::<usize>();
    let pick = (0..found.len())
        .min_by(|&a, &b| found[a].best.t_min.total_cmp(&found[b].best.t_min))
        .expect("at least one candidate");
    let others = found
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != pick)
        .map(|(_, f)| Candidate {
            sqrt_e: f.best.e.sqrt(),
            t_min: f.best.t_min,
            converged: f.converged,
        })
        .collect();
    let chosen = &found[pick];
    let best = &chosen.best;
    let (eps_new, eps_clas) = inclusion_bounds(best.e, best.t_min, best.t_classical, opts.bounds)?;
    let result = EigenResult {
        sqrt_e: best.e.sqrt(),
        e: best.e,
        t_min: best.t_min,
        t_classical: best.t_classical,
        alpha: best.alpha.clone(),
        eps_new,
        eps_clas,
        n_evals,
        n_scan,
        slope: chosen.slope(),
        slope_minus: chosen.slope_minus,
        slope_plus: chosen.slope_plus,
        weyl_index: weyl_index(&problem.curve, best.e)?,
        converged: chosen.converged,
        others,
    };
    if result.converged {
        Ok(result)
    } else {
        Err(Error::ConvergenceFailure {
            evals: result.n_evals,
            best_sqrt_e: result.sqrt_e,
            best: Some(Box::new(result)),
        })
    }
}
