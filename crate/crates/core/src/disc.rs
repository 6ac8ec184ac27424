//! Exact Neumann eigendata of the unit disc and checks of the boundary-norm
//! identities it satisfies.
//!
//! Modes are `v(r, θ) = J_n(μ r)·cos nθ` or `J_n(μ r)·sin nθ` with
//! `J_n'(μ) = 0`. The angular factor squared integrates to `π_n`, which is
//! `2π` for `n = 0` and `π` otherwise.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, integrate};
use crate::special::{jn_unchecked, jnprime_zero, jnprime_zeros_below, MAX_ORDER};
use crate::weight::g_weight;

/// Relative tolerance of the identity checks.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Radial Gauss-Legendre points for interior norms.
const RADIAL_POINTS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Cos,
    Sin,
}

impl Parity {
    pub fn name(self) -> &'static str {
        match self {
            Parity::Cos => "cos",
            Parity::Sin => "sin",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscMode {
    pub n: u32,
    pub l: u32,
    pub mu: f64,
    pub parity: Parity,
    /// `1/μ`.
    pub h: f64,
}

impl DiscMode {
    pub fn new(n: u32, l: u32, parity: Parity) -> Result<Self> {
        if n == 0 && parity == Parity::Sin {
            return Err(Error::InvalidParameter("n = 0 has no sine mode".into()));
        }
        let mu = jnprime_zero(n, l)?;
        Ok(DiscMode {
            n,
            l,
            mu,
            parity,
            h: mu.recip(),
        })
    }

    /// `∫ cos² nθ dθ` or `∫ sin² nθ dθ` over a full turn.
    pub fn angular_mass(&self) -> f64 {
        if self.n == 0 {
            2.0 * PI
        } else {
            PI
        }
    }

    /// `1 - h²n²`, the symbol of `1 - h²Δ_∂D` on this mode's trace.
    pub fn symbol(&self) -> f64 {
        let hn = self.h * self.n as f64;
        (1.0 - hn) * (1.0 + hn)
    }

    pub fn angular(&self, theta: f64) -> f64 {
        let a = self.n as f64 * theta;
        match self.parity {
            Parity::Cos => a.cos(),
            Parity::Sin => a.sin(),
        }
    }
}

/// Source of `J_n`; swapped out to inject faults.
pub trait BesselProvider: Sync {
    fn jn(&self, n: u32, x: f64) -> f64;
}

/// The crate's own Bessel functions.
#[derive(Debug, Clone, Copy, Default)]
pub struct StdBessel;

impl BesselProvider for StdBessel {
    fn jn(&self, n: u32, x: f64) -> f64 {
        jn_unchecked(n, x)
    }
}

/// All modes with `μ ∈ [freq_lo, freq_hi]` and `n ≤ n_cap`, both parities for
/// `n ≥ 1`, ordered by `(n, l, parity)`.
pub fn disc_modes_in_window(freq_lo: f64, freq_hi: f64, n_cap: u32) -> Result<Vec<DiscMode>> {
    if !(freq_lo > 0.0 && freq_hi > freq_lo && freq_hi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "window [{freq_lo}, {freq_hi}] must be positive and increasing"
        )));
    }
    let n_cap = n_cap.min(MAX_ORDER);
    let per_order: Vec<Vec<DiscMode>> = (0..=n_cap)
        .into_par_iter()
        .map(|n| -> Result<Vec<DiscMode>> {
            let mut out = Vec::new();
            for (i, mu) in jnprime_zeros_below(n, freq_hi)?.into_iter().enumerate() {
                if mu < freq_lo {
                    continue;
                }
                let parities: &[Parity] = if n == 0 { &[Parity::Cos] } else { &[Parity::Cos, Parity::Sin] };
                for &parity in parities {
                    out.push(DiscMode {
                        n,
                        l: i as u32 + 1,
                        mu,
                        parity,
                        h: mu.recip(),
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    // μ_{n,1} > n, so orders past freq_hi contribute nothing.
    if (n_cap as f64) < freq_hi && jnprime_zero(n_cap, 1)? <= freq_hi {
        return Err(Error::IncompleteEnumeration { n_cap, freq_hi });
    }
    Ok(per_order.into_iter().flatten().collect())
}

/// `‖v‖_{L²(D)} = √(π_n (1 - n²/μ²)/2)·|J_n(μ)|`.
pub fn interior_norm_disc(mode: &DiscMode) -> f64 {
    (mode.angular_mass() * 0.5 * mode.symbol()).sqrt() * jn_unchecked(mode.n, mode.mu).abs()
}

/// `‖v‖_{L²(D)}` by radial Gauss-Legendre quadrature of `π_n ∫₀¹ J_n(μr)² r dr`.
pub fn interior_norm_quadrature(mode: &DiscMode, bessel: &dyn BesselProvider) -> f64 {
    let rule = radial_rule();
    let radial = integrate(rule, 0.0, 1.0, |r| bessel.jn(mode.n, mode.mu * r).powi(2) * r);
    (mode.angular_mass() * radial).sqrt()
}

fn radial_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: std::sync::OnceLock<(Vec<f64>, Vec<f64>)> = std::sync::OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(RADIAL_POINTS))
}

/// `‖v‖_{L²(∂D)} = √π_n·|J_n(μ)|`.
pub fn boundary_norm_disc(mode: &DiscMode, bessel: &dyn BesselProvider) -> f64 {
    mode.angular_mass().sqrt() * bessel.jn(mode.n, mode.mu).abs()
}

/// `√2 (1 - h²n²)^{-1/2}`.
pub fn expected_ratio(mode: &DiscMode) -> f64 {
    SQRT_2 / mode.symbol().sqrt()
}

/// Boundary-to-interior norm ratio, with the interior norm from quadrature.
///
/// Fails with an identity violation when it differs from
/// [`expected_ratio`] by more than [`IDENTITY_TOL`] relative.
pub fn boundary_ratio_with(mode: &DiscMode, bessel: &dyn BesselProvider) -> Result<f64> {
    let ratio = boundary_norm_disc(mode, bessel) / interior_norm_quadrature(mode, bessel);
    let expected = expected_ratio(mode);
    let err = (ratio - expected).abs() / expected;
    if !(err <= IDENTITY_TOL) {
        return Err(Error::IdentityViolation {
            n: mode.n,
            l: mode.l,
            detail: format!("ratio {ratio} vs {expected} (relative error {err:e})"),
        });
    }
    Ok(ratio)
}

pub fn boundary_ratio(mode: &DiscMode) -> Result<f64> {
    boundary_ratio_with(mode, &StdBessel)
}

/// `1 - h²n² ≥ 2h^{2/3}`, where `G_h(1 - h²n²)` is the plain square root.
pub fn in_sqrt_regime(mode: &DiscMode) -> bool {
    mode.symbol() >= 2.0 * mode.h.powf(2.0 / 3.0)
}

/// `G_h(1 - h²n²)·‖v‖_{∂D}/‖v‖_D`, which equals `√2` in the square-root regime.
pub fn weighted_ratio_with(mode: &DiscMode, bessel: &dyn BesselProvider) -> Result<f64> {
    if !in_sqrt_regime(mode) {
        return Err(Error::RegimeViolation { n: mode.n, l: mode.l });
    }
    let value = g_weight(mode.symbol(), mode.h) * boundary_ratio_with(mode, bessel)?;
    let err = (value - SQRT_2).abs() / SQRT_2;
    if !(err <= IDENTITY_TOL) {
        return Err(Error::IdentityViolation {
            n: mode.n,
            l: mode.l,
            detail: format!("weighted ratio {value} vs sqrt 2 (relative error {err:e})"),
        });
    }
    Ok(value)
}

pub fn weighted_ratio(mode: &DiscMode) -> Result<f64> {
    weighted_ratio_with(mode, &StdBessel)
}

/// Largest eigenvalue of the Gram matrix of `G_h(1 - h²n²)`-weighted boundary
/// traces of the `L²(D)`-normalized modes with `|μ - freq_center| ≤ halfwidth`,
/// at `h = 1/freq_center`, under the `M`-point trapezoid inner product on the
/// circle.
pub fn quasi_orth_gram_norm(freq_center: f64, halfwidth: f64, m: usize) -> Result<f64> {
    if !(freq_center >= 5.0) || !(halfwidth > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need freq_center >= 5 and halfwidth > 0 (got {freq_center}, {halfwidth})"
        )));
    }
    let modes = disc_modes_in_window(freq_center - halfwidth, freq_center + halfwidth, MAX_ORDER)?;
    if modes.is_empty() {
        return Err(Error::Numerical(format!("no disc modes within {halfwidth} of {freq_center}")));
    }
    let top = modes.iter().map(|md| md.n).max().unwrap_or(0) as usize;
    if m <= 2 * top {
        return Err(Error::InvalidParameter(format!(
            "grid size {m} does not resolve angular order {top}"
        )));
    }
    let h = freq_center.recip();
    let traces: Vec<Vec<f64>> = modes
        .par_iter()
        .map(|md| {
            let hn = h * md.n as f64;
            let scale = g_weight((1.0 - hn) * (1.0 + hn), h) * jn_unchecked(md.n, md.mu)
                / interior_norm_disc(md);
            (0..m)
                .map(|j| scale * md.angular(2.0 * PI * j as f64 / m as f64))
                .collect()
        })
        .collect();
    let w = 2.0 * PI / m as f64;
    let k = traces.len();
    let gram = DMatrix::from_fn(k, k, |a, b| {
        w * traces[a].iter().zip(&traces[b]).map(|(x, y)| x * y).sum::<f64>()
    });
    Ok(gram.symmetric_eigenvalues().max())
}

/// One row of the identity report.
#[derive(Debug, Clone)]
pub struct IdentityRow {
    pub mode: DiscMode,
    pub ratio: f64,
    pub expected: f64,
    pub rel_err: f64,
    /// `None` outside the square-root regime.
    pub weighted: Option<f64>,
    pub pass: bool,
}

/// Check both identities for every mode with `n ≤ n_max`, `l ≤ l_max`.
pub fn identity_suite(n_max: u32, l_max: u32, bessel: &dyn BesselProvider) -> Result<Vec<IdentityRow>> {
    let mut modes = Vec::new();
    for n in 0..=n_max {
        for l in 1..=l_max {
            modes.push(DiscMode::new(n, l, Parity::Cos)?);
            if n > 0 {
                modes.push(DiscMode::new(n, l, Parity::Sin)?);
            }
        }
    }
    Ok(modes
        .par_iter()
        .map(|mode| {
            let ratio = boundary_norm_disc(mode, bessel) / interior_norm_quadrature(mode, bessel);
            let expected = expected_ratio(mode);
            let rel_err = (ratio - expected).abs() / expected;
            let weighted = in_sqrt_regime(mode).then(|| g_weight(mode.symbol(), mode.h) * ratio);
            let weighted_ok = weighted.is_none_or(|v| (v - SQRT_2).abs() <= IDENTITY_TOL * SQRT_2);
            IdentityRow {
                mode: *mode,
                ratio,
                expected,
                rel_err,
                weighted,
                pass: rel_err <= IDENTITY_TOL && weighted_ok,
            }
        })
        .collect())
}
