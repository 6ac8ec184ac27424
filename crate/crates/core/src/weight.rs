//! Spectral weights on the boundary and the discrete filter that applies
//! `F_h(1 - h²Δ_∂Ω)` to sampled boundary data.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::BoundaryGrid;
use crate::quadrature::{gauss_legendre, integrate};

const STEP_RULE_POINTS: usize = 64;

fn bump(v: f64) -> f64 {
    if v <= 0.0 || v >= 1.0 {
        0.0
    } else {
        (-1.0 / (v * (1.0 - v))).exp()
    }
}

fn step_rule() -> &'static ((Vec<f64>, Vec<f64>), f64) {
    static RULE: OnceLock<((Vec<f64>, Vec<f64>), f64)> = OnceLock::new();
    RULE.get_or_init(|| {
        let rule = gauss_legendre(STEP_RULE_POINTS);
        let half = integrate(&rule, 0.0, 0.5, bump);
        (rule, 2.0 * half)
    })
}

/// C^∞ step from 0 (u ≤ 0) to 1 (u ≥ 1): normalized integral of the bump
/// `exp(-1/(v(1-v)))`.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let (rule, total) = step_rule();
    if u <= 0.5 {
        integrate(rule, 0.0, u, bump) / total
    } else {
        1.0 - integrate(rule, u, 1.0, bump) / total
    }
}

/// `(χ₁(t), χ₂(t))` with `χ₁ = 0` for `t ≤ 1`, `χ₁ = 1` for `t ≥ 2` and
/// `χ₁² + χ₂² = 1`.
pub fn cutoffs(t: f64) -> (f64, f64) {
    let (s, c) = (FRAC_PI_2 * smooth_step(t - 1.0)).sin_cos();
    (s, c)
}

/// Smooth regularized square root
/// `G_h(σ) = √σ χ₁(σ/h^{2/3}) + h^{1/3} χ₂(σ/h^{2/3})`.
///
/// Equals `h^{1/3}` for `σ ≤ h^{2/3}` and `√σ` for `σ ≥ 2h^{2/3}`. Inside the
/// transition band it overshoots `√σ`: no pair of cutoffs with
/// `χ₁² + χ₂² = 1` can keep `G_h` monotone there.
pub fn g_weight(sigma: f64, h: f64) -> f64 {
    let scale = h.powf(2.0 / 3.0);
    let t = sigma / scale;
    if t <= 1.0 {
        return h.cbrt();
    }
    if t >= 2.0 {
        return sigma.sqrt();
    }
    let (chi1, chi2) = cutoffs(t);
    sigma.sqrt() * chi1 + h.cbrt() * chi2
}

/// Inverse weight used by the filter: `F_h(σ) = 1/max(σ₊^{1/2}, h^{1/3})`.
pub fn f_weight(sigma: f64, h: f64) -> f64 {
    1.0 / sigma.max(0.0).sqrt().max(h.cbrt())
}

/// Frequencies and filter values for one grid and semiclassical parameter.
#[derive(Debug, Clone)]
pub struct FilterSpec {
    pub h: f64,
    pub perimeter: f64,
    pub m: usize,
    pub n_max: usize,
    /// `ξ'_n = 2πnh/L` for `n = -n_max..=n_max`.
    pub xi: Vec<f64>,
}

impl FilterSpec {
    pub fn new(h: f64, perimeter: f64, m: usize) -> Result<Self> {
        if m == 0 || m % 4 != 0 {
            return Err(Error::InvalidParameter(format!(
                "filter grid size M = {m} must be divisible by 4"
            )));
        }
        if !(h > 0.0 && h <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "semiclassical parameter h = {h} must lie in (0, 1]"
            )));
        }
        let n_max = m / 4;
        let xi = (-(n_max as i64)..=n_max as i64)
            .map(|n| 2.0 * PI * n as f64 * h / perimeter)
            .collect();
        Ok(FilterSpec {
            h,
            perimeter,
            m,
            n_max,
            xi,
        })
    }

    pub fn orders(&self) -> impl Iterator<Item = i64> + '_ {
        -(self.n_max as i64)..=self.n_max as i64
    }

    /// `F_h(1 - ξ'_n²)` per mode, in the order of [`FilterSpec::orders`].
    pub fn values(&self) -> Vec<f64> {
        self.xi.iter().map(|x| f_weight(1.0 - x * x, self.h)).collect()
    }
}

/// Dense `M×M` filter acting on `√w`-scaled boundary samples.
///
/// With `P_mn = exp(2πi n s_m/L)` over `|n| ≤ M/4` and `W = diag(w_m)`,
/// ```text
/// F = h^{-1/3} I + W^{1/2} P diag{F_h(1 - ξ'_n²) - h^{-1/3}} P* W^{1/2} / L
/// ```
/// which is `W^{1/2} F_0 W^{-1/2}` for the unscaled filter
/// `F_0 = h^{-1/3} I + P diag{..} P* W / L`. The conjugation matches the `√w_m`
/// row scaling of the basis matrices and makes `F` symmetric. The complex
/// product is carried out in real arithmetic as `C D Cᵀ + S D Sᵀ`; its
/// imaginary part `S D Cᵀ - C D Sᵀ` must cancel between `±n`.
pub fn build_filter_matrix(grid: &BoundaryGrid, h: f64) -> Result<DMatrix<f64>> {
    let m = grid.len();
    let spec = FilterSpec::new(h, grid.perimeter, m)?;
    let floor = h.cbrt().recip();
    let diag: Vec<f64> = spec.values().iter().map(|v| v - floor).collect();
    let k = diag.len();

    let mut cos = DMatrix::<f64>::zeros(m, k);
    let mut sin = DMatrix::<f64>::zeros(m, k);
    for (j, n) in spec.orders().enumerate() {
        for i in 0..m {
            let scale = (grid.w[i] / grid.perimeter).sqrt();
            let (s, c) = (2.0 * PI * n as f64 * grid.s[i] / grid.perimeter).sin_cos();
            cos[(i, j)] = scale * c;
            sin[(i, j)] = scale * s;
        }
    }
    let mut cos_d = cos.clone();
    let mut sin_d = sin.clone();
    for (j, d) in diag.iter().enumerate() {
        cos_d.column_mut(j).scale_mut(*d);
        sin_d.column_mut(j).scale_mut(*d);
    }
    let re = &cos_d * cos.transpose() + &sin_d * sin.transpose();
    let im = &sin_d * cos.transpose() - &cos_d * sin.transpose();

    let max_re = re.amax().max(f64::MIN_POSITIVE);
    let max_im = im.amax();
    if max_im >= 1e-12 * max_re {
        return Err(Error::Assembly(format!(
            "residual imaginary part {max_im:e} relative to {max_re:e}"
        )));
    }
    let mut f = re;
    for i in 0..m {
        f[(i, i)] += floor;
    }
    let asym = (&f - f.transpose()).amax();
    if asym > 1e-12 * f.amax() {
        return Err(Error::Assembly(format!("filter asymmetry {asym:e}")));
    }
    Ok((&f + f.transpose()) * 0.5)
}
