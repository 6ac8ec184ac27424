//! Star-shaped boundary curves and the quadrature objects built on them.
//!
//! A curve is given in polar form `r(θ)` about the origin and parametrized as
//! `x(t) = (r(t) cos t, r(t) sin t)`, `t ∈ [0, 2π)`. Every supported radius
//! function is entire, so the same formula evaluated at complex `θ` gives the
//! analytic continuation used to place exterior charge points.

use std::f64::consts::PI;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{Complex, Vector2};
use rustfft::FftPlanner;

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;

/// Number of samples used to check positivity of the radius.
const POSITIVITY_SAMPLES: usize = 4096;
/// Boundary resolution used for the bounding box of [`interior_grid`].
const BBOX_NODES: usize = 1024;
/// Trapezoid nodes used by [`area`].
const AREA_NODES: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub enum CurveKind {
    /// `r(θ) = a0 + eps·cos(k(θ + b·w(θ)))` with `w` = sin or cos.
    Builtin { a0: f64, eps: f64, k: u32, b: f64, warp: Warp },
    /// `r(θ) = c_0 + Σ_j c_j cos jθ + d_j sin jθ`; `sin[0]` is ignored.
    TrigSeries { cos: Vec<f64>, sin: Vec<f64> },
}

/// Inner angular warp of a [`CurveKind::Builtin`] curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Warp {
    /// `θ + b sin θ`; the curve is mirror symmetric about the x-axis.
    Sin,
    /// `θ + b cos θ`; no mirror symmetry for `b ≠ 0`.
    Cos,
}

impl Warp {
    fn real(self, theta: f64) -> (f64, f64) {
        let (s, c) = theta.sin_cos();
        match self {
            Warp::Sin => (s, c),
            Warp::Cos => (c, -s),
        }
    }

    fn complex(self, theta: Complex<f64>) -> Complex<f64> {
        match self {
            Warp::Sin => theta.sin(),
            Warp::Cos => theta.cos(),
        }
    }
}

/// Polar radius function of a star-shaped curve.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialCurve {
    kind: CurveKind,
}

impl RadialCurve {
    /// `r(θ) = a0 + eps·cos(k(θ + b·sin θ))`.
    pub fn builtin(a0: f64, eps: f64, k: u32, b: f64) -> Result<Self> {
        Self::builtin_warped(a0, eps, k, b, Warp::Sin)
    }

    pub fn builtin_warped(a0: f64, eps: f64, k: u32, b: f64, warp: Warp) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidCurve("k must be a positive integer".into()));
        }
        Self::validated(CurveKind::Builtin { a0, eps, k, b, warp })
    }

    pub fn trig_series(cos: Vec<f64>, mut sin: Vec<f64>) -> Result<Self> {
        if cos.is_empty() {
            return Err(Error::InvalidCurve("at least c_0 is required".into()));
        }
        sin.resize(cos.len().max(sin.len()), 0.0);
        let mut cos = cos;
        cos.resize(sin.len(), 0.0);
        sin[0] = 0.0;
        Self::validated(CurveKind::TrigSeries { cos, sin })
    }

    /// Circle of the given radius centred at the origin.
    pub fn circle(radius: f64) -> Result<Self> {
        Self::trig_series(vec![radius], vec![0.0])
    }

    pub fn unit_circle() -> Self {
        Self::circle(1.0).expect("unit circle is valid")
    }

    /// The smooth nonsymmetric test domain `r(θ) = 1 + 0.3 cos(3(θ + 0.2 cos θ))`,
    /// whose Neumann spectrum contains `√E = 40.5128219950085…`.
    ///
    /// The sine-warped curve `1 + 0.3 cos(3(θ + 0.2 sin θ))` is mirror symmetric
    /// and has a different spectrum (its nearest eigenfrequency is near 40.530).
    pub fn reference_domain() -> Self {
        Self::builtin_warped(1.0, 0.3, 3, 0.2, Warp::Cos).expect("reference domain is valid")
    }

    fn validated(kind: CurveKind) -> Result<Self> {
        let curve = RadialCurve { kind };
        for i in 0..POSITIVITY_SAMPLES {
            let th = 2.0 * PI * i as f64 / POSITIVITY_SAMPLES as f64;
            let r = curve.radius(th);
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::InvalidCurve(format!(
                    "radius {r} at theta = {th} is not positive"
                )));
            }
        }
        Ok(curve)
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    /// Parse a curve specification: `radial:a0=<f>,eps=<f>,k=<int>,b=<f>[,warp=sin|cos]`,
    /// `trig:<path>` where the file holds lines `j c_j d_j`, or `reference`.
    pub fn parse_spec(spec: &str) -> Result<Self> {
        let parse_err = |detail: String| Error::Parse {
            what: "curve spec".into(),
            detail,
        };
        if let Some(rest) = spec.strip_prefix("radial:") {
            let (mut a0, mut eps, mut k, mut b) = (None, None, None, None);
            let mut warp = Warp::Sin;
            for item in rest.split(',').filter(|s| !s.trim().is_empty()) {
                let (key, value) = item
                    .split_once('=')
                    .ok_or_else(|| parse_err(format!("expected key=value, got {item:?}")))?;
                let value = value.trim();
                let real = || {
                    f64::from_str(value).map_err(|e| parse_err(format!("{key}: {e}")))
                };
                match key.trim() {
                    "a0" => a0 = Some(real()?),
                    "eps" => eps = Some(real()?),
                    "b" => b = Some(real()?),
                    "k" => {
                        k = Some(
                            u32::from_str(value).map_err(|e| parse_err(format!("k: {e}")))?,
                        )
                    }
                    "warp" => {
                        warp = match value {
                            "sin" => Warp::Sin,
                            "cos" => Warp::Cos,
                            _ => return Err(parse_err(format!("warp must be sin or cos, got {value:?}"))),
                        }
                    }
                    other => return Err(parse_err(format!("unknown key {other:?}"))),
                }
            }
            let missing = |name: &str| parse_err(format!("missing {name}"));
            Self::builtin_warped(
                a0.ok_or_else(|| missing("a0"))?,
                eps.ok_or_else(|| missing("eps"))?,
                k.ok_or_else(|| missing("k"))?,
                b.ok_or_else(|| missing("b"))?,
                warp,
            )
        } else if spec == "reference" {
            Ok(Self::reference_domain())
        } else if spec == "circle" {
            Ok(Self::unit_circle())
        } else if let Some(path) = spec.strip_prefix("trig:") {
            Self::from_trig_file(Path::new(path))
        } else {
            Err(parse_err(format!(
                "expected 'radial:...', 'trig:<path>', 'reference' or 'circle', got {spec:?}"
            )))
        }
    }

    pub fn from_trig_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_trig_table(&text)
    }

    /// Parse whitespace-separated `j c_j d_j` lines (blank lines and `#` comments skipped).
    pub fn parse_trig_table(text: &str) -> Result<Self> {
        let mut cos = Vec::new();
        let mut sin = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |detail: &str| Error::Parse {
                what: "trig table".into(),
                detail: format!("line {}: {detail}", lineno + 1),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(err("expected three fields `j c_j d_j`"));
            }
            let j = usize::from_str(fields[0]).map_err(|_| err("bad index"))?;
            let c = f64::from_str(fields[1]).map_err(|_| err("bad cosine coefficient"))?;
            let d = f64::from_str(fields[2]).map_err(|_| err("bad sine coefficient"))?;
            if j >= cos.len() {
                cos.resize(j + 1, 0.0);
                sin.resize(j + 1, 0.0);
            }
            cos[j] = c;
            sin[j] = d;
        }
        Self::trig_series(cos, sin)
    }

    pub fn radius(&self, theta: f64) -> f64 {
        match &self.kind {
            CurveKind::Builtin { a0, eps, k, b, warp } => {
                a0 + eps * (*k as f64 * (theta + b * warp.real(theta).0)).cos()
            }
            CurveKind::TrigSeries { cos, sin } => {
                let mut r = cos[0];
                for j in 1..cos.len() {
                    let (s, c) = (j as f64 * theta).sin_cos();
                    r += cos[j] * c + sin[j] * s;
                }
                r
            }
        }
    }

    pub fn radius_derivative(&self, theta: f64) -> f64 {
        match &self.kind {
            CurveKind::Builtin { eps, k, b, warp, .. } => {
                let k = *k as f64;
                let (w, dw) = warp.real(theta);
                -eps * (k * (theta + b * w)).sin() * k * (1.0 + b * dw)
            }
            CurveKind::TrigSeries { cos, sin } => {
                let mut dr = 0.0;
                for j in 1..cos.len() {
                    let jf = j as f64;
                    let (s, c) = (jf * theta).sin_cos();
                    dr += jf * (sin[j] * c - cos[j] * s);
                }
                dr
            }
        }
    }

    /// Radius continued to complex angle.
    pub fn radius_complex(&self, theta: Complex<f64>) -> Complex<f64> {
        match &self.kind {
            CurveKind::Builtin { a0, eps, k, b, warp } => {
                let arg = (theta + warp.complex(theta) * *b) * (*k as f64);
                Complex::new(*a0, 0.0) + arg.cos() * *eps
            }
            CurveKind::TrigSeries { cos, sin } => {
                let mut r = Complex::new(cos[0], 0.0);
                for j in 1..cos.len() {
                    let jt = theta * j as f64;
                    r += jt.cos() * cos[j] + jt.sin() * sin[j];
                }
                r
            }
        }
    }

    pub fn point(&self, t: f64) -> Vec2 {
        let r = self.radius(t);
        let (s, c) = t.sin_cos();
        Vec2::new(r * c, r * s)
    }

    /// `x'(t)`, the derivative of the parametrization.
    pub fn velocity(&self, t: f64) -> Vec2 {
        let r = self.radius(t);
        let dr = self.radius_derivative(t);
        let (s, c) = t.sin_cos();
        Vec2::new(dr * c - r * s, dr * s + r * c)
    }

    /// Continuation `x(θ)` for complex `θ`, as a point of the complex plane.
    pub fn point_complex(&self, theta: Complex<f64>) -> Complex<f64> {
        self.radius_complex(theta) * (Complex::<f64>::i() * theta).exp()
    }
}

/// True iff `p` lies strictly inside the curve.
pub fn contains(curve: &RadialCurve, p: &Vec2) -> bool {
    let rho = p.norm();
    if rho == 0.0 {
        return true;
    }
    rho < curve.radius(p.y.atan2(p.x))
}

/// Periodic trapezoid rule on the boundary together with the frame and
/// spectral arclength at each node.
#[derive(Debug, Clone)]
pub struct BoundaryGrid {
    pub t: Vec<f64>,
    pub x: Vec<Vec2>,
    pub speed: Vec<f64>,
    /// Quadrature weights `2π|x'(t_m)|/M`.
    pub w: Vec<f64>,
    /// Outward unit normals.
    pub nrm: Vec<Vec2>,
    /// Counterclockwise unit tangents.
    pub tng: Vec<Vec2>,
    /// Arclength from node 0.
    pub s: Vec<f64>,
    pub perimeter: f64,
}

impl BoundaryGrid {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

fn check_even(m: usize, min: usize) -> Result<()> {
    if m < min || m % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "node count M = {m} must be even and at least {min}"
        )));
    }
    Ok(())
}

/// Nodes `t_m = 2πm/M`, `m = 0..M`.
fn nodes(m: usize) -> Vec<f64> {
    (0..m).map(|i| 2.0 * PI * i as f64 / m as f64).collect()
}

/// Build the `M`-node periodic trapezoid grid on the curve.
///
/// Normals point outward (rotation of the tangent by -π/2), so `x·n > 0` for
/// curves star-shaped about the origin.
pub fn build_grid(curve: &RadialCurve, m: usize) -> Result<BoundaryGrid> {
    check_even(m, 4)?;
    let t = nodes(m);
    let mut x = Vec::with_capacity(m);
    let mut speed = Vec::with_capacity(m);
    let mut tng = Vec::with_capacity(m);
    let mut nrm = Vec::with_capacity(m);
    for &tm in &t {
        let r = curve.radius(tm);
        if !(r > 0.0) {
            return Err(Error::InvalidCurve(format!("radius {r} at t = {tm}")));
        }
        let v = curve.velocity(tm);
        let sp = v.norm();
        let u = v / sp;
        x.push(curve.point(tm));
        speed.push(sp);
        tng.push(u);
        nrm.push(Vec2::new(u.y, -u.x));
    }
    let w = speed.iter().map(|sp| 2.0 * PI * sp / m as f64).collect();
    let (s, perimeter) = spectral_arclength(&speed);
    Ok(BoundaryGrid {
        t,
        x,
        speed,
        w,
        nrm,
        tng,
        s,
        perimeter,
    })
}

/// Spectral arclength at the `M` grid nodes and the perimeter.
pub fn arclength_spectral(curve: &RadialCurve, m: usize) -> Result<(Vec<f64>, f64)> {
    check_even(m, 2)?;
    let speed: Vec<f64> = nodes(m).iter().map(|&t| curve.velocity(t).norm()).collect();
    Ok(spectral_arclength(&speed))
}

/// Integrates the trigonometric interpolant of equispaced speed samples.
///
/// With `v̂_n` the DFT coefficients, the zero mode integrates to `v̂_0 t` and
/// mode `n ≠ 0` to `v̂_n (e^{int} - 1)/(in)`. The Nyquist mode of an even-length
/// real signal is `cos(Mt/2)`, whose integral vanishes at every node.
fn spectral_arclength(speed: &[f64]) -> (Vec<f64>, f64) {
    let m = speed.len();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex<f64>> = speed.iter().map(|&v| Complex::new(v, 0.0)).collect();
    planner.plan_fft_forward(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    let mean = buf[0].re * scale;

    let mut coef = vec![Complex::new(0.0, 0.0); m];
    let mut offset = Complex::new(0.0, 0.0);
    for (k, c) in coef.iter_mut().enumerate().skip(1) {
        if 2 * k == m {
            continue;
        }
        let n = if 2 * k < m { k as f64 } else { k as f64 - m as f64 };
        let g = buf[k] * scale / Complex::new(0.0, n);
        *c = g;
        offset += g;
    }
    planner.plan_fft_inverse(m).process(&mut coef);
    let s = (0..m)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / m as f64;
            mean * t + (coef[i] - offset).re
        })
        .collect();
    (s, 2.0 * PI * mean)
}

/// Exterior source points of the fundamental-solution basis.
#[derive(Debug, Clone)]
pub struct ChargeSet {
    pub tau: f64,
    pub y: Vec<Vec2>,
}

impl ChargeSet {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Charges `y_n = x(2π(n/N - iτ))`, `n = 0..N`, via the complex continuation of
/// the parametrization.
///
/// The shift `τ` is measured against a period-one parameter, so on the unit
/// circle the charges sit at radius `e^{2πτ}`.
pub fn charge_points(curve: &RadialCurve, n: usize, tau: f64) -> Result<ChargeSet> {
    if n == 0 {
        return Err(Error::InvalidParameter("charge count N must be positive".into()));
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "imaginary shift tau = {tau} must be positive"
        )));
    }
    let mut y = Vec::with_capacity(n);
    for j in 0..n {
        let theta = Complex::new(2.0 * PI * j as f64 / n as f64, -2.0 * PI * tau);
        let z = curve.point_complex(theta);
        let p = Vec2::new(z.re, z.im);
        if !p.x.is_finite() || !p.y.is_finite() || contains(curve, &p) {
            return Err(Error::ChargePlacement { index: j, tau });
        }
        y.push(p);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if y[i] == y[j] {
                return Err(Error::ChargePlacement { index: j, tau });
            }
        }
    }
    Ok(ChargeSet { tau, y })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub ix: usize,
    pub iy: usize,
    pub p: Vec2,
}

/// Uniform raster over the curve's bounding box, keeping interior points only.
#[derive(Debug, Clone)]
pub struct InteriorGrid {
    pub nx: usize,
    pub xlim: (f64, f64),
    pub ylim: (f64, f64),
    pub points: Vec<GridPoint>,
}

pub fn interior_grid(curve: &RadialCurve, nx: usize) -> Result<InteriorGrid> {
    if nx < 2 {
        return Err(Error::InvalidParameter(format!("raster size nx = {nx} must be >= 2")));
    }
    let boundary: Vec<Vec2> = nodes(BBOX_NODES).iter().map(|&t| curve.point(t)).collect();
    let fold = |f: fn(&Vec2) -> f64| {
        boundary.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
    };
    let xlim = fold(|p| p.x);
    let ylim = fold(|p| p.y);
    let step = |lim: (f64, f64), i: usize| lim.0 + (lim.1 - lim.0) * i as f64 / (nx - 1) as f64;
    let mut points = Vec::new();
    for iy in 0..nx {
        for ix in 0..nx {
            let p = Vec2::new(step(xlim, ix), step(ylim, iy));
            if contains(curve, &p) {
                points.push(GridPoint { ix, iy, p });
            }
        }
    }
    Ok(InteriorGrid {
        nx,
        xlim,
        ylim,
        points,
    })
}

/// Enclosed area `½∫ r(θ)² dθ` by the periodic trapezoid rule.
pub fn area(curve: &RadialCurve) -> f64 {
    let sum: f64 = nodes(AREA_NODES)
        .iter()
        .map(|&t| curve.radius(t).powi(2))
        .sum();
    0.5 * sum * 2.0 * PI / AREA_NODES as f64
}
