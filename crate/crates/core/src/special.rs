//! Bessel functions for the fundamental-solution basis and the disc oracle.
//!
//! `Y0`, `Y1`, `J0` and `J1` come from the `libm` port of fdlibm. Integer
//! orders `J_n` are built on top: forward recurrence when `x > n`, otherwise
//! Miller's downward recurrence normalized by `J_0 + 2 Σ J_{2k} = 1`.

use crate::error::{Error, Result};

/// Largest supported integer order.
pub const MAX_ORDER: u32 = 200;
/// Largest supported argument for integer orders.
pub const MAX_ARG: f64 = 1e4;
/// Largest supported radial index in [`jnprime_zero`].
pub const MAX_ZERO_INDEX: u32 = 100;

const RESCALE_AT: f64 = 1e250;

fn check_positive(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("Bessel Y requires x > 0, got {x}")))
    }
}

pub fn bessel_y0(x: f64) -> Result<f64> {
    check_positive(x)?;
    Ok(libm::y0(x))
}

pub fn bessel_y1(x: f64) -> Result<f64> {
    check_positive(x)?;
    Ok(libm::y1(x))
}

/// `Y0` and `Y1` for callers that have already checked `x > 0`.
#[inline]
pub(crate) fn y0_y1(x: f64) -> (f64, f64) {
    (libm::y0(x), libm::y1(x))
}

fn check_order_arg(n: u32, x: f64) -> Result<()> {
    if n > MAX_ORDER + 1 {
        return Err(Error::Domain(format!("order {n} exceeds {MAX_ORDER}")));
    }
    if !(0.0..=MAX_ARG).contains(&x) {
        return Err(Error::Domain(format!("argument {x} outside [0, {MAX_ARG}]")));
    }
    Ok(())
}

pub fn bessel_jn(n: u32, x: f64) -> Result<f64> {
    if n > MAX_ORDER {
        return Err(Error::Domain(format!("order {n} exceeds {MAX_ORDER}")));
    }
    check_order_arg(n, x)?;
    Ok(jn_unchecked(n, x))
}

/// `J_n'(x) = (J_{n-1}(x) - J_{n+1}(x))/2`, with `J_0' = -J_1`.
pub fn bessel_jn_prime(n: u32, x: f64) -> Result<f64> {
    if n > MAX_ORDER {
        return Err(Error::Domain(format!("order {n} exceeds {MAX_ORDER}")));
    }
    check_order_arg(n, x)?;
    Ok(jn_prime_unchecked(n, x))
}

pub(crate) fn jn_prime_unchecked(n: u32, x: f64) -> f64 {
    if n == 0 {
        -libm::j1(x)
    } else {
        0.5 * (jn_unchecked(n - 1, x) - jn_unchecked(n + 1, x))
    }
}

pub(crate) fn jn_unchecked(n: u32, x: f64) -> f64 {
    match n {
        0 => return libm::j0(x),
        1 => return libm::j1(x),
        _ => {}
    }
    if x == 0.0 {
        return 0.0;
    }
    if x > n as f64 {
        let (mut prev, mut cur) = (libm::j0(x), libm::j1(x));
        for k in 1..n {
            let next = 2.0 * k as f64 / x * cur - prev;
            prev = cur;
            cur = next;
        }
        cur
    } else {
        miller(n, x)
    }
}

/// Downward recurrence from `K = n + ceil(sqrt(40 n)) + 20` (rounded up to even).
fn miller(n: u32, x: f64) -> f64 {
    let mut start = n + (40.0 * n as f64).sqrt().ceil() as u32 + 20;
    if start % 2 == 1 {
        start += 1;
    }
    let (mut above, mut cur) = (0.0f64, 1e-30f64);
    let mut result = 0.0;
    let mut norm = 0.0;
    let mut k = start;
    while k > 0 {
        let below = 2.0 * k as f64 / x * cur - above;
        above = cur;
        cur = below;
        k -= 1;
        if k == n {
            result = cur;
        }
        if k % 2 == 0 && k > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > RESCALE_AT {
            cur /= RESCALE_AT;
            above /= RESCALE_AT;
            result /= RESCALE_AT;
            norm /= RESCALE_AT;
        }
    }
    norm += cur;
    result / norm
}

/// Second derivative from Bessel's equation.
fn jn_second(n: u32, x: f64, jn: f64, djn: f64) -> f64 {
    let nf = n as f64;
    -djn / x - (1.0 - nf * nf / (x * x)) * jn
}

/// The `l`-th positive zero `μ_{n,l}` of `J_n'`.
///
/// Zeros are bracketed by a sign-change scan starting where `J_n'` is known
/// to be nonzero (`x = n` for `n ≥ 1`, where `J_n' > 0`), then refined by
/// bisection followed by safeguarded Newton steps.
pub fn jnprime_zero(n: u32, l: u32) -> Result<f64> {
    if n > MAX_ORDER {
        return Err(Error::Domain(format!("order {n} exceeds {MAX_ORDER}")));
    }
    if l == 0 || l > MAX_ZERO_INDEX {
        return Err(Error::Domain(format!(
            "zero index {l} outside 1..={MAX_ZERO_INDEX}"
        )));
    }
    const STEP: f64 = 0.05;
    let f = |x: f64| jn_prime_unchecked(n, x);
    let mut a = if n == 0 { 0.5 } else { n as f64 };
    let mut fa = f(a);
    let mut found = 0;
    loop {
        let b = a + STEP;
        if b > MAX_ARG {
            return Err(Error::Numerical(format!(
                "no bracket for zero {l} of J_{n}' below {MAX_ARG} (found {found})"
            )));
        }
        let fb = f(b);
        if fb == 0.0 || fa * fb < 0.0 {
            found += 1;
            if found == l {
                return Ok(refine_root(n, a, b, fa));
            }
        }
        a = b;
        fa = fb;
    }
}

/// All positive zeros of `J_n'` below `x_max`, in increasing order.
pub fn jnprime_zeros_below(n: u32, x_max: f64) -> Result<Vec<f64>> {
    if n > MAX_ORDER {
        return Err(Error::Domain(format!("order {n} exceeds {MAX_ORDER}")));
    }
    if !(x_max <= MAX_ARG) {
        return Err(Error::Domain(format!("bound {x_max} exceeds {MAX_ARG}")));
    }
    const STEP: f64 = 0.05;
    let f = |x: f64| jn_prime_unchecked(n, x);
    let mut zeros = Vec::new();
    let mut a = if n == 0 { 0.5 } else { n as f64 };
    let mut fa = f(a);
    while a < x_max {
        let b = a + STEP;
        let fb = f(b);
        if fb == 0.0 || fa * fb < 0.0 {
            let z = refine_root(n, a, b, fa);
            if z < x_max {
                zeros.push(z);
            }
        }
        a = b;
        fa = fb;
    }
    Ok(zeros)
}

fn refine_root(n: u32, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    let f = |x: f64| jn_prime_unchecked(n, x);
    if f(b) == 0.0 {
        return b;
    }
    for _ in 0..40 {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..4 {
        let d = f(x);
        let dd = jn_second(n, x, jn_unchecked(n, x), d);
        if dd == 0.0 {
            break;
        }
        let next = x - d / dd;
        if !(a..=b).contains(&next) {
            break;
        }
        let done = (next - x).abs() <= 4.0 * f64::EPSILON * x;
        x = next;
        if done {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros_below_agree_with_indexed_zeros() {
        for n in [0u32, 1, 7, 30] {
            let zs = jnprime_zeros_below(n, 60.0).unwrap();
            assert!(!zs.is_empty());
            for (i, z) in zs.iter().enumerate() {
                assert_eq!(*z, jnprime_zero(n, i as u32 + 1).unwrap());
            }
            assert!(jnprime_zero(n, zs.len() as u32 + 1).unwrap() >= 60.0);
        }
        assert!(jnprime_zeros_below(40, 30.0).unwrap().is_empty());
    }
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    // 50-digit reference values (mpmath, frozen).
    const Y0_REF: [(f64, f64); 6] = [
        (1.0, 0.08825696421567695798292677),
        (0.5, -0.4445187335067065571483985),
        (5.0, -0.308517625249033780073649),
        (20.0, 0.06264059680938383116172901),
        (200.0, -0.05426577524981791069350012),
        (1e4, 0.00364780555898660588668872),
    ];
    const Y1_REF: [(f64, f64); 6] = [
        (1.0, -0.78121282130028871654715),
        (0.5, -1.471472392670243069188585),
        (5.0, 0.1478631433912268448010507),
        (20.0, -0.165511614362521295863976),
        (200.0, 0.01530182458038998921966781),
        (1e-3, -636.6221672311394280743732),
    ];

    /// Ascending series for `Y0`, accurate in f64 for small arguments.
    fn y0_series(x: f64) -> f64 {
        const EULER: f64 = 0.577_215_664_901_532_9;
        let q = -0.25 * x * x;
        let (mut term, mut harmonic, mut j0, mut tail) = (1.0, 0.0, 1.0, 0.0);
        for k in 1..60 {
            term *= q / (k * k) as f64;
            harmonic += 1.0 / k as f64;
            j0 += term;
            tail += term * harmonic;
        }
        2.0 / PI * ((0.5 * x).ln() + EULER) * j0 - 2.0 / PI * tail
    }

    #[test]
    fn y_against_high_precision_values() {
        for (x, v) in Y0_REF {
            assert!(rel(bessel_y0(x).unwrap(), v) <= 1e-13, "Y0({x})");
        }
        for (x, v) in Y1_REF {
            assert!(rel(bessel_y1(x).unwrap(), v) <= 1e-13, "Y1({x})");
        }
        assert!(rel(bessel_y0(1.0).unwrap(), y0_series(1.0)) < 1e-14);
    }

    #[test]
    fn y_singularities() {
        assert!(bessel_y0(1e-6).unwrap() < -8.0);
        assert!(bessel_y1(1e-6).unwrap() < -1e5);
        assert!(matches!(bessel_y0(0.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_y1(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn y0_derivative_is_minus_y1() {
        for x in [2.0, 10.0, 100.0] {
            let h = 1e-5;
            let fd = (bessel_y0(x + h).unwrap() - bessel_y0(x - h).unwrap()) / (2.0 * h);
            assert!((fd + bessel_y1(x).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn wronskian() {
        for x in [0.5, 1.0, 5.0, 20.0, 200.0] {
            let w = bessel_jn(1, x).unwrap() * bessel_y0(x).unwrap()
                - bessel_jn(0, x).unwrap() * bessel_y1(x).unwrap();
            assert!(rel(w, 2.0 / (PI * x)) < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn jn_values() {
        assert_eq!(bessel_jn(0, 0.0).unwrap(), 1.0);
        for n in 1..20 {
            assert_eq!(bessel_jn(n, 0.0).unwrap(), 0.0);
        }
        let cases = [
            (5, 12.0, -0.07347096310165858126578843),
            (200, 150.0, 8.05770219839685379647231e-14),
            (3, 1e4, -0.003644611999592164381159928),
            (100, 100.0, 0.09636667329586155967431402),
            (60, 10.0, 6.909433249439961898106398e-41),
        ];
        for (n, x, v) in cases {
            assert!(rel(bessel_jn(n, x).unwrap(), v) < 1e-12, "J_{n}({x})");
        }
        assert!(matches!(bessel_jn(201, 1.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_jn(3, 2e4), Err(Error::Domain(_))));
    }

    #[test]
    fn jn_sum_rule() {
        let x = 7.3;
        let mut s = bessel_jn(0, x).unwrap().powi(2);
        for n in 1..=60 {
            s += 2.0 * bessel_jn(n, x).unwrap().powi(2);
        }
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jn_agrees_with_libm_where_both_are_well_conditioned() {
        for n in [2u32, 7, 30, 80, 150] {
            for x in [0.3, 4.0, 31.0, 90.0, 170.0, 900.0] {
                let ours = bessel_jn(n, x).unwrap();
                let theirs = libm::jn(n as i32, x);
                let scale = ours.abs().max(1e-3 * (2.0 / (PI * x)).sqrt().min(1.0));
                assert!((ours - theirs).abs() <= 1e-12 * scale, "J_{n}({x}): {ours} vs {theirs}");
            }
        }
    }

    #[test]
    fn jn_prime_identities() {
        let x = 3.1;
        assert!((bessel_jn_prime(0, x).unwrap() + bessel_jn(1, x).unwrap()).abs() < 1e-13);
        assert_eq!(bessel_jn_prime(0, 0.0).unwrap(), 0.0);
        assert!((bessel_jn_prime(1, 0.0).unwrap() - 0.5).abs() < 1e-15);
        for n in 2..10 {
            assert_eq!(bessel_jn_prime(n, 0.0).unwrap(), 0.0);
        }
        let h = 1e-5;
        let fd = (bessel_jn(5, 12.0 + h).unwrap() - bessel_jn(5, 12.0 - h).unwrap()) / (2.0 * h);
        assert!((fd - bessel_jn_prime(5, 12.0).unwrap()).abs() < 1e-7);
    }

    #[test]
    fn whispering_gallery_zero() {
        let mu = jnprime_zero(30, 1).unwrap();
        assert!((mu - 32.534223556790).abs() < 1e-12 * mu);
        assert!((mu - 32.53422355679014240864518).abs() < 1e-12 * mu);
        let mu2 = jnprime_zero(30, 2).unwrap();
        assert!(rel(mu2, 38.63609270136743650594367) < 1e-12);
        assert!(rel(jnprime_zero(200, 1).unwrap(), 204.7409602767712325938144) < 1e-12);
        assert!(rel(jnprime_zero(0, 1).unwrap(), 3.831705970207512315614436) < 1e-12);
    }

    #[test]
    fn first_zero_of_j1_prime_by_brute_force_scan() {
        let f = |x: f64| bessel_jn_prime(1, x).unwrap();
        let step = 1e-6;
        let mut x = step;
        let mut fx = f(x);
        let (mut a, mut b) = (0.0, 0.0);
        while x < 5.0 {
            let y = x + step;
            let fy = f(y);
            if fx * fy <= 0.0 {
                a = x;
                b = y;
                break;
            }
            x = y;
            fx = fy;
        }
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if f(a) * f(m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        let oracle = 0.5 * (a + b);
        assert!(rel(jnprime_zero(1, 1).unwrap(), oracle) < 1e-12);
    }

    #[test]
    fn zero_residuals_and_interlacing() {
        for n in 0..=40 {
            let mut last = n as f64;
            for l in 1..=10 {
                let mu = jnprime_zero(n, l).unwrap();
                let res = bessel_jn_prime(n, mu).unwrap().abs();
                assert!(res <= 1e-11 * bessel_jn(n, mu).unwrap().abs(), "({n},{l})");
                assert!(mu > last, "({n},{l})");
                last = mu;
            }
        }
        assert!(jnprime_zero(3, 0).is_err());
        assert!(jnprime_zero(201, 1).is_err());
    }
}
