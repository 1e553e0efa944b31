//! Special functions used by the analytic modules.
//!
//! Complete elliptic integral `K(m)` by the arithmetic-geometric mean,
//! Jacobi `sn`/`cn`/`dn` by the descending Landen transformation, the Bessel
//! function `J1` and generalized Laguerre polynomials by recurrence.
//!
//! The parameter convention is `m = k^2` throughout.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::error::{Error, Result};

const AGM_TOL: f64 = 1e-16;
const AGM_MAX_ITER: usize = 64;

fn check_parameter(m: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&m) || m.is_nan() {
        return Err(Error::Domain(format!("elliptic parameter m = {m} not in [0, 1]")));
    }
    Ok(())
}

/// Complete elliptic integral of the first kind, `K(m) = pi / (2 AGM(1, sqrt(1-m)))`.
pub fn elliptic_k(m: f64) -> Result<f64> {
    check_parameter(m)?;
    if m == 1.0 {
        return Err(Error::Divergent("K(m)"));
    }
    let mut a = 1.0_f64;
    let mut b = (1.0 - m).sqrt();
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() <= AGM_TOL * a {
            break;
        }
        let next_a = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next_a;
    }
    Ok(PI / (2.0 * a))
}

/// Jacobi elliptic functions `(sn, cn, dn)` of argument `u` and parameter `m`.
pub fn jacobi_sn_cn_dn(u: f64, m: f64) -> Result<(f64, f64, f64)> {
    check_parameter(m)?;
    if m == 0.0 {
        return Ok((u.sin(), u.cos(), 1.0));
    }
    if m == 1.0 {
        let sech = 1.0 / u.cosh();
        return Ok((u.tanh(), sech, sech));
    }

    // Descending Landen sequence: a_{i+1} = (a_i + b_i)/2, b_{i+1} = sqrt(a_i b_i),
    // c_{i+1} = (a_i - b_i)/2, stopped when c_n is negligible.
    let mut a = [0.0_f64; AGM_MAX_ITER + 1];
    let mut c = [0.0_f64; AGM_MAX_ITER + 1];
    a[0] = 1.0;
    let mut b = (1.0 - m).sqrt();
    c[0] = m.sqrt();
    let mut n = 0;
    while c[n].abs() > AGM_TOL && n < AGM_MAX_ITER {
        let (an, bn) = (a[n], b);
        a[n + 1] = 0.5 * (an + bn);
        c[n + 1] = 0.5 * (an - bn);
        b = (an * bn).sqrt();
        n += 1;
    }

    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for i in (1..=n).rev() {
        phi = 0.5 * (phi + (c[i] / a[i] * phi.sin()).asin());
    }
    let sn = phi.sin();
    let cn = phi.cos();
    let dn = (1.0 - m * sn * sn).sqrt();
    Ok((sn, cn, dn))
}

/// Jacobi `dn(u|m)` and `cn(u|m)`.
pub fn jacobi_dn_cn(u: f64, m: f64) -> Result<(f64, f64)> {
    let (_, cn, dn) = jacobi_sn_cn_dn(u, m)?;
    Ok((dn, cn))
}

/// Bessel function of the first kind of order one.
///
/// Power series below `x = 12`, Hankel asymptotic expansion above.
pub fn bessel_j1(x: f64) -> f64 {
    if x < 0.0 {
        return -bessel_j1(-x);
    }
    if x < 12.0 {
        j1_series(x)
    } else {
        j1_asymptotic(x)
    }
}

fn j1_series(x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = half;
    let mut sum = term;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * (kf + 1.0));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn j1_asymptotic(x: f64) -> f64 {
    // P and Q series for nu = 1, mu = 4 nu^2 = 4
    let mu = 4.0;
    let z8 = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut k = 1usize;
    loop {
        let odd = (2 * k - 1) as f64;
        let next = term * (mu - odd * odd) / (k as f64 * z8);
        // stop at the smallest term of the divergent series
        if next.abs() < 1e-17 || next.abs() > term.abs() {
            break;
        }
        term = next;
        if k % 2 == 1 {
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            q += sign * term;
        } else {
            let sign = if (k / 2) % 2 == 1 { -1.0 } else { 1.0 };
            p += sign * term;
        }
        k += 1;
    }
    let chi = x - 3.0 * FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Generalized Laguerre polynomial `L_n^s(x)` by the three-term recurrence
/// `(k+1) L_{k+1} = (2k+s+1-x) L_k - (k+s) L_{k-1}`.
pub fn laguerre(n: u32, s: u32, x: f64) -> f64 {
    let s = s as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + s - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + s + 1.0 - x) * cur - (kf + s) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `ln(n!)` by direct summation for small `n`, Stirling series above.
pub fn ln_factorial(n: u32) -> f64 {
    if n < 64 {
        (2..=n).map(|k| (k as f64).ln()).sum()
    } else {
        let x = n as f64 + 1.0;
        // ln Gamma(x), Stirling with three correction terms
        (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3))
            + 1.0 / (1260.0 * x.powi(5))
    }
}

/// Quarter period helper used by the two-spin frequency, `pi / (2 K(m))`.
pub fn quarter_period_ratio(m: f64) -> Result<f64> {
    Ok(FRAC_PI_2 / elliptic_k(m)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Independent oracle: composite Simpson on the integral definition of K.
    fn k_quadrature(m: f64) -> f64 {
        let n = 20_000;
        let h = FRAC_PI_2 / n as f64;
        let f = |t: f64| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt();
        let mut s = f(0.0) + f(FRAC_PI_2);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        s * h / 3.0
    }

    // Independent oracle for the amplitude: invert u = F(phi|m) by bisection
    // on a Simpson evaluation of the incomplete integral.
    fn amplitude_oracle(u: f64, m: f64) -> f64 {
        let f_inc = |phi: f64| {
            let n = 4000;
            let h = phi / n as f64;
            let g = |t: f64| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt();
            let mut s = g(0.0) + g(phi);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * g(i as f64 * h);
            }
            s * h / 3.0
        };
        let (mut lo, mut hi) = (0.0, 4.0 * PI);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if f_inc(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    // Independent oracle for J1: trapezoid rule on Bessel's integral,
    // exponentially convergent for the periodic integrand.
    fn j1_integral(x: f64) -> f64 {
        let n = 2000;
        let h = PI / n as f64;
        let f = |t: f64| (t - x * t.sin()).cos();
        let mut s = 0.5 * (f(0.0) + f(PI));
        for i in 1..n {
            s += f(i as f64 * h);
        }
        s * h / PI
    }

    fn laguerre_explicit(n: u32, s: u32, x: f64) -> f64 {
        let binom = |a: u32, b: u32| -> f64 {
            (0..b).fold(1.0, |acc, i| acc * (a - i) as f64 / (i + 1) as f64)
        };
        let mut sum = 0.0;
        let mut fact = 1.0;
        for i in 0..=n {
            if i > 0 {
                fact *= i as f64;
            }
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * binom(n + s, n - i) * x.powi(i as i32) / fact;
        }
        sum
    }

    #[test]
    fn k_at_zero_is_half_pi() {
        assert!((elliptic_k(0.0).unwrap() - FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn k_matches_quadrature() {
        // frozen from the Simpson oracle above: K(0.5) = 1.854074677301372
        let frozen = 1.854_074_677_301_372;
        assert!((k_quadrature(0.5) - frozen).abs() < 1e-12);
        let k = elliptic_k(0.5).unwrap();
        assert!(((k - frozen) / frozen).abs() < 1e-12);
        for &m in &[0.1, 0.3, 0.7, 0.9, 0.99] {
            let rel = (elliptic_k(m).unwrap() - k_quadrature(m)).abs() / k_quadrature(m);
            assert!(rel < 1e-11, "m = {m}: rel {rel}");
        }
    }

    #[test]
    fn k_monotone_and_domain() {
        let k = |m| elliptic_k(m).unwrap();
        assert!(k(0.99) > k(0.9) && k(0.9) > k(0.5));
        assert!(matches!(elliptic_k(1.0), Err(Error::Divergent(_))));
        assert!(matches!(elliptic_k(-0.1), Err(Error::Domain(_))));
        assert!(matches!(elliptic_k(1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn dn_cn_degenerate_parameters() {
        for &u in &[-3.0, 0.0, 0.7, 12.5, 99.0] {
            let (dn, cn) = jacobi_dn_cn(u, 0.0).unwrap();
            assert!((dn - 1.0).abs() < 1e-12 && (cn - f64::cos(u)).abs() < 1e-12);
            let (dn, cn) = jacobi_dn_cn(u, 1.0).unwrap();
            let sech = 1.0 / f64::cosh(u);
            assert!((dn - sech).abs() < 1e-14 && (cn - sech).abs() < 1e-14);
        }
    }

    #[test]
    fn dn_cn_quarter_period() {
        let m = 0.3;
        let k = elliptic_k(m).unwrap();
        let (dn, cn) = jacobi_dn_cn(k, m).unwrap();
        assert!((dn - (1.0 - m).sqrt()).abs() < 1e-12);
        assert!(cn.abs() < 1e-12);
        // the amplitude oracle puts am(K) at pi/2
        assert!((amplitude_oracle(k, m) - FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn dn_cn_match_amplitude_oracle() {
        for &(u, m) in &[(0.4, 0.2), (1.7, 0.5), (3.3, 0.81), (5.0, 0.95), (2.2, 0.999)] {
            let phi = amplitude_oracle(u, m);
            let (dn, cn) = jacobi_dn_cn(u, m).unwrap();
            assert!((cn - phi.cos()).abs() < 1e-9, "cn at ({u},{m})");
            assert!((dn - (1.0 - m * phi.sin().powi(2)).sqrt()).abs() < 1e-9, "dn at ({u},{m})");
        }
    }

    #[test]
    fn dn_cn_periodicity() {
        for &m in &[0.1, 0.5, 0.9, 0.99] {
            let k = elliptic_k(m).unwrap();
            for &u in &[0.3, 1.1, 2.9] {
                let (dn0, cn0) = jacobi_dn_cn(u, m).unwrap();
                let (dn2, _) = jacobi_dn_cn(u + 2.0 * k, m).unwrap();
                let (_, cn4) = jacobi_dn_cn(u + 4.0 * k, m).unwrap();
                assert!((dn0 - dn2).abs() < 1e-10);
                assert!((cn0 - cn4).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn j1_values() {
        assert_eq!(bessel_j1(0.0), 0.0);
        for &x in &[0.1, 0.5, 1.0, 1.8, 2.5, 4.0, 6.3, 9.0, 11.9] {
            let oracle = j1_integral(x);
            assert!((bessel_j1(x) - oracle).abs() < 1e-12 * oracle.abs().max(1.0), "x = {x}");
        }
        for &x in &[12.0, 15.0, 30.0] {
            let oracle = j1_integral(x);
            assert!((bessel_j1(x) - oracle).abs() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn j1_maximum_near_0586_pi() {
        // golden-section search for the maximum on [0, pi]
        let (mut a, mut b) = (0.0, PI);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..100 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if bessel_j1(c) > bessel_j1(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let xmax = 0.5 * (a + b);
        assert!((xmax / PI - 0.586).abs() < 5e-4, "argmax / pi = {}", xmax / PI);
    }

    #[test]
    fn j1_first_zero() {
        // first zero located by bisection on the integral oracle: 3.831705970207512
        let (mut lo, mut hi) = (3.0, 4.5);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if j1_integral(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - 3.831_705_970_207_512).abs() < 1e-10);
        assert!(bessel_j1(3.831_705_970_207_512).abs() < 1e-13);
        assert!(bessel_j1(3.8317).abs() < 1e-5);
    }

    #[test]
    fn laguerre_small_cases() {
        for &x in &[0.0, 0.3, 2.0] {
            assert_eq!(laguerre(0, 3, x), 1.0);
            assert!((laguerre(1, 0, x) - (1.0 - x)).abs() < 1e-15);
        }
        // direct summation of the explicit polynomial: L_3^2(0.5) = 5.604166666666667
        let frozen = 5.604_166_666_666_667;
        assert!((laguerre_explicit(3, 2, 0.5) - frozen).abs() < 1e-13);
        assert!((laguerre(3, 2, 0.5) - frozen).abs() < 1e-13);
    }

    #[test]
    fn ln_factorial_branches_agree() {
        let direct: f64 = (2..=80u32).map(|k| (k as f64).ln()).sum();
        assert!((ln_factorial(80) - direct).abs() < 1e-10);
        assert_eq!(ln_factorial(0), 0.0);
    }

    proptest! {
        #[test]
        fn jacobi_identities(u in -50.0f64..50.0, m in 0.0f64..1.0) {
            let (sn, cn, dn) = jacobi_sn_cn_dn(u, m).unwrap();
            prop_assert!((cn * cn + sn * sn - 1.0).abs() < 1e-10);
            prop_assert!((dn * dn + m * sn * sn - 1.0).abs() < 1e-10);
            prop_assert!(dn >= (1.0 - m).sqrt() - 1e-12 && dn <= 1.0 + 1e-12);
        }

        #[test]
        fn m_zero_is_cosine(u in -100.0f64..100.0) {
            let (dn, cn) = jacobi_dn_cn(u, 0.0).unwrap();
            prop_assert!((dn - 1.0).abs() < 1e-12 && (cn - u.cos()).abs() < 1e-12);
        }

        #[test]
        fn k_strictly_increasing(a in 0.0f64..0.999, b in 0.0f64..0.999) {
            prop_assume!((a - b).abs() > 1e-9);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(elliptic_k(lo).unwrap() < elliptic_k(hi).unwrap());
        }

        #[test]
        fn laguerre_recurrence(n in 1u32..150, s in 0u32..6, x in 0.0f64..3.0) {
            let lhs = (n as f64 + 1.0) * laguerre(n + 1, s, x);
            let rhs = (2.0 * n as f64 + s as f64 + 1.0 - x) * laguerre(n, s, x)
                - (n as f64 + s as f64) * laguerre(n - 1, s, x);
            let scale = lhs.abs().max(rhs.abs()).max(1.0);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * scale);
        }
    }
}
