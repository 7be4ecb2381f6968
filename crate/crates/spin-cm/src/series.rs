//! Truncated lattice sums with analytic tail corrections: the independent
//! oracle the closed-form kernels are validated against.
//!
//! The partial sum runs over |n| <= cutoff; each one-sided remainder
//! sum_{n > M} e^{ins}/(n + rho)^2 is corrected analytically. For s bounded
//! away from a multiple of 2 pi the geometric (Abel) extraction converges
//! fast; close to a multiple of 2 pi the oscillation is slow and an
//! Euler-Maclaurin expansion with sine/cosine integrals takes over.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::kernels::reduce_2pi;

/// Crossover between the geometric extraction and Euler-Maclaurin.
const S_CUT: f64 = 1e-3;

/// Sine integral Si(w), w >= 0.
fn si(w: f64) -> f64 {
    if w <= 20.0 {
        // sum (-1)^k w^{2k+1} / ((2k+1)(2k+1)!)
        let mut sum = 0.0f64;
        let mut t = w; // w^{2k+1}/(2k+1)! at k=0
        for k in 0..200 {
            sum += t / (2 * k + 1) as f64;
            t *= -w * w / ((2 * k + 2) as f64 * (2 * k + 3) as f64);
            if t.abs() < 1e-20 {
                break;
            }
        }
        sum
    } else {
        let (f, g) = fg_aux(w);
        PI / 2.0 - f * w.cos() - g * w.sin()
    }
}

/// Cosine integral Ci(w), w > 0.
fn ci(w: f64) -> f64 {
    if w <= 20.0 {
        // gamma + ln w + sum (-1)^k w^{2k} / (2k (2k)!)
        const EULER_GAMMA: f64 = 0.5772156649015328606;
        let mut sum = 0.0f64;
        let mut t = -w * w / 2.0; // (-1)^k w^{2k}/(2k)! at k=1
        for k in 1..200 {
            sum += t / (2 * k) as f64;
            t *= -w * w / ((2 * k + 1) as f64 * (2 * k + 2) as f64);
            if t.abs() < 1e-20 {
                break;
            }
        }
        EULER_GAMMA + w.ln() + sum
    } else {
        let (f, g) = fg_aux(w);
        f * w.sin() - g * w.cos()
    }
}

/// Asymptotic auxiliary functions f, g with Si = pi/2 - f cos - g sin,
/// Ci = f sin - g cos.
fn fg_aux(w: f64) -> (f64, f64) {
    let w2 = w * w;
    let f = (1.0 - 2.0 / w2 + 24.0 / (w2 * w2) - 720.0 / (w2 * w2 * w2)) / w;
    let g = (1.0 - 6.0 / w2 + 120.0 / (w2 * w2) - 5040.0 / (w2 * w2 * w2)) / w2;
    (f, g)
}

/// int_w^inf e^{iu}/u du for w > 0.
fn exp_integral_tail(w: f64) -> C64 {
    C64::new(-ci(w), PI / 2.0 - si(w))
}

/// One-sided tail sum_{n >= a} e^{i n s} / (n + rho)^2 for s in (0, 2 pi)
/// handled by the geometric extraction, any s by Euler-Maclaurin near 0.
/// `s` must already be reduced so that e^{is} != 1 is meaningful; rho is
/// complex with |rho| << a.
fn tail_one_sided(a: f64, s: f64, rho: C64) -> C64 {
    let f0 = |x: f64| -> C64 {
        let d = rho + x;
        C64::new(1.0, 0.0) / (d * d)
    };
    if s.abs() >= S_CUT {
        // S = (1/(1-z)) [ z^a f(a) + z S(Delta f) ], iterated four levels
        let z = C64::new(0.0, s).exp();
        let za = C64::new(0.0, a * s).exp();
        let geom = C64::new(1.0, 0.0) / (C64::new(1.0, 0.0) - z);
        let df = |k: usize, x: f64| -> C64 {
            // k-th forward difference of f at x
            let mut acc = C64::new(0.0, 0.0);
            let mut sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
            let mut binom = 1.0f64;
            for j in 0..=k {
                acc += C64::new(sign * binom, 0.0) * f0(x + j as f64);
                sign = -sign;
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
            acc
        };
        let mut acc = C64::new(0.0, 0.0);
        let mut pref = geom * za;
        for k in 0..5 {
            acc += pref * df(k, a);
            pref = pref * z * geom;
        }
        acc
    } else if s.abs() < 1e-14 {
        // real tail: integral + Euler-Maclaurin corrections
        let d = rho + a;
        let integral = C64::new(1.0, 0.0) / d;
        let h0 = f0(a);
        let h1 = C64::new(-2.0, 0.0) / (d * d * d);
        let h3 = C64::new(-24.0, 0.0) / (d * d * d * d * d);
        integral + h0 * C64::new(0.5, 0.0) - h1 / C64::new(12.0, 0.0) + h3 / C64::new(720.0, 0.0)
    } else {
        // slow oscillation: Euler-Maclaurin with the sine/cosine integrals;
        // conjugate to keep the frequency positive
        if s < 0.0 {
            return tail_one_sided(a, -s, rho.conj()).conj();
        }
        let d = rho + a;
        let is = C64::new(0.0, s);
        let phase_a = C64::new(0.0, a * s).exp();
        // integral: e^{ias}/(a+rho) + i s e^{-i rho s} int_{s(a+rho)}^inf e^{iu}/u du
        // the lower limit is effectively real (|Im rho| << a)
        let w = s * (a + rho.re);
        let integral = phase_a / d + is * (C64::new(0.0, -s) * rho).exp() * exp_integral_tail(w);
        let u1 = C64::new(1.0, 0.0) / (d * d);
        let u2 = C64::new(-2.0, 0.0) / (d * d * d);
        let u3 = C64::new(6.0, 0.0) / (d * d * d * d);
        let u4 = C64::new(-24.0, 0.0) / (d * d * d * d * d);
        let h0 = phase_a * u1;
        let h1 = phase_a * (is * u1 + u2);
        let h3 = phase_a
            * (is * is * is * u1
                + C64::new(3.0, 0.0) * is * is * u2
                + C64::new(3.0, 0.0) * is * u3
                + u4);
        integral + h0 * C64::new(0.5, 0.0) - h1 / C64::new(12.0, 0.0) + h3 / C64::new(720.0, 0.0)
    }
}

/// sum over all integers n of e^{ins}/(n+r)^2, via |n| <= cutoff plus
/// analytic tails.
pub fn series_id(r: C64, s: f64, cutoff: i64) -> C64 {
    let s2 = reduce_2pi(s);
    let mut acc = C64::new(0.0, 0.0);
    for n in -cutoff..=cutoff {
        let nf = n as f64;
        let d = r + nf;
        acc += C64::new(0.0, nf * s2).exp() / (d * d);
    }
    let a = (cutoff + 1) as f64;
    // n > cutoff with e^{ins}; n < -cutoff maps to sum_{n > cutoff} e^{-ins}/(n - r)^2
    acc += tail_one_sided(a, s2, r);
    acc += tail_one_sided(a, -s2, -r);
    acc
}

/// sum over nonzero integers of e^{ins}/n^2.
pub fn series_id1(s: f64, cutoff: i64) -> C64 {
    let s2 = reduce_2pi(s);
    let mut acc = C64::new(0.0, 0.0);
    for n in 1..=cutoff {
        let nf = n as f64;
        acc +=
            (C64::new(0.0, nf * s2).exp() + C64::new(0.0, -nf * s2).exp()) / C64::new(nf * nf, 0.0);
    }
    let a = (cutoff + 1) as f64;
    acc += tail_one_sided(a, s2, C64::new(0.0, 0.0));
    acc += tail_one_sided(a, -s2, C64::new(0.0, 0.0));
    acc
}

/// sum over all integers of 1/(n+r)^2.
pub fn series_id0(r: C64, cutoff: i64) -> C64 {
    series_id(r, 0.0, cutoff)
}
