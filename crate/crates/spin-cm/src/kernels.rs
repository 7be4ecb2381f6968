//! Closed-form evaluation of the lattice-sum kernels behind every potential
//! in the library, plus the panel-averaged coefficients for piecewise sources.
//!
//! The three building blocks are
//!   sum_n 1/(n+r)^2           = pi^2 / sin^2(pi r)
//!   sum_n e^{ins}/(n+r)^2     = e^{-i r s'} (pi^2/sin^2(pi r) + i pi s' cot(pi r) - pi |s'|)
//!   sum_{n!=0} e^{ins}/n^2    = s'^2/2 - pi |s'| + pi^2/3
//! with s' the reduction of s into [-pi, pi).

use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("kernel pole: argument within 1e-12 of an integer")]
    PoleAtInteger,
}

/// Distance guard below which a kernel argument counts as sitting on a pole.
pub const POLE_GUARD: f64 = 1e-12;

/// Reduce s into [-pi, pi) by subtracting an integer multiple of 2 pi.
pub fn reduce_2pi(s: f64) -> f64 {
    let y = (s + PI).rem_euclid(2.0 * PI) - PI;
    // rem_euclid can return exactly 2*pi for inputs just below a period edge
    if y >= PI {
        y - 2.0 * PI
    } else {
        y
    }
}

pub fn dist_to_integer(r: C64) -> f64 {
    let d = r.re - r.re.round();
    (d * d + r.im * r.im).sqrt()
}

fn guard_pole(r: C64) -> Result<(), KernelError> {
    if dist_to_integer(r) < POLE_GUARD {
        Err(KernelError::PoleAtInteger)
    } else {
        Ok(())
    }
}

/// sum_n 1/(n+r)^2 over all integers n.
pub fn kernel_id0(r: C64) -> Result<C64, KernelError> {
    guard_pole(r)?;
    let s = (PI * r).sin();
    Ok(C64::new(PI * PI, 0.0) / (s * s))
}

/// sum_n e^{ins}/(n+r)^2 over all integers n, s real.
pub fn kernel_id(r: C64, s: f64) -> Result<C64, KernelError> {
    guard_pole(r)?;
    let s2 = reduce_2pi(s);
    let sn = (PI * r).sin();
    let ct = (PI * r).cos() / sn;
    let base = C64::new(PI * PI, 0.0) / (sn * sn) + C64::new(0.0, PI * s2) * ct
        - C64::new(PI * s2.abs(), 0.0);
    Ok((C64::new(0.0, -s2) * r).exp() * base)
}

/// sum_{n != 0} e^{ins}/n^2, s real.
pub fn kernel_id1(s: f64) -> f64 {
    let s2 = reduce_2pi(s);
    s2 * s2 / 2.0 - PI * s2.abs() + PI * PI / 3.0
}

/// d/dr of kernel_id(r, s).
pub fn kernel_id_dr(r: C64, s: f64) -> Result<C64, KernelError> {
    guard_pole(r)?;
    let s2 = reduce_2pi(s);
    let sn = (PI * r).sin();
    let cs = (PI * r).cos();
    let ct = cs / sn;
    let base = C64::new(PI * PI, 0.0) / (sn * sn) + C64::new(0.0, PI * s2) * ct
        - C64::new(PI * s2.abs(), 0.0);
    let dbase = C64::new(-2.0 * PI * PI * PI, 0.0) * cs / (sn * sn * sn)
        - C64::new(0.0, PI * PI * s2) / (sn * sn);
    Ok((C64::new(0.0, -s2) * r).exp() * (C64::new(0.0, -s2) * base + dbase))
}

/// sum_{n != 0} e^{-ins}/n^3 = -2i sum_{n>=1} sin(ns)/n^3, closed form.
pub fn kappa3(s: f64) -> C64 {
    let v = s.rem_euclid(2.0 * PI);
    let sine_sum = (v * v * v - 3.0 * PI * v * v + 2.0 * PI * PI * v) / 12.0;
    C64::new(0.0, -2.0 * sine_sum)
}

/// sum_n e^{-inu}/(n+r)^3 = -1/2 d/dr [ kernel_id(r, -u) ].
pub fn pdot_kernel(r: C64, u: f64) -> Result<C64, KernelError> {
    Ok(kernel_id_dr(r, -u)? * C64::new(-0.5, 0.0))
}

/// Pair kernel of the delta-site models:
/// v_jk(r) = e^{-i g r x_jk} (1/sin^2(pi g r) + i x_jk cot(pi g r)/pi - |x_jk|/pi) / 4.
pub fn potential_vjk(r: C64, x_jk: f64, g: f64) -> Result<C64, KernelError> {
    Ok(kernel_id(r * g, x_jk)? / C64::new(4.0 * PI * PI, 0.0))
}

/// d/dr of potential_vjk.
pub fn potential_vjk_dr(r: C64, x_jk: f64, g: f64) -> Result<C64, KernelError> {
    Ok(kernel_id_dr(r * g, x_jk)? * C64::new(g / (4.0 * PI * PI), 0.0))
}

/// Diagonal coefficient c_jk = x^2/8pi^2 - |x|/4pi + 1/12 with x already
/// reduced into [-pi, pi).
pub fn coeff_cjk(x_jk: f64) -> f64 {
    x_jk * x_jk / (8.0 * PI * PI) - x_jk.abs() / (4.0 * PI) + 1.0 / 12.0
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j as f64 + 1.0) * x * p1 - j as f64 * p2) / (j as f64 + 1.0);
            }
            pp = n as f64 * (x * p0 - p1) / (x * x - 1.0);
            let dx = p0 / pp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Overlap length of [aj, bj] and the shifted interval [u + ak, u + bk]; the
/// correlation of the two panel indicators, a piecewise-linear tent in u.
fn overlap(u: f64, aj: f64, bj: f64, ak: f64, bk: f64) -> f64 {
    let lo = aj.max(u + ak);
    let hi = bj.min(u + bk);
    (hi - lo).max(0.0)
}

/// Integrate f(u) * tent_jk(u) over the tent support, splitting at the tent
/// nodes and at the kernel kinks u in {-pi, 0, pi}; `order`-point
/// Gauss-Legendre per smooth piece.
fn tent_integral<F: FnMut(f64) -> C64>(
    panel_j: (f64, f64),
    panel_k: (f64, f64),
    order: usize,
    mut f: F,
) -> C64 {
    let (aj, bj) = panel_j;
    let (ak, bk) = panel_k;
    let mut pts = vec![aj - bk, aj - ak, bj - bk, bj - ak];
    for c in [-PI, 0.0, PI] {
        if c > pts[0] && c < pts[3] {
            pts.push(c);
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let (gx, gw) = gauss_legendre(order);
    let mut acc = C64::new(0.0, 0.0);
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo < 1e-15 {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        for (x, wt) in gx.iter().zip(&gw) {
            let u = mid + half * x;
            acc += f(u) * C64::new(wt * half * overlap(u, aj, bj, ak, bk), 0.0);
        }
    }
    acc
}

/// Panel-averaged kernel coefficients of the piecewise-exponential source:
/// w_jk(r) and d_jk over panels j, k of the breakpoint grid. The double
/// integral reduces to a 1-D integral of the (x - y)-dependent kernel against
/// the panel-overlap tent, split at the kink lines x - y in {0, +-pi}.
pub fn coeff_wjk_djk(
    j: usize,
    k: usize,
    breakpoints: &[f64],
    g: f64,
    r: C64,
) -> Result<(C64, f64), KernelError> {
    let w = wjk(j, k, breakpoints, g, r, 40)?;
    let d = djk(j, k, breakpoints, 40);
    Ok((w, d))
}

pub fn wjk(
    j: usize,
    k: usize,
    breakpoints: &[f64],
    g: f64,
    r: C64,
    order: usize,
) -> Result<C64, KernelError> {
    guard_pole(r * g)?;
    let pj = (breakpoints[j], breakpoints[j + 1]);
    let pk = (breakpoints[k], breakpoints[k + 1]);
    let gr = r * g;
    let acc = tent_integral(pj, pk, order, |u| {
        (C64::new(0.0, u) * gr).exp() * kernel_id(gr, u).expect("pole guarded above")
    });
    let norm = (pj.1 - pj.0) * (pk.1 - pk.0) * 4.0 * PI * PI;
    Ok(acc / C64::new(norm, 0.0))
}

/// d/dr of w_jk(r).
pub fn wjk_dr(
    j: usize,
    k: usize,
    breakpoints: &[f64],
    g: f64,
    r: C64,
    order: usize,
) -> Result<C64, KernelError> {
    guard_pole(r * g)?;
    let pj = (breakpoints[j], breakpoints[j + 1]);
    let pk = (breakpoints[k], breakpoints[k + 1]);
    let gr = r * g;
    let acc = tent_integral(pj, pk, order, |u| {
        let phase = (C64::new(0.0, u) * gr).exp();
        let kid = kernel_id(gr, u).expect("pole guarded above");
        let dkid = kernel_id_dr(gr, u).expect("pole guarded above");
        phase * (C64::new(0.0, g * u) * kid + dkid * C64::new(g, 0.0))
    });
    let norm = (pj.1 - pj.0) * (pk.1 - pk.0) * 4.0 * PI * PI;
    Ok(acc / C64::new(norm, 0.0))
}

pub fn djk(j: usize, k: usize, breakpoints: &[f64], order: usize) -> f64 {
    let pj = (breakpoints[j], breakpoints[j + 1]);
    let pk = (breakpoints[k], breakpoints[k + 1]);
    let acc = tent_integral(pj, pk, order, |u| {
        let u2 = reduce_2pi(u);
        C64::new(
            u2 * u2 / (8.0 * PI * PI) - u2.abs() / (4.0 * PI) + 1.0 / 12.0,
            0.0,
        )
    });
    acc.re / ((pj.1 - pj.0) * (pk.1 - pk.0))
}

/// Panel-averaged third-power kernel for the momentum equation of the
/// piecewise-exponential source:
/// (1/Dj Dk) intint sum_n e^{-i(n+gr)(x-y)}/(n+gr)^3 dx dy.
pub fn pdot_wjk(
    j: usize,
    k: usize,
    breakpoints: &[f64],
    g: f64,
    r: C64,
    order: usize,
) -> Result<C64, KernelError> {
    guard_pole(r * g)?;
    let pj = (breakpoints[j], breakpoints[j + 1]);
    let pk = (breakpoints[k], breakpoints[k + 1]);
    let gr = r * g;
    let acc = tent_integral(pj, pk, order, |u| {
        (C64::new(0.0, -u) * gr).exp() * pdot_kernel(gr, u).expect("pole guarded above")
    });
    Ok(acc / C64::new((pj.1 - pj.0) * (pk.1 - pk.0), 0.0))
}

/// Same as `pdot_wjk` for the diagonal (n != 0, r = 0) part.
pub fn pdot_djk(j: usize, k: usize, breakpoints: &[f64], order: usize) -> C64 {
    let pj = (breakpoints[j], breakpoints[j + 1]);
    let pk = (breakpoints[k], breakpoints[k + 1]);
    let acc = tent_integral(pj, pk, order, kappa3);
    acc / C64::new((pj.1 - pj.0) * (pk.1 - pk.0), 0.0)
}
