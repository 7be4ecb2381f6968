//! Dense complex linear algebra: general (non-Hermitian) eigendecomposition,
//! matrix exponentials, and path-ordered exponentials.
//!
//! Everything here is residual-checked: `eig_general` reports the worst
//! column residual of `A v - lambda v`, and the path-ordered product is a
//! midpoint-exponential scheme of order 2 that is exact on constant pieces.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Inverse, Solve};
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;
pub type CMat = Array2<C64>;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("eigensolver failed to converge")]
    NonConvergence,
    #[error("matrix exponential overflowed floating-point range")]
    Overflow,
    #[error("singular linear system in Pade solve")]
    Singular,
    #[error("matrix contains non-finite entries")]
    NonFinite,
}

pub fn identity(n: usize) -> CMat {
    Array2::eye(n).mapv(|x: f64| C64::new(x, 0.0))
}

pub fn is_finite(a: &CMat) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Frobenius norm.
pub fn fro_norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Maximum absolute column sum (operator 1-norm).
pub fn one_norm(a: &CMat) -> f64 {
    let mut best = 0.0f64;
    for j in 0..a.ncols() {
        let s: f64 = a.column(j).iter().map(|z| z.norm()).sum();
        best = best.max(s);
    }
    best
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Result of a general eigendecomposition, eigenvalues sorted
/// lexicographically by (re, im) for reproducibility.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<C64>,
    /// Unit-norm right eigenvectors, one per column, in eigenvalue order.
    pub right_eigenvectors: CMat,
    /// max_j ||A v_j - lambda_j v_j||_2
    pub residual: f64,
    /// Set when the minimum pairwise eigenvalue gap is below tol * ||A||_F.
    pub near_degenerate: bool,
}

/// Eigendecomposition of a general complex matrix (LAPACK zgeev behind a
/// residual contract). `tol` bounds the accepted residual relative to
/// ||A||_F and sets the near-degeneracy gap threshold.
pub fn eig_general(a: &CMat, tol: f64) -> Result<EigenDecomposition, LinalgError> {
    if !is_finite(a) {
        return Err(LinalgError::NonFinite);
    }
    let n = a.nrows();
    let (vals, vecs) = a.eig().map_err(|_| LinalgError::NonConvergence)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        (vals[i].re, vals[i].im)
            .partial_cmp(&(vals[j].re, vals[j].im))
            .unwrap()
    });

    let mut eigenvalues = Vec::with_capacity(n);
    let mut right = Array2::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        eigenvalues.push(vals[src]);
        let mut v: Array1<C64> = vecs.column(src).to_owned();
        let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 0.0 {
            v.mapv_inplace(|z| z / nrm);
        }
        right.column_mut(col).assign(&v);
    }

    let scale = fro_norm(a);
    let mut residual = 0.0f64;
    for j in 0..n {
        let v = right.column(j);
        let av = a.dot(&v);
        let r: f64 = av
            .iter()
            .zip(v.iter())
            .map(|(x, y)| (x - eigenvalues[j] * y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        residual = residual.max(r);
    }
    if residual > tol * scale.max(1.0) {
        return Err(LinalgError::NonConvergence);
    }

    let mut min_gap = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            min_gap = min_gap.min((eigenvalues[i] - eigenvalues[j]).norm());
        }
    }
    let near_degenerate = n > 1 && min_gap < tol * scale.max(1.0);

    Ok(EigenDecomposition {
        eigenvalues,
        right_eigenvectors: right,
        residual,
        near_degenerate,
    })
}

pub fn inverse(a: &CMat) -> Result<CMat, LinalgError> {
    a.inv().map_err(|_| LinalgError::Singular)
}

// Pade-13 coefficients and scaling thresholds from Higham's scaling-and-squaring
// method (the same table the double-precision expm in SciPy/Eigen uses).
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA3: f64 = 1.495585217958292e-2;
const THETA5: f64 = 2.539398330063230e-1;
const THETA7: f64 = 9.504178996162932e-1;
const THETA9: f64 = 2.097847961257068;
const THETA13: f64 = 5.371920351148152;

fn pade_lowdeg(a: &CMat, b: &[f64]) -> (CMat, CMat) {
    let n = a.nrows();
    let eye = identity(n);
    let a2 = a.dot(a);
    let mut u_poly = &eye * C64::new(b[1], 0.0);
    let mut v_poly = &eye * C64::new(b[0], 0.0);
    let mut pow = a2.clone();
    let mut k = 2;
    while k + 1 < b.len() {
        v_poly = v_poly + &pow * C64::new(b[k], 0.0);
        u_poly = u_poly + &pow * C64::new(b[k + 1], 0.0);
        if k + 3 < b.len() {
            pow = pow.dot(&a2);
        }
        k += 2;
    }
    (a.dot(&u_poly), v_poly)
}

fn pade13(a: &CMat) -> (CMat, CMat) {
    let b = &PADE13;
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let w1 = &a6 * C64::new(b[13], 0.0) + &a4 * C64::new(b[11], 0.0) + &a2 * C64::new(b[9], 0.0);
    let n = a.nrows();
    let eye = identity(n);
    let w2 = a6.dot(&w1)
        + &a6 * C64::new(b[7], 0.0)
        + &a4 * C64::new(b[5], 0.0)
        + &a2 * C64::new(b[3], 0.0)
        + &eye * C64::new(b[1], 0.0);
    let u = a.dot(&w2);
    let z1 = &a6 * C64::new(b[12], 0.0) + &a4 * C64::new(b[10], 0.0) + &a2 * C64::new(b[8], 0.0);
    let v = a6.dot(&z1)
        + &a6 * C64::new(b[6], 0.0)
        + &a4 * C64::new(b[4], 0.0)
        + &a2 * C64::new(b[2], 0.0)
        + &eye * C64::new(b[0], 0.0);
    (u, v)
}

/// Matrix exponential by scaling-and-squaring with Pade approximants.
pub fn expm(a: &CMat) -> Result<CMat, LinalgError> {
    if !is_finite(a) {
        return Err(LinalgError::NonFinite);
    }
    let norm = one_norm(a);
    let (u, v, squarings) = if norm < THETA3 {
        let (u, v) = pade_lowdeg(a, &[120.0, 60.0, 12.0, 1.0]);
        (u, v, 0u32)
    } else if norm < THETA5 {
        let (u, v) = pade_lowdeg(a, &[30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0]);
        (u, v, 0)
    } else if norm < THETA7 {
        let (u, v) = pade_lowdeg(
            a,
            &[
                17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
            ],
        );
        (u, v, 0)
    } else if norm < THETA9 {
        let (u, v) = pade_lowdeg(
            a,
            &[
                17643225600.0,
                8821612800.0,
                2075673600.0,
                302702400.0,
                30270240.0,
                2162160.0,
                110880.0,
                3960.0,
                90.0,
                1.0,
            ],
        );
        (u, v, 0)
    } else {
        let squarings = ((norm / THETA13).log2().ceil() as i32).max(0) as u32;
        let scale = C64::new(2f64.powi(-(squarings as i32)), 0.0);
        let scaled = a * scale;
        let (u, v) = pade13(&scaled);
        (u, v, squarings)
    };

    let numer = &u + &v;
    let denom = &v - &u;
    let mut result = solve_matrix(&denom, &numer)?;
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    if !is_finite(&result) {
        return Err(LinalgError::Overflow);
    }
    Ok(result)
}

/// Solve A X = B column by column.
fn solve_matrix(a: &CMat, b: &CMat) -> Result<CMat, LinalgError> {
    let n = a.nrows();
    let mut x = Array2::zeros((n, b.ncols()));
    for j in 0..b.ncols() {
        let col = b.column(j).to_owned();
        let sol = a.solve(&col).map_err(|_| LinalgError::Singular)?;
        x.column_mut(j).assign(&sol);
    }
    Ok(x)
}

/// A matrix-valued generator on a normalized sub-interval.
///
/// `Constant(m)` means M(xi) = m; `Affine { c, s }` means M(xi) = c + xi * s
/// for xi in [0, 1] across the piece.
#[derive(Debug, Clone)]
pub enum Generator {
    Constant(CMat),
    Affine { c: CMat, s: CMat },
}

impl Generator {
    pub fn eval(&self, xi: f64) -> CMat {
        match self {
            Generator::Constant(m) => m.clone(),
            Generator::Affine { c, s } => c + &(s * C64::new(xi, 0.0)),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Generator::Constant(m) => m.nrows(),
            Generator::Affine { c, .. } => c.nrows(),
        }
    }
}

/// Piecewise description of x -> M(x): each piece has a positive length and a
/// generator parameterized on the normalized coordinate of that piece.
#[derive(Debug, Clone)]
pub struct GeneratorPath {
    pub pieces: Vec<(f64, Generator)>,
}

impl GeneratorPath {
    pub fn validate(&self) -> bool {
        !self.pieces.is_empty() && self.pieces.iter().all(|(len, _)| *len > 0.0)
    }
}

/// Path-ordered exponential Pexp(int M(x) dx) over the whole path,
/// approximated by ordered midpoint-exponential products: each affine piece
/// of length L is split into `ceil(L * steps_per_unit)` sub-steps and each
/// sub-step contributes exp(h * M(midpoint)). Constant pieces collapse to a
/// single exact exponential.
pub fn path_ordered_exp(path: &GeneratorPath, steps_per_unit: u32) -> Result<CMat, LinalgError> {
    assert!(steps_per_unit >= 1);
    assert!(path.validate(), "invalid generator path");
    let n = path.pieces[0].1.dim();
    let mut prod = identity(n);
    for (len, gen) in &path.pieces {
        prod = pexp_piece(*len, gen, steps_per_unit)?.dot(&prod);
    }
    Ok(prod)
}

fn pexp_piece(len: f64, gen: &Generator, steps_per_unit: u32) -> Result<CMat, LinalgError> {
    match gen {
        Generator::Constant(m) => expm(&(m * C64::new(len, 0.0))),
        Generator::Affine { .. } => {
            let steps = (len * steps_per_unit as f64).ceil().max(1.0) as usize;
            let h = 1.0 / steps as f64;
            let n = gen.dim();
            let mut prod = identity(n);
            for k in 0..steps {
                let xi = (k as f64 + 0.5) * h;
                let m = gen.eval(xi);
                prod = expm(&(&m * C64::new(len * h, 0.0)))?.dot(&prod);
            }
            Ok(prod)
        }
    }
}

/// Partial ordered products of one piece evaluated at the requested
/// normalized positions (each in [0, 1], ascending). One sub-stepping pass
/// serves all requested points; `steps` refers to the full piece.
pub fn pexp_prefixes(
    len: f64,
    gen: &Generator,
    points: &[f64],
    steps: usize,
) -> Result<Vec<CMat>, LinalgError> {
    let n = gen.dim();
    let mut out = Vec::with_capacity(points.len());
    let mut prod = identity(n);
    let mut cur = 0.0f64;
    for &xi in points {
        debug_assert!(xi >= cur - 1e-15 && xi <= 1.0 + 1e-12);
        let span = (xi - cur).max(0.0);
        if span > 0.0 {
            let local = ((span * steps as f64).ceil() as usize).max(1);
            let h = span / local as f64;
            for k in 0..local {
                let mid = cur + (k as f64 + 0.5) * h;
                let m = gen.eval(mid);
                prod = expm(&(&m * C64::new(len * h, 0.0)))?.dot(&prod);
            }
            cur = xi;
        }
        out.push(prod.clone());
    }
    Ok(out)
}

/// Path-ordered exponential with step doubling until the Frobenius change is
/// below `tol` (relative to the result norm) or `max_doublings` is exhausted.
/// Returns the converged product and the step density that produced it.
pub fn path_ordered_exp_adaptive(
    path: &GeneratorPath,
    tol: f64,
    max_doublings: u32,
) -> Result<(CMat, u32), LinalgError> {
    let mut steps = 8u32;
    let mut prev = path_ordered_exp(path, steps)?;
    for _ in 0..max_doublings {
        steps *= 2;
        let next = path_ordered_exp(path, steps)?;
        let diff = fro_norm(&(&next - &prev));
        let scale = fro_norm(&next).max(1.0);
        if diff <= tol * scale {
            return Ok((next, steps));
        }
        prev = next;
    }
    Ok((prev, steps))
}

/// Outcome of matching current eigenvalues against the previous sample.
/// `to_curr[i]` is the index of the current eigenvalue continuing `prev[i]`.
#[derive(Debug, Clone)]
pub struct Pairing {
    pub to_curr: Vec<usize>,
    /// True when a distance tie between distinct assignments was broken by
    /// index order.
    pub ambiguous: bool,
}

/// Greedy minimal-distance matching of eigenvalue lists, ties broken by
/// (prev index, curr index).
pub fn pair_eigenvalues(prev: &[C64], curr: &[C64]) -> Pairing {
    assert_eq!(prev.len(), curr.len());
    let n = prev.len();
    let mut cands: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            cands.push(((prev[i] - curr[j]).norm(), i, j));
        }
    }
    cands.sort_by(|a, b| (a.0, a.1, a.2).partial_cmp(&(b.0, b.1, b.2)).unwrap());
    let mut to_curr = vec![usize::MAX; n];
    let mut curr_used = vec![false; n];
    let mut prev_used = vec![false; n];
    let mut ambiguous = false;
    let mut picked = 0;
    let mut k = 0;
    while picked < n && k < cands.len() {
        let (d, i, j) = cands[k];
        if !prev_used[i] && !curr_used[j] {
            // a tie with another viable candidate means the assignment was
            // settled by index order only
            if let Some(&(d2, i2, j2)) = cands.get(k + 1) {
                if (d2 - d).abs() <= f64::EPSILON * d.max(1.0)
                    && (i2, j2) != (i, j)
                    && !prev_used[i2]
                    && !curr_used[j2]
                {
                    ambiguous = true;
                }
            }
            to_curr[i] = j;
            prev_used[i] = true;
            curr_used[j] = true;
            picked += 1;
        }
        k += 1;
    }
    Pairing { to_curr, ambiguous }
}
