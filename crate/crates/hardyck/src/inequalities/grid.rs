//! Cell-centred grids on `[-L, L]^d` (`d ∈ {1, 2}`), input functions, and
//! convolution with kernel majorants integrated exactly over cells.
//!
//! Functions are sampled at cell centres and norms use the discrete measure
//! `h^d Σ δ_{x_i}`. For a piecewise constant `g` the convolution with cell
//! integrals of the kernel is exact at the centres.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::asymptotics::ZeroClass;
use crate::kernels::{eval_kernel_bound, KernelBound, KernelError, KernelVariant};
use crate::quadrature::{integrate, Integrand, QuadError};
use crate::{cst, to_f64, Scalar};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("cell size {h} exceeds 0.1 × singularity scale {scale}")]
    UnderResolved { h: f64, scale: f64 },
    #[error("grid dimension {0} is not supported (use 1 or 2)")]
    Dimension(usize),
    #[error("grid needs at least 2 cells per axis and positive width")]
    Size,
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid<T> {
    pub dim: usize,
    pub half_width: T,
    /// Cells per axis.
    pub n: usize,
}

impl<T: Scalar> Grid<T> {
    pub fn new(dim: usize, half_width: T, n: usize) -> Result<Self, GridError> {
        if dim != 1 && dim != 2 {
            return Err(GridError::Dimension(dim));
        }
        if n < 2 || !(half_width > T::zero()) {
            return Err(GridError::Size);
        }
        Ok(Grid { dim, half_width, n })
    }

    /// Default resolution: `2^10` cells per axis in `d = 1`, `2^8` in `d = 2`.
    pub fn default_n(dim: usize) -> usize {
        if dim == 1 {
            1024
        } else {
            256
        }
    }

    /// The grid refined `level` times by a factor 2.
    pub fn refined(&self, level: usize) -> Self {
        Grid { n: self.n << level, ..*self }
    }

    pub fn h(&self) -> T {
        cst::<T>(2.0) * self.half_width / cst(self.n as f64)
    }

    pub fn cell_measure(&self) -> T {
        self.h().powi(self.dim as i32)
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn coord(&self, k: usize) -> T {
        -self.half_width + (cst::<T>(k as f64) + cst(0.5)) * self.h()
    }

    /// Centre of cell `i` (second coordinate zero in `d = 1`).
    pub fn point(&self, i: usize) -> [T; 2] {
        if self.dim == 1 {
            [self.coord(i), T::zero()]
        } else {
            [self.coord(i % self.n), self.coord(i / self.n)]
        }
    }

    pub fn radius(&self, i: usize) -> T {
        let [x, y] = self.point(i);
        x.hypot(y)
    }

    pub fn radii(&self) -> Vec<T> {
        (0..self.len()).map(|i| self.radius(i)).collect()
    }

    /// Samples an input at refinement level `level`.
    pub fn sample(&self, input: &InputFamily<T>, level: usize) -> Result<Vec<T>, GridError> {
        if let Some(w) = input.scale(level) {
            if self.h() > cst::<T>(0.1) * w {
                return Err(GridError::UnderResolved { h: to_f64(self.h()), scale: to_f64(w) });
            }
        }
        Ok((0..self.len()).map(|i| input.eval(self.point(i), level)).collect())
    }

    /// `(h^d Σ |v|^p w)^{1/p}`.
    pub fn norm(&self, v: &[T], p: T, weight: impl Fn(usize) -> T) -> T {
        let s: T = v
            .iter()
            .enumerate()
            .filter(|(_, x)| **x != T::zero())
            .map(|(i, x)| x.abs().powf(p) * weight(i))
            .sum();
        (s * self.cell_measure()).powf(p.recip())
    }
}

/// Nonnegative inputs `g`, possibly depending on the refinement level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputFamily<T> {
    Zero,
    /// `exp(1 - 1/(1 - |x-c|²/w²))` on the ball of radius `w` around `(c, 0)`.
    Bump { center: T, width: T },
    /// `exp(-|x-c|²/w²)`.
    Gaussian { center: T, width: T },
    /// Bump at the origin of width `width · shrink^{-level}`.
    Concentrating { width: T, shrink: T },
}

impl<T: Scalar> InputFamily<T> {
    pub fn bump(center: T, width: T) -> Self {
        InputFamily::Bump { center, width }
    }

    pub fn concentrating(width: T) -> Self {
        InputFamily::Concentrating { width, shrink: cst(4.0) }
    }

    /// Smallest length scale of the input at `level`.
    pub fn scale(&self, level: usize) -> Option<T> {
        match *self {
            InputFamily::Zero => None,
            InputFamily::Bump { width, .. } | InputFamily::Gaussian { width, .. } => Some(width),
            InputFamily::Concentrating { width, shrink } => Some(width * shrink.powi(-(level as i32))),
        }
    }

    pub fn eval(&self, x: [T; 2], level: usize) -> T {
        let bump = |c: T, w: T| {
            let s = ((x[0] - c).powi(2) + x[1].powi(2)) / (w * w);
            if s < T::one() {
                (T::one() - T::one() / (T::one() - s)).exp()
            } else {
                T::zero()
            }
        };
        match *self {
            InputFamily::Zero => T::zero(),
            InputFamily::Bump { center, width } => bump(center, width),
            InputFamily::Gaussian { center, width } => {
                (-((x[0] - center).powi(2) + x[1].powi(2)) / (width * width)).exp()
            }
            InputFamily::Concentrating { width, shrink } => bump(T::zero(), width * shrink.powi(-(level as i32))),
        }
    }
}

const GL5_X: [f64; 5] = [-0.906_179_845_938_664, -0.538_469_310_105_683, 0.0, 0.538_469_310_105_683, 0.906_179_845_938_664];
const GL5_W: [f64; 5] = [0.236_926_885_056_189, 0.478_628_670_499_366, 0.568_888_888_888_889, 0.478_628_670_499_366, 0.236_926_885_056_189];
const GL3_X: [f64; 3] = [-0.774_596_669_241_483, 0.0, 0.774_596_669_241_483];
const GL3_W: [f64; 3] = [0.555_555_555_555_556, 0.888_888_888_888_889, 0.555_555_555_555_556];

fn kernel_value<T: Scalar>(kb: &KernelBound<T>, r: T) -> Result<T, KernelError> {
    if r > kb.support_radius() {
        return Ok(T::zero());
    }
    eval_kernel_bound(kb, r)
}

/// Class of the kernel near zero, for the singular cells.
fn kernel_zero_class<T: Scalar>(kb: &KernelBound<T>, extra_power: T) -> ZeroClass<T> {
    let (a, d) = (kb.alpha(), kb.dim());
    match kb.variant {
        KernelVariant::Noncompact { .. } if a == d => ZeroClass::new(extra_power, T::one()),
        KernelVariant::EuclideanBessel { .. } if a >= d => ZeroClass::new(extra_power, T::one()),
        _ => ZeroClass::new(a - d + extra_power, T::zero()),
    }
}

fn breakpoints<T: Scalar>(kb: &KernelBound<T>) -> Vec<T> {
    match kb.variant {
        KernelVariant::Noncompact { .. } => vec![T::one()],
        KernelVariant::Compact { diameter, .. } => vec![diameter],
        KernelVariant::EuclideanBessel { .. } => vec![],
    }
}

/// `∫_a^b K(r) r^{m} dr` for `0 ≤ a < b`.
fn radial_moment<T: Scalar>(kb: &KernelBound<T>, a: T, b: T, m: T) -> Result<T, GridError> {
    let mut cuts = vec![a];
    cuts.extend(breakpoints(kb).into_iter().filter(|&c| c > a && c < b));
    cuts.push(b);
    let mut acc = T::zero();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if lo >= kb.support_radius() {
            break;
        }
        if lo > T::zero() && hi / lo < cst(1.5) {
            let (c, r) = ((lo + hi) * cst(0.5), (hi - lo) * cst(0.5));
            for k in 0..5 {
                let x = c + r * cst(GL5_X[k]);
                acc = acc + cst::<T>(GL5_W[k]) * r * kernel_value(kb, x)? * x.powf(m);
            }
        } else {
            let err = std::cell::RefCell::new(None);
            let f = Integrand::new(|x: T| match kernel_value(kb, x) {
                Ok(v) => v * x.powf(m),
                Err(e) => {
                    *err.borrow_mut() = Some(e);
                    T::nan()
                }
            })
            .with_zero_hint(kernel_zero_class(kb, m));
            let res = integrate(&f, lo, hi, cst(1e-11));
            drop(f);
            if let Some(e) = err.into_inner() {
                return Err(e.into());
            }
            acc = acc + res?.value.finite().unwrap_or(T::nan());
        }
    }
    Ok(acc)
}

/// Cell integrals `W[m] = ∫_{cell m} K(|z|) dz` for offsets
/// `m ∈ [-(n-1), n-1]^d`, stored with offset `n - 1` (row-major in `d = 2`).
pub fn kernel_weights<T: Scalar>(grid: &Grid<T>, kb: &KernelBound<T>) -> Result<Vec<T>, GridError> {
    kb.validate()?;
    let n = grid.n;
    let h = grid.h();
    let half = h * cst(0.5);
    let side = 2 * n - 1;
    if grid.dim == 1 {
        let mut w = vec![T::zero(); side];
        for m in 0..n {
            let v = if m == 0 {
                cst::<T>(2.0) * radial_moment(kb, T::zero(), half, T::zero())?
            } else {
                let c = cst::<T>(m as f64) * h;
                radial_moment(kb, c - half, c + half, T::zero())?
            };
            w[n - 1 + m] = v;
            w[n - 1 - m] = v;
        }
        return Ok(w);
    }
    // d = 2: one octant, mirrored.
    let mut w = vec![T::zero(); side * side];
    for m1 in 0..n {
        for m2 in 0..=m1 {
            let v = cell_integral_2d(kb, m1, m2, h)?;
            for (s1, s2) in [(1i64, 1i64), (1, -1), (-1, 1), (-1, -1)] {
                for (a, b) in [(m1, m2), (m2, m1)] {
                    let i = (n as i64 - 1 + s1 * a as i64) as usize;
                    let j = (n as i64 - 1 + s2 * b as i64) as usize;
                    w[j * side + i] = v;
                }
            }
        }
    }
    Ok(w)
}

fn cell_integral_2d<T: Scalar>(kb: &KernelBound<T>, m1: usize, m2: usize, h: T) -> Result<T, GridError> {
    let half = h * cst(0.5);
    if m1 == 0 && m2 == 0 {
        // 8 ∫_0^{π/4} ∫_0^{h/(2cos φ)} K(ρ) ρ dρ dφ, with the inner integral
        // split at h/2 so the singular piece is computed once.
        let inner0 = radial_moment(kb, T::zero(), half, T::one())?;
        let q = T::FRAC_PI_4() * cst(0.5);
        let mut acc = T::zero();
        for k in 0..5 {
            let phi = q + q * cst(GL5_X[k]);
            let rmax = half / phi.cos();
            let outer = if rmax > half { radial_moment(kb, half, rmax, T::one())? } else { T::zero() };
            acc = acc + cst::<T>(GL5_W[k]) * q * (inner0 + outer);
        }
        return Ok(cst::<T>(8.0) * acc);
    }
    let sub = if m1.max(m2) <= 2 { 4 } else { 1 };
    let sh = h / cst(sub as f64);
    let x0 = cst::<T>(m1 as f64) * h - half;
    let y0 = cst::<T>(m2 as f64) * h - half;
    let mut acc = T::zero();
    for a in 0..sub {
        for b in 0..sub {
            let cx = x0 + (cst::<T>(a as f64) + cst(0.5)) * sh;
            let cy = y0 + (cst::<T>(b as f64) + cst(0.5)) * sh;
            for i in 0..3 {
                for j in 0..3 {
                    let x = cx + sh * cst::<T>(0.5 * GL3_X[i]);
                    let y = cy + sh * cst::<T>(0.5 * GL3_X[j]);
                    let wgt = cst::<T>(GL3_W[i] * GL3_W[j]) * sh * sh * cst(0.25);
                    acc = acc + wgt * kernel_value(kb, x.hypot(y))?;
                }
            }
        }
    }
    Ok(acc)
}

/// `f_i = Σ_j g_j W[i - j]`.
pub fn convolve<T: Scalar>(grid: &Grid<T>, g: &[T], w: &[T]) -> Vec<T> {
    let n = grid.n;
    if grid.dim == 1 {
        let mut f = vec![T::zero(); n];
        for (j, &gj) in g.iter().enumerate() {
            if gj == T::zero() {
                continue;
            }
            let base = n - 1 - j;
            for (i, fi) in f.iter_mut().enumerate() {
                *fi = *fi + gj * w[base + i];
            }
        }
        return f;
    }
    convolve_fft_2d(n, g, w)
}

/// Convolution restricted to sources `j` with `keep(i, j)`.
pub fn convolve_masked<T: Scalar>(grid: &Grid<T>, g: &[T], w: &[T], keep: impl Fn(usize, usize) -> bool) -> Vec<T> {
    let n = grid.len();
    let side = grid.n;
    let mut f = vec![T::zero(); n];
    for (j, &gj) in g.iter().enumerate() {
        if gj == T::zero() {
            continue;
        }
        for (i, fi) in f.iter_mut().enumerate() {
            if keep(i, j) {
                let off = if grid.dim == 1 {
                    side - 1 + i - j
                } else {
                    let (ix, iy) = (i % side, i / side);
                    let (jx, jy) = (j % side, j / side);
                    (side - 1 + iy - jy) * (2 * side - 1) + (side - 1 + ix - jx)
                };
                *fi = *fi + gj * w[off];
            }
        }
    }
    f
}

fn fft2(data: &mut [Complex<f64>], m: usize, planner: &mut FftPlanner<f64>, inverse: bool) {
    let fft = if inverse { planner.plan_fft_inverse(m) } else { planner.plan_fft_forward(m) };
    for row in data.chunks_mut(m) {
        fft.process(row);
    }
    let mut col = vec![Complex::new(0.0, 0.0); m];
    for c in 0..m {
        for r in 0..m {
            col[r] = data[r * m + c];
        }
        fft.process(&mut col);
        for r in 0..m {
            data[r * m + c] = col[r];
        }
    }
}

fn convolve_fft_2d<T: Scalar>(n: usize, g: &[T], w: &[T]) -> Vec<T> {
    let m = 2 * n;
    let side = 2 * n - 1;
    let mut a = vec![Complex::new(0.0, 0.0); m * m];
    let mut b = vec![Complex::new(0.0, 0.0); m * m];
    for iy in 0..n {
        for ix in 0..n {
            a[iy * m + ix] = Complex::new(to_f64(g[iy * n + ix]), 0.0);
        }
    }
    for oy in 0..side {
        for ox in 0..side {
            let dy = (oy + m - (n - 1)) % m;
            let dx = (ox + m - (n - 1)) % m;
            b[dy * m + dx] = Complex::new(to_f64(w[oy * side + ox]), 0.0);
        }
    }
    let mut planner = FftPlanner::new();
    fft2(&mut a, m, &mut planner, false);
    fft2(&mut b, m, &mut planner, false);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= *y;
    }
    fft2(&mut a, m, &mut planner, true);
    let scale = 1.0 / (m * m) as f64;
    let mut out = Vec::with_capacity(n * n);
    for iy in 0..n {
        for ix in 0..n {
            out.push(cst::<T>((a[iy * m + ix].re * scale).max(0.0)));
        }
    }
    out
}
