//! Ratio checks on grids with `f = g ∗ G_α`, where `‖g‖_p` stands for the
//! Sobolev norm `‖f‖_{L^p_α}`.

use serde::{Deserialize, Serialize};

use super::grid::{convolve, convolve_masked, kernel_weights, Grid, GridError, InputFamily};
use super::{q_tilde, InequalityKind, InequalitySpec, RatioReport};
use crate::hardy_core::{compute_b2, BReport, Direction, HardyError, HardyOptions, HardyProblem};
use crate::kernels::KernelBound;
use crate::polar_space::PolarSpace;
use crate::weights::{log_e_plus, WeightExpr};
use crate::{cst, Scalar};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CheckError {
    #[error("checker expects {expected}, got another inequality kind")]
    WrongKind { expected: &'static str },
    #[error("grid checks need local dimension 1 or 2, got {0}")]
    Dimension(f64),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Hardy(#[from] HardyError),
}

/// Grid settings shared by the checkers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions<T> {
    /// Half side `L` of the box `[-L, L]^d`.
    pub half_width: T,
    /// Cells per axis on the coarsest level; `None` uses the dimension default.
    pub base_n: Option<usize>,
    /// Number of dyadic refinement levels.
    pub levels: usize,
}

impl<T: Scalar> Default for CheckOptions<T> {
    fn default() -> Self {
        CheckOptions { half_width: cst(8.0), base_n: None, levels: 3 }
    }
}

impl<T: Scalar> CheckOptions<T> {
    pub fn grid(&self, dim: usize) -> Result<Grid<T>, GridError> {
        Grid::new(dim, self.half_width, self.base_n.unwrap_or_else(|| Grid::<T>::default_n(dim)))
    }
}

fn grid_dim<T: Scalar>(spec: &InequalitySpec<T>) -> Result<usize, CheckError> {
    let d = spec.dim();
    if d == T::one() {
        Ok(1)
    } else if d == cst(2.0) {
        Ok(2)
    } else {
        Err(CheckError::Dimension(crate::to_f64(d)))
    }
}

/// `(h^d Σ |f_i|^q r_i^e)^{1/q}`.
fn weighted_norm<T: Scalar>(grid: &Grid<T>, f: &[T], q: T, radii: &[T], e: T) -> T {
    grid.norm(f, q, |i| radii[i].powf(e))
}

/// Runs `ratio_at` on every input and level and collects the trend.
fn run_levels<T, F>(
    spec: &InequalitySpec<T>,
    inputs: &[InputFamily<T>],
    kernel: &KernelBound<T>,
    opts: &CheckOptions<T>,
    mut ratio_at: F,
) -> Result<RatioReport<T>, CheckError>
where
    T: Scalar,
    F: FnMut(&Grid<T>, &[T], &[T]) -> T,
{
    let base = opts.grid(grid_dim(spec)?)?;
    let mut trend = Vec::with_capacity(opts.levels);
    let mut last = Vec::new();
    for level in 0..opts.levels.max(1) {
        let grid = base.refined(level);
        let w = kernel_weights(&grid, kernel)?;
        let radii = grid.radii();
        let mut ratios = Vec::with_capacity(inputs.len());
        for input in inputs {
            let g = grid.sample(input, level)?;
            let f = convolve(&grid, &g, &w);
            let _ = &radii;
            ratios.push(ratio_at(&grid, &g, &f));
        }
        trend.push(ratios.iter().copied().fold(T::zero(), T::max));
        last = ratios;
    }
    Ok(RatioReport::from_trend(last, trend))
}

fn safe_ratio<T: Scalar>(num: T, den: T) -> T {
    if den == T::zero() {
        T::zero()
    } else {
        num / den
    }
}

fn hs_exponents<T: Scalar>(kind: &InequalityKind<T>) -> Option<(T, T, T, T)> {
    match *kind {
        InequalityKind::HardySobolev { p, q, alpha, beta } => Some((p, q, alpha, beta)),
        InequalityKind::Hardy { p, alpha } => Some((p, p, alpha, alpha * p)),
        _ => None,
    }
}

/// `‖f/|x|^{β/q}‖_q / ‖g‖_p` with `f = g ∗ G_α`. The kernel family is taken
/// from `kernel` with its order set to the inequality's `α`.
pub fn check_hardy_sobolev<T: Scalar>(
    spec: &InequalitySpec<T>,
    inputs: &[InputFamily<T>],
    kernel: &KernelBound<T>,
    opts: &CheckOptions<T>,
) -> Result<RatioReport<T>, CheckError> {
    let (p, q, alpha, beta) = hs_exponents(&spec.kind).ok_or(CheckError::WrongKind { expected: "hardy_sobolev" })?;
    let kb = kernel.with_alpha(alpha);
    run_levels(spec, inputs, &kb, opts, |grid, g, f| {
        let radii = grid.radii();
        safe_ratio(weighted_norm(grid, f, q, &radii, -beta), grid.norm(g, p, |_| T::one()))
    })
}

/// Region-restricted contributions of the convolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionShares<T> {
    /// `Σ |f|^q |x|^{-β} h^d`.
    pub lhs: T,
    /// `M_k = Σ |f_k|^q |x|^{-β} h^d` for `{2|y| < |x|}`, `{|x| ≤ 2|y| < 4|x|}`, `{|y| > 2|x|}`.
    pub m: [T; 3],
    pub shares: [T; 3],
    /// `lhs ≤ 3^q (M_1 + M_2 + M_3)`.
    pub bound_holds: bool,
}

/// Splits the convolution by the relative size of `|x|` and `|y|`.
pub fn region_decomposition<T: Scalar>(
    spec: &InequalitySpec<T>,
    input: &InputFamily<T>,
    kernel: &KernelBound<T>,
    grid: &Grid<T>,
    level: usize,
) -> Result<RegionShares<T>, CheckError> {
    let (_, q, alpha, beta) = hs_exponents(&spec.kind).ok_or(CheckError::WrongKind { expected: "hardy_sobolev" })?;
    let kb = kernel.with_alpha(alpha);
    let w = kernel_weights(grid, &kb)?;
    let g = grid.sample(input, level)?;
    let radii = grid.radii();
    let two = cst::<T>(2.0);
    let four = cst::<T>(4.0);
    let f = convolve_masked(grid, &g, &w, |_, _| true);
    let parts = [
        convolve_masked(grid, &g, &w, |i, j| two * radii[j] < radii[i]),
        convolve_masked(grid, &g, &w, |i, j| radii[i] <= two * radii[j] && two * radii[j] < four * radii[i]),
        convolve_masked(grid, &g, &w, |i, j| two * radii[j] >= four * radii[i]),
    ];
    let mass = |v: &[T]| weighted_norm(grid, v, q, &radii, -beta).powf(q);
    let lhs = mass(&f);
    let m = [mass(&parts[0]), mass(&parts[1]), mass(&parts[2])];
    let total = m[0] + m[1] + m[2];
    let shares = if total > T::zero() { [m[0] / total, m[1] / total, m[2] / total] } else { [T::zero(); 3] };
    Ok(RegionShares { lhs, m, shares, bound_holds: lhs <= cst::<T>(3.0).powf(q) * total })
}

/// `‖f / (log(e+1/|x|)^{r/q} |x|^{d/q})‖_q / ‖g‖_p` with the critical kernel `α = d/p`.
pub fn check_critical_hardy<T: Scalar>(
    spec: &InequalitySpec<T>,
    inputs: &[InputFamily<T>],
    kernel: &KernelBound<T>,
    opts: &CheckOptions<T>,
) -> Result<RatioReport<T>, CheckError> {
    let InequalityKind::CriticalHardy { p, q, r } = spec.kind else {
        return Err(CheckError::WrongKind { expected: "critical_hardy" });
    };
    let d = spec.dim();
    let kb = kernel.with_alpha(d / p);
    run_levels(spec, inputs, &kb, opts, |grid, g, f| {
        let radii = grid.radii();
        let lhs = grid.norm(f, q, |i| log_e_plus(radii[i]).powf(-r) * radii[i].powf(-d));
        safe_ratio(lhs, grid.norm(g, p, |_| T::one()))
    })
}

/// Both sides of a Hölder step and whether it holds up to rounding.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderReport<T> {
    pub lhs: T,
    pub rhs: T,
    pub pass: bool,
}

/// Relative rounding allowance for sums of `n` terms.
fn rounding_allowance<T: Scalar>(n: usize) -> T {
    cst::<T>(n as f64 + 16.0) * T::epsilon()
}

/// `(measure Σ t_i^p)^{1/p}` for `t_i ≥ 0`, scaled by the largest term so large `p` cannot overflow.
fn scaled_norm<T: Scalar>(terms: impl Iterator<Item = T> + Clone, p: T, measure: T) -> T {
    let m = terms.clone().fold(T::zero(), T::max);
    if m == T::zero() || !m.is_finite() {
        return m;
    }
    let s: T = terms.map(|t| (t / m).powf(p)).sum();
    m * (s * measure).powf(p.recip())
}

/// `‖|x|^a f‖_r ≤ ‖f/|x|^c‖_{q̃}^θ ‖|x|^b f‖_q^{1-θ}` with `c = (b(1-θ)-a)/θ`.
#[allow(clippy::too_many_arguments)]
pub fn holder_ckn<T: Scalar>(f: &[T], radii: &[T], measure: T, q: T, r: T, theta: T, a: T, b: T) -> HolderReport<T> {
    let norm = |p: T, e: T| scaled_norm(f.iter().zip(radii).map(|(v, x)| v.abs() * x.powf(e)), p, measure);
    let lhs = norm(r, a);
    let c = (b * (T::one() - theta) - a) / theta;
    let first = norm(q_tilde(q, r, theta), -c).powf(theta);
    let second = if theta == T::one() { T::one() } else { norm(q, b).powf(T::one() - theta) };
    let rhs = first * second;
    HolderReport { lhs, rhs, pass: lhs <= rhs * (T::one() + rounding_allowance::<T>(f.len())) }
}

/// `‖f/w‖_q ‖w f‖_{q'} ≥ ‖f‖_2^2`.
pub fn holder_uncertainty<T: Scalar>(f: &[T], w: &[T], measure: T, q: T) -> HolderReport<T> {
    let qc = q / (q - T::one());
    let norm = |p: T, e: T| scaled_norm(f.iter().zip(w).map(|(v, x)| v.abs() * x.powf(e)), p, measure);
    let lhs = norm(q, -T::one()) * norm(qc, T::one());
    let rhs = f.iter().map(|v| *v * *v).sum::<T>() * measure;
    HolderReport { lhs, rhs, pass: lhs >= rhs * (T::one() - rounding_allowance::<T>(f.len())) }
}

/// CKN ratio and the Hölder step of its proof at every level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CknReport<T> {
    pub ratio: RatioReport<T>,
    pub holder: Vec<HolderReport<T>>,
}

/// `‖|x|^a f‖_r / (‖g‖_p^θ ‖|x|^b f‖_q^{1-θ})`, plus the Hölder step.
pub fn check_ckn<T: Scalar>(
    spec: &InequalitySpec<T>,
    inputs: &[InputFamily<T>],
    kernel: &KernelBound<T>,
    opts: &CheckOptions<T>,
) -> Result<CknReport<T>, CheckError> {
    let (p, q, r, theta, a, b, alpha) = match spec.kind {
        InequalityKind::Ckn { p, q, r, theta, a, b, alpha } => (p, q, r, theta, a, b, alpha),
        InequalityKind::Gn { p, q, r, theta, alpha } => (p, q, r, theta, T::zero(), T::zero(), alpha),
        _ => return Err(CheckError::WrongKind { expected: "ckn" }),
    };
    let kb = kernel.with_alpha(alpha);
    let mut holder = Vec::new();
    let ratio = run_levels(spec, inputs, &kb, opts, |grid, g, f| {
        let radii = grid.radii();
        holder.push(holder_ckn(f, &radii, grid.cell_measure(), q, r, theta, a, b));
        let lhs = weighted_norm(grid, f, r, &radii, a * r);
        let rhs1 = grid.norm(g, p, |_| T::one());
        let rhs2 = if theta == T::one() { T::one() } else { weighted_norm(grid, f, q, &radii, b * q) };
        safe_ratio(lhs, rhs1.powf(theta) * rhs2.powf(T::one() - theta))
    })?;
    Ok(CknReport { ratio, holder })
}

/// `|∫∫ f(x) g(y) G_{a2}(x-y) |x|^{-a1} |y|^{-β}| / (‖f_density‖_p ‖g_density‖_q)`
/// with `f = f_density ∗ G_α` and `g = g_density ∗ G_β` (`d = 1`).
pub fn check_hls<T: Scalar>(
    spec: &InequalitySpec<T>,
    f_density: &InputFamily<T>,
    g_density: &InputFamily<T>,
    kernel: &KernelBound<T>,
    opts: &CheckOptions<T>,
) -> Result<RatioReport<T>, CheckError> {
    let InequalityKind::Hls { p, q, alpha, beta, a1, a2 } = spec.kind else {
        return Err(CheckError::WrongKind { expected: "hls" });
    };
    if grid_dim(spec)? != 1 {
        return Err(CheckError::Dimension(crate::to_f64(spec.dim())));
    }
    let base = opts.grid(1)?;
    let mut trend = Vec::new();
    for level in 0..opts.levels.max(1) {
        let grid = base.refined(level);
        let radii = grid.radii();
        let fd = grid.sample(f_density, level)?;
        let gd = grid.sample(g_density, level)?;
        let smooth = |v: Vec<T>, order: T| -> Result<Vec<T>, CheckError> {
            if order == T::zero() {
                return Ok(v);
            }
            let w = kernel_weights(&grid, &kernel.with_alpha(order))?;
            Ok(convolve(&grid, &v, &w))
        };
        let f = smooth(fd.clone(), alpha)?;
        let g = smooth(gd.clone(), beta)?;
        let gw: Vec<T> = g.iter().zip(&radii).map(|(v, x)| *v * x.powf(-beta)).collect();
        let inner = convolve(&grid, &gw, &kernel_weights(&grid, &kernel.with_alpha(a2))?);
        let form: T = f.iter().zip(&inner).zip(&radii).map(|((a, b), x)| *a * *b * x.powf(-a1)).sum::<T>() * grid.h();
        let den = grid.norm(&fd, p, |_| T::one()) * grid.norm(&gd, q, |_| T::one());
        trend.push(safe_ratio(form.abs(), den));
    }
    let last = vec![*trend.last().unwrap_or(&T::zero())];
    Ok(RatioReport::from_trend(last, trend))
}

/// Both sides of the uncertainty inequality with `f = g ∗ G_α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyReport<T> {
    /// `‖g‖_p · ‖w f‖_{q'}`
    pub lhs: T,
    /// `‖f‖_2^2`
    pub rhs: T,
    /// Measured embedding constant `‖f/w‖_q / ‖g‖_p` on this run.
    pub kappa: T,
    pub holder: HolderReport<T>,
    /// `lhs ≥ rhs / kappa`, i.e. the Hölder step.
    pub pass: bool,
}

pub fn check_uncertainty<T: Scalar>(
    spec: &InequalitySpec<T>,
    input: &InputFamily<T>,
    kernel: &KernelBound<T>,
    grid: &Grid<T>,
) -> Result<UncertaintyReport<T>, CheckError> {
    let d = spec.dim();
    let (p, q, alpha, weight): (T, T, T, Box<dyn Fn(T) -> T>) = match spec.kind {
        InequalityKind::Uncertainty { p, q, alpha, beta } => (p, q, alpha, Box::new(move |x: T| x.powf(beta / q))),
        InequalityKind::UncertaintyCritical { p, q, r } => (
            p,
            q,
            d / p,
            Box::new(move |x: T| log_e_plus(x).powf(r / q) * x.powf(d / q)),
        ),
        _ => return Err(CheckError::WrongKind { expected: "uncertainty" }),
    };
    let w = kernel_weights(grid, &kernel.with_alpha(alpha))?;
    let g = grid.sample(input, 0)?;
    let f = convolve(grid, &g, &w);
    let wt: Vec<T> = grid.radii().into_iter().map(weight).collect();
    let m = grid.cell_measure();
    let qc = q / (q - T::one());
    let gnorm = grid.norm(&g, p, |_| T::one());
    let wf = grid.norm(&f, qc, |i| wt[i].powf(qc));
    let fw = grid.norm(&f, q, |i| wt[i].powf(-q));
    let holder = holder_uncertainty(&f, &wt, m, q);
    Ok(UncertaintyReport {
        lhs: gnorm * wf,
        rhs: f.iter().map(|v| *v * *v).sum::<T>() * m,
        kappa: safe_ratio(fw, gnorm),
        holder,
        pass: holder.pass,
    })
}

/// Radial Hardy problem behind the critical Hardy inequality on `R^d`:
/// `Φ = ω_r^{-1} = log(e+1/r)^{-r} r^{-d}` and `ψ` with
/// `ψ^{1-p'} = A_{d/p}^{p'} = r^{-d} e^{-c' p' r}` (outer direction).
pub fn critical_hardy_problem<T: Scalar>(p: T, q: T, r: T, d: T, c_prime: T) -> HardyProblem<T> {
    let pc = p / (p - T::one());
    let phi = WeightExpr::new(-d, -r, T::zero(), T::one());
    let dual = WeightExpr::new(-d, T::zero(), -c_prime * pc, T::one());
    let psi = dual.power_transform((T::one() - pc).recip());
    HardyProblem::new(PolarSpace::euclidean(d), p, q, Direction::Outer, phi, psi)
}

/// B2 of [`critical_hardy_problem`] for a critical Hardy spec.
pub fn critical_hardy_b2<T: Scalar>(
    spec: &InequalitySpec<T>,
    c_prime: T,
    opts: &HardyOptions<T>,
) -> Result<BReport<T>, CheckError> {
    let InequalityKind::CriticalHardy { p, q, r } = spec.kind else {
        return Err(CheckError::WrongKind { expected: "critical_hardy" });
    };
    let mut pb = critical_hardy_problem(p, q, r, spec.dim(), c_prime);
    pb.space = spec.space.clone();
    Ok(compute_b2(&pb, opts)?)
}
