//! Discrete calculus on box truncations of `ℤ^d` (`d ≥ 2`), the weighted
//! power-type Hardy weights with their asymptotic expansions, and the
//! logarithmic (Leray-type) weight on `ℤ²`.
//!
//! Convention at the origin: test functions vanish there, and the weight
//! and energy extend the profile functions by `0` at the origin. Both sides
//! of the inequality pick up identical contributions from edges incident to
//! the origin, so the margin still equals the nonnegative square functional.

use crate::sum::{Dd, KahanSum};
use rand::Rng as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LatticeError {
    #[error("dimension must be at least 2, got {d}")]
    DimensionTooSmall { d: usize },
    #[error("box radius must be at least {min}, got {r}")]
    RadiusTooSmall { r: i64, min: i64 },
    #[error("power must exceed 2 - d = {limit}, got {alpha}")]
    PowerOutOfRange { alpha: f64, limit: f64 },
    #[error("point has wrong dimension: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("weight undefined at the origin")]
    OriginQuery,
    #[error("|x| = {norm} too small for this evaluation (need ≥ {min})")]
    TooCloseToOrigin { norm: f64, min: f64 },
    #[error("expansion order must be 1 or 2, got {order}")]
    BadOrder { order: u32 },
}

/// `ℓ^∞` box `[-R, R]^d` with the origin excluded from the test space.
#[derive(Debug, Clone)]
pub struct BoxDomain {
    pub d: usize,
    pub r: i64,
}

impl BoxDomain {
    pub fn new(d: usize, r: i64) -> Result<Self, LatticeError> {
        if d < 2 {
            return Err(LatticeError::DimensionTooSmall { d });
        }
        if r < 2 {
            return Err(LatticeError::RadiusTooSmall { r, min: 2 });
        }
        Ok(Self { d, r })
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.d && x.iter().all(|&c| c.abs() <= self.r)
    }

    /// Interior points (collar width 1) excluding the origin: admissible
    /// support for test functions.
    pub fn interior(&self) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        let mut coords = vec![-(self.r - 1); self.d];
        loop {
            if coords.iter().any(|&c| c != 0) {
                out.push(coords.clone());
            }
            let mut i = 0;
            loop {
                coords[i] += 1;
                if coords[i] <= self.r - 1 {
                    break;
                }
                coords[i] = -(self.r - 1);
                i += 1;
                if i == self.d {
                    return out;
                }
            }
        }
    }

    pub fn neighbors(&self, x: &[i64]) -> Vec<Vec<i64>> {
        let mut out = Vec::with_capacity(2 * self.d);
        for i in 0..self.d {
            for s in [-1i64, 1] {
                let mut y = x.to_vec();
                y[i] += s;
                out.push(y);
            }
        }
        out
    }
}

/// Finitely supported function on lattice points.
#[derive(Debug, Clone, Default)]
pub struct LatticeFunction {
    map: BTreeMap<Vec<i64>, f64>,
}

impl LatticeFunction {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn get(&self, x: &[i64]) -> f64 {
        self.map.get(x).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, x: Vec<i64>, v: f64) {
        if v == 0.0 {
            self.map.remove(&x);
        } else {
            self.map.insert(x, v);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<i64>, f64)> + '_ {
        self.map.iter().map(|(k, &v)| (k, v))
    }

    pub fn support(&self) -> impl Iterator<Item = &Vec<i64>> + '_ {
        self.map.keys()
    }
}

fn square_norm(x: &[i64]) -> i64 {
    x.iter().map(|&c| c * c).sum()
}

/// Euclidean norm from exact integer squares.
pub fn euclid_norm(x: &[i64]) -> f64 {
    (square_norm(x) as f64).sqrt()
}

/// `Σ_{i,±} (u(x) − u(x ± e_i))`, the lattice Laplacian with unit edge
/// weights.
pub fn zd_laplacian(u: &LatticeFunction, x: &[i64]) -> f64 {
    let mut acc = KahanSum::new();
    let ux = u.get(x);
    let mut y = x.to_vec();
    for i in 0..x.len() {
        for s in [-1i64, 1] {
            y[i] = x[i] + s;
            acc.add(ux - u.get(&y));
        }
        y[i] = x[i];
    }
    acc.value()
}

/// `|x|^p` in double-double from the exact integer square norm; `0` at the
/// origin (extension convention).
fn dd_power_norm(x: &[i64], half_p: Dd) -> Dd {
    let s = square_norm(x);
    if s == 0 {
        return Dd::ZERO;
    }
    Dd::from_f64(s as f64).powf(half_p)
}

/// Exact weighted Hardy weight on `ℤ^d \ {0}`: with `V = |x|^α` and
/// `f = |x|^{2γ}`, `γ = (2−d−α)/4`, returns
/// `[V·Δf − ⟨∇f, ∇V⟩](x) / f(x)`, the weight produced by the ground-state
/// substitution. Evaluated in double-double end to end.
pub fn zd_weight_exact(alpha: f64, d: usize, x: &[i64]) -> Result<f64, LatticeError> {
    if d < 2 {
        return Err(LatticeError::DimensionTooSmall { d });
    }
    if x.len() != d {
        return Err(LatticeError::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    let limit = 2.0 - d as f64;
    if alpha <= limit {
        return Err(LatticeError::PowerOutOfRange { alpha, limit });
    }
    if square_norm(x) == 0 {
        return Err(LatticeError::OriginQuery);
    }
    // γ = (2 − d − α)/4; f = |x|^{2γ} = (|x|²)^γ; V = (|x|²)^{α/2}.
    let gamma = Dd::from_f64(2.0 - d as f64)
        .sub(Dd::from_f64(alpha))
        .div(Dd::from_f64(4.0));
    let half_alpha = Dd::from_f64(alpha).div(Dd::from_f64(2.0));
    let fx = dd_power_norm(x, gamma);
    let vx = dd_power_norm(x, half_alpha);
    let mut laplace_f = Dd::ZERO;
    let mut pairing = Dd::ZERO;
    let mut y = x.to_vec();
    for i in 0..d {
        for s in [-1i64, 1] {
            y[i] = x[i] + s;
            let fy = dd_power_norm(&y, gamma);
            let vy = dd_power_norm(&y, half_alpha);
            let df = fx.sub(fy);
            laplace_f = laplace_f.add(df);
            pairing = pairing.add(df.mul(vx.sub(vy)));
        }
        y[i] = x[i];
    }
    let t = vx.mul(laplace_f).sub(pairing.mul(Dd::from_f64(0.5)));
    Ok(t.div(fx).to_f64())
}

/// Truncated large-`|x|` expansion of [`zd_weight_exact`]:
///
/// order 1: `((d−2+α)²/4)·|x|^{α−2}`;
/// order 2: adds `(d−2+α)(3d+6+2α²−5α)/8·|x|^{α−4}` and the anisotropic
/// term `−C·Σx_i⁴/|x|^{8−α}`, leaving a remainder `O(|x|^{α−6})`.
pub fn zd_weight_asymptotic(
    alpha: f64,
    d: usize,
    x: &[i64],
    order: u32,
) -> Result<f64, LatticeError> {
    if d < 2 {
        return Err(LatticeError::DimensionTooSmall { d });
    }
    if x.len() != d {
        return Err(LatticeError::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    let limit = 2.0 - d as f64;
    if alpha <= limit {
        return Err(LatticeError::PowerOutOfRange { alpha, limit });
    }
    if !(1..=2).contains(&order) {
        return Err(LatticeError::BadOrder { order });
    }
    let norm = euclid_norm(x);
    if norm < 5.0 {
        return Err(LatticeError::TooCloseToOrigin { norm, min: 5.0 });
    }
    let a = d as f64 - 2.0 + alpha;
    let mut w = 0.25 * a * a * norm.powf(alpha - 2.0);
    if order == 2 {
        let iso = a * (3.0 * d as f64 + 6.0 + 2.0 * alpha * alpha - 5.0 * alpha) / 8.0;
        w += iso * norm.powf(alpha - 4.0);
        let quartic: f64 = x.iter().map(|&c| (c as f64).powi(4)).sum();
        w -= aniso_coefficient(alpha, d) * quartic * norm.powf(alpha - 8.0);
    }
    Ok(w)
}

/// Coefficient of the anisotropic `Σx_i⁴/|x|^{8−α}` term, from the fourth
/// Taylor order of the two profile functions `|x|^{2γ}` and `|x|^{(2γ+α)/…}`
/// products in the stencil expansion.
fn aniso_coefficient(alpha: f64, d: usize) -> f64 {
    let g = (2.0 - d as f64 - alpha) / 4.0;
    let k = alpha * g / 48.0
        * ((alpha - 2.0) * (alpha - 4.0)
            + 3.0 * (alpha - 2.0) * (g - 1.0)
            + 4.0 * (g - 1.0) * (g - 2.0));
    4.0 * g * (g - 1.0) * (g - 2.0) * (g - 3.0) / 3.0 + 16.0 * k
}

/// Both sides of the weighted inequality for one explicit test function:
/// `lhs = Σ_{x≠0} |x|^α |∇u|²(x)` and `rhs = Σ w(x) u(x)²`.
pub fn zd_margin(
    alpha: f64,
    domain: &BoxDomain,
    u: &LatticeFunction,
) -> Result<(f64, f64), LatticeError> {
    let d = domain.d;
    // Gradient sum over every point adjacent to the support, origin skipped.
    let mut touched: std::collections::BTreeSet<Vec<i64>> = std::collections::BTreeSet::new();
    for x in u.support() {
        touched.insert(x.clone());
        for y in domain.neighbors(x) {
            touched.insert(y);
        }
    }
    let mut lhs = KahanSum::new();
    let mut rhs = KahanSum::new();
    for x in &touched {
        if square_norm(x) == 0 {
            continue;
        }
        let v = euclid_norm(x).powf(alpha);
        let ux = u.get(x);
        let mut grad2 = KahanSum::new();
        for y in domain.neighbors(x) {
            let diff = ux - u.get(&y);
            grad2.add(diff * diff);
        }
        lhs.add(0.5 * v * grad2.value());
        if ux != 0.0 {
            rhs.add(zd_weight_exact(alpha, d, x)? * ux * ux);
        }
    }
    Ok((lhs.value(), rhs.value()))
}

/// Report of a randomized inequality check.
#[derive(Debug, Clone)]
pub struct ZdReport {
    pub d: usize,
    pub alpha: f64,
    pub r: i64,
    pub trials: u64,
    /// Smallest `(lhs − rhs)/(|lhs| + |rhs| + 1)` over the trials.
    pub min_margin: f64,
    pub min_margin_trial: u64,
}

/// Flat index helper over `[-R, R]^d`.
struct FlatBox {
    d: usize,
    r: i64,
    side: i64,
}

impl FlatBox {
    fn new(d: usize, r: i64) -> Self {
        Self {
            d,
            r,
            side: 2 * r + 1,
        }
    }

    fn len(&self) -> usize {
        (self.side as usize).pow(self.d as u32)
    }

    fn coords(&self, mut idx: usize, out: &mut [i64]) {
        for c in out.iter_mut().take(self.d) {
            *c = (idx as i64 % self.side) - self.r;
            idx /= self.side as usize;
        }
    }

    #[cfg(test)]
    fn index(&self, x: &[i64]) -> usize {
        let mut idx = 0usize;
        for i in (0..self.d).rev() {
            idx = idx * self.side as usize + (x[i] + self.r) as usize;
        }
        idx
    }
}

/// Randomized verification that the weighted energy dominates the
/// exact-weight mass: for each trial, a dense random `u` on the interior
/// (origin forced to zero), both sides evaluated, and the normalized margin
/// recorded. The margin equals a sum of squares, so it must be nonnegative
/// up to roundoff.
pub fn zd_inequality_check(
    alpha: f64,
    d: usize,
    r: i64,
    trials: u64,
    seed: u64,
) -> Result<ZdReport, LatticeError> {
    let domain = BoxDomain::new(d, r)?;
    if r < 5 {
        return Err(LatticeError::RadiusTooSmall { r, min: 5 });
    }
    let flat = FlatBox::new(d, r);
    let total = flat.len();
    // Precompute V on the full box and the weight on the interior.
    let mut v_table = vec![0.0f64; total];
    let mut w_table = vec![0.0f64; total];
    let mut interior_idx = Vec::new();
    let mut coords = vec![0i64; d];
    for idx in 0..total {
        flat.coords(idx, &mut coords);
        let s = square_norm(&coords);
        if s == 0 {
            continue;
        }
        v_table[idx] = (s as f64).sqrt().powf(alpha);
        if coords.iter().all(|&c| c.abs() <= r - 1) {
            w_table[idx] = zd_weight_exact(alpha, d, &coords)?;
            interior_idx.push(idx);
        }
    }
    let strides: Vec<usize> = (0..d).map(|i| (flat.side as usize).pow(i as u32)).collect();
    let margins: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial));
            let mut u = vec![0.0f64; total];
            for &idx in &interior_idx {
                u[idx] = rng.gen_range(-1.0..1.0);
            }
            let mut coords = vec![0i64; d];
            let mut lhs = KahanSum::new();
            let mut rhs = KahanSum::new();
            for idx in 0..total {
                if v_table[idx] == 0.0 && w_table[idx] == 0.0 {
                    continue;
                }
                flat.coords(idx, &mut coords);
                let ux = u[idx];
                let mut grad2 = 0.0f64;
                for i in 0..d {
                    for s in [-1i64, 1] {
                        let c = coords[i] + s;
                        let uy = if c.abs() > r {
                            0.0
                        } else {
                            u[(idx as i64 + s * strides[i] as i64) as usize]
                        };
                        let diff = ux - uy;
                        grad2 += diff * diff;
                    }
                }
                lhs.add(0.5 * v_table[idx] * grad2);
                if ux != 0.0 {
                    rhs.add(w_table[idx] * ux * ux);
                }
            }
            let (l, r) = (lhs.value(), rhs.value());
            (l - r) / (l.abs() + r.abs() + 1.0)
        })
        .collect();
    let (min_margin_trial, min_margin) = margins
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, &m)| (i as u64, m))
        .unwrap_or((0, 0.0));
    let _ = domain;
    Ok(ZdReport {
        d,
        alpha,
        r,
        trials,
        min_margin,
        min_margin_trial,
    })
}

/// Logarithmic weight on `ℤ²`: `Δf(x)/f(x)` with `f = √(ln|x|)`, defined
/// for `|x| ≥ 2` (neighbors then satisfy `|y| ≥ 1`, where `f ≥ 0`).
/// Behaves like `1/(4|x|²(ln|x|)²)` at infinity.
///
/// Note: the anisotropic second-order correction carries a
/// `1/(|x|⁴ ln|x|)` scaling; a variant without that factor would be
/// dimensionally inconsistent and is not used here.
pub fn leray_z2_weight(x: &[i64]) -> Result<f64, LatticeError> {
    if x.len() != 2 {
        return Err(LatticeError::DimensionMismatch {
            expected: 2,
            got: x.len(),
        });
    }
    let norm = euclid_norm(x);
    if norm < 2.0 {
        return Err(LatticeError::TooCloseToOrigin { norm, min: 2.0 });
    }
    let f_at = |p: &[i64]| -> Dd {
        let s = square_norm(p);
        // f = √(ln|p|) = √(ln(p²)/2); ln ≥ 0 for |p| ≥ 1.
        Dd::from_f64(s as f64)
            .ln()
            .div(Dd::from_f64(2.0))
            .sqrt()
    };
    let fx = f_at(x);
    let mut laplace = Dd::ZERO;
    let mut y = x.to_vec();
    for i in 0..2 {
        for s in [-1i64, 1] {
            y[i] = x[i] + s;
            laplace = laplace.add(fx.sub(f_at(&y)));
        }
        y[i] = x[i];
    }
    Ok(laplace.div(fx).to_f64())
}

/// Certified lower envelope for [`leray_z2_weight`]:
/// `1/(4|x|²(ln|x|)²) − 12/(|x|⁴ ln|x|) − c/(|x|⁴ (ln|x|)²)`.
pub fn leray_z2_lower_bound(x: &[i64], c: f64) -> f64 {
    let n2 = square_norm(x) as f64;
    let ln = n2.sqrt().ln();
    0.25 / (n2 * ln * ln) - 12.0 / (n2 * n2 * ln) - c / (n2 * n2 * ln * ln)
}

/// Fitted constant for the last term of [`leray_z2_lower_bound`],
/// validated over the grid `2 ≤ |x| ≤ 300` in the tests.
pub const LERAY_Z2_BOUND_C: f64 = 2.0;
