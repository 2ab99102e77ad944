//! Sharpness probes for the order-`ℓ` inequalities: finite-section
//! generalized eigenvalue estimates of the best constant, a continuum-limit
//! sampler, the explicit counterexample family for the unshifted Rellich
//! weight, and the order-raising chain of inequalities.

use crate::seq::{BoundaryOrder, FiniteSequence};
use crate::sum::{Dd, KahanSum};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SharpnessError {
    #[error("truncation N = {n} too small for order {ell} (need N ≥ ℓ + 2)")]
    TruncationTooSmall { n: usize, ell: u32 },
    #[error("factorization breakdown persisted after {retries} shift retries")]
    FactorizationBreakdown { retries: u32 },
    #[error("no convergence after {max_iter} iterations")]
    NoConvergence { max_iter: usize },
    #[error("sequence must vanish at 0..={through} (u_{at} = {value})")]
    BoundaryViolation { through: i64, at: i64, value: f64 },
    #[error("continuum probe needs M ≥ 32, got {m}")]
    ProbeTooCoarse { m: u64 },
}

/// `[(2ℓ)!/(4^ℓ ℓ!)]²`, the sharp constant of the order-`ℓ` inequality.
/// Exact integer intermediates (the odd double factorial) up to `ℓ = 12`,
/// double-double beyond.
pub fn sharp_constant(ell: u32) -> f64 {
    assert!(ell >= 1);
    // (2ℓ)!/(4^ℓ ℓ!) = (2ℓ−1)!!/2^ℓ.
    if ell <= 12 {
        let mut dfac: u128 = 1;
        for k in 0..ell {
            dfac *= (2 * k + 1) as u128;
        }
        let half = dfac as f64 / 2f64.powi(ell as i32);
        half * half
    } else {
        let mut dfac = Dd::ONE;
        for k in 0..ell {
            dfac = dfac.mul_f64((2 * k + 1) as f64);
        }
        let half = dfac.div(Dd::from_f64(2.0).powi(ell as i32));
        half.mul(half).to_f64()
    }
}

/// Symmetric banded pencil `(A, B)`: `A = SᵀS` encodes
/// `Σ_{n≥ℓ−1} |Δ^{ℓ/2}u_n|²` over the unknowns `u_ℓ..u_N` (Dirichlet
/// elimination outside), `B = diag(n^{−2ℓ})`.
#[derive(Debug, Clone)]
pub struct BandedForm {
    pub n: usize,
    pub ell: u32,
    /// Unknown count `N − ℓ + 1`; column `j` is `u_{ℓ+j}`.
    pub dim: usize,
    /// Lower bands of `A`: `a_bands[d][j] = A[j+d][j]`, `d = 0..=ell`.
    a_bands: Vec<Vec<f64>>,
    /// Rows of the stencil operator `S` as `(first_col, coefficients)`.
    s_rows: Vec<(usize, Vec<f64>)>,
    pub b_diag: Vec<f64>,
}

impl BandedForm {
    pub fn halfwidth(&self) -> usize {
        self.ell as usize
    }

    /// `uᵀAu` evaluated stably as `Σ (Su)²`.
    pub fn quadratic_form(&self, u: &[f64]) -> f64 {
        let mut acc = KahanSum::new();
        for (start, coeffs) in &self.s_rows {
            let mut row = KahanSum::new();
            for (k, &c) in coeffs.iter().enumerate() {
                row.add(c * u[start + k]);
            }
            let r = row.value();
            acc.add(r * r);
        }
        acc.value()
    }

    /// `y = A u` through the band storage.
    pub fn a_matvec(&self, u: &[f64], y: &mut [f64]) {
        let hw = self.halfwidth();
        for i in 0..self.dim {
            let mut acc = KahanSum::new();
            let lo = i.saturating_sub(hw);
            for j in lo..=i {
                acc.add(self.a_bands[i - j][j] * u[j]);
            }
            for j in i + 1..(i + hw + 1).min(self.dim) {
                acc.add(self.a_bands[j - i][i] * u[j]);
            }
            y[i] = acc.value();
        }
    }
}

/// Stencil taps of `Δ^{ℓ/2}` obtained from the sequence calculus itself:
/// `(offset, coefficient)` pairs with `L u_n = Σ c_k u_{n+k}`.
fn stencil_taps(ell: u32) -> Vec<(i64, f64)> {
    let delta = FiniteSequence::delta(0);
    let applied = delta.half_laplace_power(BoundaryOrder::new(ell).unwrap());
    // (L δ₀)_n = c_{−n}.
    applied.iter().map(|(n, v)| (-n, v)).collect()
}

/// Assembles the finite-section pencil for order `ell` and truncation `N`.
pub fn assemble_form(ell: u32, n: usize) -> Result<BandedForm, SharpnessError> {
    assert!(ell >= 1);
    if n < ell as usize + 1 {
        return Err(SharpnessError::TruncationTooSmall { n, ell });
    }
    let dim = n - ell as usize + 1;
    let taps = stencil_taps(ell);
    let reach_left = -taps.iter().map(|&(k, _)| k).min().unwrap();
    let reach_right = taps.iter().map(|&(k, _)| k).max().unwrap();
    let mut s_rows = Vec::new();
    // Rows n ≥ ℓ−1 whose taps intersect the unknowns u_ℓ..u_N.
    let row_lo = ell as i64 - 1;
    let row_hi = n as i64 + reach_left;
    for row in row_lo..=row_hi {
        let col_lo = (row - reach_left).max(ell as i64);
        let col_hi = (row + reach_right).min(n as i64);
        if col_lo > col_hi {
            continue;
        }
        let mut coeffs = vec![0.0; (col_hi - col_lo + 1) as usize];
        for &(k, c) in &taps {
            let col = row + k;
            if col >= col_lo && col <= col_hi {
                coeffs[(col - col_lo) as usize] = c;
            }
        }
        if coeffs.iter().any(|&c| c != 0.0) {
            s_rows.push(((col_lo - ell as i64) as usize, coeffs));
        }
    }
    let hw = ell as usize;
    let mut a_bands: Vec<Vec<f64>> = (0..=hw).map(|d| vec![0.0; dim - d]).collect();
    for (start, coeffs) in &s_rows {
        for (i, &ci) in coeffs.iter().enumerate() {
            if ci == 0.0 {
                continue;
            }
            for (j, &cj) in coeffs.iter().enumerate().take(i + 1) {
                let (hi, lo) = (start + i, start + j);
                a_bands[hi - lo][lo] += ci * cj;
            }
        }
    }
    let b_diag: Vec<f64> = (0..dim)
        .map(|j| ((ell as u64 + j as u64) as f64).powi(-2 * ell as i32))
        .collect();
    Ok(BandedForm {
        n,
        ell,
        dim,
        a_bands,
        s_rows,
        b_diag,
    })
}

/// Banded Cholesky factor of a symmetric band matrix (lower storage);
/// `None` on a nonpositive pivot.
struct BandedCholesky {
    bands: Vec<Vec<f64>>,
    dim: usize,
}

impl BandedCholesky {
    fn factor(bands: &[Vec<f64>]) -> Option<Self> {
        let hw = bands.len() - 1;
        let dim = bands[0].len();
        let mut l: Vec<Vec<f64>> = bands.to_vec();
        for j in 0..dim {
            let mut d = l[0][j];
            let lo = j.saturating_sub(hw);
            for k in lo..j {
                let v = l[j - k][k];
                d -= v * v;
            }
            if d <= 0.0 {
                return None;
            }
            let root = d.sqrt();
            l[0][j] = root;
            for i in j + 1..(j + hw + 1).min(dim) {
                let mut s = l[i - j][j];
                let lo = i.saturating_sub(hw).max(lo);
                for k in lo..j {
                    if i - k <= hw {
                        s -= l[i - k][k] * l[j - k][k];
                    }
                }
                l[i - j][j] = s / root;
            }
        }
        Some(Self { bands: l, dim })
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let hw = self.bands.len() - 1;
        let mut y = rhs.to_vec();
        for i in 0..self.dim {
            let lo = i.saturating_sub(hw);
            let mut acc = y[i];
            for k in lo..i {
                acc -= self.bands[i - k][k] * y[k];
            }
            y[i] = acc / self.bands[0][i];
        }
        for i in (0..self.dim).rev() {
            let hi = (i + hw + 1).min(self.dim);
            let mut acc = y[i];
            for k in i + 1..hi {
                acc -= self.bands[k - i][i] * y[k];
            }
            y[i] = acc / self.bands[0][i];
        }
        y
    }
}

/// Result of the smallest-eigenvalue solve for a pencil.
#[derive(Debug, Clone)]
pub struct RayleighResult {
    pub lambda_min: f64,
    pub eigvec: FiniteSequence,
    pub iterations: usize,
    /// Normwise backward error `‖Av − λBv‖ / ((‖A‖ + |λ|‖B‖)‖v‖)` for the
    /// returned pair. (Normalizing by `‖Av‖` instead is unattainable at
    /// binary64 for ℓ ≥ 3: `‖Av‖ = λ‖Bv‖` is many orders below `‖A‖‖v‖`,
    /// so rounding the eigenvector already floors that ratio near 1e−7.)
    pub residual: f64,
}

/// Normwise backward error of the pair `(λ, v)`, with the matvec
/// accumulated in double-double to avoid the cancellation floor.
fn pair_residual(form: &BandedForm, lambda: f64, v: &[f64]) -> f64 {
    let hw = form.halfwidth();
    let lam = Dd::from_f64(lambda);
    let mut num = 0.0f64;
    let mut vnorm2 = 0.0f64;
    for i in 0..form.dim {
        let mut acc = Dd::ZERO;
        let lo = i.saturating_sub(hw);
        for j in lo..=i {
            acc = acc.add(Dd::from_f64(form.a_bands[i - j][j]).mul_f64(v[j]));
        }
        for j in i + 1..(i + hw + 1).min(form.dim) {
            acc = acc.add(Dd::from_f64(form.a_bands[j - i][i]).mul_f64(v[j]));
        }
        let r = acc
            .sub(lam.mul(Dd::from_f64(form.b_diag[i]).mul_f64(v[i])))
            .to_f64();
        num += r * r;
        vnorm2 += v[i] * v[i];
    }
    // ‖A‖∞ from the bands; ‖B‖∞ is its largest diagonal entry.
    let mut a_norm = 0.0f64;
    for i in 0..form.dim {
        let mut row = 0.0;
        let lo = i.saturating_sub(hw);
        for j in lo..=i {
            row += form.a_bands[i - j][j].abs();
        }
        for j in i + 1..(i + hw + 1).min(form.dim) {
            row += form.a_bands[j - i][i].abs();
        }
        a_norm = a_norm.max(row);
    }
    let b_norm = form.b_diag.iter().cloned().fold(0.0f64, f64::max);
    num.sqrt() / ((a_norm + lambda.abs() * b_norm) * vnorm2.sqrt())
}

fn shifted_bands(form: &BandedForm, sigma: f64) -> Vec<Vec<f64>> {
    let mut bands = form.a_bands.clone();
    for j in 0..form.dim {
        bands[0][j] -= sigma * form.b_diag[j];
    }
    bands
}

/// Smallest `λ` with `Av = λBv` by shifted inverse iteration with a banded
/// Cholesky of `A − σB`. Deterministic: fixed all-ones start vector.
pub fn min_generalized_eig(
    form: &BandedForm,
    tol: f64,
    max_iter: usize,
) -> Result<RayleighResult, SharpnessError> {
    let dim = form.dim;
    let rayleigh = |v: &[f64]| -> f64 {
        let num = form.quadratic_form(v);
        let den: f64 = KahanSum::sum_iter(
            v.iter().zip(&form.b_diag).map(|(&x, &b)| b * x * x),
        );
        num / den
    };
    let normalize = |v: &mut Vec<f64>| {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in v.iter_mut() {
            *x /= norm;
        }
    };
    // Warmup: unshifted inverse iteration v ← A⁻¹(Bv) pulls the start vector
    // toward the low end of the pencil spectrum. A is positive definite but
    // can be so ill-conditioned that its numerical Cholesky hits a negative
    // pivot; a tiny ridge is harmless here (warmup only shapes the start).
    let chol_a = {
        let mut ridge = 0.0f64;
        let a_diag_max = form.a_bands[0].iter().cloned().fold(0.0f64, f64::max);
        loop {
            let mut bands = form.a_bands.clone();
            for d in bands[0].iter_mut() {
                *d += ridge;
            }
            if let Some(c) = BandedCholesky::factor(&bands) {
                break c;
            }
            ridge = if ridge == 0.0 {
                1e-14 * a_diag_max
            } else {
                ridge * 8.0
            };
            if ridge > a_diag_max {
                return Err(SharpnessError::FactorizationBreakdown { retries: 0 });
            }
        }
    };
    let mut v = vec![1.0; dim];
    normalize(&mut v);
    for _ in 0..3 {
        let rhs: Vec<f64> = v.iter().zip(&form.b_diag).map(|(&x, &b)| b * x).collect();
        v = chol_a.solve(&rhs);
        normalize(&mut v);
    }
    let mut lambda = rayleigh(&v);
    let mut gap = 0.1; // σ = λ(1 − gap)
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut breakdowns = 0u32;
    // Every Rayleigh quotient is an upper bound for λ_min, so the smallest
    // iterate is the best estimate; keep it in case the drift stalls at the
    // roundoff floor of the factored solve before reaching `tol`.
    let mut best_lambda = lambda;
    let mut best_v = v.clone();
    let mut stalled = 0u32;
    let a_diag_max = form.a_bands[0].iter().cloned().fold(0.0f64, f64::max);
    let mut ridge = 0.0f64;
    while iterations < max_iter {
        let sigma = lambda * (1.0 - gap);
        let mut bands = shifted_bands(form, sigma);
        if ridge > 0.0 {
            for d in bands[0].iter_mut() {
                *d += ridge;
            }
        }
        let chol = match BandedCholesky::factor(&bands) {
            Some(c) => c,
            None => {
                // Either the shift overshot λ_min (widen the gap) or A is so
                // ill-conditioned that its pivots go negative from roundoff
                // alone (regularize). The ridge only steers the iteration;
                // the reported λ stays a true Rayleigh quotient and the
                // final pair is residual-gated.
                breakdowns += 1;
                if breakdowns <= 3 {
                    gap = (gap * 8.0).min(0.9);
                } else if breakdowns <= 12 {
                    ridge = if ridge == 0.0 {
                        1e-14 * a_diag_max
                    } else {
                        ridge * 8.0
                    };
                } else {
                    return Err(SharpnessError::FactorizationBreakdown { retries: breakdowns });
                }
                iterations += 1;
                continue;
            }
        };
        breakdowns = 0;
        let rhs: Vec<f64> = v.iter().zip(&form.b_diag).map(|(&x, &b)| b * x).collect();
        let mut w = chol.solve(&rhs);
        normalize(&mut w);
        let new_lambda = rayleigh(&w);
        let drift = (new_lambda - lambda).abs();
        v = w;
        lambda = new_lambda;
        iterations += 1;
        if lambda < best_lambda {
            best_lambda = lambda;
            best_v = v.clone();
            stalled = 0;
        } else {
            stalled += 1;
        }
        if drift <= tol * lambda.abs() || stalled >= 8 {
            // Converged in value (or hit the solve's roundoff floor);
            // verify the pair residual. The matvec cancels many orders of
            // magnitude, so evaluate it in double-double (the band entries
            // are exact integers).
            lambda = best_lambda;
            v = best_v.clone();
            residual = pair_residual(form, lambda, &v);
            if residual <= 1e-10 {
                break;
            }
            stalled = 0;
        }
        // Track the estimate: shift just below the current value, with a
        // margin on the order of the last change.
        gap = (drift / lambda.abs()).clamp(1e-9, 0.1);
    }
    if residual > 1e-10 {
        return Err(SharpnessError::NoConvergence { max_iter });
    }
    let ell = form.ell as i64;
    let eigvec = FiniteSequence::new(ell, v.clone());
    Ok(RayleighResult {
        lambda_min: lambda,
        eigvec,
        iterations,
        residual,
    })
}

/// One row of an eigenvalue sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub n: usize,
    pub lambda_min: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Runs `min_generalized_eig` for each truncation size, in parallel,
/// reporting rows in input order.
pub fn eig_sweep(ell: u32, n_list: &[usize], tol: f64) -> Result<Vec<SweepRow>, SharpnessError> {
    n_list
        .par_iter()
        .map(|&n| {
            let form = assemble_form(ell, n)?;
            let r = min_generalized_eig(&form, tol, 400)?;
            Ok(SweepRow {
                n,
                lambda_min: r.lambda_min,
                iterations: r.iterations,
                residual: r.residual,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Continuum probe
// ---------------------------------------------------------------------------

/// Smooth test profile for the continuum probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunction {
    /// `φ(x) = exp(4 − 1/(x(1−x)))` on `(0,1)`, `0` outside.
    StandardBump,
    /// Identically zero.
    Zero,
}

impl TestFunction {
    /// Taylor coefficients `[φ, φ', φ''/2!, …]` at `x`, length `order + 1`.
    fn taylor(&self, x: f64, order: usize) -> Vec<f64> {
        match self {
            TestFunction::Zero => vec![0.0; order + 1],
            TestFunction::StandardBump => {
                if x <= 0.0 || x >= 1.0 {
                    return vec![0.0; order + 1];
                }
                // p(x+t) = x(1−x) + (1−2x)t − t².
                let len = order + 1;
                let mut p = vec![0.0; len];
                p[0] = x * (1.0 - x);
                if len > 1 {
                    p[1] = 1.0 - 2.0 * x;
                }
                if len > 2 {
                    p[2] = -1.0;
                }
                // r = 1/p by the convolution recurrence.
                let mut r = vec![0.0; len];
                r[0] = 1.0 / p[0];
                for k in 1..len {
                    let mut acc = 0.0;
                    for j in 1..=k {
                        acc += p[j] * r[k - j];
                    }
                    r[k] = -acc / p[0];
                }
                // g = 4 − r; e = exp(g) via e' = g'·e.
                let mut e = vec![0.0; len];
                e[0] = (4.0 - r[0]).exp();
                for k in 1..len {
                    let mut acc = 0.0;
                    for j in 1..=k {
                        acc += j as f64 * (-r[j]) * e[k - j];
                    }
                    e[k] = acc / k as f64;
                }
                e
            }
        }
    }

    /// `φ(x)`.
    pub fn value(&self, x: f64) -> f64 {
        self.taylor(x, 0)[0]
    }

    /// `φ^{(k)}(x)`.
    pub fn derivative(&self, x: f64, k: usize) -> f64 {
        let t = self.taylor(x, k);
        let mut fact = 1.0;
        for i in 1..=k {
            fact *= i as f64;
        }
        t[k] * fact
    }
}

/// The four quantities of the continuum comparison at scale `M`.
#[derive(Debug, Clone, Copy)]
pub struct ProbeResult {
    /// `Σ_{n≥ℓ−1} |Δ^{ℓ/2}w_n|²` with `w_n = M^{ℓ−1/2} φ(n/M)`.
    pub discrete_lhs: f64,
    /// `Σ_{n≥ℓ} w_n²/n^{2ℓ}`.
    pub discrete_rhs: f64,
    /// `∫₀¹ |φ^{(ℓ)}|² dx`.
    pub continuous_lhs: f64,
    /// `∫₀¹ φ²/x^{2ℓ} dx`.
    pub continuous_rhs: f64,
}

/// Composite Simpson on `[0,1]`.
fn simpson(f: impl Fn(f64) -> f64, panels: usize) -> f64 {
    let h = 1.0 / panels as f64;
    let mut acc = KahanSum::new();
    for i in 0..panels {
        let a = i as f64 * h;
        acc.add(h / 6.0 * (f(a) + 4.0 * f(a + 0.5 * h) + f(a + h)));
    }
    acc.value()
}

/// Samples `u_n = φ(n/M)`, scales by `M^{ℓ−1/2}`, and returns the discrete
/// sums next to the continuum integrals they approach at rate `O(1/M)`.
pub fn continuum_probe(
    phi: TestFunction,
    m: u64,
    ell: u32,
) -> Result<ProbeResult, SharpnessError> {
    if m < 32 {
        return Err(SharpnessError::ProbeTooCoarse { m });
    }
    let scale = (m as f64).powf(ell as f64 - 0.5);
    let w = FiniteSequence::from_fn(0..=m as i64, |n| scale * phi.value(n as f64 / m as f64));
    let dw = w.half_laplace_power(BoundaryOrder::new(ell).unwrap());
    let mut lhs = KahanSum::new();
    for (n, v) in dw.iter() {
        if n >= ell as i64 - 1 {
            lhs.add(v * v);
        }
    }
    let mut rhs = KahanSum::new();
    for (n, v) in w.iter() {
        if n >= ell as i64 {
            rhs.add(v * v * (n as f64).powi(-2 * ell as i32));
        }
    }
    let continuous_lhs = simpson(|x| phi.derivative(x, ell as usize).powi(2), 1 << 13);
    let continuous_rhs = simpson(
        |x| {
            let v = phi.value(x);
            if v == 0.0 {
                0.0
            } else {
                v * v * x.powi(-2 * ell as i32)
            }
        },
        1 << 13,
    );
    Ok(ProbeResult {
        discrete_lhs: lhs.value(),
        discrete_rhs: rhs.value(),
        continuous_lhs,
        continuous_rhs,
    })
}

// ---------------------------------------------------------------------------
// Counterexample family
// ---------------------------------------------------------------------------

/// The explicit family showing the second-order inequality fails without
/// the index shift in the weight, for any positive constant.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub u: FiniteSequence,
    /// `Σ_{n≥1} |Δu_n|²` — decays like `1/M`.
    pub lhs: f64,
    /// `Σ_{n=2}^{M} u_n²/n⁴` — exceeds the divergent head `Σ 1/n²`.
    pub rhs_partial: f64,
}

/// Builds the piecewise-linear profile (exact rational arithmetic in units
/// of `1/(2M)`), checks `Σ w_n = 0` exactly, and evaluates both sides.
pub fn counterexample_build(m: u64) -> Counterexample {
    assert!(m >= 2);
    let m = m as i64;
    // 2M·w_n as exact integers.
    let scaled_w = |n: i64| -> i64 {
        if n < 1 || n > 5 * m {
            0
        } else if n <= m {
            2 * m + 1
        } else if n <= 3 * m {
            2 * m - 2 * (n - m)
        } else {
            -2 * m + (n - 3 * m)
        }
    };
    let total: i64 = (1..=5 * m).map(scaled_w).sum();
    assert_eq!(total, 0, "profile increments must sum to zero exactly");
    // u_n = Σ_{k≤n} w_k; prefix sums stay integral in the same units.
    let mut prefix: i64 = 0;
    let mut values = Vec::with_capacity(5 * m as usize);
    for n in 1..=5 * m {
        prefix += scaled_w(n);
        values.push(prefix as f64 / (2 * m) as f64);
    }
    let u = FiniteSequence::new(1, values);
    debug_assert_eq!(u.get(5 * m), 0.0);
    debug_assert_eq!(u.get(1), 1.0 + 1.0 / (2 * m) as f64);
    // Δu_n = w_n − w_{n+1}; sum the exact squared jumps.
    let mut lhs = KahanSum::new();
    let inv = 1.0 / (2 * m) as f64;
    for n in 1..=5 * m {
        let jump = (scaled_w(n) - scaled_w(n + 1)) as f64 * inv;
        lhs.add(jump * jump);
    }
    let mut rhs = KahanSum::new();
    for n in 2..=m {
        let v = u.get(n);
        rhs.add(v * v * (n as f64).powi(-4));
    }
    Counterexample {
        u,
        lhs: lhs.value(),
        rhs_partial: rhs.value(),
    }
}

// ---------------------------------------------------------------------------
// Order-raising chain
// ---------------------------------------------------------------------------

/// One evaluated step of the order-raising chain.
#[derive(Debug, Clone)]
pub struct ChainStep {
    pub description: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Exact identity (range shift / substitution) vs genuine inequality.
    pub equality: bool,
}

impl ChainStep {
    pub fn slack(&self) -> f64 {
        self.lhs - self.rhs
    }

    pub fn holds(&self, tol: f64) -> bool {
        let scale = self.lhs.abs() + self.rhs.abs() + 1.0;
        if self.equality {
            self.slack().abs() <= tol * scale
        } else {
            self.slack() >= -tol * scale
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChainReport {
    pub ell: u32,
    pub steps: Vec<ChainStep>,
}

impl ChainReport {
    pub fn all_hold(&self, tol: f64) -> bool {
        self.steps.iter().all(|s| s.holds(tol))
    }
}

fn weighted_square_sum(u: &FiniteSequence, from: i64, weight: impl Fn(i64) -> f64) -> f64 {
    let mut acc = KahanSum::new();
    for (n, v) in u.iter() {
        if n >= from {
            acc.add(v * v * weight(n));
        }
    }
    acc.value()
}

/// Evaluates every intermediate sum of the order-raising chain for a
/// concrete admissible `u` (`u_k = 0` for `0 ≤ k ≤ ℓ−1`), recording each
/// printed equality or inequality step with its slack.
pub fn iteration_chain_check(ell: u32, u: &FiniteSequence) -> Result<ChainReport, SharpnessError> {
    assert!(ell >= 1);
    let through = ell as i64 - 1;
    for k in 0..=through {
        if u.get(k) != 0.0 {
            return Err(SharpnessError::BoundaryViolation {
                through,
                at: k,
                value: u.get(k),
            });
        }
    }
    let mut steps = Vec::new();
    let order = BoundaryOrder::new(ell).unwrap();
    let head = |s: &FiniteSequence, from: i64| weighted_square_sum(s, from, |_| 1.0);
    let top = {
        let d = u.half_laplace_power(order);
        head(&d, ell as i64 - 1)
    };
    if ell == 1 {
        steps.push(ChainStep {
            description: "first-order bound: Σ_{n≥0}|∇u|² ≥ (1/4)Σ_{n≥1}u²/n²".into(),
            lhs: top,
            rhs: 0.25 * weighted_square_sum(u, 1, |n| (n as f64).powi(-2)),
            equality: false,
        });
    } else if ell % 2 == 0 {
        // ℓ = 2m+2: substitute v = div u, so Δ^{m+1}u_n = −∇Δ^m v_n pointwise.
        let m = (ell - 2) / 2;
        let v = u.divergence();
        let odd = BoundaryOrder::new(2 * m + 1).unwrap();
        let dv = v.half_laplace_power(odd);
        let boundary = dv.get(2 * m as i64).powi(2);
        let sub_total = head(&dv, 2 * m as i64);
        steps.push(ChainStep {
            description: format!(
                "divergence substitution with explicit boundary term at n={}",
                2 * m
            ),
            lhs: top,
            rhs: sub_total - boundary,
            equality: true,
        });
        let c_odd = sharp_constant(2 * m + 1);
        let v_mass = weighted_square_sum(&v, 2 * m as i64 + 1, |n| {
            (n as f64).powi(-(4 * m as i32 + 2))
        });
        steps.push(ChainStep {
            description: format!("order-{} bound applied to div u", 2 * m + 1),
            lhs: sub_total,
            rhs: c_odd * v_mass,
            equality: false,
        });
        // v_n = ∇u_{n+1}: reindex, then zero-padding extends the range to n ≥ 2.
        let gu = u.grad();
        let shifted = weighted_square_sum(&gu, 2, |n| ((n - 1) as f64).powi(-(4 * m as i32 + 2)));
        steps.push(ChainStep {
            description: "reindex (div u)_n = ∇u_{n+1} and extend by vanishing terms".into(),
            lhs: v_mass,
            rhs: shifted,
            equality: true,
        });
        let alpha = -(4.0 * m as f64 + 2.0);
        steps.push(ChainStep {
            description: format!("shifted first-order bound with α = {alpha}"),
            lhs: shifted,
            rhs: 0.25 * (alpha - 1.0).powi(2)
                * weighted_square_sum(u, 2, |n| (n as f64).powf(alpha - 2.0)),
            equality: false,
        });
    } else {
        // ℓ = 2m+1, m ≥ 1: shift v = τ₁u, commute, apply the order-2m bound
        // to ∇v, then the shifted first-order bound.
        let m = (ell - 1) / 2;
        let v = u.shift(1);
        let gv = v.grad();
        let even = BoundaryOrder::new(2 * m).unwrap();
        let dgv = gv.half_laplace_power(even);
        let commuted = head(&dgv, 2 * m as i64 - 1);
        steps.push(ChainStep {
            description: "shift to v = τ₁u and commute ∇ through Δ^m".into(),
            lhs: top,
            rhs: commuted,
            equality: true,
        });
        let c_even = sharp_constant(2 * m);
        let gv_mass =
            weighted_square_sum(&gv, 2 * m as i64, |n| (n as f64).powi(-4 * m as i32));
        steps.push(ChainStep {
            description: format!("order-{} bound applied to ∇v", 2 * m),
            lhs: commuted,
            rhs: c_even * gv_mass,
            equality: false,
        });
        let gu = u.grad();
        let shifted = weighted_square_sum(&gu, 2, |n| ((n - 1) as f64).powi(-4 * m as i32));
        steps.push(ChainStep {
            description: "reindex (∇v)_n = ∇u_{n+1} and extend by vanishing terms".into(),
            lhs: gv_mass,
            rhs: shifted,
            equality: true,
        });
        let alpha = -(4.0 * m as f64);
        steps.push(ChainStep {
            description: format!("shifted first-order bound with α = {alpha}"),
            lhs: shifted,
            rhs: 0.25 * (alpha - 1.0).powi(2)
                * weighted_square_sum(u, 2, |n| (n as f64).powf(alpha - 2.0)),
            equality: false,
        });
    }
    // Composite conclusion of the whole chain.
    steps.push(ChainStep {
        description: format!("conclusion: order-{ell} inequality with the sharp constant"),
        lhs: top,
        rhs: sharp_constant(ell)
            * weighted_square_sum(u, ell as i64, |n| (n as f64).powi(-2 * ell as i32)),
        equality: false,
    });
    Ok(ChainReport { ell, steps })
}
