//! Weight families for the discrete Hardy/Rellich/Leray inequalities,
//! each with two independent evaluation routes (closed form vs series),
//! the scalar comparison functions behind them, and grid scans of the
//! analytic lower bounds.

use crate::sum::{Dd, KahanSum};
use thiserror::Error;

/// Default crossover between direct and series evaluation in auto mode.
pub const DEFAULT_CROSSOVER: u64 = 64;

#[derive(Debug, Error, PartialEq)]
pub enum WeightError {
    #[error("{family}: n = {n} outside validity range (min {min_n})")]
    NOutOfRange {
        family: &'static str,
        n: u64,
        min_n: u64,
    },
    #[error("{family}: parameter {param} = {value} out of range")]
    ParamOutOfRange {
        family: &'static str,
        param: &'static str,
        value: f64,
    },
    #[error("{id}: argument {x} outside interval [{lo}, {hi}]")]
    OutOfInterval {
        id: &'static str,
        x: f64,
        lo: f64,
        hi: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalMode {
    Direct,
    Series,
    #[default]
    Auto,
}

impl EvalMode {
    fn pick(self, n: u64, crossover: u64) -> EvalMode {
        match self {
            EvalMode::Auto => {
                if n < crossover {
                    EvalMode::Direct
                } else {
                    EvalMode::Series
                }
            }
            m => m,
        }
    }
}

/// Generalized binomial coefficient `C(a, j)` for real `a`.
fn binom(a: f64, j: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..j {
        acc *= (a - i as f64) / (i + 1) as f64;
    }
    acc
}

/// Extended-precision `C(a, j)`; the Taylor coefficients of the Hardy
/// comparison functions are differences of these and cancel strongly, so
/// both the arithmetic and the argument `a` (a half-integer combination of
/// α) must carry extended precision.
fn binom_dd(a: Dd, j: u32) -> Dd {
    let mut acc = Dd::ONE;
    for i in 0..j {
        acc = acc
            .mul(a.add_f64(-(i as f64)))
            .div(Dd::from_f64((i + 1) as f64));
    }
    acc
}

// ---------------------------------------------------------------------------
// Scalar comparison functions
// ---------------------------------------------------------------------------

/// Which scalar function [`scalar_eval`] computes. For the pure-α objects
/// (`SmallG`, `BigG`, `Q`) the evaluation argument *is* α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarFunctionId {
    /// `H_α(x) = 1 + (1−x)^α − (1−x)^{(1+α)/2} − (1+x)^{(1−α)/2}` on `[0, 1)`.
    HAlpha(f64),
    /// `G_α(x) = 1 + (1+x)^α − (1+x)^{(α+1)/2} − (1−x)^{(1−α)/2}` on `[0, 1]`.
    GAlpha(f64),
    /// `F_α(x) = 1 + x^α − x^{(3α−1)/2}(2x−1)^{(1−α)/2} − x^{(α−1)/2}` on `[1, 3/2]`.
    FAlpha(f64),
    /// `K_α(x) = α(α−2) − ((α−3)(α−5)/8) x^{−(1+α)/2} + L_α(Y(x))` on `[1, 3/2]`.
    KAlpha(f64),
    /// Cubic `J_α(Y)` on `Y ∈ [3/4, 1]`.
    JAlpha(f64),
    /// `L_α(Y)` on `Y ∈ [3/4, 1]`, defined through `Y^{(1−α)/2} L_α(Y) = cubic`.
    LAlpha(f64),
    /// `Y(x) = x/(2x−1)` on `[1, 3/2]`.
    YOfX,
    /// `g(α) = 3(−9α³ + 63α² − 175α + 265)/128`.
    SmallG,
    /// `G(α) = (113α³ − 791α² + 1799α − 1905)/512`.
    BigG,
    /// `Q(α) = F_α''(3/2)` in closed form, for `α ∈ (1, 3)`.
    Q,
}

impl ScalarFunctionId {
    pub fn interval(&self) -> (f64, f64) {
        match self {
            ScalarFunctionId::HAlpha(_) => (0.0, 1.0),
            ScalarFunctionId::GAlpha(_) => (0.0, 1.0),
            ScalarFunctionId::FAlpha(_) | ScalarFunctionId::KAlpha(_) | ScalarFunctionId::YOfX => {
                (1.0, 1.5)
            }
            ScalarFunctionId::JAlpha(_) | ScalarFunctionId::LAlpha(_) => (0.75, 1.0),
            ScalarFunctionId::SmallG | ScalarFunctionId::BigG => (f64::NEG_INFINITY, f64::INFINITY),
            ScalarFunctionId::Q => (1.0, 3.0),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            ScalarFunctionId::HAlpha(_) => "H_alpha",
            ScalarFunctionId::GAlpha(_) => "G_alpha",
            ScalarFunctionId::FAlpha(_) => "F_alpha",
            ScalarFunctionId::KAlpha(_) => "K_alpha",
            ScalarFunctionId::JAlpha(_) => "J_alpha",
            ScalarFunctionId::LAlpha(_) => "L_alpha",
            ScalarFunctionId::YOfX => "Y",
            ScalarFunctionId::SmallG => "g",
            ScalarFunctionId::BigG => "G",
            ScalarFunctionId::Q => "Q",
        }
    }
}

/// `t^e − 1` given `ln t`, with the `t^0 ≡ 1` convention even at `t = 0`.
#[inline]
fn powm1(e: f64, ln_t: f64) -> f64 {
    if e == 0.0 {
        0.0
    } else {
        (e * ln_t).exp_m1()
    }
}

/// `H_α(x)` restructured so the four near-1 terms cancel exactly:
/// only `expm1` differences remain.
fn h_alpha(alpha: f64, x: f64) -> f64 {
    let lm = (-x).ln_1p();
    let lp = x.ln_1p();
    powm1(alpha, lm) - powm1(0.5 * (1.0 + alpha), lm) - powm1(0.5 * (1.0 - alpha), lp)
}

/// `G_α` grouped so the only cancellation left is the analytic `(α−1)`
/// factor: `G = e^w·expm1(((α−1)/2)·ln(1−x²)) + expm1(((α+1)/2)L₊)·expm1(((α−1)/2)L₊)`
/// with `w = −((α−1)/2)·ln(1−x)`.
fn g_alpha(alpha: f64, x: f64) -> f64 {
    let lp = x.ln_1p();
    let lm = (-x).ln_1p();
    if x == 1.0 {
        // Endpoint: (1−x)^{(1−α)/2} is 0 (α < 1) or 1 (α = 1); no cancellation.
        return powm1(alpha, lp) - powm1(0.5 * (alpha + 1.0), lp) - powm1(0.5 * (1.0 - alpha), lm);
    }
    let half = 0.5 * (alpha - 1.0);
    (-half * lm).exp() * (half * (-x * x).ln_1p()).exp_m1()
        + (0.5 * (alpha + 1.0) * lp).exp_m1() * (half * lp).exp_m1()
}

/// `F_α(1 + t)` for `t = x − 1 ∈ [0, 1/2]`, grouped the same way:
/// `F = e^q·expm1(((1−α)/2)·ln((1+t)²/(1+2t))) + expm1(((α−1)/2)A)·expm1(((α+1)/2)A)`.
fn f_alpha(alpha: f64, x: f64) -> f64 {
    let t = x - 1.0;
    let a = t.ln_1p();
    let b = (2.0 * t).ln_1p();
    let q = 0.5 * (3.0 * alpha - 1.0) * a + 0.5 * (1.0 - alpha) * b;
    let log_ratio = (t * t / (1.0 + 2.0 * t)).ln_1p(); // 2A − B ≥ 0
    q.exp() * (0.5 * (1.0 - alpha) * log_ratio).exp_m1()
        + (0.5 * (alpha - 1.0) * a).exp_m1() * (0.5 * (alpha + 1.0) * a).exp_m1()
}

fn j_alpha(alpha: f64, y: f64) -> f64 {
    let a = alpha;
    ((a + 1.0) * (a + 3.0) * (a + 5.0) / 2.0) * y.powi(3)
        - (3.0 * (3.0 * a - 1.0) * (a + 1.0) * (a + 3.0) / 4.0) * y.powi(2)
        + (9.0 * (3.0 * a - 1.0) * (a * a - 1.0) / 8.0) * y
        - 3.0 * (a - 1.0) * (3.0 * a - 1.0) * (3.0 * a - 5.0) / 16.0
}

/// Cubic on the right of `Y^{(1−α)/2} L_α(Y) = …`.
fn l_alpha_cubic(alpha: f64, y: f64) -> f64 {
    let a = alpha;
    (a + 1.0) * (a + 3.0) * y.powi(3) - (3.0 * (3.0 * a - 1.0) * (a + 1.0) / 2.0) * y.powi(2)
        + (9.0 * (3.0 * a - 1.0) * (a - 1.0) / 4.0) * y
        - 3.0 * (3.0 * a - 1.0) * (3.0 * a - 5.0) / 8.0
}

fn l_alpha(alpha: f64, y: f64) -> f64 {
    y.powf(0.5 * (alpha - 1.0)) * l_alpha_cubic(alpha, y)
}

fn k_alpha(alpha: f64, x: f64) -> f64 {
    let a = alpha;
    a * (a - 2.0) - ((a - 3.0) * (a - 5.0) / 8.0) * x.powf(-0.5 * (1.0 + a))
        + l_alpha(a, x / (2.0 * x - 1.0))
}

fn small_g(alpha: f64) -> f64 {
    let a = alpha;
    3.0 * (-9.0 * a.powi(3) + 63.0 * a * a - 175.0 * a + 265.0) / 128.0
}

fn big_g(alpha: f64) -> f64 {
    let a = alpha;
    (113.0 * a.powi(3) - 791.0 * a * a + 1799.0 * a - 1905.0) / 512.0
}

/// Second derivative of `F_α` at the right endpoint `x = 3/2`, closed form.
fn q_of_alpha(alpha: f64) -> f64 {
    let a = alpha;
    let x: f64 = 1.5;
    (a - 1.0)
        * (a * x.powf(a - 2.0)
            - (a + 1.0) * x.powf(0.5 * (3.0 * a - 1.0)) * 2.0f64.powf(0.5 * (-3.0 - a))
            - 0.25 * (a - 3.0) * x.powf(0.5 * (a - 5.0)))
}

/// Evaluates the scalar function at `x` (binary64 path).
pub fn scalar_eval(fid: ScalarFunctionId, x: f64) -> Result<f64, WeightError> {
    let (lo, hi) = fid.interval();
    if !(x >= lo && x <= hi) || (matches!(fid, ScalarFunctionId::HAlpha(_)) && x >= 1.0) {
        return Err(WeightError::OutOfInterval {
            id: fid.name(),
            x,
            lo,
            hi,
        });
    }
    Ok(match fid {
        ScalarFunctionId::HAlpha(a) => h_alpha(a, x),
        ScalarFunctionId::GAlpha(a) => g_alpha(a, x),
        ScalarFunctionId::FAlpha(a) => f_alpha(a, x),
        ScalarFunctionId::KAlpha(a) => k_alpha(a, x),
        ScalarFunctionId::JAlpha(a) => j_alpha(a, x),
        ScalarFunctionId::LAlpha(a) => l_alpha(a, x),
        ScalarFunctionId::YOfX => x / (2.0 * x - 1.0),
        ScalarFunctionId::SmallG => small_g(x),
        ScalarFunctionId::BigG => big_g(x),
        ScalarFunctionId::Q => q_of_alpha(x),
    })
}

/// Extended-precision evaluation of the defining formulas (for
/// cancellation-prone small arguments and cross-checks).
pub fn scalar_eval_dd(fid: ScalarFunctionId, x: f64) -> Result<Dd, WeightError> {
    // Reuse the interval validation from the f64 path.
    scalar_eval(fid, x)?;
    let xd = Dd::from_f64(x);
    let one = Dd::ONE;
    Ok(match fid {
        ScalarFunctionId::HAlpha(a) => one
            .add(one.sub(xd).powf_f64(a))
            .sub(one.sub(xd).powf_f64(0.5 * (1.0 + a)))
            .sub(one.add(xd).powf_f64(0.5 * (1.0 - a))),
        ScalarFunctionId::GAlpha(a) => one
            .add(one.add(xd).powf_f64(a))
            .sub(one.add(xd).powf_f64(0.5 * (a + 1.0)))
            .sub(one.sub(xd).powf_f64(0.5 * (1.0 - a))),
        ScalarFunctionId::FAlpha(a) => {
            let two_x_m1 = xd.mul_f64(2.0).sub(one);
            one.add(xd.powf_f64(a))
                .sub(xd.powf_f64(0.5 * (3.0 * a - 1.0)).mul(two_x_m1.powf_f64(0.5 * (1.0 - a))))
                .sub(xd.powf_f64(0.5 * (a - 1.0)))
        }
        other => Dd::from_f64(scalar_eval(other, x)?),
    })
}

// ---------------------------------------------------------------------------
// Weight families
// ---------------------------------------------------------------------------

/// The weight families exposed by the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightFamily {
    /// `w_n = Δ√n/√n`: the sharp first-order improvement.
    Kpp,
    /// Reference second-order series `w̃_n` from the literature (single route).
    GksReference,
    /// `n^α H_α(1/n)` for `α < 0` (shifted weight `V_n = (n−1)^α`).
    ShiftedHardy(f64),
    /// The exact weight for `V_n = n^α`, `α ≥ 0` (`G_α` for `α ≤ 1`, `F_α` above).
    DirectHardy(f64),
    /// Leray weight from `f_n = √(ln n)`, `V_n = n`.
    Leray,
    /// Improved second-order weight `(1/4)A_n + Σ…`.
    ImprovedRellich2,
    /// `((p−1)/p)^p` (n-independent).
    LandauConstant(f64),
}

impl WeightFamily {
    pub fn name(&self) -> &'static str {
        match self {
            WeightFamily::Kpp => "kpp",
            WeightFamily::GksReference => "gks_reference",
            WeightFamily::ShiftedHardy(_) => "shifted_hardy",
            WeightFamily::DirectHardy(_) => "direct_hardy",
            WeightFamily::Leray => "leray",
            WeightFamily::ImprovedRellich2 => "improved_rellich2",
            WeightFamily::LandauConstant(_) => "landau_constant",
        }
    }

    /// First n the family is defined for.
    pub fn min_n(&self) -> u64 {
        match self {
            WeightFamily::Kpp | WeightFamily::DirectHardy(_) | WeightFamily::LandauConstant(_) => 1,
            _ => 2,
        }
    }

    /// How many leading values of a test sequence must vanish for the
    /// corresponding inequality (1 for Hardy-type, 2 for Rellich-type).
    pub fn vanishing_order(&self) -> u32 {
        match self {
            WeightFamily::GksReference | WeightFamily::ImprovedRellich2 => 2,
            WeightFamily::LandauConstant(_) => 0,
            _ => 1,
        }
    }
}

/// One row of the dual-evaluation table for a family.
#[derive(Debug, Clone, Copy)]
pub struct WeightSample {
    pub n: u64,
    pub direct: f64,
    pub series: f64,
    /// Certified analytic lower bound (0 where the family has none).
    pub bound: f64,
    pub margin: f64,
}

/// `w_n = (2√n − √(n−1) − √(n+1))/√n`. Direct mode uses the
/// cancellation-free product form
/// `2 / (√n (√n+√(n−1)) (√(n+1)+√n) (√(n+1)+√(n−1)))`.
pub fn kpp_weight(n: u64, mode: EvalMode) -> Result<f64, WeightError> {
    if n < 1 {
        return Err(WeightError::NOutOfRange {
            family: "kpp",
            n,
            min_n: 1,
        });
    }
    match mode.pick(n, DEFAULT_CROSSOVER) {
        EvalMode::Direct => {
            let s0 = ((n - 1) as f64).sqrt();
            let s1 = (n as f64).sqrt();
            let s2 = ((n + 1) as f64).sqrt();
            Ok(2.0 / (s1 * (s1 + s0) * (s2 + s1) * (s2 + s0)))
        }
        _ => {
            // Σ_{k≥1} c_k n^{−2k}, truncated at relative 1e−18 or k = 64.
            let inv2 = 1.0 / (n as f64 * n as f64);
            let mut pow = 1.0;
            let mut acc = KahanSum::new();
            for k in 1..=64u32 {
                pow *= inv2;
                let term = kpp_series_coeff(k) * pow;
                acc.add(term);
                if term < 1e-18 * acc.value() {
                    break;
                }
            }
            Ok(acc.value())
        }
    }
}

/// Coefficient `c_k = C(4k,2k)/(2^{4k−1}(4k−1))` of the `n^{−2k}` expansion
/// of the first-order weight, by ratio recursion (no factorial overflow).
pub fn kpp_series_coeff(k: u32) -> f64 {
    let mut c = 0.25; // k = 1
    for i in 1..k {
        let kf = i as f64;
        c *= ((4.0 * kf + 1.0) * (4.0 * kf + 2.0) * (4.0 * kf + 3.0) * (4.0 * kf + 4.0))
            / ((2.0 * kf + 1.0).powi(2) * (2.0 * kf + 2.0).powi(2))
            * (4.0 * kf - 1.0)
            / (4.0 * kf + 3.0)
            / 16.0;
    }
    c
}

/// Certified bound `1/(4n²)` for the first-order weight.
pub fn kpp_bound(n: u64) -> f64 {
    0.25 / (n as f64 * n as f64)
}

/// Taylor coefficient of `H_α` at 0 (order `j`).
fn h_alpha_coeff(alpha: f64, j: u32) -> f64 {
    if j == 0 {
        return 0.0;
    }
    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
    sign * (binom(alpha, j) - binom(0.5 * (1.0 + alpha), j)) - binom(0.5 * (1.0 - alpha), j)
}

/// Taylor coefficient of `G_α` at 0 (order `j`).
fn g_alpha_coeff(alpha: f64, j: u32) -> f64 {
    if j == 0 {
        return 0.0;
    }
    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
    let a = Dd::from_f64(alpha);
    binom_dd(a, j)
        .sub(binom_dd(a.add_f64(1.0).mul_f64(0.5), j))
        .sub(binom_dd(Dd::ONE.sub(a).mul_f64(0.5), j).mul_f64(sign))
        .to_f64()
}

/// Taylor coefficient of `F_α(1 + t)` at `t = 0` (order `j`).
fn f_alpha_coeff(alpha: f64, j: u32) -> f64 {
    if j == 0 {
        return 0.0;
    }
    // x^{(3α−1)/2}(2x−1)^{(1−α)/2} expands by Cauchy product.
    let a = Dd::from_f64(alpha);
    let p = a.mul_f64(3.0).add_f64(-1.0).mul_f64(0.5);
    let q = Dd::ONE.sub(a).mul_f64(0.5);
    let mut prod = Dd::ZERO;
    for i in 0..=j {
        prod = prod.add(
            binom_dd(p, i)
                .mul(binom_dd(q, j - i))
                .mul_f64(2f64.powi((j - i) as i32)),
        );
    }
    binom_dd(a, j)
        .sub(prod)
        .sub(binom_dd(a.add_f64(-1.0).mul_f64(0.5), j))
        .to_f64()
}

const SERIES_ORDER: u32 = 12;

fn poly_in_inv_n(n: u64, coeff: impl Fn(u32) -> f64) -> f64 {
    let x = 1.0 / n as f64;
    let mut acc = KahanSum::new();
    let mut pow = 1.0;
    for j in 0..=SERIES_ORDER {
        pow = if j == 0 { 1.0 } else { pow * x };
        acc.add(coeff(j) * pow);
    }
    acc.value()
}

/// `n^α H_α(1/n)`, the exact weight for `V_n = (n−1)^α`, `α < 0`.
pub fn shifted_hardy_weight(alpha: f64, n: u64, mode: EvalMode) -> Result<f64, WeightError> {
    if alpha >= 0.0 {
        return Err(WeightError::ParamOutOfRange {
            family: "shifted_hardy",
            param: "alpha",
            value: alpha,
        });
    }
    if n < 2 {
        return Err(WeightError::NOutOfRange {
            family: "shifted_hardy",
            n,
            min_n: 2,
        });
    }
    let scale = (n as f64).powf(alpha);
    Ok(match mode.pick(n, DEFAULT_CROSSOVER) {
        EvalMode::Direct => scale * h_alpha(alpha, 1.0 / n as f64),
        _ => scale * poly_in_inv_n(n, |j| h_alpha_coeff(alpha, j)),
    })
}

/// Certified bound `((α−1)²/4) n^{α−2}` shared by the Hardy families.
pub fn hardy_bound(alpha: f64, n: u64) -> f64 {
    0.25 * (alpha - 1.0).powi(2) * (n as f64).powf(alpha - 2.0)
}

/// Exact weight for `V_n = n^α`, `α ≥ 0`: `n^α G_α(1/n)` for `α ≤ 1`
/// (reference `f_n = n^{(1−α)/2}`), and for `α > 1` the weight from
/// `f_n = (n+1)^{(1−α)/2}` — `n^α F_α(1 + 1/n)` for `n ≥ 2`, with an
/// explicit boundary value at `n = 1`.
pub fn direct_hardy_weight(alpha: f64, n: u64, mode: EvalMode) -> Result<f64, WeightError> {
    if alpha < 0.0 {
        return Err(WeightError::ParamOutOfRange {
            family: "direct_hardy",
            param: "alpha",
            value: alpha,
        });
    }
    if n < 1 {
        return Err(WeightError::NOutOfRange {
            family: "direct_hardy",
            n,
            min_n: 1,
        });
    }
    let scale = (n as f64).powf(alpha);
    if alpha <= 1.0 {
        return Ok(match mode.pick(n, DEFAULT_CROSSOVER) {
            EvalMode::Direct => scale * g_alpha(alpha, 1.0 / n as f64),
            _ => scale * poly_in_inv_n(n, |j| g_alpha_coeff(alpha, j)),
        });
    }
    if n == 1 {
        // [V_1(f_1 − f_0) − V_2(f_2 − f_1)]/f_1 with f_0 = 0.
        return Ok(1.0 + (1.0 - (2.0f64 / 3.0).powf(0.5 * (alpha - 1.0))) * 2f64.powf(alpha));
    }
    Ok(match mode.pick(n, DEFAULT_CROSSOVER) {
        EvalMode::Direct => scale * f_alpha(alpha, 1.0 + 1.0 / n as f64),
        _ => scale * poly_in_inv_n(n, |j| f_alpha_coeff(alpha, j)),
    })
}

/// Exact Leray weight and its certified bound at `n`.
#[derive(Debug, Clone, Copy)]
pub struct LeraySample {
    /// `−div(V∇f)_n / f_n` with `V_n = n`, `f_n = √(ln n)` (`f₁ = ε`).
    pub exact: f64,
    /// `1/(4 n (ln n)²)`.
    pub bound: f64,
    pub margin: f64,
}

pub const LERAY_DEFAULT_EPS: f64 = 1e-6;

/// Binary64 route: log differences via `ln_1p` so only the final, genuinely
/// small difference cancels.
pub fn leray_weight(n: u64, eps: f64) -> Result<LeraySample, WeightError> {
    if n < 2 {
        return Err(WeightError::NOutOfRange {
            family: "leray",
            n,
            min_n: 2,
        });
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    let s_n = ln_n.sqrt();
    let exact = if n == 2 {
        // [2(√ln2 − ε) − 3(√ln3 − √ln2)]/√ln2
        5.0 - 3.0 * (3.0f64.ln() / 2.0f64.ln()).sqrt() - 2.0 * eps / 2.0f64.ln().sqrt()
    } else {
        let s_m = (nf - 1.0).ln().sqrt();
        let s_p = (nf + 1.0).ln().sqrt();
        // √ln n − √ln(n−1) = −ln(1 − 1/n)/(√ln n + √ln(n−1)), etc.
        let up = -nf * (-1.0 / nf).ln_1p() / (s_n + s_m);
        let down = (nf + 1.0) * (1.0 / nf).ln_1p() / (s_p + s_n);
        (up - down) / s_n
    };
    let bound = 0.25 / (nf * ln_n * ln_n);
    Ok(LeraySample {
        exact,
        bound,
        margin: exact - bound,
    })
}

/// Extended-precision route evaluating the defining divergence quotient
/// literally; used to cross-check [`leray_weight`].
pub fn leray_weight_dd(n: u64, eps: f64) -> Result<f64, WeightError> {
    if n < 2 {
        return Err(WeightError::NOutOfRange {
            family: "leray",
            n,
            min_n: 2,
        });
    }
    let f = |m: u64| -> Dd {
        if m <= 1 {
            if m == 1 {
                Dd::from_f64(eps)
            } else {
                Dd::ZERO
            }
        } else {
            Dd::from_f64(m as f64).ln().sqrt()
        }
    };
    let (fm, fn_, fp) = (f(n - 1), f(n), f(n + 1));
    let num = Dd::from_f64(n as f64)
        .mul(fn_.sub(fm))
        .sub(Dd::from_f64((n + 1) as f64).mul(fp.sub(fn_)));
    Ok(num.div(fn_).to_f64())
}

/// `a_k = (k+1) − C(2k,k)/4^k − (−1)^k · 3 C(2k−4,k−2)/(4^{k−1} k(k−1))`,
/// the series coefficients of `A_n` (`k ≥ 2`).
pub fn improved_rellich2_coeff(k: u32) -> f64 {
    assert!(k >= 2);
    // C(2k,k)/4^k by the ratio (2i−1)/(2i).
    let mut central = 1.0;
    for i in 1..=k {
        central *= (2.0 * i as f64 - 1.0) / (2.0 * i as f64);
    }
    // C(2k−4,k−2)/4^{k−1} = (1/4)·C(2m,m)/4^m at m = k−2.
    let mut shifted = 0.25;
    for i in 1..=(k - 2) {
        shifted *= (2.0 * i as f64 - 1.0) / (2.0 * i as f64);
    }
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    (k + 1) as f64 - central - sign * 3.0 * shifted / (k as f64 * (k as f64 - 1.0))
}

/// Improved second-order weight:
/// `(1/4) A_n + Σ_{k≥2} C(4k,2k)(2k+1)²/((4k−1)2^{4k+1}) n^{−2k−2}`, where
/// `A_n = n^{−2} H_{−2}(1/n)` is the exact `α = −2` Hardy weight.
/// Direct mode computes `A_n` in closed form; series mode sums `Σ a_k n^{−k−2}`.
pub fn improved_rellich2_weight(n: u64, terms: u32, mode: EvalMode) -> Result<f64, WeightError> {
    if n < 2 {
        return Err(WeightError::NOutOfRange {
            family: "improved_rellich2",
            n,
            min_n: 2,
        });
    }
    let a_n = match mode.pick(n, DEFAULT_CROSSOVER) {
        EvalMode::Direct => shifted_hardy_weight(-2.0, n, EvalMode::Direct)?,
        _ => {
            let x = 1.0 / n as f64;
            let mut acc = KahanSum::new();
            let mut pow = x * x * x * x; // n^{−2−2}, k = 2
            for k in 2..=terms.max(2) {
                acc.add(improved_rellich2_coeff(k) * pow);
                pow *= x;
            }
            acc.value()
        }
    };
    // The second series has no closed form; both modes sum it.
    let inv2 = 1.0 / (n as f64 * n as f64);
    let mut pow = inv2 * inv2; // n^{−2k−2} at k = 2 after the first multiply
    let mut acc = KahanSum::new();
    for k in 2..=64u32 {
        pow *= inv2;
        let term = improved_rellich2_tail_coeff(k) * pow;
        acc.add(term);
        if term < 1e-18 * acc.value() {
            break;
        }
    }
    Ok(0.25 * a_n + acc.value())
}

/// Coefficient `C(4k,2k)(2k+1)²/((4k−1)2^{4k+1})` of `n^{−2k−2}` in the
/// second (remainder) series of the improved second-order weight (`k ≥ 2`).
pub fn improved_rellich2_tail_coeff(k: u32) -> f64 {
    assert!(k >= 2);
    // Base k = 2: C(8,4)·5²/(7·2⁹) = 70·25/3584 = 125/256.
    let mut c = 125.0 / 256.0;
    for i in 2..k {
        let kf = i as f64;
        c *= ((4.0 * kf + 1.0) * (4.0 * kf + 2.0) * (4.0 * kf + 3.0) * (4.0 * kf + 4.0))
            / ((2.0 * kf + 1.0).powi(2) * (2.0 * kf + 2.0).powi(2))
            * ((2.0 * kf + 3.0) / (2.0 * kf + 1.0)).powi(2)
            * (4.0 * kf - 1.0)
            / (4.0 * kf + 3.0)
            / 16.0;
    }
    c
}

/// Reference series `w̃_n = 6 Σ_{k≥1} (4^k−1)/4^{2k} · (4k)!/((2k)!(2k+2)!) · n^{−2k−2}`.
pub fn gks_reference_weight(n: u64, terms: u32) -> Result<f64, WeightError> {
    if n < 2 {
        return Err(WeightError::NOutOfRange {
            family: "gks_reference",
            n,
            min_n: 2,
        });
    }
    let inv2 = 1.0 / (n as f64 * n as f64);
    let mut acc = KahanSum::new();
    let mut fact_ratio = 0.5; // (4k)!/((2k)!(2k+2)!) at k = 1
    let mut pow4 = 4.0; // 4^k
    let mut pow = inv2 * inv2; // n^{−2k−2} at k = 1
    for k in 1..=terms.max(1) {
        acc.add(6.0 * (pow4 - 1.0) / (pow4 * pow4) * fact_ratio * pow);
        let kf = k as f64;
        fact_ratio *= ((4.0 * kf + 1.0) * (4.0 * kf + 2.0) * (4.0 * kf + 3.0) * (4.0 * kf + 4.0))
            / ((2.0 * kf + 1.0) * (2.0 * kf + 2.0) * (2.0 * kf + 3.0) * (2.0 * kf + 4.0));
        pow4 *= 4.0;
        pow *= inv2;
    }
    Ok(acc.value())
}

/// `((p−1)/p)^p`, the sharp constant of the discrete averaging inequality.
pub fn landau_constant(p: f64) -> Result<f64, WeightError> {
    if !(p > 1.0) {
        return Err(WeightError::ParamOutOfRange {
            family: "landau_constant",
            param: "p",
            value: p,
        });
    }
    Ok(((p - 1.0) / p).powf(p))
}

/// Evaluates both routes and the certified bound for one family at one `n`.
pub fn sample(family: WeightFamily, n: u64) -> Result<WeightSample, WeightError> {
    let (direct, series, bound) = match family {
        WeightFamily::Kpp => (
            kpp_weight(n, EvalMode::Direct)?,
            kpp_weight(n, EvalMode::Series)?,
            kpp_bound(n),
        ),
        WeightFamily::GksReference => {
            let v = gks_reference_weight(n, 64)?;
            (v, v, 0.0)
        }
        WeightFamily::ShiftedHardy(a) => (
            shifted_hardy_weight(a, n, EvalMode::Direct)?,
            shifted_hardy_weight(a, n, EvalMode::Series)?,
            hardy_bound(a, n),
        ),
        WeightFamily::DirectHardy(a) => (
            direct_hardy_weight(a, n, EvalMode::Direct)?,
            direct_hardy_weight(a, n, EvalMode::Series)?,
            hardy_bound(a, n),
        ),
        WeightFamily::Leray => {
            let s = leray_weight(n, LERAY_DEFAULT_EPS)?;
            (s.exact, leray_weight_dd(n, LERAY_DEFAULT_EPS)?, s.bound)
        }
        WeightFamily::ImprovedRellich2 => (
            improved_rellich2_weight(n, 64, EvalMode::Direct)?,
            improved_rellich2_weight(n, 64, EvalMode::Series)?,
            0.0,
        ),
        WeightFamily::LandauConstant(p) => {
            let v = landau_constant(p)?;
            (v, v, v)
        }
    };
    Ok(WeightSample {
        n,
        direct,
        series,
        bound,
        margin: direct - bound,
    })
}

// ---------------------------------------------------------------------------
// Lower-bound scans
// ---------------------------------------------------------------------------

/// Result of a grid scan of `value − bound`.
#[derive(Debug, Clone, Copy)]
pub struct ScanReport {
    pub min_margin: f64,
    pub argmin: f64,
    pub points: usize,
}

impl ScanReport {
    pub fn passes_strict(&self) -> bool {
        self.min_margin > 0.0
    }

    pub fn passes(&self) -> bool {
        self.min_margin >= 0.0
    }
}

/// Scans `value(x) − bound(x)` on `points` equispaced interior points of
/// `(lo, hi)` (endpoints excluded so strict claims on open intervals are
/// testable).
pub fn lower_bound_scan(
    value: impl Fn(f64) -> f64,
    bound: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    points: usize,
) -> ScanReport {
    let mut min_margin = f64::INFINITY;
    let mut argmin = lo;
    for i in 1..=points {
        let x = lo + (hi - lo) * i as f64 / (points + 1) as f64;
        let m = value(x) - bound(x);
        if m < min_margin {
            min_margin = m;
            argmin = x;
        }
    }
    ScanReport {
        min_margin,
        argmin,
        points,
    }
}

pub const DEFAULT_SCAN_POINTS: usize = 4000;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{t_functional, Graph, VertexFunction};
    use proptest::prelude::*;

    #[test]
    fn kpp_frozen_values() {
        let w1 = kpp_weight(1, EvalMode::Direct).unwrap();
        assert!((w1 - (2.0 - 2.0f64.sqrt())).abs() < 1e-15);
        let w2 = kpp_weight(2, EvalMode::Direct).unwrap();
        assert!((w2 - 0.06814834742186343).abs() < 1e-15);
        assert!(kpp_weight(0, EvalMode::Auto).is_err());
    }

    #[test]
    fn kpp_series_leading_coefficients() {
        assert!((kpp_series_coeff(1) - 0.25).abs() < 1e-16);
        assert!((kpp_series_coeff(2) - 5.0 / 64.0).abs() < 1e-16);
        assert!((kpp_series_coeff(3) - 21.0 / 512.0).abs() < 1e-16);
        // Asymptotically w_n·n² → 1/4.
        let n = 100_000u64;
        let nf = n as f64;
        let w = kpp_weight(n, EvalMode::Series).unwrap();
        assert!((w * nf * nf - 0.25).abs() < 1e-8);
    }

    #[test]
    fn shifted_hardy_matches_path_divergence() {
        // Graph oracle: path with edge weights b(n−1, n) = V_n = (n−1)^α,
        // unit vertex weight; T(1, f)(n)/f_n is the same divergence quotient.
        let alpha = -2.0;
        let g = Graph::weighted_path(1, 40, |n| ((n - 1) as f64).powf(alpha));
        let f = VertexFunction::from_fn(g.vertices(), |x| (x as f64).powf(0.5 * (1.0 - alpha)));
        let one = VertexFunction::constant(&g, 1.0);
        for n in [3u64, 5, 10, 20] {
            let oracle = t_functional(&g, &one, &f, n).unwrap() / f.get(n);
            let w = shifted_hardy_weight(alpha, n, EvalMode::Direct).unwrap();
            assert!(
                (w - oracle).abs() <= 1e-12 * (w.abs() + oracle.abs()),
                "n={n}: {w} vs {oracle}"
            );
            assert!(w >= hardy_bound(alpha, n), "bound fails at n={n}");
        }
    }

    #[test]
    fn direct_hardy_matches_path_divergence() {
        for &alpha in &[0.0, 0.5, 1.0] {
            let g = Graph::weighted_path(1, 40, |n| (n as f64).powf(alpha));
            let f = VertexFunction::from_fn(g.vertices(), |x| (x as f64).powf(0.5 * (1.0 - alpha)));
            let one = VertexFunction::constant(&g, 1.0);
            for n in [2u64, 5, 11, 25] {
                let oracle = t_functional(&g, &one, &f, n).unwrap() / f.get(n);
                let w = direct_hardy_weight(alpha, n, EvalMode::Direct).unwrap();
                assert!(
                    (w - oracle).abs() <= 1e-11 * (w.abs() + oracle.abs() + 1e-300),
                    "alpha={alpha}, n={n}: {w} vs {oracle}"
                );
            }
        }
        // α > 1 branch against the divergence with f_n = (n+1)^{(1−α)/2}.
        for &alpha in &[1.5, 3.0] {
            let g = Graph::weighted_path(1, 40, |n| (n as f64).powf(alpha));
            let f = VertexFunction::from_fn(g.vertices(), |x| {
                ((x + 1) as f64).powf(0.5 * (1.0 - alpha))
            });
            let one = VertexFunction::constant(&g, 1.0);
            for n in [2u64, 7, 19] {
                let oracle = t_functional(&g, &one, &f, n).unwrap() / f.get(n);
                let w = direct_hardy_weight(alpha, n, EvalMode::Direct).unwrap();
                assert!(
                    (w - oracle).abs() <= 1e-11 * (w.abs() + oracle.abs()),
                    "alpha={alpha}, n={n}: {w} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn direct_hardy_boundary_values() {
        // α = 3, n = 1: 1 + (1 − 2/3)·2³ = 11/3.
        let v = direct_hardy_weight(3.0, 1, EvalMode::Direct).unwrap();
        assert!((v - 11.0 / 3.0).abs() < 1e-14);
        // α = 0, n = 5: G₀(1/5) = 2 − √1.2 − √0.8.
        let v = direct_hardy_weight(0.0, 5, EvalMode::Direct).unwrap();
        let want = 2.0 - 1.2f64.sqrt() - 0.8f64.sqrt();
        assert!((v - want).abs() < 1e-14);
        // α = 1 is the trivial case: weight 0, bound 0.
        for n in [1u64, 2, 10, 1000] {
            assert!(direct_hardy_weight(1.0, n, EvalMode::Auto).unwrap().abs() < 1e-15);
        }
        assert_eq!(hardy_bound(1.0, 10), 0.0);
    }

    #[test]
    fn leray_frozen_values_and_n2_check() {
        // The dd route is the reference; the f64 route carries the inherent
        // cancellation of the divergence quotient (relative error ~ n·ε).
        let dd = leray_weight_dd(100, LERAY_DEFAULT_EPS).unwrap();
        assert!((dd - 1.2392520214408846e-4).abs() < 1e-18);
        let s = leray_weight(100, LERAY_DEFAULT_EPS).unwrap();
        assert!((s.exact - dd).abs() < 1e-12 * dd);
        let dd6 = leray_weight_dd(1_000_000, LERAY_DEFAULT_EPS).unwrap();
        assert!((dd6 - 1.3098222019813066e-9).abs() < 1e-21);
        let s6 = leray_weight(1_000_000, LERAY_DEFAULT_EPS).unwrap();
        assert!((s6.exact - dd6).abs() < 1e-7 * dd6);
        assert!(s6.margin > 0.0);
        // n = 2 boundary: 5 − 3√(ln3/ln2) − 2ε/√(ln2) > 1/(8(ln2)²).
        let s2 = leray_weight(2, LERAY_DEFAULT_EPS).unwrap();
        let want = 5.0 - 3.0 * (3.0f64.ln() / 2.0f64.ln()).sqrt()
            - 2.0 * LERAY_DEFAULT_EPS / 2.0f64.ln().sqrt();
        assert!((s2.exact - want).abs() < 1e-14);
        assert!((s2.bound - 1.0 / (8.0 * 2.0f64.ln().powi(2))).abs() < 1e-16);
        assert!(s2.exact > s2.bound);
        // n = 8 bound instantiation.
        let s8 = leray_weight(8, LERAY_DEFAULT_EPS).unwrap();
        assert!((s8.bound - 1.0 / (32.0 * 8.0f64.ln().powi(2))).abs() < 1e-17);
    }

    #[test]
    fn leray_dd_agrees_with_direct() {
        // On the dual-evaluation overlap band the routes agree to 1e−12;
        // beyond it the f64 route degrades like n·ε from cancellation.
        for n in [3u64, 10, 32, 64, 128, 500] {
            let direct = leray_weight(n, LERAY_DEFAULT_EPS).unwrap().exact;
            let dd = leray_weight_dd(n, LERAY_DEFAULT_EPS).unwrap();
            assert!(
                (direct - dd).abs() <= 1e-12 * dd.abs(),
                "n={n}: {direct} vs {dd}"
            );
        }
        for n in [10_000u64, 100_000] {
            let direct = leray_weight(n, LERAY_DEFAULT_EPS).unwrap().exact;
            let dd = leray_weight_dd(n, LERAY_DEFAULT_EPS).unwrap();
            assert!(
                (direct - dd).abs() <= 20.0 * n as f64 * f64::EPSILON * dd.abs(),
                "n={n}: {direct} vs {dd}"
            );
        }
    }

    #[test]
    fn improved_rellich2_coefficients() {
        assert!((improved_rellich2_coeff(2) - 9.0 / 4.0).abs() < 1e-15);
        assert!((improved_rellich2_coeff(3) - 15.0 / 4.0).abs() < 1e-15);
        assert!((improved_rellich2_coeff(4) - 301.0 / 64.0).abs() < 1e-14);
        for k in 2..=64 {
            assert!(improved_rellich2_coeff(k) > 0.0, "a_{k} not positive");
        }
        // a_k must reproduce the Taylor coefficients of H_{−2}.
        for k in 2..=12u32 {
            let c = h_alpha_coeff(-2.0, k);
            let a = improved_rellich2_coeff(k);
            assert!((c - a).abs() <= 1e-12 * a, "k={k}: {c} vs {a}");
        }
    }

    #[test]
    fn improved_rellich2_expansion_coefficients() {
        // Combined expansion: n⁻⁴ → a₂/4 = 9/16; n⁻⁵ → a₃/4 = 15/16 (the
        // value consistent with the a_k formula); n⁻⁶ → a₄/4 + tail = 213/128.
        assert!((improved_rellich2_coeff(2) / 4.0 - 9.0 / 16.0).abs() < 1e-15);
        assert!((improved_rellich2_coeff(3) / 4.0 - 15.0 / 16.0).abs() < 1e-15);
        let c6 = improved_rellich2_coeff(4) / 4.0 + improved_rellich2_tail_coeff(2);
        assert!((c6 - 213.0 / 128.0).abs() < 1e-14, "{c6}");
        // Asymptotically w·n⁴ → 9/16 with the n⁻¹ correction 15/16.
        let n = 100_000u64;
        let nf = n as f64;
        let w = improved_rellich2_weight(n, 64, EvalMode::Series).unwrap();
        assert!((w * nf.powi(4) - 9.0 / 16.0 - 15.0 / 16.0 / nf).abs() < 1e-8);
    }

    #[test]
    fn gks_reference_series() {
        let n = 10_000u64;
        let nf = n as f64;
        let w = gks_reference_weight(n, 64).unwrap();
        assert!((w * nf.powi(4) - 9.0 / 16.0).abs() < 1e-6);
        let r = (w - 9.0 / 16.0 / nf.powi(4)) * nf.powi(6);
        assert!((r - 210.0 / 256.0).abs() < 1e-4, "{r}");
        // n = 100 is already within 1e−6 relative of the n⁻⁴ head.
        let w100 = gks_reference_weight(100, 64).unwrap();
        assert!((w100 * 100.0f64.powi(4) / (9.0 / 16.0) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn landau_constant_values() {
        assert_eq!(landau_constant(2.0).unwrap(), 0.25);
        assert!((landau_constant(3.0).unwrap() - (8.0 / 27.0)).abs() < 1e-16);
        assert!(landau_constant(1.0).is_err());
    }

    #[test]
    fn scalar_base_points_vanish() {
        for &a in &[-3.0, -1.0, 0.0, 0.5, 1.0, 2.5] {
            assert_eq!(scalar_eval(ScalarFunctionId::HAlpha(a), 0.0).unwrap(), 0.0);
            assert_eq!(scalar_eval(ScalarFunctionId::GAlpha(a), 0.0).unwrap(), 0.0);
            assert_eq!(scalar_eval(ScalarFunctionId::FAlpha(a), 1.0).unwrap(), 0.0);
        }
        assert!(scalar_eval(ScalarFunctionId::HAlpha(0.0), 1.0).is_err());
        assert!(scalar_eval(ScalarFunctionId::FAlpha(2.0), 0.9).is_err());
    }

    #[test]
    fn scalar_frozen_values() {
        // g(1) = 27/8.
        let g1 = scalar_eval(ScalarFunctionId::SmallG, 1.0).unwrap();
        assert!((g1 - 27.0 / 8.0).abs() < 1e-14);
        // Q(2) by independent assembly: 2 − 3(3/4)^{5/2} + (1/4)(2/3)^{3/2}.
        let q2 = scalar_eval(ScalarFunctionId::Q, 2.0).unwrap();
        let want = 2.0 - 3.0 * 0.75f64.powf(2.5) + 0.25 * (2.0f64 / 3.0).powf(1.5);
        assert!((q2 - want).abs() < 1e-14);
        assert!((q2 - 0.67466).abs() < 1e-4);
        assert!(q2 > 0.5);
    }

    #[test]
    fn l_alpha_definition_consistency() {
        // Y^{(1−α)/2} L_α(Y) must equal the defining cubic.
        for &a in &[1.2, 2.0, 2.8] {
            for i in 0..10 {
                let y = 0.75 + 0.25 * i as f64 / 9.0;
                let lhs = y.powf(0.5 * (1.0 - a)) * l_alpha(a, y);
                let rhs = l_alpha_cubic(a, y);
                assert!((lhs - rhs).abs() <= 1e-12 * (rhs.abs() + 1.0));
            }
        }
    }

    #[test]
    fn dd_route_agrees_where_it_can() {
        for &a in &[-2.0, -0.5] {
            for &x in &[1.0 / 64.0, 0.1, 0.5, 0.9] {
                let f = scalar_eval(ScalarFunctionId::HAlpha(a), x).unwrap();
                let d = scalar_eval_dd(ScalarFunctionId::HAlpha(a), x).unwrap().to_f64();
                assert!((f - d).abs() <= 1e-12 * d.abs(), "a={a} x={x}: {f} vs {d}");
            }
        }
        for &a in &[1.5, 2.5] {
            for &x in &[1.0 + 1.0 / 64.0, 1.25, 1.5] {
                let f = scalar_eval(ScalarFunctionId::FAlpha(a), x).unwrap();
                let d = scalar_eval_dd(ScalarFunctionId::FAlpha(a), x).unwrap().to_f64();
                assert!((f - d).abs() <= 1e-12 * d.abs(), "a={a} x={x}");
            }
        }
    }

    #[test]
    fn lower_bound_scans_from_the_analysis() {
        // H_{−2}(x) > (9/4)x² on (0,1).
        let r = lower_bound_scan(
            |x| h_alpha(-2.0, x),
            |x| 2.25 * x * x,
            0.0,
            1.0,
            DEFAULT_SCAN_POINTS,
        );
        assert!(r.passes_strict(), "H margin {} at {}", r.min_margin, r.argmin);
        // G_α(x) ≥ ((α−1)²/4)x² on [0,1] for a few α in [0,1].
        for &a in &[0.0, 0.3, 0.7, 1.0] {
            let r = lower_bound_scan(
                |x| g_alpha(a, x),
                |x| 0.25 * (a - 1.0).powi(2) * x * x,
                0.0,
                1.0,
                DEFAULT_SCAN_POINTS,
            );
            assert!(r.min_margin >= -1e-15, "G alpha={a}: {}", r.min_margin);
        }
        // F_α(x) ≥ ((α−1)²/4)(x−1)² on I₀ for α > 1 samples.
        for &a in &[1.5, 2.0, 2.9] {
            let r = lower_bound_scan(
                |x| f_alpha(a, x),
                |x| 0.25 * (a - 1.0).powi(2) * (x - 1.0).powi(2),
                1.0,
                1.5,
                DEFAULT_SCAN_POINTS,
            );
            assert!(r.min_margin >= -1e-15, "F alpha={a}: {}", r.min_margin);
        }
        // Q(α) > (α−1)²/2 and G(α) < 0 on (1, 3) at step 1e−3.
        let r = lower_bound_scan(
            q_of_alpha,
            |a| 0.5 * (a - 1.0).powi(2),
            1.0 + 1e-3,
            3.0 - 1e-3,
            2000,
        );
        assert!(r.min_margin > 1e-9, "Q margin {}", r.min_margin);
        let r = lower_bound_scan(|_| 0.0, big_g, 1.0 + 1e-3, 3.0 - 1e-3, 2000);
        assert!(r.min_margin > 0.0, "G(α) not negative: {}", r.min_margin);
        // g decreasing and positive on [1, 3].
        let mut prev = f64::INFINITY;
        for i in 0..=200 {
            let a = 1.0 + 2.0 * i as f64 / 200.0;
            let v = small_g(a);
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
    }

    proptest! {
        #[test]
        fn dual_routes_agree_on_overlap_band(n in 32u64..=128) {
            let k_d = kpp_weight(n, EvalMode::Direct).unwrap();
            let k_s = kpp_weight(n, EvalMode::Series).unwrap();
            prop_assert!((k_d - k_s).abs() <= 1e-12 * k_d.abs());
            let i_d = improved_rellich2_weight(n, 64, EvalMode::Direct).unwrap();
            let i_s = improved_rellich2_weight(n, 64, EvalMode::Series).unwrap();
            prop_assert!((i_d - i_s).abs() <= 1e-12 * i_d.abs());
        }

        #[test]
        fn hardy_dual_routes_agree(n in 32u64..=128, a in -4.0f64..-0.1) {
            let d = shifted_hardy_weight(a, n, EvalMode::Direct).unwrap();
            let s = shifted_hardy_weight(a, n, EvalMode::Series).unwrap();
            prop_assert!((d - s).abs() <= 1e-12 * d.abs(), "{d} vs {s}");
        }

        #[test]
        fn direct_hardy_dual_routes_agree(n in 32u64..=128, a0 in 0.0f64..0.9, a1 in 1.1f64..3.0) {
            // Away from α = 1, where the weight degenerates to 0 and relative
            // agreement of near-zero values is not meaningful.
            for a in [a0, a1] {
                let d = direct_hardy_weight(a, n, EvalMode::Direct).unwrap();
                let s = direct_hardy_weight(a, n, EvalMode::Series).unwrap();
                prop_assert!((d - s).abs() <= 1e-12 * d.abs(), "a={a} n={n}: {d} vs {s}");
            }
        }

        #[test]
        fn certified_bounds_hold(exp in 0u32..=6, frac in 1u64..=999) {
            // n spread over 1..10⁶ on a log-ish grid.
            let n = (frac * 10u64.pow(exp) / 1000).max(2);
            prop_assert!(kpp_weight(n, EvalMode::Auto).unwrap() >= kpp_bound(n));
            prop_assert!(shifted_hardy_weight(-2.0, n, EvalMode::Auto).unwrap() >= hardy_bound(-2.0, n));
            prop_assert!(direct_hardy_weight(0.5, n, EvalMode::Auto).unwrap() >= hardy_bound(0.5, n));
            prop_assert!(direct_hardy_weight(2.5, n, EvalMode::Auto).unwrap() >= hardy_bound(2.5, n));
            if n >= 3 {
                prop_assert!(leray_weight(n, LERAY_DEFAULT_EPS).unwrap().margin >= 0.0);
            }
        }
    }
}
