//! ℓ^p analogues on graphs: signed powers, the p-gradient energy, the
//! Picone inequality, the derived p-Hardy weight, and the classical
//! Landau–Hardy inequality for nonnegative sequences.

use crate::graph::{Graph, GraphError, Vertex, VertexFunction};
use crate::seq::FiniteSequence;
use crate::sum::KahanSum;
use crate::weights::landau_constant;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("exponent p must exceed 1, got {p}")]
    BadP { p: f64 },
    #[error("signed power requires a positive exponent, got {beta}")]
    BadBeta { beta: f64 },
    #[error("reference function must be positive at vertex {vertex}, got {value}")]
    NonpositiveF { vertex: Vertex, value: f64 },
    #[error("sequence entry at n = {n} is negative: {value}")]
    NegativeEntry { n: i64, value: f64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Odd power extension `t^β := |t|^{β−1} t` for `β > 0`.
pub fn signed_power(t: f64, beta: f64) -> f64 {
    debug_assert!(beta > 0.0);
    if t == 0.0 {
        0.0
    } else {
        t.signum() * t.abs().powf(beta)
    }
}

/// `|∇u|^p_p(x) = ½ Σ_{y∼x} b(x,y)^{p−1} |u(x) − u(y)|^p`.
pub fn lp_grad_norm(
    g: &Graph,
    u: &VertexFunction,
    p: f64,
    x: Vertex,
) -> Result<f64, LpError> {
    if p <= 1.0 {
        return Err(LpError::BadP { p });
    }
    let ux = u.get(x);
    let mut acc = KahanSum::new();
    for &(y, b) in g.neighbors(x)? {
        acc.add(b.powf(p - 1.0) * (ux - u.get(y)).abs().powf(p));
    }
    Ok(0.5 * acc.value())
}

/// Pointwise Picone residual on the edge `(x, y)`:
/// `|∇u(x,y)|^p − ∇(u^p/f^{p−1})(x,y) · (∇f(x,y))^{p−1}`
/// with the signed-power convention. Nonnegative for `u ≥ 0`, zero when
/// `u` is a constant multiple of `f`.
pub fn picone_residual(
    g: &Graph,
    u: &VertexFunction,
    f: &VertexFunction,
    p: f64,
    x: Vertex,
    y: Vertex,
) -> Result<f64, LpError> {
    if p <= 1.0 {
        return Err(LpError::BadP { p });
    }
    g.neighbors(x)?;
    g.neighbors(y)?;
    for v in [x, y] {
        if f.get(v) <= 0.0 {
            return Err(LpError::NonpositiveF {
                vertex: v,
                value: f.get(v),
            });
        }
    }
    let (ux, uy) = (u.get(x), u.get(y));
    let (fx, fy) = (f.get(x), f.get(y));
    let grad_u = ux - uy;
    let grad_f = fx - fy;
    let ratio = ux.powf(p) / fx.powf(p - 1.0) - uy.powf(p) / fy.powf(p - 1.0);
    Ok(grad_u.abs().powf(p) - ratio * signed_power(grad_f, p - 1.0))
}

/// The p-Hardy weight produced by the positive reference `f`:
/// `−div[V (∇f)_b^{p−1}](x) / f(x)^{p−1}` with
/// `(∇f)_b^{p−1}(x,y) = b(x,y)^{p−2} (∇f(x,y))^{p−1}`. Expanded locally:
/// `½ Σ_{y∼x} b^{p−1} (V(x)+V(y)) (f(x)−f(y))^{p−1} / f(x)^{p−1}`.
/// At `p = 2` this is `T(V, f)(x)/f(x)` exactly.
pub fn lp_hardy_weight(
    g: &Graph,
    v: &VertexFunction,
    f: &VertexFunction,
    p: f64,
    x: Vertex,
) -> Result<f64, LpError> {
    if p <= 1.0 {
        return Err(LpError::BadP { p });
    }
    if f.get(x) <= 0.0 {
        return Err(LpError::NonpositiveF {
            vertex: x,
            value: f.get(x),
        });
    }
    let fx = f.get(x);
    let mut acc = KahanSum::new();
    for &(y, b) in g.neighbors(x)? {
        // Neighbors may carry f = 0 (boundary vertices where test functions
        // vanish); only negative references are rejected.
        if f.get(y) < 0.0 {
            return Err(LpError::NonpositiveF {
                vertex: y,
                value: f.get(y),
            });
        }
        acc.add(
            b.powf(p - 1.0)
                * (v.get(x) + v.get(y))
                * signed_power(fx - f.get(y), p - 1.0),
        );
    }
    Ok(0.5 * acc.value() / fx.powf(p - 1.0))
}

/// Both sides of the p-Hardy inequality for a nonnegative, finitely
/// supported `u`: `lhs = Σ V|∇u|^p_p`, `rhs = Σ w·u^p`. The margin
/// `lhs − rhs` equals the weighted sum of edge Picone residuals, hence is
/// nonnegative up to roundoff.
pub fn lp_form_margin(
    g: &Graph,
    v: &VertexFunction,
    f: &VertexFunction,
    p: f64,
    u: &VertexFunction,
) -> Result<(f64, f64), LpError> {
    let mut lhs = KahanSum::new();
    let mut rhs = KahanSum::new();
    for x in g.vertices() {
        lhs.add(v.get(x) * lp_grad_norm(g, u, p, x)?);
        let ux = u.get(x);
        if ux != 0.0 {
            rhs.add(lp_hardy_weight(g, v, f, p, x)? * ux.powf(p));
        }
    }
    Ok((lhs.value(), rhs.value()))
}

/// Result of a Landau–Hardy evaluation.
#[derive(Debug, Clone, Copy)]
pub struct LandauReport {
    /// `((p−1)/p)^p Σ_{n=1}^{T} (prefix mean)^p`, `T` = support end + tail.
    pub lhs: f64,
    /// `Σ a_n^p`.
    pub rhs: f64,
    /// `rhs − lhs` (nonnegative; the inequality also holds truncated).
    pub margin: f64,
    /// Analytic bound on the omitted tail `Σ_{n>T}`: `c_p S^p T^{1−p}/(p−1)`.
    pub tail_bound: f64,
}

const LANDAU_TAIL_TERMS: i64 = 10_000;

/// Landau–Hardy inequality
/// `((p−1)/p)^p Σ ((a_1+…+a_n)/n)^p ≤ Σ a_n^p` for nonnegative `a` with
/// support in `n ≥ 1`. The infinite left side is truncated at the support
/// end plus 10⁴ terms; the analytic remainder bound is reported.
pub fn landau_check(a: &FiniteSequence, p: f64) -> Result<LandauReport, LpError> {
    if p <= 1.0 {
        return Err(LpError::BadP { p });
    }
    for (n, v) in a.iter() {
        if v < 0.0 {
            return Err(LpError::NegativeEntry { n, value: v });
        }
    }
    let c = landau_constant(p).map_err(|_| LpError::BadP { p })?;
    let end = a.support().map(|(_, hi)| hi).unwrap_or(0).max(1);
    let cutoff = end + LANDAU_TAIL_TERMS;
    let mut prefix = KahanSum::new();
    let mut lhs = KahanSum::new();
    let mut rhs = KahanSum::new();
    for n in 1..=cutoff {
        let an = a.get(n);
        prefix.add(an);
        lhs.add((prefix.value() / n as f64).powf(p));
        if an != 0.0 {
            rhs.add(an.powf(p));
        }
    }
    let total = prefix.value();
    let lhs = c * lhs.value();
    let rhs = rhs.value();
    let tail_bound = c * total.powf(p) * (cutoff as f64).powf(1.0 - p) / (p - 1.0);
    Ok(LandauReport {
        lhs,
        rhs,
        margin: rhs - lhs,
        tail_bound,
    })
}
