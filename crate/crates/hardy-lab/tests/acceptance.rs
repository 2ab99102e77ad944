//! End-to-end acceptance gate: ten numbered criteria, each a separate test
//! printing one `criterion N: PASS/FAIL` line (visible with
//! `cargo test --test acceptance -- --nocapture`).

use hardy_lab::graph::{
    self, identity_instance, leibniz_green_residual, random_graph, random_vertex_function,
    t_functional, IdentityKind,
};
use hardy_lab::lattice::{zd_inequality_check, zd_weight_exact};
use hardy_lab::lp::{landau_check, lp_hardy_weight, picone_residual};
use hardy_lab::seq::{BoundaryOrder, FiniteSequence};
use hardy_lab::sharpness::{
    assemble_form, continuum_probe, counterexample_build, eig_sweep, min_generalized_eig,
    sharp_constant, TestFunction,
};
use hardy_lab::sum::{Dd, KahanSum};
use hardy_lab::weights::{
    direct_hardy_weight, gks_reference_weight, improved_rellich2_coeff,
    improved_rellich2_tail_coeff, kpp_series_coeff, leray_weight, lower_bound_scan, sample,
    scalar_eval, scalar_eval_dd, shifted_hardy_weight, EvalMode, ScalarFunctionId, WeightFamily,
    DEFAULT_SCAN_POINTS, LERAY_DEFAULT_EPS,
};

use rand::Rng as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn verdict(criterion: u32, label: &str, ok: bool, detail: &str) {
    let status = if ok { "PASS" } else { "FAIL" };
    println!("criterion {criterion}: {status} — {label}: {detail}");
    assert!(ok, "criterion {criterion} ({label}) failed: {detail}");
}

// ---------------------------------------------------------------------------
// 1. Exact identity suite on random graphs.
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_identity_suite() {
    const TRIALS: u64 = 1000;
    const TOL: f64 = 1e-10;
    let kinds = [
        ("first_order", IdentityKind::FirstOrder),
        ("second_order", IdentityKind::SecondOrder),
        ("iterated_1", IdentityKind::Iterated(1)),
        ("iterated_2", IdentityKind::Iterated(2)),
        ("iterated_3", IdentityKind::Iterated(3)),
        ("odd_1", IdentityKind::OddOrder(1)),
        ("odd_2", IdentityKind::OddOrder(2)),
    ];
    let mut worst: f64 = 0.0;
    let mut worst_at = String::new();
    for trial in 0..TRIALS {
        // Tree sizes cycle through 10..=160; plus the 31-vertex tail every
        // graph stays at or under 200 vertices.
        let size = 10 + (trial as usize * 7) % 151;
        let inst = identity_instance(size, 3, trial);
        let v = random_vertex_function(inst.graph.vertices(), 0.1, 2.0, trial ^ 0x9e3779b9);
        for (name, kind) in kinds {
            let check = graph::identity_residual(&inst.graph, &v, &inst.f, &inst.u, kind)
                .expect("hypotheses hold by construction");
            let rel = check.relative_residual();
            if rel > worst {
                worst = rel;
                worst_at = format!("{name} trial {trial}");
            }
        }
        let f = random_vertex_function(inst.graph.vertices(), -1.0, 1.0, trial ^ 0x5bd1e995);
        let h = random_vertex_function(inst.graph.vertices(), -1.0, 1.0, trial ^ 0xc2b2ae35);
        let rel = leibniz_green_residual(&inst.graph, &f, &h).unwrap();
        if rel > worst {
            worst = rel;
            worst_at = format!("leibniz_green trial {trial}");
        }
    }
    verdict(
        1,
        "identity suite",
        worst <= TOL,
        &format!("max relative residual {worst:.3e} ({worst_at}) over {TRIALS} trials x 8 checks"),
    );
}

// ---------------------------------------------------------------------------
// 2. Series coefficients against their closed rational values and an
//    independent extrapolation oracle.
// ---------------------------------------------------------------------------

/// Neville polynomial extrapolation of `(x_i, y_i)` to `x = 0`, in
/// double-double arithmetic.
fn neville_to_zero(xs: &[Dd], ys: &[Dd]) -> Dd {
    let n = xs.len();
    let mut t = ys.to_vec();
    for level in 1..n {
        for i in 0..n - level {
            // p_i(0) = (x_{i+level} p_i - x_i p_{i+1}) / (x_{i+level} - x_i)
            let num = xs[i + level].mul(t[i]).sub(xs[i].mul(t[i + 1]));
            t[i] = num.div(xs[i + level].sub(xs[i]));
        }
    }
    t[0]
}

#[test]
fn criterion_02_weight_coefficients() {
    let mut ok = true;
    let mut notes = Vec::new();
    // First-order series coefficients.
    for (k, want) in [(1u32, 0.25), (2, 5.0 / 64.0), (3, 21.0 / 512.0)] {
        let got = kpp_series_coeff(k);
        if (got - want).abs() > 1e-15 * want {
            ok = false;
            notes.push(format!("kpp c_{k} = {got} (want {want})"));
        }
    }
    // Reference second-order series: extract the two leading coefficients
    // from truncated evaluations at n = 2 (dyadic, so exact).
    let c1 = gks_reference_weight(2, 1).unwrap() * 16.0;
    let c2 = (gks_reference_weight(2, 2).unwrap() - c1 / 16.0) * 64.0;
    if (c1 - 9.0 / 16.0).abs() > 1e-15 || (c2 - 210.0 / 256.0).abs() > 1e-14 {
        ok = false;
        notes.push(format!("reference coefficients {c1}, {c2}"));
    }
    // Improved second-order weight: the n^-4 and n^-6 coefficients are
    // exact rationals.
    let c4 = improved_rellich2_coeff(2) / 4.0;
    let c6 = improved_rellich2_coeff(4) / 4.0 + improved_rellich2_tail_coeff(2);
    if c4 != 9.0 / 16.0 || c6 != 213.0 / 128.0 {
        ok = false;
        notes.push(format!("n^-4 coeff {c4} (want 9/16), n^-6 coeff {c6} (want 213/128)"));
    }
    // The n^-5 coefficient, extracted from the independent closed-form route
    // A_n = n^-2 H_{-2}(1/n) by extended-precision Richardson extrapolation,
    // decides between the two candidate values 15/16 and 29/32.
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for e in 4..=10u32 {
        let n = 1u64 << e; // power of two, so 1/n is exact
        let x = 1.0 / n as f64;
        let h = scalar_eval_dd(ScalarFunctionId::HAlpha(-2.0), x).unwrap();
        let xd = Dd::from_f64(x);
        // r(x) = (H(x)/4 - (9/4) x^2 /4 ... ) : A_n/4 = x^2 H/4; the n^-5
        // coefficient of the weight is (A/4 - (9/16)x^4)/x^5 -> a_3/4.
        let a_quarter = h.mul(xd).mul(xd).mul_f64(0.25);
        let lead = xd.powi(4).mul_f64(9.0 / 16.0);
        ys.push(a_quarter.sub(lead).div(xd.powi(5)));
        xs.push(xd);
    }
    let oracle = neville_to_zero(&xs, &ys).to_f64();
    let a3_quarter = improved_rellich2_coeff(3) / 4.0;
    let d_direct = (oracle - a3_quarter).abs();
    let d_15_16 = (oracle - 15.0 / 16.0).abs();
    let d_29_32 = (oracle - 29.0 / 32.0).abs();
    let candidate = if d_15_16 < d_29_32 { "15/16" } else { "29/32" };
    notes.push(format!(
        "n^-5 coefficient oracle {oracle:.15} matches candidate {candidate} \
         (|oracle - a3/4| = {d_direct:.2e})"
    ));
    if d_direct > 1e-12 || d_15_16.min(d_29_32) > 1e-12 {
        ok = false;
    }
    verdict(2, "weight coefficients", ok, &notes.join("; "));
}

// ---------------------------------------------------------------------------
// 3. Dual-evaluation agreement on the overlap band.
// ---------------------------------------------------------------------------

#[test]
fn criterion_03_dual_evaluation() {
    let families = [
        WeightFamily::Kpp,
        WeightFamily::GksReference,
        WeightFamily::ShiftedHardy(-0.5),
        WeightFamily::ShiftedHardy(-2.0),
        WeightFamily::ShiftedHardy(-4.0),
        WeightFamily::DirectHardy(0.0),
        WeightFamily::DirectHardy(0.5),
        WeightFamily::DirectHardy(2.0),
        WeightFamily::DirectHardy(3.5),
        WeightFamily::DirectHardy(6.0),
        WeightFamily::Leray,
        WeightFamily::ImprovedRellich2,
        WeightFamily::LandauConstant(1.5),
    ];
    let mut worst: f64 = 0.0;
    let mut worst_at = String::new();
    for family in families {
        for n in 32..=128u64 {
            let s = sample(family, n).unwrap();
            let rel = (s.direct - s.series).abs() / s.direct.abs();
            if rel > worst {
                worst = rel;
                worst_at = format!("{} at n = {n}", family.name());
            }
        }
    }
    verdict(
        3,
        "dual evaluation",
        worst <= 1e-12,
        &format!("max |direct - series|/direct = {worst:.3e} ({worst_at})"),
    );
}

// ---------------------------------------------------------------------------
// 4. Eigenvalue sweeps: monotone, above the sharp constant, closed form.
// ---------------------------------------------------------------------------

#[test]
fn criterion_04_sharpness_sweeps() {
    let ns = [100usize, 1000, 10000];
    let mut ok = true;
    let mut notes = Vec::new();
    for ell in 1..=3u32 {
        let rows = eig_sweep(ell, &ns, 1e-10).unwrap();
        let c = sharp_constant(ell);
        for w in rows.windows(2) {
            if w[1].lambda_min >= w[0].lambda_min {
                ok = false;
                notes.push(format!(
                    "order {ell}: not decreasing between N = {} and {}",
                    w[0].n, w[1].n
                ));
            }
        }
        for r in &rows {
            if r.lambda_min <= c {
                ok = false;
                notes.push(format!(
                    "order {ell}, N = {}: lambda_min = {} <= {c}",
                    r.n, r.lambda_min
                ));
            }
        }
        notes.push(format!(
            "order {ell}: lambda_min = {:?} > {c:.4}",
            rows.iter().map(|r| r.lambda_min).collect::<Vec<_>>()
        ));
    }
    // Smallest 2x2 truncation in closed form.
    let form = assemble_form(1, 2).unwrap();
    let lam = min_generalized_eig(&form, 1e-12, 400).unwrap().lambda_min;
    let want = 5.0 - 13.0f64.sqrt();
    if (lam - want).abs() > 1e-12 {
        ok = false;
        notes.push(format!("closed form: {lam} vs {want}"));
    }
    verdict(4, "sharpness sweeps", ok, &notes.join("; "));
}

// ---------------------------------------------------------------------------
// 5. Nonnegativity of all inequality forms on random admissible sequences.
// ---------------------------------------------------------------------------

fn sq_sum(u: &FiniteSequence, from: i64, weight: impl Fn(i64) -> f64) -> f64 {
    let mut acc = KahanSum::new();
    for (n, v) in u.iter() {
        if n >= from {
            acc.add(v * v * weight(n));
        }
    }
    acc.value()
}

/// Random sequence supported in `[start, start + len)`.
fn random_seq(rng: &mut ChaCha8Rng, start: i64, len: i64) -> FiniteSequence {
    FiniteSequence::from_fn(start..=start + len - 1, |_| rng.gen_range(-1.0..1.0))
}

#[test]
fn criterion_05_form_nonnegativity() {
    const TRIALS: u64 = 10_000;
    const MAX_N: i64 = 64;
    let mut ok = true;
    let mut notes = Vec::new();
    let mut run = |label: String,
                   lhs: &dyn Fn(&FiniteSequence) -> f64,
                   rhs: &dyn Fn(&FiniteSequence) -> f64,
                   start: i64,
                   seed: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = f64::INFINITY;
        for _ in 0..TRIALS {
            let len = rng.gen_range(4..=MAX_N - start - 1);
            let u = random_seq(&mut rng, start, len);
            let (l, r) = (lhs(&u), rhs(&u));
            let margin = (l - r) / (l.abs() + r.abs());
            worst = worst.min(margin);
        }
        if worst < -1e-12 {
            ok = false;
        }
        notes.push(format!("{label}: min normalized margin {worst:.2e}"));
    };
    // Higher-order forms: Σ|D^{l/2}u|² ≥ C_l Σ u²/n^{2l}, u vanishing
    // through l-1.
    for ell in 1..=4u32 {
        let c = sharp_constant(ell);
        let order = BoundaryOrder::new(ell).unwrap();
        run(
            format!("order {ell}"),
            &|u| {
                let d = u.half_laplace_power(order);
                sq_sum(&d, ell as i64 - 1, |_| 1.0)
            },
            &|u| c * sq_sum(u, ell as i64, |n| (n as f64).powi(-2 * ell as i32)),
            ell as i64,
            1000 + ell as u64,
        );
    }
    // Shifted first-order family, negative exponents.
    for alpha in [-0.5, -2.0, -4.0] {
        let w: Vec<f64> = (0..=MAX_N as u64 + 1)
            .map(|n| {
                if n < 2 {
                    0.0
                } else {
                    shifted_hardy_weight(alpha, n, EvalMode::Auto).unwrap()
                }
            })
            .collect();
        run(
            format!("shifted alpha = {alpha}"),
            &|u| {
                let g = u.grad();
                sq_sum(&g, 2, |n| ((n - 1) as f64).powf(alpha))
            },
            &move |u| sq_sum(u, 2, |n| w[n as usize]),
            2,
            2000 + alpha.to_bits() as u64 % 97,
        );
    }
    // Direct first-order family, nonnegative exponents (test functions
    // vanish at n = 0).
    for alpha in [0.0, 0.5, 2.0, 3.5, 6.0] {
        let w: Vec<f64> = (0..=MAX_N as u64 + 1)
            .map(|n| {
                if n < 1 {
                    0.0
                } else {
                    direct_hardy_weight(alpha, n, EvalMode::Auto).unwrap()
                }
            })
            .collect();
        run(
            format!("direct alpha = {alpha}"),
            &|u| {
                let g = u.grad();
                sq_sum(&g, 1, |n| (n as f64).powf(alpha))
            },
            &move |u| sq_sum(u, 1, |n| w[n as usize]),
            1,
            3000 + alpha.to_bits() as u64 % 97,
        );
    }
    // Logarithmic critical case.
    {
        let w: Vec<f64> = (0..=MAX_N as u64 + 1)
            .map(|n| {
                if n < 2 {
                    0.0
                } else {
                    leray_weight(n, LERAY_DEFAULT_EPS).unwrap().exact
                }
            })
            .collect();
        run(
            "logarithmic".to_string(),
            &|u| {
                let g = u.grad();
                sq_sum(&g, 2, |n| n as f64)
            },
            &move |u| sq_sum(u, 2, |n| w[n as usize]),
            2,
            4000,
        );
    }
    verdict(5, "form nonnegativity", ok, &notes.join("; "));
}

// ---------------------------------------------------------------------------
// 6. Scalar comparison-function claims on dense grids.
// ---------------------------------------------------------------------------

#[test]
fn criterion_06_scalar_claims() {
    let mut ok = true;
    let mut notes = Vec::new();
    // Q(a) > (a-1)²/2 and G(a) < 0 on a in (1, 3), step 1e-3.
    let mut min_q = f64::INFINITY;
    let mut max_g = f64::NEG_INFINITY;
    let mut a = 1.0 + 1e-3;
    while a <= 3.0 - 1e-3 + 1e-12 {
        let q = scalar_eval(ScalarFunctionId::Q, a).unwrap();
        min_q = min_q.min(q - 0.5 * (a - 1.0) * (a - 1.0));
        max_g = max_g.max(scalar_eval(ScalarFunctionId::BigG, a).unwrap());
        a += 1e-3;
    }
    if min_q <= 0.0 || max_g >= 0.0 {
        ok = false;
    }
    notes.push(format!("min Q margin {min_q:.3e}, max G {max_g:.3e}"));
    // g decreasing and positive on [1, 3].
    let mut prev = f64::INFINITY;
    let mut g_ok = true;
    for i in 0..=4000 {
        let a = 1.0 + 2.0 * i as f64 / 4000.0;
        let v = scalar_eval(ScalarFunctionId::SmallG, a).unwrap();
        if v <= 0.0 || v >= prev {
            g_ok = false;
        }
        prev = v;
    }
    if !g_ok {
        ok = false;
    }
    notes.push(format!("g decreasing and positive: {g_ok}"));
    // Grid scans of the quadratic lower bounds.
    let scans: Vec<(String, ScalarFunctionId, Box<dyn Fn(f64) -> f64>)> = [-0.5, -2.0, -6.0]
        .iter()
        .map(|&al| {
            let b: Box<dyn Fn(f64) -> f64> =
                Box::new(move |x: f64| 0.25 * (1.0 - al) * (1.0 - al) * x * x);
            (format!("H_{al}"), ScalarFunctionId::HAlpha(al), b)
        })
        .chain([0.0, 0.5, 1.0].iter().map(|&al| {
            let b: Box<dyn Fn(f64) -> f64> =
                Box::new(move |x: f64| 0.25 * (al - 1.0) * (al - 1.0) * x * x);
            (format!("G_{al}"), ScalarFunctionId::GAlpha(al), b)
        }))
        .chain([1.5, 2.5, 3.0, 5.0].iter().map(|&al| {
            let b: Box<dyn Fn(f64) -> f64> =
                Box::new(move |x: f64| 0.25 * (al - 1.0) * (al - 1.0) * (x - 1.0) * (x - 1.0));
            (format!("F_{al}"), ScalarFunctionId::FAlpha(al), b)
        }))
        .collect();
    for (label, fid, bound) in scans {
        let (lo, hi) = fid.interval();
        let hi = if matches!(fid, ScalarFunctionId::HAlpha(_)) {
            hi - 1e-9
        } else {
            hi
        };
        let report = lower_bound_scan(
            |x| scalar_eval(fid, x).unwrap(),
            &bound,
            lo,
            hi,
            DEFAULT_SCAN_POINTS,
        );
        // The strict inequality is claimed for H; the G and F bounds are
        // stated non-strictly (G_1 attains its bound identically).
        let passed = if matches!(fid, ScalarFunctionId::HAlpha(_)) {
            report.passes_strict()
        } else {
            report.passes()
        };
        if !passed {
            ok = false;
            notes.push(format!(
                "{label}: min margin {:.3e} at {:.6}",
                report.min_margin, report.argmin
            ));
        }
    }
    notes.push("all lower-bound scans passed".to_string());
    verdict(6, "scalar claims", ok, &notes.join("; "));
}

// ---------------------------------------------------------------------------
// 7. The counterexample family scales as required.
// ---------------------------------------------------------------------------

#[test]
fn criterion_07_counterexample() {
    let results: Vec<(u64, f64, f64)> = [100u64, 1000, 10000]
        .iter()
        .map(|&m| {
            let c = counterexample_build(m); // asserts the exact zero-sum internally
            (m, c.lhs, c.rhs_partial)
        })
        .collect();
    let ks: Vec<f64> = results.iter().map(|&(m, lhs, _)| lhs * m as f64).collect();
    let k_stable = ks.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        <= 1.5 * ks.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio0 = results[0].2 / results[0].1;
    let ratio2 = results[2].2 / results[2].1;
    let growth = ratio2 > 10.0 * ratio0;
    verdict(
        7,
        "counterexample family",
        k_stable && growth,
        &format!(
            "lhs*M = {ks:?} (stable within x1.5: {k_stable}); \
             ratio {ratio0:.2} -> {ratio2:.2} (>10x: {growth})"
        ),
    );
}

// ---------------------------------------------------------------------------
// 8. Continuum comparison at doubling scales.
// ---------------------------------------------------------------------------

#[test]
fn criterion_08_continuum_limit() {
    let probes: Vec<_> = [256u64, 512, 1024]
        .iter()
        .map(|&m| continuum_probe(TestFunction::StandardBump, m, 2).unwrap())
        .collect();
    let mut ok = true;
    let mut notes = Vec::new();
    // The discrete sums must approach the integrals with the error halving
    // (within 25%) at each doubling of M, for both the energy and the mass.
    for (label, discrete, continuous) in [
        (
            "energy",
            probes.iter().map(|p| p.discrete_lhs).collect::<Vec<_>>(),
            probes[0].continuous_lhs,
        ),
        (
            "mass",
            probes.iter().map(|p| p.discrete_rhs).collect::<Vec<_>>(),
            probes[0].continuous_rhs,
        ),
    ] {
        for i in 0..2 {
            let e_coarse = (discrete[i] - continuous).abs();
            let e_fine = (discrete[i + 1] - continuous).abs();
            let ratio = e_coarse / e_fine;
            let halves = (1.5..=2.5).contains(&ratio);
            if !halves {
                ok = false;
            }
            notes.push(format!(
                "{label} error {e_coarse:.3e} -> {e_fine:.3e} (ratio {ratio:.2}, halving: {halves})"
            ));
        }
    }
    let last = probes.last().unwrap();
    let ratio = last.discrete_lhs / last.discrete_rhs;
    let above = ratio >= 9.0 / 16.0 - 0.05;
    if !above {
        ok = false;
    }
    notes.push(format!("final discrete energy/mass ratio {ratio:.3} (>= 0.5125: {above})"));
    verdict(8, "continuum limit", ok, &notes.join("; "));
}

// ---------------------------------------------------------------------------
// 9. Lattice inequality and leading coefficient.
// ---------------------------------------------------------------------------

#[test]
fn criterion_09_lattice() {
    let mut ok = true;
    let mut notes = Vec::new();
    for (d, alpha) in [(2usize, 1.0), (3, 0.0), (4, 2.0)] {
        let report = zd_inequality_check(alpha, d, 15, 200, 0).unwrap();
        if report.min_margin < -1e-12 {
            ok = false;
        }
        let mut x = vec![0i64; d];
        x[0] = 50;
        let lead = (d as f64 - 2.0 + alpha).powi(2) / 4.0;
        let ratio = zd_weight_exact(alpha, d, &x).unwrap() * 50f64.powf(2.0 - alpha) / lead;
        if (ratio - 1.0).abs() > 0.1 {
            ok = false;
        }
        notes.push(format!(
            "(d, alpha) = ({d}, {alpha}): min margin {:.2e}, leading ratio {ratio:.4}",
            report.min_margin
        ));
    }
    verdict(9, "lattice inequality", ok, &notes.join("; "));
}

// ---------------------------------------------------------------------------
// 10. l^p machinery: Picone residuals, averaging inequality, p = 2 reduction.
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_lp() {
    let mut ok = true;
    let mut notes = Vec::new();
    // Edgewise Picone residuals on random graphs, 1000 edges per exponent.
    for p in [1.5f64, 2.0, 3.0] {
        let mut min_res = f64::INFINITY;
        let mut edges = 0u32;
        let mut seed = p.to_bits();
        'outer: loop {
            seed = seed.wrapping_add(1);
            let g = random_graph(40, 25, seed);
            let f = random_vertex_function(g.vertices(), 0.5, 2.0, seed ^ 0xa5a5a5a5);
            let u = random_vertex_function(g.vertices(), 0.0, 1.0, seed ^ 0x3c6ef372);
            for x in g.vertices() {
                for &(y, _) in g.neighbors(x).unwrap() {
                    if x < y {
                        min_res = min_res.min(picone_residual(&g, &u, &f, p, x, y).unwrap());
                        edges += 1;
                        if edges >= 1000 {
                            break 'outer;
                        }
                    }
                }
            }
        }
        if min_res < -1e-12 {
            ok = false;
        }
        notes.push(format!("p = {p}: min Picone residual {min_res:.2e}"));
    }
    // Averaging inequality on random nonnegative sequences.
    for p in [1.1f64, 2.0, 3.0] {
        let mut rng = ChaCha8Rng::seed_from_u64(p.to_bits());
        let mut min_margin = f64::INFINITY;
        for _ in 0..10_000 {
            let len = rng.gen_range(1..=40);
            let a = FiniteSequence::from_fn(1..=len, |_| rng.gen::<f64>());
            min_margin = min_margin.min(landau_check(&a, p).unwrap().margin);
        }
        if min_margin < 0.0 {
            ok = false;
        }
        notes.push(format!("p = {p}: min averaging margin {min_margin:.2e}"));
    }
    // p = 2 reduction to the divergence quotient.
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let g = random_graph(30, 15, seed);
        let f = random_vertex_function(g.vertices(), 0.5, 2.0, seed ^ 0x1234abcd);
        let v = random_vertex_function(g.vertices(), 0.0, 1.0, seed ^ 0x9876fedc);
        for x in g.vertices() {
            let a = lp_hardy_weight(&g, &v, &f, 2.0, x).unwrap();
            let b = t_functional(&g, &v, &f, x).unwrap() / f.get(x);
            worst = worst.max((a - b).abs() / (a.abs() + b.abs() + 1.0));
        }
    }
    if worst > 1e-13 {
        ok = false;
    }
    notes.push(format!("p = 2 reduction max relative difference {worst:.2e}"));
    verdict(10, "l^p machinery", ok, &notes.join("; "));
}
