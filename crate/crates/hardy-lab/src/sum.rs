//! Compensated summation and double-double arithmetic.
//!
//! Everything that accumulates floating point values in this crate goes
//! through [`KahanSum`], so verification residuals sit near machine epsilon.
//! [`Dd`] is an unevaluated sum of two doubles (~32 significant digits),
//! used for cancellation-prone cross-check paths only.

/// Kahan (compensated) accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let y = value - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }

    pub fn sum_iter<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
        let mut k = Self::new();
        for v in iter {
            k.add(v);
        }
        k.value()
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Requires |a| >= |b| (or a == 0).
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Double-double number: `hi + lo` with |lo| <= ulp(hi)/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

pub const DD_LN2: Dd = Dd {
    hi: 0.693_147_180_559_945_3,
    lo: 2.319_046_813_846_299_6e-17,
};

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    /// Renormalizing constructor.
    #[inline]
    pub fn new(hi: f64, lo: f64) -> Self {
        let (s, e) = quick_two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn add(self, other: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, other.hi);
        let (t1, t2) = two_sum(self.lo, other.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        Dd::new(s1, s2 + t2)
    }

    #[inline]
    pub fn add_f64(self, other: f64) -> Dd {
        self.add(Dd::from_f64(other))
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    pub fn sub(self, other: Dd) -> Dd {
        self.add(other.neg())
    }

    #[inline]
    pub fn mul(self, other: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, other.hi);
        let p2 = p2 + self.hi * other.lo + self.lo * other.hi;
        Dd::new(p1, p2)
    }

    #[inline]
    pub fn mul_f64(self, other: f64) -> Dd {
        self.mul(Dd::from_f64(other))
    }

    #[inline]
    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul_f64(q1));
        let q2 = r.hi / other.hi;
        let r = r.sub(other.mul_f64(q2));
        let q3 = r.hi / other.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Dd::new(s, e).add_f64(q3)
    }

    #[inline]
    pub fn recip(self) -> Dd {
        Dd::ONE.div(self)
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            self.neg()
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Dd {
        if self.hi == 0.0 {
            return Dd::ZERO;
        }
        let s = self.hi.sqrt();
        // One Newton step on s + e with e = (x - s^2) / (2s).
        let e = self.sub(Dd::from_f64(s).mul_f64(s)).to_f64() / (2.0 * s);
        Dd::new(s, e)
    }

    /// Integer power by binary exponentiation.
    pub fn powi(self, n: i32) -> Dd {
        if n == 0 {
            return Dd::ONE;
        }
        let mut base = if n < 0 { self.recip() } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Dd::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            e >>= 1;
        }
        acc
    }

    pub fn exp(self) -> Dd {
        let x = self.to_f64();
        if x < -745.0 {
            return Dd::ZERO;
        }
        let k = (x / std::f64::consts::LN_2).round();
        let r = self.sub(DD_LN2.mul_f64(k));
        // |r| <= ln2/2; Taylor series converges fast.
        let mut term = Dd::ONE;
        let mut acc = Dd::ONE;
        for i in 1..=24 {
            term = term.mul(r).div(Dd::from_f64(i as f64));
            acc = acc.add(term);
            if term.hi.abs() < 1.0e-35 * acc.hi.abs() {
                break;
            }
        }
        let scale = (k as i32).max(-1074).min(1023);
        let s = f64::powi(2.0, scale);
        Dd::new(acc.hi * s, acc.lo * s)
    }

    pub fn ln(self) -> Dd {
        debug_assert!(self.hi > 0.0, "ln of nonpositive double-double");
        // Newton on exp(y) = x, seeded by the f64 logarithm.
        let mut y = Dd::from_f64(self.hi.ln());
        for _ in 0..2 {
            y = y.add(self.mul(y.neg().exp())).add_f64(-1.0);
        }
        y
    }

    /// `self^b` via exp(b ln self); requires `self > 0`.
    pub fn powf(self, b: Dd) -> Dd {
        self.ln().mul(b).exp()
    }

    pub fn powf_f64(self, b: f64) -> Dd {
        self.powf(Dd::from_f64(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_dd(x: Dd, hi: f64, lo: f64) {
        assert_eq!(x.hi, hi, "hi: got {:e} want {:e}", x.hi, hi);
        let scale = hi.abs() * 1e-30;
        assert!(
            (x.lo - lo).abs() <= scale.max(1e-320),
            "lo: got {:e} want {:e}",
            x.lo,
            lo
        );
    }

    #[test]
    fn kahan_recovers_cancelled_tail() {
        // Naive left-to-right addition loses every 1e-16 term against the
        // leading 1.0; the compensated sum keeps them all.
        let n = 1_000_000;
        let mut k = KahanSum::new();
        k.add(1.0);
        for _ in 0..n {
            k.add(1e-16);
        }
        assert_eq!(k.value(), 1.0 + n as f64 * 1e-16);
    }

    #[test]
    fn dd_exact_ops() {
        let a = Dd::from_f64(0.1).add(Dd::from_f64(0.2));
        let b = a.sub(Dd::from_f64(0.2)).sub(Dd::from_f64(0.1));
        assert_eq!(b.to_f64(), 0.0);
        let c = Dd::from_f64(3.0).mul(Dd::from_f64(1.0 / 3.0));
        assert!((c.to_f64() - 1.0).abs() < 1e-16);
        let d = Dd::ONE.div(Dd::from_f64(3.0)).mul_f64(3.0);
        assert!((d.sub(Dd::ONE)).to_f64().abs() < 1e-31);
    }

    #[test]
    fn dd_sqrt_exp_ln_against_frozen_values() {
        assert_dd(
            Dd::from_f64(2.0).sqrt(),
            1.4142135623730951,
            -9.667293313452913e-17,
        );
        assert_dd(
            Dd::ONE.exp(),
            2.718281828459045,
            1.4456468917292502e-16,
        );
        assert_dd(
            Dd::from_f64(0.5).exp(),
            1.6487212707001282,
            -4.731568479435833e-17,
        );
        assert_dd(
            Dd::from_f64(-3.25).exp(),
            0.03877420783172201,
            1.1433418851841824e-18,
        );
        assert_dd(
            Dd::from_f64(2.0).ln(),
            0.6931471805599453,
            2.3190468138462996e-17,
        );
        assert_dd(
            Dd::from_f64(10.0).ln(),
            2.302585092994046,
            -2.1707562233822494e-16,
        );
        assert_dd(
            Dd::from_f64(1e-8).ln(),
            -18.420680743952367,
            1.757527539535928e-15,
        );
    }

    #[test]
    fn dd_powf_powi_against_frozen_values() {
        assert_dd(
            Dd::from_f64(2.0).powf_f64(0.25),
            1.189207115002721,
            3.982015231465646e-17,
        );
        assert_dd(
            Dd::from_f64(3.0).powf_f64(-1.5),
            0.19245008972987526,
            -7.353623497300496e-18,
        );
        let p = Dd::from_f64(1.5).powi(10);
        assert!((p.to_f64() - 1.5f64.powi(10)).abs() < 1e-12);
        let q = Dd::from_f64(7.0).powi(-3).mul(Dd::from_f64(343.0));
        assert!(q.sub(Dd::ONE).to_f64().abs() < 1e-31);
    }

    #[test]
    fn dd_round_trips() {
        for &x in &[0.3, 17.25, 1.0e-12, 123456.789] {
            let d = Dd::from_f64(x);
            let r = d.ln().exp();
            assert!(
                r.sub(d).to_f64().abs() <= 2e-31 * x,
                "exp(ln {x}) drifted: {:?}",
                r
            );
            let s = d.sqrt().mul(d.sqrt());
            assert!(s.sub(d).to_f64().abs() <= 2e-31 * x);
        }
    }
}
