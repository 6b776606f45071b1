//! Double-double scalars for the return-map refinement.
//!
//! Transverse perturbations picked up near the fold grow like
//! exp(I/eps^2) along the repelling slow branch, which turns plain f64
//! rounding into a visible jitter floor on the computed return map. Carrying
//! the state in an error-free hi/lo pair pushes evaluation roundoff from
//! 2^-52 to roughly 2^-104, far enough down that the amplified noise stays
//! below the closure tolerance. Sums and products use the classic
//! Dekker/Knuth error-free transforms; no FMA requirement.

/// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Requires |a| >= |b| (or a = 0).
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

// 2^27 + 1, Veltkamp splitter for 53-bit significands.
const SPLIT: f64 = 134_217_729.0;

#[inline]
fn split(a: f64) -> (f64, f64) {
    let t = SPLIT * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

/// a*b as rounded product plus exact remainder. Overflow-safe for the
/// magnitudes this crate produces (all bounded by the stripe geometry).
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    #[inline]
    pub fn new(a: f64) -> Dd {
        Dd { hi: a, lo: 0.0 }
    }

    /// Round back to f64.
    #[inline]
    pub fn val(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    pub fn add(self, o: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, o.hi);
        let (t1, t2) = two_sum(self.lo, o.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn add_f(self, b: f64) -> Dd {
        let (s1, s2) = two_sum(self.hi, b);
        let (hi, lo) = quick_two_sum(s1, s2 + self.lo);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    #[inline]
    pub fn mul(self, o: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, o.hi);
        let (hi, lo) = quick_two_sum(p1, p2 + self.hi * o.lo + self.lo * o.hi);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f(self, b: f64) -> Dd {
        let (p1, p2) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p1, p2 + self.lo * b);
        Dd { hi, lo }
    }
}

/// Horner pass over f64 coefficients (ascending degree), carried in Dd.
pub fn horner_dd(coeffs: &[f64], x: Dd) -> Dd {
    let mut acc = Dd::ZERO;
    for &c in coeffs.iter().rev() {
        acc = acc.mul(x).add_f(c);
    }
    acc
}
