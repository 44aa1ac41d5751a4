//! Exact scalars: rationals, Gaussian rationals and sums of square roots.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::bigint::{BigInt, Sign};
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

use crate::Error;

/// Exact rational number.
pub type Q = BigRational;

/// Build a rational from a small integer.
pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Build the rational `n/d`.
pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parse `"p"`, `"p/q"` or a finite decimal such as `"-1.25"`.
pub fn parse_q(s: &str) -> Result<Q, Error> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(n, d));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        if fp.is_empty() || !fp.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = ip.starts_with('-');
        let ip = ip.trim_start_matches(['-', '+']);
        let whole: BigInt = if ip.is_empty() { BigInt::zero() } else { ip.parse().map_err(|_| bad())? };
        let frac: BigInt = fp.parse().map_err(|_| bad())?;
        let den = num::pow(BigInt::from(10), fp.len());
        let v = Q::new(whole * &den + frac, den);
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = t.parse().map_err(|_| bad())?;
    Ok(Q::from_integer(n))
}

/// Render as `"p"` or `"p/q"`.
pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Lossy conversion to `f64`.
pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Fall back to scaled integer division for huge numerators/denominators.
        let n = x.numer().to_f64().unwrap_or(f64::NAN);
        let d = x.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Exact conversion of a finite `f64`.
pub fn from_f64(x: f64) -> Q {
    Q::from_float(x).unwrap_or_else(Q::zero)
}

/// Gaussian rational `re + i·im`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Gauss {
    pub re: Q,
    pub im: Q,
}

impl Gauss {
    pub fn new(re: Q, im: Q) -> Self {
        Gauss { re, im }
    }

    pub fn zero() -> Self {
        Gauss { re: Q::zero(), im: Q::zero() }
    }

    pub fn real(re: Q) -> Self {
        Gauss { re, im: Q::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// `|z|²`.
    pub fn norm_sqr(&self) -> Q {
        &self.re * &self.re + &self.im * &self.im
    }

    /// `Re(self)·Im(other) − Im(self)·Re(other)`; positive iff `other` is counterclockwise.
    pub fn cross(&self, other: &Gauss) -> Q {
        &self.re * &other.im - &self.im * &other.re
    }

    /// Membership in the default half-plane `Re > 0`, or `Re = 0` and `Im > 0`.
    pub fn in_half_plane(&self) -> bool {
        self.re.is_positive() || (self.re.is_zero() && self.im.is_positive())
    }

    /// Compare arguments of two nonzero half-plane values exactly.
    pub fn cmp_phase(&self, other: &Gauss) -> Ordering {
        let c = self.cross(other);
        if c.is_positive() {
            Ordering::Less
        } else if c.is_negative() {
            Ordering::Greater
        } else {
            Ordering::Equal
        }
    }

    /// Argument in radians.
    pub fn arg(&self) -> f64 {
        to_f64(&self.im).atan2(to_f64(&self.re))
    }

    pub fn abs_f64(&self) -> f64 {
        to_f64(&self.re).hypot(to_f64(&self.im))
    }

    pub fn scale(&self, s: &Q) -> Gauss {
        Gauss { re: &self.re * s, im: &self.im * s }
    }
}

impl Add for &Gauss {
    type Output = Gauss;
    fn add(self, o: &Gauss) -> Gauss {
        Gauss { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl Sub for &Gauss {
    type Output = Gauss;
    fn sub(self, o: &Gauss) -> Gauss {
        Gauss { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl Mul for &Gauss {
    type Output = Gauss;
    fn mul(self, o: &Gauss) -> Gauss {
        Gauss {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Neg for &Gauss {
    type Output = Gauss;
    fn neg(self) -> Gauss {
        Gauss { re: -&self.re, im: -&self.im }
    }
}

impl fmt::Display for Gauss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", fmt_q(&self.re), fmt_q(&self.im))
    }
}

/// A finite sum `Σ √s_k` of square roots of nonnegative rationals, compared exactly.
#[derive(Clone, Debug, Default)]
pub struct Mass {
    pub squares: Vec<Q>,
}

impl Mass {
    pub fn from_values(zs: &[Gauss]) -> Mass {
        Mass { squares: zs.iter().map(Gauss::norm_sqr).collect() }
    }

    pub fn to_f64(&self) -> f64 {
        self.squares.iter().map(|s| to_f64(s).sqrt()).sum()
    }

    /// Lower/upper bounds of the sum scaled by `2^bits`, as integers.
    fn bounds(&self, bits: u32) -> (BigInt, BigInt, BigInt) {
        // √(p/q) = √(p·q)/q; bracket each term over the common denominator D.
        let den: BigInt = self
            .squares
            .iter()
            .fold(BigInt::one(), |acc, s| num::integer::lcm(acc, s.denom().clone()));
        let scale = BigInt::one() << (2 * bits as usize);
        let (mut lo, mut hi) = (BigInt::zero(), BigInt::zero());
        for s in &self.squares {
            // s = a / den with a = s·den; √s = √(a·den)/den.
            let a = (s * Q::from_integer(den.clone())).to_integer();
            let r = (&a * &den * &scale).sqrt();
            let exact = &r * &r == &a * &den * &scale;
            hi += if exact { r.clone() } else { &r + 1 };
            lo += r;
        }
        (lo, hi, den)
    }

    /// Exact comparison with refinement; sums that agree to 2⁻⁴⁰⁰ are treated as equal.
    pub fn cmp_exact(&self, other: &Mass) -> Ordering {
        let mut bits = 32;
        while bits <= 400 {
            let (l1, h1, d1) = self.bounds(bits);
            let (l2, h2, d2) = other.bounds(bits);
            // Compare l1/d1 against h2/d2 by cross-multiplication.
            if &h1 * &d2 < &l2 * &d1 {
                return Ordering::Less;
            }
            if &l1 * &d2 > &h2 * &d1 {
                return Ordering::Greater;
            }
            if l1 == h1 && l2 == h2 && &l1 * &d2 == &l2 * &d1 {
                return Ordering::Equal;
            }
            bits *= 2;
        }
        Ordering::Equal
    }
}

/// Sign of a rational as `-1`, `0` or `1`.
pub fn sign(x: &Q) -> i32 {
    match x.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}
