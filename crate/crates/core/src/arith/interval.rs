//! Certified enclosures with rational endpoints.
//!
//! Real quantities are bracketed by [`RationalInterval`], complex ones by
//! rectangles. Roots of integer polynomials are located by Durand–Kerner in
//! floating point, polished by Newton steps in exact dyadic arithmetic and then
//! certified with Weierstrass inclusion disks: the disks of radius
//! `n·|f(z_i)| / |Π_{j≠i}(z_i − z_j)|` cover all roots, and when they are
//! pairwise disjoint each holds exactly one.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use super::poly::{QPoly, ZPoly};
use super::rational::{frac, from_f64, int, rat, round_down, round_up, to_f64, BigRat};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalInterval {
    pub lo: BigRat,
    pub hi: BigRat,
}

impl RationalInterval {
    pub fn new(lo: BigRat, hi: BigRat) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidInput(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(RationalInterval { lo, hi })
    }

    pub fn point(x: BigRat) -> Self {
        RationalInterval { lo: x.clone(), hi: x }
    }

    pub fn zero() -> Self {
        Self::point(BigRat::zero())
    }

    pub fn width(&self) -> BigRat {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> BigRat {
        (&self.lo + &self.hi) / rat(2)
    }

    pub fn contains(&self, x: &BigRat) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&BigRat::zero())
    }

    /// Sign if the interval excludes zero.
    pub fn sign(&self) -> Option<Ordering> {
        if self.lo.is_positive() {
            Some(Ordering::Greater)
        } else if self.hi.is_negative() {
            Some(Ordering::Less)
        } else {
            None
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        RationalInterval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    pub fn sub(&self, o: &Self) -> Self {
        RationalInterval { lo: &self.lo - &o.hi, hi: &self.hi - &o.lo }
    }

    pub fn neg(&self) -> Self {
        RationalInterval { lo: -&self.hi, hi: -&self.lo }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        RationalInterval { lo, hi }
    }

    pub fn scale(&self, k: &BigRat) -> Self {
        self.mul(&Self::point(k.clone()))
    }

    pub fn square(&self) -> Self {
        let a = &self.lo * &self.lo;
        let b = &self.hi * &self.hi;
        if self.contains_zero() {
            RationalInterval { lo: BigRat::zero(), hi: a.max(b) }
        } else {
            RationalInterval { lo: a.clone().min(b.clone()), hi: a.max(b) }
        }
    }

    /// Outward rounding of both endpoints to multiples of 2^-bits.
    pub fn round(&self, bits: u32) -> Self {
        RationalInterval { lo: round_down(&self.lo, bits), hi: round_up(&self.hi, bits) }
    }

    /// Natural logarithm, defined for strictly positive intervals.
    pub fn ln(&self, bits: u32) -> Option<Self> {
        if !self.lo.is_positive() {
            return None;
        }
        Some(RationalInterval { lo: ln_bounds(&self.lo, bits).0, hi: ln_bounds(&self.hi, bits).1 })
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.mid())
    }
}

/// floor and ceil of sqrt(x) at 2^-bits resolution.
pub fn sqrt_bounds(x: &BigRat, bits: u32) -> (BigRat, BigRat) {
    assert!(!x.is_negative(), "square root of a negative number");
    let scale = BigInt::one() << (2 * bits as usize);
    let y = x * int(scale);
    let floor_y = y.numer() / y.denom();
    let s = floor_y.sqrt();
    let den = BigInt::one() << bits as usize;
    let lo = BigRat::new(s.clone(), den.clone());
    let hi = if &lo * &lo == *x { lo.clone() } else { BigRat::new(s + 1, den) };
    (lo, hi)
}

/// Lower and upper bounds for atanh(t), 0 ≤ t ≤ 1/2, with error below 2^-bits.
fn atanh_bounds(t: &BigRat, bits: u32) -> (BigRat, BigRat) {
    let t2 = t * t;
    let mut term = t.clone();
    let mut sum = BigRat::zero();
    let mut k = 0u32;
    let eps = BigRat::new(BigInt::one(), BigInt::one() << (bits as usize + 4));
    loop {
        sum += &term / rat(2 * k as i64 + 1);
        term = round_up(&(&term * &t2), bits + 8);
        k += 1;
        // tail ≤ next term / (1 − t²)
        let tail = &term / (rat(2 * k as i64 + 1) * (rat(1) - &t2));
        if tail < eps {
            let slack = BigRat::new(BigInt::from(k), BigInt::one() << (bits as usize + 8));
            let lo = round_down(&(&sum - &slack), bits + 4);
            let hi = round_up(&(&sum + &tail + &slack), bits + 4);
            return (lo, hi);
        }
    }
}

fn ln2_bounds(bits: u32) -> (BigRat, BigRat) {
    let (lo, hi) = atanh_bounds(&frac(1, 3), bits + 4);
    (lo * rat(2), hi * rat(2))
}

/// Bounds for ln(x), x > 0.
pub fn ln_bounds(x: &BigRat, bits: u32) -> (BigRat, BigRat) {
    assert!(x.is_positive(), "logarithm of a non-positive number");
    // x = m · 2^k with m in [2/3, 4/3)
    let nb = x.numer().bits() as i64;
    let db = x.denom().bits() as i64;
    let mut k = nb - db;
    let pow2 = |e: i64| {
        if e >= 0 {
            int(BigInt::one() << e as usize)
        } else {
            BigRat::new(BigInt::one(), BigInt::one() << (-e) as usize)
        }
    };
    let mut m = x / pow2(k);
    while m >= frac(4, 3) {
        m /= rat(2);
        k += 1;
    }
    while m < frac(2, 3) {
        m *= rat(2);
        k -= 1;
    }
    let extra = 64 - (k.unsigned_abs().max(1)).leading_zeros();
    let t = (&m - rat(1)) / (&m + rat(1));
    let neg = t.is_negative();
    let (alo, ahi) = atanh_bounds(&t.abs(), bits + 2);
    let (mlo, mhi) = if neg { (-ahi * rat(2), -alo * rat(2)) } else { (alo * rat(2), ahi * rat(2)) };
    let (l2lo, l2hi) = ln2_bounds(bits + 2 + extra);
    let kr = rat(k);
    let (klo, khi) = if k >= 0 { (&kr * &l2lo, &kr * &l2hi) } else { (&kr * &l2hi, &kr * &l2lo) };
    (mlo + klo, mhi + khi)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexInterval {
    pub re: RationalInterval,
    pub im: RationalInterval,
}

impl ComplexInterval {
    pub fn point(re: BigRat, im: BigRat) -> Self {
        ComplexInterval { re: RationalInterval::point(re), im: RationalInterval::point(im) }
    }

    pub fn add(&self, o: &Self) -> Self {
        ComplexInterval { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    pub fn mul(&self, o: &Self) -> Self {
        ComplexInterval {
            re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }

    pub fn abs_sq(&self) -> RationalInterval {
        self.re.square().add(&self.im.square())
    }

    pub fn round(&self, bits: u32) -> Self {
        ComplexInterval { re: self.re.round(bits), im: self.im.round(bits) }
    }
}

/// Horner evaluation over a rectangle, rounding outward after every step.
pub fn eval_complex(p: &QPoly, z: &ComplexInterval, bits: u32) -> ComplexInterval {
    let mut acc = ComplexInterval::point(BigRat::zero(), BigRat::zero());
    for c in p.coeffs().iter().rev() {
        acc = acc.mul(z).add(&ComplexInterval::point(c.clone(), BigRat::zero())).round(bits);
    }
    acc
}

/// A certified root: the disk around `(re, im)` of radius `radius` contains
/// exactly one root of the polynomial. Real roots have `im = 0` and `real`.
#[derive(Clone, Debug)]
pub struct RootDisk {
    pub re: BigRat,
    pub im: BigRat,
    pub radius: BigRat,
    pub real: bool,
}

impl RootDisk {
    pub fn rect(&self) -> ComplexInterval {
        ComplexInterval {
            re: RationalInterval { lo: &self.re - &self.radius, hi: &self.re + &self.radius },
            im: RationalInterval { lo: &self.im - &self.radius, hi: &self.im + &self.radius },
        }
    }

    pub fn approx(&self) -> Complex64 {
        Complex64::new(to_f64(&self.re), to_f64(&self.im))
    }
}

fn eval_f64(cs: &[f64], z: Complex64) -> Complex64 {
    cs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Floating-point approximations of all complex roots of a squarefree `f`.
/// Ordered as: real roots ascending, then one root of each complex pair with
/// positive imaginary part (ascending real part), then their conjugates in the
/// same order.
pub fn approx_roots(f: &ZPoly) -> Result<Vec<Complex64>> {
    let n = f.degree_nonzero()?;
    if n == 0 {
        return Ok(vec![]);
    }
    let lc = to_f64(&int(f.lc().clone()));
    let cs: Vec<f64> = f.coeffs().iter().map(|c| to_f64(&int(c.clone())) / lc).collect();
    let bound = 1.0 + cs[..n].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let r0 = (bound / 2.0f64).max(1.0);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * r0).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = eval_f64(&cs, z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * bound {
            break;
        }
    }
    order_roots(f, z)
}

fn order_roots(f: &ZPoly, mut z: Vec<Complex64>) -> Result<Vec<Complex64>> {
    let r1 = f.to_q().count_real_roots()?;
    z.sort_by(|a, b| a.im.abs().partial_cmp(&b.im.abs()).unwrap());
    let mut real: Vec<Complex64> = z[..r1].iter().map(|c| Complex64::new(c.re, 0.0)).collect();
    real.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
    let mut upper: Vec<Complex64> = z[r1..]
        .iter()
        .filter(|c| c.im > 0.0)
        .map(|c| *c)
        .collect();
    upper.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
    let mut out = real;
    out.extend(upper.iter().copied());
    out.extend(upper.iter().map(|c| c.conj()));
    Ok(out)
}

#[derive(Clone, Debug)]
struct CRat {
    re: BigRat,
    im: BigRat,
}

impl CRat {
    fn sub(&self, o: &CRat) -> CRat {
        CRat { re: &self.re - &o.re, im: &self.im - &o.im }
    }
    fn mul(&self, o: &CRat) -> CRat {
        CRat {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
    fn norm_sq(&self) -> BigRat {
        &self.re * &self.re + &self.im * &self.im
    }
    fn div(&self, o: &CRat) -> CRat {
        let d = o.norm_sq();
        CRat {
            re: (&self.re * &o.re + &self.im * &o.im) / &d,
            im: (&self.im * &o.re - &self.re * &o.im) / &d,
        }
    }
    fn round(&self, bits: u32) -> CRat {
        CRat { re: round_down(&self.re, bits), im: round_down(&self.im, bits) }
    }
}

fn eval_crat(f: &QPoly, z: &CRat) -> CRat {
    let mut acc = CRat { re: BigRat::zero(), im: BigRat::zero() };
    for c in f.coeffs().iter().rev() {
        acc = acc.mul(z);
        acc.re += c;
    }
    acc
}

/// Certified disks for all roots of a squarefree integer polynomial, in the
/// order of [`approx_roots`], with radii below 2^-bits.
pub fn certified_roots(f: &ZPoly, bits: u32) -> Result<Vec<RootDisk>> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let fq = f.to_q().monic();
    let n = f.degree_nonzero()?;
    let df = fq.derivative();
    let approx = approx_roots(f)?;
    let r1 = fq.count_real_roots()?;
    let work = bits + 16;
    let mut z: Vec<CRat> = approx
        .iter()
        .map(|c| CRat { re: round_down(&from_f64(c.re), 60), im: round_down(&from_f64(c.im), 60) })
        .collect();
    let target = BigRat::new(BigInt::one(), BigInt::one() << bits as usize);
    let target_sq = &target * &target;
    for round in 0..12 {
        if round > 0 {
            for zi in z.iter_mut() {
                let d = eval_crat(&df, zi);
                if d.norm_sq().is_zero() {
                    continue;
                }
                *zi = zi.sub(&eval_crat(&fq, zi).div(&d)).round(work);
            }
            for zi in z.iter_mut().take(r1) {
                zi.im = BigRat::zero();
            }
        }
        // squared radii
        let mut rad_sq = Vec::with_capacity(n);
        for i in 0..n {
            let mut den = BigRat::one();
            for j in 0..n {
                if i != j {
                    den *= z[i].sub(&z[j]).norm_sq();
                }
            }
            if den.is_zero() {
                rad_sq.clear();
                break;
            }
            rad_sq.push(rat((n * n) as i64) * eval_crat(&fq, &z[i]).norm_sq() / den);
        }
        if rad_sq.len() != n || rad_sq.iter().any(|r| r > &target_sq) {
            continue;
        }
        let rad: Vec<BigRat> = rad_sq.iter().map(|r| sqrt_bounds(r, work).1).collect();
        let disjoint = (0..n).all(|i| {
            (i + 1..n).all(|j| {
                let s = &rad[i] + &rad[j];
                z[i].sub(&z[j]).norm_sq() > &s * &s
            })
        });
        if !disjoint {
            continue;
        }
        return Ok(z
            .into_iter()
            .zip(rad)
            .enumerate()
            .map(|(i, (c, r))| RootDisk { re: c.re, im: c.im, radius: r, real: i < r1 })
            .collect());
    }
    Err(Error::InvalidInput(format!("could not certify the roots of {f}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_brackets() {
        let (lo, hi) = sqrt_bounds(&rat(2), 30);
        assert!(&lo * &lo <= rat(2) && rat(2) <= &hi * &hi);
        assert_eq!(sqrt_bounds(&rat(9), 10), (rat(3), rat(3)));
    }

    #[test]
    fn ln_brackets_known_values() {
        for (x, v) in [(rat(2), std::f64::consts::LN_2), (frac(1, 10), (0.1f64).ln()), (rat(1000), (1000f64).ln())] {
            let (lo, hi) = ln_bounds(&x, 64);
            assert!(lo <= hi);
            assert!(to_f64(&lo) <= v + 1e-12 && v - 1e-12 <= to_f64(&hi));
            assert!(to_f64(&(&hi - &lo)) < 1e-15);
        }
        let (lo, hi) = ln_bounds(&rat(1), 64);
        assert!(lo <= BigRat::zero() && BigRat::zero() <= hi);
    }

    #[test]
    fn roots_of_cubic_and_quartic() {
        let f = ZPoly::from_i64s(&[-1, 1, 0, 1]);
        let r = certified_roots(&f, 80).unwrap();
        assert_eq!(r.len(), 3);
        assert!(r[0].real && !r[1].real);
        assert!((r[0].approx().re - 0.6823278038280193).abs() < 1e-12);
        assert!(r[1].approx().im > 0.0 && r[2].approx().im < 0.0);
        let g = ZPoly::from_i64s(&[1, -16, 20, -8, 1]);
        let rs = certified_roots(&g, 128).unwrap();
        assert!(rs.iter().all(|d| d.real));
        let xs: Vec<f64> = rs.iter().map(|d| d.approx().re).collect();
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn gaussian_roots() {
        let r = certified_roots(&ZPoly::from_i64s(&[1, 0, 1]), 64).unwrap();
        assert!((r[0].approx().im - 1.0).abs() < 1e-12);
        assert!((r[1].approx().im + 1.0).abs() < 1e-12);
    }
}
