//! Laurent series in one distinguished variable: a truncated tail with an
//! integer valuation offset. The residue is the coefficient at exponent -1.
//! Also hosts exact local expansion of rational functions at finite rational
//! points and at infinity.

use std::fmt;

use crate::error::{Error, Result};
use crate::poly::{Poly, Var};
use crate::ratfun::RatFun;
use crate::rational::Rat;
use crate::series::Ring;

/// Laurent series sum_{e >= val} c_{e} x^{e}, truncated at `order` (exclusive).
/// Coefficients below `val` are identically zero by construction.
#[derive(Clone, PartialEq)]
pub struct LaurentSeries<C: Ring> {
    pub var: Var,
    pub val: i64,
    pub order: i64,
    coeffs: Vec<C>, // index i corresponds to exponent val + i
}

impl<C: Ring> LaurentSeries<C> {
    pub fn new(var: Var, val: i64, order: i64, mut coeffs: Vec<C>) -> Self {
        assert!(order >= val);
        coeffs.resize((order - val) as usize, C::zero());
        let mut s = LaurentSeries {
            var,
            val,
            order,
            coeffs,
        };
        s.trim();
        s
    }

    pub fn zero(var: Var, order: i64) -> Self {
        LaurentSeries {
            var,
            val: order,
            order,
            coeffs: Vec::new(),
        }
    }

    fn trim(&mut self) {
        while let Some(first) = self.coeffs.first() {
            if first.is_zero() {
                self.coeffs.remove(0);
                self.val += 1;
            } else {
                break;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn coeff(&self, e: i64) -> C {
        if e < self.val || e >= self.order {
            return C::zero();
        }
        self.coeffs[(e - self.val) as usize].clone()
    }

    /// Exact valuation (first nonzero exponent); None for the zero series.
    pub fn valuation(&self) -> Option<i64> {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .map(|i| self.val + i as i64)
    }

    /// Coefficient at exponent -1; zero if absent.
    pub fn residue(&self) -> C {
        self.coeff(-1)
    }

    /// Principal part coefficients (exponent, value) for exponents < 0.
    pub fn principal_part(&self) -> Vec<(i64, C)> {
        let mut out = Vec::new();
        for e in self.val..0.min(self.order) {
            let c = self.coeff(e);
            if !c.is_zero() {
                out.push((e, c));
            }
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.var, o.var);
        let val = self.val.min(o.val);
        let order = self.order.min(o.order);
        let mut coeffs = Vec::new();
        for e in val..order {
            coeffs.push(self.coeff(e).add(&o.coeff(e)));
        }
        LaurentSeries::new(self.var, val, order, coeffs)
    }

    pub fn neg(&self) -> Self {
        LaurentSeries {
            var: self.var,
            val: self.val,
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Rat) -> Self {
        LaurentSeries {
            var: self.var,
            val: self.val,
            order: self.order,
            coeffs: self.coeffs.iter().map(|x| x.scale(c)).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.var, o.var);
        let val = self.val + o.val;
        let order = (self.order + o.val).min(o.order + self.val);
        let n = (order - val).max(0) as usize;
        let mut coeffs = vec![C::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if i + j < n && !b.is_zero() {
                    coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
                }
            }
        }
        LaurentSeries::new(self.var, val, order, coeffs)
    }

    /// Multiplicative inverse: requires invertible leading coefficient.
    pub fn inv(&self) -> Result<Self> {
        let v = self
            .valuation()
            .ok_or_else(|| Error::NonInvertible("zero Laurent series".into()))?;
        let lead = self.coeff(v);
        let lead_inv = lead
            .try_inv()
            .ok_or_else(|| Error::NonInvertible("non-invertible leading coefficient".into()))?;
        let n = (self.order - v) as usize;
        // (x^v (a0 + a1 x + ...))^{-1} = x^{-v} (b0 + b1 x + ...)
        let a = |i: usize| self.coeff(v + i as i64);
        let mut b = vec![C::zero(); n];
        b[0] = lead_inv.clone();
        for k in 1..n {
            let mut s = C::zero();
            for j in 1..=k {
                s = s.add(&a(j).mul(&b[k - j]));
            }
            b[k] = s.neg().mul(&lead_inv);
        }
        Ok(LaurentSeries::new(self.var, -v, -v + n as i64, b))
    }

    pub fn entries(&self) -> impl Iterator<Item = (i64, &C)> {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (self.val + i as i64, c))
    }
}

impl<C: Ring> fmt::Debug for LaurentSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Laurent(val={}, ord={})[", self.val, self.order)?;
        for (e, c) in self.entries() {
            if !c.is_zero() {
                write!(f, " {}:{:?}", e, c)?;
            }
        }
        write!(f, " ]")
    }
}

/// Expansion point for `laurent_expand`.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Finite(Rat),
    Infinity,
}

/// Laurent-expand a rational function of `v` at a point, in the local coordinate
/// w = v - point (or w = 1/v at infinity), to the requested order (exclusive).
/// Coefficients are rational functions in the remaining variables. The valuation
/// equals the exact order of f at the point.
pub fn laurent_expand(f: &RatFun, v: Var, point: &Point, order: i64) -> Result<LaurentSeries<RatFun>> {
    if f.is_zero() {
        return Ok(LaurentSeries::zero(v, order));
    }
    let (num, den) = match point {
        Point::Finite(p) => {
            let shift = |q: &Poly| -> Poly {
                // q(v) -> q(w + p)
                q.subst_poly(v, &Poly::var(v).add(&Poly::constant(p.clone())))
            };
            (shift(f.numerator()), shift(&f.den_poly()))
        }
        Point::Infinity => {
            // v -> 1/w: multiply both by w^{deg}
            let flip = |q: &Poly| -> Poly {
                let d = q.degree(v).max(0) as u32;
                let mut out = Poly::zero();
                for (m, c) in q.terms() {
                    let e = m.exp(v);
                    let rest = m.try_div(&crate::poly::Mono::var(v, e)).unwrap();
                    out = out.add(&Poly::monomial(
                        rest.mul(&crate::poly::Mono::var(v, d - e)),
                        c.clone(),
                    ));
                }
                out
            };
            let dn = f.numerator().degree(v);
            let dd = f.den_poly().degree(v);
            // f = w^{dd-dn} * flip(num)/flip(den)
            let mut num = flip(f.numerator());
            let den = flip(&f.den_poly());
            let pow = dd - dn;
            if pow > 0 {
                num = num.mul(&Poly::monomial(crate::poly::Mono::var(v, pow as u32), Rat::one()));
            } else {
                // negative shift handled below through valuations
            }
            let neg_shift = (-pow).max(0);
            return expand_series(num, den, v, order, -neg_shift);
        }
    };
    expand_series(num, den, v, order, 0)
}

fn expand_series(
    num: Poly,
    den: Poly,
    v: Var,
    order: i64,
    extra_shift: i64,
) -> Result<LaurentSeries<RatFun>> {
    // valuations of num and den in v at w=0
    let valuation_of = |p: &Poly| -> i64 {
        (0..=p.degree(v).max(0))
            .find(|e| !p.coeff_of_var(v, *e as u32).is_zero())
            .unwrap_or(0)
    };
    if den.is_zero() {
        return Err(Error::NonInvertible("zero denominator".into()));
    }
    if num.is_zero() {
        return Ok(LaurentSeries::zero(v, order));
    }
    let vn = valuation_of(&num);
    let vd = valuation_of(&den);
    let val = vn - vd + extra_shift;
    let n = (order - val).max(0) as usize;
    let a = |i: i64| -> RatFun {
        if i < 0 {
            RatFun::zero()
        } else {
            RatFun::from_poly(num.coeff_of_var(v, (i + vn) as u32))
        }
    };
    let b = |i: i64| -> RatFun {
        if i < 0 {
            RatFun::zero()
        } else {
            RatFun::from_poly(den.coeff_of_var(v, (i + vd) as u32))
        }
    };
    let b0 = b(0);
    let b0_inv = b0
        .inv()
        .map_err(|_| Error::NonInvertible("leading denominator coefficient".into()))?;
    let mut q: Vec<RatFun> = Vec::with_capacity(n);
    for k in 0..n as i64 {
        let mut s = a(k);
        for j in 1..=k {
            let bj = b(j);
            if !bj.is_zero() {
                s = s.sub(&bj.mul(&q[(k - j) as usize]));
            }
        }
        q.push(s.mul(&b0_inv));
    }
    Ok(LaurentSeries::new(v, val, order, q))
}

/// Univariate specialization with `Rat` coefficients.
pub fn laurent_expand_rat(
    f: &RatFun,
    v: Var,
    point: &Point,
    order: i64,
) -> Result<LaurentSeries<Rat>> {
    let l = laurent_expand(f, v, point, order)?;
    let mut coeffs = Vec::new();
    for e in l.val..l.order {
        let c = l.coeff(e);
        let cv = c
            .constant_value()
            .ok_or_else(|| Error::SeriesDomain("expansion coefficients not constant".into()))?;
        coeffs.push(cv);
    }
    Ok(LaurentSeries::new(v, l.val, l.order, coeffs))
}

/// Residue of a rational 1-form f(v) dv at a finite point or at infinity
/// (res_infty = -[w^{-1}] of f(1/w) * (-1/w^2) in w = 1/v).
pub fn residue_of_form(f: &RatFun, v: Var, point: &Point) -> Result<RatFun> {
    match point {
        Point::Finite(_) => {
            let l = laurent_expand(f, v, point, 1)?;
            Ok(l.residue())
        }
        Point::Infinity => {
            // f(v) dv = f(1/w) d(1/w) = -f(1/w)/w^2 dw
            let l = laurent_expand(f, v, point, 2)?;
            // [w^{-1}] of -f(1/w) w^{-2} = -[w^{1}] of f(1/w)
            Ok(l.coeff(1).neg())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::var;

    #[test]
    fn residue_basics() {
        let w = var("la_w");
        let s = LaurentSeries::new(w, -2, 3, vec![
            Rat::zero(),
            Rat::one(),
            Rat::from_int(7),
            Rat::zero(),
            Rat::from_int(2),
        ]);
        assert_eq!(s.residue(), Rat::one());
        assert_eq!(s.valuation(), Some(-1));
        let m = LaurentSeries::new(w, 1, 4, vec![Rat::one(), Rat::zero(), Rat::zero()]);
        assert_eq!(m.residue(), Rat::zero());
    }

    #[test]
    fn expand_examples() {
        let z = var("la_z");
        let zp = RatFun::var(z);
        let one = RatFun::one();
        // 1/(z-1) at z=1 -> w^{-1}
        let f = one.div(&zp.sub(&one)).unwrap();
        let l = laurent_expand_rat(&f, z, &Point::Finite(Rat::one()), 2).unwrap();
        assert_eq!(l.valuation(), Some(-1));
        assert_eq!(l.coeff(-1), Rat::one());
        assert_eq!(l.coeff(0), Rat::zero());
        // z/(1-z)^2 at 0 -> z + 2z^2 + 3z^3
        let g = zp
            .div(&one.sub(&zp).mul(&one.sub(&zp)))
            .unwrap();
        let l = laurent_expand_rat(&g, z, &Point::Finite(Rat::zero()), 4).unwrap();
        for k in 1..4i64 {
            assert_eq!(l.coeff(k), Rat::from_int(k));
        }
        // 1/(z(z-2)) at z=2 -> (1/2) w^{-1} - 1/4 + w/8 - ...
        let h = one
            .div(&zp.mul(&zp.sub(&RatFun::constant(Rat::from_int(2)))))
            .unwrap();
        let l = laurent_expand_rat(&h, z, &Point::Finite(Rat::from_int(2)), 2).unwrap();
        assert_eq!(l.coeff(-1), Rat::new(1, 2));
        assert_eq!(l.coeff(0), Rat::new(-1, 4));
        assert_eq!(l.coeff(1), Rat::new(1, 8));
        // expansion at infinity: z/(1+z) = 1 - 1/z + ... in w = 1/z
        let e = zp.div(&one.add(&zp)).unwrap();
        let l = laurent_expand_rat(&e, z, &Point::Infinity, 3).unwrap();
        assert_eq!(l.coeff(0), Rat::one());
        assert_eq!(l.coeff(1), Rat::from_int(-1));
        assert_eq!(l.coeff(2), Rat::one());
    }

    #[test]
    fn laurent_inverse() {
        let w = var("la_inv_w");
        // (w^{-1} + 1)^{-1} = w - w^2 + w^3 - ...
        let s = LaurentSeries::new(w, -1, 4, vec![
            Rat::one(),
            Rat::one(),
            Rat::zero(),
            Rat::zero(),
            Rat::zero(),
        ]);
        let inv = s.inv().unwrap();
        assert_eq!(inv.coeff(1), Rat::one());
        assert_eq!(inv.coeff(2), Rat::from_int(-1));
        assert_eq!(inv.coeff(3), Rat::one());
        let prod = s.mul(&inv);
        assert_eq!(prod.coeff(0), Rat::one());
        assert!(prod.coeff(1).is_zero());
    }
}
