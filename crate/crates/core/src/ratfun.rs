//! Multivariate rational functions with factored denominators.
//!
//! The denominator is kept as a multiset of monic factors. Cancellation is
//! repeated exact division of the numerator by each factor, so no multivariate
//! gcd is ever required: every denominator in this crate is assembled from a
//! known factor set (curve data, diagonal factors, derivative chain rules).
//! Equality is decided by cross-multiplication and is therefore exact even if a
//! stored factor happens to be reducible.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Poly, Var};
use crate::rational::Rat;

#[derive(Clone, Default)]
pub struct RatFun {
    num: Poly,
    /// monic non-constant factors -> exponent
    den: BTreeMap<Poly, u32>,
}

impl RatFun {
    pub fn zero() -> Self {
        RatFun::default()
    }

    pub fn one() -> Self {
        RatFun::from_poly(Poly::one())
    }

    pub fn constant(c: Rat) -> Self {
        RatFun::from_poly(Poly::constant(c))
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFun {
            num: p,
            den: BTreeMap::new(),
        }
    }

    pub fn var(v: Var) -> Self {
        RatFun::from_poly(Poly::var(v))
    }

    /// p/q with q nonzero; q is normalized monic (unit folded into the numerator).
    pub fn fraction(p: Poly, q: Poly) -> Self {
        assert!(!q.is_zero(), "zero denominator");
        let (unit, monic) = q.normalize();
        let mut out = RatFun {
            num: p.scale(&unit.inv().unwrap()),
            den: BTreeMap::new(),
        };
        if !monic.is_constant() {
            out.den.insert(monic, 1);
            out.cancel();
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn den_factors(&self) -> impl Iterator<Item = (&Poly, u32)> {
        self.den.iter().map(|(p, e)| (p, *e))
    }

    pub fn den_poly(&self) -> Poly {
        let mut d = Poly::one();
        for (p, e) in &self.den {
            d = d.mul(&p.pow(*e));
        }
        d
    }

    pub fn is_constant(&self) -> bool {
        self.den.is_empty() && self.num.is_constant()
    }

    pub fn constant_value(&self) -> Option<Rat> {
        if self.is_constant() {
            Some(self.num.constant_part())
        } else {
            None
        }
    }

    fn cancel(&mut self) {
        if self.num.is_zero() {
            self.den.clear();
            return;
        }
        let factors: Vec<Poly> = self.den.keys().cloned().collect();
        for f in factors {
            let mut e = self.den[&f];
            while e > 0 {
                match self.num.exact_div(&f) {
                    Some(q) => {
                        self.num = q;
                        e -= 1;
                    }
                    None => break,
                }
            }
            if e == 0 {
                self.den.remove(&f);
            } else {
                self.den.insert(f, e);
            }
        }
    }

    pub fn add(&self, o: &RatFun) -> RatFun {
        // common denominator with factor-wise max exponents
        let mut all: BTreeMap<&Poly, u32> = BTreeMap::new();
        for (p, e) in &self.den {
            all.insert(p, *e);
        }
        for (p, e) in &o.den {
            let cur = all.entry(p).or_insert(0);
            *cur = (*cur).max(*e);
        }
        let mut na = self.num.clone();
        let mut nb = o.num.clone();
        for (p, e) in &all {
            let ea = self.den.get(*p).copied().unwrap_or(0);
            let eb = o.den.get(*p).copied().unwrap_or(0);
            for _ in ea..*e {
                na = na.mul(p);
            }
            for _ in eb..*e {
                nb = nb.mul(p);
            }
        }
        let mut out = RatFun {
            num: na.add(&nb),
            den: all.into_iter().map(|(p, e)| (p.clone(), e)).collect(),
        };
        out.cancel();
        out
    }

    pub fn sub(&self, o: &RatFun) -> RatFun {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> RatFun {
        RatFun {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn scale(&self, c: &Rat) -> RatFun {
        if c.is_zero() {
            return RatFun::zero();
        }
        RatFun {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, o: &RatFun) -> RatFun {
        if self.is_zero() || o.is_zero() {
            return RatFun::zero();
        }
        let mut den = self.den.clone();
        for (p, e) in &o.den {
            *den.entry(p.clone()).or_insert(0) += e;
        }
        let mut out = RatFun {
            num: self.num.mul(&o.num),
            den,
        };
        out.cancel();
        out
    }

    pub fn inv(&self) -> Result<RatFun> {
        if self.is_zero() {
            return Err(Error::NonInvertible("rational function is zero".into()));
        }
        let (unit, monic) = self.num.normalize();
        let mut num = Poly::constant(unit.inv().unwrap());
        for (p, e) in &self.den {
            num = num.mul(&p.pow(*e));
        }
        let mut den = BTreeMap::new();
        if !monic.is_constant() {
            den.insert(monic, 1);
        }
        let mut out = RatFun { num, den };
        out.cancel();
        Ok(out)
    }

    pub fn div(&self, o: &RatFun) -> Result<RatFun> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, e: i64) -> Result<RatFun> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut out = RatFun::one();
        for _ in 0..e.unsigned_abs() {
            out = out.mul(&base);
        }
        Ok(out)
    }

    pub fn diff(&self, v: Var) -> RatFun {
        let mut out = RatFun {
            num: self.num.diff(v),
            den: self.den.clone(),
        };
        out.cancel();
        for (p, e) in &self.den {
            let dp = p.diff(v);
            if dp.is_zero() {
                continue;
            }
            let mut den = self.den.clone();
            *den.get_mut(p).unwrap() += 1;
            let mut t = RatFun {
                num: self.num.mul(&dp).scale(&Rat::from_int(-(*e as i64))),
                den,
            };
            t.cancel();
            out = out.add(&t);
        }
        out
    }

    /// Mathematical equality by cross-multiplication.
    pub fn eq(&self, o: &RatFun) -> bool {
        self.num
            .mul(&o.den_poly())
            .sub(&o.num.mul(&self.den_poly()))
            .is_zero()
    }

    /// Substitute v := rational value. Errors when a denominator factor vanishes.
    pub fn subst_rat(&self, v: Var, val: &Rat) -> Result<RatFun> {
        let mut num = self.num.subst_rat(v, val);
        let mut den = BTreeMap::new();
        for (p, e) in &self.den {
            let sp = p.subst_rat(v, val);
            if sp.is_zero() {
                return Err(Error::NonInvertible(format!(
                    "denominator factor vanishes at substitution point {val}"
                )));
            }
            let (unit, monic) = sp.normalize();
            num = num.scale(&unit.pow(*e as i64).unwrap().inv().unwrap());
            if !monic.is_constant() {
                *den.entry(monic).or_insert(0) += e;
            }
        }
        let mut out = RatFun { num, den };
        out.cancel();
        Ok(out)
    }

    pub fn rename_var(&self, from: Var, to: Var) -> RatFun {
        let mut den = BTreeMap::new();
        let mut num = self.num.rename_var(from, to);
        for (p, e) in &self.den {
            let rp = p.rename_var(from, to);
            let (unit, monic) = rp.normalize();
            num = num.scale(&unit.pow(*e as i64).unwrap().inv().unwrap());
            *den.entry(monic).or_insert(0) += e;
        }
        RatFun { num, den }
    }

    /// All variables of numerator and denominator.
    pub fn all_vars(&self) -> Vec<Var> {
        let mut vs = self.num.vars();
        for (p, _) in &self.den {
            for v in p.vars() {
                if !vs.contains(&v) {
                    vs.push(v);
                }
            }
        }
        vs.sort();
        vs
    }

    /// Coefficient of v^k assuming the denominator is free of v.
    pub fn coeff_of_var(&self, v: Var, k: u32) -> RatFun {
        for (p, _) in &self.den {
            assert!(p.degree(v) <= 0, "coeff_of_var: denominator depends on {v:?}");
        }
        let mut out = RatFun {
            num: self.num.coeff_of_var(v, k),
            den: self.den.clone(),
        };
        out.cancel();
        out
    }

    pub fn degree_in(&self, v: Var) -> i64 {
        self.num.degree(v)
    }
}

impl PartialEq for RatFun {
    fn eq(&self, other: &Self) -> bool {
        RatFun::eq(self, other)
    }
}

impl fmt::Debug for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            write!(f, "({:?})", self.num)
        } else {
            write!(f, "({:?}) / (", self.num)?;
            for (p, e) in &self.den {
                write!(f, " [{:?}]^{}", p, e)?;
            }
            write!(f, " )")
        }
    }
}

/// Serialization per the external-interface contract: polynomials as
/// exponent-vector/coefficient lists over the function's variable set.
#[derive(Serialize, Deserialize)]
pub struct RatFunRecord {
    pub vars: Vec<String>,
    pub num: Vec<(Vec<u32>, String)>,
    pub den: Vec<(Vec<u32>, String)>,
}

pub fn poly_record(p: &Poly, vars: &[Var]) -> Vec<(Vec<u32>, String)> {
    let mut out: Vec<(Vec<u32>, String)> = p
        .terms()
        .map(|(m, c)| {
            (
                vars.iter().map(|v| m.exp(*v)).collect(),
                c.to_frac_string(),
            )
        })
        .collect();
    out.sort();
    out
}

impl RatFun {
    pub fn to_record(&self) -> RatFunRecord {
        let vars = self.all_vars();
        RatFunRecord {
            vars: vars.iter().map(|v| crate::poly::var_name(*v)).collect(),
            num: poly_record(&self.num, &vars),
            den: poly_record(&self.den_poly(), &vars),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::var;

    #[test]
    fn arithmetic_and_cancellation() {
        let z = var("rf_z");
        let zp = RatFun::var(z);
        let one = RatFun::one();
        // 1/(z-1) + 1/(z+1) = 2z/(z^2-1)
        let a = one
            .div(&zp.sub(&one))
            .unwrap()
            .add(&one.div(&zp.add(&one)).unwrap());
        let b = zp
            .scale(&Rat::from_int(2))
            .div(&zp.mul(&zp).sub(&one))
            .unwrap();
        assert!(a.eq(&b));
        // (z^2-1)/(z-1) cancels to z+1
        let c = RatFun::fraction(
            Poly::from_coeffs(z, &[Rat::from_int(-1), Rat::zero(), Rat::from_int(1)]),
            Poly::from_coeffs(z, &[Rat::from_int(-1), Rat::from_int(1)]),
        );
        assert!(c.den_poly().is_constant());
        assert_eq!(c.numerator().degree(z), 1);
    }

    #[test]
    fn differentiation() {
        let z = var("rfd_z");
        let zp = RatFun::var(z);
        let one = RatFun::one();
        // d/dz 1/(1-z) = 1/(1-z)^2
        let f = one.div(&one.sub(&zp)).unwrap();
        let df = f.diff(z);
        let expected = one.div(&one.sub(&zp).mul(&one.sub(&zp))).unwrap();
        assert!(df.eq(&expected));
    }
}
