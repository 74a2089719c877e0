//! Spectral-curve data: x(z) = log z - alpha (R(z) - 1), y(z) = log R(z),
//! for a rational R with R(0) = 1, validated at construction.

use crate::error::{Error, Result};
use crate::poly::{rational_roots, univariate_gcd, var, Poly, Var};
use crate::ratfun::RatFun;
use crate::rational::Rat;

/// Validated curve: R(z) = num/den with simple zeros and poles, R(0) = 1,
/// x'(z) = 1/z - alpha R'(z) with simple zeros disjoint from the zeros of R.
#[derive(Clone, Debug)]
pub struct CurveSpec {
    pub alpha: Rat,
    r_num: Poly,
    r_den: Poly,
    z: Var,
}

impl CurveSpec {
    /// Coefficient lists are constant-first in the curve variable "z".
    pub fn new(r_num: &[Rat], r_den: &[Rat], alpha: Rat) -> Result<CurveSpec> {
        let z = var("z");
        if alpha.is_zero() {
            return Err(Error::BadCurve("alpha must be nonzero".into()));
        }
        let num = Poly::from_coeffs(z, r_num);
        let den = Poly::from_coeffs(z, r_den);
        if den.is_zero() {
            return Err(Error::BadCurve("denominator of R is zero".into()));
        }
        let n0 = num.constant_part();
        let d0 = den.constant_part();
        if d0.is_zero() || n0.is_zero() || n0 != d0 {
            return Err(Error::CurveNormalization("R(0) must equal 1".into()));
        }
        if num.degree(z) <= 0 && den.degree(z) <= 0 {
            return Err(Error::BadCurve("R must be non-constant".into()));
        }
        // simple zeros and poles: gcd with derivative is constant
        for p in [&num, &den] {
            if p.degree(z) >= 1 {
                let g = univariate_gcd(p, &p.diff(z), z);
                if g.degree(z) > 0 {
                    return Err(Error::BadCurve(
                        "R must have simple zeros and poles".into(),
                    ));
                }
            }
        }
        if univariate_gcd(&num, &den, z).degree(z) > 0 {
            return Err(Error::BadCurve("R numerator and denominator share a factor".into()));
        }
        let spec = CurveSpec {
            alpha,
            r_num: num,
            r_den: den,
            z,
        };
        // x' simple zeros, disjoint from zeros of R
        let xnum = spec.xp_numerator();
        let g = univariate_gcd(&xnum, &xnum.diff(z), z);
        if g.degree(z) > 0 {
            return Err(Error::BadCurve("zeros of dx must be simple".into()));
        }
        if univariate_gcd(&xnum, &spec.r_num, z).degree(z) > 0 {
            return Err(Error::BadCurve(
                "zeros of dx must avoid the zeros of R".into(),
            ));
        }
        Ok(spec)
    }

    pub fn zvar(&self) -> Var {
        self.z
    }

    pub fn r(&self) -> RatFun {
        RatFun::fraction(self.r_num.clone(), self.r_den.clone())
    }

    pub fn r_num_coeffs(&self) -> Vec<Rat> {
        self.r_num.univariate_coeffs(self.z)
    }

    pub fn r_den_coeffs(&self) -> Vec<Rat> {
        self.r_den.univariate_coeffs(self.z)
    }

    /// Numerator polynomial of x'(z) = 1/z - alpha R'(z) over denominator z*den^2.
    pub fn xp_numerator(&self) -> Poly {
        let z = self.z;
        // x' = (den^2 - alpha z (num' den - num den')) / (z den^2)
        let d2 = self.r_den.mul(&self.r_den);
        let wr = self
            .r_num
            .diff(z)
            .mul(&self.r_den)
            .sub(&self.r_num.mul(&self.r_den.diff(z)));
        d2.sub(&Poly::var(z).mul(&wr).scale(&self.alpha))
    }

    /// Rational zeros of R (LogTR-vital points), with multiplicity 1 each.
    pub fn r_zeros(&self) -> Vec<Rat> {
        rational_roots(&self.r_num, self.z)
            .into_iter()
            .map(|(r, _)| r)
            .collect()
    }

    /// Rational poles of R.
    pub fn r_poles(&self) -> Vec<Rat> {
        rational_roots(&self.r_den, self.z)
            .into_iter()
            .map(|(r, _)| r)
            .collect()
    }

    /// Rational zeros of dx (requires them to exhaust the zero set when used
    /// by the projection verifier).
    pub fn dx_zeros(&self) -> Vec<Rat> {
        rational_roots(&self.xp_numerator(), self.z)
            .into_iter()
            .filter(|(r, _)| !r.is_zero())
            .map(|(r, _)| r)
            .collect()
    }

    /// Degree of the rational-root defect of x': 0 when all dx-zeros are rational.
    pub fn dx_zero_defect(&self) -> i64 {
        let z = self.z;
        let num = self.xp_numerator();
        let mut deg = num.degree(z);
        for (root, m) in rational_roots(&num, z) {
            let _ = root;
            deg -= m as i64;
        }
        deg
    }

    /// Data of the curve expressed in an arbitrary point variable.
    pub fn at_var(&self, v: Var) -> CurveVar {
        let z = self.z;
        let r = RatFun::fraction(self.r_num.rename_var(z, v), self.r_den.rename_var(z, v));
        let rp = r.diff(v);
        let zf = RatFun::var(v);
        let one = RatFun::one();
        // 1 - alpha z R'(z)
        let denom = one.sub(&zf.mul(&rp).scale(&self.alpha));
        let dlogz_dx = one.div(&denom).unwrap();
        let xp = one.div(&zf).unwrap().sub(&rp.scale(&self.alpha));
        let dxfac = zf.div(&denom).unwrap();
        let dx_y = dxfac.mul(&rp).div(&r).unwrap();
        CurveVar {
            v,
            alpha: self.alpha.clone(),
            r,
            rp,
            dlogz_dx,
            xp,
            dxfac,
            dx_y,
            zdzy_cache: std::cell::RefCell::new(Vec::new()),
        }
    }
}

/// Curve data bound to a concrete point variable.
pub struct CurveVar {
    pub v: Var,
    pub alpha: Rat,
    pub r: RatFun,
    pub rp: RatFun,
    /// d log z / d x = 1/(1 - alpha z R')
    pub dlogz_dx: RatFun,
    /// x'(z)
    pub xp: RatFun,
    /// d x^{-1} as a derivation factor: d/dx = dxfac * d/dz
    pub dxfac: RatFun,
    /// d y / d x
    pub dx_y: RatFun,
    zdzy_cache: std::cell::RefCell<Vec<RatFun>>,
}

impl CurveVar {
    pub fn dx(&self, f: &RatFun) -> RatFun {
        self.dxfac.mul(&f.diff(self.v))
    }

    pub fn zdz(&self, f: &RatFun) -> RatFun {
        RatFun::var(self.v).mul(&f.diff(self.v))
    }

    /// (z d/dz)^k y for k >= 1, cached.
    pub fn zdz_y(&self, k: usize) -> RatFun {
        assert!(k >= 1);
        let mut cache = self.zdzy_cache.borrow_mut();
        if cache.is_empty() {
            // z d/dz log R = z R'/R
            cache.push(RatFun::var(self.v).mul(&self.rp).div(&self.r).unwrap());
        }
        while cache.len() < k {
            let last = cache.last().unwrap().clone();
            cache.push(RatFun::var(self.v).mul(&last.diff(self.v)));
        }
        cache[k - 1].clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        // R = 1+z, alpha = 1: fine
        assert!(CurveSpec::new(&[Rat::one(), Rat::one()], &[Rat::one()], Rat::one()).is_ok());
        // R(0) != 1
        assert!(CurveSpec::new(&[Rat::from_int(2), Rat::one()], &[Rat::one()], Rat::one()).is_err());
        // double zero
        assert!(CurveSpec::new(
            &[Rat::one(), Rat::from_int(2), Rat::one()],
            &[Rat::one()],
            Rat::one()
        )
        .is_err());
        // alpha = 0
        assert!(CurveSpec::new(&[Rat::one(), Rat::one()], &[Rat::one()], Rat::zero()).is_err());
    }

    #[test]
    fn special_points() {
        // R = (1+z)/(1 - z/2), alpha = 1/6: dx-zeros at z = 1, 4
        let c = CurveSpec::new(
            &[Rat::one(), Rat::one()],
            &[Rat::one(), Rat::new(-1, 2)],
            Rat::new(1, 6),
        )
        .unwrap();
        assert_eq!(c.r_zeros(), vec![Rat::from_int(-1)]);
        assert_eq!(c.r_poles(), vec![Rat::from_int(2)]);
        let mut zs = c.dx_zeros();
        zs.sort();
        assert_eq!(zs, vec![Rat::one(), Rat::from_int(4)]);
        assert_eq!(c.dx_zero_defect(), 0);
    }

    #[test]
    fn curve_var_derivatives() {
        let c = CurveSpec::new(&[Rat::one(), Rat::one()], &[Rat::one()], Rat::one()).unwrap();
        let cv = c.at_var(var("cv_z1"));
        // for R = 1+z: dlogz/dx = 1/(1-z), dx_y = z/((1+z)(1-z))
        let z = RatFun::var(cv.v);
        let one = RatFun::one();
        assert!(cv.dlogz_dx.eq(&one.div(&one.sub(&z)).unwrap()));
        let expect = z
            .div(&one.add(&z).mul(&one.sub(&z)))
            .unwrap();
        assert!(cv.dx_y.eq(&expect));
        // zdz_y: z d/dz log(1+z) = z/(1+z)
        assert!(cv.zdz_y(1).eq(&z.div(&one.add(&z)).unwrap()));
    }
}
