//! Dense univariate power series over `Rat`, truncated at a fixed order.
//! The workhorse coefficient type of the tau-function and ELSV modules; the
//! generic `TruncatedSeries` stays the public interchange type.

use std::fmt;

use crate::rational::Rat;

/// Truncated power series: coefficients c[0..order), exact through order-1.
#[derive(Clone, PartialEq)]
pub struct PSeries {
    c: Vec<Rat>,
}

impl PSeries {
    pub fn zero(order: usize) -> Self {
        PSeries {
            c: vec![Rat::zero(); order],
        }
    }

    pub fn constant(v: Rat, order: usize) -> Self {
        let mut s = PSeries::zero(order);
        if order > 0 {
            s.c[0] = v;
        }
        s
    }

    pub fn one(order: usize) -> Self {
        PSeries::constant(Rat::one(), order)
    }

    pub fn monomial(e: usize, v: Rat, order: usize) -> Self {
        let mut s = PSeries::zero(order);
        if e < order {
            s.c[e] = v;
        }
        s
    }

    pub fn from_coeffs(c: Vec<Rat>) -> Self {
        PSeries { c }
    }

    pub fn order(&self) -> usize {
        self.c.len()
    }

    pub fn coeff(&self, e: usize) -> Rat {
        self.c.get(e).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn add(&self, o: &PSeries) -> PSeries {
        let n = self.order().min(o.order());
        PSeries {
            c: (0..n).map(|i| &self.c[i] + &o.c[i]).collect(),
        }
    }

    pub fn sub(&self, o: &PSeries) -> PSeries {
        let n = self.order().min(o.order());
        PSeries {
            c: (0..n).map(|i| &self.c[i] - &o.c[i]).collect(),
        }
    }

    pub fn neg(&self) -> PSeries {
        PSeries {
            c: self.c.iter().map(|x| -x).collect(),
        }
    }

    pub fn scale(&self, k: &Rat) -> PSeries {
        PSeries {
            c: self.c.iter().map(|x| x * k).collect(),
        }
    }

    pub fn mul(&self, o: &PSeries) -> PSeries {
        let n = self.order().min(o.order());
        let mut c = vec![Rat::zero(); n];
        for i in 0..n {
            if self.c[i].is_zero() {
                continue;
            }
            for j in 0..n - i {
                if !o.c[j].is_zero() {
                    c[i + j] += &self.c[i] * &o.c[j];
                }
            }
        }
        PSeries { c }
    }

    /// Multiply by x^k (shifting out the top k coefficients).
    pub fn shift_up(&self, k: usize) -> PSeries {
        let n = self.order();
        let mut c = vec![Rat::zero(); n];
        for i in 0..n.saturating_sub(k) {
            c[i + k] = self.c[i].clone();
        }
        PSeries { c }
    }

    pub fn inv(&self) -> Option<PSeries> {
        let a0 = self.coeff(0);
        if a0.is_zero() {
            return None;
        }
        let n = self.order();
        let inv0 = a0.inv().unwrap();
        let mut c = vec![Rat::zero(); n];
        c[0] = inv0.clone();
        for k in 1..n {
            let mut s = Rat::zero();
            for j in 1..=k {
                if !self.c[j].is_zero() && !c[k - j].is_zero() {
                    s += &self.c[j] * &c[k - j];
                }
            }
            c[k] = -(s * inv0.clone());
        }
        Some(PSeries { c })
    }

    pub fn exp(&self) -> PSeries {
        assert!(self.coeff(0).is_zero(), "exp needs zero constant term");
        let n = self.order();
        let mut out = PSeries::one(n);
        let mut term = PSeries::one(n);
        for k in 1..n {
            term = term.mul(self).scale(&Rat::new(1, k as i64));
            if term.is_zero() {
                break;
            }
            out = out.add(&term);
        }
        out
    }

    /// log(1 + self), constant term of self must vanish.
    pub fn log1p(&self) -> PSeries {
        assert!(self.coeff(0).is_zero(), "log1p needs zero constant term");
        let n = self.order();
        let mut out = PSeries::zero(n);
        let mut term = PSeries::one(n);
        for k in 1..n {
            term = term.mul(self);
            if term.is_zero() {
                break;
            }
            out = out.add(&term.scale(&Rat::new(if k % 2 == 1 { 1 } else { -1 }, k as i64)));
        }
        out
    }

    pub fn pow_i64(&self, e: i64) -> Option<PSeries> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut out = PSeries::one(self.order());
        for _ in 0..e.unsigned_abs() {
            out = out.mul(&base);
        }
        Some(out)
    }

    pub fn truncated(&self, order: usize) -> PSeries {
        let mut c = self.c.clone();
        c.truncate(order);
        c.resize(order, Rat::zero());
        PSeries { c }
    }

    /// Nonzero (exponent, coefficient) pairs.
    pub fn entries(&self) -> impl Iterator<Item = (usize, &Rat)> {
        self.c.iter().enumerate().filter(|(_, c)| !c.is_zero())
    }
}

impl fmt::Debug for PSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (e, c) in self.entries() {
            write!(f, " {}:{}", e, c)?;
        }
        write!(f, " ] + O(^{})", self.order())
    }
}

/// S(k * hbar) as a power series in hbar.
pub fn s_of_k_hbar(k: i64, order: usize) -> PSeries {
    let mut s = PSeries::zero(order);
    let mut m = 0usize;
    while 2 * m < order {
        s.c[2 * m] = crate::sop::s_coeff(m) * Rat::from_int(k).pow(2 * m as i64).unwrap();
        m += 1;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_basics() {
        let n = 8;
        let x = PSeries::monomial(1, Rat::one(), n);
        let e = x.exp();
        assert_eq!(e.coeff(3), Rat::new(1, 6));
        let l = e.sub(&PSeries::one(n)).log1p();
        assert_eq!(l, x.truncated(n));
        let inv = PSeries::one(n).sub(&x).inv().unwrap();
        assert_eq!(inv.coeff(5), Rat::one());
        // 1/S(hbar) leading terms
        let s = s_of_k_hbar(1, 6).inv().unwrap();
        assert_eq!(s.coeff(2), Rat::new(-1, 24));
        assert_eq!(s.coeff(4), Rat::new(7, 5760));
    }
}
