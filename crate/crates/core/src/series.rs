//! Truncated formal power series in named variables over a generic coefficient
//! ring. Each variable carries a window [lo, hi): `lo` is a hard support bound
//! (valuation) and `hi` an exclusive truncation order. Binary operations align
//! variable sets (a missing variable counts as exact) and propagate windows by
//! the minimum rule, shifted by valuations for multiplication.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::poly::{var_name, Var};
use crate::ratfun::RatFun;
use crate::rational::Rat;

/// Coefficient ring: a commutative Rat-algebra with exact arithmetic.
pub trait Ring: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, c: &Rat) -> Self;
    fn try_inv(&self) -> Option<Self>;
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
}

impl Ring for Rat {
    fn zero() -> Self {
        Rat::zero()
    }
    fn one() -> Self {
        Rat::one()
    }
    fn is_zero(&self) -> bool {
        Rat::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, c: &Rat) -> Self {
        self * c
    }
    fn try_inv(&self) -> Option<Self> {
        self.inv().ok()
    }
}

impl Ring for RatFun {
    fn zero() -> Self {
        RatFun::zero()
    }
    fn one() -> Self {
        RatFun::one()
    }
    fn is_zero(&self) -> bool {
        RatFun::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        RatFun::add(self, o)
    }
    fn neg(&self) -> Self {
        RatFun::neg(self)
    }
    fn mul(&self, o: &Self) -> Self {
        RatFun::mul(self, o)
    }
    fn scale(&self, c: &Rat) -> Self {
        RatFun::scale(self, c)
    }
    fn try_inv(&self) -> Option<Self> {
        RatFun::inv(self).ok()
    }
}

impl Ring for crate::poly::Poly {
    fn zero() -> Self {
        crate::poly::Poly::zero()
    }
    fn one() -> Self {
        crate::poly::Poly::one()
    }
    fn is_zero(&self) -> bool {
        crate::poly::Poly::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        crate::poly::Poly::add(self, o)
    }
    fn neg(&self) -> Self {
        crate::poly::Poly::neg(self)
    }
    fn mul(&self, o: &Self) -> Self {
        crate::poly::Poly::mul(self, o)
    }
    fn scale(&self, c: &Rat) -> Self {
        crate::poly::Poly::scale(self, c)
    }
    fn try_inv(&self) -> Option<Self> {
        let c = self.constant_value()?;
        c.inv().ok().map(crate::poly::Poly::constant)
    }
}

/// Per-variable exponent window: support in [lo, hi).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn order(hi: i64) -> Self {
        Window { lo: 0, hi }
    }
    pub fn laurent(lo: i64, hi: i64) -> Self {
        assert!(lo <= 0 && hi > lo);
        Window { lo, hi }
    }
}

const UNBOUNDED: i64 = i64::MAX / 4;

#[derive(Clone)]
pub struct TruncatedSeries<C: Ring> {
    vars: Vec<Var>,
    windows: Vec<Window>,
    coeffs: BTreeMap<Vec<i64>, C>,
}

pub type RatSeries = TruncatedSeries<Rat>;
pub type RfSeries = TruncatedSeries<RatFun>;

impl<C: Ring> TruncatedSeries<C> {
    pub fn new(vars: &[(Var, Window)]) -> Self {
        let mut vs: Vec<(Var, Window)> = vars.to_vec();
        vs.sort_by_key(|(v, _)| *v);
        TruncatedSeries {
            vars: vs.iter().map(|(v, _)| *v).collect(),
            windows: vs.iter().map(|(_, w)| *w).collect(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn zero_like(&self) -> Self {
        TruncatedSeries {
            vars: self.vars.clone(),
            windows: self.windows.clone(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(&self, c: C) -> Self {
        let mut s = self.zero_like();
        if !c.is_zero() {
            s.coeffs.insert(vec![0; self.vars.len()], c);
        }
        s
    }

    /// Monomial c * prod v^e for (v, e) pairs; unspecified exponents are 0.
    pub fn monomial(&self, c: C, exps: &[(Var, i64)]) -> Self {
        let mut s = self.zero_like();
        if c.is_zero() {
            return s;
        }
        let mut key = vec![0i64; self.vars.len()];
        for (v, e) in exps {
            let i = self.vars.iter().position(|w| w == v).expect("unknown series variable");
            key[i] = *e;
        }
        for (i, e) in key.iter().enumerate() {
            assert!(
                self.windows[i].lo <= *e && *e < self.windows[i].hi,
                "monomial exponent outside window"
            );
        }
        s.coeffs.insert(key, c);
        s
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn window(&self, v: Var) -> Window {
        match self.vars.iter().position(|w| *w == v) {
            Some(i) => self.windows[i],
            None => Window { lo: 0, hi: UNBOUNDED },
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<i64>, &C)> {
        self.coeffs.iter()
    }

    fn insert(&mut self, key: Vec<i64>, c: C) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let nv = e.get().add(&c);
                if nv.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = nv;
                }
            }
        }
    }

    /// Align two series to the common variable universe and combined windows.
    fn aligned(&self, o: &Self, mul: bool) -> (Self, Self) {
        if self.vars == o.vars {
            let mut a = self.clone();
            let mut b = o.clone();
            for i in 0..a.windows.len() {
                let (wa, wb) = (a.windows[i], b.windows[i]);
                let w = if mul {
                    Window {
                        lo: wa.lo.saturating_add(wb.lo).min(UNBOUNDED),
                        hi: (wa.hi.saturating_add(wb.lo))
                            .min(wb.hi.saturating_add(wa.lo))
                            .min(UNBOUNDED),
                    }
                } else {
                    Window {
                        lo: wa.lo.min(wb.lo),
                        hi: wa.hi.min(wb.hi),
                    }
                };
                a.windows[i] = w;
                b.windows[i] = w;
            }
            return (a, b);
        }
        let mut vars: Vec<Var> = self.vars.clone();
        for v in &o.vars {
            if !vars.contains(v) {
                vars.push(*v);
            }
        }
        vars.sort();
        let reindex = |s: &Self| -> Self {
            let mut windows = Vec::with_capacity(vars.len());
            for v in &vars {
                windows.push(s.window(*v));
            }
            let mut out = TruncatedSeries {
                vars: vars.clone(),
                windows,
                coeffs: BTreeMap::new(),
            };
            for (key, c) in &s.coeffs {
                let mut nk = vec![0i64; vars.len()];
                for (i, v) in s.vars.iter().enumerate() {
                    let j = vars.iter().position(|w| w == v).unwrap();
                    nk[j] = key[i];
                }
                out.coeffs.insert(nk, c.clone());
            }
            out
        };
        let a = reindex(self);
        let b = reindex(o);
        a.aligned(&b, mul)
    }

    pub fn add(&self, o: &Self) -> Self {
        let (mut a, b) = self.aligned(o, false);
        for (k, c) in b.coeffs {
            a.insert(k, c);
        }
        a.truncate_to_windows();
        a
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        let mut s = self.clone();
        for c in s.coeffs.values_mut() {
            *c = c.neg();
        }
        s
    }

    pub fn scale(&self, c: &Rat) -> Self {
        let mut s = self.zero_like();
        if c.is_zero() {
            return s;
        }
        for (k, v) in &self.coeffs {
            let nv = v.scale(c);
            if !nv.is_zero() {
                s.coeffs.insert(k.clone(), nv);
            }
        }
        s
    }

    pub fn scale_coeff(&self, c: &C) -> Self {
        let mut s = self.zero_like();
        for (k, v) in &self.coeffs {
            let nv = v.mul(c);
            if !nv.is_zero() {
                s.coeffs.insert(k.clone(), nv);
            }
        }
        s
    }

    fn truncate_to_windows(&mut self) {
        let windows = self.windows.clone();
        self.coeffs.retain(|k, _| {
            k.iter()
                .zip(&windows)
                .all(|(e, w)| w.lo <= *e && *e < w.hi)
        });
    }

    pub fn mul(&self, o: &Self) -> Self {
        let (a, b) = self.aligned(o, true);
        let mut out = a.zero_like();
        for (ka, ca) in &a.coeffs {
            'inner: for (kb, cb) in &b.coeffs {
                let mut key = Vec::with_capacity(ka.len());
                for (i, (ea, eb)) in ka.iter().zip(kb).enumerate() {
                    let e = ea + eb;
                    if e < out.windows[i].lo || e >= out.windows[i].hi {
                        continue 'inner;
                    }
                    key.push(e);
                }
                out.insert(key, ca.mul(cb));
            }
        }
        out
    }

    /// exp(self); requires zero constant term and non-negative exponents.
    pub fn exp(&self) -> Result<Self> {
        let zero_key = vec![0i64; self.vars.len()];
        if self.coeffs.contains_key(&zero_key) {
            return Err(Error::SeriesDomain("exp needs zero constant term".into()));
        }
        if self.coeffs.keys().any(|k| k.iter().any(|e| *e < 0)) {
            return Err(Error::SeriesDomain(
                "exp needs non-negative exponents".into(),
            ));
        }
        let mut out = self.constant(C::one());
        let mut term = self.constant(C::one());
        let bound = self.iteration_bound();
        for n in 1..=bound {
            term = term.mul(self).scale(&Rat::new(1, n as i64));
            if term.is_zero() {
                return Ok(out);
            }
            out = out.add(&term);
        }
        Err(Error::SeriesDomain("exp did not terminate".into()))
    }

    /// log(1 + self); requires zero constant term and non-negative exponents.
    pub fn log1p(&self) -> Result<Self> {
        let zero_key = vec![0i64; self.vars.len()];
        if self.coeffs.contains_key(&zero_key) {
            return Err(Error::SeriesDomain("log needs constant term 1".into()));
        }
        if self.coeffs.keys().any(|k| k.iter().any(|e| *e < 0)) {
            return Err(Error::SeriesDomain(
                "log needs non-negative exponents".into(),
            ));
        }
        let mut out = self.zero_like();
        let mut term = self.constant(C::one());
        let bound = self.iteration_bound();
        for n in 1..=bound {
            term = term.mul(self);
            if term.is_zero() {
                return Ok(out);
            }
            out = out.add(&term.scale(&Rat::new(if n % 2 == 1 { 1 } else { -1 }, n as i64)));
        }
        Err(Error::SeriesDomain("log did not terminate".into()))
    }

    fn iteration_bound(&self) -> u64 {
        let mut b: u64 = 2;
        for w in &self.windows {
            let width = (w.hi - w.lo).max(1);
            b = b.saturating_add(width.unsigned_abs());
        }
        b.min(100_000)
    }

    /// Coefficient of v^e, as a series in the remaining variables.
    pub fn coeff_of(&self, v: Var, e: i64) -> Self {
        let i = self
            .vars
            .iter()
            .position(|w| *w == v)
            .expect("coeff_of: unknown variable");
        let mut vars = self.vars.clone();
        let mut windows = self.windows.clone();
        vars.remove(i);
        windows.remove(i);
        let mut out = TruncatedSeries {
            vars,
            windows,
            coeffs: BTreeMap::new(),
        };
        for (k, c) in &self.coeffs {
            if k[i] == e {
                let mut nk = k.clone();
                nk.remove(i);
                out.insert(nk, c.clone());
            }
        }
        out
    }

    pub fn max_exp(&self, v: Var) -> Option<i64> {
        let i = self.vars.iter().position(|w| *w == v)?;
        self.coeffs.keys().map(|k| k[i]).max()
    }

    pub fn min_exp(&self, v: Var) -> Option<i64> {
        let i = self.vars.iter().position(|w| *w == v)?;
        self.coeffs.keys().map(|k| k[i]).min()
    }

    /// Extract the unique constant coefficient after checking that no variable
    /// carries a nonzero exponent.
    pub fn constant_term(&self) -> C {
        self.coeffs
            .get(&vec![0i64; self.vars.len()])
            .cloned()
            .unwrap_or_else(C::zero)
    }

    pub fn map_coeffs<F: Fn(&C) -> C>(&self, f: F) -> Self {
        let mut out = self.zero_like();
        for (k, c) in &self.coeffs {
            let nc = f(c);
            if !nc.is_zero() {
                out.coeffs.insert(k.clone(), nc);
            }
        }
        out
    }

    /// Keep only coefficients whose exponent of `v` equals its value mod 2 == parity.
    pub fn assert_parity(&self, v: Var, parity: i64) {
        if let Some(i) = self.vars.iter().position(|w| *w == v) {
            for k in self.coeffs.keys() {
                assert!(
                    (k[i] - parity) % 2 == 0,
                    "unexpected parity in {} exponent {}",
                    var_name(v),
                    k[i]
                );
            }
        }
    }
}

impl<C: Ring> PartialEq for TruncatedSeries<C> {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = self.aligned(other, false);
        a.coeffs == b.coeffs
    }
}

impl<C: Ring> fmt::Debug for TruncatedSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Series[")?;
        for (i, v) in self.vars.iter().enumerate() {
            write!(
                f,
                "{}:{}..{} ",
                var_name(*v),
                self.windows[i].lo,
                self.windows[i].hi
            )?;
        }
        write!(f, "]{{")?;
        for (k, c) in &self.coeffs {
            write!(f, " {:?}:{:?}", k, c)?;
        }
        write!(f, " }}")
    }
}

impl RatSeries {
    /// Serialization contract: (exponent-vector, "num/den") pairs in lexicographic
    /// exponent order.
    pub fn to_pairs(&self) -> Vec<(Vec<i64>, String)> {
        let mut out: Vec<(Vec<i64>, String)> = self
            .coeffs
            .iter()
            .map(|(k, c)| (k.clone(), c.to_frac_string()))
            .collect();
        out.sort();
        out
    }
}

/// Compositional inverse of a univariate series with zero constant term and
/// invertible linear coefficient: returns g with f(g(y)) = y to the window.
pub fn reversion(f: &RatSeries) -> Result<RatSeries> {
    assert_eq!(f.vars.len(), 1, "reversion needs a univariate series");
    let v = f.vars[0];
    let hi = f.window(v).hi;
    if f.coeffs.keys().any(|k| k[0] <= 0) {
        return Err(Error::NonInvertible(
            "reversion needs zero constant term".into(),
        ));
    }
    let a1 = f
        .coeffs
        .get(&vec![1i64])
        .cloned()
        .unwrap_or_else(Rat::zero);
    if a1.is_zero() {
        return Err(Error::NonInvertible("zero linear coefficient".into()));
    }
    // Solve coefficientwise: g = sum b_k y^k; the k-th coefficient of f(g) must
    // match delta_{k,1}.
    let mut b: Vec<Rat> = vec![Rat::zero(), a1.inv()?];
    let a = |k: i64| f.coeffs.get(&vec![k]).cloned().unwrap_or_else(Rat::zero);
    for k in 2..hi {
        // compute [y^k] f(g_partial) with b_k = 0, then correct
        let mut gp = f.zero_like();
        for (e, c) in b.iter().enumerate() {
            if !c.is_zero() {
                gp = gp.add(&gp.monomial(c.clone(), &[(v, e as i64)]));
            }
        }
        // f(gp): substitute series into series
        let mut acc = f.zero_like();
        let mut pw = f.constant(Rat::one());
        for j in 1..hi {
            pw = pw.mul(&gp);
            let aj = a(j);
            if !aj.is_zero() {
                acc = acc.add(&pw.scale(&aj));
            }
            if pw.is_zero() {
                break;
            }
        }
        let cur = acc
            .coeffs
            .get(&vec![k])
            .cloned()
            .unwrap_or_else(Rat::zero);
        // adding b_k y^k changes [y^k] by a1 * b_k
        let bk = -(cur / a1.clone());
        b.push(bk);
    }
    let mut out = f.zero_like();
    for (e, c) in b.iter().enumerate() {
        if !c.is_zero() {
            out = out.add(&out.monomial(c.clone(), &[(v, e as i64)]));
        }
    }
    Ok(out)
}

/// Substitute a series g (same variable universe as the output) for the single
/// variable of the polynomial-coefficient list.
pub fn compose_univariate(coeffs: &[Rat], g: &RatSeries) -> RatSeries {
    let mut acc = g.zero_like();
    let mut pw = g.constant(Rat::one());
    for (i, c) in coeffs.iter().enumerate() {
        if i > 0 {
            pw = pw.mul(g);
        }
        if !c.is_zero() {
            acc = acc.add(&pw.scale(c));
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::var;

    fn tser(v: Var, hi: i64) -> RatSeries {
        TruncatedSeries::new(&[(v, Window::order(hi))])
    }

    #[test]
    fn exp_log_examples() {
        let t = var("s_t");
        let s = tser(t, 4);
        // exp(0) = 1
        assert_eq!(s.exp().unwrap(), s.constant(Rat::one()));
        // log(1+t) = t - t^2/2 + t^3/3
        let x = s.monomial(Rat::one(), &[(t, 1)]);
        let lg = x.log1p().unwrap();
        let expect = s
            .monomial(Rat::one(), &[(t, 1)])
            .add(&s.monomial(Rat::new(-1, 2), &[(t, 2)]))
            .add(&s.monomial(Rat::new(1, 3), &[(t, 3)]));
        assert_eq!(lg, expect);
        // exp(log(1 + t + t^2)) = 1 + t + t^2
        let y = x.add(&s.monomial(Rat::one(), &[(t, 2)]));
        let back = y.log1p().unwrap().exp().unwrap();
        assert_eq!(back, s.constant(Rat::one()).add(&y));
        // constant-term violations
        assert!(s.constant(Rat::one()).exp().is_err());
    }

    #[test]
    fn reversion_examples() {
        let t = var("s_rev_t");
        let s = tser(t, 6);
        // rev(t) = t
        let x = s.monomial(Rat::one(), &[(t, 1)]);
        assert_eq!(reversion(&x).unwrap(), x);
        // X = z e^{-z}: z(X) = sum k^{k-1}/k! X^k
        let mut f = s.zero_like();
        // z e^{-z} = sum (-1)^{k-1} z^k/(k-1)!
        for k in 1..6 {
            let c = Rat::new(if k % 2 == 1 { 1 } else { -1 }, 1)
                * Rat::factorial(k - 1).inv().unwrap();
            f = f.add(&s.monomial(c, &[(t, k as i64)]));
        }
        let g = reversion(&f).unwrap();
        for k in 1u64..6 {
            let expect = Rat::from_int((k as i64).pow((k - 1) as u32))
                * Rat::factorial(k).inv().unwrap();
            assert_eq!(g.coeff_of(t, k as i64).constant_term(), expect, "k={k}");
        }
        // involution
        let p = s
            .monomial(Rat::one(), &[(t, 1)])
            .add(&s.monomial(Rat::one(), &[(t, 2)]))
            .add(&s.monomial(Rat::from_int(5), &[(t, 3)]));
        let q = reversion(&reversion(&p).unwrap()).unwrap();
        assert_eq!(q, p);
        // zero linear coefficient
        let bad = s.monomial(Rat::one(), &[(t, 2)]);
        assert!(matches!(reversion(&bad), Err(Error::NonInvertible(_))));
    }

    #[test]
    fn window_propagation() {
        let t = var("s_w_t");
        let a = tser(t, 5).monomial(Rat::one(), &[(t, 1)]);
        let b = tser(t, 3).monomial(Rat::one(), &[(t, 1)]);
        let p = a.mul(&b);
        assert_eq!(p.window(t).hi, 3); // min rule with declared valuation bound 0
        let q = a.add(&b);
        assert_eq!(q.window(t).hi, 3);
    }
}
