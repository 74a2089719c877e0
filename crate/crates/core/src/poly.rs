//! Sparse multivariate polynomials over `Rat` with interned variable names.
//!
//! Monomials are ordered by a genuine monomial order (graded, then lexicographic
//! by variable id) so that leading-term division is well founded.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Mutex;

use once_cell::sync::Lazy;

use crate::rational::Rat;

/// Interned variable.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var(pub u32);

static INTERNER: Lazy<Mutex<(Vec<String>, BTreeMap<String, u32>)>> =
    Lazy::new(|| Mutex::new((Vec::new(), BTreeMap::new())));

/// Intern a variable name.
pub fn var(name: &str) -> Var {
    let mut g = INTERNER.lock().unwrap();
    if let Some(&id) = g.1.get(name) {
        return Var(id);
    }
    let id = g.0.len() as u32;
    g.0.push(name.to_string());
    g.1.insert(name.to_string(), id);
    Var(id)
}

pub fn var_name(v: Var) -> String {
    INTERNER.lock().unwrap().0[v.0 as usize].clone()
}

/// Monomial: sorted (variable, positive exponent) pairs.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Mono(Vec<(Var, u32)>);

impl Mono {
    pub fn unit() -> Self {
        Mono(Vec::new())
    }

    pub fn var(v: Var, e: u32) -> Self {
        if e == 0 {
            Mono::unit()
        } else {
            Mono(vec![(v, e)])
        }
    }

    pub fn exp(&self, v: Var) -> u32 {
        self.0
            .iter()
            .find(|(w, _)| *w == v)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.0.iter().map(|(v, _)| *v)
    }

    pub fn entries(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        let mut out = Vec::with_capacity(self.0.len() + o.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < o.0.len() {
            match self.0[i].0.cmp(&o.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(o.0[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.0[i].0, self.0[i].1 + o.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&o.0[j..]);
        Mono(out)
    }

    /// self / o, None when not divisible.
    pub fn try_div(&self, o: &Mono) -> Option<Mono> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut i = 0;
        for &(v, e) in &o.0 {
            loop {
                if i >= self.0.len() {
                    return None;
                }
                let (w, f) = self.0[i];
                if w < v {
                    out.push((w, f));
                    i += 1;
                } else if w == v {
                    if f < e {
                        return None;
                    }
                    if f > e {
                        out.push((w, f - e));
                    }
                    i += 1;
                    break;
                } else {
                    return None;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        Some(Mono(out))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Mono {
    /// Graded order, ties broken lexicographically by ascending variable id with
    /// earlier variables more significant. Compatible with multiplication.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.total_degree().cmp(&other.total_degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.0.get(i), other.0.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(&(v, e)), Some(&(w, f))) => match v.cmp(&w) {
                    // smaller variable id present only on one side: that side has a
                    // positive exponent where the other has zero -> larger in lex
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => match e.cmp(&f) {
                        Ordering::Equal => {
                            i += 1;
                            j += 1;
                        }
                        o => return o,
                    },
                },
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
            }
        }
    }
}

/// Multivariate polynomial. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Mono, Rat>,
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Poly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.terms
            .iter()
            .rev()
            .cmp(other.terms.iter().rev())
    }
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Mono::unit(), c);
        }
        Poly { terms }
    }

    pub fn one() -> Self {
        Poly::constant(Rat::one())
    }

    pub fn var(v: Var) -> Self {
        Poly::monomial(Mono::var(v, 1), Rat::one())
    }

    pub fn monomial(m: Mono, c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    /// Univariate polynomial from coefficient list (constant first).
    pub fn from_coeffs(v: Var, coeffs: &[Rat]) -> Self {
        let mut terms = BTreeMap::new();
        for (e, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                terms.insert(Mono::var(v, e as u32), c.clone());
            }
        }
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(|m| *m == Mono::unit())
    }

    /// Some(c) when the polynomial is the constant c.
    pub fn constant_value(&self) -> Option<Rat> {
        if self.is_constant() {
            Some(self.constant_part())
        } else {
            None
        }
    }

    pub fn constant_part(&self) -> Rat {
        self.terms.get(&Mono::unit()).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Mono) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn leading(&self) -> Option<(&Mono, &Rat)> {
        self.terms.iter().next_back()
    }

    pub fn degree(&self, v: Var) -> i64 {
        self.terms
            .keys()
            .map(|m| m.exp(v) as i64)
            .max()
            .unwrap_or(-1)
    }

    pub fn total_degree(&self) -> i64 {
        self.terms
            .keys()
            .map(|m| m.total_degree() as i64)
            .max()
            .unwrap_or(-1)
    }

    /// All variables appearing with positive exponent.
    pub fn vars(&self) -> Vec<Var> {
        let mut vs: Vec<Var> = Vec::new();
        for m in self.terms.keys() {
            for v in m.vars() {
                if !vs.contains(&v) {
                    vs.push(v);
                }
            }
        }
        vs.sort();
        vs
    }

    fn insert(&mut self, m: Mono, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let nv = e.get() + &c;
                if nv.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = nv;
                }
            }
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert(m.clone(), -c);
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                out.insert(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn diff(&self, v: Var) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.exp(v);
            if e == 0 {
                continue;
            }
            let lowered = m.try_div(&Mono::var(v, 1)).unwrap();
            out.insert(lowered, c * &Rat::from_int(e as i64));
        }
        out
    }

    /// Substitute variable v := rational value.
    pub fn subst_rat(&self, v: Var, val: &Rat) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.exp(v);
            let rest = m.try_div(&Mono::var(v, e)).unwrap();
            out.insert(rest, c * &val.pow(e as i64).unwrap());
        }
        out
    }

    /// Substitute variable v := polynomial p.
    pub fn subst_poly(&self, v: Var, p: &Poly) -> Poly {
        let max_e = self.degree(v).max(0) as u32;
        let mut pows: Vec<Poly> = vec![Poly::one()];
        for _ in 0..max_e {
            pows.push(pows.last().unwrap().mul(p));
        }
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.exp(v);
            let rest = m.try_div(&Mono::var(v, e)).unwrap();
            let t = Poly::monomial(rest, c.clone()).mul(&pows[e as usize]);
            out = out.add(&t);
        }
        out
    }

    /// Rename a variable (target must not occur).
    pub fn rename_var(&self, from: Var, to: Var) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.exp(from);
            let rest = m.try_div(&Mono::var(from, e)).unwrap();
            out.insert(rest.mul(&Mono::var(to, e)), c.clone());
        }
        out
    }

    /// Exact division; None when the remainder is nonzero.
    pub fn exact_div(&self, d: &Poly) -> Option<Poly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let (dl, dc) = d.leading().unwrap();
        let dl = dl.clone();
        let dc = dc.clone();
        let mut rem = self.clone();
        let mut q = Poly::zero();
        while let Some((rl, rc)) = rem.leading() {
            let m = rl.try_div(&dl)?;
            let c = rc / &dc;
            q.insert(m.clone(), c.clone());
            for (md, cd) in &d.terms {
                rem.insert(m.mul(md), -&(cd * &c));
            }
        }
        Some(q)
    }

    /// Monic normalization: returns (leading coefficient, self/leading).
    pub fn normalize(&self) -> (Rat, Poly) {
        match self.leading() {
            None => (Rat::one(), Poly::zero()),
            Some((_, lc)) => {
                let lc = lc.clone();
                let inv = lc.inv().unwrap();
                (lc, self.scale(&inv))
            }
        }
    }

    /// Coefficient of v^k, as a polynomial in the remaining variables.
    pub fn coeff_of_var(&self, v: Var, k: u32) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            if m.exp(v) == k {
                out.insert(m.try_div(&Mono::var(v, k)).unwrap(), c.clone());
            }
        }
        out
    }

    /// Is this univariate in v (or constant)?
    pub fn is_univariate_in(&self, v: Var) -> bool {
        self.terms
            .keys()
            .all(|m| m.vars().all(|w| w == v))
    }

    /// Dense coefficient list for a univariate polynomial.
    pub fn univariate_coeffs(&self, v: Var) -> Vec<Rat> {
        assert!(self.is_univariate_in(v));
        let d = self.degree(v).max(0) as usize;
        let mut out = vec![Rat::zero(); d + 1];
        for (m, c) in &self.terms {
            out[m.exp(v) as usize] = c.clone();
        }
        out
    }
}

/// Euclidean gcd of univariate polynomials (monic result).
pub fn univariate_gcd(a: &Poly, b: &Poly, v: Var) -> Poly {
    assert!(a.is_univariate_in(v) && b.is_univariate_in(v));
    let (mut x, mut y) = (a.clone(), b.clone());
    while !y.is_zero() {
        let r = univariate_rem(&x, &y, v);
        x = y;
        y = r;
    }
    x.normalize().1
}

fn univariate_rem(a: &Poly, b: &Poly, v: Var) -> Poly {
    let db = b.degree(v);
    assert!(db >= 0);
    let blc = b.coeff_of_var(v, db as u32).constant_part();
    let mut rem = a.clone();
    while rem.degree(v) >= db && !rem.is_zero() {
        let dr = rem.degree(v);
        let rc = rem.coeff_of_var(v, dr as u32).constant_part();
        let shift = Poly::monomial(Mono::var(v, (dr - db) as u32), &rc / &blc);
        rem = rem.sub(&shift.mul(b));
    }
    rem
}

/// All rational roots of a univariate polynomial, with multiplicity.
pub fn rational_roots(p: &Poly, v: Var) -> Vec<(Rat, u32)> {
    assert!(p.is_univariate_in(v) && !p.is_zero());
    let mut out: Vec<(Rat, u32)> = Vec::new();
    let mut cur = p.clone();
    // strip roots at 0
    let mut zero_mult = 0;
    while cur.coeff_of_var(v, 0).is_zero() && !cur.is_zero() {
        cur = cur.exact_div(&Poly::var(v)).unwrap();
        zero_mult += 1;
    }
    if zero_mult > 0 {
        out.push((Rat::zero(), zero_mult));
    }
    // clear denominators to integer coefficients
    let coeffs = cur.univariate_coeffs(v);
    let mut lcm = num::BigInt::from(1);
    for c in &coeffs {
        lcm = num::integer::lcm(lcm, c.denom().clone());
    }
    let ints: Vec<num::BigInt> = coeffs.iter().map(|c| c.numer() * (&lcm / c.denom())).collect();
    let a0 = ints.first().cloned().unwrap_or_default();
    let an = ints.last().cloned().unwrap_or_default();
    if a0 == num::BigInt::from(0) || an == num::BigInt::from(0) {
        return out;
    }
    let cand_num = divisors(&a0.magnitude().clone().into());
    let cand_den = divisors(&an.magnitude().clone().into());
    let mut found: Vec<Rat> = Vec::new();
    for p_ in &cand_num {
        for q_ in &cand_den {
            for sign in [1i64, -1] {
                let cand = Rat::from_big(
                    num::BigInt::from(sign) * p_.clone(),
                    q_.clone(),
                );
                if found.contains(&cand) {
                    continue;
                }
                if eval_univ(&coeffs, &cand).is_zero() {
                    found.push(cand);
                }
            }
        }
    }
    for root in found {
        let linear = Poly::var(v).sub(&Poly::constant(root.clone()));
        let mut mult = 0;
        while let Some(q) = cur.exact_div(&linear) {
            cur = q;
            mult += 1;
        }
        if mult > 0 {
            out.push((root, mult));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

fn eval_univ(coeffs: &[Rat], x: &Rat) -> Rat {
    let mut acc = Rat::zero();
    for c in coeffs.iter().rev() {
        acc = &(&acc * x) + c;
    }
    acc
}

fn divisors(n: &num::BigInt) -> Vec<num::BigInt> {
    // small search is enough for test curves; fall back to 1 and |n|
    use num::ToPrimitive;
    let mut out = vec![num::BigInt::from(1)];
    if let Some(m) = n.magnitude().to_u64() {
        for d in 2..=m {
            if m % d == 0 {
                out.push(num::BigInt::from(d));
            }
            if d > 10_000 {
                break;
            }
        }
    } else {
        out.push(n.clone());
    }
    out.sort();
    out.dedup();
    out
}

fn fmt_poly(p: &Poly, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if p.is_zero() {
        return write!(f, "0");
    }
    let mut first = true;
    for (m, c) in p.terms.iter().rev() {
        if !first {
            write!(f, " + ")?;
        }
        first = false;
        write!(f, "{}", c)?;
        for (v, e) in m.entries() {
            write!(f, "*{}^{}", var_name(*v), e)?;
        }
    }
    Ok(())
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_poly(self, f)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_poly(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_order_is_multiplicative() {
        let a = var("mo_a");
        let b = var("mo_b");
        let x = Mono::var(a, 1);
        let y = Mono::var(b, 1);
        assert!(x > y || y > x);
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        // multiply both sides by lo: order must be preserved
        assert!(lo.mul(&lo) < hi.mul(&lo));
    }

    #[test]
    fn exact_division() {
        let z = var("ed_z");
        let w = var("ed_w");
        let p = Poly::var(z).add(&Poly::var(w)); // z + w
        let q = Poly::var(z).sub(&Poly::var(w)); // z - w
        let prod = p.mul(&q);
        assert_eq!(prod.exact_div(&p).unwrap(), q);
        assert_eq!(prod.exact_div(&q).unwrap(), p);
        assert!(p.exact_div(&q).is_none());
    }

    #[test]
    fn roots_and_gcd() {
        let z = var("rg_z");
        // (z-1)^2 (z+2) (2z-3)
        let f = Poly::from_coeffs(z, &[Rat::from_int(-1), Rat::from_int(1)])
            .pow(2)
            .mul(&Poly::from_coeffs(z, &[Rat::from_int(2), Rat::from_int(1)]))
            .mul(&Poly::from_coeffs(z, &[Rat::from_int(-3), Rat::from_int(2)]));
        let roots = rational_roots(&f, z);
        assert_eq!(
            roots,
            vec![
                (Rat::from_int(-2), 1),
                (Rat::from_int(1), 2),
                (Rat::new(3, 2), 1)
            ]
        );
        let g = univariate_gcd(&f, &f.diff(z), z);
        assert_eq!(g.degree(z), 1); // double root z=1 survives
    }
}
