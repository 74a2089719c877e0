//! Formal tautological-ring engine: psi/kappa monomials on a (g,n)-labeled
//! space, the one-point forgetful pushforward, iterated pushforwards with
//! series insertions, and their closed-form resummation.
//!
//! kappa_0 is never stored: it is the number 2g-2+n of the ambient space.
//! The pushforward substitutes kappa_m -> kappa_m + psi_{n+1}^m and then
//! applies, monomial by monomial,
//!   pi_* psi^{k} psi_{n+1}^0 = string-lowered sum,
//!   pi_* psi^{k} psi_{n+1}^m = psi^{k} kappa_{m-1}   (m >= 1).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{var, Poly, Var};
use crate::rational::Rat;
use crate::series::Ring;

/// psi/kappa monomial: per-point psi exponents and a sorted multiset of
/// kappa indices (all >= 1).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct TautMono {
    pub psi: Vec<u32>,
    pub kappa: Vec<u32>,
}

impl TautMono {
    pub fn unit(n: usize) -> Self {
        TautMono {
            psi: vec![0; n],
            kappa: Vec::new(),
        }
    }

    pub fn degree(&self) -> u32 {
        self.psi.iter().sum::<u32>() + self.kappa.iter().sum::<u32>()
    }

    fn mul(&self, o: &TautMono) -> TautMono {
        let psi = self
            .psi
            .iter()
            .zip(&o.psi)
            .map(|(a, b)| a + b)
            .collect();
        let mut kappa = self.kappa.clone();
        kappa.extend_from_slice(&o.kappa);
        kappa.sort_unstable();
        TautMono { psi, kappa }
    }
}

/// Linear combination of TautMono over a coefficient ring K, on ambient (g,n).
#[derive(Clone, PartialEq, Debug)]
pub struct TautPoly<K: Ring> {
    pub g: i64,
    pub n: usize,
    pub terms: BTreeMap<TautMono, K>,
}

impl<K: Ring> TautPoly<K> {
    pub fn zero(g: i64, n: usize) -> Self {
        TautPoly {
            g,
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn unit(g: i64, n: usize) -> Self {
        let mut p = TautPoly::zero(g, n);
        p.terms.insert(TautMono::unit(n), K::one());
        p
    }

    pub fn insert(&mut self, m: TautMono, c: K) {
        if c.is_zero() {
            return;
        }
        assert_eq!(m.psi.len(), self.n);
        match self.terms.entry(m) {
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

    pub fn add(&self, o: &Self) -> Self {
        assert!(self.g == o.g && self.n == o.n);
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale_k(&K::one().neg()))
    }

    pub fn scale_k(&self, c: &K) -> Self {
        let mut out = TautPoly::zero(self.g, self.n);
        for (m, v) in &self.terms {
            out.insert(m.clone(), v.mul(c));
        }
        out
    }

    pub fn mul(&self, o: &Self, degcap: u32) -> Self {
        assert!(self.g == o.g && self.n == o.n);
        let mut out = TautPoly::zero(self.g, self.n);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let m = ma.mul(mb);
                if m.degree() > degcap {
                    continue;
                }
                out.insert(m, ca.mul(cb));
            }
        }
        out
    }

    pub fn truncate_degree(&self, degcap: u32) -> Self {
        let mut out = TautPoly::zero(self.g, self.n);
        for (m, c) in &self.terms {
            if m.degree() <= degcap {
                out.insert(m.clone(), c.clone());
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Forgetful pushforward to (g, n-1); the last point is forgotten.
    /// Errors when the downstairs space is unstable.
    pub fn push_one(&self) -> Result<TautPoly<K>> {
        let n_down = self.n.checked_sub(1).ok_or(Error::UnstableTarget(self.g, 0))?;
        if 2 * self.g - 2 + n_down as i64 <= 0 {
            return Err(Error::UnstableTarget(self.g, n_down));
        }
        let kappa0 = Rat::from_int(2 * self.g - 2 + n_down as i64);
        let mut out = TautPoly::zero(self.g, n_down);
        for (mono, coeff) in &self.terms {
            let m0 = mono.psi[n_down];
            let base: Vec<u32> = mono.psi[..n_down].to_vec();
            let kap = &mono.kappa;
            // substitute each kappa_m -> kappa_m + psi_{n+1}^m over subsets
            for mask in 0u32..1 << kap.len() {
                let mut kept: Vec<u32> = Vec::new();
                let mut extra = 0u32;
                for (i, &k) in kap.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        extra += k;
                    } else {
                        kept.push(k);
                    }
                }
                let m = m0 + extra;
                if m == 0 {
                    // string equation
                    for i in 0..n_down {
                        if base[i] > 0 {
                            let mut psi = base.clone();
                            psi[i] -= 1;
                            let mut kk = kept.clone();
                            kk.sort_unstable();
                            out.insert(TautMono { psi, kappa: kk }, coeff.clone());
                        }
                    }
                } else if m == 1 {
                    // kappa_0 is the number 2g-2+n downstairs
                    let mut kk = kept.clone();
                    kk.sort_unstable();
                    out.insert(
                        TautMono {
                            psi: base.clone(),
                            kappa: kk,
                        },
                        coeff.scale(&kappa0),
                    );
                } else {
                    let mut kk = kept.clone();
                    kk.push(m - 1);
                    kk.sort_unstable();
                    out.insert(
                        TautMono {
                            psi: base.clone(),
                            kappa: kk,
                        },
                        coeff.clone(),
                    );
                }
            }
        }
        Ok(out)
    }
}

/// Capped polynomial ring in formal generators f_0..f_K: total degree in
/// (f_0, f_1) is truncated at `t_cap` during multiplication.
#[derive(Clone, PartialEq, Debug)]
pub struct FCoeff {
    pub poly: Poly,
    /// None = neutral (zero/one constants); unified on combination.
    pub t_cap: Option<u32>,
}

pub fn f_var(i: usize) -> Var {
    var(&format!("f{}", i))
}

impl FCoeff {
    pub fn generator(i: usize, t_cap: u32) -> Self {
        FCoeff {
            poly: Poly::var(f_var(i)),
            t_cap: Some(t_cap),
        }
    }

    pub fn constant(c: Rat, t_cap: u32) -> Self {
        FCoeff {
            poly: Poly::constant(c),
            t_cap: Some(t_cap),
        }
    }

    fn cap_of(&self, o: &FCoeff) -> Option<u32> {
        match (self.t_cap, o.t_cap) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (Some(a), None) => Some(a),
            (None, b) => b,
        }
    }

    fn chop(poly: Poly, cap: Option<u32>) -> Poly {
        match cap {
            None => poly,
            Some(t) => {
                let f0 = f_var(0);
                let f1 = f_var(1);
                let mut out = Poly::zero();
                for (m, c) in poly.terms() {
                    if m.exp(f0) + m.exp(f1) <= t {
                        out = out.add(&Poly::monomial(m.clone(), c.clone()));
                    }
                }
                out
            }
        }
    }
}

impl Ring for FCoeff {
    fn zero() -> Self {
        FCoeff {
            poly: Poly::zero(),
            t_cap: None,
        }
    }
    fn one() -> Self {
        FCoeff {
            poly: Poly::one(),
            t_cap: None,
        }
    }
    fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        let cap = self.cap_of(o);
        FCoeff {
            poly: FCoeff::chop(self.poly.add(&o.poly), cap),
            t_cap: cap,
        }
    }
    fn neg(&self) -> Self {
        FCoeff {
            poly: self.poly.neg(),
            t_cap: self.t_cap,
        }
    }
    fn mul(&self, o: &Self) -> Self {
        let cap = self.cap_of(o);
        FCoeff {
            poly: FCoeff::chop(self.poly.mul(&o.poly), cap),
            t_cap: cap,
        }
    }
    fn scale(&self, c: &Rat) -> Self {
        FCoeff {
            poly: self.poly.scale(c),
            t_cap: self.t_cap,
        }
    }
    fn try_inv(&self) -> Option<Self> {
        // only constants are invertible here
        let c = self.poly.constant_value()?;
        Some(FCoeff {
            poly: Poly::constant(c.inv().ok()?),
            t_cap: self.t_cap,
        })
    }
}

/// Sharp p-sum bound: with downstairs degree cap D and (f0,f1)-cap T, the p-th
/// term contributes only for p <= D + 2T.
pub fn p_needed(degree_cap: u32, t_cap: u32) -> usize {
    (degree_cap + 2 * t_cap) as usize
}

/// Left side of the pushforward identity:
/// sum_{p <= p_max} (1/p!) pi_*^p [ prod_j F(psi_{n+j}) prod_i (1-v_i psi_i)^{-1} ],
/// truncated downstairs at `degree_cap`. F is given by ring elements f[0..=K].
/// Errors with "p-cap" when p_max provably misses contributions.
pub fn push_many_lhs<K: Ring>(
    g: i64,
    n: usize,
    f: &[K],
    v: &[K],
    p_max: usize,
    degree_cap: u32,
    t_cap: u32,
) -> Result<TautPoly<K>> {
    assert_eq!(v.len(), n);
    let needed = p_needed(degree_cap, t_cap);
    if p_max < needed {
        // check whether any term beyond p_max actually contributes
        for p in p_max + 1..=needed {
            let term = lhs_term(g, n, f, v, p, degree_cap)?;
            if !term.is_zero() {
                return Err(Error::PCap {
                    given: p_max,
                    needed,
                });
            }
        }
    }
    let mut total = TautPoly::zero(g, n);
    for p in 0..=p_max.min(needed) {
        let term = lhs_term(g, n, f, v, p, degree_cap)?;
        let c = K::one().scale(&Rat::factorial(p as u64).inv().unwrap());
        total = total.add(&term.scale_k(&c));
    }
    Ok(total)
}

fn lhs_term<K: Ring>(
    g: i64,
    n: usize,
    f: &[K],
    v: &[K],
    p: usize,
    degree_cap: u32,
) -> Result<TautPoly<K>> {
    let upcap = degree_cap + p as u32;
    let nn = n + p;
    let mut acc = TautPoly::unit(g, nn);
    for i in 0..n {
        // (1 - v_i psi_i)^{-1} = sum_d v_i^d psi_i^d
        let mut s = TautPoly::zero(g, nn);
        let mut pw = K::one();
        for d in 0..=upcap {
            let mut mono = TautMono::unit(nn);
            mono.psi[i] = d;
            s.insert(mono, pw.clone());
            pw = pw.mul(&v[i]);
        }
        acc = acc.mul(&s, upcap);
    }
    for j in 0..p {
        let mut s = TautPoly::zero(g, nn);
        for (k, fk) in f.iter().enumerate() {
            if k as u32 > upcap {
                break;
            }
            if fk.is_zero() {
                continue;
            }
            let mut mono = TautMono::unit(nn);
            mono.psi[n + j] = k as u32;
            s.insert(mono, fk.clone());
        }
        acc = acc.mul(&s, upcap);
    }
    for _ in 0..p {
        acc = acc.push_one()?;
    }
    Ok(acc.truncate_degree(degree_cap))
}

/// Closed form of the same pushforward sum:
/// (1-f_1^*)^{2-2g-n} e^{(sum v_i) u*} e^{sum s_k* kappa_k} / prod (1 - v_i psi_i),
/// with u* the fixed point of u = sum f_m u^m/m!.
pub fn mainpush_rhs<K: Ring>(
    g: i64,
    n: usize,
    f: &[K],
    v: &[K],
    degree_cap: u32,
    t_cap: u32,
) -> Result<TautPoly<K>> {
    let kmax = f.len() - 1;
    // u* by iteration; converges in the (f0,f1)-adic filtration
    let mut u = K::zero();
    let bound = t_cap as usize + 3;
    let mut converged = false;
    for _ in 0..=bound {
        let nu = eval_flow(f, &u, 0, bound);
        if nu == u {
            converged = true;
            break;
        }
        u = nu;
    }
    if !converged {
        // one more check: a further iteration must be stationary
        let nu = eval_flow(f, &u, 0, bound);
        if nu != u {
            return Err(Error::UstarDivergence);
        }
    }
    let ustar = u;
    let fstar = |k: usize| -> K { eval_flow(f, &ustar, k, bound) };
    let f1s = fstar(1);
    let one_m = K::one().sub(&f1s);
    let e = 2 - 2 * g - n as i64;
    let pref = pow_ring(&one_m, e, t_cap, kmax)?;
    // e^{(sum v) u*}
    let mut sv = K::zero();
    for vi in v {
        sv = sv.add(vi);
    }
    let mut ex = K::one();
    let mut term = K::one();
    for k in 1..=(t_cap as usize + 3) {
        term = term
            .mul(&ustar)
            .mul(&sv)
            .scale(&Rat::from_int(k as i64).inv().unwrap());
        if term.is_zero() {
            break;
        }
        ex = ex.add(&term);
    }
    let scal = pref.mul(&ex);
    // s_k* from exp(-sum s_i t^i) = 1 - sum_k fstar_{k+1} t^k / (1 - f1*)
    let invm = pow_ring(&one_m, -1, t_cap, kmax)?;
    let mut tk: Vec<K> = vec![K::zero(); degree_cap as usize + 1];
    for k in 1..=degree_cap as usize {
        tk[k] = fstar(k + 1).mul(&invm);
    }
    // s-poly_k = [t^k] of -log(1 - sum tk t^k)
    let mut spoly: Vec<K> = vec![K::zero(); degree_cap as usize + 1];
    let mut cur: Vec<K> = vec![K::zero(); degree_cap as usize + 1];
    cur[0] = K::one();
    for m in 1..=degree_cap as usize {
        let mut nxt: Vec<K> = vec![K::zero(); degree_cap as usize + 1];
        for (e1, c1) in cur.iter().enumerate() {
            if c1.is_zero() {
                continue;
            }
            for (e2, c2) in tk.iter().enumerate().skip(1) {
                if e1 + e2 > degree_cap as usize || c2.is_zero() {
                    continue;
                }
                nxt[e1 + e2] = nxt[e1 + e2].add(&c1.mul(c2));
            }
        }
        cur = nxt;
        let minv = Rat::from_int(m as i64).inv().unwrap();
        for (ee, c) in cur.iter().enumerate() {
            if !c.is_zero() {
                spoly[ee] = spoly[ee].add(&c.scale(&minv));
            }
        }
    }
    // e^{sum s_k kappa_k} / prod (1 - v_i psi_i)
    let mut lin = TautPoly::zero(g, n);
    for (k, c) in spoly.iter().enumerate().skip(1) {
        if !c.is_zero() {
            let mono = TautMono {
                psi: vec![0; n],
                kappa: vec![k as u32],
            };
            lin.insert(mono, c.clone());
        }
    }
    let mut expk = TautPoly::unit(g, n);
    let mut term = TautPoly::unit(g, n);
    for m in 1..=degree_cap as usize {
        term = term.mul(&lin, degree_cap);
        if term.is_zero() {
            break;
        }
        expk = expk.add(&term.scale_k(&K::one().scale(&Rat::factorial(m as u64).inv().unwrap())));
    }
    let mut acc = expk;
    for i in 0..n {
        let mut s = TautPoly::zero(g, n);
        let mut pw = K::one();
        for d in 0..=degree_cap {
            let mut mono = TautMono::unit(n);
            mono.psi[i] = d;
            s.insert(mono, pw.clone());
            pw = pw.mul(&v[i]);
        }
        acc = acc.mul(&s, degree_cap);
    }
    Ok(acc.scale_k(&scal))
}

/// sum_m f_{k+m} u^m / m!
fn eval_flow<K: Ring>(f: &[K], u: &K, k: usize, bound: usize) -> K {
    let mut acc = K::zero();
    let mut upow = K::one();
    for m in 0..=bound {
        if k + m < f.len() {
            let c = Rat::factorial(m as u64).inv().unwrap();
            acc = acc.add(&f[k + m].mul(&upow).scale(&c));
        }
        upow = upow.mul(u);
        if upow.is_zero() {
            break;
        }
    }
    acc
}

/// (1 - x)^e for a ring element of the form 1 - x with x cap-positive.
fn pow_ring<K: Ring>(base: &K, e: i64, t_cap: u32, kmax: usize) -> Result<K> {
    if e >= 0 {
        let mut out = K::one();
        for _ in 0..e {
            out = out.mul(base);
        }
        return Ok(out);
    }
    let x = K::one().sub(base);
    let mut inv = K::one();
    let mut term = K::one();
    let bound = (t_cap as usize + 2) * (kmax + 2) + 4;
    for _ in 0..bound {
        term = term.mul(&x);
        if term.is_zero() {
            break;
        }
        inv = inv.add(&term);
    }
    if !term.is_zero() {
        return Err(Error::DegenerateCstar);
    }
    let mut out = K::one();
    for _ in 0..-e {
        out = out.mul(&inv);
    }
    Ok(out)
}

/// Report of the formal identity check: the exact difference (must be zero),
/// the random v's used, and the p-sum length.
pub struct MainpushReport {
    pub difference: TautPoly<FCoeff>,
    pub v: Vec<Rat>,
    pub p_used: usize,
}

/// Run both sides with formal F over the capped f-ring and pseudorandom
/// rational v's; returns the exact difference.
pub fn verify_mainpush(
    g: i64,
    n: usize,
    t_cap: u32,
    k_cap: usize,
    degree_cap: u32,
    p_max: usize,
    seed: u64,
) -> Result<MainpushReport> {
    let mut state = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(1);
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    let v: Vec<Rat> = (0..n)
        .map(|_| Rat::new((next() % 9 + 1) as i64, (next() % 5 + 1) as i64))
        .collect();
    let f: Vec<FCoeff> = (0..=k_cap).map(|i| FCoeff::generator(i, t_cap)).collect();
    let vk: Vec<FCoeff> = v.iter().map(|r| FCoeff::constant(r.clone(), t_cap)).collect();
    let p_used = p_max.max(p_needed(degree_cap, t_cap));
    let lhs = push_many_lhs(g, n, &f, &vk, p_used, degree_cap, t_cap)?;
    let rhs = mainpush_rhs(g, n, &f, &vk, degree_cap, t_cap)?;
    Ok(MainpushReport {
        difference: lhs.sub(&rhs),
        v,
        p_used,
    })
}

/// Express an integral against any pulled-back class of a kappa-carrying
/// monomial on (g,n) as a combination of psi-only monomials on (g,n+p):
/// returns (p, psi exponents upstairs, coefficient). Triangular in the number
/// of kappa factors; pushing the answer back down reproduces the input.
pub fn kappa_reduce(
    g: i64,
    n: usize,
    psi: &[u32],
    kappa: &[u32],
) -> Result<Vec<(usize, Vec<u32>, Rat)>> {
    let mut merged: BTreeMap<(usize, Vec<u32>), Rat> = BTreeMap::new();
    kappa_reduce_rec(g, n, psi, kappa, &Rat::one(), &mut merged)?;
    Ok(merged
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|((p, ps), c)| (p, ps, c))
        .collect())
}

fn kappa_reduce_rec(
    g: i64,
    n: usize,
    psi: &[u32],
    kappa: &[u32],
    coeff: &Rat,
    out: &mut BTreeMap<(usize, Vec<u32>), Rat>,
) -> Result<()> {
    if kappa.is_empty() {
        let e = out.entry((0, psi.to_vec())).or_insert_with(Rat::zero);
        *e += coeff.clone();
        return Ok(());
    }
    let w = kappa.len();
    // leading lift: each kappa_m becomes an extra point with psi^{m+1}
    let mut up_psi = psi.to_vec();
    for &m in kappa {
        up_psi.push(m + 1);
    }
    {
        let e = out
            .entry((w, up_psi.clone()))
            .or_insert_with(Rat::zero);
        *e += coeff.clone();
    }
    // corrections: push the lift back down and subtract the target
    let mut lift: TautPoly<Rat> = TautPoly::zero(g, n + w);
    lift.insert(
        TautMono {
            psi: up_psi,
            kappa: Vec::new(),
        },
        Rat::one(),
    );
    let mut pushed = lift;
    for _ in 0..w {
        pushed = pushed.push_one()?;
    }
    let mut kap_sorted = kappa.to_vec();
    kap_sorted.sort_unstable();
    let target = TautMono {
        psi: psi.to_vec(),
        kappa: kap_sorted,
    };
    let mut found_target = false;
    for (mono, c) in &pushed.terms {
        let mut cc = c.clone();
        if *mono == target {
            cc = &cc - &Rat::one();
            found_target = true;
        }
        if cc.is_zero() {
            continue;
        }
        // strict triangularity: corrections carry strictly fewer kappa factors
        if mono.kappa.len() >= w {
            return Err(Error::ReductionFailure(format!(
                "pushforward of the lift is not triangular: {mono:?}"
            )));
        }
        kappa_reduce_rec(g, n, &mono.psi, &mono.kappa, &(-&cc * coeff), out)?;
    }
    if !found_target {
        return Err(Error::ReductionFailure(
            "lift does not push to the target".into(),
        ));
    }
    Ok(())
}

/// External serialization of a TautPoly over Rat.
#[derive(Serialize, Deserialize)]
pub struct TautPolyRecord {
    pub g: i64,
    pub n: usize,
    pub terms: Vec<TautTermRecord>,
}

#[derive(Serialize, Deserialize)]
pub struct TautTermRecord {
    pub psi: Vec<u32>,
    pub kappa: Vec<u32>,
    pub coeff: String,
}

impl TautPoly<Rat> {
    pub fn to_record(&self) -> TautPolyRecord {
        TautPolyRecord {
            g: self.g,
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| TautTermRecord {
                    psi: m.psi.clone(),
                    kappa: m.kappa.clone(),
                    coeff: c.to_frac_string(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(n: usize, psi: &[(usize, u32)], kappa: &[u32]) -> TautMono {
        let mut m = TautMono::unit(n);
        for (i, e) in psi {
            m.psi[*i] = *e;
        }
        m.kappa = kappa.to_vec();
        m.kappa.sort_unstable();
        m
    }

    #[test]
    fn push_one_rules() {
        // push of psi_{n+1}^1 on (1,2) -> kappa_0 = 2g-2+n = 1 on (1,1)
        let mut p: TautPoly<Rat> = TautPoly::zero(1, 2);
        p.insert(mono(2, &[(1, 1)], &[]), Rat::one());
        let q = p.push_one().unwrap();
        assert_eq!(q.terms.len(), 1);
        assert_eq!(q.terms[&mono(1, &[], &[])], Rat::from_int(1));
        // push of psi_{n+1}^{m+1} -> kappa_m
        let mut p: TautPoly<Rat> = TautPoly::zero(1, 2);
        p.insert(mono(2, &[(1, 3)], &[]), Rat::one());
        let q = p.push_one().unwrap();
        assert_eq!(q.terms[&mono(1, &[], &[2])], Rat::one());
        // push of kappa_1 (no psi): kappa_1 -> kappa_1 + psi^1; pi_*(kappa_1) = 0
        // (m=0 row, no positive psi downstairs), remainder = 2g-2+n
        let mut p: TautPoly<Rat> = TautPoly::zero(1, 2);
        p.insert(mono(2, &[], &[1]), Rat::one());
        let q = p.push_one().unwrap();
        assert_eq!(q.terms.len(), 1);
        assert_eq!(q.terms[&mono(1, &[], &[])], Rat::from_int(1));
        // string equation: psi_1 psi_{n+1}^0 on (0,4) pushes to (0,3)
        let mut p: TautPoly<Rat> = TautPoly::zero(0, 4);
        p.insert(mono(4, &[(0, 2)], &[]), Rat::one());
        let q = p.push_one().unwrap();
        assert_eq!(q.terms[&mono(3, &[(0, 1)], &[])], Rat::one());
        // unstable target
        let p: TautPoly<Rat> = TautPoly::unit(0, 3);
        assert!(matches!(p.push_one(), Err(Error::UnstableTarget(0, 2))));
    }

    #[test]
    fn iterated_push_is_symmetric() {
        // forgetting two extra points in either order gives the same result;
        // here: push twice from (1,3) with different psi powers on the two
        // forgotten slots, comparing against the swapped assignment.
        let build = |e2: u32, e3: u32| -> TautPoly<Rat> {
            let mut p: TautPoly<Rat> = TautPoly::zero(1, 3);
            p.insert(mono(3, &[(0, 1), (1, e2), (2, e3)], &[]), Rat::one());
            p.push_one().unwrap().push_one().unwrap()
        };
        assert_eq!(build(2, 4).terms, build(4, 2).terms);
    }

    #[test]
    fn degree_lowering_and_linearity() {
        let mut p: TautPoly<Rat> = TautPoly::zero(1, 2);
        p.insert(mono(2, &[(0, 1), (1, 2)], &[1]), Rat::from_int(3));
        let q = p.push_one().unwrap();
        for m in q.terms.keys() {
            assert_eq!(m.degree(), 3); // 4 - 1
        }
        let p2 = p.scale_k(&Rat::new(1, 3));
        let q2 = p2.push_one().unwrap();
        assert_eq!(q2.terms, q.scale_k(&Rat::new(1, 3)).terms);
    }

    #[test]
    fn mainpush_small_cases() {
        // (0,3) at T=2, degree_cap=2: difference identically zero
        let rep = verify_mainpush(0, 3, 2, 4, 2, 6, 7).unwrap();
        assert!(rep.difference.is_zero(), "diff = {:?}", rep.difference);
        // (1,1) at T=2, degree_cap=3
        let rep = verify_mainpush(1, 1, 2, 4, 3, 7, 11).unwrap();
        assert!(rep.difference.is_zero());
        assert_eq!(rep.p_used, 7);
    }

    #[test]
    fn lhs_edge_cases() {
        let t_cap = 2u32;
        // F = 0 -> only p=0 survives
        let f: Vec<Rat> = vec![Rat::zero(); 5];
        let v = vec![Rat::new(1, 2)];
        let lhs = push_many_lhs(1, 1, &f, &v, 6, 2, t_cap).unwrap();
        let mut expect: TautPoly<Rat> = TautPoly::zero(1, 1);
        for d in 0..=2u32 {
            expect.insert(
                mono(1, &[(0, d)], &[]),
                Rat::new(1, 2).pow(d as i64).unwrap(),
            );
        }
        assert_eq!(lhs.terms, expect.terms);
        // p_max = 0 with nonzero F errors with p-cap
        let f: Vec<FCoeff> = (0..=4).map(|i| FCoeff::generator(i, t_cap)).collect();
        let vk = vec![FCoeff::constant(Rat::new(1, 2), t_cap)];
        assert!(matches!(
            push_many_lhs(1, 1, &f, &vk, 0, 2, t_cap),
            Err(Error::PCap { .. })
        ));
    }

    #[test]
    fn rhs_f0_only() {
        // F = f0 constant series: u* = f0, f_k* = 0 (k>=1), s* = 0,
        // RHS = e^{(sum v) f0} / prod(1 - v psi)
        let t_cap = 3u32;
        let mut f: Vec<FCoeff> = vec![FCoeff::zero(); 5];
        f[0] = FCoeff::generator(0, t_cap);
        let v = vec![FCoeff::constant(Rat::one(), t_cap)];
        let rhs = mainpush_rhs(1, 1, &f, &v, 2, t_cap).unwrap();
        // coefficient of psi^0: e^{f0} truncated at f0^3
        let unit_coeff = rhs.terms[&mono(1, &[], &[])].clone();
        let f0 = f_var(0);
        assert_eq!(unit_coeff.poly.coeff(&crate::poly::Mono::var(f0, 2)), Rat::new(1, 2));
        assert_eq!(unit_coeff.poly.coeff(&crate::poly::Mono::var(f0, 3)), Rat::new(1, 6));
        // no kappa terms
        assert!(rhs.terms.keys().all(|m| m.kappa.is_empty()));
    }

    #[test]
    fn kappa_reduce_roundtrip() {
        // reduce, then push back down: must reproduce the target exactly
        for (g, n, psi, kappa) in [
            (1i64, 1usize, vec![0u32], vec![1u32]),
            (1, 1, vec![1], vec![1]),
            (1, 2, vec![1, 0], vec![2]),
            (0, 3, vec![0, 0, 0], vec![1, 1]),
            (1, 1, vec![0], vec![1, 1]),
        ] {
            let red = kappa_reduce(g, n, &psi, &kappa).unwrap();
            let mut total: TautPoly<Rat> = TautPoly::zero(g, n);
            for (p, ps, c) in &red {
                let mut cur: TautPoly<Rat> = TautPoly::zero(g, n + p);
                cur.insert(
                    TautMono {
                        psi: ps.clone(),
                        kappa: Vec::new(),
                    },
                    c.clone(),
                );
                for _ in 0..*p {
                    cur = cur.push_one().unwrap();
                }
                total = total.add(&cur);
            }
            let mut expect: TautPoly<Rat> = TautPoly::zero(g, n);
            let mut kap = kappa.clone();
            kap.sort_unstable();
            expect.insert(
                TautMono {
                    psi: psi.clone(),
                    kappa: kap,
                },
                Rat::one(),
            );
            assert_eq!(total.terms, expect.terms, "case ({g},{n},{psi:?},{kappa:?})");
        }
        // kappa-free target reduces to itself
        let red = kappa_reduce(1, 1, &[2], &[]).unwrap();
        assert_eq!(red, vec![(0usize, vec![2u32], Rat::one())]);
    }
}
