//! Schur polynomials in power-sum variables via Jacobi-Trudi determinants.
//!
//! Power-sum monomials are multisets of part indices; s_lambda is homogeneous
//! of weighted degree |lambda| with weight(p_k) = k. The determinant runs over
//! the shorter side of the diagram (h-form or, after transposing, e-form), so
//! the matrix size is at most sqrt(|lambda|).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::rational::Rat;

/// Monomial in power sums: sorted list of indices with repetition,
/// e.g. p_1^2 p_3 <-> [1, 1, 3].
pub type PMono = Vec<u32>;

/// Polynomial in power sums over Rat.
pub type PPoly = BTreeMap<PMono, Rat>;

pub fn ppoly_insert(p: &mut PPoly, m: PMono, c: Rat) {
    if c.is_zero() {
        return;
    }
    match p.entry(m) {
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

pub fn ppoly_mul(a: &PPoly, b: &PPoly, degcap: u32) -> PPoly {
    let mut out = PPoly::new();
    for (ma, ca) in a {
        let da: u32 = ma.iter().sum();
        for (mb, cb) in b {
            let db: u32 = mb.iter().sum();
            if da + db > degcap {
                continue;
            }
            let mut m = ma.clone();
            m.extend_from_slice(mb);
            m.sort_unstable();
            ppoly_insert(&mut out, m, ca * cb);
        }
    }
    out
}

pub fn ppoly_add_scaled(dst: &mut PPoly, src: &PPoly, c: &Rat) {
    for (m, v) in src {
        ppoly_insert(dst, m.clone(), v * c);
    }
}

/// Cache of h_n / e_n expansions and Schur polynomials.
#[derive(Default)]
pub struct SchurCache {
    h: Vec<PPoly>,
    e: Vec<PPoly>,
    s: BTreeMap<Vec<u32>, PPoly>,
}

impl SchurCache {
    pub fn new() -> Self {
        SchurCache::default()
    }

    /// Complete homogeneous h_n in power sums (Newton: n h_n = sum p_k h_{n-k}).
    fn h(&mut self, n: usize) -> PPoly {
        while self.h.len() <= n {
            let k = self.h.len();
            if k == 0 {
                self.h.push(BTreeMap::from([(PMono::new(), Rat::one())]));
                continue;
            }
            let mut acc = PPoly::new();
            for j in 1..=k {
                let prev = self.h[k - j].clone();
                for (m, c) in prev {
                    let mut mm = m.clone();
                    mm.push(j as u32);
                    mm.sort_unstable();
                    ppoly_insert(&mut acc, mm, c);
                }
            }
            let inv = Rat::from_int(k as i64).inv().unwrap();
            self.h.push(acc.into_iter().map(|(m, c)| (m, c * inv.clone())).collect());
        }
        self.h[n].clone()
    }

    /// Elementary e_n in power sums (n e_n = sum (-1)^{k-1} p_k e_{n-k}).
    fn e(&mut self, n: usize) -> PPoly {
        while self.e.len() <= n {
            let k = self.e.len();
            if k == 0 {
                self.e.push(BTreeMap::from([(PMono::new(), Rat::one())]));
                continue;
            }
            let mut acc = PPoly::new();
            for j in 1..=k {
                let sign = if j % 2 == 1 { Rat::one() } else { -Rat::one() };
                let prev = self.e[k - j].clone();
                for (m, c) in prev {
                    let mut mm = m.clone();
                    mm.push(j as u32);
                    mm.sort_unstable();
                    ppoly_insert(&mut acc, mm, c * sign.clone());
                }
            }
            let inv = Rat::from_int(k as i64).inv().unwrap();
            self.e.push(acc.into_iter().map(|(m, c)| (m, c * inv.clone())).collect());
        }
        self.e[n].clone()
    }

    /// s_lambda in power sums; `cap` bounds |lambda|.
    pub fn schur(&mut self, lam: &Partition, cap: u32) -> Result<PPoly> {
        let size = lam.size();
        if size > cap {
            return Err(Error::PartitionTooLarge { size, cap });
        }
        if let Some(p) = self.s.get(lam.parts()) {
            return Ok(p.clone());
        }
        let degcap = size;
        let ell = lam.len();
        let width = if ell == 0 { 0 } else { lam.parts()[0] as usize };
        let use_h = ell <= width;
        let shape: Vec<u32> = if use_h {
            lam.parts().to_vec()
        } else {
            lam.transpose().parts().to_vec()
        };
        let k = shape.len();
        // matrix entry (i, j): h_{shape_i - i + j} (0-based i, j) or e-version
        let entry = |me: &mut Self, i: usize, j: usize| -> PPoly {
            let idx = shape[i] as i64 - (i as i64 + 1) + (j as i64 + 1);
            if idx < 0 {
                return PPoly::new();
            }
            if use_h {
                me.h(idx as usize)
            } else {
                me.e(idx as usize)
            }
        };
        // determinant by column-subset DP over rows
        let mut dp: BTreeMap<u64, PPoly> =
            BTreeMap::from([(0u64, BTreeMap::from([(PMono::new(), Rat::one())]))]);
        for i in 0..k {
            let mut ndp: BTreeMap<u64, PPoly> = BTreeMap::new();
            for (mask, val) in dp {
                for j in 0..k {
                    if mask >> j & 1 == 1 {
                        continue;
                    }
                    let ent = entry(self, i, j);
                    if ent.is_empty() {
                        continue;
                    }
                    let inv = (mask >> (j + 1)).count_ones();
                    let sign = if inv % 2 == 0 { Rat::one() } else { -Rat::one() };
                    let mut prod = ppoly_mul(&val, &ent, degcap);
                    if sign != Rat::one() {
                        prod = prod.into_iter().map(|(m, c)| (m, -c)).collect();
                    }
                    let slot = ndp.entry(mask | (1 << j)).or_default();
                    for (m, c) in prod {
                        ppoly_insert(slot, m, c);
                    }
                }
            }
            dp = ndp;
        }
        let full = (1u64 << k) - 1;
        let result = dp.remove(&full).unwrap_or_default();
        self.s.insert(lam.parts().to_vec(), result.clone());
        Ok(result)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm(parts: &[u32]) -> PMono {
        let mut v = parts.to_vec();
        v.sort_unstable();
        v
    }

    #[test]
    fn small_schur_values() {
        let mut c = SchurCache::new();
        // s_(1) = p1
        let s1 = c.schur(&Partition::new(vec![1]), 8).unwrap();
        assert_eq!(s1, BTreeMap::from([(pm(&[1]), Rat::one())]));
        // s_(2) = (p1^2 + p2)/2
        let s2 = c.schur(&Partition::new(vec![2]), 8).unwrap();
        assert_eq!(
            s2,
            BTreeMap::from([
                (pm(&[1, 1]), Rat::new(1, 2)),
                (pm(&[2]), Rat::new(1, 2))
            ])
        );
        // s_(1,1) = (p1^2 - p2)/2
        let s11 = c.schur(&Partition::new(vec![1, 1]), 8).unwrap();
        assert_eq!(
            s11,
            BTreeMap::from([
                (pm(&[1, 1]), Rat::new(1, 2)),
                (pm(&[2]), Rat::new(-1, 2))
            ])
        );
        // cap
        assert!(matches!(
            c.schur(&Partition::new(vec![9]), 8),
            Err(Error::PartitionTooLarge { .. })
        ));
    }

    /// Independent oracle: Murnaghan-Nakayama character sums,
    /// s_lambda = sum_mu chi^lambda(mu) p_mu / z_mu.
    #[test]
    fn murnaghan_nakayama_oracle() {
        fn mn_char(lam: &[u32], mu: &[u32]) -> i64 {
            // Murnaghan-Nakayama via beta-sets: beta_i = lam_i + (ell - i);
            // removing a border strip of size k replaces some beta_i by
            // beta_i - k (must stay >= 0 and distinct), with sign (-1)^{#beta_j
            // strictly between the old and new values}.
            if lam.is_empty() {
                return if mu.is_empty() { 1 } else { 0 };
            }
            if mu.is_empty() {
                return 0;
            }
            let k = mu[0] as i64;
            let rest = &mu[1..];
            let ell = lam.len();
            let beta: Vec<i64> = lam
                .iter()
                .enumerate()
                .map(|(i, &p)| p as i64 + (ell - 1 - i) as i64)
                .collect();
            let mut total = 0i64;
            for (i, &b) in beta.iter().enumerate() {
                let nb = b - k;
                if nb < 0 || beta.contains(&nb) {
                    continue;
                }
                let crossings = beta.iter().filter(|&&x| nb < x && x < b).count();
                let sign = if crossings % 2 == 0 { 1 } else { -1 };
                let mut nbeta = beta.clone();
                nbeta[i] = nb;
                nbeta.sort_unstable_by(|a, b| b.cmp(a));
                let nlam: Vec<u32> = nbeta
                    .iter()
                    .enumerate()
                    .map(|(j, &x)| (x - (ell - 1 - j) as i64) as u32)
                    .filter(|&x| x > 0)
                    .collect();
                total += sign * mn_char(&nlam, rest);
            }
            total
        }
        fn z_mu(mu: &[u32]) -> Rat {
            let mut z = Rat::one();
            let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
            for &m in mu {
                *counts.entry(m).or_insert(0) += 1;
            }
            for (k, c) in counts {
                z = z * Rat::from_int(k as i64).pow(c as i64).unwrap() * Rat::factorial(c as u64);
            }
            z
        }
        let mut cache = SchurCache::new();
        for n in 1..=4u32 {
            for lam in Partition::all_of(n) {
                let s = cache.schur(&lam, 8).unwrap();
                let mut expect = PPoly::new();
                for mu in Partition::all_of(n) {
                    let chi = mn_char(lam.parts(), mu.parts());
                    if chi == 0 {
                        continue;
                    }
                    let mut m = mu.parts().to_vec();
                    m.sort_unstable();
                    ppoly_insert(
                        &mut expect,
                        m,
                        Rat::from_int(chi) * z_mu(mu.parts()).inv().unwrap(),
                    );
                }
                assert_eq!(s, expect, "lambda = {lam}");
            }
        }
    }
}
