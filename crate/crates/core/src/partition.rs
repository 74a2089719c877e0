//! Integer partitions and Young-diagram bookkeeping.

use std::fmt;

/// Partition: weakly decreasing positive parts.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    pub fn new(parts: Vec<u32>) -> Self {
        assert!(
            parts.windows(2).all(|w| w[0] >= w[1]) && parts.iter().all(|&p| p > 0),
            "parts must be weakly decreasing and positive"
        );
        Partition { parts }
    }

    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn size(&self) -> u32 {
        self.parts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn transpose(&self) -> Partition {
        if self.parts.is_empty() {
            return Partition::empty();
        }
        let m = self.parts[0];
        let parts = (1..=m)
            .map(|j| self.parts.iter().filter(|&&p| p >= j).count() as u32)
            .collect();
        Partition { parts }
    }

    /// Box contents: the standard content j - i over boxes (i, j) of the diagram
    /// (row i, column j, 1-based). This is the convention fixed by the
    /// cross-oracle tests against the unstable correlators.
    pub fn contents(&self) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.size() as usize);
        for (i, &row) in self.parts.iter().enumerate() {
            for j in 0..row {
                out.push(j as i64 - i as i64);
            }
        }
        out
    }

    /// All partitions of n, in reverse lexicographic order.
    pub fn all_of(n: u32) -> Vec<Partition> {
        let mut out = Vec::new();
        let mut cur: Vec<u32> = Vec::new();
        fn rec(rem: u32, maxp: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
            if rem == 0 {
                out.push(Partition { parts: cur.clone() });
                return;
            }
            let top = rem.min(maxp);
            for p in (1..=top).rev() {
                cur.push(p);
                rec(rem - p, p, cur, out);
                cur.pop();
            }
        }
        rec(n, n, &mut cur, &mut out);
        out
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", p)?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_and_transpose() {
        assert_eq!(Partition::all_of(0).len(), 1);
        assert_eq!(Partition::all_of(4).len(), 5);
        assert_eq!(Partition::all_of(8).len(), 22);
        let lam = Partition::new(vec![3, 1]);
        assert_eq!(lam.transpose(), Partition::new(vec![2, 1, 1]));
        assert_eq!(lam.transpose().transpose(), lam);
    }

    #[test]
    fn contents_convention() {
        // (2): boxes (1,1),(1,2): contents 0, 1
        assert_eq!(Partition::new(vec![2]).contents(), vec![0, 1]);
        // (1,1): boxes (1,1),(2,1): contents 0, -1
        assert_eq!(Partition::new(vec![1, 1]).contents(), vec![0, -1]);
    }
}
