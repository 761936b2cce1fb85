use std::fmt;

use crate::error::{Error, Result};

/// A permutation of `{0, ..., k-1}` stored as its image array. Rendered in
/// 1-based cycle notation for I/O.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Permutation {
    img: Vec<u32>,
}

impl Permutation {
    pub fn identity(k: usize) -> Permutation {
        Permutation {
            img: (0..k as u32).collect(),
        }
    }

    pub fn from_images(img: Vec<u32>) -> Result<Permutation> {
        let k = img.len();
        let mut seen = vec![false; k];
        for &v in &img {
            if (v as usize) >= k || seen[v as usize] {
                return Err(Error::InvalidPermutation(format!(
                    "image array {img:?} is not a bijection"
                )));
            }
            seen[v as usize] = true;
        }
        Ok(Permutation { img })
    }

    pub fn degree(&self) -> usize {
        self.img.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.img[i] as usize
    }

    pub fn images(&self) -> &[u32] {
        &self.img
    }

    pub fn is_identity(&self) -> bool {
        self.img.iter().enumerate().all(|(i, &v)| i as u32 == v)
    }

    /// `self` followed by `other`: `(self.then(other))(i) = other(self(i))`.
    pub fn then(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.degree(), other.degree());
        Permutation {
            img: self.img.iter().map(|&v| other.img[v as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u32; self.img.len()];
        for (i, &v) in self.img.iter().enumerate() {
            inv[v as usize] = i as u32;
        }
        Permutation { img: inv }
    }

    /// Conjugate `sigma^g = g^{-1} . sigma . g` (relabeling points by `g`).
    pub fn conjugate_by(&self, g: &Permutation) -> Permutation {
        g.inverse().then(self).then(g)
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let k = self.degree();
        let mut seen = vec![false; k];
        let mut out = Vec::new();
        for start in 0..k {
            if seen[start] {
                continue;
            }
            let mut cyc = vec![start];
            seen[start] = true;
            let mut j = self.apply(start);
            while j != start {
                seen[j] = true;
                cyc.push(j);
                j = self.apply(j);
            }
            if cyc.len() > 1 {
                out.push(cyc);
            }
        }
        out
    }

    /// Even iff it is a product of an even number of transpositions.
    pub fn is_even(&self) -> bool {
        let swaps: usize = self.cycles().iter().map(|c| c.len() - 1).sum();
        swaps % 2 == 0
    }

    /// Parses 1-based cycle notation like `(1 2 3)(4 5)`; `()` is the
    /// identity. Commas between entries are also accepted.
    pub fn parse_cycles(s: &str, k: usize) -> Result<Permutation> {
        let mut img: Vec<u32> = (0..k as u32).collect();
        let mut moved = vec![false; k];
        let body = s.trim();
        let mut rest = body;
        while !rest.is_empty() {
            let open = rest.find('(').ok_or_else(|| {
                Error::InvalidPermutation(format!("expected `(` in `{s}`"))
            })?;
            if !rest[..open].trim().is_empty() {
                return Err(Error::InvalidPermutation(format!(
                    "unexpected text before cycle in `{s}`"
                )));
            }
            let close = rest[open..].find(')').ok_or_else(|| {
                Error::InvalidPermutation(format!("unbalanced `(` in `{s}`"))
            })? + open;
            let inner = &rest[open + 1..close];
            let entries: Vec<usize> = inner
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<usize>().map_err(|_| {
                        Error::InvalidPermutation(format!("bad cycle entry `{t}` in `{s}`"))
                    })
                })
                .collect::<Result<_>>()?;
            for &e in &entries {
                if e == 0 || e > k {
                    return Err(Error::InvalidPermutation(format!(
                        "cycle entry {e} out of range 1..{k}"
                    )));
                }
                if moved[e - 1] {
                    return Err(Error::InvalidPermutation(format!(
                        "point {e} appears twice in `{s}`"
                    )));
                }
                moved[e - 1] = true;
            }
            for w in 0..entries.len() {
                let from = entries[w] - 1;
                let to = entries[(w + 1) % entries.len()] - 1;
                img[from] = to as u32;
            }
            rest = &rest[close + 1..];
        }
        Permutation::from_images(img)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for cyc in cycles {
            write!(f, "(")?;
            for (i, p) in cyc.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", p + 1)?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_roundtrip() {
        let p = Permutation::parse_cycles("(1 2 3)(4 5)", 6).unwrap();
        assert_eq!(p.to_string(), "(1 2 3)(4 5)");
        assert_eq!(p.apply(0), 1);
        assert_eq!(p.apply(2), 0);
        assert_eq!(p.apply(3), 4);
        assert_eq!(p.apply(5), 5);
        let id = Permutation::parse_cycles("()", 4).unwrap();
        assert!(id.is_identity());
        assert_eq!(id.to_string(), "()");
    }

    #[test]
    fn compose_and_invert() {
        let a = Permutation::parse_cycles("(1 2)", 3).unwrap();
        let b = Permutation::parse_cycles("(2 3)", 3).unwrap();
        // apply a then b: 1 -> 2 -> 3
        let c = a.then(&b);
        assert_eq!(c.to_string(), "(1 3 2)");
        assert!(c.then(&c.inverse()).is_identity());
    }

    #[test]
    fn parity() {
        assert!(!Permutation::parse_cycles("(1 2)", 4).unwrap().is_even());
        assert!(Permutation::parse_cycles("(1 2 3)", 4).unwrap().is_even());
        assert!(Permutation::parse_cycles("(1 2)(3 4)", 4).unwrap().is_even());
        assert!(Permutation::identity(5).is_even());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Permutation::from_images(vec![0, 0, 1]).is_err());
        assert!(Permutation::parse_cycles("(1 2", 3).is_err());
        assert!(Permutation::parse_cycles("(1 4)", 3).is_err());
        assert!(Permutation::parse_cycles("(1 2)(2 3)", 3).is_err());
    }
}
