use std::collections::{HashMap, HashSet, VecDeque};

use super::group::PermGroup;
use super::perm::Permutation;
use crate::error::Result;

/// Hard cap on group order for the width computation.
pub const ORDER_CAP: u128 = 100_000;

/// Full multiplication tables are only materialized up to this many elements.
const TABLE_LIMIT: usize = 6_000;

type Bits = Vec<u64>;

fn bits_new(words: usize) -> Bits {
    vec![0u64; words]
}

fn bit_get(b: &Bits, i: usize) -> bool {
    b[i >> 6] & (1u64 << (i & 63)) != 0
}

fn bit_set(b: &mut Bits, i: usize) {
    b[i >> 6] |= 1u64 << (i & 63);
}

fn bits_subset(a: &Bits, b: &Bits) -> bool {
    a.iter().zip(b).all(|(&x, &y)| x & !y == 0)
}

/// Element multiplication: by lookup table for small groups, by composing
/// permutations and hashing otherwise.
struct Mult {
    n: usize,
    table: Option<Vec<u16>>,
    elems: Vec<Permutation>,
    index: HashMap<Permutation, u32>,
}

impl Mult {
    fn new(elems: Vec<Permutation>) -> Mult {
        let n = elems.len();
        let index: HashMap<Permutation, u32> = elems
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i as u32))
            .collect();
        let table = if n <= TABLE_LIMIT {
            let mut t = vec![0u16; n * n];
            for a in 0..n {
                for b in 0..n {
                    t[a * n + b] = index[&elems[a].then(&elems[b])] as u16;
                }
            }
            Some(t)
        } else {
            None
        };
        Mult {
            n,
            table,
            elems,
            index,
        }
    }

    fn mul(&self, a: u32, b: u32) -> u32 {
        match &self.table {
            Some(t) => t[a as usize * self.n + b as usize] as u32,
            None => self.index[&self.elems[a as usize].then(&self.elems[b as usize])],
        }
    }
}

struct SubgroupRep {
    bits: Bits,
    size: u64,
    gens: Vec<u32>,
}

/// The full subgroup lattice of a small group, organized by conjugacy class
/// of subgroups.
struct Lattice {
    words: usize,
    classes: Vec<SubgroupRep>,
    class_of: HashMap<Bits, u32>,
}

impl Lattice {
    fn build(group: &PermGroup, cap: u128) -> Result<Lattice> {
        let elems = group.elements(cap)?;
        debug_assert!(elems[0].is_identity());
        let n = elems.len();
        let words = n.div_ceil(64);
        // conjugation action of each group generator on element indices
        let conj_maps: Vec<Vec<u32>> = {
            let idx: HashMap<&Permutation, u32> = elems
                .iter()
                .enumerate()
                .map(|(i, p)| (p, i as u32))
                .collect();
            group
                .generators()
                .iter()
                .map(|g| elems.iter().map(|x| idx[&x.conjugate_by(g)]).collect())
                .collect()
        };
        let mult = Mult::new(elems);

        // all cyclic subgroups, each with one generating element index
        let mut cyclics: Vec<(Bits, u32)> = Vec::new();
        let mut seen_cyclic: HashSet<Bits> = HashSet::new();
        for e in 1..n as u32 {
            let mut bits = bits_new(words);
            bit_set(&mut bits, 0);
            let mut x = e;
            while !bit_get(&bits, x as usize) {
                bit_set(&mut bits, x as usize);
                x = mult.mul(x, e);
            }
            if seen_cyclic.insert(bits.clone()) {
                cyclics.push((bits, e));
            }
        }

        let mut lattice = Lattice {
            words,
            classes: Vec::new(),
            class_of: HashMap::new(),
        };
        // seed with the trivial subgroup
        let mut trivial = bits_new(words);
        bit_set(&mut trivial, 0);
        lattice.insert_class(
            SubgroupRep {
                bits: trivial,
                size: 1,
                gens: Vec::new(),
            },
            &conj_maps,
        );

        // every subgroup is generated by a conjugate of some class
        // representative together with one cyclic subgroup, so joining the
        // representatives with all cyclic subgroups and closing under
        // conjugacy enumerates the whole lattice
        let mut queue: VecDeque<u32> = VecDeque::new();
        queue.push_back(0);
        while let Some(cid) = queue.pop_front() {
            let (rep_bits, rep_gens) = {
                let r = &lattice.classes[cid as usize];
                (r.bits.clone(), r.gens.clone())
            };
            for (cbits, cgen) in &cyclics {
                if bit_get(&rep_bits, *cgen as usize) {
                    continue; // cyclic subgroup already inside
                }
                let _ = cbits;
                let mut gens = rep_gens.clone();
                gens.push(*cgen);
                let (bits, size) = closure(&mult, &gens, words);
                if lattice.class_of.contains_key(&bits) {
                    continue;
                }
                let new_id = lattice.insert_class(SubgroupRep { bits, size, gens }, &conj_maps);
                queue.push_back(new_id);
            }
        }
        Ok(lattice)
    }

    /// Registers a new conjugacy class and expands its orbit under the
    /// group's conjugation action.
    fn insert_class(&mut self, rep: SubgroupRep, conj_maps: &[Vec<u32>]) -> u32 {
        let cid = self.classes.len() as u32;
        let mut orbit = vec![rep.bits.clone()];
        self.class_of.insert(rep.bits.clone(), cid);
        let mut i = 0;
        while i < orbit.len() {
            let cur = orbit[i].clone();
            for map in conj_maps {
                let mut img = bits_new(self.words);
                for w in 0..cur.len() {
                    let mut word = cur[w];
                    while word != 0 {
                        let bit = word.trailing_zeros() as usize;
                        word &= word - 1;
                        bit_set(&mut img, map[(w << 6) + bit] as usize);
                    }
                }
                if !self.class_of.contains_key(&img) {
                    self.class_of.insert(img.clone(), cid);
                    orbit.push(img);
                }
            }
            i += 1;
        }
        self.classes.push(rep);
        cid
    }
}

/// Subgroup generated by the given element indices (positive words suffice
/// in a finite group).
fn closure(mult: &Mult, gens: &[u32], words: usize) -> (Bits, u64) {
    let mut bits = bits_new(words);
    bit_set(&mut bits, 0);
    let mut size = 1u64;
    let mut stack = vec![0u32];
    while let Some(x) = stack.pop() {
        for &g in gens {
            let y = mult.mul(x, g);
            if !bit_get(&bits, y as usize) {
                bit_set(&mut bits, y as usize);
                size += 1;
                stack.push(y);
            }
        }
    }
    (bits, size)
}

/// Width of a finite group: 1 for the trivial group, otherwise the minimum
/// over maximal subgroups `M` of `max(index of M, width of M)`. Fails with
/// `OrderCapExceeded` beyond the order cap.
pub fn galois_width(group: &PermGroup) -> Result<u128> {
    galois_width_capped(group, ORDER_CAP)
}

pub fn galois_width_capped(group: &PermGroup, cap: u128) -> Result<u128> {
    let lattice = Lattice::build(group, cap)?;
    // all subgroups sorted by descending size, for maximal-subgroup scans
    let mut all: Vec<(&Bits, u64, u32)> = lattice
        .class_of
        .iter()
        .map(|(bits, &cid)| {
            let size = bits.iter().map(|w| w.count_ones() as u64).sum::<u64>();
            (bits, size, cid)
        })
        .collect();
    all.sort_by(|a, b| b.1.cmp(&a.1));

    let mut memo: Vec<Option<u128>> = vec![None; lattice.classes.len()];
    // iterative DP over classes ordered by ascending size: every maximal
    // subgroup of a class representative is strictly smaller, so it has
    // already been resolved
    let mut order_ids: Vec<u32> = (0..lattice.classes.len() as u32).collect();
    order_ids.sort_by_key(|&c| lattice.classes[c as usize].size);
    for cid in order_ids {
        let rep = &lattice.classes[cid as usize];
        if rep.size == 1 {
            memo[cid as usize] = Some(1);
            continue;
        }
        let mut maximals: Vec<(&Bits, u64, u32)> = Vec::new();
        for &(bits, size, sub_cid) in &all {
            if size >= rep.size || !bits_subset(bits, &rep.bits) {
                continue;
            }
            if maximals.iter().any(|(m, _, _)| bits_subset(bits, m)) {
                continue;
            }
            maximals.push((bits, size, sub_cid));
        }
        let mut best = u128::MAX;
        for (_, size, sub_cid) in maximals {
            let idx = (rep.size / size) as u128;
            let sub = memo[sub_cid as usize].expect("smaller class resolved first");
            best = best.min(idx.max(sub));
        }
        memo[cid as usize] = Some(best);
    }
    // the whole group is the largest class
    let top = lattice
        .classes
        .iter()
        .enumerate()
        .max_by_key(|(_, r)| r.size)
        .map(|(i, _)| i)
        .unwrap();
    Ok(memo[top].unwrap())
}

/// Checks the monotonicity bound: a subgroup can never have larger width
/// than the full group when both are computable.
pub fn gw_monotonicity_check(sub: &PermGroup, group: &PermGroup) -> Result<bool> {
    Ok(galois_width(sub)? <= galois_width(group)?)
}
