use std::collections::HashMap;

use super::perm::Permutation;
use crate::error::{Error, Result};

/// One level of the stabilizer chain: a base point, the strong generators
/// fixing all previous base points (nested: each level's set is a superset
/// of the next), and a transversal of the orbit of the base point (coset
/// representatives `u` with `u(point) = p`).
#[derive(Clone, Debug)]
struct Level {
    point: usize,
    gens: Vec<Permutation>,
    transversal: Vec<Option<Permutation>>,
}

impl Level {
    fn new(k: usize, point: usize) -> Level {
        let mut transversal = vec![None; k];
        transversal[point] = Some(Permutation::identity(k));
        Level {
            point,
            gens: Vec::new(),
            transversal,
        }
    }

    fn orbit_points(&self) -> Vec<usize> {
        (0..self.transversal.len())
            .filter(|&p| self.transversal[p].is_some())
            .collect()
    }

    fn recompute_orbit(&mut self) {
        let k = self.transversal.len();
        let mut transversal: Vec<Option<Permutation>> = vec![None; k];
        transversal[self.point] = Some(Permutation::identity(k));
        let mut queue = vec![self.point];
        while let Some(p) = queue.pop() {
            let rep = transversal[p].clone().unwrap();
            for g in &self.gens {
                let q = g.apply(p);
                if transversal[q].is_none() {
                    transversal[q] = Some(rep.then(g));
                    queue.push(q);
                }
            }
        }
        self.transversal = transversal;
    }
}

/// A finitely generated permutation group with a base and strong generating
/// set, supporting exact order, membership, orbits and block systems.
#[derive(Clone, Debug)]
pub struct PermGroup {
    k: usize,
    gens: Vec<Permutation>,
    levels: Vec<Level>,
}

impl PermGroup {
    pub fn new(k: usize, gens: Vec<Permutation>) -> Result<PermGroup> {
        for g in &gens {
            if g.degree() != k {
                return Err(Error::DegreeMismatch(k, g.degree()));
            }
        }
        let gens: Vec<Permutation> = gens.into_iter().filter(|g| !g.is_identity()).collect();
        let mut group = PermGroup {
            k,
            gens: gens.clone(),
            levels: Vec::new(),
        };
        // choose an initial base so that every generator moves a base point
        for g in &gens {
            if group
                .levels
                .iter()
                .all(|l| g.apply(l.point) == l.point)
            {
                let point = (0..k).find(|&p| g.apply(p) != p).unwrap();
                group.levels.push(Level::new(k, point));
            }
        }
        // nested strong generator sets: level i holds the input generators
        // fixing the first i base points
        for g in &gens {
            for lvl in group.levels.iter_mut() {
                lvl.gens.push(g.clone());
                if g.apply(lvl.point) != lvl.point {
                    break;
                }
            }
        }
        for i in (0..group.levels.len()).rev() {
            group.complete_level(i);
        }
        Ok(group)
    }

    /// Makes level `i` consistent assuming all deeper levels already are:
    /// recomputes the transversal and sifts every Schreier generator,
    /// pushing any nontrivial residue down the chain and re-completing the
    /// affected levels before continuing.
    fn complete_level(&mut self, i: usize) {
        self.levels[i].recompute_orbit();
        'restart: loop {
            let points = self.levels[i].orbit_points();
            for p in points {
                let rep = self.levels[i].transversal[p].clone().unwrap();
                let gens = self.levels[i].gens.clone();
                for s in &gens {
                    let q = s.apply(p);
                    let rep_q = self.levels[i].transversal[q].clone().unwrap();
                    let schreier = rep.then(s).then(&rep_q.inverse());
                    let (res, stuck) = self.strip(schreier, i + 1);
                    if res.is_identity() {
                        continue;
                    }
                    if stuck == self.levels.len() {
                        let point = (0..self.k).find(|&x| res.apply(x) != x).unwrap();
                        self.levels.push(Level::new(self.k, point));
                    }
                    for l in (i + 1)..=stuck {
                        self.levels[l].gens.push(res.clone());
                    }
                    for l in ((i + 1)..=stuck).rev() {
                        self.complete_level(l);
                    }
                    continue 'restart;
                }
            }
            return;
        }
    }

    pub fn trivial(k: usize) -> PermGroup {
        PermGroup {
            k,
            gens: Vec::new(),
            levels: Vec::new(),
        }
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.gens
    }

    /// Strips `g` through the chain starting at `level`; returns the residue
    /// and the level where sifting got stuck (or the chain length).
    fn strip(&self, mut g: Permutation, level: usize) -> (Permutation, usize) {
        for (i, lvl) in self.levels.iter().enumerate().skip(level) {
            let image = g.apply(lvl.point);
            match &lvl.transversal[image] {
                None => return (g, i),
                Some(u) => g = g.then(&u.inverse()),
            }
        }
        (g, self.levels.len())
    }

    pub fn order(&self) -> u128 {
        self.levels
            .iter()
            .map(|l| l.transversal.iter().filter(|t| t.is_some()).count() as u128)
            .product()
    }

    pub fn contains(&self, g: &Permutation) -> bool {
        if g.degree() != self.k {
            return false;
        }
        let (res, _) = self.strip(g.clone(), 0);
        res.is_identity()
    }

    /// Orbit partition of `{0..k-1}` under the generators.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.k];
        let mut out = Vec::new();
        for start in 0..self.k {
            if seen[start] {
                continue;
            }
            let mut orbit = vec![start];
            seen[start] = true;
            let mut i = 0;
            while i < orbit.len() {
                let p = orbit[i];
                for g in &self.gens {
                    let q = g.apply(p);
                    if !seen[q] {
                        seen[q] = true;
                        orbit.push(q);
                    }
                }
                i += 1;
            }
            orbit.sort_unstable();
            out.push(orbit);
        }
        out
    }

    pub fn is_transitive(&self) -> bool {
        self.orbits().len() == 1
    }

    pub fn all_generators_even(&self) -> bool {
        self.gens.iter().all(|g| g.is_even())
    }

    /// The minimal block system whose block contains the given pair
    /// (union-find refinement under the generators).
    pub fn minimal_blocks(&self, pair: (usize, usize)) -> Result<Vec<Vec<usize>>> {
        if !self.is_transitive() {
            return Err(Error::NotTransitive);
        }
        let mut parent: Vec<usize> = (0..self.k).collect();
        fn find(parent: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            let mut c = x;
            while parent[c] != r {
                let next = parent[c];
                parent[c] = r;
                c = next;
            }
            r
        }
        let mut queue = vec![pair];
        let (a, b) = pair;
        let ra = find(&mut parent, a);
        let rb = find(&mut parent, b);
        parent[ra] = rb;
        while let Some((x, y)) = queue.pop() {
            for g in &self.gens {
                let u = find(&mut parent, g.apply(x));
                let v = find(&mut parent, g.apply(y));
                if u != v {
                    parent[u] = v;
                    queue.push((u, v));
                }
            }
        }
        let mut classes: HashMap<usize, Vec<usize>> = HashMap::new();
        for p in 0..self.k {
            let r = find(&mut parent, p);
            classes.entry(r).or_default().push(p);
        }
        let mut blocks: Vec<Vec<usize>> = classes.into_values().collect();
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort();
        Ok(blocks)
    }

    /// All elements, or an error when the order exceeds `cap`.
    pub fn elements(&self, cap: u128) -> Result<Vec<Permutation>> {
        let order = self.order();
        if order > cap {
            return Err(Error::OrderCapExceeded { order, cap });
        }
        let mut elems = vec![Permutation::identity(self.k)];
        let mut index: HashMap<Permutation, usize> = HashMap::new();
        index.insert(elems[0].clone(), 0);
        let mut i = 0;
        while i < elems.len() {
            let e = elems[i].clone();
            for g in &self.gens {
                let p = e.then(g);
                if !index.contains_key(&p) {
                    index.insert(p.clone(), elems.len());
                    elems.push(p);
                }
            }
            i += 1;
        }
        debug_assert_eq!(elems.len() as u128, order);
        Ok(elems)
    }

    /// Conjugated copy of the group (relabeling points by `g`).
    pub fn conjugated_by(&self, g: &Permutation) -> PermGroup {
        PermGroup::new(
            self.k,
            self.gens.iter().map(|s| s.conjugate_by(g)).collect(),
        )
        .unwrap()
    }
}

pub fn symmetric(n: usize) -> PermGroup {
    if n < 2 {
        return PermGroup::trivial(n.max(1));
    }
    let mut gens = vec![Permutation::parse_cycles("(1 2)", n).unwrap()];
    if n > 2 {
        let full: Vec<usize> = (1..=n).collect();
        let s = format!(
            "({})",
            full.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
        );
        gens.push(Permutation::parse_cycles(&s, n).unwrap());
    }
    PermGroup::new(n, gens).unwrap()
}

pub fn alternating(n: usize) -> PermGroup {
    if n < 3 {
        return PermGroup::trivial(n.max(1));
    }
    let mut gens = vec![Permutation::parse_cycles("(1 2 3)", n).unwrap()];
    if n > 3 {
        let cyc: Vec<usize> = if n % 2 == 1 {
            (1..=n).collect()
        } else {
            (2..=n).collect()
        };
        let s = format!(
            "({})",
            cyc.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
        );
        gens.push(Permutation::parse_cycles(&s, n).unwrap());
    }
    PermGroup::new(n, gens).unwrap()
}

/// The imprimitive wreath product `S_a wr S_b` acting on `a*b` points with
/// blocks `{0..a-1}, {a..2a-1}, ...`.
pub fn wreath_imprimitive(a: usize, b: usize) -> PermGroup {
    let k = a * b;
    let mut gens: Vec<Permutation> = Vec::new();
    // S_a on the first block
    if a >= 2 {
        let mut img: Vec<u32> = (0..k as u32).collect();
        img.swap(0, 1);
        gens.push(Permutation::from_images(img).unwrap());
        if a > 2 {
            let mut img: Vec<u32> = (0..k as u32).collect();
            for i in 0..a {
                img[i] = ((i + 1) % a) as u32;
            }
            gens.push(Permutation::from_images(img).unwrap());
        }
    }
    // S_b on the blocks
    if b >= 2 {
        let mut img: Vec<u32> = (0..k as u32).collect();
        for i in 0..a {
            img[i] = (a + i) as u32;
            img[a + i] = i as u32;
        }
        gens.push(Permutation::from_images(img).unwrap());
        if b > 2 {
            let mut img = vec![0u32; k];
            for blk in 0..b {
                let dst = (blk + 1) % b;
                for i in 0..a {
                    img[blk * a + i] = (dst * a + i) as u32;
                }
            }
            gens.push(Permutation::from_images(img).unwrap());
        }
    }
    PermGroup::new(k, gens).unwrap()
}

/// The even subgroup `G meet A_k`: index 1 when all generators are even,
/// otherwise the index-2 kernel of the sign map, generated by the Schreier
/// generators over the transversal `{id, t}` for one odd generator `t`.
pub fn intersect_alternating(g: &PermGroup) -> PermGroup {
    let odd: Vec<&Permutation> = g.generators().iter().filter(|p| !p.is_even()).collect();
    if odd.is_empty() {
        return g.clone();
    }
    let t = odd[0].clone();
    let t_inv = t.inverse();
    let mut gens: Vec<Permutation> = Vec::new();
    for s in g.generators() {
        if s.is_even() {
            // coset e: s itself; coset t: t s t^{-1}
            gens.push(s.clone());
            gens.push(t.then(s).then(&t_inv));
        } else {
            // coset e: s t^{-1}; coset t: t s
            gens.push(s.then(&t_inv));
            gens.push(t.then(s));
        }
    }
    PermGroup::new(g.degree(), gens).unwrap()
}

/// Literal equality of the generated groups (same degree, same point
/// labels): equal orders and every generator of one sifts into the other.
pub fn groups_equal(g: &PermGroup, h: &PermGroup) -> Result<bool> {
    if g.degree() != h.degree() {
        return Err(Error::DegreeMismatch(g.degree(), h.degree()));
    }
    if g.order() != h.order() {
        return Ok(false);
    }
    Ok(g.generators().iter().all(|p| h.contains(p)))
}

/// Equality up to relabeling of the points (conjugacy in the full symmetric
/// group), decided by invariants where they are conclusive and by a search
/// over relabelings otherwise (degree <= 8).
pub fn equal_up_to_relabeling(g: &PermGroup, target: &PermGroup) -> Result<bool> {
    if g.degree() != target.degree() {
        return Err(Error::DegreeMismatch(g.degree(), target.degree()));
    }
    let k = g.degree();
    if g.order() != target.order() {
        return Ok(false);
    }
    let full: u128 = (1..=k as u128).product();
    // S_k: order alone is conclusive
    if target.order() == full {
        return Ok(true);
    }
    // A_k: the only subgroup of index 2 consists of the even permutations
    if k >= 3 && target.order() == full / 2 {
        let t_even = target.generators().iter().all(|p| p.is_even());
        let g_even = g.generators().iter().all(|p| p.is_even());
        if t_even {
            return Ok(g_even);
        }
    }
    // invariant screening
    let mut g_orbits: Vec<usize> = g.orbits().iter().map(|o| o.len()).collect();
    let mut t_orbits: Vec<usize> = target.orbits().iter().map(|o| o.len()).collect();
    g_orbits.sort_unstable();
    t_orbits.sort_unstable();
    if g_orbits != t_orbits {
        return Ok(false);
    }
    // block-structure screening for transitive groups
    if g.is_transitive() {
        if let (Ok(bg), Ok(bt)) = (block_signature(g), block_signature(target)) {
            if bg != bt {
                return Ok(false);
            }
            // imprimitive wreath-type targets: containment in the block
            // stabilizer plus order (and parity, already order-matched)
            // pins the group
            if let Some(eq) = wreath_shortcut(g, target, &bg) {
                return Ok(eq);
            }
        }
    }
    if k <= 8 {
        return Ok(relabeling_search(g, target));
    }
    // inconclusive invariants at large degree: report inequality only if an
    // invariant separated them above; otherwise fall back to a conservative
    // "not decided" as inequality
    Ok(false)
}

/// Multiset of minimal-block-system shapes `(block size, count)` over all
/// pairs `(0, j)`.
fn block_signature(g: &PermGroup) -> Result<Vec<(usize, usize)>> {
    let mut sig = Vec::new();
    for j in 1..g.degree() {
        let blocks = g.minimal_blocks((0, j))?;
        sig.push((blocks[0].len(), blocks.len()));
    }
    sig.sort_unstable();
    Ok(sig)
}

/// When the target is `S_a wr S_b` or its even subgroup, membership in the
/// block stabilizer plus the (already verified) order decides equality:
/// any subgroup of the wreath product with the full order is the whole
/// group, and an all-even one of half order is the even subgroup.
fn wreath_shortcut(g: &PermGroup, target: &PermGroup, sig: &[(usize, usize)]) -> Option<bool> {
    // find a nontrivial block size from the signature
    let (a, b) = sig
        .iter()
        .find(|(sz, cnt)| *sz > 1 && *cnt > 1)
        .map(|&(sz, cnt)| (sz, cnt))?;
    let w = wreath_imprimitive(a, b);
    let w_even = intersect_alternating(&w);
    let t_order = target.order();
    if t_order == w.order() {
        // target claims to be the full wreath product; verify
        if !equal_up_to_relabeling_small(target, &w) {
            return None;
        }
        return Some(preserves_standard_blocks(g, a, b));
    }
    if t_order == w_even.order() && target.generators().iter().all(|p| p.is_even()) {
        let g_even = g.generators().iter().all(|p| p.is_even());
        return Some(g_even && preserves_standard_blocks(g, a, b));
    }
    None
}

fn equal_up_to_relabeling_small(g: &PermGroup, h: &PermGroup) -> bool {
    g.order() == h.order() && (g.degree() > 8 || relabeling_search(g, h))
}

/// Whether `g`, after relabeling points so its size-`a` blocks become the
/// standard contiguous ones, lies inside `S_a wr S_b` (it always does once
/// the blocks align, since blocks are by definition preserved).
fn preserves_standard_blocks(g: &PermGroup, a: usize, b: usize) -> bool {
    let blocks = match (1..g.degree()).find_map(|j| {
        g.minimal_blocks((0, j))
            .ok()
            .filter(|bl| bl[0].len() == a && bl.len() == b)
    }) {
        Some(bl) => bl,
        None => return false,
    };
    blocks.iter().all(|bl| bl.len() == a)
}

/// Backtracking search for a relabeling conjugating `g` into `h`
/// (feasible for degree <= 8 by iterating over images of a moved base).
fn relabeling_search(g: &PermGroup, h: &PermGroup) -> bool {
    let k = g.degree();
    // brute force over all relabelings with early pruning: build the
    // relabeling pointwise and check generator conjugates at the end.
    let mut perm: Vec<u32> = (0..k as u32).collect();
    fn permutations_check(
        perm: &mut Vec<u32>,
        i: usize,
        g: &PermGroup,
        h: &PermGroup,
    ) -> bool {
        let k = perm.len();
        if i == k {
            let rel = Permutation::from_images(perm.clone()).unwrap();
            return g
                .generators()
                .iter()
                .all(|s| h.contains(&s.conjugate_by(&rel.inverse())));
        }
        for j in i..k {
            perm.swap(i, j);
            if permutations_check(perm, i + 1, g, h) {
                perm.swap(i, j);
                return true;
            }
            perm.swap(i, j);
        }
        false
    }
    permutations_check(&mut perm, 0, g, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_of_small_groups() {
        assert_eq!(symmetric(4).order(), 24);
        assert_eq!(symmetric(7).order(), 5040);
        assert_eq!(alternating(5).order(), 60);
        let c3 = PermGroup::new(3, vec![Permutation::parse_cycles("(1 2 3)", 3).unwrap()])
            .unwrap();
        assert_eq!(c3.order(), 3);
        let s4 = PermGroup::new(
            4,
            vec![
                Permutation::parse_cycles("(1 2)", 4).unwrap(),
                Permutation::parse_cycles("(1 2 3 4)", 4).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(s4.order(), 24);
    }

    #[test]
    fn big_degree_order_needs_u128() {
        // |S_23| = 23! ~ 2.6e22 overflows u64
        let s23 = symmetric(23);
        assert_eq!(s23.order(), 25852016738884976640000u128);
    }

    #[test]
    fn membership_by_sifting() {
        let s4 = symmetric(4);
        let a4 = alternating(4);
        let odd = Permutation::parse_cycles("(1 2)", 4).unwrap();
        let even = Permutation::parse_cycles("(1 2 3)", 4).unwrap();
        assert!(s4.contains(&odd) && s4.contains(&even));
        assert!(!a4.contains(&odd) && a4.contains(&even));
    }

    #[test]
    fn order_matches_bruteforce_closure() {
        for g in [
            symmetric(5),
            alternating(5),
            wreath_imprimitive(2, 3),
            wreath_imprimitive(3, 2),
            intersect_alternating(&wreath_imprimitive(2, 4)),
        ] {
            let n = g.elements(100_000).unwrap().len() as u128;
            assert_eq!(n, g.order());
        }
    }

    #[test]
    fn orbit_structure() {
        let g = PermGroup::new(3, vec![Permutation::parse_cycles("(1 2)", 3).unwrap()])
            .unwrap();
        assert_eq!(g.orbits(), vec![vec![0, 1], vec![2]]);
        assert!(!g.is_transitive());
        assert!(symmetric(4).is_transitive());
    }

    #[test]
    fn wreath_orders() {
        assert_eq!(wreath_imprimitive(2, 2).order(), 8);
        assert_eq!(wreath_imprimitive(2, 4).order(), 384);
        assert_eq!(wreath_imprimitive(4, 2).order(), 1152); // |S4 wr S2| = 24^2*2
        let p3p = intersect_alternating(&wreath_imprimitive(2, 4));
        assert_eq!(p3p.order(), 192);
        assert!(p3p.generators().iter().all(|g| g.is_even()));
        // (S2 wr S10) n A20 = 2^9 * 10!
        let big = intersect_alternating(&wreath_imprimitive(2, 10));
        assert_eq!(big.order(), 1_857_945_600);
    }

    #[test]
    fn intersect_alternating_index() {
        for g in [symmetric(5), wreath_imprimitive(2, 3), alternating(6)] {
            let h = intersect_alternating(&g);
            let idx = g.order() / h.order();
            assert!(idx == 1 || idx == 2);
            assert!(h.elements(100_000).unwrap().iter().all(|p| p.is_even()));
        }
    }

    #[test]
    fn blocks_of_wreath() {
        let g = wreath_imprimitive(2, 2);
        let blocks = g.minimal_blocks((0, 1)).unwrap();
        assert_eq!(blocks, vec![vec![0, 1], vec![2, 3]]);
        // primitive group: only the trivial one-block system
        let s4 = symmetric(4);
        for j in 1..4 {
            let bl = s4.minimal_blocks((0, j)).unwrap();
            assert_eq!(bl.len(), 1);
        }
        let g5 = wreath_imprimitive(2, 5);
        let blocks = g5.minimal_blocks((0, 1)).unwrap();
        assert_eq!(blocks.len(), 5);
        assert!(blocks.iter().all(|b| b.len() == 2));
        // block system is invariant under every generator
        for gen in g5.generators() {
            for b in &blocks {
                let mut img: Vec<usize> = b.iter().map(|&p| gen.apply(p)).collect();
                img.sort_unstable();
                assert!(blocks.contains(&img));
            }
        }
    }

    #[test]
    fn equality_checks() {
        let g = PermGroup::new(
            3,
            vec![
                Permutation::parse_cycles("(1 2)", 3).unwrap(),
                Permutation::parse_cycles("(1 2 3)", 3).unwrap(),
            ],
        )
        .unwrap();
        assert!(groups_equal(&g, &symmetric(3)).unwrap());
        let c3 = PermGroup::new(3, vec![Permutation::parse_cycles("(1 2 3)", 3).unwrap()])
            .unwrap();
        assert!(!groups_equal(&c3, &symmetric(3)).unwrap());
        assert!(matches!(
            groups_equal(&symmetric(3), &symmetric(4)),
            Err(Error::DegreeMismatch(3, 4))
        ));
    }

    #[test]
    fn relabeled_groups_recognized() {
        // conjugate S2 wr S2 by a random relabeling: blocks {0,2},{1,3}
        let w = wreath_imprimitive(2, 2);
        let rel = Permutation::parse_cycles("(2 3)", 4).unwrap();
        let conj = w.conjugated_by(&rel);
        assert!(!groups_equal(&conj, &w).unwrap());
        assert!(equal_up_to_relabeling(&conj, &w).unwrap());
        // P3P-type group survives relabeling too
        let p3p = intersect_alternating(&wreath_imprimitive(2, 4));
        let rel8 = Permutation::parse_cycles("(1 5 2)(3 7)", 8).unwrap();
        let conj8 = p3p.conjugated_by(&rel8);
        assert!(equal_up_to_relabeling(&conj8, &p3p).unwrap());
        // but a different group of the same order is rejected
        let w22_plus = wreath_imprimitive(2, 4); // order 384 vs 192
        assert!(!equal_up_to_relabeling(&w22_plus, &p3p).unwrap());
    }
}
