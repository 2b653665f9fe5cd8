//! Connected reduced acyclic diagrams on `k` star vertices with `q` ordered
//! off-spreads each, and their brute-force enumeration.
//!
//! A diagram is identified with its coloring: a partition of the `q·k`
//! off-spreads into color groups (size ≥ 2, one shared edge variable) and
//! grey singletons. It is valid when
//!
//! - no color group contains two off-spreads of the same vertex,
//! - `Σ (|group| - 1) = k - 1`, and
//! - the hypergraph on the vertices whose hyperedges are the groups' vertex
//!   sets is connected.
//!
//! The last two conditions together say that the hypergraph is a hypertree.
//! Arc realizations (nearest-neighbor arcs inside each group, with a gluing
//! orientation per arc) are derived from the coloring, so equivalent
//! non-reduced drawings are never double counted.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;

use crate::error::{invalid, Error, Result};
use crate::Budgets;

/// One off-spread: `slot` of star vertex `vertex`, both 1-based.
/// For `q = 2`, slot 1 is the left variable `a_{il}` and slot 2 the right `a_{lj}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OffSpread {
    pub vertex: usize,
    pub slot: usize,
}

impl OffSpread {
    pub fn new(vertex: usize, slot: usize) -> Self {
        OffSpread { vertex, slot }
    }
}

impl fmt::Display for OffSpread {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.vertex, self.slot)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Diagram {
    k: usize,
    q: usize,
    /// Color groups, each sorted, ordered by first member.
    groups: Vec<Vec<OffSpread>>,
}

impl Diagram {
    /// Builds a coloring from its color groups. Checks only structural
    /// well-formedness; use [`Diagram::is_valid`] for the diagram conditions.
    pub fn from_groups(k: usize, q: usize, groups: Vec<Vec<OffSpread>>) -> Result<Self> {
        if k == 0 || q < 2 {
            return invalid(format!("diagram needs k >= 1 and q >= 2 (got k={k}, q={q})"));
        }
        let mut seen = vec![false; k * q];
        let mut groups: Vec<Vec<OffSpread>> = groups
            .into_iter()
            .map(|mut g| {
                g.sort();
                g
            })
            .collect();
        for g in &groups {
            if g.len() < 2 {
                return invalid("color groups need at least two off-spreads");
            }
            for o in g {
                if o.vertex == 0 || o.vertex > k || o.slot == 0 || o.slot > q {
                    return invalid(format!("off-spread {o} out of range for k={k}, q={q}"));
                }
                let idx = (o.vertex - 1) * q + (o.slot - 1);
                if seen[idx] {
                    return invalid(format!("off-spread {o} appears in two color groups"));
                }
                seen[idx] = true;
            }
        }
        groups.sort();
        Ok(Diagram { k, q, groups })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn groups(&self) -> &[Vec<OffSpread>] {
        &self.groups
    }

    /// Number of color groups `r`.
    pub fn color_group_count(&self) -> usize {
        self.groups.len()
    }

    /// `μ_s = |group s| - 1`, the arcs in each color group.
    pub fn mus(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.len() - 1).collect()
    }

    pub fn arc_count(&self) -> usize {
        self.mus().iter().sum()
    }

    pub fn grey_offspreads(&self) -> Vec<OffSpread> {
        let mut colored = vec![false; self.k * self.q];
        for o in self.groups.iter().flatten() {
            colored[(o.vertex - 1) * self.q + (o.slot - 1)] = true;
        }
        (0..self.k * self.q)
            .filter(|&i| !colored[i])
            .map(|i| OffSpread::new(i / self.q + 1, i % self.q + 1))
            .collect()
    }

    pub fn grey_count(&self) -> usize {
        self.k * self.q - self.groups.iter().map(Vec::len).sum::<usize>()
    }

    /// 0-based vertex bitmask touched by each group.
    pub fn group_vertex_masks(&self) -> Vec<u64> {
        self.groups
            .iter()
            .map(|g| g.iter().fold(0u64, |m, o| m | 1 << (o.vertex - 1)))
            .collect()
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    /// Like [`Diagram::is_valid`] but names the violated condition.
    pub fn validate(&self) -> Result<()> {
        if self.k > 64 {
            return invalid("diagrams with more than 64 vertices are not supported");
        }
        for g in &self.groups {
            if g.windows(2).any(|w| w[0].vertex == w[1].vertex) {
                return Err(Error::InvalidInput(format!(
                    "color group {} glues a vertex to itself",
                    format_group(g)
                )));
            }
        }
        if self.arc_count() != self.k - 1 {
            return invalid(format!("{} arcs, expected k-1 = {}", self.arc_count(), self.k - 1));
        }
        if !hyperedges_connect(self.k, &self.group_vertex_masks()) {
            return invalid("color groups do not connect all vertices");
        }
        Ok(())
    }

    /// Parses the canonical text form (see the `Display` impl).
    pub fn parse(text: &str, k: usize, q: usize) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("{m} in diagram {text:?}"));
        let mut groups = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let body = rest.strip_prefix('[').ok_or_else(|| bad("expected '['"))?;
            let end = body.find(']').ok_or_else(|| bad("unclosed group"))?;
            let group = body[..end]
                .split_whitespace()
                .map(|tok| {
                    let (v, s) = tok.split_once('.').ok_or_else(|| bad("expected v.s"))?;
                    let v = v.parse().map_err(|_| bad("bad vertex"))?;
                    let s = s.parse().map_err(|_| bad("bad slot"))?;
                    Ok(OffSpread::new(v, s))
                })
                .collect::<Result<Vec<_>>>()?;
            groups.push(group);
            rest = body[end + 1..].trim_start();
        }
        Diagram::from_groups(k, q, groups)
    }
}

fn format_group(g: &[OffSpread]) -> String {
    let items: Vec<String> = g.iter().map(ToString::to_string).collect();
    format!("[{}]", items.join(" "))
}

/// Canonical text form: color groups as `[v.s v.s ...]`, grey off-spreads
/// omitted, e.g. `[1.1 2.1][2.2 3.1]`. The one-vertex diagram is empty.
impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.groups {
            f.write_str(&format_group(g))?;
        }
        Ok(())
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn hyperedges_connect(k: usize, masks: &[u64]) -> bool {
    let mut parent: Vec<usize> = (0..k).collect();
    for &m in masks {
        let first = m.trailing_zeros() as usize;
        let mut rest = m & (m - 1);
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            let (a, b) = (find(&mut parent, first), find(&mut parent, v));
            parent[a] = b;
            rest &= rest - 1;
        }
    }
    let root = find(&mut parent, 0);
    (1..k).all(|v| find(&mut parent, v) == root)
}

fn check_budget(k: usize, q: usize, budgets: &Budgets) -> Result<()> {
    if k == 0 || q < 2 {
        return invalid(format!("enumeration needs k >= 1 and q >= 2 (got k={k}, q={q})"));
    }
    if k * q > budgets.max_offspreads {
        return Err(Error::Budget {
            what: "off-spread count q*k",
            requested: k * q,
            limit: budgets.max_offspreads,
            flag: "max-offspreads",
        });
    }
    if k > 64 {
        return invalid("at most 64 vertices are supported");
    }
    Ok(())
}

/// Depth-first block assignment over off-spreads in (vertex, slot) order.
struct Search<'a, F: FnMut(&[Block])> {
    k: usize,
    q: usize,
    blocks: Vec<Block>,
    arcs: usize,
    visit: &'a mut F,
}

struct Block {
    vertices: u64,
    members: Vec<usize>,
}

impl<F: FnMut(&[Block])> Search<'_, F> {
    fn run(&mut self, i: usize) {
        if i == self.k * self.q {
            if self.arcs == self.k - 1 {
                let masks: Vec<u64> = self
                    .blocks
                    .iter()
                    .filter(|b| b.members.len() > 1)
                    .map(|b| b.vertices)
                    .collect();
                if hyperedges_connect(self.k, &masks) {
                    (self.visit)(&self.blocks);
                }
            }
            return;
        }
        let bit = 1u64 << (i / self.q);
        if self.arcs < self.k - 1 {
            for b in 0..self.blocks.len() {
                if self.blocks[b].vertices & bit != 0 {
                    continue;
                }
                self.blocks[b].vertices |= bit;
                self.blocks[b].members.push(i);
                self.arcs += 1;
                self.run(i + 1);
                self.arcs -= 1;
                self.blocks[b].members.pop();
                self.blocks[b].vertices &= !bit;
            }
        }
        self.blocks.push(Block {
            vertices: bit,
            members: vec![i],
        });
        self.run(i + 1);
        self.blocks.pop();
    }
}

fn search(k: usize, q: usize, mut visit: impl FnMut(&[Block])) {
    let mut s = Search {
        k,
        q,
        blocks: Vec::new(),
        arcs: 0,
        visit: &mut visit,
    };
    s.run(0);
}

/// Every valid diagram on `k` vertices of valence `q`, once each, in a
/// deterministic order.
pub fn enumerate_diagrams(k: usize, q: usize, budgets: &Budgets) -> Result<Vec<Diagram>> {
    check_budget(k, q, budgets)?;
    let mut out = Vec::new();
    search(k, q, |blocks| {
        let groups = blocks
            .iter()
            .filter(|b| b.members.len() > 1)
            .map(|b| {
                b.members
                    .iter()
                    .map(|&i| OffSpread::new(i / q + 1, i % q + 1))
                    .collect()
            })
            .collect();
        out.push(Diagram { k, q, groups });
    });
    Ok(out)
}

/// `|enumerate_diagrams(k, q)|` without materializing the diagrams.
pub fn count_diagrams(k: usize, q: usize, budgets: &Budgets) -> Result<u64> {
    check_budget(k, q, budgets)?;
    let mut n = 0u64;
    search(k, q, |_| n += 1);
    Ok(n)
}

/// Gluing sense of an arc: direct (`i=i', l=l'`) or inverse (`i=l', l=i'`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    Direct,
    Inverse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Arc {
    pub from: OffSpread,
    pub to: OffSpread,
    pub orientation: Orientation,
}

/// An arc realization of a coloring.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ArcList {
    pub k: usize,
    pub q: usize,
    pub arcs: Vec<Arc>,
}

impl ArcList {
    /// The coloring these arcs induce (connected components of glued off-spreads).
    pub fn to_diagram(&self) -> Result<Diagram> {
        let n = self.k * self.q;
        let idx = |o: &OffSpread| (o.vertex - 1) * self.q + (o.slot - 1);
        let mut parent: Vec<usize> = (0..n).collect();
        for a in &self.arcs {
            if a.from.vertex > self.k || a.to.vertex > self.k || a.from.slot > self.q || a.to.slot > self.q {
                return invalid("arc endpoint out of range");
            }
            let (x, y) = (find(&mut parent, idx(&a.from)), find(&mut parent, idx(&a.to)));
            parent[x] = y;
        }
        let mut groups: Vec<Vec<OffSpread>> = vec![Vec::new(); n];
        for i in 0..n {
            let r = find(&mut parent, i);
            groups[r].push(OffSpread::new(i / self.q + 1, i % self.q + 1));
        }
        Diagram::from_groups(self.k, self.q, groups.into_iter().filter(|g| g.len() > 1).collect())
    }
}

/// The reduced realization: inside each color group, arcs join members that
/// are consecutive in vertex order. All arcs are drawn `Direct`.
pub fn reduced_arcs(d: &Diagram) -> ArcList {
    let arcs = d
        .groups
        .iter()
        .flat_map(|g| {
            g.windows(2).map(|w| Arc {
                from: w[0],
                to: w[1],
                orientation: Orientation::Direct,
            })
        })
        .collect();
    ArcList { k: d.k, q: d.q, arcs }
}

/// All orientation assignments of the reduced arcs.
pub fn oriented_realizations(d: &Diagram) -> Vec<ArcList> {
    let base = reduced_arcs(d);
    let m = base.arcs.len();
    (0..1u64 << m)
        .map(|mask| {
            let mut list = base.clone();
            for (i, a) in list.arcs.iter_mut().enumerate() {
                if mask >> i & 1 == 1 {
                    a.orientation = Orientation::Inverse;
                }
            }
            list
        })
        .collect()
}

/// `2^{k-1}`: each of the `k-1` arcs glues in either sense.
pub fn orientation_multiplicity(d: &Diagram) -> BigInt {
    BigInt::from(1) << (d.k - 1)
}

impl FromStr for Orientation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Orientation::Direct),
            "inverse" => Ok(Orientation::Inverse),
            _ => Err(Error::Parse(format!("unknown orientation {s:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn os(v: usize, s: usize) -> OffSpread {
        OffSpread::new(v, s)
    }

    #[test]
    fn small_counts() {
        let b = Budgets::default();
        assert_eq!(enumerate_diagrams(1, 2, &b).unwrap().len(), 1);
        assert_eq!(enumerate_diagrams(2, 2, &b).unwrap().len(), 4);
        assert_eq!(enumerate_diagrams(2, 3, &b).unwrap().len(), 9);
    }

    #[test]
    fn k3_shapes() {
        let all = enumerate_diagrams(3, 2, &Budgets::default()).unwrap();
        assert_eq!(all.len(), 32);
        let pairs = all.iter().filter(|d| d.mus() == vec![1, 1]).count();
        let triples = all.iter().filter(|d| d.mus() == vec![2]).count();
        assert_eq!((pairs, triples), (24, 8));
    }

    #[test]
    fn q3_k3_count() {
        assert_eq!(count_diagrams(3, 3, &Budgets::default()).unwrap(), 189);
    }

    #[test]
    fn validity_examples() {
        let single = Diagram::from_groups(1, 2, vec![]).unwrap();
        assert!(single.is_valid());
        assert_eq!(single.to_string(), "");

        let selfglue = Diagram::from_groups(2, 2, vec![vec![os(1, 1), os(1, 2)]]).unwrap();
        assert!(!selfglue.is_valid());

        let cyclic = Diagram::from_groups(3, 2, vec![vec![os(1, 1), os(2, 1)], vec![os(1, 2), os(2, 2)]]).unwrap();
        assert_eq!(cyclic.arc_count(), 2);
        assert!(!cyclic.is_valid());

        assert!(Diagram::from_groups(2, 2, vec![vec![os(1, 1), os(2, 1)], vec![os(2, 1), os(1, 2)]]).is_err());
        assert!(Diagram::from_groups(2, 2, vec![vec![os(3, 1), os(2, 1)]]).is_err());
    }

    #[test]
    fn enumerated_diagrams_satisfy_invariants() {
        let b = Budgets::default();
        for (k, q) in [(2, 2), (3, 2), (4, 2), (5, 2), (3, 3)] {
            let all = enumerate_diagrams(k, q, &b).unwrap();
            let distinct: HashSet<String> = all.iter().map(ToString::to_string).collect();
            assert_eq!(distinct.len(), all.len());
            for d in &all {
                assert!(d.is_valid());
                assert_eq!(d.arc_count(), k - 1);
                assert_eq!(d.grey_count(), q * k - (k - 1) - d.color_group_count());
                if q == 2 {
                    assert_eq!(d.grey_count(), k - d.color_group_count() + 1);
                }
                // removing any group disconnects the skeleton
                let masks = d.group_vertex_masks();
                for skip in 0..masks.len() {
                    let rest: Vec<u64> = masks.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, m)| *m).collect();
                    assert!(!hyperedges_connect(k, &rest));
                }
                assert_eq!(reduced_arcs(d).arcs.len(), k - 1);
            }
        }
    }

    #[test]
    fn nearest_neighbor_arcs() {
        let d = Diagram::from_groups(5, 2, vec![vec![os(5, 1), os(1, 2), os(3, 1)]]).unwrap();
        let arcs: Vec<(usize, usize)> = reduced_arcs(&d).arcs.iter().map(|a| (a.from.vertex, a.to.vertex)).collect();
        assert_eq!(arcs, vec![(1, 3), (3, 5)]);
        let pair = Diagram::from_groups(2, 2, vec![vec![os(1, 2), os(2, 1)]]).unwrap();
        assert_eq!(reduced_arcs(&pair).arcs.len(), 1);
    }

    #[test]
    fn arcs_round_trip() {
        for d in enumerate_diagrams(4, 2, &Budgets::default()).unwrap() {
            assert_eq!(reduced_arcs(&d).to_diagram().unwrap(), d);
        }
    }

    #[test]
    fn orientations() {
        let b = Budgets::default();
        let one = &enumerate_diagrams(1, 2, &b).unwrap()[0];
        assert_eq!(orientation_multiplicity(one), BigInt::from(1));
        let two = &enumerate_diagrams(2, 2, &b).unwrap()[0];
        assert_eq!(orientation_multiplicity(two), BigInt::from(2));
        let five = &enumerate_diagrams(5, 2, &b).unwrap()[0];
        assert_eq!(orientation_multiplicity(five), BigInt::from(16));
        let real = oriented_realizations(five);
        assert_eq!(real.len(), 16);
        assert_eq!(real.iter().collect::<HashSet<_>>().len(), 16);
    }

    #[test]
    fn text_form_round_trip() {
        let d = Diagram::parse("[1.1 2.1][2.2 3.1]", 3, 2).unwrap();
        assert!(d.is_valid());
        assert_eq!(d.to_string(), "[1.1 2.1][2.2 3.1]");
        for d in enumerate_diagrams(3, 3, &Budgets::default()).unwrap() {
            assert_eq!(Diagram::parse(&d.to_string(), 3, 3).unwrap(), d);
        }
        assert!(Diagram::parse("[1.1 2.1", 3, 2).is_err());
    }

    #[test]
    fn budget_error() {
        match enumerate_diagrams(7, 2, &Budgets::default()) {
            Err(Error::Budget { flag, .. }) => assert_eq!(flag, "max-offspreads"),
            other => panic!("expected budget error, got {other:?}"),
        }
    }
}
