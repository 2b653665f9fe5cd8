use std::fmt;

use crate::error::{invalid, Error, Result};

/// A partition of `{0, .., k-1}` into non-empty blocks.
///
/// Blocks are ordered by their minimum element, which is the order induced by
/// the restricted growth string stored in `labels` (`labels[i]` is the block
/// index of element `i`).
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct SetPartition {
    labels: Vec<usize>,
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    /// Builds a partition from a restricted growth string.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (i, &l) in labels.iter().enumerate() {
            if l > blocks.len() {
                return invalid(format!("label sequence {labels:?} is not a restricted growth string"));
            }
            if l == blocks.len() {
                blocks.push(Vec::new());
            }
            blocks[l].push(i);
        }
        Ok(SetPartition { labels, blocks })
    }

    pub fn ground_size(&self) -> usize {
        self.labels.len()
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Block sizes in decreasing order.
    pub fn shape(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.blocks.iter().map(Vec::len).collect();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.blocks {
            write!(f, "{{")?;
            for (i, v) in b.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", v + 1)?;
            }
            write!(f, "}}")?;
        }
        Ok(())
    }
}

/// All `Bell(k)` partitions of a `k`-element set, in lexicographic order of
/// their restricted growth strings.
pub fn set_partitions(k: usize, budget: usize) -> Result<Vec<SetPartition>> {
    if k == 0 {
        return invalid("set_partitions requires k >= 1");
    }
    if k > budget {
        return Err(Error::Budget {
            what: "partition ground size",
            requested: k,
            limit: budget,
            flag: "max-partition-k",
        });
    }
    let mut out = Vec::new();
    let mut labels = vec![0usize; k];
    // maxes[i] = max(labels[0..=i])
    let mut maxes = vec![0usize; k];
    loop {
        out.push(SetPartition::from_labels(labels.clone())?);
        // rightmost position that can still be incremented
        let mut i = k - 1;
        while i > 0 && labels[i] > maxes[i - 1] {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        labels[i] += 1;
        maxes[i] = maxes[i - 1].max(labels[i]);
        for j in i + 1..k {
            labels[j] = 0;
            maxes[j] = maxes[i];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    /// Bell numbers from the Bell triangle, independent of the generator.
    fn bell(k: usize) -> usize {
        let mut row = vec![1usize];
        for _ in 1..k {
            let mut next = vec![*row.last().unwrap()];
            for v in &row {
                let last = *next.last().unwrap();
                next.push(last + v);
            }
            row = next;
        }
        *row.last().unwrap()
    }

    #[test]
    fn small_counts() {
        assert_eq!(set_partitions(1, 10).unwrap().len(), 1);
        assert_eq!(set_partitions(3, 10).unwrap().len(), 5);
        assert_eq!(set_partitions(6, 10).unwrap().len(), 203);
    }

    #[test]
    fn bell_counts_and_invariants() {
        for k in 1..=9 {
            let parts = set_partitions(k, 10).unwrap();
            assert_eq!(parts.len(), bell(k), "k = {k}");
            let distinct: HashSet<_> = parts.iter().map(|p| p.labels().to_vec()).collect();
            assert_eq!(distinct.len(), parts.len());
            for p in &parts {
                let mut seen = vec![false; k];
                for b in p.blocks() {
                    assert!(!b.is_empty());
                    for &v in b {
                        assert!(!seen[v]);
                        seen[v] = true;
                    }
                }
                assert!(seen.iter().all(|&s| s));
                let mins: Vec<usize> = p.blocks().iter().map(|b| b[0]).collect();
                assert!(mins.windows(2).all(|w| w[0] < w[1]));
            }
            // strictly increasing restricted growth strings
            assert!(parts.windows(2).all(|w| w[0].labels() < w[1].labels()));
        }
    }

    #[test]
    fn order_starts_trivial_and_ends_discrete() {
        let parts = set_partitions(4, 10).unwrap();
        assert_eq!(parts[0].block_count(), 1);
        assert_eq!(parts.last().unwrap().block_count(), 4);
        assert_eq!(parts[0].to_string(), "{1,2,3,4}");
    }

    #[test]
    fn budget_and_empty() {
        match set_partitions(11, 10) {
            Err(Error::Budget { flag, .. }) => assert_eq!(flag, "max-partition-k"),
            other => panic!("expected budget error, got {other:?}"),
        }
        assert!(set_partitions(0, 10).is_err());
    }
}
