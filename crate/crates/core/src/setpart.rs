//! Set partitions of the subsystem index set and the block-swap action of the
//! permutation operators on a pair of probe points.
//!
//! Partitions are enumerated through restricted growth strings, which gives a
//! canonical lexicographic order: blocks come out sorted by their smallest
//! element and indices inside a block are ascending.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest subsystem count accepted by [`enumerate_partitions`].
pub const MAX_SUBSYSTEMS: usize = 12;

/// A partition of `{0, …, n−1}` into `k` non-empty blocks, in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SetPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    /// Builds a partition from arbitrary blocks, validating and canonicalising them.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        let mut blocks = blocks;
        for block in &mut blocks {
            if block.is_empty() {
                return Err(invalid("partition blocks must be non-empty"));
            }
            block.sort_unstable();
            for &i in block.iter() {
                if i >= n {
                    return Err(invalid(format!("index {i} out of range for n = {n}")));
                }
                if seen[i] {
                    return Err(invalid(format!("index {i} appears in two blocks")));
                }
                seen[i] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(invalid(format!("index {missing} is not covered by any block")));
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(Self { n, blocks })
    }

    fn from_growth_string(rgs: &[usize], k: usize) -> Self {
        let mut blocks = vec![Vec::new(); k];
        for (i, &b) in rgs.iter().enumerate() {
            blocks[b].push(i);
        }
        Self { n: rgs.len(), blocks }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Bit mask of a block (bit `i` set when subsystem `i` belongs to it).
    pub fn block_mask(&self, block: usize) -> u32 {
        self.blocks[block].iter().fold(0, |m, &i| m | (1 << i))
    }
}

impl fmt::Display for SetPartition {
    /// Formats as `{01|2}`; subsystems above 9 are comma separated.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = if self.n > 10 { "," } else { "" };
        f.write_str("{")?;
        for (j, block) in self.blocks.iter().enumerate() {
            if j > 0 {
                f.write_str("|")?;
            }
            let items: Vec<String> = block.iter().map(|i| i.to_string()).collect();
            f.write_str(&items.join(sep))?;
        }
        f.write_str("}")
    }
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if k < 1 || k > n {
        return Err(invalid(format!("need 1 <= k <= n, got n = {n}, k = {k}")));
    }
    Ok(())
}

/// All `k`-partitions of `n` subsystems in canonical lexicographic order.
pub fn enumerate_partitions(n: usize, k: usize) -> Result<Vec<SetPartition>> {
    check_nk(n, k)?;
    if n > MAX_SUBSYSTEMS {
        return Err(Error::SizeLimit(format!(
            "n = {n} exceeds the limit of {MAX_SUBSYSTEMS} subsystems"
        )));
    }
    let mut out = Vec::with_capacity(stirling2(n, k) as usize);
    let mut rgs = vec![0usize; n];
    extend_growth_string(&mut rgs, 1, 1, k, &mut out);
    Ok(out)
}

// `used` is the number of distinct block labels in rgs[..pos].
fn extend_growth_string(rgs: &mut [usize], pos: usize, used: usize, k: usize, out: &mut Vec<SetPartition>) {
    let n = rgs.len();
    if pos == n {
        if used == k {
            out.push(SetPartition::from_growth_string(rgs, k));
        }
        return;
    }
    // Not enough positions left to open the remaining blocks.
    if k - used > n - pos {
        return;
    }
    for label in 0..=used.min(k - 1) {
        rgs[pos] = label;
        let next = if label == used { used + 1 } else { used };
        extend_growth_string(rgs, pos + 1, next, k, out);
    }
}

/// Stirling number of the second kind, `S(n, k)`.
pub fn stirling2(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let mut row = vec![0u64; k + 1];
    row[0] = 1;
    for m in 1..=n {
        for j in (1..=k.min(m)).rev() {
            row[j] = j as u64 * row[j] + row[j - 1];
        }
        row[0] = 0;
    }
    row[k]
}

/// Number of `k`-partitions of an `n`-partite system.
pub fn partition_count(n: usize, k: usize) -> Result<u64> {
    check_nk(n, k)?;
    Ok(stirling2(n, k))
}

/// Exchanges the coordinates of `block` between two probe points.
///
/// Returns `(χ, χ′)` where `χ` carries `phi2` on the block and `phi1`
/// elsewhere, and `χ′` is the complementary exchange.
pub fn block_swap(phi1: &[f64], phi2: &[f64], block: &[usize]) -> Result<(Vec<f64>, Vec<f64>)> {
    if phi1.len() != phi2.len() {
        return Err(invalid(format!(
            "probe points differ in dimension ({} vs {})",
            phi1.len(),
            phi2.len()
        )));
    }
    let mut chi = phi1.to_vec();
    let mut chi_prime = phi2.to_vec();
    for &i in block {
        if i >= phi1.len() {
            return Err(invalid(format!("block index {i} out of range")));
        }
        chi[i] = phi2[i];
        chi_prime[i] = phi1[i];
    }
    Ok((chi, chi_prime))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_bipartitions() {
        let parts = enumerate_partitions(3, 2).unwrap();
        let shown: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
        assert_eq!(shown, ["{01|2}", "{02|1}", "{0|12}"]);
    }

    #[test]
    fn full_split_is_unique() {
        let parts = enumerate_partitions(3, 3).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].to_string(), "{0|1|2}");
    }

    #[test]
    fn four_into_two_by_brute_force() {
        // Every map {0..4} -> {0,1} using both labels, divided by the 2! relabellings.
        let surjective = (0u32..16).filter(|m| *m != 0 && *m != 15).count();
        assert_eq!(surjective / 2, 7);
        assert_eq!(enumerate_partitions(4, 2).unwrap().len(), 7);
    }

    #[test]
    fn counts() {
        assert_eq!(partition_count(3, 2).unwrap(), 3);
        assert_eq!(partition_count(5, 3).unwrap(), 25);
        for n in 1..=10 {
            assert_eq!(partition_count(n, n).unwrap(), 1);
            assert_eq!(partition_count(n, 1).unwrap(), 1);
        }
        assert_eq!(enumerate_partitions(5, 3).unwrap().len(), 25);
    }

    #[test]
    fn argument_errors() {
        assert!(matches!(enumerate_partitions(3, 4), Err(Error::InvalidArgument(_))));
        assert!(matches!(enumerate_partitions(3, 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(enumerate_partitions(13, 2), Err(Error::SizeLimit(_))));
        assert!(partition_count(2, 3).is_err());
    }

    #[test]
    fn swap_examples() {
        let (a, b) = block_swap(&[1., 1., 1.], &[-1., -1., -1.], &[0]).unwrap();
        assert_eq!(a, [-1., 1., 1.]);
        assert_eq!(b, [1., -1., -1.]);

        let (a, b) = block_swap(&[1., 2., 3.], &[4., 5., 6.], &[0, 1, 2]).unwrap();
        assert_eq!(a, [4., 5., 6.]);
        assert_eq!(b, [1., 2., 3.]);

        let (a, b) = block_swap(&[1., 2.], &[3., 4.], &[]).unwrap();
        assert_eq!(a, [1., 2.]);
        assert_eq!(b, [3., 4.]);

        assert!(block_swap(&[1., 2.], &[3., 4.], &[2]).is_err());
        assert!(block_swap(&[1., 2.], &[3.], &[0]).is_err());
    }

    #[test]
    fn new_canonicalises() {
        let p = SetPartition::new(4, vec![vec![3, 1], vec![2, 0]]).unwrap();
        assert_eq!(p.blocks(), &[vec![0, 2], vec![1, 3]]);
        assert_eq!(p.block_mask(1), 0b1010);
        assert!(SetPartition::new(3, vec![vec![0, 1]]).is_err());
        assert!(SetPartition::new(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(SetPartition::new(3, vec![vec![0, 1, 2], vec![]]).is_err());
    }
}
