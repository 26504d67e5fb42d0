//! `p(0), ..., p(n)` from Euler's pentagonal number recurrence.
//!
//! This is the ground truth the series evaluator is tested against. It costs
//! `O(n^{3/2})` additions, over the integers or modulo `m`.

use rug::{Assign, Integer};

use crate::error::{Error, Result};

/// Largest `n` for which exact values are computed.
pub const EXACT_LIMIT: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Values {
    Exact(Vec<Integer>),
    Residues(Vec<u64>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionVector {
    pub modulus: Option<u64>,
    pub values: Values,
}

impl PartitionVector {
    pub fn len(&self) -> usize {
        match &self.values {
            Values::Exact(v) => v.len(),
            Values::Residues(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `p(j)`, or `p(j) mod m`, as an integer.
    pub fn get(&self, j: usize) -> Option<Integer> {
        match &self.values {
            Values::Exact(v) => v.get(j).cloned(),
            Values::Residues(v) => v.get(j).map(|&r| Integer::from(r)),
        }
    }

    pub fn last(&self) -> Option<Integer> {
        self.len().checked_sub(1).and_then(|j| self.get(j))
    }
}

/// Offsets `k(3k-1)/2` and `k(3k+1)/2` up to `j`, with the sign `(-1)^{k+1}`.
fn pentagonal(j: usize, mut f: impl FnMut(usize, bool)) {
    let (mut g, mut step, mut k) = (1usize, 4usize, 1usize);
    // g = k(3k-1)/2; next g is g + 3k + 1
    while g <= j {
        let positive = k % 2 == 1;
        f(g, positive);
        if g + k <= j {
            f(g + k, positive);
        }
        g += step;
        step += 3;
        k += 1;
    }
}

/// `p(0..=n)`, exactly or modulo `m`.
pub fn partition_vector(n: u64, modulus: Option<u64>) -> Result<PartitionVector> {
    partition_vector_bounded(n, modulus, EXACT_LIMIT)
}

/// As [`partition_vector`] with an explicit bound on exact computations.
pub fn partition_vector_bounded(n: u64, modulus: Option<u64>, exact_limit: u64) -> Result<PartitionVector> {
    let len = usize::try_from(n)
        .ok()
        .and_then(|n| n.checked_add(1))
        .ok_or_else(|| Error::Resource(format!("n = {n} does not fit in memory")))?;
    let values = match modulus {
        Some(0) => return Err(Error::Domain("modulus must be positive".into())),
        Some(m) => Values::Residues(residues(len, m)),
        None if n > exact_limit => {
            return Err(Error::Resource(format!(
                "exact partition vector limited to n <= {exact_limit}; pass a modulus"
            )))
        }
        None => Values::Exact(exact(len)),
    };
    Ok(PartitionVector { modulus, values })
}

fn exact(len: usize) -> Vec<Integer> {
    let mut p: Vec<Integer> = Vec::with_capacity(len);
    let (mut pos, mut neg) = (Integer::new(), Integer::new());
    for j in 0..len {
        if j == 0 {
            p.push(Integer::from(1));
            continue;
        }
        pos.assign(0);
        neg.assign(0);
        pentagonal(j, |g, positive| {
            if positive {
                pos += &p[j - g];
            } else {
                neg += &p[j - g];
            }
        });
        p.push(Integer::from(&pos - &neg));
    }
    p
}

fn residues(len: usize, m: u64) -> Vec<u64> {
    let mut p: Vec<u64> = Vec::with_capacity(len);
    for j in 0..len {
        if j == 0 {
            p.push(1 % m);
            continue;
        }
        // pos and neg each stay below 2^64 since they are reduced as we go
        let (mut pos, mut neg) = (0u64, 0u64);
        pentagonal(j, |g, positive| {
            let v = p[j - g];
            let acc = if positive { &mut pos } else { &mut neg };
            *acc = ((*acc as u128 + v as u128) % m as u128) as u64;
        });
        p.push(((pos as u128 + m as u128 - neg as u128) % m as u128) as u64);
    }
    p
}
