//! Partitions, standard tableaux, irrep dimensions and symmetric-group
//! characters. Everything here is exact integer arithmetic.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// An integer partition `λ ⊢ n`, stored as its non-increasing positive parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<usize>,
}

/// Cycle type of a permutation; a partition of `n`.
pub type CycleType = Partition;

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::EmptyInput("partition with no parts"));
        }
        if parts.iter().any(|&p| p == 0) || parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidPartition(parts));
        }
        Ok(Self { parts })
    }

    /// The one-row partition `[n]`.
    pub fn row(n: usize) -> Self {
        Self { parts: vec![n] }
    }

    /// The one-column partition `[1^n]`.
    pub fn column(n: usize) -> Self {
        Self { parts: vec![1; n] }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Number of boxes.
    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.parts.len()
    }

    pub fn conjugate(&self) -> Partition {
        let cols = self.parts[0];
        let parts = (0..cols)
            .map(|j| self.parts.iter().filter(|&&p| p > j).count())
            .collect();
        Partition { parts }
    }

    /// Boxes `(row, col)` in reading order.
    pub fn boxes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parts
            .iter()
            .enumerate()
            .flat_map(|(i, &len)| (0..len).map(move |j| (i, j)))
    }

    /// Hook length of box `(i, j)`.
    pub fn hook(&self, i: usize, j: usize) -> usize {
        let arm = self.parts[i] - j - 1;
        let leg = self.parts[i + 1..].iter().filter(|&&p| p > j).count();
        arm + leg + 1
    }

    /// Rows whose last box can be removed, bottom row first.
    fn removable_rows(&self) -> Vec<usize> {
        (0..self.rows())
            .rev()
            .filter(|&i| i + 1 == self.rows() || self.parts[i] > self.parts[i + 1])
            .collect()
    }

    fn without_box_in_row(&self, row: usize) -> Option<Partition> {
        let mut parts = self.parts.clone();
        parts[row] -= 1;
        if parts[row] == 0 {
            parts.pop();
        }
        (!parts.is_empty()).then_some(Partition { parts })
    }

    /// Sign of a permutation of this cycle type.
    pub fn sign(&self) -> i64 {
        let even = self.parts.iter().filter(|&&p| p % 2 == 0).count();
        if even % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Centralizer order `z_c = Π_k k^{m_k} m_k!`.
    pub fn centralizer_order(&self) -> u128 {
        let mut z: u128 = 1;
        let mut k = 0;
        while k < self.parts.len() {
            let len = self.parts[k];
            let mult = self.parts[k..].iter().take_while(|&&p| p == len).count();
            z *= (len as u128).pow(mult as u32) * factorial(mult);
            k += mult;
        }
        z
    }

    /// Number of permutations with this cycle type.
    pub fn class_size(&self) -> u128 {
        factorial(self.n()) / self.centralizer_order()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "[{}]", body.join(","))
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Parses comma-separated parts such as `2,1` (brackets optional).
    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches('[').trim_end_matches(']');
        let parts = trimmed
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidPartition(Vec::new()))
            })
            .collect::<Result<Vec<_>>>()?;
        Partition::new(parts)
    }
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// All partitions of `n` in reverse lexicographic order (`[n]` first).
pub fn partitions(n: usize) -> Result<Vec<Partition>> {
    if n == 0 {
        return Err(Error::EmptyInput("partitions of 0"));
    }
    fn extend(remaining: usize, max_part: usize, prefix: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition {
                parts: prefix.clone(),
            });
            return;
        }
        for part in (1..=remaining.min(max_part)).rev() {
            prefix.push(part);
            extend(remaining - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(n, n, &mut Vec::new(), &mut out);
    Ok(out)
}

/// A standard Young tableau: the boxes of `shape` filled with `1..=n`,
/// increasing along rows and down columns.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StandardTableau {
    shape: Partition,
    rows: Vec<Vec<usize>>,
    /// `positions[k]` is the `(row, col)` holding entry `k + 1`.
    positions: Vec<(usize, usize)>,
}

impl StandardTableau {
    pub fn from_rows(rows: Vec<Vec<usize>>) -> Result<Self> {
        let shape = Partition::new(rows.iter().map(Vec::len).collect())?;
        let n = shape.n();
        let mut positions = vec![(usize::MAX, usize::MAX); n];
        for (i, row) in rows.iter().enumerate() {
            for (j, &entry) in row.iter().enumerate() {
                if entry == 0 || entry > n || positions[entry - 1].0 != usize::MAX {
                    return Err(Error::InvalidPartition(shape.parts.clone()));
                }
                positions[entry - 1] = (i, j);
                let left_ok = j == 0 || row[j - 1] < entry;
                let up_ok = i == 0 || rows[i - 1][j] < entry;
                if !left_ok || !up_ok {
                    return Err(Error::InvalidPartition(shape.parts.clone()));
                }
            }
        }
        Ok(Self {
            shape,
            rows,
            positions,
        })
    }

    pub fn shape(&self) -> &Partition {
        &self.shape
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    /// `(row, col)` of `entry` (1-based entry).
    pub fn position(&self, entry: usize) -> (usize, usize) {
        self.positions[entry - 1]
    }

    /// Content `col - row` of the box holding `entry`.
    pub fn content(&self, entry: usize) -> i64 {
        let (i, j) = self.position(entry);
        j as i64 - i as i64
    }

    /// The tableau with entries `k` and `k + 1` exchanged, if still standard.
    pub fn swap_adjacent(&self, k: usize) -> Option<StandardTableau> {
        let (ra, ca) = self.position(k);
        let (rb, cb) = self.position(k + 1);
        if ra == rb || ca == cb {
            return None;
        }
        let mut rows = self.rows.clone();
        rows[ra][ca] = k + 1;
        rows[rb][cb] = k;
        StandardTableau::from_rows(rows).ok()
    }
}

impl fmt::Display for StandardTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" "))
            .collect();
        write!(f, "{}", rows.join(" / "))
    }
}

/// All standard tableaux of shape `λ` in last-letter order: tableaux are
/// compared by the row holding `n`, lower rows first, then by the row
/// holding `n - 1`, and so on.
pub fn standard_tableaux(shape: &Partition) -> Vec<StandardTableau> {
    fn fill(shape: &Partition) -> Vec<Vec<Vec<usize>>> {
        let n = shape.n();
        if n == 1 {
            return vec![vec![vec![1]]];
        }
        let mut out = Vec::new();
        for row in shape.removable_rows() {
            let smaller = shape
                .without_box_in_row(row)
                .expect("n > 1 leaves a nonempty shape");
            for mut rows in fill(&smaller) {
                if row == rows.len() {
                    rows.push(Vec::new());
                }
                rows[row].push(n);
                out.push(rows);
            }
        }
        out
    }
    fill(shape)
        .into_iter()
        .map(|rows| StandardTableau::from_rows(rows).expect("construction yields standard tableaux"))
        .collect()
}

/// `m_λ`, the dimension of the symmetric-group irrep, by the hook-length formula.
pub fn sym_dim(shape: &Partition) -> usize {
    let hooks: u128 = shape.boxes().map(|(i, j)| shape.hook(i, j) as u128).product();
    (factorial(shape.n()) / hooks) as usize
}

/// `d_λ(d)`, the dimension of the unitary-group irrep, by the hook-content
/// formula. Zero when `λ` has more than `d` rows.
pub fn unitary_dim(shape: &Partition, d: usize) -> usize {
    if shape.rows() > d {
        return 0;
    }
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for (i, j) in shape.boxes() {
        num *= (d + j - i) as u128;
        den *= shape.hook(i, j) as u128;
    }
    (num / den) as usize
}

/// Character `χ_λ` on the class with cycle type `c`, by the
/// Murnaghan–Nakayama rule on beta-sets.
pub fn character(shape: &Partition, class: &CycleType) -> Result<i64> {
    if shape.n() != class.n() {
        return Err(Error::DimensionMismatch(format!(
            "character of {shape} (n = {}) on class {class} (n = {})",
            shape.n(),
            class.n()
        )));
    }
    let l = shape.rows();
    let beta: Vec<usize> = shape
        .parts()
        .iter()
        .enumerate()
        .map(|(i, &p)| p + l - 1 - i)
        .collect();
    Ok(murnaghan_nakayama(&beta, class.parts()))
}

fn murnaghan_nakayama(beta: &[usize], cycles: &[usize]) -> i64 {
    let Some((&k, rest)) = cycles.split_first() else {
        return 1;
    };
    let mut total = 0;
    for (idx, &b) in beta.iter().enumerate() {
        if b < k || beta.contains(&(b - k)) {
            continue;
        }
        let target = b - k;
        let crossed = beta.iter().filter(|&&x| x > target && x < b).count();
        let sign = if crossed % 2 == 0 { 1 } else { -1 };
        let mut next = beta.to_vec();
        next[idx] = target;
        total += sign * murnaghan_nakayama(&next, rest);
    }
    total
}

/// One row of a [`DimensionTable`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionRow {
    pub shape: Partition,
    pub sym_dim: usize,
    pub unitary_dim: usize,
}

/// `m_λ` and `d_λ(d)` for every `λ ⊢ n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionTable {
    pub n: usize,
    pub d: usize,
    pub rows: Vec<DimensionRow>,
}

impl DimensionTable {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::EmptyInput("local dimension 0"));
        }
        let rows = partitions(n)?
            .into_iter()
            .map(|shape| DimensionRow {
                sym_dim: sym_dim(&shape),
                unitary_dim: unitary_dim(&shape, d),
                shape,
            })
            .collect();
        Ok(Self { n, d, rows })
    }

    /// `Σ_λ d_λ m_λ`, which equals `d^n`.
    pub fn total(&self) -> usize {
        self.rows.iter().map(|r| r.sym_dim * r.unitary_dim).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    /// Partition numbers from Euler's pentagonal-number recurrence.
    fn partition_count_pentagonal(n: usize) -> usize {
        let mut counts = vec![0i64; n + 1];
        counts[0] = 1;
        for m in 1..=n {
            let mut k: i64 = 1;
            let mut acc = 0i64;
            loop {
                let g1 = (k * (3 * k - 1) / 2) as usize;
                if g1 > m {
                    break;
                }
                let sign = if k % 2 == 1 { 1 } else { -1 };
                acc += sign * counts[m - g1];
                let g2 = (k * (3 * k + 1) / 2) as usize;
                if g2 <= m {
                    acc += sign * counts[m - g2];
                }
                k += 1;
            }
            counts[m] = acc;
        }
        counts[n] as usize
    }

    /// Brute force: every assignment of 1..=n to the boxes that is increasing.
    fn brute_force_tableau_count(shape: &Partition) -> usize {
        let boxes: Vec<(usize, usize)> = shape.boxes().collect();
        let n = boxes.len();
        let mut perm: Vec<usize> = (1..=n).collect();
        let mut count = 0;
        loop {
            let mut grid = vec![vec![0usize; shape.parts()[0]]; shape.rows()];
            for (&(i, j), &v) in boxes.iter().zip(&perm) {
                grid[i][j] = v;
            }
            let ok = boxes.iter().all(|&(i, j)| {
                (j == 0 || grid[i][j - 1] < grid[i][j]) && (i == 0 || grid[i - 1][j] < grid[i][j])
            });
            if ok {
                count += 1;
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
        count
    }

    fn next_permutation(v: &mut [usize]) -> bool {
        let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
            return false;
        };
        let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
        v.swap(i - 1, j);
        v[i..].reverse();
        true
    }

    /// Brute force count of semistandard tableaux with entries in 1..=d.
    fn brute_force_ssyt_count(shape: &Partition, d: usize) -> usize {
        let boxes: Vec<(usize, usize)> = shape.boxes().collect();
        let total = d.pow(boxes.len() as u32);
        (0..total)
            .filter(|&code| {
                let mut grid = vec![vec![0usize; shape.parts()[0]]; shape.rows()];
                let mut c = code;
                for &(i, j) in &boxes {
                    grid[i][j] = c % d;
                    c /= d;
                }
                boxes.iter().all(|&(i, j)| {
                    (j == 0 || grid[i][j - 1] <= grid[i][j]) && (i == 0 || grid[i - 1][j] < grid[i][j])
                })
            })
            .count()
    }

    #[test]
    fn partitions_of_three_in_reverse_lex_order() {
        let ps = partitions(3).unwrap();
        assert_eq!(ps, vec![p(&[3]), p(&[2, 1]), p(&[1, 1, 1])]);
        assert_eq!(partitions(1).unwrap(), vec![p(&[1])]);
        assert_eq!(partitions(0), Err(Error::EmptyInput("partitions of 0")));
    }

    #[test]
    fn partition_counts_match_pentagonal_recurrence() {
        assert_eq!(partition_count_pentagonal(5), 7);
        for n in 1..=10 {
            let ps = partitions(n).unwrap();
            assert_eq!(ps.len(), partition_count_pentagonal(n), "n = {n}");
            let mut dedup = ps.clone();
            dedup.sort();
            dedup.dedup();
            assert_eq!(dedup.len(), ps.len());
            assert!(ps.iter().all(|q| q.n() == n));
        }
    }

    #[test]
    fn invalid_partitions_rejected() {
        assert!(Partition::new(vec![1, 2]).is_err());
        assert!(Partition::new(vec![2, 0]).is_err());
        assert!(Partition::new(vec![]).is_err());
        assert_eq!("2,1".parse::<Partition>().unwrap(), p(&[2, 1]));
        assert_eq!("[3, 1]".parse::<Partition>().unwrap(), p(&[3, 1]));
        assert!("1,x".parse::<Partition>().is_err());
    }

    #[test]
    fn tableaux_of_small_shapes() {
        let t21 = standard_tableaux(&p(&[2, 1]));
        assert_eq!(t21.len(), 2);
        // Last-letter order: 3 in the lower row first.
        assert_eq!(t21[0].rows(), &[vec![1, 2], vec![3]]);
        assert_eq!(t21[1].rows(), &[vec![1, 3], vec![2]]);
        assert_eq!(standard_tableaux(&p(&[4])).len(), 1);
        assert_eq!(standard_tableaux(&p(&[2, 2])).len(), 2);
        assert_eq!(brute_force_tableau_count(&p(&[2, 1])), 2);
        assert_eq!(brute_force_tableau_count(&p(&[2, 2])), 2);
    }

    #[test]
    fn tableau_counts_match_hook_length_and_brute_force() {
        for n in 1..=7 {
            for shape in partitions(n).unwrap() {
                let tabs = standard_tableaux(&shape);
                assert_eq!(tabs.len(), sym_dim(&shape), "{shape}");
                if n <= 6 {
                    assert_eq!(tabs.len(), brute_force_tableau_count(&shape), "{shape}");
                }
            }
        }
    }

    #[test]
    fn dimensions() {
        assert_eq!(sym_dim(&p(&[2, 1])), 2);
        assert_eq!(sym_dim(&p(&[1, 1, 1])), 1);
        assert_eq!(unitary_dim(&p(&[2]), 2), 3);
        assert_eq!(unitary_dim(&p(&[1, 1]), 2), 1);
        assert_eq!(unitary_dim(&p(&[2, 1]), 3), 8);
        assert_eq!(brute_force_ssyt_count(&p(&[2, 1]), 3), 8);
        assert_eq!(unitary_dim(&p(&[1, 1, 1]), 2), 0);
        let plancherel: usize = partitions(4).unwrap().iter().map(|l| sym_dim(l).pow(2)).sum();
        assert_eq!(plancherel, 24);
    }

    #[test]
    fn weyl_dimension_matches_ssyt_count() {
        for n in 1..=4 {
            for shape in partitions(n).unwrap() {
                for d in 1..=3 {
                    assert_eq!(unitary_dim(&shape, d), brute_force_ssyt_count(&shape, d), "{shape} d={d}");
                }
            }
        }
    }

    #[test]
    fn plancherel_and_schur_weyl_dimension_identities() {
        for n in 1..=6 {
            let sum: u128 = partitions(n).unwrap().iter().map(|l| (sym_dim(l) as u128).pow(2)).sum();
            assert_eq!(sum, factorial(n));
        }
        for n in 1..=5 {
            for d in 1..=3 {
                let table = DimensionTable::new(n, d).unwrap();
                assert_eq!(table.total(), d.pow(n as u32), "n={n} d={d}");
            }
        }
    }

    #[test]
    fn small_characters() {
        assert_eq!(character(&p(&[2, 1]), &p(&[1, 1, 1])).unwrap(), 2);
        assert_eq!(character(&p(&[2, 1]), &p(&[2, 1])).unwrap(), 0);
        assert_eq!(character(&p(&[2, 1]), &p(&[3])).unwrap(), -1);
        assert!(character(&p(&[2, 1]), &p(&[2])).is_err());
        for n in 1..=6 {
            for class in partitions(n).unwrap() {
                assert_eq!(character(&Partition::column(n), &class).unwrap(), class.sign());
                assert_eq!(character(&Partition::row(n), &class).unwrap(), 1);
            }
        }
    }

    #[test]
    fn character_of_identity_is_dimension() {
        for n in 1..=7 {
            for shape in partitions(n).unwrap() {
                assert_eq!(
                    character(&shape, &Partition::column(n)).unwrap(),
                    sym_dim(&shape) as i64
                );
            }
        }
    }

    #[test]
    fn character_orthogonality() {
        for n in 1..=6 {
            let ps = partitions(n).unwrap();
            for a in &ps {
                for b in &ps {
                    let s: i128 = ps
                        .iter()
                        .map(|cl| {
                            cl.class_size() as i128
                                * character(a, cl).unwrap() as i128
                                * character(b, cl).unwrap() as i128
                        })
                        .sum();
                    let expected = if a == b { factorial(n) as i128 } else { 0 };
                    assert_eq!(s, expected, "{a} {b}");
                }
            }
        }
    }

    #[test]
    fn class_sizes_sum_to_group_order() {
        for n in 1..=7 {
            let total: u128 = partitions(n).unwrap().iter().map(Partition::class_size).sum();
            assert_eq!(total, factorial(n));
        }
    }
}
