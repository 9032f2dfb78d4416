//! Dimension-reducing transmission schemes `G_l` and their effective
//! channels.
//!
//! `G_l` is an `M × T_l` placement of `K_l T_l` complex symbols. The top
//! segment `l = L-1` consists of full columns (`N >= M`) or a staircase of
//! width `N` (`M > N`); every step down from `l + 1` to `l` appends one column
//! using antennas `1..=l+1` and one using antennas `M-l..=M`. Symbols are
//! numbered column-major, left to right, over non-empty cells.
//!
//! Each column `g_i` of `G_l` sees the block `Ĥ_i` of channel columns on its
//! non-empty rows; the effective channel is the block-diagonal stack of the
//! `Ĥ_i`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::config::SystemConfig;
use crate::dmt::{scheme_dims, SchemeDims};
use crate::error::{domain, Result};
use crate::linalg::{unitarity_defect, CMatrix};

/// Unitarity tolerance for spreading matrices (`max |U^H U - I|`).
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Cell {
    Empty,
    /// 1-based symbol index.
    Symbol(usize),
}

/// `M × T` symbol placement.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SchemePattern {
    pub m: usize,
    pub n: usize,
    pub t: usize,
    pub l: usize,
    /// Row-major, `cells[row * t + col]`.
    pub cells: Vec<Cell>,
}

impl SchemePattern {
    fn from_columns(m: usize, n: usize, l: usize, columns: &[(usize, usize)]) -> Self {
        let t = columns.len();
        let mut cells = vec![Cell::Empty; m * t];
        let mut next = 1;
        for (col, &(lo, hi)) in columns.iter().enumerate() {
            for row in lo..=hi {
                cells[(row - 1) * t + col] = Cell::Symbol(next);
                next += 1;
            }
        }
        Self { m, n, t, l, cells }
    }

    pub fn cell(&self, row: usize, col: usize) -> Cell {
        self.cells[row * self.t + col]
    }

    pub fn symbol_count(&self) -> usize {
        self.cells.iter().filter(|c| matches!(c, Cell::Symbol(_))).count()
    }

    /// 0-based rows holding symbols in column `col`, top to bottom.
    pub fn column_rows(&self, col: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.m).filter(move |&row| matches!(self.cell(row, col), Cell::Symbol(_)))
    }

    /// Number of symbols on antenna `row` (0-based).
    pub fn row_count(&self, row: usize) -> usize {
        (0..self.t)
            .filter(|&col| matches!(self.cell(row, col), Cell::Symbol(_)))
            .count()
    }

    /// Indicator matrix of non-empty cells.
    pub fn indicator(&self) -> CMatrix {
        CMatrix::from_fn(self.m, self.t, |row, col| match self.cell(row, col) {
            Cell::Symbol(_) => Complex64::new(1.0, 0.0),
            Cell::Empty => Complex64::new(0.0, 0.0),
        })
    }

    /// Places complex symbols (`symbols[k-1]` for `x_k`) into an `M × T` matrix.
    pub fn fill(&self, symbols: &[Complex64]) -> Result<CMatrix> {
        if symbols.len() != self.symbol_count() {
            return Err(domain!(
                "pattern has {} symbols, got {}",
                self.symbol_count(),
                symbols.len()
            ));
        }
        Ok(CMatrix::from_fn(self.m, self.t, |row, col| match self.cell(row, col) {
            Cell::Symbol(k) => symbols[k - 1],
            Cell::Empty => Complex64::new(0.0, 0.0),
        }))
    }
}

impl fmt::Display for SchemePattern {
    /// Text grid with `x_k` for symbols and `0` for empty cells.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = |c: Cell| match c {
            Cell::Symbol(k) => alloc::format!("x_{k}"),
            Cell::Empty => String::from("0"),
        };
        let width = self.cells.iter().map(|&c| label(c).len()).max().unwrap_or(1);
        for row in 0..self.m {
            for col in 0..self.t {
                if col > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{:>width$}", label(self.cell(row, col)))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Builds `G_l`.
pub fn build_scheme(cfg: &SystemConfig, l: usize) -> Result<SchemePattern> {
    let dims = scheme_dims(cfg, l)?;
    let (m, n, big_l) = (cfg.m(), cfg.n(), cfg.l_min());
    // (first row, last row), 1-based inclusive
    let mut columns: Vec<(usize, usize)> = if n >= m {
        vec![(1, m); n - m + 1]
    } else {
        (1..=m - n + 1).map(|i| (i, n + i - 1)).collect()
    };
    for step in (l..big_l - 1).rev() {
        columns.push((1, step + 1));
        columns.push((m - step, m));
    }
    let pattern = SchemePattern::from_columns(m, n, l, &columns);
    debug_assert_eq!(pattern.t, dims.t_l);
    debug_assert_eq!(pattern.symbol_count(), dims.complex_dim());
    Ok(pattern)
}

/// Channel-column sets of the effective-channel blocks, one per column of a
/// pattern. Column indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlockSet {
    pub blocks: Vec<Vec<usize>>,
}

impl BlockSet {
    /// Every block is an integer interval.
    pub fn is_contiguous(&self) -> bool {
        self.blocks.iter().all(|b| b.windows(2).all(|w| w[1] == w[0] + 1))
    }

    pub fn max_block_len(&self) -> usize {
        self.blocks.iter().map(Vec::len).max().unwrap_or(0)
    }
}

pub fn block_sets(pattern: &SchemePattern) -> BlockSet {
    BlockSet {
        blocks: (0..pattern.t)
            .map(|col| pattern.column_rows(col).map(|row| row + 1).collect())
            .collect(),
    }
}

/// Block-diagonal `(N T) × (K T)` effective channel of `h` under `pattern`.
/// Column `k - 1` carries symbol `x_k`.
pub fn effective_channel(h: &CMatrix, pattern: &SchemePattern) -> Result<CMatrix> {
    if h.ncols() != pattern.m || h.nrows() != pattern.n {
        return Err(domain!(
            "channel is {}x{}, pattern expects {}x{}",
            h.nrows(),
            h.ncols(),
            pattern.n,
            pattern.m
        ));
    }
    let n = h.nrows();
    let mut out = CMatrix::zeros(n * pattern.t, pattern.symbol_count());
    for col in 0..pattern.t {
        for row in 0..pattern.m {
            if let Cell::Symbol(k) = pattern.cell(row, col) {
                out.view_mut((col * n, k - 1), (n, 1)).copy_from(&h.column(row));
            }
        }
    }
    Ok(out)
}

/// Number of blocks containing every column `j_lo..=j_hi` (1-based).
pub fn occurrence_count(blocks: &BlockSet, j_lo: usize, j_hi: usize) -> usize {
    blocks
        .blocks
        .iter()
        .filter(|b| (j_lo..=j_hi).all(|j| b.contains(&j)))
        .count()
}

/// A column run `h_j..h_i` seen in more blocks than allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccurrenceViolation {
    pub l: usize,
    pub j: usize,
    pub i: usize,
    pub count: usize,
    pub bound: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport<V> {
    pub checked: usize,
    pub violations: Vec<V>,
}

impl<V> Default for CheckReport<V> {
    fn default() -> Self {
        Self {
            checked: 0,
            violations: Vec::new(),
        }
    }
}

impl<V> CheckReport<V> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exhaustive check that `h_j..h_i` occurs in at most `N - (i - j)` blocks of
/// `G_l` when `i - j < L`, and in none when `i - j >= L`.
pub fn verify_lemma1(cfg: &SystemConfig, l: usize) -> Result<CheckReport<OccurrenceViolation>> {
    let blocks = block_sets(&build_scheme(cfg, l)?);
    let (m, n, big_l) = (cfg.m(), cfg.n(), cfg.l_min());
    let mut report = CheckReport::default();
    for j in 1..=m {
        for i in j..=m {
            let count = occurrence_count(&blocks, j, i);
            let bound = if i - j < big_l { n - (i - j) } else { 0 };
            report.checked += 1;
            if count > bound {
                report.violations.push(OccurrenceViolation { l, j, i, count, bound });
            }
        }
    }
    Ok(report)
}

/// `b_j(k)`: occurrences of `h_j` with exactly `h_{j-k}..h_{j-1}` to its left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccurrenceProfile {
    pub j: usize,
    /// `b[k]` for `k = 0..min(j, L)`.
    pub b: Vec<usize>,
}

impl OccurrenceProfile {
    pub fn total(&self) -> usize {
        self.b.iter().sum()
    }

    /// `sum_{s >= k} b_j(s) <= N - k` for every `k`.
    pub fn satisfies_tail_bound(&self, n: usize) -> bool {
        (0..self.b.len()).all(|k| self.b[k..].iter().sum::<usize>() + k <= n)
    }
}

pub fn occurrence_profile(blocks: &BlockSet, j: usize, big_l: usize) -> OccurrenceProfile {
    let len = j.min(big_l);
    let mut b = vec![0; len];
    for block in blocks.blocks.iter().filter(|b| b.contains(&j)) {
        let left = block.iter().filter(|&&c| c < j).count();
        if left < len {
            b[left] += 1;
        }
    }
    OccurrenceProfile { j, b }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProfileViolation {
    /// The tail-sum bound fails for column `j`.
    TailBound { l: usize, profile: OccurrenceProfile },
    /// For `l = 0`, `b_j(k)` vanishes for some `1 <= k <= min(j, L) - 1`.
    MissingOccurrence {
        j: usize,
        k: usize,
        profile: OccurrenceProfile,
    },
}

/// Checks the tail-sum bound on every column profile of `G_l`, and for
/// `l = 0` that every `b_j(k)`, `1 <= k <= min(j, L) - 1`, is positive.
pub fn verify_ineq29(cfg: &SystemConfig, l: usize) -> Result<CheckReport<ProfileViolation>> {
    let blocks = block_sets(&build_scheme(cfg, l)?);
    let mut report = CheckReport::default();
    for j in 1..=cfg.m() {
        let profile = occurrence_profile(&blocks, j, cfg.l_min());
        report.checked += 1;
        if !profile.satisfies_tail_bound(cfg.n()) {
            report.violations.push(ProfileViolation::TailBound {
                l,
                profile: profile.clone(),
            });
        }
        if l == 0 {
            if let Some(k) = (1..profile.b.len()).find(|&k| profile.b[k] == 0) {
                report
                    .violations
                    .push(ProfileViolation::MissingOccurrence { j, k, profile });
            }
        }
    }
    Ok(report)
}

/// Exponents `ξ_{i,j}` with `|h̃_{i,j}|^2 = rho^(-ξ_{i,j})`, `N × M`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct XiMatrix {
    pub n: usize,
    pub m: usize,
    /// Column-major, `data[j * n + i]`.
    pub data: Vec<f64>,
}

impl XiMatrix {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self::from_fn(n, m, |_, _| 0.0)
    }

    pub fn from_fn(n: usize, m: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * m);
        for j in 0..m {
            for i in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, m, data }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.n + i]
    }

    /// 0-based column.
    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Negative exponents clipped to zero.
    pub fn clipped(&self) -> Self {
        Self {
            n: self.n,
            m: self.m,
            data: self.data.iter().map(|x| x.max(0.0)).collect(),
        }
    }
}

/// `a(k, ξ_j) = min_{s in k+1..=N} ξ_{s,j}`.
pub fn a_exponent(xi_col: &[f64], k: usize) -> f64 {
    xi_col[k..].iter().copied().fold(f64::INFINITY, f64::min)
}

/// `c(j) = sum_{s=0}^{p-2} a(s, ξ_j) + (N - p + 1) a(p-1, ξ_j)` with
/// `p = min(j, L)`; `j` is 1-based.
pub fn c_bound(xi_col: &[f64], j: usize, cfg: &SystemConfig) -> Result<f64> {
    if xi_col.len() != cfg.n() {
        return Err(domain!("exponent column has {} entries, N={}", xi_col.len(), cfg.n()));
    }
    if j == 0 || j > cfg.m() {
        return Err(domain!("column index j={j} outside 1..={}", cfg.m()));
    }
    if let Some(x) = xi_col.iter().find(|x| !(**x >= 0.0)) {
        return Err(domain!("exponents must be non-negative, got {x}"));
    }
    Ok(c_bound_unchecked(xi_col, j, cfg))
}

fn c_bound_unchecked(xi_col: &[f64], j: usize, cfg: &SystemConfig) -> f64 {
    let p = j.min(cfg.l_min());
    let head: f64 = (0..p - 1).map(|s| a_exponent(xi_col, s)).sum();
    head + (cfg.n() - p + 1) as f64 * a_exponent(xi_col, p - 1)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Lemma3Violation {
    NegativeEntry { i: usize, j: usize, value: f64 },
    Exceeds { j: usize, c: f64, column_sum: f64 },
}

/// Checks `c(j) <= sum_i ξ_{i,j}` for every column. Negative exponents are
/// reported as violations of the precondition.
pub fn verify_lemma3(xi: &XiMatrix, cfg: &SystemConfig) -> Result<CheckReport<Lemma3Violation>> {
    if xi.n != cfg.n() || xi.m != cfg.m() {
        return Err(domain!(
            "exponent matrix is {}x{}, expected {}x{}",
            xi.n,
            xi.m,
            cfg.n(),
            cfg.m()
        ));
    }
    let mut report = CheckReport::default();
    for j in 0..xi.m {
        let col = xi.column(j);
        report.checked += 1;
        let mut clean = true;
        for (i, &value) in col.iter().enumerate() {
            if !(value >= 0.0) {
                clean = false;
                report.violations.push(Lemma3Violation::NegativeEntry {
                    i: i + 1,
                    j: j + 1,
                    value,
                });
            }
        }
        if !clean {
            continue;
        }
        let c = c_bound_unchecked(col, j + 1, cfg);
        let column_sum: f64 = col.iter().sum();
        if c > column_sum * (1.0 + 1e-12) + 1e-300 {
            report.violations.push(Lemma3Violation::Exceeds {
                j: j + 1,
                c,
                column_sum,
            });
        }
    }
    Ok(report)
}

/// `U_L · G · U_R`.
pub fn apply_spreading(g: &CMatrix, u_left: &CMatrix, u_right: &CMatrix) -> Result<CMatrix> {
    if u_left.nrows() != g.nrows() || u_right.ncols() != g.ncols() {
        return Err(domain!(
            "spreading shapes {}x{} · {}x{} · {}x{} do not chain",
            u_left.nrows(),
            u_left.ncols(),
            g.nrows(),
            g.ncols(),
            u_right.nrows(),
            u_right.ncols()
        ));
    }
    for (side, u) in [("left", u_left), ("right", u_right)] {
        let defect = unitarity_defect(u);
        if !(defect <= UNITARY_TOL) {
            return Err(domain!("{side} spreading matrix is not unitary (defect {defect:.3e})"));
        }
    }
    Ok(u_left * g * u_right)
}

/// Expected power of each column of `U_L · G · U_R` when the pattern's
/// symbols are independent with unit power.
pub fn expected_column_powers(pattern: &SchemePattern, u_left: &CMatrix, u_right: &CMatrix) -> Result<Vec<f64>> {
    apply_spreading(&pattern.indicator(), u_left, u_right)?;
    Ok((0..pattern.t)
        .map(|t| {
            let mut power = 0.0;
            for row in 0..pattern.m {
                let spread: f64 = (0..pattern.m).map(|i| u_left[(i, row)].norm_sqr()).sum();
                for col in 0..pattern.t {
                    if matches!(pattern.cell(row, col), Cell::Symbol(_)) {
                        power += spread * u_right[(col, t)].norm_sqr();
                    }
                }
            }
            power
        })
        .collect())
}

/// Tiles `pattern` `s` times side by side with fresh symbol indices.
pub fn replicate_scheme(pattern: &SchemePattern, s: usize) -> Result<SchemePattern> {
    if s < 1 {
        return Err(domain!("replication factor must be >= 1, got {s}"));
    }
    let t = pattern.t * s;
    let per_copy = pattern.symbol_count();
    let mut cells = vec![Cell::Empty; pattern.m * t];
    for copy in 0..s {
        for row in 0..pattern.m {
            for col in 0..pattern.t {
                if let Cell::Symbol(k) = pattern.cell(row, col) {
                    cells[row * t + copy * pattern.t + col] = Cell::Symbol(copy * per_copy + k);
                }
            }
        }
    }
    Ok(SchemePattern {
        m: pattern.m,
        n: pattern.n,
        t,
        l: pattern.l,
        cells,
    })
}

/// Dimensions of a pattern built by [`build_scheme`].
pub fn pattern_dims(pattern: &SchemePattern) -> Result<SchemeDims> {
    scheme_dims(&SystemConfig::new(pattern.m, pattern.n)?, pattern.l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dft_matrix, random_unitary};
    use crate::rng::{stream_rng, Stream};
    use alloc::string::ToString;
    use rand_distr::{Distribution, Exp1};

    fn cfg(m: usize, n: usize) -> SystemConfig {
        SystemConfig::new(m, n).unwrap()
    }

    fn blocks(m: usize, n: usize, l: usize) -> Vec<Vec<usize>> {
        block_sets(&build_scheme(&cfg(m, n), l).unwrap()).blocks
    }

    #[test]
    fn four_by_three_patterns() {
        assert_eq!(
            blocks(4, 3, 0),
            vec![vec![1, 2, 3], vec![2, 3, 4], vec![1, 2], vec![3, 4], vec![1], vec![4]]
        );
        assert_eq!(
            blocks(4, 3, 1),
            vec![vec![1, 2, 3], vec![2, 3, 4], vec![1, 2], vec![3, 4]]
        );
        assert_eq!(blocks(4, 3, 2), vec![vec![1, 2, 3], vec![2, 3, 4]]);
        let g0 = build_scheme(&cfg(4, 3), 0).unwrap();
        assert_eq!(g0.symbol_count(), 12);
        // x_7, x_8 sit in the third column on antennas 1, 2; x_12 bottom right.
        assert_eq!(g0.cell(0, 2), Cell::Symbol(7));
        assert_eq!(g0.cell(1, 2), Cell::Symbol(8));
        assert_eq!(g0.cell(3, 5), Cell::Symbol(12));
        assert_eq!(g0.cell(0, 1), Cell::Empty);
    }

    #[test]
    fn small_patterns() {
        assert_eq!(blocks(2, 2, 0), vec![vec![1, 2], vec![1], vec![2]]);
        let p = build_scheme(&cfg(2, 3), 1).unwrap();
        assert_eq!((p.t, p.symbol_count()), (2, 4));
        assert_eq!(blocks(5, 2, 1), vec![vec![1, 2], vec![2, 3], vec![3, 4], vec![4, 5]]);
        let p = build_scheme(&cfg(1, 1), 0).unwrap();
        assert_eq!((p.m, p.t, p.symbol_count()), (1, 1, 1));
        assert_eq!(blocks(1, 3, 0), vec![vec![1], vec![1], vec![1]]);
        assert_eq!(blocks(3, 1, 0), vec![vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn printed_grid_matches_layout() {
        let text = build_scheme(&cfg(2, 2), 0).unwrap().to_string();
        assert_eq!(text, "x_1 x_3   0\nx_2   0 x_4\n");
    }

    #[test]
    fn structural_invariants_up_to_six_antennas() {
        for m in 1..=6 {
            for n in 1..=6 {
                let c = cfg(m, n);
                for l in 0..c.l_min() {
                    let p = build_scheme(&c, l).unwrap();
                    let dims = scheme_dims(&c, l).unwrap();
                    assert_eq!(p.t, dims.t_l);
                    assert_eq!(p.symbol_count(), dims.complex_dim());
                    let bs = block_sets(&p);
                    assert!(bs.is_contiguous());
                    assert!(bs.max_block_len() <= c.l_min());
                    assert!(verify_lemma1(&c, l).unwrap().passed(), "lemma 1 M={m} N={n} l={l}");
                    assert!(verify_ineq29(&c, l).unwrap().passed(), "ineq M={m} N={n} l={l}");
                }
            }
        }
    }

    #[test]
    fn occurrence_counts() {
        let c = cfg(4, 3);
        let bs = block_sets(&build_scheme(&c, 0).unwrap());
        assert_eq!(occurrence_count(&bs, 2, 3), 2);
        assert_eq!(occurrence_count(&bs, 1, 4), 0);
        let bs = block_sets(&build_scheme(&cfg(3, 3), 0).unwrap());
        assert!(occurrence_count(&bs, 1, 1) <= 3);
    }

    #[test]
    fn occurrence_profiles() {
        let bs = block_sets(&build_scheme(&cfg(2, 2), 0).unwrap());
        assert_eq!(occurrence_profile(&bs, 2, 2).b, vec![1, 1]);
        let bs = block_sets(&build_scheme(&cfg(4, 3), 0).unwrap());
        assert_eq!(occurrence_profile(&bs, 1, 3).b, vec![3]);
        let p4 = occurrence_profile(&bs, 4, 3);
        assert_eq!(p4.b, vec![1, 1, 1]);
        assert_eq!(p4.total(), occurrence_count(&bs, 4, 4));
    }

    #[test]
    fn c_bound_examples() {
        assert_eq!(c_bound(&[0.0, 0.0], 2, &cfg(2, 2)).unwrap(), 0.0);
        let c = c_bound(&[3.0, 1.0], 2, &cfg(2, 2)).unwrap();
        assert_eq!(c, 2.0);
        assert_eq!(a_exponent(&[3.0, 1.0], 0), 1.0);
        assert_eq!(a_exponent(&[3.0, 1.0], 1), 1.0);
        let c = c_bound(&[2.0, 5.0, 1.0], 3, &cfg(3, 3)).unwrap();
        assert_eq!(c, 3.0);
        assert!(c_bound(&[-1.0, 0.0], 1, &cfg(2, 2)).is_err());
    }

    #[test]
    fn column_bound_cases() {
        let c = cfg(3, 3);
        assert!(verify_lemma3(&XiMatrix::zeros(3, 3), &c).unwrap().passed());
        let spike = XiMatrix::from_fn(3, 3, |i, j| if i == 0 && j == 2 { 1e9 } else { 0.0 });
        assert!(verify_lemma3(&spike, &c).unwrap().passed());
        let negative = XiMatrix::from_fn(3, 3, |i, j| if i == 1 && j == 1 { -1.0 } else { 0.5 });
        let report = verify_lemma3(&negative, &c).unwrap();
        assert_eq!(
            report.violations,
            vec![Lemma3Violation::NegativeEntry {
                i: 2,
                j: 2,
                value: -1.0
            }]
        );
    }

    #[test]
    fn column_bound_random_draws() {
        let mut rng = stream_rng(3, Stream::Test, 0, 0);
        for (m, n) in [(2, 2), (3, 3), (4, 3), (3, 4)] {
            let c = cfg(m, n);
            for _ in 0..2000 {
                let xi = XiMatrix::from_fn(n, m, |_, _| {
                    let x: f64 = Exp1.sample(&mut rng);
                    x * 3.0
                });
                assert!(verify_lemma3(&xi, &c).unwrap().passed());
            }
        }
    }

    #[test]
    fn effective_channel_layout() {
        let c = cfg(4, 3);
        let h = CMatrix::from_fn(3, 4, |i, j| Complex64::new((10 * (j + 1) + i) as f64, 0.0));
        let p = build_scheme(&c, 0).unwrap();
        let heff = effective_channel(&h, &p).unwrap();
        assert_eq!(heff.shape(), (18, 12));
        // column k-1 holds h_j in block i: (symbol, block, channel column)
        let expected = [
            (1, 0, 1),
            (2, 0, 2),
            (3, 0, 3),
            (4, 1, 2),
            (5, 1, 3),
            (6, 1, 4),
            (7, 2, 1),
            (8, 2, 2),
            (9, 3, 3),
            (10, 3, 4),
            (11, 4, 1),
            (12, 5, 4),
        ];
        for (k, block, hj) in expected {
            for row in 0..18 {
                let v = heff[(row, k - 1)];
                if row / 3 == block {
                    assert_eq!(v, h[(row % 3, hj - 1)]);
                } else {
                    assert_eq!(v, Complex64::new(0.0, 0.0));
                }
            }
        }
        assert!(effective_channel(&CMatrix::zeros(4, 3), &p).is_err());
    }

    #[test]
    fn identity_channel_top_segment() {
        let c = cfg(2, 2);
        let heff = effective_channel(&CMatrix::identity(2, 2), &build_scheme(&c, 1).unwrap()).unwrap();
        assert_eq!(heff, CMatrix::identity(2, 2));
    }

    #[test]
    fn spreading() {
        let p = build_scheme(&cfg(2, 2), 0).unwrap();
        let g = p.indicator();
        let same = apply_spreading(&g, &CMatrix::identity(2, 2), &CMatrix::identity(3, 3)).unwrap();
        assert_eq!(same, g);
        let mut rng = stream_rng(5, Stream::Test, 0, 0);
        let bad = CMatrix::from_element(3, 3, Complex64::new(1.0, 0.0));
        assert!(apply_spreading(&g, &random_unitary(2, &mut rng), &bad).is_err());

        let rep = replicate_scheme(&p, 4).unwrap();
        let raw = expected_column_powers(&rep, &CMatrix::identity(2, 2), &CMatrix::identity(12, 12)).unwrap();
        let spread = expected_column_powers(&rep, &CMatrix::identity(2, 2), &dft_matrix(12)).unwrap();
        let ratio = |v: &[f64]| v.iter().copied().fold(0.0, f64::max) / (v.iter().sum::<f64>() / v.len() as f64);
        assert!((ratio(&raw) - 1.5).abs() < 1e-12);
        assert!(ratio(&spread) < ratio(&raw));
    }

    #[test]
    fn replication_counts() {
        let p = build_scheme(&cfg(2, 2), 0).unwrap();
        assert_eq!(replicate_scheme(&p, 1).unwrap(), p);
        let r3 = replicate_scheme(&p, 3).unwrap();
        assert_eq!((r3.t, r3.symbol_count()), (9, 12));
        assert!((0..2).all(|row| r3.row_count(row) == 6));
        let p43 = build_scheme(&cfg(4, 3), 0).unwrap();
        let r2 = replicate_scheme(&p43, 2).unwrap();
        assert_eq!((r2.m, r2.t, r2.symbol_count()), (4, 12, 24));
        assert!((0..4).all(|row| r2.row_count(row) == 2 * 3));
        assert!(replicate_scheme(&p, 0).is_err());
    }
}
