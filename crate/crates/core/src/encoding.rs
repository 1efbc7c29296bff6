//! Encoding polynomials for the precision/threshold tradeoff family.
//!
//! `A` is cut into `p x m` blocks and `B` into `p x n` blocks. With
//! `q = p / p'`, block-row `a` of `A` is written `a = q·j + k` and
//! block-row `b` of `B` is written `b = q·v + w`:
//!
//! ```text
//! Ã(s, z) = Σ_i Σ_j z^(j + p'·i)               Σ_k A[q·j+k, i] · s^k
//! B̃(s, z) = Σ_u Σ_v z^(m·p'·u + p'-1-v)         Σ_w B[q·v+w, u] · s^(-w)
//! ```
//!
//! In `Ãᵀ·B̃`, block `C[i, u]` appears at `z^(m·p'·u + p'·i + p'-1)` and `s^0`,
//! and every other product of blocks lands either at a different `z` degree
//! or at a nonzero power of `s`. `p' = 1` gives the minimum threshold `m·n`;
//! `p' = p` removes `s` entirely and gives `p·m·n + p - 1`.
//!
//! Integer backends cannot hold `s^(-w)`, so [`DigitLayout::Shifted`]
//! multiplies `B̃` by `s^(q-1)`. The useful digit then sits at `s^(q-1)`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};
use crate::matrix::{partition, Matrix, PartitionedMatrix};
use crate::scalar::Scalar;

pub fn recovery_threshold(m: usize, n: usize, p_prime: usize) -> usize {
    m * n * p_prime + p_prime - 1
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemeParams {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub p_prime: usize,
    /// Base of the digit expansion.
    pub s: u64,
    /// Strict upper bound on every digit magnitude (`L`).
    pub bound: u64,
}

impl SchemeParams {
    /// Validated parameters; `s < 2L` is rejected.
    pub fn new(m: usize, n: usize, p: usize, p_prime: usize, s: u64, bound: u64) -> Result<Self> {
        Self::with_base_check(m, n, p, p_prime, s, bound, false)
    }

    /// Like [`SchemeParams::new`], but a base below `2L` only logs a warning.
    pub fn new_unchecked_base(m: usize, n: usize, p: usize, p_prime: usize, s: u64, bound: u64) -> Result<Self> {
        Self::with_base_check(m, n, p, p_prime, s, bound, true)
    }

    fn with_base_check(
        m: usize,
        n: usize,
        p: usize,
        p_prime: usize,
        s: u64,
        bound: u64,
        allow_small_base: bool,
    ) -> Result<Self> {
        if m == 0 || n == 0 || p == 0 || p_prime == 0 {
            return Err(Error::InvalidParams("m, n, p and p' must be at least 1".into()));
        }
        if !p.is_multiple_of(p_prime) {
            return Err(Error::InvalidParams(format!("p' = {p_prime} does not divide p = {p}")));
        }
        if bound == 0 {
            return Err(Error::InvalidParams("bound L must be positive".into()));
        }
        if s < 2 {
            return Err(Error::InvalidParams(format!("base s = {s} must be at least 2")));
        }
        if (s as u128) < 2 * bound as u128 {
            let msg = format!("base s = {s} is below 2L = {}", 2 * bound as u128);
            if allow_small_base {
                log::warn!("{msg}; decoding may fail");
            } else {
                return Err(Error::InvalidParams(msg));
            }
        }
        Ok(Self {
            m,
            n,
            p,
            p_prime,
            s,
            bound,
        })
    }

    /// `p / p'`: number of `s`-digits on each side of the useful one, plus one.
    pub fn q(&self) -> usize {
        self.p / self.p_prime
    }

    pub fn tau(&self) -> usize {
        recovery_threshold(self.m, self.n, self.p_prime)
    }

    /// Smallest power of two that is at least `2L`.
    pub fn auto_base(bound: u64) -> Result<u64> {
        bound
            .checked_mul(2)
            .and_then(u64::checked_next_power_of_two)
            .map(|s| s.max(2))
            .ok_or_else(|| Error::Overflow(format!("no 64-bit power of two above 2·{bound}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::A => "A",
            Side::B => "B",
        })
    }
}

/// Where the useful digit sits in each interpolated coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DigitLayout {
    /// Digits at `s^-(q-1) .. s^(q-1)`, useful digit at `s^0`.
    Centered,
    /// `B̃` pre-multiplied by `s^(q-1)`: digits at `s^0 .. s^(2q-2)`, useful at `s^(q-1)`.
    Shifted,
}

impl DigitLayout {
    /// Power of `s` added to every `B`-side exponent.
    pub fn b_shift(self, q: usize) -> i32 {
        match self {
            DigitLayout::Centered => 0,
            DigitLayout::Shifted => q as i32 - 1,
        }
    }

    /// Number of low digits below the useful one after rounding.
    pub fn useful_offset(self, q: usize) -> u32 {
        match self {
            DigitLayout::Centered => 0,
            DigitLayout::Shifted => q as u32 - 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockExponent {
    pub block_row: usize,
    pub block_col: usize,
    pub z_exp: u32,
    pub s_exp: i32,
}

/// Precomputed exponent tables for one [`SchemeParams`] shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentPlan {
    m: usize,
    n: usize,
    p: usize,
    p_prime: usize,
    /// `p x m`, row-major by (block_row, block_col).
    a_exponents: Vec<BlockExponent>,
    /// `p x n`, row-major by (block_row, block_col).
    b_exponents: Vec<BlockExponent>,
    /// `m x n`, row-major by output block (i, u).
    useful_index: Vec<usize>,
    total_z_degree: usize,
}

impl ExponentPlan {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn p_prime(&self) -> usize {
        self.p_prime
    }

    pub fn q(&self) -> usize {
        self.p / self.p_prime
    }

    pub fn tau(&self) -> usize {
        self.total_z_degree + 1
    }

    pub fn total_z_degree(&self) -> usize {
        self.total_z_degree
    }

    pub fn exponents(&self, side: Side) -> &[BlockExponent] {
        match side {
            Side::A => &self.a_exponents,
            Side::B => &self.b_exponents,
        }
    }

    pub fn exponent(&self, side: Side, block_row: usize, block_col: usize) -> BlockExponent {
        let cols = match side {
            Side::A => self.m,
            Side::B => self.n,
        };
        self.exponents(side)[block_row * cols + block_col]
    }

    /// z-degree of the coefficient carrying output block `C[i, u]`.
    pub fn useful_index(&self, i: usize, u: usize) -> usize {
        self.useful_index[i * self.n + u]
    }

    /// (z-degree sum, s-degree sum) of the product `A[a, i]ᵀ · B[b, u]`.
    pub fn pair_slot(&self, a: (usize, usize), b: (usize, usize)) -> (u32, i32) {
        let ea = self.exponent(Side::A, a.0, a.1);
        let eb = self.exponent(Side::B, b.0, b.1);
        (ea.z_exp + eb.z_exp, ea.s_exp + eb.s_exp)
    }

    /// Enumerates every block pair and confirms that useful products land
    /// exactly on their own `(useful_index, 0)` slot, no interference product
    /// shares such a slot, and every z-degree up to the maximum occurs.
    pub fn check_separation(&self) -> Result<()> {
        let useful: HashMap<u32, (usize, usize)> = (0..self.m)
            .flat_map(|i| (0..self.n).map(move |u| (i, u)))
            .map(|(i, u)| (self.useful_index(i, u) as u32, (i, u)))
            .collect();
        if useful.len() != self.m * self.n {
            return Err(Error::InvalidParams("useful indices collide".into()));
        }
        let mut degrees = BTreeSet::new();
        for a in 0..self.p {
            for i in 0..self.m {
                for b in 0..self.p {
                    for u in 0..self.n {
                        let (z, s) = self.pair_slot((a, i), (b, u));
                        degrees.insert(z);
                        let lands_on_useful = s == 0 && useful.get(&z) == Some(&(i, u));
                        if a == b && !lands_on_useful {
                            return Err(Error::InvalidParams(format!(
                                "useful pair A[{a},{i}]·B[{b},{u}] lands at (z^{z}, s^{s})"
                            )));
                        }
                        if a != b && s == 0 && useful.contains_key(&z) {
                            return Err(Error::InvalidParams(format!(
                                "interference pair A[{a},{i}]·B[{b},{u}] collides with a useful slot z^{z}"
                            )));
                        }
                    }
                }
            }
        }
        let expected: BTreeSet<u32> = (0..=self.total_z_degree as u32).collect();
        if degrees != expected {
            return Err(Error::InvalidParams("product z-degrees are not contiguous".into()));
        }
        Ok(())
    }

    /// CSV dump: one row per block of each side, then one `C` row per output
    /// block with its useful z-degree.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["side", "block_row", "block_col", "z_exp", "s_exp"])?;
        for side in [Side::A, Side::B] {
            for e in self.exponents(side) {
                out.write_record([
                    side.to_string(),
                    e.block_row.to_string(),
                    e.block_col.to_string(),
                    e.z_exp.to_string(),
                    e.s_exp.to_string(),
                ])?;
            }
        }
        for i in 0..self.m {
            for u in 0..self.n {
                out.write_record([
                    "C".to_string(),
                    i.to_string(),
                    u.to_string(),
                    self.useful_index(i, u).to_string(),
                    "0".to_string(),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

pub fn exponent_plan(params: &SchemeParams) -> Result<ExponentPlan> {
    let SchemeParams { m, n, p, p_prime, .. } = *params;
    let q = params.q();
    let mut a_exponents = Vec::with_capacity(p * m);
    for a in 0..p {
        let (j, k) = (a / q, a % q);
        for i in 0..m {
            a_exponents.push(BlockExponent {
                block_row: a,
                block_col: i,
                z_exp: (j + p_prime * i) as u32,
                s_exp: k as i32,
            });
        }
    }
    let mut b_exponents = Vec::with_capacity(p * n);
    for b in 0..p {
        let (v, w) = (b / q, b % q);
        for u in 0..n {
            b_exponents.push(BlockExponent {
                block_row: b,
                block_col: u,
                z_exp: (m * p_prime * u + (p_prime - 1 - v)) as u32,
                s_exp: -(w as i32),
            });
        }
    }
    let useful_index = (0..m)
        .flat_map(|i| (0..n).map(move |u| m * p_prime * u + p_prime * i + p_prime - 1))
        .collect();
    let plan = ExponentPlan {
        m,
        n,
        p,
        p_prime,
        a_exponents,
        b_exponents,
        useful_index,
        total_z_degree: m * n * p_prime + p_prime - 2,
    };
    plan.check_separation()?;
    Ok(plan)
}

/// `Σ block · s^s_exp · z^z_exp` over all blocks of one side.
pub fn encode_share<T: Scalar>(
    part: &PartitionedMatrix<T>,
    plan: &ExponentPlan,
    side: Side,
    s: &T,
    z: &T,
    layout: DigitLayout,
) -> Result<Matrix<T>> {
    let (rows, cols) = match side {
        Side::A => (plan.p, plan.m),
        Side::B => (plan.p, plan.n),
    };
    if part.row_blocks() != rows || part.col_blocks() != cols {
        return Err(Error::Dimension {
            axis: "grid",
            detail: format!(
                "side {side} expects a {rows}x{cols} block grid, got {}x{}",
                part.row_blocks(),
                part.col_blocks()
            ),
        });
    }
    let shift = match side {
        Side::A => 0,
        Side::B => layout.b_shift(plan.q()),
    };
    let mut out = Matrix::zeros(part.block_rows(), part.block_cols());
    for e in plan.exponents(side) {
        let s_exp = e.s_exp + shift;
        let s_pow = s.powi(s_exp).ok_or(Error::NegativePower(s_exp))?;
        let z_pow = z.powi(e.z_exp as i32).ok_or(Error::NegativePower(e.z_exp as i32))?;
        out.add_scaled(part.block(e.block_row, e.block_col), &s_pow.mul_ref(&z_pow))?;
    }
    Ok(out)
}

/// The pair of coded matrices sent to one worker.
#[derive(Clone, Debug, PartialEq)]
pub struct SharePair<T> {
    pub worker_id: usize,
    pub point: T,
    pub a: Matrix<T>,
    pub b: Matrix<T>,
}

pub fn check_distinct<T: PartialEq>(points: &[T]) -> Result<()> {
    for (i, x) in points.iter().enumerate() {
        if let Some(j) = points[..i].iter().position(|y| y == x) {
            return Err(Error::DuplicatePoint { first: j, second: i });
        }
    }
    Ok(())
}

/// Shares for every evaluation point, in point order.
pub fn encode_all<T: Scalar>(
    a: &Matrix<i64>,
    b: &Matrix<i64>,
    params: &SchemeParams,
    plan: &ExponentPlan,
    points: &[T],
    layout: DigitLayout,
) -> Result<Vec<SharePair<T>>> {
    let tau = params.tau();
    if points.len() < tau {
        return Err(Error::InsufficientWorkers { tau, got: points.len() });
    }
    check_distinct(points)?;
    if a.rows() != b.rows() {
        return Err(Error::Dimension {
            axis: "rows",
            detail: format!("A has {} rows, B has {}", a.rows(), b.rows()),
        });
    }
    let pa = partition(&a.to_scalar::<T>(), params.p, params.m)?;
    let pb = partition(&b.to_scalar::<T>(), params.p, params.n)?;
    let s = T::from_i64(i64::try_from(params.s).map_err(|_| Error::Overflow("base s exceeds i64".into()))?);
    points
        .iter()
        .enumerate()
        .map(|(worker_id, z)| {
            Ok(SharePair {
                worker_id,
                point: z.clone(),
                a: encode_share(&pa, plan, Side::A, &s, z, layout)?,
                b: encode_share(&pb, plan, Side::B, &s, z, layout)?,
            })
        })
        .collect()
}
