//! Recovering `C = AᵀB` from any `τ` worker products.
//!
//! Each worker returns `Y = Ãᵀ(s, z)·B̃(s, z) = Σ_k X_k z^k`. One Vandermonde
//! factorization per job turns the `τ` products into the coefficient stack
//! `X_0 … X_(τ-1)`; the useful coefficient of every output block is then a
//! base-`s` number whose digits are all below `L < s/2` in magnitude, and its
//! middle digit is the block of `C`.

use std::io::Write;
use std::time::Duration;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::encoding::{check_distinct, DigitLayout, ExponentPlan, SchemeParams};
use crate::error::{Error, Result};
use crate::matrix::{assemble, frobenius_rel_error, Matrix};
use crate::numeric::{vandermonde, vandermonde_condition, LuFactors};
use crate::scalar::{rational_to_f64, Field, Lift, Scalar};

/// Default guard band on `|frac - 1/2|` below which a rounding is flagged.
pub const DEFAULT_GUARD_BAND: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct WorkerResult<T> {
    pub worker_id: usize,
    pub point: T,
    pub product: Matrix<T>,
    pub compute_duration: Duration,
}

/// Interpolated coefficients `X_0 … X_(τ-1)` of the product polynomial in `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientStack<F> {
    coeffs: Vec<Matrix<F>>,
}

impl<F> CoefficientStack<F> {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: usize) -> &Matrix<F> {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[Matrix<F>] {
        &self.coeffs
    }
}

/// Solves for the coefficient stack from exactly `tau` results.
pub fn interpolate<S, F>(results: &[WorkerResult<S>], tau: usize) -> Result<CoefficientStack<F>>
where
    S: Scalar + Lift<F>,
    F: Field,
{
    if results.len() < tau {
        return Err(Error::InsufficientResults {
            tau,
            got: results.len(),
        });
    }
    if results.len() > tau {
        return Err(Error::InvalidParams(format!(
            "interpolation takes exactly {tau} results, got {}",
            results.len()
        )));
    }
    let points: Vec<F> = results.iter().map(|r| r.point.lift()).collect();
    check_distinct(&points).map_err(|e| Error::Singular(format!("Vandermonde system: {e}")))?;
    let shape = results[0].product.shape();
    if let Some(bad) = results.iter().find(|r| r.product.shape() != shape) {
        return Err(Error::Dimension {
            axis: "product",
            detail: format!(
                "worker {} returned {:?}, expected {shape:?}",
                bad.worker_id,
                bad.product.shape()
            ),
        });
    }
    let lu = LuFactors::new(&vandermonde(&points))?;
    let lifted: Vec<Matrix<F>> = results.iter().map(|r| r.product.map(Lift::lift)).collect();
    let mut coeffs = vec![Matrix::<F>::zeros(shape.0, shape.1); tau];
    let mut rhs = Vec::with_capacity(tau);
    for r in 0..shape.0 {
        for c in 0..shape.1 {
            rhs.clear();
            rhs.extend(lifted.iter().map(|y| y.get(r, c).clone()));
            for (k, x) in lu.solve(&rhs).into_iter().enumerate() {
                *coeffs[k].get_mut(r, c) = x;
            }
        }
    }
    Ok(CoefficientStack { coeffs })
}

/// `x mod s` in `[0, s)`; a mask when `s` is a power of two.
pub fn modulo_power_of_two(x: i64, s: u64) -> u64 {
    if s.is_power_of_two() {
        (x as u64) & (s - 1)
    } else {
        (x as i128).rem_euclid(s as i128) as u64
    }
}

/// Nearest integer of a coefficient, before digit extraction.
#[derive(Clone, Debug, PartialEq)]
pub enum Rounded {
    Small(i64),
    Big(BigInt),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtractedDigit {
    pub value: i64,
    /// `1/2 - |x - round(x)|`: distance of the pre-round fraction from the tie.
    pub margin: f64,
    /// Magnitude of the imaginary part dropped from complex coefficients.
    pub discarded_imag: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DigitError {
    NonFinite,
    /// Rounded value does not fit a signed 64-bit integer.
    Overflow(f64),
    /// Recovered digit is at least `L` in magnitude.
    BoundViolation(i64),
}

/// Scalars the decoder can interpolate over and round.
pub trait DecodeField: Field {
    /// Returns the nearest integer, the margin and the discarded imaginary part.
    fn round_nearest(&self) -> std::result::Result<(Rounded, f64, f64), DigitError>;
    fn condition(points: &[Self]) -> Result<f64>;
}

fn round_f64(x: f64) -> std::result::Result<(Rounded, f64), DigitError> {
    if !x.is_finite() {
        return Err(DigitError::NonFinite);
    }
    let r = x.round();
    let margin = 0.5 - (x - r).abs();
    // i64::MAX is not representable; 2^63 is the first excluded value.
    const LIMIT: f64 = (1u64 << 63) as f64;
    if !(-LIMIT..LIMIT).contains(&r) {
        return Err(DigitError::Overflow(r));
    }
    Ok((Rounded::Small(r as i64), margin))
}

impl DecodeField for f64 {
    fn round_nearest(&self) -> std::result::Result<(Rounded, f64, f64), DigitError> {
        round_f64(*self).map(|(r, m)| (r, m, 0.0))
    }

    fn condition(points: &[Self]) -> Result<f64> {
        vandermonde_condition(points)
    }
}

impl DecodeField for Complex64 {
    fn round_nearest(&self) -> std::result::Result<(Rounded, f64, f64), DigitError> {
        if !self.im.is_finite() {
            return Err(DigitError::NonFinite);
        }
        round_f64(self.re).map(|(r, m)| (r, m, self.im.abs()))
    }

    fn condition(points: &[Self]) -> Result<f64> {
        vandermonde_condition(points)
    }
}

impl DecodeField for BigRational {
    fn round_nearest(&self) -> std::result::Result<(Rounded, f64, f64), DigitError> {
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let r = (self + &half).floor();
        let frac = rational_to_f64(&(self - &r).abs());
        Ok((Rounded::Big(r.to_integer()), 0.5 - frac, 0.0))
    }

    fn condition(points: &[Self]) -> Result<f64> {
        let pts: Vec<f64> = points.iter().map(rational_to_f64).collect();
        vandermonde_condition(&pts)
    }
}

/// Balanced residue: `x mod s` mapped into `(-s/2, s/2]`.
fn balanced_small(x: i128, s: u64) -> i128 {
    let r = if let Ok(x64) = i64::try_from(x) {
        modulo_power_of_two(x64, s) as i128
    } else {
        x.rem_euclid(s as i128)
    };
    if r as u128 * 2 <= s as u128 {
        r
    } else {
        r - s as i128
    }
}

fn balanced_big(x: &BigInt, s: &BigInt, half: &BigInt) -> BigInt {
    let r = x.mod_floor(s);
    if &r <= half {
        r
    } else {
        r - s
    }
}

/// Digit at `s^offset` of an integer whose balanced base-`s` digits are all
/// below `s/2` in magnitude.
pub fn digit_at(rounded: &Rounded, s: u64, offset: u32) -> i64 {
    match rounded {
        Rounded::Small(x) => {
            let mut x = *x as i128;
            for _ in 0..offset {
                let d = balanced_small(x, s);
                x = (x - d) / s as i128;
            }
            balanced_small(x, s) as i64
        }
        Rounded::Big(x) => {
            let sb = BigInt::from(s);
            let half = BigInt::from(s / 2);
            let mut x = x.clone();
            for _ in 0..offset {
                let d = balanced_big(&x, &sb, &half);
                x = (x - d) / &sb;
            }
            balanced_big(&x, &sb, &half)
                .to_i64()
                .expect("balanced digit is below s/2")
        }
    }
}

/// Recovers the useful digit of `x`: round to the nearest integer (which
/// removes the digits below `s^0`), reduce mod `s` into `[0, s)`, and read
/// residues above `s/2` as negative. With [`DigitLayout::Shifted`], the
/// `q - 1` low digits are peeled off first.
pub fn extract_digit<F: DecodeField>(
    x: &F,
    s: u64,
    q: usize,
    layout: DigitLayout,
    bound: u64,
) -> std::result::Result<ExtractedDigit, DigitError> {
    let (rounded, margin, discarded_imag) = x.round_nearest()?;
    let value = digit_at(&rounded, s, layout.useful_offset(q));
    if value.unsigned_abs() >= bound {
        return Err(DigitError::BoundViolation(value));
    }
    Ok(ExtractedDigit {
        value,
        margin,
        discarded_imag,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FailurePolicy {
    /// The first unrecoverable entry aborts the decode.
    #[default]
    Abort,
    /// Unrecoverable entries decode to zero and are listed in the report.
    ZeroFill,
}

#[derive(Clone, Debug)]
pub struct DecodeOptions<'a> {
    pub layout: DigitLayout,
    pub guard_band: f64,
    pub on_failure: FailurePolicy,
    /// Worker ids to decode from, instead of the first `τ` results.
    pub subset: Option<Vec<usize>>,
    pub reference: Option<&'a Matrix<i64>>,
}

impl Default for DecodeOptions<'_> {
    fn default() -> Self {
        Self {
            layout: DigitLayout::Centered,
            guard_band: DEFAULT_GUARD_BAND,
            on_failure: FailurePolicy::Abort,
            subset: None,
            reference: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntryFailure {
    pub block_row: usize,
    pub block_col: usize,
    pub row: usize,
    pub col: usize,
    pub kind: &'static str,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeReport {
    pub c_hat: Matrix<i64>,
    pub used_workers: Vec<usize>,
    /// Relative Frobenius error against the supplied reference, when defined.
    pub rel_error: Option<f64>,
    /// Whether `c_hat` equals the supplied reference exactly.
    pub exact_match: Option<bool>,
    pub condition_estimate: f64,
    pub digit_margin: f64,
    pub precision_warnings: usize,
    pub max_discarded_imag: f64,
    pub failures: Vec<EntryFailure>,
}

impl DecodeReport {
    pub fn summary_line(&self) -> String {
        let workers: Vec<String> = self.used_workers.iter().map(ToString::to_string).collect();
        format!(
            "used_workers={} condition_estimate={:e} digit_margin={} rel_error={}",
            workers.join(";"),
            self.condition_estimate,
            self.digit_margin,
            self.rel_error.map_or_else(|| "NA".to_string(), |e| e.to_string())
        )
    }

    /// Entry-level failures as CSV.
    pub fn write_failures_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["block_row", "block_col", "row", "col", "kind", "detail"])?;
        for f in &self.failures {
            out.write_record([
                f.block_row.to_string(),
                f.block_col.to_string(),
                f.row.to_string(),
                f.col.to_string(),
                f.kind.to_string(),
                f.detail.clone(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn select<S>(results: &[WorkerResult<S>], tau: usize, subset: Option<&[usize]>) -> Result<Vec<WorkerResult<S>>>
where
    S: Clone,
{
    if results.len() < tau {
        return Err(Error::InsufficientResults {
            tau,
            got: results.len(),
        });
    }
    match subset {
        None => Ok(results[..tau].to_vec()),
        Some(ids) => {
            if ids.len() != tau {
                return Err(Error::InvalidParams(format!(
                    "subset names {} workers, threshold is {tau}",
                    ids.len()
                )));
            }
            ids.iter()
                .map(|id| {
                    results
                        .iter()
                        .find(|r| r.worker_id == *id)
                        .cloned()
                        .ok_or_else(|| Error::InvalidParams(format!("no result from worker {id}")))
                })
                .collect()
        }
    }
}

/// Decodes from the first `τ` results (in the given order) or from
/// `options.subset`.
pub fn decode<S, F>(
    results: &[WorkerResult<S>],
    params: &SchemeParams,
    plan: &ExponentPlan,
    options: &DecodeOptions<'_>,
) -> Result<DecodeReport>
where
    S: Scalar + Lift<F>,
    F: DecodeField,
{
    let tau = plan.tau();
    let chosen = select(results, tau, options.subset.as_deref())?;
    let stack: CoefficientStack<F> = interpolate(&chosen, tau)?;
    let points: Vec<F> = chosen.iter().map(|r| r.point.lift()).collect();
    let condition_estimate = F::condition(&points).unwrap_or(f64::INFINITY);

    let (rows, cols) = stack.coeff(0).shape();
    let mut digit_margin = 0.5f64;
    let mut precision_warnings = 0;
    let mut max_discarded_imag = 0.0f64;
    let mut failures = Vec::new();
    let mut grid = Vec::with_capacity(plan.m());
    for i in 0..plan.m() {
        let mut grid_row = Vec::with_capacity(plan.n());
        for u in 0..plan.n() {
            let x = stack.coeff(plan.useful_index(i, u));
            let mut block = Matrix::filled(rows, cols, 0i64);
            for r in 0..rows {
                for c in 0..cols {
                    match extract_digit(x.get(r, c), params.s, plan.q(), options.layout, params.bound) {
                        Ok(d) => {
                            digit_margin = digit_margin.min(d.margin);
                            if d.margin < options.guard_band {
                                precision_warnings += 1;
                            }
                            max_discarded_imag = max_discarded_imag.max(d.discarded_imag);
                            *block.get_mut(r, c) = d.value;
                        }
                        Err(e) => {
                            let (kind, detail) = match &e {
                                DigitError::NonFinite => ("non_finite", "not finite".to_string()),
                                DigitError::Overflow(v) => ("overflow", format!("{v:e} exceeds the 64-bit range")),
                                DigitError::BoundViolation(v) => ("bound", v.to_string()),
                            };
                            if options.on_failure == FailurePolicy::Abort {
                                return Err(match e {
                                    DigitError::BoundViolation(v) => Error::BoundViolation {
                                        block_row: i,
                                        block_col: u,
                                        row: r,
                                        col: c,
                                        value: v as i128,
                                        bound: params.bound,
                                    },
                                    _ => Error::Unrecoverable {
                                        block_row: i,
                                        block_col: u,
                                        row: r,
                                        col: c,
                                        detail,
                                    },
                                });
                            }
                            failures.push(EntryFailure {
                                block_row: i,
                                block_col: u,
                                row: r,
                                col: c,
                                kind,
                                detail,
                            });
                        }
                    }
                }
            }
            grid_row.push(block);
        }
        grid.push(grid_row);
    }
    if precision_warnings > 0 {
        log::warn!(
            "{precision_warnings} entries rounded within {} of a tie; decoded values may be wrong",
            options.guard_band
        );
    }
    let c_hat = assemble(&grid)?;
    let (rel_error, exact_match) = match options.reference {
        Some(reference) => {
            let rel = match frobenius_rel_error(reference, &c_hat) {
                Ok(e) => Some(e),
                Err(Error::ZeroReference) => None,
                Err(e) => return Err(e),
            };
            (rel, Some(reference == &c_hat))
        }
        None => (None, None),
    };
    Ok(DecodeReport {
        c_hat,
        used_workers: chosen.iter().map(|r| r.worker_id).collect(),
        rel_error,
        exact_match,
        condition_estimate,
        digit_margin,
        precision_warnings,
        max_discarded_imag,
        failures,
    })
}

/// `Σ_d digits[d] · s^(d - (q-1))` for `q` = `(digits.len() + 1) / 2`, as a rational.
pub fn synthesize_centered(digits: &[i64], s: u64) -> BigRational {
    let q = digits.len().div_ceil(2);
    let sb = BigRational::from_integer(BigInt::from(s));
    let mut acc = <BigRational as Zero>::zero();
    for (d, &t) in digits.iter().enumerate() {
        let pow = sb.powi(d as i32 - (q as i32 - 1)).expect("nonzero base");
        acc += pow * BigRational::from_integer(BigInt::from(t));
    }
    acc
}
