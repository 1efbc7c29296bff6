//! Evaluation points, Vandermonde systems and conditioning diagnostics.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;

use crate::encoding::check_distinct;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{Field, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointKind {
    Real,
    Unit,
    Integer,
}

/// One job's evaluation points; all of one kind.
#[derive(Clone, Debug, PartialEq)]
pub enum EvaluationPoints {
    Real(Vec<f64>),
    Unit(Vec<Complex64>),
    Integer(Vec<i64>),
}

impl EvaluationPoints {
    pub fn generate(kind: PointKind, k: usize) -> Result<Self> {
        Ok(match kind {
            PointKind::Real => EvaluationPoints::Real(points_real_equispaced(k)?),
            PointKind::Unit => EvaluationPoints::Unit(points_unit_circle(k)),
            PointKind::Integer => EvaluationPoints::Integer(points_integer(k)),
        })
    }

    pub fn kind(&self) -> PointKind {
        match self {
            EvaluationPoints::Real(_) => PointKind::Real,
            EvaluationPoints::Unit(_) => PointKind::Unit,
            EvaluationPoints::Integer(_) => PointKind::Integer,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            EvaluationPoints::Real(v) => v.len(),
            EvaluationPoints::Unit(v) => v.len(),
            EvaluationPoints::Integer(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_complex(&self) -> Vec<Complex64> {
        match self {
            EvaluationPoints::Real(v) => v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            EvaluationPoints::Unit(v) => v.clone(),
            EvaluationPoints::Integer(v) => v.iter().map(|&x| Complex64::new(x as f64, 0.0)).collect(),
        }
    }

    /// 2-norm condition number of the Vandermonde matrix on the points at `indices`.
    pub fn condition_of(&self, indices: &[usize]) -> Result<f64> {
        match self {
            EvaluationPoints::Unit(v) => vandermonde_condition(&indices.iter().map(|&i| v[i]).collect::<Vec<_>>()),
            EvaluationPoints::Real(v) => vandermonde_condition(&indices.iter().map(|&i| v[i]).collect::<Vec<_>>()),
            EvaluationPoints::Integer(v) => {
                vandermonde_condition(&indices.iter().map(|&i| v[i] as f64).collect::<Vec<_>>())
            }
        }
    }

    /// CSV with columns `index,re,im`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["index", "re", "im"])?;
        for (i, z) in self.as_complex().iter().enumerate() {
            out.write_record([i.to_string(), z.re.to_string(), z.im.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `-1 + 2i/(K-1)` for `i = 0..K`.
pub fn points_real_equispaced(k: usize) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(Error::InvalidParams(format!("equispaced points need K >= 2, got {k}")));
    }
    let last = (k - 1) as f64;
    // Written as (2i - (K-1)) / (K-1) so mirrored points are exact negatives.
    Ok((0..k).map(|i| (2.0 * i as f64 - last) / last).collect())
}

/// The K-th roots of unity, starting at 1.
pub fn points_unit_circle(k: usize) -> Vec<Complex64> {
    (0..k)
        .map(|i| {
            // Axis points are produced exactly.
            if (4 * i) % k == 0 {
                quarter(4 * i / k)
            } else {
                Complex64::from_polar(1.0, 2.0 * PI * i as f64 / k as f64)
            }
        })
        .collect()
}

fn quarter(idx: usize) -> Complex64 {
    match idx {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `1, -1, 2, -2, ...`, truncated to K.
pub fn points_integer(k: usize) -> Vec<i64> {
    (0..k)
        .map(|i| {
            let mag = (i / 2 + 1) as i64;
            if i % 2 == 0 {
                mag
            } else {
                -mag
            }
        })
        .collect()
}

/// Rows `[1, z, z², …, z^(K-1)]`, one per point.
pub fn vandermonde<F: Scalar>(points: &[F]) -> Matrix<F> {
    let k = points.len();
    let mut out = Matrix::zeros(k, k);
    for (r, z) in points.iter().enumerate() {
        let mut pow = F::one();
        for c in 0..k {
            *out.get_mut(r, c) = pow.clone();
            pow = pow.mul_ref(z);
        }
    }
    out
}

pub fn vandermonde_condition<T>(points: &[T]) -> Result<f64>
where
    T: ComplexField<RealField = f64> + Copy,
{
    if points.is_empty() {
        return Err(Error::InvalidParams("no points".into()));
    }
    check_distinct(points)?;
    let k = points.len();
    let v = DMatrix::from_fn(k, k, |r, c| points[r].powi(c as i32));
    let sv = v.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        return Err(Error::Singular("Vandermonde matrix has a zero singular value".into()));
    }
    Ok(max / min)
}

/// LU factorization with partial pivoting, reusable across right-hand sides.
#[derive(Clone, Debug)]
pub struct LuFactors<F> {
    n: usize,
    lu: Vec<F>,
    perm: Vec<usize>,
}

impl<F: Field> LuFactors<F> {
    pub fn new(a: &Matrix<F>) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::Dimension {
                axis: "square",
                detail: format!("{:?} is not square", a.shape()),
            });
        }
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| {
                    lu[x * n + col]
                        .pivot_weight()
                        .total_cmp(&lu[y * n + col].pivot_weight())
                })
                .unwrap();
            if lu[pivot * n + col].is_zero() {
                return Err(Error::Singular(format!("no pivot in column {col}")));
            }
            if pivot != col {
                for c in 0..n {
                    lu.swap(pivot * n + c, col * n + c);
                }
                perm.swap(pivot, col);
            }
            let diag = lu[col * n + col].clone();
            for r in col + 1..n {
                if lu[r * n + col].is_zero() {
                    continue;
                }
                let factor = lu[r * n + col].div_ref(&diag).expect("nonzero pivot");
                for c in col + 1..n {
                    let t = factor.mul_ref(&lu[col * n + c]);
                    lu[r * n + c] = lu[r * n + c].sub_ref(&t);
                }
                lu[r * n + col] = factor;
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b`; `b` is in the original row order.
    pub fn solve(&self, b: &[F]) -> Vec<F> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<F> = self.perm.iter().map(|&i| b[i].clone()).collect();
        for r in 0..n {
            for c in 0..r {
                let t = self.lu[r * n + c].mul_ref(&x[c]);
                x[r] = x[r].sub_ref(&t);
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                let t = self.lu[r * n + c].mul_ref(&x[c]);
                x[r] = x[r].sub_ref(&t);
            }
            x[r] = x[r].div_ref(&self.lu[r * n + r]).expect("nonzero pivot");
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn equispaced_examples() {
        assert_eq!(points_real_equispaced(2).unwrap(), vec![-1.0, 1.0]);
        assert_eq!(points_real_equispaced(3).unwrap(), vec![-1.0, 0.0, 1.0]);
        let ten = points_real_equispaced(10).unwrap();
        assert_eq!(ten[0], -1.0);
        assert_eq!(ten[9], 1.0);
        assert!((ten[1] + 7.0 / 9.0).abs() < 1e-15);
        assert!((ten[8] - 7.0 / 9.0).abs() < 1e-15);
        assert!(points_real_equispaced(1).is_err());
    }

    #[test]
    fn unit_circle_examples() {
        assert_eq!(points_unit_circle(1), vec![Complex64::new(1.0, 0.0)]);
        assert_eq!(
            points_unit_circle(4),
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.0, -1.0)
            ]
        );
        let ten = points_unit_circle(10);
        check_distinct(&ten).unwrap();
        assert!(ten.iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
        assert_eq!(ten[5], Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn integer_examples() {
        assert_eq!(points_integer(1), vec![1]);
        assert_eq!(points_integer(4), vec![1, -1, 2, -2]);
        assert_eq!(points_integer(10).iter().map(|v| v.abs()).max(), Some(5));
    }

    #[test]
    fn generators_are_distinct_and_symmetric() {
        for k in 2..40 {
            let real = points_real_equispaced(k).unwrap();
            check_distinct(&real).unwrap();
            for i in 0..k {
                assert_eq!(real[i], -real[k - 1 - i]);
            }
            check_distinct(&points_unit_circle(k)).unwrap();
            check_distinct(&points_integer(k)).unwrap();
        }
    }

    #[test]
    fn condition_trivial_and_roots_of_unity() {
        assert!((vandermonde_condition(&[0.3f64]).unwrap() - 1.0).abs() < 1e-12);
        for k in 1..=16 {
            let roots = points_unit_circle(k);
            // V^H V = K·I for the full set of roots.
            let v = DMatrix::from_fn(k, k, |r, c| roots[r].powi(c as i32));
            let gram = v.adjoint() * &v;
            for r in 0..k {
                for c in 0..k {
                    let expect = if r == c { k as f64 } else { 0.0 };
                    assert!((gram[(r, c)] - Complex64::new(expect, 0.0)).norm() < 1e-9);
                }
            }
            assert!((vandermonde_condition(&roots).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn unit_circle_beats_equispaced_reals() {
        for k in 2..=16 {
            let unit = vandermonde_condition(&points_unit_circle(k)).unwrap();
            let real = vandermonde_condition(&points_real_equispaced(k).unwrap()).unwrap();
            assert!(unit <= real, "K={k}: unit {unit} real {real}");
        }
    }

    #[test]
    fn condition_rejects_duplicates() {
        assert!(matches!(
            vandermonde_condition(&[1.0f64, 2.0, 1.0]),
            Err(Error::DuplicatePoint { .. })
        ));
    }

    #[test]
    fn lu_solves_exact_vandermonde() {
        let pts: Vec<BigRational> = [0, 1].iter().map(|&v| BigRational::from_i64(v)).collect();
        let lu = LuFactors::new(&vandermonde(&pts)).unwrap();
        let x = lu.solve(&[BigRational::from_i64(5), BigRational::from_i64(12)]);
        assert_eq!(x, vec![BigRational::from_i64(5), BigRational::from_i64(7)]);

        let singular = vandermonde(&[2.0f64, 2.0]);
        assert!(matches!(LuFactors::new(&singular), Err(Error::Singular(_))));
    }
}
