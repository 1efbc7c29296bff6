// With `p = 4` blocks along the inner dimension, `p'` trades workers for
// precision: fewer workers need a larger coefficient range `(2L)^(p/p')`.

use coded_matmul::decoding::{interpolate, WorkerResult};
use coded_matmul::io::random_matrix;
use coded_matmul::numeric::points_integer;
use coded_matmul::scalar::{rational_to_f64, Scalar};
use coded_matmul::sim::worker_task;
use coded_matmul::{conservative_bound, encode_all, exponent_plan, DigitLayout, SchemeParams};
use num_rational::BigRational;
use num_traits::Signed;

pub fn run_example() -> coded_matmul::Result<()> {
    let a = random_matrix(8, 4, 3, true, 1);
    let b = random_matrix(8, 4, 3, true, 2);
    let bound = conservative_bound(&a, &b)?;
    let s = 2 * bound;
    println!("L = {bound}, s = 2L = {s}");
    println!("{:>3} {:>4} {:>14} {:>14}", "p'", "tau", "max|X_k|", "(2L)^q/2");
    for p_prime in [1, 2, 4] {
        let params = SchemeParams::new(2, 2, 4, p_prime, s, bound)?;
        let plan = exponent_plan(&params)?;
        let points: Vec<BigRational> = points_integer(params.tau())
            .into_iter()
            .map(BigRational::from_i64)
            .collect();
        let results: Vec<WorkerResult<BigRational>> =
            encode_all(&a, &b, &params, &plan, &points, DigitLayout::Centered)?
                .into_iter()
                .map(|share| {
                    Ok(WorkerResult {
                        worker_id: share.worker_id,
                        point: share.point.clone(),
                        product: worker_task(&share.a, &share.b)?,
                        compute_duration: Default::default(),
                    })
                })
                .collect::<coded_matmul::Result<_>>()?;
        let stack = interpolate::<BigRational, BigRational>(&results, params.tau())?;
        let largest = stack
            .coeffs()
            .iter()
            .flat_map(|m| m.as_slice().iter().map(|x| rational_to_f64(&x.abs())))
            .fold(0.0, f64::max);
        let limit = (s as f64).powi(params.q() as i32) / 2.0;
        println!("{p_prime:>3} {:>4} {largest:>14.4e} {limit:>14.4e}", params.tau());

        if p_prime == 2 {
            println!("useful coefficients for p' = 2:");
            for i in 0..2 {
                for u in 0..2 {
                    println!("  C[{i},{u}] <- z^{}", plan.useful_index(i, u));
                }
            }
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> coded_matmul::Result<()> {
    run_example()
}
