// Two-by-two block split on each side (`m = n = p = 2`, `p' = 1`): ten
// workers, any four suffice. Three workers straggle and the exact decoder
// still reproduces `AᵀB` bit for bit.

use coded_matmul::numeric::{points_integer, EvaluationPoints};
use coded_matmul::sim::reference_product;
use coded_matmul::{
    conservative_bound, run_job, CostModel, JobOptions, Matrix, ScalarKind, SchemeParams, StragglerModel,
};

pub fn run_example() -> coded_matmul::Result<()> {
    let a = Matrix::from_fn(4, 4, |r, c| (r as i64 * 3 + c as i64) % 5 - 2);
    let b = Matrix::from_fn(4, 4, |r, c| (r as i64 + 2 * c as i64) % 4 - 1);
    let bound = conservative_bound(&a, &b)?;
    let params = SchemeParams::new(2, 2, 2, 1, SchemeParams::auto_base(bound)?, bound)?;
    println!("L = {bound}, s = {}, tau = {}", params.s, params.tau());

    let (report, latency) = run_job(
        &a,
        &b,
        &params,
        &EvaluationPoints::Integer(points_integer(10)),
        &StragglerModel::compute_twice(3, 7),
        CostModel::synthetic(1.0),
        ScalarKind::ExactRational,
        &JobOptions::default(),
    )?;
    println!(
        "stragglers {:?}, decoded from {:?}",
        latency.straggler_ids, report.used_workers
    );
    println!("latency {} ms", latency.computation_latency_ms);

    let c = reference_product(&a, &b)?;
    assert_eq!(report.c_hat, c);
    for r in 0..c.rows() {
        let row: Vec<String> = (0..c.cols())
            .map(|col| format!("{:>4}", report.c_hat.get(r, col)))
            .collect();
        println!("{}", row.join(""));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> coded_matmul::Result<()> {
    run_example()
}
