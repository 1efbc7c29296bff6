// Roots of unity versus equispaced real points: condition number of the
// interpolation system, and the decoding error it produces.

use coded_matmul::decoding::FailurePolicy;
use coded_matmul::io::random_matrix;
use coded_matmul::numeric::{points_real_equispaced, points_unit_circle, vandermonde_condition};
use coded_matmul::{
    conservative_bound, run_job, CostModel, EvaluationPoints, JobOptions, PointKind, ScalarKind, SchemeParams,
    StragglerModel,
};

pub fn run_example() -> coded_matmul::Result<()> {
    for k in [4, 9, 10] {
        println!(
            "K = {k:>2}: cond real {:>12.4e}  cond unit {:>8.4}",
            vandermonde_condition(&points_real_equispaced(k)?)?,
            vandermonde_condition(&points_unit_circle(k))?
        );
    }

    let a = random_matrix(100, 100, 50, false, 3);
    let b = random_matrix(100, 100, 50, false, 4);
    let bound = conservative_bound(&a, &b)?;
    let params = SchemeParams::new(2, 2, 2, 1, 1 << 30, bound)?;
    for (kind, scalar) in [
        (PointKind::Real, ScalarKind::FloatReal),
        (PointKind::Unit, ScalarKind::FloatComplex),
    ] {
        let (report, _) = run_job(
            &a,
            &b,
            &params,
            &EvaluationPoints::generate(kind, 10)?,
            &StragglerModel::none(),
            CostModel::synthetic(1.0),
            scalar,
            &JobOptions {
                on_failure: FailurePolicy::ZeroFill,
                ..JobOptions::default()
            },
        )?;
        println!("{kind:?}: {}", report.summary_line());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> coded_matmul::Result<()> {
    run_example()
}
