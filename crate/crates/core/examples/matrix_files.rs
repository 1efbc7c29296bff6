// Round-trip matrices through the binary format, run a job on the loaded
// copies, and keep the decoded product.

use coded_matmul::io::{load, random_matrix, save, to_text};
use coded_matmul::sim::reference_product;
use coded_matmul::{
    conservative_bound, run_job, CostModel, EvaluationPoints, JobOptions, PointKind, ScalarKind, SchemeParams,
    StragglerModel,
};

pub fn run_example() -> coded_matmul::Result<()> {
    let dir = std::env::temp_dir().join(format!("coded-matmul-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let (a_path, b_path, c_path) = (dir.join("a.cdm"), dir.join("b.cdm"), dir.join("c.cdm"));
    save(&random_matrix(12, 6, 20, true, 10), &a_path)?;
    save(&random_matrix(12, 4, 20, true, 11), &b_path)?;

    let (a, b) = (load(&a_path)?, load(&b_path)?);
    let bound = conservative_bound(&a, &b)?;
    let params = SchemeParams::new(3, 2, 2, 1, SchemeParams::auto_base(bound)?, bound)?;
    let (report, _) = run_job(
        &a,
        &b,
        &params,
        &EvaluationPoints::generate(PointKind::Integer, params.tau() + 3)?,
        &StragglerModel::none(),
        CostModel::synthetic(1.0),
        ScalarKind::ExactRational,
        &JobOptions::default(),
    )?;
    assert_eq!(report.c_hat, reference_product(&a, &b)?);
    save(&report.c_hat, &c_path)?;
    print!("{}", to_text(&load(&c_path)?));

    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> coded_matmul::Result<()> {
    run_example()
}
