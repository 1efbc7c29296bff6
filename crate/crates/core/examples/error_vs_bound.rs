// Floating-point decoding with real evaluation points. The relative error
// grows with the entry bound until the coefficients no longer fit in 64-bit
// integers, at which point every entry is lost.

use coded_matmul::cli::{sweep_error, ExperimentConfig, MatrixSource};
use coded_matmul::sim::BaseChoice;
use coded_matmul::{CostModel, PointKind, ScalarKind, StragglerMode};

pub fn run_example() -> coded_matmul::Result<()> {
    let config = ExperimentConfig {
        m: 2,
        n: 2,
        p: 2,
        p_prime: 1,
        workers: 10,
        base: BaseChoice::Auto,
        point_kind: PointKind::Real,
        scalar: ScalarKind::FloatReal,
        straggler: StragglerMode::None,
        cost: CostModel::synthetic(1.0),
        trials: 1,
        seed: 0,
        source: MatrixSource::Generated {
            size: 100,
            bound: 0,
            signed: false,
        },
        unsafe_base: false,
    };
    let bounds = [50, 200, 1000, 4000];
    let bases: Vec<BaseChoice> = [26, 30, 34, 38].iter().map(|&k| BaseChoice::Fixed(1 << k)).collect();
    println!("{:>6} {:>12} {:>12} {:>8}", "bound", "s", "rel_error", "lost");
    for row in sweep_error(&config, &bounds, &bases)? {
        println!(
            "{:>6} {:>12} {:>12.3e} {:>8}",
            row.entry_bound,
            row.s,
            row.rel_error.unwrap_or(f64::NAN),
            row.failed_entries
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> coded_matmul::Result<()> {
    run_example()
}
