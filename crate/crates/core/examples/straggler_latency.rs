// Computation latency for both ends of the tradeoff as stragglers are
// added, under a deterministic cost model: each task takes 1 ms and a
// straggler computes its task twice.

use coded_matmul::io::random_matrix;
use coded_matmul::sim::{sweep_stragglers, write_sweep_csv, BaseChoice, StragglerSweep};
use coded_matmul::{CostModel, PointKind, ScalarKind};

pub fn run_example() -> coded_matmul::Result<()> {
    let a = random_matrix(40, 40, 50, false, 0);
    let b = random_matrix(40, 40, 50, false, 1);
    let config = StragglerSweep {
        m: 2,
        n: 2,
        p: 2,
        workers: 10,
        base: BaseChoice::Auto,
        point_kind: PointKind::Unit,
        scalar: ScalarKind::FloatComplex,
        cost: CostModel::synthetic(1.0),
        straggler_counts: None,
        trials: 1,
        seed: 0,
    };
    let rows = sweep_stragglers(&config, &a, &b)?;
    println!("{:>3} {:>8} {:>8}", "S", "tau=4", "tau=9");
    for s in 0..10 {
        let at = |tau| {
            rows.iter()
                .find(|r| r.tau == tau && r.stragglers == s)
                .map(|r| r.latency_ms)
                .unwrap_or(f64::NAN)
        };
        println!("{s:>3} {:>8} {:>8}", at(4), at(9));
    }
    write_sweep_csv(&rows[..4], std::io::stdout().lock())?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> coded_matmul::Result<()> {
    run_example()
}
