//! Exit criteria. Each test prints one `[PASS]`/`[FAIL]` line and asserts.
//!
//! Run with `cargo test -p coded-matmul --test acceptance -- --nocapture`.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use coded_matmul::decoding::{decode, extract_digit, interpolate, DecodeOptions, WorkerResult};
use coded_matmul::encoding::{
    encode_all, encode_share, exponent_plan, recovery_threshold, DigitLayout, SchemeParams, Side,
};
use coded_matmul::io::random_matrix;
use coded_matmul::matrix::{conservative_bound, partition, Matrix};
use coded_matmul::numeric::{
    points_integer, points_real_equispaced, points_unit_circle, vandermonde_condition, EvaluationPoints, PointKind,
};
use coded_matmul::scalar::{rational_to_f64, Scalar, ScalarKind};
use coded_matmul::sim::{
    reference_product, run_job, sweep_stragglers, worker_task, BaseChoice, CostModel, JobOptions, StragglerMode,
    StragglerModel, StragglerSweep,
};
use coded_matmul::Error;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(id: &str, title: &str, ok: bool, detail: String) {
    println!("[{}] {id} {title}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{id} {title}: {detail}");
}

fn exact_results(a: &Matrix<i64>, b: &Matrix<i64>, params: &SchemeParams, points: &[i64]) -> Vec<WorkerResult<BigInt>> {
    let plan = exponent_plan(params).unwrap();
    let pts: Vec<BigInt> = points.iter().map(|&z| BigInt::from(z)).collect();
    encode_all(a, b, params, &plan, &pts, DigitLayout::Shifted)
        .unwrap()
        .into_iter()
        .map(|sh| WorkerResult {
            worker_id: sh.worker_id,
            point: sh.point.clone(),
            product: worker_task(&sh.a, &sh.b).unwrap(),
            compute_duration: Duration::ZERO,
        })
        .collect()
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

#[test]
fn ac01_exact_recovery_from_every_subset() {
    let started = Instant::now();
    let a = random_matrix(8, 8, 5, true, 101);
    let b = random_matrix(8, 8, 5, true, 102);
    let bound = conservative_bound(&a, &b).unwrap();
    let params = SchemeParams::new(2, 2, 2, 1, SchemeParams::auto_base(bound).unwrap(), bound).unwrap();
    let plan = exponent_plan(&params).unwrap();
    let results = exact_results(&a, &b, &params, &points_integer(10));
    let reference = reference_product(&a, &b).unwrap();
    let subsets = combinations(10, 4);
    let mut mismatches = 0;
    for subset in &subsets {
        let opts = DecodeOptions {
            layout: DigitLayout::Shifted,
            subset: Some(subset.clone()),
            ..DecodeOptions::default()
        };
        let report = decode::<BigInt, BigRational>(&results, &params, &plan, &opts).unwrap();
        if report.c_hat != reference {
            mismatches += 1;
        }
    }
    let elapsed = started.elapsed();
    verdict(
        "AC1",
        "exact recovery from all 4-of-10 subsets",
        subsets.len() == 210 && mismatches == 0 && elapsed < Duration::from_secs(5),
        format!("{} subsets, {mismatches} mismatches, {elapsed:?}", subsets.len()),
    );
}

#[test]
fn ac02_threshold_formula() {
    let mut ok = recovery_threshold(2, 2, 1) == 4 && recovery_threshold(2, 2, 2) == 9;
    for m in 1..=4 {
        for n in 1..=4 {
            for p in 1..=6 {
                ok &= recovery_threshold(m, n, p) == p * m * n + p - 1;
            }
        }
    }
    verdict(
        "AC2",
        "recovery threshold",
        ok,
        format!(
            "(2,2,1)->{} (2,2,2)->{} p'=p matches pmn+p-1",
            recovery_threshold(2, 2, 1),
            recovery_threshold(2, 2, 2)
        ),
    );
}

/// Exact coefficient stack with `s = 2L`, digits centred on `s^0`.
fn centered_stack(a: &Matrix<i64>, b: &Matrix<i64>, params: &SchemeParams) -> Vec<Matrix<BigRational>> {
    let plan = exponent_plan(params).unwrap();
    let pts: Vec<BigRational> = points_integer(params.tau())
        .into_iter()
        .map(BigRational::from_i64)
        .collect();
    let results: Vec<WorkerResult<BigRational>> = encode_all(a, b, params, &plan, &pts, DigitLayout::Centered)
        .unwrap()
        .into_iter()
        .map(|sh| WorkerResult {
            worker_id: sh.worker_id,
            point: sh.point.clone(),
            product: worker_task(&sh.a, &sh.b).unwrap(),
            compute_duration: Duration::ZERO,
        })
        .collect();
    interpolate::<BigRational, BigRational>(&results, params.tau())
        .unwrap()
        .coeffs()
        .to_vec()
}

fn max_abs(stack: &[Matrix<BigRational>]) -> BigRational {
    stack
        .iter()
        .flat_map(|m| m.as_slice().iter())
        .map(|x| x.abs())
        .max()
        .unwrap()
}

#[test]
fn ac03_tradeoff_magnitude_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut violations = 0;
    let mut ratio_max = 0.0f64;
    let mut worst = (0.0f64, 0.0f64);
    let instances = 100;
    for _ in 0..instances {
        let a = random_matrix(8, 4, 3, true, rng.gen());
        let b = random_matrix(8, 4, 3, true, rng.gen());
        let bound = conservative_bound(&a, &b).unwrap();
        let s = 2 * bound;
        let l = BigRational::from_integer(BigInt::from(bound));
        let mut observed = BTreeMap::new();
        for p_prime in [1usize, 2, 4] {
            let params = SchemeParams::new(2, 2, 4, p_prime, s, bound).unwrap();
            let q = params.q() as u32;
            let x = max_abs(&centered_stack(&a, &b, &params));
            let limit = BigRational::from_integer(BigInt::from(s).pow(q)) / BigRational::from_i64(2);
            if x > limit {
                violations += 1;
            }
            observed.insert(p_prime, x);
        }
        let two_l2 = BigRational::from_i64(2) * &l * &l;
        let eight_l4 = BigRational::from_i64(8) * &l * &l * &l * &l;
        if observed[&2] > two_l2 || observed[&1] > eight_l4 {
            violations += 1;
        }
        let r2 = rational_to_f64(&(&observed[&2] / &two_l2));
        let r1 = rational_to_f64(&(&observed[&1] / &eight_l4));
        worst = (worst.0.max(r2), worst.1.max(r1));
        ratio_max = ratio_max.max(rational_to_f64(&(&observed[&2] / &observed[&1])));
    }
    verdict(
        "AC3",
        "max|X_k| <= (2L)^(p/p')/2",
        violations == 0 && ratio_max < 1.0,
        format!(
            "{instances} instances, {violations} violations; worst max|X|/2L^2 (p'=2) = {:.3e}, \
             worst max|X|/8L^4 (p'=1) = {:.3e}, max ratio p'=2/p'=1 = {ratio_max:.3e}",
            worst.0, worst.1
        ),
    );
}

/// Bins `Ã(s,z)ᵀB̃(s,z)` by (z-exponent, s-exponent) straight from the
/// six-fold sum, without consulting the exponent plan.
fn symbolic_bins(
    a: &Matrix<i64>,
    b: &Matrix<i64>,
    m: usize,
    n: usize,
    p: usize,
    pp: usize,
) -> BTreeMap<(i64, i64), Matrix<BigRational>> {
    let q = p / pp;
    let pa = partition(a, p, m).unwrap();
    let pb = partition(b, p, n).unwrap();
    let mut bins: BTreeMap<(i64, i64), Matrix<BigRational>> = BTreeMap::new();
    for i in 0..m {
        for j in 0..pp {
            for k in 0..q {
                for u in 0..n {
                    for v in 0..pp {
                        for w in 0..q {
                            let lhs = pa.block(k + q * j, i);
                            let rhs = pb.block(w + q * v, u);
                            let prod = lhs.transpose_mul_i128(rhs).unwrap();
                            let z_exp = (m * pp * u + (pp - 1 - v) + j + pp * i) as i64;
                            let s_exp = k as i64 - w as i64;
                            let term = prod.map(|&x| BigRational::from_integer(BigInt::from(x)));
                            bins.entry((z_exp, s_exp))
                                .and_modify(|acc| *acc = acc.add(&term).unwrap())
                                .or_insert(term);
                        }
                    }
                }
            }
        }
    }
    bins
}

fn random_rational(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> BigRational {
    let num = rng.gen_range(lo..=hi);
    let den = rng.gen_range(1..=7);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[test]
fn ac04_symbolic_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checks = 0;
    let mut mismatches = 0;
    let mut degree_errors = 0;
    for (m, n, p, pp) in [(2, 2, 2, 1), (2, 2, 4, 2), (2, 2, 4, 4), (3, 2, 2, 1)] {
        let params = SchemeParams::new(m, n, p, pp, 1 << 20, 10).unwrap();
        let plan = exponent_plan(&params).unwrap();
        for _ in 0..20 {
            let v = p * rng.gen_range(1..=2);
            let a = random_matrix(v, m * rng.gen_range(1..=2), 4, true, rng.gen());
            let b = random_matrix(v, n * rng.gen_range(1..=2), 4, true, rng.gen());
            let bins = symbolic_bins(&a, &b, m, n, p, pp);
            let max_z = bins.keys().map(|k| k.0).max().unwrap();
            if max_z != (m * n * pp + pp - 2) as i64 {
                degree_errors += 1;
            }
            let pa = partition(&a.to_scalar::<BigRational>(), p, m).unwrap();
            let pb = partition(&b.to_scalar::<BigRational>(), p, n).unwrap();
            for _ in 0..5 {
                let s = random_rational(&mut rng, 2, 40);
                let z = random_rational(&mut rng, -9, 9);
                let sa = encode_share(&pa, &plan, Side::A, &s, &z, DigitLayout::Centered).unwrap();
                let sb = encode_share(&pb, &plan, Side::B, &s, &z, DigitLayout::Centered).unwrap();
                let evaluated = worker_task(&sa, &sb).unwrap();
                let mut expanded = Matrix::<BigRational>::zeros(evaluated.rows(), evaluated.cols());
                for (&(ze, se), coeff) in &bins {
                    let w = z.powi(ze as i32).unwrap().mul_ref(&s.powi(se as i32).unwrap());
                    expanded.add_scaled(coeff, &w).unwrap();
                }
                checks += 1;
                if expanded != evaluated {
                    mismatches += 1;
                }
            }
        }
    }
    verdict(
        "AC4",
        "six-fold expansion equals evaluated product",
        checks == 400 && mismatches == 0 && degree_errors == 0,
        format!("{checks} evaluations, {mismatches} mismatches, {degree_errors} wrong max z-degrees"),
    );
}

#[test]
fn ac05_decoder_insufficiency() {
    let a = random_matrix(8, 8, 5, true, 5);
    let b = random_matrix(8, 8, 5, true, 6);
    let bound = conservative_bound(&a, &b).unwrap();
    let s = SchemeParams::auto_base(bound).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for pp in [1, 2] {
        let params = SchemeParams::new(2, 2, 2, pp, s, bound).unwrap();
        let plan = exponent_plan(&params).unwrap();
        let tau = params.tau();
        let results = exact_results(&a, &b, &params, &points_integer(10));
        let short = &results[..tau - 1];
        let opts = DecodeOptions {
            layout: DigitLayout::Shifted,
            ..DecodeOptions::default()
        };
        let r1 = decode::<BigInt, BigRational>(short, &params, &plan, &opts);
        let r2 = decode::<BigInt, BigRational>(short, &params, &plan, &opts);
        let good = matches!(r1, Err(Error::InsufficientResults { tau: t, got }) if t == tau && got == tau - 1)
            && matches!(r2, Err(Error::InsufficientResults { .. }));

        // Same through the simulator: crash all but tau - 1 workers.
        let crash = StragglerModel {
            mode: StragglerMode::Crash(10 - (tau - 1)),
            seed: 11,
        };
        let job = run_job(
            &a,
            &b,
            &params,
            &EvaluationPoints::Integer(points_integer(10)),
            &crash,
            CostModel::synthetic(1.0),
            ScalarKind::ExactRational,
            &JobOptions::default(),
        );
        let job_good = matches!(job, Err(Error::JobFailed { succeeded, .. }) if succeeded == tau - 1);
        ok &= good && job_good;
        detail.push(format!("tau={tau}: decode error {good}, job failure {job_good}"));
    }
    verdict("AC5", "tau-1 results never decode", ok, detail.join("; "));
}

#[test]
fn ac06_straggler_latency_trend() {
    let started = Instant::now();
    let a = random_matrix(8, 8, 50, false, 6);
    let b = random_matrix(8, 8, 50, false, 7);
    let config = StragglerSweep {
        m: 2,
        n: 2,
        p: 2,
        workers: 10,
        base: BaseChoice::Auto,
        point_kind: PointKind::Real,
        scalar: ScalarKind::FloatReal,
        cost: CostModel::synthetic(1.0),
        straggler_counts: None,
        trials: 1,
        seed: 2024,
    };
    let rows = sweep_stragglers(&config, &a, &b).unwrap();
    let mut ok = rows.len() == 20;
    let mut curve = BTreeMap::new();
    for r in &rows {
        let expected = match (r.tau, r.stragglers) {
            (4, s) if s <= 6 => 1.0,
            (4, _) => 2.0,
            (9, s) if s <= 1 => 1.0,
            (9, _) => 2.0,
            _ => f64::NAN,
        };
        ok &= r.latency_ms == expected;
        curve.entry(r.tau).or_insert_with(Vec::new).push(r.latency_ms);
    }
    let elapsed = started.elapsed();
    ok &= elapsed < Duration::from_secs(1);
    verdict(
        "AC6",
        "latency vs stragglers (synthetic cost 1.0, K=10)",
        ok,
        format!("tau=4: {:?}; tau=9: {:?}; {elapsed:?}", curve[&4], curve[&9]),
    );
}

#[test]
fn ac07_error_vs_bound_trend() {
    let bounds = [50u32, 100, 200, 500, 1000, 2000];
    let bases = [26u32, 28, 30, 32, 34, 36];
    let points = EvaluationPoints::Real(points_real_equispaced(10).unwrap());
    let options = JobOptions {
        on_failure: coded_matmul::decoding::FailurePolicy::ZeroFill,
        ..JobOptions::default()
    };
    let seeds = 0..5u64;
    let mut means = Vec::new();
    let mut spreads = Vec::new();
    for (&e, &log_s) in bounds.iter().zip(&bases) {
        let mut errs = Vec::new();
        for seed in seeds.clone() {
            let a = random_matrix(400, 400, e, false, 2 * seed);
            let b = random_matrix(400, 400, e, false, 2 * seed + 1);
            let bound = conservative_bound(&a, &b).unwrap();
            let params = SchemeParams::new(2, 2, 2, 1, 1u64 << log_s, bound).unwrap();
            let (report, _) = run_job(
                &a,
                &b,
                &params,
                &points,
                &StragglerModel::none(),
                CostModel::synthetic(1.0),
                ScalarKind::FloatReal,
                &options,
            )
            .unwrap();
            errs.push(report.rel_error.unwrap());
        }
        let mean = errs.iter().sum::<f64>() / errs.len() as f64;
        let var = errs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (errs.len() - 1) as f64;
        means.push(mean);
        spreads.push(var.sqrt());
    }
    let small_ok = means[..2].iter().all(|&e| e <= 1e-5);
    let monotone = means
        .windows(2)
        .zip(spreads.windows(2))
        .all(|(m, sd)| m[1] >= m[0] - 2.0 * sd[0].max(sd[1]));
    let collapse = (means[bounds.len() - 1] - 1.0).abs() <= 0.05;
    let table: Vec<String> = bounds
        .iter()
        .zip(&bases)
        .zip(&means)
        .map(|((e, s), m)| format!("E={e} s=2^{s} e={m:.3e}"))
        .collect();
    verdict(
        "AC7",
        "error grows with the bound, then collapses",
        small_ok && monotone && collapse,
        format!(
            "small<=1e-5 {small_ok}, monotone {monotone}, collapse {collapse}: {}",
            table.join(", ")
        ),
    );
}

#[test]
fn ac08_unit_circle_exactness() {
    let points = EvaluationPoints::Unit(points_unit_circle(10));
    let mut exact = 0;
    let mut worst = 0.0f64;
    let instances = 20;
    for seed in 0..instances {
        let a = random_matrix(400, 400, 50, false, 1000 + 2 * seed);
        let b = random_matrix(400, 400, 50, false, 1001 + 2 * seed);
        let bound = conservative_bound(&a, &b).unwrap();
        let params = SchemeParams::new(2, 2, 2, 1, SchemeParams::auto_base(bound).unwrap(), bound).unwrap();
        let (report, _) = run_job(
            &a,
            &b,
            &params,
            &points,
            &StragglerModel::compute_twice(3, seed),
            CostModel::synthetic(1.0),
            ScalarKind::FloatComplex,
            &JobOptions::default(),
        )
        .unwrap();
        let e = report.rel_error.unwrap();
        worst = worst.max(e);
        if e == 0.0 {
            exact += 1;
        }
    }
    verdict(
        "AC8",
        "unit-circle points decode exactly",
        exact == instances,
        format!("{exact}/{instances} instances with rel_error == 0 (worst {worst:e})"),
    );
}

fn digit_vectors(len: usize, l: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (-(l - 1)..=l - 1).map(move |d| {
                    let mut v = prefix.clone();
                    v.push(d);
                    v
                })
            })
            .collect();
    }
    out
}

#[test]
fn ac09_digit_extraction_exhaustive() {
    let started = Instant::now();
    let mut vectors = 0usize;
    let mut failures = 0usize;
    for l in [2i64, 3, 4] {
        let s = 2 * l as u64;
        for q in 1..=3usize {
            for digits in digit_vectors(2 * q - 1, l) {
                vectors += 1;
                let target = digits[q - 1];
                // Float, centred: Σ T_d s^(d - (q-1)).
                let x: f64 = digits
                    .iter()
                    .enumerate()
                    .map(|(d, &t)| t as f64 * (s as f64).powi(d as i32 - (q as i32 - 1)))
                    .sum();
                let float_ok = extract_digit(&x, s, q, DigitLayout::Centered, l as u64)
                    .map(|d| d.value == target)
                    .unwrap_or(false);
                // Exact, shifted: Σ T_d s^d with the target at s^(q-1).
                let shifted: i64 = digits
                    .iter()
                    .enumerate()
                    .map(|(d, &t)| t * (s as i64).pow(d as u32))
                    .sum();
                let exact_ok = extract_digit(&BigRational::from_i64(shifted), s, q, DigitLayout::Shifted, l as u64)
                    .map(|d| d.value == target)
                    .unwrap_or(false);
                // Exact, centred.
                let centred = coded_matmul::decoding::synthesize_centered(&digits, s);
                let centred_ok = extract_digit(&centred, s, q, DigitLayout::Centered, l as u64)
                    .map(|d| d.value == target)
                    .unwrap_or(false);
                if !(float_ok && exact_ok && centred_ok) {
                    failures += 1;
                }
            }
        }
    }
    let elapsed = started.elapsed();
    verdict(
        "AC9",
        "digit extraction recovers T_0 for every digit vector",
        failures == 0 && elapsed < Duration::from_secs(10),
        format!("{vectors} vectors, {failures} failures, {elapsed:?}"),
    );
}

#[test]
fn ac10_unit_circle_conditioning() {
    let unit = vandermonde_condition(&points_unit_circle(10)).unwrap();
    let real = vandermonde_condition(&points_real_equispaced(10).unwrap()).unwrap();
    verdict(
        "AC10",
        "unit-circle Vandermonde is better conditioned",
        unit < real,
        format!("unit {unit:.6e} < real {real:.6e}"),
    );
}
