//! One line per acceptance criterion, at the stated tolerance and time
//! budget. Run with `--nocapture` to see the report when everything passes.

use std::fs;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdc_core::binary_info::{binary_entropy, inverse_binary_entropy, task_prior_m, Probability, SourceModel};
use rdc_core::dc_region::{dc_feasibility_threshold, dc_lower_boundary, RepresentationChannel};
use rdc_core::error::Result;
use rdc_core::oneshot::{asymptotic_rdc, oneshot_drc, oneshot_rdc, rdc_breakpoint, OperatingPoint};
use rdc_core::oracle::{
    dc_grid_oracle, four_map_enumeration_oracle, projected_gradient_oracle, scalar_lp_oracle_drc,
    scalar_lp_oracle_rdc, GridSpec, PgProblem,
};
use rdc_core::universal::{
    i_lb, mutual_information_exact, rate_penalty_lower, rate_penalty_upper, theta_boundary, JointDecoderPMF,
};
use tempfile::TempDir;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn model(qx: f64, qs1: f64) -> SourceModel {
    SourceModel::new(qx, qs1).unwrap()
}

fn random_model(rng: &mut ChaCha8Rng) -> SourceModel {
    model(rng.gen_range(0.01..=0.49), rng.gen_range(0.01..=0.49))
}

fn agreement(a: Result<f64>, b: Result<f64>) -> f64 {
    match (a, b) {
        (Ok(x), Ok(y)) => (x - y).abs(),
        (Err(e1), Err(e2)) if e1.is_infeasible() && e2.is_infeasible() => 0.0,
        _ => f64::INFINITY,
    }
}

fn c1_oneshot_rdc_vs_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let m = random_model(&mut rng);
        let c = rng.gen_range(binary_entropy(m.q_s1()).get()..=1.0);
        let p = OperatingPoint::new(rng.gen_range(0.0..=1.0), c).unwrap();
        worst = worst.max(agreement(
            oneshot_rdc(&m, &p).map(|s| s.rate.get()),
            scalar_lp_oracle_rdc(&m, &p).map(|b| b.get()),
        ));
    }
    outcome(worst <= 1e-9, format!("max |closed form - scalar LP| = {worst:.2e} over 500 tuples (tol 1e-9)"))
}

fn c2_oneshot_drc_vs_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst, mut infeasible) = (0.0f64, 0);
    for _ in 0..500 {
        let m = random_model(&mut rng);
        let c = rng.gen_range(binary_entropy(m.q_s1()).get()..=1.0);
        let r = rng.gen_range(0.0..=binary_entropy(m.q_x()).get());
        let closed = oneshot_drc(&m, r, c).map(|s| s.distortion.get());
        infeasible += closed.is_err() as usize;
        worst = worst.max(agreement(closed, scalar_lp_oracle_drc(&m, r, c).map(|p| p.get())));
    }
    outcome(
        worst <= 1e-9,
        format!("max |closed form - scalar LP| = {worst:.2e} over 500 tuples, {infeasible} jointly rate-insufficient (tol 1e-9)"),
    )
}

fn c3_oneshot_endpoints() -> Outcome {
    let m = model(0.3, 0.2);
    let at = |d: f64| oneshot_rdc(&m, &OperatingPoint::new(d, 0.8).unwrap()).unwrap().rate.get();
    let r0 = at(0.0);
    let plateau = at(0.5);
    let breakpoint = rdc_breakpoint(&m, 0.8).unwrap().get();
    // mpmath: H_b(0.3); the plateau H_b(0.3)(H_b(0.62) - 0.8)/(H_b(0.62) - H_b(0.2));
    // and the breakpoint 0.3 (1 - a*).
    let (e0, ep, eb) = (0.8812908992306926, 0.5898889466359913, 0.0991960609768269);
    let ok = (r0 - e0).abs() <= 1e-6 && (plateau - ep).abs() <= 1e-6 && (breakpoint - eb).abs() <= 1e-6;
    outcome(
        ok,
        format!("R(0) = {r0:.9}, plateau = {plateau:.9}, breakpoint D = {breakpoint:.9} (tol 1e-6)"),
    )
}

fn c4_asymptotic_below_oneshot() -> Outcome {
    let m = model(0.3, 0.2);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..=100 {
        let p = OperatingPoint::new(i as f64 / 100.0, 0.9).unwrap();
        let gap = asymptotic_rdc(&m, &p).unwrap().get() - oneshot_rdc(&m, &p).unwrap().rate.get();
        worst = worst.max(gap);
    }
    outcome(worst <= 1e-12, format!("max (asymptotic - one-shot) = {worst:.2e} over 101 D samples (tol 1e-12)"))
}

fn c5_four_map() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut monotone, mut worst_final) = (true, 0.0f64);
    for _ in 0..20 {
        let m = random_model(&mut rng);
        let c = rng.gen_range(binary_entropy(m.q_s1()).get()..=1.0);
        let p = OperatingPoint::new(rng.gen_range(0.0..=1.0), c).unwrap();
        let exact = oneshot_rdc(&m, &p).unwrap().rate.get();
        let gaps: Vec<f64> = [11, 101, 1001]
            .iter()
            .map(|&res| {
                let g = GridSpec::new(res, 0).unwrap();
                four_map_enumeration_oracle(&m, &p, g).unwrap().get() - exact
            })
            .collect();
        monotone &= gaps[0] >= -1e-12 && gaps.windows(2).all(|w| w[1] <= w[0] && w[1] >= -1e-12);
        worst_final = worst_final.max(gaps[2]);
    }
    outcome(
        monotone && worst_final <= 2e-3,
        format!("gaps nonincreasing 11 -> 101 -> 1001: {monotone}; max gap at 1001 = {worst_final:.2e} (tol 2e-3)"),
    )
}

fn c6_dc_region() -> Outcome {
    let channel = RepresentationChannel::new(vec![0.5, 0.5], vec![0.2, 0.8]).unwrap();
    let q_s1 = Probability::new(0.05).unwrap();
    let lo = dc_feasibility_threshold(&channel, q_s1).unwrap().get();
    let cs: Vec<f64> = (0..21)
        .map(|i| if i == 20 { 1.0 } else { lo + (1.0 - lo) * i as f64 / 20.0 })
        .collect();
    let grid = GridSpec::new(201, 0).unwrap();
    let (mut solvers, mut oracle) = (0.0f64, 0.0f64);
    let mut d = Vec::new();
    for &c in &cs {
        let pt = dc_lower_boundary(&channel, q_s1, c).unwrap();
        solvers = solvers.max((pt.distortion.get() - pt.simplex_distortion).abs());
        oracle = oracle.max((dc_grid_oracle(&channel, q_s1, c, grid).unwrap().get() - pt.distortion.get()).abs());
        d.push(pt.distortion.get());
    }
    let rising = d.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let second = d.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).fold(f64::INFINITY, f64::min);
    let end = (d[20] - 0.2).abs();
    let checks = [
        solvers <= 1e-9,
        oracle <= 1e-2,
        rising <= 0.0,
        second >= -1e-8,
        end <= 1e-9,
    ];
    outcome(
        checks.iter().all(|&b| b),
        format!(
            "simplex vs greedy {solvers:.2e} (1e-9) {}; vs grid {oracle:.2e} (1e-2) {}; max step {rising:.2e} (<= 0) {}; \
             min second difference {second:.2e} (>= -1e-8) {}; |D(1) - 0.2| = {end:.1e} (1e-9) {}",
            mark(checks[0]),
            mark(checks[1]),
            mark(checks[2]),
            mark(checks[3]),
            mark(checks[4]),
        ),
    )
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAILED"
    }
}

fn c7_surrogate() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let q = Probability::new(rng.gen_range(0.0..=1.0)).unwrap();
        let mut slice = || {
            let e: [f64; 4] = std::array::from_fn(|_| -(1.0 - rng.gen::<f64>()).ln());
            let s: f64 = e.iter().sum();
            e.map(|v| v / s)
        };
        let (a, b) = (slice(), slice());
        let pmf = JointDecoderPMF::from_free(&[a[0], a[1], a[3], b[0], b[1], b[3]]).unwrap();
        worst = worst.max(i_lb(q, &pmf).get() - mutual_information_exact(q, &pmf).get());
    }
    outcome(worst <= 1e-12, format!("max (I_LB - I) = {worst:.2e} over 10^4 decoders (margin >= -1e-12)"))
}

fn c8_universal() -> Outcome {
    let m = model(0.2, 0.05);
    let grid = GridSpec::new(8, 0).unwrap();
    let (mut order, mut agree, mut residual) = (f64::NEG_INFINITY, 0.0f64, 0.0f64);
    for r in [0.05, 0.1, 0.2] {
        let lb = rate_penalty_lower(&m, r).unwrap();
        let ub = rate_penalty_upper(&m, r).unwrap();
        let plb = projected_gradient_oracle(&m, r, PgProblem::Lb, grid).unwrap();
        let pub_ = projected_gradient_oracle(&m, r, PgProblem::Ub, grid).unwrap();
        order = order.max(lb.rate.get() - ub.rate.get());
        agree = agree
            .max((lb.rate.get() - plb.value.get()).abs())
            .max((ub.rate.get() - pub_.value.get()).abs());
        residual = residual
            .max(lb.max_residual)
            .max(ub.max_residual)
            .max(plb.residual)
            .max(pub_.residual);
    }
    outcome(
        order <= 1e-8 && agree <= 1e-4 && residual <= 1e-9,
        format!(
            "max (lower - upper) = {order:.2e} (1e-8); Frank-Wolfe vs projected gradient {agree:.2e} (1e-4); \
             residuals {residual:.2e} (1e-9)"
        ),
    )
}

fn c9_boundary() -> Outcome {
    let m = model(0.2, 0.05);
    let theta = theta_boundary(&m, 0.1).unwrap();
    let res = theta.residuals(&m, 0.1).unwrap();
    let (c0, c_min) = (theta.c0.get(), theta.c_min.get());
    let worst = res[0].abs().max(res[1].abs());
    outcome(
        (c0 - 0.1549).abs() <= 1e-3 && (c_min - 0.7002).abs() <= 1e-3 && worst <= 1e-10,
        format!("c0 = {c0:.6}, c_min = {c_min:.6} (+-1e-3); equation residuals {worst:.2e} (1e-10)"),
    )
}

fn c10_entropy_kernel() -> Outcome {
    let round_trip = (0..1000)
        .map(|i| {
            let h = i as f64 / 999.0;
            (binary_entropy(inverse_binary_entropy(h).unwrap()).get() - h).abs()
        })
        .fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut lemma, mut identity) = (f64::NEG_INFINITY, 0.0f64);
    for _ in 0..10_000 {
        let m = model(rng.gen_range(0.0..=0.5), rng.gen_range(0.0..=0.5));
        let (qx, qs) = (m.q_x().get(), m.q_s1().get());
        let mm = task_prior_m(&m);
        lemma = lemma.max(binary_entropy(m.q_s1()).get() - binary_entropy(mm).get());
        identity = identity.max(((mm.get() - 0.5).abs() - 2.0 * (qx - 0.5).abs() * (qs - 0.5).abs()).abs());
    }
    outcome(
        round_trip <= 1e-10 && lemma <= 0.0 && identity <= 1e-15,
        format!(
            "round trip {round_trip:.2e} (1e-10); max (H(q_s1) - H(m)) = {lemma:.2e} (<= 0); \
             |m - 1/2| identity {identity:.2e} (1e-15)"
        ),
    )
}

fn c11_determinism() -> Outcome {
    let dir = TempDir::new().unwrap();
    let run = |args: &[&str], out: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_rdc"))
            .args(args)
            .arg("--output")
            .arg(dir.path().join(out))
            .env_remove("RDC_OUTPUT_DIR")
            .status()
            .unwrap();
        assert!(status.success(), "{args:?}");
    };
    let rdc = ["rdc-curve", "--q-x", "0.3", "--q-s1", "0.2", "--c", "0.8", "--samples", "101", "--format", "json"];
    let uni = ["universal", "--q-x", "0.2", "--q-s1", "0.05", "--r", "0.1", "--c-samples", "41"];
    run(&rdc, "rdc1.json");
    run(&rdc, "rdc2.json");
    run(&uni, "u1.csv");
    run(&uni, "u2.csv");
    let read = |name: &str| fs::read(dir.path().join(name)).unwrap();
    let same_rdc = read("rdc1.json") == read("rdc2.json");
    let same_uni = read("u1_lb.csv") == read("u2_lb.csv") && read("u1_ub.csv") == read("u2_ub.csv");
    outcome(
        same_rdc && same_uni,
        format!("rdc-curve identical: {same_rdc}; universal _lb/_ub identical: {same_uni}"),
    )
}

#[test]
fn acceptance_criteria() {
    type Criterion = (&'static str, f64, fn() -> Outcome);
    let criteria: [Criterion; 11] = [
        ("1 one-shot RDC vs scalar-LP oracle", 1.0, c1_oneshot_rdc_vs_oracle),
        ("2 one-shot DRC vs scalar-LP oracle", 1.0, c2_oneshot_drc_vs_oracle),
        ("3 one-shot RDC endpoints", 1.0, c3_oneshot_endpoints),
        ("4 asymptotic below one-shot", 1.0, c4_asymptotic_below_oneshot),
        ("5 four-map enumeration convergence", 30.0, c5_four_map),
        ("6 DC-region LP, two-symbol channel", 10.0, c6_dc_region),
        ("7 surrogate inequality", 5.0, c7_surrogate),
        ("8 universality bounds", 60.0, c8_universal),
        ("9 boundary parameters", 1.0, c9_boundary),
        ("10 entropy kernel", 1.0, c10_entropy_kernel),
        ("11 determinism", f64::INFINITY, c11_determinism),
    ];
    let mut failed = Vec::new();
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        let in_time = secs < budget;
        let pass = o.passed && in_time;
        let limit = if budget.is_finite() { format!(" < {budget} s") } else { String::new() };
        println!(
            "{} criterion {name}: {} [{secs:.3} s{limit}{}]",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            if in_time { "" } else { " OVER BUDGET" }
        );
        if !pass {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
