//! Acceptance suite: one PASS/FAIL line per criterion, then a single
//! assertion that every criterion passed.
//!
//! Run with `cargo test -p smalldev --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use smalldev::berry::f1;
use smalldev::combine::{default_s_grid, feige_bound, g_sweep, BoundReport, Variant, D_BRACKET};
use smalldev::model::M3Mode;
use smalldev::momentsdp::{bound_problem, closed_form_f2, f3, moment_bound, MomentProblem, MomentSet};
use smalldev::numerics::std_normal_cdf;
use smalldev::oracle::{atomic_primal_search, verify_bounds, verify_moment_formulas, Claim, MomentSpec, PrimalStatus};

const XI: f64 = 0.2;

/// Φ(x) to 20 significant digits (mpmath, 40-digit working precision).
#[allow(clippy::excessive_precision)]
const PHI_TABLE: [(f64, f64); 50] = [
    (-9.0, 0.00000000000000000011285884059538406477),
    (-8.590909090909092, 0.0000000000000000043141941953441067636),
    (-8.181818181818182, 0.00000000000000013979635145555351756),
    (-7.7727272727272725, 0.0000000000000038407005915620901753),
    (-7.363636363636363, 0.000000000000089483398508644261402),
    (-6.954545454545455, 0.0000000000017685029364612075167),
    (-6.545454545454545, 0.000000000029657348762199468378),
    (-6.136363636363637, 0.00000000042215886093401207575),
    (-5.727272727272727, 0.0000000051029013445378587842),
    (-5.318181818181818, 0.000000052404654138846536902),
    (-4.909090909090909, 0.00000045749778888448207866),
    (-4.5, 0.0000033976731247300604017),
    (-4.090909090909091, 0.000021484277525495127143),
    (-3.6818181818181817, 0.00011578827128094667001),
    (-3.2727272727272725, 0.00053257600128616455701),
    (-2.8636363636363633, 0.0020940425067922802696),
    (-2.8284271247461903, 0.0023388674905236315062),
    (-2.454545454545454, 0.0070531414736897805383),
    (-2.045454545454546, 0.02040503305830614593),
    (-1.6363636363636367, 0.050881752475628798811),
    (-1.2272727272727275, 0.10986005128512090421),
    (-0.8181818181818183, 0.20662668774682015591),
    (-0.4090909090909083, 0.34123647374974113083),
    (0.0, 0.5),
    (0.1298044670379876, 0.55163943568288967851),
    (0.13, 0.55171678665456114066),
    (0.4090909090909083, 0.65876352625025886917),
    (0.8181818181818183, 0.79337331225317984409),
    (1.0, 0.84134474606854294859),
    (1.2272727272727266, 0.89013994871487892893),
    (1.6363636363636367, 0.94911824752437120119),
    (2.045454545454545, 0.97959496694169381033),
    (2.454545454545455, 0.99294685852631023689),
    (2.8284271247461903, 0.99766113250947636849),
    (2.8636363636363633, 0.99790595749320771973),
    (3.2727272727272734, 0.99946742399871383712),
    (3.6818181818181817, 0.99988421172871905333),
    (4.090909090909092, 0.99997851572247450496),
    (4.5, 0.99999660232687526994),
    (4.909090909090908, 0.99999954250221111552),
    (5.318181818181818, 0.99999994759534586115),
    (5.727272727272727, 0.99999999489709865546),
    (6.136363636363637, 0.99999999957784113907),
    (6.545454545454545, 0.99999999997034265124),
    (6.954545454545455, 0.99999999999823149706),
    (7.363636363636363, 0.9999999999999105166),
    (7.772727272727273, 0.9999999999999961593),
    (8.181818181818183, 0.9999999999999998602),
    (8.59090909090909, 0.99999999999999999569),
    (9.0, 0.99999999999999999989),
];

struct Outcome {
    id: u32,
    name: &'static str,
    passed: bool,
    detail: String,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn theorem_criterion(
    id: u32,
    name: &'static str,
    variant: Variant,
    range: (f64, f64),
    d_expected: f64,
    budget: Duration,
) -> (Outcome, Option<BoundReport<f64>>) {
    let (report, elapsed) = timed(|| feige_bound(variant, XI));
    let report = match report {
        Ok(r) => r,
        Err(e) => return (Outcome { id, name, passed: false, detail: format!("error: {e}") }, None),
    };
    let mut passed = report.bound_value >= range.0
        && report.bound_value <= range.1
        && (report.d_star - d_expected).abs() <= 0.02
        && !report.no_crossing
        && elapsed < budget;
    if variant.is_certified() {
        passed &= !report.moment_certificates.is_empty()
            && report.moment_certificates.iter().all(|c| c.verify(1000, 1).passed());
    }
    let detail = format!(
        "bound {:.4} (raw {:.6}) in [{}, {}], D* {:.4} vs {d_expected} ± 0.02, {} certificate(s), {:.2?} < {:?}",
        report.bound_value,
        report.raw_value,
        range.0,
        range.1,
        report.d_star,
        report.moment_certificates.len(),
        elapsed,
        budget
    );
    (Outcome { id, name, passed, detail }, Some(report))
}

fn criterion_4() -> (Outcome, Option<BoundReport<f64>>) {
    let (mut out, report) = theorem_criterion(
        4,
        "refined MP(1,2,3,4) and B-E",
        Variant::Thm44Refined,
        (0.1798, 0.1810),
        2.938,
        Duration::from_secs(60),
    );
    let (sweep, elapsed) = timed(|| g_sweep(XI, &default_s_grid()));
    match sweep {
        Ok(points) => {
            let argmin = points.iter().min_by(|a, b| a.g.partial_cmp(&b.g).unwrap()).unwrap();
            let at_one = argmin.s == 1.0;
            out.passed &= at_one && elapsed < Duration::from_secs(60);
            out.detail += &format!("; g-sweep argmin s = {} (g = {:.6}), sweep {:.2?}", argmin.s, argmin.g, elapsed);
        }
        Err(e) => {
            out.passed = false;
            out.detail += &format!("; sweep error: {e}");
        }
    }
    (out, report)
}

fn criterion_5() -> Outcome {
    let v = f3(XI, 1e6).map(|f| (-XI).exp() * f);
    match v {
        Ok(v) => Outcome { id: 5, name: "1/8 limit", passed: v >= 0.125, detail: format!("e^-0.2 f3(0.2, 1e6) = {v:.6} >= 0.125") },
        Err(e) => Outcome { id: 5, name: "1/8 limit", passed: false, detail: format!("error: {e}") },
    }
}

fn criterion_6() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut err = None;
    for d in [1.0, 2.0, 2.374, 3.0, 5.0, 10.0] {
        match (closed_form_f2(XI, d), moment_bound(XI, d, MomentSet::Mp124, M3Mode::Basic)) {
            (Ok(cf), Ok(b)) => worst = worst.max((cf - (1.0 - b.opt_upper)).abs()),
            (Err(e), _) | (_, Err(e)) => err = Some(e),
        }
    }
    Outcome {
        id: 6,
        name: "closed-form / SDP agreement",
        passed: err.is_none() && worst <= 1e-5,
        detail: match err {
            Some(e) => format!("error: {e}"),
            None => format!("max |F2 - (1 - opt)| = {worst:.2e} <= 1e-5"),
        },
    }
}

fn criterion_7() -> Outcome {
    let cases = [
        (2.374, MomentSet::Mp124, M3Mode::Basic),
        (2.464, MomentSet::Mp1234, M3Mode::Basic),
        (2.938, MomentSet::Mp1234, M3Mode::Refined { s: 1.0 }),
    ];
    let mut passed = true;
    let mut parts = vec![];
    for (d, set, mode) in cases {
        let problem = MomentProblem::new(XI, d, set, mode).unwrap();
        let upper = bound_problem(&problem).unwrap().opt_upper;
        let primal = atomic_primal_search(&MomentSpec::from(&problem), 8, 1);
        let gap = upper - primal.value;
        passed &= primal.status == PrimalStatus::Found && primal.constraint_violation <= 1e-9 && (0.0..=1e-4).contains(&gap);
        parts.push(format!("D={d}: gap {gap:.1e}"));
    }
    Outcome { id: 7, name: "duality bracket", passed, detail: parts.join(", ") }
}

fn criterion_8(reports: &[BoundReport<f64>]) -> Outcome {
    let mut certs: Vec<_> = reports.iter().flat_map(|r| r.moment_certificates.iter().cloned()).collect();
    for i in 0..20 {
        let d = 0.5 + 0.5 * i as f64;
        for (set, mode) in [
            (MomentSet::Mp124, M3Mode::Basic),
            (MomentSet::Mp1234, M3Mode::Basic),
            (MomentSet::Mp1234, M3Mode::Refined { s: 1.0 }),
        ] {
            certs.push(moment_bound(XI, d, set, mode).unwrap().certificate);
        }
    }
    let failures: Vec<_> = certs
        .iter()
        .enumerate()
        .map(|(i, c)| c.verify(1000, i as u64))
        .filter(|v| !v.passed())
        .collect();
    Outcome {
        id: 8,
        name: "certificate soundness",
        passed: failures.is_empty(),
        detail: format!("{} certificates re-verified, {} failed", certs.len(), failures.len()),
    }
}

fn criterion_9(reports: &[BoundReport<f64>]) -> Outcome {
    let claims: Vec<Claim> = reports
        .iter()
        .map(|r| Claim { name: r.name.clone(), omega: XI.exp() * r.bound_value })
        .collect();
    let report = verify_bounds(42, 1000, 14, XI, &claims).unwrap();
    let formulas = verify_moment_formulas(42, 500).unwrap();
    Outcome {
        id: 9,
        name: "oracle verification",
        passed: claims.len() == 4 && report.passed() && formulas.passed(1e-10),
        detail: format!(
            "{} claims on {} instances: {} violations (max gap {:.4}); moment formulas rel. error {:.1e}",
            claims.len(),
            report.instances_checked,
            report.violations.len(),
            report.max_gap,
            formulas.max_rel_error
        ),
    }
}

fn criterion_10() -> Outcome {
    let slack = 1e-8;
    let grid: Vec<f64> = (0..20).map(|i| 0.3 + 0.5 * i as f64).collect();
    let opt = |d: f64, set, mode| moment_bound(XI, d, set, mode).unwrap().opt_upper;
    let mut inclusion = true;
    let mut growth = true;
    let mut prev: Option<[f64; 3]> = None;
    for &d in &grid {
        let row = [
            opt(d, MomentSet::Mp124, M3Mode::Basic),
            opt(d, MomentSet::Mp1234, M3Mode::Basic),
            opt(d, MomentSet::Mp1234, M3Mode::Refined { s: 1.0 }),
        ];
        inclusion &= row[0] >= row[1] - slack && row[1] >= row[2] - slack;
        if let Some(p) = prev {
            growth &= row.iter().zip(&p).all(|(now, before)| *now >= *before - slack);
        }
        prev = Some(row);
    }
    let bracket: Vec<f64> = (0..20).map(|i| D_BRACKET.0 + (D_BRACKET.1 - D_BRACKET.0) * i as f64 / 19.0).collect();
    let f1_vals: Vec<f64> = bracket.iter().map(|&d| f1(XI, d).unwrap()).collect();
    let f1_monotone = f1_vals.windows(2).all(|w| w[1] >= w[0] - slack);
    let f3_vals: Vec<f64> = bracket.iter().map(|&d| f3(XI, d).unwrap()).collect();
    let f3_monotone = f3_vals.windows(2).all(|w| w[1] <= w[0] + slack);
    Outcome {
        id: 10,
        name: "monotonicity suites",
        passed: inclusion && growth && f1_monotone && f3_monotone,
        detail: format!(
            "constraint inclusion {inclusion}, opt nondecreasing in D {growth}, f1 nondecreasing {f1_monotone}, f3 nonincreasing {f3_monotone}"
        ),
    }
}

fn criterion_11() -> Outcome {
    let worst = PHI_TABLE
        .iter()
        .map(|&(x, expected)| (std_normal_cdf(x).unwrap() - expected).abs())
        .fold(0.0, f64::max);
    Outcome {
        id: 11,
        name: "normal CDF accuracy",
        passed: worst <= 1e-10,
        detail: format!("max |Phi - oracle| = {worst:.2e} over {} points", PHI_TABLE.len()),
    }
}

#[test]
fn acceptance() {
    let mut outcomes = vec![];
    let mut reports = vec![];
    for (out, report) in [
        theorem_criterion(1, "approximate MP(1,2,4) and B-E", Variant::ThmA1F3, (0.1536, 0.1545), 2.367, Duration::from_secs(1)),
        theorem_criterion(2, "MP(1,2,4) and B-E", Variant::Thm42Mp124, (0.1541, 0.1550), 2.374, Duration::from_secs(10)),
        theorem_criterion(3, "MP(1,2,3,4) and B-E", Variant::Thm43Mp1234, (0.1587, 0.1600), 2.464, Duration::from_secs(10)),
        criterion_4(),
    ] {
        outcomes.push(out);
        reports.extend(report);
    }
    outcomes.push(criterion_5());
    outcomes.push(criterion_6());
    outcomes.push(criterion_7());
    outcomes.push(criterion_8(&reports));
    outcomes.push(criterion_9(&reports));
    outcomes.push(criterion_10());
    outcomes.push(criterion_11());

    println!();
    for o in &outcomes {
        println!("[{}] {:>2}. {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.id, o.name, o.detail);
    }
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    println!("{} of {} criteria passed", outcomes.len() - failed.len(), outcomes.len());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
