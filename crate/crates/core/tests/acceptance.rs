//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria that fail for statistical or mathematical reasons are reported,
//! not hidden; set `ACCEPTANCE_STRICT=1` to turn any FAIL into a nonzero exit.

use std::f64::consts::PI;
use std::time::Instant;

use lfmodel::analytic::{interaction_density, so_even_density, so_odd_density, DensityModel};
use lfmodel::ellcurve::{
    ap_good, ap_naive, dirichlet_coefficients, local_data, root_number, Curve, FamilyKind, FamilySpec, LData,
    ReductionType,
};
use lfmodel::ensembles::{oracle_expectation, sample_ensemble, weyl_log_density, EnsembleSpec, McmcParams};
use lfmodel::experiments::{self, ExperimentConfig, RunReport};
use lfmodel::leval::{argument_count, find_zeros, functional_equation_residual, numeric_sign, prepare, EvalParams};
use lfmodel::spectra::moment_estimator;
use lfmodel::CharPoly;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(text).unwrap().resolve(None, None).unwrap()
}

fn measure_reductions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let n = 1 + i % 12;
        let angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..PI)).collect();
        let pairs = [
            (EnsembleSpec::interaction(2 * n, 0).unwrap(), EnsembleSpec::so_even(2 * n).unwrap()),
            (EnsembleSpec::interaction(2 * n + 1, 1).unwrap(), EnsembleSpec::so_odd(2 * n + 1).unwrap()),
        ];
        for (a, b) in pairs {
            let x = weyl_log_density(&a, &angles).unwrap();
            let y = weyl_log_density(&b, &angles).unwrap();
            worst = worst.max((x - y).abs());
        }
    }
    outcome(worst <= 1e-12, format!("max |Δ log density| = {worst:.1e}"))
}

fn analytic_identity() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..500 {
        let t = 0.01 + (5.0 - 0.01) * i as f64 / 499.0;
        let y = 2.0 * PI * t;
        worst = worst.max((interaction_density(1, t).unwrap() - (1.0 - y.sin() / y)).abs());
        worst = worst.max((DensityModel::Interaction(0).eval(t) - (1.0 + y.sin() / y)).abs());
        worst = worst.max((so_odd_density(t) - (1.0 - y.sin() / y)).abs());
        worst = worst.max((so_even_density(t) - (1.0 + y.sin() / y)).abs());
    }
    outcome(worst <= 1e-10, format!("max deviation {worst:.1e}"))
}

fn interaction_figure() -> Outcome {
    let mut ok = true;
    let mut masses = Vec::new();
    let mut worst = 0.0f64;
    for r in 1..=5 {
        let c = config(&format!(
            "experiment = \"ensemble_density\"\nseed = {}\n[ensemble]\nkind = \"interaction\"\ndimension = {}\nr = {r}\nsamples = 10000\n",
            100 + r,
            40 + r
        ));
        let report = experiments::run(&c).unwrap();
        let d = &report.discrepancies[0];
        worst = worst.max(d.max);
        ok &= d.max <= 5.0;
        masses.push(report.densities[0].table.leading_mass(10).0);
    }
    let monotone = masses.windows(2).all(|w| w[1] < w[0]);
    let shown: Vec<String> = masses.iter().map(|m| format!("{m:.4}")).collect();
    outcome(
        ok && monotone,
        format!("worst bin {worst:.2} se; near-origin mass r=1..5: {}", shown.join(" > ")),
    )
}

fn independent_figure() -> Outcome {
    let first_bin = |r: usize| {
        let c = config(&format!(
            "experiment = \"ensemble_density\"\nseed = {}\n[ensemble]\nkind = \"independent\"\ndimension = 40\nr = {r}\nsamples = 10000\n",
            200 + r
        ));
        let report = experiments::run(&c).unwrap();
        let t = &report.densities[0].table;
        (t.heights[0], t.stderr[0])
    };
    let (even, se_even) = first_bin(2);
    let (odd, se_odd) = first_bin(1);
    outcome(
        (even - 2.0).abs() <= 0.1 && odd <= 0.05,
        format!("r=2 first bin {even:.3} ± {se_even:.3}; r=1 first bin {odd:.4} ± {se_odd:.4}"),
    )
}

fn quadrature_oracles() -> Outcome {
    let check = |spec: EnsembleSpec, derivative: usize, seed: u64| {
        let oracle = oracle_expectation(&spec, |a| 2.0 - 2.0 * a[0].cos()).unwrap();
        let mcmc = McmcParams::for_spec(&spec, seed);
        let values: Vec<f64> = sample_ensemble(&spec, &mcmc, 100_000, 8)
            .unwrap()
            .into_iter()
            .map(|s| CharPoly::new(s).critical_derivative(derivative).abs())
            .collect();
        let (mean, se) = moment_estimator(&values, 1).unwrap();
        (oracle, mean, se)
    };
    let (o2, m2, s2) = check(EnsembleSpec::so_even(2).unwrap(), 0, 5);
    let (o3, m3, s3) = check(EnsembleSpec::so_odd(3).unwrap(), 1, 6);
    let ok = (o2 - 2.0).abs() < 1e-9 && (o3 - 3.0).abs() < 1e-9 && (m2 - o2).abs() <= 3.0 * s2 && (m3 - o3).abs() <= 3.0 * s3;
    outcome(ok, format!("SO(2): {m2:.4} ± {s2:.4} vs {o2:.4}; SO(3): {m3:.4} ± {s3:.4} vs {o3:.4}"))
}

fn moment_exponents() -> Outcome {
    let fit = |model: &str| {
        let c = config(&format!(
            "experiment = \"ensemble_moments\"\nseed = 17\n[moments]\nmodel = \"{model}\"\nladder = [10, 20, 30, 40, 50, 60]\nsamples = 10000\n"
        ));
        experiments::run(&c).unwrap().moments[0].fit.clone().expect("positive means")
    };
    let odd = fit("so_odd");
    let even = fit("forced_even");
    outcome(
        (odd.exponent - 1.0).abs() <= 0.3 && even.exponent.abs() <= 0.3,
        format!(
            "odd {:.3} [{:.3}, {:.3}], forced even {:.3} [{:.3}, {:.3}]",
            odd.exponent, odd.ci_low, odd.ci_high, even.exponent, even.ci_low, even.ci_high
        ),
    )
}

fn random_curve(rng: &mut ChaCha8Rng, bound: i64) -> Curve {
    loop {
        if let Ok(c) = Curve::new(rng.random_range(-bound..=bound), rng.random_range(-bound..=bound)) {
            return c;
        }
    }
}

fn arithmetic() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let primes: Vec<u64> = (2..=101u64).filter(|&p| (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)).collect();
    let mut notes = Vec::new();
    let mut ok = true;

    let mut hasse = 0;
    while hasse < 1000 {
        let c = random_curve(&mut rng, 10_000);
        let p = primes[rng.random_range(0..primes.len())];
        let ld = local_data(&c, p);
        if ld.reduction != ReductionType::Good {
            continue;
        }
        hasse += 1;
        if (ld.ap as f64).powi(2) > 4.0 * p as f64 {
            ok = false;
            notes.push(format!("Hasse violated for {c} at {p}"));
        }
    }

    let mut dual_mismatch = 0;
    for _ in 0..50 {
        let c = random_curve(&mut rng, 1000);
        for &p in primes.iter().filter(|&&p| p >= 5) {
            if let Ok(a) = ap_good(&c, p) {
                if ap_naive(&c, p).unwrap() != a {
                    dual_mismatch += 1;
                }
            }
        }
    }
    ok &= dual_mismatch == 0;

    let mut mult_fail = 0;
    let mut pairs = 0;
    let mut coefficients = Vec::new();
    for _ in 0..10 {
        let c = random_curve(&mut rng, 1000);
        coefficients.push(dirichlet_coefficients(&c, 10_000));
    }
    while pairs < 1000 {
        let a = &coefficients[pairs % coefficients.len()];
        let m = rng.random_range(2..100usize);
        let n = rng.random_range(2..100usize);
        if gcd(m, n) != 1 {
            continue;
        }
        pairs += 1;
        if a[m * n] != a[m] * a[n] {
            mult_fail += 1;
        }
    }
    ok &= mult_fail == 0;

    let params = EvalParams::default();
    let curves = FamilySpec::new(FamilyKind::F1, 1e6).unwrap().semistable().sample(100, 3).unwrap();
    let rows: Vec<(f64, bool, Option<bool>)> = {
        use rayon::prelude::*;
        curves
            .par_iter()
            .map(|&c| {
                let w = root_number(&c).unwrap();
                let mut l = LData::new(c, 1);
                let height = 5.0 * 2.0 * PI / l.refined_conductor;
                prepare(&mut l, height.min(30.0).max(2.0), &params);
                let residual = functional_equation_residual(&l, Complex64::new(0.75, 0.5), &params).unwrap();
                let sign_ok = numeric_sign(&l, &params).ok() == Some(w);
                let count_ok = if height <= 30.0 {
                    find_zeros(&l, height, &params).ok().map(|z| {
                        let count = argument_count(&l, height, &params).unwrap();
                        (count - z.ordinates.len() as f64).abs() < 0.25
                    })
                } else {
                    None
                };
                (residual, sign_ok, count_ok)
            })
            .collect()
    };
    let worst_residual = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let sign_agree = rows.iter().filter(|r| r.1).count();
    let accepted = rows.iter().filter(|r| r.2.is_some()).count();
    let counted = rows.iter().filter(|r| r.2 == Some(true)).count();
    ok &= worst_residual <= 1e-6 && sign_agree == rows.len() && counted == accepted;
    notes.push(format!(
        "Hasse {hasse} pairs, dual mismatches {dual_mismatch}, multiplicativity failures {mult_fail}/{pairs}, \
         FE residual max {worst_residual:.1e} on {}, signs agree {sign_agree}/{}, argument counts exact {counted}/{accepted}",
        rows.len(),
        rows.len()
    ));
    outcome(ok, notes.join("; "))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn family_contrast() -> Outcome {
    let f2 = experiments::run(&config(
        "experiment = \"ec_density\"\nseed = 1\n[family]\nkind = \"f2\"\nx = 2e8\nmax_curves = 10000\n",
    ))
    .unwrap();
    let f1 = experiments::run(&config(
        "experiment = \"ec_density\"\nseed = 1\n[family]\nkind = \"f1\"\nx = 2e8\nmax_curves = 560\n",
    ))
    .unwrap();
    let r2 = f2.family("f2_minus").unwrap();
    let r1 = f1.family("f1_minus").unwrap();
    let (m2, s2) = r2.leading_mass.unwrap_or((f64::NAN, f64::NAN));
    let (m1, s1) = r1.leading_mass.unwrap_or((f64::NAN, f64::NAN));
    let mean2 = r2.mean_central_value.unwrap_or(f64::NAN);
    let mean1 = r1.mean_central_value.unwrap_or(f64::NAN);
    let enough = r1.moment_count >= 200 && r2.moment_count >= 200;
    let a = mean2 < mean1;
    let pooled = s1.hypot(s2);
    let b = m1 - m2 >= 2.0 * pooled && pooled > 0.0;
    let orders = |r: &experiments::FamilyRun| {
        r.central_orders.iter().map(|o| format!("{}:{}", o.order, o.count)).collect::<Vec<_>>().join(",")
    };
    outcome(
        enough && a && b,
        format!(
            "X = 2e8; usable F1- {} / F2- {}; (a) mean L'(1/2) F2- {mean2:.3} vs F1- {mean1:.3} [{}]; \
             (b) first-3-bin mass F1- {m1:.4} ± {s1:.4}, F2- {m2:.4} ± {s2:.4} [{}]; \
             central orders F2- {{{}}}, F1- {{{}}}; dropped F2- {:?}, F1- {:?}",
            r1.moment_count,
            r2.moment_count,
            if a { "holds" } else { "fails" },
            if b { "holds" } else { "fails" },
            orders(r2),
            orders(r1),
            r2.dropped,
            r1.dropped
        ),
    )
}

fn outputs(report: &RunReport) -> Vec<(String, Vec<u8>)> {
    let dir = tempfile::tempdir().unwrap();
    let files = report.write(dir.path()).unwrap();
    files
        .into_iter()
        .filter(|p| !p.ends_with("timing.json"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

fn determinism() -> Outcome {
    let configs = [
        config("experiment = \"ensemble_density\"\nseed = 99\n[ensemble]\nkind = \"interaction\"\ndimension = 23\nr = 3\nsamples = 2000\n"),
        config("experiment = \"ec_density\"\nseed = 4\n[family]\nkind = \"f2\"\nx = 1e6\nmax_curves = 80\nsigns = [\"minus\", \"plus\"]\n"),
    ];
    let mut identical = true;
    let mut files = 0;
    for c in &configs {
        let runs: Vec<Vec<(String, Vec<u8>)>> = [1, 4]
            .into_iter()
            .map(|threads| {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
                pool.install(|| outputs(&experiments::run(c).unwrap()))
            })
            .collect();
        files += runs[0].len();
        identical &= runs[0] == runs[1];
    }
    outcome(identical, format!("{files} output files compared across 1 and 4 threads"))
}

fn main() {
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let filter: Option<Vec<usize>> = std::env::args()
        .skip(1)
        .find(|a| !a.starts_with('-'))
        .map(|a| a.split(',').filter_map(|s| s.parse().ok()).collect());
    let criteria: [(usize, &str, fn() -> Outcome); 9] = [
        (1, "measure reductions", measure_reductions),
        (2, "analytic identity", analytic_identity),
        (3, "interaction model densities", interaction_figure),
        (4, "independent model densities", independent_figure),
        (5, "quadrature oracles", quadrature_oracles),
        (6, "moment exponents", moment_exponents),
        (7, "arithmetic correctness", arithmetic),
        (8, "family contrast", family_contrast),
        (9, "determinism", determinism),
    ];
    let mut failures = 0;
    for (id, name, check) in criteria {
        if filter.as_ref().is_some_and(|f| !f.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let o = check();
        let secs = start.elapsed().as_secs_f64();
        if !o.pass {
            failures += 1;
        }
        println!("{} criterion {id} ({name}, {secs:.1}s): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if strict && failures > 0 {
        std::process::exit(1);
    }
}
