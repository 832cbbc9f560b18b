//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use emfield::evaluators::relative_difference;
use emfield::geometry::{double_gradient_kernel, far_kernel};
use emfield::*;
use emfield_runner::config::RadiiSpec;
use emfield_runner::{load_config, parse_config, run_tasks, RunOptions, Task, TaskStatus};
use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const C: PhysicalConstants = PhysicalConstants::NATURAL;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn gaussian_source(sigma: f64, tau: f64, support_sigmas: f64) -> SourceModel {
    SourceModel::new(
        SpatialEnvelope::gaussian(Vec3::zeros(), sigma).unwrap(),
        TimeProfile::sine_squared(0.0, tau).unwrap(),
        Vec3::z(),
        1.0,
        Domain::ball(Vec3::zeros(), support_sigmas * sigma).unwrap(),
    )
    .unwrap()
}

// Shared grid for criteria 1 and 4: five radii between 16 and 64 envelope widths
// along a skew ray, through a pulse of unit duration.
const EQ_SIGMA: f64 = 0.002;
const EQ_RADII: [f64; 5] = [16.0, 24.0, 32.0, 48.0, 64.0];

fn eq_ray() -> Ray {
    Ray::new(Vec3::zeros(), Vec3::new(0.6, -0.3, 0.74)).unwrap()
}

fn representation_equivalence() -> Outcome {
    let src = gaussian_source(EQ_SIGMA, 1.0, 8.0);
    let leakage = src.boundary_leakage();
    let rule = build_rule(src.domain(), 24).unwrap();
    let ray = eq_ray();
    let mut worst = (0.0f64, 0.0, 0.0);
    for k in EQ_RADII {
        let r = k * EQ_SIGMA;
        // retarded phases 0.1 .. 2.0 pulse durations
        for j in 0..20 {
            let t = r / C.c() + 0.1 * (j + 1) as f64;
            let res = representation_residual(&src, &ObservationPoint::new(ray.at(r), t), &rule, &C).unwrap();
            if res > worst.0 {
                worst = (res, r, t);
            }
        }
    }
    outcome(
        leakage < 1e-13 && worst.0 < 1e-6,
        format!(
            "boundary leakage {leakage:.2e}, max residual {:.2e} (r={:.3}, t={:.3}) over 5x20 grid at order 24",
            worst.0, worst.1, worst.2
        ),
    )
}

fn boundary_term_caveat() -> Outcome {
    let sigma = 0.1;
    let src = SourceModel::new(
        SpatialEnvelope::truncated(Vec3::zeros(), sigma, sigma).unwrap(),
        TimeProfile::sine_squared(0.0, 1.0).unwrap(),
        Vec3::z(),
        1.0,
        Domain::ball(Vec3::zeros(), sigma).unwrap(),
    )
    .unwrap();
    let rule = build_rule(src.domain(), 16).unwrap();
    let ray = Ray::new(Vec3::zeros(), Vec3::new(1.0, 0.2, 0.4)).unwrap();
    let mut max = 0.0f64;
    let mut above = 0;
    let mut total = 0;
    for r in [0.15, 0.2, 0.3, 0.5, 1.0] {
        for u in [0.25, 0.5, 0.75] {
            let res = representation_residual(&src, &ObservationPoint::new(ray.at(r), r + u), &rule, &C).unwrap();
            max = max.max(res);
            total += 1;
            if res > 1e-2 {
                above += 1;
            }
        }
    }
    outcome(
        above > 0,
        format!("cut at 1 sigma: {above}/{total} near-zone points above 1e-2, max residual {max:.2}"),
    )
}

fn oracle_equivalence() -> Outcome {
    let tau = 10.0;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let points: Vec<(Vec3, f64)> = (0..50)
        .map(|_| {
            let z: f64 = rng.gen_range(-1.0..1.0);
            let phi = rng.gen_range(0.0..2.0 * PI);
            let s = (1.0 - z * z).sqrt();
            let r = rng.gen_range(1.0..20.0);
            let u = rng.gen_range(0.1 * tau..1.5 * tau);
            (Vec3::new(s * phi.cos(), s * phi.sin(), z) * r, r / C.c() + u)
        })
        .collect();
    let mut errors = Vec::new();
    for k in 0..4 {
        let sigma = 0.01 / 2f64.powi(k);
        let src = gaussian_source(sigma, tau, 8.0);
        let dipole = DipoleMoment::from_source(&src);
        let rule = build_rule(src.domain(), 16).unwrap();
        let worst = points
            .iter()
            .map(|(x, t)| {
                assert!(x.norm() >= 100.0 * sigma);
                let obs = ObservationPoint::new(*x, *t);
                let a = budko_field(&src, &obs, &rule, &C).unwrap();
                let d = dipole_oracle_field(&dipole, &obs, &C).unwrap();
                relative_difference(&a.total(), &d.total())
            })
            .fold(0.0, f64::max);
        errors.push(worst);
    }
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    outcome(
        errors[0] < 1e-3 && monotone,
        format!(
            "max relative error at sigma = 0.01/2^k: {}",
            errors.iter().map(|e| format!("{e:.1e}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn light_front_causality() -> Outcome {
    let src = gaussian_source(EQ_SIGMA, 1.0, 8.0);
    let rule = build_rule(src.domain(), 24).unwrap();
    let radii: Vec<f64> = EQ_RADII.iter().map(|k| k * EQ_SIGMA).collect();
    let times: Vec<f64> = (0..=220).map(|i| i as f64 * 0.01).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for rep in [Representation::Budko, Representation::Jefimenko] {
        let s = sample_waveforms(&src, rep, &eq_ray(), &radii, &times, &rule, &C, ComponentSelector::Magnitude).unwrap();
        let fc = light_front_check(&s, &src, &C);
        pass &= fc.pass && fc.samples_ahead > 0;
        parts.push(format!(
            "{rep}: max precursor {:.1e} / peak {:.2e} over {} pre-front samples",
            fc.max_precursor, fc.global_peak, fc.samples_ahead
        ));
    }
    outcome(pass, parts.join("; "))
}

fn negative_velocity() -> Outcome {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/negative_velocity.cfg");
    let config = load_config(std::path::Path::new(path)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = run_tasks(
        &config,
        &RunOptions {
            threads: None,
            output_dir: Some(dir.path().to_path_buf()),
        },
    )
    .unwrap();
    let v = out.report.task(Task::Velocity).and_then(|t| t.velocity.clone());
    let fc = out.report.task(Task::Frontcheck).and_then(|t| t.front_check.clone());
    match (v, fc) {
        (Some(v), Some(fc)) => {
            let segments = v.negative_segments.iter().map(|[a, b]| format!("[{a:.1},{b:.1}]")).collect::<Vec<_>>();
            outcome(
                !segments.is_empty() && v.front_check.pass && fc.pass && v.arrivals_behind_front,
                format!(
                    "negative segments {}, min v = {:.2}c, front check {} (both representations {}), arrivals behind front {}",
                    segments.join(" "),
                    v.min_velocity / config.constants.c,
                    v.front_check.pass,
                    fc.pass,
                    v.arrivals_behind_front
                ),
            )
        }
        _ => outcome(false, format!("run incomplete: {:?}", out.report.tasks.iter().map(|t| &t.error).collect::<Vec<_>>())),
    }
}

fn zone_scaling() -> Outcome {
    let text = r#"
tasks = ["scaling"]
[source]
sigma = 0.01
[observation]
direction = [1.0, 0.0, 0.0]
radii = { start = 1.0, stop = 10.0, count = 6 }
[quadrature]
base_order = 16
[analysis]
retarded_phase = 0.25
[output]
formats = ["csv"]
"#;
    let config = parse_config(text).unwrap();
    assert!(matches!(config.observation.radii, RadiiSpec::Geometric { .. }));
    let dir = tempfile::tempdir().unwrap();
    let out = run_tasks(
        &config,
        &RunOptions {
            threads: None,
            output_dir: Some(dir.path().to_path_buf()),
        },
    )
    .unwrap();
    let task = out.report.task(Task::Scaling).unwrap();
    if task.status != Some(TaskStatus::Ok) {
        return outcome(false, task.error.clone().unwrap_or_default());
    }
    let pass = task.scaling.len() == 3 && task.scaling.iter().all(|s| s.within_tolerance);
    let detail = task
        .scaling
        .iter()
        .map(|s| format!("{} {:.4} (expect {} +- {})", s.term, s.exponent, s.expected, s.tolerance))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(pass, format!("{detail} over r = 1..10"))
}

fn point(scale: f64) -> impl Strategy<Value = Vec3> {
    (-scale..scale, -scale..scale, -scale..scale).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn kernel_suite() -> Outcome {
    const CASES: u32 = 1000;
    let mut failures = Vec::new();
    let mut check = |name: &str, result: Result<(), String>| {
        if let Err(e) = result {
            failures.push(format!("{name}: {e}"));
        }
    };
    let runner = || {
        TestRunner::new(PropConfig {
            cases: CASES,
            failure_persistence: None,
            ..PropConfig::default()
        })
    };

    check(
        "finite differences",
        runner()
            .run(&(point(5.0), point(5.0)), |(x, xp)| {
                prop_assume!((x - xp).norm() > 0.1);
                let phi = |a: &Vec3, b: &Vec3| 1.0 / (a - b).norm();
                let h = 1e-4 * (x - xp).norm();
                let fd = Mat3::from_fn(|k, n| {
                    let (ek, en) = (Vec3::ith(k, h), Vec3::ith(n, h));
                    (phi(&(x + ek), &(xp + en)) - phi(&(x + ek), &(xp - en)) - phi(&(x - ek), &(xp + en))
                        + phi(&(x - ek), &(xp - en)))
                        / (4.0 * h * h)
                });
                let k = double_gradient_kernel(&x, &xp).unwrap();
                prop_assert!((k - fd).abs().max() < 1e-6 * k.abs().max());
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    check(
        "symmetry, trace and scaling",
        runner()
            .run(&(point(5.0), point(5.0), 0.1..10.0f64), |(x, xp, lambda)| {
                prop_assume!((x - xp).norm() > 1e-2);
                let k = double_gradient_kernel(&x, &xp).unwrap();
                let m = k.abs().max();
                prop_assert!((k - k.transpose()).abs().max() <= 1e-15 * m);
                prop_assert!(k.trace().abs() <= 1e-14 * m);
                let ks = double_gradient_kernel(&(x * lambda), &(xp * lambda)).unwrap();
                prop_assert!((ks * lambda.powi(3) - k).abs().max() <= 1e-13 * m);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    check(
        "continuity equation",
        runner()
            .run(&(point(3.0), 0.0..4.0f64, 0.2..2.0f64), |(x, t, sigma)| {
                let src = gaussian_source(sigma, 1.5, 8.0);
                let (ht, hx) = (1e-5, 1e-5 * sigma);
                let drho = (src.charge_density(&x, t + ht) - src.charge_density(&x, t - ht)) / (2.0 * ht);
                let div: f64 = (0..3)
                    .map(|i| {
                        let e = Vec3::ith(i, hx);
                        (src.current(&(x + e), t)[i] - src.current(&(x - e), t)[i]) / (2.0 * hx)
                    })
                    .sum();
                // |grad g| peaks at e^{-1/2}/sigma and f' at pi/tau
                let scale = src.amplitude() / sigma * PI;
                prop_assert!((drho + div).abs() < 1e-6 * scale, "{} {}", drho, div);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    check(
        "monomial exactness",
        runner()
            .run(&(1usize..8, (0u32..16, 0u32..16, 0u32..16), point(2.0)), |(order, (px, py, pz), lo)| {
                let cap = 2 * order as u32;
                let p = [px % cap, py % cap, pz % cap];
                let hi = lo + Vec3::new(1.0, 1.5, 0.75);
                let rule = build_rule(&Domain::cuboid(lo, hi).unwrap(), order).unwrap();
                let mono = |v: &Vec3| (0..3).map(|i| v[i].powi(p[i] as i32)).product::<f64>();
                let got = integrate_vector(|v| Vec3::repeat(mono(v)), &rule).unwrap().x;
                let exact: f64 = (0..3)
                    .map(|i| (hi[i].powi(p[i] as i32 + 1) - lo[i].powi(p[i] as i32 + 1)) / (p[i] as f64 + 1.0))
                    .product();
                let bound: f64 = (0..3).map(|i| lo[i].abs().max(hi[i].abs()).powi(p[i] as i32)).product::<f64>() * 1.125;
                prop_assert!((got - exact).abs() <= 1e-13 * bound.max(exact.abs()), "{} vs {}", got, exact);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    check(
        "far-kernel transversality",
        runner()
            .run(&(point(1.0), point(10.0)), |(theta, v)| {
                prop_assume!(theta.norm() > 1e-3);
                let theta = theta.normalize();
                let out = far_kernel(&theta).unwrap() * v;
                prop_assert!(theta.dot(&out).abs() <= 1e-14 * v.norm().max(1.0));
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    if failures.is_empty() {
        outcome(true, format!("5 properties x {CASES} random cases"))
    } else {
        outcome(false, failures.join("; "))
    }
}

fn determinism() -> Outcome {
    let text = r#"
tasks = ["decompose", "velocity"]
[source]
sigma = 0.01
[observation]
direction = [0.0, 0.6, 0.8]
radii = [0.5, 0.6, 0.7, 0.8]
times = { start = 0.0, stop = 2.4, count = 121 }
"#;
    let config = parse_config(text).unwrap();
    let files = ["waveforms_budko.csv", "waveforms_jefimenko.csv", "velocity.csv", "report.json"];
    let mut outputs = Vec::new();
    for threads in [1, 4] {
        let dir = tempfile::tempdir().unwrap();
        let out = run_tasks(
            &config,
            &RunOptions {
                threads: Some(threads),
                output_dir: Some(dir.path().to_path_buf()),
            },
        )
        .unwrap();
        if out.report.has_errors() {
            return outcome(false, "run reported task errors");
        }
        outputs.push(files.map(|f| std::fs::read(dir.path().join(f)).unwrap()));
    }
    let bytes: usize = outputs[0].iter().map(|b| b.len()).sum();
    let same = outputs[0] == outputs[1];
    outcome(same, format!("{} files ({bytes} bytes) identical for 1 and 4 worker threads: {same}", files.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("representation equivalence", representation_equivalence),
        ("boundary-term caveat", boundary_term_caveat),
        ("point-dipole oracle", oracle_equivalence),
        ("light-front causality", light_front_causality),
        ("negative local velocity", negative_velocity),
        ("zone scaling", zone_scaling),
        ("kernel and microscopic properties", kernel_suite),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("{status} [{}] {name} ({:.1}s): {}", i + 1, start.elapsed().as_secs_f64(), o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
