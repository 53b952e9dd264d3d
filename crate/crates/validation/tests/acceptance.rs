//! Acceptance gate: runs every criterion at its pinned tolerance and prints
//! one PASS/FAIL line each. Exits non-zero if any criterion fails.
//!
//! Runs without the libtest harness so the timing criteria see a quiet process.

use std::time::{Duration, Instant};

use llf_cli::commands::{self, FilterPath};
use llf_cli::corpus::{default_corpus, test_card, CardSpec};
use llf_cli::metrics::psnr;
use llf_cli::Image;
use llf_core::convolution::{conv3_shift_add, DEFAULT_SHIFT};
use llf_core::hwsim::{self, Bandwidth, ReplicationPlan, StreamConfig};
use llf_core::llf::{self, level_dims, SubImageSpec};
use llf_core::plane::{quantize_sample, Plane, PlaneQ};
use llf_core::pyramid::{collapse, gaussian_pyramid, laplacian_pyramid};
use llf_core::remap::remap_pixel;
use llf_core::RemapParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn single_thread<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("thread pool")
        .install(f)
}

fn pyramid_round_trip() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    let mut worst = 0.0f64;
    let mut odd = 0;
    for _ in 0..100 {
        let (w, h) = (rng.gen_range(8..96), rng.gen_range(8..96));
        odd += usize::from(w % 2 == 1 || h % 2 == 1);
        let p = Plane::from_fn(w, h, |_, _| rng.gen::<f64>());
        let back = collapse(&laplacian_pyramid(&p, 3).expect("depth 3")).expect("collapse");
        worst = worst.max(back.max_abs_diff(&p));
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-6 && odd > 0 && elapsed < Duration::from_secs(5),
        format!("100 planes ({odd} with odd dims), max error {worst:.2e}, {:.2} s", elapsed.as_secs_f64()),
    )
}

fn identity_filtering() -> Outcome {
    let id = RemapParams::identity(0.2).expect("params");
    let mut worst = 0.0f64;
    let mut min_psnr = f64::INFINITY;
    for (_, img) in default_corpus() {
        let (reference, _) = commands::filter_image(&img, &id, FilterPath::Reference, 3).expect("reference");
        for (o, i) in reference.iter().zip(img.planes()) {
            worst = worst.max(o.max_abs_diff(&i));
        }
        let (acc, _) = commands::filter_image(&img, &id, FilterPath::Accel, 3).expect("accel");
        let q = psnr(&Image::from_planes(&acc).expect("export"), &img).expect("psnr");
        min_psnr = min_psnr.min(q.psnr_db);
    }
    outcome(
        worst <= 1e-6 && min_psnr >= 40.0,
        format!("reference max error {worst:.2e}, accel min PSNR {min_psnr:.2} dB"),
    )
}

fn footprint_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    let (mut checked, mut worst) = (0usize, 0.0f64);
    while checked < 1200 {
        let image = Plane::from_fn(32, 32, |_, _| rng.gen::<f64>());
        let params = RemapParams::new(rng.gen_range(0.2..3.0), rng.gen_range(0.0..2.0), rng.gen_range(0.05..0.6))
            .expect("params");
        let gauss = gaussian_pyramid(&image, 3).expect("gaussian");
        for _ in 0..10 {
            let l = rng.gen_range(0..3);
            let (lw, lh) = level_dims(32, 32, l);
            let (x, y) = (rng.gen_range(1..lw - 1), rng.gen_range(1..lh - 1));
            let g = gauss.levels()[l].get(x, y);
            let spec = SubImageSpec::new(l, x, y, 32, 32).expect("spec");
            let got = llf::llf_coefficient(&image, &spec, g, &params).expect("coefficient");
            let remapped = image.map(|i| remap_pixel(i, g, &params));
            let want = laplacian_pyramid(&remapped, l + 1).expect("pyramid").levels()[l].get(x, y);
            worst = worst.max((got - want).abs());
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-6 && elapsed < Duration::from_secs(120),
        format!("{checked} triples over levels 0-2, max error {worst:.2e}, {:.1} s", elapsed.as_secs_f64()),
    )
}

fn shift_add_fidelity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC4);
    let (mut worst16, mut samples, mut exact_fail) = (0i64, 0usize, 0usize);
    let exact16 = |p: &PlaneQ, x: usize, y: usize| -> i64 {
        let mut acc = 0i64;
        for (j, wy) in [1i64, 2, 1].iter().enumerate() {
            for (i, wx) in [1i64, 2, 1].iter().enumerate() {
                acc += wx * wy * p.get_clamped(x as isize + i as isize - 1, y as isize + j as isize - 1) as i64;
            }
        }
        acc
    };
    for round in 0..2000 {
        let (w, h) = (rng.gen_range(1..24), rng.gen_range(1..24));
        let p = if round % 2 == 0 {
            PlaneQ::from_fn(w, h, |_, _| quantize_sample(rng.gen_range(-1.0..2.0)))
        } else {
            PlaneQ::from_fn(w, h, |_, _| 16 * rng.gen_range(-65536..65536))
        };
        let out = conv3_shift_add(&p, DEFAULT_SHIFT);
        for y in 0..h {
            for x in 0..w {
                let err = (16 * out.get(x, y) as i64 - exact16(&p, x, y)).abs();
                samples += 1;
                if round % 2 == 0 {
                    worst16 = worst16.max(err);
                } else if err != 0 {
                    exact_fail += 1;
                }
            }
        }
    }
    outcome(
        worst16 < 12 * 16 && exact_fail == 0,
        format!(
            "{samples} samples, max error {:.4} LSB, {exact_fail} nonzero errors on multiples of 16",
            worst16 as f64 / 16.0
        ),
    )
}

fn table_analog() -> Outcome {
    let images: Vec<Image> = default_corpus().into_iter().map(|(_, i)| i).collect();
    let rows = commands::cmd_sweep(&images, &commands::default_grid()).expect("sweep");
    print!("{}", commands::emit_sweep_csv(&rows));
    let floor = rows.iter().map(|r| r.psnr_db).fold(f64::INFINITY, f64::min);
    let mut broken = Vec::new();
    // rows come in blocks of three sigmas: 0.1, 0.2, 0.4
    for block in rows.chunks(3) {
        let p = block[0].params;
        let increasing_expected = p.alpha() == 1.0;
        for pair in block.windows(2) {
            let (a, b) = (pair[0].psnr_db, pair[1].psnr_db);
            let ok = if increasing_expected { b >= a } else { b <= a };
            if !ok {
                broken.push(format!(
                    "alpha {} beta {} sigma {}->{}: {a:.2}->{b:.2}",
                    p.alpha(),
                    p.beta(),
                    pair[0].params.sigma(),
                    pair[1].params.sigma()
                ));
            }
        }
    }
    let detail = if broken.is_empty() {
        format!("18 cells, floor {floor:.2} dB, trends hold")
    } else {
        format!("18 cells, floor {floor:.2} dB, trend broken: {}", broken.join("; "))
    };
    outcome(floor >= 30.0 && broken.is_empty(), detail)
}

fn simulator_trends() -> Outcome {
    let sweep = [
        Bandwidth::Bits(32),
        Bandwidth::Bits(64),
        Bandwidth::Bits(128),
        Bandwidth::Bits(256),
        Bandwidth::Unlimited,
    ];
    let runs: Vec<_> = sweep
        .iter()
        .map(|&bw| hwsim::simulate_lpus(256, 256, &StreamConfig::new(bw)).expect("sim"))
        .collect();
    let mut ok = true;
    for unit in 0..runs[0].len() {
        let eff: Vec<f64> = runs.iter().map(|r| r[unit].stats.efficiency()).collect();
        ok &= eff.windows(2).all(|p| p[1] > p[0] || (p[0] == 1.0 && p[1] == 1.0));
        ok &= *eff.last().expect("non-empty") == 1.0;
    }
    let l3: Vec<f64> = runs.iter().map(|r| hwsim::aggregate_by_level(r)[2].efficiency()).collect();
    let gain = l3[3] / l3[0];
    ok &= gain >= 1.5;
    let fmt = |lvl: usize| {
        runs.iter()
            .map(|r| format!("{:.3}", hwsim::aggregate_by_level(r)[lvl].efficiency()))
            .collect::<Vec<_>>()
            .join("/")
    };
    outcome(
        ok,
        format!(
            "efficiency at 32/64/128/256/inf: L1 {} L2 {} L3 {}; L3 gain {gain:.2}x",
            fmt(0),
            fmt(1),
            fmt(2)
        ),
    )
}

fn replication_scaling() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    // 960 x 960 splits evenly for every n and must meet the bound exactly;
    // 1024 x 1024 does not, and may exceed it by less than one 7-cycle item
    for (w, h, exact) in [(960, 960, true), (1024, 1024, false)] {
        let one = hwsim::simulate_replication(w, h, &ReplicationPlan::new(1).expect("plan"));
        let mut over = 0.0f64;
        for n in 1..=6 {
            let r = hwsim::simulate_replication(w, h, &ReplicationPlan::new(n).expect("plan"));
            let bound = one.latency_cycles as f64 / n as f64 + r.fill_cycles as f64;
            over = over.max(r.latency_cycles as f64 - bound);
        }
        ok &= if exact { over <= 0.0 } else { over < 7.0 };
        notes.push(format!("{w}x{h} worst excess over bound {over:.2} cycles"));
    }
    let pct: Vec<f64> = (1..=6).map(|n| ReplicationPlan::new(n).expect("plan").resource_pct()).collect();
    let affine = pct.windows(2).all(|p| (p[1] - p[0] - hwsim::L1_LUT_PCT).abs() < 1e-9);
    ok &= affine;
    outcome(
        ok,
        format!(
            "{}; resource {:.2}%..{:.2}% step {:.2} points",
            notes.join(", "),
            pct[0],
            pct[5],
            pct[1] - pct[0]
        ),
    )
}

fn performance_sanity() -> Outcome {
    let card = test_card(CardSpec { width: 1024, height: 1024, variant: 0 });
    let params = RemapParams::new(0.5, 1.0, 0.2).expect("params");
    let start = Instant::now();
    single_thread(|| llf::llf_accel_model(card.channels(), &params)).expect("accel");
    let full = start.elapsed();
    let rows = single_thread(|| commands::cmd_bench(&[0.25, 0.5, 0.75, 1.0], &params)).expect("bench");
    print!("{}", commands::format_bench_table(&rows));
    // host speed drifts within seconds, so the ratio comes from paired runs:
    // each band at 0.25 MP and 1 MP back to back, order alternating, median
    // over rounds
    let small = commands::BenchSetup::new(0.25, &params).expect("setup");
    let large = commands::BenchSetup::new(1.0, &params).expect("setup");
    let mut ratios: Vec<f64> = (0..5)
        .map(|round| {
            let (mut ts, mut tl) = (0.0, 0.0);
            for l in 0..3 {
                let time = |s: &commands::BenchSetup| {
                    single_thread(|| s.time_band(l)).expect("band").as_secs_f64()
                };
                if round % 2 == 0 {
                    ts += time(&small);
                    tl += time(&large);
                } else {
                    tl += time(&large);
                    ts += time(&small);
                }
            }
            tl / ts
        })
        .collect();
    ratios.sort_by(f64::total_cmp);
    let ratio = ratios[ratios.len() / 2];
    outcome(
        full < Duration::from_secs(60) && (3.5..=4.5).contains(&ratio),
        format!(
            "1 MP RGB in {:.2} s single-threaded, 1 MP / 0.25 MP ratio {ratio:.2} (median of paired rounds {})",
            full.as_secs_f64(),
            ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join("/")
        ),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("pyramid round trip", pyramid_round_trip),
        ("identity filtering", identity_filtering),
        ("footprint oracle", footprint_oracle),
        ("shift-add fidelity", shift_add_fidelity),
        ("accuracy sweep", table_analog),
        ("simulator trends", simulator_trends),
        ("replication scaling", replication_scaling),
        ("performance sanity", performance_sanity),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        failed += usize::from(!o.pass);
        println!("{} criterion {} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
