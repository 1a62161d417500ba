//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use std::path::Path;
use std::process::Command;
use std::time::Instant;
use tlsnoise::dynamics::{simulate_rts, synthesize_resonator_series, SynthOptions};
use tlsnoise::physics::{aggregate, kappa_partial, saturation_number, saturation_population, TTls};
use tlsnoise::presets;
use tlsnoise::resonfit::{fit_s21, fit_scurve, synthesize_s21_trace, synthesize_scurve, ResonanceParams, S21FitConfig, S21SynthConfig};
use tlsnoise::seeds;
use tlsnoise::spectral::{analyze_simulation, fit_noise_model, welch_psd, AnalysisConfig, NoiseFitConfig, Psd, TimeSeries, WelchConfig};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Photon numbers for the R1 pump cycle, with the low-power internal rate in the linewidth.
fn photon_numbers() -> Outcome {
    let r1 = presets::r1();
    let mut res = r1.resonator;
    let gamma_int_low_power = res.gamma_int_bg_hz + 88.2e3;
    res.gamma_int_bg_hz = gamma_int_low_power;
    let targets = [7e-2, 3e2, 3e2, 6e3, 6e3];
    let mut ok = true;
    let mut parts = vec![];
    for ((label, s), target) in r1.schedule.resolve().unwrap().iter().zip(targets) {
        let n = s.drive(&res, gamma_int_low_power).unwrap().mean_n;
        ok &= rel(n, target) <= 0.25;
        parts.push(format!("{label}: {n:.3e} (target {target:.0e})"));
    }
    outcome(ok, parts.join(", "))
}

fn spectral_grid() -> Outcome {
    let grid = presets::r1().grid;
    let mut rng = seeds::stream(1, seeds::PSD_NOISE, &[]);
    let values: Vec<f64> = (0..grid.n_samples()).map(|_| rng.random::<f64>()).collect();
    let s = TimeSeries::new(grid.times(), values, grid.period_ids(), "1").unwrap();
    let psd = welch_psd(&s, &WelchConfig::default()).unwrap();
    let f_min = psd.freqs_hz[0];
    outcome(
        psd.n_segments == 16 && (f_min - 5.79e-6).abs() <= 0.05e-6,
        format!("{} samples, L = {}, {} segments, f_min = {f_min:.4e} Hz", grid.n_samples(), psd.segment_len, psd.n_segments),
    )
}

fn measurement_grid_psd(h0: f64, h1: f64) -> Psd {
    let (l, dt) = (332usize, 520.0);
    let freqs: Vec<f64> = (1..=l / 2).map(|k| k as f64 / (l as f64 * dt)).collect();
    let power = freqs.iter().map(|f| h0 + h1 / f).collect();
    Psd { freqs_hz: freqs, power_per_hz: power, n_segments: 16, segment_len: l, dt_s: dt }
}

fn noise_fit_round_trip() -> Outcome {
    let (h0, h1) = (15e-12, 5.7e-15);
    let cfg = NoiseFitConfig::default();
    let clean = fit_noise_model(&measurement_grid_psd(h0, h1), &cfg).unwrap();
    let clean_ok = rel(clean.h0_per_hz, h0) <= 0.05 && rel(clean.h_minus1, h1) <= 0.05;

    let normal = Normal::new(0.0, 0.2).unwrap();
    let repeats = 100;
    let mut within = [0usize; 2];
    for k in 0..repeats {
        let mut rng = seeds::stream(7, seeds::PSD_NOISE, &[k]);
        let mut psd = measurement_grid_psd(h0, h1);
        for p in &mut psd.power_per_hz {
            *p *= 1.0 + normal.sample(&mut rng);
        }
        let fit = fit_noise_model(&psd, &cfg).unwrap();
        within[0] += ((fit.h0_per_hz - h0).abs() <= 3.0 * fit.se_h0_per_hz) as usize;
        within[1] += ((fit.h_minus1 - h1).abs() <= 3.0 * fit.se_h_minus1) as usize;
    }
    let noisy_ok = within[0] == repeats as usize && within[1] == repeats as usize;
    outcome(
        clean_ok && noisy_ok,
        format!(
            "noiseless rel err h0 {:.1e}, h-1 {:.1e}; 20% noise within 3 SE: h0 {}/{repeats}, h-1 {}/{repeats}",
            rel(clean.h0_per_hz, h0),
            rel(clean.h_minus1, h1),
            within[0],
            within[1]
        ),
    )
}

fn saturation_limits() -> Outcome {
    let mut rng = seeds::stream(3, seeds::CANDIDATE, &[99]);
    let r1 = presets::r1();
    let res = r1.resonator;
    let mut exact = true;
    let mut kappa_ok = true;
    let mut gamma_ok = true;
    let n_eval = 1_000_000;
    for _ in 0..n_eval {
        let g = 10f64.powf(rng.random_range(2.0..5.0));
        let g1 = 10f64.powf(rng.random_range(5.0..8.0));
        exact &= saturation_population(g, g1, rng.random_range(-1e7..1e7), 0.0) == -1.0;
        exact &= saturation_population(g, g1, 0.0, saturation_number(g, g1)) == -0.5;
        let mean_n = 10f64.powf(rng.random_range(-4.0..7.0));
        let partial = |rng: &mut rand_chacha::ChaCha8Rng| {
            let fk = res.f_r_tilde_hz + rng.random_range(-2e8..2e8);
            let fp = res.f_r_tilde_hz + rng.random_range(-5e6..5e6);
            let sigma = rng.random_range(0.0..=1.0) * saturation_population(g, g1, fk - fp, mean_n);
            kappa_partial(g, g1, sigma, fk, res.f_r_tilde_hz)
        };
        let k = partial(&mut rng);
        kappa_ok &= k >= 0.0;
        let (gamma_int, _) = aggregate(&res, [(k, 0.0), (partial(&mut rng), 0.0), (partial(&mut rng), 0.0)]);
        gamma_ok &= gamma_int >= res.gamma_int_bg_hz;
    }
    outcome(
        exact && kappa_ok && gamma_ok,
        format!("{n_eval} draws: exact limits {exact}, κ ≥ 0 {kappa_ok}, Γ_int ≥ background {gamma_ok}"),
    )
}

/// Median S_z at 1e-5 Hz per photon-number level over five dynamics seeds,
/// and the pump-off/pumped ratios for the high-power preset.
fn power_scaling() -> Outcome {
    let cfg = AnalysisConfig::default();
    let opts = SynthOptions::default();
    let dyn_seeds = [1u64, 2, 3, 4, 5];

    let r1 = presets::r1();
    let ens = r1.build_ensemble().unwrap();
    let settings = r1.schedule.resolve().unwrap();
    let mut levels = vec![vec![]; 3];
    let mut mean_n = [0.0; 3];
    for &d in &dyn_seeds {
        let sim = synthesize_resonator_series(&ens, &settings, &r1.grid, d, &opts).unwrap();
        for (i, a) in analyze_simulation(&sim, &cfg).unwrap().iter().enumerate() {
            let level = i.div_ceil(2);
            levels[level].push(a.z.level);
            mean_n[level] = sim.drives[i].mean_n;
        }
    }
    let med: Vec<f64> = levels.into_iter().map(median).collect();
    let mono = med.windows(2).all(|w| w[1] < w[0]);

    let s2 = presets::s2_highpower();
    let ens2 = s2.build_ensemble().unwrap();
    let settings2 = s2.schedule.resolve().unwrap();
    let (mut ry, mut rz) = (vec![], vec![]);
    let mut n_hi = 0.0;
    for &d in &dyn_seeds {
        let sim = synthesize_resonator_series(&ens2, &settings2, &s2.grid, d, &opts).unwrap();
        let an = analyze_simulation(&sim, &cfg).unwrap();
        ry.push(an[0].y.level / an[1].y.level);
        rz.push(an[0].z.level / an[1].z.level);
        n_hi = sim.drives[1].mean_n;
    }
    let (ry, rz) = (median(ry), median(rz));
    outcome(
        mono && ry >= 100.0 && rz >= 100.0,
        format!(
            "median S_z at <n> = {:.2e}, {:.2e}, {:.2e}: {:.3e} > {:.3e} > {:.3e} ({}); <n> = {n_hi:.1e}: S_y drop {ry:.0}x, S_z drop {rz:.0}x",
            mean_n[0],
            mean_n[1],
            mean_n[2],
            med[0],
            med[1],
            med[2],
            if mono { "monotone" } else { "not monotone" }
        ),
    )
}

fn rts_statistics() -> Outcome {
    let dt = 1.0;
    let n = 400_000;
    let times: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
    let mut ok = true;
    let mut parts = vec![];
    for (k, gdt) in [1e-3, 1e-1, 10.0].into_iter().enumerate() {
        let gamma = gdt / dt;
        let t = TTls { delta_f_hz: 1.0, gamma_switch_hz: gamma, occupancy_bias: 0.5 };
        let tr = simulate_rts(&t, &times, &mut seeds::stream(2024, seeds::RTS, &[k as u64]));
        let expect = gamma * (times[n - 1] - times[0]);
        let count_ok = (tr.transitions as f64 - expect).abs() <= 3.0 * expect.sqrt();
        // Correlated samples: the binomial variance uses the effective sample count.
        let rho = (-2.0 * gamma * dt).exp();
        let n_eff = n as f64 * (1.0 - rho) / (1.0 + rho);
        let frac = tr.states.iter().filter(|&&s| s < 0).count() as f64 / n as f64;
        let occ_ok = (frac - 0.5).abs() <= 3.0 * (0.25 / n_eff).sqrt();
        ok &= count_ok && occ_ok;
        parts.push(format!("γdt={gdt}: {} switches (expect {expect:.0}), occupancy {frac:.4}", tr.transitions));
    }
    outcome(ok, parts.join("; "))
}

fn resonator_round_trips() -> Outcome {
    let cases = [
        ResonanceParams { f_r_hz: 5.581779e9, q_int: 2.6e5, q_ext: 9.6e3, phi_rad: 0.05 },
        ResonanceParams { f_r_hz: 6.081402e9, q_int: 1.4e5, q_ext: 1.1e4, phi_rad: -0.1 },
        ResonanceParams { f_r_hz: 5.556966e9, q_int: 6.0e5, q_ext: 3.0e4, phi_rad: 0.3 },
    ];
    let mut worst: f64 = 0.0;
    for p in &cases {
        let fit = fit_s21(&synthesize_s21_trace(p, &S21SynthConfig::default()).unwrap(), &S21FitConfig::default()).unwrap();
        let q = fit.params;
        worst = worst.max(rel(q.f_r_hz, p.f_r_hz)).max(rel(q.q_int, p.q_int)).max(rel(q.q_ext, p.q_ext)).max((q.phi_rad - p.phi_rad).abs());
    }
    let sc = presets::r1().scurve;
    let fit = fit_scurve(&synthesize_scurve(&sc, 1e-3, 1e6, 30, 0.0, 0)).unwrap();
    let (ea, en) = (rel(fit.params.alpha, sc.alpha), rel(fit.params.n_c, sc.n_c));
    outcome(
        worst <= 1e-9 && ea <= 0.01 && en <= 0.01,
        format!("S21 worst relative error {worst:.1e}; S-curve α {:.4} (err {ea:.1e}), n_c {:.4} (err {en:.1e})", fit.params.alpha, fit.params.n_c),
    )
}

fn tlsnoise(args: &[&str], out: &Path) {
    let status = Command::new(env!("CARGO_BIN_EXE_tlsnoise")).args(args).arg("--out-dir").arg(out).output().expect("spawn tlsnoise");
    assert!(status.status.success(), "tlsnoise {args:?} failed: {}", String::from_utf8_lossy(&status.stderr));
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv" || e == "json") && !p.ends_with("manifest.json"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let runs = [("a", "1"), ("b", "1"), ("c", "3")];
    let mut outputs = vec![];
    for (name, threads) in runs {
        let dir = tmp.path().join(name);
        tlsnoise(&["--threads", threads, "run", "--preset", "r1"], &dir);
        outputs.push(csv_files(&dir));
    }
    let s21: Vec<_> = ["s1", "s2"]
        .iter()
        .map(|name| {
            let dir = tmp.path().join(name);
            tlsnoise(&["synth-s21", "--noise-std", "0.002", "--seed", "5"], &dir);
            csv_files(&dir)
        })
        .collect();
    let same = outputs.windows(2).all(|w| w[0] == w[1]) && s21[0] == s21[1];
    let n_csv = outputs[0].iter().filter(|(n, _)| n.ends_with(".csv")).count();
    outcome(
        same && n_csv > 0,
        format!("{} files ({n_csv} CSV) compared across 3 runs at 1 and 3 threads, plus a seeded S21 trace: {}", outputs[0].len(), if same { "identical" } else { "differ" }),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 photon numbers", photon_numbers),
        ("2 spectral grid", spectral_grid),
        ("3 noise-fit round trip", noise_fit_round_trip),
        ("4 saturation limits", saturation_limits),
        ("5 power scaling of noise", power_scaling),
        ("6 RTS statistics", rts_statistics),
        ("7 S21 and S-curve round trips", resonator_round_trips),
        ("8 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let t = Instant::now();
        let o = run();
        failed += !o.pass as usize;
        println!("{} criterion {name} [{:.1} s]: {}", if o.pass { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64(), o.detail);
    }
    println!("acceptance: {}/8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
