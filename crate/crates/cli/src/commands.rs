use crate::config::{self, Resolved, RunConfig};
use crate::manifest::Run;
use crate::plot::{self, Series, Style, PALETTE};
use crate::CliError;
use serde_json::json;
use std::path::{Path, PathBuf};
use tlsnoise::dynamics::{synthesize_resonator_series, SimulationResult};
use tlsnoise::ensemble::Ensemble;
use tlsnoise::io::{self, SettingSeries};
use tlsnoise::presets;
use tlsnoise::resonfit::{
    fit_s21, fit_scurve, s21_model, scurve_model, synthesize_s21_trace, synthesize_scurve, PointDensity, ResonanceParams, S21FitConfig,
    S21SynthConfig,
};
use tlsnoise::spectral::{analyze_series, noise_level_at, split_periods_by_gap, AnalysisConfig, SettingAnalysis, TimeSeries};

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> tlsnoise::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

pub fn generate(cfg: &Resolved, out: &Path) -> Result<(), CliError> {
    let mut run = Run::new("generate", out)?;
    run.config(&cfg.canonical_json());
    run.seed("ensemble", cfg.preset.ensemble.seed);
    let ens = cfg.build_ensemble()?;
    run.lap("generate");
    let summary = ens.summary();
    run.write("ensemble.json", &csv_bytes(|b| ens.to_json(b))?)?;
    run.write_json("config.resolved.json", cfg)?;
    println!("candidates: {}  retained: {}  thermal TLSs: {}", summary.n_candidates, summary.n_retained, summary.n_ttls);
    run.finish(serde_json::to_value(summary).expect("summary"))
}

fn simulate_into(run: &mut Run, cfg: &Resolved, ens: &Ensemble) -> Result<SimulationResult, CliError> {
    let p = &cfg.preset;
    let settings = p.schedule.resolve()?;
    run.seed("dynamics", p.dynamics_seed);
    let sim = synthesize_resonator_series(ens, &settings, &p.grid, p.dynamics_seed, &cfg.synth)?;
    run.lap("simulate");
    run.write("timeseries.csv", &csv_bytes(|b| sim.write_csv(b))?)?;
    let mut s = String::from("setting_id,label,mean_n,f_p_hz\n");
    for (i, (l, d)) in sim.labels.iter().zip(&sim.drives).enumerate() {
        s.push_str(&format!("{i},{l},{},{}\n", d.mean_n, d.f_p_hz));
    }
    run.write("settings.csv", s.as_bytes())?;
    run.write("timeseries.svg", timeseries_svg(&sim, ens.resonator.f_r_tilde_hz).as_bytes())?;
    Ok(sim)
}

fn timeseries_svg(sim: &SimulationResult, f_r: f64) -> String {
    let hours: Vec<f64> = sim.times_s.iter().map(|t| t / 3600.0).collect();
    let strip = |values: &[Vec<f64>], f: &dyn Fn(f64) -> f64| -> Vec<Series<'static>> {
        values
            .iter()
            .enumerate()
            .map(|(i, v)| Series {
                label: sim.labels[i].clone(),
                color: PALETTE[i % PALETTE.len()],
                style: Style::Line,
                points: hours.iter().zip(v).map(|(&t, &y)| (t, f(y))).collect(),
            })
            .collect()
    };
    let a = plot::linear("Internal loss", "t (h)", "Γ_int (kHz)", &strip(&sim.gamma_int_hz, &|g| g / 1e3));
    let b = plot::linear("Resonance frequency", "t (h)", "f_r − f̃_r (kHz)", &strip(&sim.f_r_hz, &|f| (f - f_r) / 1e3));
    stack(&[a, b])
}

/// Places complete SVG documents one above the other.
fn stack(parts: &[String]) -> String {
    let h = 440.0;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"{}\" viewBox=\"0 0 720 {}\">\n",
        h * parts.len() as f64,
        h * parts.len() as f64
    );
    for (i, p) in parts.iter().enumerate() {
        s.push_str(&format!("<g transform=\"translate(0 {})\">\n{p}</g>\n", h * i as f64));
    }
    s.push_str("</svg>\n");
    s
}

pub fn simulate(cfg: &Resolved, ensemble: Option<&Path>, out: &Path) -> Result<(), CliError> {
    let mut run = Run::new("simulate", out)?;
    run.config(&cfg.canonical_json());
    let ens = match ensemble {
        Some(path) => {
            let bytes = run.input(path)?;
            Ensemble::from_json(&bytes[..])?
        }
        None => {
            run.seed("ensemble", cfg.preset.ensemble.seed);
            let e = cfg.build_ensemble()?;
            run.lap("generate");
            e
        }
    };
    // A stored ensemble may come from another cooldown of the same device.
    let ens = if ens.resonator.f_r_tilde_hz != cfg.preset.resonator.f_r_tilde_hz || ens.resonator != cfg.preset.resonator {
        ens.retuned(cfg.preset.resonator)
    } else {
        ens
    };
    let sim = simulate_into(&mut run, cfg, &ens)?;
    println!("{} settings × {} samples", sim.labels.len(), sim.times_s.len());
    run.finish(json!({ "settings": sim.labels, "n_samples": sim.times_s.len(), "n_qtls": ens.qtls.len() }))
}

pub struct PeriodRule {
    pub period_s: f64,
    pub split_gaps: Option<f64>,
}

fn to_series(s: &SettingSeries, values: &[f64], rule: &PeriodRule, unit: &str) -> Result<TimeSeries, CliError> {
    let ids = match rule.split_gaps {
        Some(factor) => split_periods_by_gap(&s.times_s, factor),
        None => {
            if !(rule.period_s > 0.0) {
                return Err(CliError::config("--period-s must be positive"));
            }
            let t0 = s.times_s.first().copied().unwrap_or(0.0);
            s.times_s.iter().map(|t| ((t - t0) / rule.period_s + 1e-12).floor() as u32).collect()
        }
    };
    Ok(TimeSeries::new(s.times_s.clone(), values.to_vec(), ids, unit)?)
}

fn read_labels(path: &Path) -> Option<Vec<(u32, String)>> {
    let text = std::fs::read_to_string(path).ok()?;
    text.lines()
        .skip(1)
        .map(|l| {
            let mut it = l.splitn(3, ',');
            Some((it.next()?.parse().ok()?, it.next()?.to_string()))
        })
        .collect()
}

fn analyze_into(run: &mut Run, data: &[SettingSeries], labels: &[String], cfg: &AnalysisConfig, rule: &PeriodRule) -> Result<Vec<SettingAnalysis>, CliError> {
    let mut results = Vec::new();
    for (s, label) in data.iter().zip(labels) {
        let y = analyze_series(&to_series(s, &s.f_r_hz, rule, "Hz")?, cfg).map_err(|e| CliError::from(e).context(format!("setting `{label}`, y")))?;
        let z = analyze_series(&to_series(s, &s.gamma_int_hz, rule, "Hz")?, cfg).map_err(|e| CliError::from(e).context(format!("setting `{label}`, z")))?;
        results.push(SettingAnalysis { label: label.clone(), y, z });
    }
    run.lap("analyze");
    for (s, a) in data.iter().zip(&results) {
        for (name, obs) in [("y", &a.y), ("z", &a.z)] {
            run.write(&format!("psd_{}_{name}.csv", s.setting_id), &csv_bytes(|b| io::write_psd_csv(&obs.psd, b))?)?;
        }
    }
    let fits: Vec<_> = data
        .iter()
        .zip(&results)
        .map(|(s, a)| json!({ "setting_id": s.setting_id, "label": a.label, "y": a.y.fit, "z": a.z.fit, "S_y_at_report_f": a.y.level, "S_z_at_report_f": a.z.level }))
        .collect();
    run.write_json("fits.json", &json!({ "report_f_hz": cfg.report_f_hz, "settings": fits }))?;
    for name in ["y", "z"] {
        let mut series = Vec::new();
        for (i, a) in results.iter().enumerate() {
            let obs = if name == "y" { &a.y } else { &a.z };
            let color = PALETTE[i % PALETTE.len()];
            series.push(Series { label: a.label.clone(), color, style: Style::Dots, points: obs.psd.freqs_hz.iter().copied().zip(obs.psd.power_per_hz.iter().copied()).collect() });
            series.push(Series {
                label: String::new(),
                color,
                style: Style::Line,
                points: obs.psd.freqs_hz.iter().map(|&f| (f, noise_level_at(&obs.fit, f))).collect(),
            });
        }
        let title = if name == "y" { "S_y: normalized resonance frequency" } else { "S_z: normalized internal loss" };
        run.write(&format!("psd_{name}.svg"), plot::loglog(title, "f (Hz)", &format!("S_{name} (1/Hz)"), &series).as_bytes())?;
    }
    Ok(results)
}

fn analysis_summary(results: &[SettingAnalysis], cfg: &AnalysisConfig) -> serde_json::Value {
    json!({
        "report_f_hz": cfg.report_f_hz,
        "settings": results.iter().map(|a| json!({
            "label": a.label,
            "S_y": a.y.level,
            "S_z": a.z.level,
            "n_segments": a.z.psd.n_segments,
            "f_min_hz": a.z.psd.freqs_hz.first(),
        })).collect::<Vec<_>>(),
    })
}

fn print_levels(results: &[SettingAnalysis], cfg: &AnalysisConfig) {
    println!("{:<18} {:>12} {:>12}   (fitted S at {} Hz)", "setting", "S_y", "S_z", cfg.report_f_hz);
    for a in results {
        println!("{:<18} {:>12.3e} {:>12.3e}", a.label, a.y.level, a.z.level);
    }
}

pub fn analyze(input: &Path, settings: Option<&Path>, cfg: &AnalysisConfig, rule: &PeriodRule, out: &Path) -> Result<(), CliError> {
    let mut run = Run::new("analyze", out)?;
    run.config(&serde_json::to_string(cfg).expect("config"));
    let bytes = run.input(input)?;
    let data = io::read_simulation_csv(&bytes[..])?;
    if data.is_empty() {
        return Err(CliError::config(format!("{}: no samples", input.display())));
    }
    let label_file = settings.map(PathBuf::from).unwrap_or_else(|| input.with_file_name("settings.csv"));
    let named = read_labels(&label_file).unwrap_or_default();
    let labels: Vec<String> = data
        .iter()
        .map(|s| named.iter().find(|(id, _)| *id == s.setting_id).map(|(_, l)| l.clone()).unwrap_or_else(|| format!("setting_{}", s.setting_id)))
        .collect();
    let results = analyze_into(&mut run, &data, &labels, cfg, rule)?;
    print_levels(&results, cfg);
    run.finish(analysis_summary(&results, cfg))
}

pub fn run_all(cfg: &Resolved, out: &Path) -> Result<(), CliError> {
    let mut run = Run::new("run", out)?;
    run.config(&cfg.canonical_json());
    run.write_json("config.resolved.json", cfg)?;
    run.seed("ensemble", cfg.preset.ensemble.seed);
    let ens = cfg.build_ensemble()?;
    run.lap("generate");
    run.write("ensemble.json", &csv_bytes(|b| ens.to_json(b))?)?;
    let sim = simulate_into(&mut run, cfg, &ens)?;
    let data: Vec<SettingSeries> = (0..sim.labels.len())
        .map(|s| SettingSeries { setting_id: s as u32, times_s: sim.times_s.clone(), gamma_int_hz: sim.gamma_int_hz[s].clone(), f_r_hz: sim.f_r_hz[s].clone() })
        .collect();
    // Periods come from the grid itself.
    let rule = PeriodRule { period_s: cfg.preset.grid.period_s + cfg.preset.grid.period_gap_s, split_gaps: None };
    let results = analyze_into(&mut run, &data, &sim.labels, &cfg.analysis, &rule)?;
    print_levels(&results, &cfg.analysis);
    let mut summary = analysis_summary(&results, &cfg.analysis);
    summary["ensemble"] = serde_json::to_value(ens.summary()).expect("summary");
    run.finish(summary)
}

pub fn preset(name: &str, out: Option<&Path>) -> Result<(), CliError> {
    let p = presets::by_name(name).ok_or_else(|| CliError::config(format!("unknown preset `{name}` (expected one of {})", presets::NAMES.join(", "))))?;
    let mut text = serde_json::to_string_pretty(&RunConfig::from_preset(&p)).expect("config");
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub struct S21Args {
    pub n_normalization: usize,
    pub normalize: bool,
}

pub fn fit_s21_cmd(input: &Path, args: &S21Args, out: &Path) -> Result<(), CliError> {
    let mut run = Run::new("fit-s21", out)?;
    let bytes = run.input(input)?;
    let trace = io::read_trace_csv(&bytes[..], args.n_normalization)?;
    let fit = fit_s21(&trace, &S21FitConfig { normalize: args.normalize, initial: None })?;
    run.lap("fit");
    let mut report = serde_json::to_value(fit).expect("fit");
    report["ci95"] = json!(fit.ci95());
    run.write_json("fit_s21.json", &report)?;
    let p = fit.params;
    let data: Vec<(f64, f64)> = trace.freqs_hz.iter().zip(&trace.s21).map(|(f, s)| ((f - p.f_r_hz) / 1e3, s.norm())).collect();
    let (lo, hi) = (trace.freqs_hz[0], trace.freqs_hz[trace.freqs_hz.len() - 1]);
    let model: Vec<(f64, f64)> = (0..=400).map(|i| lo + (hi - lo) * i as f64 / 400.0).map(|f| ((f - p.f_r_hz) / 1e3, s21_model(&p, f).norm())).collect();
    let svg = plot::linear(
        "Hanger resonance",
        "f − f_r (kHz)",
        "|S21|",
        &[
            Series { label: "data".into(), color: PALETTE[0], style: Style::Dots, points: data },
            Series { label: "fit".into(), color: PALETTE[1], style: Style::Line, points: model },
        ],
    );
    run.write("fit_s21.svg", svg.as_bytes())?;
    println!("f_r = {:.3} Hz  Q_int = {:.6e}  Q_ext = {:.6e}  phi = {:.6} rad", p.f_r_hz, p.q_int, p.q_ext, p.phi_rad);
    run.finish(report)
}

pub fn fit_scurve_cmd(input: &Path, out: &Path) -> Result<(), CliError> {
    let mut run = Run::new("fit-scurve", out)?;
    let bytes = run.input(input)?;
    let points = io::read_scurve_csv(&bytes[..])?;
    let fit = fit_scurve(&points)?;
    run.lap("fit");
    run.write_json("fit_scurve.json", &fit)?;
    let data: Vec<(f64, f64)> = points.iter().map(|p| (p.mean_n, p.q_int)).collect();
    let (lo, hi) = points.iter().fold((f64::INFINITY, 0.0f64), |(a, b), p| (a.min(p.mean_n), b.max(p.mean_n)));
    let lo = lo.max(hi * 1e-12).max(1e-300);
    let model: Vec<(f64, f64)> = (0..=200).map(|i| lo * (hi / lo).powf(i as f64 / 200.0)).map(|n| (n, 1.0 / scurve_model(&fit.params, n))).collect();
    let svg = plot::semilog_x(
        "Internal quality factor vs photon number",
        "⟨n⟩",
        "Q_int",
        &[
            Series { label: "data".into(), color: PALETTE[0], style: Style::Dots, points: data },
            Series { label: "fit".into(), color: PALETTE[1], style: Style::Line, points: model },
        ],
    );
    run.write("fit_scurve.svg", svg.as_bytes())?;
    let p = fit.params;
    println!("F tanδ0 = {:.6e}  n_c = {:.6e}  alpha = {:.6}  Q_bg = {:.6e}", p.f_tan_delta0, p.n_c, p.alpha, p.q_int_bg);
    run.finish(serde_json::to_value(fit).expect("fit"))
}

pub struct SynthS21Args {
    pub params: ResonanceParams,
    pub noise_std: f64,
    pub seed: u64,
    pub uniform: bool,
}

pub fn synth_s21_cmd(args: &SynthS21Args, out: &Path) -> Result<(), CliError> {
    let mut run = Run::new("synth-s21", out)?;
    run.seed("noise", args.seed);
    let cfg = S21SynthConfig {
        noise_std: args.noise_std,
        seed: args.seed,
        density: if args.uniform { PointDensity::Uniform } else { PointDensity::DoubledMiddle },
        ..S21SynthConfig::default()
    };
    let trace = synthesize_s21_trace(&args.params, &cfg)?;
    run.write("trace.csv", &csv_bytes(|b| io::write_trace_csv(&trace, b))?)?;
    run.finish(json!({ "params": args.params, "synth": cfg }))
}

pub struct SynthSCurveArgs {
    pub n_lo: f64,
    pub n_hi: f64,
    pub n_points: usize,
    pub rel_noise: f64,
    pub seed: u64,
}

pub fn synth_scurve_cmd(cfg: &Resolved, args: &SynthSCurveArgs, out: &Path) -> Result<(), CliError> {
    if !(args.n_lo > 0.0 && args.n_hi > args.n_lo) || args.n_points < 2 {
        return Err(CliError::config("need 0 < --n-lo < --n-hi and at least two points"));
    }
    let mut run = Run::new("synth-scurve", out)?;
    run.seed("noise", args.seed);
    let pts = synthesize_scurve(&cfg.preset.scurve, args.n_lo, args.n_hi, args.n_points, args.rel_noise, args.seed);
    run.write("scurve.csv", &csv_bytes(|b| io::write_scurve_csv(&pts, b))?)?;
    run.finish(json!({ "params": cfg.preset.scurve }))
}

pub fn load_config(config: Option<&Path>, preset: Option<&str>) -> Result<Resolved, CliError> {
    config::load(config, preset)
}
