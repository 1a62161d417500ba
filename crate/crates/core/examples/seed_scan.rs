//! Scans ensemble seeds for draws that reproduce R1's zero-power loss and
//! pump response (`PRESET=r2` for R2).
//! `cargo run --release --example seed_scan -- <first> <count>`

use tlsnoise::dynamics::{synthesize_resonator_series, SynthOptions};
use tlsnoise::presets;
use tlsnoise::spectral::{analyze_simulation, AnalysisConfig};

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn main() {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer")).collect();
    let first = args.first().copied().unwrap_or(1);
    let count = args.get(1).copied().unwrap_or(20);
    let dyn_seeds = [1u64, 2, 3, 4, 5];
    let cfg = AnalysisConfig::default();
    let opts = SynthOptions::default();
    let preset = std::env::var("PRESET").unwrap_or_else(|_| "r1".into());
    for seed in first..first + count {
        let mut r1 = presets::by_name(&preset).expect("preset name");
        r1.ensemble.seed = seed;
        let ens = r1.build_ensemble().unwrap();
        let sum = ens.summary();
        let settings = r1.schedule.resolve().unwrap();
        let mut sz = vec![vec![]; 3];
        let mut off_gamma = vec![];
        let mut h1_dom = 0;
        let mut sy0 = vec![];
        for &d in &dyn_seeds {
            let sim = synthesize_resonator_series(&ens, &settings, &r1.grid, d, &opts).unwrap();
            off_gamma.push(sim.gamma_int_hz[0].iter().sum::<f64>() / sim.times_s.len() as f64);
            let an = analyze_simulation(&sim, &cfg).unwrap();
            sy0.push(an[0].y.level);
            for (i, a) in an.iter().enumerate() {
                sz[i.div_ceil(2)].push(a.z.level);
            }
            if std::env::var("PEEK").is_ok() {
                let f = &an[0].z.fit;
                eprintln!("  d{d} z off: h0={:.2e} h1={:.2e} h2={:.2e} flicker/rw={:.2}", f.h0_per_hz, f.h_minus1, f.h_minus2_hz, f.band_power(1e-5, 1e-4)[1] / f.band_power(1e-5, 1e-4)[2]);
            }
            if an[0].z.fit.dominant_term(1e-5, 1e-4) == 1 {
                h1_dom += 1;
            }
        }
        let med: Vec<f64> = sz.into_iter().map(median).collect();
        let mono = med[0] > med[1] && med[1] > med[2];

        let s2 = presets::s2_highpower();
        let ens2 = ens.retuned(s2.resonator);
        let st2 = s2.schedule.resolve().unwrap();
        let (mut ry, mut rz) = (vec![], vec![]);
        for &d in &dyn_seeds {
            let sim = synthesize_resonator_series(&ens2, &st2, &s2.grid, d, &opts).unwrap();
            match analyze_simulation(&sim, &cfg) {
                Ok(an) => {
                    ry.push(an[0].y.level / an[1].y.level);
                    rz.push(an[0].z.level / an[1].z.level);
                }
                Err(e) => eprintln!("s2 seed {d}: {e}"),
            }
        }
        let (ry, rz) = (median(ry), median(rz));
        println!(
            "seed {seed:3}: n={} sumk={:.1}k offΓ={:.1}k Sy0={:.1e} Sz=[{:.2e} {:.2e} {:.2e}] mono={mono} h1={h1_dom}/5 s2 y={ry:.0} z={rz:.0}{}",
            sum.n_retained,
            sum.sum_kappa_ground_hz / 1e3,
            median(off_gamma) / 1e3,
            median(sy0.clone()),
            med[0],
            med[1],
            med[2],
            if mono && ry >= 100.0 && rz >= 100.0 && h1_dom == 5 { "  <== candidate" } else { "" }
        );
    }
}
