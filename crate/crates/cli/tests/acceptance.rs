//! End-to-end acceptance checks. Prints one line per criterion and exits
//! nonzero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use teleprobe::bench::{fit_werner_p, run_benchmark, BenchOptions};
use teleprobe::engine::run_exact;
use teleprobe::estimator::{correct_for_noise, estimate_exact, estimate_sampled, SamplingOptions};
use teleprobe::noise::NoiseConfig;
use teleprobe::plan::{all_classes, classify, compile_plan};
use teleprobe::scan::{plan_scan, prepare_fig5_state, scan, ScanConfig};
use teleprobe::state::{epr, fidelity, ghz_state, random_density_matrix, werner_ghz};
use teleprobe::tomography::tomograph_exact;
use teleprobe::{Complex64, DensityMatrix, ElementIndex};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ideal(width: usize) -> teleprobe::Result<DensityMatrix> {
    Ok(ghz_state(width)?.density())
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn off_diagonal(n: usize) -> impl Iterator<Item = ElementIndex> {
    let d = 1u64 << n;
    (0..d)
        .flat_map(move |m| (0..d).filter(move |&k| k != m).map(move |k| ElementIndex::new(n, m, k).unwrap()))
}

fn random_states(count: usize, seed: u64) -> Vec<DensityMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = 2 + i % 2;
            let rank = rng.random_range(1..=1usize << n);
            random_density_matrix(n, rank, &mut rng).unwrap()
        })
        .collect()
}

fn eq1_end_to_end() -> Check {
    let mut worst = 0.0f64;
    let mut count = 0;
    for rho in random_states(200, 1) {
        for e in off_diagonal(rho.num_qubits()) {
            let (m, n) = (e.m() as usize, e.n() as usize);
            if rho.entry(m, m).re + rho.entry(n, n).re <= 1e-6 {
                continue;
            }
            let est = estimate_exact(&rho, &e, &ideal(e.hamming_distance() + 1).unwrap())
                .map_err(|x| x.to_string())?;
            worst = worst.max((est.value - rho.entry(m, n)).norm());
            count += 1;
        }
    }
    ensure(worst < 1e-9, || format!("max error {worst:e}"))?;
    Ok(format!("{count} elements, max error {worst:.1e}"))
}

fn subspace_probability() -> Check {
    let mut worst = 0.0f64;
    for rho in random_states(100, 2) {
        for e in off_diagonal(rho.num_qubits()) {
            let table =
                run_exact(&rho, &compile_plan(&e).unwrap(), &ideal(e.hamming_distance() + 1).unwrap())
                    .map_err(|x| x.to_string())?;
            let want =
                rho.entry(e.m() as usize, e.m() as usize).re + rho.entry(e.n() as usize, e.n() as usize).re;
            worst = worst.max((table.target_probability() - want).abs());
        }
    }
    ensure(worst < 1e-10, || format!("max deviation {worst:e}"))?;
    Ok(format!("100 states, max deviation {worst:.1e}"))
}

fn werner_scaling() -> Check {
    let mut worst_raw = 0.0f64;
    let mut worst_fixed = 0.0f64;
    for rho in random_states(20, 3) {
        for p in [0.25, 0.5, 0.75, 1.0] {
            for e in off_diagonal(rho.num_qubits()) {
                let ghz = werner_ghz(e.hamming_distance() + 1, p).unwrap();
                let raw = estimate_exact(&rho, &e, &ghz).map_err(|x| x.to_string())?;
                let truth = rho.entry(e.m() as usize, e.n() as usize);
                worst_raw = worst_raw.max((raw.value - truth * p).norm());
                let fixed = correct_for_noise(&raw, p).map_err(|x| x.to_string())?;
                worst_fixed = worst_fixed.max((fixed.value - truth).norm());
            }
        }
    }
    ensure(worst_raw < 1e-9 && worst_fixed < 1e-9, || {
        format!("raw {worst_raw:e}, corrected {worst_fixed:e}")
    })?;
    Ok(format!("raw vs p·ρ {worst_raw:.1e}, corrected {worst_fixed:.1e}"))
}

fn plan_counting() -> Check {
    let pairs: Vec<ElementIndex> = off_diagonal(2).filter(|e| e.m() < e.n()).collect();
    let mut masks: Vec<u64> = pairs.iter().map(|e| classify(e).unwrap().mask).collect();
    masks.sort_unstable();
    masks.dedup();
    ensure(pairs.len() == 6 && masks.len() == 3 && all_classes(2).len() == 3, || {
        format!("{} pairs in {} classes", pairs.len(), masks.len())
    })?;
    let mut checked = 0;
    for n in 1..=6 {
        for e in off_diagonal(n) {
            let plan = compile_plan(&e).map_err(|x| x.to_string())?;
            ensure(plan.ghz_width == e.hamming_distance() + 1, || format!("{e}: width {}", plan.ghz_width))?;
            checked += 1;
        }
    }
    Ok(format!("6 pairs in 3 classes; width = distance + 1 on {checked} elements"))
}

fn sparse_advantage() -> Check {
    let mut fids = Vec::new();
    for n in 2..=10usize {
        let plan = plan_scan(n, &[0, (1u64 << n) - 1], false).map_err(|x| x.to_string())?;
        ensure(plan.settings_used == 2 && plan.tomography_settings == 3u128.pow(n as u32), || {
            format!("N={n}: {} vs {}", plan.settings_used, plan.tomography_settings)
        })?;
        if n <= 4 {
            let rho = ghz_state(n).unwrap().density();
            let r = scan(&rho, &ScanConfig::default(), ideal).map_err(|x| x.to_string())?;
            let f = fidelity(&r.reconstructed, &rho).unwrap();
            ensure(r.settings_used == 2 && f >= 1.0 - 1e-9, || {
                format!("N={n}: settings {}, F={f}", r.settings_used)
            })?;
            fids.push(f);
        }
    }
    let min = fids.iter().copied().fold(1.0, f64::min);
    Ok(format!("2 settings vs 3^N for N=2..10; min fidelity {min:.12} (N<=4)"))
}

fn shot_convergence() -> Check {
    let e = ElementIndex::from_bits("00", "11").unwrap();
    let rho = epr().density();
    let ghz = ideal(3).unwrap();
    let run = |shots| {
        estimate_sampled(&rho, &e, &ghz, shots, 2024, SamplingOptions::default()).map_err(|x| x.to_string())
    };
    let big = run(1_000_000)?;
    let dev = big.value - Complex64::new(0.5, 0.0);
    ensure(dev.re.abs() <= 3.0 * big.stderr_re && dev.im.abs() <= 3.0 * big.stderr_im, || {
        format!("value {} with stderrs ({:e}, {:e})", big.value, big.stderr_re, big.stderr_im)
    })?;
    let frac = big.accepted_shots as f64 / big.shots_used as f64;
    // binomial σ of the fraction at the true acceptance 1
    let sigma = (frac * (1.0 - frac) / big.shots_used as f64).sqrt();
    ensure((frac - 1.0).abs() <= 3.0 * sigma, || format!("acceptance {frac}"))?;
    // ⟨X⟩ = 1 exactly for EPR, so the imaginary part carries the statistics
    let errs: Vec<f64> = [1_000u64, 10_000, 100_000, 1_000_000]
        .iter()
        .map(|&s| run(s).map(|x| x.stderr_im))
        .collect::<Result<_, _>>()?;
    for w in errs.windows(2) {
        let ratio = w[0] / w[1] / 10f64.sqrt();
        ensure((0.5..=2.0).contains(&ratio), || format!("stderr ratio {ratio} outside factor 2 of √10"))?;
    }
    let errs: Vec<String> = errs.iter().map(|e| format!("{e:.2e}")).collect();
    Ok(format!(
        "value {:.6}{:+.6}i, acceptance {frac}, stderr_im {}",
        big.value.re,
        big.value.im,
        errs.join(" ")
    ))
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_teleprobe")
}

fn oracle_agreement() -> Check {
    let rho = prepare_fig5_state(56.0, 20.0).map_err(|x| x.to_string())?;
    let s = scan(&rho, &ScanConfig::default(), ideal).map_err(|x| x.to_string())?;
    let t = tomograph_exact(&rho).map_err(|x| x.to_string())?;
    let dev =
        (s.reconstructed.entries() - t.reconstructed.entries()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    ensure(dev < 1e-8, || format!("deviation {dev:e}"))?;
    let status = Command::new(bin())
        .args(["compare", "--state", "fig5", "--theta", "56", "--phi", "20", "--tol", "1e-8", "--exact"])
        .output()
        .map_err(|x| x.to_string())?;
    ensure(status.status.success(), || format!("compare exited {:?}", status.status.code()))?;
    Ok(format!("max deviation {dev:.1e}, compare exit 0"))
}

fn benchmark_sanity() -> Check {
    for class in all_classes(2) {
        let b = run_benchmark(&class, &NoiseConfig::default(), BenchOptions::default())
            .map_err(|x| x.to_string())?;
        ensure((b.process_fidelity - 1.0).abs() < 1e-10, || {
            format!("{class}: process fidelity {}", b.process_fidelity)
        })?;
        for s in &b.states {
            ensure((s.fidelity - 1.0).abs() < 1e-10, || {
                format!("{class} {}: {}", s.state.label(), s.fidelity)
            })?;
        }
    }
    let class = all_classes(2)[2];
    let grid: Vec<f64> = (0..=20)
        .map(|i| {
            let noise = NoiseConfig { ghz_werner_p: i as f64 / 20.0, system_depolarizing: 0.0 };
            run_benchmark(&class, &noise, BenchOptions::default()).map(|b| b.average_fidelity)
        })
        .collect::<Result<_, _>>()
        .map_err(|x| x.to_string())?;
    ensure(grid.windows(2).all(|w| w[1] > w[0]), || "fidelity not monotone in p".into())?;
    let fit = fit_werner_p(&class, 0.88).map_err(|x| x.to_string())?;
    ensure(fit.residual.abs() < 1e-9, || format!("residual {:e}", fit.residual))?;
    Ok(format!("process fidelity 1 on 3 classes; class {class} p = {:.6} for F = 0.88", fit.p))
}

fn run_to(args: &[&str], out: &Path) -> Result<Vec<u8>, String> {
    let o = Command::new(bin()).args(args).arg("--out").arg(out).output().map_err(|x| x.to_string())?;
    ensure(o.status.success(), || format!("{args:?}: {}", String::from_utf8_lossy(&o.stderr)))?;
    std::fs::read(out).map_err(|x| x.to_string())
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|x| x.to_string())?;
    let cases: [&[&str]; 6] = [
        &["measure", "--state", "fig5", "--m", "01", "--nn", "10", "--shots", "100000", "--seed", "7"],
        &["scan", "--state", "fig5", "--shots", "20000", "--seed", "7"],
        &[
            "scan",
            "--state",
            "ghz3",
            "--shots",
            "20000",
            "--seed",
            "7",
            "--reuse-branches",
            "--format",
            "csv",
        ],
        &["tomo", "--state", "epr", "--shots", "5000", "--seed", "7"],
        &["compare", "--state", "fig5", "--shots", "20000", "--seed", "7", "--tol", "1"],
        &["bench", "--werner-p", "0.8", "--shots", "5000", "--seed", "7"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let a = run_to(args, &dir.path().join(format!("a{i}")))?;
        let b = run_to(args, &dir.path().join(format!("b{i}")))?;
        ensure(a == b, || format!("{args:?} differs between runs"))?;
    }
    let mut other = cases[0].to_vec();
    *other.last_mut().unwrap() = "8";
    let c = run_to(&other, &dir.path().join("c"))?;
    ensure(c != run_to(cases[0], &dir.path().join("d"))?, || "seed has no effect".into())?;
    Ok(format!("{} sampled commands byte-identical on rerun", cases.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 element recovery", eq1_end_to_end),
        ("2 subspace probability", subspace_probability),
        ("3 noisy-GHZ scaling", werner_scaling),
        ("4 plan counting", plan_counting),
        ("5 sparse-scan advantage", sparse_advantage),
        ("6 shot convergence", shot_convergence),
        ("7 oracle agreement", oracle_agreement),
        ("8 benchmark sanity", benchmark_sanity),
        ("9 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS  {name:<26} {secs:>6.2}s  {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name:<26} {secs:>6.2}s  {detail}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
