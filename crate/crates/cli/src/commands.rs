use serde::Serialize;
use serde_json::{json, Value};
use teleprobe::bench::{fit_werner_p, run_benchmark, BenchOptions};
use teleprobe::engine::run_exact;
use teleprobe::estimator::{correct_for_noise, estimate_exact, estimate_sampled, SamplingOptions};
use teleprobe::plan::{all_classes, compile_plan, format_bits, parse_bits};
use teleprobe::scan::{scan as run_scan, ScanConfig, ScanReport};
use teleprobe::state::fidelity;
use teleprobe::tomography::{tomograph_exact, tomograph_sampled, TomographyResult};
use teleprobe::{DensityMatrix, TeleporterClass};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::fmt_f64;

/// Every JSON output: what produced it, then the result.
#[derive(Serialize)]
pub struct Envelope<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a RunConfig,
    result: &'a Value,
}

impl<'a> Envelope<'a> {
    pub fn new(command: &'a str, config: &'a RunConfig, result: &'a Value) -> Self {
        Envelope { tool: "teleprobe", version: env!("CARGO_PKG_VERSION"), command, config, result }
    }
}

pub struct Report {
    pub json: Value,
    pub csv_header: Vec<&'static str>,
    pub csv_rows: Vec<Vec<String>>,
    /// Raised after the report is written (a failed comparison still reports).
    pub verdict: Result<(), CliError>,
}

impl Report {
    fn ok(json: Value, csv_header: Vec<&'static str>, csv_rows: Vec<Vec<String>>) -> Self {
        Report { json, csv_header, csv_rows, verdict: Ok(()) }
    }
}

fn ghz_for(cfg: &RunConfig) -> impl Fn(usize) -> teleprobe::Result<DensityMatrix> + Sync + '_ {
    move |width| cfg.noise.ghz(width)
}

pub fn plan(cfg: &RunConfig) -> Result<Report, CliError> {
    let e = cfg.element(None)?;
    let plan = compile_plan(&e)?;
    let rec = plan.to_record();
    let rows = rec.roles.iter().enumerate().map(|(q, r)| vec![(q + 1).to_string(), r.clone()]).collect();
    Ok(Report::ok(serde_json::to_value(&rec)?, vec!["qubit", "role"], rows))
}

pub fn measure(cfg: &RunConfig) -> Result<Report, CliError> {
    let rho = cfg.system_state()?;
    let e = cfg.element(Some(rho.num_qubits()))?;
    let plan = compile_plan(&e)?;
    let ghz = cfg.noise.ghz(plan.ghz_width)?;
    let mut est = if cfg.is_exact() {
        estimate_exact(&rho, &e, &ghz)?
    } else {
        estimate_sampled(&rho, &e, &ghz, cfg.shots, cfg.seed, SamplingOptions::default())?
    };
    if cfg.p_correction < 1.0 {
        est = correct_for_noise(&est, cfg.p_correction)?;
    }
    let rec = est.to_record();
    let mut json = json!({ "estimate": rec, "plan": plan.to_record() });
    if cfg.dump_branches {
        json["branches"] = serde_json::to_value(run_exact(&rho, &plan, &ghz)?.to_record())?;
    }
    let row = vec![
        rec.m.clone(),
        rec.n.clone(),
        fmt_f64(rec.re),
        fmt_f64(rec.im),
        fmt_f64(rec.stderr_re),
        fmt_f64(rec.stderr_im),
        rec.shots.to_string(),
        rec.accepted.to_string(),
        fmt_f64(rec.p),
    ];
    Ok(Report::ok(
        json,
        vec!["m", "n", "re", "im", "stderr_re", "stderr_im", "shots", "accepted", "p"],
        vec![row],
    ))
}

fn scan_config(cfg: &RunConfig) -> ScanConfig {
    ScanConfig {
        population_threshold: cfg.threshold,
        shots_per_setting: cfg.shots,
        p_correction: cfg.p_correction,
        reuse_branches: cfg.reuse_branches,
        seed: cfg.seed,
    }
}

fn run_scan_for(cfg: &RunConfig, rho: &DensityMatrix) -> Result<ScanReport, CliError> {
    Ok(run_scan(rho, &scan_config(cfg), ghz_for(cfg))?)
}

pub fn scan(cfg: &RunConfig) -> Result<Report, CliError> {
    let rho = cfg.system_state()?;
    let report = run_scan_for(cfg, &rho)?;
    let n = rho.num_qubits();
    let mut json = serde_json::to_value(report.to_record())?;
    json["fidelity"] = json!(fidelity(&report.reconstructed, &rho)?);
    let rows = report
        .populations
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            vec![format_bits(i as u64, n), fmt_f64(p), report.support.contains(&(i as u64)).to_string()]
        })
        .collect();
    Ok(Report::ok(json, vec!["basis", "population", "in_support"], rows))
}

fn run_tomo_for(cfg: &RunConfig, rho: &DensityMatrix) -> Result<TomographyResult, CliError> {
    Ok(if cfg.is_exact() { tomograph_exact(rho)? } else { tomograph_sampled(rho, cfg.shots, cfg.seed)? })
}

fn pauli_labels(n: usize) -> Vec<String> {
    const L: [char; 4] = ['I', 'X', 'Y', 'Z'];
    (0..1usize << (2 * n)).map(|idx| (0..n).map(|q| L[(idx >> (2 * (n - 1 - q))) & 3]).collect()).collect()
}

pub fn tomo(cfg: &RunConfig) -> Result<Report, CliError> {
    let rho = cfg.system_state()?;
    let t = run_tomo_for(cfg, &rho)?;
    let labels = pauli_labels(rho.num_qubits());
    let expectations: Vec<Value> =
        labels.iter().zip(&t.pauli_expectations).map(|(l, e)| json!({ "pauli": l, "value": e })).collect();
    let json = json!({
        "num_qubits": rho.num_qubits(),
        "settings_used": t.settings_used,
        "psd_projected": t.psd_projected,
        "fidelity": fidelity(&t.reconstructed, &rho)?,
        "pauli_expectations": expectations,
        "settings": t.settings,
        "reconstructed": teleprobe::state::DensityMatrixRecord::from(&t.reconstructed),
    });
    let rows = labels.into_iter().zip(&t.pauli_expectations).map(|(l, e)| vec![l, fmt_f64(*e)]).collect();
    Ok(Report::ok(json, vec!["pauli", "expectation"], rows))
}

pub fn compare(cfg: &RunConfig) -> Result<Report, CliError> {
    let rho = cfg.system_state()?;
    let s = run_scan_for(cfg, &rho)?;
    let t = run_tomo_for(cfg, &rho)?;
    let deviation =
        (s.reconstructed.entries() - t.reconstructed.entries()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let between = fidelity(&s.reconstructed, &t.reconstructed)?;
    let (fs, ft) = (fidelity(&s.reconstructed, &rho)?, fidelity(&t.reconstructed, &rho)?);
    let pass = deviation <= cfg.tol;
    let json = json!({
        "scan": { "settings_used": s.settings_used, "fidelity": fs, "psd_projected": s.psd_projected },
        "tomography": { "settings_used": t.settings_used, "fidelity": ft, "psd_projected": t.psd_projected },
        "max_deviation": deviation,
        "fidelity_between": between,
        "tol": cfg.tol,
        "pass": pass,
    });
    let row = vec![
        s.settings_used.to_string(),
        t.settings_used.to_string(),
        fmt_f64(fs),
        fmt_f64(ft),
        fmt_f64(deviation),
        fmt_f64(between),
        pass.to_string(),
    ];
    let header = vec![
        "scan_settings",
        "tomography_settings",
        "scan_fidelity",
        "tomography_fidelity",
        "max_deviation",
        "fidelity_between",
        "pass",
    ];
    let verdict = if pass { Ok(()) } else { Err(CliError::Mismatch { deviation, tol: cfg.tol }) };
    Ok(Report { json, csv_header: header, csv_rows: vec![row], verdict })
}

pub fn bench(cfg: &RunConfig) -> Result<Report, CliError> {
    let classes: Vec<TeleporterClass> = match &cfg.class {
        Some(bits) => {
            let mask = parse_bits(bits)?;
            if mask == 0 {
                return Err(CliError::Usage("class mask must be nonzero".into()));
            }
            if let Some(n) = cfg.num_qubits.filter(|&n| n != bits.len()) {
                return Err(CliError::Usage(format!("class has {} qubits, expected {n}", bits.len())));
            }
            vec![TeleporterClass { num_qubits: bits.len(), mask }]
        }
        None => all_classes(cfg.num_qubits.unwrap_or(2)),
    };
    let opts = BenchOptions { shots: cfg.shots, seed: cfg.seed };
    let mut records = Vec::new();
    let mut rows = Vec::new();
    for class in &classes {
        let b = run_benchmark(class, &cfg.noise, opts)?;
        for s in &b.states {
            let se = s.stderr.unwrap_or([0.0; 3]);
            let mut row = vec![class.to_string(), s.state.label().to_string()];
            row.extend(s.bloch.iter().chain(&se).map(|v| fmt_f64(*v)));
            row.push(fmt_f64(s.fidelity));
            row.push(fmt_f64(b.process_fidelity));
            rows.push(row);
        }
        records.push(b.to_record());
    }
    let mut json = json!({ "benchmarks": records });
    if let Some(target) = cfg.fit {
        let fits = classes.iter().map(|c| fit_werner_p(c, target)).collect::<teleprobe::Result<Vec<_>>>()?;
        json["fits"] = serde_json::to_value(
            fits.iter()
                .zip(&classes)
                .map(|(f, c)| json!({ "class": c.to_string(), "p": f.p, "achieved": f.achieved, "residual": f.residual }))
                .collect::<Vec<_>>(),
        )?;
    }
    let header = vec![
        "class",
        "state",
        "x",
        "y",
        "z",
        "stderr_x",
        "stderr_y",
        "stderr_z",
        "fidelity",
        "process_fidelity",
    ];
    Ok(Report::ok(json, header, rows))
}
