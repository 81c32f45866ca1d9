use std::path::{Path, PathBuf};
use std::time::Instant;

use photon_cumulants::gaussian::{GaussianState, SOrder, StateDocument};
use photon_cumulants::haar_mc::{family_sweep, trial_rng};
use photon_cumulants::matfunc::{
    fdiag, loop_hafnian, montrealer_fast, montrealer_ref, MAX_FAST_MODES, MAX_HAFNIAN_DIM, MAX_REF_MODES,
};
use photon_cumulants::moments::{
    cumulant_via_montrealer_with, cumulant_via_partitions, moment_via_fd, photon_moment, ModePattern,
    MontrealerPath,
};
use photon_cumulants::C64;
use serde_json::json;

use crate::config::{ExperimentConfig, DEFAULT_SEED};
use crate::error::{CliError, CliResult};
use crate::output::{config_digest, csv_bytes, fmt_sig, write_atomic, BenchRow, McRow, RunManifest, ValueRow};

pub const SIG_DIGITS: usize = 12;
/// Largest accepted `|a − b| / max(|a|, |b|, 1)` between two routes.
pub const AGREEMENT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum MomentMethod {
    Hafnian,
    Fd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum CumulantMethod {
    Montrealer,
    Partitions,
    Both,
}

/// Options shared by every command.
#[derive(Clone, Debug, Default)]
pub struct Global {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

fn load_state(path: &Path) -> CliResult<(GaussianState, StateDocument)> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let doc = StateDocument::from_json(&text)?;
    let (state, _) = doc.clone().into_state()?;
    Ok((state, doc))
}

fn join(values: &[usize]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn finish(
    global: &Global,
    command: &str,
    csv_name: &str,
    csv: Vec<u8>,
    digest: String,
    started: Instant,
) -> CliResult<Option<PathBuf>> {
    let Some(dir) = &global.out_dir else { return Ok(None) };
    let csv_path = dir.join(csv_name);
    write_atomic(&csv_path, &csv)?;
    RunManifest {
        command: command.into(),
        config_digest: digest,
        seed: global.seed,
        library_version: env!("CARGO_PKG_VERSION").into(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        outputs: vec![csv_path.clone()],
    }
    .write(&dir.join(format!("{command}.manifest.json")))?;
    Ok(Some(csv_path))
}

pub fn moment(global: &Global, state_path: &Path, pattern: &[usize], method: MomentMethod) -> CliResult<()> {
    let started = Instant::now();
    let (state, doc) = load_state(state_path)?;
    let pat = ModePattern::new(pattern.to_vec())?;
    let (value, name) = match method {
        MomentMethod::Hafnian => (photon_moment(&state, &pat)?, "hafnian"),
        MomentMethod::Fd => (moment_via_fd(&state, &pat)?, "fd"),
    };
    println!("{}", fmt_sig(value, SIG_DIGITS));
    let row = ValueRow { state: state_path.display().to_string(), indices: join(pattern), method: name.into(), value };
    let digest = config_digest(&json!({ "state": doc, "pattern": pattern, "method": name }));
    finish(global, "moment", "moment.csv", csv_bytes(&[row])?, digest, started)?;
    Ok(())
}

pub fn cumulant(
    global: &Global,
    state_path: &Path,
    modes: &[usize],
    method: CumulantMethod,
    reference: bool,
) -> CliResult<()> {
    let started = Instant::now();
    let (state, doc) = load_state(state_path)?;
    let path = if reference { MontrealerPath::Reference } else { MontrealerPath::Fast };
    let mut rows = Vec::new();
    let row = |name: &str, value: f64| ValueRow {
        state: state_path.display().to_string(),
        indices: join(modes),
        method: name.into(),
        value,
    };
    let mut mismatch = None;
    match method {
        CumulantMethod::Montrealer => {
            let v = cumulant_via_montrealer_with(&state, modes, path)?;
            println!("{}", fmt_sig(v, SIG_DIGITS));
            rows.push(row("montrealer", v));
        }
        CumulantMethod::Partitions => {
            let v = cumulant_via_partitions(&state, modes)?;
            println!("{}", fmt_sig(v, SIG_DIGITS));
            rows.push(row("partitions", v));
        }
        CumulantMethod::Both => {
            let a = cumulant_via_montrealer_with(&state, modes, path)?;
            let b = cumulant_via_partitions(&state, modes)?;
            let rel = (a - b).abs() / a.abs().max(b.abs()).max(1.0);
            println!("montrealer {}", fmt_sig(a, SIG_DIGITS));
            println!("partitions {}", fmt_sig(b, SIG_DIGITS));
            println!("relative_difference {}", fmt_sig(rel, 3));
            rows.push(row("montrealer", a));
            rows.push(row("partitions", b));
            if rel > AGREEMENT_TOL {
                mismatch = Some(format!("montrealer {a} and partitions {b} differ by {rel:e}"));
            }
        }
    }
    let digest = config_digest(&json!({ "state": doc, "modes": modes, "method": format!("{method:?}"), "reference": reference }));
    finish(global, "cumulant", "cumulant.csv", csv_bytes(&rows)?, digest, started)?;
    match mismatch {
        Some(msg) => Err(CliError::Mismatch(msg)),
        None => Ok(()),
    }
}

pub fn montecarlo(global: &Global, config_path: &Path) -> CliResult<()> {
    let started = Instant::now();
    let cfg = ExperimentConfig::load(config_path)?;
    let seed = global.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let base = cfg.base(seed);
    let sweep = family_sweep(&base, &cfg.families)?;
    let mut rows = Vec::new();
    for stats in &sweep {
        for r in &stats.rows {
            rows.push(McRow {
                family: stats.family.label(),
                ell: stats.ell,
                k: r.k,
                order: r.order,
                mean: r.mean,
                std: r.std,
                trials: r.trials,
                seed,
            });
        }
    }
    println!("{:<28} {:>4} {:>4} {:>5} {:>20} {:>20}", "family", "ell", "K", "order", "mean", "std");
    for r in &rows {
        println!(
            "{:<28} {:>4} {:>4} {:>5} {:>20} {:>20}",
            r.family,
            r.ell,
            r.k,
            r.order,
            fmt_sig(r.mean, SIG_DIGITS),
            fmt_sig(r.std, SIG_DIGITS)
        );
    }
    let global = Global { seed: Some(seed), out_dir: Some(global.out_dir.clone().unwrap_or_else(|| ".".into())) };
    let digest = config_digest(&ExperimentConfig { seed: Some(seed), ..cfg });
    if let Some(p) = finish(&global, "montecarlo", "montecarlo.csv", csv_bytes(&rows)?, digest, started)? {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn median_time<F: FnMut() -> photon_cumulants::Result<C64>>(reps: usize, mut f: F) -> CliResult<(f64, C64)> {
    let mut times = Vec::with_capacity(reps);
    let mut value = C64::new(0.0, 0.0);
    for _ in 0..reps {
        let t = Instant::now();
        value = f()?;
        times.push(t.elapsed().as_secs_f64());
    }
    times.sort_by(f64::total_cmp);
    Ok((times[reps / 2], value))
}

pub fn bench(global: &Global, ell_min: usize, ell_max: usize, reps: usize) -> CliResult<()> {
    let started = Instant::now();
    if ell_min == 0 || ell_min > ell_max || reps == 0 {
        return Err(CliError::Input("bench needs 1 <= ell-min <= ell-max and reps >= 1".into()));
    }
    let seed = global.seed.unwrap_or(DEFAULT_SEED);
    let mut rows = Vec::new();
    let mut mismatches = Vec::new();
    for ell in ell_min..=ell_max {
        let mut rng = trial_rng(seed, ell as u64);
        let state = GaussianState::random(ell, 0.3, &mut rng);
        let a = state.adjacency(SOrder::Normal);
        let mut push = |algorithm: &str, (secs, v): (f64, C64)| {
            println!("{algorithm:<9} ell={ell:<3} median={secs:.6e}s value={}", fmt_sig(v.re, SIG_DIGITS));
            rows.push(BenchRow {
                algorithm: algorithm.into(),
                ell,
                reps,
                median_seconds: secs,
                value_re: v.re,
                value_im: v.im,
            });
        };
        let reference = if ell <= MAX_REF_MODES { Some(median_time(reps, || montrealer_ref(&a))?) } else { None };
        let fast = if ell <= MAX_FAST_MODES { Some(median_time(reps, || montrealer_fast(&a))?) } else { None };
        if let (Some((_, r)), Some((_, f))) = (reference, fast) {
            if (r - f).norm() > 1e-8 * (1.0 + r.norm()) {
                mismatches.push(format!("ell={ell}: mtl_ref {r} vs mtl_fast {f}"));
            }
        }
        if let Some(r) = reference {
            push("mtl_ref", r);
        }
        if let Some(f) = fast {
            push("mtl_fast", f);
        }
        if 2 * ell <= MAX_HAFNIAN_DIM {
            let q = fdiag(a.matrix(), &state.zeta_conj())?;
            push("lhaf_ref", median_time(reps, || loop_hafnian(&q))?);
        }
    }
    rows.sort_by(|x, y| x.algorithm.cmp(&y.algorithm).then(x.ell.cmp(&y.ell)));
    let global = Global { seed: Some(seed), out_dir: Some(global.out_dir.clone().unwrap_or_else(|| ".".into())) };
    let digest = config_digest(&json!({ "ell_min": ell_min, "ell_max": ell_max, "reps": reps, "seed": seed }));
    finish(&global, "bench", "bench.csv", csv_bytes(&rows)?, digest, started)?;
    if mismatches.is_empty() {
        Ok(())
    } else {
        Err(CliError::Mismatch(mismatches.join("; ")))
    }
}
