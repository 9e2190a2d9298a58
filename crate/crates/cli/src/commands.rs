//! Subcommand implementations. Each one writes its artifacts under the output
//! directory and finishes with a manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fingermimic::analysis::{correlation_matrix, load_sweep, sweep_csv, table_a1, SweepRecord, PUBLISHED_LOG_STD_PCC};
use fingermimic::bayesopt::{grid_minimum, tune_controller, SweepBounds, PUBLISHED_SWEEP_PCC, SWEEP_BOUNDS};
use fingermimic::config::{ExperimentConfig, Precision};
use fingermimic::dynamics::PdGains;
use fingermimic::env::EnvSpec;
use fingermimic::motion::{load_motion_for, write_motion, SynthSpec};
use fingermimic::nn::Checkpoint;
use fingermimic::rl::{
    comparison_csv, curve_csv, policy_trace, published_comparison, random_baseline, render_comparison, retarget_trace,
    run_seeds, run_sweep, train_ppo, train_sac, Algo, ComparisonRow, CurveRow, SacConfig,
};
use fingermimic::Real;

use crate::{config_err, manifest, Cli, CliError, CliResult, Command};

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|source| CliError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Files written by one run, relative to the output directory when possible.
struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    fn write(&mut self, name: &str, contents: &str) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        write_file(&path, contents)?;
        self.files.push(name.to_string());
        Ok(path)
    }

    fn record(&mut self, path: &Path) {
        let shown = path.strip_prefix(&self.dir).unwrap_or(path);
        self.files.push(shown.display().to_string());
    }
}

/// Command-line overrides folded into the configuration, so the manifest
/// snapshot alone reproduces the run.
fn effective_config(cli: &Cli, mut cfg: ExperimentConfig) -> CliResult<ExperimentConfig> {
    if let Some(s) = cli.seed {
        cfg.seed = s;
        cfg.tune.seed = s;
        cfg.train.seeds = vec![s];
    }
    match &cli.command {
        Command::TuneController { budget, motion, .. } => {
            if let Some(b) = budget {
                cfg.tune.budget = *b;
            }
            if let Some(m) = motion {
                cfg.motion.file = Some(m.clone());
            }
        }
        Command::Train {
            algo,
            total_steps,
            motion,
            seeds,
        } => {
            if let Some(a) = algo {
                cfg.train.algo = (*a).into();
            }
            if let Some(n) = total_steps {
                cfg.ppo.total_steps = *n;
                cfg.sac.total_steps = *n;
            }
            if let Some(m) = motion {
                cfg.motion.file = Some(m.clone());
            }
            if let Some(s) = seeds {
                cfg.train.seeds = s.clone();
            }
        }
        Command::Evaluate { motion, .. } | Command::Retarget { motion, .. } => {
            if let Some(m) = motion {
                cfg.motion.file = Some(m.clone());
            }
        }
        Command::Sweep { budget, total_steps, .. } => {
            if let Some(b) = budget {
                cfg.sweep.budget = *b;
            }
            if let Some(n) = total_steps {
                cfg.ppo.total_steps = *n;
            }
        }
        _ => {}
    }
    cfg.validate().map_err(config_err)?;
    Ok(cfg)
}

fn spec_of<T: Real>(cfg: &ExperimentConfig) -> CliResult<EnvSpec<T>> {
    cfg.env_spec::<T>().map_err(config_err)
}

macro_rules! with_precision {
    ($p:expr, $f:ident ( $($arg:expr),* $(,)? )) => {
        match $p {
            Precision::F32 => $f::<f32>($($arg),*),
            Precision::F64 => $f::<f64>($($arg),*),
        }
    };
}

pub fn execute(cli: &Cli, base: ExperimentConfig, out: &Path, args: Vec<String>) -> CliResult<()> {
    let cfg = effective_config(cli, base)?;
    let mut outputs = Outputs::new(out);
    let p = cfg.precision;
    match &cli.command {
        Command::Convert { input, output } => convert(&cfg, input, output.as_deref(), &mut outputs)?,
        Command::Synth {
            kind,
            center,
            amplitude,
            frequency,
            duration,
            fps,
            output,
        } => {
            let spec = SynthSpec {
                kind: (*kind).into(),
                center: *center,
                amplitude: *amplitude,
                frequency: *frequency,
                duration: *duration,
                fps: *fps,
                seed: cfg.seed,
            };
            synth(&cfg, &spec, output.as_deref(), &mut outputs)?
        }
        Command::TuneController { bound, grid, .. } => {
            let bounds: Vec<f64> = match bound {
                Some(b) => vec![b.parse().expect("clap restricts the bound values")],
                None => SWEEP_BOUNDS.to_vec(),
            };
            with_precision!(p, tune(&cfg, &bounds, *grid, &mut outputs))?
        }
        Command::Train { .. } => with_precision!(p, train(&cfg, &mut outputs))?,
        Command::Evaluate { checkpoint, steps, .. } => match checkpoint {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
                match checkpoint_scalar(&text)?.as_str() {
                    "f32" => evaluate_checkpoint::<f32>(&cfg, &text, *steps, &mut outputs)?,
                    _ => evaluate_checkpoint::<f64>(&cfg, &text, *steps, &mut outputs)?,
                }
            }
            None => with_precision!(p, evaluate_oracle(&cfg, *steps, &mut outputs))?,
        },
        Command::Retarget { steps, .. } => with_precision!(p, retarget(&cfg, *steps, &mut outputs))?,
        Command::Compare {
            motion,
            checkpoints,
            steps,
            published,
        } => compare(&cfg, motion, checkpoints, *steps, *published, &mut outputs)?,
        Command::Sweep { mode, .. } => with_precision!(p, sweep(&cfg, (*mode).into(), &mut outputs))?,
        Command::Analyze { sweep, svg, .. } => analyze(sweep.as_deref(), *svg, &mut outputs)?,
        Command::Replay { .. } => unreachable!("replay is dispatched before configuration"),
    }
    let path = manifest::write(&outputs.dir, cli.command.name(), args, &cfg, outputs.files)?;
    log::info!("manifest written to {}", path.display());
    Ok(())
}

fn convert(cfg: &ExperimentConfig, input: &Path, output: Option<&Path>, outputs: &mut Outputs) -> CliResult<()> {
    let topo = cfg.topology::<f64>().map_err(config_err)?;
    let motion = load_motion_for(input, &topo)?;
    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("motion");
    let stem = stem.strip_suffix(".motion").unwrap_or(stem);
    let path = match output {
        Some(p) => p.to_path_buf(),
        None => outputs.dir.join(format!("{stem}.motion.json")),
    };
    write_motion(&motion, &topo, &path)?;
    outputs.record(&path);
    println!(
        "wrote {} ({} frames x {} joints at {} fps)",
        path.display(),
        motion.frame_count(),
        motion.joint_count(),
        motion.fps
    );
    Ok(())
}

fn synth(cfg: &ExperimentConfig, spec: &SynthSpec, output: Option<&Path>, outputs: &mut Outputs) -> CliResult<()> {
    let topo = cfg.topology::<f64>().map_err(config_err)?;
    let motion = fingermimic::motion::synth_motion(spec, &topo)?;
    let name = format!("{:?}", spec.kind).to_lowercase();
    let path = match output {
        Some(p) => p.to_path_buf(),
        None => outputs.dir.join(format!("{name}.motion.json")),
    };
    write_motion(&motion, &topo, &path)?;
    outputs.record(&path);
    println!("wrote {} ({} frames)", path.display(), motion.frame_count());
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn tune<T: Real>(cfg: &ExperimentConfig, bounds: &[f64], grid: Option<usize>, outputs: &mut Outputs) -> CliResult<()> {
    let spec = spec_of::<T>(cfg)?;
    let mut summary =
        String::from("bound,kp,kd,epsilon,pcc_kp,pcc_kd,published_pcc_kp,published_pcc_kd,grid_kp,grid_kd,grid_epsilon\n");
    for &b in bounds {
        let bound = SweepBounds::new(b)?;
        let mut tcfg = cfg.tune;
        tcfg.workers = cfg.workers.max(tcfg.workers);
        let result = tune_controller(&spec, bound, &tcfg)?;
        outputs.write(&format!("tune_bound{b}.csv"), &result.trace_csv())?;
        println!("{}", result.summary());
        let published = PUBLISHED_SWEEP_PCC.iter().find(|r| r.0 == b);
        let grid_min = grid.map(|n| grid_minimum(&spec, bound, n, cfg.workers));
        if let Some((g, v)) = grid_min {
            println!(
                "  grid {n}x{n}: kp = {:.4}, kd = {:.4}, epsilon = {v:.6} (incumbent / grid = {:.4})",
                g.kp,
                g.kd,
                result.best_epsilon / v,
                n = grid.unwrap_or(0)
            );
        }
        let _ = writeln!(
            summary,
            "{b},{},{},{},{},{},{},{},{},{},{}",
            result.best.kp,
            result.best.kd,
            result.best_epsilon,
            opt(result.pcc_kp),
            opt(result.pcc_kd),
            opt(published.map(|r| r.1)),
            opt(published.map(|r| r.2)),
            opt(grid_min.map(|g| g.0.kp)),
            opt(grid_min.map(|g| g.0.kd)),
            opt(grid_min.map(|g| g.1)),
        );
    }
    let reference = PdGains::<f64>::reference_best();
    println!("published incumbent for the original hand: kp = {}, kd = {}", reference.kp, reference.kd);
    outputs.write("tune_summary.csv", &summary)?;
    Ok(())
}

fn train<T: Real>(cfg: &ExperimentConfig, outputs: &mut Outputs) -> CliResult<()> {
    let spec = spec_of::<T>(cfg)?;
    let algo = cfg.train.algo;
    let opts = cfg.train.options();
    let results = run_seeds(&cfg.train.seeds, cfg.workers, |seed| {
        let mut curve: Vec<CurveRow> = Vec::new();
        let outcome = match algo {
            Algo::Ppo => {
                let mut c = cfg.ppo.clone();
                c.seed = seed;
                train_ppo(&spec, &c, &opts, &mut curve)
            }
            Algo::Sac => {
                let c = SacConfig { seed, ..cfg.sac.clone() };
                train_sac(&spec, &c, &opts, &mut curve)
            }
        };
        (seed, curve, outcome)
    });
    let mut summary = String::from("algo,seed,env_steps,final_eval,final_eval_per_step\n");
    let mut failure = None;
    for (seed, curve, outcome) in results {
        let name = algo.name();
        outputs.write(&format!("curve_{name}_seed{seed}.csv"), &curve_csv(&curve))?;
        match outcome {
            Ok(o) => {
                outputs.write(&format!("{name}_seed{seed}.checkpoint.json"), &o.checkpoint.to_json()?)?;
                let per_step = o.final_eval / opts.eval_steps.max(1) as f64;
                println!("{name} seed {seed}: {} env steps, final evaluation {:.2} ({per_step:.4} per step)", o.env_steps, o.final_eval);
                let _ = writeln!(summary, "{name},{seed},{},{},{per_step}", o.env_steps, o.final_eval);
            }
            Err(e) => {
                log::error!("{name} seed {seed} failed: {e}");
                failure.get_or_insert(e);
            }
        }
    }
    outputs.write("train_summary.csv", &summary)?;
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn checkpoint_scalar(text: &str) -> CliResult<String> {
    #[derive(serde::Deserialize)]
    struct Head {
        scalar: String,
    }
    let head: Head = serde_json::from_str(text).map_err(|e| fingermimic::Error::Parse {
        context: "checkpoint".into(),
        message: e.to_string(),
    })?;
    Ok(head.scalar)
}

fn evaluate_checkpoint<T: Real>(cfg: &ExperimentConfig, text: &str, steps: usize, outputs: &mut Outputs) -> CliResult<()> {
    let ckpt = Checkpoint::<T>::from_json(text)?;
    let spec = spec_of::<T>(cfg)?;
    let trace = policy_trace(&ckpt.policy, &ckpt.normalizer, &spec, steps)?;
    outputs.write("evaluate.csv", &trace.to_csv())?;
    println!("cumulative reward ({} policy, {steps} steps): {:.4}", ckpt.algo, trace.total_reward());
    Ok(())
}

fn evaluate_oracle<T: Real>(cfg: &ExperimentConfig, steps: usize, outputs: &mut Outputs) -> CliResult<()> {
    let spec = spec_of::<T>(cfg)?;
    let trace = retarget_trace(&spec, steps)?;
    outputs.write("evaluate.csv", &trace.to_csv())?;
    println!("cumulative reward (retargeting oracle, {steps} steps): {:.4}", trace.total_reward());
    Ok(())
}

fn retarget<T: Real>(cfg: &ExperimentConfig, steps: usize, outputs: &mut Outputs) -> CliResult<()> {
    let spec = spec_of::<T>(cfg)?;
    let trace = retarget_trace(&spec, steps)?;
    let random = random_baseline(&spec, steps, cfg.seed)?;
    outputs.write("retarget.csv", &trace.to_csv())?;
    outputs.write(
        "retarget_summary.csv",
        &format!(
            "motion,steps,kp,kd,retarget_reward,random_reward_per_step\n{},{steps},{},{},{},{}\n",
            spec.motion.name,
            cfg.gains.kp,
            cfg.gains.kd,
            trace.total_reward(),
            random
        ),
    )?;
    println!(
        "retargeting: cumulative reward {:.4} over {steps} steps; random actions: {:.4} per step",
        trace.total_reward(),
        random
    );
    Ok(())
}

fn checkpoint_files(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_str().is_some_and(|s| s.ends_with(".checkpoint.json")))
        .collect();
    files.sort();
    Ok(files)
}

fn compare_row(cfg: &ExperimentConfig, dir: &Path, steps: usize) -> CliResult<ComparisonRow> {
    let spec = spec_of::<f64>(cfg)?;
    let retarget = retarget_trace(&spec, steps)?.total_reward();
    let (mut ppo, mut sac) = (Vec::new(), Vec::new());
    for path in checkpoint_files(dir)? {
        let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
        let (algo, reward) = match checkpoint_scalar(&text)?.as_str() {
            "f32" => {
                let c = Checkpoint::<f32>::from_json(&text)?;
                let s = spec_of::<f32>(cfg)?;
                (c.algo.clone(), policy_trace(&c.policy, &c.normalizer, &s, steps)?.total_reward() as f64)
            }
            _ => {
                let c = Checkpoint::<f64>::from_json(&text)?;
                (c.algo.clone(), policy_trace(&c.policy, &c.normalizer, &spec, steps)?.total_reward())
            }
        };
        log::info!("{}: {algo} reward {reward:.2}", path.display());
        match algo.as_str() {
            "ppo" => ppo.push(reward),
            "sac" => sac.push(reward),
            other => log::warn!("skipping {} with unknown algorithm {other}", path.display()),
        }
    }
    Ok(ComparisonRow::from_runs(&spec.motion.name, retarget, &ppo, &sac))
}

fn compare(
    cfg: &ExperimentConfig,
    motions: &[PathBuf],
    checkpoints: &Path,
    steps: usize,
    published: bool,
    outputs: &mut Outputs,
) -> CliResult<()> {
    let mut rows = Vec::new();
    if motions.is_empty() {
        rows.push(compare_row(cfg, checkpoints, steps)?);
    }
    for m in motions {
        let mut c = cfg.clone();
        c.motion.file = Some(m.clone());
        let stem = m.file_stem().and_then(|s| s.to_str()).unwrap_or("motion");
        let stem = stem.strip_suffix(".motion").unwrap_or(stem);
        rows.push(compare_row(&c, &checkpoints.join(stem), steps)?);
    }
    outputs.write("comparison.csv", &comparison_csv(&rows))?;
    print!("{}", render_comparison(&rows));
    if published {
        let p = published_comparison();
        println!("\npublished (original hand, 10 seeds):");
        print!("{}", render_comparison(&p));
        outputs.write("published_comparison.csv", &comparison_csv(&p))?;
    }
    Ok(())
}

fn sweep<T: Real>(cfg: &ExperimentConfig, mode: fingermimic::rl::SweepMode, outputs: &mut Outputs) -> CliResult<()> {
    let spec = spec_of::<T>(cfg)?;
    let records = run_sweep(
        &spec,
        &cfg.sweep.grid,
        &cfg.ppo,
        &cfg.train.options(),
        mode,
        cfg.sweep.budget,
        cfg.seed,
        |i, r| log::info!("grid point {i}: reward {:.2}", r.mean_reward),
    )?;
    outputs.write("sweep.csv", &sweep_csv(&records))?;
    println!("{} runs", records.len());
    if let Some(best) = records.iter().max_by(|a, b| a.mean_reward.total_cmp(&b.mean_reward)) {
        println!("best: {best:?}");
    }
    if records.len() >= 2 {
        write_matrices(&records, false, outputs)?;
    }
    Ok(())
}

fn write_matrices(records: &[SweepRecord], svg: bool, outputs: &mut Outputs) -> CliResult<()> {
    let raw = correlation_matrix(records, false)?;
    let log = correlation_matrix(records, true)?;
    outputs.write("matrix.csv", &raw.to_csv())?;
    outputs.write("matrix_log10.csv", &log.to_csv())?;
    let mut pcc = String::from("parameter,pcc_raw,pcc_log10\n");
    for ((name, r), (_, l)) in raw.reward_column().into_iter().zip(log.reward_column()) {
        let _ = writeln!(pcc, "{name},{},{}", opt(r), opt(l));
    }
    outputs.write("reward_pcc.csv", &pcc)?;
    if svg {
        outputs.write("matrix.svg", &raw.to_svg())?;
        outputs.write("matrix_log10.svg", &log.to_svg())?;
    }
    let log_std = raw.reward_column()[3].1;
    match log_std {
        Some(r) => println!("PCC(log_std_init, mean_reward) = {r:.4} (published: {PUBLISHED_LOG_STD_PCC})"),
        None => println!("PCC(log_std_init, mean_reward) undefined (constant column)"),
    }
    Ok(())
}

fn analyze(sweep: Option<&Path>, svg: bool, outputs: &mut Outputs) -> CliResult<()> {
    let records = match sweep {
        Some(p) => load_sweep(p)?,
        None => table_a1(),
    };
    let (lo, hi) = records.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        (lo.min(r.mean_reward), hi.max(r.mean_reward))
    });
    println!("{} runs, mean_reward min {lo:.2} max {hi:.2}", records.len());
    write_matrices(&records, svg, outputs)
}
