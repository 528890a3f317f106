use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use abc_enact::agent::{AgentConfig, AgentError, EpisodeSetup};
use abc_enact::batch::{compare, gamma_sweep, run_batch, sweep_spearman, Episode};
use abc_enact::model::ChunkKind;
use abc_enact::task::{AgentBlock, RunConfig, Task, TaskError};
use abc_enact::trace::{
    export_progression, group_policies, ingest_tsv, segment_ohrf, ColumnMap, ExportFormat,
    Thresholds, TraceError,
};

const EXIT_VALIDATION: u8 = 2;
const EXIT_INCOMPLETE: u8 = 3;
const EXIT_INGEST: u8 = 4;

#[derive(Parser)]
#[command(name = "abc-enact", version, about = "Enactive-inference translation-process simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Positional and lexical entropy of every chunk, plus the prior entropy.
    Entropy {
        #[arg(long)]
        task: Option<PathBuf>,
        /// Also write the table as TSV.
        #[arg(long)]
        tsv: Option<PathBuf>,
    },
    /// Run seeded episodes and write one trace per seed.
    Simulate(SimulateArgs),
    /// Paired comparison of two agents, or a policy-precision sweep.
    Compare(CompareArgs),
    /// Segment a logged trace into OHRF states and policy cycles.
    Segment(SegmentArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Run file; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    task: Option<PathBuf>,
    /// Preset name or agent file.
    #[arg(long)]
    agent: Option<String>,
    /// Ordering the reading cues favour.
    #[arg(long)]
    latent: Option<String>,
    /// Content-chunk cue reliability.
    #[arg(long)]
    reliability: Option<f64>,
    /// Seeds as a list (1,2,3) or range (0..100).
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated export formats.
    #[arg(long)]
    format: Option<String>,
    #[arg(long, default_value_t = 1000)]
    theta_pause: u64,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    task: Option<PathBuf>,
    /// Preset name or agent file.
    #[arg(long, default_value = "head_starter")]
    left: String,
    /// Preset name or agent file.
    #[arg(long, default_value = "large_context_planner")]
    right: String,
    /// Ordering label, or "cycle" to use seed mod the number of orderings.
    #[arg(long)]
    latent: Option<String>,
    #[arg(long)]
    reliability: Option<f64>,
    #[arg(long, default_value = "0..100")]
    seeds: String,
    #[arg(long, default_value_t = 100)]
    max_steps: usize,
    /// Sweep the left agent's maximum policy precision over these values.
    #[arg(long)]
    gamma_sweep: Option<String>,
    #[arg(long, default_value_t = 1000)]
    theta_pause: u64,
}

#[derive(Args)]
struct SegmentArgs {
    /// Tab-separated log with a header row.
    file: PathBuf,
    /// Column mapping such as time=t,kind=event,target=what.
    #[arg(long, default_value = "")]
    columns: String,
    #[arg(long, default_value_t = 1000)]
    theta_pause: u64,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn validation(message: impl ToString) -> Self {
        Self {
            code: EXIT_VALIDATION,
            message: message.to_string(),
        }
    }
}

impl From<TaskError> for Failure {
    fn from(e: TaskError) -> Self {
        Self::validation(e)
    }
}

impl From<AgentError> for Failure {
    fn from(e: AgentError) -> Self {
        Self::validation(e)
    }
}

impl From<TraceError> for Failure {
    fn from(e: TraceError) -> Self {
        let code = match e {
            TraceError::Ingest { .. } | TraceError::MissingColumn(_) => EXIT_INGEST,
            _ => EXIT_VALIDATION,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 1,
        message: format!("{}: {e}", path.display()),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| io_failure(path, e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Entropy { task, tsv } => cmd_entropy(task.as_deref(), tsv.as_deref()),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Segment(args) => cmd_segment(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_task(path: Option<&Path>) -> Result<Task, Failure> {
    Ok(match path {
        Some(p) => Task::load(p)?,
        None => Task::table2(),
    })
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>, Failure> {
    let bad = || Failure::validation(format!("bad seed list {spec:?}"));
    let seeds: Vec<u64> = if let Some((a, b)) = spec.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        (a..b).collect()
    } else {
        spec.split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if seeds.is_empty() {
        return Err(Failure::validation("seed list is empty"));
    }
    Ok(seeds)
}

fn parse_floats(spec: &str) -> Result<Vec<f64>, Failure> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v > 0.0)
                .ok_or_else(|| Failure::validation(format!("bad value {s:?} in {spec:?}")))
        })
        .collect()
}

fn agent_config(spec: &str) -> Result<AgentConfig, Failure> {
    let block = if spec.ends_with(".toml") {
        AgentBlock::load(Path::new(spec))?
    } else {
        AgentBlock::preset(spec)
    };
    Ok(block.resolve()?)
}

fn latent_index(task: &Task, label: &str) -> Result<usize, Failure> {
    task.space
        .index_of(label)
        .map_err(|e| Failure::validation(format!("latent: {e}")))
}

fn with_reliability(task: Task, r: Option<f64>) -> Result<Task, Failure> {
    match r {
        Some(r) if !(0.0..=1.0).contains(&r) => {
            Err(Failure::validation("reliability must lie in [0, 1]"))
        }
        Some(r) => Ok(task.with_content_reliability(r)),
        None => Ok(task),
    }
}

fn cmd_entropy(task: Option<&Path>, tsv: Option<&Path>) -> Result<u8, Failure> {
    let task = load_task(task)?;
    let space = &task.space;
    let mut table = String::from("chunk\tkind\ttarget\tpositional_bits\tlexical_bits\n");
    for chunk in space.table().chunks() {
        let pos = space.positional_entropy(chunk.id).map_err(Failure::validation)?;
        let lex = space.lexical_entropy(chunk.id).map_err(Failure::validation)?;
        let kind = match chunk.kind {
            ChunkKind::Content => "content",
            ChunkKind::Punctuation => "punctuation",
        };
        writeln!(table, "{}\t{kind}\t{}\t{pos:.6}\t{lex:.6}", chunk.id.0, chunk.target_text).unwrap();
    }
    writeln!(table, "prior\t\t\t{:.6}\t", space.prior().entropy()).unwrap();
    print!("{table}");
    if let Some(path) = tsv {
        write_file(path, table.as_bytes())?;
    }
    Ok(0)
}

fn final_label(task: &Task, episode: &Episode) -> String {
    let text = &episode.summary.final_target;
    (0..task.space.len())
        .find(|&i| episode.trace.complete && task.space.render(i) == *text)
        .map_or_else(|| "-".to_string(), |i| task.space.ordering(i).id.clone())
}

fn cmd_simulate(args: SimulateArgs) -> Result<u8, Failure> {
    let mut run = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => {
            let task = load_task(args.task.as_deref())?;
            RunConfig {
                setup: EpisodeSetup::new(task.latent),
                task,
                agent: AgentConfig::head_starter(),
                seeds: vec![0],
                max_steps: 100,
                output: None,
                formats: vec![ExportFormat::Tsv, ExportFormat::Svg],
            }
        }
    };
    if args.config.is_some() && args.task.is_some() {
        return Err(Failure::validation("give the task in the run file or with --task, not both"));
    }
    run.task = with_reliability(run.task, args.reliability)?;
    if let Some(a) = &args.agent {
        run.agent = agent_config(a)?;
    }
    if let Some(l) = &args.latent {
        run.setup.latent = latent_index(&run.task, l)?;
    }
    if let Some(s) = &args.seeds {
        run.seeds = parse_seeds(s)?;
    }
    if let Some(m) = args.max_steps {
        run.max_steps = m;
    }
    if let Some(o) = args.out {
        run.output = Some(o);
    }
    if let Some(f) = &args.format {
        run.formats = f
            .split(',')
            .map(|s| s.trim().parse())
            .collect::<Result<_, TraceError>>()?;
    }

    let thresholds = Thresholds {
        theta_pause_ms: args.theta_pause,
    };
    let model = run.task.model();
    let setup = run.setup.clone();
    let episodes = run_batch(
        &run.agent,
        &model,
        &run.task.prefs,
        &move |_| setup.clone(),
        &run.seeds,
        run.max_steps,
        &thresholds,
    )?;

    if let Some(dir) = &run.output {
        std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
        for e in &episodes {
            let segments = segment_ohrf(&e.trace, &thresholds);
            let cycles = group_policies(&segments);
            for &fmt in &run.formats {
                let path = dir.join(format!("trace-{}.{}", e.seed, fmt.extension()));
                write_file(&path, &export_progression(&e.trace, &segments, &cycles, fmt))?;
            }
        }
    }

    let mut summary = String::from(
        "seed\tstrategy\tcomplete\tfinal\tfirst_keystroke_ms\torientation_ms\ttotal_ms\treads\tpauses\trevisions\tcycles\n",
    );
    for e in &episodes {
        let s = &e.summary;
        let cycles: Vec<String> = group_policies(&segment_ohrf(&e.trace, &thresholds))
            .into_iter()
            .map(|c| c.label)
            .collect();
        writeln!(
            summary,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            e.seed,
            run.agent.strategy.label(),
            e.trace.complete,
            final_label(&run.task, e),
            s.first_keystroke_latency_ms,
            s.initial_orientation_ms,
            s.total_time_ms,
            s.read_count,
            s.pause_count,
            s.revision_count,
            cycles.join(" "),
        )
        .unwrap();
    }
    print!("{summary}");
    if let Some(dir) = &run.output {
        write_file(&dir.join("summary.tsv"), summary.as_bytes())?;
    }
    for e in episodes.iter().filter(|e| !e.trace.complete) {
        eprintln!("seed {}: translation incomplete after {} steps", e.seed, run.max_steps);
    }
    Ok(if episodes.iter().all(|e| e.trace.complete) {
        0
    } else {
        EXIT_INCOMPLETE
    })
}

fn cmd_compare(args: CompareArgs) -> Result<u8, Failure> {
    let task = with_reliability(load_task(args.task.as_deref())?, args.reliability)?;
    let seeds = parse_seeds(&args.seeds)?;
    if seeds.len() < 2 {
        return Err(Failure::validation("compare needs at least two seeds"));
    }
    let n = task.space.len();
    let fixed = match args.latent.as_deref() {
        Some("cycle") => None,
        Some(label) => Some(latent_index(&task, label)?),
        None => Some(task.latent),
    };
    let setup = move |seed: u64| EpisodeSetup::new(fixed.unwrap_or((seed % n as u64) as usize));
    let thresholds = Thresholds {
        theta_pause_ms: args.theta_pause,
    };
    let model = task.model();
    let left = agent_config(&args.left)?;

    if let Some(spec) = &args.gamma_sweep {
        let gammas = parse_floats(spec)?;
        let points = gamma_sweep(
            &left,
            &gammas,
            &model,
            &task.prefs,
            &setup,
            &seeds,
            args.max_steps,
            &thresholds,
        )?;
        println!("gamma_max\tmean_epistemic_actions");
        for p in &points {
            println!("{}\t{:.4}", p.gamma_max, p.mean_epistemic);
        }
        if points.len() >= 2 {
            println!("spearman\t{:.6}", sweep_spearman(&points));
        }
        return Ok(0);
    }

    let right = agent_config(&args.right)?;
    let cmp = compare(
        &left,
        &right,
        &model,
        &task.prefs,
        &setup,
        &seeds,
        args.max_steps,
        &thresholds,
    )?;
    println!("left\t{}\tright\t{}\tpairs\t{}", left.strategy.label(), right.strategy.label(), seeds.len());
    println!("metric\tleft_mean\tright_mean\tleft_win_rate");
    type Metric = fn(&abc_enact::trace::Summary) -> f64;
    let rows: [(&str, Metric); 9] = [
        ("first_keystroke_ms", |s| s.first_keystroke_latency_ms as f64),
        ("orientation_ms", |s| s.initial_orientation_ms as f64),
        ("o_segments", |s| s.segment_counts.o as f64),
        ("h_segments", |s| s.segment_counts.h as f64),
        ("r_segments", |s| s.segment_counts.r as f64),
        ("f_segments", |s| s.segment_counts.f as f64),
        ("revisions", |s| s.revision_count as f64),
        ("reads", |s| s.read_count as f64),
        ("pauses", |s| s.pause_count as f64),
    ];
    for (name, f) in rows {
        let m = cmp.metric(f);
        println!("{name}\t{:.4}\t{:.4}\t{:.4}", m.left_mean, m.right_mean, m.left_win_rate);
    }
    Ok(0)
}

fn cmd_segment(args: SegmentArgs) -> Result<u8, Failure> {
    let columns = ColumnMap::parse(&args.columns)?;
    let bytes = std::fs::read(&args.file).map_err(|e| Failure {
        code: EXIT_INGEST,
        message: format!("{}: {e}", args.file.display()),
    })?;
    let trace = ingest_tsv(&bytes, &columns)?;
    let thresholds = Thresholds {
        theta_pause_ms: args.theta_pause,
    };
    let segments = segment_ohrf(&trace, &thresholds);
    let cycles = group_policies(&segments);
    println!("state\tt_start\tt_end\tevents");
    for s in &segments {
        println!("{}\t{}\t{}\t{}", s.state, s.t_start, s.t_end, s.members.len());
    }
    let labels: Vec<&str> = cycles.iter().map(|c| c.label.as_str()).collect();
    println!("cycles\t{}", labels.join(" "));
    if let Some(path) = &args.svg {
        write_file(path, &export_progression(&trace, &segments, &cycles, ExportFormat::Svg))?;
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists_and_ranges() {
        assert_eq!(parse_seeds("3..6").unwrap(), vec![3, 4, 5]);
        assert_eq!(parse_seeds("7, 9").unwrap(), vec![7, 9]);
        assert_eq!(parse_seeds("5..5").unwrap_err().code, EXIT_VALIDATION);
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn sweep_values_must_be_positive() {
        assert_eq!(parse_floats("1,2,4").unwrap(), vec![1.0, 2.0, 4.0]);
        assert!(parse_floats("1,0").is_err());
    }
}
