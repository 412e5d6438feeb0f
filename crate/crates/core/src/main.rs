use clap::{Args, Parser, Subcommand};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use tbc::checker::{check_bundle, parse_bundle, Verdict};
use tbc::frontend::parse_problem;
use tbc::orchestrator::{bench, emit_scripts, solve, RunConfig, StrategyName};

#[derive(Parser)]
#[command(name = "tbc", version, about = "Inductive prover with template-based conjecturing")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Prove the goal of a problem file.
    Prove {
        file: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Write the proof bundle here.
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Print the run report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Replay a proof bundle against a theory.
    Check {
        bundle: PathBuf,
        #[arg(long)]
        theory: PathBuf,
    },
    /// Run every problem in a directory.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        series: Option<PathBuf>,
        /// Write one bundle per problem into this directory.
        #[arg(long)]
        bundles: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value = "tbc")]
    strategy: StrategyName,
    #[arg(long, default_value_t = 2)]
    rounds: usize,
    /// Node budgets only, no clocks.
    #[arg(long)]
    deterministic: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    elem_size: Option<usize>,
    #[arg(long)]
    hammer_depth: Option<usize>,
    #[arg(long)]
    simp_steps: Option<usize>,
    #[arg(long)]
    conjecture_nodes: Option<u64>,
    #[arg(long)]
    goal_nodes: Option<u64>,
    #[arg(long)]
    conjecture_ms: Option<u64>,
    #[arg(long)]
    goal_ms: Option<u64>,
    /// Test the goal for counterexamples first.
    #[arg(long)]
    refute_goal: bool,
    /// Also emit mirrored distributivity conjectures.
    #[arg(long)]
    extra_templates: bool,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, String> {
        let mut c = if self.deterministic {
            RunConfig::deterministic(self.seed)
        } else {
            RunConfig {
                seed: self.seed,
                ..Default::default()
            }
        };
        c.strategy = self.strategy;
        c.max_rounds = self.rounds;
        c.refute_goal = self.refute_goal;
        c.extra_templates = self.extra_templates;
        if let Some(v) = self.elem_size {
            c.elem_size = v;
        }
        if let Some(v) = self.hammer_depth {
            c.prover.hammer_depth = v;
        }
        if let Some(v) = self.simp_steps {
            c.prover.simp_steps = v;
        }
        if let Some(v) = self.conjecture_nodes {
            c.conjecture_nodes = v;
        }
        if let Some(v) = self.goal_nodes {
            c.goal_nodes = v;
        }
        if self.conjecture_ms.is_some() {
            c.conjecture_ms = self.conjecture_ms;
        }
        if self.goal_ms.is_some() {
            c.goal_ms = self.goal_ms;
        }
        c.validate()?;
        Ok(c)
    }
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Writes to stdout, ignoring a closed pipe.
fn say(text: &str) {
    let _ = std::io::stdout().write_all(text.as_bytes());
}

fn stem(path: &Path) -> String {
    path.file_stem().unwrap_or_default().to_string_lossy().to_string()
}

/// Ok(true) for success, Ok(false) for a negative answer, Err for usage
/// or input errors.
fn run(cli: Cli) -> Result<bool, String> {
    match cli.cmd {
        Cmd::Prove { file, run, emit, json } => {
            let cfg = run.config()?;
            let p = parse_problem(&read(&file)?, &stem(&file)).map_err(|d| format!("{}: {d}", file.display()))?;
            let r = solve(&p, &cfg)?;
            let bundle = emit_scripts(&p.theory.sig, &r);
            if let Some(out) = &emit {
                write(out, &bundle)?;
            }
            if json {
                say(&format!("{}\n", serde_json::to_string_pretty(&r).map_err(|e| e.to_string())?));
            } else {
                let c = &r.counts;
                say(&format!(
                    "{}: {} ({}), conjectures {} refuted {} proved {} unproved {}\n",
                    r.problem,
                    if r.solved { "solved" } else { "unsolved" },
                    r.solved_at.as_str(),
                    c.generated,
                    c.refuted,
                    c.proved,
                    c.unproved
                ));
                if emit.is_none() {
                    say(&bundle);
                }
            }
            Ok(r.solved)
        }
        Cmd::Check { bundle, theory } => {
            let p = parse_problem(&read(&theory)?, &stem(&theory)).map_err(|d| format!("{}: {d}", theory.display()))?;
            let scripts = parse_bundle(&p.theory, &read(&bundle)?).map_err(|e| format!("{}: {e}", bundle.display()))?;
            let verdicts = check_bundle(&p.theory, &scripts);
            let mut ok = true;
            for (s, v) in scripts.iter().zip(&verdicts) {
                match v {
                    Verdict::Accepted => say(&format!("{}: accepted\n", s.name)),
                    Verdict::Rejected(r) => {
                        ok = false;
                        say(&format!("{}: rejected at {:?}: {}\n", s.name, r.path, r.reason));
                    }
                }
            }
            Ok(ok)
        }
        Cmd::Bench {
            dir,
            run,
            csv,
            series,
            bundles,
        } => {
            let cfg = run.config()?;
            let out = bench(&dir, &cfg)?;
            match csv {
                Some(path) => write(&path, &out.csv)?,
                None => say(&out.csv),
            }
            if let Some(path) = series {
                write(&path, &out.series)?;
            }
            if let Some(d) = bundles {
                std::fs::create_dir_all(&d).map_err(|e| format!("{}: {e}", d.display()))?;
                for (name, text) in &out.bundles {
                    write(&d.join(format!("{name}.tbcp")), text)?;
                }
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
