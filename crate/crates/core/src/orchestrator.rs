//! The top-level loop: attack the goal, conjecture, refute, prove in
//! rounds, re-attack. Also proof emission and the benchmark harness.

use crate::checker::{check, print_bundle, ProofScript};
use crate::conjecture::{collect_pool, generate_conjectures, Conjecture, GenOptions, Status};
use crate::frontend::{parse_problem, Problem, Theory};
use crate::kernel::{Formula, Signature};
use crate::prover::{prove, Budget, ProverConfig, Strategy};
use crate::refuter::{refute, refute_all, RefutationBudget, Verdict};
use indexmap::IndexMap;
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

/// Search nodes per virtual millisecond in deterministic mode.
pub const NODES_PER_MS: u64 = 10;

#[derive(Clone, Debug)]
pub struct LemmaEntry {
    pub name: String,
    pub conjecture: usize,
    pub script: ProofScript,
}

/// Append-only store of proved lemmas. A script is checked before it
/// goes in.
#[derive(Clone, Debug, Default)]
pub struct LemmaStore {
    entries: Vec<LemmaEntry>,
    formulas: IndexMap<String, Formula>,
}

impl LemmaStore {
    pub fn insert(&mut self, theory: &Theory, conjecture: usize, script: ProofScript) -> Result<(), String> {
        if self.formulas.contains_key(&script.name) {
            return Err(format!("duplicate lemma `{}`", script.name));
        }
        let v = check(theory, &self.formulas, &script);
        if !v.is_accepted() {
            return Err(format!("checker rejected `{}`: {v:?}", script.name));
        }
        self.formulas.insert(script.name.clone(), script.statement.clone());
        self.entries.push(LemmaEntry {
            name: script.name.clone(),
            conjecture,
            script,
        });
        Ok(())
    }

    pub fn formulas(&self) -> &IndexMap<String, Formula> {
        &self.formulas
    }

    pub fn entries(&self) -> &[LemmaEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyName {
    Tbc,
    Tap21,
}

impl StrategyName {
    pub fn tree(self) -> Strategy {
        match self {
            StrategyName::Tbc => Strategy::tbc(),
            StrategyName::Tap21 => Strategy::tap21(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyName::Tbc => "tbc",
            StrategyName::Tap21 => "tap21",
        }
    }
}

impl std::str::FromStr for StrategyName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tbc" => Ok(StrategyName::Tbc),
            "tap21" => Ok(StrategyName::Tap21),
            _ => Err(format!("unknown strategy `{s}` (expected tbc or tap21)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub strategy: StrategyName,
    pub max_rounds: usize,
    pub deterministic: bool,
    pub seed: u64,
    pub elem_size: usize,
    pub extra_templates: bool,
    pub prover: ProverConfig,
    /// Node budget for a conjecture in an odd round.
    pub conjecture_nodes: u64,
    /// Multiplier for even rounds.
    pub even_round_factor: u64,
    pub goal_nodes: u64,
    /// Wall-clock limits; must be `None` in deterministic mode.
    pub conjecture_ms: Option<u64>,
    pub goal_ms: Option<u64>,
    pub refute_ms: Option<(u64, u64)>,
    /// Diagnostic: test the goal itself before proving.
    pub refute_goal: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            strategy: StrategyName::Tbc,
            max_rounds: 2,
            deterministic: false,
            seed: 0,
            elem_size: 2,
            extra_templates: false,
            prover: ProverConfig::default(),
            conjecture_nodes: 20_000,
            even_round_factor: 3,
            goal_nodes: 60_000,
            conjecture_ms: Some(10_000),
            goal_ms: Some(30_000),
            refute_ms: Some((1000, 2000)),
            refute_goal: false,
        }
    }
}

impl RunConfig {
    pub fn deterministic(seed: u64) -> Self {
        RunConfig {
            deterministic: true,
            seed,
            conjecture_ms: None,
            goal_ms: None,
            refute_ms: None,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            self.conjecture_nodes,
            self.goal_nodes,
            self.even_round_factor,
            self.prover.simp_steps as u64,
            self.prover.hammer_depth as u64,
            self.prover.hammer_nodes as u64,
            self.prover.induct_candidates as u64,
        ];
        if positive.contains(&0) {
            return Err("budgets must be positive".into());
        }
        let ms = [self.conjecture_ms, self.goal_ms, self.refute_ms.map(|p| p.0), self.refute_ms.map(|p| p.1)];
        if ms.contains(&Some(0)) {
            return Err("time limits must be positive".into());
        }
        if self.deterministic && ms.iter().any(Option::is_some) {
            return Err("deterministic mode cannot use wall-clock budgets".into());
        }
        Ok(())
    }

    fn refutation_budget(&self) -> RefutationBudget {
        match self.refute_ms {
            Some((a, b)) => RefutationBudget {
                limit: crate::refuter::Limit::WallMs(a, b),
                ..Default::default()
            },
            None => RefutationBudget::deterministic(),
        }
    }

    fn budget(&self, nodes: u64, ms: Option<u64>) -> Budget {
        let b = Budget::nodes(nodes);
        match ms {
            Some(ms) => b.with_deadline(Duration::from_millis(ms)),
            None => b,
        }
    }

    fn round_budget(&self, round: usize) -> Budget {
        let factor = if round.is_multiple_of(2) { self.even_round_factor } else { 1 };
        self.budget(self.conjecture_nodes * factor, self.conjecture_ms.map(|m| m * factor))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolvedAt {
    Round0,
    Round1,
    Round2,
    Unsolved,
}

impl SolvedAt {
    fn round(r: usize) -> SolvedAt {
        match r {
            0 => SolvedAt::Round0,
            1 => SolvedAt::Round1,
            _ => SolvedAt::Round2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SolvedAt::Round0 => "round0",
            SolvedAt::Round1 => "round1",
            SolvedAt::Round2 => "round2",
            SolvedAt::Unsolved => "unsolved",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub generated: usize,
    pub refuted: usize,
    pub proved: usize,
    pub unproved: usize,
    /// Survivors whose hypotheses no test satisfied. Informational; they
    /// are also counted as proved or unproved.
    pub vacuous: usize,
}

/// Milliseconds per phase. Virtual (search nodes over
/// [`NODES_PER_MS`]) in deterministic mode.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Timings {
    pub goal_ms: u64,
    pub refute_ms: u64,
    pub conjecture_ms: u64,
    pub total_ms: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjectureReport {
    pub id: usize,
    pub template: String,
    pub statement: String,
    /// pending, refuted, proved or unproved.
    pub status: String,
    pub lemma: Option<String>,
    pub attempts: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub problem: String,
    pub strategy: StrategyName,
    pub solved: bool,
    pub solved_at: SolvedAt,
    pub counts: Counts,
    pub timings: Timings,
    pub conjectures: Vec<ConjectureReport>,
    /// Lemmas the goal proof depends on, transitively.
    pub goal_dependencies: Vec<String>,
    /// Set when `refute_goal` found a counterexample.
    pub goal_counterexample: Option<String>,
    /// Proved lemmas in store order, then the goal script if any.
    #[serde(skip)]
    pub scripts: Vec<ProofScript>,
}

struct Clock {
    deterministic: bool,
    start: Instant,
}

impl Clock {
    fn ms(&self, nodes: u64) -> u64 {
        if self.deterministic {
            nodes / NODES_PER_MS
        } else {
            self.start.elapsed().as_millis() as u64
        }
    }
}

fn timed<T>(deterministic: bool, f: impl FnOnce() -> (T, u64)) -> (T, u64) {
    let clock = Clock {
        deterministic,
        start: Instant::now(),
    };
    let (v, nodes) = f();
    (v, clock.ms(nodes))
}

/// Name of the goal's script in emitted bundles.
pub const GOAL_NAME: &str = "original_goal_0";

fn dependency_closure(store: &LemmaStore, goal: &ProofScript) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut todo = goal.dependencies();
    while let Some(d) = todo.pop() {
        if seen.insert(d.clone()) {
            if let Some(e) = store.entries().iter().find(|e| e.name == d) {
                todo.extend(e.script.dependencies());
            }
        }
    }
    store.entries().iter().map(|e| e.name.clone()).filter(|n| seen.contains(n)).collect()
}

/// Runs the whole pipeline on one problem.
pub fn solve(problem: &Problem, cfg: &RunConfig) -> Result<RunReport, String> {
    cfg.validate()?;
    let th = &problem.theory;
    let strategy = cfg.strategy.tree();
    let mut store = LemmaStore::default();
    let mut timings = Timings::default();
    let mut report = RunReport {
        problem: problem.name.clone(),
        strategy: cfg.strategy,
        solved: false,
        solved_at: SolvedAt::Unsolved,
        counts: Counts::default(),
        timings: Timings::default(),
        conjectures: vec![],
        goal_dependencies: vec![],
        goal_counterexample: None,
        scripts: vec![],
    };

    if cfg.refute_goal {
        let (v, ms) = timed(cfg.deterministic, || (refute(th, &problem.goal, &cfg.refutation_budget(), cfg.seed), 0));
        timings.refute_ms += ms;
        if let Verdict::CounterexampleFound(w) = v {
            report.goal_counterexample = Some(w.iter().map(|(n, t)| format!("{n} = {t}")).collect::<Vec<_>>().join(", "));
            timings.total_ms = timings.refute_ms;
            report.timings = timings;
            return Ok(report);
        }
    }

    let attack_goal = |store: &LemmaStore, timings: &mut Timings| {
        let (s, ms) = timed(cfg.deterministic, || {
            prove(
                th,
                store.formulas(),
                GOAL_NAME,
                &problem.goal,
                &strategy,
                cfg.prover,
                cfg.budget(cfg.goal_nodes, cfg.goal_ms),
            )
        });
        timings.goal_ms += ms;
        s
    };

    let mut goal_script = attack_goal(&store, &mut timings);
    let mut conjs: Vec<Conjecture> = Vec::new();
    let mut attempts: Vec<usize> = Vec::new();
    if goal_script.is_some() {
        report.solved_at = SolvedAt::Round0;
    } else if cfg.max_rounds > 0 {
        let pool = collect_pool(problem);
        let opts = GenOptions {
            elem_size: cfg.elem_size,
            extra_templates: cfg.extra_templates,
        };
        conjs = generate_conjectures(&pool, th, &opts);
        attempts = vec![0; conjs.len()];
        let (vacuous, ms) = timed(cfg.deterministic, || (refute_all(th, &mut conjs, &cfg.refutation_budget(), cfg.seed), 0));
        timings.refute_ms += ms;
        report.counts.vacuous = vacuous.len();

        for round in 1..=cfg.max_rounds {
            for c in conjs.iter_mut().filter(|c| c.status == Status::Pending) {
                attempts[c.id] += 1;
                let name = format!("{}_{}", c.template.lemma_prefix(), c.id);
                let (s, ms) = timed(cfg.deterministic, || {
                    prove(th, store.formulas(), &name, &c.statement, &strategy, cfg.prover, cfg.round_budget(round))
                });
                timings.conjecture_ms += ms;
                if let Some(s) = s {
                    store.insert(th, c.id, s)?;
                    c.status = Status::Proved(name);
                }
            }
            goal_script = attack_goal(&store, &mut timings);
            if goal_script.is_some() {
                report.solved_at = SolvedAt::round(round);
                break;
            }
        }
        for c in conjs.iter_mut().filter(|c| c.status == Status::Pending) {
            c.status = Status::Unproved;
        }
    }

    for c in &conjs {
        match c.status {
            Status::Refuted(_) => report.counts.refuted += 1,
            Status::Proved(_) => report.counts.proved += 1,
            Status::Unproved => report.counts.unproved += 1,
            Status::Pending => {}
        }
    }
    report.counts.generated = conjs.len();
    report.conjectures = conjs
        .iter()
        .map(|c| {
            let (status, lemma) = match &c.status {
                Status::Pending => ("pending", None),
                Status::Refuted(_) => ("refuted", None),
                Status::Proved(n) => ("proved", Some(n.clone())),
                Status::Unproved => ("unproved", None),
            };
            ConjectureReport {
                id: c.id,
                template: c.template.lemma_prefix().to_string(),
                statement: c.statement.to_string(),
                status: status.to_string(),
                lemma,
                attempts: attempts[c.id],
            }
        })
        .collect();
    report.scripts = store.entries().iter().map(|e| e.script.clone()).collect();
    if let Some(g) = goal_script {
        let v = check(th, store.formulas(), &g);
        if !v.is_accepted() {
            return Err(format!("checker rejected the goal script: {v:?}"));
        }
        report.goal_dependencies = dependency_closure(&store, &g);
        report.scripts.push(g);
        report.solved = true;
    }
    timings.total_ms = timings.goal_ms + timings.refute_ms + timings.conjecture_ms;
    report.timings = timings;
    Ok(report)
}

/// The proof bundle: lemmas in the order they were proved (which is a
/// dependency order), then the goal.
pub fn emit_scripts(sig: &Signature, report: &RunReport) -> String {
    print_bundle(sig, &report.scripts)
}

pub const CSV_HEADER: &str = "problem,strategy,solved,solved_round,time_ms,n_conjectures,n_refuted,n_proved,n_unproved";

#[derive(Clone, Debug, Default)]
pub struct BenchOutput {
    pub csv: String,
    /// `time_ms<TAB>cumulative solved %`, one line per solved problem.
    pub series: String,
    /// Emitted bundle per solved or partially proved problem.
    pub bundles: Vec<(String, String)>,
    pub reports: Vec<RunReport>,
}

/// Runs every `.tbc` file in `dir`, in name order.
pub fn bench(dir: &Path, cfg: &RunConfig) -> Result<BenchOutput, String> {
    cfg.validate()?;
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tbc"))
        .collect();
    files.sort();
    let mut out = BenchOutput {
        csv: format!("{CSV_HEADER}\n"),
        ..Default::default()
    };
    let strat = cfg.strategy.as_str();
    let mut solved_times = Vec::new();
    let mut total = Counts::default();
    let mut total_ms = 0;
    for path in &files {
        let name = path.file_stem().unwrap_or_default().to_string_lossy().to_string();
        let parsed = std::fs::read_to_string(path)
            .map_err(|e| e.to_string())
            .and_then(|text| parse_problem(&text, &name).map_err(|d| d.to_string()));
        let run = parsed.and_then(|p| solve(&p, cfg).map(|r| (p, r)));
        let (p, r) = match run {
            Ok(x) => x,
            Err(_) => {
                writeln!(out.csv, "{name},{strat},error,,,,,,").unwrap();
                continue;
            }
        };
        let c = &r.counts;
        writeln!(
            out.csv,
            "{name},{strat},{},{},{},{},{},{},{}",
            r.solved,
            r.solved_at.as_str(),
            r.timings.total_ms,
            c.generated,
            c.refuted,
            c.proved,
            c.unproved
        )
        .unwrap();
        total.generated += c.generated;
        total.refuted += c.refuted;
        total.proved += c.proved;
        total.unproved += c.unproved;
        total_ms += r.timings.total_ms;
        if r.solved {
            solved_times.push(r.timings.total_ms);
        }
        if !r.scripts.is_empty() {
            out.bundles.push((name, emit_scripts(&p.theory.sig, &r)));
        }
        out.reports.push(r);
    }
    if !files.is_empty() {
        let n = files.len();
        let pct = 100.0 * solved_times.len() as f64 / n as f64;
        writeln!(
            out.csv,
            "summary,{strat},{}/{n},{pct:.1}%,{total_ms},{},{},{},{}",
            solved_times.len(),
            total.generated,
            total.refuted,
            total.proved,
            total.unproved
        )
        .unwrap();
    }
    solved_times.sort_unstable();
    out.series = "time_ms\tsolved_pct\n".to_string();
    for (i, t) in solved_times.iter().enumerate() {
        let pct = 100.0 * (i + 1) as f64 / files.len() as f64;
        writeln!(out.series, "{t}\t{pct:.1}").unwrap();
    }
    Ok(out)
}
