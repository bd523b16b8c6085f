//! Command-line front end.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::action::{portrait, root_permutation, switch_parity_transitive, GroupWord, SwitchParity};
use crate::automaton::MealyAutomaton;
use crate::error::{Error, Result};
use crate::family::{build_family, family_script, max_certificate_level, transitivity_certificate, FamilyMode, FamilySpec};
use crate::quotient::{
    check_even_sections, check_stab_equality, squarefree_orbit_table, stabilizer_index_table, state_generators,
    OrbitRow, MAX_STAB_EQUALITY_LEVEL,
};
use crate::report::{CertReport, Verdict};
use crate::word_problem::{
    certify_free_product, enumerate_group_bounded, is_trivial, order_bounded, CertifyOptions, GroupSize,
    DEFAULT_CLOSURE_BUDGET,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "agk", version, about = "Exact computations for groups generated by invertible Mealy automata")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// States, alphabet, invertibility, bireversibility and involutions
    Inspect {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
    },
    /// Bounded check that the states generate a free product of groups of order 2
    Certify {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
        /// Longest reduced word checked
        #[arg(long, default_value_t = 10)]
        max_length: u32,
        /// Skip this many reduced words (length-then-lex order) checked by an earlier run
        #[arg(long, default_value_t = 0)]
        resume_from: u64,
    },
    /// Orbits of the dual group on the square-free levels of its tree
    DualOrbits {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
        /// Deepest level; defaults to 8 for B4, 6 for larger family members and 4 for scripts
        #[arg(long)]
        max_level: Option<usize>,
    },
    /// Orders of level quotients and the stabilizer lemmas
    StabTable {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        max_level: usize,
    },
    /// Triviality, order, root permutation, portrait and switch parity of a group word
    Word {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        common: Common,
        /// Word such as `a*b^-1*c`; the first factor acts first
        #[arg(long, short = 'w', allow_hyphen_values = true)]
        word: String,
        /// Portrait depth
        #[arg(long, default_value_t = 3)]
        depth: usize,
        /// Largest order searched
        #[arg(long, default_value_t = 64)]
        max_order: usize,
        /// Levels examined by the switch-parity test (binary alphabets)
        #[arg(long, default_value_t = 10)]
        switch_depth: usize,
    },
    /// Graphviz diagram of the automaton
    Dot {
        #[command(flatten)]
        input: Input,
    },
    /// Recursion script of a family member
    Script {
        #[command(flatten)]
        input: Input,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Input {
    /// Recursion script
    pub script: Option<PathBuf>,
    /// Family member, `n=6` or `6`
    #[arg(long)]
    pub family: Option<String>,
    /// Permutation bits of the chain c, q1, …, d (1 = swap); defaults to all swaps
    #[arg(long)]
    pub sigma: Option<String>,
    /// Allow identity permutations at the ends of the chain
    #[arg(long)]
    pub exploration: bool,
    /// Work with the dual automaton
    #[arg(long)]
    pub dual: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Largest section closure explored per word
    #[arg(long, env = "AGK_BUDGET_CLOSURE", default_value_t = DEFAULT_CLOSURE_BUDGET)]
    pub budget_closure: usize,
    /// Probe the group size up to this many elements (inspect)
    #[arg(long)]
    pub budget_elements: Option<usize>,
    /// Worker threads
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Recorded in reports
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Add wall-clock time to reports (output is then not reproducible)
    #[arg(long)]
    pub timing: bool,
}

pub struct Loaded {
    pub automaton: MealyAutomaton,
    pub label: String,
    pub family: Option<FamilySpec>,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidFamily(msg.into())
}

pub fn parse_family(text: &str) -> Result<usize> {
    let t = text.trim();
    let t = t.strip_prefix("n=").unwrap_or(t);
    t.parse().map_err(|_| usage(format!("bad family `{text}`, expected n=<states>")))
}

impl Input {
    pub fn family_spec(&self) -> Result<Option<FamilySpec>> {
        let Some(f) = &self.family else {
            if self.sigma.is_some() || self.exploration {
                return Err(usage("--sigma and --exploration need --family"));
            }
            return Ok(None);
        };
        let n = parse_family(f)?;
        let mode = if self.exploration {
            FamilyMode::Exploration
        } else {
            FamilyMode::Theorem
        };
        let sigma = match &self.sigma {
            Some(s) => FamilySpec::parse_sigma(s)?,
            None => vec![true; n.saturating_sub(2)],
        };
        FamilySpec::new(n, sigma, mode).map(Some)
    }

    pub fn load(&self) -> Result<Loaded> {
        let family = self.family_spec()?;
        let (automaton, label) = match (&self.script, &family) {
            (Some(_), Some(_)) => return Err(usage("give either a script or --family, not both")),
            (None, None) => return Err(usage("give a script or --family")),
            (Some(path), None) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Parse { line: 0, message: format!("{}: {e}", path.display()) })?;
                let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                (MealyAutomaton::parse(&text)?, label)
            }
            (None, Some(spec)) => (build_family(spec)?, spec.label()),
        };
        Ok(if self.dual {
            Loaded {
                automaton: automaton.dual(),
                label: format!("dual of {label}"),
                family,
            }
        } else {
            Loaded {
                automaton,
                label,
                family,
            }
        })
    }
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        _ if e.is_budget() => EXIT_BUDGET,
        Error::VerificationFailed(_) => EXIT_REFUTED,
        _ => EXIT_USAGE,
    }
}

/// Output of one command: what to print and the exit code.
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> std::result::Result<Outcome, Error> {
    let jobs = match &cli.command {
        Command::Inspect { common, .. }
        | Command::Certify { common, .. }
        | Command::DualOrbits { common, .. }
        | Command::StabTable { common, .. }
        | Command::Word { common, .. } => common.jobs,
        _ => None,
    };
    match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| usage(e.to_string()))?
            .install(|| dispatch(cli)),
        None => dispatch(cli),
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    let started = Instant::now();
    match &cli.command {
        Command::Inspect { input, common } => inspect(&input.load()?, common),
        Command::Certify {
            input,
            common,
            max_length,
            resume_from,
        } => {
            let loaded = input.load()?;
            let opts = CertifyOptions {
                max_length: *max_length,
                closure_budget: common.budget_closure,
                jobs: common.jobs,
                resume_from: *resume_from,
                seed: common.seed,
            };
            let mut report = certify_free_product(&loaded.automaton, &loaded.label, &opts)?;
            if !input.dual {
                report.warning = loaded.family.as_ref().and_then(|f| f.warning());
            }
            Ok(emit_report(report, common, started, None))
        }
        Command::DualOrbits {
            input,
            common,
            max_level,
        } => dual_orbits(input, common, *max_level, started),
        Command::StabTable {
            input,
            common,
            max_level,
        } => stab_table(&input.load()?, common, *max_level, started),
        Command::Word {
            input,
            common,
            word,
            depth,
            max_order,
            switch_depth,
        } => word_report(&input.load()?, common, word, *depth, *max_order, *switch_depth),
        Command::Dot { input } => Ok(Outcome {
            stdout: input.load()?.automaton.to_dot(),
            code: EXIT_OK,
        }),
        Command::Script { input } => {
            let stdout = match input.family_spec()? {
                Some(spec) if input.script.is_none() && !input.dual => family_script(&spec)?,
                _ => input.load()?.automaton.to_script(),
            };
            Ok(Outcome { stdout, code: EXIT_OK })
        }
    }
}

fn emit_report(mut report: CertReport, common: &Common, started: Instant, text: Option<String>) -> Outcome {
    report.seed = common.seed;
    if common.timing {
        report.wall_time_ms = Some(started.elapsed().as_millis() as u64);
    }
    let code = report.verdict.exit_code();
    let stdout = match (common.format, text) {
        (Format::Json, _) => report.to_json_pretty() + "\n",
        (Format::Text, Some(t)) => t,
        (Format::Text, None) => report_text(&report),
    };
    Outcome { stdout, code }
}

fn report_text(r: &CertReport) -> String {
    let mut out = format!("automaton: {}\ncheck: {}\n", r.automaton, r.check);
    if let Some(w) = &r.warning {
        out += &format!("warning: {w}\n");
    }
    for (k, v) in &r.params {
        out += &format!("{k}: {v}\n");
    }
    for (k, v) in &r.counts {
        out += &format!("{k}: {v}\n");
    }
    out += &format!("verdict: {}\n", verdict_name(r.verdict));
    if let Some(c) = &r.counterexample {
        out += &format!("counterexample: {} {} ({})\n", c.kind, c.value, c.reason);
    }
    out += &format!("scope: {}\n", r.scope);
    out
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Certified => "certified",
        Verdict::Refuted => "refuted",
        Verdict::BudgetExceeded => "budget-exceeded",
    }
}

fn value_text(v: &Value, out: &mut String) {
    if let Value::Object(map) = v {
        for (k, v) in map {
            match v {
                Value::String(s) => *out += &format!("{k}: {s}\n"),
                other => *out += &format!("{k}: {other}\n"),
            }
        }
    }
}

fn emit_value(mut v: Value, common: &Common, started: Instant) -> Outcome {
    v["seed"] = json!(common.seed);
    if common.timing {
        v["wall_time_ms"] = json!(started.elapsed().as_millis() as u64);
    }
    let stdout = match common.format {
        Format::Json => serde_json::to_string_pretty(&v).expect("serializes") + "\n",
        Format::Text => {
            let mut s = String::new();
            value_text(&v, &mut s);
            s
        }
    };
    Outcome { stdout, code: EXIT_OK }
}

fn inspect(loaded: &Loaded, common: &Common) -> Result<Outcome> {
    let started = Instant::now();
    let a = &loaded.automaton;
    let mut involutions = serde_json::Map::new();
    if a.is_invertible() {
        for q in 0..a.num_states() as u32 {
            let square = GroupWord::from_states(&[q, q]);
            involutions.insert(a.state_name(q).to_string(), json!(is_trivial(a, &square, common.budget_closure)?));
        }
    }
    let group_size = match common.budget_elements {
        Some(max) if a.is_invertible() => match enumerate_group_bounded(a, max, common.budget_closure)? {
            GroupSize::Finite(n) => json!({ "finite": n }),
            GroupSize::Exceeds(n) => json!({ "exceeds": n }),
        },
        _ => Value::Null,
    };
    let v = json!({
        "automaton": loaded.label,
        "group_size": group_size,
        "states": a.num_states(),
        "state_names": a.states(),
        "alphabet": a.alphabet().letters(),
        "invertible": a.is_invertible(),
        "bireversible": a.is_bireversible(),
        "bireversibility": a.bireversibility(),
        "involutions": if a.is_invertible() { Value::Object(involutions) } else { Value::Null },
        "recursion": a.to_script(),
        "dual_recursion": a.dual().to_script(),
        "warning": loaded.family.as_ref().and_then(|f| f.warning()),
    });
    Ok(emit_value(v, common, started))
}

fn orbit_text(rows: &[OrbitRow], report: &CertReport) -> String {
    let mut out = String::new();
    for row in rows {
        out += &row.to_text();
        out.push('\n');
    }
    out += &format!("# verdict: {}\n", verdict_name(report.verdict));
    if let Some(w) = &report.warning {
        out += &format!("# warning: {w}\n");
    }
    out
}

fn rows_from_details(report: &CertReport) -> Vec<OrbitRow> {
    report
        .details
        .as_ref()
        .and_then(|d| d.get("levels"))
        .and_then(|l| serde_json::from_value::<Vec<Value>>(l.clone()).ok())
        .unwrap_or_default()
        .into_iter()
        .map(|r| OrbitRow {
            level: r["level"].as_u64().unwrap_or(0) as usize,
            points: r["points"].as_u64().unwrap_or(0) as usize,
            orbits: r["orbits"].as_u64().unwrap_or(0) as usize,
            sizes: r["sizes"]
                .as_array()
                .map(|a| a.iter().filter_map(|x| x.as_u64()).map(|x| x as usize).collect())
                .unwrap_or_default(),
        })
        .collect()
}

fn dual_orbits(input: &Input, common: &Common, max_level: Option<usize>, started: Instant) -> Result<Outcome> {
    let report = match input.family_spec()? {
        Some(spec) if input.script.is_none() && !input.dual => {
            let level = max_level.unwrap_or_else(|| max_certificate_level(spec.n));
            transitivity_certificate(&spec, level, common.budget_closure)?
        }
        _ => {
            let loaded = input.load()?;
            let dual = loaded.automaton.dual();
            let level = max_level.unwrap_or(4);
            let rows = squarefree_orbit_table(&dual, &state_generators(&dual), level)?;
            let mut report = CertReport::new(loaded.label, "dual-transitivity").param("max_level", level as u64);
            if let Some(bad) = rows.iter().find(|r| r.orbits != 1) {
                report.refute(
                    "level",
                    bad.level.to_string(),
                    format!("{} orbits on square-free level {}", bad.orbits, bad.level),
                );
            }
            report.count("levels_checked", rows.len() as u64);
            report.count("points_total", rows.iter().map(|r| r.points as u64).sum());
            report.details = Some(json!({ "levels": rows }));
            report
        }
    };
    let text = orbit_text(&rows_from_details(&report), &report);
    Ok(emit_report(report, common, started, Some(text)))
}

fn stab_table(loaded: &Loaded, common: &Common, max_level: usize, started: Instant) -> Result<Outcome> {
    let a = &loaded.automaton;
    let gens = state_generators(a);
    let table = stabilizer_index_table(a, &gens, max_level)?;
    let mut report = CertReport::new(loaded.label.clone(), "stab-table").param("max_level", max_level as u64);
    let mut details = json!({
        "quotient_orders": table.quotient_orders.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "indices": table.indices.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
    });
    let mut text = String::new();
    for (k, o) in table.quotient_orders.iter().enumerate() {
        text += &format!("level {k}: |G/Stab({k})| = {o}");
        if k > 0 {
            text += &format!(", |Stab({})/Stab({k})| = {}", k - 1, table.indices[k - 1]);
        }
        text.push('\n');
    }
    if a.degree() >= 3 {
        let even = check_even_sections(a, &gens, &loaded.label)?;
        let eq = check_stab_equality(a, &gens, max_level.min(MAX_STAB_EQUALITY_LEVEL), &loaded.label)?;
        text += &format!("even sections: {}\n", verdict_name(even.verdict));
        text += &format!("stabilizer equality: {}\n", verdict_name(eq.verdict));
        report.verdict = even.verdict.merge(eq.verdict);
        report.counterexample = even.counterexample.clone().or_else(|| eq.counterexample.clone());
        details["even_sections"] = serde_json::to_value(&even).expect("serializes");
        details["stab_equality"] = serde_json::to_value(&eq).expect("serializes");
    }
    report.count("levels", table.quotient_orders.len() as u64);
    report.details = Some(details);
    text += &format!("verdict: {}\n", verdict_name(report.verdict));
    Ok(emit_report(report, common, started, Some(text)))
}

fn word_report(
    loaded: &Loaded,
    common: &Common,
    word: &str,
    depth: usize,
    max_order: usize,
    switch_depth: usize,
) -> Result<Outcome> {
    let started = Instant::now();
    let a = &loaded.automaton;
    let w = GroupWord::parse(a, word)?;
    let budget = common.budget_closure;
    let trivial = is_trivial(a, &w, budget)?;
    let order = order_bounded(a, &w, max_order, budget)?;
    let root = root_permutation(a, &w)?;
    let p = portrait(a, &w, depth)?;
    let switch = if a.degree() == 2 {
        let r = switch_parity_transitive(a, &w, switch_depth.min(60), budget)?;
        let (verdict, level) = match r.verdict {
            SwitchParity::ConsistentUpTo { depth } => ("consistent", depth),
            SwitchParity::RefutedAtLevel { level } => ("refuted", level),
        };
        json!({
            "verdict": verdict,
            "level": level,
            "switches": r.switches.iter().map(|&c| c as u64).collect::<Vec<_>>(),
        })
    } else {
        Value::Null
    };
    let v = json!({
        "automaton": loaded.label,
        "word": w.render(a),
        "trivial": trivial,
        "order": order,
        "max_order": max_order,
        "root_permutation": a.cycle_notation(&root),
        "portrait": p.to_json(a),
        "switch_parity": switch,
    });
    Ok(emit_value(v, common, started))
}
