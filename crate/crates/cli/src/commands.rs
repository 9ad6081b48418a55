use std::collections::hash_map::RandomState;
use std::fmt::Write as _;
use std::fs;
use std::hash::BuildHasher;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use phatic_core::batch::map_seeds;
use phatic_core::dsl::{check_reachability, parse_program_verbose, Program, Severity, DEFAULT_STATE_CAP};
use phatic_core::engine::{run, trace_from_json, trace_to_json, validate, Termination, Trace};
use phatic_core::model::{batch_stats, build_ruleset, classify, default_scenario, ruleset_source, BatchStats, Scenario};
use phatic_core::surface::{coverage_check, realize_with, render_table, render_transcript, Bank, Picker, TranscriptLine};
use serde_json::json;
use thiserror::Error;

use crate::{CheckArgs, Format, GenerateArgs, Inputs, ReplayArgs, ReplayFormat, StatsArgs, StatsFormat};

const MIN_STATS_COUNT: u64 = 100;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{0}")]
    Diverged(String),
}

impl CliError {
    pub const USAGE: u8 = 1;

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => Self::USAGE,
            CliError::Invalid(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Diverged(_) => 3,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

fn read(path: &Path) -> Result<String, CliError> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(io_err(path))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(io_err(path))
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(io_err(path)),
        None => {
            let mut stdout = io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
                // A closed pipe (e.g. `| head`) is not worth an error.
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
                other => other.map_err(io_err(Path::new("<stdout>"))),
            }
        }
    }
}

fn entropy_seed() -> u64 {
    RandomState::new().hash_one(std::time::SystemTime::now())
}

struct Setup {
    scenario: Scenario,
    program: Program,
    bank: Bank,
    label: String,
}

fn describe(path: &Option<PathBuf>) -> String {
    path.as_ref().map_or_else(|| "shipped".to_owned(), |p| p.display().to_string())
}

fn load(inputs: &Inputs, turn_budget: Option<u32>) -> Result<Setup, CliError> {
    let mut scenario = match &inputs.scenario {
        Some(path) => Scenario::from_json(&read(path)?).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?,
        None => default_scenario(),
    };
    if let Some(b) = turn_budget {
        scenario.turn_budget = b;
        scenario.validate().map_err(|e| CliError::Invalid(format!("--turn-budget: {e}")))?;
    }
    let program = match (&inputs.rules, &inputs.scenario) {
        (Some(path), _) => {
            let src = read(path)?;
            let (program, diags) = parse_program_verbose(&src);
            let file = path.display().to_string();
            for d in diags.iter().filter(|d| d.severity == Severity::Warning) {
                eprintln!("{}", d.render(&file));
            }
            program.ok_or_else(|| {
                let errors: Vec<String> =
                    diags.iter().filter(|d| d.severity == Severity::Error).map(|d| d.render(&file)).collect();
                CliError::Invalid(errors.join("\n"))
            })?
        }
        (None, Some(_)) => parse_program_verbose(&ruleset_source(&scenario))
            .0
            .ok_or_else(|| CliError::Invalid("generated ruleset failed to check".into()))?,
        (None, None) => build_ruleset(),
    };
    let bank = match &inputs.bank {
        Some(path) => Bank::from_json(&read(path)?).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?,
        None => Bank::shipped(),
    };
    let label = scenario.name.clone();
    Ok(Setup { scenario, program, bank, label })
}

fn require_coverage(setup: &Setup) -> Result<(), CliError> {
    let missing = coverage_check(&setup.bank, &setup.program);
    if missing.is_empty() {
        return Ok(());
    }
    let names: Vec<&str> = missing.iter().map(|s| s.as_str()).collect();
    Err(CliError::Invalid(format!("bank cannot realize rules: {}", names.join(", "))))
}

fn outcome(trace: &Trace) -> String {
    let verdict = match classify(trace) {
        Ok(r) if r.adherent => "adherent".to_owned(),
        Ok(r) => {
            let v: Vec<&str> = r.violations.iter().map(|v| v.as_str()).collect();
            format!("violates {}", v.join(", "))
        }
        Err(e) => format!("unclassified ({e})"),
    };
    match trace.termination {
        Termination::Quiescence => verdict,
        other => format!("{verdict}; stopped: {}", other.as_str()),
    }
}

fn realize(trace: &Trace, bank: &Bank, picker: &mut Picker) -> Result<Vec<TranscriptLine>, CliError> {
    realize_with(trace, bank, picker).map_err(|e| CliError::Invalid(e.to_string()))
}

pub fn generate(args: &GenerateArgs) -> Result<(), CliError> {
    let setup = load(&args.inputs, args.turn_budget)?;
    let seed = args.seed.unwrap_or_else(entropy_seed);
    let count = args.count as usize;
    let step_cap = args.step_cap as usize;
    let header = format!(
        "# phatic generate --seed {seed} --count {count} --format {} --step-cap {step_cap} --turn-budget {} (scenario {}, rules {}, bank {})\n",
        match args.format {
            Format::Transcript => "transcript",
            Format::TraceJson => "trace-json",
            Format::Table => "table",
            Format::Stats => "stats",
        },
        setup.scenario.turn_budget,
        describe(&args.inputs.scenario),
        describe(&args.inputs.rules),
        describe(&args.inputs.bank),
    );
    if matches!(args.format, Format::Transcript | Format::Table) {
        require_coverage(&setup)?;
    }
    let initial = setup.scenario.initial_state();
    let sim = |s: u64| run(&setup.label, &initial, &setup.program, s, step_cap);
    let text = match args.format {
        Format::TraceJson => {
            // Keep stdout to one record per line; the header goes to stderr.
            eprint!("{header}");
            map_seeds(seed, count, |s| trace_to_json(&sim(s)) + "\n").concat()
        }
        Format::Stats => {
            let traces = map_seeds(seed, count, sim);
            header + &stats_text(&batch_stats(&traces).map_err(|e| CliError::Invalid(e.to_string()))?)
        }
        Format::Transcript | Format::Table => {
            let table = args.format == Format::Table;
            let chunks = map_seeds(seed, count, |s| -> Result<String, CliError> {
                let trace = sim(s);
                let lines = realize(&trace, &setup.bank, &mut Picker::seeded(s))?;
                let body = if table { render_table(&lines) } else { render_transcript(&lines) };
                Ok(format!("\n## seed {s}: {}\n{body}", outcome(&trace)))
            });
            let mut text = header;
            for chunk in chunks {
                text.push_str(&chunk?);
            }
            text
        }
    };
    emit(args.out.as_ref(), &text)
}

pub fn replay(args: &ReplayArgs) -> Result<(), CliError> {
    let setup = load(&args.inputs, None)?;
    require_coverage(&setup)?;
    let input = read(&args.input)?;
    let mut text = String::new();
    for (n, line) in input.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let at = format!("{}:{}", args.input.display(), n + 1);
        let trace = trace_from_json(line).map_err(|e| CliError::Invalid(format!("{at}: {e}")))?;
        validate(&trace, &setup.program).map_err(|d| CliError::Diverged(format!("{at}: {d}")))?;
        let mut picker = args.seed.map_or(Picker::First, Picker::seeded);
        let lines = realize(&trace, &setup.bank, &mut picker)?;
        if !text.is_empty() {
            text.push('\n');
        }
        text.push_str(&match args.format {
            ReplayFormat::Transcript => render_transcript(&lines),
            ReplayFormat::Table => render_table(&lines),
        });
    }
    emit(args.out.as_ref(), &text)
}

fn stats_text(st: &BatchStats) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "conversations            {}", st.conversations);
    let _ = writeln!(out, "adherent fraction        {:.4}", st.adherent_fraction);
    let _ = writeln!(out, "mean length (steps)      {:.2}", st.mean_length);
    let _ = writeln!(out, "distinct move sequences  {}", st.distinct_move_sequences);
    out.push_str("\nviolation rates\n");
    for (v, r) in &st.violation_rates {
        let _ = writeln!(out, "  {:<24} {r:.4}", v.as_str());
    }
    out.push_str("\nfinal feelings (share of agents)\n");
    for (f, r) in &st.final_feelings {
        let _ = writeln!(out, "  {:<24} {r:.4}", f.as_str());
    }
    out.push_str("\nrule frequency (firings per conversation)\n");
    let width = st.rule_frequency.keys().map(String::len).max().unwrap_or(0);
    for (rule, r) in &st.rule_frequency {
        let _ = writeln!(out, "  {rule:<width$} {r:.4}");
    }
    out
}

pub fn stats(args: &StatsArgs) -> Result<(), CliError> {
    if args.count < MIN_STATS_COUNT {
        return Err(CliError::Usage(format!("stats needs --count of at least {MIN_STATS_COUNT}, got {}", args.count)));
    }
    let setup = load(&args.inputs, args.turn_budget)?;
    let seed = args.seed.unwrap_or_else(entropy_seed);
    let step_cap = args.step_cap as usize;
    let initial = setup.scenario.initial_state();
    let traces = map_seeds(seed, args.count as usize, |s| run(&setup.label, &initial, &setup.program, s, step_cap));
    let st = batch_stats(&traces).map_err(|e| CliError::Invalid(e.to_string()))?;
    let text = match args.format {
        StatsFormat::Text => format!(
            "# phatic stats --seed {seed} --count {} --step-cap {step_cap} --turn-budget {} (scenario {}, rules {})\n{}",
            args.count,
            setup.scenario.turn_budget,
            describe(&args.inputs.scenario),
            describe(&args.inputs.rules),
            stats_text(&st)
        ),
        StatsFormat::Json => {
            let config = json!({
                "seed": seed,
                "count": args.count,
                "step_cap": step_cap,
                "turn_budget": setup.scenario.turn_budget,
                "scenario": describe(&args.inputs.scenario),
                "rules": describe(&args.inputs.rules),
            });
            json!({ "config": config, "stats": st }).to_string() + "\n"
        }
    };
    emit(args.out.as_ref(), &text)
}

pub fn check(args: &CheckArgs) -> Result<(), CliError> {
    let setup = load(&args.inputs, None)?;
    require_coverage(&setup)?;
    let mut text = format!(
        "ok: {} rules over {} predicates; bank covers every rule\n",
        setup.program.len(),
        setup.program.signature().len()
    );
    if let Some(depth) = args.depth {
        let reach = check_reachability(&setup.program, &setup.scenario.initial_state(), depth, DEFAULT_STATE_CAP)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let idle: Vec<&str> = reach.iter().filter(|(_, r)| !**r).map(|(s, _)| s.as_str()).collect();
        let _ = writeln!(text, "{} of {} rules can fire within {depth} steps", reach.len() - idle.len(), reach.len());
        for name in idle {
            let _ = writeln!(text, "  not within {depth}: {name}");
        }
    }
    emit(None, &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use phatic_core::engine::replay;
    use phatic_core::model::exemplars;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Invalid(String::new()).exit_code(), 1);
        assert_eq!(CliError::Io { path: "x".into(), source: io::Error::other("boom") }.exit_code(), 2);
        assert_eq!(CliError::Diverged(String::new()).exit_code(), 3);
    }

    #[test]
    fn outcome_lists_violations() {
        let s = default_scenario();
        let p = build_ruleset();
        let t = replay("default", &s.initial_state(), &p, &exemplars::fig3_steps()).unwrap();
        assert_eq!(outcome(&t), "violates domination, early_termination");
        let t = replay("default", &s.initial_state(), &p, &exemplars::normative_steps()).unwrap();
        assert_eq!(outcome(&t), "adherent");
        let t = replay("default", &s.initial_state(), &p, &exemplars::normative_steps()[..3]).unwrap();
        assert_eq!(outcome(&t), "adherent; stopped: incomplete");
    }

    #[test]
    fn stats_text_has_every_section() {
        let s = default_scenario();
        let p = build_ruleset();
        let traces: Vec<Trace> = (0..10).map(|seed| run("default", &s.initial_state(), &p, seed, 200)).collect();
        let text = stats_text(&batch_stats(&traces).unwrap());
        for heading in ["conversations", "violation rates", "final feelings", "rule frequency"] {
            assert!(text.contains(heading), "{heading}");
        }
    }
}
