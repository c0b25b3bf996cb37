//! Reference agents speaking the NDJSON stdio protocol, one case per
//! process. `oracle` needs the corpus directory so it can replay the
//! ground truth; the rest work from the session alone.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use trailbench_core::harness::{
    run_stdio_agent, CrashAgent, HarnessError, KeywordAgent, LoopAgent, OracleAgent,
    ParrotAgent, RandomAgent, ScriptedAgent,
};
use trailbench_core::scenario::read_bundle;
use trailbench_core::seeded::derive_seed;

#[derive(Parser)]
#[command(
    name = "trailbench-agent",
    version,
    about = "Reference investigation agents for the trailbench harness"
)]
struct Cli {
    #[command(subcommand)]
    agent: AgentKind,
}

#[derive(Subcommand)]
enum AgentKind {
    /// Replays the recorded ground truth; the upper bound on every score.
    Oracle {
        /// Corpus directory the harness is running (holds `cases/`).
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Restates the alert as its only claim; scores zero on novelty.
    Parrot,
    /// Calls random tools and guesses; a noise floor.
    Random {
        /// Root seed, fanned out per case by hashing the case id.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Scores suspicion signals in the event log against a threshold.
    Keyword,
    /// Aborts immediately; exercises the harness crash path.
    Crash,
    /// Calls tools forever without reporting; exercises the budget path.
    Loop,
}

fn main() {
    let cli = Cli::parse();
    let result = run_stdio_agent(|case_id, _category, _alert| {
        let agent: Box<dyn ScriptedAgent> = match &cli.agent {
            AgentKind::Oracle { corpus } => {
                let bundle = read_bundle(&corpus.join("cases").join(case_id))
                    .map_err(HarnessError::Scenario)?;
                Box::new(OracleAgent::from_bundle(&bundle))
            }
            AgentKind::Parrot => Box::new(ParrotAgent::default()),
            AgentKind::Random { seed } => {
                Box::new(RandomAgent::new(derive_seed(*seed, case_id)))
            }
            AgentKind::Keyword => Box::new(KeywordAgent::new()),
            AgentKind::Crash => Box::new(CrashAgent),
            AgentKind::Loop => Box::new(LoopAgent::default()),
        };
        Ok(agent)
    });
    if let Err(err) = result {
        eprintln!("agent error: {err}");
        std::process::exit(1);
    }
}
