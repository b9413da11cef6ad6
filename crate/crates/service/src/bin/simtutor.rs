use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use simtutor_core::learner::LearnerStore;
use simtutor_core::sim::{compare_policies, simulate_population, Policy, SimConfig};
use simtutor_core::{sample, KnowledgeBase, PedagogyConfig, Questionnaire};
use simtutor_service::{serve, AppState};

#[derive(Parser)]
#[command(
    name = "simtutor",
    version,
    about = "Adaptive tutoring engine: simulator and HTTP service"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a learner population under one policy.
    Run {
        #[command(flatten)]
        common: SimArgs,
        #[arg(long, default_value = "adaptive")]
        policy: Policy,
    },
    /// Run both policies on the same population and report paired deltas.
    Compare {
        #[command(flatten)]
        common: SimArgs,
    },
    /// Serve the tutoring HTTP API.
    Serve(ServeArgs),
}

#[derive(Args)]
struct SimArgs {
    /// Knowledge base JSON; the bundled sample when omitted.
    #[arg(long)]
    kb: Option<PathBuf>,
    /// Simulator configuration JSON; defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Questionnaire JSON; the bundled one when omitted.
    #[arg(long)]
    questionnaire: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    learners: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "SIMTUTOR_BIND", default_value = "127.0.0.1:8080")]
    bind: SocketAddr,
    #[arg(long, env = "SIMTUTOR_KB")]
    kb: Option<PathBuf>,
    #[arg(long, env = "SIMTUTOR_PEDAGOGY")]
    pedagogy: Option<PathBuf>,
    #[arg(long, env = "SIMTUTOR_QUESTIONNAIRE")]
    questionnaire: Option<PathBuf>,
    #[arg(long, env = "SIMTUTOR_DATA_DIR", default_value = "data/learners")]
    data_dir: PathBuf,
    #[arg(long, env = "SIMTUTOR_TOKEN_TTL", default_value_t = 86_400)]
    token_ttl: u64,
}

const CONFIG_ERROR: u8 = 2;

fn config_error(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("simtutor: {e}");
    ExitCode::from(CONFIG_ERROR)
}

fn load_kb(path: Option<&Path>) -> Result<KnowledgeBase, ExitCode> {
    match path {
        Some(p) => KnowledgeBase::from_path(p)
            .map_err(|e| config_error(format!("invalid knowledge base: {e}"))),
        None => Ok(sample::knowledge_base()),
    }
}

fn load_questionnaire(path: Option<&Path>) -> Result<Questionnaire, ExitCode> {
    match path {
        Some(p) => Questionnaire::from_path(p)
            .map_err(|e| config_error(format!("invalid questionnaire: {e}"))),
        None => Ok(sample::questionnaire()),
    }
}

fn write_report(out: Option<&Path>, json: &str) -> ExitCode {
    match out {
        Some(path) => match std::fs::write(path, format!("{json}\n")) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("simtutor: cannot write {}: {e}", path.display());
                ExitCode::FAILURE
            }
        },
        None => {
            println!("{json}");
            ExitCode::SUCCESS
        }
    }
}

fn simulate(args: &SimArgs, policy: Option<Policy>) -> Result<ExitCode, ExitCode> {
    let kb = load_kb(args.kb.as_deref())?;
    let questionnaire = load_questionnaire(args.questionnaire.as_deref())?;
    let config = match &args.config {
        Some(p) => SimConfig::from_path(p).map_err(config_error)?,
        None => SimConfig::default(),
    };
    let json = match policy {
        Some(policy) => {
            let report = simulate_population(
                &kb,
                &questionnaire,
                args.learners,
                args.seed,
                policy,
                &config,
            )
            .map_err(config_error)?;
            serde_json::to_string_pretty(&report).expect("reports serialize")
        }
        None => {
            let report = compare_policies(&kb, &questionnaire, args.learners, args.seed, &config)
                .map_err(config_error)?;
            serde_json::to_string_pretty(&report).expect("reports serialize")
        }
    };
    Ok(write_report(args.out.as_deref(), &json))
}

fn run_server(args: ServeArgs) -> Result<ExitCode, ExitCode> {
    let kb = load_kb(args.kb.as_deref())?;
    let questionnaire = load_questionnaire(args.questionnaire.as_deref())?;
    let pedagogy = match &args.pedagogy {
        Some(p) => PedagogyConfig::from_path(p)
            .map_err(|e| config_error(format!("invalid pedagogy config: {e}")))?,
        None => PedagogyConfig::default(),
    };
    let store = LearnerStore::open(&args.data_dir)
        .map_err(|e| config_error(format!("invalid data directory: {e}")))?;
    let state = Arc::new(AppState::new(
        kb,
        pedagogy,
        questionnaire,
        store,
        args.token_ttl,
    ));

    let runtime = tokio::runtime::Runtime::new().expect("tokio runtime");
    runtime.block_on(async move {
        let listener = match tokio::net::TcpListener::bind(args.bind).await {
            Ok(l) => l,
            Err(e) => return Err(config_error(format!("invalid bind address: {e}"))),
        };
        eprintln!("simtutor: listening on http://{}", args.bind);
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        match serve(listener, state, shutdown).await {
            Ok(()) => Ok(ExitCode::SUCCESS),
            Err(e) => {
                eprintln!("simtutor: server error: {e}");
                Err(ExitCode::FAILURE)
            }
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { common, policy } => simulate(&common, Some(policy)),
        Command::Compare { common } => simulate(&common, None),
        Command::Serve(args) => run_server(args),
    };
    result.unwrap_or_else(|code| code)
}
