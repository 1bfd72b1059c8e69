use std::io::Read as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand};

use debugscope_cli::loadtest::{self, LoadOptions};
use debugscope_cli::{admin, bench, cluster, report, stats, timeline, write_file, CliError, Result};
use debugscope_core::stats::GroupBy;
use debugscope_core::SessionId;

#[derive(Parser)]
#[command(name = "debugscope", version, about = "Analyse debugging sessions recorded by a debugscope server")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Users, sessions, debugs and completions per group.
    Stats {
        #[arg(long)]
        store: PathBuf,
        /// `question` or `question-kind`.
        #[arg(long, default_value = "question")]
        group_by: String,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Render one session's events as an SVG timeline.
    Timeline {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        session: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cluster the behavior label strings of ended sessions.
    Cluster {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Time every parser configuration over a directory of .js files.
    Bench {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 5)]
        frames: usize,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Send paced GET requests to a running server.
    Loadtest {
        #[arg(long)]
        url: String,
        #[arg(long, default_value_t = 1000)]
        requests: usize,
        /// Seconds over which the requests are spread.
        #[arg(long, default_value_t = 1.0)]
        duration: f64,
        #[arg(long, default_value_t = 64)]
        concurrency: usize,
        #[arg(long)]
        token: Option<String>,
        #[arg(long, requires = "secret")]
        user: Option<String>,
        #[arg(long)]
        secret: Option<String>,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Labels, directions, diffs, API usage and CFG changes of an ended session.
    SessionReport {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        session: String,
        /// Member-chain roots counted as platform API calls.
        #[arg(long = "api-prefix", default_values_t = ["wx".to_string()])]
        api_prefixes: Vec<String>,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    #[command(subcommand)]
    Admin(AdminCommand),
}

#[derive(Subcommand)]
enum AdminCommand {
    /// Add or replace a user. The secret is read from stdin when not given.
    AddUser {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        user: String,
        /// student, ta or teacher.
        #[arg(long)]
        role: String,
        #[arg(long)]
        secret: Option<String>,
    },
    ListUsers {
        #[arg(long)]
        store: PathBuf,
    },
}

fn emit(text: &str, json_out: Option<&Path>, json: impl FnOnce() -> String) -> Result<()> {
    print!("{text}");
    if let Some(p) = json_out {
        write_file(p, &json())?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Stats { store, group_by, json_out } => {
            let by = group_by.parse::<GroupBy>().map_err(|e| CliError::Usage(e.to_string()))?;
            let rows = stats::cmd_stats(&store, by)?;
            emit(&stats::render_text(&rows), json_out.as_deref(), || stats::render_json(&rows))
        }
        Command::Timeline { store, session, out } => {
            timeline::cmd_timeline(&store, &SessionId::new(session), &out)?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Cluster { store, k, seed, json_out } => {
            let r = cluster::cmd_cluster(&store, k, seed)?;
            emit(&cluster::render_text(&r), json_out.as_deref(), || cluster::render_json(&r))
        }
        Command::Bench { corpus, frames, json_out } => {
            let rows = bench::cmd_bench(&corpus, frames)?;
            emit(&bench::render_text(&rows), json_out.as_deref(), || bench::render_json(&rows))
        }
        Command::Loadtest {
            url,
            requests,
            duration,
            concurrency,
            token,
            user,
            secret,
            json_out,
        } => {
            if !(duration.is_finite() && duration >= 0.0) {
                return Err(CliError::Usage("--duration must be a non-negative number".into()));
            }
            let rt = tokio::runtime::Runtime::new().map_err(|source| CliError::Io {
                path: PathBuf::from("<runtime>"),
                source,
            })?;
            let r = rt.block_on(async {
                let token = match (token, user, secret) {
                    (Some(t), _, _) => t,
                    (None, Some(u), Some(s)) => loadtest::login(&url, &u, &s).await?,
                    _ => return Err(CliError::Usage("give --token or --user with --secret".into())),
                };
                let opts = LoadOptions {
                    url: url.clone(),
                    token,
                    total: requests,
                    duration: Duration::from_secs_f64(duration),
                    concurrency,
                    request_timeout: Duration::from_secs(10),
                };
                Ok(loadtest::run_load(&opts).await)
            })?;
            emit(&loadtest::render_text(&r), json_out.as_deref(), || loadtest::render_json(&r))?;
            if r.unreachable() {
                return Err(CliError::ServerUnreachable {
                    url,
                    message: r.first_error.clone().unwrap_or_default(),
                });
            }
            Ok(())
        }
        Command::SessionReport {
            store,
            session,
            api_prefixes,
            json_out,
        } => {
            let r = report::cmd_session_report(&store, &SessionId::new(session), &api_prefixes)?;
            emit(&report::render_text(&r), json_out.as_deref(), || report::render_json(&r))
        }
        Command::Admin(AdminCommand::AddUser {
            store,
            user,
            role,
            secret,
        }) => {
            let role = admin::parse_role(&role)?;
            let secret = match secret {
                Some(s) => s,
                None => {
                    let mut s = String::new();
                    std::io::stdin().read_to_string(&mut s).map_err(|source| CliError::Io {
                        path: PathBuf::from("<stdin>"),
                        source,
                    })?;
                    s.trim_end_matches(['\r', '\n']).to_string()
                }
            };
            let u = admin::cmd_add_user(&store, &user, role, &secret)?;
            println!("user {} ({:?}) saved", u.user_id, u.role);
            Ok(())
        }
        Command::Admin(AdminCommand::ListUsers { store }) => {
            for (id, role) in admin::cmd_list_users(&store)? {
                println!("{id}\t{role:?}");
            }
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
