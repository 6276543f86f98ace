//! Command-line front end. Every subcommand parses its inputs, calls into the
//! library and renders the result; output is buffered so a failing command
//! writes nothing to stdout or to output files.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::audit::{
    denied_access_summary, merge_archives, query, ActionQuery, EventFilter, EventKind, LogArchive,
    ARCHIVE_FILE_NAME,
};
use crate::eval::{authorize, render_trace, simulate, AccessRequest, EvalError, Verdict};
use crate::lp::{
    build_usage_index, generate_least_privilege, unused_report, Principal, Window,
};
use crate::org::{OrgError, Organization};
use crate::policy::{Action, ActionLevel, VerbTable};
use crate::time::Timestamp;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_START_TIME: &str = "2024-01-01T00:00:00Z";

pub const EXIT_OK: i32 = 0;
pub const EXIT_DENY: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "iamsim", version, about = "Multi-account cloud IAM simulator")]
pub struct Cli {
    /// Scenario file describing the organization.
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: Format,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Replacement verb table (`Verb<TAB>read|write` per line).
    #[arg(long, global = true)]
    pub verb_table: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a scenario file and report every violation.
    Validate { path: Option<PathBuf> },
    /// Decide one request.
    Authorize(AuthorizeArgs),
    /// Decide a JSON Lines batch of requests.
    Simulate(SimulateArgs),
    /// Least-privilege analysis over audit logs.
    Analyze(AnalyzeArgs),
    /// Merge and query audit logs.
    Audit {
        #[command(subcommand)]
        command: AuditCommand,
    },
}

#[derive(Debug, Args)]
pub struct AuthorizeArgs {
    #[arg(long)]
    pub user: String,
    #[arg(long)]
    pub account: String,
    #[arg(long)]
    pub action: String,
    #[arg(long)]
    pub resource: String,
    /// Request context entry `key=value`; repeatable.
    #[arg(long = "context", value_parser = parse_context)]
    pub context: Vec<(String, String)>,
    #[arg(long)]
    pub explain: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub requests: PathBuf,
    /// Write decisions here (JSON Lines) instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write the audit events for the batch here.
    #[arg(long)]
    pub emit_log: Option<PathBuf>,
    /// Include statement traces in decisions.
    #[arg(long)]
    pub trace: bool,
    /// Event time for the first request without its own `time`.
    #[arg(long, default_value = DEFAULT_START_TIME)]
    pub start_time: Timestamp,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Audit log(s); repeatable.
    #[arg(long = "log", required = true)]
    pub logs: Vec<PathBuf>,
    #[command(subcommand)]
    pub command: AnalyzeCommand,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// List statements not used within the threshold.
    Unused {
        #[arg(long)]
        as_of: Timestamp,
        #[arg(long)]
        threshold_days: u32,
    },
    /// Generate a policy from a principal's observed activity.
    Generate {
        /// `USER@ACCOUNT`
        #[arg(long)]
        principal: Principal,
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=4))]
        level: u8,
        /// `START..END`, both RFC 3339.
        #[arg(long)]
        window: Window,
        /// Write the generated policy document here.
        #[arg(long)]
        policy_out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[arg(long)]
    pub user: Option<String>,
    #[arg(long)]
    pub account: Option<String>,
    /// Action pattern; `*:Op` and `*:Prefix*` match across services.
    #[arg(long)]
    pub action: Option<ActionQuery>,
    #[arg(long)]
    pub kind: Option<EventKind>,
    #[arg(long)]
    pub verdict: Option<Verdict>,
    /// Inclusive lower bound.
    #[arg(long)]
    pub since: Option<Timestamp>,
    /// Exclusive upper bound.
    #[arg(long)]
    pub until: Option<Timestamp>,
}

impl FilterArgs {
    fn to_filter(&self) -> EventFilter {
        EventFilter {
            user: self.user.clone(),
            account: self.account.clone(),
            action: self.action.clone(),
            kind: self.kind,
            verdict: self.verdict,
            since: self.since,
            until: self.until,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum AuditCommand {
    /// Merge logs into one archive.
    Merge {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        /// Defaults to `archive.jsonl` beside the first log.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print events matching every given filter.
    Query {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        #[command(flatten)]
        filter: FilterArgs,
    },
    /// Count denied events per time bucket, user and account.
    DeniedSummary {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        #[arg(long, value_parser = humantime::parse_duration)]
        bucket: Duration,
    },
}

fn parse_context(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.is_empty() => Ok((k.to_owned(), v.to_owned())),
        _ => Err(format!("expected key=value, got `{s}`")),
    }
}

/// Result of one invocation: exit code plus buffered streams.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn invalid(message: impl ToString) -> Self {
        Self { code: EXIT_INVALID, message: message.to_string() }
    }

    fn io(path: &Path, err: impl ToString) -> Self {
        Self {
            code: EXIT_IO,
            message: format!("{}: {}", path.display(), err.to_string()),
        }
    }
}

/// Output produced by a successful command.
#[derive(Default)]
struct Output {
    code: i32,
    stdout: String,
    stderr: String,
    files: Vec<(PathBuf, String)>,
}

impl Output {
    fn stdout(text: String) -> Self {
        Self { stdout: text, ..Self::default() }
    }
}

type CmdResult = Result<Output, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code, stdout: String::new(), stderr: text }
            } else {
                Outcome { code, stdout: text, stderr: String::new() }
            };
        }
    };
    execute(&cli)
}

pub fn execute(cli: &Cli) -> Outcome {
    let result = dispatch(cli).and_then(|out| {
        for (path, content) in &out.files {
            fs::write(path, content).map_err(|e| Failure::io(path, e))?;
        }
        Ok(out)
    });
    match result {
        Ok(out) => Outcome { code: out.code, stdout: out.stdout, stderr: out.stderr },
        Err(f) => Outcome {
            code: f.code,
            stdout: String::new(),
            stderr: format!("error: {}\n", f.message),
        },
    }
}

fn dispatch(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Validate { path } => cmd_validate(cli, path.as_deref()),
        Command::Authorize(args) => cmd_authorize(cli, args),
        Command::Simulate(args) => cmd_simulate(cli, args),
        Command::Analyze(args) => cmd_analyze(cli, args),
        Command::Audit { command } => cmd_audit(cli, command),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn scenario_path(cli: &Cli) -> Result<&Path, Failure> {
    cli.scenario
        .as_deref()
        .ok_or_else(|| Failure::invalid("--scenario is required"))
}

fn load_org(cli: &Cli) -> Result<Organization, Failure> {
    let path = scenario_path(cli)?;
    let text = read(path)?;
    Organization::from_json(&text)
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn verb_table(cli: &Cli) -> Result<VerbTable, Failure> {
    match &cli.verb_table {
        None => Ok(VerbTable::default()),
        Some(path) => read(path)?
            .parse()
            .map_err(|e| Failure::invalid(format!("{}: {e}", path.display()))),
    }
}

fn read_archive(path: &Path) -> Result<LogArchive, Failure> {
    let file = fs::File::open(path).map_err(|e| Failure::io(path, e))?;
    LogArchive::read_jsonl(BufReader::new(file))
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn read_merged(paths: &[PathBuf]) -> Result<LogArchive, Failure> {
    let archives = paths.iter().map(|p| read_archive(p)).collect::<Result<Vec<_>, _>>()?;
    Ok(merge_archives(&archives))
}

fn pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("values serialize");
    s.push('\n');
    s
}

fn cmd_validate(cli: &Cli, path: Option<&Path>) -> CmdResult {
    let path = match path {
        Some(p) => p,
        None => scenario_path(cli)?,
    };
    let text = read(path)?;
    match Organization::from_json(&text) {
        Ok(org) => {
            let accounts = org.account_ids().count();
            let users = org.users().count();
            let sets = org.permission_sets().count();
            Ok(Output::stdout(match cli.format {
                Format::Json => pretty(&json!({
                    "valid": true,
                    "accounts": accounts,
                    "users": users,
                    "permission_sets": sets,
                })),
                Format::Text => format!(
                    "{}: valid ({accounts} accounts, {users} users, {sets} permission sets)\n",
                    path.display()
                ),
            }))
        }
        Err(OrgError::Invalid(violations)) => {
            let mut message = format!("{}: {} violation(s)", path.display(), violations.len());
            for v in &violations {
                let _ = write!(message, "\n  {v}");
            }
            Err(Failure::invalid(message))
        }
        Err(e) => Err(Failure::invalid(format!("{}: {e}", path.display()))),
    }
}

fn cmd_authorize(cli: &Cli, args: &AuthorizeArgs) -> CmdResult {
    let org = load_org(cli)?;
    let action: Action = args.action.parse().map_err(Failure::invalid)?;
    let mut request = AccessRequest::new(&args.user, &args.account, action, &args.resource);
    for (k, v) in &args.context {
        request = request.with_context(k, v);
    }
    let decision = authorize(&org, &request).map_err(Failure::invalid)?;
    let stdout = match cli.format {
        Format::Json => {
            let mut value = serde_json::to_value(&decision).expect("decisions serialize");
            if !args.explain {
                value.as_object_mut().expect("object").remove("trace");
            }
            pretty(&value)
        }
        Format::Text if args.explain => render_trace(&request, &decision),
        Format::Text => format!("{} ({})\n", decision.verdict, decision.reason),
    };
    let code = match decision.verdict {
        Verdict::Allow => EXIT_OK,
        Verdict::Deny => EXIT_DENY,
    };
    Ok(Output { code, stdout, ..Output::default() })
}

/// Parses a requests file; returns each request with its 1-based line.
fn parse_requests(path: &Path, text: &str) -> Result<Vec<(usize, AccessRequest)>, Failure> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(idx, line)| {
            AccessRequest::from_json(line)
                .map(|r| (idx + 1, r))
                .map_err(|e| Failure::invalid(format!("{} line {}: {e}", path.display(), idx + 1)))
        })
        .collect()
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs) -> CmdResult {
    let org = load_org(cli)?;
    let text = read(&args.requests)?;
    let numbered = parse_requests(&args.requests, &text)?;
    let requests: Vec<AccessRequest> = numbered.iter().map(|(_, r)| r.clone()).collect();
    let sink = Mutex::new(LogArchive::new());
    let decisions = simulate(&org, &requests, Some(&sink), args.start_time).map_err(|e| match e {
        EvalError::Batch { index, source } => Failure::invalid(format!(
            "{} line {}: {source}",
            args.requests.display(),
            numbered[index].0
        )),
        other => Failure::invalid(other),
    })?;

    let mut jsonl = String::new();
    let mut text_out = String::new();
    for (idx, (request, decision)) in requests.iter().zip(&decisions).enumerate() {
        let mut line = json!({
            "index": idx,
            "user": request.user,
            "account": request.account,
            "action": request.action.to_string(),
            "resource": request.resource,
            "verdict": decision.verdict,
            "reason": decision.reason,
        });
        if args.trace {
            line["trace"] = serde_json::to_value(&decision.trace).expect("traces serialize");
            text_out.push_str(&render_trace(request, decision));
        } else {
            let _ = writeln!(
                text_out,
                "{idx}: {} {} {} {} -> {} ({})",
                request.user,
                request.account,
                request.action,
                request.resource,
                decision.verdict,
                decision.reason
            );
        }
        jsonl.push_str(&line.to_string());
        jsonl.push('\n');
    }

    let mut out = Output::default();
    match &args.output {
        Some(path) => out.files.push((path.clone(), jsonl)),
        None => {
            out.stdout = match cli.format {
                Format::Json => jsonl,
                Format::Text => text_out,
            }
        }
    }
    if let Some(path) = &args.emit_log {
        let archive = sink.into_inner().expect("sink not poisoned");
        out.files.push((path.clone(), archive.to_jsonl()));
    }
    Ok(out)
}


fn cmd_analyze(cli: &Cli, args: &AnalyzeArgs) -> CmdResult {
    let org = load_org(cli)?;
    let archive = read_merged(&args.logs)?;
    let index = build_usage_index(&org, archive.events()).map_err(Failure::invalid)?;
    match &args.command {
        AnalyzeCommand::Unused { as_of, threshold_days } => {
            let report = unused_report(&index, &org, *as_of, *threshold_days);
            Ok(Output::stdout(match cli.format {
                Format::Json => {
                    let mut s = report.to_json();
                    s.push('\n');
                    s
                }
                Format::Text => report.to_text(),
            }))
        }
        AnalyzeCommand::Generate { principal, level, window, policy_out } => {
            let verbs = verb_table(cli)?;
            let level = ActionLevel::try_from(*level).map_err(Failure::invalid)?;
            let generated = generate_least_privilege(
                &org, &index, &verbs, principal, level, *window, cli.seed,
            )
            .map_err(Failure::invalid)?;
            let document = format!("{}\n", generated.document.to_json_pretty());
            let mut out = Output::stdout(match cli.format {
                Format::Json => pretty(&serde_json::to_value(&generated).expect("serializes")),
                Format::Text => format!("{document}{}", generated.summary()),
            });
            if let Some(path) = policy_out {
                out.files.push((path.clone(), document));
            }
            Ok(out)
        }
    }
}

fn cmd_audit(cli: &Cli, command: &AuditCommand) -> CmdResult {
    match command {
        AuditCommand::Merge { logs, out } => {
            let merged = read_merged(logs)?;
            let target = out.clone().unwrap_or_else(|| {
                logs[0]
                    .parent()
                    .unwrap_or_else(|| Path::new(""))
                    .join(ARCHIVE_FILE_NAME)
            });
            let accounts: Vec<&str> = merged.accounts_covered().into_iter().collect();
            let stdout = match cli.format {
                Format::Json => pretty(&json!({
                    "archive": target.display().to_string(),
                    "inputs": logs.len(),
                    "events": merged.len(),
                    "accounts_covered": accounts,
                })),
                Format::Text => format!(
                    "merged {} events from {} logs covering {} accounts into {}\n",
                    merged.len(),
                    logs.len(),
                    accounts.len(),
                    target.display()
                ),
            };
            let mut output = Output::stdout(stdout);
            output.files.push((target, merged.to_jsonl()));
            Ok(output)
        }
        AuditCommand::Query { logs, filter } => {
            let merged = read_merged(logs)?;
            let hits = query(&merged, &filter.to_filter()).map_err(Failure::invalid)?;
            let mut stdout = String::new();
            for e in &hits {
                match cli.format {
                    Format::Json => {
                        stdout.push_str(&e.to_json_line());
                        stdout.push('\n');
                    }
                    Format::Text => {
                        let action = e.action.as_ref().map(ToString::to_string).unwrap_or_default();
                        let _ = writeln!(
                            stdout,
                            "{} {} {} {} {} {} {}",
                            e.time,
                            e.kind,
                            e.user,
                            e.account,
                            if action.is_empty() { "-" } else { &action },
                            e.resource.as_deref().unwrap_or("-"),
                            e.verdict
                        );
                    }
                }
            }
            if cli.format == Format::Text {
                let _ = writeln!(stdout, "{} events", hits.len());
            }
            Ok(Output::stdout(stdout))
        }
        AuditCommand::DeniedSummary { logs, bucket } => {
            let merged = read_merged(logs)?;
            let cells = denied_access_summary(&merged, *bucket).map_err(Failure::invalid)?;
            let total: usize = cells.iter().map(|c| c.count).sum();
            let stdout = match cli.format {
                Format::Json => pretty(&json!({ "cells": cells, "total": total })),
                Format::Text => {
                    let mut s = String::new();
                    for c in &cells {
                        let _ = writeln!(s, "{} {} {} {}", c.bucket_start, c.user, c.account, c.count);
                    }
                    let _ = writeln!(s, "total {total}");
                    s
                }
            };
            Ok(Output::stdout(stdout))
        }
    }
}
