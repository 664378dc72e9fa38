mod args;
mod commands;
mod progress;
mod report;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::{json, Value};

use args::{Cli, Command};
use commands::{CliError, Ctx};
use dupscan::Execution;

fn name(c: &Command) -> &'static str {
    match c {
        Command::Ingest(_) => "ingest",
        Command::Embed(_) => "embed",
        Command::Cluster(_) => "cluster",
        Command::Sweep(_) => "sweep",
        Command::Ropm(_) => "ropm",
        Command::Graph(_) => "graph",
        Command::Communities(_) => "communities",
        Command::Screen(_) => "screen",
        Command::Toxicity(_) => "toxicity",
        Command::Specious(_) => "specious",
        Command::Timeline(_) => "timeline",
        Command::Synth(_) => "synth",
        Command::Evaluate(_) => "evaluate",
        Command::Report => "report",
    }
}

fn run(cli: &Cli) -> commands::CliResult<Value> {
    let exec = match cli.threads {
        Some(0) => return Err(CliError::Usage("--threads must be positive".into())),
        Some(1) => Execution::Sequential,
        Some(n) => {
            // Fails only when a pool already exists, which cannot happen here.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
            Execution::Parallel
        }
        None => Execution::Parallel,
    };
    std::fs::create_dir_all(&cli.out).map_err(|e| dupscan::Error::io(&cli.out, e))?;
    let ctx = Ctx {
        out: cli.out.clone(),
        seed: cli.seed,
        exec,
    };
    match &cli.command {
        Command::Ingest(a) => commands::ingest(&ctx, a),
        Command::Embed(a) => commands::embed(&ctx, a),
        Command::Cluster(a) => commands::cluster(&ctx, a),
        Command::Sweep(a) => commands::sweep(&ctx, a),
        Command::Ropm(a) => commands::ropm(&ctx, a),
        Command::Graph(a) => commands::graph(&ctx, a),
        Command::Communities(a) => commands::communities(&ctx, a),
        Command::Screen(a) => commands::screen(&ctx, a),
        Command::Toxicity(a) => commands::toxicity(&ctx, a),
        Command::Specious(a) => commands::specious(&ctx, a),
        Command::Timeline(a) => commands::timeline(&ctx, a),
        Command::Synth(a) => commands::synth(&ctx, a),
        Command::Evaluate(a) => commands::evaluate_cmd(&ctx, a),
        Command::Report => report::report(&ctx),
    }
}

fn main() -> ExitCode {
    progress::init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let command = name(&cli.command);
    progress::event(command, json!({"event": "start"}));
    let (summary, code) = match run(&cli) {
        Ok(fields) => {
            let mut s = json!({"command": command, "status": "ok"});
            if let (Some(o), Value::Object(f)) = (s.as_object_mut(), fields) {
                o.extend(f);
            }
            (s, 0)
        }
        Err(CliError::Usage(msg)) => (
            json!({"command": command, "status": "usage_error", "error": msg}),
            1,
        ),
        Err(CliError::Data(e)) => (
            json!({"command": command, "status": "data_error", "error": format!("{e:#}")}),
            2,
        ),
    };
    progress::event(command, json!({"event": "end", "exit_code": code}));
    println!("{summary}");
    ExitCode::from(code)
}
