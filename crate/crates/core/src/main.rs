use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use kerr_dephase::config::load_json;
use kerr_dephase::scenario::ScenarioRegistry;
use kerr_dephase::Error;

/// Exact phase-damping dynamics under a cross-Kerr thermal reservoir.
#[derive(Parser, Debug)]
#[command(name = "kerr-dephase", version)]
struct Cli {
    /// characteristic | purity | lowerbound | negativity | master-eq | certify
    scenario: String,

    /// JSON config merged over the scenario defaults.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output file (CSV, or the text report for `certify`).
    #[arg(long)]
    out: PathBuf,

    /// Worker threads; 0 lets the pool decide.
    #[arg(long, env = "KERR_DEPHASE_THREADS", default_value_t = 0)]
    threads: usize,
}

fn run(cli: &Cli) -> Result<(), Error> {
    let registry = ScenarioRegistry::default();
    registry.get(&cli.scenario)?;
    let user = cli.config.as_deref().map(load_json).transpose()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let outcome = pool.install(|| registry.run(&cli.scenario, user.as_ref(), &cli.out))?;
    for line in &outcome.summary {
        println!("{line}");
    }
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
