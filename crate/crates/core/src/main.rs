use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use confound_kit::cli::{run, thread_cap, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = thread_cap().and_then(|cap| {
        if let Some(n) = cap {
            // Only fails if a global pool already exists.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        run(cli)
    });
    match outcome {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(out.stdout.as_bytes());
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("confound-kit: {}", e.message());
            ExitCode::from(e.code() as u8)
        }
    }
}
