use clap::Parser;

fn main() -> std::process::ExitCode {
    let cli = swarmnav::cli::Cli::parse();
    match swarmnav::cli::main_with(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}
