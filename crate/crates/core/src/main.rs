use clap::Parser;

fn main() {
    let cli = ngkde::cli::Cli::parse();
    if let Err(e) = ngkde::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
