use clap::Parser;

fn main() {
    let cli = remdecay::cli::Cli::parse();
    if let Err(e) = remdecay::cli::run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
