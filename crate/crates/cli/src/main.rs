use clap::Parser;

fn main() {
    let cli = reebforge_cli::Cli::parse();
    if let Err(e) = reebforge_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.code);
    }
}
