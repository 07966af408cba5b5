use clap::Parser;

fn main() {
    let cli = almab_cli::Cli::parse();
    if let Err(e) = almab_cli::execute(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
