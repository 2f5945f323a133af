use clap::Parser;

fn main() {
    let cli = blockspec::cli::Cli::parse();
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = blockspec::cli::execute(cli, &mut stdout) {
        eprintln!("blockspec: {e}");
        std::process::exit(e.exit_code());
    }
}
