use clap::Parser;

fn main() {
    let cli = uval::cli::Cli::parse();
    std::process::exit(uval::cli::run(cli));
}
