use clap::Parser;

fn main() {
    let cli = chanfsi::cli::Cli::parse();
    std::process::exit(chanfsi::cli::execute(cli));
}
