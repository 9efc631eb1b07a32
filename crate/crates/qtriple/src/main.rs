use clap::Parser;

fn main() {
    let args = qtriple::cli::Args::parse();
    std::process::exit(qtriple::cli::main_with_args(args));
}
