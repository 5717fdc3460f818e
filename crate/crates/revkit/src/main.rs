use clap::Parser;

fn main() -> anyhow::Result<()> {
    revkit::cli::run(revkit::cli::Cli::parse())
}
