use clap::Parser;

use dcfunm_cli::args::{Cli, Command};
use dcfunm_cli::run;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match &cli.command {
        Some(Command::Bench(b)) => run::cmd_bench(b).map(|_| ()),
        Some(Command::Gen(g)) => run::cmd_gen(g),
        None => run::cmd_funm(&cli.funm).map(|_| ()),
    };
    if let Err(e) = res {
        eprintln!("error: {} {}", e.category, e.message);
        std::process::exit(e.category.exit_code());
    }
}
