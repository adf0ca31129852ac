use clap::Parser;

use pskit::cli::{run, Args, RunConfig};

fn main() {
    let args = Args::parse();
    let result = RunConfig::from_args(&args).and_then(|rc| run(&rc));
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
        }
        Err(e) => {
            eprintln!("pskit: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
