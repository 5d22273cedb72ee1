use clap::Parser;
use spinlev_cli::app::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match run(&cli, &argv) {
        Ok(m) => {
            for f in &m.outputs {
                println!("{}", cli.out_dir.join(&f.file).display());
            }
            println!("{}", cli.out_dir.join("manifest.json").display());
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
