use clap::Parser;

use anyonvlasov_cli::{main_with, Cli};

fn main() {
    let cli = Cli::parse();
    match main_with(cli) {
        Ok(dir) => println!("{}", dir.display()),
        Err(e) => {
            eprintln!("anyonvlasov: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
