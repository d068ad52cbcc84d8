use clap::Parser;
use sqrtwiener_cli::args::Cli;
use sqrtwiener_cli::commands::run;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(&cli) {
        Ok(manifest) => println!("{}", manifest.display()),
        Err(e) => {
            eprintln!("sqrtwiener {}: {e}", cli.command.name());
            std::process::exit(e.exit_code());
        }
    }
}
