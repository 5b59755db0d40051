use std::io::Write;

fn main() {
    let out = splitcross_cli::run_args(std::env::args_os());
    let _ = std::io::stdout().write_all(out.output.as_bytes());
    std::process::exit(out.code);
}
