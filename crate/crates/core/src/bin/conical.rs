use std::io::Write;

fn main() {
    let (code, out) = conical::cli::run(std::env::args_os(), &mut std::io::stdin().lock());
    let _ = std::io::stdout().write_all(out.as_bytes());
    std::process::exit(code);
}
