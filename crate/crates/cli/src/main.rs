use std::io::Write;

fn main() {
    let args = std::env::args_os().map(|a| a.to_string_lossy().into_owned());
    let out = freefold_cli::run(args);
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    std::process::exit(out.code);
}
