use std::io::Write;

fn main() {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = netdes::cli::run(std::env::args_os().skip(1), &mut out, &mut err);
    let _ = out.flush();
    std::process::exit(code);
}
