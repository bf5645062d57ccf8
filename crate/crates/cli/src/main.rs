use std::io::Write;

fn main() {
    let result = lueq_cli::run(std::env::args_os());
    let (mut out, mut err) = (std::io::stdout().lock(), std::io::stderr().lock());
    if result.json {
        if let Some(p) = &result.payload {
            let _ = out.write_all(p.as_bytes());
        }
        let _ = err.write_all(result.report.as_bytes());
    } else if result.exit_code >= lueq_cli::EXIT_PARSE {
        let _ = err.write_all(result.report.as_bytes());
    } else {
        let _ = out.write_all(result.report.as_bytes());
    }
    std::process::exit(result.exit_code);
}
