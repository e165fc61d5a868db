use std::process::ExitCode;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match baire::cli::run_command(&argv) {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            eprintln!("{}", baire::cli::summary(&report));
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
