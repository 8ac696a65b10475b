use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;
use karyoseg_service::cli::{run, Cli};
use karyoseg_service::ServiceError;

fn fail(e: ServiceError) -> ! {
    let _ = writeln!(std::io::stderr(), "{}", e.to_json());
    std::process::exit(1);
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => fail(ServiceError::invalid(e.to_string().trim_end())),
    };
    match run(cli) {
        Ok(serde_json::Value::Null) => {}
        Ok(v) => {
            let text = serde_json::to_string_pretty(&v).expect("json output");
            let _ = writeln!(std::io::stdout(), "{text}");
        }
        Err(e) => fail(e),
    }
}
