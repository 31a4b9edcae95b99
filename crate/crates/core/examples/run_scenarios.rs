use std::path::PathBuf;

use disconn::scenario::{verify_all, Format, RunOptions};

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios"));
    let results = match verify_all(&dir, &RunOptions::default()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    for (file, result) in results {
        match result {
            Ok(report) => println!("{}", report.render(Format::Table)),
            Err(e) => println!("{}: {e}\n", file.display()),
        }
    }
}
