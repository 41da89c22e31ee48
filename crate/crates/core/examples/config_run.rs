//! Configuration-driven run, as performed by the `fracgraph` binary.

use std::path::Path;

use fracgraph::cli::{execute, with_outputs, Command, ExitStatus, RunConfig};

const CONFIG: &str = r#"{
    "graph": {"generator": "cycle", "n": 4},
    "s": [0.25, 0.5, 0.75],
    "potential": {"ramp": {"a": 1, "b": 1, "center": "0"}},
    "nonlinearity": "paper_example",
    "kernel": {"compare": true}
}"#;

pub fn run_example() -> fracgraph::Result<()> {
    let dir = std::env::temp_dir().join(format!("fracgraph-config-run-{}", std::process::id()));
    let overrides = vec!["solver.seed=3".to_string()];
    let cfg = with_outputs(RunConfig::from_text(CONFIG, &overrides, Path::new("."))?, Some(dir.clone()));
    for command in [Command::Validate, Command::Kernel, Command::Check, Command::Solve] {
        let status = execute(command, &cfg);
        println!("{command}: exit {}", status.code());
        assert_eq!(status, ExitStatus::Ok);
    }
    let mut files: Vec<String> = std::fs::read_dir(&dir)
        .map_err(|e| fracgraph::Error::Io { path: dir.clone(), source: e })?
        .filter_map(|e| e.ok().map(|e| e.file_name().to_string_lossy().into_owned()))
        .collect();
    files.sort();
    println!("outputs in {}: {files:?}", dir.display());
    let _ = std::fs::remove_dir_all(&dir);
    Ok(())
}

fn main() -> fracgraph::Result<()> {
    run_example()
}
