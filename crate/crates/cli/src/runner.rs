use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::experiments::run_experiment;
use crate::output::ExperimentOutput;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out_dir: Option<PathBuf>,
    pub check: bool,
    /// Worker threads; the global rayon default when absent.
    pub threads: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub output: ExperimentOutput,
    pub written: Vec<PathBuf>,
}

fn write(path: &Path, body: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.display().to_string(),
            source,
        })?;
    }
    std::fs::write(path, body).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn sibling(main: &Path, suffix: &str) -> PathBuf {
    let stem = main
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    main.with_file_name(format!("{stem}_{suffix}.csv"))
}

pub fn main_output_path(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> PathBuf {
    let file = PathBuf::from(cfg.output_file());
    match out_dir {
        Some(dir) => dir.join(file.file_name().map(PathBuf::from).unwrap_or(file)),
        None => file,
    }
}

/// Load, validate, run, write CSVs and (with `check`) print one line per check.
pub fn execute(opts: &RunOptions) -> CliResult<RunReport> {
    let cfg = ExperimentConfig::load(&opts.config)?;
    cfg.validate()?;
    let output = match opts.threads {
        Some(0) => return Err(CliError::validation("--threads", "must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::validation("--threads", e.to_string()))?
            .install(|| run_experiment(&cfg))?,
        None => run_experiment(&cfg)?,
    };
    let main = main_output_path(&cfg, opts.out_dir.as_deref());
    write(&main, output.main.as_str())?;
    let mut written = vec![main.clone()];
    for (suffix, csv) in &output.extra {
        let p = sibling(&main, suffix);
        write(&p, csv.as_str())?;
        written.push(p);
    }
    if opts.check {
        for c in &output.checks {
            println!("{}", c.line());
        }
        let failed = output.checks.iter().filter(|c| !c.pass).count();
        if failed > 0 {
            return Err(CliError::CheckFailed {
                failed,
                total: output.checks.len(),
            });
        }
    }
    Ok(RunReport { output, written })
}
