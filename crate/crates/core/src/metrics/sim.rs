use std::fs;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use wait_timeout::ChildExt;

const PLACEHOLDERS: [&str; 3] = ["{design}", "{testbench}", "{out}"];

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulator configuration: {0}")]
    InvalidConfig(String),
    #[error("simulator I/O failure: {0}")]
    Io(#[from] std::io::Error),
}

/// How to run one self-checking testbench. The command is a shell template
/// with `{design}`, `{testbench}` and `{out}` placeholders; a run passes
/// when it exits 0 and prints `success_pattern`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub name: String,
    pub command: String,
    pub success_pattern: String,
    pub timeout_secs: f64,
    /// File extension for the design and testbench files.
    #[serde(default = "default_extension")]
    pub extension: String,
}

fn default_extension() -> String {
    "v".into()
}

impl SimConfig {
    pub fn icarus() -> Self {
        SimConfig {
            name: "icarus".into(),
            command: "iverilog -g2012 -o {out}/sim.vvp {design} {testbench} && vvp -n {out}/sim.vvp"
                .into(),
            success_pattern: "ALL TESTS PASSED".into(),
            timeout_secs: 60.0,
            extension: default_extension(),
        }
    }

    pub fn verilator() -> Self {
        SimConfig {
            name: "verilator".into(),
            command: "verilator --binary -Wno-fatal --top-module tb --Mdir {out}/obj {design} {testbench} && {out}/obj/Vtb".into(),
            success_pattern: "ALL TESTS PASSED".into(),
            timeout_secs: 300.0,
            extension: default_extension(),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for p in PLACEHOLDERS {
            if !self.command.contains(p) {
                return Err(SimError::InvalidConfig(format!(
                    "command template for `{}` lacks {p}",
                    self.name
                )));
            }
        }
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return Err(SimError::InvalidConfig("timeout_secs must be positive".into()));
        }
        if self.success_pattern.is_empty() {
            return Err(SimError::InvalidConfig("success_pattern is empty".into()));
        }
        Ok(())
    }

    /// The executable the template starts with.
    pub fn program(&self) -> Option<&str> {
        self.command.split_whitespace().next()
    }

    pub fn is_available(&self) -> bool {
        self.program().is_some_and(|p| which::which(p).is_ok())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimStatus {
    Passed,
    Failed,
    Timeout,
    SimulatorUnavailable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub passed: bool,
    pub status: SimStatus,
    pub log: String,
}

impl SimResult {
    fn new(status: SimStatus, log: String) -> Self {
        SimResult {
            passed: status == SimStatus::Passed,
            status,
            log,
        }
    }
}

fn quote(path: &Path) -> String {
    format!("'{}'", path.display().to_string().replace('\'', r"'\''"))
}

#[cfg(unix)]
fn kill_group(child: &mut std::process::Child) {
    // the shell runs in its own process group; take down its children too
    unsafe {
        libc::kill(-(child.id() as libc::pid_t), libc::SIGKILL);
    }
    let _ = child.kill();
}

#[cfg(not(unix))]
fn kill_group(child: &mut std::process::Child) {
    let _ = child.kill();
}

/// Runs `testbench` against `design` in a fresh temporary directory.
pub fn pass_at_1(design: &str, testbench: &str, cfg: &SimConfig) -> Result<SimResult, SimError> {
    cfg.validate()?;
    if !cfg.is_available() {
        return Ok(SimResult::new(
            SimStatus::SimulatorUnavailable,
            format!("`{}` not found on PATH", cfg.program().unwrap_or("")),
        ));
    }
    let dir = tempfile::tempdir()?;
    let design_path = dir.path().join(format!("design.{}", cfg.extension));
    let tb_path = dir.path().join(format!("testbench.{}", cfg.extension));
    let out_dir = dir.path().join("out");
    fs::write(&design_path, design)?;
    fs::write(&tb_path, testbench)?;
    fs::create_dir(&out_dir)?;
    let log_path = dir.path().join("sim.log");
    let command = cfg
        .command
        .replace("{design}", &quote(&design_path))
        .replace("{testbench}", &quote(&tb_path))
        .replace("{out}", &quote(&out_dir));

    let log_file = fs::File::create(&log_path)?;
    let mut cmd = Command::new("sh");
    cmd.arg("-c")
        .arg(&command)
        .current_dir(dir.path())
        .stdin(Stdio::null())
        .stdout(log_file.try_clone()?)
        .stderr(log_file);
    #[cfg(unix)]
    {
        use std::os::unix::process::CommandExt;
        cmd.process_group(0);
    }
    let mut child = cmd.spawn()?;
    let status = child.wait_timeout(Duration::from_secs_f64(cfg.timeout_secs))?;
    let status = match status {
        Some(s) => s,
        None => {
            kill_group(&mut child);
            let _ = child.wait();
            let log = fs::read_to_string(&log_path).unwrap_or_default();
            return Ok(SimResult::new(SimStatus::Timeout, log));
        }
    };
    let log = String::from_utf8_lossy(&fs::read(&log_path)?).into_owned();
    let ok = status.success() && log.contains(&cfg.success_pattern);
    Ok(SimResult::new(
        if ok { SimStatus::Passed } else { SimStatus::Failed },
        log,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimCase {
    pub task: String,
    pub design: String,
    pub testbench: String,
}

/// Runs independent cases with at most `jobs` simulators at once; results
/// follow input order.
pub fn pass_at_1_batch(
    cases: &[SimCase],
    cfg: &SimConfig,
    jobs: usize,
) -> Result<Vec<SimResult>, SimError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
    pool.install(|| {
        cases
            .par_iter()
            .map(|c| pass_at_1(&c.design, &c.testbench, cfg))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn templates_must_name_every_placeholder() {
        assert!(SimConfig::icarus().validate().is_ok());
        assert!(SimConfig::verilator().validate().is_ok());
        let bad = SimConfig {
            command: "iverilog {design}".into(),
            ..SimConfig::icarus()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn missing_simulator_is_skipped_not_failed() {
        let cfg = SimConfig {
            command: "definitely-not-a-simulator-xyz {design} {testbench} {out}".into(),
            ..SimConfig::icarus()
        };
        let r = pass_at_1("module m(); endmodule", "", &cfg).unwrap();
        assert_eq!(r.status, SimStatus::SimulatorUnavailable);
        assert!(!r.passed);
    }
}
