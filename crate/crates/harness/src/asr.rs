//! External ASR invocation.
//!
//! The ASR system is an opaque subprocess described by a command template
//! with `{in}` and `{out}` placeholders. When `{out}` is present the
//! transcript is read from that file after the command exits; otherwise
//! standard output is captured. One retry on failure, a configurable
//! timeout, and text normalization on the way out.

use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use crate::cer::normalize_text;
use crate::{HarnessError, Result};

/// Command-template client for an external ASR process.
#[derive(Debug, Clone)]
pub struct AsrClient {
    /// Whitespace-separated executable and arguments; `{in}` expands to
    /// the input WAV path and `{out}` to the transcript output path.
    pub command_template: String,
    pub timeout_s: u64,
    pub working_dir: Option<PathBuf>,
}

impl AsrClient {
    pub fn new(command_template: impl Into<String>, timeout_s: u64) -> Self {
        Self { command_template: command_template.into(), timeout_s, working_dir: None }
    }

    /// Transcribe `wav`, retrying once on failure; the transcript is
    /// normalized before being returned.
    pub fn transcribe(&self, wav: &Path, scratch_dir: &Path) -> Result<String> {
        let mut last_err = None;
        for attempt in 0..2 {
            match self.run_once(wav, scratch_dir, attempt) {
                Ok(text) => return Ok(text),
                Err(e) => last_err = Some(e),
            }
        }
        Err(last_err.unwrap())
    }

    fn run_once(&self, wav: &Path, scratch_dir: &Path, attempt: u32) -> Result<String> {
        let uses_out_file = self.command_template.contains("{out}");
        let out_path = scratch_dir.join(format!(
            "{}.attempt{attempt}.txt",
            wav.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
        ));

        let argv: Vec<String> = self
            .command_template
            .split_whitespace()
            .map(|tok| {
                tok.replace("{in}", &wav.to_string_lossy())
                    .replace("{out}", &out_path.to_string_lossy())
            })
            .collect();
        if argv.is_empty() {
            return Err(HarnessError::Config("empty asr command template".into()));
        }

        let mut cmd = Command::new(&argv[0]);
        cmd.args(&argv[1..]).stdin(Stdio::null()).stderr(Stdio::null());
        cmd.stdout(if uses_out_file { Stdio::null() } else { Stdio::piped() });
        if let Some(dir) = &self.working_dir {
            cmd.current_dir(dir);
        }
        let mut child = cmd
            .spawn()
            .map_err(|e| HarnessError::Asr(format!("failed to spawn `{}`: {e}", argv[0])))?;

        let deadline = Instant::now() + Duration::from_secs(self.timeout_s);
        let status = loop {
            match child.try_wait().map_err(|e| HarnessError::Asr(e.to_string()))? {
                Some(status) => break status,
                None if Instant::now() >= deadline => {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(HarnessError::AsrTimeout(self.timeout_s));
                }
                None => std::thread::sleep(Duration::from_millis(20)),
            }
        };
        if !status.success() {
            return Err(HarnessError::Asr(format!("`{}` exited with {status}", argv[0])));
        }

        let raw = if uses_out_file {
            std::fs::read_to_string(&out_path)
                .map_err(HarnessError::io(out_path.to_string_lossy().into_owned()))?
        } else {
            let mut s = String::new();
            use std::io::Read;
            child
                .stdout
                .take()
                .ok_or_else(|| HarnessError::Asr("stdout not captured".into()))?
                .read_to_string(&mut s)
                .map_err(|e| HarnessError::Asr(e.to_string()))?;
            s
        };
        let text = normalize_text(raw.trim_end());
        if text.is_empty() {
            return Err(HarnessError::Asr("empty transcript".into()));
        }
        Ok(text)
    }
}
