//! Child processes with a wall-clock budget and whole-tree termination.

use std::ffi::OsString;
use std::io::{Read, Seek, SeekFrom};
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::path::Path;
use std::process::{Command, ExitStatus, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use crate::error::Result;

/// Output kept from each stream.
const OUTPUT_LIMIT: u64 = 256 * 1024;

#[derive(Debug)]
pub(crate) enum Exit {
    Status(ExitStatus),
    TimedOut,
}

#[derive(Debug)]
pub(crate) struct Finished {
    pub exit: Exit,
    pub stdout: String,
    pub stderr: String,
    pub elapsed: Duration,
}

impl Finished {
    pub fn success(&self) -> bool {
        matches!(&self.exit, Exit::Status(s) if s.success())
    }

    /// Terminated by a signal rather than exiting.
    pub fn signal(&self) -> Option<i32> {
        match &self.exit {
            Exit::Status(s) => s.signal(),
            Exit::TimedOut => None,
        }
    }
}

pub(crate) fn run(
    program: &OsString,
    args: &[&str],
    cwd: &Path,
    env: &[(String, OsString)],
    budget: Duration,
) -> Result<Finished> {
    let mut stdout = tempfile::tempfile()?;
    let mut stderr = tempfile::tempfile()?;
    let mut cmd = Command::new(program);
    cmd.args(args)
        .current_dir(cwd)
        .stdin(Stdio::null())
        .stdout(stdout.try_clone()?)
        .stderr(stderr.try_clone()?)
        .env_remove("CARGO_TARGET_DIR")
        .env_remove("RUSTC_WORKSPACE_WRAPPER")
        .env("RUST_BACKTRACE", "0")
        .env("CARGO_TERM_COLOR", "never")
        .process_group(0);
    for (k, v) in env {
        cmd.env(k, v);
    }

    let start = Instant::now();
    let mut child = cmd.spawn()?;
    let mut pause = Duration::from_millis(1);
    let exit = loop {
        if let Some(status) = child.try_wait()? {
            break Exit::Status(status);
        }
        if start.elapsed() >= budget {
            kill_group(child.id());
            let _ = child.wait();
            break Exit::TimedOut;
        }
        thread::sleep(pause);
        pause = (pause * 2).min(Duration::from_millis(20));
    };
    let elapsed = start.elapsed();

    Ok(Finished {
        exit,
        stdout: read_back(&mut stdout)?,
        stderr: read_back(&mut stderr)?,
        elapsed,
    })
}

fn kill_group(pid: u32) {
    // SAFETY: plain syscall; a stale group id at worst yields ESRCH.
    unsafe {
        libc::kill(-(pid as libc::pid_t), libc::SIGKILL);
    }
}

fn read_back(file: &mut std::fs::File) -> Result<String> {
    let len = file.seek(SeekFrom::End(0))?;
    file.seek(SeekFrom::Start(len.saturating_sub(OUTPUT_LIMIT)))?;
    let mut buf = Vec::new();
    file.take(OUTPUT_LIMIT).read_to_end(&mut buf)?;
    Ok(String::from_utf8_lossy(&buf).into_owned())
}
