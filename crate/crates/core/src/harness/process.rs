//! Child-process execution with a wall deadline, a data-segment cap and
//! process-group cleanup.

use std::collections::BTreeMap;
use std::io::{self, Read, Write};
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::path::PathBuf;
use std::process::{ChildStdin, Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

/// Captured stdout/stderr beyond this many bytes is discarded.
pub const OUTPUT_CAPTURE_LIMIT: usize = 16 << 20;

const POLL_INTERVAL: Duration = Duration::from_millis(5);

/// What happens to the child's stdin once the test input has been written.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StdinMode {
    /// Keep the pipe open until the process exits, so a program that reads
    /// past the provided input blocks and runs into the deadline.
    #[default]
    HoldOpen,
    /// Close the pipe after writing; reads past the input see EOF.
    Close,
}

#[derive(Debug, Clone)]
pub struct ProcessSpec {
    pub argv: Vec<String>,
    pub cwd: PathBuf,
    pub env: BTreeMap<String, String>,
    pub stdin: Vec<u8>,
    pub stdin_mode: StdinMode,
    pub deadline: Duration,
    /// Bytes; applied as RLIMIT_DATA.
    pub memory_cap: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Exited(i32),
    Signaled(i32),
    TimedOut,
}

impl ExitKind {
    pub fn success(self) -> bool {
        self == ExitKind::Exited(0)
    }
}

#[derive(Debug, Clone)]
pub struct ProcessOutput {
    pub exit: ExitKind,
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
    pub elapsed: Duration,
}

impl ProcessOutput {
    pub fn stdout_text(&self) -> String {
        String::from_utf8_lossy(&self.stdout).into_owned()
    }

    pub fn stderr_text(&self) -> String {
        String::from_utf8_lossy(&self.stderr).into_owned()
    }
}

/// Runs `spec` to completion or until the deadline, whichever comes first.
///
/// Returns `ErrorKind::NotFound` when the program cannot be resolved, so
/// callers can tell a missing toolchain from a failing program.
pub fn run_process(spec: &ProcessSpec) -> io::Result<ProcessOutput> {
    let (program, args) = spec
        .argv
        .split_first()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "empty argv"))?;

    let mut cmd = Command::new(program);
    cmd.args(args)
        .current_dir(&spec.cwd)
        .envs(&spec.env)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .process_group(0);

    if let Some(cap) = spec.memory_cap {
        let limit = libc::rlimit {
            rlim_cur: cap as libc::rlim_t,
            rlim_max: cap as libc::rlim_t,
        };
        // SAFETY: setrlimit is async-signal-safe and only touches the child.
        unsafe {
            cmd.pre_exec(move || {
                if libc::setrlimit(libc::RLIMIT_DATA, &limit) != 0 {
                    return Err(io::Error::last_os_error());
                }
                Ok(())
            });
        }
    }

    let start = Instant::now();
    let mut child = cmd.spawn()?;
    let pid = child.id() as libc::pid_t;

    let stdin = child.stdin.take().expect("stdin piped");
    let input = spec.stdin.clone();
    let mode = spec.stdin_mode;
    let writer = thread::spawn(move || feed_stdin(stdin, &input, mode));

    let mut stdout = child.stdout.take().expect("stdout piped");
    let mut stderr = child.stderr.take().expect("stderr piped");
    let out_reader = thread::spawn(move || capture(&mut stdout));
    let err_reader = thread::spawn(move || capture(&mut stderr));

    let mut timed_out = false;
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if start.elapsed() >= spec.deadline {
            timed_out = true;
            kill_group(pid);
            break child.wait()?;
        }
        thread::sleep(POLL_INTERVAL);
    };
    let elapsed = start.elapsed();

    // Stragglers in the group would otherwise keep the pipes open.
    kill_group(pid);

    // The writer may be parked on a full pipe or holding stdin open; either
    // way it finishes once the child is gone.
    let _ = writer.join();
    let stdout = out_reader.join().unwrap_or_default();
    let stderr = err_reader.join().unwrap_or_default();

    let exit = if timed_out {
        ExitKind::TimedOut
    } else if let Some(code) = status.code() {
        ExitKind::Exited(code)
    } else {
        ExitKind::Signaled(status.signal().unwrap_or(0))
    };

    Ok(ProcessOutput {
        exit,
        stdout,
        stderr,
        elapsed,
    })
}

fn feed_stdin(mut stdin: ChildStdin, input: &[u8], mode: StdinMode) -> Option<ChildStdin> {
    // EPIPE just means the child stopped reading.
    let _ = stdin.write_all(input);
    let _ = stdin.flush();
    match mode {
        StdinMode::HoldOpen => Some(stdin),
        StdinMode::Close => None,
    }
}

fn capture(pipe: &mut impl Read) -> Vec<u8> {
    let mut kept = Vec::new();
    let mut buf = [0u8; 8192];
    loop {
        match pipe.read(&mut buf) {
            Ok(0) => break,
            Ok(n) => {
                let room = OUTPUT_CAPTURE_LIMIT.saturating_sub(kept.len());
                kept.extend_from_slice(&buf[..n.min(room)]);
            }
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(_) => break,
        }
    }
    kept
}

fn kill_group(pid: libc::pid_t) {
    // SAFETY: plain syscall on a process group we created.
    unsafe {
        libc::kill(-pid, libc::SIGKILL);
    }
}
