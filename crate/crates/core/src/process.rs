//! Request/response line protocol over a child process, shared by the
//! subprocess translator and the external tagger.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

#[derive(Debug, thiserror::Error)]
pub enum LineError {
    #[error("empty command line")]
    EmptyArgv,
    #[error("failed to spawn `{program}`: {source}")]
    Spawn {
        program: String,
        #[source]
        source: std::io::Error,
    },
    #[error("i/o error talking to child process: {0}")]
    Io(#[from] std::io::Error),
    #[error("child process closed its output")]
    Closed,
    #[error("no response within {0:?}")]
    Timeout(Duration),
}

/// Escapes backslash, newline, carriage return and tab so a value fits on
/// one protocol line.
pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

pub fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('t') => out.push('\t'),
            Some('\\') => out.push('\\'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

struct Running {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl Drop for Running {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// A lazily spawned child process answering one line per request line.
/// After a timeout or a broken pipe the child is discarded and respawned on
/// the next request, so a late answer can never be paired with the wrong
/// request.
pub struct LineProcess {
    argv: Vec<String>,
    timeout: Duration,
    running: Mutex<Option<Running>>,
}

impl LineProcess {
    pub fn new(argv: Vec<String>, timeout: Duration) -> Result<Self, LineError> {
        if argv.is_empty() {
            return Err(LineError::EmptyArgv);
        }
        Ok(Self {
            argv,
            timeout,
            running: Mutex::new(None),
        })
    }

    pub fn argv(&self) -> &[String] {
        &self.argv
    }

    fn spawn(&self) -> Result<Running, LineError> {
        let mut child = Command::new(&self.argv[0])
            .args(&self.argv[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| LineError::Spawn {
                program: self.argv[0].clone(),
                source,
            })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Running {
            child,
            stdin,
            lines: rx,
        })
    }

    /// Sends the request lines in order and collects one response line per
    /// request. Requests must not contain raw newlines.
    pub fn exchange(&self, requests: &[String]) -> Result<Vec<String>, LineError> {
        let mut guard = self.running.lock().unwrap_or_else(|p| p.into_inner());
        if guard.is_none() {
            *guard = Some(self.spawn()?);
        }
        let result = Self::exchange_with(guard.as_mut().expect("spawned"), requests, self.timeout);
        if result.is_err() {
            *guard = None;
        }
        result
    }

    fn exchange_with(
        running: &mut Running,
        requests: &[String],
        timeout: Duration,
    ) -> Result<Vec<String>, LineError> {
        let mut payload = String::new();
        for r in requests {
            payload.push_str(r);
            payload.push('\n');
        }
        running.stdin.write_all(payload.as_bytes())?;
        running.stdin.flush()?;
        let mut out = Vec::with_capacity(requests.len());
        for _ in requests {
            match running.lines.recv_timeout(timeout) {
                Ok(Ok(line)) => out.push(line.trim_end_matches('\r').to_string()),
                Ok(Err(e)) => return Err(LineError::Io(e)),
                Err(RecvTimeoutError::Timeout) => return Err(LineError::Timeout(timeout)),
                Err(RecvTimeoutError::Disconnected) => return Err(LineError::Closed),
            }
        }
        Ok(out)
    }
}
