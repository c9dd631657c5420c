//! External predictors: any executable speaking a line-oriented protocol
//! over stdin/stdout.
//!
//! Wire protocol (UTF-8, one child process reused across calls):
//!
//! 1. For classification tasks the child prints one line at startup:
//!    `CLASSES a,b,c`, the class labels in the order its probabilities will
//!    use. Regression children print nothing at startup.
//! 2. For each batch the parent writes `PREDICT <m>` on its own line,
//!    followed by `m` CSV rows (no header, columns in training-schema order,
//!    categorical values as level labels, floats with a `.` decimal point).
//! 3. The child replies with `m` lines: one decimal float per line for
//!    regression, or comma-separated per-class probabilities (in the
//!    declared class order) for classification.
//!
//! The child must be stateless across batches: the reply to a batch may
//! depend only on the rows in that batch. Access to the child is serialized
//! internally, so the predictor is safe to share between threads.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::time::Duration;

use crate::error::Error;
use crate::models::{resolve_features, Feature, Predictions, Predictor, Task};
use crate::tabular::Table;
use crate::Result;

/// Task declared for an external model. Classification class labels are read
/// from the child's `CLASSES` line at startup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskDecl {
    Regression,
    Classification,
}

pub struct ExternalConfig {
    /// Command and arguments to spawn.
    pub argv: Vec<String>,
    pub task: TaskDecl,
    /// Feature schema the child expects, in wire order.
    pub features: Vec<Feature>,
    /// Per-line reply timeout.
    pub timeout: Duration,
}

impl ExternalConfig {
    pub fn new(argv: Vec<String>, task: TaskDecl, features: Vec<Feature>) -> Self {
        ExternalConfig { argv, task, features, timeout: Duration::from_secs(30) }
    }
}

#[derive(Debug)]
struct ChildIo {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl ChildIo {
    fn read_line(&mut self, timeout: Duration) -> Result<String> {
        match self.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(Error::protocol(format!("reading from child: {e}"))),
            Err(RecvTimeoutError::Timeout) => {
                Err(Error::protocol(format!("child reply timed out after {timeout:?}")))
            }
            Err(RecvTimeoutError::Disconnected) => {
                Err(Error::protocol("child closed its stdout (exited?)"))
            }
        }
    }
}

impl Drop for ChildIo {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Predictor backed by a child process speaking the wire protocol.
#[derive(Debug)]
pub struct ExternalPredictor {
    task: Task,
    features: Vec<Feature>,
    feature_names: Vec<String>,
    argv: Vec<String>,
    timeout: Duration,
    io: Mutex<ChildIo>,
}

/// Spawns the child and, for classification, reads its `CLASSES` line.
pub fn external_predictor(config: ExternalConfig) -> Result<ExternalPredictor> {
    if config.argv.is_empty() {
        return Err(Error::arg("external command is empty"));
    }
    let mut cmd = Command::new(&config.argv[0]);
    cmd.args(&config.argv[1..])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit());
    let mut child = cmd
        .spawn()
        .map_err(|e| Error::protocol(format!("cannot spawn '{}': {e}", config.argv[0])))?;
    let stdin = child.stdin.take().expect("piped stdin");
    let stdout = child.stdout.take().expect("piped stdout");

    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let reader = BufReader::new(stdout);
        for line in reader.lines() {
            if tx.send(line).is_err() {
                break;
            }
        }
    });

    let mut io = ChildIo { child, stdin, lines: rx };
    let task = match config.task {
        TaskDecl::Regression => Task::Regression,
        TaskDecl::Classification => {
            let line = io.read_line(config.timeout)?;
            let rest = line
                .strip_prefix("CLASSES ")
                .ok_or_else(|| Error::protocol(format!("expected 'CLASSES ...', got '{line}'")))?;
            let classes: Vec<String> = rest.split(',').map(|s| s.trim().to_string()).collect();
            if classes.is_empty() || classes.iter().any(|c| c.is_empty()) {
                return Err(Error::protocol(format!("malformed class list '{rest}'")));
            }
            Task::Classification { classes }
        }
    };

    Ok(ExternalPredictor {
        task,
        feature_names: config.features.iter().map(|f| f.name.clone()).collect(),
        features: config.features,
        argv: config.argv,
        timeout: config.timeout,
        io: Mutex::new(io),
    })
}

impl ExternalPredictor {
    pub fn argv(&self) -> &[String] {
        &self.argv
    }
}

impl Predictor for ExternalPredictor {
    fn task(&self) -> &Task {
        &self.task
    }

    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    fn predict(&self, rows: &Table) -> Result<Predictions> {
        // Validate the schema even for empty batches.
        resolve_features(&self.features, rows)?;
        let m = rows.n();
        if m == 0 {
            return Ok(match self.task {
                Task::Regression => Predictions::Regression(vec![]),
                Task::Classification { .. } => Predictions::Classification(vec![]),
            });
        }
        let cols: Vec<usize> =
            self.features.iter().map(|f| rows.column(&f.name).unwrap()).collect();

        let mut batch = Vec::with_capacity(m * 16);
        batch.extend_from_slice(format!("PREDICT {m}\n").as_bytes());
        {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut batch);
            for row in 0..m {
                w.write_record(cols.iter().map(|&c| rows.columns()[c].cell_string(row)))
                    .map_err(|e| Error::protocol(format!("encoding rows: {e}")))?;
            }
            w.flush().map_err(|e| Error::protocol(format!("encoding rows: {e}")))?;
        }

        let mut io = self.io.lock().expect("external predictor mutex");
        io.stdin
            .write_all(&batch)
            .and_then(|_| io.stdin.flush())
            .map_err(|e| Error::protocol(format!("writing to child: {e}")))?;

        match &self.task {
            Task::Regression => {
                let mut out = Vec::with_capacity(m);
                for i in 0..m {
                    let line = io.read_line(self.timeout)?;
                    let v: f64 = line.trim().parse().map_err(|_| {
                        Error::protocol(format!("reply line {} is not a float: '{line}'", i + 1))
                    })?;
                    if !v.is_finite() {
                        return Err(Error::protocol(format!("non-finite prediction '{line}'")));
                    }
                    out.push(v);
                }
                Ok(Predictions::Regression(out))
            }
            Task::Classification { classes } => {
                let k = classes.len();
                let mut out = Vec::with_capacity(m);
                for i in 0..m {
                    let line = io.read_line(self.timeout)?;
                    let probs: Vec<f64> = line
                        .trim()
                        .split(',')
                        .map(|s| s.trim().parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| {
                            Error::protocol(format!(
                                "reply line {} is not a probability row: '{line}'",
                                i + 1
                            ))
                        })?;
                    if probs.len() != k {
                        return Err(Error::protocol(format!(
                            "reply line {} has {} probabilities, expected {k}",
                            i + 1,
                            probs.len()
                        )));
                    }
                    let sum: f64 = probs.iter().sum();
                    if probs.iter().any(|p| !(-1e-9..=1.0 + 1e-9).contains(p))
                        || (sum - 1.0).abs() > 1e-9
                    {
                        return Err(Error::protocol(format!(
                            "reply line {} is not a probability distribution: '{line}'",
                            i + 1
                        )));
                    }
                    out.push(probs.iter().map(|p| p.clamp(0.0, 1.0)).collect());
                }
                Ok(Predictions::Classification(out))
            }
        }
    }
}
