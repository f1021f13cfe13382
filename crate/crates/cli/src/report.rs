//! Run reports and hashed output writing. Report keys go to stdout in a
//! fixed order; the wall time goes to stderr so that captured stdout and
//! written files stay byte-deterministic.

use sha2::{Digest, Sha256};
use std::io::Write;
use std::time::Duration;

pub struct RunReport {
    command: &'static str,
    config_echo: String,
    lines: Vec<(String, String)>,
}

impl RunReport {
    pub fn new(command: &'static str, config_echo: String) -> Self {
        RunReport {
            command,
            config_echo,
            lines: Vec::new(),
        }
    }

    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.lines.push((key.to_owned(), value.to_string()));
    }

    /// Prints `key: value` lines to stdout and the wall time to stderr.
    pub fn print(&self, wall_time: Duration) {
        println!("command: {}", self.command);
        println!("config: {}", self.config_echo);
        for (key, value) in &self.lines {
            println!("{key}: {value}");
        }
        eprintln!("wall_time_ms: {:.1}", wall_time.as_secs_f64() * 1e3);
    }
}

/// Forwards writes while hashing exactly the bytes that went through.
pub struct HashingWriter<W: Write> {
    inner: W,
    hasher: Sha256,
    bytes: u64,
}

impl<W: Write> HashingWriter<W> {
    pub fn new(inner: W) -> Self {
        HashingWriter {
            inner,
            hasher: Sha256::new(),
            bytes: 0,
        }
    }

    /// Flushes and returns `(hex digest, byte count)`.
    pub fn finish(mut self) -> std::io::Result<(String, u64)> {
        self.inner.flush()?;
        let digest = self.hasher.finalize();
        let hex = digest.iter().fold(String::new(), |mut acc, b| {
            acc.push_str(&format!("{b:02x}"));
            acc
        });
        Ok((hex, self.bytes))
    }
}

impl<W: Write> Write for HashingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        self.bytes += n as u64;
        Ok(n)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}
