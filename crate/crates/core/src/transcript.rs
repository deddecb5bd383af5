//! Line-oriented run logs.
//!
//! ```text
//! cayley-affine-lab/1
//! kind=second-preimage
//! seed=7
//! stage=recover_exponents L=4 a=2 b=2 multiplicity=1
//! ```
//!
//! Stage timings are recorded but only rendered on request, so that two runs
//! with the same seed produce byte-identical transcripts by default.

use std::fmt::Display;
use std::time::{Duration, Instant};

use crate::FORMAT_VERSION;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage {
    pub name: String,
    pub fields: Vec<(String, String)>,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    header: Vec<(String, String)>,
    stages: Vec<Stage>,
}

impl Transcript {
    pub fn new(kind: &str) -> Transcript {
        let mut t = Transcript::default();
        t.set("kind", kind);
        t
    }

    /// Sets (or replaces) a header field.
    pub fn set(&mut self, key: &str, value: impl Display) {
        let value = value.to_string();
        match self.header.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.header.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.header
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn push(&mut self, name: &str, fields: Vec<(&str, String)>, elapsed: Duration) {
        self.stages.push(Stage {
            name: name.to_string(),
            fields: fields
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            elapsed,
        });
    }

    /// Runs `f`, recording its duration and the fields it returns.
    pub fn timed<T>(
        &mut self,
        name: &str,
        f: impl FnOnce() -> (T, Vec<(&'static str, String)>),
    ) -> T {
        let start = Instant::now();
        let (value, fields) = f();
        self.push(name, fields, start.elapsed());
        value
    }

    /// Appends all stages of `other`, prefixing their names.
    pub fn absorb(&mut self, prefix: &str, other: &Transcript) {
        for stage in &other.stages {
            let mut stage = stage.clone();
            stage.name = format!("{prefix}.{}", stage.name);
            self.stages.push(stage);
        }
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn total_elapsed(&self) -> Duration {
        self.stages.iter().map(|s| s.elapsed).sum()
    }

    pub fn render(&self, with_timings: bool) -> String {
        let mut out = String::new();
        out.push_str(FORMAT_VERSION);
        out.push('\n');
        for (k, v) in &self.header {
            out.push_str(&format!("{k}={v}\n"));
        }
        for stage in &self.stages {
            out.push_str("stage=");
            out.push_str(&stage.name);
            for (k, v) in &stage.fields {
                out.push_str(&format!(" {k}={v}"));
            }
            if with_timings {
                out.push_str(&format!(" elapsed_us={}", stage.elapsed.as_micros()));
            }
            out.push('\n');
        }
        out
    }
}
