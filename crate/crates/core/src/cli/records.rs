//! Per-trial records and batch summaries.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::engine::{EndResult, Outcome, WholeTrialResult};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrialBody {
    Point(EndResult),
    Whole(WholeTrialResult),
}

/// One line of a batch's JSON-lines output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub schema_version: u32,
    pub index: u64,
    pub seed: u64,
    pub params_digest: String,
    pub n: usize,
    pub success: bool,
    pub body: TrialBody,
}

impl TrialRecord {
    pub fn point(index: u64, seed: u64, digest: &str, n: usize, r: EndResult) -> Self {
        TrialRecord {
            schema_version: SCHEMA_VERSION,
            index,
            seed,
            params_digest: digest.to_string(),
            n,
            success: r.success(),
            body: TrialBody::Point(r),
        }
    }

    pub fn whole(index: u64, seed: u64, digest: &str, n: usize, r: WholeTrialResult) -> Self {
        TrialRecord {
            schema_version: SCHEMA_VERSION,
            index,
            seed,
            params_digest: digest.to_string(),
            n,
            success: r.equivalent,
            body: TrialBody::Whole(r),
        }
    }

    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("records serialize");
        s.push('\n');
        s
    }

    pub fn from_line(line: &str) -> Result<Self> {
        let rec: TrialRecord = serde_json::from_str(line)?;
        if rec.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "record schema {} is not the supported version {SCHEMA_VERSION}",
                rec.schema_version
            )));
        }
        Ok(rec)
    }
}

/// Writes one record per line, flushing after each.
pub struct RecordWriter<W: Write> {
    inner: W,
}

impl<W: Write> RecordWriter<W> {
    pub fn new(inner: W) -> Self {
        RecordWriter { inner }
    }

    pub fn write(&mut self, rec: &TrialRecord) -> Result<()> {
        self.inner.write_all(rec.to_line().as_bytes())?;
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.inner
    }
}

/// Reads records, ignoring a trailing line cut short by an interrupted batch.
pub fn read_records<R: BufRead>(reader: R) -> Result<Vec<TrialRecord>> {
    let mut out = Vec::new();
    let mut lines = reader.split(b'\n').peekable();
    while let Some(line) = lines.next() {
        let line = line?;
        let last = lines.peek().is_none();
        if line.iter().all(u8::is_ascii_whitespace) {
            continue;
        }
        let text = String::from_utf8_lossy(&line);
        match TrialRecord::from_line(&text) {
            Ok(r) => out.push(r),
            Err(Error::Json(_)) if last => break,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: u64, trials: u64) -> Option<(f64, f64)> {
    if trials == 0 {
        return None;
    }
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    Some(((centre - half).max(0.0), (centre + half).min(1.0)))
}

/// Counts of event failures across trials. Only point trials contribute.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventTally {
    pub trials: u64,
    pub not_a: u64,
    pub not_b: u64,
    pub not_c: u64,
    pub not_d: u64,
    pub not_f: u64,
    /// `G` false or undefined.
    pub not_g: u64,
    pub guarantee: u64,
    pub containment_violations: u64,
    pub stop_coincidence_violations: u64,
}

impl EventTally {
    pub fn add(&mut self, r: &EndResult) {
        let e = &r.events;
        self.trials += 1;
        self.not_a += (e.a != Some(true)) as u64;
        self.not_b += !e.b as u64;
        self.not_c += !e.c as u64;
        self.not_d += !e.d as u64;
        self.not_f += !e.f as u64;
        self.not_g += (e.g != Some(true)) as u64;
        self.guarantee += e.guarantee_holds() as u64;
        self.containment_violations += e.violates_containment() as u64;
        self.stop_coincidence_violations += e.violates_stop_coincidence() as u64;
    }

    pub fn merge(&mut self, o: &EventTally) {
        self.trials += o.trials;
        self.not_a += o.not_a;
        self.not_b += o.not_b;
        self.not_c += o.not_c;
        self.not_d += o.not_d;
        self.not_f += o.not_f;
        self.not_g += o.not_g;
        self.guarantee += o.guarantee;
        self.containment_violations += o.containment_violations;
        self.stop_coincidence_violations += o.stop_coincidence_violations;
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub params_digest: String,
    pub trials: u64,
    pub successes: u64,
    pub no_data: u64,
    /// `None` when there were no trials.
    pub success_rate: Option<f64>,
    pub wilson_95: Option<(f64, f64)>,
    pub flags: Vec<String>,
    pub events: EventTally,
    /// Whole-loop trials in which every level had `B` through `G` true.
    pub whole_all_events: u64,
    /// Of those, the ones that reconstructed the window up to reflection.
    pub whole_all_events_equivalent: u64,
}

impl Summary {
    pub fn new(params_digest: &str) -> Self {
        Summary {
            schema_version: SCHEMA_VERSION,
            params_digest: params_digest.to_string(),
            ..Summary::default()
        }
    }

    pub fn add(&mut self, rec: &TrialRecord) {
        self.trials += 1;
        self.successes += rec.success as u64;
        match &rec.body {
            TrialBody::Point(r) => {
                self.no_data += (r.outcome == Outcome::NoData) as u64;
                self.events.add(r);
            }
            TrialBody::Whole(w) => {
                self.no_data += !w.complete as u64;
                for l in &w.levels {
                    self.events.add(&l.right);
                    self.events.add(&l.left);
                }
                if w.all_events_hold() {
                    self.whole_all_events += 1;
                    self.whole_all_events_equivalent += w.equivalent as u64;
                }
            }
        }
        self.finish();
    }

    /// Combines two partial summaries of the same experiment.
    pub fn merge(&mut self, o: &Summary) {
        self.trials += o.trials;
        self.successes += o.successes;
        self.no_data += o.no_data;
        self.events.merge(&o.events);
        self.whole_all_events += o.whole_all_events;
        self.whole_all_events_equivalent += o.whole_all_events_equivalent;
        self.finish();
    }

    /// Recomputes rates, intervals and flags from the counts.
    pub fn finish(&mut self) {
        self.success_rate = (self.trials > 0).then(|| self.successes as f64 / self.trials as f64);
        self.wilson_95 = wilson_interval(self.successes, self.trials);
        self.flags.clear();
        if self.trials == 0 {
            self.flags.push("no trials: success rate undefined".into());
        }
        if self.events.containment_violations > 0 {
            self.flags.push(format!(
                "{} trials had B, C, D, F, G true and A false",
                self.events.containment_violations
            ));
        }
        if self.events.stop_coincidence_violations > 0 {
            self.flags.push(format!(
                "{} trials had B, D, F true and a pattern stop that was not an oracle stop",
                self.events.stop_coincidence_violations
            ));
        }
    }

    pub fn from_records<'a>(digest: &str, recs: impl IntoIterator<Item = &'a TrialRecord>) -> Self {
        let mut s = Summary::new(digest);
        for r in recs {
            s.add(r);
        }
        s.finish();
        s
    }
}
