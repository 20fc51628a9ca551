//! Line-delimited episode log: one JSON record per line, UTF-8.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::core::types::EpisodeRecord;

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: parse error: {source}")]
    Parse {
        line: usize,
        source: serde_json::Error,
    },
    #[error("line {line}: invalid record: {reason}")]
    Validation { line: usize, reason: String },
}

/// Serialized append handle used by the runner's writer.
pub struct LogWriter {
    inner: BufWriter<File>,
}

impl LogWriter {
    pub fn create(path: &Path) -> Result<Self, LogError> {
        Ok(LogWriter {
            inner: BufWriter::new(File::create(path)?),
        })
    }

    pub fn append(path: &Path) -> Result<Self, LogError> {
        let file = File::options().create(true).append(true).open(path)?;
        Ok(LogWriter {
            inner: BufWriter::new(file),
        })
    }

    pub fn write(&mut self, record: &EpisodeRecord) -> Result<(), LogError> {
        debug_assert!(record.validate().is_ok());
        let line = serde_json::to_string(record).expect("record serializes");
        self.inner.write_all(line.as_bytes())?;
        self.inner.write_all(b"\n")?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<(), LogError> {
        self.inner.flush()?;
        Ok(())
    }
}

pub fn write_episode_log(records: &[EpisodeRecord], path: &Path) -> Result<(), LogError> {
    let mut w = LogWriter::create(path)?;
    for r in records {
        w.write(r)?;
    }
    w.flush()
}

pub fn read_episode_log(path: &Path) -> Result<Vec<EpisodeRecord>, LogError> {
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: EpisodeRecord =
            serde_json::from_str(&line).map_err(|source| LogError::Parse {
                line: i + 1,
                source,
            })?;
        record.validate().map_err(|reason| LogError::Validation {
            line: i + 1,
            reason,
        })?;
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::types::{Domain, FaultEvent, SCHEMA_VERSION};
    use crate::domains::state::DomainState;
    use tempfile::tempdir;

    fn record(task: &str) -> EpisodeRecord {
        EpisodeRecord {
            schema_version: SCHEMA_VERSION,
            task_id: task.into(),
            epsilon: 0.0,
            lambda_level: 0.0,
            fault_profile: None,
            trial_index: 0,
            agent_id: "react".into(),
            model_id: "stub".into(),
            seed: 1,
            perturbed_description: "d".into(),
            applied_mrs: vec![],
            transcript: vec![],
            tool_calls: vec![],
            fault_events: vec![],
            success: true,
            final_state: DomainState::empty(Domain::Scheduling),
            tokens_in: 10,
            tokens_out: 5,
            wall_ms: 3,
            cost_usd: 0.0,
        }
    }

    #[test]
    fn empty_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("log.jsonl");
        write_episode_log(&[], &path).unwrap();
        assert!(read_episode_log(&path).unwrap().is_empty());
    }

    #[test]
    fn round_trip_identity() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("log.jsonl");
        let records: Vec<_> = (0..5).map(|i| record(&format!("t{i}"))).collect();
        write_episode_log(&records, &path).unwrap();
        assert_eq!(read_episode_log(&path).unwrap(), records);
    }

    #[test]
    fn malformed_line_names_line_number() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("log.jsonl");
        let mut records = vec![record("a")];
        write_episode_log(&records, &path).unwrap();
        let mut text = std::fs::read_to_string(&path).unwrap();
        text.push_str("{not json\n");
        std::fs::write(&path, text).unwrap();
        match read_episode_log(&path) {
            Err(LogError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        records.clear();
    }

    #[test]
    fn invariant_violation_rejected_on_read() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("log.jsonl");
        let mut r = record("a");
        r.fault_events.push(FaultEvent {
            tool_call_index: 9,
            fault_id: "TransientTimeout".into(),
            was_explicit: true,
            recovered: false,
        });
        let line = serde_json::to_string(&r).unwrap();
        std::fs::write(&path, format!("{line}\n")).unwrap();
        assert!(matches!(
            read_episode_log(&path),
            Err(LogError::Validation { line: 1, .. })
        ));
    }
}
