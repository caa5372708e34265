//! JSON state files: `{"lines": {"ABD": [[re, im], ...8 entries], ...}}`.
//! Entries follow the binary index order 000..111; omitted lines are zero.

use std::collections::BTreeMap;

use fano_e7::{Complex64, Hypermatrix, Line, SevenQubitState};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub lines: BTreeMap<String, Vec<[f64; 2]>>,
}

impl StateFile {
    /// Every nonzero line of `psi`.
    pub fn from_state(psi: &SevenQubitState) -> Self {
        let lines = psi
            .support()
            .into_iter()
            .map(|l| {
                let entries = psi.line(l).entries().iter().map(|c| [c.re, c.im]).collect();
                (l.name(), entries)
            })
            .collect();
        Self { lines }
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("malformed state file: {e}"))
    }

    pub fn read(path: &str) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state file serializes")
    }

    pub fn to_state(&self) -> Result<SevenQubitState, String> {
        let mut psi = SevenQubitState::zero();
        for (name, entries) in &self.lines {
            let line: Line = name.parse().map_err(|_| format!("unknown line {name:?}"))?;
            if entries.len() != 8 {
                return Err(format!(
                    "line {name} has {} entries, expected 8",
                    entries.len()
                ));
            }
            let values: [Complex64; 8] =
                std::array::from_fn(|i| Complex64::new(entries[i][0], entries[i][1]));
            let a = Hypermatrix::new(values).map_err(|e| format!("line {name}: {e}"))?;
            psi.set_line(line, a);
        }
        Ok(psi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut r = fano_e7::rng::stream(3, 0);
        let psi = SevenQubitState::random(&mut r, &Line::ALL, 1.0);
        let file = StateFile::from_state(&psi);
        let back = StateFile::parse(&file.to_json())
            .unwrap()
            .to_state()
            .unwrap();
        assert_eq!(back, psi);
    }

    #[test]
    fn omitted_lines_are_zero() {
        let text = r#"{"lines": {"BCE": [[1,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0]]}}"#;
        let psi = StateFile::parse(text).unwrap().to_state().unwrap();
        assert_eq!(psi.support(), vec!["BCE".parse::<Line>().unwrap()]);
        let empty = StateFile::parse(r#"{"lines": {}}"#)
            .unwrap()
            .to_state()
            .unwrap();
        assert_eq!(empty, SevenQubitState::zero());
    }

    #[test]
    fn rejects_bad_input() {
        let eight = "[[1,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0]]";
        let unknown = format!(r#"{{"lines": {{"XYZ": {eight}}}}}"#);
        assert!(StateFile::parse(&unknown).unwrap().to_state().is_err());
        let short = r#"{"lines": {"ABD": [[1,0]]}}"#;
        assert!(StateFile::parse(short).unwrap().to_state().is_err());
        assert!(StateFile::parse(r#"{"lines": {"ABD": [[1,0,0]]}}"#).is_err());
        assert!(StateFile::parse(r#"{"lines": {"ABD": [["a",0]]}}"#).is_err());
        assert!(StateFile::parse(r#"{"lines": {}, "extra": 1}"#).is_err());
        assert!(StateFile::parse(r#"{"lines": {"ABD": [[1e999,0]]}}"#).is_err());
        assert!(StateFile::parse("not json").is_err());
    }
}
