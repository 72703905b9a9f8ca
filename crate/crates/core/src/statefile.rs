//! JSON serialization of states and observables.
//!
//! A state file is an object with `kind` (`"pure"` or `"mixed"`), `dims`
//! (factor dimensions), and `data`: a flat list of `[re, im]` pairs for
//! pure states, or a row-major list of rows of `[re, im]` pairs for mixed
//! states. An observables file has `kind: "observables"` and one hermitian
//! matrix per factor under `data`. Saving always emits the same canonical
//! layout, so load/save round-trips are byte-identical.

use std::path::Path;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::Observable;
use crate::tensor::{Dims, MixedState, PureState, State};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum StateData {
    Pure(Vec<[f64; 2]>),
    Mixed(Vec<Vec<[f64; 2]>>),
}

/// On-disk form of a state; `kind` decides how `data` is interpreted.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateFile {
    pub kind: String,
    pub dims: Vec<usize>,
    data: StateData,
}

fn pair(z: &C64) -> [f64; 2] {
    [z.re, z.im]
}

fn unpair(p: &[f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

impl StateFile {
    pub fn from_state(state: &State) -> Self {
        match state {
            State::Pure(p) => StateFile {
                kind: "pure".into(),
                dims: p.dims().factors().to_vec(),
                data: StateData::Pure(p.amplitudes().iter().map(pair).collect()),
            },
            State::Mixed(m) => StateFile {
                kind: "mixed".into(),
                dims: m.dims().factors().to_vec(),
                data: StateData::Mixed(
                    m.matrix()
                        .rows()
                        .into_iter()
                        .map(|row| row.iter().map(pair).collect())
                        .collect(),
                ),
            },
        }
    }

    /// Validates the record and builds the in-memory state, including the
    /// usual state invariants (unit norm is not enforced here for pure
    /// data; density-matrix invariants are).
    pub fn into_state(&self) -> Result<State> {
        let dims = Dims::new(self.dims.clone())?;
        match (self.kind.as_str(), &self.data) {
            ("pure", StateData::Pure(entries)) => {
                let amplitudes: Array1<C64> = entries.iter().map(unpair).collect();
                Ok(State::Pure(PureState::new(dims, amplitudes)?))
            }
            ("mixed", StateData::Mixed(rows)) => {
                let n = dims.total();
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::Malformed(format!(
                        "mixed data must be a {n}x{n} matrix"
                    )));
                }
                let mut matrix = Array2::zeros((n, n));
                for (i, row) in rows.iter().enumerate() {
                    for (j, p) in row.iter().enumerate() {
                        matrix[(i, j)] = unpair(p);
                    }
                }
                Ok(State::Mixed(MixedState::new(dims, matrix)?))
            }
            ("pure", _) => Err(Error::Malformed(
                "kind \"pure\" requires a flat list of [re, im] pairs".into(),
            )),
            ("mixed", _) => Err(Error::Malformed(
                "kind \"mixed\" requires a matrix of [re, im] pairs".into(),
            )),
            (other, _) => Err(Error::Malformed(format!(
                "unknown state kind {other:?} (expected \"pure\" or \"mixed\")"
            ))),
        }
    }
}

/// Reads and validates a state file.
pub fn load_state(path: impl AsRef<Path>) -> Result<State> {
    let text = std::fs::read_to_string(path)?;
    let file: StateFile = serde_json::from_str(&text)?;
    file.into_state()
}

/// Writes a state in the canonical layout (pretty-printed, trailing
/// newline).
pub fn save_state(path: impl AsRef<Path>, state: &State) -> Result<()> {
    let file = StateFile::from_state(state);
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// On-disk form of a measurement setup: one hermitian matrix per factor.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObservablesFile {
    pub kind: String,
    pub dims: Vec<usize>,
    data: Vec<Vec<Vec<[f64; 2]>>>,
}

impl ObservablesFile {
    pub fn from_observables(dims: &Dims, observables: &[Observable]) -> Result<Self> {
        if observables.len() != dims.n_factors() {
            return Err(Error::Malformed(format!(
                "need {} observables, got {}",
                dims.n_factors(),
                observables.len()
            )));
        }
        let data = observables
            .iter()
            .map(|o| {
                o.matrix()
                    .rows()
                    .into_iter()
                    .map(|row| row.iter().map(pair).collect())
                    .collect()
            })
            .collect();
        Ok(ObservablesFile {
            kind: "observables".into(),
            dims: dims.factors().to_vec(),
            data,
        })
    }

    pub fn into_observables(&self) -> Result<(Dims, Vec<Observable>)> {
        if self.kind != "observables" {
            return Err(Error::Malformed(format!(
                "unknown kind {:?} (expected \"observables\")",
                self.kind
            )));
        }
        let dims = Dims::new(self.dims.clone())?;
        if self.data.len() != dims.n_factors() {
            return Err(Error::Malformed(format!(
                "need {} observables, got {}",
                dims.n_factors(),
                self.data.len()
            )));
        }
        let mut observables = Vec::with_capacity(self.data.len());
        for (i, rows) in self.data.iter().enumerate() {
            let d = dims.factor(i);
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                return Err(Error::Malformed(format!(
                    "observable {i} must be a {d}x{d} matrix"
                )));
            }
            let mut matrix = Array2::zeros((d, d));
            for (a, row) in rows.iter().enumerate() {
                for (b, p) in row.iter().enumerate() {
                    matrix[(a, b)] = unpair(p);
                }
            }
            observables.push(Observable::new(i, matrix)?);
        }
        Ok((dims, observables))
    }
}

/// Reads and validates an observables file against the given factor
/// dimensions.
pub fn load_observables(path: impl AsRef<Path>, dims: &Dims) -> Result<Vec<Observable>> {
    let text = std::fs::read_to_string(path)?;
    let file: ObservablesFile = serde_json::from_str(&text)?;
    let (file_dims, observables) = file.into_observables()?;
    if file_dims.factors() != dims.factors() {
        return Err(Error::Malformed(format!(
            "observable dims {:?} do not match state dims {:?}",
            file_dims.factors(),
            dims.factors()
        )));
    }
    Ok(observables)
}

/// Writes observables in the canonical layout.
pub fn save_observables(
    path: impl AsRef<Path>,
    dims: &Dims,
    observables: &[Observable],
) -> Result<()> {
    let file = ObservablesFile::from_observables(dims, observables)?;
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states;

    fn write_temp(contents: &str) -> tempfile::NamedTempFile {
        use std::io::Write;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_a_pure_state_literal() {
        let f = write_temp(
            r#"{
  "kind": "pure",
  "dims": [2, 2],
  "data": [[0.7071067811865476, 0.0], [0.0, 0.0], [0.0, 0.0], [0.7071067811865476, 0.0]]
}
"#,
        );
        let state = load_state(f.path()).unwrap();
        let State::Pure(p) = state else { panic!("expected pure") };
        assert_eq!(p.dims().factors(), &[2, 2]);
        let bell = states::bell();
        assert!(crate::tensor::max_abs_diff_vec(p.amplitudes(), bell.amplitudes()) < 1e-12);
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.json");
        let state = State::Mixed(states::classically_correlated());
        save_state(&path, &state).unwrap();
        let bytes1 = std::fs::read(&path).unwrap();
        let reloaded = load_state(&path).unwrap();
        save_state(&path, &reloaded).unwrap();
        let bytes2 = std::fs::read(&path).unwrap();
        assert_eq!(bytes1, bytes2);
    }

    #[test]
    fn pure_round_trip_preserves_amplitudes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.json");
        let state = State::Pure(states::ghz(3));
        save_state(&path, &state).unwrap();
        let State::Pure(p) = load_state(&path).unwrap() else {
            panic!("expected pure")
        };
        assert!(
            crate::tensor::max_abs_diff_vec(p.amplitudes(), &states::ghz(3).amplitudes()) == 0.0
        );
    }

    #[test]
    fn rejects_non_unit_trace() {
        let f = write_temp(
            r#"{
  "kind": "mixed",
  "dims": [2],
  "data": [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.4, 0.0]]]
}
"#,
        );
        match load_state(f.path()) {
            Err(Error::Validation { invariant, deviation }) => {
                assert_eq!(invariant, "unit trace");
                assert!((deviation - 0.1).abs() < 1e-12);
            }
            other => panic!("expected trace validation error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_truncated_json() {
        let f = write_temp(r#"{"kind": "pure", "dims": [2], "data": [[1.0,"#);
        assert!(matches!(load_state(f.path()), Err(Error::Parse(_))));
    }

    #[test]
    fn rejects_kind_data_mismatch() {
        let f = write_temp(
            r#"{"kind": "mixed", "dims": [2], "data": [[1.0, 0.0], [0.0, 0.0]]}"#,
        );
        assert!(matches!(load_state(f.path()), Err(Error::Malformed(_))));
        let f = write_temp(r#"{"kind": "thermal", "dims": [2], "data": []}"#);
        assert!(matches!(load_state(f.path()), Err(Error::Malformed(_))));
    }

    #[test]
    fn rejects_wrong_matrix_shape() {
        let f = write_temp(
            r#"{"kind": "mixed", "dims": [2], "data": [[[1.0, 0.0]], [[0.0, 0.0]]]}"#,
        );
        assert!(matches!(load_state(f.path()), Err(Error::Malformed(_))));
    }

    #[test]
    fn observables_round_trip() {
        let dims = Dims::new(vec![2, 2]).unwrap();
        let obs = vec![
            Observable::new(0, states::pauli_z()).unwrap(),
            Observable::new(1, states::pauli_x()).unwrap(),
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("obs.json");
        save_observables(&path, &dims, &obs).unwrap();
        let loaded = load_observables(&path, &dims).unwrap();
        assert_eq!(loaded.len(), 2);
        assert!(crate::tensor::max_abs_diff(
            &loaded[1].matrix().view(),
            &states::pauli_x().view()
        ) == 0.0);

        let other = Dims::new(vec![2, 3]).unwrap();
        assert!(matches!(
            load_observables(&path, &other),
            Err(Error::Malformed(_))
        ));
    }

    #[test]
    fn rejects_non_hermitian_observable() {
        let f = write_temp(
            r#"{"kind": "observables", "dims": [2], "data": [[[[0.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]]}"#,
        );
        let text = std::fs::read_to_string(f.path()).unwrap();
        let file: ObservablesFile = serde_json::from_str(&text).unwrap();
        assert!(matches!(
            file.into_observables(),
            Err(Error::Validation { .. })
        ));
    }
}
