//! Result documents and atomic file output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use snh_core::analysis::{IdentityReport, MassEnergy, RangeCheck};
use snh_core::ode::Trajectory;
use snh_core::shooting::ShootResult;
use snh_core::ProblemSpec;
use tempfile::NamedTempFile;

use crate::error::CliError;

pub const TOOL: &str = "snh";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Largest number of profile samples stored in a document.
pub const MAX_PROFILE_POINTS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub identity: f64,
    pub newton: f64,
}

/// Ground or excited state with its verification data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDocument {
    pub tool: String,
    pub version: String,
    pub config: serde_json::Value,
    pub spec: ProblemSpec,
    pub result: ShootResult,
    pub identities: IdentityReport,
    pub newton_deviation: f64,
    pub mass_energy: MassEnergy,
    /// Frequency window check, ground states only.
    pub range: Option<RangeCheck>,
    pub thresholds: Thresholds,
}

/// Writes through a temporary file in the target directory, so readers never
/// see a partial file.
pub fn write_atomic(path: &Path, body: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut tmp = NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&dir, e))?;
    tmp.write_all(body).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut body = serde_json::to_vec_pretty(value).map_err(|e| CliError::Data {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    body.push(b'\n');
    write_atomic(path, &body)
}

/// Comment lines carrying the tool version, run configuration and spec.
pub fn provenance(config: &serde_json::Value, spec: Option<&ProblemSpec>) -> String {
    let mut head = format!("# {TOOL} {VERSION}\n# config {config}\n");
    if let Some(spec) = spec {
        head += &format!(
            "# spec {}\n",
            serde_json::to_string(spec).expect("spec serializes")
        );
    }
    head
}

/// CSV table (header row, comma separated, LF) after the provenance comments.
pub fn write_csv<T: Serialize>(path: &Path, head: &str, rows: &[T]) -> Result<(), CliError> {
    let mut body = head.as_bytes().to_vec();
    {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut body);
        for row in rows {
            w.serialize(row).map_err(|e| CliError::Data {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })?;
        }
        w.flush().map_err(|e| CliError::io(path, e))?;
    }
    write_atomic(path, &body)
}

/// Whitespace-separated columns after the provenance comments.
pub fn write_columns(path: &Path, head: &str, columns: &str, rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut body = format!("{head}# {columns}\n");
    for row in rows {
        let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        body += &line.join(" ");
        body.push('\n');
    }
    write_atomic(path, body.as_bytes())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(file)
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| CliError::Data {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
}

/// Thins the profile to at most `max` samples, keeping both ends, the
/// samples at nodes and at extrema of the field.
pub fn downsample(traj: &Trajectory, max: usize) -> Trajectory {
    let n = traj.samples.len();
    if n <= max {
        return traj.clone();
    }
    let s = &traj.samples;
    let to_r = |x: f64| match traj.mode {
        snh_core::Mode::Regular => x,
        snh_core::Mode::Singular => x.exp(),
    };
    let mut keep = vec![false; n];
    keep[0] = true;
    keep[n - 1] = true;
    for &rn in &traj.node_radii {
        let i = s.partition_point(|p| to_r(p.r) < rn).min(n - 1);
        keep[i] = true;
        keep[i.saturating_sub(1)] = true;
    }
    for i in 1..n {
        if s[i - 1].fp * s[i].fp < 0.0 {
            keep[i - 1] = true;
            keep[i] = true;
        }
    }
    let fixed = keep.iter().filter(|&&k| k).count();
    let stride = (n - 1).div_ceil(max.saturating_sub(fixed).max(1)).max(1);
    for i in (0..n).step_by(stride) {
        keep[i] = true;
    }
    let mut out = traj.clone();
    out.samples = s.iter().zip(&keep).filter(|(_, &k)| k).map(|(p, _)| *p).collect();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use snh_core::shooting::{find_excited_state, DEFAULT_C_TOL};

    #[test]
    fn downsampling_keeps_events_and_bounds_size() {
        let spec = ProblemSpec::regular(7).unwrap();
        let res = find_excited_state(1.0, 2, &spec, DEFAULT_C_TOL).unwrap();
        let full = &res.profile;
        let thin = downsample(full, 200);
        assert!(thin.samples.len() <= 200 + 16, "{}", thin.samples.len());
        assert_eq!(thin.samples[0], full.samples[0]);
        assert_eq!(thin.last(), full.last());
        for &rn in &full.node_radii {
            assert!(thin.samples.iter().any(|p| (p.r - rn).abs() < 0.05));
        }
        assert_eq!(downsample(full, 1 << 20), *full);
    }

    proptest::proptest! {
        #[test]
        fn documents_round_trip_bit_exactly(
            v in proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO, 5),
        ) {
            let spec = ProblemSpec::regular(7).unwrap();
            let mut res = find_excited_state(1.0, 0, &spec, DEFAULT_C_TOL).unwrap();
            res.omega = v[0];
            res.c_star = v[1];
            res.profile.samples[3] = snh_core::ode::State::new(v[2], v[3], v[4], -v[0], v[1]);
            let text = serde_json::to_string(&res).unwrap();
            let back: ShootResult = serde_json::from_str(&text).unwrap();
            proptest::prop_assert_eq!(back.omega.to_bits(), res.omega.to_bits());
            proptest::prop_assert_eq!(back, res);
        }
    }

    #[test]
    fn atomic_write_replaces_whole_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.txt");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"second");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
