//! Artifact formats: CSV tables, JSON summaries, and bit-exact binary
//! snapshots of kinetic fields and particle ensembles.
//!
//! Snapshots are a single JSON header line (newline-terminated) followed by
//! the raw little-endian f64 payload, so a write → read → write cycle
//! reproduces the file byte for byte. CSV numbers use the shortest
//! round-trip decimal form; identical runs produce identical files.

use super::ExperimentError;
use crate::field::{DistributionField, SpatialGrid};
use crate::particles::{ParticleEnsemble, Torus};
use crate::sphere::{AngularGrid, Dim};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

/// Writes one CSV table; every row must match the column count.
pub fn write_csv(
    path: &Path,
    columns: &[&str],
    rows: impl IntoIterator<Item = Vec<f64>>,
) -> Result<(), ExperimentError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "{}", columns.join(","))?;
    for row in rows {
        debug_assert_eq!(row.len(), columns.len(), "row width mismatch in {}", path.display());
        let line: Vec<String> = row.iter().map(f64::to_string).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a pretty-printed JSON document.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ExperimentError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Reads a JSON document.
pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, ExperimentError> {
    let file = std::fs::File::open(path)?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

#[derive(Serialize, Deserialize)]
struct FieldHeader {
    format: String,
    version: u32,
    time: f64,
    dims: usize,
    n: [usize; 2],
    length: [f64; 2],
    angular: String,
    n_theta: usize,
    values_len: usize,
}

/// Writes a kinetic field snapshot (JSON header line + LE f64 payload).
pub fn write_field_snapshot(
    path: &Path,
    field: &DistributionField,
) -> Result<(), ExperimentError> {
    let sgrid = field.spatial_grid();
    if field.angular_grid().dim() != Dim::Two {
        return Err(ExperimentError::BadSnapshot {
            path: path.display().to_string(),
            msg: "only circle-grid fields are snapshotted".into(),
        });
    }
    let header = FieldHeader {
        format: "vk-field".into(),
        version: 1,
        time: field.time(),
        dims: sgrid.dims(),
        n: [sgrid.n_axis(0), if sgrid.dims() == 2 { sgrid.n_axis(1) } else { 1 }],
        length: [
            sgrid.length_axis(0),
            if sgrid.dims() == 2 { sgrid.length_axis(1) } else { 1.0 },
        ],
        angular: "circle".into(),
        n_theta: field.n_theta(),
        values_len: field.values().len(),
    };
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    write_f64_slice(&mut w, field.values())?;
    w.flush()?;
    Ok(())
}

/// Reads a kinetic field snapshot back, revalidating through the checked
/// constructors; values are bit-identical to what was written.
pub fn read_field_snapshot(path: &Path) -> Result<DistributionField, ExperimentError> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let header: FieldHeader = read_header_line(&mut r, path)?;
    if header.format != "vk-field" || header.version != 1 || header.angular != "circle" {
        return Err(bad_snapshot(path, "not a version-1 circle field snapshot"));
    }
    let sgrid = match header.dims {
        1 => SpatialGrid::line(header.n[0], header.length[0])?,
        2 => SpatialGrid::plane(header.n[0], header.n[1], header.length[0], header.length[1])?,
        d => return Err(bad_snapshot(path, &format!("bad spatial dimension {d}"))),
    };
    let agrid = Arc::new(AngularGrid::circle(header.n_theta)?);
    if header.values_len != sgrid.n_cells() * header.n_theta {
        return Err(bad_snapshot(path, "value count does not match the grids"));
    }
    let values = read_f64_vec(&mut r, header.values_len, path)?;
    expect_eof(&mut r, path)?;
    Ok(DistributionField::new(sgrid, agrid, values, header.time)?)
}

#[derive(Serialize, Deserialize)]
struct EnsembleHeader {
    format: String,
    version: u32,
    n: usize,
    seed: u64,
    step_count: u64,
    time: f64,
    dims: usize,
    length: [f64; 2],
    sphere_dim: usize,
}

/// Writes a particle ensemble snapshot (JSON header line + positions and
/// directions as LE f64).
pub fn write_ensemble_snapshot(
    path: &Path,
    ens: &ParticleEnsemble,
) -> Result<(), ExperimentError> {
    let torus = ens.torus();
    let header = EnsembleHeader {
        format: "vk-ensemble".into(),
        version: 1,
        n: ens.len(),
        seed: ens.seed(),
        step_count: ens.step_count(),
        time: ens.time(),
        dims: torus.dims(),
        length: [torus.length_axis(0), if torus.dims() == 2 { torus.length_axis(1) } else { 1.0 }],
        sphere_dim: ens.dim().ambient(),
    };
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for x in ens.positions() {
        write_f64_slice(&mut w, x)?;
    }
    for omega in ens.directions() {
        write_f64_slice(&mut w, &[omega.x, omega.y, omega.z])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an ensemble snapshot back bit-exactly (state, clock, and RNG
/// bookkeeping).
pub fn read_ensemble_snapshot(path: &Path) -> Result<ParticleEnsemble, ExperimentError> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let header: EnsembleHeader = read_header_line(&mut r, path)?;
    if header.format != "vk-ensemble" || header.version != 1 {
        return Err(bad_snapshot(path, "not a version-1 ensemble snapshot"));
    }
    let torus = match header.dims {
        1 => Torus::line(header.length[0])?,
        2 => Torus::plane(header.length[0], header.length[1])?,
        d => return Err(bad_snapshot(path, &format!("bad spatial dimension {d}"))),
    };
    let dim = match header.sphere_dim {
        2 => Dim::Two,
        3 => Dim::Three,
        d => return Err(bad_snapshot(path, &format!("bad sphere dimension {d}"))),
    };
    let raw = read_f64_vec(&mut r, header.n * 5, path)?;
    expect_eof(&mut r, path)?;
    let positions: Vec<[f64; 2]> =
        raw[..2 * header.n].chunks_exact(2).map(|c| [c[0], c[1]]).collect();
    let directions: Vec<Vector3<f64>> = raw[2 * header.n..]
        .chunks_exact(3)
        .map(|c| Vector3::new(c[0], c[1], c[2]))
        .collect();
    let ens = ParticleEnsemble::from_parts(positions, directions, torus, dim, header.seed)?;
    Ok(ens.with_clock(header.time, header.step_count))
}

fn read_header_line<T: for<'de> Deserialize<'de>>(
    r: &mut impl BufRead,
    path: &Path,
) -> Result<T, ExperimentError> {
    let mut line = Vec::new();
    r.read_until(b'\n', &mut line)?;
    if line.is_empty() {
        return Err(bad_snapshot(path, "empty file"));
    }
    serde_json::from_slice(&line)
        .map_err(|e| bad_snapshot(path, &format!("malformed header: {e}")))
}

fn write_f64_slice(w: &mut impl Write, values: &[f64]) -> Result<(), ExperimentError> {
    for &v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_f64_vec(r: &mut impl Read, count: usize, path: &Path) -> Result<Vec<f64>, ExperimentError> {
    let mut bytes = vec![0u8; count * 8];
    r.read_exact(&mut bytes)
        .map_err(|_| bad_snapshot(path, &format!("truncated payload, expected {count} values")))?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

fn expect_eof(r: &mut impl Read, path: &Path) -> Result<(), ExperimentError> {
    let mut probe = [0u8; 1];
    match r.read(&mut probe)? {
        0 => Ok(()),
        _ => Err(bad_snapshot(path, "trailing bytes after payload")),
    }
}

fn bad_snapshot(path: &Path, msg: &str) -> ExperimentError {
    ExperimentError::BadSnapshot { path: path.display().to_string(), msg: msg.into() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FrequencySpec;
    use crate::particles::SimParams;
    use std::f64::consts::PI;

    #[test]
    fn field_snapshot_round_trips_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let sgrid = SpatialGrid::line(8, 1.0).unwrap();
        let agrid = Arc::new(AngularGrid::circle(16).unwrap());
        let field = DistributionField::from_fn(sgrid, agrid, 0.375, |x, d| {
            1.0 + 0.3 * (2.0 * PI * x[0]).cos() * d.angle().sin()
        })
        .unwrap();
        let path = dir.path().join("state.field");
        write_field_snapshot(&path, &field).unwrap();
        let reloaded = read_field_snapshot(&path).unwrap();
        assert_eq!(reloaded.values(), field.values());
        assert_eq!(reloaded.time(), field.time());
        assert_eq!(reloaded.spatial_grid(), field.spatial_grid());
        // byte-level idempotence of the full cycle
        let path2 = dir.path().join("state2.field");
        write_field_snapshot(&path2, &reloaded).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn ensemble_snapshot_round_trips_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let torus = Torus::line(1.0).unwrap();
        let mut ens = ParticleEnsemble::sample_uniform(50, torus, Dim::Two, 7).unwrap();
        let params =
            SimParams::new(FrequencySpec::constant(1.0).unwrap(), 0.2, 1e-3, 0.2).unwrap();
        for _ in 0..5 {
            ens.sde_step(&params).unwrap();
        }
        let path = dir.path().join("state.ensemble");
        write_ensemble_snapshot(&path, &ens).unwrap();
        let reloaded = read_ensemble_snapshot(&path).unwrap();
        assert_eq!(reloaded.positions(), ens.positions());
        assert!(reloaded.directions().iter().zip(ens.directions()).all(|(a, b)| a == b));
        assert_eq!(reloaded.seed(), ens.seed());
        assert_eq!(reloaded.step_count(), ens.step_count());
        assert_eq!(reloaded.time(), ens.time());
        let path2 = dir.path().join("state2.ensemble");
        write_ensemble_snapshot(&path2, &reloaded).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
        // continuing from the reload matches continuing the original
        let mut a = ens.clone();
        let mut b = reloaded;
        a.sde_step(&params).unwrap();
        b.sde_step(&params).unwrap();
        assert_eq!(a.positions(), b.positions());
        assert!(a.directions().iter().zip(b.directions()).all(|(x, y)| x == y));
    }

    #[test]
    fn corrupt_snapshots_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.field");
        std::fs::write(&path, b"not json\n").unwrap();
        assert!(matches!(
            read_field_snapshot(&path),
            Err(ExperimentError::BadSnapshot { .. })
        ));
        // truncated payload
        let sgrid = SpatialGrid::line(4, 1.0).unwrap();
        let agrid = Arc::new(AngularGrid::circle(8).unwrap());
        let field = DistributionField::from_fn(sgrid, agrid, 0.0, |_, _| 1.0).unwrap();
        let path = dir.path().join("trunc.field");
        write_field_snapshot(&path, &field).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 9]).unwrap();
        assert!(matches!(
            read_field_snapshot(&path),
            Err(ExperimentError::BadSnapshot { .. })
        ));
    }

    #[test]
    fn csv_rows_render_round_trip_decimals() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(&path, &["a", "b"], vec![vec![0.1, 2.0], vec![1e-9, 0.30000000000000004]])
            .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "a,b\n0.1,2\n0.000000001,0.30000000000000004\n");
        for line in text.lines().skip(1) {
            for tokenised in line.split(',') {
                let v: f64 = tokenised.parse().unwrap();
                assert!(v.is_finite());
            }
        }
    }
}
