//! On-disk formats: binary field snapshots ("EULF1"), CSV exports
//! (per-cell fields, per-step diagnostics, convergence tables), and 8-bit
//! grayscale PGM images with min/max sidecars.
//!
//! # Snapshot format (EULF1)
//!
//! Little-endian throughout. Header: magic `EULF` (4 bytes), version `u32`
//! (currently 1), grid size n `u32`, gamma `f64`, time `f64`. Payload:
//! row-major `f64` planes of n² values each — either four planes
//! (ρ, m₁, m₂, E: a full conserved state) or one plane (a scalar field
//! such as a Cesàro average or variance). The plane count is not stored;
//! it is recovered from the file length, which must be exactly
//! header + 8·n² or header + 32·n².
//!
//! All text output is deterministic: identical inputs produce identical
//! bytes (no timestamps, no locale, fixed float formats).

use crate::driver::StepRecord;
use crate::error::{Error, Result};
use crate::field::ConservedField;
use crate::gas::GasModel;
use crate::grid::Grid2D;
use crate::kconv::MetricsTable;
use crate::scalar::Scalar;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const SNAPSHOT_MAGIC: [u8; 4] = *b"EULF";
pub const SNAPSHOT_VERSION: u32 = 1;

const HEADER_LEN: usize = 4 + 4 + 4 + 8 + 8;

/// A full conserved-state snapshot read back from disk (always `f64`, the
/// storage precision).
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub field: ConservedField<f64>,
    pub gamma: f64,
    pub time: f64,
}

/// A single-plane snapshot (scalar field on an n×n grid).
#[derive(Clone, Debug)]
pub struct ScalarSnapshot {
    pub plane: Vec<f64>,
    pub n: usize,
    pub gamma: f64,
    pub time: f64,
}

fn write_header(w: &mut impl Write, n: usize, gamma: f64, time: f64) -> Result<()> {
    let n32 = u32::try_from(n).map_err(|_| Error::Param(format!("grid size {n} exceeds u32")))?;
    w.write_all(&SNAPSHOT_MAGIC)?;
    w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
    w.write_all(&n32.to_le_bytes())?;
    w.write_all(&gamma.to_le_bytes())?;
    w.write_all(&time.to_le_bytes())?;
    Ok(())
}

fn write_plane<S: Scalar>(w: &mut impl Write, plane: &[S]) -> Result<()> {
    for v in plane {
        w.write_all(&v.to_f64_lossy().to_le_bytes())?;
    }
    Ok(())
}

/// Writes a full conserved-state snapshot.
pub fn write_snapshot<S: Scalar>(
    path: &Path,
    field: &ConservedField<S>,
    gas: &GasModel<S>,
    time: S,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_header(
        &mut w,
        field.grid().n(),
        gas.gamma().to_f64_lossy(),
        time.to_f64_lossy(),
    )?;
    write_plane(&mut w, field.rho())?;
    write_plane(&mut w, field.m1())?;
    write_plane(&mut w, field.m2())?;
    write_plane(&mut w, field.en())?;
    w.flush()?;
    Ok(())
}

/// Writes a single scalar plane (Cesàro average, variance, …) in the same
/// container.
pub fn write_scalar_snapshot<S: Scalar>(
    path: &Path,
    plane: &[S],
    n: usize,
    gamma: f64,
    time: f64,
) -> Result<()> {
    if plane.len() != n * n {
        return Err(Error::Param(format!(
            "plane has {} entries, expected {}",
            plane.len(),
            n * n
        )));
    }
    let mut w = BufWriter::new(File::create(path)?);
    write_header(&mut w, n, gamma, time)?;
    write_plane(&mut w, plane)?;
    w.flush()?;
    Ok(())
}

struct RawSnapshot {
    n: usize,
    gamma: f64,
    time: f64,
    planes: Vec<Vec<f64>>,
}

/// Header of a snapshot file, plus the plane count recovered from the
/// file length (1 = scalar plane, 4 = full conserved state).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnapshotHeader {
    pub n: usize,
    pub gamma: f64,
    pub time: f64,
    pub planes: usize,
}

/// Reads only the header (and the file length), for scanning snapshot
/// directories without loading payloads.
pub fn read_snapshot_header(path: &Path) -> Result<SnapshotHeader> {
    let file = File::open(path)?;
    let len = file.metadata()?.len();
    let fail = |msg: String| Error::Format(format!("{}: {msg}", path.display()));
    let mut bytes = [0u8; HEADER_LEN];
    let mut r = BufReader::new(file);
    r.read_exact(&mut bytes)
        .map_err(|_| fail("file shorter than the snapshot header".into()))?;
    if bytes[0..4] != SNAPSHOT_MAGIC {
        return Err(fail("bad magic (not a field snapshot)".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != SNAPSHOT_VERSION {
        return Err(fail(format!(
            "unsupported version {version} (this build reads {SNAPSHOT_VERSION})"
        )));
    }
    let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let gamma = f64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let time = f64::from_le_bytes(bytes[20..28].try_into().unwrap());
    if n == 0 {
        return Err(fail("grid size is zero".into()));
    }
    let payload = len as usize - HEADER_LEN;
    let plane_bytes = 8 * n * n;
    let planes = if payload == plane_bytes {
        1
    } else if payload == 4 * plane_bytes {
        4
    } else {
        return Err(fail(format!(
            "payload of {payload} bytes is neither one nor four {}-cell planes",
            n * n
        )));
    };
    Ok(SnapshotHeader {
        n,
        gamma,
        time,
        planes,
    })
}

fn read_raw(path: &Path) -> Result<RawSnapshot> {
    let mut r = BufReader::new(File::open(path)?);
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let fail = |msg: String| Error::Format(format!("{}: {msg}", path.display()));
    if bytes.len() < HEADER_LEN {
        return Err(fail("file shorter than the snapshot header".into()));
    }
    if bytes[0..4] != SNAPSHOT_MAGIC {
        return Err(fail("bad magic (not a field snapshot)".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != SNAPSHOT_VERSION {
        return Err(fail(format!(
            "unsupported version {version} (this build reads {SNAPSHOT_VERSION})"
        )));
    }
    let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let gamma = f64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let time = f64::from_le_bytes(bytes[20..28].try_into().unwrap());
    if n == 0 {
        return Err(fail("grid size is zero".into()));
    }
    let cells = n * n;
    let payload = bytes.len() - HEADER_LEN;
    let plane_bytes = 8 * cells;
    let n_planes = if payload == plane_bytes {
        1
    } else if payload == 4 * plane_bytes {
        4
    } else {
        return Err(fail(format!(
            "payload of {payload} bytes is neither one nor four {cells}-cell planes"
        )));
    };
    let mut planes = Vec::with_capacity(n_planes);
    let mut off = HEADER_LEN;
    for _ in 0..n_planes {
        let mut plane = Vec::with_capacity(cells);
        for _ in 0..cells {
            plane.push(f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap()));
            off += 8;
        }
        planes.push(plane);
    }
    Ok(RawSnapshot {
        n,
        gamma,
        time,
        planes,
    })
}

/// Reads a full conserved-state snapshot (rejects single-plane files).
pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let raw = read_raw(path)?;
    if raw.planes.len() != 4 {
        return Err(Error::Format(format!(
            "{}: expected a 4-plane state snapshot, found {} plane(s)",
            path.display(),
            raw.planes.len()
        )));
    }
    let grid = Grid2D::new(raw.n)?;
    let mut planes = raw.planes.into_iter();
    let field = ConservedField::from_planes(
        grid,
        planes.next().unwrap(),
        planes.next().unwrap(),
        planes.next().unwrap(),
        planes.next().unwrap(),
    )?;
    Ok(Snapshot {
        field,
        gamma: raw.gamma,
        time: raw.time,
    })
}

/// Reads a single-plane snapshot (rejects full-state files).
pub fn read_scalar_snapshot(path: &Path) -> Result<ScalarSnapshot> {
    let raw = read_raw(path)?;
    if raw.planes.len() != 1 {
        return Err(Error::Format(format!(
            "{}: expected a 1-plane scalar snapshot, found {} plane(s)",
            path.display(),
            raw.planes.len()
        )));
    }
    Ok(ScalarSnapshot {
        plane: raw.planes.into_iter().next().unwrap(),
        n: raw.n,
        gamma: raw.gamma,
        time: raw.time,
    })
}

/// Per-cell CSV export: header `i,j,rho,m1,m2,E`, one row per cell in
/// row-major order, floats in shortest round-trip form.
pub fn format_field_csv<S: Scalar>(field: &ConservedField<S>) -> String {
    let n = field.grid().n();
    let mut out = String::from("i,j,rho,m1,m2,E\n");
    for j in 0..n {
        for i in 0..n {
            let c = field.get(i, j);
            out.push_str(&format!(
                "{i},{j},{},{},{},{}\n",
                c.rho.to_f64_lossy(),
                c.m1.to_f64_lossy(),
                c.m2.to_f64_lossy(),
                c.en.to_f64_lossy()
            ));
        }
    }
    out
}

pub fn write_field_csv<S: Scalar>(path: &Path, field: &ConservedField<S>) -> Result<()> {
    std::fs::write(path, format_field_csv(field))?;
    Ok(())
}

pub const DIAGNOSTICS_HEADER: &str =
    "step,time,dt,total_mass,total_energy,min_rho,min_p,min_s,entropy_residual";

/// Per-step diagnostics CSV (one row per accepted step).
pub fn format_diagnostics_csv(records: &[StepRecord]) -> String {
    let mut out = String::from(DIAGNOSTICS_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.step,
            r.time,
            r.dt,
            r.total_mass,
            r.total_energy,
            r.min_rho,
            r.min_p,
            r.min_s,
            r.entropy_residual
        ));
    }
    out
}

pub fn write_diagnostics_csv(path: &Path, records: &[StepRecord]) -> Result<()> {
    std::fs::write(path, format_diagnostics_csv(records))?;
    Ok(())
}

/// Format tag pinned by the golden-file tests; bump when the table layout
/// changes.
pub const TABLE_FORMAT: &str = "kfv-table v1";

fn fmt_err(v: f64) -> String {
    format!("{v:.6e}")
}

fn fmt_order(o: Option<f64>) -> String {
    match o {
        Some(v) => format!("{v:.3}"),
        None => "-".to_string(),
    }
}

/// Convergence-table CSV. Rows either carry the four error metrics with
/// their observed orders, or `failed` markers for levels whose run was
/// aborted (`failed_levels`). The E4/order4 columns appear only when any
/// row has an E4 value.
///
/// This single formatter serves both the experiment runner and the
/// re-analysis path, so the two produce byte-identical tables.
pub fn format_metrics_table(table: &MetricsTable, failed_levels: &[usize]) -> String {
    let with_e4 = table.rows.iter().any(|r| r.e4.is_some());
    let mut out = format!(
        "# {TABLE_FORMAT} variable={} time={:.6e}\n",
        table.variable, table.time
    );
    out.push_str("n,E1,order1,E2,order2,E3,order3");
    if with_e4 {
        out.push_str(",E4,order4");
    }
    out.push('\n');
    let orders = table.orders();
    for (row, ord) in table.rows.iter().zip(&orders) {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}",
            row.n,
            fmt_err(row.e1),
            fmt_order(ord[0]),
            fmt_err(row.e2),
            fmt_order(ord[1]),
            fmt_err(row.e3),
            fmt_order(ord[2]),
        ));
        if with_e4 {
            match row.e4 {
                Some(v) => out.push_str(&format!(",{},{}", fmt_err(v), fmt_order(ord[3]))),
                None => out.push_str(",-,-"),
            }
        }
        out.push('\n');
    }
    for &n in failed_levels {
        out.push_str(&format!("{n},failed,-,failed,-,failed,-"));
        if with_e4 {
            out.push_str(",failed,-");
        }
        out.push('\n');
    }
    out
}

pub fn write_metrics_table(
    path: &Path,
    table: &MetricsTable,
    failed_levels: &[usize],
) -> Result<()> {
    std::fs::write(path, format_metrics_table(table, failed_levels))?;
    Ok(())
}

/// 8-bit binary PGM (P5) with linear min-max scaling, plus a sidecar text
/// file `<path>.txt` recording the scaling so values can be recovered.
/// Row 0 of the image is the top of the domain (largest y).
pub fn write_pgm<S: Scalar>(path: &Path, plane: &[S], n: usize) -> Result<()> {
    if plane.len() != n * n {
        return Err(Error::Param(format!(
            "plane has {} entries, expected {}",
            plane.len(),
            n * n
        )));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in plane {
        let v = v.to_f64_lossy();
        if !v.is_finite() {
            return Err(Error::Param("PGM plane contains non-finite values".into()));
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let span = hi - lo;
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "P5\n{n} {n}\n255\n")?;
    let mut row = Vec::with_capacity(n);
    for j in (0..n).rev() {
        row.clear();
        for i in 0..n {
            let v = plane[j * n + i].to_f64_lossy();
            let byte = if span > 0.0 {
                ((v - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8
            } else {
                0
            };
            row.push(byte);
        }
        w.write_all(&row)?;
    }
    w.flush()?;
    let sidecar = format!("min={lo}\nmax={hi}\n");
    let mut side_path = path.as_os_str().to_owned();
    side_path.push(".txt");
    std::fs::write(side_path, sidecar)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::{Conserved, Primitive};
    use crate::kconv::MetricsRow;
    use tempfile::tempdir;

    fn sample_field() -> (ConservedField<f64>, GasModel<f64>) {
        let gas = GasModel::standard();
        let field = ConservedField::from_primitive_fn(Grid2D::new(6).unwrap(), &gas, |x, y| {
            Primitive::new(1.0 + 0.3 * x + 0.1 * y, 0.2 * x, -0.1 * y, 1.0 + 0.5 * x)
        })
        .unwrap();
        (field, gas)
    }

    #[test]
    fn snapshot_round_trip_is_bit_exact() {
        let (field, gas) = sample_field();
        let dir = tempdir().unwrap();
        let path = dir.path().join("state.eulf");
        write_snapshot(&path, &field, &gas, 0.375).unwrap();
        let snap = read_snapshot(&path).unwrap();
        assert_eq!(snap.gamma, 1.4);
        assert_eq!(snap.time, 0.375);
        assert_eq!(snap.field.grid().n(), 6);
        assert_eq!(snap.field.rho(), field.rho());
        assert_eq!(snap.field.m1(), field.m1());
        assert_eq!(snap.field.m2(), field.m2());
        assert_eq!(snap.field.en(), field.en());
    }

    #[test]
    fn snapshot_header_layout_is_pinned() {
        let gas = GasModel::standard();
        let field = ConservedField::uniform(
            Grid2D::new(2).unwrap(),
            Conserved::new(1.0, 0.0, 0.0, 2.5),
        );
        let dir = tempdir().unwrap();
        let path = dir.path().join("tiny.eulf");
        write_snapshot(&path, &field, &gas, 1.0).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[0..4], b"EULF");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 2);
        assert_eq!(f64::from_le_bytes(bytes[12..20].try_into().unwrap()), 1.4);
        assert_eq!(f64::from_le_bytes(bytes[20..28].try_into().unwrap()), 1.0);
        assert_eq!(bytes.len(), HEADER_LEN + 4 * 8 * 4);
        // First payload value is rho at cell (0,0).
        assert_eq!(f64::from_le_bytes(bytes[28..36].try_into().unwrap()), 1.0);
    }

    #[test]
    fn scalar_snapshot_round_trip_and_cross_rejection() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("plane.eulf");
        let plane: Vec<f64> = (0..9).map(|k| k as f64 / 3.0).collect();
        write_scalar_snapshot(&path, &plane, 3, 1.4, 2.0).unwrap();
        let back = read_scalar_snapshot(&path).unwrap();
        assert_eq!(back.plane, plane);
        assert_eq!(back.n, 3);
        assert_eq!(back.time, 2.0);
        // A 1-plane file is not a state snapshot and vice versa.
        assert!(read_snapshot(&path).is_err());
        let (field, gas) = sample_field();
        let full = dir.path().join("full.eulf");
        write_snapshot(&full, &field, &gas, 0.0).unwrap();
        assert!(read_scalar_snapshot(&full).is_err());
    }

    #[test]
    fn header_reader_reports_shape_without_loading_payload() {
        let dir = tempdir().unwrap();
        let (field, gas) = sample_field();
        let full = dir.path().join("full.eulf");
        write_snapshot(&full, &field, &gas, 0.75).unwrap();
        let h = read_snapshot_header(&full).unwrap();
        assert_eq!(
            h,
            SnapshotHeader {
                n: 6,
                gamma: 1.4,
                time: 0.75,
                planes: 4
            }
        );
        let scalar = dir.path().join("plane.eulf");
        write_scalar_snapshot(&scalar, &vec![0.0f64; 9], 3, 1.4, 2.0).unwrap();
        assert_eq!(read_snapshot_header(&scalar).unwrap().planes, 1);
        // Same rejections as the full readers.
        let bad = dir.path().join("bad.eulf");
        std::fs::write(&bad, b"EULG\x01\x00\x00\x00").unwrap();
        assert!(read_snapshot_header(&bad).is_err());
        let mut bytes = std::fs::read(&full).unwrap();
        bytes.truncate(bytes.len() - 3);
        std::fs::write(&full, bytes).unwrap();
        assert!(read_snapshot_header(&full).is_err());
    }

    #[test]
    fn corrupt_snapshots_are_rejected_with_context() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.eulf");
        std::fs::write(&path, b"EULG\x01\x00\x00\x00").unwrap();
        let err = read_snapshot(&path).unwrap_err();
        assert!(matches!(err, Error::Format(_)), "{err}");
        // Truncated payload.
        let (field, gas) = sample_field();
        let p2 = dir.path().join("trunc.eulf");
        write_snapshot(&p2, &field, &gas, 0.0).unwrap();
        let mut bytes = std::fs::read(&p2).unwrap();
        bytes.truncate(bytes.len() - 1);
        std::fs::write(&p2, bytes).unwrap();
        assert!(matches!(read_snapshot(&p2), Err(Error::Format(_))));
    }

    #[test]
    fn field_csv_layout_is_pinned() {
        let field = ConservedField::uniform(
            Grid2D::new(2).unwrap(),
            Conserved::new(1.0, 0.25, 0.0, 2.5),
        );
        let csv = format_field_csv(&field);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "i,j,rho,m1,m2,E");
        assert_eq!(lines[1], "0,0,1,0.25,0,2.5");
        assert_eq!(lines.len(), 5);
    }

    #[test]
    fn diagnostics_csv_layout_is_pinned() {
        let rec = StepRecord {
            step: 3,
            time: 0.125,
            dt: 0.0625,
            total_mass: 1.0,
            total_energy: 2.5,
            min_rho: 0.5,
            min_p: 0.25,
            min_s: -1.5,
            entropy_residual: 0.00125,
        };
        let csv = format_diagnostics_csv(&[rec]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], DIAGNOSTICS_HEADER);
        assert_eq!(lines[1], "3,0.125,0.0625,1,2.5,0.5,0.25,-1.5,0.00125");
    }

    #[test]
    fn metrics_table_format_is_pinned() {
        let mut table = MetricsTable {
            variable: "density",
            time: 2.0,
            rows: vec![
                MetricsRow {
                    n: 16,
                    e1: 0.181,
                    e2: 0.121,
                    e3: 0.0614,
                    e4: None,
                },
                MetricsRow {
                    n: 32,
                    e1: 0.1812,
                    e2: 0.0845,
                    e3: 0.0431,
                    e4: None,
                },
            ],
        };
        let plain = format_metrics_table(&table, &[]);
        let lines: Vec<&str> = plain.lines().collect();
        assert_eq!(lines[0], "# kfv-table v1 variable=density time=2.000000e0");
        assert_eq!(lines[1], "n,E1,order1,E2,order2,E3,order3");
        assert_eq!(lines[2], "16,1.810000e-1,-,1.210000e-1,-,6.140000e-2,-");
        assert!(lines[3].starts_with("32,1.812000e-1,"));
        // With E4 and a failed level appended.
        table.rows[0].e4 = Some(0.05);
        table.rows[1].e4 = Some(0.03);
        let with_e4 = format_metrics_table(&table, &[64]);
        let lines: Vec<&str> = with_e4.lines().collect();
        assert_eq!(lines[1], "n,E1,order1,E2,order2,E3,order3,E4,order4");
        assert!(lines[2].ends_with(",5.000000e-2,-"));
        assert_eq!(lines[4], "64,failed,-,failed,-,failed,-,failed,-");
        // Byte determinism.
        assert_eq!(with_e4, format_metrics_table(&table, &[64]));
    }

    #[test]
    fn pgm_output_is_p5_with_sidecar() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("rho.pgm");
        // 2x2 plane: values 0,1,2,3 — j=1 row is written first (top).
        let plane = vec![0.0, 1.0, 2.0, 3.0];
        write_pgm(&path, &plane, 2).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let header = b"P5\n2 2\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        // Top row is j=1 → values 2,3 → bytes 170,255; bottom j=0 → 0,85.
        assert_eq!(&bytes[header.len()..], &[170, 255, 0, 85]);
        let sidecar = std::fs::read_to_string(dir.path().join("rho.pgm.txt")).unwrap();
        assert_eq!(sidecar, "min=0\nmax=3\n");
        // Constant plane maps to all zeros, not NaN.
        let flat = dir.path().join("flat.pgm");
        write_pgm(&flat, &vec![7.0; 4], 2).unwrap();
        let bytes = std::fs::read(&flat).unwrap();
        assert_eq!(&bytes[header.len()..], &[0, 0, 0, 0]);
    }
}
