//! CSV streams with fixed column order.

use std::path::Path;

use orikit::kinematics::{ImuSample, NavState, PoseMeasurement};

use crate::CliError;

pub const STATE_HEADER: [&str; 17] = [
    "t", "rx", "ry", "rz", "vx", "vy", "vz", "q0", "q1", "q2", "q3", "bfx", "bfy", "bfz", "bwx",
    "bwy", "bwz",
];
pub const IMU_HEADER: [&str; 7] = ["t", "fx", "fy", "fz", "wx", "wy", "wz"];
pub const POSE_HEADER: [&str; 8] = ["t", "rx", "ry", "rz", "q0", "q1", "q2", "q3"];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn state_row(t: f64, s: &NavState) -> Vec<f64> {
    let mut row = vec![t];
    row.extend(s.position.iter());
    row.extend(s.velocity.iter());
    row.extend(s.orientation.to_array());
    row.extend(s.accel_bias.iter());
    row.extend(s.gyro_bias.iter());
    row
}

pub fn imu_row(s: &ImuSample) -> Vec<f64> {
    let mut row = vec![s.t];
    row.extend(s.accel.iter());
    row.extend(s.gyro.iter());
    row
}

pub fn pose_row(m: &PoseMeasurement) -> Vec<f64> {
    let mut row = vec![m.t];
    row.extend(m.position.iter());
    row.extend(m.orientation.to_array());
    row
}

pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(row.iter().map(|x| format_real(*x))).map_err(io)?;
    }
    w.flush()
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Reads a CSV written by [`write_csv`], returning the header and rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(io)?;
    let header = r.headers().map_err(io)?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(io)?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0, -0.0] {
            let s = format_real(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(format_real(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn state_row_matches_header() {
        let row = state_row(0.5, &NavState::default());
        assert_eq!(row.len(), STATE_HEADER.len());
        assert_eq!(row[7], 1.0);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        let rows = vec![vec![0.0, 1.0 / 3.0, 2.0, 3.0, 4.0, 5.0, 6.0]];
        write_csv(&path, &IMU_HEADER, rows.clone()).unwrap();
        let (header, back) = read_csv(&path).unwrap();
        assert_eq!(header, IMU_HEADER);
        assert_eq!(back, rows);
    }
}
