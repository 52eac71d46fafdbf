use crate::error::{Result, YamabeError};
use crate::scalar::Real;
use crate::solver::FlowTrajectory;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

pub const CSV_HEADER: [&str; 5] = ["t", "r", "u", "U", "R_elliptic"];

/// One row of the long-format trajectory table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub r: f64,
    pub u: f64,
    #[serde(rename = "U")]
    pub big_u: f64,
    #[serde(rename = "R_elliptic")]
    pub r_elliptic: f64,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> YamabeError {
    YamabeError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Writes `t,r,u,U,R_elliptic`, time-major. Values use the shortest
/// representation that parses back to the same float.
pub fn export_trajectory<T: Real>(traj: &FlowTrajectory<T>, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(CSV_HEADER).map_err(|e| io_err(path, e))?;
    let curvatures = traj.elliptic_curvatures()?;
    let eta = traj.mesh.eta();
    for (state, rg) in traj.states.iter().zip(&curvatures) {
        let big_u = state.big_u(eta);
        for i in 0..traj.mesh.len() {
            let row = [state.t, traj.mesh.nodes()[i], state.u[i], big_u[i], rg[i]].map(|x| x.to_string());
            w.write_record(&row).map_err(|e| io_err(path, e))?;
        }
    }
    w.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

/// Reads a table written by [`export_trajectory`].
pub fn import_trajectory(path: &Path) -> Result<Vec<TrajectoryRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let header = r.headers().map_err(|e| io_err(path, e))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(io_err(path, format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    r.deserialize().map(|row| row.map_err(|e| io_err(path, e))).collect()
}

/// Pretty-printed JSON followed by a newline.
pub fn write_report<R: Serialize>(report: &R, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, report).map_err(|e| io_err(path, e))?;
    w.write_all(b"\n").map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}
