use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use super::run::Trajectory;
use crate::Result;

/// Writes `bytes` to a temporary file next to `path`, then renames it over
/// `path`, so readers never observe a partial file. Existing non-regular
/// targets (`/dev/stdout`, pipes) are written in place instead.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    if let Ok(meta) = std::fs::metadata(path) {
        if !meta.is_file() {
            std::fs::OpenOptions::new().write(true).open(path)?.write_all(bytes)?;
            return Ok(());
        }
    }
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// One row per (time, agent); metrics repeat on every agent row. The
/// `lyapunov` cell is empty when the scenario has no reference point.
pub fn trajectory_csv(traj: &Trajectory, dim: usize) -> String {
    let mut out = String::from("t,agent");
    for c in 0..dim {
        let _ = write!(out, ",x{c}");
    }
    out.push_str(",consensus_error,max_set_residual,max_inequality_residual,lyapunov\n");
    for ((t, states), m) in traj.times.iter().zip(&traj.states).zip(&traj.metrics) {
        for (agent, x) in states.iter().enumerate() {
            let _ = write!(out, "{t},{agent}");
            for v in x.iter() {
                let _ = write!(out, ",{v}");
            }
            let _ = write!(
                out,
                ",{},{},{},",
                m.consensus_error, m.max_set_residual, m.max_inequality_residual
            );
            if let Some(l) = m.lyapunov {
                let _ = write!(out, "{l}");
            }
            out.push('\n');
        }
    }
    out
}

pub fn write_trajectory_csv(traj: &Trajectory, dim: usize, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, trajectory_csv(traj, dim).as_bytes())
}

pub fn write_json<T: serde::Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
