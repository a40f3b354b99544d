//! File formats: CSV tables, the binary path dump and JSON documents.
//!
//! Numbers are written in Rust's shortest round-trip form, so equal values
//! always give equal bytes.
//!
//! Binary path dump, all fields little-endian:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "PSLE"
//! 4       4     u32 format version (1)
//! 8       4     u32 n, number of force points
//! 12      4     u32 flags, bit 0 set when sigma is present
//! 16      8     f64 dt
//! 24      8     u64 seed
//! 32      8     f64 kappa
//! 40      8     f64 sigma (NaN when absent)
//! 48      8     u64 row count
//! 56      ...   rows of n + 5 f64: t, W, Z_1..Z_n, D_re, D_im, A
//! ```

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use polysle::loewner::{FlowResult, TraceSample};
use polysle::DrivingPath;
use serde::Serialize;

use crate::error::CliError;

pub const DUMP_MAGIC: &[u8; 4] = b"PSLE";
pub const DUMP_VERSION: u32 = 1;

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(path.display().to_string(), e)
}

// shortest round-trip, switching to exponent form for tiny and huge values
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>, CliError> {
    let file = File::create(path).map_err(io_err(path))?;
    Ok(csv::Writer::from_writer(file))
}

/// `t, W, Z_1..Z_n, D_re, D_im, A`.
pub fn write_path_csv(path: &DrivingPath, out: &Path) -> Result<(), CliError> {
    let mut w = csv_writer(out)?;
    let n = path.force_point_count();
    let mut header = vec!["t".to_string(), "W".to_string()];
    header.extend((1..=n).map(|k| format!("Z_{k}")));
    header.extend(["D_re", "D_im", "A"].map(String::from));
    w.write_record(&header)?;
    for s in &path.states {
        let mut row = vec![num(s.t), num(s.w)];
        row.extend(s.z.iter().map(|&z| num(z)));
        row.extend([num(s.correction.re), num(s.correction.im), num(s.clock)]);
        w.write_record(&row)?;
    }
    w.flush().map_err(io_err(out))?;
    Ok(())
}

pub fn write_path_dump(path: &DrivingPath, out: &Path) -> Result<(), CliError> {
    let file = File::create(out).map_err(io_err(out))?;
    let mut w = BufWriter::new(file);
    let n = path.force_point_count();
    let mut bytes = Vec::with_capacity(56 + path.states.len() * (n + 5) * 8);
    bytes.extend_from_slice(DUMP_MAGIC);
    bytes.extend_from_slice(&DUMP_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(n as u32).to_le_bytes());
    bytes.extend_from_slice(&u32::from(path.sigma.is_some()).to_le_bytes());
    bytes.extend_from_slice(&path.dt.to_le_bytes());
    bytes.extend_from_slice(&path.seed.to_le_bytes());
    bytes.extend_from_slice(&path.kappa.to_le_bytes());
    bytes.extend_from_slice(&path.sigma.unwrap_or(f64::NAN).to_le_bytes());
    bytes.extend_from_slice(&(path.states.len() as u64).to_le_bytes());
    for s in &path.states {
        for v in [s.t, s.w].into_iter().chain(s.z.iter().copied()) {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        for v in [s.correction.re, s.correction.im, s.clock] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    w.write_all(&bytes).map_err(io_err(out))?;
    w.flush().map_err(io_err(out))?;
    Ok(())
}

/// Contents of a binary path dump.
#[derive(Debug, Clone, PartialEq)]
pub struct PathDump {
    pub n: usize,
    pub dt: f64,
    pub seed: u64,
    pub kappa: f64,
    pub sigma: Option<f64>,
    /// Rows of `t, W, Z_1..Z_n, D_re, D_im, A`.
    pub rows: Vec<Vec<f64>>,
}

pub fn read_path_dump(input: &Path) -> Result<PathDump, CliError> {
    let mut bytes = Vec::new();
    File::open(input)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(io_err(input))?;
    let bad = |what: &str| CliError::Config(format!("{}: {what}", input.display()));
    if bytes.len() < 56 || &bytes[0..4] != DUMP_MAGIC {
        return Err(bad("not a path dump"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    if u32_at(4) != DUMP_VERSION {
        return Err(bad("unsupported version"));
    }
    let n = u32_at(8) as usize;
    let has_sigma = u32_at(12) & 1 == 1;
    let rows = u64_at(48) as usize;
    let width = n + 5;
    if bytes.len() != 56 + rows * width * 8 {
        return Err(bad("truncated"));
    }
    Ok(PathDump {
        n,
        dt: f64_at(16),
        seed: u64_at(24),
        kappa: f64_at(32),
        sigma: has_sigma.then(|| f64_at(40)),
        rows: (0..rows)
            .map(|r| (0..width).map(|c| f64_at(56 + (r * width + c) * 8)).collect())
            .collect(),
    })
}

/// `t, Re, Im`.
pub fn write_trace_csv(trace: &TraceSample, out: &Path) -> Result<(), CliError> {
    let mut w = csv_writer(out)?;
    w.write_record(["t", "Re", "Im"])?;
    for (t, p) in trace.times.iter().zip(&trace.points) {
        w.write_record([num(*t), num(p.re), num(p.im)])?;
    }
    w.flush().map_err(io_err(out))?;
    Ok(())
}

/// `point, t, g_re, g_im, dg_re, dg_im` for every flowed point.
pub fn write_flow_csv(flows: &[FlowResult], out: &Path) -> Result<(), CliError> {
    let mut w = csv_writer(out)?;
    w.write_record(["point", "t", "g_re", "g_im", "dg_re", "dg_im"])?;
    for (k, f) in flows.iter().enumerate() {
        for ((t, g), d) in f.times.iter().zip(&f.values).zip(&f.derivatives) {
            w.write_record([k.to_string(), num(*t), num(g.re), num(g.im), num(d.re), num(d.im)])?;
        }
    }
    w.flush().map_err(io_err(out))?;
    Ok(())
}

/// One row per corner and frame: `frame, t, corner, beta, re, im`, with
/// empty coordinates for corners at infinity.
pub fn write_corners_csv(frames: &[polysle::PolygonSnapshot], out: &Path) -> Result<(), CliError> {
    let mut w = csv_writer(out)?;
    w.write_record(["frame", "t", "corner", "beta", "re", "im"])?;
    for (i, snap) in frames.iter().enumerate() {
        for (k, c) in snap.corners.iter().enumerate() {
            let (re, im) = match c.position {
                polysle::CornerPosition::Finite(p) => (num(p.re), num(p.im)),
                polysle::CornerPosition::AtInfinity => (String::new(), String::new()),
            };
            w.write_record([i.to_string(), num(snap.time), k.to_string(), num(c.beta), re, im])?;
        }
    }
    w.flush().map_err(io_err(out))?;
    Ok(())
}

pub fn write_json<T: Serialize>(value: &T, out: &Path) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    std::fs::write(out, text).map_err(io_err(out))
}

pub fn write_text(text: &str, out: &Path) -> Result<(), CliError> {
    std::fs::write(out, text).map_err(io_err(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use polysle::driving::simulate_driver;
    use polysle::PrevertexConfig;

    #[test]
    fn dump_round_trips() {
        let cfg = PrevertexConfig::new(vec![-1.0, 1.0], vec![0.5, 0.5], 4.0).unwrap();
        let path = simulate_driver(&cfg, 0.01, 1e-3, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("p.bin");
        write_path_dump(&path, &file).unwrap();
        let dump = read_path_dump(&file).unwrap();
        assert_eq!(dump.n, 2);
        assert_eq!(dump.seed, 3);
        assert_eq!(dump.sigma, path.sigma);
        assert_eq!(dump.rows.len(), path.len());
        let last = path.states.last().unwrap();
        assert_eq!(dump.rows.last().unwrap()[1], last.w);
        assert_eq!(dump.rows.last().unwrap()[6], last.clock);
    }

    #[test]
    fn csv_header_and_width() {
        let cfg = PrevertexConfig::new(vec![-1.0, 0.5, 1.0], vec![0.2, 0.2, 0.2], 2.0).unwrap();
        let path = simulate_driver(&cfg, 0.005, 1e-3, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("p.csv");
        write_path_csv(&path, &file).unwrap();
        let text = std::fs::read_to_string(&file).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,W,Z_1,Z_2,Z_3,D_re,D_im,A");
        assert!(lines.all(|l| l.split(',').count() == 8));
    }
}
