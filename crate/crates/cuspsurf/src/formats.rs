//! CSV, PLY and JSON writers and the initial-frame reader.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use cuspsurf_core::curves::{CurveSample, Point};
use cuspsurf_core::integrator::{orthogonality_defect, Frame};
use serde::Serialize;

use crate::error::{CliError, Result};

/// 17 significant digits, enough to round-trip any f64.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn frame_header() -> Vec<String> {
    (0..4).flat_map(|i| (0..4).map(move |j| format!("f{i}{j}"))).collect()
}

pub fn frame_fields(f: &Frame) -> impl Iterator<Item = String> + '_ {
    (0..4).flat_map(move |i| (0..4).map(move |j| num(f[(i, j)])))
}

/// Where output goes; stdout when no path is given.
pub struct Sink {
    path: PathBuf,
    inner: Box<dyn Write>,
}

impl Sink {
    pub fn open(path: Option<&Path>) -> Result<Sink> {
        match path {
            Some(p) => {
                let f = File::create(p).map_err(|e| CliError::io(p, e))?;
                Ok(Sink { path: p.to_path_buf(), inner: Box::new(BufWriter::new(f)) })
            }
            None => Ok(Sink { path: PathBuf::from("<stdout>"), inner: Box::new(io::stdout().lock()) }),
        }
    }

    pub fn err(&self, e: io::Error) -> CliError {
        CliError::io(self.path.clone(), e)
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush().map_err(|e| CliError::io(self.path.clone(), e))
    }
}

impl Write for Sink {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.inner.write(buf)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

/// Writes a header row and data rows, LF terminated.
pub fn write_table<I>(sink: Sink, header: &[String], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let path = sink.path.clone();
    let wrap = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(e) => CliError::io(path.clone(), e),
        other => CliError::io(path.clone(), io::Error::other(format!("{other:?}"))),
    };
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(&row).map_err(wrap)?;
    }
    let sink = w.into_inner().map_err(|e| CliError::io(path.clone(), io::Error::other(e.to_string())))?;
    sink.finish()
}

/// Columns `param, p0..p3, f00..f33`.
pub fn write_curve_csv(sink: Sink, curve: &CurveSample) -> Result<()> {
    let mut header = vec!["param".to_string(), "p0".into(), "p1".into(), "p2".into(), "p3".into()];
    header.extend(frame_header());
    let rows = curve.params.iter().zip(&curve.points).zip(&curve.frames).map(|((t, p), f)| {
        let mut row = vec![num(*t)];
        row.extend(p.iter().map(|v| num(*v)));
        row.extend(frame_fields(f));
        row
    });
    write_table(sink, &header, rows)
}

/// ASCII PLY with one vertex per point.
pub fn write_ply(mut sink: Sink, comment: &str, points: &[[f64; 3]]) -> Result<()> {
    let mut body = String::new();
    body.push_str("ply\nformat ascii 1.0\n");
    body.push_str(&format!("comment {comment}\n"));
    body.push_str(&format!("element vertex {}\n", points.len()));
    body.push_str("property double x\nproperty double y\nproperty double z\nend_header\n");
    for p in points {
        body.push_str(&format!("{} {} {}\n", num(p[0]), num(p[1]), num(p[2])));
    }
    sink.write_all(body.as_bytes()).map_err(|e| sink.err(e))?;
    sink.finish()
}

/// First three coordinates of `F^T (p - p_anchor)`, the projection seen
/// from the frame at the anchor.
pub fn project(points: &[Point], anchor_frame: &Frame, anchor: &Point) -> Vec<[f64; 3]> {
    let ft = anchor_frame.transpose();
    points
        .iter()
        .map(|p| {
            let q = ft * (p - anchor);
            [q[0], q[1], q[2]]
        })
        .collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, io::Error::other(e)))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Reads 16 numbers, row major, separated by whitespace or commas.
pub fn read_frame(path: &Path) -> Result<Frame> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let vals: std::result::Result<Vec<f64>, _> = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(str::parse::<f64>)
        .collect();
    let vals = vals.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if vals.len() != 16 {
        return Err(CliError::Usage(format!("{}: expected 16 numbers, found {}", path.display(), vals.len())));
    }
    let f = Frame::from_row_slice(&vals);
    let defect = orthogonality_defect(&f);
    if defect > 1e-10 {
        return Err(CliError::Usage(format!("{}: frame is not orthogonal (defect {defect:e})", path.display())));
    }
    Ok(f)
}

pub fn init_frame(path: Option<&Path>) -> Result<Frame> {
    path.map_or(Ok(Frame::identity()), read_frame)
}

/// `out.csv` -> `out.fit.json`.
pub fn sidecar_path(output: &Path) -> PathBuf {
    output.with_extension("fit.json")
}
