//! Cloud files: CSV and binary little-endian PLY.
//!
//! CSV keeps full `f64` precision (shortest round-trip formatting). PLY stores
//! coordinates as 32-bit floats, so a PLY round trip rounds each coordinate
//! to the nearest `f32` (about 7 significant digits; sub-micrometre for
//! stands a few hundred metres across). PLY headers carry the cloud's
//! provenance as `comment` lines.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LabelledCloud, LabelledPoint, Level, Provenance, ScanTag};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "x,y,z,tree_id,level,scanline_id,pose_index";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudFormat {
    Csv,
    Ply,
}

impl CloudFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("csv") => Ok(CloudFormat::Csv),
            Some("ply") => Ok(CloudFormat::Ply),
            _ => Err(Error::config(format!(
                "{}: unknown cloud format (expected .csv or .ply)",
                path.display()
            ))),
        }
    }
}

pub fn write_cloud(path: &Path, cloud: &LabelledCloud) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    match CloudFormat::from_path(path)? {
        CloudFormat::Csv => write_csv(&mut w, cloud),
        CloudFormat::Ply => write_ply(&mut w, cloud),
    }
    .and_then(|_| w.flush())
    .map_err(|e| Error::io(path, e))
}

pub fn read_cloud(path: &Path) -> Result<LabelledCloud> {
    let format = CloudFormat::from_path(path)?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    match format {
        CloudFormat::Csv => read_csv(&mut r),
        CloudFormat::Ply => read_ply(&mut r),
    }
    .map_err(|e| match e {
        ReadError::Io(e) => Error::io(path, e),
        ReadError::Format(m) => Error::parse(path, m),
    })
}

#[derive(Debug)]
pub enum ReadError {
    Io(std::io::Error),
    Format(String),
}

impl From<std::io::Error> for ReadError {
    fn from(e: std::io::Error) -> Self {
        ReadError::Io(e)
    }
}

fn format_err(msg: impl Into<String>) -> ReadError {
    ReadError::Format(msg.into())
}

#[derive(Serialize, Deserialize)]
struct CsvRecord {
    x: f64,
    y: f64,
    z: f64,
    tree_id: u32,
    level: u8,
    scanline_id: Option<u32>,
    pose_index: Option<u32>,
}

pub fn write_csv<W: Write>(w: W, cloud: &LabelledCloud) -> std::io::Result<()> {
    let mut out = csv::WriterBuilder::new()
        .has_headers(true)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    if cloud.is_empty() {
        out.write_record(CSV_HEADER.split(','))?;
    }
    for p in &cloud.points {
        out.serialize(CsvRecord {
            x: p.x,
            y: p.y,
            z: p.z,
            tree_id: p.tree_id,
            level: p.level.into(),
            scanline_id: p.scan.map(|s| s.scanline_id),
            pose_index: p.scan.map(|s| s.pose_index),
        })?;
    }
    out.flush()
}

pub fn read_csv<R: Read>(r: R) -> std::result::Result<LabelledCloud, ReadError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(format_err(format!("expected header `{CSV_HEADER}`")));
    }
    let mut points = Vec::new();
    for (line, rec) in rdr.deserialize::<CsvRecord>().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let level = Level::try_from(rec.level).map_err(|m| format_err(format!("row {}: {m}", line + 1)))?;
        let scan = match (rec.scanline_id, rec.pose_index) {
            (Some(scanline_id), Some(pose_index)) => Some(ScanTag {
                scanline_id,
                pose_index,
            }),
            (None, None) => None,
            _ => {
                return Err(format_err(format!(
                    "row {}: scanline_id and pose_index must both be set or both empty",
                    line + 1
                )))
            }
        };
        let p = LabelledPoint {
            x: rec.x,
            y: rec.y,
            z: rec.z,
            tree_id: rec.tree_id,
            level,
            scan,
        };
        if !p.is_finite() {
            return Err(format_err(format!("row {}: non-finite coordinate", line + 1)));
        }
        points.push(p);
    }
    Ok(LabelledCloud::new(points, Provenance::default()))
}

fn csv_err(e: csv::Error) -> ReadError {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => ReadError::Io(io),
            _ => unreachable!(),
        }
    } else {
        format_err(e.to_string())
    }
}

fn is_scan_cloud(cloud: &LabelledCloud) -> std::io::Result<bool> {
    let tagged = cloud.points.iter().filter(|p| p.scan.is_some()).count();
    if tagged != 0 && tagged != cloud.len() {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            "cloud mixes scan returns and source points",
        ));
    }
    Ok(tagged != 0)
}

pub fn write_ply<W: Write>(mut w: W, cloud: &LabelledCloud) -> std::io::Result<()> {
    let scan = is_scan_cloud(cloud)?;
    let prov = &cloud.provenance;
    writeln!(w, "ply")?;
    writeln!(w, "format binary_little_endian 1.0")?;
    writeln!(w, "comment stage {}", prov.stage)?;
    writeln!(w, "comment seed {}", prov.seed)?;
    writeln!(w, "comment params_hash {}", prov.params_hash)?;
    if let Some(s) = prov.sample_spacing {
        writeln!(w, "comment sample_spacing {s}")?;
    }
    writeln!(w, "element vertex {}", cloud.len())?;
    for name in ["x", "y", "z"] {
        writeln!(w, "property float {name}")?;
    }
    writeln!(w, "property uint tree_id")?;
    writeln!(w, "property uchar level")?;
    if scan {
        writeln!(w, "property uint scanline_id")?;
        writeln!(w, "property uint pose_index")?;
    }
    writeln!(w, "end_header")?;

    let stride = if scan { 25 } else { 17 };
    let mut buf = Vec::with_capacity(stride * 4096);
    for chunk in cloud.points.chunks(4096) {
        buf.clear();
        for p in chunk {
            buf.extend_from_slice(&(p.x as f32).to_le_bytes());
            buf.extend_from_slice(&(p.y as f32).to_le_bytes());
            buf.extend_from_slice(&(p.z as f32).to_le_bytes());
            buf.extend_from_slice(&p.tree_id.to_le_bytes());
            buf.push(p.level.into());
            if let Some(tag) = p.scan {
                buf.extend_from_slice(&tag.scanline_id.to_le_bytes());
                buf.extend_from_slice(&tag.pose_index.to_le_bytes());
            }
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn decode(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

struct Element {
    name: String,
    count: usize,
    props: Vec<(String, Scalar)>,
}

pub fn read_ply<R: BufRead>(r: &mut R) -> std::result::Result<LabelledCloud, ReadError> {
    let mut line = String::new();
    let mut next_line = |r: &mut R| -> std::result::Result<String, ReadError> {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            return Err(format_err("unexpected end of header"));
        }
        Ok(line.trim_end().to_owned())
    };

    if next_line(r)? != "ply" {
        return Err(format_err("missing `ply` magic"));
    }
    let mut provenance = Provenance::default();
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let l = next_line(r)?;
        let mut tok = l.split_whitespace();
        match tok.next() {
            Some("format") => {
                if tok.next() != Some("binary_little_endian") {
                    return Err(format_err("only binary_little_endian PLY is supported"));
                }
            }
            Some("comment") => {
                let key = tok.next().unwrap_or("");
                let val = tok.collect::<Vec<_>>().join(" ");
                match key {
                    "stage" => provenance.stage = val,
                    "seed" => provenance.seed = val.parse().unwrap_or(0),
                    "params_hash" => provenance.params_hash = val,
                    "sample_spacing" => provenance.sample_spacing = val.parse().ok(),
                    _ => {}
                }
            }
            Some("obj_info") => {}
            Some("element") => {
                let name = tok.next().ok_or_else(|| format_err("element without name"))?;
                let count = tok
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| format_err("element without count"))?;
                elements.push(Element {
                    name: name.to_owned(),
                    count,
                    props: Vec::new(),
                });
            }
            Some("property") => {
                let el = elements.last_mut().ok_or_else(|| format_err("property before element"))?;
                let ty = tok.next().unwrap_or("");
                if ty == "list" {
                    if el.name == "vertex" || !elements.iter().any(|e| e.name == "vertex") {
                        return Err(format_err("list properties before vertex data are not supported"));
                    }
                    continue;
                }
                let scalar = Scalar::parse(ty).ok_or_else(|| format_err(format!("unknown type `{ty}`")))?;
                let name = tok.next().ok_or_else(|| format_err("property without name"))?;
                el.props.push((name.to_owned(), scalar));
            }
            Some("end_header") => break,
            Some(other) => return Err(format_err(format!("unexpected header keyword `{other}`"))),
            None => {}
        }
    }

    // skip scalar-only elements stored before the vertices
    let mut skip = 0usize;
    let mut vertex = None;
    for el in &elements {
        if el.name == "vertex" {
            vertex = Some(el);
            break;
        }
        skip += el.count * el.props.iter().map(|p| p.1.size()).sum::<usize>();
    }
    let vertex = vertex.ok_or_else(|| format_err("no vertex element"))?;
    std::io::copy(&mut r.take(skip as u64), &mut std::io::sink())?;

    let mut offsets = std::collections::HashMap::new();
    let mut stride = 0usize;
    for (name, ty) in &vertex.props {
        offsets.insert(name.as_str(), (stride, *ty));
        stride += ty.size();
    }
    let field = |name: &str| -> std::result::Result<(usize, Scalar), ReadError> {
        offsets
            .get(name)
            .copied()
            .ok_or_else(|| format_err(format!("vertex property `{name}` missing")))
    };
    let (fx, fy, fz) = (field("x")?, field("y")?, field("z")?);
    let ftree = field("tree_id")?;
    let flevel = field("level")?;
    let scan_fields = match (offsets.get("scanline_id"), offsets.get("pose_index")) {
        (Some(&a), Some(&b)) => Some((a, b)),
        (None, None) => None,
        _ => return Err(format_err("scanline_id and pose_index must appear together")),
    };

    let mut rec = vec![0u8; stride];
    let mut points = Vec::with_capacity(vertex.count);
    for i in 0..vertex.count {
        r.read_exact(&mut rec).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                format_err(format!("truncated vertex data at vertex {i}"))
            } else {
                ReadError::Io(e)
            }
        })?;
        let get = |(off, ty): (usize, Scalar)| ty.decode(&rec[off..]);
        let level = Level::try_from(get(flevel) as u8).map_err(|m| format_err(format!("vertex {i}: {m}")))?;
        let p = LabelledPoint {
            x: get(fx),
            y: get(fy),
            z: get(fz),
            tree_id: get(ftree) as u32,
            level,
            scan: scan_fields.map(|(a, b)| ScanTag {
                scanline_id: get(a) as u32,
                pose_index: get(b) as u32,
            }),
        };
        if !p.is_finite() {
            return Err(format_err(format!("vertex {i}: non-finite coordinate")));
        }
        points.push(p);
    }
    Ok(LabelledCloud::new(points, provenance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn sample(scan: bool) -> LabelledCloud {
        let pts = (0..5)
            .map(|i| {
                let mut p = LabelledPoint::new([i as f64 * 0.1, -1.0 / 3.0, 2.5e-3 * i as f64], 7 + i, Level::ALL[i as usize % 4]);
                if scan {
                    p.scan = Some(ScanTag {
                        scanline_id: 400 - i,
                        pose_index: i * 2,
                    });
                }
                p
            })
            .collect();
        LabelledCloud::new(
            pts,
            Provenance {
                stage: "stand".into(),
                seed: 42,
                params_hash: "abc123".into(),
                sample_spacing: Some(0.01),
            },
        )
    }

    #[test]
    fn csv_header_and_empty_optionals() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &sample(false)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert!(lines.next().unwrap().ends_with(",,"));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        for scan in [false, true] {
            let c = sample(scan);
            let mut buf = Vec::new();
            write_csv(&mut buf, &c).unwrap();
            let back = read_csv(Cursor::new(buf)).unwrap();
            assert_eq!(back.points, c.points);
        }
    }

    #[test]
    fn csv_rejects_half_tagged_rows() {
        let text = format!("{CSV_HEADER}\n0,0,0,1,0,5,\n");
        assert!(matches!(read_csv(Cursor::new(text)), Err(ReadError::Format(_))));
    }

    #[test]
    fn csv_rejects_bad_level() {
        let text = format!("{CSV_HEADER}\n0,0,0,1,4,,\n");
        assert!(matches!(read_csv(Cursor::new(text)), Err(ReadError::Format(_))));
    }

    #[test]
    fn ply_header_layout() {
        let mut buf = Vec::new();
        write_ply(&mut buf, &sample(true)).unwrap();
        let end = buf.windows(11).position(|w| w == b"end_header\n").unwrap() + 11;
        let header = std::str::from_utf8(&buf[..end]).unwrap();
        assert!(header.starts_with("ply\nformat binary_little_endian 1.0\n"));
        assert!(header.contains(
            "element vertex 5\nproperty float x\nproperty float y\nproperty float z\n\
             property uint tree_id\nproperty uchar level\nproperty uint scanline_id\nproperty uint pose_index\nend_header\n"
        ));
        assert_eq!(buf.len() - end, 5 * 25);
    }

    #[test]
    fn ply_round_trip_rounds_to_f32() {
        for scan in [false, true] {
            let c = sample(scan);
            let mut buf = Vec::new();
            write_ply(&mut buf, &c).unwrap();
            let back = read_ply(&mut Cursor::new(buf)).unwrap();
            assert_eq!(back.provenance, c.provenance);
            for (a, b) in back.points.iter().zip(&c.points) {
                assert_eq!(a.x, b.x as f32 as f64);
                assert_eq!(a.y, b.y as f32 as f64);
                assert_eq!(a.z, b.z as f32 as f64);
                assert_eq!((a.tree_id, a.level, a.scan), (b.tree_id, b.level, b.scan));
            }
        }
    }

    #[test]
    fn ply_truncated_data_is_an_error() {
        let mut buf = Vec::new();
        write_ply(&mut buf, &sample(false)).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(matches!(read_ply(&mut Cursor::new(buf)), Err(ReadError::Format(_))));
    }

    #[test]
    fn ply_ascii_is_rejected() {
        let text = "ply\nformat ascii 1.0\nelement vertex 0\nend_header\n";
        assert!(read_ply(&mut Cursor::new(text.as_bytes().to_vec())).is_err());
    }
}
