//! Point cloud files: whitespace XYZ, CSV, and the vertex-only subset of PLY
//! (ASCII and binary little-endian).
//!
//! Writers emit float64 values; ASCII formats use 17 significant digits, so
//! every file written here reads back to bit-identical coordinates. Optional
//! per-point RGB colors travel alongside the geometry and are never used by
//! the geometric operations.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use crate::cloud::{validate_cloud, PointCloud};
use crate::error::{Location, PpcError, Result};
use crate::geometry::Vec3;

pub type Rgb = [u8; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CloudFormat {
    XyzAscii,
    Csv,
    PlyAscii,
    PlyBinaryLe,
}

impl CloudFormat {
    /// Guesses the format from the file extension. `.ply` maps to binary
    /// little-endian; the reader sniffs the actual PLY encoding anyway.
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .unwrap_or_default();
        match ext.as_str() {
            "xyz" | "txt" | "pts" => Ok(CloudFormat::XyzAscii),
            "csv" => Ok(CloudFormat::Csv),
            "ply" => Ok(CloudFormat::PlyBinaryLe),
            _ => Err(PpcError::UnsupportedFormat(format!(
                "cannot infer cloud format from `{}`",
                path.display()
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CloudFormat::XyzAscii => "xyz",
            CloudFormat::Csv => "csv",
            CloudFormat::PlyAscii => "ply-ascii",
            CloudFormat::PlyBinaryLe => "ply-binary",
        }
    }
}

impl FromStr for CloudFormat {
    type Err = PpcError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xyz" => Ok(CloudFormat::XyzAscii),
            "csv" => Ok(CloudFormat::Csv),
            "ply-ascii" => Ok(CloudFormat::PlyAscii),
            "ply-binary" | "ply" => Ok(CloudFormat::PlyBinaryLe),
            other => Err(PpcError::UnsupportedFormat(format!("unknown format `{other}`"))),
        }
    }
}

/// Geometry plus the optional color sidecar.
#[derive(Debug, Clone, PartialEq)]
pub struct CloudData {
    pub cloud: PointCloud,
    pub colors: Option<Vec<Rgb>>,
}

impl CloudData {
    pub fn new(cloud: PointCloud) -> Self {
        Self { cloud, colors: None }
    }

    pub fn with_colors(cloud: PointCloud, colors: Vec<Rgb>) -> Result<Self> {
        if colors.len() != cloud.len() {
            return Err(PpcError::RowCountMismatch {
                left: cloud.len(),
                right: colors.len(),
            });
        }
        Ok(Self {
            cloud,
            colors: Some(colors),
        })
    }
}

/// Reads a cloud; `format` overrides extension-based detection.
pub fn read_cloud(path: &Path, format: Option<CloudFormat>) -> Result<CloudData> {
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => PpcError::FileNotFound(path.to_path_buf()),
        _ => PpcError::Io(e),
    })?;
    let format = match format {
        Some(f) => f,
        None => CloudFormat::from_path(path)?,
    };
    parse_cloud(&bytes, format)
}

/// Parses an in-memory file. For either PLY variant the encoding declared in
/// the header wins.
pub fn parse_cloud(bytes: &[u8], format: CloudFormat) -> Result<CloudData> {
    match format {
        CloudFormat::XyzAscii => parse_delimited(text(bytes)?, Delimiter::Whitespace),
        CloudFormat::Csv => parse_delimited(text(bytes)?, Delimiter::Comma),
        CloudFormat::PlyAscii | CloudFormat::PlyBinaryLe => parse_ply(bytes),
    }
}

fn text(bytes: &[u8]) -> Result<&str> {
    std::str::from_utf8(bytes).map_err(|e| {
        let line = bytes[..e.valid_up_to()].iter().filter(|b| **b == b'\n').count() + 1;
        PpcError::parse(Location::Line(line), "invalid UTF-8")
    })
}

fn finish(points: Vec<Vec3>, colors: Vec<Rgb>, has_colors: bool) -> Result<CloudData> {
    validate_cloud(&points)?;
    let cloud = PointCloud::new(points)?;
    if has_colors {
        CloudData::with_colors(cloud, colors)
    } else {
        Ok(CloudData::new(cloud))
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Delimiter {
    Whitespace,
    Comma,
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.trim()
        .parse::<f64>()
        .map_err(|_| PpcError::parse(Location::Line(line), format!("invalid number `{tok}`")))
}

fn parse_u8(tok: &str, line: usize) -> Result<u8> {
    tok.trim()
        .parse::<u8>()
        .map_err(|_| PpcError::parse(Location::Line(line), format!("invalid color value `{tok}`")))
}

/// Column layout of a delimited file: indices of x, y, z and optional rgb.
struct Columns {
    xyz: [usize; 3],
    rgb: Option<[usize; 3]>,
    width: usize,
}

impl Columns {
    fn positional(width: usize, line: usize) -> Result<Self> {
        match width {
            3 => Ok(Columns {
                xyz: [0, 1, 2],
                rgb: None,
                width,
            }),
            6 => Ok(Columns {
                xyz: [0, 1, 2],
                rgb: Some([3, 4, 5]),
                width,
            }),
            n => Err(PpcError::parse(
                Location::Line(line),
                format!("expected 3 or 6 columns, found {n}"),
            )),
        }
    }

    fn from_header(names: &[&str], line: usize) -> Result<Self> {
        let find = |candidates: &[&str]| {
            names
                .iter()
                .position(|n| candidates.contains(&n.trim().to_ascii_lowercase().as_str()))
        };
        let missing = || PpcError::parse(Location::Line(line), "header must name x, y and z");
        let xyz = [
            find(&["x"]).ok_or_else(missing)?,
            find(&["y"]).ok_or_else(missing)?,
            find(&["z"]).ok_or_else(missing)?,
        ];
        let rgb = match (find(&["red", "r"]), find(&["green", "g"]), find(&["blue", "b"])) {
            (Some(r), Some(g), Some(b)) => Some([r, g, b]),
            _ => None,
        };
        Ok(Columns {
            xyz,
            rgb,
            width: names.len(),
        })
    }
}

fn parse_delimited(src: &str, delim: Delimiter) -> Result<CloudData> {
    let mut points = Vec::new();
    let mut colors = Vec::new();
    let mut columns: Option<Columns> = None;

    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = match delim {
            Delimiter::Whitespace => trimmed.split_whitespace().collect(),
            Delimiter::Comma => trimmed.split(',').map(str::trim).collect(),
        };
        let cols = match &columns {
            Some(c) => c,
            None => {
                let is_header = delim == Delimiter::Comma && tokens[0].parse::<f64>().is_err();
                let c = if is_header {
                    Columns::from_header(&tokens, line)?
                } else {
                    Columns::positional(tokens.len(), line)?
                };
                columns = Some(c);
                if is_header {
                    continue;
                }
                columns.as_ref().unwrap()
            }
        };
        if tokens.len() != cols.width {
            return Err(PpcError::parse(
                Location::Line(line),
                format!("expected {} columns, found {}", cols.width, tokens.len()),
            ));
        }
        let [ix, iy, iz] = cols.xyz;
        points.push([
            parse_f64(tokens[ix], line)?,
            parse_f64(tokens[iy], line)?,
            parse_f64(tokens[iz], line)?,
        ]);
        if let Some([r, g, b]) = cols.rgb {
            colors.push([
                parse_u8(tokens[r], line)?,
                parse_u8(tokens[g], line)?,
                parse_u8(tokens[b], line)?,
            ]);
        }
    }
    let has_colors = columns.as_ref().is_some_and(|c| c.rgb.is_some());
    finish(points, colors, has_colors)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PlyEncoding {
    Ascii,
    BinaryLe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScalarType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarType {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => ScalarType::I8,
            "uchar" | "uint8" => ScalarType::U8,
            "short" | "int16" => ScalarType::I16,
            "ushort" | "uint16" => ScalarType::U16,
            "int" | "int32" => ScalarType::I32,
            "uint" | "uint32" => ScalarType::U32,
            "float" | "float32" => ScalarType::F32,
            "double" | "float64" => ScalarType::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            ScalarType::I8 | ScalarType::U8 => 1,
            ScalarType::I16 | ScalarType::U16 => 2,
            ScalarType::I32 | ScalarType::U32 | ScalarType::F32 => 4,
            ScalarType::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            ScalarType::I8 => b[0] as i8 as f64,
            ScalarType::U8 => b[0] as f64,
            ScalarType::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            ScalarType::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            ScalarType::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            ScalarType::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            ScalarType::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            ScalarType::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    X,
    Y,
    Z,
    Red,
    Green,
    Blue,
    Skip,
}

#[derive(Debug)]
struct PlyHeader {
    encoding: PlyEncoding,
    vertex_count: usize,
    properties: Vec<(ScalarType, Role)>,
    has_colors: bool,
    /// Byte offset of the body.
    body_start: usize,
    /// Number of lines in the header, for ASCII body line numbers.
    header_lines: usize,
}

fn parse_ply_header(bytes: &[u8]) -> Result<PlyHeader> {
    let mut pos = 0;
    let mut line_no = 0;
    let mut next_line = |pos: &mut usize| -> Option<(usize, String)> {
        if *pos >= bytes.len() {
            return None;
        }
        let end = bytes[*pos..]
            .iter()
            .position(|b| *b == b'\n')
            .map(|e| *pos + e + 1)
            .unwrap_or(bytes.len());
        let line = String::from_utf8_lossy(&bytes[*pos..end])
            .trim_end_matches(['\n', '\r'])
            .to_string();
        *pos = end;
        line_no += 1;
        Some((line_no, line))
    };

    match next_line(&mut pos) {
        Some((_, l)) if l.trim() == "ply" => {}
        _ => return Err(PpcError::parse(Location::Line(1), "missing `ply` magic")),
    }

    let mut encoding = None;
    let mut vertex_count = None;
    let mut properties = Vec::new();
    let mut in_vertex = false;
    let mut seen_vertex = false;

    loop {
        let Some((ln, line)) = next_line(&mut pos) else {
            return Err(PpcError::parse(
                Location::Line(line_no + 1),
                "header ends before `end_header`",
            ));
        };
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            [] => {}
            ["end_header"] => {
                let encoding =
                    encoding.ok_or_else(|| PpcError::parse(Location::Line(ln), "missing `format` line"))?;
                let vertex_count =
                    vertex_count.ok_or_else(|| PpcError::parse(Location::Line(ln), "no `vertex` element"))?;
                let roles: Vec<Role> = properties.iter().map(|(_, r)| *r).collect();
                for (role, name) in [(Role::X, "x"), (Role::Y, "y"), (Role::Z, "z")] {
                    if !roles.contains(&role) {
                        return Err(PpcError::parse(
                            Location::Line(ln),
                            format!("vertex element lacks property `{name}`"),
                        ));
                    }
                }
                let has_colors = [Role::Red, Role::Green, Role::Blue]
                    .iter()
                    .all(|r| roles.contains(r));
                if !has_colors {
                    // partial color sets are ignored
                    for p in properties.iter_mut() {
                        if matches!(p.1, Role::Red | Role::Green | Role::Blue) {
                            p.1 = Role::Skip;
                        }
                    }
                }
                return Ok(PlyHeader {
                    encoding,
                    vertex_count,
                    properties,
                    has_colors,
                    body_start: pos,
                    header_lines: ln,
                });
            }
            ["comment", ..] | ["obj_info", ..] => {}
            ["format", fmt, _version] => {
                encoding = Some(match *fmt {
                    "ascii" => PlyEncoding::Ascii,
                    "binary_little_endian" => PlyEncoding::BinaryLe,
                    "binary_big_endian" => {
                        return Err(PpcError::UnsupportedFormat(
                            "binary_big_endian PLY is not supported".into(),
                        ))
                    }
                    other => {
                        return Err(PpcError::parse(
                            Location::Line(ln),
                            format!("unknown PLY format `{other}`"),
                        ))
                    }
                });
            }
            ["element", name, count] => {
                let count: usize = count.parse().map_err(|_| {
                    PpcError::parse(Location::Line(ln), format!("invalid element count `{count}`"))
                })?;
                if *name == "vertex" {
                    if seen_vertex {
                        return Err(PpcError::parse(Location::Line(ln), "duplicate vertex element"));
                    }
                    seen_vertex = true;
                    in_vertex = true;
                    vertex_count = Some(count);
                } else {
                    in_vertex = false;
                    if count > 0 {
                        return Err(PpcError::UnsupportedFormat(format!(
                            "PLY element `{name}` is not supported (vertex-only subset)"
                        )));
                    }
                }
            }
            ["property", "list", ..] => {
                if in_vertex {
                    return Err(PpcError::UnsupportedFormat(
                        "list properties on vertices are not supported".into(),
                    ));
                }
            }
            ["property", ty, name] => {
                if !in_vertex {
                    continue;
                }
                let ty = ScalarType::parse(ty).ok_or_else(|| {
                    PpcError::parse(Location::Line(ln), format!("unknown property type `{ty}`"))
                })?;
                let role = match *name {
                    "x" => Role::X,
                    "y" => Role::Y,
                    "z" => Role::Z,
                    "red" => Role::Red,
                    "green" => Role::Green,
                    "blue" => Role::Blue,
                    _ => Role::Skip,
                };
                match role {
                    Role::X | Role::Y | Role::Z if !matches!(ty, ScalarType::F32 | ScalarType::F64) => {
                        return Err(PpcError::UnsupportedFormat(format!(
                            "coordinate `{name}` must be float or double"
                        )))
                    }
                    Role::Red | Role::Green | Role::Blue if ty != ScalarType::U8 => {
                        log::warn!("ignoring color property `{name}` of non-uchar type");
                        properties.push((ty, Role::Skip));
                        continue;
                    }
                    Role::Skip => log::warn!("skipping unknown vertex property `{name}`"),
                    _ => {}
                }
                if role != Role::Skip && properties.iter().any(|(_, r)| *r == role) {
                    return Err(PpcError::parse(
                        Location::Line(ln),
                        format!("duplicate property `{name}`"),
                    ));
                }
                properties.push((ty, role));
            }
            _ => {
                return Err(PpcError::parse(
                    Location::Line(ln),
                    format!("unrecognized header line `{line}`"),
                ))
            }
        }
    }
}

fn parse_ply(bytes: &[u8]) -> Result<CloudData> {
    let header = parse_ply_header(bytes)?;
    let n = header.vertex_count;
    let mut points = Vec::with_capacity(n.min(1 << 20));
    let mut colors = Vec::new();

    let mut store = |vals: &mut dyn Iterator<Item = (Role, f64)>| {
        let mut p = [0.0; 3];
        let mut c = [0u8; 3];
        for (role, v) in vals {
            match role {
                Role::X => p[0] = v,
                Role::Y => p[1] = v,
                Role::Z => p[2] = v,
                Role::Red => c[0] = v as u8,
                Role::Green => c[1] = v as u8,
                Role::Blue => c[2] = v as u8,
                Role::Skip => {}
            }
        }
        points.push(p);
        if header.has_colors {
            colors.push(c);
        }
    };

    match header.encoding {
        PlyEncoding::BinaryLe => {
            let stride: usize = header.properties.iter().map(|(t, _)| t.size()).sum();
            let body = &bytes[header.body_start..];
            let needed = stride.checked_mul(n).ok_or_else(|| {
                PpcError::parse(Location::Byte(header.body_start), "vertex count overflows")
            })?;
            if body.len() < needed {
                return Err(PpcError::parse(
                    Location::Byte(bytes.len()),
                    format!(
                        "binary body truncated: {} vertices need {needed} bytes, found {}",
                        n,
                        body.len()
                    ),
                ));
            }
            for record in body[..needed].chunks_exact(stride) {
                let mut off = 0;
                let mut vals = header.properties.iter().map(|(t, role)| {
                    let v = t.read_le(&record[off..off + t.size()]);
                    off += t.size();
                    (*role, v)
                });
                store(&mut vals);
            }
        }
        PlyEncoding::Ascii => {
            let body = text(&bytes[header.body_start..]).map_err(|e| match e {
                PpcError::Parse {
                    location: Location::Line(l),
                    message,
                } => PpcError::Parse {
                    location: Location::Line(l + header.header_lines),
                    message,
                },
                other => other,
            })?;
            let mut lines = body
                .lines()
                .enumerate()
                .map(|(i, l)| (i + 1 + header.header_lines, l))
                .filter(|(_, l)| !l.trim().is_empty());
            let mut last_line = header.header_lines;
            for _ in 0..n {
                let Some((ln, line)) = lines.next() else {
                    return Err(PpcError::parse(
                        Location::Line(last_line + 1),
                        format!("expected {n} vertices, body ended after {}", points.len()),
                    ));
                };
                last_line = ln;
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != header.properties.len() {
                    return Err(PpcError::parse(
                        Location::Line(ln),
                        format!(
                            "expected {} values, found {}",
                            header.properties.len(),
                            toks.len()
                        ),
                    ));
                }
                let mut parsed = Vec::with_capacity(toks.len());
                for (tok, (ty, role)) in toks.iter().zip(&header.properties) {
                    let v = parse_f64(tok, ln)?;
                    if *ty == ScalarType::U8 && !(0.0..=255.0).contains(&v) {
                        return Err(PpcError::parse(
                            Location::Line(ln),
                            format!("`{tok}` is not a uchar"),
                        ));
                    }
                    parsed.push((*role, v));
                }
                store(&mut parsed.into_iter());
            }
        }
    }
    finish(points, colors, header.has_colors)
}

/// Writes `data` to `path`; `format` overrides extension-based detection.
pub fn write_cloud(path: &Path, data: &CloudData, format: Option<CloudFormat>) -> Result<()> {
    let format = match format {
        Some(f) => f,
        None => CloudFormat::from_path(path)?,
    };
    let bytes = encode_points(data.cloud.points(), data.colors.as_deref(), format)?;
    let mut file = fs::File::create(path)?;
    file.write_all(&bytes)?;
    file.flush()?;
    Ok(())
}

/// Serializes points (and optional colors) into the given format. Refuses
/// to produce a file without points.
pub fn encode_points(points: &[Vec3], colors: Option<&[Rgb]>, format: CloudFormat) -> Result<Vec<u8>> {
    validate_cloud(points)?;
    if let Some(c) = colors {
        if c.len() != points.len() {
            return Err(PpcError::RowCountMismatch {
                left: points.len(),
                right: c.len(),
            });
        }
    }
    let color_of = |i: usize| colors.map(|c| c[i]);
    let mut out = String::new();
    match format {
        CloudFormat::XyzAscii => {
            for (i, p) in points.iter().enumerate() {
                write_row(&mut out, p, color_of(i), " ");
            }
            Ok(out.into_bytes())
        }
        CloudFormat::Csv => {
            out.push_str(if colors.is_some() {
                "x,y,z,red,green,blue\n"
            } else {
                "x,y,z\n"
            });
            for (i, p) in points.iter().enumerate() {
                write_row(&mut out, p, color_of(i), ",");
            }
            Ok(out.into_bytes())
        }
        CloudFormat::PlyAscii => {
            ply_header(&mut out, "ascii", points.len(), colors.is_some());
            for (i, p) in points.iter().enumerate() {
                write_row(&mut out, p, color_of(i), " ");
            }
            Ok(out.into_bytes())
        }
        CloudFormat::PlyBinaryLe => {
            ply_header(&mut out, "binary_little_endian", points.len(), colors.is_some());
            let stride = 24 + if colors.is_some() { 3 } else { 0 };
            let mut bytes = out.into_bytes();
            bytes.reserve(stride * points.len());
            for (i, p) in points.iter().enumerate() {
                for v in p {
                    bytes.extend_from_slice(&v.to_le_bytes());
                }
                if let Some(c) = color_of(i) {
                    bytes.extend_from_slice(&c);
                }
            }
            Ok(bytes)
        }
    }
}

fn write_row(out: &mut String, p: &Vec3, color: Option<Rgb>, sep: &str) {
    let _ = write!(out, "{:.16e}{sep}{:.16e}{sep}{:.16e}", p[0], p[1], p[2]);
    if let Some([r, g, b]) = color {
        let _ = write!(out, "{sep}{r}{sep}{g}{sep}{b}");
    }
    out.push('\n');
}

fn ply_header(out: &mut String, encoding: &str, n: usize, colors: bool) {
    let _ = writeln!(out, "ply\nformat {encoding} 1.0\ncomment written by ppc");
    let _ = writeln!(out, "element vertex {n}");
    out.push_str("property double x\nproperty double y\nproperty double z\n");
    if colors {
        out.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    out.push_str("end_header\n");
}
