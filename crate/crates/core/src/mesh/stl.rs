//! STL reader and writers (3D Systems layout).
//!
//! Binary: 80-byte header, little-endian u32 facet count, then 50-byte
//! records of 12 little-endian f32 (normal, three vertices) and a u16
//! attribute. A file is treated as binary iff its length is exactly
//! `84 + 50 * count`; otherwise the ASCII grammar is tried.

use std::io::Write;

use super::{MeshError, Point, TriangleMesh, Vector};

const HEADER_LEN: usize = 80;
const PREAMBLE_LEN: usize = HEADER_LEN + 4;
const RECORD_LEN: usize = 50;

pub fn parse_stl(bytes: &[u8]) -> Result<TriangleMesh, MeshError> {
    let declared = declared_facets(bytes);
    if let Some(count) = declared {
        if bytes.len() == binary_len(count) {
            return parse_binary(bytes, count);
        }
    }
    if looks_ascii(bytes) {
        // looks_ascii guarantees valid UTF-8
        let text = std::str::from_utf8(bytes).expect("checked utf-8");
        return parse_ascii(text);
    }
    match declared {
        Some(count) if bytes.len() < binary_len(count) => Err(MeshError::Truncated {
            declared: count,
            expected: binary_len(count),
            actual: bytes.len(),
        }),
        Some(count) => Err(MeshError::LengthMismatch {
            declared: count,
            expected: binary_len(count),
            actual: bytes.len(),
        }),
        None => Err(MeshError::UnknownFormat),
    }
}

fn binary_len(count: u32) -> usize {
    PREAMBLE_LEN + RECORD_LEN * count as usize
}

fn declared_facets(bytes: &[u8]) -> Option<u32> {
    let raw = bytes.get(HEADER_LEN..PREAMBLE_LEN)?;
    Some(u32::from_le_bytes(raw.try_into().unwrap()))
}

fn looks_ascii(bytes: &[u8]) -> bool {
    let Ok(text) = std::str::from_utf8(bytes) else {
        return false;
    };
    !text.contains('\0') && text.trim_start().starts_with("solid")
}

fn parse_binary(bytes: &[u8], count: u32) -> Result<TriangleMesh, MeshError> {
    let count = count as usize;
    let mut vertices = Vec::with_capacity(3 * count);
    let mut normals = Vec::with_capacity(count);
    let read = |rec: &[u8], k: usize| -> f64 { f32::from_le_bytes(rec[4 * k..4 * k + 4].try_into().unwrap()) as f64 };
    for rec in bytes[PREAMBLE_LEN..].chunks_exact(RECORD_LEN) {
        let n = Vector::new(read(rec, 0), read(rec, 1), read(rec, 2));
        normals.push(if n.iter().all(|c| c.is_finite()) {
            n
        } else {
            Vector::zeros()
        });
        for v in 0..3 {
            let base = 3 + 3 * v;
            vertices.push(Point::new(read(rec, base), read(rec, base + 1), read(rec, base + 2)));
        }
    }
    let facets = (0..count as u32).map(|i| [3 * i, 3 * i + 1, 3 * i + 2]).collect();
    TriangleMesh::with_normals(vertices, facets, normals)
}

struct Tokens<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    current: Option<(usize, std::str::SplitWhitespace<'a>)>,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        Tokens {
            lines: text.lines().enumerate(),
            current: None,
            last_line: 1,
        }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        loop {
            if let Some((line, words)) = &mut self.current {
                if let Some(w) = words.next() {
                    return Some((*line, w));
                }
            }
            let (idx, line) = self.lines.next()?;
            self.last_line = idx + 1;
            self.current = Some((idx + 1, line.split_whitespace()));
        }
    }

    /// Discards the remainder of the current line (solid names).
    fn skip_line(&mut self) {
        self.current = None;
    }

    fn expect(&mut self, keyword: &str) -> Result<usize, MeshError> {
        match self.next() {
            Some((line, w)) if w == keyword => Ok(line),
            Some((line, w)) => Err(syntax(line, format!("expected '{keyword}', found '{w}'"))),
            None => Err(syntax(
                self.last_line,
                format!("expected '{keyword}', found end of input"),
            )),
        }
    }

    fn number(&mut self) -> Result<(usize, f64), MeshError> {
        match self.next() {
            Some((line, w)) => w
                .parse::<f64>()
                .map(|v| (line, v))
                .map_err(|_| syntax(line, format!("invalid number '{w}'"))),
            None => Err(syntax(self.last_line, "expected number, found end of input".into())),
        }
    }

    fn triple(&mut self) -> Result<(usize, [f64; 3]), MeshError> {
        let (line, x) = self.number()?;
        let (_, y) = self.number()?;
        let (_, z) = self.number()?;
        Ok((line, [x, y, z]))
    }
}

fn syntax(line: usize, message: String) -> MeshError {
    MeshError::Syntax { line, message }
}

fn parse_ascii(text: &str) -> Result<TriangleMesh, MeshError> {
    let mut tokens = Tokens::new(text);
    let mut vertices = Vec::new();
    let mut normals = Vec::new();
    let mut in_solid = false;
    loop {
        let Some((line, word)) = tokens.next() else {
            if in_solid {
                return Err(syntax(tokens.last_line, "missing 'endsolid'".into()));
            }
            break;
        };
        match (word, in_solid) {
            ("solid", false) => {
                in_solid = true;
                tokens.skip_line();
            }
            ("endsolid", true) => {
                in_solid = false;
                tokens.skip_line();
            }
            ("facet", true) => {
                tokens.expect("normal")?;
                let (_, n) = tokens.triple()?;
                let n = Vector::from(n);
                normals.push(if n.iter().all(|c| c.is_finite()) {
                    n
                } else {
                    Vector::zeros()
                });
                tokens.expect("outer")?;
                tokens.expect("loop")?;
                for _ in 0..3 {
                    tokens.expect("vertex")?;
                    let (line, v) = tokens.triple()?;
                    if !v.iter().all(|c| c.is_finite()) {
                        return Err(syntax(line, "non-finite vertex coordinate".into()));
                    }
                    vertices.push(Point::from(v));
                }
                tokens.expect("endloop")?;
                tokens.expect("endfacet")?;
            }
            (other, _) => {
                return Err(syntax(line, format!("unexpected token '{other}'")));
            }
        }
    }
    if normals.is_empty() {
        return Err(MeshError::Empty);
    }
    let facets = (0..normals.len() as u32)
        .map(|i| [3 * i, 3 * i + 1, 3 * i + 2])
        .collect();
    TriangleMesh::with_normals(vertices, facets, normals)
}

/// Binary STL; coordinates are narrowed to f32.
pub fn write_stl_binary(mesh: &TriangleMesh, out: &mut impl Write) -> std::io::Result<()> {
    let mut header = [b' '; HEADER_LEN];
    let tag = b"moldgate binary stl";
    header[..tag.len()].copy_from_slice(tag);
    out.write_all(&header)?;
    out.write_all(&(mesh.facet_count() as u32).to_le_bytes())?;
    let mut rec = [0u8; RECORD_LEN];
    for (f, tri) in mesh.triangles().enumerate() {
        let n = mesh.normal(f);
        let values = [n.x, n.y, n.z]
            .into_iter()
            .chain(tri.iter().flat_map(|p| [p.x, p.y, p.z]));
        for (k, v) in values.enumerate() {
            rec[4 * k..4 * k + 4].copy_from_slice(&(v as f32).to_le_bytes());
        }
        out.write_all(&rec)?;
    }
    Ok(())
}

pub fn write_stl_ascii(mesh: &TriangleMesh, name: &str, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "solid {name}")?;
    for (f, tri) in mesh.triangles().enumerate() {
        let n = mesh.normal(f);
        writeln!(out, "  facet normal {} {} {}", n.x, n.y, n.z)?;
        writeln!(out, "    outer loop")?;
        for p in tri {
            writeln!(out, "      vertex {} {} {}", p.x, p.y, p.z)?;
        }
        writeln!(out, "    endloop")?;
        writeln!(out, "  endfacet")?;
    }
    writeln!(out, "endsolid {name}")
}
