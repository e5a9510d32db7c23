//! Legacy ASCII VTK unstructured grids with biquadratic quadrilateral cells.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::derived::DerivedFields;
use crate::discretization::Mesh2D;
use crate::error::{Error, Result};

const BIQUADRATIC_QUAD: u32 = 28;

/// Named arrays attached to points or cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VtkData {
    pub point_scalars: Vec<(String, Vec<f64>)>,
    pub point_vectors: Vec<(String, Vec<[f64; 2]>)>,
    pub cell_scalars: Vec<(String, Vec<f64>)>,
}

impl VtkData {
    /// Displacement and pressure on the nodes, `J`, `W` and `|w|` on the
    /// cells.
    pub fn from_fields(mesh: &Mesh2D, displacement: &[f64], fields: &DerivedFields) -> Result<Self> {
        Ok(Self {
            point_vectors: vec![(
                "displacement".into(),
                displacement.chunks_exact(2).map(|c| [c[0], c[1]]).collect(),
            )],
            point_scalars: vec![("pressure".into(), mesh.pressure_at_q2_nodes(&fields.pressure)?)],
            cell_scalars: vec![
                ("volume_ratio".into(), fields.volume_ratio.clone()),
                ("energy".into(), fields.energy.clone()),
                ("seepage_magnitude".into(), fields.seepage_magnitude()),
            ],
        })
    }
}

/// Contents of a parsed file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VtkFile {
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<Vec<usize>>,
    pub data: VtkData,
}

/// Serializes the mesh's current configuration with the given data.
pub fn format_vtk(mesh: &Mesh2D, title: &str, data: &VtkData) -> Result<String> {
    let (np, nc) = (mesh.n_q2_nodes(), mesh.n_elements());
    for (name, v) in &data.point_scalars {
        check(name, v.len(), np)?;
    }
    for (name, v) in &data.point_vectors {
        check(name, v.len(), np)?;
    }
    for (name, v) in &data.cell_scalars {
        check(name, v.len(), nc)?;
    }
    let mut s = String::new();
    let title = title.replace('\n', " ");
    writeln!(s, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID").unwrap();
    writeln!(s, "POINTS {np} double").unwrap();
    for x in mesh.current_coords() {
        writeln!(s, "{:e} {:e} 0", x.x, x.y).unwrap();
    }
    writeln!(s, "CELLS {nc} {}", nc * 10).unwrap();
    for el in mesh.elements() {
        let ids: Vec<String> = el.q2.iter().map(usize::to_string).collect();
        writeln!(s, "9 {}", ids.join(" ")).unwrap();
    }
    writeln!(s, "CELL_TYPES {nc}").unwrap();
    for _ in 0..nc {
        writeln!(s, "{BIQUADRATIC_QUAD}").unwrap();
    }
    if !data.point_scalars.is_empty() || !data.point_vectors.is_empty() {
        writeln!(s, "POINT_DATA {np}").unwrap();
        for (name, v) in &data.point_scalars {
            write_scalars(&mut s, name, v);
        }
        for (name, v) in &data.point_vectors {
            writeln!(s, "VECTORS {} double", sanitize(name)).unwrap();
            for x in v {
                writeln!(s, "{:e} {:e} 0", x[0], x[1]).unwrap();
            }
        }
    }
    if !data.cell_scalars.is_empty() {
        writeln!(s, "CELL_DATA {nc}").unwrap();
        for (name, v) in &data.cell_scalars {
            write_scalars(&mut s, name, v);
        }
    }
    Ok(s)
}

fn check(name: &str, got: usize, expected: usize) -> Result<()> {
    if got == expected {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "array `{name}` has {got} entries, expected {expected}"
        )))
    }
}

fn sanitize(name: &str) -> String {
    name.split_whitespace().collect::<Vec<_>>().join("_")
}

fn write_scalars(s: &mut String, name: &str, v: &[f64]) {
    writeln!(s, "SCALARS {} double 1\nLOOKUP_TABLE default", sanitize(name)).unwrap();
    for x in v {
        writeln!(s, "{x:e}").unwrap();
    }
}

pub fn write_snapshot(path: &Path, mesh: &Mesh2D, title: &str, data: &VtkData) -> Result<()> {
    let text = format_vtk(mesh, title, data)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Parses files produced by [`write_snapshot`].
pub fn read_snapshot(path: &Path) -> Result<VtkFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_vtk(&text).map_err(|message| Error::Parse {
        path: path.to_path_buf(),
        message,
    })
}

pub fn parse_vtk(text: &str) -> std::result::Result<VtkFile, String> {
    let mut lines = text.lines().enumerate().skip(4).peekable();
    let mut out = VtkFile::default();
    let num = |tok: Option<&str>, line: usize| -> std::result::Result<f64, String> {
        let t = tok.ok_or_else(|| format!("line {}: missing value", line + 1))?;
        t.parse().map_err(|_| format!("line {}: bad number `{t}`", line + 1))
    };
    let count = |tok: Option<&str>, line: usize| -> std::result::Result<usize, String> {
        let t = tok.ok_or_else(|| format!("line {}: missing count", line + 1))?;
        t.parse().map_err(|_| format!("line {}: bad count `{t}`", line + 1))
    };
    let mut section = "";
    while let Some((ln, line)) = lines.next() {
        let mut tok = line.split_whitespace();
        let Some(key) = tok.next() else { continue };
        let mut rows = |n: usize| -> std::result::Result<Vec<(usize, &str)>, String> {
            (0..n)
                .map(|_| lines.next().ok_or_else(|| "unexpected end of file".to_string()))
                .collect()
        };
        match key {
            "POINTS" => {
                let n = count(tok.next(), ln)?;
                for (l, r) in rows(n)? {
                    let mut t = r.split_whitespace();
                    out.points.push([num(t.next(), l)?, num(t.next(), l)?, num(t.next(), l)?]);
                }
            }
            "CELLS" => {
                let n = count(tok.next(), ln)?;
                for (l, r) in rows(n)? {
                    let ids: std::result::Result<Vec<usize>, String> =
                        r.split_whitespace().map(|t| count(Some(t), l)).collect();
                    let ids = ids?;
                    match ids.split_first() {
                        Some((&len, rest)) if len == rest.len() => out.cells.push(rest.to_vec()),
                        _ => return Err(format!("line {}: malformed cell", l + 1)),
                    }
                }
            }
            "CELL_TYPES" => {
                let n = count(tok.next(), ln)?;
                rows(n)?;
            }
            "POINT_DATA" | "CELL_DATA" => section = if key == "POINT_DATA" { "point" } else { "cell" },
            "SCALARS" => {
                let name = tok.next().ok_or("SCALARS without name")?.to_string();
                let n = if section == "point" { out.points.len() } else { out.cells.len() };
                lines.next(); // lookup table
                let mut v = Vec::with_capacity(n);
                for _ in 0..n {
                    let (l, r) = lines.next().ok_or("unexpected end of file")?;
                    v.push(num(r.split_whitespace().next(), l)?);
                }
                match section {
                    "point" => out.data.point_scalars.push((name, v)),
                    "cell" => out.data.cell_scalars.push((name, v)),
                    _ => return Err(format!("line {}: data outside a data section", ln + 1)),
                }
            }
            "VECTORS" => {
                let name = tok.next().ok_or("VECTORS without name")?.to_string();
                if section != "point" {
                    return Err(format!("line {}: only point vectors are supported", ln + 1));
                }
                let mut v = Vec::with_capacity(out.points.len());
                for (l, r) in rows(out.points.len())? {
                    let mut t = r.split_whitespace();
                    v.push([num(t.next(), l)?, num(t.next(), l)?]);
                }
                out.data.point_vectors.push((name, v));
            }
            other => return Err(format!("line {}: unexpected keyword `{other}`", ln + 1)),
        }
    }
    Ok(out)
}
