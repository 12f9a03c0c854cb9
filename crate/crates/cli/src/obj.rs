//! OBJ reading and writing for closed polylines.
//!
//! A curve file holds one `v x y z` line per vertex followed by a single
//! polyline record `l 1 2 … N 1`; the repeated first index encodes
//! closedness. Coordinates are printed with the shortest representation
//! that round-trips, so write → read → write is byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use mengerflow_core::{Partition, Polyline};

use crate::CliError;

pub fn obj_string(p: &Polyline) -> Result<String, CliError> {
    if p.dim() != 3 {
        return Err(CliError::Invalid(format!(
            "OBJ export requires 3-dimensional curves, got dimension {}",
            p.dim()
        )));
    }
    let mut out = String::new();
    for v in 0..p.len() {
        let pt = p.point(v);
        writeln!(out, "v {} {} {}", pt[0], pt[1], pt[2]).expect("string write");
    }
    out.push('l');
    for v in 1..=p.len() {
        write!(out, " {v}").expect("string write");
    }
    out.push_str(" 1\n");
    Ok(out)
}

pub fn write_obj(path: &Path, p: &Polyline) -> Result<(), CliError> {
    Ok(std::fs::write(path, obj_string(p)?)?)
}

pub fn parse_obj(text: &str) -> Result<Polyline, CliError> {
    let mut vertices: Vec<[f64; 3]> = Vec::new();
    let mut cycle: Option<Vec<usize>> = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let coords: Vec<f64> = parts
                    .map(|t| {
                        t.parse::<f64>().map_err(|_| {
                            CliError::Parse(format!("line {}: bad coordinate {t:?}", lineno + 1))
                        })
                    })
                    .collect::<Result<_, _>>()?;
                if coords.len() != 3 {
                    return Err(CliError::Parse(format!(
                        "line {}: expected 3 coordinates, got {}",
                        lineno + 1,
                        coords.len()
                    )));
                }
                vertices.push([coords[0], coords[1], coords[2]]);
            }
            Some("l") => {
                if cycle.is_some() {
                    return Err(CliError::Parse(
                        "multiple polyline records; expected exactly one".into(),
                    ));
                }
                let idx: Vec<usize> = parts
                    .map(|t| {
                        t.parse::<usize>().map_err(|_| {
                            CliError::Parse(format!("line {}: bad index {t:?}", lineno + 1))
                        })
                    })
                    .collect::<Result<_, _>>()?;
                cycle = Some(idx);
            }
            // other records (normals, faces, objects) are not curve data
            Some(_) => continue,
            None => continue,
        }
    }

    let cycle = cycle.ok_or_else(|| CliError::Parse("no polyline record found".into()))?;
    let n = vertices.len();
    if n < 3 {
        return Err(CliError::Parse(format!(
            "closed polyline needs at least 3 vertices, got {n}"
        )));
    }
    if cycle.len() != n + 1 || cycle.first() != cycle.last() {
        return Err(CliError::Parse(
            "polyline record is not closed (expected `l i1 … iN i1` covering every vertex)".into(),
        ));
    }
    let mut seen = vec![false; n];
    for &i in &cycle[..n] {
        if i == 0 || i > n {
            return Err(CliError::Parse(format!("vertex index {i} out of range")));
        }
        if seen[i - 1] {
            return Err(CliError::Parse(format!("vertex {i} visited twice")));
        }
        seen[i - 1] = true;
    }

    let points: Vec<f64> = cycle[..n].iter().flat_map(|&i| vertices[i - 1]).collect();
    Ok(Polyline::new(Partition::uniform(n)?, points, 3)?)
}

pub fn read_obj(path: &Path) -> Result<Polyline, CliError> {
    parse_obj(&std::fs::read_to_string(path)?)
}
