//! Wavefront OBJ import. Only `v`, `f`, `g` and `usemtl` records matter;
//! the most recent group or material name labels subsequent faces.

use std::collections::HashMap;
use std::path::Path;

use super::TriangleMesh;
use crate::cloud::Level;
use crate::error::{Error, Result};

/// How OBJ group/material names map to branch levels.
#[derive(Debug, Clone, Default)]
pub enum LabelMap {
    /// `trunk` → 0, `leaf`/`leaves` → 3, `stem`/`branch` followed by a digit
    /// → that digit clamped to 1..=2. Matching is case-insensitive.
    #[default]
    Heuristic,
    /// Exact name lookup.
    Table(HashMap<String, Level>),
}

impl LabelMap {
    pub fn resolve(&self, name: &str) -> Option<Level> {
        match self {
            LabelMap::Table(t) => t.get(name).copied(),
            LabelMap::Heuristic => heuristic_level(name),
        }
    }
}

fn heuristic_level(name: &str) -> Option<Level> {
    let lower = name.to_ascii_lowercase();
    if lower.contains("trunk") {
        return Some(Level::Trunk);
    }
    if lower.contains("leaf") || lower.contains("leaves") {
        return Some(Level::Leaf);
    }
    for key in ["stem", "branch"] {
        if let Some(pos) = lower.find(key) {
            let digit = lower[pos + key.len()..]
                .chars()
                .find(|c| c.is_ascii_digit())
                .and_then(|c| c.to_digit(10));
            if let Some(d) = digit {
                return Some(if d <= 1 { Level::Branch } else { Level::Twig });
            }
        }
    }
    None
}

pub fn load_obj(path: &Path, labels: &LabelMap, tree_id: u32) -> Result<TriangleMesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_obj(&text, labels, tree_id).map_err(|m| Error::parse(path, m))
}

pub fn parse_obj(text: &str, labels: &LabelMap, tree_id: u32) -> std::result::Result<TriangleMesh, String> {
    let mut mesh = TriangleMesh::default();
    let mut group: Option<(String, Level)> = None;
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut tok = line.split_whitespace();
        let at = |m: String| format!("line {}: {m}", ln + 1);
        match tok.next() {
            Some("v") => {
                let coords: Vec<f64> = tok
                    .take(3)
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| at(format!("bad vertex: {e}")))?;
                if coords.len() != 3 {
                    return Err(at("vertex needs three coordinates".into()));
                }
                mesh.vertices.push([coords[0], coords[1], coords[2]]);
            }
            Some("g") | Some("usemtl") => {
                let name = tok.collect::<Vec<_>>().join(" ");
                let level = labels
                    .resolve(&name)
                    .ok_or_else(|| at(format!("group `{name}` does not map to a branch level")))?;
                group = Some((name, level));
            }
            Some("f") => {
                let n = mesh.vertices.len() as i64;
                let idx: Vec<usize> = tok
                    .map(|t| {
                        let first = t.split('/').next().unwrap_or("");
                        let i: i64 = first.parse().map_err(|_| at(format!("bad face index `{t}`")))?;
                        let abs = if i < 0 { n + i } else { i - 1 };
                        if abs < 0 || abs >= n {
                            return Err(at(format!("face index {i} out of range")));
                        }
                        Ok(abs as usize)
                    })
                    .collect::<std::result::Result<_, _>>()?;
                if idx.len() < 3 {
                    return Err(at("face needs at least three vertices".into()));
                }
                let (_, level) = group
                    .as_ref()
                    .ok_or_else(|| at("face outside any group; cannot assign a branch level".into()))?;
                for k in 1..idx.len() - 1 {
                    mesh.push_face([idx[0], idx[k], idx[k + 1]], *level, tree_id);
                }
            }
            _ => {}
        }
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heuristic_names() {
        assert_eq!(heuristic_level("Trunk"), Some(Level::Trunk));
        assert_eq!(heuristic_level("stem1"), Some(Level::Branch));
        assert_eq!(heuristic_level("stem0"), Some(Level::Branch));
        assert_eq!(heuristic_level("branch_3"), Some(Level::Twig));
        assert_eq!(heuristic_level("leaves"), Some(Level::Leaf));
        assert_eq!(heuristic_level("leaf_mat"), Some(Level::Leaf));
        assert_eq!(heuristic_level("bark"), None);
        assert_eq!(heuristic_level("stem"), None);
    }

    #[test]
    fn quads_are_fan_triangulated() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nv 0 2 0\ng trunk\nf 1 2 3 4 5\nusemtl leaves\nf -3/1/1 -2/2/2 -1/3/3\n";
        let m = parse_obj(text, &LabelMap::Heuristic, 5).unwrap();
        assert_eq!(m.faces, vec![[0, 1, 2], [0, 2, 3], [0, 3, 4], [2, 3, 4]]);
        assert_eq!(m.face_label, vec![Level::Trunk, Level::Trunk, Level::Trunk, Level::Leaf]);
        assert!(m.face_tree_id.iter().all(|&t| t == 5));
    }

    #[test]
    fn unmatched_group_is_an_error() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\ng bark\nf 1 2 3\n";
        assert!(parse_obj(text, &LabelMap::Heuristic, 0).unwrap_err().contains("bark"));
    }

    #[test]
    fn explicit_table_wins() {
        let table = LabelMap::Table(HashMap::from([("bark".to_owned(), Level::Trunk)]));
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\ng bark\nf 1 2 3\n";
        assert_eq!(parse_obj(text, &table, 0).unwrap().face_label, vec![Level::Trunk]);
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\ng trunk\nf 1 2 3\n";
        assert!(parse_obj(text, &table, 0).is_err());
    }

    #[test]
    fn face_without_group_is_an_error() {
        assert!(parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nf 1 2 3\n", &LabelMap::Heuristic, 0).is_err());
        assert!(parse_obj("v 0 0 0\ng trunk\nf 1 2 9\n", &LabelMap::Heuristic, 0).is_err());
    }
}
