use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::cloud::{LabelledCloud, LabelledPoint, Level, Provenance};
use crate::error::{Error, Result};
use crate::rng;

/// Labelled triangle soup, typically loaded from OBJ.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
    pub face_label: Vec<Level>,
    pub face_tree_id: Vec<u32>,
}

impl TriangleMesh {
    pub fn push_face(&mut self, face: [usize; 3], label: Level, tree_id: u32) {
        self.faces.push(face);
        self.face_label.push(label);
        self.face_tree_id.push(tree_id);
    }

    fn corners(&self, f: usize) -> [[f64; 3]; 3] {
        self.faces[f].map(|i| self.vertices[i])
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.corners(f);
        let e1 = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let e2 = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let cx = e1[1] * e2[2] - e1[2] * e2[1];
        let cy = e1[2] * e2[0] - e1[0] * e2[2];
        let cz = e1[0] * e2[1] - e1[1] * e2[0];
        0.5 * (cx * cx + cy * cy + cz * cz).sqrt()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.faces.is_empty() {
            return Err(Error::DegenerateMesh("mesh has no faces".into()));
        }
        if self.face_label.len() != self.faces.len() || self.face_tree_id.len() != self.faces.len() {
            return Err(Error::config("per-face label arrays do not match the face count"));
        }
        if let Some((f, _)) = self
            .faces
            .iter()
            .enumerate()
            .find(|(_, face)| face.iter().any(|&i| i >= self.vertices.len()))
        {
            return Err(Error::config(format!("face {f} references a missing vertex")));
        }
        if self.vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateMesh("non-finite vertex coordinate".into()));
        }
        let total = self.total_area();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::DegenerateMesh(format!("total surface area is {total}")));
        }
        Ok(())
    }
}

/// Area-weighted uniform sampling of the mesh surface at an expected density
/// of `1 / spacing²` points per square metre. Each face draws a
/// Poisson-distributed count from its own random stream, and each sample
/// inherits the face's label and tree id.
pub fn sample_mesh(mesh: &TriangleMesh, spacing: f64, seed: u64) -> Result<LabelledCloud> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::config(format!("spacing must be positive, got {spacing}")));
    }
    mesh.validate()?;
    let density = 1.0 / (spacing * spacing);
    let mut points = Vec::new();
    for f in 0..mesh.faces.len() {
        let lambda = mesh.face_area(f) * density;
        if !(lambda > 0.0) {
            continue;
        }
        let mut r = rng::stream(seed, &[f as u64]);
        let count = Poisson::new(lambda)
            .map_err(|e| Error::DegenerateMesh(format!("face {f}: {e}")))?
            .sample(&mut r) as u64;
        let [a, b, c] = mesh.corners(f);
        for _ in 0..count {
            let s = r.random::<f64>().sqrt();
            let t: f64 = r.random();
            let (wa, wb, wc) = (1.0 - s, s * (1.0 - t), s * t);
            let p = [0, 1, 2].map(|k| wa * a[k] + wb * b[k] + wc * c[k]);
            points.push(LabelledPoint::new(p, mesh.face_tree_id[f], mesh.face_label[f]));
        }
    }

    #[derive(Serialize)]
    struct Params<'a> {
        mesh: &'a TriangleMesh,
        spacing: f64,
        seed: u64,
    }
    let mut provenance = Provenance::new("mesh", seed, &Params { mesh, spacing, seed });
    provenance.sample_spacing = Some(spacing);
    Ok(LabelledCloud::new(points, provenance))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(label: Level) -> TriangleMesh {
        let mut m = TriangleMesh {
            vertices: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]],
            ..Default::default()
        };
        m.push_face([0, 1, 2], label, 9);
        m.push_face([0, 2, 3], label, 9);
        m
    }

    #[test]
    fn unit_square_count_and_plane() {
        let c = sample_mesh(&square(Level::Branch), 0.1, 3).unwrap();
        assert!((70..=130).contains(&c.len()), "{}", c.len());
        for p in &c.points {
            assert_eq!(p.z, 0.0);
            assert!((0.0..=1.0).contains(&p.x) && (0.0..=1.0).contains(&p.y));
            assert_eq!(p.tree_id, 9);
        }
    }

    #[test]
    fn label_inheritance() {
        let mut m = TriangleMesh {
            vertices: vec![[0.0, 0.0, 0.0], [0.3, 0.0, 0.0], [0.0, 0.3, 0.1]],
            ..Default::default()
        };
        m.push_face([0, 1, 2], Level::Leaf, 4);
        let c = sample_mesh(&m, 0.01, 1).unwrap();
        assert!(!c.is_empty());
        assert!(c.points.iter().all(|p| p.level == Level::Leaf && p.tree_id == 4));
    }

    #[test]
    fn deterministic_per_seed() {
        let a = sample_mesh(&square(Level::Leaf), 0.05, 11).unwrap();
        let b = sample_mesh(&square(Level::Leaf), 0.05, 11).unwrap();
        let c = sample_mesh(&square(Level::Leaf), 0.05, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn zero_area_mesh_is_degenerate() {
        let mut m = TriangleMesh {
            vertices: vec![[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]],
            ..Default::default()
        };
        m.push_face([0, 1, 2], Level::Trunk, 0);
        assert!(matches!(sample_mesh(&m, 0.1, 0), Err(Error::DegenerateMesh(_))));
        assert!(matches!(
            sample_mesh(&TriangleMesh::default(), 0.1, 0),
            Err(Error::DegenerateMesh(_))
        ));
    }

    #[test]
    fn zero_area_faces_are_skipped() {
        let mut m = square(Level::Trunk);
        m.vertices.push([5.0, 5.0, 5.0]);
        m.push_face([4, 4, 4], Level::Leaf, 1);
        let c = sample_mesh(&m, 0.1, 0).unwrap();
        assert!(c.points.iter().all(|p| p.level == Level::Trunk));
    }
}
