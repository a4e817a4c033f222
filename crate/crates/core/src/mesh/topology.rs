use super::{boundary_loops, validate_mesh, SurfaceMesh};
use crate::error::MeshError;

/// Counts and the (genus, boundary components) classification of a
/// connected orientable surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Topology {
    pub v_count: usize,
    pub e_count: usize,
    pub f_count: usize,
    pub genus: usize,
    pub boundary_components: usize,
    pub euler_char: i64,
}

impl Topology {
    /// First Betti number of the surface with boundary, 2g + k − 1
    /// (2g for a closed surface).
    pub fn first_betti(&self) -> usize {
        if self.boundary_components == 0 {
            2 * self.genus
        } else {
            2 * self.genus + self.boundary_components - 1
        }
    }
}

/// Solves χ = 2 − 2g − k for the genus after validating the mesh.
pub fn build_topology(mesh: &SurfaceMesh) -> Result<Topology, MeshError> {
    let diag = validate_mesh(mesh);
    if !diag.is_valid() {
        return Err(MeshError::Invalid(Box::new(diag)));
    }
    let components = connected_components(mesh);
    if components != 1 {
        return Err(MeshError::Disconnected { components });
    }
    let conn = mesh.connectivity();
    let (v, e, f) = (mesh.vertex_count(), conn.edge_count(), mesh.triangle_count());
    let euler_char = v as i64 - e as i64 + f as i64;
    let k = boundary_loops(mesh)?.len();
    let twice_genus = 2 - euler_char - k as i64;
    if twice_genus < 0 || twice_genus % 2 != 0 {
        return Err(MeshError::InvalidGenus { euler_char, boundary_components: k });
    }
    Ok(Topology {
        v_count: v,
        e_count: e,
        f_count: f,
        genus: (twice_genus / 2) as usize,
        boundary_components: k,
        euler_char,
    })
}

fn connected_components(mesh: &SurfaceMesh) -> usize {
    let mut parent: Vec<usize> = (0..mesh.vertex_count()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for t in mesh.triangles() {
        for (a, b) in [(t[0], t[1]), (t[1], t[2])] {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
            }
        }
    }
    (0..mesh.vertex_count()).filter(|&v| find(&mut parent, v) == v).count()
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::{annulus, square};
    use super::*;

    #[test]
    fn disk_and_annulus() {
        let t = build_topology(&square(3)).unwrap();
        assert_eq!((t.genus, t.boundary_components, t.euler_char), (0, 1, 1));
        let t = build_topology(&annulus(2, 8)).unwrap();
        assert_eq!((t.genus, t.boundary_components, t.euler_char), (0, 2, 0));
        assert_eq!(t.first_betti(), 1);
    }

    #[test]
    fn two_disjoint_squares_rejected() {
        let a = square(1);
        let mut v = a.vertices().to_vec();
        let mut t = a.triangles().to_vec();
        let off = v.len();
        v.extend(a.vertices().iter().map(|p| p + crate::mesh::Point3::new(5.0, 0.0, 0.0)));
        t.extend(a.triangles().iter().map(|tr| tr.map(|i| i + off)));
        let m = SurfaceMesh::new(v, t).unwrap();
        assert!(matches!(build_topology(&m), Err(MeshError::Disconnected { components: 2 })));
    }
}
