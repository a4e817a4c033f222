//! Generates meshes, checks their topology, and round-trips them through
//! OFF; also dumps the disk Jacobi operator pair as MatrixMarket.
//!
//!     cargo run --release --example mesh_io -- out_dir

use fbms_lab::geometry::BodyModel;
use fbms_lab::jacobi::assemble_jacobi;
use fbms_lab::mesh::{build_topology, read_off, validate_mesh, write_off};
use fbms_lab::sparse::write_matrix_market;
use fbms_lab::surfaces::{refined_surface, SurfaceKind};
use fbms_lab::verify::Discretization;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::path::PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "mesh_out".into()));
    std::fs::create_dir_all(&dir)?;
    for kind in [SurfaceKind::Disk, SurfaceKind::Catenoid, SurfaceKind::Synthetic { genus: 2, boundaries: 1 }] {
        let (mesh, _) = refined_surface(kind, 6, 1)?;
        let topo = build_topology(&mesh)?;
        let diag = validate_mesh(&mesh);
        let path = dir.join(format!("{}.off", kind.label()));
        write_off(&mesh, std::fs::File::create(&path)?)?;
        let back = read_off(std::io::BufReader::new(std::fs::File::open(&path)?))?;
        println!(
            "{:22} V={:5} E={:5} F={:5} chi={:3} g={} k={} valid={} round-trip={}",
            kind.label(),
            topo.v_count,
            topo.e_count,
            topo.f_count,
            topo.euler_char,
            topo.genus,
            topo.boundary_components,
            diag.is_valid(),
            back.triangles() == mesh.triangles()
        );
    }
    let d = Discretization::new(SurfaceKind::Disk, 4, 0)?;
    let j = assemble_jacobi(&d.mesh, &d.shape, BodyModel::unit_ball())?;
    write_matrix_market(&j.pair.a, std::fs::File::create(dir.join("disk_jacobi_A.mtx"))?)?;
    write_matrix_market(&j.pair.b, std::fs::File::create(dir.join("disk_jacobi_B.mtx"))?)?;
    println!("wrote {}", dir.display());
    Ok(())
}
