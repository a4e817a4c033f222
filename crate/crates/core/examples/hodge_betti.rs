//! First Betti number from the kernel of the Hodge Laplacian on 1-forms,
//! absolute and relative, against 2g+k−1.
//!
//!     cargo run --release --example hodge_betti

use fbms_lab::hodge::{betti_one, BoundaryCondition};
use fbms_lab::linalg::EigenOptions;
use fbms_lab::mesh::build_topology;
use fbms_lab::surfaces::{make_surface, SurfaceKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = EigenOptions::default();
    println!("  g  k  2g+k-1  absolute  relative  gap ratio");
    for (genus, boundaries) in [(0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (2, 1)] {
        let (mesh, _) = make_surface(SurfaceKind::Synthetic { genus, boundaries }, 6)?;
        let topo = build_topology(&mesh)?;
        assert_eq!((topo.genus, topo.boundary_components), (genus, boundaries));
        let abs = betti_one(&mesh, BoundaryCondition::Absolute, &opts)?;
        let rel = betti_one(&mesh, BoundaryCondition::Relative, &opts)?;
        println!(
            "  {genus}  {boundaries}  {:6}  {:8}  {:8}  {:.1e}",
            2 * genus + boundaries - 1,
            abs.betti,
            rel.betti,
            abs.gap_ratio.min(rel.gap_ratio)
        );
    }
    Ok(())
}
