use proptest::prelude::*;
use wgtransport_core::mesh::{
    check_mesh_condition, classify_faces, format_mesh, read_mesh, write_mesh, ReadOptions,
};
use wgtransport_core::{MeshFamily, PolygonalMesh, Vec2};

fn check_tiling(mesh: &PolygonalMesh, area: f64) {
    let total: f64 = mesh.elements().iter().map(|e| e.area).sum();
    assert!((total - area).abs() < 1e-12);
    for (e, el) in mesh.elements().iter().enumerate() {
        let pts = mesh.element_points(e);
        let perimeter: f64 = (0..pts.len()).map(|i| (pts[(i + 1) % pts.len()] - pts[i]).norm()).sum();
        let faces: f64 = el.interface_ids.iter().map(|&i| mesh.interface(i).length).sum();
        assert!((faces - perimeter).abs() <= 1e-12 * perimeter, "element {e}");
        for &i in &el.interface_ids {
            let f = mesh.interface(i);
            assert!(f.left == e || f.right == Some(e));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generated_meshes_tile_their_domain(level in 1usize..4, seed in 0u64..1000) {
        check_tiling(&MeshFamily::Tri.build(level, seed).unwrap(), 1.0);
        check_tiling(&MeshFamily::Poly.build(level, seed).unwrap(), 1.0);
        check_tiling(&MeshFamily::Slit.build(level, seed).unwrap(), 4.0);
    }

    #[test]
    fn files_round_trip(level in 1usize..3, seed in 0u64..50) {
        for family in [MeshFamily::Tri, MeshFamily::Poly, MeshFamily::Slit] {
            let mesh = family.build(level, seed).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("m.txt");
            write_mesh(&path, &mesh).unwrap();
            let back = read_mesh(&path, ReadOptions { strict: true }).unwrap();
            prop_assert_eq!(format_mesh(&back), format_mesh(&mesh));
        }
    }
}

#[test]
fn mesh_condition_examples() {
    let tri = MeshFamily::Tri.build(2, 0).unwrap();
    let c = classify_faces(&tri, &|_| Vec2::new(1.0, 0.0), 5).unwrap();
    assert!(check_mesh_condition(&tri, &c).satisfied);

    let quads = MeshFamily::Poly.build(3, 0).unwrap();
    let c = classify_faces(&quads, &|_| Vec2::new(1.0, 1.0), 5).unwrap();
    let report = check_mesh_condition(&quads, &c);
    assert!(!report.satisfied);
    assert_eq!(report.violating_elements.len(), quads.num_elements());

    let c = classify_faces(&quads, &|_| Vec2::zeros(), 5).unwrap();
    assert!(check_mesh_condition(&quads, &c).satisfied);
}
