//! Randomized geometry: any admissible interface position must give exact
//! part areas, biorthogonal duals and a transfer that preserves constants.

use nxfem::mesh::{classify_and_cut, InterfaceSet, LevelSet, StructuredMesh, DEFAULT_SNAP_TOL};
use nxfem::space::build_space;
use nxfem::transfer::{assemble_transfer, biorthogonality_defect, build_biorthogonal, transfer_apply, LevelView};
use proptest::prelude::*;

fn interface() -> impl Strategy<Value = LevelSet> {
    prop_oneof![
        (0.02f64..0.98).prop_map(LevelSet::vertical),
        (0.3f64..0.7, 0.3f64..0.7, 0.01f64..0.08).prop_map(|(x, y, r2)| LevelSet::circle([x, y], r2)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cut_geometry_and_transfer(ls in interface(), n in 3usize..9) {
        let set = InterfaceSet::single(ls);
        let coarse_mesh = StructuredMesh::new(n);
        let fine_mesh = StructuredMesh::new(2 * n);
        let decomps = (
            classify_and_cut(&coarse_mesh, &set, DEFAULT_SNAP_TOL),
            classify_and_cut(&fine_mesh, &set, DEFAULT_SNAP_TOL),
        );
        // interfaces through mesh vertices are rejected by design
        let (Ok(cd), Ok(fd)) = decomps else { return Ok(()) };

        for cut in fd.cuts() {
            let area = fine_mesh.area(cut.element);
            prop_assert!((cut.measures[0] + cut.measures[1] - area).abs() <= 1e-14 * area.max(1.0));
        }

        let basis = build_biorthogonal(&fine_mesh, &fd);
        for cut in fd.cuts() {
            let x = fine_mesh.coords(cut.element);
            for (side, &sub) in cut.subdomains.iter().enumerate() {
                if let Some(dual) = basis.coefficients(&fine_mesh, &fd, cut.element, sub) {
                    prop_assert!(biorthogonality_defect(&x, &cut.parts[side], &dual) < 1e-12);
                }
            }
        }

        let (cs, fs) = (build_space(&coarse_mesh, &cd), build_space(&fine_mesh, &fd));
        let coarse = LevelView { mesh: &coarse_mesh, decomp: &cd, space: &cs };
        let fine = LevelView { mesh: &fine_mesh, decomp: &fd, space: &fs };
        let t = assemble_transfer(coarse, fine, &basis).unwrap();
        let ones = transfer_apply(&t, &vec![1.0; t.coarse_dim()]).unwrap();
        for (p, v) in ones.iter().enumerate() {
            if !t.flagged.contains(&p) {
                prop_assert!((v - 1.0).abs() < 1e-12, "row {p}: {v}");
            }
        }
    }
}
