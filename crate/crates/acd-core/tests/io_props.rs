//! Round-trip invariants for the file formats.

use acd_core::geometry::{Point3, PointCloud};
use acd_core::io::{
    read_grid_rle, read_labeled_xyz, read_pairs_csv, read_ply, read_xyz, write_grid_rle,
    write_labeled_xyz, write_pairs_csv, write_ply, write_xyz,
};
use acd_core::label::LabeledPointCloud;
use acd_core::selfsup::PairBatch;
use acd_core::voxel::{GridFrame, VoxelGrid};
use proptest::prelude::*;

fn arb_cloud() -> impl Strategy<Value = PointCloud> {
    prop::collection::vec(
        (-1e6f64..1e6, -1e6f64..1e6, -1e6f64..1e6).prop_map(|(x, y, z)| Point3::new(x, y, z)),
        1..40,
    )
    .prop_map(PointCloud::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn xyz_and_ply_roundtrip_exactly(cloud in arb_cloud(), labels_seed in 0usize..100) {
        let dir = tempfile::tempdir().unwrap();

        let xyz = dir.path().join("c.xyz");
        write_xyz(&xyz, &cloud).unwrap();
        prop_assert_eq!(&read_xyz(&xyz).unwrap(), &cloud);

        let labels: Vec<usize> = (0..cloud.len()).map(|i| (i * 31 + labels_seed) % 7).collect();
        let ply = dir.path().join("c.ply");
        write_ply(&ply, &cloud, Some(&labels)).unwrap();
        let (back, back_labels) = read_ply(&ply).unwrap();
        prop_assert_eq!(&back, &cloud);
        prop_assert_eq!(back_labels.unwrap(), labels.clone());

        let lab = dir.path().join("c.txt");
        let labeled = LabeledPointCloud { cloud: cloud.clone(), labels };
        write_labeled_xyz(&lab, &labeled).unwrap();
        prop_assert_eq!(read_labeled_xyz(&lab).unwrap(), labeled);
    }

    #[test]
    fn grid_rle_roundtrip_random_occupancy(seed in 0u64..200) {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let frame = GridFrame {
            resolution: 2 + (seed as usize % 7),
            origin: Point3::new(rng.gen(), rng.gen(), rng.gen()),
            cell_size: 0.01 + rng.gen::<f64>(),
        };
        let mut grid = VoxelGrid::new_empty(frame).unwrap();
        for u in 0..frame.cell_count() {
            if rng.gen::<f64>() < 0.4 {
                grid.set_linear(u as u32);
            }
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.cvg");
        write_grid_rle(&path, &grid).unwrap();
        prop_assert_eq!(read_grid_rle(&path).unwrap(), grid);
    }

    #[test]
    fn pairs_csv_roundtrip(pairs in prop::collection::vec((0usize..1000, 0usize..1000, any::<bool>()), 0..50)) {
        let batch = PairBatch::new(pairs);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        write_pairs_csv(&path, &batch).unwrap();
        prop_assert_eq!(read_pairs_csv(&path).unwrap(), batch);
    }
}
