use std::path::PathBuf;

use dvpool::io::{
    feature_maps_from_npy, feature_maps_to_npy, labels_from_npy, parse_labels_csv, read_labels, read_npy,
    read_npy_file, write_npy, NpyArray,
};
use dvpool::FeatureMap;
use proptest::prelude::*;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn shape() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0usize..5, 0..=5)
}

proptest! {
    #[test]
    fn f8_round_trip(s in shape(), seed in any::<u64>()) {
        let len: usize = s.iter().product();
        let data: Vec<f64> = (0..len as u64).map(|i| f64::from_bits(seed.wrapping_mul(i + 1) >> 2)).collect();
        let a = NpyArray::f8(s.clone(), data).unwrap();
        let bytes = write_npy(&a);
        let header_len = bytes.len() - len * 8;
        prop_assert_eq!(header_len % 64, 0);
        prop_assert_eq!(bytes[header_len - 1], b'\n');
        let back = read_npy(&bytes).unwrap();
        prop_assert_eq!(back.shape(), &s[..]);
        prop_assert_eq!(write_npy(&back), bytes);
    }

    #[test]
    fn f4_and_i8_round_trip(s in shape(), ints in prop::collection::vec(any::<i64>(), 0..625)) {
        let len: usize = s.iter().product();
        prop_assume!(ints.len() >= len);
        let i = NpyArray::i8(s.clone(), ints[..len].to_vec()).unwrap();
        prop_assert_eq!(read_npy(&write_npy(&i)).unwrap(), i);
        let f = NpyArray::f4(s.clone(), ints[..len].iter().map(|&v| v as f32).collect()).unwrap();
        prop_assert_eq!(read_npy(&write_npy(&f)).unwrap(), f);
    }

    #[test]
    fn labels_csv_round_trip(labels in prop::collection::vec(0usize..50, 0..40)) {
        let mut text = String::from("label\n");
        for y in &labels {
            text.push_str(&format!("{y}\n"));
        }
        prop_assert_eq!(parse_labels_csv(&text).unwrap(), labels);
    }
}

#[test]
fn reads_numpy_files_and_rewrites_identical_bytes() {
    for name in ["f4_2x3.npy", "i8_3.npy", "f8_1x2x1x1x1.npy", "f8_scalar.npy", "f8_empty.npy"] {
        let bytes = std::fs::read(fixture(name)).unwrap();
        let a = read_npy(&bytes).unwrap();
        assert_eq!(write_npy(&a), bytes, "{name}");
    }
    let f4 = read_npy_file(&fixture("f4_2x3.npy")).unwrap();
    assert_eq!(f4.shape(), &[2, 3]);
    assert_eq!(f4.to_f64().unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.25]);
    let i8 = read_npy_file(&fixture("i8_3.npy")).unwrap();
    assert!(labels_from_npy(&i8).is_err(), "negative label accepted");
}

#[test]
fn rejects_unsupported_numpy_layouts() {
    let fortran = read_npy_file(&fixture("f8_fortran.npy")).unwrap_err().to_string();
    assert!(fortran.contains("Fortran"), "{fortran}");
    let big = read_npy_file(&fixture("f8_big_endian.npy")).unwrap_err().to_string();
    assert!(big.contains(">f8"), "{big}");
}

#[test]
fn rank5_maps_split_per_sample() {
    let maps = feature_maps_from_npy(&read_npy_file(&fixture("f8_1x2x1x1x1.npy")).unwrap()).unwrap();
    assert_eq!(maps.len(), 1);
    assert_eq!(maps[0].shape(), &[2, 1, 1, 1]);
    assert_eq!(maps[0].spatial_rank(), 3);

    let a = FeatureMap::from_fn(vec![2, 3, 3], |i| i as f64).unwrap();
    let b = FeatureMap::from_fn(vec![2, 3, 3], |i| -(i as f64)).unwrap();
    let stacked = feature_maps_to_npy(&[a.clone(), b.clone()]).unwrap();
    assert_eq!(stacked.shape(), &[2, 2, 3, 3]);
    assert_eq!(feature_maps_from_npy(&stacked).unwrap(), vec![a, b]);
    assert!(feature_maps_from_npy(&read_npy_file(&fixture("i8_3.npy")).unwrap()).is_err());
}

#[test]
fn labels_by_extension() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("y.csv");
    std::fs::write(&csv, "label\n2\n0\n1\n").unwrap();
    assert_eq!(read_labels(&csv).unwrap(), vec![2, 0, 1]);
    let npy = dir.path().join("y.npy");
    std::fs::write(&npy, write_npy(&NpyArray::i8(vec![3], vec![2, 0, 1]).unwrap())).unwrap();
    assert_eq!(read_labels(&npy).unwrap(), vec![2, 0, 1]);
    std::fs::write(dir.path().join("y.txt"), "2\n").unwrap();
    assert!(read_labels(&dir.path().join("y.txt")).is_err());
}
