use std::sync::Arc;

use kare_core::data::{load_csv, preprocess_maxabs, write_csv, CsvOptions, Dataset, DatasetMeta};
use kare_core::faer::Mat;
use proptest::prelude::*;

fn dataset() -> impl Strategy<Value = Dataset> {
    (1usize..20, 1usize..6).prop_flat_map(|(n, d)| {
        (
            prop::collection::vec(prop_oneof![-1e6..1e6f64, -1e-6..1e-6f64, Just(0.0)], n * d),
            prop::collection::vec(-10.0..10.0f64, n),
        )
            .prop_map(move |(xs, y)| {
                Dataset::new(Mat::from_fn(n, d, |i, j| xs[i * d + j]), y, DatasetMeta::default()).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_round_trip_is_exact(ds in dataset()) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        write_csv(&ds, &p).unwrap();
        let back = load_csv(&p, &CsvOptions::new("label")).unwrap();
        prop_assert_eq!(&back.y, &ds.y);
        prop_assert_eq!(&*back.x, &*ds.x);
    }

    #[test]
    fn maxabs_is_idempotent(ds in dataset()) {
        let once = preprocess_maxabs(&ds);
        let twice = preprocess_maxabs(&once);
        for j in 0..ds.dim() {
            let m = (0..ds.len()).map(|i| once.x[(i, j)].abs()).fold(0.0, f64::max);
            prop_assert!(m == 0.0 || (m - 1.0).abs() <= 1e-15);
            for i in 0..ds.len() {
                prop_assert!((twice.x[(i, j)] - once.x[(i, j)]).abs() <= 1e-15);
            }
        }
        prop_assert!(Arc::ptr_eq(&ds.x, &ds.clone().x));
    }
}
