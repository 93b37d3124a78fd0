use ecq_core::config::{ExperimentConfig, ProblemKind};
use ecq_core::problems::{
    gen_classification, gen_regression, gen_sparse_classification, load_libsvm, parse_libsvm,
    read_cache, write_cache, write_libsvm, CsrMatrix, Dataset, SparseClassificationSpec, Task,
};
use ecq_core::sim::{run_experiment, CodecKind};
use ecq_core::Error;
use proptest::prelude::*;

fn sparse_rows() -> impl Strategy<Value = (usize, Vec<Vec<f64>>)> {
    (1usize..30).prop_flat_map(|d| {
        let row = prop::collection::vec(prop_oneof![Just(0.0), -1e6f64..1e6], d);
        (Just(d), prop::collection::vec(row, 1..20))
    })
}

proptest! {
    #[test]
    fn libsvm_round_trip((d, rows) in sparse_rows(), ys in prop::collection::vec(-50.0f64..50.0, 20)) {
        let x = CsrMatrix::from_dense_rows(d, &rows).unwrap();
        let y = ys[..rows.len()].to_vec();
        let ds = Dataset::new(x, y, Task::SquaredLoss).unwrap();
        let mut buf = Vec::new();
        write_libsvm(&ds, &mut buf).unwrap();
        let back = parse_libsvm(buf.as_slice(), Task::SquaredLoss, Some(d)).unwrap();
        prop_assert_eq!(back, ds);
    }

    #[test]
    fn cache_round_trip((d, rows) in sparse_rows(), labels in prop::collection::vec(prop::bool::ANY, 20)) {
        let x = CsrMatrix::from_dense_rows(d, &rows).unwrap();
        let y = labels[..rows.len()].iter().map(|&b| f64::from(u8::from(b))).collect();
        let ds = Dataset::new(x, y, Task::LogLoss).unwrap();
        let mut buf = Vec::new();
        write_cache(&ds, &mut buf).unwrap();
        prop_assert_eq!(read_cache(buf.as_slice()).unwrap(), ds);
    }
}

#[test]
fn libsvm_labels_and_errors() {
    let text = "# comment\n+1 3:0.5 1:2\n-1 2:1e-3\n0\n";
    let ds = parse_libsvm(text.as_bytes(), Task::LogLoss, None).unwrap();
    assert_eq!(ds.dim(), 3);
    assert_eq!(ds.targets(), &[1.0, 0.0, 0.0]);
    assert_eq!(ds.features().row(0), (&[0u32, 2][..], &[2.0, 0.5][..]));

    for (bad, line) in [
        ("1 1:2\n1 0:1\n", 2),
        ("1 2:1 2:3\n", 1),
        ("1 x:1\n", 1),
        ("\n2 1:1\n", 2),
    ] {
        match parse_libsvm(bad.as_bytes(), Task::LogLoss, None) {
            Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{bad:?}"),
            other => panic!("{bad:?}: {other:?}"),
        }
    }
    assert!(parse_libsvm("1 9:1\n".as_bytes(), Task::SquaredLoss, Some(4)).is_err());
}

#[test]
fn generated_datasets_survive_files() {
    let dir = tempfile::tempdir().unwrap();
    let (reg, _) = gen_regression(8, 50, 0.1, 1).unwrap();
    let (cls, _) = gen_classification(8, 50, 1.0, 2).unwrap();
    let (sp, _) = gen_sparse_classification(&SparseClassificationSpec {
        n: 300,
        d: 400,
        nnz_per_row: 10,
        informative: 20,
        ..Default::default()
    })
    .unwrap();
    for (name, ds) in [("reg", reg), ("cls", cls), ("sparse", sp)] {
        let path = dir.path().join(name);
        write_libsvm(&ds, std::fs::File::create(&path).unwrap()).unwrap();
        let back = load_libsvm(&path, ds.task(), Some(ds.dim())).unwrap();
        assert_eq!(back, ds, "{name}");
    }
}

#[test]
fn config_file_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.conf");
    std::fs::write(
        &path,
        "# small run\nproblem.kind = regression\nproblem.d = 6\nproblem.n = 80\n\
         trainer.codec = ecq\ntrainer.iterations = 25\ntrainer.bucket_size = 3\n",
    )
    .unwrap();
    let cfg = ExperimentConfig::load(&path).unwrap();
    assert_eq!(cfg.problem.kind, ProblemKind::Regression);
    assert_eq!(cfg.trainer.codec, CodecKind::Ecq);
    assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);

    let problem = cfg.problem.build().unwrap();
    let log = run_experiment(&cfg.trainer, problem.as_ref()).unwrap();
    assert_eq!(log.rows.len(), 25);
    assert!(log.last().unwrap().dist_sq_to_opt.is_some());
}
