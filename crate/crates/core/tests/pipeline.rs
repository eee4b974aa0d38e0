mod common;

use std::fs;

use common::*;
use imgclust_core::pipeline::{
    extract_features, ASSIGNMENTS_FILE, FEATURES_FILE, METADATA_FILE, REPORT_FILE,
};
use imgclust_core::*;

#[test]
fn jpeg_keeps_benchmark_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("0.jpg");
    let img = image::RgbImage::from_fn(384, 256, |x, y| {
        image::Rgb([(x % 256) as u8, (y % 256) as u8, 90])
    });
    img.save(&path).unwrap();
    let decoded = load_image(&path).unwrap();
    assert_eq!((decoded.height(), decoded.width()), (256, 384));
}

#[test]
fn png_is_lossless_and_grayscale_expands() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.png");
    let img = image::RgbImage::from_fn(3, 2, |x, y| image::Rgb([x as u8 * 10, y as u8 * 20, 7]));
    img.save(&path).unwrap();
    let decoded = load_image(&path).unwrap();
    assert_eq!(decoded.pixel(1, 2), [20, 20, 7]);

    let gray_path = dir.path().join("g.png");
    image::GrayImage::from_pixel(2, 2, image::Luma([77]))
        .save(&gray_path)
        .unwrap();
    assert_eq!(load_image(&gray_path).unwrap().pixels(), &[[77, 77, 77]; 4]);
}

#[test]
fn ppm_file_matches_decoder_and_bad_files_error() {
    let dir = tempfile::tempdir().unwrap();
    let img = RgbImage::new(2, 1, vec![[1, 2, 3], [4, 5, 6]]).unwrap();
    let path = dir.path().join("x.ppm");
    write_ppm(&path, &img);
    assert_eq!(
        load_image(&path).unwrap(),
        decode_ppm(&fs::read(&path).unwrap()).unwrap()
    );

    let junk = dir.path().join("junk.jpg");
    fs::write(&junk, b"not an image").unwrap();
    assert!(matches!(
        load_image(&junk),
        Err(Error::UnsupportedFormat(_))
    ));

    let truncated = dir.path().join("t.ppm");
    fs::write(&truncated, b"P6 2 2 255\n\x01\x02").unwrap();
    let err = load_image(&truncated).unwrap_err();
    assert!(matches!(
        err,
        Error::Decode {
            source: DecodeError::Truncated { .. },
            ..
        }
    ));
    assert!(err.to_string().contains("t.ppm"));
}

#[test]
fn constant_corpus_both_methods_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    constant_corpus(&corpus, 10, 5);
    for method in [Method::Moments, Method::Btc] {
        let mut cfg = PipelineConfig::new(&corpus, dir.path().join(method.as_str()));
        cfg.method = method;
        let out = run_pipeline(&cfg).unwrap();
        assert!(out
            .report
            .per_class
            .values()
            .all(|s| s.recall == 100.0 && s.precision == 100.0));
        assert_eq!(out.report.macro_precision, 100.0);
        // every constant image gives [c,0,0] per triple
        for row in &out.table.rows {
            for triple in row.values.chunks(3) {
                assert_eq!(&triple[1..], &[0.0, 0.0]);
            }
        }

        let features = read_features(cfg.out_dir.join(FEATURES_FILE)).unwrap();
        assert_eq!(features, out.table);
        let assignments = read_assignments(cfg.out_dir.join(ASSIGNMENTS_FILE)).unwrap();
        assert_eq!(assignments.len(), 50);
        assert_eq!(assignments, out.assignments);
        let report = fs::read_to_string(cfg.out_dir.join(REPORT_FILE)).unwrap();
        assert_eq!(report.lines().count(), 11);
        assert!(report
            .lines()
            .skip(1)
            .all(|l| l.contains(",100.00,100.00,5,5")));
        let meta = fs::read_to_string(cfg.out_dir.join(METADATA_FILE)).unwrap();
        for key in [
            "version=",
            "method=",
            "k=10",
            "seed=0",
            "init=kmeanspp",
            "max_iter=100",
            "normalize=false",
        ] {
            assert!(meta.contains(key), "{key} missing from {meta}");
        }
    }
}

#[test]
fn wang_numeric_corpus() {
    let dir = tempfile::tempdir().unwrap();
    for n in [5usize, 150, 432, 488, 999] {
        let color = CLASS_COLORS[n / 100];
        write_ppm(
            &dir.path().join(format!("{n}.ppm")),
            &RgbImage::filled(4, 6, color).unwrap(),
        );
    }
    let manifest = ingest(dir.path(), Labeling::WangNumeric).unwrap();
    let labels: Vec<_> = manifest
        .entries
        .iter()
        .map(|e| e.label.as_deref().unwrap())
        .collect();
    assert_eq!(
        labels,
        vec![
            "Beaches",
            "Dinosaurs",
            "Dinosaurs",
            "African People and villages",
            "Food"
        ]
    );
    let mut cfg = PipelineConfig::new(dir.path(), dir.path().join("out"));
    cfg.labeling = Labeling::WangNumeric;
    cfg.kmeans = KMeansConfig::new(4, 1);
    let out = run_pipeline(&cfg).unwrap();
    assert_eq!(out.report.per_class["Dinosaurs"].relevant_retrieved, 2);
    let report = fs::read_to_string(dir.path().join("out").join(REPORT_FILE)).unwrap();
    let order: Vec<&str> = report
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(
        order,
        vec![
            "African People and villages",
            "Beaches",
            "Dinosaurs",
            "Food"
        ]
    );
}

#[test]
fn normalization_keeps_rows() {
    let dir = tempfile::tempdir().unwrap();
    noisy_corpus(dir.path(), 3, 6, 11);
    let manifest = ingest(dir.path(), Labeling::Subdirs).unwrap();
    let raw = extract_features(&manifest, Method::Btc, false).unwrap();
    let norm = extract_features(&manifest, Method::Btc, true).unwrap();
    assert_eq!(raw.len(), norm.len());
    for (a, b) in raw.rows.iter().zip(&norm.rows) {
        assert_eq!((&a.image_id, &a.label), (&b.image_id, &b.label));
    }
    assert_ne!(raw, norm);
    let n = norm.len() as f64;
    for d in 0..18 {
        let mean = norm.rows.iter().map(|r| r.values[d]).sum::<f64>() / n;
        assert!(mean.abs() < 1e-9);
    }
}

#[test]
fn unlabeled_corpus_clusters_but_does_not_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("flat");
    for (i, c) in CLASS_COLORS.iter().take(4).enumerate() {
        write_ppm(
            &corpus.join(format!("{i}.ppm")),
            &RgbImage::filled(3, 3, *c).unwrap(),
        );
    }
    let mut cfg = PipelineConfig::new(&corpus, dir.path().join("out"));
    cfg.labeling = Labeling::Unlabeled;
    cfg.kmeans = KMeansConfig::new(2, 0);
    let err = run_pipeline(&cfg).unwrap_err();
    assert!(err.to_string().starts_with("evaluate stage"), "{err}");
    assert_eq!(err.exit_code(), 1);
    assert_eq!(
        read_features(cfg.out_dir.join(FEATURES_FILE))
            .unwrap()
            .len(),
        4
    );
    assert_eq!(
        read_assignments(cfg.out_dir.join(ASSIGNMENTS_FILE))
            .unwrap()
            .len(),
        4
    );
    assert!(!cfg.out_dir.join(REPORT_FILE).exists());
}

#[test]
fn stage_errors_are_tagged() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig::new(dir.path().join("missing"), dir.path().join("out"));
    let err = run_pipeline(&cfg).unwrap_err();
    assert!(err.to_string().starts_with("ingest stage"), "{err}");

    constant_corpus(&dir.path().join("small"), 2, 2);
    let mut cfg = PipelineConfig::new(dir.path().join("small"), dir.path().join("out"));
    cfg.kmeans = KMeansConfig::new(10, 0);
    let err = run_pipeline(&cfg).unwrap_err();
    assert!(err.to_string().starts_with("cluster stage"), "{err}");
}

#[test]
fn config_file_paths_are_relative_to_the_file() {
    let dir = tempfile::tempdir().unwrap();
    constant_corpus(&dir.path().join("data"), 3, 2);
    let cfg_path = dir.path().join("run.conf");
    fs::write(
        &cfg_path,
        "input=data\nout=results\nmethod=moments\nk=3\nseed=4\n",
    )
    .unwrap();
    let cfg = PipelineConfig::load(&cfg_path).unwrap();
    let out = run_pipeline(&cfg).unwrap();
    assert_eq!(out.report.macro_recall, 100.0);
    assert!(dir.path().join("results").join(REPORT_FILE).exists());
}
