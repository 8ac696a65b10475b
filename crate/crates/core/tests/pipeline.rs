use karyoseg::classify::{argmax_assign, distribute, expected_counts, GeometricScoreProvider, ScoreProvider};
use karyoseg::imgcore::{decode_image, encode_png};
use karyoseg::overlap::classify_crop;
use karyoseg::segmentation::extract_objects;
use karyoseg::synth::{generate, SynthSpec};
use karyoseg::watershed::{separate, BaselineGapFiller, Method};
use karyoseg::{CropKind, PipelineConfig, ScoreMatrix};

#[test]
fn overlap_karyotype_end_to_end() {
    let config = PipelineConfig::default();
    let gt = generate(&SynthSpec::karyotype_with_overlap(4, 23, 50.0)).unwrap();
    let png = encode_png(&gt.metaphase).unwrap();
    assert_eq!(decode_image(&png).unwrap(), gt.metaphase);

    let mut crops = extract_objects(&gt.metaphase, &config).unwrap();
    assert_eq!(crops.len(), 45);
    for c in &mut crops {
        classify_crop(c, &config).unwrap();
    }
    let suspects: Vec<usize> = (0..crops.len()).filter(|&i| crops[i].kind == CropKind::SuspectMulti).collect();
    assert_eq!(suspects.len(), 1);
    let crop = crops.remove(suspects[0]);

    let seeds = gt.overlap_seeds(&gt.crossings[0], crop.offset, Method::SharedIntersection);
    let parts = separate(&crop, &seeds, &BaselineGapFiller).unwrap();
    assert_eq!(parts.len(), 2);
    assert!(parts[0].mask.intersection(&parts[1].mask).count() > 0);

    let provider = GeometricScoreProvider::new(config.classes).unwrap();
    let mut rows = Vec::new();
    for c in &crops {
        rows.push((c.id.clone(), provider.score(&c.id, &c.image).unwrap()));
    }
    for p in &parts {
        rows.push((p.id.clone(), provider.score(&p.id, &p.image).unwrap()));
    }
    let m = ScoreMatrix::new(config.classes, rows).unwrap();
    assert_eq!(m.len(), 46);
    let expected = expected_counts(m.len(), config.classes).unwrap();
    let report = distribute(&m, &argmax_assign(&m), &expected).unwrap();
    assert!(report.is_exact());
    assert_eq!(report.assignment.counts(config.classes), vec![2; 23]);
}

#[test]
fn generation_and_extraction_are_deterministic() {
    let spec = SynthSpec::karyotype(12, 23);
    let (a, b) = (generate(&spec).unwrap(), generate(&spec).unwrap());
    assert_eq!(a.metaphase, b.metaphase);
    let config = PipelineConfig::default();
    let (ca, cb) = (extract_objects(&a.metaphase, &config).unwrap(), extract_objects(&b.metaphase, &config).unwrap());
    assert_eq!(ca, cb);
}

#[test]
fn config_round_trips_through_json() {
    let config = PipelineConfig { merge_radius: 70.0, ..PipelineConfig::default() };
    let text = serde_json::to_string(&config).unwrap();
    let back: PipelineConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, config);
    back.validate().unwrap();
    let bad: PipelineConfig = serde_json::from_str(&text.replace("\"median_window\":3", "\"median_window\":4")).unwrap();
    assert!(bad.validate().is_err());
}
