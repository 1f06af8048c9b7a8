use dvpool::metrics::accuracy;
use dvpool::{
    dvpp_batch, probe, synth, DvppConfig, FeatureMap, PredictionSet, SynthDataset, SynthSpec, TrainSpec, Variant,
};
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn features(maps: &[FeatureMap], cfg: &DvppConfig) -> Array2<f64> {
    let rows = dvpp_batch(maps, cfg).unwrap();
    let d = rows[0].len();
    Array2::from_shape_vec((rows.len(), d), rows.into_iter().flat_map(|r| r.into_data()).collect()).unwrap()
}

fn test_accuracy(ds: &SynthDataset, cfg: &DvppConfig, spec: &TrainSpec) -> f64 {
    let (train_maps, train_y) = ds.train();
    let (test_maps, test_y) = ds.test();
    let trained = probe::train(features(&train_maps, cfg).view(), &train_y, spec).unwrap();
    let h = &trained.loss_history;
    assert!(h[h.len() - 1] < h[0]);
    let probs = trained.probe.predict_proba(features(&test_maps, cfg).view()).unwrap();
    accuracy(&PredictionSet::new(probs, test_y).unwrap())
}

fn gap() -> DvppConfig {
    DvppConfig::avg(Variant::SpOnly, &[1], &[], &[]).unwrap()
}

fn cap() -> DvppConfig {
    DvppConfig::avg(Variant::CcpOnly, &[], &[1], &[]).unwrap()
}

#[test]
fn dual_view_beats_single_views_on_other_seeds() {
    let spec = TrainSpec { epochs: 100, ..TrainSpec::with_seed(1) };
    for seed in [3, 11] {
        let ds = synth::generate(&SynthSpec { seed, ..SynthSpec::default() }).unwrap();
        let par = test_accuracy(&ds, &DvppConfig::avg(Variant::ScPar, &[1], &[3], &[]).unwrap(), &spec);
        let twins = test_accuracy(&ds, &DvppConfig::avg(Variant::Twins, &[1, 2], &[2], &[]).unwrap(), &spec);
        let g = test_accuracy(&ds, &gap(), &spec);
        let c = test_accuracy(&ds, &cap(), &spec);
        assert!(par >= 0.95 && twins >= 0.95, "seed {seed}: par {par}, twins {twins}");
        assert!(g <= 0.6 && c <= 0.6, "seed {seed}: gap {g}, cap {c}");
    }
}

#[test]
fn noiseless_views_collide_exactly() {
    let spec = SynthSpec { noise: 0.0, samples_per_class: 2, classes: 6, seed: 4, ..SynthSpec::default() };
    let ds = synth::generate(&spec).unwrap();
    let g = features(&ds.maps, &gap());
    let c = features(&ds.maps, &cap());
    let per = spec.samples_per_class;
    for a in 0..ds.maps.len() {
        for b in 0..ds.maps.len() {
            let (ka, kb) = (a / per, b / per);
            assert_eq!(g.row(a) == g.row(b), ka / 2 == kb / 2, "GAP {ka} vs {kb}");
            assert_eq!(c.row(a) == c.row(b), ka % 2 == kb % 2, "CAP {ka} vs {kb}");
        }
    }
}

#[test]
fn channel_shuffle_leaves_cap_unchanged() {
    let ds = synth::generate(&SynthSpec { samples_per_class: 5, seed: 9, ..SynthSpec::default() }).unwrap();
    let mut order: Vec<usize> = (0..16).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(1));
    let shuffled: Vec<FeatureMap> = ds
        .maps
        .iter()
        .map(|m| {
            FeatureMap::new(m.shape().to_vec(), order.iter().flat_map(|&c| m.channel(c).to_vec()).collect()).unwrap()
        })
        .collect();
    let (a, b) = (features(&ds.maps, &cap()), features(&shuffled, &cap()));
    let worst = a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-12, "{worst}");
    let (ga, gb) = (features(&ds.maps, &gap()), features(&shuffled, &gap()));
    for (i, &c) in order.iter().enumerate() {
        assert_eq!(gb.column(i), ga.column(c));
    }
}

#[test]
fn manifest_regenerates_dataset() {
    let ds =
        synth::generate(&SynthSpec { samples_per_class: 7, seed: 21, spatial: vec![2, 3, 3], ..SynthSpec::default() })
            .unwrap();
    let json = serde_json::to_string(&ds.manifest).unwrap();
    let manifest: dvpool::SynthManifest = serde_json::from_str(&json).unwrap();
    let again = synth::generate(&manifest.spec).unwrap();
    assert_eq!(again.maps, ds.maps);
    assert_eq!(again.manifest, manifest);
    assert_eq!(ds.maps[0].spatial_rank(), 3);
}

#[test]
fn probe_rerun_is_identical() {
    let ds = synth::generate(&SynthSpec { samples_per_class: 20, ..SynthSpec::default() }).unwrap();
    let (maps, y) = ds.train();
    let x = features(&maps, &DvppConfig::representative_c_ser());
    let spec = TrainSpec { epochs: 30, ..TrainSpec::with_seed(5) };
    let a = probe::train(x.view(), &y, &spec).unwrap();
    let b = probe::train(x.view(), &y, &spec).unwrap();
    assert_eq!(a.probe, b.probe);
    assert_eq!(a.loss_history, b.loss_history);
    let c = probe::train(x.view(), &y, &TrainSpec { seed: 6, ..spec }).unwrap();
    assert_ne!(a.probe, c.probe);
}
