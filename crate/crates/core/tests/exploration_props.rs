use proptest::prelude::*;
use sensorimotor_core::env::{Scene, SetupKind};
use sensorimotor_core::exploration::dataset::{Dataset, NORM_BOUND};
use sensorimotor_core::exploration::{generate, generate_logged, ExplorationKind, MMT_PERIOD};
use sensorimotor_core::rng::Rng;
use sensorimotor_core::Error;

fn data(setup: SetupKind, kind: ExplorationKind, n: usize, seed: u64) -> Dataset {
    let scene = Scene::random(setup, &mut Rng::new(seed)).unwrap();
    generate(&scene, kind, n, seed, &mut Rng::new(seed + 1000)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn normalization_hits_bounds_and_inverts(seed in 0u64..10_000, kind_idx in 0usize..3, arm in any::<bool>()) {
        let setup = if arm { SetupKind::ArmDistance } else { SetupKind::GridWorld };
        let raw = data(setup, ExplorationKind::ALL[kind_idx], 300, seed);
        let norm = raw.normalize().unwrap();
        let n = norm.norm().unwrap();
        let (nm, ns) = (raw.motor_dim(), raw.sensory_dim());
        let mut lo = vec![f64::INFINITY; nm + ns];
        let mut hi = vec![f64::NEG_INFINITY; nm + ns];
        for (r, t) in raw.iter().zip(norm.iter()) {
            for (k, (&x, &y)) in t.m_t.iter().chain(&t.m_next).zip(r.m_t.iter().chain(&r.m_next)).enumerate() {
                let k = k % nm;
                prop_assert!(x.abs() <= NORM_BOUND + 1e-12);
                prop_assert!((n.motor[k].invert(x) - y).abs() <= 1e-9 * y.abs().max(1.0));
                lo[k] = lo[k].min(x);
                hi[k] = hi[k].max(x);
            }
            for (k, (&x, &y)) in t.s_t.iter().chain(&t.s_next).zip(r.s_t.iter().chain(&r.s_next)).enumerate() {
                let k = k % ns;
                prop_assert!(x.abs() <= NORM_BOUND + 1e-12);
                prop_assert!((n.sensory[k].invert(x) - y).abs() <= 1e-9 * y.abs().max(1.0));
                lo[nm + k] = lo[nm + k].min(x);
                hi[nm + k] = hi[nm + k].max(x);
            }
        }
        for k in 0..nm + ns {
            prop_assert!((lo[k] + NORM_BOUND).abs() < 1e-12 && (hi[k] - NORM_BOUND).abs() < 1e-12);
        }
    }

    #[test]
    fn mmt_translates_every_hundred_attempts(seed in 0u64..10_000) {
        let scene = Scene::random(SetupKind::ArmDistance, &mut Rng::new(seed)).unwrap();
        let (d, log) = generate_logged(&scene, ExplorationKind::Mmt, 500, seed, &mut Rng::new(seed + 1)).unwrap();
        let p = d.provenance();
        prop_assert_eq!(p.translations, p.attempted / MMT_PERIOD);
        prop_assert_eq!(p.attempted, p.discarded + d.len() as u64);
        prop_assert!(log.valid_per_placement.iter().all(|&c| c <= MMT_PERIOD));
        prop_assert_eq!(log.valid_per_placement.iter().sum::<u64>(), d.len() as u64);
    }
}

#[test]
fn regimes_are_separated_in_the_log() {
    let scene = Scene::random(SetupKind::GridWorld, &mut Rng::new(4)).unwrap();
    let n = 1000;
    let gen = |kind| generate_logged(&scene, kind, n, 4, &mut Rng::new(5)).unwrap();

    let (mm, log) = gen(ExplorationKind::Mm);
    assert_eq!(log.placements.len(), 1);
    assert!(log.transition_placements.iter().all(|&[a, b]| a == 0 && b == 0));
    assert_eq!(mm.provenance().translations, 0);

    let (_, log) = gen(ExplorationKind::Mtm);
    assert!(log.transition_placements.iter().all(|&[a, b]| b == a + 1));
    assert_eq!(log.placements.len(), n + 1);

    let (mmt, log) = gen(ExplorationKind::Mmt);
    assert!(log.transition_placements.iter().all(|&[a, b]| a == b));
    // the translation after the final attempt leaves one unused placement
    assert_eq!(log.placements.len(), n / MMT_PERIOD as usize + 1);
    assert_eq!(log.valid_per_placement.last(), Some(&0));
    assert!(log.valid_per_placement[..n / MMT_PERIOD as usize].iter().all(|&c| c == MMT_PERIOD));
    // every recorded sensation is what its placement produces
    for (t, [a, b]) in mmt.iter().zip(&log.transition_placements) {
        let m_t: [f64; 3] = t.m_t.clone().try_into().unwrap();
        let m_n: [f64; 3] = t.m_next.clone().try_into().unwrap();
        assert_eq!(log.placements[*a].sense(&m_t).unwrap().unwrap(), t.s_t);
        assert_eq!(log.placements[*b].sense(&m_n).unwrap().unwrap(), t.s_next);
    }
}

#[test]
fn grid_data_has_no_discards_and_arm_data_does() {
    let g = data(SetupKind::GridWorld, ExplorationKind::Mm, 1000, 1);
    assert_eq!(g.len(), 1000);
    assert_eq!(g.provenance().discarded, 0);
    let a = data(SetupKind::ArmDistance, ExplorationKind::Mmt, 1000, 1);
    assert_eq!(a.len(), 1000);
    assert!(a.provenance().discarded > 0);
}

#[test]
fn generation_is_deterministic() {
    let a = data(SetupKind::ArmRgb, ExplorationKind::Mtm, 200, 9);
    let b = data(SetupKind::ArmRgb, ExplorationKind::Mtm, 200, 9);
    assert_eq!(a, b);
    assert_eq!(a.sensory_dim(), 48);
}

#[test]
fn save_load_roundtrip_and_size() {
    let raw = data(SetupKind::ArmDistance, ExplorationKind::Mmt, 250, 2);
    let norm = raw.normalize().unwrap();
    let dir = tempfile::tempdir().unwrap();
    for (name, d) in [("raw.smds", &raw), ("norm.smds", &norm)] {
        let path = dir.path().join(name);
        d.save(&path).unwrap();
        assert_eq!(&Dataset::load(&path).unwrap(), d);
        // payload is 2·(N_m + N_s) little-endian f64 per transition
        let size = std::fs::metadata(&path).unwrap().len() as usize;
        assert!(size > 250 * 2 * (3 + 10) * 8);
        let bytes = std::fs::read(&path).unwrap();
        let hlen = u64::from_le_bytes(bytes[4..12].try_into().unwrap()) as usize;
        assert_eq!(size, 12 + hlen + 250 * 2 * 13 * 8);
    }
    assert!(raw.normalize().unwrap().normalize().is_err());
}

#[test]
fn load_rejects_bad_files() {
    let raw = data(SetupKind::GridWorld, ExplorationKind::Mm, 10, 3);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.smds");
    raw.save(&path).unwrap();
    let bytes = std::fs::read(&path).unwrap();

    let key = b"\"schema_version\":1";
    let at = bytes.windows(key.len()).position(|w| w == key).unwrap();
    let mut bumped = bytes.clone();
    bumped[at + key.len() - 1] = b'2';
    std::fs::write(&path, &bumped).unwrap();
    assert!(matches!(Dataset::load(&path), Err(Error::Version { found: 2, .. })));

    std::fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
    assert!(matches!(Dataset::load(&path), Err(Error::Format { .. })));
    std::fs::write(&path, b"nope").unwrap();
    assert!(matches!(Dataset::load(&path), Err(Error::Format { .. })));
}

#[test]
fn csv_export() {
    let d = data(SetupKind::GridWorld, ExplorationKind::Mm, 5, 0);
    let mut out = Vec::new();
    d.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[0].starts_with("m_t_0,m_t_1,m_t_2,s_t_0,"));
    assert!(lines[0].ends_with("s_next_3"));
    assert_eq!(lines[1].split(',').count(), 14);
    let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[..3], d.transition(0).m_t[..]);
}

#[test]
fn minibatches_draw_existing_records() {
    let d = data(SetupKind::GridWorld, ExplorationKind::Mm, 50, 6);
    let b = d.minibatch(&mut Rng::new(0), 100).unwrap();
    assert_eq!(b.len(), 100);
    let all = d.all();
    for r in 0..b.len() {
        assert!((0..d.len()).any(|i| all.m_t.row(i) == b.m_t.row(r) && all.s_next.row(i) == b.s_next.row(r)));
    }
    assert!(matches!(
        generate(&Scene::random(SetupKind::GridWorld, &mut Rng::new(0)).unwrap(), ExplorationKind::Mm, 0, 0, &mut Rng::new(0)),
        Err(Error::Config(_))
    ));
}
