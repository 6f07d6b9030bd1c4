use std::fs;

use bandsel::cube_io::{load_cube, load_ground_truth, write_cube, write_ground_truth, CubeData};
use bandsel::synth::{generate_scene, write_scene, SceneSpec};
use bandsel::{Error, GroundTruthMap, HyperCube};

#[test]
fn u16_cube_round_trip_with_wavelengths() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("scene");
    let data: Vec<u16> = (0..2 * 3 * 4).map(|v| v * 1000).collect();
    let cube = HyperCube::new(2, 3, 4, CubeData::U16(data), Some(vec![450.0, 550.5])).unwrap();
    write_cube(&stem, &cube).unwrap();
    assert_eq!(load_cube(&stem).unwrap(), cube);
    assert_eq!(load_cube(dir.path().join("scene.hsch")).unwrap(), cube);
    assert_eq!(load_cube(dir.path().join("scene.hscd")).unwrap(), cube);
    assert_eq!(cube.value(1, 0), 12000.0);
}

#[test]
fn scene_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("synthetic");
    let scene = generate_scene(&SceneSpec::default()).unwrap();
    write_scene(&stem, &scene).unwrap();
    let cube = load_cube(&stem).unwrap();
    assert_eq!(cube, scene.cube);
    let gt = load_ground_truth(dir.path().join("synthetic.gt"), cube.rows(), cube.cols()).unwrap();
    assert_eq!(gt, scene.gt);
    let truth = fs::read_to_string(dir.path().join("synthetic.truth.json")).unwrap();
    assert!(truth.contains("synergy_pair"));
}

#[test]
fn ground_truth_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.gt");
    let gt = GroundTruthMap::new(2, 2, vec![0, 1, 3, 1]).unwrap();
    write_ground_truth(&path, &gt).unwrap();
    let back = load_ground_truth(&path, 2, 2).unwrap();
    assert_eq!(back, gt);
    assert_eq!(back.class_count(), 3);
    assert!(matches!(
        load_ground_truth(&path, 3, 2),
        Err(Error::PayloadLength { .. })
    ));
}

#[test]
fn malformed_inputs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("bad");
    let header = dir.path().join("bad.hsch");
    let payload = dir.path().join("bad.hscd");

    assert!(matches!(load_cube(&stem), Err(Error::Io { .. })));

    fs::write(&header, "{ not json").unwrap();
    fs::write(&payload, [0u8; 8]).unwrap();
    assert!(matches!(load_cube(&stem), Err(Error::Header { .. })));

    fs::write(&header, r#"{"bands":1,"rows":2,"cols":2,"dtype":"i8","order":"bsq"}"#).unwrap();
    assert!(matches!(load_cube(&stem), Err(Error::UnknownDtype(_))));

    fs::write(&header, r#"{"bands":1,"rows":2,"cols":2,"dtype":"u16","order":"bip"}"#).unwrap();
    assert!(matches!(load_cube(&stem), Err(Error::Header { .. })));

    fs::write(&header, r#"{"bands":1,"rows":2,"cols":2,"dtype":"f32","order":"bsq"}"#).unwrap();
    fs::write(&payload, [0u8; 12]).unwrap();
    assert!(matches!(
        load_cube(&stem),
        Err(Error::PayloadLength {
            expected: 16,
            found: 12
        })
    ));

    let mut bytes = Vec::new();
    for v in [1.0f32, f32::NAN, 2.0, 3.0] {
        bytes.extend(v.to_le_bytes());
    }
    fs::write(&payload, bytes).unwrap();
    assert!(matches!(load_cube(&stem), Err(Error::NonFinite(1))));
}
