// Runs every example in-process so they cannot rot.

#[allow(dead_code)]
#[path = "../examples/artifact_info.rs"]
mod artifact_info;
#[allow(dead_code)]
#[path = "../examples/compress_roundtrip.rs"]
mod compress_roundtrip;
#[allow(dead_code)]
#[path = "../examples/dataset_build.rs"]
mod dataset_build;
#[allow(dead_code)]
#[path = "../examples/flame_labels.rs"]
mod flame_labels;
#[allow(dead_code)]
#[path = "../examples/pointwise_relative.rs"]
mod pointwise_relative;
#[allow(dead_code)]
#[path = "../examples/quality_sweep.rs"]
mod quality_sweep;

#[test]
fn compress_roundtrip_runs() {
    compress_roundtrip::run(tempfile::tempdir().unwrap().path()).unwrap();
}

#[test]
fn pointwise_relative_runs() {
    pointwise_relative::run().unwrap();
}

#[test]
fn quality_sweep_runs() {
    quality_sweep::run().unwrap();
}

#[test]
fn flame_labels_runs() {
    flame_labels::run().unwrap();
}

#[test]
fn dataset_build_runs() {
    dataset_build::run(tempfile::tempdir().unwrap().path()).unwrap();
}

#[test]
fn artifact_info_runs() {
    artifact_info::run().unwrap();
}
