use byteorder::{BigEndian, ByteOrder};
use gradlab_data::idx::{load_idx, write_idx_images, write_idx_labels};
use gradlab_data::{DataError, Split};
use std::path::PathBuf;

fn image_file(count: u32, rows: u32, cols: u32, pixels: &[u8]) -> Vec<u8> {
    let mut bytes = vec![0u8; 16];
    BigEndian::write_u32(&mut bytes[0..4], 0x0000_0803);
    BigEndian::write_u32(&mut bytes[4..8], count);
    BigEndian::write_u32(&mut bytes[8..12], rows);
    BigEndian::write_u32(&mut bytes[12..16], cols);
    bytes.extend_from_slice(pixels);
    bytes
}

fn label_file(labels: &[u8]) -> Vec<u8> {
    let mut bytes = vec![0u8; 8];
    BigEndian::write_u32(&mut bytes[0..4], 0x0000_0801);
    BigEndian::write_u32(&mut bytes[4..8], labels.len() as u32);
    bytes.extend_from_slice(labels);
    bytes
}

fn write_temp(dir: &tempfile::TempDir, name: &str, bytes: &[u8]) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, bytes).unwrap();
    path
}

#[test]
fn loads_a_constructed_two_image_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let mut pixels = vec![0u8; 2 * 28 * 28];
    pixels[0] = 255;
    pixels[1] = 128;
    let images = write_temp(&dir, "imgs", &image_file(2, 28, 28, &pixels));
    let labels = write_temp(&dir, "lbls", &label_file(&[3, 7]));

    let data = load_idx(&images, &labels, Split::Train).unwrap();
    assert_eq!(data.len(), 2);
    assert_eq!(data.labels(), &[3, 7]);
    assert_eq!(data.rows(), 28);
    assert_eq!(data.cols(), 28);
    // Byte 255 scales to exactly 1.0 and byte 0 to 0.0.
    assert_eq!(data.image_pixels(0)[0], 1.0);
    assert_eq!(data.image_pixels(0)[2], 0.0);
    assert!((data.image_pixels(0)[1] - 128.0 / 255.0).abs() < 1e-7);
}

#[test]
fn image_label_count_mismatch_is_a_distinct_error() {
    let dir = tempfile::tempdir().unwrap();
    let images = write_temp(&dir, "imgs", &image_file(2, 28, 28, &[0u8; 2 * 784]));
    let labels = write_temp(&dir, "lbls", &label_file(&[3, 7, 9]));
    assert!(matches!(
        load_idx(&images, &labels, Split::Train),
        Err(DataError::CountMismatch { images: 2, labels: 3 })
    ));
}

#[test]
fn bad_magic_is_rejected_with_the_offending_path() {
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = image_file(1, 28, 28, &[0u8; 784]);
    bytes[3] = 0x99;
    let images = write_temp(&dir, "imgs", &bytes);
    let labels = write_temp(&dir, "lbls", &label_file(&[1]));
    match load_idx(&images, &labels, Split::Train) {
        Err(DataError::BadMagic { path, expected, .. }) => {
            assert!(path.ends_with("imgs"));
            assert_eq!(expected, 0x0000_0803);
        }
        other => panic!("expected BadMagic, got {other:?}"),
    }
}

#[test]
fn truncated_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let full = image_file(2, 28, 28, &[0u8; 2 * 784]);
    let images = write_temp(&dir, "imgs", &full[..16 + 784 + 100]);
    let labels = write_temp(&dir, "lbls", &label_file(&[1, 2]));
    assert!(matches!(
        load_idx(&images, &labels, Split::Train),
        Err(DataError::Truncated { .. })
    ));
}

#[test]
fn write_then_load_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let images_path = dir.path().join("imgs");
    let labels_path = dir.path().join("lbls");
    let pixels: Vec<u8> = (0..3 * 784).map(|i| (i % 251) as u8).collect();
    write_idx_images(&images_path, &pixels, 3, 28, 28).unwrap();
    write_idx_labels(&labels_path, &[0, 1, 2]).unwrap();
    let data = load_idx(&images_path, &labels_path, Split::Test).unwrap();
    assert_eq!(data.len(), 3);
    assert_eq!(data.labels(), &[0, 1, 2]);
    for (i, &b) in pixels.iter().enumerate() {
        let sample = i / 784;
        let offset = i % 784;
        assert_eq!(data.image_pixels(sample)[offset], b as f32 / 255.0);
    }
}

/// Runs only when the official handwritten-digit files are available locally;
/// set `MNIST_DIR` to the directory holding the four distribution files.
#[test]
fn official_dataset_class_counts_when_available() {
    let Ok(dir) = std::env::var("MNIST_DIR") else {
        eprintln!("MNIST_DIR not set; skipping official-dataset check");
        return;
    };
    let base = PathBuf::from(dir);
    let train = load_idx(
        &base.join("train-images-idx3-ubyte"),
        &base.join("train-labels-idx1-ubyte"),
        Split::Train,
    )
    .unwrap();
    assert_eq!(train.len(), 60_000);
    let reduced = gradlab_data::binary_reduce(
        &train,
        gradlab_data::ClassSelection::Pair {
            class_a: 0,
            class_b: 1,
        },
    )
    .unwrap();
    assert_eq!(reduced.len(), 12_665);
}
