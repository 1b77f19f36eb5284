use std::path::PathBuf;

use actpath::npy::{decode, encode, read_tensor, write_tensor, Dtype};
use actpath_core::Matrix;
use proptest::prelude::*;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

#[test]
fn numpy_written_files_round_trip_byte_for_byte() {
    for name in ["rows3x2_f8.npy", "empty0x5_f4.npy", "grid4x3_f4.npy", "wide1x40_f8.npy"] {
        let bytes = std::fs::read(data(name)).unwrap();
        let t = decode(&bytes).unwrap();
        assert_eq!(encode(&t.matrix, t.dtype), bytes, "{name}");
    }
}

#[test]
fn reads_hand_checked_values() {
    let t = read_tensor(&data("rows3x2_f8.npy")).unwrap();
    assert_eq!(t.dtype, Dtype::F8);
    assert_eq!((t.matrix.rows(), t.matrix.cols()), (3, 2));
    assert_eq!(t.matrix.get(2, 1), 6.0);
    assert_eq!(t.matrix.as_slice(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);

    let e = read_tensor(&data("empty0x5_f4.npy")).unwrap();
    assert_eq!((e.matrix.rows(), e.matrix.cols()), (0, 5));

    // f4 values widen exactly.
    let g = read_tensor(&data("grid4x3_f4.npy")).unwrap();
    assert_eq!(g.matrix.get(1, 0), (3.0f32 / 7.0f32) as f64);
}

fn with_header(header: &str, payload: &[u8]) -> Vec<u8> {
    let mut out = b"\x93NUMPY\x01\x00".to_vec();
    out.extend_from_slice(&(header.len() as u16).to_le_bytes());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(payload);
    out
}

#[test]
fn rejects_malformed_files() {
    let ten: Vec<u8> = (0..10).flat_map(|i| (i as f64).to_le_bytes()).collect();
    let h = "{'descr': '<f8', 'fortran_order': False, 'shape': (4, 3), }\n";
    let err = decode(&with_header(h, &ten)).unwrap_err();
    assert!(err.contains("needs 96"), "{err}");

    let good = std::fs::read(data("rows3x2_f8.npy")).unwrap();
    let mut magic = good.clone();
    magic[1] = b'X';
    assert!(decode(&magic).unwrap_err().contains("magic"));
    let mut v2 = good.clone();
    v2[6] = 2;
    assert!(decode(&v2).unwrap_err().contains("version"));
    assert!(decode(&good[..good.len() - 1]).is_err());
    assert!(decode(&good[..20]).unwrap_err().contains("truncated"));

    let cases = [
        ("{'descr': '<f8', 'fortran_order': False, 'shape': (6,), }\n", "2-D"),
        ("{'descr': '<f8', 'fortran_order': False, 'shape': (1, 2, 3), }\n", "2-D"),
        ("{'descr': '<i4', 'fortran_order': False, 'shape': (3, 2), }\n", "element type"),
        ("{'descr': '>f8', 'fortran_order': False, 'shape': (3, 2), }\n", "element type"),
        ("{'descr': '<f8', 'fortran_order': True, 'shape': (3, 2), }\n", "fortran"),
        ("{'descr': '<f8', 'shape': (3, 2), }\n", "fortran_order"),
        ("not a dict\n", "dict"),
    ];
    for (h, needle) in cases {
        let err = decode(&with_header(h, &good[128..])).unwrap_err();
        assert!(err.contains(needle), "{h}: {err}");
    }
}

#[test]
fn file_io_reports_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.npy");
    std::fs::write(&p, b"nope").unwrap();
    let msg = read_tensor(&p).unwrap_err().to_string();
    assert!(msg.contains("bad.npy"), "{msg}");
    assert!(read_tensor(&dir.path().join("missing.npy")).is_err());
}

proptest! {
    #[test]
    fn write_read_write_is_identity(
        rows in 0usize..12,
        cols in 1usize..6,
        seed in prop::collection::vec(any::<f32>().prop_filter("finite", |v| v.is_finite()), 72),
        wide in any::<bool>(),
    ) {
        let vals: Vec<f64> = seed[..rows * cols].iter().map(|&v| v as f64 * if wide { 1.000001 } else { 1.0 }).collect();
        let m = Matrix::new(rows, cols, vals).unwrap();
        let dtype = if wide { Dtype::F8 } else { Dtype::F4 };
        let bytes = encode(&m, dtype);
        let t = decode(&bytes).unwrap();
        prop_assert_eq!(&t.matrix, &m);
        prop_assert_eq!(t.dtype, dtype);
        prop_assert_eq!(encode(&t.matrix, t.dtype), bytes);

        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.npy");
        write_tensor(&p, &m, dtype).unwrap();
        prop_assert_eq!(read_tensor(&p).unwrap(), t);
    }
}
