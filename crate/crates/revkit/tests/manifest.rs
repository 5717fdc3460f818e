use std::fs;

use revkit::core::experiment::Condition;
use revkit::core::hmm::PhoneSet;
use revkit::manifest::{load_manifest, read_phone_set, write_phone_set};
use revkit::Error;

fn phones() -> PhoneSet {
    PhoneSet::new(&["sil", "a", "b", "c"], "sil").unwrap()
}

fn load(text: &str) -> (tempfile::TempDir, revkit::Result<revkit::manifest::Manifest>) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.tsv");
    fs::write(&path, text).unwrap();
    let m = load_manifest(&path, &phones());
    (dir, m)
}

#[test]
fn two_valid_lines() {
    let (dir, m) = load("u1\tu1.wav\tsil a b sil\tclean\nu2\t/abs/u2.wav\tsil c sil\trev_noise\tlab/u2.rvk\n");
    let m = m.unwrap();
    assert_eq!(m.len(), 2);
    assert_eq!(m.records[0].audio, dir.path().join("u1.wav"));
    assert_eq!(m.records[0].transcript, vec![0, 1, 2, 0]);
    assert_eq!(m.records[0].labels, None);
    assert_eq!(m.records[1].audio, std::path::PathBuf::from("/abs/u2.wav"));
    assert_eq!(m.records[1].condition, Condition::RevNoise);
    assert_eq!(m.records[1].labels, Some(dir.path().join("lab/u2.rvk")));
}

#[test]
fn unknown_phone_names_symbol_and_line() {
    let (_d, m) = load("u1\tu1.wav\tsil a sil\tclean\nu2\tu2.wav\tsil zz sil\tclean\n");
    let err = m.unwrap_err();
    assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
    let msg = err.to_string();
    assert!(msg.contains("\"zz\"") && msg.contains(":2:"), "{msg}");
}

#[test]
fn duplicate_id_is_rejected() {
    let (_d, m) = load("u1\tu1.wav\tsil a sil\tclean\nu1\tu2.wav\tsil b sil\tclean\n");
    let err = m.unwrap_err();
    assert!(matches!(err, Error::Parse { line: 2, .. }));
    assert!(err.to_string().contains("duplicate"));
}

#[test]
fn malformed_lines_are_rejected() {
    for bad in [
        "u1\tu1.wav\tsil a sil\n",
        "u1\tu1.wav\tsil a sil\tnoisy\n",
        "u1\tu1.wav\t\tclean\n",
        "\tu1.wav\tsil\tclean\n",
    ] {
        let (_d, m) = load(bad);
        assert!(matches!(m, Err(Error::Parse { line: 1, .. })), "{bad:?}");
    }
}

#[test]
fn write_then_load_round_trips() {
    let (dir, m) = load("u1\tu1.wav\tsil a b sil\tclean\tl/u1.rvk\nu2\tu2.wav\tsil c sil\trev\n");
    let m = m.unwrap();
    let out = dir.path().join("copy.tsv");
    m.write(&out).unwrap();
    assert_eq!(load_manifest(&out, &phones()).unwrap(), m);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("u1\tu1.wav\tsil a b sil\tclean\tl/u1.rvk\n"), "{text}");
}

#[test]
fn phone_set_file_round_trips_and_requires_silence() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("phones.txt");
    write_phone_set(&p, &phones()).unwrap();
    assert_eq!(read_phone_set(&p).unwrap(), phones());
    fs::write(&p, "a b c").unwrap();
    assert!(read_phone_set(&p).is_err());
}

#[test]
fn rewritten_manifest_keeps_outside_paths_resolvable() {
    let (dir, m) = load("u1\tu1.wav\tsil a sil\tclean\tlab/u1.rvk\n");
    let mut m = m.unwrap();
    // A manifest loaded through a relative path carries relative paths.
    m.records[0].labels = Some("rel/lab/u1.rvk".into());
    let out = dir.path().join("copy");
    fs::create_dir(&out).unwrap();
    m.write(out.join("m.tsv")).unwrap();
    let back = load_manifest(out.join("m.tsv"), &phones()).unwrap();
    assert_eq!(back.records[0].audio, dir.path().join("u1.wav"));
    assert_eq!(
        back.records[0].labels,
        Some(std::path::absolute("rel/lab/u1.rvk").unwrap())
    );
}
