use std::collections::BTreeMap;
use std::path::Path;

use deepagent::par::Exec;
use deepagent::pipeline::commands::{extract, load_dataset, FEATURES_FILE, SPLITS_FILE};
use deepagent::pipeline::{gen_fixtures, FixtureSpec, PipelineConfig, Split};

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn spec(samples: usize) -> FixtureSpec {
    FixtureSpec { samples, strength: 1.0, gap: 1.0, seed: 42 }
}

#[test]
fn same_seed_gives_identical_fixture_tree() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    gen_fixtures(a.path(), &spec(12)).unwrap();
    gen_fixtures(b.path(), &spec(12)).unwrap();
    let (ta, tb) = (tree(a.path()), tree(b.path()));
    assert!(ta.len() > 12);
    assert_eq!(ta, tb);
}

#[test]
fn extract_is_idempotent_and_balanced() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = gen_fixtures(dir.path(), &spec(40)).unwrap();
    let (o1, o2) = (dir.path().join("o1"), dir.path().join("o2"));
    let cfg = PipelineConfig::default();
    extract(&manifest, &o1, &cfg, Exec::default()).unwrap();
    extract(&manifest, &o2, &cfg, Exec::Sequential).unwrap();
    for f in [FEATURES_FILE, SPLITS_FILE] {
        assert_eq!(std::fs::read(o1.join(f)).unwrap(), std::fs::read(o2.join(f)).unwrap(), "{f}");
    }
    let records = load_dataset(&o1).unwrap();
    for label in [0u8, 1] {
        let count = |s| records.iter().filter(|r| r.label == label && r.split == s).count();
        assert_eq!((count(Split::Train), count(Split::Val), count(Split::Test)), (14, 4, 2));
    }
}

#[test]
fn invalid_manifest_is_rejected_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = gen_fixtures(dir.path(), &spec(10)).unwrap();
    std::fs::remove_file(dir.path().join("samples/vid0003/frame_00.ppm")).unwrap();
    let out = dir.path().join("out");
    let err = extract(&manifest, &out, &PipelineConfig::default(), Exec::default()).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("frame_00.ppm"), "{err}");
    assert!(!out.exists());
}
