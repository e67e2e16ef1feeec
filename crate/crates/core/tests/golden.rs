//! Golden dumps of generated adjoints. Set `UPDATE_GOLDEN=1` to rewrite.

use std::path::{Path, PathBuf};

use fpee::frontend::compile;
use fpee::inline::inline_named;
use fpee::models::ModelId;
use fpee::transform::{analyze_activity, default_seeds, emit, transform};

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn check(path: &Path, actual: &str) {
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "golden mismatch for {}", path.display());
}

/// Dump of the adjoint of `entry` under the analyzed activity sets.
pub fn micro_dump(file: &str, entry: &str) -> String {
    let src = std::fs::read_to_string(golden_dir().join(file)).unwrap();
    let f = inline_named(&compile(&src).unwrap(), entry).unwrap();
    let activity = analyze_activity(&f, &default_seeds(&f));
    emit(&transform(&f, ModelId::Taylor, &activity).unwrap())
}

#[test]
fn rule_micro_programs() {
    for (file, entry) in [("s2_live_diff.fpl", "s2"), ("s3_live_not_diff.fpl", "s3"), ("s4_dead_diff.fpl", "s4")] {
        check(&golden_dir().join(file.replace(".fpl", ".adj")), &micro_dump(file, entry));
    }
}

#[test]
fn corpus_dumps_are_stable() {
    for k in fpee::corpus::kernels() {
        let f = k.function();
        let dump = emit(&fpee::analysis::adjoint_for(&f, ModelId::Taylor).unwrap());
        assert_eq!(dump, emit(&fpee::analysis::adjoint_for(&k.function(), ModelId::Taylor).unwrap()));
        check(&golden_dir().join("corpus").join(k.file_name.replace(".fpl", ".adj")), &dump);
    }
}
