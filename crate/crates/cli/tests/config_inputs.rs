use std::path::Path;

use fermi_rmt_cli::config::{parse_bound, parse_config, parse_range, MAX_CELLS};
use proptest::prelude::*;

fn check_config(text: &str) {
    match parse_config(text) {
        Ok(cfg) => {
            let cells = cfg.cells().expect("validated grid expands");
            assert!(!cells.is_empty() && cells.len() <= MAX_CELLS);
            assert!(cells.iter().all(|e| e.m() >= 1 && e.n() >= e.m()));
        }
        Err(err) => {
            assert!(err.line <= text.lines().count().max(1), "{err} for {text:?}");
            assert!(!err.field.is_empty());
        }
    }
}

fn check_range(text: &str) {
    if let Ok(range) = parse_range(text) {
        for b in [range.lo, range.hi] {
            assert_eq!(parse_bound(&b.to_string()), Ok(b), "{text:?}");
        }
    }
}

fn corpus(target: &str) -> Vec<String> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<String> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| std::fs::read_to_string(entry.unwrap().path()).unwrap())
        .collect();
    out.sort();
    out
}

#[test]
fn fuzz_seeds_hold_the_invariants() {
    let configs = corpus("sweep_config");
    assert!(configs.len() >= 3);
    let parsed = configs.iter().filter(|c| parse_config(c).is_ok()).count();
    assert!(parsed >= 3 && parsed < configs.len());
    configs.iter().for_each(|c| check_config(c));
    corpus("grid_range").iter().for_each(|r| check_range(r));
}

proptest! {
    #[test]
    fn arbitrary_ranges(text in "[m0-9*+\\-.= ]{0,14}") {
        check_range(&text);
    }

    #[test]
    fn arbitrary_configs(lines in proptest::collection::vec(
        prop_oneof![
            Just("[grid]".to_string()),
            "(m|n|a) = [m0-9*+\\-.]{1,8}",
            "(seed|tol|samples|stats|routes) = [a-z0-9e,+\\-. ]{0,16}",
            "[ -~]{0,12}",
        ],
        0..10,
    )) {
        check_config(&lines.join("\n"));
    }
}
