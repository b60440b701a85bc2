#![no_main]

use fermi_rmt_cli::config::{parse_config, MAX_CELLS};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    match parse_config(text) {
        Ok(cfg) => {
            // a config that parses always has a usable grid
            let cells = cfg.cells().expect("validated grid expands");
            assert!(!cells.is_empty() && cells.len() <= MAX_CELLS);
            assert!(cfg.tol > 0.0 && cfg.tol.is_finite());
            assert!(cells.iter().all(|e| e.m() >= 1 && e.n() >= e.m()));
        }
        Err(err) => {
            assert!(err.line <= text.lines().count().max(1));
            assert!(!err.field.is_empty());
        }
    }
});
