#![no_main]

use fermi_rmt_cli::config::{parse_bound, parse_range};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(range) = parse_range(text) {
        // printed bounds parse back to themselves
        for b in [range.lo, range.hi] {
            assert_eq!(parse_bound(&b.to_string()), Ok(b));
        }
        for m in 1..4 {
            for v in range.values(m).take(64) {
                assert!(v as i64 >= range.lo.at(m) && v as i64 <= range.hi.at(m));
            }
        }
    }
});
