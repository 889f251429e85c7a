#![no_main]

use libfuzzer_sys::fuzz_target;
use triop::SchattenIndex;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(p) = text.parse::<SchattenIndex>() {
            assert!(p.value() >= 1.0);
            assert_eq!(p.to_string().parse::<SchattenIndex>().unwrap(), p);
        }
    }
});
