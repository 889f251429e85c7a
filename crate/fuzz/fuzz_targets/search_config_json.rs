#![no_main]

use libfuzzer_sys::fuzz_target;
use triop::search::SearchConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(cfg) = serde_json::from_slice::<SearchConfig>(data) {
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<SearchConfig>(&text).unwrap(), cfg);
    }
});
