#![no_main]

use libfuzzer_sys::fuzz_target;
use triop::TrigPoly2;

fuzz_target!(|data: &[u8]| {
    if let Ok(f) = serde_json::from_slice::<TrigPoly2>(data) {
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<TrigPoly2>(&text).unwrap(), f);
        if f.degree() <= 8 {
            let _ = f.besov_norm(4);
        }
    }
});
