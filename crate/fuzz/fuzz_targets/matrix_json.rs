#![no_main]

use libfuzzer_sys::fuzz_target;
use triop::{GeneralOperator, HermitianOperator};

fuzz_target!(|data: &[u8]| {
    if let Ok(t) = serde_json::from_slice::<GeneralOperator>(data) {
        let text = serde_json::to_string(&t).unwrap();
        assert_eq!(serde_json::from_str::<GeneralOperator>(&text).unwrap(), t);
    }
    if let Ok(h) = serde_json::from_slice::<HermitianOperator>(data) {
        let text = serde_json::to_string(&h).unwrap();
        assert_eq!(serde_json::from_str::<HermitianOperator>(&text).unwrap(), h);
        if h.dim() <= 16 {
            let _ = triop::matrix::spectral_decompose_default(&h);
        }
    }
});
