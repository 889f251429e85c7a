#![no_main]

use libfuzzer_sys::fuzz_target;
use triop::opint::{rep_norm, HaagerupRep};

fuzz_target!(|data: &[u8]| {
    if let Ok(rep) = serde_json::from_slice::<HaagerupRep>(data) {
        let text = serde_json::to_string(&rep).unwrap();
        assert_eq!(serde_json::from_str::<HaagerupRep>(&text).unwrap(), rep);
        let _ = rep_norm(&rep);
    }
});
