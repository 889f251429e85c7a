#![no_main]

use libfuzzer_sys::fuzz_target;
use triop::theorems::{lipschitz_ratio, PerturbationInstance};

fuzz_target!(|data: &[u8]| {
    if let Ok(inst) = serde_json::from_slice::<PerturbationInstance>(data) {
        let text = serde_json::to_string(&inst).unwrap();
        assert_eq!(serde_json::from_str::<PerturbationInstance>(&text).unwrap(), inst);
        if inst.dim() <= 8 && inst.f.degree() <= 4 {
            let _ = lipschitz_ratio(&inst);
        }
    }
});
