#![no_main]

use libfuzzer_sys::fuzz_target;
use triop::theorems::{read_ratio_csv, write_ratio_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(records) = read_ratio_csv(data) {
        let mut buf = Vec::new();
        write_ratio_csv(&records, &mut buf).unwrap();
        assert_eq!(read_ratio_csv(buf.as_slice()).unwrap(), records);
    }
});
