#![no_main]

use ccs_radar::coding::CodeRate;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(rate) = text.parse::<CodeRate>() {
            let v = rate.value();
            assert!(v > 0.0 && v <= 1.0);
            let back: CodeRate = rate.to_string().parse().unwrap();
            assert_eq!(back.value(), v);
        }
    }
});
