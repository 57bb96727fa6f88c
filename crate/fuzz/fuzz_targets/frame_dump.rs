#![no_main]

use ccs_radar::scene::{decode_dump, encode_dump};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok((magic, grid)) = decode_dump(data) {
        assert_eq!(encode_dump(magic, &grid).unwrap(), data);
    }
});
