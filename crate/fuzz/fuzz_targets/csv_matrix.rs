#![no_main]

use libfuzzer_sys::fuzz_target;
use pcdfpca::io::{format_matrix_csv, parse_matrix_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(parsed) = parse_matrix_csv(text) {
        assert!(parsed.data.nrows() > 0);
        assert!(parsed.data.iter().all(|v| v.is_finite()));
        // Formatting and reparsing is lossless.
        let again = parse_matrix_csv(&format_matrix_csv(&parsed.data, None)).expect("formatted output parses");
        assert_eq!(again.data, parsed.data);
    }
});
