#![no_main]

use libfuzzer_sys::fuzz_target;
use pcdfpca::model::PcDfpcaModel;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(model) = PcDfpcaModel::from_json_str(text) {
        for d in 0..model.period() {
            for m in 0..model.ncomp() {
                for l in model.lag_range(d) {
                    assert_eq!(model.filter(d, m, l).map(<[f64]>::len), Some(model.nbasis()));
                }
            }
        }
        let reparsed =
            PcDfpcaModel::from_json_str(&model.to_json().expect("loaded models serialize")).expect("round trip");
        assert_eq!(reparsed, model);
    }
});
