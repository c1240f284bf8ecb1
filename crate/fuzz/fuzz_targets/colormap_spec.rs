#![no_main]

use libfuzzer_sys::fuzz_target;
use tritrans_core::mesh_io::Colormap;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cm) = text.parse::<Colormap>() {
        for q in [0.0, 1e-9, 0.2, 0.3, 0.5, 0.8, 1.0, f64::NAN, -1.0, 2.0] {
            let _ = cm.color(q).hex();
        }
    }
});
