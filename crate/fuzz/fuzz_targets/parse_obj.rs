#![no_main]

use libfuzzer_sys::fuzz_target;
use tritrans_core::mesh_io::{parse_obj, render_svg_string, Colormap};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(loaded) = parse_obj(text) {
        let svg = render_svg_string(&loaded.mesh, &Colormap::default());
        assert_eq!(
            svg.matches("<polygon").count(),
            loaded.mesh.triangles().len()
        );
    }
});
