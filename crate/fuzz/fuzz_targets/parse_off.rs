//! OFF reader on arbitrary input. Anything it accepts must survive a
//! write/read round trip unchanged.

#![no_main]

use libfuzzer_sys::fuzz_target;
use tritrans_core::mesh_io::{analyze, parse_off, write_off};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(loaded) = parse_off(text) else {
        return;
    };
    let again = parse_off(&write_off(&loaded.mesh)).expect("written OFF parses");
    assert_eq!(again.mesh.triangles(), loaded.mesh.triangles());
    assert_eq!(again.mesh.vertices(), loaded.mesh.vertices());
    let report = analyze(&loaded.mesh, &[1, 2]);
    assert_eq!(report.triangles.len(), loaded.mesh.triangles().len());
});
