//! Angle-mesh JSON decoder. Accepted meshes must re-encode losslessly and
//! either transform or fail with an error, never panic.

#![no_main]

use libfuzzer_sys::fuzz_target;
use tritrans_core::simple_mesh::{transform_mesh, SimpleMeshAngles};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(mesh) = SimpleMeshAngles::from_json(text) else {
        return;
    };
    let again = SimpleMeshAngles::from_json(&mesh.to_json()).expect("re-encoded mesh decodes");
    assert_eq!(again, mesh);
    assert_eq!(transform_mesh(&mesh).is_ok(), mesh.stays_nondegenerate());
});
