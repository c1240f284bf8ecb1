use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_6, PI};

use tritrans_core::mesh_io::*;
use tritrans_core::plane_geometry::{equilateral, Point2};

/// Triangle with angle `a` at the origin and `b` at `(1, 0)`.
fn triangle_with_angles(a: f64, b: f64) -> [Point2; 3] {
    let c = PI - a - b;
    // Law of sines: |AC| = sin(b) / sin(c) for |AB| = 1.
    let ac = b.sin() / c.sin();
    [
        Point2::new(0.0, 0.0),
        Point2::new(1.0, 0.0),
        Point2::new(ac * a.cos(), ac * a.sin()),
    ]
}

fn single(points: [Point2; 3]) -> MeshModel {
    MeshModel::new(points.to_vec(), vec![[0, 1, 2]]).unwrap().0
}

fn fills(svg: &str) -> Vec<&str> {
    svg.match_indices("fill=\"#")
        .map(|(i, _)| &svg[i + 6..i + 13])
        .collect()
}

fn channels(hex: &str) -> [u8; 3] {
    [1, 3, 5].map(|i| u8::from_str_radix(&hex[i..i + 2], 16).unwrap())
}

#[test]
fn minimal_off_file() {
    let l = parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n").unwrap();
    assert_eq!(l.mesh.triangles().len(), 1);
    assert_eq!(l.mesh.vertices().len(), 3);
}

#[test]
fn obj_quad_is_rejected() {
    let err = parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n").unwrap_err();
    assert!(
        matches!(err, MeshIoError::NonTriangularFace { line: 5, arity: 4 }),
        "{err:?}"
    );
}

#[test]
fn off_index_out_of_range_names_the_line() {
    let err = parse_off("OFF\n3 1 0\n0 0\n1 0\n0 1\n3 0 1 7\n").unwrap_err();
    assert!(matches!(err, MeshIoError::Parse { line: 6, .. }), "{err:?}");
    assert!(err.to_string().starts_with("line 6"));
}

#[test]
fn tilted_3d_mesh_is_rejected_and_flat_one_flattened() {
    let flat = parse_off("OFF\n3 1 0\n0 0 2\n1 0 2\n0 1 2\n3 0 1 2\n").unwrap();
    assert_eq!(flat.mesh.vertices()[1], Point2::new(1.0, 0.0));
    let tilted = parse_off("OFF\n3 1 0\n0 0 0\n1 0 1\n0 1 0\n3 0 1 2\n").unwrap_err();
    assert!(matches!(tilted, MeshIoError::NonPlanar));
}

#[test]
fn degenerate_faces_are_reported() {
    let l = parse_off("OFF\n4 2 0\n0 0\n1 0\n2 0\n0 1\n3 0 1 2\n3 0 1 3\n").unwrap();
    assert_eq!(l.mesh.triangles(), &[[0, 1, 3]]);
    assert_eq!(l.excluded.len(), 1);
    assert_eq!(l.excluded[0].line, 7);
    let report = analyze(&l.mesh, &[]).with_excluded(l.excluded);
    assert_eq!(report.summary.triangle_count, 1);
    assert_eq!(report.excluded.len(), 1);
}

#[test]
fn equilateral_mesh_has_unit_quality() {
    let mesh = single(equilateral(2.0, Point2::new(3.0, -1.0)).vertices());
    let r = analyze(&mesh, &[1, 2, 5]);
    assert!((r.triangles[0].q - 1.0).abs() < 1e-12);
    for p in &r.triangles[0].predicted {
        assert!((p.q - 1.0).abs() < 1e-12);
    }
}

#[test]
fn right_triangle_predictions() {
    let mesh = single(triangle_with_angles(FRAC_PI_2, FRAC_PI_3));
    let r = analyze(&mesh, &[1, 2]);
    let t = &r.triangles[0];
    assert!((t.q - 1.0 / 3.0).abs() < 1e-12);
    assert!((t.predicted[0].q - 0.6).abs() < 1e-12);
    assert!((t.predicted[1].q - 7.0 / 9.0).abs() < 1e-12);
    let a = t.angles;
    assert!((a[2] - FRAC_PI_6).abs() < 1e-12);

    let bare = analyze(&mesh, &[]);
    assert!(bare.triangles[0].predicted.is_empty());
    assert_eq!(
        bare.to_csv().unwrap().lines().next().unwrap(),
        "index,alpha,beta,gamma,q"
    );
}

#[test]
fn histogram_counts_every_triangle() {
    let l = parse_off("OFF\n5 3 0\n0 0\n1 0\n0 1\n2 0\n2 1\n3 0 1 2\n3 0 3 4\n3 1 3 4\n").unwrap();
    for bins in [1, 3, 10] {
        let r = analyze_with_bins(&l.mesh, &[], bins);
        assert_eq!(r.summary.histogram.counts.len(), bins);
        assert_eq!(r.summary.histogram.counts.iter().sum::<usize>(), 3);
    }
}

#[test]
fn equilateral_only_mesh_has_uniform_fill() {
    let a = equilateral(1.0, Point2::new(0.0, 0.0)).vertices();
    let b = equilateral(1.0, Point2::new(5.0, 2.0)).vertices();
    let mut v = a.to_vec();
    v.extend_from_slice(&b);
    let mesh = MeshModel::new(v, vec![[0, 1, 2], [3, 4, 5]]).unwrap().0;
    let cm = Colormap::default();
    let svg = render_svg_string(&mesh, &cm);
    let f = fills(&svg);
    assert_eq!(f.len(), 2);
    assert!(f.iter().all(|&x| x == cm.color(1.0).hex()));
}

#[test]
fn low_quality_triangle_is_red() {
    // (100°, 60°, 20°) has q = 0.2.
    let low = triangle_with_angles(100f64.to_radians(), 60f64.to_radians());
    let high = equilateral(1.0, Point2::new(4.0, 0.0)).vertices();
    let mut v = low.to_vec();
    v.extend_from_slice(&high);
    let mesh = MeshModel::new(v, vec![[0, 1, 2], [3, 4, 5]]).unwrap().0;
    assert!((mesh.triangle_angles(0).quality().value() - 0.2).abs() < 1e-12);

    let svg = render_svg_string(&mesh, &Colormap::default());
    let f = fills(&svg);
    assert_eq!(f.len(), 2);
    assert_ne!(f[0], f[1]);
    let [r, g, b] = channels(f[0]);
    assert!(r > 2 * g.max(b).max(20), "{} is not red", f[0]);
    let [r1, _, b1] = channels(f[1]);
    assert!(b1 > r1, "{} is not blue", f[1]);
    assert_eq!(svg.matches("<polygon").count(), 2);
    assert!(svg.contains("version=\"1.1\""));
}

#[test]
fn render_twice_gives_identical_bytes() {
    let l = parse_off("OFF\n4 2 0\n0 0\n1 0\n0 1\n1.3 1.1\n3 0 1 2\n3 1 3 2\n").unwrap();
    let cm: Colormap = "grayscale".parse().unwrap();
    assert_eq!(
        render_svg_string(&l.mesh, &cm),
        render_svg_string(&l.mesh, &cm)
    );
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.svg"), dir.path().join("b.svg"));
    render_svg(&l.mesh, &a, &cm).unwrap();
    render_svg(&l.mesh, &b, &cm).unwrap();
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn bad_colormaps_are_rejected() {
    for spec in [
        "",
        "0:#000000",
        "0:#000000,0.5:#ffffff",
        "0:#zzzzzz,1:#000000",
        "0:#000,1:#fff",
        "1:#000000,0:#ffffff",
    ] {
        assert!(spec.parse::<Colormap>().is_err(), "{spec:?}");
    }
}
