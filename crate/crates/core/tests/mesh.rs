use std::collections::{BTreeMap, HashMap};

use hotspots_core::geometry::{builtin_domain, Builtin, DomainSpec};
use hotspots_core::linalg::{self, Vec3};
use hotspots_core::mesh::{generate_mesh, parse_mesh, refine, write_mesh, Mesh};

fn builtin(name: &str, params: &[(&str, f64)]) -> DomainSpec {
    let p: BTreeMap<String, f64> = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    builtin_domain(&Builtin::from_name(name, &p).unwrap()).unwrap()
}

/// Every interior facet is shared by exactly two cells and every other facet
/// is a tagged boundary facet.
fn assert_conforming(mesh: &Mesh) {
    let d = mesh.dim;
    let mut count: HashMap<Vec<usize>, usize> = HashMap::new();
    for c in 0..mesh.num_cells() {
        let cell = mesh.cell(c);
        for skip in 0..=d {
            let mut f: Vec<usize> = (0..=d).filter(|&i| i != skip).map(|i| cell[i]).collect();
            f.sort_unstable();
            *count.entry(f).or_default() += 1;
        }
    }
    let mut boundary: Vec<Vec<usize>> = mesh
        .boundary_facets
        .iter()
        .map(|f| {
            let mut v = f.verts(d).to_vec();
            v.sort_unstable();
            v
        })
        .collect();
    boundary.sort();
    let mut single: Vec<Vec<usize>> = count.iter().filter(|(_, &n)| n == 1).map(|(f, _)| f.clone()).collect();
    single.sort();
    assert!(count.values().all(|&n| n <= 2), "facet shared by more than two cells");
    assert_eq!(single, boundary);
}

fn mesh_volume(mesh: &Mesh) -> f64 {
    (0..mesh.num_cells()).map(|c| linalg::simplex_volume(mesh.dim, &mesh.cell_points(c))).sum()
}

#[test]
fn polytope_meshes_are_exact_and_conforming() {
    let cases = [
        (builtin("square", &[]), 1.0),
        (builtin("rectangle", &[("a", 1.0), ("b", 2.0)]), 2.0),
        (builtin("cube", &[]), 1.0),
        (builtin("double-prism", &[]), 1.0),
        (builtin("parallelogram", &[]), 1.0),
        (builtin("lshape", &[]), 3.0),
        (builtin("octahedron", &[("a", 2.0), ("b", 2.0), ("h", 1.0)]), 8.0 / 3.0),
    ];
    for (domain, volume) in cases {
        let mesh = generate_mesh(&domain, 0.2).unwrap();
        mesh.validate().unwrap();
        assert_conforming(&mesh);
        let v = mesh_volume(&mesh);
        assert!((v - volume).abs() < 1e-12 * volume, "{}: volume {v}", domain.name);
        assert!(mesh.h <= 1.5 * 0.2 + 1e-12, "{}: h = {}", domain.name, mesh.h);
        for c in 0..mesh.num_cells() {
            assert!(mesh.cell_volume(c) > 0.0);
        }
    }
}

#[test]
fn double_prism_boundary_normals() {
    let mesh = generate_mesh(&builtin("double-prism", &[]), 0.25).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let normals: [Vec3; 6] = [
        [-1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 1.0, 0.0],
        [-s, 0.0, s],
        [0.0, s, -s],
    ];
    let mut seen = [0.0; 6];
    for f in &mesh.boundary_facets {
        let p = mesh.facet_points(f);
        let n = linalg::normalize(linalg::cross(linalg::sub(p[1], p[0]), linalg::sub(p[2], p[0])));
        let k = normals
            .iter()
            .position(|m| linalg::dist(*m, n) < 1e-9)
            .unwrap_or_else(|| panic!("unexpected normal {n:?}"));
        seen[k] += mesh.facet_measure(f);
    }
    // wall areas are the integrals of the z-extent, e.g. ∫(1 - y) dy on x = 0
    let total: f64 = seen.iter().sum();
    assert!(seen.iter().all(|&a| a > 0.0));
    assert!((total - mesh.boundary_measure()).abs() < 1e-12);
    let expect = [0.5, 1.5, 1.5, 0.5, std::f64::consts::SQRT_2, std::f64::consts::SQRT_2];
    for (a, e) in seen.iter().zip(expect) {
        assert!((a - e).abs() < 1e-12, "{seen:?}");
    }
}

#[test]
fn boundary_facets_lie_on_their_faces() {
    for domain in [builtin("double-prism", &[]), builtin("octahedron", &[]), builtin("parallelogram", &[])] {
        let mesh = generate_mesh(&domain, 0.2).unwrap();
        let mut per_face: BTreeMap<usize, Vec3> = BTreeMap::new();
        for f in &mesh.boundary_facets {
            let n = *per_face.entry(f.face_id).or_insert(f.normal);
            assert!(linalg::dist(n, f.normal) < 1e-12, "face {} is not planar", f.face_id);
        }
        assert_eq!(per_face.len(), domain.face_count(), "{}", domain.name);
    }
}

#[test]
fn refinement_preserves_volume_and_halves_h() {
    for domain in [builtin("square", &[]), builtin("double-prism", &[]), builtin("cube", &[])] {
        let coarse = generate_mesh(&domain, 0.4).unwrap();
        let fine = refine(&coarse);
        fine.validate().unwrap();
        assert_conforming(&fine);
        assert_eq!(fine.num_cells(), coarse.num_cells() << domain.dim);
        assert!((mesh_volume(&fine) - mesh_volume(&coarse)).abs() < 1e-12);
        assert!(fine.h <= 0.5 * coarse.h * 1.8, "{}: {} vs {}", domain.name, fine.h, coarse.h);
    }
}

#[test]
fn disk_volume_converges_quadratically() {
    let disk = builtin("disk", &[("r", 1.0)]);
    let err: Vec<(f64, f64)> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&h| {
            let m = generate_mesh(&disk, h).unwrap();
            (m.h, (std::f64::consts::PI - mesh_volume(&m)).abs())
        })
        .collect();
    for w in err.windows(2) {
        let order = (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln();
        assert!(order > 1.7, "order {order} from {err:?}");
    }
    // boundary vertices sit on the circle
    let m = generate_mesh(&disk, 0.1).unwrap();
    for f in &m.boundary_facets {
        for p in m.facet_points(f) {
            assert!((linalg::norm(p) - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn centred_domains_are_mirror_symmetric() {
    for domain in [builtin("square", &[("centered", 1.0), ("a", 2.0)]), builtin("octahedron", &[])] {
        let mesh = generate_mesh(&domain, 0.2).unwrap();
        let key = |p: Vec3| p.map(|x| (x * 1e9).round() as i64);
        let set: std::collections::HashSet<[i64; 3]> = mesh.vertices.iter().map(|p| key(*p)).collect();
        for axis in 0..domain.dim {
            for p in &mesh.vertices {
                let mut q = *p;
                q[axis] = -q[axis];
                assert!(set.contains(&key(q)), "{}: mirror of {p:?} in axis {axis}", domain.name);
            }
        }
    }
}

#[test]
fn mesh_text_round_trip() {
    let mesh = generate_mesh(&builtin("double-prism", &[]), 0.3).unwrap();
    let back = parse_mesh(&write_mesh(&mesh)).unwrap();
    assert_eq!(back, mesh);
}

#[test]
fn identical_inputs_give_identical_meshes() {
    let d = builtin("double-prism-truncated", &[("c", 0.3)]);
    assert_eq!(generate_mesh(&d, 0.2).unwrap(), generate_mesh(&d, 0.2).unwrap());
}
