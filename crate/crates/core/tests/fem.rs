use std::collections::BTreeMap;
use std::f64::consts::PI;

use faer::{Mat, Side};
use hotspots_core::eigensolve::{smallest_eigs, EigOptions};
use hotspots_core::fem_scalar::{assemble_scalar, assemble_scalar_with, solve_scalar_spectrum};
use hotspots_core::fem_vector::{assemble_vector, assemble_vector_with, project_admissible, random_admissible, solve_vector_spectrum};
use hotspots_core::geometry::{builtin_domain, Bc, Builtin, DomainSpec};
use hotspots_core::mesh::{generate_mesh, refine, MeshOptions};
use hotspots_core::par::Exec;
use hotspots_core::sparse::{m_inner, CsrMatrix};
use hotspots_core::verify::{convergence_study, Quantity};

fn builtin(name: &str, params: &[(&str, f64)]) -> DomainSpec {
    let p: BTreeMap<String, f64> = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    builtin_domain(&Builtin::from_name(name, &p).unwrap()).unwrap()
}

/// Eigenvalues of `K x = λ M x` through `M^{-1/2} K M^{-1/2}`.
fn dense_oracle(k: &CsrMatrix, m: &CsrMatrix) -> Vec<f64> {
    let n = k.nrows;
    let (kd, md) = (k.to_dense(), m.to_dense());
    let mm = Mat::<f64>::from_fn(n, n, |i, j| md[i][j]);
    let km = Mat::<f64>::from_fn(n, n, |i, j| kd[i][j]);
    let eig = mm.self_adjoint_eigen(Side::Lower).unwrap();
    let (u, s) = (eig.U(), eig.S().column_vector());
    let root = Mat::<f64>::from_fn(n, n, |i, j| u[(i, j)] / s[j].sqrt());
    let a = root.transpose() * &km * &root;
    let a = Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let mut v = a.self_adjoint_eigenvalues(Side::Lower).unwrap();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn assembled_matrices_are_symmetric() {
    for domain in [builtin("square", &[]), builtin("double-prism", &[]), builtin("disk", &[])] {
        let mesh = generate_mesh(&domain, 0.2).unwrap();
        let s = assemble_scalar(&mesh).unwrap();
        assert!(s.stiffness.symmetry_error() <= 1e-14, "{}", domain.name);
        assert!(s.mass.symmetry_error() <= 1e-14);
        // constants lie in the kernel of the Neumann stiffness
        let ones = vec![1.0; s.num_dofs()];
        assert!(s.stiffness.mul(&ones).iter().all(|r| r.abs() < 1e-12));
        assert!((m_inner(&s.mass, &ones, &ones) - mesh.total_volume()).abs() < 1e-12);
        let v = assemble_vector(&mesh).unwrap();
        assert!(v.stiffness.symmetry_error() <= 1e-14);
        assert!(v.mass.symmetry_error() <= 1e-14);
    }
}

#[test]
fn assembly_does_not_depend_on_execution_policy() {
    let mesh = generate_mesh(&builtin("cube", &[]), 0.2).unwrap();
    let a = assemble_scalar_with(&mesh, Exec::Sequential).unwrap();
    let b = assemble_scalar_with(&mesh, Exec::Parallel).unwrap();
    assert_eq!(a.stiffness, b.stiffness);
    assert_eq!(a.mass, b.mass);
    let a = assemble_vector_with(&mesh, Exec::Sequential).unwrap();
    let b = assemble_vector_with(&mesh, Exec::Parallel).unwrap();
    assert_eq!(a.stiffness, b.stiffness);
}

#[test]
fn sparse_solver_matches_dense_oracle() {
    for domain in [builtin("square", &[]), builtin("double-prism", &[])] {
        let mesh = generate_mesh(&domain, if domain.dim == 2 { 1.0 / 24.0 } else { 0.15 }).unwrap();
        let sys = assemble_scalar(&mesh).unwrap();
        assert!(sys.num_dofs() > 400, "{} dofs only", sys.num_dofs());
        let spec = smallest_eigs(&sys.stiffness, &sys.mass, &EigOptions::with_k(8)).unwrap();
        let exact = dense_oracle(&sys.stiffness, &sys.mass);
        for (a, b) in spec.values.iter().zip(&exact) {
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0), "{}: {a} vs {b}", domain.name);
        }
        assert!(spec.max_residual() <= 1e-9);
        for i in 0..spec.len() {
            for j in 0..spec.len() {
                let g = m_inner(&sys.mass, &spec.vectors[i], &spec.vectors[j]);
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g - e).abs() <= 1e-8, "gram[{i}][{j}] = {g}");
            }
        }
    }
}

#[test]
fn refinement_lowers_every_eigenvalue() {
    let coarse = generate_mesh(&builtin("double-prism", &[]), 0.3).unwrap();
    let fine = refine(&coarse);
    let solve = |m| {
        let s = assemble_scalar(m).unwrap();
        solve_scalar_spectrum(m, &s, &EigOptions::with_k(6)).unwrap()
    };
    for (c, f) in solve(&coarse).iter().zip(&solve(&fine)).skip(1) {
        assert!(f.eigenvalue <= c.eigenvalue * (1.0 + 1e-10), "{} > {}", f.eigenvalue, c.eigenvalue);
    }
}

#[test]
fn scalar_eigenvalues_converge_at_second_order() {
    let cases = [(builtin("square", &[]), 1.0 / 8.0), (builtin("cube", &[]), 1.0 / 4.0)];
    for (domain, h) in cases {
        let study = convergence_study(
            &domain,
            Quantity::ScalarMu2,
            &MeshOptions::new(h),
            3,
            &EigOptions::with_k(4),
            Some(PI * PI),
        )
        .unwrap();
        for order in study.orders() {
            assert!((1.8..=2.2).contains(&order), "{}: orders {:?}", domain.name, study.orders());
        }
    }
}

#[test]
fn mixed_conditions_remove_the_constant() {
    let domain = builtin("square", &[]).with_bc(0, Bc::Dirichlet).unwrap();
    let mesh = generate_mesh(&domain, 1.0 / 16.0).unwrap();
    let sys = assemble_scalar(&mesh).unwrap();
    assert!(sys.has_dirichlet());
    let spec = solve_scalar_spectrum(&mesh, &sys, &EigOptions::with_k(2)).unwrap();
    assert!((spec[0].eigenvalue - PI * PI / 4.0).abs() < 0.01 * PI * PI / 4.0);
    for f in &mesh.boundary_facets {
        if f.face_id == 0 {
            assert!(f.verts(2).iter().all(|&v| spec[0].values[v] == 0.0));
        }
    }
}

#[test]
fn vector_eigenfields_are_admissible() {
    let mesh = generate_mesh(&builtin("double-prism", &[]), 0.25).unwrap();
    let sys = assemble_vector(&mesh).unwrap();
    let fields = solve_vector_spectrum(&sys, &EigOptions::with_k(4)).unwrap();
    for f in &fields {
        assert!(sys.constraint_violation(&f.values) < 1e-10);
        assert!(f.residual <= 1e-9);
        assert!((sys.rayleigh_quotient(&f.values) - f.eigenvalue).abs() < 1e-8 * f.eigenvalue);
    }
    for u in random_admissible(&sys, 3, 7) {
        assert!(sys.constraint_violation(&u) < 1e-10);
        let p = project_admissible(&sys, &u);
        let diff: f64 = p.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-10);
    }
}
