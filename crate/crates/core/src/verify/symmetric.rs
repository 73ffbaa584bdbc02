use std::collections::HashMap;

use serde::Serialize;

use super::{check_hot_spots, check_trichotomy, interior_gradients, HotSpotsVerdict, Status, TrichotomyVerdict};
use crate::eigensolve::EigOptions;
use crate::error::{Error, Result};
use crate::fem_scalar::{assemble_scalar_with, gradient_field, recovered_gradient, solve_scalar_spectrum, ScalarEigenfunction, ScalarSystem};
use crate::geometry::{detect_symmetries, half_restriction, is_lip, orthant_restriction, orthants, DomainSpec, LipVerdict};
use crate::linalg;
use crate::mesh::{generate_mesh_with, reflect_mesh, Mesh, MeshOptions};
use crate::sparse::m_inner;

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricOptions {
    pub mesh: MeshOptions,
    pub eig: EigOptions,
    pub sign_tol: f64,
    pub zero_tol: f64,
    /// Relative tolerance of the half-domain / orthant agreement.
    pub agreement_tol: f64,
    /// Also solve the full Neumann problem and extract its smallest
    /// antisymmetric eigenvalue.
    pub full_domain: bool,
}

impl SymmetricOptions {
    pub fn new(target_h: f64) -> Self {
        SymmetricOptions {
            mesh: MeshOptions::new(target_h),
            eig: EigOptions::with_k(2),
            sign_tol: super::SIGN_TOL,
            zero_tol: super::ZERO_TOL,
            agreement_tol: 1e-2,
            full_domain: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrthantSigns {
    pub orthant: Vec<i8>,
    /// Unnormalized sign verdicts of the reconstructed gradient on the cells
    /// of this orthant.
    pub directions: TrichotomyVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetricReport {
    /// 1-based axis of antisymmetry.
    pub axis: usize,
    pub orthant: Vec<i8>,
    pub orthant_lip: LipVerdict,
    pub half_eigenvalue: f64,
    pub orthant_eigenvalue: f64,
    /// `|μ_half - μ_orthant| / μ_half`.
    pub agreement: f64,
    pub agreement_tol: f64,
    pub half_mesh_h: f64,
    pub orthant_mesh_h: f64,
    pub orthant_trichotomy: TrichotomyVerdict,
    pub reconstruction_hot_spots: HotSpotsVerdict,
    pub orthant_signs: Vec<OrthantSigns>,
    /// Smallest eigenvalue of the full Neumann problem whose eigenfunction is
    /// antisymmetric in the axis.
    pub full_domain_antisymmetric: Option<f64>,
    pub status: Status,
}

fn first_mode(mesh: &Mesh, opts: &SymmetricOptions) -> Result<(ScalarSystem, ScalarEigenfunction)> {
    let sys = assemble_scalar_with(mesh, opts.eig.exec)?;
    let k = opts.eig.k.clamp(1, sys.num_dofs());
    let mut spec = solve_scalar_spectrum(mesh, &sys, &EigOptions { k, ..opts.eig })?;
    Ok((sys, spec.swap_remove(0)))
}

/// First orthant (in [`orthants`] order) whose piece is lip, preferring
/// pieces that are lip without a signed permutation. The piece carries
/// Dirichlet data on `{x_j = 0}`.
fn find_lip_orthant(domain: &DomainSpec, j: usize) -> Result<Option<(Vec<i8>, DomainSpec, LipVerdict)>> {
    for search in [false, true] {
        for o in orthants(domain.dim) {
            let q = orthant_restriction(domain, &o, j)?;
            let verdict = is_lip(&q, search)?;
            if verdict.is_lip {
                return Ok(Some((o, q, verdict)));
            }
        }
    }
    Ok(None)
}

/// Sign pattern of an orthant whose intersection with the domain is lip.
pub fn lip_orthant(domain: &DomainSpec) -> Result<Option<Vec<i8>>> {
    Ok(find_lip_orthant(domain, 0)?.map(|(o, _, _)| o))
}

/// Reduction of a fully symmetric domain to a half-domain and an orthant with
/// Dirichlet data on `{x_j = 0}`, followed by reconstruction on the whole
/// domain by reflection. `j` is 0-based.
pub fn symmetric_pipeline(domain: &DomainSpec, j: usize, opts: &SymmetricOptions) -> Result<SymmetricReport> {
    let dim = domain.dim;
    if j >= dim {
        return Err(Error::InvalidInput(format!("axis {} out of range for dimension {dim}", j + 1)));
    }
    let sym = detect_symmetries(domain)?;
    if sym.len() != dim {
        return Err(Error::Precondition(format!(
            "the reduction needs reflection symmetry in every coordinate; found {:?}",
            sym.iter().map(|a| a + 1).collect::<Vec<_>>()
        )));
    }
    let half = half_restriction(domain, j, 1)?;
    let half_mesh = generate_mesh_with(&half, &opts.mesh)?;
    let (_, half_mode) = first_mode(&half_mesh, opts)?;

    let chosen = find_lip_orthant(domain, j)?;
    let Some((orthant, piece, orthant_lip)) = chosen else {
        return Err(Error::Precondition(
            "no orthant piece of the domain is a lip domain, so the reflection reduction does not apply".into(),
        ));
    };
    let piece_mesh = generate_mesh_with(&piece, &opts.mesh)?;
    let (_, mode) = first_mode(&piece_mesh, opts)?;
    let agreement = (half_mode.eigenvalue - mode.eigenvalue).abs() / half_mode.eigenvalue.abs();
    let orthant_trichotomy = check_trichotomy(dim, &interior_gradients(&piece_mesh, &mode.gradients), opts.sign_tol, opts.zero_tol, true);

    let axes: Vec<usize> = (0..dim).collect();
    let (full_mesh, origin) = reflect_mesh(&piece_mesh, &axes, domain)?;
    let values: Vec<f64> = origin.iter().map(|o| o.sign(j) * mode.values[o.source]).collect();
    let reconstruction_hot_spots = check_hot_spots(&full_mesh, &values, mode.eigenvalue)?;
    let grads = recovered_gradient(&full_mesh, &gradient_field(&full_mesh, &values));
    let boundary = full_mesh.boundary_vertex_mask();
    let orthant_signs = orthants(dim)
        .into_iter()
        .map(|s| {
            // interior vertices strictly inside the orthant
            let cells: Vec<linalg::Vec3> = (0..full_mesh.num_vertices())
                .filter(|&v| !boundary[v] && (0..dim).all(|i| full_mesh.vertices[v][i] * s[i] as f64 > 0.0))
                .map(|v| grads[v])
                .collect();
            OrthantSigns {
                directions: check_trichotomy(dim, &cells, opts.sign_tol, opts.zero_tol, false),
                orthant: s,
            }
        })
        .collect();

    let full_domain_antisymmetric = if opts.full_domain {
        let mesh = generate_mesh_with(domain, &opts.mesh)?;
        let sys = assemble_scalar_with(&mesh, opts.eig.exec)?;
        let k = (2 * dim + 2).min(sys.num_dofs());
        let spec = solve_scalar_spectrum(&mesh, &sys, &EigOptions { k, ..opts.eig })?;
        antisymmetric_eigenvalue(&mesh, &sys, &spec, j)
    } else {
        None
    };

    let ok = agreement <= opts.agreement_tol && !orthant_trichotomy.has_mixed() && reconstruction_hot_spots.pass;
    Ok(SymmetricReport {
        axis: j + 1,
        orthant,
        orthant_lip,
        half_eigenvalue: half_mode.eigenvalue,
        orthant_eigenvalue: mode.eigenvalue,
        agreement,
        agreement_tol: opts.agreement_tol,
        half_mesh_h: half_mesh.h,
        orthant_mesh_h: piece_mesh.h,
        orthant_trichotomy,
        reconstruction_hot_spots,
        orthant_signs,
        full_domain_antisymmetric,
        status: if ok { Status::Pass } else { Status::Fail },
    })
}

/// Smallest Rayleigh quotient among the `x_j`-antisymmetric parts of the
/// given eigenfunctions (those carrying at least 1% of the squared mass norm). The
/// mesh must be mirror symmetric in `x_j`; returns `None` otherwise or when
/// no eigenfunction has a sizeable antisymmetric part.
pub fn antisymmetric_eigenvalue(mesh: &Mesh, sys: &ScalarSystem, spec: &[ScalarEigenfunction], j: usize) -> Option<f64> {
    let key = |p: linalg::Vec3| -> [u64; 3] { [(p[0] + 0.0).to_bits(), (p[1] + 0.0).to_bits(), (p[2] + 0.0).to_bits()] };
    let index: HashMap<[u64; 3], usize> = mesh.vertices.iter().enumerate().map(|(v, p)| (key(*p), v)).collect();
    let mirror: Option<Vec<usize>> = mesh
        .vertices
        .iter()
        .map(|p| {
            let mut q = *p;
            q[j] = -q[j];
            index.get(&key(q)).copied()
        })
        .collect();
    let mirror = mirror?;
    let (k, m) = (&sys.full_stiffness, &sys.full_mass);
    spec.iter()
        .filter_map(|psi| {
            let a: Vec<f64> = (0..psi.values.len()).map(|v| 0.5 * (psi.values[v] - psi.values[mirror[v]])).collect();
            let na = m_inner(m, &a, &a);
            let np = m_inner(m, &psi.values, &psi.values);
            (na >= 0.01 * np && na > 0.0).then(|| m_inner(k, &a, &a) / na)
        })
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |x| x.min(v))))
}
