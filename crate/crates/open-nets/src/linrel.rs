//! Linear relations: subspaces as steady-state behaviors.
//!
//! A relation `U ⇝ V` is a linear subspace of `U ⊕ V`, stored as an
//! orthonormal basis. Composition forms the joint constraint system on
//! `(u, v, w)`, takes its null space and projects out the middle
//! coordinates; equality is mutual projection of basis vectors. One rank
//! cutoff (relative to the largest singular value) controls every
//! rank-revealing step and can be overridden per call.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Default relative rank cutoff for singular values.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// A linear subspace of `R^ambient`, stored as a matrix whose columns are
/// an orthonormal basis (possibly zero columns for the zero subspace).
#[derive(Debug, Clone)]
pub struct Subspace {
    ambient_dim: usize,
    basis: DMatrix<f64>,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: DMatrix::zeros(ambient_dim, 0),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: DMatrix::identity(ambient_dim, ambient_dim),
        }
    }

    /// Orthonormalizes the span of the given columns via SVD, dropping
    /// directions with singular value below `tol · σ_max`.
    pub fn from_span(columns: &DMatrix<f64>, tol: f64) -> Self {
        let ambient_dim = columns.nrows();
        if columns.ncols() == 0 || ambient_dim == 0 {
            return Subspace::zero(ambient_dim);
        }
        let svd = columns.clone().svd(true, false);
        let u = svd.u.as_ref().expect("left singular vectors requested");
        let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        if smax == 0.0 {
            return Subspace::zero(ambient_dim);
        }
        let keep: Vec<usize> = svd
            .singular_values
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > tol * smax)
            .map(|(k, _)| k)
            .collect();
        let mut basis = DMatrix::zeros(ambient_dim, keep.len());
        for (col, &k) in keep.iter().enumerate() {
            basis.set_column(col, &u.column(k));
        }
        Subspace { ambient_dim, basis }
    }

    /// Null space of a constraint matrix, singular values below
    /// `tol · σ_max` treated as zero.
    pub fn null_space(constraints: &DMatrix<f64>, tol: f64) -> Self {
        let n = constraints.ncols();
        if n == 0 {
            return Subspace::zero(0);
        }
        if constraints.nrows() == 0 {
            return Subspace::full(n);
        }
        // Pad with zero rows so the thin SVD carries all n right vectors.
        let m = constraints.nrows();
        let padded = if m < n {
            let mut p = DMatrix::zeros(n, n);
            p.view_mut((0, 0), (m, n)).copy_from(constraints);
            p
        } else {
            constraints.clone()
        };
        let svd = padded.svd(false, true);
        let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
        let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        let mut cols: Vec<DVector<f64>> = Vec::new();
        for k in 0..v_t.nrows() {
            let sv = if k < svd.singular_values.len() {
                svd.singular_values[k]
            } else {
                0.0
            };
            if smax == 0.0 || sv <= tol * smax {
                cols.push(v_t.row(k).transpose());
            }
        }
        let mut basis = DMatrix::zeros(n, cols.len());
        for (i, c) in cols.iter().enumerate() {
            basis.set_column(i, c);
        }
        Subspace {
            ambient_dim: n,
            basis,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Orthogonal projection onto the subspace.
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.basis * (self.basis.transpose() * v)
    }

    /// Membership by projection residual: `‖v − P v‖ ≤ tol · max(‖v‖, 1)`.
    pub fn contains(&self, v: &DVector<f64>, tol: f64) -> bool {
        let r = v - self.project(v);
        r.norm() <= tol * v.norm().max(1.0)
    }
}

/// A linear relation from `R^dom_dim` to `R^cod_dim`: a subspace of the
/// direct sum, domain coordinates first.
#[derive(Debug, Clone)]
pub struct LinRel {
    pub dom_dim: usize,
    pub cod_dim: usize,
    pub space: Subspace,
}

impl LinRel {
    pub fn new(dom_dim: usize, cod_dim: usize, space: Subspace) -> Result<Self> {
        if space.ambient_dim() != dom_dim + cod_dim {
            return Err(Error::DimensionMismatch {
                expected: dom_dim + cod_dim,
                found: space.ambient_dim(),
            });
        }
        Ok(LinRel {
            dom_dim,
            cod_dim,
            space,
        })
    }

    pub fn identity(n: usize) -> Self {
        from_graph_of_map(&DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn contains(&self, v: &DVector<f64>, tol: f64) -> bool {
        self.space.contains(v, tol)
    }
}

/// Composite relation `{(u, w) : ∃v, (u,v) ∈ l1, (v,w) ∈ l2}`.
pub fn compose_rel(l1: &LinRel, l2: &LinRel, tol: f64) -> Result<LinRel> {
    if l1.cod_dim != l2.dom_dim {
        return Err(Error::DimensionMismatch {
            expected: l1.cod_dim,
            found: l2.dom_dim,
        });
    }
    let (du, dv, dw) = (l1.dom_dim, l1.cod_dim, l2.cod_dim);
    let total = du + dv + dw;

    // (x ∈ L) ⟺ (I − BBᵀ)x = 0; stack both memberships over (u, v, w).
    let b1 = l1.space.basis();
    let b2 = l2.space.basis();
    let c1 = DMatrix::identity(du + dv, du + dv) - b1 * b1.transpose();
    let c2 = DMatrix::identity(dv + dw, dv + dw) - b2 * b2.transpose();

    let mut constraints = DMatrix::zeros(du + dv + dv + dw, total);
    constraints.view_mut((0, 0), (du + dv, du + dv)).copy_from(&c1);
    constraints
        .view_mut((du + dv, du), (dv + dw, dv + dw))
        .copy_from(&c2);

    let joint = Subspace::null_space(&constraints, tol);

    // project out the middle block
    let mut proj = DMatrix::zeros(du + dw, total);
    for k in 0..du {
        proj[(k, k)] = 1.0;
    }
    for k in 0..dw {
        proj[(du + k, du + dv + k)] = 1.0;
    }
    let projected = &proj * joint.basis();
    LinRel::new(du, dw, Subspace::from_span(&projected, tol))
}

/// True iff both relations have the same dimensions and each basis vector
/// of one lies in the other within `tol`.
pub fn equal_rel(l1: &LinRel, l2: &LinRel, tol: f64) -> bool {
    if l1.dom_dim != l2.dom_dim || l1.cod_dim != l2.cod_dim {
        return false;
    }
    if l1.dim() != l2.dim() {
        return false;
    }
    for k in 0..l1.dim() {
        let b: DVector<f64> = l1.space.basis().column(k).into();
        if !l2.space.contains(&b, tol) {
            return false;
        }
    }
    for k in 0..l2.dim() {
        let b: DVector<f64> = l2.space.basis().column(k).into();
        if !l1.space.contains(&b, tol) {
            return false;
        }
    }
    true
}

/// Tensor of relations by direct sum, ordered `(U ⊕ U') ⇝ (V ⊕ V')`.
pub fn direct_sum(l1: &LinRel, l2: &LinRel) -> LinRel {
    let (du1, dc1) = (l1.dom_dim, l1.cod_dim);
    let (du2, dc2) = (l2.dom_dim, l2.cod_dim);
    let total = du1 + du2 + dc1 + dc2;
    let mut basis = DMatrix::zeros(total, l1.dim() + l2.dim());
    for k in 0..l1.dim() {
        for r in 0..du1 {
            basis[(r, k)] = l1.space.basis()[(r, k)];
        }
        for r in 0..dc1 {
            basis[(du1 + du2 + r, k)] = l1.space.basis()[(du1 + r, k)];
        }
    }
    for k in 0..l2.dim() {
        for r in 0..du2 {
            basis[(du1 + r, l1.dim() + k)] = l2.space.basis()[(r, k)];
        }
        for r in 0..dc2 {
            basis[(du1 + du2 + dc1 + r, l1.dim() + k)] = l2.space.basis()[(du2 + r, k)];
        }
    }
    // blocks have disjoint support, so orthonormality is preserved
    LinRel {
        dom_dim: du1 + du2,
        cod_dim: dc1 + dc2,
        space: Subspace {
            ambient_dim: total,
            basis,
        },
    }
}

/// Relational transpose: swap domain and codomain blocks.
pub fn dagger(l: &LinRel) -> LinRel {
    let (du, dc) = (l.dom_dim, l.cod_dim);
    let mut basis = DMatrix::zeros(du + dc, l.dim());
    for k in 0..l.dim() {
        for r in 0..dc {
            basis[(r, k)] = l.space.basis()[(du + r, k)];
        }
        for r in 0..du {
            basis[(dc + r, k)] = l.space.basis()[(r, k)];
        }
    }
    LinRel {
        dom_dim: dc,
        cod_dim: du,
        space: Subspace {
            ambient_dim: du + dc,
            basis,
        },
    }
}

/// The graph `{(u, A u)}` of a linear map as a relation.
pub fn from_graph_of_map(a: &DMatrix<f64>) -> LinRel {
    let (m, n) = (a.nrows(), a.ncols());
    let mut span = DMatrix::zeros(n + m, n);
    for j in 0..n {
        span[(j, j)] = 1.0;
        for i in 0..m {
            span[(n + i, j)] = a[(i, j)];
        }
    }
    LinRel {
        dom_dim: n,
        cod_dim: m,
        space: Subspace::from_span(&span, DEFAULT_RANK_TOL),
    }
}

/// The solution set `{x : C x = 0}` as a subspace.
pub fn from_constraints(c: &DMatrix<f64>) -> Subspace {
    Subspace::null_space(c, DEFAULT_RANK_TOL)
}

/// Applies coordinate permutations to the domain and codomain blocks:
/// new domain coordinate `k` reads old coordinate `dom_perm[k]`.
pub fn permute_coordinates(l: &LinRel, dom_perm: &[usize], cod_perm: &[usize]) -> LinRel {
    assert_eq!(dom_perm.len(), l.dom_dim);
    assert_eq!(cod_perm.len(), l.cod_dim);
    let mut basis = DMatrix::zeros(l.dom_dim + l.cod_dim, l.dim());
    for k in 0..l.dim() {
        for (new, &old) in dom_perm.iter().enumerate() {
            basis[(new, k)] = l.space.basis()[(old, k)];
        }
        for (new, &old) in cod_perm.iter().enumerate() {
            basis[(l.dom_dim + new, k)] = l.space.basis()[(l.dom_dim + old, k)];
        }
    }
    LinRel {
        dom_dim: l.dom_dim,
        cod_dim: l.cod_dim,
        space: Subspace {
            ambient_dim: l.dom_dim + l.cod_dim,
            basis,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng as _, SeedableRng as _};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(m, n, |_, _| rng.gen_range(-2.0..2.0))
    }

    #[test]
    fn identity_composes_to_identity() {
        let id = LinRel::identity(3);
        let c = compose_rel(&id, &id, DEFAULT_RANK_TOL).unwrap();
        assert!(equal_rel(&c, &id, 1e-10));
    }

    #[test]
    fn graphs_compose_like_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = random_matrix(&mut rng, 3, 2); // A : R² → R³
            let b = random_matrix(&mut rng, 2, 3); // B : R³ → R²
            let la = from_graph_of_map(&a);
            let lb = from_graph_of_map(&b);
            let composite = compose_rel(&la, &lb, DEFAULT_RANK_TOL).unwrap();
            let expected = from_graph_of_map(&(&b * &a));
            assert!(equal_rel(&composite, &expected, 1e-8));
        }
    }

    #[test]
    fn composing_through_zero_overlap_gives_zero_relation() {
        // L = V × {0} ⊂ R² ⊕ R², then {0} × W
        let v_times_zero = LinRel::new(2, 2, {
            let mut m = DMatrix::zeros(4, 2);
            m[(0, 0)] = 1.0;
            m[(1, 1)] = 1.0;
            Subspace::from_span(&m, DEFAULT_RANK_TOL)
        })
        .unwrap();
        let zero_times_w = LinRel::new(2, 2, {
            let mut m = DMatrix::zeros(4, 2);
            m[(2, 0)] = 1.0;
            m[(3, 1)] = 1.0;
            Subspace::from_span(&m, DEFAULT_RANK_TOL)
        })
        .unwrap();
        let c = compose_rel(&v_times_zero, &zero_times_w, DEFAULT_RANK_TOL).unwrap();
        // relation is V × W on the outer coordinates: dimension 4
        assert_eq!(c.dim(), 4);
        // whereas composing the zero relation with itself is zero
        let z = LinRel::new(2, 2, Subspace::zero(4)).unwrap();
        let zz = compose_rel(&z, &z, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(zz.dim(), 0);
    }

    #[test]
    fn equality_is_basis_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_matrix(&mut rng, 2, 3);
        let l = from_graph_of_map(&a);
        // remix the basis by a random rotation of its columns
        let d = l.dim();
        let mix = {
            let raw = random_matrix(&mut rng, d, d);
            let qr = raw.qr();
            qr.q()
        };
        let remixed = LinRel {
            dom_dim: l.dom_dim,
            cod_dim: l.cod_dim,
            space: Subspace {
                ambient_dim: l.space.ambient_dim(),
                basis: l.space.basis() * mix,
            },
        };
        assert!(equal_rel(&l, &remixed, 1e-9));
        assert!(!equal_rel(&l, &LinRel::identity(l.dom_dim.max(l.cod_dim)), 1e-9) || l.dom_dim != l.cod_dim);
        // differing dimension is never equal
        let smaller = LinRel::new(l.dom_dim, l.cod_dim, Subspace::zero(l.dom_dim + l.cod_dim)).unwrap();
        assert!(!equal_rel(&l, &smaller, 1e-9));
    }

    #[test]
    fn direct_sum_identities_and_dims() {
        let z = LinRel::new(1, 1, Subspace::zero(2)).unwrap();
        assert_eq!(direct_sum(&z, &z).dim(), 0);
        let i2 = LinRel::identity(2);
        let i3 = LinRel::identity(3);
        let sum = direct_sum(&i2, &i3);
        assert!(equal_rel(&sum, &LinRel::identity(5), 1e-10));

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let a = from_graph_of_map(&random_matrix(&mut rng, 2, 3));
            let b = from_graph_of_map(&random_matrix(&mut rng, 1, 2));
            assert_eq!(direct_sum(&a, &b).dim(), a.dim() + b.dim());
        }
    }

    #[test]
    fn dagger_is_involutive_and_contravariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        assert!(equal_rel(&dagger(&LinRel::identity(3)), &LinRel::identity(3), 1e-10));
        for _ in 0..50 {
            let a = from_graph_of_map(&random_matrix(&mut rng, 3, 2));
            assert!(equal_rel(&dagger(&dagger(&a)), &a, 1e-10));
        }
        // membership view of dagger(graph A)
        let a = random_matrix(&mut rng, 3, 2);
        let la = dagger(&from_graph_of_map(&a));
        let u = DVector::from_column_slice(&[1.0, -2.0]);
        let v = &a * &u;
        let mut point = DVector::zeros(5);
        point.rows_mut(0, 3).copy_from(&v);
        point.rows_mut(3, 2).copy_from(&u);
        assert!(la.contains(&point, 1e-9));

        // dagger(L' ∘ L) = dagger(L) ∘ dagger(L')
        for _ in 0..20 {
            let l1 = from_graph_of_map(&random_matrix(&mut rng, 3, 2));
            let l2 = from_graph_of_map(&random_matrix(&mut rng, 2, 3));
            let lhs = dagger(&compose_rel(&l1, &l2, DEFAULT_RANK_TOL).unwrap());
            let rhs = compose_rel(&dagger(&l2), &dagger(&l1), DEFAULT_RANK_TOL).unwrap();
            assert!(equal_rel(&lhs, &rhs, 1e-8));
        }
    }

    #[test]
    fn graph_and_constraint_constructors() {
        let zero_map = DMatrix::zeros(2, 3);
        let l = from_graph_of_map(&zero_map);
        assert_eq!(l.dim(), 3); // U × {0}
        let mut point = DVector::zeros(5);
        point[0] = 1.0;
        assert!(l.contains(&point, 1e-10));

        let id_constraints = DMatrix::identity(3, 3);
        assert_eq!(from_constraints(&id_constraints).dim(), 0);

        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let c = random_matrix(&mut rng, 2, 5);
        let null = from_constraints(&c);
        for k in 0..null.dim() {
            let v: DVector<f64> = null.basis().column(k).into();
            assert!((&c * &v).norm() <= 1e-10 * c.norm());
        }
    }

    #[test]
    fn membership_invariance_under_equal_variants() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let a = random_matrix(&mut rng, 3, 3);
        let l = from_graph_of_map(&a);
        for _ in 0..1000 {
            // sample a point of L and check it against a remixed variant
            let coeff = DVector::from_fn(l.dim(), |_, _| rng.gen_range(-1.0..1.0));
            let point = l.space.basis() * coeff;
            assert!(l.contains(&point, 1e-9));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn composition_is_associative(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d0 = rng.gen_range(1..=4);
            let d1 = rng.gen_range(1..=4);
            let d2 = rng.gen_range(1..=4);
            let d3 = rng.gen_range(1..=4);
            let l1 = from_graph_of_map(&random_matrix(&mut rng, d1, d0));
            let l2 = from_graph_of_map(&random_matrix(&mut rng, d2, d1));
            let l3 = from_graph_of_map(&random_matrix(&mut rng, d3, d2));
            let left = compose_rel(&compose_rel(&l1, &l2, DEFAULT_RANK_TOL).unwrap(), &l3, DEFAULT_RANK_TOL).unwrap();
            let right = compose_rel(&l1, &compose_rel(&l2, &l3, DEFAULT_RANK_TOL).unwrap(), DEFAULT_RANK_TOL).unwrap();
            prop_assert!(equal_rel(&left, &right, 1e-8));
        }

        #[test]
        fn identity_laws(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = rng.gen_range(1..=5);
            let n = rng.gen_range(1..=5);
            let l = from_graph_of_map(&random_matrix(&mut rng, m, n));
            let left = compose_rel(&LinRel::identity(n), &l, DEFAULT_RANK_TOL).unwrap();
            let right = compose_rel(&l, &LinRel::identity(m), DEFAULT_RANK_TOL).unwrap();
            prop_assert!(equal_rel(&left, &l, 1e-8));
            prop_assert!(equal_rel(&right, &l, 1e-8));
        }
    }
}
