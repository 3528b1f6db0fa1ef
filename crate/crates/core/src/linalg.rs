//! Dense complex linear algebra: norms, block operator matrices with the two
//! leg-tensor products, direct sums, spectra and the unitary intertwiner search.

use nalgebra::linalg::{Schur, SVD};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Dense complex matrix. Every operator in the crate is one of these.
pub type CMat = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn scalar(z: Complex64) -> CMat {
    CMat::from_element(1, 1, z)
}

pub fn diag(entries: &[Complex64]) -> CMat {
    CMat::from_diagonal(&nalgebra::DVector::from_column_slice(entries))
}

pub fn real_diag(entries: &[f64]) -> CMat {
    CMat::from_fn(entries.len(), entries.len(), |i, j| if i == j { Complex64::new(entries[i], 0.0) } else { ZERO })
}

/// `a ⊗ b` with the first factor on the outer index: `(a ⊗ b)[(i,k),(j,l)] = a[i,j] b[k,l]`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn ensure_square(a: &CMat) -> Result<usize> {
    if a.nrows() == a.ncols() {
        Ok(a.nrows())
    } else {
        Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() })
    }
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    a.singular_values().iter().copied().collect()
}

/// Largest singular value.
pub fn op_norm(a: &CMat) -> f64 {
    singular_values(a).into_iter().fold(0.0, f64::max)
}

/// Sum of singular values.
pub fn trace_norm(a: &CMat) -> Result<f64> {
    ensure_square(a)?;
    Ok(singular_values(a).into_iter().sum())
}

pub fn inverse(a: &CMat) -> Result<CMat> {
    ensure_square(a)?;
    a.clone().try_inverse().ok_or(Error::Singular)
}

pub fn is_zero(a: &CMat) -> bool {
    a.iter().all(|z| *z == ZERO)
}

/// Block-diagonal assembly.
pub fn direct_sum(mats: &[CMat]) -> CMat {
    let rows: usize = mats.iter().map(|m| m.nrows()).sum();
    let cols: usize = mats.iter().map(|m| m.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for m in mats {
        out.view_mut((r, c), (m.nrows(), m.ncols())).copy_from(m);
        r += m.nrows();
        c += m.ncols();
    }
    out
}

/// Unitary factor of the polar decomposition `x = U |x|`, together with the
/// smallest and largest singular values of `x`.
pub fn polar_unitary(x: &CMat) -> Result<(CMat, f64, f64)> {
    ensure_square(x)?;
    let svd = SVD::new(x.clone(), true, true);
    let (u, v_t) = match (&svd.u, &svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Internal("SVD did not return singular vectors".into())),
    };
    let smin = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    Ok((u * v_t, smin, smax))
}

/// An `n×n` matrix whose entries are `d×d` operators: an element of
/// `M_n ⊗ B(ℂ^d)`. Blocks are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOpMat {
    outer: usize,
    dim: usize,
    blocks: Vec<CMat>,
}

impl BlockOpMat {
    pub fn new(outer: usize, dim: usize, blocks: Vec<CMat>) -> Result<Self> {
        if blocks.len() != outer * outer {
            return Err(Error::DimensionMismatch(format!(
                "expected {} blocks for outer size {outer}, got {}",
                outer * outer,
                blocks.len()
            )));
        }
        if let Some(b) = blocks.iter().find(|b| b.nrows() != dim || b.ncols() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "block of shape {}x{} in a block matrix of inner dimension {dim}",
                b.nrows(),
                b.ncols()
            )));
        }
        Ok(Self { outer, dim, blocks })
    }

    pub fn from_fn(outer: usize, dim: usize, mut f: impl FnMut(usize, usize) -> CMat) -> Result<Self> {
        let mut blocks = Vec::with_capacity(outer * outer);
        for i in 0..outer {
            for j in 0..outer {
                blocks.push(f(i, j));
            }
        }
        Self::new(outer, dim, blocks)
    }

    /// Blocks `δ_ij I_dim`.
    pub fn identity(outer: usize, dim: usize) -> Self {
        let blocks = (0..outer * outer)
            .map(|k| if k / outer == k % outer { identity(dim) } else { CMat::zeros(dim, dim) })
            .collect();
        Self { outer, dim, blocks }
    }

    /// A scalar matrix viewed as having `1×1` operator entries.
    pub fn from_scalar(m: &CMat) -> Result<Self> {
        let n = ensure_square(m)?;
        Self::from_fn(n, 1, |i, j| scalar(m[(i, j)]))
    }

    /// Inverse of [`BlockOpMat::to_flat`].
    pub fn from_flat(outer: usize, dim: usize, flat: &CMat) -> Result<Self> {
        if flat.nrows() != outer * dim || flat.ncols() != outer * dim {
            return Err(Error::DimensionMismatch(format!(
                "flat matrix {}x{} does not split into {outer}x{outer} blocks of size {dim}",
                flat.nrows(),
                flat.ncols()
            )));
        }
        Self::from_fn(outer, dim, |i, j| flat.view((i * dim, j * dim), (dim, dim)).into_owned())
    }

    #[inline]
    pub fn outer(&self) -> usize {
        self.outer
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn block(&self, i: usize, j: usize) -> &CMat {
        &self.blocks[i * self.outer + j]
    }

    #[inline]
    pub fn block_mut(&mut self, i: usize, j: usize) -> &mut CMat {
        &mut self.blocks[i * self.outer + j]
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    /// The `(outer·dim)`-square matrix with block `(i,j)` at rows `i·dim..`,
    /// columns `j·dim..`.
    pub fn to_flat(&self) -> CMat {
        let n = self.outer * self.dim;
        let mut flat = CMat::zeros(n, n);
        for i in 0..self.outer {
            for j in 0..self.outer {
                flat.view_mut((i * self.dim, j * self.dim), (self.dim, self.dim)).copy_from(self.block(i, j));
            }
        }
        flat
    }

    /// The `dim²` scalar `outer×outer` matrices `M^{(k,l)}` with
    /// `M^{(k,l)}[i,j] = block(i,j)[k,l]`, ordered by `(k,l)` row-major.
    ///
    /// A scalar matrix `U` satisfies `(U ⊗ I) X = Y (U ⊗ I)` iff
    /// `U X^{(k,l)} = Y^{(k,l)} U` for every `(k,l)`.
    pub fn scalar_slices(&self) -> Vec<CMat> {
        let mut out = Vec::with_capacity(self.dim * self.dim);
        for k in 0..self.dim {
            for l in 0..self.dim {
                out.push(CMat::from_fn(self.outer, self.outer, |i, j| self.block(i, j)[(k, l)]));
            }
        }
        out
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &BlockOpMat) -> Result<f64> {
        if self.outer != other.outer || self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "({}, {}) vs ({}, {})",
                self.outer, self.dim, other.outer, other.dim
            )));
        }
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max))
    }

    pub fn op_norm(&self) -> f64 {
        op_norm(&self.to_flat())
    }
}

/// `u ⊤ v = u₁₃ v₂₃`: block `((i,k),(j,l))` is `u_ij · v_kl`, with the outer
/// index `(i,k)` flattened as `i·m + k`.
pub fn top_tensor(u: &BlockOpMat, v: &BlockOpMat) -> Result<BlockOpMat> {
    if u.dim != v.dim {
        return Err(Error::DimensionMismatch(format!(
            "top tensor needs a common algebra, got inner dimensions {} and {}",
            u.dim, v.dim
        )));
    }
    let (n, m) = (u.outer, v.outer);
    BlockOpMat::from_fn(n * m, u.dim, |row, col| {
        let (i, k) = (row / m, row % m);
        let (j, l) = (col / m, col % m);
        u.block(i, j) * v.block(k, l)
    })
}

/// `u ⊥ v = u₁₂ v₁₃`: block `(i,l)` is `Σ_j u_ij ⊗ v_jl`.
pub fn bot_tensor(u: &BlockOpMat, v: &BlockOpMat) -> Result<BlockOpMat> {
    if u.outer != v.outer {
        return Err(Error::DimensionMismatch(format!(
            "bot tensor needs equal outer sizes, got {} and {}",
            u.outer, v.outer
        )));
    }
    let n = u.outer;
    let dim = u.dim * v.dim;
    BlockOpMat::from_fn(n, dim, |i, l| {
        let mut acc = CMat::zeros(dim, dim);
        for j in 0..n {
            acc += kron(u.block(i, j), v.block(j, l));
        }
        acc
    })
}

/// Direct sum on the inner (operator) leg: block `(i,j)` is `⊕_k u^k_ij`.
pub fn direct_sum_blocks(list: &[BlockOpMat]) -> Result<BlockOpMat> {
    let first = list
        .first()
        .ok_or_else(|| Error::DimensionMismatch("direct sum of an empty list".into()))?;
    if let Some(bad) = list.iter().find(|u| u.outer != first.outer) {
        return Err(Error::DimensionMismatch(format!(
            "direct sum needs equal outer sizes, got {} and {}",
            first.outer, bad.outer
        )));
    }
    let dim = list.iter().map(|u| u.dim).sum();
    BlockOpMat::from_fn(first.outer, dim, |i, j| {
        let parts: Vec<CMat> = list.iter().map(|u| u.block(i, j).clone()).collect();
        direct_sum(&parts)
    })
}

/// Direct sum on the outer (matrix) leg, the `u ⊕ v` of representations.
pub fn direct_sum_outer(list: &[BlockOpMat]) -> Result<BlockOpMat> {
    let first = list
        .first()
        .ok_or_else(|| Error::DimensionMismatch("direct sum of an empty list".into()))?;
    if let Some(bad) = list.iter().find(|u| u.dim != first.dim) {
        return Err(Error::DimensionMismatch(format!(
            "direct sum needs equal inner dimensions, got {} and {}",
            first.dim, bad.dim
        )));
    }
    let dim = first.dim;
    let outer: usize = list.iter().map(|u| u.outer).sum();
    let mut blocks = vec![CMat::zeros(dim, dim); outer * outer];
    let mut offset = 0;
    for u in list {
        for i in 0..u.outer {
            for j in 0..u.outer {
                blocks[(offset + i) * outer + offset + j] = u.block(i, j).clone();
            }
        }
        offset += u.outer;
    }
    BlockOpMat::new(outer, dim, blocks)
}

/// Outcome of [`find_intertwiner`].
#[derive(Debug, Clone)]
pub struct IntertwinerSearch {
    /// A unitary `U` with `U A_i ≈ B_i U`, when one was found.
    pub unitary: Option<CMat>,
    /// `max_i ‖U A_i − B_i U‖` for the best candidate tried (infinite if the
    /// joint null space is trivial).
    pub residual: f64,
    /// Dimension of the joint solution space of the Sylvester equations; 0
    /// when the two families are identical and no search was run.
    pub null_dim: usize,
}

impl IntertwinerSearch {
    pub fn found(&self) -> bool {
        self.unitary.is_some()
    }
}

/// Singular values below this fraction of the constraint scale count as null.
const NULL_REL_TOL: f64 = 1e-9;
/// Candidates whose singular values spread wider than this are treated as singular.
const INVERTIBLE_REL_TOL: f64 = 1e-6;
const ATTEMPTS: u64 = 4;

/// Searches for a unitary `U` with `max_i ‖U A_i − B_i U‖ ≤ tol · max_i ‖A_i‖`.
///
/// The pairs `(A_i*, B_i*)` are added to the constraints, since a unitary
/// intertwiner of a family also intertwines the adjoints. The joint null space
/// of `X ↦ X A_i − B_i X` is read off the SVD of the stacked `N²`-column
/// operator. A generic element of that space is invertible when the two
/// families are unitarily equivalent, and then its polar part is a unitary
/// intertwiner.
pub fn find_intertwiner(a_list: &[CMat], b_list: &[CMat], tol: f64) -> Result<IntertwinerSearch> {
    if a_list.len() != b_list.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} source matrices but {} targets",
            a_list.len(),
            b_list.len()
        )));
    }
    let n = match a_list.first() {
        Some(a) => ensure_square(a)?,
        None => return Ok(IntertwinerSearch { unitary: Some(identity(0)), residual: 0.0, null_dim: 0 }),
    };
    for m in a_list.iter().chain(b_list) {
        if ensure_square(m)? != n {
            return Err(Error::DimensionMismatch(format!("expected {n}x{n} matrices, got {}x{}", m.nrows(), m.ncols())));
        }
    }

    if a_list == b_list {
        return Ok(IntertwinerSearch { unitary: Some(identity(n)), residual: 0.0, null_dim: 0 });
    }

    let pairs: Vec<(CMat, CMat)> = a_list
        .iter()
        .zip(b_list)
        .filter(|(a, b)| !(is_zero(a) && is_zero(b)))
        .flat_map(|(a, b)| [(a.clone(), b.clone()), (a.adjoint(), b.adjoint())])
        .collect();
    let scale = a_list.iter().map(op_norm).fold(0.0, f64::max);
    let bound = if scale > 0.0 { tol * scale } else { tol };
    let residual_of = |u: &CMat| -> f64 {
        a_list
            .iter()
            .zip(b_list)
            .map(|(a, b)| op_norm(&(u * a - b * u)))
            .fold(0.0, f64::max)
    };

    let null_basis = joint_null_space(&pairs, n);
    if null_basis.is_empty() {
        return Ok(IntertwinerSearch { unitary: None, residual: f64::INFINITY, null_dim: 0 });
    }

    // The polar step amplifies null-space rounding by roughly the condition
    // number of the combination, so every attempt is scored and the best kept.
    let mut best: Option<(CMat, f64)> = None;
    for attempt in 0..ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + attempt);
        let mut x = CMat::zeros(n, n);
        for basis in &null_basis {
            let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            x += basis * c;
        }
        let (u, smin, smax) = polar_unitary(&x)?;
        if smax == 0.0 || smin < INVERTIBLE_REL_TOL * smax {
            continue;
        }
        let residual = residual_of(&u);
        if best.as_ref().is_none_or(|(_, r)| residual < *r) {
            best = Some((u, residual));
        }
    }
    let null_dim = null_basis.len();
    Ok(match best {
        Some((u, residual)) if residual <= bound => IntertwinerSearch { unitary: Some(u), residual, null_dim },
        Some((_, residual)) => IntertwinerSearch { unitary: None, residual, null_dim },
        None => IntertwinerSearch { unitary: None, residual: f64::INFINITY, null_dim },
    })
}

/// Orthonormal basis (as `n×n` matrices) of `{X : X A = B X for all pairs}`.
fn joint_null_space(pairs: &[(CMat, CMat)], n: usize) -> Vec<CMat> {
    let nn = n * n;
    if pairs.is_empty() {
        return (0..nn)
            .map(|k| {
                let mut e = CMat::zeros(n, n);
                e[(k % n, k / n)] = ONE;
                e
            })
            .collect();
    }
    // column-major vec: vec(X A) = (Aᵀ ⊗ I) vec X, vec(B X) = (I ⊗ B) vec X
    let scale = pairs.iter().map(|(a, b)| a.norm() + b.norm()).fold(0.0, f64::max);
    let id = identity(n);
    let mut stacked = CMat::zeros(pairs.len() * nn, nn);
    for (p, (a, b)) in pairs.iter().enumerate() {
        let block = kron(&a.transpose(), &id) - kron(&id, b);
        stacked.view_mut((p * nn, 0), (nn, nn)).copy_from(&block);
    }
    // Reduce to a square triangular factor first; the SVD of R has the same
    // right singular vectors as the SVD of the tall stack.
    let r = if stacked.nrows() > nn { stacked.qr().r() } else { stacked };
    let svd = SVD::new(r, false, true);
    let v_t = svd.v_t.expect("right singular vectors were requested");
    let cutoff = NULL_REL_TOL * scale;
    let mut basis = Vec::new();
    for (idx, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma <= cutoff {
            let v = v_t.row(idx).adjoint();
            basis.push(CMat::from_column_slice(n, n, v.as_slice()));
        }
    }
    // a rank-deficient R from a wide stack has fewer singular values than unknowns
    if svd.singular_values.len() < nn {
        let rows: Vec<_> = (0..v_t.nrows()).map(|i| v_t.row(i).into_owned()).collect();
        basis.extend(complete_basis(&rows, nn, n));
    }
    basis
}

/// Orthonormal complement of the span of `rows` in `ℂ^dim`, as `n×n` matrices.
fn complete_basis(rows: &[nalgebra::RowDVector<Complex64>], dim: usize, n: usize) -> Vec<CMat> {
    let mut span: Vec<nalgebra::DVector<Complex64>> = rows.iter().map(|r| r.adjoint()).collect();
    let mut out = Vec::new();
    for k in 0..dim {
        let mut e = nalgebra::DVector::<Complex64>::zeros(dim);
        e[k] = ONE;
        for s in &span {
            let proj = s.dotc(&e);
            e -= s * proj;
        }
        let norm = e.norm();
        if norm > 1e-8 {
            e /= Complex64::new(norm, 0.0);
            out.push(CMat::from_column_slice(n, n, e.as_slice()));
            span.push(e);
        }
    }
    out
}

/// Eigenvalues with multiplicity, sorted by real then imaginary part.
pub fn multiset_spectrum(a: &CMat) -> Result<Vec<Complex64>> {
    let n = ensure_square(a)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let is_upper_triangular = (0..n).all(|j| (j + 1..n).all(|i| a[(i, j)] == ZERO));
    let mut values: Vec<Complex64> = if is_upper_triangular {
        a.diagonal().iter().copied().collect()
    } else {
        let schur = Schur::try_new(a.clone(), f64::EPSILON, 10_000)
            .ok_or_else(|| Error::Internal("Schur decomposition did not converge".into()))?;
        let (_, t) = schur.unpack();
        t.diagonal().iter().copied().collect()
    };
    values.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(values)
}

/// Multiset equality up to `tol · max(1, max |λ|)`, by greedy nearest matching.
pub fn multiset_equal(x: &[Complex64], y: &[Complex64], tol: f64) -> bool {
    if x.len() != y.len() {
        return false;
    }
    let scale = x.iter().chain(y).map(|z| z.norm()).fold(1.0, f64::max);
    let mut used = vec![false; y.len()];
    for a in x {
        let nearest = y
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, b)| (j, (a - b).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1));
        match nearest {
            Some((j, d)) if d <= tol * scale => used[j] = true,
            _ => return false,
        }
    }
    true
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use proptest::prelude::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn op_norm_examples() {
        assert!((op_norm(&identity(3)) - 1.0).abs() < 1e-15);
        assert!((op_norm(&real_diag(&[2.0, 0.5])) - 2.0).abs() < 1e-15);
        let mut r = rng(1);
        for _ in 0..10 {
            let a = random_cmat(&mut r, 5, 5);
            assert!((op_norm(&a) - op_norm(&a.adjoint())).abs() < 1e-12);
            let u = random_unitary(&mut r, 4);
            assert!((op_norm(&u) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_norm_examples() {
        assert!((trace_norm(&identity(4)).unwrap() - 4.0).abs() < 1e-14);
        assert!((trace_norm(&real_diag(&[1.0, -2.0])).unwrap() - 3.0).abs() < 1e-14);
        assert!(matches!(trace_norm(&CMat::zeros(2, 3)), Err(Error::NotSquare { .. })));
        let mut r = rng(2);
        for _ in 0..10 {
            let a = random_cmat(&mut r, 6, 6);
            assert!(trace_norm(&a).unwrap() >= a.trace().norm() - 1e-12);
        }
    }

    #[test]
    fn top_tensor_units_and_scalars() {
        let mut r = rng(3);
        let v = random_block(&mut r, 3, 2);
        let unit = BlockOpMat::identity(1, 2);
        assert_eq!(top_tensor(&unit, &v).unwrap().max_abs_diff(&v).unwrap(), 0.0);

        let a = random_cmat(&mut r, 2, 2);
        let b = random_cmat(&mut r, 3, 3);
        let t = top_tensor(&BlockOpMat::from_scalar(&a).unwrap(), &BlockOpMat::from_scalar(&b).unwrap()).unwrap();
        assert!((t.to_flat() - kron(&a, &b)).norm() < 1e-14);

        assert!(top_tensor(&random_block(&mut r, 2, 2), &random_block(&mut r, 2, 3)).is_err());
    }

    #[test]
    fn bot_tensor_units() {
        let mut r = rng(4);
        let a = random_cmat(&mut r, 2, 2);
        let b = random_cmat(&mut r, 3, 3);
        let t = bot_tensor(
            &BlockOpMat::new(1, 2, vec![a.clone()]).unwrap(),
            &BlockOpMat::new(1, 3, vec![b.clone()]).unwrap(),
        )
        .unwrap();
        assert_eq!(t.block(0, 0), &kron(&a, &b));

        let v = random_block(&mut r, 3, 2);
        let inflated = bot_tensor(&BlockOpMat::identity(3, 1), &v).unwrap();
        assert_eq!(inflated.max_abs_diff(&v).unwrap(), 0.0);
        let inflated = bot_tensor(&BlockOpMat::identity(3, 2), &v).unwrap();
        assert_eq!(inflated.dim(), 4);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(inflated.block(i, j), &kron(&identity(2), v.block(i, j)));
            }
        }
        assert!(bot_tensor(&random_block(&mut r, 2, 2), &random_block(&mut r, 3, 2)).is_err());
    }

    #[test]
    fn leg_identity_random() {
        let mut r = rng(5);
        for _ in 0..10 {
            let (n, m, dh, dk) = (2, 3, 2, 2);
            let a = random_block(&mut r, n, dh);
            let b = random_block(&mut r, n, dk);
            let c = random_block(&mut r, m, dh);
            let d = random_block(&mut r, m, dk);
            let lhs = top_tensor(&bot_tensor(&a, &b).unwrap(), &bot_tensor(&c, &d).unwrap()).unwrap();
            let rhs = bot_tensor(&top_tensor(&a, &c).unwrap(), &top_tensor(&b, &d).unwrap()).unwrap();
            assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
        }
    }

    #[test]
    fn top_tensor_associative() {
        let mut r = rng(6);
        for _ in 0..5 {
            let u = random_block(&mut r, 2, 2);
            let v = random_block(&mut r, 3, 2);
            let w = random_block(&mut r, 2, 2);
            let left = top_tensor(&top_tensor(&u, &v).unwrap(), &w).unwrap();
            let right = top_tensor(&u, &top_tensor(&v, &w).unwrap()).unwrap();
            assert!(left.max_abs_diff(&right).unwrap() < 1e-12);
        }
    }

    #[test]
    fn direct_sums() {
        let mut r = rng(7);
        let a = random_cmat(&mut r, 3, 3);
        let b = random_cmat(&mut r, 2, 2) * Complex64::new(3.0, 0.0);
        assert_eq!(direct_sum(std::slice::from_ref(&a)), a);
        let s = direct_sum(&[a.clone(), b.clone()]);
        assert!((op_norm(&s) - op_norm(&a).max(op_norm(&b))).abs() < 1e-12);
        assert!((trace_norm(&s).unwrap() - trace_norm(&a).unwrap() - trace_norm(&b).unwrap()).abs() < 1e-12);

        let u = random_block(&mut r, 2, 2);
        let v = random_block(&mut r, 2, 3);
        let inner = direct_sum_blocks(&[u.clone(), v.clone()]).unwrap();
        assert_eq!(inner.dim(), 5);
        assert_eq!(inner.block(1, 0), &direct_sum(&[u.block(1, 0).clone(), v.block(1, 0).clone()]));
        assert!(direct_sum_blocks(&[u.clone(), random_block(&mut r, 3, 2)]).is_err());

        let w = random_block(&mut r, 3, 2);
        let outer = direct_sum_outer(&[u.clone(), w.clone()]).unwrap();
        assert_eq!(outer.outer(), 5);
        assert_eq!(outer.block(3, 4), w.block(1, 2));
        assert!(is_zero(outer.block(0, 3)));
        assert!(direct_sum_outer(&[u, v]).is_err());
    }

    #[test]
    fn flat_round_trip_and_slices() {
        let mut r = rng(8);
        let u = random_block(&mut r, 3, 2);
        let flat = u.to_flat();
        assert_eq!(BlockOpMat::from_flat(3, 2, &flat).unwrap(), u);
        let slices = u.scalar_slices();
        assert_eq!(slices.len(), 4);
        assert_eq!(slices[1][(2, 0)], u.block(2, 0)[(0, 1)]);
    }

    #[test]
    fn intertwiner_identity_family() {
        let found = find_intertwiner(&[identity(3)], &[identity(3)], 1e-10).unwrap();
        let u = found.unitary.expect("identity family is self-equivalent");
        assert_eq!(found.residual, 0.0);
        assert!((&u * u.adjoint() - identity(3)).norm() < 1e-12);
    }

    #[test]
    fn intertwiner_recovers_conjugation() {
        let mut r = rng(9);
        for n in [2, 3, 5] {
            let v = random_unitary(&mut r, n);
            let a_list: Vec<CMat> = (0..2).map(|_| random_cmat(&mut r, n, n)).collect();
            let b_list: Vec<CMat> = a_list.iter().map(|a| &v * a * v.adjoint()).collect();
            let found = find_intertwiner(&a_list, &b_list, 1e-10).unwrap();
            assert!(found.found(), "n={n} residual={}", found.residual);
            assert!(found.residual <= 1e-10);
            assert_eq!(found.null_dim, 1);
        }
    }

    #[test]
    fn intertwiner_rejects_distinct_spectra() {
        let found = find_intertwiner(&[real_diag(&[1.0, 2.0])], &[real_diag(&[1.0, 3.0])], 1e-10).unwrap();
        assert!(!found.found());
        assert!(find_intertwiner(&[identity(2)], &[identity(3)], 1e-10).is_err());
        assert!(find_intertwiner(&[identity(2)], &[], 1e-10).is_err());
    }

    #[test]
    fn intertwiner_rejects_similar_but_not_unitarily_equivalent() {
        // [[1,1],[0,2]] is similar to diag(1,2) but not unitarily
        let a = CMat::from_row_slice(2, 2, &[ONE, ONE, ZERO, Complex64::new(2.0, 0.0)]);
        let found = find_intertwiner(&[a], &[real_diag(&[1.0, 2.0])], 1e-10).unwrap();
        assert!(!found.found());
    }

    #[test]
    fn spectrum_examples() {
        let spec = multiset_spectrum(&identity(3)).unwrap();
        assert_eq!(spec, vec![ONE; 3]);
        let d = real_diag(&[3.0, 1.0, 2.0]);
        let p = real_diag(&[1.0, 2.0, 3.0]);
        assert!(multiset_equal(&multiset_spectrum(&d).unwrap(), &multiset_spectrum(&p).unwrap(), 1e-12));
        assert!(!multiset_equal(&[ONE, ONE], &[ONE, Complex64::new(2.0, 0.0)], 1e-12));
        assert!(!multiset_equal(&[ONE], &[ONE, ONE], 1e-12));

        let mut r = rng(10);
        let v = random_cmat(&mut r, 4, 4);
        let eig = [Complex64::new(1.0, 1.0), Complex64::new(-2.0, 0.5), Complex64::new(0.3, 0.0), Complex64::new(0.0, -1.0)];
        let a = &v * diag(&eig) * inverse(&v).unwrap();
        assert!(multiset_equal(&multiset_spectrum(&a).unwrap(), &eig, 1e-9));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn op_norm_submultiplicative(seed in any::<u64>(), n in 1usize..6) {
            let mut r = rng(seed);
            let a = random_cmat(&mut r, n, n);
            let b = random_cmat(&mut r, n, n);
            prop_assert!(op_norm(&(&a * &b)) <= op_norm(&a) * op_norm(&b) + 1e-10);
        }

        #[test]
        fn intertwiner_round_trip(seed in any::<u64>(), n in 1usize..5) {
            let mut r = rng(seed);
            let v = random_unitary(&mut r, n);
            let a = random_cmat(&mut r, n, n);
            let b = &v * &a * v.adjoint();
            let found = find_intertwiner(&[a], &[b], 1e-10).unwrap();
            prop_assert!(found.found());
            prop_assert!(found.residual <= 1e-10 * 10.0_f64.max(1.0));
        }
    }
}
