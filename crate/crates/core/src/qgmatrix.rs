//! 2×2 operator matrices with quantum-group structure.
//!
//! A [`TwoByTwoOp`] `[[a, b], [c, d]]` is checked against the defining
//! relations of SL_q(2,ℂ)-, SU_q(2)- and AN_q-matrices. The irreducible
//! AN_q-matrices `A_s` are built explicitly, multiplied with `⊠`,
//! decomposed back into irreducibles, and composed with SU_q(2)-matrices into
//! Iwasawa products.

use std::fmt;

use log::debug;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, find_intertwiner, inverse, kron, op_norm, BlockOpMat, CMat};
use crate::qscalar::{q_power, HalfInt, QParam};

#[derive(Debug, Clone, PartialEq)]
pub struct TwoByTwoOp {
    pub a: CMat,
    pub b: CMat,
    pub c: CMat,
    pub d: CMat,
}

impl TwoByTwoOp {
    pub fn new(a: CMat, b: CMat, c: CMat, d: CMat) -> Result<Self> {
        let n = linalg::ensure_square(&a)?;
        for m in [&b, &c, &d] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "entries of a 2x2 operator matrix must all be {n}x{n}, got {}x{}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(Self { a, b, c, d })
    }

    /// `[[I, 0], [0, I]]` on `ℂ^dim`.
    pub fn identity(dim: usize) -> Self {
        Self {
            a: linalg::identity(dim),
            b: CMat::zeros(dim, dim),
            c: CMat::zeros(dim, dim),
            d: linalg::identity(dim),
        }
    }

    /// The one-dimensional matrix `[[ρ, 0], [0, ρ⁻¹]]`.
    pub fn character(rho: Complex64) -> Result<Self> {
        if rho == linalg::ZERO {
            return Err(Error::ZeroCharacter);
        }
        Ok(Self {
            a: linalg::scalar(rho),
            b: CMat::zeros(1, 1),
            c: CMat::zeros(1, 1),
            d: linalg::scalar(rho.inv()),
        })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn entries(&self) -> [&CMat; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn max_entry_norm(&self) -> f64 {
        self.entries().into_iter().map(op_norm).fold(0.0, f64::max)
    }

    pub fn to_block(&self) -> BlockOpMat {
        BlockOpMat::new(2, self.dim(), vec![self.a.clone(), self.b.clone(), self.c.clone(), self.d.clone()])
            .expect("entries share a dimension")
    }

    pub fn from_block(m: &BlockOpMat) -> Result<Self> {
        if m.outer() != 2 {
            return Err(Error::DimensionMismatch(format!("expected a 2x2 block matrix, got outer size {}", m.outer())));
        }
        Self::new(m.block(0, 0).clone(), m.block(0, 1).clone(), m.block(1, 0).clone(), m.block(1, 1).clone())
    }

    /// Entries `x ⊗ I_dim`.
    pub fn inflate_left(&self, dim: usize) -> Self {
        let id = linalg::identity(dim);
        self.map(|x| kron(x, &id))
    }

    /// Entries `I_dim ⊗ x`.
    pub fn inflate_right(&self, dim: usize) -> Self {
        let id = linalg::identity(dim);
        self.map(|x| kron(&id, x))
    }

    pub fn map(&self, mut f: impl FnMut(&CMat) -> CMat) -> Self {
        Self { a: f(&self.a), b: f(&self.b), c: f(&self.c), d: f(&self.d) }
    }

    /// Conjugation of every entry by a unitary: `U x U*`.
    pub fn conjugate_by(&self, u: &CMat) -> Self {
        let u_adj = u.adjoint();
        self.map(|x| u * x * &u_adj)
    }
}

/// Residuals of a family of relations, each the operator norm of `LHS − RHS`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationReport {
    pub kind: &'static str,
    pub labels: Vec<String>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// `max_residual / (1 + max entry norm)²`
    pub normalized_residual: f64,
    pub tol: f64,
    pub passed: bool,
    /// Spectral side condition, where the relation family has one.
    pub spectrum_ok: Option<bool>,
}

impl RelationReport {
    fn build(kind: &'static str, rows: Vec<(&str, f64)>, scale: f64, tol: f64, spectrum_ok: Option<bool>) -> Self {
        let max_residual = rows.iter().map(|r| r.1).fold(0.0, f64::max);
        let norm = (1.0 + scale).powi(2);
        let normalized_residual = max_residual / norm;
        let passed = normalized_residual <= tol && spectrum_ok != Some(false);
        Self {
            kind,
            labels: rows.iter().map(|r| r.0.to_string()).collect(),
            residuals: rows.iter().map(|r| r.1).collect(),
            max_residual,
            normalized_residual,
            tol,
            passed,
            spectrum_ok,
        }
    }

    /// Label and residual of the worst relation.
    pub fn worst(&self) -> Option<(&str, f64)> {
        self.labels
            .iter()
            .zip(&self.residuals)
            .max_by(|x, y| x.1.total_cmp(y.1))
            .map(|(l, r)| (l.as_str(), *r))
    }

    /// Converts a failed report into [`Error::RelationFailure`].
    pub fn into_result(self) -> Result<Self> {
        if self.passed {
            return Ok(self);
        }
        let label = if self.spectrum_ok == Some(false) {
            "spec a ⊆ S_q".to_string()
        } else {
            self.worst().map(|w| w.0.to_string()).unwrap_or_default()
        };
        Err(Error::RelationFailure { kind: self.kind, label, residual: self.normalized_residual })
    }
}

impl fmt::Display for RelationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "pass" } else { "FAIL" };
        write!(f, "{} {verdict}: normalized residual {:.3e} (tol {:.1e})", self.kind, self.normalized_residual, self.tol)?;
        if let Some(ok) = self.spectrum_ok {
            write!(f, ", spectrum {}", if ok { "ok" } else { "outside S_q" })?;
        }
        if !self.passed {
            if let Some((label, r)) = self.worst() {
                write!(f, ", worst {label} = {r:.3e}")?;
            }
        }
        Ok(())
    }
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// The 17 defining relations of an SL_q(2,ℂ)-matrix.
pub fn check_slq2c(m: &TwoByTwoOp, q: QParam, tol: f64) -> RelationReport {
    let (a, b, cc, d) = (&m.a, &m.b, &m.c, &m.d);
    let (a_s, b_s, c_s, d_s) = (a.adjoint(), b.adjoint(), cc.adjoint(), d.adjoint());
    let qv = q.value();
    let (qc, qi, k) = (c(qv), c(1.0 / qv), c(1.0 - qv * qv));
    let id = linalg::identity(m.dim());
    let r = |x: CMat| op_norm(&x);
    let rows = vec![
        ("ab = q ba", r(a * b - b * a * qc)),
        ("ac = q ca", r(a * cc - cc * a * qc)),
        ("ad - q bc = I", r(a * d - b * cc * qc - &id)),
        ("bc = cb", r(b * cc - cc * b)),
        ("bd = q db", r(b * d - d * b * qc)),
        ("cd = q dc", r(cc * d - d * cc * qc)),
        ("ca* = q a*c", r(cc * &a_s - &a_s * cc * qc)),
        ("da* = a*d", r(d * &a_s - &a_s * d)),
        ("da - q^-1 bc = I", r(d * a - b * cc * qi - &id)),
        ("cb* = b*c", r(cc * &b_s - &b_s * cc)),
        ("dc* = q^-1 c*d", r(d * &c_s - &c_s * d * qi)),
        ("cc* = c*c", r(cc * &c_s - &c_s * cc)),
        ("ba* = q^-1 a*b + q^-1 (1-q^2) c*d", r(b * &a_s - &a_s * b * qi - &c_s * d * (qi * k))),
        ("db* = q b*d - q (1-q^2) a*c", r(d * &b_s - &b_s * d * qc + &a_s * cc * (qc * k))),
        ("aa* = a*a + (1-q^2) c*c", r(a * &a_s - &a_s * a - &c_s * cc * k)),
        ("dd* = d*d - (1-q^2) c*c", r(d * &d_s - &d_s * d + &c_s * cc * k)),
        (
            "bb* = b*b + (1-q^2)(d*d - a*a) - (1-q^2)^2 c*c",
            r(b * &b_s - &b_s * b - (&d_s * d - &a_s * a) * k + &c_s * cc * (k * k)),
        ),
    ];
    RelationReport::build("SL_q(2,C)", rows, m.max_entry_norm(), tol, None)
}

/// SU_q(2)-matrix relations together with the shape `b = -q c*`, `d = a*`.
pub fn check_suq2(m: &TwoByTwoOp, q: QParam, tol: f64) -> RelationReport {
    let (a, cc) = (&m.a, &m.c);
    let (a_s, c_s) = (a.adjoint(), cc.adjoint());
    let qv = q.value();
    let qc = c(qv);
    let id = linalg::identity(m.dim());
    let r = |x: CMat| op_norm(&x);
    let rows = vec![
        ("a*a + c*c = I", r(&a_s * a + &c_s * cc - &id)),
        ("aa* + q^2 c*c = I", r(a * &a_s + &c_s * cc * c(qv * qv) - &id)),
        ("c*c = cc*", r(&c_s * cc - cc * &c_s)),
        ("ac = q ca", r(a * cc - cc * a * qc)),
        ("ac* = q c*a", r(a * &c_s - &c_s * a * qc)),
        ("b = -q c*", r(&m.b + &c_s * qc)),
        ("d = a*", r(&m.d - &a_s)),
    ];
    RelationReport::build("SU_q(2)", rows, m.max_entry_norm(), tol, None)
}

/// AN_q-matrix relations for `[[a, n], [0, a⁻¹]]`, with the spectral condition
/// `spec a ⊆ S_q` reported in `spectrum_ok`. Fails with [`Error::Singular`]
/// if `a` is not invertible.
pub fn check_anq(m: &TwoByTwoOp, q: QParam, tol: f64) -> Result<RelationReport> {
    let (a, n) = (&m.a, &m.b);
    let a_inv = inverse(a)?;
    let (a_s, n_s) = (a.adjoint(), n.adjoint());
    let qv = q.value();
    let id = linalg::identity(m.dim());
    // (a*a)^-1 = a^-1 (a^-1)*
    let a_s_a_inv = &a_inv * a_inv.adjoint();
    let r = |x: CMat| op_norm(&x);
    let rows = vec![
        ("c = 0", r(m.c.clone())),
        ("ad = I", r(a * &m.d - &id)),
        ("da = I", r(&m.d * a - &id)),
        ("aa* = a*a", r(a * &a_s - &a_s * a)),
        ("an = q na", r(a * n - n * a * c(qv))),
        ("na* = q^-1 a*n", r(n * &a_s - &a_s * n * c(1.0 / qv))),
        ("nn* = n*n + (1-q^2)((a*a)^-1 - a*a)", r(n * &n_s - &n_s * n - (a_s_a_inv - &a_s * a) * c(1.0 - qv * qv))),
    ];
    let scale = m.max_entry_norm();
    let spectrum = linalg::multiset_spectrum(a)?;
    let spec_tol = tol * (1.0 + scale).powi(2);
    let spectrum_ok = spectrum.iter().all(|&lambda| in_s_q(lambda, q, spec_tol));
    Ok(RelationReport::build("AN_q", rows, scale, tol, Some(spectrum_ok)))
}

/// Membership of `λ` in `S_q`: the positive half-line for `q > 0`, the spiral
/// `{|q|^x e^{iπx}} ∪ {0}` for `q < 0`.
pub fn in_s_q(lambda: Complex64, q: QParam, tol: f64) -> bool {
    let r = lambda.norm();
    if !q.is_negative() {
        return lambda.re > 0.0 && lambda.im.abs() <= tol * r.max(1.0);
    }
    if r <= tol {
        return true;
    }
    let x = r.ln() / q.abs().ln();
    let phase = Complex64::from_polar(1.0, std::f64::consts::PI * x);
    (phase - lambda / r).norm() <= tol
}

/// The irreducible AN_q-matrix `A_s` on `ℂ^{2s+1}` with basis `e_{-s}, ..., e_s`:
/// `a e_k = q^k e_k`, `n e_k = √(|q|^{-2s} - |q|^{-2k} - |q|^{2k+2} + |q|^{2s+2}) e_{k+1}`.
pub fn make_as(q: QParam, s: HalfInt) -> TwoByTwoOp {
    let weights: Vec<_> = s.weights().collect();
    let dim = weights.len();
    let p = q.abs();
    let sv = s.value();
    let a_diag: Vec<Complex64> = weights.iter().map(|&k| q_power(q, k)).collect();
    let d_diag: Vec<Complex64> = weights.iter().map(|&k| q_power(q, -k)).collect();
    let mut n = CMat::zeros(dim, dim);
    for (j, k) in weights.iter().enumerate().take(dim.saturating_sub(1)) {
        let k = k.value();
        let arg = p.powf(-2.0 * sv) - p.powf(-2.0 * k) - p.powf(2.0 * k + 2.0) + p.powf(2.0 * sv + 2.0);
        n[(j + 1, j)] = c(arg.max(0.0).sqrt());
    }
    TwoByTwoOp { a: linalg::diag(&a_diag), b: n, c: CMat::zeros(dim, dim), d: linalg::diag(&d_diag) }
}

/// `(A ⊠ B)_{il} = Σ_j A_ij ⊗ B_jl`, without relation checks.
pub fn bot(x: &TwoByTwoOp, y: &TwoByTwoOp) -> TwoByTwoOp {
    TwoByTwoOp {
        a: kron(&x.a, &y.a) + kron(&x.b, &y.c),
        b: kron(&x.a, &y.b) + kron(&x.b, &y.d),
        c: kron(&x.c, &y.a) + kron(&x.d, &y.c),
        d: kron(&x.c, &y.b) + kron(&x.d, &y.d),
    }
}

/// `A ⊠ B` of two AN_q-matrices; both factors must pass [`check_anq`].
pub fn anq_bot(x: &TwoByTwoOp, y: &TwoByTwoOp, q: QParam, tol: f64) -> Result<TwoByTwoOp> {
    check_anq(x, q, tol)?.into_result()?;
    check_anq(y, q, tol)?.into_result()?;
    Ok(bot(x, y))
}

/// Irreducible content of an AN_q-matrix.
#[derive(Debug, Clone)]
pub struct AnqDecomposition {
    /// `(s, multiplicity)` with `s` descending.
    pub blocks: Vec<(HalfInt, usize)>,
    /// Unitary `U` with `U a U* = ⊕ a_s` and `U n U* = ⊕ n_s`, blocks in the
    /// order of `blocks`, repeated by multiplicity.
    pub unitary: CMat,
    pub residual: f64,
}

/// Relative tolerance for snapping eigenvalues onto `q^k`, `k ∈ ½ℤ`.
const SNAP_TOL: f64 = 1e-6;

/// Writes `spec a` as a union of the spectra `{q^{-s}, ..., q^s}` of irreducible
/// blocks and finds the unitary equivalence with `⊕ A_s`.
pub fn decompose_anq(m: &TwoByTwoOp, q: QParam, tol: f64) -> Result<AnqDecomposition> {
    check_anq(m, q, tol)?.into_result()?;
    let mut exponents = Vec::new();
    for lambda in linalg::multiset_spectrum(&m.a)? {
        let r = lambda.norm();
        if r == 0.0 {
            return Err(Error::SpectrumNotTileable("zero eigenvalue".into()));
        }
        let twice = (2.0 * r.ln() / q.abs().ln()).round() as i64;
        let expected = q_power(q, crate::qscalar::SignedHalfInt::from_twice(twice));
        if (expected - lambda).norm() > SNAP_TOL * r.max(1.0) {
            return Err(Error::SpectrumNotTileable(format!("eigenvalue {lambda} is not a power of q")));
        }
        exponents.push(twice);
    }
    let blocks = tile_exponents(exponents)?;
    debug!("AN_q spectrum tiles as {blocks:?}");

    let mut parts = Vec::new();
    for &(s, mult) in &blocks {
        parts.extend(std::iter::repeat_n(make_as(q, s), mult));
    }
    let target = TwoByTwoOp {
        a: linalg::direct_sum(&parts.iter().map(|p| p.a.clone()).collect::<Vec<_>>()),
        b: linalg::direct_sum(&parts.iter().map(|p| p.b.clone()).collect::<Vec<_>>()),
        c: CMat::zeros(m.dim(), m.dim()),
        d: linalg::direct_sum(&parts.iter().map(|p| p.d.clone()).collect::<Vec<_>>()),
    };
    let search = find_intertwiner(&[m.a.clone(), m.b.clone()], &[target.a, target.b], tol)?;
    match search.unitary {
        Some(unitary) => Ok(AnqDecomposition { blocks, unitary, residual: search.residual }),
        None => Err(Error::NoIntertwiner { residual: search.residual }),
    }
}

/// Greedy tiling of a multiset of doubled exponents by intervals
/// `{-2s, -2s+2, ..., 2s}`: the largest remaining exponent tops the next block.
fn tile_exponents(mut twice: Vec<i64>) -> Result<Vec<(HalfInt, usize)>> {
    twice.sort_unstable();
    let mut blocks: Vec<(HalfInt, usize)> = Vec::new();
    while let Some(&top) = twice.last() {
        if top < 0 {
            return Err(Error::SpectrumNotTileable(format!("leftover exponent {} below zero", top as f64 / 2.0)));
        }
        let mut k = top;
        while k >= -top {
            match twice.binary_search(&k) {
                Ok(pos) => {
                    twice.remove(pos);
                }
                Err(_) => {
                    return Err(Error::SpectrumNotTileable(format!(
                        "block of spin {} is missing exponent {}",
                        top as f64 / 2.0,
                        k as f64 / 2.0
                    )))
                }
            }
            k -= 2;
        }
        let s = HalfInt::from_twice(top as u32);
        match blocks.last_mut() {
            Some((last, mult)) if *last == s => *mult += 1,
            _ => blocks.push((s, 1)),
        }
    }
    Ok(blocks)
}

/// An Iwasawa product `A = A_c A_d` together with its two inflated factors.
#[derive(Debug, Clone)]
pub struct IwasawaProduct {
    pub product: TwoByTwoOp,
    /// Entries `x ⊗ I` of the SU_q(2) factor.
    pub compact: TwoByTwoOp,
    /// Entries `I ⊗ y` of the AN_q factor.
    pub solvable: TwoByTwoOp,
}

/// `[[A_c.a ⊗ I, A_c.b ⊗ I], [A_c.c ⊗ I, A_c.d ⊗ I]] · [[I ⊗ A_d.a, I ⊗ A_d.b], [0, I ⊗ A_d.d]]`.
pub fn iwasawa_compose(ac: &TwoByTwoOp, ad: &TwoByTwoOp, q: QParam, tol: f64) -> Result<IwasawaProduct> {
    check_suq2(ac, q, tol).into_result()?;
    check_anq(ad, q, tol)?.into_result()?;
    let compact = ac.inflate_left(ad.dim());
    let mut solvable = ad.inflate_right(ac.dim());
    solvable.c.fill(linalg::ZERO);
    let (x, y) = (&compact, &solvable);
    let product = TwoByTwoOp {
        a: &x.a * &y.a,
        b: &x.a * &y.b + &x.b * &y.d,
        c: &x.c * &y.a,
        d: &x.c * &y.b + &x.d * &y.d,
    };
    Ok(IwasawaProduct { product, compact, solvable })
}

/// `‖XY − YX‖ ≤ tol` and `‖XY* − Y*X‖ ≤ tol`.
pub fn check_doubly_commute(x: &CMat, y: &CMat, tol: f64) -> bool {
    if x.shape() != y.shape() || x.nrows() != x.ncols() {
        return false;
    }
    let y_s = y.adjoint();
    op_norm(&(x * y - y * x)) <= tol && op_norm(&(x * &y_s - &y_s * x)) <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::testutil::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(x: f64) -> QParam {
        QParam::new(x).unwrap()
    }

    fn h(twice: u32) -> HalfInt {
        HalfInt::from_twice(twice)
    }

    const Q_GRID: [f64; 8] = [0.3, -0.3, 0.5, -0.5, 0.7, -0.7, 0.9, -0.9];

    #[test]
    fn identity_is_trivial_for_every_family() {
        for &qv in &Q_GRID {
            let id = TwoByTwoOp::identity(3);
            assert_eq!(check_slq2c(&id, q(qv), 1e-12).max_residual, 0.0);
            assert!(check_suq2(&id, q(qv), 1e-12).passed);
            let r = check_anq(&id, q(qv), 1e-12).unwrap();
            assert!(r.passed && r.spectrum_ok == Some(true));
        }
    }

    #[test]
    fn a_half_is_sl_q_2c() {
        for &qv in &Q_GRID {
            let report = check_slq2c(&make_as(q(qv), HalfInt::HALF), q(qv), 1e-10);
            assert!(report.passed, "{report}");
            assert_eq!(report.residuals.len(), 17);
        }
    }

    #[test]
    fn swapping_b_and_c_breaks_sl_q_2c() {
        let m = make_as(q(0.5), HalfInt::HALF);
        let swapped = TwoByTwoOp { a: m.a.clone(), b: m.c.clone(), c: m.b.clone(), d: m.d.clone() };
        let report = check_slq2c(&swapped, q(0.5), 1e-10);
        assert!(!report.passed);
        assert!(report.clone().into_result().is_err());
        // with c = n, ac = q ca is one of the defining AN_q relations and survives the swap
        let ac = report.labels.iter().position(|l| l == "ac = q ca").unwrap();
        assert!(report.residuals[ac] <= 1e-14);
        assert_ne!(report.worst().unwrap().0, "ac = q ca");
    }

    #[test]
    fn unitary_character_is_su_q2() {
        for theta in [0.0, 0.4, 2.0, -1.3] {
            let rho = Complex64::from_polar(1.0, theta);
            let m = TwoByTwoOp::character(rho).unwrap();
            assert!(check_suq2(&m, q(0.5), 1e-12).passed);
            assert!(check_slq2c(&m, q(-0.5), 1e-12).passed);
        }
        assert!(!check_suq2(&make_as(q(0.5), HalfInt::HALF), q(0.5), 1e-10).passed);
        assert!(!check_suq2(&TwoByTwoOp::character(Complex64::new(2.0, 0.0)).unwrap(), q(0.5), 1e-10).passed);
    }

    #[test]
    fn make_as_examples() {
        let m0 = make_as(q(0.5), HalfInt::ZERO);
        assert_eq!(m0, TwoByTwoOp::identity(1));

        for qv in [0.3, 0.5, 0.8] {
            let m = make_as(q(qv), HalfInt::HALF);
            let expected = qv.powf(-0.5) * (1.0 - qv * qv);
            assert!((m.b[(1, 0)].re - expected).abs() < 1e-14);
            assert_eq!(m.b[(0, 1)], linalg::ZERO);
            assert!((&m.b * &m.b).iter().all(|z| *z == linalg::ZERO));
        }

        let m1 = make_as(q(0.5), HalfInt::ONE);
        assert!((m1.b[(1, 0)].re - 2.8125_f64.sqrt()).abs() < 1e-14);
        assert_eq!(m1.b[(2, 2)], linalg::ZERO);
    }

    #[test]
    fn make_as_spectrum_is_q_powers() {
        for &qv in &Q_GRID {
            for s in HalfInt::up_to(h(8)) {
                let m = make_as(q(qv), s);
                for (j, k) in s.weights().enumerate() {
                    assert_eq!(m.a[(j, j)], q_power(q(qv), k));
                }
            }
        }
    }

    #[test]
    fn make_as_is_anq() {
        for &qv in &Q_GRID {
            for s in HalfInt::up_to(h(8)) {
                let report = check_anq(&make_as(q(qv), s), q(qv), 1e-10).unwrap();
                assert!(report.passed, "q={qv} s={s}: {report}");
                assert_eq!(report.spectrum_ok, Some(true));
            }
        }
    }

    #[test]
    fn spectrum_outside_s_q() {
        let m = TwoByTwoOp::character(Complex64::new(-1.0, 0.0)).unwrap();
        let report = check_anq(&m, q(0.5), 1e-10).unwrap();
        assert_eq!(report.spectrum_ok, Some(false));
        assert!(!report.passed);
        // -1 = |q|^0 e^{iπ·0}? no; but |q|^x e^{iπx} with x = 0 is 1
        assert!(!in_s_q(Complex64::new(-1.0, 0.0), q(-0.5), 1e-10));
        assert!(in_s_q(Complex64::new(-0.5, 0.0), q(-0.5), 1e-10));
        assert!(in_s_q(Complex64::new(0.0, 0.5_f64.sqrt()), q(-0.5), 1e-10));
        assert!(in_s_q(linalg::ZERO, q(-0.5), 1e-10));
    }

    #[test]
    fn singular_a_is_an_error() {
        let mut m = TwoByTwoOp::identity(2);
        m.a[(1, 1)] = linalg::ZERO;
        assert_eq!(check_anq(&m, q(0.5), 1e-10), Err(Error::Singular));
    }

    #[test]
    fn bot_with_trivial_is_identity_inflation() {
        let m = make_as(q(0.6), h(3));
        let triv = make_as(q(0.6), HalfInt::ZERO);
        assert_eq!(anq_bot(&m, &triv, q(0.6), 1e-10).unwrap(), m);
        assert_eq!(anq_bot(&triv, &m, q(0.6), 1e-10).unwrap(), m);
    }

    #[test]
    fn bot_preserves_anq() {
        for &qv in &Q_GRID {
            for (s1, s2) in [(1, 1), (1, 2), (2, 3), (3, 1)] {
                let p = anq_bot(&make_as(q(qv), h(s1)), &make_as(q(qv), h(s2)), q(qv), 1e-10).unwrap();
                let report = check_anq(&p, q(qv), 1e-10).unwrap();
                assert!(report.passed, "q={qv}: {report}");
            }
        }
    }

    #[test]
    fn bot_spectrum_splits() {
        for qv in [0.5, -0.5, 0.8] {
            for twice in 1..6u32 {
                let p = bot(&make_as(q(qv), HalfInt::HALF), &make_as(q(qv), h(twice)));
                let mut expected = linalg::multiset_spectrum(&make_as(q(qv), h(twice + 1)).a).unwrap();
                expected.extend(linalg::multiset_spectrum(&make_as(q(qv), h(twice - 1)).a).unwrap());
                let got = linalg::multiset_spectrum(&p.a).unwrap();
                assert!(linalg::multiset_equal(&got, &expected, 1e-12));
            }
        }
    }

    #[test]
    fn decompose_irreducible() {
        for qv in [0.5, -0.7] {
            let d = decompose_anq(&make_as(q(qv), h(3)), q(qv), 1e-10).unwrap();
            assert_eq!(d.blocks, vec![(h(3), 1)]);
            assert!(d.residual <= 1e-10);
        }
    }

    #[test]
    fn decompose_fusion_of_half() {
        for qv in [0.5, -0.5, 0.3] {
            for twice in 1..=5u32 {
                let p = bot(&make_as(q(qv), HalfInt::HALF), &make_as(q(qv), h(twice)));
                let d = decompose_anq(&p, q(qv), 1e-10).unwrap();
                assert_eq!(d.blocks, vec![(h(twice + 1), 1), (h(twice - 1), 1)]);
                assert!(d.residual <= 1e-8);
            }
        }
    }

    #[test]
    fn decompose_triple_half() {
        let qq = q(0.5);
        let half = make_as(qq, HalfInt::HALF);
        let p = bot(&bot(&half, &half), &half);
        let d = decompose_anq(&p, qq, 1e-10).unwrap();
        assert_eq!(d.blocks, vec![(h(3), 1), (h(1), 2)]);
    }

    #[test]
    fn decompose_recovers_hidden_conjugation() {
        let qq = q(0.6);
        let mut r = ChaCha8Rng::seed_from_u64(11);
        let plain = bot(&make_as(qq, h(2)), &make_as(qq, HalfInt::HALF));
        let hidden = plain.conjugate_by(&random_unitary(&mut r, plain.dim()));
        let d = decompose_anq(&hidden, qq, 1e-10).unwrap();
        assert_eq!(d.blocks, vec![(h(3), 1), (h(1), 1)]);
        assert!(d.residual <= 1e-8);
    }

    #[test]
    fn decompose_rejects_non_anq() {
        // a one-dimensional AN_q-matrix must be unitary, so ρ = 2 violates nn* = ...
        let m = TwoByTwoOp::character(Complex64::new(2.0, 0.0)).unwrap();
        assert!(matches!(decompose_anq(&m, q(0.5), 1e-10), Err(Error::RelationFailure { .. })));
    }

    #[test]
    fn tiling_rules() {
        assert_eq!(tile_exponents(vec![0]).unwrap(), vec![(h(0), 1)]);
        assert_eq!(tile_exponents(vec![1, -1, 3, 1, -1, -3]).unwrap(), vec![(h(3), 1), (h(1), 1)]);
        assert_eq!(tile_exponents(vec![1, -1, 1, -1]).unwrap(), vec![(h(1), 2)]);
        assert!(tile_exponents(vec![2, 0]).is_err());
        assert!(tile_exponents(vec![-1]).is_err());
    }

    #[test]
    fn iwasawa_trivial_factors() {
        let qq = q(0.5);
        let rho = Complex64::from_polar(1.0, 0.9);
        let ac = TwoByTwoOp::character(rho).unwrap();
        let p = iwasawa_compose(&ac, &make_as(qq, HalfInt::ZERO), qq, 1e-10).unwrap();
        assert_eq!(p.product, ac);

        let as2 = make_as(qq, h(2));
        let p = iwasawa_compose(&TwoByTwoOp::identity(1), &as2, qq, 1e-10).unwrap();
        assert_eq!(p.product, as2);
    }

    #[test]
    fn iwasawa_product_is_sl_q_2c() {
        for qv in [0.5, -0.5, 0.3] {
            let qq = q(qv);
            for (theta, twice) in [(0.7, 1), (2.1, 2), (-0.4, 3)] {
                let ac = TwoByTwoOp::character(Complex64::from_polar(1.0, theta)).unwrap();
                let p = iwasawa_compose(&ac, &make_as(qq, h(twice)), qq, 1e-10).unwrap();
                let report = check_slq2c(&p.product, qq, 1e-10);
                assert!(report.passed, "{report}");
                for x in p.compact.entries() {
                    for y in p.solvable.entries() {
                        assert!(check_doubly_commute(x, y, 1e-10));
                    }
                }
            }
        }
    }

    #[test]
    fn iwasawa_rejects_bad_factors() {
        let qq = q(0.5);
        let half = make_as(qq, HalfInt::HALF);
        assert!(matches!(iwasawa_compose(&half, &half, qq, 1e-10), Err(Error::RelationFailure { .. })));
    }

    #[test]
    fn doubly_commute_examples() {
        let mut r = ChaCha8Rng::seed_from_u64(12);
        let x = random_cmat(&mut r, 3, 3);
        assert!(check_doubly_commute(&x, &linalg::identity(3), 1e-12));
        let a = random_cmat(&mut r, 2, 2);
        let b = random_cmat(&mut r, 3, 3);
        assert!(check_doubly_commute(&kron(&a, &linalg::identity(3)), &kron(&linalg::identity(2), &b), 1e-12));
        let nil = CMat::from_row_slice(2, 2, &[linalg::ZERO, linalg::ONE, linalg::ZERO, linalg::ZERO]);
        assert!(!check_doubly_commute(&nil, &nil, 1e-12));
        assert!(!check_doubly_commute(&nil, &linalg::identity(3), 1e-12));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn unitary_conjugation_preserves_relations(seed in any::<u64>(), idx in 0usize..8, twice in 0u32..6) {
            let qq = q(Q_GRID[idx]);
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let m = make_as(qq, h(twice));
            let u = random_unitary(&mut r, m.dim());
            let report = check_anq(&m.conjugate_by(&u), qq, 1e-10).unwrap();
            prop_assert!(report.passed, "{}", report);
        }
    }
}
