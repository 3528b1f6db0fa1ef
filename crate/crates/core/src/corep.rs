//! Irreducible corepresentations of SU_q(2) pushed through SL_q(2,ℂ)-matrices.
//!
//! The matrix coefficients `u^(t)_{nm}` are the Koornwinder words in the
//! ordered letters `a, b, c, d` (standing for `a_q, -q c_q*, c_q, a_q*`). A
//! [`TwoByTwoOp`] is substituted letter by letter to give
//! `v^(t) ∈ M_{2t+1} ⊗ B(H)`.

use log::{log_enabled, warn, Level};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, direct_sum_outer, find_intertwiner, op_norm, top_tensor, BlockOpMat, CMat};
use crate::qgmatrix::{check_slq2c, TwoByTwoOp};
use crate::qscalar::{q_binomial, HalfInt, QParam, SignedHalfInt};

/// One monomial `coeff · b^i c^j a^k d^l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffTerm {
    pub coeff: f64,
    pub i: u32,
    /// Exponents of `b, c, a, d` in that order.
    pub exponents: [u32; 4],
}

/// The matrix coefficient `u^(t)_{nm}` as a sum of ordered monomials.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffWord {
    pub t: HalfInt,
    pub n: SignedHalfInt,
    pub m: SignedHalfInt,
    pub terms: Vec<CoeffTerm>,
}

fn check_index(t: HalfInt, k: SignedHalfInt) -> Result<()> {
    let tt = t.twice() as i64;
    if k.twice().abs() > tt || (k.twice() - tt) % 2 != 0 {
        return Err(Error::IndexOutOfRange { t: t.to_string(), index: k.to_string() });
    }
    Ok(())
}

/// Integer value of a signed half-integer known to be integral.
fn int(k: SignedHalfInt) -> i64 {
    debug_assert!(k.is_integer());
    k.twice() / 2
}

/// Koornwinder's closed form for `u^(t)_{nm}`:
///
/// `[2t, t-n]^{1/2} [2t, t-m]^{-1/2} Σ_i q^{(t-n-i)(n-m+2i)} q^{-i(n-m+i)}
///  [t-n, i] [t+n, t+m-i] b^i c^{n-m+i} a^{t-n-i} d^{t+m-i}`
///
/// with q-binomials at base `q^{-2}` and `i` running over
/// `max(0, m-n) ..= min(t-n, t+m)`.
pub fn irrep_coeff_word(q: QParam, t: HalfInt, n: SignedHalfInt, m: SignedHalfInt) -> Result<CoeffWord> {
    check_index(t, n)?;
    check_index(t, m)?;
    let ts = t.signed();
    let t_minus_n = int(ts - n);
    let t_plus_n = int(ts + n);
    let t_minus_m = int(ts - m);
    let t_plus_m = int(ts + m);
    let n_minus_m = int(n - m);
    let two_t = t.twice() as i64;
    let qv = q.value();
    let base = qv.powi(-2);

    let pre_n = q_binomial(two_t, t_minus_n, base)?;
    let pre_m = q_binomial(two_t, t_minus_m, base)?;
    if pre_n <= 0.0 || pre_m <= 0.0 {
        return Err(Error::Internal(format!(
            "non-positive q-binomial prefactor for t={t}, n={n}, m={m}"
        )));
    }
    let prefactor = if pre_n == pre_m { 1.0 } else { (pre_n / pre_m).sqrt() };

    let lo = (-n_minus_m).max(0);
    let hi = t_minus_n.min(t_plus_m);
    let mut terms = Vec::new();
    for i in lo..=hi {
        let q_exp = (t_minus_n - i) * (n_minus_m + 2 * i) - i * (n_minus_m + i);
        let coeff = prefactor
            * qv.powi(q_exp as i32)
            * q_binomial(t_minus_n, i, base)?
            * q_binomial(t_plus_n, t_plus_m - i, base)?;
        let exps = [i, n_minus_m + i, t_minus_n - i, t_plus_m - i];
        debug_assert!(exps.iter().all(|&e| e >= 0));
        terms.push(CoeffTerm { coeff, i: i as u32, exponents: exps.map(|e| e as u32) });
    }
    Ok(CoeffWord { t, n, m, terms })
}

/// `v^(t) = (id ⊗ φ_A)(u^(t))`, indexed by `n, m ∈ {-t, ..., t}` ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct RepMatrix {
    pub t: HalfInt,
    pub matrix: BlockOpMat,
}

impl RepMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn entry(&self, n: SignedHalfInt, m: SignedHalfInt) -> Result<&CMat> {
        check_index(self.t, n)?;
        check_index(self.t, m)?;
        let offset = |k: SignedHalfInt| ((k.twice() + self.t.twice() as i64) / 2) as usize;
        Ok(self.matrix.block(offset(n), offset(m)))
    }

    pub fn to_flat(&self) -> CMat {
        self.matrix.to_flat()
    }
}

/// Powers `x^0, ..., x^max` with `x^0 = I`.
fn powers(x: &CMat, max: u32) -> Vec<CMat> {
    let mut out = vec![linalg::identity(x.nrows())];
    for k in 1..=max as usize {
        let next = if k == 1 { x.clone() } else { &out[k - 1] * x };
        out.push(next);
    }
    out
}

/// Substitutes `A` into every Koornwinder word of `u^(t)`.
///
/// The SL_q(2,ℂ) relations are not required for the substitution itself; a
/// violation is only logged at warn level. At `t = 1/2` the result is `A`
/// itself, bit for bit.
pub fn evaluate_rep(m: &TwoByTwoOp, q: QParam, t: HalfInt) -> Result<RepMatrix> {
    if log_enabled!(Level::Warn) {
        let report = check_slq2c(m, q, 1e-8);
        if !report.passed {
            warn!("evaluating v^({t}) on a matrix that is not SL_q(2,C): {report}");
        }
    }
    let dim = m.dim();
    let max = t.twice();
    // letter order b, c, a, d
    let letters = [powers(&m.b, max), powers(&m.c, max), powers(&m.a, max), powers(&m.d, max)];
    let weights: Vec<SignedHalfInt> = t.weights().collect();
    let mut blocks = Vec::with_capacity(weights.len() * weights.len());
    for &n in &weights {
        for &mm in &weights {
            let word = irrep_coeff_word(q, t, n, mm)?;
            let mut acc: Option<CMat> = None;
            for term in &word.terms {
                let mut prod: Option<CMat> = None;
                for (letter, &e) in letters.iter().zip(&term.exponents) {
                    if e == 0 {
                        continue;
                    }
                    let factor = &letter[e as usize];
                    prod = Some(match prod {
                        None => factor.clone(),
                        Some(p) => p * factor,
                    });
                }
                let mut prod = prod.unwrap_or_else(|| linalg::identity(dim));
                if term.coeff != 1.0 {
                    prod *= Complex64::new(term.coeff, 0.0);
                }
                acc = Some(match acc {
                    None => prod,
                    Some(a) => a + prod,
                });
            }
            blocks.push(acc.unwrap_or_else(|| CMat::zeros(dim, dim)));
        }
    }
    Ok(RepMatrix { t, matrix: BlockOpMat::new(weights.len(), dim, blocks)? })
}

/// `‖v^(t)‖` in `M_{2t+1} ⊗ B(H)`.
pub fn rep_norm(m: &TwoByTwoOp, q: QParam, t: HalfInt) -> Result<f64> {
    Ok(op_norm(&evaluate_rep(m, q, t)?.to_flat()))
}

/// Outcome of [`verify_fusion`].
#[derive(Debug, Clone)]
pub struct FusionReport {
    pub t1: HalfInt,
    pub t2: HalfInt,
    /// `|t1 - t2|, ..., t1 + t2`
    pub components: Vec<HalfInt>,
    pub residual: f64,
    pub unitary: CMat,
}

/// A generic non-unitary character used to pin down the intertwiner when the
/// representation under test has more than one dimension.
fn probe_character() -> TwoByTwoOp {
    TwoByTwoOp::character(Complex64::from_polar(1.3, 0.7)).expect("non-zero")
}

/// Checks `v^(t1) ⊤ v^(t2) ≅ ⊕_r v^(r)` by a scalar unitary `U` with
/// `(U ⊗ I)(v^(t1) ⊤ v^(t2)) = (⊕_r v^(r))(U ⊗ I)`.
pub fn verify_fusion(m: &TwoByTwoOp, q: QParam, t1: HalfInt, t2: HalfInt, tol: f64) -> Result<FusionReport> {
    let components: Vec<HalfInt> = {
        let lo = t1.abs_diff(t2).twice();
        let hi = (t1 + t2).twice();
        (lo..=hi).step_by(2).map(HalfInt::from_twice).collect()
    };
    let mut sources = Vec::new();
    let mut targets = Vec::new();
    let mut points = vec![m.clone()];
    if m.dim() > 1 {
        points.push(probe_character());
    }
    for point in &points {
        let left = top_tensor(&evaluate_rep(point, q, t1)?.matrix, &evaluate_rep(point, q, t2)?.matrix)?;
        let parts = components
            .iter()
            .map(|&r| evaluate_rep(point, q, r).map(|v| v.matrix))
            .collect::<Result<Vec<_>>>()?;
        let right = direct_sum_outer(&parts)?;
        sources.extend(left.scalar_slices());
        targets.extend(right.scalar_slices());
    }
    let search = find_intertwiner(&sources, &targets, tol)?;
    match search.unitary {
        Some(unitary) => Ok(FusionReport { t1, t2, components, residual: search.residual, unitary }),
        None => Err(Error::NoIntertwiner { residual: search.residual }),
    }
}

/// `Q_s = diag(|q|^{2k})`, `k = -s, ..., s`.
pub fn q_matrix(q: QParam, s: HalfInt) -> CMat {
    let p = q.abs();
    let entries: Vec<f64> = s.weights().map(|k| p.powf(2.0 * k.value())).collect();
    linalg::real_diag(&entries)
}

/// `‖v v* − I‖ ≤ tol` and `‖v* v − I‖ ≤ tol` for `v = v^(t)`.
pub fn check_unitary_corep(m: &TwoByTwoOp, q: QParam, t: HalfInt, tol: f64) -> Result<bool> {
    let v = evaluate_rep(m, q, t)?.to_flat();
    let id = linalg::identity(v.nrows());
    let v_adj = v.adjoint();
    Ok(op_norm(&(&v * &v_adj - &id)) <= tol && op_norm(&(&v_adj * &v - &id)) <= tol)
}

/// `Ĉ_q(t) = |q|^t ‖v^(t)‖` for `A = A_{1/2}` and `t = 0, 1/2, ..., t_max`.
/// Bounded in `t`; an empirical stand-in for the constant relating
/// `‖v^(t)‖` to `|q|^{-t}`.
pub fn c_q_proxy(q: QParam, t_max: HalfInt) -> Result<Vec<(HalfInt, f64)>> {
    let half = crate::qgmatrix::make_as(q, HalfInt::HALF);
    HalfInt::up_to(t_max)
        .map(|t| Ok((t, q.abs().powf(t.value()) * rep_norm(&half, q, t)?)))
        .collect()
}
