//! Characters of free quantum groups and of SU_q(2), described by their
//! defining matrices, with the closed-form norms of the transferred
//! irreducibles.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ensure_square, inverse, op_norm, CMat};
use crate::qscalar::{chebyshev_u, HalfInt};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    /// `O_F^+`: requires `F F̄ = ±I`.
    Orthogonal,
    /// `U_F^+`: any invertible `F`.
    Unitary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FMatrix {
    f: CMat,
    flavor: Flavor,
}

impl FMatrix {
    pub fn orthogonal(f: CMat, tol: f64) -> Result<Self> {
        let n = ensure_square(&f)?;
        let ff = &f * f.conjugate();
        let id = CMat::identity(n, n);
        let scale = op_norm(&f).powi(2).max(1.0);
        if op_norm(&(&ff - &id)) > tol * scale && op_norm(&(&ff + &id)) > tol * scale {
            return Err(Error::InvalidFMatrix("F conj(F) is neither I nor -I".into()));
        }
        Ok(Self { f, flavor: Flavor::Orthogonal })
    }

    pub fn unitary(f: CMat) -> Result<Self> {
        inverse(&f)?;
        Ok(Self { f, flavor: Flavor::Unitary })
    }

    pub fn matrix(&self) -> &CMat {
        &self.f
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn size(&self) -> usize {
        self.f.nrows()
    }

    fn ensure_size(&self, v: &CMat) -> Result<()> {
        if v.nrows() != self.size() || v.ncols() != self.size() {
            return Err(Error::DimensionMismatch(format!(
                "V is {}x{} but F is {}x{}",
                v.nrows(),
                v.ncols(),
                self.size(),
                self.size()
            )));
        }
        Ok(())
    }
}

/// Classical dimension `U_{2s}(n)` of the spin-`s` irreducible of `O_F^+`,
/// `F ∈ GL_n`.
pub fn ofplus_classical_dim(n: usize, s: HalfInt) -> Result<f64> {
    chebyshev_u(s.twice() as i64, n as f64)
}

/// Room for rounding in SVD-computed norms compared against `β`.
const NORM_SLACK: f64 = 1.0 + 1e-12;

fn is_invertible(v: &CMat) -> bool {
    v.clone().try_inverse().is_some_and(|w| w.iter().all(|z| z.is_finite()))
}

/// `V` invertible and `‖V F Vᵗ − F‖ ≤ tol ‖F‖`.
pub fn ofplus_char_check(v: &CMat, f: &FMatrix, tol: f64) -> Result<bool> {
    f.ensure_size(v)?;
    if !is_invertible(v) {
        return Ok(false);
    }
    let residual = op_norm(&(v * f.matrix() * v.transpose() - f.matrix()));
    Ok(residual <= tol * op_norm(f.matrix()))
}

/// `‖v^(s)‖ = ‖V‖^{2s}`.
pub fn ofplus_rep_norm(v: &CMat, s: HalfInt) -> f64 {
    op_norm(v).powi(s.twice() as i32)
}

/// A character of `A(O_F^+, w_β)`: `V F Vᵗ = F` and `‖V‖ ≤ β`.
/// `‖V‖ ≥ 1` holds automatically for such `V` and is asserted.
pub fn ofplus_in_spec(v: &CMat, f: &FMatrix, beta: f64, tol: f64) -> Result<bool> {
    if !ofplus_char_check(v, f, tol)? {
        return Ok(false);
    }
    let norm = op_norm(v);
    if norm < 1.0 - 1e-10 {
        return Err(Error::Internal(format!("V F V^t = F with ||V|| = {norm} < 1")));
    }
    Ok(norm <= beta * NORM_SLACK)
}

/// `V` invertible and commuting with `(F*F)ᵗ` up to `tol ‖V‖ ‖F*F‖`.
pub fn ufplus_char_check(v: &CMat, f: &FMatrix, tol: f64) -> Result<bool> {
    f.ensure_size(v)?;
    if !is_invertible(v) {
        return Ok(false);
    }
    let g = (f.matrix().adjoint() * f.matrix()).transpose();
    let residual = op_norm(&(v * &g - &g * v));
    Ok(residual <= tol * (op_norm(v) * op_norm(&g)).max(1.0))
}

/// `‖v^(g)‖ = ‖V‖^n ‖V^{-1}‖^m` with `n`, `m` the numbers of `g1` and `g2` in `g`.
pub fn ufplus_rep_norm(v: &CMat, g: &F2Word) -> Result<f64> {
    if g.is_empty() {
        return Ok(1.0);
    }
    let v_inv = inverse(v)?;
    Ok(op_norm(v).powi(g.count(Letter::G1) as i32) * op_norm(&v_inv).powi(g.count(Letter::G2) as i32))
}

/// A character of `A(U_F^+, w_β)`: the commutation condition together with
/// `‖V‖ ≤ β` and `‖V^{-1}‖ ≤ β`.
pub fn ufplus_in_spec(v: &CMat, f: &FMatrix, beta: f64, tol: f64) -> Result<bool> {
    if !ufplus_char_check(v, f, tol)? {
        return Ok(false);
    }
    let (norm, norm_inv) = (op_norm(v), op_norm(&inverse(v)?));
    if norm * norm_inv < 1.0 - 1e-10 {
        return Err(Error::Internal(format!("||V|| ||V^-1|| = {} < 1", norm * norm_inv)));
    }
    Ok(norm <= beta * NORM_SLACK && norm_inv <= beta * NORM_SLACK)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    G1,
    G2,
}

impl Letter {
    pub fn bar(self) -> Self {
        match self {
            Letter::G1 => Letter::G2,
            Letter::G2 => Letter::G1,
        }
    }
}

/// A word in the free semigroup on `g1, g2`; labels the irreducibles of `U_F^+`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct F2Word(Vec<Letter>);

impl F2Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Self(letters)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self, letter: Letter) -> usize {
        self.0.iter().filter(|l| **l == letter).count()
    }

    /// Reversal with `g1 ↔ g2`.
    pub fn bar(&self) -> Self {
        Self(self.0.iter().rev().map(|l| l.bar()).collect())
    }

    pub fn concat(&self, other: &F2Word) -> Self {
        Self(self.0.iter().chain(&other.0).copied().collect())
    }

    /// Every word of length at most `max_len`, shortest first.
    pub fn all_up_to(max_len: usize) -> Vec<F2Word> {
        let mut out = vec![F2Word::empty()];
        let mut layer = vec![F2Word::empty()];
        for _ in 0..max_len {
            layer = layer
                .iter()
                .flat_map(|w| [Letter::G1, Letter::G2].map(|l| w.concat(&F2Word(vec![l]))))
                .collect();
            out.extend(layer.iter().cloned());
        }
        out
    }
}

impl fmt::Display for F2Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for l in &self.0 {
            f.write_str(match l {
                Letter::G1 => "g1",
                Letter::G2 => "g2",
            })?;
        }
        Ok(())
    }
}

impl FromStr for F2Word {
    type Err = Error;

    /// Accepts `e` or the empty string for the unit, otherwise a
    /// concatenation of `g1` and `g2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "e" {
            return Ok(Self::empty());
        }
        let bytes = s.as_bytes();
        if !bytes.len().is_multiple_of(2) {
            return Err(Error::InvalidWord(s.to_string()));
        }
        bytes
            .chunks(2)
            .map(|c| match c {
                b"g1" => Ok(Letter::G1),
                b"g2" => Ok(Letter::G2),
                _ => Err(Error::InvalidWord(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

/// `u^(g) ⊤ u^(h) ≅ ⊕ u^(αβ)` over factorizations `g = ασ`, `h = σ̄β`,
/// listed by increasing `|σ|`.
pub fn f2_fusion(g: &F2Word, h: &F2Word) -> Vec<F2Word> {
    let mut out = Vec::new();
    for k in 0..=g.len().min(h.len()) {
        let sigma = F2Word(g.0[g.len() - k..].to_vec());
        if sigma.bar().0 == h.0[..k] {
            out.push(F2Word(g.0[..g.len() - k].iter().chain(&h.0[k..]).copied().collect()));
        }
    }
    out
}

/// `V` is a permutation matrix up to `tol` entrywise.
pub fn snplus_char_check(v: &CMat, tol: f64) -> bool {
    if v.nrows() != v.ncols() {
        return false;
    }
    let n = v.nrows();
    let mut row_ones = vec![0usize; n];
    let mut col_ones = vec![0usize; n];
    for i in 0..n {
        for j in 0..n {
            let z = v[(i, j)];
            if (z - Complex64::new(1.0, 0.0)).norm() <= tol {
                row_ones[i] += 1;
                col_ones[j] += 1;
            } else if z.norm() > tol {
                return false;
            }
        }
    }
    row_ones.iter().chain(&col_ones).all(|&c| c == 1)
}

/// Characters `[[ρ, 0], [0, ρ⁻¹]]` of `A(SU_q(2), w_β)`: `1/β ≤ |ρ| ≤ β`.
pub fn suq2_char_in_spec(rho: Complex64, beta: f64) -> Result<bool> {
    if rho == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroCharacter);
    }
    if !(beta.is_finite() && beta >= 1.0) {
        return Err(Error::InvalidWeight(format!("exponential base {beta} must be >= 1")));
    }
    let r = rho.norm();
    Ok(1.0 / beta <= r && r <= beta)
}
