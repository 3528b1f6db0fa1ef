//! Central weights on the dual of SU_q(2), the weighted Fourier-algebra norm,
//! and cb-norm estimates for homomorphisms transferred from SL_q(2,ℂ)-matrices.

use std::collections::BTreeMap;
use std::fmt;

use crate::corep::{q_matrix, rep_norm};
use crate::error::{Error, Result};
use crate::linalg::{self, trace_norm, CMat};
use crate::qgmatrix::TwoByTwoOp;
use crate::qscalar::{quantum_dim, HalfInt, QParam};

#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    /// `(1 + τ(s))^α`
    Polynomial(f64),
    /// `β^{τ(s)}`
    Exponential(f64),
    Table(BTreeMap<HalfInt, f64>),
}

/// Which fusion graph the labels live on. Fixes the length function `τ` and
/// the fusion rule used by [`check_weight`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dual {
    /// Half-integer labels, `τ(s) = 2s`, `u^(t) ⊤ u^(t')` contains `|t-t'|, ..., t+t'`.
    #[default]
    SuQ2,
    /// Integer labels, `τ(s) = s`, `u^(k) ⊤ u^(l)` contains every `|k-l| ≤ r ≤ k+l`.
    SnPlus,
}

impl Dual {
    pub fn length(self, s: HalfInt) -> f64 {
        match self {
            Dual::SuQ2 => s.twice() as f64,
            Dual::SnPlus => s.value(),
        }
    }

    /// All labels up to `max`.
    pub fn labels(self, max: HalfInt) -> Vec<HalfInt> {
        HalfInt::up_to(max)
            .filter(|s| self == Dual::SuQ2 || s.is_integer())
            .collect()
    }

    /// Labels `s` with `u^(s) ⊆ u^(t) ⊤ u^(t')`.
    pub fn fusion(self, t: HalfInt, t2: HalfInt) -> Vec<HalfInt> {
        let lo = t.abs_diff(t2).twice();
        let hi = (t + t2).twice();
        (lo..=hi).step_by(2).map(HalfInt::from_twice).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    pub kind: WeightKind,
    pub dual: Dual,
}

impl Weight {
    pub fn polynomial(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::InvalidWeight(format!("polynomial exponent {alpha} must be >= 0")));
        }
        Ok(Self { kind: WeightKind::Polynomial(alpha), dual: Dual::SuQ2 })
    }

    pub fn exponential(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta >= 1.0) {
            return Err(Error::InvalidWeight(format!("exponential base {beta} must be >= 1")));
        }
        Ok(Self { kind: WeightKind::Exponential(beta), dual: Dual::SuQ2 })
    }

    pub fn table(values: BTreeMap<HalfInt, f64>) -> Result<Self> {
        if let Some((s, v)) = values.iter().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidWeight(format!("table value {v} at s = {s} must be positive")));
        }
        Ok(Self { kind: WeightKind::Table(values), dual: Dual::SuQ2 })
    }

    pub fn with_dual(mut self, dual: Dual) -> Self {
        self.dual = dual;
        self
    }

    pub fn value(&self, s: HalfInt) -> Result<f64> {
        let tau = self.dual.length(s);
        match &self.kind {
            WeightKind::Polynomial(alpha) => Ok((1.0 + tau).powf(*alpha)),
            WeightKind::Exponential(beta) => Ok(beta.powf(tau)),
            WeightKind::Table(map) => map.get(&s).copied().ok_or_else(|| Error::TableMiss(s.to_string())),
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            WeightKind::Polynomial(a) => write!(f, "poly:{a}"),
            WeightKind::Exponential(b) => write!(f, "exp:{b}"),
            WeightKind::Table(m) => write!(f, "table[{}]", m.len()),
        }
    }
}

pub fn weight_value(w: &Weight, s: HalfInt) -> Result<f64> {
    w.value(s)
}

/// A triple with `u^(s) ⊆ u^(t) ⊤ u^(t')` but `w(s) > w(t) w(t')`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightViolation {
    pub s: HalfInt,
    pub t: HalfInt,
    pub t2: HalfInt,
    pub w_s: f64,
    pub product: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightReport {
    pub triples_checked: usize,
    pub violations: Vec<WeightViolation>,
    /// Smallest value seen, a lower bound candidate for `δ`.
    pub min_value: f64,
}

impl WeightReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.min_value > 0.0
    }
}

/// Submultiplicativity over every fusion triple with all labels `≤ s_max`.
pub fn check_weight(w: &Weight, s_max: HalfInt) -> Result<WeightReport> {
    let labels = w.dual.labels(s_max);
    let mut values = BTreeMap::new();
    for &s in &labels {
        values.insert(s, w.value(s)?);
    }
    let mut report = WeightReport {
        triples_checked: 0,
        violations: Vec::new(),
        min_value: values.values().copied().fold(f64::INFINITY, f64::min),
    };
    for &t in &labels {
        for &t2 in &labels {
            let product = values[&t] * values[&t2];
            for s in w.dual.fusion(t, t2).into_iter().filter(|s| *s <= s_max) {
                report.triples_checked += 1;
                let w_s = values[&s];
                if w_s > product * (1.0 + 1e-12) {
                    report.violations.push(WeightViolation { s, t, t2, w_s, product });
                }
            }
        }
    }
    Ok(report)
}

/// A finitely supported family `X = (X_s)` with `X_s` of size `2s+1`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoeffFamily {
    blocks: BTreeMap<HalfInt, CMat>,
}

impl CoeffFamily {
    pub fn new(blocks: BTreeMap<HalfInt, CMat>) -> Result<Self> {
        for (s, x) in &blocks {
            if x.nrows() != s.dim() || x.ncols() != s.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "block at s = {s} must be {0}x{0}, got {1}x{2}",
                    s.dim(),
                    x.nrows(),
                    x.ncols()
                )));
            }
        }
        Ok(Self { blocks })
    }

    pub fn single(s: HalfInt, x: CMat) -> Result<Self> {
        Self::new(BTreeMap::from([(s, x)]))
    }

    pub fn blocks(&self) -> &BTreeMap<HalfInt, CMat> {
        &self.blocks
    }

    pub fn scale(&self, z: num_complex::Complex64) -> Self {
        Self { blocks: self.blocks.iter().map(|(s, x)| (*s, x * z)).collect() }
    }

    /// Blockwise sum; support is the union.
    pub fn add(&self, other: &Self) -> Self {
        let mut blocks = self.blocks.clone();
        for (s, x) in &other.blocks {
            blocks.entry(*s).and_modify(|y| *y += x).or_insert_with(|| x.clone());
        }
        Self { blocks }
    }
}

/// `Σ_s d_s w(s) ‖X_s Q_s^{-1}‖₁`.
pub fn fourier_norm(x: &CoeffFamily, w: &Weight, q: QParam) -> Result<f64> {
    let mut total = 0.0;
    for (&s, xs) in &x.blocks {
        let q_inv = q_matrix(q, s).map(|z| if z == linalg::ZERO { z } else { z.inv() });
        total += quantum_dim(q, s) * w.value(s)? * trace_norm(&(xs * q_inv))?;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    Saturating,
    Growing,
}

impl fmt::Display for Trend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Trend::Saturating => "saturating",
            Trend::Growing => "growing",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CbEstimate {
    /// `(t, ‖v^(t)‖ / w(t))` for `t = 0, 1/2, ..., t_max`.
    pub ratios: Vec<(HalfInt, f64)>,
    pub sup: f64,
    pub argmax: HalfInt,
    pub trend: Trend,
}

const GROWTH_FACTOR: f64 = 1.0 + 1e-6;

/// Truncation of `sup_t w(t)^{-1} ‖v^(t)‖` at `t_max`. The trend is growing
/// when each of the last three consecutive quotients `r(t+1/2)/r(t)` exceeds
/// `1 + 1e-6`.
pub fn cb_norm_estimate(m: &TwoByTwoOp, q: QParam, w: &Weight, t_max: HalfInt) -> Result<CbEstimate> {
    let ratios = HalfInt::up_to(t_max)
        .map(|t| Ok((t, rep_norm(m, q, t)? / w.value(t)?)))
        .collect::<Result<Vec<_>>>()?;
    let (argmax, sup) = ratios
        .iter()
        .copied()
        .fold((HalfInt::ZERO, f64::NEG_INFINITY), |best, (t, r)| if r > best.1 { (t, r) } else { best });
    let trend = if ratios.len() >= 4 && ratios.windows(2).rev().take(3).all(|p| p[1].1 > p[0].1 * GROWTH_FACTOR) {
        Trend::Growing
    } else {
        Trend::Saturating
    };
    Ok(CbEstimate { ratios, sup, argmax, trend })
}

/// Closed-form criterion: `v_{A_s}` is bounded on `A(SU_q(2), w_β)` iff
/// `|q|^{-s} ≤ β`.
pub fn classify_boundedness(q: QParam, s: HalfInt, beta: f64) -> Result<bool> {
    if !(beta.is_finite() && beta >= 1.0) {
        return Err(Error::InvalidWeight(format!("exponential base {beta} must be >= 1")));
    }
    Ok(q.abs().powf(-s.value()) <= beta * (1.0 + 1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::testutil::random_cmat;
    use crate::qgmatrix::make_as;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(x: f64) -> QParam {
        QParam::new(x).unwrap()
    }

    fn h(twice: u32) -> HalfInt {
        HalfInt::from_twice(twice)
    }

    #[test]
    fn weight_values() {
        assert_eq!(Weight::exponential(2.0).unwrap().value(HalfInt::ONE).unwrap(), 4.0);
        assert_eq!(Weight::polynomial(0.0).unwrap().value(h(7)).unwrap(), 1.0);
        assert_eq!(Weight::polynomial(1.0).unwrap().value(HalfInt::HALF).unwrap(), 2.0);
        let sn = Weight::exponential(2.0).unwrap().with_dual(Dual::SnPlus);
        assert_eq!(sn.value(h(6)).unwrap(), 8.0);
        let table = Weight::table(BTreeMap::from([(HalfInt::ZERO, 1.0)])).unwrap();
        assert_eq!(table.value(HalfInt::HALF), Err(Error::TableMiss("1/2".into())));
    }

    #[test]
    fn weight_parameter_ranges() {
        assert!(Weight::exponential(0.5).is_err());
        assert!(Weight::polynomial(-1.0).is_err());
        assert!(Weight::table(BTreeMap::from([(HalfInt::ZERO, 0.0)])).is_err());
    }

    #[test]
    fn builtin_weights_are_submultiplicative() {
        for w in [
            Weight::polynomial(0.0),
            Weight::polynomial(1.0),
            Weight::polynomial(2.0),
            Weight::exponential(1.0),
            Weight::exponential(2.0),
            Weight::exponential(4.0),
        ] {
            let w = w.unwrap();
            for dual in [Dual::SuQ2, Dual::SnPlus] {
                let report = check_weight(&w.clone().with_dual(dual), h(8)).unwrap();
                assert!(report.passed(), "{w}: {:?}", report.violations.first());
                assert!(report.triples_checked > 0);
            }
        }
    }

    #[test]
    fn table_counterexample() {
        let mut values: BTreeMap<HalfInt, f64> = HalfInt::up_to(h(4)).map(|s| (s, 1.0)).collect();
        values.insert(HalfInt::ONE, 0.1);
        let report = check_weight(&Weight::table(values).unwrap(), h(4)).unwrap();
        assert!(!report.passed());
        assert!(report.violations.iter().any(|v| v.s == HalfInt::HALF && v.t == HalfInt::ONE && v.t2 == HalfInt::HALF));
    }

    #[test]
    fn fusion_rules() {
        assert_eq!(Dual::SuQ2.fusion(HalfInt::HALF, HalfInt::HALF), vec![h(0), h(2)]);
        assert_eq!(Dual::SnPlus.fusion(h(2), h(4)), vec![h(2), h(4), h(6)]);
        assert_eq!(Dual::SnPlus.labels(h(5)), vec![h(0), h(2), h(4)]);
    }

    #[test]
    fn fourier_norm_examples() {
        let w = Weight::exponential(3.0).unwrap();
        let qq = q(0.5);
        let x0 = CoeffFamily::single(HalfInt::ZERO, linalg::identity(1)).unwrap();
        assert!((fourier_norm(&x0, &w, qq).unwrap() - 1.0).abs() < 1e-15);

        let xh = CoeffFamily::single(HalfInt::HALF, q_matrix(qq, HalfInt::HALF)).unwrap();
        let want = quantum_dim(qq, HalfInt::HALF) * w.value(HalfInt::HALF).unwrap() * 2.0;
        assert!((fourier_norm(&xh, &w, qq).unwrap() - want).abs() < 1e-12);

        assert!(CoeffFamily::single(HalfInt::ONE, linalg::identity(2)).is_err());
    }

    #[test]
    fn fourier_norm_monotone_in_weight() {
        let mut r = ChaCha8Rng::seed_from_u64(31);
        let x = random_family(&mut r, 4);
        let small = Weight::polynomial(1.0).unwrap();
        let large = Weight::exponential(2.0).unwrap();
        assert!(fourier_norm(&x, &small, q(0.5)).unwrap() <= fourier_norm(&x, &large, q(0.5)).unwrap());
    }

    fn random_family(r: &mut ChaCha8Rng, max_twice: u32) -> CoeffFamily {
        use rand::Rng;
        let mut blocks = BTreeMap::new();
        for twice in 0..=max_twice {
            if r.random_bool(0.6) {
                let s = h(twice);
                blocks.insert(s, random_cmat(r, s.dim(), s.dim()));
            }
        }
        CoeffFamily::new(blocks).unwrap()
    }

    #[test]
    fn cb_norm_unitary_character() {
        let m = TwoByTwoOp::character(Complex64::from_polar(1.0, 1.1)).unwrap();
        let est = cb_norm_estimate(&m, q(0.5), &Weight::exponential(2.0).unwrap(), h(8)).unwrap();
        assert!((est.sup - 1.0).abs() < 1e-12);
        assert_eq!(est.argmax, HalfInt::ZERO);
        assert_eq!(est.trend, Trend::Saturating);
    }

    #[test]
    fn cb_norm_trend_matches_criterion() {
        let qq = q(0.5);
        let s = HalfInt::ONE;
        // |q|^{-s} = 2
        let bounded = cb_norm_estimate(&make_as(qq, s), qq, &Weight::exponential(4.0).unwrap(), h(16)).unwrap();
        assert_eq!(bounded.trend, Trend::Saturating);
        let unbounded = cb_norm_estimate(&make_as(qq, s), qq, &Weight::exponential(1.0).unwrap(), h(16)).unwrap();
        assert_eq!(unbounded.trend, Trend::Growing);
        for (t, r) in &unbounded.ratios {
            assert!(*r >= 4.0_f64.powf(t.value()) * (1.0 - 1e-9));
        }
    }

    #[test]
    fn cb_norm_monotone_in_weight() {
        let qq = q(0.7);
        let m = make_as(qq, h(2));
        let lo = cb_norm_estimate(&m, qq, &Weight::polynomial(1.0).unwrap(), h(8)).unwrap();
        let hi = cb_norm_estimate(&m, qq, &Weight::exponential(2.0).unwrap(), h(8)).unwrap();
        assert!(lo.sup >= hi.sup);
    }

    #[test]
    fn short_range_is_saturating() {
        let qq = q(0.3);
        let est = cb_norm_estimate(&make_as(qq, h(6)), qq, &Weight::polynomial(0.0).unwrap(), h(2)).unwrap();
        assert_eq!(est.ratios.len(), 3);
        assert_eq!(est.trend, Trend::Saturating);
    }

    #[test]
    fn classifier_examples() {
        assert!(classify_boundedness(q(0.5), HalfInt::ONE, 4.0).unwrap());
        assert!(!classify_boundedness(q(0.5), h(6), 4.0).unwrap());
        assert!(classify_boundedness(q(0.5), h(4), 4.0).unwrap());
        assert!(classify_boundedness(q(0.1), HalfInt::ZERO, 1.0).unwrap());
        assert!(classify_boundedness(q(0.5), HalfInt::ONE, 0.9).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn fourier_norm_is_a_norm(seed in any::<u64>(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let x = random_family(&mut r, 6);
            let y = random_family(&mut r, 6);
            let w = Weight::exponential(1.5).unwrap();
            let qq = q(-0.6);
            let nx = fourier_norm(&x, &w, qq).unwrap();
            let ny = fourier_norm(&y, &w, qq).unwrap();
            let nxy = fourier_norm(&x.add(&y), &w, qq).unwrap();
            prop_assert!(nxy <= nx + ny + 1e-10 * (nx + ny).max(1.0));
            let z = Complex64::new(re, im);
            let nz = fourier_norm(&x.scale(z), &w, qq).unwrap();
            prop_assert!((nz - z.norm() * nx).abs() <= 1e-10 * nx.max(1.0));
        }
    }
}
