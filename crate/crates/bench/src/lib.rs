//! Fixed inputs shared by the kernel benchmarks.

use qbeurling::qgmatrix::{anq_bot, make_as};
use qbeurling::{HalfInt, QParam, TwoByTwoOp};

pub fn q() -> QParam {
    QParam::new(0.5).expect("0.5 is a valid deformation parameter")
}

pub fn half(twice: u32) -> HalfInt {
    HalfInt::from_twice(twice)
}

/// `A_{1/2} ⊠ A_s`, the input of the Clebsch-Gordan decomposition.
pub fn fundamental_times(s: HalfInt) -> TwoByTwoOp {
    let q = q();
    anq_bot(&make_as(q, half(1)), &make_as(q, s), q, 1e-10).expect("products of A_s stay in AN_q")
}
