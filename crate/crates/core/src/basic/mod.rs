//! The basic construction `M₁ = ⟨M, e⟩` of an inclusion, normal forms of
//! extended terms, and the Jones tower.

mod algebra;
mod normal;
mod tower;

pub use algebra::{BaseExpectation, BasicConstructionAlgebra, ConcreteM1};
pub use normal::{jones_trace, m1_norm_sqr, m1_trace, strip_e, to_normal_form, NormalForm, NormalFormDisplay, Summand};
pub use tower::{
    cond_exp_jump_search, index_jump_estimate, induce_m1, induce_n_presentation, jones_tower, InducedM1,
    JumpExpectation, JumpSource, TowerLevel, ZSet,
};
