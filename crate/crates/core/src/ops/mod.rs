//! Linear operators, resolvent catalog, and cocoercive maps.

mod cocoercive;
mod linear;
mod monotone;

pub use cocoercive::{
    cocoercivity_defect, grad_quadratic, AffineMap, CocoerciveMap, DiagonalMap, QuadraticGradient, ZeroMap,
};
pub use linear::{BlockOperator, Convolution2d, LinearOperator};
pub use monotone::{
    firm_nonexpansive_defect, prox_box, prox_group_l21, project_pairwise_l2_ball, BoxConstraint, GroupShrink,
    MonotoneOperator, PairwiseBall, SoftShrink, Step, ZeroOperator,
};
