use serde::Serialize;

use super::Direction;
use crate::classify::{classify_sides, Label, SigmaClass, TOL_TANGENCY};
use crate::error::Result;
use crate::geometry::Vec2;
use crate::system::{PiecewiseSystem, Sides, SurfaceId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchOption {
    Slide,
    Depart(Side),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Decision {
    Cross(Side),
    Slide,
    Branch(Vec<BranchOption>),
}

#[derive(Debug, Clone)]
pub struct Transition {
    pub decision: Decision,
    pub class: SigmaClass,
    pub sides: Sides,
}

/// Whether the directed field of one side can leave the surface into its side.
fn can_leave(first: f64, class: &SigmaClass, plus: bool, s: f64) -> bool {
    let outward = if plus { s * first } else { -s * first };
    if first.abs() > TOL_TANGENCY {
        return outward > 0.0;
    }
    let contact = match (&class.tangency, plus) {
        (Some(t), true) => t.plus,
        (Some(t), false) => t.minus,
        _ => None,
    };
    match contact {
        Some(c) => {
            let directed = c.leading * s.powi(c.order as i32);
            if plus {
                directed > 0.0
            } else {
                directed < 0.0
            }
        }
        None => false,
    }
}

pub(crate) fn decide(class: &SigmaClass, dir: Direction) -> Decision {
    let s = dir.sign();
    let a = s * class.f_plus_h;
    let b = s * class.f_minus_h;
    if class.label != Label::Tangency {
        return if a * b > 0.0 {
            Decision::Cross(if a > 0.0 { Side::Plus } else { Side::Minus })
        } else if a < 0.0 {
            Decision::Slide
        } else {
            Decision::Branch(vec![BranchOption::Slide, BranchOption::Depart(Side::Plus), BranchOption::Depart(Side::Minus)])
        };
    }
    let up = can_leave(class.f_plus_h, class, true, s);
    let down = can_leave(class.f_minus_h, class, false, s);
    match (up, down) {
        (true, true) => Decision::Branch(vec![BranchOption::Depart(Side::Plus), BranchOption::Depart(Side::Minus)]),
        (true, false) => Decision::Cross(Side::Plus),
        (false, true) => Decision::Cross(Side::Minus),
        (false, false) => Decision::Slide,
    }
}

/// What a solution reaching `p` on a surface does next, in the given time direction.
pub fn transition(sys: &PiecewiseSystem, id: SurfaceId, p: Vec2, dir: Direction) -> Result<Transition> {
    let sides = sys.sides(id, p)?;
    let class = classify_sides(sys, &sides)?;
    Ok(Transition { decision: decide(&class, dir), class, sides })
}

/// Whether `p` belongs to the non-uniqueness seed set.
pub fn is_seed(class: &SigmaClass) -> bool {
    match class.label {
        Label::Sliding | Label::Escaping => true,
        Label::Crossing => false,
        Label::Tangency => {
            matches!(decide(class, Direction::Forward), Decision::Branch(_))
                || matches!(decide(class, Direction::Backward), Decision::Branch(_))
        }
    }
}
