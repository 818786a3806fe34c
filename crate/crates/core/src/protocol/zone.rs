use serde::{Deserialize, Serialize};

use crate::geometry::{OrthoTriplet, UnitVec3};
use crate::lhv::LhvRecord;

use super::BlochState;

/// Segment of `[0, √3]` that the shared `u` lands in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Zone {
    ALambda,
    AMu,
    ANu,
    Reject,
}

impl Zone {
    pub const ALL: [Zone; 4] = [Zone::ALambda, Zone::AMu, Zone::ANu, Zone::Reject];

    pub fn label(self) -> Option<Label> {
        match self {
            Zone::ALambda => Some(Label::Lambda),
            Zone::AMu => Some(Label::Mu),
            Zone::ANu => Some(Label::Nu),
            Zone::Reject => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Zone::ALambda => "A_lambda",
            Zone::AMu => "A_mu",
            Zone::ANu => "A_nu",
            Zone::Reject => "R",
        }
    }
}

/// Which vector of an accepted triplet was chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Lambda,
    Mu,
    Nu,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Lambda, Label::Mu, Label::Nu];

    pub fn zone(self) -> Zone {
        match self {
            Label::Lambda => Zone::ALambda,
            Label::Mu => Zone::AMu,
            Label::Nu => Zone::ANu,
        }
    }

    pub fn pick(self, t: &OrthoTriplet) -> UnitVec3 {
        match self {
            Label::Lambda => t.lambda,
            Label::Mu => t.mu,
            Label::Nu => t.nu,
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Label::Lambda => 0,
            Label::Mu => 1,
            Label::Nu => 2,
        }
    }

    pub fn from_index(i: u8) -> Option<Label> {
        match i {
            0 => Some(Label::Lambda),
            1 => Some(Label::Mu),
            2 => Some(Label::Nu),
            _ => None,
        }
    }
}

/// ±1 valued outcome or sign bit. `sign(0)` is `Plus`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn of(x: f64) -> Sign {
        if x >= 0.0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn apply(self, v: UnitVec3) -> UnitVec3 {
        match self {
            Sign::Plus => v,
            Sign::Minus => -v,
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;
    fn mul(self, o: Sign) -> Sign {
        if self == o {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// Cumulative thresholds `|a·λ|`, `|a·λ|+|a·μ|`, `|a·λ|+|a·μ|+|a·ν|`.
pub fn thresholds(a: &BlochState, t: &OrthoTriplet) -> [f64; 3] {
    let a = a.vector();
    let t1 = a.dot(t.lambda).abs();
    let t2 = t1 + a.dot(t.mu).abs();
    let t3 = t2 + a.dot(t.nu).abs();
    [t1, t2, t3]
}

/// Classifies `record.u` into the half-open segments of `[0, √3]`.
pub fn zone_of(a: &BlochState, record: &LhvRecord) -> Zone {
    let [t1, t2, t3] = thresholds(a, &record.triplet);
    let u = record.u;
    if u < t1 {
        Zone::ALambda
    } else if u < t2 {
        Zone::AMu
    } else if u < t3 {
        Zone::ANu
    } else {
        Zone::Reject
    }
}
