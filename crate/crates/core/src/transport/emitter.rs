//! Light sources. Emissive rectangles are realized as scene geometry at
//! build time so they are found by BSDF sampling alone; the constant
//! environment catches every escaping ray.

use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;
use crate::transport::Rgb;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Emitter {
    Constant {
        radiance: Rgb,
    },
    Rect {
        corner: Vec3,
        edge_u: Vec3,
        edge_v: Vec3,
        radiance: Rgb,
    },
}

impl Emitter {
    pub fn radiance(&self) -> Rgb {
        match self {
            Emitter::Constant { radiance } | Emitter::Rect { radiance, .. } => *radiance,
        }
    }

    pub fn is_valid(&self) -> bool {
        let r = self.radiance();
        r.r >= 0.0 && r.g >= 0.0 && r.b >= 0.0 && r.is_finite()
    }
}

/// Environment radiance for escaping rays; zero without an environment.
pub fn eval_env(emitters: &[Emitter], _dir: Vec3) -> Rgb {
    let mut acc = Rgb::BLACK;
    for e in emitters {
        if let Emitter::Constant { radiance } = e {
            acc += *radiance;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_env_is_direction_independent() {
        let emitters = vec![Emitter::Constant {
            radiance: Rgb::new(1.0, 2.0, 0.5),
        }];
        let a = eval_env(&emitters, Vec3::new(0.0, 0.0, 1.0));
        let b = eval_env(&emitters, Vec3::new(1.0, 0.0, 0.0).normalized());
        assert_eq!(a, Rgb::new(1.0, 2.0, 0.5));
        assert_eq!(a, b);
    }

    #[test]
    fn no_env_gives_black() {
        assert!(eval_env(&[], Vec3::new(0.0, 1.0, 0.0)).is_black());
    }
}
