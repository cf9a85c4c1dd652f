#![allow(dead_code)]

use fhn_zerohopf::fhn::{Params, FamilyTag};
use rand::Rng;

/// A parameter point on `tag`: equalities imposed exactly, inequalities
/// sampled strictly inside.
pub fn sample_family(tag: FamilyTag, rng: &mut impl Rng) -> Params {
    match tag {
        FamilyTag::OriginI => {
            let d: f64 = rng.gen_range(0.1..3.0);
            let bmax = d.powf(-1.5);
            let b = rng.gen_range(-0.95..0.95) * bmax;
            Params::new(-1.0 / d, b, b * d, d)
        }
        FamilyTag::OriginII => {
            let d = loop {
                let d: f64 = rng.gen_range(-3.0..3.0);
                if d.abs() > 0.05 {
                    break d;
                }
            };
            Params::new(rng.gen_range(-3.0..-0.01), 0.0, 0.0, d)
        }
        FamilyTag::PPlusI | FamilyTag::PMinusI => loop {
            let p = Params::new(rng.gen_range(-4.0..4.0), 0.0, 0.0, rng.gen_range(0.1..5.0));
            if p.discriminant() > 1e-3 && has_tag(&p, tag) {
                break p;
            }
        },
        FamilyTag::PPlusII | FamilyTag::PMinusII | FamilyTag::PPlusIII | FamilyTag::PMinusIII | FamilyTag::CoincidentI => {
            let d: f64 = rng.gen_range(0.1..3.0);
            let root = 2.0 / d.sqrt();
            let a = match tag {
                FamilyTag::PPlusII | FamilyTag::PMinusII => 1.0 - root,
                FamilyTag::PPlusIII | FamilyTag::PMinusIII => 1.0 + root,
                _ => {
                    if rng.gen_bool(0.5) {
                        1.0 - root
                    } else {
                        1.0 + root
                    }
                }
            };
            let bmax = d.powf(-1.5);
            let b = rng.gen_range(-0.95..0.95) * bmax;
            Params::new(a, b, b * d, d)
        }
    }
}

pub fn has_tag(p: &Params, tag: FamilyTag) -> bool {
    fhn_zerohopf::fhn::classify_zero_hopf(p, fhn_zerohopf::fhn::DEFAULT_FAMILY_TOL)
        .iter()
        .any(|f| f.tag == tag)
}
