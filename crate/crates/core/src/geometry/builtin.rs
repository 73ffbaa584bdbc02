//! Catalogue of named domains.

use std::collections::BTreeMap;

use serde::Serialize;

use super::polytope::{convex_domain, Halfspace};
use super::{detect_symmetries, DomainSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Builtin {
    /// `[0,a] x [0,b]`, or `[-a/2,a/2] x [-b/2,b/2]` when centred.
    Rectangle { a: f64, b: f64, centered: bool },
    Box { a: f64, b: f64, c: f64, centered: bool },
    Disk { r: f64 },
    /// `{0 <= x,y <= 1, y - 1 <= z <= x}`.
    DoublePrism,
    /// Upper face moved to `z = x + c`.
    DoublePrismShifted { c: f64 },
    /// Double prism cut by `y - x <= c`.
    DoublePrismTruncated { c: f64 },
    /// Bipyramid over `[-a/2,a/2] x [-b/2,b/2]` with apexes at `z = +-h`.
    Octahedron { a: f64, b: f64, h: f64 },
    Interval { len: f64 },
    /// `{0 <= x <= 1, x - 1 <= y <= x}`.
    Parallelogram,
    /// `[0,2]^2` minus `[1,2]^2`; reentrant corner, no exterior ball.
    LShape,
    Product {
        left: std::boxed::Box<Builtin>,
        right: std::boxed::Box<Builtin>,
    },
}

impl Builtin {
    pub const NAMES: &'static [&'static str] = &[
        "rectangle",
        "square",
        "box",
        "cube",
        "disk",
        "double-prism",
        "double-prism-shifted",
        "double-prism-truncated",
        "octahedron",
        "interval",
        "parallelogram",
        "lshape",
    ];

    /// Looks up a builtin by name; missing parameters take their defaults.
    /// Products are formed with [`Builtin::product`].
    pub fn from_name(name: &str, params: &BTreeMap<String, f64>) -> Result<Builtin> {
        let get = |k: &str, d: f64| params.get(k).copied().unwrap_or(d);
        let centered = get("centered", 0.0) != 0.0;
        let positive = |k: &str, v: f64| -> Result<f64> {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::InvalidInput(format!("parameter {k} must be positive, got {v}")))
            }
        };
        let b = match name.to_ascii_lowercase().replace('_', "-").as_str() {
            "rectangle" => Builtin::Rectangle {
                a: positive("a", get("a", 1.0))?,
                b: positive("b", get("b", 1.0))?,
                centered,
            },
            "square" => {
                let s = positive("a", get("a", 1.0))?;
                Builtin::Rectangle { a: s, b: s, centered }
            }
            "box" => Builtin::Box {
                a: positive("a", get("a", 1.0))?,
                b: positive("b", get("b", 1.0))?,
                c: positive("c", get("c", 1.0))?,
                centered,
            },
            "cube" => {
                let s = positive("a", get("a", 1.0))?;
                Builtin::Box { a: s, b: s, c: s, centered }
            }
            "disk" => Builtin::Disk { r: positive("r", get("r", 1.0))? },
            "double-prism" => Builtin::DoublePrism,
            "double-prism-shifted" => Builtin::DoublePrismShifted { c: get("c", 0.5) },
            "double-prism-truncated" => Builtin::DoublePrismTruncated { c: get("c", 0.5) },
            "octahedron" => Builtin::Octahedron {
                a: positive("a", get("a", 2.0))?,
                b: positive("b", get("b", 2.0))?,
                h: positive("h", get("h", 1.0))?,
            },
            "interval" => Builtin::Interval { len: positive("len", get("len", 1.0))? },
            "parallelogram" => Builtin::Parallelogram,
            "lshape" | "l-shape" => Builtin::LShape,
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown builtin domain '{other}' (known: {})",
                    Self::NAMES.join(", ")
                )))
            }
        };
        Ok(b)
    }

    pub fn product(left: Builtin, right: Builtin) -> Builtin {
        Builtin::Product {
            left: std::boxed::Box::new(left),
            right: std::boxed::Box::new(right),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Builtin::Rectangle { a, b, centered } => {
                format!("rectangle({a},{b}{})", if *centered { ",centered" } else { "" })
            }
            Builtin::Box { a, b, c, centered } => {
                format!("box({a},{b},{c}{})", if *centered { ",centered" } else { "" })
            }
            Builtin::Disk { r } => format!("disk({r})"),
            Builtin::DoublePrism => "double-prism".into(),
            Builtin::DoublePrismShifted { c } => format!("double-prism-shifted({c})"),
            Builtin::DoublePrismTruncated { c } => format!("double-prism-truncated({c})"),
            Builtin::Octahedron { a, b, h } => format!("octahedron({a},{b},{h})"),
            Builtin::Interval { len } => format!("interval({len})"),
            Builtin::Parallelogram => "parallelogram".into(),
            Builtin::LShape => "lshape".into(),
            Builtin::Product { left, right } => format!("product({},{})", left.label(), right.label()),
        }
    }
}

fn axis_hs(axis: usize, lo: f64, hi: f64, out: &mut Vec<Halfspace>) {
    let mut e = [0.0; 3];
    e[axis] = -1.0;
    out.push(Halfspace::new(e, -lo));
    e[axis] = 1.0;
    out.push(Halfspace::new(e, hi));
}

fn convex(dim: usize, hs: &[Halfspace]) -> Result<DomainSpec> {
    Ok(convex_domain(dim, hs, &[])?.0)
}

fn double_prism_hs(top: f64) -> Vec<Halfspace> {
    let mut hs = Vec::new();
    axis_hs(0, 0.0, 1.0, &mut hs);
    axis_hs(1, 0.0, 1.0, &mut hs);
    hs.push(Halfspace::new([-1.0, 0.0, 1.0], top));
    hs.push(Halfspace::new([0.0, 1.0, -1.0], 1.0));
    hs
}

/// Instantiates a builtin domain. Faces of the axis-aligned boxes are ordered
/// `x-, x+, y-, y+, z-, z+`.
pub fn builtin_domain(b: &Builtin) -> Result<DomainSpec> {
    let mut spec = match b {
        Builtin::Rectangle { a, b, centered } => {
            let (sa, sb) = if *centered { (a / 2.0, b / 2.0) } else { (0.0, 0.0) };
            let mut hs = Vec::new();
            axis_hs(0, -sa, a - sa, &mut hs);
            axis_hs(1, -sb, b - sb, &mut hs);
            convex(2, &hs)?
        }
        Builtin::Box { a, b, c, centered } => {
            let s = if *centered { 0.5 } else { 0.0 };
            let mut hs = Vec::new();
            axis_hs(0, -s * a, a - s * a, &mut hs);
            axis_hs(1, -s * b, b - s * b, &mut hs);
            axis_hs(2, -s * c, c - s * c, &mut hs);
            convex(3, &hs)?
        }
        Builtin::Disk { r } => DomainSpec::disk(*r, vec![])?,
        Builtin::DoublePrism => convex(3, &double_prism_hs(0.0))?,
        Builtin::DoublePrismShifted { c } => {
            if !(*c > -1.0) {
                return Err(Error::InvalidInput(format!("shift must exceed -1, got {c}")));
            }
            convex(3, &double_prism_hs(*c))?
        }
        Builtin::DoublePrismTruncated { c } => {
            if !(*c > -1.0) {
                return Err(Error::InvalidInput(format!("truncation must exceed -1, got {c}")));
            }
            let mut hs = double_prism_hs(0.0);
            hs.push(Halfspace::new([-1.0, 1.0, 0.0], *c));
            convex(3, &hs)?
        }
        Builtin::Octahedron { a, b, h } => {
            let mut hs = Vec::new();
            for sz in [1.0, -1.0] {
                for sx in [1.0, -1.0] {
                    hs.push(Halfspace::new([sx * 2.0 / a, 0.0, sz / h], 1.0));
                }
                for sy in [1.0, -1.0] {
                    hs.push(Halfspace::new([0.0, sy * 2.0 / b, sz / h], 1.0));
                }
            }
            convex(3, &hs)?
        }
        Builtin::Interval { len } => {
            let mut hs = Vec::new();
            axis_hs(0, 0.0, *len, &mut hs);
            convex(1, &hs)?
        }
        Builtin::Parallelogram => {
            let mut hs = Vec::new();
            axis_hs(0, 0.0, 1.0, &mut hs);
            hs.push(Halfspace::new([1.0, -1.0, 0.0], 1.0));
            hs.push(Halfspace::new([-1.0, 1.0, 0.0], 0.0));
            convex(2, &hs)?
        }
        Builtin::LShape => {
            let v = vec![
                [0.0, 0.0, 0.0],
                [2.0, 0.0, 0.0],
                [2.0, 1.0, 0.0],
                [1.0, 1.0, 0.0],
                [1.0, 2.0, 0.0],
                [0.0, 2.0, 0.0],
            ];
            let faces = (0..6).map(|i| vec![i, (i + 1) % 6]).collect();
            let mut s = DomainSpec::polytope(2, v, faces, &BTreeMap::new())?;
            s.exterior_ball_declared = false;
            s
        }
        Builtin::Product { left, right } => {
            DomainSpec::product(builtin_domain(left)?, builtin_domain(right)?)?
        }
    };
    spec.name = b.label();
    spec.builtin = Some(b.clone());
    spec.symmetry_planes = detect_symmetries(&spec)?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DomainKind, is_lip};

    #[test]
    fn double_prism_shape() {
        let d = builtin_domain(&Builtin::DoublePrism).unwrap();
        let DomainKind::Polytope { vertices, faces } = &d.kind else { panic!() };
        assert_eq!(vertices.len(), 7);
        assert_eq!(faces.len(), 6);
        assert!((d.volume() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn octahedron_shape() {
        let d = builtin_domain(&Builtin::Octahedron { a: 2.0, b: 2.0, h: 1.0 }).unwrap();
        let DomainKind::Polytope { vertices, faces } = &d.kind else { panic!() };
        assert_eq!(vertices.len(), 6);
        assert_eq!(faces.len(), 8);
        // bipyramid over a 2x2 square with height 1 on each side
        assert!((d.volume() - 8.0 / 3.0).abs() < 1e-13);
        assert!(!is_lip(&d, true).unwrap().is_lip);
    }

    #[test]
    fn product_of_interval_and_square_is_cube() {
        let p = builtin_domain(&Builtin::product(
            Builtin::Interval { len: 1.0 },
            Builtin::Rectangle { a: 1.0, b: 1.0, centered: false },
        ))
        .unwrap();
        assert_eq!(p.dim, 3);
        assert!((p.volume() - 1.0).abs() < 1e-14);
        assert_eq!(p.face_count(), 6);
    }

    #[test]
    fn unknown_name() {
        assert!(Builtin::from_name("dodecahedron", &BTreeMap::new()).is_err());
    }
}
