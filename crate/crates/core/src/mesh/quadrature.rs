use super::structured::{signed_area, Point};

/// Triangles with an area below this are dropped from part rules.
pub const DEGENERATE_AREA: f64 = 1e-16;

/// Physical quadrature points and weights.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    fn push(&mut self, p: Point, w: f64) {
        self.points.push(p);
        self.weights.push(w);
    }
}

/// Polynomial exactness of a triangle rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangleRule {
    /// Edge-midpoint rule, exact for quadratics.
    Degree2,
    /// 7-point Dunavant rule, exact for quintics.
    Degree5,
}

const DUNAVANT5: [([f64; 3], f64); 7] = {
    let a1 = 0.059_715_871_789_769_8;
    let b1 = 0.470_142_064_105_115_1;
    let a2 = 0.797_426_985_353_087_3;
    let b2 = 0.101_286_507_323_456_3;
    let w1 = 0.132_394_152_788_506_2;
    let w2 = 0.125_939_180_544_827_1;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
        ([a1, b1, b1], w1),
        ([b1, a1, b1], w1),
        ([b1, b1, a1], w1),
        ([a2, b2, b2], w2),
        ([b2, a2, b2], w2),
        ([b2, b2, a2], w2),
    ]
};

fn map(t: &[Point; 3], l: [f64; 3]) -> Point {
    [
        l[0] * t[0][0] + l[1] * t[1][0] + l[2] * t[2][0],
        l[0] * t[0][1] + l[1] * t[1][1] + l[2] * t[2][1],
    ]
}

pub fn triangle_rule(t: &[Point; 3], rule: TriangleRule) -> QuadratureRule {
    let mut q = QuadratureRule::default();
    add_triangle(&mut q, t, rule);
    q
}

fn add_triangle(q: &mut QuadratureRule, t: &[Point; 3], rule: TriangleRule) {
    let area = signed_area(t).abs();
    if area < DEGENERATE_AREA {
        return;
    }
    match rule {
        TriangleRule::Degree2 => {
            for k in 0..3 {
                let a = t[k];
                let b = t[(k + 1) % 3];
                q.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])], area / 3.0);
            }
        }
        TriangleRule::Degree5 => {
            // the tabulated weights sum to 1 only to ~1e-15; renormalize
            let total: f64 = DUNAVANT5.iter().map(|(_, w)| w).sum();
            for (l, w) in DUNAVANT5 {
                q.push(map(t, l), area * w / total);
            }
        }
    }
}

/// Union of triangle rules over the sub-triangles of an element part.
pub fn quadrature_for_part(part: &[[Point; 3]], rule: TriangleRule) -> QuadratureRule {
    let mut q = QuadratureRule::default();
    for t in part {
        add_triangle(&mut q, t, rule);
    }
    q
}

/// Two-point Gauss rule on the segment `[a, b]`.
pub fn quadrature_for_segment(a: Point, b: Point) -> QuadratureRule {
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    let s = 0.5 / 3f64.sqrt();
    let mut q = QuadratureRule::default();
    for t in [0.5 - s, 0.5 + s] {
        q.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])], 0.5 * len);
    }
    q
}
