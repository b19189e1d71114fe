//! Benchmark problems on the unit square.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mesh::{InterfaceSet, LevelSet, Point, TriangleRule};
use crate::nitsche::ProblemCoefficients;

/// Circle center of the curved-interface examples.
pub const CIRCLE_CENTER: Point = [0.5, 0.5];

/// Squared circle radius, `(sqrt 2 - 1)^2`.
pub fn circle_radius_sq() -> f64 {
    3.0 - 2.0 * std::f64::consts::SQRT_2
}

/// Position of the straight interface.
pub const LINE_OFFSET: f64 = FRAC_1_SQRT_2;

/// Largest number of parallel interfaces.
pub const MAX_INTERFACES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Example {
    One,
    Two,
    Three,
    Multi,
}

impl Example {
    pub fn name(self) -> &'static str {
        match self {
            Example::One => "example1",
            Example::Two => "example2",
            Example::Three => "example3",
            Example::Multi => "multi",
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1" | "example1" => Ok(Example::One),
            "2" | "example2" => Ok(Example::Two),
            "3" | "example3" => Ok(Example::Three),
            "multi" | "multi-interface" => Ok(Example::Multi),
            _ => Err(Error::Config(format!("unknown example '{s}'"))),
        }
    }
}

/// Interfaces and coefficient data of one run.
#[derive(Debug, Clone)]
pub struct Problem {
    pub example: Example,
    pub interfaces: InterfaceSet,
    pub coeffs: ProblemCoefficients,
}

fn bump(z: f64, c: f64) -> (f64, f64, f64) {
    // E = exp(-500 (z-c)^2) - 1 and its first two derivatives
    let d = z - c;
    let g = (-500.0 * d * d).exp();
    (g - 1.0, -1000.0 * d * g, (1e6 * d * d - 1000.0) * g)
}

/// Value, gradient and Laplacian of the smooth solution of example 1.
pub fn smooth_solution(p: Point) -> (f64, [f64; 2], f64) {
    let [x, y] = p;
    let (e1, e1d, e1dd) = bump(x, 1.0 / 3.0);
    let (e2, e2d, e2dd) = bump(x, 2.0 / 3.0);
    let (b, bd, bdd) = bump(y, 0.5);
    let a = e1 * e2;
    let ad = e1d * e2 + e1 * e2d;
    let add = e1dd * e2 + 2.0 * e1d * e2d + e1 * e2dd;

    let (dx, dy) = (x - 0.5, y - 0.5);
    let w = 1.0 - 3.0 * (dx * dx + dy * dy);
    let q = w * w;
    let qx = -12.0 * dx * w;
    let qy = -12.0 * dy * w;
    let qxx = -12.0 * w + 72.0 * dx * dx;
    let qyy = -12.0 * w + 72.0 * dy * dy;

    let u = a * b * q;
    let grad = [ad * b * q + a * b * qx, a * bd * q + a * b * qy];
    let lap = add * b * q + 2.0 * ad * b * qx + a * b * qxx + a * bdd * q + 2.0 * a * bd * qy + a * b * qyy;
    (u, grad, lap)
}

fn smooth_coefficients(num_subdomains: usize) -> ProblemCoefficients {
    ProblemCoefficients::new(vec![1.0; num_subdomains], |p, _| -smooth_solution(p).2)
        .with_exact(|p, _| smooth_solution(p).0, |p, _| smooth_solution(p).1)
        .with_load_rule(TriangleRule::Degree5)
}

/// Smooth solution, unit coefficients, straight interface.
pub fn example1() -> Problem {
    Problem {
        example: Example::One,
        interfaces: InterfaceSet::single(LevelSet::vertical(LINE_OFFSET)),
        coeffs: smooth_coefficients(2),
    }
}

/// Example 1 data without any interface (plain P1 finite elements).
pub fn example1_fitted() -> Problem {
    Problem {
        example: Example::One,
        interfaces: InterfaceSet::none(),
        coeffs: smooth_coefficients(1),
    }
}

fn circle() -> InterfaceSet {
    InterfaceSet::single(LevelSet::circle(CIRCLE_CENTER, circle_radius_sq()))
}

fn radial(p: Point) -> (f64, [f64; 2]) {
    let d = [p[0] - CIRCLE_CENTER[0], p[1] - CIRCLE_CENTER[1]];
    (d[0] * d[0] + d[1] * d[1], [2.0 * d[0], 2.0 * d[1]])
}

fn check_alpha(a1: f64, a2: f64) -> Result<()> {
    if !(a1 > 0.0 && a2 > 0.0 && a1.is_finite() && a2.is_finite()) {
        return Err(Error::Config(format!("coefficients must be positive, got ({a1}, {a2})")));
    }
    Ok(())
}

/// Circle, `f = -4 a1 a2`. Subdomain 0 is the disc with coefficient `a1`.
pub fn example2(a1: f64, a2: f64) -> Result<Problem> {
    check_alpha(a1, a2)?;
    let r0 = circle_radius_sq();
    // scale[s] multiplies (r^2 - r0^2) in subdomain s
    let scale = [a2, a1];
    let coeffs = ProblemCoefficients::new(vec![a1, a2], move |_, _| -4.0 * a1 * a2).with_exact(
        move |p, s| scale[s] * (radial(p).0 - r0),
        move |p, s| radial(p).1.map(|g| scale[s] * g),
    );
    Ok(Problem {
        example: Example::Two,
        interfaces: circle(),
        coeffs,
    })
}

/// Circle, `f = -4`, solution continuous with a kink in the flux scale.
pub fn example3(a1: f64, a2: f64) -> Result<Problem> {
    check_alpha(a1, a2)?;
    let r0 = circle_radius_sq();
    let u = move |p: Point, s: usize| {
        let r2 = radial(p).0;
        if s == 0 {
            r2 / a1
        } else {
            (r2 - r0) / a2 + r0 / a1
        }
    };
    let coeffs = ProblemCoefficients::new(vec![a1, a2], |_, _| -4.0).with_exact(u, move |p, s| {
        let a = if s == 0 { a1 } else { a2 };
        radial(p).1.map(|g| g / a)
    });
    Ok(Problem {
        example: Example::Three,
        interfaces: circle(),
        coeffs,
    })
}

/// Offset of the `i`-th parallel interface, `i` in `1..=10`.
pub fn stripe_offset(i: usize) -> f64 {
    if i <= 5 {
        0.1 * (FRAC_1_SQRT_2 + i as f64 - 1.0)
    } else {
        0.1 * (i as f64 - FRAC_1_SQRT_2)
    }
}

/// Example 1 data with the first `k` parallel interfaces.
pub fn multi_interface(k: usize) -> Result<Problem> {
    if k == 0 || k > MAX_INTERFACES {
        return Err(Error::Config(format!("interface count must be in 1..={MAX_INTERFACES}, got {k}")));
    }
    let offsets: Vec<f64> = (1..=k).map(stripe_offset).collect();
    Ok(Problem {
        example: Example::Multi,
        interfaces: InterfaceSet::stripes(&offsets),
        coeffs: smooth_coefficients(k + 1),
    })
}
