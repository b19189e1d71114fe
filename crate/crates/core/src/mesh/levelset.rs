use super::structured::Point;

/// An interface given as the zero set of a closed-form function.
///
/// [`LevelSet::phi`] is negative on the interface's *first* side: `x < c` for a
/// vertical line, the disc interior for a circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LevelSet {
    /// The line `x = offset`.
    Vertical { offset: f64 },
    /// The circle `|x - center|^2 = radius_sq`.
    Circle { center: Point, radius_sq: f64 },
}

impl LevelSet {
    pub fn vertical(offset: f64) -> Self {
        LevelSet::Vertical { offset }
    }

    pub fn circle(center: Point, radius_sq: f64) -> Self {
        assert!(radius_sq > 0.0);
        LevelSet::Circle { center, radius_sq }
    }

    pub fn phi(&self, p: Point) -> f64 {
        match *self {
            LevelSet::Vertical { offset } => p[0] - offset,
            LevelSet::Circle { center, radius_sq } => {
                (p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2) - radius_sq
            }
        }
    }

    /// Signed distance to the interface (negative on the first side).
    pub fn distance(&self, p: Point) -> f64 {
        match *self {
            LevelSet::Vertical { offset } => p[0] - offset,
            LevelSet::Circle { center, radius_sq } => {
                ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)).sqrt() - radius_sq.sqrt()
            }
        }
    }

    /// Parameter `t` in `[0, 1]` where the segment `a + t (b - a)` meets the
    /// interface, assuming the endpoints lie on strictly opposite sides.
    pub fn crossing(&self, a: Point, b: Point) -> f64 {
        match *self {
            LevelSet::Vertical { offset } => ((offset - a[0]) / (b[0] - a[0])).clamp(0.0, 1.0),
            LevelSet::Circle { center, radius_sq } => {
                let d = [b[0] - a[0], b[1] - a[1]];
                let m = [a[0] - center[0], a[1] - center[1]];
                let qa = d[0] * d[0] + d[1] * d[1];
                let qb = 2.0 * (d[0] * m[0] + d[1] * m[1]);
                let qc = m[0] * m[0] + m[1] * m[1] - radius_sq;
                let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
                // cancellation-free pair of roots
                let q = -0.5 * (qb + disc.copysign(qb));
                let mut roots = [q / qa, if q != 0.0 { qc / q } else { 0.0 }];
                roots.sort_by(f64::total_cmp);
                let pick = roots
                    .iter()
                    .copied()
                    .min_by(|x, y| dist01(*x).total_cmp(&dist01(*y)))
                    .unwrap_or(0.5);
                pick.clamp(0.0, 1.0)
            }
        }
    }
}

fn dist01(t: f64) -> f64 {
    if t < 0.0 {
        -t
    } else if t > 1.0 {
        t - 1.0
    } else {
        0.0
    }
}

/// Ordered interfaces; the subdomain of a point is the number of interfaces on
/// whose positive side it lies.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceSet {
    interfaces: Vec<LevelSet>,
}

impl InterfaceSet {
    pub fn new(interfaces: Vec<LevelSet>) -> Self {
        Self { interfaces }
    }

    pub fn none() -> Self {
        Self { interfaces: Vec::new() }
    }

    pub fn single(ls: LevelSet) -> Self {
        Self { interfaces: vec![ls] }
    }

    /// Parallel vertical lines; the offsets are sorted.
    pub fn stripes(offsets: &[f64]) -> Self {
        let mut o = offsets.to_vec();
        o.sort_by(f64::total_cmp);
        Self::new(o.into_iter().map(LevelSet::vertical).collect())
    }

    pub fn len(&self) -> usize {
        self.interfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interfaces.is_empty()
    }

    pub fn num_subdomains(&self) -> usize {
        self.interfaces.len() + 1
    }

    pub fn get(&self, k: usize) -> &LevelSet {
        &self.interfaces[k]
    }

    pub fn iter(&self) -> impl Iterator<Item = &LevelSet> {
        self.interfaces.iter()
    }

    pub fn subdomain_of(&self, p: Point) -> usize {
        self.interfaces.iter().filter(|ls| ls.phi(p) > 0.0).count()
    }
}
