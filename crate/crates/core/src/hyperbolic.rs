//! Poincaré-disk primitives, Möbius maps and the two triangle geometries
//! (hyperbolic and flat) used by the meshes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::Mul;

pub type C64 = Complex64;

/// Hyperbolic distance between two points of the unit disk.
///
/// Uses `d = ln((A + B)^2 / ((1 - |p|^2)(1 - |q|^2)))` with `A = |1 - conj(p) q|`,
/// `B = |p - q|`, which stays accurate close to the ideal boundary.
pub fn disk_distance(p: C64, q: C64) -> f64 {
    let a = (C64::new(1.0, 0.0) - p.conj() * q).norm();
    let b = (p - q).norm();
    if b == 0.0 {
        return 0.0;
    }
    let np = p.norm();
    let nq = q.norm();
    let sp = (1.0 - np) * (1.0 + np);
    let sq = (1.0 - nq) * (1.0 + nq);
    // ln((a+b)^2/(sp*sq)) loses digits for tiny b; use the artanh form there.
    let ratio = b / a;
    if ratio < 0.5 {
        2.0 * ratio.atanh()
    } else {
        ((a + b) * (a + b) / (sp * sq)).ln()
    }
}

/// Point on the hyperboloid model `x^2 + y^2 - w^2 = -1, w > 0`.
fn to_hyperboloid(z: C64) -> [f64; 3] {
    let s = z.norm_sqr();
    let d = 1.0 - s;
    [2.0 * z.re / d, 2.0 * z.im / d, (1.0 + s) / d]
}

fn from_hyperboloid(x: [f64; 3]) -> C64 {
    C64::new(x[0], x[1]) / (1.0 + x[2])
}

/// Geodesic midpoint of two disk points.
pub fn disk_midpoint(p: C64, q: C64) -> C64 {
    let a = to_hyperboloid(p);
    let b = to_hyperboloid(q);
    let s = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
    let norm = (s[2] * s[2] - s[0] * s[0] - s[1] * s[1]).sqrt();
    from_hyperboloid([s[0] / norm, s[1] / norm, s[2] / norm])
}

/// Beltrami-Klein coordinates of a disk point; geodesics are straight there.
pub fn klein(z: C64) -> C64 {
    z * (2.0 / (1.0 + z.norm_sqr()))
}

/// Twice the signed Euclidean area of the triangle `(a, b, c)`.
pub fn orient(a: C64, b: C64, c: C64) -> f64 {
    ((b - a).conj() * (c - a)).im
}

/// Möbius transformation `z -> (a z + b) / (c z + d)` with complex entries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mobius {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Mobius {
    pub fn identity() -> Self {
        Self {
            a: C64::new(1.0, 0.0),
            b: C64::new(0.0, 0.0),
            c: C64::new(0.0, 0.0),
            d: C64::new(1.0, 0.0),
        }
    }

    /// Rotation of the disk about the origin by `theta`.
    pub fn rotation(theta: f64) -> Self {
        Self {
            a: C64::from_polar(1.0, theta / 2.0),
            b: C64::new(0.0, 0.0),
            c: C64::new(0.0, 0.0),
            d: C64::from_polar(1.0, -theta / 2.0),
        }
    }

    /// Hyperbolic translation by `distance` along the diameter at angle `direction`.
    pub fn translation(direction: f64, distance: f64) -> Self {
        let (sh, ch) = ((distance / 2.0).sinh(), (distance / 2.0).cosh());
        let along_real = Self {
            a: C64::new(ch, 0.0),
            b: C64::new(sh, 0.0),
            c: C64::new(sh, 0.0),
            d: C64::new(ch, 0.0),
        };
        Self::rotation(direction) * along_real * Self::rotation(-direction)
    }

    pub fn apply(&self, z: C64) -> C64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Self {
        let det = self.det();
        Self {
            a: self.d / det,
            b: -self.b / det,
            c: -self.c / det,
            d: self.a / det,
        }
    }

    /// Max-entry distance to `other` in PSL(2,C), i.e. minimised over the sign.
    pub fn projective_distance(&self, other: &Mobius) -> f64 {
        let plus = [
            self.a - other.a,
            self.b - other.b,
            self.c - other.c,
            self.d - other.d,
        ];
        let minus = [
            self.a + other.a,
            self.b + other.b,
            self.c + other.c,
            self.d + other.d,
        ];
        let m = |v: [C64; 4]| v.iter().map(|x| x.norm()).fold(0.0, f64::max);
        m(plus).min(m(minus))
    }

    pub fn max_abs_entry(&self) -> f64 {
        [self.a, self.b, self.c, self.d]
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max)
    }

    /// Conjugate a disk automorphism into PSL(2,R) acting on the upper half-plane.
    ///
    /// The Cayley map `z -> (z - i)/(z + i)` sends the half-plane to the disk,
    /// so the half-plane matrix is `C^-1 M C`.
    pub fn to_upper_half_plane(&self) -> Mat2 {
        let i = C64::new(0.0, 1.0);
        let one = C64::new(1.0, 0.0);
        let cayley = Mobius {
            a: one,
            b: -i,
            c: one,
            d: i,
        };
        let m = cayley.inverse() * *self * cayley;
        let scale = m.det().sqrt();
        let m = Mobius {
            a: m.a / scale,
            b: m.b / scale,
            c: m.c / scale,
            d: m.d / scale,
        };
        Mat2::new(m.a.re, m.b.re, m.c.re, m.d.re)
    }
}

impl Mul for Mobius {
    type Output = Mobius;
    fn mul(self, r: Mobius) -> Mobius {
        Mobius {
            a: self.a * r.a + self.b * r.c,
            b: self.a * r.b + self.b * r.d,
            c: self.c * r.a + self.d * r.c,
            d: self.c * r.b + self.d * r.d,
        }
    }
}

/// Real 2x2 matrix, row-major `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[[f64; 2]; 2]", into = "[[f64; 2]; 2]")]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl From<[[f64; 2]; 2]> for Mat2 {
    fn from(m: [[f64; 2]; 2]) -> Self {
        Mat2::new(m[0][0], m[0][1], m[1][0], m[1][1])
    }
}

impl From<Mat2> for [[f64; 2]; 2] {
    fn from(m: Mat2) -> Self {
        [[m.a, m.b], [m.c, m.d]]
    }
}

impl Mat2 {
    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub const fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 1.0)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    /// Inverse of a determinant-one matrix (adjugate).
    pub fn inverse_unimodular(&self) -> Self {
        Self::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn inverse(&self) -> Self {
        let det = self.det();
        Self::new(self.d / det, -self.b / det, -self.c / det, self.a / det)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }

    /// Max-entry distance to `other`, minimised over the global sign.
    pub fn projective_distance(&self, other: &Mat2) -> f64 {
        let plus = Mat2::new(
            self.a - other.a,
            self.b - other.b,
            self.c - other.c,
            self.d - other.d,
        );
        let minus = Mat2::new(
            self.a + other.a,
            self.b + other.b,
            self.c + other.c,
            self.d + other.d,
        );
        plus.max_abs_entry().min(minus.max_abs_entry())
    }

    /// `cosh d(i, M i)` in the upper half-plane: `(a^2 + b^2 + c^2 + d^2) / 2`.
    pub fn cosh_displacement_of_i(&self) -> f64 {
        0.5 * (self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d)
    }

    /// Real power `M^s` of a hyperbolic matrix, taken on the branch with
    /// positive eigenvalues (sign of `M` is dropped first).
    pub fn hyperbolic_power(&self, s: f64) -> Option<Mat2> {
        let m = if self.trace() < 0.0 { self.neg() } else { *self };
        let tr = m.trace();
        if tr <= 2.0 {
            return None;
        }
        let len = 2.0 * (tr / 2.0).acosh();
        // M = cosh(L/2) I + sinh(L/2) N with N^2 = I, so M^s = cosh(sL/2) I + sinh(sL/2) N.
        let sh = (len / 2.0).sinh();
        let n = Mat2::new(
            (m.a - tr / 2.0) / sh,
            m.b / sh,
            m.c / sh,
            (m.d - tr / 2.0) / sh,
        );
        let (cs, ss) = ((s * len / 2.0).cosh(), (s * len / 2.0).sinh());
        Some(Mat2::new(
            cs + ss * n.a,
            ss * n.b,
            ss * n.c,
            cs + ss * n.d,
        ))
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, r: Mat2) -> Mat2 {
        Mat2::new(
            self.a * r.a + self.b * r.c,
            self.a * r.b + self.b * r.d,
            self.c * r.a + self.d * r.c,
            self.c * r.b + self.d * r.d,
        )
    }
}

/// Model geometry of the triangles: every face is a geodesic triangle of
/// constant curvature -1 (hyperbolic) or 0 (flat).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Hyperbolic,
    Euclidean,
}

impl Geometry {
    /// `tan(A/2)` for the corner opposite side `a` in a triangle with sides
    /// `a, b, c`; `None` when the triangle inequality fails.
    pub fn half_angle_tan(&self, a: f64, b: f64, c: f64) -> Option<f64> {
        let s = 0.5 * (a + b + c);
        let (sa, sb, sc) = (s - a, s - b, s - c);
        if sa <= 0.0 || sb <= 0.0 || sc <= 0.0 {
            return None;
        }
        let t2 = match self {
            Geometry::Hyperbolic => sb.sinh() * sc.sinh() / (s.sinh() * sa.sinh()),
            Geometry::Euclidean => sb * sc / (s * sa),
        };
        Some(t2.sqrt())
    }

    /// Corner angle opposite side `a`.
    pub fn angle(&self, a: f64, b: f64, c: f64) -> Option<f64> {
        self.half_angle_tan(a, b, c).map(|t| 2.0 * t.atan())
    }

    /// Cotangent of the corner angle opposite side `a`.
    pub fn cot_angle(&self, a: f64, b: f64, c: f64) -> Option<f64> {
        self.half_angle_tan(a, b, c)
            .map(|t| (1.0 - t * t) / (2.0 * t))
    }

    /// Area of the triangle with the given side lengths.
    pub fn area(&self, a: f64, b: f64, c: f64) -> Option<f64> {
        let s = 0.5 * (a + b + c);
        let (sa, sb, sc) = (s - a, s - b, s - c);
        if sa <= 0.0 || sb <= 0.0 || sc <= 0.0 {
            return None;
        }
        Some(match self {
            // L'Huilier: tan(A/4)^2 = tanh(s/2) tanh((s-a)/2) tanh((s-b)/2) tanh((s-c)/2)
            Geometry::Hyperbolic => {
                let p = (s / 2.0).tanh() * (sa / 2.0).tanh() * (sb / 2.0).tanh() * (sc / 2.0).tanh();
                4.0 * p.sqrt().atan()
            }
            Geometry::Euclidean => (s * sa * sb * sc).sqrt(),
        })
    }

    /// Length of the side opposite an angle `theta` enclosed by sides `x`, `y`.
    pub fn third_side(&self, x: f64, y: f64, theta: f64) -> f64 {
        match self {
            Geometry::Hyperbolic => {
                // cosh d = cosh(x - y) + sinh x sinh y (1 - cos theta), stable for small d
                let v = (x - y).cosh() + x.sinh() * y.sinh() * 2.0 * (theta / 2.0).sin().powi(2);
                v.max(1.0).acosh()
            }
            Geometry::Euclidean => {
                let v = (x - y) * (x - y) + 4.0 * x * y * (theta / 2.0).sin().powi(2);
                v.max(0.0).sqrt()
            }
        }
    }

    /// Sectional curvature of the model plane.
    pub fn curvature(&self) -> f64 {
        match self {
            Geometry::Hyperbolic => -1.0,
            Geometry::Euclidean => 0.0,
        }
    }
}

/// Side length of a regular hyperbolic `n`-gon with interior angle `alpha`,
/// from `cosh(s/2) = cos(pi/n) / sin(alpha/2)`.
pub fn regular_polygon_side(n: usize, alpha: f64) -> f64 {
    2.0 * ((PI / n as f64).cos() / (alpha / 2.0).sin()).acosh()
}

/// Circumradius of a regular hyperbolic `n`-gon with interior angle `alpha`,
/// from `cosh R = cot(pi/n) cot(alpha/2)`.
pub fn regular_polygon_circumradius(n: usize, alpha: f64) -> f64 {
    (1.0 / ((PI / n as f64).tan() * (alpha / 2.0).tan())).acosh()
}

/// Inradius of a regular hyperbolic `n`-gon with interior angle `alpha`,
/// from `cosh r = cos(alpha/2) / sin(pi/n)`.
pub fn regular_polygon_inradius(n: usize, alpha: f64) -> f64 {
    ((alpha / 2.0).cos() / (PI / n as f64).sin()).acosh()
}
