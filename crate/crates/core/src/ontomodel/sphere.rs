//! Exact integrals of piecewise-linear functions over intersections of
//! hemispheres of the unit sphere, and a product quadrature grid used as an
//! independent check.
//!
//! A region cut out by great circles is a convex spherical polygon. For such
//! a polygon `P` with counter-clockwise vertices (seen from outside),
//!
//! ```text
//! integral_P lambda dA = 1/2 * sum_edges theta_e * (a x b) / |a x b|
//! ```
//!
//! so `integral_P (n . lambda) dA = n . V(P)` is available in closed form.

use gauss_quad::legendre::GaussLegendre;
use std::f64::consts::PI;
use std::num::NonZeroUsize;

pub type V3 = [f64; 3];

pub fn dot(a: &V3, b: &V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: &V3, b: &V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn sub(a: &V3, b: &V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn norm(a: &V3) -> f64 {
    dot(a, a).sqrt()
}

fn unit(a: &V3) -> Option<V3> {
    let n = norm(a);
    (n > 1e-300).then(|| [a[0] / n, a[1] / n, a[2] / n])
}

/// Two unit vectors completing `n` to a right-handed orthonormal frame.
pub fn frame(n: &V3) -> (V3, V3) {
    let helper = if n[0].abs() < 0.6 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let u = unit(&cross(&helper, n)).expect("n is a unit vector");
    let v = cross(n, &u);
    (u, v)
}

/// Convex spherical polygon; vertices counter-clockwise seen from outside.
/// An empty vertex list is the empty region.
#[derive(Debug, Clone)]
pub struct SphericalPolygon {
    vertices: Vec<V3>,
}

const ON_CIRCLE: f64 = 1e-14;

impl SphericalPolygon {
    /// Closed hemisphere `{lambda : n . lambda >= 0}`.
    pub fn hemisphere(n: &V3) -> Self {
        let (u, v) = frame(n);
        let neg = |x: &V3| [-x[0], -x[1], -x[2]];
        Self {
            vertices: vec![u, v, neg(&u), neg(&v)],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3
    }

    pub fn vertices(&self) -> &[V3] {
        &self.vertices
    }

    /// Intersection with `{lambda : m . lambda >= 0}`; `m` need not be unit.
    pub fn clip(&self, m: &V3) -> Self {
        if self.is_empty() {
            return self.clone();
        }
        let scale = norm(m);
        if scale == 0.0 {
            return self.clone();
        }
        let s: Vec<f64> = self.vertices.iter().map(|x| dot(m, x) / scale).collect();
        if s.iter().all(|x| x.abs() <= ON_CIRCLE) {
            // the boundary lies on the cutting circle: keep the side m points to
            return if dot(m, &self.vector_area()) > 0.0 {
                self.clone()
            } else {
                Self { vertices: Vec::new() }
            };
        }
        let n = self.vertices.len();
        // (vertex, lies on the cutting circle)
        let mut out: Vec<(V3, bool)> = Vec::with_capacity(n + 2);
        for k in 0..n {
            let (a, b) = (&self.vertices[k], &self.vertices[(k + 1) % n]);
            let (sa, sb) = (s[k], s[(k + 1) % n]);
            let a_in = sa >= -ON_CIRCLE;
            let b_in = sb >= -ON_CIRCLE;
            if a_in != b_in && sa.abs() > ON_CIRCLE && sb.abs() > ON_CIRCLE {
                let t = sa - sb;
                let p = [
                    (sa * b[0] - sb * a[0]) / t,
                    (sa * b[1] - sb * a[1]) / t,
                    (sa * b[2] - sb * a[2]) / t,
                ];
                if let Some(p) = unit(&p) {
                    out.push((p, true));
                }
            }
            if b_in {
                out.push((*b, sb.abs() <= ON_CIRCLE));
            }
        }
        // Consecutive vertices on the cutting circle are joined along it, on
        // the side where the region lies (a x b parallel to +m). Long arcs
        // get a midpoint so every edge stays well below pi.
        let mhat = [m[0] / scale, m[1] / scale, m[2] / scale];
        let mut split = Vec::with_capacity(out.len() + 2);
        for k in 0..out.len() {
            let (a, a_on) = out[k];
            let (b, b_on) = out[(k + 1) % out.len()];
            split.push(a);
            if a_on && b_on && dot(&a, &b) < 0.5 {
                if let Some(r) = unit(&cross(&mhat, &a)) {
                    split.push(r);
                }
            }
        }
        // drop coincident neighbours
        let mut verts: Vec<V3> = Vec::with_capacity(split.len());
        for p in split {
            if verts.last().is_none_or(|q| norm(&sub(q, &p)) > 1e-15) {
                verts.push(p);
            }
        }
        while verts.len() > 1 && norm(&sub(&verts[0], verts.last().unwrap())) <= 1e-15 {
            verts.pop();
        }
        if verts.len() < 3 {
            verts.clear();
        }
        Self { vertices: verts }
    }

    /// `integral_P lambda dA`
    pub fn vector_area(&self) -> V3 {
        let mut acc = [0.0; 3];
        let n = self.vertices.len();
        if n < 3 {
            return acc;
        }
        for k in 0..n {
            let (a, b) = (&self.vertices[k], &self.vertices[(k + 1) % n]);
            let c = cross(a, b);
            let sin = norm(&c);
            if sin < 1e-300 {
                continue;
            }
            let theta = sin.atan2(dot(a, b));
            for i in 0..3 {
                acc[i] += 0.5 * theta * c[i] / sin;
            }
        }
        acc
    }

    /// Solid angle, from Girard's theorem.
    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        if n < 3 {
            return 0.0;
        }
        let mut angle_sum = 0.0;
        for k in 0..n {
            let prev = &self.vertices[(k + n - 1) % n];
            let cur = &self.vertices[k];
            let next = &self.vertices[(k + 1) % n];
            // tangent directions at `cur` towards prev and next
            let t_prev = cross(&cross(cur, prev), cur);
            let t_next = cross(&cross(cur, next), cur);
            let c = cross(&t_next, &t_prev);
            angle_sum += norm(&c).atan2(dot(&t_next, &t_prev));
        }
        angle_sum - (n as f64 - 2.0) * PI
    }
}

/// Intersection of the closed hemispheres around each direction.
pub fn hemisphere_intersection(normals: &[V3]) -> SphericalPolygon {
    let mut poly = SphericalPolygon::hemisphere(&normals[0]);
    for m in &normals[1..] {
        poly = poly.clip(m);
    }
    poly
}

/// `integral over the sphere of max(0, min_k n_k . lambda)` for unit `n_k`.
pub fn integrate_min_linear(normals: &[V3]) -> f64 {
    // duplicates would create zero-width cells; keep one representative
    let mut uniq: Vec<V3> = Vec::new();
    for n in normals {
        if uniq.iter().all(|u| norm(&sub(u, n)) > 1e-15) {
            uniq.push(*n);
        }
    }
    let region = hemisphere_intersection(&uniq);
    if region.is_empty() {
        return 0.0;
    }
    // split the region by which linear form attains the minimum
    let mut total = 0.0;
    for (l, nl) in uniq.iter().enumerate() {
        let mut cell = region.clone();
        for (k, nk) in uniq.iter().enumerate() {
            if k != l {
                cell = cell.clip(&sub(nk, nl));
            }
        }
        total += dot(nl, &cell.vector_area());
    }
    total.max(0.0)
}

/// Same integral as [`integrate_min_linear`] for two directions, computed
/// in a frame whose pole is perpendicular to both, by 1D Gauss–Legendre
/// quadrature between the kinks of the azimuthal integrand. The polar
/// factor `integral_0^pi sin^2 = pi/2` is exact.
pub fn lens_integral(n: &V3, m: &V3) -> f64 {
    let pole = unit(&cross(n, m)).unwrap_or_else(|| frame(n).0);
    let (e1, _) = frame(&pole);
    let e2 = cross(&pole, &e1);
    let az = |x: &V3| dot(x, &e2).atan2(dot(x, &e1));
    let (pn, pm) = (az(n), az(m));
    let mut cuts: Vec<f64> = [pn + PI / 2.0, pn - PI / 2.0, pm + PI / 2.0, pm - PI / 2.0, 0.5 * (pn + pm), 0.5 * (pn + pm) + PI]
        .iter()
        .map(|x| x.rem_euclid(2.0 * PI))
        .collect();
    cuts.push(0.0);
    cuts.push(2.0 * PI);
    cuts.sort_by(f64::total_cmp);
    let rule = GaussLegendre::new(NonZeroUsize::new(24).unwrap());
    let g = |phi: f64| (phi - pn).cos().min((phi - pm).cos()).max(0.0);
    let mut azimuthal = 0.0;
    for w in cuts.windows(2) {
        if w[1] - w[0] > 0.0 {
            azimuthal += rule.integrate(w[0], w[1], g);
        }
    }
    0.5 * PI * azimuthal
}

/// Product rule on the sphere: Gauss–Legendre in `cos(theta)` with
/// `resolution` nodes times `2 * resolution` equispaced azimuths.
/// Weights sum to `4 pi`.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    resolution: usize,
    z: Vec<(f64, f64)>,
    azimuths: Vec<(f64, f64)>,
}

impl SphereGrid {
    pub fn new(resolution: usize) -> Self {
        let resolution = resolution.max(1);
        let rule = GaussLegendre::new(NonZeroUsize::new(resolution).unwrap());
        let nphi = 2 * resolution;
        Self {
            resolution,
            z: rule.as_node_weight_pairs().to_vec(),
            azimuths: (0..nphi)
                .map(|k| {
                    let phi = 2.0 * PI * (k as f64 + 0.5) / nphi as f64;
                    (phi.cos(), phi.sin())
                })
                .collect(),
        }
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.z.len() * self.azimuths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `sum_i w_i f(lambda_i)`, accumulated ring by ring in a fixed order.
    pub fn integrate<F: Fn(&V3) -> f64>(&self, f: F) -> f64 {
        let dphi = 2.0 * PI / self.azimuths.len() as f64;
        let mut total = 0.0;
        for &(z, wz) in &self.z {
            let r = (1.0 - z * z).max(0.0).sqrt();
            let ring: f64 = self.azimuths.iter().map(|&(c, s)| f(&[r * c, r * s, z])).sum();
            total += wz * dphi * ring;
        }
        total
    }

    pub fn weight_sum(&self) -> f64 {
        self.integrate(|_| 1.0)
    }
}
