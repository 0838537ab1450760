//! Product of a nonnegative orthant and second-order cones: Jordan algebra,
//! Nesterov-Todd scaling and step-to-boundary.
//!
//! Slack vectors are laid out as `[nonneg block | soc 0 | soc 1 | ...]`;
//! each SOC block is `(u0, u1)` with `u0 >= ||u1||`.

use alloc::vec::Vec;

use num_traits::Float;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Cones {
    pub nonneg: usize,
    pub soc: Vec<usize>,
    pub offsets: Vec<usize>,
    pub dim: usize,
}

fn norm(v: &[f64]) -> f64 {
    Float::sqrt(v.iter().map(|x| x * x).sum::<f64>())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `sqrt(u0^2 - ||u1||^2)` in the cancellation-free form; `None` outside the
/// interior.
fn jnorm(u: &[f64]) -> Option<f64> {
    let r = norm(&u[1..]);
    let (a, b) = (u[0] - r, u[0] + r);
    if a > 0.0 {
        Some(Float::sqrt(a * b))
    } else {
        None
    }
}

impl Cones {
    pub fn new(nonneg: usize, soc: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(soc.len());
        let mut at = nonneg;
        for &d in &soc {
            offsets.push(at);
            at += d;
        }
        Cones {
            nonneg,
            soc,
            offsets,
            dim: at,
        }
    }

    /// Barrier degree.
    pub fn degree(&self) -> usize {
        self.nonneg + self.soc.len()
    }

    fn blocks(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.offsets.iter().copied().zip(self.soc.iter().copied())
    }

    /// Identity element.
    pub fn identity(&self) -> Vec<f64> {
        let mut e = alloc::vec![0.0; self.dim];
        e[..self.nonneg].iter_mut().for_each(|v| *v = 1.0);
        for (o, _) in self.blocks() {
            e[o] = 1.0;
        }
        e
    }

    /// Smallest "eigenvalue" over all blocks; positive iff `u` is interior.
    pub fn min_eig(&self, u: &[f64]) -> f64 {
        let mut m = f64::INFINITY;
        for &v in &u[..self.nonneg] {
            m = m.min(v);
        }
        for (o, d) in self.blocks() {
            let b = &u[o..o + d];
            m = m.min(b[0] - norm(&b[1..]));
        }
        m
    }

    /// Shifts `u` into the interior along the identity if it is not there.
    pub fn make_interior(&self, u: &mut [f64]) {
        let alpha = -self.min_eig(u);
        if alpha >= 0.0 {
            let e = self.identity();
            for (ui, ei) in u.iter_mut().zip(&e) {
                *ui += (1.0 + alpha) * ei;
            }
        }
    }

    /// `u o v`.
    pub fn circ(&self, u: &[f64], v: &[f64], out: &mut [f64]) {
        for i in 0..self.nonneg {
            out[i] = u[i] * v[i];
        }
        for (o, d) in self.blocks() {
            let (ub, vb) = (&u[o..o + d], &v[o..o + d]);
            out[o] = dot(ub, vb);
            for i in 1..d {
                out[o + i] = ub[0] * vb[i] + vb[0] * ub[i];
            }
        }
    }

    /// Solves `lambda o x = d` for `x`.
    pub fn inv_circ(&self, lambda: &[f64], d: &[f64], out: &mut [f64]) {
        for i in 0..self.nonneg {
            out[i] = d[i] / lambda[i];
        }
        for (o, dim) in self.blocks() {
            let (l, db) = (&lambda[o..o + dim], &d[o..o + dim]);
            let l1d1 = dot(&l[1..], &db[1..]);
            let rho = l[0] * l[0] - dot(&l[1..], &l[1..]);
            let x0 = (l[0] * db[0] - l1d1) / rho;
            out[o] = x0;
            for i in 1..dim {
                out[o + i] = (db[i] - x0 * l[i]) / l[0];
            }
        }
    }

    /// Largest `alpha` with `u + alpha d` in the cone (`u` interior); may be
    /// infinite.
    pub fn max_step(&self, u: &[f64], d: &[f64]) -> f64 {
        let mut alpha = f64::INFINITY;
        for i in 0..self.nonneg {
            if d[i] < 0.0 {
                alpha = alpha.min(-u[i] / d[i]);
            }
        }
        for (o, dim) in self.blocks() {
            let (ub, db) = (&u[o..o + dim], &d[o..o + dim]);
            let nu = match jnorm(ub) {
                Some(v) => v,
                None => return 0.0,
            };
            let ubar0 = ub[0] / nu;
            let ubar1_d1: f64 = ub[1..].iter().zip(&db[1..]).map(|(a, b)| a / nu * b).sum();
            let ud = ubar0 * db[0] - ubar1_d1;
            let rho0 = ud / nu;
            let factor = (ud + db[0]) / (ubar0 + 1.0);
            let rho1_sq: f64 = (1..dim)
                .map(|i| {
                    let r = (db[i] - factor * ub[i] / nu) / nu;
                    r * r
                })
                .sum();
            let gap = Float::sqrt(rho1_sq) - rho0;
            if gap > 0.0 {
                alpha = alpha.min(1.0 / gap);
            }
        }
        alpha
    }
}

/// Nesterov-Todd scaling of one SOC: `W = eta * [[a, q^T], [q, I + q q^T / (1 + a)]]`
/// with `a^2 - ||q||^2 = 1`.
#[derive(Debug, Clone, Default)]
pub(crate) struct SocScaling {
    pub eta: f64,
    pub a: f64,
    pub q: Vec<f64>,
    pub q_sq: f64,
}

/// Low-rank split `W^2 = eta^2 (D + u u^T - v v^T)` with
/// `D = diag(d1, 1, ..., 1)`, `u = (u0, u1 q)`, `v = (0, v1 q)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SocExpansion {
    pub d1: f64,
    pub u0: f64,
    pub u1: f64,
    pub v1: f64,
}

impl SocScaling {
    pub fn expansion(&self) -> SocExpansion {
        let q2 = self.q_sq;
        let lo = 2.0 / (1.0 + 2.0 * q2);
        // t = lo + dt with lo < t < 1/q^2 keeps D positive and D - v v^T
        // positive definite.
        let dt = if q2 > 0.0 {
            lo.min(0.5 / (q2 * (1.0 + 2.0 * q2)))
        } else {
            lo
        };
        let t = lo + dt;
        let u1 = Float::sqrt(2.0 + t);
        SocExpansion {
            d1: dt * (1.0 + 2.0 * q2) / (2.0 + t),
            u0: 2.0 * self.a / u1,
            u1,
            v1: Float::sqrt(t),
        }
    }

    /// Entry `(i, j)` of `W^2`.
    pub fn w2(&self, i: usize, j: usize) -> f64 {
        let e2 = self.eta * self.eta;
        let wi = if i == 0 { self.a } else { self.q[i - 1] };
        let wj = if j == 0 { self.a } else { self.q[j - 1] };
        let jij = match (i, j) {
            (0, 0) => 1.0,
            _ if i == j => -1.0,
            _ => 0.0,
        };
        e2 * (2.0 * wi * wj - jij)
    }
}

/// Scaling for the whole product cone plus the scaled point `lambda = W z`.
#[derive(Debug, Clone)]
pub(crate) struct Scaling {
    pub nn: Vec<f64>,
    pub soc: Vec<SocScaling>,
    pub lambda: Vec<f64>,
}

impl Scaling {
    pub fn new(cones: &Cones) -> Self {
        Scaling {
            nn: alloc::vec![1.0; cones.nonneg],
            soc: cones
                .soc
                .iter()
                .map(|&d| SocScaling {
                    eta: 1.0,
                    a: 1.0,
                    q: alloc::vec![0.0; d - 1],
                    q_sq: 0.0,
                })
                .collect(),
            lambda: alloc::vec![0.0; cones.dim],
        }
    }

    /// Recomputes the scaling at interior `(s, z)`. Returns `false` if either
    /// point left the interior.
    pub fn update(&mut self, cones: &Cones, s: &[f64], z: &[f64]) -> bool {
        for i in 0..cones.nonneg {
            if !(s[i] > 0.0 && z[i] > 0.0) {
                return false;
            }
            self.nn[i] = Float::sqrt(s[i] / z[i]);
        }
        for (k, (o, d)) in cones.blocks().enumerate() {
            let (sb, zb) = (&s[o..o + d], &z[o..o + d]);
            let (sn, zn) = match (jnorm(sb), jnorm(zb)) {
                (Some(a), Some(b)) => (a, b),
                _ => return false,
            };
            let sz: f64 = sb.iter().zip(zb).map(|(a, b)| a / sn * (b / zn)).sum();
            let gamma = Float::sqrt((1.0 + sz) / 2.0);
            let sc = &mut self.soc[k];
            let mut q_sq = 0.0;
            for i in 1..d {
                let qi = (sb[i] / sn - zb[i] / zn) / (2.0 * gamma);
                sc.q[i - 1] = qi;
                q_sq += qi * qi;
            }
            sc.q_sq = q_sq;
            sc.a = Float::sqrt(1.0 + q_sq);
            sc.eta = Float::sqrt(sn / zn);
        }
        let mut lambda = core::mem::take(&mut self.lambda);
        self.apply_w(cones, z, &mut lambda);
        self.lambda = lambda;
        true
    }

    /// `out = W v`.
    pub fn apply_w(&self, cones: &Cones, v: &[f64], out: &mut [f64]) {
        for i in 0..cones.nonneg {
            out[i] = self.nn[i] * v[i];
        }
        for (k, (o, d)) in cones.blocks().enumerate() {
            let sc = &self.soc[k];
            let vb = &v[o..o + d];
            let qv = dot(&sc.q, &vb[1..]);
            out[o] = sc.eta * (sc.a * vb[0] + qv);
            let coef = vb[0] + qv / (1.0 + sc.a);
            for i in 1..d {
                out[o + i] = sc.eta * (vb[i] + coef * sc.q[i - 1]);
            }
        }
    }

    /// `out = W^{-1} v`.
    pub fn apply_winv(&self, cones: &Cones, v: &[f64], out: &mut [f64]) {
        for i in 0..cones.nonneg {
            out[i] = v[i] / self.nn[i];
        }
        for (k, (o, d)) in cones.blocks().enumerate() {
            let sc = &self.soc[k];
            let vb = &v[o..o + d];
            let qv = dot(&sc.q, &vb[1..]);
            out[o] = (sc.a * vb[0] - qv) / sc.eta;
            let coef = -vb[0] + qv / (1.0 + sc.a);
            for i in 1..d {
                out[o + i] = (vb[i] + coef * sc.q[i - 1]) / sc.eta;
            }
        }
    }

    /// `out = W^2 v`.
    pub fn apply_w2(&self, cones: &Cones, v: &[f64], out: &mut [f64]) {
        let mut tmp = alloc::vec![0.0; v.len()];
        self.apply_w(cones, v, &mut tmp);
        self.apply_w(cones, &tmp, out);
    }
}
