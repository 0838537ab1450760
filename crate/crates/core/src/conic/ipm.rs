//! Primal-dual interior point method on the homogeneous self-dual embedding
//! with Nesterov-Todd scaling and Mehrotra predictor-corrector steps.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::cones::Scaling;
use super::kkt::{Analysis, Kkt};
use super::standard::StandardForm;
use super::SolveStatus;

const STEP_FRACTION: f64 = 0.99;
const MIN_STEP: f64 = 1e-10;
const MAX_STALLS: usize = 3;

pub(crate) struct IpmOptions {
    pub feastol: f64,
    pub gaptol: f64,
    pub max_iter: usize,
}

pub(crate) struct IpmOutcome {
    pub status: SolveStatus,
    /// `x / tau` in the equilibrated variables (a ray for unbounded).
    pub x: Vec<f64>,
    pub iterations: usize,
}

fn norm(v: &[f64]) -> f64 {
    Float::sqrt(v.iter().map(|x| x * x).sum::<f64>())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Dir {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    s: Vec<f64>,
    tau: f64,
    kappa: f64,
}

/// Runs the method. `accept` gets the candidate `x` (equilibrated
/// variables) and must confirm it before it is reported optimal.
pub(crate) fn run(
    sf: &StandardForm,
    opts: &IpmOptions,
    cache: &mut Option<Analysis>,
    accept: &mut dyn FnMut(&[f64]) -> bool,
) -> IpmOutcome {
    let (n, p, m) = (sf.n, sf.p(), sf.m());
    let cones = &sf.cones;
    let fail = |iterations| IpmOutcome {
        status: SolveStatus::NumericalFailure,
        x: vec![0.0; n],
        iterations,
    };
    let mut kkt = match Kkt::new(sf, cache) {
        Ok(k) => k,
        Err(_) => return fail(0),
    };
    let dim = kkt.dim();
    let mut rhs = vec![0.0; dim];
    let mut sol = vec![0.0; dim];

    // Initial point from two least-squares-like solves with W = I.
    kkt.refactor(cones, None);
    rhs[n..n + p].copy_from_slice(&sf.b);
    rhs[n + p..n + p + m].copy_from_slice(&sf.h);
    kkt.solve(&rhs, &mut sol);
    let mut x = sol[..n].to_vec();
    let mut s: Vec<f64> = sol[n + p..n + p + m].iter().map(|v| -v).collect();
    cones.make_interior(&mut s);
    rhs.iter_mut().for_each(|v| *v = 0.0);
    for i in 0..n {
        rhs[i] = -sf.c[i];
    }
    kkt.solve(&rhs, &mut sol);
    let mut y = sol[n..n + p].to_vec();
    let mut z = sol[n + p..n + p + m].to_vec();
    cones.make_interior(&mut z);
    let (mut tau, mut kappa) = (1.0f64, 1.0f64);

    let degree = cones.degree() as f64;
    let (nb, nh, nc) = (norm(&sf.b).max(1.0), norm(&sf.h).max(1.0), norm(&sf.c).max(1.0));
    let mut scaling = Scaling::new(cones);
    let mut rx = vec![0.0; n];
    let mut ry = vec![0.0; p];
    let mut rz = vec![0.0; m];
    let mut aty_gtz = vec![0.0; n];
    let mut tmp_m = vec![0.0; m];
    let mut tmp_m2 = vec![0.0; m];
    let mut ds = vec![0.0; m];
    let mut sol1 = vec![0.0; dim];
    let mut stalls = 0;
    let e = cones.identity();
    let mut iterations = 0;

    for iter in 0..=opts.max_iter {
        iterations = iter;
        if !(tau.is_finite() && kappa.is_finite())
            || x.iter().chain(&y).chain(&z).chain(&s).any(|v| !v.is_finite())
        {
            return fail(iter);
        }
        // Residuals.
        sf.adjoint(&y, &z, &mut aty_gtz);
        for i in 0..n {
            rx[i] = aty_gtz[i] + sf.c[i] * tau;
        }
        sf.a_mul(&x, &mut ry);
        for i in 0..p {
            ry[i] -= sf.b[i] * tau;
        }
        sf.g_mul(&x, &mut rz);
        for i in 0..m {
            rz[i] += s[i] - sf.h[i] * tau;
        }
        let cx = dot(&sf.c, &x);
        let by_hz = dot(&sf.b, &y) + dot(&sf.h, &z);
        let rtau = kappa + cx + by_hz;
        let sz = dot(&s, &z);
        let mu = (sz + tau * kappa) / (degree + 1.0);

        let pres = (norm(&ry) / nb).max(norm(&rz) / nh) / tau;
        let dres = norm(&rx) / nc / tau;
        let pcost = cx / tau;
        let dcost = -by_hz / tau;
        let gap = sz / (tau * tau);
        let relgap = if pcost < 0.0 {
            gap / -pcost
        } else if dcost > 0.0 {
            gap / dcost
        } else {
            f64::NAN
        };

        if pres < opts.feastol && dres < opts.feastol && (gap < opts.gaptol || relgap < opts.gaptol) {
            let xs: Vec<f64> = x.iter().map(|v| v / tau).collect();
            if accept(&xs) {
                return IpmOutcome {
                    status: SolveStatus::Optimal,
                    x: xs,
                    iterations: iter,
                };
            }
        }
        if by_hz < 0.0 && tau < kappa && norm(&aty_gtz) / -by_hz < opts.feastol {
            return IpmOutcome {
                status: SolveStatus::Infeasible,
                x: vec![0.0; n],
                iterations: iter,
            };
        }
        if cx < 0.0 && tau < kappa {
            sf.a_mul(&x, &mut ry);
            sf.g_mul(&x, &mut rz);
            for i in 0..m {
                rz[i] += s[i];
            }
            let ray_res = (norm(&ry) / nb).max(norm(&rz) / nh) / -cx;
            if ray_res < opts.feastol {
                return IpmOutcome {
                    status: SolveStatus::Unbounded,
                    x: x.iter().map(|v| v / -cx).collect(),
                    iterations: iter,
                };
            }
            // Restore the residuals clobbered above.
            sf.a_mul(&x, &mut ry);
            for i in 0..p {
                ry[i] -= sf.b[i] * tau;
            }
            for i in 0..m {
                rz[i] -= sf.h[i] * tau;
            }
        }
        if iter == opts.max_iter || stalls >= MAX_STALLS {
            break;
        }

        if !scaling.update(cones, &s, &z) {
            return fail(iter);
        }
        kkt.refactor(cones, Some(&scaling));

        // Direction of the tau column.
        rhs.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            rhs[i] = -sf.c[i];
        }
        rhs[n..n + p].copy_from_slice(&sf.b);
        rhs[n + p..n + p + m].copy_from_slice(&sf.h);
        kkt.solve(&rhs, &mut sol1);
        let denom_base = dot(&sf.c, &sol1[..n])
            + dot(&sf.b, &sol1[n..n + p])
            + dot(&sf.h, &sol1[n + p..n + p + m]);

        let lambda = scaling.lambda.clone();
        let mut direction = |eta: f64, ds: &[f64], dkappa: f64, sol: &mut Vec<f64>| -> Dir {
            // tmp_m = W (lambda \ ds)
            cones.inv_circ(&lambda, ds, &mut tmp_m2);
            scaling.apply_w(cones, &tmp_m2, &mut tmp_m);
            rhs.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..n {
                rhs[i] = -eta * rx[i];
            }
            for i in 0..p {
                rhs[n + i] = -eta * ry[i];
            }
            for i in 0..m {
                rhs[n + p + i] = -eta * rz[i] - tmp_m[i];
            }
            kkt.solve(&rhs, sol);
            let num = -eta * rtau - dkappa / tau
                - dot(&sf.c, &sol[..n])
                - dot(&sf.b, &sol[n..n + p])
                - dot(&sf.h, &sol[n + p..n + p + m]);
            let dtau = num / (denom_base - kappa / tau);
            let dx: Vec<f64> = (0..n).map(|i| sol[i] + dtau * sol1[i]).collect();
            let dy: Vec<f64> = (0..p).map(|i| sol[n + i] + dtau * sol1[n + i]).collect();
            let dz: Vec<f64> = (0..m).map(|i| sol[n + p + i] + dtau * sol1[n + p + i]).collect();
            // ds = W (lambda \ d_s) - W^2 dz
            let mut w2dz = vec![0.0; m];
            scaling.apply_w2(cones, &dz, &mut w2dz);
            let dsv: Vec<f64> = (0..m).map(|i| tmp_m[i] - w2dz[i]).collect();
            let dk = (dkappa - kappa * dtau) / tau;
            Dir {
                x: dx,
                y: dy,
                z: dz,
                s: dsv,
                tau: dtau,
                kappa: dk,
            }
        };
        let step_len = |d: &Dir| -> f64 {
            let mut a = cones.max_step(&s, &d.s).min(cones.max_step(&z, &d.z));
            if d.tau < 0.0 {
                a = a.min(-tau / d.tau);
            }
            if d.kappa < 0.0 {
                a = a.min(-kappa / d.kappa);
            }
            a
        };

        // Predictor.
        cones.circ(&lambda, &lambda, &mut ds);
        ds.iter_mut().for_each(|v| *v = -*v);
        let aff = direction(1.0, &ds, -tau * kappa, &mut sol);
        let alpha_aff = step_len(&aff).min(1.0);
        let sigma = Float::powi(1.0 - alpha_aff, 3).clamp(0.0, 1.0);

        // Corrector.
        let mut ws = vec![0.0; m];
        let mut wz = vec![0.0; m];
        scaling.apply_winv(cones, &aff.s, &mut ws);
        scaling.apply_w(cones, &aff.z, &mut wz);
        let mut cross = vec![0.0; m];
        cones.circ(&ws, &wz, &mut cross);
        cones.circ(&lambda, &lambda, &mut ds);
        for i in 0..m {
            ds[i] = -ds[i] - cross[i] + sigma * mu * e[i];
        }
        let dkappa = -tau * kappa - aff.tau * aff.kappa + sigma * mu;
        let dir = direction(1.0 - sigma, &ds, dkappa, &mut sol);
        let alpha = (STEP_FRACTION * step_len(&dir)).min(1.0);
        if !(alpha > MIN_STEP) {
            stalls += 1;
            continue;
        }
        stalls = 0;
        for i in 0..n {
            x[i] += alpha * dir.x[i];
        }
        for i in 0..p {
            y[i] += alpha * dir.y[i];
        }
        for i in 0..m {
            z[i] += alpha * dir.z[i];
            s[i] += alpha * dir.s[i];
        }
        tau += alpha * dir.tau;
        kappa += alpha * dir.kappa;
    }
    IpmOutcome {
        status: SolveStatus::MaxIterations,
        x: x.iter().map(|v| v / tau).collect(),
        iterations,
    }
}
