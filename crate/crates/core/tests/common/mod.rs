//! Randomized invariant suites shared by the property tests and the
//! acceptance run. Every suite is a deterministic proptest runner.

#![allow(dead_code)]

use multimode_release::capture::{best_cat_fit, capture, capture_grid, cascade_model, ReceiverCoupling};
use multimode_release::circuit::{dressed_modes, effective_params, CircuitNetlist, EffectiveParams};
use multimode_release::dynamics::{
    build_effective_model, build_toy_model, chirp_profile, drive_envelope, evolve, ControlFunction, EmitterDims,
    TimeGrid,
};
use multimode_release::emission::{decompose_modes, emission, mode_occupation_ratio, weighted_inner, CorrelationMatrix, CorrelationOptions};
use multimode_release::quantum::{
    annihilation, cat_state_family, coherent_state, creation, embed, fock_state, linspace, number, partial_trace,
    rotation, wigner, CatFamily, DensityMatrix, HilbertSpace, C64,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub struct Suite {
    pub name: &'static str,
    pub run: fn(u32) -> Result<(), String>,
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn check<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if !$cond {
            return Err(TestCaseError::fail(format!($($fmt)*)));
        }
    };
}

fn ok<T>(r: multimode_release::Result<T>) -> Result<T, TestCaseError> {
    r.map_err(|e| TestCaseError::fail(e.to_string()))
}

/// `A A^dag / tr` from raw entries.
fn random_density(dim: usize, raw: &[f64]) -> DensityMatrix {
    let a = DMatrix::from_fn(dim, dim, |r, c| C64::new(raw[2 * (r * dim + c)], raw[2 * (r * dim + c) + 1]));
    let m = &a * a.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(HilbertSpace::single(dim).unwrap(), m / C64::new(tr, 0.0)).unwrap()
}

fn density_strategy(max_dim: usize) -> impl Strategy<Value = DensityMatrix> {
    (2..=max_dim, prop::collection::vec(-1.0..1.0f64, 2 * max_dim * max_dim))
        .prop_map(|(d, raw)| random_density(d, &raw))
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

// quantum

fn density_invariants(cases: u32) -> Result<(), String> {
    check(cases, (density_strategy(6), density_strategy(3)), |(r1, r2)| {
        let prod = ok(r1.tensor(&r2))?;
        for rho in [&r1, &r2, &prod, &ok(partial_trace(&prod, 0))?, &ok(partial_trace(&prod, 1))?] {
            let d = rho.diagnostics();
            ensure!(d.hermiticity <= 1e-10, "hermiticity {}", d.hermiticity);
            ensure!(d.trace_error <= 1e-8, "trace {}", d.trace_error);
            ensure!(d.min_eigenvalue >= -1e-8, "eigenvalue {}", d.min_eigenvalue);
        }
        Ok(())
    })
}

fn ladder_relations(cases: u32) -> Result<(), String> {
    check(cases, 2usize..16, |dim| {
        let a = ok(annihilation(dim))?;
        let ad = ok(creation(dim))?;
        let c = a.commutator(&ad);
        let tol = 4.0 * f64::EPSILON * dim as f64;
        for r in 0..dim {
            for k in 0..dim {
                let expected = if r == k && r + 1 < dim { 1.0 } else if r == k { -((dim - 1) as f64) } else { 0.0 };
                ensure!((c.matrix()[(r, k)] - C64::new(expected, 0.0)).norm() <= tol, "[a, a+] at ({r},{k})");
            }
        }
        let n = ok(number(dim))?;
        ensure!(max_abs(&(&(&ad * &a).into_matrix() - n.matrix())) <= tol, "a+ a != n");
        Ok(())
    })
}

fn cat_parity(cases: u32) -> Result<(), String> {
    check(cases, (3usize..24, 0.1..2.5f64, 0.0..6.3f64, any::<bool>()), |(dim, r, phi, two)| {
        let family = if two { CatFamily::Two } else { CatFamily::Four };
        let k = if two { 2 } else { 4 };
        let cat = ok(cat_state_family(dim, C64::from_polar(r, phi), family))?;
        for (n, amp) in cat.amplitudes().iter().enumerate() {
            if n % k != 0 {
                ensure!(*amp == C64::new(0.0, 0.0), "amplitude {amp} at forbidden index {n}");
            }
        }
        Ok(())
    })
}

fn wigner_normalization(cases: u32) -> Result<(), String> {
    check(cases, density_strategy(6), |rho| {
        let h = (2.0 * rho.dim() as f64).sqrt() + 3.0;
        let x = linspace(-h, h, 101);
        let w = ok(wigner(&rho, &x, &x))?;
        let step = x[1] - x[0];
        let total: f64 = w.iter().sum::<f64>() * step * step;
        ensure!((total - 1.0).abs() <= 1e-3, "integral {total}");
        Ok(())
    })
}

fn partial_trace_round_trip(cases: u32) -> Result<(), String> {
    check(cases, (density_strategy(6), 1usize..5), |(rho, anc)| {
        let vac = ok(fock_state(anc, 0))?.to_density();
        let back = ok(partial_trace(&ok(rho.tensor(&vac))?, 0))?;
        ensure!(max_abs(&(back.matrix() - rho.matrix())) <= 1e-14, "round trip");
        Ok(())
    })
}

// dynamics

#[derive(Clone, Debug)]
struct Toy {
    dim: usize,
    chi: f64,
    kappa: f64,
    chirp: f64,
    rho: DensityMatrix,
}

fn toy_strategy() -> impl Strategy<Value = Toy> {
    (2usize..=5, -2.0..2.0f64, 0.3..2.0f64, 0.0..1.0f64, prop::collection::vec(-1.0..1.0f64, 50)).prop_map(
        |(dim, chi, kappa, chirp, raw)| Toy { dim, chi, kappa, chirp, rho: random_density(dim, &raw) },
    )
}

impl Toy {
    fn model(&self, chi: f64) -> multimode_release::dynamics::LindbladModel {
        let omega = chirp_profile(0.3, self.chirp, (self.dim - 1) as f64, self.kappa);
        build_toy_model(self.dim, omega, ControlFunction::constant(chi), self.kappa).unwrap()
    }
}

fn trace_and_positivity(cases: u32) -> Result<(), String> {
    check(cases, toy_strategy(), |toy| {
        let grid = TimeGrid::uniform(0.0, 3.0, 16).unwrap();
        let tr = ok(evolve(&toy.model(toy.chi), &toy.rho, &grid))?;
        for s in &tr.states {
            let d = s.diagnostics();
            ensure!(d.trace_error <= 1e-8, "trace drift {}", d.trace_error);
            ensure!(d.min_eigenvalue >= -1e-7, "eigenvalue {}", d.min_eigenvalue);
        }
        ensure!(tr.diagnostics.max_trace_drift <= 1e-8, "reported drift");
        Ok(())
    })
}

fn kerr_conserves_number(cases: u32) -> Result<(), String> {
    check(cases, (2usize..8, -3.0..3.0f64, prop::collection::vec(-1.0..1.0f64, 128)), |(dim, chi, raw)| {
        let rho = random_density(dim, &raw);
        let m = ok(build_toy_model(dim, ControlFunction::constant(0.4), ControlFunction::constant(chi), 0.0))?;
        let grid = TimeGrid::uniform(0.0, 2.0, 9).unwrap();
        let tr = ok(evolve(&m, &rho, &grid))?;
        let n = ok(tr.expectation(&ok(number(dim))?))?;
        for v in &n {
            ensure!((v.re - n[0].re).abs() <= 1e-10, "<n> drifted {} -> {}", n[0].re, v.re);
        }
        Ok(())
    })
}

/// Classical RK4 on the closed first-moment equations of the linear emitter.
fn moment_oracle(p: &EffectiveParams, drive: &ControlFunction, kappa: f64, a0: C64, t_end: f64, steps: usize) -> (C64, C64) {
    let i = C64::new(0.0, 1.0);
    let f = |t: f64, y: [C64; 2]| {
        let fv = drive.eval(t);
        let g = p.swap_scale * fv;
        let (sa, sb) = (p.stark_scale_a * fv * fv, p.stark_scale_b * fv * fv);
        [-i * sa * y[0] + g * y[1], -i * sb * y[1] - g * y[0] - 0.5 * kappa * y[1]]
    };
    let h = t_end / steps as f64;
    let mut y = [a0, C64::new(0.0, 0.0)];
    for k in 0..steps {
        let t = k as f64 * h;
        let add = |y: [C64; 2], d: [C64; 2], s: f64| [y[0] + d[0] * s, y[1] + d[1] * s];
        let k1 = f(t, y);
        let k2 = f(t + h / 2.0, add(y, k1, h / 2.0));
        let k3 = f(t + h / 2.0, add(y, k2, h / 2.0));
        let k4 = f(t + h, add(y, k3, h));
        for j in 0..2 {
            y[j] += (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (h / 6.0);
        }
    }
    (y[0], y[1])
}

fn linear_moments(cases: u32) -> Result<(), String> {
    let s = (0.5..3.0f64, -1.0..1.0f64, -1.0..1.0f64, 0.2..1.0f64, 0.3..1.5f64, 0.5..2.0f64, 0.0..0.5f64, 0.0..6.3f64);
    check(cases, s, |(swap, sa, sb, delta, t0, kappa, r, phi)| {
        let p = EffectiveParams {
            chi_a: 0.0,
            chi_b: 0.0,
            chi_ab: 0.0,
            swap_scale: swap,
            stark_scale_a: sa,
            stark_scale_b: sb,
            drive_frequency: 0.0,
        };
        let drive = ok(drive_envelope(delta, t0))?;
        let dims = EmitterDims { storage: 9, leakage: 6 };
        let m = ok(build_effective_model(&p, drive.clone(), kappa, dims))?;
        let a0 = C64::from_polar(r, phi);
        let psi = ok(ok(coherent_state(9, a0))?.tensor(&ok(fock_state(6, 0))?))?;
        let grid = TimeGrid::new(vec![0.0, 2.0]).unwrap();
        let tr = ok(evolve(&m, &psi.to_density(), &grid))?;
        let a = ok(embed(&ok(annihilation(9))?, m.space(), 0))?;
        let b = ok(embed(&ok(annihilation(6))?, m.space(), 1))?;
        let (ea, eb) = (ok(tr.final_state().expectation(&a))?, ok(tr.final_state().expectation(&b))?);
        let (oa, ob) = moment_oracle(&p, &drive, kappa, a0, 2.0, 4000);
        ensure!((ea - oa).norm() <= 1e-6 && (eb - ob).norm() <= 1e-6, "<a> {ea} vs {oa}, <b> {eb} vs {ob}");
        Ok(())
    })
}

fn deterministic_evolution(cases: u32) -> Result<(), String> {
    check(cases, toy_strategy(), |toy| {
        let m = toy.model(toy.chi);
        let grid = TimeGrid::uniform(0.0, 1.5, 4).unwrap();
        let x = ok(evolve(&m, &toy.rho, &grid))?;
        let y = ok(evolve(&m, &toy.rho, &grid))?;
        for (s, t) in x.states.iter().zip(&y.states) {
            ensure!(s.matrix() == t.matrix(), "evolution is not bit-identical");
        }
        Ok(())
    })
}

// emission

fn toy_emission(toy: &Toy, chi: f64, points: usize, t_end: f64) -> Result<(CorrelationMatrix, Vec<DensityMatrix>, f64), TestCaseError> {
    let grid = TimeGrid::uniform(0.0, t_end, points).unwrap();
    let out = ok(annihilation(toy.dim))?.scale_real(toy.kappa.sqrt());
    let opts = CorrelationOptions { residual_op: Some(ok(number(toy.dim))?), residual_threshold: f64::INFINITY, ..Default::default() };
    let e = ok(emission(&toy.model(chi), &toy.rho, &grid, &out, &opts))?;
    Ok((e.correlation, e.trajectory.states, e.residual.unwrap()))
}

fn correlation_structure(cases: u32) -> Result<(), String> {
    check(cases, toy_strategy(), |toy| {
        let (g, states, _) = toy_emission(&toy, toy.chi, 21, 4.0)?;
        ensure!(g.hermiticity_deviation() <= 1e-9, "G not Hermitian: {}", g.hermiticity_deviation());
        // Regression diagonal equals the flux from the forward trajectory.
        let a = ok(annihilation(toy.dim))?;
        let flux_op = &a.adjoint() * &a;
        for (k, s) in states.iter().enumerate() {
            let direct = toy.kappa * ok(s.expectation(&flux_op))?.re;
            ensure!((g.values[(k, k)].re - direct).abs() <= 1e-8, "diagonal {k}: {} vs {direct}", g.values[(k, k)].re);
            ensure!(g.values[(k, k)].im.abs() <= 1e-8, "diagonal {k} not real");
        }
        let d = ok(decompose_modes(&g, g.len()))?;
        ensure!(d.min_eigenvalue >= -1e-8 * d.total.max(1e-300), "min eigenvalue {}", d.min_eigenvalue);
        Ok(())
    })
}

fn photon_bookkeeping(cases: u32) -> Result<(), String> {
    check(cases, toy_strategy(), |toy| {
        let n0 = ok(toy.rho.expectation(&ok(number(toy.dim))?))?.re;
        prop_assume!(n0 > 1e-3);
        let (g, _, residual) = toy_emission(&toy, toy.chi, 161, 4.0 / toy.kappa)?;
        let n_out = multimode_release::emission::emitted_photons(&g);
        ensure!(((n_out + residual) - n0).abs() <= 1e-3 * n0, "{n_out} + {residual} vs {n0}");
        Ok(())
    })
}

fn linear_single_mode(cases: u32) -> Result<(), String> {
    check(cases, toy_strategy(), |toy| {
        let (g, _, _) = toy_emission(&toy, 0.0, 41, 5.0 / toy.kappa)?;
        let d = ok(decompose_modes(&g, 3))?;
        prop_assume!(d.total > 1e-3);
        let r = ok(mode_occupation_ratio(&d))?;
        ensure!(r >= 1.0 - 1e-4, "n1 / n_out = {r}");
        Ok(())
    })
}

fn mode_orthonormality(cases: u32) -> Result<(), String> {
    check(cases, toy_strategy(), |toy| {
        let (g, _, _) = toy_emission(&toy, toy.chi, 21, 4.0)?;
        let d = ok(decompose_modes(&g, 6))?;
        for i in 0..d.num_modes() {
            for j in 0..d.num_modes() {
                let expected = if i == j { 1.0 } else { 0.0 };
                ensure!((d.inner(i, j) - C64::new(expected, 0.0)).norm() <= 1e-8, "<v{i}, v{j}> = {}", d.inner(i, j));
            }
        }
        let full = ok(decompose_modes(&g, g.len()))?;
        let err = max_abs(&(full.reconstruct() - &g.values));
        ensure!(err <= 1e-8 * full.total.max(1.0), "reconstruction error {err}");
        Ok(())
    })
}

fn rank_one_recovery(cases: u32) -> Result<(), String> {
    let s = (5usize..40, 0.1..10.0f64, prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 40), 0.5..5.0f64);
    check(cases, s, |(n, occ, raw, t_end)| {
        let grid = TimeGrid::uniform(0.0, t_end, n).unwrap();
        let w = grid.trapezoid_weights();
        let mut v: Vec<C64> = raw[..n].iter().map(|&(a, b)| C64::new(a, b)).collect();
        let norm = weighted_inner(&w, &v, &v).re.sqrt();
        prop_assume!(norm > 1e-3);
        v.iter_mut().for_each(|x| *x /= norm);
        let col = DVector::from_vec(v.clone());
        let g = ok(CorrelationMatrix::new(grid, &col * col.adjoint() * C64::new(occ, 0.0)))?;
        let d = ok(decompose_modes(&g, 3))?;
        ensure!((d.occupations[0] - occ).abs() <= 1e-9 * occ, "n1 = {} vs {occ}", d.occupations[0]);
        ensure!(d.occupations.iter().skip(1).all(|&x| x.abs() <= 1e-9 * occ), "extra modes {:?}", d.occupations);
        let overlap = weighted_inner(&w, &v, &d.modes[0]).norm();
        ensure!((overlap - 1.0).abs() <= 1e-9, "|<v, v1>| = {overlap}");
        Ok(())
    })
}

// circuit

fn netlist_strategy() -> impl Strategy<Value = CircuitNetlist> {
    (
        (150.0..500.0f64, 100.0..400.0f64, 40.0..150.0f64, 0.1..6.0f64, 1.0..25.0f64),
        (0.0..20.0f64, 2.0..8.0f64, 1.0..4.0f64, 5.0..20.0f64, 0.5..2.6f64),
    )
        .prop_map(|((c_a, c_b, c_c, c_ac, c_bc), (c_bl, l_a, l_b, e_j_ghz, phi_dc))| CircuitNetlist {
            c_a,
            c_b,
            c_c,
            c_ac,
            c_bc,
            c_bl,
            l_a,
            l_b,
            e_j_ghz,
            phi_dc,
        })
}

fn kerr_identity(cases: u32) -> Result<(), String> {
    check(cases, netlist_strategy(), |n| {
        let m = ok(dressed_modes(&n))?;
        for w in [m.omega_a, m.omega_b, m.omega_c] {
            ensure!(w.is_finite() && w > 0.0, "frequency {w}");
        }
        let p = effective_params(&m, &n);
        let lhs = p.chi_ab * p.chi_ab;
        let rhs = 16.0 * p.chi_a * p.chi_b;
        ensure!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(rhs.abs()), "{lhs} vs {rhs}");
        Ok(())
    })
}

fn coupling_monotonicity(cases: u32) -> Result<(), String> {
    check(cases, (netlist_strategy(), 0.2..3.0f64, 0.1..1.0f64), |(n, c_ac, step)| {
        let mut lo = n.clone();
        lo.c_ac = c_ac;
        let mut hi = n.clone();
        hi.c_ac = c_ac + step;
        let p = |n: &CircuitNetlist| -> Result<EffectiveParams, TestCaseError> { Ok(effective_params(&ok(dressed_modes(n))?, n)) };
        let (a, b) = (p(&lo)?, p(&hi)?);
        ensure!(b.chi_a.abs() > a.chi_a.abs(), "|chi_a| {} -> {}", a.chi_a, b.chi_a);
        ensure!(b.chi_ab.abs() > a.chi_ab.abs(), "|chi_ab| {} -> {}", a.chi_ab, b.chi_ab);
        ensure!(b.swap_scale.abs() > a.swap_scale.abs(), "|swap| {} -> {}", a.swap_scale, b.swap_scale);
        Ok(())
    })
}

// capture

fn captured_bounded_by_n1(cases: u32) -> Result<(), String> {
    check(cases, (1usize..=3, -0.6..0.6f64, 0.5..1.5f64, any::<bool>()), |(n, chi, kappa, linear)| {
        let dim = n + 1;
        let chi = if linear { 0.0 } else { chi };
        let m = ok(build_toy_model(dim, ControlFunction::constant(0.0), ControlFunction::constant(chi), kappa))?;
        let rho0 = ok(fock_state(dim, n))?.to_density();
        let grid = TimeGrid::uniform(0.0, 10.0 / kappa, 201).unwrap();
        let out = ok(annihilation(dim))?.scale_real(kappa.sqrt());
        let e = ok(emission(&m, &rho0, &grid, &out, &CorrelationOptions::default()))?;
        let d = ok(decompose_modes(&e.correlation, 2))?;
        let coupling = ok(ReceiverCoupling::new(&grid, d.modes[0].clone(), kappa))?;
        let cascade = ok(cascade_model(&m, &coupling, dim + 1))?;
        let start = ok(rho0.tensor(&ok(fock_state(dim + 1, 0))?.to_density()))?;
        let end = coupling.capture_end(kappa).min(grid.end());
        let r = ok(capture(&cascade, &start, &ok(capture_grid(&grid, end))?))?;
        // Quadrature error in n1 grows with the photon number, so the
        // tolerance is taken relative to n1.
        let n1 = d.occupations[0];
        let tol = 1e-3 * n1.max(1.0);
        ensure!(r.captured_photons <= n1 + tol, "captured {} > n1 {n1}", r.captured_photons);
        ensure!(r.max_trace_drift <= 1e-8, "trace drift {}", r.max_trace_drift);
        if linear {
            ensure!((r.captured_photons - n1).abs() <= tol, "linear capture {} vs n1 {n1}", r.captured_photons);
        }
        Ok(())
    })
}

fn fit_rotation_covariance(cases: u32) -> Result<(), String> {
    let s = (0.8..1.8f64, 0.0..6.3f64, 0.0..0.3f64, prop::collection::vec(-1.0..1.0f64, 2 * 64), any::<bool>(), 0.0..6.3f64);
    check(cases, s, |(alpha, phase, noise, raw, two, theta0)| {
        let dim = 8;
        let family = if two { CatFamily::Two } else { CatFamily::Four };
        let cat = ok(cat_state_family(dim, C64::from_polar(alpha, phase), family))?.to_density();
        let mixed = cat.matrix() * C64::new(1.0 - noise, 0.0) + random_density(dim, &raw).matrix() * C64::new(noise, 0.0);
        let rho = ok(DensityMatrix::new(cat.space().clone(), mixed))?;
        let u = ok(rotation(dim, theta0))?;
        let rotated = ok(rho.conjugate_by(&u))?;
        let range = (0.5 * alpha, 1.2 * alpha);
        let f0 = ok(best_cat_fit(&rho, family, range))?;
        let f1 = ok(best_cat_fit(&rotated, family, range))?;
        ensure!((f0.fidelity - f1.fidelity).abs() <= 1e-8, "fidelity {} vs {}", f0.fidelity, f1.fidelity);
        let period = family.symmetry_period();
        let shift = (f1.theta - f0.theta - theta0).rem_euclid(period);
        let dist = shift.min(period - shift);
        ensure!(dist <= period / 64.0, "theta {} -> {} under rotation {theta0}", f0.theta, f1.theta);
        Ok(())
    })
}

pub fn suites() -> Vec<Suite> {
    vec![
        Suite { name: "density matrix invariants", run: density_invariants },
        Suite { name: "ladder relations", run: ladder_relations },
        Suite { name: "cat parity structure", run: cat_parity },
        Suite { name: "Wigner normalization", run: wigner_normalization },
        Suite { name: "partial trace round trip", run: partial_trace_round_trip },
        Suite { name: "trace preservation and positivity", run: trace_and_positivity },
        Suite { name: "Kerr photon-number conservation", run: kerr_conserves_number },
        Suite { name: "linear first-moment oracle", run: linear_moments },
        Suite { name: "deterministic evolution", run: deterministic_evolution },
        Suite { name: "Hermitian G1 and regression diagonal", run: correlation_structure },
        Suite { name: "photon bookkeeping", run: photon_bookkeeping },
        Suite { name: "linear single-mode emission", run: linear_single_mode },
        Suite { name: "mode orthonormality and reconstruction", run: mode_orthonormality },
        Suite { name: "rank-1 recovery", run: rank_one_recovery },
        Suite { name: "Kerr identity and real frequencies", run: kerr_identity },
        Suite { name: "coupling monotonicity", run: coupling_monotonicity },
        Suite { name: "capture bounded by n1", run: captured_bounded_by_n1 },
        Suite { name: "cat-fit rotation covariance", run: fit_rotation_covariance },
    ]
}
