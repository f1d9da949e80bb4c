//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary.

use dsgrav_core::algebra::{build_generators, verify_algebra, AlgebraMode, ALGEBRA_TOLERANCE};
use dsgrav_core::cosmology::{acceleration_diagnostic, closed_form, integrate_cosmology, residuals, CosmoParams, Mode};
use dsgrav_core::field::{
    gauge_transform, harmonic_refinement, solve_spherical, Coordinates, SmoothGauge, SmoothPotential,
};
use dsgrav_core::geodesic::{
    gravitational_redshift, light_deflection, perihelion_precession, radial_potential_comparison,
};
use dsgrav_core::lattice::{
    continuum_action, convergence_study, fit_slope, wilson_action, LatticeGraph, SmoothTestField,
};
use dsgrav_core::post_newtonian::{
    assemble_1pn_field, displayed_two_body_metric, gauge_hessian, newtonian_potential, psi_phi_potentials, Body,
};
use dsgrav_core::potential::{ComponentConnection, PotentialField};
use dsgrav_core::radiation::{
    moment_content, orbital_speedup, peters_matthews_average_closed, radiated_power_numeric, speedup_from_energy_loss,
    BinaryTrajectory, KeplerBinary, OrbitFrame,
};
use dsgrav_core::tensor::eta_matrix;
use dsgrav_core::units::{Dimension, Quantity, M_SUN_GEOMETRIC};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn ensure(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn algebra() -> Outcome {
    let mut worst = 0.0_f64;
    for mode in [AlgebraMode::DeSitter, AlgebraMode::EuclideanSo5] {
        let r = verify_algebra(&build_generators(mode));
        worst = [worst, r.vv_residual, r.mv_residual, r.mm_residual, r.jacobi_residual]
            .into_iter()
            .fold(0.0, f64::max);
    }
    ensure(worst <= ALGEBRA_TOLERANCE, format!("max residual {worst:e}"))?;
    let p = verify_algebra(&build_generators(AlgebraMode::Poincare));
    ensure(p.vv_residual == 0.0, format!("Poincare [V,V] = {:e}", p.vv_residual))?;
    ensure(
        p.jacobi_residual <= ALGEBRA_TOLERANCE,
        format!("Poincare Jacobi {:e}", p.jacobi_residual),
    )?;
    Ok(format!("max residual {worst:.1e}, Poincare [V,V] = 0"))
}

fn lattice_convergence() -> Outcome {
    let field = SmoothTestField::new(AlgebraMode::EuclideanSo5, 0.6);
    let study = convergence_study(&field, [0.0; 4], 1.0, &[2, 4, 8, 16], 12, 1e-15).map_err(e)?;
    ensure(study.fitted_order >= 1.9, format!("order {:.3}", study.fitted_order))?;
    Ok(format!("fitted order {:.3} up to 16^4 cells", study.fitted_order))
}

fn gauge_invariance() -> Outcome {
    let mode = AlgebraMode::EuclideanSo5;
    let field = SmoothTestField::new(mode, 0.6);
    let lat = LatticeGraph::from_connection(&field, [3; 4], 0.25, [0.0; 4], 1e-15).map_err(e)?;
    let basis = build_generators(mode).basis();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let gauge = (0..lat.site_count())
        .map(|_| {
            let m = basis.iter().fold(dsgrav_core::algebra::Mat5::zeros(), |acc, b| {
                acc + b * rng.gen_range(-0.7..0.7)
            });
            dsgrav_core::algebra::exp_map(&dsgrav_core::algebra::AlgebraElement::new(mode, m), 1e-15)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(e)?;
    let s0 = wilson_action(&lat);
    let rel = ((wilson_action(&lat.gauge_transform(&gauge).map_err(e)?) - s0) / s0).abs();
    ensure(rel <= 1e-10, format!("Wilson relative change {rel:e}"))?;
    let p = SmoothPotential::new(0.3);
    let q = SmoothGauge::new(0.5, 3);
    let action = |lam: f64| {
        continuum_action(
            &ComponentConnection::new(gauge_transform(&p, &q, lam), AlgebraMode::DeSitter),
            [0.0; 4],
            [0.6; 4],
            5,
        )
    };
    let s0 = action(0.0).map_err(e)?;
    let lams = [0.04, 0.02, 0.01];
    let d = lams
        .iter()
        .map(|&l| Ok((action(l)? - s0).abs().ln()))
        .collect::<Result<Vec<_>, dsgrav_core::Error>>()
        .map_err(e)?;
    let slope = fit_slope(&lams.map(f64::ln), &d);
    ensure(
        (slope - 2.0).abs() < 0.1,
        format!("continuum change scales as lambda^{slope:.3}"),
    )?;
    Ok(format!("Wilson {rel:.1e}, continuum change ~ lambda^{slope:.3}"))
}

fn spherical() -> Outcome {
    let point = [1.0, 2.0, 2.0];
    let sol = solve_spherical(1.0, 0.3, Coordinates::Cartesian).map_err(e)?;
    let hs = [0.2, 0.1, 0.05, 0.025];
    let mut notes = Vec::new();
    for (order, bound) in [(2, 1.9), (4, 3.8)] {
        let (_, o00, orr) = harmonic_refinement(&sol, point, &hs, order).map_err(e)?;
        ensure(
            o00.min(orr) >= bound,
            format!("order-{order} stencil gives {o00:.3}, {orr:.3}"),
        )?;
        notes.push(format!("{:.2}", o00.min(orr)));
    }
    Ok(format!("fitted orders {} (2nd, 4th-order stencils)", notes.join(", ")))
}

fn classic() -> Outcome {
    let m = M_SUN_GEOMETRIC;
    let a = Quantity::parse("0.387098 AU")
        .and_then(|q| q.to_geometric(Dimension::Length))
        .map_err(e)?;
    let ecc = 0.2056;
    let prec = perihelion_precession(m, a, ecc, 3, 1e-13).map_err(e)?.advance_per_orbit;
    let oracle = 6.0 * PI * m / (a * (1.0 - ecc * ecc));
    let r1 = (prec / oracle - 1.0).abs();
    ensure(r1 <= 0.01, format!("precession off by {r1:e}"))?;
    let b = 6.957e8;
    ensure(b >= 1e4 * m, "impact parameter below 1e4 M".into())?;
    let r2 = (light_deflection(m, b, 1e-12).map_err(e)? / (4.0 * m / b) - 1.0).abs();
    ensure(r2 <= 0.01, format!("deflection off by {r2:e}"))?;
    let x = m / b;
    let z = gravitational_redshift(m, b, f64::INFINITY).map_err(e)? - 1.0;
    let r3 = (z - (x + 1.5 * x * x + 2.5 * x.powi(3))).abs();
    ensure(r3 <= 1e-9, format!("redshift off by {r3:e}"))?;
    let ratio = |mr: f64| radial_potential_comparison(mr, 1.0).map(|c| c.2 / (mr * mr));
    let (q3, q4) = (ratio(1e-3).map_err(e)?, ratio(1e-4).map_err(e)?);
    ensure(
        (q3 / 4.0 - 1.0).abs() <= 0.02 && (q4 / 4.0 - 1.0).abs() <= 0.02,
        format!("ratios {q3}, {q4}"),
    )?;
    ensure((q4 - 4.0).abs() < (q3 - 4.0).abs(), "ratio does not approach 4".into())?;
    Ok(format!(
        "precession {r1:.1e}, deflection {r2:.1e}, redshift {r3:.1e}, ratio {q4:.4}"
    ))
}

fn post_newtonian() -> Outcome {
    let m = 1e-3;
    let one = [Body::new(m, [0.0; 3], [0.0; 3]).map_err(e)?];
    let sol = solve_spherical(m, 1e-3, Coordinates::Cartesian).map_err(e)?;
    let mut worst = 0.0_f64;
    for x in [[3.0, 0.0, 0.0], [1.0, -2.0, 0.5], [0.2, 0.3, -4.0]] {
        let h = (sol.g(&[0.0, x[0], x[1], x[2]]) - eta_matrix()) * 0.5;
        let (tt, tj, ij) = gauge_hessian(&one, &x).map_err(e)?;
        let f = assemble_1pn_field(&one, &x).map_err(e)?;
        worst = worst.max((h[(0, 0)] + tt - f.h00).abs());
        for j in 0..3 {
            worst = worst.max((h[(0, j + 1)] + tj[j] - f.h0j[j]).abs());
            for i in 0..3 {
                worst = worst.max((h[(i + 1, j + 1)] + ij[i][j] - f.hij[i][j]).abs());
            }
        }
    }
    ensure(worst <= 1e-15, format!("single body differs by {worst:e}"))?;
    let pair = [
        Body::new(2e-3, [-0.3, 0.1, 0.0], [0.01, -0.03, 0.002]).map_err(e)?,
        Body::new(1e-3, [0.6, -0.2, 0.1], [-0.02, 0.06, -0.004]).map_err(e)?,
    ];
    let x = [0.2, 1.1, 0.4];
    let g = displayed_two_body_metric(&pair, &x).map_err(e)?;
    let f = assemble_1pn_field(&pair, &x).map_err(e)?;
    let u = newtonian_potential(&pair, &x).map_err(e)?;
    let (psi, _) = psi_phi_potentials(&pair, &x).map_err(e)?;
    let full = f.metric();
    let mut two = (g[(0, 0)] - (-1.0 + 2.0 * u + 2.0 * psi)).abs();
    two = two.max((full[(0, 0)] - (-1.0 + 2.0 * u + 4.0 * psi)).abs());
    for j in 0..3 {
        two = two.max((g[(0, j + 1)] - f.h0j[j]).abs());
        for i in 0..3 {
            two = two.max((g[(i + 1, j + 1)] - full[(i + 1, j + 1)]).abs());
        }
    }
    ensure(two <= 1e-15, format!("two-body terms differ by {two:e}"))?;
    Ok(format!("single body {worst:.1e}, two-body termwise {two:.1e}"))
}

fn radiation() -> Outcome {
    let base = KeplerBinary {
        m_p: 1.4414 * 1.98847e30,
        m_c: 1.3867 * 1.98847e30,
        p_b: 27906.98,
        e: 0.0,
    };
    let mut worst = 0.0_f64;
    let mut dipole = 0.0_f64;
    for ecc in [0.0, 0.3, 0.6] {
        let b = KeplerBinary { e: ecc, ..base };
        let (mp, mc, _) = b.geometric();
        let a = b.semi_major_axis();
        let traj = BinaryTrajectory::kepler(mp, mc, a, ecc, 4096, 1, OrbitFrame::default()).map_err(e)?;
        let numeric = radiated_power_numeric(&traj).map_err(e)?.average;
        let closed = peters_matthews_average_closed(mp, mc, a, ecc);
        let r = (numeric / closed - 1.0).abs();
        ensure(r <= 0.01, format!("e = {ecc}: power off by {r:e}"))?;
        let pdot = orbital_speedup(&b).map_err(e)?;
        let balance = speedup_from_energy_loss(&b, numeric).map_err(e)?;
        let rb = (balance / pdot - 1.0).abs();
        ensure(rb <= 0.01, format!("e = {ecc}: energy balance off by {rb:e}"))?;
        let mom = moment_content(&traj).map_err(e)?;
        let d = mom.dipole_rate / mom.dipole_scale;
        ensure(
            d <= 1e-9 && mom.monopole_rate <= 1e-12,
            format!("e = {ecc}: dipole {d:e}, monopole {:e}", mom.monopole_rate),
        )?;
        worst = worst.max(r).max(rb);
        dipole = dipole.max(d);
    }
    Ok(format!("power and balance within {worst:.1e}, dipole {dipole:.1e}"))
}

fn cosmology() -> Outcome {
    let ds = CosmoParams {
        rho0: 0.01,
        ..Default::default()
    };
    let (lo, hi) = (ds.t0 / 10.0, 10.0 * ds.t0);
    let grid: Vec<f64> = (0..41).map(|k| lo * (hi / lo).powf(k as f64 / 40.0)).collect();
    let mut profile = 0.0_f64;
    for &t in &grid {
        profile = profile.max(
            residuals(&closed_form(t, &ds).map_err(e)?, Mode::DeSitter)
                .map_err(e)?
                .max_relative(),
        );
    }
    let finding = if profile <= 1e-8 {
        "closed forms satisfied".to_string()
    } else {
        format!("finding: closed-form residual {profile:.2e}")
    };
    let cases = [
        CosmoParams::default(),
        CosmoParams {
            rho0: 0.01,
            b0: 1.2,
            mode: Mode::Poincare,
            ..Default::default()
        },
        CosmoParams {
            b0: 0.9,
            mode: Mode::Poincare,
            ..Default::default()
        },
        CosmoParams {
            rho0: 0.01,
            d0: 0.1,
            mode: Mode::Poincare,
            ..Default::default()
        },
        ds,
    ];
    let mut compared = 0;
    let mut gap = 0.0_f64;
    for p in cases {
        let vanish = grid.iter().try_fold(0.0_f64, |w, &t| {
            let r = residuals(&closed_form(t, &p)?, p.mode)?;
            let evolved = [Some(r.density), r.torsion_c, Some(r.torsion_d), Some(r.matter)];
            Ok::<_, dsgrav_core::Error>(evolved.iter().flatten().map(|x| x.relative()).fold(w, f64::max))
        });
        if vanish.map_err(e)? > 1e-8 {
            continue;
        }
        let run = integrate_cosmology(&p, lo, hi, 1e-10, 41).map_err(e)?;
        ensure(
            run.diagnostic.is_none(),
            format!("integration stopped: {:?}", run.diagnostic),
        )?;
        for j in &run.jets {
            let c = closed_form(j.state.t, &p).map_err(e)?.state;
            let d = [
                j.state.b - c.b,
                j.state.c - c.c,
                j.state.d - c.d,
                (j.state.rho - c.rho) / p.rho0.max(1.0),
            ];
            gap = d.iter().fold(gap, |g, v| g.max(v.abs()));
        }
        compared += 1;
    }
    ensure(
        compared >= 3 && gap <= 1e-6,
        format!("{compared} cases compared, gap {gap:e}"),
    )?;
    let pc = CosmoParams {
        mode: Mode::Poincare,
        ..ds
    };
    let late = [1e2, 1e3, 1e4];
    let bm1 = late
        .iter()
        .map(|&t| closed_form(t, &pc).map(|j| (j.state.b - 1.0).abs().ln()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(e)?;
    let slope = fit_slope(&late.map(f64::ln), &bm1);
    ensure((slope + 1.0).abs() < 0.05, format!("|b - 1| ~ t^{slope:.3}"))?;
    let a = acceleration_diagnostic(&ds, &late).map_err(e)?;
    let b = acceleration_diagnostic(&pc, &late).map_err(e)?;
    ensure(
        a.iter().all(|s| s.s_ddot > 0.0),
        "de Sitter s'' not positive at late times".into(),
    )?;
    let decay = b[2].s_ddot.abs() / b[0].s_ddot.abs().max(f64::MIN_POSITIVE);
    ensure(
        b[2].s_ddot.abs() < 1e-6 * a[2].s_ddot && decay < 1.0,
        format!("Poincare s'' = {:e}", b[2].s_ddot),
    )?;
    Ok(format!(
        "{finding}; integrator gap {gap:.1e} over {compared} exact cases; |b-1| ~ t^{slope:.3}; s'' {:.3e} vs {:.1e}",
        a[2].s_ddot, b[2].s_ddot
    ))
}

const SCENARIOS: &[&[&str]] = &[
    &["algebra"],
    &["lattice"],
    &["field"],
    &["field", "--scenario", "cosmo"],
    &["orbit"],
    &["classic-tests"],
    &["pn"],
    &["pulsar"],
    &["pulsar", "sweep"],
    &["cosmo"],
    &["cosmo", "compare"],
];

fn run_cli(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_dsgrav"))
        .args(["--seed", "7", "--out-dir"])
        .arg(dir)
        .args(args)
        .output()
        .map_err(e)?;
    ensure(
        matches!(out.status.code(), Some(0 | 1)),
        format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)),
    )
}

fn files(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut v = std::fs::read_dir(dir)
        .map_err(e)?
        .map(|f| {
            let f = f.map_err(e)?;
            Ok((
                f.file_name().to_string_lossy().into_owned(),
                std::fs::read(f.path()).map_err(e)?,
            ))
        })
        .collect::<Result<Vec<_>, String>>()?;
    v.sort();
    Ok(v)
}

fn determinism() -> Outcome {
    let root = tempfile::tempdir().map_err(e)?;
    let (a, b) = (root.path().join("a"), root.path().join("b"));
    for args in SCENARIOS {
        run_cli(&a, args)?;
        run_cli(&b, args)?;
    }
    let (fa, fb) = (files(&a)?, files(&b)?);
    ensure(!fa.is_empty() && fa == fb, "outputs differ between runs".into())?;
    Ok(format!(
        "{} scenarios, {} files byte-identical",
        SCENARIOS.len(),
        fa.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("Lie algebra", algebra, Duration::from_secs(1)),
        ("lattice convergence", lattice_convergence, Duration::from_secs(120)),
        ("gauge invariance", gauge_invariance, Duration::from_secs(120)),
        ("spherical solution", spherical, Duration::from_secs(120)),
        ("classic tests", classic, Duration::from_secs(60)),
        ("1PN cross-check", post_newtonian, Duration::from_secs(60)),
        ("radiation equivalence", radiation, Duration::from_secs(120)),
        ("cosmology", cosmology, Duration::from_secs(30)),
        ("determinism", determinism, Duration::from_secs(300)),
    ];
    let mut failed = 0;
    for (k, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = outcome.and_then(|msg| {
            if took <= *budget {
                Ok(msg)
            } else {
                Err(format!("{msg}; runtime over the {} s budget", budget.as_secs()))
            }
        });
        let (tag, msg) = match outcome {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!("{tag} [{}] {name}: {msg} ({:.2} s)", k + 1, took.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
