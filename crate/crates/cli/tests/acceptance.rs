//! Acceptance criteria 1 to 10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use assocfam_core::assoc::{congruence_test, family_member, relation_test, standard_minimal_family, verify_family};
use assocfam_core::compat::{compatibility_residuals, curvature_invariance};
use assocfam_core::assoc::modified_connection;
use assocfam_core::gallery::{self, gen_lawson_sum, gen_perturbed};
use assocfam_core::ranktwo::{build_ranktwo, cross_section, ranktwo_family, CrossSectionSpec, FiberParams};
use assocfam_core::{Analysis, AnalysisParams, GridParams, SurfaceSpec};
use nalgebra::DVector;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

type Check = Result<String, String>;

fn analyze_on(spec: &SurfaceSpec, grid: GridParams, order: usize) -> Analysis {
    Analysis::run(spec.chart(&grid, order).expect("chart"), &AnalysisParams::default()).expect("analysis")
}

fn analyze(spec: &SurfaceSpec, n: usize, order: usize) -> Analysis {
    analyze_on(spec, spec.default_grid(n), order)
}

fn below(name: &str, x: f64, bound: f64) -> Result<String, String> {
    let s = format!("{name}={x:.2e}");
    if x < bound { Ok(s) } else { Err(format!("{s} (needs < {bound:.0e})")) }
}

fn above(name: &str, x: f64, bound: f64) -> Result<String, String> {
    let s = format!("{name}={x:.2e}");
    if x > bound { Ok(s) } else { Err(format!("{s} (needs > {bound:.0e})")) }
}

fn all(parts: Vec<Result<String, String>>) -> Check {
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for p in parts {
        match p {
            Ok(s) => ok.push(s),
            Err(s) => bad.push(s),
        }
    }
    if bad.is_empty() { Ok(ok.join(" ")) } else { Err(bad.join(" ")) }
}

fn lawson_sum() -> SurfaceSpec {
    let base = SurfaceSpec::LawsonRuled { m: 1, k: 2 };
    gen_lawson_sum(base, vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2], vec![0.0, FRAC_PI_4]).expect("lawson sum")
}

fn c1() -> Check {
    let an = analyze(&gallery::standard_isotropic(3), 64, 12);
    let c = compatibility_residuals(&an.flag, &an.tensors);
    all(vec![
        below("second", c.second.max.max(an.tensors.report.second), 1e-7),
        below("sym", c.sym.max, 1e-7),
        below("gengauss", c.gengauss.max, 1e-7),
        below("gencodazzi", c.gencodazzi.max.max(c.gencodazzi2.max), 1e-7),
    ])
}

fn c2() -> Check {
    let tol_circle = AnalysisParams::default().tol_circle;
    let specs = vec![
        ("catenoid", SurfaceSpec::Catenoid),
        ("helicoid", SurfaceSpec::Helicoid),
        ("saddle", SurfaceSpec::Graph { a: 1.0, b: 0.0, c: -1.0 }),
        ("iso2", gallery::standard_isotropic(2)),
        ("iso3", gallery::standard_isotropic(3)),
        ("enneper5", gallery::enneper5()),
        ("lawson11", SurfaceSpec::LawsonRuled { m: 1, k: 1 }),
        ("lawson12", SurfaceSpec::LawsonRuled { m: 1, k: 2 }),
        ("lawson23", SurfaceSpec::LawsonRuled { m: 2, k: 3 }),
        ("lawson_sum", lawson_sum()),
        ("perturbed", gen_perturbed(SurfaceSpec::Catenoid, 1e-3, 5).unwrap()),
    ];
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for (name, spec) in specs {
        let an = analyze(&spec, 16, 10);
        let Some(e) = &an.ellipses else {
            return Err(format!("{name} not elliptic"));
        };
        worst = worst.max(e.criterion_gap);
        checked += 1;
    }
    below(&format!("gap over {checked} surfaces"), worst, 2.0 * tol_circle)
}

fn c3() -> Check {
    let an = analyze(&SurfaceSpec::Catenoid, 32, 10);
    let fam = standard_minimal_family(&an, FRAC_PI_2).map_err(|e| e.to_string())?;
    let grid = an.chart.grid;
    // Conjugate helicoid in closed form, independent of the gallery generator.
    let oracle: Vec<DVector<f64>> = (0..grid.len())
        .map(|n| {
            let (u, v) = grid.coords(n);
            DVector::from_vec(vec![v.sinh() * u.sin(), -v.sinh() * u.cos(), u])
        })
        .collect();
    let r = assocfam_core::assoc::align_points(&fam.chart.positions(), &oracle, true);
    below("alignment", r.residual, 1e-6)
}

fn c4() -> Check {
    let an = analyze(&gallery::standard_isotropic(3), 32, 12);
    let mut parts = Vec::new();
    for theta in [FRAC_PI_6, FRAC_PI_3] {
        let fam = family_member(&an, 1, theta).map_err(|e| e.to_string())?;
        let v = verify_family(&an, &fam).map_err(|e| e.to_string())?;
        let tag = if theta == FRAC_PI_6 { "pi/6" } else { "pi/3" };
        parts.push(below(&format!("{tag}:metric"), v.metric, 1e-6));
        let a2 = v.preserved.iter().find(|x| x.0 == 2).map(|x| x.1).unwrap_or(f64::INFINITY);
        parts.push(below(&format!("{tag}:alpha2"), a2, 1e-6));
        parts.push(below(&format!("{tag}:normal"), v.normal_curvature, 1e-6));
        let rot = v.rotated.iter().filter(|x| x.0 >= 3).map(|x| x.1).fold(0.0, f64::max);
        if v.rotated.is_empty() {
            parts.push(Err(format!("{tag}: no rotated orders")));
        }
        parts.push(below(&format!("{tag}:rotated"), rot, 1e-6));
    }
    all(parts)
}

fn c5() -> Check {
    let spec = gallery::standard_isotropic(3);
    let run = |n| -> Result<f64, String> {
        let an = analyze_on(&spec, GridParams::new(n, n, (0.0, 0.1), (0.0, 0.1)), 12);
        let cs = an.elliptic().map_err(|e| e.to_string())?;
        let mc = modified_connection(&an.flag, &an.tensors, cs, 1, FRAC_PI_3, 1e-6).map_err(|e| e.to_string())?;
        Ok(curvature_invariance(&an.flag, &an.tensors, &mc, &an.chart.grid).map_err(|e| e.to_string())?.max)
    };
    let (a, b) = (run(64)?, run(128)?);
    let ratio = a / b;
    let conv = if (3.0..=5.0).contains(&ratio) {
        Ok(format!("ratio={ratio:.2}"))
    } else {
        Err(format!("ratio={ratio:.2} (needs ≈ 4)"))
    };
    all(vec![below("64²", a, 1e-6), Ok(format!("128²={b:.2e}")), conv])
}

fn c6() -> Check {
    let iso = analyze(&gallery::standard_isotropic(3), 32, 12);
    let fam = family_member(&iso, 1, FRAC_PI_3).map_err(|e| e.to_string())?;
    let trivial = congruence_test(&iso.chart, &fam.chart).map_err(|e| e.to_string())?.residual;
    let enn = analyze(&gallery::enneper5(), 32, 10);
    let fam = standard_minimal_family(&enn, FRAC_PI_3).map_err(|e| e.to_string())?;
    let moved = congruence_test(&enn.chart, &fam.chart).map_err(|e| e.to_string())?.residual;
    all(vec![below("iso3", trivial, 1e-5), above("enneper5", moved, 1e-2)])
}

fn c7() -> Check {
    let iso = analyze(&gallery::standard_isotropic(3), 32, 12);
    let same = relation_test(&iso, 0, 1, FRAC_PI_3).map_err(|e| e.to_string())?.residual;
    let law = analyze(&lawson_sum(), 16, 12);
    let differ = relation_test(&law, 0, 2, FRAC_PI_4).map_err(|e| e.to_string())?.residual;
    all(vec![below("G0~G1", same, 1e-5), above("G0~G2", differ, 1e-2)])
}

fn c8() -> Check {
    let an = analyze(&lawson_sum(), 16, 12);
    let e = an.ellipses.as_ref().ok_or("not elliptic")?;
    let mut parts = Vec::new();
    for (s, d) in e.max_defect.iter().enumerate() {
        if s % 2 == 0 {
            parts.push(below(&format!("order{s}"), *d, 1e-5));
        } else {
            parts.push(above(&format!("order{s}"), *d, 0.05));
        }
    }
    if e.max_defect.len() < 3 {
        parts.push(Err(format!("only {} orders", e.max_defect.len())));
    }
    all(parts)
}

fn c9() -> Check {
    let an = analyze(&gallery::standard_isotropic(3), 16, 12);
    let cs = cross_section(&an, &CrossSectionSpec::default(), 1, 1e-7).map_err(|e| e.to_string())?;
    let fiber = FiberParams::default();
    let rt = build_ranktwo(&an, &cs, &fiber).map_err(|e| e.to_string())?;
    let s = rt.summary();
    let fam = family_member(&an, 1, FRAC_PI_3).map_err(|e| e.to_string())?;
    let (_, v) = ranktwo_family(&an, &cs, &rt, &fam).map_err(|e| e.to_string())?;
    let nullity = if s.nullity_mismatch == 0 && s.regular > 0 {
        Ok(format!("dimΔ=n-2 on {}/{} regular", s.regular, s.samples))
    } else {
        Err(format!("{} of {} regular samples with dimΔ≠n-2", s.nullity_mismatch, s.regular))
    };
    all(vec![nullity, below("trace", s.max_trace_residual, 1e-6), below("alpha", v.alpha, 1e-6)])
}

fn c10() -> Check {
    let mut parts = Vec::new();
    for name in common::CANONICAL {
        let (a, _) = common::run_canonical(name);
        let (b, _) = common::run_canonical(name);
        if a != b {
            parts.push(Err(format!("{name}: runs differ")));
            continue;
        }
        parts.push(common::check_golden(name, &a).map(|_| format!("{name}=stable")));
    }
    all(parts)
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("frenet fidelity", c1),
        ("circle criterion", c2),
        ("catenoid conjugate", c3),
        ("family residuals", c4),
        ("curvature invariance", c5),
        ("trivial families", c6),
        ("family relation", c7),
        ("lawson pattern", c8),
        ("rank-two pipeline", c9),
        ("golden reports", c10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(detail) => println!("PASS C{} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL C{} {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
