use std::path::Path;

use resil_core::amplify::{self, MAX_MATERIALIZE_DIM};
use resil_core::builder;
use resil_core::cube::{self, SubsetMask};
use resil_core::design::{self, CandidateOrder, Design};
use resil_core::error::Error;
use resil_core::fourier;
use resil_core::function::write_truth_table;
use resil_core::learn::{self, LabeledDistribution};
use resil_core::lp;
use resil_core::witness;
use resil_core::zoo::{self as threshold, PhiNormalization};
use resil_core::{BoundedFunction, CubeFunction, FnSpec, Result, Table};
use serde_json::{json, Value};

use crate::output::{num, Artifact, CsvTable};
use crate::{
    AmplifyArgs, BuildArgs, ClassChoice, Command, DegreeArgs, DesignArgs, FnArgs, FtArgs, LearnArgs, OrthoArgs,
    ResilienceArgs, StatsArgs, WitnessArgs,
};

/// Brute-force agreement required of the binomial `f_t` statistics.
const FT_AGREEMENT_TOL: f64 = 1e-9;

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn load(args: &FnArgs) -> Result<Table> {
    args.func.parse::<FnSpec>()?.build()
}

pub fn dispatch(command: &Command) -> Result<Artifact> {
    match command {
        Command::Spectrum(a) => spectrum(a),
        Command::Stats(a) => stats(a),
        Command::Duality(a) => duality(a),
        Command::Resilience(a) => resilience(a),
        Command::L1approx(a) => l1approx(a),
        Command::Witness(a) => witness_sweep(a),
        Command::CyclerunBuild(a) => cyclerun_build(a),
        Command::Amplify(a) => amplify_cmd(a),
        Command::Design(a) => design_cmd(a),
        Command::OrthoFamily(a) => ortho_family(a),
        Command::Learn(a) => learn_cmd(a),
        Command::FtStats(a) => ft_stats(a),
        Command::Table(a) => table(a),
    }
}

fn mask_name(mask: SubsetMask) -> String {
    let coords: Vec<String> = cube::coords_of(mask).iter().map(|c| c.to_string()).collect();
    format!("{{{}}}", coords.join(","))
}

fn spectrum(a: &FnArgs) -> Result<Artifact> {
    let f = load(a)?;
    let s = fourier::wht(f.as_cube())?;
    let mut csv = CsvTable::new(&["mask", "coefficient"]);
    for (m, &c) in s.coeffs().iter().enumerate() {
        csv.push(vec![m.to_string(), num(c)]);
    }
    let result = json!({ "n": s.n(), "coefficients": s.to_json_map() });
    Ok(Artifact::new(&result, csv))
}

fn stats(a: &StatsArgs) -> Result<Artifact> {
    let f = load(&a.f)?;
    let s = fourier::wht(f.as_cube())?;
    let levels = s.level_weights();
    let mut result = json!({
        "n": s.n(),
        "d": a.d,
        "mean": s.coeff(0),
        "total_weight": s.total_weight(),
        "low_weight": s.low_weight(a.d),
        "level_weights": levels,
        "fourier_influence": s.influence(),
        "resilience_order": amplify::resilience_order(&s, fourier::RESILIENCE_TOL),
    });
    let mut csv = CsvTable::new(&["level", "weight"]);
    for (k, w) in levels.iter().enumerate() {
        csv.push(vec![k.to_string(), num(*w)]);
    }
    if let Table::Boolean(b) = &f {
        let st = fourier::spectral_stats(b, a.d)?;
        result["total_influence"] = json!(st.total_influence);
        result["per_coordinate_influence"] = json!(st.per_coordinate_influence);
        result["balanced"] = json!(b.is_balanced());
    }
    Ok(Artifact::new(&result, csv))
}

fn duality(a: &DegreeArgs) -> Result<Artifact> {
    let f = load(&a.f)?.boolean()?;
    let cert = lp::duality_certificate(&f, a.d)?;
    let mut csv = CsvTable::new(&["d", "alpha", "delta", "gap"]);
    csv.push(vec![a.d.to_string(), num(cert.alpha), num(cert.delta), num(cert.gap)]);
    let failed = cert.gap > a.tol;
    let msg = format!("duality gap {} exceeds {}", cert.gap, a.tol);
    Ok(Artifact::new(&cert, csv).violation_if(failed, msg))
}

fn resilience(a: &ResilienceArgs) -> Result<Artifact> {
    let f = load(&a.f)?;
    let s = fourier::wht(f.as_cube())?;
    let (check, exact) = match &f {
        Table::Boolean(b) => (fourier::is_d_resilient_exact(b, a.d), true),
        Table::Bounded(_) => (fourier::resilience_of(&s, a.d, a.tol), false),
    };
    let alpha = match &f {
        Table::Boolean(b) if b.n() <= lp::MAX_LP_DIM => Some(lp::distance_to_resilience(b, a.d)?.alpha),
        _ => None,
    };
    let order = amplify::resilience_order(&s, a.tol);
    let result = json!({
        "n": s.n(),
        "d": a.d,
        "resilient": check.resilient,
        "exact": exact,
        "worst_mask": mask_name(check.worst_mask),
        "worst_coeff": check.worst_coeff,
        "resilience_order": order,
        "alpha": alpha,
    });
    let mut csv = CsvTable::new(&["d", "resilient", "worst_mask", "worst_coeff", "alpha"]);
    csv.push(vec![
        a.d.to_string(),
        check.resilient.to_string(),
        mask_name(check.worst_mask),
        num(check.worst_coeff),
        alpha.map(num).unwrap_or_default(),
    ]);
    Ok(Artifact::new(&result, csv))
}

fn l1approx(a: &DegreeArgs) -> Result<Artifact> {
    let f = load(&a.f)?.boolean()?;
    let r = lp::l1_poly_distance(&f, a.d)?;
    let mut csv = CsvTable::new(&["mask", "coefficient"]);
    for (m, c) in r.poly.coeffs() {
        csv.push(vec![m.to_string(), num(*c)]);
    }
    let failed = (r.recomputed - r.delta).abs() > a.tol;
    let msg = format!("recomputed error {} differs from LP value {}", r.recomputed, r.delta);
    Ok(Artifact::new(&r, csv).violation_if(failed, msg))
}

fn witness_sweep(a: &WitnessArgs) -> Result<Artifact> {
    let f = load(&a.f)?.boolean()?;
    // The LP optimum bounds every bounded d-resilient correlation.
    let lp_optimum =
        if f.n() <= lp::MAX_LP_DIM { Some(1.0 - lp::distance_to_resilience(&f, a.d)?.alpha) } else { None };
    let mut rows = Vec::new();
    let mut csv = CsvTable::new(&[
        "tau",
        "status",
        "delta_emp",
        "corr_qf",
        "corr_qf_bound",
        "corr_pf",
        "lp_optimum",
        "resilient",
        "certified",
    ]);
    let (mut ok, mut violation) = (0, None);
    for (tau, r) in a.tau.iter().zip(witness::witness_sweep(&f, a.d, &a.tau)) {
        match r {
            Ok(rep) => {
                ok += 1;
                let lp_ok = lp_optimum.map(|v| rep.corr_pf <= v + 1e-6);
                let certified = rep.certified() && lp_ok != Some(false);
                if !certified && violation.is_none() {
                    violation = Some(format!("witness at tau={tau} failed its certificate"));
                }
                csv.push(vec![
                    num(*tau),
                    "ok".into(),
                    num(rep.delta_emp),
                    num(rep.corr_qf),
                    num(rep.corr_qf_bound),
                    num(rep.corr_pf),
                    lp_optimum.map(num).unwrap_or_default(),
                    rep.resilience.resilient.to_string(),
                    certified.to_string(),
                ]);
                let mut v = serde_json::to_value(&rep).expect("reports serialize");
                v["status"] = json!("ok");
                v["lp_optimum"] = json!(lp_optimum);
                v["lp_ok"] = json!(lp_ok);
                v["certified"] = json!(certified);
                rows.push(v);
            }
            Err(e) => {
                let mut row = vec![num(*tau), format!("error: {e}")];
                row.resize(csv.header.len(), String::new());
                csv.push(row);
                rows.push(json!({ "tau": tau, "status": "error", "error": e.to_string() }));
            }
        }
    }
    if ok == 0 {
        return Err(invalid("no threshold in the sweep produced a witness"));
    }
    let result = json!({ "n": f.n(), "d": a.d, "lp_optimum": lp_optimum, "sweep": rows });
    let mut artifact = Artifact::new(&result, csv);
    artifact.violation = violation;
    Ok(artifact)
}

fn cyclerun_build(a: &BuildArgs) -> Result<Artifact> {
    let report = builder::build_one_resilient(a.n, a.c1)?;
    let audit = builder::audit_invariants(&report);
    let mut csv =
        CsvTable::new(&["iteration", "step", "representative", "weight", "orbit_size", "sigma_before", "sigma_after"]);
    for r in &report.log {
        let step = serde_json::to_value(r.step).expect("steps serialize");
        csv.push(vec![
            r.iteration.to_string(),
            step.as_str().unwrap_or_default().to_string(),
            r.representative.to_string(),
            r.weight.to_string(),
            r.orbit_size.to_string(),
            r.sigma_before.to_string(),
            r.sigma_after.to_string(),
        ]);
    }
    let zero = report.final_sigma == 0
        && report.mean_certificate == 0
        && report.first_level_certificate.iter().all(|&c| c == 0);
    let mut result = serde_json::to_value(&report).expect("reports serialize");
    result["audit"] = serde_json::to_value(&audit).expect("audits serialize");
    let mut artifact = Artifact::new(&result, csv);
    artifact = artifact.violation_if(!zero, "output is not balanced and 1-resilient");
    let detail = audit.detail.clone().unwrap_or_default();
    Ok(artifact.violation_if(!audit.holds, format!("invariant audit failed: {detail}")))
}

fn amplify_cmd(a: &AmplifyArgs) -> Result<Artifact> {
    let f = load(&a.f)?.boolean()?;
    let n = f.n();
    let arity = (0..=a.k).try_fold(1usize, |acc, _| acc.checked_mul(n));
    let sampled = arity.map_or(true, |r| r > MAX_MATERIALIZE_DIM);
    let seed = match (sampled, a.seed) {
        (true, None) => return Err(invalid("this composition is sampled; --seed is required")),
        (_, s) => s.unwrap_or(0),
    };
    let g = lp::distance_to_resilience(&f, a.d)?.witness;
    let report = amplify::amplification_report(&f, &g, a.k, a.m, seed)?;
    let composition =
        if n * n <= MAX_MATERIALIZE_DIM { Some(amplify::check_composed_resilience(&g, a.d, &g, a.d)?) } else { None };
    let mut csv = CsvTable::new(&["level", "total", "inner_swap", "outer_swap", "holds"]);
    for t in &report.triangle {
        csv.push(vec![t.level.to_string(), num(t.total), num(t.inner_swap), num(t.outer_swap), t.holds.to_string()]);
    }
    let composition_ok = composition.as_ref().map_or(true, |c| c.product_ok && c.block_ok);
    let result = json!({ "report": report, "witness_order": a.d, "composition": composition });
    Ok(Artifact::new(&result, csv)
        .violation_if(!report.holds, "amplification bound failed")
        .violation_if(!composition_ok, "composed witness is not resilient to the claimed order"))
}

fn design_cmd(a: &DesignArgs) -> Result<Artifact> {
    let order = match a.seed {
        Some(seed) => CandidateOrder::Shuffled { seed },
        None => CandidateOrder::Lexicographic,
    };
    let d = design::greedy_design(a.n, a.k, a.d, order)?;
    d.validate()?;
    let mut csv = CsvTable::new(&["set", "elements"]);
    for (i, s) in d.index_lists().iter().enumerate() {
        let items: Vec<String> = s.iter().map(|c| c.to_string()).collect();
        csv.push(vec![i.to_string(), items.join(" ")]);
    }
    let result = json!({ "design": d, "size": d.len(), "bound": design::design_bound(a.n, a.k, a.d) });
    Ok(Artifact::new(&result, csv))
}

/// Accepts a bare design or the JSON envelope `resil design` writes.
fn read_design(path: &Path) -> Result<Design> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| invalid(format!("bad design JSON: {e}")))?;
    let inner = value.pointer("/result/design").cloned().unwrap_or(value);
    serde_json::from_value(inner).map_err(|e| invalid(format!("bad design: {e}")))
}

fn ortho_family(a: &OrthoArgs) -> Result<Artifact> {
    let g = load(&a.f)?.bounded();
    let design = match (&a.design, a.n) {
        (Some(path), _) => read_design(path)?,
        (None, Some(n)) => design::greedy_design(n, g.n(), a.d, CandidateOrder::Lexicographic)?,
        (None, None) => return Err(invalid("give --n or --design")),
    };
    let fam = design::orthogonal_family(&g, a.d, &design)?;
    let mut csv = CsvTable::new(&["i", "j", "gram", "exact_gram"]);
    for (i, row) in fam.gram.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let exact = fam.exact_gram.as_ref().map(|e| e[i][j].to_string()).unwrap_or_default();
            csv.push(vec![i.to_string(), j.to_string(), num(*v), exact]);
        }
    }
    let failed = !fam.orthogonal;
    Ok(Artifact::new(&fam, csv).violation_if(failed, "embedded copies are not orthogonal"))
}

fn learn_cmd(a: &LearnArgs) -> Result<Artifact> {
    let base = load(&a.f)?;
    if !(0.0..=1.0).contains(&a.scale.abs()) {
        return Err(invalid("--scale must lie in [-1, 1]"));
    }
    let g = BoundedFunction::new(base.n(), base.bounded().table().iter().map(|v| a.scale * v).collect())?;
    let n = g.n();
    let dist = LabeledDistribution::new(g)?;
    let report = match (a.m, a.seed) {
        (Some(m), Some(seed)) => learn::learn_sampled(&dist, a.d, m, seed)?,
        (Some(_), None) => return Err(invalid("sampled learning needs --seed")),
        (None, _) => {
            let class = match a.class {
                ClassChoice::Dictators => Some(learn::dictator_class(n)?),
                ClassChoice::None => None,
            };
            learn::learn_exact(&dist, a.d, a.eps, class.as_deref())?
        }
    };
    let mut csv = CsvTable::new(&["d", "regression_delta", "threshold", "error", "opt", "excess", "excess_bound"]);
    let c = report.class.as_ref();
    csv.push(vec![
        a.d.to_string(),
        num(report.regression_delta),
        num(report.threshold),
        num(report.error),
        c.map(|c| num(c.opt)).unwrap_or_default(),
        c.map(|c| num(c.excess)).unwrap_or_default(),
        c.map(|c| num(c.excess_bound)).unwrap_or_default(),
    ]);
    let failed = c.is_some_and(|c| !c.excess_ok);
    Ok(Artifact::new(&report, csv).violation_if(failed, "excess error exceeds its bound"))
}

fn ft_stats(a: &FtArgs) -> Result<Artifact> {
    let mut rows = Vec::new();
    let mut csv = CsvTable::new(&[
        "t",
        "normalization",
        "influence_sum",
        "support_prob",
        "level_prob",
        "influence_ok",
        "support_ok",
        "level_ok",
    ]);
    let mut mismatch = None;
    for &t in &a.t {
        let brute =
            if a.n <= threshold::BRUTE_FORCE_DIM { Some(threshold::ft_stats_bruteforce(t, a.n)?) } else { None };
        let stats = threshold::ft_stats(t, a.n)?;
        if let Some(b) = brute {
            let dev = (b.influence_sum - stats.influence_sum)
                .abs()
                .max((b.support_prob - stats.support_prob).abs())
                .max((b.level_prob - stats.level_prob).abs());
            if dev > FT_AGREEMENT_TOL && mismatch.is_none() {
                mismatch = Some(format!("binomial and brute-force stats differ by {dev} at t={t}"));
            }
        }
        let mut checks = Vec::new();
        for norm in [PhiNormalization::Printed, PhiNormalization::Standard] {
            let c = threshold::sandwich_checks(t, a.n, norm, a.factor)?;
            csv.push(vec![
                num(t),
                format!("{norm:?}").to_lowercase(),
                num(c.stats.influence_sum),
                num(c.stats.support_prob),
                num(c.stats.level_prob),
                c.influence_ok.to_string(),
                c.support_ok.to_string(),
                c.level_ok.to_string(),
            ]);
            checks.push(c);
        }
        rows.push(json!({ "t": t, "stats": stats, "bruteforce": brute, "sandwich": checks }));
    }
    let result = json!({ "n": a.n, "factor": a.factor, "rows": rows });
    let mut artifact = Artifact::new(&result, csv);
    artifact.violation = mismatch;
    Ok(artifact)
}

fn table(a: &FnArgs) -> Result<Artifact> {
    let f = load(a)?;
    let text = write_truth_table(f.as_cube());
    let mut artifact = Artifact::new(&json!({ "n": f.n() }), CsvTable::default());
    artifact.raw = Some(text);
    Ok(artifact)
}
