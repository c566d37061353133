use std::fs;
use std::path::Path;

use serde_json::{json, Map, Value};

use freelip_core::json as fjson;
use freelip_core::{extremal, free, harness, line_lab, monotonicity, transport};
use freelip_core::{Error, FiniteMetricSpace, Result, Scalar};

use crate::{Cli, Command};

pub struct Output {
    pub value: Value,
    pub code: u8,
}

impl Output {
    fn ok(value: Value) -> Self {
        Output { value, code: 0 }
    }

    /// A failed self-check marks the run as an internal failure (exit 1)
    /// while still emitting the full payload for inspection.
    fn checked(value: Value, checks_passed: bool) -> Self {
        Output {
            value,
            code: if checks_passed { 0 } else { 1 },
        }
    }
}

struct Checks {
    items: Vec<Value>,
    all_passed: bool,
}

impl Checks {
    fn new() -> Self {
        Checks {
            items: Vec::new(),
            all_passed: true,
        }
    }

    fn add(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.all_passed &= pass;
        self.items.push(json!({
            "name": name,
            "pass": pass,
            "detail": detail.into(),
        }));
    }

    fn into_value(self) -> Value {
        Value::Array(self.items)
    }
}

fn load_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("invalid JSON in {}: {e}", path.display())))
}

fn load_space<S: Scalar>(cli: &Cli, path: &Path) -> Result<FiniteMetricSpace<S>> {
    let v = load_json(path)?;
    let mut space = fjson::space_from_value(&v)?;
    if let Some(t) = cli.tol {
        let tol =
            S::from_f64(t).ok_or_else(|| Error::Parse(format!("tolerance {t} is not finite")))?;
        space.set_tol(tol);
    }
    Ok(space)
}

fn mode_name<S: Scalar>() -> &'static str {
    if S::EXACT {
        "exact"
    } else {
        "float"
    }
}

pub fn run<S: Scalar>(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Norm { space, element } => norm::<S>(cli, space, element),
        Command::Decompose { space, element } => decompose::<S>(cli, space, element),
        Command::Certify { space, measure } => certify::<S>(cli, space, measure),
        Command::Wasserstein { space, alpha, beta } => wasserstein::<S>(cli, space, alpha, beta),
        Command::Segments { space, pair, eps } => {
            segments::<S>(cli, space, pair.as_deref(), eps.as_deref())
        }
        Command::Extend {
            space,
            problem,
            point,
            forced_set,
            forced_pairs,
            t,
        } => extend::<S>(
            cli,
            space,
            problem,
            *point,
            *forced_set,
            *forced_pairs,
            t.as_deref(),
        ),
        Command::Extreme { space, pair } => extreme::<S>(cli, space, pair),
        Command::FaceBound { space, element } => face_bound::<S>(cli, space, element),
        Command::DemoLebesgue { depth } => demo_lebesgue::<S>(*depth),
        Command::DemoCantor { depth } => demo_cantor::<S>(*depth),
        Command::DemoSnowflake { grid, theta } => demo_snowflake::<S>(*grid, theta),
        Command::Selftest => selftest::<S>(cli),
    }
}

fn norm<S: Scalar>(cli: &Cli, space_path: &Path, element_path: &Path) -> Result<Output> {
    let space = load_space::<S>(cli, space_path)?;
    let m = fjson::element_from_value(&space, &load_json(element_path)?)?;
    let (norm, norming) = transport::free_norm(&space, &m)?;

    let mut checks = Checks::new();
    let ball = free::lip_norm(&space, &norming)?;
    checks.add(
        "norming_in_unit_ball",
        ball <= S::one() + space.tol().clone(),
        format!("lip_norm = {ball}"),
    );
    let attained = free::pair(&space, &m, &norming)?;
    checks.add(
        "norming_attains",
        freelip_core::num::within_tol(&attained, &norm, space.tol(), &norm),
        format!("<m, f> = {attained}"),
    );

    let checks_passed = checks.all_passed;
    Ok(Output::checked(
        json!({
        "kind": "norm",
        "mode": mode_name::<S>(),
        "inputs": {
            "space": fjson::space_to_value(&space),
            "element": fjson::element_to_value(&m),
        },
        "norm": fjson::scalar_to_value(&norm),
        "norming": fjson::function_to_value(&norming),
        "checks": checks.into_value(),
        }),
        checks_passed,
    ))
}

fn decompose<S: Scalar>(cli: &Cli, space_path: &Path, element_path: &Path) -> Result<Output> {
    let space = load_space::<S>(cli, space_path)?;
    let m = fjson::element_from_value(&space, &load_json(element_path)?)?;
    let (norm, _) = transport::free_norm(&space, &m)?;
    let mu = transport::decompose(&space, &m)?;

    let mut checks = Checks::new();
    let mass = mu.mass();
    checks.add(
        "mass_equals_norm",
        freelip_core::num::within_tol(&mass, &norm, space.tol(), &norm),
        format!("mass = {mass}, norm = {norm}"),
    );
    let rebuilt = free::combination_to_element(&space, &mu)?;
    let represents = if S::EXACT {
        rebuilt == m
    } else {
        rebuilt.support().union(&m.support()).all(|&i| {
            freelip_core::num::within_tol(&rebuilt.weight(i), &m.weight(i), space.tol(), &S::one())
        })
    };
    checks.add(
        "represents_element",
        represents,
        "weighted pairs rebuild the element",
    );
    checks.add(
        "disjoint_supports",
        mu.left_support().is_disjoint(&mu.right_support()),
        "left and right supports share no point",
    );
    let (monotone, certificate) = monotonicity::is_optimal_representation(&space, &mu)?;
    checks.add(
        "monotone_support",
        monotone,
        "support passes the cycle criterion",
    );

    let checks_passed = checks.all_passed;
    Ok(Output::checked(
        json!({
        "kind": "decomposition",
        "mode": mode_name::<S>(),
        "inputs": {
            "space": fjson::space_to_value(&space),
            "element": fjson::element_to_value(&m),
        },
        "norm": fjson::scalar_to_value(&norm),
        "measure": fjson::measure_to_value(&mu),
        "certificate": fjson::certificate_to_value(&certificate),
        "checks": checks.into_value(),
        }),
        checks_passed,
    ))
}

fn certify<S: Scalar>(cli: &Cli, space_path: &Path, measure_path: &Path) -> Result<Output> {
    let space = load_space::<S>(cli, space_path)?;
    let mu = fjson::measure_from_value(&space, &load_json(measure_path)?)?;
    let (monotone, certificate) = monotonicity::is_optimal_representation(&space, &mu)?;

    let mut checks = Checks::new();
    if let Some(w) = &certificate.witness {
        let ball = free::lip_norm(&space, w)?;
        checks.add(
            "witness_in_unit_ball",
            ball <= S::one() + space.tol().clone(),
            format!("lip_norm = {ball}"),
        );
        let tight = mu.support_pairs().into_iter().all(|(x, y)| {
            free::phi(&space, w, x, y)
                .map(|q| freelip_core::num::within_tol(&q, &S::one(), space.tol(), &S::one()))
                .unwrap_or(false)
        });
        checks.add(
            "witness_tight_on_support",
            tight,
            "quotient 1 on every support pair",
        );
    }
    if let Some(cycle) = &certificate.violating_cycle {
        let (lhs, rhs) = monotonicity::cycle_inequality_sides(&space, cycle);
        checks.add(
            "cycle_violates_inequality",
            lhs > rhs,
            format!("{lhs} > {rhs}"),
        );
    }
    // second route of the same verdict: the measure is optimal exactly when
    // its mass equals the norm of the element it represents
    let element = free::combination_to_element(&space, &mu)?;
    let (norm, _) = transport::free_norm(&space, &element)?;
    let mass = mu.mass();
    let mass_optimal = freelip_core::num::within_tol(&mass, &norm, space.tol(), &norm);
    checks.add(
        "mass_matches_norm_iff_monotone",
        mass_optimal == monotone,
        format!("mass = {mass}, represented norm = {norm}"),
    );

    let mut out = Map::new();
    out.insert("kind".into(), json!("monotonicity"));
    out.insert("mode".into(), json!(mode_name::<S>()));
    out.insert(
        "inputs".into(),
        json!({
            "space": fjson::space_to_value(&space),
            "measure": fjson::measure_to_value(&mu),
        }),
    );
    out.insert("monotone".into(), json!(monotone));
    if let Some(w) = &certificate.witness {
        out.insert("witness".into(), fjson::function_to_value(w));
    }
    if let Some(cycle) = &certificate.violating_cycle {
        out.insert(
            "cycle".into(),
            Value::Array(
                cycle
                    .iter()
                    .map(|&(x, y)| json!({"x": x, "y": y}))
                    .collect(),
            ),
        );
    }
    let checks_passed = checks.all_passed;
    out.insert("checks".into(), checks.into_value());
    Ok(Output::checked(Value::Object(out), checks_passed))
}

fn wasserstein<S: Scalar>(
    cli: &Cli,
    space_path: &Path,
    alpha_path: &Path,
    beta_path: &Path,
) -> Result<Output> {
    let space = load_space::<S>(cli, space_path)?;
    let alpha = fjson::point_measure_from_value(&space, &load_json(alpha_path)?)?;
    let beta = fjson::point_measure_from_value(&space, &load_json(beta_path)?)?;
    let solution = transport::optimal_coupling(&space, &alpha, &beta)?;

    let mut checks = Checks::new();
    let (left, right) = solution.coupling.marginals();
    checks.add(
        "left_marginal",
        left == alpha,
        "first marginal equals alpha",
    );
    checks.add(
        "right_marginal",
        right == beta,
        "second marginal equals beta",
    );
    let m = alpha.minus(&beta, &space)?;
    let attained = free::pair(&space, &m, &solution.potential)?;
    checks.add(
        "zero_duality_gap",
        freelip_core::num::within_tol(&attained, &solution.cost, space.tol(), &solution.cost),
        format!("dual = {attained}, primal = {}", solution.cost),
    );

    let checks_passed = checks.all_passed;
    Ok(Output::checked(
        json!({
        "kind": "wasserstein",
        "mode": mode_name::<S>(),
        "inputs": {
            "space": fjson::space_to_value(&space),
            "alpha": fjson::point_measure_to_value(&alpha),
            "beta": fjson::point_measure_to_value(&beta),
        },
        "distance": fjson::scalar_to_value(&solution.cost),
        "coupling": fjson::coupling_to_value(&solution.coupling),
        "potential": fjson::function_to_value(&solution.potential),
        "checks": checks.into_value(),
        }),
        checks_passed,
    ))
}

fn segments<S: Scalar>(
    cli: &Cli,
    space_path: &Path,
    pair: Option<&[usize]>,
    eps: Option<&str>,
) -> Result<Output> {
    let space = load_space::<S>(cli, space_path)?;
    let mut out = Map::new();
    out.insert("kind".into(), json!("segments"));
    out.insert("mode".into(), json!(mode_name::<S>()));
    out.insert(
        "inputs".into(),
        json!({ "space": fjson::space_to_value(&space) }),
    );
    out.insert("concave".into(), json!(space.is_concave()));

    match pair {
        Some(&[p, q]) => {
            let segment = space.segment(p, q)?;
            out.insert("pair".into(), json!([p, q]));
            out.insert("segment".into(), fjson::segment_set_to_value(&segment));
            if let Some(text) = eps {
                let eps_val = S::parse_text(text)?;
                let enlarged = space.segment_eps(p, q, &eps_val)?;
                out.insert("eps".into(), fjson::scalar_to_value(&eps_val));
                out.insert("segment_eps".into(), fjson::segment_set_to_value(&enlarged));
            }
        }
        _ => {
            let mut nontrivial = Vec::new();
            for p in 0..space.len() {
                for q in (p + 1)..space.len() {
                    let segment = space.segment(p, q)?;
                    if segment.len() > 2 {
                        nontrivial.push(json!({
                            "pair": [p, q],
                            "segment": fjson::segment_set_to_value(&segment),
                        }));
                    }
                }
            }
            out.insert("nontrivial_segments".into(), Value::Array(nontrivial));
        }
    }
    Ok(Output::ok(Value::Object(out)))
}

fn extend<S: Scalar>(
    cli: &Cli,
    space_path: &Path,
    problem_path: &Path,
    point: Option<usize>,
    forced_set: bool,
    forced_pairs: bool,
    t: Option<&str>,
) -> Result<Output> {
    let space = load_space::<S>(cli, space_path)?;
    let (problem, ignored) =
        fjson::extension_problem_from_value(&space, &load_json(problem_path)?)?;
    if ignored {
        eprintln!("warning: values outside the prescribed set were ignored");
    }

    let mut out = Map::new();
    out.insert("kind".into(), json!("extension"));
    out.insert("mode".into(), json!(mode_name::<S>()));
    out.insert(
        "inputs".into(),
        json!({
            "space": fjson::space_to_value(&space),
            "problem": fjson::extension_problem_to_value(&problem),
        }),
    );
    let mut checks = Checks::new();

    let everything = point.is_none() && !forced_set && !forced_pairs && t.is_none();

    if let Some(x) = point {
        out.insert(
            "point".into(),
            json!({
                "index": x,
                "lower": fjson::scalar_to_value(&problem.mcshane_lower(&space, x)?),
                "upper": fjson::scalar_to_value(&problem.mcshane_upper(&space, x)?),
            }),
        );
    }
    if forced_set || forced_pairs || everything {
        let forced = problem.forced_set(&space)?;
        let lower = problem.mcshane_lower_all(&space)?;
        let upper = problem.mcshane_upper_all(&space)?;
        let envelope_equal: Vec<usize> = (0..space.len())
            .filter(|&x| {
                freelip_core::num::within_tol(
                    lower.value(x),
                    upper.value(x),
                    space.tol(),
                    upper.value(x),
                )
            })
            .collect();
        checks.add(
            "forced_set_matches_envelopes",
            envelope_equal == forced.iter().collect::<Vec<_>>(),
            "tight-segment union equals the envelope-agreement set",
        );
        if forced_set || everything {
            out.insert("forced_set".into(), fjson::segment_set_to_value(&forced));
        }
        if forced_pairs || everything {
            let pairs = problem.forced_pairs(&space)?;
            checks.add(
                "forced_pair_coordinates_in_forced_set",
                pairs
                    .iter()
                    .all(|&(x, y)| forced.contains(x) && forced.contains(y)),
                "both coordinates of every forced pair are forced points",
            );
            out.insert(
                "forced_pairs".into(),
                Value::Array(pairs.iter().map(|&(x, y)| json!([x, y])).collect()),
            );
        }
    }
    if everything {
        out.insert(
            "lower".into(),
            fjson::function_to_value(&problem.mcshane_lower_all(&space)?),
        );
        out.insert(
            "upper".into(),
            fjson::function_to_value(&problem.mcshane_upper_all(&space)?),
        );
    }
    if let Some(text) = t {
        let t_val = S::parse_text(text)?;
        let f = problem.interpolate_extension(&space, &t_val)?;
        let ball = free::lip_norm(&space, &f)?;
        checks.add(
            "interpolation_in_unit_ball",
            ball <= S::one() + space.tol().clone(),
            format!("lip_norm = {ball}"),
        );
        out.insert("t".into(), fjson::scalar_to_value(&t_val));
        out.insert("interpolation".into(), fjson::function_to_value(&f));
    }
    let checks_passed = checks.all_passed;
    out.insert("checks".into(), checks.into_value());
    Ok(Output::checked(Value::Object(out), checks_passed))
}

fn extreme<S: Scalar>(cli: &Cli, space_path: &Path, pair: &[usize]) -> Result<Output> {
    let space = load_space::<S>(cli, space_path)?;
    let (x, y) = (pair[0], pair[1]);
    let extreme = extremal::is_extreme_molecule(&space, x, y)?;
    let segment = space.segment(x, y)?;

    let mut out = Map::new();
    out.insert("kind".into(), json!("extremality"));
    out.insert("mode".into(), json!(mode_name::<S>()));
    out.insert(
        "inputs".into(),
        json!({ "space": fjson::space_to_value(&space), "pair": [x, y] }),
    );
    out.insert("extreme".into(), json!(extreme));
    out.insert("segment".into(), fjson::segment_set_to_value(&segment));
    let mut checks = Checks::new();
    checks.add(
        "segment_criterion",
        extreme == (segment.len() == 2),
        "extremality follows the trivial-segment criterion",
    );
    if let Some((mid, a, b)) = extremal::non_extremality_witness(&space, x, y)? {
        checks.add(
            "splitting_coefficients_sum_to_one",
            freelip_core::num::within_tol(
                &(a.clone() + b.clone()),
                &S::one(),
                space.tol(),
                &S::one(),
            ),
            format!("{a} + {b}"),
        );
        out.insert(
            "splitting".into(),
            json!({
                "interior": mid,
                "first_coefficient": fjson::scalar_to_value(&a),
                "second_coefficient": fjson::scalar_to_value(&b),
            }),
        );
    }
    let checks_passed = checks.all_passed;
    out.insert("checks".into(), checks.into_value());
    Ok(Output::checked(Value::Object(out), checks_passed))
}

fn face_bound<S: Scalar>(cli: &Cli, space_path: &Path, element_path: &Path) -> Result<Output> {
    let space = load_space::<S>(cli, space_path)?;
    let m = fjson::element_from_value(&space, &load_json(element_path)?)?;
    let bound = extremal::face_support_bound(&space, &m)?;
    Ok(Output::ok(json!({
        "kind": "extremality",
        "mode": mode_name::<S>(),
        "inputs": {
            "space": fjson::space_to_value(&space),
            "element": fjson::element_to_value(&m),
        },
        "support_bound": fjson::segment_set_to_value(&bound),
        "checks": [],
    })))
}

fn demo_lebesgue<S: Scalar>(depth: u32) -> Result<Output> {
    let report = line_lab::lebesgue_series::<S>(depth)?;
    let mut checks = Checks::new();
    // closed forms: mass (1/2)(1 - 2^-(N+1)), residual 2^-(N+2)
    let expected_mass = S::from_ratio(1, 2) * (S::one() - S::from_ratio(1, 1i64 << (depth + 1)));
    let expected_residual = S::from_ratio(1, 1i64 << (depth + 2));
    checks.add(
        "partial_mass_closed_form",
        report.partial_mass == expected_mass,
        format!("mass = {}", report.partial_mass),
    );
    checks.add(
        "residual_closed_form",
        report.residual_norm == expected_residual,
        format!("residual = {}", report.residual_norm),
    );
    checks.add(
        "mass_plus_residual_is_half",
        report.partial_mass.clone() + report.residual_norm.clone() == S::from_ratio(1, 2),
        "partial mass and residual add to the norm 1/2",
    );
    let checks_passed = checks.all_passed;
    Ok(Output::checked(
        json!({
        "kind": "demo",
        "demo": "lebesgue",
        "mode": mode_name::<S>(),
        "depth": depth,
        "space": fjson::space_to_value(&report.space),
        "partial": fjson::measure_to_value(&report.partial),
        "partial_mass": fjson::scalar_to_value(&report.partial_mass),
        "residual_norm": fjson::scalar_to_value(&report.residual_norm),
        "checks": checks.into_value(),
        }),
        checks_passed,
    ))
}

fn demo_cantor<S: Scalar>(depth: u32) -> Result<Output> {
    let approx = line_lab::svc_build::<S>(depth)?;
    let (space, element, staircase) = line_lab::svc_element(&approx)?;
    let pairing = free::pair(&space, &element, &staircase)?;
    let (norm, _) = transport::free_norm(&space, &element)?;
    let oracle = transport::line_norm(&space, &element)?;

    let mut checks = Checks::new();
    checks.add(
        "pairing_attains_alpha",
        pairing == approx.alpha,
        format!("<m, H> = {pairing}, alpha = {}", approx.alpha),
    );
    checks.add(
        "norm_equals_alpha",
        freelip_core::num::within_tol(&norm, &approx.alpha, space.tol(), &approx.alpha),
        format!("norm = {norm}"),
    );
    checks.add(
        "line_oracle_agrees",
        freelip_core::num::within_tol(&oracle, &approx.alpha, space.tol(), &approx.alpha),
        format!("oracle = {oracle}"),
    );

    let checks_passed = checks.all_passed;
    Ok(Output::checked(
        json!({
        "kind": "demo",
        "demo": "cantor",
        "mode": mode_name::<S>(),
        "depth": depth,
        "removed": approx
            .removed
            .iter()
            .map(|(a, b)| json!([fjson::scalar_to_value(a), fjson::scalar_to_value(b)]))
            .collect::<Vec<_>>(),
        "alpha": fjson::scalar_to_value(&approx.alpha),
        "space": fjson::space_to_value(&space),
        "element": fjson::element_to_value(&element),
        "staircase": fjson::function_to_value(&staircase),
        "norm": fjson::scalar_to_value(&norm),
        "checks": checks.into_value(),
        }),
        checks_passed,
    ))
}

fn demo_snowflake<S: Scalar>(grid: usize, theta_text: &str) -> Result<Output> {
    let theta = parse_theta(theta_text)?;
    let report = line_lab::snowflake_demo::<S>(grid, theta)?;
    let mut checks = Checks::new();
    checks.add(
        "margin_strictly_positive",
        report.min_margin > S::zero(),
        format!("min margin = {}", report.min_margin),
    );
    checks.add(
        "omega_norms_uniform",
        freelip_core::num::within_tol(
            &report.uniform_norm,
            &report.omega_pairing,
            &S::default_tol(),
            &report.uniform_norm,
        ),
        format!(
            "norm = {}, pairing = {}",
            report.uniform_norm, report.omega_pairing
        ),
    );
    checks.add(
        "decomposition_pairs_end_at_base",
        report.pairs_end_at_base,
        "every pair of the uniform decomposition ends at the base point",
    );
    let checks_passed = checks.all_passed;
    Ok(Output::checked(
        json!({
        "kind": "demo",
        "demo": "snowflake",
        "mode": mode_name::<S>(),
        "grid": report.grid,
        "theta": format!("{}/{}", theta.0, theta.1),
        "min_margin": fjson::scalar_to_value(&report.min_margin),
        "argmin_pair": [report.argmin_pair.0, report.argmin_pair.1],
        "uniform_norm": fjson::scalar_to_value(&report.uniform_norm),
        "omega_pairing": fjson::scalar_to_value(&report.omega_pairing),
        "pairs_end_at_base": report.pairs_end_at_base,
        "checks": checks.into_value(),
        }),
        checks_passed,
    ))
}

/// Accept "p/q" or a decimal with up to six places.
fn parse_theta(text: &str) -> Result<(u32, u32)> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let num: u32 = n.trim().parse().map_err(|_| Error::ThetaOutOfRange)?;
        let den: u32 = d.trim().parse().map_err(|_| Error::ThetaOutOfRange)?;
        return Ok((num, den));
    }
    let x: f64 = text.parse().map_err(|_| Error::ThetaOutOfRange)?;
    if !(0.0..1.0).contains(&x) {
        return Err(Error::ThetaOutOfRange);
    }
    let den = 1_000_000u32;
    let num = (x * den as f64).round() as u32;
    let g = gcd(num, den);
    Ok((num / g, den / g))
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

fn selftest<S: Scalar>(cli: &Cli) -> Result<Output> {
    let report = harness::selftest::<S>(cli.seed, cli.cases);
    let passed = report.passed();
    let value = json!({
        "kind": "selftest",
        "mode": mode_name::<S>(),
        "seed": report.seed,
        "cases": report.cases,
        "checks_run": report.checks_run,
        "failures": report.failures,
        "passed": passed,
    });
    Ok(Output {
        value,
        code: if passed { 0 } else { 1 },
    })
}
