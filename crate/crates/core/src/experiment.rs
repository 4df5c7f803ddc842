//! Dispatch a resolved configuration to the computation it names and
//! assemble a JSON report. Reports are deterministic given the config; the
//! only varying field is `wall_time_s`, added by [`render`].

use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds;
use crate::census;
use crate::config::{poly, Command, ExperimentConfig, REPORT_SCHEMA};
use crate::cyclo::CycloInt;
use crate::error::{Error, Result};
use crate::ffield::Fe;
use crate::invariance;
use crate::moments;
use crate::strata::{self, BoxSpec, Mode};
use crate::subspace;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// An exact cyclotomic value with its complex shadow.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactValue {
    pub order: u64,
    pub coeffs: Vec<i64>,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

impl ExactValue {
    pub fn new(z: &CycloInt<i64>) -> Self {
        let c = z.to_complex::<f64>();
        ExactValue {
            order: z.order(),
            coeffs: z.coeffs().to_vec(),
            re: c.re,
            im: c.im,
            abs: z.abs::<f64>(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub command: Command,
    /// Whether every check in the report held.
    pub pass: bool,
    pub result: Value,
    /// CSV body for `stratify` when a path is configured.
    pub csv: Option<Vec<u8>>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let command = cfg
        .command
        .ok_or_else(|| Error::Invalid("command: no command given".into()))?;
    cfg.validate()?;
    let (pass, result, csv) = match command {
        Command::Bounds => run_bounds(cfg)?,
        Command::Bootstrap => run_bootstrap(cfg)?,
        Command::CharSum => run_char_sum(cfg)?,
        Command::MomentVerify => run_moments(cfg)?,
        Command::Census => run_census(cfg)?,
        Command::Weil => run_weil(cfg)?,
        Command::Stratify => run_stratify(cfg)?,
        Command::Boxcount => run_boxcount(cfg)?,
        Command::SubspaceDemo => run_subspace(cfg)?,
        Command::Invariance => run_invariance(cfg)?,
    };
    Ok(Outcome {
        command,
        pass,
        result,
        csv,
    })
}

/// The report as pretty JSON. `wall_time` is omitted when `None`, which is
/// the form compared for reproducibility.
pub fn render(cfg: &ExperimentConfig, out: &Outcome, wall_time: Option<f64>) -> String {
    let mut report = json!({
        "schema": REPORT_SCHEMA,
        "version": VERSION,
        "command": out.command.name(),
        "pass": out.pass,
        "config": cfg,
        "result": out.result,
    });
    if let Some(t) = wall_time {
        report["wall_time_s"] = json!(t);
    }
    let mut s = serde_json::to_string_pretty(&report).expect("reports serialize");
    s.push('\n');
    s
}

type Run = (bool, Value, Option<Vec<u8>>);

fn run_bounds(cfg: &ExperimentConfig) -> Result<Run> {
    let (n, r_lo) = (cfg.n, cfg.r);
    let r_hi = cfg.r_max.unwrap_or(r_lo);
    bounds::ThetaParams::new(n, r_lo)?;
    let rows = (r_lo..=r_hi)
        .map(|r| {
            let theta = (0..=n).map(|j| bounds::theta(n, r, j)).collect::<Result<Vec<_>>>()?;
            Ok(json!({ "r": r, "theta": theta, "horizon": bounds::horizon(n, r) }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((true, json!({ "n": n, "rows": rows }), None))
}

fn run_bootstrap(cfg: &ExperimentConfig) -> Result<Run> {
    let (n, r) = (cfg.n, cfg.r);
    let table = bounds::bootstrap_fixed_point(n, r)?;
    let closed = (0..=n).map(|j| bounds::theta(n, r, j)).collect::<Result<Vec<_>>>()?;
    let no_improvement = bounds::no_improvement_check(n, r)?;
    let pass = table.c == closed && no_improvement;
    Ok((
        pass,
        json!({ "table": table, "closed_form": closed, "no_improvement": no_improvement }),
        None,
    ))
}

fn run_char_sum(cfg: &ExperimentConfig) -> Result<Run> {
    let fam = cfg.family(true)?;
    let (n, r) = (fam.n(), fam.r());
    let tuples: Vec<Vec<Vec<Fe>>> = if cfg.offsets.is_empty() {
        vec![vec![vec![Fe::ZERO; n]; r]]
    } else {
        cfg.offsets
            .iter()
            .map(|t| t.iter().map(|v| v.iter().map(|&c| Fe(c)).collect()).collect())
            .collect()
    };
    let mut rows = Vec::new();
    for &e in &cfg.ext_degrees {
        let tabs = fam.tables(e)?;
        for (ti, t) in tuples.iter().enumerate() {
            if t.len() != r || t.iter().any(|v| v.len() != n) {
                return Err(Error::Invalid(format!("offsets[{ti}]: need {r} vectors of length {n}")));
            }
            let big: Vec<Vec<Fe>> = t.iter().map(|v| v.iter().map(|&c| tabs.extension().embed(c)).collect()).collect();
            let v = tabs.sum_s(&big)?;
            rows.push(json!({
                "e": e,
                "q": tabs.field().q(),
                "offsets": t,
                "value": ExactValue::new(&v),
            }));
        }
    }
    Ok((true, json!({ "ambient": fam.ambient(), "rows": rows }), None))
}

fn run_moments(cfg: &ExperimentConfig) -> Result<Run> {
    let fam = cfg.family(true)?;
    let mut rows = Vec::new();
    let mut pass = true;
    for &e in &cfg.ext_degrees {
        for s in cfg.s_min..=cfg.s_max {
            let rep = moments::verify_identity(&fam, s, e)?;
            pass &= rep.equal;
            rows.push(json!({ "e": e, "s": s, "report": rep }));
        }
    }
    Ok((pass, json!({ "equal": pass, "rows": rows }), None))
}

fn first_pair(cfg: &ExperimentConfig) -> Result<crate::sums::SumFamily> {
    let fam = cfg.family(false)?;
    if fam.r() != 1 {
        return Err(Error::Invalid(format!(
            "family: this command takes exactly one character and function, got {}",
            fam.r()
        )));
    }
    Ok(fam)
}

fn run_census(cfg: &ExperimentConfig) -> Result<Run> {
    let fam = first_pair(cfg)?;
    let f = &fam.rationals()[0];
    let chi = &fam.characters()[0];
    let d = cfg.d.unwrap_or(chi.d());
    let exps: Vec<Vec<i64>> = match &cfg.exponents {
        Some(x) => vec![x.clone()],
        None => (cfg.s_min..=cfg.s_max).map(census::moment_exponents).collect(),
    };
    let mut rows = Vec::new();
    let mut pass = true;
    for &e in &cfg.ext_degrees {
        for a in &exps {
            let chi_arg = (d == chi.d()).then_some(chi);
            let rep = census::perfect_power_census(f, d, a, e, chi_arg, cfg.budget)?;
            let st = census::census_structure_check(f, d, a, e, cfg.budget)?;
            pass &= rep.bound_pass && st.pass;
            rows.push(json!({ "census": rep, "structure": st }));
        }
    }
    Ok((pass, json!({ "rows": rows }), None))
}

fn run_weil(cfg: &ExperimentConfig) -> Result<Run> {
    let fam = first_pair(cfg)?;
    let rep = census::weil_check(&fam.rationals()[0], &fam.characters()[0], &cfg.ext_degrees, cfg.c_user, cfg.budget)?;
    Ok((rep.pass, to_value(&rep), None))
}

fn run_stratify(cfg: &ExperimentConfig) -> Result<Run> {
    let fam = cfg.family(true)?;
    let mode = match cfg.sample {
        Some(size) => Mode::Sample { size, seed: cfg.seed },
        None => Mode::Exact,
    };
    let mut rows = Vec::new();
    let mut dumped = Vec::new();
    for &e in &cfg.ext_degrees {
        let (census, sample) = strata::stratum_census(&fam, e, cfg.c_user, mode, cfg.row_limit)?;
        rows.push(to_value(&census));
        if dumped.is_empty() {
            dumped = sample;
        }
    }
    let csv = match cfg.csv {
        Some(_) => {
            let mut buf = Vec::new();
            strata::write_rows(&mut buf, &dumped)?;
            Some(buf)
        }
        None => None,
    };
    Ok((true, json!({ "rows": rows }), csv))
}

fn run_boxcount(cfg: &ExperimentConfig) -> Result<Run> {
    let ctx = cfg.field_ctx()?;
    if let Some(v) = &cfg.variety {
        let polys = v
            .polys
            .iter()
            .enumerate()
            .map(|(i, p)| poly(&ctx, v.nvars, p, &format!("variety.polys[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let mut boxes = cfg.boxes(&ctx)?;
        if boxes.is_empty() {
            boxes.push(BoxSpec::full(&ctx, v.nvars));
        }
        let mut rows = Vec::new();
        let mut pass = true;
        for bx in &boxes {
            let rep = strata::box_count_variety(&ctx, &polys, bx, v.theta, v.degree, cfg.budget)?;
            pass &= rep.pass;
            rows.push(json!({ "box": bx.sides(), "report": rep }));
        }
        let suite = if cfg.suite.count > 0 {
            let primes = if cfg.suite.primes.is_empty() { vec![5, 7] } else { cfg.suite.primes.clone() };
            let insts = strata::random_box_instances(cfg.seed, cfg.suite.count, &primes, cfg.suite.max_dim)?;
            let mut failures = 0usize;
            for inst in &insts {
                let c = crate::ffield::make_field(inst.p, 1)?;
                let bx = BoxSpec::new(&c, inst.sides.clone())?;
                if !strata::box_count_variety(&c, &inst.polys, &bx, inst.theta, inst.degree, cfg.budget)?.pass {
                    failures += 1;
                }
            }
            pass &= failures == 0;
            json!({ "seed": cfg.seed, "instances": insts.len(), "failures": failures })
        } else {
            Value::Null
        };
        return Ok((pass, json!({ "variety": rows, "suite": suite }), None));
    }
    let fam = cfg.family(true)?;
    let mut boxes = cfg.boxes(&ctx)?;
    if boxes.is_empty() {
        boxes.push(BoxSpec::full(&ctx, fam.n()));
    }
    let mut rows = Vec::new();
    let mut pass = true;
    for &e in &cfg.ext_degrees {
        for bx in &boxes {
            let rep = strata::box_exceptional_count(&fam, e, cfg.c_user, cfg.j, bx, cfg.c_prime)?;
            pass &= rep.pass.unwrap_or(true);
            rows.push(to_value(&rep));
        }
    }
    Ok((pass, json!({ "exceptional": rows }), None))
}

fn run_subspace(cfg: &ExperimentConfig) -> Result<Run> {
    let vs = cfg.subspaces()?;
    let ws = subspace::extend_transverse(&vs)?;
    let adapted = subspace::transverse_basis(&vs)?;
    let before = subspace::check_transversality(&vs)?;
    let after = subspace::check_transversality(&ws)?;
    let basis = subspace::check_basis(&vs, &adapted)?;
    let mut pass = after.all() && basis.pass() && before.agree();
    let suite = if cfg.suite.count > 0 {
        let primes: Vec<u32> = if cfg.suite.primes.is_empty() {
            vec![2, 3]
        } else {
            cfg.suite.primes.iter().map(|&p| p as u32).collect()
        };
        let rep = subspace::run_suite(cfg.seed, cfg.suite.count, &primes, cfg.suite.max_dim, cfg.suite.max_n)?;
        pass &= rep.pass;
        to_value(&rep)
    } else {
        Value::Null
    };
    let show = |s: &[subspace::Subspace]| s.iter().map(|v| v.basis().to_vec()).collect::<Vec<_>>();
    Ok((
        pass,
        json!({
            "input": show(&vs),
            "input_conditions": before,
            "extended": show(&ws),
            "extended_conditions": after,
            "adapted_basis": adapted,
            "basis_check": basis,
            "suite": suite,
        }),
        None,
    ))
}

fn run_invariance(cfg: &ExperimentConfig) -> Result<Run> {
    let f = cfg.integer_poly()?;
    let primes = if cfg.primes.is_empty() { invariance::odd_primes(20) } else { cfg.primes.clone() };
    let rational = invariance::rational_invariance_probe(&f, &primes, cfg.budget)?;
    let power_free = match (f.nvars(), cfg.d) {
        (1, Some(d)) => to_value(&invariance::power_free_mod_p(&f, d as u32, &primes, cfg.table_budget)?),
        _ => Value::Null,
    };
    let pass = rational.status != invariance::Status::Inconclusive;
    Ok((pass, json!({ "polynomial": f, "rational": rational, "power_free": power_free }), None))
}
