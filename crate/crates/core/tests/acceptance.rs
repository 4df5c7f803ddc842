//! Acceptance criteria, one line each. Runs as its own binary so the
//! summary is printed whether or not a criterion fails.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use charsum::bounds::{self, ThetaIter};
use charsum::census;
use charsum::config::ExperimentConfig;
use charsum::experiment;
use charsum::ffield::{make_field, Character, Fe, FieldCtx};
use charsum::moments::{moment_direct, moment_via_transform};
use charsum::mpoly::MPoly;
use charsum::rfunc::FactoredRational;
use charsum::strata::{self, BoxSpec, Mode};
use charsum::subspace;
use charsum::sums::SumFamily;
use charsum::Error;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn upoly(ctx: &FieldCtx, coeffs: &[i64]) -> MPoly {
    let c: Vec<Fe> = coeffs.iter().map(|&x| ctx.from_int(x)).collect();
    MPoly::univariate(ctx, &c)
}

fn frac(ctx: &Arc<FieldCtx>, coeffs: &[i64]) -> FactoredRational {
    FactoredRational::from_poly(ctx, &upoly(ctx, coeffs), false).unwrap()
}

fn quadratic(ctx: &Arc<FieldCtx>) -> Character {
    Character::new(ctx, 2, 1, 2).unwrap()
}

// x, x + 1, x(x + 1), x^3 + x
const POLYS: [&[i64]; 4] = [&[0, 1], &[1, 1], &[0, 1, 1], &[0, 1, 0, 1]];

fn choices(r: usize) -> Vec<Vec<usize>> {
    (0..4usize.pow(r as u32))
        .map(|mut i| {
            (0..r)
                .map(|_| {
                    let c = i % 4;
                    i /= 4;
                    c
                })
                .collect()
        })
        .collect()
}

fn moment_identity() -> Verdict {
    let (mut cells, mut skipped, mut bad) = (0, 0, Vec::new());
    for p in [3u64, 5, 7] {
        let ctx = make_field(p, 1).unwrap();
        for r in 1..=3 {
            for pick in choices(r) {
                let rats = pick.iter().map(|&i| frac(&ctx, POLYS[i])).collect();
                let fam = SumFamily::new(&ctx, 1, vec![quadratic(&ctx); r], rats, 3).unwrap();
                for s in 1..=2 {
                    match (moment_direct(&fam, s, 1), moment_via_transform(&fam, s, 1)) {
                        (Ok(a), Ok(b)) => {
                            cells += 1;
                            if a != b {
                                bad.push(format!("p={p} F={pick:?} s={s}"));
                            }
                        }
                        (Err(Error::Budget { .. }), _) | (_, Err(Error::Budget { .. })) => skipped += 1,
                        (Err(e), _) | (_, Err(e)) => bad.push(format!("p={p} F={pick:?} s={s}: {e}")),
                    }
                }
            }
        }
    }
    let ctx = make_field(3, 1).unwrap();
    let g = MPoly::from_terms(&ctx, 2, vec![(vec![1, 1], Fe(1)), (vec![0, 0], Fe(1))]).unwrap();
    for r in 1..=2 {
        let rats = vec![FactoredRational::from_poly(&ctx, &g, true).unwrap(); r];
        let fam = SumFamily::new(&ctx, 2, vec![quadratic(&ctx); r], rats, 2).unwrap();
        match (moment_direct(&fam, 1, 1), moment_via_transform(&fam, 1, 1)) {
            (Ok(a), Ok(b)) => {
                cells += 1;
                if a != b {
                    bad.push(format!("n=2 r={r}"));
                }
            }
            _ => bad.push(format!("n=2 r={r}: error")),
        }
    }
    verdict(bad.is_empty(), format!("{cells} cells equal, {skipped} over budget, mismatches {bad:?}"))
}

fn theta_bootstrap() -> Verdict {
    let mut bad = Vec::new();
    for n in 2..=5 {
        for r in 1..=20 {
            let table = bounds::bootstrap_fixed_point(n, r).unwrap();
            let closed: Vec<i64> = (0..=n).map(|j| bounds::theta(n, r, j).unwrap()).collect();
            if table.c != closed {
                bad.push((n, r));
            }
        }
    }
    verdict(bad.is_empty(), format!("80 shapes, mismatches {bad:?}"))
}

fn iteration_convergence() -> Verdict {
    let mut bad = Vec::new();
    let mut it = ThetaIter::new(2).unwrap();
    for r in 1..=40i64 {
        let cap = (r + 1) / 2 - 1;
        let mut prev = 0;
        for i in 0..=(r as u32 - 1).max(1) {
            let v = it.get(r, i);
            if v < prev || v > cap {
                bad.push(format!("n=2 r={r} i={i}: {v}"));
            }
            prev = v;
        }
        if it.get(r, r as u32 - 1) != (r - 1) / 2 {
            bad.push(format!("n=2 r={r}: limit {}", it.get(r, r as u32 - 1)));
        }
    }
    for n in [3, 5] {
        let mut it = ThetaIter::new(n).unwrap();
        for r in 1..=40i64 {
            if it.get(r, 40) != (r - 1) / 2 {
                bad.push(format!("n={n} r={r}: {}", it.get(r, 40)));
            }
        }
    }
    verdict(bad.is_empty(), format!("failures {bad:?}"))
}

fn no_improvement() -> Verdict {
    let bad: Vec<(i64, i64)> = (2..=4)
        .flat_map(|n| (1..=30).map(move |r| (n, r)))
        .filter(|&(n, r)| !bounds::no_improvement_check(n, r).unwrap())
        .collect();
    verdict(bad.is_empty(), format!("90 shapes, failures {bad:?}"))
}

fn weil_empirics() -> Verdict {
    let mut worst = 0f64;
    let mut bad = Vec::new();
    for p in [5u64, 7, 11, 13] {
        let ctx = make_field(p, 1).unwrap();
        let chi = quadratic(&ctx);
        for coeffs in [&[0i64, 1, 1][..], &[0, 1, 0, 1]] {
            let rep = census::weil_check(&frac(&ctx, coeffs), &chi, &[1, 2], 2.0, 1 << 24).unwrap();
            worst = worst.max(rep.max_ratio);
            if !rep.pass {
                bad.push(format!("p={p} F={coeffs:?}"));
            }
        }
        let lin = census::weil_check(&frac(&ctx, &[0, 1]), &chi, &[1, 2], 2.0, 1 << 24).unwrap();
        if lin.rows.iter().any(|row| row.value.iter().any(|&c| c != 0)) {
            bad.push(format!("p={p} F=x nonzero"));
        }
    }
    verdict(bad.is_empty(), format!("max ratio {worst:.4} <= 2, failures {bad:?}"))
}

/// Net multiplicity of each root `-m` in `prod (x + m_i)^{a_i}`; the
/// product is a square exactly when every multiplicity is even.
fn multiset_square(tuple: &[i64], exps: &[i64]) -> bool {
    let mut mult: BTreeMap<i64, i64> = BTreeMap::new();
    for (&m, &a) in tuple.iter().zip(exps) {
        *mult.entry(m).or_default() += a;
    }
    mult.values().all(|v| v % 2 == 0)
}

fn oracle_count(q: i64, exps: &[i64]) -> u128 {
    let r = exps.len() as u32;
    (0..q.pow(r))
        .filter(|&idx| {
            let t: Vec<i64> = (0..r).map(|i| idx / q.pow(r - 1 - i) % q).collect();
            multiset_square(&t, exps)
        })
        .count() as u128
}

fn census_counts() -> Verdict {
    let mut lines = Vec::new();
    let mut pass = true;
    for q in [3u64, 5, 7] {
        let ctx = make_field(q, 1).unwrap();
        let f = frac(&ctx, &[0, 1]);
        let s1 = census::moment_census(&f, 2, 1, 1).unwrap().count;
        let s2 = census::moment_census(&f, 2, 2, 1).unwrap().count;
        let o1 = oracle_count(q as i64, &census::moment_exponents(1));
        let o2 = oracle_count(q as i64, &census::moment_exponents(2));
        let q = q as u128;
        let stated = 2 * q * q - q;
        pass &= s1 == q && s1 == o1 && s2 == o2 && s2 == stated;
        lines.push(format!("q={q}: s=1 {s1} (oracle {o1}, want {q}); s=2 {s2} (oracle {o2}, want {stated})"));
    }
    verdict(pass, lines.join("; "))
}

fn census_structure() -> Verdict {
    let mut bad = Vec::new();
    let mut checked = 0;
    for q in [3u64, 5, 7] {
        let ctx = make_field(q, 1).unwrap();
        let f = frac(&ctx, &[0, 1]);
        for s in 1..=2 {
            checked += 1;
            let rep = census::census_structure_check(&f, 2, &census::moment_exponents(s), 1, 1 << 26).unwrap();
            if !rep.pass {
                bad.push(format!("F=x q={q} s={s}"));
            }
        }
    }
    let f3 = make_field(3, 1).unwrap();
    let as3 = frac(&f3, &[0, -1, 0, 1]);
    for e in 1..=3 {
        let st = as3.stabilizer(e, 1 << 20).unwrap().len();
        if st != 3 {
            bad.push(format!("x^3-x stabilizer at e={e} has {st} elements"));
        }
    }
    for (e, s) in [(1, 1), (1, 2), (2, 1), (2, 2), (3, 1)] {
        checked += 1;
        let rep = census::census_structure_check(&as3, 2, &census::moment_exponents(s), e, 1 << 26).unwrap();
        if !rep.pass {
            bad.push(format!("x^3-x e={e} s={s}"));
        }
    }
    verdict(bad.is_empty(), format!("{checked} instances, failures {bad:?}"))
}

fn box_lemma() -> Verdict {
    let mut bad = Vec::new();
    let insts = strata::random_box_instances(2024, 50, &[5, 7], 3).unwrap();
    for (i, inst) in insts.iter().enumerate() {
        let ctx = make_field(inst.p, 1).unwrap();
        let bx = BoxSpec::new(&ctx, inst.sides.clone()).unwrap();
        let rep = strata::box_count_variety(&ctx, &inst.polys, &bx, inst.theta, inst.degree, 1 << 24).unwrap();
        if !rep.pass {
            bad.push(format!("instance {i}: {} > {}", rep.count, rep.bound));
        }
    }
    let f7 = make_field(7, 1).unwrap();
    let bx = BoxSpec::new(&f7, vec![vec![Fe(0), Fe(1)], vec![Fe(0), Fe(1), Fe(2)]]).unwrap();
    let a = strata::box_count_variety(&f7, &[MPoly::var(2, 0)], &bx, 1, 1, 1 << 24).unwrap();
    let f5 = make_field(5, 1).unwrap();
    let hyp = MPoly::from_terms(&f5, 2, vec![(vec![1, 1], Fe(1)), (vec![0, 0], f5.from_int(-1))]).unwrap();
    let b = strata::box_count_variety(&f5, &[hyp], &BoxSpec::full(&f5, 2), 1, 2, 1 << 24).unwrap();
    let cross = MPoly::from_terms(&f5, 2, vec![(vec![1, 1], Fe(1))]).unwrap();
    let c = strata::box_count_variety(&f5, &[cross], &BoxSpec::full(&f5, 2), 1, 2, 1 << 24).unwrap();
    let pinned = (a.count, a.bound) == (3, 3) && (b.count, b.bound) == (4, 10) && c.count == 9 && c.pass;
    verdict(
        bad.is_empty() && pinned,
        format!(
            "50 random instances, failures {bad:?}; pinned {}<={}, {}<={}, {}<={}",
            a.count, a.bound, b.count, b.bound, c.count, c.bound
        ),
    )
}

fn subspace_lemmas() -> Verdict {
    let rep = subspace::run_suite(500, 500, &[2, 3], 6, 4).unwrap();
    verdict(
        rep.pass,
        format!(
            "{} instances: extension {} basis {} agreement {} (already transverse {})",
            rep.instances, rep.extension_ok, rep.basis_ok, rep.conditions_agree, rep.transverse_inputs
        ),
    )
}

fn cubic_family(p: u64) -> SumFamily {
    let ctx = make_field(p, 1).unwrap();
    let f = frac(&ctx, &[0, 1, 0, 1]);
    SumFamily::new(&ctx, 1, vec![quadratic(&ctx); 3], vec![f; 3], 3).unwrap()
}

fn stratification_trend() -> Verdict {
    let mut fractions = Vec::new();
    let mut lines = Vec::new();
    for p in [5u64, 7, 11, 13] {
        let (c, _) = strata::stratum_census(&cubic_family(p), 1, 3.0, Mode::Exact, 0).unwrap();
        let frac = c.counts[1] as f64 / (p as f64).powi(3);
        fractions.push(frac);
        let codim = c.empirical_codim[1].map_or("-".into(), |v| format!("{v:.3}"));
        lines.push(format!("p={p} N_1={} frac={frac:.4} codim={codim} theta_1={}", c.counts[1], c.theta[1]));
    }
    let inversions: Vec<f64> = fractions
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[1] - w[0]) / w[0])
        .collect();
    let pass = inversions.len() <= 1 && inversions.iter().all(|&x| x <= 0.10);
    verdict(pass, format!("{}; inversions {inversions:?}", lines.join("; ")))
}

fn configs() -> Vec<ExperimentConfig> {
    let fam = |p: u64, r: usize, coeffs: &str| {
        let rats = vec![format!(r#"{{"numerator": {coeffs}}}"#); r].join(", ");
        let chars = vec!["[2, 1]"; r].join(", ");
        format!(r#""field": {{"p": {p}}}, "family": {{"n": 1, "characters": [{chars}], "rationals": [{rats}]}}"#)
    };
    let cubic = "[[[3], 1], [[1], 1]]";
    [
        format!(r#"{{"command": "moment-verify", {}, "s_max": 2}}"#, fam(5, 2, cubic)),
        r#"{"command": "bootstrap", "n": 3, "r": 11}"#.to_string(),
        format!(r#"{{"command": "weil", {}, "ext_degrees": [1, 2], "c_user": 2}}"#, fam(7, 1, cubic)),
        format!(r#"{{"command": "census", {}, "s_max": 2}}"#, fam(5, 1, "[[[1], 1]]")),
        r#"{"command": "boxcount", "field": {"p": 5}, "variety": {"nvars": 2, "polys": [[[[1, 1], 1], [[0, 0], -1]]], "theta": 1, "degree": 2}, "suite": {"count": 50, "primes": [5, 7]}, "seed": 2024}"#.to_string(),
        r#"{"command": "subspace-demo", "suite": {"count": 100, "max_dim": 6}, "seed": 500}"#.to_string(),
        format!(r#"{{"command": "stratify", {}}}"#, fam(7, 3, cubic)),
        format!(r#"{{"command": "stratify", {}, "sample": 300, "seed": 11}}"#, fam(13, 3, cubic)),
    ]
    .iter()
    .map(|s| ExperimentConfig::from_json(s).unwrap())
    .collect()
}

fn determinism() -> Verdict {
    let mut bad = Vec::new();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let cfgs = configs();
    for cfg in &cfgs {
        let render = || experiment::render(cfg, &experiment::run(cfg).unwrap(), None);
        let a = render();
        let b = render();
        let c = one.install(render);
        let d = four.install(render);
        if !(a == b && a == c && a == d) {
            bad.push(cfg.command.unwrap().name());
        }
    }
    verdict(bad.is_empty(), format!("{} configs x 4 runs (default, repeat, 1 and 4 threads), differing {bad:?}", cfgs.len()))
}

fn main() {
    type Criterion = (u32, &'static str, Duration, fn() -> Verdict);
    let criteria: [Criterion; 11] = [
        (1, "moment identity", Duration::from_secs(300), moment_identity),
        (2, "closed form vs bootstrap", Duration::from_secs(10), theta_bootstrap),
        (3, "iteration convergence", Duration::from_secs(10), iteration_convergence),
        (4, "no-improvement fixed point", Duration::from_secs(10), no_improvement),
        (5, "square-root envelope", Duration::from_secs(60), weil_empirics),
        (6, "perfect-power census counts", Duration::from_secs(60), census_counts),
        (7, "census structure", Duration::from_secs(60), census_structure),
        (8, "box lemma", Duration::from_secs(30), box_lemma),
        (9, "subspace lemmas", Duration::from_secs(30), subspace_lemmas),
        (10, "stratification trend", Duration::from_secs(300), stratification_trend),
        (11, "determinism", Duration::from_secs(300), determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = Vec::new();
    for (id, name, limit, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str()) || *f == id.to_string()) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        let took = start.elapsed();
        let in_time = took <= limit;
        let ok = v.pass && in_time;
        println!(
            "[{}] criterion {id:>2} {name}: {:.2}s (limit {}s) | {}",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs(),
            v.detail
        );
        if !ok {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
