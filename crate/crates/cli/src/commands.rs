//! One function per subcommand. Each returns a verdict, summary rows and the
//! files it produced; library budget and refutation errors are turned into
//! verdicts by [`run_operation`].

use entile_core::algebra::json::{element_to_json, elements_to_json, quotient_from_json, rational_from_json, rational_to_string};
use entile_core::constructions::{
    diagonal_folner, extension_folner, extension_monotileable, finite_index_folner, Condition, DiagonalChain,
    ExtensionOptions, MonotileableExtension,
};
use entile_core::entropy::{addition_report, entropy_profile_with, induced_actions, relative_profile, EntropyProfile, SubgroupSpec};
use entile_core::folner::{build_folner, cif_extract, folner_report, ASequence, BuilderSpec, Exhaustion, FolnerSeq};
use entile_core::tiling::{congruentize, extract_tiling_sequence, find_monotile_cover_with, LocalTilingCert};
use entile_core::{Element, QuotientSpec};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::par::par_map;
use crate::report::{fmt_float, verdict_of, CliError, Outputs, Report, Verdict, PROFILE_COLUMNS};
use crate::scenario::{exhaustion_from_json, read_json, sequence_from_json, target_set, Scenario};
use crate::verify::verify_certificate;

/// Every operation name, as written in scenarios and on the command line.
pub const OPERATIONS: [&str; 14] = [
    "tile.check",
    "tile.extract",
    "tile.verify",
    "folner.defect",
    "folner.cif",
    "folner.build",
    "entropy.profile",
    "entropy.relative",
    "entropy.addition",
    "construct.extension",
    "construct.finite-index",
    "construct.diagonal",
    "construct.qsemidirect",
    "congruentize",
];

/// `"tile check"`, `"tile.check"` and `"tile/check"` all name the same operation.
pub fn normalize_operation(op: &str) -> String {
    op.trim().split(|c: char| c.is_whitespace() || c == '.' || c == '/').filter(|s| !s.is_empty()).collect::<Vec<_>>().join(".")
}

struct Outcome {
    verdict: Verdict,
    summary: Vec<Value>,
    out: Outputs,
}

impl Outcome {
    fn new(verdict: Verdict, summary: Vec<Value>, out: Outputs) -> Self {
        Outcome { verdict, summary, out }
    }
}

type Run = Result<Outcome, CliError>;

pub fn run_operation(op: &str, sc: &Scenario, jobs: usize) -> Result<(Report, Outputs), CliError> {
    let op = normalize_operation(op);
    let res = match op.as_str() {
        "tile.check" => tile_check(sc),
        "tile.extract" => tile_extract(sc),
        "tile.verify" => tile_verify(sc),
        "folner.defect" => folner_defect(sc),
        "folner.cif" => folner_cif(sc),
        "folner.build" => folner_build(sc),
        "entropy.profile" => entropy_profile_cmd(sc, jobs),
        "entropy.relative" => entropy_relative(sc),
        "entropy.addition" => entropy_addition(sc),
        "construct.extension" => construct_extension(sc),
        "construct.finite-index" => construct_finite_index(sc),
        "construct.diagonal" => construct_diagonal(sc),
        "construct.qsemidirect" => construct_qsemidirect(sc),
        "congruentize" => congruentize_cmd(sc),
        other => return Err(CliError::Usage(format!("unknown operation {other:?}"))),
    };
    let outcome = match res {
        Ok(o) => o,
        Err(CliError::Core(e)) => Outcome::new(verdict_of(e)?, vec![], Outputs::default()),
        Err(e) => return Err(e),
    };
    let report = Report { operation: op, verdict: outcome.verdict, artifacts: outcome.out.names(), summary: outcome.summary };
    Ok((report, outcome.out))
}

/// Runs the independent checker on an emitted certificate; a rejection turns
/// the verdict into a failure.
fn recheck(v: &Value, seq: Option<&FolnerSeq>, verdict: Verdict) -> Verdict {
    match verify_certificate(v, seq) {
        Ok(_) => verdict,
        Err(e) => verdict.and(Verdict::Fail(format!("independent verification rejected the certificate: {e}"))),
    }
}

// --- tile -------------------------------------------------------------------

fn tile_check(sc: &Scenario) -> Run {
    let ctx = sc.monoid()?;
    let t = sc.subset(&ctx, "T")?;
    let v = sc.subset(&ctx, "V")?;
    let must = if sc.bool_or("require_identity", false)? { Some(ctx.identity()) } else { None };
    let mut out = Outputs::default();
    match find_monotile_cover_with(&t, &v, must.as_ref(), sc.budgets.node_budget)? {
        Some(cert) => {
            cert.verify()?;
            let j = cert.to_json();
            let verdict = recheck(&j, None, Verdict::Pass);
            out.json("tile_cert.json", &j);
            Ok(Outcome::new(verdict, vec![json!({"C": elements_to_json(cert.c.iter()), "translates": cert.c.len()})], out))
        }
        None => {
            let why = if must.is_some() { " with the identity in C" } else { "" };
            Ok(Outcome::new(
                Verdict::Fail(format!("no C{why} with C·T = V (|T| = {}, |V| = {})", t.len(), v.len())),
                vec![],
                out,
            ))
        }
    }
}

fn level_rows(cert: &LocalTilingCert) -> Vec<Value> {
    cert.levels
        .iter()
        .map(|l| {
            json!({
                "n": l.n,
                "K": elements_to_json(l.tiling.translates().iter()),
                "identity_in_K": l.tiling.contains_identity(),
                "identity_excluded": l.identity_excluded,
            })
        })
        .collect()
}

fn tile_extract(sc: &Scenario) -> Run {
    let seq = sc.sequence("sequence")?;
    let depth = sc.depth(4)?;
    let cert = extract_tiling_sequence(&seq, depth, sc.bool_or("prefer_identity", true)?, sc.budgets.node_budget)?;
    cert.verify(Some(&seq))?;
    let j = cert.to_json();
    let verdict = recheck(&j, Some(&seq), Verdict::Pass);
    let mut summary = level_rows(&cert);
    summary.push(json!({"congruent": cert.congruent, "identity_excluded_levels": cert.identity_excluded_levels()}));
    let mut out = Outputs::default();
    out.json("tiling_cert.json", &j);
    Ok(Outcome::new(verdict, summary, out))
}

fn tile_verify(sc: &Scenario) -> Run {
    let cert = match sc.get("certificate") {
        Some(c) => c.clone(),
        None => read_json(&sc.path("certificate_file")?)?,
    };
    let seq = sc.get("sequence").map(sequence_from_json).transpose()?;
    Ok(match verify_certificate(&cert, seq.as_ref()) {
        Ok(notes) => Outcome::new(Verdict::Pass, notes.into_iter().map(Value::String).collect(), Outputs::default()),
        Err(e) => Outcome::new(Verdict::Fail(e), vec![], Outputs::default()),
    })
}

// --- folner -----------------------------------------------------------------

fn folner_defect(sc: &Scenario) -> Run {
    let seq = sc.sequence("sequence")?;
    let ctx = seq.ctx().clone();
    let default = ctx.generators().map(<[Element]>::to_vec).unwrap_or_default();
    let samples = sc.elements_or(&ctx, "samples", default)?;
    if samples.is_empty() {
        return Err(CliError::Usage("folner defect needs \"samples\"".into()));
    }
    let from = sc.usize_or("from", 0)?;
    let to = sc.depth(5)?;
    let rep = folner_report(&seq, &samples, from, to)?;
    let rows: Vec<Vec<String>> = rep
        .rows
        .iter()
        .map(|r| vec![r.n.to_string(), element_to_json(&r.s).to_string(), rational_to_string(&r.defect)])
        .collect();
    let mut out = Outputs::default();
    out.csv("defects.csv", &["n", "s", "defect"], &rows);
    let summary = rep
        .trends
        .iter()
        .map(|t| {
            json!({
                "s": element_to_json(&t.s),
                "non_increasing": t.non_increasing,
                "strictly_decreasing": t.strictly_decreasing,
                "last": rational_to_string(&t.last),
            })
        })
        .collect();
    let verdict = match rep.trends.iter().find(|t| !t.non_increasing) {
        None => Verdict::Pass,
        Some(t) => Verdict::Fail(format!("defect along s = {} increases between n = {from} and {to}", t.s)),
    };
    Ok(Outcome::new(verdict, summary, out))
}

fn folner_cif(sc: &Scenario) -> Run {
    let seq = sc.sequence("sequence")?;
    let exh = sc.exhaustion(seq.ctx())?;
    let depth = sc.depth(4)?;
    let cif = cif_extract(&seq, &exh, depth, sc.budgets.horizon)?;
    cif.verify(&seq, &exh)?;
    let j = json!({
        "kind": "cif",
        "sequence": {"builder": seq.provenance().builder, "params": seq.provenance().params},
        "exhaustion": exh.name(),
        "k": cif.k,
        "worst_defect": cif.worst.iter().map(rational_to_string).collect::<Vec<_>>(),
    });
    let summary = (1..cif.k.len())
        .map(|n| json!({"n": n, "k": cif.k[n], "worst_defect": rational_to_string(&cif.worst[n])}))
        .collect();
    let mut out = Outputs::default();
    out.json("cif.json", &j);
    Ok(Outcome::new(Verdict::Pass, summary, out))
}

/// Levels with at most this many elements are listed in full.
const LIST_LIMIT: usize = 4096;

fn folner_build(sc: &Scenario) -> Run {
    let seq = sc.sequence("sequence")?;
    let depth = sc.depth(4)?;
    let mut levels = Vec::new();
    let mut rows = Vec::new();
    for n in 0..=depth {
        let size = seq.size(n)?;
        let mut l = json!({"n": n, "size": size.to_string()});
        if let Some(p) = seq.progression(n) {
            l["progression"] = json!({"start": rational_to_string(&p.start), "step": rational_to_string(&p.step), "len": p.len.to_string()});
        }
        if size <= LIST_LIMIT.into() {
            l["elements"] = elements_to_json(seq.gen(n)?.iter());
        }
        rows.push(vec![n.to_string(), size.to_string()]);
        levels.push(l);
    }
    let flags = seq.flags();
    let j = json!({
        "kind": "folner_levels",
        "sequence": {"builder": seq.provenance().builder, "params": seq.provenance().params},
        "flags": {
            "folner": flags.folner,
            "locally_monotileable": flags.locally_monotileable,
            "congruent": flags.congruent,
            "exhaustive": flags.exhaustive,
        },
        "levels": levels,
    });
    let mut out = Outputs::default();
    out.json("levels.json", &j);
    out.csv("sizes.csv", &["n", "|F_n|"], &rows);
    let summary = rows.iter().map(|r| json!({"n": r[0], "size": r[1]})).collect();
    Ok(Outcome::new(Verdict::Pass, summary, out))
}

// --- entropy ----------------------------------------------------------------

/// Profile table; the residual column is the change of the value from the
/// previous level.
fn profile_rows(p: &EntropyProfile) -> Vec<Vec<String>> {
    let mut prev: Option<f64> = None;
    p.rows
        .iter()
        .map(|r| {
            let residual = prev.map_or(0.0, |q| r.value - q);
            prev = Some(r.value);
            vec![r.n.to_string(), r.f_size.to_string(), r.count.to_string(), fmt_float(r.value), fmt_float(residual)]
        })
        .collect()
}

fn profile_verdict(p: &EntropyProfile) -> Verdict {
    if let Some(s) = &p.stopped {
        return Verdict::Inconclusive(s.clone());
    }
    match p.first_increase() {
        Some(n) if p.certified => Verdict::Fail(format!(
            "value rises at n = {n} along a locally monotileable sequence ({} rows)",
            p.rows.len()
        )),
        _ => Verdict::Pass,
    }
}

fn profile_summary(i: usize, p: &EntropyProfile) -> Value {
    json!({
        "set": i,
        "non_increasing": p.non_increasing(),
        "certified": p.certified,
        "best": p.best().map(fmt_float),
        "rows": p.rows.len(),
        "stopped": p.stopped,
    })
}

fn entropy_profile_cmd(sc: &Scenario, jobs: usize) -> Run {
    let act = sc.action()?;
    let seq = sc.sequence("sequence")?;
    let depth = sc.depth(5)?;
    let sets: Vec<Value> = match (sc.get("sets"), sc.get("X")) {
        (Some(Value::Array(s)), _) => s.clone(),
        (Some(v), _) => return Err(CliError::Usage(format!("sets must be a list of sets, found {v}"))),
        (None, Some(x)) => vec![x.clone()],
        (None, None) => return Err(CliError::Usage("entropy profile needs \"sets\" or \"X\"".into())),
    };
    let xs = sets.iter().map(|s| target_set(&act, s, false)).collect::<Result<Vec<_>, _>>()?;
    let cap = sc.budgets.trajectory_cap;
    let profiles = par_map(jobs, &xs, |x| entropy_profile_with(&act, &seq, x, depth, cap));
    let mut out = Outputs::default();
    let mut verdict = Verdict::Pass;
    let mut summary = Vec::new();
    let mut all = Vec::new();
    for (i, p) in profiles.into_iter().enumerate() {
        let p = p?;
        out.csv(&format!("profile_{i}.csv"), &PROFILE_COLUMNS, &profile_rows(&p));
        verdict = verdict.and(profile_verdict(&p));
        summary.push(profile_summary(i, &p));
        all.push(p.to_json());
    }
    out.json("profiles.json", &json!({"kind": "entropy_profiles", "profiles": all}));
    Ok(Outcome::new(verdict, summary, out))
}

fn entropy_relative(sc: &Scenario) -> Run {
    let act = sc.action()?;
    let seq = sc.sequence("sequence")?;
    let depth = sc.depth(5)?;
    let x = target_set(&act, sc.require("X")?, false)?;
    let y = target_set(&act, sc.require("Y")?, false)?;
    let p = relative_profile(&act, &seq, &x, &y, depth)?;
    let mut out = Outputs::default();
    out.csv("relative.csv", &PROFILE_COLUMNS, &profile_rows(&p));
    out.json("relative.json", &p.to_json());
    Ok(Outcome::new(profile_verdict(&p), vec![profile_summary(0, &p)], out))
}

fn set_list(sc: &Scenario, one: &str, many: &str) -> Result<Vec<Value>, CliError> {
    match (sc.get(many), sc.get(one)) {
        (Some(Value::Array(s)), _) => Ok(s.clone()),
        (Some(v), _) => Err(CliError::Usage(format!("{many} must be a list of sets, found {v}"))),
        (None, Some(x)) => Ok(vec![x.clone()]),
        (None, None) => Err(CliError::Usage(format!("scenario needs {one:?} or {many:?}"))),
    }
}

fn entropy_addition(sc: &Scenario) -> Run {
    let act = sc.action()?;
    let seq = sc.sequence("sequence")?;
    let depth = sc.depth(5)?;
    let spec = match sc.get("subgroup") {
        Some(v) => SubgroupSpec::from_json(act.target(), v)?,
        None => SubgroupSpec::MultiplesOf(2),
    };
    let ind = induced_actions(&act, &spec)?;
    let xs = set_list(sc, "X", "xs")?.iter().map(|s| target_set(&act, s, false)).collect::<Result<Vec<_>, _>>()?;
    let ys = set_list(sc, "Y", "ys")?.iter().map(|s| target_set(&act, s, false)).collect::<Result<Vec<_>, _>>()?;
    let rep = addition_report(&ind, &xs, &ys, &seq, depth)?;
    let mut out = Outputs::default();
    let mut verdict = Verdict::Pass;
    let mut summary = Vec::new();
    for (i, c) in rep.cases.iter().enumerate() {
        let rows: Vec<Vec<String>> = c
            .rows
            .iter()
            .map(|r| {
                vec![r.n.to_string(), r.f_size.to_string(), r.whole.to_string(), fmt_float(r.value_whole), fmt_float(r.residual)]
            })
            .collect();
        out.csv(&format!("addition_{i}.csv"), &PROFILE_COLUMNS, &rows);
        if let Some(s) = &c.stopped {
            verdict = verdict.and(Verdict::Inconclusive(s.clone()));
        }
        if let Some(r) = c.rows.iter().find(|r| !r.superadditive) {
            verdict = verdict.and(Verdict::Fail(format!(
                "case {i}, n = {}: |T(Z+Y)| = {} < |T_B(Y)|·|T_A/B(πX)| = {}·{}",
                r.n, r.whole, r.sub, r.quotient
            )));
        }
        summary.push(json!({
            "case": i,
            "exact": c.exact(),
            "superadditive": c.superadditive(),
            "max_residual": fmt_float(c.rows.iter().map(|r| r.residual.abs()).fold(0.0, f64::max)),
            "stopped": c.stopped,
        }));
    }
    out.json("addition.json", &rep.to_json());
    Ok(Outcome::new(verdict, summary, out))
}

// --- constructions ----------------------------------------------------------

fn ext_options(sc: &Scenario, depth: usize) -> ExtensionOptions {
    ExtensionOptions {
        depth,
        horizon: sc.budgets.horizon,
        tile_budget: sc.budgets.node_budget,
        materialize_cap: sc.budgets.trajectory_cap.min(ExtensionOptions::default().materialize_cap),
    }
}

fn labelled(mut cert: Value, label: String) -> Value {
    cert["label"] = Value::String(label);
    cert
}

/// Every tiling inside the extension certificate as one checkable bundle.
fn extension_bundle(ext: &MonotileableExtension) -> Value {
    let mut certs = Vec::new();
    for l in &ext.levels {
        certs.push(labelled(l.k_bar.to_json(), format!("level {} K̄", l.n)));
        for r in &l.rows {
            certs.push(labelled(r.tiling.to_json(), format!("level {} row {}", l.n, r.f)));
        }
        if let Some(d) = &l.direct {
            certs.push(labelled(d.to_json(), format!("level {} listed", l.n)));
        }
    }
    json!({"kind": "bundle", "certificates": certs})
}

/// `defect(F̄_n, s)` for every sample and recorded level.
fn defect_table(
    depth: usize,
    samples: &[Element],
    defect: impl Fn(usize, &Element) -> entile_core::Result<BigRational>,
) -> Result<(Vec<Vec<String>>, Vec<Value>, Verdict), CliError> {
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let mut verdict = Verdict::Pass;
    for s in samples {
        let d: Vec<BigRational> = (0..=depth).map(|n| defect(n, s)).collect::<entile_core::Result<_>>()?;
        for (n, x) in d.iter().enumerate() {
            rows.push(vec![n.to_string(), element_to_json(s).to_string(), rational_to_string(x)]);
        }
        let strict = d.windows(2).all(|w| w[1] < w[0]);
        if let Some(n) = d.windows(2).position(|w| w[1] > w[0]) {
            verdict = verdict.and(Verdict::Fail(format!("defect along s = {s} rises at n = {}", n + 1)));
        }
        summary.push(json!({"s": element_to_json(s), "strictly_decreasing": strict, "last": d.last().map(rational_to_string)}));
    }
    Ok((rows, summary, verdict))
}

fn finish_extension(ext: &MonotileableExtension, samples: &[Element]) -> Run {
    ext.verify()?;
    let tr = &ext.trace;
    let mut out = Outputs::default();
    out.json("trace.json", &ext.to_json());
    let bundle = extension_bundle(ext);
    let mut verdict = recheck(&bundle, None, Verdict::Pass);
    out.json("certificates.json", &bundle);
    if let Some(local) = ext.local_cert() {
        let j = local.to_json();
        verdict = recheck(&j, Some(&ext.fbar), verdict);
        out.json("local_tiling.json", &j);
    }
    let mut summary: Vec<Value> = tr
        .levels
        .iter()
        .map(|l| {
            json!({
                "n": l.n, "m": l.m, "k": l.k, "size": l.size.to_string(),
                "disjoint_cosets": l.disjoint_cosets,
                "translates": if l.n == 0 { None } else { ext.translate_count(l.n).ok() },
            })
        })
        .collect();
    let (rows, defects, v) = defect_table(tr.depth(), samples, |n, s| tr.defect(n, s))?;
    out.csv("defects.csv", &["n", "s", "defect"], &rows);
    summary.extend(defects);
    Ok(Outcome::new(verdict.and(v), summary, out))
}

fn condition(sc: &Scenario) -> Result<Option<Condition>, CliError> {
    match sc.str_or("condition", "inn_monotileable")? {
        "inn_monotileable" => Ok(Some(Condition::InnMonotileable)),
        "centralizing" => Ok(Some(Condition::Centralizing)),
        "none" => Ok(None),
        other => Err(CliError::Usage(format!("unknown condition {other:?}"))),
    }
}

fn construct_extension(sc: &Scenario) -> Run {
    let q = quotient_from_json(sc.require("quotient")?)?;
    let e = sc.sequence("E")?;
    let f = sc.sequence("F")?;
    let g = q.group();
    let exh = sc.exhaustion(&g)?;
    let opts = ext_options(sc, sc.depth(3)?);
    let samples = sc.elements_or(&g, "samples", vec![])?;
    match condition(sc)? {
        Some(c) => finish_extension(&extension_monotileable(&e, &f, &q, &exh, c, &opts)?, &samples),
        None => {
            let tr = extension_folner(&e, &f, &q, &exh, &opts)?;
            tr.verify()?;
            let mut out = Outputs::default();
            out.json("trace.json", &tr.to_json());
            let (rows, summary, verdict) = defect_table(tr.depth(), &samples, |n, s| tr.defect(n, s))?;
            out.csv("defects.csv", &["n", "s", "defect"], &rows);
            Ok(Outcome::new(verdict, summary, out))
        }
    }
}

fn construct_finite_index(sc: &Scenario) -> Run {
    let q = quotient_from_json(sc.require("quotient")?)?;
    let e = sc.sequence("E")?;
    let g = q.group();
    let exh = sc.exhaustion(&g)?;
    let samples = sc.elements_or(&g, "samples", vec![])?;
    finish_extension(&finite_index_folner(&e, &q, &exh, &ext_options(sc, sc.depth(3)?))?, &samples)
}

fn construct_diagonal(sc: &Scenario) -> Run {
    let chain = DiagonalChain::from_json(sc.require("chain")?)?;
    let ctx = chain.ctx()?;
    let samples = sc.elements_or(&ctx, "samples", vec![])?;
    let d = diagonal_folner(&chain, sc.depth(3)?, sc.budgets.horizon, &samples)?;
    d.cert.verify(Some(&d.seq))?;
    let mut out = Outputs::default();
    out.json("diagonal.json", &d.to_json());
    let j = d.cert.to_json();
    let mut verdict = recheck(&j, Some(&d.seq), Verdict::Pass);
    out.json("local_tiling.json", &j);
    if let Some(c) = d.checks.iter().find(|c| !c.holds()) {
        verdict = verdict.and(Verdict::Fail(format!(
            "defect of {} rises from {} to {} at n = {}",
            c.g,
            rational_to_string(&c.lower),
            rational_to_string(&c.upper),
            c.n
        )));
    }
    let summary = d
        .sizes()
        .iter()
        .enumerate()
        .map(|(n, s)| json!({"n": n, "size": s.to_string()}))
        .chain(std::iter::once(json!({"defect_checks": d.checks.len()})))
        .collect();
    Ok(Outcome::new(verdict, summary, out))
}

fn construct_qsemidirect(sc: &Scenario) -> Run {
    let q = match sc.get("q") {
        Some(v) => rational_from_json(v)?,
        None => BigRational::from_integer(BigInt::from(2)),
    };
    let quot = QuotientSpec::SecondCoord { q: q.clone() };
    let e = build_folner(&BuilderSpec::PhiQ { q })?;
    let f = match sc.get("F") {
        Some(v) => sequence_from_json(v)?,
        None => build_folner(&BuilderSpec::Interval { a: ASequence::power(2), on_integers: true })?,
    };
    let g = quot.group();
    let exh = exhaustion_from_json(&g, sc.get("exhaustion"))?;
    let default = vec![
        Element::semi(1, 1, 0),
        Element::semi(0, 1, 1),
        Element::semi(1, 2, 0),
    ];
    let samples = sc.elements_or(&g, "samples", default)?;
    let opts = ext_options(sc, sc.depth(3)?);
    finish_extension(&extension_monotileable(&e, &f, &quot, &exh, Condition::InnMonotileable, &opts)?, &samples)
}

fn congruentize_cmd(sc: &Scenario) -> Run {
    let seq = sc.sequence("sequence")?;
    let key = if sc.get("enumeration").is_some() { "enumeration" } else { "exhaustion" };
    let exh: Exhaustion = exhaustion_from_json(seq.ctx(), sc.get(key))?;
    let depth = sc.depth(6)?;
    let c = congruentize(&seq, &exh, depth, sc.budgets.level_cap)?;
    c.verify(&seq)?;
    let mut out = Outputs::default();
    let j = c.to_json();
    let mut verdict = recheck(&j, Some(&seq), Verdict::Pass);
    out.json("congruentized.json", &j);
    let tc = c.tiling_cert().to_json();
    verdict = recheck(&tc, None, verdict);
    out.json("local_tiling.json", &tc);
    let summary = c
        .levels
        .iter()
        .map(|l| {
            json!({
                "n": l.n, "g": element_to_json(&c.enumeration[l.n]), "t": element_to_json(&l.t), "m": l.m,
                "size": l.h.len(), "tried": l.tried,
            })
        })
        .collect();
    Ok(Outcome::new(verdict, summary, out))
}
