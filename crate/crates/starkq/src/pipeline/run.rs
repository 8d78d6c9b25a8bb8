//! Orchestration of Steps 1-12 for one bundle.

use std::collections::BTreeMap;
use std::time::Instant;

use rug::{Integer, Rational};

use super::bundle::{Bundle, BundleError, Context};
use super::report::*;
use crate::artin::{self, ArtinError, ArtinSystem};
use crate::burns;
use crate::groupalg::{AbelianGroup, QElem};
use crate::popescu;
use crate::stark::{self, BetaResult, LValueTable, StarkError};
use crate::sunits::SUnit;

pub const DEFAULT_PRECISION: u32 = 128;
pub const PRECISION_ENV: &str = "STARKQ_PRECISION";

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    /// Working precision in bits.
    pub precision: u32,
    /// Rerun once at doubled precision after a tolerance failure.
    pub escalate: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            precision: DEFAULT_PRECISION,
            escalate: true,
        }
    }
}

impl Config {
    pub fn with_precision(precision: u32) -> Self {
        Config {
            precision,
            ..Config::default()
        }
    }

    /// Default configuration with the precision taken from `STARKQ_PRECISION` when set.
    pub fn from_env() -> Self {
        let precision = std::env::var(PRECISION_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_PRECISION);
        Config::with_precision(precision)
    }
}

struct Stages {
    list: Vec<StageReport>,
    tolerance_failure: bool,
}

impl Stages {
    fn record(&mut self, steps: &str, name: &str, start: Instant, status: StageStatus, message: Option<String>) {
        self.list.push(StageReport {
            steps: steps.to_string(),
            name: name.to_string(),
            status,
            message,
            micros: start.elapsed().as_micros() as u64,
        });
    }

    fn skip(&mut self, steps: &str, name: &str, why: &str) {
        self.list.push(StageReport {
            steps: steps.to_string(),
            name: name.to_string(),
            status: StageStatus::Skipped,
            message: Some(why.to_string()),
            micros: 0,
        });
    }
}

fn is_tolerance_error(e: &StarkError) -> bool {
    matches!(
        e,
        StarkError::NonRealCoefficient(_)
            | StarkError::RecognitionFailed { .. }
            | StarkError::RegulatorVanishes(_)
            | StarkError::ConjugationAsymmetry(_)
    )
}

fn by_label(g: &AbelianGroup, v: impl IntoIterator<Item = String>) -> BTreeMap<String, String> {
    v.into_iter()
        .enumerate()
        .map(|(s, x)| (g.label(s).to_string(), x))
        .collect()
}

fn unit_report(place: &str, u: &SUnit) -> UnitReport {
    UnitReport {
        place: place.to_string(),
        sign: u.sign,
        exps: u.exps.iter().map(|e| e.to_string()).collect(),
    }
}

fn identity(b: &Bundle, ctx: Option<&Context>) -> BundleIdentity {
    BundleIdentity {
        name: b.name.clone(),
        base_field: b.metadata.base_field.clone(),
        disc_k: b.metadata.disc_k.clone(),
        disc_big_k: b.metadata.disc_big_k.clone(),
        conductor_norm: b.metadata.conductor_norm.clone(),
        galois_type: b.metadata.galois_type.clone(),
        class_number: b.metadata.class_number,
        rank: b.rank,
        group: ctx.map(|c| c.group.labels().to_vec()).unwrap_or_default(),
        group_invariants: ctx.map(|c| c.group.invariants().to_vec()).unwrap_or_default(),
        distinguished: b.places.distinguished.clone(),
    }
}

/// `w_K m^r`.
pub fn integrality_multiplier(w_k: u32, m: &Integer, r: usize) -> Integer {
    Integer::from(rug::ops::Pow::pow(m, r as u32)) * w_k
}

/// Bound on recognized denominators: twice the conjectural multiplier.
pub fn max_denominator(w_k: u32, m: &Integer, r: usize) -> Integer {
    integrality_multiplier(w_k, m, r) * 2u32
}

/// Builds the Artin system and runs every structural check on it.
pub fn artin_stage(ctx: &Context, normalize: bool) -> Result<(ArtinSystem, Vec<String>), ArtinError> {
    let sys = artin::build_artin_system(
        &ctx.lattice,
        &ctx.places,
        &ctx.group,
        ctx.supplied_betas.as_deref(),
        normalize,
    )?;
    let mut failures = artin::verify_artin_system(&sys, &ctx.lattice, &ctx.places, &ctx.group).failures;
    if let Some(expected) = &ctx.expected_eps {
        for (w, e) in expected {
            match ctx.lattice.to_field(&sys.eps[*w]) {
                Ok(x) if &x == e => {}
                Ok(_) => failures.push(format!(
                    "eps at `{}` differs from the bundle's value",
                    ctx.places.sk[*w].label
                )),
                Err(err) => failures.push(format!("eps at `{}`: {err}", ctx.places.sk[*w].label)),
            }
        }
    }
    Ok((sys, failures))
}

/// Steps 4-5: numerical beta e' from the L-value table and its recognition.
pub fn beta_stage(
    ctx: &Context,
    sys: &ArtinSystem,
    table: &LValueTable,
    prec: u32,
) -> Result<(BetaResult, Integer), StarkError> {
    let lv = table.resolve(&ctx.group, &ctx.chars, &ctx.places, prec + 32)?;
    let numeric = stark::beta_numeric(
        &ctx.rank.chars_rs_prime,
        &ctx.chars,
        &lv,
        sys,
        &ctx.lattice,
        &ctx.places,
        &ctx.group,
    )?;
    let max_den = max_denominator(ctx.w_k, &sys.index_m, ctx.rank.r);
    let bits = prec.min(table.precision_bits);
    Ok((stark::recognize_rationals(&numeric, &max_den, bits)?, max_den))
}

/// `beta_S(A)` over the whole character group, recognized with denominators
/// up to `2 w_K m^{|S|-1}`; None when some L-value is missing.
pub fn full_beta(
    ctx: &Context,
    sys: &ArtinSystem,
    table: &LValueTable,
    prec: u32,
) -> Option<Result<QElem, StarkError>> {
    if table.entries.len() < ctx.chars.len() {
        return None;
    }
    let all: Vec<usize> = (0..ctx.chars.len()).collect();
    let run = || {
        let lv = table.resolve(&ctx.group, &ctx.chars, &ctx.places, prec + 32)?;
        let numeric = stark::beta_numeric(&all, &ctx.chars, &lv, sys, &ctx.lattice, &ctx.places, &ctx.group)?;
        let max_den = max_denominator(ctx.w_k, &sys.index_m, ctx.places.n_s() - 1);
        Ok(stark::recognize_rationals(&numeric, &max_den, prec.min(table.precision_bits))?.exact)
    };
    Some(run())
}

/// One pass at a fixed precision; the flag reports a tolerance failure.
fn run_at(b: &Bundle, prec: u32, requested: u32) -> Result<(VerificationReport, bool), BundleError> {
    let mut st = Stages {
        list: Vec::new(),
        tolerance_failure: false,
    };
    let t0 = Instant::now();
    let ctx = b.validate(prec)?;
    st.record("1-2", "inputs", t0, StageStatus::Ok, None);
    let g = &ctx.group;
    let r = ctx.rank.r;
    let mut warnings = ctx.warnings.clone();
    let mut report = VerificationReport {
        schema_version: REPORT_VERSION,
        bundle: identity(b, Some(&ctx)),
        precision_bits: prec,
        requested_precision_bits: requested,
        artin: None,
        beta: None,
        index: None,
        functionals: None,
        stark_ok: None,
        popescu: None,
        burns: None,
        stages: Vec::new(),
        warnings: Vec::new(),
    };

    // Step 3
    let t = Instant::now();
    let sys = match artin_stage(&ctx, b.artin.normalize_alpha) {
        Ok((sys, failures)) => {
            let status = if failures.is_empty() {
                StageStatus::Ok
            } else {
                StageStatus::Failed
            };
            let msg = (!failures.is_empty()).then(|| failures.join("; "));
            st.record("3", "artin", t, status, msg);
            warnings.extend(sys.warnings.iter().cloned());
            report.artin = Some(ArtinReport {
                betas: ctx
                    .places
                    .distinguished
                    .iter()
                    .zip(&sys.betas)
                    .map(|(&w, u)| unit_report(&ctx.places.sk[w].label, u))
                    .collect(),
                beta_n0: sys.beta_n0.clone(),
                eps: ctx
                    .places
                    .sk
                    .iter()
                    .zip(&sys.eps)
                    .map(|(p, u)| unit_report(&p.label, u))
                    .collect(),
                relation: sys.relation.iter().map(|x| x.to_string()).collect(),
                alpha: sys.alpha.iter().map(|x| x.to_string()).collect(),
                m: sys.index_m.to_string(),
                check_failures: failures.clone(),
            });
            failures.is_empty().then_some(sys)
        }
        Err(e) => {
            if matches!(e, ArtinError::DominanceFailed { .. }) {
                st.tolerance_failure = true;
            }
            st.record("3", "artin", t, StageStatus::Failed, Some(e.to_string()));
            None
        }
    };
    let Some(sys) = sys else {
        for (steps, name) in [
            ("4", "beta"),
            ("5", "recognize"),
            ("6", "denominator"),
            ("7", "index"),
            ("8", "functionals"),
            ("9-11", "popescu"),
            ("12", "burns"),
        ] {
            st.skip(steps, name, "no valid Artin system");
        }
        report.stages = st.list;
        report.warnings = warnings;
        return Ok((report, st.tolerance_failure));
    };

    // Steps 4-5
    let mut beta: Option<BetaResult> = None;
    match &b.l_values {
        None => {
            let why = Some("bundle carries no L-value table".to_string());
            st.record("4", "beta", Instant::now(), StageStatus::Unavailable, why.clone());
            st.record("5", "recognize", Instant::now(), StageStatus::Unavailable, why);
        }
        Some(table) => {
            if table.precision_bits < prec {
                warnings.push(format!(
                    "L-value table carries {} bits, below the working precision {prec}",
                    table.precision_bits
                ));
            }
            let t = Instant::now();
            match beta_stage(&ctx, &sys, table, prec) {
                Ok((res, max_den)) => {
                    st.record("4", "beta", t, StageStatus::Ok, None);
                    st.record("5", "recognize", Instant::now(), StageStatus::Ok, None);
                    let digits = (prec as f64 * std::f64::consts::LOG10_2) as usize;
                    report.beta = Some(BetaReport {
                        numeric: by_label(
                            g,
                            res.numeric.coeffs.iter().map(|c| stark::to_decimal(c.real(), digits)),
                        ),
                        exact: by_label(g, res.exact.coeffs.iter().map(|c| c.to_string())),
                        d: res.d.to_string(),
                        max_denominator: max_den.to_string(),
                        full: match full_beta(&ctx, &sys, table, prec) {
                            Some(Ok(full)) => Some(by_label(g, full.coeffs.iter().map(|c| c.to_string()))),
                            Some(Err(e)) => {
                                warnings.push(format!("full beta_S(A) not recognized: {e}"));
                                None
                            }
                            None => None,
                        },
                        residual: format!("{:e}", res.residual),
                    });
                    beta = Some(res);
                }
                Err(e) => {
                    if is_tolerance_error(&e) {
                        st.tolerance_failure = true;
                    }
                    let (s4, s5) = match e {
                        StarkError::NonRealCoefficient(_) | StarkError::RecognitionFailed { .. } => {
                            (StageStatus::Ok, StageStatus::Failed)
                        }
                        _ => (StageStatus::Failed, StageStatus::Skipped),
                    };
                    st.record("4", "beta", t, s4, (s4 == StageStatus::Failed).then(|| e.to_string()));
                    st.record("5", "recognize", Instant::now(), s5, Some(e.to_string()));
                    report.stark_ok = Some(false);
                }
            }
        }
    }

    // Step 6
    let t = Instant::now();
    match &beta {
        Some(res) => st.record("6", "denominator", t, StageStatus::Ok, Some(format!("d = {}", res.d))),
        None => st.skip("6", "denominator", "beta e' unavailable"),
    }

    // Step 7
    let t = Instant::now();
    let m = sys.index_m.clone();
    let wm = Integer::from(&m * ctx.w_k);
    let wmr = integrality_multiplier(ctx.w_k, &m, r);
    report.index = Some(IndexReport {
        m: m.to_string(),
        d_divides_m: beta.as_ref().map(|res| m.is_divisible(&res.d)),
        d_divides_wm: beta.as_ref().map(|res| wm.is_divisible(&res.d)),
        d_divides_wm_r: beta.as_ref().map(|res| wmr.is_divisible(&res.d)),
    });
    if let Some(res) = &beta {
        if !wm.is_divisible(&res.d) {
            warnings.push(format!("finding: d = {} does not divide w_K m = {wm}", res.d));
        }
    }
    st.record("7", "index", t, StageStatus::Ok, Some(format!("m = {m}")));

    // Step 8
    let t = Instant::now();
    let phis = popescu::dual_functionals(&ctx.lattice, g);
    let bad: Vec<usize> = phis
        .iter()
        .filter(|p| !popescu::functional_is_equivariant(p, &ctx.lattice, g))
        .map(|p| p.index)
        .collect();
    report.functionals = Some(
        phis.iter()
            .map(|p| {
                p.rows
                    .iter()
                    .map(|r| r.iter().map(|x| x.to_string()).collect())
                    .collect()
            })
            .collect(),
    );
    if bad.is_empty() {
        st.record("8", "functionals", t, StageStatus::Ok, None);
    } else {
        st.record(
            "8",
            "functionals",
            t,
            StageStatus::Failed,
            Some(format!("functionals {bad:?} are not G-equivariant")),
        );
    }

    let Some(res) = beta else {
        st.skip("9-11", "popescu", "beta e' unavailable");
        st.skip("12", "burns", "beta e' unavailable");
        report.stages = st.list;
        report.warnings = warnings;
        return Ok((report, st.tolerance_failure));
    };
    let integral = res.exact.scale(&Rational::from(wmr.clone())).to_integer();
    report.stark_ok = Some(integral.is_some());

    // Steps 9-11
    let t = Instant::now();
    if bad.is_empty() {
        match popescu::popescu_verdict(&sys, &res.exact, &res.d, ctx.w_k, r, &ctx.lattice, &ctx.places, g) {
            Ok(v) => {
                let status = if v.overall {
                    StageStatus::Ok
                } else {
                    StageStatus::Failed
                };
                let msg = (!v.overall).then(|| format!("failing functionals {:?}", v.failing));
                st.record("9-11", "popescu", t, status, msg);
                report.popescu = Some(v);
            }
            Err(e) => st.record("9-11", "popescu", t, StageStatus::Failed, Some(e.to_string())),
        }
    } else {
        st.skip("9-11", "popescu", "dual functionals failed");
    }

    // Step 12
    let t = Instant::now();
    let verdict = burns::classify_statements(
        &res.exact,
        &res.d,
        &m,
        r as u32,
        ctx.w_k,
        &ctx.class_group,
        &ctx.class_group_s,
        g,
    );
    let status = if verdict.integral && verdict.statements[3] && verdict.twisted_ok {
        StageStatus::Ok
    } else {
        StageStatus::Failed
    };
    let msg = match verdict.lowest {
        Some(k) => format!("lowest passing statement {k}"),
        None => "no statement passes".to_string(),
    };
    st.record("12", "burns", t, status, Some(msg));
    let element = res.exact.scale(&Rational::from(wmr));
    report.burns = Some(BurnsReport {
        element: by_label(g, element.coeffs.iter().map(|c| c.to_string())),
        class_group: ctx.class_group.divisors.iter().map(|d| d.to_string()).collect(),
        s_class_group: ctx.class_group_s.divisors.iter().map(|d| d.to_string()).collect(),
        verdict,
    });
    report.stages = st.list;
    report.warnings = warnings;
    Ok((report, st.tolerance_failure))
}

/// Runs the whole pipeline; structural input errors are the only hard failures.
pub fn run_pipeline(b: &Bundle, cfg: &Config) -> Result<VerificationReport, BundleError> {
    let first = run_at(b, cfg.precision, cfg.precision);
    let retry = match &first {
        Ok((_, tol)) => *tol,
        Err(BundleError::Numeric(_)) => true,
        Err(_) => false,
    };
    if !(retry && cfg.escalate) {
        return first.map(|(r, _)| r);
    }
    let doubled = cfg.precision * 2;
    match run_at(b, doubled, cfg.precision) {
        Ok((mut r, tol)) => {
            let outcome = if tol { "still failing" } else { "succeeded" };
            r.warnings.push(format!(
                "tolerance failure at {} bits; rerun at {doubled} bits {outcome}",
                cfg.precision
            ));
            Ok(r)
        }
        Err(e) => match first {
            Ok((r, _)) => Ok(r),
            Err(_) => Err(e),
        },
    }
}

/// Builds an L-value table reproducing a known exact `beta e'`.
pub fn derive_lvalue_table(
    b: &Bundle,
    beta: &QElem,
    prec: u32,
    digits: usize,
    source: &str,
) -> Result<LValueTable, String> {
    let ctx = b.validate(prec).map_err(|e| e.to_string())?;
    if beta.coeffs.len() != ctx.group.order() {
        return Err(format!(
            "beta has {} coefficients, the group has order {}",
            beta.coeffs.len(),
            ctx.group.order()
        ));
    }
    let (sys, failures) = artin_stage(&ctx, b.artin.normalize_alpha).map_err(|e| e.to_string())?;
    if !failures.is_empty() {
        return Err(failures.join("; "));
    }
    stark::derive_lvalues(
        beta,
        &ctx.rank.chars_rs_prime,
        &ctx.chars,
        &sys,
        &ctx.lattice,
        &ctx.places,
        &ctx.group,
        digits,
        source,
    )
    .map_err(|e| e.to_string())
}

/// Parses coefficients "a,b,c" or "a,b,c/q" (common denominator) into a group-ring element.
pub fn parse_group_ring(src: &str) -> Result<QElem, String> {
    let (nums, den) = match src.rsplit_once('/') {
        Some((head, q)) if !head.contains('/') && head.contains(',') => {
            (head, q.trim().parse::<Integer>().map_err(|e| e.to_string())?)
        }
        _ => (src, Integer::from(1)),
    };
    if den == 0 {
        return Err("zero denominator".into());
    }
    nums.split(',')
        .map(|x| {
            x.trim()
                .parse::<Rational>()
                .map(|q| q / Rational::from(den.clone()))
                .map_err(|e| format!("`{x}`: {e}"))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(QElem::new)
}
