//! Subcommand handlers. Each returns the text to print.

use std::time::Instant;

use hallshuffle::cohp1::{HallElement, HallTensor, HeckeDirection, P1};
use hallshuffle::finmod::LocalHall;
use hallshuffle::shuffle::{self, ComponentId, Kernel, KernelFamily, ShuffleElement};
use hallshuffle::verify::{self, ReportFormat, Suite, SuiteConfig};
use hallshuffle::witt::{self, CurveData, GlobalCharacter, WittVector};
use hallshuffle::{LaurentPoly, ScalarMode};
use serde_json::{json, Value};

use crate::payload::{self as p};
use crate::{parse_window, CliError, Command, CurveArgs, FamilyArg, HallCmd, Settings, ShuffleCmd, WittCmd};

const DEFAULT_ORDER: usize = 12;

pub fn dispatch(cmd: &Command, s: &Settings) -> Result<String, CliError> {
    match cmd {
        Command::Zeta { curve, rational, euler } => zeta(curve, *rational, *euler, s),
        Command::Witt(w) => witt_cmd(w, s),
        Command::Hall(h) => hall_cmd(h, s),
        Command::Shuffle(c) => shuffle_cmd(c, s),
        Command::Verify { suite, length, max_rank, timing } => verify_cmd(suite, *length, *max_rank, *timing, s),
    }
}

fn json_out(v: Value) -> String {
    v.to_string()
}

/// Results with a text grammar print as text unless --json is given.
fn text_out(text: String, key: &str, s: &Settings) -> String {
    if s.json {
        json!({ key: text }).to_string()
    } else {
        text
    }
}

fn curve_of(c: &CurveArgs, s: &Settings) -> Result<(CurveData, ScalarMode), CliError> {
    let curve = match &c.curve {
        Some(arg) => p::curve(&p::read_payload(arg, "--curve")?, "--curve")?,
        None => {
            let numerator = match &c.numerator {
                Some(list) => list
                    .split(',')
                    .map(|x| x.trim().parse::<i64>().map_err(|_| CliError::input("--P", format!("bad coefficient `{x}`"))))
                    .collect::<Result<Vec<_>, _>>()?,
                None if c.g == 0 => vec![1],
                None => return Err(CliError::input("--P", "curves of positive genus need their zeta numerator")),
            };
            CurveData::new(s.q, c.g, numerator).map_err(|e| CliError::lib("--P", e))?
        }
    };
    let mode = match s.mode {
        ScalarMode::Numeric(_) => ScalarMode::Numeric(curve.q),
        m => m,
    };
    Ok((curve, mode))
}

fn inputs<'a>(xs: &'a [String], min: usize, what: &str) -> Result<Vec<(&'a String, String)>, CliError> {
    if xs.len() < min {
        return Err(CliError::input("inputs", format!("expected at least {min} {what} payloads, got {}", xs.len())));
    }
    Ok(xs.iter().enumerate().map(|(i, x)| (x, format!("input {}", i + 1))).collect())
}

// ----- zeta -----

fn zeta(c: &CurveArgs, rational: bool, euler: Option<usize>, s: &Settings) -> Result<String, CliError> {
    let (curve, mode) = curve_of(c, s)?;
    let n = s.trunc.unwrap_or(DEFAULT_ORDER);
    if rational {
        return Ok(text_out(curve.zeta_rational(mode, "t").to_string(), "zeta", s));
    }
    let series = match euler {
        Some(d) => curve.zeta_euler_product(d, n).map_err(|e| CliError::lib("--euler", e))?,
        None => curve.zeta_series(mode, n),
    };
    Ok(json_out(p::series_json(&series)))
}

// ----- witt -----

fn witt_inputs(xs: &[String], min: usize, s: &Settings) -> Result<Vec<WittVector>, CliError> {
    let ws = inputs(xs, min, "Witt vector")?
        .into_iter()
        .map(|(x, at)| p::witt(&p::read_payload(x, &at)?, s.mode, &at))
        .collect::<Result<Vec<_>, _>>()?;
    let n = s.trunc.unwrap_or_else(|| ws.iter().map(WittVector::trunc).min().unwrap_or(0));
    Ok(ws.into_iter().map(|w| w.retrunc(n)).collect())
}

fn witt_cmd(cmd: &WittCmd, s: &Settings) -> Result<String, CliError> {
    let lib = |e| CliError::lib("input", e);
    match cmd {
        WittCmd::Add { inputs } | WittCmd::Mul { inputs } => {
            let ws = witt_inputs(inputs, 2, s)?;
            let mut acc = ws[0].clone();
            for w in &ws[1..] {
                acc = match cmd {
                    WittCmd::Add { .. } => acc.boxplus(w),
                    _ => acc.boxtimes(w),
                }
                .map_err(lib)?;
            }
            Ok(json_out(p::witt_json(&acc)))
        }
        WittCmd::Star { input } => {
            let w = witt_inputs(std::slice::from_ref(input), 1, s)?.remove(0);
            Ok(json_out(p::witt_json(&w.star().map_err(lib)?)))
        }
        WittCmd::Euler { input } => {
            let w = witt_inputs(std::slice::from_ref(input), 1, s)?.remove(0);
            Ok(json_out(p::series_json(&w.euler_factor())))
        }
        WittCmd::Kappa { curve, degree, global } => {
            let n = s.trunc.unwrap_or(DEFAULT_ORDER);
            let (c, mode) = curve_of(curve, s)?;
            let k = if *global {
                c.kappa_global(mode, n).map_err(|e| CliError::lib("--global", e))?
            } else {
                if *degree == 0 {
                    return Err(CliError::input("--degree", "place degree must be positive"));
                }
                let qx = c.q.checked_pow(*degree).ok_or_else(|| CliError::input("--degree", "q^degree overflows"))?;
                witt::kappa_local(qx, n)
            };
            Ok(json_out(p::witt_json(&k)))
        }
        WittCmd::Lhom { curve, lambda, mu, closed } => {
            let (c, mode) = curve_of(curve, s)?;
            let l = p::scalar_str(lambda, mode, "--lambda")?;
            let m = p::scalar_str(mu, mode, "--mu")?;
            if *closed {
                let ratio = m.try_div(&l).map_err(|e| CliError::lib("--lambda", e))?;
                let rf = witt::lhom_closed(&c, mode, &LaurentPoly::constant(ratio), "t").map_err(|e| CliError::lib("--mu", e))?;
                return Ok(text_out(rf.to_string(), "lhom", s));
            }
            let n = s.trunc.unwrap_or(DEFAULT_ORDER);
            let series = witt::lhom_truncated(&c, mode, &GlobalCharacter::Twist { lambda: l }, &GlobalCharacter::Twist { lambda: m }, n)
                .map_err(|e| CliError::lib("--lambda", e))?;
            Ok(json_out(p::series_json(&series)))
        }
    }
}

// ----- hall -----

fn numeric_only(s: &Settings) -> Result<ScalarMode, CliError> {
    match s.mode {
        ScalarMode::Numeric(q) => Ok(ScalarMode::Numeric(q)),
        ScalarMode::Symbolic => Err(CliError::input("--mode", "Hall algebra commands count over a fixed field; use --mode numeric")),
    }
}

fn p1(s: &Settings) -> Result<P1, CliError> {
    numeric_only(s)?;
    P1::new(s.q).map_err(|e| CliError::lib("--q", e))
}

fn hall_elements(xs: &[String], min: usize, h: &P1) -> Result<Vec<HallElement>, CliError> {
    inputs(xs, min, "Hall element")?
        .into_iter()
        .map(|(x, at)| p::hall_element(&p::read_payload(x, &at)?, h.field(), h.mode(), &at))
        .collect()
}

fn hall_cmd(cmd: &HallCmd, s: &Settings) -> Result<String, CliError> {
    let lib = |e| CliError::lib("input", e);
    match cmd {
        HallCmd::TorsionMul { inputs: xs } => {
            let mode = numeric_only(s)?;
            let h = LocalHall::new(s.q).map_err(|e| CliError::lib("--q", e))?;
            let es = inputs(xs, 2, "local Hall element")?
                .into_iter()
                .map(|(x, at)| p::local_element(&p::read_payload(x, &at)?, mode, &at))
                .collect::<Result<Vec<_>, _>>()?;
            let mut acc = es[0].clone();
            for e in &es[1..] {
                acc = h.mul(&acc, e).map_err(lib)?;
            }
            Ok(json_out(p::local_element_json(&acc)))
        }
        HallCmd::P1Mul { inputs: xs } => {
            let h = p1(s)?;
            let es = hall_elements(xs, 2, &h)?;
            let mut acc = es[0].clone();
            for e in &es[1..] {
                acc = h.mul(&acc, e).map_err(lib)?;
            }
            Ok(json_out(p::hall_element_json(&acc)))
        }
        HallCmd::Comul { input, p1: on_p1, split } => {
            if !on_p1 {
                let mode = numeric_only(s)?;
                let h = LocalHall::new(s.q).map_err(|e| CliError::lib("--q", e))?;
                let e = p::local_element(&p::read_payload(input, "input")?, mode, "input")?;
                return Ok(json_out(p::local_tensor_json(&h.comul(&e).map_err(lib)?)));
            }
            let h = p1(s)?;
            let f = hall_elements(std::slice::from_ref(input), 1, &h)?.remove(0);
            let mut out = HallTensor::zero();
            let mut bundles = HallElement::zero();
            for (c, x) in f.terms() {
                if c.is_zero() {
                    out.add_term((c.clone(), c.clone()), x.clone());
                } else if c.is_bundle() {
                    bundles.add_term(c.clone(), x.clone());
                } else if c.is_torsion() {
                    out = out.add(&h.comult_torsion(&c.torsion).map_err(lib)?.scale(x));
                } else {
                    return Err(CliError::input(&format!("input[{c}]"), "mixed bundle+torsion classes are not supported by --p1 comul"));
                }
            }
            if !bundles.is_zero() {
                let sp = split.as_deref().ok_or_else(|| CliError::input("--split", "bundle terms need a rank split `r1,r2`"))?;
                let (a, b) = parse_window(sp, "--split")?;
                if a < 0 {
                    return Err(CliError::input("--split", "ranks must be non-negative"));
                }
                let w = s.window.unwrap_or((-3, 3));
                out = out.add(&h.comult_window(&bundles, (a as usize, b as usize), w).map_err(lib)?);
            }
            Ok(json_out(p::hall_tensor_json(&out)))
        }
        HallCmd::Hecke { input, torsion, dual } => {
            let h = p1(s)?;
            let t = p::torsion(&p::read_payload(torsion, "--torsion")?, h.field(), "--torsion")?;
            let f = hall_elements(std::slice::from_ref(input), 1, &h)?.remove(0);
            let dir = if *dual { HeckeDirection::Dual } else { HeckeDirection::T };
            Ok(json_out(p::hall_element_json(&h.hecke(&t, &f, dir).map_err(lib)?)))
        }
        HallCmd::Psi { lambda, sign } => {
            let h = p1(s)?;
            let l = p::scalar_str(lambda, h.mode(), "--lambda")?;
            let n = s.trunc.unwrap_or(2);
            let n = u32::try_from(n).map_err(|_| CliError::input("--trunc", "too large"))?;
            let coeffs = h.psi_series(&l, *sign, n).map_err(|e| CliError::lib("--trunc", e))?;
            Ok(json_out(json!({"trunc": n, "coefficients": coeffs.iter().map(p::hall_element_json).collect::<Vec<_>>()})))
        }
        HallCmd::MOp { input } => {
            let h = p1(s)?;
            let x = p::hall_tensor(&p::read_payload(input, "input")?, h.field(), h.mode(), "input")?;
            let n = u32::try_from(s.trunc.unwrap_or(2)).map_err(|_| CliError::input("--trunc", "too large"))?;
            Ok(json_out(p::hall_tensor_json(&h.m_operator(&x, n).map_err(lib)?)))
        }
    }
}

// ----- shuffle -----

fn kernel_of(kernel: &Option<String>, curve: &CurveArgs, family: KernelFamily, s: &Settings) -> Result<(Kernel, ScalarMode), CliError> {
    match kernel {
        Some(k) => Ok((p::kernel(&p::read_payload(k, "--kernel")?, s.mode, "--kernel")?, s.mode)),
        None => {
            let (c, mode) = curve_of(curve, s)?;
            Ok((shuffle::curve_kernels(&c, family, mode).map_err(|e| CliError::lib("--curve", e))?, mode))
        }
    }
}

fn shuffle_inputs(xs: &[String], min: usize, mode: ScalarMode) -> Result<Vec<ShuffleElement>, CliError> {
    inputs(xs, min, "shuffle element")?
        .into_iter()
        .map(|(x, at)| p::shuffle_element(&p::read_payload(x, &at)?, mode, &at))
        .collect()
}

fn shuffle_cmd(cmd: &ShuffleCmd, s: &Settings) -> Result<String, CliError> {
    let lib = |e| CliError::lib("input", e);
    match cmd {
        ShuffleCmd::Mul { inputs: xs, curve, kernel } => {
            let (k, mode) = kernel_of(kernel, curve, KernelFamily::Rank1, s)?;
            let es = shuffle_inputs(xs, 2, mode)?;
            Ok(json_out(p::shuffle_element_json(&shuffle::shuffle_product(&es, &k).map_err(lib)?)))
        }
        ShuffleCmd::SymMul { inputs: xs, curve, kernel, tilde } => {
            let (k, mode) = kernel_of(kernel, curve, KernelFamily::Rank1, s)?;
            let es = shuffle_inputs(xs, 2, mode)?;
            if es.len() != 2 {
                return Err(CliError::input("inputs", "sym-mul takes exactly two elements"));
            }
            Ok(json_out(p::shuffle_element_json(&shuffle::sym_shuffle_mul(&es[0], &es[1], &k, *tilde).map_err(lib)?)))
        }
        ShuffleCmd::Relations { input, curve, kernel, length, total } => {
            let (k, _) = kernel_of(kernel, curve, KernelFamily::Rank1, s)?;
            let gens: Vec<(ComponentId, i64)> = match input {
                Some(x) => p::generators(&p::read_payload(x, "input")?, "input")?,
                None => {
                    let (lo, hi) = s.window.unwrap_or((-1, 1));
                    (lo..=hi).map(|d| (0, d)).collect()
                }
            };
            if gens.is_empty() {
                return Err(CliError::input("input", "no generators"));
            }
            let tw = match total {
                Some(t) => parse_window(t, "--total")?,
                None => (i64::MIN, i64::MAX),
            };
            let rs = shuffle::relation_space(&gens, *length, tw, &k, 512).map_err(lib)?;
            let relations: Vec<Value> = rs.basis.iter().map(|r| Value::Array(r.iter().map(|x| Value::String(x.to_string())).collect())).collect();
            Ok(json_out(json!({
                "generators": gens.iter().map(|(c, d)| json!([c, d])).collect::<Vec<_>>(),
                "products": rs.words,
                "relations": relations,
                "dimension": {"products": rs.words.len(), "relations": rs.basis.len()},
            })))
        }
        ShuffleCmd::Kernel { curve, family, r, coboundary } => {
            let fam = match family {
                FamilyArg::Rank1 => KernelFamily::Rank1,
                FamilyArg::Elliptic => KernelFamily::Elliptic(*r),
            };
            let (k, _) = kernel_of(&None, curve, fam, s)?;
            Ok(json_out(p::kernel_json(&k, *coboundary)))
        }
    }
}

// ----- verify -----

fn verify_cmd(suite: &str, length: Option<usize>, max_rank: Option<usize>, timing: bool, s: &Settings) -> Result<String, CliError> {
    let suite = Suite::parse(suite).map_err(|e| CliError::input("suite", e.to_string()))?;
    let mut cfg = SuiteConfig::new(suite, s.q);
    if let Some(n) = s.trunc {
        cfg = cfg.with_trunc(n);
    }
    if let Some((lo, hi)) = s.window {
        cfg = cfg.with_window(lo, hi);
    }
    if let Some(n) = length {
        cfg = cfg.with_length(n);
    }
    if let Some(r) = max_rank {
        cfg = cfg.with_max_rank(r);
    }
    let t0 = Instant::now();
    let mut report = verify::run(&cfg).map_err(|e| CliError::lib("suite", e))?;
    if timing {
        report.elapsed_ms = Some(t0.elapsed().as_millis() as u64);
    }
    let text = report.render(if s.json { ReportFormat::Json } else { ReportFormat::Text });
    let text = text.trim_end().to_string();
    if report.passed() {
        Ok(text)
    } else {
        Err(CliError::Failed(text))
    }
}
