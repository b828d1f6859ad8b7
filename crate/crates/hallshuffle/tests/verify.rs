use hallshuffle::verify::*;
use hallshuffle::Error;

fn small(suite: Suite, q: u64) -> SuiteConfig {
    let cfg = SuiteConfig::new(suite, q);
    match suite {
        Suite::WittBihom => cfg.with_trunc(5),
        Suite::ConstantTerm => cfg.with_window(-2, 2),
        Suite::EisensteinFeq => cfg.with_window(-2, 2),
        Suite::PsiLemma => cfg.with_window(-2, 2).with_trunc(3),
        Suite::MainP1 => cfg.with_window(-1, 1).with_length(2),
        Suite::GreenCross => cfg.with_trunc(3),
        Suite::Regularity => cfg.with_length(2),
    }
}

fn assert_passes(cfg: SuiteConfig) -> SuiteReport {
    let r = run(&cfg).unwrap_or_else(|e| panic!("{} q={}: {e}", cfg.suite, cfg.q));
    assert!(r.passed(), "{r}");
    r
}

#[test]
fn every_suite_passes_small_at_q2() {
    for s in Suite::ALL {
        let r = assert_passes(small(s, 2));
        assert_eq!(r.suite, s);
        assert!(!r.checks.is_empty());
        assert!(r.checks.iter().all(|c| c.error.is_none()));
    }
}

#[test]
fn every_suite_passes_small_at_q3() {
    for s in Suite::ALL {
        assert_passes(small(s, 3));
    }
}

#[test]
fn every_suite_has_a_negative_control_that_breaks() {
    for s in Suite::ALL {
        let r = assert_passes(small(s, 2));
        let neg: Vec<&Check> = r.checks.iter().filter(|c| c.kind == CheckKind::NegativeControl).collect();
        assert!(!neg.is_empty(), "{s} has no negative control");
        for c in neg {
            assert!(!c.held, "{s}: {} held", c.name);
            assert!(c.witness.is_some(), "{s}: {} has no witness", c.name);
        }
    }
}

#[test]
fn positive_checks_compare_something() {
    for s in Suite::ALL {
        let r = assert_passes(small(s, 2));
        for c in r.checks.iter().filter(|c| c.kind == CheckKind::Positive) {
            assert!(c.held, "{s}: {}", c.name);
            assert!(c.witness.is_none());
        }
        assert!(r.checks.iter().map(|c| c.compared).sum::<usize>() > 0, "{s}");
    }
}

#[test]
fn calibrated_conventions_are_reported() {
    let r = assert_passes(small(Suite::ConstantTerm, 2));
    assert!(r.convention.iter().any(|c| c.contains("λ^(-d)")), "{:?}", r.convention);
    let r = assert_passes(small(Suite::MainP1, 2));
    assert!(r.convention.iter().any(|c| c.contains("t^d")), "{:?}", r.convention);
}

#[test]
fn suite_names_round_trip() {
    for s in Suite::ALL {
        assert_eq!(Suite::parse(s.name()).unwrap(), s);
        assert_eq!(Suite::parse(&s.name().replace('_', "-")).unwrap(), s);
        assert_eq!(s.to_string(), s.name());
    }
    assert!(matches!(Suite::parse("main"), Err(Error::Parse { .. })));
}

#[test]
fn guard_violations_are_errors() {
    let cases = [
        SuiteConfig::new(Suite::WittBihom, 4),
        SuiteConfig::new(Suite::WittBihom, 2).with_trunc(9),
        SuiteConfig::new(Suite::ConstantTerm, 5),
        SuiteConfig::new(Suite::ConstantTerm, 2).with_window(-4, 0),
        SuiteConfig::new(Suite::EisensteinFeq, 2).with_window(0, 5),
        SuiteConfig::new(Suite::MainP1, 2).with_length(4),
        SuiteConfig::new(Suite::GreenCross, 4),
        SuiteConfig::new(Suite::GreenCross, 2).with_trunc(5),
        SuiteConfig::new(Suite::Regularity, 2).with_length(4),
    ];
    for cfg in cases {
        match run(&cfg) {
            Err(Error::Guard { .. }) => {}
            other => panic!("{:?}: expected a guard error, got {:?}", cfg, other.map(|r| r.passed())),
        }
    }
}

#[test]
fn below_range_parameters_are_domain_errors() {
    let r = run(&SuiteConfig::new(Suite::WittBihom, 2).with_trunc(0));
    assert!(matches!(r, Err(Error::Domain(_))), "{r:?}");
}

#[test]
fn json_report_parses() {
    let mut r = assert_passes(small(Suite::EisensteinFeq, 2));
    r.elapsed_ms = Some(17);
    let v: serde_json::Value = serde_json::from_str(&r.render(ReportFormat::Json)).unwrap();
    assert_eq!(v["suite"], "eisenstein_feq");
    assert_eq!(v["q"], 2);
    assert_eq!(v["passed"], true);
    assert_eq!(v["elapsed_ms"], 17);
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), r.checks.len());
    for (j, c) in checks.iter().zip(&r.checks) {
        assert_eq!(j["name"], c.name.as_str());
        assert_eq!(j["passed"], c.passed());
        assert_eq!(j["compared"], c.compared);
    }
    assert!(checks.iter().any(|c| c["kind"] == "negative_control"));
}

#[test]
fn text_report_lists_checks() {
    let r = assert_passes(small(Suite::Regularity, 2));
    let text = r.render(ReportFormat::Text);
    assert!(text.starts_with("suite regularity (q=2): PASS"), "{text}");
    for c in &r.checks {
        assert!(text.contains(&c.name), "{text}");
    }
    assert!(text.contains("[negative control]"));
    assert!(!text.contains("elapsed"));
}

#[test]
fn failing_check_makes_report_fail() {
    let mut r = assert_passes(small(Suite::ConstantTerm, 2));
    let c = r.checks.iter_mut().find(|c| c.kind == CheckKind::Positive).unwrap();
    c.held = false;
    c.witness = Some(String::from("coefficient t1^0 t2^0"));
    assert!(!r.passed());
    assert!(r.to_string().contains("FAIL"));
    assert!(r.to_json().contains("\"passed\":false"));
}
