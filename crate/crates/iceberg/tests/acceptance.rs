//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Monte-Carlo budgets are scaled for a quick run by default. Set
//! `ICEBERG_FULL=1` for the full budgets and `ICEBERG_ACCEPTANCE_STRICT=1` to
//! exit non-zero when any criterion fails.

use iceberg::code::{LogicalAction, PauliKind, StabilizerCode};
use iceberg::decoder::{enumerate_fault_counts, DecoderTable};
use iceberg::experiments::*;
use iceberg::factory::{c422, catalog, catalog_entry, concat_iceberg_m1, concat_iceberg_m2};
use iceberg::gadgets::*;
use iceberg::stats::RatesReport;
use iceberg::synth::*;
use std::collections::HashMap;
use std::time::Instant;

const CODES: [&str; 8] = ["c422", "c642", "c1224", "c1644", "c2026", "c3246", "c3628", "c4848"];

struct Budget {
    full: bool,
}

impl Budget {
    fn pick(&self, quick: u64, full: u64) -> u64 {
        if self.full {
            full
        } else {
            quick
        }
    }
}

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn rates(kind: ExperimentKind, code: &str, p: Vec<f64>, shots: u64, seed: u64) -> Vec<RatesReport> {
    let mut s = ExperimentSpec::new(kind, code, p);
    s.shots = shots;
    s.seed = seed;
    match run(&s).expect("experiment runs") {
        ExperimentOutput::Rates(r) => r,
        _ => unreachable!("rate experiment"),
    }
}

fn exact_combinatorics() -> Outcome {
    let code = catalog("c3628").unwrap();
    let table = DecoderTable::build(&code, PauliKind::X, None).unwrap();
    let r = enumerate_fault_counts(&table, 5).unwrap();
    Outcome {
        name: "exact-combinatorics",
        pass: r.n_logical[5] == 54432 && r.n_reject[4] == 23544,
        detail: format!("n_logical[5]={} n_reject[4]={}", r.n_logical[5], r.n_reject[4]),
    }
}

fn budget_constants() -> Outcome {
    let got: Vec<f64> = [(0.01, 0.05), (0.01, 0.10), (0.01, 0.01)]
        .iter()
        .map(|&(l, a)| postselection_budget(l, a).unwrap().round())
        .collect();
    let want = [300.0, 230.0, 460.0];
    Outcome {
        name: "budget-constants",
        pass: got.iter().zip(want).all(|(g, w)| (g - w).abs() <= 1.0),
        detail: format!("{got:?}"),
    }
}

fn code_parameters() -> Outcome {
    let t = Instant::now();
    let mut bad = Vec::new();
    let mut seen = Vec::new();
    for name in CODES {
        let e = catalog_entry(name).unwrap();
        let (dx, dz) = e.code.css_distance().unwrap();
        let d = dx.min(dz);
        seen.push(format!("{name}:d={d}"));
        if (e.code.n, e.code.k, d) != e.expected {
            bad.push(name);
        }
    }
    Outcome {
        name: "code-parameters",
        pass: bad.is_empty(),
        detail: format!("{} in {:.1?}; mismatched {bad:?}", seen.join(" "), t.elapsed()),
    }
}

fn method_equivalence() -> Outcome {
    let same = |a: &StabilizerCode, b: &StabilizerCode| a.stabilizer_matrix().same_row_space(&b.stabilizer_matrix());
    let flat = same(&concat_iceberg_m1(&c422()).unwrap(), &concat_iceberg_m2(&c422()).unwrap());
    let tower = catalog("c1224").unwrap();
    let stacked = same(&concat_iceberg_m1(&tower).unwrap(), &concat_iceberg_m2(&tower).unwrap());
    Outcome {
        name: "method-equivalence",
        pass: flat && !stacked,
        detail: format!("outer c422 equal={flat}; c1224 tower equal={stacked}"),
    }
}

fn noiseless_gadgets() -> Outcome {
    let t = Instant::now();
    let mut checked = 0;
    let mut failed = Vec::new();
    let mut unsupported = 0;
    let mut note = |ok: bool, what: String| {
        checked += 1;
        if !ok {
            failed.push(what);
        }
    };
    for name in CODES {
        let src = source_for(name, None).unwrap();
        let code = src.code().clone();
        let k = code.k;
        for plus in [0, all_plus(k)] {
            let f = verified_fragment(&src, plus).unwrap();
            note(verify_preparation(&f, &code, plus).unwrap(), f.name.to_string());
        }
        let bell = bell_fragment(&src).unwrap();
        note(verify_preparation(&bell, &bell_code(&code).unwrap(), all_plus(k)).unwrap(), bell.name.clone());
        if code.n > 32 {
            continue;
        }
        let id = LogicalAction::identity(k);
        note(verify_action(&src, 1, |a, b| Ok(vec![a.steane_ec(&b[0])?]), &id).unwrap(), format!("{name} ec"));
        let tc = LogicalAction::transversal_cnot(k);
        note(
            verify_action(&src, 2, |a, b| {
                a.transversal_cnot(&b[0], &b[1]);
                Ok(b)
            }, &tc)
            .unwrap(),
            format!("{name} transversal"),
        );
        note(
            verify_action(&src, 2, |a, b| {
                let (x, y) = a.teleported_cnot(&b[0], &b[1])?;
                Ok(vec![x, y])
            }, &tc)
            .unwrap(),
            format!("{name} teleported"),
        );
        for c in 0..2 * k {
            for tg in (0..2 * k).filter(|&tg| tg != c) {
                let sched = match targeted_cnot_schedule(&code, c, tg) {
                    Ok(s) => s,
                    Err(_) => {
                        unsupported += 1;
                        continue;
                    }
                };
                let want = LogicalAction::cnot(2 * k, c, tg);
                let ok = verify_action(&src, 2, |a, b| Ok(a.apply_schedule(&sched, [b[0].clone(), b[1].clone()])?.to_vec()), &want)
                    .unwrap();
                note(ok, format!("{name} cnot {c}->{tg}"));
            }
        }
    }
    Outcome {
        name: "noiseless-gadgets",
        pass: failed.is_empty(),
        detail: format!(
            "{checked} identities checked in {:.1?}; {unsupported} intra-block targets have no permutation; failed {failed:?}",
            t.elapsed()
        ),
    }
}

/// Exact rates of a minimum-weight decoder with ambiguity rejection, over all
/// 2^n bit-flip patterns.
fn enumerated_rates(code: &StabilizerCode, p: f64) -> (f64, f64) {
    let n = code.n;
    let checks: Vec<u64> = code.checks(PauliKind::Z).rows().iter().map(|r| r.iter_ones().fold(0, |a, q| a | 1 << q)).collect();
    let logicals: Vec<u64> =
        code.logical_supports(PauliKind::Z).iter().map(|r| r.iter_ones().fold(0, |a, q| a | 1 << q)).collect();
    let parity = |rows: &[u64], e: u64| rows.iter().enumerate().fold(0u64, |a, (i, r)| a | (((r & e).count_ones() as u64) & 1) << i);
    let mut best: HashMap<u64, (u32, Option<u64>)> = HashMap::new();
    for e in 0u64..1 << n {
        let (s, c, w) = (parity(&checks, e), parity(&logicals, e), e.count_ones());
        let slot = best.entry(s).or_insert((u32::MAX, None));
        if w < slot.0 {
            *slot = (w, Some(c));
        } else if w == slot.0 && slot.1 != Some(c) {
            slot.1 = None;
        }
    }
    let (mut err, mut rej) = (0.0, 0.0);
    for e in 0u64..1 << n {
        let w = e.count_ones() as i32;
        let pe = p.powi(w) * (1.0 - p).powi(n as i32 - w);
        match best[&parity(&checks, e)].1 {
            None => rej += pe,
            Some(c) if c != parity(&logicals, e) => err += pe,
            _ => {}
        }
    }
    (err / (1.0 - rej), rej)
}

fn oracle_equivalence() -> Outcome {
    let shots = 1_000_000;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for name in ["c422", "c1224"] {
        let code = catalog(name).unwrap();
        let (table, _) = decoder_tables(&code).unwrap();
        for (i, p) in [0.01, 0.05, 0.1].into_iter().enumerate() {
            let (pl, pr) = enumerated_rates(&code, p);
            let r = iceberg::decoder::code_capacity_sample(&table, p, shots, 11 + i as u64).unwrap();
            let zr = (r.p_r - pr).abs() / (pr * (1.0 - pr) / shots as f64).sqrt().max(1e-12);
            let zl = (r.p_l - pl).abs() / (pl * (1.0 - pl) / r.accepted as f64).sqrt().max(1e-12);
            worst = worst.max(zr).max(zl);
            parts.push(format!("{name}@{p}: pL {:.4e}/{pl:.4e} pR {:.4e}/{pr:.4e}", r.p_l, r.p_r));
        }
    }
    Outcome {
        name: "oracle-equivalence",
        pass: worst <= 3.0,
        detail: format!("max |z|={worst:.2}; {}", parts.join("; ")),
    }
}

fn scaling_exponents(b: &Budget) -> Outcome {
    let shots = b.pick(1_000_000, 10_000_000);
    let ps = vec![2e-3, 3e-3, 4e-3];
    let r = rates(ExperimentKind::RepeatedEc, "c2026", ps.clone(), shots, 21);
    let sl = log_log_slope(&r.iter().map(|x| (x.p, x.p_l)).collect::<Vec<_>>()).unwrap_or(f64::NAN);
    let sr = log_log_slope(&r.iter().map(|x| (x.p, x.p_r)).collect::<Vec<_>>()).unwrap_or(f64::NAN);
    Outcome {
        name: "scaling-exponents",
        pass: (3.5..=4.5).contains(&sl) && (2.5..=3.5).contains(&sr),
        detail: format!(
            "slope pL={sl:.2} pR={sr:.2}; logical errors {:?}; {shots} shots per point",
            r.iter().map(|x| x.logical_errors).collect::<Vec<_>>()
        ),
    }
}

fn table_one(b: &Budget) -> (Outcome, RatesReport) {
    let shots = b.pick(2_000_000, 100_000_000);
    let program = repeated_ec_program(&source_for("c2026", None).unwrap(), 10).unwrap();
    let sampler = sampler_for(&program).unwrap();
    let t = Instant::now();
    let warm = sampler.sample(200_000, 1);
    let rate = warm.shots as f64 / t.elapsed().as_secs_f64();
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let workers = if cfg!(feature = "parallel") { cores } else { 1 };
    let per8 = rate / workers as f64 * 8.0;
    let r = rates(ExperimentKind::RepeatedEc, "c2026", vec![1e-3], shots, 31).remove(0);
    let in_range = (2e-7..=1e-5).contains(&r.p_l) && (2e-5..=4e-4).contains(&r.p_r);
    let out = Outcome {
        name: "table-one-magnitude",
        pass: in_range && per8 >= 3e5,
        detail: format!(
            "pL={:.3e} [{:.2e},{:.2e}] pR={:.3e} over {} rounds; {rate:.0} shots/s on {workers} worker(s), {per8:.0} scaled to 8",
            r.p_l,
            r.p_l_low,
            r.p_l_high,
            r.p_r,
            r.shots * r.rounds as u64
        ),
    };
    (out, r)
}

fn ratio_bounds(b: &Budget) -> Outcome {
    let shots = b.pick(400_000, 4_000_000);
    let ec = rates(ExperimentKind::RepeatedEc, "c2026", vec![2e-3], shots, 41).remove(0);
    let tr = rates(ExperimentKind::TransversalCnot, "c2026", vec![2e-3], shots, 42).remove(0);
    let te = rates(ExperimentKind::TeleportedCnot, "c2026", vec![2e-3], shots, 43).remove(0);
    let (rr, rl) = (tr.p_r / ec.p_r, tr.p_l / ec.p_l);
    Outcome {
        name: "cnot-ratio-bounds",
        pass: rr > 1.8 && rl > 4.0 && te.p_r <= tr.p_r,
        detail: format!(
            "transversal/EC pR x{rr:.2} pL x{rl:.2}; teleported pR={:.3e} transversal pR={:.3e}",
            te.p_r, tr.p_r
        ),
    }
}

fn factory_direction() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for name in ["c3628", "c4848"] {
        let one = factory_overhead(name, 4e-3, FactoryMode::OneStage, 0, 20_000, 51).unwrap();
        let two = factory_overhead(name, 4e-3, FactoryMode::TwoStage, 0, 20_000, 52).unwrap();
        let saving = 1.0 - two.expected_cnots / one.expected_cnots;
        pass &= saving >= 0.15;
        parts.push(format!(
            "{name}: one-stage {:.0} two-stage {:.0} CNOTs, saving {:.1}%",
            one.expected_cnots,
            two.expected_cnots,
            100.0 * saving
        ));
    }
    Outcome { name: "two-stage-direction", pass, detail: parts.join("; ") }
}

fn budget_sanity(b: &Budget, c2026: &RatesReport) -> Outcome {
    let shots = b.pick(3_000_000, 30_000_000);
    let r = rates(ExperimentKind::RepeatedEc, "c3628", vec![1e-3], shots, 61).remove(0);
    let ratio = |x: &RatesReport| if x.logical_errors == 0 { f64::INFINITY } else { x.p_r / x.p_l };
    let (a, c) = (ratio(c2026), ratio(&r));
    Outcome {
        name: "budget-sanity",
        pass: a < 300.0 && c < 300.0,
        detail: format!(
            "c2026 pR/pL={a:.0}; c3628 pR/pL={c:.0} (pR={:.3e}, {} logical errors in {} rounds, pL upper {:.2e})",
            r.p_r,
            r.logical_errors,
            r.shots * r.rounds as u64,
            r.p_l_high
        ),
    }
}

fn fault_injection() -> Outcome {
    let t = Instant::now();
    let mut frags = 0;
    let mut order1_bad = Vec::new();
    let mut order2_zero = Vec::new();
    let mut skipped = Vec::new();
    let mut judge = |f: &Fragment, code: &StabilizerCode, plus: u32, d: usize| {
        if d < 4 {
            skipped.push(f.name.clone());
            return;
        }
        let Ok(j) = ResidualJudge::new(code, plus, false) else {
            skipped.push(f.name.clone());
            return;
        };
        let r = inject_with(&f.circuit, &(0..code.n).collect::<Vec<_>>(), &j, true).unwrap();
        frags += 1;
        if r.order1_bad > 0 {
            order1_bad.push(format!("{}:{}", f.name, r.order1_bad));
        }
        if r.order2_bad == 0 {
            order2_zero.push(f.name.clone());
        }
    };
    for name in CODES {
        let d = catalog_entry(name).unwrap().expected.2;
        let mut sources = vec![Source::one_stage(name).unwrap()];
        sources.extend(Source::two_stage(name));
        for src in sources {
            let code = src.code().clone();
            for plus in [0, all_plus(code.k)] {
                judge(&verified_fragment(&src, plus).unwrap(), &code, plus, d);
            }
            if 2 * code.n <= 64 {
                judge(&bell_fragment(&src).unwrap(), &bell_code(&code).unwrap(), all_plus(code.k), d);
            }
        }
    }
    Outcome {
        name: "fault-injection",
        pass: frags > 0 && order1_bad.is_empty() && order2_zero.is_empty(),
        detail: format!(
            "{frags} circuits in {:.1?}; order-1 bad {order1_bad:?}; order-2 clean {order2_zero:?}; not judged {skipped:?}",
            t.elapsed()
        ),
    }
}

fn main() {
    let b = Budget { full: std::env::var("ICEBERG_FULL").is_ok_and(|v| v == "1") };
    let strict = std::env::var("ICEBERG_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    println!("acceptance ({} budgets)", if b.full { "full" } else { "quick" });
    let report = |o: Outcome| {
        println!("{} {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail);
        o.pass
    };
    let mut all = true;
    all &= report(exact_combinatorics());
    all &= report(budget_constants());
    all &= report(code_parameters());
    all &= report(method_equivalence());
    all &= report(noiseless_gadgets());
    all &= report(oracle_equivalence());
    all &= report(scaling_exponents(&b));
    let (t1, c2026) = table_one(&b);
    all &= report(t1);
    all &= report(ratio_bounds(&b));
    all &= report(factory_direction());
    all &= report(budget_sanity(&b, &c2026));
    all &= report(fault_injection());
    if strict && !all {
        std::process::exit(1);
    }
}
