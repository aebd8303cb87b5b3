//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spt2_core::dissect::{dissect, reassemble, DissectionSpec};
use spt2_core::fixture::{builtin_fixtures, negative_controls, run_all, table_bound};
use spt2_core::spt::{count_overpartitions, spt2_enum, Oracle, Spt2Table};
use spt2_core::verify::{
    doubling_families, prior_claims, scan, single_progression_claims, verify_claim,
    verify_doubling_step, verify_family, verify_induction_step, verify_prime_family, ClaimId,
    CongruenceClaim, PrimeFamilyClaim,
};
use spt2_core::{CoeffRing, IntSeries, ResidueSeries};

const SEED: u64 = 0x5eed_2025;
const TABLE_N: usize = 10_000;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Table large enough for both the 10 000 bound and every fixture.
fn big_table() -> &'static Spt2Table {
    static T: OnceLock<Spt2Table> = OnceLock::new();
    T.get_or_init(|| {
        let fixtures = table_bound(&builtin_fixtures(), None).unwrap_or(0);
        Spt2Table::by_genfunc(TABLE_N.max(fixtures))
    })
}

fn table_10k() -> &'static Spt2Table {
    static T: OnceLock<Spt2Table> = OnceLock::new();
    T.get_or_init(|| big_table().truncated(TABLE_N).unwrap())
}

fn worked_example() -> Check {
    let by_enum = spt2_enum(4).map_err(|e| e.to_string())?;
    let by_gf = Spt2Table::by_genfunc(4);
    let count = count_overpartitions(4).map_err(|e| e.to_string())?;
    ensure(by_enum == 3, || format!("enumeration gives spt2(4) = {by_enum}"))?;
    ensure(*by_gf.get(4).unwrap() == BigInt::from(3), || {
        format!("generating function gives spt2(4) = {}", by_gf.get(4).unwrap())
    })?;
    ensure(count == 14, || format!("{count} overpartitions of 4"))?;
    Ok("spt2(4) = 3 by both oracles; 14 overpartitions of 4".into())
}

fn oracle_equivalence() -> Check {
    let e = Spt2Table::by_enumeration(40).map_err(|e| e.to_string())?;
    let g = Spt2Table::by_genfunc(40);
    ensure(e.oracle() == Oracle::Enumeration, || "wrong oracle tag".into())?;
    for n in 0..=40 {
        ensure(e.get(n) == g.get(n), || {
            format!("n = {n}: {} vs {}", e.get(n).unwrap(), g.get(n).unwrap())
        })?;
    }
    Ok("enumeration and generating function agree for 0 <= n <= 40".into())
}

fn claims_pass(claims: &[CongruenceClaim], t: &Spt2Table) -> Result<usize, String> {
    let mut witnesses = 0;
    for c in claims {
        let r = verify_claim(c, t).map_err(|e| e.to_string())?;
        ensure(r.passed(), || format!("({}, {}) mod {}: {:?}", c.a, c.b, c.modulus, r.violations))?;
        witnesses += r.witnesses_checked;
    }
    Ok(witnesses)
}

fn prior_congruences() -> Check {
    let t = Spt2Table::by_genfunc(3000);
    let claims = prior_claims(3000);
    ensure(claims.len() == 6, || "expected six prior claims".into())?;
    let w = claims_pass(&claims, &t)?;
    Ok(format!("3n, 3n+1 (mod 3), 5n+3 (mod 5), 8n+3, 16n+14, 32n+28 (mod 4) to 3000; {w} values"))
}

fn single_progressions() -> Check {
    let claims = single_progression_claims(50);
    let largest = claims.iter().map(|c| c.largest_argument()).max().unwrap();
    ensure(largest == 4066, || format!("largest argument {largest}"))?;
    let w = claims_pass(&claims, table_10k())?;
    Ok(format!("36n+30, 48n+34, 64n+56, 72n+42, 80n+34, 80n+66 for n <= 50; {w} values"))
}

fn families() -> Check {
    let t = table_10k();
    let fams = doubling_families(3, 10);
    let mut cells = 0;
    for f in &fams {
        let r = verify_family(f, t).map_err(|e| e.to_string())?;
        ensure(r.passed(), || format!("family {} fails", f.name))?;
        cells += r.cells.len();
    }
    let five = fams.iter().find(|f| (f.step, f.offset) == (80, 66)).unwrap();
    ensure(
        five.instance(0) == CongruenceClaim::new(80, 66, 4, 10).unwrap(),
        || "80n+66 family does not reduce to its base claim at j = 0".into(),
    )?;
    for f in &fams {
        for j in 0..3 {
            let r = verify_doubling_step(f, j, t).map_err(|e| e.to_string())?;
            ensure(r.status.passed(), || format!("doubling step {} j = {j} fails", f.name))?;
        }
    }
    let mut replay_errors = Vec::new();
    for f in &fams {
        for j in 0..3 {
            match verify_induction_step(f, j, t) {
                Ok(r) if r.status.passed() => {}
                Ok(_) => replay_errors.push(format!("{} j = {j}: congruence legs fail", f.name)),
                Err(e) => replay_errors.push(e.to_string()),
            }
        }
    }
    let summary = format!(
        "families j <= 3, n <= 10 pass ({cells} cells); doubling steps pass for j <= 2"
    );
    if replay_errors.is_empty() {
        Ok(format!("{summary}; induction replay passes"))
    } else {
        Err(format!(
            "{summary}; induction replay fails in {} of 18 cases, first: {}",
            replay_errors.len(),
            replay_errors[0]
        ))
    }
}

fn prime_families() -> Check {
    let mut instances = 0;
    for p in [5, 7, 13] {
        let f = PrimeFamilyClaim::new(p, 0, 10).map_err(|e| e.to_string())?;
        let r = verify_prime_family(&f, table_10k()).map_err(|e| e.to_string())?;
        for i in &r.instances {
            ensure(i.value_mod_m == 0, || format!("p = {p}, m = {}: spt2 = {} mod 4", i.m, i.value_mod_m))?;
            ensure(!i.representable, || format!("p = {p}, m = {}: {} = x^2 + 2y^2", i.m, i.form_value))?;
            ensure(i.valuation % 2 == 1, || format!("p = {p}, m = {}: even valuation", i.m))?;
        }
        ensure(r.passed(), || format!("p = {p} fails"))?;
        instances += r.instances.len();
    }
    Ok(format!("p in {{5, 7, 13}}, k = 0, m <= 10: {instances} instances, mechanism confirmed"))
}

fn identity_suite() -> Check {
    let good = builtin_fixtures();
    let required = [
        "lemma1",
        "lemma1-reciprocal",
        "lemma2",
        "lemma2-quotient",
        "lemma2-product",
        "lemma3",
        "lemma4",
        "lemma5",
        "lemma6",
        "phi-even-odd",
        "phi-square",
    ];
    for name in required {
        let f = good.iter().find(|f| f.name == name).ok_or(format!("missing {name}"))?;
        ensure(f.modulus == 0 && f.order >= 300, || format!("{name} is not exact to 300"))?;
    }
    let endpoints = [
        "spt2-4n2", "spt2-8n2", "spt2-16n2", "spt2-32n24", "spt2-36n30", "spt2-48n34",
        "spt2-64n56", "spt2-72n42", "spt2-80n34", "spt2-80n66", "spt2-internal",
    ];
    for name in endpoints {
        ensure(good.iter().any(|f| f.name == name), || format!("missing {name}"))?;
    }
    let t = big_table();
    let reports = run_all(&good, None, Some(t)).map_err(|e| e.to_string())?;
    for r in &reports {
        ensure(r.outcome.passed(), || format!("{} fails: {:?}", r.name, r.outcome))?;
    }
    for f in good.iter().filter(|f| f.modulus != 0) {
        let r = reports.iter().find(|r| r.name == f.name).unwrap();
        ensure(r.outcome.coefficients_compared >= 150, || {
            format!("{} compares only {}", f.name, r.outcome.coefficients_compared)
        })?;
    }
    let bad = negative_controls();
    for r in run_all(&bad, None, Some(t)).map_err(|e| e.to_string())? {
        ensure(!r.outcome.passed(), || format!("negative control {} passes", r.name))?;
    }
    let exact = good.iter().filter(|f| f.modulus == 0).count();
    Ok(format!(
        "{exact} exact identities to 300, {} mod-4 pipelines with >= 150 coefficients, {} negative controls fail",
        good.len() - exact,
        bad.len()
    ))
}

/// `spt2(n) = 0 (mod 4)` exactly when `n mod 12` is listed.
fn constructed_table(zero_mod_12: &[usize], n_max: usize) -> Spt2Table {
    let values = (0..=n_max)
        .map(|n| BigInt::from(u8::from(n != 0 && !zero_mod_12.contains(&(n % 12)))))
        .collect();
    Spt2Table::from_values(values, Oracle::Genfunc).unwrap()
}

fn scanner() -> Check {
    let hits = scan(4, 80, 100, table_10k()).map_err(|e| e.to_string())?;
    let expected = [
        (36, 30), (48, 34), (64, 56), (72, 42), (80, 34), (80, 66),
        (8, 3), (16, 14), (32, 28),
    ];
    for (a, b) in expected {
        ensure(hits.iter().any(|h| (h.claim.a, h.claim.b) == (a, b)), || {
            format!("scan misses ({a}, {b})")
        })?;
    }
    for h in &hits {
        if let Some(s) = h.subsumed_by {
            ensure(
                h.claim.a % s.a == 0 && h.claim.b % s.a == s.b && hits.iter().any(|x| x.claim == s),
                || format!("bad subsumption flag on {:?}", h.claim),
            )?;
        }
    }
    let find = |a, b| hits.iter().find(|h| (h.claim.a, h.claim.b) == (a, b)).unwrap();
    ensure(find(32, 28).subsumed_by.is_none(), || "(32, 28) wrongly flagged".into())?;

    let t = constructed_table(&[2, 3, 6, 10], 1200);
    let c = scan(4, 24, 50, &t).map_err(|e| e.to_string())?;
    let id = |a, b| ClaimId { a, b, modulus: 4 };
    let flag = |a, b| c.iter().find(|h| h.claim == id(a, b)).map(|h| h.subsumed_by);
    ensure(flag(4, 2) == Some(None), || "(4, 2) should be a minimal hit".into())?;
    ensure(flag(12, 3) == Some(None), || "(12, 3) should be a minimal hit".into())?;
    ensure(flag(8, 6) == Some(Some(id(4, 2))), || "(8, 6) not flagged by (4, 2)".into())?;
    ensure(flag(24, 15) == Some(Some(id(12, 3))), || "(24, 15) not flagged by (12, 3)".into())?;
    ensure(flag(6, 3).is_none(), || "(6, 3) is not a congruence".into())?;
    let minimal = c.iter().filter(|h| h.subsumed_by.is_none()).count();
    ensure(minimal == 2, || format!("{minimal} unflagged hits on constructed table"))?;
    Ok(format!(
        "{} progressions found ({} unflagged), all nine expected present; constructed flags correct",
        hits.len(),
        hits.iter().filter(|h| h.subsumed_by.is_none()).count()
    ))
}

const ORDER: usize = 64;
const CASES: usize = 1000;

fn random_ring(rng: &mut ChaCha8Rng) -> u64 {
    match rng.gen_range(0..4) {
        0 => 4,
        1 => rng.gen_range(2..1000),
        2 => rng.gen_range(2..u64::MAX / 2),
        _ => u64::MAX - rng.gen_range(0..1000),
    }
}

fn random_exact(rng: &mut ChaCha8Rng) -> IntSeries {
    let values: Vec<i64> = (0..ORDER).map(|_| rng.gen_range(-1_000_000..=1_000_000)).collect();
    IntSeries::from_i64s(CoeffRing::INTEGERS, &values)
}

fn random_residue(rng: &mut ChaCha8Rng, m: u64) -> ResidueSeries {
    let values: Vec<BigInt> = (0..ORDER).map(|_| BigInt::from(rng.gen_range(0..m))).collect();
    ResidueSeries::from_bigints(CoeffRing::modulo(m), &values)
}

fn series_properties() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let fail = |what: &str, case: usize| format!("{what} fails on case {case}");

    for case in 0..CASES {
        let m = random_ring(&mut rng);
        let (a, b, c) = (
            random_residue(&mut rng, m),
            random_residue(&mut rng, m),
            random_residue(&mut rng, m),
        );
        let zero = ResidueSeries::zero(a.ring(), ORDER);
        let one = ResidueSeries::one(a.ring(), ORDER);
        let ab = a.mul(&b).unwrap();
        ensure(a.add(&b).unwrap().add(&c).unwrap() == a.add(&b.add(&c).unwrap()).unwrap(), || fail("additive associativity", case))?;
        ensure(a.add(&b).unwrap() == b.add(&a).unwrap(), || fail("additive commutativity", case))?;
        ensure(ab == b.mul(&a).unwrap(), || fail("multiplicative commutativity", case))?;
        ensure(ab.mul(&c).unwrap() == a.mul(&b.mul(&c).unwrap()).unwrap(), || fail("multiplicative associativity", case))?;
        ensure(a.mul(&b.add(&c).unwrap()).unwrap() == ab.add(&a.mul(&c).unwrap()).unwrap(), || fail("distributivity", case))?;
        ensure(a.add(&zero).unwrap() == a && a.mul(&one).unwrap() == a, || fail("identities", case))?;
        ensure(a.sub(&a).unwrap().is_zero() && a.add(&a.neg()).unwrap().is_zero(), || fail("additive inverse", case))?;
    }

    for case in 0..CASES {
        if case % 2 == 0 {
            let mut v = random_exact(&mut rng).into_coeffs();
            v[0] = BigInt::from(if rng.gen_bool(0.5) { 1 } else { -1 });
            let s = IntSeries::from_coeffs(CoeffRing::INTEGERS, v);
            let inv = s.invert().map_err(|e| e.to_string())?;
            ensure(s.mul(&inv).unwrap() == IntSeries::one(s.ring(), ORDER), || fail("exact inversion", case))?;
        } else {
            let m = random_ring(&mut rng);
            let mut v: Vec<BigInt> = random_residue(&mut rng, m).coeffs().iter().map(|&x| BigInt::from(x)).collect();
            v[0] = loop {
                let c0 = BigInt::from(rng.gen_range(1..m));
                if c0.gcd(&BigInt::from(m)) == BigInt::from(1) {
                    break c0;
                }
            };
            let r = ResidueSeries::from_bigints(CoeffRing::modulo(m), &v);
            let inv = r.invert().map_err(|e| e.to_string())?;
            ensure(r.mul(&inv).unwrap() == ResidueSeries::one(r.ring(), ORDER), || fail("residue inversion", case))?;
        }
    }

    for case in 0..CASES {
        let a = random_exact(&mut rng);
        let m = rng.gen_range(2..=4);
        let parts: Vec<IntSeries> = (0..m)
            .map(|r| dissect(&a, DissectionSpec::new(m, r).unwrap()))
            .collect();
        ensure(reassemble(&parts, m).map_err(|e| e.to_string())? == a, || fail("dissect/reassemble", case))?;
    }

    for case in 0..CASES {
        let m = random_ring(&mut rng);
        let (a, b) = (random_exact(&mut rng), random_exact(&mut rng));
        let red = |s: &IntSeries| s.reduce_into::<u64>(m).unwrap();
        ensure(red(&a.mul(&b).unwrap()) == red(&a).mul(&red(&b)).unwrap(), || fail("product reduction", case))?;
        ensure(red(&a.add(&b).unwrap()) == red(&a).add(&red(&b)).unwrap(), || fail("sum reduction", case))?;
        let big = a.reduce_mod(m).unwrap();
        let via_big: ResidueSeries = big.reduce_into(m).unwrap();
        ensure(via_big == red(&a), || fail("coefficient type change", case))?;
        let mut unit = a.into_coeffs();
        unit[0] = BigInt::from(1);
        let u = IntSeries::from_coeffs(CoeffRing::INTEGERS, unit);
        ensure(red(&u.invert().unwrap()) == red(&u).invert().unwrap(), || fail("inverse reduction", case))?;
    }
    Ok(format!("{CASES} cases each of ring laws, inversion, dissect/reassemble, reduction at order {ORDER}, seed {SEED:#x}"))
}

struct Criterion {
    number: u32,
    title: &'static str,
    budget: Duration,
    run: fn() -> Check,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { number: 1, title: "worked example", budget: Duration::from_secs(1), run: worked_example },
        Criterion { number: 2, title: "oracle equivalence", budget: Duration::from_secs(30), run: oracle_equivalence },
        Criterion { number: 3, title: "prior congruences", budget: Duration::from_secs(60), run: prior_congruences },
        Criterion { number: 4, title: "single progressions", budget: Duration::from_secs(600), run: single_progressions },
        Criterion { number: 5, title: "families in 2^j", budget: Duration::from_secs(600), run: families },
        Criterion { number: 6, title: "prime families", budget: Duration::from_secs(600), run: prime_families },
        Criterion { number: 7, title: "identity suite", budget: Duration::from_secs(120), run: identity_suite },
        Criterion { number: 8, title: "scanner regression", budget: Duration::from_secs(600), run: scanner },
        Criterion { number: 9, title: "series-core properties", budget: Duration::from_secs(60), run: series_properties },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.run))
            .unwrap_or_else(|p| {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                Err(format!("panicked: {msg}"))
            });
        let elapsed = start.elapsed();
        let result = match result {
            Ok(_) if elapsed > c.budget => Err(format!("took {elapsed:.1?}, budget {:?}", c.budget)),
            r => r,
        };
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        if result.is_err() {
            failed += 1;
        }
        println!("criterion {} {tag} [{elapsed:.2?}] {}: {detail}", c.number, c.title);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
