//! Command-line surface: thresholds and curves, the reduction pipeline on
//! instance files, verification suites, and exact point counts.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;

use bddkit::instance::{bdd_to_file, gapcvp_to_file, stbdd_to_file, InstanceFile};
use bddkit::lattice::{count, integer_lattice, BallQuery, Boundary};
use bddkit::matrix::{Basis, RatMat};
use bddkit::norm::{Magnitude, NormOrder};
use bddkit::numerics::{
    alpha_star, alt_upper_bound, alpha_upper_bound, mo_bound, RankRatio,
};
use bddkit::oracles::{brute_cvp, check_stbdd_yes, monte_carlo_success, verify_mo_bound_sweep};
use bddkit::rat::{format_rat, parse_rat, rat_to_f64};
use bddkit::reductions::{
    decide_cvp, direct_sum_transform, full_pipeline, Decision, GapCvpInstance, ReductionParams,
};
use bddkit::sparsify::PrimePolicy;
use bddkit::{Error, Result};

#[derive(Parser)]
#[command(name = "bddkit", about = "Lattice BDD reduction toolkit", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute the relative-distance threshold alpha*_{p,C}
    Alpha(AlphaArgs),
    /// Emit the (p, C) -> threshold curve as CSV
    Curve(CurveArgs),
    /// Run the GapCVP' -> BDD reduction on an instance file
    Reduce(ReduceArgs),
    /// Run verification suites against the brute-force oracles
    Verify(VerifyArgs),
    /// Count integer lattice points in an lp ball, with the analytic bound
    Count(CountArgs),
}

#[derive(Args)]
struct AlphaArgs {
    /// Norm order p (>= 1, "inf" not supported here)
    #[arg(long)]
    p: String,
    /// Rank ratio C (> 1, or "inf")
    #[arg(long, default_value = "inf")]
    c: String,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long, default_value_t = 1.1)]
    p_min: f64,
    #[arg(long, default_value_t = 10.0)]
    p_max: f64,
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    /// Comma-separated C values, e.g. "1.5,2,5,inf"
    #[arg(long, default_value = "1.5,2,5,inf")]
    c: String,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "2")]
    c: String,
    /// "auto" picks just above alpha*_{p,C}; otherwise a rational/decimal
    #[arg(long, default_value = "auto")]
    alpha: String,
    #[arg(long, default_value = "smallest")]
    policy: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// mo | sparsify | pipeline | all
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CountArgs {
    /// Only "zn" is supported
    #[arg(long, default_value = "zn")]
    lattice: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: String,
    /// Radius as a rational/decimal string
    #[arg(long)]
    r: String,
    /// origin | half (the all-halves deep hole)
    #[arg(long, default_value = "origin")]
    center: String,
    /// Open ball, excluding the zero vector (the S-count convention)
    #[arg(long, default_value_t = false)]
    open: bool,
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Constraint(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Alpha(a) => cmd_alpha(a),
        Cmd::Curve(a) => cmd_curve(a),
        Cmd::Reduce(a) => cmd_reduce(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Count(a) => cmd_count(a),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn cmd_alpha(a: AlphaArgs) -> Result<u8> {
    let p = NormOrder::parse(&a.p)?;
    let c = RankRatio::parse(&a.c)?;
    let r = alpha_star(&p, &c, a.tol)?;
    println!("{}", serde_json::to_string_pretty(&r)?);
    Ok(0)
}

fn cmd_curve(a: CurveArgs) -> Result<u8> {
    if a.p_min < 1.0 || a.p_max < a.p_min || a.step <= 0.0 {
        return Err(Error::Domain("need 1 <= p-min <= p-max and step > 0".into()));
    }
    let cs: Vec<RankRatio> = a
        .c
        .split(',')
        .map(RankRatio::parse)
        .collect::<Result<_>>()?;
    let mut w: csv::Writer<Box<dyn std::io::Write>> = match &a.out {
        Some(path) => csv::Writer::from_writer(Box::new(
            std::fs::File::create(path).map_err(Error::Io)?,
        )),
        None => csv::Writer::from_writer(Box::new(std::io::stdout())),
    };
    w.write_record(["p", "C", "alpha_star", "upper_bound", "alt_upper_bound"])
        .map_err(|e| Error::Domain(e.to_string()))?;
    // march p on an exact grid to avoid float accumulation
    let steps = ((a.p_max - a.p_min) / a.step).round() as u64;
    for i in 0..=steps {
        let pf = a.p_min + i as f64 * a.step;
        if pf > a.p_max + 1e-9 {
            break;
        }
        let p = NormOrder::parse(&format!("{}/{}", (pf * 10_000.0).round() as u64, 10_000))?;
        for c in &cs {
            let astar = alpha_star(&p, c, a.tol)?.value;
            let ub = alpha_upper_bound(&p, c)?;
            let alt = match alt_upper_bound(pf, c) {
                Ok(v) => format!("{v}"),
                Err(_) => "n/a".to_string(),
            };
            w.write_record([
                format!("{pf}"),
                c.to_string(),
                format!("{astar}"),
                format!("{ub}"),
                alt,
            ])
            .map_err(|e| Error::Domain(e.to_string()))?;
        }
    }
    w.flush()?;
    Ok(0)
}

fn parse_alpha(spec: &str, p: &NormOrder, c: &RankRatio) -> Result<BigRational> {
    if spec == "auto" {
        if p.is_infinity() {
            return parse_rat("1/2");
        }
        let r = alpha_star(p, c, 1e-9)?;
        let v = r.bracket_hi * 1.01;
        BigRational::from_float(v).ok_or_else(|| Error::Domain("non-finite alpha".into()))
    } else {
        parse_rat(spec)
    }
}

fn cmd_reduce(a: ReduceArgs) -> Result<u8> {
    let file = InstanceFile::load(&a.input)?;
    let inst = file.as_gapcvp()?;
    let c = if inst.p.is_infinity() {
        RankRatio::Finite(1.0)
    } else {
        RankRatio::parse(&a.c)?
    };
    let alpha = parse_alpha(&a.alpha, &inst.p, &c)?;
    let params = ReductionParams {
        p: inst.p.clone(),
        c,
        alpha,
        policy: PrimePolicy::parse(&a.policy)?,
        seed: a.seed,
    };
    let (bdd, trace) = full_pipeline(&inst, &params)?;
    let meta = serde_json::json!({
        "seed": a.seed,
        "n_prime": trace.n_prime,
        "n": trace.n,
        "pad_entry": format_rat(&trace.pad_entry),
        "draw": trace.draw,
    });
    let out_file = bdd_to_file(&bdd, Some(meta));
    match &a.out {
        Some(path) => out_file.save(path)?,
        None => println!("{}", out_file.to_json()?),
    }
    if let Some(path) = &a.trace {
        let st_json = match stbdd_to_file(&trace.st) {
            Ok(f) => serde_json::to_value(&f)?,
            Err(_) => serde_json::json!({ "r_approx": trace.st.r.approx() }),
        };
        let tr = serde_json::json!({
            "input": serde_json::to_value(gapcvp_to_file(&inst))?,
            "params": {
                "p": params.p.to_string(),
                "C": params.c.to_string(),
                "alpha": format_rat(&params.alpha),
                "policy": a.policy,
                "seed": a.seed,
            },
            "stbdd": st_json,
            "draw": trace.draw,
            "pad_entry": format_rat(&trace.pad_entry),
            "effective_alpha": format_rat(&trace.effective_alpha),
            "output": serde_json::to_value(&out_file)?,
        });
        std::fs::write(path, serde_json::to_string_pretty(&tr)? + "\n")?;
    }
    Ok(0)
}

fn verify_mo(report: &mut Vec<serde_json::Value>) -> Result<bool> {
    let ps: Vec<NormOrder> = ["1", "3/2", "2", "3", "5"]
        .iter()
        .map(|s| NormOrder::parse(s))
        .collect::<Result<_>>()?;
    let grid: Vec<BigRational> = (1..=8)
        .map(|i| BigRational::new(BigInt::from(i), BigInt::from(4)))
        .collect();
    match verify_mo_bound_sweep(&ps, 4, &grid) {
        Ok(rep) => {
            report.push(serde_json::json!({
                "suite": "mo", "passed": true,
                "cases": rep.cases, "max_ratio": rep.max_ratio,
            }));
            Ok(true)
        }
        Err(e) => {
            report.push(serde_json::json!({ "suite": "mo", "passed": false, "error": e.to_string() }));
            Ok(false)
        }
    }
}

/// The standard desk YES instance: rank-1 GapCVP' blown up to n = 4 so
/// T = 8, S = 0 at r = s_p / alpha with alpha = 6/5.
fn standard_yes_stbdd() -> Result<bddkit::reductions::StBddInstance> {
    let inst = GapCvpInstance {
        p: NormOrder::parse("2")?,
        basis: Basis::new(RatMat::from_rows(vec![vec![parse_rat("2")?]])?)?,
        target: vec![parse_rat("1")?],
    };
    direct_sum_transform(&inst, 4, &parse_rat("6/5")?, &RankRatio::Finite(4.0))
}

fn verify_sparsify(trials: u64, seed: u64, report: &mut Vec<serde_json::Value>) -> Result<bool> {
    let st = standard_yes_stbdd()?;
    if !check_stbdd_yes(&st, 0, st.meta.t_count)? {
        report.push(serde_json::json!({ "suite": "sparsify", "passed": false, "error": "test instance is not YES" }));
        return Ok(false);
    }
    let est = monte_carlo_success(&st, PrimePolicy::Smallest, trials, seed)?;
    let passed = est.wilson_lo >= 1.0 / 40.0;
    report.push(serde_json::json!({
        "suite": "sparsify", "passed": passed,
        "trials": est.trials, "successes": est.successes,
        "rate": est.rate, "wilson_lo": est.wilson_lo, "wilson_hi": est.wilson_hi,
        "floor": 0.025,
    }));
    Ok(passed)
}

fn verify_pipeline(seed: u64, report: &mut Vec<serde_json::Value>) -> Result<bool> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let p2 = NormOrder::parse("2")?;
    let mut false_positives = 0u64;
    let mut cases = 0u64;
    let solver = |bdd: &bddkit::reductions::BddInstance| {
        let (_, v) = brute_cvp(&bdd.basis, &bdd.target, &bdd.p).unwrap();
        v.point
    };
    for i in 0..40u64 {
        // random rank-1 NO instance: lattice gap 3k, target midway
        let k = BigInt::from(rng.gen_range(1i64..=3) * 3);
        let basis = Basis::new(RatMat::from_rows(vec![vec![BigRational::from_integer(k.clone())]])?)?;
        let target = vec![BigRational::new(k, BigInt::from(2))];
        let inst = GapCvpInstance { p: p2.clone(), basis, target };
        let params = ReductionParams {
            p: p2.clone(),
            c: RankRatio::Finite(4.0),
            // clears alpha*_{2,4} ~ 1.3034 and keeps r < 1 (so S = 0)
            alpha: parse_rat("27/20")?,
            policy: PrimePolicy::Smallest,
            seed: seed.wrapping_add(i),
        };
        cases += 1;
        if let Decision::Yes { .. } = decide_cvp(&inst, &params, solver, 3)? {
            false_positives += 1;
        }
    }
    // p = inf deterministic YES direction
    let mut inf_failures = 0u64;
    let pinf = NormOrder::parse("inf")?;
    for i in 0..20u64 {
        let k = rng.gen_range(1i64..=4) * 2;
        let basis = Basis::new(RatMat::from_rows(vec![vec![parse_rat(&k.to_string())?]])?)?;
        // B'x + noise of sup norm <= 1 for binary x: a certified YES
        let x = rng.gen_range(0i64..=1);
        let delta = BigRational::new(BigInt::from([-2i64, -1, 1, 2][rng.gen_range(0..4)]), BigInt::from(2));
        let target = vec![BigRational::from_integer(BigInt::from(x * k)) + delta];
        let inst = GapCvpInstance { p: pinf.clone(), basis, target };
        let params = ReductionParams {
            p: pinf.clone(),
            c: RankRatio::Finite(1.0),
            alpha: parse_rat("1/2")?,
            policy: PrimePolicy::Smallest,
            seed: i,
        };
        cases += 1;
        match decide_cvp(&inst, &params, solver, 1)? {
            Decision::Yes { .. } => {}
            Decision::NoOrUnlucky => inf_failures += 1,
        }
    }
    let passed = false_positives == 0 && inf_failures == 0;
    report.push(serde_json::json!({
        "suite": "pipeline", "passed": passed, "cases": cases,
        "false_positives": false_positives, "inf_failures": inf_failures,
    }));
    Ok(passed)
}

fn cmd_verify(a: VerifyArgs) -> Result<u8> {
    let mut report = Vec::new();
    let mut all = true;
    match a.suite.as_str() {
        "mo" => all &= verify_mo(&mut report)?,
        "sparsify" => all &= verify_sparsify(a.trials, a.seed, &mut report)?,
        "pipeline" => all &= verify_pipeline(a.seed, &mut report)?,
        "all" => {
            all &= verify_mo(&mut report)?;
            all &= verify_sparsify(a.trials, a.seed, &mut report)?;
            all &= verify_pipeline(a.seed, &mut report)?;
        }
        other => return Err(Error::Parse(format!("unknown suite {other:?}"))),
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::json!({ "passed": all, "checks": report }))?
    );
    Ok(if all { 0 } else { 1 })
}

fn cmd_count(a: CountArgs) -> Result<u8> {
    if a.lattice != "zn" {
        return Err(Error::Parse(format!("unsupported lattice {:?}", a.lattice)));
    }
    if a.n == 0 || a.n > 12 {
        return Err(Error::Domain("n must be in 1..=12".into()));
    }
    let p = NormOrder::parse(&a.p)?;
    let r = parse_rat(&a.r)?;
    let center: Vec<BigRational> = match a.center.as_str() {
        "origin" => vec![BigRational::from_integer(BigInt::from(0)); a.n],
        "half" => vec![BigRational::new(BigInt::from(1), BigInt::from(2)); a.n],
        other => return Err(Error::Parse(format!("unknown center {other:?}"))),
    };
    let q = BallQuery {
        p: p.clone(),
        radius: Magnitude::from_radius(&r, &p)?,
        center,
        boundary: if a.open { Boundary::Open } else { Boundary::Closed },
        exclude_zero: a.open,
    };
    let exact = count(&integer_lattice(a.n), &q)?;
    let bound = if p.is_infinity() {
        serde_json::Value::String("n/a".into())
    } else {
        serde_json::json!(mo_bound(&p, rat_to_f64(&r), a.n as u32)?)
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::json!({
            "count": exact, "mo_bound": bound,
        }))?
    );
    Ok(0)
}
