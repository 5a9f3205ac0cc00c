//! `tmap` — orders, residue classes, densities, and scans for the map
//! `T(x) = ⌊x⌋·(1 + {x})` on rationals, with machine-readable output.
//!
//! Exit codes: 0 on success, 1 on usage or domain errors, 2 when an
//! internal cross-check fails (e.g. the two class enumerations disagree).

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::str::FromStr;
use tmap_core::arith::{totient, u64_pow, Rat};
use tmap_core::classes::{
    classify, count_prime_power, count_recurrence, enumerate_bruteforce, enumerate_recursive,
    ClassSet, CountTable,
};
use tmap_core::density::{density_report, empirical_density, DensityReport};
use tmap_core::dynamics::{orbit, order, OrderResult};
use tmap_core::search::{
    conjecture_scan, family_witness, mu_search, verify_all, ScanParams, VerifyConfig,
};
use tmap_core::Error;

const EXIT_OK: i32 = 0;
const EXIT_DOMAIN: i32 = 1;
const EXIT_CHECK_FAILED: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Brute,
    Recursive,
    Both,
}

#[derive(Parser, Debug)]
#[command(name = "tmap", version, about = "Rational dynamics of T(x) = floor(x)*(1 + frac(x))")]
struct Cli {
    /// Output format; json and csv are stable interfaces, text is for humans
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Worker threads for enumeration and scanning (default: all cores)
    #[arg(long, global = true, env = "TMAP_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Least n with T^n(a/M) an integer, up to a cap
    Order {
        a: String,
        m: String,
        #[arg(long, default_value_t = 1000, env = "TMAP_CAP")]
        cap: u64,
    },
    /// Every iterate of a/M with its step decomposition
    Orbit {
        a: String,
        m: String,
        #[arg(long, default_value_t = 1000, env = "TMAP_CAP")]
        cap: u64,
    },
    /// The residue classes modulo M^(n+1) of numerators with order exactly n
    Classes {
        n: u64,
        m: u64,
        #[arg(long, value_enum, default_value_t = Method::Recursive)]
        method: Method,
        #[arg(long, default_value_t = 1000, env = "TMAP_CAP")]
        cap: u64,
        /// Refuse enumerations with more residues than this
        #[arg(long, default_value_t = 10_000_000, env = "TMAP_BUDGET")]
        budget: u64,
    },
    /// The number A(n,M) of residue classes of order exactly n
    Count {
        n: u64,
        m: u64,
        /// Also evaluate the prime-power closed form (M must be p^s)
        #[arg(long)]
        closed_form: bool,
    },
    /// Exact density terms A(n,M)/phi(M^(n+1)) and their partial sum
    Density {
        m: u64,
        /// Sum the terms n = 0..=N
        #[arg(long, value_name = "N")]
        terms: u64,
        /// Also count observed orders over numerators up to N_MAX
        #[arg(long, value_name = "N_MAX")]
        empirical: Option<u64>,
        #[arg(long, default_value_t = 1000, env = "TMAP_CAP")]
        cap: u64,
    },
    /// Test whether a/M has order exactly n, by class membership
    Classify {
        a: String,
        m: u64,
        n: u64,
        #[arg(long, default_value_t = 10_000_000, env = "TMAP_BUDGET")]
        budget: u64,
    },
    /// The witness numerator M+1+M^n(M-1) of order exactly n
    Family { m: u64, n: u64 },
    /// Smallest numerator >= 2M coprime to M with order exactly n
    Mu {
        m: u64,
        n: u64,
        /// Stop scanning above this numerator (default: the family witness)
        #[arg(long)]
        limit: Option<String>,
        #[arg(long, default_value_t = 1000, env = "TMAP_CAP")]
        cap: u64,
    },
    /// Sweep orders over a numerator range, checkpointing cap exceeders
    Scan {
        #[arg(long = "M-lo")]
        m_lo: u64,
        #[arg(long = "M-hi")]
        m_hi: u64,
        #[arg(long = "a-hi")]
        a_hi: u64,
        #[arg(long, default_value_t = 1000, env = "TMAP_CAP")]
        cap: u64,
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Run every built-in cross-check and report pass/fail per check
    Verify,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_DOMAIN,
            };
            // Help goes to stdout, errors with usage go to stderr.
            e.print().expect("writing diagnostics");
            return code;
        }
    };

    if let Some(threads) = cli.threads {
        // A second initialization in-process is harmless; keep the first.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    match dispatch(cli.command, cli.format) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_DOMAIN
        }
    }
}

fn parse_big(text: &str, what: &str) -> Result<BigUint, Error> {
    BigUint::from_str(text.trim())
        .map_err(|_| Error::Domain(format!("{what} must be a non-negative integer, got {text:?}")))
}

fn parse_rat(a: &str, m: &str) -> Result<Rat, Error> {
    let a = parse_big(a, "numerator")?;
    let m = parse_big(m, "denominator")?;
    Rat::new(a, m)
}

fn dispatch(command: Command, format: Format) -> Result<i32, Error> {
    match command {
        Command::Order { a, m, cap } => cmd_order(&parse_rat(&a, &m)?, cap, format),
        Command::Orbit { a, m, cap } => cmd_orbit(&parse_rat(&a, &m)?, cap, format),
        Command::Classes {
            n,
            m,
            method,
            cap,
            budget,
        } => cmd_classes(n, m, method, cap, budget, format),
        Command::Count { n, m, closed_form } => cmd_count(n, m, closed_form, format),
        Command::Density {
            m,
            terms,
            empirical,
            cap,
        } => cmd_density(m, terms, empirical, cap, format),
        Command::Classify { a, m, n, budget } => {
            cmd_classify(&parse_big(&a, "numerator")?, m, n, budget, format)
        }
        Command::Family { m, n } => cmd_family(m, n, format),
        Command::Mu { m, n, limit, cap } => {
            let limit = limit
                .map(|text| parse_big(&text, "limit"))
                .transpose()?;
            cmd_mu(m, n, limit, cap, format)
        }
        Command::Scan {
            m_lo,
            m_hi,
            a_hi,
            cap,
            checkpoint,
        } => cmd_scan(
            ScanParams {
                m_lo,
                m_hi,
                a_hi,
                cap,
            },
            &checkpoint,
            format,
        ),
        Command::Verify => cmd_verify(format),
    }
}

fn print_json(value: &Value) {
    println!("{value}");
}

fn cmd_order(x: &Rat, cap: u64, format: Format) -> Result<i32, Error> {
    let result = order(x, cap)?;
    match format {
        Format::Json => match result {
            OrderResult::Finite(n) => print_json(&json!({ "order": n })),
            OrderResult::CapExceeded(c) => print_json(&json!({ "cap_exceeded": c })),
        },
        Format::Csv => {
            println!("a,M,cap,order");
            let n = result.finite().map(|n| n.to_string()).unwrap_or_default();
            println!("{},{},{cap},{n}", x.num(), x.den());
        }
        Format::Text => match result {
            OrderResult::Finite(n) => println!("order({x}) = {n}"),
            OrderResult::CapExceeded(c) => println!("order({x}) unresolved after {c} iterations"),
        },
    }
    Ok(EXIT_OK)
}

fn cmd_orbit(x: &Rat, cap: u64, format: Format) -> Result<i32, Error> {
    let trace = orbit(x, cap)?;
    match format {
        Format::Json => print_json(&serde_json::to_value(&trace)?),
        Format::Csv => {
            println!("step,q,r,h,new_den,image_num,image_den");
            for (i, s) in trace.steps.iter().enumerate() {
                println!(
                    "{},{},{},{},{},{},{}",
                    i + 1,
                    s.q,
                    s.r,
                    s.h,
                    s.new_den,
                    s.image.num(),
                    s.image.den()
                );
            }
        }
        Format::Text => {
            let mut line = format!("{}", trace.start);
            for s in &trace.steps {
                line.push_str(&format!(" -> {}", s.image));
            }
            println!("{line}");
            match trace.result {
                OrderResult::Finite(n) => println!("order = {n}"),
                OrderResult::CapExceeded(c) => println!("unresolved after {c} iterations"),
            }
        }
    }
    Ok(EXIT_OK)
}

fn class_set_value(set: &ClassSet) -> Result<Value, Error> {
    Ok(serde_json::to_value(set)?)
}

fn print_class_csv(set: &ClassSet) {
    println!("n,M,k");
    for k in &set.residues {
        println!("{},{},{k}", set.n, set.m);
    }
}

fn cmd_classes(
    n: u64,
    m: u64,
    method: Method,
    cap: u64,
    budget: u64,
    format: Format,
) -> Result<i32, Error> {
    let (set, agree) = match method {
        Method::Brute => (enumerate_bruteforce(n, m, cap, budget)?, None),
        Method::Recursive => (enumerate_recursive(n, m, budget)?, None),
        Method::Both => {
            let brute = enumerate_bruteforce(n, m, cap, budget)?;
            let recursive = enumerate_recursive(n, m, budget)?;
            let agree = brute == recursive;
            if !agree {
                // The tripwire: these must never differ.
                match format {
                    Format::Json => {
                        let mut value = class_set_value(&recursive)?;
                        value["agree"] = json!(false);
                        value["brute_residues"] = json!(brute.residues);
                        print_json(&value);
                    }
                    _ => {
                        eprintln!(
                            "MISMATCH n={n} M={m}: brute {:?} vs recursive {:?}",
                            brute.residues, recursive.residues
                        );
                    }
                }
                return Ok(EXIT_CHECK_FAILED);
            }
            (recursive, Some(true))
        }
    };
    match format {
        Format::Json => {
            let mut value = class_set_value(&set)?;
            if let Some(agree) = agree {
                value["agree"] = json!(agree);
            }
            print_json(&value);
        }
        Format::Csv => print_class_csv(&set),
        Format::Text => {
            println!(
                "R(n={}, M={}) mod {}: {} residues",
                set.n,
                set.m,
                set.modulus,
                set.residues.len()
            );
            let rendered: Vec<String> = set.residues.iter().map(|k| k.to_string()).collect();
            println!("{}", rendered.join(" "));
            if agree == Some(true) {
                println!("both enumerations agree");
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_count(n: u64, m: u64, closed_form: bool, format: Format) -> Result<i32, Error> {
    let count = count_recurrence(n, m);
    let closed = if closed_form {
        let factors = tmap_core::arith::factorize(m);
        let [(p, s)] = factors.as_slice() else {
            return Err(Error::Domain(format!(
                "--closed-form needs a prime power, and {m} is not one"
            )));
        };
        Some(count_prime_power(n, *p, *s as u64)?)
    } else {
        None
    };
    let agree = closed.as_ref().map(|c| *c == count);
    match format {
        Format::Json => {
            let mut value = json!({ "n": n, "M": m, "A": count.to_string() });
            if let Some(c) = &closed {
                value["closed_form"] = json!(c.to_string());
                value["agree"] = json!(agree.unwrap());
            }
            print_json(&value);
        }
        Format::Csv => {
            println!("n,M,A");
            println!("{n},{m},{count}");
        }
        Format::Text => {
            println!("A({n},{m}) = {count}");
            if let Some(c) = &closed {
                println!(
                    "closed form = {c} ({})",
                    if agree == Some(true) { "agrees" } else { "DISAGREES" }
                );
            }
        }
    }
    if agree == Some(false) {
        return Ok(EXIT_CHECK_FAILED);
    }
    Ok(EXIT_OK)
}

fn cmd_density(
    m: u64,
    terms: u64,
    empirical: Option<u64>,
    cap: u64,
    format: Format,
) -> Result<i32, Error> {
    let report: DensityReport = match empirical {
        None => density_report(m, terms),
        Some(n_max) => {
            let measured = empirical_density(m, n_max, cap)?;
            let top = measured.terms.last().map(|t| t.n).unwrap_or(0);
            let mut full = density_report(m, top.max(terms));
            full.empirical = measured.empirical;
            full
        }
    };
    match format {
        Format::Json => print_json(&serde_json::to_value(&report)?),
        Format::Csv => {
            let mut table = CountTable::new();
            let phi_m = totient(m)?;
            println!("n,A,phi,term_num,term_den,observed_count");
            for t in &report.terms {
                let a = table.count(t.n, m);
                let phi = u64_pow(m, t.n) * phi_m;
                let observed = report
                    .empirical
                    .as_ref()
                    .and_then(|e| e.per_order_counts.get(&t.n))
                    .map(|c| c.to_string())
                    .unwrap_or_default();
                println!(
                    "{},{a},{phi},{},{},{observed}",
                    t.n,
                    t.term.num(),
                    t.term.den()
                );
            }
        }
        Format::Text => {
            for t in &report.terms {
                let observed = report
                    .empirical
                    .as_ref()
                    .and_then(|e| e.per_order_counts.get(&t.n));
                match observed {
                    Some(c) => println!(
                        "n={:<3} predicted {} ≈ {}  observed {c}",
                        t.n,
                        t.term,
                        t.term.to_decimal(12)
                    ),
                    None => println!(
                        "n={:<3} predicted {} ≈ {}",
                        t.n,
                        t.term,
                        t.term.to_decimal(12)
                    ),
                }
            }
            println!(
                "partial sum = {} ≈ {}",
                report.partial_sum,
                report.partial_sum.to_decimal(12)
            );
            if let Some(e) = &report.empirical {
                println!(
                    "scanned a in [2M, {}] coprime to M: {} numerators, {} finite within cap {}, {} over cap",
                    e.n_max, e.counted_b, e.counted_finite, e.cap, e.cap_exceeded
                );
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_classify(a: &BigUint, m: u64, n: u64, budget: u64, format: Format) -> Result<i32, Error> {
    let member = classify(a, m, n, budget)?;
    match format {
        Format::Json => print_json(&json!({
            "a": a.to_string(), "M": m, "n": n, "order_is_n": member
        })),
        Format::Csv => {
            println!("a,M,n,order_is_n");
            println!("{a},{m},{n},{member}");
        }
        Format::Text => println!(
            "{a}/{m} {} order {n}",
            if member { "has" } else { "does not have" }
        ),
    }
    Ok(EXIT_OK)
}

fn cmd_family(m: u64, n: u64, format: Format) -> Result<i32, Error> {
    if m < 2 || n < 1 {
        return Err(Error::Domain(format!(
            "witnesses exist for M >= 2 and n >= 1, got M={m}, n={n}"
        )));
    }
    let witness = family_witness(m, n);
    // The construction guarantees the order; verify anyway, cheaply.
    let x = Rat::new(witness.clone(), BigUint::from(m))?;
    let verified = order(&x, n + 1)? == OrderResult::Finite(n);
    match format {
        Format::Json => print_json(&json!({
            "M": m, "n": n, "witness": witness.to_string(), "verified": verified
        })),
        Format::Csv => {
            println!("M,n,witness");
            println!("{m},{n},{witness}");
        }
        Format::Text => println!(
            "witness({m},{n}) = {witness} ({})",
            if verified { "order verified" } else { "ORDER MISMATCH" }
        ),
    }
    if !verified {
        return Ok(EXIT_CHECK_FAILED);
    }
    Ok(EXIT_OK)
}

fn cmd_mu(
    m: u64,
    n: u64,
    limit: Option<BigUint>,
    cap: u64,
    format: Format,
) -> Result<i32, Error> {
    let result = mu_search(m, n, limit, cap)?;
    match format {
        Format::Json => print_json(&serde_json::to_value(&result)?),
        Format::Csv => {
            println!("M,n,mu");
            match &result.outcome {
                tmap_core::search::MuOutcome::Found(entry) => {
                    println!("{},{},{}", entry.m, entry.n, entry.mu)
                }
                tmap_core::search::MuOutcome::NotFoundBelowLimit { .. } => {
                    println!("{m},{n},")
                }
            }
        }
        Format::Text => match &result.outcome {
            tmap_core::search::MuOutcome::Found(entry) => {
                println!("mu({m},{n}) = {}", entry.mu);
                if !result.cap_incidents.is_empty() {
                    println!(
                        "{} numerator(s) below it exceeded the cap and were skipped",
                        result.cap_incidents.len()
                    );
                }
            }
            tmap_core::search::MuOutcome::NotFoundBelowLimit { limit } => {
                println!("no numerator of order {n} at or below {limit}")
            }
        },
    }
    Ok(EXIT_OK)
}

fn cmd_scan(params: ScanParams, checkpoint: &std::path::Path, format: Format) -> Result<i32, Error> {
    let ckpt = conjecture_scan(&params, checkpoint)?;
    match format {
        Format::Json => println!("{}", ckpt.to_json()),
        Format::Csv => {
            println!("M,a,iterations,last_denominator");
            for e in &ckpt.exceeders {
                println!("{},{},{},{}", e.m, e.a, e.iterations, e.last_denominator);
            }
        }
        Format::Text => {
            println!(
                "scanned M in [{}, {}], a up to {}, cap {}",
                params.m_lo, params.m_hi, params.a_hi, params.cap
            );
            if ckpt.exceeders.is_empty() {
                println!("every order resolved within the cap");
            } else {
                println!(
                    "{} numerator(s) did not resolve within the cap (not a claim of infinite order):",
                    ckpt.exceeders.len()
                );
                for e in &ckpt.exceeders {
                    println!(
                        "  {}/{} after {} steps, last denominator {}",
                        e.a, e.m, e.iterations, e.last_denominator
                    );
                }
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_verify(format: Format) -> Result<i32, Error> {
    let report = verify_all(&VerifyConfig::default());
    match format {
        Format::Json => print_json(&serde_json::to_value(&report)?),
        Format::Csv => {
            println!("name,passed,cases,failures");
            for c in &report.checks {
                println!("{},{},{},{}", c.name, c.passed, c.cases, c.failures.len());
            }
        }
        Format::Text => {
            for c in &report.checks {
                if c.passed {
                    println!("PASS {} ({} cases)", c.name, c.cases);
                } else {
                    println!("FAIL {}: {}", c.name, c.failures.join("; "));
                }
            }
        }
    }
    if report.all_passed() {
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_CHECK_FAILED)
    }
}
