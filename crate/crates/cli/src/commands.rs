use std::fs;
use std::io::{self, Read, Write};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use fairdiv::algorithms::{solve, SolveOptions};
use fairdiv::envy::{build_envy_ratio_graph, Weight};
use fairdiv::model::fairness_factor;
use fairdiv::oracle::{oracle_best_factor, oracle_envy_rank, oracle_improving_cycle, oracle_nsw_matching, OracleLimits};
use fairdiv::rational::to_f64;
use fairdiv::{Allocation, Factor, FairnessNotion, FairnessReport, Instance, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::files::{parse_allocation, parse_instance, AllocationFile, InstanceFile};
use crate::generate::GenSpec;
use crate::trace::render_trace;
use crate::{BenchArgs, GenArgs, OracleArgs, OracleCheck, SolveArgs, VerifyArgs, EXIT_FAILED};

const STDIO: &str = "-";

fn read_text(path: &str) -> Result<String> {
    if path == STDIO {
        let mut text = String::new();
        io::stdin().read_to_string(&mut text).context("reading standard input")?;
        Ok(text)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {path}"))
    }
}

fn write_text(path: &str, text: &str, out: &mut dyn Write) -> Result<()> {
    if path == STDIO {
        out.write_all(text.as_bytes()).context("writing standard output")
    } else {
        fs::write(path, text).with_context(|| format!("writing {path}"))
    }
}

fn load_instance(path: &str) -> Result<Instance> {
    let text = read_text(path)?;
    parse_instance(&text).with_context(|| format!("invalid instance file {path}"))
}

fn load_allocation(path: &str, instance: &Instance) -> Result<Allocation> {
    let text = read_text(path)?;
    parse_allocation(&text, instance).with_context(|| format!("invalid allocation file {path}"))
}

fn decimal(value: &Rational) -> String {
    format!("{:.6}", to_f64(value))
}

fn factor_text(factor: &Factor) -> String {
    match factor {
        Factor::Finite(v) => format!("{v} ({})", decimal(v)),
        Factor::Unbounded => "unbounded".into(),
    }
}

fn weight_text(weight: &Weight) -> String {
    match weight.as_finite() {
        Some(v) => format!("{v} ({})", decimal(v)),
        None if weight.is_infinite() => "unbounded".into(),
        None => weight.to_string(),
    }
}

fn report_lines(report: &FairnessReport) -> String {
    let witness = match report.witness {
        Some((i, j)) => format!("{i} -> {j}"),
        None => "none".into(),
    };
    format!("{} factor: {}\nwitness: {witness}\n", report.notion, factor_text(&report.factor))
}

pub fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> Result<u8> {
    if args.output == STDIO && args.trace.as_deref() == Some(STDIO) {
        bail!("--output and --trace cannot both be standard output");
    }
    let instance = load_instance(&args.input)?;
    let mode = args.algorithm.mode();
    let options = SolveOptions {
        check_invariants: args.check.is_on(),
    };
    let solution = solve(&instance, mode, options).context("solver failed")?;

    write_text(&args.output, &AllocationFile::from_allocation(&solution.allocation).render(), out)?;
    if let Some(path) = &args.trace {
        write_text(path, &render_trace(&solution.trace), out)?;
    }

    let guarantee = mode.guarantee();
    let checks = solution.trace.invariant_checks().count();
    let mut report = format!("allocation: {}\n", solution.allocation);
    report += &report_lines(&solution.report);
    report += &format!("guarantee: {guarantee} ({:.6}) met\n", guarantee.approx());
    if options.check_invariants {
        report += &format!("invariant checks: {checks} passed\n");
    }
    if args.output == STDIO || args.trace.as_deref() == Some(STDIO) {
        eprint!("{report}");
    } else {
        out.write_all(report.as_bytes())?;
    }
    Ok(0)
}

pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<u8> {
    if args.input == STDIO && args.allocation == STDIO {
        bail!("--input and --allocation cannot both be standard input");
    }
    let instance = load_instance(&args.input)?;
    let allocation = load_allocation(&args.allocation, &instance)?;
    let report = fairness_factor(&instance, &allocation, args.notion.into())?;
    let met = report.factor.meets(&args.threshold);
    write!(
        out,
        "{}threshold: {} ({:.6})\nresult: {}\n",
        report_lines(&report),
        args.threshold,
        args.threshold.approx(),
        if met { "pass" } else { "fail" }
    )?;
    Ok(if met { 0 } else { EXIT_FAILED })
}

pub fn cmd_gen(args: &GenArgs, out: &mut dyn Write) -> Result<u8> {
    let spec = GenSpec {
        agents: args.agents,
        items: args.items,
        lo: args.lo,
        hi: args.hi,
        zero_probability: args.zero_probability.clone(),
        seed: args.seed,
    };
    let instance = spec.generate(args.solver_bound).context("invalid generator settings")?;
    write_text(&args.output, &InstanceFile::from_instance(&instance, Some(spec)).render(), out)?;
    Ok(0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchFailure {
    pub index: usize,
    pub spec: GenSpec,
    pub reason: String,
}

/// Machine-readable bench results; exact factors are kept for callers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchSummary {
    pub algorithm: String,
    pub guarantee: String,
    pub count: usize,
    pub min_factor: Option<String>,
    pub min_factor_decimal: Option<f64>,
    pub mean_factor_decimal: Option<f64>,
    pub max_factor: Option<String>,
    pub max_factor_decimal: Option<f64>,
    pub unbounded: usize,
    pub invariant_checks: usize,
    pub violations: usize,
    pub failures: Vec<BenchFailure>,
    pub elapsed_seconds: f64,
    #[serde(skip)]
    pub factors: Vec<Factor>,
}

impl BenchSummary {
    pub fn exit_code(&self) -> u8 {
        if self.violations == 0 {
            0
        } else {
            EXIT_FAILED
        }
    }
}

/// The seeded instance specs a bench run solves, in order.
pub fn bench_specs(args: &BenchArgs) -> Result<Vec<GenSpec>> {
    let (agents, items) = (args.agents_range, args.items_range);
    if agents.lo == 0 {
        bail!("--agents-range must start at 1 or more");
    }
    if items.hi < agents.hi {
        bail!("--items-range {items} cannot give every agent count in {agents} an item each");
    }
    if args.zero_probability.is_empty() {
        bail!("--zero-probability needs at least one value");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut specs = Vec::with_capacity(args.count);
    for index in 0..args.count {
        let n = rng.gen_range(agents.lo..=agents.hi);
        let m = rng.gen_range(items.lo.max(n)..=items.hi);
        let spec = GenSpec {
            agents: n,
            items: m,
            lo: args.lo,
            hi: args.hi,
            zero_probability: args.zero_probability[index % args.zero_probability.len()].clone(),
            seed: rng.gen(),
        };
        spec.validate(true).context("invalid generator settings")?;
        specs.push(spec);
    }
    Ok(specs)
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<BenchSummary> {
    let specs = bench_specs(args)?;
    let mode = args.algorithm.mode();
    let options = SolveOptions {
        check_invariants: args.check.is_on(),
    };
    let started = Instant::now();
    let mut factors = Vec::with_capacity(specs.len());
    let mut failures = Vec::new();
    let mut invariant_checks = 0;
    for (index, spec) in specs.iter().enumerate() {
        let instance = spec.generate(true)?;
        match solve(&instance, mode, options) {
            Ok(solution) => {
                invariant_checks += solution.trace.invariant_checks().count();
                if !solution.allocation.is_complete() || !solution.report.factor.meets(&mode.guarantee()) {
                    failures.push(BenchFailure {
                        index,
                        spec: spec.clone(),
                        reason: format!("factor {} below guarantee", solution.report.factor),
                    });
                }
                factors.push(solution.report.factor);
            }
            Err(fairdiv::Error::InternalGuaranteeViolated(reason)) => failures.push(BenchFailure {
                index,
                spec: spec.clone(),
                reason,
            }),
            Err(other) => return Err(other).with_context(|| format!("instance {index} ({spec:?})")),
        }
    }

    let finite: Vec<&Rational> = factors.iter().filter_map(Factor::finite).collect();
    let min = finite.iter().min().copied();
    let max = finite.iter().max().copied();
    let mean = (!finite.is_empty()).then(|| finite.iter().map(|f| to_f64(f)).sum::<f64>() / finite.len() as f64);
    let summary = BenchSummary {
        algorithm: format!("{:?}", args.algorithm).to_lowercase(),
        guarantee: mode.guarantee().to_string(),
        count: specs.len(),
        min_factor: min.map(ToString::to_string),
        min_factor_decimal: min.map(to_f64),
        mean_factor_decimal: mean,
        max_factor: max.map(ToString::to_string),
        max_factor_decimal: max.map(to_f64),
        unbounded: factors.iter().filter(|f| **f == Factor::Unbounded).count(),
        invariant_checks,
        violations: failures.len(),
        failures,
        elapsed_seconds: started.elapsed().as_secs_f64(),
        factors,
    };
    writeln!(out, "{}", serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}

pub fn cmd_oracle(args: &OracleArgs, out: &mut dyn Write) -> Result<u8> {
    let limits = OracleLimits {
        max_agents: args.max_agents,
        max_items: args.max_items,
        max_allocations: args.max_allocations,
    };
    let instance = load_instance(&args.input)?;
    let allocation = || -> Result<Allocation> {
        let path = args
            .allocation
            .as_deref()
            .ok_or_else(|| anyhow!("--allocation is required for --check {:?}", args.check))?;
        load_allocation(path, &instance)
    };
    match args.check {
        OracleCheck::NswMatching => {
            let (objective, witness) = oracle_nsw_matching(&instance, &limits)?;
            let pairs: Vec<String> = witness.iter().enumerate().map(|(a, b)| format!("{a}->{b}")).collect();
            writeln!(out, "positive agents: {}", objective.positive_count)?;
            writeln!(out, "product: {} ({})", objective.product, decimal(&objective.product))?;
            writeln!(out, "matching: {}", pairs.join(" "))?;
        }
        OracleCheck::BestEfr | OracleCheck::BestEfx => {
            let notion = if args.check == OracleCheck::BestEfr {
                FairnessNotion::Efr
            } else {
                FairnessNotion::Efx
            };
            let (factor, witness) = oracle_best_factor(&instance, notion, &limits)?;
            writeln!(out, "best {notion} factor: {}", factor_text(&factor))?;
            writeln!(out, "allocation: {witness}")?;
        }
        OracleCheck::ImprovingCycle => {
            let graph = build_envy_ratio_graph(&instance, &allocation()?)?;
            match oracle_improving_cycle(&graph, &limits)? {
                Some((cycle, product)) => {
                    writeln!(out, "cycle: {cycle}")?;
                    writeln!(out, "product: {}", weight_text(&product))?;
                }
                None => writeln!(out, "cycle: none")?,
            }
        }
        OracleCheck::EnvyRank => {
            let graph = build_envy_ratio_graph(&instance, &allocation()?)?;
            for agent in instance.agents() {
                let rank = oracle_envy_rank(&graph, agent, &limits)?;
                writeln!(out, "agent {agent}: {}", weight_text(&rank))?;
            }
        }
    }
    Ok(0)
}
