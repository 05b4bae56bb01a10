use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dynprice::harness::{self, suites, Family, Format, InstanceSpec, OutputSpec, Scenario};
use dynprice::metric::MetricSpace;
use dynprice::mts::{Traversal, TraversalCursor};
use dynprice::parking::{matching_offline_opt, run_greedy, run_harmonic, run_priced_agents, PricingRule};
use dynprice::{TieBreak, TiePolicy};
use num_rational::Rational64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Online algorithms, posted prices and selfish agents: seeded experiments.
#[derive(Parser, Debug)]
#[command(name = "dynprice", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario and write the per-trial table.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Output file (default: the scenario's output path, else stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Table format [default: the scenario's, else csv].
        #[arg(long)]
        format: Option<Format>,
    },
    /// Generate an instance file, e.g. `gen parking adversarial n=10 eps=1e-6`.
    Gen {
        family: Family,
        generator: String,
        /// Generator parameters as key=value.
        params: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run property suites: one name or `all`.
    Verify {
        #[arg(default_value = "all")]
        suite: String,
        /// Where failing suites write their witness instances.
        #[arg(long, default_value = "witnesses")]
        witness_dir: PathBuf,
    },
    /// Print the cost/OPT ratio summary of a scenario.
    Poa {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Built-in demonstrations: `appendix-a1` or `parking-gap [n=10]`.
    Demo {
        name: String,
        params: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

/// A scenario file, or an inline scenario built from `--family` and friends.
#[derive(Args, Debug)]
struct ScenarioArgs {
    /// Scenario file (TOML).
    scenario: Option<PathBuf>,
    /// Inline scenario: problem family.
    #[arg(long, conflicts_with = "scenario", requires = "generator")]
    family: Option<Family>,
    /// Inline scenario: instance generator.
    #[arg(long)]
    generator: Option<String>,
    /// Inline scenario: algorithm [default: agents].
    #[arg(long)]
    algorithm: Option<String>,
    /// Inline scenario: pricing [default: none].
    #[arg(long)]
    pricing: Option<String>,
    /// Inline scenario: generator parameters as key=value.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Root seed (overrides the scenario) [inline default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Number of trials (overrides the scenario) [inline default: 1].
    #[arg(long)]
    trials: Option<usize>,
    /// Tie-breaking policy (overrides the scenario) [inline default: first].
    #[arg(long)]
    tie_policy: Option<TiePolicy>,
    /// Maximum concurrent trials (overrides the scenario) [inline default: 1].
    #[arg(long)]
    jobs: Option<usize>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<Scenario> {
        let mut s = match (&self.scenario, self.family) {
            (Some(path), _) => Scenario::load(path)?,
            (None, Some(family)) => Scenario {
                family,
                algorithm: self.algorithm.clone().unwrap_or_else(|| "agents".into()),
                pricing: self.pricing.clone().unwrap_or_else(|| "none".into()),
                trials: 1,
                seed: 0,
                tie_policy: TiePolicy::First,
                jobs: 1,
                instance: InstanceSpec {
                    generator: self.generator.clone(),
                    params: harness::parse_params(&self.params)?,
                    ..Default::default()
                },
                output: OutputSpec::default(),
            },
            (None, None) => bail!("give a scenario file or --family/--generator"),
        };
        if let Some(x) = self.seed {
            s.seed = x;
        }
        if let Some(x) = self.trials {
            s.trials = x;
        }
        if let Some(x) = self.tie_policy {
            s.tie_policy = x;
        }
        if let Some(x) = self.jobs {
            s.jobs = x;
        }
        s.validate()?;
        Ok(s)
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn fraction_line(fractions: &[(usize, Rational64)]) -> String {
    // common denominator of the step, so 1/5 prints as 2/10 beside 3/10
    let lcm = fractions.iter().fold(1i64, |acc, (_, f)| lcm(acc, *f.denom()));
    fractions
        .iter()
        .map(|(j, f)| {
            let num = f.numer() * (lcm / f.denom());
            if lcm == 1 {
                format!("{num}@{j}")
            } else {
                format!("{num}/{lcm}@{j}")
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn lcm(a: i64, b: i64) -> i64 {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

fn demo_appendix() -> Result<String> {
    let d = MetricSpace::matrix(vec![vec![0.0, 2.0, 3.0], vec![2.0, 0.0, 4.0], vec![3.0, 4.0, 0.0]])?;
    let tau = Traversal::new(&d, vec![0, 1, 0, 2])?;
    let tasks: [[i64; 3]; 3] = [[3, 6, 3], [1, 3, 4], [10, 10, 10]];
    let mut out = String::from("states 1 2 3; d(1,2)=2 d(1,3)=3 d(2,3)=4; tau=(1,2,1,3) repeated\n");
    let mut cursor = TraversalCursor::<Rational64>::new();
    for (i, w) in tasks.iter().enumerate() {
        let task: Vec<Rational64> = w.iter().map(|&x| Rational64::from_integer(x)).collect();
        let rec = cursor.step_with(
            |j| tau.gap(j).map(|g| Rational64::from_integer(g as i64)),
            |j| tau.state(j),
            &task,
        );
        out.push_str(&format!(
            "task {} w=({},{},{}): lambda {} ; t={} rho={}\n",
            i + 1,
            w[0],
            w[1],
            w[2],
            fraction_line(&rec.fractions),
            rec.end,
            rec.rho
        ));
    }
    out.push_str(&format!("total work {}\n", cursor.total_work()));
    Ok(out)
}

fn demo_parking_gap(params: &[String], seed: u64, trials: usize) -> Result<String> {
    let mut p = harness::parse_params(params)?;
    p.entry("n".into()).or_insert(10.0);
    p.entry("eps".into()).or_insert(1e-6);
    let n = p["n"];
    let inst = harness::generate(Family::Parking, "adversarial", &p, seed)?.parking()?;
    let (street, goals) = (&inst.street, &inst.goals);
    let opt = matching_offline_opt(street, goals)?;
    let greedy = run_greedy(street, goals)?.cost();
    let (mut alg, mut agents) = (0.0, 0.0);
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        alg += run_harmonic(street, goals, &mut rng)?.cost();
        agents += run_priced_agents(
            street,
            street,
            goals,
            PricingRule::Harmonic,
            &mut rng,
            &mut TieBreak::First,
        )?
        .cost();
    }
    let m = trials.max(1) as f64;
    Ok(format!(
        "adversarial instance n={n} eps={}\nopt {opt}\ngreedy (free parking) {greedy} ratio {}\nharmonic algorithm mean over {trials} runs {}\nharmonic prices mean over {trials} runs {}\n",
        p["eps"],
        greedy / opt,
        alg / m,
        agents / m
    ))
}

fn real_main() -> Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, out, format } => {
            let s = scenario.load()?;
            let report = harness::run(&s)?;
            let format = format.unwrap_or(s.output.format);
            write_out(out.as_deref().or(s.output.path.as_deref()), &report.to_table(format))?;
        }
        Command::Gen {
            family,
            generator,
            params,
            seed,
            out,
        } => {
            let inst = harness::generate(family, &generator, &harness::parse_params(&params)?, seed)?;
            write_out(out.as_deref(), &toml::to_string(&inst)?)?;
        }
        Command::Verify { suite, witness_dir } => {
            let names: Vec<&str> = if suite == "all" {
                suites::SUITES.to_vec()
            } else {
                vec![suite.as_str()]
            };
            let mut ok = true;
            for name in names {
                let r = suites::run_suite(name)?;
                let w = r.write_witness(&witness_dir)?;
                println!("{}", r.line(w.as_deref()));
                ok &= r.passed();
            }
            return Ok(ok);
        }
        Command::Poa { scenario } => {
            let report = harness::run(&scenario.load()?)?;
            print!("{}", report.summary());
        }
        Command::Demo {
            name,
            params,
            seed,
            trials,
        } => {
            let text = match name.as_str() {
                "appendix-a1" => demo_appendix()?,
                "parking-gap" => demo_parking_gap(&params, seed, trials)?,
                other => bail!("unknown demo `{other}` (appendix-a1|parking-gap)"),
            };
            print!("{text}");
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
