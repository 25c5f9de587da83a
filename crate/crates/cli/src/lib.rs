//! The `uag` command line.
//!
//! Every subcommand loads a `.uag` model, calls one library operation and
//! hands the result to the matching builder in `uag_core::report`, so a
//! command's JSON payload is exactly what the library produces for the
//! same inputs.
//!
//! Exit codes: 0 for success or a true verdict, 1 for a false verdict,
//! 2 for usage and parse errors, 3 for semantic errors such as an
//! exhausted point budget or a failed precondition.

use std::ffi::OsString;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use uag_core::algebra::FiniteAlgebra;
use uag_core::dsl::{parse_model, parse_term, ModelFile};
use uag_core::geometry::{
    closure, enumerate_closed, geom_equiv, induced_hom, is_cl_morphism, lift_hom,
    relatively_free, QuotientHom,
};
use uag_core::report::{self, error_report, Report};
use uag_core::terms::{EquationSystem, GeneratorSet, PointBudget, TermMorphism};
use uag_core::verbal::{
    auto_equiv, check_applicable_rel, derive_algebra, inner_search, ApplicabilityBasis,
    WordSystem,
};

pub const EXIT_TRUE: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SEMANTIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "uag", version, about = "Universal algebraic geometry over finite algebras")]
struct Cli {
    /// Print the full JSON report instead of a text summary.
    #[arg(long, global = true)]
    json: bool,
    /// Write the report to FILE instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Largest number of points |H|^rank any single step may enumerate.
    #[arg(long, global = true, env = "UAG_POINT_BUDGET", default_value_t = 64, value_parser = positive)]
    point_budget: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ModelArg {
    /// Model file in the .uag language.
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Algebraic closure of an equation system in an algebra.
    Closure {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        algebra: String,
        #[arg(long)]
        system: String,
    },
    /// All closed congruences of the free algebra of a given rank.
    ClosedSets {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        algebra: String,
        #[arg(long, value_parser = positive)]
        rank: usize,
    },
    /// The relatively free algebra of Var(A) with witness terms.
    Free {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        algebra: String,
        #[arg(long, value_parser = positive)]
        rank: usize,
    },
    /// Geometric equivalence of two algebras up to a rank.
    Geomeq {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, value_parser = positive)]
        max_rank: usize,
    },
    /// The derived algebra A*W.
    Derive {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        algebra: String,
        #[arg(long)]
        words: String,
    },
    /// Applicability evidence for a word system relative to Var(H0).
    Applicable {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        h0: String,
        #[arg(long)]
        words: String,
        #[arg(long, value_parser = positive)]
        max_rank: usize,
    },
    /// Automorphic equivalence of A and B through a word system.
    Autoeq {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        words: String,
        #[arg(long, value_parser = positive)]
        max_rank: usize,
        /// Treat the word system as applicable without evidence.
        #[arg(long, conflicts_with = "h0", required_unless_present = "h0")]
        assume_applicable: bool,
        /// Establish applicability relative to Var(H0) first.
        #[arg(long)]
        h0: Option<String>,
    },
    /// Search for a unary term inducing the word system's automorphism.
    InnerSearch {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        h0: String,
        #[arg(long)]
        words: String,
        #[arg(long, value_parser = positive)]
        max_rank: usize,
        #[arg(long)]
        max_depth: usize,
    },
    /// Check that a term morphism maps one closed congruence into another.
    CheckHom {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        algebra: String,
        /// System whose closure is the source congruence.
        #[arg(long)]
        source: String,
        /// System whose closure is the target congruence.
        #[arg(long)]
        target: String,
        /// Images of the source generators, `;`-separated terms over the
        /// target generators.
        #[arg(long)]
        images: String,
    },
    /// Lift a coordinate-algebra homomorphism to a term morphism.
    Lift {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        algebra: String,
        #[arg(long)]
        source: String,
        #[arg(long)]
        target: String,
        /// Target coordinate-algebra elements for the source generators.
        #[arg(long, value_delimiter = ',')]
        images: Vec<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Closure { .. } => "closure",
            Command::ClosedSets { .. } => "closed-sets",
            Command::Free { .. } => "free",
            Command::Geomeq { .. } => "geomeq",
            Command::Derive { .. } => "derive",
            Command::Applicable { .. } => "applicable",
            Command::Autoeq { .. } => "autoeq",
            Command::InnerSearch { .. } => "inner-search",
            Command::CheckHom { .. } => "check-hom",
            Command::Lift { .. } => "lift",
        }
    }

    fn is_decision(&self) -> bool {
        matches!(
            self,
            Command::Geomeq { .. }
                | Command::Applicable { .. }
                | Command::Autoeq { .. }
                | Command::InnerSearch { .. }
                | Command::CheckHom { .. }
        )
    }
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

/// Result of one invocation: exit code and the text for each stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Failure {
    code: i32,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            kind: "usage",
            message: message.into(),
        }
    }

    fn parse(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            kind: "parse",
            message: message.into(),
        }
    }
}

impl From<uag_core::Error> for Failure {
    fn from(e: uag_core::Error) -> Self {
        Failure {
            code: EXIT_SEMANTIC,
            kind: "semantic",
            message: e.to_string(),
        }
    }
}

struct Loaded {
    model: ModelFile,
}

impl Loaded {
    fn open(arg: &ModelArg) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(&arg.model)
            .map_err(|e| Failure::usage(format!("cannot read {}: {e}", arg.model.display())))?;
        let model = parse_model(&text)
            .map_err(|e| Failure::parse(format!("{}:{e}", arg.model.display())))?;
        Ok(Loaded { model })
    }

    fn algebra(&self, name: &str) -> Result<Arc<FiniteAlgebra>, Failure> {
        self.model
            .algebras
            .get(name)
            .cloned()
            .ok_or_else(|| Failure::usage(format!("no algebra named `{name}` in the model")))
    }

    fn system(&self, name: &str) -> Result<&EquationSystem, Failure> {
        self.model
            .systems
            .get(name)
            .ok_or_else(|| Failure::usage(format!("no system named `{name}` in the model")))
    }

    fn words(&self, name: &str) -> Result<&WordSystem, Failure> {
        self.model
            .word_systems
            .get(name)
            .ok_or_else(|| Failure::usage(format!("no word system named `{name}` in the model")))
    }
}

fn execute(command: &Command, budget: PointBudget) -> Result<Report, Failure> {
    match command {
        Command::Closure {
            model,
            algebra,
            system,
        } => {
            let m = Loaded::open(model)?;
            let h = m.algebra(algebra)?;
            let sys = m.system(system)?;
            let t = closure(&h, sys, budget)?;
            Ok(report::closure_report(algebra, &h, system, sys, &t))
        }
        Command::ClosedSets {
            model,
            algebra,
            rank,
        } => {
            let m = Loaded::open(model)?;
            let h = m.algebra(algebra)?;
            let sets = enumerate_closed(&h, GeneratorSet::new(*rank)?, budget)?;
            Ok(report::closed_sets_report(algebra, &h, *rank, &sets))
        }
        Command::Free {
            model,
            algebra,
            rank,
        } => {
            let m = Loaded::open(model)?;
            let h = m.algebra(algebra)?;
            let free = relatively_free(&h, GeneratorSet::new(*rank)?, budget)?;
            Ok(report::free_report(algebra, &h, &free))
        }
        Command::Geomeq {
            model,
            a,
            b,
            max_rank,
        } => {
            let m = Loaded::open(model)?;
            let (h1, h2) = (m.algebra(a)?, m.algebra(b)?);
            let v = geom_equiv(&h1, &h2, *max_rank, budget)?;
            Ok(report::geomeq_report(a, &h1, b, &h2, *max_rank, &v, budget)?)
        }
        Command::Derive {
            model,
            algebra,
            words,
        } => {
            let m = Loaded::open(model)?;
            let h = m.algebra(algebra)?;
            let w = m.words(words)?;
            let derived = derive_algebra(&h, w)?;
            Ok(report::derive_report(algebra, &h, words, w, &derived))
        }
        Command::Applicable {
            model,
            h0,
            words,
            max_rank,
        } => {
            let m = Loaded::open(model)?;
            let base = m.algebra(h0)?;
            let w = m.words(words)?;
            let r = check_applicable_rel(&base, w, *max_rank, budget)?;
            Ok(report::applicable_report(h0, words, *max_rank, &r))
        }
        Command::Autoeq {
            model,
            a,
            b,
            words,
            max_rank,
            assume_applicable: _,
            h0,
        } => {
            let m = Loaded::open(model)?;
            let (h1, h2) = (m.algebra(a)?, m.algebra(b)?);
            let w = m.words(words)?;
            let basis = match h0 {
                None => ApplicabilityBasis::UserAsserted,
                Some(name) => ApplicabilityBasis::RelativeEvidence(check_applicable_rel(
                    &m.algebra(name)?,
                    w,
                    *max_rank,
                    budget,
                )?),
            };
            let v = auto_equiv(&h1, &h2, w, *max_rank, &basis, budget)?;
            let derived = Arc::new(derive_algebra(&h2, w)?);
            Ok(report::autoeq_report(
                a,
                &h1,
                b,
                &h2,
                words,
                w,
                h0.as_deref(),
                &v,
                &derived,
                budget,
            )?)
        }
        Command::InnerSearch {
            model,
            h0,
            words,
            max_rank,
            max_depth,
        } => {
            let m = Loaded::open(model)?;
            let base = m.algebra(h0)?;
            let w = m.words(words)?;
            let found = inner_search(&base, w, *max_rank, *max_depth, budget)?;
            Ok(report::inner_search_report(
                h0,
                &base,
                words,
                w,
                *max_rank,
                *max_depth,
                found.as_ref(),
            ))
        }
        Command::CheckHom {
            model,
            algebra,
            source,
            target,
            images,
        } => {
            let m = Loaded::open(model)?;
            let h = m.algebra(algebra)?;
            let (s1, s2) = (m.system(source)?, m.system(target)?);
            let sig = h.signature();
            let terms = images
                .split(';')
                .map(|t| parse_term(sig, s2.rank(), t.trim()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::parse(format!("--images: {e}")))?;
            let morphism = TermMorphism::new(sig.clone(), s2.rank(), terms)?;
            let t1 = closure(&h, s1, budget)?;
            let t2 = closure(&h, s2, budget)?;
            let induced = if is_cl_morphism(&morphism, &t1, &t2)? {
                Some(induced_hom(&morphism, &t1, &t2)?)
            } else {
                None
            };
            Ok(report::check_hom_report(
                algebra,
                &h,
                source,
                s1,
                target,
                s2,
                &morphism,
                induced.as_ref(),
            ))
        }
        Command::Lift {
            model,
            algebra,
            source,
            target,
            images,
        } => {
            let m = Loaded::open(model)?;
            let h = m.algebra(algebra)?;
            let (s1, s2) = (m.system(source)?, m.system(target)?);
            let t1 = closure(&h, s1, budget)?;
            let t2 = closure(&h, s2, budget)?;
            let hom = QuotientHom::from_generator_images(
                &t1.coordinate_algebra(),
                &t2.coordinate_algebra(),
                images,
            )?
            .ok_or_else(|| {
                Failure::from(uag_core::Error::Precondition(
                    "generator images do not extend to a homomorphism".into(),
                ))
            })?;
            let lifted = lift_hom(&hom);
            Ok(report::lift_report(
                algebra, &h, source, s1, target, s2, images, &lifted,
            ))
        }
    }
}

/// Runs one invocation given the full argument vector, program name first.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: EXIT_TRUE,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let started = Instant::now();
    let result = execute(&cli.command, PointBudget(cli.point_budget));
    let elapsed = started.elapsed().as_millis();
    let name = cli.command.name();
    let (code, rendered, stderr) = match result {
        Ok(report) => {
            let code = match (cli.command.is_decision(), report.verdict()) {
                (true, Some(false)) => EXIT_FALSE,
                _ => EXIT_TRUE,
            };
            let report = report.with_timing(elapsed);
            let text = if cli.json {
                report.render()
            } else {
                report.render_text()
            };
            (code, text, String::new())
        }
        Err(f) => {
            if cli.json {
                let report = error_report(name, f.kind, &f.message).with_timing(elapsed);
                (f.code, report.render(), String::new())
            } else {
                (f.code, String::new(), format!("error: {}\n", f.message))
            }
        }
    };
    match &cli.out {
        None => Outcome {
            code,
            stdout: rendered,
            stderr,
        },
        Some(path) => match std::fs::write(path, &rendered) {
            Ok(()) => Outcome {
                code,
                stdout: String::new(),
                stderr,
            },
            Err(e) => Outcome {
                code: EXIT_USAGE,
                stdout: String::new(),
                stderr: format!("error: cannot write {}: {e}\n", path.display()),
            },
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_must_be_positive() {
        assert_eq!(positive("3"), Ok(3));
        assert!(positive("0").is_err());
        assert!(positive("-1").is_err());
        assert!(positive("x").is_err());
    }
}
