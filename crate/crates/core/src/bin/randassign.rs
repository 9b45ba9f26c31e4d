//! Command-line front end: run mechanisms, check properties, decompose
//! matrices, and replay fixture audits.
//!
//! Exit codes: 0 success / property holds; 1 property fails, claim
//! diverges, or decomposition is infeasible; 2 malformed input; 3
//! enumeration budget exceeded.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use randassign::documents::{self, Provenance};
use randassign::mechanisms::{eating, lottery};
use randassign::model::{Budget, PriorityOrder, Profile, RandomAssignment};
use randassign::properties::{self, BaseProperty};
use randassign::{fixtures, oracles, Error};

#[derive(Parser)]
#[command(name = "randassign", version, about = "Exact random-assignment mechanisms and checkers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Mode {
    Sample,
    Expectation,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum MechanismId {
    Ebm,
    Abm,
    Bm,
    Rp,
    Ps,
    Upre,
    Pre,
}

impl PropertyId {
    fn name(self) -> &'static str {
        match self {
            PropertyId::Pe => "pe",
            PropertyId::Fcm => "fcm",
            PropertyId::Fhr => "fhr",
            PropertyId::Feri => "feri",
            PropertyId::Rm => "rm",
            PropertyId::Pop => "pop",
            PropertyId::SdPe => "sd-pe",
            PropertyId::EaFeri => "ea-feri",
            PropertyId::EaFhr => "ea-fhr",
            PropertyId::Sete => "sete",
            PropertyId::SdEf => "sd-ef",
            PropertyId::SdWef => "sd-wef",
            PropertyId::EpPe => "ep-pe",
            PropertyId::EpFcm => "ep-fcm",
            PropertyId::EpFhr => "ep-fhr",
            PropertyId::EpFeri => "ep-feri",
            PropertyId::EpRm => "ep-rm",
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum PropertyId {
    Pe,
    Fcm,
    Fhr,
    Feri,
    Rm,
    Pop,
    #[value(name = "sd-pe")]
    SdPe,
    #[value(name = "ea-feri")]
    EaFeri,
    #[value(name = "ea-fhr")]
    EaFhr,
    Sete,
    #[value(name = "sd-ef")]
    SdEf,
    #[value(name = "sd-wef")]
    SdWef,
    #[value(name = "ep-pe")]
    EpPe,
    #[value(name = "ep-fcm")]
    EpFcm,
    #[value(name = "ep-fhr")]
    EpFhr,
    #[value(name = "ep-feri")]
    EpFeri,
    #[value(name = "ep-rm")]
    EpRm,
}

#[derive(Subcommand)]
enum Command {
    /// Run a mechanism on a profile and print the assignment document.
    Run {
        mechanism: MechanismId,
        profile: PathBuf,
        /// Single run or exact expectation (lottery mechanisms only).
        #[arg(long, value_enum, default_value = "sample")]
        mode: Mode,
        /// Lottery seed for `ebm` in sample mode.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated agent ids, highest priority first (abm/bm/rp).
        #[arg(long)]
        priority: Option<String>,
        /// Eating-speed document for `pre`.
        #[arg(long)]
        speeds: Option<PathBuf>,
        /// Cap on lottery-world enumeration.
        #[arg(long, default_value_t = Budget::default().max_worlds)]
        budget_worlds: u64,
        /// Cap on n for factorial enumeration.
        #[arg(long, default_value_t = Budget::default().max_enum_agents)]
        budget_enum: usize,
    },
    /// Check a property of an assignment document against a profile.
    Check {
        property: PropertyId,
        assignment: PathBuf,
        profile: PathBuf,
        #[arg(long, default_value_t = Budget::default().max_enum_agents)]
        budget_enum: usize,
    },
    /// Replay one fixture audit (or `all`), printing each checked value.
    Audit {
        fixture: String,
        /// Write the fixture corpus (profiles and tables) to a directory.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Decompose an assignment into deterministic assignments.
    Decompose {
        assignment: PathBuf,
        profile: PathBuf,
        /// Restrict components to assignments satisfying this property;
        /// exit 1 when infeasible.
        #[arg(long)]
        property: Option<PropertyId>,
        #[arg(long, default_value_t = Budget::default().max_enum_agents)]
        budget_enum: usize,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::BudgetExceeded { .. } => 3,
                _ => 2,
            })
        }
    }
}

fn read_profile(path: &Path) -> randassign::Result<Profile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidDocument(format!("{}: {e}", path.display())))?;
    documents::parse_profile(&text)
}

fn read_assignment(path: &Path, profile: &Profile) -> randassign::Result<RandomAssignment> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidDocument(format!("{}: {e}", path.display())))?;
    documents::parse_assignment(&text, profile)
}

fn parse_priority(profile: &Profile, arg: &Option<String>) -> randassign::Result<PriorityOrder> {
    let arg = arg.as_ref().ok_or_else(|| {
        Error::InvalidPriority("this mechanism needs --priority in sample mode".into())
    })?;
    let ids: Vec<&str> = arg.split(',').map(str::trim).collect();
    PriorityOrder::from_ids(profile, &ids)
}

fn dispatch(cli: Cli) -> randassign::Result<ExitCode> {
    match cli.command {
        Command::Run {
            mechanism,
            profile,
            mode,
            seed,
            priority,
            speeds,
            budget_worlds,
            budget_enum,
        } => {
            let p = read_profile(&profile)?;
            let budget = Budget {
                max_worlds: budget_worlds,
                max_enum_agents: budget_enum,
            };
            let mut provenance = Provenance {
                mechanism: Some(format!("{mechanism:?}").to_lowercase()),
                ..Provenance::default()
            };
            let matrix = match (mechanism, mode) {
                (MechanismId::Ebm, Mode::Sample) => {
                    provenance.seed = Some(seed);
                    lottery::ebm_sample(&p, seed).0.matrix()
                }
                (MechanismId::Ebm, Mode::Expectation) => {
                    lottery::ebm_expectation(&p, &budget)?.matrix
                }
                (MechanismId::Abm, Mode::Sample) => {
                    lottery::abm_run(&p, &parse_priority(&p, &priority)?).matrix()
                }
                (MechanismId::Abm, Mode::Expectation) => {
                    lottery::abm_uniform_expectation(&p, &budget)?
                }
                (MechanismId::Bm, Mode::Sample) => {
                    lottery::bm_run(&p, &parse_priority(&p, &priority)?).matrix()
                }
                (MechanismId::Bm, Mode::Expectation) => {
                    lottery::bm_uniform_expectation(&p, &budget)?
                }
                (MechanismId::Rp, Mode::Sample) => {
                    lottery::rp_run(&p, &parse_priority(&p, &priority)?).matrix()
                }
                (MechanismId::Rp, Mode::Expectation) => lottery::rp_expectation(&p, &budget)?,
                (MechanismId::Ps, _) => eating::ps_run(&p),
                (MechanismId::Upre, _) => eating::upre_run(&p),
                (MechanismId::Pre, _) => {
                    let path = speeds.ok_or_else(|| {
                        Error::InvalidSpeeds("the pre mechanism needs --speeds".into())
                    })?;
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| Error::InvalidDocument(format!("{}: {e}", path.display())))?;
                    let speeds = documents::parse_speeds(&text, &p)?;
                    eating::pre_run(&p, &speeds)?.0
                }
            };
            let doc = documents::AssignmentDocument::from_matrix(&p, &matrix, Some(provenance));
            println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
            Ok(ExitCode::SUCCESS)
        }

        Command::Check {
            property,
            assignment,
            profile,
            budget_enum,
        } => {
            let p = read_profile(&profile)?;
            let m = read_assignment(&assignment, &p)?;
            let budget = Budget {
                max_enum_agents: budget_enum,
                ..Budget::default()
            };
            let need_deterministic = || {
                m.as_deterministic().ok_or_else(|| {
                    Error::InvalidDocument(
                        "this property applies to deterministic assignments; the matrix has fractional entries"
                            .into(),
                    )
                })
            };
            let (verdict, extra) = match property {
                PropertyId::Pe => (properties::is_pe(&p, &need_deterministic()?), None),
                PropertyId::Fcm => (properties::is_fcm(&p, &need_deterministic()?), None),
                PropertyId::Fhr => (properties::is_fhr(&p, &need_deterministic()?), None),
                PropertyId::Feri => {
                    let (v, tiers) = properties::is_feri(&p, &need_deterministic()?);
                    let tiers_json: Vec<Vec<String>> = tiers
                        .tiers
                        .iter()
                        .map(|t| t.iter().map(|o| p.item_id(o).to_string()).collect())
                        .collect();
                    (v, Some(("tiers", serde_json::json!(tiers_json))))
                }
                PropertyId::Rm => (properties::is_rm(&p, &need_deterministic()?, &budget)?, None),
                PropertyId::Pop => (properties::is_pop(&p, &need_deterministic()?, &budget)?, None),
                PropertyId::SdPe => (properties::is_sd_pe(&p, &m), None),
                PropertyId::EaFeri => (properties::is_ea_feri(&p, &m), None),
                PropertyId::EaFhr => (properties::is_ea_fhr(&p, &m), None),
                PropertyId::Sete => (properties::is_sete(&p, &m), None),
                PropertyId::SdEf => (properties::is_sd_ef(&p, &m), None),
                PropertyId::SdWef => (properties::is_sd_wef(&p, &m), None),
                PropertyId::EpPe
                | PropertyId::EpFcm
                | PropertyId::EpFhr
                | PropertyId::EpFeri
                | PropertyId::EpRm => {
                    let base = match property {
                        PropertyId::EpPe => BaseProperty::Pe,
                        PropertyId::EpFcm => BaseProperty::Fcm,
                        PropertyId::EpFhr => BaseProperty::Fhr,
                        PropertyId::EpFeri => BaseProperty::Feri,
                        _ => BaseProperty::Rm,
                    };
                    let v = properties::is_ep(&p, &m, base, &budget)?;
                    let extra = v.certificate.as_ref().map(|cert| {
                        (
                            "certificate",
                            serde_json::to_value(
                                documents::DecompositionDocument::from_decomposition(&p, cert),
                            )
                            .expect("serializable"),
                        )
                    });
                    (
                        properties::Verdict {
                            holds: v.holds,
                            witness: v.witness,
                        },
                        extra,
                    )
                }
            };

            let mut out = serde_json::json!({
                "property": property.name(),
                "holds": verdict.holds,
            });
            if let Some(w) = &verdict.witness {
                out["witness"] = documents::witness_to_json(&p, w);
            }
            if let Some((key, value)) = extra {
                out[key] = value;
            }
            println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
            Ok(if verdict.holds {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }

        Command::Audit { fixture, export } => {
            if let Some(dir) = &export {
                std::fs::create_dir_all(dir)
                    .map_err(|e| Error::InvalidDocument(format!("{}: {e}", dir.display())))?;
                let written = fixtures::export_corpus(dir)?;
                for path in written {
                    eprintln!("wrote {}", path.display());
                }
            }
            let names: Vec<&str> = if fixture == "all" {
                fixtures::FIXTURE_IDS.to_vec()
            } else {
                vec![fixture.as_str()]
            };
            let mut all_pass = true;
            for name in names {
                let report = fixtures::audit_fixture(name)?;
                for check in &report.checks {
                    println!(
                        "[{}] {}: {} = {}",
                        if check.pass { "ok" } else { "DIVERGED" },
                        report.fixture,
                        check.label,
                        check.value
                    );
                }
                if let Some(fail) = report.first_failure() {
                    eprintln!(
                        "audit {name} diverged at `{}` (got {})",
                        fail.label, fail.value
                    );
                    all_pass = false;
                }
            }
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }

        Command::Decompose {
            assignment,
            profile,
            property,
            budget_enum,
        } => {
            let p = read_profile(&profile)?;
            let m = read_assignment(&assignment, &p)?;
            let budget = Budget {
                max_enum_agents: budget_enum,
                ..Budget::default()
            };
            let decomposition = match property {
                None => Some(randassign::bvn::bvn_decompose(&m)),
                Some(prop) => {
                    let base = match prop {
                        PropertyId::Pe => BaseProperty::Pe,
                        PropertyId::Fcm => BaseProperty::Fcm,
                        PropertyId::Fhr => BaseProperty::Fhr,
                        PropertyId::Feri => BaseProperty::Feri,
                        PropertyId::Rm => BaseProperty::Rm,
                        PropertyId::Pop => BaseProperty::Pop,
                        other => {
                            return Err(Error::InvalidDocument(format!(
                                "`{other:?}` is not a deterministic base property"
                            )))
                        }
                    };
                    let generators = oracles::enumerate_satisfying(&p, base, &budget)?;
                    oracles::exact_feasibility(&m, &generators)
                }
            };
            match decomposition {
                Some(d) => {
                    println!("{}", documents::decomposition_to_json(&p, &d)?);
                    Ok(ExitCode::SUCCESS)
                }
                None => {
                    eprintln!("infeasible: the assignment is not a convex combination of the requested components");
                    Ok(ExitCode::from(1))
                }
            }
        }
    }
}
