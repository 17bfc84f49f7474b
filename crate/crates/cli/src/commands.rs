use delta_forge::acceptance::{render_text, run_acceptance, Profile};
use delta_forge::cocycles::{
    cocycle_check, coherence_check, random_constant_matrix, recover, ClassifiedCocycle, Subgroup,
};
use delta_forge::decomp::{decompose, decompose_preconditioned, reconstruct, DecompositionWord};
use delta_forge::homs::{
    check_hom, ga_hom, gm_hom, psi, psi_series, twisted_cocycle, GaHomParams, GmHomParams, HomLaw,
    TwistedCocycleParams,
};
use delta_forge::jet::JetAlgebra;
use delta_forge::sampling::{derive_seed, sample_rng};
use delta_forge::{BackendKind, DeltaRing, Error, MatrixOps, Result};
use serde_json::{json, Value};

use crate::payload;
use crate::ring::{Ring, RingConfig};
use crate::{Cli, Command, Family, Outcome, ProfileArg, SubgroupArg};

pub fn run(cli: &Cli, seed: u64) -> Result<Outcome> {
    if let Command::Selftest { profile } = &cli.command {
        return Ok(selftest(*profile, seed));
    }
    let config = RingConfig::from_args(&cli.ring)?;
    match &cli.command {
        Command::RingInfo => ring_info(&config),
        Command::Teich { residue } => teich(&config, residue),
        Command::DeltaEval { x, order } => {
            let value = payload::read_json(x)?;
            // an integer literal is exact, so it can be read with `order` spare digits
            let working = if payload::is_exact_integer(&value) {
                config.lifted(*order)
            } else {
                config.clone()
            };
            match working.build()? {
                Ring::Arithmetic(r) => delta_eval(&r, &value, *order),
                Ring::Kolchin(k) => delta_eval(&k, &value, *order),
            }
        }
        command => match config.build()? {
            Ring::Arithmetic(r) => generic(&r, command, seed),
            Ring::Kolchin(k) => generic(&k, command, seed),
        },
    }
}

fn selftest(profile: ProfileArg, seed: u64) -> Outcome {
    let profile = match profile {
        ProfileArg::Quick => Profile::Quick,
        ProfileArg::Full => Profile::Full,
    };
    let report = run_acceptance(profile, seed);
    eprint!("{}", render_text(&report));
    Outcome {
        doc: report.to_json(),
        pass: report.pass(),
    }
}

fn ring_info(config: &RingConfig) -> Result<Outcome> {
    let mut doc = json!({"ring": config.to_json()});
    match config.build()? {
        Ring::Arithmetic(r) => {
            doc["residue_field_size"] = json!(r.residue_field_size());
            doc["modulus_at_precision"] = json!(r.p_power(r.prec()).to_string());
            doc["generator"] = r.to_json(&r.generator());
            doc["frobenius_of_generator"] = r.to_json(&r.frobenius_of_generator());
            doc["operations"] = json!(["delta", "frobenius", "teichmueller", "psi", "div_by_p"]);
        }
        Ring::Kolchin(_) => {
            doc["operations"] = json!(["delta", "log_derivative"]);
        }
    }
    Ok(Outcome::ok(doc))
}

fn teich(config: &RingConfig, residue: &str) -> Result<Outcome> {
    let r = match config.build()? {
        Ring::Arithmetic(r) => r,
        Ring::Kolchin(_) => {
            return Err(Error::Unsupported {
                op: "teichmueller",
                backend: BackendKind::Kolchin,
            })
        }
    };
    let value = payload::read_json(residue)?;
    let as_digit = |v: &Value| {
        v.as_u64()
            .ok_or_else(|| Error::Input(format!("residue coefficient {v} is not a non-negative integer")))
    };
    let digits: Vec<u64> = match &value {
        Value::Array(items) => items.iter().map(as_digit).collect::<Result<_>>()?,
        single => vec![as_digit(single)?],
    };
    let lift = r.teichmueller(&digits)?;
    Ok(Outcome::ok(json!({
        "residue": digits,
        "lift": r.to_json(&lift),
        "render": r.render(&lift),
    })))
}

fn delta_eval<R: DeltaRing>(ring: &R, value: &Value, order: u32) -> Result<Outcome> {
    let x = ring.from_json(value)?;
    let mut y = x;
    for _ in 0..order {
        y = ring.delta(&y)?;
    }
    Ok(Outcome::ok(json!({
        "input": value,
        "order": order,
        "value": ring.to_json(&y),
        "prec": ring.precision(&y),
        "render": ring.render(&y),
    })))
}

fn generic<R>(ring: &R, command: &Command, seed: u64) -> Result<Outcome>
where
    R: DeltaRing + 'static,
    R::Elem: 'static,
{
    match command {
        Command::Psi { a, terms } => {
            let a = ring.from_json(&payload::read_json(a)?)?;
            let value = psi(ring, &a)?;
            let mut doc = json!({
                "value": ring.to_json(&value),
                "prec": ring.precision(&value),
                "render": ring.render(&value),
            });
            if *terms {
                doc["terms"] = psi_series(ring, &a)?
                    .iter()
                    .map(|t| {
                        json!({
                            "n": t.n,
                            "value": ring.to_json(&t.value),
                            "scalar_valuation": t.scalar_valuation,
                            "valuation_bound": t.valuation_bound,
                        })
                    })
                    .collect();
            }
            Ok(Outcome::ok(doc))
        }
        Command::JetProlong { poly, order } => {
            let alg = JetAlgebra::new(ring.clone());
            let f = payload::polynomial(&alg, poly)?;
            let g = alg.prolong_n(&f, *order)?;
            Ok(Outcome::ok(json!({
                "input": alg.render(&f),
                "order": order,
                "result": alg.render(&g),
                "polynomial": alg.to_json(&g),
                "terms": g.term_count(),
                "prec": g.prec(),
            })))
        }
        Command::JetNabla { a, level, eval } => {
            let alg = JetAlgebra::new(ring.clone());
            let base = payload::elements(ring, &payload::read_json(a)?)?;
            let point = alg.nabla(&base, *level)?;
            let components: Vec<Vec<Value>> = point
                .components()
                .iter()
                .map(|level| level.iter().map(|c| ring.to_json(c)).collect())
                .collect();
            let mut doc = json!({"level": level, "components": components});
            if let Some(text) = eval {
                let f = payload::polynomial(&alg, text)?;
                let value = alg.eval(&f, &point)?;
                doc["polynomial"] = json!(alg.render(&f));
                doc["value"] = ring.to_json(&value);
                doc["prec"] = json!(ring.precision(&value));
            }
            Ok(Outcome::ok(doc))
        }
        Command::HomCheck { family, params, samples } => hom_check(ring, *family, params.as_deref(), *samples, seed),
        Command::CocycleMake { n, degree, no_omega } => {
            if *n == 0 {
                return Err(Error::Input("--n must be positive".into()));
            }
            let mut rng = sample_rng(derive_seed(seed, "cocycle-make"), 0);
            let mut c = ClassifiedCocycle::random(ring, *n, *degree, &mut rng);
            if *no_omega {
                c.omega = GmHomParams::new(ring, Vec::new());
            }
            Ok(Outcome::ok(c.to_json(ring)))
        }
        Command::CocycleCheck { map, n, samples } => {
            let (f, n) = payload::delta_map(ring, &payload::read_json(map)?, *n)?;
            let report = cocycle_check(&f, n, *samples, seed)?;
            Ok(Outcome {
                doc: report.to_json(ring),
                pass: report.pass,
            })
        }
        Command::CocycleRecover { map, n, samples, omega_points } => {
            let (f, n) = payload::delta_map(ring, &payload::read_json(map)?, *n)?;
            let rec = recover(&f, n, seed)?;
            let omega: Vec<Value> = (0..*omega_points)
                .map(|i| {
                    let a = ring.random_unit(&mut sample_rng(derive_seed(seed, "omega-points"), i as u64));
                    rec.omega_eval(&a)
                        .map(|w| json!({"a": ring.to_json(&a), "value": ring.to_json(&w)}))
                })
                .collect::<Result<_>>()?;
            let mut failure = None;
            for i in 0..*samples {
                let g = ring.mat_random_gl(n, &mut sample_rng(derive_seed(seed, "roundtrip"), i as u64));
                let (lhs, rhs) = (f.call(&g)?, rec.eval(&g)?);
                if !ring.mat_equal(&lhs, &rhs) {
                    failure = Some(json!({
                        "sample": i,
                        "g": ring.mat_to_json(&g),
                        "original": ring.mat_to_json(&lhs),
                        "recovered": ring.mat_to_json(&rhs),
                    }));
                    break;
                }
            }
            let pass = failure.is_none();
            let mut roundtrip = json!({"pass": pass, "samples": samples});
            if let Some(ce) = failure {
                roundtrip["counterexample"] = ce;
            }
            Ok(Outcome {
                doc: json!({"v": ring.mat_to_json(&rec.v), "omega": omega, "roundtrip": roundtrip}),
                pass,
            })
        }
        Command::CoherenceCheck { map, subgroup, u, n, samples } => {
            let (f, n) = payload::delta_map(ring, &payload::read_json(map)?, *n)?;
            let subgroup = match subgroup {
                SubgroupArg::Torus => Subgroup::Torus,
                SubgroupArg::SlN => Subgroup::SlN,
                SubgroupArg::Borel => Subgroup::Borel,
                SubgroupArg::ConjugatedTorus => Subgroup::ConjugatedTorus(match u {
                    Some(text) => payload::matrix(ring, &payload::read_json(text)?)?,
                    None => random_constant_matrix(ring, n, &mut sample_rng(derive_seed(seed, "conjugator"), 0)),
                }),
            };
            let report = coherence_check(&f, n, &subgroup, *samples, seed)?;
            let mut doc = report.to_json(ring);
            doc["subgroup"] = json!(subgroup.name());
            if let Subgroup::ConjugatedTorus(u) = &subgroup {
                doc["u"] = ring.mat_to_json(u);
            }
            Ok(Outcome {
                doc,
                pass: report.pass,
            })
        }
        Command::Decompose { matrix, precondition } => {
            let x = payload::matrix(ring, &payload::read_json(matrix)?)?;
            if *precondition {
                let (word, pre) = decompose_preconditioned(ring, &x, seed)?;
                let mut doc = word.to_json(ring);
                doc["w_left"] = json!(pre.w_left);
                doc["w_right"] = json!(pre.w_right);
                doc["attempts"] = json!(pre.attempts);
                Ok(Outcome::ok(doc))
            } else {
                Ok(Outcome::ok(decompose(ring, &x)?.to_json(ring)))
            }
        }
        Command::Reconstruct { word } => {
            let word = DecompositionWord::from_json(ring, &payload::read_json(word)?)?;
            Ok(Outcome::ok(ring.mat_to_json(&reconstruct(ring, &word)?)))
        }
        Command::RingInfo | Command::Teich { .. } | Command::DeltaEval { .. } | Command::Selftest { .. } => {
            unreachable!("handled before backend dispatch")
        }
    }
}

fn hom_check<R: DeltaRing>(
    ring: &R,
    family: Family,
    params: Option<&str>,
    samples: usize,
    seed: u64,
) -> Result<Outcome> {
    let params = match (family, params) {
        (Family::Psi, _) => Value::Null,
        (_, Some(text)) => payload::read_json(text)?,
        (_, None) => return Err(Error::Input("this family needs a parameter object".into())),
    };
    let (report, law) = match family {
        Family::Ga => {
            let p = GaHomParams::from_json(ring, &params)?;
            (check_hom(ring, |a| ga_hom(ring, &p, a), HomLaw::Additive, samples, seed)?, HomLaw::Additive)
        }
        Family::Gm => {
            let p = GmHomParams::from_json(ring, &params)?;
            let law = HomLaw::MultiplicativeToAdditive;
            (check_hom(ring, |a| gm_hom(ring, &p, a), law, samples, seed)?, law)
        }
        Family::Psi => {
            let law = HomLaw::MultiplicativeToAdditive;
            (check_hom(ring, |a| psi(ring, a), law, samples, seed)?, law)
        }
        Family::Twisted => {
            let p = TwistedCocycleParams::from_json(ring, &params)?;
            let law = HomLaw::Twisted(p.s);
            (check_hom(ring, |a| twisted_cocycle(ring, &p, a), law, samples, seed)?, law)
        }
    };
    let mut doc = report.to_json(ring);
    doc["law"] = json!(law.name());
    Ok(Outcome {
        doc,
        pass: report.pass,
    })
}
