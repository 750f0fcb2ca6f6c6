use std::path::PathBuf;

use cubicate::complexes::{subdivide_word, SquareComplex};
use cubicate::graph::LabeledGraph;
use cubicate::noise::{
    build_malnormal_pair, check_isolated_and_gen_malnormal, check_malnormal, compute_k,
    generate_noise_word, MalnormalReport, NoiseInput, SubgroupGraph,
};
use cubicate::rips::{
    assemble_gamma, per_cone_c6_and_cd, verify_kernel_normality, verify_quotient_map,
    verify_torsion_free_proxy, RipsInput, YKind,
};
use cubicate::smallcancel::{
    check_b6, check_c_p, check_c_prime, enumerate_pieces, hyperbolicity_certificate, Cone,
    CubicalPresentation,
};
use cubicate::wallspace::{antipodal_walls, sageev_dual, wall_equivalence, Wall};
use cubicate::{Alphabet, Error, FreeWord, Rational};
use serde::Serialize;
use serde_json::{json, Value};

use crate::input::{parse_input, Input, InputError};

pub const TOOL: &str = "cubicate";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Check,
    Noise,
    Malnormal,
    Rips,
    Walls,
    Dual,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub input: PathBuf,
    #[serde(serialize_with = "as_text")]
    pub alpha: Rational,
    /// Longest β word tried by the malnormal pair search.
    pub budget_beta: usize,
    /// Word length for conjugator, isolation and root searches.
    pub budget_words: usize,
    /// Largest dual complex built.
    pub max_vertices: usize,
    /// C(p) threshold for `check`.
    pub p: usize,
    pub seed: u64,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command, input: impl Into<PathBuf>) -> Self {
        RunConfig {
            command,
            input: input.into(),
            alpha: Rational::from_integer(16),
            budget_beta: 12,
            budget_words: 8,
            max_vertices: 1 << 16,
            p: 6,
            seed: 0,
            format: Format::Json,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.alpha < Rational::from_integer(1) {
            return Err(format!("alpha {} is below 1", self.alpha));
        }
        if self.budget_beta == 0 || self.budget_words == 0 || self.max_vertices == 0 {
            return Err("budgets must be at least 1".into());
        }
        if self.format == Format::Dot && self.command != Command::Dual {
            return Err("dot output is only available for `dual`".into());
        }
        Ok(())
    }
}

fn as_text<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(r)
}

/// `16`, `33/2`.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let bad = || format!("`{s}` is not a positive rational");
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (
            n.trim().parse::<u64>().map_err(|_| bad())?,
            d.trim().parse::<u64>().map_err(|_| bad())?,
        ),
        None => (s.trim().parse::<u64>().map_err(|_| bad())?, 1),
    };
    if n == 0 || d == 0 {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    /// 0 passed, 1 a verification failed, 2 bad input.
    pub code: i32,
    pub output: String,
}

/// A finished command: its report and every violated condition.
struct Report {
    body: Value,
    violations: Vec<String>,
    dot: Option<String>,
}

enum Failure {
    Input(String),
    /// The run stopped on a failed verification.
    Verification(String),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::VerificationFailed(_) | Error::BudgetExceeded(_) | Error::NotMalnormal(_) => {
                Failure::Verification(e.to_string())
            }
            _ => Failure::Input(e.to_string()),
        }
    }
}

pub fn run(config: &RunConfig) -> Outcome {
    if let Err(e) = config.validate() {
        return Outcome {
            code: 2,
            output: format!("error: {e}\n"),
        };
    }
    let result = parse_input(&config.input)
        .map_err(Failure::from)
        .and_then(|input| dispatch(config, &input));
    let (report, violations, dot) = match result {
        Ok(r) => (r.body, r.violations, r.dot),
        Err(Failure::Input(e)) => {
            return Outcome {
                code: 2,
                output: format!("error: {e}\n"),
            }
        }
        Err(Failure::Verification(e)) => (json!({ "failure": e }), vec![e], None),
    };
    let passed = violations.is_empty();
    let code = if passed { 0 } else { 1 };
    let output = match config.format {
        Format::Dot => dot.unwrap_or_default(),
        Format::Json => {
            let envelope = json!({
                "tool": TOOL,
                "version": VERSION,
                "command": config.command,
                "config": config,
                "report": report,
                "violations": violations,
                "passed": passed,
            });
            serde_json::to_string_pretty(&envelope).expect("json") + "\n"
        }
        Format::Text => text_report(config, &report, &violations),
    };
    Outcome { code, output }
}

fn text_report(config: &RunConfig, report: &Value, violations: &[String]) -> String {
    let name = serde_json::to_value(config.command).unwrap();
    let mut s = format!(
        "{TOOL} {} {}: {}\n",
        name.as_str().unwrap_or(""),
        config.input.display(),
        if violations.is_empty() {
            "passed"
        } else {
            "FAILED"
        }
    );
    for v in violations {
        s += &format!("  violated: {v}\n");
    }
    if let Value::Object(m) = report {
        for (k, v) in m {
            if let Some(x) = v
                .as_bool()
                .map(|b| b.to_string())
                .or_else(|| v.as_u64().map(|n| n.to_string()))
            {
                s += &format!("  {k}: {x}\n");
            }
        }
    }
    s
}

fn dispatch(config: &RunConfig, input: &Input) -> Result<Report, Failure> {
    let wrong = |want: &str| {
        Failure::Input(format!(
            "`{}` needs a {want} file, got {}",
            name(config.command),
            input.kind()
        ))
    };
    match (config.command, input) {
        (Command::Check, Input::Presentation(p)) => {
            let cones = p
                .relators
                .iter()
                .map(|r| (0, r.clone()))
                .collect::<Vec<_>>();
            check(
                config,
                &p.alphabet,
                &LabeledGraph::bouquet(p.alphabet.rank()),
                &cones,
            )
        }
        (Command::Check, Input::Graph(g)) => check(config, &g.alphabet, &g.graph, &g.cones),
        (Command::Check, _) => Err(wrong("presentation or graph")),
        (Command::Noise, Input::Noise(n)) => {
            let rank = n.alphabet.rank();
            let subgroup = SubgroupGraph::new(vec![n.lambda1.clone(), n.lambda2.clone()], rank)?;
            let recipe = generate_noise_word(&NoiseInput {
                index: 0,
                subgroup,
                gamma: n.gamma.clone(),
                lambda1: n.lambda1.clone(),
                lambda2: n.lambda2.clone(),
                k: n.k,
                alpha: config.alpha,
                seed: config.seed,
            })?;
            let al = &n.alphabet;
            Ok(Report {
                body: json!({
                    "sigma": al.format_word(&recipe.sigma),
                    "sigma_prime": al.format_word(&recipe.sigma_prime),
                    "length": recipe.sigma.len(),
                    "self_piece": recipe.self_piece,
                    "recipe": recipe,
                }),
                violations: Vec::new(),
                dot: None,
            })
        }
        (Command::Noise, _) => Err(wrong("noise")),
        (Command::Malnormal, Input::Malnormal(m)) => malnormal(config, m),
        (Command::Malnormal, _) => Err(wrong("malnormal")),
        (Command::Rips, Input::Presentation(p)) => rips(config, p),
        (Command::Rips, _) => Err(wrong("presentation")),
        (Command::Walls, Input::Presentation(p)) => {
            let cones = p
                .relators
                .iter()
                .map(|r| (0, r.clone()))
                .collect::<Vec<_>>();
            walls(config, &LabeledGraph::bouquet(p.alphabet.rank()), &cones)
        }
        (Command::Walls, Input::Graph(g)) => walls(config, &g.graph, &g.cones),
        (Command::Walls, _) => Err(wrong("presentation or graph")),
        (Command::Dual, Input::Wallspace(ws)) => {
            let d = sageev_dual(ws, config.max_vertices)?;
            Ok(Report {
                body: json!({
                    "vertices": d.vertices.len(),
                    "edges": d.edges.len(),
                    "squares": d.squares.len(),
                    "connected": d.is_connected(),
                    "dual": d,
                }),
                violations: Vec::new(),
                dot: Some(d.to_dot()),
            })
        }
        (Command::Dual, _) => Err(wrong("wallspace")),
    }
}

fn name(c: Command) -> String {
    serde_json::to_value(c)
        .unwrap()
        .as_str()
        .unwrap_or("")
        .to_string()
}

fn presentation_over(
    base: &LabeledGraph,
    cones: &[(usize, FreeWord)],
    alpha: Rational,
) -> cubicate::Result<CubicalPresentation> {
    let cs = cones
        .iter()
        .map(|(v, w)| Cone::cycle_over(w, base, *v))
        .collect::<cubicate::Result<Vec<_>>>()?;
    CubicalPresentation::new(SquareComplex::from_graph(base.clone()), cs, alpha)
}

/// Cones on the subdivided base, so every cycle is even.
fn subdivided(
    base: &LabeledGraph,
    cones: &[(usize, FreeWord)],
    rank: usize,
    alpha: Rational,
) -> cubicate::Result<CubicalPresentation> {
    let sub = SquareComplex::from_graph(base.clone()).subdivide();
    let words: Vec<(usize, FreeWord)> = cones
        .iter()
        .map(|(v, w)| (*v, subdivide_word(w, rank)))
        .collect();
    let cs = words
        .iter()
        .map(|(v, w)| Cone::cycle_over(w, sub.graph(), *v))
        .collect::<cubicate::Result<Vec<_>>>()?;
    CubicalPresentation::new(sub, cs, alpha)
}

fn check(
    config: &RunConfig,
    al: &Alphabet,
    base: &LabeledGraph,
    cones: &[(usize, FreeWord)],
) -> Result<Report, Failure> {
    let p = presentation_over(base, cones, config.alpha)?;
    let e = enumerate_pieces(&p)?;
    let c_prime = check_c_prime(&p, &e, config.alpha);
    let c_p = check_c_p(&p, &e, config.p);
    let hyperbolicity = hyperbolicity_certificate(&p, &e);
    let ps = subdivided(base, cones, base.label_rank(), config.alpha)?;
    let es = enumerate_pieces(&ps)?;
    let walls: Vec<Vec<Wall>> = ps
        .cones
        .iter()
        .map(|c| antipodal_walls(c.graph.num_edges()))
        .collect::<cubicate::Result<_>>()?;
    let b6 = check_b6(&ps, &es, &walls)?;

    let mut violations = Vec::new();
    // The longest failing piece of each cone.
    let mut worst: Vec<&cubicate::smallcancel::CPrimeFailure> = Vec::new();
    for f in &c_prime.failures {
        match worst.iter_mut().find(|w| w.cone == f.cone) {
            Some(w) if w.piece_length < f.piece_length => *w = f,
            Some(_) => {}
            None => worst.push(f),
        }
    }
    for f in worst {
        violations.push(format!(
            "C'(1/{}): cone {} has a piece of length {} against |σ| = {}, and |piece| < |σ|/α fails",
            config.alpha, f.cone, f.piece_length, f.cone_length
        ));
    }
    for &i in &c_p.failures {
        violations.push(format!(
            "C({}): cone {i} is a union of fewer than {} pieces",
            config.p, config.p
        ));
    }
    for it in b6.items.iter().filter(|it| !it.passed) {
        violations.push(format!("B(6) item {}: {}", it.item, it.detail));
    }
    let cone_rows: Vec<Value> = cones
        .iter()
        .zip(&e.report.cones)
        .map(|((v, w), st)| {
            json!({ "vertex": v, "word": al.format_word(w), "length": st.length, "max_piece": st.max_piece, "min_cover": st.min_cover })
        })
        .collect();
    Ok(Report {
        body: json!({
            "cones": cone_rows,
            "pieces": e.report,
            "c_prime": c_prime,
            "c_p": c_p,
            "b6": b6,
            "hyperbolicity": hyperbolicity,
        }),
        violations,
        dot: None,
    })
}

fn witness_text(al: &Alphabet, r: &MalnormalReport) -> Vec<Value> {
    r.witnesses
        .iter()
        .map(
            |w| json!({ "i": w.i, "j": w.j, "g": al.format_word(&w.g), "w": al.format_word(&w.w) }),
        )
        .collect()
}

fn malnormal(config: &RunConfig, m: &crate::input::MalnormalSpec) -> Result<Report, Failure> {
    let al = &m.alphabet;
    let rank = al.rank();
    let mut body = serde_json::Map::new();
    let mut violations = Vec::new();
    if !m.subgroups.is_empty() {
        let coll: Vec<SubgroupGraph> = m
            .subgroups
            .iter()
            .map(|g| SubgroupGraph::new(g.clone(), rank))
            .collect::<cubicate::Result<_>>()?;
        let rep = check_malnormal(&coll);
        if let Some(w) = rep.witnesses.first() {
            violations.push(format!(
                "malnormality: H_{}^g ∩ H_{} contains {} for g = {}",
                w.i,
                w.j,
                al.format_word(&w.w),
                al.format_word(&w.g)
            ));
        }
        let bound = if rep.passed {
            Some(compute_k(&coll)?)
        } else {
            None
        };
        body.insert(
            "collection".into(),
            json!({ "passed": rep.passed, "witnesses": witness_text(al, &rep), "bound": bound }),
        );
    }
    if !m.h.is_empty() {
        let pair = build_malnormal_pair(&m.h, rank, Some(config.budget_beta))?;
        let j = SubgroupGraph::new(vec![pair.a.clone(), pair.b.clone()], rank)?;
        let check = check_malnormal(std::slice::from_ref(&j));
        let isolation = check_isolated_and_gen_malnormal(&j, config.budget_words);
        if !check.passed {
            violations
                .push("malnormality: the constructed pair fails the fiber product check".into());
        }
        let words = |ws: &[FreeWord]| ws.iter().map(|w| al.format_word(w)).collect::<Vec<_>>();
        body.insert(
            "pair".into(),
            json!({
                "a": al.format_word(&pair.a),
                "b": al.format_word(&pair.b),
                "betas": words(&pair.betas),
                "betas_prime": words(&pair.betas_prime),
                "tested": pair.tested,
                "malnormal": check.passed,
                "isolated": isolation.isolated,
                "generator_malnormal": isolation.generator_malnormal,
                "search_depth": isolation.budget,
            }),
        );
    }
    Ok(Report {
        body: Value::Object(body),
        violations,
        dot: None,
    })
}

fn rips(config: &RunConfig, p: &crate::input::PresentationSpec) -> Result<Report, Failure> {
    let mut input = RipsInput::new(
        p.alphabet.names().to_vec(),
        p.relators.clone(),
        p.rank,
        config.alpha,
    )?;
    input.seed = config.seed;
    let g = assemble_gamma(&input)?;
    let al = g.alphabet();
    let quotient = verify_quotient_map(&g);
    let kernel = verify_kernel_normality(&g);
    let torsion = verify_torsion_free_proxy(&g.relators);
    let cd = per_cone_c6_and_cd(&g, 1)?;
    let mut violations = Vec::new();
    if !quotient.passed {
        violations.push("quotient map: erasing the x's does not give the relators of Q".into());
    }
    if !kernel.passed {
        violations
            .push("kernel normality: a conjugate of an x does not rewrite to an x-word".into());
    }
    if !torsion.passed {
        violations.push("torsion: a relator is a proper power".into());
    }
    for c in cd.cones.iter().filter(|c| !c.passed) {
        violations.push(format!(
            "C(6) fails for the cone presentation of relator {}",
            c.cone
        ));
    }
    let kind = |k: &YKind| match *k {
        YKind::Relator { l } => format!("r{}", l + 1),
        YKind::Conjugate { i, j } => {
            format!("{} x{} {}'", al.name(i as u32), j + 1, al.name(i as u32))
        }
        YKind::InverseConjugate { i, j } => {
            format!("{}' x{} {}", al.name(i as u32), j + 1, al.name(i as u32))
        }
    };
    let relators: Vec<Value> = g
        .y_words
        .iter()
        .zip(&g.relators)
        .zip(&g.noise)
        .map(|((y, r), n)| {
            json!({
                "y": kind(&y.kind),
                "subgroup": g.subgroups[y.subgroup].iter().map(|w| al.format_word(w)).collect::<Vec<_>>(),
                "length": r.len(),
                "self_piece": n.self_piece,
                "relator": al.format_word(r),
            })
        })
        .collect();
    let rewrites: Vec<Value> = kernel
        .rewrites
        .iter()
        .map(|r| json!({ "conjugate": al.format_word(&r.conjugate), "in_x": r.in_x, "length": r.rewritten.len() }))
        .collect();
    Ok(Report {
        body: json!({
            "generators": g.generators,
            "relator_count": g.relators.len(),
            "relators": relators,
            "bound": g.bound,
            "noise_alpha": g.noise_alpha,
            "certificates": g.certificates,
            "quotient": {
                "passed": quotient.passed,
                "images": quotient.images.iter().map(|w| al.format_word(w)).collect::<Vec<_>>(),
            },
            "kernel": { "passed": kernel.passed, "rewrites": rewrites, "normal_generators": kernel.kernel_generators },
            "torsion": torsion,
            "cd": cd,
        }),
        violations,
        dot: None,
    })
}

fn walls(
    config: &RunConfig,
    base: &LabeledGraph,
    cones: &[(usize, FreeWord)],
) -> Result<Report, Failure> {
    let ps = subdivided(base, cones, base.label_rank(), config.alpha)?;
    let walls: Vec<Vec<Wall>> = ps
        .cones
        .iter()
        .map(|c| antipodal_walls(c.graph.num_edges()))
        .collect::<cubicate::Result<_>>()?;
    let mut violations = Vec::new();
    for (i, ws) in walls.iter().enumerate() {
        let n = ps.cones[i].graph.num_vertices();
        for (k, w) in ws.iter().enumerate() {
            if let Err(why) = w.check_axioms(n) {
                violations.push(format!("wall axioms: wall {k} of cone {i}: {why}"));
            }
        }
    }
    let eq = wall_equivalence(&ps, &walls)?;
    let rows: Vec<Value> = walls
        .iter()
        .enumerate()
        .map(|(i, ws)| json!({ "cone": i, "length": ps.cones[i].graph.num_edges(), "walls": ws.len() }))
        .collect();
    Ok(Report {
        body: json!({ "cones": rows, "equivalence": eq, "walls": walls }),
        violations,
        dot: None,
    })
}
