use crate::args::*;
use crate::config::{HelixFile, PolymerFile, PotentialFile};
use crate::output::{write_atomic, ExperimentManifest};
use anyhow::{bail, Context, Result};
use qcmc_core::chirotope::{self, PartialChirotope, RealizationRequest};
use qcmc_core::distgeo::{self, CenteringSchedule, VibrantParams, VisitOrder};
use qcmc_core::graph::{self, Conformation, GraphDocument};
use qcmc_core::jumpproc::{self, ProcessConfig, ProcessKind};
use qcmc_core::lp::{self, Status};
use qcmc_core::metropolis;
use qcmc_core::molecular::{self, PolymerConfig};
use qcmc_core::pipeline::{self, PipelineConfig};
use qcmc_core::rng::SimRng;
use qcmc_core::{bridge, entropy, molecules, tables};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// A bad combination of arguments detected after parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn is_usage_error(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.is::<UsageError>() || matches!(c.downcast_ref::<qcmc_core::Error>(), Some(qcmc_core::Error::InvalidConfig(_)))
    })
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Writes the output files, then the manifest next to the first one.
fn emit(command: &str, argv: &[String], params: &impl serde::Serialize, seeds: Vec<u32>, files: &[(&Path, &str)]) -> Result<()> {
    for (path, text) in files {
        write_atomic(path, text)?;
    }
    let paths: Vec<&Path> = files.iter().map(|f| f.0).collect();
    ExperimentManifest::new(command, argv, params, seeds, &paths)?.write()
}

/// Writes `text` to `out` with a manifest, or to stdout without one.
fn emit_or_print(command: &str, argv: &[String], params: &impl serde::Serialize, seeds: Vec<u32>, out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => emit(command, argv, params, seeds, &[(path, text)]),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn dispatch(cli: Cli, argv: &[String]) -> Result<()> {
    match cli.command {
        Command::RngSelftest(a) => rng_selftest(&a),
        Command::Bridge(BridgeCommand::Sample(a)) => bridge_sample(&a, argv),
        Command::Process(ProcessCommand::Run(a)) => process_run(&a, argv),
        Command::Table(TableCommand::Reproduce(a)) => table_reproduce(&a, argv),
        Command::Entropy(EntropyCommand::Slit(a)) => entropy_slit(&a),
        Command::Embed(a) => embed(&a, argv),
        Command::Realize(a) => realize(&a, argv),
        Command::Mc(McCommand::Run(a)) => mc_run(&a, argv),
        Command::Mc(McCommand::Pipeline(a)) => mc_pipeline(&a, argv),
        Command::Polymer(PolymerCommand::Demo(a)) => polymer_demo(&a, argv),
        Command::Lp(LpCommand::Solve(a)) => lp_solve(&a),
        Command::Export(a) => export(&a, argv),
        Command::Replay(a) => replay(&a),
    }
}

fn rng_selftest(a: &RngArgs) -> Result<()> {
    let mut rng = SimRng::new(a.seed);
    for _ in 0..10 {
        println!("{}", rng.next_u32());
    }
    Ok(())
}

fn bridge_sample(a: &BridgeArgs, argv: &[String]) -> Result<()> {
    let mut rng = SimRng::new(a.seed);
    let mut text = String::from("sample,n");
    for i in 0..a.dim {
        write!(text, ",x{i}")?;
    }
    text.push('\n');
    for s in 0..a.samples {
        let b = bridge::levy_bridge(a.copies, a.dim, &mut rng)?;
        for n in 0..b.copies() {
            write!(text, "{s},{n}")?;
            for x in b.point(n) {
                write!(text, ",{x:?}")?;
            }
            text.push('\n');
        }
    }
    emit_or_print("bridge sample", argv, a, vec![a.seed], a.out.as_deref(), &text)
}

fn process_run(a: &ProcessArgs, argv: &[String]) -> Result<()> {
    let kind = match a.kind {
        KindArg::N => ProcessKind::N,
        KindArg::W => ProcessKind::W,
    };
    if a.pair_mode && kind == ProcessKind::W {
        return Err(usage("--pair-mode is available for --kind N only"));
    }
    let mut config = if a.pair_mode {
        ProcessConfig::pair_mode(a.copies, a.alpha)
    } else {
        ProcessConfig::new(kind, a.copies, a.offset, a.alpha)
    };
    if let Some(d) = a.delta {
        config = config.with_delta(d);
    }
    config.validate()?;
    let stats = jumpproc::run(&config, a.jumps, a.seed)?;
    let ratios = jumpproc::derived_ratios(&stats, &config).ok();
    let fmt = |x: Option<f64>| x.map_or_else(|| "NaN".to_string(), |v| format!("{v:?}"));
    let text = format!(
        "K,j,alpha,J,F,R,A,B,C,r1,r2\n{},{},{:?},{},{},{},{:?},{:?},{:?},{},{}\n",
        config.copies,
        config.offset,
        config.alpha,
        stats.jumps,
        stats.forward_flips,
        stats.backward_flips,
        stats.a_mean,
        stats.b_mean,
        stats.c_mean(),
        fmt(ratios.map(|r| r.r1)),
        fmt(ratios.map(|r| r.r2)),
    );
    emit_or_print("process run", argv, a, vec![a.seed], a.out.as_deref(), &text)
}

fn table_reproduce(a: &TableArgs, argv: &[String]) -> Result<()> {
    let table = tables::Table::from_number(a.table)?;
    let rows = tables::reproduce(table, a.scale, a.seed)?;
    let mut csv = format!("{}\n", table.header());
    for r in &rows {
        csv.push_str(&tables::csv_line(table, r));
        csv.push('\n');
    }
    let report = tables::comparison_report(table, &rows, a.scale);
    let seeds = (0..rows.len() as u32).map(|i| a.seed.wrapping_add(i)).collect();
    match (&a.out, &a.report) {
        (Some(out), Some(rep)) => emit("table reproduce", argv, a, seeds, &[(out, &csv), (rep, &report)]),
        (Some(out), None) => {
            eprint!("{report}");
            emit("table reproduce", argv, a, seeds, &[(out, &csv)])
        }
        (None, Some(rep)) => {
            print!("{csv}");
            emit("table reproduce", argv, a, seeds, &[(rep, &report)])
        }
        (None, None) => {
            print!("{csv}");
            eprint!("{report}");
            Ok(())
        }
    }
}

fn entropy_slit(a: &SlitArgs) -> Result<()> {
    let est = entropy::slit_relative_entropy(a.q, a.tol)?;
    println!("{:?} {:?}", est.bits, est.error_bound());
    eprintln!(
        "relative entropy {} bits, error estimate {:e} (quadrature {:e}, tails {:e}, {} intervals)",
        est.bits,
        est.error_bound(),
        est.quadrature_error,
        est.tail_bound,
        est.intervals
    );
    Ok(())
}

fn load_graph(path: &Path) -> Result<GraphDocument> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    graph::parse_graph_text(&text).with_context(|| format!("parsing {}", path.display()))
}

fn chirotope_of(doc: &GraphDocument) -> Result<PartialChirotope> {
    Ok(PartialChirotope::from_records(doc.graph.dim() + 1, &doc.chirality)?)
}

/// The document's coordinates if present; otherwise a linear-programming
/// realization of the orientation constraints (three dimensions), or a
/// seeded random cloud scaled to the mean edge length.
fn starting_conformation(doc: &GraphDocument, chi: &PartialChirotope, rng: &mut SimRng) -> Result<Conformation> {
    if let Some(c) = &doc.conformation {
        return Ok(c.clone());
    }
    let g = &doc.graph;
    if !chi.is_empty() && g.dim() == 3 {
        let request = RealizationRequest::from_chirotope(g.vertex_count(), chi)?;
        let mut conf = chirotope::realize_lp(&request)?.conformation;
        pipeline::rescale_to_edges(g, &mut conf);
        return Ok(conf);
    }
    if !chi.is_empty() {
        bail!("a graph with orientation constraints in dimension {} needs starting coordinates", g.dim());
    }
    let edges = g.edges();
    let scale = if edges.is_empty() {
        1.0
    } else {
        edges.iter().map(|e| e.length).sum::<f64>() / edges.len() as f64
    };
    let mut conf = Conformation::zeros(g.vertex_count(), g.dim());
    for u in 0..g.vertex_count() {
        let p: Vec<f64> = (0..g.dim()).map(|_| scale * (2.0 * rng.next_uniform() - 1.0)).collect();
        conf.set_point(u, &p);
    }
    Ok(conf)
}

fn trace_path(a: &EmbedArgs) -> PathBuf {
    a.trace.clone().unwrap_or_else(|| {
        let mut name = a.out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".trace.csv");
        a.out.with_file_name(name)
    })
}

fn embed(a: &EmbedArgs, argv: &[String]) -> Result<()> {
    let params = VibrantParams::new(a.noise, a.cap)?;
    let doc = load_graph(&a.graph)?;
    let chi = chirotope_of(&doc)?;
    let g = &doc.graph;
    let mut rng = SimRng::new(a.seed);
    let mut conf = starting_conformation(&doc, &chi, &mut rng)?;
    let schedule = CenteringSchedule {
        order: VisitOrder::Random,
        max_steps: a.max_steps,
        ..CenteringSchedule::default()
    };
    let trace = distgeo::constrained_centering(g, &mut conf, &schedule, &chi, &mut rng);
    let mut in_space = graph::in_restricted_space(g, &conf, &doc.radii);
    println!("centering: {} steps, final potential {:e}, converged {}", trace.steps.len(), trace.final_potential(), trace.converged);
    if !in_space {
        let report = distgeo::anneal_and_settle(g, &mut conf, &doc.radii, &params, &chi, &mut rng, &a.stages, a.max_steps)?;
        in_space = report.in_restricted_space;
        println!("vibrant centering: {} steps over {} stages", report.total_steps(), report.stages.len());
    }
    println!("in restricted space: {in_space}");
    let trace_out = trace_path(a);
    emit("embed", argv, a, vec![a.seed], &[(&a.out, &conf.to_csv()), (&trace_out, &trace.to_csv())])
}

fn realize(a: &RealizeArgs, argv: &[String]) -> Result<()> {
    let doc = load_graph(&a.graph)?;
    if doc.graph.dim() != 3 {
        return Err(usage(format!("realize needs a 3-dimensional graph, got dim {}", doc.graph.dim())));
    }
    let chi = PartialChirotope::from_records(4, &doc.chirality)?;
    let violations = chi.gp_violations();
    if let Some((sigma, quad)) = violations.first() {
        eprintln!(
            "warning: {} sign patterns violate the three-term relation, first at {sigma:?} with {quad:?}",
            violations.len()
        );
    }
    let request = RealizationRequest::from_chirotope(doc.graph.vertex_count(), &chi)?;
    let r = chirotope::realize_lp(&request)?;
    println!("epsilon {:?}", r.epsilon);
    println!("min_det {:?}", r.min_det);
    emit("realize", argv, a, Vec::new(), &[(&a.out, &r.conformation.to_csv())])
}

fn mc_run(a: &McArgs, argv: &[String]) -> Result<()> {
    let pot = match &a.potential {
        Some(p) => PotentialFile::load(p)?,
        None => PotentialFile::default(),
    };
    let model = pot.model(a.kt)?;
    let params = VibrantParams::new(pot.noise.unwrap_or(1.1), pot.cap.unwrap_or(10.0))?;
    let doc = load_graph(&a.graph)?;
    let chi = chirotope_of(&doc)?;
    let mut rng = SimRng::new(a.seed);
    let mut conf = starting_conformation(&doc, &chi, &mut rng)?;
    let report = metropolis::mc_run(&doc.graph, &mut conf, &doc.radii, &model, &params, &chi, a.sweeps, rng.next_u32());
    println!(
        "steps {}, accepted {}, rejected {}, fallback {}, acceptance rate {:?}",
        report.steps,
        report.accepted,
        report.rejected,
        report.fallback_moves,
        report.acceptance_rate()
    );
    match report.settled_from() {
        Some(s) => println!("in restricted space from sweep {s}"),
        None => println!("not in restricted space at the end"),
    }
    emit("mc run", argv, a, vec![a.seed], &[(&a.out_conf, &conf.to_csv()), (&a.out_report, &report.to_csv())])
}

fn mc_pipeline(a: &PipelineArgs, argv: &[String]) -> Result<()> {
    let file = match &a.helix_config {
        Some(p) => HelixFile::load(p)?,
        None => HelixFile::default(),
    };
    let mut doc = molecules::alanine_helix(&file.helix())?;
    doc.conformation = None;
    let mut config = PipelineConfig::new(metropolis::PotentialModel::hooke(file.kt)?);
    config.stages = file.stages.clone();
    config.steps_per_stage = file.steps_per_stage;
    config.sweeps = file.sweeps;
    let report = pipeline::run_pipeline(&doc, &config, a.seed)?;
    println!("realization min det {:?}", report.realized_min_det);
    println!("vibrant centering steps {}", report.anneal.total_steps());
    println!("acceptance rate {:?}", report.mc.acceptance_rate());
    println!("in restricted space {}", report.in_restricted_space);
    println!("chirality holds {}", report.chirality_holds);
    #[derive(serde::Serialize)]
    struct Params<'a> {
        args: &'a PipelineArgs,
        helix: &'a HelixFile,
    }
    emit(
        "mc pipeline",
        argv,
        &Params { args: a, helix: &file },
        vec![a.seed],
        &[(&a.out_conf, &report.conformation.to_csv()), (&a.out_report, &report.mc.to_csv())],
    )
}

fn polymer_demo(a: &PolymerArgs, argv: &[String]) -> Result<()> {
    let mut config = PolymerConfig::default();
    if let Some(p) = &a.config {
        PolymerFile::load(p)?.apply(&mut config);
    }
    if let Some(v) = a.atoms {
        config.atoms = v;
    }
    if let Some(v) = a.copies {
        config.copies = v;
    }
    if let Some(v) = a.sweeps {
        config.sweeps = v;
    }
    if a.inner_steps.is_some() {
        config.inner_steps = a.inner_steps;
    }
    if let Some(v) = a.alpha {
        config.alpha = v;
    }
    config.fix_last |= a.fix_last;
    config.flip |= a.flip;
    if a.seeds == 0 {
        return Err(usage("--seeds must be at least 1"));
    }
    let seeds: Vec<u32> = (0..a.seeds).map(|i| a.seed.wrapping_add(i)).collect();
    let results = molecular::polymer_demo(&config, &seeds)?;
    let text = molecular::polymer_csv(&results);
    emit_or_print("polymer demo", argv, a, seeds, a.out.as_deref(), &text)
}

fn lp_solve(a: &LpArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.file).with_context(|| format!("reading {}", a.file.display()))?;
    let problem = lp::parse_lp_text(&text).with_context(|| format!("parsing {}", a.file.display()))?;
    let out = lp::solve(&problem)?;
    let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
    match out.status {
        Status::Optimal => {
            println!("status optimal");
            println!("objective {:?}", out.objective);
            println!("x {}", join(&out.x));
            println!("y {}", join(&out.y));
            println!("pivots {}", out.pivots);
            Ok(())
        }
        Status::Infeasible => {
            println!("status infeasible");
            bail!("the linear program is infeasible")
        }
        Status::Unbounded => {
            println!("status unbounded");
            bail!("the linear program is unbounded")
        }
    }
}

fn export(a: &ExportArgs, argv: &[String]) -> Result<()> {
    let doc = match a.instance {
        Instance::K4 => molecules::tetrahedron(),
        Instance::Jam => molecules::jam_instance(),
        Instance::Thr5 => molecules::threonine_chain(5, 0.3)?,
        Instance::Ala7 => {
            let mut d = molecules::alanine_helix(&HelixFile::default().helix())?;
            d.conformation = None;
            d
        }
    };
    emit("export", argv, a, Vec::new(), &[(&a.out, &graph::write_graph_text(&doc))])
}

fn replay(a: &ReplayArgs) -> Result<()> {
    let m = ExperimentManifest::read(&a.manifest)?;
    if m.argv.first().map(String::as_str) == Some("replay") {
        return Err(usage("a manifest cannot replay another replay"));
    }
    match crate::run(&m.argv) {
        0 => Ok(()),
        code => bail!("replayed command `{}` exited with code {code}", m.command),
    }
}
