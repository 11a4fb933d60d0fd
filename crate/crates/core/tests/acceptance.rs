//! End-to-end acceptance checks. Runs without the libtest harness so that
//! every check prints one PASS/FAIL line; the process exits non-zero if
//! any check fails.

mod common;

use qcmc_core::bridge;
use qcmc_core::chirotope::{self, PartialChirotope, RealizationRequest};
use qcmc_core::distgeo::{self, CenteringSchedule, Unconstrained, VibrantParams, VisitOrder};
use qcmc_core::entropy;
use qcmc_core::graph::{self, Conformation, RadiusMap, WeightedGraph};
use qcmc_core::jumpproc::{self, ProcessConfig, ProcessKind};
use qcmc_core::lp::{self, Direction, Sense, SimplexProblem, Status};
use qcmc_core::metropolis::{self, PotentialModel};
use qcmc_core::molecular::{self, PolymerConfig};
use qcmc_core::molecules::{self, HelixConfig};
use qcmc_core::pipeline::{self, PipelineConfig};
use qcmc_core::quadrature;
use qcmc_core::SimRng;
use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};
use std::time::{Duration, Instant};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn sample_sd(x: &[f64]) -> f64 {
    let m = mean(x);
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64).sqrt()
}

fn fmt_list(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|v| format!("{v:.4}")).collect();
    format!("[{}]", parts.join(", "))
}

fn ratios(kind: ProcessKind, copies: usize, offset: usize, alpha: f64, jumps: u64, seed: u32) -> (jumpproc::JumpStats, jumpproc::DerivedRatios, Duration) {
    let cfg = ProcessConfig::new(kind, copies, offset, alpha);
    let t = Instant::now();
    let stats = jumpproc::run(&cfg, jumps, seed).unwrap();
    let elapsed = t.elapsed();
    let r = jumpproc::derived_ratios(&stats, &cfg).unwrap();
    (stats, r, elapsed)
}

const SEEDS5: [u32; 5] = [11, 12, 13, 14, 15];

fn table2_w_ratio() -> Verdict {
    let mut r1 = Vec::new();
    let mut slowest = Duration::ZERO;
    for s in SEEDS5 {
        let (_, r, t) = ratios(ProcessKind::W, 32, 2, 2.0 / 3.0, 1_000_000, s);
        r1.push(r.r1);
        slowest = slowest.max(t);
    }
    let ok = r1.iter().all(|v| (v - 1.754).abs() <= 0.10) && slowest < Duration::from_secs(60);
    verdict(ok, format!("r1 per seed {} (target 1.754 ± 0.10), slowest seed {slowest:.2?}", fmt_list(&r1)))
}

fn table1_n_ratio() -> Verdict {
    let mut r2 = Vec::new();
    let mut slowest = Duration::ZERO;
    for s in SEEDS5 {
        let (_, r, t) = ratios(ProcessKind::N, 8, 2, 1.0, 1_000_000, s);
        r2.push(r.r2);
        slowest = slowest.max(t);
    }
    let ok = r2.iter().all(|v| (v - 0.978).abs() <= 0.03) && slowest < Duration::from_secs(300);
    verdict(ok, format!("r2 per seed {} (target 0.978 ± 0.03), slowest seed {slowest:.2?}", fmt_list(&r2)))
}

fn linearity_in_alpha() -> Verdict {
    let jumps = 1_000_000u64;
    let mut slopes = Vec::new();
    for alpha in [1.0, 2.0 / 3.0, 7.0 / 12.0] {
        let a: Vec<f64> = SEEDS5[..3]
            .iter()
            .map(|&s| jumpproc::run(&ProcessConfig::new(ProcessKind::N, 8, 2, alpha), jumps, s).unwrap().a_mean)
            .collect();
        slopes.push(mean(&a) * (1e7 / jumps as f64) / (alpha - 0.5));
    }
    let hi = slopes.iter().cloned().fold(f64::MIN, f64::max);
    let lo = slopes.iter().cloned().fold(f64::MAX, f64::min);
    let spread = (hi - lo) / lo;
    verdict(spread <= 0.08, format!("slopes {} (reference ≈ 2.44e6), relative spread {:.2}% (limit 8%)", fmt_list(&slopes), 100.0 * spread))
}

fn w_ratio_constant_in_offset() -> Verdict {
    let mut r1 = Vec::new();
    for j in [1usize, 2, 4, 8] {
        let (_, r, _) = ratios(ProcessKind::W, 32, j, 2.0 / 3.0, 1_000_000, 20 + j as u32);
        r1.push(r.r1);
    }
    let ok = r1.iter().all(|v| (1.70..=1.88).contains(v));
    verdict(ok, format!("r1 for j = 1, 2, 4, 8: {} (range [1.70, 1.88])", fmt_list(&r1)))
}

fn n_w_correspondence() -> Verdict {
    let n: Vec<f64> = SEEDS5[..3].iter().map(|&s| ratios(ProcessKind::N, 32, 8, 2.0 / 3.0, 1_000_000, s).1.r2).collect();
    let w: Vec<f64> = SEEDS5[..3].iter().map(|&s| ratios(ProcessKind::W, 32, 8, 2.0 / 3.0, 1_000_000, s).1.r2).collect();
    let gap = (mean(&n) - mean(&w)).abs();
    verdict(gap <= 0.06, format!("r2(N) {} vs r2(W) {}, |difference of means| {gap:.4} (limit 0.06)", fmt_list(&n), fmt_list(&w)))
}

fn one_bit_balance() -> Verdict {
    let t = Instant::now();
    let mut bits = Vec::new();
    for q in [1.0, 2.0] {
        bits.push(entropy::slit_relative_entropy(q, 1e-3).unwrap().bits);
    }
    let elapsed = t.elapsed();
    let ok = bits.iter().all(|b| (b - 1.0).abs() <= 1e-3) && elapsed < Duration::from_secs(10);
    verdict(ok, format!("KL for q = 1, 2: {} bits (target 1.000 ± 0.001), {elapsed:.2?}", fmt_list(&bits)))
}

fn bridge_law() -> Verdict {
    let copies = 32;
    let positions = [1usize, 8, 16, 31];
    let mut rng = SimRng::new(77);
    let samples = 100_000;
    let mut sums = [0.0f64; 4];
    let mut squares = [0.0f64; 4];
    for _ in 0..samples {
        let b = bridge::levy_bridge(copies, 1, &mut rng).unwrap();
        for (k, &n) in positions.iter().enumerate() {
            let x = b.point(n)[0];
            sums[k] += x;
            squares[k] += x * x;
        }
    }
    let mut errs = Vec::new();
    for (k, &n) in positions.iter().enumerate() {
        let m = sums[k] / samples as f64;
        let var = (squares[k] - samples as f64 * m * m) / (samples - 1) as f64;
        let expect = (n * (copies - n)) as f64 / (copies * copies) as f64;
        errs.push((var - expect).abs() / expect);
    }
    let ok = errs.iter().all(|&e| e <= 0.03);
    verdict(ok, format!("relative variance errors at n = 1, 8, 16, 31: {} (limit 0.03)", fmt_list(&errs)))
}

/// Center of `u` computed directly as the stiffness-weighted mean of the
/// points at the target distance from each neighbor.
fn oracle_center(g: &WeightedGraph, c: &Conformation, u: usize) -> Vec<f64> {
    let d = c.dim();
    let x = c.point(u);
    let mut acc = vec![0.0; d];
    let mut total = 0.0;
    for nb in g.neighbors(u) {
        let a = c.point(nb.vertex);
        let r = (0..d).map(|i| (x[i] - a[i]).powi(2)).sum::<f64>().sqrt();
        for i in 0..d {
            acc[i] += nb.stiffness * (a[i] + nb.length * (x[i] - a[i]) / r);
        }
        total += nb.stiffness;
    }
    acc.iter().map(|v| v / total).collect()
}

fn oracle_potential(g: &WeightedGraph, c: &Conformation) -> f64 {
    g.edges()
        .iter()
        .map(|e| {
            let r = qcmc_core::geom::dist(c.point(e.u), c.point(e.v));
            0.5 * e.stiffness * (r - e.length).powi(2)
        })
        .sum()
}

fn centering_certificate() -> Verdict {
    let mut rng = SimRng::new(4242);
    let mut worst_rise = f64::NEG_INFINITY;
    let mut unconverged = 0;
    let mut final_disp: f64 = 0.0;
    const CHUNKS: usize = 100;
    for _ in 0..100 {
        let n = 4 + rng.next_index(9);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| 4.0 * rng.next_uniform()).collect()).collect();
        let mut g = WeightedGraph::new(n, 3).unwrap();
        for u in 0..n {
            for v in u + 1..n {
                if v == u + 1 || rng.next_uniform() < 0.4 {
                    let w = qcmc_core::geom::dist(&pts[u], &pts[v]);
                    g.add_edge(u, v, w, 0.5 + 1.5 * rng.next_uniform()).unwrap();
                }
            }
        }
        let start: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| 6.0 * rng.next_uniform()).collect()).collect();
        let mut conf = Conformation::from_points(3, &start).unwrap();
        // run in chunks so each trace can be replayed and dropped; a chunk
        // restarts the stopping test, which only delays stopping
        let sched = CenteringSchedule { order: VisitOrder::Random, max_steps: 1_000_000, stop_displacement: 1e-9 };
        let mut converged = false;
        for _ in 0..CHUNKS {
            let mut replay = conf.clone();
            let trace = distgeo::iterative_centering(&g, &mut conf, &sched, &mut rng);
            let mut prev = oracle_potential(&g, &replay);
            for s in &trace.steps {
                let z = oracle_center(&g, &replay, s.vertex);
                replay.set_point(s.vertex, &z);
                let now = oracle_potential(&g, &replay);
                worst_rise = worst_rise.max(now - prev);
                prev = now;
            }
            if trace.converged {
                converged = true;
                final_disp = final_disp.max(trace.steps.last().map_or(0.0, |s| s.displacement));
                break;
            }
        }
        if !converged {
            unconverged += 1;
        }
    }
    let doc = molecules::tetrahedron();
    let mut k4 = doc.conformation.clone().unwrap();
    let sched = CenteringSchedule { order: VisitOrder::Random, max_steps: 1_000_000, stop_displacement: 1e-9 };
    let t = distgeo::iterative_centering(&doc.graph, &mut k4, &sched, &mut SimRng::new(5));
    let k4_final = graph::hooke_potential(&doc.graph, &k4);
    let ok = worst_rise <= 1e-10 && unconverged == 0 && final_disp < 1e-9 && t.converged && k4_final < 1e-12;
    verdict(
        ok,
        format!(
            "largest potential rise {worst_rise:.3e} (slack 1e-10), graphs not settled within {CHUNKS}e6 steps {unconverged}/100, largest final displacement {final_disp:.2e}, tetrahedron final potential {k4_final:.3e}"
        ),
    )
}

fn jam_reproduction() -> Verdict {
    let doc = molecules::jam_instance();
    let chi = PartialChirotope::from_records(3, &doc.chirality).unwrap();
    let start = doc.conformation.clone().unwrap();
    let mut plain = start.clone();
    let sched = CenteringSchedule { order: VisitOrder::Random, max_steps: 100_000, stop_displacement: 1e-12 };
    let trace = distgeo::constrained_centering(&doc.graph, &mut plain, &sched, &chi, &mut SimRng::new(1));
    let stalled = distgeo::is_stalled(&trace, &doc.graph, &plain, &doc.radii)
        || (trace.converged && !graph::in_restricted_space(&doc.graph, &plain, &doc.radii));
    let mut reached = 0;
    for seed in 1..=8u32 {
        let mut conf = start.clone();
        let mut rng = SimRng::new(seed);
        let rep = distgeo::vibrant_run(&doc.graph, &mut conf, &doc.radii, &VibrantParams::default(), &chi, &mut rng, 1_000_000);
        if rep.in_restricted_space && chi.holds_everywhere(&conf) {
            reached += 1;
        }
    }
    use distgeo::ChiralityCheck;
    verdict(
        stalled && reached >= 7,
        format!(
            "constrained centering stalled: {stalled} (potential {:.4}); vibrant centering reached D(S) for {reached}/8 seeds (need 7); start satisfies the orientation: {}",
            trace.final_potential(),
            chi.holds_everywhere(&start)
        ),
    )
}

fn chirotope_realization() -> Verdict {
    let doc = molecules::threonine_chain(5, 0.3).unwrap();
    let chi = PartialChirotope::from_records(4, &doc.chirality).unwrap();
    let request = RealizationRequest::from_chirotope(doc.graph.vertex_count(), &chi).unwrap();
    let result = chirotope::realize_lp(&request);
    let gp_reject = !chirotope::check_gp_signs([1, 1, -1, 1, 1, 1]);
    let gp_accept = chirotope::check_gp_signs([1, 1, 1, 1, 1, 1]);
    match result {
        Ok(r) => {
            let dets: Vec<f64> = request
                .bases
                .iter()
                .map(|b| chirotope::orientation_det(&r.conformation, b).unwrap())
                .collect();
            let min = dets.iter().cloned().fold(f64::INFINITY, f64::min);
            let ok = min >= r.epsilon - 1e-8 && gp_reject && gp_accept && doc.graph.vertex_count() == 70;
            verdict(
                ok,
                format!(
                    "{} atoms, {} bases, min det {min:.4e} vs epsilon {:.4e}; (+,+,-,+,+,+) rejected {gp_reject}, (+,+,+,+,+,+) accepted {gp_accept}",
                    doc.graph.vertex_count(),
                    request.bases.len(),
                    r.epsilon
                ),
            )
        }
        Err(e) => verdict(false, format!("realization failed: {e}")),
    }
}

fn random_lp(rng: &mut SimRng) -> SimplexProblem {
    let n = 1 + rng.next_index(6);
    let m = 1 + rng.next_index(6);
    let int = |rng: &mut SimRng, lo: i32, hi: i32| (lo + rng.next_index((hi - lo + 1) as usize) as i32) as f64;
    let c = (0..n).map(|_| int(rng, -5, 5)).collect();
    let rows: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| int(rng, -5, 5)).collect()).collect();
    let b = (0..m).map(|_| int(rng, -5, 10)).collect();
    let sense = if rng.next_uniform() < 0.5 { Sense::Max } else { Sense::Min };
    let dir = if rng.next_uniform() < 0.5 { Direction::LessEq } else { Direction::GreaterEq };
    SimplexProblem::new(sense, dir, c, &rows, b).unwrap()
}

fn lp_soundness() -> Verdict {
    let mut rng = SimRng::new(9001);
    let mut mismatches = 0;
    let mut worst_gap: f64 = 0.0;
    let mut optimal = 0;
    for _ in 0..200 {
        let p = random_lp(&mut rng);
        let out = lp::solve(&p).unwrap();
        let (status, value) = common::vertex_oracle(&p);
        if out.status != status {
            mismatches += 1;
            continue;
        }
        if status == Status::Optimal {
            optimal += 1;
            if (out.objective - value).abs() > 1e-7 * (1.0 + value.abs()) {
                mismatches += 1;
            }
            let dual: f64 = p.rhs.iter().zip(&out.y).map(|(b, y)| b * y).sum();
            worst_gap = worst_gap.max((dual - out.objective).abs());
        }
    }
    verdict(
        mismatches == 0 && worst_gap <= 1e-8,
        format!("{mismatches} mismatches against vertex enumeration over 200 programs ({optimal} optimal), largest duality gap {worst_gap:.2e}"),
    )
}

/// Integrated autocorrelation time with the initial-positive-sequence cut.
fn integrated_autocorrelation(x: &[f64]) -> f64 {
    let n = x.len();
    let m = mean(x);
    let var = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64;
    let mut tau = 1.0;
    for lag in 1..n / 10 {
        let c = (0..n - lag).map(|i| (x[i] - m) * (x[i + lag] - m)).sum::<f64>() / ((n - lag) as f64 * var);
        if c <= 0.0 {
            break;
        }
        tau += 2.0 * c;
    }
    tau
}

fn dimer_histogram() -> Verdict {
    let mut g = WeightedGraph::new(2, 3).unwrap();
    g.add_edge(0, 1, 1.0, 50.0).unwrap();
    let mut conf = Conformation::from_flat(3, vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
    let radii = RadiusMap::uniform(2, 1.0).unwrap();
    let model = PotentialModel::hooke(1.0).unwrap();
    let params = VibrantParams::default();
    let mut rng = SimRng::new(31337);
    let sweeps = 1_000_000;
    let thin = 10;
    let mut lengths = Vec::with_capacity(sweeps);
    for _ in 0..sweeps {
        for _ in 0..2 {
            let u = rng.next_index(2);
            metropolis::trial_move(&g, &mut conf, u, &radii, &model, &params, &Unconstrained, &mut rng);
        }
        lengths.push(qcmc_core::geom::dist(conf.point(0), conf.point(1)));
    }
    let tau = integrated_autocorrelation(&lengths[..200_000]);
    let samples: Vec<f64> = lengths.iter().step_by(thin).copied().collect();
    // bins: (0, 0.55), 31 equal bins on [0.55, 1.45), [1.45, 2)
    let inner = 31;
    let (lo, hi) = (0.55, 1.45);
    let width = (hi - lo) / inner as f64;
    let mut edges = vec![0.0];
    edges.extend((0..=inner).map(|k| lo + k as f64 * width));
    edges.push(2.0);
    let density = |r: f64| r * r * (-25.0 * (r - 1.0) * (r - 1.0)).exp();
    let z = quadrature::integrate(density, 0.0, 2.0, &[1.0], 1e-13, 100_000).unwrap().value;
    let mut observed = vec![0.0; edges.len() - 1];
    for &r in &samples {
        let k = edges.partition_point(|&e| e <= r).clamp(1, edges.len() - 1) - 1;
        observed[k] += 1.0;
    }
    let total = samples.len() as f64;
    let mut chi2 = 0.0;
    for k in 0..observed.len() {
        let p = quadrature::integrate(density, edges[k], edges[k + 1], &[], 1e-14, 100_000).unwrap().value / z;
        let e = p * total;
        chi2 += (observed[k] - e).powi(2) / e;
    }
    let dof = (observed.len() - 1) as f64;
    let p_value = 1.0 - ChiSquared::new(dof).unwrap().cdf(chi2);
    verdict(
        p_value > 0.001 && tau < thin as f64 / 2.0,
        format!(
            "chi2 {chi2:.2} on {dof} dof, p = {p_value:.4} (need > 0.001); {} samples thinned every {thin} sweeps, integrated autocorrelation {tau:.2} sweeps",
            samples.len()
        ),
    )
}

fn helix_pipeline() -> Verdict {
    let mut doc = molecules::alanine_helix(&HelixConfig::default()).unwrap();
    doc.conformation = None;
    let config = PipelineConfig::new(PotentialModel::hooke(0.05).unwrap());
    let mut good = 0;
    let mut flags = Vec::new();
    for seed in 1..=8u32 {
        match pipeline::run_pipeline(&doc, &config, seed) {
            Ok(r) => {
                let ok = r.in_restricted_space && r.chirality_holds;
                good += usize::from(ok);
                flags.push(if ok { "ok" } else { "out" });
            }
            Err(_) => flags.push("error"),
        }
    }
    verdict(good >= 7, format!("{good}/8 seeds end in D(S) with every orientation satisfied (need 7): {flags:?}"))
}

/// Parameters used for the polymer checks.
fn polymer_config() -> PolymerConfig {
    PolymerConfig { sweeps: 40_000, inner_steps: Some(200), ..PolymerConfig::default() }
}

fn positive_count(x: &[f64]) -> usize {
    x.iter().filter(|&&v| v > 0.0).count()
}

/// Drift and twist are judged by one-sided t-tests in the direction fixed by
/// the forward-branch convention (+x) and the right-handed bead helix
/// (positive rotation about +x).
fn polymer_drift() -> Verdict {
    let seeds: Vec<u32> = (1..=16).collect();
    let t_crit = StudentsT::new(0.0, 1.0, (seeds.len() - 1) as f64).unwrap().inverse_cdf(0.99);
    let t_stat = |x: &[f64]| mean(x) / (sample_sd(x) / (x.len() as f64).sqrt());

    let directed = molecular::polymer_demo(&polymer_config(), &seeds).unwrap();
    let drift: Vec<f64> = directed.iter().map(|r| r.axial_drift).collect();
    let t_dir = t_stat(&drift);
    let directed_ok = t_dir > t_crit;

    let control = molecular::polymer_demo(&PolymerConfig { alpha: 0.5, ..polymer_config() }, &seeds).unwrap();
    let cdrift: Vec<f64> = control.iter().map(|r| r.axial_drift).collect();
    let c_sigma = sample_sd(&cdrift) / (cdrift.len() as f64).sqrt();
    let control_ok = mean(&cdrift).abs() <= 3.0 * c_sigma;

    let fixed = molecular::polymer_demo(&PolymerConfig { fix_last: true, ..polymer_config() }, &seeds).unwrap();
    let twist: Vec<f64> = fixed.iter().map(|r| r.twist_angle).collect();
    let t_twist = t_stat(&twist);
    let twist_ok = t_twist > t_crit;

    verdict(
        directed_ok && control_ok && twist_ok,
        format!(
            "directed drift mean {:.3} t = {t_dir:.2} ({}/{} positive); control mean {:.4} vs 3σ {:.4}; \
             fixed-end twist mean {:.3} t = {t_twist:.2} ({}/{} positive); one-sided 1% critical {t_crit:.2}",
            mean(&drift),
            positive_count(&drift),
            seeds.len(),
            mean(&cdrift),
            3.0 * c_sigma,
            mean(&twist),
            positive_count(&twist),
            seeds.len(),
        ),
    )
}

fn main() {
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let checks: [(u32, &str, fn() -> Verdict); 14] = [
        (1, "table 2 W-process ratio", table2_w_ratio),
        (2, "table 1 N-process ratio", table1_n_ratio),
        (3, "linearity in alpha", linearity_in_alpha),
        (4, "W ratio constant in offset", w_ratio_constant_in_offset),
        (5, "N/W correspondence", n_w_correspondence),
        (6, "one-bit balance", one_bit_balance),
        (7, "bridge law", bridge_law),
        (8, "centering certificate", centering_certificate),
        (9, "jam reproduction", jam_reproduction),
        (10, "chirotope realization", chirotope_realization),
        (11, "LP soundness", lp_soundness),
        (12, "restricted-space Metropolis", dimer_histogram),
        (13, "helix pipeline", helix_pipeline),
        (14, "polymer drift", polymer_drift),
    ];
    let mut failed = Vec::new();
    for (id, name, check) in checks {
        if let Some(f) = &filter {
            if !name.contains(f.as_str()) && *f != id.to_string() {
                continue;
            }
        }
        let t = Instant::now();
        let v = std::panic::catch_unwind(check).unwrap_or_else(|_| verdict(false, "panicked"));
        println!(
            "acceptance {id:>2} {}: {name}: {} [{:.1?}]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            t.elapsed()
        );
        if !v.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all checks passed");
    } else {
        println!("acceptance: failed {failed:?}");
        std::process::exit(1);
    }
}
