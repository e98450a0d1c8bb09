use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use fqc_core::measures::{decompose_model, min_gap_profile, psf_check, support_check, tb_norm, GapRow, PsfReport, SupportReport};
use fqc_core::paley_wiener::{interpolation_probe, ProbeReport};
use fqc_core::progressions::{ap_cover_probe, ap_count, ap_saturation, exact_ap_triples, CoverReport, MatchMode, TripleReport};
use fqc_core::regions::{generate_set, line_escape_bound, staircase_plot, Line, SetRequest};
use fqc_core::{
    run_construction, Ap, AtomicMeasure, ConstructionState, Enumeration, GeneratedSet, IntervalUnion, Lattice2D, SetKind,
    StageReport, StaircaseSequences, StateData, TimeFunction,
};

use crate::config::RunConfig;
use crate::report::{write_report, ReportMeta};
use crate::{ApKind, CliError, Command, ProbeKind, VerifyKind};

pub struct Context {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub steps: usize,
    pub seed: u64,
}

impl Context {
    fn meta(&self) -> ReportMeta<'_> {
        ReportMeta { cfg: &self.cfg, steps: self.steps, seed: self.seed }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn report<T: Serialize>(&self, name: &str, command: &str, pass: bool, result: &T) -> Result<bool, CliError> {
        write_report(&self.path(name), command, &self.meta(), pass, result)?;
        Ok(pass)
    }
}

fn compute<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}

pub fn dispatch(ctx: &Context, cmd: Command) -> Result<bool, CliError> {
    match cmd {
        Command::Construct => construct(ctx),
        Command::Sets => sets(ctx),
        Command::Measure => measure(ctx),
        Command::Verify(VerifyKind::Psf) => verify_psf(ctx),
        Command::Verify(VerifyKind::Support) => verify_support(ctx),
        Command::Verify(VerifyKind::Tb) => verify_tb(ctx),
        Command::Probe(ProbeKind::Interpolation) => probe(ctx),
        Command::Ap(kind) => ap(ctx, kind),
        Command::Decompose => decompose(ctx),
    }
}

const STATE_FILE: &str = "state.json";

fn write_state(path: &Path, state: &ConstructionState) -> Result<(), CliError> {
    let w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(w, &state.to_data()).map_err(|e| CliError::Io(e.to_string()))
}

/// `state.json` from the output directory when it matches the configuration
/// and stage count, otherwise a fresh construction (which is then saved).
fn load_or_construct(ctx: &Context) -> Result<ConstructionState, CliError> {
    let path = ctx.path(STATE_FILE);
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(data) = serde_json::from_str::<StateData>(&text) {
            if data.config == ctx.cfg.construction && data.stage == ctx.steps {
                return ConstructionState::from_data(data).map_err(compute);
            }
        }
    }
    let state = run_construction(&ctx.cfg.construction, ctx.steps).map_err(compute)?;
    write_state(&path, &state)?;
    Ok(state)
}

#[derive(Serialize)]
struct ConstructResult<'a> {
    stage: usize,
    omegas: &'a [IntervalUnion],
    hstar: &'a [f64],
    omega_nested: bool,
    hstar_increasing: bool,
    stages: &'a [StageReport],
}

fn construct(ctx: &Context) -> Result<bool, CliError> {
    let state = run_construction(&ctx.cfg.construction, ctx.steps).map_err(compute)?;
    write_state(&ctx.path(STATE_FILE), &state)?;
    let omega_nested = state.omegas.windows(2).all(|w| w[1].contains_union(&w[0]));
    let hstar_increasing = state.hstar.windows(2).all(|w| w[0] < w[1]);
    let pass = omega_nested && hstar_increasing && state.reports.iter().all(|r| r.checks.all());
    let result = ConstructResult {
        stage: state.stage(),
        omegas: &state.omegas,
        hstar: &state.hstar,
        omega_nested,
        hstar_increasing,
        stages: &state.reports,
    };
    ctx.report("construct_report.json", "construct", pass, &result)
}

#[derive(Serialize)]
struct SetSummary {
    kind: String,
    file: String,
    points: usize,
    symmetric: bool,
    gaps: Vec<GapRow>,
}

fn sets(ctx: &Context) -> Result<bool, CliError> {
    let sc = &ctx.cfg.sets;
    let kinds = sc
        .kinds
        .iter()
        .map(|k| {
            SetKind::parse(k).ok_or_else(|| CliError::Config { field: Some("sets.kinds".into()), message: format!("unknown set {k}") })
        })
        .collect::<Result<Vec<_>, _>>()?;
    // Dual sets depend on the chosen h*, so they need the construction.
    let state = if kinds.iter().any(|k| k.is_dual()) { Some(load_or_construct(ctx)?) } else { None };
    let mut summaries = Vec::new();
    for kind in kinds {
        let window = if kind == SetKind::Q { sc.q_window } else { sc.window };
        let set = match &state {
            Some(s) => s.set(kind, window, (kind == SetKind::S).then_some(sc.transverse_cap)).map_err(compute)?,
            None => generate_set(&SetRequest {
                kind,
                lattice: &ctx.cfg.construction.lattice,
                seqs: &ctx.cfg.construction.primal,
                window,
                transverse_cap: None,
            })
            .map_err(compute)?,
        };
        let file = format!("set_{}.csv", kind.to_string().to_ascii_lowercase());
        set.write_csv(BufWriter::new(File::create(ctx.path(&file))?)).map_err(compute)?;
        let radii: Vec<f64> = [0.25, 0.5, 1.0].iter().map(|f| f * window).collect();
        summaries.push(SetSummary {
            kind: kind.to_string(),
            file,
            points: set.len(),
            symmetric: set.is_symmetric(),
            gaps: min_gap_profile(&set.values_f64(), &radii),
        });
    }
    let mut plots = vec![("primal", staircase_plot(&ctx.cfg.construction.primal, sc.plot_strips))];
    if let Some(s) = &state {
        plots.push(("dual", staircase_plot(&s.dual_sequences(), sc.plot_strips)));
    }
    let plot_json: serde_json::Map<String, serde_json::Value> =
        plots.into_iter().map(|(k, p)| (k.to_string(), serde_json::to_value(p).expect("plot serializes"))).collect();
    std::fs::write(ctx.path("staircase_plot.json"), serde_json::to_string_pretty(&plot_json).map_err(compute)? + "\n")?;
    ctx.report("sets_report.json", "sets", true, &summaries)
}

fn window_enum(window: f64) -> Enumeration {
    Enumeration::Window { window, transverse: None }
}

fn measures(ctx: &Context, state: &ConstructionState) -> Result<(AtomicMeasure, AtomicMeasure), CliError> {
    let m = &ctx.cfg.measures;
    let mu = state.mu(window_enum(m.mu_window), m.atom_tol).map_err(compute)?;
    let mu_hat = state.mu_hat(window_enum(m.mu_hat_window), m.atom_tol).map_err(compute)?;
    Ok((mu, mu_hat))
}

#[derive(Serialize)]
struct MeasureSummary {
    file: &'static str,
    atoms: usize,
    window: f64,
    transverse_bound: f64,
    positive: usize,
    negative: usize,
    symmetric: bool,
    tb_norm: f64,
    dropped_max: f64,
    dropped_total: f64,
}

fn summarize(file: &'static str, m: &AtomicMeasure) -> MeasureSummary {
    let (positive, negative) = m.sign_pattern();
    MeasureSummary {
        file,
        atoms: m.len(),
        window: m.window,
        transverse_bound: m.transverse_bound,
        positive,
        negative,
        symmetric: m.is_symmetric(1e-12),
        tb_norm: tb_norm(m),
        dropped_max: m.dropped_max,
        dropped_total: m.dropped_total,
    }
}

fn measure(ctx: &Context) -> Result<bool, CliError> {
    let state = load_or_construct(ctx)?;
    let (mu, mu_hat) = measures(ctx, &state)?;
    mu.write_csv(BufWriter::new(File::create(ctx.path("mu.csv"))?)).map_err(compute)?;
    mu_hat.write_csv(BufWriter::new(File::create(ctx.path("mu_hat.csv"))?)).map_err(compute)?;
    let result = [summarize("mu.csv", &mu), summarize("mu_hat.csv", &mu_hat)];
    ctx.report("measure_report.json", "measure", true, &result)
}

fn verify_psf(ctx: &Context) -> Result<bool, CliError> {
    let state = load_or_construct(ctx)?;
    let (mu, mu_hat) = measures(ctx, &state)?;
    let report: PsfReport = psf_check(&mu, &mu_hat, &ctx.cfg.measures.tests, ctx.cfg.measures.psf_tol).map_err(compute)?;
    ctx.report("psf_report.json", "verify psf", report.pass, &report)
}

#[derive(Serialize)]
struct Vanishing {
    set: String,
    window: f64,
    points: usize,
    max_abs: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct SupportResult {
    mu_on_lambda: SupportReport,
    mu_hat_on_s: SupportReport,
    phi_hat_on_q: Vanishing,
    phi_on_z: Vanishing,
}

/// Largest `|f|` over the points of a set.
fn max_on(set: &GeneratedSet, f: impl Fn(f64) -> Result<f64, CliError>) -> Result<f64, CliError> {
    set.points.iter().try_fold(0.0f64, |m, p| Ok(m.max(f(p.approx)?.abs())))
}

fn verify_support(ctx: &Context) -> Result<bool, CliError> {
    let m = &ctx.cfg.measures;
    let state = load_or_construct(ctx)?;
    let (mu, mu_hat) = measures(ctx, &state)?;
    let lambda = state.set(SetKind::Lambda, m.mu_window, None).map_err(compute)?;
    // S is unbounded transversally at a finite stage; cap it just past the
    // transverse range of μ̂.
    let s = state.set(SetKind::S, m.mu_hat_window, Some(mu_hat.transverse_bound + 1.0)).map_err(compute)?;
    let mu_on_lambda = support_check(&mu, &lambda, m.support_tol).map_err(compute)?;
    let mu_hat_on_s = support_check(&mu_hat, &s, m.support_tol).map_err(compute)?;
    let tol = ctx.cfg.construction.vanish_tol;
    // φ̂ vanishes off Ω_N, so Q beyond its radius adds nothing.
    let q_window = ctx.cfg.sets.q_window.max(state.omega().radius());
    let q = state.set(SetKind::Q, q_window, None).map_err(compute)?;
    let q_max = max_on(&q, |t| state.phi.fourier(t).map_err(compute))?;
    let n = state.stage();
    let z = state.set(SetKind::Zn(n), m.mu_hat_window, None).map_err(compute)?;
    let z_max = max_on(&z, |x| Ok(state.phi.value(x)))?;
    let result = SupportResult {
        mu_on_lambda,
        mu_hat_on_s,
        phi_hat_on_q: Vanishing { set: "Q".into(), window: q_window, points: q.len(), max_abs: q_max, tolerance: tol, pass: q_max <= tol },
        phi_on_z: Vanishing { set: format!("Z_{n}"), window: m.mu_hat_window, points: z.len(), max_abs: z_max, tolerance: tol, pass: z_max <= tol },
    };
    let pass = result.mu_on_lambda.ok && result.mu_hat_on_s.ok && result.phi_hat_on_q.pass && result.phi_on_z.pass;
    ctx.report("support_report.json", "verify support", pass, &result)
}

#[derive(Serialize)]
struct TbRow {
    measure: &'static str,
    window: f64,
    atoms: usize,
    tb_norm: f64,
}

#[derive(Serialize)]
struct TbResult {
    rows: Vec<TbRow>,
    /// Doubling the window leaves each norm unchanged to this relative slack.
    slack: f64,
    lambda_gaps: Vec<GapRow>,
}

const TB_SLACK: f64 = 1e-6;

fn verify_tb(ctx: &Context) -> Result<bool, CliError> {
    let m = &ctx.cfg.measures;
    let state = load_or_construct(ctx)?;
    let mut rows = Vec::new();
    let mut pass = true;
    for (name, w) in [("mu", m.mu_window), ("mu_hat", m.mu_hat_window)] {
        let mut pair = Vec::new();
        for window in [w, 2.0 * w] {
            let e = window_enum(window);
            let meas = if name == "mu" { state.mu(e, m.atom_tol) } else { state.mu_hat(e, m.atom_tol) }.map_err(compute)?;
            let tb = tb_norm(&meas);
            pair.push(tb);
            rows.push(TbRow { measure: name, window, atoms: meas.len(), tb_norm: tb });
        }
        pass &= pair[0].is_finite() && pair[1] <= pair[0] * (1.0 + TB_SLACK);
    }
    let lambda = state.set(SetKind::Lambda, 2.0 * m.mu_window, None).map_err(compute)?;
    let radii: Vec<f64> = [0.25, 0.5, 1.0].iter().map(|f| f * 2.0 * m.mu_window).collect();
    let result = TbResult { rows, slack: TB_SLACK, lambda_gaps: min_gap_profile(&lambda.values_f64(), &radii) };
    ctx.report("tb_report.json", "verify tb", pass, &result)
}

#[derive(Serialize)]
struct ProbeResult {
    report: ProbeReport,
    expect: &'static str,
    spread: f64,
    min_growth: f64,
    pass: bool,
}

fn probe(ctx: &Context) -> Result<bool, CliError> {
    let p = &ctx.cfg.probe;
    let lattice = &ctx.cfg.construction.lattice;
    let interval = (p.interval[0], p.interval[1]);
    let threshold = (interval.1 - interval.0) / lattice.covolume();
    let mut results = Vec::new();
    for &ratio in &p.ratios {
        let omega = IntervalUnion::symmetric(0.5 * ratio * threshold);
        let report = interpolation_probe(lattice, interval, &omega, &p.windows).map_err(compute)?;
        let (spread, min_growth) = (report.spread(), report.min_growth());
        let (expect, pass) = if ratio > 1.0 {
            ("stable", spread <= p.stable_factor)
        } else {
            ("growing", min_growth >= p.growth_factor)
        };
        results.push(ProbeResult { report, expect, spread, min_growth, pass });
    }
    let pass = results.iter().all(|r| r.pass);
    ctx.report("probe_report.json", "probe interpolation", pass, &results)
}

/// How a sampled progression was drawn.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
enum ApSpec {
    Rational { a: (i64, i64), d: (i64, i64) },
    Lattice { start: (i64, i64), step: (i64, i64) },
}

impl ApSpec {
    fn ap(&self, lattice: &Lattice2D) -> Ap {
        match *self {
            ApSpec::Rational { a, d } => Ap::rational(a.0, a.1, d.0, d.1),
            ApSpec::Lattice { start, step } => Ap::along_lattice(lattice, start, step),
        }
        .expect("sampled difference is nonzero")
    }

    /// Radius past which the lattice line carrying the progression leaves `A`.
    fn escape(&self, lattice: &Lattice2D, seqs: &StaircaseSequences) -> Option<f64> {
        let ApSpec::Lattice { start, step } = *self else { return None };
        let (x0, y0) = lattice.point_f64(start.0, start.1);
        let (dx, dy) = lattice.point_f64(step.0, step.1);
        if dy == 0.0 {
            return None;
        }
        let c = dx / dy;
        line_escape_bound(seqs, Line::XOnY { c, d: x0 - c * y0 }).ok()
    }
}

fn sample_aps(ctx: &Context) -> Vec<ApSpec> {
    let c = &ctx.cfg.ap;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let (q, l) = (c.rational_max.max(1), c.lattice_max.max(1));
    let mut out = Vec::with_capacity(2 * c.samples);
    for _ in 0..c.samples {
        out.push(ApSpec::Rational { a: (rng.gen_range(-q..=q), rng.gen_range(1..=q)), d: (rng.gen_range(1..=q), rng.gen_range(1..=q)) });
    }
    while out.len() < 2 * c.samples {
        let step = (rng.gen_range(-l..=l), rng.gen_range(-l..=l));
        if step == (0, 0) {
            continue;
        }
        out.push(ApSpec::Lattice { start: (rng.gen_range(-l..=l), rng.gen_range(-l..=l)), step });
    }
    out
}

#[derive(Serialize)]
struct ApRow {
    ap: ApSpec,
    counts: Vec<usize>,
    saturated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    escape_radius: Option<f64>,
}

#[derive(Serialize)]
struct ApRun {
    rule: &'static str,
    radii: Vec<f64>,
    points: usize,
    saturated: usize,
    rows: Vec<ApRow>,
}

fn lambda_for(ctx: &Context, seqs: &StaircaseSequences, window: f64) -> Result<GeneratedSet, CliError> {
    generate_set(&SetRequest { kind: SetKind::Lambda, lattice: &ctx.cfg.construction.lattice, seqs, window, transverse_cap: None })
        .map_err(compute)
}

fn ap_run(ctx: &Context, rule: &'static str, seqs: &StaircaseSequences, specs: &[ApSpec]) -> Result<ApRun, CliError> {
    let radii = ctx.cfg.ap.radii.clone();
    let rmax = radii.iter().copied().fold(0.0, f64::max);
    let lambda = lambda_for(ctx, seqs, rmax)?;
    let lattice = &ctx.cfg.construction.lattice;
    let rows: Vec<ApRow> = specs
        .iter()
        .map(|s| {
            let counts = ap_saturation(&lambda.points, &s.ap(lattice), &radii);
            let saturated = counts.len() < 2 || counts[counts.len() - 1] == counts[counts.len() - 2];
            ApRow { ap: s.clone(), counts, saturated, escape_radius: s.escape(lattice, seqs) }
        })
        .collect();
    let saturated = rows.iter().filter(|r| r.saturated).count();
    Ok(ApRun { rule, radii, points: lambda.len(), saturated, rows })
}

#[derive(Serialize)]
struct CountRow {
    ap: ApSpec,
    count: usize,
    indices: Vec<i64>,
}

#[derive(Serialize)]
struct SaturateResult {
    default: ApRun,
    control: ApRun,
    default_all_saturated: bool,
    control_has_unsaturated: bool,
}

#[derive(Serialize)]
struct CoverResult {
    windows: Vec<f64>,
    differences: Vec<f64>,
    reports: Vec<CoverReport>,
    decreasing: bool,
}

fn ap(ctx: &Context, kind: ApKind) -> Result<bool, CliError> {
    let c = &ctx.cfg.ap;
    let primal = &ctx.cfg.construction.primal;
    let lattice = &ctx.cfg.construction.lattice;
    match kind {
        ApKind::Count => {
            let rmax = c.radii.iter().copied().fold(0.0, f64::max);
            let lambda = lambda_for(ctx, primal, rmax)?;
            let values: Vec<_> = lambda.points.iter().map(|p| p.value.clone()).collect();
            let rows: Vec<CountRow> = sample_aps(ctx)
                .into_iter()
                .map(|s| {
                    let hits = ap_count(&values, &s.ap(lattice), MatchMode::Exact);
                    CountRow { ap: s, count: hits.count, indices: hits.matches.iter().map(|m| m.index).collect() }
                })
                .collect();
            ctx.report("ap_count_report.json", "ap count", true, &rows)
        }
        ApKind::Saturate => {
            let specs = sample_aps(ctx);
            let default = ap_run(ctx, "default", primal, &specs)?;
            let control = ap_run(ctx, "control", &c.control, &specs)?;
            let default_all_saturated = default.saturated == default.rows.len();
            let control_has_unsaturated = control.saturated < control.rows.len();
            let pass = default_all_saturated && control_has_unsaturated;
            let result = SaturateResult { default, control, default_all_saturated, control_has_unsaturated };
            ctx.report("ap_saturate_report.json", "ap saturate", pass, &result)
        }
        ApKind::Cover => {
            let l = c.lattice_max.max(1);
            let mut differences: Vec<f64> = (-l..=l)
                .flat_map(|m| (-l..=l).map(move |n| (m, n)))
                .map(|(m, n)| lattice.point_f64(m, n).0)
                .filter(|&x| x > 1e-9)
                .collect();
            differences.sort_by(f64::total_cmp);
            differences.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
            let mut reports = Vec::new();
            for &w in &c.cover_windows {
                let lambda = lambda_for(ctx, primal, w)?;
                reports.push(ap_cover_probe(&lambda.values_f64(), c.cover_k, &differences, c.tau));
            }
            let decreasing = reports.windows(2).all(|p| p[1].fraction < p[0].fraction);
            let result = CoverResult { windows: c.cover_windows.clone(), differences, reports, decreasing };
            ctx.report("ap_cover_report.json", "ap cover", true, &result)
        }
        ApKind::Triples => {
            let lambda = lambda_for(ctx, primal, c.triples_window)?;
            let report: TripleReport = exact_ap_triples(&lambda.points);
            let pass = report.violations == 0;
            ctx.report("ap_triples_report.json", "ap triples", pass, &report)
        }
    }
}

#[derive(Serialize)]
struct DecomposeRow {
    stage: usize,
    threshold: f64,
    mu1_file: String,
    mu2_file: String,
    mu1_atoms: usize,
    mu2_atoms: usize,
    exact_split: bool,
    tb_mu2: f64,
}

#[derive(Serialize)]
struct DecomposeResult {
    atoms: usize,
    tb_mu: f64,
    rows: Vec<DecomposeRow>,
    tb_decreasing: bool,
}

fn decompose(ctx: &Context) -> Result<bool, CliError> {
    let d = &ctx.cfg.decompose;
    let state = load_or_construct(ctx)?;
    let mu = state.mu(window_enum(d.window), ctx.cfg.measures.atom_tol).map_err(compute)?;
    let mut rows = Vec::new();
    for n in 1..=d.thresholds.len() {
        let dec = decompose_model(&mu, n, &d.thresholds).map_err(compute)?;
        let (f1, f2) = (format!("mu1_{n}.csv"), format!("mu2_{n}.csv"));
        dec.mu1.write_csv(BufWriter::new(File::create(ctx.path(&f1))?)).map_err(compute)?;
        dec.mu2.write_csv(BufWriter::new(File::create(ctx.path(&f2))?)).map_err(compute)?;
        rows.push(DecomposeRow {
            stage: n,
            threshold: dec.threshold,
            mu1_file: f1,
            mu2_file: f2,
            mu1_atoms: dec.mu1.len(),
            mu2_atoms: dec.mu2.len(),
            exact_split: dec.is_exact_split(&mu),
            tb_mu2: dec.tb_mu2,
        });
    }
    let tb_decreasing = rows.windows(2).all(|w| w[1].tb_mu2 < w[0].tb_mu2);
    let pass = tb_decreasing && rows.iter().all(|r| r.exact_split);
    let result = DecomposeResult { atoms: mu.len(), tb_mu: tb_norm(&mu), rows, tb_decreasing };
    ctx.report("decompose_report.json", "decompose", pass, &result)
}
