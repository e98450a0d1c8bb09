use std::sync::Arc;

use crate::lattice::Lattice2D;
use crate::paley_wiener::{
    envelope_fits, seminorm_table, BiorthogonalSystem, Envelope, RKernel, SchwartzInterpolant, TimeFunction,
};
use crate::regions::{generate_set, IntervalUnion, SequenceRule, SetKind, SetRequest, StaircaseSequences};

use super::{
    ConstructionConfig, ConstructionError, ConstructionState, EpsPolicy, HstarTrial, StageChecks, StageReport,
};

const WINDOW_GROWTH: f64 = 1.5;
const RADIUS_SCAN_STEP: f64 = 0.25;

/// Result of [`choose_omega`].
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaChoice {
    pub omega: IntervalUnion,
    /// Distance from `Ω` to `Q`.
    pub margin: f64,
    pub q_window: f64,
    pub required: f64,
}

/// Positive elements of `Q ∩ [-w, w]`, ascending.
fn positive_q(config: &ConstructionConfig, w: f64) -> Result<Vec<f64>, ConstructionError> {
    let set = generate_set(&SetRequest {
        kind: SetKind::Q,
        lattice: &config.lattice,
        seqs: &config.primal,
        window: w,
        transverse_cap: None,
    })?;
    Ok(set.values_f64().into_iter().filter(|&v| v > 0.0).collect())
}

fn distance_to_q(omega: &IntervalUnion, qs: &[f64]) -> f64 {
    qs.iter().map(|&q| omega.distance_to(q).min(omega.distance_to(-q))).fold(f64::INFINITY, f64::min)
}

/// Symmetric `Ω_n ⊃ Ω_{n-1}` avoiding `Q` by the configured margin, grown
/// greedily by the widest gaps of `Q` until `mes(Ω_n) > slack · 2a*_n/det Γ*`.
pub fn choose_omega(
    config: &ConstructionConfig,
    n: usize,
    prev: Option<&IntervalUnion>,
) -> Result<OmegaChoice, ConstructionError> {
    let required = config.required_measure(n);
    let target = config.omega_slack * required;
    let delta = config.q_margin;
    let mut w = config.q_window;
    loop {
        let qs = positive_q(config, w)?;
        if let Some(&q1) = qs.first() {
            if let (Some(p), true) = (prev, required == 0.0) {
                return Ok(OmegaChoice { omega: p.clone(), margin: distance_to_q(p, &qs), q_window: w, required });
            }
            let mut pieces = Vec::new();
            for pair in qs.windows(2) {
                let (lo, hi) = (pair[0] + delta, pair[1] - delta);
                if hi > lo {
                    pieces.push((lo, hi));
                }
            }
            pieces.sort_by(|a, b| (b.1 - b.0).total_cmp(&(a.1 - a.0)).then(a.0.total_cmp(&b.0)));
            let mut omega = match prev {
                Some(p) => p.clone(),
                None if q1 > delta => IntervalUnion::symmetric(q1 - delta),
                None => IntervalUnion::empty(),
            };
            let mut it = pieces.into_iter();
            while omega.measure() <= target || omega.is_empty() {
                let Some((lo, hi)) = it.next() else { break };
                omega = omega.union(&IntervalUnion::new([(lo, hi), (-hi, -lo)]));
            }
            if omega.measure() > target && !omega.is_empty() {
                let margin = distance_to_q(&omega, &qs);
                return Ok(OmegaChoice { omega, margin, q_window: w, required });
            }
        }
        if w >= config.q_window_max {
            return Err(ConstructionError::WindowExhausted { window: w, needed: target });
        }
        w = (w * WINDOW_GROWTH).min(config.q_window_max);
    }
}

/// `X = {p_2(γ*) : γ* ∈ Γ*, |p_1(γ*)| < a*}` within `[-R, R]`, sorted.
pub fn model_nodes(dual: &Lattice2D, a_star: f64, window: f64) -> Result<Vec<f64>, ConstructionError> {
    if !(a_star > 0.0) {
        return Err(ConstructionError::BadConfig(format!("a* must be positive, got {a_star}")));
    }
    let seqs = StaircaseSequences::new(
        SequenceRule::Explicit { terms: vec![a_star] },
        SequenceRule::Explicit { terms: vec![] },
    )?;
    let set = generate_set(&SetRequest { kind: SetKind::Xn(1), lattice: dual, seqs: &seqs, window, transverse_cap: None })?;
    Ok(set.values_f64())
}

/// Smallest grid point `R` beyond which `|φ(x)|(1+|x|)^n < τ` on a scan of
/// `[0, limit]`; `φ` is assumed even.
pub fn truncation_radius(phi: &impl TimeFunction, n: usize, tau: f64, limit: f64) -> f64 {
    let steps = (limit / RADIUS_SCAN_STEP).ceil() as usize;
    let mut last = 0.0;
    for i in 0..=steps {
        let x = RADIUS_SCAN_STEP * i as f64;
        if phi.value(x).abs() * (1.0 + x).powi(n as i32) >= tau {
            last = x;
        }
    }
    (last + RADIUS_SCAN_STEP).max(1.0)
}

/// Geometric values `start · ratio^j` snapped to the midpoint of the gap
/// between consecutive positive nodes containing them, above `floor` and
/// below the largest node.
pub fn hstar_schedule(nodes: &[f64], start: f64, ratio: f64, floor: f64) -> Vec<f64> {
    let pos: Vec<f64> = nodes.iter().copied().filter(|&x| x > 0.0).collect();
    let Some(&top) = pos.last() else { return Vec::new() };
    let mut out: Vec<f64> = Vec::new();
    let mut g = start;
    while g < top {
        let i = pos.partition_point(|&x| x <= g);
        let lo = if i == 0 { 0.0 } else { pos[i - 1] };
        let h = 0.5 * (lo + pos[i]);
        if h > floor && out.last().is_none_or(|&l| h > l) {
            out.push(h);
        }
        g *= ratio;
    }
    out
}

/// Accepted candidate of [`choose_hstar`].
#[derive(Debug, Clone)]
pub struct HstarChoice {
    pub h: f64,
    pub f: SchwartzInterpolant,
    /// `‖f‖_{m,k}` on the fine grid.
    pub seminorms: Vec<Vec<f64>>,
    pub c_hat: f64,
    pub trials: Vec<HstarTrial>,
}

fn table_sups(f: &SchwartzInterpolant, n: usize, step: f64) -> Vec<Vec<f64>> {
    seminorm_table(f, n, n, f.time_radius(), step, true)
        .into_iter()
        .map(|row| row.into_iter().map(|s| s.sup).collect())
        .collect()
}

fn max2(t: &[Vec<f64>]) -> f64 {
    t.iter().flatten().copied().fold(0.0, f64::max)
}

/// Smallest scheduled `h > h*_{n-1}` whose data `c(λ) = 0` for `|λ| <= h`,
/// `c(λ) = φ_{n-1}(λ)` otherwise, interpolates to `f` with measured
/// `‖f‖_{m,k} < 2^{-n}` for all `m, k <= n`.
pub fn choose_hstar(
    system: &Arc<BiorthogonalSystem>,
    envelope: Envelope,
    values: &[f64],
    n: usize,
    schedule: &[f64],
    config: &ConstructionConfig,
) -> Result<HstarChoice, ConstructionError> {
    let nodes = system.nodes();
    let bound = 0.5f64.powi(n as i32);
    let mut c_hat: f64 = 1.0;
    let mut trials = Vec::new();
    let mut best = f64::INFINITY;
    for &h in schedule {
        let tail = nodes
            .iter()
            .zip(values)
            .filter(|(x, _)| x.abs() > h)
            .map(|(x, v)| v.abs() * (1.0 + x.abs()).powi(n as i32))
            .fold(0.0, f64::max);
        if !(tail * c_hat < bound) {
            trials.push(HstarTrial { h, tail, c_hat, max_seminorm: None, passed: false });
            continue;
        }
        let c: Vec<f64> = nodes.iter().zip(values).map(|(x, v)| if x.abs() <= h { 0.0 } else { *v }).collect();
        let f = SchwartzInterpolant::new(system.clone(), envelope, c.clone()).symmetrized();
        let coarse = table_sups(&f, n, config.trial_step);
        let mut measured = max2(&coarse);
        let mut table = coarse;
        if measured < bound {
            table = table_sups(&f, n, config.seminorm_step);
            measured = max2(&table);
        }
        best = best.min(measured);
        let passed = measured < bound;
        trials.push(HstarTrial { h, tail, c_hat, max_seminorm: Some(measured), passed });
        if passed {
            return Ok(HstarChoice { h, f, seminorms: table, c_hat, trials });
        }
        let mut ratio: f64 = 0.0;
        for (m, row) in table.iter().enumerate() {
            let data = nodes
                .iter()
                .zip(&c)
                .map(|(x, v)| v.abs() * (1.0 + x.abs()).powi(m as i32))
                .fold(0.0, f64::max);
            if data > 0.0 {
                ratio = row.iter().fold(ratio, |r, s| r.max(s / data));
            }
        }
        if ratio > 0.0 {
            c_hat = ratio;
        }
    }
    Err(ConstructionError::ScheduleExhausted { best, bound })
}

pub(super) fn step(state: &ConstructionState) -> Result<ConstructionState, ConstructionError> {
    let config = &state.config;
    let n = state.stage() + 1;
    let prev_omega = state.omega();
    let choice = choose_omega(config, n, Some(prev_omega))?;
    let omega = choice.omega.clone();
    let eps = match config.eps {
        EpsPolicy::Fixed { eps } => eps,
        EpsPolicy::HalfMargin => 0.5 * choice.margin,
    };
    let j = omega.erode(eps)?;
    if !(j.measure() > choice.required) {
        return Err(ConstructionError::SpectrumTooSmall { measure: j.measure(), needed: choice.required });
    }
    let phi_prev = &state.phi;
    let window = match &config.windows {
        Some(w) => *w.get(n - 1).ok_or_else(|| ConstructionError::BadConfig(format!("no window for stage {n}")))?,
        None => truncation_radius(phi_prev, n, config.truncation_tau, phi_prev.time_radius()),
    };
    let dual = config.lattice.dual()?;
    let a_star = config.a_star(n);
    let nodes = model_nodes(&dual, a_star, window)?;
    let raw: Vec<f64> = nodes.iter().map(|&x| phi_prev.value(x)).collect();
    let len = raw.len();
    let values: Vec<f64> = (0..len).map(|i| 0.5 * (raw[i] + raw[len - 1 - i])).collect();

    let kernel = RKernel::new(j.clone())?;
    let system = Arc::new(BiorthogonalSystem::new(kernel, nodes.clone(), config.cond_cap)?);
    let envelope = Envelope::new(eps);
    let floor = state.hstar.last().copied().unwrap_or(0.0);
    let schedule = hstar_schedule(&nodes, config.hstar_start, config.hstar_ratio, floor);
    let chosen = choose_hstar(&system, envelope, &values, n, &schedule, config)?;

    let mut phi = phi_prev.clone();
    phi.push(chosen.f.clone());
    let mut hstar = state.hstar.clone();
    hstar.push(chosen.h);
    let dual_seqs = StaircaseSequences { a: config.dual_a.clone(), h: SequenceRule::Explicit { terms: hstar.clone() } };
    let z = generate_set(&SetRequest { kind: SetKind::Zn(n), lattice: &dual, seqs: &dual_seqs, window, transverse_cap: None })?
        .values_f64();
    let z_max = z.iter().map(|&x| phi.value(x).abs()).fold(0.0, f64::max);
    let phi_at_zero = phi.value(0.0);
    let node_residual = chosen.f.node_residual();
    let bound = 0.5f64.powi(n as i32);
    let spectra_ok = phi.term_spectra().iter().all(|s| omega.contains_union(s));
    let checks = StageChecks {
        a: (phi_at_zero - 1.0).abs() <= config.normalization_tol,
        b: omega.is_symmetric() && omega.contains_union(prev_omega) && envelope_fits(&j, eps, &omega) && spectra_ok,
        c: max2(&chosen.seminorms) < bound,
        d: z_max <= config.vanish_tol && node_residual <= config.node_residual_tol,
    };
    if !checks.a {
        return Err(ConstructionError::ConditionViolated { item: 'a', value: (phi_at_zero - 1.0).abs() });
    }
    if !checks.b {
        return Err(ConstructionError::ConditionViolated { item: 'b', value: choice.margin });
    }
    if !checks.c {
        return Err(ConstructionError::ConditionViolated { item: 'c', value: max2(&chosen.seminorms) });
    }
    if !checks.d {
        return Err(ConstructionError::ConditionViolated { item: 'd', value: z_max.max(node_residual) });
    }
    let report = StageReport {
        stage: n,
        phi_at_zero,
        z_count: z.len(),
        z_max,
        seminorms: chosen.seminorms.clone(),
        seminorm_bound: bound,
        node_residual,
        condition: system.condition(),
        hstar: chosen.h,
        j,
        eps,
        omega: omega.clone(),
        margin: choice.margin,
        q_window: choice.q_window,
        window,
        nodes: nodes.len(),
        active_nodes: chosen.f.coeffs().iter().filter(|c| **c != 0.0).count(),
        c_hat: chosen.c_hat,
        trials: chosen.trials,
        checks,
    };
    let mut omegas = state.omegas.clone();
    omegas.push(omega);
    let mut margins = state.margins.clone();
    margins.push(choice.margin);
    let mut reports = state.reports.clone();
    reports.push(report);
    Ok(ConstructionState {
        config: config.clone(),
        phi,
        omegas,
        margins,
        hstar,
        reports,
        x_nodes: nodes,
        z_points: z,
    })
}
