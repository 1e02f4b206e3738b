//! Exact pathwise identities, checked on seeded GBM and DDS paths.

use drawdown_kelly::horizon::{cycle_times, finite_horizon_numeraire, path_zetas};
use drawdown_kelly::path::{first_hit_level, is_time_of_maximum, relative_drawdown, running_max};
use drawdown_kelly::returns::{phi_process, rr_at};
use drawdown_kelly::transform::{verify_drawdown, DEFAULT_INVERSE_TOL};
use drawdown_kelly::{
    az_forward, az_inverse, kelly_fraction, DrawdownParam, MarketModel, SampledPath, SimBatch, StopIndex, TimeGrid,
};

use crate::report::{flag, num, Report, Table};
use crate::CliError;

const ALPHAS: [f64; 3] = [0.1, 0.5, 0.9];

struct Checks {
    table: Table,
    pass: bool,
}

impl Checks {
    fn max_below(&mut self, name: &str, value: f64, bound: f64) {
        self.push(name, num(value), format!("<{}", num(bound)), value < bound);
    }

    fn zero(&mut self, name: &str, count: usize) {
        self.push(name, count.to_string(), "==0".into(), count == 0);
    }

    fn push(&mut self, name: &str, value: String, threshold: String, pass: bool) {
        self.pass &= pass;
        self.table.push(vec![name.into(), value, threshold, flag(pass)]);
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn a(x: f64) -> DrawdownParam {
    DrawdownParam::new(x).expect("constant in range")
}

pub fn run() -> Result<Report, CliError> {
    let mut c = Checks {
        table: Table::new(&["check", "value", "threshold", "pass"]),
        pass: true,
    };
    let gbm = SimBatch::new(MarketModel::gbm_preset(), TimeGrid::new(0.01, 1000)?, 100, 1)?;
    let paths: Vec<SampledPath> = gbm.map_paths(|p| Ok(p.numeraire(gbm.model())?.wealth))?;
    let buyhold: Vec<SampledPath> =
        gbm.map_paths(|p| p.wealth(gbm.model(), &drawdown_kelly::ProportionRule::all_in(1, 0)))?;

    let (mut dd, mut round, mut comp, mut top_pow) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut intertwine, mut tom, mut level_hits, mut fh_bad, mut rr_bad) = (0, 0, 0, 0, 0);
    let (mut kelly_bad, mut phi_bad) = (0, 0);
    for (x, z) in paths.iter().zip(&buyhold) {
        let rx = relative_drawdown(x)?;
        for &al in &ALPHAS {
            let y = az_forward(x, a(al))?;
            let ry = relative_drawdown(&y)?;
            for (u, v) in ry.values().iter().zip(rx.values()) {
                dd = dd.max((u - (al + (1.0 - al) * v)).abs());
            }
            // Running maximum of aX is (X*)^(1-alpha), bit for bit.
            let mx = running_max(x);
            let my = running_max(&y);
            intertwine += mx
                .values()
                .iter()
                .zip(my.values())
                .filter(|(m, n)| m.powf(1.0 - al) != **n)
                .count();
            let back = az_inverse(&y, a(al), DEFAULT_INVERSE_TOL)?;
            for (u, v) in back.values().iter().zip(x.values()) {
                round = round.max(rel(*u, *v));
            }
            for &be in &ALPHAS {
                let twice = az_forward(&az_forward(x, a(al))?, a(be))?;
                let once = az_forward(x, a(al).compose(a(be)))?;
                for (u, v) in twice.values().iter().zip(once.values()) {
                    comp = comp.max(rel(*u, *v));
                }
            }
            for k in 0..x.len() {
                let t = StopIndex::At(k);
                let at_max = is_time_of_maximum(x, t, 0.0)?;
                if at_max != is_time_of_maximum(&y, t, 0.0)? {
                    tom += 1;
                }
                if at_max {
                    top_pow = top_pow.max(rel(y.values()[k], x.values()[k].powf(1.0 - al)));
                }
            }
            let tau = first_hit_level(x, 1.0f64.exp(), StopIndex::ZERO);
            let tau_y = first_hit_level(&y, (1.0 - al).exp(), StopIndex::ZERO);
            if let (Some(i), Some(j)) = (tau.index(), tau_y.index()) {
                if i.abs_diff(j) > 1 {
                    level_hits += 1;
                }
            } else if tau.is_finite() != tau_y.is_finite() {
                level_hits += 1;
            }
            let cycles = cycle_times(x, a(al))?;
            for n in 1..=3 {
                let fh = finite_horizon_numeraire(x, a(al), n)?;
                let end = cycles.start(n).clamp_to(x.last_index());
                if !verify_drawdown(&fh.path, a(al), 1e-12).holds() || fh.path.values()[..=end] != y.values()[..=end] {
                    fh_bad += 1;
                }
            }
            let phi = phi_process(x, x, a(al))?;
            phi_bad += phi.values().iter().filter(|&&p| p != 1.0).count();
            let phi0 = phi_process(z, x, DrawdownParam::ZERO)?;
            phi_bad += phi0
                .values()
                .iter()
                .zip(z.values().iter().zip(x.values()))
                .filter(|(p, (u, v))| rel(**p, *u / *v) > 1e-15)
                .count();
        }
        for t in [StopIndex::At(0), StopIndex::At(500), StopIndex::Never] {
            if rr_at(x, x, t)? != 0.0 {
                rr_bad += 1;
            }
            let (f, r) = (rr_at(z, x, t)?, rr_at(x, z, t)?);
            if f < -1.0 || f + r < -1e-12 {
                rr_bad += 1;
            }
        }
    }
    for &al in &ALPHAS {
        let mut last = -1.0;
        for i in 0..=100 {
            let f = kelly_fraction(i as f64 / 100.0, a(al))?;
            if !(0.0..=1.0 - al + 1e-15).contains(&f) || f < last {
                kelly_bad += 1;
            }
            last = f;
        }
    }
    c.max_below("drawdown_identity_abs_err", dd, 1e-12);
    c.zero("running_max_mismatches", intertwine);
    c.max_below("round_trip_rel_err", round, 1e-10);
    c.max_below("composition_rel_err", comp, 1e-10);
    c.zero("time_of_maximum_mismatches", tom);
    c.max_below("value_at_maxima_rel_err", top_pow, 1e-14);
    c.zero("level_hit_mismatches", level_hits);
    c.zero("finite_horizon_failures", fh_bad);
    c.zero("relative_return_failures", rr_bad);
    c.zero("phi_failures", phi_bad);
    c.zero("kelly_fraction_failures", kelly_bad);

    // Hand-traced cycle path and the two ratio formulas at the cycle end.
    let hand = SampledPath::from_values(1.0, vec![1.0, 2.0, 1.0, 2.0, 3.0, 1.5])?;
    let cyc = cycle_times(&hand, a(0.5))?;
    let traced = cyc.hit(1) == StopIndex::At(2) && cyc.start(2) == StopIndex::At(3) && cyc.hit(2) == StopIndex::At(5);
    c.push("cycle_hand_trace", traced.to_string(), "true".into(), traced);
    let dds = SimBatch::new(MarketModel::dds_preset(), TimeGrid::new(1e-3, 20_000)?, 20, 2)?;
    let zetas = dds.map_paths(|p| path_zetas(&p.numeraire(dds.model())?.wealth, a(0.5), 5, p.path_index()))?;
    let below = zetas
        .iter()
        .flatten()
        .filter(|z| z.direct < z.zeta * (1.0 - 1e-12))
        .count();
    c.zero("cycle_ratio_below_formula", below);

    let mut rep = Report::new(
        "selftest",
        "exact pathwise identities of the drawdown transform, cycle construction and relative returns",
        vec![("paths".into(), "100 gbm x 1000 steps, 20 dds x 20000 steps".into())],
        c.table,
    );
    rep.pass = c.pass;
    Ok(rep)
}
