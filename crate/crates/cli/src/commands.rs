//! One function per subcommand. Each returns whether all of its checks
//! passed; errors map to exit codes in [`crate::run`].

use std::path::Path;

use drawdown_kelly::horizon::{
    drawdown_race, growth_rate_experiment, oscillation_experiment, ratio_oscillation_from, turnpike_experiment,
    zeta_analytic_cdf, zeta_samples, zeta_scale_cdf,
};
use drawdown_kelly::io::{read_path_csv, write_path_csv};
use drawdown_kelly::path::running_max_slice;
use drawdown_kelly::returns::{err_at_level, maxima_supermartingale_check, phi_at_level};
use drawdown_kelly::rng::PathRng;
use drawdown_kelly::stats::{ecdf_sorted, ks_test, KsResult, MCEstimate};
use drawdown_kelly::{az_forward, az_inverse, DrawdownParam, Error, ProportionRule, SimBatch};

use crate::config::{self, Defaults, FileConfig, Preset, Settings};
use crate::report::{flag, num, Report, Table};
use crate::{selftest, CliError, Command, Common};

/// One-sided Monte Carlo margin in standard errors.
pub const SE_MARGIN: f64 = 3.0;
/// Allowed distance of a growth-rate estimate from `1 - alpha`.
pub const GROWTH_TOL: f64 = 0.05;
/// Sup-distance allowed between the closed-form cycle-ratio CDF and direct
/// sampling before the closed form is used.
pub const ORACLE_TOL: f64 = 0.005;
const ORACLE_DRAWS: usize = 100_000;

pub fn dispatch(cmd: Command) -> Result<bool, CliError> {
    match cmd {
        Command::Simulate(c) => simulate(&settings(&c, &c.overrides(), SIMULATE)?),
        Command::Transform(t) => transform(&t),
        Command::NumeraireTest { common, strategy } => {
            numeraire_test(&settings(&common, &common.overrides(), NUMERAIRE)?, &strategy)
        }
        Command::Growth(c) => growth(&settings(&c, &c.overrides(), GROWTH)?),
        Command::ZetaLaw { common, max_n } => {
            let o = config::Overrides {
                max_n,
                ..common.overrides()
            };
            zeta_law(&settings(&common, &o, ZETA)?)
        }
        Command::Oscillation { common, eps } => {
            let o = config::Overrides {
                eps,
                ..common.overrides()
            };
            oscillation(&settings(&common, &o, OSCILLATION)?)
        }
        Command::DrawdownRace(c) => race(&settings(&c, &c.overrides(), RACE)?),
        Command::Turnpike { common, n_list } => {
            let o = config::Overrides {
                n_list,
                ..common.overrides()
            };
            turnpike(&settings(&common, &o, TURNPIKE)?)
        }
        Command::Selftest { out, .. } => {
            let rep = selftest::run()?;
            rep.emit(out.as_deref())?;
            Ok(rep.pass)
        }
    }
}

const fn defaults(preset: Preset, dt: f64, t_max: f64, n_paths: usize) -> Defaults {
    Defaults {
        preset,
        dt,
        t_max,
        n_paths,
    }
}

const SIMULATE: Defaults = defaults(Preset::Gbm, 0.01, 1.0, 10);
const NUMERAIRE: Defaults = defaults(Preset::Gbm, 0.01, 50.0, 5000);
// DDS preset: G_t = t/2, so t_max = 200 gives G_T = 100.
const GROWTH: Defaults = defaults(Preset::Dds, 0.01, 200.0, 2000);
const ZETA: Defaults = defaults(Preset::Dds, 1e-4, 60.0, 600);
const OSCILLATION: Defaults = defaults(Preset::Dds, 1e-3, 200.0, 2000);
const RACE: Defaults = defaults(Preset::Dds, 1e-3, 40.0, 10_000);
const TURNPIKE: Defaults = defaults(Preset::Dds, 1e-3, 50.0, 2000);

fn settings(c: &Common, o: &config::Overrides, d: Defaults) -> Result<Settings, CliError> {
    let file = match &c.config {
        Some(p) => config::load(p)?,
        None => FileConfig::default(),
    };
    config::resolve(&file, o, d)
}

fn batch(s: &Settings) -> Result<SimBatch, CliError> {
    Ok(SimBatch::new(s.model.clone(), s.grid, s.n_paths, s.seed)?)
}

fn alpha(s: &Settings) -> DrawdownParam {
    DrawdownParam::new(s.alpha).expect("validated on load")
}

fn open_alpha(s: &Settings) -> Result<DrawdownParam, CliError> {
    if s.alpha == 0.0 {
        return Err(CliError::Config("this experiment needs alpha in (0, 1)".into()));
    }
    Ok(alpha(s))
}

fn finish(mut rep: Report, s: &Settings, samples: Option<Table>) -> Result<bool, CliError> {
    if s.dump_samples {
        if s.out_dir.is_none() {
            return Err(CliError::Config("--dump-samples needs --out".into()));
        }
        rep.samples = samples;
    }
    rep.emit(s.out_dir.as_deref())?;
    Ok(rep.pass)
}

fn simulate(s: &Settings) -> Result<bool, CliError> {
    let b = batch(s)?;
    let d = s.model.dim();
    let mut header = vec!["path_id".to_string(), "t".to_string()];
    header.extend((1..=d).map(|i| format!("asset_{i}")));
    header.extend(["xhat".to_string(), "growth".to_string()]);
    let blocks = b.map_paths(|p| {
        let num_path = p.numeraire(b.model())?;
        let mut out = String::new();
        for k in 0..s.grid.len() {
            let mut row = vec![p.path_index().to_string(), num(s.grid.time(k))];
            row.extend(p.prices_at(k).iter().map(|&x| num(x)));
            row.push(num(num_path.wealth.values()[k]));
            row.push(num(num_path.growth.values()[k]));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        Ok(out)
    })?;
    let mut csv = header.join(",");
    csv.push('\n');
    csv.extend(blocks);
    match &s.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join("simulate.csv"), csv)?;
        }
        None => print!("{csv}"),
    }
    eprintln!(
        "simulate: {} paths x {} steps, seed {}",
        s.n_paths,
        s.grid.n_steps(),
        s.seed
    );
    Ok(true)
}

fn input_error(e: Error) -> CliError {
    match e {
        Error::InvalidInput(m) | Error::Parse(m) => CliError::Input(m),
        other => CliError::Core(other),
    }
}

fn transform(t: &crate::TransformArgs) -> Result<bool, CliError> {
    let a = DrawdownParam::new(t.alpha).map_err(|e| CliError::Config(e.to_string()))?;
    if !(t.tol.is_finite() && t.tol >= 0.0) {
        return Err(CliError::Config("--tol must be nonnegative".into()));
    }
    let text = std::fs::read_to_string(&t.input).map_err(|e| CliError::Input(format!("{}: {e}", t.input.display())))?;
    let input = read_path_csv(&text).map_err(input_error)?;
    let (output, constrained) = if t.inverse {
        match az_inverse(&input, a, t.tol) {
            Ok(x) => (x, input.clone()),
            Err(Error::ConstraintViolation { index, value, floor }) => {
                eprintln!("ddkelly: constraint violated at index {index}: value {value} below floor {floor}");
                return Ok(false);
            }
            Err(e) => return Err(input_error(e)),
        }
    } else {
        let y = az_forward(&input, a).map_err(input_error)?;
        (y.clone(), y)
    };
    let mut ok = true;
    if t.verify {
        let m = running_max_slice(constrained.values());
        let bad: Vec<usize> = constrained
            .values()
            .iter()
            .zip(&m)
            .enumerate()
            .filter(|(_, (&v, &mx))| v < a.value() * mx * (1.0 - t.tol))
            .map(|(k, _)| k)
            .collect();
        if let Some(&k) = bad.first() {
            eprintln!("ddkelly: {} floor violations, first at index {k}", bad.len());
            ok = false;
        } else {
            eprintln!(
                "verify: drawdown floor {} holds at all {} points",
                a.value(),
                constrained.len()
            );
        }
    }
    let csv = write_path_csv(&output);
    match &t.output {
        Some(p) => std::fs::write(p, csv)?,
        None => print!("{csv}"),
    }
    Ok(ok)
}

/// Reads a proportions CSV: a header `asset_1,...,asset_d` then either one
/// row (constant fractions) or one row per time step.
pub fn read_proportions(path: &Path, dim: usize) -> Result<ProportionRule, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let expected: Vec<String> = (1..=dim).map(|i| format!("asset_{i}")).collect();
    let header: Vec<String> = lines
        .next()
        .unwrap_or("")
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    if header != expected {
        return Err(CliError::Input(format!(
            "{}: header must be {}",
            path.display(),
            expected.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row: Result<Vec<f64>, _> = line.split(',').map(|x| x.trim().parse::<f64>()).collect();
        let row = row.map_err(|e| CliError::Input(format!("{} row {}: {e}", path.display(), i + 1)))?;
        if row.len() != dim {
            return Err(CliError::Input(format!(
                "{} row {}: expected {dim} values",
                path.display(),
                i + 1
            )));
        }
        rows.push(row);
    }
    match rows.len() {
        0 => Err(CliError::Input(format!("{}: no rows", path.display()))),
        1 => Ok(ProportionRule::Fixed(rows.pop().expect("one row"))),
        _ => Ok(ProportionRule::Schedule(rows)),
    }
}

fn strategy(name: &str, dim: usize) -> Result<(String, ProportionRule), CliError> {
    Ok(match name {
        "baseline" => (name.into(), ProportionRule::Baseline),
        "buyhold" => (name.into(), ProportionRule::all_in(dim, 0)),
        "halfkelly" => (name.into(), ProportionRule::Kelly(0.5)),
        path => ("custom".into(), read_proportions(Path::new(path), dim)?),
    })
}

fn estimate_row(t: &mut Table, test: &str, e: &MCEstimate, pass: bool) {
    t.push(vec![
        test.into(),
        num(e.mean),
        num(e.se),
        e.n.to_string(),
        e.flagged.to_string(),
        flag(pass),
    ]);
}

fn numeraire_test(s: &Settings, names: &[String]) -> Result<bool, CliError> {
    let b = batch(s)?;
    let a = alpha(s);
    let names: Vec<String> = if names.is_empty() {
        vec!["baseline".into(), "buyhold".into(), "halfkelly".into()]
    } else {
        names.to_vec()
    };
    let mut table = Table::new(&["test", "mean", "se", "n", "flagged", "pass"]);
    let mut all = true;
    let mut censored = 0;
    for name in &names {
        let (label, rule) = strategy(name, s.model.dim())?;
        let err = err_at_level(&b, &rule, a, s.level)?;
        let phi = phi_at_level(&b, &rule, a, s.level)?;
        let sm = maxima_supermartingale_check(&b, &rule, a, 0.5 * s.level, s.level)?;
        let checks = [
            (
                format!("err:{label}"),
                err.estimate,
                err.estimate.at_most(0.0, SE_MARGIN),
            ),
            (
                format!("phi:{label}"),
                phi.estimate,
                phi.estimate.at_most(1.0, SE_MARGIN),
            ),
            (
                format!("supermartingale:{label}"),
                sm.increment,
                sm.increment.at_most(0.0, SE_MARGIN),
            ),
        ];
        for (test, e, pass) in &checks {
            estimate_row(&mut table, test, e, *pass);
            all &= pass;
        }
        censored = censored.max(err.censored);
    }
    let mut rep = Report::new(
        "numeraire_test",
        "the constrained numeraire has the numeraire property among constrained wealths at times of maximum",
        s.echo(),
        table,
    );
    rep.notes.push(format!(
        "err and phi are read at tau_l; paths where tau_l is not reached use the final grid point ({censored} such paths)"
    ));
    rep.notes.push(format!(
        "pass means mean <= bound + {SE_MARGIN} se; supermartingale compares tau_(l/2) with tau_l"
    ));
    rep.pass = all;
    finish(rep, s, None)
}

fn growth(s: &Settings) -> Result<bool, CliError> {
    let b = batch(s)?;
    let a = alpha(s);
    let panel = [
        ("baseline", ProportionRule::Baseline),
        ("buyhold", ProportionRule::all_in(s.model.dim(), 0)),
        ("kelly_0.5", ProportionRule::Kelly(0.5)),
        ("kelly_1.5", ProportionRule::Kelly(1.5)),
        ("kelly_2", ProportionRule::Kelly(2.0)),
    ];
    let rules: Vec<ProportionRule> = panel.iter().map(|p| p.1.clone()).collect();
    let rep_core = growth_rate_experiment(&b, a, &rules)?;
    let target = 1.0 - s.alpha;
    let mut table = Table::new(&["strategy", "mean", "se", "n", "flagged", "bound", "pass"]);
    let num_pass = (rep_core.numeraire.mean - target).abs() <= GROWTH_TOL;
    let row = |name: &str, e: &MCEstimate, bound: String, pass: bool| {
        vec![
            name.into(),
            num(e.mean),
            num(e.se),
            e.n.to_string(),
            e.flagged.to_string(),
            bound,
            flag(pass),
        ]
    };
    table.push(row(
        "numeraire",
        &rep_core.numeraire,
        format!("{target}+-{GROWTH_TOL}"),
        num_pass,
    ));
    let mut all = num_pass;
    for ((name, _), (_, e)) in panel.iter().zip(&rep_core.panel) {
        let pass = e.mean <= target + GROWTH_TOL;
        all &= pass;
        table.push(row(name, e, format!("<={}", target + GROWTH_TOL), pass));
    }
    let mut rep = Report::new(
        "growth",
        "log-growth of the constrained numeraire relative to the growth process tends to 1 - alpha and no constrained strategy does better",
        s.echo(),
        table,
    );
    rep.notes
        .push("each row is the mean over paths of log(aZ_T) / G_T for the transformed strategy Z".into());
    rep.pass = all;
    finish(rep, s, None)
}

/// Largest gap between the closed-form cycle-ratio CDF and the empirical CDF
/// of `(2-alpha)^(-1) (alpha + (1-alpha)/eta)^alpha` with `eta` uniform.
pub fn eta_oracle_sup_error(a: DrawdownParam, seed: u64) -> Result<f64, CliError> {
    let al = a.value();
    let mut rng = PathRng::new(seed, u64::MAX);
    let mut z: Vec<f64> = (0..ORACLE_DRAWS)
        .map(|_| (al + (1.0 - al) / rng.uniform()).powf(al) / (2.0 - al))
        .collect();
    z.sort_by(f64::total_cmp);
    let mut sup: f64 = 0.0;
    for q in 1..1000 {
        let x = z[q * z.len() / 1000];
        sup = sup.max((ecdf_sorted(&z, x) - zeta_analytic_cdf(x, a)?).abs());
    }
    Ok(sup)
}

fn check_row(t: &mut Table, check: &str, value: String, threshold: &str, pass: Option<bool>) {
    let verdict = pass.map_or_else(|| "info".to_string(), flag);
    t.push(vec![check.into(), value, threshold.into(), verdict]);
}

fn zeta_law(s: &Settings) -> Result<bool, CliError> {
    let b = batch(s)?;
    let a = open_alpha(s)?;
    let oracle = eta_oracle_sup_error(a, s.seed)?;
    let harvest = zeta_samples(&b, a, s.max_n)?;
    let z = harvest.values();
    let floor = 1.0 / (2.0 - s.alpha);
    let mut table = Table::new(&["check", "value", "threshold", "pass"]);
    check_row(
        &mut table,
        "oracle_sup_error",
        num(oracle),
        &format!("<{}", num(ORACLE_TOL)),
        Some(oracle < ORACLE_TOL),
    );
    let enough = z.len() >= drawdown_kelly::stats::KS_MIN_SAMPLES;
    check_row(&mut table, "samples", z.len().to_string(), ">=20", Some(enough));
    check_row(
        &mut table,
        "truncated_paths",
        harvest.truncated_paths.to_string(),
        "",
        None,
    );
    let mut all = oracle < ORACLE_TOL && enough;
    if enough {
        let analytic: KsResult = ks_test(&z, |x| zeta_analytic_cdf(x, a).expect("alpha validated"))?;
        let scale: KsResult = ks_test(&z, |x| zeta_scale_cdf(x, a).expect("alpha validated"))?;
        let min = z.iter().copied().fold(f64::INFINITY, f64::min);
        let osc = ratio_oscillation_from(&harvest.per_path(), s.alpha, &[s.max_n])?;
        let bound = SE_MARGIN / (osc.n_pairs as f64).sqrt();
        let indep = osc.lag1_rank_autocorr.abs() <= bound;
        check_row(&mut table, "ks_statistic", num(analytic.statistic), "", None);
        check_row(
            &mut table,
            "ks_p_value",
            num(analytic.p_value),
            ">0.01",
            Some(analytic.p_value > 0.01),
        );
        check_row(
            &mut table,
            "min_zeta",
            num(min),
            &format!(">={}", num(floor - 1e-3)),
            Some(min >= floor - 1e-3),
        );
        check_row(
            &mut table,
            "lag1_rank_autocorr",
            num(osc.lag1_rank_autocorr),
            &format!("|.|<={}", num(bound)),
            Some(indep),
        );
        check_row(&mut table, "ks_p_value_scale_law", num(scale.p_value), "", None);
        all &= analytic.p_value > 0.01 && min >= floor - 1e-3 && indep;
    }
    let mut samples = Table::new(&["path", "n", "zeta", "direct"]);
    for x in &harvest.samples {
        samples.push(vec![x.path.to_string(), x.n.to_string(), num(x.zeta), num(x.direct)]);
    }
    let mut rep = Report::new(
        "zeta_law",
        "at the end of drawdown cycle n the finite-horizon optimum over the constrained numeraire is (2-alpha)^-1 (alpha + (1-alpha)/eta)^alpha with eta uniform",
        s.echo(),
        table,
    );
    rep.echo.push(("max_n".into(), s.max_n.to_string()));
    rep.notes.push(
        "ks_p_value_scale_law tests against P(zeta > z) = ((2-alpha) z)^(-1/(1-alpha)), the law implied by the scale function of the numeraire".into(),
    );
    rep.pass = all;
    finish(rep, s, Some(samples))
}

fn oscillation(s: &Settings) -> Result<bool, CliError> {
    let b = batch(s)?;
    let a = alpha(s);
    let stats = oscillation_experiment(&b, a, s.eps)?;
    let n = stats.len() as f64;
    let near_floor = stats.iter().filter(|x| x.min_rel_dd <= s.alpha + s.eps).count() as f64 / n;
    let at_one = stats.iter().filter(|x| x.max_rel_dd == 1.0).count();
    let lowest = stats.iter().map(|x| x.min_rel_dd).fold(f64::INFINITY, f64::min);
    let below: Vec<f64> = stats.iter().map(|x| x.crossings_below as f64).collect();
    let above: Vec<f64> = stats.iter().map(|x| x.crossings_above as f64).collect();
    let mean = |v: &[f64]| drawdown_kelly::stats::pairwise_sum(v) / n;
    let mut table = Table::new(&["check", "value", "threshold", "pass"]);
    check_row(
        &mut table,
        "frac_min_near_floor",
        num(near_floor),
        ">=0.99",
        Some(near_floor >= 0.99),
    );
    check_row(
        &mut table,
        "paths_max_one",
        at_one.to_string(),
        &format!("=={}", stats.len()),
        Some(at_one == stats.len()),
    );
    check_row(
        &mut table,
        "lowest_min_rel_dd",
        num(lowest),
        &format!(">={}", num(s.alpha)),
        Some(lowest >= s.alpha),
    );
    check_row(&mut table, "mean_crossings_below", num(mean(&below)), "", None);
    check_row(&mut table, "mean_crossings_above", num(mean(&above)), "", None);
    let mut samples = Table::new(&["path", "min_rel_dd", "max_rel_dd", "crossings_below", "crossings_above"]);
    for (i, x) in stats.iter().enumerate() {
        samples.push(vec![
            i.to_string(),
            num(x.min_rel_dd),
            num(x.max_rel_dd),
            x.crossings_below.to_string(),
            x.crossings_above.to_string(),
        ]);
    }
    let mut rep = Report::new(
        "oscillation",
        "the relative drawdown of the constrained numeraire keeps returning to alpha and to 1",
        s.echo(),
        table,
    );
    rep.echo.push(("eps".into(), s.eps.to_string()));
    rep.pass = near_floor >= 0.99 && at_one == stats.len() && lowest >= s.alpha;
    finish(rep, s, Some(samples))
}

fn race(s: &Settings) -> Result<bool, CliError> {
    let b = batch(s)?;
    let a = open_alpha(s)?;
    let r = drawdown_race(&b, a)?;
    let pass = r.estimate.at_least(s.alpha, SE_MARGIN);
    let mut table = Table::new(&["alpha", "mean", "se", "n", "excluded", "bound", "pass"]);
    table.push(vec![
        num(s.alpha),
        num(r.estimate.mean),
        num(r.estimate.se),
        r.estimate.n.to_string(),
        r.excluded.to_string(),
        format!(">={}-{SE_MARGIN}se", s.alpha),
        flag(pass),
    ]);
    let mut rep = Report::new(
        "drawdown_race",
        "the numeraire falls to alpha times its maximum before its maximum grows by a factor e with probability at least alpha",
        s.echo(),
        table,
    );
    rep.notes
        .push("paths where neither event occurs on the grid are excluded and counted".into());
    rep.pass = pass;
    finish(rep, s, None)
}

fn turnpike(s: &Settings) -> Result<bool, CliError> {
    let b = batch(s)?;
    let a = open_alpha(s)?;
    let r = turnpike_experiment(&b, a, s.level, &s.n_list)?;
    let mut table = Table::new(&[
        "n",
        "p_started",
        "p_deviating",
        "mean_sup_dev",
        "max_sup_dev",
        "unexplained",
        "pass",
    ]);
    let mut all = true;
    let mut prev = f64::INFINITY;
    let last = r.rows.len() - 1;
    for (j, row) in r.rows.iter().enumerate() {
        let mut pass = row.unexplained == 0 && row.p_deviating <= row.p_started && row.p_started <= prev;
        if j == last {
            pass &= row.p_started < 0.05;
        }
        prev = row.p_started;
        all &= pass;
        table.push(vec![
            row.n.to_string(),
            num(row.p_started),
            num(row.p_deviating),
            num(row.mean_sup_dev),
            num(row.max_sup_dev),
            row.unexplained.to_string(),
            flag(pass),
        ]);
    }
    let mut rep = Report::new(
        "turnpike",
        "finite-horizon optima coincide with the constrained numeraire on [0, tau_l] once cycle n starts after tau_l",
        s.echo(),
        table,
    );
    rep.echo.push((
        "n_list".into(),
        s.n_list.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" "),
    ));
    rep.notes.push(format!(
        "{} paths did not reach tau_l and use the whole grid",
        r.censored
    ));
    rep.notes.push(
        "p_started = P(T_(n-1/2) <= tau_l) must not increase in n and must end below 0.05; deviation without a start is an error".into(),
    );
    rep.pass = all;
    finish(rep, s, None)
}
