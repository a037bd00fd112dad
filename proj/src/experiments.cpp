#include "snake/experiments.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>

#include "snake/cloud_io.hpp"
#include "snake/geometry.hpp"
#include "snake/hitting.hpp"
#include "snake/moments.hpp"
#include "snake/series.hpp"
#include "snake/snake.hpp"
#include "snake/stats.hpp"
#include "snake/u1_solver.hpp"

namespace snake {

// ---------------------------------------------------------------------------
// CSV

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path), columns_(header.size()) {
  if (!out_) throw std::runtime_error("csv: cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << "\n";
}

CsvWriter& CsvWriter::cell(const std::string& s) {
  out_ << (filled_++ ? "," : "") << s;
  return *this;
}

CsvWriter& CsvWriter::cell(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return cell(std::string(buf));
}

void CsvWriter::end_row() {
  if (filled_ != columns_) throw std::logic_error("csv: row width does not match the header");
  out_ << "\n";
  filled_ = 0;
}

// ---------------------------------------------------------------------------

bool ExperimentResult::passed() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.pass; });
}

void ExperimentResult::check(const std::string& name, bool pass, const std::string& detail) {
  criteria.push_back({name, pass, detail});
}

namespace {

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string num(double v) { return fmt("%.6g", v); }

std::string dkey(const std::string& base, int d) { return base + "_d" + std::to_string(d); }

std::vector<double> unit_axis(int d, double distance) {
  std::vector<double> x(static_cast<std::size_t>(d), 0.0);
  x[0] = distance;
  return x;
}

struct Context {
  const Config& cfg;
  const RunOptions& opts;
  ExperimentResult res;

  std::filesystem::path file(const std::string& name) {
    res.files.push_back(name);
    return opts.out_dir / name;
  }
  bool writing() const { return opts.write_files; }
  std::uint64_t seed(std::uint64_t tag) const { return derive_seed(opts.seed, tag); }
};

// ---------------------------------------------------------------------------
// u1-constants

void u1_constants(Context& c) {
  const auto dims = c.cfg.get_doubles("dims", {5, 6, 7});
  const auto N = static_cast<std::size_t>(c.cfg.get_int("series_terms", 2000));
  const double h = c.cfg.get_double("h", 1e-6);
  const double r_max = c.cfg.get_double("r_max", 1e3);
  const double tol = c.cfg.get_double("tol", 1e-9);
  const double agree = c.cfg.get_double("agreement_tol", 0.02);
  const double recon_r = c.cfg.get_double("reconstruction_radius", 5.0);
  const double recon_tol = c.cfg.get_double("reconstruction_tol", 0.005);

  std::unique_ptr<CsvWriter> constants;
  if (c.writing())
    constants = std::make_unique<CsvWriter>(
        c.file("u1_constants.csv"),
        std::vector<std::string>{"d", "a0_series", "a0_series_error", "a0_ode", "C0", "b0", "b1_prime"});
  for (double dd : dims) {
    const int d = static_cast<int>(dd);
    if (d < 5) throw std::invalid_argument("u1-constants: dims must be >= 5");
    const auto t0 = std::chrono::steady_clock::now();
    const RadialSolution sol = solve_u1(d, h, r_max, tol);
    const SeriesRadius rad = a0_from_series(q_seq(d, N));
    const double a0_ode = sol.info().a0;
    const double rel = std::abs(rad.a0 - a0_ode) / a0_ode;
    const BoundsReport rep = certify_bounds(sol, rad.a0, rad.a0_error);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.res.metrics[dkey("a0_series", d)] = rad.a0;
    c.res.metrics[dkey("a0_series_error", d)] = rad.a0_error;
    c.res.metrics[dkey("a0_ode", d)] = a0_ode;
    c.res.metrics[dkey("a0_rel_diff", d)] = rel;
    c.res.metrics[dkey("c0", d)] = c0_constant(d, rad.a0);
    c.res.metrics[dkey("lower_bound_violations", d)] = static_cast<double>(rep.violations);
    c.res.metrics[dkey("lower_bound_worst_ratio", d)] = rep.worst_ratio;
    c.res.metrics[dkey("seconds", d)] = secs;
    c.res.check(dkey("a0_agreement", d), rel <= agree,
                "series=" + num(rad.a0) + " ode=" + num(a0_ode) + " rel=" + num(rel));
    c.res.check(dkey("lower_bound", d), rep.lower_bound_ok, "violations=" + std::to_string(rep.violations));
    c.res.check(dkey("monotone", d), rep.monotone_ok);
    if (d == 5) {
      const double rec = series_u1(q_seq(d, std::min<std::size_t>(N, 600)), rad.a0, recon_r);
      const double rel_rec = std::abs(rec / sol.u1(recon_r) - 1.0);
      c.res.metrics["series_reconstruction_rel_d5"] = rel_rec;
      c.res.check("series_reconstruction_d5", rel_rec <= recon_tol, "rel=" + num(rel_rec));
    }
    if (constants) {
      const Constants& k = rep.constants;
      constants->cell(static_cast<double>(d)).cell(rad.a0).cell(rad.a0_error).cell(a0_ode).cell(k.c0).cell(k.b0)
          .cell(k.b1_prime);
      constants->end_row();
      CsvWriter sol_csv(c.file("u1_solution_d" + std::to_string(d) + ".csv"), {"r", "u", "du", "r_pow_u"});
      for (std::size_t i = 0; i < sol.size(); ++i) {
        const double r = sol.radii()[i];
        sol_csv.cell(r).cell(sol.values()[i]).cell(sol.derivatives()[i]).cell(std::pow(r, d - 2) * sol.values()[i]);
        sol_csv.end_row();
      }
    }
  }
}

// ---------------------------------------------------------------------------
// d4-asymptotics

void d4_asymptotics(Context& c) {
  const double h = c.cfg.get_double("h", 1e-6);
  const double r_max = c.cfg.get_double("r_max", 1e7);
  const double tol = c.cfg.get_double("tol", 1e-9);
  const auto radii = c.cfg.get_doubles("radii", {1e3, 1e4, 1e5, 1e6});
  const double factor = c.cfg.get_double("envelope_factor", 5.0);
  const auto rho_terms = static_cast<std::size_t>(c.cfg.get_int("rho_terms", 40));

  const RadialSolution sol = solve_u1(4, h, r_max, tol);
  std::unique_ptr<CsvWriter> env;
  if (c.writing())
    env = std::make_unique<CsvWriter>(c.file("d4_envelope.csv"),
                                      std::vector<std::string>{"r", "r2_log_r_u", "expansion", "residual", "bound"});
  for (double r : radii) {
    const double L = std::log(r);
    const double res = d4_envelope_residual(sol, r);
    const double bound = factor / L;
    c.res.metrics["envelope_residual_r" + fmt("%.0e", r)] = res;
    c.res.check("envelope_r=" + fmt("%.0e", r), std::abs(res) <= bound, "residual=" + num(res) + " bound=" + num(bound));
    if (env) {
      env->cell(r).cell(r * r * L * sol.u1(r)).cell(0.5 + std::log(L) / (4.0 * L)).cell(res).cell(bound);
      env->end_row();
    }
  }
  const BoundsReport rep = certify_bounds(sol, 0.5, 0.0);
  c.res.metrics["lower_bound_violations_d4"] = static_cast<double>(rep.violations);
  c.res.metrics["lower_bound_worst_ratio_d4"] = rep.worst_ratio;
  c.res.check("lower_bound_d4", rep.lower_bound_ok, "violations=" + std::to_string(rep.violations));
  c.res.check("monotone_d4", rep.monotone_ok);

  // Optimally truncated asymptotic series for dz/ds against the ODE flow.
  const SeriesCoefficients rho = rho_seq(rho_terms);
  std::unique_ptr<CsvWriter> flow;
  if (c.writing())
    flow = std::make_unique<CsvWriter>(
        c.file("d4_rho_flow.csv"),
        std::vector<std::string>{"r", "w", "dw_ds_ode", "dw_ds_series", "truncation", "smallest_term", "abs_diff"});
  double worst = 0.0;
  for (double r : {1e2, 1e3, 1e4, 1e5, 1e6}) {
    if (r > sol.r_max()) continue;
    const D4Flow f = d4_flow(sol, r);
    const AsymptoticSum s = rho_asymptotic_sum(rho, f.w);
    const double diff = std::abs(f.dw_ds - s.value);
    // residual relative to the leading term w^2
    worst = std::max(worst, diff / (f.w * f.w));
    if (flow) {
      flow->cell(r).cell(f.w).cell(f.dw_ds).cell(s.value).cell(static_cast<double>(s.truncation)).cell(s.smallest_term)
          .cell(diff);
      flow->end_row();
    }
  }
  c.res.metrics["rho_flow_worst_rel"] = worst;
}

// ---------------------------------------------------------------------------
// moment-identity

void moment_identity(Context& c) {
  const auto pairs = c.cfg.get_doubles("pairs", {0, 1, 1, 2, 0.5, 3});
  const auto lambdas = c.cfg.get_doubles("lambdas", {0.1, 0.5, 0.9});
  const auto terms = static_cast<std::size_t>(c.cfg.get_int("gamma_terms", 60));
  const double gtol = c.cfg.get_double("gamma_tol", 1e-10);
  const auto orders = static_cast<std::size_t>(c.cfg.get_int("orders", 8));
  if (pairs.size() % 2) throw std::invalid_argument("moment-identity: pairs needs an even number of values");

  std::unique_ptr<CsvWriter> coeffs, moments;
  if (c.writing()) {
    coeffs = std::make_unique<CsvWriter>(c.file("moment_h_coefficients.csv"),
                                         std::vector<std::string>{"t", "T", "n", "piece_lo", "piece_hi", "power",
                                                                  "coefficient"});
    moments = std::make_unique<CsvWriter>(c.file("moment_values.csv"),
                                          std::vector<std::string>{"t", "T", "n", "moment", "exact"});
  }
  std::size_t exact = 0;
  bool positive = true;
  for (std::size_t k = 0; k < pairs.size(); k += 2) {
    const mpq_class t(pairs[k]), T(pairs[k + 1]);
    if (!(T > t) || t < 0) throw std::invalid_argument("moment-identity: need 0 <= t < T");
    const auto table = h_hierarchy(PiecewisePolynomial::indicator(T - t, T), orders, T);
    const mpq_class closed = second_moment_closed_form(t, T);
    const bool ok = table.at(1).moment == closed;
    exact += ok;
    c.res.check("identity_t=" + num(pairs[k]) + "_T=" + num(pairs[k + 1]), ok,
                "2!h_2=" + table.at(1).moment.get_str() + " closed=" + closed.get_str());
    for (const auto& m : table) {
      positive = positive && m.moment >= 0;
      if (!coeffs) continue;
      moments->cell(pairs[k]).cell(pairs[k + 1]).cell(static_cast<double>(m.order)).cell(m.moment.get_d())
          .cell(m.moment.get_str());
      moments->end_row();
      const auto& b = m.h.breakpoints();
      for (std::size_t p = 0; p < m.h.piece_count(); ++p)
        for (std::size_t j = 0; j < m.h.pieces()[p].size(); ++j) {
          coeffs->cell(pairs[k]).cell(pairs[k + 1]).cell(static_cast<double>(m.order)).cell(b[p].get_str())
              .cell(b[p + 1].get_str()).cell(static_cast<double>(j)).cell(m.h.pieces()[p][j].get_str());
          coeffs->end_row();
        }
    }
  }
  c.res.metrics["identity_exact_count"] = static_cast<double>(exact);
  c.res.check("moment_positivity", positive);

  const SeriesCoefficients gamma = gamma_seq(terms);
  std::unique_ptr<CsvWriter> gcsv;
  if (c.writing())
    gcsv = std::make_unique<CsvWriter>(c.file("gamma_generating.csv"),
                                       std::vector<std::string>{"lambda", "partial_sum", "closed_form", "abs_error",
                                                                "terms_needed"});
  const SeriesCoefficients gamma_long = gamma_seq(std::max<std::size_t>(terms, 400));
  for (double lam : lambdas) {
    const double s = gamma_generating(gamma, lam);
    const double exact_v = 1.0 - std::sqrt(1.0 - lam);
    const double err = std::abs(s - exact_v);
    // smallest truncation reaching the tolerance, for the record
    double needed = NAN;
    long double acc = 0.0L, pw = 1.0L;
    for (std::size_t n = 1; n <= gamma_long.last_index; ++n) {
      pw *= lam;
      acc += static_cast<long double>(gamma_long.at(n).get_d()) * pw;
      if (std::abs(static_cast<double>(acc) - exact_v) <= gtol) {
        needed = static_cast<double>(n);
        break;
      }
    }
    c.res.metrics["gamma_error_lambda=" + num(lam)] = err;
    c.res.metrics["gamma_terms_needed_lambda=" + num(lam)] = needed;
    c.res.check("gamma_lambda=" + num(lam), err <= gtol,
                "abs_error=" + num(err) + " terms=" + std::to_string(terms) + " terms_needed=" + num(needed));
    if (gcsv) {
      gcsv->cell(lam).cell(s).cell(exact_v).cell(err).cell(needed);
      gcsv->end_row();
    }
  }
}

// ---------------------------------------------------------------------------
// occupation-moment-mc

void occupation_moment_mc(Context& c) {
  const int d = static_cast<int>(c.cfg.get_int("d", 5));
  const double dist = c.cfg.get_double("center_distance", 2.0);
  const double radius = c.cfg.get_double("radius", 0.5);
  const auto M = static_cast<std::size_t>(c.cfg.get_int("M", 100000));
  HittingOptions ho;
  ho.r_min = c.cfg.get_double("r_min", 1e-2);
  ho.r_max = c.cfg.get_double("r_max", 1e4);
  ho.resolution.contour_step = c.cfg.get_double("contour_step", 2.5e-3);
  ho.resolution.n_max = static_cast<std::size_t>(c.cfg.get_int("n_max", 1 << 20));
  ho.pilot = static_cast<std::size_t>(c.cfg.get_int("pilot", 4000));
  ho.pilot_half_steps = static_cast<std::size_t>(c.cfg.get_int("pilot_half_steps", 1024));
  const double k_sigma = c.cfg.get_double("sigmas", 3.0);

  const Ball A{unit_axis(d, dist), radius};
  const std::vector<double> origin(static_cast<std::size_t>(d), 0.0);
  const double first = occupation_first_moment(origin, A);
  const double second = occupation_second_moment(origin, A);
  const OccupationMoments mc = occupation_moments_mc(A, M, c.seed(6), ho);
  const double budget1 = k_sigma * mc.first.stderr_ + mc.first.tail_budget();
  const double diff1 = std::abs(mc.first.estimate - first);
  c.res.metrics["first_moment_quadrature"] = first;
  c.res.metrics["first_moment_mc"] = mc.first.estimate;
  c.res.metrics["first_moment_stderr"] = mc.first.stderr_;
  c.res.metrics["first_moment_tail"] = mc.first.tail_budget();
  c.res.metrics["first_moment_abs_diff"] = diff1;
  c.res.metrics["second_moment_quadrature"] = second;
  c.res.metrics["second_moment_mc"] = mc.second.estimate;
  c.res.metrics["second_moment_stderr"] = mc.second.stderr_;
  c.res.check("first_moment", diff1 <= budget1,
              "mc=" + num(mc.first.estimate) + " quad=" + num(first) + " diff=" + num(diff1) + " budget=" + num(budget1));
  if (c.writing()) {
    CsvWriter w(c.file("occupation_moments.csv"),
                {"x", "center_distance", "radius", "order", "quadrature", "mc", "stderr", "lower_tail", "upper_tail"});
    for (int order : {1, 2}) {
      const MassEstimate& e = order == 1 ? mc.first : mc.second;
      w.cell("0").cell(dist).cell(radius).cell(static_cast<double>(order)).cell(order == 1 ? first : second)
          .cell(e.estimate).cell(e.stderr_).cell(e.lower_tail).cell(e.upper_tail);
      w.end_row();
    }
  }
}

// ---------------------------------------------------------------------------
// feynman-kac

void feynman_kac(Context& c) {
  const int d = static_cast<int>(c.cfg.get_int("d", 5));
  const double dist = c.cfg.get_double("center_distance", 2.0);
  const double eps = c.cfg.get_double("eps", 0.5);
  const auto M = static_cast<std::size_t>(c.cfg.get_int("M", 100000));
  FeynmanKacOptions fo;
  fo.horizon = c.cfg.get_double("horizon", fo.horizon);
  fo.kappa = c.cfg.get_double("kappa", fo.kappa);
  fo.dt_max = c.cfg.get_double("dt_max", fo.dt_max);
  fo.far_radius = c.cfg.get_double("far_radius", fo.far_radius);
  const double k_sigma = c.cfg.get_double("sigmas", 3.0);

  const RadialSolution sol = solve_u1(d);
  const FeynmanKacResult r = verify_feynman_kac(sol, unit_axis(d, dist), eps, M, c.seed(7), fo);
  const double diff = std::abs(r.mc - r.lhs);
  const double budget = k_sigma * r.stderr_ + r.tail_bound;
  c.res.metrics["u_eps"] = r.lhs;
  c.res.metrics["mc"] = r.mc;
  c.res.metrics["stderr"] = r.stderr_;
  c.res.metrics["tail_bound"] = r.tail_bound;
  c.res.metrics["abs_diff"] = diff;
  c.res.check("feynman_kac", diff <= budget,
              "u=" + num(r.lhs) + " mc=" + num(r.mc) + " diff=" + num(diff) + " budget=" + num(budget));
  if (c.writing()) {
    CsvWriter w(c.file("feynman_kac.csv"), {"d", "distance", "eps", "paths", "u_eps", "mc", "stderr", "tail", "tail_bound"});
    w.cell(static_cast<double>(d)).cell(dist).cell(eps).cell(static_cast<double>(M)).cell(r.lhs).cell(r.mc)
        .cell(r.stderr_).cell(r.tail).cell(r.tail_bound);
    w.end_row();
  }
}

// ---------------------------------------------------------------------------
// hitting-prob

void hitting_prob(Context& c) {
  const int d = static_cast<int>(c.cfg.get_int("d", 5));
  const auto dists = c.cfg.get_doubles("distances", {2.0, 3.0});
  const double eps = c.cfg.get_double("eps", 0.5);
  const auto levels = c.cfg.get_doubles("half_steps", {4096, 16384, 65536});
  const auto samples = c.cfg.get_doubles("samples", {8000, 3000, 1500});
  const double rel_tol = c.cfg.get_double("rel_tol", 0.10);
  const double k_sigma = c.cfg.get_double("sigmas", 3.0);
  const auto raw_M = static_cast<std::size_t>(c.cfg.get_int("duration_sampled_M", 0));
  if (levels.size() != samples.size() || levels.size() < 2)
    throw std::invalid_argument("hitting-prob: half_steps and samples need equal length >= 2");

  const RadialSolution sol = solve_u1(d);
  std::unique_ptr<CsvWriter> w;
  if (c.writing())
    w = std::make_unique<CsvWriter>(c.file("hitting_prob.csv"),
                                    std::vector<std::string>{"distance", "eps", "estimator", "half_steps", "resolution",
                                                             "estimate", "stderr", "u_eps", "ratio"});
  for (double dist : dists) {
    const auto y = unit_axis(d, dist);
    const double target = u_eps(sol, y, eps);
    // log(estimate) is close to linear in the spatial resolution (2n)^{-1/4}; extrapolate to 0.
    std::vector<double> xs, ys, ws;
    for (std::size_t k = 0; k < levels.size(); ++k) {
      const auto n = static_cast<std::size_t>(levels[k]);
      const MassEstimate e = hitting_prob_scaled(y, eps, n, static_cast<std::size_t>(samples[k]), c.seed(80 + k));
      const double s = std::pow(2.0 * static_cast<double>(n), -0.25);
      xs.push_back(s);
      ys.push_back(std::log(e.estimate));
      ws.push_back(std::pow(e.estimate / e.stderr_, 2));
      if (w) {
        w->cell(dist).cell(eps).cell("scale_integrated").cell(static_cast<double>(n)).cell(s).cell(e.estimate)
            .cell(e.stderr_).cell(target).cell(e.estimate / target);
        w->end_row();
      }
    }
    // weighted least squares for log est = a + b s
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      sw += ws[k];
      sx += ws[k] * xs[k];
      sy += ws[k] * ys[k];
      sxx += ws[k] * xs[k] * xs[k];
      sxy += ws[k] * xs[k] * ys[k];
    }
    const double det = sw * sxx - sx * sx;
    const double a = (sxx * sy - sx * sxy) / det;
    const double var_a = sxx / det;
    const double est = std::exp(a), se = est * std::sqrt(var_a);
    const double ratio = est / target;
    const std::string tag = "_y=" + num(dist);
    c.res.metrics["extrapolated" + tag] = est;
    c.res.metrics["extrapolated_stderr" + tag] = se;
    c.res.metrics["u_eps" + tag] = target;
    c.res.metrics["ratio" + tag] = ratio;
    const double allowed = std::max(k_sigma * se, rel_tol * target);
    c.res.check("hitting" + tag, std::abs(est - target) <= allowed,
                "mc=" + num(est) + " se=" + num(se) + " u=" + num(target) + " ratio=" + num(ratio));
    if (w) {
      w->cell(dist).cell(eps).cell("extrapolated").cell(INFINITY).cell(0.0).cell(est).cell(se).cell(target)
          .cell(ratio);
      w->end_row();
    }
    if (raw_M > 0) {
      HittingOptions ho;
      const MassEstimate e = hitting_prob_mc(y, eps, raw_M, c.seed(90), ho);
      c.res.metrics["duration_sampled" + tag] = e.estimate;
      if (w) {
        w->cell(dist).cell(eps).cell("duration_sampled").cell(NAN).cell(ho.resolution.contour_step).cell(e.estimate)
            .cell(e.stderr_).cell(target).cell(e.estimate / target);
        w->end_row();
      }
    }
  }
}

// ---------------------------------------------------------------------------
// ise-range-volume

void write_curve(Context& c, const std::string& name, const VolumeCurve& curve) {
  if (!c.writing()) return;
  CsvWriter w(c.file(name), {"eps", "value", "target", "ratio", "stderr", "guarded"});
  for (const auto& r : curve.rows) {
    w.cell(r.eps).cell(r.value).cell(r.target).cell(r.ratio).cell(r.stderr_).cell(r.guarded ? 1.0 : 0.0);
    w.end_row();
  }
}

void ise_range_volume(Context& c) {
  const int d = static_cast<int>(c.cfg.get_int("d", 5));
  const auto n = static_cast<std::size_t>(c.cfg.get_int("n", 1000000));
  const double radius = c.cfg.get_double("radius", 1.0);
  const auto eps_list = c.cfg.get_doubles("eps", {0.6, 0.45, 0.35, 0.26, 0.2, 0.15, 0.1});
  const auto M = static_cast<std::size_t>(c.cfg.get_int("M", 200000));
  const double lo = c.cfg.get_double("ratio_lo", 0.6), hi = c.cfg.get_double("ratio_hi", 1.4);
  const auto a0_terms = static_cast<std::size_t>(c.cfg.get_int("series_terms", 2000));

  const double a0 = d == 4 ? 0.5 : a0_from_series(q_seq(d, a0_terms)).a0;
  const double C0 = c0_constant(d, a0);
  Stream rng(c.seed(10), 0);
  const LifetimePath life = sample_normalized_excursion(n, rng);
  const std::vector<double> origin(static_cast<std::size_t>(d), 0.0);
  const SnakeRealization ise = ise_transform(run_snake(life, origin, rng));
  const WeightedPointMeasure occ = occupation(ise, 0.0, INFINITY);
  c.res.metrics["occupation_mass"] = occ.total_mass();
  c.res.check("occupation_mass_exact", occ.total_mass() == 1.0, "mass=" + fmt("%.17g", occ.total_mass()));
  // The sqrt(2)-scaled snake is a snake of duration 4: its time occupation is 4 x the ISE.
  const double time_factor = 4.0;
  const PointCloud cloud = range_cloud(ise, true);
  const Region A = Region::make_ball(origin, radius);
  const VolumeCurve curve = volume_scaling_experiment(cloud, occ, A, eps_list, ScalingLaw{d}, C0 * time_factor, M,
                                                      c.seed(11));
  write_curve(c, "ise_range_volume.csv", curve);
  c.res.metrics["nn_spacing"] = curve.nn_spacing;
  c.res.metrics["guard_eps"] = curve.guard_eps;
  std::vector<const CurveRow*> guarded;
  for (const auto& r : curve.rows)
    if (r.guarded) guarded.push_back(&r);
  if (guarded.size() < 3) {
    c.res.check("range_volume_trend", false, "fewer than three guarded eps values");
    return;
  }
  const CurveRow& last = *guarded.back();
  const CurveRow& mid = *guarded[guarded.size() - 2];
  const CurveRow& first = *guarded[guarded.size() - 3];
  const bool toward = std::abs(last.ratio - 1.0) <= std::abs(mid.ratio - 1.0) &&
                      std::abs(mid.ratio - 1.0) <= std::abs(first.ratio - 1.0);
  c.res.metrics["final_ratio"] = last.ratio;
  c.res.metrics["final_eps"] = last.eps;
  c.res.check("range_volume_final_ratio", last.ratio >= lo && last.ratio <= hi,
              "eps=" + num(last.eps) + " ratio=" + num(last.ratio));
  c.res.check("range_volume_trend", toward,
              "ratios=" + num(first.ratio) + "," + num(mid.ratio) + "," + num(last.ratio));
}

// ---------------------------------------------------------------------------
// sbm-support-exponent

void sbm_support_exponent(Context& c) {
  const int d = static_cast<int>(c.cfg.get_int("d", 5));
  const double mass = c.cfg.get_double("mass", 4.0);
  const double t = c.cfg.get_double("t", 1.0);
  const double delta = c.cfg.get_double("delta", 0.01);
  const double radius = c.cfg.get_double("radius", 2.0);
  const auto R = static_cast<std::size_t>(c.cfg.get_int("realizations", 20));
  const auto eps_list = c.cfg.get_doubles("eps", {0.5, 0.4, 0.3, 0.25, 0.2, 0.15, 0.1});
  const auto M = static_cast<std::size_t>(c.cfg.get_int("M", 100000));
  const double tol = c.cfg.get_double("slope_tol", 0.2);
  SbmOptions so;
  so.resolution.contour_step = c.cfg.get_double("contour_step", 1e-6);
  so.resolution.n_max = static_cast<std::size_t>(c.cfg.get_int("n_max", 1 << 23));

  WeightedPointMeasure nu(static_cast<std::size_t>(d));
  const std::vector<double> origin(static_cast<std::size_t>(d), 0.0);
  nu.add(origin, mass);
  const Region A = Region::make_ball(origin, radius);
  std::vector<double> vol(eps_list.size(), 0.0), var(eps_list.size(), 0.0);
  std::vector<double> spacings;
  std::size_t alive = 0;
  for (std::size_t r = 0; r < R; ++r) {
    Stream rng(c.seed(12), r);
    const PointCloud cloud = sbm_band_cloud(nu, t, t, delta, so, rng);
    if (cloud.size() < 2) continue;
    ++alive;
    spacings.push_back(median_nn_spacing(cloud, 2000, c.seed(13) + r));
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
      const VolumeEstimate v = epsilon_volume(cloud, A, eps_list[k], M, derive_seed(c.seed(14), r * 1000 + k));
      vol[k] += v.estimate;
      var[k] += v.stderr_ * v.stderr_;
    }
  }
  const double nn = spacings.empty() ? 0.0 : median(spacings);
  const double guard = 5.0 * nn;
  c.res.metrics["alive_realizations"] = static_cast<double>(alive);
  c.res.metrics["nn_spacing"] = nn;
  c.res.metrics["guard_eps"] = guard;
  std::vector<double> lx, ly;
  std::unique_ptr<CsvWriter> w;
  if (c.writing())
    w = std::make_unique<CsvWriter>(c.file("sbm_support_volume.csv"),
                                    std::vector<std::string>{"eps", "value", "target", "ratio", "stderr", "guarded"});
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    const double e = eps_list[k];
    const bool guarded = e >= guard;
    if (guarded && vol[k] > 0.0) {
      lx.push_back(std::log(e));
      ly.push_back(std::log(vol[k]));
    }
    if (w) {
      const double scale = std::pow(e, 2.0 - d);
      w->cell(e).cell(scale * vol[k]).cell(NAN).cell(NAN).cell(scale * std::sqrt(var[k])).cell(guarded ? 1.0 : 0.0);
      w->end_row();
    }
  }
  if (alive == 0 || lx.size() < 2) {
    c.res.check("support_exponent", false, "not enough guarded eps values with nonzero volume");
    return;
  }
  const LineFit fit = fit_line(lx, ly);
  c.res.metrics["slope"] = fit.slope;
  c.res.metrics["slope_stderr"] = fit.slope_stderr;
  c.res.check("support_exponent", std::abs(fit.slope - (d - 2.0)) <= tol,
              "slope=" + num(fit.slope) + " target=" + num(d - 2.0) + " guard=" + num(guard));
}

// ---------------------------------------------------------------------------
// energy-scaling

void energy_scaling(Context& c) {
  const int d = static_cast<int>(c.cfg.get_int("d", 5));
  const auto n = static_cast<std::size_t>(c.cfg.get_int("n", 1000000));
  const auto R = static_cast<std::size_t>(c.cfg.get_int("realizations", 20));
  const double t = c.cfg.get_double("t", 0.25);
  const auto eps_list = c.cfg.get_doubles("eps", {0.4, 0.35, 0.3, 0.25, 0.2, 0.15, 0.1, 0.07});
  const double band_levels = c.cfg.get_double("band_levels", 1.0);
  const double tol = c.cfg.get_double("rel_tol", 0.15);
  const auto rows = static_cast<std::size_t>(c.cfg.get_int("energy_rows", 500));

  const std::vector<double> origin(static_cast<std::size_t>(d), 0.0);
  std::vector<MeanAccumulator> slice(eps_list.size()), occ(eps_list.size());
  std::vector<double> spacing_slice, spacing_occ;
  for (std::size_t r = 0; r < R; ++r) {
    Stream rng(c.seed(15), r);
    const LifetimePath life = sample_normalized_excursion(n, rng);
    const SnakeRealization s = run_snake(life, origin, rng);
    const WeightedPointMeasure mu_occ = merge_atoms(occupation(s, 0.0, INFINITY));
    const WeightedPointMeasure mu_slice = merge_atoms(y_slice(s, t, band_levels * life.height_unit));
    spacing_occ.push_back(median_nn_spacing(support_cloud(mu_occ), 2000, c.seed(16) + r));
    const auto rows_occ = energy_scaling_check(mu_occ, eps_list, d, EnergyMode::occupation, rows,
                                                         derive_seed(c.seed(18), r));
    for (std::size_t k = 0; k < eps_list.size(); ++k) occ[k].add(rows_occ[k].ratio);
    if (mu_slice.size() >= 2) {
      spacing_slice.push_back(median_nn_spacing(support_cloud(mu_slice), 2000, c.seed(17) + r));
      const auto rows_slice = energy_scaling_check(mu_slice, eps_list, d, EnergyMode::slice, rows,
                                                             derive_seed(c.seed(19), r));
      for (std::size_t k = 0; k < eps_list.size(); ++k) slice[k].add(rows_slice[k].ratio);
    }
  }
  const double guard_occ = 5.0 * median(spacing_occ);
  const double guard_slice = spacing_slice.empty() ? INFINITY : 5.0 * median(spacing_slice);
  c.res.metrics["guard_eps_occupation"] = guard_occ;
  c.res.metrics["guard_eps_slice"] = guard_slice;
  c.res.metrics["slice_realizations"] = static_cast<double>(spacing_slice.size());
  std::unique_ptr<CsvWriter> w;
  if (c.writing())
    w = std::make_unique<CsvWriter>(c.file("energy_scaling.csv"),
                                    std::vector<std::string>{"mode", "eps", "value", "target", "ratio", "stderr",
                                                             "guarded"});
  auto report = [&](const std::string& mode, std::vector<MeanAccumulator>& acc, double guard, EnergyMode em) {
    const double target = energy_constant(d, em);
    long last = -1;
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
      const bool guarded = eps_list[k] >= guard;
      if (guarded && acc[k].count() > 0 && (last < 0 || eps_list[k] < eps_list[static_cast<std::size_t>(last)]))
        last = static_cast<long>(k);
      if (w) {
        w->cell(mode).cell(eps_list[k]).cell(acc[k].mean() * target).cell(target).cell(acc[k].mean())
            .cell(acc[k].stderr_of_mean()).cell(guarded ? 1.0 : 0.0);
        w->end_row();
      }
    }
    if (last < 0) {
      c.res.check("energy_" + mode, false, "no guarded eps");
      return;
    }
    const double ratio = acc[static_cast<std::size_t>(last)].mean();
    c.res.metrics["ratio_" + mode] = ratio;
    c.res.metrics["eps_" + mode] = eps_list[static_cast<std::size_t>(last)];
    c.res.check("energy_" + mode, std::abs(ratio - 1.0) <= tol,
                "eps=" + num(eps_list[static_cast<std::size_t>(last)]) + " mean ratio=" + num(ratio));
  };
  report("slice", slice, guard_slice, EnergyMode::slice);
  report("occupation", occ, guard_occ, EnergyMode::occupation);
}

// ---------------------------------------------------------------------------
// cube-reference

void cube_reference_exp(Context& c) {
  const int d = static_cast<int>(c.cfg.get_int("d", 4));
  const int p = static_cast<int>(c.cfg.get_int("p", 2));
  const double eps = c.cfg.get_double("eps", 0.05);
  const auto M = static_cast<std::size_t>(c.cfg.get_int("M", 2000000));
  const auto m = static_cast<std::size_t>(c.cfg.get_int("grid", 200));
  const double vtol = c.cfg.get_double("volume_tol", 0.03);
  const double stol = c.cfg.get_double("energy_tol", 0.05);

  const CubeReference ref = cube_reference(p, d, Kernel::power(1.0));
  const VolumeEstimate v = cube_tube_volume_mc(p, d, eps, M, c.seed(18));
  const double scaled = std::pow(eps, p - d) * v.estimate;
  const double exact = std::pow(eps, p - d) * cube_tube_volume_exact(p, d, eps);
  const WeightedPointMeasure leb = cube_lebesgue_grid(p, d, m);
  const double senergy = std::pow(eps, d - p) * s_energy(leb, eps);
  const double vrel = scaled / ref.volume_limit - 1.0;
  const double srel = senergy / ref.s_energy_limit - 1.0;
  c.res.metrics["volume_scaled_mc"] = scaled;
  c.res.metrics["volume_scaled_steiner"] = exact;
  c.res.metrics["volume_limit"] = ref.volume_limit;
  c.res.metrics["volume_rel_diff"] = vrel;
  c.res.metrics["tube_volume_limit"] = ref.tube_volume_limit;
  c.res.metrics["s_energy_scaled"] = senergy;
  c.res.metrics["s_energy_limit"] = ref.s_energy_limit;
  c.res.metrics["s_energy_rel_diff"] = srel;
  c.res.check("cube_volume", std::abs(vrel) <= vtol,
              "scaled=" + num(scaled) + " limit=" + num(ref.volume_limit) + " steiner=" + num(exact) +
                  " tube_limit=" + num(ref.tube_volume_limit));
  c.res.check("cube_s_energy", std::abs(srel) <= stol, "scaled=" + num(senergy) + " limit=" + num(ref.s_energy_limit));
  if (c.writing()) {
    CsvWriter w(c.file("cube_reference.csv"), {"quantity", "eps", "value", "target", "ratio", "stderr"});
    w.cell("volume").cell(eps).cell(scaled).cell(ref.volume_limit).cell(scaled / ref.volume_limit)
        .cell(std::pow(eps, p - d) * v.stderr_);
    w.end_row();
    w.cell("volume_steiner").cell(eps).cell(exact).cell(ref.tube_volume_limit).cell(exact / ref.tube_volume_limit)
        .cell(0.0);
    w.end_row();
    w.cell("s_energy").cell(eps).cell(senergy).cell(ref.s_energy_limit).cell(senergy / ref.s_energy_limit).cell(0.0);
    w.end_row();
  }
}

// ---------------------------------------------------------------------------
// capacity-equivalence

void capacity_equivalence(Context& c) {
  const int d = static_cast<int>(c.cfg.get_int("d", 5));
  const double tol = c.cfg.get_double("tol", 1e-6);
  const auto betas = c.cfg.get_doubles("betas", {0.5, 1.0, 1.5});
  const auto grid = static_cast<std::size_t>(c.cfg.get_int("grid", 40));
  const auto max_points = static_cast<std::size_t>(c.cfg.get_int("max_points", 2000));
  const double spread_max = c.cfg.get_double("spread_max", 10.0);
  const double mass = c.cfg.get_double("mass", 4.0);
  const double t = c.cfg.get_double("t", 1.0);
  const double delta = c.cfg.get_double("delta", 0.01);
  SbmOptions so;
  so.resolution.contour_step = c.cfg.get_double("contour_step", 1e-5);
  so.resolution.n_max = static_cast<std::size_t>(c.cfg.get_int("n_max", 1 << 22));

  // Closed forms.
  const Kernel f = Kernel::power(1.0);
  const double r_cell = 0.1, rho = 0.7;
  const PointCloud one(static_cast<std::size_t>(d), unit_axis(d, 0.0));
  std::vector<double> two_coords = unit_axis(d, 0.0);
  const auto far = unit_axis(d, rho);
  two_coords.insert(two_coords.end(), far.begin(), far.end());
  const PointCloud two(static_cast<std::size_t>(d), two_coords);
  const CapacityResult c1 = capacity(one, f, tol, 200000, r_cell);
  const CapacityResult c2 = capacity(two, f, tol, 200000, r_cell);
  const double want1 = 1.0 / f(r_cell), want2 = 2.0 / (f(r_cell) + f(rho));
  const double err1 = std::abs(c1.capacity / want1 - 1.0), err2 = std::abs(c2.capacity / want2 - 1.0);
  c.res.metrics["one_point_rel_err"] = err1;
  c.res.metrics["two_point_rel_err"] = err2;
  c.res.check("one_point_closed_form", err1 <= tol, "rel=" + num(err1));
  c.res.check("two_point_closed_form", err2 <= tol, "rel=" + num(err2));

  // Cube grid against itself, and the Frank-Wolfe stopping rule.
  const PointCloud cube = cube_grid_cloud(2, d, grid);
  std::vector<Kernel> kernels;
  for (double b : betas) kernels.push_back(Kernel::power(b));
  const EquivalenceReport self = capacity_equivalence_report(cube, cube, kernels, tol);
  c.res.metrics["cube_self_spread"] = self.spread;
  c.res.check("cube_self_ratio", std::abs(self.spread - 1.0) <= 1e-12, "spread=" + num(self.spread));
  bool fw_ok = true;
  for (const Kernel& k : kernels) {
    const CapacityResult cr = capacity(cube, k, tol);
    fw_ok = fw_ok && cr.converged && cr.gap <= tol * cr.energy && cr.monotone;
  }
  c.res.check("frank_wolfe_gap", fw_ok);

  // supp X_t against the unit square (calibration-level).
  WeightedPointMeasure nu(static_cast<std::size_t>(d));
  nu.add(unit_axis(d, 0.0), mass);
  const std::string cache = c.cfg.get_string("support_cache", "");
  PointCloud support;
  if (!cache.empty() && std::filesystem::exists(cache)) {
    support = load_cloud(cache, static_cast<std::size_t>(d));
  } else {
    for (std::size_t r = 0; r < 64 && support.size() < 2; ++r) {
      Stream rng(c.seed(19), r);
      support = deduplicate(sbm_band_cloud(nu, t, t, delta, so, rng));
    }
    if (!cache.empty()) cache_cloud(support, cache);
  }
  if (support.size() > max_points) {
    Stream rng(c.seed(20), 0);
    std::vector<double> coords;
    std::vector<std::size_t> idx(support.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng.engine());
    idx.resize(max_points);
    std::sort(idx.begin(), idx.end());
    for (std::size_t i : idx) coords.insert(coords.end(), support.point(i).begin(), support.point(i).end());
    support = PointCloud(static_cast<std::size_t>(d), coords);
  }
  const EquivalenceReport rep = capacity_equivalence_report(support, cube, kernels, tol);
  c.res.metrics["support_points"] = static_cast<double>(support.size());
  c.res.metrics["support_spread"] = rep.spread;
  c.res.check("support_vs_square_spread", rep.spread <= spread_max, "spread=" + num(rep.spread) + " (calibration)");
  if (c.writing()) {
    CsvWriter w(c.file("capacity_equivalence.csv"), {"pair", "kernel", "cap1", "cap2", "ratio"});
    for (const auto& row : self.rows) {
      w.cell("square_vs_square").cell(row.kernel).cell(row.cap1).cell(row.cap2).cell(row.ratio);
      w.end_row();
    }
    for (const auto& row : rep.rows) {
      w.cell("support_vs_square").cell(row.kernel).cell(row.cap1).cell(row.cap2).cell(row.ratio);
      w.end_row();
    }
  }
}

// ---------------------------------------------------------------------------

struct Entry {
  const char* name;
  void (*fn)(Context&);
  std::set<std::string> keys;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> r = {
      {"u1-constants", u1_constants,
       {"dims", "series_terms", "h", "r_max", "tol", "agreement_tol", "reconstruction_radius", "reconstruction_tol"}},
      {"d4-asymptotics", d4_asymptotics, {"h", "r_max", "tol", "radii", "envelope_factor", "rho_terms"}},
      {"moment-identity", moment_identity, {"pairs", "lambdas", "gamma_terms", "gamma_tol", "orders"}},
      {"occupation-moment-mc", occupation_moment_mc,
       {"d", "center_distance", "radius", "M", "r_min", "r_max", "contour_step", "n_max", "pilot", "pilot_half_steps",
        "sigmas"}},
      {"feynman-kac", feynman_kac,
       {"d", "center_distance", "eps", "M", "horizon", "kappa", "dt_max", "far_radius", "sigmas"}},
      {"hitting-prob", hitting_prob,
       {"d", "distances", "eps", "half_steps", "samples", "rel_tol", "sigmas", "duration_sampled_M"}},
      {"ise-range-volume", ise_range_volume, {"d", "n", "radius", "eps", "M", "ratio_lo", "ratio_hi", "series_terms"}},
      {"sbm-support-exponent", sbm_support_exponent,
       {"d", "mass", "t", "delta", "radius", "realizations", "eps", "M", "slope_tol", "contour_step", "n_max"}},
      {"energy-scaling", energy_scaling, {"d", "n", "realizations", "t", "eps", "band_levels", "rel_tol", "energy_rows"}},
      {"cube-reference", cube_reference_exp, {"d", "p", "eps", "M", "grid", "volume_tol", "energy_tol"}},
      {"capacity-equivalence", capacity_equivalence,
       {"d", "tol", "betas", "grid", "max_points", "spread_max", "mass", "t", "delta", "contour_step", "n_max", "support_cache"}},
  };
  return r;
}

const Entry& lookup(const std::string& name) {
  for (const auto& e : registry())
    if (name == e.name) return e;
  std::string valid;
  for (const auto& e : registry()) valid += (valid.empty() ? "" : ", ") + std::string(e.name);
  throw std::invalid_argument("unknown experiment '" + name + "'; valid names: " + valid);
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& e : registry()) v.emplace_back(e.name);
    return v;
  }();
  return names;
}

const std::set<std::string>& experiment_keys(const std::string& name) { return lookup(name).keys; }

ExperimentResult run_experiment(const std::string& name, const Config& cfg, const RunOptions& opts) {
  const Entry& e = lookup(name);
  cfg.require_known(e.keys);
  if (opts.workers > 0) omp_set_num_threads(opts.workers);
  if (opts.write_files) std::filesystem::create_directories(opts.out_dir);
  Context c{cfg, opts, {}};
  try {
    e.fn(c);
  } catch (const std::exception& ex) {
    throw std::runtime_error(std::string(e.name) + ": " + ex.what());
  }
  return std::move(c.res);
}

RunManifest record(const std::string& name, const Config& cfg, const RunOptions& opts, const ExperimentResult& res,
                   double wall_seconds) {
  std::filesystem::create_directories(opts.out_dir);
  RunManifest m;
  m.experiment = name;
  m.code_version = code_version();
  m.seed = opts.seed;
  m.workers = opts.workers > 0 ? opts.workers : omp_get_max_threads();
  m.deterministic = opts.deterministic;
  m.config_snapshot = cfg.snapshot();
  m.criteria = res.criteria;
  {
    CsvWriter w(opts.out_dir / "metrics.csv", {"metric", "value"});
    for (const auto& [k, v] : res.metrics) {
      w.cell(k).cell(v);
      w.end_row();
    }
  }
  for (const auto& f : res.files) m.add_artifact(opts.out_dir, f);
  m.add_artifact(opts.out_dir, "metrics.csv");
  m.wall_seconds = wall_seconds;
  m.write(opts.out_dir / "manifest.txt");
  return m;
}

RunManifest run(const std::string& name, const Config& cfg, const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  RunOptions o = opts;
  o.write_files = true;
  const ExperimentResult res = run_experiment(name, cfg, o);
  return record(name, cfg, o, res, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

}  // namespace snake
