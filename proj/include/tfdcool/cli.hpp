#pragma once

// Command-line front end: `cool`, `two-mode` and `verify`.
//
// Exit codes: 0 ok, 1 verify check failed, 2 configuration error,
// 3 numerical failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "tfdcool/channel.hpp"
#include "tfdcool/fock.hpp"
#include "tfdcool/states.hpp"
#include "tfdcool/thermo.hpp"
#include "tfdcool/verify.hpp"

namespace tfd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class Command { cool, two_mode, verify };
enum class Method { kraus, lindblad, both, closed };

struct RunConfig {
  double tau0 = 1.0;
  double kappa = 1.0;
  double t_max = 2.0;
  int steps = 20;
  std::optional<int> cutoff;  // empty: tail rule
  Method method = Method::kraus;
  std::map<std::string, double> tolerances;
  std::string out;  // empty: stdout
  std::string svg;
  std::string suite = "all";
};

inline std::string fmt12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

/// t_k = t_max * k / steps, k = 0..steps.
inline std::vector<double> time_grid(const RunConfig& cfg) {
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(cfg.steps) + 1);
  for (int k = 0; k <= cfg.steps; ++k) times.push_back(cfg.t_max * k / cfg.steps);
  return times;
}

inline void validate(const RunConfig& cfg, Command cmd) {
  if (cmd == Command::verify) {
    if (cfg.cutoff && (*cfg.cutoff < 2 || *cfg.cutoff > 128)) throw ConfigError("--cutoff must lie in [2, 128]");
    return;
  }
  if (!(cfg.tau0 > 0.0) || !std::isfinite(cfg.tau0)) throw ConfigError("--tau0 must be > 0");
  if (!(cfg.kappa > 0.0) || !std::isfinite(cfg.kappa)) throw ConfigError("--kappa must be > 0");
  if (!(cfg.t_max > 0.0) || !std::isfinite(cfg.t_max)) throw ConfigError("--t-max must be > 0");
  if (cfg.steps < 1) throw ConfigError("--steps must be >= 1");
  const int hi = cmd == Command::two_mode ? 48 : 128;
  if (cfg.cutoff && (*cfg.cutoff < 2 || *cfg.cutoff > hi))
    throw ConfigError("--cutoff must lie in [2, " + std::to_string(hi) + "]");
  if (!cfg.tolerances.empty()) throw ConfigError("--tol only applies to verify");
}

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
  bool markers = false;  // circles instead of a polyline
  std::string color = "#1f77b4";
};

/// Minimal line plot: axes, five ticks per axis, one polyline or marker set per series.
inline std::string render_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                              const std::vector<Series>& series) {
  constexpr double width = 640.0, height = 400.0, left = 70.0, right = 20.0, top = 40.0, bottom = 50.0;
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  bool first = true;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (first) {
        x0 = x1 = x;
        y0 = y1 = y;
        first = false;
      }
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  y0 = std::min(y0, 0.0);
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 <= y0) y1 = y0 + 1.0;
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + ph - (y - y0) / (y1 - y0) * ph; };
  auto num = [](double v, const char* f = "%.2f") {
    char buf[32];
    std::snprintf(buf, sizeof buf, f, v);
    return std::string(buf);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width, "%.0f") << "\" height=\""
      << num(height, "%.0f") << "\" viewBox=\"0 0 " << num(width, "%.0f") << ' ' << num(height, "%.0f") << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << num(width / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title
      << "</text>\n";
  svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(left + pw) << "\" y2=\""
      << num(top + ph) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left) << "\" y2=\""
      << num(top + ph) << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    svg << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(top + ph + 18) << "\" text-anchor=\"middle\" font-size=\"11\">"
        << num(xv, "%.3g") << "</text>\n";
    svg << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
        << num(yv, "%.3g") << "</text>\n";
  }
  svg << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(height - 10) << "\" text-anchor=\"middle\" font-size=\"13\">"
      << x_label << "</text>\n";
  svg << "<text x=\"16\" y=\"" << num(top + ph / 2) << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
      << num(top + ph / 2) << ")\">" << y_label << "</text>\n";
  int legend = 0;
  for (const auto& s : series) {
    if (s.markers) {
      for (const auto& [x, y] : s.points)
        if (std::isfinite(x) && std::isfinite(y))
          svg << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"3\" fill=\"none\" stroke=\""
              << s.color << "\"/>\n";
    } else {
      svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.points.size(); ++i)
        svg << (i ? " " : "") << num(px(s.points[i].first)) << ',' << num(py(s.points[i].second));
      svg << "\"/>\n";
    }
    const double ly = top + 14 + 16 * legend++;
    svg << "<text x=\"" << num(left + pw - 8) << "\" y=\"" << num(ly) << "\" text-anchor=\"end\" font-size=\"12\" fill=\""
        << s.color << "\">" << s.label << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

struct Output {
  std::string csv;
  std::string svg;
};

inline Output cool(const RunConfig& cfg) {
  const auto times = time_grid(cfg);
  CurveOptions opts;
  opts.cutoff = cfg.cutoff.value_or(auto_cutoff(cfg.tau0));
  const auto primary_method = cfg.method == Method::lindblad ? EvolutionMethod::lindblad
                              : cfg.method == Method::closed ? EvolutionMethod::closed_only
                                                             : EvolutionMethod::kraus;
  const auto points = cooling_curve(cfg.tau0, cfg.kappa, times, primary_method, opts);
  std::vector<CoolingPoint> lindblad;
  if (cfg.method == Method::both) lindblad = cooling_curve(cfg.tau0, cfg.kappa, times, EvolutionMethod::lindblad, opts);

  std::string csv = "kappa_t,tau_closed,tau_numeric,nbar,trace_error";
  if (cfg.method == Method::both) csv += ",tau_numeric_lindblad";
  csv += '\n';
  Series closed{"closed form", {}, false, "#1f77b4"};
  Series numeric{cfg.method == Method::lindblad ? "Lindblad RK4" : "Kraus", {}, true, "#d62728"};
  Series numeric_rk{"Lindblad RK4", {}, true, "#2ca02c"};
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    csv += fmt12(p.kappa_t) + ',' + fmt12(p.tau_closed) + ',' + (p.tau_numeric ? fmt12(*p.tau_numeric) : "") + ',' +
           fmt12(p.nbar) + ',' + fmt12(p.trace_error);
    if (cfg.method == Method::both) csv += ',' + fmt12(*lindblad[i].tau_numeric);
    csv += '\n';
    closed.points.emplace_back(p.kappa_t, p.tau_closed);
    if (p.tau_numeric) numeric.points.emplace_back(p.kappa_t, *p.tau_numeric);
    if (cfg.method == Method::both) numeric_rk.points.emplace_back(p.kappa_t, *lindblad[i].tau_numeric);
  }
  Output result{std::move(csv), {}};
  if (!cfg.svg.empty()) {
    std::vector<Series> series{closed};
    if (!numeric.points.empty()) series.push_back(numeric);
    if (!numeric_rk.points.empty()) series.push_back(numeric_rk);
    result.svg = render_svg("Temperature under amplitude damping", "kappa t", "kT / hbar omega", series);
  }
  return result;
}

inline Output two_mode(const RunConfig& cfg) {
  const auto params = ThermoParams::from_tau(cfg.tau0);
  const int n = cfg.cutoff.value_or(select_cutoff(params.ratio(), 8, 48));
  const auto layout = ModeLayout::two_mode(n);
  const auto rho0 = outer(thermal_vacuum(params, layout));
  const auto tilde_number = number(layout.single_mode(), Mode::system);

  std::string csv = "kappa_t,trace_dist_analytic_vs_kraus,sys_tau_numeric,sys_tau_closed,tilde_nbar,purity_total\n";
  Series closed{"closed form", {}, false, "#1f77b4"};
  Series numeric{"Kraus, system mode", {}, true, "#d62728"};
  for (double t : time_grid(cfg)) {
    const double kt = cfg.kappa * t;
    std::string where = "at kappa*t = " + fmt12(kt) + ": ";
    try {
      const auto evolved = apply_kraus(rho0, ChannelSpec{kt});
      const auto analytic = evolved_two_mode_state(EvolvedTwoModeSpec::make(params.theta(), kt), layout);
      const double td = trace_distance(analytic, evolved);
      const double sys_tau = effective_temperature(partial_trace(evolved, Mode::tilde));
      const double closed_tau = tau_after(cfg.tau0, kt);
      const double tilde_nbar = expectation(partial_trace(evolved, Mode::system), tilde_number).real();
      csv += fmt12(kt) + ',' + fmt12(td) + ',' + fmt12(sys_tau) + ',' + fmt12(closed_tau) + ',' + fmt12(tilde_nbar) + ',' +
             fmt12(purity(evolved)) + '\n';
      closed.points.emplace_back(kt, closed_tau);
      numeric.points.emplace_back(kt, sys_tau);
    } catch (const NotChaoticError& e) {
      throw NotChaoticError(where + e.what());
    } catch (const TruncationError& e) {
      throw TruncationError(where + e.what());
    }
  }
  Output result{std::move(csv), {}};
  if (!cfg.svg.empty())
    result.svg = render_svg("System-mode temperature of the damped thermal vacuum", "kappa t", "kT / hbar omega",
                            {closed, numeric});
  return result;
}

namespace detail {

inline std::map<std::string, double> parse_tolerances(const std::vector<std::string>& items) {
  std::map<std::string, double> tolerances;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--tol expects name=value, got '" + item + "'");
    const std::string value = item.substr(eq + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size() || !(v >= 0.0)) throw ConfigError("bad tolerance value in '" + item + "'");
    tolerances[item.substr(0, eq)] = v;
  }
  return tolerances;
}

inline std::optional<int> parse_cutoff(const std::string& text) {
  if (text.empty() || text == "auto") return std::nullopt;
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw ConfigError("--cutoff expects an integer or 'auto', got '" + text + "'");
  return v;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  f << content;
  if (!f) throw ConfigError("failed writing '" + path + "'");
}

}  // namespace detail

struct Invocation {
  Command command = Command::cool;
  RunConfig config;
};

/// Parse argv into a command and validated configuration. Returns an exit
/// code instead when parsing ends the run (help or a CLI11 error).
inline std::variant<Invocation, int> parse(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Amplitude damping of a chaotic field and its thermal-vacuum purification", "tfdcool"};
  app.set_config("--config", "", "Read key = value options from a file; flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1, 1);

  RunConfig cfg;
  std::string cutoff_text = "auto";
  std::string method_text = "kraus";
  std::vector<std::string> tolerance_items;
  app.add_option("--tau0", cfg.tau0, "Initial temperature kT/(hbar omega)")->capture_default_str();
  app.add_option("--kappa", cfg.kappa, "Decay rate")->capture_default_str();
  app.add_option("--t-max", cfg.t_max, "Final time")->capture_default_str();
  app.add_option("--steps", cfg.steps, "Number of time intervals (rows = steps + 1)")->capture_default_str();
  app.add_option("--cutoff", cutoff_text, "Fock cutoff N or 'auto'")->capture_default_str();
  app.add_option("--method", method_text, "kraus | lindblad | both | closed")
      ->check(CLI::IsMember({"kraus", "lindblad", "both", "closed"}))
      ->capture_default_str();
  app.add_option("--out", cfg.out, "CSV output path (default stdout)");
  app.add_option("--svg", cfg.svg, "Optional SVG plot path");
  app.add_option("--tol", tolerance_items, "Tolerance override name=value (verify)");
  app.add_option("--suite", cfg.suite, "Verify suite: all | fock | states | channel | thermo")
      ->check(CLI::IsMember({"all", "fock", "states", "channel", "thermo"}))
      ->capture_default_str();

  auto* cool_cmd = app.add_subcommand("cool", "Cooling curve of a chaotic field");
  auto* two_cmd = app.add_subcommand("two-mode", "Damping of the thermal-vacuum purification");
  auto* verify_cmd = app.add_subcommand("verify", "Run invariant suites");
  for (auto* sub : {cool_cmd, two_cmd, verify_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  Invocation inv;
  inv.command = cool_cmd->parsed() ? Command::cool : two_cmd->parsed() ? Command::two_mode : Command::verify;
  try {
    cfg.cutoff = detail::parse_cutoff(cutoff_text);
    cfg.method = method_text == "lindblad" ? Method::lindblad
                 : method_text == "both"   ? Method::both
                 : method_text == "closed" ? Method::closed
                                           : Method::kraus;
    cfg.tolerances = detail::parse_tolerances(tolerance_items);
    validate(cfg, inv.command);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  inv.config = std::move(cfg);
  return inv;
}

inline int run_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<verify::CheckResult> results;
  try {
    results = verify::run(cfg.suite, verify::SuiteConfig{cfg.cutoff}, cfg.tolerances);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  std::size_t passed = 0;
  for (const auto& r : results) {
    out << verify::format_line(r) << '\n';
    passed += r.pass ? 1 : 0;
  }
  err << passed << '/' << results.size() << " checks passed\n";
  return passed == results.size() ? kExitOk : kExitCheckFailed;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  auto parsed = parse(argc, argv, out, err);
  if (const int* code = std::get_if<int>(&parsed)) return *code;
  const auto& inv = std::get<Invocation>(parsed);
  const auto& cfg = inv.config;
  if (inv.command == Command::verify) return run_verify(cfg, out, err);

  Output result;
  try {
    result = inv.command == Command::cool ? cool(cfg) : two_mode(cfg);
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  try {
    if (cfg.out.empty())
      out << result.csv;
    else
      detail::write_file(cfg.out, result.csv);
    if (!cfg.svg.empty()) detail::write_file(cfg.svg, result.svg);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}

/// Convenience overload for tests: argv[0] is supplied.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"tfdcool"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace tfd::cli
