#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "arqmc/density.hpp"
#include "arqmc/discrepancy.hpp"
#include "arqmc/driver.hpp"
#include "arqmc/error.hpp"
#include "arqmc/netgeom.hpp"
#include "arqmc/rng.hpp"
#include "arqmc/sampler.hpp"

namespace arqmc {

enum class DriverKind { stratified, net, uniform };

/// How replications of one ladder size are reduced before the slope fit.
enum class Statistic {
  median,  // median value vs median N
  moment,  // (mean (N v)^q)^{1/q} vs mean N
};

struct ExperimentConfig {
  std::string density = "linear";
  int density_dim = 1;
  DriverKind driver = DriverKind::stratified;
  int net_base = 2;
  int net_t = 0;
  NetGenerator generator = NetGenerator::faure;
  /// driver sizes M (stratified, uniform) or exponents m (net)
  std::vector<std::uint64_t> ladder;
  int replications = 1;
  std::uint64_t seed = 0;
  ModeSpec mode = ModeSpec::exact();
  double q = kInfinity;
  int lq_resolution = 1 << 16;
  Statistic statistic = Statistic::median;
  std::optional<double> theory_slope;
  double slope_tolerance = 0.15;
  std::string output;
  double budget = 1e9;  // total driver points over all runs
  int threads = 1;

  void validate() {
    if (ladder.empty()) throw InvalidArgument("config: ladder must not be empty");
    for (std::size_t i = 1; i < ladder.size(); ++i)
      if (ladder[i] <= ladder[i - 1]) throw InvalidArgument("config: ladder must be strictly increasing");
    if (replications < 1) throw InvalidArgument("config: replications must be >= 1");
    if (density_dim < 1) throw InvalidArgument("config: density_dim must be >= 1");
    if (threads < 1) throw InvalidArgument("config: threads must be >= 1");
    if (!(q >= 2.0)) throw InvalidArgument("config: q must be >= 2 or inf");
    if (statistic == Statistic::moment && std::isinf(q))
      throw InvalidArgument("config: the moment statistic needs a finite q");
    // a fixed net is deterministic
    if (driver == DriverKind::net) replications = 1;
  }
};

inline std::string to_string(DriverKind k) {
  switch (k) {
    case DriverKind::stratified: return "stratified";
    case DriverKind::net: return "net";
    case DriverKind::uniform: return "uniform";
  }
  return "?";
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::uint64_t> parse_ladder(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    // "4^5" is accepted as shorthand
    const auto caret = item.find('^');
    if (caret != std::string::npos)
      out.push_back(ipow(std::stoull(item.substr(0, caret)), std::stoi(item.substr(caret + 1))));
    else
      out.push_back(std::stoull(item));
  }
  return out;
}

inline double parse_q(const std::string& v) {
  if (v == "inf" || v == "infinity") return kInfinity;
  return std::stod(v);
}

inline void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& v) {
  try {
    if (key == "density") c.density = v;
    else if (key == "density_dim") c.density_dim = std::stoi(v);
    else if (key == "driver") {
      if (v == "stratified") c.driver = DriverKind::stratified;
      else if (v == "net") c.driver = DriverKind::net;
      else if (v == "uniform") c.driver = DriverKind::uniform;
      else throw InvalidArgument("config: unknown driver '" + v + "'");
    } else if (key == "base" || key == "net_base") c.net_base = std::stoi(v);
    else if (key == "t" || key == "net_t") c.net_t = std::stoi(v);
    else if (key == "generator") c.generator = parse_generator(v);
    else if (key == "ladder") c.ladder = parse_ladder(v);
    else if (key == "replications") c.replications = std::stoi(v);
    else if (key == "seed") c.seed = std::stoull(v);
    else if (key == "mode") c.mode = parse_mode(v);
    else if (key == "q") c.q = parse_q(v);
    else if (key == "lq_resolution") c.lq_resolution = std::stoi(v);
    else if (key == "statistic") {
      if (v == "median") c.statistic = Statistic::median;
      else if (v == "moment") c.statistic = Statistic::moment;
      else throw InvalidArgument("config: unknown statistic '" + v + "'");
    } else if (key == "theory_slope") c.theory_slope = std::stod(v);
    else if (key == "slope_tolerance") c.slope_tolerance = std::stod(v);
    else if (key == "output") c.output = v;
    else if (key == "budget") c.budget = std::stod(v);
    else if (key == "threads") c.threads = std::stoi(v);
    else throw InvalidArgument("config: unknown key '" + key + "'");
  } catch (const std::logic_error&) {
    throw InvalidArgument("config: bad value '" + v + "' for key '" + key + "'");
  }
}

}  // namespace detail

/// Flat "key = value" lines; '#' starts a comment.
inline ExperimentConfig parse_config_kv(const std::string& text) {
  ExperimentConfig c;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidArgument("config: expected key=value, got '" + line + "'");
    detail::apply_setting(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  c.validate();
  return c;
}

/// JSON object with the same keys; ladder may be an array.
inline ExperimentConfig parse_config_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("config: JSON root must be an object");
  ExperimentConfig c;
  for (const auto& [key, value] : j.items()) {
    std::string v;
    if (value.is_array()) {
      for (const auto& e : value) v += (v.empty() ? "" : ",") + (e.is_string() ? e.get<std::string>() : e.dump());
    } else if (value.is_string()) {
      v = value.get<std::string>();
    } else {
      v = value.dump();
    }
    detail::apply_setting(c, key, v);
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_config_json(text);
  return parse_config_kv(text);
}

struct ConvergenceRow {
  std::uint64_t M = 0;  // driver points
  std::uint64_t N = 0;  // accepted points
  int rep = 0;
  double value = 0.0;
};

/// Per ladder size: the statistics that feed the fit and the plain means.
struct SizeSummary {
  std::uint64_t M = 0;
  double N = 0.0;  // median N (median statistic) or mean N (moment)
  double value = 0.0;
  double median_value = 0.0;
  double mean_value = 0.0;
  double mean_N = 0.0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  std::vector<SizeSummary> sizes;
  double fitted_slope = 0.0;
  double slope_stderr = 0.0;
  std::optional<double> theory_slope;
  bool pass = true;
};

struct SlopeFit {
  double slope = 0.0;
  double stderr_ = 0.0;
};

/// Least-squares slope of log(value) against log(N).
inline SlopeFit fit_slope(const std::vector<std::pair<double, double>>& pairs) {
  std::vector<double> xs;
  for (const auto& [N, v] : pairs) {
    if (!(N > 0.0)) throw InvalidArgument("fit_slope: N must be positive");
    if (!(v > 0.0)) throw InvalidArgument("fit_slope: values must be positive");
    xs.push_back(N);
  }
  std::sort(xs.begin(), xs.end());
  if (std::unique(xs.begin(), xs.end()) - xs.begin() < 3)
    throw InvalidArgument("fit_slope: needs at least 3 distinct N");
  const double n = static_cast<double>(pairs.size());
  double mx = 0, my = 0;
  for (const auto& [N, v] : pairs) {
    mx += std::log(N);
    my += std::log(v);
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (const auto& [N, v] : pairs) {
    sxx += (std::log(N) - mx) * (std::log(N) - mx);
    sxy += (std::log(N) - mx) * (std::log(v) - my);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  double ssr = 0;
  for (const auto& [N, v] : pairs) {
    const double r = std::log(v) - my - fit.slope * (std::log(N) - mx);
    ssr += r * r;
  }
  fit.stderr_ = pairs.size() > 2 ? std::sqrt(ssr / (n - 2.0) / sxx) : 0.0;
  return fit;
}

/// Seed for one (size, replication) cell of a ladder.
inline std::uint64_t replication_seed(std::uint64_t master, std::size_t size_index, int rep) {
  return mix_key(master, size_index, static_cast<std::uint64_t>(rep));
}

namespace detail {

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::uint64_t driver_points(const ExperimentConfig& c, std::uint64_t size) {
  return c.driver == DriverKind::net ? ipow(static_cast<std::uint64_t>(c.net_base), static_cast<int>(size))
                                     : size;
}

inline PointSet make_driver(const ExperimentConfig& c, std::size_t size_index, int rep, int s) {
  const std::uint64_t size = c.ladder[size_index];
  const std::uint64_t seed = replication_seed(c.seed, size_index, rep);
  switch (c.driver) {
    case DriverKind::stratified: return stratified_points(size, s, seed);
    case DriverKind::uniform: return uniform_points(size, s, seed);
    case DriverKind::net:
      return digital_net(NetParams{c.net_base, c.net_t, static_cast<int>(size), s}, c.generator);
  }
  throw InvalidArgument("unknown driver kind");
}

}  // namespace detail

/// One row of the table: driver, acceptance-rejection, discrepancy of the
/// projected output.
inline ConvergenceRow run_single(const ExperimentConfig& c, const Density& psi, std::size_t size_index,
                                 int rep) {
  const int s = psi.dim() + 1;
  try {
    const PointSet driver = detail::make_driver(c, size_index, rep, s);
    const ARResult ar = accept_reject(driver, psi);
    if (ar.accepted_count == 0) throw Error("no driver point was accepted");
    ConvergenceRow row{driver.size(), ar.accepted_count, rep, 0.0};
    if (std::isinf(c.q))
      row.value = star_discrepancy(ar.projected, psi, c.mode).value;
    else
      row.value = lq_discrepancy(ar.projected, psi, c.q, c.lq_resolution);
    return row;
  } catch (const Error& e) {
    throw Error("size " + std::to_string(c.ladder[size_index]) + ", replication " + std::to_string(rep) +
                ": " + e.what());
  }
}

/// Reduces the rows of a finished table into per-size statistics and the fit.
inline void summarize(const ExperimentConfig& c, ConvergenceTable& table) {
  table.sizes.clear();
  std::vector<std::pair<double, double>> pairs;
  const std::size_t reps = static_cast<std::size_t>(c.replications);
  for (std::size_t i = 0; i < c.ladder.size(); ++i) {
    std::vector<double> vals, Ns;
    double moment = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& row = table.rows[i * reps + r];
      vals.push_back(row.value);
      Ns.push_back(static_cast<double>(row.N));
      if (c.statistic == Statistic::moment) moment += std::pow(static_cast<double>(row.N) * row.value, c.q);
    }
    SizeSummary sz;
    sz.M = table.rows[i * reps].M;
    sz.median_value = detail::median(vals);
    sz.mean_value = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(reps);
    sz.mean_N = std::accumulate(Ns.begin(), Ns.end(), 0.0) / static_cast<double>(reps);
    if (c.statistic == Statistic::moment) {
      sz.N = sz.mean_N;
      sz.value = std::pow(moment / static_cast<double>(reps), 1.0 / c.q);
    } else {
      sz.N = detail::median(Ns);
      sz.value = sz.median_value;
    }
    table.sizes.push_back(sz);
    pairs.emplace_back(sz.N, sz.value);
  }
  table.theory_slope = c.theory_slope;
  if (pairs.size() >= 3) {
    const SlopeFit fit = fit_slope(pairs);
    table.fitted_slope = fit.slope;
    table.slope_stderr = fit.stderr_;
  }
  table.pass = !c.theory_slope || std::fabs(table.fitted_slope - *c.theory_slope) <= c.slope_tolerance;
}

/// Runs every (size, replication) cell. Cells are independent and seeded by
/// position, so the table does not depend on `threads`.
inline ConvergenceTable run_convergence(ExperimentConfig config) {
  config.validate();
  const Density psi = density::parse(config.density, config.density_dim);
  double work = 0.0;
  for (auto size : config.ladder)
    work += static_cast<double>(detail::driver_points(config, size)) * config.replications;
  if (work > config.budget)
    throw CapExceeded("experiment needs " + std::to_string(work) + " driver points, budget is " +
                      std::to_string(config.budget));

  const std::size_t reps = static_cast<std::size_t>(config.replications);
  const std::size_t jobs = config.ladder.size() * reps;
  ConvergenceTable table;
  table.rows.resize(jobs);
  std::atomic<std::size_t> next{0};
  std::vector<std::string> errors(jobs);
  auto worker = [&] {
    for (std::size_t j; (j = next++) < jobs;) {
      try {
        table.rows[j] = run_single(config, psi, j / reps, static_cast<int>(j % reps));
      } catch (const std::exception& e) {
        errors[j] = e.what();
      }
    }
  };
  if (config.threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < config.threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (!e.empty()) throw Error(e);
  summarize(config, table);
  return table;
}

inline void write_table_csv(std::ostream& os, const ConvergenceTable& t) {
  os << "M,N,rep,value\n" << std::setprecision(17);
  for (const auto& r : t.rows) os << r.M << "," << r.N << "," << r.rep << "," << r.value << "\n";
}

inline nlohmann::json summary_json(const ConvergenceTable& t) {
  nlohmann::json j;
  j["slope"] = t.fitted_slope;
  j["stderr"] = t.slope_stderr;
  j["theory_slope"] = t.theory_slope ? nlohmann::json(*t.theory_slope) : nlohmann::json(nullptr);
  j["pass"] = t.pass;
  return j;
}

struct MainlemmaCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  std::uint64_t N = 0;
};

/// Star discrepancy of the net-driven acceptance-rejection output against
/// 4 C^{-1} b^t gamma_upper / N.
inline MainlemmaCheck check_mainlemma_bound(const Density& psi, int b, int t, int m, double gamma_upper,
                                            NetGenerator gen = NetGenerator::faure) {
  const NetParams params{b, t, m, psi.dim() + 1};
  const PointSet net = digital_net(params, gen);
  const NetVerification v = verify_net(net, params);
  if (!v.verified) throw Error("check_mainlemma_bound: generated point set is not a verified net");
  const ARResult ar = accept_reject(net, psi);
  if (ar.accepted_count == 0) throw Error("check_mainlemma_bound: no point accepted");
  MainlemmaCheck out;
  out.N = ar.accepted_count;
  out.lhs = star_discrepancy(ar.projected, psi).value;
  out.rhs = 4.0 / psi.normalizer() * static_cast<double>(ipow(static_cast<std::uint64_t>(b), t)) *
            gamma_upper / static_cast<double>(out.N);
  out.holds = out.lhs <= out.rhs;
  return out;
}

}  // namespace arqmc
