#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "arqmc/arqmc.hpp"

using namespace arqmc;

namespace {

PointSet load_points(const std::string& path) {
  if (path == "-") return read_csv(std::cin);
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  return read_csv(in);
}

void save_points(const std::string& path, const PointSet& ps) {
  if (path.empty() || path == "-") {
    write_csv(std::cout, ps);
    return;
  }
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  write_csv(out, ps);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance-rejection sampling with quasi-Monte Carlo drivers"};
  app.require_subcommand(1);

  // gen-driver
  auto* gen = app.add_subcommand("gen-driver", "Generate a driver point set as CSV");
  std::string kind = "stratified", generator = "faure", gen_out;
  std::uint64_t M = 16, seed = 0;
  int s = 2, base = 2, m = 4, t = 0;
  gen->add_option("--kind", kind, "stratified, uniform or net")->check(CLI::IsMember({"stratified", "uniform", "net"}));
  gen->add_option("-M,--points", M, "number of points (stratified: a perfect s-th power)");
  gen->add_option("-s,--dim", s, "dimension");
  gen->add_option("--seed", seed, "seed");
  gen->add_option("-b,--base", base, "net base");
  gen->add_option("-m", m, "net exponent");
  gen->add_option("-t", t, "net quality parameter");
  gen->add_option("--generator", generator, "vdc or faure");
  gen->add_option("-o,--output", gen_out, "output CSV (stdout if omitted)");

  // sample
  auto* sample = app.add_subcommand("sample", "Acceptance-rejection on a driver CSV");
  std::string driver_path, density_spec = "linear", sample_out;
  bool keep_last = false;
  double minkowski = -1.0;
  sample->add_option("driver", driver_path, "driver CSV ('-' for stdin)")->required();
  sample->add_option("--minkowski", minkowski, "boundary Minkowski content for the count bracket (default 2s)");
  sample->add_option("-d,--density", density_spec, "const:<c>, linear, psi_ell:<b>:<l>[:p]");
  sample->add_option("-o,--output", sample_out, "output CSV of projected points");
  sample->add_flag("--accepted", keep_last, "write accepted s-dimensional points instead of projections");

  // disc
  auto* disc = app.add_subcommand("disc", "Star or L_q discrepancy of a point CSV w.r.t. a density");
  std::string points_path, disc_density = "const:1", mode = "exact", q = "inf";
  int resolution = 1 << 14;
  disc->add_option("points", points_path, "point CSV ('-' for stdin)")->required();
  disc->add_option("-d,--density", disc_density, "density spec");
  disc->add_option("--mode", mode, "exact, delta:<d> or grid:<res>");
  disc->add_option("-q", q, "2 <= q < inf for L_q, or inf");
  disc->add_option("--resolution", resolution, "midpoint cells per axis for L_q");

  // gamma
  auto* gamma = app.add_subcommand("gamma", "Covering number of the interior boundary (s = 2)");
  std::string gamma_density = "psi_ell:2:2";
  int gamma_base = 2, k = 4, kmax = -1, anchors = 64, example1 = 0;
  bool heuristic = false, list_boxes = false, as_json = false;
  gamma->add_option("-d,--density", gamma_density, "density spec");
  gamma->add_option("-b,--base", gamma_base, "base");
  gamma->add_option("-k,--order", k, "order (first order with --kmax)");
  gamma->add_option("--kmax", kmax, "last order of the table");
  gamma->add_flag("--json", as_json, "JSON reports instead of the table");
  gamma->add_option("--anchors", anchors, "anchors (i + 1/2)/n, i < n");
  gamma->add_option("--example1", example1, "use the explicit psi_l cover with this l instead of the exact search");
  gamma->add_flag("--allow-heuristic", heuristic, "allow sampled range analysis");
  gamma->add_flag("--boxes", list_boxes, "include the boxes of every anchor");

  // verify-net
  auto* verify = app.add_subcommand("verify-net", "Check the (t,m,s)-net property of a point CSV");
  std::string net_path;
  int vb = 2, vt = 0, vm = -1;
  verify->add_option("points", net_path, "point CSV")->required();
  verify->add_option("-b,--base", vb, "base");
  verify->add_option("-t", vt, "claimed t");
  verify->add_option("-m", vm, "m (default: log_b of the point count)");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run a convergence study from a config file");
  std::string config_path, csv_out;
  exp->add_option("config", config_path, "key=value or JSON config")->required();
  exp->add_option("--csv", csv_out, "table CSV (overrides the config's output)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      PointSet ps;
      if (kind == "stratified")
        ps = stratified_points(M, s, seed);
      else if (kind == "uniform")
        ps = uniform_points(M, s, seed);
      else
        ps = digital_net(NetParams{base, t, m, s}, parse_generator(generator));
      save_points(gen_out, ps);
    } else if (*sample) {
      const PointSet driver = load_points(driver_path);
      const Density psi = density::parse(density_spec, driver.dim() - 1);
      const ARResult r = accept_reject(driver, psi);
      save_points(sample_out, keep_last ? r.accepted : r.projected);
      nlohmann::json j{{"M", r.driver_count}, {"N", r.accepted_count},
                       {"lambda_A", AcceptanceRegion(psi).volume()},
                       {"driver", to_string(r.driver_provenance)}};
      j["sandwich_bracket"] = nullptr;
      if (std::holds_alternative<StratifiedSource>(r.driver_provenance)) {
        const CountSandwich cs = check_count_sandwich(r, psi, minkowski > 0 ? minkowski : 2.0 * driver.dim());
        j["sandwich_bracket"] = {{"lower", cs.lower}, {"upper", cs.upper}, {"holds", cs.holds}};
      }
      // keep stdout clean for piped point output
      (sample_out.empty() || sample_out == "-" ? std::cerr : std::cout) << j.dump(2) << "\n";
    } else if (*disc) {
      const PointSet P = load_points(points_path);
      const Density psi = density::parse(disc_density, P.dim());
      nlohmann::json j;
      if (q == "inf") {
        j = to_json(star_discrepancy(P, psi, parse_mode(mode)));
      } else {
        j["q"] = std::stod(q);
        j["resolution"] = resolution;
        j["value"] = lq_discrepancy(P, psi, std::stod(q), resolution);
      }
      j["N"] = P.size();
      std::cout << j.dump(2) << "\n";
    } else if (*gamma) {
      std::vector<double> grid;
      for (int i = 0; i < anchors; ++i) grid.push_back((i + 0.5) / anchors);
      if (kmax < k) kmax = k;
      nlohmann::json all = nlohmann::json::array();
      if (!as_json) std::cout << "k,gamma_lower,bound\n";
      for (int order = k; order <= kmax; ++order) {
        nlohmann::json j{{"order_k", order}};
        nlohmann::json per = nlohmann::json::array();
        std::size_t best = 0;
        double bound = std::nan("");
        if (example1 > 0) {
          for (double a : grid) {
            const CoverReport r = example1_cover_order(example1, gamma_base, order, a);
            best = std::max(best, r.interval_count);
            per.push_back(list_boxes ? to_json(r)
                                     : nlohmann::json{{"anchor_t", a}, {"interval_count", r.interval_count},
                                                      {"covers_boundary", r.covers_boundary}});
          }
          bound = example1_gamma_bound(example1, gamma_base, order);
          j["gamma_upper"] = example1_gamma_upper(example1, gamma_base, order);
        } else {
          const Density psi = density::parse(gamma_density, 1);
          const CoveringResult r = covering_number(psi, gamma_base, order, grid, heuristic);
          best = r.gamma_lower;
          for (const auto& rep : r.per_anchor)
            per.push_back(list_boxes ? to_json(rep)
                                     : nlohmann::json{{"anchor_t", rep.anchor_t[0]},
                                                      {"interval_count", rep.interval_count},
                                                      {"covers_boundary", rep.covers_boundary}});
          if (gamma_density.rfind("psi_ell:", 0) == 0) {
            const auto colon = gamma_density.find(':', 8);
            const int b = std::stoi(gamma_density.substr(8, colon - 8));
            const int ell = std::stoi(gamma_density.substr(colon + 1));
            if (b == gamma_base) bound = example1_gamma_bound(ell, b, order);
          }
        }
        if (as_json) {
          j["gamma_lower"] = best;
          j["bound"] = std::isnan(bound) ? nlohmann::json(nullptr) : nlohmann::json(bound);
          j["per_anchor"] = per;
          all.push_back(j);
        } else {
          std::cout << order << "," << best << ",";
          if (std::isnan(bound)) std::cout << "-"; else std::cout << bound;
          std::cout << "\n";
        }
      }
      if (as_json) std::cout << all.dump(2) << "\n";
    } else if (*verify) {
      const PointSet P = load_points(net_path);
      if (vm < 0) {
        vm = 0;
        while (ipow(static_cast<std::uint64_t>(vb), vm) < P.size()) ++vm;
      }
      const NetVerification v = verify_net(P, NetParams{vb, vt, vm, P.dim()});
      std::cout << to_json(v).dump(2) << "\n";
      return v.verified ? 0 : 2;
    } else if (*exp) {
      ExperimentConfig cfg = load_config(config_path);
      if (!csv_out.empty()) cfg.output = csv_out;
      const ConvergenceTable table = run_convergence(cfg);
      if (!cfg.output.empty()) {
        std::ofstream out(cfg.output);
        if (!out) throw InvalidArgument("cannot write '" + cfg.output + "'");
        write_table_csv(out, table);
      } else {
        write_table_csv(std::cerr, table);
      }
      std::cout << summary_json(table).dump(2) << "\n";
      return table.pass ? 0 : 3;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
