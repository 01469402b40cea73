#pragma once

#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "arqmc/error.hpp"

namespace arqmc {

/// (b, t, m, s) of a (t,m,s)-net claim in base b.
struct NetParams {
  int base = 2;
  int t = 0;
  int m = 0;
  int s = 1;

  void validate() const {
    if (base < 2) throw InvalidArgument("net base must be >= 2");
    if (s < 1) throw InvalidArgument("net dimension must be >= 1");
    if (t < 0 || t > m) throw InvalidArgument("net parameters need 0 <= t <= m");
  }
  friend bool operator==(const NetParams&, const NetParams&) = default;
};

enum class NetGenerator {
  van_der_corput,  // radical inverse (s=1), Hammersley (n/b^m, radical inverse) for s=2
  faure,           // Pascal-matrix digital net over a prime base
};

inline std::string to_string(NetGenerator g) {
  return g == NetGenerator::faure ? "faure" : "vdc";
}

inline NetGenerator parse_generator(const std::string& name) {
  if (name == "vdc" || name == "van_der_corput" || name == "hammersley")
    return NetGenerator::van_der_corput;
  if (name == "faure") return NetGenerator::faure;
  throw InvalidArgument("unknown net generator '" + name + "' (expected vdc or faure)");
}

struct StratifiedSource {
  std::uint64_t M = 0;
  int s = 0;
  std::uint64_t seed = 0;
  friend bool operator==(const StratifiedSource&, const StratifiedSource&) = default;
};

struct NetSource {
  NetParams params;
  NetGenerator generator = NetGenerator::van_der_corput;
  friend bool operator==(const NetSource&, const NetSource&) = default;
};

struct UniformSource {
  std::uint64_t N = 0;
  int dim = 0;
  std::uint64_t seed = 0;
  friend bool operator==(const UniformSource&, const UniformSource&) = default;
};

/// Anything not directly replayable: accepted/projected outputs, external files.
struct DerivedSource {
  std::string description;
  friend bool operator==(const DerivedSource&, const DerivedSource&) = default;
};

using Provenance = std::variant<StratifiedSource, NetSource, UniformSource, DerivedSource>;

inline std::string to_string(const Provenance& p) {
  std::ostringstream os;
  if (const auto* st = std::get_if<StratifiedSource>(&p)) {
    os << "stratified(M=" << st->M << ",s=" << st->s << ",seed=" << st->seed << ")";
  } else if (const auto* n = std::get_if<NetSource>(&p)) {
    os << "net(b=" << n->params.base << ",t=" << n->params.t << ",m=" << n->params.m
       << ",s=" << n->params.s << ",generator=" << to_string(n->generator) << ")";
  } else if (const auto* u = std::get_if<UniformSource>(&p)) {
    os << "uniform(N=" << u->N << ",dim=" << u->dim << ",seed=" << u->seed << ")";
  } else {
    os << "derived(" << std::get<DerivedSource>(p).description << ")";
  }
  return os.str();
}

inline Provenance parse_provenance(const std::string& text) {
  const auto open = text.find('(');
  if (open == std::string::npos || text.back() != ')') return DerivedSource{text};
  const std::string kind = text.substr(0, open);
  const std::string body = text.substr(open + 1, text.size() - open - 2);
  if (kind == "derived") return DerivedSource{body};
  std::map<std::string, std::string> kv;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) return DerivedSource{text};
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  try {
    if (kind == "stratified")
      return StratifiedSource{std::stoull(kv.at("M")), std::stoi(kv.at("s")),
                              std::stoull(kv.at("seed"))};
    if (kind == "net")
      return NetSource{NetParams{std::stoi(kv.at("b")), std::stoi(kv.at("t")),
                                 std::stoi(kv.at("m")), std::stoi(kv.at("s"))},
                       parse_generator(kv.at("generator"))};
    if (kind == "uniform")
      return UniformSource{std::stoull(kv.at("N")), std::stoi(kv.at("dim")),
                           std::stoull(kv.at("seed"))};
  } catch (const std::out_of_range&) {
  } catch (const std::invalid_argument&) {
  }
  return DerivedSource{text};
}

/// Finite point list in [0,1)^dim, stored row-major.
class PointSet {
 public:
  PointSet() = default;
  PointSet(int dim, Provenance provenance) : dim_(dim), provenance_(std::move(provenance)) {
    if (dim < 1) throw InvalidArgument("point set dimension must be >= 1");
  }
  PointSet(int dim, std::vector<double> coords, Provenance provenance)
      : PointSet(dim, std::move(provenance)) {
    if (coords.size() % static_cast<std::size_t>(dim) != 0)
      throw InvalidArgument("coordinate count is not a multiple of the dimension");
    coords_ = std::move(coords);
  }

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ ? coords_.size() / static_cast<std::size_t>(dim_) : 0; }
  bool empty() const noexcept { return coords_.empty(); }
  const Provenance& provenance() const noexcept { return provenance_; }
  void set_provenance(Provenance p) { provenance_ = std::move(p); }

  std::span<const double> operator[](std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  const std::vector<double>& coords() const noexcept { return coords_; }

  void push_back(std::span<const double> p) {
    if (static_cast<int>(p.size()) != dim_) throw InvalidArgument("point dimension mismatch");
    coords_.insert(coords_.end(), p.begin(), p.end());
  }
  void reserve(std::size_t n) { coords_.reserve(n * static_cast<std::size_t>(dim_)); }

  /// Coordinate j of every point, in order.
  std::vector<double> axis(int j) const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = coords_[i * dim_ + j];
    return out;
  }

  bool all_in_unit_cube() const {
    for (double v : coords_)
      if (!(v >= 0.0 && v < 1.0)) return false;
    return true;
  }

  friend bool operator==(const PointSet& a, const PointSet& b) {
    return a.dim_ == b.dim_ && a.coords_ == b.coords_ && a.provenance_ == b.provenance_;
  }

 private:
  int dim_ = 0;
  std::vector<double> coords_;
  Provenance provenance_ = DerivedSource{"empty"};
};

/// CSV: header "# dim=<d> provenance=<...>", then one comma-separated point
/// per line with 17 significant digits.
inline void write_csv(std::ostream& os, const PointSet& ps) {
  os << "# dim=" << ps.dim() << " provenance=" << to_string(ps.provenance()) << "\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto p = ps[i];
    for (std::size_t j = 0; j < p.size(); ++j) os << (j ? "," : "") << p[j];
    os << "\n";
  }
}

inline PointSet read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# dim=", 0) != 0)
    throw InvalidArgument("point CSV must start with '# dim=<d> provenance=<...>'");
  const auto prov_pos = line.find(" provenance=");
  const int dim = std::stoi(line.substr(6, prov_pos == std::string::npos ? std::string::npos
                                                                          : prov_pos - 6));
  Provenance prov = DerivedSource{"csv"};
  if (prov_pos != std::string::npos) prov = parse_provenance(line.substr(prov_pos + 12));
  std::vector<double> coords;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string field;
    int count = 0;
    while (std::getline(ss, field, ',')) {
      coords.push_back(std::stod(field));
      ++count;
    }
    if (count != dim)
      throw InvalidArgument("line " + std::to_string(lineno) + " has " + std::to_string(count) +
                            " fields, expected " + std::to_string(dim));
  }
  return PointSet(dim, std::move(coords), std::move(prov));
}

}  // namespace arqmc
