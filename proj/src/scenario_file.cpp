#include "slipstokes/scenario_file.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "slipstokes/errors.hpp"
#include "slipstokes/hashing.hpp"

namespace slipstokes {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw ParseError(key, "expected a number, got '" + text + "'");
  }
  if (trim(text.substr(pos)) != "") throw ParseError(key, "expected a number, got '" + text + "'");
  if (!std::isfinite(v)) throw ParseError(key, "must be finite");
  return v;
}

int to_int(const std::string& key, const std::string& text) {
  const double v = to_double(key, text);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ParseError(key, "expected an integer, got '" + text + "'");
  return static_cast<int>(v);
}

std::vector<double> to_doubles(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(to_double(key, tok));
  return out;
}

std::vector<int> to_ints(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  std::vector<int> out;
  std::string tok;
  while (in >> tok) out.push_back(to_int(key, tok));
  return out;
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw ParseError(key, "expected true or false, got '" + text + "'");
}

ScalarFunction to_function(const std::string& key, const std::string& text) {
  try {
    return ScalarFunction::parse(text);
  } catch (const std::invalid_argument& e) {
    throw ParseError(key, e.what());
  }
}

// One section: key lookup with consumption tracking.
class Section {
 public:
  Section(std::string name, const pt::ptree* tree) : name_(std::move(name)), tree_(tree) {
    if (!tree_) return;
    for (const auto& [k, v] : *tree_) {
      if (!v.empty()) throw ParseError(path(k), "nested keys are not allowed");
      if (!values_.emplace(k, trim(v.data())).second) throw ParseError(path(k), "duplicate key");
    }
  }
  bool present() const { return tree_ != nullptr; }
  std::string path(const std::string& key) const { return name_ + "." + key; }
  const std::string* get(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }
  const std::string& require(const std::string& key) {
    const std::string* v = get(key);
    if (!v) throw ParseError(path(key), "required key is missing");
    return *v;
  }
  void finish() const {
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) throw ParseError(path(k), "unknown key");
  }

  template <class T, class Conv>
  void read(const std::string& key, T& target, Conv conv) {
    if (const std::string* v = get(key)) target = conv(path(key), *v);
  }

 private:
  std::string name_;
  const pt::ptree* tree_;
  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

const std::vector<std::string> kSections{"domain",           "physics",        "wall",  "friction.tresca",
                                         "friction.coulomb", "discretization", "verify"};

void check_range(const std::string& key, const std::vector<double>& r) {
  if (r.size() != 2) throw ParseError(key, "expected two numbers 'low high'");
  if (!(r[0] < r[1])) throw ParseError(key, "low bound must be below high bound");
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v[i]);
  return s;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}

const std::string& builtin(const ScalarFunction& f, const std::string& key, std::string& buf) {
  if (!f.is_builtin()) throw UsageError("serialize_scenario: " + key + " is not a built-in function");
  buf = f.describe();
  return buf;
}

}  // namespace

Scenario parse_scenario_text(const std::string& text) {
  pt::ptree tree;
  {
    std::istringstream in(text);
    try {
      pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
      throw ParseError("line " + std::to_string(e.line()), e.message());
    }
  }
  std::map<std::string, const pt::ptree*> sections;
  for (const auto& [name, sub] : tree) {
    bool known = false;
    for (const auto& s : kSections) known = known || s == name;
    if (!known) {
      if (sub.empty()) throw ParseError(name, "key outside of any section");
      throw ParseError(name, "unknown section");
    }
    sections[name] = &sub;
  }
  auto section = [&](const std::string& n) {
    auto it = sections.find(n);
    return Section(n, it == sections.end() ? nullptr : it->second);
  };

  Scenario sc;

  Section dom = section("domain");
  dom.read("dimension", sc.domain.dimension, to_int);
  const int d = sc.domain.dimension;
  if (d != 2 && d != 3) throw ParseError("domain.dimension", "must be 2 or 3");
  for (int k = 0; k < d - 1; ++k) {
    const std::string key = "omega_x" + std::to_string(k + 1);
    if (const std::string* v = dom.get(key)) {
      const auto r = to_doubles(dom.path(key), *v);
      check_range(dom.path(key), r);
      sc.domain.omega[k] = {r[0], r[1]};
    }
  }
  dom.read("height", sc.height, to_function);
  sc.domain.h_min = sc.domain.h_max = sc.height(sc.domain.omega[0][0]);
  dom.read("h_min", sc.domain.h_min, to_double);
  dom.read("h_max", sc.domain.h_max, to_double);
  dom.read("lipschitz", sc.domain.lipschitz, to_double);
  dom.finish();
  if (!(sc.domain.h_min > 0.0)) throw ParseError("domain.h_min", "height must be positive");
  if (sc.height.inf(sc.domain.omega[0][0], sc.domain.omega[0][1]) <= 0.0)
    throw ParseError("domain.height", "height must be positive");
  sc.sync_domain();

  Section phys = section("physics");
  phys.read("mu", sc.mu, to_double);
  phys.read("T", sc.T, to_double);
  phys.read("dt", sc.dt, to_double);
  sc.force.assign(d, 0.0);
  phys.read("force", sc.force, to_doubles);
  if (static_cast<int>(sc.force.size()) != d) throw ParseError("physics.force", "needs one component per dimension");
  phys.read("zeta", sc.zeta, to_function);
  if (const std::string* v = phys.get("v0")) {
    if (*v == "lifting") sc.v0 = Scenario::InitialVelocity::Lifting;
    else if (*v == "zero") sc.v0 = Scenario::InitialVelocity::Zero;
    else throw ParseError("physics.v0", "expected lifting or zero");
  }
  phys.read("compatibility", sc.compatibility, to_bool);
  phys.finish();
  if (!(sc.mu > 0.0)) throw ParseError("physics.mu", "mu must be positive");
  if (!(sc.dt > 0.0)) throw ParseError("physics.dt", "dt must be positive");
  if (!(sc.T >= 0.0)) throw ParseError("physics.T", "T must be nonnegative");
  if (std::abs(sc.zeta(0.0) - 1.0) > 1e-14) throw ParseError("physics.zeta", "zeta(0) must equal 1");

  Section wall = section("wall");
  wall.read("s", sc.wall.s, to_double);
  if (const std::string* v = wall.get("lateral")) {
    if (*v == "zero") {
      sc.wall.lateral = WallData::Lateral::Zero;
    } else {
      const bool shape = v->size() > 8 && v->rfind("linear(", 0) == 0 && v->back() == ')';
      if (!shape) throw ParseError("wall.lateral", "expected zero or linear(b)");
      sc.wall.lateral_value = to_double("wall.lateral", v->substr(7, v->size() - 8));
      sc.wall.lateral = WallData::Lateral::Linear;
    }
  }
  wall.finish();

  Section tresca = section("friction.tresca");
  Section coul = section("friction.coulomb");
  if (tresca.present() && coul.present())
    throw ParseError("friction", "give either [friction.tresca] or [friction.coulomb], not both");
  if (!tresca.present() && !coul.present())
    throw ParseError("friction", "a [friction.tresca] or [friction.coulomb] section is required");
  if (tresca.present()) {
    sc.tresca_ell = to_function("friction.tresca.ell", tresca.require("ell"));
    tresca.finish();
    if (sc.tresca_ell->inf(0.0, sc.T) < 0.0) throw ParseError("friction.tresca.ell", "threshold must be nonnegative");
  } else {
    CoulombSpec c;
    coul.read("F0", c.F0, to_function);
    coul.read("Fsigma", c.Fsigma, to_function);
    coul.read("S", c.S, to_function);
    coul.read("p_exponent", c.p_exponent, to_double);
    coul.read("C_S", c.C_S, to_double);
    coul.read("C_prime_data", c.C_prime_data, to_double);
    coul.read("tol", c.tol, to_double);
    coul.read("max_iter", c.max_iter, to_int);
    coul.read("max_halvings", c.max_halvings, to_int);
    coul.read("max_window", c.max_window, to_double);
    coul.finish();
    if (!(c.p_exponent > 2.0)) throw ParseError("friction.coulomb.p_exponent", "p must exceed 2");
    if (c.F0.inf(0.0, sc.T) < 0.0) throw ParseError("friction.coulomb.F0", "threshold must be nonnegative");
    if (c.Fsigma.inf(0.0, sc.T) < 0.0) throw ParseError("friction.coulomb.Fsigma", "Fsigma must be nonnegative");
    if (c.S.inf(0.0, sc.T) < 0.0) throw ParseError("friction.coulomb.S", "S must be nonnegative");
    try {
      c.validate(sc.T);
    } catch (const DataError& e) {
      throw ParseError("friction.coulomb", e.what());
    }
    sc.coulomb = c;
  }

  Section disc = section("discretization");
  sc.discretization.resolution.assign(d, 16);
  disc.read("resolution", sc.discretization.resolution, to_ints);
  disc.read("eps_schedule", sc.discretization.eps_schedule, to_doubles);
  disc.read("newton_tol", sc.discretization.newton_tol, to_double);
  disc.read("newton_max_iter", sc.discretization.newton_max_iter, to_int);
  disc.read("rho", sc.discretization.rho, to_double);
  disc.read("dump_steps", sc.discretization.dump_steps, to_ints);
  disc.finish();
  for (int r : sc.discretization.resolution)
    if (r < 1) throw ParseError("discretization.resolution", "entries must be positive");

  Section ver = section("verify");
  ver.read("eps_list", sc.verify.eps_list, to_doubles);
  ver.read("dt_list", sc.verify.dt_list, to_doubles);
  ver.read("steady_tol", sc.verify.steady_tol, to_double);
  ver.read("max_steady_steps", sc.verify.max_steady_steps, to_int);
  ver.finish();

  try {
    sc.validate();
  } catch (const DataError& e) {
    throw ParseError("scenario", e.what());
  } catch (const GeometryError& e) {
    throw ParseError("domain", e.what());
  }
  return sc;
}

Scenario parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
  if (s.force_fn) throw UsageError("serialize_scenario: a force callback cannot be serialized");
  std::ostringstream o;
  std::string b;
  const int d = s.dim();
  o << "[domain]\n";
  o << "dimension = " << d << "\n";
  for (int k = 0; k < d - 1; ++k)
    o << "omega_x" << k + 1 << " = " << format_double(s.domain.omega[k][0]) << " "
      << format_double(s.domain.omega[k][1]) << "\n";
  o << "height = " << builtin(s.height, "height", b) << "\n";
  o << "h_min = " << format_double(s.domain.h_min) << "\n";
  o << "h_max = " << format_double(s.domain.h_max) << "\n";
  o << "lipschitz = " << format_double(s.domain.lipschitz) << "\n";
  o << "\n[physics]\n";
  o << "mu = " << format_double(s.mu) << "\n";
  o << "T = " << format_double(s.T) << "\n";
  o << "dt = " << format_double(s.dt) << "\n";
  o << "force = " << join(s.force) << "\n";
  o << "zeta = " << builtin(s.zeta, "zeta", b) << "\n";
  o << "v0 = " << (s.v0 == Scenario::InitialVelocity::Lifting ? "lifting" : "zero") << "\n";
  o << "compatibility = " << (s.compatibility ? "true" : "false") << "\n";
  o << "\n[wall]\n";
  o << "s = " << format_double(s.wall.s) << "\n";
  o << "lateral = " << s.wall.describe_lateral() << "\n";
  if (s.coulomb) {
    const CoulombSpec& c = *s.coulomb;
    o << "\n[friction.coulomb]\n";
    o << "F0 = " << builtin(c.F0, "F0", b) << "\n";
    o << "Fsigma = " << builtin(c.Fsigma, "Fsigma", b) << "\n";
    o << "S = " << builtin(c.S, "S", b) << "\n";
    o << "p_exponent = " << format_double(c.p_exponent) << "\n";
    o << "C_S = " << format_double(c.C_S) << "\n";
    o << "C_prime_data = " << format_double(c.C_prime_data) << "\n";
    o << "tol = " << format_double(c.tol) << "\n";
    o << "max_iter = " << c.max_iter << "\n";
    o << "max_halvings = " << c.max_halvings << "\n";
    o << "max_window = " << format_double(c.max_window) << "\n";
  } else if (s.tresca_ell) {
    o << "\n[friction.tresca]\n";
    o << "ell = " << builtin(*s.tresca_ell, "ell", b) << "\n";
  }
  const Discretization& di = s.discretization;
  o << "\n[discretization]\n";
  o << "resolution = " << join(di.resolution) << "\n";
  o << "eps_schedule = " << join(di.eps_schedule) << "\n";
  o << "newton_tol = " << format_double(di.newton_tol) << "\n";
  o << "newton_max_iter = " << di.newton_max_iter << "\n";
  o << "rho = " << format_double(di.rho) << "\n";
  if (!di.dump_steps.empty()) o << "dump_steps = " << join(di.dump_steps) << "\n";
  o << "\n[verify]\n";
  o << "eps_list = " << join(s.verify.eps_list) << "\n";
  o << "dt_list = " << join(s.verify.dt_list) << "\n";
  o << "steady_tol = " << format_double(s.verify.steady_tol) << "\n";
  o << "max_steady_steps = " << s.verify.max_steady_steps << "\n";
  return o.str();
}

std::string scenario_hash(const Scenario& s) { return sha256_hex(serialize_scenario(s)); }

}  // namespace slipstokes
