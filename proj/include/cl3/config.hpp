#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cl3/errors.hpp"
#include "cl3/evolution.hpp"
#include "cl3/field.hpp"
#include "cl3/grid.hpp"
#include "cl3/physics.hpp"

// Run configuration: a strict sectioned key/value text format. Unknown
// sections or keys are errors (fail-closed), and load(save(cfg)) == cfg.

namespace cl3 {

struct InitialSpec {
  enum class Kind { planewave, gaussian, file };
  Kind kind = Kind::planewave;
  // planewave: N plus either the spatial velocity or the full current J
  double n = 1.0;
  std::array<double, 3> velocity{};
  bool have_current = false;
  std::array<double, 4> current{};  // J^mu when given directly
  double phi0 = 0.0;
  // gaussian
  GaussianBumpSpec bump;
  bool center_set = false;
  // file
  std::string path;
};

struct OutputSpec {
  std::string directory = "out";
  int stride = 1;
  std::string format = "bin";  // bin | csv
};

struct RunConfig {
  PhysicsParams physics;
  Grid grid;
  SchemeConfig scheme;
  PotentialSpec potential;
  std::string potential_file;  // sampled potentials load from a snapshot file
  InitialSpec initial;
  OutputSpec output;
  std::uint64_t seed = 0;
};

namespace detail {

struct IniData {
  std::map<std::string, std::map<std::string, std::string>> sections;
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline IniData parse_ini(std::istream& in) {
  IniData data;
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": bad section");
      section = trim(line.substr(1, line.size() - 2));
      data.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos || section.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (data.sections[section].count(key))
      throw ConfigError("config: duplicate key '" + key + "' in [" + section + "]");
    data.sections[section][key] = value;
  }
  return data;
}

class SectionReader {
 public:
  SectionReader(const IniData& data, const std::string& name) : name_(name) {
    const auto it = data.sections.find(name);
    if (it != data.sections.end()) kv_ = &it->second;
  }
  ~SectionReader() = default;

  bool present() const { return kv_ != nullptr; }

  bool has(const std::string& key) {
    if (!kv_) return false;
    used_.insert(key);
    return kv_->count(key) > 0;
  }
  std::string get(const std::string& key, const std::string& fallback = "") {
    used_.insert(key);
    if (!kv_) return fallback;
    const auto it = kv_->find(key);
    return it == kv_->end() ? fallback : it->second;
  }
  double get_double(const std::string& key, double fallback) {
    const std::string v = get(key);
    if (v.empty()) return fallback;
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size())
      throw ConfigError("config: [" + name_ + "] " + key + ": bad number '" + v + "'");
    return d;
  }
  long get_long(const std::string& key, long fallback) {
    const std::string v = get(key);
    if (v.empty()) return fallback;
    std::size_t pos = 0;
    const long d = std::stol(v, &pos);
    if (pos != v.size())
      throw ConfigError("config: [" + name_ + "] " + key + ": bad integer '" + v + "'");
    return d;
  }
  template <std::size_t K>
  std::array<double, K> get_vec(const std::string& key, const std::array<double, K>& fb) {
    const std::string v = get(key);
    if (v.empty()) return fb;
    std::istringstream iss(v);
    std::array<double, K> out{};
    for (std::size_t i = 0; i < K; ++i)
      if (!(iss >> out[i]))
        throw ConfigError("config: [" + name_ + "] " + key + ": expected " +
                          std::to_string(K) + " numbers");
    std::string rest;
    if (iss >> rest)
      throw ConfigError("config: [" + name_ + "] " + key + ": trailing content");
    return out;
  }
  Paravector get_paravector(const std::string& key, const Paravector& fb) {
    if (get(key).empty()) return fb;
    const auto v = get_vec<8>(key, {});
    return {cplx(v[0], v[1]), cplx(v[2], v[3]), cplx(v[4], v[5]), cplx(v[6], v[7])};
  }

  void finish(const IniData& data) const {
    const auto it = data.sections.find(name_);
    if (it == data.sections.end()) return;
    for (const auto& [key, value] : it->second)
      if (!used_.count(key))
        throw ConfigError("config: unknown key '" + key + "' in [" + name_ + "]");
  }

 private:
  std::string name_;
  const std::map<std::string, std::string>* kv_ = nullptr;
  std::set<std::string> used_;
};

}  // namespace detail

inline RunConfig parse_config(std::istream& in) {
  const auto data = detail::parse_ini(in);
  const std::set<std::string> known = {"physics", "grid",    "scheme",
                                       "potential", "initial", "output"};
  for (const auto& [name, kv] : data.sections)
    if (!known.count(name)) throw ConfigError("config: unknown section [" + name + "]");

  RunConfig cfg;

  detail::SectionReader phys(data, "physics");
  cfg.physics.m = phys.get_double("m", 1.0);
  cfg.physics.q = phys.get_double("q", 0.0);
  cfg.physics.lambda = phys.get_double("lambda", 0.0);
  if (cfg.physics.m < 0.0) throw ConfigError("config: m must be >= 0");
  if (cfg.physics.lambda < 0.0) throw ConfigError("config: lambda must be >= 0");
  phys.finish(data);

  detail::SectionReader grid(data, "grid");
  {
    const auto n = grid.get_vec<3>("n", {16, 16, 16});
    for (int d = 0; d < 3; ++d) {
      if (n[d] != std::floor(n[d])) throw ConfigError("config: grid n must be integers");
      cfg.grid.n[d] = static_cast<int>(n[d]);
    }
    cfg.grid.extent = grid.get_vec<3>("extent", cfg.grid.extent);
    cfg.grid.validate();
  }
  grid.finish(data);

  detail::SectionReader scheme(data, "scheme");
  cfg.scheme.dt = scheme.get_double("dt", 0.0);
  cfg.scheme.t_end = scheme.get_double("t_end", 1.0);
  cfg.scheme.c_cfl = scheme.get_double("c_cfl", 0.25);
  cfg.scheme.growth_tol = scheme.get_double("growth_tol", 1e-6);
  {
    const std::string m = scheme.get("method", "strang-split");
    if (m == "strang-split")
      cfg.scheme.method = Method::strang_split;
    else if (m == "rk4")
      cfg.scheme.method = Method::rk4;
    else
      throw ConfigError("config: unknown method '" + m + "'");
    const std::string d = scheme.get("derivative", "spectral");
    if (d == "spectral")
      cfg.scheme.derivative = DerivativeKind::spectral;
    else if (d == "central-4")
      cfg.scheme.derivative = DerivativeKind::central4;
    else
      throw ConfigError("config: unknown derivative '" + d + "'");
    const std::string mo = scheme.get("mode", "nonlinear-regularized");
    if (mo == "linear")
      cfg.scheme.mode = Mode::linear;
    else if (mo == "nonlinear-regularized")
      cfg.scheme.mode = Mode::nonlinear_regularized;
    else
      throw ConfigError("config: unknown mode '" + mo + "'");
  }
  cfg.scheme.validate(cfg.grid);
  scheme.finish(data);

  detail::SectionReader pot(data, "potential");
  {
    const std::string kind = pot.get("kind", "zero");
    if (kind == "zero") {
      cfg.potential.kind = PotentialSpec::Kind::zero;
    } else if (kind == "constant") {
      cfg.potential.kind = PotentialSpec::Kind::constant;
      const auto a = pot.get_vec<4>("a", {});
      cfg.potential.value = Paravector{a[0], a[1], a[2], a[3]};
    } else if (kind == "sampled") {
      cfg.potential.kind = PotentialSpec::Kind::sampled;
      cfg.potential_file = pot.get("file");
      if (cfg.potential_file.empty())
        throw ConfigError("config: sampled potential needs file = PATH");
    } else {
      throw ConfigError("config: unknown potential kind '" + kind + "'");
    }
  }
  pot.finish(data);

  detail::SectionReader init(data, "initial");
  {
    const std::string kind = init.get("kind", "planewave");
    if (kind == "planewave") {
      cfg.initial.kind = InitialSpec::Kind::planewave;
      cfg.initial.n = init.get_double("density", 1.0);
      cfg.initial.phi0 = init.get_double("phase0", 0.0);
      if (init.has("current")) {
        cfg.initial.have_current = true;
        cfg.initial.current = init.get_vec<4>("current", {});
        init.get("velocity");  // mark as seen; conflicting keys rejected below
        if (init.has("velocity"))
          throw ConfigError("config: give either velocity or current, not both");
      } else {
        cfg.initial.velocity = init.get_vec<3>("velocity", {});
      }
    } else if (kind == "gaussian") {
      cfg.initial.kind = InitialSpec::Kind::gaussian;
      auto& b = cfg.initial.bump;
      b.background = init.get_paravector("background", Paravector::scalar(1.0));
      b.bump_dir = init.get_paravector("bump_dir", Paravector::scalar(1.0));
      b.amplitude = init.get_double("amplitude", 0.2);
      b.width = init.get_double("width", 1.0);
      if (init.has("center")) {
        cfg.initial.center_set = true;
        b.center = init.get_vec<3>("center", {});
      }
      const auto c = init.get_vec<3>("carrier", {0, 0, 0});
      for (int d = 0; d < 3; ++d) {
        if (c[d] != std::floor(c[d]))
          throw ConfigError("config: carrier must be integer modes");
        b.carrier[d] = static_cast<int>(c[d]);
      }
    } else if (kind == "file") {
      cfg.initial.kind = InitialSpec::Kind::file;
      cfg.initial.path = init.get("file");
      if (cfg.initial.path.empty())
        throw ConfigError("config: initial kind file needs file = PATH");
    } else {
      throw ConfigError("config: unknown initial kind '" + kind + "'");
    }
  }
  init.finish(data);

  detail::SectionReader out(data, "output");
  cfg.output.directory = out.get("directory", "out");
  cfg.output.stride = static_cast<int>(out.get_long("stride", 1));
  cfg.output.format = out.get("format", "bin");
  if (cfg.output.format != "bin" && cfg.output.format != "csv")
    throw ConfigError("config: format must be bin or csv");
  if (cfg.output.stride < 1) throw ConfigError("config: stride must be >= 1");
  cfg.seed = static_cast<std::uint64_t>(out.get_long("seed", 0));
  out.finish(data);

  return cfg;
}

inline RunConfig parse_config_string(const std::string& text) {
  std::istringstream iss(text);
  return parse_config(iss);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  return parse_config(in);
}

inline std::string save_config(const RunConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << "[physics]\n";
  out << "m = " << cfg.physics.m << "\n";
  out << "q = " << cfg.physics.q << "\n";
  out << "lambda = " << cfg.physics.lambda << "\n\n";

  out << "[grid]\n";
  out << "n = " << cfg.grid.n[0] << " " << cfg.grid.n[1] << " " << cfg.grid.n[2] << "\n";
  out << "extent = " << cfg.grid.extent[0] << " " << cfg.grid.extent[1] << " "
      << cfg.grid.extent[2] << "\n\n";

  out << "[scheme]\n";
  out << "dt = " << cfg.scheme.dt << "\n";
  out << "t_end = " << cfg.scheme.t_end << "\n";
  out << "c_cfl = " << cfg.scheme.c_cfl << "\n";
  out << "growth_tol = " << cfg.scheme.growth_tol << "\n";
  out << "method = "
      << (cfg.scheme.method == Method::strang_split ? "strang-split" : "rk4") << "\n";
  out << "derivative = "
      << (cfg.scheme.derivative == DerivativeKind::spectral ? "spectral" : "central-4")
      << "\n";
  out << "mode = "
      << (cfg.scheme.mode == Mode::linear ? "linear" : "nonlinear-regularized") << "\n\n";

  out << "[potential]\n";
  switch (cfg.potential.kind) {
    case PotentialSpec::Kind::zero:
      out << "kind = zero\n";
      break;
    case PotentialSpec::Kind::constant:
      out << "kind = constant\n";
      out << "a = " << cfg.potential.value.c[0].real() << " "
          << cfg.potential.value.c[1].real() << " " << cfg.potential.value.c[2].real()
          << " " << cfg.potential.value.c[3].real() << "\n";
      break;
    case PotentialSpec::Kind::sampled:
      out << "kind = sampled\n";
      out << "file = " << cfg.potential_file << "\n";
      break;
  }
  out << "\n[initial]\n";
  switch (cfg.initial.kind) {
    case InitialSpec::Kind::planewave:
      out << "kind = planewave\n";
      out << "density = " << cfg.initial.n << "\n";
      if (cfg.initial.have_current)
        out << "current = " << cfg.initial.current[0] << " " << cfg.initial.current[1]
            << " " << cfg.initial.current[2] << " " << cfg.initial.current[3] << "\n";
      else
        out << "velocity = " << cfg.initial.velocity[0] << " " << cfg.initial.velocity[1]
            << " " << cfg.initial.velocity[2] << "\n";
      out << "phase0 = " << cfg.initial.phi0 << "\n";
      break;
    case InitialSpec::Kind::gaussian: {
      out << "kind = gaussian\n";
      const auto& b = cfg.initial.bump;
      auto pv = [&](const char* key, const Paravector& p) {
        out << key << " =";
        for (int mu = 0; mu < 4; ++mu)
          out << " " << p.c[mu].real() << " " << p.c[mu].imag();
        out << "\n";
      };
      pv("background", b.background);
      pv("bump_dir", b.bump_dir);
      out << "amplitude = " << b.amplitude << "\n";
      out << "width = " << b.width << "\n";
      if (cfg.initial.center_set)
        out << "center = " << b.center[0] << " " << b.center[1] << " " << b.center[2]
            << "\n";
      out << "carrier = " << b.carrier[0] << " " << b.carrier[1] << " " << b.carrier[2]
          << "\n";
      break;
    }
    case InitialSpec::Kind::file:
      out << "kind = file\n";
      out << "file = " << cfg.initial.path << "\n";
      break;
  }
  out << "\n[output]\n";
  out << "directory = " << cfg.output.directory << "\n";
  out << "stride = " << cfg.output.stride << "\n";
  out << "format = " << cfg.output.format << "\n";
  out << "seed = " << cfg.seed << "\n";
  return out.str();
}

}  // namespace cl3
