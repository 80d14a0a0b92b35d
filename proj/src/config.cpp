#include "almostmin/config.hpp"

#include <fstream>
#include <sstream>

namespace almostmin::config {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<double> parse_list(const std::string& s, int line_no) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": bad number '" + item + "'");
    }
  }
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (version != 1) throw ConfigError("config: unsupported version");
  if (family != "graphs" && family != "branched" && family != "massratio" &&
      family != "single-sheet")
    throw ConfigError("config: unknown family '" + family + "'");
  if ((family == "graphs" || family == "branched") && Q < 2)
    throw ConfigError(
        "config: Q must be >= 2 for multi-sheet families (use the "
        "single-sheet family for the one-sheet baseline)");
  if (k < 1) throw ConfigError("config: k must be >= 1");
  if (!(alpha_star > 0.0 && alpha_star <= 1.0))
    throw ConfigError("config: alpha_star must be in (0, 1]");
  if (J < 1 || J > 28) throw ConfigError("config: J out of range");
  if (m < 1 || m > 3) throw ConfigError("config: m out of range");
  if (!(box_lo < box_hi)) throw ConfigError("config: empty box");
  if (!(quad_tol > 1e-12 && quad_tol < 1e-2))
    throw ConfigError("config: quad_tol out of (1e-12, 1e-2)");
  for (double r : radii)
    if (!(r > 0.0)) throw ConfigError("config: radii must be positive");
  if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("config: eps out of (0, 1]");
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string val = trim(t.substr(eq + 1));
    try {
      if (key == "version") cfg.version = std::stoi(val);
      else if (key == "set_file") cfg.set_file = val;
      else if (key == "family") cfg.family = val;
      else if (key == "Q") cfg.Q = std::stoi(val);
      else if (key == "k") cfg.k = std::stoi(val);
      else if (key == "alpha_star") cfg.alpha_star = std::stod(val);
      else if (key == "J") cfg.J = std::stoi(val);
      else if (key == "m") cfg.m = std::stoi(val);
      else if (key == "box_lo") cfg.box_lo = std::stod(val);
      else if (key == "box_hi") cfg.box_hi = std::stod(val);
      else if (key == "radii") cfg.radii = parse_list(val, line_no);
      else if (key == "centers_per_class") cfg.centers_per_class = std::stoi(val);
      else if (key == "r0") cfg.r0 = std::stod(val);
      else if (key == "slope_tol") cfg.slope_tol = std::stod(val);
      else if (key == "quad_tol") cfg.quad_tol = std::stod(val);
      else if (key == "seed") cfg.seed = std::stoull(val);
      else if (key == "eps") cfg.eps = std::stod(val);
      else if (key == "n_balls") cfg.n_balls = std::stoi(val);
      else if (key == "cyl_r") cfg.cyl_r = std::stod(val);
      else
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": unknown key '" + key + "'");
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": bad value for '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

}  // namespace almostmin::config
