#include "almostmin/sets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace almostmin::sets {

namespace {

double dist_to_interval(double t, double lo, double hi) {
  if (t < lo) return lo - t;
  if (t > hi) return t - hi;
  return 0.0;
}

// Recursion over surviving intervals, pruned by interval lower bounds.
void cantor_rec(double t, double lo, double hi, double ratio, int depth,
                double& best) {
  double bound = dist_to_interval(t, lo, hi);
  if (bound >= best) return;
  if (depth == 0) {
    best = std::min(best, bound);
    return;
  }
  double len = (hi - lo) * ratio;
  // visit the child nearer to t first so the bound tightens immediately
  // and the far subtree prunes; the result is the exact min either way
  if (dist_to_interval(t, lo, lo + len) <=
      dist_to_interval(t, hi - len, hi)) {
    cantor_rec(t, lo, lo + len, ratio, depth - 1, best);
    cantor_rec(t, hi - len, hi, ratio, depth - 1, best);
  } else {
    cantor_rec(t, hi - len, hi, ratio, depth - 1, best);
    cantor_rec(t, lo, lo + len, ratio, depth - 1, best);
  }
}

struct Builder {
  ClosedSetOracle operator()(const FinitePoints& fp) const {
    if (fp.points.empty()) throw SpecError("FinitePoints: empty point list");
    int m = static_cast<int>(fp.points.front().size());
    for (const auto& p : fp.points)
      if (static_cast<int>(p.size()) != m)
        throw SpecError("FinitePoints: inconsistent dimensions");
    ClosedSetOracle o;
    o.m = m;
    o.accuracy = 0.0;
    auto pts = fp.points;
    o.dist_fn = [pts](const Vec& x) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : pts) best = std::min(best, (x - p).norm());
      return best;
    };
    o.member_witnesses = fp.points;
    Vec lo = fp.points.front(), hi = fp.points.front();
    for (const auto& p : fp.points) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    o.bounding_hint = Box{lo, hi};
    Vec w = hi;
    w[0] += 1.0;
    o.exterior_witnesses.push_back(w);
    return o;
  }

  ClosedSetOracle operator()(const CantorProduct& cp) const {
    if (!(cp.ratio > 0.0 && cp.ratio < 0.5))
      throw SpecError("CantorProduct: ratio must be in (0, 1/2)");
    if (cp.depth < 1) throw SpecError("CantorProduct: depth must be >= 1");
    if (cp.axis < 0 || cp.axis >= cp.m)
      throw SpecError("CantorProduct: axis out of range");
    ClosedSetOracle o;
    o.m = cp.m;
    o.accuracy = std::pow(cp.ratio, cp.depth);
    double ratio = cp.ratio;
    int depth = cp.depth, axis = cp.axis, m = cp.m;
    o.dist_fn = [ratio, depth, axis, m](const Vec& x) {
      double d1 = cantor_distance_1d(x[axis], ratio, depth);
      double rest2 = 0.0;
      for (int i = 0; i < m; ++i)
        if (i != axis) rest2 += x[i] * x[i];
      return std::sqrt(d1 * d1 + rest2);
    };
    Vec lo = Vec::Zero(cp.m), hi = Vec::Zero(cp.m);
    hi[cp.axis] = 1.0;
    o.bounding_hint = Box{lo, hi};
    for (double t : {0.0, 1.0, cp.ratio, 1.0 - cp.ratio}) {
      Vec p = Vec::Zero(cp.m);
      p[cp.axis] = t;
      o.member_witnesses.push_back(p);
    }
    Vec w = Vec::Zero(cp.m);
    w[cp.axis] = 0.5;  // midpoint of the removed middle interval
    o.exterior_witnesses.push_back(w);
    return o;
  }

  ClosedSetOracle operator()(const BallComplementTruncated& bc) const {
    size_t nb = bc.centers.size();
    if (nb != bc.radii.size())
      throw SpecError("BallComplementTruncated: centers/radii size mismatch");
    for (size_t i = 0; i < nb; ++i) {
      if (!(bc.radii[i] > 0.0))
        throw SpecError("BallComplementTruncated: radii must be positive");
      for (size_t j = 0; j < i; ++j)
        if ((bc.centers[i] - bc.centers[j]).norm() < bc.radii[i] + bc.radii[j])
          throw SpecError("BallComplementTruncated: balls overlap");
    }
    ClosedSetOracle o;
    o.m = bc.m;
    o.accuracy = 0.0;
    auto centers = bc.centers;
    auto radii = bc.radii;
    // Disjoint open balls: inside ball i the nearest point of the
    // complement is on that ball's own sphere.
    o.dist_fn = [centers, radii](const Vec& x) {
      for (size_t i = 0; i < centers.size(); ++i) {
        double d = (x - centers[i]).norm();
        if (d < radii[i]) return radii[i] - d;
      }
      return 0.0;
    };
    for (size_t i = 0; i < nb && i < 4; ++i) {
      Vec w = bc.centers[i];
      w[0] += bc.radii[i];
      o.member_witnesses.push_back(w);  // sphere point
      o.exterior_witnesses.push_back(bc.centers[i]);
    }
    return o;
  }

  ClosedSetOracle operator()(const UnitDiskComplement& ud) const {
    if (ud.radius < 0.0) throw SpecError("UnitDiskComplement: negative radius");
    ClosedSetOracle o;
    o.m = ud.m;
    o.accuracy = 0.0;
    double R = ud.radius;
    o.dist_fn = [R](const Vec& x) { return std::max(0.0, R - x.norm()); };
    if (R > 0.0) {
      Vec w = Vec::Zero(ud.m);
      w[0] = R;
      o.member_witnesses.push_back(w);
      o.exterior_witnesses.push_back(Vec::Zero(ud.m));
    }
    return o;
  }

  ClosedSetOracle operator()(const Everything& ev) const {
    ClosedSetOracle o;
    o.m = ev.m;
    o.accuracy = 0.0;
    o.dist_fn = [](const Vec&) { return 0.0; };
    o.member_witnesses.push_back(Vec::Zero(ev.m));
    return o;
  }

  ClosedSetOracle operator()(const Union& u) const {
    if (u.parts.empty()) throw SpecError("Union: empty part list");
    auto oracles = std::make_shared<std::vector<ClosedSetOracle>>();
    for (const auto& part : u.parts) oracles->push_back(build_oracle(part));
    ClosedSetOracle o;
    o.m = oracles->front().m;
    for (const auto& po : *oracles) {
      if (po.m != o.m) throw SpecError("Union: inconsistent dimensions");
      o.accuracy = std::max(o.accuracy, po.accuracy);
      o.member_witnesses.insert(o.member_witnesses.end(),
                                po.member_witnesses.begin(),
                                po.member_witnesses.end());
    }
    o.dist_fn = [oracles](const Vec& x) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& po : *oracles) best = std::min(best, po.dist_fn(x));
      return best;
    };
    return o;
  }

  ClosedSetOracle operator()(const Inflation& inf) const {
    if (!(inf.threshold > 0.0)) throw SpecError("Inflation: threshold <= 0");
    auto base = std::make_shared<ClosedSetOracle>(build_oracle(*inf.base));
    ClosedSetOracle o;
    o.m = base->m;
    o.accuracy = base->accuracy;
    double t = inf.threshold;
    // Gauge min(d_K, max(0, t - d_K)): 1-Lipschitz, vanishes exactly on
    // E = K cup {d_K >= t}, and is a lower bound for dist(., E). It is the
    // exact distance wherever d_K < t/2 and whenever the t-balls around
    // distinct K components do not overlap.
    o.dist_fn = [base, t](const Vec& x) {
      double dk = base->dist_fn(x);
      return std::min(dk, std::max(0.0, t - dk));
    };
    // Complement of E is the band {0 < d_K < t}; d_K is 1-Lipschitz, so
    // d_K - t bounds the distance to it from the inflated part.
    o.interior_gauge = [base, t](const Vec& x) {
      return std::max(0.0, base->dist_fn(x) - t);
    };
    o.member_witnesses = base->member_witnesses;
    o.bounding_hint = base->bounding_hint;
    return o;
  }
};

}  // namespace

SetSpec clone(const SetSpec& spec) {
  return std::visit(
      [](const auto& v) -> SetSpec {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Inflation>) {
          Inflation copy;
          copy.base = std::make_unique<SetSpec>(clone(*v.base));
          copy.threshold = v.threshold;
          return SetSpec{std::move(copy)};
        } else if constexpr (std::is_same_v<T, Union>) {
          Union copy;
          for (const auto& part : v.parts) copy.parts.push_back(clone(part));
          return SetSpec{std::move(copy)};
        } else {
          return SetSpec{v};
        }
      },
      spec.variant);
}

double cantor_distance_1d(double t, double ratio, int depth) {
  double best = std::numeric_limits<double>::infinity();
  cantor_rec(t, 0.0, 1.0, ratio, depth, best);
  return best;
}

ClosedSetOracle build_oracle(const SetSpec& spec) {
  return std::visit(Builder{}, spec.variant);
}

SetSpec rational_truncation(double eps, int n_points, int m, double window) {
  if (!(eps > 0.0 && eps <= 1.0)) throw SpecError("rational_truncation: eps out of (0,1]");
  if (n_points < 1) throw SpecError("rational_truncation: N must be >= 1");
  BallComplementTruncated bc;
  bc.m = m;
  int emitted = 0;
  // Dyadic rationals a/2^j in [-window, window]^m, by increasing
  // denominator, then by sup-norm ring around the origin, then
  // lexicographic. A point is new at level j when at least one coordinate
  // has odd numerator (j > 0).
  for (int j = 0; emitted < n_points && j < 40; ++j) {
    double den = std::pow(2.0, j);
    long amax = static_cast<long>(std::floor(window * den));
    std::vector<std::vector<long>> fresh_pts;
    std::vector<long> idx(m, -amax);
    bool carry = false;
    while (!carry) {
      bool fresh = (j == 0);
      for (int d = 0; d < m && !fresh; ++d)
        if (idx[d] % 2 != 0) fresh = true;
      if (fresh) fresh_pts.push_back(idx);
      int d = m - 1;
      while (d >= 0) {
        if (++idx[d] <= amax) break;
        idx[d] = -amax;
        --d;
      }
      if (d < 0) carry = true;
    }
    std::stable_sort(fresh_pts.begin(), fresh_pts.end(),
                     [](const std::vector<long>& a, const std::vector<long>& b) {
                       long ra = 0, rb = 0;
                       for (long v : a) ra = std::max(ra, std::abs(v));
                       for (long v : b) rb = std::max(rb, std::abs(v));
                       return ra < rb;
                     });
    for (const auto& pt : fresh_pts) {
      if (emitted >= n_points) break;
      ++emitted;  // this is rational point number `emitted`
      Vec c(m);
      for (int d = 0; d < m; ++d) c[d] = static_cast<double>(pt[d]) / den;
      double r = eps * std::pow(2.0, -emitted);
      bool ok = true;
      for (size_t i = 0; i < bc.centers.size() && ok; ++i)
        if ((c - bc.centers[i]).norm() < r + bc.radii[i]) ok = false;
      if (ok) {
        bc.centers.push_back(c);
        bc.radii.push_back(r);
      }
    }
  }
  if (bc.centers.empty())
    throw SpecError("rational_truncation: no balls retained");
  return SetSpec{std::move(bc)};
}

namespace {

std::vector<double> parse_numbers(const std::string& s) {
  std::vector<double> out;
  std::string cleaned = s;
  for (char& c : cleaned)
    if (c == ',' || c == ';' || c == '(' || c == ')') c = ' ';
  std::istringstream iss(cleaned);
  double v;
  while (iss >> v) out.push_back(v);
  return out;
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream iss(text);
  std::string line;
  while (std::getline(iss, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
      if (!blank) throw ConfigError("set DSL: malformed line: " + line);
      continue;
    }
    auto trim = [](std::string s) {
      size_t a = s.find_first_not_of(" \t\r");
      size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (kv.count(key)) throw ConfigError("set DSL: duplicate key " + key);
    kv[key] = val;
  }
  return kv;
}

void require_keys(const std::map<std::string, std::string>& kv,
                  std::initializer_list<const char*> allowed) {
  for (const auto& [k, v] : kv) {
    bool ok = false;
    for (const char* a : allowed)
      if (k == a) ok = true;
    if (!ok) throw ConfigError("set DSL: unknown key " + k);
  }
}

double get_num(const std::map<std::string, std::string>& kv,
               const std::string& key, double fallback, bool required = false) {
  auto it = kv.find(key);
  if (it == kv.end()) {
    if (required) throw ConfigError("set DSL: missing key " + key);
    return fallback;
  }
  try {
    size_t pos = 0;
    double v = std::stod(it->second, &pos);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("set DSL: bad number for key " + key);
  }
}

}  // namespace

SetSpec parse_set_spec(const std::string& text) {
  auto kv = parse_kv(text);
  auto it = kv.find("type");
  if (it == kv.end()) throw ConfigError("set DSL: missing `type`");
  const std::string type = it->second;
  if (type == "finite_points") {
    require_keys(kv, {"type", "m", "points"});
    int m = static_cast<int>(get_num(kv, "m", 0, true));
    auto nums = parse_numbers(kv.at("points"));
    if (m < 1 || nums.empty() || nums.size() % m != 0)
      throw ConfigError("finite_points: bad point list");
    FinitePoints fp;
    for (size_t i = 0; i < nums.size(); i += m) {
      Vec p(m);
      for (int d = 0; d < m; ++d) p[d] = nums[i + d];
      fp.points.push_back(p);
    }
    return SetSpec{std::move(fp)};
  }
  if (type == "cantor_product") {
    require_keys(kv, {"type", "m", "ratio", "depth", "axis"});
    CantorProduct cp;
    cp.m = static_cast<int>(get_num(kv, "m", 1));
    cp.ratio = get_num(kv, "ratio", 1.0 / 3.0);
    cp.depth = static_cast<int>(get_num(kv, "depth", 16));
    cp.axis = static_cast<int>(get_num(kv, "axis", 0));
    return SetSpec{cp};
  }
  if (type == "ball_complement") {
    require_keys(kv, {"type", "m", "centers", "radii"});
    BallComplementTruncated bc;
    bc.m = static_cast<int>(get_num(kv, "m", 2));
    auto cs = parse_numbers(kv.at("centers"));
    auto rs = parse_numbers(kv.at("radii"));
    if (cs.size() != rs.size() * bc.m)
      throw ConfigError("ball_complement: centers/radii mismatch");
    for (size_t i = 0; i < rs.size(); ++i) {
      Vec c(bc.m);
      for (int d = 0; d < bc.m; ++d) c[d] = cs[i * bc.m + d];
      bc.centers.push_back(c);
      bc.radii.push_back(rs[i]);
    }
    return SetSpec{std::move(bc)};
  }
  if (type == "rational_truncation") {
    require_keys(kv, {"type", "m", "eps", "n", "window"});
    return rational_truncation(get_num(kv, "eps", 0, true),
                               static_cast<int>(get_num(kv, "n", 0, true)),
                               static_cast<int>(get_num(kv, "m", 2)),
                               get_num(kv, "window", 3.0));
  }
  if (type == "unit_disk_complement") {
    require_keys(kv, {"type", "m", "radius"});
    UnitDiskComplement ud;
    ud.m = static_cast<int>(get_num(kv, "m", 2));
    ud.radius = get_num(kv, "radius", 0.5);
    return SetSpec{ud};
  }
  if (type == "everything") {
    require_keys(kv, {"type", "m"});
    Everything ev;
    ev.m = static_cast<int>(get_num(kv, "m", 1));
    return SetSpec{ev};
  }
  if (type == "inflation") {
    // base given inline via base_type-prefixed keys is not supported;
    // inflation wraps a set file referenced by `base`.
    require_keys(kv, {"type", "base", "threshold"});
    auto bit = kv.find("base");
    if (bit == kv.end()) throw ConfigError("inflation: missing `base`");
    Inflation inf;
    inf.base = std::make_unique<SetSpec>(load_set_file(bit->second));
    inf.threshold = get_num(kv, "threshold", 1.0);
    return SetSpec{std::move(inf)};
  }
  throw ConfigError("set DSL: unknown type " + type);
}

SetSpec load_set_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open set file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_set_spec(ss.str());
}

}  // namespace almostmin::sets
