#include "geowalk/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace geowalk {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string qualified(const std::string& section, const std::string& key) { return section + "." + key; }

std::vector<double> parse_vector(std::string_view text, std::string_view field) {
  std::vector<double> values;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    const auto token = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
    double v = 0.0;
    const auto* last = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), last, v);
    if (ec != std::errc() || ptr != last) {
      throw InvalidParams(std::string(field) + ": bad number '" + std::string(token) + "'");
    }
    values.push_back(v);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return values;
}

}  // namespace

ConfigFile ConfigFile::parse(std::string_view text) {
  ConfigFile file;
  file.text_ = std::string(text);
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view raw = text.substr(pos, end == std::string_view::npos ? text.npos : end - pos);
    pos = (end == std::string_view::npos) ? text.size() + 1 : end + 1;
    ++line_no;

    const auto comment = raw.find_first_of("#;");
    const std::string line = trim(raw.substr(0, comment));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) throw ConfigError("malformed section header", line_no);
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
    if (section.empty()) throw ConfigError("key outside of any [section]", line_no);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line_no);
    auto& entries = file.sections_[section];
    if (entries.count(key)) throw ConfigError("duplicate key '" + qualified(section, key) + "'", line_no);
    entries[key] = Entry{value, line_no};
  }
  return file;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

const ConfigFile::Entry* ConfigFile::find(const std::string& section, const std::string& key) const {
  used_[qualified(section, key)] = true;
  const auto s = sections_.find(section);
  if (s == sections_.end()) return nullptr;
  const auto e = s->second.find(key);
  return e == s->second.end() ? nullptr : &e->second;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   std::optional<std::string> fallback) const {
  if (const auto* e = find(section, key)) return e->value;
  if (fallback) return *fallback;
  throw ConfigError("missing required field '" + qualified(section, key) + "'");
}

double ConfigFile::get_real(const std::string& section, const std::string& key,
                            std::optional<double> fallback) const {
  const auto* e = find(section, key);
  if (!e) {
    if (fallback) return *fallback;
    throw ConfigError("missing required field '" + qualified(section, key) + "'");
  }
  double v = 0.0;
  const auto* last = e->value.data() + e->value.size();
  const auto [ptr, ec] = std::from_chars(e->value.data(), last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ConfigError("field '" + qualified(section, key) + "': expected a real number, got '" + e->value + "'",
                      e->line);
  }
  return v;
}

long ConfigFile::get_int(const std::string& section, const std::string& key,
                         std::optional<long> fallback) const {
  const auto* e = find(section, key);
  if (!e) {
    if (fallback) return *fallback;
    throw ConfigError("missing required field '" + qualified(section, key) + "'");
  }
  long v = 0;
  const auto* last = e->value.data() + e->value.size();
  const auto [ptr, ec] = std::from_chars(e->value.data(), last, v);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("field '" + qualified(section, key) + "': expected an integer, got '" + e->value + "'",
                      e->line);
  }
  return v;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const auto* e = find(section, key);
  if (!e) return fallback;
  std::string v = e->value;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError("field '" + qualified(section, key) + "': expected true/false, got '" + e->value + "'",
                    e->line);
}

std::vector<std::string> ConfigFile::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [section, entries] : sections_) {
    for (const auto& [key, entry] : entries) {
      if (!used_.count(qualified(section, key))) out.push_back(qualified(section, key));
    }
  }
  return out;
}

BuiltinTarget parse_target(const ConvexBody& body, std::string_view spec) {
  const Manifold& m = body.manifold();
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw InvalidParams("target: expected '<name>:<arg>', got '" + std::string(spec) + "'");
  }
  const auto name = spec.substr(0, colon);
  const auto arg = spec.substr(colon + 1);
  BuiltinTarget target;
  target.name = std::string(spec);
  if (name == "distance_to" || name == "sqdist_to") {
    const ManifoldPoint p = parse_point(m, arg);
    const bool squared = name == "sqdist_to";
    target.f = [m, p, squared](const ManifoldPoint& x) {
      const double d = m.distance(p, x);
      return squared ? d * d : d;
    };
    target.lipschitz = squared ? body.metadata().diameter : 1.0;
    if (body.contains(p)) target.min_value = 0.0;
    return target;
  }
  if (name == "linear") {
    if (m.kind() != ManifoldKind::Euclidean) throw InvalidParams("target: linear requires euclidean space");
    const auto values = parse_vector(arg, "linear target");
    if (static_cast<int>(values.size()) != m.ambient_dim()) {
      throw InvalidParams("target: linear needs " + std::to_string(m.ambient_dim()) + " coefficients");
    }
    const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(values.data(), m.ambient_dim());
    target.f = [c](const ManifoldPoint& x) { return c.dot(x.coords); };
    target.lipschitz = std::max(c.norm(), 1e-12);
    if (body.kind() == BodyKind::EuclideanBox) {
      double min_value = 0.0;
      for (int i = 0; i < c.size(); ++i) {
        min_value += c[i] >= 0.0 ? c[i] * body.box_lo()[i] : c[i] * body.box_hi()[i];
      }
      target.min_value = min_value;
    }
    return target;
  }
  throw InvalidParams("target: unknown target '" + std::string(name) + "'");
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[hash & 0xf];
    hash >>= 4;
  }
  return out;
}

std::string list_builtins() {
  return "manifolds:\n"
         "  euclidean:<n>   R^n\n"
         "  sphere:<n>      unit sphere S^n in R^(n+1)\n"
         "  so:<n>          rotation group SO(n), metric tr(A^T B)\n"
         "points:\n"
         "  x1,x2,...       ambient coordinates (normalized on spheres)\n"
         "  north | identity | origin | e<k>\n"
         "bodies:\n"
         "  cap:<axis>:<theta>      spherical cap, theta in (0, pi/2]\n"
         "  ball:<center>:<rho>     geodesic ball, rho < injectivity radius / 2\n"
         "  box:<lo...>:<hi...>     axis-aligned box (scalars broadcast)\n"
         "targets:\n"
         "  distance_to:<point>     f = d(point, x), L = 1\n"
         "  sqdist_to:<point>       f = d(point, x)^2, L = D\n"
         "  linear:<vector>         f = <c, x>, euclidean only\n"
         "checks:\n"
         "  numerical               affine needle inequality (quadrature)\n"
         "  rn_kv                   Gibbs mean needle inequality (quadrature)\n"
         "  z_logconcavity          partition function needle inequality (quadrature)\n"
         "  rev_iso                 boundary volume of the high-conductance set\n"
         "  isoperimetry            three-set isoperimetric inequality\n"
         "  one_step                one-step overlap of nearby kernels\n"
         "  adjacent_dist           L2 warmness of adjacent temperatures\n"
         "  low_temperature_expectation   Gibbs mean at low temperature\n"
         "  tv_decay                KS decay of the walk from a point mass\n";
}

}  // namespace geowalk
