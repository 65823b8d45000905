#include "bundleflow/config.hpp"

#include <cctype>
#include <sstream>
#include <stdexcept>

#include "bundleflow/csvio.hpp"
#include "json.hpp"

namespace bundleflow {

namespace {

double parse_double(const std::string& key, const std::string& v) {
  size_t pos = 0;
  double d;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': not a number: " + v);
  }
  if (pos != v.size())
    throw std::invalid_argument("config key '" + key + "': not a number: " + v);
  return d;
}

long long parse_int(const std::string& key, const std::string& v) {
  size_t pos = 0;
  long long i;
  try {
    i = std::stoll(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': not an integer: " + v);
  }
  if (pos != v.size())
    throw std::invalid_argument("config key '" + key + "': not an integer: " + v);
  return i;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config key '" + key + "': not a boolean: " + v);
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string strip_quotes(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value,
                    const std::string& source) {
  if (key == "manifold") {
    if (value != "torus2" && value != "sphere2")
      throw std::invalid_argument("config key 'manifold': expected torus2 or sphere2");
    manifold = value;
  } else if (key == "nu") {
    nu = parse_double(key, value);
    if (!(nu > 0)) throw std::invalid_argument("config key 'nu': must be positive");
  } else if (key == "T") {
    T = parse_double(key, value);
    if (!(T > 0)) throw std::invalid_argument("config key 'T': must be positive");
  } else if (key == "modes") {
    modes = int(parse_int(key, value));
    if (modes < 0) throw std::invalid_argument("config key 'modes': must be >= 0");
  } else if (key == "paths") {
    long long v = parse_int(key, value);
    if (v < 1) throw std::invalid_argument("config key 'paths': must be positive");
    paths = int(v);
  } else if (key == "mc_dt") {
    mc_dt = parse_double(key, value);
    if (!(mc_dt > 0)) throw std::invalid_argument("config key 'mc_dt': must be positive");
  } else if (key == "seed") {
    long long v = parse_int(key, value);
    if (v < 0) throw std::invalid_argument("config key 'seed': must be >= 0");
    seed = uint64_t(v);
  } else if (key == "workers") {
    long long v = parse_int(key, value);
    if (v < 1) throw std::invalid_argument("config key 'workers': must be positive");
    workers = int(v);
  } else if (key == "time_nodes") {
    long long v = parse_int(key, value);
    if (v < 2) throw std::invalid_argument("config key 'time_nodes': must be >= 2");
    time_nodes = int(v);
  } else if (key == "picard_iters") {
    long long v = parse_int(key, value);
    if (v < 1) throw std::invalid_argument("config key 'picard_iters': must be positive");
    picard_iters = int(v);
  } else if (key == "picard_tol") {
    picard_tol = parse_double(key, value);
    if (!(picard_tol > 0))
      throw std::invalid_argument("config key 'picard_tol': must be positive");
  } else if (key == "p") {
    p = parse_double(key, value);
    if (!(p > 2))
      throw std::invalid_argument("config key 'p': must exceed 2");
  } else if (key == "laplacian") {
    if (value != "bochner" && value != "hodge")
      throw std::invalid_argument("config key 'laplacian': expected bochner or hodge");
    laplacian = value;
  } else if (key == "out_dir") {
    out_dir = value;
  } else if (key == "compare_reference") {
    compare_reference = parse_bool(key, value);
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
  provenance[key] = source;
}

void RunConfig::validate() const {
  // Individual setters validate values; cross-field checks live here.
  if (manifold != "torus2" && manifold != "sphere2")
    throw std::invalid_argument("config: bad manifold");
}

void load_config_file(RunConfig& cfg, const std::string& path) {
  std::string text = read_text_file(path);
  std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::invalid_argument(std::string("config JSON parse error: ") +
                                  e.what());
    }
    if (!j.is_object())
      throw std::invalid_argument("config JSON must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      std::string v;
      if (it.value().is_string())
        v = it.value().get<std::string>();
      else
        v = it.value().dump();
      cfg.set(it.key(), v, "file");
    }
    return;
  }
  // Flat key = value lines; '#' starts a comment.
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string value = strip_quotes(trim(s.substr(eq + 1)));
    cfg.set(key, value, "file");
  }
}

}  // namespace bundleflow
