#include "hemorom/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "hemorom/errors.hpp"

namespace hemorom {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool digits_only(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(),
                                   [](unsigned char c) { return std::isdigit(c); });
}

}  // namespace

const std::vector<std::string>& Config::known_keys() {
  static const std::vector<std::string> keys = {
      "mesh.nx", "mesh.ny", "mesh.length", "mesh.radius", "mesh.n_outlets",
      "fluid.nu",
      "time.t0", "time.T", "time.dt", "time.stride",
      "fom.n_piso", "fom.lin_tol",
      "inlet.u0",
      "wk.rp", "wk.rd", "wk.c", "wk.pd", "wk.analytic_decaying_exponential",
      "lifting.outlet_neumann_value",
      "pod.delta",
      "rom.n_modes", "rom.stabilization", "rom.supremizer", "rom.substeps",
      "nn.preset", "nn.hidden_layers", "nn.neurons", "nn.epochs",
      "nn.learning_rate", "nn.train_fraction", "nn.seed", "nn.per_outlet",
      "paths.database", "paths.bundle", "paths.report",
  };
  return keys;
}

void Config::validate() const {
  const auto& known = known_keys();
  for (const auto& [key, value] : kv_) {
    (void)value;
    if (std::find(known.begin(), known.end(), key) != known.end()) continue;
    // Per-outlet Windkessel blocks: wk.<index>.<param>
    if (key.rfind("wk.", 0) == 0) {
      size_t second = key.find('.', 3);
      if (second != std::string::npos && digits_only(key.substr(3, second - 3))) {
        std::string tail = key.substr(second + 1);
        if (tail == "rp" || tail == "rd" || tail == "c" || tail == "pd") continue;
      }
    }
    throw ConfigError("unknown config key: " + key);
  }
}

Config Config::from_string(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": empty key or value");
    if (c.kv_.count(key))
      throw ConfigError("duplicate config key: " + key);
    c.kv_[key] = value;
  }
  c.validate();
  return c;
}

Config Config::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str());
}

std::string Config::str(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("missing config key: " + key);
  return it->second;
}

std::string Config::str_or(const std::string& key, const std::string& def) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? def : it->second;
}

double Config::number(const std::string& key) const {
  const std::string v = str(key);
  try {
    size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": not a number: " + v);
  }
}

double Config::number_or(const std::string& key, double def) const {
  return has(key) ? number(key) : def;
}

int Config::integer(const std::string& key) const {
  double x = number(key);
  int i = static_cast<int>(x);
  if (static_cast<double>(i) != x)
    throw ConfigError("config key " + key + ": not an integer");
  return i;
}

int Config::integer_or(const std::string& key, int def) const {
  return has(key) ? integer(key) : def;
}

bool Config::flag_or(const std::string& key, bool def) const {
  if (!has(key)) return def;
  std::string v = str(key);
  std::transform(v.begin(), v.end(), v.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key " + key + ": not a boolean: " + v);
}

}  // namespace hemorom
