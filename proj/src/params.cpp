#include "pace/params.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pace {

void SystemParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string("SystemParams: ") + name + " must be positive and finite");
    }
  };
  positive(lambda0, "lambda0");
  positive(B0, "B0");
  positive(v0, "v0");
  positive(xi0, "xi0");
  positive(t0, "t0");
  positive(P0, "P0");
  if (M < 1) throw std::invalid_argument("SystemParams: M must be >= 1");
  if (N < 1) throw std::invalid_argument("SystemParams: N must be >= 1");
  if (xi0 < 2.0) throw std::invalid_argument("SystemParams: xi0 must be >= 2");
  if (L0 < 1) throw std::invalid_argument("SystemParams: L0 must be >= 1");
  if (static_cast<double>(L0) > xi0) {
    throw std::invalid_argument("SystemParams: L0 must not exceed xi0 (channel coherence constraint)");
  }
}

std::vector<std::string> SystemParams::warnings() const {
  std::vector<std::string> w;
  if (xi0 < 10.0) {
    w.push_back("xi0 = " + std::to_string(xi0) +
                " is below 10; the block-constant channel approximation weakens");
  }
  return w;
}

long long floor_guard(double x) {
  return static_cast<long long>(std::floor(x + 1e-9 * std::max(1.0, std::abs(x))));
}

int block_length(const SystemParams& params) {
  params.validate();
  long long t0 = floor_guard(params.block_length_exact());
  if (t0 < 2) {
    throw std::invalid_argument(
        "block length T0 = " + std::to_string(t0) + " < 2: terminal speed v0 = " +
        std::to_string(params.v0) + " m/s is too high for lambda0*B0/(2*xi0)");
  }
  return static_cast<int>(t0);
}

int max_group_size(const SystemParams& params) {
  params.validate();
  long long me = floor_guard(2.0 * params.v0 * params.t0 / params.lambda0 + 1.0);
  return static_cast<int>(std::max(me, 1LL));
}

GroupLayout group_layout(int M, const SystemParams& params) {
  return group_layout(M, params, max_group_size(params));
}

GroupLayout group_layout(int M, const SystemParams& params, int Me) {
  if (M < 1) throw std::invalid_argument("group_layout: M must be >= 1");
  int bound = max_group_size(params);
  if (Me < 1 || Me > bound) {
    throw std::invalid_argument("group_layout: Me = " + std::to_string(Me) +
                                " outside [1, " + std::to_string(bound) + "]");
  }
  GroupLayout layout;
  layout.Me = Me;
  layout.Mg = (M + Me - 1) / Me;
  layout.padded_columns = layout.Me * layout.Mg - M;
  return layout;
}

std::optional<int> anchor_block_index(int k, int j, const SystemParams& params, bool exact_t0) {
  if (k < 1) throw std::invalid_argument("anchor_block_index: k must be >= 1");
  if (j < 2) throw std::invalid_argument("anchor_block_index: j must be >= 2");
  double steps;
  if (exact_t0) {
    steps = (j - 1) * params.xi0;  // (j-1) lambda0 B0 / (2 v0 T0) with T0 un-floored
  } else {
    steps = (j - 1) * params.lambda0 * params.B0 / (2.0 * params.v0 * block_length(params));
  }
  long long k0 = floor_guard(static_cast<double>(k) - steps);
  if (k0 < 1) return std::nullopt;
  return static_cast<int>(k0);
}

double block_advance(const SystemParams& params) {
  return params.v0 * block_length(params) / params.B0;
}

double column_position(const SystemParams& params, int k, int m) {
  return (k - 1) * block_advance(params) - (m - 1) * params.lambda0 / 2.0;
}

int epoch_of_block(const SystemParams& params, int k) {
  double t = (k - 1) * (static_cast<double>(block_length(params)) / params.B0);
  return static_cast<int>(floor_guard(t / params.t0));
}

// ---------------------------------------------------------------------------
// Configuration file
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key or value");
    }
    out[key] = value;
  }
  return out;
}

ConfigMap load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config file: " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_config_text(buf.str());
}

SystemParams params_from_config(const ConfigMap& config) {
  SystemParams p;
  auto get_double = [&](const char* key, double& dst) {
    auto it = config.find(key);
    if (it == config.end()) return;
    try {
      std::size_t pos = 0;
      dst = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing junk");
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("config key '") + key + "': bad numeric value '" + it->second + "'");
    }
  };
  auto get_int = [&](const char* key, int& dst) {
    double v = dst;
    get_double(key, v);
    dst = static_cast<int>(v);
    if (static_cast<double>(dst) != v) {
      throw std::invalid_argument(std::string("config key '") + key + "': integer required");
    }
  };
  get_double("lambda0", p.lambda0);
  get_double("B0", p.B0);
  get_double("v0", p.v0);
  get_double("xi0", p.xi0);
  get_double("t0", p.t0);
  get_double("P0", p.P0);
  get_int("M", p.M);
  get_int("N", p.N);
  get_int("L0", p.L0);
  p.validate();
  return p;
}

}  // namespace pace
