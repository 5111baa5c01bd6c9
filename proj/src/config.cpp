#include "delaykit/config.hpp"

#include "delaykit/error.hpp"
#include "delaykit/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace delaykit {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void key_error(std::string_view key, const std::string& what) {
  throw Error(ErrorKind::config, "key '" + std::string(key) + "': " + what);
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    const auto end = comma == std::string_view::npos ? value.size() : comma;
    out.push_back(trim(value.substr(start, end - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

long long parse_int(std::string_view key, const std::string& text) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) key_error(key, "'" + text + "' is not an integer");
  return v;
}

double parse_real(std::string_view key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    key_error(key, "'" + text + "' is not a number");
  }
}

int positive_int(std::string_view key, const std::string& text) {
  const long long v = parse_int(key, text);
  if (v < 1 || v > std::numeric_limits<int>::max()) key_error(key, "must be a positive integer, got " + text);
  return static_cast<int>(v);
}

std::vector<std::vector<double>> read_rows(const std::filesystem::path& path, std::string_view key) {
  std::ifstream in(path);
  if (!in) key_error(key, "cannot open '" + path.string() + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::vector<double> row;
    std::string token;
    while (ls >> token) row.push_back(parse_real(key, token));
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  std::map<std::string, std::string, std::less<>> values;
  ExperimentConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::config, "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw Error(ErrorKind::config, "line " + std::to_string(line_no) + ": empty key or value");
    }
    if (std::find(std::begin(kKnownKeys), std::end(kKnownKeys), key) == std::end(kKnownKeys)) {
      throw Error(ErrorKind::config, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (!values.emplace(key, value).second) {
      throw Error(ErrorKind::config, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    config.entries.emplace_back(key, value);
  }

  auto get = [&](std::string_view key) -> const std::string* {
    const auto it = values.find(key);
    return it == values.end() ? nullptr : &it->second;
  };
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };

  const std::string* kind = get("kind");
  if (kind == nullptr) key_error("kind", "missing (one of {shift, linear})");
  if (*kind == "shift") {
    config.kind = SystemKind::shift;
  } else if (*kind == "linear") {
    config.kind = SystemKind::linear;
  } else {
    key_error("kind", "must be one of {shift, linear}, got '" + *kind + "'");
  }

  const std::string* n = get("N");
  if (n == nullptr) key_error("N", "missing");
  config.ambient_dim = positive_int("N", *n);
  if (config.kind == SystemKind::shift && config.ambient_dim < 2) key_error("N", "shift systems need N >= 2");

  if (const auto* m = get("matrix")) {
    if (config.kind != SystemKind::linear) key_error("matrix", "only valid for kind = linear");
    config.matrix_path = resolve(*m);
    if (!std::filesystem::is_regular_file(config.matrix_path)) {
      key_error("matrix", "file '" + config.matrix_path.string() + "' not found");
    }
  } else if (config.kind == SystemKind::linear) {
    key_error("matrix", "required for kind = linear");
  }

  if (const auto* v = get("sampling_interval")) {
    config.sampling_interval = parse_real("sampling_interval", *v);
    if (!(config.sampling_interval > 0.0)) key_error("sampling_interval", "must be positive");
  }

  const int dim = config.ambient_dim;
  config.origin = StateVector::Zero(dim);
  config.origin(0) = 1.0;
  if (const auto* v = get("origin")) {
    if (v->size() > 1 && (*v)[0] == 'e') {
      const long long p = parse_int("origin", v->substr(1));
      if (p < 1 || p > dim) key_error("origin", "basis index outside 1..N");
      config.origin = StateVector::Zero(dim);
      config.origin(p - 1) = 1.0;
    } else {
      const auto parts = split_list(*v);
      if (static_cast<int>(parts.size()) != dim) {
        key_error("origin", "expected e<k> or " + std::to_string(dim) + " comma-separated values");
      }
      for (int k = 0; k < dim; ++k) config.origin(k) = parse_real("origin", parts[static_cast<std::size_t>(k)]);
    }
  }
  config.sample_count = dim;
  if (const auto* v = get("samples")) {
    config.sample_count = positive_int("samples", *v);
    if (config.sample_count < 2) key_error("samples", "need at least 2 samples");
  }
  if (const auto* v = get("states")) {
    config.states_path = resolve(*v);
    if (!std::filesystem::is_regular_file(config.states_path)) {
      key_error("states", "file '" + config.states_path.string() + "' not found");
    }
    if (get("origin") != nullptr || get("samples") != nullptr) {
      key_error("states", "cannot be combined with origin/samples");
    }
  }

  const std::string* delays = get("delays");
  if (delays == nullptr) key_error("delays", "missing");
  for (const auto& part : split_list(*delays)) {
    const long long m = parse_int("delays", part);
    if (m < 1 || m > std::numeric_limits<int>::max()) key_error("delays", "every M must be >= 1, got " + part);
    if (!config.delays.empty() && m <= config.delays.back()) key_error("delays", "list must be strictly ascending");
    config.delays.push_back(static_cast<int>(m));
  }

  if (const auto* v = get("ensemble")) {
    if (*v == "rademacher") {
      config.ensemble = Ensemble::rademacher;
    } else if (*v == "gaussian") {
      config.ensemble = Ensemble::gaussian;
    } else {
      key_error("ensemble", "must be one of {rademacher, gaussian}, got '" + *v + "'");
    }
  }
  if (const auto* v = get("draws")) config.draws = static_cast<std::size_t>(positive_int("draws", *v));
  if (const auto* v = get("seed")) {
    const long long s = parse_int("seed", *v);
    if (s < 0) key_error("seed", "must be non-negative");
    config.seed = static_cast<std::uint64_t>(s);
  }
  if (const auto* v = get("outputs")) config.outputs = resolve(*v);
  if (const auto* v = get("target_eps")) {
    config.target_eps.clear();
    for (const auto& part : split_list(*v)) {
      const double e = parse_real("target_eps", part);
      if (!(e >= 0.0)) key_error("target_eps", "values must be non-negative");
      config.target_eps.push_back(e);
    }
    if (!std::is_sorted(config.target_eps.begin(), config.target_eps.end())) {
      key_error("target_eps", "grid must be ascending");
    }
  }

  const auto* tc = get("theorem_c");
  const auto* td = get("theorem_dim");
  const auto* te = get("theorem_eps");
  if (tc != nullptr || td != nullptr || te != nullptr) {
    if (tc == nullptr) key_error("theorem_c", "required when theorem constants are given (never defaulted)");
    TheoremConstants t;
    t.c_user = parse_real("theorem_c", *tc);
    if (!(t.c_user > 0.0)) key_error("theorem_c", "must be positive");
    if (td != nullptr) {
      t.dim = parse_real("theorem_dim", *td);
      if (!(t.dim > 0.0)) key_error("theorem_dim", "must be positive");
    }
    if (te != nullptr) {
      t.epsilon = parse_real("theorem_eps", *te);
      if (!(*t.epsilon > 0.0)) key_error("theorem_eps", "must be positive");
    }
    config.theorem = t;
  }

  if (const auto* v = get("mi_bins")) {
    config.mi_bins = positive_int("mi_bins", *v);
    if (config.mi_bins < 2) key_error("mi_bins", "must be >= 2");
  }
  if (const auto* v = get("lyapunov_steps")) {
    config.lyapunov_steps = positive_int("lyapunov_steps", *v);
    if (config.lyapunov_steps < 10) key_error("lyapunov_steps", "must be >= 10");
  }
  if (const auto* v = get("lyapunov_perturbation")) {
    config.lyapunov_perturbation = parse_real("lyapunov_perturbation", *v);
    if (!(config.lyapunov_perturbation > 0.0)) key_error("lyapunov_perturbation", "must be positive");
  }
  if (const auto* v = get("series_length")) {
    config.series_length = positive_int("series_length", *v);
    if (config.series_length < 8) key_error("series_length", "must be >= 8");
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config, "cannot open config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path().empty() ? "." : path.parent_path());
}

FlowSpec build_flow(const ExperimentConfig& config) {
  if (config.kind == SystemKind::shift) return FlowSpec::shift(config.ambient_dim, config.sampling_interval);
  const auto rows = read_rows(config.matrix_path, "matrix");
  const int n = config.ambient_dim;
  if (static_cast<int>(rows.size()) != n) {
    key_error("matrix", "expected " + std::to_string(n) + " rows, found " + std::to_string(rows.size()));
  }
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != n) {
      key_error("matrix", "row " + std::to_string(i + 1) + " does not have N entries");
    }
    for (int j = 0; j < n; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return FlowSpec::linear(m, config.sampling_interval);
}

SampleSet build_samples(const ExperimentConfig& config, const FlowSpec& flow) {
  SampleSet out;
  if (!config.states_path.empty()) {
    for (const auto& row : read_rows(config.states_path, "states")) {
      if (static_cast<int>(row.size()) != flow.ambient_dim()) {
        key_error("states", "every state needs N entries");
      }
      out.states.push_back(Eigen::Map<const Eigen::VectorXd>(row.data(), static_cast<Eigen::Index>(row.size())));
    }
    if (out.states.size() < 2) key_error("states", "need at least 2 states");
    return out;
  }
  AttractorSample sample = sample_attractor(flow, config.origin, config.sample_count);
  out.states = std::move(sample.states);
  out.period = sample.period;
  return out;
}

}  // namespace delaykit
