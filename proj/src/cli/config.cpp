#include "pfedsop/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "pfedsop/error.hpp"

namespace pfedsop::cli {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string quote(std::string_view v) { return "'" + std::string(v) + "'"; }

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(std::string(key), "expected a finite number, got " + quote(v));
  }
  return out;
}

template <typename Int>
Int to_integer(std::string_view key, std::string_view v) {
  Int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(std::string(key), "expected a non-negative integer, got " + quote(v));
  }
  return out;
}

std::string from_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct KeyHandler {
  std::string_view key;
  void (*set)(ExperimentConfig&, std::string_view key, std::string_view value);
  std::string (*get)(const ExperimentConfig&);
};

#define SIZE_FIELD(name, field)                                                             \
  KeyHandler {                                                                              \
    name,                                                                                   \
        [](ExperimentConfig& c, std::string_view k, std::string_view v) {                  \
          c.field = to_integer<std::size_t>(k, v);                                          \
        },                                                                                  \
        [](const ExperimentConfig& c) { return std::to_string(c.field); }                  \
  }
#define DOUBLE_FIELD(name, field)                                                           \
  KeyHandler {                                                                              \
    name,                                                                                   \
        [](ExperimentConfig& c, std::string_view k, std::string_view v) {                  \
          c.field = to_double(k, v);                                                        \
        },                                                                                  \
        [](const ExperimentConfig& c) { return from_double(c.field); }                     \
  }

const std::vector<KeyHandler>& handlers() {
  static const std::vector<KeyHandler> table = {
      {"method",
       [](ExperimentConfig& c, std::string_view, std::string_view v) {
         c.hyper.method = fedcore::method_from_string(v);
       },
       [](const ExperimentConfig& c) { return std::string(fedcore::to_string(c.hyper.method)); }},
      {"dataset",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         if (v == "synthetic") {
           c.dataset.kind = DatasetKind::kSynthetic;
         } else if (v == "csv") {
           c.dataset.kind = DatasetKind::kCsv;
         } else {
           throw ConfigError(std::string(k), "expected 'synthetic' or 'csv', got " + quote(v));
         }
       },
       [](const ExperimentConfig& c) {
         return std::string(c.dataset.kind == DatasetKind::kCsv ? "csv" : "synthetic");
       }},
      {"dataset.path",
       [](ExperimentConfig& c, std::string_view, std::string_view v) { c.dataset.path = v; },
       [](const ExperimentConfig& c) { return c.dataset.path; }},
      SIZE_FIELD("dataset.num_classes", dataset.num_classes),
      SIZE_FIELD("dataset.input_dim", dataset.input_dim),
      SIZE_FIELD("dataset.samples_per_class", dataset.samples_per_class),
      DOUBLE_FIELD("dataset.separation", dataset.separation),
      {"partition",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         if (v == "dirichlet") {
           c.partition.kind = PartitionKind::kDirichlet;
         } else if (v == "pathological") {
           c.partition.kind = PartitionKind::kPathological;
         } else {
           throw ConfigError(std::string(k),
                             "expected 'dirichlet' or 'pathological', got " + quote(v));
         }
       },
       [](const ExperimentConfig& c) {
         return std::string(c.partition.kind == PartitionKind::kPathological ? "pathological"
                                                                              : "dirichlet");
       }},
      DOUBLE_FIELD("partition.alpha", partition.alpha),
      SIZE_FIELD("partition.shard_size", partition.shard_size),
      SIZE_FIELD("partition.shards_per_client", partition.shards_per_client),
      SIZE_FIELD("clients", clients),
      DOUBLE_FIELD("participation_fraction", hyper.participation_fraction),
      SIZE_FIELD("rounds", hyper.rounds),
      {"model",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         try {
           c.model.kind = models::model_kind_from_string(v);
         } catch (const ParameterError& e) {
           throw ConfigError(std::string(k), e.what());
         }
       },
       [](const ExperimentConfig& c) { return std::string(models::to_string(c.model.kind)); }},
      SIZE_FIELD("model.hidden_dim", model.hidden_dim),
      DOUBLE_FIELD("eta1", hyper.eta1),
      DOUBLE_FIELD("eta2", hyper.eta2),
      DOUBLE_FIELD("rho", hyper.rho),
      DOUBLE_FIELD("lambda", hyper.lambda),
      DOUBLE_FIELD("mu", hyper.mu),
      SIZE_FIELD("ft_epochs", hyper.ft_epochs),
      SIZE_FIELD("batch_size", hyper.batch_size),
      SIZE_FIELD("local_epochs", hyper.local_epochs),
      {"eval_point",
       [](ExperimentConfig& c, std::string_view, std::string_view v) {
         c.hyper.eval_point = fedcore::eval_point_from_string(v);
       },
       [](const ExperimentConfig& c) { return std::string(fedcore::to_string(c.hyper.eval_point)); }},
      {"seed",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         c.hyper.seed = to_integer<std::uint64_t>(k, v);
       },
       [](const ExperimentConfig& c) { return std::to_string(c.hyper.seed); }},
      {"output_dir",
       [](ExperimentConfig& c, std::string_view, std::string_view v) { c.output_dir = v; },
       [](const ExperimentConfig& c) { return c.output_dir; }},
  };
  return table;
}

#undef SIZE_FIELD
#undef DOUBLE_FIELD

const KeyHandler* find_handler(std::string_view key) {
  for (const auto& h : handlers()) {
    if (h.key == key) return &h;
  }
  return nullptr;
}

ExperimentConfig defaults() {
  ExperimentConfig c;
  c.hyper.eta1 = 1.0;
  c.hyper.eta2 = 0.05;
  c.hyper.rho = 1.0;
  c.hyper.lambda = 1.0;
  c.hyper.mu = 0.1;
  c.hyper.batch_size = 50;
  c.hyper.local_epochs = 1;
  c.hyper.participation_fraction = 0.2;
  c.hyper.ft_epochs = 1;
  c.hyper.eval_point = fedcore::EvalPoint::kPersonalized;
  return c;
}

}  // namespace

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

std::string env_var_for(std::string_view key) {
  std::string name = "PFEDSOP_CFG_";
  for (char ch : key) {
    name += ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  }
  return name;
}

const std::vector<std::string_view>& config_keys() {
  static const std::vector<std::string_view> keys = [] {
    std::vector<std::string_view> out;
    for (const auto& h : handlers()) out.push_back(h.key);
    return out;
  }();
  return keys;
}

void validate(const ExperimentConfig& c) {
  fedcore::validate(c.hyper);
  if (c.clients < 1) throw ConfigError("clients", "must be >= 1");
  if (c.hyper.rounds < 1) throw ConfigError("rounds", "must be >= 1");
  const auto selected =
      std::llround(c.hyper.participation_fraction * static_cast<double>(c.clients));
  if (selected < 1) {
    throw ConfigError("participation_fraction", "selects no clients out of " +
                                                    std::to_string(c.clients));
  }
  if (c.dataset.kind == DatasetKind::kCsv && c.dataset.path.empty()) {
    throw ConfigError("dataset.path", "required when dataset = csv");
  }
  if (c.dataset.kind == DatasetKind::kSynthetic) {
    if (c.dataset.num_classes < 2) throw ConfigError("dataset.num_classes", "must be >= 2");
    if (c.dataset.input_dim < 1) throw ConfigError("dataset.input_dim", "must be >= 1");
    if (c.dataset.samples_per_class < 1) {
      throw ConfigError("dataset.samples_per_class", "must be >= 1");
    }
    if (c.dataset.separation < 0.0) throw ConfigError("dataset.separation", "must be >= 0");
  }
  if (c.partition.kind == PartitionKind::kDirichlet && !(c.partition.alpha > 0.0)) {
    throw ConfigError("partition.alpha", "must be > 0");
  }
  if (c.partition.kind == PartitionKind::kPathological && c.partition.shards_per_client < 1) {
    throw ConfigError("partition.shards_per_client", "must be >= 1");
  }
  if (c.model.kind == models::ModelKind::kMlp && c.model.hidden_dim < 1) {
    throw ConfigError("model.hidden_dim", "must be >= 1");
  }
  if (c.output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
}

ExperimentConfig parse_config(std::string_view text, const EnvLookup& env) {
  ExperimentConfig config = defaults();
  std::set<std::string, std::less<>> seen;

  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const KeyHandler* handler = find_handler(key);
    if (!handler) throw ConfigError(std::string(key), "unknown key");
    if (!seen.insert(std::string(key)).second) throw ConfigError(std::string(key), "duplicate key");
    handler->set(config, key, value);
  }

  if (env) {
    for (const auto& h : handlers()) {
      if (auto value = env(env_var_for(h.key))) {
        h.set(config, h.key, trim(*value));
        seen.insert(std::string(h.key));
      }
    }
  }

  for (std::string_view required : {"method", "dataset", "clients", "rounds"}) {
    if (!seen.contains(required)) throw ConfigError(std::string(required), "missing required key");
  }
  validate(config);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path, const EnvLookup& env) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), env);
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& h : handlers()) {
    out += h.key;
    out += " = ";
    out += h.get(config);
    out += '\n';
  }
  return out;
}

}  // namespace pfedsop::cli
