#include "btrf/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

namespace btrf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

template <typename T>
T parse_integer(const std::string& key, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": expected an integer, got '" + text + "'");
  return value;
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

struct Entry {
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

#define BTRF_INT(KEY, FIELD)                                                              \
  Entry{KEY, [](const RunConfig& c) { return std::to_string(c.FIELD); },                 \
        [](RunConfig& c, const std::string& k, const std::string& v) {                    \
          c.FIELD = parse_integer<std::remove_cvref_t<decltype(c.FIELD)>>(k, v);          \
        }}
#define BTRF_DOUBLE(KEY, FIELD)                                                           \
  Entry{KEY, [](const RunConfig& c) { return format_double(c.FIELD); },                  \
        [](RunConfig& c, const std::string& k, const std::string& v) { c.FIELD = parse_double(k, v); }}
#define BTRF_STRING(KEY, FIELD)                                                           \
  Entry{KEY, [](const RunConfig& c) { return c.FIELD; },                                 \
        [](RunConfig& c, const std::string&, const std::string& v) { c.FIELD = v; }}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      Entry{"mode", [](const RunConfig& c) { return c.mode == ForestMode::IndoorRgbd ? "indoor" : "outdoor"; },
            [](RunConfig& c, const std::string& k, const std::string& v) {
              if (v == "indoor") c.mode = ForestMode::IndoorRgbd;
              else if (v == "outdoor") c.mode = ForestMode::OutdoorRgb;
              else throw ConfigError(k + ": expected indoor or outdoor, got '" + v + "'");
            }},
      BTRF_STRING("dataset", dataset),
      BTRF_STRING("model", model),
      BTRF_STRING("output_dir", output_dir),
      Entry{"report_format", [](const RunConfig& c) { return std::string(to_string(c.report_format)); },
            [](RunConfig& c, const std::string& k, const std::string& v) {
              try {
                c.report_format = parse_report_format(v);
              } catch (const InvalidInput& e) {
                throw ConfigError(k + ": " + e.what());
              }
            }},

      BTRF_INT("forest.tree_count", forest.tree_count),
      BTRF_INT("forest.max_depth", forest.max_depth),
      BTRF_INT("forest.balanced_depth_limit", forest.balanced_depth_limit),
      BTRF_INT("forest.min_leaf_samples", forest.min_leaf_samples),
      BTRF_INT("forest.candidates_per_node", forest.candidates_per_node),
      BTRF_INT("forest.thresholds_per_candidate", forest.thresholds_per_candidate),
      Entry{"forest.max_backtrack_leaves",
            [](const RunConfig& c) { return std::to_string(c.forest.max_backtrack_leaves); },
            [](RunConfig& c, const std::string& k, const std::string& v) {
              c.forest.max_backtrack_leaves = parse_integer<int>(k, v);
              c.query.max_backtrack_leaves = c.forest.max_backtrack_leaves;
            }},
      BTRF_INT("forest.seed", forest.rng_seed),
      BTRF_DOUBLE("forest.offset_range", forest.offset_range),

      BTRF_INT("train.images_per_tree_indoor", images_per_tree_indoor),
      BTRF_INT("train.images_per_tree_outdoor", images_per_tree_outdoor),
      BTRF_INT("train.pixels_per_image", pixels_per_image),

      BTRF_INT("query.pixels", query.query_pixels),
      BTRF_DOUBLE("query.max_descriptor_distance", query.max_descriptor_distance),
      BTRF_INT("query.seed", query.seed),

      BTRF_INT("ransac.hypotheses", query.ransac.hypothesis_count),
      BTRF_INT("ransac.block_size", query.ransac.block_size),
      BTRF_DOUBLE("ransac.inlier_threshold_3d", query.ransac.inlier_threshold_3d),
      BTRF_DOUBLE("ransac.inlier_threshold_2d", query.ransac.inlier_threshold_2d),
      BTRF_INT("ransac.min_inliers_3d", query.ransac.min_final_inliers_3d),
      BTRF_INT("ransac.min_inliers_2d", query.ransac.min_final_inliers_2d),
      BTRF_INT("ransac.max_sample_retries", query.ransac.max_sample_retries),
      BTRF_INT("ransac.seed", query.ransac.rng_seed),

      Entry{"evaluate.n_max_sweep",
            [](const RunConfig& c) {
              std::string s;
              for (std::size_t i = 0; i < c.n_max_sweep.size(); ++i)
                s += (i ? "," : "") + std::to_string(c.n_max_sweep[i]);
              return s;
            },
            [](RunConfig& c, const std::string& k, const std::string& v) {
              c.n_max_sweep.clear();
              for (const auto& item : split_list(v)) c.n_max_sweep.push_back(parse_integer<int>(k, item));
            }},

      BTRF_INT("synth.seed", synth.seed),
      BTRF_INT("synth.train_frames", synth.train_frames),
      BTRF_INT("synth.test_frames", synth.test_frames),
      BTRF_INT("synth.width", synth.intrinsics.width),
      BTRF_INT("synth.height", synth.intrinsics.height),
      BTRF_DOUBLE("synth.fx", synth.intrinsics.fx),
      BTRF_DOUBLE("synth.fy", synth.intrinsics.fy),
      BTRF_DOUBLE("synth.cx", synth.intrinsics.cx),
      BTRF_DOUBLE("synth.cy", synth.intrinsics.cy),
      Entry{"synth.room_size",
            [](const RunConfig& c) {
              return format_double(c.synth.room_size.x()) + "," + format_double(c.synth.room_size.y()) +
                     "," + format_double(c.synth.room_size.z());
            },
            [](RunConfig& c, const std::string& k, const std::string& v) {
              const auto items = split_list(v);
              if (items.size() != 3) throw ConfigError(k + ": expected three comma-separated sizes");
              for (int i = 0; i < 3; ++i) c.synth.room_size[i] = parse_double(k, items[i]);
            }},
      BTRF_INT("synth.components", synth.components),
  };
  return table;
}

#undef BTRF_INT
#undef BTRF_DOUBLE
#undef BTRF_STRING

}  // namespace

const char* to_string(ReportFormat format) {
  switch (format) {
    case ReportFormat::Text: return "text";
    case ReportFormat::Csv: return "csv";
    case ReportFormat::JsonLines: return "json-lines";
  }
  return "?";
}

ReportFormat parse_report_format(const std::string& text) {
  if (text == "text") return ReportFormat::Text;
  if (text == "csv") return ReportFormat::Csv;
  if (text == "json-lines") return ReportFormat::JsonLines;
  throw InvalidInput("unknown report format '" + text + "' (text, csv, json-lines)");
}

TrainingOptions RunConfig::training_options(int threads) const {
  TrainingOptions o;
  o.images_per_tree = mode == ForestMode::IndoorRgbd ? images_per_tree_indoor : images_per_tree_outdoor;
  o.pixels_per_image = pixels_per_image;
  o.threads = threads;
  return o;
}

void RunConfig::validate() const {
  try {
    forest.validate();
    query.ransac.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  if (images_per_tree_indoor < 1 || images_per_tree_outdoor < 1 || pixels_per_image < 1)
    throw ConfigError("training budgets must be >= 1");
  if (query.query_pixels < 1) throw ConfigError("query.pixels must be >= 1");
  if (!(query.max_descriptor_distance >= 0.0))
    throw ConfigError("query.max_descriptor_distance must be >= 0");
  if (n_max_sweep.empty()) throw ConfigError("evaluate.n_max_sweep must not be empty");
  for (const int n : n_max_sweep)
    if (n < 1) throw ConfigError("evaluate.n_max_sweep entries must be >= 1");
  if (synth.train_frames < 1 || synth.test_frames < 1) throw ConfigError("synth frame counts must be >= 1");
  if (synth.components < 1) throw ConfigError("synth.components must be >= 1");
  if (!(synth.room_size.minCoeff() > 0.0)) throw ConfigError("synth.room_size must be positive");
  try {
    synth.intrinsics.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("synth intrinsics: ") + e.what());
  }
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  for (const auto& e : entries()) {
    if (key == e.key) {
      e.set(config, key, value);
      return;
    }
  }
  throw ConfigError("unknown configuration key '" + key + "'");
}

RunConfig parse_config(std::istream& in, const std::string& name) {
  RunConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(name + ":" + std::to_string(line_no) + ": expected `key = value`");
    try {
      set_config_value(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(name + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  config.validate();
  return config;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config(in, path);
}

void write_config(std::ostream& out, const RunConfig& config) {
  for (const auto& e : entries()) out << e.key << " = " << e.get(config) << '\n';
}

}  // namespace btrf
