#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "btrf/errors.hpp"
#include "btrf/forest.hpp"
#include "btrf/pipeline.hpp"
#include "btrf/ransac.hpp"

namespace btrf {

enum class ReportFormat { Text, Csv, JsonLines };

const char* to_string(ReportFormat format);
ReportFormat parse_report_format(const std::string& text);

/// Bad configuration text or values. Maps to the usage exit code.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SynthSettings {
  std::uint64_t seed = 0;
  int train_frames = 40;
  int test_frames = 20;
  Intrinsics intrinsics{300.0, 300.0, 160.0, 120.0, 320, 240};
  Eigen::Vector3d room_size{4.0, 3.0, 2.5};
  int components = 12;
};

struct RunConfig {
  ForestMode mode = ForestMode::IndoorRgbd;
  std::string dataset = "scene";
  std::string model = "model.btrf";
  std::string output_dir = "results";
  ReportFormat report_format = ReportFormat::Text;

  ForestConfig forest;
  int images_per_tree_indoor = 500;
  int images_per_tree_outdoor = 300;
  int pixels_per_image = 5000;

  QueryOptions query;  // query.max_backtrack_leaves mirrors forest.max_backtrack_leaves
  std::vector<int> n_max_sweep{1, 4, 16};

  SynthSettings synth;

  TrainingOptions training_options(int threads) const;

  /// Checks value ranges; throws ConfigError.
  void validate() const;
};

/// Parses `key = value` lines; `#` starts a comment. Unknown keys and
/// malformed values throw ConfigError naming the line.
RunConfig parse_config(std::istream& in, const std::string& name = "<config>");
RunConfig load_config_file(const std::string& path);

/// Applies one `key = value` assignment.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

/// Every key with its current value, in a stable order, parseable by
/// parse_config.
void write_config(std::ostream& out, const RunConfig& config);

}  // namespace btrf
