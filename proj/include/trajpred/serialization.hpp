#pragma once

#include "trajpred/bench.hpp"
#include "trajpred/matrix_normal.hpp"
#include "trajpred/mdn.hpp"
#include "trajpred/mlp.hpp"
#include "trajpred/occupancy.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace trajpred {

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);
/// Parses a full-token double; MalformedFile on trailing junk or overflow.
double parse_double(const std::string& text);

std::string format_vector(const Eigen::VectorXd& values);
Eigen::VectorXd parse_vector(const std::string& text);

/// Ordered `key = value` lines. Blank lines and `#` comments are skipped on
/// parse; keys keep their insertion order on output.
class KeyValueDocument {
 public:
  static KeyValueDocument parse(const std::string& text);

  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value) { set(key, format_double(value)); }
  void set(const std::string& key, int value) { set(key, std::to_string(value)); }
  void set(const std::string& key, const Eigen::VectorXd& values) { set(key, format_vector(values)); }

  bool has(const std::string& key) const;
  /// MalformedFile when the key is absent.
  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  /// Checks the vector length when `expected` is non-negative.
  Eigen::VectorXd get_vector(const std::string& key, Eigen::Index expected = -1) const;

  /// SchemaMismatch unless `format` and `version` keys match.
  void expect_schema(const std::string& format, int version) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string to_string() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::string read_text_file(const std::filesystem::path& path);
/// Creates parent directories as needed.
void write_text_file(const std::filesystem::path& path, const std::string& text);

inline constexpr int kMixtureFormatVersion = 1;
inline constexpr int kFieldFormatVersion = 1;
inline constexpr int kCheckpointFormatVersion = 1;

std::string mixture_to_text(const TrajectoryMixture& mix);
TrajectoryMixture mixture_from_text(const std::string& text);
void save_mixture(const TrajectoryMixture& mix, const std::filesystem::path& path);
TrajectoryMixture load_mixture(const std::filesystem::path& path);

std::string field_to_text(const HilbertField& field);
HilbertField field_from_text(const std::string& text);

/// Layer shapes followed by row-major weights and biases.
void write_mlp(KeyValueDocument& doc, const Mlp& net);
Mlp read_mlp(const KeyValueDocument& doc);

std::string mdn_to_text(const MdnNetwork& net);
MdnNetwork mdn_from_text(const std::string& text);
std::string naive_nn_to_text(const NaiveNnPredictor& model);
NaiveNnPredictor naive_nn_from_text(const std::string& text);

/// Header `id,t,x,y`; rows grouped by id in first-appearance order.
std::vector<std::pair<std::string, TimedPath>> parse_paths_csv(const std::string& text);
std::string paths_to_csv(const std::vector<std::pair<std::string, TimedPath>>& paths);

}  // namespace trajpred
