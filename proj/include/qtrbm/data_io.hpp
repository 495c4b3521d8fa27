#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>

#include "qtrbm/dataset.hpp"
#include "qtrbm/model.hpp"

namespace qtrbm {

/// Reads comma-separated 0/1 rows, one sample per line, no header.
/// Throws DataError with line/column diagnostics on malformed, ragged, empty
/// or non-binary input.
BinaryDataset load_dataset(const std::filesystem::path& path);
BinaryDataset parse_dataset(const std::string& text, const std::string& name);

void save_dataset(const std::filesystem::path& path, const BinaryDataset& data);
std::string format_dataset(const BinaryDataset& data);

struct DatasetSplits {
  BinaryDataset train;
  BinaryDataset valid;
  BinaryDataset test;
};

/// Shuffled split by seed. Sizes are floor(n * f) for train and valid, the
/// remainder for test. Throws DomainError on bad fractions and DataError if
/// any split would be empty.
DatasetSplits split_dataset(const BinaryDataset& data, std::array<double, 3> fractions, std::uint64_t seed);

struct SyntheticOptions {
  Eigen::Index visible = 16;
  Eigen::Index hidden = 8;
  double param_scale = 1.5;  // W_std ~ U(-scale, scale)
  double bias_scale = 1.0;   // b_v, b_h ~ U(-bias_scale, bias_scale)
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  /// Above the enumeration cap, samples come from a long Gibbs run instead of
  /// exact enumeration. The result is then approximate.
  bool allow_approximate = false;
  int gibbs_burn_in = 10000;
  int gibbs_thinning = 20;
};

struct SyntheticData {
  BinaryDataset data;
  RbmParamsStd truth;
  bool exact = true;
};

/// Draws a random RBM and samples its visible marginal. Exact mode
/// enumerates all 2^V visible states (hidden units summed in closed form) and
/// requires V + H <= 24; throws SizeLimitError above that unless
/// allow_approximate is set.
SyntheticData generate_synthetic(const SyntheticOptions& options);

/// Six visible columns (a, b, z, d1, d2, d3): a ~ Bern(0.5), b copies a with
/// probability 0.99, z copies a with probability 0.75, d* are independent
/// fair coins.
BinaryDataset make_pl_failure_dataset(std::size_t samples, std::uint64_t seed);

inline constexpr Eigen::Index kPlColumnA = 0;
inline constexpr Eigen::Index kPlColumnB = 1;
inline constexpr Eigen::Index kPlColumnZ = 2;

}  // namespace qtrbm
