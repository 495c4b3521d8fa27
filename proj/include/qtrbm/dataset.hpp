#pragma once

#include <cstddef>
#include <string>

#include "qtrbm/types.hpp"

namespace qtrbm {

enum class Split { kUnspecified, kTrain, kValid, kTest };

/// Rows are samples, columns are visible units; every entry is 0 or 1.
struct BinaryDataset {
  std::string name;
  RowMat values;
  Split split = Split::kUnspecified;

  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
  Eigen::Index visible() const { return values.cols(); }
  Vec sample(std::size_t i) const { return values.row(static_cast<Eigen::Index>(i)).transpose(); }
};

const char* split_name(Split split);

}  // namespace qtrbm
