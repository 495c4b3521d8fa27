#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "qtrbm/model.hpp"

namespace qtrbm {

/// A checkpoint holds either parameterization; the "parameterization" field
/// of the JSON document says which.
using Checkpoint = std::variant<RbmParamsQT, RbmParamsStd>;

inline constexpr int kCheckpointVersion = 1;

std::string checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// View a checkpoint in the requested parameterization, converting if needed.
RbmParamsQT as_qt(const Checkpoint& checkpoint);
RbmParamsStd as_std(const Checkpoint& checkpoint);

}  // namespace qtrbm
