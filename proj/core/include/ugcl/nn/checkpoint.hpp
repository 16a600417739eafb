#pragma once

#include <filesystem>

#include "ugcl/nn/param_store.hpp"

namespace ugcl::nn {

// Binary checkpoint layout, all integers and reals little-endian:
//
//   8 bytes   magic "UGCLCKPT"
//   u32       format version (1)
//   u64       parameter count
//   per parameter, in name order:
//     u32     name length, then the name bytes (no terminator)
//     u64     rows
//     u64     cols
//     f64     rows * cols values, row-major, IEEE-754 binary64
//
// Gradients are not stored.

void save_checkpoint(const ParamStore& params, const std::filesystem::path& path);
/// Throws std::runtime_error on a truncated or malformed file.
ParamStore load_checkpoint(const std::filesystem::path& path);

}  // namespace ugcl::nn
