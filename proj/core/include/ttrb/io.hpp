#pragma once

#include "ttrb/tensor.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

namespace ttrb {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Binary layout: "TTRB", version byte (1), order byte k, k little-endian u64
// dims, then little-endian f64 data in first-axis-major order.
void write_tensor(std::ostream& os, const Tensor& t);
Tensor read_tensor(std::istream& is);
void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

/// Plain-text manifest of `key = value` lines; '#' starts a comment.
using Manifest = std::map<std::string, std::string>;

void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);
Manifest parse_manifest(std::istream& is);

}  // namespace ttrb
