#include "ttrb/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace ttrb {

namespace {

constexpr std::array<char, 4> kMagic{'T', 'T', 'R', 'B'};
constexpr std::uint8_t kVersion = 1;

template <class T>
void put_le(std::ostream& os, T v) {
  std::array<unsigned char, sizeof(T)> buf{};
  std::memcpy(buf.data(), &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf.begin(), buf.end());
  os.write(reinterpret_cast<const char*>(buf.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> buf{};
  if (!is.read(reinterpret_cast<char*>(buf.data()), sizeof(T))) throw FormatError("truncated tensor stream");
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf.begin(), buf.end());
  T v;
  std::memcpy(&v, buf.data(), sizeof(T));
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void write_tensor(std::ostream& os, const Tensor& t) {
  if (t.order() > 255) throw FormatError("tensor order too large for format");
  os.write(kMagic.data(), kMagic.size());
  put_le<std::uint8_t>(os, kVersion);
  put_le<std::uint8_t>(os, static_cast<std::uint8_t>(t.order()));
  for (auto d : t.dims()) put_le<std::uint64_t>(os, d);
  for (double v : t.data()) put_le<double>(os, v);
  if (!os) throw FormatError("failed writing tensor");
}

Tensor read_tensor(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) throw FormatError("bad tensor magic");
  const auto version = get_le<std::uint8_t>(is);
  if (version != kVersion) throw FormatError("unsupported tensor version " + std::to_string(version));
  const auto order = get_le<std::uint8_t>(is);
  std::vector<std::size_t> dims(order);
  for (auto& d : dims) d = static_cast<std::size_t>(get_le<std::uint64_t>(is));
  std::vector<double> data(product(dims));
  for (auto& v : data) v = get_le<double>(is);
  return Tensor(std::move(dims), std::move(data));
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  write_tensor(os, t);
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  return read_tensor(is);
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  for (const auto& [k, v] : m) os << k << " = " << v << '\n';
}

Manifest parse_manifest(std::istream& is) {
  Manifest m;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("line " + std::to_string(lineno) + ": expected key = value");
    auto key = trim(line.substr(0, eq));
    if (key.empty()) throw FormatError("line " + std::to_string(lineno) + ": empty key");
    if (m.count(key)) throw FormatError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    m[key] = trim(line.substr(eq + 1));
  }
  return m;
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path.string());
  return parse_manifest(is);
}

}  // namespace ttrb
