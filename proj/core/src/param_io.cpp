#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "harmonia/error.hpp"
#include "harmonia/nets.hpp"

namespace harmonia {

namespace {

constexpr std::array<char, 4> kMagic = {'H', 'N', 'E', 'T'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class U>
void put_le(std::ofstream& out, U v) {
  std::array<unsigned char, sizeof(U)> b{};
  for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFFU);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

template <class U>
U get_le(std::ifstream& in) {
  std::array<unsigned char, sizeof(U)> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), static_cast<std::streamsize>(b.size()))) {
    throw Error("load_params: truncated file");
  }
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void save_params(const std::string& path, ParamKind kind, std::span<const double> values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("save_params: cannot open " + path);
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(kind));
  put_le<std::uint64_t>(out, values.size());
  for (double v : values) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw Error("save_params: write failed for " + path);
}

ParamFile load_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("load_params: cannot open " + path);
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw Error("load_params: bad magic in " + path);
  const auto version = get_le<std::uint32_t>(in);
  if (version != kVersion) throw Error("load_params: unsupported version " + std::to_string(version));
  const auto kind = get_le<std::uint32_t>(in);
  if (kind < 1 || kind > 5) throw Error("load_params: unknown kind tag " + std::to_string(kind));
  const auto count = get_le<std::uint64_t>(in);
  ParamFile f;
  f.kind = static_cast<ParamKind>(kind);
  f.values.resize(count);
  for (auto& v : f.values) v = std::bit_cast<double>(get_le<std::uint64_t>(in));
  return f;
}

}  // namespace harmonia
