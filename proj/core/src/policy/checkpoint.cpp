#include "bpo/policy/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "bpo/error.hpp"

namespace bpo {
namespace {

constexpr std::array<char, 8> kMagic{'B', 'P', 'O', 'P', 'O', 'L', 'v', '1'};
constexpr std::size_t kPreambleBytes = kMagic.size() + 4 * sizeof(std::uint64_t);

void put_u64(std::vector<unsigned char>& out, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(x >> (8 * i)));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return x;
}

}  // namespace

void save_checkpoint(const PolicyParams& params, const std::string& path) {
  std::vector<unsigned char> bytes(kMagic.begin(), kMagic.end());
  const PolicyDims& d = params.dims();
  for (int v : {d.vocab, d.window, d.embed, d.hidden}) put_u64(bytes, static_cast<std::uint64_t>(v));
  for (double x : params.flat()) put_u64(bytes, std::bit_cast<std::uint64_t>(x));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(CheckpointError::Kind::Io, "cannot open checkpoint for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError(CheckpointError::Kind::Io, "failed writing checkpoint: " + path);
}

PolicyParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointError::Kind::Io, "cannot open checkpoint: " + path);
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < kMagic.size() || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    if (bytes.size() < kMagic.size())
      throw CheckpointError(CheckpointError::Kind::Corrupt, "corrupt checkpoint (truncated header): " + path);
    throw CheckpointError(CheckpointError::Kind::BadMagic, "bad checkpoint magic: " + path);
  }
  if (bytes.size() < kPreambleBytes)
    throw CheckpointError(CheckpointError::Kind::Corrupt, "corrupt checkpoint (truncated header): " + path);

  std::array<std::uint64_t, 4> raw{};
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = get_u64(bytes.data() + kMagic.size() + 8 * i);
  for (auto v : raw)
    if (v == 0 || v > (1u << 24))
      throw CheckpointError(CheckpointError::Kind::Corrupt, "corrupt checkpoint (implausible dims): " + path);
  PolicyDims dims{static_cast<int>(raw[0]), static_cast<int>(raw[1]), static_cast<int>(raw[2]),
                  static_cast<int>(raw[3])};

  const std::size_t payload = bytes.size() - kPreambleBytes;
  if (payload % 8 != 0)
    throw CheckpointError(CheckpointError::Kind::Corrupt, "corrupt checkpoint (truncated value): " + path);
  if (payload / 8 != dims.param_count())
    throw CheckpointError(CheckpointError::Kind::DimsMismatch,
                          "checkpoint holds " + std::to_string(payload / 8) + " values but dims require " +
                              std::to_string(dims.param_count()) + ": " + path);

  PolicyParams params(dims);
  auto flat = params.flat();
  for (std::size_t i = 0; i < flat.size(); ++i)
    flat[i] = std::bit_cast<double>(get_u64(bytes.data() + kPreambleBytes + 8 * i));
  return params;
}

}  // namespace bpo
