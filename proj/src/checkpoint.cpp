#include "paragen/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <sstream>

#include "paragen/errors.hpp"

namespace paragen {

namespace {

constexpr std::string_view kMagic = "CPFG";
constexpr std::size_t kHeaderSize = 4 + 2 + 5 * 8 + 8;

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint16_t get_u16(std::string_view in, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(in[at]) |
                                    (static_cast<unsigned char>(in[at + 1]) << 8));
}

std::uint64_t get_u64(std::string_view in, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(in[at + i]);
  return v;
}

} // namespace

std::string serialize_checkpoint(const ModelParams& params, std::uint64_t vocab_fingerprint) {
  std::string out(kMagic);
  put_u16(out, kCheckpointVersion);
  const ModelDims& d = params.dims;
  for (std::uint64_t v : {d.vocab_size, d.embedding, d.hidden, d.state, d.attention}) {
    put_u64(out, v);
  }
  put_u64(out, vocab_fingerprint);
  out.reserve(out.size() + params.parameter_count() * 8);
  params.for_each([&](std::string_view, const Tensor& t) {
    for (double x : t.data()) put_u64(out, std::bit_cast<std::uint64_t>(x));
  });
  return out;
}

Checkpoint parse_checkpoint(std::string_view bytes, const std::optional<ModelDims>& expected) {
  if (bytes.size() < kMagic.size() || bytes.substr(0, 4) != kMagic) {
    throw CorruptCheckpointError("checkpoint: missing CPFG magic");
  }
  if (bytes.size() < 6) throw CorruptCheckpointError("checkpoint: truncated header");
  const std::uint16_t version = get_u16(bytes, 4);
  if (version != kCheckpointVersion) {
    throw CheckpointVersionError("checkpoint: format version " + std::to_string(version) +
                                 ", this build reads version " +
                                 std::to_string(kCheckpointVersion));
  }
  if (bytes.size() < kHeaderSize) throw CorruptCheckpointError("checkpoint: truncated header");
  ModelDims dims;
  dims.vocab_size = get_u64(bytes, 6);
  dims.embedding = get_u64(bytes, 14);
  dims.hidden = get_u64(bytes, 22);
  dims.state = get_u64(bytes, 30);
  dims.attention = get_u64(bytes, 38);
  const std::uint64_t fingerprint = get_u64(bytes, 46);

  if (expected && !(*expected == dims)) {
    throw CheckpointWidthError("checkpoint widths (" + dims.describe() +
                               ") do not match requested widths (" + expected->describe() + ")");
  }
  // Guard the zero-fill allocation against a garbage header.
  constexpr std::uint64_t kMaxWidth = 1u << 24;
  for (std::uint64_t w : {dims.vocab_size, dims.embedding, dims.hidden, dims.state, dims.attention}) {
    if (w == 0 || w > kMaxWidth) throw CorruptCheckpointError("checkpoint: implausible width");
  }
  ModelParams params;
  try {
    params = ModelParams::zeros(dims);
  } catch (const ValidationError& e) {
    throw CorruptCheckpointError(std::string("checkpoint: ") + e.what());
  }
  const std::size_t expected_size = kHeaderSize + params.parameter_count() * 8;
  if (bytes.size() != expected_size) {
    throw CorruptCheckpointError("checkpoint: " + std::to_string(bytes.size()) +
                                 " bytes, expected " + std::to_string(expected_size));
  }
  std::size_t at = kHeaderSize;
  params.for_each([&](std::string_view, Tensor& t) {
    for (double& x : t.data()) {
      x = std::bit_cast<double>(get_u64(bytes, at));
      at += 8;
    }
  });
  return Checkpoint{std::move(params), fingerprint};
}

void save_checkpoint(const ModelParams& params, std::uint64_t vocab_fingerprint,
                     const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(params, vocab_fingerprint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ValidationError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<ModelDims>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str(), expected);
}

} // namespace paragen
