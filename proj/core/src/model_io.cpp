#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "prema/errors.hpp"
#include "prema/tinynn.hpp"

namespace prema::nn {
namespace {

static_assert(std::endian::native == std::endian::little,
              "model I/O assumes a little-endian host");

constexpr char kMagic[4] = {'P', 'M', 'N', 'N'};
constexpr std::uint16_t kVersion = 1;

class Writer {
 public:
  template <typename T>
  void put(T value) {
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    bytes_.insert(bytes_.end(), raw, raw + sizeof(T));
  }
  void put_bytes(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  void require(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw FormatError(std::string("truncated ") + what + ": need " +
                            std::to_string(n) + " bytes, " +
                            std::to_string(remaining()) + " left",
                        pos_);
    }
  }

  template <typename T>
  T get(const char* what) {
    require(sizeof(T), what);
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::vector<std::uint8_t> serialize(const Mlp& model) {
  model.validate();
  if (model.layers.size() > 255) throw ShapeError("too many layers to serialize");
  Writer w;
  w.put_bytes(kMagic, sizeof(kMagic));
  w.put<std::uint16_t>(kVersion);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(model.kind));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(model.layers.size()));
  for (const Layer& l : model.layers) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(l.spec.in_dim));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(l.spec.out_dim));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(l.spec.activation.kind));
    w.put<float>(l.spec.activation.alpha);
  }
  for (const Layer& l : model.layers) {
    for (double v : l.weights) w.put<float>(static_cast<float>(v));
    for (double v : l.biases) w.put<float>(static_cast<float>(v));
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.scaler.mean.size()));
  for (std::size_t i = 0; i < model.scaler.mean.size(); ++i) {
    w.put<double>(model.scaler.mean[i]);
    w.put<double>(model.scaler.std[i]);
  }
  w.put<std::uint32_t>(crc32_of(w.bytes()));
  return std::move(w.bytes());
}

Mlp deserialize(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.require(sizeof(kMagic), "magic");
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("bad magic, expected PMNN", 0);
  }
  for (std::size_t i = 0; i < sizeof(kMagic); ++i) r.get<std::uint8_t>("magic");

  const std::size_t version_at = r.offset();
  const auto version = r.get<std::uint16_t>("version");
  if (version != kVersion) {
    throw FormatError("unsupported format version " + std::to_string(version),
                      version_at);
  }
  const std::size_t kind_at = r.offset();
  const auto kind = r.get<std::uint8_t>("model kind");
  if (kind > 1) throw FormatError("unknown model kind", kind_at);
  const std::size_t count_at = r.offset();
  const auto layer_count = r.get<std::uint8_t>("layer count");
  if (layer_count == 0) throw FormatError("model has no layers", count_at);

  Mlp m;
  m.kind = static_cast<ModelKind>(kind);
  for (std::size_t l = 0; l < layer_count; ++l) {
    const std::size_t at = r.offset();
    Layer layer;
    layer.spec.in_dim = r.get<std::uint32_t>("layer in_dim");
    layer.spec.out_dim = r.get<std::uint32_t>("layer out_dim");
    const std::size_t act_at = r.offset();
    const auto act = r.get<std::uint8_t>("activation");
    if (act > 3) throw FormatError("unknown activation code", act_at);
    layer.spec.activation.kind = static_cast<ActivationKind>(act);
    const std::size_t alpha_at = r.offset();
    layer.spec.activation.alpha = r.get<float>("activation alpha");
    if (!std::isfinite(layer.spec.activation.alpha)) {
      throw FormatError("non-finite activation alpha", alpha_at);
    }
    if (layer.spec.in_dim == 0 || layer.spec.out_dim == 0) {
      throw FormatError("zero layer dimension", at);
    }
    if (l > 0 && m.layers.back().spec.out_dim != layer.spec.in_dim) {
      throw FormatError("layer dims do not chain", at);
    }
    m.layers.push_back(std::move(layer));
  }
  if (m.layers.back().spec.activation.kind != ActivationKind::kSoftmax) {
    for (const Layer& l : m.layers) {
      if (l.spec.activation.kind == ActivationKind::kSoftmax) {
        throw FormatError("softmax before the final layer", count_at + 1);
      }
    }
  }

  for (Layer& layer : m.layers) {
    const std::uint64_t n_w =
        static_cast<std::uint64_t>(layer.spec.in_dim) * layer.spec.out_dim;
    // Check the whole block before allocating for it.
    if (n_w > r.remaining() / sizeof(float)) {
      throw FormatError("truncated weight block: need " +
                            std::to_string(n_w * sizeof(float)) + " bytes, " +
                            std::to_string(r.remaining()) + " left",
                        r.offset());
    }
    layer.weights.resize(static_cast<std::size_t>(n_w));
    for (double& v : layer.weights) {
      const std::size_t at = r.offset();
      v = r.get<float>("weight");
      if (!std::isfinite(v)) throw FormatError("non-finite weight", at);
    }
    r.require(layer.spec.out_dim * sizeof(float), "bias block");
    layer.biases.resize(layer.spec.out_dim);
    for (double& v : layer.biases) {
      const std::size_t at = r.offset();
      v = r.get<float>("bias");
      if (!std::isfinite(v)) throw FormatError("non-finite bias", at);
    }
  }

  const std::size_t dim_at = r.offset();
  const auto input_dim = r.get<std::uint32_t>("scaler dim");
  if (input_dim != m.layers.front().spec.in_dim) {
    throw FormatError("scaler dim does not match model input", dim_at);
  }
  r.require(static_cast<std::size_t>(input_dim) * 2 * sizeof(double), "scaler block");
  for (std::uint32_t i = 0; i < input_dim; ++i) {
    const std::size_t at = r.offset();
    const double mean = r.get<double>("scaler mean");
    const double sd = r.get<double>("scaler std");
    if (!std::isfinite(mean) || !std::isfinite(sd) || !(sd > 0)) {
      throw FormatError("invalid scaler entry", at);
    }
    m.scaler.mean.push_back(mean);
    m.scaler.std.push_back(sd);
  }

  const std::size_t crc_at = r.offset();
  const auto stored = r.get<std::uint32_t>("CRC32");
  if (r.remaining() != 0) {
    throw FormatError("trailing bytes after CRC", r.offset());
  }
  if (stored != crc32_of(bytes.first(crc_at))) {
    throw FormatError("CRC32 mismatch", crc_at);
  }
  m.validate();
  return m;
}

void save(const Mlp& model, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = serialize(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

Mlp restore(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                        std::istreambuf_iterator<char>()};
  return deserialize(bytes);
}

}  // namespace prema::nn
