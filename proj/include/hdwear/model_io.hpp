#pragma once

// Binary model file, all integers little-endian:
//
//   "HDWM"  u16 version(=1)  u32 D  u32 K  u32 Q  u32 n  f64 eta
//   u64 item_seed  u64 level_seed  u64 sensor_seed  u64 tie_seed
//   u32 F  F x (f64 v_min, f64 v_max)
//   K x (u32 byte_length, UTF-8 label)
//   K x D f32 class components (class-major)
//   u32 CRC32 of every preceding byte

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <system_error>
#include <type_traits>
#include <vector>

#include "hdwear/error.hpp"
#include "hdwear/model.hpp"

namespace hdwear {

inline constexpr char kModelMagic[4] = {'H', 'D', 'W', 'M'};
inline constexpr std::uint16_t kModelVersion = 1;

inline std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - offset, 1U << 30));
    crc = ::crc32(crc, bytes.data() + offset, chunk);
    offset += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

namespace detail {

class ByteWriter {
 public:
  template <typename T>
  void put(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
    const U bits = std::bit_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  void put_bytes(std::span<const std::uint8_t> data) { bytes_.insert(bytes_.end(), data.begin(), data.end()); }

  std::vector<std::uint8_t>& bytes() noexcept { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
    need(sizeof(T));
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(U{bytes_[pos_ + i]} << (8 * i));
    pos_ += sizeof(T);
    return std::bit_cast<T>(bits);
  }

  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorKind::kTruncated, "model file ends at byte " + std::to_string(bytes_.size()) +
                                             ", needed " + std::to_string(pos_ + n));
    }
  }

  // Guards count * size against overflow as well as end of input.
  void need_elements(std::size_t count, std::size_t size) const {
    if (count > remaining() / size) need(remaining() + 1);
  }

  [[nodiscard]] std::size_t position() const noexcept { return pos_; }
  [[nodiscard]] std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

inline std::uint32_t checked_u32(std::size_t value, const char* what) {
  if (value > UINT32_MAX) throw Error(ErrorKind::kInvalidArgument, std::string(what) + " too large for model file");
  return static_cast<std::uint32_t>(value);
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize_model(const Model& model) {
  detail::ByteWriter out;
  out.put_bytes({reinterpret_cast<const std::uint8_t*>(kModelMagic), 4});
  out.put(kModelVersion);
  out.put(detail::checked_u32(model.dim(), "dimension"));
  out.put(detail::checked_u32(model.class_count(), "class count"));
  out.put(detail::checked_u32(model.encoder.q_levels, "level count"));
  out.put(detail::checked_u32(model.encoder.ngram, "n-gram length"));
  out.put(model.eta);
  out.put(model.encoder.seeds.item);
  out.put(model.encoder.seeds.level);
  out.put(model.encoder.seeds.sensor);
  out.put(model.encoder.seeds.tie);
  out.put(detail::checked_u32(model.encoder.bounds.size(), "feature count"));
  for (const auto& b : model.encoder.bounds) {
    out.put(b.min);
    out.put(b.max);
  }
  for (const auto& label : model.classes) {
    out.put(detail::checked_u32(label.size(), "label"));
    out.put_bytes({reinterpret_cast<const std::uint8_t*>(label.data()), label.size()});
  }
  for (const auto& hv : model.class_hvs) {
    detail::require_same_dim(hv.dim(), model.dim());
    for (float c : hv.data()) out.put(c);
  }
  out.put(crc32_of(out.bytes()));
  return std::move(out.bytes());
}

// Structure is parsed first so a short file reports truncation; the checksum is verified
// before anything is returned.
inline Model deserialize_model(std::span<const std::uint8_t> bytes) {
  detail::ByteReader in(bytes);
  auto magic = in.take(4);
  if (std::memcmp(magic.data(), kModelMagic, 4) != 0) {
    throw Error(ErrorKind::kBadMagic, "not an hdwear model file");
  }
  const auto version = in.get<std::uint16_t>();
  if (version != kModelVersion) {
    throw Error(ErrorKind::kUnsupportedVersion,
                "model format version " + std::to_string(version) + " (supported: 1)");
  }
  Model model;
  model.encoder.dim = in.get<std::uint32_t>();
  const std::size_t k = in.get<std::uint32_t>();
  model.encoder.q_levels = in.get<std::uint32_t>();
  model.encoder.ngram = in.get<std::uint32_t>();
  model.eta = in.get<double>();
  model.encoder.seeds.item = in.get<std::uint64_t>();
  model.encoder.seeds.level = in.get<std::uint64_t>();
  model.encoder.seeds.sensor = in.get<std::uint64_t>();
  model.encoder.seeds.tie = in.get<std::uint64_t>();
  const std::size_t features = in.get<std::uint32_t>();
  in.need_elements(features, 16);
  model.encoder.bounds.resize(features);
  for (auto& b : model.encoder.bounds) {
    b.min = in.get<double>();
    b.max = in.get<double>();
  }
  in.need_elements(k, 4);
  model.classes.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    auto label = in.take(in.get<std::uint32_t>());
    model.classes.emplace_back(reinterpret_cast<const char*>(label.data()), label.size());
  }
  const std::size_t dim = model.encoder.dim;
  if (dim != 0) in.need_elements(k, dim * 4);
  model.class_hvs.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<float> comps(dim);
    for (auto& c : comps) c = in.get<float>();
    model.class_hvs.emplace_back(std::move(comps));
  }
  const std::size_t payload = in.position();
  const auto stored = in.get<std::uint32_t>();
  if (in.remaining() != 0) {
    throw Error(ErrorKind::kChecksumMismatch, "trailing bytes after model checksum");
  }
  if (stored != crc32_of(bytes.first(payload))) {
    throw Error(ErrorKind::kChecksumMismatch, "model file checksum does not match its contents");
  }
  if (dim == 0 || k == 0) throw Error(ErrorKind::kInvalidDimension, "model file has empty shape");
  return model;
}

// Writes to a sibling temporary file and renames it into place, so readers never observe a
// partially written file.
inline void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::kIo, "failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::kIo, "cannot move model into place at " + path.string());
  }
}

inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

inline void save_model(const Model& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_model(model));
}

inline Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open model file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace hdwear
