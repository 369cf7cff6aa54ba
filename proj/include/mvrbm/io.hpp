#pragma once

#include <zlib.h>

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <limits>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvrbm/drbm.hpp"
#include "mvrbm/metrics.hpp"
#include "mvrbm/rbm.hpp"
#include "mvrbm/rng.hpp"

namespace mvrbm {

// ---------------------------------------------------------------------------
// IDX container (the MNIST distribution format). Big-endian, bit-exact.

struct IdxError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IdxBadMagic : IdxError {
  using IdxError::IdxError;
};
struct IdxTruncated : IdxError {
  using IdxError::IdxError;
};
struct IdxUnsupportedType : IdxError {
  using IdxError::IdxError;
};

/// Parsed IDX container: element type code, dimension sizes, and the flat
/// row-major payload. Only the unsigned-byte type (0x08) is supported.
struct IdxTensor {
  std::uint8_t type_code = 0x08;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> payload;

  std::size_t element_count() const {
    std::size_t n = 1;
    for (std::uint32_t d : dims) {
      if (d != 0 && n > std::numeric_limits<std::size_t>::max() / d)
        throw IdxError("idx: dimension product overflows");
      n *= d;
    }
    return n;
  }
};

inline IdxTensor parse_idx(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4) throw IdxTruncated("idx: file shorter than magic");
  if (bytes[0] != 0 || bytes[1] != 0)
    throw IdxBadMagic("idx: magic must begin with two zero bytes");
  IdxTensor t;
  t.type_code = bytes[2];
  if (t.type_code != 0x08)
    throw IdxUnsupportedType("idx: unsupported element type code " + std::to_string(bytes[2]));
  const std::size_t n_dims = bytes[3];
  std::size_t at = 4;
  if (bytes.size() < at + 4 * n_dims) throw IdxTruncated("idx: truncated dimension table");
  t.dims.resize(n_dims);
  for (std::size_t d = 0; d < n_dims; ++d, at += 4) {
    t.dims[d] = (std::uint32_t(bytes[at]) << 24) | (std::uint32_t(bytes[at + 1]) << 16) |
                (std::uint32_t(bytes[at + 2]) << 8) | std::uint32_t(bytes[at + 3]);
  }
  const std::size_t expected = t.element_count();
  if (bytes.size() < at + expected) throw IdxTruncated("idx: truncated payload");
  if (bytes.size() > at + expected) throw IdxBadMagic("idx: trailing bytes after payload");
  t.payload.assign(bytes.begin() + at, bytes.end());
  return t;
}

inline std::vector<std::uint8_t> serialize_idx(const IdxTensor& t) {
  if (t.payload.size() != t.element_count())
    throw std::invalid_argument("idx: payload size does not match dims");
  std::vector<std::uint8_t> bytes{0, 0, t.type_code, static_cast<std::uint8_t>(t.dims.size())};
  for (std::uint32_t d : t.dims) {
    bytes.push_back(static_cast<std::uint8_t>(d >> 24));
    bytes.push_back(static_cast<std::uint8_t>(d >> 16));
    bytes.push_back(static_cast<std::uint8_t>(d >> 8));
    bytes.push_back(static_cast<std::uint8_t>(d));
  }
  bytes.insert(bytes.end(), t.payload.begin(), t.payload.end());
  return bytes;
}

namespace detail {

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::vector<std::uint8_t> read_gzip_bytes(const std::filesystem::path& path) {
  gzFile gz = gzopen(path.string().c_str(), "rb");
  if (!gz) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes;
  std::uint8_t chunk[1 << 16];
  int got;
  while ((got = gzread(gz, chunk, sizeof chunk)) > 0) bytes.insert(bytes.end(), chunk, chunk + got);
  const bool bad = got < 0;
  gzclose(gz);
  if (bad) throw std::runtime_error("gzip read failed for " + path.string());
  return bytes;
}

}  // namespace detail

/// Read an IDX file; a ".gz" suffix is decompressed transparently.
inline IdxTensor read_idx(const std::filesystem::path& path) {
  const bool gz = path.extension() == ".gz";
  return parse_idx(gz ? detail::read_gzip_bytes(path) : detail::read_file_bytes(path));
}

// ---------------------------------------------------------------------------
// Image preprocessing.

/// Flatten (N, 28, 28) byte images row-major and scale to [0, 1] by /255.
inline std::vector<std::vector<double>> preprocess_images(const IdxTensor& raw) {
  detail::require(raw.dims.size() == 3 && raw.dims[1] == 28 && raw.dims[2] == 28,
                  "preprocess_images: expected dims (N, 28, 28)");
  const std::size_t n = raw.dims[0], sz = 784;
  std::vector<std::vector<double>> out(n, std::vector<double>(sz));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < sz; ++p) out[i][p] = raw.payload[i * sz + p] / 255.0;
  return out;
}

/// Image tensor restricted to the given rows (used to subsample before any
/// conversion to doubles).
inline IdxTensor subset_images(const IdxTensor& raw, std::span<const int> indices) {
  detail::require(!raw.dims.empty(), "subset_images: scalar tensor");
  IdxTensor out;
  out.type_code = raw.type_code;
  out.dims = raw.dims;
  out.dims[0] = static_cast<std::uint32_t>(indices.size());
  const std::size_t row = raw.element_count() / raw.dims[0];
  out.payload.reserve(indices.size() * row);
  for (int i : indices) {
    const std::size_t at = static_cast<std::size_t>(i) * row;
    out.payload.insert(out.payload.end(), raw.payload.begin() + at, raw.payload.begin() + at + row);
  }
  return out;
}

inline std::vector<int> idx_labels(const IdxTensor& raw) {
  detail::require(raw.dims.size() == 1, "idx_labels: expected dims (N)");
  return {raw.payload.begin(), raw.payload.end()};
}

/// Additive Gaussian pixel noise on raw byte values, clamped to [0, 255]
/// (applied before any normalization). sigma = 0 is the identity.
inline IdxTensor corrupt_gaussian(const IdxTensor& images, double sigma, RngStream& rng) {
  if (sigma < 0.0) throw std::domain_error("corrupt_gaussian: sigma must be >= 0");
  IdxTensor out = images;
  if (sigma == 0.0) return out;
  for (std::uint8_t& px : out.payload) {
    const double noisy = px + rng.gaussian(0.0, sigma);
    px = static_cast<std::uint8_t>(std::lround(std::min(255.0, std::max(0.0, noisy))));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model / dataset persistence: versioned structured text, one field per
// line, doubles printed with 17 significant digits so the round trip is
// bitwise.

struct ModelIoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline constexpr int kModelFormatVersion = 1;

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_values(std::ostream& out, const char* name, std::span<const double> values) {
  out << name;
  for (double v : values) out << ' ' << format_double(v);
  out << '\n';
}

class FieldReader {
 public:
  explicit FieldReader(std::istream& in) : in_(in) {}

  std::string line(const char* expected_key) {
    std::string l;
    if (!std::getline(in_, l)) throw ModelIoError("model file: unexpected end of file");
    const std::size_t key_len = std::strlen(expected_key);
    if (key_len == 0) return l;
    if (l.rfind(expected_key, 0) != 0 || (l.size() > key_len && l[key_len] != ' '))
      throw ModelIoError(std::string("model file: expected field \"") + expected_key + "\"");
    return l.substr(std::min(l.size(), key_len + 1));
  }

  std::vector<double> values(const char* key, std::size_t n) {
    std::istringstream ss(line(key));
    std::vector<double> out(n);
    std::string tok;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(ss >> tok)) throw ModelIoError(std::string("model file: short \"") + key + "\" row");
      char* end = nullptr;
      out[i] = std::strtod(tok.c_str(), &end);
      if (end != tok.c_str() + tok.size())
        throw ModelIoError(std::string("model file: bad number in \"") + key + "\"");
    }
    std::string extra;
    if (ss >> extra) throw ModelIoError(std::string("model file: long \"") + key + "\" row");
    return out;
  }

 private:
  std::istream& in_;
};

inline void check_header(FieldReader& r, const std::string& expected_kind) {
  const std::string version = r.line("mvrbm-model");
  if (version != std::to_string(kModelFormatVersion))
    throw ModelIoError("model file: unsupported format version \"" + version + "\"");
  const std::string kind = r.line("kind");
  if (kind != expected_kind)
    throw ModelIoError("model file: kind is \"" + kind + "\", expected \"" + expected_kind + "\"");
}

inline std::vector<int> parse_shape(const std::string& text, std::size_t n) {
  std::istringstream ss(text);
  std::vector<int> shape(n);
  for (std::size_t i = 0; i < n; ++i)
    if (!(ss >> shape[i]) || shape[i] < 1) throw ModelIoError("model file: bad shape");
  return shape;
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace detail

inline void save_model(const std::filesystem::path& path, const RbmParams& p) {
  auto out = detail::open_for_write(path);
  out << "mvrbm-model " << detail::kModelFormatVersion << "\nkind rbm\nlevels "
      << p.levels.str() << "\nshape " << p.n_visible() << ' ' << p.n_hidden() << '\n';
  detail::write_values(out, "visible_bias", p.visible_bias);
  detail::write_values(out, "hidden_bias", p.hidden_bias);
  for (int i = 0; i < p.n_visible(); ++i) detail::write_values(out, "coupling", p.coupling.row(i));
  out << "end\n";
}

inline RbmParams load_rbm_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  detail::FieldReader r(in);
  detail::check_header(r, "rbm");
  const LevelSpec levels = LevelSpec::parse(r.line("levels"));
  const std::vector<int> shape = detail::parse_shape(r.line("shape"), 2);
  RbmParams p(shape[0], shape[1], levels);
  p.visible_bias = r.values("visible_bias", shape[0]);
  p.hidden_bias = r.values("hidden_bias", shape[1]);
  for (int i = 0; i < shape[0]; ++i) {
    const std::vector<double> row = r.values("coupling", shape[1]);
    std::copy(row.begin(), row.end(), p.coupling.row(i).begin());
  }
  r.line("end");
  return p;
}

inline void save_model(const std::filesystem::path& path, const DrbmParams& p) {
  auto out = detail::open_for_write(path);
  out << "mvrbm-model " << detail::kModelFormatVersion << "\nkind drbm\nlevels "
      << p.levels.str() << "\nshape " << p.n_inputs() << ' ' << p.n_hidden() << ' '
      << p.n_classes() << '\n';
  detail::write_values(out, "class_bias", p.class_bias);
  detail::write_values(out, "hidden_bias", p.hidden_bias);
  for (int i = 0; i < p.n_inputs(); ++i)
    detail::write_values(out, "input_coupling", p.input_coupling.row(i));
  for (int j = 0; j < p.n_hidden(); ++j)
    detail::write_values(out, "class_coupling", p.class_coupling.row(j));
  out << "end\n";
}

inline DrbmParams load_drbm_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  detail::FieldReader r(in);
  detail::check_header(r, "drbm");
  const LevelSpec levels = LevelSpec::parse(r.line("levels"));
  const std::vector<int> shape = detail::parse_shape(r.line("shape"), 3);
  DrbmParams p(shape[0], shape[1], shape[2], levels);
  p.class_bias = r.values("class_bias", shape[2]);
  p.hidden_bias = r.values("hidden_bias", shape[1]);
  for (int i = 0; i < shape[0]; ++i) {
    const std::vector<double> row = r.values("input_coupling", shape[1]);
    std::copy(row.begin(), row.end(), p.input_coupling.row(i).begin());
  }
  for (int j = 0; j < shape[1]; ++j) {
    const std::vector<double> row = r.values("class_coupling", shape[2]);
    std::copy(row.begin(), row.end(), p.class_coupling.row(j).begin());
  }
  r.line("end");
  return p;
}

inline void save_spin_dataset(const std::filesystem::path& path, const SpinDataset& data) {
  auto out = detail::open_for_write(path);
  out << "mvrbm-spins " << detail::kModelFormatVersion << "\nshape " << data.n_points() << ' '
      << data.n_visible() << '\n';
  for (int mu = 0; mu < data.n_points(); ++mu) {
    const auto v = data.point(mu);
    for (int i = 0; i < data.n_visible(); ++i) out << (i ? " " : "") << (v[i] > 0 ? 1 : -1);
    out << '\n';
  }
  out << "end\n";
}

inline SpinDataset load_spin_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  detail::FieldReader r(in);
  const std::string version = r.line("mvrbm-spins");
  if (version != std::to_string(detail::kModelFormatVersion))
    throw ModelIoError("dataset file: unsupported format version \"" + version + "\"");
  const std::vector<int> shape = detail::parse_shape(r.line("shape"), 2);
  SpinDataset data(shape[1]);
  std::vector<double> v(shape[1]);
  for (int mu = 0; mu < shape[0]; ++mu) {
    std::istringstream ss(r.line(""));
    for (int i = 0; i < shape[1]; ++i) {
      int spin;
      if (!(ss >> spin) || (spin != 1 && spin != -1))
        throw ModelIoError("dataset file: entries must be +-1");
      v[i] = spin;
    }
    data.add(v);
  }
  r.line("end");
  return data;
}

// ---------------------------------------------------------------------------
// Metrics CSV: header `epoch,metric,value,seed,config_id`, LF endings.

inline void write_metrics_csv(const std::filesystem::path& path,
                              std::span<const MetricsRecord> records) {
  auto out = detail::open_for_write(path);
  out << "epoch,metric,value,seed,config_id\n";
  for (const MetricsRecord& r : records)
    out << r.epoch << ',' << r.metric << ',' << detail::format_double(r.value) << ',' << r.seed
        << ',' << r.config_id << '\n';
}

}  // namespace mvrbm
