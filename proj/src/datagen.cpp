#include "otl/datagen.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace otl {

double DeterministicRng::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 =
      (static_cast<double>(engine_() >> 11) + 1.0) * 0x1p-53;  // (0, 1]
  const double u2 = static_cast<double>(engine_() >> 11) * 0x1p-53;  // [0, 1)
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  have_spare_ = true;
  return radius * std::cos(angle);
}

ScoreMatrix gen_uniform(std::int64_t n, std::int64_t k, RngSeed seed) {
  if (n < 1) throw std::invalid_argument("need at least one row");
  if (k < 2) throw std::invalid_argument("need at least two clusters");
  DeterministicRng rng(seed);
  ScoreMatrix m(n, k);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform01();
  return m;
}

ScoreMatrix gen_skewed(std::int64_t n, std::int64_t k, RngSeed seed,
                       double bias) {
  if (n < 1) throw std::invalid_argument("need at least one row");
  if (k < 2) throw std::invalid_argument("need at least two clusters");
  if (!(bias >= 0.0)) throw std::invalid_argument("bias must be non-negative");
  DeterministicRng rng(seed);
  const Eigen::Index favored =
      static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(k)));
  ScoreMatrix m(n, k);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform01();
  m.col(favored).array() += bias;
  return m;
}

namespace {

FeatureMatrix draw_centers(DeterministicRng& rng, std::int64_t dim,
                           std::int64_t n_centers) {
  FeatureMatrix centers(n_centers, dim);
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    double norm = 0.0;
    do {
      for (Eigen::Index d = 0; d < centers.cols(); ++d)
        centers(c, d) = rng.gaussian();
      norm = centers.row(c).norm();
    } while (norm < 1e-12);
    centers.row(c) /= norm;
  }
  return centers;
}

}  // namespace

FeatureMatrix blob_centers(std::int64_t dim, std::int64_t n_centers,
                           RngSeed seed) {
  if (dim < 1) throw std::invalid_argument("dimension must be at least 1");
  if (n_centers < 2) throw std::invalid_argument("need at least two centers");
  DeterministicRng rng(seed);
  return draw_centers(rng, dim, n_centers);
}

BlobData gen_blobs(std::int64_t n, std::int64_t dim, std::int64_t n_centers,
                   double spread, RngSeed seed) {
  if (n < 1) throw std::invalid_argument("need at least one point");
  if (dim < 1) throw std::invalid_argument("dimension must be at least 1");
  if (n_centers < 2) throw std::invalid_argument("need at least two centers");
  if (!(spread > 0.0)) throw std::invalid_argument("spread must be positive");
  DeterministicRng rng(seed);
  BlobData data;
  data.centers = draw_centers(rng, dim, n_centers);
  data.features.resize(n, dim);
  data.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index cls = i % n_centers;
    data.labels[i] = static_cast<std::int32_t>(cls);
    for (Eigen::Index d = 0; d < dim; ++d)
      data.features(i, d) = data.centers(cls, d) + spread * rng.gaussian();
  }
  return data;
}

namespace {

constexpr char kMagic[4] = {'O', 'T', 'L', 'M'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 4 + 8 + 4;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

void save_matrix(const std::string& path, const ScoreMatrix& matrix) {
  validate_scores(matrix);
  std::string buf;
  buf.reserve(kHeaderBytes +
              static_cast<std::size_t>(matrix.size()) * 4);
  buf.append(kMagic, 4);
  put_u32(buf, kVersion);
  put_u64(buf, static_cast<std::uint64_t>(matrix.rows()));
  put_u32(buf, static_cast<std::uint32_t>(matrix.cols()));
  for (Eigen::Index r = 0; r < matrix.rows(); ++r)
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
      const float f = static_cast<float>(matrix(r, c));
      if (!std::isfinite(f))
        throw FileError("value at (" + std::to_string(r) + ", " +
                        std::to_string(c) +
                        ") does not fit a finite 32-bit float");
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      put_u32(buf, bits);
    }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError("cannot open " + path + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw FileError("short write to " + path);
}

ScoreMatrix load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open " + path + " for reading");
  std::string raw((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  if (in.bad()) throw FileError("read failure on " + path);
  if (raw.size() < kHeaderBytes)
    throw FileError(path + ": header truncated, " +
                    std::to_string(raw.size()) + " of " +
                    std::to_string(kHeaderBytes) + " bytes");
  const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
  if (std::memcmp(p, kMagic, 4) != 0)
    throw FileError(path + ": bad magic at offset 0, expected 'OTLM'");
  const std::uint32_t version = get_u32(p + 4);
  if (version != kVersion)
    throw FileError(path + ": unsupported version " + std::to_string(version) +
                    " at offset 4");
  const std::uint64_t n = get_u64(p + 8);
  const std::uint32_t k = get_u32(p + 16);
  if (n < 1 || k < 2)
    throw FileError(path + ": header declares " + std::to_string(n) + "x" +
                    std::to_string(k) + ", need at least 1x2");
  const std::uint64_t expected = kHeaderBytes + n * static_cast<std::uint64_t>(k) * 4;
  if (raw.size() != expected)
    throw FileError(path + ": payload truncated, expected " +
                    std::to_string(expected) + " bytes but file ends at offset " +
                    std::to_string(raw.size()));
  ScoreMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  const unsigned char* cursor = p + kHeaderBytes;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c, cursor += 4) {
      const std::uint32_t bits = get_u32(cursor);
      float f;
      std::memcpy(&f, &bits, 4);
      if (!std::isfinite(f))
        throw FileError(
            path + ": non-finite value at offset " +
            std::to_string(static_cast<std::size_t>(
                cursor - reinterpret_cast<const unsigned char*>(raw.data()))));
      m(r, c) = static_cast<double>(f);
    }
  return m;
}

std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

namespace {

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FileError("cannot open " + path + " for writing");
  return out;
}

void finish_csv(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw FileError("short write to " + path);
}

}  // namespace

void export_matrix_csv(const std::string& path, const ScoreMatrix& matrix) {
  auto out = open_csv(path);
  for (Eigen::Index c = 0; c < matrix.cols(); ++c)
    out << (c ? "," : "") << 'c' << c;
  out << '\n';
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < matrix.cols(); ++c)
      out << (c ? "," : "") << format_g9(matrix(r, c));
    out << '\n';
  }
  finish_csv(out, path);
}

void export_labels_csv(const std::string& path, const LabelVector& labels) {
  auto out = open_csv(path);
  out << "index,label\n";
  for (Eigen::Index i = 0; i < labels.size(); ++i)
    out << i << ',' << labels[i] << '\n';
  finish_csv(out, path);
}

LabelVector load_labels_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open " + path + " for reading");
  std::string line;
  if (!std::getline(in, line))
    throw FileError(path + ": missing header line");
  std::vector<std::int32_t> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw FileError(path + ": missing label column on line " +
                      std::to_string(line_no));
    try {
      labels.push_back(
          static_cast<std::int32_t>(std::stol(line.substr(comma + 1))));
    } catch (const std::exception&) {
      throw FileError(path + ": unparseable label on line " +
                      std::to_string(line_no));
    }
  }
  if (labels.empty()) throw FileError(path + ": no label rows");
  LabelVector out(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = labels[i];
  return out;
}

void export_trace_csv(const std::string& path,
                      const std::vector<TraceEntry>& trace) {
  auto out = open_csv(path);
  out << "iteration,alpha,std,accepted\n";
  for (const TraceEntry& t : trace)
    out << t.iteration << ',' << format_g9(t.step) << ','
        << format_g9(t.std_value) << ',' << (t.accepted ? 1 : 0) << '\n';
  finish_csv(out, path);
}

void export_comparison_csv(
    const std::string& path,
    const std::vector<std::pair<std::int64_t, BalancerComparison>>& rows) {
  auto out = open_csv(path);
  out << "k,std_otl,std_sk,iters_otl,iters_sk,wall_ms_otl,wall_ms_sk\n";
  for (const auto& [k, cmp] : rows)
    out << k << ',' << format_g9(cmp.translation_std) << ','
        << format_g9(cmp.sinkhorn_std) << ',' << cmp.translation_iters << ','
        << cmp.sinkhorn_iters << ',' << format_g9(cmp.translation_ms) << ','
        << format_g9(cmp.sinkhorn_ms) << '\n';
  finish_csv(out, path);
}

ScoreMatrix load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open " + path + " for reading");
  std::string line;
  if (!std::getline(in, line))
    throw FileError(path + ": missing header line");
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw FileError(path + ": unparseable cell '" + cell + "' on line " +
                        std::to_string(line_no));
      }
    }
    if (width == 0) width = row.size();
    if (row.size() != width)
      throw FileError(path + ": ragged row on line " + std::to_string(line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FileError(path + ": no data rows");
  ScoreMatrix m(static_cast<Eigen::Index>(rows.size()),
                static_cast<Eigen::Index>(width));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  return m;
}

}  // namespace otl
