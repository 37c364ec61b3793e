#pragma once

#include "otl/balancer.hpp"
#include "otl/matrix_core.hpp"
#include "otl/sinkhorn.hpp"

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace otl {

using RngSeed = std::uint64_t;

// File problems: unreadable paths, bad headers, truncation, bad values.
struct FileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic source behind every generator. The engine is mt19937_64,
// whose output stream is pinned down bit-for-bit by the language standard;
// the mappings below are fixed here so results do not depend on a
// platform's distribution implementations.
//   uniform01: top 24 bits of one draw, scaled by 2^-24. Values are
//              multiples of 2^-24 in [0,1), so they survive a round-trip
//              through 32-bit floats unchanged.
//   gaussian:  Box-Muller on (0,1] x [0,1) built from 53-bit draws; the
//              second value of each pair is served before new draws.
class DeterministicRng {
 public:
  explicit DeterministicRng(RngSeed seed) : engine_(seed) {}

  double uniform01() {
    return static_cast<double>(engine_() >> 40) * 0x1p-24;
  }

  double gaussian();

  // integer in [0, n); the modulo bias is < 2^-44 for any n below 2^20
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

ScoreMatrix gen_uniform(std::int64_t n, std::int64_t k, RngSeed seed);

// Uniform base with `bias` added to one seed-chosen column, imitating the
// near-degenerate argmax histograms of an untrained network's outputs.
ScoreMatrix gen_skewed(std::int64_t n, std::int64_t k, RngSeed seed,
                       double bias);

struct BlobData {
  FeatureMatrix features;  // n x dim
  LabelVector labels;      // true blob index per row
  FeatureMatrix centers;   // n_centers x dim, unit norm
};

// Unit-sphere centers for gen_blobs; split out so callers can size the
// spread relative to the center geometry before generating points.
FeatureMatrix blob_centers(std::int64_t dim, std::int64_t n_centers,
                           RngSeed seed);

// Isotropic Gaussian clouds of width `spread` around unit-sphere centers;
// classes are assigned round-robin so counts differ by at most one.
BlobData gen_blobs(std::int64_t n, std::int64_t dim, std::int64_t n_centers,
                   double spread, RngSeed seed);

// Binary matrix container: magic "OTLM", u32 version (=1), u64 row count,
// u32 column count, then rows of IEEE-754 32-bit values, all little-endian.
void save_matrix(const std::string& path, const ScoreMatrix& matrix);
ScoreMatrix load_matrix(const std::string& path);

void export_matrix_csv(const std::string& path, const ScoreMatrix& matrix);
void export_labels_csv(const std::string& path, const LabelVector& labels);
LabelVector load_labels_csv(const std::string& path);
void export_trace_csv(const std::string& path,
                      const std::vector<TraceEntry>& trace);
void export_comparison_csv(
    const std::string& path,
    const std::vector<std::pair<std::int64_t, BalancerComparison>>& rows);
ScoreMatrix load_matrix_csv(const std::string& path);

// shortest decimal with 9 significant digits, the repo-wide text format
std::string format_g9(double v);

}  // namespace otl
