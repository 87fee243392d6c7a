#pragma once

#include "polymrf/model.hpp"
#include "polymrf/rounding.hpp"
#include "polymrf/solver.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace polymrf {

struct HierarchyEntry {
  int pieces;
  int deg;
};

enum class RoundingScheme { ModeMean, Mean, KnotMean };

/// Flat key=value configuration shared by all subcommands. Blank lines and
/// lines starting with '#' are ignored.
struct RunConfig {
  std::string source = "synthetic"; // synthetic | volume
  std::filesystem::path volume;
  Interval domain{-1.0, 1.0};
  int width = 8;
  int height = 8;
  Metric metric = Metric::TV;
  std::vector<HierarchyEntry> hierarchy;
  std::uint64_t seed = 1;
  std::filesystem::path output = ".";

  int unary_degree = 4;
  double unary_scale = 1.0;
  double edge_weight = 1.0;
  int unary_pieces = 30;   // stereo fits, degree unary_degree
  bool baseline = false;   // stereo: add the per-label piecewise-linear run

  RoundingScheme rounding = RoundingScheme::ModeMean;
  bool warm_start = true;
  bool timing = true;      // false writes 0 seconds, for byte-identical reports
  int oracle_points = 2001;

  int labels = 64;         // make-synth
  double noise = 0.0;      // make-synth
  double plane_dx = 0.25;  // make-synth, labels per column
  double plane_dy = 0.1;   // make-synth, labels per row

  SolverOptions solver;
};

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

struct ReportRow {
  int pieces = 0;
  int deg = 0;
  double dual_energy = 0.0;
  double rounded_energy = 0.0;
  int iterations = 0;
  double seconds = 0.0;
};

void write_report(std::ostream& out, const std::vector<ReportRow>& rows);

/// Seeded random polynomial unaries of the configured degree on every vertex.
Problem synthetic_problem(const RunConfig& config, const Graph& graph);

struct HierarchyRun {
  std::vector<ReportRow> rows;
  std::vector<Labeling> labelings;
};

/// Solves every hierarchy entry in order on a fixed problem family, warm
/// starting each entry from the latest earlier entry whose dual embeds.
HierarchyRun run_hierarchy(const RunConfig& config, const Graph& graph,
                           const std::vector<PiecewisePolynomial>& unaries);
HierarchyRun run_hierarchy(const RunConfig& config);

Labeling round(const VertexMoments& y, RoundingScheme scheme);

/// Dense per-pixel label costs; values are indexed (row, col, label).
struct CostVolume {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t labels = 0;
  double a = 0.0;
  double b = 1.0;
  std::vector<float> values;

  float& at(std::uint32_t r, std::uint32_t c, std::uint32_t l)
  {
    return values[(static_cast<size_t>(r) * width + c) * labels + l];
  }
  float at(std::uint32_t r, std::uint32_t c, std::uint32_t l) const
  {
    return values[(static_cast<size_t>(r) * width + c) * labels + l];
  }
  double label_value(std::uint32_t l) const { return labels > 1 ? a + (b - a) * l / (labels - 1) : a; }
};

CostVolume ingest_cost_volume(const std::filesystem::path& path);
void write_cost_volume(const std::filesystem::path& path, const CostVolume& volume);

/// Planar ground truth d(r, c) = (labels - 1)/2 + dx (c - w/2) + dy (r - h/2), in
/// label units, with quadratic costs plus seeded Gaussian noise.
CostVolume synthetic_volume(const RunConfig& config);
double synthetic_plane(const RunConfig& config, int row, int col);

/// 16-bit binary PGM; labels in [a, b] map affinely to [0, 65535].
void write_pgm(const std::filesystem::path& path, const Labeling& x, int width, int height, double a, double b);

struct StereoRun {
  HierarchyRun run;
  std::vector<std::string> names; // one per row, e.g. "K5_deg3" or "baseline"
};

/// Fits per-pixel piecewise unaries of degree unary_degree and solves every
/// hierarchy entry; the optional baseline uses linear pieces between labels.
/// Labels are solved on [-1, 1] with TV weights rescaled so that reported
/// energies are in the volume's label units.
StereoRun run_stereo(const RunConfig& config, const CostVolume& volume);

/// Fitted stereo problem in the normalized coordinates, with a single-piece
/// dual configuration of degree fit_deg that callers replace.
Problem stereo_problem(const RunConfig& config, const CostVolume& volume, int unary_pieces, int fit_deg);

/// Subcommand entry point; returns the process exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace polymrf
