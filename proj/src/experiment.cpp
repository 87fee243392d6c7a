#include "polymrf/experiment.hpp"

#include "polymrf/error.hpp"
#include "polymrf/oracle.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <random>
#include <sstream>

namespace polymrf {

namespace {

std::string trim(const std::string& s)
{
  auto const b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) { return {}; }
  auto const e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) { out.push_back(trim(item)); }
  return out;
}

[[noreturn]] void parse_error(int line, const std::string& what)
{
  raise(ErrorCode::ConfigParse, "line " + std::to_string(line) + ": " + what);
}

double to_double(const std::string& v, int line)
{
  try {
    size_t used = 0;
    double const d = std::stod(v, &used);
    if (used != v.size()) { parse_error(line, "trailing characters in number '" + v + "'"); }
    return d;
  } catch (const std::logic_error&) {
    parse_error(line, "expected a number, got '" + v + "'");
  }
}

long long to_int(const std::string& v, int line)
{
  try {
    size_t used = 0;
    long long const i = std::stoll(v, &used);
    if (used != v.size()) { parse_error(line, "trailing characters in integer '" + v + "'"); }
    return i;
  } catch (const std::logic_error&) {
    parse_error(line, "expected an integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& v, int line)
{
  if (v == "true" || v == "1" || v == "yes" || v == "on") { return true; }
  if (v == "false" || v == "0" || v == "no" || v == "off") { return false; }
  parse_error(line, "expected a boolean, got '" + v + "'");
}

// "1,3,5" or "1..5"
std::vector<int> to_int_list(const std::string& v, int line)
{
  std::vector<int> out;
  for (auto const& item : split(v, ',')) {
    auto const dots = item.find("..");
    if (dots != std::string::npos) {
      long long const lo = to_int(trim(item.substr(0, dots)), line);
      long long const hi = to_int(trim(item.substr(dots + 2)), line);
      if (hi < lo) { parse_error(line, "empty range '" + item + "'"); }
      for (long long i = lo; i <= hi; ++i) { out.push_back(static_cast<int>(i)); }
    } else {
      out.push_back(static_cast<int>(to_int(item, line)));
    }
  }
  return out;
}

int positive(long long v, int line, const std::string& key)
{
  if (v < 1) { parse_error(line, key + " must be positive"); }
  return static_cast<int>(v);
}

void put_u32(std::ostream& out, std::uint32_t v)
{
  char b[4];
  for (int i = 0; i < 4; ++i) { b[i] = static_cast<char>((v >> (8 * i)) & 0xff); }
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v)
{
  char b[8];
  for (int i = 0; i < 8; ++i) { b[i] = static_cast<char>((v >> (8 * i)) & 0xff); }
  out.write(b, 8);
}

std::uint64_t get_le(const unsigned char* p, int bytes)
{
  std::uint64_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) { v = (v << 8) | p[i]; }
  return v;
}

bool nests(const DualConfig& from, const DualConfig& to)
{
  if (from.deg > to.deg) { return false; }
  double const eps = 1e-12 * std::max(1.0, to.domain().width());
  return std::all_of(from.knots.begin(), from.knots.end(), [&](double t) {
    return std::any_of(to.knots.begin(), to.knots.end(), [&](double s) { return std::abs(s - t) <= eps; });
  });
}

struct Solved {
  DualConfig config;
  DualCoefficients dual;
  double energy;
  int family; // entries share warm starts only within a family of equal unaries
};

// Solves one entry with the best nested warm start among earlier entries.
Solution solve_entry(const Problem& problem, const RunConfig& config, std::vector<Solved>& done, int family)
{
  SolverOptions opts = config.solver;
  if (config.warm_start) {
    Solved const* from = nullptr;
    for (auto const& s : done) {
      if (s.family == family && nests(s.config, problem.config) && (!from || s.energy > from->energy)) { from = &s; }
    }
    if (from) { opts.warm_dual = embed_dual(from->dual, from->config, problem.config); }
  }
  ConicProgram const prog = assemble(problem);
  Solution sol = pdhg_solve(prog, opts);
  done.push_back({problem.config, sol.dual, sol.dual_energy, family});
  return sol;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

RunConfig parse_config(std::istream& in)
{
  RunConfig c;
  std::vector<int> pieces;
  std::vector<int> degrees;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string const t = trim(line);
    if (t.empty() || t[0] == '#') { continue; }
    auto const eq = t.find('=');
    if (eq == std::string::npos) { parse_error(lineno, "expected key=value"); }
    std::string const key = trim(t.substr(0, eq));
    std::string const val = trim(t.substr(eq + 1));
    if (val.empty()) { parse_error(lineno, "empty value for '" + key + "'"); }

    if (key == "source") {
      if (val != "synthetic" && val != "volume") { parse_error(lineno, "source must be synthetic or volume"); }
      c.source = val;
    } else if (key == "volume") {
      c.volume = val;
    } else if (key == "domain") {
      auto const parts = split(val, ',');
      if (parts.size() != 2) { parse_error(lineno, "domain must be a,b"); }
      double const a = to_double(parts[0], lineno);
      double const b = to_double(parts[1], lineno);
      if (!(a < b)) { parse_error(lineno, "domain needs a < b"); }
      c.domain = Interval(a, b);
    } else if (key == "grid") {
      auto const x = val.find('x');
      if (x == std::string::npos) { parse_error(lineno, "grid must be WxH"); }
      c.width = positive(to_int(val.substr(0, x), lineno), lineno, key);
      c.height = positive(to_int(val.substr(x + 1), lineno), lineno, key);
    } else if (key == "metric") {
      if (val == "tv") {
        c.metric = Metric::TV;
      } else if (val == "potts") {
        c.metric = Metric::Potts;
      } else {
        parse_error(lineno, "metric must be tv or potts");
      }
    } else if (key == "pieces") {
      pieces = to_int_list(val, lineno);
    } else if (key == "degree") {
      degrees = to_int_list(val, lineno);
    } else if (key == "hierarchy") {
      for (auto const& item : split(val, ',')) {
        auto const colon = item.find(':');
        if (colon == std::string::npos) { parse_error(lineno, "hierarchy entries are K:deg"); }
        c.hierarchy.push_back({positive(to_int(trim(item.substr(0, colon)), lineno), lineno, "K"),
                               positive(to_int(trim(item.substr(colon + 1)), lineno), lineno, "deg")});
      }
    } else if (key == "seed") {
      c.seed = static_cast<std::uint64_t>(to_int(val, lineno));
    } else if (key == "output") {
      c.output = val;
    } else if (key == "unary_degree") {
      c.unary_degree = static_cast<int>(to_int(val, lineno));
      if (c.unary_degree < 0) { parse_error(lineno, "unary_degree must be >= 0"); }
    } else if (key == "unary_scale") {
      c.unary_scale = to_double(val, lineno);
    } else if (key == "edge_weight") {
      c.edge_weight = to_double(val, lineno);
      if (!(c.edge_weight > 0.0)) { parse_error(lineno, "edge_weight must be positive"); }
    } else if (key == "unary_pieces") {
      c.unary_pieces = positive(to_int(val, lineno), lineno, key);
    } else if (key == "baseline") {
      c.baseline = to_bool(val, lineno);
    } else if (key == "rounding") {
      if (val == "mode-mean") {
        c.rounding = RoundingScheme::ModeMean;
      } else if (val == "mean") {
        c.rounding = RoundingScheme::Mean;
      } else if (val == "knot-mean") {
        c.rounding = RoundingScheme::KnotMean;
      } else {
        parse_error(lineno, "rounding must be mode-mean, mean or knot-mean");
      }
    } else if (key == "warm_start") {
      c.warm_start = to_bool(val, lineno);
    } else if (key == "timing") {
      c.timing = to_bool(val, lineno);
    } else if (key == "oracle_points") {
      c.oracle_points = static_cast<int>(to_int(val, lineno));
      if (c.oracle_points < 2) { parse_error(lineno, "oracle_points must be >= 2"); }
    } else if (key == "labels") {
      c.labels = static_cast<int>(to_int(val, lineno));
      if (c.labels < 2) { parse_error(lineno, "labels must be >= 2"); }
    } else if (key == "noise") {
      c.noise = to_double(val, lineno);
    } else if (key == "plane_dx") {
      c.plane_dx = to_double(val, lineno);
    } else if (key == "plane_dy") {
      c.plane_dy = to_double(val, lineno);
    } else if (key == "max_iters") {
      c.solver.max_iters = positive(to_int(val, lineno), lineno, key);
    } else if (key == "check_every") {
      c.solver.check_every = positive(to_int(val, lineno), lineno, key);
    } else if (key == "rel_tol") {
      c.solver.rel_tol = to_double(val, lineno);
    } else if (key == "theta") {
      c.solver.theta = to_double(val, lineno);
      if (c.solver.theta < 0.0 || c.solver.theta > 1.0) { parse_error(lineno, "theta must lie in [0, 1]"); }
    } else if (key == "tau") {
      c.solver.tau = to_double(val, lineno);
    } else if (key == "sigma") {
      c.solver.sigma = to_double(val, lineno);
    } else if (key == "primal_weight") {
      c.solver.primal_weight = to_double(val, lineno);
      if (!(c.solver.primal_weight > 0.0)) { parse_error(lineno, "primal_weight must be positive"); }
    } else if (key == "restarts") {
      c.solver.restarts = to_bool(val, lineno);
    } else if (key == "steps") {
      if (val == "diagonal") {
        c.solver.steps = StepRule::Diagonal;
      } else if (val == "scalar") {
        c.solver.steps = StepRule::Scalar;
      } else {
        parse_error(lineno, "steps must be diagonal or scalar");
      }
    } else {
      parse_error(lineno, "unknown key '" + key + "'");
    }
  }

  if (!c.hierarchy.empty() && (!pieces.empty() || !degrees.empty())) {
    raise(ErrorCode::ConfigParse, "give either hierarchy or pieces/degree, not both");
  }
  if (c.hierarchy.empty()) {
    if (pieces.empty()) { pieces = {1}; }
    if (degrees.empty()) { raise(ErrorCode::ConfigParse, "hierarchy is empty: set hierarchy or degree"); }
    for (int k : pieces) {
      for (int d : degrees) {
        if (k < 1 || d < 1) { raise(ErrorCode::ConfigParse, "pieces and degrees must be positive"); }
        c.hierarchy.push_back({k, d});
      }
    }
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) { raise(ErrorCode::ConfigParse, "cannot open config " + path.string()); }
  return parse_config(in);
}

void write_report(std::ostream& out, const std::vector<ReportRow>& rows)
{
  out << "K,deg,dual_energy,rounded_energy,iters,seconds\n";
  for (auto const& r : rows) {
    out << r.pieces << ',' << r.deg << ',' << std::setprecision(12) << r.dual_energy << ',' << r.rounded_energy
        << ',' << r.iterations << ',' << std::fixed << std::setprecision(3) << r.seconds << std::defaultfloat
        << '\n';
  }
}

Problem synthetic_problem(const RunConfig& config, const Graph& graph)
{
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal;
  Problem pb;
  pb.graph = graph;
  pb.metric = config.metric;
  for (int u = 0; u < graph.num_vertices(); ++u) {
    std::vector<double> c(config.unary_degree + 1);
    for (double& v : c) { v = config.unary_scale * normal(rng); }
    pb.unaries.push_back(PiecewisePolynomial::single(from_unit_coordinates(Polynomial(c), config.domain), config.domain));
  }
  if (config.edge_weight != 1.0) { pb.edge_weights.assign(graph.num_edges(), config.edge_weight); }
  return pb;
}

Labeling round(const VertexMoments& y, RoundingScheme scheme)
{
  switch (scheme) {
  case RoundingScheme::ModeMean: return round_mode_mean(y);
  case RoundingScheme::Mean: return round_mean(y, MeanVariant::MomentMean);
  case RoundingScheme::KnotMean: return round_mean(y, MeanVariant::KnotWeighted);
  }
  return round_mode_mean(y);
}

HierarchyRun run_hierarchy(const RunConfig& config, const Graph& graph, const std::vector<PiecewisePolynomial>& unaries)
{
  HierarchyRun out;
  std::vector<Solved> done;
  for (auto const& entry : config.hierarchy) {
    auto const t0 = std::chrono::steady_clock::now();
    Problem pb;
    pb.graph = graph;
    pb.unaries = unaries;
    pb.metric = config.metric;
    pb.config = DualConfig::uniform(config.domain, entry.pieces, entry.deg, config.metric);
    if (config.edge_weight != 1.0) { pb.edge_weights.assign(graph.num_edges(), config.edge_weight); }
    Solution const sol = solve_entry(pb, config, done, 0);
    Labeling x = round(sol.moments, config.rounding);
    ReportRow row;
    row.pieces = entry.pieces;
    row.deg = entry.deg;
    row.dual_energy = sol.dual_energy;
    row.rounded_energy = rounded_energy(x, pb);
    row.iterations = sol.iterations;
    row.seconds = config.timing ? seconds_since(t0) : 0.0;
    out.rows.push_back(row);
    out.labelings.push_back(std::move(x));
  }
  return out;
}

HierarchyRun run_hierarchy(const RunConfig& config)
{
  if (config.source != "synthetic") { raise(ErrorCode::ConfigParse, "hierarchy runs need source=synthetic"); }
  Graph const g = grid_graph(config.width, config.height);
  Problem const pb = synthetic_problem(config, g);
  return run_hierarchy(config, g, pb.unaries);
}

CostVolume ingest_cost_volume(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) { raise(ErrorCode::IoFailure, "cannot open cost volume " + path.string()); }
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) { raise(ErrorCode::IoFailure, "read error on " + path.string()); }
  constexpr size_t kHeader = 4 + 3 * 4 + 2 * 8;
  if (bytes.size() < kHeader) { raise(ErrorCode::Malformed, "truncated cost volume header"); }
  if (std::memcmp(bytes.data(), "MCV1", 4) != 0) { raise(ErrorCode::Malformed, "bad cost volume magic"); }
  CostVolume v;
  v.width = static_cast<std::uint32_t>(get_le(bytes.data() + 4, 4));
  v.height = static_cast<std::uint32_t>(get_le(bytes.data() + 8, 4));
  v.labels = static_cast<std::uint32_t>(get_le(bytes.data() + 12, 4));
  v.a = std::bit_cast<double>(get_le(bytes.data() + 16, 8));
  v.b = std::bit_cast<double>(get_le(bytes.data() + 24, 8));
  if (v.width == 0 || v.height == 0 || v.labels == 0) { raise(ErrorCode::Malformed, "zero cost volume dimension"); }
  if (!std::isfinite(v.a) || !std::isfinite(v.b) || (v.labels > 1 && !(v.a < v.b))) {
    raise(ErrorCode::Malformed, "invalid label range");
  }
  std::uint64_t const count = std::uint64_t{v.width} * v.height * v.labels;
  if (bytes.size() - kHeader != count * 4) {
    raise(ErrorCode::Malformed, "cost volume holds " + std::to_string((bytes.size() - kHeader) / 4) +
                                    " values, header announces " + std::to_string(count));
  }
  v.values.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    v.values[i] = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(bytes.data() + kHeader + 4 * i, 4)));
    if (!std::isfinite(v.values[i])) { raise(ErrorCode::Malformed, "non-finite cost value"); }
  }
  return v;
}

void write_cost_volume(const std::filesystem::path& path, const CostVolume& v)
{
  if (v.values.size() != std::size_t{v.width} * v.height * v.labels) {
    raise(ErrorCode::ShapeMismatch, "cost volume size differs from its dimensions");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) { raise(ErrorCode::IoFailure, "cannot write " + path.string()); }
  out.write("MCV1", 4);
  put_u32(out, v.width);
  put_u32(out, v.height);
  put_u32(out, v.labels);
  put_u64(out, std::bit_cast<std::uint64_t>(v.a));
  put_u64(out, std::bit_cast<std::uint64_t>(v.b));
  for (float f : v.values) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }
  if (!out) { raise(ErrorCode::IoFailure, "write error on " + path.string()); }
}

double synthetic_plane(const RunConfig& config, int row, int col)
{
  double const d = 0.5 * (config.labels - 1) + config.plane_dx * (col - 0.5 * config.width) +
                   config.plane_dy * (row - 0.5 * config.height);
  return std::clamp(d, 0.0, config.labels - 1.0);
}

CostVolume synthetic_volume(const RunConfig& config)
{
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal;
  CostVolume v;
  v.width = static_cast<std::uint32_t>(config.width);
  v.height = static_cast<std::uint32_t>(config.height);
  v.labels = static_cast<std::uint32_t>(config.labels);
  v.a = 0.0;
  v.b = config.labels - 1.0;
  v.values.resize(std::size_t{v.width} * v.height * v.labels);
  for (std::uint32_t r = 0; r < v.height; ++r) {
    for (std::uint32_t c = 0; c < v.width; ++c) {
      double const d = synthetic_plane(config, static_cast<int>(r), static_cast<int>(c));
      for (std::uint32_t l = 0; l < v.labels; ++l) {
        double const cost = config.unary_scale * (l - d) * (l - d) / config.labels + config.noise * normal(rng);
        v.at(r, c, l) = static_cast<float>(cost);
      }
    }
  }
  return v;
}

void write_pgm(const std::filesystem::path& path, const Labeling& x, int width, int height, double a, double b)
{
  if (static_cast<int>(x.size()) != width * height) { raise(ErrorCode::ShapeMismatch, "labeling size differs from image"); }
  std::ofstream out(path, std::ios::binary);
  if (!out) { raise(ErrorCode::IoFailure, "cannot write " + path.string()); }
  out << "P5\n" << width << ' ' << height << "\n65535\n";
  for (double v : x) {
    double const t = b > a ? (v - a) / (b - a) : 0.0;
    auto const q = static_cast<std::uint16_t>(std::lround(std::clamp(t, 0.0, 1.0) * 65535.0));
    char const bytes[2] = {static_cast<char>(q >> 8), static_cast<char>(q & 0xff)};
    out.write(bytes, 2);
  }
  if (!out) { raise(ErrorCode::IoFailure, "write error on " + path.string()); }
}

Problem stereo_problem(const RunConfig& config, const CostVolume& volume, int unary_pieces, int fit_deg)
{
  if (volume.labels < 2) { raise(ErrorCode::ConfigMismatch, "stereo needs at least two labels"); }
  Interval const unit(-1.0, 1.0);
  Problem pb;
  pb.graph = grid_graph(static_cast<int>(volume.width), static_cast<int>(volume.height));
  pb.metric = config.metric;
  std::vector<double> knots(unary_pieces + 1);
  for (int k = 0; k <= unary_pieces; ++k) { knots[k] = -1.0 + 2.0 * k / unary_pieces; }
  knots.back() = 1.0;
  std::vector<Sample> samples(volume.labels);
  for (std::uint32_t r = 0; r < volume.height; ++r) {
    for (std::uint32_t c = 0; c < volume.width; ++c) {
      for (std::uint32_t l = 0; l < volume.labels; ++l) {
        samples[l] = {-1.0 + 2.0 * l / (volume.labels - 1), static_cast<double>(volume.at(r, c, l))};
      }
      pb.unaries.push_back(fit_piecewise_under_approx(samples, knots, fit_deg));
    }
  }
  double const w = config.metric == Metric::TV ? config.edge_weight * 0.5 * (volume.b - volume.a)
                                               : config.edge_weight;
  if (w != 1.0) { pb.edge_weights.assign(pb.graph.num_edges(), w); }
  pb.config = DualConfig::uniform(unit, 1, fit_deg, config.metric);
  return pb;
}

StereoRun run_stereo(const RunConfig& config, const CostVolume& volume)
{
  StereoRun out;
  std::vector<Solved> done;
  std::map<std::pair<int, int>, Problem> cache; // (unary pieces, fit degree) -> fitted problem
  Interval const unit(-1.0, 1.0);

  struct Job {
    std::string name;
    int unary_pieces;
    int fit_deg;
    HierarchyEntry entry;
  };
  std::vector<Job> jobs;
  if (config.baseline) {
    int const n = static_cast<int>(volume.labels) - 1;
    jobs.push_back({"baseline", n, 1, {n, 1}});
  }
  for (auto const& e : config.hierarchy) {
    jobs.push_back({"K" + std::to_string(e.pieces) + "_deg" + std::to_string(e.deg), config.unary_pieces, config.unary_degree, e});
  }

  MeanVariant const variant =
    config.rounding == RoundingScheme::KnotMean ? MeanVariant::KnotWeighted : MeanVariant::MomentMean;
  for (auto const& job : jobs) {
    auto const t0 = std::chrono::steady_clock::now();
    auto const key = std::make_pair(job.unary_pieces, job.fit_deg);
    if (!cache.contains(key)) { cache.emplace(key, stereo_problem(config, volume, job.unary_pieces, job.fit_deg)); }
    Problem pb = cache.at(key);
    pb.config = DualConfig::uniform(unit, job.entry.pieces, job.entry.deg, config.metric);
    int const family = job.unary_pieces * 1000 + job.fit_deg;
    Solution const sol = solve_entry(pb, config, done, family);
    Labeling const t = round_mean(sol.moments, variant);
    ReportRow row;
    row.pieces = job.entry.pieces;
    row.deg = job.entry.deg;
    row.dual_energy = sol.dual_energy;
    row.rounded_energy = rounded_energy(t, pb);
    row.iterations = sol.iterations;
    row.seconds = config.timing ? seconds_since(t0) : 0.0;
    Labeling x(t.size());
    for (size_t i = 0; i < t.size(); ++i) { x[i] = volume.a + 0.5 * (t[i] + 1.0) * (volume.b - volume.a); }
    out.run.rows.push_back(row);
    out.run.labelings.push_back(std::move(x));
    out.names.push_back(job.name);
  }
  return out;
}

namespace {

int exit_code(ErrorCode code)
{
  switch (code) {
  case ErrorCode::ConfigParse:
  case ErrorCode::ConfigMismatch:
  case ErrorCode::Malformed:
  case ErrorCode::IoFailure:
  case ErrorCode::InvalidArgument:
  case ErrorCode::InsufficientSamples:
  case ErrorCode::NotAChain:
  case ErrorCode::ShapeMismatch:
  case ErrorCode::DegreeTooSmall: return 2;
  default: return 3;
  }
}

void write_file_report(const std::filesystem::path& path, const std::vector<ReportRow>& rows, std::ostream& out)
{
  std::ofstream f(path);
  if (!f) { raise(ErrorCode::IoFailure, "cannot write " + path.string()); }
  write_report(f, rows);
  write_report(out, rows);
}

void prepare_output(const RunConfig& config)
{
  std::error_code ec;
  std::filesystem::create_directories(config.output, ec);
  if (ec) { raise(ErrorCode::IoFailure, "cannot create " + config.output.string() + ": " + ec.message()); }
}

int cmd_hierarchy(const RunConfig& config, std::ostream& out)
{
  prepare_output(config);
  HierarchyRun const run = run_hierarchy(config);
  write_file_report(config.output / "report.csv", run.rows, out);
  return 0;
}

int cmd_stereo(const RunConfig& config, std::ostream& out)
{
  prepare_output(config);
  CostVolume const volume = config.source == "volume" ? ingest_cost_volume(config.volume) : synthetic_volume(config);
  StereoRun const run = run_stereo(config, volume);
  for (size_t i = 0; i < run.names.size(); ++i) {
    write_pgm(config.output / ("disparity_" + run.names[i] + ".pgm"), run.run.labelings[i],
              static_cast<int>(volume.width), static_cast<int>(volume.height), volume.a, volume.b);
  }
  write_file_report(config.output / "report.csv", run.run.rows, out);
  return 0;
}

int cmd_oracle(const RunConfig& config, std::ostream& out)
{
  prepare_output(config);
  if (config.height != 1 && config.width != 1) { raise(ErrorCode::NotAChain, "oracle-compare needs a Wx1 grid"); }
  Graph const g = grid_graph(config.width, config.height);
  Problem pb = synthetic_problem(config, g);
  HierarchyRun const run = run_hierarchy(config, g, pb.unaries);
  pb.config = DualConfig::uniform(config.domain, 1, 1, config.metric);
  double const dp = dp_chain(pb, GridSpec{config.oracle_points}).value;
  std::ofstream f(config.output / "oracle.csv");
  if (!f) { raise(ErrorCode::IoFailure, "cannot write oracle.csv"); }
  for (std::ostream* o : {static_cast<std::ostream*>(&f), &out}) {
    *o << "K,deg,dual_energy,dp_value,gap\n";
    for (auto const& r : run.rows) {
      *o << r.pieces << ',' << r.deg << ',' << std::setprecision(12) << r.dual_energy << ',' << dp << ','
         << dp - r.dual_energy << '\n';
    }
  }
  return 0;
}

int cmd_make_synth(const RunConfig& config, std::ostream& out)
{
  if (config.volume.empty()) { raise(ErrorCode::ConfigParse, "make-synth needs volume=<output path>"); }
  write_cost_volume(config.volume, synthetic_volume(config));
  out << "wrote " << config.volume.string() << '\n';
  return 0;
}

} // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Piecewise polynomial lifting for continuous MRFs"};
  app.require_subcommand(1);
  std::string config_path;
  std::map<std::string, int (*)(const RunConfig&, std::ostream&)> const commands{
    {"hierarchy", cmd_hierarchy}, {"stereo", cmd_stereo}, {"oracle-compare", cmd_oracle}, {"make-synth", cmd_make_synth}};
  std::map<std::string, std::string> const help{
    {"hierarchy", "solve a (K, deg) hierarchy on a synthetic grid instance"},
    {"stereo", "fit and solve a cost volume, writing PGM disparities"},
    {"oracle-compare", "compare dual energies against the chain DP oracle"},
    {"make-synth", "write a synthetic planar cost volume"}};
  for (auto const& [name, fn] : commands) {
    app.add_subcommand(name, help.at(name))->add_option("config", config_path, "key=value config file")->required();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int const code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  try {
    RunConfig const config = load_config(config_path);
    for (auto const* sub : app.get_subcommands()) { return commands.at(sub->get_name())(config, out); }
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

} // namespace polymrf
