#include "ptkk/kk.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "ptkk/errors.hpp"
#include "ptkk/parallel.hpp"

namespace ptkk {

FrequencyGrid FrequencyGrid::symmetric(double half_width, std::size_t n_points) {
  FrequencyGrid g{half_width, n_points};
  g.validate();
  return g;
}

void FrequencyGrid::validate() const {
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw ValidationError("grid half-width must be positive and finite");
  if (n_points < 3) throw ValidationError("grid needs at least 3 points");
  if (n_points % 2 == 0) throw ValidationError("grid n_points must be odd so that omega = 0 is a node");
}

FrequencyGrid FrequencyGrid::from_samples(std::span<const double> w, double rel_tol) {
  if (w.size() < 3) throw ValidationError("spectrum needs at least 3 frequency samples");
  if (w.size() % 2 == 0)
    throw ValidationError("spectrum needs an odd number of samples (omega = 0 must be a node)");
  const FrequencyGrid g{w.back(), w.size()};
  if (!(g.half_width > 0.0)) throw ValidationError("frequencies must increase from -W to W");
  const double h = g.spacing();
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (std::abs(w[i] - g.at(i)) > rel_tol * h) {
      std::ostringstream os;
      os << "non-uniform or non-symmetric frequency grid at row " << i + 1 << " (omega = " << w[i]
         << ", expected " << g.at(i) << ")";
      throw ValidationError(os.str());
    }
  }
  return g;
}

std::vector<double> FrequencyGrid::omegas() const {
  std::vector<double> w(n_points);
  for (std::size_t i = 0; i < n_points; ++i) w[i] = at(i);
  return w;
}

SampledResponse SampledResponse::sample(const RationalResponse& r, const FrequencyGrid& grid,
                                        bool remove_offset) {
  grid.validate();
  r.validate();
  SampledResponse s;
  s.grid = grid;
  s.offset_removed = remove_offset;
  s.values.resize(grid.n_points);
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const cplx w{grid.at(i), 0.0};
    s.values[i] = remove_offset ? r.resolvent(w) : r(w);
  }
  return s;
}

void SampledResponse::validate() const {
  grid.validate();
  if (values.size() != grid.n_points) throw ValidationError("sample count does not match the grid");
}

std::vector<double> SampledResponse::real_part() const {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i].real();
  return out;
}

std::vector<double> SampledResponse::imag_part() const {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i].imag();
  return out;
}

namespace {

constexpr int kSeriesTerms = 16;
constexpr double kSeriesCutoff = 0.05;

// sum_k u^k / (k + shift)
double log_series(double u, int shift) {
  double acc = 0.0;
  double p = 1.0;
  for (int k = 0; k < kSeriesTerms; ++k) {
    acc += p / (k + shift);
    p *= u;
  }
  return acc;
}

// Integrals of the a/w' + b/w'^2 tail against 1/(w' - w) over |w'| > W.
// d_hi = W - w and d_lo = W + w are passed separately so the edge nodes can
// be regularised by a half cell.
double tail_integral(double a, double b, double w, double half_width, double d_hi, double d_lo) {
  const double big_w = half_width;
  const double u = w / big_w;
  double ia;
  double ib;
  if (std::abs(u) < kSeriesCutoff) {
    ia = (log_series(u, 1) + log_series(-u, 1)) / big_w;
    ib = (log_series(u, 2) - log_series(-u, 2)) / (big_w * big_w);
  } else {
    const double up = std::log(big_w / d_hi);
    const double lo = std::log(d_lo / big_w);
    ia = (up + lo) / w;
    ib = ((up - w / big_w) + (lo - w / big_w)) / (w * w);
  }
  return a * ia + b * ib;
}

double taper_weight(double w, double half_width, double fraction) {
  const double inner = half_width * (1.0 - fraction);
  const double aw = std::abs(w);
  if (aw <= inner) return 1.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * (aw - inner) / (half_width * fraction)));
}

}  // namespace

std::vector<double> hilbert_transform(std::span<const double> samples, const FrequencyGrid& grid,
                                      const HilbertOptions& options) {
  grid.validate();
  if (samples.size() != grid.n_points) throw ValidationError("sample count does not match the grid");
  if (options.taper_fraction < 0.0 || options.taper_fraction >= 1.0)
    throw ValidationError("taper fraction must be in [0, 1)");

  const std::size_t n = grid.n_points;
  const double h = grid.spacing();
  const double big_w = grid.half_width;

  std::vector<double> f(samples.begin(), samples.end());
  if (options.taper_fraction > 0.0)
    for (std::size_t i = 0; i < n; ++i) f[i] *= taper_weight(grid.at(i), big_w, options.taper_fraction);

  std::vector<double> inv(n);
  inv[0] = 0.0;
  for (std::size_t k = 1; k < n; ++k) inv[k] = 1.0 / (static_cast<double>(k) * h);

  double a = 0.0;
  double b = 0.0;
  if (options.tail == TailModel::asymptotic) {
    a = big_w * (f[n - 1] - f[0]) / 2.0;
    b = big_w * big_w * (f[n - 1] + f[0]) / 2.0;
  }

  const std::ptrdiff_t mid = static_cast<std::ptrdiff_t>(n - 1) / 2;
  std::vector<double> out(n);
  parallel_for(n, options.threads, [&](std::size_t i) {
    const double fi = f[i];
    double s = 0.0;
    for (std::size_t j = 0; j < i; ++j) {
      const double wj = (j == 0) ? 0.5 : 1.0;
      s -= wj * (f[j] - fi) * inv[i - j];
    }
    double slope;
    if (i == 0) slope = (f[1] - f[0]) / h;
    else if (i == n - 1) slope = (f[n - 1] - f[n - 2]) / h;
    else slope = (f[i + 1] - f[i - 1]) / (2.0 * h);
    s += ((i == 0 || i == n - 1) ? 0.5 : 1.0) * slope;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double wj = (j == n - 1) ? 0.5 : 1.0;
      s += wj * (f[j] - fi) * inv[j - i];
    }
    s *= h;

    const double d_hi = std::max(static_cast<double>(n - 1 - i) * h, 0.5 * h);
    const double d_lo = std::max(static_cast<double>(i) * h, 0.5 * h);
    s += fi * std::log(d_hi / d_lo);
    if (options.tail == TailModel::asymptotic) {
      const double w = static_cast<double>(static_cast<std::ptrdiff_t>(i) - mid) * h;
      s += tail_integral(a, b, w, big_w, d_hi, d_lo);
    }
    out[i] = s / std::numbers::pi;
  });
  return out;
}

double l2_norm(std::span<const double> x, const FrequencyGrid& grid) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc * grid.spacing());
}

KKResult standard_kk(const SampledResponse& samples, const HilbertOptions& options,
                     KKRelation relation) {
  samples.validate();
  if (!samples.offset_removed)
    throw ValidationError("KK needs offset-removed samples (use r - 1, which decays at large |omega|)");
  KKResult k;
  k.relation = relation;
  const std::vector<double> re = samples.real_part();
  const std::vector<double> im = samples.imag_part();
  const std::size_t n = re.size();
  k.standard_residual.resize(n);
  if (relation == KKRelation::real_from_imag) {
    k.hilbert = hilbert_transform(im, samples.grid, options);
    for (std::size_t i = 0; i < n; ++i) k.standard_residual[i] = re[i] - k.hilbert[i];
  } else {
    k.hilbert = hilbert_transform(re, samples.grid, options);
    for (std::size_t i = 0; i < n; ++i) k.standard_residual[i] = im[i] + k.hilbert[i];
  }
  k.correction.assign(n, 0.0);
  k.corrected_residual = k.standard_residual;
  k.l2_standard = l2_norm(k.standard_residual, samples.grid);
  k.l2_corrected = k.l2_standard;
  k.reduction_factor = 1.0;
  return k;
}

std::vector<PoleData> select_uhp(std::span<const PoleData> all) {
  std::vector<PoleData> out;
  for (const PoleData& p : all) {
    const HalfPlane hp = p.half_plane();
    if (hp == HalfPlane::boundary) {
      std::ostringstream os;
      os << "pole at " << p.location << " lies on the real axis; residue correction undefined";
      throw BoundaryError(os.str());
    }
    if (hp == HalfPlane::upper) {
      if (p.degenerate) throw DegenerateError("coalesced UHP poles; residue correction undefined");
      out.push_back(p);
    }
  }
  return out;
}

std::vector<double> residue_correction(std::span<const PoleData> uhp_poles, const FrequencyGrid& grid,
                                       KKRelation relation) {
  grid.validate();
  for (const PoleData& p : uhp_poles) {
    if (!p.in_uhp()) {
      std::ostringstream os;
      os << "residue correction needs poles strictly in the UHP, got " << p.location;
      throw BoundaryError(os.str());
    }
  }
  std::vector<double> out(grid.n_points, 0.0);
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const cplx w{grid.at(i), 0.0};
    double acc = 0.0;
    for (const PoleData& p : uhp_poles) {
      const cplx term = p.residue / (w - p.location);
      acc += 2.0 * (relation == KKRelation::real_from_imag ? term.real() : term.imag());
    }
    out[i] = acc;
  }
  return out;
}

KKResult corrected_kk(const SampledResponse& samples, std::span<const PoleData> uhp_poles,
                      const HilbertOptions& options, KKRelation relation) {
  KKResult k = standard_kk(samples, options, relation);
  k.correction = residue_correction(uhp_poles, samples.grid, relation);
  for (std::size_t i = 0; i < k.correction.size(); ++i)
    k.corrected_residual[i] = k.standard_residual[i] - k.correction[i];
  k.l2_corrected = l2_norm(k.corrected_residual, samples.grid);
  k.reduction_factor = k.l2_corrected > 0.0 ? k.l2_standard / k.l2_corrected
                                            : std::numeric_limits<double>::infinity();
  return k;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& field, std::size_t line, const char* column) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
    std::ostringstream os;
    os << "malformed CSV: line " << line << ", column '" << column << "': cannot parse '" << field
       << "' as a finite number";
    throw ValidationError(os.str());
  }
  return v;
}

}  // namespace

SampledResponse read_spectrum_csv(std::istream& in, bool offset_removed) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ValidationError("malformed CSV: empty input (header omega,re,im required)");
  ++lineno;
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
      static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF)
    line.erase(0, 3);
  {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(trim(c));
    if (cols != std::vector<std::string>{"omega", "re", "im"})
      throw ValidationError("malformed CSV: header must be 'omega,re,im', got '" + trim(line) + "'");
  }
  std::vector<double> w;
  std::vector<cplx> v;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(trim(c));
    if (cols.size() != 3) {
      std::ostringstream os;
      os << "malformed CSV: line " << lineno << " has " << cols.size() << " fields, expected 3";
      throw ValidationError(os.str());
    }
    w.push_back(parse_number(cols[0], lineno, "omega"));
    v.emplace_back(parse_number(cols[1], lineno, "re"), parse_number(cols[2], lineno, "im"));
  }
  SampledResponse s;
  s.grid = FrequencyGrid::from_samples(w);
  s.values = std::move(v);
  s.offset_removed = offset_removed;
  return s;
}

SampledResponse read_spectrum_csv(const std::string& path, bool offset_removed) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open spectrum file '" + path + "'");
  return read_spectrum_csv(in, offset_removed);
}

void write_spectrum_csv(std::ostream& out, const SampledResponse& s) {
  s.validate();
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << "omega,re,im\n";
  for (std::size_t i = 0; i < s.values.size(); ++i)
    out << s.grid.at(i) << ',' << s.values[i].real() << ',' << s.values[i].imag() << '\n';
  out.precision(old);
}

}  // namespace ptkk
