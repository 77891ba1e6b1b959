#include "race/lzeros.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>

#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/math/special_functions/factorials.hpp>

#include "race/error.hpp"
#include "race/numerics.hpp"
#include "race/parallel.hpp"

namespace race::lzeros {

using cplx = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

// B_{2j} / (2j)! for j = 1..kEulerTerms.
constexpr int kEulerTerms = 40;

const std::array<double, kEulerTerms + 1>& bernoulli_over_factorial() {
  static const auto table = [] {
    std::array<double, kEulerTerms + 1> t{};
    for (int j = 1; j <= kEulerTerms; ++j) {
      t[j] = boost::math::bernoulli_b2n<double>(j) / boost::math::factorial<double>(2 * j);
    }
    return t;
  }();
  return table;
}

void check_primitive(const DirichletCharacter& chi) {
  if (!chi.primitive()) {
    throw Error(Errc::must_be_primitive, "character " + std::to_string(chi.conrey_index()) + " mod " +
                                             std::to_string(chi.modulus()) + " has conductor " +
                                             std::to_string(chi.conductor()));
  }
  if (chi.is_principal()) {
    throw Error(Errc::must_be_primitive, "the principal character has no L-function zeros in scope");
  }
}

void check_conductor(Int k, const LzerosConfig& config) {
  if (k > config.max_conductor) {
    throw Error(Errc::unsupported_conductor,
                "conductor " + std::to_string(k) + " exceeds ceiling " + std::to_string(config.max_conductor));
  }
}

// theta(t) = Im log Gamma((1/2 + a + it) / 2) + (t/2) log(k / pi)
double theta(double t, Int k, int parity) {
  const cplx z((0.5 + parity) / 2.0, t / 2.0);
  return log_gamma(z).imag() + 0.5 * t * std::log(static_cast<double>(k) / kPi);
}

struct Rotation {
  std::vector<cplx> coefficients;  // chi(a_u)
  double half_root_arg = 0;
  int parity = 0;
};

Rotation make_rotation(const DirichletCharacter& chi, const CriticalLine& line, const RootNumberData& root) {
  Rotation rot;
  rot.coefficients.reserve(line.units().size());
  for (Int a : line.units()) rot.coefficients.push_back(chi(a));
  rot.half_root_arg = 0.5 * std::arg(root.root_number);
  rot.parity = root.parity;
  return rot;
}

ZValue rotate(Int k, double t, const std::vector<cplx>& hurwitz, const Rotation& rot, double theta_t) {
  cplx sum = 0;
  double scale = 0;
  for (std::size_t u = 0; u < hurwitz.size(); ++u) {
    sum += rot.coefficients[u] * hurwitz[u];
    scale += std::abs(hurwitz[u]);
  }
  const double kd = static_cast<double>(k);
  const double inv_sqrt_k = 1.0 / std::sqrt(kd);
  const cplx l = sum * inv_sqrt_k * std::polar(1.0, -t * std::log(kd));
  const cplx z = sum * inv_sqrt_k * std::polar(1.0, theta_t - rot.half_root_arg - t * std::log(kd));
  ZValue out;
  out.value = z.real();
  out.imag_residual = std::abs(z.imag());
  out.scale = scale * inv_sqrt_k;
  out.l_value = l;
  return out;
}

struct CachedLine {
  std::shared_ptr<const CriticalLine> line;
  double height = 0;
};

std::mutex line_cache_mutex;
std::map<Int, CachedLine> line_cache;

// Shared per-conductor tables; rebuilt when a taller range is requested.
std::shared_ptr<const CriticalLine> shared_line(Int k, double height) {
  std::lock_guard lock(line_cache_mutex);
  auto& slot = line_cache[k];
  if (!slot.line || slot.height < height) {
    slot.line = std::make_shared<const CriticalLine>(k, height);
    slot.height = height;
  }
  return slot.line;
}

// Regula falsi with the Illinois modification. flo and fhi have opposite signs.
// Stops once the bracket is at most 2 * eps wide; a bisection step is forced
// whenever one endpoint has been retained three times in a row.
template <class F>
double refine_bracket(F&& f, double lo, double hi, double flo, double fhi, double eps) {
  int side = 0;
  int streak = 0;
  for (int iter = 0; iter < 200; ++iter) {
    if (hi - lo <= 2 * eps) break;
    double x = (lo * fhi - hi * flo) / (fhi - flo);
    if (streak >= 3 || !(x > lo && x < hi)) {
      x = 0.5 * (lo + hi);
      streak = 0;
    }
    // Keep the probe off the endpoints so the bracket keeps shrinking.
    const double guard = 0.25 * eps;
    x = std::clamp(x, lo + guard, hi - guard);
    const double fx = f(x);
    if (fx == 0) {
      return x;
    }
    if ((fx < 0) == (flo < 0)) {
      lo = x;
      flo = fx;
      if (side == -1) {
        fhi *= 0.5;
        ++streak;
      } else {
        streak = 1;
      }
      side = -1;
    } else {
      hi = x;
      fhi = fx;
      if (side == 1) {
        flo *= 0.5;
        ++streak;
      } else {
        streak = 1;
      }
      side = 1;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ZeroSet ZeroSet::truncated(double new_height) const {
  if (new_height > height) {
    throw Error(Errc::invalid_argument, "cannot extend a zero set from height " + format_height(height) + " to " +
                                            format_height(new_height));
  }
  ZeroSet out = *this;
  out.height = new_height;
  out.ordinates.erase(std::upper_bound(out.ordinates.begin(), out.ordinates.end(), new_height),
                      out.ordinates.end());
  return out;
}

cplx gauss_sum(const DirichletCharacter& chi) {
  check_primitive(chi);
  const Int q = chi.modulus();
  cplx sum = 0;
  for (Int n = 1; n <= q; ++n) {
    if (auto e = chi.exponent(n)) {
      sum += root_of_unity(*e, chi.denominator()) * root_of_unity(n, q);
    }
  }
  return sum;
}

RootNumberData root_number(const DirichletCharacter& chi) {
  RootNumberData out;
  out.gauss_sum = gauss_sum(chi);
  out.parity = chi.parity();
  const cplx i_pow = out.parity == 0 ? cplx(1, 0) : cplx(0, 1);
  out.root_number = out.gauss_sum / (i_pow * std::sqrt(static_cast<double>(chi.modulus())));
  return out;
}

cplx log_gamma(cplx z) {
  if (z.real() <= 0) {
    throw Error(Errc::invalid_argument, "log_gamma requires Re z > 0");
  }
  // Shift up to |z| >= 15, then Stirling with ten correction terms.
  cplx shift = 0;
  while (std::abs(z) < 15.0) {
    shift += std::log(z);
    z += 1.0;
  }
  static constexpr std::array<double, 10> b2k = {1.0 / 6,       -1.0 / 30,   1.0 / 42,         -1.0 / 30,
                                                 5.0 / 66,      -691.0 / 2730, 7.0 / 6,         -3617.0 / 510,
                                                 43867.0 / 798, -174611.0 / 330};
  cplx result = (z - 0.5) * std::log(z) - z + 0.5 * std::log(2 * kPi);
  const cplx inv = 1.0 / z;
  const cplx inv2 = inv * inv;
  cplx power = inv;
  for (std::size_t k = 1; k <= b2k.size(); ++k) {
    result += b2k[k - 1] / static_cast<double>(2 * k * (2 * k - 1)) * power;
    power *= inv2;
  }
  return result - shift;
}

// ---------------------------------------------------------------------------
// CriticalLine

CriticalLine::CriticalLine(Int conductor, double max_height) : k_(conductor), max_height_(max_height) {
  if (conductor < 1) throw Error(Errc::invalid_modulus, "conductor must be positive");
  max_terms_ = terms_for(max_height);
  units_ = Modulus(conductor).units();
  if (conductor == 1) units_ = {1};
  log_.resize(units_.size() * max_terms_);
  weight_.resize(units_.size() * max_terms_);
  for (std::size_t u = 0; u < units_.size(); ++u) {
    const double alpha = static_cast<double>(units_[u]) / static_cast<double>(k_);
    for (std::size_t n = 0; n < max_terms_; ++n) {
      const double x = static_cast<double>(n) + alpha;
      log_[u * max_terms_ + n] = std::log(x);
      weight_[u * max_terms_ + n] = 1.0 / std::sqrt(x);
    }
  }
}

std::size_t CriticalLine::terms_for(double t) const {
  // N + alpha >= |t| / 2 keeps |s| / (2 pi x) near 1 / pi in the correction series.
  return 10 + static_cast<std::size_t>(std::ceil(0.5 * std::abs(t)));
}

void CriticalLine::hurwitz(double t, std::vector<cplx>& out) const {
  if (std::abs(t) > max_height_ + 1e-9) {
    throw Error(Errc::invalid_argument, "t = " + std::to_string(t) + " beyond the precomputed height " +
                                            std::to_string(max_height_));
  }
  const std::size_t n_terms = std::min(terms_for(t), max_terms_);
  const auto& bf = bernoulli_over_factorial();
  const cplx s(0.5, t);
  out.resize(units_.size());
  for (std::size_t u = 0; u < units_.size(); ++u) {
    const double* lg = &log_[u * max_terms_];
    const double* w = &weight_[u * max_terms_];
    double re = 0;
    double im = 0;
    for (std::size_t n = 0; n < n_terms; ++n) {
      const double phase = t * lg[n];
      re += w[n] * std::cos(phase);
      im -= w[n] * std::sin(phase);
    }
    cplx sum(re, im);

    const double alpha = static_cast<double>(units_[u]) / static_cast<double>(k_);
    const double x = static_cast<double>(n_terms) + alpha;
    const double lx = std::log(x);
    const cplx base = std::polar(1.0 / std::sqrt(x), -t * lx);  // x^{-s}
    sum += x * base / (s - 1.0);
    sum += 0.5 * base;
    cplx poch = s;
    cplx xpow = base / x;
    const double inv_x2 = 1.0 / (x * x);
    bool converged = false;
    for (int j = 1; j <= kEulerTerms; ++j) {
      const cplx term = bf[j] * poch * xpow;
      sum += term;
      if (std::abs(term) <= 1e-17 * std::max(1.0, std::abs(sum))) {
        converged = true;
        break;
      }
      poch *= (s + static_cast<double>(2 * j - 1)) * (s + static_cast<double>(2 * j));
      xpow *= inv_x2;
    }
    if (!converged) {
      throw Error(Errc::precision_failure, "Euler-Maclaurin tail did not converge at t = " + std::to_string(t));
    }
    out[u] = sum;
  }
}

// ---------------------------------------------------------------------------
// HardyZ

HardyZ::HardyZ(const DirichletCharacter& chi, const LzerosConfig& config) : chi_(&chi), config_(config) {
  check_primitive(chi);
  check_conductor(chi.modulus(), config);
  root_ = root_number(chi);
  line_ = shared_line(chi.modulus(), config.max_height);
  coefficients_.reserve(line_->units().size());
  for (Int a : line_->units()) coefficients_.push_back(chi(a));
}

ZValue HardyZ::operator()(double t) const {
  if (std::abs(t) > config_.max_height) {
    throw Error(Errc::invalid_argument, "|t| exceeds the configured maximum height");
  }
  std::vector<cplx> hz;
  line_->hurwitz(t, hz);
  return from_hurwitz(t, hz);
}

ZValue HardyZ::from_hurwitz(double t, const std::vector<cplx>& hurwitz) const {
  Rotation rot{coefficients_, 0.5 * std::arg(root_.root_number), root_.parity};
  return rotate(chi_->modulus(), t, hurwitz, rot, theta(t, chi_->modulus(), root_.parity));
}

ZValue hardy_z(const DirichletCharacter& chi, double t, const LzerosConfig& config) {
  return HardyZ(chi, config)(t);
}

// ---------------------------------------------------------------------------
// Counts and tails

ZeroCount zero_count_expected(Int q_star, double height) {
  const double arg = static_cast<double>(q_star) * height / (2 * kPi * std::numbers::e);
  if (!(arg > 1.0)) return {0.0, true};
  return {height / (2 * kPi) * std::log(arg), false};
}

double zero_count_slack(Int q_star, double height, const LzerosConfig& config) {
  return config.slack_log * std::log(std::max(1.0, static_cast<double>(q_star) * height)) + config.slack_const;
}

double tail_second_moment(Int q_star, double height) {
  if (!(height > 0)) throw Error(Errc::invalid_argument, "height must be positive");
  const double lq = std::log(static_cast<double>(q_star) / (2 * kPi));
  auto f = [lq](double t) { return (lq + std::log(t)) / (0.25 + t * t); };
  return numerics::integrate(f, height, std::numeric_limits<double>::infinity(), 1e-10).value / (2 * kPi);
}

// ---------------------------------------------------------------------------
// Zero search

std::vector<ZeroSet> find_zeros_batch(const std::vector<const DirichletCharacter*>& characters, double height,
                                      const LzerosConfig& config) {
  if (characters.empty()) return {};
  const Int k = characters.front()->modulus();
  for (const auto* chi : characters) {
    check_primitive(*chi);
    if (chi->modulus() != k) throw Error(Errc::invalid_argument, "batched characters must share a conductor");
  }
  check_conductor(k, config);
  if (!(height > 0) || height > config.max_height) {
    throw Error(Errc::invalid_argument, "height must lie in (0, " + format_height(config.max_height) + "]");
  }

  const CriticalLine line(k, height);
  std::vector<Rotation> rotations;
  for (const auto* chi : characters) rotations.push_back(make_rotation(*chi, line, root_number(*chi)));

  const std::size_t m = characters.size();
  std::vector<ZeroSet> result(m);
  for (std::size_t c = 0; c < m; ++c) {
    result[c].conductor = k;
    result[c].conrey_index = characters[c]->conrey_index();
    result[c].height = height;
    result[c].abs_error = config.abs_error;
    result[c].source = ZeroSource::computed;
  }

  auto evaluate = [&](std::size_t c, double t) {
    std::vector<cplx> hz;
    line.hurwitz(t, hz);
    return rotate(k, t, hz, rotations[c], theta(t, k, rotations[c].parity)).value;
  };

  // Scans the listed characters with step h and refines every sign change.
  auto scan = [&](const std::vector<std::size_t>& which, double h) {
    const std::size_t n = static_cast<std::size_t>(std::ceil(height / h));
    auto grid = [&](std::size_t i) { return i == n ? height : static_cast<double>(i) * h; };
    std::vector<std::vector<double>> values(which.size(), std::vector<double>(n + 1));
    constexpr std::size_t chunk = 64;
    parallel_for((n + 1 + chunk - 1) / chunk, [&](std::size_t b) {
      std::vector<cplx> hz;
      for (std::size_t i = b * chunk; i < std::min(n + 1, (b + 1) * chunk); ++i) {
        const double t = grid(i);
        line.hurwitz(t, hz);
        double th[2] = {theta(t, k, 0), theta(t, k, 1)};
        for (std::size_t w = 0; w < which.size(); ++w) {
          const auto& rot = rotations[which[w]];
          values[w][i] = rotate(k, t, hz, rot, th[rot.parity]).value;
        }
      }
    });

    struct Bracket {
      std::size_t w;
      double lo, hi, flo, fhi;
    };
    std::vector<Bracket> brackets;
    for (std::size_t w = 0; w < which.size(); ++w) {
      for (std::size_t i = 0; i < n; ++i) {
        const double a = values[w][i];
        const double b = values[w][i + 1];
        if ((a < 0 && b > 0) || (a > 0 && b < 0)) brackets.push_back({w, grid(i), grid(i + 1), a, b});
      }
    }
    std::vector<double> roots(brackets.size());
    parallel_for(brackets.size(), [&](std::size_t j) {
      const auto& br = brackets[j];
      const std::size_t c = which[br.w];
      roots[j] = refine_bracket([&](double t) { return evaluate(c, t); }, br.lo, br.hi, br.flo, br.fhi,
                                config.abs_error);
    });
    std::vector<std::vector<double>> found(which.size());
    for (std::size_t j = 0; j < brackets.size(); ++j) {
      if (roots[j] > 0 && roots[j] <= height) found[brackets[j].w].push_back(roots[j]);
    }
    for (auto& f : found) std::sort(f.begin(), f.end());
    return found;
  };

  auto short_of_count = [&](const ZeroSet& z) {
    const double expected = zero_count_expected(k, height).main_term;
    return static_cast<double>(z.ordinates.size()) < expected - zero_count_slack(k, height, config);
  };

  std::vector<std::size_t> all(m);
  for (std::size_t c = 0; c < m; ++c) all[c] = c;
  auto first = scan(all, config.scan_step);
  std::vector<std::size_t> retry;
  for (std::size_t c = 0; c < m; ++c) {
    result[c].ordinates = std::move(first[c]);
    if (short_of_count(result[c])) retry.push_back(c);
  }
  if (!retry.empty()) {
    auto second = scan(retry, config.scan_step / 4);
    for (std::size_t w = 0; w < retry.size(); ++w) {
      auto& z = result[retry[w]];
      if (second[w].size() > z.ordinates.size()) z.ordinates = std::move(second[w]);
      z.possible_missed_zeros = short_of_count(z);
    }
  }
  return result;
}

ZeroSet find_zeros(const DirichletCharacter& chi, double height, const LzerosConfig& config) {
  return find_zeros_batch({&chi}, height, config).front();
}

// ---------------------------------------------------------------------------
// Zero files

namespace {

std::string shortest(double x, std::chars_format fmt) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x, fmt);
  return std::string(buf, res.ptr);
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

// chi<index>_T<height>.csv and q<conductor>
struct FileIdentity {
  Int conductor = 0;
  Int conrey_index = 0;
  double height = 0;
  bool named = false;
};

FileIdentity identity_from_path(const std::filesystem::path& path) {
  FileIdentity id;
  const std::string name = path.filename().string();
  const auto t_pos = name.find("_T");
  if (name.rfind("chi", 0) != 0 || t_pos == std::string::npos || name.size() < 4 ||
      name.substr(name.size() - 4) != ".csv") {
    return id;
  }
  const std::string_view index_part(name.data() + 3, t_pos - 3);
  const std::string_view height_part(name.data() + t_pos + 2, name.size() - 4 - t_pos - 2);
  if (!parse_number(index_part, id.conrey_index) || !parse_number(height_part, id.height)) return id;
  const std::string parent = path.parent_path().filename().string();
  if (parent.size() > 1 && parent[0] == 'q') parse_number(std::string_view(parent).substr(1), id.conductor);
  id.named = true;
  return id;
}

}  // namespace

std::string format_height(double height) { return shortest(height, std::chars_format::general); }

std::filesystem::path zero_file_path(const std::filesystem::path& dir, Int conductor, Int conrey_index,
                                     double height) {
  return dir / ("q" + std::to_string(conductor)) /
         ("chi" + std::to_string(conrey_index) + "_T" + format_height(height) + ".csv");
}

void export_zeros(const ZeroSet& zeros, const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot write " + tmp.string());
    out << kZeroFileHeader << '\n';
    const std::string err = shortest(zeros.abs_error, std::chars_format::general);
    const std::string prefix = std::to_string(zeros.conductor) + "," + std::to_string(zeros.conrey_index) + ",";
    for (double g : zeros.ordinates) {
      out << prefix << shortest(g, std::chars_format::fixed) << ',' << err << '\n';
    }
    if (!out) throw Error(Errc::io_error, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::io_error, "cannot move " + tmp.string() + " into place: " + ec.message());
}

ZeroSet import_zeros(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  const FileIdentity id = identity_from_path(path);

  ZeroSet z;
  z.source = ZeroSource::imported;
  z.conductor = id.conductor;
  z.conrey_index = id.conrey_index;
  z.abs_error = 0;
  bool have_row = false;

  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error(Errc::parse_error, path.string() + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != kZeroFileHeader) fail("expected header '" + std::string(kZeroFileHeader) + "'");
      continue;
    }
    if (line.empty()) continue;
    std::array<std::string_view, 4> fields;
    std::string_view rest(line);
    for (std::size_t f = 0; f < 4; ++f) {
      const auto comma = rest.find(',');
      if (f < 3) {
        if (comma == std::string_view::npos) fail("expected 4 comma-separated fields");
        fields[f] = rest.substr(0, comma);
        rest.remove_prefix(comma + 1);
      } else {
        if (comma != std::string_view::npos) fail("expected 4 comma-separated fields");
        fields[f] = rest;
      }
    }
    Int conductor = 0;
    Int index = 0;
    double ordinate = 0;
    double err = 0;
    if (!parse_number(fields[0], conductor)) fail("bad conductor '" + std::string(fields[0]) + "'");
    if (!parse_number(fields[1], index)) fail("bad conrey_index '" + std::string(fields[1]) + "'");
    if (!parse_number(fields[2], ordinate) || !std::isfinite(ordinate)) {
      fail("bad ordinate '" + std::string(fields[2]) + "'");
    }
    if (!parse_number(fields[3], err) || !std::isfinite(err)) fail("bad abs_error '" + std::string(fields[3]) + "'");

    auto invalid = [&](const std::string& what) {
      throw Error(Errc::validation_error, path.string() + ":" + std::to_string(line_no) + ": " + what);
    };
    if (!have_row) {
      if (z.conductor != 0 && z.conductor != conductor) invalid("conductor disagrees with the directory name");
      if (id.named && z.conrey_index != index) invalid("conrey_index disagrees with the file name");
      z.conductor = conductor;
      z.conrey_index = index;
      z.abs_error = err;
      have_row = true;
    } else if (conductor != z.conductor || index != z.conrey_index) {
      invalid("rows for more than one character");
    }
    if (!(err > 0)) invalid("abs_error must be positive");
    if (!(ordinate > 0)) invalid("ordinate must be positive");
    if (!z.ordinates.empty() && !(ordinate > z.ordinates.back())) invalid("ordinates must be strictly increasing");
    z.ordinates.push_back(ordinate);
  }
  if (line_no == 0) {
    line_no = 1;
    fail("missing header");
  }
  if (id.named) {
    z.height = id.height;
  } else if (!z.ordinates.empty()) {
    z.height = z.ordinates.back();
  } else {
    throw Error(Errc::parse_error, path.string() + ": height cannot be inferred from an empty file without a "
                                                   "chi<index>_T<height>.csv name");
  }
  if (!(z.height > 0)) throw Error(Errc::validation_error, path.string() + ": height must be positive");
  if (!z.ordinates.empty() && z.ordinates.back() > z.height) {
    throw Error(Errc::validation_error, path.string() + ": ordinate above the file height");
  }
  if (!have_row) z.abs_error = 1e-8;
  return z;
}

}  // namespace race::lzeros
