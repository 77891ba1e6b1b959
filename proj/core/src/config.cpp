#include "race/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>

#include "race/error.hpp"

namespace race {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

template <class T>
T parse_value(std::string_view key, std::string_view text) {
  T out{};
  // Integers also accept scientific notation such as 1e6.
  if constexpr (std::is_integral_v<T>) {
    auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    if (res.ec == std::errc() && res.ptr == text.data() + text.size()) return out;
    double d = 0;
    auto dres = std::from_chars(text.data(), text.data() + text.size(), d);
    if (dres.ec == std::errc() && dres.ptr == text.data() + text.size() && d >= 0 && d == std::floor(d) &&
        d < 1.8e19) {
      return static_cast<T>(d);
    }
  } else {
    auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    if (res.ec == std::errc() && res.ptr == text.data() + text.size() && std::isfinite(out)) return out;
  }
  throw Error(Errc::parse_error, "bad value '" + std::string(text) + "' for " + std::string(key));
}

double positive(std::string_view key, std::string_view text) {
  const double v = parse_value<double>(key, text);
  if (!(v > 0)) throw Error(Errc::parse_error, std::string(key) + " must be positive");
  return v;
}

}  // namespace

double RunConfig::height_for(Int q) const {
  if (height > 0) return height;
  const double t = std::round(12000.0 / static_cast<double>(q));
  return std::clamp(t, 100.0, 1000.0);
}

std::filesystem::path RunConfig::zero_directory() const {
  return zero_dir.empty() ? lzeros::ZeroStore::default_directory() : zero_dir;
}

lzeros::LzerosConfig RunConfig::lzeros() const {
  lzeros::LzerosConfig c;
  c.scan_step = scan_step;
  c.abs_error = abs_error;
  c.slack_log = slack_log;
  c.slack_const = slack_const;
  return c;
}

std::string RunConfig::canonical() const {
  std::map<std::string, std::string> kv;
  kv["abs_error"] = fmt(abs_error);
  kv["c1"] = fmt(c1);
  kv["correlation_alpha"] = fmt(correlation_alpha);
  kv["grid_intervals"] = std::to_string(grid_intervals);
  kv["height"] = height > 0 ? fmt(height) : "auto";
  kv["output_dir"] = output_dir.generic_string();
  kv["samples"] = std::to_string(samples);
  kv["scan_step"] = fmt(scan_step);
  kv["seed"] = std::to_string(seed);
  kv["slack_const"] = fmt(slack_const);
  kv["slack_log"] = fmt(slack_log);
  kv["t13_epsilon"] = fmt(t13_epsilon);
  kv["theorem_c"] = fmt(theorem_c);
  kv["zero_dir"] = zero_dir.generic_string();
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::uint64_t RunConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string RunConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

void set_config_value(RunConfig& c, std::string_view key, std::string_view raw) {
  const std::string value = trim(raw);
  static const std::map<std::string, std::function<void(RunConfig&, const std::string&)>, std::less<>> setters = {
      {"zero_dir", [](RunConfig& c, const std::string& v) { c.zero_dir = v; }},
      {"output_dir", [](RunConfig& c, const std::string& v) { c.output_dir = v; }},
      {"height",
       [](RunConfig& c, const std::string& v) { c.height = v == "auto" ? 0.0 : positive("height", v); }},
      {"samples",
       [](RunConfig& c, const std::string& v) {
         c.samples = parse_value<std::size_t>("samples", v);
         if (c.samples == 0) throw Error(Errc::parse_error, "samples must be positive");
       }},
      {"seed", [](RunConfig& c, const std::string& v) { c.seed = parse_value<std::uint64_t>("seed", v); }},
      {"c1", [](RunConfig& c, const std::string& v) { c.c1 = positive("c1", v); }},
      {"theorem_c", [](RunConfig& c, const std::string& v) { c.theorem_c = positive("theorem_c", v); }},
      {"slack_log", [](RunConfig& c, const std::string& v) { c.slack_log = positive("slack_log", v); }},
      {"slack_const", [](RunConfig& c, const std::string& v) { c.slack_const = positive("slack_const", v); }},
      {"correlation_alpha",
       [](RunConfig& c, const std::string& v) { c.correlation_alpha = positive("correlation_alpha", v); }},
      {"t13_epsilon",
       [](RunConfig& c, const std::string& v) {
         c.t13_epsilon = positive("t13_epsilon", v);
         if (c.t13_epsilon >= 1) throw Error(Errc::parse_error, "t13_epsilon must be below 1");
       }},
      {"grid_intervals",
       [](RunConfig& c, const std::string& v) {
         c.grid_intervals = parse_value<std::size_t>("grid_intervals", v);
         if (c.grid_intervals == 0) throw Error(Errc::parse_error, "grid_intervals must be positive");
       }},
      {"scan_step", [](RunConfig& c, const std::string& v) { c.scan_step = positive("scan_step", v); }},
      {"abs_error", [](RunConfig& c, const std::string& v) { c.abs_error = positive("abs_error", v); }},
  };
  auto it = setters.find(key);
  if (it == setters.end()) throw Error(Errc::parse_error, "unknown config key '" + std::string(key) + "'");
  it->second(c, value);
}

RunConfig parse_config(std::istream& in, const std::string& source_name) {
  RunConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::parse_error, source_name + ":" + std::to_string(line_no) + ": expected key = value");
    }
    try {
      set_config_value(config, trim(std::string_view(body).substr(0, eq)), std::string_view(body).substr(eq + 1));
    } catch (const Error& e) {
      throw Error(Errc::parse_error, source_name + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open config " + path.string());
  return parse_config(in, path.string());
}

}  // namespace race
