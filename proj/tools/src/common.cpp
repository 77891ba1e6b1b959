#include "common.hpp"

#include <charconv>
#include <sstream>

#include "race/error.hpp"

namespace race::cli {

std::vector<Int> parse_classes(const std::string& text) {
  std::vector<Int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    std::string_view item(text.data() + pos, comma - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    Int value = 0;
    const auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (item.empty() || ec != std::errc{} || end != item.data() + item.size()) {
      throw Error(Errc::invalid_argument, "malformed class list '" + text + "'");
    }
    out.push_back(value);
    pos = comma + 1;
  }
  return out;
}

std::string join_classes(const std::vector<Int>& classes, char sep) {
  std::string out;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(classes[i]);
  }
  return out;
}

std::string artifact_comment(const RunConfig& config, const std::string& command, const std::string& extra) {
  std::string line = "# race " + command + " seed=" + std::to_string(config.seed) + " config=" + config.hash_hex();
  if (!extra.empty()) line += " " + extra;
  return line;
}

std::filesystem::path output_path(const RunConfig& config, const std::filesystem::path& path) {
  return path.is_absolute() ? path : config.output_dir / path;
}

Sink::Sink(const RunConfig& config, const std::string& path, std::ostream& fallback) : fallback_(&fallback) {
  if (path.empty() || path == "-") return;
  path_ = output_path(config, path);
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  file_ = std::make_unique<std::ofstream>(path_, std::ios::binary);
  if (!*file_) throw Error(Errc::io_error, "cannot open " + path_.string() + " for writing");
}

lzeros::ZeroStore make_store(const RunConfig& config) {
  return lzeros::ZeroStore(config.zero_directory(), config.lzeros(), true);
}

}  // namespace race::cli
