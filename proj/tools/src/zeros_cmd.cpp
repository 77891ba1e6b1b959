#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "common.hpp"
#include "race/error.hpp"
#include "race_cli/cli.hpp"

namespace race::cli {

namespace {

std::vector<std::pair<Int, Int>> inducers_of(Int q) {
  auto table = build_character_table(q);
  std::set<std::pair<Int, Int>> seen;
  for (const auto* chi : table->nontrivial()) {
    const auto ind = conductor_and_inducer(*chi);
    seen.emplace(ind.conductor, ind.conrey_index);
  }
  return {seen.begin(), seen.end()};
}

struct CountCheck {
  bool pass = false;
  double expected = 0;
  double slack = 0;
};

CountCheck count_check(const lzeros::ZeroSet& z, const lzeros::LzerosConfig& cfg) {
  CountCheck c;
  c.expected = lzeros::zero_count_expected(z.conductor, z.height).main_term;
  c.slack = lzeros::zero_count_slack(z.conductor, z.height, cfg);
  c.pass = std::fabs(static_cast<double>(z.ordinates.size()) - c.expected) <= c.slack;
  return c;
}

}  // namespace

int cmd_zeros_compute(const RunConfig& config, Int q, std::ostream& out) {
  const double height = config.height_for(q);
  auto store = make_store(config);
  const auto wanted = inducers_of(q);
  store.ensure(wanted, height);
  auto table = build_character_table(q);
  out << "label,conductor,inducer,zeros,expected,file\n";
  for (const auto* chi : table->nontrivial()) {
    const auto ind = conductor_and_inducer(*chi);
    auto z = store.find(ind.conductor, ind.conrey_index, height);
    if (!z) throw Error(Errc::incomplete_zero_data, "zero computation produced no data");
    const auto expected = lzeros::zero_count_expected(ind.conductor, height);
    out << chi->conrey_index() << ',' << ind.conductor << ',' << ind.conrey_index << ',' << z->ordinates.size() << ','
        << std::round(expected.main_term * 100) / 100 << ','
        << lzeros::zero_file_path(store.directory(), ind.conductor, ind.conrey_index, height).generic_string() << '\n';
  }
  return exit_ok;
}

int cmd_zeros_import(const RunConfig& config, const std::vector<std::string>& files, std::ostream& out) {
  const auto dir = config.zero_directory();
  for (const auto& f : files) {
    const auto z = lzeros::import_zeros(f);
    const auto target = lzeros::zero_file_path(dir, z.conductor, z.conrey_index, z.height);
    lzeros::export_zeros(z, target);
    out << "imported " << z.ordinates.size() << " ordinates for q*=" << z.conductor << " index " << z.conrey_index
        << " up to T=" << lzeros::format_height(z.height) << " -> " << target.generic_string() << '\n';
  }
  return exit_ok;
}

int cmd_zeros_verify(const RunConfig& config, Int q, double height, std::ostream& out) {
  const auto dir = config.zero_directory();
  const auto cfg = config.lzeros();
  std::size_t failures = 0, files = 0;
  for (const auto& [k, m] : inducers_of(q)) {
    const auto sub = dir / ("q" + std::to_string(k));
    const std::string prefix = "chi" + std::to_string(m) + "_T";
    std::vector<std::filesystem::path> paths;
    std::error_code ec;
    if (std::filesystem::is_directory(sub, ec)) {
      for (const auto& entry : std::filesystem::directory_iterator(sub, ec)) {
        const auto name = entry.path().filename().string();
        if (name.rfind(prefix, 0) == 0 && name.ends_with(".csv")) paths.push_back(entry.path());
      }
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) {
      out << "FAIL q*=" << k << " index " << m << ": no zero file under " << sub.generic_string() << '\n';
      ++failures;
      continue;
    }
    for (const auto& p : paths) {
      ++files;
      try {
        const auto z = lzeros::import_zeros(p);
        if (height > 0 && z.height < height) {
          out << "FAIL " << p.generic_string() << ": height " << lzeros::format_height(z.height) << " below "
              << lzeros::format_height(height) << '\n';
          ++failures;
          continue;
        }
        if (z.conductor != k || z.conrey_index != m) {
          out << "FAIL " << p.generic_string() << ": file holds q*=" << z.conductor << " index " << z.conrey_index
              << '\n';
          ++failures;
          continue;
        }
        const auto c = count_check(z, cfg);
        out << (c.pass ? "PASS " : "FAIL ") << p.generic_string() << ": " << z.ordinates.size()
            << " zeros, expected " << std::round(c.expected * 100) / 100 << " +- " << std::round(c.slack * 100) / 100
            << '\n';
        failures += !c.pass;
      } catch (const Error& e) {
        out << "FAIL " << e.what() << '\n';
        ++failures;
      }
    }
  }
  out << (failures ? "FAIL" : "PASS") << ": " << files << " files checked, " << failures << " failures\n";
  return failures ? exit_check_failed : exit_ok;
}

}  // namespace race::cli
