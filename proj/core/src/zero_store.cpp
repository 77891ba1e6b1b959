#include <algorithm>
#include <cstdlib>
#include <set>

#include "race/error.hpp"
#include "race/lzeros.hpp"

namespace race::lzeros {

namespace {

// Smallest on-disk height >= height for (conductor, index), with an accepted error bound.
std::shared_ptr<const ZeroSet> best_file(const std::filesystem::path& dir, Int conductor, Int index, double height,
                                         double max_abs_error) {
  const auto sub = dir / ("q" + std::to_string(conductor));
  std::error_code ec;
  if (!std::filesystem::is_directory(sub, ec)) return nullptr;
  const std::string prefix = "chi" + std::to_string(index) + "_T";
  std::vector<std::pair<double, std::filesystem::path>> candidates;
  for (const auto& entry : std::filesystem::directory_iterator(sub, ec)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind(prefix, 0) != 0 || name.size() <= prefix.size() + 4 || !name.ends_with(".csv")) continue;
    const std::string h = name.substr(prefix.size(), name.size() - prefix.size() - 4);
    char* end = nullptr;
    const double value = std::strtod(h.c_str(), &end);
    if (end != h.c_str() + h.size() || !(value >= height)) continue;
    candidates.emplace_back(value, entry.path());
  }
  std::sort(candidates.begin(), candidates.end());
  for (const auto& [h, path] : candidates) {
    // A damaged cache file is a data error, not a silent recompute.
    ZeroSet z = import_zeros(path);
    if (z.conductor != conductor || z.conrey_index != index || z.abs_error > max_abs_error) continue;
    z.source = ZeroSource::computed;
    return std::make_shared<const ZeroSet>(std::move(z));
  }
  return nullptr;
}

}  // namespace

ZeroStore::ZeroStore(std::filesystem::path directory, LzerosConfig config, bool compute_missing)
    : dir_(std::move(directory)), config_(config), compute_missing_(compute_missing) {}

std::filesystem::path ZeroStore::default_directory() {
  if (const char* env = std::getenv("RACE_ZERO_DIR"); env && *env) return env;
  return "zeros";
}

std::shared_ptr<const ZeroSet> ZeroStore::find_locked(Int conductor, Int conrey_index, double height) {
  const auto key = std::make_pair(conductor, conrey_index);
  auto it = memory_.find(key);
  if (it == memory_.end() || it->second->height < height) {
    auto loaded = best_file(dir_, conductor, conrey_index, height, config_.abs_error);
    if (!loaded) return nullptr;
    it = memory_.insert_or_assign(key, loaded).first;
  }
  if (it->second->height == height) return it->second;
  return std::make_shared<const ZeroSet>(it->second->truncated(height));
}

std::shared_ptr<const ZeroSet> ZeroStore::find(Int conductor, Int conrey_index, double height) {
  std::lock_guard lock(mutex_);
  return find_locked(conductor, conrey_index, height);
}

std::shared_ptr<const ZeroSet> ZeroStore::get(Int conductor, Int conrey_index, double height) {
  ensure({{conductor, conrey_index}}, height);
  return find(conductor, conrey_index, height);
}

void ZeroStore::ensure(const std::vector<std::pair<Int, Int>>& characters, double height) {
  std::lock_guard lock(mutex_);
  std::map<Int, std::set<Int>> missing;
  for (const auto& [conductor, index] : characters) {
    if (!find_locked(conductor, index, height)) missing[conductor].insert(index);
  }
  if (!compute_missing_) return;
  for (const auto& [conductor, labels] : missing) {
    auto table = build_character_table(conductor);
    std::vector<const DirichletCharacter*> batch;
    for (Int label : labels) batch.push_back(&table->by_label(label));
    auto sets = find_zeros_batch(batch, height, config_);
    for (auto& z : sets) {
      export_zeros(z, zero_file_path(dir_, z.conductor, z.conrey_index, height));
      memory_.insert_or_assign(std::make_pair(z.conductor, z.conrey_index),
                               std::make_shared<const ZeroSet>(std::move(z)));
    }
  }
}

// ---------------------------------------------------------------------------

ModulusZeroData::ModulusZeroData(std::shared_ptr<const CharacterTable> table, double height,
                                 std::vector<CharacterZeros> entries)
    : table_(std::move(table)), height_(height), entries_(std::move(entries)) {}

bool ModulusZeroData::any_imported() const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [](const CharacterZeros& e) { return e.zeros->source == ZeroSource::imported; });
}

std::size_t ModulusZeroData::total_ordinates() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.zeros->ordinates.size();
  return n;
}

namespace {

template <class Lookup>
ModulusZeroData assemble(Int q, double height, Lookup&& lookup) {
  auto table = build_character_table(q);
  std::vector<CharacterZeros> entries;
  std::vector<std::string> gaps;
  for (const auto* chi : table->nontrivial()) {
    CharacterZeros e;
    e.label = chi->conrey_index();
    e.inducer = conductor_and_inducer(*chi);
    e.zeros = lookup(e.inducer.conductor, e.inducer.conrey_index);
    if (!e.zeros) {
      gaps.push_back("q*=" + std::to_string(e.inducer.conductor) + " index " +
                     std::to_string(e.inducer.conrey_index));
      continue;
    }
    entries.push_back(std::move(e));
  }
  if (!gaps.empty()) {
    std::string msg = "no zeros up to T=" + format_height(height) + " for";
    for (std::size_t i = 0; i < gaps.size(); ++i) msg += (i ? ", " : " ") + gaps[i];
    throw Error(Errc::incomplete_zero_data, msg);
  }
  return ModulusZeroData(std::move(table), height, std::move(entries));
}

}  // namespace

ModulusZeroData load_modulus_zeros(ZeroStore& store, Int q, double height) {
  auto table = build_character_table(q);
  std::vector<std::pair<Int, Int>> wanted;
  for (const auto* chi : table->nontrivial()) {
    const auto ind = conductor_and_inducer(*chi);
    wanted.emplace_back(ind.conductor, ind.conrey_index);
  }
  std::sort(wanted.begin(), wanted.end());
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
  store.ensure(wanted, height);
  return assemble(q, height, [&](Int k, Int m) { return store.find(k, m, height); });
}

ModulusZeroData modulus_zeros_from_sets(Int q, double height, const std::map<std::pair<Int, Int>, ZeroSet>& sets) {
  return assemble(q, height, [&](Int k, Int m) -> std::shared_ptr<const ZeroSet> {
    auto it = sets.find({k, m});
    if (it == sets.end() || it->second.height < height) return nullptr;
    return std::make_shared<const ZeroSet>(it->second.truncated(height));
  });
}

}  // namespace race::lzeros
