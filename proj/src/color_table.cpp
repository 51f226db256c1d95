#include "dwlkit/color_table.hpp"

#include <algorithm>
#include <stdexcept>

namespace dwlkit {

Signature& Signature::multiset(std::vector<std::vector<std::uint64_t>> items) {
  std::sort(items.begin(), items.end());
  word(items.size());
  for (const auto& item : items) {
    word(item.size());
    words_.insert(words_.end(), item.begin(), item.end());
  }
  return *this;
}

std::size_t WordsHash::operator()(const std::vector<std::uint64_t>& w) const noexcept {
  // splitmix64 finalizer folded over the words
  std::uint64_t h = 0x9e3779b97f4a7c15ull ^ w.size();
  for (std::uint64_t x : w) {
    x += 0x9e3779b97f4a7c15ull + h;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    h = x ^ (x >> 31);
  }
  return static_cast<std::size_t>(h);
}

ColorId ColorTable::history(std::uint64_t domain, std::span<const double> seq) {
  Signature sig;
  sig.tag(domain).reals(seq);
  return intern(histories_, sig.words());
}

ColorId ColorTable::intern(Map& map, const std::vector<std::uint64_t>& key) {
  const auto it = map.find(key);
  if (it != map.end()) return it->second;
  if (map.size() >= static_cast<std::size_t>(static_cast<ColorId>(-1))) {
    throw std::overflow_error("color table exhausted");
  }
  const auto id = static_cast<ColorId>(map.size());
  map.emplace(key, id);
  return id;
}

}  // namespace dwlkit
