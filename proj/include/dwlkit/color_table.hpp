#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace dwlkit {

using ColorId = std::uint32_t;

// Serialized canonical signature. Writers length-prefix every variable part,
// so distinct structures never serialize to the same word sequence.
class Signature {
 public:
  Signature& tag(std::uint64_t domain) { return word(domain); }
  Signature& word(std::uint64_t w) {
    words_.push_back(w);
    return *this;
  }
  Signature& real(double x) {
    if (x == 0.0) x = 0.0;  // fold -0.0
    return word(std::bit_cast<std::uint64_t>(x));
  }
  Signature& reals(std::span<const double> xs) {
    word(xs.size());
    for (double x : xs) real(x);
    return *this;
  }
  // Sorted multiset of sub-signatures.
  Signature& multiset(std::vector<std::vector<std::uint64_t>> items);

  const std::vector<std::uint64_t>& words() const { return words_; }
  std::vector<std::uint64_t> release() { return std::move(words_); }

 private:
  std::vector<std::uint64_t> words_;
};

struct WordsHash {
  std::size_t operator()(const std::vector<std::uint64_t>& w) const noexcept;
};

// Injective signature -> dense id map, the exact-hash stand-in for HASH.
// Shared by every graph of one comparison run so ids are comparable there;
// ids from different tables are unrelated.
class ColorTable {
 public:
  ColorId color(const Signature& sig) { return intern(colors_, sig.words()); }
  // Interned history sequences (timestamp or interval rows). Kept apart from
  // colors so that color ids stay dense.
  ColorId history(std::uint64_t domain, std::span<const double> seq);

  std::size_t size() const { return colors_.size(); }
  std::size_t history_size() const { return histories_.size(); }

 private:
  using Map = std::unordered_map<std::vector<std::uint64_t>, ColorId, WordsHash>;
  static ColorId intern(Map& map, const std::vector<std::uint64_t>& key);

  Map colors_;
  Map histories_;
};

}  // namespace dwlkit
