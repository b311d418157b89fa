#ifndef UIND_CACHE_HPP
#define UIND_CACHE_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "uind/bits.hpp"
#include "uind/dyadic.hpp"
#include "uind/enumeration.hpp"

namespace uind {

class CacheError : public std::runtime_error {
 public:
  enum class Kind { VersionMismatch, CorruptCache };
  CacheError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Persisted probability estimates, keyed by budget and target digest.
// File layout: "UINDCACHE1" magic, u64 record count, fixed-width records of
// little-endian u64 fields, trailing FNV-1a checksum over everything before.
class EnumCache {
 public:
  struct Key {
    EnumBudget budget;
    std::uint64_t target_digest = 0;
    std::uint64_t target_len = 0;

    friend auto operator<=>(const Key& a, const Key& b) {
      return std::tie(a.budget.max_code_len, a.budget.step_budget, a.budget.output_limit,
                      a.target_digest, a.target_len) <=>
             std::tie(b.budget.max_code_len, b.budget.step_budget, b.budget.output_limit,
                      b.target_digest, b.target_len);
    }
  };

  struct Entry {
    std::uint64_t value_num = 0;
    std::uint64_t value_scale = 0;
    std::uint64_t programs_counted = 0;
    std::uint64_t set_digest = 0;  // digest of the counted-program key set
  };

  static Key make_key(std::string_view target, const EnumBudget& budget) {
    return Key{budget, fnv1a64(target), target.size()};
  }

  std::optional<ProbEstimate> lookup(std::string_view target, const EnumBudget& budget) const {
    auto it = entries_.find(make_key(target, budget));
    if (it == entries_.end()) return std::nullopt;
    ProbEstimate est;
    est.value = Dyadic(it->second.value_num, static_cast<unsigned>(it->second.value_scale));
    est.programs_counted = it->second.programs_counted;
    est.budget = budget;
    return est;
  }

  void insert(std::string_view target, const ProbEstimate& est, std::uint64_t set_digest = 0) {
    entries_[make_key(target, est.budget)] =
        Entry{est.value.num(), est.value.scale(), est.programs_counted, set_digest};
  }

  std::size_t size() const { return entries_.size(); }
  const std::map<Key, Entry>& entries() const { return entries_; }

  void store(const std::filesystem::path& path) const {
    std::string payload{kMagic};
    put_u64(payload, entries_.size());
    for (const auto& [k, e] : entries_) {
      put_u64(payload, k.budget.max_code_len);
      put_u64(payload, k.budget.step_budget);
      put_u64(payload, k.budget.output_limit);
      put_u64(payload, k.target_digest);
      put_u64(payload, k.target_len);
      put_u64(payload, e.value_num);
      put_u64(payload, e.value_scale);
      put_u64(payload, e.programs_counted);
      put_u64(payload, e.set_digest);
    }
    put_u64(payload, fnv1a64(payload));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write cache file: " + path.string());
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  }

  static EnumCache load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read cache file: " + path.string());
    std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (payload.size() < kMagic.size() || payload.substr(0, kMagic.size()) != kMagic)
      throw CacheError(CacheError::Kind::VersionMismatch,
                       "cache header mismatch in " + path.string());
    if (payload.size() < kMagic.size() + 16)
      throw CacheError(CacheError::Kind::CorruptCache, "cache truncated: " + path.string());
    std::uint64_t stored_sum = get_u64(payload, payload.size() - 8);
    if (fnv1a64(std::string_view(payload).substr(0, payload.size() - 8)) != stored_sum)
      throw CacheError(CacheError::Kind::CorruptCache, "cache checksum failure: " + path.string());
    std::size_t pos = kMagic.size();
    std::uint64_t count = get_u64(payload, pos);
    pos += 8;
    constexpr std::size_t kRecord = 9 * 8;
    if (payload.size() - 8 - pos != count * kRecord)
      throw CacheError(CacheError::Kind::CorruptCache, "cache record count mismatch: " + path.string());
    EnumCache cache;
    for (std::uint64_t i = 0; i < count; ++i) {
      Key k;
      k.budget.max_code_len = get_u64(payload, pos + 0);
      k.budget.step_budget = get_u64(payload, pos + 8);
      k.budget.output_limit = get_u64(payload, pos + 16);
      k.target_digest = get_u64(payload, pos + 24);
      k.target_len = get_u64(payload, pos + 32);
      Entry e;
      e.value_num = get_u64(payload, pos + 40);
      e.value_scale = get_u64(payload, pos + 48);
      e.programs_counted = get_u64(payload, pos + 56);
      e.set_digest = get_u64(payload, pos + 64);
      cache.entries_.emplace(k, e);
      pos += kRecord;
    }
    return cache;
  }

 private:
  static constexpr std::string_view kMagic = "UINDCACHE1";

  static void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  static std::uint64_t get_u64(std::string_view s, std::size_t pos) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[pos + i]);
    return v;
  }

  std::map<Key, Entry> entries_;
};

}  // namespace uind

#endif
