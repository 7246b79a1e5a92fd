#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace toolverse {

// Insertion-ordered so that argument order and serialized request bodies are
// reproducible byte for byte.
using Json = nlohmann::ordered_json;

// Key-sorted compact dump, for equality and hashing of argument maps.
std::string canonical_dump(const Json& value);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split_lines(std::string_view s);
bool contains(std::string_view haystack, std::string_view needle);

// RFC 3986 unreserved characters pass through; everything else is %XX.
std::string percent_encode(std::string_view s);

// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::uint64_t fnv1a64(std::string_view data);
std::string hash_hex(std::string_view data);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);
std::vector<Json> read_jsonl(const std::filesystem::path& path);

// Lowercase alphanumeric words.
std::vector<std::string> word_tokens(std::string_view text);

// First balanced JSON object or array in free text that parses, e.g. inside
// a fenced block. nullopt when none does.
std::optional<Json> find_json_value(std::string_view text);

// Seedable RNG shared by every component that draws randomness.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::string alnum_id(std::size_t length);
  std::size_t index(std::size_t bound);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    std::shuffle(items.begin(), items.end(), engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

// Derives a child seed from a parent seed and a label, so independent
// consumers do not share a stream.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

}  // namespace toolverse
