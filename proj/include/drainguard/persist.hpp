#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "drainguard/checksum.hpp"
#include "drainguard/errors.hpp"
#include "drainguard/solve.hpp"
#include "drainguard/table.hpp"

// Flat binary files for tables and value functions. Layout: 8-byte magic,
// then a fixed header, then raw little-endian arrays. The header carries the
// instance hash; loading against a different instance is an error.

namespace drainguard {

namespace detail {

inline constexpr char kTableMagic[8] = {'D', 'G', 'T', 'A', 'B', 'L', 'E', '1'};
inline constexpr char kValueMagic[8] = {'D', 'G', 'V', 'A', 'L', 'U', 'E', '1'};

template <class T>
void put(std::ofstream& out, const T& x) {
  out.write(reinterpret_cast<const char*>(&x), sizeof x);
}

template <class T>
void put_array(std::ofstream& out, const std::vector<T>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <class T>
T get(std::ifstream& in, const std::filesystem::path& path) {
  T x{};
  if (!in.read(reinterpret_cast<char*>(&x), sizeof x))
    throw ConfigError("truncated file " + path.string());
  return x;
}

template <class T>
void get_array(std::ifstream& in, std::vector<T>& v, std::size_t n,
               const std::filesystem::path& path) {
  v.resize(n);
  if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T))))
    throw ConfigError("truncated file " + path.string());
}

inline std::ifstream open_checked(const std::filesystem::path& path, const char (&magic)[8],
                                  std::uint64_t expected_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  char m[8];
  if (!in.read(m, 8) || std::memcmp(m, magic, 8) != 0)
    throw ConfigError(path.string() + " is not a drainguard file of the expected kind");
  const auto hash = get<std::uint64_t>(in, path);
  if (hash != expected_hash)
    throw StaleFileError(path.string() + " was built for instance " + hex64(hash) +
                         ", current instance is " + hex64(expected_hash) +
                         "; delete it or rebuild");
  return in;
}

}  // namespace detail

inline void save_table(const std::filesystem::path& path, const GuardedTable& t,
                       std::uint64_t hash) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out.write(detail::kTableMagic, 8);
  detail::put(out, hash);
  detail::put(out, static_cast<std::uint8_t>(t.shielded));
  detail::put(out, static_cast<std::uint64_t>(t.num_states));
  detail::put(out, static_cast<std::uint64_t>(t.num_actions));
  detail::put_array(out, t.next_index);
  detail::put_array(out, t.reward);
  detail::put_array(out, t.mode);
  if (!out) throw ConfigError("write failed for " + path.string());
}

inline GuardedTable load_table(const std::filesystem::path& path, std::uint64_t hash) {
  auto in = detail::open_checked(path, detail::kTableMagic, hash);
  GuardedTable t;
  t.shielded = detail::get<std::uint8_t>(in, path) != 0;
  t.num_states = detail::get<std::uint64_t>(in, path);
  t.num_actions = detail::get<std::uint64_t>(in, path);
  const std::size_t n = t.num_states * t.num_actions;
  detail::get_array(in, t.next_index, n, path);
  detail::get_array(in, t.reward, n, path);
  detail::get_array(in, t.mode, n, path);
  return t;
}

struct StoredValues {
  double gamma = 0.0;
  bool shielded = true;
  std::int32_t horizon = 0;  // 0 for the infinite-horizon solution
  ValueFunction solution;
};

inline void save_values(const std::filesystem::path& path, const StoredValues& v,
                        std::uint64_t hash) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out.write(detail::kValueMagic, 8);
  detail::put(out, hash);
  detail::put(out, v.gamma);
  detail::put(out, static_cast<std::uint8_t>(v.shielded));
  detail::put(out, v.horizon);
  detail::put(out, static_cast<std::uint64_t>(v.solution.values.size()));
  detail::put_array(out, v.solution.values);
  detail::put_array(out, v.solution.policy);
  if (!out) throw ConfigError("write failed for " + path.string());
}

inline StoredValues load_values(const std::filesystem::path& path, std::uint64_t hash) {
  auto in = detail::open_checked(path, detail::kValueMagic, hash);
  StoredValues v;
  v.gamma = detail::get<double>(in, path);
  v.shielded = detail::get<std::uint8_t>(in, path) != 0;
  v.horizon = detail::get<std::int32_t>(in, path);
  const auto n = detail::get<std::uint64_t>(in, path);
  detail::get_array(in, v.solution.values, n, path);
  detail::get_array(in, v.solution.policy, n, path);
  return v;
}

}  // namespace drainguard
