#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "drainguard/errors.hpp"
#include "drainguard/grid.hpp"
#include "drainguard/model.hpp"

namespace drainguard {

// FNV-1a, 64 bit. Used for staleness checks and manifests, not security.
class Fnv1a {
 public:
  Fnv1a& bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
    return *this;
  }
  Fnv1a& str(std::string_view s) { return bytes(s.data(), s.size()); }
  Fnv1a& f64(double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    return u64(bits);
  }
  Fnv1a& u64(std::uint64_t x) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(x >> (8 * i));
    return bytes(b, 8);
  }
  Fnv1a& axis(const std::vector<double>& v) {
    u64(v.size());
    for (double x : v) f64(x);
    return *this;
  }

  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

inline std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

inline std::uint64_t file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return Fnv1a().str(data).value();
}

// Identifies everything a transition table depends on.
inline std::uint64_t instance_hash(const SystemParams& p, const Population& pop,
                                   const GridSpec& grid) {
  Fnv1a h;
  for (double x : {p.delta, p.gamma, p.mu, p.eps_delay, p.q_max, p.s_max, p.b_max, p.p_min,
                   p.p_max, p.omega, p.nu, p.chi, p.c_op, p.c_b, p.eta_tar, p.phi0, p.zeta})
    h.f64(x);
  h.u64(pop.size());
  for (const auto& t : pop.types()) {
    h.f64(t.w).f64(t.delta_k).f64(t.rho).u64(t.slo.finite() ? 1 : 0);
    if (t.slo.finite()) h.f64(t.slo.value());
  }
  h.axis(grid.q_points()).axis(grid.s_points()).axis(grid.b_points());
  h.axis(grid.s_tar_prev_points()).axis(grid.p_points()).axis(grid.s_tar_points());
  return h.value();
}

}  // namespace drainguard
