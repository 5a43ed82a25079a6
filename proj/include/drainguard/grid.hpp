#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "drainguard/errors.hpp"
#include "drainguard/model.hpp"

namespace drainguard {

// Step sizes describing a grid. The backlog grid is fine (q_fine_step) on
// [0, q_fine_until] and coarse (q_coarse_step) from there up to q_max.
struct GridConfig {
  double q_fine_step = 0.5;
  double q_fine_until = 5.0;
  double q_coarse_step = 1.0;
  double s_step = 0.5;
  double b_step = 0.5;
  double s_tar_prev_step = 0.5;
  double p_step = 0.2;
  double s_tar_step = 0.5;

  friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

struct StateIndex {
  std::size_t q = 0, s = 0, b = 0, s_tar_prev = 0;
};

class GridSpec {
 public:
  GridSpec(std::vector<double> q_points, std::vector<double> s_points,
           std::vector<double> b_points, std::vector<double> s_tar_prev_points,
           std::vector<double> p_points, std::vector<double> s_tar_points)
      : q_(std::move(q_points)),
        s_(std::move(s_points)),
        b_(std::move(b_points)),
        stp_(std::move(s_tar_prev_points)),
        p_(std::move(p_points)),
        star_(std::move(s_tar_points)) {
    check_axis(q_, "q_points");
    check_axis(s_, "s_points");
    check_axis(b_, "b_points");
    check_axis(stp_, "s_tar_prev_points");
    check_axis(p_, "p_points");
    check_axis(star_, "s_tar_points");
    if (q_.front() != 0.0) throw SpecError("q_points must start at 0");
  }

  const std::vector<double>& q_points() const { return q_; }
  const std::vector<double>& s_points() const { return s_; }
  const std::vector<double>& b_points() const { return b_; }
  const std::vector<double>& s_tar_prev_points() const { return stp_; }
  const std::vector<double>& p_points() const { return p_; }
  const std::vector<double>& s_tar_points() const { return star_; }

  std::size_t num_states() const { return q_.size() * s_.size() * b_.size() * stp_.size(); }
  std::size_t num_actions() const { return p_.size() * star_.size(); }

  // Lexicographic in (q, s, b, s_tar_prev).
  std::size_t state_index(const StateIndex& i) const {
    return ((i.q * s_.size() + i.s) * b_.size() + i.b) * stp_.size() + i.s_tar_prev;
  }

  StateIndex unflatten_state(std::size_t idx) const {
    StateIndex i;
    i.s_tar_prev = idx % stp_.size();
    idx /= stp_.size();
    i.b = idx % b_.size();
    idx /= b_.size();
    i.s = idx % s_.size();
    i.q = idx / s_.size();
    return i;
  }

  SystemState state(std::size_t idx) const {
    const auto i = unflatten_state(idx);
    return SystemState{q_[i.q], s_[i.s], b_[i.b], stp_[i.s_tar_prev]};
  }

  // Lexicographic in (p, s_tar).
  std::size_t action_index(std::size_t p_idx, std::size_t s_tar_idx) const {
    return p_idx * star_.size() + s_tar_idx;
  }

  LeaderAction action(std::size_t idx) const {
    return LeaderAction{p_[idx / star_.size()], star_[idx % star_.size()]};
  }

  std::size_t q_index_of_state(std::size_t idx) const {
    return idx / (s_.size() * b_.size() * stp_.size());
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  static void check_axis(const std::vector<double>& v, const char* name) {
    if (v.empty()) throw SpecError(std::string(name) + " is empty");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!std::isfinite(v[i])) throw SpecError(std::string(name) + " has a non-finite point");
      if (i > 0 && !(v[i] > v[i - 1]))
        throw SpecError(std::string(name) + " is not strictly increasing");
    }
  }

  std::vector<double> q_, s_, b_, stp_, p_, star_;
};

// Points lo, lo + step, ..., hi. The span must be a whole number of steps.
inline std::vector<double> uniform_axis(double lo, double hi, double step, const char* name) {
  if (!(step > 0.0) || !(hi >= lo)) throw SpecError(std::string(name) + ": bad range or step");
  const double cells = (hi - lo) / step;
  const auto n = static_cast<std::size_t>(std::llround(cells));
  if (std::abs(cells - static_cast<double>(n)) > 1e-9)
    throw SpecError(std::string(name) + ": step does not divide the range");
  std::vector<double> out(n + 1);
  for (std::size_t k = 0; k <= n; ++k)
    out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n == 0 ? 1 : n);
  out.back() = hi;
  return out;
}

inline GridSpec build_grid(const SystemParams& params, const GridConfig& cfg = {}) {
  std::vector<double> q;
  if (cfg.q_fine_until >= params.q_max) {
    q = uniform_axis(0.0, params.q_max, cfg.q_fine_step, "q (fine)");
  } else {
    q = uniform_axis(0.0, cfg.q_fine_until, cfg.q_fine_step, "q (fine)");
    auto coarse = uniform_axis(cfg.q_fine_until, params.q_max, cfg.q_coarse_step, "q (coarse)");
    q.insert(q.end(), coarse.begin() + 1, coarse.end());
  }
  return GridSpec(std::move(q), uniform_axis(0.0, params.s_max, cfg.s_step, "s"),
                  uniform_axis(0.0, params.b_max, cfg.b_step, "b"),
                  uniform_axis(0.0, params.s_max, cfg.s_tar_prev_step, "s_tar_prev"),
                  uniform_axis(params.p_min, params.p_max, cfg.p_step, "p"),
                  uniform_axis(0.0, params.s_max, cfg.s_tar_step, "s_tar"));
}

// Nearest point on a sorted axis; an exact midpoint goes to the smaller value.
inline std::size_t nearest_point(const std::vector<double>& axis, double x) {
  const auto it = std::lower_bound(axis.begin(), axis.end(), x);
  if (it == axis.begin()) return 0;
  if (it == axis.end()) return axis.size() - 1;
  const auto hi = static_cast<std::size_t>(it - axis.begin());
  return (x - axis[hi - 1] <= axis[hi] - x) ? hi - 1 : hi;
}

inline std::size_t nearest_state_index(const GridSpec& grid, const SystemState& s) {
  return grid.state_index(StateIndex{nearest_point(grid.q_points(), s.q),
                                     nearest_point(grid.s_points(), s.s),
                                     nearest_point(grid.b_points(), s.b),
                                     nearest_point(grid.s_tar_prev_points(), s.s_tar_prev)});
}

}  // namespace drainguard
