#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "momentswarm/moment_basis.hpp"

namespace momentswarm {

using RobotId = std::uint32_t;

/// One robot's broadcast of its w vector.
struct Message {
  RobotId sender = 0;
  std::span<const double> payload;
};

/// Last message held for an in-neighbor and how many steps since it arrived.
struct MemoryEntry {
  RobotId sender = 0;
  Eigen::VectorXd payload;
  int age = 0;
};

/// Denominator guard when forming the ratio estimate.
inline constexpr double kEstimateDivisionGuard = 1e-9;

/// [phi; 1], the estimator input for one robot.
Eigen::VectorXd estimator_input(const Eigen::VectorXd& phi_value);

/// Per-robot self-healing push-sum estimator with neighbor memory.
///
/// Each step forms
///   v = u - d_out * w + sum of remembered neighbor payloads
///   w <- w + gamma * v
/// and the swarm estimate is v[0..m) / v[m]. A neighbor's payload is kept
/// for up to `forget_horizon` steps without a fresh message; a horizon of 0
/// uses only messages received this step (no memory).
class PushSumEstimator {
 public:
  /// `dimension` is m + 1 (moment components plus the weight slot).
  PushSumEstimator(std::size_t dimension, double gamma, int forget_horizon);

  /// Throws ConfigError if gamma * out_degree >= 1 and std::invalid_argument
  /// on a length mismatch.
  void step(const Eigen::VectorXd& input, std::span<const Message> received, std::size_t out_degree);

  /// Moment estimate, or nullopt while |v[m]| is at or below the guard.
  std::optional<Eigen::VectorXd> estimate() const;

  double gamma() const { return gamma_; }
  void set_gamma(double gamma);
  int forget_horizon() const { return forget_horizon_; }
  void set_forget_horizon(int horizon);

  std::size_t dimension() const { return static_cast<std::size_t>(w_.size()); }
  const Eigen::VectorXd& w() const { return w_; }
  const Eigen::VectorXd& v() const { return v_; }
  /// Remembered neighbors, ascending by sender id.
  const std::vector<MemoryEntry>& memory() const { return memory_; }
  /// Entry for `sender`, or nullptr if it is not remembered.
  const MemoryEntry* memory_entry(RobotId sender) const;

  /// Overwrites w, e.g. to inject a transient fault.
  void set_w(const Eigen::VectorXd& w);

 private:
  double gamma_;
  int forget_horizon_;
  Eigen::VectorXd w_;
  Eigen::VectorXd v_;
  std::vector<MemoryEntry> memory_;
  // Payload buffers of forgotten entries, reused to avoid reallocating.
  std::vector<Eigen::VectorXd> spare_;
  std::vector<MemoryEntry> merged_;
  std::vector<std::size_t> order_;
};

/// Ratio estimate as a moment vector; nullopt while unavailable.
std::optional<MomentVector> estimate_moments(const PushSumEstimator& estimator,
                                             const MomentBasis& basis);

}  // namespace momentswarm
