#include "momentswarm/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "momentswarm/errors.hpp"

namespace momentswarm {

Eigen::VectorXd estimator_input(const Eigen::VectorXd& phi_value) {
  Eigen::VectorXd u(phi_value.size() + 1);
  u.head(phi_value.size()) = phi_value;
  u[phi_value.size()] = 1.0;
  return u;
}

PushSumEstimator::PushSumEstimator(std::size_t dimension, double gamma, int forget_horizon)
    : gamma_(gamma),
      forget_horizon_(forget_horizon),
      w_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension))),
      v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension))) {
  if (dimension < 2) throw std::invalid_argument("estimator dimension must be at least 2");
  set_gamma(gamma);
  set_forget_horizon(forget_horizon);
}

void PushSumEstimator::set_gamma(double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("estimator gain gamma must be positive");
  gamma_ = gamma;
}

void PushSumEstimator::set_forget_horizon(int horizon) {
  if (horizon < 0) throw ConfigError("forgetting horizon must be non-negative");
  forget_horizon_ = horizon;
}

void PushSumEstimator::set_w(const Eigen::VectorXd& w) {
  if (w.size() != w_.size()) throw std::invalid_argument("set_w: length mismatch");
  w_ = w;
}

void PushSumEstimator::step(const Eigen::VectorXd& input, std::span<const Message> received,
                            std::size_t out_degree) {
  if (gamma_ * static_cast<double>(out_degree) >= 1.0) {
    throw ConfigError("estimator gain violates gamma * d_out < 1 (gamma = " +
                      std::to_string(gamma_) + ", d_out = " + std::to_string(out_degree) + ")");
  }
  if (input.size() != w_.size()) throw std::invalid_argument("estimator input length mismatch");

  for (const auto& msg : received) {
    if (msg.payload.size() != static_cast<std::size_t>(w_.size())) {
      throw std::invalid_argument("message payload length mismatch from robot " +
                                  std::to_string(msg.sender));
    }
  }
  order_.resize(received.size());
  for (std::size_t k = 0; k < received.size(); ++k) order_[k] = k;
  const auto by_sender = [&](std::size_t a, std::size_t b) { return received[a].sender < received[b].sender; };
  if (!std::is_sorted(order_.begin(), order_.end(), by_sender)) {
    std::stable_sort(order_.begin(), order_.end(), by_sender);
  }

  // Merge aged entries with fresh messages (both ascending by sender).
  merged_.clear();
  const auto take_buffer = [&]() {
    if (spare_.empty()) return Eigen::VectorXd(w_.size());
    Eigen::VectorXd buf = std::move(spare_.back());
    spare_.pop_back();
    return buf;
  };
  auto old = memory_.begin();
  std::size_t k = 0;
  while (old != memory_.end() || k < order_.size()) {
    const Message* msg = k < order_.size() ? &received[order_[k]] : nullptr;
    if (msg && (old == memory_.end() || msg->sender <= old->sender)) {
      MemoryEntry entry{msg->sender, {}, 0};
      if (old != memory_.end() && old->sender == msg->sender) {
        entry.payload = std::move(old->payload);
        ++old;
      } else {
        entry.payload = take_buffer();
      }
      entry.payload = Eigen::Map<const Eigen::VectorXd>(msg->payload.data(), w_.size());
      // A sender listed twice keeps its last payload.
      if (!merged_.empty() && merged_.back().sender == entry.sender) {
        spare_.push_back(std::move(merged_.back().payload));
        merged_.back() = std::move(entry);
      } else {
        merged_.push_back(std::move(entry));
      }
      ++k;
    } else {
      ++old->age;
      if (old->age > forget_horizon_) {
        spare_.push_back(std::move(old->payload));
      } else {
        merged_.push_back(std::move(*old));
      }
      ++old;
    }
  }
  memory_.swap(merged_);

  // Same sum as input - d_out * w + sum(payloads), grouped as payload - w so the
  // large common part of w cancels before it can round.
  v_ = input;
  for (const auto& entry : memory_) v_ += entry.payload - w_;
  const auto unmatched = static_cast<double>(out_degree) - static_cast<double>(memory_.size());
  if (unmatched != 0.0) v_ -= unmatched * w_;
  w_ += gamma_ * v_;
}

const MemoryEntry* PushSumEstimator::memory_entry(RobotId sender) const {
  const auto it = std::lower_bound(memory_.begin(), memory_.end(), sender,
                                   [](const MemoryEntry& e, RobotId id) { return e.sender < id; });
  return it != memory_.end() && it->sender == sender ? &*it : nullptr;
}

std::optional<Eigen::VectorXd> PushSumEstimator::estimate() const {
  const auto m = v_.size() - 1;
  const double weight = v_[m];
  if (!(std::abs(weight) > kEstimateDivisionGuard)) return std::nullopt;
  return Eigen::VectorXd(v_.head(m) / weight);
}

std::optional<MomentVector> estimate_moments(const PushSumEstimator& estimator,
                                             const MomentBasis& basis) {
  if (estimator.dimension() != basis.real_size() + 1) {
    throw std::invalid_argument("estimate_moments: estimator dimension does not match " +
                                describe(basis));
  }
  auto values = estimator.estimate();
  if (!values) return std::nullopt;
  return MomentVector(basis, std::move(*values));
}

}  // namespace momentswarm
