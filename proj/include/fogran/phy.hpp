#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "fogran/scenario.hpp"

namespace fogran::phy {

template <typename Scalar>
using CVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
template <typename Scalar>
using CMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

/// Uplink channels from every user to its serving RU. Adjacent RUs use
/// orthogonal bands, so only intra-RU users interfere and the channel to any
/// other RU is never needed.
template <typename Scalar>
struct ChannelSet {
  std::vector<CVector<Scalar>> h;   // h[k]: user k -> its serving RU
  std::vector<Index> user_to_ru;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> noise_power_w;  // per RU, density * B_i
  Scalar tx_power_w = 1;
  Index num_antennas = 0;

  Index num_users() const { return static_cast<Index>(h.size()); }
  Index num_rus() const { return noise_power_w.size(); }

  std::vector<Index> users_of_ru(Index i) const {
    std::vector<Index> out;
    for (std::size_t k = 0; k < user_to_ru.size(); ++k) {
      if (user_to_ru[k] == i) out.push_back(static_cast<Index>(k));
    }
    return out;
  }

  void validate() const {
    if (num_antennas <= 0) throw std::invalid_argument("num_antennas must be > 0");
    if (!(tx_power_w > 0)) throw std::invalid_argument("tx_power_w must be > 0");
    if (user_to_ru.size() != h.size()) throw std::invalid_argument("user_to_ru size mismatch");
    if (!(noise_power_w.array() > 0).all()) throw std::invalid_argument("noise power must be > 0");
    for (std::size_t k = 0; k < h.size(); ++k) {
      if (h[k].size() != num_antennas) throw std::invalid_argument("channel vector length != num_antennas");
      if (user_to_ru[k] < 0 || user_to_ru[k] >= num_rus()) throw std::invalid_argument("user_to_ru out of range");
    }
  }
};

/// Receive beamformers, one per user, same indexing as ChannelSet::h.
template <typename Scalar>
using Beamformers = std::vector<CVector<Scalar>>;

/// Large-scale power gain at distance d: 10^(-L0/10) * d^-n, with d clamped
/// to at least 1 m (the reference distance).
template <typename Scalar>
Scalar pathloss_gain(Scalar distance_m, Scalar exponent, Scalar reference_loss_db) {
  const Scalar d = std::max(distance_m, Scalar(1));
  return std::pow(Scalar(10), -reference_loss_db / Scalar(10)) * std::pow(d, -exponent);
}

/// Rayleigh block fading with log-distance path loss:
/// h = sqrt(gain(d)) * g, g ~ CN(0, I_M). Deterministic per seed.
template <typename Scalar = double>
ChannelSet<Scalar> generate_channels(const Topology& topology, const Geometry& geometry, const RadioParams& radio,
                                     std::uint64_t seed) {
  if (geometry.user_positions_m.cols() != topology.num_users ||
      geometry.ru_positions_m.cols() != topology.num_rus) {
    throw std::invalid_argument("geometry does not match topology");
  }
  ChannelSet<Scalar> ch;
  ch.num_antennas = radio.num_antennas;
  ch.tx_power_w = static_cast<Scalar>(radio.tx_power_w);
  ch.user_to_ru = topology.user_to_ru;
  ch.noise_power_w = (topology.uplink_bandwidth_hz * radio.noise_density_w_per_hz).template cast<Scalar>();

  std::mt19937_64 rng(seed);
  std::normal_distribution<Scalar> normal(Scalar(0), std::sqrt(Scalar(0.5)));
  ch.h.reserve(static_cast<std::size_t>(topology.num_users));
  for (Index k = 0; k < topology.num_users; ++k) {
    const Index i = topology.ru_of_user(k);
    const Scalar d =
        static_cast<Scalar>((geometry.user_positions_m.col(k) - geometry.ru_positions_m.col(i)).norm());
    const Scalar amplitude = std::sqrt(pathloss_gain<Scalar>(d, static_cast<Scalar>(radio.pathloss_exponent),
                                                             static_cast<Scalar>(radio.reference_loss_db)));
    CVector<Scalar> h(radio.num_antennas);
    for (Index m = 0; m < radio.num_antennas; ++m) {
      const Scalar re = normal(rng);
      const Scalar im = normal(rng);
      h(m) = amplitude * std::complex<Scalar>(re, im);
    }
    ch.h.push_back(std::move(h));
  }
  return ch;
}

/// Interference-plus-noise covariance seen by RU i, including every served
/// user: sigma^2 I + p_t sum_l h_l h_l^H.
template <typename Scalar>
CMatrix<Scalar> receive_covariance(const ChannelSet<Scalar>& ch, Index ru) {
  const Index M = ch.num_antennas;
  CMatrix<Scalar> R = CMatrix<Scalar>::Identity(M, M) * ch.noise_power_w(ru);
  for (Index l : ch.users_of_ru(ru)) {
    R.noalias() += ch.tx_power_w * ch.h[static_cast<std::size_t>(l)] * ch.h[static_cast<std::size_t>(l)].adjoint();
  }
  return R;
}

/// MMSE receive beamformers for every user served by `ru`:
///   u_k = (sigma^2 I + p_t sum_l h_l h_l^H)^{-1} h_k.
/// With p_t = 1 this is exactly the textbook form; for other powers the
/// transmit power scales the covariance so u stays the SINR maximiser.
/// The covariance is Hermitian positive definite, so an LLT always succeeds.
/// Returns pairs (user index, u) in increasing user order.
template <typename Scalar>
std::vector<std::pair<Index, CVector<Scalar>>> mmse_beamformer(const ChannelSet<Scalar>& ch, Index ru) {
  const auto users = ch.users_of_ru(ru);
  if (users.empty()) throw std::invalid_argument("mmse_beamformer: RU has no users");
  const Eigen::LLT<CMatrix<Scalar>> llt(receive_covariance(ch, ru));
  std::vector<std::pair<Index, CVector<Scalar>>> out;
  out.reserve(users.size());
  for (Index k : users) out.emplace_back(k, llt.solve(ch.h[static_cast<std::size_t>(k)]));
  return out;
}

/// MMSE beamformers for all users of all RUs.
template <typename Scalar>
Beamformers<Scalar> mmse_beamformers(const ChannelSet<Scalar>& ch) {
  Beamformers<Scalar> u(ch.h.size());
  for (Index i = 0; i < ch.num_rus(); ++i) {
    if (ch.users_of_ru(i).empty()) continue;
    for (auto& [k, uk] : mmse_beamformer(ch, i)) u[static_cast<std::size_t>(k)] = std::move(uk);
  }
  return u;
}

/// SINR of user k with receive vector u:
///   p_t |u^H h_k|^2 / (sum_{l != k, same RU} p_t |u^H h_l|^2 + ||u||^2 sigma^2).
template <typename Scalar, typename Derived>
Scalar sinr(const ChannelSet<Scalar>& ch, const Eigen::MatrixBase<Derived>& u, Index k) {
  const Scalar u_norm2 = u.squaredNorm();
  if (!(u_norm2 > 0)) throw std::invalid_argument("sinr: beamformer is zero");
  const Index ru = ch.user_to_ru[static_cast<std::size_t>(k)];
  const Scalar signal = ch.tx_power_w * std::norm(u.dot(ch.h[static_cast<std::size_t>(k)]));
  Scalar interference = 0;
  for (Index l : ch.users_of_ru(ru)) {
    if (l == k) continue;
    interference += ch.tx_power_w * std::norm(u.dot(ch.h[static_cast<std::size_t>(l)]));
  }
  return signal / (interference + u_norm2 * ch.noise_power_w(ru));
}

/// Shannon rate B log2(1 + sinr) in bits/s.
template <typename Scalar>
Scalar uplink_rate(Scalar bandwidth_hz, Scalar sinr_value) {
  if (sinr_value < 0) throw std::invalid_argument("uplink_rate: negative sinr");
  return bandwidth_hz * std::log2(Scalar(1) + sinr_value);
}

/// Seconds to push D bits at `rate`. A non-positive rate yields +inf, the
/// marker for an infeasible user.
template <typename Scalar>
Scalar access_delay(Scalar data_bits, Scalar rate) {
  if (data_bits == 0) return 0;
  if (!(rate > 0)) return std::numeric_limits<Scalar>::infinity();
  return data_bits / rate;
}

template <typename Scalar>
bool is_infeasible_delay(Scalar delay) {
  return !std::isfinite(delay);
}

/// Per-user uplink rates (bits/s) using MMSE beamformers at every RU.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mmse_rates(const Topology& topology, const ChannelSet<Scalar>& ch) {
  const auto u = mmse_beamformers(ch);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rates(ch.num_users());
  for (Index k = 0; k < ch.num_users(); ++k) {
    const Index i = ch.user_to_ru[static_cast<std::size_t>(k)];
    rates(k) = uplink_rate(static_cast<Scalar>(topology.uplink_bandwidth_hz(i)),
                           sinr(ch, u[static_cast<std::size_t>(k)], k));
  }
  return rates;
}

}  // namespace fogran::phy
