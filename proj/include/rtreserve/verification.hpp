#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rtreserve/distributions.hpp"

namespace rtreserve {

/// One row of the bias / second-moment sweep over Gaussian widths.
struct BoundRow {
  double sigma = 0.0;
  double bias = 0.0;
  double bias_bound = 0.0;
  double second_moment = 0.0;
  double second_moment_bound = 0.0;
  bool pass = false;
};

inline constexpr std::string_view kBoundHeader = "sigma,B_k,bound_B,V_k,bound_V,pass";

/// B_k and the max of E[∇p_k²] over `moment_grid` reserves in [0, b̄]
/// for each sigma, each against its upper bound.
std::vector<BoundRow> bound_sweep(const BidDistribution& dist, std::span<const double> sigmas,
                                  std::size_t moment_grid = 201);
std::string bound_csv(std::span<const BoundRow> rows);

/// Closed-form ∇p_k against central differences of p_k on random triples
/// (r in [-0.5, 1.5], b in [0, 1], sigma log-uniform in [0.01, 1]).
struct FiniteDifferenceReport {
  std::size_t triples = 0;
  double max_error = 0.0;
  bool pass = false;
};

FiniteDifferenceReport finite_difference_check(std::size_t triples, std::uint64_t seed,
                                               double tol = 1e-6);

/// Monte Carlo mean of ∇p_k(r, B) against central differences of the
/// quadrature Π_k, one row per reserve.
struct UnbiasednessRow {
  double reserve = 0.0;
  double mc_mean = 0.0;
  double std_error = 0.0;
  double reference = 0.0;
  double z = 0.0;
  bool pass = false;
};

std::vector<UnbiasednessRow> unbiasedness_check(const BidDistribution& dist, double sigma,
                                                std::span<const double> reserves,
                                                std::size_t samples, std::uint64_t seed,
                                                double max_z = 3.0);

/// Sign flips of the numerical gradient of Π_k on `grid_points` points of
/// [-0.5, b̄ + 0.5].
struct SignChangeRow {
  double sigma = 0.0;
  std::size_t sign_changes = 0;
  bool pass = false;
};

std::vector<SignChangeRow> sign_change_check(const BidDistribution& dist,
                                             std::span<const double> sigmas,
                                             std::size_t grid_points = 10000);

}  // namespace rtreserve
