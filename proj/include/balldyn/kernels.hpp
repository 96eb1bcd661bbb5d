#pragma once

#include <vector>

#include "balldyn/semimodel.hpp"

// Sample-sweep kernels.  The default versions run the sweep with OpenMP; the
// serial namespace holds the reference loops.  Each entry is computed
// independently, so both produce bit-identical output.
namespace balldyn::kernels {

// k(a_i, b_i) for each i.
std::vector<double> distance_batch(const std::vector<DomainPoint>& a,
                                   const std::vector<DomainPoint>& b,
                                   const MetricConvention& conv = {});

// k(f(g(x_i)), g(f(x_i))) for each sample.
std::vector<double> commutation_residuals(const MapDescription& f, const MapDescription& g,
                                          const std::vector<DomainPoint>& xs,
                                          const MetricConvention& conv = {});

// limit_pullback_form at each base point.
std::vector<PullbackResult> pullback_forms(const CommutingFamily& F,
                                           const std::vector<DomainPoint>& bases,
                                           const SemiModelParams& params = {});

namespace serial {

std::vector<double> distance_batch(const std::vector<DomainPoint>& a,
                                   const std::vector<DomainPoint>& b,
                                   const MetricConvention& conv = {});
std::vector<double> commutation_residuals(const MapDescription& f, const MapDescription& g,
                                          const std::vector<DomainPoint>& xs,
                                          const MetricConvention& conv = {});
std::vector<PullbackResult> pullback_forms(const CommutingFamily& F,
                                           const std::vector<DomainPoint>& bases,
                                           const SemiModelParams& params = {});

}  // namespace serial

}  // namespace balldyn::kernels
