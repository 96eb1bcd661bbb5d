#include "balldyn/kernels.hpp"

#include <exception>

namespace balldyn::kernels {

namespace {

// Runs body(i) for i in [0, n); exceptions are carried out of the parallel
// region and the one with the smallest index is rethrown.
template <class Body>
void sweep(int n, bool parallel, Body body) {
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(static) if (parallel)
  for (int i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<double> distances(const std::vector<DomainPoint>& a, const std::vector<DomainPoint>& b,
                              const MetricConvention& conv, bool parallel) {
  if (a.size() != b.size()) throw InvalidArgument("distance_batch: size mismatch");
  std::vector<double> out(a.size());
  sweep(static_cast<int>(a.size()), parallel,
        [&](int i) { out[i] = kobayashi_distance(a[i], b[i], conv); });
  return out;
}

std::vector<double> commutation(const MapDescription& f, const MapDescription& g,
                                const std::vector<DomainPoint>& xs, const MetricConvention& conv,
                                bool parallel) {
  std::vector<double> out(xs.size());
  sweep(static_cast<int>(xs.size()), parallel, [&](int i) {
    out[i] = kobayashi_distance(eval(f, eval(g, xs[i])), eval(g, eval(f, xs[i])), conv);
  });
  return out;
}

std::vector<PullbackResult> pullbacks(const CommutingFamily& F,
                                      const std::vector<DomainPoint>& bases,
                                      const SemiModelParams& params, bool parallel) {
  std::vector<PullbackResult> out(bases.size());
  sweep(static_cast<int>(bases.size()), parallel,
        [&](int i) { out[i] = limit_pullback_form(F, bases[i], params); });
  return out;
}

}  // namespace

std::vector<double> distance_batch(const std::vector<DomainPoint>& a,
                                   const std::vector<DomainPoint>& b,
                                   const MetricConvention& conv) {
  return distances(a, b, conv, true);
}

std::vector<double> commutation_residuals(const MapDescription& f, const MapDescription& g,
                                          const std::vector<DomainPoint>& xs,
                                          const MetricConvention& conv) {
  return commutation(f, g, xs, conv, true);
}

std::vector<PullbackResult> pullback_forms(const CommutingFamily& F,
                                           const std::vector<DomainPoint>& bases,
                                           const SemiModelParams& params) {
  return pullbacks(F, bases, params, true);
}

namespace serial {

std::vector<double> distance_batch(const std::vector<DomainPoint>& a,
                                   const std::vector<DomainPoint>& b,
                                   const MetricConvention& conv) {
  return distances(a, b, conv, false);
}

std::vector<double> commutation_residuals(const MapDescription& f, const MapDescription& g,
                                          const std::vector<DomainPoint>& xs,
                                          const MetricConvention& conv) {
  return commutation(f, g, xs, conv, false);
}

std::vector<PullbackResult> pullback_forms(const CommutingFamily& F,
                                           const std::vector<DomainPoint>& bases,
                                           const SemiModelParams& params) {
  return pullbacks(F, bases, params, false);
}

}  // namespace serial

}  // namespace balldyn::kernels
