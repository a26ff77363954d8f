#include "ppbt/bayes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <tuple>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "ppbt/error.hpp"

namespace ppbt {

BetaParams::BetaParams(double a_, double b_) : a(a_), b(b_) {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
        throw ConfigError("beta parameters must be positive and finite (a=" +
                          std::to_string(a) + ", b=" + std::to_string(b) +
                          ")");
    }
}

ArmData::ArmData(int n_, int x_) : n(n_), x(x_) {
    if (n < 0 || x < 0 || x > n) {
        throw ConfigError("arm data requires 0 <= x <= n (n=" +
                          std::to_string(n) + ", x=" + std::to_string(x) +
                          ")");
    }
}

ThresholdPair::ThresholdPair(double posterior_, double predictive_)
    : posterior(posterior_), predictive(predictive_) {
    auto inside = [](double v) { return v > 0.0 && v < 1.0; };
    if (!inside(posterior) || !inside(predictive)) {
        throw ConfigError("thresholds must lie strictly inside (0, 1)");
    }
}

BetaParams posterior(const BetaParams& prior, const ArmData& data) {
    return BetaParams(prior.a + data.x, prior.b + data.n - data.x);
}

namespace {

using Gauss = boost::math::quadrature::gauss<double, 20>;

constexpr int kStartPanels = 8;
constexpr int kMaxPanels = 1024;

double log_beta_fn(double a, double b) {
    return boost::math::lgamma(a) + boost::math::lgamma(b) -
           boost::math::lgamma(a + b);
}

/*
 * Quadrature nodes for u = sin^2(phi), phi in [0, pi/2]. The range is split at
 * pi/4 and each half is mapped from tau in [0, 1] by a power grading
 *
 *   lower: phi = (pi/4) tau^r0          upper: phi = pi/2 - (pi/4) (1-tau)^r1
 *
 * With half-integer or integer shapes the sin^2 substitution alone makes the
 * integrand smooth and r = 1. Other shapes leave a fractional power of phi at
 * the endpoint; the grading raises it so Gauss-Legendre keeps converging
 * quickly. Each half carries `panels / 2` equal Gauss-Legendre panels in tau.
 */
struct NodeSet {
    std::vector<double> weight;   // Gauss-Legendre weight
    std::vector<double> log_jac;  // log dphi/dtau
    std::vector<double> log_sin;
    std::vector<double> log_cos;
    std::vector<double> sin2;
    std::vector<double> cos2;
    double half_width;  // half panel width in tau
    std::size_t size() const { return weight.size(); }
};

constexpr double kSmoothExponent = 8.0;
constexpr double kMaxGrading = 64.0;

// Grading exponent for one endpoint. `shapes` are the beta parameters whose
// power behaviour meets at that end (density and tail).
double grading(double s1, double s2) {
    double r = 1.0;
    for (double s : {s1, s2}) {
        const double two = 2.0 * s;
        if (two != std::floor(two) && two < kSmoothExponent) {
            r = std::max(r, kSmoothExponent / two);
        }
    }
    return std::min(r, kMaxGrading);
}

// log(sin x) for x in (0, pi/4], accurate when x underflows sin's range.
double log_sin_small(double log_x, double x) {
    const double ratio = x > 1e-4 ? std::sin(x) / x : 1.0 - x * x / 6.0;
    return log_x + std::log(ratio);
}

const NodeSet& node_set(int panels, double r0, double r1) {
    static std::mutex mutex;
    static std::map<std::tuple<int, double, double>, std::unique_ptr<NodeSet>>
        sets;
    std::lock_guard lock(mutex);
    auto& slot = sets[{panels, r0, r1}];
    if (!slot) {
        const auto& x = Gauss::abscissa();
        const auto& w = Gauss::weights();
        const double quarter = std::numbers::pi / 4.0;
        const double log_quarter = std::log(quarter);
        const int half = panels / 2;
        const double width = 1.0 / half;
        slot = std::make_unique<NodeSet>();
        auto& n = *slot;
        n.half_width = width / 2.0;
        auto add = [&](double tau, double weight, bool upper) {
            // d = distance from the graded endpoint in tau.
            const double d = upper ? 1.0 - tau : tau;
            const double r = upper ? r1 : r0;
            const double log_d = std::log(d);
            const double log_e = log_quarter + r * log_d;  // log of the offset
            const double e = std::exp(log_e);
            const double ls = log_sin_small(log_e, e);
            const double lc = std::log(std::cos(e));
            n.weight.push_back(weight);
            n.log_jac.push_back(log_quarter + std::log(r) + (r - 1.0) * log_d);
            if (upper) {
                n.log_sin.push_back(lc);
                n.log_cos.push_back(ls);
            } else {
                n.log_sin.push_back(ls);
                n.log_cos.push_back(lc);
            }
            n.sin2.push_back(std::exp(2.0 * n.log_sin.back()));
            n.cos2.push_back(std::exp(2.0 * n.log_cos.back()));
        };
        for (bool upper : {false, true}) {
            for (int p = 0; p < half; ++p) {
                const double mid = (p + 0.5) * width;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    add(mid - n.half_width * x[i], w[i], upper);
                    add(mid + n.half_width * x[i], w[i], upper);
                }
            }
        }
    }
    return *slot;
}

const NodeSet& node_set(int panels, const BetaParams& trt,
                        const BetaParams& ctl) {
    return node_set(panels, grading(ctl.a, trt.a), grading(ctl.b, trt.b));
}

void require_finite(double value, const char* what) {
    if (!std::isfinite(value)) {
        throw NumericalError(std::string("prob_greater: non-finite ") + what);
    }
}

// Control posterior density times du/dtau at each node.
std::vector<double> density_at(const NodeSet& nodes, const BetaParams& ctl) {
    const double log_norm = std::log(2.0) - log_beta_fn(ctl.a, ctl.b);
    std::vector<double> out(nodes.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::exp(log_norm + (2.0 * ctl.a - 1.0) * nodes.log_sin[i] +
                          (2.0 * ctl.b - 1.0) * nodes.log_cos[i] +
                          nodes.log_jac[i]);
        require_finite(out[i], "density");
    }
    return out;
}

// Treatment posterior upper tail P(p_trt > u) at each node. The reflected
// form is used above u = 1/2 so that 1 - u is never formed by subtraction.
std::vector<double> tail_at(const NodeSet& nodes, const BetaParams& trt) {
    std::vector<double> out(nodes.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = nodes.sin2[i] < 0.5
                     ? boost::math::ibetac(trt.a, trt.b, nodes.sin2[i])
                     : boost::math::ibeta(trt.b, trt.a, nodes.cos2[i]);
        require_finite(out[i], "tail");
    }
    return out;
}

double combine(const NodeSet& nodes, std::span<const double> density,
               std::span<const double> tail) {
    const std::size_t per_panel = 2 * Gauss::abscissa().size();
    double total = 0.0;
    double panel = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        panel += nodes.weight[i] * density[i] * tail[i];
        if ((i + 1) % per_panel == 0) {
            total += panel * nodes.half_width;
            panel = 0.0;
        }
    }
    require_finite(total, "quadrature sum");
    return total;
}

// Panel doubling until successive estimates agree to tol. `estimate(panels)`
// returns the composite rule with that many panels.
template <class Estimate>
double refine(Estimate&& estimate, double tol) {
    double coarse = estimate(kStartPanels);
    for (int panels = 2 * kStartPanels; panels <= kMaxPanels; panels *= 2) {
        const double fine = estimate(panels);
        if (std::abs(fine - coarse) <= tol) return std::clamp(fine, 0.0, 1.0);
        coarse = fine;
    }
    throw NumericalError("prob_greater: quadrature did not reach tolerance");
}

template <class Indicator>
double predictive_sum(const ArmData& trt, const ArmData& ctl, int n_trt_max,
                      int n_ctl_max, const BetaParams& prior,
                      Indicator&& success) {
    if (trt.n > n_trt_max || ctl.n > n_ctl_max) {
        throw ConfigError("ppp: current enrollment exceeds the arm maximum");
    }
    const auto w_trt =
        beta_binomial_pmf(n_trt_max - trt.n, posterior(prior, trt));
    const auto w_ctl =
        beta_binomial_pmf(n_ctl_max - ctl.n, posterior(prior, ctl));
    double total = 0.0;
    for (std::size_t k = 0; k < w_trt.size(); ++k) {
        double inner = 0.0;
        for (std::size_t j = 0; j < w_ctl.size(); ++j) {
            if (success(trt.x + static_cast<int>(k),
                        ctl.x + static_cast<int>(j))) {
                inner += w_ctl[j];
            }
        }
        total += w_trt[k] * inner;
    }
    return std::clamp(total, 0.0, 1.0);
}

}  // namespace

double prob_greater(const BetaParams& post_trt, const BetaParams& post_ctl,
                    double tol) {
    if (!(tol > 0.0)) {
        throw ConfigError("prob_greater: tolerance must be positive");
    }
    return refine(
        [&](int panels) {
            const auto& nodes = node_set(panels, post_trt, post_ctl);
            return combine(nodes, density_at(nodes, post_ctl),
                           tail_at(nodes, post_trt));
        },
        tol);
}

std::vector<double> beta_binomial_pmf(int n_future, const BetaParams& post) {
    if (n_future < 0) {
        throw ConfigError("beta_binomial_pmf: negative number of patients");
    }
    const auto n = static_cast<std::size_t>(n_future);
    std::vector<double> pmf(n + 1);
    // Log-ratio recurrence P(k+1)/P(k) = (n-k)(k+a) / ((k+1)(n-k-1+b)),
    // normalized at the end.
    pmf[0] = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double kk = static_cast<double>(k);
        const double nk = static_cast<double>(n - k);
        pmf[k + 1] = pmf[k] + std::log(nk) + std::log(kk + post.a) -
                     std::log(kk + 1.0) - std::log(nk - 1.0 + post.b);
    }
    const double peak = *std::max_element(pmf.begin(), pmf.end());
    double sum = 0.0;
    for (auto& v : pmf) {
        v = std::exp(v - peak);
        sum += v;
    }
    for (auto& v : pmf) v /= sum;
    return pmf;
}

Decision futility_decision(double ppp, const ThresholdPair& thresholds) {
    return ppp < thresholds.predictive ? Decision::Stop : Decision::Continue;
}

FinalAnalysisGrid::FinalAnalysisGrid(int n_trt_max, int n_ctl_max,
                                     const BetaParams& prior, double tol)
    : n_trt_max_(n_trt_max), n_ctl_max_(n_ctl_max), prior_(prior) {
    if (n_trt_max < 0 || n_ctl_max < 0) {
        throw ConfigError("final analysis grid: negative maximum");
    }
    if (!(tol > 0.0)) {
        throw ConfigError("final analysis grid: tolerance must be positive");
    }
    // Node vectors are shared across the grid; each entry is bit-identical
    // to a direct prob_greater call on the same posteriors.
    std::map<std::pair<const NodeSet*, int>, std::vector<double>> densities;
    std::map<std::pair<const NodeSet*, int>, std::vector<double>> tails;
    auto density = [&](const NodeSet& nodes, int xc) -> const std::vector<double>& {
        auto& slot = densities[{&nodes, xc}];
        if (slot.empty()) {
            slot = density_at(nodes, posterior(prior, ArmData(n_ctl_max, xc)));
        }
        return slot;
    };
    auto tail = [&](const NodeSet& nodes, int xt) -> const std::vector<double>& {
        auto& slot = tails[{&nodes, xt}];
        if (slot.empty()) {
            slot = tail_at(nodes, posterior(prior, ArmData(n_trt_max, xt)));
        }
        return slot;
    };
    pg_.resize(static_cast<std::size_t>(n_trt_max + 1) * (n_ctl_max + 1));
    for (int xt = 0; xt <= n_trt_max; ++xt) {
        for (int xc = 0; xc <= n_ctl_max; ++xc) {
            pg_[static_cast<std::size_t>(xt) * (n_ctl_max + 1) + xc] = refine(
                [&](int panels) {
                    const auto& nodes =
                        node_set(panels, posterior(prior, ArmData(n_trt_max, xt)),
                                 posterior(prior, ArmData(n_ctl_max, xc)));
                    return combine(nodes, density(nodes, xc), tail(nodes, xt));
                },
                tol);
        }
    }
}

double ppp_two_sample(const ArmData& trt, const ArmData& ctl, int n_trt_max,
                      int n_ctl_max, const BetaParams& prior, double theta,
                      double tol) {
    return predictive_sum(
        trt, ctl, n_trt_max, n_ctl_max, prior, [&](int xt, int xc) {
            return prob_greater(posterior(prior, ArmData(n_trt_max, xt)),
                                posterior(prior, ArmData(n_ctl_max, xc)),
                                tol) > theta;
        });
}

double ppp_two_sample(const ArmData& trt, const ArmData& ctl,
                      const FinalAnalysisGrid& grid, double theta) {
    return predictive_sum(
        trt, ctl, grid.n_trt_max(), grid.n_ctl_max(), grid.prior(),
        [&](int xt, int xc) { return grid.success(xt, xc, theta); });
}

std::size_t PPPKeyHash::operator()(const PPPKey& k) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
        h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    };
    mix(static_cast<std::uint64_t>(k.x_trt));
    mix(static_cast<std::uint64_t>(k.n_trt));
    mix(static_cast<std::uint64_t>(k.x_ctl));
    mix(static_cast<std::uint64_t>(k.n_ctl));
    mix(static_cast<std::uint64_t>(k.n_trt_remaining));
    mix(static_cast<std::uint64_t>(k.n_ctl_remaining));
    mix(std::hash<double>{}(k.theta));
    return static_cast<std::size_t>(h);
}

PPPEngine::PPPEngine(BetaParams prior, double tol) : prior_(prior), tol_(tol) {
    if (!(tol > 0.0)) throw ConfigError("PPPEngine: tolerance must be positive");
}

const FinalAnalysisGrid& PPPEngine::grid(int n_trt_max, int n_ctl_max) const {
    const std::uint64_t key =
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(n_trt_max))
         << 32) |
        static_cast<std::uint32_t>(n_ctl_max);
    std::lock_guard lock(grid_mutex_);
    auto& slot = grids_[key];
    if (!slot) {
        slot = std::make_unique<FinalAnalysisGrid>(n_trt_max, n_ctl_max,
                                                   prior_, tol_);
    }
    return *slot;
}

double PPPEngine::ppp(const ArmData& trt, const ArmData& ctl, int n_trt_max,
                      int n_ctl_max, double theta) const {
    const PPPKey key{trt.x,          trt.n, ctl.x, ctl.n, n_trt_max - trt.n,
                     n_ctl_max - ctl.n, theta};
    {
        std::shared_lock lock(cache_mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    const double value =
        ppp_two_sample(trt, ctl, grid(n_trt_max, n_ctl_max), theta);
    std::unique_lock lock(cache_mutex_);
    cache_.emplace(key, value);
    return value;
}

double PPPEngine::current_prob_greater(const ArmData& trt,
                                       const ArmData& ctl) const {
    return prob_greater(posterior(prior_, trt), posterior(prior_, ctl), tol_);
}

std::size_t PPPEngine::cache_size() const {
    std::shared_lock lock(cache_mutex_);
    return cache_.size();
}

}  // namespace ppbt
