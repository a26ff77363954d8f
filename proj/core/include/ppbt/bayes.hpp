#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

namespace ppbt {

/*
 * Beta(a, b) shape parameters of a response-rate prior or posterior.
 */
struct BetaParams {
    double a = 0.5;
    double b = 0.5;

    BetaParams() = default;
    BetaParams(double a_, double b_);

    friend bool operator==(const BetaParams&, const BetaParams&) = default;
};

/// Accrued data for one arm: n evaluated patients, x responses.
struct ArmData {
    int n = 0;
    int x = 0;

    ArmData() = default;
    ArmData(int n_, int x_);

    friend bool operator==(const ArmData&, const ArmData&) = default;
};

/// Posterior threshold (efficacy at the final analysis) and predictive
/// threshold (futility at interim looks).
struct ThresholdPair {
    double posterior = 0.9;
    double predictive = 0.1;

    ThresholdPair() = default;
    ThresholdPair(double posterior_, double predictive_);

    friend bool operator==(const ThresholdPair&,
                           const ThresholdPair&) = default;
};

enum class Decision : std::uint8_t { Continue = 0, Stop = 1 };

inline constexpr double kDefaultQuadTol = 1e-8;

BetaParams posterior(const BetaParams& prior, const ArmData& data);

/*
 * P(p_trt > p_ctl) for independent p_trt ~ Beta(post_trt) and
 * p_ctl ~ Beta(post_ctl).
 *
 * Evaluates the integral of f_ctl(u) * (1 - F_trt(u)) over [0, 1] after the
 * substitution u = sin^2(phi), with composite Gauss-Legendre panels doubled
 * until two successive estimates agree to `tol`. Throws NumericalError on a
 * non-finite integrand or when refinement does not converge.
 */
double prob_greater(const BetaParams& post_trt, const BetaParams& post_ctl,
                    double tol = kDefaultQuadTol);

/// Beta-binomial predictive PMF of the number of responses among
/// `n_future` further patients. Entry k is P(X* = k).
std::vector<double> beta_binomial_pmf(int n_future, const BetaParams& post);

/// Stop iff ppp is strictly below the predictive threshold.
Decision futility_decision(double ppp, const ThresholdPair& thresholds);

/*
 * Final-analysis success indicators for a (n_trt_max, n_ctl_max) comparison:
 * entry (x_trt, x_ctl) holds prob_greater on the complete data and whether it
 * exceeds theta. Shared by every PPP evaluation with the same maxima.
 */
class FinalAnalysisGrid {
   public:
    FinalAnalysisGrid(int n_trt_max, int n_ctl_max, const BetaParams& prior,
                      double tol = kDefaultQuadTol);

    int n_trt_max() const { return n_trt_max_; }
    int n_ctl_max() const { return n_ctl_max_; }
    const BetaParams& prior() const { return prior_; }

    double prob_greater_at(int x_trt, int x_ctl) const {
        return pg_[static_cast<std::size_t>(x_trt) * (n_ctl_max_ + 1) +
                   static_cast<std::size_t>(x_ctl)];
    }
    bool success(int x_trt, int x_ctl, double theta) const {
        return prob_greater_at(x_trt, x_ctl) > theta;
    }

   private:
    int n_trt_max_;
    int n_ctl_max_;
    BetaParams prior_;
    std::vector<double> pg_;
};

/*
 * Two-sample posterior predictive probability of final success:
 *
 *   sum over (k, j) of BB_trt(k) * BB_ctl(j) * I(PG(x_trt + k, x_ctl + j) > theta)
 *
 * where BB are the independent beta-binomial predictive PMFs of each arm's
 * remaining patients. This overload evaluates the indicator through
 * prob_greater directly.
 */
double ppp_two_sample(const ArmData& trt, const ArmData& ctl, int n_trt_max,
                      int n_ctl_max, const BetaParams& prior, double theta,
                      double tol = kDefaultQuadTol);

/// Same sum, reading the indicator from a precomputed final-analysis grid.
double ppp_two_sample(const ArmData& trt, const ArmData& ctl,
                      const FinalAnalysisGrid& grid, double theta);

/// Memoization key of one PPP evaluation.
struct PPPKey {
    int x_trt = 0;
    int n_trt = 0;
    int x_ctl = 0;
    int n_ctl = 0;
    int n_trt_remaining = 0;
    int n_ctl_remaining = 0;
    double theta = 0.0;

    friend bool operator==(const PPPKey&, const PPPKey&) = default;
};

struct PPPKeyHash {
    std::size_t operator()(const PPPKey& k) const noexcept;
};

/*
 * Thread-safe PPP evaluator for a fixed prior. Final-analysis grids are built
 * once per maxima pair and PPP values are memoized by PPPKey. The cache is a
 * full table; for the trial sizes used here it holds at most a few hundred
 * thousand entries.
 */
class PPPEngine {
   public:
    explicit PPPEngine(BetaParams prior = {}, double tol = kDefaultQuadTol);

    PPPEngine(const PPPEngine&) = delete;
    PPPEngine& operator=(const PPPEngine&) = delete;

    const BetaParams& prior() const { return prior_; }
    double tol() const { return tol_; }

    double ppp(const ArmData& trt, const ArmData& ctl, int n_trt_max,
               int n_ctl_max, double theta) const;

    /// prob_greater of the current posteriors (no predictive step).
    double current_prob_greater(const ArmData& trt, const ArmData& ctl) const;

    const FinalAnalysisGrid& grid(int n_trt_max, int n_ctl_max) const;

    std::size_t cache_size() const;

   private:
    BetaParams prior_;
    double tol_;
    mutable std::shared_mutex cache_mutex_;
    mutable std::unordered_map<PPPKey, double, PPPKeyHash> cache_;
    mutable std::mutex grid_mutex_;
    mutable std::unordered_map<std::uint64_t,
                               std::unique_ptr<FinalAnalysisGrid>>
        grids_;
};

}  // namespace ppbt
