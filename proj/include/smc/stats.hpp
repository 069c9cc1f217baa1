#ifndef SMC_STATS_HPP
#define SMC_STATS_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace smc::stats {

/// Sufficient statistics for a single binomial estimation task: n trials, k successes.
struct SampleCounts {
    std::int64_t n = 0;
    std::int64_t k = 0;

    double phat() const;
};

enum class CiMethod {
    Hoeffding,
    ClopperPearson,
    WilsonCC,
    Scenario,
    BennettTrivialVariance,
};

const char* method_name(CiMethod m);
CiMethod method_from_name(const std::string& name);

/// True for the methods that give a guaranteed coverage of 1-delta for every p.
bool method_is_sound(CiMethod m);

/// A two-sided confidence interval on a probability.
struct Ci {
    double lo = 0.0;
    double hi = 1.0;
    CiMethod method = CiMethod::Hoeffding;
    double delta = 0.0;

    double width() const { return hi - lo; }
};

// -- special functions --------------------------------------------------

/// Regularized incomplete beta function I_x(a,b), continued-fraction evaluation.
double regularized_incomplete_beta(double x, double a, double b);

/// Inverse of I_x(a,b) in x: returns p with I_p(a,b) = q, |I(p)-q| <= 1e-12.
double inverse_regularized_beta(double q, double a, double b);

/// Quantile of the standard normal distribution.
double normal_quantile(double q);

/// Inverse error function, via the normal quantile.
double erf_inverse(double x);

/// log P[Bin(n,p) = k]
double log_binomial_pmf(std::int64_t n, std::int64_t k, double p);

/// P[Bin(n,p) <= k], summed in log space.
double binomial_cdf(std::int64_t n, std::int64_t k, double p);

// -- interval constructions ---------------------------------------------

double hoeffding_halfwidth(std::int64_t n, double delta);
Ci hoeffding_ci(SampleCounts c, double delta);
Ci clopper_pearson_ci(SampleCounts c, double delta);
Ci wilson_cc_ci(SampleCounts c, double delta);
Ci scenario_ci(SampleCounts c, double delta);

/// Dispatch on method; with allow_empty, n = 0 yields the trivial interval [0,1].
Ci confidence_interval(CiMethod m, SampleCounts c, double delta, bool allow_empty = false);

/// Smallest half-width t/n with 2 exp(-(n/4) h(4t/n)) <= delta, h(u) = (1+u)ln(1+u)-u.
double bennett_trivial_variance_halfwidth(std::int64_t n, double delta);

/// L1-ball radius sqrt(2 (log(2^k - 2) - log delta) / n) for a k-outcome distribution.
double l1_ball_radius(int k_successors, std::int64_t n, double delta);

// -- sample complexity ---------------------------------------------------

/// Interval width for the given counts, including clipping to [0,1].
double interval_width(CiMethod m, std::int64_t n, std::int64_t k, double delta);

/// Smallest n such that the width at k = floor(n/2) is <= eps.
std::int64_t worst_case_n(CiMethod m, double delta, double eps);

/// Smallest n such that the width at k = round(phat * n) is <= eps.
std::int64_t required_n_at_phat(CiMethod m, double delta, double eps, double phat);

// -- coverage ------------------------------------------------------------

/// Exact coverage probability at a single true p (enumeration over k).
double exact_coverage(CiMethod m, std::int64_t n, double delta, double p);

/// Coverage at each p of the grid; intervals for all k are computed once.
std::vector<double> coverage_curve(CiMethod m, std::int64_t n, double delta,
                                   const std::vector<double>& ps);

/// Minimum coverage over an evenly spaced grid of `points` values of p in [0,1].
double min_coverage(CiMethod m, std::int64_t n, double delta, int points);

// -- comparison formulas -------------------------------------------------

/// Limit ratio (log 2 - log delta) / erfinv(1 - delta)^2 of Hoeffding vs Wilson-CC
/// sample complexity as the precision goes to 0.
double wilson_limit_ratio(double delta);

struct RatioCell {
    double delta;
    double epsilon;
    std::int64_t n_hoeffding;
    std::int64_t n_cp;
    double ratio;
};

/// Worst-case sample-complexity ratio Hoeffding / Clopper-Pearson per (delta, eps).
std::vector<RatioCell> ratio_grid(const std::vector<double>& deltas,
                                  const std::vector<double>& epsilons);

/// CSV with header `delta,epsilon,n_hoeffding,n_cp,ratio`, 12 significant digits.
std::string ratio_grid_csv(const std::vector<RatioCell>& cells);

} // namespace smc::stats

#endif
