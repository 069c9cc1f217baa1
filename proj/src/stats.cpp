#include "smc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace smc::stats {

double SampleCounts::phat() const {
    if (n <= 0) throw std::domain_error("phat undefined for n = 0");
    return static_cast<double>(k) / static_cast<double>(n);
}

const char* method_name(CiMethod m) {
    switch (m) {
        case CiMethod::Hoeffding: return "hoeffding";
        case CiMethod::ClopperPearson: return "clopper-pearson";
        case CiMethod::WilsonCC: return "wilson-cc";
        case CiMethod::Scenario: return "scenario";
        case CiMethod::BennettTrivialVariance: return "bennett-trivial-variance";
    }
    return "?";
}

CiMethod method_from_name(const std::string& name) {
    if (name == "hoeffding") return CiMethod::Hoeffding;
    if (name == "clopper-pearson" || name == "cp") return CiMethod::ClopperPearson;
    if (name == "wilson-cc") return CiMethod::WilsonCC;
    if (name == "scenario") return CiMethod::Scenario;
    if (name == "bennett-trivial-variance") return CiMethod::BennettTrivialVariance;
    throw std::invalid_argument("unknown CI method: " + name);
}

bool method_is_sound(CiMethod m) {
    // Wilson-CC is demonstration only; the scenario method is a dominated
    // reparametrization of Clopper-Pearson but still sound.
    return m == CiMethod::Hoeffding || m == CiMethod::ClopperPearson ||
           m == CiMethod::Scenario;
}

namespace {

void check_delta(double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("delta must be in (0,1)");
}

double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Continued fraction for the incomplete beta function (modified Lentz).
double betacf(double x, double a, double b) {
    // Near the crossover x ~ a/(a+b) the fraction needs O(sqrt(a+b)) terms;
    // n can reach ~10^7 in sample-complexity searches.
    constexpr int kMaxIter = 50000;
    constexpr double kEps = 1e-15;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw std::runtime_error("betacf did not converge");
}

} // namespace

double regularized_incomplete_beta(double x, double a, double b) {
    if (!(a > 0.0 && b > 0.0)) throw std::domain_error("beta parameters must be positive");
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("x must be in [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double front =
        std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * betacf(x, a, b) / a;
    return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - log_beta(a, b)) *
                     betacf(1.0 - x, b, a) / b;
}

double inverse_regularized_beta(double q, double a, double b) {
    if (!(a > 0.0 && b > 0.0)) throw std::domain_error("beta parameters must be positive");
    if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("q must be in [0,1]");
    if (q == 0.0) return 0.0;
    if (q == 1.0) return 1.0;

    double lo = 0.0, hi = 1.0;
    double x = a / (a + b);
    const double log_pdf_front = -log_beta(a, b);
    constexpr double kTol = 1e-13;
    for (int iter = 0; iter < 200; ++iter) {
        const double f = regularized_incomplete_beta(x, a, b) - q;
        if (std::fabs(f) <= kTol) return x;
        if (std::nextafter(lo, 1.0) >= hi) return x; // interval exhausted in doubles
        if (f > 0.0) hi = x; else lo = x;
        // Newton step on I_x(a,b); derivative is the beta density.
        double step_x = x;
        if (x > 0.0 && x < 1.0) {
            const double pdf = std::exp(log_pdf_front + (a - 1.0) * std::log(x) +
                                        (b - 1.0) * std::log1p(-x));
            if (pdf > 0.0 && std::isfinite(pdf)) step_x = x - f / pdf;
        }
        if (step_x <= lo || step_x >= hi) step_x = 0.5 * (lo + hi);
        if (step_x == x) step_x = 0.5 * (lo + hi);
        x = step_x;
    }
    if (std::fabs(regularized_incomplete_beta(x, a, b) - q) <= 1e-12) return x;
    throw std::runtime_error("inverse_regularized_beta did not converge");
}

double normal_quantile(double q) {
    if (!(q > 0.0 && q < 1.0)) throw std::domain_error("quantile argument must be in (0,1)");
    // Acklam's rational approximation, refined by Newton steps on Phi via erfc.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (q < plow) {
        const double u = std::sqrt(-2.0 * std::log(q));
        x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
            ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    } else if (q <= 1.0 - plow) {
        const double u = q - 0.5;
        const double r = u * u;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double u = std::sqrt(-2.0 * std::log1p(-q));
        x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
            ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    }
    for (int i = 0; i < 2; ++i) {
        const double cdf = 0.5 * std::erfc(-x / std::sqrt(2.0));
        const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
        if (pdf <= 0.0) break;
        x -= (cdf - q) / pdf;
    }
    return x;
}

double erf_inverse(double x) {
    if (!(x > -1.0 && x < 1.0)) throw std::domain_error("erf_inverse argument in (-1,1)");
    // erfinv(x) = Phi^{-1}((x+1)/2) / sqrt(2)
    return normal_quantile(0.5 * (x + 1.0)) / std::sqrt(2.0);
}

double log_binomial_pmf(std::int64_t n, std::int64_t k, double p) {
    if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    if (p <= 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    if (p >= 1.0) return k == n ? 0.0 : -std::numeric_limits<double>::infinity();
    const double nd = static_cast<double>(n), kd = static_cast<double>(k);
    return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0) +
           kd * std::log(p) + (nd - kd) * std::log1p(-p);
}

double binomial_cdf(std::int64_t n, std::int64_t k, double p) {
    if (k < 0) return 0.0;
    if (k >= n) return 1.0;
    double sum = 0.0;
    for (std::int64_t i = 0; i <= k; ++i) sum += std::exp(log_binomial_pmf(n, i, p));
    return std::min(sum, 1.0);
}

// -- interval constructions ---------------------------------------------

double hoeffding_halfwidth(std::int64_t n, double delta) {
    check_delta(delta);
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n)));
}

Ci hoeffding_ci(SampleCounts c, double delta) {
    const double ch = hoeffding_halfwidth(c.n, delta);
    const double phat = c.phat();
    return Ci{std::max(0.0, phat - ch), std::min(1.0, phat + ch), CiMethod::Hoeffding,
              delta};
}

Ci clopper_pearson_ci(SampleCounts c, double delta) {
    check_delta(delta);
    if (c.n < 1) throw std::invalid_argument("n must be >= 1");
    const auto n = c.n;
    const auto k = c.k;
    double lo = 0.0, hi = 1.0;
    if (k > 0)
        lo = inverse_regularized_beta(delta / 2.0, static_cast<double>(k),
                                      static_cast<double>(n - k + 1));
    if (k < n)
        hi = inverse_regularized_beta(1.0 - delta / 2.0, static_cast<double>(k + 1),
                                      static_cast<double>(n - k));
    return Ci{lo, hi, CiMethod::ClopperPearson, delta};
}

Ci wilson_cc_ci(SampleCounts c, double delta) {
    check_delta(delta);
    if (c.n < 1) throw std::invalid_argument("n must be >= 1");
    const double n = static_cast<double>(c.n);
    const double phat = c.phat();
    const double z = normal_quantile(1.0 - delta / 2.0);
    const double z2 = z * z;
    const double denom = 2.0 * (n + z2);
    double lo = 0.0, hi = 1.0;
    if (c.k > 0) {
        const double rad = z2 - 1.0 / n + 4.0 * n * phat * (1.0 - phat) + (4.0 * phat - 2.0);
        lo = (2.0 * n * phat + z2 - (z * std::sqrt(std::max(0.0, rad)) + 1.0)) / denom;
    }
    if (c.k < c.n) {
        const double rad = z2 - 1.0 / n + 4.0 * n * phat * (1.0 - phat) - (4.0 * phat - 2.0);
        hi = (2.0 * n * phat + z2 + (z * std::sqrt(std::max(0.0, rad)) + 1.0)) / denom;
    }
    lo = std::clamp(lo, 0.0, 1.0);
    hi = std::clamp(hi, 0.0, 1.0);
    if (lo > hi) std::swap(lo, hi);
    return Ci{lo, hi, CiMethod::WilsonCC, delta};
}

Ci scenario_ci(SampleCounts c, double delta) {
    check_delta(delta);
    if (c.n < 1) throw std::invalid_argument("n must be >= 1");
    Ci ci = clopper_pearson_ci(c, delta / static_cast<double>(c.n));
    ci.method = CiMethod::Scenario;
    return ci;
}

Ci confidence_interval(CiMethod m, SampleCounts c, double delta, bool allow_empty) {
    check_delta(delta);
    if (c.n == 0) {
        if (!allow_empty) throw std::invalid_argument("zero samples");
        return Ci{0.0, 1.0, m, delta};
    }
    switch (m) {
        case CiMethod::Hoeffding: return hoeffding_ci(c, delta);
        case CiMethod::ClopperPearson: return clopper_pearson_ci(c, delta);
        case CiMethod::WilsonCC: return wilson_cc_ci(c, delta);
        case CiMethod::Scenario: return scenario_ci(c, delta);
        case CiMethod::BennettTrivialVariance: {
            const double h = bennett_trivial_variance_halfwidth(c.n, delta);
            const double phat = c.phat();
            return Ci{std::max(0.0, phat - h), std::min(1.0, phat + h),
                      CiMethod::BennettTrivialVariance, delta};
        }
    }
    throw std::logic_error("unreachable");
}

double bennett_trivial_variance_halfwidth(std::int64_t n, double delta) {
    check_delta(delta);
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    const double nd = static_cast<double>(n);
    const auto tail = [&](double t) {
        const double u = 4.0 * t / nd;
        const double h = (1.0 + u) * std::log1p(u) - u;
        return 2.0 * std::exp(-(nd / 4.0) * h);
    };
    // tail(t) is decreasing in t; find smallest t with tail(t) <= delta.
    double lo = 0.0, hi = 1.0;
    while (tail(hi) > delta && hi < 64.0 * nd) hi *= 2.0;
    if (tail(hi) > delta) return 1.0; // cannot satisfy; halfwidth clipped
    for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        if (tail(mid) <= delta) hi = mid; else lo = mid;
    }
    return hi / nd;
}

double l1_ball_radius(int k_successors, std::int64_t n, double delta) {
    check_delta(delta);
    if (k_successors < 2) throw std::invalid_argument("k_successors must be >= 2");
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    // log(2^k - 2); for k = 2 this is exactly log 2.
    double log_term;
    if (k_successors == 2) {
        log_term = std::log(2.0);
    } else if (k_successors < 63) {
        log_term = std::log(std::pow(2.0, k_successors) - 2.0);
    } else {
        log_term = k_successors * std::log(2.0) + std::log1p(-std::pow(2.0, 1 - k_successors));
    }
    return std::sqrt(2.0 * (log_term - std::log(delta)) / static_cast<double>(n));
}

// -- sample complexity ---------------------------------------------------

double interval_width(CiMethod m, std::int64_t n, std::int64_t k, double delta) {
    return confidence_interval(m, SampleCounts{n, k}, delta).width();
}

namespace {

std::int64_t smallest_n(CiMethod m, double delta, double eps,
                        const std::function<std::int64_t(std::int64_t)>& k_of_n) {
    check_delta(delta);
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    const auto fits = [&](std::int64_t n) {
        return interval_width(m, n, k_of_n(n), delta) <= eps;
    };
    std::int64_t hi = 1;
    while (!fits(hi)) {
        if (hi > (std::int64_t{1} << 40)) throw std::runtime_error("sample search overflow");
        hi *= 2;
    }
    std::int64_t lo = hi / 2; // lo = 0 when hi == 1
    while (lo + 1 < hi) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (fits(mid)) hi = mid; else lo = mid;
    }
    return hi;
}

} // namespace

std::int64_t worst_case_n(CiMethod m, double delta, double eps) {
    return smallest_n(m, delta, eps, [](std::int64_t n) { return n / 2; });
}

std::int64_t required_n_at_phat(CiMethod m, double delta, double eps, double phat) {
    if (!(phat >= 0.0 && phat <= 1.0)) throw std::invalid_argument("phat must be in [0,1]");
    return smallest_n(m, delta, eps, [phat](std::int64_t n) {
        const auto k = static_cast<std::int64_t>(std::llround(phat * static_cast<double>(n)));
        return std::clamp<std::int64_t>(k, 0, n);
    });
}

// -- coverage ------------------------------------------------------------

std::vector<double> coverage_curve(CiMethod m, std::int64_t n, double delta,
                                   const std::vector<double>& ps) {
    check_delta(delta);
    if (n < 1 || n > 10000) throw std::invalid_argument("coverage enumeration needs 1 <= n <= 10^4");
    std::vector<Ci> intervals;
    intervals.reserve(static_cast<std::size_t>(n) + 1);
    for (std::int64_t k = 0; k <= n; ++k)
        intervals.push_back(confidence_interval(m, SampleCounts{n, k}, delta));
    // Precompute log C(n,k).
    std::vector<double> log_choose(static_cast<std::size_t>(n) + 1);
    const double lg_n1 = std::lgamma(static_cast<double>(n) + 1.0);
    for (std::int64_t k = 0; k <= n; ++k)
        log_choose[static_cast<std::size_t>(k)] =
            lg_n1 - std::lgamma(static_cast<double>(k) + 1.0) -
            std::lgamma(static_cast<double>(n - k) + 1.0);

    std::vector<double> out;
    out.reserve(ps.size());
    for (double p : ps) {
        double cov = 0.0;
        for (std::int64_t k = 0; k <= n; ++k) {
            const Ci& ci = intervals[static_cast<std::size_t>(k)];
            if (p < ci.lo || p > ci.hi) continue;
            double logpmf;
            if (p <= 0.0)
                logpmf = (k == 0) ? 0.0 : -std::numeric_limits<double>::infinity();
            else if (p >= 1.0)
                logpmf = (k == n) ? 0.0 : -std::numeric_limits<double>::infinity();
            else
                logpmf = log_choose[static_cast<std::size_t>(k)] + k * std::log(p) +
                         (n - k) * std::log1p(-p);
            cov += std::exp(logpmf);
        }
        out.push_back(std::min(cov, 1.0));
    }
    return out;
}

double exact_coverage(CiMethod m, std::int64_t n, double delta, double p) {
    return coverage_curve(m, n, delta, {p}).front();
}

double min_coverage(CiMethod m, std::int64_t n, double delta, int points) {
    if (points < 2) throw std::invalid_argument("grid needs at least 2 points");
    std::vector<double> ps(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        ps[static_cast<std::size_t>(i)] = static_cast<double>(i) / (points - 1);
    const auto curve = coverage_curve(m, n, delta, ps);
    return *std::min_element(curve.begin(), curve.end());
}

// -- comparison formulas -------------------------------------------------

double wilson_limit_ratio(double delta) {
    check_delta(delta);
    const double e = erf_inverse(1.0 - delta);
    return (std::log(2.0) - std::log(delta)) / (e * e);
}

std::vector<RatioCell> ratio_grid(const std::vector<double>& deltas,
                                  const std::vector<double>& epsilons) {
    std::vector<RatioCell> cells;
    cells.reserve(deltas.size() * epsilons.size());
    for (double eps : epsilons) {
        for (double d : deltas) {
            const auto nh = worst_case_n(CiMethod::Hoeffding, d, eps);
            const auto ncp = worst_case_n(CiMethod::ClopperPearson, d, eps);
            cells.push_back(RatioCell{d, eps, nh, ncp,
                                      static_cast<double>(nh) / static_cast<double>(ncp)});
        }
    }
    return cells;
}

std::string ratio_grid_csv(const std::vector<RatioCell>& cells) {
    std::ostringstream os;
    os.precision(12);
    os << "delta,epsilon,n_hoeffding,n_cp,ratio\n";
    for (const auto& c : cells)
        os << c.delta << ',' << c.epsilon << ',' << c.n_hoeffding << ',' << c.n_cp << ','
           << c.ratio << '\n';
    return os.str();
}

} // namespace smc::stats
