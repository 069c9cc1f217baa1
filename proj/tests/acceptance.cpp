// Acceptance gate: one pass/fail line per criterion; exit code = #failures.
// Run from the repository root (bundled models are loaded from models/).

#include "smc/model.hpp"
#include "smc/pipeline.hpp"
#include "smc/solver.hpp"
#include "smc/stats.hpp"
#include "smc/transform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../tests/test_helpers.hpp"

using namespace smc;

namespace {

int failures = 0;

void report(int id, const char* desc, bool ok) {
    std::printf("criterion %2d [%s] %s\n", id, ok ? "PASS" : "FAIL", desc);
    if (!ok) ++failures;
}

model::Mdp load(const std::string& name) {
    std::ifstream in("models/" + name);
    if (!in) throw std::runtime_error("missing models/" + name);
    std::ostringstream ss;
    ss << in.rdbuf();
    return model::parse_model(ss.str());
}

// Independent Clopper-Pearson oracle: bisection on the binomial CDF.
double cp_lo_oracle(std::int64_t n, std::int64_t k, double delta) {
    if (k == 0) return 0.0;
    double a = 0.0, b = 1.0;
    for (int i = 0; i < 40; ++i) {
        const double mid = 0.5 * (a + b);
        // P[Bin(n,mid) >= k] vs delta/2
        if (1.0 - stats::binomial_cdf(n, k - 1, mid) < delta / 2.0)
            a = mid;
        else
            b = mid;
    }
    return 0.5 * (a + b);
}

double cp_hi_oracle(std::int64_t n, std::int64_t k, double delta) {
    if (k == n) return 1.0;
    double a = 0.0, b = 1.0;
    for (int i = 0; i < 40; ++i) {
        const double mid = 0.5 * (a + b);
        if (stats::binomial_cdf(n, k, mid) > delta / 2.0)
            a = mid;
        else
            b = mid;
    }
    return 0.5 * (a + b);
}

// LP oracle for the robust Bellman inner problem: optimum at a vertex where
// at most one coordinate is strictly inside its bounds.
double lp_oracle(const solver::IntervalDist& d, const std::vector<double>& values,
                 bool maximize) {
    const auto k = d.succ.size();
    double best = maximize ? -1.0 : 2.0;
    for (std::size_t free = 0; free < k; ++free) {
        for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
            double sum = 0.0, val = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                if (i == free) continue;
                const double q = (mask >> i) & 1 ? d.hi[i] : d.lo[i];
                sum += q;
                val += q * values[static_cast<std::size_t>(d.succ[i])];
            }
            const double qf = 1.0 - sum;
            if (qf < d.lo[free] - 1e-12 || qf > d.hi[free] + 1e-12) continue;
            val += qf * values[static_cast<std::size_t>(d.succ[free])];
            best = maximize ? std::max(best, val) : std::min(best, val);
        }
    }
    return best;
}

pipeline::RunConfig full_config(double epsilon) {
    pipeline::RunConfig cfg;
    cfg.epsilon = epsilon;
    cfg.delta = 0.1;
    cfg.batch_size = 200;
    cfg.max_batches = 5000;
    return cfg;
}

pipeline::RunConfig baseline_config(double epsilon) {
    pipeline::RunConfig cfg = full_config(epsilon);
    cfg.method = stats::CiMethod::Hoeffding;
    cfg.budget_mode = budget::AllocationMode::Uniform;
    cfg.small_support = false;
    cfg.equivalence = false;
    cfg.chains = false;
    cfg.scc_fragments = false;
    return cfg;
}

void criterion1() {
    const double h = stats::hoeffding_halfwidth(1000, 0.05);
    report(1, "coin example half-width 0.04295 +/- 1e-4", std::fabs(h - 0.04295) <= 1e-4);
}

void criterion2() {
    bool ok = true;
    for (const double delta : {0.1, 0.01}) {
        for (std::int64_t n = 1; n <= 200 && ok; ++n) {
            for (std::int64_t k = 0; k <= n; ++k) {
                const auto ci = stats::clopper_pearson_ci({n, k}, delta);
                if (std::fabs(ci.lo - cp_lo_oracle(n, k, delta)) > 1e-9 ||
                    std::fabs(ci.hi - cp_hi_oracle(n, k, delta)) > 1e-9) {
                    ok = false;
                    break;
                }
            }
        }
    }
    report(2, "Clopper-Pearson matches the binomial-CDF oracle, n <= 200", ok);
}

void criterion3() {
    bool ok = true;
    for (const auto m : {stats::CiMethod::Hoeffding, stats::CiMethod::ClopperPearson}) {
        for (const double delta : {0.1, 0.01}) {
            for (std::int64_t n = 2; n <= 100; ++n) {
                const double mid = stats::interval_width(m, n, n / 2, delta);
                for (std::int64_t k = 0; k <= n; ++k)
                    if (stats::interval_width(m, n, k, delta) > mid + 1e-12) ok = false;
            }
        }
    }
    report(3, "interval width is maximized at k = floor(n/2)", ok);
}

void criterion4() {
    bool ok = true;
    for (const double eps : {0.001, 0.01, 0.1, 0.3, 0.5}) {
        const auto nh = stats::worst_case_n(stats::CiMethod::Hoeffding, 0.01, eps);
        const auto nc = stats::worst_case_n(stats::CiMethod::ClopperPearson, 0.01, eps);
        const double r = static_cast<double>(nh) / static_cast<double>(nc);
        if (!(r >= 1.3 && r <= 1.8)) ok = false;
    }
    report(4, "worst-case sample ratio stays near 1.5 at delta = 0.01", ok);
}

void criterion5() {
    bool ok = true;
    for (const double p : {0.01, 0.99}) {
        const auto nh = stats::required_n_at_phat(stats::CiMethod::Hoeffding, 0.01, 0.01, p);
        const auto nc =
            stats::required_n_at_phat(stats::CiMethod::ClopperPearson, 0.01, 0.01, p);
        if (static_cast<double>(nh) / static_cast<double>(nc) < 10.0) ok = false;
    }
    report(5, "extreme-phat sample ratio is at least an order of magnitude", ok);
}

void criterion6() {
    const std::vector<double> axis{0.001, 0.005, 0.01, 0.05, 0.1, 0.2, 0.5};
    const auto cells = stats::ratio_grid(axis, axis);
    bool ok = true;
    for (const auto& c : cells)
        if (!(c.ratio > 1.0)) ok = false;
    // per epsilon, the ratio is non-decreasing as delta grows
    for (std::size_t e = 0; e < axis.size(); ++e) {
        double prev = 0.0;
        for (const auto& c : cells)
            if (c.epsilon == axis[e]) {
                if (c.ratio < prev - 1e-12) ok = false;
                prev = c.ratio;
            }
    }
    report(6, "ratio grid exceeds 1 everywhere and rows are delta-monotone", ok);
}

void criterion7() {
    bool ok = true;
    for (const auto m : {stats::CiMethod::Hoeffding, stats::CiMethod::ClopperPearson})
        for (const std::int64_t n : {10, 50, 100, 200})
            for (const double delta : {0.1, 0.01})
                if (stats::min_coverage(m, n, delta, 1001) < 1.0 - delta - 1e-12) ok = false;
    report(7, "Hoeffding and Clopper-Pearson coverage is at least 1 - delta", ok);
}

void criterion8() {
    const double unsound = stats::min_coverage(stats::CiMethod::WilsonCC, 100, 0.01, 100001);
    const double sound = stats::min_coverage(stats::CiMethod::WilsonCC, 100, 0.1, 100001);
    report(8, "Wilson-CC dips below 0.97 at delta = 0.01 but holds 0.9 at 0.1",
           unsound < 0.97 && sound >= 0.9);
}

void criterion9() {
    bool ok = true;
    for (std::int64_t n = 1; n <= 100; ++n)
        for (std::int64_t k = 0; k <= n; ++k) {
            const auto s = stats::scenario_ci({n, k}, 0.05);
            const auto c =
                stats::clopper_pearson_ci({n, k}, 0.05 / static_cast<double>(n));
            if (s.lo != c.lo || s.hi != c.hi) ok = false;
        }
    report(9, "scenario method equals Clopper-Pearson at delta / n exactly", ok);
}

void criterion10() {
    bool ok = true;
    for (const double delta : {0.1, 0.01})
        for (std::int64_t n = 1; n <= 10000; ++n)
            if (std::fabs(stats::l1_ball_radius(2, n, delta) / 2.0 -
                          stats::hoeffding_halfwidth(n, delta)) > 1e-12)
                ok = false;
    report(10, "two-successor L1 radius halves to the Hoeffding half-width", ok);
}

void criterion11() {
    bool ok = true;
    for (const double delta : {0.1, 0.01, 0.001})
        for (std::int64_t n = 1; n <= 10000; ++n)
            if (stats::bennett_trivial_variance_halfwidth(n, delta) <
                stats::hoeffding_halfwidth(n, delta) - 1e-12)
                ok = false;
    report(11, "trivial-variance Bennett is never tighter than Hoeffding", ok);
}

void criterion12() {
    bool ok = std::fabs(stats::wilson_limit_ratio(0.1) - 2.214514255182) <= 1e-9;
    double prev = 1.0;
    for (int i = 0; i < 100; ++i) {
        const double delta = 0.001 + (0.9 - 0.001) * (i + 0.5) / 100.0;
        const double r = stats::wilson_limit_ratio(delta);
        if (!(r > 1.0) || !(r > prev)) ok = false;
        prev = r;
    }
    report(12, "Wilson limit ratio exceeds 1, grows in delta, matches the golden value",
           ok);
}

void criterion13() {
    bool ok = true;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto m = testing::make_random_mdp(seed);
        const double exact =
            model::exact_reachability_value(m, 1e-10)[static_cast<std::size_t>(m.initial)];
        const auto cm = transform::build_class_model(model::support_view(m),
                                                     {true, true, true, 1 << 20});
        if (std::fabs(transform::exact_transformed_value(m, cm, 1e-10) - exact) > 2e-6)
            ok = false;
    }
    report(13, "quotient transforms preserve the exact value on 100 random MDPs", ok);
}

void criterion14() {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    bool ok = true;
    for (int trial = 0; trial < 50; ++trial) {
        solver::IntervalDist d;
        std::vector<double> v(3), p(3);
        double sum = 0.0;
        for (auto& x : p) {
            x = 0.05 + u(gen);
            sum += x;
        }
        for (int i = 0; i < 3; ++i) {
            const double pi = p[static_cast<std::size_t>(i)] / sum;
            const double w = 0.3 * u(gen);
            d.succ.push_back(i);
            d.lo.push_back(std::max(0.0, pi - w));
            d.hi.push_back(std::min(1.0, pi + w));
            v[static_cast<std::size_t>(i)] = u(gen);
        }
        if (std::fabs(solver::robust_bellman(d, v, true) - lp_oracle(d, v, true)) > 1e-9 ||
            std::fabs(solver::robust_bellman(d, v, false) - lp_oracle(d, v, false)) > 1e-9)
            ok = false;
    }
    report(14, "greedy saturation matches the LP oracle on 50 random boxes", ok);
}

void criterion15() {
    const auto m = load("fig2.json");
    auto cfg = full_config(0.05);
    // At p = 0.9 the exact CP coverage oscillates just above 0.90 for large n
    // (0.9066 at n = 2000) but sits at 0.936 for n = 100, which leaves honest
    // slack for the 200-trial empirical check.
    cfg.fixed_paths = 100;
    const auto rep = pipeline::coverage_experiment(m, cfg, 200);
    std::printf("             (fig2 coverage: %d/%d, exact %.3f)\n", rep.contained,
                rep.trials, rep.exact_value);
    report(15, "end-to-end PAC coverage on fig2 reaches 90 percent", rep.fraction >= 0.90);
}

void criterion16() {
    struct Item {
        const char* name;
        double epsilon;
    };
    const Item items[] = {{"fig2.json", 0.05},
                          {"fig3.json", 0.05},
                          {"ladder.json", 0.1},
                          {"rare_coin.json", 0.02},
                          {"mec_grid.json", 0.05}};
    bool ok = true;
    double coin_ratio = 0.0;
    for (const auto& it : items) {
        const auto m = load(it.name);
        std::int64_t full = 0, base = 0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            auto f = full_config(it.epsilon);
            f.seed = seed;
            auto b = baseline_config(it.epsilon);
            b.seed = seed;
            full += pipeline::run_smc(m, f).paths;
            base += pipeline::run_smc(m, b).paths;
        }
        if (full > base) ok = false;
        const double ratio =
            static_cast<double>(base) / static_cast<double>(std::max<std::int64_t>(full, 1));
        if (std::string(it.name) == "rare_coin.json") coin_ratio = ratio;
        std::printf("             (%s: baseline/full path ratio %.2f)\n", it.name, ratio);
    }
    if (coin_ratio < 2.0) ok = false;
    report(16, "improvements never cost paths; rare coin saves a factor of 2", ok);
}

void criterion17() {
    const auto m = load("fig2.json");
    auto cfg = full_config(0.05);
    cfg.model_path = "models/fig2.json";
    cfg.seed = 42;
    const auto a = pipeline::result_to_json(cfg, pipeline::run_smc(m, cfg));
    const auto b = pipeline::result_to_json(cfg, pipeline::run_smc(m, cfg));
    report(17, "repeated runs produce byte-identical result JSON", a == b);
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    criterion11();
    criterion12();
    criterion13();
    criterion14();
    criterion15();
    criterion16();
    criterion17();
    if (failures == 0)
        std::printf("all 17 acceptance criteria passed\n");
    else
        std::printf("%d acceptance criteria FAILED\n", failures);
    return failures;
}
