#pragma once

// Distributions of latent competence p in [0,1]: Beta laws, truncated
// Gaussians, finite mixtures of the two, and a degenerate point mass for
// benchmark sanity checks. All types are immutable value objects and all
// operations are pure; sampling is a pure function of the seed.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "escm/errors.hpp"
#include "escm/quadrature.hpp"
#include "escm/rng.hpp"
#include "escm/stats.hpp"

namespace escm {

class BetaSpec {
  public:
    BetaSpec(double alpha, double beta) : alpha_(alpha), beta_(beta) {
        if (!(alpha > 0.0) || !(beta > 0.0)) {
            throw DomainError("BetaSpec: shape parameters must be positive");
        }
    }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    // The analysis assumes an interior mode (alpha, beta > 1); outside that
    // regime the density is still valid but endpoint-singular.
    bool interior_unimodal() const { return alpha_ > 1.0 && beta_ > 1.0; }

  private:
    double alpha_, beta_;
};

class TruncatedNormalSpec {
  public:
    TruncatedNormalSpec(double location, double scale, double lower = 0.0, double upper = 1.0)
        : location_(location), scale_(scale), lower_(lower), upper_(upper) {
        if (!(scale > 0.0)) throw DomainError("TruncatedNormalSpec: scale must be positive");
        if (!(lower < upper)) throw DomainError("TruncatedNormalSpec: lower must be below upper");
        if (lower < 0.0 || upper > 1.0) {
            throw DomainError("TruncatedNormalSpec: support must lie within [0,1]");
        }
    }
    double location() const { return location_; }
    double scale() const { return scale_; }
    double lower() const { return lower_; }
    double upper() const { return upper_; }
    // Pre-truncation CDF mass below lower/upper.
    double mass_lower() const { return norm_cdf((lower_ - location_) / scale_); }
    double mass_upper() const { return norm_cdf((upper_ - location_) / scale_); }

  private:
    double location_, scale_, lower_, upper_;
};

class PointMassSpec {
  public:
    explicit PointMassSpec(double p) : p_(p) {
        if (!(p >= 0.0 && p <= 1.0)) throw DomainError("PointMassSpec: p must lie in [0,1]");
    }
    double p() const { return p_; }

  private:
    double p_;
};

using MixtureComponent = std::variant<BetaSpec, TruncatedNormalSpec>;

class MixtureSpec {
  public:
    struct Entry {
        double weight;
        MixtureComponent component;
    };

    explicit MixtureSpec(std::vector<Entry> components) : components_(std::move(components)) {
        if (components_.empty()) throw DomainError("MixtureSpec: needs at least one component");
        double total = 0.0;
        for (const auto& e : components_) {
            if (e.weight < 0.0) throw DomainError("MixtureSpec: component weights must be >= 0");
            total += e.weight;
        }
        if (std::fabs(total - 1.0) > 1e-12) {
            throw DomainError("MixtureSpec: component weights must sum to 1 (got " +
                              std::to_string(total) + ")");
        }
    }
    const std::vector<Entry>& components() const { return components_; }

  private:
    std::vector<Entry> components_;
};

using CompetenceDistribution = std::variant<BetaSpec, TruncatedNormalSpec, MixtureSpec, PointMassSpec>;

struct MuSigmaPoint {
    double mu;
    double sigma;
};

struct Moments {
    double mean;
    double variance;
};

// Moment inversion: alpha = mu*nu, beta = (1-mu)*nu with nu = mu(1-mu)/sigma^2 - 1.
inline BetaSpec beta_from_mu_sigma(const MuSigmaPoint& point) {
    if (!(point.mu > 0.0 && point.mu < 1.0)) {
        throw DomainError("beta_from_mu_sigma: mu must lie in (0,1)");
    }
    if (!(point.sigma > 0.0)) {
        throw DomainError("beta_from_mu_sigma: sigma must be positive");
    }
    double bound = point.mu * (1.0 - point.mu);
    double var = point.sigma * point.sigma;
    if (var >= bound) {
        throw InfeasiblePoint("beta_from_mu_sigma: sigma^2 >= mu(1-mu) at mu=" +
                              std::to_string(point.mu) + " sigma=" + std::to_string(point.sigma));
    }
    double nu = bound / var - 1.0;
    return BetaSpec(point.mu * nu, (1.0 - point.mu) * nu);
}

inline double pdf(const BetaSpec& d, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("pdf: p outside [0,1]");
    double a = d.alpha(), b = d.beta();
    if (p == 0.0) {
        if (a > 1.0) return 0.0;
        if (a == 1.0) return std::exp(-log_beta(a, b));
        return std::numeric_limits<double>::infinity();
    }
    if (p == 1.0) {
        if (b > 1.0) return 0.0;
        if (b == 1.0) return std::exp(-log_beta(a, b));
        return std::numeric_limits<double>::infinity();
    }
    return std::exp((a - 1.0) * std::log(p) + (b - 1.0) * std::log1p(-p) - log_beta(a, b));
}

inline double pdf(const TruncatedNormalSpec& d, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("pdf: p outside [0,1]");
    if (p < d.lower() || p > d.upper()) return 0.0;
    double z = (p - d.location()) / d.scale();
    double mass = d.mass_upper() - d.mass_lower();
    return norm_pdf(z) / (d.scale() * mass);
}

inline double pdf(const MixtureSpec& d, double p) {
    double acc = 0.0;
    for (const auto& e : d.components()) {
        acc += e.weight * std::visit([&](const auto& c) { return pdf(c, p); }, e.component);
    }
    return acc;
}

inline double pdf(const PointMassSpec&, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("pdf: p outside [0,1]");
    throw DomainError("pdf: point mass has no density");
}

inline double pdf(const CompetenceDistribution& d, double p) {
    return std::visit([&](const auto& c) { return pdf(c, p); }, d);
}

inline Moments moments(const BetaSpec& d) {
    double s = d.alpha() + d.beta();
    double mean = d.alpha() / s;
    return {mean, d.alpha() * d.beta() / (s * s * (s + 1.0))};
}

inline Moments moments(const TruncatedNormalSpec& d) {
    // Quadrature rather than the closed form; tests cross-check against it.
    auto m1 = integrate_adaptive([&](double p) { return p * pdf(d, p); }, d.lower(), d.upper());
    auto m2 = integrate_adaptive([&](double p) { return p * p * pdf(d, p); }, d.lower(), d.upper());
    return {m1.value, m2.value - m1.value * m1.value};
}

inline Moments moments(const MixtureSpec& d) {
    // Law of total expectation/variance over the components.
    double mean = 0.0, second = 0.0;
    for (const auto& e : d.components()) {
        Moments cm = std::visit([](const auto& c) { return moments(c); }, e.component);
        mean += e.weight * cm.mean;
        second += e.weight * (cm.variance + cm.mean * cm.mean);
    }
    return {mean, second - mean * mean};
}

inline Moments moments(const PointMassSpec& d) { return {d.p(), 0.0}; }

inline Moments moments(const CompetenceDistribution& d) {
    return std::visit([](const auto& c) { return moments(c); }, d);
}

inline double sample_one(const BetaSpec& d, std::mt19937_64& rng) {
    std::gamma_distribution<double> ga(d.alpha(), 1.0);
    std::gamma_distribution<double> gb(d.beta(), 1.0);
    double x = ga(rng);
    double y = gb(rng);
    double v = x / (x + y);
    if (!(v >= 0.0)) v = 0.0;
    if (!(v <= 1.0)) v = 1.0;
    return v;
}

inline double sample_one(const TruncatedNormalSpec& d, std::mt19937_64& rng) {
    // Inverse-CDF: exactly one uniform per draw, no rejection loop.
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double fa = d.mass_lower();
    double fb = d.mass_upper();
    double u = fa + uni(rng) * (fb - fa);
    u = std::min(std::max(u, std::numeric_limits<double>::min()), 1.0 - 1e-16);
    double v = d.location() + d.scale() * norm_quantile(u);
    return std::min(std::max(v, d.lower()), d.upper());
}

inline double sample_one(const PointMassSpec& d, std::mt19937_64&) { return d.p(); }

inline double sample_one(const MixtureSpec& d, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double u = uni(rng);
    double acc = 0.0;
    const auto& comps = d.components();
    for (std::size_t i = 0; i + 1 < comps.size(); ++i) {
        acc += comps[i].weight;
        if (u < acc) {
            return std::visit([&](const auto& c) { return sample_one(c, rng); }, comps[i].component);
        }
    }
    return std::visit([&](const auto& c) { return sample_one(c, rng); }, comps.back().component);
}

inline double sample_one(const CompetenceDistribution& d, std::mt19937_64& rng) {
    return std::visit([&](const auto& c) { return sample_one(c, rng); }, d);
}

inline std::vector<double> sample(const CompetenceDistribution& d, std::size_t count,
                                  std::uint64_t seed) {
    std::vector<double> out;
    out.reserve(count);
    auto rng = make_rng(seed);
    for (std::size_t i = 0; i < count; ++i) out.push_back(sample_one(d, rng));
    return out;
}

namespace detail {

// Beta expectation with the endpoint power singularities removed exactly:
// p = u^(1/a) on the left half and 1 - p = v^(1/b) on the right turn
// p^(a-1) dp and (1-p)^(b-1) dp into du/a and dv/b.
template <class H>
double integrate_against_beta(const BetaSpec& d, H&& h, double abs_tol) {
    const double a = d.alpha(), b = d.beta();
    const double log_norm = log_beta(a, b);
    auto left = integrate_adaptive(
        [&](double u) {
            double p = std::pow(u, 1.0 / a);
            return h(p) * std::exp((b - 1.0) * std::log1p(-p) - log_norm) / a;
        },
        0.0, std::pow(0.5, a), 0.5 * abs_tol);
    auto right = integrate_adaptive(
        [&](double v) {
            double p = 1.0 - std::pow(v, 1.0 / b);
            return h(p) * std::exp((a - 1.0) * std::log(p) - log_norm) / b;
        },
        0.0, std::pow(0.5, b), 0.5 * abs_tol);
    return left.value + right.value;
}

}  // namespace detail

// E_f[h(p)] by adaptive quadrature against the density (exact for a point
// mass; mixtures by linearity). h must be bounded on [0,1].
template <class H>
double expect(const CompetenceDistribution& d, H&& h, double abs_tol = 1e-8) {
    if (const auto* pm = std::get_if<PointMassSpec>(&d)) {
        return h(pm->p());
    }
    if (const auto* beta = std::get_if<BetaSpec>(&d)) {
        if (!beta->interior_unimodal()) {
            return detail::integrate_against_beta(*beta, h, abs_tol);
        }
    }
    if (const auto* mix = std::get_if<MixtureSpec>(&d)) {
        double acc = 0.0;
        for (const auto& entry : mix->components()) {
            acc += entry.weight *
                   std::visit([&](const auto& c) { return expect(CompetenceDistribution(c), h, abs_tol); },
                              entry.component);
        }
        return acc;
    }
    return integrate_adaptive([&](double p) { return h(p) * pdf(d, p); }, 0.0, 1.0, abs_tol).value;
}

// Three equal-share truncated normal components at (mu1, 0.5, mu3) with
// common scale 0.12 on (0,1). mu1 and mu3 are pre-truncation locations.
inline MixtureSpec cmm3_wide(double mu1, double mu3) {
    if (!(mu1 > 0.0 && mu1 < 0.5)) {
        throw DomainError("cmm3_wide: mu1 must lie in (0, 0.5)");
    }
    if (!(mu3 > 0.5 && mu3 < 1.0)) {
        throw DomainError("cmm3_wide: mu3 must lie in (0.5, 1)");
    }
    constexpr double kComponentScale = 0.12;
    const double w = 1.0 / 3.0;
    std::vector<MixtureSpec::Entry> entries;
    entries.push_back({w, TruncatedNormalSpec(mu1, kComponentScale)});
    entries.push_back({w, TruncatedNormalSpec(0.5, kComponentScale)});
    entries.push_back({w, TruncatedNormalSpec(mu3, kComponentScale)});
    return MixtureSpec(std::move(entries));
}

// Present when a spec leaves the interior-unimodal regime the analysis
// assumes; callers surface it, nothing is rejected.
inline std::optional<std::string> regime_warning(const CompetenceDistribution& d) {
    if (const auto* b = std::get_if<BetaSpec>(&d)) {
        if (!b->interior_unimodal()) {
            return "Beta(" + std::to_string(b->alpha()) + "," + std::to_string(b->beta()) +
                   ") is outside the interior-unimodal regime (alpha,beta > 1); endpoint "
                   "densities may be singular";
        }
    }
    return std::nullopt;
}

}  // namespace escm
