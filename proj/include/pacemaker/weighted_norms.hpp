#pragma once

#include <cmath>
#include <stdexcept>

#include "far_field.hpp"

namespace pacemaker {

inline double weight(double x, double gamma) { return std::pow(1.0 + x * x, 0.5 * gamma); }

enum class NormKind { lp_weighted, sobolev_weighted, kondratiev };

struct NormSpec {
    NormKind kind = NormKind::lp_weighted;
    double gamma = 0.0;
    double p = 2.0;
    int k = 0;

    static NormSpec lp(double gamma, double p = 2.0) { return {NormKind::lp_weighted, gamma, p, 0}; }
    static NormSpec sobolev(double gamma, int k, double p = 2.0) { return {NormKind::sobolev_weighted, gamma, p, k}; }
    static NormSpec kondratiev(double gamma, int k, double p = 2.0) { return {NormKind::kondratiev, gamma, p, k}; }
};

// Sum over j <= k of h * sum |d^j f|^p <x>^{p(gamma + j)} (Kondratiev) or <x>^{p gamma} (Sobolev).
inline double norm(const Field& f, const NormSpec& spec)
{
    if (!(spec.p > 1.0) || std::isinf(spec.p)) throw std::invalid_argument("norm exponent p must lie in (1, inf)");
    if (spec.k < 0) throw std::invalid_argument("derivative order must be non-negative");
    const int kmax = spec.kind == NormKind::lp_weighted ? 0 : spec.k;
    const double h = f.grid.spacing();
    double total = 0.0;
    for (int j = 0; j <= kmax; ++j) {
        const Field d = j == 0 ? f : derivative(f, j);
        const double g = spec.kind == NormKind::kondratiev ? spec.gamma + j : spec.gamma;
        double s = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double v = d[i] * weight(f.grid.x(i), g);
            s += std::pow(std::abs(v), spec.p);
        }
        if (!std::isfinite(s)) throw std::domain_error("non-finite derivative samples: field is under-resolved");
        total += s * h;
    }
    return std::pow(total, 1.0 / spec.p);
}

struct PairingResult {
    double value = 0.0;
    bool tail_warning = false;
};

inline PairingResult pairing_report(const Field& f, const Field& g)
{
    f.check(g);
    const double h = f.grid.spacing();
    PairingResult r;
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        r.value += f[i] * g[i];
        acc += std::abs(f[i] * g[i]);
    }
    r.value *= h;
    acc *= h;
    const double edge = std::max(std::abs(f[0] * g[0]), std::abs(f[f.size() - 1] * g[f.size() - 1]));
    r.tail_warning = edge > 1e-10 * std::max(acc, 1e-300);
    return r;
}

inline double pairing(const Field& f, const Field& g) { return pairing_report(f, g).value; }

} // namespace pacemaker
