#pragma once

#include <cmath>
#include <algorithm>
#include <limits>
#include <sstream>
#include <vector>

#include "evolution.hpp"
#include "linear_solvers.hpp"

namespace pacemaker {

struct LeadingOrder {
    Field phi1;
    double a1 = 0, b1 = 0;
};

// Order-epsilon pacemaker: Phi ~ eps (phi1 + (a1 + b1 x) tanh x).
inline LeadingOrder leading_order(const Problem& p)
{
    Field source = -1.0 * p.g.samples;
    if (p.model == Model::nonlocal) source = convolve(p.kernels->sym.G_m1, source);
    const LaplaceSolution s = laplace_bordered(source);
    return {s.phi, s.a, s.b};
}

// Quadratic nonlinearity of the local model at phi = phi1 + rho, a = a1 + alpha, b = b1 + beta:
//   phi_x^2 - b^2 (1 - S^2) + 2 (phi_x + b S)(a + b x) S' + (a + b x)^2 S'^2
inline Field nonlinearity_local(const Field& rho, double alpha, double beta, const LeadingOrder& lo)
{
    const Grid& g = rho.grid;
    const Field phi_x = derivative(lo.phi1 + rho, 1);
    const double a = lo.a1 + alpha, b = lo.b1 + beta;
    Field out(g);
    for (std::size_t i = 0; i < g.n_points; ++i) {
        const double x = g.x(i), S = front::S(x), dS = front::dS(x), ab = a + b * x;
        out.values[i] = phi_x[i] * phi_x[i] - b * b * dS + 2.0 * (phi_x[i] + b * S) * ab * dS + ab * ab * dS * dS;
    }
    return out;
}

struct NonlocalNonlinearity {
    Field N1;      // G_{-1} * N1~
    Field N2;      // D N2bar + N3
    Field N2bar;   // J0 G_{-2} * (S J' * rho) + J0 c0 S J2 * rho_x
    Field N3;      // J0 G_{-1} * (S J' * phi1) + J0 c0 [S, D](J2 * rho_x)
    Field commutator; // [S, D](J2 * rho_x)
};

// Nonlinear terms of the nonlocal corrector. With phi = phi1 + rho, a = a1 + alpha,
// b = b1 + beta and J0 the mass of J:
//   N1~ = b^2 ((J'*xS)^2 - J0^2) + a^2 (J'*S)^2 + (J'*phi)^2 + 2a (J'*phi)(J'*S)
//         + 2ab (J'*S)(J'*xS) + 2b (J'*phi)(J'*xS - J0 S)
//   N2  = J0 G_{-1} * (S J'*phi) - c S rho_x,  c = c0 J0^2, c0 = 2/G2.
inline NonlocalNonlinearity nonlinearity_nonlocal(const Field& rho, double alpha, double beta, const LeadingOrder& lo,
                                                  const KernelSet& K)
{
    const Grid& g = rho.grid;
    const DerivedSymbols& d = K.sym;
    const double J0 = d.J0, c0 = d.c0;
    const double a = lo.a1 + alpha, b = lo.b1 + beta;
    const Field S = Field::from_function(g, front::S);
    const Field phi = lo.phi1 + rho;
    const Field Jphi = convolve(d.J_prime, phi);

    Field n1(g);
    for (std::size_t i = 0; i < g.n_points; ++i) {
        const double jxs = K.Jp_xS[i], js = K.Jp_S[i], jp = Jphi[i];
        n1.values[i] = b * b * (jxs * jxs - J0 * J0) + a * a * js * js + jp * jp + 2.0 * a * jp * js + 2.0 * a * b * js * jxs
                       + 2.0 * b * jp * (jxs - J0 * S[i]);
    }
    NonlocalNonlinearity out;
    out.N1 = convolve(d.G_m1, n1);

    const Field rho_x = derivative_localized(rho, 1);
    const Field j2 = convolve(d.J2, rho_x);
    out.N2bar = J0 * convolve(d.G_m2, S * convolve(d.J_prime, rho)) + (J0 * c0) * (S * j2);
    out.commutator = S * convolve(d.D, j2) - convolve(d.D, S * j2);
    out.N3 = J0 * convolve(d.G_m1, S * convolve(d.J_prime, lo.phi1)) + (J0 * c0) * out.commutator;
    out.N2 = convolve(d.D, out.N2bar) + out.N3;
    return out;
}

struct PacemakerAnsatz {
    Model model = Model::local;
    double epsilon = 0;
    Field phi_core;
    double phi0 = 0, k = 0, omega = 0;
    double J0 = 1;

    double value(std::size_t i) const
    {
        const double x = phi_core.grid.x(i);
        return phi_core[i] + (phi0 + k * x) * std::tanh(x);
    }

    Field assembled() const
    {
        Field out(phi_core.grid);
        for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = value(i);
        return out;
    }

    AffineFarField far_field() const { return {0.0, phi0, 0.0, k}; }
    double group_velocity_plus() const { return pacemaker::group_velocity(k, model, J0); }
};

struct CorrectorState {
    Field rho;
    double alpha = 0, beta = 0;
    int iterations = 0;
    std::vector<double> differences;
    bool converged = false;
    double damping = 1.0;
    double steady_residual = 0;
};

struct CorrectorOptions {
    double tolerance = 1e-9;
    int max_iter = 200;
    double sigma = 2.5;   // residuals in L^2_{sigma+2}, differences in M^{2,2}_sigma
    bool allow_wrong_sign = false;
};

inline PacemakerAnsatz assemble_ansatz(const Problem& p, double eps, const LeadingOrder& lo, const Field& rho, double alpha,
                                       double beta)
{
    PacemakerAnsatz an;
    an.model = p.model;
    an.epsilon = eps;
    an.phi_core = eps * (lo.phi1 + rho);
    an.phi0 = eps * (lo.a1 + alpha);
    an.k = eps * (lo.b1 + beta);
    an.J0 = p.model == Model::nonlocal ? p.kernels->sym.J0 : 1.0;
    an.omega = dispersion(an.k, p.model, an.J0);
    return an;
}

inline double ansatz_residual(const Problem& p, const PacemakerAnsatz& an, double sigma)
{
    return steady_residual(p, an.epsilon, an.far_field(), an.phi_core, an.omega, sigma + 2.0);
}

// Damped Picard iteration for (rho, alpha, beta):
//   local:    T_b (rho, alpha, beta) = eps [N(phi1 + rho, a1 + alpha, b1 + beta) + (b1 + beta) 2 S phi1_x]
//   nonlocal: T_{cb}(rho, alpha, beta) = eps N1 + 2 b N2
// with b = eps (b1 + beta) refreshed every step.
inline std::pair<CorrectorState, PacemakerAnsatz> correct(const Problem& p, double eps, const LeadingOrder& lo,
                                                          const CorrectorOptions& opt = {})
{
    const Grid& g = p.grid;
    if (eps != 0.0 && !opt.allow_wrong_sign && eps * p.g.g0 > 0.0) {
        std::ostringstream os;
        os << "sign condition violated: sign(eps) must be -sign(g0) (eps = " << eps << ", g0 = " << p.g.g0
           << "); no source exists for this sign";
        throw SignConditionError(os.str());
    }
    const double c = p.model == Model::local ? 1.0 : p.kernels->sym.c0 * p.kernels->sym.J0 * p.kernels->sym.J0;
    const Field S = Field::from_function(g, front::S);
    const Field phi1_x = derivative(lo.phi1, 1);

    CorrectorState st;
    st.rho = Field(g);
    double theta = 1.0;
    auto diff_norm = [&](const Field& dr, double da, double db) {
        return norm(dr, NormSpec::kondratiev(opt.sigma, 2)) + std::abs(da) + std::abs(db);
    };

    for (int it = 1; it <= opt.max_iter; ++it) {
        const double b = eps * (lo.b1 + st.beta);
        if (b < 0.0) {
            std::ostringstream os;
            os << "iterate reached b = eps (b1 + beta) = " << b << " < 0; sign condition violated";
            throw SignConditionError(os.str());
        }
        BorderedSolution next;
        if (p.model == Model::local) {
            Field rhs = nonlinearity_local(st.rho, st.alpha, st.beta, lo);
            rhs += (2.0 * (lo.b1 + st.beta)) * (S * phi1_x);
            next = solve_Tb(b, eps * rhs, opt.sigma + 2.0);
        } else {
            const NonlocalNonlinearity n = nonlinearity_nonlocal(st.rho, st.alpha, st.beta, lo, *p.kernels);
            next = solve_Tb(c * b, eps * n.N1 + (2.0 * b) * n.N2, opt.sigma + 2.0);
        }
        const Field dr = next.rho - st.rho;
        const double da = next.alpha - st.alpha, db = next.beta - st.beta;
        const double diff = diff_norm(dr, da, db);
        if (st.differences.size() >= 2 && diff > st.differences.back() && theta == 1.0) theta = 0.5;
        st.rho += theta * dr;
        st.alpha += theta * da;
        st.beta += theta * db;
        st.differences.push_back(theta * diff);
        st.iterations = it;
        if (!std::isfinite(diff)) break;
        // weighted derivative norms amplify round-off at the domain edge; a step at machine precision
        // in sup norm is converged even when the weighted difference sits above tolerance
        const double scale = std::max({1.0, st.rho.max_abs(), std::abs(st.alpha), std::abs(st.beta)});
        const double sup = std::max({dr.max_abs(), std::abs(da), std::abs(db)});
        if (theta * diff < opt.tolerance || sup < 64.0 * std::numeric_limits<double>::epsilon() * scale) {
            st.converged = true;
            break;
        }
    }
    st.damping = theta;
    PacemakerAnsatz an = assemble_ansatz(p, eps, lo, st.rho, st.alpha, st.beta);
    st.steady_residual = ansatz_residual(p, an, opt.sigma);
    if (!st.converged) {
        std::ostringstream os;
        os << "corrector did not converge in " << opt.max_iter << " iterations (last difference "
           << (st.differences.empty() ? 0.0 : st.differences.back()) << ")";
        throw DivergenceError(os.str(), st.differences);
    }
    return {st, an};
}

// Ansatz built from the leading order alone (rho = alpha = beta = 0).
inline PacemakerAnsatz leading_order_ansatz(const Problem& p, double eps, const LeadingOrder& lo)
{
    return assemble_ansatz(p, eps, lo, Field(p.grid), 0.0, 0.0);
}

} // namespace pacemaker
