#pragma once

#include "far_field.hpp"
#include "problem.hpp"
#include "weighted_norms.hpp"

namespace pacemaker {

// Right-hand side of phi_t for phi = A + r, with A an affine far field and r localized:
//   local:    phi_xx - phi_x^2 + eps g
//   nonlocal: -phi + G * phi - (J' * phi)^2 + eps g
// Convolutions of A use the precomputed quadratures; r goes through zero-padded FFTs.
class Evolution {
public:
    Evolution(const Problem& p, double eps) : p_(p), eps_(eps)
    {
        const Grid& g = p.grid;
        S_ = Field::from_function(g, front::S);
        dS_ = Field::from_function(g, front::dS);
        ddS_ = Field::from_function(g, front::ddS);
        dxS_ = Field::from_function(g, front::d_xS);
        ddxS_ = Field::from_function(g, front::dd_xS);
        forcing_ = eps * p.g.samples;
        d1_ = derivative_multiplier(g, 1);
        d2_ = derivative_multiplier(g, 2);
    }

    const Problem& problem() const { return p_; }
    double epsilon() const { return eps_; }
    const Field& forcing() const { return forcing_; }

    // Linear symbol acting on r (padded frequencies).
    std::vector<cplx> linear_symbol() const
    {
        if (p_.model == Model::local) return d2_;
        return p_.kernels->sym.G_minus_I.padded;
    }

    // Affine-part contributions that do not depend on r: A'' (local) or (G - I) * A (nonlocal).
    Field affine_linear(const AffineFarField& a) const
    {
        if (p_.model == Model::local) return a.od * ddS_ + a.kd * ddxS_;
        return a.od * p_.kernels->GmI_S + a.kd * p_.kernels->GmI_xS;
    }

    // Transport field: phi_x (local) or J' * phi (nonlocal), from the spectrum of padded r.
    Field transport(const AffineFarField& a, const std::vector<cplx>& r_spec) const
    {
        const Grid& g = p_.grid;
        std::vector<cplx> s = r_spec;
        const auto& m = p_.model == Model::local ? d1_ : p_.kernels->sym.J_prime.padded;
        for (std::size_t k = 0; k < s.size(); ++k) s[k] *= m[k];
        Field out = crop_padded(std::move(s), g);
        if (p_.model == Model::local) {
            out += a.od * dS_ + a.kd * dxS_;
            for (auto& v : out.values) v += a.kc;
        } else {
            const KernelSet& K = *p_.kernels;
            out += a.od * K.Jp_S + a.kd * K.Jp_xS;
            for (auto& v : out.values) v += a.kc * K.sym.J0;
        }
        return out;
    }

    // Nonlinear-plus-forcing part: affine_linear(A) - transport^2 + eps g.
    Field explicit_part(const AffineFarField& a, const std::vector<cplx>& r_spec) const
    {
        Field t = transport(a, r_spec);
        Field out = affine_linear(a);
        for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += forcing_.values[i] - t.values[i] * t.values[i];
        return out;
    }

    Field rhs(const AffineFarField& a, const Field& r) const
    {
        const auto spec = padded_spectrum(r);
        const auto lin = linear_symbol();
        std::vector<cplx> lr = spec;
        for (std::size_t k = 0; k < lr.size(); ++k) lr[k] *= lin[k];
        Field out = crop_padded(std::move(lr), p_.grid);
        out += explicit_part(a, spec);
        return out;
    }

private:
    Problem p_;
    double eps_;
    Field S_, dS_, ddS_, dxS_, ddxS_, forcing_;
    std::vector<cplx> d1_, d2_;
};

// || rhs(Phi) + omega || in L^2_gamma for Phi = A + r.
inline double steady_residual(const Problem& p, double eps, const AffineFarField& a, const Field& r, double omega, double gamma)
{
    const Evolution ev(p, eps);
    Field res = ev.rhs(a, r);
    for (auto& v : res.values) v += omega;
    return norm(res, NormSpec::lp(gamma));
}

} // namespace pacemaker
