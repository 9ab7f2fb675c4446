#pragma once

#include <memory>
#include <optional>
#include <string>

#include "kernels.hpp"

namespace pacemaker {

enum class Model { local, nonlocal };

inline std::string to_string(Model m) { return m == Model::local ? "local" : "nonlocal"; }

// Kernels of the nonlocal model with their derived symbols and the convolutions of
// the non-decaying profiles S and xS, which are evaluated by direct quadrature.
struct KernelSet {
    Kernel G, J;
    DerivedSymbols sym;
    Field GmI_S, GmI_xS;  // (G - I) * S, (G - I) * (x S)
    Field Jp_S, Jp_xS;    // J' * S = J * S', J' * (x S) = J * (x S)'

    static std::shared_ptr<const KernelSet> make(const Kernel& G, const Kernel& J)
    {
        auto k = std::make_shared<KernelSet>();
        k->G = G;
        k->J = J;
        k->sym = derived_symbols(G, J);
        const Grid& g = G.grid;
        k->GmI_S = convolve_analytic(G, front::S, g) - Field::from_function(g, front::S);
        k->GmI_xS = convolve_analytic(G, front::xS, g) - Field::from_function(g, front::xS);
        k->Jp_S = convolve_analytic(J, front::dS, g);
        k->Jp_xS = convolve_analytic(J, front::d_xS, g);
        return k;
    }
};

struct Problem {
    Model model = Model::local;
    Grid grid;
    Inhomogeneity g;
    std::shared_ptr<const KernelSet> kernels; // required for the nonlocal model

    Problem() = default;
    Problem(Model m, const Inhomogeneity& inh, std::shared_ptr<const KernelSet> k = nullptr)
        : model(m), grid(inh.grid), g(inh), kernels(std::move(k))
    {
        if (model == Model::nonlocal) {
            if (!kernels) throw ConfigError("the nonlocal model needs kernels G and J");
            require_same_grid(kernels->G.grid, grid);
        }
    }

    // Coefficient of k^2 in the dispersion relation.
    double kappa() const { return model == Model::local ? 1.0 : kernels->sym.J0 * kernels->sym.J0; }
};

inline double dispersion(double k, Model model, double J0 = 1.0)
{
    return model == Model::local ? k * k : J0 * J0 * k * k;
}

inline double group_velocity(double k, Model model, double J0 = 1.0)
{
    return model == Model::local ? 2.0 * k : 2.0 * J0 * J0 * k;
}

} // namespace pacemaker
